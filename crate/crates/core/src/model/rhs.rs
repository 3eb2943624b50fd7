use log::warn;

use crate::error::Result;
use crate::spectral::{
    dealias, divergence, inverse_laplacian, leray_project, transform_forward, transform_inverse,
    ScalarField, Spectrum, VectorField, DIM,
};

use super::law::PressureFunction;
use super::state::{check_density, State, Tendency};

/// Projects a nonlinear product back onto the two-thirds band.
pub(crate) fn dealiased(field: &ScalarField) -> ScalarField {
    transform_inverse(&dealias(&transform_forward(field)))
}

/// Nodal values of `f(rho_bar + rho_tilde, v)`.
pub(crate) fn eval_law(
    law: &dyn PressureFunction,
    rho_tilde: &ScalarField,
    rho_bar: f64,
    v: &VectorField,
) -> ScalarField {
    let values = (0..rho_tilde.values().len())
        .map(|node| law.eval(rho_tilde.values()[node] + rho_bar, &v.at(node)))
        .collect();
    ScalarField::from_raw(rho_tilde.grid(), values)
}

/// The three dealiased nonlinear terms of the transport-form system.
pub(crate) struct AdvectionTerms {
    /// `v . grad(rho_tilde)`
    pub transport: ScalarField,
    /// `(v . grad) v`
    pub inertia: VectorField,
    /// `f(rho, v) grad(rho_tilde)`
    pub density_force: VectorField,
}

pub(crate) fn advection_terms(
    rho_tilde: &ScalarField,
    rho_bar: f64,
    v: &VectorField,
    law: &dyn PressureFunction,
) -> AdvectionTerms {
    let rho_spec = transform_forward(rho_tilde);
    let grad_rho: [ScalarField; DIM] =
        std::array::from_fn(|j| transform_inverse(&rho_spec.derivative(j)));
    let v_spec: [Spectrum; DIM] = std::array::from_fn(|j| transform_forward(v.component(j)));

    let mut transport = ScalarField::zeros(rho_tilde.grid());
    for (j, g) in grad_rho.iter().enumerate() {
        transport = &transport + &(v.component(j) * g);
    }

    let inertia: [ScalarField; DIM] = std::array::from_fn(|i| {
        let mut acc = ScalarField::zeros(rho_tilde.grid());
        for j in 0..DIM {
            let dv = transform_inverse(&v_spec[i].derivative(j));
            acc = &acc + &(v.component(j) * &dv);
        }
        dealiased(&acc)
    });

    let f = eval_law(law, rho_tilde, rho_bar, v);
    let density_force: [ScalarField; DIM] =
        std::array::from_fn(|j| dealiased(&(&f * &grad_rho[j])));

    AdvectionTerms {
        transport: dealiased(&transport),
        inertia: VectorField::from_parts(inertia),
        density_force: VectorField::from_parts(density_force),
    }
}

/// Pressure-free tendency of the transport-form system:
/// `rho_t = -v.grad(rho_tilde)`, `v_t = -(v.grad)v - f grad(rho_tilde)`.
/// Products are dealiased.
pub fn advective_rhs(state: &State, law: &dyn PressureFunction) -> Result<Tendency> {
    state.check_positive()?;
    let terms = advection_terms(&state.rho_tilde, state.rho_bar, &state.v, law);
    Ok(Tendency {
        rho: -&terms.transport,
        p: None,
        v: (&terms.inertia + &terms.density_force).scaled(-1.0),
    })
}

/// Solves `lap P = -div((v.grad)v) - div(f grad rho)` with zero mean.
pub fn recover_pressure(state: &State, law: &dyn PressureFunction) -> Result<ScalarField> {
    check_density(&state.rho_tilde, state.rho_bar)?;
    let div = divergence(&state.v).norm();
    if div > 1e-6 {
        warn!("recovering pressure from a velocity with |div v| = {div:.3e}");
    }
    let terms = advection_terms(&state.rho_tilde, state.rho_bar, &state.v, law);
    let forcing = &terms.inertia + &terms.density_force;
    Ok(inverse_laplacian(&(-&divergence(&forcing))))
}

/// Block projector `diag(Id, P)`: density untouched, velocity Leray-projected.
pub fn block_project(t: &Tendency) -> Tendency {
    Tendency {
        rho: t.rho.clone(),
        p: t.p.clone(),
        v: leray_project(&t.v),
    }
}

/// Applies the nodal symmetrizer `diag(f/rho, 1, .., 1)` evaluated at `state`.
pub fn apply_symmetrizer(t: &Tendency, state: &State, law: &dyn PressureFunction) -> Tendency {
    let f = eval_law(law, &state.rho_tilde, state.rho_bar, &state.v);
    let weight = f.zip_map(&state.rho_tilde, |fv, r| fv / (r + state.rho_bar));
    Tendency {
        rho: &weight * &t.rho,
        p: t.p.clone(),
        v: t.v.clone(),
    }
}
