//! The epsilon-approximation right-hand sides and the reduction oracle.
//!
//! * Scheme A (`MollifiedProjected`): mollified transport system projected
//!   by the block Leray projector; velocity stays divergence-free.
//! * Scheme B (`ContinuousProjection`): mollified system with the gradient
//!   part of `v` relaxed by the stiff penalty `-(I - P)v / eps`.
//! * Scheme C (`ArtificialCompressibility`): conservative density, an
//!   artificial pressure `P~` and the constant acoustic operator of size `1/eps`.
//! * `ReductionOracle`: for `f = f(rho)` the system is homogeneous Euler plus
//!   passive transport, with `P = Q - phi(rho)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{
    advection_terms, check_density, dealiased, eval_law, recover_pressure, PressureFunction, PressureLaw, State,
    Tendency,
};
use crate::spectral::{
    check_eps, divergence, gradient, gradient_part, leray_project, mollify, mollify_vector,
    MollifierKind, ScalarField, VectorField,
};

/// Velocity divergence above which a Scheme A state is rejected.
pub const SOLENOIDAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    MollifiedProjected,
    ContinuousProjection,
    ArtificialCompressibility,
    ReductionOracle,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::MollifiedProjected => "a",
            SchemeKind::ContinuousProjection => "b",
            SchemeKind::ArtificialCompressibility => "c",
            SchemeKind::ReductionOracle => "oracle",
        }
    }

    pub fn uses_eps(&self) -> bool {
        !matches!(self, SchemeKind::ReductionOracle)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" | "mollified_projected" => Ok(SchemeKind::MollifiedProjected),
            "b" | "continuous_projection" => Ok(SchemeKind::ContinuousProjection),
            "c" | "artificial_compressibility" => Ok(SchemeKind::ArtificialCompressibility),
            "oracle" | "reduction_oracle" => Ok(SchemeKind::ReductionOracle),
            other => Err(Error::param("scheme.kind", format!("unknown scheme `{other}`"))),
        }
    }
}

/// How Scheme B evaluates `A0^-1 J [A0 A_j d_j J u]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SandwichMode {
    /// Symmetrizer cancelled analytically before mollification.
    #[default]
    Cancelled,
    /// Symmetrizer applied, mollified through, and inverted nodally.
    Literal,
}

#[derive(Clone, Debug)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub eps: f64,
    /// Used by Schemes A and B.
    pub mollifier: MollifierKind,
    /// Compressible perturbation of the initial velocity (B and C).
    pub v0_1: Option<VectorField>,
    /// Initial artificial pressure perturbation (C); zero when absent.
    pub p_tilde_0: Option<ScalarField>,
    pub sandwich: SandwichMode,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, eps: f64) -> Self {
        SchemeConfig {
            kind,
            eps,
            mollifier: MollifierKind::GaussianMultiplier,
            v0_1: None,
            p_tilde_0: None,
            sandwich: SandwichMode::Cancelled,
        }
    }

    pub fn with_mollifier(mut self, kind: MollifierKind) -> Self {
        self.mollifier = kind;
        self
    }

    pub fn with_v0_1(mut self, v0_1: VectorField) -> Self {
        self.v0_1 = Some(v0_1);
        self
    }

    pub fn validate(&self, law: &PressureLaw) -> Result<()> {
        if self.kind.uses_eps() {
            check_eps(self.eps)?;
        }
        if self.kind == SchemeKind::ReductionOracle && !law.is_reducible() {
            return Err(Error::NotReducible(law.to_string()));
        }
        Ok(())
    }

    /// Nonstiff tendency and the stiff linear operator for this scheme.
    pub fn split_rhs(&self, state: &State, law: &dyn PressureFunction) -> Result<SplitTendency> {
        match self.kind {
            SchemeKind::MollifiedProjected => Ok(SplitTendency {
                nonstiff: rhs_scheme_a(state, law, self.eps, self.mollifier)?,
                stiff: StiffOperator::None,
            }),
            SchemeKind::ContinuousProjection => {
                rhs_scheme_b_with(state, law, self.eps, self.mollifier, self.sandwich)
            }
            SchemeKind::ArtificialCompressibility => rhs_scheme_c_split(state, law, self.eps),
            SchemeKind::ReductionOracle => Ok(SplitTendency {
                nonstiff: reduction_oracle_rhs(state, law)?,
                stiff: StiffOperator::None,
            }),
        }
    }
}

/// Linear stiff operators applied exactly by the integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StiffOperator {
    None,
    /// `v' = -(I - P) v / eps`
    ProjectionPenalty { eps: f64 },
    /// `P~' = -div(v)/eps`, `v' = -grad(P~)/eps`
    AcousticPair { eps: f64 },
}

#[derive(Clone, Debug)]
pub struct SplitTendency {
    pub nonstiff: Tendency,
    pub stiff: StiffOperator,
}

fn mollified_state(
    state: &State,
    eps: f64,
    kind: MollifierKind,
) -> Result<(ScalarField, VectorField)> {
    let rho = mollify(&state.rho_tilde, eps, kind)?;
    check_density(&rho, state.rho_bar)?;
    Ok((rho, mollify_vector(&state.v, eps, kind)?))
}

/// `-P J [A_j(J(u + u_bar)) d_j J u]` with the transport-form matrices.
pub fn rhs_scheme_a(
    state: &State,
    law: &dyn PressureFunction,
    eps: f64,
    mollifier: MollifierKind,
) -> Result<Tendency> {
    check_eps(eps)?;
    state.check_positive()?;
    let div = divergence(&state.v).norm();
    if div > SOLENOIDAL_TOL {
        return Err(Error::NotSolenoidal(div));
    }
    let (rho_m, v_m) = mollified_state(state, eps, mollifier)?;
    let terms = advection_terms(&rho_m, state.rho_bar, &v_m, law);
    let rho = mollify(&terms.transport, eps, mollifier)?;
    let force = mollify_vector(&(&terms.inertia + &terms.density_force), eps, mollifier)?;
    Ok(Tendency {
        rho: -&rho,
        p: None,
        v: leray_project(&force).scaled(-1.0),
    })
}

/// `-(I - P) v / eps`
pub fn penalty_term(v: &VectorField, eps: f64) -> Result<VectorField> {
    check_eps(eps)?;
    Ok(gradient_part(v).scaled(-1.0 / eps))
}

/// Pressure gradient reconstructed from the Hodge split, `(I - P) v / eps`.
pub fn penalty_pressure_gradient(v: &VectorField, eps: f64) -> Result<VectorField> {
    check_eps(eps)?;
    Ok(gradient_part(v).scaled(1.0 / eps))
}

pub fn rhs_scheme_b(
    state: &State,
    law: &dyn PressureFunction,
    eps: f64,
    mollifier: MollifierKind,
) -> Result<SplitTendency> {
    rhs_scheme_b_with(state, law, eps, mollifier, SandwichMode::Cancelled)
}

/// Nonstiff part `-A0^-1 J [A0 A_j(J(u + u_bar)) d_j J u]` and the penalty
/// operator. The two sandwich modes agree whenever `f/rho` of the mollified
/// state is spatially uniform.
pub fn rhs_scheme_b_with(
    state: &State,
    law: &dyn PressureFunction,
    eps: f64,
    mollifier: MollifierKind,
    mode: SandwichMode,
) -> Result<SplitTendency> {
    check_eps(eps)?;
    state.check_positive()?;
    let (rho_m, v_m) = mollified_state(state, eps, mollifier)?;
    let terms = advection_terms(&rho_m, state.rho_bar, &v_m, law);
    let rho = match mode {
        SandwichMode::Cancelled => mollify(&terms.transport, eps, mollifier)?,
        SandwichMode::Literal => {
            let f = eval_law(law, &rho_m, state.rho_bar, &v_m);
            let weight = f.zip_map(&rho_m, |fv, r| fv / (r + state.rho_bar));
            let symmetrized = mollify(&dealiased(&(&weight * &terms.transport)), eps, mollifier)?;
            dealiased(&symmetrized.zip_map(&weight, |a, w| a / w))
        }
    };
    let force = mollify_vector(&(&terms.inertia + &terms.density_force), eps, mollifier)?;
    Ok(SplitTendency {
        nonstiff: Tendency {
            rho: -&rho,
            p: None,
            v: force.scaled(-1.0),
        },
        stiff: StiffOperator::ProjectionPenalty { eps },
    })
}

fn conservative_flux_divergence(state: &State) -> ScalarField {
    let rho = state.density();
    let flux = VectorField::from_parts(std::array::from_fn(|j| {
        dealiased(&(&rho * state.v.component(j)))
    }));
    divergence(&flux)
}

/// Artificial-compressibility nonstiff part and the acoustic operator.
pub fn rhs_scheme_c_split(
    state: &State,
    law: &dyn PressureFunction,
    eps: f64,
) -> Result<SplitTendency> {
    check_eps(eps)?;
    state.check_positive()?;
    let p = state.p_tilde.as_ref().ok_or(Error::MissingPressure)?;
    let terms = advection_terms(&state.rho_tilde, state.rho_bar, &state.v, law);
    Ok(SplitTendency {
        nonstiff: Tendency {
            rho: -&conservative_flux_divergence(state),
            p: Some(ScalarField::zeros(p.grid())),
            v: (&terms.inertia + &terms.density_force).scaled(-1.0),
        },
        stiff: StiffOperator::AcousticPair { eps },
    })
}

/// The acoustic part `(0, -div(v)/eps, -grad(P~)/eps)` evaluated at `state`.
pub fn acoustic_term(state: &State, eps: f64) -> Result<Tendency> {
    check_eps(eps)?;
    let p = state.p_tilde.as_ref().ok_or(Error::MissingPressure)?;
    Ok(Tendency {
        rho: ScalarField::zeros(p.grid()),
        p: Some(divergence(&state.v).scaled(-1.0 / eps)),
        v: gradient(p).scaled(-1.0 / eps),
    })
}

/// Full artificial-compressibility tendency:
/// `rho_t = -div(rho v)`, `P~_t = -div(v)/eps`,
/// `v_t = -(v.grad)v - f grad(rho) - grad(P~)/eps`.
pub fn rhs_scheme_c(state: &State, law: &dyn PressureFunction, eps: f64) -> Result<Tendency> {
    let mut t = rhs_scheme_c_split(state, law, eps)?.nonstiff;
    t.axpy(1.0, &acoustic_term(state, eps)?);
    Ok(t)
}

/// Homogeneous incompressible Euler plus passive transport of the density.
pub fn reduction_oracle_rhs(state: &State, law: &dyn PressureFunction) -> Result<Tendency> {
    if law.phi(1.0).is_none() {
        return Err(Error::NotReducible(law.name()));
    }
    state.check_positive()?;
    let terms = advection_terms(&state.rho_tilde, state.rho_bar, &state.v, law);
    Ok(Tendency {
        rho: -&terms.transport,
        p: None,
        v: leray_project(&terms.inertia).scaled(-1.0),
    })
}

/// Pressure of the reduced problem, `Q - phi(rho)` with zero mean, where
/// `Q` solves the homogeneous Euler pressure equation.
pub fn oracle_pressure(state: &State, law: &dyn PressureFunction) -> Result<ScalarField> {
    let rho = state.density();
    let mut phi = Vec::with_capacity(rho.values().len());
    for &r in rho.values() {
        phi.push(law.phi(r).ok_or_else(|| Error::NotReducible(law.name()))?);
    }
    let q = recover_pressure(state, &PressureLaw::Constant { f_bar: 0.0 })?;
    let phi = ScalarField::new(rho.grid(), phi)?;
    let p = &q - &phi;
    let mean = p.mean();
    Ok(p.map(|x| x - mean))
}

/// `v0 + eps v0_1`, requiring a divergence-free `v0`.
pub fn slightly_compressible_init(
    v0: &VectorField,
    v0_1: &VectorField,
    eps: f64,
) -> Result<VectorField> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", format!("must be nonnegative, got {eps}")));
    }
    if v0.grid() != v0_1.grid() {
        return Err(Error::DimensionMismatch("v0 and v0_1 on different grids".into()));
    }
    let div = divergence(v0).norm();
    if div > 1e-10 {
        return Err(Error::NotSolenoidal(div));
    }
    let mut out = v0.clone();
    out.axpy(eps, v0_1);
    Ok(out)
}
