use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm_sq, transform_forward, Grid, ScalarField, VectorField, DIM};

/// Densities at or below this value terminate a run.
pub const RHO_FLOOR: f64 = 1e-8;

/// Translated unknown `(rho - rho_bar, v)` plus the reference density, and
/// the artificial pressure perturbation when the state belongs to an
/// artificial-compressibility run.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub rho_tilde: ScalarField,
    pub v: VectorField,
    pub rho_bar: f64,
    pub p_tilde: Option<ScalarField>,
}

/// Time derivative of a [`State`]; same blocks, no reference density.
#[derive(Clone, Debug, PartialEq)]
pub struct Tendency {
    pub rho: ScalarField,
    pub p: Option<ScalarField>,
    pub v: VectorField,
}

impl State {
    /// Builds a state and checks grids, `rho_bar > 0` and nodal positivity.
    pub fn new(
        rho_tilde: ScalarField,
        v: VectorField,
        rho_bar: f64,
        p_tilde: Option<ScalarField>,
    ) -> Result<Self> {
        if v.grid() != rho_tilde.grid() || p_tilde.as_ref().is_some_and(|p| p.grid() != v.grid()) {
            return Err(Error::DimensionMismatch("state blocks on different grids".into()));
        }
        if !(rho_bar.is_finite() && rho_bar > 0.0) {
            return Err(Error::param("rho_bar", format!("must be positive, got {rho_bar}")));
        }
        let state = State {
            rho_tilde,
            v,
            rho_bar,
            p_tilde,
        };
        state.check_positive()?;
        Ok(state)
    }

    /// Translates a physical density; `rho_bar` defaults to its spatial mean.
    pub fn from_physical(rho: &ScalarField, v: VectorField, rho_bar: Option<f64>) -> Result<Self> {
        let rho_bar = rho_bar.unwrap_or_else(|| rho.mean());
        let rho_tilde = translate(rho, rho_bar)?;
        State::new(rho_tilde, v, rho_bar, None)
    }

    pub fn grid(&self) -> &Grid {
        self.rho_tilde.grid()
    }

    /// Physical density `rho_tilde + rho_bar`.
    pub fn density(&self) -> ScalarField {
        untranslate(&self.rho_tilde, self.rho_bar)
    }

    pub fn min_density(&self) -> f64 {
        self.rho_tilde.min() + self.rho_bar
    }

    pub fn check_positive(&self) -> Result<()> {
        check_density(&self.rho_tilde, self.rho_bar)
    }

    /// Number of stored blocks: 3 without artificial pressure, 4 with it.
    pub fn ncomp(&self) -> usize {
        1 + DIM + usize::from(self.p_tilde.is_some())
    }

    pub fn is_finite(&self) -> bool {
        self.rho_tilde.is_finite()
            && self.v.is_finite()
            && self.p_tilde.as_ref().is_none_or(ScalarField::is_finite)
    }

    /// `self + a * rate`; the reference density is untouched.
    pub fn add_scaled(&self, a: f64, rate: &Tendency) -> State {
        let mut out = self.clone();
        out.rho_tilde.axpy(a, &rate.rho);
        out.v.axpy(a, &rate.v);
        if let (Some(p), Some(dp)) = (out.p_tilde.as_mut(), rate.p.as_ref()) {
            p.axpy(a, dp);
        }
        out
    }

    /// Mean-square norm of `(rho_tilde, v)`.
    pub fn l2_norm(&self) -> f64 {
        (self.rho_tilde.dot(&self.rho_tilde) + self.v.dot(&self.v)).sqrt()
    }

    /// Mean-square distance between the `(rho_tilde, v)` blocks of two states.
    pub fn l2_distance(&self, other: &State) -> f64 {
        let dr = &self.rho_tilde - &other.rho_tilde;
        let dv = &self.v - &other.v;
        (dr.dot(&dr) + dv.dot(&dv)).sqrt()
    }

    /// `H^s` norm of `(rho_tilde, v)`. The artificial pressure block is not
    /// included so that runs of every scheme are measured alike.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::param("s", "Sobolev index must be nonnegative"));
        }
        let mut sum = sobolev_norm_sq(&transform_forward(&self.rho_tilde), s);
        for c in self.v.components() {
            sum += sobolev_norm_sq(&transform_forward(c), s);
        }
        Ok(sum.sqrt())
    }
}

impl Tendency {
    pub fn zeros_like(state: &State) -> Self {
        let grid = state.grid();
        Tendency {
            rho: ScalarField::zeros(grid),
            p: state.p_tilde.as_ref().map(|_| ScalarField::zeros(grid)),
            v: VectorField::zeros(grid),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Tendency) {
        self.rho.axpy(a, &other.rho);
        self.v.axpy(a, &other.v);
        if let (Some(p), Some(q)) = (self.p.as_mut(), other.p.as_ref()) {
            p.axpy(a, q);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.v.is_finite() && self.p.as_ref().is_none_or(ScalarField::is_finite)
    }

    /// Largest absolute nodal entry across all blocks.
    pub fn max_abs(&self) -> f64 {
        let mut m = self.rho.max_abs();
        for c in self.v.components() {
            m = m.max(c.max_abs());
        }
        if let Some(p) = &self.p {
            m = m.max(p.max_abs());
        }
        m
    }
}

pub(crate) fn check_density(rho_tilde: &ScalarField, rho_bar: f64) -> Result<()> {
    let node = rho_tilde.argmin();
    let min = rho_tilde.values()[node] + rho_bar;
    if min > RHO_FLOOR {
        Ok(())
    } else {
        Err(Error::NonPositiveDensity { min, node })
    }
}

/// `rho - rho_bar`, rejecting nonpositive densities.
pub fn translate(rho: &ScalarField, rho_bar: f64) -> Result<ScalarField> {
    if !(rho_bar.is_finite() && rho_bar > 0.0) {
        return Err(Error::param("rho_bar", format!("must be positive, got {rho_bar}")));
    }
    let node = rho.argmin();
    if rho.values()[node] <= RHO_FLOOR {
        return Err(Error::NonPositiveDensity {
            min: rho.values()[node],
            node,
        });
    }
    Ok(rho.map(|r| r - rho_bar))
}

pub fn untranslate(rho_tilde: &ScalarField, rho_bar: f64) -> ScalarField {
    rho_tilde.map(|r| r + rho_bar)
}
