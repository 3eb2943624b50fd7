use nalgebra::{DMatrix, DVector};

/// Least-squares line `y = intercept + slope x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

/// Least-squares polynomial coefficients, lowest degree first.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Option<Vec<f64>> {
    if x.len() != y.len() || x.len() <= degree {
        return None;
    }
    let a = DMatrix::from_fn(x.len(), degree + 1, |i, j| x[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    Some(sol.iter().copied().collect())
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let c = polyfit(x, y, 1)?;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - c[0] - c[1] * xi).powi(2))
        .sum();
    Some(LineFit {
        slope: c[1],
        intercept: c[0],
        rms_residual: (ss / x.len() as f64).sqrt(),
    })
}

/// Slope of the least-squares line through the origin.
pub fn slope_through_origin(x: &[f64], y: &[f64]) -> Option<f64> {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx == 0.0 || x.len() != y.len() {
        return None;
    }
    Some(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx)
}

/// Observed order `p` in `distance ~ C eps^p`, fitted on log-log axes.
/// Entries with nonpositive distance are skipped.
pub fn convergence_rate(eps: &[f64], distance: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .zip(distance)
        .filter(|(e, d)| **e > 0.0 && **d > 0.0 && d.is_finite())
        .map(|(e, d)| (e.ln(), d.ln()))
        .unzip();
    if lx.len() < 2 {
        return None;
    }
    linear_fit(&lx, &ly).map(|f| f.slope)
}

/// Exponential growth fit of a positive history `h(t)` against `h(0) e^{c t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    /// Least-squares exponent `c` of `ln(h/h0) = c t`.
    pub rate: f64,
    /// Smallest `c >= 0` with `h(t) <= h0 e^{c t}` at every sample.
    pub envelope_rate: f64,
    /// Quadratic coefficient of `ln(h/h0) = b t + q t^2`.
    pub curvature: f64,
    /// Linear coefficient of the same quadratic model.
    pub quadratic_slope: f64,
    /// RMS residual of the exponential model in `ln(h/h0)`.
    pub rms_residual: f64,
    /// `max_t [ln(h/h0) - c t]`; nonpositive when the history stays below
    /// the fitted exponential.
    pub max_excess: f64,
    pub horizon: f64,
}

impl GrowthFit {
    /// Whether the curvature term changes `ln(h/h0)` at the horizon by more
    /// than `tol` times the size of the linear term, the latter floored at
    /// `floor` so that flat histories are judged on an absolute scale.
    pub fn super_exponential(&self, tol: f64, floor: f64) -> bool {
        let lin = (self.quadratic_slope * self.horizon).abs().max(floor);
        self.curvature * self.horizon * self.horizon > tol * lin
    }
}

pub fn growth_fit(times: &[f64], values: &[f64]) -> Option<GrowthFit> {
    if times.len() != values.len() || times.len() < 3 || !(values[0] > 0.0) {
        return None;
    }
    let t0 = times[0];
    let t: Vec<f64> = times.iter().map(|x| x - t0).collect();
    let y: Vec<f64> = values.iter().map(|v| (v / values[0]).ln()).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let rate = slope_through_origin(&t, &y)?;
    // ln(h/h0) = b t + q t^2, constrained through the origin
    let a = DMatrix::from_fn(t.len(), 2, |i, j| t[i].powi(j as i32 + 1));
    let q = a
        .svd(true, true)
        .solve(&DVector::from_column_slice(&y), 1e-14)
        .ok()?;
    let ss: f64 = t.iter().zip(&y).map(|(ti, yi)| (yi - rate * ti).powi(2)).sum();
    let max_excess = t
        .iter()
        .zip(&y)
        .map(|(ti, yi)| yi - rate * ti)
        .fold(f64::NEG_INFINITY, f64::max);
    let envelope_rate = t
        .iter()
        .zip(&y)
        .filter(|(ti, _)| **ti > 0.0)
        .map(|(ti, yi)| yi / ti)
        .fold(0.0, f64::max);
    Some(GrowthFit {
        rate,
        envelope_rate,
        curvature: q[1],
        quadratic_slope: q[0],
        rms_residual: (ss / t.len() as f64).sqrt(),
        max_excess,
        horizon: *t.last().unwrap(),
    })
}
