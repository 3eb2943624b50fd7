use num_complex::Complex64;

use crate::error::{Error, Result};

use super::field::{ScalarField, VectorField};
use super::grid::{Grid, DIM};

/// Fourier coefficients of a field under mean-square normalization:
/// the forward transform is scaled by `1/n^2`, so a constant `c` has
/// zero-mode coefficient `c` and `sum |c_k|^2` equals the mean square.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Spectrum {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at signed integer frequencies `(kx, ky)`.
    pub fn mode(&self, kx: i64, ky: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let i = kx.rem_euclid(n) as usize;
        let j = ky.rem_euclid(n) as usize;
        self.coeffs[i * n as usize + j]
    }

    /// Largest violation of `c(-k) = conj(c(k))`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.coeffs[i * n + j];
                let b = self.coeffs[((n - i) % n) * n + (n - j) % n];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    /// Multiplies every mode by `m(mode)`; `mode` is the flat index.
    pub fn apply(&self, m: impl Fn(usize) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * m(k))
            .collect();
        Spectrum {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn apply_real(&self, m: impl Fn(usize) -> f64) -> Self {
        self.apply(|k| Complex64::new(m(k), 0.0))
    }

    /// Spectral partial derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let g = self.grid.clone();
        self.apply(|k| Complex64::new(0.0, g.xi_derivative(k)[axis]))
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn zeros(grid: &Grid) -> Self {
        Spectrum {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }
}

pub fn transform_forward(field: &ScalarField) -> Spectrum {
    let grid = field.grid();
    let mut data: Vec<Complex64> = field
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    grid.fft2(&mut data, false);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    Spectrum {
        grid: grid.clone(),
        coeffs: data,
    }
}

/// Inverse transform; the imaginary residue of a conjugate-symmetric
/// spectrum is discarded.
pub fn transform_inverse(coeffs: &Spectrum) -> ScalarField {
    let mut data = coeffs.coeffs.clone();
    coeffs.grid.fft2(&mut data, true);
    ScalarField::from_raw(&coeffs.grid, data.into_iter().map(|c| c.re).collect())
}

/// Zeroes every mode with an integer frequency above `n/3` on either axis.
pub fn dealias(coeffs: &Spectrum) -> Spectrum {
    let grid = coeffs.grid.clone();
    let cut = grid.dealias_cutoff();
    let n = grid.n();
    coeffs.apply_real(|k| {
        let (i, j) = (k / n, k % n);
        if grid.mode_index(i).abs() > cut || grid.mode_index(j).abs() > cut {
            0.0
        } else {
            1.0
        }
    })
}

pub fn gradient(field: &ScalarField) -> VectorField {
    let spec = transform_forward(field);
    VectorField::from_parts(std::array::from_fn(|j| {
        transform_inverse(&spec.derivative(j))
    }))
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let mut acc = Spectrum::zeros(grid);
    for j in 0..DIM {
        let d = transform_forward(v.component(j)).derivative(j);
        for (a, b) in acc.coeffs.iter_mut().zip(&d.coeffs) {
            *a += b;
        }
    }
    transform_inverse(&acc)
}

/// Laplacian as the composition divergence(gradient(.)).
pub fn laplacian(field: &ScalarField) -> ScalarField {
    let grid = field.grid().clone();
    let spec = transform_forward(field);
    transform_inverse(&spec.apply_real(|k| {
        let xi = grid.xi_derivative(k);
        -(xi[0] * xi[0] + xi[1] * xi[1])
    }))
}

/// Solves `lap(u) = rhs` with zero mean; the mean of `rhs` is ignored.
pub fn inverse_laplacian(rhs: &ScalarField) -> ScalarField {
    let grid = rhs.grid().clone();
    let spec = transform_forward(rhs);
    transform_inverse(&spec.apply_real(|k| {
        let xi = grid.xi_derivative(k);
        let k2 = xi[0] * xi[0] + xi[1] * xi[1];
        if k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    }))
}

fn vector_spectra(v: &VectorField) -> [Spectrum; DIM] {
    std::array::from_fn(|j| transform_forward(v.component(j)))
}

/// Leray projection `(I - xi xi^T/|xi|^2) v`, acting on spectra.
pub(crate) fn leray_spectra(spec: &[Spectrum; DIM]) -> [Spectrum; DIM] {
    let grid = spec[0].grid().clone();
    let mut out = spec.clone();
    for k in 0..grid.len() {
        let xi = grid.xi_derivative(k);
        let k2: f64 = xi.iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            continue;
        }
        let proj: Complex64 = (0..DIM).map(|j| spec[j].coeffs[k] * xi[j]).sum::<Complex64>() / k2;
        for (j, o) in out.iter_mut().enumerate() {
            o.coeffs[k] = spec[j].coeffs[k] - proj * xi[j];
        }
    }
    out
}

/// Divergence-free part of `v`. The zero mode is preserved.
pub fn leray_project(v: &VectorField) -> VectorField {
    let p = leray_spectra(&vector_spectra(v));
    VectorField::from_parts(std::array::from_fn(|j| transform_inverse(&p[j])))
}

/// Gradient part `(I - P) v` of the Hodge split; mean-free.
pub fn gradient_part(v: &VectorField) -> VectorField {
    let p = leray_project(v);
    v - &p
}

/// Spectral mollifier family standing in for convolution with `j_eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[derive(Default)]
pub enum MollifierKind {
    /// `exp(-eps^2 |xi|^2)`
    #[default]
    GaussianMultiplier,
    /// Indicator of `eps |xi| <= ratio`.
    SharpCutoff { ratio: f64 },
}


impl MollifierKind {
    /// Multiplier value at wavenumber magnitude `k`.
    pub fn multiplier(&self, k: f64, eps: f64) -> f64 {
        match *self {
            MollifierKind::GaussianMultiplier => (-(eps * k).powi(2)).exp(),
            MollifierKind::SharpCutoff { ratio } => {
                if eps * k <= ratio {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MollifierKind::GaussianMultiplier => "gaussian",
            MollifierKind::SharpCutoff { .. } => "sharp",
        }
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::param("eps", format!("must be positive, got {eps}")))
    }
}

pub(crate) fn mollify_spectrum(spec: &Spectrum, eps: f64, kind: MollifierKind) -> Spectrum {
    let grid = spec.grid().clone();
    spec.apply_real(|k| {
        let xi = grid.xi(k);
        kind.multiplier(xi[0].hypot(xi[1]), eps)
    })
}

pub fn mollify(field: &ScalarField, eps: f64, kind: MollifierKind) -> Result<ScalarField> {
    check_eps(eps)?;
    Ok(transform_inverse(&mollify_spectrum(
        &transform_forward(field),
        eps,
        kind,
    )))
}

pub fn mollify_vector(v: &VectorField, eps: f64, kind: MollifierKind) -> Result<VectorField> {
    check_eps(eps)?;
    Ok(VectorField::from_parts(std::array::from_fn(|j| {
        transform_inverse(&mollify_spectrum(
            &transform_forward(v.component(j)),
            eps,
            kind,
        ))
    })))
}

/// Squared `H^s` norm of a spectrum, weight `(1 + |xi|^2)^s`.
pub(crate) fn sobolev_norm_sq(spec: &Spectrum, s: f64) -> f64 {
    let grid = spec.grid();
    spec.coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let xi = grid.xi(k);
            (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).powf(s) * c.norm_sqr()
        })
        .sum()
}

/// `(sum_xi (1 + |xi|^2)^s |c_xi|^2)^(1/2)`.
pub fn sobolev_norm(field: &ScalarField, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::param("s", "Sobolev index must be nonnegative"));
    }
    Ok(sobolev_norm_sq(&transform_forward(field), s).sqrt())
}
