//! Matrices of the first-order system, its symbol, the diagonal
//! symmetrizer, and the eigenstructure used to verify hyperbolicity.
//!
//! Everything here is written for a general spatial dimension `d`, taken
//! from the length of the velocity slice. Unknowns are ordered
//! `(rho, v_1, .., v_d)`; the artificial-compressibility matrices use
//! `(rho, P, v_1, .., v_d)`.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Which first-order matrices to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixForm {
    /// Conservative density row `(v_j, delta_1j rho, .., delta_dj rho)`.
    Full,
    /// Transport density row `(v_j, 0, .., 0)`.
    Reduced,
}

/// `A_j(u)` for axis `j` (zero-based).
pub fn flux_matrix(j: usize, rho: f64, v: &[f64], f: f64, form: MatrixForm) -> DMatrix<f64> {
    let d = v.len();
    let mut a = DMatrix::zeros(d + 1, d + 1);
    for i in 0..=d {
        a[(i, i)] = v[j];
    }
    if form == MatrixForm::Full {
        a[(0, j + 1)] = rho;
    }
    a[(j + 1, 0)] = f;
    a
}

/// `A(xi, u) = sum_j A_j(u) xi_j` of the full system.
pub fn assemble_symbol(rho: f64, v: &[f64], f: f64, xi: &[f64]) -> Result<DMatrix<f64>> {
    check_xi(v, xi)?;
    if xi.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroWaveVector);
    }
    let d = v.len();
    let mut a = DMatrix::zeros(d + 1, d + 1);
    for (j, &x) in xi.iter().enumerate() {
        a += flux_matrix(j, rho, v, f, MatrixForm::Full) * x;
    }
    Ok(a)
}

fn check_xi(v: &[f64], xi: &[f64]) -> Result<()> {
    if v.len() != xi.len() || v.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "velocity has {} components, wave vector {}",
            v.len(),
            xi.len()
        )));
    }
    Ok(())
}

/// Closed-form spectrum of the symbol, sorted ascending:
/// `v.xi` with multiplicity `d - 1` and `v.xi -+ sqrt(f rho)|xi|`.
pub fn eigenvalues_closed_form(rho: f64, v: &[f64], f: f64, xi: &[f64]) -> Result<Vec<f64>> {
    check_xi(v, xi)?;
    let product = f * rho;
    if product < 0.0 {
        return Err(Error::HyperbolicityLoss { product });
    }
    let d = v.len();
    let vxi: f64 = v.iter().zip(xi).map(|(a, b)| a * b).sum();
    let xi_norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let c = product.sqrt() * xi_norm;
    let mut out = Vec::with_capacity(d + 1);
    out.push(vxi - c);
    out.extend(std::iter::repeat_n(vxi, d - 1));
    out.push(vxi + c);
    Ok(out)
}

/// Spectrum from a generic real Schur decomposition, sorted by real part
/// then imaginary part.
pub fn numeric_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut ev: Vec<Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// Dimension of the null space of `m - lambda I`, with singular values
/// below `tol * max(1, ||m||)` counted as zero.
pub fn geometric_multiplicity(m: &DMatrix<f64>, lambda: f64, tol: f64) -> usize {
    let n = m.nrows();
    let shifted = m - DMatrix::identity(n, n) * lambda;
    let scale = m.norm().max(1.0);
    let sv = shifted.svd(false, false).singular_values;
    sv.iter().filter(|&&s| s <= tol * scale).count()
}

/// Diagonal Friedrichs symmetrizer `diag(f/rho, 1, .., 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Symmetrizer {
    pub diag: Vec<f64>,
    /// All entries positive, i.e. `f > 0`.
    pub positive_definite: bool,
}

impl Symmetrizer {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.diag.clone()))
    }

    /// Applies the symmetrizer to a vector of unknowns.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        self.diag.iter().zip(w).map(|(a, b)| a * b).collect()
    }
}

/// Symmetrizer of size `dim + 1`.
pub fn symmetrizer_with_dim(rho: f64, f: f64, dim: usize) -> Result<Symmetrizer> {
    if !(rho > 0.0) {
        return Err(Error::param("rho", format!("must be positive, got {rho}")));
    }
    let mut diag = vec![1.0; dim + 1];
    diag[0] = f / rho;
    Ok(Symmetrizer {
        diag,
        positive_definite: f > 0.0,
    })
}

pub fn symmetrizer(rho: f64, f: f64) -> Result<Symmetrizer> {
    symmetrizer_with_dim(rho, f, crate::spectral::DIM)
}

/// Artificial-compressibility matrices for axis `j`: the state-dependent
/// part `A~_j(u)` and the constant singular part `A0_j` (so that
/// `A_j = A~_j + A0_j / eps`). Ordering `(rho, P, v_1, .., v_d)`.
pub fn acoustic_split(j: usize, rho: f64, v: &[f64], f: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = v.len();
    let n = d + 2;
    let mut regular = DMatrix::zeros(n, n);
    regular[(0, 0)] = v[j];
    for i in 2..n {
        regular[(i, i)] = v[j];
    }
    regular[(0, j + 2)] = rho;
    regular[(j + 2, 0)] = f;
    let mut singular = DMatrix::zeros(n, n);
    singular[(1, j + 2)] = 1.0;
    singular[(j + 2, 1)] = 1.0;
    (regular, singular)
}

/// Largest asymmetry `max |m_ij - m_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Point values of the matrices of all three formulations.
#[derive(Clone, Debug)]
pub struct SymbolMatrices {
    pub full: Vec<DMatrix<f64>>,
    pub reduced: Vec<DMatrix<f64>>,
    pub symbol: DMatrix<f64>,
    pub symmetrizer: Symmetrizer,
    /// `(A~_j, A0_j)` per axis.
    pub acoustic: Vec<(DMatrix<f64>, DMatrix<f64>)>,
    /// Symmetrizer of size `d + 2` for the artificial-compressibility system.
    pub acoustic_symmetrizer: Symmetrizer,
}

impl SymbolMatrices {
    pub fn at(rho: f64, v: &[f64], f: f64, xi: &[f64]) -> Result<Self> {
        let d = v.len();
        Ok(SymbolMatrices {
            full: (0..d).map(|j| flux_matrix(j, rho, v, f, MatrixForm::Full)).collect(),
            reduced: (0..d).map(|j| flux_matrix(j, rho, v, f, MatrixForm::Reduced)).collect(),
            symbol: assemble_symbol(rho, v, f, xi)?,
            symmetrizer: symmetrizer_with_dim(rho, f, d)?,
            acoustic: (0..d).map(|j| acoustic_split(j, rho, v, f)).collect(),
            acoustic_symmetrizer: symmetrizer_with_dim(rho, f, d + 1)?,
        })
    }
}

/// Everything the `symbol` subcommand reports.
#[derive(Clone, Debug)]
pub struct SymbolAnalysis {
    pub symbol: DMatrix<f64>,
    /// `None` when `f rho < 0`.
    pub closed_form: Option<Vec<f64>>,
    pub numeric: Vec<Complex<f64>>,
    pub max_imag: f64,
    /// Largest gap between sorted closed-form and numeric eigenvalues.
    pub max_mismatch: Option<f64>,
    pub middle_multiplicity: usize,
    pub symmetrizer: Symmetrizer,
    pub hyperbolic: bool,
}

pub const IMAG_TOL: f64 = 1e-10;

pub fn analyze_symbol(rho: f64, v: &[f64], f: f64, xi: &[f64]) -> Result<SymbolAnalysis> {
    let symbol = assemble_symbol(rho, v, f, xi)?;
    let numeric = numeric_eigenvalues(&symbol);
    let max_imag = numeric.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let closed_form = eigenvalues_closed_form(rho, v, f, xi).ok();
    let max_mismatch = closed_form.as_ref().map(|cf| {
        cf.iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b.re).abs().max(b.im.abs()))
            .fold(0.0, f64::max)
    });
    let vxi: f64 = v.iter().zip(xi).map(|(a, b)| a * b).sum();
    let middle_multiplicity = geometric_multiplicity(&symbol, vxi, 1e-8);
    let symmetrizer = symmetrizer_with_dim(rho, f, v.len())?;
    let hyperbolic = f * rho > 0.0 && max_imag <= IMAG_TOL && middle_multiplicity == v.len() - 1;
    Ok(SymbolAnalysis {
        symbol,
        closed_form,
        numeric,
        max_imag,
        max_mismatch,
        middle_multiplicity,
        symmetrizer,
        hyperbolic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_entries_at_rest() {
        let a = assemble_symbol(1.0, &[0.0, 0.0], 1.0, &[1.0, 0.0]).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(a, expect);
    }

    #[test]
    fn symbol_entries_moving() {
        let a = assemble_symbol(2.0, &[1.0, 0.0], 3.0, &[0.0, 1.0]).unwrap();
        assert_eq!(a.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 2.0]);
        assert_eq!(a[(2, 0)], 3.0);
        assert_eq!(a[(1, 0)], 0.0);
        for i in 0..3 {
            assert_eq!(a[(i, i)], 0.0);
        }
    }

    #[test]
    fn zero_xi_rejected() {
        assert!(matches!(
            assemble_symbol(1.0, &[0.3, 0.1], 1.0, &[0.0, 0.0]),
            Err(Error::ZeroWaveVector)
        ));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(
            eigenvalues_closed_form(1.0, &[0.0, 0.0], 1.0, &[1.0, 0.0]).unwrap(),
            vec![-1.0, 0.0, 1.0]
        );
        assert_eq!(
            eigenvalues_closed_form(4.0, &[1.0, 0.0], 1.0, &[1.0, 0.0]).unwrap(),
            vec![-1.0, 1.0, 3.0]
        );
        assert!(matches!(
            eigenvalues_closed_form(1.0, &[0.0, 0.0], -1.0, &[1.0, 0.0]),
            Err(Error::HyperbolicityLoss { .. })
        ));
    }

    #[test]
    fn closed_form_general_dimension() {
        let ev = eigenvalues_closed_form(2.0, &[1.0, 0.5, -0.5], 0.5, &[0.0, 2.0, 0.0]).unwrap();
        assert_eq!(ev, vec![-1.0, 1.0, 1.0, 3.0]);
        let a = assemble_symbol(2.0, &[1.0, 0.5, -0.5], 0.5, &[0.0, 2.0, 0.0]).unwrap();
        let num = numeric_eigenvalues(&a);
        for (c, z) in ev.iter().zip(&num) {
            assert!((c - z.re).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
        assert_eq!(geometric_multiplicity(&a, 1.0, 1e-8), 2);
    }

    #[test]
    fn symmetrizer_examples() {
        let s = symmetrizer(2.0, 4.0).unwrap();
        assert_eq!(s.diag, vec![2.0, 1.0, 1.0]);
        assert!(s.positive_definite);
        assert_eq!(symmetrizer(1.0, 1.0).unwrap().diag, vec![1.0; 3]);
        let neg = symmetrizer(1.0, -1.0).unwrap();
        assert!(!neg.positive_definite);
        assert_eq!(neg.diag[0], -1.0);
        assert!(symmetrizer(0.0, 1.0).is_err());
    }

    #[test]
    fn symmetrizer_preserves_pressure_gradient() {
        let s = symmetrizer(0.7, 2.3).unwrap();
        let fp = [0.0, 0.37, -1.25];
        assert_eq!(s.apply(&fp), fp.to_vec());
    }

    #[test]
    fn full_matrices_symmetrized_reduced_are_not() {
        let (rho, v, f) = (1.7, [0.4, -0.9], 2.2);
        let s = symmetrizer(rho, f).unwrap().matrix();
        for j in 0..2 {
            let full = &s * flux_matrix(j, rho, &v, f, MatrixForm::Full);
            assert!(asymmetry(&full) < 1e-12);
            let reduced = &s * flux_matrix(j, rho, &v, f, MatrixForm::Reduced);
            assert!((asymmetry(&reduced) - f).abs() < 1e-12);
        }
    }

    #[test]
    fn acoustic_split_structure() {
        let (rho, v, f) = (1.3, [0.2, 0.5], 0.8);
        let s = symmetrizer_with_dim(rho, f, 3).unwrap().matrix();
        for j in 0..2 {
            let (regular, singular) = acoustic_split(j, rho, &v, f);
            let (_, other) = acoustic_split(j, 9.0, &[3.0, -2.0], 4.0);
            assert_eq!(singular, other);
            assert!(asymmetry(&(&s * &regular)) < 1e-12);
            assert!(asymmetry(&singular) == 0.0);
            assert_eq!(singular[(1, j + 2)], 1.0);
        }
    }

    #[test]
    fn analysis_flags_negative_f() {
        let a = analyze_symbol(1.0, &[0.0, 0.0], -1.0, &[1.0, 0.0]).unwrap();
        assert!(a.closed_form.is_none());
        assert!(a.max_imag > 0.5);
        assert!(!a.hyperbolic);
        let ok = analyze_symbol(1.0, &[0.0, 0.0], 1.0, &[0.6, 0.8]).unwrap();
        assert!(ok.hyperbolic);
        assert_eq!(ok.middle_multiplicity, 1);
    }
}
