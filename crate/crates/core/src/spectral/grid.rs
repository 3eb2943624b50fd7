use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Spatial dimension of the artifact. The symbol algebra in `model::symbol`
/// is written for general `d`; fields are fixed at two components.
pub const DIM: usize = 2;

/// Periodic square grid `[0, L)^2` with `n` nodes per axis and its Fourier dual.
///
/// Node `(i, j)` sits at `(i * dx, j * dx)` and is stored at `i * n + j`
/// (row-major, first index along x).
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    n: usize,
    length: f64,
    /// Signed integer frequency per index, Nyquist stored as `-n/2`.
    index: Vec<i64>,
    /// Physical wavenumber `2*pi*index/L` per index.
    wavenumber: Vec<f64>,
    /// Wavenumber used by odd derivatives: Nyquist set to zero.
    derivative: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::param("n", "n must be even >= 8"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::param("length", "period must be positive and finite"));
        }
        let scale = 2.0 * PI / length;
        let half = (n / 2) as i64;
        let index: Vec<i64> = (0..n as i64)
            .map(|i| if i < half { i } else { i - n as i64 })
            .collect();
        let wavenumber = index.iter().map(|&i| scale * i as f64).collect();
        let derivative = index
            .iter()
            .map(|&i| if i == -half { 0.0 } else { scale * i as f64 })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Grid {
            inner: Arc::new(GridInner {
                n,
                length,
                index,
                wavenumber,
                derivative,
                forward,
                inverse,
            }),
        })
    }

    /// Grid on the default `2*pi` period.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn dx(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    /// Number of nodes (`n^2`).
    pub fn len(&self) -> usize {
        self.inner.n * self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        DIM
    }

    /// Coordinates of a node.
    pub fn coords(&self, node: usize) -> (f64, f64) {
        let n = self.inner.n;
        let dx = self.dx();
        ((node / n) as f64 * dx, (node % n) as f64 * dx)
    }

    /// Signed integer frequency for a one-axis index.
    pub fn mode_index(&self, i: usize) -> i64 {
        self.inner.index[i]
    }

    /// Physical wavenumber for a one-axis index.
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.inner.wavenumber[i]
    }

    /// Wavenumber used by first derivatives (zero at Nyquist).
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        self.inner.derivative[i]
    }

    /// Wave vector `xi` of a flat mode index.
    pub fn xi(&self, mode: usize) -> [f64; DIM] {
        let n = self.inner.n;
        [self.inner.wavenumber[mode / n], self.inner.wavenumber[mode % n]]
    }

    /// Derivative wave vector of a flat mode index.
    pub fn xi_derivative(&self, mode: usize) -> [f64; DIM] {
        let n = self.inner.n;
        [self.inner.derivative[mode / n], self.inner.derivative[mode % n]]
    }

    /// Largest integer frequency kept by the two-thirds rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.inner.n / 3) as i64
    }

    /// Unnormalized 2-D transform in place; `inverse` picks the sign.
    pub(crate) fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.inner.n;
        debug_assert_eq!(data.len(), n * n);
        let plan = if inverse {
            &self.inner.inverse
        } else {
            &self.inner.forward
        };
        plan.process(data);
        transpose(data, n);
        plan.process(data);
        transpose(data, n);
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.length == other.inner.length)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::periodic(6).is_err());
        assert!(Grid::periodic(63).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::periodic(8).is_ok());
    }

    #[test]
    fn wavenumbers_symmetric_except_nyquist() {
        let g = Grid::periodic(16).unwrap();
        for i in 1..8 {
            assert_eq!(g.wavenumber(i), -g.wavenumber(16 - i));
        }
        assert_eq!(g.mode_index(8), -8);
        assert_eq!(g.derivative_wavenumber(8), 0.0);
    }

    #[test]
    fn scaled_wavenumbers() {
        let g = Grid::new(8, 1.0).unwrap();
        assert!((g.wavenumber(1) - 2.0 * PI).abs() < 1e-15);
        assert!((g.dx() - 0.125).abs() < 1e-15);
    }
}
