use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

use super::grid::{Grid, DIM};

/// Real samples of a scalar on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field samples"));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    /// Internal constructor for values produced by finite operations.
    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.len()])
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|node| {
                let (x, y) = grid.coords(node);
                f(x, y)
            })
            .collect();
        Self::from_raw(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_raw(&self.grid, values)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Self) {
        debug_assert_eq!(self.grid, x.grid);
        for (s, &v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Node index of the minimum sample.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Mean-square inner product `<a, b> = mean(a * b)`.
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.values.len() as f64
    }

    /// Mean-square (normalized L2) norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: Self) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: Self) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

/// Pointwise product.
impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: Self) -> ScalarField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scaled(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scaled(-1.0)
    }
}

/// A `DIM`-component vector field sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: [ScalarField; DIM],
}

impl VectorField {
    pub fn new(components: [ScalarField; DIM]) -> Result<Self> {
        let grid = components[0].grid();
        if components.iter().any(|c| c.grid() != grid) {
            return Err(Error::DimensionMismatch(
                "vector components live on different grids".into(),
            ));
        }
        Ok(VectorField { components })
    }

    pub(crate) fn from_parts(components: [ScalarField; DIM]) -> Self {
        debug_assert!(components.iter().all(|c| c.grid() == components[0].grid()));
        VectorField { components }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_parts(std::array::from_fn(|_| ScalarField::zeros(grid)))
    }

    pub fn constant(grid: &Grid, value: [f64; DIM]) -> Self {
        Self::from_parts(std::array::from_fn(|j| ScalarField::constant(grid, value[j])))
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> [f64; DIM]) -> Self {
        Self::from_parts(std::array::from_fn(|j| {
            ScalarField::from_fn(grid, |x, y| f(x, y)[j])
        }))
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn component(&self, j: usize) -> &ScalarField {
        &self.components[j]
    }

    pub fn components(&self) -> &[ScalarField; DIM] {
        &self.components
    }

    pub fn into_components(self) -> [ScalarField; DIM] {
        self.components
    }

    /// Velocity vector at one node.
    pub fn at(&self, node: usize) -> [f64; DIM] {
        std::array::from_fn(|j| self.components[j].values()[node])
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (c, xc) in self.components.iter_mut().zip(&x.components) {
            c.axpy(a, xc);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_parts(std::array::from_fn(|j| self.components[j].scaled(a)))
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        Self::from_parts(std::array::from_fn(|j| {
            f(&self.components[j], &other.components[j])
        }))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.dot(b))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: Self) -> VectorField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: Self) -> VectorField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = Grid::periodic(8).unwrap();
        assert!(matches!(
            ScalarField::new(&g, vec![0.0; 10]),
            Err(Error::DimensionMismatch(_))
        ));
        let mut v = vec![0.0; 64];
        v[3] = f64::NAN;
        assert!(matches!(ScalarField::new(&g, v), Err(Error::NonFinite(_))));
    }

    #[test]
    fn vector_components_must_share_grid() {
        let a = Grid::periodic(8).unwrap();
        let b = Grid::periodic(16).unwrap();
        let r = VectorField::new([ScalarField::zeros(&a), ScalarField::zeros(&b)]);
        assert!(r.is_err());
    }

    #[test]
    fn mean_square_norm_of_sine() {
        let g = Grid::periodic(32).unwrap();
        let s = ScalarField::from_fn(&g, |x, _| x.sin());
        assert!((s.norm() - 0.5f64.sqrt()).abs() < 1e-14);
    }
}
