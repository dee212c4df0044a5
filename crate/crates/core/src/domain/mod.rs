//! 1-D spatial grid, cell-centered fields, quadrature and field predicates.

pub mod expr;

pub use expr::{parse_profile, pretty_print, ProfileExpr};

use crate::error::{Error, Result};

/// Uniform cell-centered grid on an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n_cells: usize,
    x_left: f64,
    x_right: f64,
    h: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize, x_left: f64, x_right: f64) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::InvalidParam {
                name: "n_cells",
                message: format!("need at least 4 cells, got {n_cells}"),
            });
        }
        if !(x_left.is_finite() && x_right.is_finite()) || x_right <= x_left {
            return Err(Error::InvalidParam {
                name: "x_right",
                message: format!("domain endpoints invalid: [{x_left}, {x_right}]"),
            });
        }
        let h = (x_right - x_left) / n_cells as f64;
        Ok(Grid1D {
            n_cells,
            x_left,
            x_right,
            h,
        })
    }

    /// Unit interval with `n_cells` cells.
    pub fn unit(n_cells: usize) -> Result<Self> {
        Grid1D::new(n_cells, 0.0, 1.0)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    /// Center of cell `i`.
    pub fn cell_center(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.h
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.cell_center(i))
    }
}

/// Cell-centered samples of a function of x.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl SpatialField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::InvalidParam {
                name: "values",
                message: format!(
                    "length {} does not match grid with {} cells",
                    values.len(),
                    grid.n_cells()
                ),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteField {
                    name: "values".into(),
                    x: grid.cell_center(i),
                });
            }
        }
        Ok(SpatialField { grid, values })
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        SpatialField {
            grid,
            values: vec![c; grid.n_cells()],
        }
    }

    /// Sample a closure at the cell centers (panics on non-finite values).
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.centers().map(f).collect();
        SpatialField::new(grid, values).expect("closure produced non-finite value")
    }

    /// Sample an expression at the cell centers.
    pub fn sample(expr: &ProfileExpr, grid: Grid1D) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.n_cells());
        for x in grid.centers() {
            let v = expr.eval(x).map_err(|reason| Error::Eval { x, reason })?;
            values.push(v);
        }
        Ok(SpatialField { grid, values })
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Error unless every sample is strictly positive.
    pub fn require_positive(&self, name: &str) -> Result<()> {
        for (i, &v) in self.values.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::NonPositiveField {
                    name: name.into(),
                    x: self.grid.cell_center(i),
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SpatialField {
        SpatialField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Combine two fields pointwise; panics on grid mismatch (programmer error).
    pub fn zip_with(&self, other: &SpatialField, f: impl Fn(f64, f64) -> f64) -> SpatialField {
        assert_eq!(self.grid, other.grid, "fields on different grids");
        SpatialField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> SpatialField {
        self.map(|v| c * v)
    }
}

/// Neumaier-compensated sum; keeps telescoping sums near machine precision.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Midpoint-rule integral over the domain.
pub fn integrate(f: &SpatialField) -> f64 {
    f.grid.h() * compensated_sum(f.values.iter().copied())
}

/// Weighted discrete Dirichlet integral over interior interfaces,
/// `sum w_{i+1/2} ((f_{i+1}-f_i)/h)^2 h` with arithmetic-mean interface weights.
pub fn gradient_sq_weighted(f: &SpatialField, weight: &SpatialField) -> f64 {
    assert_eq!(f.grid, weight.grid, "fields on different grids");
    let h = f.grid.h();
    let v = &f.values;
    let w = &weight.values;
    let mut total = 0.0;
    for i in 0..v.len() - 1 {
        let wm = 0.5 * (w[i] + w[i + 1]);
        let df = (v[i + 1] - v[i]) / h;
        total += wm * df * df * h;
    }
    total
}

/// True iff the sampled fields are linearly independent: the sine of the
/// angle between the value vectors exceeds `tol`.
pub fn linearly_independent(f: &SpatialField, g: &SpatialField, tol: f64) -> Result<bool> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let ff = dot(f.values(), f.values());
    let gg = dot(g.values(), g.values());
    if ff == 0.0 || gg == 0.0 {
        return Err(Error::ZeroField);
    }
    let fg = dot(f.values(), g.values());
    let sin_sq = 1.0 - (fg * fg) / (ff * gg);
    Ok(sin_sq > tol * tol)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

/// Least-squares decomposition `K = alpha*P + beta*Q`; Some iff both
/// coefficients exceed `tol` and the relative residual is below `tol`.
pub fn positive_hull_coefficients(
    k: &SpatialField,
    p: &SpatialField,
    q: &SpatialField,
    tol: f64,
) -> Result<Option<(f64, f64)>> {
    if k.grid != p.grid || k.grid != q.grid {
        return Err(Error::GridMismatch);
    }
    let gpp = dot(p.values(), p.values());
    let gqq = dot(q.values(), q.values());
    let gpq = dot(p.values(), q.values());
    if gpp == 0.0 || gqq == 0.0 {
        return Err(Error::ZeroField);
    }
    let det = gpp * gqq - gpq * gpq;
    // sin^2 of the angle between P and Q; guards the normal equations
    if det / (gpp * gqq) <= 1e-16 {
        return Err(Error::NearlyDependent);
    }
    let gpk = dot(p.values(), k.values());
    let gqk = dot(q.values(), k.values());
    let alpha = (gqq * gpk - gpq * gqk) / det;
    let beta = (gpp * gqk - gpq * gpk) / det;

    let mut resid_sq = 0.0;
    let mut norm_sq = 0.0;
    for i in 0..k.len() {
        let r = k.values[i] - alpha * p.values[i] - beta * q.values[i];
        resid_sq += r * r;
        norm_sq += k.values[i] * k.values[i];
    }
    if norm_sq == 0.0 {
        return Err(Error::ZeroField);
    }
    let rel_resid = (resid_sq / norm_sq).sqrt();
    if alpha > tol && beta > tol && rel_resid < tol {
        Ok(Some((alpha, beta)))
    } else {
        Ok(None)
    }
}
