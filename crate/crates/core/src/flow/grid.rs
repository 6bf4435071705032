use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;

/// Grid on the reduced cylinder: `u` nodes `i L / n_u` (periodic), σ cells
/// centred at `(j + ½) / n_sigma`, so no node sits on σ ∈ {0, 1}.
///
/// Fields are stored with `u` as the slow index: `idx(i, j) = i n_sigma + j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_u: usize,
    pub n_sigma: usize,
    pub period: f64,
}

impl GridSpec {
    pub fn new(n_u: usize, n_sigma: usize, period: f64) -> Result<Self> {
        if n_u < MIN_POINTS || n_sigma < MIN_POINTS {
            return Err(Error::Grid(format!("need at least {MIN_POINTS} points per direction, got {n_u} x {n_sigma}")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Grid(format!("period must be positive, got {period}")));
        }
        Ok(GridSpec { n_u, n_sigma, period })
    }

    pub fn du(&self) -> f64 {
        self.period / self.n_u as f64
    }

    pub fn dsigma(&self) -> f64 {
        1.0 / self.n_sigma as f64
    }

    pub fn u(&self, i: usize) -> f64 {
        i as f64 * self.du()
    }

    pub fn sigma(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.n_sigma as f64
    }

    pub fn len(&self) -> usize {
        self.n_u * self.n_sigma
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_sigma + j
    }
}

/// Partial derivatives of a torus-invariant function in `(u, σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedDerivs {
    pub u: f64,
    pub s: f64,
    pub uu: f64,
    pub us: f64,
    pub ss: f64,
}

/// Reciprocal spacings used by the stencils.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    half_inv_du: f64,
    inv_du2: f64,
    half_inv_ds: f64,
    inv_ds2: f64,
}

impl Stencil {
    pub fn new(grid: &GridSpec) -> Self {
        let (du, ds) = (grid.du(), grid.dsigma());
        Stencil { half_inv_du: 0.5 / du, inv_du2: 1.0 / (du * du), half_inv_ds: 0.5 / ds, inv_ds2: 1.0 / (ds * ds) }
    }

    /// First and second σ-differences of column `col` at cell `j`.
    ///
    /// Boundary cells use a ghost value from quadratic extrapolation of the
    /// three nearest cells. Everything is written in differences so a
    /// constant field has exactly zero derivatives.
    #[inline(always)]
    fn sigma(&self, col: &[f64], j: usize) -> (f64, f64) {
        let n = col.len();
        if j == 0 {
            let d1 = col[1] - col[0];
            let d2 = col[2] - col[0];
            ((4.0 * d1 - d2) * self.half_inv_ds, (d2 - 2.0 * d1) * self.inv_ds2)
        } else if j == n - 1 {
            let d1 = col[n - 2] - col[n - 1];
            let d2 = col[n - 3] - col[n - 1];
            (-(4.0 * d1 - d2) * self.half_inv_ds, (d2 - 2.0 * d1) * self.inv_ds2)
        } else {
            let dp = col[j + 1] - col[j];
            let dm = col[j - 1] - col[j];
            ((dp - dm) * self.half_inv_ds, (dp + dm) * self.inv_ds2)
        }
    }

    /// Derivatives at cell `j` of column `col`, whose neighbours in `u` are
    /// `colp` (next) and `colm` (previous).
    #[inline(always)]
    pub fn at(&self, colm: &[f64], col: &[f64], colp: &[f64], j: usize) -> ReducedDerivs {
        let dp = colp[j] - col[j];
        let dm = colm[j] - col[j];
        let (s, ss) = self.sigma(col, j);
        let (sp, _) = self.sigma(colp, j);
        let (sm, _) = self.sigma(colm, j);
        ReducedDerivs {
            u: (dp - dm) * self.half_inv_du,
            s,
            uu: (dp + dm) * self.inv_du2,
            us: (sp - sm) * self.half_inv_du,
            ss,
        }
    }
}

/// Columns `(i - 1, i, i + 1)` of `field`, wrapping in `u`.
#[inline]
pub fn columns<'a>(grid: &GridSpec, field: &'a [f64], i: usize) -> [&'a [f64]; 3] {
    let ns = grid.n_sigma;
    let ip = (i + 1) % grid.n_u;
    let im = (i + grid.n_u - 1) % grid.n_u;
    [&field[im * ns..(im + 1) * ns], &field[i * ns..(i + 1) * ns], &field[ip * ns..(ip + 1) * ns]]
}

/// Second-order derivatives of `field` at cell `(i, j)`.
pub fn derivs(grid: &GridSpec, field: &[f64], i: usize, j: usize) -> ReducedDerivs {
    let [m, c, p] = columns(grid, field, i);
    Stencil::new(grid).at(m, c, p, j)
}

/// Scale factors of the stencils, per unit coefficient: `1/h` for first
/// derivatives and `1/h²` or `1/(h_u h_σ)` for second. Coefficients weighted
/// by these add up to a diffusion number; the spectral radius of the
/// discrete operator is at most four times that sum.
pub fn stencil_scales(grid: &GridSpec) -> ReducedDerivs {
    let du = grid.du();
    let ds = grid.dsigma();
    ReducedDerivs { u: 1.0 / du, s: 1.0 / ds, uu: 1.0 / (du * du), us: 1.0 / (du * ds), ss: 1.0 / (ds * ds) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(grid: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        for i in 0..grid.n_u {
            for j in 0..grid.n_sigma {
                out[grid.idx(i, j)] = f(grid.u(i), grid.sigma(j));
            }
        }
        out
    }

    #[test]
    fn rejects_small_grids() {
        assert!(GridSpec::new(4, 16, 1.0).is_err());
        assert!(GridSpec::new(16, 16, 0.0).is_err());
    }

    #[test]
    fn cell_centres() {
        let g = GridSpec::new(8, 8, 2.0).unwrap();
        assert_eq!(g.sigma(0), 1.0 / 16.0);
        assert_eq!(g.sigma(7), 15.0 / 16.0);
        assert_eq!(g.u(4), 1.0);
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let g = GridSpec::new(8, 8, 1.3).unwrap();
        let f = vec![0.1234567; g.len()];
        for i in 0..g.n_u {
            for j in 0..g.n_sigma {
                assert_eq!(derivs(&g, &f, i, j), ReducedDerivs::default());
            }
        }
    }

    #[test]
    fn quadratics_in_sigma_are_exact() {
        let g = GridSpec::new(8, 10, 1.0).unwrap();
        let f = field(&g, |_, s| 3.0 * s * s - 2.0 * s + 0.5);
        for j in 0..g.n_sigma {
            let d = derivs(&g, &f, 3, j);
            let s = g.sigma(j);
            assert!((d.s - (6.0 * s - 2.0)).abs() < 1e-11, "j = {j}");
            assert!((d.ss - 6.0).abs() < 1e-9, "j = {j}");
        }
    }

    #[test]
    fn second_order_in_u_and_mixed() {
        let err = |n: usize| {
            let l = 2.0;
            let g = GridSpec::new(n, n, l).unwrap();
            let k = 2.0 * std::f64::consts::PI / l;
            let f = field(&g, |u, s| (k * u).sin() * s.powi(3));
            let (i, j) = (n / 4 + 1, n / 2);
            let (u, s) = (g.u(i), g.sigma(j));
            let d = derivs(&g, &f, i, j);
            (d.uu + k * k * (k * u).sin() * s.powi(3)).abs().max((d.us - 3.0 * k * (k * u).cos() * s * s).abs())
        };
        let order = (err(32) / err(64)).log2();
        assert!(order > 1.8, "order {order}");
    }
}
