//! Chain rule for the chart `x = (log|z1|, log|z2|) -> (u, σ)` and the
//! per-σ coefficients of the reduced Monge-Ampère operator.
//!
//! Torus-invariant tensors are evaluated at the real-positive representative
//! `z_a = e^{x_a}` and expressed in the χ-orthonormal frame
//! `M_ab = g_ab Φ^{k_a + k_b}`. In that frame `tr_χ g = tr M` and
//! `det g / det χ = det M`, and the background forms depend on σ alone.

use crate::error::{Error, Result};
use crate::geometry::{HopfModuli, ReducedCoord};

/// Real symmetric 2×2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Sym2 {
    pub const fn new(xx: f64, yy: f64, xy: f64) -> Self {
        Sym2 { xx, yy, xy }
    }

    pub fn outer(a: [f64; 2], b: [f64; 2]) -> Self {
        // symmetrised: ½(a⊗b + b⊗a)
        Sym2::new(a[0] * b[0], a[1] * b[1], 0.5 * (a[0] * b[1] + a[1] * b[0]))
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Both eigenvalues positive.
    #[inline]
    pub fn is_positive_definite(&self) -> bool {
        self.xx > 0.0 && self.det() > 0.0
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = 0.5 * (self.xx + self.yy);
        let r = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        [m - r, m + r]
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Sym2 {
        Sym2::new(s * self.xx, s * self.yy, s * self.xy)
    }

    #[inline]
    pub fn add(&self, o: &Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.yy + o.yy, self.xy + o.xy)
    }

    /// `tr(self⁻¹ b)`, given `det = self.det()`.
    #[inline]
    pub fn inv_trace(&self, b: &Sym2, det: f64) -> f64 {
        (self.yy * b.xx + self.xx * b.yy - 2.0 * self.xy * b.xy) / det
    }

    #[inline]
    pub fn quad(&self, v: [f64; 2]) -> f64 {
        self.xx * v[0] * v[0] + self.yy * v[1] * v[1] + 2.0 * self.xy * v[0] * v[1]
    }
}

/// First and second derivatives of `(u, σ)` with respect to
/// `x = (log|z1|, log|z2|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartJacobians {
    pub du: [f64; 2],
    pub dsigma: [f64; 2],
    /// `d2u[a][b] = ∂²u / ∂x_a ∂x_b`.
    pub d2u: [[f64; 2]; 2],
    pub d2sigma: [[f64; 2]; 2],
}

/// Jacobians at `rc`. Only σ enters, and it must lie strictly inside (0, 1).
pub fn chart_jacobians(m: &HopfModuli, rc: &ReducedCoord) -> Result<ChartJacobians> {
    let s = rc.sigma;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::SigmaOutOfRange { sigma: s });
    }
    let (k1, k2) = (m.k1, m.k2);
    let z = m.z_of_sigma(s);
    let d = k2 - k1;
    let w = s * (1.0 - s) / z;
    let dw = (1.0 - 2.0 * s) / z + 2.0 * d * s * (1.0 - s) / (z * z);

    let du = [2.0 * s / z, 2.0 * (1.0 - s) / z];
    let dsigma = [4.0 * k2 * w, -4.0 * k1 * w];
    // σ-derivatives of the first-derivative components
    let du_ds = [4.0 * k2 / (z * z), -4.0 * k1 / (z * z)];
    let dsig_ds = [4.0 * k2 * dw, -4.0 * k1 * dw];

    let mut d2u = [[0.0; 2]; 2];
    let mut d2sigma = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            d2u[a][b] = du_ds[a] * dsigma[b];
            d2sigma[a][b] = dsig_ds[a] * dsigma[b];
        }
    }
    Ok(ChartJacobians { du, dsigma, d2u, d2sigma })
}

/// Inverse chart `(u, σ) -> x`.
pub fn chart_forward(m: &HopfModuli, rc: &ReducedCoord) -> [f64; 2] {
    [m.k1 * rc.u + 0.5 * rc.sigma.ln(), m.k2 * rc.u + 0.5 * (1.0 - rc.sigma).ln()]
}

/// Everything the solver needs on one σ-row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowGeometry {
    pub sigma: f64,
    pub z: f64,
    pub log_z: f64,
    /// ω̂ in the χ-orthonormal frame.
    pub hat: Sym2,
    /// Θ in the χ-orthonormal frame.
    pub theta: Sym2,
    /// Coefficients of the reduced complex Hessian of φ:
    /// `N = φ_u C_u + φ_σ C_σ + φ_uu C_uu + φ_uσ C_uσ + φ_σσ C_σσ`.
    pub c_u: Sym2,
    pub c_s: Sym2,
    pub c_uu: Sym2,
    pub c_us: Sym2,
    pub c_ss: Sym2,
    /// u-tangent `(k1 z1, k2 z2)` in the χ-orthonormal frame.
    pub loop_vector: [f64; 2],
}

impl RowGeometry {
    pub fn new(m: &HopfModuli, sigma: f64) -> Result<Self> {
        let jac = chart_jacobians(m, &ReducedCoord { u: 0.0, sigma })?;
        let z = m.z_of_sigma(sigma);
        let parts = [sigma, 1.0 - sigma];
        let k = [m.k1, m.k2];
        let k2sum = k[0] * k[0] * parts[0] + k[1] * k[1] * parts[1];
        let r = [parts[0].sqrt(), parts[1].sqrt()];

        let hat_entry = |a: usize, b: usize| {
            let delta = if a == b { 1.0 / z } else { 0.0 };
            delta + r[a] * r[b] * ((1.0 - 2.0 * k[a] - 2.0 * k[b]) / (z * z) + 4.0 * k2sum / (z * z * z))
        };
        let hat = Sym2::new(hat_entry(0, 0), hat_entry(1, 1), hat_entry(0, 1));
        let theta = Sym2::new(parts[0] / (z * z), parts[1] / (z * z), r[0] * r[1] / (z * z));

        // ∂_a ∂_b̄ φ = e^{-x_a - x_b} H_ab / 4 becomes H_ab / (4 r_a r_b) in the frame
        let frame = |h: [[f64; 2]; 2]| {
            Sym2::new(
                h[0][0] / (4.0 * parts[0]),
                h[1][1] / (4.0 * parts[1]),
                0.5 * (h[0][1] + h[1][0]) / (4.0 * r[0] * r[1]),
            )
        };
        let tensor = |a: [f64; 2], b: [f64; 2]| [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]];
        let sym_tensor = |a: [f64; 2], b: [f64; 2]| {
            let t = tensor(a, b);
            [[2.0 * t[0][0], t[0][1] + t[1][0]], [t[1][0] + t[0][1], 2.0 * t[1][1]]]
        };

        Ok(RowGeometry {
            sigma,
            z,
            log_z: z.ln(),
            hat,
            theta,
            c_u: frame(jac.d2u),
            c_s: frame(jac.d2sigma),
            c_uu: frame(tensor(jac.du, jac.du)),
            c_us: frame(sym_tensor(jac.du, jac.dsigma)),
            c_ss: frame(tensor(jac.dsigma, jac.dsigma)),
            loop_vector: [k[0] * r[0], k[1] * r[1]],
        })
    }

    /// Reference metric `(1 - 2t) ω̂ + 2t Θ` in the frame.
    #[inline]
    pub fn reference(&self, t: f64) -> Sym2 {
        self.hat.scale(1.0 - 2.0 * t).add(&self.theta.scale(2.0 * t))
    }

    /// Reduced complex Hessian of φ in the frame, given its `(u, σ)` derivatives.
    #[inline]
    pub fn hessian(&self, d: &super::grid::ReducedDerivs) -> Sym2 {
        let mut n = self.c_u.scale(d.u);
        n = n.add(&self.c_s.scale(d.s));
        n = n.add(&self.c_uu.scale(d.uu));
        n = n.add(&self.c_us.scale(d.us));
        n.add(&self.c_ss.scale(d.ss))
    }
}
