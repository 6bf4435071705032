//! Closed-form tensors of the LCK metric `ω̂ = i∂∂̄Φ / Φ` and its companions.
//!
//! All functions accept arbitrary points of `C² \ {0}`, phases included.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{phi_data, AmbientPoint, HopfModuli, PhiData};
use crate::hermitian::{ComplexGradient2, Hermitian2};

/// Which form of the complex Hessian of Φ to evaluate.
///
/// `Corrected` carries `Σ k_a² |z_a|² Φ^{-2k_a}` in the rank-one coefficient,
/// as obtained by differentiating `Z`. `Unsquared` uses `Σ k_a |z_a|² Φ^{-2k_a}`
/// and is kept only so the verification suite can show that it fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HessianVariant {
    #[default]
    Corrected,
    Unsquared,
}

impl std::str::FromStr for HessianVariant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "corrected" => Ok(HessianVariant::Corrected),
            "unsquared" => Ok(HessianVariant::Unsquared),
            other => Err(format!("unknown Hessian variant `{other}` (expected corrected|unsquared)")),
        }
    }
}

impl std::fmt::Display for HessianVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HessianVariant::Corrected => "corrected",
            HessianVariant::Unsquared => "unsquared",
        })
    }
}

/// Everything evaluated at one point, sharing a single Φ solve.
#[derive(Debug, Clone, Copy)]
pub struct PointTensors {
    pub data: PhiData,
    pub z: f64,
    /// `∂_i Φ`
    pub grad: ComplexGradient2,
    /// `∂_i ∂_j̄ Φ`
    pub hessian: Hermitian2,
    pub hat: Hermitian2,
    pub theta: Hermitian2,
    pub chi: Hermitian2,
}

impl PointTensors {
    pub fn evaluate(m: &HopfModuli, p: &AmbientPoint, variant: HessianVariant) -> Result<Self> {
        let data = phi_data(m, p)?;
        let z = data.z(m);
        let phi = data.phi;
        let grad = gradient_from(m, p, &data, z);
        let hessian = hessian_from(m, &data, z, &grad, variant);
        let hat = hessian.scale(1.0 / phi);
        let lee = grad.scale(1.0 / phi);
        Ok(PointTensors {
            data,
            z,
            grad,
            hessian,
            hat,
            theta: Hermitian2::outer(&lee),
            chi: Hermitian2::diag(phi.powf(-2.0 * m.k1), phi.powf(-2.0 * m.k2)),
        })
    }

    /// `θ^{(1,0)}` components `Φ_i / Φ`.
    pub fn lee(&self) -> ComplexGradient2 {
        self.grad.scale(1.0 / self.data.phi)
    }

    pub fn ricci_chi(&self) -> Hermitian2 {
        2.0 * self.hat - 2.0 * self.theta
    }

    pub fn reference(&self, t: f64) -> Result<Hermitian2> {
        check_time(t)?;
        Ok((1.0 - 2.0 * t) * self.hat + (2.0 * t) * self.theta)
    }
}

fn gradient_from(m: &HopfModuli, p: &AmbientPoint, d: &PhiData, z: f64) -> ComplexGradient2 {
    let phi = d.phi;
    ComplexGradient2::new(
        p.z1.conj() * (phi.powf(1.0 - 2.0 * m.k1) / z),
        p.z2.conj() * (phi.powf(1.0 - 2.0 * m.k2) / z),
    )
}

fn hessian_from(m: &HopfModuli, d: &PhiData, z: f64, grad: &ComplexGradient2, variant: HessianVariant) -> Hermitian2 {
    let phi = d.phi;
    let weighted = match variant {
        HessianVariant::Corrected => m.k1 * m.k1 * d.parts[0] + m.k2 * m.k2 * d.parts[1],
        HessianVariant::Unsquared => m.k1 * d.parts[0] + m.k2 * d.parts[1],
    };
    let coeff = |ki: f64, kj: f64| 1.0 - 2.0 * ki - 2.0 * kj + 4.0 / z * weighted;
    let (g1, g2) = (grad.d1, grad.d2);
    Hermitian2 {
        h11: phi.powf(1.0 - 2.0 * m.k1) / z + coeff(m.k1, m.k1) * g1.norm_sqr() / phi,
        h22: phi.powf(1.0 - 2.0 * m.k2) / z + coeff(m.k2, m.k2) * g2.norm_sqr() / phi,
        h12: g1 * g2.conj() * (coeff(m.k1, m.k2) / phi),
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t >= 0.5 {
        return Err(Error::BeyondMaximalTime { t });
    }
    Ok(())
}

/// `Φ_i = z̄_i Φ^{1-2k_i} / Z`.
pub fn phi_gradient(m: &HopfModuli, p: &AmbientPoint) -> Result<ComplexGradient2> {
    let d = phi_data(m, p)?;
    Ok(gradient_from(m, p, &d, d.z(m)))
}

pub fn phi_hessian(m: &HopfModuli, p: &AmbientPoint) -> Result<Hermitian2> {
    phi_hessian_with(m, p, HessianVariant::Corrected)
}

pub fn phi_hessian_with(m: &HopfModuli, p: &AmbientPoint, variant: HessianVariant) -> Result<Hermitian2> {
    let d = phi_data(m, p)?;
    let z = d.z(m);
    let grad = gradient_from(m, p, &d, z);
    Ok(hessian_from(m, &d, z, &grad, variant))
}

/// `ĝ_{ij̄} = Φ_{ij̄} / Φ`; positive definiteness is checked.
pub fn hat_metric(m: &HopfModuli, p: &AmbientPoint) -> Result<Hermitian2> {
    hat_metric_with(m, p, HessianVariant::Corrected)
}

pub fn hat_metric_with(m: &HopfModuli, p: &AmbientPoint, variant: HessianVariant) -> Result<Hermitian2> {
    let hat = PointTensors::evaluate(m, p, variant)?.hat;
    if !hat.is_positive_definite() {
        return Err(Error::Indefinite { what: "hat metric", min_eigenvalue: hat.min_eigenvalue() });
    }
    Ok(hat)
}

/// `Θ_{ij̄} = Φ_i Φ_j̄ / Φ²`, rank one and nonnegative.
pub fn theta_form(m: &HopfModuli, p: &AmbientPoint) -> Result<Hermitian2> {
    Ok(PointTensors::evaluate(m, p, HessianVariant::Corrected)?.theta)
}

/// `χ_{ij̄} = Φ^{-2k_i} δ_{ij}` with `det χ = Φ^{-2}`.
pub fn chi_metric(m: &HopfModuli, p: &AmbientPoint) -> Result<Hermitian2> {
    let phi = crate::geometry::solve_phi(m, p)?;
    Ok(Hermitian2::diag(phi.powf(-2.0 * m.k1), phi.powf(-2.0 * m.k2)))
}

/// Chern-Ricci form of χ: `2 i∂∂̄ log Φ = 2ĝ - 2Θ`.
pub fn ricci_chi(m: &HopfModuli, p: &AmbientPoint) -> Result<Hermitian2> {
    Ok(PointTensors::evaluate(m, p, HessianVariant::Corrected)?.ricci_chi())
}

/// `ω_t = (1 - 2t) ω̂ + 2t Θ` for `t < 1/2`.
pub fn reference_metric(m: &HopfModuli, t: f64, p: &AmbientPoint) -> Result<Hermitian2> {
    PointTensors::evaluate(m, p, HessianVariant::Corrected)?.reference(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_moduli;
    use crate::hermitian::trace_pair;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn asym() -> HopfModuli {
        make_moduli(2.0, 4.0).unwrap()
    }

    fn pt(x1: f64, x2: f64) -> AmbientPoint {
        AmbientPoint::real(x1, x2).unwrap()
    }

    #[test]
    fn gradient_examples() {
        let g = phi_gradient(&HopfModuli::round(), &pt(1.0, 1.0)).unwrap();
        assert!(g.max_abs_diff(&ComplexGradient2::new(c(1.0, 0.0), c(1.0, 0.0))) < 1e-14);

        let g = phi_gradient(&asym(), &pt(1.0, 0.0)).unwrap();
        assert!((g.d1 - c(1.5, 0.0)).norm() < 1e-14);
        assert_eq!(g.d2, c(0.0, 0.0));
    }

    #[test]
    fn round_hessian_is_identity_only_when_corrected() {
        let round = HopfModuli::round();
        let p = AmbientPoint::new(c(0.7, -0.2), c(-1.1, 0.4)).unwrap();
        let h = phi_hessian(&round, &p).unwrap();
        assert!(h.max_abs_diff(&Hermitian2::IDENTITY) < 1e-14);

        // unsquared variant: δ_ij + z̄_i z_j / r²
        let unsquared = phi_hessian_with(&round, &p, HessianVariant::Unsquared).unwrap();
        let r2 = p.z1.norm_sqr() + p.z2.norm_sqr();
        let expected = Hermitian2::new(1.0 + p.z1.norm_sqr() / r2, 1.0 + p.z2.norm_sqr() / r2, p.z1.conj() * p.z2 / r2);
        assert!(unsquared.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn hat_metric_determinant_examples() {
        let m = asym();
        let det = hat_metric(&m, &pt(1.0, 0.0)).unwrap().det();
        assert!((det - 3.375).abs() < 1e-13);

        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let phi = golden.powf(-1.5);
        let z = 2.0 / 3.0 * (2.0 - golden);
        let det = hat_metric(&m, &pt(1.0, 1.0)).unwrap().det();
        assert!((det - 1.0 / (phi * phi * z * z * z)).abs() < 1e-13);
        assert!((det - 0.3018692).abs() < 1e-7);
    }

    #[test]
    fn round_hat_metric_is_round() {
        let round = HopfModuli::round();
        let p = pt(1.0, 2.0);
        let hat = hat_metric(&round, &p).unwrap();
        assert!(hat.max_abs_diff(&Hermitian2::diag(0.2, 0.2)) < 1e-15);
        let chi = chi_metric(&round, &p).unwrap();
        assert!(hat.max_abs_diff(&chi) < 1e-15);
    }

    #[test]
    fn theta_examples() {
        let th = theta_form(&HopfModuli::round(), &pt(1.0, 0.0)).unwrap();
        assert!(th.max_abs_diff(&Hermitian2::diag(1.0, 0.0)) < 1e-15);

        let th = theta_form(&asym(), &pt(0.0, 1.0)).unwrap();
        let phi2 = 1.0 / (4.0 / 3.0);
        assert!(th.max_abs_diff(&Hermitian2::diag(0.0, phi2 * phi2)) < 1e-15);

        let th = theta_form(&asym(), &AmbientPoint::new(c(0.3, 0.9), c(-1.7, 0.2)).unwrap()).unwrap();
        assert!(th.det().abs() < 1e-12 * th.trace() * th.trace());
    }

    #[test]
    fn chi_examples() {
        let chi = chi_metric(&asym(), &pt(1.0, 1.0)).unwrap();
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!(chi.max_abs_diff(&Hermitian2::diag(golden, golden * golden)) < 1e-14);
        assert!((chi.h11 - 0.6180340).abs() < 1e-7 && (chi.h22 - 0.3819660).abs() < 1e-7);
        assert_eq!(chi_metric(&asym(), &pt(1.0, 0.0)).unwrap(), Hermitian2::IDENTITY);
    }

    #[test]
    fn ricci_chi_examples() {
        let ric = ricci_chi(&HopfModuli::round(), &pt(1.0, 0.0)).unwrap();
        assert!(ric.max_abs_diff(&Hermitian2::diag(0.0, 2.0)) < 1e-14);

        let m = asym();
        let p = AmbientPoint::new(c(0.3, 0.9), c(-1.7, 0.2)).unwrap();
        let ric = ricci_chi(&m, &p).unwrap();
        let hat = hat_metric(&m, &p).unwrap();
        assert!(ric.min_eigenvalue() >= -1e-10 * hat.norm());
        assert!((trace_pair(&hat, &ric).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reference_metric_examples() {
        let m = asym();
        let p = pt(1.0, 1.0);
        assert_eq!(reference_metric(&m, 0.0, &p).unwrap(), hat_metric(&m, &p).unwrap());
        let det = reference_metric(&m, 0.25, &p).unwrap().det();
        assert!((det - 0.5 * hat_metric(&m, &p).unwrap().det()).abs() < 1e-13);
        assert!((det - 0.1509346).abs() < 1e-7);
        let near = reference_metric(&m, 0.5 - 1e-9, &p).unwrap().det();
        assert!(near < 1e-8);
        assert!(matches!(reference_metric(&m, 0.5, &p), Err(Error::BeyondMaximalTime { .. })));
    }

    #[test]
    fn variant_parses() {
        assert_eq!("unsquared".parse::<HessianVariant>().unwrap(), HessianVariant::Unsquared);
        assert!("other".parse::<HessianVariant>().is_err());
    }
}
