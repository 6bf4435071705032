//! Moduli of a class-1 primary Hopf surface, the implicit potential Φ and
//! the reduced chart `(u, σ)` on the torus quotient.
//!
//! Only the moduli `|α|, |β|` are stored. Every tensor built on top of Φ
//! depends on `|z1|, |z2|` alone, so the phases of α and β never enter.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative step size at which the Newton iteration for Φ stops.
const PHI_STEP_TOL: f64 = 1e-15;
const PHI_MAX_ITER: usize = 200;
/// σ this close to 0 or 1 is snapped to the endpoint.
const SIGMA_SNAP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfModuli {
    pub abs_alpha: f64,
    pub abs_beta: f64,
    pub k1: f64,
    pub k2: f64,
    /// `log(|α||β|)`, the period of `u = log Φ` under the deck transformation.
    pub period: f64,
}

impl HopfModuli {
    pub fn new(abs_alpha: f64, abs_beta: f64) -> Result<Self> {
        if !(abs_alpha.is_finite() && abs_beta.is_finite()) || abs_alpha <= 1.0 || abs_alpha > abs_beta {
            return Err(Error::InvalidModuli { abs_alpha, abs_beta });
        }
        let la = abs_alpha.ln();
        let lb = abs_beta.ln();
        let period = la + lb;
        Ok(HopfModuli { abs_alpha, abs_beta, k1: la / period, k2: lb / period, period })
    }

    /// The standard Hopf surface `|α| = |β| = 2`.
    pub fn round() -> Self {
        HopfModuli::new(2.0, 2.0).expect("round moduli are valid")
    }

    pub fn k(&self, i: usize) -> f64 {
        match i {
            0 => self.k1,
            1 => self.k2,
            _ => panic!("k index {i} out of range"),
        }
    }

    pub fn is_round(&self) -> bool {
        self.abs_alpha == self.abs_beta
    }

    /// `Z` as a function of σ alone: `2(k1 σ + k2 (1 - σ))`.
    pub fn z_of_sigma(&self, sigma: f64) -> f64 {
        2.0 * (self.k1 * sigma + self.k2 * (1.0 - sigma))
    }
}

pub fn make_moduli(abs_alpha: f64, abs_beta: f64) -> Result<HopfModuli> {
    HopfModuli::new(abs_alpha, abs_beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientPoint {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl AmbientPoint {
    pub fn new(z1: Complex64, z2: Complex64) -> Result<Self> {
        if z1.norm_sqr() == 0.0 && z2.norm_sqr() == 0.0 {
            return Err(Error::Origin);
        }
        Ok(AmbientPoint { z1, z2 })
    }

    pub fn real(x1: f64, x2: f64) -> Result<Self> {
        AmbientPoint::new(Complex64::new(x1, 0.0), Complex64::new(x2, 0.0))
    }

    pub fn z(&self, i: usize) -> Complex64 {
        match i {
            0 => self.z1,
            1 => self.z2,
            _ => panic!("coordinate index {i} out of range"),
        }
    }

    pub fn abs_sq(&self) -> [f64; 2] {
        [self.z1.norm_sqr(), self.z2.norm_sqr()]
    }

    /// Euclidean norm `r = sqrt(|z1|² + |z2|²)`.
    pub fn norm(&self) -> f64 {
        (self.z1.norm_sqr() + self.z2.norm_sqr()).sqrt()
    }
}

/// Cohomogeneity-one coordinates: `u = log Φ` and `σ = |z1|² Φ^{-2k1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCoord {
    pub u: f64,
    pub sigma: f64,
}

/// Φ together with the two summands of its defining relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiData {
    pub phi: f64,
    /// `[|z1|² Φ^{-2k1}, |z2|² Φ^{-2k2}]`; they sum to one.
    pub parts: [f64; 2],
}

impl PhiData {
    pub fn z(&self, m: &HopfModuli) -> f64 {
        2.0 * (m.k1 * self.parts[0] + m.k2 * self.parts[1])
    }
}

fn relation(a: f64, b: f64, m: &HopfModuli, s: f64) -> (f64, f64) {
    let t1 = a * s.powf(-2.0 * m.k1);
    let t2 = b * s.powf(-2.0 * m.k2);
    let f = t1 + t2 - 1.0;
    let df = -2.0 * (m.k1 * t1 + m.k2 * t2) / s;
    (f, df)
}

/// Solves `|z1|² s^{-2k1} + |z2|² s^{-2k2} = 1` for `s > 0`.
///
/// Safeguarded Newton: the left side is strictly decreasing in `s`, so a
/// bracket found by doubling/halving from `|z|²` always exists and any
/// Newton step leaving it is replaced by bisection.
pub fn solve_phi(m: &HopfModuli, p: &AmbientPoint) -> Result<f64> {
    let [a, b] = p.abs_sq();
    if a == 0.0 && b == 0.0 {
        return Err(Error::Origin);
    }
    if b == 0.0 {
        return Ok(a.powf(0.5 / m.k1));
    }
    if a == 0.0 {
        return Ok(b.powf(0.5 / m.k2));
    }

    let mut s = a + b;
    let (f0, _) = relation(a, b, m, s);
    if f0 == 0.0 {
        return Ok(s);
    }
    let (mut lo, mut hi);
    if f0 > 0.0 {
        lo = s;
        hi = 2.0 * s;
        while relation(a, b, m, hi).0 > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
    } else {
        hi = s;
        lo = 0.5 * s;
        while relation(a, b, m, lo).0 < 0.0 {
            hi = lo;
            lo *= 0.5;
        }
    }

    for _ in 0..PHI_MAX_ITER {
        let (f, df) = relation(a, b, m, s);
        if f == 0.0 {
            return Ok(s);
        }
        if f > 0.0 {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
        let mut next = s - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - s).abs();
        s = next;
        if step <= PHI_STEP_TOL * s || hi - lo <= 4.0 * f64::EPSILON * s {
            return Ok(s);
        }
    }
    Err(Error::PhiNoConvergence { iterations: PHI_MAX_ITER, last: s })
}

pub fn phi_data(m: &HopfModuli, p: &AmbientPoint) -> Result<PhiData> {
    let phi = solve_phi(m, p)?;
    let [a, b] = p.abs_sq();
    Ok(PhiData { phi, parts: [a * phi.powf(-2.0 * m.k1), b * phi.powf(-2.0 * m.k2)] })
}

/// `Z = 2(k1 |z1|² Φ^{-2k1} + k2 |z2|² Φ^{-2k2})`, a deck-invariant function
/// with values in `[2k1, 2k2]`.
pub fn z_function(m: &HopfModuli, p: &AmbientPoint) -> Result<f64> {
    Ok(phi_data(m, p)?.z(m))
}

fn snap_sigma(sigma: f64) -> f64 {
    let s = sigma.clamp(0.0, 1.0);
    if s < SIGMA_SNAP {
        0.0
    } else if 1.0 - s < SIGMA_SNAP {
        1.0
    } else {
        s
    }
}

pub fn reduced_from_ambient(m: &HopfModuli, p: &AmbientPoint) -> Result<ReducedCoord> {
    let d = phi_data(m, p)?;
    Ok(ReducedCoord { u: d.phi.ln(), sigma: snap_sigma(d.parts[0]) })
}

/// Real nonnegative representative of the torus orbit with coordinates `rc`:
/// `log|z1| = k1 u + ½ log σ`, `log|z2| = k2 u + ½ log(1 - σ)`.
pub fn ambient_from_reduced(m: &HopfModuli, rc: &ReducedCoord) -> AmbientPoint {
    let sigma = snap_sigma(rc.sigma);
    let r1 = (m.k1 * rc.u).exp() * sigma.sqrt();
    let r2 = (m.k2 * rc.u).exp() * (1.0 - sigma).sqrt();
    AmbientPoint { z1: Complex64::new(r1, 0.0), z2: Complex64::new(r2, 0.0) }
}

/// The deck transformation restricted to moduli: `(z1, z2) -> (|α| z1, |β| z2)`.
pub fn deck_scale(m: &HopfModuli, p: &AmbientPoint) -> AmbientPoint {
    AmbientPoint { z1: p.z1 * m.abs_alpha, z2: p.z2 * m.abs_beta }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    // Golden-ratio conjugate: the σ-value at (1, 1) for moduli (2, 4).
    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    #[test]
    fn moduli_examples() {
        let m = make_moduli(2.0, 2.0).unwrap();
        assert_eq!(m.k1, 0.5);
        assert_eq!(m.k2, 0.5);
        assert!((m.period - 4f64.ln()).abs() < 1e-15);

        let m = make_moduli(2.0, 4.0).unwrap();
        assert!((m.k1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.k2 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.period - 2.0794415416798357).abs() < 1e-15);
        assert!((m.k1 + m.k2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn moduli_rejects_outside_class_one() {
        assert!(matches!(make_moduli(2.0, 1.5), Err(Error::InvalidModuli { .. })));
        assert!(matches!(make_moduli(1.0, 3.0), Err(Error::InvalidModuli { .. })));
        assert!(matches!(make_moduli(0.5, 3.0), Err(Error::InvalidModuli { .. })));
        assert!(make_moduli(f64::NAN, 3.0).is_err());
    }

    #[test]
    fn origin_rejected() {
        assert!(matches!(AmbientPoint::real(0.0, 0.0), Err(Error::Origin)));
    }

    #[test]
    fn phi_examples() {
        let asym = make_moduli(2.0, 4.0).unwrap();
        assert_eq!(solve_phi(&asym, &AmbientPoint::real(1.0, 0.0).unwrap()).unwrap(), 1.0);

        let round = HopfModuli::round();
        let p = AmbientPoint::new(Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5)).unwrap();
        let r2 = p.z1.norm_sqr() + p.z2.norm_sqr();
        assert!(rel(solve_phi(&round, &p).unwrap(), r2) < 1e-14);

        // y = Φ^{-2/3} solves y + y² = 1
        let phi = solve_phi(&asym, &AmbientPoint::real(1.0, 1.0).unwrap()).unwrap();
        let expected = golden().powf(-1.5);
        assert!(rel(phi, expected) < 1e-14);
        assert!((phi - 2.0581710).abs() < 1e-7);
    }

    #[test]
    fn phi_matches_bisection_oracle() {
        let m = make_moduli(2.0, 4.0).unwrap();
        let p = AmbientPoint::real(1.0, 1.0).unwrap();
        let f = |s: f64| s.powf(-2.0 * m.k1) + s.powf(-2.0 * m.k2) - 1.0;
        let (mut lo, mut hi) = (1.0, 4.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(rel(solve_phi(&m, &p).unwrap(), 0.5 * (lo + hi)) < 1e-14);
    }

    #[test]
    fn z_examples() {
        let m = make_moduli(2.0, 4.0).unwrap();
        let z = |x1, x2| z_function(&m, &AmbientPoint::real(x1, x2).unwrap()).unwrap();
        assert!((z(1.0, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((z(0.0, 1.0) - 4.0 / 3.0).abs() < 1e-15);
        let expected = 2.0 / 3.0 * (2.0 - golden());
        assert!((z(1.0, 1.0) - expected).abs() < 1e-14);
        assert!((z(1.0, 1.0) - 0.9213107).abs() < 1e-7);
    }

    #[test]
    fn chart_examples() {
        let asym = make_moduli(2.0, 4.0).unwrap();
        let rc = reduced_from_ambient(&asym, &AmbientPoint::real(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(rc, ReducedCoord { u: 0.0, sigma: 1.0 });

        let rc = reduced_from_ambient(&asym, &AmbientPoint::real(1.0, 1.0).unwrap()).unwrap();
        assert!((rc.u - 0.7218177).abs() < 1e-7);
        assert!((rc.sigma - golden()).abs() < 1e-14);

        let round = HopfModuli::round();
        let rc = reduced_from_ambient(&round, &AmbientPoint::real(1.0, 1.0).unwrap()).unwrap();
        assert!((rc.u - 2f64.ln()).abs() < 1e-15);
        assert!((rc.sigma - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inverse_chart_examples() {
        let asym = make_moduli(2.0, 4.0).unwrap();
        let p = ambient_from_reduced(&asym, &ReducedCoord { u: 0.0, sigma: 1.0 });
        assert_eq!((p.z1.re, p.z2.re), (1.0, 0.0));

        let round = HopfModuli::round();
        let p = ambient_from_reduced(&round, &ReducedCoord { u: 0.0, sigma: 0.5 });
        assert!((p.z1.re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((p.z2.re - 0.5f64.sqrt()).abs() < 1e-15);

        let rc = ReducedCoord { u: golden().powf(-1.5).ln(), sigma: golden() };
        let p = ambient_from_reduced(&asym, &rc);
        assert!((p.z1.re - 1.0).abs() < 1e-14);
        assert!((p.z2.re - 1.0).abs() < 1e-14);
        assert!(rel(solve_phi(&asym, &p).unwrap(), rc.u.exp()) < 1e-12);
    }

    #[test]
    fn deck_examples() {
        let asym = make_moduli(2.0, 4.0).unwrap();
        let p = AmbientPoint::real(1.0, 0.0).unwrap();
        let q = deck_scale(&asym, &p);
        assert_eq!((q.z1.re, q.z2.re), (2.0, 0.0));
        assert!(rel(solve_phi(&asym, &q).unwrap(), 8.0) < 1e-14);

        let round = HopfModuli::round();
        let q = deck_scale(&round, &AmbientPoint::real(1.0, 1.0).unwrap());
        assert!(rel(solve_phi(&round, &q).unwrap(), 8.0) < 1e-14);

        let p = AmbientPoint::real(1.0, 1.0).unwrap();
        let z0 = z_function(&asym, &p).unwrap();
        let z1 = z_function(&asym, &deck_scale(&asym, &p)).unwrap();
        assert!((z0 - z1).abs() < 1e-12);
    }

    #[test]
    fn snap_endpoints() {
        assert_eq!(snap_sigma(1.0 - 1e-16), 1.0);
        assert_eq!(snap_sigma(-1e-17), 0.0);
        assert_eq!(snap_sigma(0.3), 0.3);
    }
}
