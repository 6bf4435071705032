//! Central finite differences in the real coordinates `z_i = a_i + i b_i`.
//!
//! These are the independent oracles for the closed-form derivatives in
//! [`crate::tensors`]; nothing here knows about Φ.

use num_complex::Complex64;

use crate::geometry::AmbientPoint;
use crate::hermitian::{ComplexGradient2, Hermitian2};

/// Real coordinate `k` of `p`, ordered `(a1, b1, a2, b2)`, shifted by `h`.
fn shifted(p: &AmbientPoint, k: usize, h: f64) -> AmbientPoint {
    let mut q = *p;
    match k {
        0 => q.z1.re += h,
        1 => q.z1.im += h,
        2 => q.z2.re += h,
        3 => q.z2.im += h,
        _ => unreachable!(),
    }
    q
}

fn shifted2(p: &AmbientPoint, k: usize, hk: f64, l: usize, hl: f64) -> AmbientPoint {
    shifted(&shifted(p, k, hk), l, hl)
}

/// Real gradient `∂f/∂(a1, b1, a2, b2)`, second order in `h`.
pub fn fd_real_gradient<F>(f: &F, p: &AmbientPoint, h: f64) -> [Complex64; 4]
where
    F: Fn(&AmbientPoint) -> Complex64,
{
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = (f(&shifted(p, k, h)) - f(&shifted(p, k, -h))) / (2.0 * h);
    }
    out
}

/// Real Hessian `∂²f/∂x_k∂x_l` over `(a1, b1, a2, b2)`, second order in `h`.
#[allow(clippy::needless_range_loop)]
pub fn fd_real_hessian<F>(f: &F, p: &AmbientPoint, h: f64) -> [[Complex64; 4]; 4]
where
    F: Fn(&AmbientPoint) -> Complex64,
{
    let f0 = f(p);
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for k in 0..4 {
        let fp = f(&shifted(p, k, h));
        let fm = f(&shifted(p, k, -h));
        out[k][k] = ((fp - f0) + (fm - f0)) / (h * h);
        for l in (k + 1)..4 {
            let pp = f(&shifted2(p, k, h, l, h));
            let pm = f(&shifted2(p, k, h, l, -h));
            let mp = f(&shifted2(p, k, -h, l, h));
            let mm = f(&shifted2(p, k, -h, l, -h));
            let v = ((pp - pm) - (mp - mm)) / (4.0 * h * h);
            out[k][l] = v;
            out[l][k] = v;
        }
    }
    out
}

/// `∂_{z_i} f = ½(∂_{a_i} - i ∂_{b_i}) f`.
pub fn fd_complex_derivative<F>(f: &F, p: &AmbientPoint, h: f64) -> ComplexGradient2
where
    F: Fn(&AmbientPoint) -> Complex64,
{
    let g = fd_real_gradient(f, p, h);
    let i = Complex64::new(0.0, 1.0);
    ComplexGradient2::new(0.5 * (g[0] - i * g[1]), 0.5 * (g[2] - i * g[3]))
}

/// All mixed derivatives `out[i][j] = ∂_{z_i} ∂_{z̄_j} f` of a possibly
/// complex-valued `f`.
pub fn fd_mixed<F>(f: &F, p: &AmbientPoint, h: f64) -> [[Complex64; 2]; 2]
where
    F: Fn(&AmbientPoint) -> Complex64,
{
    mixed_from_real(&fd_real_hessian(f, p, h))
}

#[allow(clippy::needless_range_loop)]
fn mixed_from_real(hr: &[[Complex64; 4]; 4]) -> [[Complex64; 2]; 2] {
    let i = Complex64::new(0.0, 1.0);
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let (ai, bi, aj, bj) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
            out[a][b] = 0.25 * (hr[ai][aj] + hr[bi][bj] + i * (hr[ai][bj] - hr[bi][aj]));
        }
    }
    out
}

/// Complex Hessian `∂_i ∂_j̄ f` of a real function.
pub fn fd_complex_hessian<F>(f: &F, p: &AmbientPoint, h: f64) -> Hermitian2
where
    F: Fn(&AmbientPoint) -> f64,
{
    let g = |q: &AmbientPoint| Complex64::new(f(q), 0.0);
    let m = fd_mixed(&g, p, h);
    Hermitian2::new(m[0][0].re, m[1][1].re, m[0][1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn derivative_of_abs_z1_squared() {
        let f = |q: &AmbientPoint| c(q.z1.norm_sqr(), 0.0);
        let p = AmbientPoint::real(1.0, 1.0).unwrap();
        let d = fd_complex_derivative(&f, &p, 1e-3);
        assert!((d.d1 - c(1.0, 0.0)).norm() < 1e-9);
        assert!(d.d2.norm() < 1e-12);
    }

    #[test]
    fn derivative_of_holomorphic_and_antiholomorphic() {
        // ∂_{z1} (z1² z̄2) = 2 z1 z̄2, ∂_{z2} (z1² z̄2) = 0
        let f = |q: &AmbientPoint| q.z1 * q.z1 * q.z2.conj();
        let p = AmbientPoint::new(c(0.4, -0.3), c(1.2, 0.8)).unwrap();
        let d = fd_complex_derivative(&f, &p, 1e-4);
        assert!((d.d1 - 2.0 * p.z1 * p.z2.conj()).norm() < 1e-7);
        assert!(d.d2.norm() < 1e-7);
    }

    #[test]
    fn hessian_of_r_squared_is_identity() {
        let f = |q: &AmbientPoint| q.z1.norm_sqr() + q.z2.norm_sqr();
        let p = AmbientPoint::new(c(0.4, -0.3), c(1.2, 0.8)).unwrap();
        let h = fd_complex_hessian(&f, &p, 1e-3);
        assert!(h.max_abs_diff(&Hermitian2::IDENTITY) < 1e-8);
    }

    #[test]
    fn mixed_of_cross_term() {
        // f = z̄1 z2 has ∂_2 ∂_1̄ f = 1 and nothing else
        let f = |q: &AmbientPoint| q.z1.conj() * q.z2;
        let p = AmbientPoint::new(c(0.4, -0.3), c(1.2, 0.8)).unwrap();
        let m = fd_mixed(&f, &p, 1e-3);
        assert!((m[1][0] - c(1.0, 0.0)).norm() < 1e-8);
        assert!(m[0][1].norm() < 1e-8 && m[0][0].norm() < 1e-8 && m[1][1].norm() < 1e-8);
    }

    #[test]
    fn second_order_convergence() {
        let f = |q: &AmbientPoint| c((q.z1.re * q.z2.im).sin() + q.z2.re.exp(), 0.0);
        let p = AmbientPoint::new(c(0.4, -0.3), c(0.2, 0.8)).unwrap();
        // exact ∂_{z1} = ½ (∂_{a1} - i ∂_{b1}) = ½ b2 cos(a1 b2)
        let exact = 0.5 * p.z2.im * (p.z1.re * p.z2.im).cos();
        let e1 = (fd_complex_derivative(&f, &p, 1e-2).d1 - c(exact, 0.0)).norm();
        let e2 = (fd_complex_derivative(&f, &p, 5e-3).d1 - c(exact, 0.0)).norm();
        let order = (e1 / e2).log2();
        assert!(order > 1.8, "order {order}");
    }
}
