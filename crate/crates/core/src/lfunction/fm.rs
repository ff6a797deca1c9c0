//! The kernels F_m(x) = (1/2πi)∫ Γ(s+2)Γ(s) x^{−s} s^{−m} ds used to test the functional
//! equation.
//!
//! F₀(x) = 2x·K₂(2√x) and F₁(x) = z·K₁(z) + 2K₀(z) with z = 2√x are closed forms;
//! F₂(x) = 2K₀(z) + 4∫_z^∞ K₀(u)/u du needs one quadrature. The general recursion
//! F_m(x) = ∫_x^∞ F_{m−1}(t)/t dt is available for any m and is used to cross-check.

use crate::error::{CoreError, Result};
use crate::field::Real;

fn c<T: Real>(v: f64) -> T {
    T::from_f64(v).unwrap()
}

/// e^z·K_ν(z) for ν = 0, 1, 2 from K_ν(z) = ∫₀^∞ e^{−z cosh t} cosh(νt) dt by the
/// trapezoidal rule, which converges geometrically for this entire integrand. The step
/// shrinks like 1/√z so the peak (width ~1/√z) stays resolved.
pub fn bessel_k012_scaled<T: Real>(z: T) -> [T; 3] {
    assert!(z > T::zero(), "K_ν needs z > 0");
    let one = T::one();
    let h = c::<T>(0.2).min(c::<T>(0.5) / z.sqrt());
    let cutoff = -T::epsilon().ln() + c(4.0);
    let half = c::<T>(0.5);
    let mut s = [half, half, half];
    let mut k = 1u32;
    loop {
        let t = h * T::from_u32(k).unwrap();
        let e = -z * (t.cosh() - one);
        // cosh(2t) ≤ e^{2t}: stop once even the ν = 2 term is negligible
        if e + c::<T>(2.0) * t < -cutoff {
            break;
        }
        let f = e.exp();
        s[0] = s[0] + f;
        s[1] = s[1] + f * t.cosh();
        s[2] = s[2] + f * (c::<T>(2.0) * t).cosh();
        k += 1;
    }
    [s[0] * h, s[1] * h, s[2] * h]
}

pub fn bessel_k<T: Real>(nu: usize, z: T) -> T {
    bessel_k012_scaled(z)[nu] * (-z).exp()
}

pub fn f0<T: Real>(x: T) -> T {
    let z = c::<T>(2.0) * x.sqrt();
    let k = bessel_k012_scaled(z);
    // 2x·K₂(z), kept in log form so huge z underflows cleanly to 0
    ((c::<T>(2.0) * x).ln() - z).exp() * k[2]
}

pub fn f1<T: Real>(x: T) -> T {
    let z = c::<T>(2.0) * x.sqrt();
    let k = bessel_k012_scaled(z);
    (z * k[1] + c::<T>(2.0) * k[0]) * (-z).exp()
}

// 15-point Kronrod extension of the 7-point Gauss rule
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T) -> (T, T) {
    let mid = (a + b) * c(0.5);
    let half = (b - a) * c(0.5);
    let fc = f(mid);
    let mut kron = fc * c(WGK[7]);
    let mut gauss = fc * c(WG[3]);
    for i in 0..7 {
        let dx = half * c(XGK[i]);
        let pair = f(mid - dx) + f(mid + dx);
        kron = kron + pair * c(WGK[i]);
        if i % 2 == 1 {
            gauss = gauss + pair * c(WG[i / 2]);
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod quadrature on a finite interval with absolute tolerance.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { abs_tol: 1e-16, max_depth: 40 }
    }
}

impl Quadrature {
    pub fn integrate<T: Real>(&self, f: &dyn Fn(T) -> T, a: T, b: T) -> Result<T> {
        let mut total = T::zero();
        let mut worst = T::zero();
        let mut failed = false;
        let mut stack = vec![(a, b, 0u32)];
        let tol_per_len = c::<T>(self.abs_tol) / (b - a).abs().max(T::min_positive_value());
        while let Some((lo, hi, depth)) = stack.pop() {
            let (v, err) = gk15(f, lo, hi);
            let allowed = tol_per_len * (hi - lo) + T::epsilon() * v.abs();
            if err <= allowed || depth >= self.max_depth {
                if err > allowed {
                    failed = true;
                    worst = worst.max(err);
                }
                total = total + v;
            } else {
                let m = (lo + hi) * c(0.5);
                stack.push((lo, m, depth + 1));
                stack.push((m, hi, depth + 1));
            }
        }
        if failed {
            return Err(CoreError::Quadrature { achieved: worst.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(total)
    }
}

/// Evaluates F_m to a relative accuracy of about 10⁻¹³ for 0 < x ≤ 10³.
#[derive(Clone, Debug, Default)]
pub struct FmEvaluator {
    pub quad: Quadrature,
}

impl FmEvaluator {
    pub fn eval(&self, m: u32, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(CoreError::Invalid(format!("F_m needs x > 0, got {x}")));
        }
        match m {
            0 => Ok(f0(x)),
            1 => Ok(f1(x)),
            2 => self.f2(x),
            _ => self.recursive(m, x),
        }
    }

    fn f2(&self, x: f64) -> Result<f64> {
        let z = 2.0 * x.sqrt();
        let tail = self.k0_over_u_tail(z)?;
        Ok(2.0 * bessel_k(0, z) + 4.0 * tail)
    }

    /// ∫_z^∞ K₀(u)/u du, on dyadic pieces so the near-logarithmic start is resolved.
    fn k0_over_u_tail(&self, z: f64) -> Result<f64> {
        let g = |u: f64| bessel_k012_scaled(u)[0] * (-u).exp() / u;
        let scale = (-z).exp().max(f64::MIN_POSITIVE);
        let q = Quadrature { abs_tol: self.quad.abs_tol * scale, ..self.quad.clone() };
        let mut total = 0.0;
        let mut lo = z;
        let mut width = z.min(1.0);
        while lo < z + 60.0 {
            total += q.integrate(&g, lo, lo + width)?;
            lo += width;
            width = (2.0 * width).min(4.0);
        }
        Ok(total)
    }

    /// F_m(x) = ∫_x^∞ F_{m−1}(t)/t dt, substituting t = x·e^s.
    pub fn recursive(&self, m: u32, x: f64) -> Result<f64> {
        if m == 0 {
            return Ok(f0(x));
        }
        // F_{m−1}(t) decays like e^{−2√t}: stop once 2√t exceeds 2√x + 60
        let t_end = (x.sqrt() + 30.0).powi(2);
        let s_end = (t_end / x).ln();
        let inner = |s: f64| self.eval_for_recursion(m - 1, x * s.exp());
        let q = Quadrature { abs_tol: self.quad.abs_tol.max(1e-15 * self.eval(m - 1, x)?.abs()), ..self.quad.clone() };
        let mut total = 0.0;
        let mut lo = 0.0;
        let step = 0.5;
        while lo < s_end {
            let hi = (lo + step).min(s_end);
            total += q.integrate(&inner, lo, hi)?;
            lo = hi;
        }
        Ok(total)
    }

    fn eval_for_recursion(&self, m: u32, x: f64) -> f64 {
        match m {
            0 => f0(x),
            1 => f1(x),
            _ => self.eval(m, x).unwrap_or(f64::NAN),
        }
    }
}

pub fn fm_eval(m: u32, x: f64) -> Result<f64> {
    FmEvaluator::default().eval(m, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn bessel_reference_values() {
        assert_relative_eq!(bessel_k(0, 1.0f64), 0.42102443824070834, max_relative = 1e-14);
        assert_relative_eq!(bessel_k(1, 1.0f64), 0.6019072301972346, max_relative = 1e-14);
        assert_relative_eq!(bessel_k(2, 1.0f64), 1.6248388986351774, max_relative = 1e-14);
        assert_relative_eq!(bessel_k(0, 10.0f64), 1.7780062316167652e-05, max_relative = 1e-13);
        assert_relative_eq!(bessel_k(1, 0.01f64), 99.97389411829624, max_relative = 1e-13);
        assert_relative_eq!(bessel_k(2, 60.0f64), 1.461418908109678e-27, max_relative = 1e-12);
    }

    // Lanczos Γ for complex arguments, g = 7, n = 9
    fn gamma(z: Complex64) -> Complex64 {
        const G: [f64; 9] = [
            0.99999999999980993,
            676.5203681218851,
            -1259.1392167224028,
            771.32342877765313,
            -176.61502916214059,
            12.507343278686905,
            -0.13857109526572012,
            9.9843695780195716e-6,
            1.5056327351493116e-7,
        ];
        if z.re < 0.5 {
            let pi = std::f64::consts::PI;
            return pi / ((pi * z).sin() * gamma(1.0 - z));
        }
        let z = z - 1.0;
        let mut a = Complex64::new(G[0], 0.0);
        let t = z + 7.5;
        for (i, g) in G.iter().enumerate().skip(1) {
            a += g / (z + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * a
    }

    /// (1/2π)∫ Γ(r+iy)Γ(r+2+iy) x^{−r−iy} (r+iy)^{−m} dy on the line Re s = r.
    fn contour(m: i32, x: f64, r: f64) -> f64 {
        let h = 0.01;
        let mut sum = Complex64::new(0.0, 0.0);
        let n = 6000;
        for k in -n..=n {
            let s = Complex64::new(r, k as f64 * h);
            sum += gamma(s) * gamma(s + 2.0) * Complex64::new(x, 0.0).powc(-s) * s.powi(-m);
        }
        sum.re * h / (2.0 * std::f64::consts::PI)
    }

    #[test]
    fn f0_matches_contour_integral() {
        for x in [1.0, 0.3, 4.0] {
            let a = contour(0, x, 1.0);
            assert!((a - f0(x)).abs() <= 1e-10 * f0(x).abs().max(1e-3), "x={x}: {a} vs {}", f0(x));
        }
    }

    #[test]
    fn f1_f2_match_contour_integral() {
        for x in [1.0, 2.5] {
            assert_relative_eq!(contour(1, x, 1.0), f1(x), max_relative = 1e-9);
            assert_relative_eq!(contour(2, x, 1.0), fm_eval(2, x).unwrap(), max_relative = 1e-9);
        }
    }

    #[test]
    fn decay_and_small_x() {
        assert!(f0(400.0f64) < 1e-15);
        let mut prev = f0(1.0f64);
        for k in 3..200 {
            let v = f0(k as f64 * 0.5);
            assert!(v < prev);
            prev = v;
        }
        // F₀(0⁺) = Γ(2) = 1
        assert_relative_eq!(f0(1e-10f64), 1.0, max_relative = 1e-6);
        assert!(f0(1e6f64) == 0.0);
    }

    #[test]
    fn defining_ode() {
        let ev = FmEvaluator::default();
        for m in 1..=2u32 {
            for x in [0.2, 2.0, 15.0] {
                let h = 1e-5 * x;
                let d = (ev.eval(m, x + h).unwrap() - ev.eval(m, x - h).unwrap()) / (2.0 * h);
                let want = -ev.eval(m - 1, x).unwrap() / x;
                assert_relative_eq!(d, want, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn recursion_matches_closed_forms() {
        let ev = FmEvaluator::default();
        for x in [0.05, 1.0, 7.0, 120.0, 900.0] {
            assert_relative_eq!(ev.recursive(1, x).unwrap(), f1(x), max_relative = 1e-12);
            assert_relative_eq!(ev.recursive(2, x).unwrap(), ev.eval(2, x).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn generic_over_f32() {
        assert!((f0(1.0f32) - f0(1.0f64) as f32).abs() < 1e-5);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(fm_eval(0, 0.0).is_err());
        assert!(fm_eval(1, -1.0).is_err());
    }
}
