//! Reference computations that avoid the library's own code paths.
#![allow(dead_code)]

/// Central first difference.
pub fn diff1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central second difference.
pub fn diff2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// `z^c` straight from `exp(c ln z)` in complex arithmetic.
pub fn psi_ref(z: f64, x: f64, y: f64) -> (f64, f64) {
    let w = num_complex::Complex64::new(x, y) * z.ln();
    let e = w.exp();
    (e.re, e.im)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

fn adapt(
    f: &dyn Fn(f64) -> f64,
    (a, fa): (f64, f64),
    (b, fb): (f64, f64),
    (m, fm): (f64, f64),
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, (a, fa), (m, fm), (lm, flm), left, 0.5 * tol, depth - 1)
        + adapt(f, (m, fm), (b, fb), (rm, frm), right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let f: &dyn Fn(f64) -> f64 = &f;
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    adapt(f, (a, fa), (b, fb), (m, fm), whole, tol, 50)
}

/// Integral over `[0, inf)` through `t = tau / (1 - tau)`.
pub fn half_line(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    adaptive_simpson(
        |tau| {
            if tau >= 1.0 {
                0.0
            } else {
                let one = 1.0 - tau;
                f(tau / one) / (one * one)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Small deterministic generator so oracle cases do not depend on the library's RNG.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let unit = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * unit
    }
}
