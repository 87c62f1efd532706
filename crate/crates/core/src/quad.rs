//! Scalar quadrature and maximization used by oracles and diagnostics.

fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson_step(f, a, fa, m, fm);
    let (rm, frm, right) = simpson_step(f, m, fm, b, fb);
    let delta = left + right - whole;
    // below roundoff of the local estimate further splitting cannot help
    let floor = 4.0 * f64::EPSILON * (left + right).abs();
    if depth == 0 || delta.abs() <= (15.0 * tol).max(floor) {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let f: &dyn Fn(f64) -> f64 = &f;
    // Pre-split so narrow features are not missed by the first coarse estimate.
    let pieces = 16;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == pieces { b } else { lo + h };
            let (flo, fhi) = (f(lo), f(hi));
            let (m, fm, whole) = simpson_step(f, lo, flo, hi, fhi);
            simpson_rec(f, lo, flo, hi, fhi, m, fm, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// `∫_a^∞ f` for integrands decaying like a Gaussian or a power `t^{-p}`,
/// `p > 1`, summed over doubling chunks until three in a row fall below `tol`.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    let mut width = 1.0;
    let mut quiet = 0;
    for _ in 0..2000 {
        let piece = adaptive_simpson(&f, lo, lo + width, tol);
        total += piece;
        quiet = if piece.abs() < tol { quiet + 1 } else { 0 };
        if quiet >= 3 {
            break;
        }
        lo += width;
        width *= 1.25;
    }
    total
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomials_and_gaussian() {
        assert!((adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12) - 4.0).abs() < 1e-12);
        let g = adaptive_simpson(|x: f64| (-x * x).exp(), 0.0, 10.0, 1e-13);
        assert!((g - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
        let tail = integrate_to_infinity(|x: f64| (-x * x).exp(), 0.0, 1e-13);
        assert!((tail - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-11);
        let power = integrate_to_infinity(|t: f64| (1.0 + t).powf(-1.25), 0.0, 1e-12);
        assert!((power - 4.0).abs() < 1e-6, "{power}");
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-15);
    }
}
