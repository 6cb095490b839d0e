//! Bessel function of the first kind, order zero.

/// J0(x) by the ascending power series. Accurate to ~1e-13 relative for
/// |x| <= 12, which covers every drive amplitude this crate produces.
pub fn j0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=40 {
        term *= -q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

/// First positive zero of J0, located by bisection.
pub fn j0_first_zero() -> f64 {
    let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
    debug_assert!(j0(lo) > 0.0 && j0(hi) < 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent evaluation: J0(x) = (1/pi) * integral_0^pi cos(x sin t) dt,
    /// by trapezoid rule on the periodic integrand (spectrally accurate).
    fn j0_quadrature(x: f64) -> f64 {
        let n = 512;
        let mut sum = 0.0;
        for j in 0..n {
            let t = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
            sum += (x * t.sin()).cos();
        }
        sum / n as f64
    }

    #[test]
    fn series_matches_quadrature() {
        for &x in &[0.0, 0.3, 1.0, 2.404826, 3.7, 5.52, 8.0, 11.5] {
            let a = j0(x);
            let b = j0_quadrature(x);
            assert!((a - b).abs() < 1e-12, "x={x}: series {a} vs quadrature {b}");
        }
    }

    #[test]
    fn first_zero_location() {
        let z = j0_first_zero();
        assert!((z - 2.404825557695773).abs() < 1e-10);
        assert!(j0(z).abs() < 1e-10);
        assert!(j0_quadrature(z).abs() < 1e-10);
    }
}
