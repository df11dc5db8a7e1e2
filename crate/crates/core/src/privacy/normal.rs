//! Standard normal CDF and its logarithm, evaluated through the
//! complementary error function so that both tails keep full relative
//! precision.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

/// Below this point `erfc` output approaches the subnormal range and the
/// asymptotic expansion of log Φ takes over.
const LOG_TAIL_SWITCH: f64 = -37.0;

/// Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        0.5 * erfc(-x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * erfc(x * FRAC_1_SQRT_2)
    }
}

/// Upper tail Q(x) = 1 − Φ(x) = Φ(−x).
pub fn std_normal_sf(x: f64) -> f64 {
    std_normal_cdf(-x)
}

const GL_NODES: [f64; 4] = [0.18343464249564978, 0.525532409916329, 0.7966664774136267, 0.9602898564975362];
const GL_WEIGHTS: [f64; 4] = [0.36268378337836177, 0.31370664587788705, 0.22238103445337434, 0.10122853629037669];

/// P(lo < Z ≤ hi) for a standard normal Z.
///
/// Narrow intervals are integrated directly with 8-point Gauss-Legendre,
/// which keeps full relative precision where Φ(hi) and Φ(lo) agree to many
/// digits.
pub fn std_normal_interval(lo: f64, hi: f64) -> f64 {
    if !(lo < hi) {
        return 0.0;
    }
    let width = hi - lo;
    if width <= 0.5 {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * width);
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let sum: f64 = GL_NODES
            .iter()
            .zip(GL_WEIGHTS)
            .map(|(&t, w)| w * (pdf(mid - half * t) + pdf(mid + half * t)))
            .sum();
        return half * sum;
    }
    if hi <= 0.0 {
        std_normal_cdf(hi) - std_normal_cdf(lo)
    } else if lo >= 0.0 {
        std_normal_sf(lo) - std_normal_sf(hi)
    } else {
        1.0 - std_normal_cdf(lo) - std_normal_sf(hi)
    }
}

/// log Φ(x), finite for every finite x.
///
/// For x ≥ 0 this is `ln_1p(−Q(x))`, which keeps powers such as Φ(Δ/σ)^m
/// accurate when Q(x) is far below machine epsilon. For very negative x the
/// Mills-ratio asymptotic series is used.
pub fn log_std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if x >= 0.0 {
        (-std_normal_sf(x)).ln_1p()
    } else if x >= LOG_TAIL_SWITCH {
        (0.5 * erfc(-x * FRAC_1_SQRT_2)).ln()
    } else {
        let z2 = 1.0 / (x * x);
        // 1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - 945/x^10
        let series = 1.0 + z2 * (-1.0 + z2 * (3.0 + z2 * (-15.0 + z2 * (105.0 - 945.0 * z2))));
        -0.5 * x * x - (-x).ln() - 0.5 * (2.0 * PI).ln() + series.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_probabilities() {
        // mpmath: ncdf(1) - ncdf(-1), ncdf(0.3) - ncdf(0.1), ncdf(1e-20) - ncdf(-1e-20)
        assert!((std_normal_interval(-1.0, 1.0) - 0.6826894921370859).abs() < 1e-15);
        let p = std_normal_interval(0.1, 0.3);
        assert!(((p - 0.07808358491192366) / p).abs() < 1e-14);
        let tiny = std_normal_interval(-1e-20, 1e-20);
        assert!(((tiny - 7.978845608028654e-21) / tiny).abs() < 1e-14);
        assert_eq!(std_normal_interval(1.0, 1.0), 0.0);
        let far = std_normal_interval(-9.0, -8.0);
        assert!(((far - 6.21983198586583e-16) / far).abs() < 1e-12);
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn cdf_known_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(40.0) - 1.0).abs() <= 1e-15);
        // mpmath, 50 digits
        assert!(rel(std_normal_cdf(1.0), 0.841_344_746_068_542_9) <= 1e-12);
        assert!(rel(std_normal_cdf(-3.0), 0.001_349_898_031_630_094_5) <= 1e-12);
        assert!(rel(std_normal_cdf(-8.0), 6.220_960_574_271_784e-16) <= 1e-12);
        assert!(rel(std_normal_cdf(2.5), 0.993_790_334_674_223_9) <= 1e-12);
    }

    #[test]
    fn symmetry_on_grid() {
        let mut x = -8.0;
        while x <= 8.0 {
            let s = std_normal_cdf(x) + std_normal_cdf(-x);
            assert!((s - 1.0).abs() < 1e-15, "x={x}");
            x += 0.125;
        }
    }

    #[test]
    fn log_cdf_tails() {
        // mpmath references
        assert!(rel(log_std_normal_cdf(-38.5), -745.695_270_290_411_1) < 1e-12);
        assert!(rel(log_std_normal_cdf(-40.0), -804.608_442_013_753_8) < 1e-12);
        assert!(rel(log_std_normal_cdf(-100.0), -5005.524_208_694_205) < 1e-12);
        assert!(rel(log_std_normal_cdf(10.0), -7.619_853_024_160_526e-24) < 1e-9);
        assert!(rel(log_std_normal_cdf(1.0), 0.841_344_746_068_542_9f64.ln()) < 1e-13);
    }

    #[test]
    fn log_cdf_is_continuous_at_switch() {
        let a = log_std_normal_cdf(LOG_TAIL_SWITCH);
        let b = log_std_normal_cdf(LOG_TAIL_SWITCH - 1e-9);
        assert!(rel(a, b) < 1e-9);
    }
}
