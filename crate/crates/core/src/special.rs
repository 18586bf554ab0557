//! Standard normal density, tail and Mills ratio.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `1/sqrt(2 pi)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `sqrt(2/pi)`, the mean of `|z|`.
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

// Above this the continued fraction converges in a handful of terms and the
// erfc route would underflow well before the ratio itself does.
const MILLS_CF_CUTOVER: f64 = 8.0;

pub fn normal_pdf(t: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * t * t).exp()
}

/// `Pr(z >= t)`.
pub fn normal_sf(t: f64) -> f64 {
    0.5 * erfc(t * FRAC_1_SQRT_2)
}

/// `Pr(z <= t)`.
pub fn normal_cdf(t: f64) -> f64 {
    normal_sf(-t)
}

/// Mills ratio `Pr(z >= t) / phi(t)`, accurate for every finite `t` that
/// does not overflow `phi(t)` in the denominator (`t > -37`).
pub fn mills_ratio(t: f64) -> f64 {
    if t >= MILLS_CF_CUTOVER {
        mills_continued_fraction(t)
    } else {
        normal_sf(t) / normal_pdf(t)
    }
}

/// `R(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...))))`, modified Lentz.
fn mills_continued_fraction(t: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = t;
    let mut c = t;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = t + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = t + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// `ln Pr(z >= t)`, finite for large `t`.
pub fn ln_normal_sf(t: f64) -> f64 {
    if t >= MILLS_CF_CUTOVER {
        mills_continued_fraction(t).ln() - 0.5 * t * t - 0.5 * (2.0 * PI).ln()
    } else {
        normal_sf(t).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constants() {
        assert_relative_eq!(INV_SQRT_2PI, 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(SQRT_2_OVER_PI, (2.0 / PI).sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn tail_values() {
        assert_relative_eq!(normal_sf(0.0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(normal_sf(2.0), 0.022_750_131_948_179_2, max_relative = 1e-12);
        assert_relative_eq!(normal_cdf(1.0), 0.841_344_746_068_542_9, max_relative = 1e-12);
        assert_relative_eq!(normal_sf(-1.0) + normal_sf(1.0), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn continued_fraction_matches_erfc_at_cutover() {
        for t in [6.0, 7.0, 8.0, 9.0, 12.0, 20.0] {
            let direct = normal_sf(t) / normal_pdf(t);
            assert_relative_eq!(mills_continued_fraction(t), direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn mills_asymptotics() {
        // R(t) ~ 1/t - 1/t^3 + 3/t^5
        let t: f64 = 1000.0;
        let series = 1.0 / t - 1.0 / t.powi(3) + 3.0 / t.powi(5);
        assert_relative_eq!(mills_ratio(t), series, max_relative = 1e-14);
        assert_relative_eq!(mills_ratio(0.0), (PI / 2.0).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn log_tail_is_continuous_and_finite() {
        let below = ln_normal_sf(MILLS_CF_CUTOVER - 1e-9);
        let above = ln_normal_sf(MILLS_CF_CUTOVER);
        assert!((below - above).abs() < 1e-8);
        assert!(ln_normal_sf(100.0).is_finite());
        assert!(ln_normal_sf(100.0) < -5000.0);
    }
}
