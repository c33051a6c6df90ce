//! Log-gamma for positive real arguments.
//!
//! Stirling series on `z >= 10`, upward recursion below that. The series
//! remainder (`stirling_correction`) is exposed separately so that Γ ratios at
//! huge arguments can be formed without subtracting large logs.

use std::f64::consts::PI;

const SERIES_MIN: f64 = 10.0;

/// `B_{2j} / (2j (2j - 1))` for j = 1..=8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn series(z: f64) -> f64 {
    let w = 1.0 / (z * z);
    let mut acc = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        acc = acc * w + c;
    }
    acc / z
}

fn leading(z: f64) -> f64 {
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln()
}

/// `ln Γ(z)` for `z > 0`. Returns NaN for non-positive or NaN input.
pub fn ln_gamma(z: f64) -> f64 {
    if !(z > 0.0) {
        return f64::NAN;
    }
    if z.is_infinite() {
        return f64::INFINITY;
    }
    if z >= SERIES_MIN {
        return leading(z) + series(z);
    }
    let mut shifted = z;
    let mut prod = 1.0;
    while shifted < SERIES_MIN {
        prod *= shifted;
        shifted += 1.0;
    }
    leading(shifted) + series(shifted) - prod.ln()
}

/// `μ(z) = ln Γ(z) - [(z - 1/2) ln z - z + ln(2π)/2]`.
pub fn stirling_correction(z: f64) -> f64 {
    if z >= SERIES_MIN {
        series(z)
    } else {
        ln_gamma(z) - leading(z)
    }
}

/// `ln Γ(a) - ln Γ(b)`.
pub fn ln_gamma_ratio(a: f64, b: f64) -> f64 {
    ln_gamma(a) - ln_gamma(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integer_and_half_integer_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert_relative_eq!(ln_gamma(5.0), 24f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(0.5), PI.sqrt().ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(1.5), (PI.sqrt() / 2.0).ln(), max_relative = 1e-13);
        let ln_fact_20: f64 = (1..=20).map(|i| (i as f64).ln()).sum();
        assert_relative_eq!(ln_gamma(21.0), ln_fact_20, max_relative = 1e-15);
    }

    #[test]
    fn agrees_with_lanczos_on_wide_range() {
        // statrs uses the Lanczos approximation: an independent route
        let mut z = 0.5;
        while z < 1e8 {
            let ours = ln_gamma(z);
            let theirs = statrs::function::gamma::ln_gamma(z);
            let scale = ours.abs().max(1.0);
            assert!((ours - theirs).abs() <= 1e-13 * scale, "z={z}: {ours} vs {theirs}");
            z *= 1.37;
        }
    }

    #[test]
    fn recursion_identity() {
        for &z in &[0.01, 0.3, 0.999, 3.7, 9.99, 10.0, 123.456] {
            assert_relative_eq!(
                ln_gamma(z + 1.0) - ln_gamma(z),
                z.ln(),
                epsilon = 2e-14,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn correction_is_small_and_consistent() {
        assert_relative_eq!(stirling_correction(1e6), 1.0 / 12e6, max_relative = 1e-10);
        for &z in &[2.0, 9.5, 10.5, 1e3] {
            assert_relative_eq!(stirling_correction(z) + leading(z), ln_gamma(z), max_relative = 1e-14);
        }
    }

    #[test]
    fn rejects_non_positive() {
        assert!(ln_gamma(0.0).is_nan());
        assert!(ln_gamma(-1.5).is_nan());
    }
}
