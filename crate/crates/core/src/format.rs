//! Fixed float formatting shared by reports and the CLI.

use num_complex::Complex64;

/// 17 significant digits in scientific notation; round-trips exactly.
pub fn fmt17(x: f64) -> String {
    // -0 prints as 0 so that outputs stay byte-stable
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn fmt_complex(z: Complex64) -> String {
    format!("{} {}", fmt17(z.re), fmt17(z.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for x in [
            0.1,
            -1.0 / 3.0,
            1e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            0.3 * 3.0,
        ] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt17(-0.0), fmt17(0.0));
    }
}
