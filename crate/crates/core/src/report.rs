//! Number formatting shared by the JSON and CSV writers.
//!
//! Every real written to disk is rounded to 12 significant digits and printed
//! with a `.` decimal separator, independent of locale.

use serde::Serializer;

/// Rounds to 12 significant digits. Non-finite values and zero pass through.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Text form of [`round_sig12`]: plain decimal for moderate magnitudes,
/// exponent notation otherwise.
pub fn fmt_sig12(x: f64) -> String {
    let r = round_sig12(x);
    let mag = r.abs();
    if r == 0.0 || (1e-5..1e15).contains(&mag) || !r.is_finite() {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// `serialize_with` adapter for `f64` fields. Non-finite values become `null`.
pub fn sig12<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(round_sig12(*x))
    } else {
        s.serialize_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round_sig12(1.325_002_747_357_864_5), 1.325_002_747_36);
        assert_eq!(
            round_sig12(-0.000_123_456_789_012_345),
            -0.000_123_456_789_012
        );
        assert_eq!(round_sig12(0.0), 0.0);
        assert!(round_sig12(f64::NAN).is_nan());
    }

    #[test]
    fn text_forms() {
        assert_eq!(fmt_sig12(1.0), "1");
        assert_eq!(fmt_sig12(0.070_650_824_853_164_4), "0.0706508248532");
        assert_eq!(fmt_sig12(2.5e-9), "2.5e-9");
        assert_eq!(fmt_sig12(-3.0), "-3");
    }
}
