//! Locale-free float formatting shared by every CSV and JSON writer.

/// 17 significant digits in scientific notation, enough to round-trip any
/// `f64`; non-finite values print as `inf`, `-inf` and `nan`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// A CSV cell for an optional value; `None` prints empty.
pub fn sci_opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [std::f64::consts::LN_2, 1e-300, -3.5, 0.1 + 0.2, f64::MIN_POSITIVE] {
            assert_eq!(sci(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(sci(1.0), "1.0000000000000000e0");
        assert_eq!(sci(f64::NEG_INFINITY), "-inf");
        assert_eq!(sci_opt(None), "");
    }
}
