//! Number formatting shared by the CSV and JSON writers.

/// `%.{digits}g`-style formatting: shortest of fixed or scientific notation
/// with `digits` significant digits and trailing zeros removed.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig(0.0, 12), "0");
        assert_eq!(sig(1.0, 12), "1");
        assert_eq!(sig(-2.5, 12), "-2.5");
        assert_eq!(sig(std::f64::consts::PI, 12), "3.14159265359");
        assert_eq!(sig(1e-7, 12), "1e-07");
        assert_eq!(sig(1.25e-3, 12), "0.00125");
        assert_eq!(sig(123456789012345.0, 12), "1.23456789012e+14");
        assert_eq!(sig(99999.99999999999, 12), "100000");
    }
}
