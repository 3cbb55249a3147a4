//! Number formatting shared by CSV and pretty output.

/// Formats `x` with `digits` significant digits, trimming trailing zeros
/// (the behaviour of C's `%.{digits}g` for ordinary magnitudes).
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        return format!("{}e{}", trim_zeros(mantissa), e);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Quotes a CSV field when it contains a delimiter, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
