//! Number formatting for reports and CSV output.

/// `%.Ng`-style formatting: `digits` significant digits, trailing zeros
/// removed, scientific notation outside `[1e-5, 10^digits)`.
pub fn sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{exp}", trim(mantissa));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim(&format!("{v:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn join(values: &[f64]) -> String {
    values.iter().map(|&v| sig(v, 9)).collect::<Vec<_>>().join(";")
}
