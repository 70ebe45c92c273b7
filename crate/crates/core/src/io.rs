// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Bit-stable numeric text formatting for CSV exports.

/// Significant digits written for every CSV number.
pub const CSV_SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` like C's `%.12g`: 12 significant digits, trailing zeros
/// trimmed, scientific notation outside `1e-4 ≤ |x| < 1e12`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let p = CSV_SIGNIFICANT_DIGITS;
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
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
    use super::*;

    #[test]
    fn general_format() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(4.8), "4.8");
        assert_eq!(fmt_sig(-0.006), "-0.006");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(2.5e-7), "2.5e-07");
        assert_eq!(fmt_sig(1e15), "1e+15");
        assert_eq!(fmt_sig(999999999999.9), "1e+12");
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265359");
    }
}
