//! Byte-stable JSON output: sorted keys, floats at 17 significant digits.

use std::io;

use serde_json::ser::Formatter;

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros dropped,
/// exponent notation outside `[1e-5, 1e17)`.
pub fn format_g17(x: f64) -> String {
    format_g(x, 17)
}

/// C's `%.{precision}g`.
pub fn format_g(x: f64, precision: usize) -> String {
    let precision = precision.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", precision - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };

    if exp < -4 || exp >= precision as i32 {
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        let esign = if exp < 0 { '-' } else { '+' };
        if tail.is_empty() {
            format!("{sign}{head}e{esign}{:02}", exp.abs())
        } else {
            format!("{sign}{head}.{tail}e{esign}{:02}", exp.abs())
        }
    } else if exp >= 0 {
        let split = exp as usize + 1;
        let (int, frac) = digits.split_at(split);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        let frac = digits.trim_end_matches('0');
        format!("{sign}0.{zeros}{frac}")
    }
}

struct G17;

impl Formatter for G17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_g17(value).as_bytes())
    }
}

/// Serializes compactly with the 17-digit float format and a trailing newline.
pub fn to_canonical_string(v: &serde_json::Value) -> String {
    use serde::Serialize;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17);
    v.serialize(&mut ser).expect("in-memory serialization");
    let mut s = String::from_utf8(out).expect("utf-8 json");
    s.push('\n');
    s
}

/// A JSON number for `x`, or `null` when not finite.
pub fn number(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        assert_eq!(format_g17(2.0), "2");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(-1.5), "-1.5");
        assert_eq!(format_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_g17(1e20), "1e+20");
        assert_eq!(format_g17(0.000123), "0.00012300000000000001");
        assert_eq!(format_g17(123456.0), "123456");
        assert_eq!(format_g17(-0.0), "0");
    }

    #[test]
    fn g6_for_labels() {
        assert_eq!(format_g(0.25, 6), "0.25");
        assert_eq!(format_g(2.0 / 3.0, 6), "0.666667");
        assert_eq!(format_g(1234567.0, 6), "1.23457e+06");
    }

    #[test]
    fn g17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 2.0 * (1.0 - 2f64.powi(-30)), 1e-300, 6.02214076e23, -7.25] {
            let s = format_g17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn canonical_sorts_keys() {
        let v = serde_json::json!({"b": 1.5, "a": [0.1]});
        assert_eq!(to_canonical_string(&v), "{\"a\":[0.10000000000000001],\"b\":1.5}\n");
    }
}
