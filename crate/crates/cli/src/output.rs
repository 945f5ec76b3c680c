//! Number formatting, JSON reports and CSV tables.
//!
//! Every float is printed with 17 significant digits (like C's `%.17g`, but
//! always with a decimal point), so reports round-trip exactly.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// `v` with 17 significant digits; trailing zeros are trimmed.
pub fn fmt_f64(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        return format!("{}e{exp}", trim(mantissa));
    }
    let decimals = (16 - exp) as usize;
    trim(&format!("{v:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0');
    if t.ends_with('.') {
        &s[..t.len() + 1]
    } else {
        t
    }
}

/// Pretty JSON with [`fmt_f64`] floats.
struct Report17<'a>(PrettyFormatter<'a>);

impl Formatter for Report17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` as pretty JSON followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Report17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// One sampled row of a solution.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SampleRow {
    pub t: f64,
    /// `left`, `right`, or `both` where the solution is continuous.
    pub side: String,
    pub x: Vec<f64>,
}

pub fn to_csv(rows: &[SampleRow], n: usize) -> String {
    let mut out = String::from("t,side");
    for i in 1..=n {
        out.push_str(&format!(",x{i}"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&fmt_f64(r.t));
        out.push(',');
        out.push_str(&r.side);
        for v in &r.x {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(-1.0), "-1.0");
        assert_eq!(fmt_f64(0.1), "0.10000000000000001");
        assert_eq!(fmt_f64(2.5), "2.5");
        assert_eq!(fmt_f64(1e-7), "9.9999999999999995e-8");
        assert_eq!(fmt_f64(1.5e20), "1.5e20");
        assert_eq!(fmt_f64(123456.0), "123456.0");
        assert_eq!(fmt_f64(-0.0), "0.0");
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn formatting_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.0e-300, 6.02e23, 1.0 - f64::EPSILON, 12345.678901234567] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_uses_full_precision() {
        let s = to_json(&serde_json::json!({"u": [0.1, -1.0], "k": 3}));
        assert!(s.contains("0.10000000000000001"));
        assert!(s.contains("-1.0"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["u"][0].as_f64(), Some(0.1));
        assert_eq!(back["k"].as_u64(), Some(3));
    }

    #[test]
    fn csv_layout() {
        let rows = vec![SampleRow {
            t: 0.5,
            side: "both".into(),
            x: vec![1.0, -2.0],
        }];
        assert_eq!(to_csv(&rows, 2), "t,side,x1,x2\n0.5,both,1.0,-2.0\n");
    }
}
