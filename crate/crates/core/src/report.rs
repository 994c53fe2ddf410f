//! Output serialization: 17-significant-digit floats in JSON and CSV.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

pub const SCHEMA_VERSION: u32 = 1;

/// Formats a float with 17 significant digits (`inf`/`nan` spelled out).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        if x == 0.0 {
            "0".to_string()
        } else {
            format!("{x:.16e}")
        }
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Pretty-ish JSON with 17-digit floats. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, SeventeenDigits);
    value.serialize(&mut ser).expect("report serialization cannot fail");
    let mut s = String::from_utf8(out).expect("JSON is UTF-8");
    s.push('\n');
    s
}

/// Wraps a payload with the schema version.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    #[serde(flatten)]
    pub payload: &'a T,
}

pub fn envelope_json<T: Serialize>(command: &str, payload: &T) -> String {
    to_json(&Envelope { schema_version: SCHEMA_VERSION, command, payload })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_json() {
        let xs = vec![std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2, 0.0];
        let text = to_json(&xs);
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(xs, back);
        assert!(text.contains("3.1415926535897931e0"));
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(to_json(&f64::NAN).trim(), "null");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn envelope_carries_schema_version() {
        #[derive(Serialize)]
        struct P {
            x: f64,
        }
        let s = envelope_json("norm", &P { x: 1.0 });
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["command"], "norm");
    }
}
