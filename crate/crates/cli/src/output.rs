//! Fixed-precision CSV and JSON rendering.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub const SCHEMA_VERSION: u32 = 1;

/// Six decimals; negative zero prints as `0.000000`.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s.trim_start_matches('-')
        .bytes()
        .all(|b| b == b'0' || b == b'.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// A float serialized as a six-decimal JSON number (`null` if not finite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        RawValue::from_string(fmt6(self.0))
            .map_err(serde::ser::Error::custom)?
            .serialize(serializer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Comma-separated rows with a header and LF line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_decimals() {
        assert_eq!(fmt6(-0.3746410161513775), "-0.374641");
        assert_eq!(fmt6(1.0), "1.000000");
        assert_eq!(fmt6(-1e-9), "0.000000");
        assert_eq!(fmt6(-0.0), "0.000000");
    }

    #[test]
    fn json_numbers_keep_six_decimals() {
        #[derive(Serialize)]
        struct R {
            x: Num,
            y: Num,
        }
        let s = serde_json::to_string(&R {
            x: Num(0.5),
            y: Num(f64::NAN),
        })
        .unwrap();
        assert_eq!(s, r#"{"x":0.500000,"y":null}"#);
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(["1".to_string(), "2".to_string()]);
        assert_eq!(c.finish(), "a,b\n1,2\n");
    }
}
