//! Deterministic text, JSON and CSV rendering. Every float is written with
//! 17 significant digits so output round-trips exactly.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// `x` with 17 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Compact JSON formatter that writes floats as [`num`] does. serde_json
/// already maps non-finite floats to `null` before reaching it.
struct Fixed17;

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

/// One-line JSON with 17-digit floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Fixed17);
    value
        .serialize(&mut ser)
        .expect("serialising in-memory values cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Writes a CSV with the given header; every row must have one float per
/// column.
pub fn write_csv<W: Write>(out: &mut W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.into_iter().map(num).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = num(x);
            let digits = s
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(char::is_ascii_digit)
                .count();
            assert_eq!(digits, 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn json_floats_use_fixed_width() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            n: usize,
            v: Vec<f64>,
            bad: f64,
        }
        let s = to_json(&S {
            a: 0.5,
            n: 3,
            v: vec![1.0, -2.0],
            bad: f64::NAN,
        });
        assert_eq!(
            s,
            r#"{"a":5.0000000000000000e-1,"n":3,"v":[1.0000000000000000e0,-2.0000000000000000e0],"bad":null}"#
        );
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.5));
    }

    #[test]
    fn csv_layout() {
        let mut out = Vec::new();
        write_csv(&mut out, &["z", "w"], vec![vec![0.0, 1.5]]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "z,w\n0.0000000000000000e0,1.5000000000000000e0\n"
        );
    }
}
