//! Artifact serialization: pretty JSON and CSV with floats written to 17
//! significant digits, plus the provenance block stamped on JSON output.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;

/// `x` with 17 significant digits; positional notation for decimal
/// exponents in `-5..17`, scientific otherwise.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    if !(-5..17).contains(&exp) {
        return format!("{sign}{mantissa}e{exp}");
    }
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if exp < 0 {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let e = exp as usize;
        let frac = &digits[e + 1..];
        format!("{sign}{}.{}", &digits[..=e], if frac.is_empty() { "0" } else { frac })
    }
}

/// [`PrettyFormatter`] with [`sig17`] floats.
pub struct Sig17Formatter<'a>(PrettyFormatter<'a>);

impl Default for Sig17Formatter<'_> {
    fn default() -> Self {
        Self(PrettyFormatter::new())
    }
}

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        w.write_all(sig17(value as f64).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-significant-digit floats and a trailing newline.
/// Non-finite floats become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17Formatter::default());
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Tool, version, seed and active caps, recorded in every JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub caps: serde_json::Value,
}

impl Provenance {
    pub fn new(seed: u64, caps: serde_json::Value) -> Self {
        Self {
            tool: "opfactor".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            caps,
        }
    }
}

/// Adds `"provenance"` to a JSON object, or wraps any other value as
/// `{"provenance": …, "value": …}`.
pub fn with_provenance(value: serde_json::Value, provenance: &Provenance) -> Result<serde_json::Value> {
    let p = serde_json::to_value(provenance)?;
    Ok(match value {
        serde_json::Value::Object(mut map) => {
            map.insert("provenance".into(), p);
            serde_json::Value::Object(map)
        }
        other => serde_json::json!({ "provenance": p, "value": other }),
    })
}
