//! Canonical representation of parsed function calls.
//!
//! Both surface formats (Python-style call lists and JSON call arrays) parse
//! into the same [`FunctionCallAst`]. Spans are byte offsets into the source
//! text and are ignored by equality.

use std::fmt::{self, Write as _};
use std::ops::Range;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An argument value. Closed sum: nothing else can appear in a call.
#[derive(Debug, Clone)]
pub enum Value {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Null,
    List(Vec<Value>),
    /// Key order is kept for printing; equality treats the entries as a map.
    Dict(Vec<(String, Value)>),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        use Value::*;
        match (self, other) {
            (Str(a), Str(b)) => a == b,
            (Int(a), Int(b)) => a == b,
            (Float(a), Float(b)) => a == b,
            (Int(i), Float(f)) | (Float(f), Int(i)) => int_equals_float(*i, *f),
            (Bool(a), Bool(b)) => a == b,
            (Null, Null) => true,
            (List(a), List(b)) => a == b,
            (Dict(a), Dict(b)) => entries_equal(a, b),
            _ => false,
        }
    }
}

/// `f` is exactly the real number `i`.
fn int_equals_float(i: i64, f: f64) -> bool {
    if !f.is_finite() || f.fract() != 0.0 {
        return false;
    }
    // i64 range as f64 is [-2^63, 2^63); 2^63 itself would saturate on cast.
    if !(i64::MIN as f64..i64::MAX as f64).contains(&f) {
        return false;
    }
    f as i64 == i && (i as f64) == f
}

fn entries_equal(a: &[(String, Value)], b: &[(String, Value)]) -> bool {
    a.len() == b.len() && a.iter().all(|(k, v)| b.iter().any(|(k2, v2)| k == k2 && v == v2))
}

impl Value {
    /// Converts a JSON value: integers that fit in `i64` become `Int`,
    /// every other number becomes `Float`.
    pub fn from_json(v: &serde_json::Value) -> Value {
        match v {
            serde_json::Value::Null => Value::Null,
            serde_json::Value::Bool(b) => Value::Bool(*b),
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) => Value::Int(i),
                None => Value::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
            serde_json::Value::String(s) => Value::Str(s.clone()),
            serde_json::Value::Array(items) => Value::List(items.iter().map(Value::from_json).collect()),
            serde_json::Value::Object(map) => {
                Value::Dict(map.iter().map(|(k, v)| (k.clone(), Value::from_json(v))).collect())
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Str(s) => serde_json::Value::String(s.clone()),
            Value::Int(i) => serde_json::Value::from(*i),
            Value::Float(f) => {
                serde_json::Number::from_f64(*f).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
            }
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Null => serde_json::Value::Null,
            Value::List(items) => serde_json::Value::Array(items.iter().map(Value::to_json).collect()),
            Value::Dict(entries) => {
                serde_json::Value::Object(entries.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
            }
        }
    }

    /// Writes a representation that is identical for equal values and
    /// distinct for unequal ones.
    fn write_canonical(&self, out: &mut String) {
        match self {
            Value::Str(s) => {
                out.push('s');
                write_quoted(out, s, '"');
            }
            Value::Int(i) => {
                let _ = write!(out, "n{i}");
            }
            Value::Float(f) => {
                if int_equals_float(f.trunc() as i64, *f) {
                    let _ = write!(out, "n{}", *f as i64);
                } else {
                    // Bit pattern keeps distinct floats distinct.
                    let _ = write!(out, "f{:016x}", f.to_bits());
                }
            }
            Value::Bool(b) => out.push_str(if *b { "T" } else { "F" }),
            Value::Null => out.push('N'),
            Value::List(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write_canonical(out);
                }
                out.push(']');
            }
            Value::Dict(entries) => {
                let mut sorted: Vec<&(String, Value)> = entries.iter().collect();
                sorted.sort_by(|a, b| a.0.cmp(&b.0));
                out.push('{');
                for (i, (k, v)) in sorted.into_iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_quoted(out, k, '"');
                    out.push(':');
                    v.write_canonical(out);
                }
                out.push('}');
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        Ok(Value::from_json(&v))
    }
}

/// Source spans of one parameter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamSpans {
    /// The parameter identifier (without quotes in JSON).
    pub name: Range<usize>,
    /// The whole value expression.
    pub value: Range<usize>,
    /// Decision-carrying pieces of the value: scalar literals (string
    /// contents without quotes), element separators, and closing brackets of
    /// lists and dicts.
    pub leaves: Vec<Range<usize>>,
}

/// Source spans of one call.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallSpans {
    pub call: Range<usize>,
    pub name: Range<usize>,
    /// In argument order, parallel to [`Call::args`].
    pub params: Vec<ParamSpans>,
    /// Argument separators and the closer that ends the argument list.
    pub delimiters: Vec<Range<usize>>,
}

#[derive(Debug, Clone)]
pub struct Arg {
    pub name: String,
    pub value: Value,
}

#[derive(Debug, Clone)]
pub struct Call {
    /// Dotted identifiers are allowed, e.g. `history.get_key_events`.
    pub name: String,
    pub args: Vec<Arg>,
    pub spans: CallSpans,
}

impl Call {
    pub fn new(name: impl Into<String>, args: Vec<(&str, Value)>) -> Self {
        Call {
            name: name.into(),
            args: args.into_iter().map(|(n, v)| Arg { name: n.to_string(), value: v }).collect(),
            spans: CallSpans::default(),
        }
    }

    pub fn arg(&self, name: &str) -> Option<&Value> {
        self.args.iter().find(|a| a.name == name).map(|a| &a.value)
    }

    fn write_canonical(&self, out: &mut String) {
        out.push_str(&self.name);
        out.push('(');
        let mut args: Vec<&Arg> = self.args.iter().collect();
        args.sort_by(|a, b| a.name.cmp(&b.name));
        for (i, a) in args.into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&a.name);
            out.push('=');
            a.value.write_canonical(out);
        }
        out.push(')');
    }
}

/// Name and arguments compared as a map; spans ignored.
impl PartialEq for Call {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.args.len() == other.args.len()
            && self.args.iter().all(|a| other.arg(&a.name).is_some_and(|v| *v == a.value))
    }
}

/// One or more calls parsed from a single model output.
#[derive(Debug, Clone, Default)]
pub struct FunctionCallAst {
    pub calls: Vec<Call>,
    /// Top-level delimiters: the opening bracket of the call list, call
    /// separators, and the closing bracket.
    pub delimiters: Vec<Range<usize>>,
}

impl FunctionCallAst {
    pub fn new(calls: Vec<Call>) -> Self {
        FunctionCallAst { calls, delimiters: Vec::new() }
    }

    /// Key that is equal for two ASTs iff [`ast_equal`] holds.
    pub fn canonical_key(&self) -> String {
        let mut out = String::new();
        for (i, c) in self.calls.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            c.write_canonical(&mut out);
        }
        out
    }

    /// Largest byte offset referenced by any span.
    pub fn max_span_end(&self) -> usize {
        let mut end = self.delimiters.iter().map(|r| r.end).max().unwrap_or(0);
        for c in &self.calls {
            let s = &c.spans;
            end = end.max(s.call.end).max(s.name.end);
            end = s.delimiters.iter().fold(end, |e, r| e.max(r.end));
            for p in &s.params {
                end = end.max(p.name.end).max(p.value.end);
                end = p.leaves.iter().fold(end, |e, r| e.max(r.end));
            }
        }
        end
    }

    /// Python call-list surface form, e.g. `[f(a=1, b="x")]`.
    pub fn to_pycall(&self) -> String {
        let mut out = String::from("[");
        for (i, c) in self.calls.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&c.name);
            out.push('(');
            for (j, a) in c.args.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(&a.name);
                out.push('=');
                write_py_value(&mut out, &a.value);
            }
            out.push(')');
        }
        out.push(']');
        out
    }

    /// JSON surface form, e.g. `[{"name": "f", "arguments": {"a": 1}}]`.
    pub fn to_json_calls(&self) -> String {
        let mut out = String::from("[");
        for (i, c) in self.calls.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str("{\"name\": ");
            write_quoted(&mut out, &c.name, '"');
            out.push_str(", \"arguments\": {");
            for (j, a) in c.args.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                write_quoted(&mut out, &a.name, '"');
                out.push_str(": ");
                write_json_value(&mut out, &a.value);
            }
            out.push_str("}}");
        }
        out.push(']');
        out
    }
}

impl PartialEq for FunctionCallAst {
    fn eq(&self, other: &Self) -> bool {
        ast_equal(self, other)
    }
}

/// Same number of calls, pairwise equal in order. Arguments compare as a
/// map, so argument order is irrelevant; call order is not.
pub fn ast_equal(a: &FunctionCallAst, b: &FunctionCallAst) -> bool {
    a.calls.len() == b.calls.len() && a.calls.iter().zip(&b.calls).all(|(x, y)| x == y)
}

/// Result of parsing one model output.
#[derive(Debug, Clone)]
pub enum ParseOutcome {
    Parsed(FunctionCallAst),
    /// No call was attempted; the output is natural language.
    Refusal(String),
    DecodeError {
        reason: String,
        position: usize,
    },
}

impl ParseOutcome {
    pub fn ast(&self) -> Option<&FunctionCallAst> {
        match self {
            ParseOutcome::Parsed(ast) => Some(ast),
            _ => None,
        }
    }

    pub fn is_decode_error(&self) -> bool {
        matches!(self, ParseOutcome::DecodeError { .. })
    }
}

/// Output surface format of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CallFormat {
    #[default]
    Pycall,
    Json,
}

impl fmt::Display for CallFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CallFormat::Pycall => "pycall",
            CallFormat::Json => "json",
        })
    }
}

impl std::str::FromStr for CallFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pycall" | "python" => Ok(CallFormat::Pycall),
            "json" => Ok(CallFormat::Json),
            other => Err(format!("unknown call format `{other}`")),
        }
    }
}

fn write_quoted(out: &mut String, s: &str, quote: char) {
    out.push(quote);
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push(quote);
}

fn write_float(out: &mut String, f: f64) {
    // `{:?}` always keeps a fraction or exponent, so the literal re-parses as a float.
    let _ = write!(out, "{f:?}");
}

fn write_py_value(out: &mut String, v: &Value) {
    match v {
        Value::Str(s) => write_quoted(out, s, '"'),
        Value::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Value::Float(f) => write_float(out, *f),
        Value::Bool(true) => out.push_str("True"),
        Value::Bool(false) => out.push_str("False"),
        Value::Null => out.push_str("None"),
        Value::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_py_value(out, item);
            }
            out.push(']');
        }
        Value::Dict(entries) => {
            out.push('{');
            for (i, (k, item)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_quoted(out, k, '"');
                out.push_str(": ");
                write_py_value(out, item);
            }
            out.push('}');
        }
    }
}

fn write_json_value(out: &mut String, v: &Value) {
    match v {
        Value::Str(s) => write_quoted(out, s, '"'),
        Value::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Value::Float(f) => write_float(out, *f),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Null => out.push_str("null"),
        Value::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_json_value(out, item);
            }
            out.push(']');
        }
        Value::Dict(entries) => {
            out.push('{');
            for (i, (k, item)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_quoted(out, k, '"');
                out.push_str(": ");
                write_json_value(out, item);
            }
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(args: Vec<(&str, Value)>) -> FunctionCallAst {
        FunctionCallAst::new(vec![Call::new("f", args)])
    }

    #[test]
    fn argument_order_is_irrelevant() {
        let a = f(vec![("a", Value::Int(1)), ("b", Value::Str("x".into()))]);
        let b = f(vec![("b", Value::Str("x".into())), ("a", Value::Int(1))]);
        assert!(ast_equal(&a, &b));
        assert_eq!(a.canonical_key(), b.canonical_key());
    }

    #[test]
    fn different_values_differ() {
        assert!(!ast_equal(&f(vec![("a", Value::Int(1))]), &f(vec![("a", Value::Int(2))])));
    }

    #[test]
    fn call_order_is_significant() {
        let fa = Call::new("f", vec![("a", Value::Int(1))]);
        let g = Call::new("g", vec![]);
        let x = FunctionCallAst::new(vec![fa.clone(), g.clone()]);
        let y = FunctionCallAst::new(vec![g, fa]);
        assert!(!ast_equal(&x, &y));
    }

    #[test]
    fn int_and_float_equal_only_when_exact() {
        assert_eq!(Value::Int(3), Value::Float(3.0));
        assert_ne!(Value::Int(3), Value::Float(3.5));
        assert_ne!(Value::Int(i64::MAX), Value::Float(i64::MAX as f64));
        assert_eq!(f(vec![("a", Value::Int(3))]).canonical_key(), f(vec![("a", Value::Float(3.0))]).canonical_key());
    }

    #[test]
    fn dicts_compare_as_maps() {
        let a = Value::Dict(vec![("x".into(), Value::Int(1)), ("y".into(), Value::Null)]);
        let b = Value::Dict(vec![("y".into(), Value::Null), ("x".into(), Value::Int(1))]);
        assert_eq!(a, b);
    }

    #[test]
    fn printers() {
        let ast = FunctionCallAst::new(vec![Call::new(
            "m.f",
            vec![
                ("a", Value::List(vec![Value::Str("q\"".into()), Value::Float(1.5)])),
                ("b", Value::Bool(true)),
                ("c", Value::Null),
            ],
        )]);
        assert_eq!(ast.to_pycall(), r#"[m.f(a=["q\"", 1.5], b=True, c=None)]"#);
        assert_eq!(ast.to_json_calls(), r#"[{"name": "m.f", "arguments": {"a": ["q\"", 1.5], "b": true, "c": null}}]"#);
    }
}
