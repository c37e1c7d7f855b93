//! Parsers for the two function-call surface formats.
//!
//! Python call list:
//!
//! ```text
//! OUTPUT := '[' CALL (',' CALL)* ']'
//! CALL   := NAME '(' (ARG (',' ARG)*)? ')'
//! NAME   := IDENT ('.' IDENT)*
//! ARG    := IDENT '=' VALUE
//! VALUE  := string | integer | real | True | False | None
//!         | '[' VALUE,* ']' | '{' (STR ':' VALUE),* '}'
//! ```
//!
//! JSON: an array of `{"name": string, "arguments": object}` objects.
//!
//! Whitespace is allowed between lexemes in both formats. All positions are
//! byte offsets into the input.

use std::ops::Range;

use crate::ast::{Arg, Call, CallFormat, CallSpans, FunctionCallAst, ParamSpans, ParseOutcome, Value};

/// Parses `text` in the given surface format.
pub fn parse(text: &str, format: CallFormat) -> ParseOutcome {
    match format {
        CallFormat::Pycall => parse_pycall(text),
        CallFormat::Json => parse_json_calls(text),
    }
}

/// Parses a Python-style call list such as `[f(a=1), g.h(b="x")]`.
///
/// Text without any `[` NAME `(` prefix is a [`ParseOutcome::Refusal`].
pub fn parse_pycall(text: &str) -> ParseOutcome {
    if !has_pycall_prefix(text.as_bytes()) {
        return ParseOutcome::Refusal(text.to_string());
    }
    let mut s = Scanner::new(text, Dialect::Python);
    match s.pycall_output() {
        Ok(ast) => ParseOutcome::Parsed(ast),
        Err(e) => ParseOutcome::DecodeError { reason: e.reason, position: e.position },
    }
}

/// Parses a JSON call array such as `[{"name": "f", "arguments": {"a": 1}}]`.
///
/// Text that is not a JSON array and mentions no `"name"` key is a
/// [`ParseOutcome::Refusal`]; an empty array is also a refusal.
pub fn parse_json_calls(text: &str) -> ParseOutcome {
    let trimmed = text.trim_start_matches(is_ws_char);
    if !trimmed.starts_with('[') {
        if text.contains("\"name\"") && text.contains("\"arguments\"") {
            let position = text.len() - trimmed.len();
            return ParseOutcome::DecodeError { reason: "expected `[` opening a JSON call array".into(), position };
        }
        return ParseOutcome::Refusal(text.to_string());
    }
    let mut s = Scanner::new(text, Dialect::Json);
    match s.json_output() {
        Ok(ast) if ast.calls.is_empty() => ParseOutcome::Refusal(text.to_string()),
        Ok(ast) => ParseOutcome::Parsed(ast),
        Err(e) => ParseOutcome::DecodeError { reason: e.reason, position: e.position },
    }
}

fn is_ws_char(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r')
}

fn is_ws(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r')
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// True if `[` NAME `(` occurs anywhere in the text.
fn has_pycall_prefix(bytes: &[u8]) -> bool {
    bytes.iter().enumerate().filter(|(_, &b)| b == b'[').any(|(i, _)| {
        let mut j = i + 1;
        while j < bytes.len() && is_ws(bytes[j]) {
            j += 1;
        }
        loop {
            if j >= bytes.len() || !is_ident_start(bytes[j]) {
                return false;
            }
            while j < bytes.len() && is_ident_continue(bytes[j]) {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'.' {
                j += 1;
                continue;
            }
            break;
        }
        while j < bytes.len() && is_ws(bytes[j]) {
            j += 1;
        }
        j < bytes.len() && bytes[j] == b'('
    })
}

#[derive(Debug)]
struct SyntaxError {
    reason: String,
    position: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dialect {
    Python,
    Json,
}

struct Scanner<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    dialect: Dialect,
}

type PResult<T> = Result<T, SyntaxError>;

impl<'a> Scanner<'a> {
    fn new(text: &'a str, dialect: Dialect) -> Self {
        Scanner { text, bytes: text.as_bytes(), pos: 0, dialect }
    }

    fn err<T>(&self, reason: impl Into<String>) -> PResult<T> {
        Err(SyntaxError { reason: reason.into(), position: self.pos })
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(is_ws) {
            self.pos += 1;
        }
    }

    /// Consumes `b` (after whitespace) and returns its one-byte span.
    fn expect(&mut self, b: u8) -> PResult<Range<usize>> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == b => {
                self.pos += 1;
                Ok(self.pos - 1..self.pos)
            }
            Some(c) => self.err(format!("expected `{}`, found `{}`", b as char, c as char)),
            None => self.err(format!("expected `{}`, found end of input", b as char)),
        }
    }

    fn expect_end(&mut self) -> PResult<()> {
        self.skip_ws();
        if self.pos < self.bytes.len() {
            return self.err("trailing characters after call list");
        }
        Ok(())
    }

    fn ident(&mut self) -> PResult<Range<usize>> {
        let start = self.pos;
        if !self.peek().is_some_and(is_ident_start) {
            return self.err("expected identifier");
        }
        while self.peek().is_some_and(is_ident_continue) {
            self.pos += 1;
        }
        Ok(start..self.pos)
    }

    fn dotted_name(&mut self) -> PResult<Range<usize>> {
        let start = self.pos;
        self.ident()?;
        while self.peek() == Some(b'.') {
            self.pos += 1;
            self.ident()?;
        }
        Ok(start..self.pos)
    }

    // ---- Python call lists ----

    fn pycall_output(&mut self) -> PResult<FunctionCallAst> {
        let mut ast = FunctionCallAst::default();
        ast.delimiters.push(self.expect(b'[')?);
        loop {
            self.skip_ws();
            ast.calls.push(self.pycall()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    ast.delimiters.push(self.pos..self.pos + 1);
                    self.pos += 1;
                }
                Some(b']') => {
                    ast.delimiters.push(self.pos..self.pos + 1);
                    self.pos += 1;
                    break;
                }
                _ => return self.err("expected `,` or `]` after call"),
            }
        }
        self.expect_end()?;
        Ok(ast)
    }

    fn pycall(&mut self) -> PResult<Call> {
        let start = self.pos;
        let name = self.dotted_name()?;
        self.expect(b'(')?;
        let mut spans = CallSpans { name: name.clone(), ..CallSpans::default() };
        let mut args: Vec<Arg> = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b')') {
            spans.delimiters.push(self.pos..self.pos + 1);
            self.pos += 1;
        } else {
            loop {
                self.skip_ws();
                let arg_start = self.pos;
                let pname = self.ident()?;
                let key = &self.text[pname.clone()];
                if args.iter().any(|a| a.name == key) {
                    self.pos = arg_start;
                    return self.err(format!("duplicate argument `{key}`"));
                }
                self.expect(b'=')?;
                self.skip_ws();
                let mut leaves = Vec::new();
                let vstart = self.pos;
                let value = self.value(&mut leaves)?;
                spans.params.push(ParamSpans { name: pname.clone(), value: vstart..self.pos, leaves });
                args.push(Arg { name: self.text[pname].to_string(), value });
                self.skip_ws();
                match self.peek() {
                    Some(b',') => {
                        spans.delimiters.push(self.pos..self.pos + 1);
                        self.pos += 1;
                    }
                    Some(b')') => {
                        spans.delimiters.push(self.pos..self.pos + 1);
                        self.pos += 1;
                        break;
                    }
                    _ => return self.err("expected `,` or `)` after argument"),
                }
            }
        }
        spans.call = start..self.pos;
        Ok(Call { name: self.text[name].to_string(), args, spans })
    }

    // ---- JSON call arrays ----

    fn json_output(&mut self) -> PResult<FunctionCallAst> {
        let mut ast = FunctionCallAst::default();
        ast.delimiters.push(self.expect(b'[')?);
        self.skip_ws();
        if self.peek() == Some(b']') {
            ast.delimiters.push(self.pos..self.pos + 1);
            self.pos += 1;
            self.expect_end()?;
            return Ok(ast);
        }
        loop {
            self.skip_ws();
            ast.calls.push(self.json_call()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    ast.delimiters.push(self.pos..self.pos + 1);
                    self.pos += 1;
                }
                Some(b']') => {
                    ast.delimiters.push(self.pos..self.pos + 1);
                    self.pos += 1;
                    break;
                }
                _ => return self.err("expected `,` or `]` after call object"),
            }
        }
        self.expect_end()?;
        Ok(ast)
    }

    fn json_call(&mut self) -> PResult<Call> {
        let start = self.pos;
        self.expect(b'{')?;
        let mut name: Option<(String, Range<usize>)> = None;
        let mut arguments: Option<(Vec<Arg>, Vec<ParamSpans>, Vec<Range<usize>>)> = None;
        loop {
            self.skip_ws();
            let key_start = self.pos;
            let (key, _) = self.string()?;
            self.expect(b':')?;
            self.skip_ws();
            match key.as_str() {
                "name" if name.is_none() => {
                    let (n, content) = self.string()?;
                    name = Some((n, content));
                }
                "arguments" if arguments.is_none() => {
                    arguments = Some(self.json_arguments()?);
                }
                _ => {
                    self.pos = key_start;
                    return self.err(format!("unexpected key `{key}` in call object"));
                }
            }
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {
                    self.pos += 1;
                    break;
                }
                _ => return self.err("expected `,` or `}` in call object"),
            }
        }
        let Some((name, name_span)) = name else {
            return self.err("call object without `name`");
        };
        let Some((args, params, delimiters)) = arguments else {
            return self.err("call object without `arguments`");
        };
        Ok(Call { name, args, spans: CallSpans { call: start..self.pos, name: name_span, params, delimiters } })
    }

    #[allow(clippy::type_complexity)]
    fn json_arguments(&mut self) -> PResult<(Vec<Arg>, Vec<ParamSpans>, Vec<Range<usize>>)> {
        self.expect(b'{')?;
        let mut args: Vec<Arg> = Vec::new();
        let mut params = Vec::new();
        let mut delimiters = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b'}') {
            delimiters.push(self.pos..self.pos + 1);
            self.pos += 1;
            return Ok((args, params, delimiters));
        }
        loop {
            self.skip_ws();
            let key_start = self.pos;
            let (key, key_span) = self.string()?;
            if args.iter().any(|a| a.name == key) {
                self.pos = key_start;
                return self.err(format!("duplicate argument `{key}`"));
            }
            self.expect(b':')?;
            self.skip_ws();
            let mut leaves = Vec::new();
            let vstart = self.pos;
            let value = self.value(&mut leaves)?;
            params.push(ParamSpans { name: key_span, value: vstart..self.pos, leaves });
            args.push(Arg { name: key, value });
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    delimiters.push(self.pos..self.pos + 1);
                    self.pos += 1;
                }
                Some(b'}') => {
                    delimiters.push(self.pos..self.pos + 1);
                    self.pos += 1;
                    break;
                }
                _ => return self.err("expected `,` or `}` after argument"),
            }
        }
        Ok((args, params, delimiters))
    }

    // ---- values (shared) ----

    fn value(&mut self, leaves: &mut Vec<Range<usize>>) -> PResult<Value> {
        match self.peek() {
            Some(b'"') => {
                let (s, span) = self.string()?;
                leaves.push(span);
                Ok(Value::Str(s))
            }
            Some(b'\'') if self.dialect == Dialect::Python => {
                let (s, span) = self.string()?;
                leaves.push(span);
                Ok(Value::Str(s))
            }
            Some(b'[') => {
                self.pos += 1;
                let mut items = Vec::new();
                self.skip_ws();
                if self.peek() == Some(b']') {
                    leaves.push(self.pos..self.pos + 1);
                    self.pos += 1;
                    return Ok(Value::List(items));
                }
                loop {
                    self.skip_ws();
                    items.push(self.value(leaves)?);
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            leaves.push(self.pos..self.pos + 1);
                            self.pos += 1;
                        }
                        Some(b']') => {
                            leaves.push(self.pos..self.pos + 1);
                            self.pos += 1;
                            return Ok(Value::List(items));
                        }
                        _ => return self.err("expected `,` or `]` in list"),
                    }
                }
            }
            Some(b'{') => {
                self.pos += 1;
                let mut entries: Vec<(String, Value)> = Vec::new();
                self.skip_ws();
                if self.peek() == Some(b'}') {
                    leaves.push(self.pos..self.pos + 1);
                    self.pos += 1;
                    return Ok(Value::Dict(entries));
                }
                loop {
                    self.skip_ws();
                    let key_start = self.pos;
                    let quoted = matches!(self.peek(), Some(b'"'))
                        || (self.dialect == Dialect::Python && self.peek() == Some(b'\''));
                    if !quoted {
                        return self.err("expected string key in dict");
                    }
                    let (key, key_span) = self.string()?;
                    if entries.iter().any(|(k, _)| *k == key) {
                        self.pos = key_start;
                        return self.err(format!("duplicate dict key `{key}`"));
                    }
                    leaves.push(key_span);
                    self.expect(b':')?;
                    self.skip_ws();
                    let v = self.value(leaves)?;
                    entries.push((key, v));
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            leaves.push(self.pos..self.pos + 1);
                            self.pos += 1;
                        }
                        Some(b'}') => {
                            leaves.push(self.pos..self.pos + 1);
                            self.pos += 1;
                            return Ok(Value::Dict(entries));
                        }
                        _ => return self.err("expected `,` or `}` in dict"),
                    }
                }
            }
            Some(b'-' | b'0'..=b'9') => {
                let (v, span) = self.number()?;
                leaves.push(span);
                Ok(v)
            }
            Some(c) if is_ident_start(c) => {
                let start = self.pos;
                let word = self.ident()?;
                let v = match (self.dialect, &self.text[word.clone()]) {
                    (Dialect::Python, "True") | (Dialect::Json, "true") => Value::Bool(true),
                    (Dialect::Python, "False") | (Dialect::Json, "false") => Value::Bool(false),
                    (Dialect::Python, "None") | (Dialect::Json, "null") => Value::Null,
                    (_, w) => {
                        let w = w.to_string();
                        self.pos = start;
                        return self.err(format!("unexpected bare word `{w}`"));
                    }
                };
                leaves.push(word);
                Ok(v)
            }
            Some(c) => self.err(format!("unexpected character `{}` in value", c as char)),
            None => self.err("unexpected end of input in value"),
        }
    }

    fn number(&mut self) -> PResult<(Value, Range<usize>)> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits = |s: &mut Self| {
            let d0 = s.pos;
            while s.peek().is_some_and(|b| b.is_ascii_digit()) {
                s.pos += 1;
            }
            s.pos > d0
        };
        if !digits(self) {
            return self.err("expected digits");
        }
        let mut is_float = false;
        if self.peek() == Some(b'.') {
            self.pos += 1;
            is_float = true;
            if !digits(self) {
                return self.err("expected digits after decimal point");
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            is_float = true;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if !digits(self) {
                return self.err("expected exponent digits");
            }
        }
        if self.peek().is_some_and(is_ident_continue) {
            return self.err("malformed number");
        }
        let lit = &self.text[start..self.pos];
        let value = if is_float {
            Value::Float(
                lit.parse::<f64>()
                    .map_err(|_| SyntaxError { reason: format!("bad number `{lit}`"), position: start })?,
            )
        } else {
            match lit.parse::<i64>() {
                Ok(i) => Value::Int(i),
                Err(_) => Value::Float(lit.parse::<f64>().unwrap_or(f64::INFINITY)),
            }
        };
        Ok((value, start..self.pos))
    }

    /// Parses a quoted string; returns the unescaped contents and the span
    /// of the contents without the quotes.
    fn string(&mut self) -> PResult<(String, Range<usize>)> {
        let quote = match self.peek() {
            Some(b'"') => b'"',
            Some(b'\'') if self.dialect == Dialect::Python => b'\'',
            _ => return self.err("expected string"),
        };
        self.pos += 1;
        let content_start = self.pos;
        let mut out = String::new();
        loop {
            let Some(b) = self.peek() else {
                return self.err("unterminated string");
            };
            if b == quote {
                let span = content_start..self.pos;
                self.pos += 1;
                return Ok((out, span));
            }
            if b == b'\\' {
                let esc_pos = self.pos;
                self.pos += 1;
                let Some(e) = self.peek() else {
                    return self.err("unterminated escape");
                };
                self.pos += 1;
                match e {
                    b'"' => out.push('"'),
                    b'\'' => out.push('\''),
                    b'\\' => out.push('\\'),
                    b'/' => out.push('/'),
                    b'n' => out.push('\n'),
                    b't' => out.push('\t'),
                    b'r' => out.push('\r'),
                    b'b' => out.push('\u{8}'),
                    b'f' => out.push('\u{c}'),
                    b'u' => out.push(self.unicode_escape(esc_pos)?),
                    _ if self.dialect == Dialect::Python => {
                        out.push('\\');
                        self.pos -= 1;
                    }
                    _ => {
                        self.pos = esc_pos;
                        return self.err("invalid escape");
                    }
                }
                continue;
            }
            if b == b'\n' && self.dialect == Dialect::Python {
                return self.err("newline in string literal");
            }
            // Copy one UTF-8 character.
            let ch = self.text[self.pos..].chars().next().expect("in bounds");
            out.push(ch);
            self.pos += ch.len_utf8();
        }
    }

    fn hex4(&mut self) -> Option<u32> {
        let s = self.text.get(self.pos..self.pos + 4)?;
        let v = u32::from_str_radix(s, 16).ok()?;
        self.pos += 4;
        Some(v)
    }

    fn unicode_escape(&mut self, esc_pos: usize) -> PResult<char> {
        let bad = |pos| SyntaxError { reason: "invalid unicode escape".into(), position: pos };
        let hi = self.hex4().ok_or_else(|| bad(esc_pos))?;
        if (0xD800..0xDC00).contains(&hi) {
            if self.text.get(self.pos..self.pos + 2) != Some("\\u") {
                return Err(bad(esc_pos));
            }
            self.pos += 2;
            let lo = self.hex4().ok_or_else(|| bad(esc_pos))?;
            if !(0xDC00..0xE000).contains(&lo) {
                return Err(bad(esc_pos));
            }
            let c = 0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00);
            return char::from_u32(c).ok_or_else(|| bad(esc_pos));
        }
        char::from_u32(hi).ok_or_else(|| bad(esc_pos))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ast_equal;

    pub(crate) const PARALLEL_MULTIPLE_GREEDY: &str = r#"[history.get_key_events(country="France", start_year=1800, end_year=1900, event_type=["War", "Economy"]), get_sculpture_value(sculpture="The Thinker", artist="Auguste Rodin"), get_sculpture_value(sculpture="The Kiss", artist="Auguste Rodin", year=1882)]"#;

    fn parsed(o: ParseOutcome) -> FunctionCallAst {
        match o {
            ParseOutcome::Parsed(a) => a,
            other => panic!("expected Parsed, got {other:?}"),
        }
    }

    #[test]
    fn minimal_call() {
        let ast = parsed(parse_pycall("[f(a=1)]"));
        assert_eq!(ast.calls.len(), 1);
        assert_eq!(ast.calls[0].name, "f");
        assert_eq!(ast.calls[0].arg("a"), Some(&Value::Int(1)));
        assert_eq!(ast.calls[0].spans.name, 1..2);
        assert_eq!(ast.calls[0].spans.params[0].name, 3..4);
        assert_eq!(ast.calls[0].spans.params[0].value, 5..6);
        assert_eq!(ast.calls[0].spans.call, 1..7);
        assert_eq!(ast.delimiters, vec![0..1, 7..8]);
    }

    #[test]
    fn parallel_multiple_output() {
        let ast = parsed(parse_pycall(PARALLEL_MULTIPLE_GREEDY));
        let names: Vec<_> = ast.calls.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["history.get_key_events", "get_sculpture_value", "get_sculpture_value"]);
        assert_eq!(ast.calls[2].arg("year"), Some(&Value::Int(1882)));
        assert!(ast.calls[1].arg("year").is_none());
        assert_eq!(
            ast.calls[0].arg("event_type"),
            Some(&Value::List(vec![Value::Str("War".into()), Value::Str("Economy".into())]))
        );
    }

    #[test]
    fn refusal_and_decode_error() {
        assert!(matches!(parse_pycall("I cannot fulfil this request."), ParseOutcome::Refusal(_)));
        match parse_pycall("[f(a=1]") {
            ParseOutcome::DecodeError { position, .. } => assert_eq!(position, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_pycall("[]"), ParseOutcome::Refusal(_)));
        assert!(parse_pycall("Sure: [f(a=1)]").is_decode_error());
        assert!(parse_pycall("[f(a=1, a=2)]").is_decode_error());
        assert!(parse_pycall("[f(a=bar)]").is_decode_error());
        assert!(parse_pycall("[f(a=1)] trailing").is_decode_error());
    }

    #[test]
    fn python_literals_and_whitespace() {
        let ast =
            parsed(parse_pycall(" [ m.f ( a = 'x\\'y' , b = -2.5e1 , c = None , d = { 'k' : [True, False] } ) ] "));
        let c = &ast.calls[0];
        assert_eq!(c.arg("a"), Some(&Value::Str("x'y".into())));
        assert_eq!(c.arg("b"), Some(&Value::Float(-25.0)));
        assert_eq!(c.arg("c"), Some(&Value::Null));
        assert_eq!(
            c.arg("d"),
            Some(&Value::Dict(vec![("k".into(), Value::List(vec![Value::Bool(true), Value::Bool(false)]))]))
        );
    }

    #[test]
    fn json_matches_pycall() {
        let j = parsed(parse_json_calls(r#"[{"name":"f","arguments":{"a":1}}]"#));
        let p = parsed(parse_pycall("[f(a=1)]"));
        assert!(ast_equal(&j, &p));
        let j = parsed(parse_json_calls(r#"[{"arguments": {"x": 1.0, "y": "é"}, "name": "g"}]"#));
        assert_eq!(j.calls[0].arg("x"), Some(&Value::Float(1.0)));
        assert_eq!(j.calls[0].arg("y"), Some(&Value::Str("é".into())));
        assert_eq!(&r#"[{"arguments": {"x": 1.0, "y": "é"}, "name": "g"}]"#[j.calls[0].spans.name.clone()], "g");
    }

    #[test]
    fn json_errors_and_refusals() {
        assert!(parse_json_calls(r#"[{"name":"f","arguments":{"a":1}}"#).is_decode_error());
        assert!(matches!(parse_json_calls("Sorry, no suitable tool."), ParseOutcome::Refusal(_)));
        assert!(matches!(parse_json_calls("[]"), ParseOutcome::Refusal(_)));
        assert!(parse_json_calls(r#"[{"name":"f"}]"#).is_decode_error());
        assert!(parse_json_calls(r#"[{"name":"f","arguments":{"a":True}}]"#).is_decode_error());
        assert!(parse_json_calls(r#"call: {"name":"f","arguments":{}}"#).is_decode_error());
    }
}
