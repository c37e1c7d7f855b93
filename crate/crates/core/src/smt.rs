//! Semantically meaningful token (SMT) typing.
//!
//! Each token of a parsed output gets one of five types by looking at which
//! AST regions its characters overlap:
//!
//! | region                                              | type  |
//! |-----------------------------------------------------|-------|
//! | first token of a function name                      | `nf`  |
//! | first token of a parameter name                     | `np`  |
//! | value literals, element separators, value closers   | `pv`  |
//! | opening `[`, call/argument separators, call closers | `nfp` |
//! | anything else (`(`, `=`, quotes, name continuations) | `-`   |
//!
//! A token straddling several regions takes the type covering most of its
//! bytes; ties go to `nf > np > pv > nfp > -`.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{FunctionCallAst, ParseOutcome};
use crate::model::{Token, TokenizedSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenType {
    /// Decides the number of functions or parameters (and call vs. refuse).
    Nfp,
    /// Decides which function is called.
    Nf,
    /// Decides which parameter is used.
    Np,
    /// Decides a parameter value.
    Pv,
    /// Syntactically forced.
    #[serde(rename = "-")]
    Other,
}

impl TokenType {
    fn priority(self) -> u8 {
        match self {
            TokenType::Nf => 4,
            TokenType::Np => 3,
            TokenType::Pv => 2,
            TokenType::Nfp => 1,
            TokenType::Other => 0,
        }
    }

    pub fn is_meaningful(self) -> bool {
        self != TokenType::Other
    }
}

impl fmt::Display for TokenType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenType::Nfp => "nfp",
            TokenType::Nf => "nf",
            TokenType::Np => "np",
            TokenType::Pv => "pv",
            TokenType::Other => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedToken {
    pub token: Token,
    pub kind: TokenType,
    /// Byte range of the token in the output text.
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmtError {
    #[error("token texts do not concatenate to the sequence text")]
    Align,
    #[error("AST span ends at byte {span_end} but the text has {text_len} bytes")]
    FormatMismatch { span_end: usize, text_len: usize },
}

/// Assigns each token its byte span by running concatenation. Types are
/// left as [`TokenType::Other`].
pub fn align_tokens(seq: &TokenizedSequence) -> Result<Vec<TypedToken>, SmtError> {
    if !seq.concatenation_matches() {
        return Err(SmtError::Align);
    }
    let mut offset = 0;
    Ok(seq
        .tokens
        .iter()
        .map(|t| {
            let span = offset..offset + t.text.len();
            offset = span.end;
            TypedToken { token: t.clone(), kind: TokenType::Other, span }
        })
        .collect())
}

#[derive(Clone, Copy)]
enum RegionKind {
    /// Identifier regions only count for the token that contains their first byte.
    Identifier(TokenType),
    Plain(TokenType),
}

fn regions(ast: &FunctionCallAst) -> Vec<(Range<usize>, RegionKind)> {
    let mut out = Vec::new();
    for d in &ast.delimiters {
        out.push((d.clone(), RegionKind::Plain(TokenType::Nfp)));
    }
    for call in &ast.calls {
        let s = &call.spans;
        out.push((s.name.clone(), RegionKind::Identifier(TokenType::Nf)));
        for p in &s.params {
            out.push((p.name.clone(), RegionKind::Identifier(TokenType::Np)));
            for leaf in &p.leaves {
                out.push((leaf.clone(), RegionKind::Plain(TokenType::Pv)));
            }
        }
        for d in &s.delimiters {
            out.push((d.clone(), RegionKind::Plain(TokenType::Nfp)));
        }
    }
    out.retain(|(r, _)| !r.is_empty());
    out.sort_by_key(|(r, _)| (r.start, r.end));
    out
}

fn overlap(a: &Range<usize>, b: &Range<usize>) -> usize {
    a.end.min(b.end).saturating_sub(a.start.max(b.start))
}

/// Types every token of `seq` against the spans of `ast`, which must have
/// been parsed from `seq.text`.
pub fn classify_tokens(seq: &TokenizedSequence, ast: &FunctionCallAst) -> Result<Vec<TypedToken>, SmtError> {
    let mut typed = align_tokens(seq)?;
    let span_end = ast.max_span_end();
    if span_end > seq.text.len() {
        return Err(SmtError::FormatMismatch { span_end, text_len: seq.text.len() });
    }
    let regions = regions(ast);
    for t in &mut typed {
        // Byte counts per type, indexed by priority.
        let mut counts = [0usize; 5];
        let mut covered = 0;
        for (range, kind) in regions.iter().filter(|(r, _)| r.start < t.span.end && r.end > t.span.start) {
            let n = overlap(range, &t.span);
            let ty = match *kind {
                RegionKind::Plain(ty) => ty,
                RegionKind::Identifier(ty) if t.span.contains(&range.start) => ty,
                RegionKind::Identifier(_) => TokenType::Other,
            };
            counts[ty.priority() as usize] += n;
            covered += n;
        }
        counts[TokenType::Other.priority() as usize] += t.span.len().saturating_sub(covered);
        t.kind = [TokenType::Nf, TokenType::Np, TokenType::Pv, TokenType::Nfp, TokenType::Other]
            .into_iter()
            .max_by_key(|ty| (counts[ty.priority() as usize], ty.priority()))
            .expect("non-empty");
    }
    Ok(typed)
}

/// Keeps the meaningful tokens in their original order.
pub fn filter_smt(typed: &[TypedToken]) -> Vec<Token> {
    typed.iter().filter(|t| t.kind.is_meaningful()).map(|t| t.token.clone()).collect()
}

/// The token subset used by SMT score variants. Falls back to the full
/// sequence when there is no AST or when nothing is meaningful.
pub fn smt_tokens(seq: &TokenizedSequence, outcome: &ParseOutcome) -> Result<Vec<Token>, SmtError> {
    let Some(ast) = outcome.ast() else {
        return Ok(seq.tokens.clone());
    };
    let kept = filter_smt(&classify_tokens(seq, ast)?);
    if kept.is_empty() {
        Ok(seq.tokens.clone())
    } else {
        Ok(kept)
    }
}
