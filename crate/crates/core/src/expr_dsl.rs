//! Text format for [`AnalyticMap`] expressions.
//!
//! Grammar (whitespace insignificant, ASCII only):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | base ('^' real)?
//! base   := 'z' | number | 'i' | '(' expr ')' | call
//! call   := 'l' ('(' expr ')')?
//!         | ('lrot'|'rot') '(' real ')' ('(' expr ')')?
//!         | 'lens' '(' real ')' ('(' expr ')')?
//!         | 'dilate' '(' real ')' ('(' expr ')')?
//!         | 'compose' '(' expr ',' expr ')'
//!         | 'iterate' '(' expr ',' integer ')'
//! ```
//!
//! A builtin without an applied argument denotes the map itself, so
//! `compose(l, dilate(0.25)(z))` and `l(z/4)` are the same function.
//!
//! `^` binds tighter than `*` and `/`, which bind tighter than `+` and `-`.
//! Exponents are real literals; the principal branch is applied at
//! evaluation. The rotation parameter of `rot` and `lrot` is measured in
//! turns: `rot(t)` is multiplication by `exp(2*pi*i*t)`, so `rot(0.25)(z)`
//! is a quarter turn. `compose(f,g)` means `f` after `g`.
//!
//! [`format`] produces the canonical fully parenthesized rendering;
//! `parse(format(f))` evaluates identically to `f`.

use crate::disk_maps::{LensParameter, UnitComplex};
use crate::function_model::AnalyticMap;
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// A parse failure, pointing into the offending token.
#[derive(Debug, Clone, Error, Serialize)]
pub struct ParseDiagnostic {
    /// Byte offset into the source text.
    pub offset: usize,
    pub message: String,
    /// Tokens that would have been accepted at this point.
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at offset {}: {}", self.offset, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

/// Parses a source string into an expression tree.
pub fn parse(src: &str) -> Result<AnalyticMap, ParseDiagnostic> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.pos >= p.src.len() {
        return Err(p.diagnostic("empty expression", vec!["expression"]));
    }
    if let Some(bad) = src.bytes().position(|b| !b.is_ascii()) {
        return Err(ParseDiagnostic {
            offset: bad,
            message: "non-ASCII input".into(),
            expected: vec![],
        });
    }
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.diagnostic("trailing input", vec!["end of input"]));
    }
    Ok(expr)
}

/// Canonical fully parenthesized rendering of an expression.
pub fn format(f: &AnalyticMap) -> String {
    f.to_string()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    /// Diagnostic at the current position; at end of input the offset is
    /// clamped back into the last token so it always lands inside the text.
    fn diagnostic(&self, message: &str, expected: Vec<&'static str>) -> ParseDiagnostic {
        let mut offset = self.pos;
        if offset >= self.src.len() {
            offset = self.src.len().saturating_sub(1);
            while offset > 0 && self.src[offset].is_ascii_whitespace() {
                offset -= 1;
            }
        }
        ParseDiagnostic {
            offset,
            message: message.into(),
            expected,
        }
    }

    fn diagnostic_at(&self, offset: usize, message: &str) -> ParseDiagnostic {
        ParseDiagnostic {
            offset,
            message: message.into(),
            expected: vec![],
        }
    }

    fn expect(&mut self, byte: u8, name: &'static str) -> Result<(), ParseDiagnostic> {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.diagnostic(
                &format!("expected '{}'", byte as char),
                vec![name],
            ))
        }
    }

    fn expr(&mut self) -> Result<AnalyticMap, ParseDiagnostic> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<AnalyticMap, ParseDiagnostic> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(self.factor()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    acc = acc.div(self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<AnalyticMap, ParseDiagnostic> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.factor()?;
            // fold literal negation so "-0.5" round-trips as a constant
            return Ok(match inner {
                AnalyticMap::Const(c) => AnalyticMap::Const(-c),
                other => AnalyticMap::real(0.0).sub(other),
            });
        }
        let base = self.base()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.real_literal("real exponent")?;
            return Ok(base.pow(exponent));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<AnalyticMap, ParseDiagnostic> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let value = self.real_literal("number")?;
                Ok(AnalyticMap::real(value))
            }
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            _ => Err(self.diagnostic(
                "expected expression",
                vec!["'z'", "number", "'i'", "'('", "function name"],
            )),
        }
    }

    fn identifier(&mut self) -> Result<AnalyticMap, ParseDiagnostic> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_alphanumeric() || c == b'_')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match name {
            "z" => Ok(AnalyticMap::Var),
            "i" => Ok(AnalyticMap::constant(Complex64::new(0.0, 1.0))),
            "l" => {
                self.skip_ws();
                if self.peek() != Some(b'(') {
                    return Ok(AnalyticMap::halfplane());
                }
                self.pos += 1;
                let arg = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(AnalyticMap::halfplane().compose(arg))
            }
            "lrot" => {
                let turns = self.parameter()?;
                self.apply_or_leaf(AnalyticMap::halfplane_rot(UnitComplex::from_turns(turns)))
            }
            "rot" => {
                let turns = self.parameter()?;
                self.apply_or_leaf(AnalyticMap::rotation(UnitComplex::from_turns(turns)))
            }
            "lens" => {
                let offset = self.next_token_offset();
                let alpha = self.parameter()?;
                let alpha = LensParameter::new(alpha).map_err(|e| {
                    self.diagnostic_at(offset + 1, &e.to_string())
                })?;
                self.apply_or_leaf(AnalyticMap::lens(alpha))
            }
            "dilate" => {
                let factor = self.parameter()?;
                self.apply_or_leaf(AnalyticMap::dilation(factor))
            }
            "compose" => {
                self.expect(b'(', "'('")?;
                let outer = self.expr()?;
                self.expect(b',', "','")?;
                let inner = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(outer.compose(inner))
            }
            "iterate" => {
                self.expect(b'(', "'('")?;
                let body = self.expr()?;
                self.expect(b',', "','")?;
                let count = self.integer_literal()?;
                self.expect(b')', "')'")?;
                Ok(AnalyticMap::Iterate(Arc::new(body), count))
            }
            _ => Err(self.diagnostic_at(start, &format!("unknown identifier '{name}'"))),
        }
    }

    /// `'(' real ')'` — the parameter group of lrot/rot/lens/dilate.
    fn parameter(&mut self) -> Result<f64, ParseDiagnostic> {
        self.expect(b'(', "'('")?;
        let value = self.real_literal("real parameter")?;
        self.expect(b')', "')'")?;
        Ok(value)
    }

    /// Parses a builtin's applied argument if one follows; a bare builtin
    /// denotes the map itself.
    fn apply_or_leaf(&mut self, builtin: AnalyticMap) -> Result<AnalyticMap, ParseDiagnostic> {
        self.skip_ws();
        if self.peek() != Some(b'(') {
            return Ok(builtin);
        }
        self.pos += 1;
        let arg = self.expr()?;
        self.expect(b')', "')'")?;
        Ok(builtin.compose(arg))
    }

    fn next_token_offset(&mut self) -> usize {
        self.skip_ws();
        self.pos
    }

    fn real_literal(&mut self, what: &'static str) -> Result<f64, ParseDiagnostic> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.pos += 1;
            }
        }
        if self.pos == digits_start {
            return Err(self.diagnostic(&format!("expected {what}"), vec![what]));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map_err(|_| self.diagnostic_at(start, &format!("invalid {what} '{text}'")))
    }

    fn integer_literal(&mut self) -> Result<usize, ParseDiagnostic> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.diagnostic("expected integer", vec!["integer"]));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<usize>()
            .map_err(|_| self.diagnostic_at(start, &format!("invalid integer '{text}'")))
    }
}
