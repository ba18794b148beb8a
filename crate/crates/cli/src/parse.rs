//! Group-spec grammar.
//!
//! ```text
//! expr := prod ('x' prod)*
//! prod := atom ('*' atom)*
//! atom := 'F' int | 'Z^' int | 'Z/' int | '(' expr ')'
//! ```
//!
//! `*` binds tighter than `x`; chains of the same operator are flattened.
//! Spaces are ignored.

use cayleylab::groups::DEFAULT_MAX_DEPTH;
use cayleylab::GroupSpec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("group spec parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected a positive integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        match text.parse::<u64>() {
            Ok(0) => self.err(start, "integer must be positive"),
            Ok(v) => Ok(v),
            Err(_) => self.err(start, format!("integer {text} is too large")),
        }
    }

    fn small_int(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        let v = self.int()?;
        u32::try_from(v).or_else(|_| self.err(start, format!("rank {v} is too large")))
    }

    fn expr(&mut self) -> Result<GroupSpec, ParseError> {
        let mut factors = vec![self.prod()?];
        while self.eat(b'x') {
            factors.push(self.prod()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            GroupSpec::DirectProduct(factors)
        })
    }

    fn prod(&mut self) -> Result<GroupSpec, ParseError> {
        let mut factors = vec![self.atom()?];
        while self.eat(b'*') {
            factors.push(self.atom()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            GroupSpec::FreeProduct(factors)
        })
    }

    fn atom(&mut self) -> Result<GroupSpec, ParseError> {
        let at = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            Some(b'F') => {
                self.pos += 1;
                Ok(GroupSpec::Free(self.small_int()?))
            }
            Some(b'Z') => {
                self.pos += 1;
                match self.src.get(self.pos) {
                    Some(b'^') => {
                        self.pos += 1;
                        Ok(GroupSpec::FreeAbelian(self.small_int()?))
                    }
                    Some(b'/') => {
                        self.pos += 1;
                        let m = self.int()?;
                        if m < 2 {
                            return self.err(at, "cyclic order must be at least 2");
                        }
                        Ok(GroupSpec::Cyclic(m))
                    }
                    _ => self.err(at, "bare Z is not supported; write Z^1 or Z/<m>"),
                }
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    let p = self.pos;
                    return self.err(p, "expected ')'");
                }
                Ok(inner)
            }
            Some(c) => self.err(
                at,
                format!("unsupported construct starting with '{}'", c as char),
            ),
            None => self.err(at, "unexpected end of input"),
        }
    }
}

pub fn parse_group_spec(text: &str) -> Result<GroupSpec, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let spec = p.expr()?;
    if let Some(c) = p.peek() {
        return p.err(p.pos, format!("unexpected '{}'", c as char));
    }
    spec.validate(DEFAULT_MAX_DEPTH).map_err(|e| ParseError {
        offset: 0,
        message: e.to_string(),
    })?;
    Ok(spec)
}
