//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*      -- "/" only by a nonzero constant
//! unary  := "-" unary | power
//! power  := atom ("^" integer)?
//! atom   := integer | identifier | "(" expr ")"
//! ```
//!
//! Rational literals such as `1/2` fall out of the `/` rule. Decimal
//! literals are rejected.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Poly, Vars};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("column {column}: non-rational literal `{literal}` (write it as p/q)")]
    NonRational { column: usize, literal: String },
    #[error("column {column}: unbound identifier `{name}`")]
    Unbound { column: usize, name: String },
}

impl ParseError {
    pub fn column(&self) -> usize {
        match self {
            ParseError::Syntax { column, .. }
            | ParseError::NonRational { column, .. }
            | ParseError::Unbound { column, .. } => *column,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let column = self.src[..start].chars().count() + 1;
        if start >= bytes.len() {
            return Ok((Tok::End, column));
        }
        let b = bytes[start];
        if b.is_ascii_digit() {
            let mut end = start;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            let mut lit_end = end;
            if lit_end < bytes.len() && (bytes[lit_end] == b'.' || bytes[lit_end] == b'e' || bytes[lit_end] == b'E') {
                lit_end += 1;
                while lit_end < bytes.len()
                    && (bytes[lit_end].is_ascii_alphanumeric() || bytes[lit_end] == b'.' || bytes[lit_end] == b'-')
                {
                    lit_end += 1;
                }
                return Err(ParseError::NonRational {
                    column,
                    literal: self.src[start..lit_end].to_string(),
                });
            }
            self.pos = end;
            let value = self.src[start..end].parse().expect("digits");
            return Ok((Tok::Int(value), column));
        }
        if b == b'.' {
            return Err(ParseError::NonRational {
                column,
                literal: self.src[start..].split_whitespace().next().unwrap_or(".").to_string(),
            });
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((Tok::Ident(self.src[start..end].to_string()), column));
        }
        let c = self.src[start..].chars().next().expect("nonempty");
        if "+-*/^()".contains(c) {
            self.pos += c.len_utf8();
            return Ok((Tok::Op(c), column));
        }
        Err(ParseError::Syntax {
            column,
            message: format!("unexpected character `{c}`"),
        })
    }
}

struct Parser<'a, F> {
    lexer: Lexer<'a>,
    tok: Tok,
    column: usize,
    vars: &'a Vars,
    lookup: &'a F,
}

impl<'a, F: Fn(&str) -> Option<Poly>> Parser<'a, F> {
    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, column) = self.lexer.next()?;
        self.tok = tok;
        self.column = column;
        Ok(())
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            column: self.column,
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.tok {
                Tok::Op('+') => {
                    self.advance()?;
                    acc = &acc + &self.term()?;
                }
                Tok::Op('-') => {
                    self.advance()?;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.tok {
                Tok::Op('*') => {
                    self.advance()?;
                    acc = &acc * &self.unary()?;
                }
                Tok::Op('/') => {
                    self.advance()?;
                    let column = self.column;
                    let den = self.unary()?;
                    let c = den.constant_term();
                    if !den.is_constant() || c.is_zero() {
                        return Err(ParseError::Syntax {
                            column,
                            message: "division only by a nonzero constant".into(),
                        });
                    }
                    acc = acc.scale(&c.recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
        if self.tok == Tok::Op('-') {
            self.advance()?;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        if self.tok != Tok::Op('^') {
            return Ok(base);
        }
        self.advance()?;
        let Tok::Int(k) = &self.tok else {
            return self.syntax("exponent must be a positive integer");
        };
        let k: u32 = match u32::try_from(k.clone()) {
            Ok(k) if k > 0 && k <= 64 => k,
            _ => return self.syntax("exponent must be a positive integer (at most 64)"),
        };
        self.advance()?;
        Ok(base.pow(k))
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Int(n) => {
                self.advance()?;
                Ok(Poly::constant(self.vars, Rational::from_integer(n)))
            }
            Tok::Ident(name) => {
                let column = self.column;
                let value = (self.lookup)(&name).ok_or(ParseError::Unbound { column, name })?;
                self.advance()?;
                Ok(value)
            }
            Tok::Op('(') => {
                self.advance()?;
                let inner = self.expr()?;
                if self.tok != Tok::Op(')') {
                    return self.syntax("expected `)`");
                }
                self.advance()?;
                Ok(inner)
            }
            Tok::Op(c) => {
                self.tok = Tok::Op(c);
                self.syntax(format!("unexpected `{c}`"))
            }
            Tok::End => self.syntax("unexpected end of expression"),
        }
    }
}

/// Parses `text` into a polynomial over `vars`, resolving identifiers with
/// `lookup` (variables and bound parameters alike).
pub fn parse_expression<F>(text: &str, vars: &Vars, lookup: &F) -> Result<Poly, ParseError>
where
    F: Fn(&str) -> Option<Poly>,
{
    let mut parser = Parser {
        lexer: Lexer { src: text, pos: 0 },
        tok: Tok::End,
        column: 1,
        vars,
        lookup,
    };
    parser.advance()?;
    let value = parser.expr()?;
    if parser.tok != Tok::End {
        return parser.syntax("trailing input");
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::vars;

    fn parse(s: &str) -> Result<Poly, ParseError> {
        Poly::parse(s, &vars(&["x", "y"]))
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("-x^2").unwrap().to_string(), "-x^2");
        assert_eq!(parse("1/2*x + 3").unwrap().to_string(), "1/2*x + 3");
        assert_eq!(parse("(x + y)^2 - 2*x*y").unwrap().to_string(), "x^2 + y^2");
        assert_eq!(parse("x - -y").unwrap().to_string(), "x + y");
    }

    #[test]
    fn errors_carry_columns() {
        assert_eq!(
            parse("x + 0.5"),
            Err(ParseError::NonRational {
                column: 5,
                literal: "0.5".into()
            })
        );
        assert_eq!(
            parse("x + q").unwrap_err(),
            ParseError::Unbound {
                column: 5,
                name: "q".into()
            }
        );
        assert!(matches!(parse("x +"), Err(ParseError::Syntax { column: 4, .. })));
        assert!(matches!(parse("x / y"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x^0"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(x"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("2x"), Err(ParseError::Syntax { .. })));
    }
}
