//! Recursive-descent parser for the expression grammar.
//!
//! Precedence from loosest to tightest: `+ -`, `* /`, unary `-`, `^`.
//! Binary operators are left-associative except `^`, which is
//! right-associative. Exponents must fold to a rational constant.

use num_bigint::BigInt;
use thiserror::Error;

use super::expr::{Expr, Func, Symbol, Q, RESERVED};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared symbol `{name}` at {pos}")]
    Undeclared { pos: usize, name: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next_token(&mut self) -> Result<(usize, Tok), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        if c.is_ascii_alphabetic() || c == b'_' {
            while self
                .src
                .get(self.pos)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
            {
                self.pos += 1;
            }
            let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok((start, Tok::Ident(word.to_string())));
        }
        if c.is_ascii_digit() {
            while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                self.pos += 1;
            }
            if self.src.get(self.pos) == Some(&b'.') {
                return Err(ParseError::Syntax {
                    pos: self.pos,
                    msg: "decimal literals are not allowed; write p/q".into(),
                });
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok((start, Tok::Int(digits.parse().unwrap())));
        }
        self.pos += 1;
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", c as char),
                })
            }
        };
        Ok((start, tok))
    }
}

/// Parser bound to a parameter declaration list.
pub struct Parser<'p> {
    params: &'p [String],
    toks: Vec<(usize, Tok)>,
    at: usize,
}

/// Parses `text` with `t`, `x`, `xdot` and the given parameters in scope.
pub fn parse(text: &str, params: &[String]) -> Result<Expr, ParseError> {
    Parser::new(text, params)?.parse_all()
}

/// Parses with no parameters declared.
pub fn parse_plain(text: &str) -> Result<Expr, ParseError> {
    parse(text, &[])
}

impl<'p> Parser<'p> {
    pub fn new(text: &str, params: &'p [String]) -> Result<Self, ParseError> {
        let mut lexer = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut toks = Vec::new();
        loop {
            let (pos, tok) = lexer.next_token()?;
            let end = tok == Tok::End;
            toks.push((pos, tok));
            if end {
                break;
            }
        }
        Ok(Parser { params, toks, at: 0 })
    }

    pub fn parse_all(mut self) -> Result<Expr, ParseError> {
        let e = self.sum()?;
        match self.peek() {
            Tok::End => Ok(e),
            other => Err(self.err(format!("unexpected {}", describe(other)))),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, msg: String) -> ParseError {
        ParseError::Syntax { pos: self.pos(), msg }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.product()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.product()?;
            acc = if c == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            acc = if c == '*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.pos();
        let exponent = self.unary()?;
        let Expr::Num(n) = exponent else {
            return Err(ParseError::Syntax {
                pos: at,
                msg: "exponent must be a rational constant".into(),
            });
        };
        if matches!(&base, Expr::Num(b) if num_traits::Zero::is_zero(b))
            && num_traits::Signed::is_negative(&n)
        {
            return Err(ParseError::Syntax {
                pos: at,
                msg: "zero raised to a negative power".into(),
            });
        }
        Ok(Expr::pow(base, n))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::Num(Q::from_integer(n))),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let f = match name.as_str() {
                        "sqrt" => None,
                        other => Some(Func::from_name(other).ok_or_else(|| {
                            ParseError::Syntax {
                                pos,
                                msg: format!("unknown function `{other}`"),
                            }
                        })?),
                    };
                    self.bump();
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(match f {
                        Some(f) => Expr::fun(f, arg),
                        None => Expr::sqrt(arg),
                    });
                }
                self.symbol(&name, pos)
            }
            other => Err(ParseError::Syntax {
                pos,
                msg: format!("expected an operand, found {}", describe(&other)),
            }),
        }
    }

    fn symbol(&self, name: &str, pos: usize) -> Result<Expr, ParseError> {
        if Func::from_name(name).is_some() || name == "sqrt" {
            return Err(ParseError::Syntax {
                pos,
                msg: format!("function `{name}` used without an argument"),
            });
        }
        // xddot is internal; only t, x, xdot are visible to the grammar.
        if matches!(name, "t" | "x" | "xdot") || self.params.iter().any(|p| p == name) {
            return Ok(Expr::Sym(Symbol::new(name)));
        }
        Err(ParseError::Undeclared {
            pos,
            name: name.to_string(),
        })
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.bump() {
            Tok::RParen => Ok(()),
            other => Err(ParseError::Syntax {
                pos: self.toks[self.at.saturating_sub(1)].0,
                msg: format!("expected `)`, found {}", describe(&other)),
            }),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Int(n) => format!("number `{n}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Validates a parameter name: identifier syntax, not reserved, not a function.
pub fn check_param_name(name: &str) -> Result<(), String> {
    let mut chars = name.chars();
    let ok_start = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    if !ok_start || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("`{name}` is not a valid identifier"));
    }
    if RESERVED.contains(&name) {
        return Err(format!("`{name}` is reserved"));
    }
    if Func::from_name(name).is_some() || name == "sqrt" {
        return Err(format!("`{name}` is a function name"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::expr::q;

    fn p(s: &str) -> Expr {
        parse(s, &["a".into(), "lam".into(), "k".into()]).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("2^3^2"), Expr::int(512));
        assert_eq!(p("-2^2"), Expr::int(-4));
        assert_eq!(p("8/4/2"), Expr::int(1));
        assert_eq!(p("1 - 2 - 3"), Expr::int(-4));
        assert_eq!(p("2*3^2"), Expr::int(18));
        assert_eq!(p("x^-1"), Expr::powi(Expr::x(), -1));
    }

    #[test]
    fn rationals_and_sqrt() {
        assert_eq!(p("3/4"), Expr::rat(3, 4));
        assert_eq!(p("sqrt(x)"), Expr::pow(Expr::x(), q(1, 2)));
        assert_eq!(p("x^(1/2)"), p("sqrt(x)"));
        assert_eq!(p("0"), Expr::zero());
    }

    #[test]
    fn lagrangian_text() {
        let e = p("xdot^2/(2*(lam*x^2+1))");
        assert!(e.contains(&Symbol::v()));
        assert!(e.contains(&Symbol::new("lam")));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("x + y", &[]).unwrap_err();
        assert_eq!(
            err,
            ParseError::Undeclared {
                pos: 4,
                name: "y".into()
            }
        );
        assert!(matches!(parse("x +", &[]), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("(x", &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x^t", &[]), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("1.5", &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("foo(x)", &[]), Err(ParseError::Syntax { .. })));
        assert!(parse("xddot", &[]).is_err());
    }

    #[test]
    fn param_names() {
        assert!(check_param_name("lam").is_ok());
        assert!(check_param_name("xdot").is_err());
        assert!(check_param_name("exp").is_err());
        assert!(check_param_name("2k").is_err());
    }
}
