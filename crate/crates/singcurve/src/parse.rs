//! A small expression parser for polynomial and rational-function literals
//! such as `-lambda`, `(2*lambda+1)/(lambda-3)` or `2*i/z^2`.

use crate::error::{Error, Result};
use crate::ratfun::{Poly, RatFun};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || ((chars[i] == 'e' || chars[i] == 'E')
                            && i + 1 < chars.len()
                            && (chars[i + 1].is_ascii_digit()
                                || chars[i + 1] == '+'
                                || chars[i + 1] == '-'))
                        || ((chars[i] == '+' || chars[i] == '-')
                            && i > start
                            && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
                {
                    i += 1;
                }
                out.push(Token::Number(chars[start..i].iter().collect()));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(Error::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a, S: Scalar> {
    tokens: Vec<Token>,
    pos: usize,
    var: &'a str,
    _marker: std::marker::PhantomData<S>,
}

impl<'a, S: Scalar> Parser<'a, S> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<RatFun<S>> {
        let mut acc = self.term()?;
        while let Some(tok) = self.peek() {
            match tok {
                Token::Plus => {
                    self.next();
                    acc = acc.add(&self.term()?)?;
                }
                Token::Minus => {
                    self.next();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFun<S>> {
        let mut acc = self.factor()?;
        while let Some(tok) = self.peek() {
            match tok {
                Token::Star => {
                    self.next();
                    acc = acc.mul(&self.factor()?)?;
                }
                Token::Slash => {
                    self.next();
                    acc = acc.div(&self.factor()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RatFun<S>> {
        let mut negate = false;
        while let Some(tok) = self.peek() {
            match tok {
                Token::Minus => {
                    negate = !negate;
                    self.next();
                }
                Token::Plus => {
                    self.next();
                }
                _ => break,
            }
        }
        let mut base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.next();
            let exp = match self.next() {
                Some(Token::Number(n)) => n
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad exponent `{n}`")))?,
                other => return Err(Error::Parse(format!("expected exponent, got {other:?}"))),
            };
            let mut acc = RatFun::one();
            for _ in 0..exp {
                acc = acc.mul(&base)?;
            }
            base = acc;
        }
        Ok(if negate { base.neg() } else { base })
    }

    fn atom(&mut self) -> Result<RatFun<S>> {
        match self.next() {
            Some(Token::Number(n)) => Ok(RatFun::constant(S::from_decimal_str(&n)?)),
            Some(Token::Ident(name)) => {
                if name == self.var {
                    Ok(RatFun::var())
                } else if name == "i" {
                    let i = S::parse_literal("i")?;
                    Ok(RatFun::constant(i))
                } else {
                    Err(Error::Parse(format!(
                        "unknown identifier `{name}` (variable is `{}`)",
                        self.var
                    )))
                }
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    other => Err(Error::Parse(format!("expected `)`, got {other:?}"))),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses a rational-function literal in the named variable.
pub fn parse_ratfun<S: Scalar>(src: &str, var: &str) -> Result<RatFun<S>> {
    let tokens = tokenize(src)?;
    let mut p = Parser::<S> {
        tokens,
        pos: 0,
        var,
        _marker: std::marker::PhantomData,
    };
    let f = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Parse(format!("trailing input in `{src}`")));
    }
    Ok(f)
}

/// Parses a polynomial literal; rejects genuine denominators.
pub fn parse_poly<S: Scalar>(src: &str, var: &str) -> Result<Poly<S>> {
    let f = parse_ratfun::<S>(src, var)?;
    if !f.is_polynomial() && !f.is_zero() {
        return Err(Error::Parse(format!("`{src}` is not a polynomial")));
    }
    let inv = f.den().coeff(0).inv()?;
    Ok(f.num().scale(&inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::P1Point;
    use crate::scalar::ExactScalar;

    #[test]
    fn parses_rational_expressions() {
        let f = parse_ratfun::<ExactScalar>("(2*lambda+1)/(lambda-3)", "lambda").unwrap();
        let v = f.eval(&ExactScalar::from_int(4)).unwrap();
        assert_eq!(v, ExactScalar::from_int(9));
        let g = parse_ratfun::<ExactScalar>("-lambda^2 + 1/2", "lambda").unwrap();
        assert_eq!(
            g.eval(&ExactScalar::from_int(2)).unwrap(),
            ExactScalar::from_ratio(-7, 2)
        );
        let h = parse_ratfun::<ExactScalar>("i/z", "z").unwrap();
        assert_eq!(h.order_at(&P1Point::finite(ExactScalar::from_int(0))), Some(-1));
    }

    #[test]
    fn polynomial_guard() {
        assert!(parse_poly::<ExactScalar>("1/w", "w").is_err());
        let p = parse_poly::<ExactScalar>("w^2 - 2*w + 1", "w").unwrap();
        assert_eq!(p.eval(&ExactScalar::from_int(3)), ExactScalar::from_int(4));
    }
}
