//! Textual element syntax shared with the CLI session format.
//!
//! Integers are decimal literals, rationals `p/q`, polynomials `3*t^2 - 1`,
//! free-algebra elements `2*x*y - y*x + 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::{CoeffError, Ring, RingElement, RingKind};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(input: &str) -> Result<Vec<Tok>, CoeffError> {
    let mut toks = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Num(s.parse().expect("digits")));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Name(s));
            }
            '+' => {
                toks.push(Tok::Plus);
                chars.next();
            }
            '-' => {
                toks.push(Tok::Minus);
                chars.next();
            }
            '*' => {
                toks.push(Tok::Star);
                chars.next();
            }
            '/' => {
                toks.push(Tok::Slash);
                chars.next();
            }
            '^' => {
                toks.push(Tok::Caret);
                chars.next();
            }
            '(' => {
                toks.push(Tok::LParen);
                chars.next();
            }
            ')' => {
                toks.push(Tok::RParen);
                chars.next();
            }
            _ => return Err(CoeffError::Parse(format!("unexpected character '{}'", c))),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    ring: &'a Ring,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<RingElement, CoeffError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                self.term()?.neg()
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RingElement, CoeffError> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RingElement, CoeffError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            match self.bump() {
                Some(Tok::Num(n)) => {
                    let mut out = RingElement::one(self.ring);
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| CoeffError::Parse("exponent too large".into()))?;
                    for _ in 0..e {
                        out = out.mul(&base)?;
                    }
                    Ok(out)
                }
                _ => Err(CoeffError::Parse("expected exponent after '^'".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<RingElement, CoeffError> {
        match self.bump() {
            Some(Tok::Num(n)) => {
                // rational literal p/q binds tighter than multiplication
                if matches!(self.peek(), Some(Tok::Slash)) {
                    let save = self.pos;
                    self.bump();
                    if let Some(Tok::Num(d)) = self.peek().cloned() {
                        self.bump();
                        if self.ring.kind() == &RingKind::Integers {
                            return Err(CoeffError::Parse(
                                "fraction literal in the integer ring".into(),
                            ));
                        }
                        if d == BigInt::from(0) {
                            return Err(CoeffError::Parse("division by zero".into()));
                        }
                        return Ok(RingElement::from_rational(
                            self.ring,
                            BigRational::new(n, d),
                        ));
                    }
                    self.pos = save;
                }
                Ok(RingElement::from_rational(
                    self.ring,
                    BigRational::from_integer(n),
                ))
            }
            Some(Tok::Name(name)) => match self.ring.kind() {
                RingKind::PolynomialsQ | RingKind::RationalFunctionsQ => {
                    if name == "t" {
                        Ok(RingElement::generator(self.ring, 0))
                    } else {
                        Err(CoeffError::Parse(format!("unknown variable '{}'", name)))
                    }
                }
                RingKind::FreeAlgebraQ { generators } => generators
                    .iter()
                    .position(|g| *g == name)
                    .map(|i| RingElement::generator(self.ring, i))
                    .ok_or_else(|| CoeffError::Parse(format!("unknown generator '{}'", name))),
                _ => Err(CoeffError::Parse(format!(
                    "variable '{}' in the ring {}",
                    name, self.ring
                ))),
            },
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(CoeffError::Parse("missing ')'".into())),
                }
            }
            Some(Tok::Minus) => Ok(self.atom()?.neg()),
            other => Err(CoeffError::Parse(format!("unexpected token {:?}", other))),
        }
    }
}

/// Parse one ring element in the session syntax.
pub fn parse_element(ring: &Ring, input: &str) -> Result<RingElement, CoeffError> {
    let toks = tokenize(input)?;
    if toks.is_empty() {
        return Err(CoeffError::Parse("empty element".into()));
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        ring,
    };
    let e = p.expr()?;
    if p.pos != toks.len() {
        return Err(CoeffError::Parse(format!(
            "trailing input at token {}",
            p.pos
        )));
    }
    let _ = BigRational::one();
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_ring() {
        let z = Ring::integers();
        assert_eq!(parse_element(&z, "-42").unwrap(), z.from_i64(-42));

        let q = Ring::rationals();
        assert_eq!(parse_element(&q, "3/2").unwrap().to_string(), "3/2");
        assert_eq!(parse_element(&q, "1/2 + 1/2").unwrap(), q.one());

        let p = Ring::polynomials();
        let e = parse_element(&p, "3*t^2 - 1").unwrap();
        assert_eq!(e.to_string(), "3*t^2 - 1");

        let f = Ring::free_algebra(vec!["x", "y"]);
        let e = parse_element(&f, "2*x*y - y*x + 1").unwrap();
        assert_eq!(e.to_string(), "1 + 2*x*y - y*x");
        // round trip through display
        assert_eq!(parse_element(&f, &e.to_string()).unwrap(), e);
    }

    #[test]
    fn rejects_garbage() {
        let z = Ring::integers();
        assert!(parse_element(&z, "1/2").is_err());
        assert!(parse_element(&z, "x").is_err());
        assert!(parse_element(&z, "3 +").is_err());
    }
}
