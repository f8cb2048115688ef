//! The expression sublanguage over named matrices: `*` (composition), `+`,
//! `-`, `dsum(a, b)`, and `inv(name)` for formal inverses of S elements.
//! Maximal products of plain tokens fold through the roof calculus; sums and
//! mixed products use the triple operations.

use cohn_core::localization::{
    from_plain, invert_s, triple_add, triple_compose, triple_dsum, triple_negate, zigzag_normalize,
    LocTriple, ZigToken, ZigZag,
};

use crate::session::Session;

#[derive(Debug, Clone)]
pub enum Expr {
    Atom(ZigToken),
    Mul(Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    DSum(Box<Expr>, Box<Expr>),
}

#[derive(Debug)]
pub struct ExprError(pub String);

impl std::fmt::Display for ExprError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Inv,
    DSum,
    Star,
    Plus,
    Minus,
    LParen,
    RParen,
    Comma,
}

fn tokenize(input: &str) -> Result<Vec<Tok>, ExprError> {
    let mut out = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '*' => {
                out.push(Tok::Star);
                chars.next();
            }
            '+' => {
                out.push(Tok::Plus);
                chars.next();
            }
            '-' => {
                out.push(Tok::Minus);
                chars.next();
            }
            '(' => {
                out.push(Tok::LParen);
                chars.next();
            }
            ')' => {
                out.push(Tok::RParen);
                chars.next();
            }
            ',' => {
                out.push(Tok::Comma);
                chars.next();
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut name = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        name.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(match name.as_str() {
                    "inv" => Tok::Inv,
                    "dsum" => Tok::DSum,
                    _ => Tok::Name(name),
                });
            }
            other => return Err(ExprError(format!("unexpected character '{}'", other))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    session: &'a Session,
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

    fn expect(&mut self, t: Tok) -> Result<(), ExprError> {
        match self.bump() {
            Some(got) if got == t => Ok(()),
            got => Err(ExprError(format!("expected {:?}, got {:?}", t, got))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        match self.bump() {
            Some(Tok::Name(name)) => {
                if let Some(m) = self.session.matrices.get(&name) {
                    Ok(Expr::Atom(ZigToken::Forward(m.clone())))
                } else if let Some(k) = self.session.s_index(&name) {
                    let m = self.session.sset.element(k).unwrap().clone();
                    Ok(Expr::Atom(ZigToken::Forward(m)))
                } else {
                    Err(ExprError(format!("unknown name '{}'", name)))
                }
            }
            Some(Tok::Inv) => {
                self.expect(Tok::LParen)?;
                let name = match self.bump() {
                    Some(Tok::Name(n)) => n,
                    got => return Err(ExprError(format!("inv expects an S name, got {:?}", got))),
                };
                self.expect(Tok::RParen)?;
                let k = self
                    .session
                    .s_index(&name)
                    .ok_or_else(|| ExprError(format!("'{}' is not an S element", name)))?;
                Ok(Expr::Atom(ZigToken::InverseOfS(k)))
            }
            Some(Tok::DSum) => {
                self.expect(Tok::LParen)?;
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                let b = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::DSum(Box::new(a), Box::new(b)))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            got => Err(ExprError(format!("unexpected token {:?}", got))),
        }
    }
}

pub fn parse_expr(session: &Session, input: &str) -> Result<Expr, ExprError> {
    let toks = tokenize(input)?;
    if toks.is_empty() {
        return Err(ExprError("empty expression".into()));
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        session,
    };
    let e = p.expr()?;
    if p.pos != toks.len() {
        return Err(ExprError("trailing input in expression".into()));
    }
    Ok(e)
}

/// A pure product of atoms, as a word in application order.
pub fn as_word(expr: &Expr) -> Option<Vec<ZigToken>> {
    match expr {
        Expr::Atom(t) => Some(vec![t.clone()]),
        Expr::Mul(a, b) => {
            // a * b applies b first
            let mut w = as_word(b)?;
            w.extend(as_word(a)?);
            Some(w)
        }
        _ => None,
    }
}

pub fn eval(session: &Session, expr: &Expr) -> cohn_core::Result<LocTriple> {
    if let Some(tokens) = as_word(expr) {
        return zigzag_normalize(&session.sset, &ZigZag { tokens });
    }
    match expr {
        Expr::Atom(ZigToken::Forward(m)) => from_plain(&session.sset, m),
        Expr::Atom(ZigToken::InverseOfS(k)) => invert_s(&session.sset, *k),
        Expr::Mul(a, b) => triple_compose(&eval(session, a)?, &eval(session, b)?),
        Expr::Add(a, b) => triple_add(&eval(session, a)?, &eval(session, b)?),
        Expr::Sub(a, b) => triple_add(&eval(session, a)?, &triple_negate(&eval(session, b)?)),
        Expr::DSum(a, b) => triple_dsum(&eval(session, a)?, &eval(session, b)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::parse_session;
    use cohn_core::localization::LocFunctor;

    #[test]
    fn words_and_sums_evaluate() {
        let s = parse_session("ring Z\ns s0 = [[2]]\nmat f = [[3]]\n").unwrap();
        let functor = LocFunctor::fractions(s.sset.clone()).unwrap();
        let e = parse_expr(&s, "inv(s0)*s0").unwrap();
        assert!(as_word(&e).is_some());
        let t = eval(&s, &e).unwrap();
        assert!(functor.evaluate(&t).unwrap().is_identity());

        let e = parse_expr(&s, "inv(s0) + inv(s0)").unwrap();
        let t = eval(&s, &e).unwrap();
        assert!(functor.evaluate(&t).unwrap().is_identity());

        let e = parse_expr(&s, "f - f").unwrap();
        let t = eval(&s, &e).unwrap();
        assert!(functor.evaluate(&t).unwrap().is_zero());

        let e = parse_expr(&s, "dsum(f, inv(s0))").unwrap();
        let t = eval(&s, &e).unwrap();
        assert_eq!(functor.evaluate(&t).unwrap().to_string(), "[[3,0],[0,1/2]]");

        assert!(parse_expr(&s, "nosuch").is_err());
        assert!(parse_expr(&s, "inv(f)").is_err());
    }
}
