//! Ring elements in canonical form.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{CoeffError, Ring, RingKind};

/// A word in the generators of a free algebra, as generator indices.
pub type Word = Vec<u16>;

/// Canonical payloads, one per ring kind.
///
/// Polynomials carry no trailing zero coefficients; rational functions have a
/// monic denominator coprime to the numerator; free-algebra sums carry no zero
/// coefficients and keep their words in length-then-lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(BigInt),
    Rat(BigRational),
    Poly(Vec<BigRational>),
    RatFun {
        num: Vec<BigRational>,
        den: Vec<BigRational>,
    },
    Free(Vec<(Word, BigRational)>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    ring: Ring,
    value: Value,
}

fn trim_poly(mut coeffs: Vec<BigRational>) -> Vec<BigRational> {
    while coeffs.last().map_or(false, |c| c.is_zero()) {
        coeffs.pop();
    }
    coeffs
}

fn poly_add(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let zero = BigRational::zero();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).unwrap_or(&zero);
        let y = b.get(i).unwrap_or(&zero);
        out.push(x + y);
    }
    trim_poly(out)
}

fn poly_neg(a: &[BigRational]) -> Vec<BigRational> {
    a.iter().map(|c| -c).collect()
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim_poly(out)
}

/// Quotient and remainder of polynomial division over Q.
fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut rem: Vec<BigRational> = a.to_vec();
    let mut quot = vec![BigRational::zero(); a.len().saturating_sub(b.len() - 1)];
    let lead = b.last().unwrap();
    while rem.len() >= b.len() {
        let k = rem.len() - b.len();
        let c = rem.last().unwrap() / lead;
        if !c.is_zero() {
            quot[k] = c.clone();
            for (i, bc) in b.iter().enumerate() {
                let v = &rem[k + i] - &c * bc;
                rem[k + i] = v;
            }
        }
        rem.pop();
        rem = trim_poly(rem);
        if rem.is_empty() {
            break;
        }
    }
    (trim_poly(quot), rem)
}

fn poly_gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut x = trim_poly(a.to_vec());
    let mut y = trim_poly(b.to_vec());
    while !y.is_empty() {
        let (_, r) = poly_divmod(&x, &y);
        x = y;
        y = r;
    }
    // normalize monic
    if let Some(lead) = x.last().cloned() {
        for c in x.iter_mut() {
            *c /= &lead;
        }
    }
    x
}

fn ratfun_normalize(
    num: Vec<BigRational>,
    den: Vec<BigRational>,
) -> (Vec<BigRational>, Vec<BigRational>) {
    let num = trim_poly(num);
    let den = trim_poly(den);
    assert!(!den.is_empty(), "rational function with zero denominator");
    if num.is_empty() {
        return (Vec::new(), vec![BigRational::one()]);
    }
    let g = poly_gcd(&num, &den);
    let (mut num, _) = poly_divmod(&num, &g);
    let (mut den, _) = poly_divmod(&den, &g);
    let lead = den.last().unwrap().clone();
    for c in num.iter_mut() {
        *c /= &lead;
    }
    for c in den.iter_mut() {
        *c /= &lead;
    }
    (num, den)
}

/// Length-then-lexicographic order on words; ties broken so canonical forms
/// are unique and equality is structural.
pub(crate) fn word_cmp(a: &Word, b: &Word) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

fn free_normalize(mut terms: Vec<(Word, BigRational)>) -> Vec<(Word, BigRational)> {
    terms.sort_by(|x, y| word_cmp(&x.0, &y.0));
    let mut out: Vec<(Word, BigRational)> = Vec::with_capacity(terms.len());
    for (w, c) in terms {
        if let Some(last) = out.last_mut() {
            if last.0 == w {
                last.1 += c;
                continue;
            }
        }
        out.push((w, c));
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

impl RingElement {
    pub(crate) fn new(ring: Ring, value: Value) -> Self {
        RingElement { ring, value }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    pub fn zero(ring: &Ring) -> Self {
        let value = match ring.kind() {
            RingKind::Integers => Value::Int(BigInt::zero()),
            RingKind::Rationals => Value::Rat(BigRational::zero()),
            RingKind::PolynomialsQ => Value::Poly(Vec::new()),
            RingKind::RationalFunctionsQ => Value::RatFun {
                num: Vec::new(),
                den: vec![BigRational::one()],
            },
            RingKind::FreeAlgebraQ { .. } => Value::Free(Vec::new()),
        };
        RingElement {
            ring: ring.clone(),
            value,
        }
    }

    pub fn one(ring: &Ring) -> Self {
        Self::from_i64(ring, 1)
    }

    pub fn from_i64(ring: &Ring, n: i64) -> Self {
        let big = BigInt::from(n);
        let rat = BigRational::from_integer(big.clone());
        let value = match ring.kind() {
            RingKind::Integers => Value::Int(big),
            RingKind::Rationals => Value::Rat(rat),
            RingKind::PolynomialsQ => {
                if n == 0 {
                    Value::Poly(Vec::new())
                } else {
                    Value::Poly(vec![rat])
                }
            }
            RingKind::RationalFunctionsQ => {
                let num = if n == 0 { Vec::new() } else { vec![rat] };
                Value::RatFun {
                    num,
                    den: vec![BigRational::one()],
                }
            }
            RingKind::FreeAlgebraQ { .. } => {
                if n == 0 {
                    Value::Free(Vec::new())
                } else {
                    Value::Free(vec![(Vec::new(), rat)])
                }
            }
        };
        RingElement {
            ring: ring.clone(),
            value,
        }
    }

    pub fn from_rational(ring: &Ring, q: BigRational) -> Self {
        let value = match ring.kind() {
            RingKind::Integers => {
                assert!(q.is_integer(), "non-integral value in Z");
                Value::Int(q.to_integer())
            }
            RingKind::Rationals => Value::Rat(q),
            RingKind::PolynomialsQ => {
                if q.is_zero() {
                    Value::Poly(Vec::new())
                } else {
                    Value::Poly(vec![q])
                }
            }
            RingKind::RationalFunctionsQ => {
                let num = if q.is_zero() { Vec::new() } else { vec![q] };
                Value::RatFun {
                    num,
                    den: vec![BigRational::one()],
                }
            }
            RingKind::FreeAlgebraQ { .. } => {
                if q.is_zero() {
                    Value::Free(Vec::new())
                } else {
                    Value::Free(vec![(Vec::new(), q)])
                }
            }
        };
        RingElement {
            ring: ring.clone(),
            value,
        }
    }

    /// The polynomial `t` in Q[t] or Q(t); the generator `idx` in a free algebra.
    pub fn generator(ring: &Ring, idx: usize) -> Self {
        let value = match ring.kind() {
            RingKind::PolynomialsQ => {
                assert_eq!(idx, 0);
                Value::Poly(vec![BigRational::zero(), BigRational::one()])
            }
            RingKind::RationalFunctionsQ => {
                assert_eq!(idx, 0);
                Value::RatFun {
                    num: vec![BigRational::zero(), BigRational::one()],
                    den: vec![BigRational::one()],
                }
            }
            RingKind::FreeAlgebraQ { generators } => {
                assert!(idx < generators.len());
                Value::Free(vec![(vec![idx as u16], BigRational::one())])
            }
            _ => panic!("ring {} has no generators", ring),
        };
        RingElement {
            ring: ring.clone(),
            value,
        }
    }

    pub fn poly(ring: &Ring, coeffs: Vec<BigRational>) -> Self {
        match ring.kind() {
            RingKind::PolynomialsQ => {
                RingElement::new(ring.clone(), Value::Poly(trim_poly(coeffs)))
            }
            RingKind::RationalFunctionsQ => RingElement::new(
                ring.clone(),
                Value::RatFun {
                    num: trim_poly(coeffs),
                    den: vec![BigRational::one()],
                },
            ),
            _ => panic!("poly constructor needs a polynomial ring"),
        }
    }

    pub fn free_terms(ring: &Ring, terms: Vec<(Word, BigRational)>) -> Self {
        assert!(matches!(ring.kind(), RingKind::FreeAlgebraQ { .. }));
        RingElement::new(ring.clone(), Value::Free(free_normalize(terms)))
    }

    pub fn ratfun(ring: &Ring, num: Vec<BigRational>, den: Vec<BigRational>) -> Self {
        assert!(matches!(ring.kind(), RingKind::RationalFunctionsQ));
        let (num, den) = ratfun_normalize(num, den);
        RingElement::new(ring.clone(), Value::RatFun { num, den })
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Int(n) => n.is_zero(),
            Value::Rat(q) => q.is_zero(),
            Value::Poly(p) => p.is_empty(),
            Value::RatFun { num, .. } => num.is_empty(),
            Value::Free(t) => t.is_empty(),
        }
    }

    pub fn is_one(&self) -> bool {
        *self == RingElement::one(&self.ring)
    }

    fn check_ring(&self, other: &RingElement) -> Result<(), CoeffError> {
        if self.ring != other.ring {
            Err(self.ring.mismatch(&other.ring))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement, CoeffError> {
        self.check_ring(other)?;
        let value = match (&self.value, &other.value) {
            (Value::Int(a), Value::Int(b)) => Value::Int(a + b),
            (Value::Rat(a), Value::Rat(b)) => Value::Rat(a + b),
            (Value::Poly(a), Value::Poly(b)) => Value::Poly(poly_add(a, b)),
            (Value::RatFun { num: an, den: ad }, Value::RatFun { num: bn, den: bd }) => {
                let num = poly_add(&poly_mul(an, bd), &poly_mul(bn, ad));
                let den = poly_mul(ad, bd);
                let (num, den) = ratfun_normalize(num, den);
                Value::RatFun { num, den }
            }
            (Value::Free(a), Value::Free(b)) => {
                let mut terms = a.clone();
                terms.extend(b.iter().cloned());
                Value::Free(free_normalize(terms))
            }
            _ => unreachable!("ring checked"),
        };
        Ok(RingElement::new(self.ring.clone(), value))
    }

    pub fn neg(&self) -> RingElement {
        let value = match &self.value {
            Value::Int(a) => Value::Int(-a),
            Value::Rat(a) => Value::Rat(-a),
            Value::Poly(a) => Value::Poly(poly_neg(a)),
            Value::RatFun { num, den } => Value::RatFun {
                num: poly_neg(num),
                den: den.clone(),
            },
            Value::Free(a) => Value::Free(a.iter().map(|(w, c)| (w.clone(), -c)).collect()),
        };
        RingElement::new(self.ring.clone(), value)
    }

    pub fn sub(&self, other: &RingElement) -> Result<RingElement, CoeffError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RingElement) -> Result<RingElement, CoeffError> {
        self.check_ring(other)?;
        let value = match (&self.value, &other.value) {
            (Value::Int(a), Value::Int(b)) => Value::Int(a * b),
            (Value::Rat(a), Value::Rat(b)) => Value::Rat(a * b),
            (Value::Poly(a), Value::Poly(b)) => Value::Poly(poly_mul(a, b)),
            (Value::RatFun { num: an, den: ad }, Value::RatFun { num: bn, den: bd }) => {
                let (num, den) = ratfun_normalize(poly_mul(an, bn), poly_mul(ad, bd));
                Value::RatFun { num, den }
            }
            (Value::Free(a), Value::Free(b)) => {
                // multiplication concatenates words bilinearly
                let mut terms = Vec::with_capacity(a.len() * b.len());
                for (wa, ca) in a {
                    for (wb, cb) in b {
                        let mut w = wa.clone();
                        w.extend_from_slice(wb);
                        terms.push((w, ca * cb));
                    }
                }
                Value::Free(free_normalize(terms))
            }
            _ => unreachable!("ring checked"),
        };
        Ok(RingElement::new(self.ring.clone(), value))
    }

    /// Two-sided inverse, or None when the element is not a unit.
    pub fn try_invert(&self) -> Option<RingElement> {
        match &self.value {
            Value::Int(a) => {
                if a.is_one() || (-a).is_one() {
                    Some(self.clone())
                } else {
                    None
                }
            }
            Value::Rat(a) => {
                if a.is_zero() {
                    None
                } else {
                    Some(RingElement::new(self.ring.clone(), Value::Rat(a.recip())))
                }
            }
            Value::Poly(p) => {
                if p.len() == 1 {
                    Some(RingElement::new(
                        self.ring.clone(),
                        Value::Poly(vec![p[0].recip()]),
                    ))
                } else {
                    None
                }
            }
            Value::RatFun { num, den } => {
                if num.is_empty() {
                    None
                } else {
                    let (num, den) = ratfun_normalize(den.clone(), num.clone());
                    Some(RingElement::new(
                        self.ring.clone(),
                        Value::RatFun { num, den },
                    ))
                }
            }
            Value::Free(t) => {
                // units of Q<X> are the nonzero constants
                if t.len() == 1 && t[0].0.is_empty() {
                    Some(RingElement::new(
                        self.ring.clone(),
                        Value::Free(vec![(Vec::new(), t[0].1.recip())]),
                    ))
                } else {
                    None
                }
            }
        }
    }

    /// Exact division in a commutative domain; None when `other` does not
    /// divide `self`. Used by the Smith-form solver and the equality search.
    pub fn try_divide(&self, other: &RingElement) -> Option<RingElement> {
        if other.is_zero() {
            return None;
        }
        match (&self.value, &other.value) {
            (Value::Int(a), Value::Int(b)) => {
                let (q, r) = num_integer::Integer::div_rem(a, b);
                if r.is_zero() {
                    Some(RingElement::new(self.ring.clone(), Value::Int(q)))
                } else {
                    None
                }
            }
            (Value::Rat(a), Value::Rat(b)) => {
                Some(RingElement::new(self.ring.clone(), Value::Rat(a / b)))
            }
            (Value::Poly(a), Value::Poly(b)) => {
                let (q, r) = poly_divmod(a, b);
                if r.is_empty() {
                    Some(RingElement::new(self.ring.clone(), Value::Poly(q)))
                } else {
                    None
                }
            }
            (Value::RatFun { .. }, Value::RatFun { .. }) => other
                .try_invert()
                .map(|inv| self.mul(&inv).expect("same ring")),
            _ => None,
        }
    }

    /// Convert into the fraction ring given by [`Ring::fraction_ring`].
    pub fn to_fraction_ring(&self) -> RingElement {
        let target = self.ring.fraction_ring().expect("no fraction ring");
        match &self.value {
            Value::Int(n) => {
                RingElement::from_rational(&target, BigRational::from_integer(n.clone()))
            }
            Value::Rat(q) => RingElement::from_rational(&target, q.clone()),
            Value::Poly(p) => RingElement::ratfun(&target, p.clone(), vec![BigRational::one()]),
            Value::RatFun { num, den } => RingElement::ratfun(&target, num.clone(), den.clone()),
            Value::Free(_) => unreachable!("free algebra has no fraction ring"),
        }
    }

    /// For elements of a fraction ring: the pair (numerator, denominator) as
    /// elements of the base ring. Integers report a unit denominator only when
    /// the value is integral.
    pub fn fraction_parts(&self, base: &Ring) -> Option<(RingElement, RingElement)> {
        match (&self.value, base.kind()) {
            (Value::Rat(q), RingKind::Integers) => Some((
                RingElement::new(base.clone(), Value::Int(q.numer().clone())),
                RingElement::new(base.clone(), Value::Int(q.denom().clone())),
            )),
            (Value::Rat(q), RingKind::Rationals) => Some((
                RingElement::from_rational(base, q.clone()),
                RingElement::one(base),
            )),
            (Value::RatFun { num, den }, RingKind::PolynomialsQ) => Some((
                RingElement::new(base.clone(), Value::Poly(num.clone())),
                RingElement::new(base.clone(), Value::Poly(den.clone())),
            )),
            _ => None,
        }
    }

    /// A coarse height measure used by the random generators.
    pub fn height(&self) -> u64 {
        fn rat_h(q: &BigRational) -> u64 {
            q.numer()
                .magnitude()
                .bits()
                .max(q.denom().magnitude().bits())
        }
        match &self.value {
            Value::Int(n) => n.magnitude().bits(),
            Value::Rat(q) => rat_h(q),
            Value::Poly(p) => p.iter().map(rat_h).max().unwrap_or(0),
            Value::RatFun { num, den } => {
                num.iter().chain(den.iter()).map(rat_h).max().unwrap_or(0)
            }
            Value::Free(t) => t.iter().map(|(_, c)| rat_h(c)).max().unwrap_or(0),
        }
    }
}

fn fmt_rat(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_poly(p: &[BigRational], var: &str) -> String {
    if p.is_empty() {
        return "0".to_string();
    }
    let mut parts: Vec<String> = Vec::new();
    for (i, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let body = match i {
            0 => fmt_rat(&mag),
            1 if mag.is_one() => var.to_string(),
            1 => format!("{}*{}", fmt_rat(&mag), var),
            _ if mag.is_one() => format!("{}^{}", var, i),
            _ => format!("{}*{}^{}", fmt_rat(&mag), var, i),
        };
        if parts.is_empty() {
            parts.push(if c.is_negative() {
                format!("-{}", body)
            } else {
                body
            });
        } else if c.is_negative() {
            parts.push(format!("- {}", body));
        } else {
            parts.push(format!("+ {}", body));
        }
    }
    parts.join(" ")
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Int(n) => write!(f, "{}", n),
            Value::Rat(q) => write!(f, "{}", fmt_rat(q)),
            Value::Poly(p) => write!(f, "{}", fmt_poly(p, "t")),
            Value::RatFun { num, den } => {
                if den.len() == 1 && den[0].is_one() {
                    write!(f, "{}", fmt_poly(num, "t"))
                } else {
                    write!(f, "({})/({})", fmt_poly(num, "t"), fmt_poly(den, "t"))
                }
            }
            Value::Free(terms) => {
                if terms.is_empty() {
                    return write!(f, "0");
                }
                let names = self.ring.generator_names();
                let mut out = String::new();
                for (idx, (w, c)) in terms.iter().enumerate() {
                    let mag = c.abs();
                    let word = if w.is_empty() {
                        None
                    } else {
                        Some(
                            w.iter()
                                .map(|&g| names[g as usize].clone())
                                .collect::<Vec<_>>()
                                .join("*"),
                        )
                    };
                    let body = match (&word, mag.is_one()) {
                        (None, _) => fmt_rat(&mag),
                        (Some(wd), true) => wd.clone(),
                        (Some(wd), false) => format!("{}*{}", fmt_rat(&mag), wd),
                    };
                    if idx == 0 {
                        if c.is_negative() {
                            out.push('-');
                        }
                    } else if c.is_negative() {
                        out.push_str(" - ");
                    } else {
                        out.push_str(" + ");
                    }
                    out.push_str(&body);
                }
                write!(f, "{}", out)
            }
        }
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_inverse_pair() {
        let z = Ring::integers();
        let three = z.from_i64(3);
        assert_eq!(three.add(&three.neg()).unwrap(), z.zero());
        assert!(z.from_i64(2).try_invert().is_none());
        assert_eq!(z.from_i64(-1).try_invert(), Some(z.from_i64(-1)));
    }

    #[test]
    fn rational_arithmetic_reduces() {
        let q = Ring::rationals();
        // 2/3 * 9/4 = 3/2
        let a = RingElement::from_rational(&q, BigRational::new(2.into(), 3.into()));
        let b = RingElement::from_rational(&q, BigRational::new(9.into(), 4.into()));
        let c = a.mul(&b).unwrap();
        assert_eq!(
            c,
            RingElement::from_rational(&q, BigRational::new(3.into(), 2.into()))
        );
        assert_eq!(q.from_i64(2).try_invert().unwrap().to_string(), "1/2");
        assert_eq!(
            RingElement::from_rational(&q, BigRational::new(2.into(), 5.into()))
                .try_invert()
                .unwrap()
                .to_string(),
            "5/2"
        );
    }

    #[test]
    fn free_words_do_not_commute() {
        let r = Ring::free_algebra(vec!["x", "y"]);
        let x = RingElement::generator(&r, 0);
        let y = RingElement::generator(&r, 1);
        let xy = x.mul(&y).unwrap();
        let yx = y.mul(&x).unwrap();
        assert_ne!(xy, yx);
        assert_eq!(xy.to_string(), "x*y");
        assert!(x.try_invert().is_none());
        assert_eq!(xy.sub(&xy).unwrap(), r.zero());
    }

    #[test]
    fn polynomial_canonical_form() {
        let r = Ring::polynomials();
        let t = RingElement::generator(&r, 0);
        let p = t.mul(&t).unwrap().sub(&t.mul(&t).unwrap()).unwrap();
        assert!(p.is_zero());
        let three_t2 = t.mul(&t).unwrap().mul(&r.from_i64(3)).unwrap();
        let expr = three_t2.sub(&r.one()).unwrap();
        assert_eq!(expr.to_string(), "3*t^2 - 1");
        assert!(t.try_invert().is_none());
        assert_eq!(r.from_i64(2).try_invert().unwrap().to_string(), "1/2");
    }

    #[test]
    fn rational_functions_invert() {
        let r = Ring::rational_functions();
        let t = RingElement::generator(&r, 0);
        let inv = t.try_invert().unwrap();
        assert_eq!(t.mul(&inv).unwrap(), r.one());
        assert_eq!(inv.to_string(), "(1)/(t)");
    }

    #[test]
    fn exact_division() {
        let z = Ring::integers();
        assert_eq!(
            z.from_i64(6).try_divide(&z.from_i64(3)),
            Some(z.from_i64(2))
        );
        assert_eq!(z.from_i64(7).try_divide(&z.from_i64(3)), None);
        let p = Ring::polynomials();
        let t = RingElement::generator(&p, 0);
        let t2 = t.mul(&t).unwrap();
        assert_eq!(t2.try_divide(&t), Some(t.clone()));
        assert_eq!(t.try_divide(&t2), None);
    }
}
