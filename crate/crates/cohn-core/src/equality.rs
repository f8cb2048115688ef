//! Equality of localized morphisms: witness checking for the block
//! identities, translation between the factorization and Malcolmson forms, a
//! decidable fraction-ring oracle for commutative coefficients, and a
//! bounded constructive search for factorization witnesses.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::addcat::{FreeObject, MatMorphism};
use crate::coeff::{solve_linear, LinearOutcome, Ring, RingElement};
use crate::localization::{LocFunctor, LocTriple};
use crate::triangular::{extend, DiagTag, SSet, TriangularCert};
use crate::{shape_err, EngineError, Result};

/// `r = [[i₁, s₁, 0], [i₂, 0, s₂]] : A ⊕ C′₁ ⊕ C′₂ → C₁ ⊕ C₂`.
pub fn difference_presentation(t1: &LocTriple, t2: &LocTriple) -> Result<MatMorphism> {
    let ring = t1.ring().clone();
    let c1 = t1.s().rows();
    let c2 = t2.s().rows();
    MatMorphism::block(
        &ring,
        &[
            vec![
                t1.i().clone(),
                t1.s().clone(),
                MatMorphism::zero(&ring, c1, t2.s().cols()),
            ],
            vec![
                t2.i().clone(),
                MatMorphism::zero(&ring, c2, t1.s().cols()),
                t2.s().clone(),
            ],
        ],
    )
}

/// `x′ = (0, g₁, −g₂) : A ⊕ C′₁ ⊕ C′₂ → A′`.
pub fn difference_map(t1: &LocTriple, t2: &LocTriple) -> Result<MatMorphism> {
    let ring = t1.ring().clone();
    MatMorphism::zero(&ring, t1.target().rank(), t1.source().rank())
        .hstack(t1.g())?
        .hstack(&t2.g().negate())
}

fn require_parallel(t1: &LocTriple, t2: &LocTriple) -> Result<()> {
    if t1.source() != t2.source() || t1.target() != t2.target() {
        return shape_err("triples must share source and target");
    }
    if t1.sset() != t2.sset() {
        return Err(EngineError::Precondition(
            "triples reference different S sets".into(),
        ));
    }
    Ok(())
}

/// A witness that `t₁ = t₂` via a factorization of the difference map
/// through a cone-shaped complex `Z → T₁ ⊕ T₂ → Z′` whose connecting maps
/// `k₁`, `k₂` carry triangular certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationWitness {
    pub z: FreeObject,
    pub z_prime: FreeObject,
    pub t1: FreeObject,
    pub t2: FreeObject,
    /// `k₁ : Z → T₁` with `cone(k₁) ∈ D`
    pub k1: MatMorphism,
    pub k1_cert: TriangularCert,
    /// `k₂ : T₂ → Z′` with `cone(k₂) ∈ D`
    pub k2: MatMorphism,
    pub k2_cert: TriangularCert,
    /// `p : Z → T₂`
    pub p: MatMorphism,
    /// `g : T₁ → Z′`
    pub g: MatMorphism,
    /// `α₁⁰ : A ⊕ C′₁ ⊕ C′₂ → T₁ ⊕ T₂`
    pub alpha1_0: MatMorphism,
    /// `α₁¹ : C₁ ⊕ C₂ → Z′`
    pub alpha1_1: MatMorphism,
    /// `α₂ : T₁ ⊕ T₂ → A′`
    pub alpha2: MatMorphism,
}

/// Verify the displayed block equation
/// `[[α₂], [(g, k₂)]] ∘ [α₁⁰ | (k₁; p)] = [[x′, 0], [α₁¹∘r, 0]]`
/// together with the certificate checks for `k₁` and `k₂`.
pub fn check_factorization(
    t1: &LocTriple,
    t2: &LocTriple,
    w: &FactorizationWitness,
) -> Result<bool> {
    require_parallel(t1, t2)?;
    let ring = t1.ring().clone();
    if w.k1.cols() != w.z.rank()
        || w.k1.rows() != w.t1.rank()
        || w.k2.cols() != w.t2.rank()
        || w.k2.rows() != w.z_prime.rank()
        || w.p.cols() != w.z.rank()
        || w.p.rows() != w.t2.rank()
        || w.g.cols() != w.t1.rank()
        || w.g.rows() != w.z_prime.rank()
    {
        return shape_err("witness complex maps have inconsistent shapes");
    }
    let r = difference_presentation(t1, t2)?;
    let x_prime = difference_map(t1, t2)?;
    if w.alpha1_0.cols() != r.cols()
        || w.alpha1_0.rows() != w.t1.rank() + w.t2.rank()
        || w.alpha1_1.cols() != r.rows()
        || w.alpha1_1.rows() != w.z_prime.rank()
        || w.alpha2.cols() != w.t1.rank() + w.t2.rank()
        || w.alpha2.rows() != t1.target().rank()
    {
        return shape_err("witness chain maps have inconsistent shapes");
    }
    if w.k1_cert.assembled() != &w.k1 || w.k2_cert.assembled() != &w.k2 {
        return Ok(false);
    }
    if w.k1_cert.sset() != t1.sset() || w.k2_cert.sset() != t1.sset() {
        return Ok(false);
    }
    // left side: [[α₂], [(g, k₂)]] ∘ [α₁⁰ | (k₁; p)]
    let gk2 = w.g.hstack(&w.k2)?;
    let left_outer = w.alpha2.vstack(&gk2)?;
    let k1p = w.k1.vstack(&w.p)?;
    let left_inner = w.alpha1_0.hstack(&k1p)?;
    let left = left_outer.compose(&left_inner)?;
    // right side: [[x′, 0], [α₁¹∘r, 0]]
    let a1r = w.alpha1_1.compose(&r)?;
    let zero_top = MatMorphism::zero(&ring, x_prime.rows(), w.z.rank());
    let zero_bot = MatMorphism::zero(&ring, a1r.rows(), w.z.rank());
    let right = x_prime.hstack(&zero_top)?.vstack(&a1r.hstack(&zero_bot)?)?;
    Ok(left == right)
}

/// A witness in Malcolmson form: the 5×5 block identity factoring through
/// `E`. `P` carries an `Ŝ`-style certificate; `Q` and `L` carry cone
/// certificates as well, since all three must become invertible in the
/// localization for the identity to imply equality.
#[derive(Debug, Clone, PartialEq)]
pub struct MalcolmsonWitness {
    pub e1: FreeObject,
    pub e2: FreeObject,
    pub r1: FreeObject,
    pub r2: FreeObject,
    pub e: FreeObject,
    /// `L : E₁ → R₁`
    pub l: MatMorphism,
    pub l_cert: TriangularCert,
    /// `M : E₂ → R₂`
    pub m: MatMorphism,
    /// `Q : C′₁ ⊕ C′₂ ⊕ E₁ ⊕ E₂ → E`
    pub q: MatMorphism,
    pub q_cert: TriangularCert,
    /// `P : E → C₁ ⊕ C₂ ⊕ R₁ ⊕ R₂`
    pub p: MatMorphism,
    pub p_cert: TriangularCert,
    /// `u : E → A′`
    pub u: MatMorphism,
    /// `v : A → E`
    pub v: MatMorphism,
    /// `X : E₁ → A′`
    pub x: MatMorphism,
    /// `Y : A → R₂`
    pub y: MatMorphism,
}

/// Assemble both sides of the 5×5 identity and compare, then check the
/// three attached certificates.
pub fn check_malcolmson(t1: &LocTriple, t2: &LocTriple, w: &MalcolmsonWitness) -> Result<bool> {
    require_parallel(t1, t2)?;
    let ring = t1.ring().clone();
    let (s1, s2) = (t1.s(), t2.s());
    let (c1, c2) = (s1.rows(), s2.rows());
    let (c1p, c2p) = (s1.cols(), s2.cols());
    let a = t1.source().rank();
    let ap = t1.target().rank();
    if w.l.cols() != w.e1.rank()
        || w.l.rows() != w.r1.rank()
        || w.m.cols() != w.e2.rank()
        || w.m.rows() != w.r2.rank()
        || w.q.cols() != c1p + c2p + w.e1.rank() + w.e2.rank()
        || w.q.rows() != w.e.rank()
        || w.p.cols() != w.e.rank()
        || w.p.rows() != c1 + c2 + w.r1.rank() + w.r2.rank()
        || w.u.cols() != w.e.rank()
        || w.u.rows() != ap
        || w.v.cols() != a
        || w.v.rows() != w.e.rank()
        || w.x.cols() != w.e1.rank()
        || w.x.rows() != ap
        || w.y.cols() != a
        || w.y.rows() != w.r2.rank()
    {
        return shape_err("Malcolmson witness maps have inconsistent shapes");
    }
    if w.p_cert.assembled() != &w.p
        || w.q_cert.assembled() != &w.q
        || w.l_cert.assembled() != &w.l
        || w.p_cert.sset() != t1.sset()
        || w.q_cert.sset() != t1.sset()
        || w.l_cert.sset() != t1.sset()
    {
        return Ok(false);
    }
    let z = |r: usize, c: usize| MatMorphism::zero(&ring, r, c);
    let (e1, e2, r1, r2) = (w.e1.rank(), w.e2.rank(), w.r1.rank(), w.r2.rank());
    let lhs = MatMorphism::block(
        &ring,
        &[
            vec![s1.clone(), z(c1, c2p), z(c1, e1), z(c1, e2), t1.i().clone()],
            vec![
                z(c2, c1p),
                s2.clone(),
                z(c2, e1),
                z(c2, e2),
                t2.i().negate(),
            ],
            vec![z(r1, c1p), z(r1, c2p), w.l.clone(), z(r1, e2), z(r1, a)],
            vec![z(r2, c1p), z(r2, c2p), z(r2, e1), w.m.clone(), w.y.clone()],
            vec![
                t1.g().clone(),
                t2.g().clone(),
                w.x.clone(),
                z(ap, e2),
                z(ap, a),
            ],
        ],
    )?;
    let rhs = w.p.vstack(&w.u)?.compose(&w.q.hstack(&w.v)?)?;
    Ok(lhs == rhs)
}

/// Name the first failing check of a factorization witness, or `None` when
/// it verifies. Used for reporting; `check_factorization` is the verdict.
pub fn diagnose_factorization(
    t1: &LocTriple,
    t2: &LocTriple,
    w: &FactorizationWitness,
) -> Result<Option<String>> {
    if check_factorization(t1, t2, w)? {
        return Ok(None);
    }
    if w.k1_cert.assembled() != &w.k1 {
        return Ok(Some("certificate for k1 does not assemble to k1".into()));
    }
    if w.k2_cert.assembled() != &w.k2 {
        return Ok(Some("certificate for k2 does not assemble to k2".into()));
    }
    let r = difference_presentation(t1, t2)?;
    let x_prime = difference_map(t1, t2)?;
    let gk2 = w.g.hstack(&w.k2)?;
    if w.alpha2.compose(&w.alpha1_0)? != x_prime {
        return Ok(Some("alpha2 ∘ alpha1_0 differs from (0, g1, -g2)".into()));
    }
    if !w.alpha2.compose(&w.k1.vstack(&w.p)?)?.is_zero() {
        return Ok(Some("alpha2 ∘ (k1; p) is nonzero".into()));
    }
    if gk2.compose(&w.alpha1_0)? != w.alpha1_1.compose(&r)? {
        return Ok(Some("(g, k2) ∘ alpha1_0 differs from alpha1_1 ∘ r".into()));
    }
    if !gk2.compose(&w.k1.vstack(&w.p)?)?.is_zero() {
        return Ok(Some("g ∘ k1 + k2 ∘ p is nonzero".into()));
    }
    Ok(Some("witness fails".into()))
}

/// Name the first failing block of a Malcolmson witness, or `None` when it
/// verifies.
pub fn diagnose_malcolmson(
    t1: &LocTriple,
    t2: &LocTriple,
    w: &MalcolmsonWitness,
) -> Result<Option<String>> {
    if check_malcolmson(t1, t2, w)? {
        return Ok(None);
    }
    for (cert, matrix, name) in [
        (&w.p_cert, &w.p, "P"),
        (&w.q_cert, &w.q, "Q"),
        (&w.l_cert, &w.l, "L"),
    ] {
        if cert.assembled() != matrix {
            return Ok(Some(format!(
                "certificate for {} does not assemble to {}",
                name, name
            )));
        }
    }
    // locate the first differing block of the 5x5 identity
    let ring = t1.ring().clone();
    let (s1, s2) = (t1.s(), t2.s());
    let row_names = ["C1", "C2", "R1", "R2", "A'"];
    let col_names = ["C1'", "C2'", "E1", "E2", "A"];
    let row_sizes = [
        s1.rows(),
        s2.rows(),
        w.r1.rank(),
        w.r2.rank(),
        t1.target().rank(),
    ];
    let col_sizes = [
        s1.cols(),
        s2.cols(),
        w.e1.rank(),
        w.e2.rank(),
        t1.source().rank(),
    ];
    let z = |r: usize, c: usize| MatMorphism::zero(&ring, r, c);
    let lhs = MatMorphism::block(
        &ring,
        &[
            vec![
                s1.clone(),
                z(row_sizes[0], col_sizes[1]),
                z(row_sizes[0], col_sizes[2]),
                z(row_sizes[0], col_sizes[3]),
                t1.i().clone(),
            ],
            vec![
                z(row_sizes[1], col_sizes[0]),
                s2.clone(),
                z(row_sizes[1], col_sizes[2]),
                z(row_sizes[1], col_sizes[3]),
                t2.i().negate(),
            ],
            vec![
                z(row_sizes[2], col_sizes[0]),
                z(row_sizes[2], col_sizes[1]),
                w.l.clone(),
                z(row_sizes[2], col_sizes[3]),
                z(row_sizes[2], col_sizes[4]),
            ],
            vec![
                z(row_sizes[3], col_sizes[0]),
                z(row_sizes[3], col_sizes[1]),
                z(row_sizes[3], col_sizes[2]),
                w.m.clone(),
                w.y.clone(),
            ],
            vec![
                t1.g().clone(),
                t2.g().clone(),
                w.x.clone(),
                z(row_sizes[4], col_sizes[3]),
                z(row_sizes[4], col_sizes[4]),
            ],
        ],
    )?;
    let rhs = w.p.vstack(&w.u)?.compose(&w.q.hstack(&w.v)?)?;
    let mut roff = 0usize;
    for (bi, &rs) in row_sizes.iter().enumerate() {
        let mut coff = 0usize;
        for (bj, &cs) in col_sizes.iter().enumerate() {
            let rows: Vec<usize> = (roff..roff + rs).collect();
            let cols: Vec<usize> = (coff..coff + cs).collect();
            if lhs.submatrix(&rows, &cols) != rhs.submatrix(&rows, &cols) {
                return Ok(Some(format!(
                    "block ({}, {}) of the identity fails",
                    row_names[bi], col_names[bj]
                )));
            }
            coff += cs;
        }
        roff += rs;
    }
    Ok(Some("witness fails".into()))
}

/// Outcome of the decidable oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleVerdict {
    Equal(bool),
    Inapplicable(String),
}

/// Decide equality by evaluating both triples in the fraction ring of a
/// commutative coefficient ring. Applicable when every element of `S` is
/// square with nonzero determinant, so that the fraction-ring functor
/// inverts `S`; for central commutative localization this is both sound and
/// complete.
pub fn decide_equal_oracle(t1: &LocTriple, t2: &LocTriple) -> Result<OracleVerdict> {
    require_parallel(t1, t2)?;
    let ring = t1.ring().clone();
    if !ring.is_commutative() {
        return Ok(OracleVerdict::Inapplicable(
            "noncommutative coefficient ring".into(),
        ));
    }
    if ring.fraction_ring().is_none() {
        return Ok(OracleVerdict::Inapplicable(format!(
            "{} has no fraction ring",
            ring
        )));
    }
    for (k, s) in t1.sset().elements().iter().enumerate() {
        match s.determinant() {
            None => {
                return Ok(OracleVerdict::Inapplicable(format!(
                    "S element {} is not square",
                    k
                )))
            }
            Some(d) if d.is_zero() => {
                return Ok(OracleVerdict::Inapplicable(format!(
                    "S element {} has zero determinant",
                    k
                )))
            }
            _ => {}
        }
    }
    let functor = LocFunctor::fractions(t1.sset().clone())?;
    Ok(OracleVerdict::Equal(
        functor.evaluate(t1)? == functor.evaluate(t2)?,
    ))
}

/// Solve `x′ = H ∘ r` for `H` over the coefficient ring. A solution is a
/// degree-one homotopy for the difference map.
fn solve_h_over_ring(
    ring: &Ring,
    r: &MatMorphism,
    x_prime: &MatMorphism,
) -> Result<Option<MatMorphism>> {
    let rows = x_prime.rows();
    let hcols = r.rows();
    let cols = r.cols();
    let mut system: Vec<Vec<RingElement>> = Vec::with_capacity(rows * cols);
    let mut rhs: Vec<RingElement> = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut row = vec![ring.zero(); rows * hcols];
            for k in 0..hcols {
                row[i * hcols + k] = r.at(k, j).clone();
            }
            system.push(row);
            rhs.push(x_prime.at(i, j).clone());
        }
    }
    match solve_linear(ring, &system, &rhs).map_err(EngineError::from)? {
        LinearOutcome::Solution(xs) => Ok(Some(MatMorphism::new(ring, rows, hcols, xs)?)),
        _ => Ok(None),
    }
}

/// `H = (g₁ s₁⁻¹ | −g₂ s₂⁻¹)` over the fraction ring; `None` when the
/// fraction evaluations differ (no homotopy exists even with fractions).
fn solve_h_over_fractions(t1: &LocTriple, t2: &LocTriple) -> Result<Option<MatMorphism>> {
    let functor = LocFunctor::fractions(t1.sset().clone())?;
    let e1 = functor.evaluate(t1)?;
    let e2 = functor.evaluate(t2)?;
    if e1 != e2 {
        return Ok(None);
    }
    let hom = functor.hom();
    let s1 = hom.apply_matrix(t1.s())?;
    let s2 = hom.apply_matrix(t2.s())?;
    let (Some(s1i), Some(s2i)) = (s1.invert(), s2.invert()) else {
        return Ok(None);
    };
    let h1 = hom.apply_matrix(t1.g())?.compose(&s1i)?;
    let h2 = hom.apply_matrix(t2.g())?.compose(&s2i)?.negate();
    Ok(Some(h1.hstack(&h2)?))
}

/// Greedy factorization of base-ring denominators into determinants of the
/// S elements; returns the chain of S indices, or `None` when a non-unit
/// remainder survives.
fn denominator_chain(sset: &SSet, dens: &[RingElement]) -> Option<Vec<usize>> {
    let ring = sset.ring();
    let dets: Vec<RingElement> = sset
        .elements()
        .iter()
        .map(|s| s.determinant().unwrap_or_else(|| ring.zero()))
        .collect();
    let mut max_exp = vec![0usize; dets.len()];
    for den in dens {
        let mut rem = den.clone();
        if rem.is_zero() {
            return None;
        }
        for (k, d) in dets.iter().enumerate() {
            if d.is_zero() || d.try_invert().is_some() {
                continue;
            }
            let mut e = 0usize;
            while let Some(q) = rem.try_divide(d) {
                e += 1;
                rem = q;
            }
            max_exp[k] = max_exp[k].max(e);
        }
        if rem.try_invert().is_none() {
            return None;
        }
    }
    let mut chain = Vec::new();
    for (k, &e) in max_exp.iter().enumerate() {
        chain.extend(std::iter::repeat(k).take(e));
    }
    Some(chain)
}

fn column_denominators(m: &MatMorphism, col: usize, base: &Ring) -> Result<Vec<RingElement>> {
    let mut dens = Vec::new();
    for i in 0..m.rows() {
        let (_, den) = m.at(i, col).fraction_parts(base).ok_or_else(|| {
            EngineError::Precondition("entry is not a fraction over the base ring".into())
        })?;
        dens.push(den);
    }
    Ok(dens)
}

/// A lower-bidiagonal chain with the listed S elements on the diagonal and
/// identities below the diagonal; its inverse clears the product of their
/// determinants. Supported for rank-one S elements. An empty chain yields a
/// single identity-tagged slot.
fn chain_cert(sset: &Arc<SSet>, chain: &[usize]) -> Result<TriangularCert> {
    if chain.is_empty() {
        return TriangularCert::singleton_identity(sset.clone(), FreeObject(1));
    }
    let ring = sset.ring().clone();
    let mut diag = Vec::new();
    let mut below = BTreeMap::new();
    for (idx, &k) in chain.iter().enumerate() {
        let el = sset.element(k)?;
        if el.rows() != 1 || el.cols() != 1 {
            return Err(EngineError::Precondition(
                "denominator chains need rank-one S elements".into(),
            ));
        }
        diag.push(DiagTag::ElementOfS(k));
        if idx > 0 {
            below.insert((idx, idx - 1), MatMorphism::identity(&ring, 1));
        }
    }
    TriangularCert::new(sset.clone(), diag, below)
}

fn lift_to_fractions(m: &MatMorphism, frac: &Ring) -> Result<MatMorphism> {
    m.map_entries(frac, |e| Ok(e.to_fraction_ring()))
}

fn lower_to_base(m: &MatMorphism, base: &Ring) -> Result<MatMorphism> {
    m.map_entries(base, |e| {
        let (num, den) = e
            .fraction_parts(base)
            .ok_or_else(|| EngineError::Precondition("not a base fraction".into()))?;
        let di = den
            .try_invert()
            .ok_or_else(|| EngineError::Invariant("entry is not integral".into()))?;
        num.mul(&di).map_err(EngineError::from)
    })
}

/// Outcome of the bounded witness search.
#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Found(Box<FactorizationWitness>),
    /// Not a proof of inequality: the search is a semi-decision.
    NotFoundWithinCap,
    Unsupported,
}

/// Search for a factorization witness.
///
/// Two constructive schemes run in order. A homotopy `x′ = H ∘ r` over the
/// coefficient ring itself yields the small witness through the shifted cone
/// of an identity. Otherwise, over a commutative domain, the fraction-ring
/// homotopy is cleared into certified denominator chains (rank-one S
/// elements); a chain longer than `cap` reports `NotFoundWithinCap`.
pub fn search_equal(t1: &LocTriple, t2: &LocTriple, cap: usize) -> Result<SearchOutcome> {
    require_parallel(t1, t2)?;
    let ring = t1.ring().clone();
    if !ring.supports_linear_solving() {
        return Ok(SearchOutcome::Unsupported);
    }
    let r = difference_presentation(t1, t2)?;
    let x_prime = difference_map(t1, t2)?;
    let sset = t1.sset().clone();

    // scheme 1: exact homotopy over the base ring
    if let Some(h) = solve_h_over_ring(&ring, &r, &x_prime)? {
        let a_prime = t1.target();
        let w = FactorizationWitness {
            z: FreeObject(0),
            z_prime: a_prime,
            t1: FreeObject(0),
            t2: a_prime,
            k1: MatMorphism::zero(&ring, 0, 0),
            k1_cert: TriangularCert::empty(sset.clone()),
            k2: MatMorphism::identity(&ring, a_prime.rank()),
            k2_cert: TriangularCert::singleton_identity(sset.clone(), a_prime)?,
            p: MatMorphism::zero(&ring, a_prime.rank(), 0),
            g: MatMorphism::zero(&ring, a_prime.rank(), 0),
            alpha1_0: x_prime.clone(),
            alpha1_1: h,
            alpha2: MatMorphism::identity(&ring, a_prime.rank()),
        };
        if check_factorization(t1, t2, &w)? {
            return Ok(SearchOutcome::Found(Box::new(w)));
        }
        return Err(EngineError::Invariant(
            "homotopy witness failed verification".into(),
        ));
    }

    // scheme 2: fraction-ring homotopy with denominator clearing
    if !ring.is_commutative() || ring.fraction_ring().is_none() {
        return Ok(SearchOutcome::NotFoundWithinCap);
    }
    let Some(h) = solve_h_over_fractions(t1, t2)? else {
        return Ok(SearchOutcome::NotFoundWithinCap);
    };
    let frac = ring.fraction_ring().expect("checked");
    let r_frac = lift_to_fractions(&r, &frac)?;

    // per-column chains for H (C₁ ⊕ C₂ columns)
    let mut k2_chains = Vec::new();
    for j in 0..h.cols() {
        let dens = column_denominators(&h, j, &ring)?;
        let Some(chain) = denominator_chain(&sset, &dens) else {
            return Ok(SearchOutcome::NotFoundWithinCap);
        };
        if chain.len() > cap {
            return Ok(SearchOutcome::NotFoundWithinCap);
        }
        k2_chains.push(chain);
    }
    let (k2_cert, k2_blocks) = match concat_chains(&sset, &k2_chains) {
        Ok(v) => v,
        Err(_) => return Ok(SearchOutcome::NotFoundWithinCap),
    };
    let k2 = k2_cert.assembled().clone();
    let t2_rank = k2.cols();

    // α₁¹ : one top-selector column per C₁⊕C₂ column
    let mut alpha1_1 = MatMorphism::zero(&ring, t2_rank, h.cols());
    for (j, (off, _len)) in k2_blocks.iter().enumerate() {
        alpha1_1.set(*off, j, ring.one());
    }
    // β : bottom carriers with β ∘ k₂⁻¹ ∘ α₁¹ = H
    let mut beta = MatMorphism::zero(&ring, h.rows(), t2_rank);
    for (j, (off, len)) in k2_blocks.iter().enumerate() {
        let delta = chain_product(&sset, &k2_chains[j])?.to_fraction_ring();
        let negate = (len - 1) % 2 == 1;
        for i in 0..h.rows() {
            let mut v = h.at(i, j).mul(&delta).map_err(EngineError::from)?;
            if negate {
                v = v.neg();
            }
            let (num, den) = v.fraction_parts(&ring).ok_or_else(|| {
                EngineError::Precondition("scaled entry is not a base fraction".into())
            })?;
            let di = den.try_invert().ok_or_else(|| {
                EngineError::Invariant("chain failed to clear a denominator".into())
            })?;
            beta.set(i, off + len - 1, num.mul(&di).map_err(EngineError::from)?);
        }
    }

    // θ = k₂⁻¹ ∘ α₁¹ ∘ r over the fraction ring
    let k2_frac_inv = lift_to_fractions(&k2, &frac)?
        .invert()
        .ok_or_else(|| EngineError::Invariant("chain matrix must invert over fractions".into()))?;
    let theta = k2_frac_inv
        .compose(&lift_to_fractions(&alpha1_1, &frac)?)?
        .compose(&r_frac)?;

    // chains fixing the non-integral columns of θ
    let mut fix_cols = Vec::new();
    for c in 0..theta.cols() {
        let dens = column_denominators(&theta, c, &ring)?;
        let Some(chain) = denominator_chain(&sset, &dens) else {
            return Ok(SearchOutcome::NotFoundWithinCap);
        };
        if chain.len() > cap {
            return Ok(SearchOutcome::NotFoundWithinCap);
        }
        if !chain.is_empty() {
            fix_cols.push((c, chain));
        }
    }
    let fix_chains: Vec<Vec<usize>> = fix_cols.iter().map(|(_, ch)| ch.clone()).collect();
    let (k1_cert, k1_blocks) = match concat_chains(&sset, &fix_chains) {
        Ok(v) => v,
        Err(_) => return Ok(SearchOutcome::NotFoundWithinCap),
    };
    let k1 = k1_cert.assembled().clone();
    let z_rank = k1.cols();
    let t1_rank = k1.rows();

    // a : top selector per fixed column
    let mut a_block = MatMorphism::zero(&ring, t1_rank, theta.cols());
    for (bidx, (c, _)) in fix_cols.iter().enumerate() {
        let (off, _) = k1_blocks[bidx];
        a_block.set(off, *c, ring.one());
    }
    // p : per fixed column, the bottom chain slot carries (−1)^{len} δ_c θ_c
    let mut p_mat_frac = MatMorphism::zero(&frac, t2_rank, z_rank);
    for (bidx, (c, chain)) in fix_cols.iter().enumerate() {
        let (off, len) = k1_blocks[bidx];
        let delta = chain_product(&sset, chain)?.to_fraction_ring();
        let negate = len % 2 == 1;
        for i in 0..t2_rank {
            let mut v = theta.at(i, *c).mul(&delta).map_err(EngineError::from)?;
            if negate {
                v = v.neg();
            }
            p_mat_frac.set(i, off + len - 1, v);
        }
    }
    let p_mat = lower_to_base(&p_mat_frac, &ring)?;
    // B = θ + p k₁⁻¹ a; g = −k₂ p k₁⁻¹; the T₁ part of α₂ is −β p k₁⁻¹
    let k1_frac_inv = lift_to_fractions(&k1, &frac)?
        .invert()
        .ok_or_else(|| EngineError::Invariant("fix chain must invert over fractions".into()))?;
    let pk1inv = lift_to_fractions(&p_mat, &frac)?.compose(&k1_frac_inv)?;
    let b_frac = theta.add(&pk1inv.compose(&lift_to_fractions(&a_block, &frac)?)?)?;
    let b_mat = lower_to_base(&b_frac, &ring)?;
    let g_mat = lower_to_base(
        &lift_to_fractions(&k2, &frac)?.compose(&pk1inv)?.negate(),
        &ring,
    )?;
    let beta_frac = lift_to_fractions(&beta, &frac)?;
    let alpha2_t1 = lower_to_base(&beta_frac.compose(&pk1inv)?.negate(), &ring)?;

    let w = FactorizationWitness {
        z: FreeObject(z_rank),
        z_prime: FreeObject(t2_rank),
        t1: FreeObject(t1_rank),
        t2: FreeObject(t2_rank),
        k1,
        k1_cert,
        k2,
        k2_cert,
        p: p_mat,
        g: g_mat,
        alpha1_0: a_block.vstack(&b_mat)?,
        alpha1_1,
        alpha2: alpha2_t1.hstack(&beta)?,
    };
    if check_factorization(t1, t2, &w)? {
        Ok(SearchOutcome::Found(Box::new(w)))
    } else {
        Err(EngineError::Invariant(
            "cleared witness failed verification".into(),
        ))
    }
}

/// Concatenate chain certificates into one block-diagonal certificate,
/// returning the (offset, length) of each block in the assembled matrix.
fn concat_chains(
    sset: &Arc<SSet>,
    chains: &[Vec<usize>],
) -> Result<(TriangularCert, Vec<(usize, usize)>)> {
    let mut cert: Option<TriangularCert> = None;
    let mut blocks = Vec::new();
    let mut off = 0usize;
    let ring = sset.ring().clone();
    for chain in chains {
        let c = chain_cert(sset, chain)?;
        let len = c.assembled().rows();
        blocks.push((off, len));
        off += len;
        cert = Some(match cert {
            None => c,
            Some(acc) => {
                let glue = MatMorphism::zero(&ring, len, acc.assembled().cols());
                extend(&acc, &c, &glue)?
            }
        });
    }
    Ok((
        cert.unwrap_or_else(|| TriangularCert::empty(sset.clone())),
        blocks,
    ))
}

/// Product of the determinants along a chain, in the base ring.
fn chain_product(sset: &SSet, chain: &[usize]) -> Result<RingElement> {
    let ring = sset.ring().clone();
    let mut acc = ring.one();
    for &k in chain {
        let d = sset
            .element(k)?
            .determinant()
            .ok_or_else(|| EngineError::Precondition("chain element is not square".into()))?;
        acc = acc.mul(&d).map_err(EngineError::from)?;
    }
    Ok(acc)
}

/// Translate a verified factorization witness into Malcolmson form.
///
/// When the difference map is null-homotopic over the base ring itself the
/// output is the direct witness through `Q = s₁ ⊕ s₂`, `P = id`. Otherwise,
/// over a commutative domain, the fraction-ring homotopy is cleared row by
/// row into certified denominator chains carried by `E₁`, `L`, and `P`.
pub fn malcolmson_from_factorization(
    t1: &LocTriple,
    t2: &LocTriple,
    w: &FactorizationWitness,
) -> Result<MalcolmsonWitness> {
    if !check_factorization(t1, t2, w)? {
        return Err(EngineError::Precondition(
            "input factorization witness does not verify".into(),
        ));
    }
    let ring = t1.ring().clone();
    let sset = t1.sset().clone();
    let r = difference_presentation(t1, t2)?;
    let x_prime = difference_map(t1, t2)?;
    let (c1, c2) = (t1.s().rows(), t2.s().rows());
    let (c1p, c2p) = (t1.s().cols(), t2.s().cols());
    let a = t1.source().rank();
    let a_prime = t1.target().rank();

    // direct form via a base-ring homotopy
    if ring.supports_linear_solving() || ring.is_field() {
        if let Some(h) = solve_h_over_ring(&ring, &r, &x_prime)? {
            let cols_c1: Vec<usize> = (0..c1).collect();
            let cols_c2: Vec<usize> = (c1..c1 + c2).collect();
            let rows_all: Vec<usize> = (0..a_prime).collect();
            let h1 = h.submatrix(&rows_all, &cols_c1);
            let h2 = h.submatrix(&rows_all, &cols_c2);
            let e = FreeObject(c1 + c2);
            let q_cert = extend(t1.cert(), t2.cert(), &MatMorphism::zero(&ring, c2, c1p))?;
            let p_cert = TriangularCert::singleton_identity(sset.clone(), e)?;
            let l_cert = TriangularCert::empty(sset.clone());
            let wit = MalcolmsonWitness {
                e1: FreeObject(0),
                e2: FreeObject(0),
                r1: FreeObject(0),
                r2: FreeObject(0),
                e,
                l: MatMorphism::zero(&ring, 0, 0),
                l_cert,
                m: MatMorphism::zero(&ring, 0, 0),
                q: t1.s().direct_sum(t2.s()),
                q_cert,
                p: MatMorphism::identity(&ring, e.rank()),
                p_cert,
                u: h1.hstack(&h2.negate())?,
                v: t1.i().vstack(&t2.i().negate())?,
                x: MatMorphism::zero(&ring, a_prime, 0),
                y: MatMorphism::zero(&ring, 0, a),
            };
            if !check_malcolmson(t1, t2, &wit)? {
                return Err(EngineError::Invariant(
                    "translated Malcolmson witness failed verification".into(),
                ));
            }
            return Ok(wit);
        }
    }

    // fraction-ring homotopy with row-wise denominator chains
    if !ring.is_commutative() || ring.fraction_ring().is_none() {
        return Err(EngineError::Precondition(
            "translation needs a base homotopy or a commutative domain".into(),
        ));
    }
    let Some(h) = solve_h_over_fractions(t1, t2)? else {
        return Err(EngineError::Invariant(
            "verified witness but fraction evaluations differ".into(),
        ));
    };
    let frac = ring.fraction_ring().expect("checked");
    let mut row_chains = Vec::new();
    for i in 0..a_prime {
        let mut dens = Vec::new();
        for j in 0..h.cols() {
            let (_, den) = h.at(i, j).fraction_parts(&ring).ok_or_else(|| {
                EngineError::Precondition("homotopy entry is not a base fraction".into())
            })?;
            dens.push(den);
        }
        let chain = denominator_chain(&sset, &dens).ok_or_else(|| {
            EngineError::Precondition(
                "homotopy denominators do not factor into S determinants".into(),
            )
        })?;
        row_chains.push(chain);
    }
    let fixed_rows: Vec<(usize, Vec<usize>)> = row_chains
        .iter()
        .enumerate()
        .filter(|(_, ch)| !ch.is_empty())
        .map(|(i, ch)| (i, ch.clone()))
        .collect();
    let chains: Vec<Vec<usize>> = fixed_rows.iter().map(|(_, c)| c.clone()).collect();
    let (kp_cert, blocks) = concat_chains(&sset, &chains)?;
    let kp = kp_cert.assembled().clone();
    let w_rank = kp.rows();

    let cols_c1: Vec<usize> = (0..c1).collect();
    let cols_c2: Vec<usize> = (c1..c1 + c2).collect();
    let rows_all: Vec<usize> = (0..a_prime).collect();
    let h1 = h.submatrix(&rows_all, &cols_c1);
    let h2 = h.submatrix(&rows_all, &cols_c2);
    let s1f = lift_to_fractions(t1.s(), &frac)?;
    let s2f = lift_to_fractions(t2.s(), &frac)?;
    let g1f = h1.compose(&s1f)?; // = F(g₁)
    let g2f = h2.compose(&s2f)?.negate(); // = F(g₂)

    let mut rho1 = MatMorphism::zero(&ring, w_rank, c1p);
    let mut rho2 = MatMorphism::zero(&ring, w_rank, c2p);
    let mut pi1 = MatMorphism::zero(&ring, w_rank, c1);
    let mut pi2 = MatMorphism::zero(&ring, w_rank, c2);
    let mut u = MatMorphism::zero(&ring, a_prime, c1 + c2 + w_rank);
    let to_base = |v: &RingElement, what: &str| -> Result<RingElement> {
        let (num, den) = v
            .fraction_parts(&ring)
            .ok_or_else(|| EngineError::Precondition("not a base fraction".into()))?;
        let di = den
            .try_invert()
            .ok_or_else(|| EngineError::Invariant(format!("{} entry not integral", what)))?;
        num.mul(&di).map_err(EngineError::from)
    };
    for (bidx, (rowi, chain)) in fixed_rows.iter().enumerate() {
        let (off, len) = blocks[bidx];
        // ρ rows: ρ^{(k)} = (−1)^{len−k} (d_{k+1}…d_len) · (g-row)
        let mut suffix = ring.one().to_fraction_ring();
        for k in (1..=len).rev() {
            let negate = (len - k) % 2 == 1;
            for j in 0..c1p {
                let mut v = g1f.at(*rowi, j).mul(&suffix).map_err(EngineError::from)?;
                if negate {
                    v = v.neg();
                }
                rho1.set(off + k - 1, j, to_base(&v, "rho1")?);
            }
            for j in 0..c2p {
                let mut v = g2f.at(*rowi, j).mul(&suffix).map_err(EngineError::from)?;
                if negate {
                    v = v.neg();
                }
                rho2.set(off + k - 1, j, to_base(&v, "rho2")?);
            }
            let d_k = sset
                .element(chain[k - 1])?
                .determinant()
                .ok_or_else(|| EngineError::Precondition("chain element not square".into()))?;
            suffix = suffix
                .mul(&d_k.to_fraction_ring())
                .map_err(EngineError::from)?;
        }
        // π rows: only the first chain slot is nonzero, (−1)^{len} δ · h-row
        let delta = chain_product(&sset, chain)?.to_fraction_ring();
        let negate = len % 2 == 1;
        for j in 0..c1 {
            let mut v = h1.at(*rowi, j).mul(&delta).map_err(EngineError::from)?;
            if negate {
                v = v.neg();
            }
            pi1.set(off, j, to_base(&v, "pi1")?);
        }
        for j in 0..c2 {
            let mut v = h2
                .at(*rowi, j)
                .neg()
                .mul(&delta)
                .map_err(EngineError::from)?;
            if negate {
                v = v.neg();
            }
            pi2.set(off, j, to_base(&v, "pi2")?);
        }
        // u row: bottom selector into the chain block
        u.set(*rowi, c1 + c2 + off + len - 1, ring.one());
    }
    // rows with no denominators take (h₁ | −h₂) directly
    for (i, chain) in row_chains.iter().enumerate() {
        if chain.is_empty() {
            for j in 0..c1 {
                u.set(i, j, to_base(h1.at(i, j), "u")?);
            }
            for j in 0..c2 {
                u.set(i, c1 + j, to_base(h2.at(i, j), "u")?.neg());
            }
        }
    }

    let e = FreeObject(c1 + c2 + w_rank);
    let q_top = extend(t1.cert(), t2.cert(), &MatMorphism::zero(&ring, c2, c1p))?;
    let q_cert = extend(
        &q_top,
        &TriangularCert::singleton_identity(sset.clone(), FreeObject(w_rank))?,
        &rho1.hstack(&rho2)?,
    )?;
    let q = q_cert.assembled().clone();
    let p_top = extend(
        &TriangularCert::singleton_identity(sset.clone(), FreeObject(c1))?,
        &TriangularCert::singleton_identity(sset.clone(), FreeObject(c2))?,
        &MatMorphism::zero(&ring, c2, c1),
    )?;
    let p_cert = extend(&p_top, &kp_cert, &pi1.hstack(&pi2)?)?;
    let p = p_cert.assembled().clone();
    let v = t1
        .i()
        .vstack(&t2.i().negate())?
        .vstack(&MatMorphism::zero(&ring, w_rank, a))?;
    let x = {
        let rows: Vec<usize> = (0..a_prime).collect();
        let cols: Vec<usize> = (c1 + c2..c1 + c2 + w_rank).collect();
        u.submatrix(&rows, &cols)
    };

    let wit = MalcolmsonWitness {
        e1: FreeObject(w_rank),
        e2: FreeObject(0),
        r1: FreeObject(w_rank),
        r2: FreeObject(0),
        e,
        l: kp,
        l_cert: kp_cert,
        m: MatMorphism::zero(&ring, 0, 0),
        q,
        q_cert,
        p,
        p_cert,
        u,
        v,
        x,
        y: MatMorphism::zero(&ring, 0, a),
    };
    if !check_malcolmson(t1, t2, &wit)? {
        return Err(EngineError::Invariant(
            "translated Malcolmson witness failed verification".into(),
        ));
    }
    Ok(wit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::{from_plain, invert_s, triple_add, triple_compose};

    fn setup_z2() -> (Ring, Arc<SSet>) {
        let z = Ring::integers();
        let s = SSet::new(&z, vec![MatMorphism::from_i64_rows(&z, &[&[2]])]).unwrap();
        (z, Arc::new(s))
    }

    #[test]
    fn oracle_basic_verdicts() {
        let (z, s) = setup_z2();
        let f = MatMorphism::from_i64_rows(&z, &[&[3]]);
        let t = from_plain(&s, &f).unwrap();
        assert_eq!(
            decide_equal_oracle(&t, &t).unwrap(),
            OracleVerdict::Equal(true)
        );

        let inv = invert_s(&s, 0).unwrap();
        let sum = triple_add(&inv, &inv).unwrap();
        let one = from_plain(&s, &MatMorphism::identity(&z, 1)).unwrap();
        assert_eq!(
            decide_equal_oracle(&sum, &one).unwrap(),
            OracleVerdict::Equal(true)
        );
        assert_eq!(
            decide_equal_oracle(&inv, &one).unwrap(),
            OracleVerdict::Equal(false)
        );

        let f = Ring::free_algebra(vec!["x", "y"]);
        let sf = Arc::new(SSet::new(&f, vec![MatMorphism::identity(&f, 1)]).unwrap());
        let tf = from_plain(&sf, &MatMorphism::identity(&f, 1)).unwrap();
        assert!(matches!(
            decide_equal_oracle(&tf, &tf).unwrap(),
            OracleVerdict::Inapplicable(_)
        ));
    }

    #[test]
    fn search_finds_tautological_witness() {
        let (z, s) = setup_z2();
        let f = MatMorphism::from_i64_rows(&z, &[&[3, 1], &[0, 2]]);
        let t = from_plain(&s, &f).unwrap();
        match search_equal(&t, &t, 4).unwrap() {
            SearchOutcome::Found(w) => {
                assert!(check_factorization(&t, &t, &w).unwrap());
                assert_eq!(w.z, FreeObject(0));
            }
            other => panic!("expected a witness, got {:?}", other),
        }
    }

    #[test]
    fn search_clears_denominators_for_half_plus_half() {
        let (z, s) = setup_z2();
        let inv = invert_s(&s, 0).unwrap();
        let sum = triple_add(&inv, &inv).unwrap();
        let one = from_plain(&s, &MatMorphism::identity(&z, 1)).unwrap();
        match search_equal(&sum, &one, 4).unwrap() {
            SearchOutcome::Found(w) => {
                assert!(check_factorization(&sum, &one, &w).unwrap());
                assert!(w.k2_cert.size() <= 4 && w.k1_cert.size() <= 4);
            }
            other => panic!("expected a witness, got {:?}", other),
        }
        // 1/2 vs 1: no witness within cap, and the oracle refutes equality
        match search_equal(&inv, &one, 4).unwrap() {
            SearchOutcome::NotFoundWithinCap => {}
            other => panic!("expected NotFoundWithinCap, got {:?}", other),
        }
        assert_eq!(
            decide_equal_oracle(&inv, &one).unwrap(),
            OracleVerdict::Equal(false)
        );
    }

    #[test]
    fn search_unsupported_over_free_algebra() {
        let f = Ring::free_algebra(vec!["x", "y"]);
        let sf = Arc::new(SSet::new(&f, vec![MatMorphism::identity(&f, 1)]).unwrap());
        let t = from_plain(&sf, &MatMorphism::identity(&f, 1)).unwrap();
        assert!(matches!(
            search_equal(&t, &t, 2).unwrap(),
            SearchOutcome::Unsupported
        ));
    }

    #[test]
    fn factorization_checker_rejects_tampering() {
        let (z, s) = setup_z2();
        let inv = invert_s(&s, 0).unwrap();
        let sum = triple_add(&inv, &inv).unwrap();
        let one = from_plain(&s, &MatMorphism::identity(&z, 1)).unwrap();
        let SearchOutcome::Found(w) = search_equal(&sum, &one, 4).unwrap() else {
            panic!("witness expected");
        };
        let mut bad = (*w).clone();
        let bumped = bad.alpha2.at(0, 0).add(&z.one()).unwrap();
        bad.alpha2.set(0, 0, bumped);
        assert!(!check_factorization(&sum, &one, &bad).unwrap());
    }

    #[test]
    fn malcolmson_translation_round_trips() {
        let (z, s) = setup_z2();
        // identical plain triples: the base homotopy path
        let f = MatMorphism::from_i64_rows(&z, &[&[5]]);
        let t = from_plain(&s, &f).unwrap();
        let SearchOutcome::Found(w) = search_equal(&t, &t, 4).unwrap() else {
            panic!("witness expected");
        };
        let mw = malcolmson_from_factorization(&t, &t, &w).unwrap();
        assert!(check_malcolmson(&t, &t, &mw).unwrap());

        // the 1/2 + 1/2 = 1 witness goes through the chain path
        let inv = invert_s(&s, 0).unwrap();
        let sum = triple_add(&inv, &inv).unwrap();
        let one = from_plain(&s, &MatMorphism::identity(&z, 1)).unwrap();
        let SearchOutcome::Found(w) = search_equal(&sum, &one, 4).unwrap() else {
            panic!("witness expected");
        };
        let mw = malcolmson_from_factorization(&sum, &one, &w).unwrap();
        assert!(check_malcolmson(&sum, &one, &mw).unwrap());

        // tampering a block breaks it
        let mut bad = mw.clone();
        let bumped = bad.u.at(0, 0).add(&z.one()).unwrap();
        bad.u.set(0, 0, bumped);
        assert!(!check_malcolmson(&sum, &one, &bad).unwrap());
    }

    #[test]
    fn composition_identities_have_witnesses() {
        let (z, s) = setup_z2();
        let inv = invert_s(&s, 0).unwrap();
        let two = from_plain(&s, s.element(0).unwrap()).unwrap();
        let one = from_plain(&s, &MatMorphism::identity(&z, 1)).unwrap();
        for t in [
            triple_compose(&inv, &two).unwrap(),
            triple_compose(&two, &inv).unwrap(),
        ] {
            match search_equal(&t, &one, 4).unwrap() {
                SearchOutcome::Found(w) => assert!(check_factorization(&t, &one, &w).unwrap()),
                other => panic!("expected witness, got {:?}", other),
            }
        }
    }
}
