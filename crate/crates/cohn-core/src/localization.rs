//! The triple calculus for the localized category: morphisms presented as
//! `g ∘ s⁻¹ ∘ i` with a triangular certificate for `cone(s)`, roof folding
//! for zig-zag words, and evaluation under additive functors that invert `S`.

use std::sync::Arc;

use crate::addcat::{inclusion, FreeObject, MatMorphism};
use crate::coeff::{Ring, RingElement, RingKind, Value};
use crate::complexes::BoundedComplex;
use crate::triangular::{extend, factor_elementary, DiagTag, Factor, SSet, TriangularCert};
use crate::{shape_err, EngineError, Result};

/// A localized morphism `source → target` presented as `g ∘ s⁻¹ ∘ i`.
///
/// `s : C′ → C` always carries a triangular certificate whose assembled
/// matrix equals `s` literally, so the cone of `s` visibly lies in the
/// localizing class. `i` is an arbitrary morphism `source → C` (the
/// canonical-coretraction case is detected, not required).
#[derive(Debug, Clone, PartialEq)]
pub struct LocTriple {
    source: FreeObject,
    target: FreeObject,
    g: MatMorphism,
    s: MatMorphism,
    i: MatMorphism,
    cert: TriangularCert,
}

impl LocTriple {
    pub fn new(
        source: FreeObject,
        target: FreeObject,
        g: MatMorphism,
        s: MatMorphism,
        i: MatMorphism,
        cert: TriangularCert,
    ) -> Result<Self> {
        if g.cols() != s.cols() {
            return shape_err("g and s must share their domain");
        }
        if g.rows() != target.rank() {
            return shape_err("g must land in the target");
        }
        if i.cols() != source.rank() || i.rows() != s.rows() {
            return shape_err("i must map the source into the codomain of s");
        }
        if cert.assembled() != &s {
            return Err(EngineError::Invariant(
                "certificate does not assemble to s".into(),
            ));
        }
        Ok(LocTriple {
            source,
            target,
            g,
            s,
            i,
            cert,
        })
    }

    pub fn source(&self) -> FreeObject {
        self.source
    }

    pub fn target(&self) -> FreeObject {
        self.target
    }

    pub fn g(&self) -> &MatMorphism {
        &self.g
    }

    pub fn s(&self) -> &MatMorphism {
        &self.s
    }

    pub fn i(&self) -> &MatMorphism {
        &self.i
    }

    pub fn cert(&self) -> &TriangularCert {
        &self.cert
    }

    pub fn ring(&self) -> &Ring {
        self.g.ring()
    }

    pub fn sset(&self) -> &Arc<SSet> {
        self.cert.sset()
    }

    /// When `i` is the canonical coretraction `A → A ⊕ T`, the summand `T`.
    pub fn canonical_summand(&self) -> Option<FreeObject> {
        let a = self.source.rank();
        let c = self.i.rows();
        if c < a {
            return None;
        }
        let want = inclusion(self.ring(), &[a, c - a], 0);
        (self.i == want).then_some(FreeObject(c - a))
    }

    /// The cone of `s` as a two-term complex in degrees `(−1, 0)`.
    pub fn cone_of_s(&self) -> BoundedComplex {
        BoundedComplex::two_term(&self.s, -1).expect("two-term complex")
    }
}

/// The embedding of the base category: `f ↦ (f, id, id)`.
pub fn from_plain(sset: &Arc<SSet>, f: &MatMorphism) -> Result<LocTriple> {
    let a = f.domain();
    let cert = TriangularCert::singleton_identity(sset.clone(), a)?;
    LocTriple::new(
        a,
        f.codomain(),
        f.clone(),
        MatMorphism::identity(f.ring(), a.rank()),
        MatMorphism::identity(f.ring(), a.rank()),
        cert,
    )
}

/// The inverse of the `k`-th element of `S`: for `s_k : P → Q` this is the
/// triple `(id_P, s_k, id_Q) : Q → P`.
pub fn invert_s(sset: &Arc<SSet>, k: usize) -> Result<LocTriple> {
    let s_k = sset.element(k)?.clone();
    let ring = s_k.ring().clone();
    let cert = TriangularCert::singleton_s(sset.clone(), k)?;
    LocTriple::new(
        s_k.codomain(),
        s_k.domain(),
        MatMorphism::identity(&ring, s_k.cols()),
        s_k.clone(),
        MatMorphism::identity(&ring, s_k.rows()),
        cert,
    )
}

/// Direct sum of triples: `(g₁⊕g₂, s₁⊕s₂, i₁⊕i₂)`.
pub fn triple_dsum(t1: &LocTriple, t2: &LocTriple) -> Result<LocTriple> {
    let glue = MatMorphism::zero(t1.ring(), t2.s.rows(), t1.s.cols());
    let cert = extend(&t1.cert, &t2.cert, &glue)?;
    LocTriple::new(
        t1.source.direct_sum(t2.source),
        t1.target.direct_sum(t2.target),
        t1.g.direct_sum(&t2.g),
        t1.s.direct_sum(&t2.s),
        t1.i.direct_sum(&t2.i),
        cert,
    )
}

/// Composition `t1 ∘ t2` (apply `t2` first):
/// `(0, g₁) ∘ [[s₂, 0], [−i₁∘g₂, s₁]]⁻¹ ∘ (i₂; 0)`.
pub fn triple_compose(t1: &LocTriple, t2: &LocTriple) -> Result<LocTriple> {
    if t2.target != t1.source {
        return shape_err("triple composition needs target(t2) = source(t1)");
    }
    let ring = t1.ring().clone();
    let glue = t1.i.compose(&t2.g)?.negate();
    let cert = extend(&t2.cert, &t1.cert, &glue)?;
    let g = MatMorphism::zero(&ring, t1.target.rank(), t2.g.cols()).hstack(&t1.g)?;
    let s = MatMorphism::block(
        &ring,
        &[
            vec![
                t2.s.clone(),
                MatMorphism::zero(&ring, t2.s.rows(), t1.s.cols()),
            ],
            vec![glue.clone(), t1.s.clone()],
        ],
    )?;
    let i =
        t2.i.vstack(&MatMorphism::zero(&ring, t1.s.rows(), t2.source.rank()))?;
    LocTriple::new(t2.source, t1.target, g, s, i, cert)
}

/// Sum of parallel triples: `(g₁, g₂) ∘ (s₁⊕s₂)⁻¹ ∘ (i₁; i₂)`.
pub fn triple_add(t1: &LocTriple, t2: &LocTriple) -> Result<LocTriple> {
    if t1.source != t2.source || t1.target != t2.target {
        return shape_err("triple addition needs equal sources and targets");
    }
    let glue = MatMorphism::zero(t1.ring(), t2.s.rows(), t1.s.cols());
    let cert = extend(&t1.cert, &t2.cert, &glue)?;
    LocTriple::new(
        t1.source,
        t1.target,
        t1.g.hstack(&t2.g)?,
        t1.s.direct_sum(&t2.s),
        t1.i.vstack(&t2.i)?,
        cert,
    )
}

pub fn triple_negate(t: &LocTriple) -> LocTriple {
    LocTriple {
        g: t.g.negate(),
        ..t.clone()
    }
}

/// A roof `forward ∘ backward⁻¹ : source → target` with apex a complex
/// supported in degrees `[0, 1]`.
///
/// The certificate witnesses the cone of `backward` up to the explicit
/// identification carried alongside: `cert.assembled = p ∘ M ∘ q` where
/// `M = [−d_apex; backward]` is the cone differential and `p`, `q` are
/// invertible with recorded inverses.
#[derive(Debug, Clone)]
pub struct Roof {
    apex0: FreeObject,
    apex1: FreeObject,
    diff: MatMorphism,
    source: FreeObject,
    target: FreeObject,
    forward: MatMorphism,
    backward: MatMorphism,
    cert: TriangularCert,
    p: MatMorphism,
    p_inv: MatMorphism,
    q: MatMorphism,
    q_inv: MatMorphism,
}

impl Roof {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        diff: MatMorphism,
        source: FreeObject,
        target: FreeObject,
        forward: MatMorphism,
        backward: MatMorphism,
        cert: TriangularCert,
        p: MatMorphism,
        p_inv: MatMorphism,
        q: MatMorphism,
        q_inv: MatMorphism,
    ) -> Result<Self> {
        let apex0 = diff.domain();
        let apex1 = diff.codomain();
        if forward.cols() != apex0.rank() || forward.rows() != target.rank() {
            return shape_err("roof forward map has wrong shape");
        }
        if backward.cols() != apex0.rank() || backward.rows() != source.rank() {
            return shape_err("roof backward map has wrong shape");
        }
        let ring = diff.ring().clone();
        let idp = MatMorphism::identity(&ring, p.rows());
        let idq = MatMorphism::identity(&ring, q.cols());
        if p.compose(&p_inv)? != idp || p_inv.compose(&p)? != idp {
            return Err(EngineError::Invariant("p and p_inv are not inverse".into()));
        }
        if q.compose(&q_inv)? != idq || q_inv.compose(&q)? != idq {
            return Err(EngineError::Invariant("q and q_inv are not inverse".into()));
        }
        let cone_mat = diff.negate().vstack(&backward)?;
        if &p.compose(&cone_mat)?.compose(&q)? != cert.assembled() {
            return Err(EngineError::Invariant(
                "certificate does not match the cone of the backward map".into(),
            ));
        }
        Ok(Roof {
            apex0,
            apex1,
            diff,
            source,
            target,
            forward,
            backward,
            cert,
            p,
            p_inv,
            q,
            q_inv,
        })
    }

    pub fn source(&self) -> FreeObject {
        self.source
    }

    pub fn target(&self) -> FreeObject {
        self.target
    }

    pub fn apex(&self) -> Result<BoundedComplex> {
        BoundedComplex::new(
            self.diff.ring(),
            0,
            vec![self.apex0.rank(), self.apex1.rank()],
            vec![self.diff.clone()],
        )
    }

    pub fn ring(&self) -> &Ring {
        self.diff.ring()
    }

    pub fn apex_degree1(&self) -> FreeObject {
        self.apex1
    }

    pub fn cert(&self) -> &TriangularCert {
        &self.cert
    }

    /// The roof of a plain morphism: apex concentrated in degree 0,
    /// backward the identity.
    pub fn plain(sset: &Arc<SSet>, f: &MatMorphism) -> Result<Roof> {
        let ring = f.ring().clone();
        let a = f.domain();
        let cert = TriangularCert::singleton_identity(sset.clone(), a)?;
        let id = MatMorphism::identity(&ring, a.rank());
        Roof::new(
            MatMorphism::zero(&ring, 0, a.rank()),
            a,
            f.codomain(),
            f.clone(),
            id.clone(),
            cert,
            id.clone(),
            id.clone(),
            id.clone(),
            id,
        )
    }

    /// The roof of `s_k⁻¹`: apex the domain of `s_k`, backward `s_k`.
    pub fn inverse_of_s(sset: &Arc<SSet>, k: usize) -> Result<Roof> {
        let s_k = sset.element(k)?.clone();
        let ring = s_k.ring().clone();
        let cert = TriangularCert::singleton_s(sset.clone(), k)?;
        let idq = MatMorphism::identity(&ring, s_k.rows());
        let idp = MatMorphism::identity(&ring, s_k.cols());
        Roof::new(
            MatMorphism::zero(&ring, 0, s_k.cols()),
            s_k.codomain(),
            s_k.domain(),
            idp.clone(),
            s_k,
            cert,
            idq.clone(),
            idq,
            idp.clone(),
            idp,
        )
    }
}

fn permutation_matrix(ring: &Ring, perm: &[usize]) -> MatMorphism {
    let n = perm.len();
    let mut m = MatMorphism::zero(ring, n, n);
    for (i, &j) in perm.iter().enumerate() {
        m.set(i, j, ring.one());
    }
    m
}

/// Compose two roofs: the new apex has degree-0 part `L⁰ ⊕ T⁰` and degree-1
/// part `L¹ ⊕ T¹ ⊕ B`, with differential `[[d_L, 0], [0, d_T], [f⁰, −t⁰]]`.
/// The certificate of the composite is the extension of the two input
/// certificates.
pub fn compose_roofs(phi: &Roof, psi: &Roof) -> Result<Roof> {
    if phi.target != psi.source {
        return shape_err("roof composition needs target(phi) = source(psi)");
    }
    let ring = phi.ring().clone();
    let b = phi.target.rank();
    let l0 = phi.apex0.rank();
    let l1 = phi.apex1.rank();
    let t0 = psi.apex0.rank();
    let t1 = psi.apex1.rank();

    let diff = MatMorphism::block(
        &ring,
        &[
            vec![phi.diff.clone(), MatMorphism::zero(&ring, l1, t0)],
            vec![MatMorphism::zero(&ring, t1, l0), psi.diff.clone()],
            vec![phi.forward.clone(), psi.backward.negate()],
        ],
    )?;
    let backward = phi
        .backward
        .hstack(&MatMorphism::zero(&ring, phi.source.rank(), t0))?;
    let forward = MatMorphism::zero(&ring, psi.target.rank(), l0).hstack(&psi.forward)?;

    // glue = p_psi ∘ [0; −f⁰] ∘ q_phi
    let g_block = MatMorphism::zero(&ring, t1, l0).vstack(&phi.forward.negate())?;
    let glue = psi.p.compose(&g_block)?.compose(&phi.q)?;
    let cert = extend(&phi.cert, &psi.cert, &glue)?;

    // cone rows are (L¹, T¹, B, A); the certificate rows are (L¹, A, T¹, B)
    let a = phi.source.rank();
    let mut perm = Vec::with_capacity(l1 + t1 + b + a);
    perm.extend(0..l1); // L¹
    perm.extend(l1 + t1 + b..l1 + t1 + b + a); // A
    perm.extend(l1..l1 + t1); // T¹
    perm.extend(l1 + t1..l1 + t1 + b); // B
    let r = permutation_matrix(&ring, &perm);
    let p = phi.p.direct_sum(&psi.p).compose(&r)?;
    let p_inv = r.transpose().compose(&phi.p_inv.direct_sum(&psi.p_inv))?;
    let q = phi.q.direct_sum(&psi.q);
    let q_inv = phi.q_inv.direct_sum(&psi.q_inv);

    Roof::new(
        diff, phi.source, psi.target, forward, backward, cert, p, p_inv, q, q_inv,
    )
}

/// Fold a roof into a triple: `s` is the certified twist of the cone
/// differential `[−d; y⁰]`, and `g`, `i` are adjusted through the recorded
/// identification so the localized morphism is unchanged.
pub fn roof_to_triple(roof: &Roof) -> Result<LocTriple> {
    let ring = roof.ring().clone();
    let a = roof.source.rank();
    let c1 = roof.apex1.rank();
    let s = roof.cert.assembled().clone();
    let g = roof.forward.compose(&roof.q)?;
    // i = p ∘ (0; id_A) : A → twisted (C¹ ⊕ A)
    let raw_i = MatMorphism::zero(&ring, c1, a).vstack(&MatMorphism::identity(&ring, a))?;
    let i = roof.p.compose(&raw_i)?;
    LocTriple::new(roof.source, roof.target, g, s, i, roof.cert.clone())
}

/// One letter of a zig-zag word.
#[derive(Debug, Clone, PartialEq)]
pub enum ZigToken {
    Forward(MatMorphism),
    InverseOfS(usize),
}

/// A composable word of morphisms and formal inverses, stored in
/// application order (the first token acts first).
#[derive(Debug, Clone, PartialEq)]
pub struct ZigZag {
    pub tokens: Vec<ZigToken>,
}

impl ZigZag {
    pub fn ends(&self, sset: &SSet) -> Result<(FreeObject, FreeObject)> {
        let mut it = self.tokens.iter();
        let Some(first) = it.next() else {
            return Err(EngineError::Precondition("empty zig-zag".into()));
        };
        let (src, mut dst) = token_ends(first, sset)?;
        for t in it {
            let (s, d) = token_ends(t, sset)?;
            if s != dst {
                return shape_err("zig-zag tokens do not chain");
            }
            dst = d;
        }
        Ok((src, dst))
    }
}

fn token_ends(t: &ZigToken, sset: &SSet) -> Result<(FreeObject, FreeObject)> {
    Ok(match t {
        ZigToken::Forward(f) => (f.domain(), f.codomain()),
        ZigToken::InverseOfS(k) => {
            let s = sset.element(*k)?;
            (s.codomain(), s.domain())
        }
    })
}

/// Left-fold a zig-zag into a single triple via roof composition.
pub fn zigzag_normalize(sset: &Arc<SSet>, z: &ZigZag) -> Result<LocTriple> {
    let mut it = z.tokens.iter();
    let Some(first) = it.next() else {
        return Err(EngineError::Precondition("empty zig-zag".into()));
    };
    let mut roof = token_roof(sset, first)?;
    for t in it {
        let next = token_roof(sset, t)?;
        roof = compose_roofs(&roof, &next)?;
    }
    roof_to_triple(&roof)
}

fn token_roof(sset: &Arc<SSet>, t: &ZigToken) -> Result<Roof> {
    match t {
        ZigToken::Forward(f) => Roof::plain(sset, f),
        ZigToken::InverseOfS(k) => Roof::inverse_of_s(sset, *k),
    }
}

/// A ring translation `R → R'` applied entrywise to matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct RingHom {
    source: Ring,
    target: Ring,
    kind: HomKind,
}

#[derive(Debug, Clone, PartialEq)]
enum HomKind {
    /// The canonical map when one exists (identity, Z → Q, base → fractions).
    Canonical,
    /// Substitute the given images for the generators.
    Substitute(Vec<RingElement>),
}

impl RingHom {
    pub fn identity(ring: &Ring) -> Self {
        RingHom {
            source: ring.clone(),
            target: ring.clone(),
            kind: HomKind::Canonical,
        }
    }

    /// The embedding into the fraction ring of the source.
    pub fn into_fractions(source: &Ring) -> Result<Self> {
        let target = source
            .fraction_ring()
            .ok_or_else(|| EngineError::Precondition(format!("{} has no fraction ring", source)))?;
        Ok(RingHom {
            source: source.clone(),
            target,
            kind: HomKind::Canonical,
        })
    }

    pub fn canonical(source: &Ring, target: &Ring) -> Result<Self> {
        let ok = source == target
            || matches!(
                (source.kind(), target.kind()),
                (RingKind::Integers, RingKind::Rationals)
                    | (RingKind::Integers, RingKind::PolynomialsQ)
                    | (RingKind::Rationals, RingKind::PolynomialsQ)
                    | (RingKind::Integers, RingKind::RationalFunctionsQ)
                    | (RingKind::Rationals, RingKind::RationalFunctionsQ)
                    | (RingKind::PolynomialsQ, RingKind::RationalFunctionsQ)
            );
        if !ok {
            return Err(EngineError::Precondition(format!(
                "no canonical map {} → {}",
                source, target
            )));
        }
        Ok(RingHom {
            source: source.clone(),
            target: target.clone(),
            kind: HomKind::Canonical,
        })
    }

    /// Map generators of `Q[t]` or a free algebra to the given images.
    pub fn substitute(source: &Ring, target: &Ring, images: Vec<RingElement>) -> Result<Self> {
        let expected = match source.kind() {
            RingKind::PolynomialsQ => 1,
            RingKind::FreeAlgebraQ { generators } => generators.len(),
            _ => {
                return Err(EngineError::Precondition(format!(
                    "{} has no generators to substitute",
                    source
                )))
            }
        };
        if images.len() != expected {
            return Err(EngineError::Precondition(format!(
                "expected {} generator images, got {}",
                expected,
                images.len()
            )));
        }
        for img in &images {
            if img.ring() != target {
                return Err(EngineError::Coeff(target.mismatch(img.ring())));
            }
        }
        Ok(RingHom {
            source: source.clone(),
            target: target.clone(),
            kind: HomKind::Substitute(images),
        })
    }

    pub fn source(&self) -> &Ring {
        &self.source
    }

    pub fn target(&self) -> &Ring {
        &self.target
    }

    pub fn apply(&self, e: &RingElement) -> Result<RingElement> {
        if e.ring() != &self.source {
            return Err(EngineError::Coeff(self.source.mismatch(e.ring())));
        }
        match &self.kind {
            HomKind::Canonical => {
                if self.source == self.target {
                    return Ok(e.clone());
                }
                if Some(self.target.clone()) == self.source.fraction_ring() {
                    return Ok(e.to_fraction_ring());
                }
                match e.value() {
                    Value::Int(n) => Ok(RingElement::from_rational(
                        &self.target,
                        num_rational::BigRational::from_integer(n.clone()),
                    )),
                    Value::Rat(q) => Ok(RingElement::from_rational(&self.target, q.clone())),
                    Value::Poly(p) => Ok(RingElement::poly(&self.target, p.clone())),
                    _ => Err(EngineError::Precondition(
                        "unsupported canonical map".into(),
                    )),
                }
            }
            HomKind::Substitute(images) => match e.value() {
                Value::Int(n) => Ok(RingElement::from_rational(
                    &self.target,
                    num_rational::BigRational::from_integer(n.clone()),
                )),
                Value::Rat(q) => Ok(RingElement::from_rational(&self.target, q.clone())),
                Value::Poly(p) => {
                    let mut acc = self.target.zero();
                    for c in p.iter().rev() {
                        acc = acc.mul(&images[0]).map_err(EngineError::from)?;
                        acc = acc
                            .add(&RingElement::from_rational(&self.target, c.clone()))
                            .map_err(EngineError::from)?;
                    }
                    Ok(acc)
                }
                Value::Free(terms) => {
                    let mut acc = self.target.zero();
                    for (w, c) in terms {
                        let mut prod = RingElement::from_rational(&self.target, c.clone());
                        for &gidx in w {
                            prod = prod
                                .mul(&images[gidx as usize])
                                .map_err(EngineError::from)?;
                        }
                        acc = acc.add(&prod).map_err(EngineError::from)?;
                    }
                    Ok(acc)
                }
                Value::RatFun { .. } => Err(EngineError::Precondition(
                    "cannot substitute into fractions".into(),
                )),
            },
        }
    }

    pub fn apply_matrix(&self, m: &MatMorphism) -> Result<MatMorphism> {
        m.map_entries(&self.target, |e| self.apply(e))
    }
}

/// An additive functor out of the localized category: a ring translation
/// together with inverses of the images of every element of `S`.
#[derive(Debug, Clone)]
pub struct LocFunctor {
    hom: RingHom,
    sset: Arc<SSet>,
    s_inverses: Vec<MatMorphism>,
}

impl LocFunctor {
    /// Build by inverting each `F(s_k)` with the matrix inverter of the
    /// target ring. Fails when some image is not (recognizably) invertible.
    pub fn new(hom: RingHom, sset: Arc<SSet>) -> Result<Self> {
        let mut s_inverses = Vec::with_capacity(sset.len());
        for (k, s) in sset.elements().iter().enumerate() {
            let img = hom.apply_matrix(s)?;
            let inv = img.invert().ok_or_else(|| {
                EngineError::Precondition(format!(
                    "image of S element {} is not invertible over {}",
                    k,
                    hom.target()
                ))
            })?;
            s_inverses.push(inv);
        }
        Ok(LocFunctor {
            hom,
            sset,
            s_inverses,
        })
    }

    /// Build with caller-supplied inverse images (verified).
    pub fn with_inverses(
        hom: RingHom,
        sset: Arc<SSet>,
        s_inverses: Vec<MatMorphism>,
    ) -> Result<Self> {
        if s_inverses.len() != sset.len() {
            return Err(EngineError::Precondition(
                "one inverse per S element required".into(),
            ));
        }
        for (k, (s, inv)) in sset.elements().iter().zip(&s_inverses).enumerate() {
            let img = hom.apply_matrix(s)?;
            let idl = MatMorphism::identity(hom.target(), img.rows());
            let idr = MatMorphism::identity(hom.target(), img.cols());
            if img.compose(inv)? != idl || inv.compose(&img)? != idr {
                return Err(EngineError::Precondition(format!(
                    "supplied inverse for S element {} fails",
                    k
                )));
            }
        }
        Ok(LocFunctor {
            hom,
            sset,
            s_inverses,
        })
    }

    /// The fraction-ring evaluation used by the commutative oracle.
    pub fn fractions(sset: Arc<SSet>) -> Result<Self> {
        let hom = RingHom::into_fractions(sset.ring())?;
        Self::new(hom, sset)
    }

    pub fn hom(&self) -> &RingHom {
        &self.hom
    }

    pub fn target(&self) -> &Ring {
        self.hom.target()
    }

    /// Invert the image of a certified morphism: directly when the target
    /// inverter succeeds, otherwise through the elementary factorization of
    /// the certificate.
    fn invert_image(&self, cert: &TriangularCert, s: &MatMorphism) -> Result<MatMorphism> {
        let img = self.hom.apply_matrix(s)?;
        if let Some(inv) = img.invert() {
            return Ok(inv);
        }
        let target = self.hom.target().clone();
        let factors = factor_elementary(cert)?;
        let mut acc: Option<MatMorphism> = None;
        // s = f₁ ∘ … ∘ f_m, so s⁻¹ = F(f_m)⁻¹ ∘ … ∘ F(f₁)⁻¹
        for f in factors.iter().rev() {
            let finv = match f {
                Factor::Invertible { inverse, .. } => self.hom.apply_matrix(inverse)?,
                Factor::InS { parts, .. } => {
                    let mut block: Option<MatMorphism> = None;
                    for part in parts {
                        let piece = match part {
                            DiagTag::ElementOfS(k) => self.s_inverses[*k].clone(),
                            DiagTag::Identity(obj) => MatMorphism::identity(&target, obj.rank()),
                        };
                        block = Some(match block {
                            None => piece,
                            Some(b) => b.direct_sum(&piece),
                        });
                    }
                    block.unwrap_or_else(|| MatMorphism::zero(&target, 0, 0))
                }
            };
            acc = Some(match acc {
                None => finv,
                Some(a) => a.compose(&finv)?,
            });
        }
        acc.ok_or_else(|| EngineError::Precondition("empty factorization".into()))
    }

    /// Evaluate a triple: `F(g) ∘ F(s)⁻¹ ∘ F(i)`.
    pub fn evaluate(&self, t: &LocTriple) -> Result<MatMorphism> {
        if t.sset().as_ref() != self.sset.as_ref() {
            return Err(EngineError::Precondition(
                "triple references a different S set".into(),
            ));
        }
        let fg = self.hom.apply_matrix(&t.g)?;
        let fi = self.hom.apply_matrix(&t.i)?;
        let fs_inv = self.invert_image(&t.cert, &t.s)?;
        fg.compose(&fs_inv)?.compose(&fi)
    }

    /// Evaluate a roof by folding it first; exposed for cross-checking the
    /// fold against direct forward/backward evaluation.
    pub fn evaluate_roof(&self, roof: &Roof) -> Result<MatMorphism> {
        self.evaluate(&roof_to_triple(roof)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangular::SSet;

    fn setup_z2() -> (Ring, Arc<SSet>) {
        let z = Ring::integers();
        let s = SSet::new(&z, vec![MatMorphism::from_i64_rows(&z, &[&[2]])]).unwrap();
        (z, Arc::new(s))
    }

    #[test]
    fn plain_triples() {
        let (z, s) = setup_z2();
        let f = MatMorphism::from_i64_rows(&z, &[&[2]]);
        let t = from_plain(&s, &f).unwrap();
        assert_eq!(t.g(), &f);
        assert!(t.s().is_identity());
        assert!(t.i().is_identity());
        assert_eq!(t.canonical_summand(), Some(FreeObject(0)));

        let idt = from_plain(&s, &MatMorphism::identity(&z, 2)).unwrap();
        assert!(idt.g().is_identity());
    }

    #[test]
    fn invert_s_shapes() {
        let (_, s) = setup_z2();
        let t = invert_s(&s, 0).unwrap();
        assert_eq!(t.source(), FreeObject(1));
        assert_eq!(t.target(), FreeObject(1));
        assert!(t.g().is_identity());
        assert_eq!(t.s(), s.element(0).unwrap());
    }

    #[test]
    fn oracle_values_of_basic_triples() {
        let (_, s) = setup_z2();
        let q = Ring::rationals();
        let f = LocFunctor::fractions(s.clone()).unwrap();
        // inv(s) evaluates to 1/2
        let inv = invert_s(&s, 0).unwrap();
        let m = f.evaluate(&inv).unwrap();
        assert_eq!(m.to_string(), "[[1/2]]");
        // inv(s) ∘ s = id
        let plain2 = from_plain(&s, s.element(0).unwrap()).unwrap();
        let comp = triple_compose(&inv, &plain2).unwrap();
        assert!(f.evaluate(&comp).unwrap().is_identity());
        // s ∘ inv(s) = id
        let comp = triple_compose(&plain2, &inv).unwrap();
        assert!(f.evaluate(&comp).unwrap().is_identity());
        // inv(s) + inv(s) = 1
        let sum = triple_add(&inv, &inv).unwrap();
        assert!(f.evaluate(&sum).unwrap().is_identity());
        // block shape of the composition matches the formula
        let comp = triple_compose(&inv, &inv).unwrap();
        assert_eq!(
            comp.s(),
            &MatMorphism::from_i64_rows(&Ring::integers(), &[&[2, 0], &[-1, 2]])
        );
        let m = f.evaluate(&comp).unwrap();
        assert_eq!(
            m,
            MatMorphism::from_rows(&q, vec![vec![q.from_i64(4).try_invert().unwrap()]]).unwrap()
        );
    }

    #[test]
    fn dsum_matches_plain() {
        let (z, s) = setup_z2();
        let f = MatMorphism::from_i64_rows(&z, &[&[3]]);
        let g = MatMorphism::from_i64_rows(&z, &[&[5]]);
        let t = triple_dsum(&from_plain(&s, &f).unwrap(), &from_plain(&s, &g).unwrap()).unwrap();
        let expected = from_plain(&s, &f.direct_sum(&g)).unwrap();
        assert_eq!(t.g(), expected.g());
        assert_eq!(t.s(), expected.s());
        assert_eq!(t.i(), expected.i());
    }

    #[test]
    fn roofs_fold_to_triples() {
        let (z, s) = setup_z2();
        // plain roof folds to the plain triple
        let f = MatMorphism::from_i64_rows(&z, &[&[7]]);
        let t = roof_to_triple(&Roof::plain(&s, &f).unwrap()).unwrap();
        assert_eq!(t.g(), &f);
        assert!(t.s().is_identity());

        // words s⁻¹·s and s·s⁻¹ normalize to the identity under the oracle
        let func = LocFunctor::fractions(s.clone()).unwrap();
        let word = ZigZag {
            tokens: vec![
                ZigToken::InverseOfS(0),
                ZigToken::Forward(s.element(0).unwrap().clone()),
            ],
        };
        let t = zigzag_normalize(&s, &word).unwrap();
        assert!(func.evaluate(&t).unwrap().is_identity());

        let word = ZigZag {
            tokens: vec![
                ZigToken::Forward(s.element(0).unwrap().clone()),
                ZigToken::InverseOfS(0),
            ],
        };
        let t = zigzag_normalize(&s, &word).unwrap();
        assert!(func.evaluate(&t).unwrap().is_identity());

        // composed inversions: 2⁻¹ ∘ 2⁻¹ = 1/4
        let word = ZigZag {
            tokens: vec![ZigToken::InverseOfS(0), ZigToken::InverseOfS(0)],
        };
        let t = zigzag_normalize(&s, &word).unwrap();
        let m = func.evaluate(&t).unwrap();
        let q = Ring::rationals();
        assert_eq!(
            m,
            MatMorphism::from_rows(&q, vec![vec![q.from_i64(4).try_invert().unwrap()]]).unwrap()
        );
        // the certificate carries identity and S tags only
        assert!(t
            .cert()
            .diag()
            .iter()
            .all(|d| matches!(d, DiagTag::ElementOfS(_) | DiagTag::Identity(_))));
    }

    #[test]
    fn folding_preserves_evaluation() {
        // over Q with an invertible backward map, the folded triple
        // evaluates to F(forward) ∘ F(backward)⁻¹
        let q = Ring::rationals();
        let s_el = MatMorphism::from_i64_rows(&q, &[&[2, 1], &[1, 1]]);
        let sset = Arc::new(SSet::new(&q, vec![s_el.clone()]).unwrap());
        let func = LocFunctor::fractions(sset.clone()).unwrap();
        let roof = Roof::inverse_of_s(&sset, 0).unwrap();
        let direct = MatMorphism::identity(&q, 2)
            .compose(&s_el.invert().unwrap())
            .unwrap();
        assert_eq!(func.evaluate_roof(&roof).unwrap(), direct);

        // evaluation is multiplicative across roof composition
        let f = MatMorphism::from_i64_rows(&q, &[&[3, 0], &[1, 2]]);
        let phi = Roof::plain(&sset, &f).unwrap();
        let comp = compose_roofs(&phi, &roof).unwrap();
        let expect = func
            .evaluate_roof(&roof)
            .unwrap()
            .compose(&func.evaluate_roof(&phi).unwrap())
            .unwrap();
        assert_eq!(func.evaluate_roof(&comp).unwrap(), expect);
    }

    #[test]
    fn composed_roof_has_expected_apex() {
        let (_, s) = setup_z2();
        let phi = Roof::inverse_of_s(&s, 0).unwrap();
        let psi = Roof::inverse_of_s(&s, 0).unwrap();
        let comp = compose_roofs(&phi, &psi).unwrap();
        // degree-1 part is L¹ ⊕ T¹ ⊕ B = 0 ⊕ 0 ⊕ R¹
        assert_eq!(comp.apex_degree1(), FreeObject(1));
    }

    #[test]
    fn functor_into_polynomials() {
        let (_, s) = setup_z2();
        let hom = RingHom::canonical(&Ring::integers(), &Ring::polynomials()).unwrap();
        let f = LocFunctor::new(hom, s.clone()).unwrap();
        let inv = invert_s(&s, 0).unwrap();
        let m = f.evaluate(&inv).unwrap();
        assert_eq!(m.to_string(), "[[1/2]]");
    }

    #[test]
    fn factor_path_inverts_with_supplied_images() {
        // the swap matrix is invertible but not triangular, so the direct
        // inverter over a free algebra fails; the certificate's elementary
        // factorization routes through the supplied inverse instead
        let r = Ring::free_algebra(vec!["x", "y"]);
        let swap = MatMorphism::from_i64_rows(&r, &[&[0, 1], &[1, 0]]);
        let sset = Arc::new(SSet::new(&r, vec![swap.clone()]).unwrap());
        assert!(swap.invert().is_none());
        assert!(LocFunctor::new(RingHom::identity(&r), sset.clone()).is_err());
        let f = LocFunctor::with_inverses(RingHom::identity(&r), sset.clone(), vec![swap.clone()])
            .unwrap();
        let t = invert_s(&sset, 0).unwrap();
        assert_eq!(f.evaluate(&t).unwrap(), swap);
    }

    #[test]
    fn substitution_hom() {
        let p = Ring::polynomials();
        let q = Ring::rationals();
        let hom = RingHom::substitute(&p, &q, vec![q.from_i64(3)]).unwrap();
        let e = crate::coeff::parse_element(&p, "t^2 - 1").unwrap();
        assert_eq!(hom.apply(&e).unwrap(), q.from_i64(8));
    }
}
