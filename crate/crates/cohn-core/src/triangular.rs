//! Certificates for the localizing class `D`: block-lower-triangular
//! matrices with elements of `S` (or identities) on the diagonal, their
//! extensions, and the elementary factorization that makes them invertible
//! in the localized category.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::addcat::{FreeObject, MatMorphism};
use crate::coeff::Ring;
use crate::complexes::BoundedComplex;
use crate::{shape_err, EngineError, Result};

/// The declared set `S ⊂ Mor(A)` of morphisms to invert, with its closure
/// flags. Elements may have any shape.
#[derive(Clone, PartialEq)]
pub struct SSet {
    ring: Ring,
    elements: Vec<MatMorphism>,
    pub contains_identities: bool,
    pub closed_under_direct_sums: bool,
}

impl fmt::Debug for SSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SSet({} elements over {})",
            self.elements.len(),
            self.ring
        )
    }
}

impl SSet {
    pub fn new(ring: &Ring, elements: Vec<MatMorphism>) -> Result<Self> {
        for e in &elements {
            if e.ring() != ring {
                return Err(EngineError::Coeff(ring.mismatch(e.ring())));
            }
        }
        Ok(SSet {
            ring: ring.clone(),
            elements,
            contains_identities: true,
            closed_under_direct_sums: true,
        })
    }

    pub fn empty(ring: &Ring) -> Self {
        SSet {
            ring: ring.clone(),
            elements: Vec::new(),
            contains_identities: true,
            closed_under_direct_sums: true,
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, k: usize) -> Result<&MatMorphism> {
        self.elements
            .get(k)
            .ok_or_else(|| EngineError::Precondition(format!("no S element with index {}", k)))
    }

    pub fn elements(&self) -> &[MatMorphism] {
        &self.elements
    }
}

/// One diagonal entry of a triangular certificate: an element of `S` (by
/// index) or an identity morphism. Identity entries witness membership in
/// the extended class `Ŝ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagTag {
    ElementOfS(usize),
    Identity(FreeObject),
}

/// A certificate that the two-term complex assembled from a block
/// lower-triangular matrix lies in `D` (all tags in `S`) or that the
/// assembled morphism lies in `Ŝ` (identity tags allowed).
///
/// `assembled` always equals the block matrix built from the diagonal tags
/// and the below-diagonal blocks; the constructor enforces this, so holding
/// a value of this type is holding the invariant.
#[derive(Clone, PartialEq)]
pub struct TriangularCert {
    sset: Arc<SSet>,
    diag: Vec<DiagTag>,
    /// keyed by (row block l, column block k) with k < l
    below: BTreeMap<(usize, usize), MatMorphism>,
    assembled: MatMorphism,
}

impl fmt::Debug for TriangularCert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TriangularCert(n={}, {})",
            self.diag.len(),
            self.assembled
        )
    }
}

impl TriangularCert {
    pub fn new(
        sset: Arc<SSet>,
        diag: Vec<DiagTag>,
        below: BTreeMap<(usize, usize), MatMorphism>,
    ) -> Result<Self> {
        let ring = sset.ring().clone();
        let n = diag.len();
        let mut src_ranks = Vec::with_capacity(n);
        let mut dst_ranks = Vec::with_capacity(n);
        let mut diag_mats = Vec::with_capacity(n);
        for tag in &diag {
            let m = match tag {
                DiagTag::ElementOfS(k) => sset.element(*k)?.clone(),
                DiagTag::Identity(obj) => MatMorphism::identity(&ring, obj.rank()),
            };
            src_ranks.push(m.cols());
            dst_ranks.push(m.rows());
            diag_mats.push(m);
        }
        for (&(l, k), b) in &below {
            if k >= l || l >= n {
                return shape_err(format!("below-diagonal key ({}, {}) out of range", l, k));
            }
            if b.rows() != dst_ranks[l] || b.cols() != src_ranks[k] {
                return shape_err(format!(
                    "block ({}, {}) must be {}x{}",
                    l, k, dst_ranks[l], src_ranks[k]
                ));
            }
        }
        let mut grid: Vec<Vec<MatMorphism>> = Vec::with_capacity(n);
        for l in 0..n {
            let mut band = Vec::with_capacity(n);
            for k in 0..n {
                let block = if l == k {
                    diag_mats[l].clone()
                } else if k < l {
                    below
                        .get(&(l, k))
                        .cloned()
                        .unwrap_or_else(|| MatMorphism::zero(&ring, dst_ranks[l], src_ranks[k]))
                } else {
                    MatMorphism::zero(&ring, dst_ranks[l], src_ranks[k])
                };
                band.push(block);
            }
            grid.push(band);
        }
        let assembled = MatMorphism::block(&ring, &grid)?;
        Ok(TriangularCert {
            sset,
            diag,
            below,
            assembled,
        })
    }

    pub fn singleton_s(sset: Arc<SSet>, k: usize) -> Result<Self> {
        Self::new(sset, vec![DiagTag::ElementOfS(k)], BTreeMap::new())
    }

    pub fn singleton_identity(sset: Arc<SSet>, obj: FreeObject) -> Result<Self> {
        Self::new(sset, vec![DiagTag::Identity(obj)], BTreeMap::new())
    }

    pub fn empty(sset: Arc<SSet>) -> Self {
        Self::new(sset, Vec::new(), BTreeMap::new()).expect("empty certificate")
    }

    pub fn sset(&self) -> &Arc<SSet> {
        &self.sset
    }

    pub fn ring(&self) -> &Ring {
        self.sset.ring()
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[DiagTag] {
        &self.diag
    }

    pub fn below(&self) -> &BTreeMap<(usize, usize), MatMorphism> {
        &self.below
    }

    pub fn assembled(&self) -> &MatMorphism {
        &self.assembled
    }

    /// True when every diagonal tag is an element of `S` (certifies `D`
    /// membership, not just `Ŝ`).
    pub fn is_pure_s(&self) -> bool {
        self.diag
            .iter()
            .all(|t| matches!(t, DiagTag::ElementOfS(_)))
    }

    pub fn diag_matrix(&self, idx: usize) -> MatMorphism {
        match &self.diag[idx] {
            DiagTag::ElementOfS(k) => self.sset.element(*k).expect("validated").clone(),
            DiagTag::Identity(obj) => MatMorphism::identity(self.ring(), obj.rank()),
        }
    }

    pub(crate) fn src_ranks(&self) -> Vec<usize> {
        (0..self.size())
            .map(|i| self.diag_matrix(i).cols())
            .collect()
    }

    pub(crate) fn dst_ranks(&self) -> Vec<usize> {
        (0..self.size())
            .map(|i| self.diag_matrix(i).rows())
            .collect()
    }
}

/// The two-term complex `⊕ Sⱼ⁻¹ → ⊕ Sⱼ⁰` in degrees `(−1, 0)` assembled
/// from the certificate.
pub fn assemble(cert: &TriangularCert) -> Result<BoundedComplex> {
    BoundedComplex::two_term(cert.assembled(), -1)
}

/// Concatenate two certificates along connecting data `glue` from the
/// sources of `first` to the targets of `second`: the result assembles to
/// `[[t₁, 0], [glue, t₂]]`.
pub fn extend(
    first: &TriangularCert,
    second: &TriangularCert,
    glue: &MatMorphism,
) -> Result<TriangularCert> {
    if first.sset() != second.sset() {
        return Err(EngineError::Precondition(
            "certificates reference different S sets".into(),
        ));
    }
    let src1 = first.src_ranks();
    let dst2 = second.dst_ranks();
    let total_src1: usize = src1.iter().sum();
    let total_dst2: usize = dst2.iter().sum();
    if glue.cols() != total_src1 || glue.rows() != total_dst2 {
        return shape_err(format!(
            "glue must be {}x{}, got {}x{}",
            total_dst2,
            total_src1,
            glue.rows(),
            glue.cols()
        ));
    }
    let n1 = first.size();
    let mut diag = first.diag.to_vec();
    diag.extend(second.diag.iter().cloned());
    let mut below = first.below.clone();
    for (&(l, k), b) in &second.below {
        below.insert((l + n1, k + n1), b.clone());
    }
    // slice the glue into blocks indexed by (second row block, first col block)
    let mut row_off = 0usize;
    for (l, &dr) in dst2.iter().enumerate() {
        let mut col_off = 0usize;
        for (k, &sc) in src1.iter().enumerate() {
            let rows: Vec<usize> = (row_off..row_off + dr).collect();
            let cols: Vec<usize> = (col_off..col_off + sc).collect();
            let block = glue.submatrix(&rows, &cols);
            if !block.is_zero() {
                below.insert((l + n1, k), block);
            }
            col_off += sc;
        }
        row_off += dr;
    }
    TriangularCert::new(first.sset.clone(), diag, below)
}

/// One factor of an elementary factorization.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// A direct sum of S-elements and identities: the parts record the
    /// summands in order.
    InS {
        matrix: MatMorphism,
        parts: Vec<DiagTag>,
    },
    /// Invertible in the base category, inverse attached.
    Invertible {
        matrix: MatMorphism,
        inverse: MatMorphism,
    },
}

impl Factor {
    pub fn matrix(&self) -> &MatMorphism {
        match self {
            Factor::InS { matrix, .. } => matrix,
            Factor::Invertible { matrix, .. } => matrix,
        }
    }
}

/// Factor the assembled matrix as an ordered composition of morphisms that
/// are either direct sums of S-elements with identities or invertible, by
/// peeling the last diagonal entry. Requires the closure flags of the
/// ambient S set.
pub fn factor_elementary(cert: &TriangularCert) -> Result<Vec<Factor>> {
    if !cert.sset().contains_identities || !cert.sset().closed_under_direct_sums {
        return Err(EngineError::Precondition(
            "factorization needs S to contain identities and be closed under direct sums".into(),
        ));
    }
    let ring = cert.ring().clone();
    let n = cert.size();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Factor::InS {
            matrix: cert.assembled().clone(),
            parts: vec![cert.diag[0].clone()],
        }]);
    }
    // split off the last diagonal entry: assembled = [[t, 0], [g, s_n]]
    let leading = TriangularCert::new(
        cert.sset.clone(),
        cert.diag[..n - 1].to_vec(),
        cert.below
            .iter()
            .filter(|(&(l, _), _)| l < n - 1)
            .map(|(&k, v)| (k, v.clone()))
            .collect(),
    )?;
    let s_n = cert.diag_matrix(n - 1);
    let src1 = leading.src_ranks();
    let total_src1: usize = src1.iter().sum();
    // g : ⊕_{<n} sources → target of s_n
    let mut g = MatMorphism::zero(&ring, s_n.rows(), total_src1);
    let mut col_off = 0usize;
    for (k, &sc) in src1.iter().enumerate() {
        if let Some(b) = cert.below.get(&(n - 1, k)) {
            for i in 0..b.rows() {
                for j in 0..sc {
                    g.set(i, col_off + j, b.at(i, j).clone());
                }
            }
        }
        col_off += sc;
    }

    let mut factors = Vec::new();
    // (t ⊕ id) factors, one per factor of the leading block
    for f in factor_elementary(&leading)? {
        match f {
            Factor::InS { matrix, mut parts } => {
                parts.push(DiagTag::Identity(FreeObject(s_n.rows())));
                factors.push(Factor::InS {
                    matrix: matrix.direct_sum(&MatMorphism::identity(&ring, s_n.rows())),
                    parts,
                });
            }
            Factor::Invertible { matrix, inverse } => {
                let id = MatMorphism::identity(&ring, s_n.rows());
                factors.push(Factor::Invertible {
                    matrix: matrix.direct_sum(&id),
                    inverse: inverse.direct_sum(&id),
                });
            }
        }
    }
    // unipotent middle factor [[id, 0], [g, id]]
    let id_src = MatMorphism::identity(&ring, total_src1);
    let id_dst = MatMorphism::identity(&ring, s_n.rows());
    let zero = MatMorphism::zero(&ring, total_src1, s_n.rows());
    let middle = MatMorphism::block(
        &ring,
        &[
            vec![id_src.clone(), zero.clone()],
            vec![g.clone(), id_dst.clone()],
        ],
    )?;
    let middle_inv = MatMorphism::block(
        &ring,
        &[
            vec![id_src.clone(), zero.clone()],
            vec![g.negate(), id_dst.clone()],
        ],
    )?;
    factors.push(Factor::Invertible {
        matrix: middle,
        inverse: middle_inv,
    });
    // trailing (id ⊕ s_n)
    factors.push(Factor::InS {
        matrix: id_src.direct_sum(&s_n),
        parts: vec![
            DiagTag::Identity(FreeObject(total_src1)),
            cert.diag[n - 1].clone(),
        ],
    });
    Ok(factors)
}

/// Multiply an ordered factor list back together (first factor applied last).
pub fn compose_factors(ring: &Ring, factors: &[Factor]) -> Result<MatMorphism> {
    let mut it = factors.iter();
    let Some(first) = it.next() else {
        return Ok(MatMorphism::zero(ring, 0, 0));
    };
    let mut acc = first.matrix().clone();
    for f in it {
        acc = acc.compose(f.matrix())?;
    }
    Ok(acc)
}
