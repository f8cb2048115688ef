//! The base additive category `Free(R)`: formal free modules of finite rank
//! with matrices as morphisms, plus Karoubization and the small envelope.

use std::fmt;

use crate::coeff::{parse_element, CoeffError, Ring, RingElement, RingKind, Value};
use crate::{shape_err, EngineError, Result};

/// A finitely generated free module, recorded by its rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeObject(pub usize);

impl FreeObject {
    pub fn rank(self) -> usize {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn direct_sum(self, other: FreeObject) -> FreeObject {
        FreeObject(self.0 + other.0)
    }
}

impl fmt::Display for FreeObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R^{}", self.0)
    }
}

/// A morphism of `Free(R)`: a `codomain.rank × domain.rank` matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatMorphism {
    ring: Ring,
    rows: usize,
    cols: usize,
    entries: Vec<RingElement>,
}

impl fmt::Debug for MatMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for MatMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // shapes with exactly one zero dimension keep their sizes explicit
        if (self.rows == 0) != (self.cols == 0) {
            return write!(f, "zeros({},{})", self.rows, self.cols);
        }
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let row: Vec<String> = (0..self.cols).map(|j| self.at(i, j).to_string()).collect();
                format!("[{}]", row.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

impl MatMorphism {
    pub fn new(ring: &Ring, rows: usize, cols: usize, entries: Vec<RingElement>) -> Result<Self> {
        if entries.len() != rows * cols {
            return shape_err(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            ));
        }
        for e in &entries {
            if e.ring() != ring {
                return Err(EngineError::Coeff(ring.mismatch(e.ring())));
            }
        }
        Ok(MatMorphism {
            ring: ring.clone(),
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(ring: &Ring, rows: Vec<Vec<RingElement>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        for row in &rows {
            if row.len() != c {
                return shape_err("ragged matrix rows");
            }
        }
        Self::new(ring, r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_i64_rows(ring: &Ring, rows: &[&[i64]]) -> Self {
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&n| ring.from_i64(n)).collect())
            .collect();
        Self::from_rows(ring, data).expect("literal matrix")
    }

    /// Parse a row-major nested list of element literals, e.g. `[[1,2],[0,1]]`,
    /// or `zeros(r,c)` for shapes with a zero dimension.
    pub fn parse(ring: &Ring, input: &str) -> Result<Self> {
        let s = input.trim();
        if let Some(body) = s.strip_prefix("zeros(").and_then(|b| b.strip_suffix(')')) {
            let (r, c) = body.split_once(',').ok_or_else(|| {
                EngineError::Coeff(CoeffError::Parse("zeros(rows,cols) expected".into()))
            })?;
            let parse_dim = |t: &str| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| EngineError::Coeff(CoeffError::Parse("bad dimension".into())))
            };
            return Ok(MatMorphism::zero(ring, parse_dim(r)?, parse_dim(c)?));
        }
        let inner = s
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| CoeffError::Parse(format!("matrix literal must be [..]: {}", s)))?;
        let inner = inner.trim();
        if inner.is_empty() {
            return MatMorphism::new(ring, 0, 0, Vec::new());
        }
        let mut rows: Vec<Vec<RingElement>> = Vec::new();
        let mut depth = 0usize;
        let mut start = None;
        for (i, ch) in inner.char_indices() {
            match ch {
                '[' => {
                    if depth == 0 {
                        start = Some(i + 1);
                    }
                    depth += 1;
                }
                ']' => {
                    depth = depth.checked_sub(1).ok_or_else(|| {
                        EngineError::Coeff(CoeffError::Parse("unbalanced ']'".into()))
                    })?;
                    if depth == 0 {
                        let body = &inner[start.take().unwrap()..i];
                        let row: Result<Vec<RingElement>> = if body.trim().is_empty() {
                            Ok(Vec::new())
                        } else {
                            body.split(',')
                                .map(|e| parse_element(ring, e).map_err(EngineError::from))
                                .collect()
                        };
                        rows.push(row?);
                    }
                }
                _ => {}
            }
        }
        if depth != 0 {
            return Err(EngineError::Coeff(CoeffError::Parse(
                "unbalanced '['".into(),
            )));
        }
        MatMorphism::from_rows(ring, rows)
    }

    pub fn zero(ring: &Ring, rows: usize, cols: usize) -> Self {
        MatMorphism {
            ring: ring.clone(),
            rows,
            cols,
            entries: vec![ring.zero(); rows * cols],
        }
    }

    pub fn identity(ring: &Ring, n: usize) -> Self {
        let mut m = Self::zero(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain(&self) -> FreeObject {
        FreeObject(self.cols)
    }

    pub fn codomain(&self) -> FreeObject {
        FreeObject(self.rows)
    }

    pub fn at(&self, i: usize, j: usize) -> &RingElement {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RingElement) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(RingElement::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == MatMorphism::identity(&self.ring, self.rows)
    }

    pub fn row_vec(&self, i: usize) -> Vec<RingElement> {
        (0..self.cols).map(|j| self.at(i, j).clone()).collect()
    }

    pub fn rows_vec(&self) -> Vec<Vec<RingElement>> {
        (0..self.rows).map(|i| self.row_vec(i)).collect()
    }

    pub fn add(&self, other: &MatMorphism) -> Result<MatMorphism> {
        if self.rows != other.rows || self.cols != other.cols {
            return shape_err(format!(
                "add {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let entries: std::result::Result<Vec<_>, _> = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(MatMorphism {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: entries?,
        })
    }

    pub fn sub(&self, other: &MatMorphism) -> Result<MatMorphism> {
        self.add(&other.negate())
    }

    pub fn negate(&self) -> MatMorphism {
        MatMorphism {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(RingElement::neg).collect(),
        }
    }

    pub fn scale(&self, c: &RingElement) -> Result<MatMorphism> {
        let entries: std::result::Result<Vec<_>, _> =
            self.entries.iter().map(|e| c.mul(e)).collect();
        Ok(MatMorphism {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: entries?,
        })
    }

    /// `self ∘ g`: apply `g` first.
    pub fn compose(&self, g: &MatMorphism) -> Result<MatMorphism> {
        if self.cols != g.rows {
            return shape_err(format!(
                "compose {}x{} with {}x{}",
                self.rows, self.cols, g.rows, g.cols
            ));
        }
        let mut out = MatMorphism::zero(&self.ring, self.rows, g.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..g.cols {
                    let b = g.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.at(i, j).add(&a.mul(b)?)?;
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn direct_sum(&self, other: &MatMorphism) -> MatMorphism {
        let mut out = MatMorphism::zero(&self.ring, self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.at(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.at(i, j).clone());
            }
        }
        out
    }

    /// Stack vertically: `[self; other]` (same domains).
    pub fn vstack(&self, other: &MatMorphism) -> Result<MatMorphism> {
        if self.cols != other.cols {
            return shape_err("vstack with different domains");
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(MatMorphism {
            ring: self.ring.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Concatenate horizontally: `[self | other]` (same codomains).
    pub fn hstack(&self, other: &MatMorphism) -> Result<MatMorphism> {
        if self.rows != other.rows {
            return shape_err("hstack with different codomains");
        }
        let mut out = MatMorphism::zero(&self.ring, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.at(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.at(i, j).clone());
            }
        }
        Ok(out)
    }

    /// Assemble a block matrix from a grid of blocks (rows of blocks).
    pub fn block(ring: &Ring, grid: &[Vec<MatMorphism>]) -> Result<MatMorphism> {
        let mut rows: Option<MatMorphism> = None;
        for band in grid {
            let mut row: Option<MatMorphism> = None;
            for b in band {
                row = Some(match row {
                    None => b.clone(),
                    Some(r) => r.hstack(b)?,
                });
            }
            let row = row.unwrap_or_else(|| MatMorphism::zero(ring, 0, 0));
            rows = Some(match rows {
                None => row,
                Some(m) => m.vstack(&row)?,
            });
        }
        Ok(rows.unwrap_or_else(|| MatMorphism::zero(ring, 0, 0)))
    }

    /// The submatrix of the given rows and columns, in order.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> MatMorphism {
        let entries = row_idx
            .iter()
            .flat_map(|&i| col_idx.iter().map(move |&j| self.at(i, j).clone()))
            .collect();
        MatMorphism {
            ring: self.ring.clone(),
            rows: row_idx.len(),
            cols: col_idx.len(),
            entries,
        }
    }

    pub fn transpose(&self) -> MatMorphism {
        let mut out = MatMorphism::zero(&self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).clone());
            }
        }
        out
    }

    /// Map entries through a ring translation.
    pub fn map_entries<F>(&self, target: &Ring, f: F) -> Result<MatMorphism>
    where
        F: Fn(&RingElement) -> Result<RingElement>,
    {
        let entries: Result<Vec<_>> = self.entries.iter().map(f).collect();
        MatMorphism::new(target, self.rows, self.cols, entries?)
    }

    /// Two-sided inverse, or `None`.
    ///
    /// Fields invert by elimination; the integers by the determinant-unit
    /// test (realized as rational elimination plus an integrality check);
    /// polynomials through the rational-function field. Over the free algebra
    /// only triangular matrices with unit diagonal are inverted, which is
    /// sound but incomplete.
    pub fn invert(&self) -> Option<MatMorphism> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(self.clone());
        }
        match self.ring.kind() {
            RingKind::Rationals | RingKind::RationalFunctionsQ => self.invert_field(),
            RingKind::Integers => {
                let q = Ring::rationals();
                let lifted = self
                    .map_entries(&q, |e| {
                        let Value::Int(n) = e.value() else {
                            unreachable!()
                        };
                        Ok(RingElement::from_rational(
                            &q,
                            num_rational::BigRational::from_integer(n.clone()),
                        ))
                    })
                    .ok()?;
                let inv = lifted.invert_field()?;
                let back = inv
                    .map_entries(&self.ring, |e| {
                        let Value::Rat(r) = e.value() else {
                            unreachable!()
                        };
                        if r.is_integer() {
                            Ok(RingElement::new_int(&self.ring, r.to_integer()))
                        } else {
                            shape_err("non-integral inverse")
                        }
                    })
                    .ok()?;
                Some(back)
            }
            RingKind::PolynomialsQ => {
                let rf = Ring::rational_functions();
                let lifted = self.map_entries(&rf, |e| Ok(e.to_fraction_ring())).ok()?;
                let inv = lifted.invert_field()?;
                let back = inv
                    .map_entries(&self.ring, |e| {
                        let Value::RatFun { num, den } = e.value() else {
                            unreachable!()
                        };
                        if den.len() == 1
                            && den[0] == num_rational::BigRational::from_integer(1.into())
                        {
                            Ok(RingElement::poly(&self.ring, num.clone()))
                        } else {
                            shape_err("non-polynomial inverse")
                        }
                    })
                    .ok()?;
                Some(back)
            }
            RingKind::FreeAlgebraQ { .. } => self.invert_triangular(),
        }
    }

    /// Determinant of a square matrix over a commutative ring, computed by
    /// elimination in the fraction field. None for non-square matrices or
    /// rings without a fraction field.
    pub fn determinant(&self) -> Option<RingElement> {
        if self.rows != self.cols || !self.ring.is_commutative() {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(self.ring.one());
        }
        let frac = self.ring.fraction_ring()?;
        let mut a = self.map_entries(&frac, |e| Ok(e.to_fraction_ring())).ok()?;
        let mut det = frac.one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&i| !a.at(i, col).is_zero()) else {
                return Some(self.ring.zero());
            };
            if p != col {
                for j in 0..n {
                    let tmp = a.at(col, j).clone();
                    a.set(col, j, a.at(p, j).clone());
                    a.set(p, j, tmp);
                }
                det = det.neg();
            }
            let pivot = a.at(col, col).clone();
            det = det.mul(&pivot).ok()?;
            let pinv = pivot.try_invert()?;
            for i in (col + 1)..n {
                if !a.at(i, col).is_zero() {
                    let f = a.at(i, col).mul(&pinv).ok()?;
                    for j in col..n {
                        let v = a.at(i, j).sub(&f.mul(a.at(col, j)).ok()?).ok()?;
                        a.set(i, j, v);
                    }
                }
            }
        }
        // pull the value back into the base ring
        let (num, den) = det.fraction_parts(&self.ring)?;
        let den_inv = den.try_invert()?;
        num.mul(&den_inv).ok()
    }

    fn invert_field(&self) -> Option<MatMorphism> {
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = MatMorphism::identity(&self.ring, n);
        for col in 0..n {
            let p = (col..n).find(|&i| !a.at(i, col).is_zero())?;
            for j in 0..n {
                let tmp = a.at(col, j).clone();
                a.set(col, j, a.at(p, j).clone());
                a.set(p, j, tmp);
                let tmp = inv.at(col, j).clone();
                inv.set(col, j, inv.at(p, j).clone());
                inv.set(p, j, tmp);
            }
            let pivot_inv = a.at(col, col).try_invert()?;
            for j in 0..n {
                a.set(col, j, a.at(col, j).mul(&pivot_inv).unwrap());
                inv.set(col, j, inv.at(col, j).mul(&pivot_inv).unwrap());
            }
            for i in 0..n {
                if i != col && !a.at(i, col).is_zero() {
                    let f = a.at(i, col).clone();
                    for j in 0..n {
                        let v = a.at(i, j).sub(&f.mul(a.at(col, j)).unwrap()).unwrap();
                        a.set(i, j, v);
                        let v = inv.at(i, j).sub(&f.mul(inv.at(col, j)).unwrap()).unwrap();
                        inv.set(i, j, v);
                    }
                }
            }
        }
        Some(inv)
    }

    /// Invert lower- or upper-triangular matrices whose diagonal entries are
    /// units, by back-substitution.
    fn invert_triangular(&self) -> Option<MatMorphism> {
        let n = self.rows;
        let lower = (0..n).all(|i| ((i + 1)..n).all(|j| self.at(i, j).is_zero()));
        let upper = (0..n).all(|i| (0..i).all(|j| self.at(i, j).is_zero()));
        if !lower && !upper {
            return None;
        }
        let mut diag_inv = Vec::with_capacity(n);
        for i in 0..n {
            diag_inv.push(self.at(i, i).try_invert()?);
        }
        let mut inv = MatMorphism::zero(&self.ring, n, n);
        let order: Vec<usize> = if lower {
            (0..n).collect()
        } else {
            (0..n).rev().collect()
        };
        for &i in &order {
            inv.set(i, i, diag_inv[i].clone());
            let js: Vec<usize> = if lower {
                (0..i).collect()
            } else {
                ((i + 1)..n).collect()
            };
            for &j in &js {
                // entry (i, j) of the inverse: solve row i of self * inv = e_i
                let mut acc = self.ring.zero();
                let ks: Vec<usize> = if lower {
                    (j..i).collect()
                } else {
                    ((i + 1)..=j.max(i)).collect()
                };
                for k in ks {
                    if k == i {
                        continue;
                    }
                    acc = acc.add(&self.at(i, k).mul(inv.at(k, j)).unwrap()).unwrap();
                }
                let v = diag_inv[i].mul(&acc.neg()).unwrap();
                inv.set(i, j, v);
            }
        }
        // composition check keeps the back-substitution honest
        let id = MatMorphism::identity(&self.ring, n);
        if self.compose(&inv).ok()? == id && inv.compose(self).ok()? == id {
            Some(inv)
        } else {
            None
        }
    }
}

impl RingElement {
    pub(crate) fn new_int(ring: &Ring, n: num_bigint::BigInt) -> RingElement {
        RingElement::new(ring.clone(), Value::Int(n))
    }
}

/// The canonical biproduct maps for `X ⊕ Y`:
/// `(in_X, pr_X, in_Y, pr_Y)`.
pub fn canonical_maps(
    ring: &Ring,
    x: FreeObject,
    y: FreeObject,
) -> (MatMorphism, MatMorphism, MatMorphism, MatMorphism) {
    let idx = MatMorphism::identity(ring, x.rank());
    let idy = MatMorphism::identity(ring, y.rank());
    let zxy = MatMorphism::zero(ring, y.rank(), x.rank());
    let zyx = MatMorphism::zero(ring, x.rank(), y.rank());
    let in_x = idx.vstack(&zxy).unwrap();
    let pr_x = idx.hstack(&zyx).unwrap();
    let in_y = zyx.vstack(&idy).unwrap();
    let pr_y = zxy.hstack(&idy).unwrap();
    (in_x, pr_x, in_y, pr_y)
}

/// Inclusion of the `k`-th summand into `⊕ parts`.
pub fn inclusion(ring: &Ring, parts: &[usize], k: usize) -> MatMorphism {
    let total: usize = parts.iter().sum();
    let offset: usize = parts[..k].iter().sum();
    let mut m = MatMorphism::zero(ring, total, parts[k]);
    for j in 0..parts[k] {
        m.set(offset + j, j, ring.one());
    }
    m
}

/// Projection of `⊕ parts` onto the `k`-th summand.
pub fn projection(ring: &Ring, parts: &[usize], k: usize) -> MatMorphism {
    inclusion(ring, parts, k).transpose()
}

/// A formal image `(base, p)` with `p` idempotent.
#[derive(Debug, Clone, PartialEq)]
pub struct KarObject {
    pub base: FreeObject,
    pub idempotent: MatMorphism,
}

impl KarObject {
    pub fn new(base: FreeObject, idempotent: MatMorphism) -> Result<Self> {
        if idempotent.rows() != base.rank() || idempotent.cols() != base.rank() {
            return shape_err("idempotent must be an endomorphism of the base");
        }
        if idempotent.compose(&idempotent)? != idempotent {
            return Err(EngineError::Invariant("p^2 != p".into()));
        }
        Ok(KarObject { base, idempotent })
    }
}

/// A morphism `(X, p) → (X', p')` of the Karoubization: a map `f` of bases
/// with `p' ∘ f = f ∘ p = f`.
pub fn kar_hom_member(f: &MatMorphism, src: &KarObject, dst: &KarObject) -> Result<bool> {
    if f.cols() != src.base.rank() || f.rows() != dst.base.rank() {
        return shape_err("map does not match the Karoubi objects");
    }
    Ok(dst.idempotent.compose(f)? == *f && f.compose(&src.idempotent)? == *f)
}

/// Witness that `(X, p)` lies in the small envelope: a complement `Y` with
/// `s ∘ q = 1 − p` and `q ∘ s = id_Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallEnvelopeWitness {
    pub object: KarObject,
    pub complement: FreeObject,
    pub q: MatMorphism,
    pub s: MatMorphism,
}

pub fn check_small_envelope(w: &SmallEnvelopeWitness) -> Result<bool> {
    let base = w.object.base.rank();
    let y = w.complement.rank();
    if w.q.rows() != y || w.q.cols() != base || w.s.rows() != base || w.s.cols() != y {
        return shape_err("small-envelope maps have wrong shapes");
    }
    let p = &w.object.idempotent;
    if p.compose(p)? != *p {
        return Ok(false);
    }
    let ring = p.ring();
    let one_minus_p = MatMorphism::identity(ring, base).sub(p)?;
    Ok(w.s.compose(&w.q)? == one_minus_p && w.q.compose(&w.s)? == MatMorphism::identity(ring, y))
}
