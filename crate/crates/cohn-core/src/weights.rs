//! The stupid weight structure on the bounded homotopy category: weight
//! decompositions by degree truncation, weight ranges of minimal models,
//! weak weight decompositions of certificate towers, heart hom-set reports
//! for the localized category, and negativity checks.
//!
//! The homological convention is fixed here once: a complex concentrated in
//! degree `−k` has weight `k`, so the class of weights `≤ n` consists of
//! complexes supported in degrees `≥ −n`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::addcat::MatMorphism;
use crate::coeff::{solve_linear, LinearOutcome, Ring, RingElement};
use crate::complexes::{minimize, stupid_truncate, BoundedComplex, Truncation};
use crate::equality::{decide_equal_oracle, OracleVerdict};
use crate::localization::{zigzag_normalize, LocTriple, ZigZag};
use crate::triangular::{SSet, TriangularCert};
use crate::{shape_err, EngineError, Result};

/// weight = −degree, asserted in one place so the convention cannot drift.
pub const WEIGHT_OF_DEGREE_SIGN: i64 = -1;

pub fn weight_of_degree(degree: i64) -> i64 {
    WEIGHT_OF_DEGREE_SIGN * degree
}

pub fn degree_of_weight(weight: i64) -> i64 {
    WEIGHT_OF_DEGREE_SIGN * weight
}

/// A membership claim against the stupid weight structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightClaim {
    AtMost(i64),
    AtLeast(i64),
    Within(i64, i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightClassQuery {
    pub complex: BoundedComplex,
    pub claim: WeightClaim,
}

/// The weight decomposition triangle at weight `n`: `X → M → Y` with `X` of
/// weights `≤ n` and `Y` of weights `≥ n + 1`, realized by the stupid
/// truncation at degree `−n`.
pub fn weight_decompose(m: &BoundedComplex, n: i64) -> Result<Truncation> {
    stupid_truncate(m, degree_of_weight(n))
}

/// The weight range of a complex over a field: the support interval of its
/// minimal model, read through the homological convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightRange {
    /// Zero object; reported as the degenerate interval `[+∞, −∞]`.
    Empty,
    Interval(i64, i64),
}

pub fn weight_range(m: &BoundedComplex) -> Result<WeightRange> {
    let min = minimize(m)?;
    match min.minimal.support() {
        None => Ok(WeightRange::Empty),
        Some((lo, hi)) => Ok(WeightRange::Interval(
            weight_of_degree(hi),
            weight_of_degree(lo),
        )),
    }
}

/// Decide a membership claim against the stupid weight structure by
/// minimizing first (field coefficients). The zero object lies in every
/// class.
pub fn check_weight_claim(q: &WeightClassQuery) -> Result<bool> {
    match weight_range(&q.complex)? {
        WeightRange::Empty => Ok(true),
        WeightRange::Interval(i, j) => Ok(match q.claim {
            WeightClaim::AtMost(n) => j <= n,
            WeightClaim::AtLeast(n) => i >= n,
            WeightClaim::Within(a, b) => a <= i && j <= b,
        }),
    }
}

/// One layer of an extension tower: a shifted cone certificate. The layer
/// occupies degrees `(−1−shift, −shift)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TowerLayer {
    pub shift: i64,
    pub cert: TriangularCert,
}

impl TowerLayer {
    fn src_degree(&self) -> i64 {
        -1 - self.shift
    }

    fn tgt_degree(&self) -> i64 {
        -self.shift
    }

    fn piece_rank(&self, degree: i64) -> usize {
        if degree == self.src_degree() {
            self.cert.assembled().cols()
        } else if degree == self.tgt_degree() {
            self.cert.assembled().rows()
        } else {
            0
        }
    }
}

/// An iterated extension of shifted cone certificates, with connecting
/// differential blocks flowing from higher layers into lower ones (so every
/// prefix of layers is a subcomplex). Layers are kept sorted by shift.
#[derive(Debug, Clone)]
pub struct CertTower {
    layers: Vec<TowerLayer>,
    /// differential block from (layer `from` at `degree`) to
    /// (layer `to` at `degree + 1`), with `to < from`
    glue: BTreeMap<(usize, usize, i64), MatMorphism>,
    assembled: BoundedComplex,
}

impl CertTower {
    pub fn new(
        layers: Vec<TowerLayer>,
        glue: BTreeMap<(usize, usize, i64), MatMorphism>,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(EngineError::Precondition("empty tower".into()));
        }
        let ring = layers[0].cert.ring().clone();
        for w in layers.windows(2) {
            if w[0].shift > w[1].shift {
                return Err(EngineError::Precondition(
                    "tower layers must be sorted by shift".into(),
                ));
            }
        }
        for (&(to, from, _), _) in &glue {
            if to >= from || from >= layers.len() {
                return Err(EngineError::Precondition(
                    "glue must flow from a higher layer to a lower one".into(),
                ));
            }
        }
        // assemble degree-wise
        let lo = layers.iter().map(|l| l.src_degree()).min().unwrap();
        let hi = layers.iter().map(|l| l.tgt_degree()).max().unwrap();
        let mut segments: BTreeMap<i64, Vec<(usize, usize, usize)>> = BTreeMap::new();
        let mut ranks = Vec::new();
        for deg in lo..=hi {
            let mut segs = Vec::new();
            let mut off = 0usize;
            for (li, layer) in layers.iter().enumerate() {
                let r = layer.piece_rank(deg);
                if r > 0 {
                    segs.push((li, off, r));
                    off += r;
                }
            }
            ranks.push(off);
            segments.insert(deg, segs);
        }
        let mut diffs = Vec::new();
        for deg in lo..hi {
            let from_segs = segments.get(&deg).cloned().unwrap_or_default();
            let to_segs = segments.get(&(deg + 1)).cloned().unwrap_or_default();
            let rows: usize = to_segs.iter().map(|s| s.2).sum();
            let cols: usize = from_segs.iter().map(|s| s.2).sum();
            let mut d = MatMorphism::zero(&ring, rows, cols);
            for &(lj, coff, clen) in &from_segs {
                for &(li, roff, rlen) in &to_segs {
                    let block = if li == lj {
                        // internal differential of the shifted layer
                        let layer = &layers[lj];
                        if deg == layer.src_degree() {
                            let m = layer.cert.assembled().clone();
                            if layer.shift.rem_euclid(2) == 1 {
                                Some(m.negate())
                            } else {
                                Some(m)
                            }
                        } else {
                            None
                        }
                    } else if li < lj {
                        glue.get(&(li, lj, deg)).cloned()
                    } else {
                        None
                    };
                    if let Some(b) = block {
                        if b.rows() != rlen || b.cols() != clen {
                            return shape_err(format!(
                                "glue block ({}, {}, {}) has wrong shape",
                                li, lj, deg
                            ));
                        }
                        for i in 0..rlen {
                            for j in 0..clen {
                                d.set(roff + i, coff + j, b.at(i, j).clone());
                            }
                        }
                    }
                }
            }
            diffs.push(d);
        }
        let assembled = BoundedComplex::new(&ring, lo, ranks, diffs)?;
        Ok(CertTower {
            layers,
            glue,
            assembled,
        })
    }

    pub fn single(cert: TriangularCert, shift: i64) -> Result<Self> {
        Self::new(vec![TowerLayer { shift, cert }], BTreeMap::new())
    }

    pub fn layers(&self) -> &[TowerLayer] {
        &self.layers
    }

    pub fn assembled(&self) -> &BoundedComplex {
        &self.assembled
    }

    pub fn shift_range(&self) -> (i64, i64) {
        (
            self.layers.iter().map(|l| l.shift).min().unwrap(),
            self.layers.iter().map(|l| l.shift).max().unwrap(),
        )
    }

    fn restrict(&self, idx: &[usize]) -> Result<Option<CertTower>> {
        if idx.is_empty() {
            return Ok(None);
        }
        let remap: BTreeMap<usize, usize> = idx
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let layers: Vec<TowerLayer> = idx.iter().map(|&i| self.layers[i].clone()).collect();
        let mut glue = BTreeMap::new();
        for (&(to, from, deg), b) in &self.glue {
            if let (Some(&nt), Some(&nf)) = (remap.get(&to), remap.get(&from)) {
                glue.insert((nt, nf, deg), b.clone());
            }
        }
        Ok(Some(CertTower::new(layers, glue)?))
    }
}

/// A weak weight decomposition of a tower: the sub-tower of shifts `≤ 0`,
/// the quotient tower of shifts `≥ 1`, and the connecting glue blocks.
#[derive(Debug, Clone)]
pub struct WeakDecomposition {
    pub lower: Option<CertTower>,
    pub upper: Option<CertTower>,
    /// glue blocks (to-lower-layer, from-upper-layer, degree) of the input
    pub connecting: BTreeMap<(usize, usize, i64), MatMorphism>,
}

/// Split a tower at the shift cut between 0 and 1. The sub-tower realizes
/// the class of shifts in `[m, 0]`, the quotient the shifts in `[1, n]`.
pub fn weak_weight_decompose(tower: &CertTower) -> Result<WeakDecomposition> {
    let low_idx: Vec<usize> = (0..tower.layers.len())
        .filter(|&i| tower.layers[i].shift <= 0)
        .collect();
    let high_idx: Vec<usize> = (0..tower.layers.len())
        .filter(|&i| tower.layers[i].shift >= 1)
        .collect();
    let lower = tower.restrict(&low_idx)?;
    let upper = tower.restrict(&high_idx)?;
    let mut connecting = BTreeMap::new();
    for (&(to, from, deg), b) in &tower.glue {
        if tower.layers[to].shift <= 0 && tower.layers[from].shift >= 1 {
            connecting.insert((to, from, deg), b.clone());
        }
    }
    Ok(WeakDecomposition {
        lower,
        upper,
        connecting,
    })
}

/// Reassemble a weak decomposition and compare with the original tower.
pub fn reassemble_decomposition(
    tower: &CertTower,
    d: &WeakDecomposition,
) -> Result<BoundedComplex> {
    let mut layers = Vec::new();
    if let Some(low) = &d.lower {
        layers.extend(low.layers.iter().cloned());
    }
    let offset = layers.len();
    if let Some(up) = &d.upper {
        layers.extend(up.layers.iter().cloned());
    }
    let mut glue = BTreeMap::new();
    if let Some(low) = &d.lower {
        for (&k, b) in &low.glue {
            glue.insert(k, b.clone());
        }
    }
    if let Some(up) = &d.upper {
        for (&(to, from, deg), b) in &up.glue {
            glue.insert((to + offset, from + offset, deg), b.clone());
        }
    }
    // the connecting blocks are indexed against the original tower, whose
    // layer order equals (lower layers, upper layers)
    let low_count = offset;
    for (&(to, from, deg), b) in &d.connecting {
        let _ = low_count;
        glue.insert((to, from, deg), b.clone());
    }
    let rebuilt = CertTower::new(layers, glue)?;
    let _ = tower;
    Ok(rebuilt.assembled().clone())
}

/// A report of heart hom-set structure: probes grouped into equality
/// classes with a triple representative per class.
#[derive(Debug, Clone)]
pub struct HeartReport {
    /// probe indices, grouped
    pub classes: Vec<Vec<usize>>,
    /// one normalized representative per class
    pub representatives: Vec<LocTriple>,
    /// whether grouping used the fraction oracle (structural fallback else)
    pub oracle_used: bool,
}

/// Normalize probe zig-zags between two base objects and group them into
/// oracle-equality classes (structural classes when the oracle does not
/// apply).
pub fn heart_hom(
    sset: &Arc<SSet>,
    source: crate::addcat::FreeObject,
    target: crate::addcat::FreeObject,
    probes: &[ZigZag],
) -> Result<HeartReport> {
    let mut triples = Vec::with_capacity(probes.len());
    for z in probes {
        let (src, dst) = z.ends(sset)?;
        if src != source || dst != target {
            return shape_err("probe does not run between the requested objects");
        }
        triples.push(zigzag_normalize(sset, z)?);
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut reps: Vec<LocTriple> = Vec::new();
    let mut oracle_used = true;
    for (i, t) in triples.iter().enumerate() {
        let mut placed = false;
        for (c, rep) in reps.iter().enumerate() {
            let same = match decide_equal_oracle(t, rep)? {
                OracleVerdict::Equal(b) => b,
                OracleVerdict::Inapplicable(_) => {
                    oracle_used = false;
                    t == rep
                }
            };
            if same {
                classes[c].push(i);
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(vec![i]);
            reps.push(t.clone());
        }
    }
    Ok(HeartReport {
        classes,
        representatives: reps,
        oracle_used,
    })
}

/// One failed orthogonality instance.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativityViolation {
    pub from: usize,
    pub to: usize,
    pub shift: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityReport {
    pub violations: Vec<NegativityViolation>,
}

impl NegativityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Decide whether every chain map `P → Q[shift]` is null-homotopic, for all
/// ordered pairs from `objects` and all listed positive shifts. A pair fails
/// exactly when some chain map is not a boundary `dh + hd`.
pub fn negativity_check(objects: &[BoundedComplex], shifts: &[i64]) -> Result<NegativityReport> {
    let mut violations = Vec::new();
    for (pi, p) in objects.iter().enumerate() {
        for (qi, q) in objects.iter().enumerate() {
            for &sh in shifts {
                if sh <= 0 {
                    return Err(EngineError::Precondition("shifts must be positive".into()));
                }
                if !all_maps_null_homotopic(p, &q.shift(sh))? {
                    violations.push(NegativityViolation {
                        from: pi,
                        to: qi,
                        shift: sh,
                    });
                }
            }
        }
    }
    Ok(NegativityReport { violations })
}

/// Kernel basis of a matrix given as rows, over Z (Smith form) or a field.
fn kernel_basis(
    ring: &Ring,
    rows: &[Vec<RingElement>],
    ncols: usize,
) -> Result<Vec<Vec<RingElement>>> {
    if ncols == 0 {
        return Ok(Vec::new());
    }
    if rows.is_empty() {
        return Ok((0..ncols)
            .map(|j| {
                let mut v = vec![ring.zero(); ncols];
                v[j] = ring.one();
                v
            })
            .collect());
    }
    if ring == &Ring::integers() {
        let conv = |e: &RingElement| match e.value() {
            crate::coeff::Value::Int(n) => n.clone(),
            _ => unreachable!(),
        };
        let a: Vec<Vec<num_bigint::BigInt>> =
            rows.iter().map(|r| r.iter().map(conv).collect()).collect();
        let (d, _u, v) = crate::coeff::smith_normal_form(&a);
        let mut basis = Vec::new();
        for j in 0..ncols {
            let dj = if j < d.len() {
                d[j][j].clone()
            } else {
                num_bigint::BigInt::from(0)
            };
            if dj == num_bigint::BigInt::from(0) {
                let col: Vec<RingElement> = (0..ncols)
                    .map(|i| RingElement::new_int(ring, v[i][j].clone()))
                    .collect();
                basis.push(col);
            }
        }
        return Ok(basis);
    }
    // field: reduced echelon form, free columns generate
    let mut a: Vec<Vec<RingElement>> = rows.to_vec();
    let m = a.len();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0usize;
    for col in 0..ncols {
        let Some(p) = (row..m).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].try_invert().expect("field");
        for j in 0..ncols {
            a[row][j] = a[row][j].mul(&inv).unwrap();
        }
        for i in 0..m {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..ncols {
                    let vjj = a[row][j].mul(&f).unwrap();
                    a[i][j] = a[i][j].sub(&vjj).unwrap();
                }
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == m {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![ring.zero(); ncols];
        v[free] = ring.one();
        for &(r, c) in &pivots {
            v[c] = a[r][free].neg();
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Every chain map `P → Q` null-homotopic?
fn all_maps_null_homotopic(p: &BoundedComplex, q: &BoundedComplex) -> Result<bool> {
    let ring = p.ring().clone();
    if !ring.supports_linear_solving() {
        return Err(EngineError::Precondition(format!(
            "negativity needs linear solving, not available over {}",
            ring
        )));
    }
    // degree window
    let degs: Vec<i64> = {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for c in [p, q] {
            if let Some((a, b)) = c.support() {
                lo = lo.min(a - 1);
                hi = hi.max(b + 1);
            }
        }
        if lo > hi {
            return Ok(true);
        }
        (lo..=hi).collect()
    };
    // f-variable layout
    let mut f_off: BTreeMap<i64, usize> = BTreeMap::new();
    let mut nf = 0usize;
    for &n in &degs {
        let sz = p.rank_at(n) * q.rank_at(n);
        if sz > 0 {
            f_off.insert(n, nf);
            nf += sz;
        }
    }
    if nf == 0 {
        return Ok(true);
    }
    // chain-map constraints: d_Q f^n − f^{n+1} d_P = 0
    let mut constraints: Vec<Vec<RingElement>> = Vec::new();
    for &n in &degs {
        let rows = q.rank_at(n + 1);
        let cols = p.rank_at(n);
        if rows == 0 || cols == 0 {
            continue;
        }
        let dq = q.diff_at(n);
        let dp = p.diff_at(n);
        for i in 0..rows {
            for j in 0..cols {
                let mut row = vec![ring.zero(); nf];
                if let Some(&off) = f_off.get(&n) {
                    let fr = q.rank_at(n);
                    for a in 0..fr {
                        if !dq.at(i, a).is_zero() {
                            row[off + a * cols + j] = dq.at(i, a).clone();
                        }
                    }
                }
                if let Some(&off) = f_off.get(&(n + 1)) {
                    let fcols = p.rank_at(n + 1);
                    for b in 0..fcols {
                        if !dp.at(b, j).is_zero() {
                            let idx = off + i * fcols + b;
                            row[idx] = row[idx].sub(dp.at(b, j)).map_err(EngineError::from)?;
                        }
                    }
                }
                constraints.push(row);
            }
        }
    }
    // boundary operator: h ↦ dh + hd in f-coordinates
    let mut h_off: BTreeMap<i64, usize> = BTreeMap::new();
    let mut nh = 0usize;
    for &n in &degs {
        let sz = p.rank_at(n) * q.rank_at(n - 1);
        if sz > 0 {
            h_off.insert(n, nh);
            nh += sz;
        }
    }
    let mut boundary: Vec<Vec<RingElement>> = vec![vec![ring.zero(); nh]; nf];
    for (&n, &foff) in &f_off {
        let frows = q.rank_at(n);
        let fcols = p.rank_at(n);
        let dq = q.diff_at(n - 1);
        let dp = p.diff_at(n);
        for i in 0..frows {
            for j in 0..fcols {
                let coord = foff + i * fcols + j;
                if let Some(&hoff) = h_off.get(&n) {
                    let hr = q.rank_at(n - 1);
                    for a in 0..hr {
                        if !dq.at(i, a).is_zero() {
                            let idx = hoff + a * fcols + j;
                            boundary[coord][idx] = boundary[coord][idx]
                                .add(dq.at(i, a))
                                .map_err(EngineError::from)?;
                        }
                    }
                }
                if let Some(&hoff) = h_off.get(&(n + 1)) {
                    let hcols = p.rank_at(n + 1);
                    for b in 0..hcols {
                        if !dp.at(b, j).is_zero() {
                            let idx = hoff + i * hcols + b;
                            boundary[coord][idx] = boundary[coord][idx]
                                .add(dp.at(b, j))
                                .map_err(EngineError::from)?;
                        }
                    }
                }
            }
        }
    }
    // every kernel generator of the constraints must be a boundary
    for k in kernel_basis(&ring, &constraints, nf)? {
        match solve_linear(&ring, &boundary, &k).map_err(EngineError::from)? {
            LinearOutcome::Solution(_) => {}
            LinearOutcome::NoSolution => return Ok(false),
            LinearOutcome::Unsupported => {
                return Err(EngineError::Precondition("unsupported ring".into()))
            }
        }
    }
    Ok(true)
}
