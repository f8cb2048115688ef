//! Acceptance suite: one test per engine-level criterion, each printing a
//! PASS line on success. Every tolerance is exact (structural equality).
//!
//! The CLI determinism criterion lives in the CLI crate's own acceptance
//! test, since it drives the binary.

use std::collections::BTreeMap;
use std::sync::Arc;

use cohn_core::addcat::{FreeObject, MatMorphism};
use cohn_core::coeff::{parse_element, Ring};
use cohn_core::complexes::{is_null_homotopic, BoundedComplex, ChainMap, HomotopyDecision};
use cohn_core::equality::{
    check_factorization, check_malcolmson, decide_equal_oracle, malcolmson_from_factorization,
    search_equal, FactorizationWitness, OracleVerdict, SearchOutcome,
};
use cohn_core::localization::{
    from_plain, invert_s, triple_add, triple_compose, triple_dsum, LocFunctor, ZigToken, ZigZag,
};
use cohn_core::sample::Sampler;
use cohn_core::triangular::{
    compose_factors, factor_elementary, DiagTag, Factor, SSet, TriangularCert,
};
use cohn_core::weights::{heart_hom, weight_decompose, weight_range};

fn sset_z(n: i64) -> Arc<SSet> {
    let z = Ring::integers();
    Arc::new(SSet::new(&z, vec![MatMorphism::from_i64_rows(&z, &[&[n]])]).unwrap())
}

fn sset_qt() -> Arc<SSet> {
    let p = Ring::polynomials();
    let t = parse_element(&p, "t").unwrap();
    let m = MatMorphism::from_rows(&p, vec![vec![t]]).unwrap();
    Arc::new(SSet::new(&p, vec![m]).unwrap())
}

/// Criterion 1: the fraction-ring functor commutes exactly with triple
/// composition, addition, and direct sum, over Z with S = {[n]} for
/// n in {2, 3, 5} and over Q[t] with S = {[t]}, on at least 200 triples.
#[test]
fn criterion_1_oracle_congruence() {
    let mut configs: Vec<Arc<SSet>> = vec![sset_z(2), sset_z(3), sset_z(5), sset_qt()];
    let mut triples_checked = 0usize;
    for (ci, sset) in configs.drain(..).enumerate() {
        let functor = LocFunctor::fractions(sset.clone()).unwrap();
        let mut smp = Sampler::new(sset.ring(), 1000 + ci as u64);
        for _ in 0..20 {
            let a = FreeObject(smp.usize_in(1, 2));
            let b = FreeObject(smp.usize_in(1, 2));
            let c = FreeObject(smp.usize_in(1, 2));
            let t1 = smp.triple(&sset, b, c, 2);
            let t2 = smp.triple(&sset, a, b, 2);
            let u1 = smp.triple(&sset, a, b, 2);
            let comp = triple_compose(&t1, &t2).unwrap();
            assert_eq!(
                functor.evaluate(&comp).unwrap(),
                functor
                    .evaluate(&t1)
                    .unwrap()
                    .compose(&functor.evaluate(&t2).unwrap())
                    .unwrap(),
                "composition congruence"
            );
            let sum = triple_add(&t2, &u1).unwrap();
            assert_eq!(
                functor.evaluate(&sum).unwrap(),
                functor
                    .evaluate(&t2)
                    .unwrap()
                    .add(&functor.evaluate(&u1).unwrap())
                    .unwrap(),
                "addition congruence"
            );
            let ds = triple_dsum(&t1, &u1).unwrap();
            assert_eq!(
                functor.evaluate(&ds).unwrap(),
                functor
                    .evaluate(&t1)
                    .unwrap()
                    .direct_sum(&functor.evaluate(&u1).unwrap()),
                "direct-sum congruence"
            );
            triples_checked += 3;
        }
    }
    assert!(triples_checked >= 200, "checked {}", triples_checked);
    println!(
        "criterion 1 (oracle congruence, {} triples): PASS",
        triples_checked
    );
}

fn parse_tags(text: &str) -> Vec<DiagTag> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            if let Some(rank) = t.strip_prefix("id:") {
                DiagTag::Identity(FreeObject(rank.parse().unwrap()))
            } else {
                DiagTag::ElementOfS(t.strip_prefix('s').unwrap().parse().unwrap())
            }
        })
        .collect()
}

/// Rebuild a certificate from its diagonal tags and assembled matrix by
/// slicing the below-diagonal blocks back out.
fn cert_from_parts(
    sset: &Arc<SSet>,
    tags: Vec<DiagTag>,
    assembled: &MatMorphism,
) -> TriangularCert {
    let ring = sset.ring().clone();
    let diag_mats: Vec<MatMorphism> = tags
        .iter()
        .map(|t| match t {
            DiagTag::ElementOfS(k) => sset.element(*k).unwrap().clone(),
            DiagTag::Identity(o) => MatMorphism::identity(&ring, o.rank()),
        })
        .collect();
    let mut below = BTreeMap::new();
    let mut roff = 0usize;
    for (l, dm) in diag_mats.iter().enumerate() {
        let mut coff = 0usize;
        for (k, cm) in diag_mats.iter().enumerate() {
            if k < l {
                let rows: Vec<usize> = (roff..roff + dm.rows()).collect();
                let cols: Vec<usize> = (coff..coff + cm.cols()).collect();
                let b = assembled.submatrix(&rows, &cols);
                if !b.is_zero() {
                    below.insert((l, k), b);
                }
            }
            coff += cm.cols();
        }
        roff += dm.rows();
    }
    let cert = TriangularCert::new(sset.clone(), tags, below).unwrap();
    assert_eq!(cert.assembled(), assembled, "golden certificate mismatch");
    cert
}

fn serialize_witness(w: &FactorizationWitness) -> String {
    let tags = |c: &TriangularCert| {
        c.diag()
            .iter()
            .map(|t| match t {
                DiagTag::ElementOfS(k) => format!("s{}", k),
                DiagTag::Identity(o) => format!("id:{}", o.rank()),
            })
            .collect::<Vec<_>>()
            .join(",")
    };
    format!(
        "z {}\nzprime {}\nt1 {}\nt2 {}\nk1 {} ; {}\nk2 {} ; {}\np {}\ng {}\nalpha1_0 {}\nalpha1_1 {}\nalpha2 {}\n",
        w.z.rank(),
        w.z_prime.rank(),
        w.t1.rank(),
        w.t2.rank(),
        tags(&w.k1_cert),
        w.k1,
        tags(&w.k2_cert),
        w.k2,
        w.p,
        w.g,
        w.alpha1_0,
        w.alpha1_1,
        w.alpha2
    )
}

fn parse_witness(sset: &Arc<SSet>, text: &str) -> FactorizationWitness {
    let ring = sset.ring().clone();
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap();
        fields.insert(key, rest.trim());
    }
    let obj = |k: &str| FreeObject(fields[k].parse::<usize>().unwrap());
    let mat = |k: &str| MatMorphism::parse(&ring, fields[k]).unwrap();
    let cert = |k: &str| {
        let (tags, m) = fields[k].split_once(';').unwrap();
        let assembled = MatMorphism::parse(&ring, m.trim()).unwrap();
        cert_from_parts(sset, parse_tags(tags.trim()), &assembled)
    };
    let k1c = cert("k1");
    let k2c = cert("k2");
    FactorizationWitness {
        z: obj("z"),
        z_prime: obj("zprime"),
        t1: obj("t1"),
        t2: obj("t2"),
        k1: k1c.assembled().clone(),
        k1_cert: k1c,
        k2: k2c.assembled().clone(),
        k2_cert: k2c,
        p: mat("p"),
        g: mat("g"),
        alpha1_0: mat("alpha1_0"),
        alpha1_1: mat("alpha1_1"),
        alpha2: mat("alpha2"),
    }
}

/// Criterion 2: the arithmetic identities for S = {[2]} over Z, with a
/// frozen factorization witness for `inv(s) + inv(s) = id` found within
/// cap 4 and re-verified from the golden file.
#[test]
fn criterion_2_arithmetic_identities() {
    let sset = sset_z(2);
    let z = Ring::integers();
    let inv = invert_s(&sset, 0).unwrap();
    let two = from_plain(&sset, sset.element(0).unwrap()).unwrap();
    let one = from_plain(&sset, &MatMorphism::identity(&z, 1)).unwrap();

    for (lhs, name) in [
        (triple_compose(&inv, &two).unwrap(), "inv(s)*s"),
        (triple_compose(&two, &inv).unwrap(), "s*inv(s)"),
        (triple_add(&inv, &inv).unwrap(), "inv(s)+inv(s)"),
    ] {
        assert_eq!(
            decide_equal_oracle(&lhs, &one).unwrap(),
            OracleVerdict::Equal(true),
            "{} must equal id under the oracle",
            name
        );
    }

    let sum = triple_add(&inv, &inv).unwrap();
    let SearchOutcome::Found(w) = search_equal(&sum, &one, 4).unwrap() else {
        panic!("search must produce a witness within cap 4");
    };
    assert!(check_factorization(&sum, &one, &w).unwrap());

    let golden = include_str!("golden/half_plus_half_witness.txt");
    assert_eq!(
        serialize_witness(&w),
        golden,
        "searched witness drifted from the frozen one"
    );
    let frozen = parse_witness(&sset, golden);
    assert!(check_factorization(&sum, &one, &frozen).unwrap());
    println!("criterion 2 (arithmetic identities and frozen witness): PASS");
}

/// Criterion 3: elementary factorization round trip on random certificates
/// of size at most 5 over Z and Q.
#[test]
fn criterion_3_factorization_round_trip() {
    let mut checked = 0usize;
    for (ri, ring) in [Ring::integers(), Ring::rationals()].iter().enumerate() {
        let mut smp = Sampler::new(ring, 3000 + ri as u64);
        let sset = Arc::new(
            SSet::new(
                ring,
                vec![smp.matrix(1, 1), smp.matrix(2, 2), smp.matrix(2, 1)],
            )
            .unwrap(),
        );
        for _ in 0..60 {
            let cert = smp.certificate(&sset, 5, true);
            let factors = factor_elementary(&cert).unwrap();
            assert_eq!(
                &compose_factors(ring, &factors).unwrap(),
                cert.assembled(),
                "ordered product equals the assembled matrix"
            );
            for f in &factors {
                match f {
                    Factor::Invertible { matrix, inverse } => {
                        assert_eq!(&matrix.invert().unwrap(), inverse);
                    }
                    Factor::InS { matrix, parts } => {
                        let mut expect: Option<MatMorphism> = None;
                        for part in parts {
                            let piece = match part {
                                DiagTag::ElementOfS(k) => sset.element(*k).unwrap().clone(),
                                DiagTag::Identity(o) => MatMorphism::identity(ring, o.rank()),
                            };
                            expect = Some(match expect {
                                None => piece,
                                Some(e) => e.direct_sum(&piece),
                            });
                        }
                        assert_eq!(matrix, &expect.unwrap());
                    }
                }
            }
            checked += 1;
        }
    }
    assert!(checked >= 100);
    println!(
        "criterion 3 (factorization round trip, {} certificates): PASS",
        checked
    );
}

/// An S set over Q whose elements are invertible, so sampled certificates
/// assemble to invertible matrices.
fn invertible_sset_q(smp: &mut Sampler) -> Arc<SSet> {
    let q = Ring::rationals();
    let unit = MatMorphism::from_rows(&q, vec![vec![parse_element(&q, "3/2").unwrap()]]).unwrap();
    let uni = smp.unipotent(2);
    Arc::new(SSet::new(&q, vec![unit, uni]).unwrap())
}

/// Criterion 4: Malcolmson translation on at least 50 generated verifying
/// factorization witnesses over Q, plus 500 single-block tamper trials that
/// must all fail the checker.
#[test]
fn criterion_4_malcolmson_translation() {
    let q = Ring::rationals();
    let mut smp = Sampler::new(&q, 4000);
    let sset = invertible_sset_q(&mut smp);
    let mut tamper_trials = 0usize;
    let mut witnesses = 0usize;
    for round in 0..50 {
        let a = FreeObject(smp.usize_in(1, 2));
        let b = FreeObject(smp.usize_in(1, 2));
        let t1 = smp.triple(&sset, a, b, 2);
        let value = LocFunctor::fractions(sset.clone())
            .unwrap()
            .evaluate(&t1)
            .unwrap();
        let t2 = from_plain(&sset, &value).unwrap();
        let SearchOutcome::Found(fw) = search_equal(&t1, &t2, 4).unwrap() else {
            panic!("equal triples must admit a witness over Q");
        };
        assert!(check_factorization(&t1, &t2, &fw).unwrap());
        let mw = malcolmson_from_factorization(&t1, &t2, &fw).unwrap();
        assert!(check_malcolmson(&t1, &t2, &mw).unwrap());
        // witness soundness: a verifying witness forces oracle equality
        assert_eq!(
            decide_equal_oracle(&t1, &t2).unwrap(),
            OracleVerdict::Equal(true)
        );
        witnesses += 1;

        let mut local = Sampler::new(&q, 9000 + round as u64);
        for _ in 0..10 {
            let mut bad = mw.clone();
            // pick a nonempty block and bump one entry by a nonzero value
            let blocks: Vec<&mut MatMorphism> =
                vec![&mut bad.q, &mut bad.p, &mut bad.u, &mut bad.v];
            let mut candidates: Vec<&mut MatMorphism> = blocks
                .into_iter()
                .filter(|m| m.rows() > 0 && m.cols() > 0)
                .collect();
            let pick = local.usize_in(0, candidates.len() - 1);
            let m = &mut candidates[pick];
            let i = local.usize_in(0, m.rows() - 1);
            let j = local.usize_in(0, m.cols() - 1);
            let bump = m.at(i, j).add(&local.nonzero_element()).unwrap();
            m.set(i, j, bump);
            assert!(
                !check_malcolmson(&t1, &t2, &bad).unwrap(),
                "tampered witness must fail"
            );
            tamper_trials += 1;
        }
    }
    assert!(witnesses >= 50 && tamper_trials >= 500);
    println!(
        "criterion 4 (Malcolmson translation, {} witnesses, {} tamper trials): PASS",
        witnesses, tamper_trials
    );
}

/// A tiny standalone rational solver on i128 fractions used as the
/// independent oracle for criterion 5, deliberately separate from the
/// engine's solver.
mod brute {
    #[derive(Clone, Copy, PartialEq, Debug)]
    pub struct Fr(pub i128, pub i128);

    fn gcd(a: i128, b: i128) -> i128 {
        let (mut a, mut b) = (a.abs(), b.abs());
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a.max(1)
    }

    impl Fr {
        pub fn new(n: i128, d: i128) -> Fr {
            assert!(d != 0);
            let s = if d < 0 { -1 } else { 1 };
            let g = gcd(n, d);
            Fr(s * n / g, s * d / g)
        }
        pub fn zero() -> Fr {
            Fr(0, 1)
        }
        pub fn is_zero(self) -> bool {
            self.0 == 0
        }
        pub fn add(self, o: Fr) -> Fr {
            Fr::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
        }
        pub fn sub(self, o: Fr) -> Fr {
            Fr::new(self.0 * o.1 - o.0 * self.1, self.1 * o.1)
        }
        pub fn mul(self, o: Fr) -> Fr {
            Fr::new(self.0 * o.0, self.1 * o.1)
        }
        pub fn div(self, o: Fr) -> Fr {
            assert!(o.0 != 0);
            Fr::new(self.0 * o.1, self.1 * o.0)
        }
    }

    /// Gaussian elimination: does `a x = b` have a rational solution?
    pub fn solvable(a: &[Vec<Fr>], b: &[Fr]) -> bool {
        let rows = a.len();
        let cols = a.first().map_or(0, |r| r.len());
        let mut m: Vec<Vec<Fr>> = a.to_vec();
        let mut v: Vec<Fr> = b.to_vec();
        let mut row = 0usize;
        for col in 0..cols {
            let Some(p) = (row..rows).find(|&i| !m[i][col].is_zero()) else {
                continue;
            };
            m.swap(row, p);
            v.swap(row, p);
            let piv = m[row][col];
            for j in 0..cols {
                m[row][j] = m[row][j].div(piv);
            }
            v[row] = v[row].div(piv);
            for i in 0..rows {
                if i != row && !m[i][col].is_zero() {
                    let f = m[i][col];
                    for j in 0..cols {
                        let t = m[row][j].mul(f);
                        m[i][j] = m[i][j].sub(t);
                    }
                    let t = v[row].mul(f);
                    v[i] = v[i].sub(t);
                }
            }
            row += 1;
            if row == rows {
                break;
            }
        }
        for i in row..rows {
            if !v[i].is_zero() {
                return false;
            }
        }
        true
    }
}

/// Enumerate differentials with entries in {−2..2} satisfying d² = 0 for
/// three-term shapes, deterministically.
fn enumerate_complexes(
    ring: &Ring,
    ranks: (usize, usize, usize),
    limit: usize,
) -> Vec<BoundedComplex> {
    let (r0, r1, r2) = ranks;
    let n0 = r1 * r0;
    let n1 = r2 * r1;
    let vals: Vec<i64> = vec![0, 1, -1, 2, -2];
    let mut out = Vec::new();
    let mut idx0 = vec![0usize; n0];
    'outer: loop {
        let d0 = MatMorphism::new(
            ring,
            r1,
            r0,
            idx0.iter().map(|&i| ring.from_i64(vals[i])).collect(),
        )
        .unwrap();
        let mut idx1 = vec![0usize; n1];
        loop {
            let d1 = MatMorphism::new(
                ring,
                r2,
                r1,
                idx1.iter().map(|&i| ring.from_i64(vals[i])).collect(),
            )
            .unwrap();
            if d1.compose(&d0).unwrap().is_zero() {
                if let Ok(c) = BoundedComplex::new(ring, 0, vec![r0, r1, r2], vec![d0.clone(), d1])
                {
                    out.push(c);
                    if out.len() >= limit {
                        break 'outer;
                    }
                }
            }
            // odometer
            let mut k = 0;
            loop {
                if k == n1 {
                    break;
                }
                idx1[k] += 1;
                if idx1[k] < vals.len() {
                    break;
                }
                idx1[k] = 0;
                k += 1;
            }
            if k == n1 {
                break;
            }
        }
        let mut k = 0;
        loop {
            if k == n0 {
                break 'outer;
            }
            idx0[k] += 1;
            if idx0[k] < vals.len() {
                break;
            }
            idx0[k] = 0;
            k += 1;
        }
    }
    out
}

/// Chain self-maps of the form λ·id + dh + hd for deterministic small h.
fn probe_maps(c: &BoundedComplex) -> Vec<ChainMap> {
    let ring = c.ring().clone();
    let mut out = vec![ChainMap::zero(c.clone(), c.clone()), ChainMap::identity(c)];
    let Some((lo, hi)) = c.support() else {
        return out;
    };
    for lambda in [1i64, 2] {
        for hval in [1i64, -1] {
            let mut comps = BTreeMap::new();
            for n in lo..=hi {
                let id = MatMorphism::identity(&ring, c.rank_at(n))
                    .scale(&ring.from_i64(lambda))
                    .unwrap();
                let mut hmat_n = MatMorphism::zero(&ring, c.rank_at(n - 1), c.rank_at(n));
                if hmat_n.rows() > 0 && hmat_n.cols() > 0 {
                    hmat_n.set(0, 0, ring.from_i64(hval));
                }
                let mut hmat_n1 = MatMorphism::zero(&ring, c.rank_at(n), c.rank_at(n + 1));
                if hmat_n1.rows() > 0 && hmat_n1.cols() > 0 {
                    hmat_n1.set(0, 0, ring.from_i64(hval));
                }
                let dh = c.diff_at(n - 1).compose(&hmat_n).unwrap();
                let hd = hmat_n1.compose(&c.diff_at(n)).unwrap();
                let v = id.add(&dh.add(&hd).unwrap()).unwrap();
                if !v.is_zero() {
                    comps.insert(n, v);
                }
            }
            if let Ok(f) = ChainMap::new(c.clone(), c.clone(), comps) {
                out.push(f);
            }
        }
    }
    out
}

/// Criterion 5: the null-homotopy decision agrees with independent brute
/// force on small shapes over Q (standalone elimination) and Z (bounded box
/// search with radius 10).
#[test]
fn criterion_5_homotopy_engine() {
    let shapes = [
        (1, 1, 1),
        (2, 1, 1),
        (1, 2, 1),
        (1, 1, 2),
        (2, 2, 1),
        (1, 2, 2),
    ];
    let mut instances = 0usize;

    // over Q against the standalone solver
    let q = Ring::rationals();
    for &shape in &shapes {
        for c in enumerate_complexes(&q, shape, 25) {
            for f in probe_maps(&c) {
                let engine = is_null_homotopic(&f).unwrap();
                let oracle = brute_solvable_q(&c, &f);
                match engine {
                    HomotopyDecision::Homotopic(h) => {
                        assert!(h.witnesses_null(&f).unwrap());
                        assert!(oracle, "engine found a homotopy the oracle denies");
                    }
                    HomotopyDecision::No => {
                        assert!(!oracle, "oracle finds a homotopy the engine denies")
                    }
                    HomotopyDecision::Unsupported => panic!("Q supports solving"),
                }
                instances += 1;
            }
        }
    }

    // over Z against the bounded box search (shapes with few homotopy vars)
    let z = Ring::integers();
    for &shape in &[(1, 1, 1), (2, 1, 1), (1, 1, 2)] {
        for c in enumerate_complexes(&z, shape, 25) {
            let hdim: usize = {
                let (lo, hi) = c.support().unwrap();
                (lo..=hi + 1).map(|n| c.rank_at(n) * c.rank_at(n - 1)).sum()
            };
            if hdim > 4 {
                continue;
            }
            for f in probe_maps(&c) {
                let engine = is_null_homotopic(&f).unwrap();
                let oracle = box_search_z(&c, &f, 10);
                match engine {
                    HomotopyDecision::Homotopic(h) => {
                        assert!(h.witnesses_null(&f).unwrap());
                        assert!(oracle, "box search must confirm within radius 10");
                    }
                    HomotopyDecision::No => assert!(!oracle),
                    HomotopyDecision::Unsupported => panic!("Z supports solving"),
                }
                instances += 1;
            }
        }
    }
    assert!(instances >= 200, "only {} instances", instances);
    println!(
        "criterion 5 (homotopy engine vs brute force, {} instances): PASS",
        instances
    );
}

fn entry_i128(m: &MatMorphism, i: usize, j: usize) -> i128 {
    use cohn_core::coeff::Value;
    match m.at(i, j).value() {
        Value::Int(n) => {
            let s: String = n.to_string();
            s.parse().unwrap()
        }
        Value::Rat(r) => {
            assert!(r.is_integer());
            r.to_integer().to_string().parse().unwrap()
        }
        _ => panic!("integer-like entry expected"),
    }
}

/// Assemble dh + hd = f over Q and solve with the standalone solver.
fn brute_solvable_q(c: &BoundedComplex, f: &ChainMap) -> bool {
    use brute::Fr;
    let (lo, hi) = match c.support() {
        None => return true,
        Some(v) => v,
    };
    let degs: Vec<i64> = (lo - 1..=hi + 1).collect();
    let mut offsets = BTreeMap::new();
    let mut nvars = 0usize;
    for &n in &degs {
        let sz = c.rank_at(n) * c.rank_at(n - 1);
        if sz > 0 {
            offsets.insert(n, nvars);
            nvars += sz;
        }
    }
    let mut rows: Vec<Vec<Fr>> = Vec::new();
    let mut rhs: Vec<Fr> = Vec::new();
    for &n in &degs {
        let er = c.rank_at(n);
        if er == 0 {
            continue;
        }
        let dd = c.diff_at(n - 1);
        let dc = c.diff_at(n);
        let fnm = f.component_at(n);
        for i in 0..er {
            for j in 0..er {
                let mut row = vec![Fr::zero(); nvars];
                if let Some(&off) = offsets.get(&n) {
                    for a in 0..c.rank_at(n - 1) {
                        let v = entry_i128(&dd, i, a);
                        if v != 0 {
                            row[off + a * er + j] = row[off + a * er + j].add(Fr::new(v, 1));
                        }
                    }
                }
                if let Some(&off) = offsets.get(&(n + 1)) {
                    let hc = c.rank_at(n + 1);
                    for b in 0..hc {
                        let v = entry_i128(&dc, b, j);
                        if v != 0 {
                            row[off + i * hc + b] = row[off + i * hc + b].add(Fr::new(v, 1));
                        }
                    }
                }
                rows.push(row);
                rhs.push(Fr::new(entry_i128(&fnm, i, j), 1));
            }
        }
    }
    brute::solvable(&rows, &rhs)
}

/// Exhaustive box search for an integral homotopy with entries in
/// [−radius, radius].
fn box_search_z(c: &BoundedComplex, f: &ChainMap, radius: i64) -> bool {
    let (lo, hi) = match c.support() {
        None => return true,
        Some(v) => v,
    };
    let degs: Vec<i64> = (lo..=hi + 1).collect();
    let mut slots: Vec<(i64, usize, usize)> = Vec::new();
    for &n in &degs {
        let rows = c.rank_at(n - 1);
        let cols = c.rank_at(n);
        for i in 0..rows {
            for j in 0..cols {
                slots.push((n, i, j));
            }
        }
    }
    let nvars = slots.len();
    let mut vals = vec![-radius; nvars];
    loop {
        // build h and test
        let ring = c.ring().clone();
        let mut comps: BTreeMap<i64, MatMorphism> = BTreeMap::new();
        for (idx, &(n, i, j)) in slots.iter().enumerate() {
            let m = comps
                .entry(n)
                .or_insert_with(|| MatMorphism::zero(&ring, c.rank_at(n - 1), c.rank_at(n)));
            m.set(i, j, ring.from_i64(vals[idx]));
        }
        let mut ok = true;
        for &n in &degs {
            let zero = MatMorphism::zero(&ring, c.rank_at(n - 1), c.rank_at(n));
            let hn = comps.get(&n).unwrap_or(&zero);
            let zero1 = MatMorphism::zero(&ring, c.rank_at(n), c.rank_at(n + 1));
            let hn1 = comps.get(&(n + 1)).unwrap_or(&zero1);
            let dh = c.diff_at(n - 1).compose(hn).unwrap();
            let hd = hn1.compose(&c.diff_at(n)).unwrap();
            if dh.add(&hd).unwrap() != f.component_at(n) {
                ok = false;
                break;
            }
        }
        if ok {
            return true;
        }
        // odometer
        let mut k = 0;
        loop {
            if k == nvars {
                return false;
            }
            vals[k] += 1;
            if vals[k] <= radius {
                break;
            }
            vals[k] = -radius;
            k += 1;
        }
    }
}

/// Criterion 6: weight decompositions verify on random complexes over Q,
/// and the weight range is invariant under adding contractible summands.
#[test]
fn criterion_6_weight_structure() {
    let q = Ring::rationals();
    let mut smp = Sampler::new(&q, 6000);
    let mut checked = 0usize;
    for _ in 0..100 {
        let m = smp.complex(-2, 4, 2);
        let n = smp.i64_in(-3, 3);
        let t = weight_decompose(&m, n).unwrap();
        // the triangle re-assembles: composite vanishes, cone(X→M) ≃ lower
        assert!(t.project.compose(&t.include).unwrap().is_zero());
        let round = t.cone_to_lower.compose(&t.lower_to_cone).unwrap();
        assert_eq!(round, ChainMap::identity(&t.lower));
        let other = t.lower_to_cone.compose(&t.cone_to_lower).unwrap();
        let id = ChainMap::identity(&t.cone.cone);
        assert!(t.cone_homotopy.witnesses(&id, &other).unwrap());

        // weight range is a homotopy invariant under contractible padding
        let base = weight_range(&m).unwrap();
        let x = MatMorphism::identity(&q, smp.usize_in(1, 2));
        let pad = BoundedComplex::two_term(&x, smp.i64_in(-2, 1)).unwrap();
        let padded = m.direct_sum(&pad);
        assert_eq!(weight_range(&padded).unwrap(), base);
        checked += 1;
    }
    assert!(checked >= 100);
    println!(
        "criterion 6 (weight structure, {} complexes): PASS",
        checked
    );
}

/// Criterion 7: heart hom classes over Z with S = {[2]} match independent
/// fraction arithmetic on at least 50 randomized probe sets.
#[test]
fn criterion_7_heart_computation() {
    use num_rational::BigRational;
    let sset = sset_z(2);
    let z = Ring::integers();
    let one_obj = FreeObject(1);
    let mut smp = Sampler::new(&z, 7000);
    let mut sets = 0usize;
    for _ in 0..50 {
        let nprobes = smp.usize_in(2, 5);
        let mut probes = Vec::new();
        let mut values: Vec<BigRational> = Vec::new();
        for _ in 0..nprobes {
            let len = smp.usize_in(1, 4);
            let mut tokens = Vec::new();
            let mut value = BigRational::from_integer(1.into());
            for _ in 0..len {
                if smp.usize_in(0, 2) == 0 {
                    tokens.push(ZigToken::InverseOfS(0));
                    value /= BigRational::from_integer(2.into());
                } else {
                    let a = smp.i64_in(-4, 4);
                    tokens.push(ZigToken::Forward(MatMorphism::from_i64_rows(&z, &[&[a]])));
                    value *= BigRational::from_integer(a.into());
                }
            }
            probes.push(ZigZag { tokens });
            values.push(value);
        }
        let report = heart_hom(&sset, one_obj, one_obj, &probes).unwrap();
        assert!(report.oracle_used);
        // ground-truth partition by the independent fraction values
        let mut truth: Vec<Vec<usize>> = Vec::new();
        let mut reps: Vec<BigRational> = Vec::new();
        for (i, v) in values.iter().enumerate() {
            if let Some(c) = reps.iter().position(|r| r == v) {
                truth[c].push(i);
            } else {
                reps.push(v.clone());
                truth.push(vec![i]);
            }
        }
        assert_eq!(
            report.classes, truth,
            "class partition matches fraction arithmetic"
        );
        sets += 1;
    }
    assert!(sets >= 50);
    println!("criterion 7 (heart computation, {} probe sets): PASS", sets);
}
