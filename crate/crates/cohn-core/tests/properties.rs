//! Property tests for the algebraic invariants: ring axioms on canonical
//! forms, solver soundness, biproduct laws, certificate round trips, and the
//! functor homomorphism property.

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use cohn_core::addcat::{canonical_maps, kar_hom_member, FreeObject, KarObject, MatMorphism};
use cohn_core::coeff::{solve_linear, LinearOutcome, Ring};
use cohn_core::complexes::{
    cone, cone_composite_homotopy, is_null_homotopic, ChainMap, Homotopy, HomotopyDecision,
};
use cohn_core::localization::{triple_add, triple_compose, triple_dsum, LocFunctor};
use cohn_core::sample::Sampler;
use cohn_core::triangular::{compose_factors, extend, factor_elementary, DiagTag, Factor, SSet};

fn rings() -> Vec<Ring> {
    vec![
        Ring::integers(),
        Ring::rationals(),
        Ring::polynomials(),
        Ring::free_algebra(vec!["x", "y"]),
    ]
}

proptest! {
    #[test]
    fn ring_axioms_hold_on_canonical_forms(seed in any::<u64>()) {
        for ring in rings() {
            let mut s = Sampler::new(&ring, seed);
            let a = s.element();
            let b = s.element();
            let c = s.element();
            let ab_c = a.add(&b).unwrap().add(&c).unwrap();
            let a_bc = a.add(&b.add(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let abc1 = a.mul(&b).unwrap().mul(&c).unwrap();
            let abc2 = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(abc1, abc2);
            let left = a.mul(&b.add(&c).unwrap()).unwrap();
            let right = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
            prop_assert_eq!(a.add(&a.neg()).unwrap(), ring.zero());
        }
    }

    #[test]
    fn inverses_multiply_to_one(seed in any::<u64>()) {
        for ring in rings() {
            let mut s = Sampler::new(&ring, seed);
            let a = s.element();
            if let Some(b) = a.try_invert() {
                prop_assert_eq!(a.mul(&b).unwrap(), ring.one());
                prop_assert_eq!(b.mul(&a).unwrap(), ring.one());
            }
        }
    }

    #[test]
    fn solver_solutions_verify(seed in any::<u64>()) {
        for ring in [Ring::integers(), Ring::rationals()] {
            let mut s = Sampler::new(&ring, seed);
            let rows = s.usize_in(1, 3);
            let cols = s.usize_in(1, 3);
            let m = s.matrix(rows, cols);
            let rhs: Vec<_> = (0..rows).map(|_| s.element()).collect();
            let system = m.rows_vec();
            if let LinearOutcome::Solution(x) = solve_linear(&ring, &system, &rhs).unwrap() {
                let xm = MatMorphism::new(&ring, cols, 1, x).unwrap();
                let b = MatMorphism::new(&ring, rows, 1, rhs.clone()).unwrap();
                prop_assert_eq!(m.compose(&xm).unwrap(), b);
            }
        }
    }

    /// When the Smith-form solver reports NoSolution over Z, no solution
    /// exists in a bounded box either (systems up to 3 columns here).
    #[test]
    fn integer_no_solution_cross_checked(seed in any::<u64>()) {
        let z = Ring::integers();
        let mut s = Sampler::new(&z, seed);
        let rows = s.usize_in(1, 4);
        let cols = s.usize_in(1, 3);
        let m = s.matrix(rows, cols);
        let rhs: Vec<_> = (0..rows).map(|_| s.element()).collect();
        let system = m.rows_vec();
        if let LinearOutcome::NoSolution = solve_linear(&z, &system, &rhs).unwrap() {
            let b = MatMorphism::new(&z, rows, 1, rhs.clone()).unwrap();
            let radius = 5i64;
            let width = 2 * radius + 1;
            let total = (width as usize).pow(cols as u32);
            for code in 0..total {
                let mut c = code;
                let entries: Vec<Vec<cohn_core::RingElement>> = (0..cols)
                    .map(|_| {
                        let v = (c % width as usize) as i64 - radius;
                        c /= width as usize;
                        vec![z.from_i64(v)]
                    })
                    .collect();
                let xm = MatMorphism::from_rows(&z, entries).unwrap();
                prop_assert_ne!(m.compose(&xm).unwrap(), b.clone());
            }
        }
    }

    #[test]
    fn biproduct_laws_up_to_rank_five(xr in 0usize..=5, yr in 0usize..=5) {
        let z = Ring::integers();
        let (in_x, pr_x, in_y, pr_y) = canonical_maps(&z, FreeObject(xr), FreeObject(yr));
        prop_assert_eq!(pr_x.compose(&in_x).unwrap(), MatMorphism::identity(&z, xr));
        prop_assert!(pr_x.compose(&in_y).unwrap().is_zero());
        let total = in_x.compose(&pr_x).unwrap().add(&in_y.compose(&pr_y).unwrap()).unwrap();
        prop_assert_eq!(total, MatMorphism::identity(&z, xr + yr));
    }

    /// Karoubi hom-sets are closed under composition: maps compatible with
    /// idempotents compose to compatible maps.
    #[test]
    fn kar_composition_stays_compatible(seed in any::<u64>()) {
        let q = Ring::rationals();
        let mut s = Sampler::new(&q, seed);
        let n = s.usize_in(1, 4);
        let mk_idem = |s: &mut Sampler| {
            let u = s.unipotent(n);
            let uinv = u.invert().unwrap();
            let mut d = MatMorphism::zero(&q, n, n);
            for i in 0..n {
                if i % 2 == 0 {
                    d.set(i, i, q.one());
                }
            }
            u.compose(&d).unwrap().compose(&uinv).unwrap()
        };
        let p0 = mk_idem(&mut s);
        let p1 = mk_idem(&mut s);
        let p2 = mk_idem(&mut s);
        let o0 = KarObject::new(FreeObject(n), p0.clone()).unwrap();
        let o1 = KarObject::new(FreeObject(n), p1.clone()).unwrap();
        let o2 = KarObject::new(FreeObject(n), p2.clone()).unwrap();
        let f = p1.compose(&s.matrix(n, n)).unwrap().compose(&p0).unwrap();
        let g = p2.compose(&s.matrix(n, n)).unwrap().compose(&p1).unwrap();
        prop_assert!(kar_hom_member(&f, &o0, &o1).unwrap());
        prop_assert!(kar_hom_member(&g, &o1, &o2).unwrap());
        prop_assert!(kar_hom_member(&g.compose(&f).unwrap(), &o0, &o2).unwrap());
    }

    /// Certificate extension: ranks concatenate and the diagonal blocks are
    /// the concatenated diagonals.
    #[test]
    fn extension_concatenates_diagonals(seed in any::<u64>()) {
        let z = Ring::integers();
        let mut s = Sampler::new(&z, seed);
        let sset = Arc::new(SSet::new(&z, vec![
            s.matrix(1, 1),
            s.matrix(2, 1),
        ]).unwrap());
        let a = s.certificate(&sset, 3, true);
        let b = s.certificate(&sset, 3, true);
        let glue = s.matrix(b.assembled().rows(), a.assembled().cols());
        let c = extend(&a, &b, &glue).unwrap();
        prop_assert_eq!(c.size(), a.size() + b.size());
        prop_assert_eq!(c.assembled().rows(), a.assembled().rows() + b.assembled().rows());
        prop_assert_eq!(c.assembled().cols(), a.assembled().cols() + b.assembled().cols());
        let sum = a.assembled().direct_sum(b.assembled());
        for l in 0..c.size() {
            prop_assert_eq!(c.diag_matrix(l), if l < a.size() { a.diag_matrix(l) } else { b.diag_matrix(l - a.size()) });
        }
        // diagonal blocks of the assembly agree with the direct sum
        for i in 0..a.assembled().rows() {
            for j in 0..a.assembled().cols() {
                prop_assert_eq!(c.assembled().at(i, j), sum.at(i, j));
            }
        }
    }

    /// Elementary factorization reproduces the assembled matrix, with
    /// invertible factors recognized by the matrix inverter and every InS
    /// factor a direct sum of S elements and identities.
    #[test]
    fn factorization_round_trip(seed in any::<u64>()) {
        for ring in [Ring::integers(), Ring::rationals()] {
            let mut s = Sampler::new(&ring, seed);
            let sset = Arc::new(SSet::new(&ring, vec![s.matrix(1, 1), s.matrix(2, 2)]).unwrap());
            let cert = s.certificate(&sset, 4, true);
            let factors = factor_elementary(&cert).unwrap();
            prop_assert_eq!(&compose_factors(&ring, &factors).unwrap(), cert.assembled());
            for f in &factors {
                match f {
                    Factor::Invertible { matrix, inverse } => {
                        prop_assert_eq!(&matrix.invert().unwrap(), inverse);
                    }
                    Factor::InS { matrix, parts } => {
                        let mut expect: Option<MatMorphism> = None;
                        for part in parts {
                            let piece = match part {
                                DiagTag::ElementOfS(k) => sset.element(*k).unwrap().clone(),
                                DiagTag::Identity(o) => MatMorphism::identity(&ring, o.rank()),
                            };
                            expect = Some(match expect {
                                None => piece,
                                Some(e) => e.direct_sum(&piece),
                            });
                        }
                        prop_assert_eq!(matrix, &expect.unwrap());
                    }
                }
            }
        }
    }

    /// The fraction functor is a homomorphism for the triple operations.
    #[test]
    fn functor_respects_triple_operations(seed in any::<u64>()) {
        let z = Ring::integers();
        let mut s = Sampler::new(&z, seed);
        let sset = Arc::new(SSet::new(&z, vec![MatMorphism::from_i64_rows(&z, &[&[2]])]).unwrap());
        let f = LocFunctor::fractions(sset.clone()).unwrap();
        let a = FreeObject(s.usize_in(1, 2));
        let b = FreeObject(s.usize_in(1, 2));
        let c = FreeObject(s.usize_in(1, 2));
        let t1 = s.triple(&sset, b, c, 2);
        let t2 = s.triple(&sset, a, b, 2);
        let comp = triple_compose(&t1, &t2).unwrap();
        prop_assert_eq!(
            f.evaluate(&comp).unwrap(),
            f.evaluate(&t1).unwrap().compose(&f.evaluate(&t2).unwrap()).unwrap()
        );
        let u1 = s.triple(&sset, a, b, 2);
        let u2 = s.triple(&sset, a, b, 2);
        let sum = triple_add(&u1, &u2).unwrap();
        prop_assert_eq!(
            f.evaluate(&sum).unwrap(),
            f.evaluate(&u1).unwrap().add(&f.evaluate(&u2).unwrap()).unwrap()
        );
        let ds = triple_dsum(&u1, &t1).unwrap();
        prop_assert_eq!(
            f.evaluate(&ds).unwrap(),
            f.evaluate(&u1).unwrap().direct_sum(&f.evaluate(&t1).unwrap())
        );
    }

    /// Whenever the search finds a witness, the oracle agrees; a verifying
    /// Malcolmson witness likewise forces oracle equality.
    #[test]
    fn oracle_and_search_cohere(seed in any::<u64>()) {
        use cohn_core::equality::{
            check_malcolmson, decide_equal_oracle, malcolmson_from_factorization, search_equal,
            OracleVerdict, SearchOutcome,
        };
        let z = Ring::integers();
        let mut s = Sampler::new(&z, seed);
        let sset = Arc::new(SSet::new(&z, vec![MatMorphism::from_i64_rows(&z, &[&[2]])]).unwrap());
        let a = FreeObject(1);
        let b = FreeObject(s.usize_in(1, 2));
        let t1 = s.triple(&sset, a, b, 2);
        let t2 = s.triple(&sset, a, b, 2);
        if let SearchOutcome::Found(w) = search_equal(&t1, &t2, 4).unwrap() {
            prop_assert_eq!(decide_equal_oracle(&t1, &t2).unwrap(), OracleVerdict::Equal(true));
            let mw = malcolmson_from_factorization(&t1, &t2, &w).unwrap();
            prop_assert!(check_malcolmson(&t1, &t2, &mw).unwrap());
        }
    }

    /// Cone triangles: π∘ι = 0 and ι∘f is null-homotopic with the
    /// tautological homotopy, for honest random chain maps.
    #[test]
    fn cone_triangle_properties(seed in any::<u64>()) {
        let q = Ring::rationals();
        let mut s = Sampler::new(&q, seed);
        let cx = s.complex(-1, 3, 2);
        // a chain map built as λ·id + dh + hd is always a chain map
        let lambda = s.element();
        let mut hcomps = BTreeMap::new();
        if let Some((lo, hi)) = cx.support() {
            for n in lo..=hi {
                let rows = cx.rank_at(n - 1);
                let cols = cx.rank_at(n);
                if rows > 0 && cols > 0 {
                    hcomps.insert(n, s.matrix(rows, cols));
                }
            }
        }
        let h = Homotopy::new(cx.clone(), cx.clone(), hcomps).unwrap();
        let id = ChainMap::identity(&cx);
        let mut comps = BTreeMap::new();
        if let Some((lo, hi)) = cx.support() {
            for n in lo..=hi {
                let dh = cx.diff_at(n - 1).compose(&h.component_at(n)).unwrap();
                let hd = h.component_at(n + 1).compose(&cx.diff_at(n)).unwrap();
                let v = id.component_at(n).scale(&lambda).unwrap().add(&dh.add(&hd).unwrap()).unwrap();
                if !v.is_zero() {
                    comps.insert(n, v);
                }
            }
        }
        let f = ChainMap::new(cx.clone(), cx.clone(), comps).unwrap();
        let tri = cone(&f).unwrap();
        prop_assert!(tri.project.compose(&tri.inject).unwrap().is_zero());
        let taut = cone_composite_homotopy(&f, &tri).unwrap();
        prop_assert!(taut.witnesses_null(&tri.inject.compose(&f).unwrap()).unwrap());
        // produced homotopies verify structurally
        if let HomotopyDecision::Homotopic(w) = is_null_homotopic(&f).unwrap() {
            prop_assert!(w.witnesses_null(&f).unwrap());
        }
    }
}
