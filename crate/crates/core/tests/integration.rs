use std::collections::BTreeMap;

use num_complex::Complex64 as C;
use proptest::prelude::*;

use supq::identities::{check_tsuboi, KrDims};
use supq::qchar::{kr_qchar, qc_mul};
use supq::spinchain::{
    baxter_analysis, bae_residual, d_module, one_dim_data, one_dim_eigenvalue, qybe_residual, sectors, transfer,
    transfer_with, ChainConfig, OneDimAux, Twist,
};
use supq::tableaux::{enumerate, Sign};
use supq::worked::all_examples;
use supq::{Monomial, Rank, WeightLatticeVector};

fn rank(m: usize, n: usize) -> Rank {
    Rank::new(m, n).unwrap()
}

#[test]
fn worked_examples_all_pass() {
    let reps = all_examples().unwrap();
    assert_eq!(reps.len(), 8);
    for r in reps {
        assert!(r.passed(), "{}: {:?}", r.name, r.witness);
    }
}

#[test]
fn kr_dimensions_agree_with_tableau_counts() {
    // W^{(i)}_{m,a} for i ≤ M comes from the rectangle of i rows and m columns.
    let rk = rank(2, 1);
    let mut dims = KrDims::new();
    for i in 1..=2 {
        for m in 1..=3 {
            let mut lam = vec![0; 3];
            lam[..i].iter_mut().for_each(|x| *x = m as i64);
            let count = enumerate(rk, &WeightLatticeVector::new(lam), Sign::Minus).unwrap().len();
            assert_eq!(dims.d(rk, i, m).unwrap(), count as i64);
            assert_eq!(kr_qchar(rk, i, m, &Monomial::one()).unwrap().dim(), count as i64);
        }
    }
}

#[test]
fn tensor_square_dimension_matches_t_system() {
    // χ_q(W_1)² has (d_1)² terms counted with multiplicity, which the
    // Tsuboi relation splits as d_2·d_0 + d^{(2)}_1.
    let rk = rank(2, 1);
    let a = Monomial::gen("a");
    let w = kr_qchar(rk, 1, 1, &a).unwrap();
    let sq = qc_mul(&w, &w).unwrap();
    let rep = check_tsuboi(rk, 1, 1).unwrap();
    assert_eq!(serde_json::json!(sq.dim()), rep.data["lhs"]);
}

#[test]
fn d_module_transfer_matches_one_dimensional_formula() {
    let cfg = ChainConfig::generic(2, 1, 3, 3).unwrap();
    let rk = cfg.rank();
    let u = C::new(0.21, -0.44);
    for i in 1..rk.kappa() {
        let f = d_module(rk, i).unwrap();
        let aux = OneDimAux { cfg: &cfg, data: one_dim_data(&cfg, &f).unwrap() };
        let t = transfer_with(&cfg, &aux, u).unwrap();
        for (content, states) in sectors(&cfg).unwrap() {
            let want = one_dim_eigenvalue(&cfg, &aux.data, u, &content).unwrap();
            for s in states {
                assert!((t[(s, s)] - want).norm() <= 1e-12 * want.norm().max(1.0));
            }
        }
    }
}

#[test]
fn supertrace_without_twist_is_still_commuting() {
    let b = vec![C::new(0.3, 0.0), C::new(0.7, 0.1)];
    let cfg = ChainConfig::new(1, 1, C::new(1.13, 0.0), b, Twist::untwisted(2)).unwrap();
    let t1 = transfer(&cfg, C::new(0.4, 0.2), cfg.q).unwrap().mat;
    let t2 = transfer(&cfg, C::new(-0.3, 0.5), cfg.q).unwrap().mat;
    assert!((&t1 * &t2 - &t2 * &t1).norm() < 1e-12);
}

#[test]
fn bethe_roots_fail_when_the_twist_is_swapped() {
    // Roots from one twist do not solve the equations of another.
    let cfg = ChainConfig::generic(2, 0, 2, 42).unwrap();
    let s = baxter_analysis(&cfg, 11).unwrap();
    let other = ChainConfig::generic(2, 0, 2, 43).unwrap();
    let e = s.eigen.iter().find(|e| !e.roots.is_empty()).unwrap();
    let mut q = e.q.clone().unwrap();
    q.gauge = other.twist.x[1];
    let r = bae_residual(&other, 1, &e.roots, &BTreeMap::from([(1, q)]), &e.content).unwrap();
    assert!(r.iter().any(|x| x.norm() > 1e-6));
}

fn arb_point() -> impl Strategy<Value = C> {
    (0.4f64..2.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| C::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn graded_yang_baxter_holds(z1 in arb_point(), z2 in arb_point(), z3 in arb_point(), which in 0usize..4) {
        let (m, n) = [(1, 1), (2, 0), (2, 1), (2, 2)][which];
        let r = qybe_residual(m, n, C::new(1.13, 0.0), [z1, z2, z3], true);
        prop_assert!(r.rel < 1e-12, "{:?}", r);
    }

    #[test]
    fn transfer_family_commutes_for_any_twist(seed in 0u64..1000, u1 in arb_point(), u2 in arb_point()) {
        let cfg = ChainConfig::generic(2, 1, 2, seed).unwrap();
        let t1 = transfer(&cfg, u1, cfg.q).unwrap().mat;
        let t2 = transfer(&cfg, u2, 1.0 / cfg.q).unwrap().mat;
        let scale = t1.norm() * t2.norm();
        prop_assert!((&t1 * &t2 - &t2 * &t1).norm() < 1e-12 * scale.max(1.0));
    }

    #[test]
    fn baxter_fit_is_unique_for_generic_twists(seed in 0u64..500, gl11 in any::<bool>()) {
        let (m, n) = if gl11 { (1, 1) } else { (2, 0) };
        let cfg = ChainConfig::generic(m, n, 2, seed).unwrap();
        let s = baxter_analysis(&cfg, seed + 1).unwrap();
        prop_assert!(s.all_fitted());
        prop_assert!(s.eigen.iter().all(|e| e.q.as_ref().unwrap().nullity == 1));
        prop_assert!(s.max_bae_residual() < 1e-7);
    }

    #[test]
    fn kr_dimension_is_a_q_character_invariant(i in 1usize..3, m in 1usize..4) {
        let rk = rank(2, 2);
        let a = kr_qchar(rk, i, m, &Monomial::gen("a")).unwrap();
        let b = kr_qchar(rk, i, m, &Monomial::q(3)).unwrap();
        prop_assert_eq!(a.dim(), b.dim());
        prop_assert_eq!(KrDims::new().d(rk, i, m).unwrap(), a.dim());
    }
}
