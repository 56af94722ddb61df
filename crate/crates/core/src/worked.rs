//! Replays of the worked examples as exact l-weight equalities.

use std::sync::Arc;

use serde_json::json;

use crate::coeff_ring::Monomial;
use crate::error::Result;
use crate::identities::{f_norm, VerificationReport};
use crate::lweights::{FactoredRational, LWeight, Rank, WeightLatticeVector};
use crate::qchar::{eval_plus, kr_qchar, QChar};
use crate::spinchain::{d_module, y_factor};
use crate::tableaux::{build_diagram, transpose_shape, transpose_tableau, Sign, Tableau};

fn q(k: i32) -> Monomial {
    Monomial::q(k)
}

/// `pref · ∏(1 − z·zeros) / ∏(1 − z·poles)`.
fn ratio(pref: Monomial, zeros: &[Monomial], poles: &[Monomial]) -> FactoredRational {
    FactoredRational::from_parts(
        pref,
        zeros.iter().map(|m| (m.clone(), 1)).chain(poles.iter().map(|m| (m.clone(), -1))),
    )
}

/// l-weight with `g` in the listed 1-based components and 1 elsewhere.
fn at(rank: Rank, slots: &[usize], g: &FactoredRational, parity: u8) -> Result<LWeight> {
    let comps = (1..=rank.kappa())
        .map(|k| if slots.contains(&k) { g.clone() } else { FactoredRational::one() })
        .collect();
    rank.lweight(comps, parity)
}

/// `(g, …, g; s)`.
fn scalar(rank: Rank, g: &FactoredRational, parity: u8) -> Result<LWeight> {
    rank.lweight(vec![g.clone(); rank.kappa()], parity)
}

/// `w^{(i)}_{c,a} / w^{(i)}_{1,a}` with `w = f·aω`.
fn w_ratio(rank: Rank, i: usize, c: &Monomial, a: &Monomial) -> Result<LWeight> {
    let one = Monomial::one();
    let num = f_norm(rank, i, c, a)?.mul(&rank.asym_omega(i, c, a)?);
    let den = f_norm(rank, i, &one, a)?.mul(&rank.asym_omega(i, &one, a)?);
    Ok(num.div(&den))
}

fn compare(rep: &mut VerificationReport, label: &str, got: &LWeight, want: &LWeight) {
    if got != want {
        rep.fail(json!({"item": label, "computed": got.to_string(), "expected": want.to_string()}));
    }
}

fn qchar_terms(x: &QChar) -> Vec<LWeight> {
    x.terms().keys().cloned().collect()
}

fn compare_sum(rep: &mut VerificationReport, label: &str, x: &QChar, want: &[LWeight]) {
    let mut w = want.to_vec();
    w.sort();
    let multiplicity_one = x.terms().values().all(|&m| m == 1);
    if qchar_terms(x) != w || !multiplicity_one {
        rep.fail(json!({"item": label, "computed": x.to_string(), "expected": w.iter().map(|f| f.to_string()).collect::<Vec<_>>()}));
    }
}

/// gl(2|2): box table, `w`-ratios, `A` in terms of `aω`, box decompositions,
/// the one-dimensional `D_i` and the `y_i`.
pub fn example_gl22() -> Result<Vec<VerificationReport>> {
    let rk = Rank::new(2, 2)?;
    let (a, c) = (Monomial::gen("a"), Monomial::gen("c"));
    let one = Monomial::one();
    let boxes = [
        at(rk, &[1], &ratio(q(1), &[q(-1)], &[q(1)]), 0)?,
        at(rk, &[2], &ratio(q(1), &[q(1)], &[q(3)]), 0)?,
        at(rk, &[3], &ratio(q(-1), &[q(3)], &[q(1)]), 1)?,
        at(rk, &[4], &ratio(q(-1), &[q(1)], &[q(-1)]), 1)?,
    ];

    let mut table = VerificationReport::new("example-gl22-boxes", rk, &[]);
    for (j, want) in boxes.iter().enumerate() {
        compare(&mut table, &format!("box_{}(1)", j + 1), &rk.box_lw(j + 1, &one)?, want);
    }
    compare_sum(&mut table, "chi_q(W^(1)_{1,1})", &kr_qchar(rk, 1, 1, &one)?, &boxes);
    compare_sum(&mut table, "chi_q(V+(e1;q^-1))", &eval_plus(rk, &unit(rk, 1), &q(-1))?, &boxes);

    let mut wr = VerificationReport::new("example-gl22-w-ratios", rk, &[]);
    let ca = &c.pow(-2) * &a;
    compare(&mut wr, "w1", &w_ratio(rk, 1, &c, &a)?, &at(rk, &[1], &ratio(c.clone(), std::slice::from_ref(&ca), std::slice::from_ref(&a)), 0)?);
    compare(
        &mut wr,
        "w2",
        &w_ratio(rk, 2, &c, &a)?,
        &at(rk, &[1, 2], &ratio(c.clone(), &[&ca * &q(1)], &[&a * &q(1)]), 0)?,
    );
    let g3 = ratio(one.clone(), std::slice::from_ref(&ca), std::slice::from_ref(&a));
    let w3 = rk.lweight(vec![g3.clone(), g3.clone(), g3, FactoredRational::constant(c.inv())], 0)?;
    compare(&mut wr, "w3", &w_ratio(rk, 3, &c, &a)?, &w3);

    let mut aw = VerificationReport::new("example-gl22-root-omega", rk, &[]);
    compare(&mut aw, "aw1", &rk.asym_omega(1, &c, &a)?, &at(rk, &[1], &ratio(c.clone(), std::slice::from_ref(&ca), std::slice::from_ref(&a)), 0)?);
    compare(
        &mut aw,
        "aw2",
        &rk.asym_omega(2, &c, &a)?,
        &at(rk, &[1, 2], &ratio(c.clone(), &[&ca * &q(1)], &[&a * &q(1)]), 0)?,
    );
    compare(&mut aw, "aw3", &rk.asym_omega(3, &c, &a)?, &at(rk, &[4], &ratio(c.inv(), std::slice::from_ref(&a), std::slice::from_ref(&ca)), 0)?);
    let om = |i: usize, k: i32| rk.asym_omega(i, &q(k), &(&a * &q(k)));
    compare(&mut aw, "A1", &rk.simple_root(1, &a)?, &om(1, 2)?.mul(&om(2, -1)?));
    let s2 = scalar(rk, &ratio(q(1), &[&a * &q(-1)], &[&a * &q(1)]), 1)?;
    compare(&mut aw, "A2", &rk.simple_root(2, &a)?, &s2.mul(&om(1, -1)?).mul(&om(3, 1)?));
    let s3 = scalar(rk, &ratio(q(-1), &[&a * &q(2)], std::slice::from_ref(&a)), 0)?;
    compare(&mut aw, "A3", &rk.simple_root(3, &a)?, &s3.mul(&om(2, 1)?).mul(&om(3, -2)?));

    let mut dec = VerificationReport::new("example-gl22-box-decomposition", rk, &[]);
    let w = |i: usize, cc: i32, aa: i32| w_ratio(rk, i, &q(cc), &q(aa));
    compare(&mut dec, "box_1", &boxes[0], &w(1, 1, 1)?);
    compare(&mut dec, "box_2", &boxes[1], &w(1, -1, 1)?.mul(&w(2, 1, 2)?));
    let odd_qinv = scalar(rk, &FactoredRational::constant(q(-1)), 1)?;
    compare(&mut dec, "box_3", &boxes[2], &odd_qinv.mul(&w(2, 1, 2)?).mul(&w(3, -1, 1)?));
    let odd_g = scalar(rk, &ratio(one.clone(), &[q(1)], &[q(-1)]), 1)?;
    compare(&mut dec, "box_4", &boxes[3], &odd_g.mul(&w(3, 1, 1)?));

    let mut dy = VerificationReport::new("example-gl22-bethe-scalars", rk, &[]);
    let ds = [
        rk.identity(),
        scalar(rk, &ratio(q(-1), &[q(1)], &[q(-1)]), 1)?,
        scalar(rk, &ratio(q(1), std::slice::from_ref(&one), &[q(2)]), 0)?,
    ];
    for (i, want) in ds.iter().enumerate() {
        compare(&mut dy, &format!("D_{}", i + 1), &d_module(rk, i + 1)?, want);
    }
    let ys = [FactoredRational::one(), ratio(one.clone(), &[q(1)], &[q(-1)]), ratio(one.clone(), &[q(-2)], &[q(2)])];
    for (i, want) in ys.iter().enumerate() {
        let got = y_factor(rk, i + 1)?;
        if &got != want {
            dy.fail(json!({"item": format!("y_{}", i + 1), "computed": got.to_string(), "expected": want.to_string()}));
        }
    }
    Ok(vec![table, wr, aw, dec, dy])
}

fn unit(rank: Rank, k: usize) -> WeightLatticeVector {
    let mut v = vec![0; rank.kappa()];
    v[k - 1] = 1;
    WeightLatticeVector::new(v)
}

/// gl(2|0): `box_1 + box_2` at `q²` and its `w`-ratio form.
pub fn example_gl20() -> Result<VerificationReport> {
    let rk = Rank::new(2, 0)?;
    let one = Monomial::one();
    let b1 = at(rk, &[1], &ratio(q(1), &[q(-3)], &[q(-1)]), 0)?;
    let b2 = at(rk, &[2], &ratio(q(1), &[q(-1)], &[q(1)]), 0)?;
    let mut rep = VerificationReport::new("example-gl20-tq", rk, &[]);
    compare(&mut rep, "box_1(q^2)", &rk.box_lw(1, &q(2))?, &b1);
    compare(&mut rep, "box_2(q^2)", &rk.box_lw(2, &q(2))?, &b2);
    compare_sum(&mut rep, "chi_q(W^(1)_{1,1})", &kr_qchar(rk, 1, 1, &one)?, &[b1.clone(), b2.clone()]);
    compare(&mut rep, "box_1 = w(q,q)", &b1, &w_ratio(rk, 1, &q(1), &q(1))?);
    let s = scalar(rk, &ratio(q(1), &[q(-1)], &[q(1)]), 0)?;
    compare(&mut rep, "box_2 = s·w(q^-1,q)", &b2, &s.mul(&w_ratio(rk, 1, &q(-1), &q(1))?));
    Ok(rep)
}

/// gl(1|1): `χ_q(X) = w_{q,q}/w_{1,q} (1 + odd (1−zq)/(q−z))`.
pub fn example_gl11() -> Result<VerificationReport> {
    let rk = Rank::new(1, 1)?;
    let one = Monomial::one();
    let b1 = at(rk, &[1], &ratio(q(1), &[q(-1)], &[q(1)]), 0)?;
    let b2 = at(rk, &[2], &ratio(q(-1), &[q(1)], &[q(-1)]), 1)?;
    let mut rep = VerificationReport::new("example-gl11-tq", rk, &[]);
    compare(&mut rep, "box_1(1)", &rk.box_lw(1, &one)?, &b1);
    compare(&mut rep, "box_2(1)", &rk.box_lw(2, &one)?, &b2);
    compare_sum(&mut rep, "chi_q(W^(1)_{1,1})", &kr_qchar(rk, 1, 1, &one)?, &[b1.clone(), b2.clone()]);
    let w = w_ratio(rk, 1, &q(1), &q(1))?;
    compare(&mut rep, "box_1 = w(q,q)", &b1, &w);
    let odd = scalar(rk, &ratio(q(-1), &[q(1)], &[q(-1)]), 1)?;
    compare(&mut rep, "box_2 = w(q,q)·odd", &b2, &w.mul(&odd));
    Ok(rep)
}

/// gl(2|3), `λ = 4ε_1+2ε_2+ε_3`: the transposed tableau and shape.
pub fn example_transpose_gl23() -> Result<VerificationReport> {
    let rk = Rank::new(2, 3)?;
    let lam = WeightLatticeVector::new(vec![4, 2, 1, 0, 0]);
    let d = Arc::new(build_diagram(rk, &lam, Sign::Minus)?);
    let t = Tableau::from_rows(d, &[vec![5, 4, 3, 1], vec![2, 2], vec![1]])?;
    let tp = transpose_tableau(&t)?;
    let sharp = transpose_shape(rk, &lam)?;
    let got = json!({"T": t.to_young(), "T'": tp.to_young(), "shape": sharp.coords});
    let ok = t.is_valid()
        && tp.is_valid()
        && t.to_young() == "(:::1,::22,1345)"
        && tp.to_young() == "(145,24,3,5)"
        && sharp == WeightLatticeVector::new(vec![3, 2, 1, 1, 0]);
    Ok(VerificationReport::new("example-gl23-transpose", rk, &[]).data("tableaux", got.clone()).check(ok, || got))
}

/// Every worked example, in a fixed order.
pub fn all_examples() -> Result<Vec<VerificationReport>> {
    let mut out = example_gl22()?;
    out.push(example_gl20()?);
    out.push(example_gl11()?);
    out.push(example_transpose_gl23()?);
    Ok(out)
}
