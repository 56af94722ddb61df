//! q-characters: finitely supported integer combinations of l-weights.
//!
//! Evaluation modules are summed over tableaux directly; nothing here uses a
//! closed character formula.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff_ring::Monomial;
use crate::error::{Error, Result};
use crate::lweights::{factor_into_simple_roots, varpi, LWeight, Rank, Weight, WeightLatticeVector};
use crate::tableaux::{enumerate_capped, Sign, DEFAULT_CAP};

/// Which of the four evaluation pullbacks to sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `V_q^+(λ;a)`: `box_T(aq^{2(j−i)+1})` over `𝓑_−(λ)`.
    Plus,
    /// `V_q^{+*}(λ;a)`: `box*_T(aq^{2(i−j)+1})` over `𝓑_−(λ)`.
    PlusStar,
    /// `V_q^-(λ;a)`: `box_T(aq^{2(j−i+M−N)+1})` over `𝓑_+(λ)`.
    Minus,
    /// `V_q^{-*}(λ;a)`: `box′_T(aq^{2(i−j)+1})` over `𝓑_+(λ)`.
    MinusStar,
}

impl Variant {
    pub fn tableau_sign(self) -> Sign {
        match self {
            Variant::Plus | Variant::PlusStar => Sign::Minus,
            Variant::Minus | Variant::MinusStar => Sign::Plus,
        }
    }

    /// Exponent of `q` in the spectral shift of the positively stored cell `(k, l)`.
    fn shift(self, rank: Rank, k: usize, l: usize) -> i32 {
        let (k, l) = (k as i32, l as i32);
        let (m, n) = (rank.m as i32, rank.n as i32);
        match self {
            // Signed cell (−k,−l): j − i = k − l.
            Variant::Plus => 2 * (k - l) + 1,
            Variant::PlusStar => 2 * (l - k) + 1,
            Variant::Minus => 2 * (l - k + m - n) + 1,
            Variant::MinusStar => 2 * (k - l) + 1,
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(Variant::Plus),
            "plus_star" | "plus-star" => Ok(Variant::PlusStar),
            "minus" => Ok(Variant::Minus),
            "minus_star" | "minus-star" => Ok(Variant::MinusStar),
            _ => Err(Error::Parse(format!("unknown variant `{s}`"))),
        }
    }
}

/// `Σ mult · f` over l-weights `f`.
#[derive(Clone, PartialEq, Eq)]
pub struct QChar {
    rank: Rank,
    terms: BTreeMap<LWeight, i64>,
}

/// Classical character: `Σ mult · p` over weights `p`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CharPoly {
    pub terms: BTreeMap<Weight, i64>,
}

impl QChar {
    pub fn zero(rank: Rank) -> Self {
        QChar {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(rank: Rank) -> Self {
        Self::from_lweight(rank.identity())
    }

    pub fn from_lweight(f: LWeight) -> Self {
        let mut q = Self::zero(f.rank());
        q.add_term(f, 1);
        q
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn terms(&self) -> &BTreeMap<LWeight, i64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, f: LWeight, k: i64) {
        if k == 0 {
            return;
        }
        let slot = self.terms.entry(f).or_insert(0);
        *slot += k;
        if *slot == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn add(&self, o: &QChar) -> QChar {
        let mut out = self.clone();
        for (f, &k) in &o.terms {
            out.add_term(f.clone(), k);
        }
        out
    }

    /// Sum of multiplicities; the dimension for module q-characters.
    pub fn dim(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn classical(&self) -> CharPoly {
        let mut terms = BTreeMap::new();
        for (f, &k) in &self.terms {
            *terms.entry(varpi(f)).or_insert(0) += k;
        }
        terms.retain(|_, v| *v != 0);
        CharPoly { terms }
    }

    pub fn is_multiplicity_free(&self) -> bool {
        self.terms.values().all(|&k| k == 1)
    }

    /// Every term multiplied by `g`.
    pub fn scale(&self, g: &LWeight) -> QChar {
        QChar {
            rank: self.rank,
            terms: self.terms.iter().map(|(f, &k)| (f.mul(g), k)).collect(),
        }
    }

    /// The unique term `h` with every other term in `h·ℓ𝒬^-`.
    pub fn highest_lweight(&self) -> Result<LWeight> {
        let mut cands: Vec<&LWeight> = self.terms.keys().collect();
        // `height` drops by one per A^{-1}; try the tallest first.
        cands.sort_by_key(|f| std::cmp::Reverse(height(f)));
        let mut found = None;
        for h in cands {
            let hinv = h.inv();
            let dominant = self.terms.keys().all(|t| {
                t == h
                    || factor_into_simple_roots(&t.mul(&hinv))
                        .is_some_and(|fs| !fs.is_empty() && fs.iter().all(|&(_, _, e)| e < 0))
            });
            if dominant {
                if found.is_some() {
                    return Err(Error::NoHighest);
                }
                found = Some(h.clone());
                // A second dominant term would have to dominate this one too,
                // which is impossible since ℓ𝒬^- has no units.
                break;
            }
        }
        found.ok_or(Error::NoHighest)
    }

    /// `h^{-1}·χ` for the highest l-weight `h`.
    pub fn normalize(&self) -> Result<QChar> {
        Ok(self.scale(&self.highest_lweight()?.inv()))
    }
}

/// `Σ_k (κ−k)·μ_k` for the weight `q^μ` of `f`, when the prefactors are pure
/// q-powers; each `A_{i,a}` contributes exactly one.
fn height(f: &LWeight) -> Option<i64> {
    let rank = f.rank();
    let mut h = 0i64;
    for (k, c) in f.comps().iter().enumerate() {
        let p = c.pref();
        if !p.is_one() && (p.symbols().any(|s| s != crate::coeff_ring::Q_HALF) || !p.coeff().is_integer()) {
            return None;
        }
        let half = i64::from(p.q_half_exp());
        let mu = i64::from(rank.sign(k + 1)) * half;
        h += (rank.kappa() - k - 1) as i64 * mu;
    }
    Some(h)
}

pub fn qc_mul(x: &QChar, y: &QChar) -> Result<QChar> {
    if x.rank != y.rank {
        return Err(Error::RankMismatch(x.rank.m, x.rank.n, y.rank.m, y.rank.n));
    }
    let mut out = QChar::zero(x.rank);
    for (f, &k) in &x.terms {
        for (g, &l) in &y.terms {
            out.add_term(f.mul(g), k * l);
        }
    }
    Ok(out)
}

/// q-character of the evaluation module of the given variant.
pub fn eval_qchar(
    rank: Rank,
    variant: Variant,
    lambda: &WeightLatticeVector,
    a: &Monomial,
) -> Result<QChar> {
    eval_qchar_capped(rank, variant, lambda, a, DEFAULT_CAP)
}

pub fn eval_qchar_capped(
    rank: Rank,
    variant: Variant,
    lambda: &WeightLatticeVector,
    a: &Monomial,
    cap: usize,
) -> Result<QChar> {
    let tabs = enumerate_capped(rank, lambda, variant.tableau_sign(), cap)?;
    let Some(first) = tabs.first() else {
        return Ok(QChar::zero(rank));
    };
    let cells = first.diagram().cells();
    // Box l-weights per (entry, shift), shared by every tableau of this call.
    let mut cache: HashMap<(u8, i32), LWeight> = HashMap::new();
    for &(k, l) in &cells {
        let s = variant.shift(rank, k, l);
        for j in 1..=rank.kappa() as u8 {
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry((j, s)) {
                let arg = a * &Monomial::q(s);
                let j = j as usize;
                let b = match variant {
                    Variant::Plus | Variant::Minus => rank.box_lw(j, &arg)?,
                    Variant::PlusStar => rank.box_star(j, &arg)?,
                    Variant::MinusStar => rank.box_prime(j, &arg)?,
                };
                e.insert(b);
            }
        }
    }
    let shifts: Vec<i32> = cells.iter().map(|&(k, l)| variant.shift(rank, k, l)).collect();
    let terms: Vec<LWeight> = tabs
        .par_iter()
        .map(|t| {
            let mut acc = rank.identity();
            for (&v, &s) in t.entries().iter().zip(&shifts) {
                acc = acc.mul(&cache[&(v, s)]);
            }
            acc
        })
        .collect();
    let mut out = QChar::zero(rank);
    for f in terms {
        out.add_term(f, 1);
    }
    Ok(out)
}

pub fn eval_plus(rank: Rank, lambda: &WeightLatticeVector, a: &Monomial) -> Result<QChar> {
    eval_qchar(rank, Variant::Plus, lambda, a)
}

pub fn eval_plus_star(rank: Rank, lambda: &WeightLatticeVector, a: &Monomial) -> Result<QChar> {
    eval_qchar(rank, Variant::PlusStar, lambda, a)
}

pub fn eval_minus(rank: Rank, lambda: &WeightLatticeVector, a: &Monomial) -> Result<QChar> {
    eval_qchar(rank, Variant::Minus, lambda, a)
}

pub fn eval_minus_star(rank: Rank, lambda: &WeightLatticeVector, a: &Monomial) -> Result<QChar> {
    eval_qchar(rank, Variant::MinusStar, lambda, a)
}

/// `λ ∈ 𝒫` whose diagram is a rectangle with `rows` rows and `cols` columns.
pub fn rectangle(rank: Rank, rows: usize, cols: usize) -> Result<WeightLatticeVector> {
    let mut c = vec![0i64; rank.kappa()];
    if rows <= rank.m {
        for x in c.iter_mut().take(rows) {
            *x = cols as i64;
        }
    } else {
        if cols > rank.n {
            return Err(Error::Precondition(format!(
                "a {rows}×{cols} rectangle is not a diagram of gl({}|{})",
                rank.m, rank.n
            )));
        }
        for x in c.iter_mut().take(rank.m) {
            *x = cols as i64;
        }
        for x in c[rank.m..].iter_mut().take(cols) {
            *x = (rows - rank.m) as i64;
        }
    }
    Ok(WeightLatticeVector::new(c))
}

/// KR module `W^{(i)}_{m,a}` through its evaluation realization.
pub fn kr_qchar(rank: Rank, i: usize, m: usize, a: &Monomial) -> Result<QChar> {
    kr_qchar_capped(rank, i, m, a, DEFAULT_CAP)
}

pub fn kr_qchar_capped(rank: Rank, i: usize, m: usize, a: &Monomial, cap: usize) -> Result<QChar> {
    rank.check_i0(i)?;
    let (mm, nn, ii) = (rank.m as i32, rank.n as i32, i as i32);
    if i <= rank.m {
        let lam = rank.fundamental(i)?.scaled(m as i64);
        eval_qchar_capped(rank, Variant::Plus, &lam, &(a * &Monomial::q(mm - nn - ii)), cap)
    } else {
        let lam = rectangle(rank, m, rank.kappa() - i)?;
        eval_qchar_capped(rank, Variant::MinusStar, &lam, &(a * &Monomial::q(mm + nn - 2 - ii)), cap)
    }
}

/// `W^{(M−)}_{m,a} ≅ V_q^{−*}(λ_m; aq^{N−2})`, `λ_m` an `m × N` rectangle.
pub fn kr_minus_qchar(rank: Rank, m: usize, a: &Monomial) -> Result<QChar> {
    let lam = rectangle(rank, m, rank.n)?;
    eval_qchar(rank, Variant::MinusStar, &lam, &(a * &Monomial::q(rank.n as i32 - 2)))
}

/// The second realization of `W^{(i)}_{m,a}`: `V_q^-(mϖ_i; aq^{N−M+i−2m})`
/// for `i ≤ M` (isomorphic), `V_q^{+*}(λ; aq^{i−M−N+2m−2})` otherwise
/// (isomorphic up to a one-dimensional twist).
pub fn kr_qchar_alternate(rank: Rank, i: usize, m: usize, a: &Monomial) -> Result<QChar> {
    rank.check_i0(i)?;
    let (mm, nn, ii, m2) = (rank.m as i32, rank.n as i32, i as i32, 2 * m as i32);
    if i <= rank.m {
        let lam = rank.fundamental(i)?.scaled(m as i64);
        eval_minus(rank, &lam, &(a * &Monomial::q(nn - mm + ii - m2)))
    } else {
        let lam = rectangle(rank, m, rank.kappa() - i)?;
        eval_plus_star(rank, &lam, &(a * &Monomial::q(ii - mm - nn + m2 - 2)))
    }
}

/// `kr_minus_qchar` carried onto the highest l-weight `ϖ^{(M−)}_{m,a}`; the
/// tableau sum alone matches it only up to a one-dimensional twist.
pub fn kr_minus_qchar_twisted(rank: Rank, m: usize, a: &Monomial) -> Result<QChar> {
    twist_to(&kr_minus_qchar(rank, m, a)?, &rank.kr_string_minus(m as i32, a)?)
}

/// Second realization of `W^{(M−)}_{m,a}`: `V_q^{+*}(λ_m; aq^{2m−2−N})`.
pub fn kr_minus_qchar_alternate(rank: Rank, m: usize, a: &Monomial) -> Result<QChar> {
    let lam = rectangle(rank, m, rank.n)?;
    eval_plus_star(rank, &lam, &(a * &Monomial::q(2 * m as i32 - 2 - rank.n as i32)))
}

/// Multiplies `x` by the scalar l-weight carrying its highest term to `target`.
/// Fails unless that ratio is one-dimensional (all components share factors).
pub fn twist_to(x: &QChar, target: &LWeight) -> Result<QChar> {
    let r = target.div(&x.highest_lweight()?);
    if !r.is_diagonal() {
        return Err(Error::Precondition("highest terms differ by more than a twist".into()));
    }
    Ok(x.scale(&r))
}

impl fmt::Display for QChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, &k)| if k == 1 { w.to_string() } else { format!("{k}·{w}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for QChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct QCharRepr {
    rank: Rank,
    terms: Vec<TermRepr>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    mult: i64,
    lweight: LWeight,
}

impl Serialize for QChar {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        QCharRepr {
            rank: self.rank,
            terms: self
                .terms
                .iter()
                .map(|(f, &k)| TermRepr {
                    mult: k,
                    lweight: f.clone(),
                })
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for QChar {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = QCharRepr::deserialize(de)?;
        let mut q = QChar::zero(r.rank);
        for t in r.terms {
            let f = t.lweight.with_rank(r.rank).map_err(serde::de::Error::custom)?;
            q.add_term(f, t.mult);
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableaux::{enumerate, shapes_up_to};
    use proptest::prelude::*;

    fn r(m: usize, n: usize) -> Rank {
        Rank::new(m, n).unwrap()
    }

    fn w(c: &[i64]) -> WeightLatticeVector {
        WeightLatticeVector::new(c.to_vec())
    }

    fn a() -> Monomial {
        Monomial::gen("a")
    }

    #[test]
    fn vector_module_of_gl22_is_the_box_sum() {
        let rk = r(2, 2);
        let one = Monomial::one();
        let mut expected = QChar::zero(rk);
        for j in 1..=4 {
            expected.add_term(rk.box_lw(j, &one).unwrap(), 1);
        }
        assert_eq!(kr_qchar(rk, 1, 1, &one).unwrap(), expected);
        assert_eq!(eval_plus(rk, &w(&[1, 0, 0, 0]), &Monomial::q(-1)).unwrap(), expected);
    }

    #[test]
    fn empty_shape_gives_the_unit() {
        for v in [Variant::Plus, Variant::PlusStar, Variant::Minus, Variant::MinusStar] {
            let q = eval_qchar(r(2, 1), v, &w(&[0, 0, 0]), &a()).unwrap();
            assert_eq!(q, QChar::one(r(2, 1)));
        }
    }

    #[test]
    fn term_counts_match_tableau_counts() {
        let rk = r(2, 1);
        let q = eval_minus(rk, &w(&[1, 0, 0]), &a()).unwrap();
        assert_eq!(q.len(), 3);
        assert_eq!(q.dim(), 3);
        assert_eq!(kr_qchar(rk, 1, 2, &a()).unwrap().dim(), 5);
    }

    #[test]
    fn multiplicity_free_on_small_shapes() {
        for (m, n) in [(2, 1), (2, 2)] {
            let rk = r(m, n);
            for lam in shapes_up_to(rk, 4) {
                for v in [Variant::Plus, Variant::PlusStar, Variant::Minus, Variant::MinusStar] {
                    let q = eval_qchar(rk, v, &lam, &a()).unwrap();
                    let count = enumerate(rk, &lam, v.tableau_sign()).unwrap().len();
                    assert!(q.is_multiplicity_free(), "gl({m}|{n}) {lam:?} {v:?}");
                    assert_eq!(q.len(), count);
                }
            }
        }
    }

    #[test]
    fn classical_character_forgets_the_spectral_parameter() {
        let rk = r(2, 1);
        let lam = w(&[2, 1, 1]);
        for v in [Variant::Plus, Variant::Minus, Variant::PlusStar, Variant::MinusStar] {
            let x = eval_qchar(rk, v, &lam, &a()).unwrap().classical();
            let y = eval_qchar(rk, v, &lam, &Monomial::q(3)).unwrap().classical();
            assert_eq!(x, y);
        }
        // Plus and minus sums carry the same classical character.
        assert_eq!(
            eval_plus(rk, &lam, &a()).unwrap().classical(),
            eval_minus(rk, &lam, &a()).unwrap().classical()
        );
    }

    #[test]
    fn kr_highest_terms_are_q_strings() {
        for (mm, nn) in [(2, 1), (2, 2), (1, 2)] {
            let rk = r(mm, nn);
            for i in 1..rk.kappa() {
                for m in 1..=2 {
                    let q = kr_qchar(rk, i, m, &a()).unwrap();
                    let expect = rk.kr_string(i, m as i32, &a()).unwrap();
                    assert_eq!(q.highest_lweight().unwrap(), expect, "gl({mm}|{nn}) i={i} m={m}");
                }
            }
            for m in 1..=2 {
                let q = kr_minus_qchar(rk, m, &a()).unwrap();
                let expect = rk.kr_string_minus(m as i32, &a()).unwrap();
                let h = q.highest_lweight().unwrap();
                assert!(crate::lweights::equivalent(&h, &expect));
                let t = kr_minus_qchar_twisted(rk, m, &a()).unwrap();
                assert_eq!(t.highest_lweight().unwrap(), expect);
                assert_eq!(t.dim(), q.dim());
            }
        }
    }

    #[test]
    fn alternate_realizations_agree() {
        for (mm, nn) in [(2, 1), (2, 2), (1, 1)] {
            let rk = r(mm, nn);
            for i in 1..rk.kappa() {
                for m in 1..=2 {
                    let x = kr_qchar(rk, i, m, &a()).unwrap();
                    let y = kr_qchar_alternate(rk, i, m, &a()).unwrap();
                    if i <= mm {
                        assert_eq!(x, y, "gl({mm}|{nn}) i={i} m={m}");
                    } else {
                        let h = x.highest_lweight().unwrap();
                        assert_eq!(twist_to(&y, &h).unwrap(), x, "gl({mm}|{nn}) i={i} m={m}");
                    }
                }
            }
            for m in 1..=2 {
                let x = kr_minus_qchar(rk, m, &a()).unwrap();
                let y = kr_minus_qchar_alternate(rk, m, &a()).unwrap();
                let h = x.highest_lweight().unwrap();
                assert_eq!(twist_to(&y, &h).unwrap(), x);
            }
        }
    }

    #[test]
    fn odd_node_kr_dimension_saturates() {
        for (mm, nn) in [(1, 1), (2, 1), (2, 2)] {
            let rk = r(mm, nn);
            for m in nn..=nn + 1 {
                let q = kr_qchar(rk, mm, m, &a()).unwrap();
                assert_eq!(q.dim(), 1 << (mm * nn), "gl({mm}|{nn}) m={m}");
            }
        }
        for m in 1..=4 {
            assert_eq!(kr_qchar(r(1, 1), 1, m, &a()).unwrap().len(), 2);
        }
    }

    #[test]
    fn single_term_and_normalization() {
        let rk = r(2, 2);
        let f = rk.psi(1, &a()).unwrap();
        let q = QChar::from_lweight(f.clone());
        assert_eq!(q.highest_lweight().unwrap(), f);
        let n = kr_qchar(rk, 1, 2, &a()).unwrap().normalize().unwrap();
        assert!(n.terms().contains_key(&rk.identity()));
    }

    #[test]
    fn no_highest_term_is_reported() {
        let rk = r(2, 1);
        let mut q = QChar::from_lweight(rk.psi(1, &a()).unwrap());
        q.add_term(rk.psi(2, &a()).unwrap(), 1);
        assert_eq!(q.highest_lweight().unwrap_err(), Error::NoHighest);
    }

    #[test]
    fn json_round_trip() {
        let q = kr_qchar(r(1, 1), 1, 1, &a()).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        let back: QChar = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
    }

    fn arb_qchar() -> impl Strategy<Value = QChar> {
        prop::collection::vec((1usize..3, 1usize..3, -2i32..3), 1..3).prop_map(|spec| {
            let rk = r(2, 1);
            let mut acc = QChar::zero(rk);
            for (i, m, s) in spec {
                let x = kr_qchar(rk, i, m, &(&a() * &Monomial::q(s))).unwrap();
                acc = acc.add(&x);
            }
            acc
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn product_is_commutative_and_associative(x in arb_qchar(), y in arb_qchar(), z in arb_qchar()) {
            prop_assert_eq!(qc_mul(&x, &y).unwrap(), qc_mul(&y, &x).unwrap());
            prop_assert_eq!(
                qc_mul(&qc_mul(&x, &y).unwrap(), &z).unwrap(),
                qc_mul(&x, &qc_mul(&y, &z).unwrap()).unwrap()
            );
            prop_assert_eq!(qc_mul(&x, &QChar::one(x.rank())).unwrap(), x.clone());
            prop_assert_eq!(qc_mul(&x, &y).unwrap().dim(), x.dim() * y.dim());
        }
    }
}
