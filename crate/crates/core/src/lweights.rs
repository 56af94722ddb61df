//! The group of l-weights in factored form, the weight projection, the
//! equivalence `≡`, and constructors for the named l-weights.
//!
//! Indices are 1-based throughout: `I = 1..=κ`, `I_0 = 1..κ`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff_ring::{symbol, Assignment, Monomial, Poly, Scalar};
use crate::error::{Error, Result};

/// The superalgebra gl(M|N). `M` even directions first, then `N` odd ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rank {
    pub m: usize,
    pub n: usize,
}

/// Named constants of the rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    /// `τ_i`, `i ∈ I_0`.
    Tau,
    /// `θ_j`, `j ∈ I`.
    Theta,
    /// `q_l = q^{(ε_l,ε_l)}`, `l ∈ I`.
    QL,
    /// `q_i` for a Dynkin node, `i ∈ I_0`.
    QI,
    /// `q̂_i`, equal to `q_i` except `q̂_M = q^{-1}`.
    QHat,
}

impl Rank {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m + n < 1 {
            return Err(Error::Precondition("M + N must be positive".into()));
        }
        Ok(Rank { m, n })
    }

    pub fn kappa(&self) -> usize {
        self.m + self.n
    }

    /// The rank with even and odd parts exchanged.
    pub fn flipped(&self) -> Rank {
        Rank {
            m: self.n,
            n: self.m,
        }
    }

    pub fn check_i(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.kappa() {
            return Err(Error::IndexOutOfRange {
                what: "index in I",
                index: j as i64,
                lo: 1,
                hi: self.kappa() as i64,
            });
        }
        Ok(())
    }

    pub fn check_i0(&self, i: usize) -> Result<()> {
        if i == 0 || i >= self.kappa() {
            return Err(Error::IndexOutOfRange {
                what: "Dynkin node",
                index: i as i64,
                lo: 1,
                hi: self.kappa() as i64 - 1,
            });
        }
        Ok(())
    }

    /// `|ε_l|`.
    pub fn parity(&self, l: usize) -> u8 {
        u8::from(l > self.m)
    }

    /// `(ε_l, ε_l)`.
    pub fn sign(&self, l: usize) -> i32 {
        if l > self.m {
            -1
        } else {
            1
        }
    }

    /// `(ε_k, ε_l)`.
    pub fn eps_pair(&self, k: usize, l: usize) -> i32 {
        if k == l {
            self.sign(k)
        } else {
            0
        }
    }

    /// `(α_i, α_j)` with `α_i = ε_i − ε_{i+1}`.
    pub fn alpha_pair(&self, i: usize, j: usize) -> i32 {
        self.eps_pair(i, j) - self.eps_pair(i, j + 1) - self.eps_pair(i + 1, j)
            + self.eps_pair(i + 1, j + 1)
    }

    pub fn q_l(&self, l: usize) -> Monomial {
        Monomial::q(self.sign(l))
    }

    /// `q_{ij} = q^{(α_i,α_j)}`.
    pub fn q_ij(&self, i: usize, j: usize) -> Monomial {
        Monomial::q(self.alpha_pair(i, j))
    }

    /// `x^{(α_i,α_j)}`, e.g. `c_{ij}`.
    pub fn pow_ij(&self, x: &Monomial, i: usize, j: usize) -> Monomial {
        x.pow(self.alpha_pair(i, j))
    }

    pub fn q_hat(&self, i: usize) -> Monomial {
        if i == self.m {
            Monomial::q(-1)
        } else {
            self.q_l(i)
        }
    }

    pub fn tau(&self, i: usize) -> Monomial {
        let (m, n) = (self.m as i32, self.n as i32);
        let i = i as i32;
        if i <= m {
            Monomial::q(m - n + 1 - i)
        } else {
            Monomial::q(i - m + 1 - n)
        }
    }

    pub fn theta(&self, j: usize) -> Monomial {
        let (m, n) = (self.m as i32, self.n as i32);
        let j = j as i32;
        if j <= m {
            Monomial::q(2 * (m - n + 1 - j))
        } else {
            Monomial::q(2 * (j - m - n))
        }
    }

    /// Dynkin neighbours `j ∼ i` inside `I_0`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut v = Vec::new();
        if i > 1 {
            v.push(i - 1);
        }
        if i + 1 < self.kappa() {
            v.push(i + 1);
        }
        v
    }

    pub fn identity(&self) -> LWeight {
        LWeight {
            rank: *self,
            parity: 0,
            comps: vec![FactoredRational::one(); self.kappa()],
        }
    }

    /// An l-weight from its components (1-based order) and parity.
    pub fn lweight(&self, comps: Vec<FactoredRational>, parity: u8) -> Result<LWeight> {
        if comps.len() != self.kappa() {
            return Err(Error::Precondition(format!(
                "expected {} components, got {}",
                self.kappa(),
                comps.len()
            )));
        }
        Ok(LWeight {
            rank: *self,
            parity: parity % 2,
            comps,
        })
    }

    /// The diagonal element `(h, …, h; even)`.
    pub fn scalar(&self, h: &FactoredRational) -> LWeight {
        LWeight {
            rank: *self,
            parity: 0,
            comps: vec![h.clone(); self.kappa()],
        }
    }

    fn with_comps(&self, parity: u8, f: impl Fn(usize) -> FactoredRational) -> LWeight {
        LWeight {
            rank: *self,
            parity: parity % 2,
            comps: (1..=self.kappa()).map(f).collect(),
        }
    }

    /// `q^λ` as a weight.
    pub fn q_pow(&self, lambda: &WeightLatticeVector) -> Result<Weight> {
        if lambda.coords.len() != self.kappa() {
            return Err(Error::Precondition("weight length differs from κ".into()));
        }
        let comps = lambda
            .coords
            .iter()
            .enumerate()
            .map(|(k, &c)| Monomial::q(self.sign(k + 1) * c as i32))
            .collect();
        let parity = (lambda.coords[self.m..].iter().sum::<i64>().rem_euclid(2)) as u8;
        Ok(Weight {
            parity,
            comps,
        })
    }

    /// `q^λ` as a constant l-weight.
    pub fn q_pow_lw(&self, lambda: &WeightLatticeVector) -> Result<LWeight> {
        Ok(self.q_pow(lambda)?.to_lweight(*self))
    }

    /// Fundamental weight `ϖ_i`.
    pub fn fundamental(&self, i: usize) -> Result<WeightLatticeVector> {
        self.check_i0(i)?;
        let coords = (1..=self.kappa())
            .map(|k| {
                if i <= self.m {
                    i64::from(k <= i)
                } else {
                    -i64::from(k > i)
                }
            })
            .collect();
        Ok(WeightLatticeVector { coords })
    }

    /// Prefundamental `Ψ_{i,a}`.
    pub fn psi(&self, i: usize, a: &Monomial) -> Result<LWeight> {
        self.check_i0(i)?;
        let key = a * &self.tau(i).inv();
        let m = self.m;
        Ok(self.with_comps(0, |k| {
            if i <= m && k <= i {
                FactoredRational::binom(&key, 1)
            } else if i > m && k > i {
                FactoredRational::binom(&key, -1)
            } else {
                FactoredRational::one()
            }
        }))
    }

    /// Constant l-weight `[c]_i`.
    pub fn bracket(&self, i: usize, c: &Monomial) -> Result<LWeight> {
        self.check_i0(i)?;
        let ci = c.inv();
        let m = self.m;
        Ok(self.with_comps(0, |k| {
            if i <= m && k <= i {
                FactoredRational::constant(c.clone())
            } else if i > m && k > i {
                FactoredRational::constant(ci.clone())
            } else {
                FactoredRational::one()
            }
        }))
    }

    /// `box_j(a)`.
    pub fn box_lw(&self, j: usize, a: &Monomial) -> Result<LWeight> {
        self.check_i(j)?;
        let qj = self.q_l(j);
        let base = a * &self.theta(j).inv();
        let comp = FactoredRational::from_parts(
            qj.clone(),
            [(&base * &qj.inv(), 1), (&base * &qj, -1)],
        );
        Ok(self.with_comps(self.parity(j), |k| {
            if k == j {
                comp.clone()
            } else {
                FactoredRational::one()
            }
        }))
    }

    /// Generalized simple root `A_{i,a}`.
    pub fn simple_root(&self, i: usize, a: &Monomial) -> Result<LWeight> {
        self.check_i0(i)?;
        let qi = self.q_l(i);
        let qn = self.q_l(i + 1);
        let u = &(a * &self.tau(i)) * &(&Monomial::q(-1) * &self.theta(i).inv());
        let pole = &u * &qi;
        let ci = FactoredRational::from_parts(qi.clone(), [(&u * &qi.inv(), 1), (pole.clone(), -1)]);
        let cn = FactoredRational::from_parts(
            qn.inv(),
            [(&pole * &qn.pow(2), 1), (pole.clone(), -1)],
        );
        let parity = (self.parity(i) + self.parity(i + 1)) % 2;
        Ok(self.with_comps(parity, |k| {
            if k == i {
                ci.clone()
            } else if k == i + 1 {
                cn.clone()
            } else {
                FactoredRational::one()
            }
        }))
    }

    /// `box*_j(a)` by the upward recursion from `box*_1(a) = box_1(aθ_1)^{-1}`.
    pub fn box_star(&self, j: usize, a: &Monomial) -> Result<LWeight> {
        self.check_i(j)?;
        let mut acc = self.box_lw(1, &(a * &self.theta(1)))?.inv();
        for i in 1..j {
            acc = acc.mul(&self.simple_root(i, &self.box_shift(i, a))?);
        }
        Ok(acc)
    }

    /// `box′_j(a)` by the downward recursion from `box′_κ(a) = box_κ(a)^{-1}`.
    pub fn box_prime(&self, j: usize, a: &Monomial) -> Result<LWeight> {
        self.check_i(j)?;
        let mut acc = self.box_lw(self.kappa(), a)?.inv();
        for i in (j..self.kappa()).rev() {
            acc = acc.mul(&self.simple_root(i, &self.box_shift(i, a))?.inv());
        }
        Ok(acc)
    }

    /// `aτ_iq^{-1}`, the root parameter linking boxes `i` and `i+1`.
    fn box_shift(&self, i: usize, a: &Monomial) -> Monomial {
        &(a * &self.tau(i)) * &Monomial::q(-1)
    }

    /// `Y_{i,a} = q^{ϖ_i} Ψ_{i,aq_i^{-1}} / Ψ_{i,aq_i}`.
    pub fn y(&self, i: usize, a: &Monomial) -> Result<LWeight> {
        self.kr_string(i, 1, a)
    }

    /// `ϖ^{(i)}_{m,a} = q^{mϖ_i} Ψ_{i,aq_i^{1−2m}} / Ψ_{i,aq_i}`.
    pub fn kr_string(&self, i: usize, m: i32, a: &Monomial) -> Result<LWeight> {
        self.check_i0(i)?;
        let qi = self.q_l(i);
        let w = self.fundamental(i)?.scaled(i64::from(m));
        let top = self.q_pow_lw(&w)?;
        Ok(top
            .mul(&self.psi(i, &(a * &qi.pow(1 - 2 * m)))?)
            .mul(&self.psi(i, &(a * &qi))?.inv()))
    }

    /// `ϖ^{(M−)}_{m,a} = ∏_{l=1}^m Y_{M,aq^{2l−2}}^{-1}`.
    pub fn kr_string_minus(&self, m: i32, a: &Monomial) -> Result<LWeight> {
        self.check_i0(self.m)?;
        let mut acc = self.identity();
        for l in 1..=m {
            acc = acc.mul(&self.y(self.m, &(a * &Monomial::q(2 * l - 2)))?.inv());
        }
        Ok(acc)
    }

    /// `𝔫⁺_{i,a} = Ψ_{i,aq_i^{-2}} / Ψ_{i,a} · ∏_{j∼i} Ψ_{j,aq_{ij}^{-1}}`.
    pub fn n_plus(&self, i: usize, a: &Monomial) -> Result<LWeight> {
        self.check_i0(i)?;
        let mut acc = self
            .psi(i, &(a * &self.q_l(i).pow(-2)))?
            .mul(&self.psi(i, a)?.inv());
        for j in self.neighbors(i) {
            acc = acc.mul(&self.psi(j, &(a * &self.q_ij(i, j).inv()))?);
        }
        Ok(acc)
    }

    /// `𝔫⁻_{i,a} = Ψ_{i,a} / Ψ_{i,aq̂_i²} · ∏_{j∼i} Ψ_{j,aq_{ij}}^{-1}`.
    pub fn n_minus(&self, i: usize, a: &Monomial) -> Result<LWeight> {
        self.check_i0(i)?;
        let mut acc = self
            .psi(i, a)?
            .mul(&self.psi(i, &(a * &self.q_hat(i).pow(2)))?.inv());
        for j in self.neighbors(i) {
            acc = acc.mul(&self.psi(j, &(a * &self.q_ij(i, j)))?.inv());
        }
        Ok(acc)
    }

    /// `aω^{(i)}_{c,a} = [c]_i Ψ_{i,ac^{-2}} / Ψ_{i,a}`.
    pub fn asym_omega(&self, i: usize, c: &Monomial, a: &Monomial) -> Result<LWeight> {
        Ok(self
            .bracket(i, c)?
            .mul(&self.psi(i, &(a * &c.pow(-2)))?)
            .mul(&self.psi(i, a)?.inv()))
    }

    /// `𝔫^{(i)}_{c,a} = aω^{(i)}_{q̂_i, aq̂_i²} ∏_{j∼i} aω^{(j)}_{c_{ij}^{-1}, aq_{ij}}`.
    pub fn n_asym(&self, i: usize, c: &Monomial, a: &Monomial) -> Result<LWeight> {
        let qh = self.q_hat(i);
        let mut acc = self.asym_omega(i, &qh, &(a * &qh.pow(2)))?;
        for j in self.neighbors(i) {
            let cij = self.pow_ij(c, i, j);
            acc = acc.mul(&self.asym_omega(j, &cij.inv(), &(a * &self.q_ij(i, j)))?);
        }
        Ok(acc)
    }

    /// `𝔪^{(i)}_{c,a} = aω^{(i)}_{q_i, a} ∏_{j∼i} aω^{(j)}_{c_{ij}^{-1}, aq_{ij}^{-1}c_{ij}^{-2}}`.
    pub fn m_asym(&self, i: usize, c: &Monomial, a: &Monomial) -> Result<LWeight> {
        let mut acc = self.asym_omega(i, &self.q_l(i), a)?;
        for j in self.neighbors(i) {
            let cij = self.pow_ij(c, i, j);
            let arg = &(a * &self.q_ij(i, j).inv()) * &cij.pow(-2);
            acc = acc.mul(&self.asym_omega(j, &cij.inv(), &arg)?);
        }
        Ok(acc)
    }

    /// Highest l-weight `𝔡^{(i,s)}_{m,a}` of the extended T-system modules.
    pub fn d_weight(&self, i: usize, s: i32, m: i32, a: &Monomial) -> Result<LWeight> {
        self.check_i0(i)?;
        if i != self.m {
            let qi = self.q_l(i);
            let mut acc = self
                .kr_string(i, m, &(a * &qi.pow(2 * m + 1)))?
                .mul(&self.kr_string(i, m + s, &(a * &qi.pow(2 * m - 1)))?);
            for l in 1..=m {
                acc = acc.mul(&self.simple_root(i, &(a * &qi.pow(2 * l)))?.inv());
            }
            Ok(acc)
        } else {
            let mut acc = self.kr_string(i, s, &(a * &Monomial::q(-1)))?;
            for j in self.neighbors(i) {
                acc = acc.mul(&self.kr_string(j, m, &(a * &self.q_l(j).pow(2 * m)))?);
            }
            Ok(acc)
        }
    }
}

/// Named l-weight families, dispatched by [`make_named`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Named {
    Psi { i: usize, a: Monomial },
    Bracket { i: usize, c: Monomial },
    Box { j: usize, a: Monomial },
    BoxStar { j: usize, a: Monomial },
    BoxPrime { j: usize, a: Monomial },
    SimpleRoot { i: usize, a: Monomial },
    Y { i: usize, a: Monomial },
    KrString { i: usize, m: i32, a: Monomial },
    KrStringMinus { m: i32, a: Monomial },
    NPlus { i: usize, a: Monomial },
    NMinus { i: usize, a: Monomial },
    AsymOmega { i: usize, c: Monomial, a: Monomial },
    NAsym { i: usize, c: Monomial, a: Monomial },
    MAsym { i: usize, c: Monomial, a: Monomial },
    D { i: usize, s: i32, m: i32, a: Monomial },
}

pub fn make_named(rank: Rank, kind: &Named) -> Result<LWeight> {
    match kind {
        Named::Psi { i, a } => rank.psi(*i, a),
        Named::Bracket { i, c } => rank.bracket(*i, c),
        Named::Box { j, a } => rank.box_lw(*j, a),
        Named::BoxStar { j, a } => rank.box_star(*j, a),
        Named::BoxPrime { j, a } => rank.box_prime(*j, a),
        Named::SimpleRoot { i, a } => rank.simple_root(*i, a),
        Named::Y { i, a } => rank.y(*i, a),
        Named::KrString { i, m, a } => rank.kr_string(*i, *m, a),
        Named::KrStringMinus { m, a } => rank.kr_string_minus(*m, a),
        Named::NPlus { i, a } => rank.n_plus(*i, a),
        Named::NMinus { i, a } => rank.n_minus(*i, a),
        Named::AsymOmega { i, c, a } => rank.asym_omega(*i, c, a),
        Named::NAsym { i, c, a } => rank.n_asym(*i, c, a),
        Named::MAsym { i, c, a } => rank.m_asym(*i, c, a),
        Named::D { i, s, m, a } => rank.d_weight(*i, *s, *m, a),
    }
}

/// Value of the named constant. `idx` ranges over `I` or `I_0` as appropriate.
pub fn constants(m: usize, n: usize, which: Constant, idx: usize) -> Result<Monomial> {
    let r = Rank::new(m, n)?;
    match which {
        Constant::Tau => {
            r.check_i0(idx)?;
            Ok(r.tau(idx))
        }
        Constant::Theta => {
            r.check_i(idx)?;
            Ok(r.theta(idx))
        }
        Constant::QL => {
            r.check_i(idx)?;
            Ok(r.q_l(idx))
        }
        Constant::QI => {
            r.check_i0(idx)?;
            Ok(r.q_l(idx))
        }
        Constant::QHat => {
            r.check_i0(idx)?;
            Ok(r.q_hat(idx))
        }
    }
}

/// `pref · ∏ (1 − z·m)^{e_m}` with eager cancellation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FactoredRational {
    pref: Monomial,
    #[serde(with = "factor_list")]
    factors: BTreeMap<Monomial, i32>,
}

mod factor_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<Monomial, i32>,
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let list: Vec<(&Monomial, &i32)> = map.iter().collect();
        list.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<BTreeMap<Monomial, i32>, D::Error> {
        let list: Vec<(Monomial, i32)> = Vec::deserialize(de)?;
        let mut map = BTreeMap::new();
        for (m, e) in list {
            if m.is_zero() {
                return Err(serde::de::Error::custom("factor key must be invertible"));
            }
            *map.entry(m).or_insert(0) += e;
        }
        map.retain(|_, e| *e != 0);
        Ok(map)
    }
}

impl FactoredRational {
    pub fn one() -> Self {
        Self::constant(Monomial::one())
    }

    pub fn constant(pref: Monomial) -> Self {
        FactoredRational {
            pref,
            factors: BTreeMap::new(),
        }
    }

    /// `(1 − z·m)^e`.
    pub fn binom(m: &Monomial, e: i32) -> Self {
        Self::from_parts(Monomial::one(), [(m.clone(), e)])
    }

    pub fn from_parts(pref: Monomial, factors: impl IntoIterator<Item = (Monomial, i32)>) -> Self {
        let mut f = Self::constant(pref);
        for (m, e) in factors {
            f.add_factor(m, e);
        }
        f
    }

    fn add_factor(&mut self, m: Monomial, e: i32) {
        if e == 0 {
            return;
        }
        let slot = self.factors.entry(m.clone()).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.factors.remove(&m);
        }
    }

    pub fn pref(&self) -> &Monomial {
        &self.pref
    }

    pub fn factors(&self) -> &BTreeMap<Monomial, i32> {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.pref.is_one() && self.factors.is_empty()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = FactoredRational {
            pref: &self.pref * &o.pref,
            factors: self.factors.clone(),
        };
        for (m, &e) in &o.factors {
            out.add_factor(m.clone(), e);
        }
        out
    }

    pub fn inv(&self) -> Self {
        FactoredRational {
            pref: self.pref.inv(),
            factors: self.factors.iter().map(|(m, &e)| (m.clone(), -e)).collect(),
        }
    }

    pub fn pow(&self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        FactoredRational {
            pref: self.pref.pow(n),
            factors: self.factors.iter().map(|(m, &e)| (m.clone(), e * n)).collect(),
        }
    }

    /// Expanded as an element of the fraction field in the formal variable `z`.
    pub fn to_scalar(&self, z: &Monomial) -> Scalar {
        let mut num = Poly::from_monomial(&self.pref);
        let mut den = Poly::one();
        for (m, &e) in &self.factors {
            let b = Poly::one().sub(&Poly::from_monomial(&(z * m)));
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    num = num.mul(&b);
                } else {
                    den = den.mul(&b);
                }
            }
        }
        Scalar::new(num, den).expect("factored denominators are nonzero")
    }

    /// Numeric value at `z` under `asg`.
    pub fn eval(&self, z: Complex64, asg: &Assignment) -> Result<Complex64> {
        let mut v = self.pref.eval(asg)?;
        for (m, &e) in &self.factors {
            let b = Complex64::new(1.0, 0.0) - z * m.eval(asg)?;
            if e < 0 && b.norm() < crate::coeff_ring::POLE_TOL {
                return Err(Error::Pole(b.norm()));
            }
            v *= b.powi(e);
        }
        Ok(v)
    }
}

impl fmt::Display for FactoredRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pref)?;
        for (m, e) in &self.factors {
            if *e == 1 {
                write!(f, "·(1 - z·{m})")?;
            } else {
                write!(f, "·(1 - z·{m})^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FactoredRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An element of the weight group `(C^×)^I × Z/2` with monomial components.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Weight {
    pub parity: u8,
    pub comps: Vec<Monomial>,
}

impl Weight {
    pub fn mul(&self, o: &Weight) -> Weight {
        Weight {
            parity: (self.parity + o.parity) % 2,
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn to_lweight(&self, rank: Rank) -> LWeight {
        LWeight {
            rank,
            parity: self.parity,
            comps: self
                .comps
                .iter()
                .map(|c| FactoredRational::constant(c.clone()))
                .collect(),
        }
    }
}

/// `λ = Σ λ_i ε_i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct WeightLatticeVector {
    pub coords: Vec<i64>,
}

impl WeightLatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        WeightLatticeVector { coords }
    }

    pub fn zero(kappa: usize) -> Self {
        WeightLatticeVector {
            coords: vec![0; kappa],
        }
    }

    pub fn scaled(&self, k: i64) -> Self {
        WeightLatticeVector {
            coords: self.coords.iter().map(|c| c * k).collect(),
        }
    }
}

/// Element of the l-weight group.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LWeight {
    #[serde(skip, default = "default_rank")]
    rank: Rank,
    pub(crate) parity: u8,
    pub(crate) comps: Vec<FactoredRational>,
}

fn default_rank() -> Rank {
    Rank { m: 0, n: 0 }
}

impl LWeight {
    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn comps(&self) -> &[FactoredRational] {
        &self.comps
    }

    /// Component `k` (1-based).
    pub fn comp(&self, k: usize) -> &FactoredRational {
        &self.comps[k - 1]
    }

    /// Restores the rank after deserialization, which does not carry it.
    pub fn with_rank(mut self, rank: Rank) -> Result<Self> {
        if self.comps.len() != rank.kappa() {
            return Err(Error::Precondition("component count differs from κ".into()));
        }
        self.rank = rank;
        Ok(self)
    }

    pub fn is_identity(&self) -> bool {
        self.parity == 0 && self.comps.iter().all(FactoredRational::is_one)
    }

    /// Product. Panics on mismatched ranks; see [`lw_mul`] for the checked form.
    pub fn mul(&self, o: &LWeight) -> LWeight {
        lw_mul(self, o).expect("l-weights of different ranks")
    }

    pub fn inv(&self) -> LWeight {
        lw_inv(self)
    }

    pub fn div(&self, o: &LWeight) -> LWeight {
        self.mul(&o.inv())
    }

    pub fn pow(&self, n: i32) -> LWeight {
        LWeight {
            rank: self.rank,
            parity: ((i64::from(self.parity) * i64::from(n)).rem_euclid(2)) as u8,
            comps: self.comps.iter().map(|c| c.pow(n)).collect(),
        }
    }

    /// True iff every component carries the same factor multiset, i.e. the
    /// one-dimensionality criterion (`f_i / f_{i+1}` constant for all `i`).
    pub fn is_diagonal(&self) -> bool {
        self.comps
            .windows(2)
            .all(|w| w[0].factors == w[1].factors)
    }

    /// Common factor multiset and per-component constants of a diagonal l-weight.
    pub fn diagonal_parts(&self) -> Option<(FactoredRational, Weight)> {
        if !self.is_diagonal() {
            return None;
        }
        let h = FactoredRational {
            pref: Monomial::one(),
            factors: self.comps[0].factors.clone(),
        };
        let w = Weight {
            parity: self.parity,
            comps: self.comps.iter().map(|c| c.pref.clone()).collect(),
        };
        Some((h, w))
    }
}

impl fmt::Display for LWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        let p = if self.parity == 0 { "even" } else { "odd" };
        write!(f, "({}; {p})", parts.join(", "))
    }
}

impl fmt::Debug for LWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn check_rank(f: &LWeight, g: &LWeight) -> Result<()> {
    if f.rank != g.rank {
        return Err(Error::RankMismatch(f.rank.m, f.rank.n, g.rank.m, g.rank.n));
    }
    Ok(())
}

pub fn lw_mul(f: &LWeight, g: &LWeight) -> Result<LWeight> {
    check_rank(f, g)?;
    Ok(LWeight {
        rank: f.rank,
        parity: (f.parity + g.parity) % 2,
        comps: f.comps.iter().zip(&g.comps).map(|(a, b)| a.mul(b)).collect(),
    })
}

pub fn lw_inv(f: &LWeight) -> LWeight {
    LWeight {
        rank: f.rank,
        parity: f.parity,
        comps: f.comps.iter().map(FactoredRational::inv).collect(),
    }
}

pub fn lw_eq(f: &LWeight, g: &LWeight) -> Result<bool> {
    check_rank(f, g)?;
    Ok(f == g)
}

/// Weight projection: the `z = 0` prefactors with the same parity.
pub fn varpi(f: &LWeight) -> Weight {
    Weight {
        parity: f.parity,
        comps: f.comps.iter().map(|c| c.pref.clone()).collect(),
    }
}

/// `f ≡ g`: every component of `f/g` has the same factor multiset.
pub fn equivalent(f: &LWeight, g: &LWeight) -> bool {
    match lw_mul(f, &g.inv()) {
        Ok(r) => r.is_diagonal(),
        Err(_) => false,
    }
}

/// Membership in the subgroup generated by the components `c(1 − zac^{-2})/(1 − za)`.
pub fn in_r_u(f: &LWeight) -> bool {
    f.comps.iter().all(|c| {
        let total: i32 = c.factors.values().sum();
        if total != 0 {
            return false;
        }
        let mut forced = c.pref.pow(2);
        for (m, &e) in &c.factors {
            forced = &forced * &m.pow(e);
        }
        forced.is_one()
    })
}

/// Exponents `(i, a, e)` with `n = ∏ A_{i,a}^e`, or `None` when `n` is outside
/// the lattice generated by the simple roots.
///
/// Component `i` only sees `A_{i-1,·}` and `A_{i,·}`; after dividing out the
/// roots of node `i-1`, the remaining factors of component `i` determine the
/// node-`i` exponents by a telescoping sum along each `q²`-chain.
pub fn factor_into_simple_roots(n: &LWeight) -> Option<Vec<(usize, Monomial, i32)>> {
    let rank = n.rank;
    let mut residual = n.clone();
    let mut out = Vec::new();
    for i in 1..rank.kappa() {
        let qi_sign = rank.sign(i);
        // Chains keyed by (non-q part, q-half exponent mod 4).
        let mut chains: BTreeMap<(Monomial, i32), BTreeMap<i32, i32>> = BTreeMap::new();
        for (m, &e) in &residual.comps[i - 1].factors {
            let (rest, k) = m.split_q();
            let class = k.rem_euclid(4);
            let pos = (k - class) / 4;
            chains
                .entry((rest, class))
                .or_default()
                .insert(pos, e);
        }
        let mut node: Vec<(Monomial, i32)> = Vec::new();
        for ((rest, class), f) in chains {
            let lo = *f.keys().next().unwrap();
            let hi = *f.keys().next_back().unwrap();
            let mut acc = 0;
            let positions: Vec<i32> = if qi_sign > 0 {
                (lo..=hi).collect()
            } else {
                (lo..=hi).rev().collect()
            };
            for p in positions {
                acc += f.get(&p).copied().unwrap_or(0);
                if acc != 0 {
                    // numerator key u = rest·q^{(4p+class)/2}
                    let u = &rest * &Monomial::q_half(4 * p + class);
                    node.push((u, acc));
                }
            }
            if acc != 0 {
                return None;
            }
        }
        for (u, e) in node {
            // u = a τ_i q^{-1} θ_i^{-1} q_i^{-1}
            let a = &(&u * &rank.q_l(i)) * &(&(&rank.tau(i).inv() * &Monomial::q(1)) * &rank.theta(i));
            let root = rank.simple_root(i, &a).ok()?;
            residual = residual.mul(&root.pow(-e));
            out.push((i, a, e));
        }
        if !residual.comps[i - 1].is_one() {
            return None;
        }
    }
    if !residual.is_identity() {
        return None;
    }
    out.sort();
    Some(out)
}

/// Name of the formal variable `z` used when expanding components.
pub fn z_symbol() -> Monomial {
    Monomial::var(symbol("z"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_ring::parse_monomial;
    use proptest::prelude::*;

    fn g(name: &str) -> Monomial {
        Monomial::gen(name)
    }

    fn q(k: i32) -> Monomial {
        Monomial::q(k)
    }

    fn r(m: usize, n: usize) -> Rank {
        Rank::new(m, n).unwrap()
    }

    /// Builds `(c0 + c1 z)/(d0 + d1 z)` from monomials, as the displays write them.
    fn ratio(c0: Monomial, c1: Monomial, d0: Monomial, d1: Monomial) -> Scalar {
        let z = z_symbol();
        let num = Poly::from_monomial(&c0).add(&Poly::from_monomial(&(&c1 * &z)));
        let den = Poly::from_monomial(&d0).add(&Poly::from_monomial(&(&d1 * &z)));
        Scalar::new(num, den).unwrap()
    }

    fn comp_scalar(f: &LWeight, k: usize) -> Scalar {
        f.comp(k).to_scalar(&z_symbol())
    }

    #[test]
    fn constants_match_definitions() {
        assert_eq!(constants(2, 3, Constant::Tau, 1).unwrap(), q(-1));
        assert_eq!(constants(2, 2, Constant::Theta, 1).unwrap(), q(0));
        assert_eq!(constants(2, 1, Constant::Theta, 1).unwrap(), q(2));
        assert_eq!(constants(3, 2, Constant::QL, 1).unwrap(), q(1));
        assert_eq!(constants(2, 2, Constant::QHat, 2).unwrap(), q(-1));
        assert!(constants(2, 2, Constant::Tau, 4).is_err());
        assert!(constants(2, 2, Constant::Theta, 5).is_err());
        let t = constants(2, 2, Constant::Tau, 1).unwrap();
        assert_eq!(&t * &t, constants(2, 2, Constant::Theta, 1).unwrap());
    }

    #[test]
    fn theta_relation_between_neighbours() {
        for (m, n) in [(1, 1), (2, 1), (2, 2), (3, 2), (2, 3), (2, 0)] {
            let rk = r(m, n);
            for i in 1..rk.kappa() {
                let rhs = &(&rk.theta(i) * &rk.q_l(i).inv()) * &rk.q_l(i + 1).inv();
                assert_eq!(rk.theta(i + 1), rhs, "gl({m}|{n}) i={i}");
            }
        }
    }

    #[test]
    fn q_pow_examples() {
        let w = r(1, 1).q_pow(&WeightLatticeVector::new(vec![0, 1])).unwrap();
        assert_eq!(w.comps, vec![q(0), q(-1)]);
        assert_eq!(w.parity, 1);
        let w = r(2, 0).q_pow(&WeightLatticeVector::new(vec![1, -1])).unwrap();
        assert_eq!(w.comps, vec![q(1), q(-1)]);
        assert_eq!(w.parity, 0);
        let w = r(2, 2).q_pow(&WeightLatticeVector::zero(4)).unwrap();
        assert!(w.to_lweight(r(2, 2)).is_identity());
    }

    #[test]
    fn boxes_of_gl22_at_one() {
        let rk = r(2, 2);
        let one = Monomial::one();
        let b1 = rk.box_lw(1, &one).unwrap();
        assert_eq!(b1.comp(1).pref(), &q(1));
        assert_eq!(
            comp_scalar(&b1, 1),
            ratio(q(1), -q(0), q(0), -q(1)),
        );
        assert_eq!(b1.parity(), 0);
        let b2 = rk.box_lw(2, &one).unwrap();
        assert_eq!(comp_scalar(&b2, 2), ratio(q(1), -q(2), q(0), -q(3)));
        let b3 = rk.box_lw(3, &one).unwrap();
        assert_eq!(comp_scalar(&b3, 3), ratio(q(0), -q(3), q(1), -q(2)));
        assert_eq!(b3.parity(), 1);
        let b4 = rk.box_lw(4, &one).unwrap();
        assert_eq!(comp_scalar(&b4, 4), ratio(q(0), -q(1), q(1), -q(0)));
        assert_eq!(b4.parity(), 1);
        for (bx, j) in [(&b1, 1), (&b2, 2), (&b3, 3), (&b4, 4)] {
            for k in 1..=4 {
                if k != j {
                    assert!(bx.comp(k).is_one());
                }
            }
            assert_eq!(varpi(bx).comps[j - 1], rk.q_l(j));
        }
    }

    #[test]
    fn simple_roots_of_gl22() {
        let rk = r(2, 2);
        let a = g("a");
        let a1 = rk.simple_root(1, &a).unwrap();
        assert_eq!(comp_scalar(&a1, 1), ratio(q(1), -(&a * &q(-1)), q(0), -a.clone()));
        assert_eq!(comp_scalar(&a1, 2), ratio(q(0), -(&a * &q(2)), q(1), -(&a * &q(1))));
        assert_eq!(a1.parity(), 0);
        let a2 = rk.simple_root(2, &a).unwrap();
        assert_eq!(comp_scalar(&a2, 2), ratio(q(1), -a.clone(), q(0), -(&a * &q(1))));
        assert_eq!(comp_scalar(&a2, 3), ratio(q(1), -a.clone(), q(0), -(&a * &q(1))));
        assert_eq!(a2.parity(), 1);
        let a3 = rk.simple_root(3, &a).unwrap();
        assert_eq!(comp_scalar(&a3, 3), ratio(q(0), -(&a * &q(2)), q(1), -(&a * &q(1))));
        assert_eq!(comp_scalar(&a3, 4), ratio(q(1), -(&a * &q(-1)), q(0), -a.clone()));
        assert_eq!(a3.parity(), 0);
    }

    #[test]
    fn asymptotic_weights_of_gl22() {
        let rk = r(2, 2);
        let (a, c) = (g("a"), g("c"));
        let w1 = rk.asym_omega(1, &c, &a).unwrap();
        assert_eq!(
            comp_scalar(&w1, 1),
            ratio(c.clone(), -(&a * &c.inv()), q(0), -a.clone())
        );
        let w2 = rk.asym_omega(2, &c, &a).unwrap();
        let e2 = ratio(c.clone(), -(&(&a * &q(1)) * &c.inv()), q(0), -(&a * &q(1)));
        assert_eq!(comp_scalar(&w2, 1), e2);
        assert_eq!(comp_scalar(&w2, 2), e2);
        let w3 = rk.asym_omega(3, &c, &a).unwrap();
        assert_eq!(
            comp_scalar(&w3, 4),
            ratio(q(0), -a.clone(), c.clone(), -(&a * &c.inv()))
        );
        for k in 1..=3 {
            assert!(w3.comp(k).is_one());
        }
    }

    #[test]
    fn simple_root_is_a_box_ratio() {
        for (m, n) in [(1, 1), (2, 1), (2, 2), (3, 2), (2, 3), (2, 0)] {
            let rk = r(m, n);
            let a = g("a");
            for i in 1..rk.kappa() {
                let b = &(&a * &rk.tau(i)) * &q(-1);
                let lhs = rk.simple_root(i, &a).unwrap();
                let rhs = rk.box_lw(i, &b).unwrap().div(&rk.box_lw(i + 1, &b).unwrap());
                assert_eq!(lhs, rhs, "gl({m}|{n}) i={i}");
            }
        }
    }

    #[test]
    fn box_chains_of_gl23() {
        let rk = r(2, 3);
        let a = g("a");
        let shifts = [2, 3, 2, 1];
        for (i, s) in (1..5).zip(shifts) {
            let next = rk
                .box_lw(i, &a)
                .unwrap()
                .mul(&rk.simple_root(i, &(&a * &q(s))).unwrap().inv());
            assert_eq!(next, rk.box_lw(i + 1, &a).unwrap());
            let next_star = rk
                .box_star(i, &a)
                .unwrap()
                .mul(&rk.simple_root(i, &(&a * &q(-s))).unwrap());
            assert_eq!(next_star, rk.box_star(i + 1, &a).unwrap());
        }
    }

    #[test]
    fn star_and_prime_boxes_differ_by_a_scalar() {
        for (m, n) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
            let rk = r(m, n);
            let a = g("a");
            let h = FactoredRational::from_parts(
                Monomial::one(),
                [(&a * &q(-3), 1), (&a * &q(1), 1), (&a * &q(-1), -2)],
            );
            for l in 1..=rk.kappa() {
                let lhs = rk.box_star(l, &a).unwrap();
                let rhs = rk.scalar(&h).mul(&rk.box_prime(l, &a).unwrap());
                assert_eq!(lhs, rhs, "gl({m}|{n}) l={l}");
            }
        }
    }

    #[test]
    fn group_identities() {
        let rk = r(2, 2);
        let a = g("a");
        let f = rk.psi(2, &a).unwrap();
        assert!(f.mul(&f.inv()).is_identity());
        let sq = f.mul(&f);
        assert_eq!(sq.comp(1).factors().values().copied().collect::<Vec<_>>(), vec![2]);
        let a1 = rk.simple_root(1, &a).unwrap();
        assert_eq!(a1.mul(&a1.inv()).mul(&f), f);
        assert!(lw_mul(&f, &r(2, 1).identity()).is_err());
    }

    #[test]
    fn projection_examples() {
        let rk = r(2, 2);
        let a = g("a");
        assert!(varpi(&rk.psi(1, &a).unwrap()).to_lweight(rk).is_identity());
        for i in 1..4 {
            for m in 1..3 {
                let w = varpi(&rk.kr_string(i, m, &a).unwrap());
                let expected = rk
                    .q_pow(&rk.fundamental(i).unwrap().scaled(i64::from(m)))
                    .unwrap();
                assert_eq!(w, expected);
            }
        }
    }

    #[test]
    fn equivalence_examples() {
        let rk = r(2, 2);
        let a = g("a");
        let p1 = rk.psi(1, &a).unwrap();
        let p2 = rk.psi(1, &(&a * &q(2))).unwrap();
        assert!(equivalent(&p1, &p1));
        assert!(!equivalent(&p1, &p2));
        let h = FactoredRational::binom(&g("b"), 3);
        assert!(equivalent(&p1.mul(&rk.scalar(&h)), &p1));
    }

    #[test]
    fn simple_root_psi_rewrite() {
        for (m, n) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
            let rk = r(m, n);
            let a = g("a");
            for i in 1..rk.kappa() {
                let qi = rk.q_l(i);
                let mut rhs = rk
                    .psi(i, &(&a * &qi.pow(-2)))
                    .unwrap()
                    .div(&rk.psi(i, &(&a * &rk.q_hat(i).pow(2))).unwrap());
                for j in rk.neighbors(i) {
                    let qij = rk.q_ij(i, j);
                    rhs = rhs
                        .mul(&rk.psi(j, &(&a * &qij.inv())).unwrap())
                        .div(&rk.psi(j, &(&a * &qij)).unwrap());
                }
                assert!(equivalent(&rk.simple_root(i, &a).unwrap(), &rhs), "gl({m}|{n}) i={i}");
            }
        }
    }

    #[test]
    fn d_weight_psi_rewrite() {
        for (m, n) in [(2, 2), (2, 1), (3, 1), (1, 1)] {
            let rk = r(m, n);
            let a = g("a");
            for i in 1..rk.kappa() {
                for mm in 1..=3 {
                    for s in 0..=3 {
                        let d = rk.d_weight(i, s, mm, &a).unwrap();
                        let qi = rk.q_l(i);
                        let mut rhs = rk
                            .psi(i, &(&a * &qi.pow(-2 * s)))
                            .unwrap()
                            .div(&rk.psi(i, &a).unwrap());
                        for j in rk.neighbors(i) {
                            let qij = rk.q_ij(i, j);
                            rhs = rhs
                                .mul(&rk.psi(j, &(&a * &qij.inv())).unwrap())
                                .div(&rk.psi(j, &(&a * &qij.pow(-2 * mm - 1))).unwrap());
                        }
                        assert!(equivalent(&d, &rhs), "gl({m}|{n}) i={i} m={mm} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn r_u_membership() {
        let rk = r(2, 2);
        let a = g("a");
        for j in 1..=4 {
            assert!(in_r_u(&rk.box_lw(j, &a).unwrap()));
        }
        assert!(!in_r_u(&rk.psi(1, &a).unwrap()));
        assert!(in_r_u(&rk.identity()));
        assert!(in_r_u(&rk.asym_omega(2, &g("c"), &a).unwrap()));
        let bad = rk.box_lw(1, &a).unwrap().mul(&rk.q_pow_lw(&WeightLatticeVector::new(vec![1, 0, 0, 0])).unwrap());
        assert!(!in_r_u(&bad));
    }

    #[test]
    fn simple_root_factorization_examples() {
        let rk = r(2, 2);
        let a = g("a");
        let f = factor_into_simple_roots(&rk.simple_root(1, &a).unwrap().inv()).unwrap();
        assert_eq!(f, vec![(1, a.clone(), -1)]);
        for i in 1..4 {
            let b = &(&a * &rk.tau(i)) * &q(-1);
            let n = rk.box_lw(i + 1, &b).unwrap().div(&rk.box_lw(i, &b).unwrap());
            assert_eq!(factor_into_simple_roots(&n).unwrap(), vec![(i, a.clone(), -1)]);
        }
        assert!(factor_into_simple_roots(&rk.psi(1, &a).unwrap()).is_none());
        assert_eq!(factor_into_simple_roots(&rk.identity()).unwrap(), vec![]);
    }

    #[test]
    fn json_round_trip() {
        let rk = r(2, 2);
        let f = rk.simple_root(2, &parse_monomial("a q^3").unwrap()).unwrap();
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["parity"], 1);
        assert!(v["comps"][1]["factors"].is_array());
        let back: LWeight = serde_json::from_value(v).unwrap();
        assert_eq!(back.with_rank(rk).unwrap(), f);
    }

    #[test]
    fn named_dispatch() {
        let rk = r(2, 1);
        let a = g("a");
        let named = Named::KrString { i: 1, m: 2, a: a.clone() };
        assert_eq!(make_named(rk, &named).unwrap(), rk.kr_string(1, 2, &a).unwrap());
        assert!(make_named(rk, &Named::Psi { i: 3, a }).is_err());
    }

    fn arb_root_word() -> impl Strategy<Value = Vec<(usize, i32, i32)>> {
        prop::collection::vec((1usize..5, -4i32..5, -2i32..3), 0..6)
    }

    proptest! {
        #[test]
        fn root_products_factor_back(word in arb_root_word()) {
            let rk = r(3, 2);
            let a = g("a");
            let mut n = rk.identity();
            let mut expected: BTreeMap<(usize, Monomial), i32> = BTreeMap::new();
            for (i, k, e) in word {
                let param = &a * &Monomial::q_half(k);
                n = n.mul(&rk.simple_root(i, &param).unwrap().pow(e));
                *expected.entry((i, param)).or_insert(0) += e;
            }
            expected.retain(|_, e| *e != 0);
            let got = factor_into_simple_roots(&n).unwrap();
            let got: BTreeMap<(usize, Monomial), i32> =
                got.into_iter().map(|(i, p, e)| ((i, p), e)).collect();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn lweight_group_axioms(xs in prop::collection::vec((1usize..4, -3i32..4, 0u8..4), 3)) {
            let rk = r(2, 2);
            let a = g("a");
            let build = |(i, k, kind): (usize, i32, u8)| {
                let p = &a * &Monomial::q(k);
                match kind {
                    0 => rk.psi(i, &p).unwrap(),
                    1 => rk.simple_root(i, &p).unwrap(),
                    2 => rk.box_lw(i, &p).unwrap(),
                    _ => rk.y(i, &p).unwrap(),
                }
            };
            let f = build(xs[0]);
            let gg = build(xs[1]);
            let h = build(xs[2]);
            prop_assert_eq!(f.mul(&gg).mul(&h), f.mul(&gg.mul(&h)));
            prop_assert_eq!(f.mul(&gg), gg.mul(&f));
            prop_assert!(f.mul(&f.inv()).is_identity());
            prop_assert!(equivalent(&f, &f));
            if equivalent(&f, &gg) && equivalent(&gg, &h) {
                prop_assert!(equivalent(&f, &h));
            }
            prop_assert_eq!(equivalent(&f, &gg), equivalent(&gg, &f));
        }
    }
}
