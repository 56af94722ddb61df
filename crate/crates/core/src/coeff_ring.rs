//! Exact coefficient ring `Q[q^{±1/2}, u_1^{±1}, …]` and its fraction field.
//!
//! Symbol 0 is `q^{1/2}`; q-exponents are stored as integer counts of `q^{1/2}`.
//! Further symbols are interned by name on first use and live for the process.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;
pub type Sym = u32;

/// The reserved symbol `q^{1/2}`.
pub const Q_HALF: Sym = 0;
/// Serialized name of [`Q_HALF`].
pub const Q_HALF_NAME: &str = "q½";

fn registry() -> &'static RwLock<Vec<String>> {
    static REG: OnceLock<RwLock<Vec<String>>> = OnceLock::new();
    REG.get_or_init(|| RwLock::new(vec![Q_HALF_NAME.to_string()]))
}

/// Interns `name` and returns its symbol id. `"q½"` always maps to [`Q_HALF`].
pub fn symbol(name: &str) -> Sym {
    if name == Q_HALF_NAME {
        return Q_HALF;
    }
    if let Some(s) = lookup_symbol(name) {
        return s;
    }
    let mut reg = registry().write().expect("symbol registry poisoned");
    if let Some(pos) = reg.iter().position(|n| n == name) {
        return pos as Sym;
    }
    reg.push(name.to_string());
    (reg.len() - 1) as Sym
}

pub fn lookup_symbol(name: &str) -> Option<Sym> {
    let reg = registry().read().expect("symbol registry poisoned");
    reg.iter().position(|n| n == name).map(|p| p as Sym)
}

pub fn symbol_name(s: Sym) -> String {
    let reg = registry().read().expect("symbol registry poisoned");
    reg.get(s as usize)
        .cloned()
        .unwrap_or_else(|| format!("#{s}"))
}

pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// Sparse exponent vector: sorted by symbol, no zero entries.
pub type Exps = Vec<(Sym, i32)>;

fn merge_exps(x: &Exps, y: &Exps, sign: i32) -> Exps {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j == y.len() || (i < x.len() && x[i].0 < y[j].0) {
            out.push(x[i]);
            i += 1;
        } else if i == x.len() || y[j].0 < x[i].0 {
            out.push((y[j].0, sign * y[j].1));
            j += 1;
        } else {
            let e = x[i].1 + sign * y[j].1;
            if e != 0 {
                out.push((x[i].0, e));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// `coeff · ∏ sym^exp`. Canonical: zero has empty exponents, no stored exponent is zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    coeff: Rational,
    exps: Exps,
}

impl Monomial {
    pub fn new(coeff: Rational, exps: impl IntoIterator<Item = (Sym, i32)>) -> Self {
        if coeff.is_zero() {
            return Self::zero();
        }
        let mut map: BTreeMap<Sym, i32> = BTreeMap::new();
        for (s, e) in exps {
            *map.entry(s).or_insert(0) += e;
        }
        let exps = map.into_iter().filter(|&(_, e)| e != 0).collect();
        Monomial { coeff, exps }
    }

    pub fn one() -> Self {
        Monomial {
            coeff: Rational::one(),
            exps: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Monomial {
            coeff: Rational::zero(),
            exps: Vec::new(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(c, [])
    }

    pub fn int(c: i128) -> Self {
        Self::constant(Rational::from_integer(c))
    }

    pub fn var(s: Sym) -> Self {
        Self::new(Rational::one(), [(s, 1)])
    }

    /// The generator named `name`, interning it if needed.
    pub fn gen(name: &str) -> Self {
        Self::var(symbol(name))
    }

    /// `q^{k/2}`.
    pub fn q_half(k: i32) -> Self {
        Self::new(Rational::one(), [(Q_HALF, k)])
    }

    /// `q^k`.
    pub fn q(k: i32) -> Self {
        Self::q_half(2 * k)
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn exps(&self) -> &Exps {
        &self.exps
    }

    pub fn exp(&self, s: Sym) -> i32 {
        self.exps
            .binary_search_by_key(&s, |&(t, _)| t)
            .map(|i| self.exps[i].1)
            .unwrap_or(0)
    }

    /// Exponent of `q^{1/2}`.
    pub fn q_half_exp(&self) -> i32 {
        self.exp(Q_HALF)
    }

    /// Splits off the q-power: `self = rest · q^{k/2}`.
    pub fn split_q(&self) -> (Monomial, i32) {
        let k = self.q_half_exp();
        let rest = Monomial {
            coeff: self.coeff,
            exps: self.exps.iter().copied().filter(|&(s, _)| s != Q_HALF).collect(),
        };
        (rest, k)
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.coeff.is_one() && self.exps.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn try_inv(&self) -> Result<Monomial> {
        if self.is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(Monomial {
            coeff: self.coeff.recip(),
            exps: self.exps.iter().map(|&(s, e)| (s, -e)).collect(),
        })
    }

    /// Inverse of a nonzero monomial. Panics on zero.
    pub fn inv(&self) -> Monomial {
        self.try_inv().expect("inverse of the zero monomial")
    }

    pub fn pow(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::one();
        }
        let base = if n < 0 { self.inv() } else { self.clone() };
        let k = n.unsigned_abs();
        let mut coeff = Rational::one();
        for _ in 0..k {
            coeff *= base.coeff;
        }
        Monomial {
            coeff,
            exps: base.exps.iter().map(|&(s, e)| (s, e * k as i32)).collect(),
        }
    }

    /// Same exponents with coefficient one.
    pub fn monic(&self) -> Monomial {
        Monomial {
            coeff: Rational::one(),
            exps: self.exps.clone(),
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> + '_ {
        self.exps.iter().map(|&(s, _)| s)
    }

    pub fn eval(&self, asg: &Assignment) -> Result<Complex64> {
        let mut v = Complex64::new(rat_to_f64(&self.coeff), 0.0);
        for &(s, e) in &self.exps {
            v *= asg.get(s)?.powi(e);
        }
        Ok(v)
    }
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Exponent addition and coefficient product.
pub fn monomial_mul(x: &Monomial, y: &Monomial) -> Monomial {
    if x.is_zero() || y.is_zero() {
        return Monomial::zero();
    }
    Monomial {
        coeff: x.coeff * y.coeff,
        exps: merge_exps(&x.exps, &y.exps, 1),
    }
}

impl std::ops::Mul for &Monomial {
    type Output = Monomial;
    fn mul(self, rhs: &Monomial) -> Monomial {
        monomial_mul(self, rhs)
    }
}

impl std::ops::Mul for Monomial {
    type Output = Monomial;
    fn mul(self, rhs: Monomial) -> Monomial {
        monomial_mul(&self, &rhs)
    }
}

impl std::ops::Div for &Monomial {
    type Output = Monomial;
    fn div(self, rhs: &Monomial) -> Monomial {
        monomial_mul(self, &rhs.inv())
    }
}

impl std::ops::Div for Monomial {
    type Output = Monomial;
    fn div(self, rhs: Monomial) -> Monomial {
        monomial_mul(&self, &rhs.inv())
    }
}

impl std::ops::Neg for Monomial {
    type Output = Monomial;
    fn neg(self) -> Monomial {
        Monomial {
            coeff: -self.coeff,
            exps: self.exps,
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = Vec::new();
        let c = self.coeff;
        let unit = c.abs().is_one();
        if !unit || self.exps.is_empty() {
            parts.push(format!("{}", c.abs()));
        }
        for &(s, e) in &self.exps {
            let mut buf = String::new();
            if s == Q_HALF {
                if e % 2 == 0 {
                    let k = e / 2;
                    buf = if k == 1 { "q".into() } else { format!("q^{k}") };
                } else {
                    buf = format!("q^({e}/2)");
                }
            } else {
                use std::fmt::Write;
                let name = symbol_name(s);
                let _ = if e == 1 {
                    write!(buf, "{name}")
                } else {
                    write!(buf, "{name}^{e}")
                };
            }
            parts.push(buf);
        }
        if c.is_negative() {
            write!(f, "-")?;
        }
        write!(f, "{}", parts.join("·"))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct MonomialRepr {
    coeff: String,
    exps: BTreeMap<String, i32>,
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = MonomialRepr {
            coeff: format!("{}/{}", self.coeff.numer(), self.coeff.denom()),
            exps: self
                .exps
                .iter()
                .map(|&(s, e)| (symbol_name(s), e))
                .collect(),
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = MonomialRepr::deserialize(de)?;
        let coeff = parse_rational(&repr.coeff).map_err(serde::de::Error::custom)?;
        Ok(Monomial::new(
            coeff,
            repr.exps.iter().map(|(n, &e)| (symbol(n), e)),
        ))
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Parses products such as `a*q^3`, `q^(-1/2)·c^2`, `-2/3 a`, `1`.
/// The name `q` denotes `q^1`; exponents of `q` may be halves.
pub fn parse_monomial(text: &str) -> Result<Monomial> {
    let cleaned = text.replace(['·', '*'], " ");
    let mut coeff = Rational::one();
    let mut exps: Vec<(Sym, i32)> = Vec::new();
    let mut toks = cleaned.split_whitespace().peekable();
    if toks.peek().is_none() {
        return Err(Error::Parse("empty monomial".into()));
    }
    for tok in toks {
        let (tok, neg) = match tok.strip_prefix('-') {
            Some(t) => (t, true),
            None => (tok, false),
        };
        if neg {
            coeff = -coeff;
        }
        if tok.is_empty() {
            continue;
        }
        if tok.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            coeff *= parse_rational(tok)?;
            continue;
        }
        let (name, exp) = match tok.split_once('^') {
            Some((n, e)) => (n, e.trim_matches(|c| c == '(' || c == ')')),
            None => (tok, "1"),
        };
        let e = parse_rational(exp)?;
        if name == "q" {
            let twice = e * Rational::from_integer(2);
            if !twice.is_integer() {
                return Err(Error::Parse(format!("q-exponent {e} is not a half-integer")));
            }
            exps.push((Q_HALF, twice.to_integer() as i32));
        } else {
            if !e.is_integer() {
                return Err(Error::Parse(format!("exponent of `{name}` must be an integer")));
            }
            if !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '½') {
                return Err(Error::Parse(format!("bad symbol name `{name}`")));
            }
            exps.push((symbol(name), e.to_integer() as i32));
        }
    }
    Ok(Monomial::new(coeff, exps))
}

/// Numeric values for symbols.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    values: HashMap<Sym, Complex64>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assignment with `q^{1/2} ↦ sqrt(q)` (principal branch).
    pub fn with_q(q: Complex64) -> Self {
        let mut a = Self::new();
        a.set(Q_HALF, q.sqrt());
        a
    }

    pub fn set(&mut self, s: Sym, v: Complex64) -> &mut Self {
        self.values.insert(s, v);
        self
    }

    pub fn set_named(&mut self, name: &str, v: Complex64) -> &mut Self {
        self.set(symbol(name), v)
    }

    pub fn get(&self, s: Sym) -> Result<Complex64> {
        self.values
            .get(&s)
            .copied()
            .ok_or_else(|| Error::MissingSymbol(symbol_name(s)))
    }
}

/// Tolerance below which a denominator counts as a pole.
pub const POLE_TOL: f64 = 1e-14;

/// Laurent polynomial with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Exps, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_monomial(&Monomial::one())
    }

    pub fn from_monomial(m: &Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m.exps.clone(), m.coeff);
        p
    }

    pub fn from_monomials<'a>(ms: impl IntoIterator<Item = &'a Monomial>) -> Self {
        let mut p = Self::zero();
        for m in ms {
            p.add_term(m.exps.clone(), m.coeff);
        }
        p
    }

    fn add_term(&mut self, e: Exps, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms
            .iter()
            .map(|(e, c)| Monomial {
                coeff: *c,
                exps: e.clone(),
            })
            .collect()
    }

    pub fn symbols(&self) -> BTreeSet<Sym> {
        self.terms
            .keys()
            .flat_map(|e| e.iter().map(|&(s, _)| s))
            .collect()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -*c)).collect(),
        }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                p.add_term(merge_exps(e1, e2, 1), *c1 * *c2);
            }
        }
        p
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        if m.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (merge_exps(e, &m.exps, 1), *c * m.coeff))
                .collect(),
        }
    }

    pub fn eval(&self, asg: &Assignment) -> Result<Complex64> {
        let mut acc = Complex64::zero();
        for m in self.monomials() {
            acc += m.eval(asg)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let ms = self.monomials();
        for (i, m) in ms.iter().enumerate() {
            let s = m.to_string();
            if i == 0 {
                write!(f, "{s}")?;
            } else if let Some(rest) = s.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {s}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Dense polynomial with non-negative exponents over a fixed variable list.
/// Keys list exponents from the most significant variable down, so the
/// largest key is the lex-leading term.
mod dense {
    use super::*;
    use num_bigint::BigInt;
    use num_integer::Integer;

    pub type Coef = num_rational::BigRational;

    pub fn big(c: &Rational) -> Coef {
        Coef::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()))
    }

    /// Back to machine rationals; reduced results of small inputs fit.
    pub fn small(c: &Coef) -> Rational {
        let n = c.numer().to_i128().expect("coefficient exceeds i128");
        let d = c.denom().to_i128().expect("coefficient exceeds i128");
        Rational::new(n, d)
    }

    #[derive(Clone, PartialEq, Debug)]
    pub struct DPoly {
        pub n: usize,
        pub terms: BTreeMap<Vec<u32>, Coef>,
    }

    impl DPoly {
        pub fn zero(n: usize) -> Self {
            DPoly {
                n,
                terms: BTreeMap::new(),
            }
        }

        pub fn constant(n: usize, c: Coef) -> Self {
            let mut p = Self::zero(n);
            if !c.is_zero() {
                p.terms.insert(vec![0; n], c);
            }
            p
        }

        pub fn is_zero(&self) -> bool {
            self.terms.is_empty()
        }

        fn add_term(&mut self, e: Vec<u32>, c: Coef) {
            if c.is_zero() {
                return;
            }
            let slot = self.terms.entry(e.clone()).or_insert_with(Coef::zero);
            *slot += c;
            if slot.is_zero() {
                self.terms.remove(&e);
            }
        }

        pub fn sub(&self, o: &DPoly) -> DPoly {
            let mut p = self.clone();
            for (e, c) in &o.terms {
                p.add_term(e.clone(), -c.clone());
            }
            p
        }

        pub fn mul(&self, o: &DPoly) -> DPoly {
            let mut p = DPoly::zero(self.n);
            for (e1, c1) in &self.terms {
                for (e2, c2) in &o.terms {
                    let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                    p.add_term(e, c1 * c2);
                }
            }
            p
        }

        pub fn scale(&self, c: Coef) -> DPoly {
            if c.is_zero() {
                return DPoly::zero(self.n);
            }
            DPoly {
                n: self.n,
                terms: self.terms.iter().map(|(e, v)| (e.clone(), v * &c)).collect(),
            }
        }

        fn lead(&self) -> Option<(&Vec<u32>, &Coef)> {
            self.terms.iter().next_back()
        }

        /// Exact quotient in lex order; `None` when `d` does not divide `self`.
        pub fn div_exact(&self, d: &DPoly) -> Option<DPoly> {
            let (de, dc) = d.lead()?;
            let mut r = self.clone();
            let mut q = DPoly::zero(self.n);
            while let Some((re, rc)) = r.lead() {
                if re.iter().zip(de).any(|(a, b)| a < b) {
                    return None;
                }
                let te: Vec<u32> = re.iter().zip(de).map(|(a, b)| a - b).collect();
                let tc = rc / dc;
                let mut t = DPoly::zero(self.n);
                t.terms.insert(te, tc.clone());
                r = r.sub(&t.mul(d));
                q.add_term(t.terms.keys().next().unwrap().clone(), tc);
            }
            Some(q)
        }

        /// Highest variable slot (0 = most significant) that occurs.
        pub fn main_var(&self) -> Option<usize> {
            (0..self.n).find(|&v| self.terms.keys().any(|e| e[v] > 0))
        }

        pub fn degree_in(&self, v: usize) -> u32 {
            self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
        }

        /// Coefficients with respect to variable slot `v`, keyed by degree.
        pub fn coeffs_in(&self, v: usize) -> BTreeMap<u32, DPoly> {
            let mut out: BTreeMap<u32, DPoly> = BTreeMap::new();
            for (e, c) in &self.terms {
                let mut e2 = e.clone();
                let d = e2[v];
                e2[v] = 0;
                out.entry(d)
                    .or_insert_with(|| DPoly::zero(self.n))
                    .add_term(e2, c.clone());
            }
            out
        }

        fn shift(&self, v: usize, k: u32) -> DPoly {
            DPoly {
                n: self.n,
                terms: self
                    .terms
                    .iter()
                    .map(|(e, c)| {
                        let mut e2 = e.clone();
                        e2[v] += k;
                        (e2, c.clone())
                    })
                    .collect(),
            }
        }

        /// Scales so the leading coefficient is one.
        pub fn monic(&self) -> DPoly {
            match self.lead() {
                Some((_, c)) => self.scale(c.recip()),
                None => self.clone(),
            }
        }

        fn content_in(&self, v: usize) -> DPoly {
            let mut g = DPoly::zero(self.n);
            for c in self.coeffs_in(v).values() {
                g = gcd(&g, c);
                if g.terms.len() == 1 && g.terms.keys().next().unwrap().iter().all(|&x| x == 0) {
                    break;
                }
            }
            g
        }

        fn primitive_in(&self, v: usize) -> DPoly {
            let c = self.content_in(v);
            self.div_exact(&c).expect("content divides").int_primitive()
        }

        /// Rescales to coprime integer coefficients, keeping intermediate
        /// remainders small.
        fn int_primitive(&self) -> DPoly {
            let mut num = BigInt::zero();
            let mut den = BigInt::one();
            for c in self.terms.values() {
                num = num.gcd(c.numer());
                den = den.lcm(c.denom());
            }
            if num.is_zero() {
                return self.clone();
            }
            self.scale(Coef::new(den, num))
        }

        fn prem_in(&self, b: &DPoly, v: usize) -> DPoly {
            let db = b.degree_in(v);
            let lb = b.coeffs_in(v).remove(&db).expect("leading coefficient");
            let mut r = self.clone();
            while !r.is_zero() {
                let dr = r.degree_in(v);
                if dr < db {
                    break;
                }
                let lr = r.coeffs_in(v).remove(&dr).expect("leading coefficient");
                r = lb.mul(&r).sub(&lr.mul(&b.shift(v, dr - db))).int_primitive();
            }
            r
        }
    }

    /// Univariate images modulo a prime, used to bound gcd degrees cheaply.
    mod modular {
        use super::{Coef, DPoly};
        use num_traits::ToPrimitive;

        const P: u64 = (1 << 61) - 1;

        fn mul(a: u64, b: u64) -> u64 {
            ((a as u128 * b as u128) % P as u128) as u64
        }

        fn pow(mut a: u64, mut e: u64) -> u64 {
            let mut r = 1;
            while e > 0 {
                if e & 1 == 1 {
                    r = mul(r, a);
                }
                a = mul(a, a);
                e >>= 1;
            }
            r
        }

        fn inv(a: u64) -> u64 {
            pow(a, P - 2)
        }

        fn reduce(c: &Coef) -> Option<u64> {
            let p = num_bigint::BigInt::from(P);
            let n = ((c.numer() % &p) + &p) % &p;
            let d = ((c.denom() % &p) + &p) % &p;
            let d = d.to_u64()?;
            if d == 0 {
                return None;
            }
            Some(mul(n.to_u64()?, inv(d)))
        }

        /// Fixed pseudo-random evaluation point for slot `k`.
        fn point(k: usize) -> u64 {
            let mut x = 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k as u64 + 1);
            x ^= x >> 29;
            x % (P - 2) + 2
        }

        /// Dense univariate image in slot `v`, highest degree last.
        fn image(a: &DPoly, v: usize) -> Option<Vec<u64>> {
            let mut out = vec![0u64; a.degree_in(v) as usize + 1];
            for (e, c) in &a.terms {
                let mut t = reduce(c)?;
                for (k, &x) in e.iter().enumerate() {
                    if k != v {
                        t = mul(t, pow(point(k), x as u64));
                    }
                }
                let slot = &mut out[e[v] as usize];
                *slot = (*slot + t) % P;
            }
            Some(out)
        }

        fn trim(p: &mut Vec<u64>) {
            while p.len() > 1 && *p.last().unwrap() == 0 {
                p.pop();
            }
        }

        /// Degree of the gcd of the images; an upper bound for the true
        /// gcd degree in slot `v`. `None` when a leading coefficient vanishes.
        pub fn image_gcd_degree(a: &DPoly, b: &DPoly, v: usize) -> Option<usize> {
            let mut x = image(a, v)?;
            let mut y = image(b, v)?;
            if *x.last()? == 0 || *y.last()? == 0 {
                return None;
            }
            while !(y.len() == 1 && y[0] == 0) {
                trim(&mut x);
                trim(&mut y);
                if y.len() == 1 && y[0] == 0 {
                    break;
                }
                // x <- x mod y
                let lc = inv(*y.last().unwrap());
                while x.len() >= y.len() && !(x.len() == 1 && x[0] == 0) {
                    let f = mul(*x.last().unwrap(), lc);
                    let shift = x.len() - y.len();
                    for (i, &c) in y.iter().enumerate() {
                        x[i + shift] = (x[i + shift] + P - mul(f, c)) % P;
                    }
                    x.pop();
                    if x.is_empty() {
                        x.push(0);
                    }
                    trim(&mut x);
                }
                std::mem::swap(&mut x, &mut y);
            }
            trim(&mut x);
            Some(x.len() - 1)
        }
    }

    /// Gcd when one side is a single term: the common monomial part.
    fn monomial_gcd(a: &DPoly, b: &DPoly) -> DPoly {
        let mut lo: Option<Vec<u32>> = None;
        for e in a.terms.keys().chain(b.terms.keys()) {
            lo = Some(match lo {
                None => e.clone(),
                Some(l) => l.iter().zip(e).map(|(x, y)| *x.min(y)).collect(),
            });
        }
        let mut g = DPoly::zero(a.n);
        g.terms.insert(lo.expect("nonzero inputs"), Coef::one());
        g
    }

    /// Monic greatest common divisor.
    pub fn gcd(a: &DPoly, b: &DPoly) -> DPoly {
        let n = a.n;
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.terms.len() == 1 || b.terms.len() == 1 {
            return monomial_gcd(a, b);
        }
        for w in 0..n {
            if a.degree_in(w) > 0 && b.degree_in(w) > 0 && modular::image_gcd_degree(a, b, w) == Some(0) {
                return gcd(&a.content_in(w), &b.content_in(w));
            }
        }
        // Main variable: occurring in both, lowest combined degree.
        let v = match (0..n)
            .filter(|&v| a.degree_in(v) > 0 && b.degree_in(v) > 0)
            .min_by_key(|&v| a.degree_in(v) + b.degree_in(v))
        {
            Some(v) => v,
            None => match (a.main_var(), b.main_var()) {
                (None, _) | (_, None) => return DPoly::constant(n, Coef::one()),
                (Some(x), _) => x,
            },
        };
        let a_has = a.degree_in(v) > 0;
        let b_has = b.degree_in(v) > 0;
        if !a_has {
            return gcd(a, &b.content_in(v));
        }
        if !b_has {
            return gcd(&a.content_in(v), b);
        }
        let ca = a.content_in(v);
        let cb = b.content_in(v);
        let c = gcd(&ca, &cb);
        let mut p = a.div_exact(&ca).expect("content divides");
        let mut r = b.div_exact(&cb).expect("content divides");
        if p.degree_in(v) < r.degree_in(v) {
            std::mem::swap(&mut p, &mut r);
        }
        loop {
            let rem = p.prem_in(&r, v);
            if rem.is_zero() {
                break;
            }
            if rem.degree_in(v) == 0 {
                r = DPoly::constant(n, Coef::one());
                break;
            }
            p = r;
            r = rem.primitive_in(v);
        }
        c.mul(&r.primitive_in(v)).monic()
    }
}

/// Element of the fraction field: `num / den`, reduced and normalized so that
/// `den` has no monomial factor and lex-leading coefficient one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    num: Poly,
    den: Poly,
}

/// Dense view of Laurent polynomials over a fixed variable order.
struct DenseCtx {
    vars: Vec<Sym>,
}

impl DenseCtx {
    fn new(ps: &[&Poly]) -> Self {
        let mut set = BTreeSet::new();
        for p in ps {
            set.extend(p.symbols());
        }
        let mut vars: Vec<Sym> = set.into_iter().collect();
        vars.reverse();
        DenseCtx { vars }
    }

    fn slot(&self, s: Sym) -> usize {
        self.vars.iter().position(|&v| v == s).expect("symbol in context")
    }

    fn dense_exps(&self, e: &Exps) -> Vec<i32> {
        let mut v = vec![0; self.vars.len()];
        for &(s, x) in e {
            v[self.slot(s)] = x;
        }
        v
    }

    fn min_exps(&self, p: &Poly) -> Vec<i32> {
        let mut m = vec![i32::MAX; self.vars.len()];
        for e in p.terms.keys() {
            for (k, x) in self.dense_exps(e).into_iter().enumerate() {
                m[k] = m[k].min(x);
            }
        }
        m
    }

    fn exps(&self, v: &[i32]) -> Vec<(Sym, i32)> {
        self.vars.iter().copied().zip(v.iter().copied()).collect()
    }

    fn to_dense(&self, p: &Poly, shift: &[i32]) -> dense::DPoly {
        let mut d = dense::DPoly::zero(self.vars.len());
        for (e, c) in &p.terms {
            let key = self
                .dense_exps(e)
                .iter()
                .zip(shift)
                .map(|(a, b)| (a - b) as u32)
                .collect();
            d.terms.insert(key, dense::big(c));
        }
        d
    }

    fn lift_dense(&self, d: &dense::DPoly, shift: &[i32]) -> Poly {
        let mut p = Poly::zero();
        for (e, c) in &d.terms {
            let exps = self
                .vars
                .iter()
                .enumerate()
                .map(|(k, &s)| (s, e[k] as i32 + shift[k]));
            let m = Monomial::new(dense::small(c), exps);
            p.add_term(m.exps, m.coeff);
        }
        p
    }
}

/// Gcd of Laurent polynomials, free of monomial content, lex-monic.
fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() && b.is_zero() {
        return Poly::one();
    }
    let ctx = DenseCtx::new(&[a, b]);
    let ma = ctx.min_exps(a);
    let mb = ctx.min_exps(b);
    let g = dense::gcd(&ctx.to_dense(a, &ma), &ctx.to_dense(b, &mb));
    ctx.lift_dense(&g, &vec![0; ctx.vars.len()])
}

/// Exact quotient `a / g` where `g` divides `a` up to a monomial.
fn poly_div(a: &Poly, g: &Poly) -> Poly {
    if g.terms.len() == 1 {
        let (e, c) = g.terms.iter().next().unwrap();
        return a.mul_monomial(&Monomial::new(*c, e.iter().copied()).inv());
    }
    let ctx = DenseCtx::new(&[a, g]);
    let ma = ctx.min_exps(a);
    let q = ctx
        .to_dense(a, &ma)
        .div_exact(&ctx.to_dense(g, &vec![0; ctx.vars.len()]))
        .expect("gcd divides");
    ctx.lift_dense(&q, &ma)
}

impl Scalar {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(Self::canonical(num, den))
    }

    pub fn zero() -> Self {
        Scalar {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Scalar {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn from_monomial(m: &Monomial) -> Self {
        Scalar {
            num: Poly::from_monomial(m),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        Scalar {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn numerator(&self) -> Vec<Monomial> {
        self.num.monomials()
    }

    pub fn denominator(&self) -> Vec<Monomial> {
        self.den.monomials()
    }

    pub fn num_poly(&self) -> &Poly {
        &self.num
    }

    pub fn den_poly(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = poly_gcd(&num, &den);
        Self::normalized(poly_div(&num, &g), poly_div(&den, &g))
    }

    /// Fixes the unit ambiguity of an already coprime pair: the denominator
    /// loses its monomial content and gets leading coefficient one.
    fn normalized(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let ctx = DenseCtx::new(&[&den]);
        let md = ctx.min_exps(&den);
        let dd = ctx.to_dense(&den, &md);
        let lc = dd.terms.values().next_back().expect("nonzero denominator").clone();
        let unit = Monomial::new(dense::small(&lc), ctx.exps(&md));
        let inv = unit.inv();
        Scalar {
            num: num.mul_monomial(&inv),
            den: den.mul_monomial(&inv),
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        // Cross-cancellation keeps the gcds small when both inputs are reduced.
        let d1 = poly_gcd(&self.den, &o.den);
        let a = poly_div(&o.den, &d1);
        let b = poly_div(&self.den, &d1);
        let t = self.num.mul(&a).add(&o.num.mul(&b));
        if t.is_zero() {
            return Self::zero();
        }
        let d2 = poly_gcd(&t, &d1);
        Self::normalized(poly_div(&t, &d2), b.mul(&poly_div(&o.den, &d2)))
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let g1 = poly_gcd(&self.num, &o.den);
        let g2 = poly_gcd(&o.num, &self.den);
        Self::normalized(
            poly_div(&self.num, &g1).mul(&poly_div(&o.num, &g2)),
            poly_div(&self.den, &g2).mul(&poly_div(&o.den, &g1)),
        )
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(Self::canonical(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, n: i32) -> Result<Scalar> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = Scalar::one();
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    pub fn eval(&self, asg: &Assignment) -> Result<Complex64> {
        evaluate(self, asg)
    }
}

/// Evaluates `x` numerically. Fails on unassigned symbols or a vanishing denominator.
pub fn evaluate(x: &Scalar, asg: &Assignment) -> Result<Complex64> {
    let d = x.den.eval(asg)?;
    if d.norm() < POLE_TOL {
        return Err(Error::Pole(d.norm()));
    }
    Ok(x.num.eval(asg)? / d)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a() -> Monomial {
        Monomial::gen("a")
    }

    #[test]
    fn half_powers_add() {
        assert_eq!(&Monomial::q_half(1) * &Monomial::q_half(1), Monomial::q(1));
    }

    #[test]
    fn inverse_pair_cancels() {
        let x = &a() * &Monomial::q(-1);
        let y = &a().inv() * &Monomial::q(1);
        assert!((&x * &y).is_one());
    }

    #[test]
    fn zero_is_canonical() {
        let z = Monomial::new(Rational::zero(), [(Q_HALF, 3)]);
        assert_eq!(z, Monomial::zero());
        assert!(Monomial::zero().try_inv().is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        let m = parse_monomial("a*q^3").unwrap();
        assert_eq!(m, &a() * &Monomial::q(3));
        let h = parse_monomial("q^(-1/2)").unwrap();
        assert_eq!(h, Monomial::q_half(-1));
        let c = parse_monomial("-2/3 a^2").unwrap();
        assert_eq!(c.coeff(), &rat(-2, 3));
        assert_eq!(parse_monomial(&m.to_string()).unwrap(), m);
        assert!(parse_monomial("q^(1/3)").is_err());
        assert!(parse_monomial("").is_err());
    }

    #[test]
    fn json_shape() {
        let m = &Monomial::q_half(3) * &a().pow(-1);
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["coeff"], "1/1");
        assert_eq!(v["exps"]["q½"], 3);
        assert_eq!(v["exps"]["a"], -1);
        let back: Monomial = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn evaluate_q() {
        let asg = Assignment::with_q(Complex64::new(1.21, 0.0));
        let v = Scalar::from_monomial(&Monomial::q(1)).eval(&asg).unwrap();
        assert!((v - Complex64::new(1.21, 0.0)).norm() < 1e-14);
        let mut s = Assignment::new();
        s.set(Q_HALF, Complex64::new(1.1, 0.0));
        let v = Monomial::q(1).eval(&s).unwrap();
        assert!((v.re - 1.21).abs() < 1e-14);
    }

    fn binom(m: &Monomial) -> Poly {
        // 1 - z·m
        Poly::one().sub(&Poly::from_monomial(&(&Monomial::gen("z") * m)))
    }

    #[test]
    fn constant_term_of_box_shape() {
        let q = Monomial::q(1);
        let num = Poly::from_monomial(&q).sub(&Poly::from_monomial(&Monomial::gen("z")));
        let den = binom(&q);
        let s = Scalar::new(num, den).unwrap();
        let mut asg = Assignment::with_q(Complex64::new(1.3, 0.2));
        asg.set_named("z", Complex64::zero());
        let v = s.eval(&asg).unwrap();
        assert!((v - Complex64::new(1.3, 0.2)).norm() < 1e-13);
    }

    #[test]
    fn gcd_reduction_cancels_common_binomials() {
        let q = Monomial::q(1);
        let f = binom(&a()).mul(&binom(&q));
        let g = binom(&a()).mul(&binom(&q.inv()));
        let s = Scalar::new(f, g).unwrap();
        let expected = Scalar::new(binom(&q), binom(&q.inv())).unwrap();
        assert_eq!(s, expected);
        assert_eq!(s.denominator().len(), 2);
        // (x^2 - y^2)/(x - y) = x + y
        let x = Poly::from_monomial(&Monomial::gen("x"));
        let y = Poly::from_monomial(&Monomial::gen("y"));
        let s = Scalar::new(x.mul(&x).sub(&y.mul(&y)), x.sub(&y)).unwrap();
        assert_eq!(s, Scalar::from_poly(x.add(&y)));
    }

    #[test]
    fn monomial_units_are_normalized() {
        let x = Poly::from_monomial(&Monomial::gen("x"));
        let one = Poly::one();
        let s1 = Scalar::new(x.mul(&x).add(&x), x.add(&one)).unwrap();
        assert_eq!(s1, Scalar::from_poly(x.clone()));
        let s2 = Scalar::new(one.clone(), x.clone()).unwrap();
        let s3 = Scalar::from_monomial(&Monomial::gen("x").inv());
        assert_eq!(s2, s3);
    }

    #[test]
    fn pole_is_reported() {
        let s = Scalar::new(Poly::one(), binom(&Monomial::one())).unwrap();
        let mut asg = Assignment::new();
        asg.set_named("z", Complex64::new(1.0, 0.0));
        assert!(matches!(s.eval(&asg), Err(Error::Pole(_))));
        let asg2 = Assignment::new();
        assert!(matches!(s.eval(&asg2), Err(Error::MissingSymbol(_))));
    }

    fn arb_monomial() -> impl Strategy<Value = Monomial> {
        (
            -4i128..5,
            1i128..4,
            -3i32..4,
            -2i32..3,
            -2i32..3,
        )
            .prop_filter("nonzero", |t| t.0 != 0)
            .prop_map(|(n, d, qe, ae, ce)| {
                Monomial::new(
                    rat(n, d),
                    [(Q_HALF, qe), (symbol("a"), ae), (symbol("c"), ce)],
                )
            })
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec(arb_monomial(), 1..4).prop_map(|ms| Poly::from_monomials(&ms))
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        (arb_poly(), arb_poly())
            .prop_filter("nonzero den", |(_, d)| !d.is_zero())
            .prop_map(|(n, d)| Scalar::new(n, d).unwrap())
    }

    fn test_assignment() -> Assignment {
        let mut asg = Assignment::new();
        asg.set(Q_HALF, Complex64::new(1.07, 0.13))
            .set_named("a", Complex64::new(0.71, -0.4))
            .set_named("c", Complex64::new(-1.3, 0.55));
        asg
    }

    proptest! {
        #[test]
        fn monomial_ring_axioms(x in arb_monomial(), y in arb_monomial(), z in arb_monomial()) {
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert!((&x * &x.inv()).is_one());
        }

        #[test]
        fn scalar_field_axioms(x in arb_scalar(), y in arb_scalar(), z in arb_scalar()) {
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
            prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
            prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
            prop_assert_eq!(x.sub(&x), Scalar::zero());
            if !x.is_zero() {
                prop_assert_eq!(x.div(&x).unwrap(), Scalar::one());
            }
        }

        #[test]
        fn evaluate_is_multiplicative(x in arb_scalar(), y in arb_scalar()) {
            let asg = test_assignment();
            if let (Ok(a), Ok(b), Ok(ab)) = (x.eval(&asg), y.eval(&asg), x.mul(&y).eval(&asg)) {
                let scale = (a * b).norm().max(1.0);
                prop_assert!((ab - a * b).norm() <= 1e-12 * scale);
            }
        }
    }
}
