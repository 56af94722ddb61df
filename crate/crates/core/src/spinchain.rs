//! Graded XXZ chain on `𝕍^{⊗ℓ}` built from the Perk–Schultz matrix.
//!
//! Tensor legs follow the super sign rule: an odd operator on leg `L` picks up
//! `(-1)^{Σ_{k<L} |v_k|}` from the input vectors on earlier legs. The plain
//! Kronecker embedding violates the Yang–Baxter equation once `N > 0`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff_ring::{Assignment, Monomial, Q_HALF, POLE_TOL};
use crate::error::{Error, Result};
use crate::identities::{d_lweight, f_norm_factor, DVariant};
use crate::lweights::{FactoredRational, LWeight, Rank};

/// Largest quantum-space dimension `(M+N)^ℓ` accepted.
pub const DIM_CAP: usize = 4096;

fn c1() -> C {
    C::new(1.0, 0.0)
}

/// A character `φ` of the weight group: `q^λ ↦ σ^s ∏ x_k^{λ_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Twist {
    pub x: Vec<C>,
    pub sigma: C,
}

impl Twist {
    pub fn new(x: Vec<C>, sigma: C) -> Self {
        Twist { x, sigma }
    }

    /// `x_k = 1`, `σ = −1`: the supertrace.
    pub fn untwisted(kappa: usize) -> Self {
        Twist::new(vec![c1(); kappa], -c1())
    }

    /// Multipliers on the unit circle from a seeded ChaCha stream, `σ = −1`.
    pub fn seeded(kappa: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = (0..kappa)
            .map(|_| C::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        Twist::new(x, -c1())
    }

    /// `seed:<n>` or `none`.
    pub fn parse(s: &str, kappa: usize) -> Result<Self> {
        if let Some(n) = s.strip_prefix("seed:") {
            let seed = n.trim().parse().map_err(|_| Error::Parse(format!("bad twist seed `{n}`")))?;
            return Ok(Twist::seeded(kappa, seed));
        }
        match s {
            "none" | "untwisted" => Ok(Twist::untwisted(kappa)),
            _ => Err(Error::Parse(format!("twist must be `seed:<n>` or `none`, got `{s}`"))),
        }
    }

    pub fn phi(&self, lambda: &[i64], parity: u8) -> C {
        let mut v = if parity % 2 == 1 { self.sigma } else { c1() };
        for (x, &l) in self.x.iter().zip(lambda) {
            v *= x.powi(l as i32);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub m: usize,
    pub n: usize,
    pub q: C,
    /// Inhomogeneities `b_1, …, b_ℓ`; the chain length is their count.
    pub b: Vec<C>,
    pub twist: Twist,
}

/// Relative distance below which `b` counts as lying on `q^ℤ`.
const ORBIT_TOL: f64 = 1e-9;

impl ChainConfig {
    pub fn new(m: usize, n: usize, q: C, b: Vec<C>, twist: Twist) -> Result<Self> {
        let rank = Rank::new(m, n)?;
        if b.is_empty() {
            return Err(Error::Precondition("chain length must be at least 1".into()));
        }
        if twist.x.len() != rank.kappa() {
            return Err(Error::Precondition(format!(
                "twist has {} multipliers, expected {}",
                twist.x.len(),
                rank.kappa()
            )));
        }
        if (q.norm() - 1.0).abs() < 1e-12 && (q - c1()).norm() < 1e-12 {
            return Err(Error::Precondition("q = 1 is excluded".into()));
        }
        for &bl in &b {
            if bl.norm() < POLE_TOL || on_q_orbit(bl, q) {
                return Err(Error::Precondition(format!("inhomogeneity {bl} lies on q^Z")));
            }
        }
        let cfg = ChainConfig { m, n, q, b, twist };
        let dim = cfg.dim()?;
        if dim > DIM_CAP {
            return Err(Error::DimensionCap(dim, DIM_CAP));
        }
        Ok(cfg)
    }

    /// Generic chain with the seeded default twist and fixed inhomogeneities.
    pub fn generic(m: usize, n: usize, ell: usize, seed: u64) -> Result<Self> {
        let kappa = m + n;
        Self::new(m, n, C::new(1.13, 0.0), default_b(ell), Twist::seeded(kappa, seed))
    }

    pub fn rank(&self) -> Rank {
        Rank::new(self.m, self.n).expect("validated at construction")
    }

    pub fn kappa(&self) -> usize {
        self.m + self.n
    }

    pub fn ell(&self) -> usize {
        self.b.len()
    }

    /// `(M+N)^ℓ`, or an error on overflow.
    pub fn dim(&self) -> Result<usize> {
        let k = self.kappa();
        let mut d: usize = 1;
        for _ in 0..self.ell() {
            d = d.checked_mul(k).filter(|&d| d <= DIM_CAP).ok_or(Error::DimensionCap(usize::MAX, DIM_CAP))?;
        }
        Ok(d)
    }

    pub fn parity(&self, k: usize) -> u8 {
        u8::from(k >= self.m)
    }

    /// `q_k` for the 0-based index `k`.
    pub fn q_idx(&self, k: usize) -> C {
        if k < self.m {
            self.q
        } else {
            1.0 / self.q
        }
    }

    /// `φ(q^{ε_k})` for the 0-based index `k`.
    pub fn phi_basis(&self, k: usize) -> C {
        let s = if self.parity(k) == 1 { self.twist.sigma } else { c1() };
        self.twist.x[k] * s
    }

    pub fn assignment(&self) -> Assignment {
        Assignment::with_q(self.q)
    }
}

fn on_q_orbit(b: C, q: C) -> bool {
    (-64..=64).any(|k| (b - q.powi(k)).norm() < ORBIT_TOL * b.norm())
}

/// Fixed generic inhomogeneities: `0.3, 0.7, 1.9` then off-axis points.
pub fn default_b(ell: usize) -> Vec<C> {
    let base = [
        C::new(0.3, 0.0),
        C::new(0.7, 0.0),
        C::new(1.9, 0.0),
        C::new(0.45, 0.2),
        C::new(1.3, -0.35),
        C::new(0.6, 0.55),
        C::new(2.4, 0.1),
        C::new(0.85, -0.6),
    ];
    (0..ell).map(|l| base[l % base.len()] * (1.0 + 0.07 * (l / base.len()) as f64)).collect()
}

/// `x ⊗ y = E_{a_out a_in} ⊗ E_{s_out s_in}` with its coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub a_out: usize,
    pub a_in: usize,
    pub s_out: usize,
    pub s_in: usize,
    pub c: C,
}

fn parity_of(m: usize, k: usize) -> u8 {
    u8::from(k >= m)
}

fn q_of(m: usize, q: C, k: usize) -> C {
    if k < m {
        q
    } else {
        1.0 / q
    }
}

/// Terms of `R(z, w)`.
pub fn perk_schultz_terms(m: usize, n: usize, q: C, z: C, w: C) -> Vec<Term> {
    let kappa = m + n;
    let mut out = Vec::with_capacity(2 * kappa * kappa);
    let t = |a_out, a_in, s_out, s_in, c| Term { a_out, a_in, s_out, s_in, c };
    for i in 0..kappa {
        let qi = q_of(m, q, i);
        out.push(t(i, i, i, i, z * qi - w / qi));
        for j in 0..kappa {
            if i == j {
                continue;
            }
            out.push(t(i, i, j, j, z - w));
            if i < j {
                let qj = q_of(m, q, j);
                out.push(t(j, i, i, j, z * (qi - 1.0 / qi)));
                out.push(t(i, j, j, i, w * (qj - 1.0 / qj)));
            }
        }
    }
    out
}

/// Dense operator on `legs` tensor factors of `𝕍`, with basis parities.
#[derive(Clone, Debug)]
pub struct ChainOperator {
    pub kappa: usize,
    pub legs: usize,
    /// Parity of each tensor basis vector.
    pub parities: Vec<u8>,
    pub mat: DMatrix<C>,
}

fn digits(mut idx: usize, kappa: usize, legs: usize) -> Vec<usize> {
    let mut d = vec![0; legs];
    for slot in d.iter_mut().rev() {
        *slot = idx % kappa;
        idx /= kappa;
    }
    d
}

fn undigits(d: &[usize], kappa: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * kappa + x)
}

/// `(x ⊗ y)_{l1 l2}` on `legs` factors; `graded` selects the super sign rule.
pub fn embed_pair(m: usize, n: usize, legs: usize, l1: usize, l2: usize, terms: &[Term], graded: bool) -> ChainOperator {
    let kappa = m + n;
    let dim = kappa.pow(legs as u32);
    let mut mat = DMatrix::from_element(dim, dim, C::new(0.0, 0.0));
    let mut parities = Vec::with_capacity(dim);
    for idx in 0..dim {
        let d = digits(idx, kappa, legs);
        parities.push(d.iter().map(|&x| parity_of(m, x)).sum::<u8>() % 2);
        let pre = |l: usize| d[..l].iter().map(|&x| parity_of(m, x) as u32).sum::<u32>();
        for t in terms.iter().filter(|t| t.a_in == d[l1] && t.s_in == d[l2]) {
            let px = (parity_of(m, t.a_out) ^ parity_of(m, t.a_in)) as u32;
            let py = (parity_of(m, t.s_out) ^ parity_of(m, t.s_in)) as u32;
            let odd = graded && (px * pre(l1) + py * pre(l2)) % 2 == 1;
            let mut e = d.clone();
            e[l1] = t.a_out;
            e[l2] = t.s_out;
            let v = if odd { -t.c } else { t.c };
            mat[(undigits(&e, kappa), idx)] += v;
        }
    }
    ChainOperator { kappa, legs, parities, mat }
}

/// `R(z, w)` on `𝕍 ⊗ 𝕍`.
pub fn perk_schultz(m: usize, n: usize, q: C, z: C, w: C) -> ChainOperator {
    embed_pair(m, n, 2, 0, 1, &perk_schultz_terms(m, n, q, z, w), true)
}

/// Absolute and relative Frobenius residual of the Yang–Baxter equation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Residual {
    pub abs: f64,
    pub rel: f64,
}

pub fn qybe_residual(m: usize, n: usize, q: C, z: [C; 3], graded: bool) -> Residual {
    let r = |l1, l2, a: C, b: C| embed_pair(m, n, 3, l1, l2, &perk_schultz_terms(m, n, q, a, b), graded).mat;
    let r12 = r(0, 1, z[0], z[1]);
    let r13 = r(0, 2, z[0], z[2]);
    let r23 = r(1, 2, z[1], z[2]);
    let lhs = &r12 * &r13 * &r23;
    let rhs = &r23 * &r13 * &r12;
    let abs = (&lhs - &rhs).norm();
    Residual { abs, rel: abs / lhs.norm().max(f64::MIN_POSITIVE) }
}

/// `s^{(0)}` and `t^{(0)}` as terms on (auxiliary, site): the `z`- and minus
/// the `w`-coefficients of `R(z, w)`.
fn limit_terms(m: usize, n: usize, q: C) -> (Vec<Term>, Vec<Term>) {
    let s0 = perk_schultz_terms(m, n, q, c1(), C::new(0.0, 0.0));
    let t0 = perk_schultz_terms(m, n, q, C::new(0.0, 0.0), -c1());
    (s0, t0)
}

/// Terms of `S^𝕍_a(z) = (s^{(0)} − za t^{(0)})/(1 − za)`.
pub fn aux_terms(m: usize, n: usize, q: C, a: C, z: C) -> Result<Vec<Term>> {
    let za = z * a;
    let den = c1() - za;
    if den.norm() < POLE_TOL {
        return Err(Error::Pole(den.norm()));
    }
    let (s0, t0) = limit_terms(m, n, q);
    let mut acc: HashMap<(usize, usize, usize, usize), C> = HashMap::new();
    for t in &s0 {
        *acc.entry((t.a_out, t.a_in, t.s_out, t.s_in)).or_default() += t.c;
    }
    for t in &t0 {
        *acc.entry((t.a_out, t.a_in, t.s_out, t.s_in)).or_default() -= za * t.c;
    }
    let mut out: Vec<Term> = acc
        .into_iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|((a_out, a_in, s_out, s_in), c)| Term { a_out, a_in, s_out, s_in, c: c / den })
        .collect();
    out.sort_by_key(|t| (t.a_in, t.s_in, t.a_out, t.s_out));
    Ok(out)
}

/// The L-operator `S^𝕍_a(z)` on auxiliary ⊗ one site.
pub fn aux_action(m: usize, n: usize, q: C, a: C, z: C) -> Result<ChainOperator> {
    Ok(embed_pair(m, n, 2, 0, 1, &aux_terms(m, n, q, a, z)?, true))
}

/// An auxiliary module: its basis, the twist on each weight vector, and the
/// L-operator on (auxiliary ⊗ one site).
pub trait AuxModule: Sync {
    fn dim(&self) -> usize;
    fn parity(&self, k: usize) -> u8;
    /// `φ(p)` for the weight `p` of basis vector `k`.
    fn phi(&self, k: usize) -> C;
    /// `(k_out, s_out, coefficient)` lists indexed by `k_in · κ + s_in`.
    fn terms(&self, u: C) -> Result<Vec<Vec<(usize, usize, C)>>>;
}

/// Evaluation module `V_q^+(ε_1; a)`, i.e. `𝕍` with `S^𝕍_a`.
pub struct VectorAux<'a> {
    pub cfg: &'a ChainConfig,
    pub a: C,
}

impl AuxModule for VectorAux<'_> {
    fn dim(&self) -> usize {
        self.cfg.kappa()
    }
    fn parity(&self, k: usize) -> u8 {
        self.cfg.parity(k)
    }
    fn phi(&self, k: usize) -> C {
        self.cfg.phi_basis(k)
    }
    fn terms(&self, u: C) -> Result<Vec<Vec<(usize, usize, C)>>> {
        let kappa = self.cfg.kappa();
        let mut out = vec![Vec::new(); kappa * kappa];
        for t in aux_terms(self.cfg.m, self.cfg.n, self.cfg.q, self.a, u)? {
            out[t.a_in * kappa + t.s_in].push((t.a_out, t.s_out, t.c));
        }
        Ok(out)
    }
}

/// Numeric weight data of a one-dimensional module `ℂ_𝐟`: the common series
/// `h`, the per-index constants `p_k`, and `φ(p)`.
pub struct OneDimData {
    pub h: FactoredRational,
    pub p: Vec<C>,
    pub phi: C,
    pub parity: u8,
}

/// Splits a diagonal l-weight `𝐟 = h(z)·p` and evaluates `p` and `φ(p)`.
pub fn one_dim_data(cfg: &ChainConfig, f: &LWeight) -> Result<OneDimData> {
    let (h, w) = f
        .diagonal_parts()
        .ok_or_else(|| Error::Precondition(format!("{f} is not one-dimensional")))?;
    let asg = cfg.assignment();
    let rank = cfg.rank();
    let mut lambda = Vec::with_capacity(rank.kappa());
    let mut p = Vec::with_capacity(rank.kappa());
    for (k, c) in w.comps.iter().enumerate() {
        let (rest, half) = c.split_q();
        if !rest.is_one() || half % 2 != 0 {
            return Err(Error::Precondition(format!("component {c} is not an integral q-power")));
        }
        // p_k = q^{(ε_k, λ)} = q^{s_k λ_k}.
        lambda.push(i64::from(rank.sign(k + 1)) * i64::from(half / 2));
        p.push(c.eval(&asg)?);
    }
    let phi = cfg.twist.phi(&lambda, w.parity);
    Ok(OneDimData { h, p, phi, parity: w.parity })
}

/// `ℂ_𝐟` as an auxiliary module: `s_{ii}(z)` acts by `f_i(z)`.
pub struct OneDimAux<'a> {
    pub cfg: &'a ChainConfig,
    pub data: OneDimData,
}

impl AuxModule for OneDimAux<'_> {
    fn dim(&self) -> usize {
        1
    }
    fn parity(&self, _: usize) -> u8 {
        self.data.parity
    }
    fn phi(&self, _: usize) -> C {
        self.data.phi
    }
    fn terms(&self, u: C) -> Result<Vec<Vec<(usize, usize, C)>>> {
        let hv = self.data.h.eval(u, &self.cfg.assignment())?;
        Ok((0..self.cfg.kappa()).map(|s| vec![(0, s, hv * self.data.p[s])]).collect())
    }
}

/// `t_W(u)`: twisted trace over the auxiliary leg of `S_{0,ℓ}(ub_ℓ)⋯S_{0,1}(ub_1)`.
pub fn transfer_with(cfg: &ChainConfig, aux: &dyn AuxModule, u: C) -> Result<DMatrix<C>> {
    let kappa = cfg.kappa();
    let ell = cfg.ell();
    let dim = cfg.dim()?;
    let per_site: Vec<_> = cfg.b.iter().map(|&b| aux.terms(u * b)).collect::<Result<_>>()?;
    let pw: Vec<usize> = (1..=ell).map(|r| kappa.pow((ell - r) as u32)).collect();
    let par = |s: usize| cfg.parity(s) as u32;
    let cols: Vec<Vec<C>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut col = vec![C::new(0.0, 0.0); dim];
            for k0 in 0..aux.dim() {
                let mut cur: HashMap<(usize, usize), C> = HashMap::from([((k0, j), c1())]);
                for r in 0..ell {
                    let mut next: HashMap<(usize, usize), C> = HashMap::with_capacity(cur.len() * 2);
                    for (&(k, idx), &c) in &cur {
                        let s = (idx / pw[r]) % kappa;
                        // Parity of the inputs on legs before site r: auxiliary, then sites < r.
                        let pre = aux.parity(k) as u32 + (0..r).map(|rr| par((idx / pw[rr]) % kappa)).sum::<u32>();
                        for &(k2, s2, coef) in &per_site[r][k * kappa + s] {
                            let odd = (par(s) ^ par(s2)) == 1 && pre % 2 == 1;
                            let v = if odd { -c * coef } else { c * coef };
                            let idx2 = idx - s * pw[r] + s2 * pw[r];
                            *next.entry((k2, idx2)).or_default() += v;
                        }
                    }
                    cur = next;
                }
                let w = aux.phi(k0);
                for ((k, idx), c) in cur {
                    if k == k0 {
                        col[idx] += w * c;
                    }
                }
            }
            col
        })
        .collect();
    Ok(DMatrix::from_fn(dim, dim, |i, j| cols[j][i]))
}

/// `t(u)` with auxiliary space `𝕍` at evaluation parameter `aux_a`.
pub fn transfer(cfg: &ChainConfig, u: C, aux_a: C) -> Result<ChainOperator> {
    let mat = transfer_with(cfg, &VectorAux { cfg, a: aux_a }, u)?;
    let kappa = cfg.kappa();
    let ell = cfg.ell();
    let parities = (0..mat.nrows())
        .map(|i| digits(i, kappa, ell).iter().map(|&x| cfg.parity(x)).sum::<u8>() % 2)
        .collect();
    Ok(ChainOperator { kappa, legs: ell, parities, mat })
}

/// `‖[t(u_1), t(u_2)]‖_F`.
pub fn commutator_norm(cfg: &ChainConfig, u1: C, u2: C, aux_a: C) -> Result<f64> {
    let a = transfer(cfg, u1, aux_a)?.mat;
    let b = transfer(cfg, u2, aux_a)?.mat;
    Ok((&a * &b - &b * &a).norm())
}

/// Basis states grouped by content (number of sites carrying each index).
pub fn sectors(cfg: &ChainConfig) -> Result<BTreeMap<Vec<usize>, Vec<usize>>> {
    let (kappa, ell) = (cfg.kappa(), cfg.ell());
    let mut out: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for idx in 0..cfg.dim()? {
        let mut content = vec![0; kappa];
        for d in digits(idx, kappa, ell) {
            content[d] += 1;
        }
        out.entry(content).or_default().push(idx);
    }
    Ok(out)
}

/// Schur basis of one weight sector of `t(u_0)`.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub content: Vec<usize>,
    pub states: Vec<usize>,
    pub basis: DMatrix<C>,
}

/// One commuting-family eigenbasis, shared across spectral points.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub aux_a: C,
    pub u0: C,
    pub sectors: Vec<SectorBasis>,
}

fn block(t: &DMatrix<C>, states: &[usize]) -> DMatrix<C> {
    DMatrix::from_fn(states.len(), states.len(), |i, j| t[(states[i], states[j])])
}

pub fn spectrum_basis(cfg: &ChainConfig, aux_a: C, u0: C) -> Result<Spectrum> {
    let t = transfer(cfg, u0, aux_a)?.mat;
    let sectors = sectors(cfg)?
        .into_iter()
        .map(|(content, states)| {
            let b = block(&t, &states);
            let (basis, _) = nalgebra::Schur::try_new(b, f64::EPSILON, MAX_ITER)
                .ok_or_else(|| Error::Fit(format!("Schur decomposition stalled on sector {content:?}")))?
                .unpack();
            Ok(SectorBasis { content, states, basis })
        })
        .collect::<Result<_>>()?;
    Ok(Spectrum { aux_a, u0, sectors })
}

/// One eigenvalue function sampled on a list of spectral points.
#[derive(Clone, Debug, Serialize)]
pub struct EigenFunction {
    pub content: Vec<usize>,
    pub index: usize,
    pub values: Vec<C>,
}

impl Spectrum {
    /// `Λ_k(u)` as the diagonal of `Q^* t(u) Q` per sector; also returns the
    /// largest strictly-lower entry, which vanishes for a commuting family.
    pub fn sample(&self, cfg: &ChainConfig, us: &[C]) -> Result<(Vec<EigenFunction>, f64)> {
        let mats: Vec<DMatrix<C>> = us
            .par_iter()
            .map(|&u| transfer(cfg, u, self.aux_a).map(|t| t.mat))
            .collect::<Result<_>>()?;
        let mut out = Vec::new();
        let mut lower = 0.0f64;
        for s in &self.sectors {
            let tri: Vec<DMatrix<C>> = mats
                .iter()
                .map(|t| s.basis.adjoint() * block(t, &s.states) * &s.basis)
                .collect();
            for tm in &tri {
                for i in 0..tm.nrows() {
                    for j in 0..i {
                        lower = lower.max(tm[(i, j)].norm());
                    }
                }
            }
            for k in 0..s.states.len() {
                out.push(EigenFunction {
                    content: s.content.clone(),
                    index: k,
                    values: tri.iter().map(|tm| tm[(k, k)]).collect(),
                });
            }
        }
        Ok((out, lower))
    }
}

/// The two worked TQ relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TQKind {
    /// `t(z^{-2}) = Q(zq^{½})/Q(zq^{-½}) + ⟨even,q⟩ Q(zq^{-3/2})/Q(zq^{-½}) ∏(qz²−b_l)/(z²−b_lq)`.
    Gl20,
    /// `t(z^{-2}) = Q(zq^{½})/Q(zq^{-½}) (1 + ⟨odd,q^{-1}⟩ ∏(z²−b_lq)/(z²q−b_l))`.
    Gl11,
}

/// Scalar data of a TQ relation, shared by every eigenvalue.
///
/// The Baxter function is `z^ν Q(z)` with `Q` a Laurent polynomial; `gauge`
/// is `q^ν`, which the twist fixes.
#[derive(Clone, Debug, Serialize)]
pub struct TQForm {
    pub kind: TQKind,
    pub q: C,
    pub b: Vec<C>,
    pub gauge: C,
    /// `φ(⟨even,q⟩)` or `φ(⟨odd,q^{-1}⟩)`.
    pub weight: C,
}

pub fn example_tq_form(cfg: &ChainConfig) -> Result<TQForm> {
    let x = &cfg.twist.x;
    let (kind, gauge, weight) = match (cfg.m, cfg.n) {
        // ⟨even,q⟩ = q^{ε_1+ε_2}.
        (2, 0) => (TQKind::Gl20, x[1], cfg.twist.phi(&[1, 1], 0)),
        // ⟨odd,q^{-1}⟩ = q^{−ε_1+ε_2} in gl(1|1).
        (1, 1) => (TQKind::Gl11, x[0], cfg.twist.phi(&[-1, 1], 1)),
        (m, n) => return Err(Error::Precondition(format!("no worked TQ relation for gl({m}|{n})"))),
    };
    Ok(TQForm { kind, q: cfg.q, b: cfg.b.clone(), gauge, weight })
}

impl TQForm {
    /// Evaluation parameter of the auxiliary `𝕍` in the example.
    pub fn aux_a(&self) -> C {
        match self.kind {
            TQKind::Gl20 => self.q,
            TQKind::Gl11 => 1.0 / self.q,
        }
    }

    pub fn d(&self, z: C) -> C {
        let (q, z2) = (self.q, z * z);
        self.b
            .iter()
            .map(|&b| match self.kind {
                TQKind::Gl20 => (q * z2 - b) / (z2 - b * q),
                TQKind::Gl11 => (z2 - b * q) / (z2 * q - b),
            })
            .product()
    }

    /// The three shifted-`Q` coefficients `(α, β, γ)` of
    /// `α Q(zq^{-½}) + β Q(zq^{½}) + γ Q(zq^{-3/2}) = 0`.
    fn coefficients(&self, z: C, lam: C) -> (C, C, C) {
        let d = self.d(z);
        match self.kind {
            TQKind::Gl20 => (lam, -self.gauge, -self.weight / self.gauge * d),
            TQKind::Gl11 => (lam, -self.gauge * (c1() + self.weight * d), C::new(0.0, 0.0)),
        }
    }

    /// Linear row in the coefficients of `Q` over exponents `lo..=hi`, and the
    /// scale used to make residuals relative.
    fn row(&self, z: C, lam: C, lo: i32, hi: i32) -> (Vec<C>, f64) {
        let sh = self.q.sqrt();
        let (al, be, ga) = self.coefficients(z, lam);
        let pts = [(al, z / sh), (be, z * sh), (ga, z / (sh * sh * sh))];
        let row: Vec<C> = (lo..=hi).map(|e| pts.iter().map(|&(c, x)| c * x.powi(e)).sum()).collect();
        let scale = (lo..=hi)
            .map(|e| pts.iter().map(|&(c, x)| (c * x.powi(e)).norm()).sum::<f64>())
            .fold(0.0, f64::max);
        (row, scale)
    }
}

/// A Laurent polynomial `Q(z) = Σ_{e} c_e z^e` together with its gauge `q^ν`.
#[derive(Clone, Debug, Serialize)]
pub struct BaxterQ {
    pub lo: i32,
    pub coeffs: Vec<C>,
    pub gauge: C,
    pub fit_residual: f64,
    pub nullity: usize,
}

impl BaxterQ {
    pub fn eval(&self, z: C) -> C {
        self.coeffs.iter().enumerate().map(|(k, &c)| c * z.powi(self.lo + k as i32)).sum()
    }

    /// `deg − lowest exponent` in `z`.
    pub fn span(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Degree as a polynomial in `z^{±2}`, up to a power of `z`.
    pub fn degree_z2(&self) -> usize {
        self.span().div_ceil(2)
    }

    /// Nonzero roots. With nonzero exponents spaced by `g`, the roots of the
    /// polynomial in `y = z^g` come from a companion matrix and each yields
    /// `g` roots in `z`; Newton steps on the full polynomial polish them.
    pub fn roots(&self) -> Result<Vec<C>> {
        let d = self.span();
        if d == 0 {
            return Ok(Vec::new());
        }
        let g = (1..=d)
            .filter(|k| self.coeffs[*k].norm() > 0.0)
            .fold(0, num_integer::gcd);
        let red: Vec<C> = self.coeffs.iter().step_by(g).copied().collect();
        let dr = red.len() - 1;
        let lead = red[dr];
        let comp = DMatrix::from_fn(dr, dr, |i, j| {
            if j == dr - 1 {
                -red[i] / lead
            } else if i == j + 1 {
                c1()
            } else {
                C::new(0.0, 0.0)
            }
        });
        let ev = nalgebra::Schur::try_new(comp, f64::EPSILON, MAX_ITER)
            .ok_or_else(|| Error::Fit("companion eigenvalues did not converge".into()))?
            .unpack()
            .1
            .diagonal();
        let p = |z: C| self.coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, &c| acc * z + c);
        let dp = |z: C| {
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(C::new(0.0, 0.0), |acc, (k, &c)| acc * z + c * k as f64)
        };
        let tau = std::f64::consts::TAU;
        Ok(ev
            .iter()
            .flat_map(|&y| {
                let r = y.powf(1.0 / g as f64);
                (0..g).map(move |k| r * C::from_polar(1.0, tau * k as f64 / g as f64))
            })
            .map(|r| {
                let mut z = r;
                for _ in 0..2 {
                    let dz = dp(z);
                    if dz.norm() > 0.0 {
                        z -= p(z) / dz;
                    }
                }
                z
            })
            .collect())
    }

    /// `Q̃(w q^{h1/2}) / Q̃(w q^{h2/2})` for the gauged `Q̃(z) = z^ν Q(z)`.
    pub fn gauged_ratio(&self, w: C, q: C, h1: i32, h2: i32) -> Result<C> {
        if (h1 - h2) % 2 != 0 {
            return Err(Error::Precondition("gauge needs an integral q-shift".into()));
        }
        let sh = q.sqrt();
        let den = self.eval(w * sh.powi(h2));
        if den.norm() < POLE_TOL {
            return Err(Error::Pole(den.norm()));
        }
        Ok(self.gauge.powi((h1 - h2) / 2) * self.eval(w * sh.powi(h1)) / den)
    }
}

/// Iteration cap for the dense eigen- and singular-value solvers.
const MAX_ITER: usize = 10_000;

/// Relative null-singular-value threshold of the TQ fit.
pub const NULL_TOL: f64 = 1e-9;

/// Solves the cross-multiplied TQ relation for `Q` over `z^{-2ℓ..2ℓ}` from
/// `(z, Λ(z^{-2}))` samples; `holdout` samples measure the fit residual.
pub fn extract_baxter_q(form: &TQForm, samples: &[(C, C)], holdout: &[(C, C)]) -> Result<BaxterQ> {
    let ell = form.b.len() as i32;
    let (lo, hi) = (-2 * ell, 2 * ell);
    let ncol = (hi - lo + 1) as usize;
    if samples.len() < ncol + 1 {
        return Err(Error::Precondition(format!("need more than {ncol} samples")));
    }
    let rows: Vec<Vec<C>> = samples
        .iter()
        .map(|&(z, lam)| {
            let (r, s) = form.row(z, lam, lo, hi);
            r.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let a = DMatrix::from_fn(rows.len(), ncol, |i, j| rows[i][j]);
    let svd = nalgebra::SVD::try_new(a, false, true, f64::EPSILON, MAX_ITER)
        .ok_or_else(|| Error::Fit("SVD did not converge".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Fit("SVD without right vectors".into()))?;
    let sv = &svd.singular_values;
    let smax = sv.max();
    let nullity = sv.iter().filter(|&&s| s < NULL_TOL * smax).count();
    if nullity != 1 {
        return Err(Error::Fit(format!("nullspace dimension {nullity}, expected 1")));
    }
    let kmin = sv.argmin().0;
    let mut c: Vec<C> = v_t.row(kmin).iter().map(|x| x.conj()).collect();
    let cmax = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    for x in c.iter_mut() {
        if x.norm() < 1e-10 * cmax {
            *x = C::new(0.0, 0.0);
        }
    }
    let first = c.iter().position(|x| x.norm() > 0.0).unwrap_or(0);
    let last = c.iter().rposition(|x| x.norm() > 0.0).unwrap_or(0);
    let lead = c[last];
    let coeffs: Vec<C> = c[first..=last].iter().map(|x| x / lead).collect();
    let q = BaxterQ { lo: lo + first as i32, coeffs, gauge: form.gauge, fit_residual: 0.0, nullity };
    if q.degree_z2() > ell as usize {
        return Err(Error::Fit(format!("degree {} in z² exceeds ℓ = {ell}", q.degree_z2())));
    }
    let fit_residual = holdout
        .iter()
        .map(|&(z, lam)| {
            let (r, s) = form.row(z, lam, q.lo, q.lo + q.span() as i32);
            let v: C = r.iter().zip(&q.coeffs).map(|(a, b)| a * b).sum();
            v.norm() / (s * q.coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max))
        })
        .fold(0.0, f64::max);
    Ok(BaxterQ { fit_residual, ..q })
}

/// `y_i(u)` per site as a rational function of `u = z^{-2}b_l`, from the
/// f-table with formal `c, d`; errors if `c` or `d` survive.
pub fn y_factor(rank: Rank, i: usize) -> Result<FactoredRational> {
    let (c, d) = (Monomial::gen("c"), Monomial::gen("d"));
    let d2 = d.pow(2);
    let qi = rank.q_l(i);
    let mut acc = f_norm_factor(rank, i, &(&d * &rank.q_hat(i).inv()), &d2)?
        .mul(&f_norm_factor(rank, i, &(&d * &qi), &d2)?.inv());
    for j in rank.neighbors(i) {
        let cij = rank.pow_ij(&c, i, j);
        let qij = rank.q_ij(i, j);
        let arg = &qij.inv() * &cij.pow(-2);
        acc = acc
            .mul(&f_norm_factor(rank, j, &(&cij.inv() * &qij.inv()), &arg)?)
            .mul(&f_norm_factor(rank, j, &cij.inv(), &arg)?.inv());
    }
    if !q_only_factor(&acc) {
        return Err(Error::Precondition(format!("y_{i} depends on c or d: {acc}")));
    }
    Ok(acc)
}

fn q_only(m: &Monomial) -> bool {
    m.symbols().all(|s| s == Q_HALF)
}

fn q_only_factor(f: &FactoredRational) -> bool {
    q_only(f.pref()) && f.factors().keys().all(q_only)
}

/// Highest l-weight of `D_i` at `a = 1`, checked free of `c, d` and one-dimensional.
pub fn d_module(rank: Rank, i: usize) -> Result<LWeight> {
    let f = d_lweight(rank, DVariant::AsyPlus, i, &Monomial::one(), &Monomial::gen("c"), &Monomial::gen("d"))?;
    if !f.comps().iter().all(q_only_factor) {
        return Err(Error::Precondition(format!("D_{i} depends on c or d: {f}")));
    }
    if !f.is_diagonal() {
        return Err(Error::Precondition(format!("D_{i} is not one-dimensional: {f}")));
    }
    Ok(f)
}

/// `t_{ℂ_𝐟}(u)` on any basis vector of the given content:
/// `φ(p) ∏_l h(ub_l) p_{i_l}`.
pub fn one_dim_eigenvalue(cfg: &ChainConfig, data: &OneDimData, u: C, content: &[usize]) -> Result<C> {
    let asg = cfg.assignment();
    let mut v = data.phi;
    for &b in &cfg.b {
        v *= data.h.eval(u * b, &asg)?;
    }
    for (p, &n) in data.p.iter().zip(content) {
        v *= p.powi(n as i32);
    }
    Ok(v)
}

/// Bethe equation at each root `w` of `Q_i`, normalized:
/// `(LHS + D_i(w^{-2})) / (|LHS| + |D_i(w^{-2})|)` with
/// `LHS = y_i(w) Q̃_i(wq_i)/Q̃_i(wq̂_i^{-1}) ∏_{j∼i} Q̃_j(wq_{ij}^{½})/Q̃_j(wq_{ij}^{-½})`.
pub fn bae_residual(
    cfg: &ChainConfig,
    i: usize,
    roots: &[C],
    qs: &BTreeMap<usize, BaxterQ>,
    content: &[usize],
) -> Result<Vec<C>> {
    if roots.is_empty() {
        return Ok(Vec::new());
    }
    let rank = cfg.rank();
    let y = y_factor(rank, i)?;
    let dd = one_dim_data(cfg, &d_module(rank, i)?)?;
    let asg = cfg.assignment();
    let h1 = rank.q_l(i).q_half_exp();
    let h2 = -rank.q_hat(i).q_half_exp();
    let need = |j: usize| qs.get(&j).ok_or_else(|| Error::Precondition(format!("missing Q_{j}")));
    roots
        .iter()
        .map(|&w| {
            let u = 1.0 / (w * w);
            let mut lhs = c1();
            for &b in &cfg.b {
                lhs *= y.eval(u * b, &asg)?;
            }
            if h1 != h2 {
                lhs *= need(i)?.gauged_ratio(w, cfg.q, h1, h2)?;
            }
            for j in rank.neighbors(i) {
                let a = rank.alpha_pair(i, j);
                lhs *= need(j)?.gauged_ratio(w, cfg.q, a, -a)?;
            }
            let rhs = one_dim_eigenvalue(cfg, &dd, u, content)?;
            Ok((lhs + rhs) / (lhs.norm() + rhs.norm()).max(f64::MIN_POSITIVE))
        })
        .collect()
}

/// Everything extracted for one eigenvalue of the example transfer matrix.
#[derive(Clone, Debug, Serialize)]
pub struct BaxterEigen {
    pub content: Vec<usize>,
    pub index: usize,
    /// `Λ(u_0)`.
    pub lambda0: C,
    pub q: Option<BaxterQ>,
    pub error: Option<String>,
    pub roots: Vec<C>,
    pub bae_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaxterSummary {
    pub form: TQForm,
    pub u0: C,
    /// Largest strictly-lower entry of `Q^* t(u) Q` over all samples.
    pub triangularity: f64,
    pub eigen: Vec<BaxterEigen>,
}

impl BaxterSummary {
    pub fn max_fit_residual(&self) -> f64 {
        self.eigen
            .iter()
            .map(|e| e.q.as_ref().map_or(f64::INFINITY, |q| q.fit_residual))
            .fold(0.0, f64::max)
    }

    pub fn max_bae_residual(&self) -> f64 {
        self.eigen.iter().map(|e| e.bae_max).fold(0.0, f64::max)
    }

    pub fn all_fitted(&self) -> bool {
        self.eigen.iter().all(|e| e.q.is_some())
    }
}

/// Seeded sample points `z` with `|z| ∈ [0.6, 1.6]`.
pub fn sample_points(count: usize, seed: u64) -> Vec<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| C::from_polar(rng.gen_range(0.6..1.6), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect()
}

/// Diagonalizes the example transfer matrix, fits `Q` per eigenvalue, and
/// evaluates the Bethe equations at the roots.
pub fn baxter_analysis(cfg: &ChainConfig, seed: u64) -> Result<BaxterSummary> {
    let form = example_tq_form(cfg)?;
    let ell = cfg.ell();
    let nfit = 6 * ell + 8;
    let zs = sample_points(nfit + 6 + 1, seed);
    let u0 = 1.0 / (zs[0] * zs[0]);
    let spec = spectrum_basis(cfg, form.aux_a(), u0)?;
    let us: Vec<C> = zs.iter().map(|z| 1.0 / (z * z)).collect();
    let (funcs, triangularity) = spec.sample(cfg, &us)?;
    let eigen = funcs
        .par_iter()
        .map(|f| {
            let pts: Vec<(C, C)> = zs.iter().copied().zip(f.values.iter().copied()).collect();
            let (fit, hold) = pts[1..].split_at(nfit);
            let mut e = BaxterEigen {
                content: f.content.clone(),
                index: f.index,
                lambda0: f.values[0],
                q: None,
                error: None,
                roots: Vec::new(),
                bae_max: 0.0,
            };
            match extract_baxter_q(&form, fit, hold) {
                Ok(q) => {
                    e.roots = match q.roots() {
                        Ok(r) => r,
                        Err(err) => {
                            e.error = Some(err.to_string());
                            e.bae_max = f64::INFINITY;
                            Vec::new()
                        }
                    };
                    let qs = BTreeMap::from([(1usize, q.clone())]);
                    match bae_residual(cfg, 1, &e.roots, &qs, &f.content) {
                        Ok(r) => e.bae_max = r.iter().map(|x| x.norm()).fold(0.0, f64::max),
                        Err(err) => {
                            e.error = Some(err.to_string());
                            e.bae_max = f64::INFINITY;
                        }
                    }
                    e.q = Some(q);
                }
                Err(err) => e.error = Some(err.to_string()),
            }
            e
        })
        .collect();
    Ok(BaxterSummary { form, u0, triangularity, eigen })
}

/// Seeded spectral points for residual sweeps.
pub fn random_points(count: usize, seed: u64) -> Vec<C> {
    sample_points(count, seed ^ 0x9e37_79b9_7f4a_7c15)
}

/// Column vector helper for tests and callers applying operators.
pub fn basis_vector(dim: usize, k: usize) -> DVector<C> {
    let mut v = DVector::from_element(dim, C::new(0.0, 0.0));
    v[k] = c1();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    const SUPER: [(usize, usize); 4] = [(1, 1), (2, 0), (2, 1), (2, 2)];

    #[test]
    fn gl11_r_matrix_entries() {
        let q = c(1.3, 0.2);
        let (z, w) = (c(0.7, 0.1), c(-0.4, 0.9));
        let r = perk_schultz(1, 1, q, z, w).mat;
        let qi = 1.0 / q;
        // Basis order v1⊗v1, v1⊗v2, v2⊗v1, v2⊗v2.
        assert!((r[(0, 0)] - (z * q - w / q)).norm() < 1e-14);
        assert!((r[(1, 1)] - (z - w)).norm() < 1e-14);
        assert!((r[(2, 2)] - (z - w)).norm() < 1e-14);
        assert!((r[(3, 3)] - (z * qi - w / qi)).norm() < 1e-14);
        // E_21⊗E_12 maps v1⊗v2 to v2⊗v1; E_12⊗E_21 maps v2⊗v1 to v1⊗v2 with a
        // sign, since the odd E_21 passes the odd v2 on the first leg.
        assert!((r[(2, 1)] - z * (q - 1.0 / q)).norm() < 1e-14);
        assert!((r[(1, 2)] + w * (qi - q)).norm() < 1e-14);
        let nnz = r.iter().filter(|x| x.norm() > 0.0).count();
        assert_eq!(nnz, 6);
    }

    #[test]
    fn r_at_equal_arguments_is_a_graded_swap() {
        let q = c(1.13, 0.0);
        let z = c(0.8, 0.3);
        for (m, n) in SUPER {
            let r = perk_schultz(m, n, q, z, z).mat;
            let kappa = m + n;
            for i in 0..kappa {
                for j in 0..kappa {
                    if i != j {
                        assert!(r[(i * kappa + i, j * kappa + j)].norm() < 1e-15);
                        assert!(r[(i * kappa + j, i * kappa + j)].norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn yang_baxter_holds_only_with_graded_legs() {
        let q = c(1.13, 0.07);
        let pts = random_points(60, 7);
        for (m, n) in SUPER {
            for t in pts.chunks(3) {
                let r = qybe_residual(m, n, q, [t[0], t[1], t[2]], true);
                assert!(r.abs < 1e-12, "gl({m}|{n}): {r:?}");
            }
        }
        // Plain Kronecker legs break the equation as soon as odd vectors exist.
        for (m, n) in [(1, 1), (2, 1), (2, 2)] {
            let r = qybe_residual(m, n, q, [pts[0], pts[1], pts[2]], false);
            assert!(r.rel > 1e-3, "gl({m}|{n}) ungraded residual {r:?}");
        }
        // Without odd indices both embeddings coincide.
        let r = qybe_residual(2, 0, q, [pts[0], pts[1], pts[2]], false);
        assert!(r.abs < 1e-12);
    }

    #[test]
    fn aux_action_recombines_to_r() {
        let q = c(1.13, 0.0);
        let a = c(0.9, 0.2);
        for (m, n) in SUPER {
            let s0 = aux_action(m, n, q, a, c(0.0, 0.0)).unwrap().mat;
            // R_∞ = lim R(z,w)/z, read off at a large z.
            let big = 1e7;
            let lim = perk_schultz(m, n, q, c(big, 0.0), c(1.0, 0.0)).mat / c(big, 0.0);
            assert!((&s0 - &lim).norm() < 1e-6);
            let z = c(0.35, -0.6);
            let l = aux_action(m, n, q, a, z).unwrap().mat * (c1() - z * a);
            let r = perk_schultz(m, n, q, c1(), z * a).mat;
            assert!((&l - &r).norm() < 1e-13);
        }
        assert!(matches!(aux_action(1, 1, q, c(2.0, 0.0), c(0.5, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn config_validation() {
        let q = c(1.13, 0.0);
        assert!(ChainConfig::new(1, 1, q, vec![q * q], Twist::untwisted(2)).is_err());
        assert!(ChainConfig::new(1, 1, q, vec![], Twist::untwisted(2)).is_err());
        assert!(ChainConfig::new(1, 1, q, vec![c(0.3, 0.0)], Twist::untwisted(3)).is_err());
        assert!(matches!(
            ChainConfig::new(2, 2, q, default_b(7), Twist::untwisted(4)),
            Err(Error::DimensionCap(..))
        ));
        assert!(ChainConfig::new(2, 2, q, default_b(6), Twist::untwisted(4)).is_ok());
        assert_eq!(Twist::parse("seed:42", 3).unwrap(), Twist::seeded(3, 42));
        assert!(Twist::parse("bogus", 3).is_err());
    }

    #[test]
    fn gl11_l_operator_by_hand() {
        let (q, a, z) = (c(1.13, 0.0), c(0.8, -0.3), c(0.25, 0.4));
        let za = z * a;
        let l = aux_action(1, 1, q, a, z).unwrap().mat * (c1() - za);
        let qi = 1.0 / q;
        let mut want = DMatrix::from_element(4, 4, C::new(0.0, 0.0));
        want[(0, 0)] = q - za * qi;
        want[(1, 1)] = c1() - za;
        want[(2, 2)] = c1() - za;
        want[(3, 3)] = qi - za * q;
        want[(2, 1)] = q - qi;
        want[(1, 2)] = za * (q - qi);
        assert!((&l - &want).norm() < 1e-14, "{l}");
    }

    #[test]
    fn sector_spectrum_matches_full_eigenvalues() {
        // Oracle: eigenvalues of the unblocked matrix from an independent Schur run.
        for (m, n) in [(2, 0), (1, 1), (2, 1)] {
            let cfg = ChainConfig::generic(m, n, 2, 9).unwrap();
            let u = c(0.37, -0.52);
            let spec = spectrum_basis(&cfg, cfg.q, u).unwrap();
            let (funcs, _) = spec.sample(&cfg, &[u]).unwrap();
            let full = transfer(&cfg, u, cfg.q).unwrap().mat;
            let mut oracle: Vec<C> = nalgebra::Schur::new(full).unpack().1.diagonal().iter().copied().collect();
            for f in &funcs {
                let k = (0..oracle.len())
                    .min_by(|&x, &y| (oracle[x] - f.values[0]).norm().total_cmp(&(oracle[y] - f.values[0]).norm()))
                    .unwrap();
                assert!((oracle[k] - f.values[0]).norm() < 1e-10);
                oracle.swap_remove(k);
            }
            assert!(oracle.is_empty());
        }
    }

    #[test]
    fn transfer_matrices_commute() {
        for (m, n) in SUPER {
            for ell in 1..=4 {
                let cfg = ChainConfig::generic(m, n, ell, 42).unwrap();
                let pts = random_points(if ell < 4 { 20 } else { 4 }, ell as u64);
                let a = cfg.q;
                for p in pts.chunks(2) {
                    let nrm = commutator_norm(&cfg, p[0], p[1], a).unwrap();
                    assert!(nrm < 1e-10, "gl({m}|{n}) ℓ={ell}: {nrm}");
                }
                // Different auxiliary parameters belong to the same family.
                let t1 = transfer(&cfg, pts[2], a).unwrap().mat;
                let t2 = transfer(&cfg, pts[3], 1.0 / a).unwrap().mat;
                assert!((&t1 * &t2 - &t2 * &t1).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn ungraded_chain_fails_to_commute() {
        // Dropping the leg signs in the transfer matrix breaks commutativity.
        struct Plain<'a>(VectorAux<'a>);
        impl AuxModule for Plain<'_> {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn parity(&self, _: usize) -> u8 {
                0
            }
            fn phi(&self, k: usize) -> C {
                self.0.phi(k)
            }
            fn terms(&self, u: C) -> Result<Vec<Vec<(usize, usize, C)>>> {
                self.0.terms(u)
            }
        }
        let cfg = ChainConfig::generic(1, 1, 3, 42).unwrap();
        let pts = random_points(2, 3);
        let aux = Plain(VectorAux { cfg: &cfg, a: cfg.q });
        let a = transfer_with(&cfg, &aux, pts[0]).unwrap();
        let b = transfer_with(&cfg, &aux, pts[1]).unwrap();
        assert!((&a * &b - &b * &a).norm() > 1e-6);
    }

    #[test]
    fn one_dimensional_auxiliary_is_diagonal() {
        let cfg = ChainConfig::generic(2, 2, 3, 5).unwrap();
        let rank = cfg.rank();
        for i in 1..rank.kappa() {
            let f = d_module(rank, i).unwrap();
            let data = one_dim_data(&cfg, &f).unwrap();
            let u = c(0.4, 0.3);
            let aux = OneDimAux { cfg: &cfg, data };
            let t = transfer_with(&cfg, &aux, u).unwrap();
            for (content, states) in sectors(&cfg).unwrap() {
                let want = one_dim_eigenvalue(&cfg, &aux.data, u, &content).unwrap();
                for &s in &states {
                    assert!((t[(s, s)] - want).norm() < 1e-12 * want.norm().max(1.0));
                }
            }
            let off: f64 = (0..t.nrows())
                .flat_map(|i| (0..t.ncols()).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| t[(i, j)].norm())
                .fold(0.0, f64::max);
            assert_eq!(off, 0.0);
        }
    }

    #[test]
    fn gl22_bethe_scalars_match_the_worked_example() {
        let rank = Rank::new(2, 2).unwrap();
        let q = Monomial::q;
        let one = Monomial::one();
        // y_1 = 1; y_2 = (1 − uq)/(1 − uq^{-1}); y_3 = (1 − uq^{-2})/(1 − uq²).
        assert!(y_factor(rank, 1).unwrap().is_one());
        assert_eq!(
            y_factor(rank, 2).unwrap(),
            FactoredRational::from_parts(one.clone(), [(q(1), 1), (q(-1), -1)])
        );
        assert_eq!(
            y_factor(rank, 3).unwrap(),
            FactoredRational::from_parts(one.clone(), [(q(-2), 1), (q(2), -1)])
        );
        // D_1(z) = 1 on every state.
        let cfg = ChainConfig::generic(2, 2, 2, 1).unwrap();
        let d1 = one_dim_data(&cfg, &d_module(rank, 1).unwrap()).unwrap();
        let v = one_dim_eigenvalue(&cfg, &d1, c(0.3, 0.2), &[1, 0, 1, 0]).unwrap();
        assert!((v - c1()).norm() < 1e-14);
        // D_2(z) = ⟨odd,q^{-1}⟩ ∏ (z²−b_lq)/(z²q−b_l).
        let d2 = one_dim_data(&cfg, &d_module(rank, 2).unwrap()).unwrap();
        let z = c(0.9, 0.4);
        let qv = cfg.q;
        let want = cfg.twist.phi(&[-1, -1, 1, 1], 1)
            * cfg.b.iter().map(|&b| (z * z - b * qv) / (z * z * qv - b)).product::<C>();
        let got = one_dim_eigenvalue(&cfg, &d2, 1.0 / (z * z), &[0, 1, 1, 0]).unwrap();
        assert!((got - want).norm() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn bae_residual_edge_cases() {
        let cfg = ChainConfig::generic(2, 0, 2, 1).unwrap();
        assert!(bae_residual(&cfg, 1, &[], &BTreeMap::new(), &[1, 1]).unwrap().is_empty());
        assert!(bae_residual(&cfg, 1, &[c(0.5, 0.1)], &BTreeMap::new(), &[1, 1]).is_err());
    }

    #[test]
    fn constant_eigenvalue_without_d_term_gives_trivial_q() {
        // With d ≡ 0 (empty chain factor) Λ = gauge forces Q ≡ const.
        let form = TQForm {
            kind: TQKind::Gl11,
            q: c(1.13, 0.0),
            b: vec![c(0.3, 0.0)],
            gauge: c(0.6, 0.8),
            weight: C::new(0.0, 0.0),
        };
        // Λ(z^{-2}) Q(zq^{-½}) = gauge Q(zq^{½}) forces Q constant.
        let zs = sample_points(12, 3);
        let pts: Vec<(C, C)> = zs.iter().map(|&z| (z, form.gauge)).collect();
        let q = extract_baxter_q(&form, &pts[..8], &pts[8..]).unwrap();
        assert_eq!(q.span(), 0);
        assert!(q.roots().unwrap().is_empty());
    }

    #[test]
    fn baxter_q_for_worked_examples() {
        for (m, n) in [(2, 0), (1, 1)] {
            for ell in 2..=3 {
                let cfg = ChainConfig::generic(m, n, ell, 42).unwrap();
                let s = baxter_analysis(&cfg, 11).unwrap();
                assert!(s.triangularity < 1e-9, "gl({m}|{n}) ℓ={ell}: {}", s.triangularity);
                for e in &s.eigen {
                    assert!(e.q.is_some(), "gl({m}|{n}) ℓ={ell} {:?}: {:?}", e.content, e.error);
                }
                assert_eq!(s.eigen.len(), cfg.dim().unwrap());
                assert!(s.max_fit_residual() < 1e-8, "gl({m}|{n}) ℓ={ell}: {}", s.max_fit_residual());
                assert!(s.max_bae_residual() < 1e-7, "gl({m}|{n}) ℓ={ell}: {}", s.max_bae_residual());
            }
        }
    }
}
