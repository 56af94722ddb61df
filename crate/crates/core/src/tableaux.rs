//! Young diagrams `Y_±^λ` and their super semistandard fillings `𝓑_±(λ)`.
//!
//! Both signs store cells positively: `(k, l)` with `k, l ≥ 1`. For the minus
//! sign the cell stands for `(−k, −l)`, so every order condition is reversed.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lweights::{Rank, WeightLatticeVector};

/// Default bound on the number of tableaux one enumeration may produce.
pub const DEFAULT_CAP: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            _ => Err(Error::Parse(format!("unknown sign `{s}`"))),
        }
    }
}

/// `λ ∈ 𝒫`: both halves weakly decreasing and nonnegative, and an odd row
/// `j` may be occupied only if `λ_M ≥ j`. For `M = 0` the second rule is void.
pub fn in_p(rank: Rank, lambda: &WeightLatticeVector) -> bool {
    let c = &lambda.coords;
    if c.len() != rank.kappa() || c.iter().any(|&x| x < 0) {
        return false;
    }
    let (even, odd) = c.split_at(rank.m);
    if even.windows(2).any(|w| w[0] < w[1]) || odd.windows(2).any(|w| w[0] < w[1]) {
        return false;
    }
    if rank.m == 0 {
        return true;
    }
    let lm = even[rank.m - 1];
    odd.iter().enumerate().all(|(j, &x)| x == 0 || lm > j as i64)
}

/// All `λ ∈ 𝒫` with `|λ| ≤ max_cells`, in lexicographic order.
pub fn shapes_up_to(rank: Rank, max_cells: usize) -> Vec<WeightLatticeVector> {
    fn rec(
        rank: Rank,
        left: i64,
        prefix: &mut Vec<i64>,
        out: &mut Vec<WeightLatticeVector>,
    ) {
        let k = prefix.len();
        if k == rank.kappa() {
            let v = WeightLatticeVector::new(prefix.clone());
            if in_p(rank, &v) {
                out.push(v);
            }
            return;
        }
        let cap = if k == 0 || k == rank.m {
            left
        } else {
            left.min(prefix[k - 1])
        };
        for x in 0..=cap {
            prefix.push(x);
            rec(rank, left - x, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(rank, max_cells as i64, &mut Vec::new(), &mut out);
    out
}

/// `Y_±^λ`, stored as positive row lengths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YoungDiagram {
    pub rank: Rank,
    pub sign: Sign,
    pub lambda: WeightLatticeVector,
    rows: Vec<usize>,
}

impl YoungDiagram {
    /// Row lengths `r_1 ≥ r_2 ≥ …` of the positive storage.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn n_cells(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Column lengths `c_1 ≥ c_2 ≥ …`.
    pub fn cols(&self) -> Vec<usize> {
        let w = self.rows.first().copied().unwrap_or(0);
        (1..=w)
            .map(|l| self.rows.iter().filter(|&&r| r >= l).count())
            .collect()
    }

    pub fn contains(&self, k: usize, l: usize) -> bool {
        k >= 1 && l >= 1 && k <= self.rows.len() && l <= self.rows[k - 1]
    }

    /// Cells `(k, l)` in row-major order (positive storage).
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(k, &r)| (1..=r).map(move |l| (k + 1, l)))
            .collect()
    }

    /// Flat index of cell `(k, l)` in row-major order.
    pub fn index(&self, k: usize, l: usize) -> usize {
        self.rows[..k - 1].iter().sum::<usize>() + l - 1
    }

    /// Cells with the paper's signed coordinates.
    pub fn signed_cells(&self) -> Vec<(i64, i64)> {
        let s = match self.sign {
            Sign::Plus => 1,
            Sign::Minus => -1,
        };
        self.cells()
            .into_iter()
            .map(|(k, l)| (s * k as i64, s * l as i64))
            .collect()
    }
}

pub fn build_diagram(rank: Rank, lambda: &WeightLatticeVector, sign: Sign) -> Result<YoungDiagram> {
    if !in_p(rank, lambda) {
        return Err(Error::NotInP(lambda.coords.clone()));
    }
    let c = &lambda.coords;
    let mut rows: Vec<usize> = c[..rank.m].iter().map(|&x| x as usize).collect();
    let depth = c[rank.m..].iter().copied().max().unwrap_or(0) as usize;
    for d in 1..=depth {
        rows.push(c[rank.m..].iter().filter(|&&x| x as usize >= d).count());
    }
    while rows.last() == Some(&0) {
        rows.pop();
    }
    Ok(YoungDiagram {
        rank,
        sign,
        lambda: lambda.clone(),
        rows,
    })
}

/// A filling of a diagram by indices in `I`, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tableau {
    diagram: Arc<YoungDiagram>,
    entries: Vec<u8>,
}

impl Tableau {
    /// Checked constructor from rows of entries.
    pub fn from_rows(diagram: Arc<YoungDiagram>, rows: &[Vec<u8>]) -> Result<Self> {
        let lens: Vec<usize> = rows.iter().map(Vec::len).collect();
        if lens != diagram.rows {
            return Err(Error::Precondition("rows do not match the diagram".into()));
        }
        let t = Tableau {
            diagram,
            entries: rows.concat(),
        };
        if !t.is_valid() {
            return Err(Error::Precondition("filling violates the tableau rules".into()));
        }
        Ok(t)
    }

    pub fn diagram(&self) -> &YoungDiagram {
        &self.diagram
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    /// `T(k, l)` in positive storage.
    pub fn get(&self, k: usize, l: usize) -> u8 {
        self.entries[self.diagram.index(k, l)]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut at = 0;
        for &r in &self.diagram.rows {
            out.push(self.entries[at..at + r].to_vec());
            at += r;
        }
        out
    }

    /// Cells paired with entries, positive storage, row-major.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), u8)> + '_ {
        self.diagram.cells().into_iter().zip(self.entries.iter().copied())
    }

    /// Checks the three defining conditions through neighbouring cells.
    pub fn is_valid(&self) -> bool {
        let d = &self.diagram;
        let m = d.rank.m as u8;
        let kappa = d.rank.kappa() as u8;
        if self.entries.iter().any(|&x| x == 0 || x > kappa) {
            return false;
        }
        d.cells().into_iter().all(|(k, l)| {
            let v = self.get(k, l);
            let up = (k > 1).then(|| self.get(k - 1, l));
            let left = (l > 1).then(|| self.get(k, l - 1));
            neighbours_ok(d.sign, m, v, up, left)
        })
    }

    /// Entry-wise text in the paper's `young(...)` notation: rows top to
    /// bottom separated by commas, `:` marking empty positions.
    pub fn to_young(&self) -> String {
        render_young(&self.diagram, |k, l| digit(self.get(k, l)))
    }
}

fn digit(x: u8) -> String {
    if x < 10 {
        x.to_string()
    } else {
        format!("{{{x}}}")
    }
}

/// The shape alone in `young(...)` notation, `~` marking a box.
pub fn shape_young(d: &YoungDiagram) -> String {
    render_young(d, |_, _| "~".into())
}

fn render_young(d: &YoungDiagram, cell: impl Fn(usize, usize) -> String) -> String {
    let width = d.rows.first().copied().unwrap_or(0);
    let lines: Vec<String> = match d.sign {
        Sign::Plus => d
            .rows
            .iter()
            .enumerate()
            .map(|(k, &r)| (1..=r).map(|l| cell(k + 1, l)).collect())
            .collect(),
        // Row −k sits above row −(k−1); column −1 is rightmost.
        Sign::Minus => d
            .rows
            .iter()
            .enumerate()
            .rev()
            .map(|(k, &r)| {
                let pad = ":".repeat(width - r);
                let body: String = (1..=r).rev().map(|l| cell(k + 1, l)).collect();
                pad + &body
            })
            .collect(),
    };
    format!("({})", lines.join(","))
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "young{}", self.to_young())
    }
}

impl fmt::Debug for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Tableau {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            sign: Sign,
            lambda: &'a [i64],
            rows: Vec<Vec<u8>>,
            young: String,
        }
        Repr {
            sign: self.diagram.sign,
            lambda: &self.diagram.lambda.coords,
            rows: self.rows(),
            young: self.to_young(),
        }
        .serialize(ser)
    }
}

/// Order pair `lo ≤ hi`, strict vertically when `lo` is even and
/// horizontally when `lo` is odd.
fn pair_ok(m: u8, lo: u8, hi: u8, vertical: bool) -> bool {
    if vertical == (lo <= m) {
        lo < hi
    } else {
        lo <= hi
    }
}

/// Local conditions for a cell value `v` against its up and left
/// neighbours. For the minus sign the current cell plays the smaller role.
fn neighbours_ok(sign: Sign, m: u8, v: u8, up: Option<u8>, left: Option<u8>) -> bool {
    let check = |n: u8, vertical: bool| match sign {
        Sign::Plus => pair_ok(m, n, v, vertical),
        Sign::Minus => pair_ok(m, v, n, vertical),
    };
    up.is_none_or(|u| check(u, true)) && left.is_none_or(|w| check(w, false))
}

/// Depth-first enumeration of `𝓑_±(λ)` in lexicographic row-major order.
pub fn enumerate(rank: Rank, lambda: &WeightLatticeVector, sign: Sign) -> Result<Vec<Tableau>> {
    enumerate_capped(rank, lambda, sign, DEFAULT_CAP)
}

pub fn enumerate_capped(
    rank: Rank,
    lambda: &WeightLatticeVector,
    sign: Sign,
    cap: usize,
) -> Result<Vec<Tableau>> {
    let diagram = Arc::new(build_diagram(rank, lambda, sign)?);
    let mut out = Vec::new();
    for_each_filling(&diagram, cap, |entries| {
        out.push(Tableau {
            diagram: Arc::clone(&diagram),
            entries: entries.to_vec(),
        });
    })?;
    Ok(out)
}

/// Number of fillings without materializing them.
pub fn count(rank: Rank, lambda: &WeightLatticeVector, sign: Sign, cap: usize) -> Result<usize> {
    let diagram = build_diagram(rank, lambda, sign)?;
    let mut n = 0;
    for_each_filling(&diagram, cap, |_| n += 1)?;
    Ok(n)
}

fn for_each_filling(d: &YoungDiagram, cap: usize, mut visit: impl FnMut(&[u8])) -> Result<()> {
    let cells = d.cells();
    let n = cells.len();
    let m = d.rank.m as u8;
    let kappa = d.rank.kappa() as u8;
    let up: Vec<Option<usize>> = cells
        .iter()
        .map(|&(k, l)| (k > 1).then(|| d.index(k - 1, l)))
        .collect();
    let left: Vec<Option<usize>> = cells
        .iter()
        .map(|&(k, l)| (l > 1).then(|| d.index(k, l - 1)))
        .collect();
    let mut vals = vec![0u8; n];
    let mut produced = 0usize;
    if n == 0 {
        visit(&vals);
        return Ok(());
    }
    let mut pos = 0usize;
    loop {
        // Advance the value at `pos` to the next admissible one.
        let mut placed = false;
        while vals[pos] < kappa {
            vals[pos] += 1;
            let v = vals[pos];
            if neighbours_ok(
                d.sign,
                m,
                v,
                up[pos].map(|i| vals[i]),
                left[pos].map(|i| vals[i]),
            ) {
                placed = true;
                break;
            }
        }
        if placed {
            if pos + 1 == n {
                produced += 1;
                if produced > cap {
                    return Err(Error::CapExceeded(cap));
                }
                visit(&vals);
            } else {
                pos += 1;
                vals[pos] = 0;
            }
        } else {
            vals[pos] = 0;
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
        }
    }
}

/// `λ ↦ λ♯ ∈ 𝒫′`, the weight whose diagram in the flipped rank is the transpose.
pub fn transpose_shape(rank: Rank, lambda: &WeightLatticeVector) -> Result<WeightLatticeVector> {
    let d = build_diagram(rank, lambda, Sign::Plus)?;
    let cols = d.cols();
    let rows = d.rows();
    let mut coords = Vec::with_capacity(rank.kappa());
    for j in 1..=rank.n {
        coords.push(cols.get(j - 1).copied().unwrap_or(0) as i64);
    }
    for i in 1..=rank.m {
        let r = rows.get(i - 1).copied().unwrap_or(0);
        coords.push(r.saturating_sub(rank.n) as i64);
    }
    Ok(WeightLatticeVector::new(coords))
}

/// `T ∈ 𝓑_−(λ) ↦ T′ ∈ 𝓑′_+(λ♯)` with `T′(k,l) = κ+1 − T(−l,−k)`.
pub fn transpose_tableau(t: &Tableau) -> Result<Tableau> {
    let d = t.diagram();
    if d.sign != Sign::Minus || !t.is_valid() {
        return Err(Error::Precondition("expected a valid minus-sign tableau".into()));
    }
    let flipped = d.rank.flipped();
    let sharp = transpose_shape(d.rank, &d.lambda)?;
    let target = Arc::new(build_diagram(flipped, &sharp, Sign::Plus)?);
    let k1 = d.rank.kappa() as u8 + 1;
    let rows: Vec<Vec<u8>> = target
        .rows()
        .iter()
        .enumerate()
        .map(|(k, &r)| (1..=r).map(|l| k1 - t.get(l, k + 1)).collect())
        .collect();
    Tableau::from_rows(target, &rows)
}

/// Inverse of [`transpose_tableau`]: `T′ ∈ 𝓑′_+(λ♯) ↦ T ∈ 𝓑_−(λ)`.
pub fn untranspose_tableau(t: &Tableau) -> Result<Tableau> {
    let d = t.diagram();
    if d.sign != Sign::Plus || !t.is_valid() {
        return Err(Error::Precondition("expected a valid plus-sign tableau".into()));
    }
    let orig = d.rank.flipped();
    let lambda = transpose_shape(d.rank, &d.lambda)?;
    let target = Arc::new(build_diagram(orig, &lambda, Sign::Minus)?);
    let k1 = d.rank.kappa() as u8 + 1;
    let rows: Vec<Vec<u8>> = target
        .rows()
        .iter()
        .enumerate()
        .map(|(k, &r)| (1..=r).map(|l| k1 - t.get(l, k + 1)).collect())
        .collect();
    Tableau::from_rows(target, &rows)
}
