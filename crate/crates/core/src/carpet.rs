//! Random Bedford–McMullen carpets on mixed-radix integer grids.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimate::{local_count, GridSet};
use crate::rational::{format_rational, is_in_open_unit, to_f64, Rational};
use crate::rng::SplitMix64;
use crate::words::{ProbabilityVector, Word};

/// The `m × n` mesh of one letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub m: u64,
    pub n: u64,
}

/// A deterministic carpet IFS: chosen cells `(a, b)` of an `m × n` mesh.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCarpet", into = "RawCarpet")]
pub struct CarpetIFS {
    m: u64,
    n: u64,
    digits: Vec<(u64, u64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCarpet {
    m: u64,
    n: u64,
    digits: Vec<[u64; 2]>,
}

impl TryFrom<RawCarpet> for CarpetIFS {
    type Error = Error;
    fn try_from(raw: RawCarpet) -> Result<Self> {
        CarpetIFS::new(raw.m, raw.n, raw.digits.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<CarpetIFS> for RawCarpet {
    fn from(c: CarpetIFS) -> Self {
        RawCarpet { m: c.m, n: c.n, digits: c.digits.into_iter().map(|(a, b)| [a, b]).collect() }
    }
}

impl CarpetIFS {
    pub fn new(m: u64, n: u64, digits: Vec<(u64, u64)>) -> Result<Self> {
        if m < 2 || n <= m {
            return Err(invalid(format!("carpet grid needs n > m >= 2 (got m = {m}, n = {n})")));
        }
        if digits.is_empty() {
            return Err(invalid("carpet IFS has no chosen rectangles"));
        }
        let mut seen = HashSet::new();
        for &(a, b) in &digits {
            if a >= m || b >= n {
                return Err(invalid(format!("digit ({a},{b}) outside the {m}x{n} grid")));
            }
            if !seen.insert((a, b)) {
                return Err(invalid(format!("digit ({a},{b}) repeated")));
            }
        }
        Ok(Self { m, n, digits })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn grid(&self) -> Grid {
        Grid { m: self.m, n: self.n }
    }

    pub fn digits(&self) -> &[(u64, u64)] {
        &self.digits
    }

    fn column_counts(&self) -> Vec<u64> {
        let mut counts = vec![0; self.m as usize];
        for &(a, _) in &self.digits {
            counts[a as usize] += 1;
        }
        counts
    }

    /// Number of non-empty columns.
    pub fn a(&self) -> u64 {
        self.column_counts().iter().filter(|&&c| c > 0).count() as u64
    }

    /// Maximal column occupancy.
    pub fn b(&self) -> u64 {
        *self.column_counts().iter().max().expect("m >= 2")
    }

    /// Lowest-index column attaining `B`.
    pub fn max_column(&self) -> u64 {
        let counts = self.column_counts();
        let b = self.b();
        counts.iter().position(|&c| c == b).expect("maximum exists") as u64
    }

    /// Sorted distinct non-empty columns.
    pub fn columns(&self) -> Vec<u64> {
        let counts = self.column_counts();
        (0..self.m).filter(|&a| counts[a as usize] > 0).collect()
    }

    /// Sorted rows chosen in column `a`.
    pub fn rows_in_column(&self, a: u64) -> Vec<u64> {
        let mut rows: Vec<u64> = self.digits.iter().filter(|d| d.0 == a).map(|d| d.1).collect();
        rows.sort_unstable();
        rows
    }

    fn column_term(&self) -> f64 {
        (self.a() as f64).ln() / (self.m as f64).ln()
    }

    fn row_term(&self) -> f64 {
        (self.b() as f64).ln() / (self.n as f64).ln()
    }
}

/// A family of carpet IFSs with a probability vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCarpetRifs", into = "RawCarpetRifs")]
pub struct CarpetRIFS {
    ifss: Vec<CarpetIFS>,
    probs: ProbabilityVector,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCarpetRifs {
    ifss: Vec<CarpetIFS>,
    probs: ProbabilityVector,
}

impl TryFrom<RawCarpetRifs> for CarpetRIFS {
    type Error = Error;
    fn try_from(raw: RawCarpetRifs) -> Result<Self> {
        CarpetRIFS::new(raw.ifss, raw.probs)
    }
}

impl From<CarpetRIFS> for RawCarpetRifs {
    fn from(r: CarpetRIFS) -> Self {
        RawCarpetRifs { ifss: r.ifss, probs: r.probs }
    }
}

impl CarpetRIFS {
    pub fn new(ifss: Vec<CarpetIFS>, probs: ProbabilityVector) -> Result<Self> {
        if ifss.is_empty() {
            return Err(invalid("carpet RIFS has no IFSs"));
        }
        if ifss.len() != probs.len() {
            return Err(invalid(format!("{} IFSs but {} probabilities", ifss.len(), probs.len())));
        }
        Ok(Self { ifss, probs })
    }

    pub fn ifss(&self) -> &[CarpetIFS] {
        &self.ifss
    }

    pub fn ifs(&self, letter: usize) -> &CarpetIFS {
        &self.ifss[letter - 1]
    }

    pub fn probs(&self) -> &ProbabilityVector {
        &self.probs
    }

    pub fn alphabet(&self) -> usize {
        self.ifss.len()
    }

    pub fn grids(&self) -> Vec<Grid> {
        self.ifss.iter().map(CarpetIFS::grid).collect()
    }

    pub fn m_max(&self) -> u64 {
        self.ifss.iter().map(|c| c.m).max().expect("non-empty")
    }

    pub fn n_max(&self) -> u64 {
        self.ifss.iter().map(|c| c.n).max().expect("non-empty")
    }

    pub fn is_uniform_grid(&self) -> bool {
        let g = self.ifss[0].grid();
        self.ifss.iter().all(|c| c.grid() == g)
    }
}

/// `log A / log m + log B / log n`.
pub fn mackay_dim(c: &CarpetIFS) -> f64 {
    c.column_term() + c.row_term()
}

/// McMullen's Hausdorff dimension of a deterministic carpet:
/// `log_m Σ_a t_a^{log m / log n}` over column counts `t_a`. Comparison helper.
pub fn mcmullen_hausdorff_dim(c: &CarpetIFS) -> f64 {
    let theta = (c.m as f64).ln() / (c.n as f64).ln();
    let sum: f64 = c.column_counts().iter().filter(|&&t| t > 0).map(|&t| (t as f64).powf(theta)).sum();
    sum.ln() / (c.m as f64).ln()
}

/// Box dimension of a deterministic carpet: `log A / log m + log(N/A) / log n`. Comparison helper.
pub fn carpet_box_dim(c: &CarpetIFS) -> f64 {
    let a = c.a() as f64;
    a.ln() / (c.m as f64).ln() + (c.digits.len() as f64 / a).ln() / (c.n as f64).ln()
}

/// The almost-sure Assouad value and the letters attaining each maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarpetAssouad {
    pub value: f64,
    /// 1-based letter maximizing `log A / log m`.
    pub column_letter: usize,
    /// 1-based letter maximizing `log B / log n`.
    pub row_letter: usize,
}

fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (idx, v)| if v > best.1 { (idx, v) } else { best })
}

/// `max_i log A_i / log m_i + max_i log B_i / log n_i`; ties go to the lowest letter.
pub fn as_assouad_carpet(rifs: &CarpetRIFS) -> CarpetAssouad {
    let (ci, cv) = argmax(rifs.ifss.iter().map(CarpetIFS::column_term));
    let (rj, rv) = argmax(rifs.ifss.iter().map(CarpetIFS::row_term));
    CarpetAssouad { value: cv + rv, column_letter: ci + 1, row_letter: rj + 1 }
}

/// The same value as [`as_assouad_carpet`], valid as an upper bound for every realization.
pub fn sure_upper_carpet(rifs: &CarpetRIFS) -> CarpetAssouad {
    as_assouad_carpet(rifs)
}

/// `Σ p_i D_i` for a family on one common grid.
pub fn gui_li_average(rifs: &CarpetRIFS, per_ifs_dims: &[f64]) -> Result<f64> {
    if !rifs.is_uniform_grid() {
        return Err(Error::NotApplicable("the weighted average needs m_i = m and n_i = n for all letters".into()));
    }
    if per_ifs_dims.len() != rifs.alphabet() {
        return Err(invalid(format!(
            "{} per-IFS dimensions for {} letters",
            per_ifs_dims.len(),
            rifs.alphabet()
        )));
    }
    Ok(rifs.probs.as_slice().iter().zip(per_ifs_dims).map(|(p, d)| to_f64(p) * d).sum())
}

fn scale_index(word: &Word, radices: impl Fn(usize) -> u64, scale: &Rational) -> Result<usize> {
    if !is_in_open_unit(scale) {
        return Err(invalid(format!("scale {} outside (0,1)", format_rational(scale))));
    }
    // Π radix^{-1} ≤ R  ⇔  den(R) ≤ num(R) · Π radix
    let mut product = scale.numer().clone();
    for (idx, &letter) in word.letters().iter().enumerate() {
        product *= BigInt::from(radices(letter));
        if &product >= scale.denom() {
            return Ok(idx + 1);
        }
    }
    let mut needed = word.len();
    let min_radix = word.letters().iter().map(|&l| radices(l)).min().unwrap_or(2).max(2);
    while &product < scale.denom() {
        product *= BigInt::from(min_radix);
        needed += 1;
    }
    Err(Error::InsufficientPrefix { needed, have: word.len() })
}

fn checked_letters(word: &Word, grids: &[Grid]) -> Result<()> {
    word.check(grids.len())
}

/// Least `k` with `Π_{t≤k} n_{ω_t}^{-1} ≤ R`.
pub fn k1_scale(word: &Word, grids: &[Grid], scale: &Rational) -> Result<usize> {
    checked_letters(word, grids)?;
    scale_index(word, |l| grids[l - 1].n, scale)
}

/// Least `k` with `Π_{t≤k} m_{ω_t}^{-1} ≤ R`.
pub fn k2_scale(word: &Word, grids: &[Grid], scale: &Rational) -> Result<usize> {
    checked_letters(word, grids)?;
    scale_index(word, |l| grids[l - 1].m, scale)
}

/// Exact product `Π_{t≤k} radix_{ω_t}^{-1}`.
pub fn radix_product(word: &Word, k: usize, radix: impl Fn(usize) -> u64) -> Rational {
    let den: BigInt = word.letters()[..k].iter().map(|&l| BigInt::from(radix(l))).product();
    Rational::new(BigInt::one(), den)
}

/// The scale indices `(k1, k2)` of `R`, with both sandwich inequalities
/// re-verified in exact arithmetic.
pub fn k_scales(word: &Word, grids: &[Grid], scale: &Rational) -> Result<(usize, usize)> {
    let k2 = k2_scale(word, grids, scale)?;
    let k1 = k1_scale(word, grids, scale)?;
    let n_of = |l: usize| grids[l - 1].n;
    let m_of = |l: usize| grids[l - 1].m;
    let sandwich = |k: usize, f: &dyn Fn(usize) -> u64| {
        radix_product(word, k, f) <= *scale && *scale < radix_product(word, k - 1, f)
    };
    assert!(sandwich(k1, &n_of), "k1 sandwich violated");
    assert!(sandwich(k2, &m_of), "k2 sandwich violated");
    assert!(k2 >= k1, "k2 < k1 despite m < n");
    Ok((k1, k2))
}

/// A random approximate `R`-square: base from the first `k2` digits, height
/// from the first `k1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxSquare {
    pub base: (Rational, Rational),
    pub height: (Rational, Rational),
    pub k1: usize,
    pub k2: usize,
}

impl ApproxSquare {
    pub fn width(&self) -> Rational {
        &self.base.1 - &self.base.0
    }

    pub fn tall(&self) -> Rational {
        &self.height.1 - &self.height.0
    }
}

/// Builds the approximate `R`-square along `digit_path` (0-based indices into
/// each letter's digit list).
pub fn approximate_squares(
    word: &Word,
    rifs: &CarpetRIFS,
    scale: &Rational,
    digit_path: &[usize],
) -> Result<ApproxSquare> {
    let (k1, k2) = k_scales(word, &rifs.grids(), scale)?;
    if digit_path.len() < k2 {
        return Err(Error::InvalidPath(format!("path has {} digits, need {k2}", digit_path.len())));
    }
    let mut x0 = Rational::from_integer(BigInt::from(0));
    let mut y0 = x0.clone();
    let mut w = Rational::one();
    let mut h = Rational::one();
    let mut height = None;
    for (t, &letter) in word.letters()[..k2].iter().enumerate() {
        let ifs = rifs.ifs(letter);
        let &(a, b) = ifs.digits().get(digit_path[t]).ok_or_else(|| {
            Error::InvalidPath(format!(
                "digit index {} at level {} exceeds the {} digits of letter {letter}",
                digit_path[t],
                t + 1,
                ifs.digits().len()
            ))
        })?;
        w /= BigInt::from(ifs.m);
        x0 += &w * BigInt::from(a);
        if t < k1 {
            h /= BigInt::from(ifs.n);
            y0 += &h * BigInt::from(b);
        }
        if t + 1 == k1 {
            height = Some((y0.clone(), &y0 + &h));
        }
    }
    Ok(ApproxSquare {
        base: (x0.clone(), x0 + w),
        height: height.expect("k1 >= 1"),
        k1,
        k2,
    })
}

/// Level-`k` occupancy of a carpet realization on its mixed-radix grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarpetGrid {
    pub depth: usize,
    pub word: Word,
    pub cells: GridSet,
}

impl CarpetGrid {
    /// Width of the column containing `x` after collapsing to level `level`.
    fn coarsen(&self, coord: u64, level: usize, radix: impl Fn(usize) -> u64) -> u64 {
        let div: u64 = self.word.letters()[level..self.depth].iter().map(|&l| radix(l)).product();
        coord / div
    }
}

/// All depth-`k` digit paths for the realization `word`.
pub fn carpet_grid(word: &Word, rifs: &CarpetRIFS, depth: usize) -> Result<CarpetGrid> {
    if depth > word.len() {
        return Err(invalid(format!("depth {depth} exceeds word length {}", word.len())));
    }
    let word = word.prefix(depth);
    word.check(rifs.alphabet())?;
    let mut width: u64 = 1;
    let mut height: u64 = 1;
    let mut cells: Vec<(u64, u64)> = vec![(0, 0)];
    for &letter in word.letters() {
        let ifs = rifs.ifs(letter);
        width = width.checked_mul(ifs.m).ok_or_else(|| invalid("grid width overflows u64"))?;
        height = height.checked_mul(ifs.n).ok_or_else(|| invalid("grid height overflows u64"))?;
        let mut next = Vec::with_capacity(cells.len() * ifs.digits.len());
        for &(x, y) in &cells {
            for &(a, b) in &ifs.digits {
                next.push((x * ifs.m + a, y * ifs.n + b));
            }
        }
        cells = next;
    }
    let flat = cells.into_iter().flat_map(|(x, y)| [x, y]).collect();
    let cells = GridSet::from_flat(vec![width, height], flat)?;
    Ok(CarpetGrid { depth, word, cells })
}

/// One `(x, R, r)` covering probe; `x` is an occupied cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSample {
    pub cell: [u64; 2],
    pub outer: Rational,
    pub inner: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringReport {
    pub samples: usize,
    pub violations: usize,
    pub exponent: f64,
    pub constant: f64,
    /// Largest `count / (C (R/r)^s)` over approximate-square counts.
    pub max_ratio: f64,
    /// Largest Euclidean-ball count ratio, for comparison only.
    pub max_ball_ratio: f64,
}

/// Checks `N_r(Q ∩ F) ≤ m_max n_max (R/r)^s` with `Q` the approximate
/// `R`-square containing each sampled cell, counting the approximate
/// `r`-squares that meet the occupancy.
pub fn covering_upper_check(
    word: &Word,
    rifs: &CarpetRIFS,
    grid: &CarpetGrid,
    samples: &[CoverSample],
) -> Result<CoveringReport> {
    let grids = rifs.grids();
    let s = as_assouad_carpet(rifs).value;
    let constant = (rifs.m_max() * rifs.n_max()) as f64;
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    let mut max_ball_ratio: f64 = 0.0;
    for sample in samples {
        if !grid.cells.contains(&sample.cell) {
            return Err(invalid(format!("sample cell {:?} is not occupied", sample.cell)));
        }
        if sample.inner > sample.outer {
            return Err(invalid("inner scale exceeds outer scale"));
        }
        let (k1_big, k2_big) = k_scales(word, &grids, &sample.outer)?;
        let (k1_small, k2_small) = k_scales(word, &grids, &sample.inner)?;
        if k2_small > grid.depth {
            return Err(Error::Scale(format!(
                "r = {} needs level {k2_small} but the grid has depth {}",
                format_rational(&sample.inner),
                grid.depth
            )));
        }
        let m_of = |l: usize| grids[l - 1].m;
        let n_of = |l: usize| grids[l - 1].n;
        let qx = grid.coarsen(sample.cell[0], k2_big, m_of);
        let qy = grid.coarsen(sample.cell[1], k1_big, n_of);
        let x_span: u64 = grid.word.letters()[k2_big..grid.depth].iter().map(|&l| m_of(l)).product();
        let y_span: u64 = grid.word.letters()[k1_big..grid.depth].iter().map(|&l| n_of(l)).product();
        let lo = [qx * x_span, qy * y_span];
        let hi = [lo[0] + x_span - 1, lo[1] + y_span - 1];
        let mut squares = HashSet::new();
        grid.cells.for_each_in_box(&lo, &hi, |c| {
            squares.insert((grid.coarsen(c[0], k2_small, m_of), grid.coarsen(c[1], k1_small, n_of)));
        });
        let ratio_rr = to_f64(&sample.outer) / to_f64(&sample.inner);
        let bound = constant * ratio_rr.powf(s);
        let count = squares.len() as f64;
        if count > bound * (1.0 + 1e-12) {
            violations += 1;
        }
        max_ratio = max_ratio.max(count / bound);
        let inner = to_f64(&sample.inner);
        if inner >= grid.cells.max_cell_side() {
            let ball = local_count(&grid.cells, &sample.cell, to_f64(&sample.outer), inner)? as f64;
            max_ball_ratio = max_ball_ratio.max(ball / bound);
        }
    }
    Ok(CoveringReport { samples: samples.len(), violations, exponent: s, constant, max_ratio, max_ball_ratio })
}

/// Draws covering probes with log-uniform `R ∈ [2^-10, 1)` and `r ∈ [r_min, R]`,
/// where `r_min` is the smallest scale resolvable at the grid depth.
pub fn sample_cover_triples(grid: &CarpetGrid, rifs: &CarpetRIFS, count: usize, seed: u64) -> Vec<CoverSample> {
    let mut rng = SplitMix64::new(seed);
    let m_finest = radix_product(&grid.word, grid.depth, |l| rifs.ifs(l).m);
    let r_min = to_f64(&m_finest).max(1e-9);
    let denom = 1u64 << 40;
    let to_rational = |v: f64| {
        let num = ((v * denom as f64).ceil() as u64).clamp(1, denom - 1);
        Rational::new(BigInt::from(num), BigInt::from(denom))
    };
    (0..count)
        .map(|_| {
            let idx = rng.below(grid.cells.len() as u64) as usize;
            let c = grid.cells.cell(idx);
            let outer_f = (-(rng.unit_f64() * 10.0) * std::f64::consts::LN_2).exp().max(r_min);
            let outer = to_rational(outer_f.min(1.0 - 1e-9));
            let outer_f = to_f64(&outer);
            let lo = r_min.ln();
            let hi = outer_f.ln();
            let inner_f = if hi > lo { (lo + rng.unit_f64() * (hi - lo)).exp() } else { outer_f };
            let mut inner = to_rational(inner_f.max(r_min));
            if inner > outer {
                inner = outer.clone();
            }
            if inner < m_finest {
                inner = m_finest.clone();
            }
            CoverSample { cell: [c[0], c[1]], outer, inner }
        })
        .collect()
}

/// Level-`level` approximation of `π₁(F_i) × E_j` as a grid set on the
/// `m_i^level × n_j^level` mesh.
pub fn tangent_product_target(rifs: &CarpetRIFS, i: usize, j: usize, level: usize) -> Result<GridSet> {
    for l in [i, j] {
        if l == 0 || l > rifs.alphabet() {
            return Err(invalid(format!("letter {l} outside the alphabet")));
        }
    }
    let col = rifs.ifs(i);
    let row = rifs.ifs(j);
    let xs = digit_expansions(&col.columns(), col.m, level);
    let ys = digit_expansions(&row.rows_in_column(row.max_column()), row.n, level);
    let width = Pow::pow(BigInt::from(col.m), level);
    let height = Pow::pow(BigInt::from(row.n), level);
    let width: u64 = width.try_into().map_err(|_| invalid("target width overflows u64"))?;
    let height: u64 = height.try_into().map_err(|_| invalid("target height overflows u64"))?;
    let flat = xs.iter().flat_map(|&x| ys.iter().flat_map(move |&y| [x, y])).collect();
    GridSet::from_flat(vec![width, height], flat)
}

/// All base-`radix` numbers of `level` digits drawn from `digits`.
fn digit_expansions(digits: &[u64], radix: u64, level: usize) -> Vec<u64> {
    let mut out = vec![0u64];
    for _ in 0..level {
        out = out.iter().flat_map(|&v| digits.iter().map(move |&d| v * radix + d)).collect();
    }
    out
}

/// Read-only proof quantities of the measure-one argument for the good set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleQuantities {
    /// `l(n) = ⌈−log 2 / log(1 − p_j^n p_i^n)⌉`.
    pub blocks: u64,
    /// `θ = max log n_i / min log m_i`.
    pub theta: f64,
    /// `K_n(1), …, K_n(l(n)+1)` starting from the supplied `K(n)`, rounded up.
    pub offsets: Vec<u64>,
}

pub fn schedule_quantities(rifs: &CarpetRIFS, n: u64, i: usize, j: usize, start: u64) -> Result<ScheduleQuantities> {
    if n == 0 {
        return Err(invalid("block length must be positive"));
    }
    let pi = to_f64(rifs.probs().get(i));
    let pj = to_f64(rifs.probs().get(j));
    let hit = (pj * pi).powi(n as i32);
    let blocks = if hit >= 1.0 {
        1
    } else {
        (-std::f64::consts::LN_2 / (-hit).ln_1p()).ceil() as u64
    };
    let theta = rifs.ifss().iter().map(|c| (c.n as f64).ln()).fold(0.0, f64::max)
        / rifs.ifss().iter().map(|c| (c.m as f64).ln()).fold(f64::INFINITY, f64::min);
    let mut offsets = vec![start];
    for _ in 0..blocks.min(10_000) {
        let last = *offsets.last().expect("non-empty") as f64;
        offsets.push((theta * last + n as f64).ceil() as u64);
    }
    Ok(ScheduleQuantities { blocks, theta, offsets })
}

/// The two-letter system on a `2 × 3` mesh: the top row and the right column.
pub fn line_pair_example() -> CarpetRIFS {
    let top = CarpetIFS::new(2, 3, vec![(0, 2), (1, 2)]).unwrap();
    let right = CarpetIFS::new(2, 3, vec![(1, 0), (1, 1), (1, 2)]).unwrap();
    CarpetRIFS::new(vec![top, right], ProbabilityVector::uniform(2)).unwrap()
}
