//! Mandelbrot percolation: keyed simulation, branching-process analytics and
//! full-subtree witnesses.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Pow, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimate::GridSet;
use crate::pgm::Pgm;
use crate::rational::{format_rational, rational_ln, to_f64, Rational};
use crate::rng::{keyed_u64, threshold};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct PercConfig {
    n: u64,
    d: usize,
    p: Rational,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: u64,
    d: usize,
    #[serde(with = "crate::rational::serde_q")]
    p: Rational,
    #[serde(default)]
    seed: u64,
}

impl TryFrom<RawConfig> for PercConfig {
    type Error = Error;
    fn try_from(raw: RawConfig) -> Result<Self> {
        PercConfig::new(raw.n, raw.d, raw.p, raw.seed)
    }
}

impl From<PercConfig> for RawConfig {
    fn from(c: PercConfig) -> Self {
        RawConfig { n: c.n, d: c.d, p: c.p, seed: c.seed }
    }
}

impl PercConfig {
    pub fn new(n: u64, d: usize, p: Rational, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("subdivision n = {n} must be at least 2")));
        }
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !crate::rational::is_in_open_unit(&p) {
            return Err(invalid(format!("retention probability {} outside (0,1)", format_rational(&p))));
        }
        if children_count(n, d).is_none() {
            return Err(invalid("n^d overflows"));
        }
        Ok(Self { n, d, p, seed })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Number of children of a cube.
    pub fn branching(&self) -> u64 {
        children_count(self.n, self.d).expect("checked at construction")
    }

    pub fn is_supercritical(&self) -> bool {
        supercritical(self.n, self.d, &self.p)
    }
}

fn children_count(n: u64, d: usize) -> Option<u64> {
    n.checked_pow(u32::try_from(d).ok()?)
}

fn supercritical(n: u64, d: usize, p: &Rational) -> bool {
    p * Pow::pow(BigInt::from(n), d) > Rational::one()
}

/// Surviving cubes by level; level `k` lives on the `n^k` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PercLevels {
    n: u64,
    levels: Vec<GridSet>,
}

impl PercLevels {
    /// Checks level shapes and parent closure.
    pub fn from_levels(n: u64, levels: Vec<GridSet>) -> Result<Self> {
        let root = levels.first().ok_or_else(|| invalid("levels must include the root"))?;
        let d = root.dim();
        if root.resolution().iter().any(|&r| r != 1) || root.len() != 1 {
            return Err(invalid("level 0 must be the single root cube"));
        }
        let mut side = 1u64;
        for (k, pair) in levels.windows(2).enumerate() {
            side = side.checked_mul(n).ok_or_else(|| invalid("level resolution overflows"))?;
            let child = &pair[1];
            if child.dim() != d || child.resolution().iter().any(|&r| r != side) {
                return Err(invalid(format!("level {} has the wrong resolution", k + 1)));
            }
            if let Some(c) = child.cells().find(|c| {
                let parent: Vec<u64> = c.iter().map(|x| x / n).collect();
                !pair[0].contains(&parent)
            }) {
                return Err(invalid(format!("cube {c:?} at level {} has no surviving parent", k + 1)));
            }
        }
        Ok(Self { n, levels })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.levels[0].dim()
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &GridSet {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[GridSet] {
        &self.levels
    }

    pub fn survived(&self) -> bool {
        !self.levels.last().expect("root present").is_empty()
    }

    /// `level,x1,...,xd` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level");
        for axis in 1..=self.dim() {
            write!(out, ",x{axis}").unwrap();
        }
        out.push('\n');
        for (k, level) in self.levels.iter().enumerate() {
            for c in level.cells() {
                write!(out, "{k}").unwrap();
                for x in c {
                    write!(out, ",{x}").unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    /// All levels superimposed with darker shades deeper, for planar runs.
    pub fn render(&self, max_side: u32) -> Result<Pgm> {
        if self.dim() != 2 {
            return Err(invalid("only planar percolation renders to images"));
        }
        let finest = self.levels.last().expect("root present").resolution()[0];
        let side = finest.min(max_side as u64).max(1) as u32;
        let mut img = Pgm::blank(side, side);
        let depth = self.depth().max(1) as u32;
        for (k, level) in self.levels.iter().enumerate() {
            let shade = (255 - 255 * k as u32 / depth) as u8;
            let layer = level.render(side, side)?;
            for (dst, &src) in img.pixels.iter_mut().zip(&layer.pixels) {
                if src == 0 {
                    *dst = shade;
                }
            }
        }
        Ok(img)
    }
}

fn child_offsets(n: u64, d: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out.into_iter().flat_map(|v| (0..n).map(move |a| [v.clone(), vec![a]].concat())).collect();
    }
    out
}

fn kept(seed: u64, level: usize, cube: &[u64], t: u128) -> bool {
    (keyed_u64(seed, level as u64, cube) as u128) < t
}

/// Each child of a surviving cube at level `k` is kept iff its keyed draw at
/// level `k+1` falls below the threshold of `p`.
pub fn simulate(config: &PercConfig, depth: usize) -> Result<PercLevels> {
    let d = config.d;
    let t = threshold(&config.p);
    let offsets = child_offsets(config.n, d);
    let mut levels = vec![GridSet::full(vec![1; d])];
    let mut side = 1u64;
    for k in 1..=depth {
        side = side.checked_mul(config.n).ok_or_else(|| invalid(format!("level {k} resolution overflows")))?;
        let parent = levels.last().expect("root present");
        let flat: Vec<u64> = parent
            .cells()
            .collect::<Vec<_>>()
            .par_iter()
            .flat_map_iter(|c| {
                let mut out = Vec::new();
                let mut child = vec![0u64; d];
                for off in &offsets {
                    for axis in 0..d {
                        child[axis] = c[axis] * config.n + off[axis];
                    }
                    if kept(config.seed, k, &child, t) {
                        out.extend_from_slice(&child);
                    }
                }
                out
            })
            .collect();
        levels.push(GridSet::from_flat(vec![side; d], flat)?);
    }
    Ok(PercLevels { n: config.n, levels })
}

/// Whether some cube survives to `depth`; uses the same draws as [`simulate`].
pub fn survives_to(config: &PercConfig, depth: usize) -> bool {
    let t = threshold(&config.p);
    let offsets = child_offsets(config.n, config.d);
    let mut stack: Vec<(usize, Vec<u64>)> = vec![(0, vec![0; config.d])];
    while let Some((k, cube)) = stack.pop() {
        if k == depth {
            return true;
        }
        for off in offsets.iter().rev() {
            let child: Vec<u64> = cube.iter().zip(off).map(|(c, o)| c * config.n + o).collect();
            if kept(config.seed, k + 1, &child, t) {
                stack.push((k + 1, child));
            }
        }
    }
    false
}

fn generating(n: u64, d: usize, p: f64) -> impl Fn(f64) -> f64 {
    let children = children_count(n, d).expect("valid config") as i32;
    move |q| (1.0 - p + p * q).powi(children)
}

/// Extinction probability `q` (least fixed point of the offspring generating
/// function) and `1 − q`.
pub fn extinction_probability(n: u64, d: usize, p: &Rational) -> (f64, f64) {
    if !supercritical(n, d, p) {
        return (1.0, 0.0);
    }
    let f = generating(n, d, to_f64(p));
    let mut q = 0.0;
    for _ in 0..100_000_000u64 {
        let next = f(q);
        if (next - q).abs() < 1e-14 {
            q = next;
            break;
        }
        q = next;
    }
    (q, 1.0 - q)
}

/// `f^k(0)`, the probability that the process dies out by level `k`.
pub fn extinct_by(n: u64, d: usize, p: &Rational, k: usize) -> f64 {
    let f = generating(n, d, to_f64(p));
    (0..k).fold(0.0, |q, _| f(q))
}

/// Probability of survival to level `k`: `1 − f^k(0)`.
pub fn survival_iterate(n: u64, d: usize, p: &Rational, k: usize) -> f64 {
    1.0 - extinct_by(n, d, p, k)
}

fn require_supercritical(n: u64, d: usize, p: &Rational) -> Result<()> {
    if supercritical(n, d, p) {
        Ok(())
    } else {
        Err(Error::NotApplicable(format!(
            "p = {} does not exceed 1/{n}^{d}; the limit set is empty almost surely",
            format_rational(p)
        )))
    }
}

/// `log(n^d p) / log n`. At `p = n^{-d}` the value 0 is returned.
pub fn hausdorff_dim_percolation(n: u64, d: usize, p: &Rational) -> Result<f64> {
    let critical = Rational::new(BigInt::one(), Pow::pow(BigInt::from(n), d));
    if *p == critical {
        return Ok(0.0);
    }
    require_supercritical(n, d, p)?;
    Ok((d as f64 * (n as f64).ln() + rational_ln(p)) / (n as f64).ln())
}

pub const ASSOUAD_NOTE: &str = "almost sure, conditioned on non-extinction; independent of p";
pub const PROJECTION_NOTE: &str = "every orthogonal projection to k dimensions has full Assouad dimension, \
so the set cannot be embedded in a lower dimensional Euclidean space with a bi-Lipschitz map";

/// `d`, on the event of non-extinction.
pub fn assouad_dim_percolation(n: u64, d: usize, p: &Rational) -> Result<f64> {
    require_supercritical(n, d, p)?;
    Ok(d as f64)
}

/// Assouad dimension of every projection onto a `k`-plane: `k`.
pub fn projection_assouad(n: u64, d: usize, p: &Rational, k: usize) -> Result<f64> {
    if k == 0 || k > d {
        return Err(invalid(format!("projection rank {k} outside 1..={d}")));
    }
    require_supercritical(n, d, p)?;
    Ok(k as f64)
}

/// `k(m)`, or its natural logarithm when it does not fit in 64 bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockCount {
    Exact(u64),
    Saturated { ln_value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaQuantities {
    /// `(N^{m+1} − N)/(N − 1) − m` coin tosses along the subtree.
    #[serde(serialize_with = "crate::rational::serde_int::serialize")]
    pub tosses: BigInt,
    pub p_hat: f64,
    pub ln_p_hat: f64,
    pub k_of_m: BlockCount,
}

/// Counts for the event that a fixed cube has a complete `m`-subtree whose
/// leaves all survive forever: `N` children per cube.
pub fn lemma_quantities(children: u64, m: u32, p: &Rational, p_noext: f64) -> Result<LemmaQuantities> {
    if children < 2 || m == 0 {
        return Err(invalid("need at least two children and m >= 1"));
    }
    if !(0.0..=1.0).contains(&p_noext) {
        return Err(invalid("survival probability outside [0,1]"));
    }
    let big_n = BigInt::from(children);
    let leaves: BigInt = Pow::pow(&big_n, m);
    let tosses = (&leaves * &big_n - &big_n) / (&big_n - 1u32) - BigInt::from(m);
    let toss_f = tosses.to_f64().unwrap_or(f64::INFINITY);
    let leaves_f = leaves.to_f64().unwrap_or(f64::INFINITY);
    let ln_p_hat = toss_f * rational_ln(p) + (leaves_f - 1.0) * p_noext.ln();
    let p_hat = ln_p_hat.exp();
    let blocks = if p_hat > 0.0 && p_hat < 1.0 {
        (-std::f64::consts::LN_2 / (-p_hat).ln_1p()).ceil()
    } else if p_hat >= 1.0 {
        1.0
    } else {
        f64::INFINITY
    };
    let k = m as f64 * blocks;
    let k_of_m = if k.is_finite() && k < u64::MAX as f64 {
        BlockCount::Exact(k as u64)
    } else {
        // −log 2 / log(1 − p̂) ≈ log 2 / p̂ for tiny p̂
        BlockCount::Saturated { ln_value: (m as f64 * std::f64::consts::LN_2).ln() - ln_p_hat }
    };
    Ok(LemmaQuantities { tosses, p_hat, ln_p_hat, k_of_m })
}

/// A cube whose complete `m`-level subtree survived.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentWitness {
    pub level: usize,
    pub cube: Vec<u64>,
    pub depth: usize,
    /// `√d n^{-m}`.
    pub bound: f64,
}

impl TangentWitness {
    /// The cube as a window of the unit frame.
    pub fn window(&self, n: u64) -> crate::estimate::Window {
        let side = Pow::pow(BigInt::from(n), self.level);
        let lo = self.cube.iter().map(|&c| Rational::new(c.into(), side.clone())).collect();
        let hi = self.cube.iter().map(|&c| Rational::new((c + 1).into(), side.clone())).collect();
        crate::estimate::Window { lo, hi }
    }
}

/// Largest complete subtree (capped at `m_target`); ties go to the lowest
/// level, then the lexicographically smallest cube.
pub fn tangent_witness_search(levels: &PercLevels, m_target: usize) -> Option<TangentWitness> {
    let depth = levels.depth();
    let n = levels.n;
    let d = levels.dim();
    let children = children_count(n, d).expect("valid levels") as usize;
    // heights[k][i]: complete-subtree height of cube i at level k
    let mut below: Vec<u8> = vec![0; levels.level(depth).len()];
    let mut best: Option<(usize, usize, usize)> = None;
    let cap = m_target.min(u8::MAX as usize) as u8;
    for k in (0..depth).rev() {
        let parents = levels.level(k);
        let kids = levels.level(k + 1);
        let mut count = vec![0usize; parents.len()];
        let mut min_h = vec![u8::MAX; parents.len()];
        let parent_of: Vec<usize> = kids
            .cells()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|c| {
                let parent: Vec<u64> = c.iter().map(|x| x / n).collect();
                parents.index_of(&parent).expect("levels are parent-closed")
            })
            .collect();
        for (ci, &pi) in parent_of.iter().enumerate() {
            count[pi] += 1;
            min_h[pi] = min_h[pi].min(below[ci]);
        }
        let here: Vec<u8> = (0..parents.len())
            .map(|i| if count[i] == children { min_h[i].saturating_add(1).min(cap) } else { 0 })
            .collect();
        for (i, &h) in here.iter().enumerate() {
            let h = h as usize;
            if h == 0 {
                continue;
            }
            // scanning levels upward-last means later (lower) levels overwrite ties
            match best {
                Some((bh, bk, _)) if h < bh || (h == bh && k > bk) => {}
                Some((bh, bk, bi)) if h == bh && k == bk && bi < i => {}
                _ => best = Some((h, k, i)),
            }
        }
        below = here;
    }
    best.map(|(h, k, i)| TangentWitness {
        level: k,
        cube: levels.level(k).cell(i).to_vec(),
        depth: h,
        bound: (d as f64).sqrt() * (n as f64).powi(-(h as i32)),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned {
    pub levels: PercLevels,
    pub seed: u64,
    pub retries: u64,
}

/// Tries seeds `seed, seed+1, …` until the realization survives to `depth`.
pub fn conditioned_sample(config: &PercConfig, depth: usize, max_retries: u64) -> Result<Conditioned> {
    if max_retries == 0 {
        return Err(invalid("max_retries must be at least 1"));
    }
    require_supercritical(config.n, config.d, &config.p)?;
    for attempt in 0..max_retries {
        let trial = config.with_seed(config.seed.wrapping_add(attempt));
        if survives_to(&trial, depth) {
            let levels = simulate(&trial, depth)?;
            return Ok(Conditioned { levels, seed: trial.seed, retries: attempt });
        }
    }
    let (_, p_noext) = extinction_probability(config.n, config.d, &config.p);
    Err(Error::RetriesExhausted {
        depth,
        retries: max_retries,
        survival: survival_iterate(config.n, config.d, &config.p, depth),
        p_noext,
    })
}
