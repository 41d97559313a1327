//! Integer-grid occupancy sets, covering counts, Hausdorff distances and blow-ups.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::pgm::Pgm;
use crate::rational::{format_rational, Rational};
use crate::rng::SplitMix64;

/// Occupied cells of a regular grid over the unit frame `[0,1]^d`.
///
/// Cells are stored flat and lexicographically sorted, `dim` coordinates each.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridSet {
    resolution: Vec<u64>,
    coords: Vec<u64>,
}

impl GridSet {
    pub fn from_flat(resolution: Vec<u64>, flat: Vec<u64>) -> Result<Self> {
        let d = resolution.len();
        if d == 0 {
            return Err(invalid("grid needs at least one axis"));
        }
        if resolution.contains(&0) {
            return Err(invalid("grid resolution must be positive on every axis"));
        }
        if !flat.len().is_multiple_of(d) {
            return Err(invalid(format!("{} coordinates do not split into {d}-tuples", flat.len())));
        }
        if let Some(c) = flat.chunks_exact(d).find(|c| c.iter().zip(&resolution).any(|(x, r)| x >= r)) {
            return Err(invalid(format!("cell {c:?} outside resolution {resolution:?}")));
        }
        let bits: Vec<u32> = resolution.iter().map(|&r| 64 - (r - 1).leading_zeros()).collect();
        if bits.iter().sum::<u32>() <= 128 {
            let mut keys: Vec<u128> = flat
                .par_chunks_exact(d)
                .map(|c| c.iter().zip(&bits).fold(0u128, |acc, (&x, &b)| (acc << b) | x as u128))
                .collect();
            keys.par_sort_unstable();
            keys.dedup();
            let mut coords = vec![0u64; keys.len() * d];
            coords.par_chunks_exact_mut(d).zip(keys.par_iter()).for_each(|(out, &key)| {
                let mut k = key;
                for axis in (0..d).rev() {
                    out[axis] = (k & ((1u128 << bits[axis]) - 1)) as u64;
                    k >>= bits[axis];
                }
            });
            return Ok(Self { resolution, coords });
        }
        let mut cells: Vec<&[u64]> = flat.chunks_exact(d).collect();
        cells.par_sort_unstable();
        cells.dedup();
        let coords = cells.concat();
        Ok(Self { resolution, coords })
    }

    pub fn from_cells(resolution: Vec<u64>, cells: Vec<Vec<u64>>) -> Result<Self> {
        let d = resolution.len();
        if let Some(c) = cells.iter().find(|c| c.len() != d) {
            return Err(invalid(format!("cell {c:?} has the wrong dimension")));
        }
        Self::from_flat(resolution, cells.concat())
    }

    pub fn empty(resolution: Vec<u64>) -> Self {
        Self { resolution, coords: Vec::new() }
    }

    /// Every cell of the grid.
    pub fn full(resolution: Vec<u64>) -> Self {
        let mut coords = Vec::new();
        let total: u64 = resolution.iter().product();
        let d = resolution.len();
        let mut cur = vec![0u64; d];
        for _ in 0..total {
            coords.extend_from_slice(&cur);
            for axis in (0..d).rev() {
                cur[axis] += 1;
                if cur[axis] < resolution[axis] {
                    break;
                }
                cur[axis] = 0;
            }
        }
        Self { resolution, coords }
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn resolution(&self) -> &[u64] {
        &self.resolution
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn cell(&self, idx: usize) -> &[u64] {
        let d = self.dim();
        &self.coords[idx * d..(idx + 1) * d]
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = &[u64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    pub fn contains(&self, cell: &[u64]) -> bool {
        if cell.len() != self.dim() {
            return false;
        }
        let idx = self.lower_bound(cell);
        idx < self.len() && self.cell(idx) == cell
    }

    /// Position of `cell` in the sorted order.
    pub fn index_of(&self, cell: &[u64]) -> Option<usize> {
        let idx = self.lower_bound(cell);
        (idx < self.len() && self.cell(idx) == cell).then_some(idx)
    }

    fn lower_bound(&self, cell: &[u64]) -> usize {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.cell(mid) < cell {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Center of a cell in the unit frame.
    pub fn center(&self, cell: &[u64]) -> Vec<f64> {
        cell.iter().zip(&self.resolution).map(|(&c, &r)| (c as f64 + 0.5) / r as f64).collect()
    }

    /// Longest cell side in the unit frame.
    pub fn max_cell_side(&self) -> f64 {
        self.resolution.iter().map(|&r| 1.0 / r as f64).fold(0.0, f64::max)
    }

    /// Cell diagonal in the unit frame.
    pub fn cell_diagonal(&self) -> f64 {
        self.resolution.iter().map(|&r| (1.0 / r as f64).powi(2)).sum::<f64>().sqrt()
    }

    /// Calls `f` on every occupied cell with `lo ≤ c ≤ hi` coordinatewise, in order.
    pub fn for_each_in_box(&self, lo: &[u64], hi: &[u64], mut f: impl FnMut(&[u64])) {
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return;
        }
        self.range_rec(0, self.len(), 0, lo, hi, &mut f);
    }

    fn range_rec(&self, start: usize, end: usize, axis: usize, lo: &[u64], hi: &[u64], f: &mut impl FnMut(&[u64])) {
        let d = self.dim();
        let key = |idx: usize| self.coords[idx * d + axis];
        let first = |pred: &dyn Fn(u64) -> bool| {
            let (mut a, mut b) = (start, end);
            while a < b {
                let mid = (a + b) / 2;
                if pred(key(mid)) {
                    a = mid + 1;
                } else {
                    b = mid;
                }
            }
            a
        };
        let a = first(&|v| v < lo[axis]);
        let b = first(&|v| v <= hi[axis]);
        if axis + 1 == d {
            for idx in a..b {
                f(self.cell(idx));
            }
            return;
        }
        let mut s = a;
        while s < b {
            let v = key(s);
            let (mut x, mut y) = (s, b);
            while x < y {
                let mid = (x + y) / 2;
                if key(mid) <= v {
                    x = mid + 1;
                } else {
                    y = mid;
                }
            }
            self.range_rec(s, x, axis + 1, lo, hi, f);
            s = x;
        }
    }

    pub fn any_in_box(&self, lo: &[u64], hi: &[u64]) -> bool {
        let mut found = false;
        self.for_each_in_box(lo, hi, |_| found = true);
        found
    }

    /// Coordinate projection onto the listed axes.
    pub fn project(&self, axes: &[usize]) -> Result<GridSet> {
        if axes.is_empty() || axes.iter().any(|&a| a >= self.dim()) {
            return Err(invalid(format!("projection axes {axes:?} invalid for dimension {}", self.dim())));
        }
        let resolution = axes.iter().map(|&a| self.resolution[a]).collect();
        let flat = self.cells().flat_map(|c| axes.iter().map(move |&a| c[a])).collect();
        GridSet::from_flat(resolution, flat)
    }

    /// Interchange text: a `resolution,...` header followed by one cell per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("resolution");
        for r in &self.resolution {
            write!(out, ",{r}").unwrap();
        }
        out.push('\n');
        for c in self.cells() {
            let row: Vec<String> = c.iter().map(u64::to_string).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<GridSet> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| invalid("empty grid file"))?;
        let mut fields = header.split(',');
        if fields.next().map(str::trim) != Some("resolution") {
            return Err(invalid("grid file must start with a resolution header"));
        }
        let parse = |s: &str, line: usize| {
            s.trim().parse::<u64>().map_err(|e| invalid(format!("line {line}: {e}")))
        };
        let resolution = fields.map(|s| parse(s, 1)).collect::<Result<Vec<_>>>()?;
        let mut flat = Vec::new();
        for (idx, line) in lines.enumerate() {
            let row = line.split(',').map(|s| parse(s, idx + 2)).collect::<Result<Vec<_>>>()?;
            if row.len() != resolution.len() {
                return Err(invalid(format!("line {}: expected {} coordinates", idx + 2, resolution.len())));
            }
            flat.extend(row);
        }
        GridSet::from_flat(resolution, flat)
    }

    /// Renders a planar set, occupied pixels black, `y` increasing upwards.
    pub fn render(&self, width: u32, height: u32) -> Result<Pgm> {
        if self.dim() != 2 {
            return Err(invalid("only planar sets render to images"));
        }
        let mut img = Pgm::blank(width, height);
        let (rx, ry) = (self.resolution[0] as u128, self.resolution[1] as u128);
        for c in self.cells() {
            let x0 = (c[0] as u128 * width as u128 / rx) as u32;
            let x1 = (((c[0] as u128 + 1) * width as u128).div_ceil(rx) as u32).max(x0 + 1);
            let y0 = (c[1] as u128 * height as u128 / ry) as u32;
            let y1 = (((c[1] as u128 + 1) * height as u128).div_ceil(ry) as u32).max(y0 + 1);
            for y in y0..y1.min(height) {
                for x in x0..x1.min(width) {
                    img.set(x, height - 1 - y, 0);
                }
            }
        }
        Ok(img)
    }

    /// Native resolution when it fits in `max_side`, otherwise scaled down per axis.
    pub fn render_fit(&self, max_side: u32) -> Result<Pgm> {
        if self.dim() != 2 {
            return Err(invalid("only planar sets render to images"));
        }
        let fit = |r: u64| r.min(max_side as u64).max(1) as u32;
        self.render(fit(self.resolution[0]), fit(self.resolution[1]))
    }
}

fn check_cell(s: &GridSet, cell: &[u64]) -> Result<()> {
    if !s.contains(cell) {
        return Err(invalid(format!("center {cell:?} is not an occupied cell")));
    }
    Ok(())
}

/// Number of origin-aligned side-`r` squares needed to cover the occupied
/// cell centers within distance `R` of the center of `cell`.
pub fn local_count(s: &GridSet, cell: &[u64], outer: f64, inner: f64) -> Result<usize> {
    check_cell(s, cell)?;
    if !(outer > 0.0 && inner > 0.0) {
        return Err(invalid("scales must be positive"));
    }
    if inner < s.max_cell_side() * (1.0 - 1e-12) {
        return Err(Error::Scale(format!(
            "r = {inner} is below the cell side {}",
            s.max_cell_side()
        )));
    }
    let x = s.center(cell);
    let mut lo = Vec::with_capacity(s.dim());
    let mut hi = Vec::with_capacity(s.dim());
    for (axis, &res) in s.resolution.iter().enumerate() {
        let rf = res as f64;
        let a = ((x[axis] - outer) * rf - 0.5).ceil().max(0.0);
        let b = ((x[axis] + outer) * rf - 0.5).floor().min(rf - 1.0);
        lo.push(a as u64);
        hi.push(b as u64);
    }
    let squares_per_axis = (1.0 / inner).ceil() as u128 + 1;
    let outer_sq = outer * outer;
    let mut keys: Vec<u128> = Vec::new();
    s.for_each_in_box(&lo, &hi, |c| {
        let y = s.center(c);
        let dist: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        if dist <= outer_sq * (1.0 + 1e-12) {
            let key = y.iter().fold(0u128, |acc, &v| acc * squares_per_axis + (v / inner).floor() as u128);
            keys.push(key);
        }
    });
    keys.sort_unstable();
    keys.dedup();
    Ok(keys.len())
}

/// `(R, r)` pairs with `0 < r < R ≤ ρ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleLadder {
    pub rho: f64,
    pub pairs: Vec<(f64, f64)>,
}

pub const DEFAULT_RHO: f64 = 0.25;

impl ScaleLadder {
    pub fn new(rho: f64, pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(invalid("empty scale ladder"));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(invalid(format!("outer-scale cap {rho} outside (0,1]")));
        }
        for &(outer, inner) in &pairs {
            if !(inner > 0.0 && inner < outer && outer <= rho * (1.0 + 1e-12)) {
                return Err(invalid(format!("pair (R = {outer}, r = {inner}) violates 0 < r < R <= {rho}")));
            }
        }
        Ok(Self { rho, pairs })
    }

    /// Dyadic ladder for `s`: `R ∈ {ρ, ρ/2}` and `r = R 2^{-j}`, `j ≥ 2`, down
    /// to one cell. Ratios below 4 are left out since the ball boundary
    /// dominates those counts.
    pub fn dyadic(s: &GridSet, rho: f64) -> Result<Self> {
        let cell = s.max_cell_side();
        let mut pairs = Vec::new();
        for outer in [rho, rho / 2.0] {
            let mut inner = outer / 4.0;
            while inner >= cell * (1.0 - 1e-12) {
                pairs.push((outer, inner));
                inner /= 2.0;
            }
        }
        Self::new(rho, pairs)
    }

    /// Span of `R/r` in decades.
    pub fn decades(&self) -> f64 {
        let ratios = self.pairs.iter().map(|(a, b)| a / b);
        let hi = ratios.clone().fold(0.0, f64::max);
        let lo = ratios.fold(f64::INFINITY, f64::min);
        (hi / lo).log10()
    }

    pub fn check_resolvable(&self, s: &GridSet) -> Result<()> {
        let cell = s.max_cell_side();
        match self.pairs.iter().find(|p| p.1 < cell * (1.0 - 1e-12)) {
            Some(p) => Err(Error::Scale(format!("r = {} is below the cell side {cell}", p.1))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centers {
    All,
    Sample { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCount {
    pub outer: f64,
    pub inner: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssouadEstimate {
    pub counts: Vec<PairCount>,
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub ladder: ScaleLadder,
}

impl AssouadEstimate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,r,sup_count\n");
        for c in &self.counts {
            writeln!(out, "{},{},{}", c.outer, c.inner, c.count).unwrap();
        }
        writeln!(out, "# exponent,{}", self.exponent).unwrap();
        writeln!(out, "# residual,{}", self.residual).unwrap();
        out
    }
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, rms residual)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    (slope, icpt, (rss / n).sqrt())
}

fn chosen_centers(s: &GridSet, centers: Centers) -> Vec<usize> {
    match centers {
        Centers::All => (0..s.len()).collect(),
        Centers::Sample { count, seed } => {
            if count >= s.len() {
                return (0..s.len()).collect();
            }
            let mut rng = SplitMix64::new(seed);
            let mut picked: Vec<usize> = (0..count).map(|_| rng.below(s.len() as u64) as usize).collect();
            picked.sort_unstable();
            picked.dedup();
            picked
        }
    }
}

/// Fits `log M(R,r) ≈ C + α log(R/r)` with `M` the largest [`local_count`] over the centers.
pub fn assouad_estimate(s: &GridSet, ladder: &ScaleLadder, centers: Centers) -> Result<AssouadEstimate> {
    if s.is_empty() {
        return Err(invalid("cannot estimate on an empty set"));
    }
    if ladder.pairs.is_empty() {
        return Err(invalid("empty scale ladder"));
    }
    ladder.check_resolvable(s)?;
    let idx = chosen_centers(s, centers);
    let counts = ladder
        .pairs
        .iter()
        .map(|&(outer, inner)| {
            let count = idx
                .par_iter()
                .map(|&i| local_count(s, s.cell(i), outer, inner))
                .try_reduce(|| 0, |a, b| Ok(a.max(b)))?;
            Ok(PairCount { outer, inner, count })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = counts.iter().map(|c| (c.outer / c.inner).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.count as f64).ln()).collect();
    let (exponent, intercept, residual) = least_squares(&xs, &ys);
    Ok(AssouadEstimate { counts, exponent: exponent.max(0.0), intercept, residual, ladder: ladder.clone() })
}

fn check_pair(a: &GridSet, b: &GridSet) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("distance needs non-empty sets"));
    }
    if a.dim() != b.dim() {
        return Err(invalid(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Squared distance from `x` to the nearest center of `b`, searching boxes
/// of growing radius; `None` if nothing lies within `cap`.
fn nearest_sq(b: &GridSet, x: &[f64], cap: Option<f64>) -> Option<f64> {
    let d = b.dim();
    let mut radius = b.max_cell_side();
    loop {
        let r = cap.map_or(radius, |c| c.min(radius));
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for (&xa, &res) in x.iter().zip(&b.resolution) {
            let rf = res as f64;
            lo.push(((xa - r) * rf - 0.5).ceil().clamp(0.0, rf - 1.0) as u64);
            hi.push(((xa + r) * rf - 0.5).floor().clamp(-1.0, rf - 1.0).max(0.0) as u64);
        }
        let mut best = f64::INFINITY;
        b.for_each_in_box(&lo, &hi, |c| {
            let y = b.center(c);
            let dist: f64 = x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum();
            best = best.min(dist);
        });
        // Everything in the box is exact; nearer points outside it are impossible
        // once the best distance is within the box half-width.
        if best <= r * r {
            return Some(best);
        }
        if cap.is_some_and(|c| r >= c) {
            return None;
        }
        if radius >= 1.0 {
            // the box already covers the whole frame
            return (best.is_finite() && cap.is_none_or(|c| best <= c * c)).then_some(best);
        }
        radius *= 2.0;
    }
}

fn directed(a: &GridSet, b: &GridSet) -> f64 {
    let sup_sq = a
        .cells()
        .collect::<Vec<_>>()
        .par_chunks(256)
        .map(|chunk| {
            let mut local: f64 = 0.0;
            for c in chunk {
                let x = a.center(c);
                if b.contains(c) && a.resolution == b.resolution {
                    continue;
                }
                if local > 0.0 && nearest_sq(b, &x, Some(local.sqrt())).is_some() {
                    continue;
                }
                let dist = nearest_sq(b, &x, None).expect("b is non-empty");
                local = local.max(dist);
            }
            local
        })
        .reduce(|| 0.0, f64::max);
    sup_sq.sqrt()
}

/// `sup_{a∈A} inf_{b∈B} |a − b|` over cell centers in the unit frame.
pub fn pseudo_hausdorff(a: &GridSet, b: &GridSet) -> Result<f64> {
    check_pair(a, b)?;
    Ok(directed(a, b))
}

/// Hausdorff distance between the cell-center sets.
pub fn hausdorff_distance(a: &GridSet, b: &GridSet) -> Result<f64> {
    check_pair(a, b)?;
    Ok(directed(a, b).max(directed(b, a)))
}

/// An axis-aligned rational rectangle `[lo, hi]` in the unit frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

impl Window {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(invalid("window corners must have the same positive dimension"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(invalid("window sides must be positive"));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit(d: usize) -> Self {
        Self { lo: vec![Rational::zero(); d], hi: vec![Rational::from_integer(1.into()); d] }
    }

    pub fn describe(&self) -> String {
        let side = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(",");
        format!("[{}]..[{}]", side(&self.lo), side(&self.hi))
    }
}

fn grid_index(v: &Rational, res: u64, what: &str) -> Result<u64> {
    let scaled = v * BigInt::from(res);
    if !scaled.is_integer() {
        return Err(invalid(format!("window {what} {} is not on a grid line of resolution {res}", format_rational(v))));
    }
    scaled.to_integer().to_u64().ok_or_else(|| invalid("window index overflows"))
}

/// Maps the cells inside a grid-aligned window affinely onto the unit frame.
pub fn blowup(s: &GridSet, window: &Window) -> Result<GridSet> {
    if window.lo.len() != s.dim() {
        return Err(invalid(format!("window dimension {} differs from set dimension {}", window.lo.len(), s.dim())));
    }
    let zero = Rational::zero();
    let one = Rational::from_integer(1.into());
    if window.lo.iter().any(|v| v < &zero) || window.hi.iter().any(|v| v > &one) {
        return Err(invalid(format!("window {} leaves the unit frame", window.describe())));
    }
    let mut lo = Vec::with_capacity(s.dim());
    let mut hi = Vec::with_capacity(s.dim());
    let mut res = Vec::with_capacity(s.dim());
    for axis in 0..s.dim() {
        let a = grid_index(&window.lo[axis], s.resolution[axis], "corner")?;
        let b = grid_index(&window.hi[axis], s.resolution[axis], "corner")?;
        if b <= a {
            return Err(invalid("window is thinner than one cell"));
        }
        lo.push(a);
        hi.push(b - 1);
        res.push(b - a);
    }
    let mut flat = Vec::new();
    s.for_each_in_box(&lo, &hi, |c| flat.extend(c.iter().zip(&lo).map(|(x, l)| x - l)));
    if flat.is_empty() {
        return Err(Error::Scale(format!("window {} contains no occupied cells", window.describe())));
    }
    GridSet::from_flat(res, flat)
}

/// One blow-up stage: the set, its window and the comparison target.
#[derive(Debug, Clone)]
pub struct TangentStage {
    pub set: GridSet,
    pub window: Window,
    pub target: GridSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentConvergence {
    pub distances: Vec<f64>,
    /// Whether each distance is within the matching bound, when bounds were given.
    pub dominated: Option<bool>,
}

pub fn tangent_convergence(stages: &[TangentStage], bounds: Option<&[f64]>) -> Result<TangentConvergence> {
    if stages.len() < 2 {
        return Err(invalid("tangent convergence needs at least two stages"));
    }
    if let Some(b) = bounds {
        if b.len() != stages.len() {
            return Err(invalid(format!("{} bounds for {} stages", b.len(), stages.len())));
        }
    }
    let distances = stages
        .iter()
        .map(|st| hausdorff_distance(&blowup(&st.set, &st.window)?, &st.target))
        .collect::<Result<Vec<_>>>()?;
    let dominated = bounds.map(|b| distances.iter().zip(b).all(|(d, bound)| d <= bound));
    Ok(TangentConvergence { distances, dominated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn brute_directed(a: &GridSet, b: &GridSet) -> f64 {
        a.cells()
            .map(|c| {
                let x = a.center(c);
                b.cells()
                    .map(|e| {
                        let y = b.center(e);
                        x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
            .sqrt()
    }

    fn brute_count(s: &GridSet, cell: &[u64], outer: f64, inner: f64) -> usize {
        let x = s.center(cell);
        let mut keys: Vec<Vec<i64>> = s
            .cells()
            .filter(|c| {
                let y = s.center(c);
                x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() <= outer * outer * (1.0 + 1e-12)
            })
            .map(|c| s.center(c).iter().map(|v| (v / inner).floor() as i64).collect())
            .collect();
        keys.sort();
        keys.dedup();
        keys.len()
    }

    #[test]
    fn construction_and_queries() {
        let g = GridSet::from_cells(vec![4, 4], vec![vec![3, 1], vec![0, 2], vec![3, 1]]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.cell(0), &[0, 2]);
        assert!(g.contains(&[3, 1]));
        assert!(!g.contains(&[1, 3]));
        assert!(GridSet::from_cells(vec![4, 4], vec![vec![4, 0]]).is_err());
        let full = GridSet::full(vec![3, 2]);
        assert_eq!(full.len(), 6);
        let mut seen = Vec::new();
        full.for_each_in_box(&[1, 1], &[2, 1], |c| seen.push(c.to_vec()));
        assert_eq!(seen, vec![vec![1, 1], vec![2, 1]]);
        assert_eq!(full.project(&[0]).unwrap(), GridSet::full(vec![3]));
    }

    #[test]
    fn csv_round_trip() {
        let g = GridSet::from_cells(vec![8, 27], vec![vec![1, 5], vec![7, 26]]).unwrap();
        assert_eq!(GridSet::from_csv(&g.to_csv()).unwrap(), g);
        assert!(GridSet::from_csv("res,2\n0\n").is_err());
    }

    #[test]
    fn single_cell_count() {
        let g = GridSet::from_cells(vec![16, 16], vec![vec![5, 9]]).unwrap();
        for (outer, inner) in [(0.5, 0.25), (0.25, 1.0 / 16.0), (1.0, 0.5)] {
            assert_eq!(local_count(&g, &[5, 9], outer, inner).unwrap(), 1);
        }
        assert!(matches!(local_count(&g, &[5, 9], 0.5, 0.01), Err(Error::Scale(_))));
        assert!(local_count(&g, &[0, 0], 0.5, 0.25).is_err());
    }

    #[test]
    fn full_grid_count_matches_brute_force() {
        let g = GridSet::full(vec![32, 32]);
        let c = local_count(&g, &[16, 16], 0.5, 0.125).unwrap();
        assert_eq!(c, brute_count(&g, &[16, 16], 0.5, 0.125));
        assert!((4..=64).contains(&c));
    }

    #[test]
    fn line_counts_scale_linearly() {
        let g = GridSet::from_flat(vec![256, 256], (0..256).flat_map(|x| [x, 1]).collect()).unwrap();
        let a = local_count(&g, &[128, 1], 0.25, 1.0 / 32.0).unwrap();
        let b = local_count(&g, &[128, 1], 0.25, 1.0 / 64.0).unwrap();
        assert_eq!(a, 17);
        assert_eq!(b, 33);
    }

    #[test]
    fn estimates() {
        let g = GridSet::full(vec![512, 512]);
        let ladder = ScaleLadder::dyadic(&g, DEFAULT_RHO).unwrap();
        assert!(ladder.decades() >= 1.5);
        let est = assouad_estimate(&g, &ladder, Centers::Sample { count: 40, seed: 3 }).unwrap();
        assert!((est.exponent - 2.0).abs() < 0.15, "{}", est.exponent);
        assert!(est.to_csv().starts_with("R,r,sup_count\n"));
        assert!(ScaleLadder::new(0.25, vec![]).is_err());
        assert!(ScaleLadder::new(0.25, vec![(0.5, 0.1)]).is_err());
        let coarse = ScaleLadder::new(0.25, vec![(0.25, 0.001)]).unwrap();
        assert!(matches!(assouad_estimate(&g, &coarse, Centers::All), Err(Error::Scale(_))));
    }

    #[test]
    fn product_set_estimate() {
        let g = GridSet::full(vec![1024, 512]);
        let ladder = ScaleLadder::dyadic(&g, DEFAULT_RHO).unwrap();
        let est = assouad_estimate(&g, &ladder, Centers::Sample { count: 20, seed: 1 }).unwrap();
        assert!((est.exponent - 2.0).abs() < 0.2, "{}", est.exponent);
    }

    #[test]
    fn distances() {
        let a = GridSet::from_cells(vec![4, 4], vec![vec![0, 0]]).unwrap();
        let b = GridSet::from_cells(vec![4, 4], vec![vec![1, 0]]).unwrap();
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert!((hausdorff_distance(&a, &b).unwrap() - 0.25).abs() < 1e-15);
        let two = GridSet::from_cells(vec![4, 4], vec![vec![0, 0], vec![3, 0]]).unwrap();
        assert_eq!(pseudo_hausdorff(&a, &two).unwrap(), 0.0);
        assert!((pseudo_hausdorff(&two, &a).unwrap() - 0.75).abs() < 1e-15);
        assert!(hausdorff_distance(&a, &GridSet::empty(vec![4, 4])).is_err());
    }

    #[test]
    fn blowups() {
        let g = GridSet::from_cells(vec![4, 4], vec![vec![0, 0], vec![2, 3], vec![3, 3]]).unwrap();
        assert_eq!(blowup(&g, &Window::unit(2)).unwrap(), g);
        let w = Window::new(vec![ratio(1, 2), ratio(1, 2)], vec![ratio(1, 1), ratio(1, 1)]).unwrap();
        let b = blowup(&g, &w).unwrap();
        assert_eq!(b, GridSet::from_cells(vec![2, 2], vec![vec![0, 1], vec![1, 1]]).unwrap());
        let empty = Window::new(vec![ratio(1, 2), ratio(0, 1)], vec![ratio(1, 1), ratio(1, 2)]).unwrap();
        assert!(matches!(blowup(&g, &empty), Err(Error::Scale(_))));
        let outside = Window::new(vec![ratio(1, 2), ratio(1, 2)], vec![ratio(3, 2), ratio(1, 1)]).unwrap();
        assert!(matches!(blowup(&g, &outside), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn constant_stages() {
        let g = GridSet::from_cells(vec![4, 4], vec![vec![0, 0], vec![3, 3]]).unwrap();
        let target = GridSet::full(vec![2, 2]);
        let stage = TangentStage { set: g, window: Window::unit(2), target };
        let conv = tangent_convergence(&[stage.clone(), stage.clone()], Some(&[1.0, 1.0])).unwrap();
        assert_eq!(conv.distances[0], conv.distances[1]);
        assert_eq!(conv.dominated, Some(true));
        assert!(tangent_convergence(&[stage], None).is_err());
    }

    fn arb_set(res: u64) -> impl Strategy<Value = GridSet> {
        prop::collection::vec((0..res, 0..res), 1..30)
            .prop_map(move |v| GridSet::from_flat(vec![res, res], v.into_iter().flat_map(|(x, y)| [x, y]).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn directed_matches_brute_force(a in arb_set(16), b in arb_set(8)) {
            let fast = pseudo_hausdorff(&a, &b).unwrap();
            prop_assert!((fast - brute_directed(&a, &b)).abs() < 1e-12);
        }

        #[test]
        fn metric_axioms(a in arb_set(16), b in arb_set(16), c in arb_set(16)) {
            let ab = hausdorff_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
            prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
            prop_assert_eq!(ab == 0.0, a == b);
            let ac = hausdorff_distance(&a, &c).unwrap();
            let cb = hausdorff_distance(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-12);
            prop_assert!(pseudo_hausdorff(&a, &b).unwrap() <= ab);
        }

        #[test]
        fn counts_match_brute_force(a in arb_set(16), idx in 0usize..30, outer in 0.05f64..0.6, k in 1u32..4) {
            let cell = a.cell(idx % a.len()).to_vec();
            let inner = outer / k as f64;
            prop_assume!(inner >= 1.0 / 16.0);
            prop_assert_eq!(local_count(&a, &cell, outer, inner).unwrap(), brute_count(&a, &cell, outer, inner));
        }

        #[test]
        fn count_monotonicity(a in arb_set(32), idx in 0usize..30, outer in 0.05f64..0.5, grow in 1.0f64..2.0, j in 0u32..3) {
            let cell = a.cell(idx % a.len()).to_vec();
            let inner = 1.0 / 32.0 * f64::from(1u32 << j);
            prop_assume!(inner < outer);
            let base = local_count(&a, &cell, outer, inner).unwrap();
            prop_assert!(local_count(&a, &cell, outer * grow, inner).unwrap() >= base);
            prop_assert!(local_count(&a, &cell, outer, inner * 2.0).unwrap() <= base);
        }

        #[test]
        fn counts_monotone_under_inclusion(a in arb_set(16), b in arb_set(16), outer in 0.1f64..0.5) {
            let flat: Vec<u64> = a.cells().chain(b.cells()).flatten().copied().collect();
            let union = GridSet::from_flat(vec![16, 16], flat).unwrap();
            let cell = a.cell(0).to_vec();
            let inner = 1.0 / 16.0;
            prop_assert!(local_count(&union, &cell, outer, inner).unwrap() >= local_count(&a, &cell, outer, inner).unwrap());
        }
    }
}
