//! Random self-similar sets built from homothetic similarities with exact
//! rational data.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimate::GridSet;
use crate::rational::{ceil, floor, format_rational, is_in_open_unit, rational_ln, to_f64, Rational};
use crate::roots::decreasing_root;
use crate::words::{ProbabilityVector, Word};

const ROOT_TOL: f64 = 1e-12;

/// `x ↦ c·x + t` with `0 < c < 1`, mapping `[0,1]^d` into itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawMap", into = "RawMap")]
pub struct SimilarityMap {
    ratio: Rational,
    translation: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    #[serde(with = "crate::rational::serde_q")]
    c: Rational,
    #[serde(with = "crate::rational::serde_q_vec")]
    t: Vec<Rational>,
}

impl TryFrom<RawMap> for SimilarityMap {
    type Error = Error;
    fn try_from(raw: RawMap) -> Result<Self> {
        SimilarityMap::new(raw.c, raw.t)
    }
}

impl From<SimilarityMap> for RawMap {
    fn from(m: SimilarityMap) -> Self {
        RawMap { c: m.ratio, t: m.translation }
    }
}

impl SimilarityMap {
    pub fn new(ratio: Rational, translation: Vec<Rational>) -> Result<Self> {
        if !is_in_open_unit(&ratio) {
            return Err(invalid(format!("contraction ratio {} outside (0,1)", format_rational(&ratio))));
        }
        if translation.is_empty() {
            return Err(invalid("translation has no coordinates"));
        }
        for (axis, t) in translation.iter().enumerate() {
            if t.is_negative() || t + &ratio > Rational::one() {
                return Err(invalid(format!(
                    "image of the unit cube leaves [0,1] on axis {axis} (t = {}, c = {})",
                    format_rational(t),
                    format_rational(&ratio)
                )));
            }
        }
        Ok(Self { ratio, translation })
    }

    /// The identity on `[0,1]^d`; only used as the depth-0 box.
    pub fn identity(dim: usize) -> Self {
        Self { ratio: Rational::one(), translation: vec![Rational::zero(); dim] }
    }

    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    pub fn translation(&self) -> &[Rational] {
        &self.translation
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SimilarityMap) -> SimilarityMap {
        let translation = self
            .translation
            .iter()
            .zip(&inner.translation)
            .map(|(t, u)| &self.ratio * u + t)
            .collect();
        SimilarityMap { ratio: &self.ratio * &inner.ratio, translation }
    }

    /// `self^{-1} ∘ other`, the blow-up of `other` by this map.
    pub fn relative(&self, other: &SimilarityMap) -> SimilarityMap {
        let translation = other
            .translation
            .iter()
            .zip(&self.translation)
            .map(|(u, t)| (u - t) / &self.ratio)
            .collect();
        SimilarityMap { ratio: &other.ratio / &self.ratio, translation }
    }

    /// Closed image box containment: `other([0,1]^d) ⊆ self([0,1]^d)`.
    pub fn box_contains(&self, other: &SimilarityMap) -> bool {
        self.translation.iter().zip(&other.translation).all(|(t, u)| {
            t <= u && u + &other.ratio <= t + &self.ratio
        })
    }

    /// Whether the open image boxes intersect.
    pub fn open_boxes_overlap(&self, other: &SimilarityMap) -> bool {
        self.translation
            .iter()
            .zip(&other.translation)
            .all(|(t, u)| t < &(u + &other.ratio) && u < &(t + &self.ratio))
    }

    /// The unique fixed point `t / (1 − c)`.
    pub fn fixed_point(&self) -> Vec<Rational> {
        let scale = Rational::one() - &self.ratio;
        self.translation.iter().map(|t| t / &scale).collect()
    }
}

/// A deterministic IFS of homothetic similarities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SimilarityMap>", into = "Vec<SimilarityMap>")]
pub struct SimilarityIFS {
    maps: Vec<SimilarityMap>,
}

impl TryFrom<Vec<SimilarityMap>> for SimilarityIFS {
    type Error = Error;
    fn try_from(maps: Vec<SimilarityMap>) -> Result<Self> {
        SimilarityIFS::new(maps)
    }
}

impl From<SimilarityIFS> for Vec<SimilarityMap> {
    fn from(ifs: SimilarityIFS) -> Self {
        ifs.maps
    }
}

impl SimilarityIFS {
    pub fn new(maps: Vec<SimilarityMap>) -> Result<Self> {
        let first = maps.first().ok_or_else(|| invalid("IFS has no maps"))?;
        let d = first.dim();
        if maps.iter().any(|m| m.dim() != d) {
            return Err(invalid("maps of one IFS disagree on the ambient dimension"));
        }
        Ok(Self { maps })
    }

    pub fn maps(&self) -> &[SimilarityMap] {
        &self.maps
    }

    pub fn ratios(&self) -> Vec<Rational> {
        self.maps.iter().map(|m| m.ratio.clone()).collect()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn similarity_dimension(&self) -> f64 {
        similarity_dimension(&self.ratios())
    }
}

/// A family of similarity IFSs indexed by the alphabet, with a Bernoulli
/// probability vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRifs", into = "RawRifs")]
pub struct SimilarityRIFS {
    ifss: Vec<SimilarityIFS>,
    probs: ProbabilityVector,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRifs {
    ifss: Vec<SimilarityIFS>,
    probs: ProbabilityVector,
    #[serde(default)]
    ambient_dim: Option<usize>,
}

impl TryFrom<RawRifs> for SimilarityRIFS {
    type Error = Error;
    fn try_from(raw: RawRifs) -> Result<Self> {
        let rifs = SimilarityRIFS::new(raw.ifss, raw.probs)?;
        if let Some(d) = raw.ambient_dim.filter(|&d| d != rifs.dim()) {
            return Err(invalid(format!("ambient_dim {d} does not match the maps' dimension {}", rifs.dim())));
        }
        Ok(rifs)
    }
}

impl From<SimilarityRIFS> for RawRifs {
    fn from(r: SimilarityRIFS) -> Self {
        let ambient_dim = Some(r.dim());
        RawRifs { ifss: r.ifss, probs: r.probs, ambient_dim }
    }
}

impl SimilarityRIFS {
    pub fn new(ifss: Vec<SimilarityIFS>, probs: ProbabilityVector) -> Result<Self> {
        if ifss.is_empty() {
            return Err(invalid("RIFS has no IFSs"));
        }
        if ifss.len() != probs.len() {
            return Err(invalid(format!(
                "{} IFSs but {} probabilities",
                ifss.len(),
                probs.len()
            )));
        }
        let d = ifss[0].dim();
        if ifss.iter().any(|f| f.dim() != d) {
            return Err(invalid("IFSs disagree on the ambient dimension"));
        }
        Ok(Self { ifss, probs })
    }

    pub fn ifss(&self) -> &[SimilarityIFS] {
        &self.ifss
    }

    /// The IFS for a 1-based letter.
    pub fn ifs(&self, letter: usize) -> &SimilarityIFS {
        &self.ifss[letter - 1]
    }

    pub fn probs(&self) -> &ProbabilityVector {
        &self.probs
    }

    pub fn alphabet(&self) -> usize {
        self.ifss.len()
    }

    pub fn dim(&self) -> usize {
        self.ifss[0].dim()
    }
}

pub(crate) fn moran_root(ratios: &[f64]) -> f64 {
    decreasing_root(|s| ratios.iter().map(|c| c.powf(s)).sum::<f64>() - 1.0, 0.0, 1.0, ROOT_TOL)
}

/// The Hutchinson–Moran root: the `s ≥ 0` with `Σ c_i^s = 1`.
pub fn similarity_dimension(ratios: &[Rational]) -> f64 {
    assert!(!ratios.is_empty(), "similarity dimension of an empty ratio list");
    let c: Vec<f64> = ratios.iter().map(to_f64).collect();
    moran_root(&c)
}

/// Root of `Σ_i p_i log(Σ_j c_{i,j}^s) = 0`, the almost-sure Hausdorff value.
pub fn almost_sure_hausdorff(rifs: &SimilarityRIFS) -> f64 {
    let weights: Vec<f64> = rifs.probs().as_slice().iter().map(to_f64).collect();
    let ratios: Vec<Vec<f64>> = rifs
        .ifss()
        .iter()
        .map(|f| f.maps().iter().map(|m| to_f64(m.ratio())).collect())
        .collect();
    let pressure = |s: f64| -> f64 {
        weights
            .iter()
            .zip(&ratios)
            .map(|(p, cs)| p * cs.iter().map(|c| c.powf(s)).sum::<f64>().ln())
            .sum()
    };
    decreasing_root(pressure, 0.0, 1.0, ROOT_TOL)
}

/// Verdict of the uniform open set check against the candidate `(0,1)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UoscVerdict {
    Verified,
    RefutedForUnitCube,
    Inconclusive,
}

/// Checks the UOSC with `U = (0,1)^d` for every IFS of the family.
pub fn check_uosc(rifs: &SimilarityRIFS) -> UoscVerdict {
    let unit = SimilarityMap::identity(rifs.dim());
    let mut contained = true;
    for ifs in rifs.ifss() {
        let maps = ifs.maps();
        for (a, m) in maps.iter().enumerate() {
            contained &= unit.box_contains(m);
            if maps[a + 1..].iter().any(|other| m.open_boxes_overlap(other)) {
                return UoscVerdict::RefutedForUnitCube;
            }
        }
    }
    if contained {
        UoscVerdict::Verified
    } else {
        UoscVerdict::Inconclusive
    }
}

/// Assouad value `max_i dim_A F_i` together with how far it can be trusted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssouadValue {
    pub value: f64,
    pub uosc: UoscVerdict,
    /// True only when the UOSC was verified, so the formula is known to hold.
    pub valid: bool,
    pub note: String,
}

fn max_similarity_dimension(rifs: &SimilarityRIFS) -> f64 {
    rifs.ifss().iter().map(SimilarityIFS::similarity_dimension).fold(0.0, f64::max)
}

/// `max_i s_i`, an upper bound for every realization when the UOSC holds.
pub fn sure_assouad_upper(rifs: &SimilarityRIFS) -> AssouadValue {
    let uosc = check_uosc(rifs);
    let valid = uosc == UoscVerdict::Verified;
    AssouadValue {
        value: max_similarity_dimension(rifs),
        uosc,
        valid,
        note: if valid {
            "upper bound for every realization".into()
        } else {
            "not a valid sure bound: UOSC unverified".into()
        },
    }
}

/// `max_i s_i` read as the almost-sure Assouad dimension (needs the UOSC).
pub fn as_assouad_selfsimilar(rifs: &SimilarityRIFS) -> AssouadValue {
    let mut v = sure_assouad_upper(rifs);
    v.note = if v.valid {
        "almost-sure value".into()
    } else {
        "formula only: UOSC unverified, overlapping realizations may exceed it".into()
    };
    v
}

/// Whether `log c1 / log c2 ∈ ℚ`, decided exactly from exponent vectors
/// over a coprime factor base of the numerators and denominators.
pub fn multiplicative_dependence(c1: &Rational, c2: &Rational) -> Result<bool> {
    for c in [c1, c2] {
        if !is_in_open_unit(c) {
            return Err(invalid(format!("ratio {} outside (0,1)", format_rational(c))));
        }
    }
    let parts = [c1.numer(), c1.denom(), c2.numer(), c2.denom()];
    let base = coprime_base(parts.iter().map(|x| (*x).clone()).collect());
    let v1 = exponent_vector(c1, &base);
    let v2 = exponent_vector(c2, &base);
    for a in 0..base.len() {
        for b in a + 1..base.len() {
            if &v1[a] * &v2[b] != &v1[b] * &v2[a] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Refines integers into a pairwise coprime set such that each input is a
/// product of powers of its elements.
fn coprime_base(inputs: Vec<BigInt>) -> Vec<BigInt> {
    let mut base: Vec<BigInt> = inputs.into_iter().filter(|x| !x.is_one()).collect();
    loop {
        base.sort();
        base.dedup();
        let mut split = None;
        'search: for a in 0..base.len() {
            for b in a + 1..base.len() {
                let g = base[a].gcd(&base[b]);
                if !g.is_one() {
                    split = Some((a, b, g));
                    break 'search;
                }
            }
        }
        let Some((a, b, g)) = split else { return base };
        let x = &base[a] / &g;
        let y = &base[b] / &g;
        base.remove(b);
        base.remove(a);
        base.extend([g, x, y].into_iter().filter(|v| !v.is_one()));
    }
}

fn valuation(mut x: BigInt, q: &BigInt) -> (i64, BigInt) {
    let mut v = 0;
    loop {
        let (d, r) = x.div_rem(q);
        if !r.is_zero() {
            return (v, x);
        }
        x = d;
        v += 1;
    }
}

fn exponent_vector(c: &Rational, base: &[BigInt]) -> Vec<BigInt> {
    let mut num = c.numer().clone();
    let mut den = c.denom().clone();
    base.iter()
        .map(|q| {
            let (a, rest_n) = valuation(num.clone(), q);
            let (b, rest_d) = valuation(den.clone(), q);
            num = rest_n;
            den = rest_d;
            BigInt::from(a - b)
        })
        .collect()
}

/// The deterministic IFS of all compositions along one period of `pattern`
/// (`S_{w_1,i_1} ∘ … ∘ S_{w_p,i_p}`, lexicographic in `(i_1, …, i_p)`).
pub fn compose_period(rifs: &SimilarityRIFS, pattern: &Word) -> Result<SimilarityIFS> {
    if pattern.is_empty() {
        return Err(invalid("period pattern is empty"));
    }
    pattern.check(rifs.alphabet())?;
    let boxes = attractor_boxes(rifs, pattern, pattern.len())?;
    SimilarityIFS::new(boxes.boxes)
}

/// A pair of composed maps sharing a fixed point whose ratios are
/// multiplicatively independent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceWitness {
    pub pattern: Word,
    #[serde(with = "crate::rational::serde_q_vec")]
    pub ratios: Vec<Rational>,
    #[serde(with = "crate::rational::serde_q_vec")]
    pub fixed_point: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicProbe {
    pub value: f64,
    pub best_pattern: Word,
    pub patterns_checked: usize,
    /// True when every pair of ratios inside each single IFS is dependent.
    pub within_ifs_all_dependent: bool,
    pub witness: Option<IndependenceWitness>,
}

/// Similarity dimensions of the composed systems of every period pattern of
/// length `≤ max_period`, plus a witness of independence: among the shortest
/// patterns having one, the closest-ratio independent pair of maps with a
/// common fixed point.
pub fn periodic_sup_probe(rifs: &SimilarityRIFS, max_period: usize, max_patterns: usize) -> Result<PeriodicProbe> {
    if max_period == 0 {
        return Err(invalid("max_period must be >= 1"));
    }
    let n = rifs.alphabet();
    let total: usize = (1..=max_period)
        .try_fold(0usize, |acc, p| n.checked_pow(p as u32).and_then(|c| acc.checked_add(c)))
        .unwrap_or(usize::MAX);
    if total > max_patterns {
        return Err(invalid(format!(
            "{total} period patterns exceed the cap of {max_patterns}"
        )));
    }
    let mut best: Option<(f64, Word)> = None;
    let mut witness: Option<(f64, IndependenceWitness)> = None;
    let mut checked = 0;
    for period in 1..=max_period {
        for code in 0..n.pow(period as u32) {
            let mut rest = code;
            let mut letters = vec![0; period];
            for slot in letters.iter_mut().rev() {
                *slot = rest % n + 1;
                rest /= n;
            }
            let pattern = Word::new(letters);
            let composed = compose_period(rifs, &pattern)?;
            checked += 1;
            let dim = composed.similarity_dimension();
            if best.as_ref().is_none_or(|(v, _)| dim > *v) {
                best = Some((dim, pattern.clone()));
            }
            if let Some((gap, w)) = closest_independent_pair(&composed, &pattern)? {
                let shorter_exists = witness.as_ref().is_some_and(|(_, prev)| prev.pattern.len() < period);
                if !shorter_exists && witness.as_ref().is_none_or(|(g, _)| gap < *g) {
                    witness = Some((gap, w));
                }
            }
        }
    }
    let mut within_ifs_all_dependent = true;
    for ifs in rifs.ifss() {
        let r = ifs.ratios();
        for a in 0..r.len() {
            for b in a + 1..r.len() {
                within_ifs_all_dependent &= multiplicative_dependence(&r[a], &r[b])?;
            }
        }
    }
    let (value, best_pattern) = best.expect("at least one pattern");
    Ok(PeriodicProbe {
        value,
        best_pattern,
        patterns_checked: checked,
        within_ifs_all_dependent,
        witness: witness.map(|(_, w)| w),
    })
}

fn closest_independent_pair(ifs: &SimilarityIFS, pattern: &Word) -> Result<Option<(f64, IndependenceWitness)>> {
    let mut by_fixed: BTreeMap<Vec<Rational>, Vec<&SimilarityMap>> = BTreeMap::new();
    for m in ifs.maps() {
        by_fixed.entry(m.fixed_point()).or_default().push(m);
    }
    let mut best: Option<(f64, IndependenceWitness)> = None;
    for (fixed, maps) in &by_fixed {
        for a in 0..maps.len() {
            for b in a + 1..maps.len() {
                let (ca, cb) = (maps[a].ratio(), maps[b].ratio());
                if ca == cb || multiplicative_dependence(ca, cb)? {
                    continue;
                }
                let gap = (rational_ln(ca) - rational_ln(cb)).abs();
                if best.as_ref().is_none_or(|(g, _)| gap < *g) {
                    let (lo, hi) = if ca < cb { (ca, cb) } else { (cb, ca) };
                    best = Some((
                        gap,
                        IndependenceWitness {
                            pattern: pattern.clone(),
                            ratios: vec![lo.clone(), hi.clone()],
                            fixed_point: fixed.clone(),
                        },
                    ));
                }
            }
        }
    }
    Ok(best)
}

/// The level-`k` construction boxes `S_{ω_1,i_1} ∘ … ∘ S_{ω_k,i_k}([0,1]^d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxSet {
    pub depth: usize,
    pub dim: usize,
    /// Each box is the image of the unit cube under this composed map.
    pub boxes: Vec<SimilarityMap>,
}

impl BoxSet {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Boxes contained in `window`'s image, renormalized by `window^{-1}`.
    pub fn blowup(&self, window: &SimilarityMap) -> BoxSet {
        let boxes = self
            .boxes
            .iter()
            .filter(|b| window.box_contains(b))
            .map(|b| window.relative(b))
            .collect();
        BoxSet { depth: self.depth, dim: self.dim, boxes }
    }

    /// Boxes as a sorted, de-duplicated list.
    pub fn canonical(&self) -> Vec<SimilarityMap> {
        let mut v = self.boxes.clone();
        v.sort();
        v.dedup();
        v
    }

    /// Occupancy of the grid cells meeting the interior of some box (or
    /// containing a box thinner than one cell).
    pub fn rasterize(&self, resolution: &[u64]) -> Result<GridSet> {
        if resolution.len() != self.dim {
            return Err(invalid("resolution length differs from the ambient dimension"));
        }
        let mut cells = Vec::new();
        for b in &self.boxes {
            let mut ranges = Vec::with_capacity(self.dim);
            for (axis, t) in b.translation().iter().enumerate() {
                let res = Rational::from_integer(BigInt::from(resolution[axis]));
                let lo = floor(&(t * &res));
                let hi: BigInt = ceil(&((t + b.ratio()) * &res)) - 1;
                let lo: u64 = lo.try_into().map_err(|_| invalid("box outside the frame"))?;
                let hi: u64 = u64::try_from(hi).unwrap_or(lo).max(lo).min(resolution[axis] - 1);
                ranges.push(lo..=hi);
            }
            push_product(&ranges, &mut Vec::new(), &mut cells);
        }
        GridSet::from_cells(resolution.to_vec(), cells)
    }

    /// CSV rows `index,ratio,t_1,…,t_d` with exact rationals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("box,ratio");
        for axis in 0..self.dim {
            out.push_str(&format!(",t{}", axis + 1));
        }
        out.push('\n');
        for (idx, b) in self.boxes.iter().enumerate() {
            out.push_str(&format!("{idx},{}", format_rational(b.ratio())));
            for t in b.translation() {
                out.push(',');
                out.push_str(&format_rational(t));
            }
            out.push('\n');
        }
        out
    }
}

fn push_product(ranges: &[std::ops::RangeInclusive<u64>], prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    match ranges.split_first() {
        None => out.push(prefix.clone()),
        Some((first, rest)) => {
            for v in first.clone() {
                prefix.push(v);
                push_product(rest, prefix, out);
                prefix.pop();
            }
        }
    }
}

/// All level-`depth` boxes for the realization `word`.
pub fn attractor_boxes(rifs: &SimilarityRIFS, word: &Word, depth: usize) -> Result<BoxSet> {
    if depth > word.len() {
        return Err(invalid(format!("depth {depth} exceeds word length {}", word.len())));
    }
    word.prefix(depth).check(rifs.alphabet())?;
    let mut boxes = vec![SimilarityMap::identity(rifs.dim())];
    for &letter in &word.letters()[..depth] {
        let maps = rifs.ifs(letter).maps();
        boxes = boxes
            .iter()
            .flat_map(|b| maps.iter().map(move |m| b.compose(m)))
            .collect();
    }
    Ok(BoxSet { depth, dim: rifs.dim(), boxes })
}

/// The overlapping two-IFS system on `[0,1]` whose alternating realization
/// has a jump in Assouad dimension.
pub fn overlap_example() -> SimilarityRIFS {
    use crate::rational::ratio;
    let map = |c: (i64, i64), t: (i64, i64)| SimilarityMap::new(ratio(c.0, c.1), vec![ratio(t.0, t.1)]).unwrap();
    let first = SimilarityIFS::new(vec![map((1, 2), (0, 1)), map((1, 4), (0, 1)), map((1, 16), (15, 16))]).unwrap();
    let second = SimilarityIFS::new(vec![map((1, 3), (0, 1)), map((1, 9), (0, 1)), map((1, 81), (80, 81))]).unwrap();
    SimilarityRIFS::new(vec![first, second], ProbabilityVector::uniform(2)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn map1(c: (i64, i64), t: (i64, i64)) -> SimilarityMap {
        SimilarityMap::new(ratio(c.0, c.1), vec![ratio(t.0, t.1)]).unwrap()
    }

    fn single(maps: Vec<SimilarityMap>) -> SimilarityRIFS {
        SimilarityRIFS::new(vec![SimilarityIFS::new(maps).unwrap()], ProbabilityVector::uniform(1)).unwrap()
    }

    #[test]
    fn moran_roots() {
        let s1 = similarity_dimension(&[ratio(1, 2), ratio(1, 4), ratio(1, 16)]);
        assert!((s1 - 0.81137).abs() < 1e-4, "{s1}");
        let s2 = similarity_dimension(&[ratio(1, 3), ratio(1, 9), ratio(1, 81)]);
        assert!((s2 - 0.511918).abs() < 1e-5, "{s2}");
        assert!((similarity_dimension(&[ratio(1, 2), ratio(1, 2)]) - 1.0).abs() < 1e-12);
        assert_eq!(similarity_dimension(&[ratio(1, 2)]), 0.0);
        // Overlapping: root above the ambient dimension is still found.
        let ten = vec![ratio(1, 2); 10];
        assert!((similarity_dimension(&ten) - 10f64.log2()).abs() < 1e-11);
    }

    #[test]
    fn averaged_equation() {
        let ex = overlap_example();
        let s = almost_sure_hausdorff(&ex);
        assert!(s > 0.511918 && s < 0.81137, "{s}");
        let halves = SimilarityIFS::new(vec![map1((1, 2), (0, 1)), map1((1, 2), (1, 2))]).unwrap();
        let quarters = SimilarityIFS::new(vec![map1((1, 4), (0, 1)), map1((1, 4), (3, 4))]).unwrap();
        let rifs = SimilarityRIFS::new(vec![halves.clone(), quarters], ProbabilityVector::uniform(2)).unwrap();
        assert!((almost_sure_hausdorff(&rifs) - 2.0 / 3.0).abs() < 1e-10);
        let same = SimilarityRIFS::new(vec![halves.clone(), halves], ProbabilityVector::uniform(2)).unwrap();
        assert!((almost_sure_hausdorff(&same) - 1.0).abs() < 1e-10);
        // Singletons only: boundary root.
        assert_eq!(almost_sure_hausdorff(&single(vec![map1((1, 2), (0, 1))])), 0.0);
    }

    #[test]
    fn uosc_examples() {
        let halves = single(vec![map1((1, 2), (0, 1)), map1((1, 2), (1, 2))]);
        assert_eq!(check_uosc(&halves), UoscVerdict::Verified);
        let thirds = single(vec![map1((1, 3), (0, 1)), map1((1, 3), (2, 3))]);
        assert_eq!(check_uosc(&thirds), UoscVerdict::Verified);
        assert_eq!(check_uosc(&overlap_example()), UoscVerdict::RefutedForUnitCube);
    }

    #[test]
    fn assouad_bounds() {
        let ex = overlap_example();
        let v = sure_assouad_upper(&ex);
        assert!((v.value - 0.81137).abs() < 1e-4);
        assert!(!v.valid);
        assert!(v.note.contains("UOSC unverified"));
        let quarter = SimilarityIFS::new(vec![map1((1, 4), (0, 1)), map1((1, 4), (3, 4))]).unwrap();
        let fifths = SimilarityIFS::new((0..5).map(|t| map1((1, 5), (t, 5))).take(4).collect()).unwrap();
        let rifs = SimilarityRIFS::new(vec![quarter, fifths], ProbabilityVector::uniform(2)).unwrap();
        let v = as_assouad_selfsimilar(&rifs);
        assert!(v.valid);
        assert!((v.value - 4f64.ln() / 5f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn dependence_examples() {
        assert!(!multiplicative_dependence(&ratio(1, 18), &ratio(1, 12)).unwrap());
        assert!(multiplicative_dependence(&ratio(1, 2), &ratio(1, 4)).unwrap());
        assert!(multiplicative_dependence(&ratio(1, 6), &ratio(1, 36)).unwrap());
        assert!(multiplicative_dependence(&ratio(4, 9), &ratio(8, 27)).unwrap());
        assert!(!multiplicative_dependence(&ratio(2, 3), &ratio(1, 3)).unwrap());
        assert!(multiplicative_dependence(&ratio(1, 1), &ratio(1, 2)).is_err());
    }

    #[test]
    fn composition() {
        let ex = overlap_example();
        let composed = compose_period(&ex, &"1,2".parse().unwrap()).unwrap();
        assert_eq!(composed.maps().len(), 9);
        let ratios = composed.ratios();
        assert!(ratios.contains(&ratio(1, 18)) && ratios.contains(&ratio(1, 12)));
        assert_eq!(compose_period(&ex, &"1".parse().unwrap()).unwrap(), ex.ifs(1).clone());
        let squared = compose_period(&ex, &"1,1".parse().unwrap()).unwrap().ratios();
        let base = ex.ifs(1).ratios();
        let expect: Vec<Rational> = base.iter().flat_map(|a| base.iter().map(move |b| a * b)).collect();
        assert_eq!(squared, expect);
    }

    #[test]
    fn composition_preserves_moran_root() {
        let ex = overlap_example();
        for letter in [1, 2] {
            let direct = ex.ifs(letter).similarity_dimension();
            for q in 1..=3 {
                let composed = compose_period(&ex, &Word::constant(letter, q)).unwrap();
                assert!((composed.similarity_dimension() - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn periodic_probe_finds_the_independent_pair() {
        let ex = overlap_example();
        let probe = periodic_sup_probe(&ex, 2, 1000).unwrap();
        assert!(probe.within_ifs_all_dependent);
        let w = probe.witness.expect("independent pair");
        assert_eq!(w.ratios, vec![ratio(1, 18), ratio(1, 12)]);
        assert_eq!(w.fixed_point, vec![ratio(0, 1)]);
        assert_eq!(w.pattern.to_string(), "1,2");
        assert!((probe.value - 0.81137).abs() < 1e-4);
        // Direct Moran root of the 9-map composed system lies between the two.
        let composed = compose_period(&ex, &"1,2".parse().unwrap()).unwrap().similarity_dimension();
        assert!(composed > 0.511918 && composed < 0.81137);
        assert!(periodic_sup_probe(&ex, 12, 1000).is_err());
    }

    #[test]
    fn single_ifs_probe() {
        let rifs = single(vec![map1((1, 3), (0, 1)), map1((1, 3), (2, 3))]);
        let probe = periodic_sup_probe(&rifs, 4, 100).unwrap();
        assert!((probe.value - 2f64.ln() / 3f64.ln()).abs() < 1e-10);
        assert!(probe.witness.is_none());
    }

    #[test]
    fn boxes() {
        let ex = overlap_example();
        let b0 = attractor_boxes(&ex, &Word::empty(), 0).unwrap();
        assert_eq!(b0.boxes, vec![SimilarityMap::identity(1)]);
        let b1 = attractor_boxes(&ex, &"1".parse().unwrap(), 1).unwrap();
        let lens: Vec<_> = b1.boxes.iter().map(|b| b.ratio().clone()).collect();
        assert_eq!(lens, vec![ratio(1, 2), ratio(1, 4), ratio(1, 16)]);
        let b2 = attractor_boxes(&ex, &"1,2".parse().unwrap(), 2).unwrap();
        assert_eq!(b2.len(), 9);
        assert!(attractor_boxes(&ex, &"1".parse().unwrap(), 2).is_err());
    }

    #[test]
    fn rasterized_boxes() {
        let cantor = single(vec![map1((1, 3), (0, 1)), map1((1, 3), (2, 3))]);
        let boxes = attractor_boxes(&cantor, &Word::constant(1, 2), 2).unwrap();
        let grid = boxes.rasterize(&[9]).unwrap();
        let cells: Vec<u64> = grid.cells().map(|c| c[0]).collect();
        assert_eq!(cells, vec![0, 2, 6, 8]);
        let coarse = boxes.rasterize(&[2]).unwrap();
        assert_eq!(coarse.len(), 2);
    }

    #[test]
    fn serde_round_trip() {
        let ex = overlap_example();
        let json = serde_json::to_string(&ex).unwrap();
        assert!(json.contains("\"c\":\"1/16\"") && json.contains("\"ambient_dim\":1"));
        let back: SimilarityRIFS = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ex);
        let bad = json.replace("\"1/16\"", "\"3/2\"");
        assert!(serde_json::from_str::<SimilarityRIFS>(&bad).is_err());
    }

    fn ratios_strategy() -> impl Strategy<Value = Vec<Rational>> {
        prop::collection::vec((1i64..9, 2i64..12), 1..6)
            .prop_map(|v| v.into_iter().map(|(a, b)| ratio(a.min(b - 1), b)).collect())
    }

    proptest! {
        #[test]
        fn moran_residual_and_monotonicity(ratios in ratios_strategy(), extra in (1i64..5, 6i64..10)) {
            let s = similarity_dimension(&ratios);
            if ratios.len() > 1 {
                let residual: f64 = ratios.iter().map(|c| to_f64(c).powf(s)).sum::<f64>() - 1.0;
                prop_assert!(residual.abs() < 1e-10);
            }
            let mut more = ratios.clone();
            more.push(ratio(extra.0, extra.1));
            prop_assert!(similarity_dimension(&more) > s);
        }

        #[test]
        fn boxes_nest(seed in 0u64..500, depth in 1usize..4) {
            let ex = overlap_example();
            let word = crate::words::sample_realization(seed, ex.probs(), depth + 1);
            let coarse = attractor_boxes(&ex, &word, depth).unwrap();
            let fine = attractor_boxes(&ex, &word, depth + 1).unwrap();
            prop_assert_eq!(fine.len(), coarse.len() * 3);
            for (idx, b) in fine.boxes.iter().enumerate() {
                prop_assert!(coarse.boxes[idx / 3].box_contains(b));
            }
        }
    }

    #[test]
    fn uosc_implies_disjoint_interiors() {
        let a = SimilarityIFS::new(vec![map1((1, 3), (0, 1)), map1((1, 3), (2, 3))]).unwrap();
        let b = SimilarityIFS::new(vec![map1((1, 4), (0, 1)), map1((1, 2), (1, 2))]).unwrap();
        let rifs = SimilarityRIFS::new(vec![a, b], ProbabilityVector::uniform(2)).unwrap();
        assert_eq!(check_uosc(&rifs), UoscVerdict::Verified);
        for seed in 0..10 {
            let word = crate::words::sample_realization(seed, rifs.probs(), 6);
            for k in 1..=6 {
                let boxes = attractor_boxes(&rifs, &word, k).unwrap().boxes;
                for x in 0..boxes.len() {
                    for y in x + 1..boxes.len() {
                        assert!(!boxes[x].open_boxes_overlap(&boxes[y]));
                    }
                }
            }
        }
    }
}
