//! Symbolic space: words over the IFS alphabet, cylinders, the word metric,
//! Bernoulli measures, seeded realizations and good-set word constructors.
//!
//! Letters are 1-based (`1..=N`) everywhere, including serialized forms.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::carpet::{k1_scale, k2_scale, Grid};
use crate::error::{invalid, Error, Result};
use crate::rational::{format_rational, parse_rational, rational_ln, Rational};
use crate::rng::{threshold, SplitMix64};

/// A finite word over `{1, …, N}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn constant(letter: usize, len: usize) -> Self {
        Word(vec![letter; len])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The letter at 1-based position `index`.
    pub fn at(&self, index: usize) -> usize {
        self.0[index - 1]
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k.min(self.len())].to_vec())
    }

    /// The shifted word `σ^k(w)`.
    pub fn shift(&self, k: usize) -> Word {
        Word(self.0[k.min(self.len())..].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Checks every letter lies in `1..=alphabet`.
    pub fn check(&self, alphabet: usize) -> Result<()> {
        match self.0.iter().position(|&l| l == 0 || l > alphabet) {
            Some(pos) => Err(invalid(format!(
                "letter {} at position {} outside alphabet 1..={alphabet}",
                self.0[pos],
                pos + 1
            ))),
            None => Ok(()),
        }
    }

    /// Length of the longest common prefix, `u ∧ v`.
    pub fn common_prefix(&self, other: &Word) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, l) in self.0.iter().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        s.split(',')
            .map(|t| {
                let t = t.trim();
                match t.parse::<usize>() {
                    Ok(l) if l >= 1 => Ok(l),
                    _ => Err(Error::Spec(format!("bad letter {t:?} in word"))),
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A Bernoulli probability vector with exact rational entries summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilityVector(Vec<Rational>);

impl ProbabilityVector {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("probability vector is empty"));
        }
        if let Some(i) = probs.iter().position(|p| !p.is_positive() || p > &Rational::one()) {
            return Err(invalid(format!("probability p_{} = {} outside (0,1]", i + 1, format_rational(&probs[i]))));
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(invalid(format!("probabilities sum to {}, not 1", format_rational(&total))));
        }
        Ok(Self(probs))
    }

    pub fn uniform(n: usize) -> Self {
        let p = Rational::new(BigInt::one(), BigInt::from(n));
        Self(vec![p; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `p_letter` for a 1-based letter.
    pub fn get(&self, letter: usize) -> &Rational {
        &self.0[letter - 1]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }
}

impl Serialize for ProbabilityVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::rational::serde_q_vec::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for ProbabilityVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = crate::rational::serde_q_vec::deserialize(d)?;
        ProbabilityVector::new(v).map_err(serde::de::Error::custom)
    }
}

/// Bernoulli measure of the cylinder `[w]`: `p_{w_1} ⋯ p_{w_k}`.
pub fn cylinder_measure(w: &Word, p: &ProbabilityVector) -> Result<Rational> {
    w.check(p.len())?;
    Ok(w.letters().iter().map(|&l| p.get(l).clone()).product())
}

/// `d(u, v) = 2^{-(u ∧ v)}`; equal finite words are at distance `2^{-len}`.
pub fn word_metric(u: &Word, v: &Word) -> f64 {
    0.5f64.powi(u.common_prefix(v) as i32)
}

/// Draws `length` i.i.d. letters from `p` with a splitmix64 stream and
/// inverse-CDF over the exact cumulative sums.
pub fn sample_realization(seed: u64, p: &ProbabilityVector, length: usize) -> Word {
    let mut cum = Rational::zero();
    let mut cuts = Vec::with_capacity(p.len());
    for q in p.as_slice() {
        cum += q;
        cuts.push(threshold(&cum));
    }
    *cuts.last_mut().expect("non-empty") = 1u128 << 64;
    let mut rng = SplitMix64::new(seed);
    let letters = (0..length)
        .map(|_| {
            let u = rng.next_u64() as u128;
            cuts.iter().position(|&t| u < t).expect("last cut is 2^64") + 1
        })
        .collect();
    Word(letters)
}

/// A letter block written over a base realization, at 1-based position `at`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Splice {
    pub at: usize,
    pub letters: Word,
}

/// A generation rule for an infinite word, materialized prefix by prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum Realization {
    Iid {
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probs: Option<ProbabilityVector>,
    },
    Periodic {
        pattern: Word,
    },
    Constant {
        letter: usize,
    },
    Spliced {
        base: Box<Realization>,
        splices: Vec<Splice>,
    },
}

impl Realization {
    pub fn iid(seed: u64, probs: ProbabilityVector) -> Self {
        Realization::Iid { seed, probs: Some(probs) }
    }

    /// Fills in missing i.i.d. probabilities (typically the model's own vector).
    pub fn with_default_probs(mut self, probs: &ProbabilityVector) -> Self {
        match &mut self {
            Realization::Iid { probs: p @ None, .. } => *p = Some(probs.clone()),
            Realization::Spliced { base, .. } => {
                let b = std::mem::replace(base.as_mut(), Realization::Constant { letter: 1 });
                **base = b.with_default_probs(probs);
            }
            _ => {}
        }
        self
    }

    /// Replaces the seed of an i.i.d. rule (also inside a splice base).
    pub fn with_seed(mut self, new_seed: u64) -> Self {
        match &mut self {
            Realization::Iid { seed, .. } => *seed = new_seed,
            Realization::Spliced { base, .. } => {
                let b = std::mem::replace(base.as_mut(), Realization::Constant { letter: 1 });
                **base = b.with_seed(new_seed);
            }
            _ => {}
        }
        self
    }

    /// The first `len` letters.
    pub fn prefix(&self, len: usize) -> Result<Word> {
        match self {
            Realization::Iid { seed, probs } => {
                let probs = probs
                    .as_ref()
                    .ok_or_else(|| invalid("i.i.d. realization has no probability vector"))?;
                Ok(sample_realization(*seed, probs, len))
            }
            Realization::Periodic { pattern } => {
                if pattern.is_empty() {
                    return Err(invalid("periodic realization with empty pattern"));
                }
                Ok(Word((0..len).map(|t| pattern.letters()[t % pattern.len()]).collect()))
            }
            Realization::Constant { letter } => {
                if *letter == 0 {
                    return Err(invalid("letters are 1-based"));
                }
                Ok(Word::constant(*letter, len))
            }
            Realization::Spliced { base, splices } => {
                let mut w = base.prefix(len)?.0;
                for s in splices {
                    if s.at == 0 {
                        return Err(invalid("splice positions are 1-based"));
                    }
                    for (off, &l) in s.letters.letters().iter().enumerate() {
                        if let Some(slot) = w.get_mut(s.at - 1 + off) {
                            *slot = l;
                        }
                    }
                }
                Ok(Word(w))
            }
        }
    }
}

/// Writes runs of letter `letter` over `base`: run `t` covers 1-based
/// positions `[run_positions[t], run_positions[t] + run_lengths[t])`.
pub fn good_word_selfsimilar(
    base: &Word,
    letter: usize,
    run_lengths: &[usize],
    run_positions: &[usize],
) -> Result<Word> {
    if run_lengths.len() != run_positions.len() {
        return Err(Error::InvalidSchedule("run lengths and positions differ in count".into()));
    }
    let mut out = base.0.clone();
    let mut end_prev = 0usize;
    for (t, (&len, &pos)) in run_lengths.iter().zip(run_positions).enumerate() {
        if pos == 0 {
            return Err(Error::InvalidSchedule("run positions are 1-based".into()));
        }
        if t > 0 && pos < end_prev {
            return Err(Error::InvalidSchedule(format!(
                "run {} at position {pos} overlaps or precedes the previous run ending at {}",
                t + 1,
                end_prev - 1
            )));
        }
        let end = pos + len;
        if end - 1 > out.len() {
            return Err(Error::InvalidSchedule(format!(
                "run {} ends at {} beyond word length {}",
                t + 1,
                end - 1,
                out.len()
            )));
        }
        out[pos - 1..end - 1].iter_mut().for_each(|l| *l = letter);
        end_prev = end;
    }
    Ok(Word(out))
}

/// One `(R_l, n_l)` entry of a good-word schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    #[serde(with = "crate::rational::serde_q")]
    pub scale: Rational,
    pub run: usize,
}

/// Scale indices realized by a scheduled entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledScales {
    pub k1: usize,
    pub k2: usize,
    pub run: usize,
}

/// Builds a word in the carpet good set for letters `i` (column maximizer)
/// and `j` (row maximizer): for each entry, `j` fills `k1+1..=k1+n` and `i`
/// fills `k2+1..=k2+n`, with `k1, k2` the scale indices of `R` for the word
/// built so far. Unscheduled positions keep the base letters.
pub fn good_word_carpet(
    grids: &[Grid],
    base: &Word,
    i: usize,
    j: usize,
    schedule: &[ScheduleEntry],
) -> Result<(Word, Vec<ScheduledScales>)> {
    base.check(grids.len())?;
    for letter in [i, j] {
        if letter == 0 || letter > grids.len() {
            return Err(invalid(format!("letter {letter} outside alphabet 1..={}", grids.len())));
        }
    }
    for (idx, pair) in schedule.windows(2).enumerate() {
        if pair[1].scale >= pair[0].scale {
            return Err(Error::InvalidSchedule(format!("scales must strictly decrease (entry {})", idx + 2)));
        }
        if pair[1].run <= pair[0].run {
            return Err(Error::InvalidSchedule(format!("run lengths must strictly increase (entry {})", idx + 2)));
        }
    }
    let mut word = base.clone();
    let mut owner: Vec<Option<usize>> = vec![None; word.len()];
    let mut scales = Vec::with_capacity(schedule.len());
    for (idx, entry) in schedule.iter().enumerate() {
        let l = idx + 1;
        let infeasible = |reason: String| Error::InfeasibleSchedule { index: l, reason };
        if !crate::rational::is_in_open_unit(&entry.scale) {
            return Err(infeasible(format!("scale {} outside (0,1)", format_rational(&entry.scale))));
        }
        if entry.run == 0 {
            return Err(infeasible("run length must be positive".into()));
        }
        let k1 = k1_scale(&word, grids, &entry.scale).map_err(|e| infeasible(e.to_string()))?;
        write_block(&mut word, &mut owner, k1 + 1, entry.run, j, l).map_err(infeasible)?;
        let k2 = k2_scale(&word, grids, &entry.scale).map_err(|e| infeasible(e.to_string()))?;
        if entry.run > k2 - k1 {
            return Err(infeasible(format!("run {} exceeds k2 - k1 = {}", entry.run, k2 - k1)));
        }
        write_block(&mut word, &mut owner, k2 + 1, entry.run, i, l).map_err(infeasible)?;
        scales.push(ScheduledScales { k1, k2, run: entry.run });
    }
    let rechecked = verify_good_word_carpet(&word, grids, i, j, schedule)?;
    if let Some(idx) = rechecked.iter().zip(&scales).position(|(a, b)| a != b) {
        return Err(Error::InfeasibleSchedule {
            index: idx + 1,
            reason: "a later splice moved this entry's scale indices".into(),
        });
    }
    Ok((word, scales))
}

fn write_block(
    word: &mut Word,
    owner: &mut [Option<usize>],
    start: usize,
    len: usize,
    letter: usize,
    l: usize,
) -> std::result::Result<(), String> {
    let end = start + len - 1;
    if end > word.len() {
        return Err(format!("block {start}..={end} runs past the word length {}", word.len()));
    }
    for pos in start..=end {
        if let Some(prev) = owner[pos - 1] {
            return Err(format!("block {start}..={end} collides with entry {prev} at position {pos}"));
        }
    }
    for pos in start..=end {
        word.0[pos - 1] = letter;
        owner[pos - 1] = Some(l);
    }
    Ok(())
}

/// Independently recomputes `k1, k2` for each entry on the final word and
/// checks the mandated constant blocks.
pub fn verify_good_word_carpet(
    word: &Word,
    grids: &[Grid],
    i: usize,
    j: usize,
    schedule: &[ScheduleEntry],
) -> Result<Vec<ScheduledScales>> {
    let mut out = Vec::with_capacity(schedule.len());
    for (idx, entry) in schedule.iter().enumerate() {
        let bad = |reason: String| Error::InfeasibleSchedule { index: idx + 1, reason };
        let (k1, k2) = crate::carpet::k_scales(word, grids, &entry.scale).map_err(|e| bad(e.to_string()))?;
        if entry.run > k2 - k1 {
            return Err(bad(format!("run {} exceeds k2 - k1 = {}", entry.run, k2 - k1)));
        }
        if k2 + entry.run > word.len() {
            return Err(bad("word too short for the i-block".into()));
        }
        let j_block = (k1 + 1..=k1 + entry.run).all(|t| word.at(t) == j);
        let i_block = (k2 + 1..=k2 + entry.run).all(|t| word.at(t) == i);
        if !(j_block && i_block) {
            return Err(bad("mandated constant blocks are missing".into()));
        }
        out.push(ScheduledScales { k1, k2, run: entry.run });
    }
    Ok(out)
}

/// Hausdorff dimension of `Ω = {1..N}^ℕ` under the word metric.
pub fn omega_hausdorff_dim(n: usize) -> f64 {
    (n as f64).ln() / std::f64::consts::LN_2
}

fn exceptional_base(n: usize, maximizing: usize, block: usize) -> Result<(BigInt, u32)> {
    if n == 0 || maximizing == 0 || maximizing >= n {
        return Err(invalid(format!(
            "need 1 <= maximizing letters < N (got {maximizing} of {n})"
        )));
    }
    if block == 0 {
        return Err(invalid("block parameter n must be >= 1"));
    }
    let c = block.div_ceil(2) as u32;
    let count = Pow::pow(BigInt::from(n), c) - Pow::pow(BigInt::from(maximizing), c);
    Ok((count, c))
}

/// Lower bound `α_n` for the dimension of the exceptional set, where
/// `maximizing` counts the letters attaining the maximal dimension:
/// `log(N^c − M^c) / (c log 2)` with `c = ⌈n/2⌉`.
pub fn exceptional_dim_lower(n: usize, maximizing: usize, block: usize) -> Result<f64> {
    let (count, c) = exceptional_base(n, maximizing, block)?;
    Ok(crate::rational::big_ln(&count) / (c as f64 * std::f64::consts::LN_2))
}

/// Both sides of the mass-distribution identity for a level-`k` cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct MassDistribution {
    pub measure: Rational,
    pub diameter_pow: f64,
    pub discrepancy: f64,
}

/// Computes `ν(U_k) = (N^c − M^c)^{−k}` exactly and `|U_k|^{α_n}` with
/// `|U_k| = 2^{−kc}`; the discrepancy compares their logarithms.
pub fn mass_distribution_check(
    n: usize,
    maximizing: usize,
    block: usize,
    k: usize,
) -> Result<MassDistribution> {
    if k == 0 {
        return Err(invalid("cylinder length k must be >= 1"));
    }
    let (count, c) = exceptional_base(n, maximizing, block)?;
    let alpha = exceptional_dim_lower(n, maximizing, block)?;
    let measure = Rational::new(BigInt::one(), Pow::pow(count, k as u32));
    let log_diam = -(k as f64) * c as f64 * std::f64::consts::LN_2;
    let log_pow = alpha * log_diam;
    let log_measure = rational_ln(&measure);
    Ok(MassDistribution {
        measure,
        diameter_pow: log_pow.exp(),
        discrepancy: (log_measure - log_pow).abs(),
    })
}

/// Parses a word that may also be written with a trailing ellipsis.
pub fn parse_word(s: &str) -> Result<Word> {
    let trimmed = s.trim().trim_end_matches('…').trim_end_matches("...").trim_end_matches(',');
    trimmed.parse()
}

/// Parses a probability vector from `"p/q"` strings.
pub fn parse_probs(items: &[&str]) -> Result<ProbabilityVector> {
    ProbabilityVector::new(items.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn cylinder_measures() {
        let half = ProbabilityVector::uniform(2);
        assert_eq!(cylinder_measure(&Word::empty(), &half).unwrap(), ratio(1, 1));
        assert_eq!(cylinder_measure(&w("1,2"), &half).unwrap(), ratio(1, 4));
        let p = ProbabilityVector::new(vec![ratio(3, 10), ratio(7, 10)]).unwrap();
        assert_eq!(cylinder_measure(&w("2,2,1"), &p).unwrap(), ratio(147, 1000));
        assert!(cylinder_measure(&w("3"), &p).is_err());
    }

    #[test]
    fn metric_examples() {
        assert_eq!(word_metric(&w("1,1,1"), &w("2,1,1")), 1.0);
        assert_eq!(word_metric(&w("1,1,2"), &w("1,1,1")), 0.25);
        assert_eq!(word_metric(&w("3,1,2,2,1"), &w("3,1,2,2,2")), 1.0 / 16.0);
    }

    #[test]
    fn probability_vector_validation() {
        assert!(ProbabilityVector::new(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(ProbabilityVector::new(vec![ratio(0, 1), ratio(1, 1)]).is_err());
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![ratio(1, 1)]).is_ok());
    }

    #[test]
    fn sampling() {
        let half = ProbabilityVector::uniform(2);
        assert!(sample_realization(5, &half, 0).is_empty());
        let one = ProbabilityVector::new(vec![ratio(1, 1)]).unwrap();
        assert_eq!(sample_realization(9, &one, 50), Word::constant(1, 50));
        let big = sample_realization(42, &half, 100_000);
        let ones = big.letters().iter().filter(|&&l| l == 1).count() as f64 / 1e5;
        assert!((ones - 0.5).abs() < 0.01, "frequency {ones}");
        assert_eq!(big.prefix(1000), sample_realization(42, &half, 1000));
    }

    #[test]
    fn skewed_sampling_frequencies() {
        let p = ProbabilityVector::new(vec![ratio(1, 10), ratio(2, 10), ratio(7, 10)]).unwrap();
        let word = sample_realization(3, &p, 200_000);
        for (letter, expect) in [(1, 0.1f64), (2, 0.2), (3, 0.7)] {
            let f = word.letters().iter().filter(|&&l| l == letter).count() as f64 / 2e5;
            let sigma = (expect * (1.0 - expect) / 2e5).sqrt();
            assert!((f - expect).abs() < 4.0 * sigma, "letter {letter}: {f}");
        }
    }

    #[test]
    fn realization_modes() {
        let r = Realization::Periodic { pattern: w("1,2") };
        assert_eq!(r.prefix(5).unwrap(), w("1,2,1,2,1"));
        let r = Realization::Spliced {
            base: Box::new(Realization::Constant { letter: 2 }),
            splices: vec![Splice { at: 3, letters: w("1,1") }],
        };
        assert_eq!(r.prefix(6).unwrap(), w("2,2,1,1,2,2"));
        let json = serde_json::to_string(&r).unwrap();
        let back: Realization = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let iid: Realization = serde_json::from_str(r#"{"mode":"iid","seed":4}"#).unwrap();
        assert!(iid.prefix(3).is_err());
        let iid = iid.with_default_probs(&ProbabilityVector::uniform(2));
        assert_eq!(iid.prefix(3).unwrap().len(), 3);
    }

    #[test]
    fn selfsimilar_good_words() {
        let base = Word::constant(2, 10);
        assert_eq!(good_word_selfsimilar(&base, 1, &[3], &[5]).unwrap(), w("2,2,2,2,1,1,1,2,2,2"));
        assert_eq!(good_word_selfsimilar(&base, 1, &[], &[]).unwrap(), base);
        let base = Word::constant(2, 120);
        let out = good_word_selfsimilar(&base, 1, &[1, 2, 3], &[1, 10, 100]).unwrap();
        for (pos, len) in [(1, 1), (10, 2), (100, 3)] {
            assert!((pos..pos + len).all(|t| out.at(t) == 1));
        }
        assert_eq!(out.letters().iter().filter(|&&l| l == 1).count(), 6);
        assert!(matches!(
            good_word_selfsimilar(&base, 1, &[5, 2], &[1, 3]),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn carpet_good_word_example() {
        // Two letters on the same 2x3 grid.
        let grids = vec![Grid { m: 2, n: 3 }, Grid { m: 2, n: 3 }];
        let base = Word::constant(1, 30);
        let sched = vec![ScheduleEntry { scale: ratio(1, 6561), run: 4 }];
        let (word, scales) = good_word_carpet(&grids, &base, 1, 2, &sched).unwrap();
        let s = scales[0];
        assert_eq!(s.k1, 8);
        // 2^-13 <= 3^-8 < 2^-12
        assert_eq!(s.k2, 13);
        assert!((9..=12).all(|t| word.at(t) == 2));
        assert!((14..=17).all(|t| word.at(t) == 1));
        assert!(good_word_carpet(&grids, &base, 1, 2, &[]).unwrap().0 == base);
    }

    #[test]
    fn carpet_good_word_collision_is_reported() {
        let grids = vec![Grid { m: 2, n: 3 }, Grid { m: 2, n: 3 }];
        let base = Word::constant(1, 40);
        let sched = vec![
            ScheduleEntry { scale: ratio(1, 27), run: 2 },
            ScheduleEntry { scale: ratio(1, 243), run: 3 },
        ];
        match good_word_carpet(&grids, &base, 1, 2, &sched) {
            Err(Error::InfeasibleSchedule { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected collision, got {other:?}"),
        }
        let too_long = vec![ScheduleEntry { scale: ratio(1, 3), run: 3 }];
        assert!(matches!(
            good_word_carpet(&grids, &base, 1, 2, &too_long),
            Err(Error::InfeasibleSchedule { index: 1, .. })
        ));
    }

    #[test]
    fn omega_dimension() {
        assert_eq!(omega_hausdorff_dim(1), 0.0);
        assert_eq!(omega_hausdorff_dim(2), 1.0);
        assert!((omega_hausdorff_dim(3) - 1.584_962_500_721_156).abs() < 1e-12);
    }

    #[test]
    fn exceptional_dimension_examples() {
        assert_eq!(exceptional_dim_lower(2, 1, 2).unwrap(), 0.0);
        assert!((exceptional_dim_lower(2, 1, 4).unwrap() - 3f64.ln() / (2.0 * 2f64.ln())).abs() < 1e-14);
        assert!(exceptional_dim_lower(2, 2, 4).is_err());
        assert!(exceptional_dim_lower(3, 0, 4).is_err());
    }

    #[test]
    fn mass_distribution_examples() {
        assert!(mass_distribution_check(2, 1, 4, 3).unwrap().discrepancy < 1e-12);
        assert!(mass_distribution_check(4, 2, 6, 5).unwrap().discrepancy < 1e-12);
        let md = mass_distribution_check(3, 2, 5, 1).unwrap();
        assert!(md.discrepancy < 1e-12);
        // (27 - 8)^-1
        assert_eq!(md.measure, ratio(1, 19));
    }

    fn probs_strategy() -> impl Strategy<Value = ProbabilityVector> {
        prop::collection::vec(1i64..20, 1..5).prop_map(|weights| {
            let total: i64 = weights.iter().sum();
            ProbabilityVector::new(weights.iter().map(|&w| ratio(w, total)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn measure_is_multiplicative(p in probs_strategy(), a in prop::collection::vec(0usize..100, 0..8), b in prop::collection::vec(0usize..100, 0..8)) {
            let n = p.len();
            let u = Word::new(a.iter().map(|x| x % n + 1).collect());
            let v = Word::new(b.iter().map(|x| x % n + 1).collect());
            let uv = cylinder_measure(&u.concat(&v), &p).unwrap();
            prop_assert_eq!(uv, cylinder_measure(&u, &p).unwrap() * cylinder_measure(&v, &p).unwrap());
        }

        #[test]
        fn metric_is_ultrametric(a in prop::collection::vec(1usize..3, 6), b in prop::collection::vec(1usize..3, 6), c in prop::collection::vec(1usize..3, 6)) {
            let (u, v, x) = (Word::new(a), Word::new(b), Word::new(c));
            prop_assert!(word_metric(&u, &x) <= word_metric(&u, &v).max(word_metric(&v, &x)));
        }

        #[test]
        fn sampling_is_reproducible(seed in any::<u64>(), len in 0usize..200) {
            let p = ProbabilityVector::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap();
            prop_assert_eq!(sample_realization(seed, &p, len), sample_realization(seed, &p, len));
        }

        #[test]
        fn words_round_trip_text(a in prop::collection::vec(1usize..9, 0..20)) {
            let word = Word::new(a);
            prop_assert_eq!(word.to_string().parse::<Word>().unwrap(), word);
        }
    }
}
