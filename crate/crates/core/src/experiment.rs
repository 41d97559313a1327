//! Builds realizations from a spec and runs the estimators on them.

use crate::carpet::{approximate_squares, carpet_grid, tangent_product_target, CarpetRIFS};
use crate::error::{invalid, Error, Result};
use crate::estimate::{
    assouad_estimate, blowup, AssouadEstimate, Centers, GridSet, ScaleLadder, TangentStage, Window, DEFAULT_RHO,
};
use crate::percolation::{simulate, PercLevels};
use crate::report::{theory, DimensionReport, EmpiricalEntry};
use crate::selfsim::attractor_boxes;
use crate::spec::{ExperimentSpec, Model};
use crate::words::{good_word_carpet, ScheduledScales, Word};

/// Rasterization used for self-similar sets when the spec gives none.
pub fn default_resolution(d: usize) -> Vec<u64> {
    vec![if d <= 2 { 4096 } else { 256 }; d]
}

/// Centers used when the spec leaves the choice open: all of them for small
/// sets, otherwise a seeded sample.
pub const DEFAULT_SAMPLE: usize = 256;

#[derive(Debug, Clone)]
pub struct Realized {
    pub seed: u64,
    pub word: Option<Word>,
    /// Scale indices of the good-word entries, for spliced carpets.
    pub scheduled: Vec<ScheduledScales>,
    pub grid: GridSet,
    pub levels: Option<PercLevels>,
}

/// The `(i, j)` letters of a carpet schedule, defaulting to the maximizers.
pub fn schedule_letters(spec: &ExperimentSpec, rifs: &CarpetRIFS) -> (usize, usize) {
    let best = crate::carpet::as_assouad_carpet(rifs);
    let s = spec.schedule.as_ref();
    (
        s.and_then(|s| s.i).unwrap_or(best.column_letter),
        s.and_then(|s| s.j).unwrap_or(best.row_letter),
    )
}

/// Builds the depth-`depth` occupancy for `seed`.
pub fn realize(spec: &ExperimentSpec, seed: u64) -> Result<Realized> {
    match &spec.model {
        Model::Selfsim(rifs) => {
            let word = spec.word(seed)?;
            let boxes = attractor_boxes(rifs, &word, spec.depth)?;
            let res = spec.resolution.clone().unwrap_or_else(|| default_resolution(rifs.dim()));
            let grid = boxes.rasterize(&res)?;
            Ok(Realized { seed, word: Some(word), scheduled: Vec::new(), grid, levels: None })
        }
        Model::Carpet(rifs) => {
            let mut word = spec.word(seed)?;
            let mut scheduled = Vec::new();
            if let Some(s) = &spec.schedule {
                let (i, j) = schedule_letters(spec, rifs);
                let (w, sc) = good_word_carpet(&rifs.grids(), &word, i, j, &s.entries)?;
                word = w;
                scheduled = sc;
            }
            let grid = carpet_grid(&word, rifs, spec.depth)?.cells;
            Ok(Realized { seed, word: Some(word), scheduled, grid, levels: None })
        }
        Model::Percolation(m) => {
            let levels = simulate(&m.config(seed)?, spec.depth)?;
            let grid = levels.level(spec.depth).clone();
            Ok(Realized { seed, word: None, scheduled: Vec::new(), grid, levels: Some(levels) })
        }
    }
}

pub fn spec_window(spec: &ExperimentSpec) -> Result<Option<Window>> {
    spec.window.as_ref().map(|w| Window::new(w.lo.clone(), w.hi.clone())).transpose()
}

/// The set an estimate runs on: the realization, blown up to the spec's window if any.
pub fn estimation_set(spec: &ExperimentSpec, realized: &Realized) -> Result<GridSet> {
    match spec_window(spec)? {
        Some(w) => blowup(&realized.grid, &w),
        None => Ok(realized.grid.clone()),
    }
}

pub fn ladder_for(spec: &ExperimentSpec, set: &GridSet) -> Result<ScaleLadder> {
    let l = spec.ladder.clone().unwrap_or_default();
    let rho = l.rho.unwrap_or(DEFAULT_RHO);
    match l.pairs {
        Some(pairs) => ScaleLadder::new(rho, pairs.into_iter().map(|[a, b]| (a, b)).collect()),
        None => ScaleLadder::dyadic(set, rho),
    }
}

pub fn centers_for(spec: &ExperimentSpec, set: &GridSet, seed: u64) -> Centers {
    match spec.ladder.as_ref().and_then(|l| l.centers) {
        Some(count) => Centers::Sample { count, seed },
        None if set.len() <= 4 * DEFAULT_SAMPLE => Centers::All,
        None => Centers::Sample { count: DEFAULT_SAMPLE, seed },
    }
}

pub fn estimate(spec: &ExperimentSpec, seed: u64) -> Result<(Realized, AssouadEstimate)> {
    let realized = realize(spec, seed)?;
    let set = estimation_set(spec, &realized)?;
    if set.is_empty() {
        return Err(Error::Scale("the realization is empty at this depth".into()));
    }
    let ladder = ladder_for(spec, &set)?;
    let est = assouad_estimate(&set, &ladder, centers_for(spec, &set, seed))?;
    Ok((realized, est))
}

/// Closed forms plus one estimate per seed.
pub fn full_report(spec: &ExperimentSpec) -> Result<DimensionReport> {
    let mut report = theory(spec)?;
    for &seed in &spec.seeds {
        let est = match estimate(spec, seed) {
            Ok((_, est)) => est,
            // extinct percolation realizations have nothing to estimate
            Err(Error::Scale(_)) if matches!(spec.model, Model::Percolation(_)) => continue,
            Err(e) => return Err(e),
        };
        report.empirical.push(EmpiricalEntry {
            name: "assouad_estimate".into(),
            estimate: est.exponent,
            residual: est.residual,
            seed,
            depth: spec.depth,
            ladder: est.ladder.clone(),
            counts: est.counts.clone(),
        });
        if let Some(c) = report.contrasts.first_mut() {
            c.values.insert(format!("estimate_seed_{seed}"), est.exponent);
        }
    }
    Ok(report)
}

/// A digit path whose approximate square has the row letter's maximal column
/// in the vertical run, so the blow-up approaches the product target.
pub fn tangent_digit_path(rifs: &CarpetRIFS, word: &Word, scales: &ScheduledScales, j: usize) -> Vec<usize> {
    let row_ifs = rifs.ifs(j);
    let best = row_ifs.max_column();
    let max_digit = row_ifs.digits().iter().position(|d| d.0 == best).expect("column occupied");
    (1..=scales.k2)
        .map(|t| if t > scales.k1 && t <= scales.k1 + scales.run && word.at(t) == j { max_digit } else { 0 })
        .collect()
}

/// One blow-up stage per scheduled entry of a spliced carpet realization,
/// with the matching bound `(m_i^{-2n} + n_j^{-2n})^{1/2}` plus one cell diagonal.
pub fn carpet_tangent_stages(spec: &ExperimentSpec, realized: &Realized) -> Result<(Vec<TangentStage>, Vec<f64>)> {
    let Model::Carpet(rifs) = &spec.model else {
        return Err(invalid("product targets need a carpet spec"));
    };
    let s = spec.schedule.as_ref().ok_or_else(|| invalid("product targets need a good-word schedule"))?;
    let word = realized.word.as_ref().expect("carpets have words");
    let (i, j) = schedule_letters(spec, rifs);
    let mut stages = Vec::new();
    let mut bounds = Vec::new();
    for (entry, scales) in s.entries.iter().zip(&realized.scheduled) {
        let path = tangent_digit_path(rifs, word, scales, j);
        let q = approximate_squares(word, rifs, &entry.scale, &path)?;
        let window = Window::new(vec![q.base.0, q.height.0], vec![q.base.1, q.height.1])?;
        let target = tangent_product_target(rifs, i, j, entry.run)?;
        let (mi, nj) = (rifs.ifs(i).m() as f64, rifs.ifs(j).n() as f64);
        let run = entry.run as i32;
        let bound = (mi.powi(-2 * run) + nj.powi(-2 * run)).sqrt() + target.cell_diagonal();
        stages.push(TangentStage { set: realized.grid.clone(), window, target });
        bounds.push(bound);
    }
    Ok((stages, bounds))
}
