//! JSON experiment specifications.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::carpet::CarpetRIFS;
use crate::error::{Error, Result};
use crate::percolation::PercConfig;
use crate::rational::Rational;
use crate::selfsim::SimilarityRIFS;
use crate::words::{Realization, ScheduleEntry, Word};

/// Upper limit on the number of occupied cells an experiment may build.
pub const CELL_BUDGET: f64 = 2e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Selfsim,
    Carpet,
    Percolation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercModel {
    pub n: u64,
    pub d: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub p: Rational,
}

impl PercModel {
    pub fn config(&self, seed: u64) -> Result<PercConfig> {
        PercConfig::new(self.n, self.d, self.p.clone(), seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Selfsim(SimilarityRIFS),
    Carpet(CarpetRIFS),
    Percolation(PercModel),
}

impl Model {
    fn to_value(&self) -> serde_json::Value {
        match self {
            Model::Selfsim(m) => serde_json::to_value(m),
            Model::Carpet(m) => serde_json::to_value(m),
            Model::Percolation(m) => serde_json::to_value(m),
        }
        .expect("models serialize")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[f64; 2]>>,
    /// Number of sampled centers; all occupied cells when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<usize>,
}

/// Good-word construction for carpets: runs of the row letter `j` and the
/// column letter `i` spliced at the scheduled scales.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodWordSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub entries: Vec<ScheduleEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    #[serde(with = "crate::rational::serde_q_vec")]
    pub lo: Vec<Rational>,
    #[serde(with = "crate::rational::serde_q_vec")]
    pub hi: Vec<Rational>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pgm: Option<String>,
}

impl Outputs {
    fn is_empty(&self) -> bool {
        self == &Outputs::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub model: Model,
    pub realization: Option<Realization>,
    pub depth: usize,
    pub ladder: Option<LadderSpec>,
    pub seeds: Vec<u64>,
    pub per_ifs_dims: Option<Vec<f64>>,
    pub schedule: Option<GoodWordSpec>,
    pub window: Option<WindowSpec>,
    pub resolution: Option<Vec<u64>>,
    pub outputs: Outputs,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec<'a> {
    kind: Kind,
    #[serde(borrow)]
    model: &'a RawValue,
    #[serde(default)]
    realization: Option<Realization>,
    depth: usize,
    #[serde(default)]
    ladder: Option<LadderSpec>,
    #[serde(default)]
    seeds: Option<Vec<u64>>,
    #[serde(default)]
    per_ifs_dims: Option<Vec<f64>>,
    #[serde(default)]
    schedule: Option<GoodWordSpec>,
    #[serde(default)]
    window: Option<WindowSpec>,
    #[serde(default)]
    resolution: Option<Vec<u64>>,
    #[serde(default)]
    outputs: Option<Outputs>,
}

#[derive(Serialize)]
struct SpecOut<'a> {
    kind: Kind,
    model: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    realization: &'a Option<Realization>,
    depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder: &'a Option<LadderSpec>,
    seeds: &'a [u64],
    #[serde(skip_serializing_if = "Option::is_none")]
    per_ifs_dims: &'a Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: &'a Option<GoodWordSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: &'a Option<WindowSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: &'a Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Outputs::is_empty")]
    outputs: &'a Outputs,
}

fn located(line: usize, column: usize, field: &str, msg: impl std::fmt::Display) -> Error {
    let field = if field.is_empty() || field == "." || field == "?" { "<root>" } else { field };
    Error::Spec(format!("line {line}, column {column}, field `{field}`: {msg}"))
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Byte offset of a 1-based line and column.
fn offset_of(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Conversion errors are raised after the offending value has been consumed;
/// moves the position back over separators to that value's last character.
fn settle(text: &str, err: &serde_json::Error) -> (usize, usize) {
    if err.classify() != serde_json::error::Category::Data || err.line() == 0 {
        return (err.line(), err.column());
    }
    let mut at = offset_of(text, err.line(), err.column());
    while at > 0 && text[..at].ends_with(|c: char| c.is_whitespace() || c == ',') {
        at -= 1;
    }
    if at == 0 {
        return (err.line(), err.column());
    }
    line_col(text, at - 1)
}

fn strip_location(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}

fn parse_model<T: for<'de> Deserialize<'de>>(text: &str, raw: &RawValue) -> Result<T> {
    let inner = raw.get();
    let offset = inner.as_ptr() as usize - text.as_ptr() as usize;
    let (base_line, base_col) = line_col(text, offset);
    let mut de = serde_json::Deserializer::from_str(inner);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let err = e.into_inner();
        let (l, c) = settle(inner, &err);
        let line = base_line + l - 1;
        let column = if l == 1 { base_col + c - 1 } else { c };
        let field = if path == "." { "model".to_string() } else { format!("model.{path}") };
        located(line, column, &field, strip_location(&err.to_string()))
    })
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: RawSpec = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let err = e.into_inner();
            let (line, column) = settle(text, &err);
            located(line, column, &path, strip_location(&err.to_string()))
        })?;
        de.end().map_err(|e| located(e.line(), e.column(), "", "trailing characters"))?;
        let model_at = line_col(text, raw.model.get().as_ptr() as usize - text.as_ptr() as usize);
        let model = match raw.kind {
            Kind::Selfsim => Model::Selfsim(parse_model(text, raw.model)?),
            Kind::Carpet => Model::Carpet(parse_model(text, raw.model)?),
            Kind::Percolation => {
                let m: PercModel = parse_model(text, raw.model)?;
                m.config(0).map_err(|e| located(model_at.0, model_at.1, "model", e))?;
                Model::Percolation(m)
            }
        };
        let spec = ExperimentSpec {
            kind: raw.kind,
            model,
            realization: raw.realization,
            depth: raw.depth,
            ladder: raw.ladder,
            seeds: raw.seeds.unwrap_or_else(|| vec![0]),
            per_ifs_dims: raw.per_ifs_dims,
            schedule: raw.schedule,
            window: raw.window,
            resolution: raw.resolution,
            outputs: raw.outputs.unwrap_or_default(),
        };
        spec.validate().map_err(|(field, msg)| {
            let at = field_location(text, field);
            located(at.0, at.1, field, msg)
        })?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let out = SpecOut {
            kind: self.kind,
            model: self.model.to_value(),
            realization: &self.realization,
            depth: self.depth,
            ladder: &self.ladder,
            seeds: &self.seeds,
            per_ifs_dims: &self.per_ifs_dims,
            schedule: &self.schedule,
            window: &self.window,
            resolution: &self.resolution,
            outputs: &self.outputs,
        };
        serde_json::to_string_pretty(&out).expect("spec serializes") + "\n"
    }

    pub fn alphabet(&self) -> usize {
        match &self.model {
            Model::Selfsim(m) => m.alphabet(),
            Model::Carpet(m) => m.alphabet(),
            Model::Percolation(_) => 0,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.model {
            Model::Selfsim(m) => m.dim(),
            Model::Carpet(_) => 2,
            Model::Percolation(m) => m.d,
        }
    }

    /// The realization rule with the model's probabilities filled in and the
    /// given seed applied to i.i.d. parts.
    pub fn realization_for(&self, seed: u64) -> Option<Realization> {
        let probs = match &self.model {
            Model::Selfsim(m) => m.probs().clone(),
            Model::Carpet(m) => m.probs().clone(),
            Model::Percolation(_) => return None,
        };
        let rule = self.realization.clone().unwrap_or(Realization::Iid { seed, probs: None });
        Some(rule.with_default_probs(&probs).with_seed(seed))
    }

    /// Length-`depth` prefix of the realization for `seed`.
    pub fn word(&self, seed: u64) -> Result<Word> {
        let rule = self
            .realization_for(seed)
            .ok_or_else(|| Error::NotApplicable("percolation has no realization word".into()))?;
        let w = rule.prefix(self.depth)?;
        w.check(self.alphabet())?;
        Ok(w)
    }

    /// Expected number of cells at the deepest level for `seed`.
    pub fn estimated_cells(&self, seed: u64) -> Result<f64> {
        Ok(match &self.model {
            Model::Selfsim(m) => self.word(seed)?.letters().iter().map(|&l| m.ifs(l).maps().len() as f64).product(),
            Model::Carpet(m) => self.word(seed)?.letters().iter().map(|&l| m.ifs(l).digits().len() as f64).product(),
            Model::Percolation(m) => {
                let mean = (m.n as f64).powi(m.d as i32) * crate::rational::to_f64(&m.p);
                (0..=self.depth).map(|k| mean.powi(k as i32)).sum()
            }
        })
    }

    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.seeds.is_empty() {
            return Err(("seeds", "at least one seed is required".into()));
        }
        if self.kind == Kind::Percolation {
            for (field, present) in [
                ("realization", self.realization.is_some()),
                ("schedule", self.schedule.is_some()),
                ("per_ifs_dims", self.per_ifs_dims.is_some()),
            ] {
                if present {
                    return Err((field, "not used by percolation specs".into()));
                }
            }
        } else {
            self.word(self.seeds[0]).map_err(|e| ("realization", e.to_string()))?;
        }
        if let Some(dims) = &self.per_ifs_dims {
            if dims.len() != self.alphabet() {
                return Err(("per_ifs_dims", format!("{} values for {} IFSs", dims.len(), self.alphabet())));
            }
        }
        if let Some(s) = &self.schedule {
            if self.kind != Kind::Carpet {
                return Err(("schedule", "good-word schedules apply to carpets".into()));
            }
            for l in [s.i, s.j].into_iter().flatten() {
                if l == 0 || l > self.alphabet() {
                    return Err(("schedule", format!("letter {l} outside 1..={}", self.alphabet())));
                }
            }
        }
        if let Some(w) = &self.window {
            if w.lo.len() != self.dim() || w.hi.len() != self.dim() {
                return Err(("window", format!("window corners must have {} coordinates", self.dim())));
            }
            crate::estimate::Window::new(w.lo.clone(), w.hi.clone()).map_err(|e| ("window", e.to_string()))?;
        }
        if let Some(r) = &self.resolution {
            if r.len() != self.dim() || r.contains(&0) {
                return Err(("resolution", format!("need {} positive entries", self.dim())));
            }
        }
        if let Some(l) = &self.ladder {
            if let Some(rho) = l.rho {
                if !(rho > 0.0 && rho <= 1.0) {
                    return Err(("ladder", format!("rho = {rho} outside (0,1]")));
                }
            }
        }
        let cells = self.estimated_cells(self.seeds[0]).map_err(|e| ("realization", e.to_string()))?;
        if cells > CELL_BUDGET {
            return Err(("depth", format!("depth {} needs about {cells:.3e} cells (budget {CELL_BUDGET:.0e})", self.depth)));
        }
        Ok(())
    }
}

/// Position of `"field"` in the text, or the start when absent.
fn field_location(text: &str, field: &str) -> (usize, usize) {
    let needle = format!("\"{field}\"");
    text.find(&needle).map_or((1, 1), |off| line_col(text, off))
}
