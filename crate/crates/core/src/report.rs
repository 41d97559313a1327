//! Dimension reports: closed-form values with applicability flags, empirical
//! estimates with their ladders, and contrasts.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::carpet::{
    as_assouad_carpet, carpet_box_dim, gui_li_average, mackay_dim, mcmullen_hausdorff_dim, sure_upper_carpet,
};
use crate::error::{Error, Result};
use crate::estimate::{PairCount, ScaleLadder};
use crate::percolation::{
    assouad_dim_percolation, extinction_probability, hausdorff_dim_percolation, projection_assouad, ASSOUAD_NOTE,
    PROJECTION_NOTE,
};
use crate::selfsim::{
    almost_sure_hausdorff, as_assouad_selfsimilar, check_uosc, periodic_sup_probe, sure_assouad_upper,
    SimilarityIFS,
};
use crate::spec::{ExperimentSpec, Kind, Model};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryEntry {
    pub name: String,
    pub value: Value,
    /// Which closed form produced the value.
    pub formula: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub flags: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TheoryEntry {
    fn new(name: &str, value: Value, formula: &str) -> Self {
        Self { name: name.into(), value, formula: formula.into(), flags: BTreeMap::new(), note: None }
    }

    fn flag(mut self, key: &str, value: Value) -> Self {
        self.flags.insert(key.into(), value);
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalEntry {
    pub name: String,
    pub estimate: f64,
    pub residual: f64,
    pub seed: u64,
    pub depth: usize,
    pub ladder: ScaleLadder,
    pub counts: Vec<PairCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contrast {
    pub name: String,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub kind: Kind,
    pub theoretical: Vec<TheoryEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub empirical: Vec<EmpiricalEntry>,
    pub contrasts: Vec<Contrast>,
}

impl DimensionReport {
    pub fn entry(&self, name: &str) -> Option<&TheoryEntry> {
        self.theoretical.iter().find(|e| e.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Longest period such that all patterns up to it stay within `cap`.
fn probe_period(alphabet: usize, cap: usize) -> usize {
    let mut period = 0;
    let mut total = 0usize;
    loop {
        let next = alphabet.checked_pow(period as u32 + 1).and_then(|c| total.checked_add(c));
        match next {
            Some(t) if t <= cap && period < 6 => {
                total = t;
                period += 1;
            }
            _ => return period.max(1),
        }
    }
}

pub const PROBE_CAP: usize = 64;

fn contrast(name: &str, values: &[(&str, f64)]) -> Contrast {
    Contrast { name: name.into(), values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
}

/// Every closed-form value applicable to the model; no simulation.
pub fn theory(spec: &ExperimentSpec) -> Result<DimensionReport> {
    let mut t = Vec::new();
    let mut contrasts = Vec::new();
    match &spec.model {
        Model::Selfsim(rifs) => {
            let sims: Vec<f64> = rifs.ifss().iter().map(SimilarityIFS::similarity_dimension).collect();
            t.push(TheoryEntry::new("sim_dims", json!(sims), "moran-root"));
            let hd = almost_sure_hausdorff(rifs);
            t.push(TheoryEntry::new("as_hausdorff", json!(hd), "averaged-pressure-root").note("needs the UOSC"));
            let uosc = check_uosc(rifs);
            t.push(TheoryEntry::new("uosc", json!(uosc), "unit-cube-candidate"));
            let sure = sure_assouad_upper(rifs);
            t.push(
                TheoryEntry::new("sure_assouad_upper", json!(sure.value), "max-similarity-dimension")
                    .flag("valid", json!(sure.valid))
                    .flag("uosc", json!(sure.uosc))
                    .note(sure.note),
            );
            let asv = as_assouad_selfsimilar(rifs);
            t.push(
                TheoryEntry::new("as_assouad", json!(asv.value), "max-similarity-dimension")
                    .flag("valid", json!(asv.valid))
                    .flag("uosc", json!(asv.uosc))
                    .note(asv.note),
            );
            let probe = periodic_sup_probe(rifs, probe_period(rifs.alphabet(), PROBE_CAP), PROBE_CAP)?;
            t.push(
                TheoryEntry::new("periodic_probe", json!(probe.value), "composed-period-moran-root")
                    .flag("best_pattern", json!(probe.best_pattern))
                    .flag("patterns_checked", json!(probe.patterns_checked))
                    .flag("within_ifs_all_dependent", json!(probe.within_ifs_all_dependent)),
            );
            if let Some(w) = &probe.witness {
                t.push(TheoryEntry::new("independence_witness", json!(w), "multiplicative-independence"));
            }
            contrasts.push(contrast(
                "assouad_vs_hausdorff",
                &[("as_assouad", asv.value), ("as_hausdorff", hd), ("periodic_probe", probe.value)],
            ));
        }
        Model::Carpet(rifs) => {
            let mackay: Vec<f64> = rifs.ifss().iter().map(mackay_dim).collect();
            t.push(TheoryEntry::new("mackay", json!(mackay), "mackay"));
            let a = as_assouad_carpet(rifs);
            t.push(
                TheoryEntry::new("as_assouad", json!(a.value), "max-column-plus-max-row")
                    .flag("column_letter", json!(a.column_letter))
                    .flag("row_letter", json!(a.row_letter)),
            );
            let s = sure_upper_carpet(rifs);
            t.push(TheoryEntry::new("sure_upper", json!(s.value), "max-column-plus-max-row").note("holds for every realization"));
            let hausdorff: Vec<f64> = rifs.ifss().iter().map(mcmullen_hausdorff_dim).collect();
            let boxd: Vec<f64> = rifs.ifss().iter().map(carpet_box_dim).collect();
            t.push(TheoryEntry::new("hausdorff_deterministic", json!(hausdorff), "mcmullen").note("comparison helper"));
            t.push(TheoryEntry::new("box_deterministic", json!(boxd), "mcmullen-box").note("comparison helper"));
            let mut pairs = vec![("as_assouad", a.value)];
            let (dims, source) = match &spec.per_ifs_dims {
                Some(d) => (d.clone(), "supplied"),
                None => (hausdorff, "hausdorff-default"),
            };
            match gui_li_average(rifs, &dims) {
                Ok(v) => {
                    t.push(TheoryEntry::new("gui_li", json!(v), "probability-weighted-average").flag("per_ifs_dims", json!(source)));
                    pairs.push(("gui_li", v));
                }
                Err(Error::NotApplicable(msg)) => {
                    t.push(TheoryEntry::new("gui_li", Value::Null, "probability-weighted-average").note(msg));
                }
                Err(e) => return Err(e),
            }
            contrasts.push(contrast("assouad_vs_average", &pairs));
        }
        Model::Percolation(m) => {
            let (q, p_noext) = extinction_probability(m.n, m.d, &m.p);
            t.push(
                TheoryEntry::new("extinction", json!(q), "least-fixed-point").flag("p_noext", json!(p_noext)),
            );
            let mut pairs = Vec::new();
            match hausdorff_dim_percolation(m.n, m.d, &m.p) {
                Ok(v) => {
                    let mut e = TheoryEntry::new("hausdorff", json!(v), "log-mean-offspring");
                    if p_noext == 0.0 {
                        e = e.note("critical: extinct almost surely");
                    }
                    t.push(e);
                    pairs.push(("hausdorff", v));
                }
                Err(Error::NotApplicable(msg)) => t.push(TheoryEntry::new("hausdorff", Value::Null, "log-mean-offspring").note(msg)),
                Err(e) => return Err(e),
            }
            match assouad_dim_percolation(m.n, m.d, &m.p) {
                Ok(v) => {
                    t.push(TheoryEntry::new("assouad", json!(v), "ambient-dimension").note(ASSOUAD_NOTE));
                    let proj: Vec<f64> =
                        (1..=m.d).map(|k| projection_assouad(m.n, m.d, &m.p, k)).collect::<Result<_>>()?;
                    t.push(TheoryEntry::new("projection_assouad", json!(proj), "projection-rank").note(PROJECTION_NOTE));
                    pairs.push(("assouad", v));
                }
                Err(Error::NotApplicable(msg)) => t.push(TheoryEntry::new("assouad", Value::Null, "ambient-dimension").note(msg)),
                Err(e) => return Err(e),
            }
            contrasts.push(contrast("assouad_vs_hausdorff", &pairs));
        }
    }
    Ok(DimensionReport { kind: spec.kind, theoretical: t, empirical: Vec::new(), contrasts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> ExperimentSpec {
        ExperimentSpec::parse(text).unwrap()
    }

    #[test]
    fn carpet_contrast() {
        let s = spec(
            r#"{"kind": "carpet", "model": {"ifss": [
                {"m": 2, "n": 3, "digits": [[0, 2], [1, 2]]},
                {"m": 2, "n": 3, "digits": [[1, 0], [1, 1], [1, 2]]}], "probs": ["1/2", "1/2"]},
                "depth": 4, "per_ifs_dims": [1, 1]}"#,
        );
        let r = theory(&s).unwrap();
        assert_eq!(r.entry("mackay").unwrap().value, json!([1.0, 1.0]));
        assert_eq!(r.entry("as_assouad").unwrap().value, json!(2.0));
        assert_eq!(r.entry("gui_li").unwrap().value, json!(1.0));
    }

    #[test]
    fn single_selfsim_all_equal() {
        let s = spec(
            r#"{"kind": "selfsim", "model": {"ifss": [[{"c": "1/3", "t": ["0"]}, {"c": "1/3", "t": ["2/3"]}]], "probs": ["1"]},
                "depth": 3}"#,
        );
        let r = theory(&s).unwrap();
        let s0 = 2f64.ln() / 3f64.ln();
        for name in ["as_hausdorff", "sure_assouad_upper", "as_assouad", "periodic_probe"] {
            let v = r.entry(name).unwrap().value.as_f64().unwrap();
            assert!((v - s0).abs() < 1e-9, "{name}");
        }
        assert_eq!(r.entry("uosc").unwrap().value, json!("verified"));
    }

    #[test]
    fn percolation_entries() {
        let s = spec(r#"{"kind": "percolation", "model": {"n": 2, "d": 2, "p": "7/10"}, "depth": 3}"#);
        let r = theory(&s).unwrap();
        assert_eq!(r.entry("assouad").unwrap().value, json!(2.0));
        let h = r.entry("hausdorff").unwrap().value.as_f64().unwrap();
        assert!((h - 1.4854).abs() < 1e-4);
        let sub = spec(r#"{"kind": "percolation", "model": {"n": 2, "d": 2, "p": "1/5"}, "depth": 3}"#);
        let r = theory(&sub).unwrap();
        assert_eq!(r.entry("assouad").unwrap().value, Value::Null);
    }

    #[test]
    fn overlapping_pair() {
        let model = serde_json::to_string(&crate::selfsim::overlap_example()).unwrap();
        let s = spec(&format!(r#"{{"kind": "selfsim", "model": {model}, "depth": 4}}"#));
        let r = theory(&s).unwrap();
        let sims = r.entry("sim_dims").unwrap().value.as_array().unwrap().clone();
        assert!((sims[0].as_f64().unwrap() - 0.81137).abs() < 1e-4);
        assert!((sims[1].as_f64().unwrap() - 0.511918).abs() < 1e-5);
        assert_eq!(r.entry("uosc").unwrap().value, json!("refuted-for-unit-cube"));
        let w = &r.entry("independence_witness").unwrap().value;
        assert_eq!(w["ratios"], json!(["1/18", "1/12"]), "{w}");
    }

    #[test]
    fn probe_periods() {
        assert_eq!(probe_period(2, 64), 5);
        assert_eq!(probe_period(1, 64), 6);
        assert_eq!(probe_period(100, 64), 1);
    }
}
