//! Browser bindings: closed-form dimensions, realization pictures and
//! percolation runs for the static demo page in `www/`.

use serde_json::json;
use wasm_bindgen::prelude::*;

use assouadlab::experiment::realize;
use assouadlab::GridSet;
use assouadlab::percolation::{
    assouad_dim_percolation, extinction_probability, hausdorff_dim_percolation, simulate, survival_iterate,
    tangent_witness_search, PercConfig,
};
use assouadlab::pgm::Pgm;
use assouadlab::rational::parse_rational;
use assouadlab::report::theory;
use assouadlab::spec::ExperimentSpec;

/// Greyscale image handed to the page as RGBA bytes.
#[wasm_bindgen]
pub struct Picture {
    width: u32,
    height: u32,
    rgba: Vec<u8>,
}

#[wasm_bindgen]
impl Picture {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }
}

impl From<Pgm> for Picture {
    fn from(img: Pgm) -> Self {
        let rgba = img.pixels.iter().flat_map(|&v| [v, v, v, 255]).collect();
        Picture { width: img.width, height: img.height, rgba }
    }
}

/// Theoretical dimension entries for a spec, as pretty JSON.
pub fn dimensions_json(spec: &str) -> Result<String, String> {
    let spec = ExperimentSpec::parse(spec).map_err(|e| e.to_string())?;
    theory(&spec).map(|r| r.to_json()).map_err(|e| e.to_string())
}

/// Picture of one realization of a planar spec.
pub fn render_picture(spec: &str, seed: u64, max_side: u32) -> Result<Picture, String> {
    let spec = ExperimentSpec::parse(spec).map_err(|e| e.to_string())?;
    let cells = spec.estimated_cells(seed).map_err(|e| e.to_string())?;
    if cells > 5e6 {
        return Err(format!("about {cells:.2e} cells; lower the depth for the browser"));
    }
    let r = realize(&spec, seed).map_err(|e| e.to_string())?;
    let img = match &r.levels {
        Some(levels) => levels.render(max_side),
        None if r.grid.dim() == 1 => {
            // sets on a line are drawn as a strip
            let flat = r.grid.cells().flat_map(|c| [c[0], 0]).collect();
            let width = r.grid.resolution()[0].min(max_side as u64) as u32;
            GridSet::from_flat(vec![r.grid.resolution()[0], 1], flat)
                .and_then(|strip| strip.render(width, (width / 8).max(1)))
        }
        None => r.grid.render_fit(max_side),
    };
    img.map(Picture::from).map_err(|e| e.to_string())
}

/// One planar percolation run: summary statistics and the level picture.
pub fn percolation_run(n: u64, p: &str, depth: usize, seed: u64) -> Result<(String, Picture), String> {
    if depth > 11 {
        return Err("depth above 11 is too large for the browser".into());
    }
    let p = parse_rational(p).map_err(|e| e.to_string())?;
    let config = PercConfig::new(n, 2, p.clone(), seed).map_err(|e| e.to_string())?;
    let levels = simulate(&config, depth).map_err(|e| e.to_string())?;
    let (q, _) = extinction_probability(n, 2, &p);
    let witness = tangent_witness_search(&levels, depth).map(|w| json!({ "level": w.level, "cube": w.cube, "m": w.depth }));
    let summary = json!({
        "survived": levels.survived(),
        "level_counts": levels.levels().iter().map(|l| l.len()).collect::<Vec<_>>(),
        "extinction": q,
        "survival_to_depth": survival_iterate(n, 2, &p, depth),
        "hausdorff": hausdorff_dim_percolation(n, 2, &p).ok(),
        "assouad": assouad_dim_percolation(n, 2, &p).ok(),
        "witness": witness,
    });
    let picture = levels.render(512).map_err(|e| e.to_string())?;
    Ok((serde_json::to_string_pretty(&summary).expect("plain JSON"), picture.into()))
}

#[wasm_bindgen]
pub fn dimensions(spec: &str) -> Result<String, JsError> {
    dimensions_json(spec).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn render(spec: &str, seed: u64, max_side: u32) -> Result<Picture, JsError> {
    render_picture(spec, seed, max_side).map_err(|e| JsError::new(&e))
}

/// Summary JSON of a percolation run together with its picture.
#[wasm_bindgen]
pub struct PercolationRun {
    summary: String,
    picture: Picture,
}

#[wasm_bindgen]
impl PercolationRun {
    #[wasm_bindgen(getter)]
    pub fn summary(&self) -> String {
        self.summary.clone()
    }

    pub fn picture(self) -> Picture {
        self.picture
    }
}

#[wasm_bindgen]
pub fn percolate(n: u64, p: &str, depth: usize, seed: u64) -> Result<PercolationRun, JsError> {
    let (summary, picture) = percolation_run(n, p, depth, seed).map_err(|e| JsError::new(&e))?;
    Ok(PercolationRun { summary, picture })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CARPET: &str = r#"{"kind": "carpet", "model": {"ifss": [
        {"m": 2, "n": 3, "digits": [[0, 2], [1, 2]]},
        {"m": 2, "n": 3, "digits": [[1, 0], [1, 1], [1, 2]]}], "probs": ["1/2", "1/2"]},
        "depth": 6, "per_ifs_dims": [1, 1]}"#;

    #[test]
    fn dims_and_pictures() {
        let dims: serde_json::Value = serde_json::from_str(&dimensions_json(CARPET).unwrap()).unwrap();
        assert_eq!(dims["kind"], "carpet");
        let pic = render_picture(CARPET, 3, 128).unwrap();
        assert_eq!(pic.rgba.len(), (pic.width * pic.height * 4) as usize);
        assert!(pic.rgba.chunks(4).any(|px| px[0] == 0));
        assert!(dimensions_json("{").is_err());
        let line = r#"{"kind": "selfsim", "model": {"ifss": [[{"c": "1/3", "t": ["0"]}, {"c": "1/3", "t": ["2/3"]}]], "probs": ["1"]}, "depth": 4}"#;
        let strip = render_picture(line, 0, 256).unwrap();
        assert_eq!((strip.width, strip.height), (256, 32));
    }

    #[test]
    fn percolation_summary() {
        let (summary, pic) = percolation_run(2, "7/10", 6, 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
        assert_eq!(v["assouad"], 2.0);
        assert_eq!(v["level_counts"].as_array().unwrap().len(), 7);
        assert_eq!(pic.width, 64);
        let (sub, _) = percolation_run(2, "1/10", 4, 1).unwrap();
        assert!(sub.contains("\"assouad\": null"));
        assert!(percolation_run(2, "7/10", 14, 1).is_err());
    }
}
