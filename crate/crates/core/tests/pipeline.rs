use assouadlab::carpet::{carpet_grid, line_pair_example};
use assouadlab::estimate::{blowup, hausdorff_distance, pseudo_hausdorff, GridSet};
use assouadlab::experiment::{full_report, realize};
use assouadlab::percolation::{simulate, PercConfig, PercLevels};
use assouadlab::rational::ratio;
use assouadlab::selfsim::{attractor_boxes, overlap_example, periodic_sup_probe};
use assouadlab::spec::ExperimentSpec;
use assouadlab::words::parse_word;
use proptest::prelude::*;

fn read_spec(name: &str) -> ExperimentSpec {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name);
    ExperimentSpec::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn example_specs_parse_and_round_trip() {
    for name in [
        "line_pair.json",
        "line_segment.json",
        "spliced_carpet.json",
        "blowup_window.json",
        "overlap.json",
        "cantor_pair.json",
        "percolation.json",
    ] {
        let spec = read_spec(name);
        assert_eq!(ExperimentSpec::parse(&spec.to_json()).unwrap(), spec, "{name}");
        assert!(spec.estimated_cells(spec.seeds[0]).unwrap() < 1e7, "{name}");
    }
}

#[test]
fn figure_word_is_spliced_in() {
    let spec = read_spec("blowup_window.json");
    let word = spec.word(0).unwrap();
    assert_eq!(word.prefix(8), parse_word("2,2,2,1,1,1,1,2").unwrap());
    let r = realize(&spec, 0).unwrap();
    let w = assouadlab::experiment::spec_window(&spec).unwrap().unwrap();
    assert!(!blowup(&r.grid, &w).unwrap().is_empty());
}

#[test]
fn selfsim_realization_matches_boxes() {
    let spec = read_spec("overlap.json");
    let r = realize(&spec, 5).unwrap();
    let word = r.word.clone().unwrap();
    let boxes = attractor_boxes(&overlap_example(), &word, spec.depth).unwrap();
    let direct = boxes.rasterize(r.grid.resolution()).unwrap();
    assert_eq!(direct, r.grid);
}

#[test]
fn overlap_probe_reports_independent_pair() {
    let probe = periodic_sup_probe(&overlap_example(), 2, 1000).unwrap();
    assert!(probe.witness.is_some());
}

#[test]
fn reports_cover_every_kind() {
    for name in ["line_pair.json", "overlap.json", "percolation.json"] {
        let mut spec = read_spec(name);
        spec.seeds.truncate(1);
        spec.depth = spec.depth.min(7);
        let report = full_report(&spec).unwrap();
        assert!(!report.theoretical.is_empty());
        assert_eq!(report.empirical.len(), 1, "{name}");
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert!(json["contrasts"].is_array());
    }
}

#[test]
fn grid_csv_round_trip() {
    let rifs = line_pair_example();
    let word = parse_word("1,2,2,1,2").unwrap();
    let grid = carpet_grid(&word, &rifs, 5).unwrap().cells;
    assert_eq!(GridSet::from_csv(&grid.to_csv()).unwrap(), grid);
}

#[test]
fn percolation_levels_are_nested() {
    let config = PercConfig::new(3, 2, ratio(1, 2), 11).unwrap();
    let levels = simulate(&config, 5).unwrap();
    assert!(PercLevels::from_levels(3, levels.levels().to_vec()).is_ok());
    let csv = levels.to_csv();
    assert!(csv.starts_with("level,x1,x2\n"));
    assert_eq!(csv.lines().count(), 1 + levels.levels().iter().map(GridSet::len).sum::<usize>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distances_are_symmetric_and_bound_directed(
        a in proptest::collection::btree_set((0u64..16, 0u64..16), 1..20),
        b in proptest::collection::btree_set((0u64..16, 0u64..16), 1..20),
    ) {
        let to_set = |s: &std::collections::BTreeSet<(u64, u64)>| {
            GridSet::from_cells(vec![16, 16], s.iter().map(|&(x, y)| vec![x, y]).collect()).unwrap()
        };
        let (a, b) = (to_set(&a), to_set(&b));
        let h = hausdorff_distance(&a, &b).unwrap();
        prop_assert_eq!(h, hausdorff_distance(&b, &a).unwrap());
        prop_assert!(pseudo_hausdorff(&a, &b).unwrap() <= h);
        prop_assert!(pseudo_hausdorff(&b, &a).unwrap() <= h);
    }
}
