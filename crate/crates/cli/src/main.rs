use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use assouadlab::carpet::carpet_grid;
use assouadlab::estimate::{blowup, tangent_convergence, GridSet, TangentStage};
use assouadlab::experiment::{self, carpet_tangent_stages, realize, spec_window};
use assouadlab::percolation::{
    assouad_dim_percolation, conditioned_sample, extinction_probability, hausdorff_dim_percolation,
    lemma_quantities, simulate, survival_iterate, tangent_witness_search, PercConfig, PercLevels, ASSOUAD_NOTE,
};
use assouadlab::pgm::Pgm;
use assouadlab::rational::{format_rational, parse_rational, Rational};
use assouadlab::report::theory;
use assouadlab::spec::{ExperimentSpec, Model};
use assouadlab::Error;

mod output;

use output::Outputs;

#[derive(Parser)]
#[command(name = "assouadlab", version, about = "Random fractals: dimension formulas, samples and covering estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form dimension values for a spec, as JSON.
    Dims {
        spec: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Realization word (or percolation levels) for one seed.
    Sample {
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Emit the occupied cells instead of the word.
        #[arg(long)]
        cells: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Greyscale PGM image of a realization.
    Render {
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Largest image side in pixels.
        #[arg(long, default_value_t = 1024)]
        size: u32,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Two-scale covering counts and the fitted exponent, as CSV.
    Estimate {
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Mandelbrot percolation run with analytics.
    Percolate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: usize,
        /// Retention probability, as "p/q" or a decimal.
        #[arg(long, value_parser = parse_p)]
        p: Rational,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        seed: u64,
        /// Resample seeds until the run survives to the full depth.
        #[arg(long)]
        condition: bool,
        #[arg(long, default_value_t = 1000)]
        max_retries: u64,
        /// Subtree depth cap for the tangent witness search.
        #[arg(long)]
        witness_m: Option<usize>,
        /// Summary JSON path.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Levels CSV path.
        #[arg(long)]
        levels: Option<PathBuf>,
        /// Planar render path.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Blow-ups against a named target, with distances and bounds as CSV.
    Tangent {
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum)]
        target: Target,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Closed forms plus one estimate per spec seed, as JSON.
    Report {
        spec: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    /// Column projection times maximal column, for spliced carpets.
    Product,
    /// The full grid, along percolation witnesses.
    Full,
    /// Occupancy of the shifted word, along first-digit carpet cells.
    Shift,
}

fn parse_p(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

enum Failure {
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Lib(Error::Scale(_)) => 3,
            Failure::Lib(Error::RetriesExhausted { .. }) => 4,
            Failure::Lib(_) => 2,
        }
    }
}

fn load(path: &Path) -> Result<ExperimentSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
    let spec = ExperimentSpec::parse(&text)?;
    eprintln!("estimated cells at depth {}: {:.3e}", spec.depth, spec.estimated_cells(spec.seeds[0])?);
    Ok(spec)
}

fn configure_threads() {
    if let Some(n) = std::env::var("ASSOUADLAB_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let mut outputs = Outputs::default();
    let result = run(cli.command, &mut outputs).and_then(|()| outputs.commit().map_err(Failure::Io));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn json_text(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn run(command: Command, out: &mut Outputs) -> Result<(), Failure> {
    match command {
        Command::Dims { spec, out: path } => {
            let spec = load(&spec)?;
            out.stage(path.as_deref(), theory(&spec)?.to_json());
        }
        Command::Report { spec, out: path } => {
            let spec = load(&spec)?;
            out.stage(path.as_deref(), experiment::full_report(&spec)?.to_json());
        }
        Command::Sample { spec, seed, cells, out: path } => {
            let spec = load(&spec)?;
            let r = realize(&spec, seed)?;
            let text = match (&r.levels, &r.word) {
                (Some(levels), _) => levels.to_csv(),
                (None, _) if cells => r.grid.to_csv(),
                (None, Some(w)) => format!("{w}\n"),
                (None, None) => unreachable!("non-percolation realizations have words"),
            };
            out.stage(path.as_deref(), text);
        }
        Command::Render { spec, seed, size, out: path } => {
            let spec = load(&spec)?;
            let r = realize(&spec, seed)?;
            let img = match &r.levels {
                Some(levels) if levels.dim() == 2 => levels.render(size)?,
                _ => {
                    let main = render_set(&r.grid, size)?;
                    match spec_window(&spec)? {
                        Some(w) => main.beside(&render_set(&blowup(&r.grid, &w)?, size)?, 4),
                        None => main,
                    }
                }
            };
            out.stage(Some(&path), img.to_bytes());
        }
        Command::Estimate { spec, seed, out: path } => {
            let spec = load(&spec)?;
            let (_, est) = experiment::estimate(&spec, seed)?;
            out.stage(path.as_deref(), est.to_csv());
        }
        Command::Tangent { spec, seed, target, out: path } => {
            let spec = load(&spec)?;
            out.stage(path.as_deref(), tangent(&spec, seed, target)?);
        }
        Command::Percolate { n, d, p, depth, seed, condition, max_retries, witness_m, out: path, levels, pgm } => {
            let config = PercConfig::new(n, d, p, seed)?;
            percolate(&config, depth, condition, max_retries, witness_m, out, path, levels, pgm)?;
        }
    }
    Ok(())
}

/// Planar sets as they are; sets on a line as a strip.
fn render_set(grid: &GridSet, size: u32) -> Result<Pgm, Failure> {
    match grid.dim() {
        2 => Ok(grid.render_fit(size)?),
        1 => {
            let flat = grid.cells().flat_map(|c| [c[0], 0]).collect();
            let strip = GridSet::from_flat(vec![grid.resolution()[0], 1], flat)?;
            let width = grid.resolution()[0].min(size as u64) as u32;
            Ok(strip.render(width, (width / 8).max(1))?)
        }
        _ => Err(Error::NotApplicable("only sets in one or two dimensions render".into()).into()),
    }
}

fn tangent(spec: &ExperimentSpec, seed: u64, target: Target) -> Result<String, Failure> {
    let (stages, bounds, labels) = match (target, &spec.model) {
        (Target::Product, _) => {
            let r = realize(spec, seed)?;
            let (stages, bounds) = carpet_tangent_stages(spec, &r)?;
            let labels = r.scheduled.iter().map(|s| format!("k1={} k2={} run={}", s.k1, s.k2, s.run)).collect();
            (stages, bounds, labels)
        }
        (Target::Full, Model::Percolation(m)) => {
            let cond = conditioned_sample(&m.config(seed)?, spec.depth, 1000)?;
            let best = tangent_witness_search(&cond.levels, spec.depth)
                .ok_or_else(|| Error::Scale("no cube has a complete subtree".into()))?;
            let mut stages = Vec::new();
            let mut bounds = Vec::new();
            let mut labels = Vec::new();
            for target_m in 1..=best.depth {
                let w = tangent_witness_search(&cond.levels, target_m).expect("a deeper witness exists");
                let side = m.n.pow(w.depth as u32);
                stages.push(TangentStage {
                    set: cond.levels.level(w.level + w.depth).clone(),
                    window: w.window(m.n),
                    target: GridSet::full(vec![side; m.d]),
                });
                bounds.push(w.bound);
                labels.push(format!("level={} m={}", w.level, w.depth));
            }
            (stages, bounds, labels)
        }
        (Target::Shift, Model::Carpet(rifs)) => {
            let r = realize(spec, seed)?;
            let word = r.word.expect("carpets have words");
            let mut stages = Vec::new();
            let mut labels = Vec::new();
            let (mut x, mut y) = (0u64, 0u64);
            let (mut wx, mut wy) = (1u64, 1u64);
            for k in 1..spec.depth {
                let ifs = rifs.ifs(word.at(k));
                let (a, b) = ifs.digits()[0];
                x = x * ifs.m() + a;
                y = y * ifs.n() + b;
                wx *= ifs.m();
                wy *= ifs.n();
                let window = assouadlab::estimate::Window::new(
                    vec![Rational::new(x.into(), wx.into()), Rational::new(y.into(), wy.into())],
                    vec![Rational::new((x + 1).into(), wx.into()), Rational::new((y + 1).into(), wy.into())],
                )?;
                let target = carpet_grid(&word.shift(k), rifs, spec.depth - k)?.cells;
                stages.push(TangentStage { set: r.grid.clone(), window, target });
                labels.push(format!("level={k}"));
            }
            let bounds = vec![0.0; stages.len()];
            (stages, bounds, labels)
        }
        (Target::Full, _) => return Err(Error::NotApplicable("the full target follows percolation witnesses".into()).into()),
        (Target::Shift, _) => return Err(Error::NotApplicable("the shift target needs a carpet spec".into()).into()),
    };
    let conv = tangent_convergence(&stages, Some(&bounds))?;
    let mut csv = String::from("stage,label,window,distance,bound,within\n");
    for (idx, ((st, d), b)) in stages.iter().zip(&conv.distances).zip(&bounds).enumerate() {
        csv.push_str(&format!("{},{},{},{d},{b},{}\n", idx + 1, labels[idx], st.window.describe().replace(',', ";"), d <= b));
    }
    csv.push_str(&format!("# dominated,{}\n", conv.dominated.unwrap_or(false)));
    Ok(csv)
}

#[allow(clippy::too_many_arguments)]
fn percolate(
    config: &PercConfig,
    depth: usize,
    condition: bool,
    max_retries: u64,
    witness_m: Option<usize>,
    out: &mut Outputs,
    path: Option<PathBuf>,
    levels_path: Option<PathBuf>,
    pgm_path: Option<PathBuf>,
) -> Result<(), Failure> {
    let (n, d, p) = (config.n(), config.d(), config.p().clone());
    let (levels, seed_used, retries): (PercLevels, u64, Option<u64>) = if condition {
        let c = conditioned_sample(config, depth, max_retries)?;
        (c.levels, c.seed, Some(c.retries))
    } else {
        (simulate(config, depth)?, config.seed(), None)
    };
    let (q, p_noext) = extinction_probability(n, d, &p);
    let witness = witness_m.and_then(|m| tangent_witness_search(&levels, m)).map(|w| {
        let blown = blowup(levels.level(w.level + w.depth), &w.window(n)).expect("witness cube is occupied");
        let full = GridSet::full(vec![n.pow(w.depth as u32); d]);
        let distance = assouadlab::estimate::hausdorff_distance(&blown, &full).expect("non-empty");
        json!({ "level": w.level, "cube": w.cube, "depth": w.depth, "bound": w.bound, "blowup_distance": distance })
    });
    let lemma = match witness_m {
        Some(m) if m > 0 => {
            let l = lemma_quantities(config.branching(), m as u32, &p, p_noext)?;
            Some(json!({ "m": m, "tosses": l.tosses.to_string(), "p_hat": l.p_hat, "k_of_m": l.k_of_m }))
        }
        _ => None,
    };
    let summary = json!({
        "n": n,
        "d": d,
        "p": format_rational(&p),
        "depth": depth,
        "seed": config.seed(),
        "seed_used": seed_used,
        "retries": retries,
        "survived": levels.survived(),
        "level_counts": levels.levels().iter().map(GridSet::len).collect::<Vec<_>>(),
        "extinction": q,
        "p_noext": p_noext,
        "survival_to_depth": survival_iterate(n, d, &p, depth),
        "hausdorff": hausdorff_dim_percolation(n, d, &p).ok(),
        "assouad": assouad_dim_percolation(n, d, &p).ok(),
        "assouad_note": ASSOUAD_NOTE,
        "witness": witness,
        "lemma": lemma,
    });
    out.stage(path.as_deref(), json_text(&summary));
    if let Some(lp) = levels_path {
        out.stage(Some(&lp), levels.to_csv());
    }
    if let Some(pp) = pgm_path {
        out.stage(Some(&pp), levels.render(1024)?.to_bytes());
    }
    Ok(())
}
