use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use z2harm::hodge::HarmonicForm;
use z2harm::leafspace::dv_oracle;
use z2harm_cli::export::{export_graph, GraphFormat};
use z2harm_cli::inputs::{FormJson, Problem, Source};
use z2harm_cli::pipeline::{run_pipeline, PipelineConfig};
use z2harm_cli::stages::{self, LeafParams, PairChoice, WeightChoice};
use z2harm_cli::{json, CliError};

#[derive(Parser)]
#[command(name = "z2harm", version, about = "Two-valued harmonic 1-forms on branched double covers")]
struct Cli {
    /// Solver tolerance on the codifferential.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Seed for a random solver start.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Input {
    /// A shipped example: sphere-two-points, unknot, hopf, unlink, star-tree, pillowcase.
    #[arg(long, conflicts_with_all = ["complex", "locus"], required_unless_present = "complex")]
    preset: Option<String>,
    /// Complex JSON.
    #[arg(long, requires = "locus")]
    complex: Option<PathBuf>,
    /// Locus JSON `{"components": [[index, ...], ...]}`.
    #[arg(long, requires = "complex")]
    locus: Option<PathBuf>,
}

impl Input {
    fn source(&self) -> Source {
        match (&self.preset, &self.complex, &self.locus) {
            (Some(p), _, _) => Source::Preset(p.clone()),
            (None, Some(c), Some(l)) => Source::Files { complex: c.clone(), locus: l.clone() },
            _ => unreachable!("clap enforces an input"),
        }
    }
}

#[derive(Args, Clone)]
struct Leaf {
    /// Largest denominator when rationalizing periods.
    #[arg(long, default_value_t = 64)]
    cap: i64,
    /// Zero threshold relative to the median |v|.
    #[arg(long, default_value_t = 1e-3)]
    zero_threshold: f64,
}

impl Leaf {
    fn params(&self) -> LeafParams {
        LeafParams { cap: self.cap, zero_threshold: self.zero_threshold }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the branched double cover; writes cover.json, cover_map.json.
    Cover(Input),
    /// Harmonic anti-invariant representative; writes form.json.
    Harmonic {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        weights: Option<WeightChoice>,
        /// Class coefficients on the anti-invariant basis, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        class: Option<Vec<f64>>,
    },
    /// Leading-coefficient fit near the branch locus; writes fit.json, fit.txt.
    Fit {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        form: PathBuf,
    },
    /// Leaf graph; writes leafspace.json, leaf_graph.json, leaf_graph.dot.
    Leafspace {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        form: PathBuf,
        #[command(flatten)]
        leaf: Leaf,
        /// Print the edge-path bound on d_v between two cover vertices.
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        oracle: Option<Vec<usize>>,
    },
    /// Prune to two boundary leaves; writes prune.json.
    Prune {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        form: PathBuf,
        /// auto, or two components such as Σ1,Σ2.
        #[arg(long, default_value = "auto")]
        pair: PairChoice,
        /// Bound on the harmonic-weight range [1/κ, κ].
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
        /// Report path; defaults to prune.json in the output directory.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        leaf: Leaf,
    },
    /// cover → obstruction → harmonic → fit → leafspace → (prune).
    Pipeline {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        weights: Option<WeightChoice>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        class: Option<Vec<f64>>,
        #[command(flatten)]
        leaf: Leaf,
        /// Also prune, keeping this pair (auto or Σi,Σj).
        #[arg(long)]
        prune: Option<PairChoice>,
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
    },
}

fn load_form(problem: &Problem, path: &Path) -> Result<(z2harm::cover::BranchedCover, HarmonicForm), CliError> {
    let cover = problem.cover()?;
    let f: FormJson = json::read(path)?;
    f.validate(&cover)?;
    Ok((cover, f.into_form()))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let out = &cli.out;
    let mkdir = || std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())));
    let solver = z2harm::hodge::SolverOptions {
        tol: cli.tol,
        initial: cli.seed.map_or(z2harm::hodge::InitialGuess::Zero, z2harm::hodge::InitialGuess::Random),
        ..Default::default()
    };
    if !(cli.tol > 0.0) {
        return Err(CliError::Precondition("--tol must be positive".into()));
    }
    match cli.command {
        Command::Cover(input) => {
            let problem = Problem::load(&input.source())?;
            mkdir()?;
            let (cover, summary) = stages::cover(&problem)?;
            json::write(&out.join("cover.json"), &serde_json::json!({ "summary": summary, "complex": cover.complex.to_json_model() }))?;
            json::write(&out.join("cover_map.json"), &cover.map_json())?;
            print!("{}", json::to_string(&summary));
        }
        Command::Harmonic { input, weights, class } => {
            let problem = Problem::load(&input.source())?;
            mkdir()?;
            let cover = problem.cover()?;
            let weights = weights.unwrap_or(if problem.flat.is_some() { WeightChoice::Cotan } else { WeightChoice::Uniform });
            let h = stages::harmonic(&problem, &cover, weights, class.as_deref(), &solver)?;
            json::write(&out.join("form.json"), &FormJson::from(&h))?;
            println!("residual {:.3e} after {} iterations with {:?} weights", h.residual, h.iterations, h.weights);
        }
        Command::Fit { input, form } => {
            let problem = Problem::load(&input.source())?;
            let (cover, h) = load_form(&problem, &form)?;
            mkdir()?;
            let fit = stages::fit(&cover, &h.cochain)?;
            json::write(&out.join("fit.json"), &fit)?;
            std::fs::write(out.join("fit.txt"), fit.table())?;
            print!("{}", fit.table());
        }
        Command::Leafspace { input, form, leaf, oracle } => {
            let problem = Problem::load(&input.source())?;
            let (cover, h) = load_form(&problem, &form)?;
            mkdir()?;
            let l = stages::leafspace(&cover, &h, leaf.params())?;
            json::write(&out.join("leafspace.json"), &l)?;
            export_graph(&l.space.graph, GraphFormat::Json, &out.join("leaf_graph.json"))?;
            export_graph(&l.space.graph, GraphFormat::Dot, &out.join("leaf_graph.dot"))?;
            print!("{}", l.space.graph.to_dot());
            println!("tree {} commensurable {} on the 1/{} grid", l.tree, l.commensurable, l.grid);
            if let Some(xy) = oracle {
                let n = cover.complex.n_vertices();
                if xy.iter().any(|&v| v >= n) {
                    return Err(CliError::Precondition(format!("oracle vertices must be below {n}")));
                }
                println!("d_v({}, {}) <= {}", xy[0], xy[1], dv_oracle(&cover.complex, &h.cochain, xy[0], xy[1]));
            }
        }
        Command::Prune { input, form, pair, kappa, report, leaf } => {
            let problem = Problem::load(&input.source())?;
            let (cover, h) = load_form(&problem, &form)?;
            mkdir()?;
            let l = stages::leafspace(&cover, &h, leaf.params())?;
            let p = stages::prune_stage(&cover, &h, &l, &pair, kappa)?;
            json::write(&report.unwrap_or_else(|| out.join("prune.json")), &p)?;
            print!("{}", p.result.leaf_graph.to_dot());
            println!("transitive {} witness {} edges b1 {}", p.result.transitivity.transitive, p.witness_edges.len(), p.result.new_cover_betti1);
        }
        Command::Pipeline { input, weights, class, leaf, prune, kappa } => {
            let config = PipelineConfig {
                weights,
                class,
                tol: cli.tol,
                leaf: leaf.params(),
                seed: cli.seed,
                prune,
                kappa,
                ..PipelineConfig::new(input.source(), out.clone())
            };
            let report = run_pipeline(&config)?;
            for s in &report.stages {
                println!("{:<12} {:?}{}", s.stage, s.status, s.error.as_ref().map(|e| format!(": {}", e.message)).unwrap_or_default());
            }
            return Ok(report.exit_code);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprint!("{}", json::to_string(&serde_json::json!({ "error": e.report() })));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
