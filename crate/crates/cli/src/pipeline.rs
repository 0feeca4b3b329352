use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use z2harm::cover::ObstructionReport;
use z2harm::flatmodel::ComponentVerdict;
use z2harm::hodge::{InitialGuess, SolverOptions};
use z2harm::intrinsic::WeightOutcome;

use crate::error::{CliError, ErrorReport};
use crate::export::{export_graph, GraphFormat};
use crate::inputs::{FormJson, Problem, Source};
use crate::json;
use crate::stages::{self, LeafParams, PairChoice, WeightChoice};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub source: Source,
    /// Defaults to cotangent weights for flat presets and uniform otherwise.
    pub weights: Option<WeightChoice>,
    /// Overrides the preset's class coefficients.
    pub class: Option<Vec<f64>>,
    /// Solver tolerance on the codifferential.
    pub tol: f64,
    pub leaf: LeafParams,
    pub out: PathBuf,
    /// Seeds a random solver start; the zero start otherwise.
    pub seed: Option<u64>,
    /// Run the prune stage on this pair.
    pub prune: Option<PairChoice>,
    pub kappa: f64,
}

impl PipelineConfig {
    pub fn new(source: Source, out: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            source,
            weights: None,
            class: None,
            tol: 1e-10,
            leaf: LeafParams::default(),
            out: out.into(),
            seed: None,
            prune: None,
            kappa: 10.0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0) || !(self.leaf.zero_threshold > 0.0) || !(self.kappa >= 1.0) {
            return Err(CliError::Precondition("tolerances must be positive and κ ≥ 1".into()));
        }
        if self.leaf.cap < 1 {
            return Err(CliError::Precondition("denominator cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverOptions {
        let initial = self.seed.map_or(InitialGuess::Zero, InitialGuess::Random);
        SolverOptions { tol: self.tol, initial, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Success,
    Failure,
    /// Not defined for this input, such as the obstruction on a surface.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Verdicts {
    pub obstruction: Option<ObstructionReport>,
    pub nondegeneracy: Option<Vec<ComponentVerdict>>,
    pub tree: Option<bool>,
    pub commensurable: Option<bool>,
    pub mu: Option<f64>,
    pub grid: Option<f64>,
    pub transitivity: Option<bool>,
    pub pruned_interval: Option<bool>,
    pub weights_feasible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub input: String,
    pub made_full: bool,
    pub stages: Vec<StageReport>,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub verdicts: Verdicts,
    /// Every file written, relative to the output directory.
    pub artifacts: Vec<String>,
    pub exit_code: i32,
}

/// Wall-clock seconds per stage, kept out of the report.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
    pub total: f64,
}

struct Run {
    report: RunReport,
    timings: Timings,
    clock: Instant,
}

impl Run {
    /// Runs one stage, recording its status, artifacts and time.
    fn stage<T>(&mut self, name: &'static str, f: impl FnOnce(&mut Vec<String>) -> Result<T, CliError>) -> Option<T> {
        let start = Instant::now();
        let mut artifacts = Vec::new();
        let r = f(&mut artifacts);
        self.timings.stages.push((name.to_string(), start.elapsed().as_secs_f64()));
        let (status, error, value) = match r {
            Ok(v) => (Status::Success, None, Some(v)),
            Err(e) => {
                self.report.exit_code = e.exit_code();
                (Status::Failure, Some(e.report()), None)
            }
        };
        self.report.artifacts.extend(artifacts.iter().cloned());
        self.report.stages.push(StageReport { stage: name, status, error, artifacts });
        value
    }
}

/// cover → obstruction → harmonic → fit → leafspace → (prune), writing
/// every artifact and `report.json` to `config.out`, timings to
/// `timing.json`. Stops at the first failing stage.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport, CliError> {
    config.validate()?;
    std::fs::create_dir_all(&config.out).map_err(|e| CliError::Io(format!("{}: {e}", config.out.display())))?;
    let problem = Problem::load(&config.source)?;
    let mut run = Run {
        report: RunReport {
            input: problem.name.clone(),
            made_full: problem.made_full,
            stages: Vec::new(),
            residual: None,
            iterations: None,
            verdicts: Verdicts::default(),
            artifacts: Vec::new(),
            exit_code: 0,
        },
        timings: Timings::default(),
        clock: Instant::now(),
    };
    stages_in_order(&mut run, &problem, config);
    run.report.artifacts.push("report.json".into());
    run.report.artifacts.sort();
    run.timings.total = run.clock.elapsed().as_secs_f64();
    json::write(&config.out.join("report.json"), &run.report)?;
    json::write(&config.out.join("timing.json"), &run.timings)?;
    Ok(run.report)
}

fn stages_in_order(run: &mut Run, problem: &Problem, config: &PipelineConfig) {
    let Some(cover) = run.stage("cover", |a| {
        let (cover, summary) = stages::cover(problem)?;
        run_write(a, config, "cover.json", &serde_json::json!({ "summary": summary, "complex": cover.complex.to_json_model() }))?;
        run_write(a, config, "cover_map.json", &cover.map_json())?;
        run_write(a, config, "locus.json", &cover.locus.to_index_json(&cover.base))?;
        Ok(cover)
    }) else {
        return;
    };

    if cover.base.dimension() != 3 {
        run.report.stages.push(StageReport { stage: "obstruction", status: Status::Skipped, error: None, artifacts: vec![] });
    } else {
        let Some(obstruction) = run.stage("obstruction", |_| stages::obstruction(&cover)) else { return };
        run.report.verdicts.obstruction = Some(obstruction.clone());
        if obstruction.passes {
            return stages_after_obstruction(run, problem, config, &cover);
        }
        let e = CliError::Obstructed(obstruction.notes.clone());
        run.report.exit_code = e.exit_code();
        if let Some(s) = run.report.stages.last_mut() {
            s.status = Status::Failure;
            s.error = Some(e.report());
        }
        return;
    }
    stages_after_obstruction(run, problem, config, &cover);
}

fn stages_after_obstruction(run: &mut Run, problem: &Problem, config: &PipelineConfig, cover: &z2harm::cover::BranchedCover) {
    let weights = config.weights.unwrap_or(if problem.flat.is_some() { WeightChoice::Cotan } else { WeightChoice::Uniform });
    let Some(form) = run.stage("harmonic", |a| {
        let h = stages::harmonic(problem, cover, weights, config.class.as_deref(), &config.solver())?;
        run_write(a, config, "form.json", &FormJson::from(&h))?;
        Ok(h)
    }) else {
        return;
    };
    run.report.residual = Some(form.residual);
    run.report.iterations = Some(form.iterations);

    let Some(fit) = run.stage("fit", |a| {
        let f = stages::fit(cover, &form.cochain)?;
        run_write(a, config, "fit.json", &f)?;
        std::fs::write(config.out.join("fit.txt"), f.table())?;
        a.push("fit.txt".into());
        Ok(f)
    }) else {
        return;
    };
    run.report.verdicts.nondegeneracy = Some(fit.verdicts);

    let Some(leaves) = run.stage("leafspace", |a| {
        let l = stages::leafspace(cover, &form, config.leaf)?;
        run_write(a, config, "leafspace.json", &l)?;
        export_graph(&l.space.graph, GraphFormat::Json, &config.out.join("leaf_graph.json"))?;
        export_graph(&l.space.graph, GraphFormat::Dot, &config.out.join("leaf_graph.dot"))?;
        a.extend(["leaf_graph.json".into(), "leaf_graph.dot".into()]);
        Ok(l)
    }) else {
        return;
    };
    run.report.verdicts.tree = Some(leaves.tree);
    run.report.verdicts.commensurable = Some(leaves.commensurable);
    run.report.verdicts.mu = Some(leaves.space.mu);
    run.report.verdicts.grid = Some(leaves.grid);

    if let Some(pair) = &config.prune {
        let Some(p) = run.stage("prune", |a| {
            let p = stages::prune_stage(cover, &form, &leaves, pair, config.kappa)?;
            run_write(a, config, "prune.json", &p)?;
            export_graph(&p.result.leaf_graph, GraphFormat::Dot, &config.out.join("pruned_leaf_graph.dot"))?;
            a.push("pruned_leaf_graph.dot".into());
            Ok(p)
        }) else {
            return;
        };
        run.report.verdicts.transitivity = Some(p.result.transitivity.transitive);
        run.report.verdicts.pruned_interval = Some(z2harm::intrinsic::is_interval(&p.result.leaf_graph));
        run.report.verdicts.weights_feasible = Some(matches!(p.weights, WeightOutcome::Feasible { .. }));
    }
}

fn run_write<T: Serialize + ?Sized>(artifacts: &mut Vec<String>, config: &PipelineConfig, name: &str, value: &T) -> Result<(), CliError> {
    json::write(&config.out.join(name), value)?;
    artifacts.push(name.to_string());
    Ok(())
}
