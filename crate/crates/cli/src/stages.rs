//! The pipeline stages, shared by the subcommands and `run_pipeline`.

use serde::{Deserialize, Serialize};
use z2harm::complex::HomologySummary;
use z2harm::cover::{antiinvariant_cohomology, haydys_obstruction, BranchedCover, ObstructionReport, SingularLocus};
use z2harm::flatmodel::{fit_leading_coefficients, nondegeneracy_test, station_samples, ComponentVerdict, LeadingCoefficients};
use z2harm::hodge::{harmonic_from_cochain, harmonic_representative, HarmonicForm, MetricWeights, SolverOptions};
use z2harm::intrinsic::{find_harmonic_weights, prune, select_boundary_pair, PruneResult, WeightOutcome};
use z2harm::leafspace::*;

use crate::error::CliError;
use crate::inputs::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WeightChoice {
    Uniform,
    /// Cotangent weights of a flat preset's metric.
    Cotan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverSummary {
    pub base_vertices: usize,
    pub base_top_cells: usize,
    pub locus_components: usize,
    pub cover_vertices: usize,
    pub cover_top_cells: usize,
    pub euler_cover: i64,
    pub euler_base: i64,
    pub euler_locus: i64,
    pub cover_homology: HomologySummary,
}

pub fn cover(problem: &Problem) -> Result<(BranchedCover, CoverSummary), CliError> {
    let cover = problem.cover()?;
    cover.check_invariants().map_err(CliError::Numerical)?;
    let s = CoverSummary {
        base_vertices: cover.base.n_vertices(),
        base_top_cells: cover.base.top_cells().len(),
        locus_components: cover.locus.n_components(),
        cover_vertices: cover.complex.n_vertices(),
        cover_top_cells: cover.complex.top_cells().len(),
        euler_cover: cover.complex.euler_characteristic(),
        euler_base: cover.base.euler_characteristic(),
        euler_locus: cover.locus.euler_characteristic(),
        cover_homology: cover.complex.homology()?,
    };
    Ok((cover, s))
}

pub fn obstruction(cover: &BranchedCover) -> Result<ObstructionReport, CliError> {
    let rhs = cover.base.is_rational_homology_sphere()?;
    Ok(haydys_obstruction(cover, &cover.locus, rhs)?)
}

/// The harmonic representative: of the flat preset's form when there is one
/// and no class is given, otherwise of `class` on the anti-invariant basis.
pub fn harmonic(
    problem: &Problem,
    cover: &BranchedCover,
    weights: WeightChoice,
    class: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<HarmonicForm, CliError> {
    let w = match weights {
        WeightChoice::Uniform => MetricWeights::uniform(&cover.complex),
        WeightChoice::Cotan => {
            let flat = problem.flat.as_ref().ok_or_else(|| CliError::Precondition("cotan weights need a flat preset".into()))?;
            MetricWeights::cotan(&cover.complex, &flat.cover_displacements(cover))
        }
    };
    match (&problem.flat, class) {
        (Some(flat), None) => Ok(harmonic_from_cochain(cover, &w, &cover.lift_form(&flat.form), vec![], opts)?),
        _ => {
            let basis = antiinvariant_cohomology(cover)?;
            let class = class.unwrap_or(&problem.class);
            Ok(harmonic_representative(cover, &w, class, &basis, opts)?)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    /// Median `|v|` on the station spokes.
    pub scale: f64,
    pub tol_a: f64,
    pub tol_b: f64,
    pub components: Vec<Vec<LeadingCoefficients>>,
    pub verdicts: Vec<ComponentVerdict>,
}

impl FitReport {
    /// Aligned text table, one row per station.
    pub fn table(&self) -> String {
        let mut out = format!("{:<6} {:>8} {:>24} {:>24} {:>12}\n", "comp", "station", "A", "B", "residual");
        for (c, fits) in self.components.iter().enumerate() {
            for f in fits {
                out.push_str(&format!(
                    "{:<6} {:>8} {:>24} {:>24} {:>12.3e}\n",
                    SingularLocus::label(c),
                    f.station,
                    format!("{:+.6e}{:+.6e}i", f.a.re, f.a.im),
                    format!("{:+.6e}{:+.6e}i", f.b.re, f.b.im),
                    f.fit_residual
                ));
            }
        }
        for v in &self.verdicts {
            out.push_str(&format!("{}: {:?}\n", SingularLocus::label(v.component), v.verdict));
        }
        out
    }
}

pub fn fit(cover: &BranchedCover, cochain: &[f64]) -> Result<FitReport, CliError> {
    let (sets, scale) = station_samples(cover, cochain);
    let components = sets.iter().map(fit_leading_coefficients).collect::<Result<Vec<_>, _>>()?;
    let (tol_a, tol_b) = (1e-3 * scale, 1e-2 * scale);
    let verdicts = nondegeneracy_test(&components, tol_a, tol_b);
    Ok(FitReport { scale, tol_a, tol_b, components, verdicts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafParams {
    /// Largest denominator accepted when rationalizing periods.
    pub cap: i64,
    /// Zero detection threshold relative to the median `|v|`.
    pub zero_threshold: f64,
}

impl Default for LeafParams {
    fn default() -> Self {
        LeafParams { cap: 64, zero_threshold: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafReport {
    pub map: CircleMap,
    pub zeros: ZeroReport,
    pub space: LeafSpace,
    pub tree: bool,
    /// Branch leaves sit at `u ∈ {0, 1/2}` by anti-invariance, so lengths are
    /// tested against the `1/(2μ)` grid.
    pub grid: f64,
    pub commensurable: bool,
}

pub fn leafspace(cover: &BranchedCover, form: &HarmonicForm, params: LeafParams) -> Result<LeafReport, CliError> {
    if params.cap < 1 || !(params.zero_threshold > 0.0) {
        return Err(CliError::Precondition("denominator cap must be ≥ 1 and the zero threshold > 0".into()));
    }
    let dom = LeafDomain::Cover(cover);
    let map = integrate_rational_class(dom, &form.cochain, &form.periods, params.cap)?;
    let zeros = detect_zeros(dom, &map, &form.cochain, params.zero_threshold);
    let space = leaf_graph(dom, &map, &form.cochain, &zeros, LeafOptions::default())?;
    let tree = check_tree(&space.graph);
    let grid = 2.0 * space.mu;
    let commensurable = check_commensurable(&space.graph, grid);
    Ok(LeafReport { map, zeros, space, tree, grid, commensurable })
}

/// Which two boundary leaves to keep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairChoice {
    Auto,
    /// Zero-based component indices.
    Components(usize, usize),
}

impl std::str::FromStr for PairChoice {
    type Err = String;

    /// `auto`, or two labels such as `Σ1,Σ3`, `S1,S3` or `1,3`.
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(PairChoice::Auto);
        }
        let label = |t: &str| {
            let t = t.trim().trim_start_matches('Σ').trim_start_matches(['S', 's']);
            match t.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i - 1),
                _ => Err(format!("bad component label {t:?}")),
            }
        };
        match s.split(',').collect::<Vec<_>>()[..] {
            [a, b] => Ok(PairChoice::Components(label(a)?, label(b)?)),
            _ => Err(format!("expected auto or Σi,Σj, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PruneReport {
    pub result: PruneResult,
    /// Edges of the new cover along the collar witness, signed by direction.
    pub witness_edges: Vec<(usize, i8)>,
    pub kappa: f64,
    /// Harmonic-weight feasibility of the pruned form.
    pub weights: WeightOutcome,
}

pub fn prune_stage(
    cover: &BranchedCover,
    form: &HarmonicForm,
    leaves: &LeafReport,
    pair: &PairChoice,
    kappa: f64,
) -> Result<PruneReport, CliError> {
    let g = &leaves.space.graph;
    let pair = match pair {
        PairChoice::Auto => select_boundary_pair(g)?,
        PairChoice::Components(a, b) => {
            let find = |c: usize| {
                g.boundary_vertices().into_iter().find(|&v| g.vertices[v].components == [c]).ok_or_else(|| {
                    CliError::Precondition(format!("no boundary leaf holds exactly {}", SingularLocus::label(c)))
                })
            };
            (find(*a)?, find(*b)?)
        }
    };
    let result = prune(cover, &cover.descend_form(&form.cochain), &leaves.map, g, pair)?;
    let new_cover = BranchedCover::new(&cover.base, &result.new_locus, &result.new_cocycle)?;
    let x = new_cover.lift_form(&result.new_form);
    let witness_edges = result
        .collar_witness
        .windows(2)
        .map(|w| {
            let e = new_cover.complex.edge_index(w[0], w[1]).expect("witness steps along edges");
            (e, if new_cover.complex.edges()[e][0] == w[0] { 1 } else { -1 })
        })
        .collect();
    let periods = z2harm::hodge::periods(&new_cover.complex, &x, &new_cover.complex.cocycle_basis()?.cycles)?;
    let dom = LeafDomain::Cover(&new_cover);
    let map = integrate_rational_class(dom, &x, &periods, 64)?;
    let zeros: Vec<usize> = detect_zeros(dom, &map, &x, 1e-3).zeros.iter().map(|z| z.vertex).collect();
    let (weights, _) = find_harmonic_weights(&new_cover, &x, &zeros, kappa)?;
    Ok(PruneReport { result, witness_edges, kappa, weights })
}
