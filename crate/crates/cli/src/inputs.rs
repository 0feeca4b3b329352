use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use z2harm::complex::{CellComplex, ComplexJson};
use z2harm::cover::{build_branched_cover, BranchedCover, LocusJson, MonodromyCocycle, SingularLocus};
use z2harm::flatmodel::FlatSurfaceForm;
use z2harm::hodge::{HarmonicForm, WeightKind};
use z2harm::presets::{preset, NAMES};

use crate::error::CliError;
use crate::json;

/// Where a base complex and branch locus come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Preset(String),
    Files { complex: PathBuf, locus: PathBuf },
}

/// A base complex with its branch locus, plus what a preset fixes.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub base: CellComplex,
    pub locus: SingularLocus,
    pub cocycle: Option<MonodromyCocycle>,
    pub class: Vec<f64>,
    pub flat: Option<FlatSurfaceForm>,
    /// The input locus was not full and the base was subdivided.
    pub made_full: bool,
}

impl Problem {
    pub fn load(source: &Source) -> Result<Self, CliError> {
        match source {
            Source::Preset(name) => {
                let p = preset(name)
                    .ok_or_else(|| CliError::Parse(format!("unknown preset {name:?}; known: {}", NAMES.join(", "))))?;
                Ok(Problem {
                    name: p.name.to_string(),
                    base: p.base,
                    locus: p.locus,
                    cocycle: p.cocycle,
                    class: p.class,
                    flat: p.flat,
                    made_full: false,
                })
            }
            Source::Files { complex, locus } => {
                let model: ComplexJson = json::read(complex)?;
                let cx = CellComplex::from_json_model(&model)?;
                let lj: LocusJson = json::read(locus)?;
                let z = SingularLocus::from_indices(&cx, &lj.components)?;
                let made_full = !z.is_full(&cx);
                let base = if made_full { z.make_full(&cx)? } else { cx };
                Ok(Problem {
                    name: complex.display().to_string(),
                    base,
                    locus: z,
                    cocycle: None,
                    class: Vec::new(),
                    flat: None,
                    made_full,
                })
            }
        }
    }

    pub fn cover(&self) -> Result<BranchedCover, CliError> {
        Ok(match &self.cocycle {
            Some(c) => BranchedCover::new(&self.base, &self.locus, c)?,
            None => build_branched_cover(&self.base, &self.locus)?,
        })
    }
}

/// A form on the cover, by its values on cover edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub edges: Vec<f64>,
    pub residual: f64,
    pub periods: Vec<f64>,
    #[serde(default)]
    pub class: Vec<f64>,
    #[serde(default)]
    pub iterations: usize,
    /// The inner products the form is harmonic for; absent in hand-written files.
    #[serde(default)]
    pub weights: Option<WeightKind>,
}

impl From<&HarmonicForm> for FormJson {
    fn from(h: &HarmonicForm) -> Self {
        FormJson {
            edges: h.cochain.clone(),
            residual: h.residual,
            periods: h.periods.clone(),
            class: h.class_id.clone(),
            iterations: h.iterations,
            weights: Some(h.weights),
        }
    }
}

impl FormJson {
    /// Checks the length and exact anti-invariance against `cover`.
    pub fn validate(&self, cover: &BranchedCover) -> Result<(), CliError> {
        let n = cover.complex.n_cells(1);
        if self.edges.len() != n {
            return Err(CliError::Precondition(format!("form has {} values but the cover has {n} edges", self.edges.len())));
        }
        if cover.tau_pullback(&self.edges).iter().zip(&self.edges).any(|(a, b)| *a != -*b) {
            return Err(CliError::Precondition("form is not anti-invariant under the deck involution".into()));
        }
        Ok(())
    }

    pub fn into_form(self) -> HarmonicForm {
        HarmonicForm {
            cochain: self.edges,
            residual: self.residual,
            periods: self.periods,
            class_id: self.class,
            iterations: self.iterations,
            weights: self.weights.unwrap_or(WeightKind::Custom),
        }
    }
}
