//! Small shipped examples: branch loci on triangulated spheres and the flat
//! pillowcase.

use crate::complex::{icosahedron, join_of_cycles, refine_around, stellar_subdivision, CellComplex};
use crate::cover::{build_branched_cover, BranchedCover, CoverError, MonodromyCocycle, SingularLocus};
use crate::flatmodel::{quadratic_differential_form, FlatSurfaceForm, QuadraticDifferential};

pub const NAMES: [&str; 6] = ["sphere-two-points", "unknot", "hopf", "unlink", "star-tree", "pillowcase"];

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    /// Full with respect to `locus`.
    pub base: CellComplex,
    pub locus: SingularLocus,
    /// Monodromy fixed by the example; otherwise solved from the meridians.
    pub cocycle: Option<MonodromyCocycle>,
    /// Coefficients on the anti-invariant cohomology basis.
    pub class: Vec<f64>,
    /// Flat structure whose form seeds the class and whose metric gives
    /// cotangent weights.
    pub flat: Option<FlatSurfaceForm>,
}

impl Preset {
    pub fn cover(&self) -> Result<BranchedCover, CoverError> {
        match &self.cocycle {
            Some(c) => BranchedCover::new(&self.base, &self.locus, c),
            None => build_branched_cover(&self.base, &self.locus),
        }
    }
}

fn loops(base: CellComplex, cycles: &[Vec<usize>], class: Vec<f64>, name: &'static str) -> Preset {
    let locus = SingularLocus::loops(cycles);
    let base = locus.make_full(&base).expect("shipped locus");
    Preset { name, base, locus, cocycle: None, class, flat: None }
}

/// Three unlinked loops in the join of two 12-cycles: the links of the edges
/// joining vertex `k` to vertex `12 + k` for `k = 0, 4, 8`.
pub fn star_tree_loops() -> Vec<Vec<usize>> {
    [0, 4, 8].iter().map(|&k| vec![(k + 11) % 12, 12 + (k + 11) % 12, k + 1, 13 + k]).collect()
}

pub fn preset(name: &str) -> Option<Preset> {
    Some(match name {
        "sphere-two-points" => {
            let base = icosahedron();
            Preset { name: "sphere-two-points", base, locus: SingularLocus::points(&[0, 6]), cocycle: None, class: vec![], flat: None }
        }
        "unknot" => loops(join_of_cycles(8, 8), &[(0..8).collect()], vec![], "unknot"),
        "hopf" => loops(join_of_cycles(8, 8), &[(0..8).collect(), (8..16).collect()], vec![], "hopf"),
        "unlink" => loops(join_of_cycles(8, 8), &[vec![7, 15, 1, 9], vec![3, 11, 5, 13]], vec![1.0], "unlink"),
        "star-tree" => {
            let cycles = star_tree_loops();
            // split the edge each loop links, so its spanning disk is a cone
            // from the midpoint, then bisect around loops and midpoints until
            // the slabs around the disks are resolved
            let mut base = join_of_cycles(12, 12);
            let mut core = cycles.concat();
            for k in [0, 4, 8] {
                core.push(base.n_vertices());
                base = stellar_subdivision(&base, &[k, 12 + k]).expect("join edge");
            }
            let mut p = loops(base, &cycles, vec![1.0, 1.0], "star-tree");
            p.base = refine_around(&p.base, &core, 4).expect("refinement");
            p
        }
        "pillowcase" => {
            let f = quadratic_differential_form(QuadraticDifferential::Pillowcase { n: 8 }).expect("pillowcase");
            Preset {
                name: "pillowcase",
                base: f.complex.clone(),
                locus: f.locus.clone(),
                cocycle: Some(f.cocycle.clone()),
                class: vec![],
                flat: Some(f),
            }
        }
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds_a_cover() {
        for name in NAMES {
            let p = preset(name).unwrap();
            assert!(p.locus.is_full(&p.base), "{name}");
            p.cover().unwrap().check_invariants().unwrap();
        }
        assert!(preset("nope").is_none());
    }
}
