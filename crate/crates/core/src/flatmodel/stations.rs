//! Station samples of a discrete two-valued form near the branch locus.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Sample, SampleSet};
use crate::cover::{link_cycle, BranchedCover};

/// Samples the local anti-invariant potential around every station of every
/// branch component: the PL potential on the cover link of the station
/// (radius 1), at the midpoints of the link edges (radius 1, halfway in
/// angle) and on the midpoints of the spokes (radius 1/2), with angles
/// spaced evenly and normalized to `2π` on the base. A station is a branch
/// vertex in dimension 2 and a branch edge (indexed along its loop) in
/// dimension 3. Also returns the median `|v|` over the spokes.
pub fn station_samples(cover: &BranchedCover, cochain: &[f64]) -> (Vec<SampleSet>, f64) {
    let cx = &cover.complex;
    let base = &cover.base;
    let mut spokes = Vec::new();
    let mut out = Vec::new();
    for comp in &cover.locus.components {
        let mut set = SampleSet::default();
        for (t, cell) in comp.iter().enumerate() {
            let bc = base.cell_index(cell).unwrap();
            let lifted = &cx.cells(cell.len() - 1)[cover.lifts[cell.len() - 1][bc][0]];
            let center = lifted[0];
            let ring = link_cycle(cx, lifted);
            let k = ring.len();
            let pot: Vec<f64> = ring
                .iter()
                .map(|&w| {
                    let e = cx.edge_index(center, w).expect("spoke");
                    if cx.edges()[e][0] == center {
                        cochain[e]
                    } else {
                        -cochain[e]
                    }
                })
                .collect();
            spokes.extend(pot.iter().map(|f| f.abs()));
            let at = |phi: f64| if phi < 2.0 * PI { (phi, 1) } else { (phi - 2.0 * PI, -1) };
            for j in 0..k {
                let f = pot[j];
                let (theta, sheet) = at(4.0 * PI * j as f64 / k as f64);
                for (r, val) in [(1.0, f), (0.5, 0.5 * f)] {
                    set.push(Sample { zeta: Complex64::from_polar(r, theta), station: t as f64, sheet }, val);
                }
                let (theta, sheet) = at(4.0 * PI * (j as f64 + 0.5) / k as f64);
                let mid = 0.5 * (f + pot[(j + 1) % k]);
                set.push(Sample { zeta: Complex64::from_polar(1.0, theta), station: t as f64, sheet }, mid);
            }
        }
        out.push(set);
    }
    spokes.sort_by(f64::total_cmp);
    let median = if spokes.is_empty() { 0.0 } else { spokes[spokes.len() / 2] };
    (out, median)
}
