use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use z2harm::complex::{icosahedron, CellComplex};
use z2harm::cover::{antiinvariant_cohomology, BranchedCover};
use z2harm::hodge::{harmonic_representative, MetricWeights, SolverOptions};
use z2harm::intrinsic::*;
use z2harm::leafspace::*;
use z2harm::presets::preset;

fn space_of(name: &str) -> (BranchedCover, Vec<f64>, CircleMap, LeafSpace) {
    let p = preset(name).unwrap();
    let cover = p.cover().unwrap();
    let basis = antiinvariant_cohomology(&cover).unwrap();
    let w = MetricWeights::uniform(&cover.complex);
    let h = harmonic_representative(&cover, &w, &p.class, &basis, &SolverOptions::default()).unwrap();
    let dom = LeafDomain::Cover(&cover);
    let map = integrate_rational_class(dom, &h.cochain, &h.periods, 64).unwrap();
    let zeros = detect_zeros(dom, &map, &h.cochain, 1e-3);
    let space = leaf_graph(dom, &map, &h.cochain, &zeros, LeafOptions::default()).unwrap();
    (cover.clone(), cover.descend_form(&h.cochain), map, space)
}

#[test]
fn star_tree_prunes_to_an_interval() {
    let (cover, form, map, space) = space_of("star-tree");
    assert!(check_tree(&space.graph));
    assert_eq!(space.graph.boundary_vertices().len(), 3);
    let pair = select_boundary_pair(&space.graph).unwrap();
    let r = prune(&cover, &form, &map, &space.graph, pair).unwrap();
    assert_eq!(r.new_locus.n_components(), 2);
    assert_eq!(r.new_locus.components, r.kept.map(|k| cover.locus.components[k].clone()).to_vec());
    let new_cover = z2harm::cover::BranchedCover::new(&cover.base, &r.new_locus, &r.new_cocycle).unwrap();
    new_cover.check_invariants().unwrap();
    let lifted = new_cover.lift_form(&r.new_form);
    assert!(new_cover.tau_pullback(&lifted).iter().zip(&lifted).all(|(a, b)| *a == -*b));
    assert!(is_interval(&r.leaf_graph), "{:?}", r.leaf_graph);
    assert!(r.morse_certificate.as_ref().unwrap().extreme_free());
    assert!(r.transitivity.transitive);
    assert!(r.collar_witness.len() > 2 && r.collar_witness.first() == r.collar_witness.last());
    assert!(r.new_cover_betti1 > 0);
    for c in &r.collars {
        for &t in c {
            let cell = &cover.base.top_cells()[t];
            for i in 0..cell.len() {
                for j in i + 1..cell.len() {
                    let e = cover.base.edge_index(cell[i], cell[j]).unwrap();
                    assert_eq!(r.new_form[e].to_bits(), form[e].to_bits());
                }
            }
        }
    }
}

#[test]
fn an_interval_keeps_both_components() {
    let (cover, form, map, space) = space_of("unlink");
    assert!(is_interval(&space.graph));
    let pair = select_boundary_pair(&space.graph).unwrap();
    let r = prune(&cover, &form, &map, &space.graph, pair).unwrap();
    assert_eq!(r.new_locus.components, cover.locus.components);
    assert!(is_interval(&r.leaf_graph));
    assert!(r.transitivity.transitive);
    assert_eq!(r.new_cover_betti1, 1);
    assert!(r.morse_certificate.is_none() && r.new_form == form);
    assert!(r.collar_witness.len() > 2);
}

/// Arcs lying on some directed cycle, found by testing every arc subset for
/// being a single simple cycle.
fn arcs_on_cycles(n: usize, arcs: &[(usize, usize)]) -> Vec<bool> {
    let mut on = vec![false; arcs.len()];
    for mask in 1u32..(1 << arcs.len()) {
        let chosen: Vec<usize> = (0..arcs.len()).filter(|&i| mask >> i & 1 == 1).collect();
        let (mut outd, mut ind) = (vec![0; n], vec![0; n]);
        for &i in &chosen {
            outd[arcs[i].0] += 1;
            ind[arcs[i].1] += 1;
        }
        if (0..n).any(|v| outd[v] != ind[v] || outd[v] > 1) {
            continue;
        }
        // walk from the first arc; a single cycle uses every chosen arc
        let next = |v: usize| chosen.iter().find(|&&i| arcs[i].0 == v).map(|&i| arcs[i].1).unwrap();
        let start = arcs[chosen[0]].0;
        let (mut v, mut len) = (next(start), 1);
        while v != start {
            v = next(v);
            len += 1;
        }
        if len == chosen.len() {
            for &i in &chosen {
                on[i] = true;
            }
        }
    }
    on
}

#[test]
fn scc_verdict_matches_cycle_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1500 {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(0..=10);
        let arcs: Vec<(usize, usize)> = (0..m)
            .map(|_| {
                let a = rng.gen_range(0..n);
                (a, (a + rng.gen_range(1..n)) % n)
            })
            .collect();
        let report = transitivity_of(&PositiveDigraph::from_arcs(n, &arcs), 4);
        assert_eq!(report.transitive, arcs_on_cycles(n, &arcs).iter().all(|&x| x), "{arcs:?}");
        for c in &report.witness_cycles {
            assert_eq!(c.first(), c.last());
            assert!(c.windows(2).all(|w| arcs.contains(&(w[0], w[1]))), "{c:?}");
        }
    }
}

/// Feasibility of `Σ w_e v_e = 0` off `free` with `w ∈ [1/κ, κ]`, by LP.
fn lp_feasible(cx: &CellComplex, v: &[f64], threshold: f64, free: &[usize], kappa: f64) -> bool {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let mut rows = vec![Vec::new(); cx.n_vertices()];
    for (e, ab) in cx.edges().iter().enumerate() {
        if v[e].abs() > threshold {
            let w = p.add_var(0.0, (1.0 / kappa, kappa));
            rows[ab[0]].push((w, v[e]));
            rows[ab[1]].push((w, -v[e]));
        }
    }
    for (x, row) in rows.iter().enumerate() {
        if !free.contains(&x) && !row.is_empty() {
            p.add_constraint(row.as_slice(), ComparisonOp::Eq, 0.0);
        }
    }
    match p.solve() {
        Ok(_) => true,
        Err(minilp::Error::Infeasible) => false,
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn weights_agree_with_the_lp_oracle() {
    let cx = icosahedron();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut feasible, mut infeasible) = (0, 0);
    for _ in 0..300 {
        let v: Vec<f64> = (0..cx.n_cells(1))
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.1..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 } })
            .collect();
        let free: Vec<usize> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..12)).collect();
        let kappa = 1e3;
        let lp = lp_feasible(&cx, &v, 1e-12, &free, kappa);
        let transitive = transitivity_of(&PositiveDigraph::new(&cx, &v, 1e-12), 1).transitive;
        match harmonic_weights(&cx, &v, 1e-12, &free, None, kappa) {
            WeightOutcome::Feasible { weights, ratio } => {
                assert!(lp, "weights found where the LP is infeasible");
                assert!(ratio <= kappa * kappa);
                let flux: Vec<f64> = weights.iter().zip(&v).map(|(w, x)| w * x).collect();
                let mut div = vec![0.0; cx.n_vertices()];
                for (e, ab) in cx.edges().iter().enumerate() {
                    div[ab[0]] += flux[e];
                    div[ab[1]] -= flux[e];
                }
                for (x, d) in div.iter().enumerate() {
                    assert!(free.contains(&x) || d.abs() < 1e-9, "vertex {x} unbalanced by {d}");
                }
                feasible += 1;
            }
            WeightOutcome::Infeasible { cut, crossing_arcs, .. } => {
                assert!(!lp, "LP feasible but reported infeasible");
                assert!(!crossing_arcs.is_empty());
                assert!(cut.iter().all(|x| !free.contains(x)));
                let inward = |e: usize| {
                    let ab = &cx.edges()[e];
                    let head = if v[e] > 0.0 { ab[1] } else { ab[0] };
                    cut.contains(&head)
                };
                assert!(crossing_arcs.iter().all(|&e| inward(e) == inward(crossing_arcs[0])));
                let crosses = |e: usize| cut.contains(&cx.edges()[e][0]) != cut.contains(&cx.edges()[e][1]);
                assert!((0..v.len()).filter(|&e| v[e] != 0.0 && crosses(e)).all(|e| crossing_arcs.contains(&e)));
                infeasible += 1;
            }
        }
        if free.is_empty() && !transitive {
            assert!(!lp);
        }
    }
    assert!(feasible > 0 && infeasible > 0, "{feasible} feasible, {infeasible} infeasible");
}
