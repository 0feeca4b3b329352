use z2harm::complex::{grid_torus, CellComplex};
use z2harm::flatmodel::{quadratic_differential_form, QuadraticDifferential};
use z2harm::hodge::periods;
use z2harm::leafspace::*;

fn pillowcase_space(n: usize) -> (z2harm::cover::BranchedCover, Vec<f64>, CircleMap, LeafSpace) {
    let f = quadratic_differential_form(QuadraticDifferential::Pillowcase { n }).unwrap();
    let cover = f.cover().unwrap();
    let x = cover.lift_form(&f.form);
    let cycles = cover.complex.cocycle_basis().unwrap().cycles;
    let p = periods(&cover.complex, &x, &cycles).unwrap();
    let dom = LeafDomain::Cover(&cover);
    let map = integrate_rational_class(dom, &x, &p, 64).unwrap();
    let zeros = detect_zeros(dom, &map, &x, 1e-3);
    let space = leaf_graph(dom, &map, &x, &zeros, LeafOptions::default()).unwrap();
    (cover, f.form, map, space)
}

#[test]
fn pillowcase_leaf_space_is_a_segment_of_length_one_half() {
    for n in [4, 6, 8] {
        let (cover, _, map, space) = pillowcase_space(n);
        assert_eq!((map.mu_numer, map.mu_denom, map.exact), (1, 1, false));
        check_circle_map(LeafDomain::Cover(&cover), &map, &cover.lift_form(&quadratic_differential_form(QuadraticDifferential::Pillowcase { n }).unwrap().form), 1e-9).unwrap();
        let g = &space.graph;
        assert_eq!(g.vertices.len(), 2, "n = {n}: {g:?}");
        assert_eq!(g.edges.len(), 1);
        assert!((g.edges[0].length - 0.5).abs() < 1e-12);
        let mut comps: Vec<Vec<usize>> = g.vertices.iter().map(|v| v.components.clone()).collect();
        comps.sort();
        assert_eq!(comps.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 2]);
        assert!(g.vertices.iter().all(|v| v.zeros.is_empty()));
        assert!(check_commensurable(g, 2.0));
        assert_eq!(space.cover_graph.first_betti(), 1);
        assert!((space.cover_graph.total_length() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn base_construction_matches_the_quotient() {
    for n in [4, 6] {
        let (cover, form, map, space) = pillowcase_space(n);
        let direct = leaf_graph_base(&cover, &form, &map, &space.critical_base, &[], LeafOptions::default()).unwrap();
        assert!(direct.isomorphic(&space.graph, 1e-9), "{direct:?} vs {:?}", space.graph);
    }
}

#[test]
fn torus_with_constant_form_is_a_cycle() {
    let n = 6;
    let cx = grid_torus(n).unwrap();
    let x: Vec<f64> = cx
        .edges()
        .iter()
        .map(|e| match (e[1] % n + n - e[0] % n) % n {
            1 => 1.0 / n as f64,
            d if d == n - 1 => -1.0 / n as f64,
            _ => 0.0,
        })
        .collect();
    let cycles = cx.cocycle_basis().unwrap().cycles;
    let p = periods(&cx, &x, &cycles).unwrap();
    let dom = LeafDomain::Plain(&cx);
    let map = integrate_rational_class(dom, &x, &p, 64).unwrap();
    let zeros = detect_zeros(dom, &map, &x, 1e-3);
    assert!(zeros.zeros.is_empty());
    let g = leaf_graph(dom, &map, &x, &zeros, LeafOptions::default()).unwrap().graph;
    assert_eq!(g.first_betti(), 1);
    assert!((g.total_length() - 1.0).abs() < 1e-12);
    assert!(!check_tree(&g));
}

#[test]
fn height_on_the_three_sphere_is_an_interval() {
    let cx = z2harm::complex::cross_polytope_boundary();
    let a = [1.0, 0.3, 0.2, 0.1];
    let h: Vec<f64> = (0..8).map(|v| if v % 2 == 0 { a[v / 2] } else { -a[v / 2] }).collect();
    let dh = cx.coboundary0(&h);
    let dom = LeafDomain::Plain(&cx);
    let map = integrate_rational_class(dom, &dh, &[], 8).unwrap();
    assert!(map.exact);
    let zeros = detect_zeros(dom, &map, &dh, 0.0);
    let g = leaf_graph(dom, &map, &dh, &zeros, LeafOptions::default()).unwrap().graph;
    assert_eq!(g.vertices.len(), 2);
    assert_eq!(g.edges.len(), 1);
    assert!((g.total_length() - 2.0).abs() < 1e-12);
}

#[test]
fn distance_between_singular_leaves() {
    for n in [4, 8, 16] {
        let f = quadratic_differential_form(QuadraticDifferential::Pillowcase { n }).unwrap();
        let cx: &CellComplex = &f.complex;
        let z = f.locus.component_vertices();
        let h = f.form.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut d = f64::INFINITY;
        for a in &z[0] {
            for c in z.iter().skip(1).flatten() {
                let dist = dv_oracle(cx, &f.form, *a, *c);
                if dist > 1e-12 {
                    d = d.min(dist);
                }
            }
        }
        assert!((d - 0.5).abs() <= h, "n = {n}: {d}");
    }
}
