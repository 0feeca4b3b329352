use proptest::prelude::*;
use z2harm::complex::*;

fn generators() -> Vec<CellComplex> {
    vec![
        tetrahedron_boundary(),
        icosahedron(),
        seven_vertex_torus(),
        grid_torus(4).unwrap(),
        cross_polytope_boundary(),
        projective_three_space(),
        sphere_cross_circle(4),
    ]
}

fn pick() -> impl Strategy<Value = (CellComplex, Vec<usize>)> {
    (0..generators().len()).prop_flat_map(|i| {
        let cx = generators().swap_remove(i);
        let perm: Vec<usize> = (0..cx.n_vertices()).collect();
        (Just(cx), Just(perm).prop_shuffle())
    })
}

#[test]
fn projective_space_has_two_torsion() {
    let h = projective_three_space().homology().unwrap();
    assert_eq!(h.betti, vec![1, 0, 0, 1]);
    assert_eq!(h.torsion[1], vec![2]);
    assert!(h.torsion.iter().enumerate().all(|(k, t)| k == 1 || t.is_empty()));
}

#[test]
fn refinement_keeps_old_vertices_and_shrinks_the_star() {
    let cx = join_of_cycles(6, 6);
    let r = refine_around(&cx, &[0, 1], 2).unwrap();
    assert_eq!(r.homology().unwrap(), cx.homology().unwrap());
    assert!(r.n_vertices() > cx.n_vertices());
    // every neighbour of the core is a new vertex after refinement
    for e in r.edges() {
        let core = |v: usize| v < 2;
        if core(e[0]) != core(e[1]) {
            let other = if core(e[0]) { e[1] } else { e[0] };
            assert!(other >= cx.n_vertices(), "{e:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn homology_is_invariant_under_relabelling((cx, perm) in pick()) {
        let r = cx.relabel(&perm).unwrap();
        prop_assert_eq!(r.homology().unwrap(), cx.homology().unwrap());
    }

    #[test]
    fn euler_characteristic_is_the_alternating_betti_sum((cx, _) in pick()) {
        prop_assert_eq!(cx.homology().unwrap().euler_characteristic(), cx.euler_characteristic());
    }

    #[test]
    fn boundary_of_boundary_vanishes((cx, _) in pick()) {
        for k in 2..=cx.dimension() {
            let dd = cx.boundary_matrix(k - 1).unwrap().mul(&cx.boundary_matrix(k).unwrap());
            prop_assert!(dd.is_zero());
        }
    }

    #[test]
    fn stellar_moves_preserve_homology((cx, _) in pick(), dim in 0usize..4, which in any::<prop::sample::Index>()) {
        let k = dim.min(cx.dimension());
        let cell = which.get(cx.cells(k)).clone();
        let s = stellar_subdivision(&cx, &cell).unwrap();
        prop_assert_eq!(s.homology().unwrap(), cx.homology().unwrap());
        prop_assert_eq!(s.cocycle_basis().unwrap().cycles.len(), cx.homology().unwrap().betti[1]);
    }
}
