use proptest::prelude::*;
use z2harm::complex::{join_of_cycles, stellar_subdivision};
use z2harm::cover::*;
use z2harm::presets::{preset, NAMES};

fn counts(cx: &z2harm::complex::CellComplex) -> i64 {
    (0..=cx.dimension()).map(|k| if k % 2 == 0 { cx.n_cells(k) as i64 } else { -(cx.n_cells(k) as i64) }).sum()
}

#[test]
fn shipped_covers_satisfy_the_euler_relation() {
    for name in NAMES {
        let p = preset(name).unwrap();
        let cover = p.cover().unwrap();
        let z = p.locus.cells();
        let chi_z: i64 = z.iter().map(|c| if c.len() % 2 == 1 { 1 } else { -1 }).sum();
        assert_eq!(counts(&cover.complex), 2 * counts(&p.base) - chi_z, "{name}");
        for k in 0..=cover.complex.dimension() {
            let tau = &cover.involution[k];
            for c in 0..tau.len() {
                assert_eq!(tau[tau[c]], c);
                let base_cell = &p.base.cells(k)[cover.projection[k][c]];
                assert_eq!(tau[c] == c, z.contains(base_cell), "{name}: {k}-cell {c}");
            }
        }
    }
}

#[test]
fn obstruction_on_links() {
    let b1 = |name: &str| preset(name).unwrap().cover().unwrap().complex.homology().unwrap().betti[1];
    assert_eq!(b1("hopf"), 0);
    assert_eq!(b1("unlink"), 1);
    let p = preset("unknot").unwrap();
    let r = haydys_obstruction(&p.cover().unwrap(), &p.locus, true).unwrap();
    assert!(!r.passes);
    assert!(r.notes.contains("1 component"), "{}", r.notes);
    let p = preset("hopf").unwrap();
    assert!(!haydys_obstruction(&p.cover().unwrap(), &p.locus, true).unwrap().passes);
    let p = preset("unlink").unwrap();
    assert!(haydys_obstruction(&p.cover().unwrap(), &p.locus, true).unwrap().passes);
}

fn unlink() -> (z2harm::complex::CellComplex, SingularLocus) {
    let z = SingularLocus::loops(&[vec![7, 15, 1, 9], vec![3, 11, 5, 13]]);
    let base = z.make_full(&join_of_cycles(8, 8)).unwrap();
    (base, z)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lift_and_descend_round_trip(values in prop::collection::vec(-1.0f64..1.0, 1..400)) {
        let (base, z) = unlink();
        let cover = build_branched_cover(&base, &z).unwrap();
        // anti-invariance forces zero on edges of the locus
        let zc = z.cells();
        let x: Vec<f64> = base.edges().iter().enumerate().map(|(i, e)| if zc.contains(e) { 0.0 } else { values[i % values.len()] }).collect();
        let lifted = cover.lift_form(&x);
        prop_assert_eq!(cover.descend_form(&lifted), x);
        let pulled = cover.tau_pullback(&lifted);
        prop_assert!(pulled.iter().zip(&lifted).all(|(a, b)| *a == -*b));
    }

    #[test]
    fn subdividing_a_top_cell_keeps_the_cover(which in any::<prop::sample::Index>()) {
        let (base, z) = unlink();
        // a new interior vertex never spans a cell of the locus, so fullness survives
        let sub = stellar_subdivision(&base, which.get(base.top_cells())).unwrap();
        let cover = build_branched_cover(&sub, &z).unwrap();
        prop_assert!(cover.check_invariants().is_ok());
        prop_assert_eq!(cover.complex.homology().unwrap().betti, vec![1, 1, 1, 1]);
    }
}
