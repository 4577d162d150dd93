//! Two-cusp fixture: the independence check runs all four fixed-point
//! combinations, and the straightened total stays put.

use num_complex::Complex64;

use repvol::equations::{
    edge_equations, newton_solve, residual, volume_of_shapes, NewtonOptions, ShapeVector,
};
use repvol::holonomy::{
    develop, fixed_point_independence_check, straighten_volume, IndependenceOutcome,
};
use repvol::moebius::{FixedPointPolicy, MoebiusClass};
use repvol::trig::Triangulation;

const TWOCUSP: &str = include_str!("../fixtures/twocusp.trig.json");

/// A point on the edge-equation variety with loxodromic peripherals at both
/// cusps, frozen from a converged run; Newton re-certifies it from here.
fn known_start() -> ShapeVector {
    ShapeVector::new(vec![
        Complex64::new(0.4224533533955434, 0.5692518230867584),
        Complex64::new(-0.03207192326830325, 2.3932232635182262),
        Complex64::new(1.3098232824868021, 1.3473074056865908),
        Complex64::new(0.8028670081763041, 1.9706660589598959),
    ])
    .unwrap()
}

#[test]
fn combinatorics() {
    let t = Triangulation::parse(TWOCUSP).unwrap();
    assert_eq!(t.tet_count, 4);
    assert_eq!(t.cusp_count, 2);
    assert_eq!(t.edge_classes().len(), 4);
    let mut valences: Vec<usize> = t.edge_classes().iter().map(|e| e.valence()).collect();
    valences.sort();
    assert_eq!(valences.iter().sum::<usize>(), 24);
    let members: usize = t.cusp_classes().iter().map(|c| c.members.len()).sum();
    assert_eq!(members, 16);
    // dual tree has tet_count - 1 edges, so tet_count + 1 generators remain
    assert_eq!(t.generator_count(), 5);
    let tree_faces = (0..4)
        .flat_map(|tet| (0..4).map(move |f| (tet, f)))
        .filter(|&(tet, f)| t.is_tree_face(tet, f))
        .count();
    assert_eq!(tree_faces, 6); // 3 face pairs
}

#[test]
fn four_combination_independence() {
    let t = Triangulation::parse(TWOCUSP).unwrap();
    let sys = edge_equations(&t);
    let sol = newton_solve(&sys, &known_start(), &NewtonOptions::default()).unwrap();
    assert!(residual(&sys, &sol.shapes) <= 1e-12);

    let (_, rep) = develop(&t, &sol.shapes).unwrap();
    assert!(rep.relator_residual <= 1e-9);
    for cusp in 0..2 {
        let lox = rep
            .peripheral_images(cusp)
            .iter()
            .any(|m| m.classify() == MoebiusClass::Loxodromic);
        assert!(lox, "cusp {cusp} has no loxodromic peripheral image");
    }

    let direct = volume_of_shapes(&sol.shapes).total;
    let straightened = straighten_volume(&t, &rep, FixedPointPolicy::attracting())
        .unwrap()
        .total;
    assert!((straightened - direct).abs() <= 1e-8);

    match fixed_point_independence_check(&t, &rep).unwrap() {
        IndependenceOutcome::Checked {
            runs,
            totals,
            max_discrepancy,
            pass,
        } => {
            assert_eq!(runs, 4);
            assert_eq!(totals.len(), 4);
            assert!(pass, "discrepancy {max_discrepancy:e}");
        }
        IndependenceOutcome::NotApplicable => panic!("loxodromic cusps must be checkable"),
    }
}
