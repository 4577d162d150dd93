//! Developing maps and volumes of representations.
//!
//! `develop` places a fundamental domain of tree-glued tetrahedra in the
//! sphere at infinity, reads off the face-pairing transforms of the non-tree
//! faces, and returns them as a representation of the fundamental group.
//! `straighten_volume` goes the other way: given any representation, it
//! sends each cusp's ideal point to a boundary fixed point of its peripheral
//! image, transports it along the per-vertex developing words, takes
//! cross-ratio moduli of the resulting straight tetrahedra, and sums their
//! signed volumes. The total is independent of the fixed-point choices and
//! of conjugation, which the check operations turn into executable tests.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equations::{self, ShapeVector, SolveError};
use crate::ideal::{self, companion, ShapeModulus};
use crate::moebius::{
    common_fixed_point, conjugator, FixedPointChoice, FixedPointPolicy, MoebiusClass, MoebiusError,
    MoebiusTransform, SpherePoint,
};
use crate::report::VolumeReport;
use crate::tol;
use crate::trig::Triangulation;
use crate::word::Word;

#[derive(Debug, Error)]
pub enum HolonomyError {
    #[error("ShapeResidualTooLarge: edge-equation residual {0:e}")]
    ShapeResidualTooLarge(f64),
    #[error(
        "NumericallyCoincidentVertices: developed vertices collapse below the separation guard"
    )]
    NumericallyCoincidentVertices,
    #[error("RelatorResidualTooLarge: relator residual {0:e} above the gate")]
    RelatorResidualTooLarge(f64),
    #[error("InvalidRepresentation: {0}")]
    InvalidRepresentation(String),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Generator images, the worst relator defect, and the peripheral words the
/// images were built against.
#[derive(Debug, Clone)]
pub struct Representation {
    pub generators: Vec<MoebiusTransform>,
    pub relator_residual: f64,
    pub peripheral_words: Vec<(Word, Word)>,
}

impl Representation {
    /// Wraps generator images for a triangulation's presentation, computing
    /// the relator residual and attaching the cusp curve words.
    pub fn from_generators(
        t: &Triangulation,
        generators: Vec<MoebiusTransform>,
    ) -> Result<Representation, HolonomyError> {
        if generators.len() != t.generator_count() {
            return Err(HolonomyError::InvalidRepresentation(format!(
                "expected {} generators, got {}",
                t.generator_count(),
                generators.len()
            )));
        }
        let identity = MoebiusTransform::identity();
        let relator_residual = t
            .relators()
            .iter()
            .map(|w| w.evaluate(&generators).dist_up_to_sign(&identity))
            .fold(0.0, f64::max);
        let peripheral_words = (0..t.cusp_count)
            .map(|c| {
                let curves = t.cusp_curves(c);
                (curves.meridian.clone(), curves.longitude.clone())
            })
            .collect();
        Ok(Representation {
            generators,
            relator_residual,
            peripheral_words,
        })
    }

    pub fn parse(t: &Triangulation, text: &str) -> Result<Representation, HolonomyError> {
        let file: RepresentationFile = serde_json::from_str(text)
            .map_err(|e| HolonomyError::InvalidRepresentation(e.to_string()))?;
        let generators = file
            .generators
            .iter()
            .map(|g| {
                MoebiusTransform::new(
                    Complex64::new(g.a[0], g.a[1]),
                    Complex64::new(g.b[0], g.b[1]),
                    Complex64::new(g.c[0], g.c[1]),
                    Complex64::new(g.d[0], g.d[1]),
                )
                .map_err(|e| HolonomyError::InvalidRepresentation(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Representation::from_generators(t, generators)
    }

    pub fn to_file(&self) -> RepresentationFile {
        RepresentationFile {
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorEntry {
                    a: [g.a.re, g.a.im],
                    b: [g.b.re, g.b.im],
                    c: [g.c.re, g.c.im],
                    d: [g.d.re, g.d.im],
                })
                .collect(),
        }
    }

    pub fn peripheral_images(&self, cusp: usize) -> [MoebiusTransform; 2] {
        let (m, l) = &self.peripheral_words[cusp];
        [m.evaluate(&self.generators), l.evaluate(&self.generators)]
    }

    /// The representation g . rho . g^{-1}.
    pub fn conjugated(&self, g: &MoebiusTransform) -> Representation {
        let inv = g.inverse();
        Representation {
            generators: self.generators.iter().map(|m| *g * *m * inv).collect(),
            relator_residual: self.relator_residual,
            peripheral_words: self.peripheral_words.clone(),
        }
    }

    /// Entrywise complex conjugation of every generator (the mirror image).
    pub fn entrywise_conj(&self) -> Representation {
        Representation {
            generators: self.generators.iter().map(|m| m.entrywise_conj()).collect(),
            relator_residual: self.relator_residual,
            peripheral_words: self.peripheral_words.clone(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GeneratorEntry {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RepresentationFile {
    pub generators: Vec<GeneratorEntry>,
}

/// Vertex positions of the developed fundamental domain, one quadruple per
/// tetrahedron, plus the face-pairing transform of every generator.
#[derive(Debug)]
pub struct DevelopedDomain {
    pub positions: Vec<[SpherePoint; 4]>,
}

impl DevelopedDomain {
    pub fn tet_modulus(&self, tet: usize) -> ShapeModulus {
        let p = &self.positions[tet];
        ideal::tet_modulus_of_points(&p[0], &p[1], &p[2], &p[3])
    }
}

/// Position of the remaining vertex of a tetrahedron with modulus `z` when
/// the other three are pinned: the unknown slot determines which anharmonic
/// image of sigma(z) the standard-triple map must hit.
fn solve_fourth_vertex(
    known: [&SpherePoint; 3],
    unknown_slot: usize,
    z: Complex64,
) -> Result<SpherePoint, HolonomyError> {
    let c = companion(z); // cr(p0,p1,p2,p3) of the completed quadruple
    let one = Complex64::new(1.0, 0.0);
    let (triple, value) = match unknown_slot {
        3 => ([known[0], known[1], known[2]], c),
        2 => ([known[0], known[1], known[2]], one - c),
        1 => ([known[0], known[2], known[1]], one / c),
        _ => ([known[2], known[0], known[1]], c / (c - one)),
    };
    let m = MoebiusTransform::to_standard_triple(triple[0], triple[1], triple[2])
        .map_err(|_| HolonomyError::NumericallyCoincidentVertices)?;
    Ok(m.inverse().apply(&SpherePoint::from_complex(value)))
}

/// Develops a shape solution: the base tetrahedron at (0, 1, inf, sigma(z0)),
/// tree neighbors sharing vertex triples exactly, and one face-pairing
/// transform per generator. The returned representation satisfies the edge
/// relators to numerical accuracy.
pub fn develop(
    t: &Triangulation,
    z: &ShapeVector,
) -> Result<(DevelopedDomain, Representation), HolonomyError> {
    let edge_sys = equations::edge_equations(t);
    let res = equations::residual(&edge_sys, z);
    if res > tol::DEVELOP_SHAPE_RESIDUAL {
        return Err(HolonomyError::ShapeResidualTooLarge(res));
    }
    let n = t.tet_count;
    let zs = z.entries();
    let mut positions: Vec<Option<[SpherePoint; 4]>> = vec![None; n];
    let zero = SpherePoint::from_complex(Complex64::new(0.0, 0.0));
    let one = SpherePoint::from_complex(Complex64::new(1.0, 0.0));
    let inf = SpherePoint::infinity();
    let fourth = SpherePoint::from_complex(companion(zs[0]));
    positions[0] = Some([zero, one, inf, fourth]);
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(tet) = queue.pop_front() {
        let here = positions[tet].unwrap();
        for f in 0..4 {
            if !t.is_tree_face(tet, f) {
                continue;
            }
            let g = t.gluing(tet, f);
            if positions[g.to_tet].is_some() {
                continue;
            }
            let mut pts: [Option<SpherePoint>; 4] = [None; 4];
            for v in 0..4 {
                if v != f {
                    pts[g.perm.apply(v)] = Some(here[v]);
                }
            }
            let unknown = g.perm.apply(f);
            let known_idx: Vec<usize> = (0..4).filter(|&i| i != unknown).collect();
            let known = [
                &pts[known_idx[0]].unwrap(),
                &pts[known_idx[1]].unwrap(),
                &pts[known_idx[2]].unwrap(),
            ];
            let new_pt = solve_fourth_vertex(known, unknown, zs[g.to_tet])?;
            pts[unknown] = Some(new_pt);
            let quad = [
                pts[0].unwrap(),
                pts[1].unwrap(),
                pts[2].unwrap(),
                pts[3].unwrap(),
            ];
            check_separation(&quad)?;
            positions[g.to_tet] = Some(quad);
            queue.push_back(g.to_tet);
        }
    }
    let positions: Vec<[SpherePoint; 4]> = positions.into_iter().map(|p| p.unwrap()).collect();
    check_separation(&positions[0])?;

    // face-pairing transform per generator: map the target tet's developed
    // face triple onto the source tet's
    let mut generators = Vec::with_capacity(t.generator_count());
    for &((t1, f1), (t2, _f2)) in &t.generator_pairs {
        let g = t.gluing(t1, f1);
        let vs: Vec<usize> = (0..4).filter(|&v| v != f1).collect();
        let src: Vec<SpherePoint> = vs.iter().map(|&v| positions[t2][g.perm.apply(v)]).collect();
        let tgt: Vec<SpherePoint> = vs.iter().map(|&v| positions[t1][v]).collect();
        let m = MoebiusTransform::matching_triples(
            [&src[0], &src[1], &src[2]],
            [&tgt[0], &tgt[1], &tgt[2]],
        )
        .map_err(|_| HolonomyError::NumericallyCoincidentVertices)?;
        generators.push(m);
    }
    let rep = Representation::from_generators(t, generators)?;
    Ok((DevelopedDomain { positions }, rep))
}

fn check_separation(quad: &[SpherePoint; 4]) -> Result<(), HolonomyError> {
    for i in 0..4 {
        for j in i + 1..4 {
            if quad[i].chordal(&quad[j]) < tol::COINCIDENT_VERTEX {
                return Err(HolonomyError::NumericallyCoincidentVertices);
            }
        }
    }
    Ok(())
}

/// Straightened volume of a representation under one fixed-point choice per
/// cusp.
pub fn straighten_volume_with_choices(
    t: &Triangulation,
    rep: &Representation,
    choices: &[FixedPointChoice],
    relator_gate: f64,
) -> Result<VolumeReport, HolonomyError> {
    if rep.relator_residual > relator_gate {
        return Err(HolonomyError::RelatorResidualTooLarge(rep.relator_residual));
    }
    let mut cusp_points = Vec::with_capacity(t.cusp_count);
    for c in 0..t.cusp_count {
        let images = rep.peripheral_images(c);
        let policy = FixedPointPolicy {
            choice: choices[c],
            lenient_identity: true,
        };
        cusp_points.push(common_fixed_point(&images, policy)?);
    }
    let mut moduli = Vec::with_capacity(t.tet_count);
    for tet in 0..t.tet_count {
        let img: Vec<SpherePoint> = (0..4)
            .map(|v| {
                let xi = &cusp_points[t.cusp_of(tet, v)];
                t.vertex_word(tet, v).evaluate(&rep.generators).apply(xi)
            })
            .collect();
        moduli.push(ideal::tet_modulus_of_points(
            &img[0], &img[1], &img[2], &img[3],
        ));
    }
    let mut report = VolumeReport::from_moduli(moduli);
    report.relator_residual = Some(rep.relator_residual);
    Ok(report)
}

/// Straightened volume with a uniform fixed-point policy.
pub fn straighten_volume(
    t: &Triangulation,
    rep: &Representation,
    policy: FixedPointPolicy,
) -> Result<VolumeReport, HolonomyError> {
    let choices = vec![policy.choice; t.cusp_count];
    let mut report = straighten_volume_with_choices(t, rep, &choices, tol::RELATOR_RESIDUAL)?;
    report.policy = Some(
        match policy.choice {
            FixedPointChoice::Attracting => "attracting",
            FixedPointChoice::Repelling => "repelling",
        }
        .to_string(),
    );
    Ok(report)
}

/// Outcome of the fixed-point independence check.
#[derive(Debug, Clone, Serialize)]
pub enum IndependenceOutcome {
    /// Every peripheral image is parabolic or trivial; the fixed point is
    /// forced and there is nothing to vary.
    NotApplicable,
    Checked {
        runs: usize,
        totals: Vec<f64>,
        max_discrepancy: f64,
        pass: bool,
    },
}

/// Straightens under every combination of per-cusp attracting/repelling
/// choices and compares the totals. Rigidity of the volume says they agree.
pub fn fixed_point_independence_check(
    t: &Triangulation,
    rep: &Representation,
) -> Result<IndependenceOutcome, HolonomyError> {
    let mut free_cusps = Vec::new();
    for c in 0..t.cusp_count {
        let images = rep.peripheral_images(c);
        let two_sided = images.iter().any(|m| {
            matches!(
                m.classify(),
                MoebiusClass::Loxodromic | MoebiusClass::Elliptic
            )
        });
        if two_sided {
            free_cusps.push(c);
        }
    }
    if free_cusps.is_empty() {
        return Ok(IndependenceOutcome::NotApplicable);
    }
    let combos = 1usize << free_cusps.len();
    let mut totals = Vec::with_capacity(combos);
    for mask in 0..combos {
        let mut choices = vec![FixedPointChoice::Attracting; t.cusp_count];
        for (bit, &c) in free_cusps.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                choices[c] = FixedPointChoice::Repelling;
            }
        }
        let report = straighten_volume_with_choices(t, rep, &choices, tol::RELATOR_RESIDUAL)?;
        totals.push(report.total);
    }
    let mut max_disc: f64 = 0.0;
    for i in 0..totals.len() {
        for j in i + 1..totals.len() {
            max_disc = max_disc.max((totals[i] - totals[j]).abs());
        }
    }
    Ok(IndependenceOutcome::Checked {
        runs: combos,
        totals,
        max_discrepancy: max_disc,
        pass: max_disc <= tol::POLICY_INDEPENDENCE,
    })
}

#[derive(Debug, Clone, Serialize)]
pub enum RigidityVerdict {
    /// |volume| matches the complete volume and an explicit conjugacy to the
    /// complete holonomy (or its mirror) was verified on every generator.
    ConjugateToComplete { mirror: bool },
    /// |volume| matches but no conjugator could be certified.
    VolumeMatchesNoCertificate,
    /// |volume| is strictly below the complete volume.
    StrictlySmallerVolume,
    /// |volume| exceeds the complete volume beyond tolerance; this
    /// contradicts the volume bound and signals broken input.
    ExceedsBound,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    pub volume: f64,
    pub complete_volume: f64,
    pub verdict: RigidityVerdict,
    #[serde(skip)]
    pub conjugator: Option<MoebiusTransform>,
}

/// Compares a representation's volume against the complete structure's and
/// certifies conjugacy when the volumes agree.
pub fn rigidity_check(
    t: &Triangulation,
    rep: &Representation,
    complete: &Representation,
    vol_complete: f64,
    policy: FixedPointPolicy,
) -> Result<RigidityReport, HolonomyError> {
    let report = straighten_volume(t, rep, policy)?;
    let v = report.total;
    let make = |verdict, phi| RigidityReport {
        volume: v,
        complete_volume: vol_complete,
        verdict,
        conjugator: phi,
    };
    if v.abs() > vol_complete + tol::RIGIDITY_VOLUME {
        return Ok(make(RigidityVerdict::ExceedsBound, None));
    }
    if v.abs() < vol_complete - tol::RIGIDITY_VOLUME {
        return Ok(make(RigidityVerdict::StrictlySmallerVolume, None));
    }
    // volume matches: look for the certificate against the complete holonomy
    // or, for negative volume, against its mirror
    let (reference, mirror) = if v >= 0.0 {
        (complete.clone(), false)
    } else {
        (complete.entrywise_conj(), true)
    };
    match conjugator(&reference.generators, &rep.generators) {
        Some(phi) => Ok(make(
            RigidityVerdict::ConjugateToComplete { mirror },
            Some(phi),
        )),
        None => Ok(make(RigidityVerdict::VolumeMatchesNoCertificate, None)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::{build_equations, build_equations_with, newton_solve, NewtonOptions};

    const FIG8: &str = include_str!("../fixtures/fig8.trig.json");

    fn fig8() -> Triangulation {
        Triangulation::parse(FIG8).unwrap()
    }

    fn complete_solution(t: &Triangulation) -> ShapeVector {
        let sys = build_equations(t).unwrap();
        newton_solve(&sys, &ShapeVector::regular(2), &NewtonOptions::default())
            .unwrap()
            .shapes
    }

    #[test]
    fn develop_base_placement_and_moduli() {
        let t = fig8();
        let z = complete_solution(&t);
        let (domain, rep) = develop(&t, &z).unwrap();
        let p = &domain.positions[0];
        assert!(p[0].to_complex().map(|c| c.norm() < 1e-14).unwrap_or(false));
        assert!(p[1]
            .to_complex()
            .map(|c| (c - 1.0).norm() < 1e-14)
            .unwrap_or(false));
        assert!(p[2].is_infinity());
        for tet in 0..t.tet_count {
            let m = domain.tet_modulus(tet).value().unwrap();
            assert!((m - z.entries()[tet]).norm() < 1e-10);
        }
        // glued vertex triples across tree faces coincide exactly
        for tet in 0..t.tet_count {
            for f in 0..4 {
                if !t.is_tree_face(tet, f) {
                    continue;
                }
                let g = t.gluing(tet, f);
                for v in 0..4 {
                    if v == f {
                        continue;
                    }
                    let here = domain.positions[tet][v];
                    let there = domain.positions[g.to_tet][g.perm.apply(v)];
                    assert_eq!(here.chordal(&there), 0.0);
                }
            }
        }
        assert!(rep.relator_residual < 1e-12);
    }

    #[test]
    fn complete_holonomy_has_parabolic_peripherals() {
        let t = fig8();
        let z = complete_solution(&t);
        let (_, rep) = develop(&t, &z).unwrap();
        for m in rep.peripheral_images(0) {
            let tr2 = m.trace_sq();
            assert!(
                (tr2 - Complex64::new(4.0, 0.0)).norm() < 1e-8,
                "tr^2 = {tr2}"
            );
        }
    }

    #[test]
    fn develop_rejects_bad_shapes() {
        let t = fig8();
        let z = ShapeVector::new(vec![Complex64::new(0.3, 0.7), Complex64::new(0.6, 0.9)]).unwrap();
        assert!(matches!(
            develop(&t, &z),
            Err(HolonomyError::ShapeResidualTooLarge(_))
        ));
    }

    #[test]
    fn straighten_round_trip_complete() {
        let t = fig8();
        let z = complete_solution(&t);
        let (_, rep) = develop(&t, &z).unwrap();
        let direct = equations::volume_of_shapes(&z).total;
        let report = straighten_volume(&t, &rep, FixedPointPolicy::attracting()).unwrap();
        assert!((report.total - direct).abs() < 1e-8);
        assert!((report.total - 2.029883212819307).abs() < 1e-9);
    }

    #[test]
    fn straighten_round_trip_filled_both_policies() {
        let t = fig8();
        let sys = build_equations_with(&t, &[Some((5, 1))]).unwrap();
        let sol = newton_solve(&sys, &ShapeVector::regular(2), &NewtonOptions::default())
            .unwrap()
            .shapes;
        let (_, rep) = develop(&t, &sol).unwrap();
        let direct = equations::volume_of_shapes(&sol).total;
        let att = straighten_volume(&t, &rep, FixedPointPolicy::attracting()).unwrap();
        let repq = straighten_volume(&t, &rep, FixedPointPolicy::repelling()).unwrap();
        assert!((att.total - direct).abs() < 1e-8);
        assert!((att.total - repq.total).abs() < 1e-8);
        // the two choices straighten through different moduli
        let ma = att.moduli();
        let mr = repq.moduli();
        let diff = ma
            .iter()
            .zip(&mr)
            .map(|(a, b)| match (a.value(), b.value()) {
                (Some(x), Some(y)) => (x - y).norm(),
                _ => 0.0,
            })
            .fold(0.0, f64::max);
        assert!(diff > 1e-3, "policies picked the same fixed point");
    }

    #[test]
    fn trivial_representation_is_degenerate_with_zero_volume() {
        let t = fig8();
        let rep = Representation::from_generators(
            &t,
            vec![MoebiusTransform::identity(); t.generator_count()],
        )
        .unwrap();
        let report = straighten_volume(&t, &rep, FixedPointPolicy::attracting()).unwrap();
        assert_eq!(report.total, 0.0);
        assert!(report
            .per_tet
            .iter()
            .all(|p| p.flags.contains(&"degenerate".to_string())));
    }

    #[test]
    fn independence_check_outcomes() {
        let t = fig8();
        let z = complete_solution(&t);
        let (_, rep) = develop(&t, &z).unwrap();
        assert!(matches!(
            fixed_point_independence_check(&t, &rep).unwrap(),
            IndependenceOutcome::NotApplicable
        ));

        let sys = build_equations_with(&t, &[Some((5, 1))]).unwrap();
        let sol = newton_solve(&sys, &ShapeVector::regular(2), &NewtonOptions::default())
            .unwrap()
            .shapes;
        let (_, filled) = develop(&t, &sol).unwrap();
        match fixed_point_independence_check(&t, &filled).unwrap() {
            IndependenceOutcome::Checked {
                runs,
                max_discrepancy,
                pass,
                ..
            } => {
                assert_eq!(runs, 2);
                assert!(pass, "discrepancy {max_discrepancy}");
            }
            other => panic!("expected a checked outcome, got {other:?}"),
        }
    }

    #[test]
    fn filling_word_maps_to_identity() {
        // the holonomy of p*mu + q*lambda must die in a (p,q)-filled solution
        let t = fig8();
        let (p, q) = (5i64, 1i64);
        let sys = build_equations_with(&t, &[Some((p, q))]).unwrap();
        let sol = newton_solve(&sys, &ShapeVector::regular(2), &NewtonOptions::default())
            .unwrap()
            .shapes;
        let (_, rep) = develop(&t, &sol).unwrap();
        let curves = t.cusp_curves(0);
        let core = curves.meridian.pow(p).concat(&curves.longitude.pow(q));
        let img = core.evaluate(&rep.generators);
        assert!(
            img.dist_up_to_sign(&MoebiusTransform::identity()) < 1e-8,
            "core curve image is not trivial"
        );
    }

    #[test]
    fn rigidity_verdicts() {
        let t = fig8();
        let z = complete_solution(&t);
        let (_, complete) = develop(&t, &z).unwrap();
        let vol = equations::volume_of_shapes(&z).total;

        let g = MoebiusTransform::new(
            Complex64::new(1.3, 0.2),
            Complex64::new(-0.4, 1.1),
            Complex64::new(0.0, 0.7),
            Complex64::new(0.9, -0.5),
        )
        .unwrap();
        let conj = complete.conjugated(&g);
        let report =
            rigidity_check(&t, &conj, &complete, vol, FixedPointPolicy::attracting()).unwrap();
        match report.verdict {
            RigidityVerdict::ConjugateToComplete { mirror } => {
                assert!(!mirror);
                let phi = report.conjugator.unwrap();
                assert!(phi.dist_up_to_sign(&g) < 1e-7);
            }
            other => panic!("expected certificate, got {other:?}"),
        }

        let sys = build_equations_with(&t, &[Some((5, 1))]).unwrap();
        let sol = newton_solve(&sys, &ShapeVector::regular(2), &NewtonOptions::default())
            .unwrap()
            .shapes;
        let (_, filled) = develop(&t, &sol).unwrap();
        let report =
            rigidity_check(&t, &filled, &complete, vol, FixedPointPolicy::attracting()).unwrap();
        assert!(matches!(
            report.verdict,
            RigidityVerdict::StrictlySmallerVolume
        ));
        assert!(report.conjugator.is_none());

        let trivial = Representation::from_generators(
            &t,
            vec![MoebiusTransform::identity(); t.generator_count()],
        )
        .unwrap();
        let report =
            rigidity_check(&t, &trivial, &complete, vol, FixedPointPolicy::attracting()).unwrap();
        assert!(matches!(
            report.verdict,
            RigidityVerdict::StrictlySmallerVolume
        ));
    }

    #[test]
    fn mirror_solution_round_trips_with_negative_volume() {
        let t = fig8();
        let z = complete_solution(&t).conjugate();
        let direct = equations::volume_of_shapes(&z).total;
        assert!(direct < 0.0);
        let (domain, rep) = develop(&t, &z).unwrap();
        for tet in 0..t.tet_count {
            let m = domain.tet_modulus(tet).value().unwrap();
            assert!((m - z.entries()[tet]).norm() < 1e-10);
        }
        let report = straighten_volume(&t, &rep, FixedPointPolicy::attracting()).unwrap();
        assert!((report.total - direct).abs() <= 1e-8);
        assert!((report.total + 2.029883212819307).abs() <= 1e-9);
    }

    #[test]
    fn representation_json_round_trip() {
        let t = fig8();
        let z = complete_solution(&t);
        let (_, rep) = develop(&t, &z).unwrap();
        let text = serde_json::to_string(&rep.to_file()).unwrap();
        let back = Representation::parse(&t, &text).unwrap();
        assert!(back.relator_residual < 1e-10);
        for (a, b) in rep.generators.iter().zip(&back.generators) {
            assert!(a.dist_up_to_sign(b) < 1e-12);
        }
    }

    #[test]
    fn singular_generator_rejected() {
        let t = fig8();
        let text = r#"{"generators":[
            {"a":[1,0],"b":[0,0],"c":[0,0],"d":[0,0]},
            {"a":[1,0],"b":[0,0],"c":[0,0],"d":[1,0]},
            {"a":[1,0],"b":[0,0],"c":[0,0],"d":[1,0]}]}"#;
        assert!(matches!(
            Representation::parse(&t, text),
            Err(HolonomyError::InvalidRepresentation(_))
        ));
    }
}
