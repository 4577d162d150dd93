//! PSL(2,C) acting on the Riemann sphere.
//!
//! Transforms are normalized 2x2 complex matrices identified with their
//! negation. Sphere points are projective pairs (u : v), so the point at
//! infinity needs no special casing anywhere in the action.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::Mul;
use thiserror::Error;

use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum MoebiusError {
    #[error("SingularMatrix: |det| = {0:e} below the rejection threshold")]
    SingularMatrix(f64),
    #[error("IdentityHasNoIsolatedFixedPoints: the identity fixes every point")]
    IdentityHasNoIsolatedFixedPoints,
    #[error("NonCommutingGenerators: commutation defect {0:e}")]
    NonCommutingGenerators(f64),
    #[error("DihedralPeripheral: commuting generators with no common boundary fixed point")]
    DihedralPeripheral,
    #[error("AllIdentity: every peripheral generator is the identity")]
    AllIdentity,
    #[error("CoincidentPoints: sphere points are numerically coincident")]
    CoincidentPoints,
}

/// A point of the Riemann sphere in projective coordinates (u : v).
///
/// Invariant: (u, v) != (0, 0); the pair is rescaled so its larger component
/// has modulus 1, which keeps the chordal metric well conditioned.
#[derive(Debug, Clone, Copy)]
pub struct SpherePoint {
    u: Complex64,
    v: Complex64,
}

impl SpherePoint {
    pub fn new(u: Complex64, v: Complex64) -> Result<Self, MoebiusError> {
        let m = u.norm().max(v.norm());
        if m == 0.0 || !m.is_finite() {
            return Err(MoebiusError::CoincidentPoints);
        }
        Ok(SpherePoint { u: u / m, v: v / m })
    }

    pub fn from_complex(z: Complex64) -> Self {
        SpherePoint::new(z, Complex64::new(1.0, 0.0)).expect("finite complex number")
    }

    pub fn infinity() -> Self {
        SpherePoint {
            u: Complex64::new(1.0, 0.0),
            v: Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.v.norm() <= 1e-14 * self.u.norm()
    }

    /// Affine coordinate, or None for points at (numerical) infinity.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.is_infinity() {
            None
        } else {
            Some(self.u / self.v)
        }
    }

    /// Chordal (round-sphere) distance; ranges over [0, 2].
    pub fn chordal(&self, other: &SpherePoint) -> f64 {
        let num = 2.0 * (self.u * other.v - other.u * self.v).norm();
        let d1 = (self.u.norm_sqr() + self.v.norm_sqr()).sqrt();
        let d2 = (other.u.norm_sqr() + other.v.norm_sqr()).sqrt();
        num / (d1 * d2)
    }

    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        self.chordal(other) <= tol
    }
}

/// How to pick one of the two fixed points of a loxodromic or elliptic
/// peripheral image. The straightened volume does not depend on the choice,
/// which is exactly what makes exposing both worth it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointChoice {
    Attracting,
    Repelling,
}

/// Policy for resolving the boundary fixed point of a peripheral subgroup.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointPolicy {
    pub choice: FixedPointChoice,
    /// When every generator is the identity there is no isolated fixed point.
    /// Lenient policy returns infinity (the volume is 0 for any choice);
    /// strict policy reports an error.
    pub lenient_identity: bool,
}

impl Default for FixedPointPolicy {
    fn default() -> Self {
        FixedPointPolicy {
            choice: FixedPointChoice::Attracting,
            lenient_identity: true,
        }
    }
}

impl FixedPointPolicy {
    pub fn attracting() -> Self {
        Self::default()
    }

    pub fn repelling() -> Self {
        FixedPointPolicy {
            choice: FixedPointChoice::Repelling,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoebiusClass {
    Identity,
    Parabolic,
    Elliptic,
    Loxodromic,
}

/// Fixed points of a non-identity transform on the boundary sphere.
#[derive(Debug, Clone, Copy)]
pub enum FixedPoints {
    Single(SpherePoint),
    Pair(SpherePoint, SpherePoint),
}

impl FixedPoints {
    pub fn iter(&self) -> impl Iterator<Item = SpherePoint> {
        let (a, b) = match *self {
            FixedPoints::Single(p) => (p, None),
            FixedPoints::Pair(p, q) => (p, Some(q)),
        };
        std::iter::once(a).chain(b)
    }
}

/// An orientation-preserving isometry of H^3 as a matrix with det = 1,
/// identified with its negation.
#[derive(Debug, Clone, Copy)]
pub struct MoebiusTransform {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MoebiusTransform {
    pub fn new(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, MoebiusError> {
        let det = a * d - b * c;
        if det.norm() < tol::SINGULAR_DET || !det.norm().is_finite() {
            return Err(MoebiusError::SingularMatrix(det.norm()));
        }
        let r = det.sqrt();
        Ok(MoebiusTransform {
            a: a / r,
            b: b / r,
            c: c / r,
            d: d / r,
        })
    }

    pub fn identity() -> Self {
        MoebiusTransform {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn inverse(&self) -> Self {
        MoebiusTransform {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn trace_sq(&self) -> Complex64 {
        let t = self.trace();
        t * t
    }

    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        SpherePoint::new(self.a * p.u + self.b * p.v, self.c * p.u + self.d * p.v)
            .expect("normalized transform maps the sphere to itself")
    }

    /// Frobenius distance min(|m - n|, |m + n|); the sign ambiguity of the
    /// lift is quotiented out.
    pub fn dist_up_to_sign(&self, other: &MoebiusTransform) -> f64 {
        let plus = ((self.a - other.a).norm_sqr()
            + (self.b - other.b).norm_sqr()
            + (self.c - other.c).norm_sqr()
            + (self.d - other.d).norm_sqr())
        .sqrt();
        let minus = ((self.a + other.a).norm_sqr()
            + (self.b + other.b).norm_sqr()
            + (self.c + other.c).norm_sqr()
            + (self.d + other.d).norm_sqr())
        .sqrt();
        plus.min(minus)
    }

    pub fn is_identity(&self, tolerance: f64) -> bool {
        self.dist_up_to_sign(&MoebiusTransform::identity()) <= tolerance
    }

    pub fn classify(&self) -> MoebiusClass {
        if self.is_identity(tol::IDENTITY_MATRIX) {
            return MoebiusClass::Identity;
        }
        let t2 = self.trace_sq();
        if (t2 - Complex64::new(4.0, 0.0)).norm() <= tol::CLASSIFY_BAND {
            return MoebiusClass::Parabolic;
        }
        if t2.im.abs() <= tol::CLASSIFY_BAND && t2.re >= 0.0 && t2.re < 4.0 {
            return MoebiusClass::Elliptic;
        }
        MoebiusClass::Loxodromic
    }

    /// Boundary fixed points: roots of c w^2 + (d - a) w - b = 0.
    pub fn fixed_points(&self) -> Result<FixedPoints, MoebiusError> {
        if self.classify() == MoebiusClass::Identity {
            return Err(MoebiusError::IdentityHasNoIsolatedFixedPoints);
        }
        let scale = self
            .a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm());
        let dma = self.d - self.a;
        if self.c.norm() <= 1e-13 * scale {
            // fixes infinity
            if dma.norm() <= 1e-13 * scale {
                return Ok(FixedPoints::Single(SpherePoint::infinity()));
            }
            let w = self.b / dma;
            return Ok(FixedPoints::Pair(
                SpherePoint::infinity(),
                SpherePoint::from_complex(w),
            ));
        }
        let disc = self.trace_sq() - Complex64::new(4.0, 0.0);
        if disc.norm() <= tol::CLASSIFY_BAND {
            let w = (self.a - self.d) / (2.0 * self.c);
            return Ok(FixedPoints::Single(SpherePoint::from_complex(w)));
        }
        let s = disc.sqrt();
        // larger-magnitude root first for stability, partner via root product
        let amd = self.a - self.d;
        let (n1, n2) = if (amd + s).norm() >= (amd - s).norm() {
            (amd + s, amd - s)
        } else {
            (amd - s, amd + s)
        };
        let r1 = n1 / (2.0 * self.c);
        let r2 = if n1.norm() > 0.0 {
            // r1 * r2 = -b / c
            -self.b / (self.c * r1)
        } else {
            n2 / (2.0 * self.c)
        };
        Ok(FixedPoints::Pair(
            SpherePoint::from_complex(r1),
            SpherePoint::from_complex(r2),
        ))
    }

    /// Derivative of the sphere action at a point, computed in a chart where
    /// the point is finite. At a fixed point this is the multiplier, a
    /// conjugation invariant.
    pub fn derivative_at(&self, p: &SpherePoint) -> Complex64 {
        if p.v.norm() >= p.u.norm() {
            let x = p.u / p.v;
            let den = self.c * x + self.d;
            1.0 / (den * den)
        } else {
            // chart w = 1/z around infinity
            let x = p.v / p.u;
            let den = self.b * x + self.a;
            1.0 / (den * den)
        }
    }

    /// The transform sending (p0, p1, p2) to (0, 1, inf).
    pub fn to_standard_triple(
        p0: &SpherePoint,
        p1: &SpherePoint,
        p2: &SpherePoint,
    ) -> Result<MoebiusTransform, MoebiusError> {
        let a = p1.u * p2.v - p2.u * p1.v;
        let b = p1.u * p0.v - p0.u * p1.v;
        MoebiusTransform::new(a * p0.v, -(a * p0.u), b * p2.v, -(b * p2.u))
            .map_err(|_| MoebiusError::CoincidentPoints)
    }

    /// The unique transform carrying one ordered triple onto another.
    pub fn matching_triples(
        src: [&SpherePoint; 3],
        tgt: [&SpherePoint; 3],
    ) -> Result<MoebiusTransform, MoebiusError> {
        let ms = Self::to_standard_triple(src[0], src[1], src[2])?;
        let mt = Self::to_standard_triple(tgt[0], tgt[1], tgt[2])?;
        Ok(mt.inverse() * ms)
    }

    /// Entrywise complex conjugate; conjugating a representation this way
    /// mirrors it and negates its volume.
    pub fn entrywise_conj(&self) -> Self {
        MoebiusTransform {
            a: self.a.conj(),
            b: self.b.conj(),
            c: self.c.conj(),
            d: self.d.conj(),
        }
    }
}

impl Mul for MoebiusTransform {
    type Output = MoebiusTransform;

    fn mul(self, o: MoebiusTransform) -> MoebiusTransform {
        MoebiusTransform::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
        .expect("product of normalized transforms")
    }
}

/// Attracting/repelling labels for the two fixed points of `m`.
///
/// |derivative| < 1 marks the attracting point. Elliptic elements have unit
/// multiplier; the point whose multiplier has positive imaginary part gets
/// the attracting label, which keeps the labeling conjugation-invariant.
pub fn labeled_fixed_pair(
    m: &MoebiusTransform,
    p: SpherePoint,
    q: SpherePoint,
) -> (SpherePoint, SpherePoint) {
    let dp = m.derivative_at(&p);
    let attracting_first = if (dp.norm() - 1.0).abs() <= 1e-9 {
        dp.im > 0.0
    } else {
        dp.norm() < 1.0
    };
    if attracting_first {
        (p, q)
    } else {
        (q, p)
    }
}

/// Common boundary fixed point of a commuting family of transforms.
///
/// A parabolic member forces the answer (its fixed point is unique). When all
/// non-identity members share an axis, `policy` selects one endpoint. Two
/// half-turns about orthogonal axes commute without a common boundary fixed
/// point; that configuration is rejected as dihedral.
pub fn common_fixed_point(
    gens: &[MoebiusTransform],
    policy: FixedPointPolicy,
) -> Result<SpherePoint, MoebiusError> {
    let non_id: Vec<&MoebiusTransform> = gens
        .iter()
        .filter(|g| !g.is_identity(tol::IDENTITY_MATRIX))
        .collect();
    if non_id.is_empty() {
        if policy.lenient_identity {
            return Ok(SpherePoint::infinity());
        }
        return Err(MoebiusError::AllIdentity);
    }
    for (i, g) in non_id.iter().enumerate() {
        for h in &non_id[i + 1..] {
            let gh = **g * **h;
            let hg = **h * **g;
            let err = gh.dist_up_to_sign(&hg);
            if err > tol::COMMUTATION {
                return Err(MoebiusError::NonCommutingGenerators(err));
            }
        }
    }
    // a parabolic member pins the point
    if let Some(p) = non_id
        .iter()
        .find(|g| g.classify() == MoebiusClass::Parabolic)
    {
        let fp = match p.fixed_points()? {
            FixedPoints::Single(x) => x,
            FixedPoints::Pair(x, _) => x, // numerically near-parabolic
        };
        for g in &non_id {
            if g.apply(&fp).chordal(&fp) > tol::COMMON_FIXED_POINT {
                return Err(MoebiusError::DihedralPeripheral);
            }
        }
        return Ok(fp);
    }
    let first = non_id[0];
    let (p, q) = match first.fixed_points()? {
        FixedPoints::Single(x) => (x, x),
        FixedPoints::Pair(x, y) => (x, y),
    };
    for g in &non_id[1..] {
        let gp = g.apply(&p);
        let gq = g.apply(&q);
        let fixes =
            gp.chordal(&p) <= tol::COMMON_FIXED_POINT && gq.chordal(&q) <= tol::COMMON_FIXED_POINT;
        if fixes {
            continue;
        }
        let swaps =
            gp.chordal(&q) <= tol::COMMON_FIXED_POINT && gq.chordal(&p) <= tol::COMMON_FIXED_POINT;
        if swaps {
            return Err(MoebiusError::DihedralPeripheral);
        }
        return Err(MoebiusError::NonCommutingGenerators(
            gp.chordal(&p).max(gq.chordal(&q)),
        ));
    }
    let (att, rep) = labeled_fixed_pair(first, p, q);
    Ok(match policy.choice {
        FixedPointChoice::Attracting => att,
        FixedPointChoice::Repelling => rep,
    })
}

/// Conjugator recovery: a transform phi with b_i = +/- phi a_i phi^{-1} for
/// every index, or None.
///
/// Candidates come from matching fixed-point triples of corresponding
/// generators (multipliers disambiguate the pairing); each candidate is
/// refined by a least-squares pass over the linear equations
/// b_i phi - s_i phi a_i = 0 and then verified on every generator.
pub fn conjugator(
    rep_a: &[MoebiusTransform],
    rep_b: &[MoebiusTransform],
) -> Option<MoebiusTransform> {
    if rep_a.len() != rep_b.len() || rep_a.is_empty() {
        return None;
    }
    for (ga, gb) in rep_a.iter().zip(rep_b) {
        let ta = ga.trace();
        let tb = gb.trace();
        if (ta - tb).norm().min((ta + tb).norm()) > tol::CONJUGATOR {
            return None;
        }
    }
    let candidates = conjugator_candidates(rep_a, rep_b);
    for cand in candidates {
        let refined = refine_conjugator(rep_a, rep_b, &cand).unwrap_or(cand);
        if verify_conjugator(rep_a, rep_b, &refined) {
            return Some(refined);
        }
    }
    None
}

fn verify_conjugator(
    rep_a: &[MoebiusTransform],
    rep_b: &[MoebiusTransform],
    phi: &MoebiusTransform,
) -> bool {
    let inv = phi.inverse();
    rep_a
        .iter()
        .zip(rep_b)
        .all(|(ga, gb)| (*phi * *ga * inv).dist_up_to_sign(gb) <= tol::CONJUGATOR)
}

/// Matched (point of rep_a, point of rep_b) pairs from the fixed points of
/// corresponding generators, multipliers aligned.
fn matched_fixed_points(
    rep_a: &[MoebiusTransform],
    rep_b: &[MoebiusTransform],
) -> Vec<(SpherePoint, SpherePoint)> {
    let mut pairs = Vec::new();
    for (ga, gb) in rep_a.iter().zip(rep_b) {
        if ga.is_identity(tol::IDENTITY_MATRIX) || gb.is_identity(tol::IDENTITY_MATRIX) {
            continue;
        }
        match (ga.fixed_points(), gb.fixed_points()) {
            (Ok(FixedPoints::Single(p)), Ok(FixedPoints::Single(q))) => pairs.push((p, q)),
            (Ok(FixedPoints::Pair(p1, p2)), Ok(FixedPoints::Pair(q1, q2))) => {
                let da = ga.derivative_at(&p1);
                let keep =
                    (da - gb.derivative_at(&q1)).norm() <= (da - gb.derivative_at(&q2)).norm();
                if keep {
                    pairs.push((p1, q1));
                    pairs.push((p2, q2));
                } else {
                    pairs.push((p1, q2));
                    pairs.push((p2, q1));
                }
            }
            _ => {}
        }
    }
    pairs
}

fn conjugator_candidates(
    rep_a: &[MoebiusTransform],
    rep_b: &[MoebiusTransform],
) -> Vec<MoebiusTransform> {
    let pairs = matched_fixed_points(rep_a, rep_b);
    // pick 3 pairwise-separated source points
    let mut chosen: Vec<(SpherePoint, SpherePoint)> = Vec::new();
    for (p, q) in &pairs {
        if chosen.iter().all(|(cp, _)| cp.chordal(p) > 1e-6) {
            chosen.push((*p, *q));
        }
        if chosen.len() == 3 {
            break;
        }
    }
    if chosen.len() < 3 {
        return Vec::new();
    }
    let src = [&chosen[0].0, &chosen[1].0, &chosen[2].0];
    let tgt = [&chosen[0].1, &chosen[1].1, &chosen[2].1];
    match MoebiusTransform::matching_triples(src, tgt) {
        Ok(m) => vec![m],
        Err(_) => Vec::new(),
    }
}

/// One least-squares sweep: with signs s_i fixed by the candidate, the
/// equations b_i phi - s_i phi a_i = 0 are linear in phi; the best phi is the
/// smallest singular vector of the stacked 4n x 4 system.
fn refine_conjugator(
    rep_a: &[MoebiusTransform],
    rep_b: &[MoebiusTransform],
    candidate: &MoebiusTransform,
) -> Option<MoebiusTransform> {
    use nalgebra::{Complex, DMatrix};
    let inv = candidate.inverse();
    let n = rep_a.len();
    let mut rows = DMatrix::<Complex<f64>>::zeros(4 * n, 4);
    for (i, (ga, gb)) in rep_a.iter().zip(rep_b).enumerate() {
        let conj = *candidate * *ga * inv;
        let sign = if conj.dist_up_to_sign(gb)
            == ((conj.a - gb.a).norm_sqr()
                + (conj.b - gb.b).norm_sqr()
                + (conj.c - gb.c).norm_sqr()
                + (conj.d - gb.d).norm_sqr())
            .sqrt()
        {
            1.0
        } else {
            -1.0
        };
        // vec(phi) = (a, b, c, d); equations of b phi - s phi a = 0
        let (ba, bb, bc, bd) = (gb.a, gb.b, gb.c, gb.d);
        let (aa, ab, ac, ad) = (sign * ga.a, sign * ga.b, sign * ga.c, sign * ga.d);
        let z = Complex::new(0.0, 0.0);
        // row for entry (0,0): ba*pa + bb*pc - (pa*aa + pb*ac)
        let r = 4 * i;
        rows[(r, 0)] = ba - aa;
        rows[(r, 1)] = -ac;
        rows[(r, 2)] = bb;
        rows[(r, 3)] = z;
        // entry (0,1): ba*pb + bb*pd - (pa*ab + pb*ad)
        rows[(r + 1, 0)] = -ab;
        rows[(r + 1, 1)] = ba - ad;
        rows[(r + 1, 2)] = z;
        rows[(r + 1, 3)] = bb;
        // entry (1,0): bc*pa + bd*pc - (pc*aa + pd*ac)
        rows[(r + 2, 0)] = bc;
        rows[(r + 2, 1)] = z;
        rows[(r + 2, 2)] = bd - aa;
        rows[(r + 2, 3)] = -ac;
        // entry (1,1): bc*pb + bd*pd - (pc*ab + pd*ad)
        rows[(r + 3, 0)] = z;
        rows[(r + 3, 1)] = bc;
        rows[(r + 3, 2)] = -ab;
        rows[(r + 3, 3)] = bd - ad;
    }
    let svd = rows.svd(false, true);
    let vt = svd.v_t?;
    let last = vt.nrows() - 1;
    let phi = vt.row(last).conjugate();
    MoebiusTransform::new(phi[0], phi[1], phi[2], phi[3]).ok()
}
