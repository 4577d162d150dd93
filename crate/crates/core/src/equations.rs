//! Thurston's gluing equations and their Newton solver.
//!
//! Rows are integer exponent triples over (log z, log z', log z'') per
//! tetrahedron plus an integer pi-multiple offset. Edge-consistency rows
//! target 2*pi*i, completeness rows target 0, and a Dehn-filling row for
//! slope (p,q) is p*meridian + q*longitude with target 2*pi*i.
//!
//! The equations are periodic modulo 2*pi*i per row. `residual` measures
//! distance to the nearest lift, which certifies solutions of the
//! multiplicative equations. Newton iteration instead freezes one integer
//! lift per row at its starting point (each row's reference value marks the
//! branch the complete structure would take) and then solves the resulting
//! smooth system in log-shape coordinates.

use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

use crate::ideal::{companion, regular_shape, ShapeModulus};
use crate::report::VolumeReport;
use crate::tol;
use crate::trig::{Triangulation, TrigError};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("InvalidShape: {0}")]
    InvalidShape(String),
    #[error("NoConvergence: iteration budget hit after {0} iterations")]
    NoConvergence(usize),
    #[error("DegenerationGuard: iterates approached a degenerate shape in {{0, 1, inf}}")]
    DegenerationGuard,
    #[error("SingularJacobianUnrecoverable: jacobian is singular beyond recovery")]
    SingularJacobianUnrecoverable,
    #[error(transparent)]
    Trig(#[from] TrigError),
}

/// One complex modulus per tetrahedron, entries kept away from {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeVector(Vec<Complex64>);

impl ShapeVector {
    pub fn new(z: Vec<Complex64>) -> Result<ShapeVector, SolveError> {
        for (i, zi) in z.iter().enumerate() {
            if !zi.re.is_finite() || !zi.im.is_finite() {
                return Err(SolveError::InvalidShape(format!("entry {i} is not finite")));
            }
            if zi.norm() < tol::SHAPE_DEGENERACY || (zi - 1.0).norm() < tol::SHAPE_DEGENERACY {
                return Err(SolveError::InvalidShape(format!(
                    "entry {i} = {zi} is within {} of a degenerate shape",
                    tol::SHAPE_DEGENERACY
                )));
            }
        }
        Ok(ShapeVector(z))
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn conjugate(&self) -> ShapeVector {
        ShapeVector(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn max_distance(&self, other: &ShapeVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn regular(n: usize) -> ShapeVector {
        ShapeVector(vec![regular_shape(); n])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowKind {
    Edge,
    Completeness,
    Filling,
}

#[derive(Debug, Clone)]
pub struct EquationRow {
    pub coeffs: Vec<[i64; 3]>,
    pub pi_offset: i64,
    pub kind: RowKind,
    /// right-hand side of the equation
    pub target: Complex64,
    /// value the row takes at the reference (complete-structure) branch;
    /// lift integers are frozen against this
    pub reference: Complex64,
}

impl EquationRow {
    /// Principal-log evaluation minus the pi offset.
    pub fn value(&self, z: &[Complex64]) -> Complex64 {
        let mut s = Complex64::new(0.0, -PI * self.pi_offset as f64);
        for (t, &[a, b, c]) in self.coeffs.iter().enumerate() {
            let zt = z[t];
            let z1 = companion(zt);
            let z2 = companion(z1);
            s += a as f64 * zt.ln() + b as f64 * z1.ln() + c as f64 * z2.ln();
        }
        s
    }

    /// d(value)/d(log z_t)
    fn derivative(&self, z: &[Complex64], t: usize) -> Complex64 {
        let [a, b, c] = self.coeffs[t];
        let zt = z[t];
        a as f64 + b as f64 * zt / (1.0 - zt) + c as f64 / (zt - 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct EquationSystem {
    pub rows: Vec<EquationRow>,
    pub tet_count: usize,
}

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// Builds edge rows plus one row per cusp requirement: two completeness rows
/// for an unfilled cusp, a single filling row for slope (p,q).
pub fn build_equations(t: &Triangulation) -> Result<EquationSystem, TrigError> {
    build_equations_with(t, &t.filling)
}

/// Same, with the per-cusp filling taken from `filling` instead of the file.
pub fn build_equations_with(
    t: &Triangulation,
    filling: &[Option<(i64, i64)>],
) -> Result<EquationSystem, TrigError> {
    let mut sys = edge_equations(t);
    for (c, fill) in filling.iter().enumerate() {
        let rows = t.peripheral_rows[c]
            .as_ref()
            .ok_or(TrigError::MissingPeripheralRows(c))?;
        match fill {
            None => {
                for curve in [&rows.meridian, &rows.longitude] {
                    sys.rows.push(EquationRow {
                        coeffs: curve.rows.clone(),
                        pi_offset: curve.pi_offset,
                        kind: RowKind::Completeness,
                        target: Complex64::new(0.0, 0.0),
                        reference: Complex64::new(0.0, 0.0),
                    });
                }
            }
            Some((p, q)) => {
                if gcd(*p, *q) != 1 {
                    return Err(TrigError::NonCoprimeFilling {
                        cusp: c,
                        p: *p,
                        q: *q,
                    });
                }
                let coeffs = rows
                    .meridian
                    .rows
                    .iter()
                    .zip(&rows.longitude.rows)
                    .map(|(m, l)| {
                        [
                            p * m[0] + q * l[0],
                            p * m[1] + q * l[1],
                            p * m[2] + q * l[2],
                        ]
                    })
                    .collect();
                sys.rows.push(EquationRow {
                    coeffs,
                    pi_offset: p * rows.meridian.pi_offset + q * rows.longitude.pi_offset,
                    kind: RowKind::Filling,
                    target: two_pi_i(),
                    // the complete structure satisfies the unfilled equations,
                    // where this row's value vanishes
                    reference: Complex64::new(0.0, 0.0),
                });
            }
        }
    }
    Ok(sys)
}

/// Edge-consistency rows only (drops completeness and filling).
pub fn edge_equations(t: &Triangulation) -> EquationSystem {
    let rows = t
        .edge_rows()
        .into_iter()
        .map(|coeffs| EquationRow {
            coeffs,
            pi_offset: 0,
            kind: RowKind::Edge,
            target: two_pi_i(),
            reference: two_pi_i(),
        })
        .collect();
    EquationSystem {
        rows,
        tet_count: t.tet_count,
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Max over rows of the distance from the row value to target + 2 pi i k,
/// minimized over the integer k. Solutions of the multiplicative equations
/// have residual 0 regardless of the branch Newton used to find them.
pub fn residual(sys: &EquationSystem, z: &ShapeVector) -> f64 {
    sys.rows
        .iter()
        .map(|row| {
            let d = row.value(z.entries()) - row.target;
            let k = (d.im / (2.0 * PI)).round();
            (d - Complex64::new(0.0, 2.0 * PI * k)).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tolerance: tol::NEWTON_RESIDUAL,
            max_iterations: tol::NEWTON_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub shapes: ShapeVector,
    pub residual: f64,
    pub iterations: usize,
}

fn guard_violated(z: &[Complex64]) -> bool {
    z.iter().any(|zi| {
        !zi.re.is_finite()
            || !zi.im.is_finite()
            || zi.norm() < tol::DEGENERATION_GUARD
            || (zi - 1.0).norm() < tol::DEGENERATION_GUARD
            || zi.norm() > 1.0 / tol::DEGENERATION_GUARD
    })
}

/// Damped least-squares Newton in log-shape coordinates.
///
/// The integer lift of each row is frozen at the starting point by rounding
/// (value - reference)/(2 pi i); iteration then drives the lifted system to
/// zero. Steps are halved until the residual decreases; iterates entering
/// the guard radius around degenerate shapes abort.
pub fn newton_solve(
    sys: &EquationSystem,
    z0: &ShapeVector,
    opts: &NewtonOptions,
) -> Result<NewtonResult, SolveError> {
    if z0.len() != sys.tet_count {
        return Err(SolveError::InvalidShape(format!(
            "expected {} shapes, got {}",
            sys.tet_count,
            z0.len()
        )));
    }
    let m = sys.rows.len();
    let n = sys.tet_count;
    let mut z: Vec<Complex64> = z0.entries().to_vec();
    if guard_violated(&z) {
        return Err(SolveError::DegenerationGuard);
    }
    // per-run lifts
    let lifts: Vec<f64> = sys
        .rows
        .iter()
        .map(|row| ((row.value(&z) - row.reference).im / (2.0 * PI)).round())
        .collect();
    let eval = |z: &[Complex64]| -> Vec<Complex64> {
        sys.rows
            .iter()
            .zip(&lifts)
            .map(|(row, k)| row.value(z) - row.target - Complex64::new(0.0, 2.0 * PI * k))
            .collect()
    };
    let max_abs = |f: &[Complex64]| f.iter().map(|x| x.norm()).fold(0.0, f64::max);

    let mut f = eval(&z);
    let mut r = max_abs(&f);
    for it in 0..opts.max_iterations {
        if r <= opts.tolerance {
            return Ok(NewtonResult {
                shapes: ShapeVector::new(z)?,
                residual: r,
                iterations: it,
            });
        }
        let jac = DMatrix::<Complex<f64>>::from_fn(m, n, |i, j| sys.rows[i].derivative(&z, j));
        let rhs = DVector::<Complex<f64>>::from_fn(m, |i, _| -f[i]);
        let svd = jac.svd(true, true);
        let sv_max = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
        if sv_max <= 0.0 || !sv_max.is_finite() {
            return Err(SolveError::SingularJacobianUnrecoverable);
        }
        let step = svd
            .solve(&rhs, 1e-12 * sv_max)
            .map_err(|_| SolveError::SingularJacobianUnrecoverable)?;
        if step.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(SolveError::SingularJacobianUnrecoverable);
        }
        // damped update in w = log z
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..tol::NEWTON_MAX_HALVINGS {
            let znew: Vec<Complex64> = z
                .iter()
                .enumerate()
                .map(|(t, zt)| zt * (lambda * step[t]).exp())
                .collect();
            if !guard_violated(&znew) {
                let fnew = eval(&znew);
                let rnew = max_abs(&fnew);
                if rnew < r {
                    z = znew;
                    f = fnew;
                    r = rnew;
                    accepted = true;
                    break;
                }
            }
            lambda /= 2.0;
        }
        if !accepted {
            if guard_violated(&z) {
                return Err(SolveError::DegenerationGuard);
            }
            return Err(SolveError::NoConvergence(it + 1));
        }
    }
    if r <= opts.tolerance {
        return Ok(NewtonResult {
            shapes: ShapeVector::new(z)?,
            residual: r,
            iterations: opts.max_iterations,
        });
    }
    Err(SolveError::NoConvergence(opts.max_iterations))
}

/// Volume report of a shape vector: per-tetrahedron moduli and signed
/// volumes, flat/degenerate flags, total, and the v3 bound check.
pub fn volume_of_shapes(z: &ShapeVector) -> VolumeReport {
    VolumeReport::from_moduli(
        z.entries()
            .iter()
            .map(|&zi| ShapeModulus::Value(zi))
            .collect(),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSolution {
    pub shapes: Vec<[f64; 2]>,
    pub residual: f64,
    pub volume: f64,
    pub flags: Vec<String>,
}

/// Multi-start scan report. Solutions are deduplicated and sorted by
/// descending volume (ties broken lexicographically on the shapes).
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub solutions: Vec<ScanSolution>,
    pub max_volume_index: Option<usize>,
    pub all_zero_volume: bool,
    #[serde(skip)]
    pub shape_vectors: Vec<ShapeVector>,
}

/// Newton from the regular point and then seeded pseudo-random starts,
/// uniform in the disk of radius 2 around exp(i pi/3) with the imaginary
/// part pushed off the real axis. Failures are dropped; distinct solutions
/// are reported with their certificates.
pub fn solve_all(
    sys: &EquationSystem,
    restarts: usize,
    seed: u64,
    opts: &NewtonOptions,
) -> ScanReport {
    let n = sys.tet_count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<ShapeVector> = Vec::with_capacity(restarts);
    starts.push(ShapeVector::regular(n));
    let center = regular_shape();
    while starts.len() < restarts {
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let mut z;
            let mut attempts = 0;
            loop {
                let radius = 2.0 * rng.random::<f64>().sqrt();
                let angle = 2.0 * PI * rng.random::<f64>();
                z = center + Complex64::from_polar(radius, angle);
                attempts += 1;
                if z.im.abs() > 1e-3 || attempts > 100 {
                    break;
                }
            }
            entries.push(z);
        }
        match ShapeVector::new(entries) {
            Ok(sv) => starts.push(sv),
            Err(_) => continue,
        }
    }

    let mut found: Vec<(ShapeVector, f64)> = Vec::new();
    for start in &starts {
        let Ok(result) = newton_solve(sys, start, opts) else {
            continue;
        };
        // independent certificate before accepting
        let cert = residual(sys, &result.shapes);
        if cert > 10.0 * opts.tolerance {
            continue;
        }
        if found
            .iter()
            .all(|(s, _)| s.max_distance(&result.shapes) > tol::SOLUTION_DEDUP)
        {
            found.push((result.shapes, cert));
        }
    }

    let mut enriched: Vec<(ShapeVector, f64, VolumeReport)> = found
        .into_iter()
        .map(|(s, cert)| {
            let report = volume_of_shapes(&s);
            (s, cert, report)
        })
        .collect();
    enriched.sort_by(|a, b| {
        b.2.total
            .partial_cmp(&a.2.total)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                let (za, zb) = (a.0.entries(), b.0.entries());
                for (x, y) in za.iter().zip(zb) {
                    let c =
                        x.re.partial_cmp(&y.re)
                            .unwrap_or(std::cmp::Ordering::Equal)
                            .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal));
                    if c != std::cmp::Ordering::Equal {
                        return c;
                    }
                }
                std::cmp::Ordering::Equal
            })
    });

    let all_zero = !enriched.is_empty()
        && enriched
            .iter()
            .all(|(_, _, rep)| rep.total.abs() <= tol::ZERO_VOLUME);
    let solutions: Vec<ScanSolution> = enriched
        .iter()
        .map(|(s, cert, rep)| {
            let mut flags = Vec::new();
            if rep.per_tet.iter().any(|p| !p.flags.is_empty()) {
                flags.push("has-flat-or-degenerate-tet".to_string());
            }
            ScanSolution {
                shapes: s.entries().iter().map(|z| [z.re, z.im]).collect(),
                residual: *cert,
                volume: rep.total,
                flags,
            }
        })
        .collect();
    let max_volume_index = if solutions.is_empty() { None } else { Some(0) };
    ScanReport {
        solutions,
        max_volume_index,
        all_zero_volume: all_zero,
        shape_vectors: enriched.into_iter().map(|(s, _, _)| s).collect(),
    }
}
