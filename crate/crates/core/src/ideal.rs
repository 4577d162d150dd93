//! Cross-ratio moduli, the Lobachevsky function, and signed volumes of ideal
//! tetrahedra.
//!
//! A non-degenerate ideal tetrahedron is classified up to orientation-
//! preserving isometry by a modulus z in C \ {0, 1}; its edge companions are
//! z' = 1/(1-z) and z'' = (z-1)/z. Degenerate tetrahedra (coincident
//! vertices) carry a tag in {0, 1, inf} instead and contribute volume 0, as
//! do flat (real-modulus) ones.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::moebius::{MoebiusTransform, SpherePoint};
use crate::tol;

/// 1/(1 - z): cycles z -> z' -> z'' -> z.
pub fn companion(z: Complex64) -> Complex64 {
    1.0 / (1.0 - z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegeneracyTag {
    Zero,
    One,
    Infinity,
}

impl DegeneracyTag {
    fn rotate(self) -> DegeneracyTag {
        // sigma maps 0 -> 1 -> inf -> 0
        match self {
            DegeneracyTag::Zero => DegeneracyTag::One,
            DegeneracyTag::One => DegeneracyTag::Infinity,
            DegeneracyTag::Infinity => DegeneracyTag::Zero,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DegeneracyTag::Zero => "0",
            DegeneracyTag::One => "1",
            DegeneracyTag::Infinity => "inf",
        }
    }
}

/// Modulus of an ideal tetrahedron: a complex number away from {0, 1}, or a
/// degeneracy tag recording which vertices coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeModulus {
    Value(Complex64),
    Degenerate(DegeneracyTag),
}

impl ShapeModulus {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, ShapeModulus::Degenerate(_))
    }

    /// Flat: real modulus (within tolerance) outside {0, 1}.
    pub fn is_flat(&self) -> bool {
        match self {
            ShapeModulus::Value(z) => z.im.abs() <= tol::FLAT_IMAG,
            ShapeModulus::Degenerate(_) => false,
        }
    }

    /// Applies sigma: z -> 1/(1-z), extended to tags.
    pub fn rotate(&self) -> ShapeModulus {
        match self {
            ShapeModulus::Value(z) => {
                if (1.0 - z).norm() <= tol::SHAPE_DEGENERACY {
                    ShapeModulus::Degenerate(DegeneracyTag::Infinity)
                } else {
                    ShapeModulus::Value(companion(*z))
                }
            }
            ShapeModulus::Degenerate(t) => ShapeModulus::Degenerate(t.rotate()),
        }
    }

    pub fn value(&self) -> Option<Complex64> {
        match self {
            ShapeModulus::Value(z) => Some(*z),
            ShapeModulus::Degenerate(_) => None,
        }
    }
}

// even zeta values via (n + 1/2) zeta(2n) = sum_{k=1}^{n-1} zeta(2k) zeta(2n-2k)
const ZETA_TERMS: usize = 40;

fn zeta_even() -> &'static [f64; ZETA_TERMS] {
    static TABLE: OnceLock<[f64; ZETA_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut z = [0.0; ZETA_TERMS];
        z[1] = PI * PI / 6.0;
        for n in 2..ZETA_TERMS {
            let mut s = 0.0;
            for k in 1..n {
                s += z[k] * z[n - k];
            }
            z[n] = s / (n as f64 + 0.5);
        }
        z
    })
}

/// Lobachevsky function: odd, pi-periodic, equal to -int_0^theta log|2 sin t| dt.
///
/// Evaluated through the Fourier series accelerated by splitting off the
/// logarithmic singularity: with x = 2 theta reduced so |x| <= pi,
///
///   2 L(theta) = x (1 - log|x|) + x sum_{m>=1} zeta(2m)/(m(2m+1)) (x/2pi)^{2m}.
///
/// The term ratio is at most 1/4, so the direct tail bound
/// zeta(2) sum_{m>N} 4^{-m} picks the truncation order for the target in
/// `tol::LOBACHEVSKY_SERIES`.
pub fn lobachevsky(theta: f64) -> f64 {
    debug_assert!(theta.is_finite());
    let mut t = theta % PI;
    if t > PI / 2.0 {
        t -= PI;
    } else if t <= -PI / 2.0 {
        t += PI;
    }
    if t == 0.0 {
        return 0.0;
    }
    let x = 2.0 * t;
    let zeta = zeta_even();
    let mut sum = 1.0 - x.abs().ln();
    let ratio = (x / (2.0 * PI)) * (x / (2.0 * PI));
    let mut p = 1.0;
    for (m, &z2m) in zeta.iter().enumerate().skip(1) {
        p *= ratio;
        let term = z2m / (m as f64 * (2 * m + 1) as f64) * p;
        sum += term;
        if z2m * p / (1.0 - ratio) < tol::LOBACHEVSKY_SERIES {
            break;
        }
    }
    0.5 * x * sum
}

/// Volume of the regular ideal tetrahedron, the per-tetrahedron maximum.
pub fn v3() -> f64 {
    3.0 * lobachevsky(PI / 3.0)
}

/// Modulus of the regular positively-oriented tetrahedron, exp(i pi/3).
pub fn regular_shape() -> Complex64 {
    Complex64::new(0.5, 0.75f64.sqrt())
}

/// Cross ratio ((v3-v0)(v1-v2)) / ((v3-v2)(v1-v0)), evaluated projectively;
/// the image of v3 under the transform sending (v0,v1,v2) to (0,1,inf).
/// Coincident input points yield the matching degeneracy tag.
pub fn cross_ratio(
    v0: &SpherePoint,
    v1: &SpherePoint,
    v2: &SpherePoint,
    v3: &SpherePoint,
) -> ShapeModulus {
    let tol = tol::COINCIDENT_VERTEX;
    // tag by coincidence pattern
    if v3.approx_eq(v0, tol) || v1.approx_eq(v2, tol) {
        return ShapeModulus::Degenerate(DegeneracyTag::Zero);
    }
    if v3.approx_eq(v1, tol) || v0.approx_eq(v2, tol) {
        return ShapeModulus::Degenerate(DegeneracyTag::One);
    }
    if v3.approx_eq(v2, tol) || v0.approx_eq(v1, tol) {
        return ShapeModulus::Degenerate(DegeneracyTag::Infinity);
    }
    let m = match MoebiusTransform::to_standard_triple(v0, v1, v2) {
        Ok(m) => m,
        Err(_) => return ShapeModulus::Degenerate(DegeneracyTag::Zero),
    };
    match m.apply(v3).to_complex() {
        Some(z) => {
            if z.norm() <= tol || (z - 1.0).norm() <= tol {
                // nearly coincident beyond the chordal test's resolution
                ShapeModulus::Degenerate(if z.norm() <= tol {
                    DegeneracyTag::Zero
                } else {
                    DegeneracyTag::One
                })
            } else {
                ShapeModulus::Value(z)
            }
        }
        None => ShapeModulus::Degenerate(DegeneracyTag::Infinity),
    }
}

/// Modulus of the ideal tetrahedron spanned by four ordered vertex images,
/// aligned with the edge-slot convention: the returned z is the parameter of
/// the {01, 23} edge pair. With the cross-ratio convention above this is
/// sigma^2 of cr(p0, p1, p2, p3).
pub fn tet_modulus_of_points(
    p0: &SpherePoint,
    p1: &SpherePoint,
    p2: &SpherePoint,
    p3: &SpherePoint,
) -> ShapeModulus {
    cross_ratio(p0, p1, p2, p3).rotate().rotate()
}

/// Signed volume of the ideal tetrahedron with modulus `m`.
///
/// Degenerate and flat moduli give 0. Otherwise the sum of Lobachevsky values
/// at the three dihedral angles; the sign of the result matches sign(Im z).
pub fn tet_volume(m: &ShapeModulus) -> f64 {
    let z = match m {
        ShapeModulus::Degenerate(_) => return 0.0,
        ShapeModulus::Value(z) => *z,
    };
    if z.im.abs() <= tol::FLAT_IMAG {
        return 0.0;
    }
    let z1 = companion(z);
    let z2 = companion(z1);
    lobachevsky(z.arg()) + lobachevsky(z1.arg()) + lobachevsky(z2.arg())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_table_matches_closed_forms() {
        let z = zeta_even();
        assert!((z[1] - PI.powi(2) / 6.0).abs() < 1e-15);
        assert!((z[2] - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((z[3] - PI.powi(6) / 945.0).abs() < 1e-13);
    }

    #[test]
    fn lobachevsky_special_values() {
        assert_eq!(lobachevsky(0.0), 0.0);
        assert!(lobachevsky(PI / 2.0).abs() < 1e-15);
        // frozen from the quadrature oracle in the acceptance suite
        assert!((lobachevsky(PI / 3.0) - 0.338313868803218).abs() < 1e-13);
        assert!((v3() - 1.014941606409654).abs() < 1e-13);
    }

    #[test]
    fn lobachevsky_odd_and_periodic() {
        for k in 1..40 {
            let t = 0.11 * k as f64;
            assert!((lobachevsky(-t) + lobachevsky(t)).abs() < 1e-12);
            assert!((lobachevsky(t + PI) - lobachevsky(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_ratio_normalization() {
        let z = Complex64::new(0.5, 0.75f64.sqrt());
        let m = cross_ratio(
            &SpherePoint::from_complex(Complex64::new(0.0, 0.0)),
            &SpherePoint::from_complex(Complex64::new(1.0, 0.0)),
            &SpherePoint::infinity(),
            &SpherePoint::from_complex(z),
        );
        assert!((m.value().unwrap() - z).norm() < 1e-14);
        // flat: real modulus 2
        let f = cross_ratio(
            &SpherePoint::from_complex(Complex64::new(0.0, 0.0)),
            &SpherePoint::from_complex(Complex64::new(1.0, 0.0)),
            &SpherePoint::infinity(),
            &SpherePoint::from_complex(Complex64::new(2.0, 0.0)),
        );
        assert!(f.is_flat());
        assert!((f.value().unwrap().re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cross_ratio_coincident_tag() {
        let zero = SpherePoint::from_complex(Complex64::new(0.0, 0.0));
        let one = SpherePoint::from_complex(Complex64::new(1.0, 0.0));
        let inf = SpherePoint::infinity();
        let m = cross_ratio(&zero, &zero, &one, &inf);
        assert_eq!(m, ShapeModulus::Degenerate(DegeneracyTag::Infinity));
        assert_eq!(tet_volume(&m), 0.0);
    }

    #[test]
    fn tet_volume_values() {
        let reg = ShapeModulus::Value(regular_shape());
        assert!((tet_volume(&reg) - 1.014941606409654).abs() < 1e-12);
        let flat = ShapeModulus::Value(Complex64::new(2.0, 0.0));
        assert_eq!(tet_volume(&flat), 0.0);
        // modulus i: 2 L(pi/4), the ideal tetrahedron over a square
        let sq = ShapeModulus::Value(Complex64::new(0.0, 1.0));
        assert!((tet_volume(&sq) - 0.915965594177219).abs() < 1e-12);
    }

    #[test]
    fn companion_identities() {
        for (re, im) in [(0.5, 0.866), (0.3, 1.7), (-0.8, 0.2)] {
            let z = Complex64::new(re, im);
            let z1 = companion(z);
            let z2 = companion(z1);
            assert!((z * z1 * z2 + 1.0).norm() < 1e-12);
            if im > 0.0 {
                let logs = z.ln() + z1.ln() + z2.ln();
                assert!((logs - Complex64::new(0.0, PI)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn mirror_antisymmetry() {
        for (re, im) in [(0.3, 0.8), (0.5, 0.866), (-1.2, 0.4), (2.0, 2.5)] {
            let z = Complex64::new(re, im);
            let v = tet_volume(&ShapeModulus::Value(z));
            let w = tet_volume(&ShapeModulus::Value(z.conj()));
            assert!((v + w).abs() < 1e-12);
        }
    }
}
