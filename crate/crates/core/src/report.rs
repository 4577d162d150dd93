//! Volume reports and their JSON forms.

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::ideal::{self, ShapeModulus};
use crate::tol;

/// Per-tetrahedron entry of a volume report.
#[derive(Debug, Clone, Serialize)]
pub struct PerTetReport {
    #[serde(serialize_with = "serialize_modulus")]
    pub modulus: ShapeModulus,
    pub volume: f64,
    pub flags: Vec<String>,
}

/// Moduli, per-tetrahedron signed volumes, total, and the per-tetrahedron
/// bound check |total| <= tet_count * v3.
#[derive(Debug, Clone, Serialize)]
pub struct VolumeReport {
    pub total: f64,
    pub per_tet: Vec<PerTetReport>,
    pub bound_v3n: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relator_residual: Option<f64>,
}

impl VolumeReport {
    /// Builds a report from per-tetrahedron moduli.
    pub fn from_moduli(moduli: Vec<ShapeModulus>) -> VolumeReport {
        let per_tet: Vec<PerTetReport> = moduli
            .into_iter()
            .map(|m| {
                let volume = ideal::tet_volume(&m);
                let mut flags = Vec::new();
                if m.is_degenerate() {
                    flags.push("degenerate".to_string());
                } else if m.is_flat() {
                    flags.push("flat".to_string());
                }
                PerTetReport {
                    modulus: m,
                    volume,
                    flags,
                }
            })
            .collect();
        let total: f64 = per_tet.iter().map(|p| p.volume).sum();
        let bound = per_tet.len() as f64 * ideal::v3() + tol::VOLUME_BOUND_SLACK;
        VolumeReport {
            total,
            per_tet,
            bound_v3n: total.abs() <= bound,
            policy: None,
            relator_residual: None,
        }
    }

    pub fn moduli(&self) -> Vec<ShapeModulus> {
        self.per_tet.iter().map(|p| p.modulus).collect()
    }
}

fn serialize_modulus<S: Serializer>(m: &ShapeModulus, s: S) -> Result<S::Ok, S::Error> {
    match m {
        ShapeModulus::Value(z) => {
            let mut seq = s.serialize_seq(Some(2))?;
            seq.serialize_element(&z.re)?;
            seq.serialize_element(&z.im)?;
            seq.end()
        }
        ShapeModulus::Degenerate(tag) => s.serialize_str(&format!("degenerate:{}", tag.label())),
    }
}

/// Shape vectors on disk: `{"shapes": [[re, im], ...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ShapesFile {
    pub shapes: Vec<[f64; 2]>,
}

impl ShapesFile {
    pub fn to_complex(&self) -> Vec<Complex64> {
        self.shapes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect()
    }

    pub fn from_complex(zs: &[Complex64]) -> ShapesFile {
        ShapesFile {
            shapes: zs.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::DegeneracyTag;

    #[test]
    fn degenerate_modulus_serialization() {
        let report = VolumeReport::from_moduli(vec![
            ShapeModulus::Degenerate(DegeneracyTag::Infinity),
            ShapeModulus::Value(Complex64::new(2.0, 0.0)),
        ]);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("degenerate:inf"));
        assert!(json.contains("\"flags\":[\"flat\"]"));
        assert_eq!(report.total, 0.0);
        assert!(report.bound_v3n);
    }
}
