//! Hyperbolic volume of PSL(2,C) representations of cusped 3-manifold
//! groups, computed by straightening ideal triangulations.
//!
//! The pipeline: parse an ideal triangulation, build Thurston's gluing
//! equations (edge consistency plus completeness or Dehn-filling rows),
//! solve them by damped Newton iteration, develop a solution into an
//! explicit representation, and evaluate volumes either from shape moduli
//! directly or by straightening an arbitrary representation through the
//! boundary fixed points of its peripheral subgroups. Rigidity and bound
//! checks (volume upper bound, fixed-point independence, conjugacy
//! certificates) come with the package.
//!
//! ```
//! use repvol::{equations, holonomy, FixedPointPolicy, Triangulation};
//!
//! let t = Triangulation::parse(include_str!("../fixtures/fig8.trig.json")).unwrap();
//! let sys = equations::build_equations(&t).unwrap();
//! let sol = equations::newton_solve(
//!     &sys,
//!     &equations::ShapeVector::regular(t.tet_count),
//!     &equations::NewtonOptions::default(),
//! )
//! .unwrap();
//! let (_domain, rep) = holonomy::develop(&t, &sol.shapes).unwrap();
//! let report = holonomy::straighten_volume(&t, &rep, FixedPointPolicy::attracting()).unwrap();
//! let direct = equations::volume_of_shapes(&sol.shapes).total;
//! assert!((report.total - direct).abs() < 1e-8);
//! assert!((report.total - 2.0298832128).abs() < 1e-9);
//! ```

// tetrahedron, face, and vertex indices are domain names here, and most
// loops index several parallel tables with them
#![allow(clippy::needless_range_loop)]

pub use num_complex;

pub mod cli;
pub mod equations;
pub mod holonomy;
pub mod ideal;
pub mod moebius;
pub mod report;
pub mod tol;
pub mod trig;
pub mod word;

pub use equations::{EquationSystem, ShapeVector};
pub use holonomy::Representation;
pub use ideal::{lobachevsky, tet_volume, v3, ShapeModulus};
pub use moebius::{FixedPointChoice, FixedPointPolicy, MoebiusTransform, SpherePoint};
pub use report::VolumeReport;
pub use trig::Triangulation;
pub use word::Word;
