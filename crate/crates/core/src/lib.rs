//! Data-driven topology checks for multi-objective Pareto set samples.
//!
//! Given a finite sample of a problem's Pareto set (decision vectors and,
//! optionally, their objective values), this crate looks for evidence that
//! the problem is *not* simple:
//!
//! * **S1**: the Pareto set should be homeomorphic to a simplex. A
//!   Vietoris-Rips complex built at a diameter chosen from the persistence
//!   diagram must then have the Betti numbers of a point.
//! * **S2**: the objective map should embed the Pareto set. Two distinct
//!   simplices of the Rips complex whose objective-space hulls share an
//!   interior point witness a violation; each pair is decided by a small
//!   strict-feasibility linear program.
//!
//! The modules mirror the pipeline:
//!
//! | module | role |
//! |--------|------|
//! | [`pointset`] | point clouds, CSV I/O, distances, non-dominated filtering |
//! | [`rips`] | explicit Rips complexes and filtrations |
//! | [`persistence`] | persistent homology (column reduction and an implicit cohomology engine) |
//! | [`diagram`] | bottleneck distance, confidence band, diameter estimate |
//! | [`lp`] | dense two-phase simplex for strict feasibility |
//! | [`simplicity`] | S1/S2 tests and the end-to-end [`simplicity::analyze`] |
//! | [`problems`] | MED, Gapped MED, DTLZ5, DTLZ7 and Pareto-set samplers |
//!
//! ```no_run
//! use paretotopo::problems::{sample_pareto, ProblemKind, ProblemSpec};
//! use paretotopo::simplicity::{analyze, AnalysisConfig};
//!
//! let spec = ProblemSpec::new(ProblemKind::Dtlz7);
//! let cloud = sample_pareto(&spec, 300, 7).unwrap();
//! let report = analyze(&cloud, &AnalysisConfig::default()).unwrap();
//! println!("{:?}", report.subsets[0].s1.as_ref().map(|s| s.violated));
//! ```

pub mod binomial;
pub mod diagram;
pub mod error;
pub mod lp;
pub mod matrix;
pub mod persistence;
pub mod pointset;
pub mod problems;
pub mod rips;
pub mod rng;
pub mod simplicity;

pub use diagram::{ConfidenceBand, DiameterEstimate};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use persistence::{PersistenceDiagram, PersistencePair};
pub use pointset::{DistanceMatrix, PointCloud};
pub use rips::{Filtration, Simplex};
pub use simplicity::{analyze, AnalysisConfig, S1Verdict, S2Verdict, SimplicityReport};
