//! Exact recovery of planted bisections in two-community stochastic block
//! models by sketching, a low-rank `(A, mu)` SDP solver with dual
//! certificates, and majority-vote extension.

pub mod certificate;
pub mod encoding;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod lanczos;
pub mod pipeline;
pub mod rng;
pub mod sbm;
pub mod sdp;
pub mod theory;

pub use certificate::{check_certificate, CertificateReport, CertificateTolerances, Verdict};
pub use encoding::{estimate_mu, expected_mu, ObjectiveOperator};
pub use error::{Error, Result};
pub use graph::{Graph, Partition, Side};
pub use pipeline::{sketch_and_solve, vote_extend, GammaChoice, MuChoice, SketchConfig, TieRule};
pub use rng::Seed;
pub use sbm::{sample_sbm, LogScaleParams, SbmParams};
pub use sdp::{solve_sdp, SdpSolution, SolverConfig};
