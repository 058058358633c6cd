//! Contraction certificates on boxed metric spaces.
//!
//! The crate models four classes of contractive self-maps (Banach,
//! Meir-Keeler, Z-contractions defined by simulation functions, and
//! weakly-type contractions), checks their defining inequalities on sampled
//! pairs, estimates Meir-Keeler moduli by shrinking distance bands, and runs
//! Picard iteration.
//!
//! Everything sampling-based is a statement about the sampled region and
//! the sampled pairs only; "verified" means no violation was found.

pub mod certificates;
pub mod error;
pub mod expr;
pub mod library;
pub mod metric;
pub mod picard;
pub mod sampling;
pub mod verifier;

pub use certificates::{
    BanachCertificate, Certificate, MeirKeelerModulus, SequenceProbe, SequenceRule,
    SimulationFunction, Strictness, Verdict, WeaklyTypeTriple,
};
pub use error::{Error, Result};
pub use expr::Expr;
pub use metric::{Interval, MetricKind, MetricSpace, Point, SelfMap};
pub use picard::{picard_iterate, PicardTrace, StoppingRule};
pub use sampling::Sampler;
pub use verifier::VerificationConfig;
