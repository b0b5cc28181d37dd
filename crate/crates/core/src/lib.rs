//! Direct construction and verification of Z-complementary code sets built
//! from pseudo-Boolean functions.
//!
//! Sequences are stored as exponents of a primitive `σ`-th root of unity.
//! Verification runs either exactly over the cyclotomic integers or in
//! double precision.

pub mod exactnum;
pub mod gbf;
pub mod pbf;
pub mod pmepr;
pub mod seqgen;
pub mod verify;

pub use gbf::Gbf;
pub use pbf::{ConstructionParams, HFunction, ParamSpec, Pbf};
pub use seqgen::{generate_ccc, generate_zccs, CodeMatrix, CodeSet, PhaseSequence};
pub use verify::{check_ccc, check_zccs, measure_zcz, CheckOptions, Engine};
