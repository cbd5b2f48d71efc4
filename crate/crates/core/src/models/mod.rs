//! Named model families and worked examples: tridiagonal chains with their
//! classical product-form machinery, chains derived from birth-death
//! processes, the repair shop, column-proportional chains, explicit
//! counterexamples, and the continuous-time mapping.

pub mod bdp;
pub mod col0;
pub mod counterexample;
pub mod ctmc;
pub mod repair_shop;
pub mod tridiagonal;

pub use bdp::{bdp_derive, BdpDerived};
pub use col0::{col0_family, Col0Outcome};
pub use counterexample::{
    multi_invariant_measure, multi_right_eigenvector, no_invariant_measure,
};
pub use ctmc::{ctmc_to_jump, GeneratorSpec, MeasureMap};
pub use repair_shop::{repair_shop, ArrivalPmf, RepairShopReport};
pub use tridiagonal::{km_analysis, km_continued_fraction, KmReport, TridiagonalSpec};
