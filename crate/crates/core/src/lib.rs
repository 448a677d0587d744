//! Simple vacuum Maxwell fields as pullbacks of the sphere's area form:
//! exterior algebra, the Hopf map tower, observer splits, field lines, leaves
//! and helicities.

// Tensor kernels index several arrays with one loop variable; iterator rewrites obscure them.
#![allow(clippy::needless_range_loop)]
// `!(x > y)` rejects NaN alongside the intended comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod calculus;
pub mod dual;
pub mod error;
pub mod forms;
pub mod helicity;
pub mod lines;
pub mod maps;
pub mod observer;
pub mod ode;
pub mod quadrature;
pub mod solutions;

pub use calculus::{exterior_derivative, homotopy_potential, maxwell_residual, DiffMethod, FormField, ResidualReport};
pub use error::{Error, Result};
pub use forms::{
    hodge_dual, invariants, is_simple, kernel_2form, wedge_21, wedge_22, Covector, Event, FourVector, InvariantPair,
    ThreeForm, TwoForm,
};
pub use helicity::{
    compute_helicities, conservation_check, cs_density, HelicityOptions, HelicityReport, PotentialSource,
};
pub use lines::{
    gauss_linking, trace_leaf, trace_line, FieldKind, FieldLine, LeafKind, LeafMesh, Termination, TraceParams,
};
pub use maps::{HopfIndex, HopfScalar, JetValue, S3Point, StereoPoint};
pub use observer::{classify, poynting, split, EBPair, FieldClass, Observer};
pub use solutions::{
    duality_residual, from_scalar_pair, make_coulomb, make_hopf_ranada, make_plane_wave, FieldSolution,
};
