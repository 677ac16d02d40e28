//! Exact finite-scale tools for density arguments: asymptotic density of sets
//! of positive integers, d-limit verdicts, finite measures and set algebras,
//! a common-point selector for families of large sets, and witness pipelines
//! that translate between positive functionals and witness point sequences.
//!
//! All arithmetic is exact ([`Rational`]). Results that stand in for
//! asymptotic statements are certificates at an explicit horizon.

// Errors carry the exact rationals involved; boxing them buys nothing here.
#![allow(clippy::result_large_err)]

pub mod bergelson;
pub mod density;
pub mod instance;
pub mod measure;
pub mod rational;
pub mod witness;

pub use bergelson::{
    admitted_checkpoints, averaging_identity_check, averaging_profile, density_ratio_certificate,
    fip_oracle, select_common_point, verify_selection, SelectionError, SelectionResult, SetFamily,
};
pub use density::{
    d_lim_verdict, default_checkpoints, upper_density, DensityError, DensityEstimate, IndexSet,
    RealSequence, TailRule,
};
pub use instance::{generate_instance, parse_instance, GenerateProfile, InstanceBundle, InstanceError};
pub use measure::{inner_outer, FiniteAlgebra, FiniteMeasureSpace, Functional, MSet, MeasureError};
pub use rational::{q, Rational};
pub use witness::{
    backward_pipeline, build_level_sets, forward_functional, weak_d_convergence_check,
    BackwardCertificate, BoundedFamily, ForwardCertificate, WitnessError, WitnessParams,
};
