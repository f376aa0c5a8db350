//! Spectral and geometric functionals of discrete measures.

mod curvature;
mod norm;

pub use curvature::{
    curvature_c2, curvature_c2_capped, curvature_csv, menger_curvature, CurvatureEstimate, CurvatureMode, EXACT_CAP,
};
pub use norm::{
    adjoint_apply, dense_matrix, dense_operator_norm, joint_norm_experiment, merge_measures, norm_sweep,
    operator_norm, operator_norm_with, sweep_csv, JointNorms, NormEstimate, NormMethod, PowerOptions, Summation,
    DENSE_CAP,
};
