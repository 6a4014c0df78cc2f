//! Intrinsic Diophantine approximation on spheres through the light cone.
//!
//! Rational points `p/q ∈ S^n` are integer points `(p, q)` of the cone
//! `x_1^2 + ... + x_{n+1}^2 = x_{n+2}^2`. The crate enumerates them, counts
//! approximations `||α - p/q|| < c/q` with `q < cosh T`, integrates the cone
//! measure over the associated regions and follows lattices along the
//! geodesic flow.
//!
//! Geometry is generic over [`Scalar`] (floats and exact rationals); the
//! aliases below fix the usual choices.

pub mod cone;
pub mod counting;
pub mod dynamics;
pub mod error;
pub mod measure;
pub mod numeric;
pub mod rational_points;
pub mod sampling;
pub mod scalar;
pub mod stats;

use num_rational::BigRational;

pub use cone::{
    bracket, embed_k, eval_q, gram, iwasawa_decompose, make_g_t, make_u_y, ConeVector, Dim, GroupElement,
    IwasawaFactors, Matrix, GROUP_TOL,
};
pub use counting::{
    classify_e, classify_f, count_n, count_rotated_e, direction, in_e, in_f, rotation_to_pole, sandwich_check,
    shrunk_quality, ApproximationProfile, CountReport, DirectionKind, DirectionSet, Inclusion, RotatedCount,
    SandwichConstants, SandwichViolation, Verdict, Window,
};
pub use dynamics::{
    birkhoff_slope, exact_orbit_integral, orbit_chain_check, orbit_csv_row, siegel_transform_at, OrbitChain,
    OrbitConfig, OrbitIntegral, ORBIT_CSV_HEADER,
};
pub use error::{Error, Result};
pub use measure::{
    calibrate_kappa, eta, invariance_test, unit_ball_volume, volume_csv_row, volume_e, volume_e_mc, volume_f,
    volume_f_mc, Calibration, ConeMeasureConfig, InvarianceReport, Method, RegionKind, RegionSpec, VolumeResult,
    VOLUME_CSV_HEADER,
};
pub use rational_points::{
    enumerate_all, enumerate_box, enumerate_in_region, enumerate_near, enumerate_near_axis, is_primitive,
    BoxPoint, LatticeDescriptor, LatticePoint, NearEnumeration, RationalApproximate, MAX_HEIGHT,
};
pub use scalar::{Real, Scalar};
pub use stats::{linear_fit, mean_sd, LinearFit};

/// Group element in double precision.
pub type Group = GroupElement<f64>;
/// Group element in single precision.
pub type Group32 = GroupElement<f32>;
/// Group element with exact rational entries.
pub type ExactGroup = GroupElement<BigRational>;
/// Cone point in double precision.
pub type Cone = ConeVector<f64>;
/// Cone point with exact rational coordinates.
pub type ExactCone = ConeVector<BigRational>;
