//! Angular losses, spherical projections, evaluation metrics and diffuse
//! relighting for 360-degree surface-normal maps.
//!
//! The crate is organized around [`NormalField`], an equirectangular grid of
//! unit normals with a validity mask. On top of it sit:
//!
//! - [`loss`]: the quaternion angular loss and its analytic gradient, plus
//!   cosine/L2 baselines, a masked smoothness term and the combined
//!   objective, all verifiable by finite differences;
//! - [`projection`]: equirectangular/cubemap resampling with per-face
//!   rotation of normal payloads and the pole mask;
//! - [`metrics`]: angular-error statistics and SVD (Kabsch) alignment;
//! - [`relight`]: 9-coefficient spherical-harmonic irradiance and relighting;
//! - [`landscape`]: loss-landscape grids and convexity reports;
//! - [`fit`]: projected gradient descent that recovers a normal field from a
//!   corrupted initialization, plus the smoothness-weight sweep;
//! - [`io`]: PFM and color-coded PNG storage.

pub mod error;
pub mod field;
pub mod fit;
pub mod geometry;
pub mod io;
pub mod landscape;
pub mod loss;
pub mod metrics;
pub mod projection;
pub mod relight;
pub mod synthetic;

pub use error::{Error, Result};
pub use field::NormalField;
pub use fit::{
    alpha_sweep, fit_normals, AlphaSweepRow, FitConfig, FitTrace, InitMode, DEFAULT_ALPHAS,
};
pub use geometry::{
    angular_difference, angular_difference_grad, normalize, pure_quaternion, quat_multiply,
    transition_quaternion, Quaternion, Rotation3, UnitVec3, Vec3,
};
pub use landscape::{generate_landscape, landscape_convexity_report, ConvexityReport, Landscape};
pub use loss::{
    cosine_loss, finite_difference_check, l2_loss, objective, quaternion_loss, smoothness,
    LossConfig, LossKind, LossReport,
};
pub use metrics::{angular_error_map, summarize, svd_align, ErrorMap, MetricsReport};
pub use projection::{
    cubemap_to_equirect, direction_to_pixel, equirect_to_cubemap, pixel_to_direction, pole_mask,
    CubeFace, CubemapFaces, Payload,
};
pub use relight::{
    irradiance, irradiance_matrix, project_env_to_sh, relight, sh_basis, IrradianceMatrix,
    ShCoefficients, SH_BAND_LABELS,
};
