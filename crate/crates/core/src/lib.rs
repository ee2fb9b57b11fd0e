//! D-vine copula based quantile regression.
//!
//! The response and covariates are mapped to the unit scale with kernel
//! smoothed marginal distribution functions, a D-vine with the response as
//! its first node is grown by forward covariate selection, and conditional
//! quantiles are read off analytically through nested inverse h-functions.
//!
//! Module map:
//! - [`bicop`]: parametric pair copulas (densities, h-functions, fitting).
//! - [`margins`]: kernel CDF estimation and probability integral transforms.
//! - [`dvine`]: the regression vine, covariate selection and prediction.
//! - [`oracles`]: closed-form conditional quantiles and exact samplers.
//! - [`simbench`]: simulation scenarios, MISE studies, linear quantile
//!   regression and tick-loss backtests.
//! - [`cli`]: the `dvqr` command-line front end.

pub mod bicop;
pub mod cli;
pub mod data;
pub mod dvine;
pub mod error;
pub mod margins;
pub mod numeric;
pub mod oracles;
pub mod simbench;
pub mod special;

pub use bicop::{BiCop, Conditioning, Family, FitCriterion, Rotation};
pub use dvine::{fit_dvine_regression, fit_quantreg, DVineRegression, QuantRegModel};
pub use error::{Error, Result};
pub use margins::{KernelMargin, PseudoData};
