//! Log-domain special functions for the Gaussian-channel computation.

mod gamma_dist;
mod gamma_fn;
mod incomplete;
mod ncx2;
mod root;

pub use gamma_dist::{
    gamma_log_cdf, gamma_log_pdf, gamma_log_sf, gamma_quantile, gamma_quantile_tail, GammaParams,
};
pub use gamma_fn::{ln_gamma, stirlerr};
pub use incomplete::{ln_gamma_p, ln_gamma_q, Tail};
pub use ncx2::{
    ncx2_log_cdf, ncx2_log_pdf, ncx2_log_sf, ncx2_quantile, ncx2_quantile_tail,
    NoncentralChi2Params, TRUNCATION_REL,
};
pub use root::QUANTILE_MAX_ITER;

pub(crate) use gamma_fn::bd0;
pub(crate) use ncx2::ln_cdf_sf as ncx2_ln_cdf_sf;
