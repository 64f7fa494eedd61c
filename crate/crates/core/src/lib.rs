//! Exact error probability of random codes under minimum-distance decoding.
//!
//! For a codebook of `M` codewords drawn independently from a fixed input
//! distribution, the error probability averaged over the ensemble has a closed
//! form in terms of two per-competitor quantities: the chance `w` that a
//! competitor sits at exactly the transmitted codeword's distance from the
//! channel output, and the chance `z` that it sits strictly farther. This
//! crate evaluates that closed form in the log domain, so `M` may be `2^150`
//! or larger and error probabilities far below `1e-300` stay representable.
//!
//! * [`kernel`]: the channel-independent correct-decision probability.
//! * [`bounds`]: binary symmetric, binary erasure and Gaussian channels.
//! * [`baselines`]: union, dependence-testing and converse bounds for the
//!   erasure channel.
//! * [`ratesearch`]: the largest rate meeting an error target.
//! * [`oracle`]: direct sums and codebook simulation used to check all of the
//!   above.
//! * [`logdomain`], [`special`], [`quadrature`]: the numerical groundwork.
//!
//! ```
//! use rcbound::bounds::bec_rc;
//! use rcbound::kernel::EnsembleSize;
//!
//! // Two codewords of length 2 over an erasure channel that erases half the bits.
//! let r = bec_rc(0.5, 2, EnsembleSize::from_count(2).unwrap()).unwrap();
//! assert!((r.epsilon() - 0.28125).abs() < 1e-15);
//!
//! // 2^150 codewords of length 500: ε is tiny but still carries full precision.
//! let r = bec_rc(0.5, 500, EnsembleSize::new(150.0).unwrap()).unwrap();
//! assert!(r.log_epsilon.ln() < -40.0);
//! ```

pub mod baselines;
pub mod bounds;
pub mod error;
pub mod kernel;
pub mod logdomain;
pub mod oracle;
pub mod quadrature;
pub mod ratesearch;
pub mod special;

pub use error::{Error, Result};
pub use logdomain::LogReal;

// Compiles and runs every Rust snippet in the guide.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/log-domain.md")]
    mod log_domain {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/rate-search.md")]
    mod rate_search {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
