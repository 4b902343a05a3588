//! Symmetric multi-source exchangeability models for binary-response basket trials.
//!
//! A basket trial enrolls several disease subgroups ("baskets") under one
//! protocol. The model averages over every symmetric pattern of which baskets
//! share a response rate, giving posterior exchangeability probabilities
//! between baskets, smoothed response-rate posteriors, and clusters of
//! baskets that behave alike.
//!
//! ```no_run
//! use basket_mem::{cluster_louvain, fit, AnalysisConfig, MemReport, PriorConfig, TrialData};
//!
//! let data = TrialData::unnamed(vec![8, 0, 1, 1, 6, 2], vec![19, 10, 26, 8, 14, 7])?;
//! let prior = PriorConfig::reference(data.baskets());
//! let config = AnalysisConfig::defaults(data.baskets()).with_p0(0.25);
//! let fitted = fit(&data, &prior, &config)?;
//! let clusters = cluster_louvain(fitted.pep())?;
//! println!("{}", MemReport::build(&fitted, &clusters)?.render_text());
//! # Ok::<(), basket_mem::MemError>(())
//! ```

pub mod cli;
pub mod cluster;
pub mod error;
pub mod exact;
pub mod export;
pub mod io;
pub mod mcmc;
pub mod model;
pub mod numerics;
pub mod report;
pub mod summary;

pub use cluster::{cluster_louvain, cluster_map, cluster_pep, cluster_summaries, cluster_with, ClusterAssignment};
pub use error::{MemError, Result};
pub use exact::{fit_exact, ExactPosterior};
pub use mcmc::{fit_mcmc, McmcTrace};
pub use model::{
    Alternative, AnalysisConfig, EssRule, ExchConfig, Method, PriorConfig, TrialData,
};
pub use report::{update_p0, MemReport};
pub use summary::{ess, fit, posterior_probability, sample_posterior, summarize, BasketSummary, MemFit};
