//! Exact construction of the logarithmic solutions of A-hypergeometric
//! systems with parameter zero, and mechanical checks of the integrality of
//! their exponentials.
//!
//! The pieces, bottom up:
//!
//! * [`config`]: configurations `A`, the relation lattice `L` and its orthant
//!   pieces `L_k`;
//! * [`seriesring`]: truncated cone-supported Laurent series with log terms;
//! * [`solutions`]: the series `G_k`, the solutions `log lambda^l + sum l_k G_k`
//!   and the Euler / box operator checks;
//! * [`congruence`]: multinomial divisibility statements;
//! * [`integrality`]: the Frobenius criterion and integrality of `exp G_k`
//!   and of mirror maps;
//! * [`geometry`]: pointedness certificates for the cone spanned by the `L_k`.

pub mod arith;
pub mod config;
pub mod congruence;
pub mod corpus;
pub mod error;
pub mod geometry;
pub mod integrality;
pub mod linalg;
pub mod report;
pub mod seriesring;
pub mod simplex;
pub mod solutions;

pub use config::{AConfiguration, ConfigFile, OrthantRelationSet, Relation, SearchLimits};
pub use error::{Error, Result};
pub use report::{Report, Verdict, Witness};
pub use seriesring::{ConeSeries, LogSeries};
pub use solutions::GkSeries;
