//! Graph families (binary trees, diamond and Laakso graphs), their exact
//! metrics, finite-dimensional normed spaces and operators, explicit
//! embeddings, and the analyses that decide how well the graphs factor
//! through an operator.

pub mod analysis;
pub mod bitgraphs;
pub mod bitstring;
pub mod embeddings;
pub mod error;
pub mod io;
pub mod metrics;
pub mod spaces;

pub use bitgraphs::{Family, MetricGraph};
pub use bitstring::BitString;
pub use embeddings::Embedding;
pub use error::{Error, Result};
pub use spaces::{NormedOperator, NormedSpace, SearchBudget};
