//! Training and evaluation of knowledge graph embedding models with
//! semantics-aware link prediction metrics.
//!
//! Besides the usual filtered MR, MRR and Hits@K, evaluation reports Sem@K:
//! the share of top-K candidates that respect the relation's domain and range.
//! Three compatibility regimes are supported:
//!
//! - `base`: schema classes (with subclass entailment) against `rdfs:domain`/`rdfs:range`.
//! - `ext`: entities observed as heads/tails of the relation in a reference triple set.
//! - `wup`: Wu-Palmer similarity between the candidate's most specific classes and
//!   the signature classes.
//!
//! The crate is organised bottom-up: [`data`] and [`schema`] hold the graph and its
//! ontology, [`models`] scores and updates embeddings, [`eval`] ranks candidates and
//! aggregates metrics, [`training`] runs the epoch loop and [`cli`] wires everything
//! into run directories.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod models;
pub mod schema;
pub mod training;

pub use data::{Dataset, EntityId, ObservedFactIndex, RelationId, Side, Split, Triple, Vocabulary};
pub use error::{Error, Result};
pub use eval::{MetricsReport, RankedQuery, Regime, SemanticContext};
pub use models::{LossKind, ModelKind, ModelParameters, Norm, OptimizerKind, TrainingConfig};
pub use schema::{ClassHierarchy, ClassId, ExtensionalProfile, Schema};
