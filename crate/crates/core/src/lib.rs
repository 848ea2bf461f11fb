//! Evaluation of hierarchical composite systems.
//!
//! A system is a tree of components. Each leaf component has a set of design
//! alternatives (DAs) with estimates on quantitative, ordinal, vector or
//! multiset scales. A composition picks one DA per leaf and is evaluated
//! bottom-up by an integration method; evaluations are then ranked by
//! Pareto layers, ideal/worst labels or TOPSIS-like closeness.

pub mod integrators;
pub mod io;
pub mod multiset;
pub mod poset;
pub mod scales;
pub mod system;
pub mod transforms;

pub use integrators::{
    CompatTable, IntegrationError, IntegrationTable, TableInput, TableIssue, TopsisConfig, TopsisReport, TopsisResult,
};
pub use io::{export_dot, fmt_real, load_model, parse_model, ModelError, ModelFile};
pub use multiset::{median_like, MedianResult, Metric, MultisetError, MultisetEstimate};
pub use poset::{DLabel, PosetError, PosetView};
pub use scales::{
    Criterion, Estimate, EstimateValue, Level, MultisetScale, OrdinalScale, Preference, QualityVector, QuantScale,
    Scale, ScaleError, ScaleSet, VectorScale,
};
pub use system::{
    enumerate_compositions, evaluate, rank, validate_model, Composition, EvalError, Evaluation, Method, Reduction,
    SystemModel, SystemNode, ValidationReport,
};
pub use transforms::{OrdinalMap, ThresholdSpec, TransformError};
