//! Sequence-space models: weighted disks on coordinate sequences,
//! eventually closed-form sequences, and deciders for Cauchy sequences,
//! completeness and completions.

pub mod closed;
pub mod completion;
pub mod decide;
pub mod metric;
pub mod sequence;
pub mod space;

pub use closed::{ClosedForm, Factor, NullSeq, TailKind};
pub use completion::{completeness_check, extend_map_to_completion, Completion, CompletionElement, CompletenessReport, CoordMap};
pub use decide::{cauchy_check, convergence_check, DecisionReport, Witness};
pub use metric::{metrizability_scalars, strengthened_series_check, MetrizabilityReport, SeriesReport};
pub use sequence::{SequenceModel, Term};
pub use space::{DiskSpec, GaugeKind, ModelSpace, Vector};
