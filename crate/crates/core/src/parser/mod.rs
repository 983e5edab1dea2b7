mod chart;
mod frame;
mod semantics;
mod train;
mod weights;

pub use chart::{Derivation, LeafKind, Parser, Tree, DEFAULT_BEAM};
pub use frame::{format_number, normalize_signature, signature, FunctionFrame, NodeRef, OptionValue, PortSpec, Value};
pub use semantics::evaluate;
pub use train::{accuracy, read_examples, train, Example, TrainConfig, TrainReport, BUNDLED_EXAMPLES};
pub use weights::{rule_feature, Features, Weights};
