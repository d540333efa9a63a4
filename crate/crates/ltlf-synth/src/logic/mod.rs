//! LTLf/QLTLf syntax, parsing, finite-trace semantics, and the
//! projection/expansion machinery for unreliable variables.

mod formula;
pub mod parser;
mod partition;
pub mod quant;
pub mod trace;

pub use formula::Formula;
pub use parser::{parse_ltlf, parse_ltlf_file};
pub use partition::{parse_partition, Partition};
pub use quant::{eval_qltlf, to_pnf, QFormula, Qltlf, Quantifier};
pub use trace::{
    all_traces, eval_trace, expand_unreliable, expand_unreliable_mask, Evaluator, Letter, Props,
    Trace,
};
