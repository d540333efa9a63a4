//! Reactive synthesis for LTLf goals with a guaranteed backup goal under
//! unreliable inputs.
//!
//! Given a main goal, a backup goal, and a set of input variables whose
//! readings may be wrong, the engine decides whether the agent has a strategy
//! that satisfies the main goal for the inputs as read while the backup goal
//! holds no matter how the unreliable readings are rewritten. Realizability
//! is decided (and a strategy extracted) through three interchangeable
//! pipelines that cross-check each other:
//!
//! * **direct** — abstract-and-complement automata manipulation,
//! * **belief** — a belief-state construction over the backup automaton,
//! * **qltlf** — a reduction to second-order quantified LTLf, which also
//!   powers the MSO export.
//!
//! The `book/` directory of the repository walks through the concepts; every
//! code snippet there compiles against this crate.
//!
//! ```
//! use ltlf_synth::logic::{parse_ltlf, parse_partition};
//! use ltlf_synth::synth::{synth, Mode, SynthInstance};
//! use ltlf_synth::error::Limits;
//!
//! let partition = parse_partition(".inputs: req\n.outputs: grant").unwrap();
//! let main = parse_ltlf("G (req -> X grant)").unwrap();
//! let backup = parse_ltlf("true").unwrap();
//! let inst = SynthInstance::new(main, backup, partition).unwrap();
//! let report = synth(&inst, Mode::Direct, &Limits::default(), None).unwrap();
//! assert!(report.realizable);
//! ```

pub mod automata;
pub mod bench;
pub mod cli;
pub mod compile;
pub mod error;
pub mod game;
pub mod logic;
pub mod mso;
pub mod qltlf;
pub mod synth;
pub mod verify;
