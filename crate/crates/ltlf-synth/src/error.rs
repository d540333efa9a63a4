//! Error and resource-limit types shared across the crate.

use std::fmt;
use std::time::Instant;

use thiserror::Error;

/// Pipeline stage names, used to attribute resource errors to the step that
/// ran out of budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    DfaMain,
    DfaBackup,
    Abstraction,
    Determinize,
    Belief,
    Product,
    Qltlf,
    Game,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::DfaMain => "dfa-main",
            Stage::DfaBackup => "dfa-backup",
            Stage::Abstraction => "abstraction",
            Stage::Determinize => "determinize",
            Stage::Belief => "belief",
            Stage::Product => "product",
            Stage::Qltlf => "qltlf",
            Stage::Game => "game",
            Stage::Verify => "verify",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },

    #[error("partition error: {0}")]
    Partition(String),

    #[error("unknown proposition `{0}`")]
    UnknownProp(String),

    #[error("position {position} out of range 1..={length}")]
    PositionOutOfRange { position: usize, length: usize },

    #[error("enumeration cap exceeded: {need} bits needed, cap is {cap}")]
    EnumerationCap { need: u32, cap: u32 },

    #[error("alphabet width {width} exceeds cap {cap}")]
    WidthCap { width: usize, cap: usize },

    #[error("letter width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },

    #[error("state limit exceeded: more than {limit} states")]
    StateLimit { limit: usize },

    #[error("timed out")]
    Timeout,

    #[error("quantifier under a temporal operator is not supported")]
    QuantifierUnderTemporal,

    #[error("strategy extraction requires a realizable game")]
    NotRealizable,

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps the error with the pipeline stage it occurred in. Errors that
    /// already carry a stage are left untouched.
    pub fn in_stage(self, stage: Stage) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The stage attributed to this error, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    pub fn is_timeout(&self) -> bool {
        match self {
            Error::Timeout => true,
            Error::Stage { source, .. } => source.is_timeout(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attributes errors from `r` to `stage`.
pub fn in_stage<T>(stage: Stage, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(stage))
}

/// Resource budgets for the automata constructions and brute-force oracles.
///
/// The explicit-alphabet representation enumerates all `2^width` letters per
/// state, so `width_cap` is a hard bound; a warning is logged from
/// `width_warn` upward. Brute-force oracles refuse work beyond
/// `enum_cap_bits` bits of enumeration.
#[derive(Debug, Clone)]
pub struct Limits {
    pub width_cap: usize,
    pub width_warn: usize,
    /// State bound for the progression-based DFA construction.
    pub state_limit: usize,
    /// Subset bound for determinization and the belief construction.
    pub subset_limit: usize,
    /// Bit budget for brute-force enumeration oracles.
    pub enum_cap_bits: u32,
    /// Node budget for strategy verification.
    pub verify_node_limit: usize,
    /// Cooperative deadline checked inside construction loops.
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            width_cap: 16,
            width_warn: 12,
            state_limit: 1 << 18,
            subset_limit: 1 << 20,
            enum_cap_bits: 20,
            verify_node_limit: 1 << 22,
            deadline: None,
        }
    }
}

impl Limits {
    pub fn with_deadline(mut self, deadline: Instant) -> Self {
        self.deadline = Some(deadline);
        self
    }

    pub fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }

    pub fn check_width(&self, width: usize) -> Result<()> {
        if width > self.width_cap {
            return Err(Error::WidthCap {
                width,
                cap: self.width_cap,
            });
        }
        if width >= self.width_warn {
            log::warn!(
                "alphabet width {width} is close to the cap ({}); expect large transition tables",
                self.width_cap
            );
        }
        Ok(())
    }

    pub fn check_enum_bits(&self, need: u32) -> Result<()> {
        if need > self.enum_cap_bits {
            Err(Error::EnumerationCap {
                need,
                cap: self.enum_cap_bits,
            })
        } else {
            Ok(())
        }
    }
}
