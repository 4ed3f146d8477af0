use std::fmt;

use thiserror::Error;

use crate::instance::SeekerIx;

/// One violated instance invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("aggregate quota {total_quota} is below aggregate burden {total_burden}")]
    QuotaDeficit { total_quota: u64, total_burden: u64 },
    #[error("state {state}: total capacity {total_capacity} is below the required {required}")]
    CapacityDeficit { state: String, total_capacity: u64, required: u64 },
    #[error("{context}: reference to undeclared {id:?}")]
    DanglingReference { context: String, id: String },
    #[error("preference of {seeker} lists ({state},{wait}) more than once")]
    DuplicatePreferenceEntry { seeker: String, state: String, wait: String },
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("seeker {seeker} has burden size 0")]
    ZeroBurden { seeker: String },
    #[error("state {state}: priority is not a permutation of the seekers ({detail})")]
    PriorityNotPermutation { state: String, detail: String },
    #[error("seeker {seeker} has no preference entry")]
    MissingPreference { seeker: String },
    #[error("seeker {seeker} has more than one preference entry")]
    DuplicatePreference { seeker: String },
    #[error("state {state} declares capacity for wait {wait} twice")]
    DuplicateCapacity { state: String, wait: String },
    #[error("bad wait time {text:?}: {reason}")]
    BadWaitTime { text: String, reason: String },
    #[error("wait times are not strictly increasing")]
    UnsortedWaits,
}

/// Every invariant violation found in one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid instance:\n{0}")]
    Validation(#[from] ValidationErrors),
    #[error("unknown seeker {0:?}")]
    UnknownSeeker(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown wait time {0:?}")]
    UnknownWaitTime(String),
    #[error("unknown example {0:?}")]
    UnknownExample(String),
    #[error("contract of seeker #{} compared under the ranking of seeker #{}", found.0, expected.0)]
    WrongSeeker { expected: SeekerIx, found: SeekerIx },
    #[error("universe of {size} contracts exceeds the enumeration bound {bound}")]
    UniverseTooLarge { size: usize, bound: usize },
    #[error("allocation space of {size} candidates exceeds the bound {bound}")]
    SpaceTooLarge { size: u128, bound: u128 },
    #[error("misreport domain of {size} profiles exceeds the bound {bound}")]
    DomainTooLarge { size: u128, bound: u128 },
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("mechanism did not terminate within {0} rounds")]
    NonTermination(usize),
    #[error("cannot generate an instance with these dimensions: {0}")]
    InfeasibleDims(String),
    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),
    #[error("choice rule returned contracts outside the offered set")]
    RuleEscapesOffer,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
