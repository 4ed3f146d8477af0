//! Matching with contracts for asylum seeker assignment.
//!
//! Seekers with burden sizes are assigned to member states at wait times.
//! States choose with a greedy priority rule bounded by a burden quota and
//! per-wait capacities; seekers propose through the cumulative offer
//! mechanism. The [`audit`] module verifies properties of rules and outcomes
//! by exhaustive enumeration at small scale.
//!
//! ```
//! use asylum_match::{bundled_example, run_with_rule_variants, RuleVariant};
//!
//! let inst = bundled_example("example6").unwrap();
//! let trace = run_with_rule_variants(&inst, RuleVariant::Base).unwrap();
//! assert_eq!(inst.set_label(trace.outcome.contracts()),
//!            "{(a1,m1,1), (a2,m3,1), (a3,m2,1), (a4,m4,2)}");
//! ```

pub mod audit;
pub mod bundled;
pub mod choice;
pub mod completion;
pub mod error;
pub mod format;
pub mod generate;
pub mod instance;
pub mod mechanism;
pub mod reproduce;
mod subsets;

pub use audit::{AuditReport, AuditStats, ManipulationReport, MisreportDomain, NomConfig, Verdict, Witness};
pub use bundled::bundled_example;
pub use choice::{choose, choose_set, ChoiceRule, ChoiceTrace, RuleVariant, StopReason};
pub use completion::{choose_completed, displacement_check, is_completion_on};
pub use error::{Error, ValidationError, ValidationErrors};
pub use format::{parse_instance, write_instance};
pub use generate::{generate_instance, Dims, Profile};
pub use instance::{
    validate_instance, Allocation, Contract, ContractSet, Instance, Preference, SeekerIx, StateIx, Term, WaitIx,
    WaitTime,
};
pub use mechanism::{
    cumulative_offer, run_with_rule_variants, CumulativeOffer, Mechanism, MechanismOutcome, MechanismTrace,
    OrderPolicy, Selection, StableSelection,
};
pub use reproduce::{reproduce, Reproduction};
pub use subsets::lex_subsets;
