//! Brute-force oracles and property checkers.

mod manipulation;
mod properties;
mod stability;

pub use manipulation::{
    audit_nom, audit_strategy_proofness, audit_strategy_proofness_bounded, nom_sweep, Extremes, ManipulationReport,
    MisreportDomain, NomConfig, DEFAULT_DOMAIN_BOUND,
};
pub use properties::{
    is_substitutable, is_unilaterally_substitutable, pinned_completion_witness, satisfies_irc, satisfies_lad,
    PinnedProperty, RuleTable,
};
pub use stability::{
    enumerate_stable, enumerate_stable_bounded, is_stable, is_stable_naive, is_stable_set, DEFAULT_SPACE_BOUND,
};

use std::fmt::Write as _;

use serde::Serialize;

use crate::choice::ChoiceRule;
use crate::instance::{Contract, ContractSet, Instance, SeekerIx, StateIx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditStats {
    /// Cases examined (offers, allocations, profiles, ...).
    pub cases: u64,
    /// Cases violating the property; may exceed the witnesses kept.
    pub violations: u64,
    /// Cases settled without evaluation because an evaluated case covers them.
    pub covered: u64,
}

/// Outcome of one audit. The verdict is derived from the witnesses, so a
/// report fails exactly when it carries at least one witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub check: String,
    pub witnesses: Vec<Witness>,
    pub stats: AuditStats,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn new(check: &str) -> Self {
        AuditReport { check: check.to_string(), witnesses: Vec::new(), stats: AuditStats::default(), notes: Vec::new() }
    }

    pub fn verdict(&self) -> Verdict {
        if self.witnesses.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }

    /// Human-readable report ending in the verdict line.
    pub fn render(&self, inst: &Instance) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "check: {}", self.check);
        let _ = writeln!(
            out,
            "cases: {}  violations: {}  covered: {}",
            self.stats.cases, self.stats.violations, self.stats.covered
        );
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        for (i, w) in self.witnesses.iter().enumerate() {
            let _ = writeln!(out, "witness {}: {}", i + 1, w.describe(inst));
        }
        let _ = writeln!(out, "{}", verdict_line(self.verdict(), self.witnesses.len()));
        out
    }
}

pub fn verdict_line(verdict: Verdict, witnesses: usize) -> String {
    match verdict {
        Verdict::Pass => format!("VERDICT: pass {witnesses}"),
        Verdict::Fail => format!("VERDICT: fail {witnesses}"),
    }
}

/// A structured counterexample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Feasibility {
        offered: ContractSet,
        chosen: ContractSet,
        reason: String,
    },
    EarlyFilling {
        offered: ContractSet,
        chosen: ContractSet,
        accepted: Contract,
        passed_over: Contract,
    },
    RespectingPriorities {
        offered: ContractSet,
        chosen: ContractSet,
        seeker: SeekerIx,
        holds: bool,
        qualifies: bool,
    },
    /// Another output passes the axioms, or the expected output does not.
    Uniqueness {
        offered: ContractSet,
        expected: ContractSet,
        alternative: Option<ContractSet>,
    },
    /// `added` is chosen from `base + added + other` but not from `base + added`.
    Substitutability {
        base: ContractSet,
        added: Contract,
        other: Contract,
        choice_with_added: ContractSet,
        choice_with_both: ContractSet,
    },
    /// Fewer contracts are chosen after `added` is offered.
    AggregateDemand {
        base: ContractSet,
        added: Contract,
        choice_without: ContractSet,
        choice_with: ContractSet,
    },
    /// `added` is rejected yet its presence changes the choice.
    RejectedContract {
        base: ContractSet,
        added: Contract,
        choice_without: ContractSet,
        choice_with: ContractSet,
    },
    /// The candidate completion differs from the base rule without giving
    /// any seeker two contracts.
    Completion {
        offered: ContractSet,
        completed: ContractSet,
        base: ContractSet,
    },
    /// Two offers with at most one contract per seeker whose base choices
    /// already violate the property.
    PinnedPair {
        property: PinnedProperty,
        smaller: ContractSet,
        smaller_choice: ContractSet,
        larger: ContractSet,
        larger_choice: ContractSet,
    },
    Alignment {
        offered: ContractSet,
        added: Contract,
        detail: String,
    },
    UnlistedContract {
        contract: Contract,
    },
    StateRejects {
        state: StateIx,
        held: ContractSet,
        chosen: ContractSet,
    },
    Blocking {
        contract: Contract,
        current: Option<Contract>,
    },
    Manipulation(Box<ManipulationReport>),
}

impl Witness {
    pub fn describe(&self, inst: &Instance) -> String {
        let s = |set: &ContractSet| inst.set_label(set);
        let c = |x: &Contract| inst.contract_label(x);
        match self {
            Witness::Feasibility { offered, chosen, reason } => {
                format!("feasibility: offer {} -> {}: {reason}", s(offered), s(chosen))
            }
            Witness::EarlyFilling { offered, chosen, accepted, passed_over } => format!(
                "early filling: offer {} -> {}: {} accepted although {} qualifies for the lower wait of {}",
                s(offered),
                s(chosen),
                c(accepted),
                inst.seeker(accepted.seeker).id,
                c(passed_over)
            ),
            Witness::RespectingPriorities { offered, chosen, seeker, holds, qualifies } => format!(
                "respecting priorities: offer {} -> {}: seeker {} {} but {}",
                s(offered),
                s(chosen),
                inst.seeker(*seeker).id,
                if *holds { "holds a contract" } else { "holds nothing" },
                if *qualifies { "qualifies" } else { "does not qualify" }
            ),
            Witness::Uniqueness { offered, expected, alternative } => match alternative {
                Some(alt) => format!(
                    "uniqueness: offer {}: {} also satisfies the axioms (rule gives {})",
                    s(offered),
                    s(alt),
                    s(expected)
                ),
                None => format!("uniqueness: offer {}: rule output {} fails the axioms", s(offered), s(expected)),
            },
            Witness::Substitutability { base, added, other, choice_with_added, choice_with_both } => format!(
                "substitutability: X'={} x={} x'={}: choice(X'+x)={} choice(X'+x+x')={}",
                s(base),
                c(added),
                c(other),
                s(choice_with_added),
                s(choice_with_both)
            ),
            Witness::AggregateDemand { base, added, choice_without, choice_with } => format!(
                "aggregate demand: X'={} x={}: choice(X')={} choice(X'+x)={}",
                s(base),
                c(added),
                s(choice_without),
                s(choice_with)
            ),
            Witness::RejectedContract { base, added, choice_without, choice_with } => format!(
                "rejected contract: X'={} x={}: choice(X')={} choice(X'+x)={}",
                s(base),
                c(added),
                s(choice_without),
                s(choice_with)
            ),
            Witness::Completion { offered, completed, base } => format!(
                "completion: offer {}: completed {} differs from base {} with no duplicated seeker",
                s(offered),
                s(completed),
                s(base)
            ),
            Witness::PinnedPair { property, smaller, smaller_choice, larger, larger_choice } => format!(
                "pinned {}: {} -> {}, {} -> {}",
                match property {
                    PinnedProperty::Substitutability => "substitutability",
                    PinnedProperty::AggregateDemand => "aggregate demand",
                },
                s(smaller),
                s(smaller_choice),
                s(larger),
                s(larger_choice)
            ),
            Witness::Alignment { offered, added, detail } => {
                format!("alignment: X'={} x*={}: {detail}", s(offered), c(added))
            }
            Witness::UnlistedContract { contract } => {
                format!("unlisted contract {} is assigned", c(contract))
            }
            Witness::StateRejects { state, held, chosen } => {
                format!("state {} holds {} but would only choose {}", inst.state(*state).id, s(held), s(chosen))
            }
            Witness::Blocking { contract, current } => format!(
                "blocking contract {} (seeker {} currently {})",
                c(contract),
                inst.seeker(contract.seeker).id,
                inst.outcome_label(current.as_ref())
            ),
            Witness::Manipulation(m) => m.describe(inst),
        }
    }

    /// Re-evaluates a choice-rule witness against `rule`. Returns `None` for
    /// witness kinds that are not a single-rule claim.
    pub fn recheck_choice<R: ChoiceRule + ?Sized>(&self, inst: &Instance, state: StateIx, rule: &R) -> Option<bool> {
        let ch = |set: &ContractSet| rule.choose(inst, state, set);
        Some(match self {
            Witness::Substitutability { base, added, other, .. } => {
                let with_added = base.with(*added);
                let with_both = with_added.with(*other);
                !base.contains(added)
                    && !base.contains(other)
                    && added != other
                    && ch(&with_both).contains(added)
                    && !ch(&with_added).contains(added)
            }
            Witness::AggregateDemand { base, added, .. } => {
                !base.contains(added) && ch(&base.with(*added)).len() < ch(base).len()
            }
            Witness::RejectedContract { base, added, .. } => {
                let with = ch(&base.with(*added));
                !base.contains(added) && !with.contains(added) && with != ch(base)
            }
            Witness::Feasibility { offered, .. }
            | Witness::EarlyFilling { offered, .. }
            | Witness::RespectingPriorities { offered, .. } => {
                !crate::choice::axiom_violations(inst, state, offered, &ch(offered)).is_empty()
            }
            _ => return None,
        })
    }
}
