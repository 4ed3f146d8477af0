//! The completed choice rule and checks of its structure.

use crate::audit::{AuditReport, RuleTable, Witness};
use crate::choice::{greedy_sequence, traced, ChoiceRule, ChoiceTrace, RuleVariant};
use crate::error::Error;
use crate::instance::{Contract, ContractSet, Instance, StateIx};

/// The completed rule with its step trace.
pub fn choose_completed(inst: &Instance, state: StateIx, offered: &ContractSet) -> ChoiceTrace {
    traced(inst, state, offered, RuleVariant::Completed, true)
}

/// The completed rule's step loop run until candidates run out, ignoring
/// the quota.
pub fn choose_completed_uncapped(inst: &Instance, state: StateIx, offered: &ContractSet) -> ChoiceTrace {
    traced(inst, state, offered, RuleVariant::Completed, false)
}

/// Checks that `completed` agrees with `base` on every subset of `universe`
/// except where it gives some seeker two contracts.
pub fn is_completion_on<C, B>(
    inst: &Instance,
    state: StateIx,
    completed: &C,
    base: &B,
    universe: &ContractSet,
) -> Result<AuditReport, Error>
where
    C: ChoiceRule + ?Sized,
    B: ChoiceRule + ?Sized,
{
    let c = RuleTable::build(inst, state, completed, universe)?;
    let b = RuleTable::build(inst, state, base, universe)?;
    c.completion_of(&b)
}

/// Compares the completed rule's acceptance sequences on `offered` and on
/// `offered + added`, with the quota stop disabled.
///
/// Adding a contract at wait `w` inserts it at some position `l1` of the
/// sequence. If the wait `w` was already full, the last `w` contract of the
/// old sequence (position `l2`) drops out; everything else keeps its place,
/// shifted by one between `l1` and `l2`. If `w` had room, everything after
/// `l1` shifts by one.
///
/// Requires `added` to be accepted by the uncapped run on `offered + added`.
pub fn displacement_check(
    inst: &Instance,
    state: StateIx,
    offered: &ContractSet,
    added: Contract,
) -> Result<AuditReport, Error> {
    if offered.contains(&added) {
        return Err(Error::PreconditionUnmet("the added contract is already offered".to_string()));
    }
    if added.state != state {
        return Err(Error::PreconditionUnmet("the added contract names another state".to_string()));
    }
    let offered = offered.at_state(state);
    let extended = offered.with(added);
    let before = greedy_sequence(inst, state, &offered, RuleVariant::Completed, false);
    let after = greedy_sequence(inst, state, &extended, RuleVariant::Completed, false);
    let Some(l1) = after.iter().position(|x| *x == added) else {
        return Err(Error::PreconditionUnmet("the added contract is not accepted".to_string()));
    };

    let mut report = AuditReport::new("displacement alignment");
    report.stats.cases = 1;
    let st = inst.state(state);
    let same_wait = before.iter().filter(|x| x.wait == added.wait).count();
    let full = same_wait >= st.capacity(added.wait);
    let l2 = if full { before.iter().rposition(|x| x.wait == added.wait) } else { None };

    let mut problems = Vec::new();
    match l2 {
        Some(l2) => {
            if after.len() != before.len() {
                problems.push(format!("lengths {} and {} differ", before.len(), after.len()));
            }
            if l2 < l1 {
                problems.push(format!("displaced position {l2} precedes insertion {l1}"));
            }
        }
        None => {
            if after.len() != before.len() + 1 {
                problems.push(format!("length {} is not {} + 1", after.len(), before.len()));
            }
        }
    }
    let shift_end = l2.unwrap_or(before.len());
    for (j, x) in after.iter().enumerate() {
        let expected = if j < l1 {
            before.get(j)
        } else if j == l1 {
            Some(&added)
        } else if j <= shift_end {
            before.get(j - 1)
        } else {
            before.get(j)
        };
        if expected != Some(x) {
            problems.push(format!(
                "step {} accepts {} where {} was expected",
                j + 1,
                inst.contract_label(x),
                expected.map_or("nothing".to_string(), |e| inst.contract_label(e))
            ));
            break;
        }
    }

    report.notes.push(match l2 {
        Some(l2) => format!("inserted at step {}, displaced from step {}", l1 + 1, l2 + 1),
        None => format!("inserted at step {}, no displacement", l1 + 1),
    });
    let total: u64 = extended.iter().map(|x| inst.burden(x.seeker)).sum();
    report.notes.push(format!(
        "offered burden {} {} the quota {}",
        total,
        if total >= st.quota { "reaches" } else { "is below" },
        st.quota
    ));
    // With the quota stop on, each run is a prefix of its uncapped run; the
    // prefixes must agree before the insertion point.
    let capped_before = greedy_sequence(inst, state, &offered, RuleVariant::Completed, true);
    let capped_after = greedy_sequence(inst, state, &extended, RuleVariant::Completed, true);
    let common = l1.min(capped_before.len()).min(capped_after.len());
    let prefixes_agree = capped_before[..common] == capped_after[..common];
    report
        .notes
        .push(format!("capped runs {} before the insertion point", if prefixes_agree { "agree" } else { "disagree" }));
    if !prefixes_agree {
        problems.push("capped runs disagree before the insertion point".to_string());
    }

    report.stats.violations = problems.len() as u64;
    if !problems.is_empty() {
        report.witnesses.push(Witness::Alignment { offered, added, detail: problems.join("; ") });
    }
    Ok(report)
}
