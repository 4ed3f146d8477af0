//! Stability of allocations and exhaustive enumeration of stable ones.
//!
//! An allocation is stable when:
//! - every assigned contract is listed by its seeker;
//! - every state would keep exactly what it holds;
//! - no seeker has a listed contract she prefers to her assignment that the
//!   state would choose from its holdings plus that contract.

use super::{AuditReport, Witness};
use crate::choice::ChoiceRule;
use crate::error::Error;
use crate::instance::{allocation_violation, Allocation, Contract, ContractSet, Instance};

pub const DEFAULT_SPACE_BOUND: u128 = 20_000_000;

fn stability_witnesses<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    rule: &R,
    contracts: &ContractSet,
    first_only: bool,
) -> Vec<Witness> {
    let mut out = Vec::new();
    for x in contracts {
        if !inst.preference(x.seeker).is_listed(x) {
            out.push(Witness::UnlistedContract { contract: *x });
            if first_only {
                return out;
            }
        }
    }
    let by_state: Vec<ContractSet> = inst.state_ixs().map(|m| contracts.at_state(m)).collect();
    for m in inst.state_ixs() {
        let held = &by_state[m.0];
        let chosen = rule.choose(inst, m, held);
        if &chosen != held {
            out.push(Witness::StateRejects { state: m, held: held.clone(), chosen });
            if first_only {
                return out;
            }
        }
    }
    for a in inst.seeker_ixs() {
        let pref = inst.preference(a);
        let current = contracts.of_seeker(a).next().copied();
        let current_rank = pref.outcome_rank(current.as_ref());
        for (pos, x) in pref.contracts().enumerate() {
            if pos >= current_rank {
                break;
            }
            let offered = by_state[x.state.0].with(x);
            if rule.choose(inst, x.state, &offered).contains(&x) {
                out.push(Witness::Blocking { contract: x, current });
                if first_only {
                    return out;
                }
            }
        }
    }
    out
}

/// Stability audit listing every blocking contract.
pub fn is_stable<R: ChoiceRule + ?Sized>(inst: &Instance, rule: &R, alloc: &Allocation) -> AuditReport {
    let mut report = AuditReport::new("stability");
    report.witnesses = stability_witnesses(inst, rule, alloc.contracts(), false);
    report.stats.cases = 1;
    report.stats.violations = report.witnesses.len() as u64;
    report
}

/// Boolean stability test with early exit.
pub fn is_stable_set<R: ChoiceRule + ?Sized>(inst: &Instance, rule: &R, contracts: &ContractSet) -> bool {
    stability_witnesses(inst, rule, contracts, true).is_empty()
}

/// Reference implementation: scans every contract of the full universe
/// against every condition, rebuilding each state's holdings from scratch.
pub fn is_stable_naive<R: ChoiceRule + ?Sized>(inst: &Instance, rule: &R, contracts: &ContractSet) -> bool {
    for x in contracts {
        let listed = inst.preference(x.seeker).ranking().iter().any(|t| t.state == x.state && t.wait == x.wait);
        if !listed {
            return false;
        }
    }
    for m in inst.state_ixs() {
        let held: ContractSet = contracts.iter().filter(|x| x.state == m).copied().collect();
        if rule.choose(inst, m, &held) != held {
            return false;
        }
    }
    for a in inst.seeker_ixs() {
        let pref = inst.preference(a);
        let mine: Vec<&Contract> = contracts.iter().filter(|x| x.seeker == a).collect();
        for m in inst.state_ixs() {
            for w in inst.wait_ixs() {
                let x = Contract::new(a, m, w);
                if contracts.contains(&x) {
                    continue;
                }
                let Some(px) = pref.ranking().iter().position(|t| t.state == m && t.wait == w) else {
                    continue;
                };
                let improves = match mine.first() {
                    None => true,
                    Some(y) => pref
                        .ranking()
                        .iter()
                        .position(|t| t.state == y.state && t.wait == y.wait)
                        .is_none_or(|py| px < py),
                };
                if !improves {
                    continue;
                }
                let mut offered: ContractSet = contracts.iter().filter(|y| y.state == m).copied().collect();
                offered.insert(x);
                if rule.choose(inst, m, &offered).contains(&x) {
                    return false;
                }
            }
        }
    }
    true
}

/// Every stable allocation in which each seeker holds a listed contract or
/// nothing, in canonical order.
pub fn enumerate_stable<R: ChoiceRule + ?Sized>(inst: &Instance, rule: &R) -> Result<Vec<Allocation>, Error> {
    enumerate_stable_bounded(inst, rule, DEFAULT_SPACE_BOUND)
}

pub fn enumerate_stable_bounded<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    rule: &R,
    bound: u128,
) -> Result<Vec<Allocation>, Error> {
    let mut size: u128 = 1;
    for p in inst.preferences() {
        size = size.saturating_mul(p.len() as u128 + 1);
    }
    if size > bound {
        return Err(Error::SpaceTooLarge { size, bound });
    }
    let options: Vec<Vec<Contract>> = inst.preferences().iter().map(|p| p.contracts().collect()).collect();
    let nw = inst.waits().len();
    let mut used = vec![0usize; inst.states().len() * nw];
    let mut current: Vec<Contract> = Vec::new();
    let mut out = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn walk<R: ChoiceRule + ?Sized>(
        inst: &Instance,
        rule: &R,
        options: &[Vec<Contract>],
        nw: usize,
        a: usize,
        used: &mut Vec<usize>,
        current: &mut Vec<Contract>,
        out: &mut Vec<Allocation>,
    ) {
        if a == options.len() {
            let set: ContractSet = current.iter().copied().collect();
            if is_stable_set(inst, rule, &set) {
                debug_assert!(allocation_violation(inst, &set).is_none());
                out.push(Allocation::new(inst, set).expect("enumeration respects capacities"));
            }
            return;
        }
        walk(inst, rule, options, nw, a + 1, used, current, out);
        for x in &options[a] {
            let cell = x.state.0 * nw + x.wait.0;
            if used[cell] >= inst.state(x.state).capacity(x.wait) {
                continue;
            }
            used[cell] += 1;
            current.push(*x);
            walk(inst, rule, options, nw, a + 1, used, current, out);
            current.pop();
            used[cell] -= 1;
        }
    }

    walk(inst, rule, &options, nw, 0, &mut used, &mut current, &mut out);
    out.sort();
    Ok(out)
}
