//! The member-state choice rule and the qualification predicates it is built
//! from.
//!
//! A state scans the offered contracts in priority order. At each step the
//! candidates are the offered contracts whose wait time still has a free
//! slot and whose seeker has not yet been accepted; the highest-priority
//! candidate seeker gets her lowest-wait candidate contract. The scan stops
//! once the burden already accepted reaches the quota (the last acceptance
//! may overshoot it) or no candidate remains.
//!
//! The completed variant keeps accepted seekers in the race: it only removes
//! accepted contracts from the candidates, so one seeker may end up with
//! several contracts.

use serde::Serialize;

use crate::audit::{AuditReport, Witness};
use crate::error::Error;
use crate::instance::{Contract, ContractSet, Instance, SeekerIx, StateIx, WaitIx};
use crate::subsets::{check_universe, lex_subsets, mask_to_set, subsets_in_lex_order};

/// A per-state choice rule. The rule sees the whole offered set and must
/// consider only the contracts naming `state`.
pub trait ChoiceRule: Sync {
    fn choose(&self, inst: &Instance, state: StateIx, offered: &ContractSet) -> ContractSet;
}

impl<F> ChoiceRule for F
where
    F: Fn(&Instance, StateIx, &ContractSet) -> ContractSet + Sync,
{
    fn choose(&self, inst: &Instance, state: StateIx, offered: &ContractSet) -> ContractSet {
        self(inst, state, offered)
    }
}

/// The two rules this crate implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RuleVariant {
    /// At most one contract per seeker.
    Base,
    /// Accepted seekers stay in the race.
    Completed,
}

impl ChoiceRule for RuleVariant {
    fn choose(&self, inst: &Instance, state: StateIx, offered: &ContractSet) -> ContractSet {
        greedy(inst, state, offered, *self, true)
    }
}

impl std::str::FromStr for RuleVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(RuleVariant::Base),
            "completed" => Ok(RuleVariant::Completed),
            _ => Err(format!("unknown rule variant {s:?} (expected base or completed)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    QuotaReached,
    NoCandidates,
    Continued,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChoiceStep {
    pub k: usize,
    pub accepted_so_far: ContractSet,
    pub candidates: ContractSet,
    pub picked_seeker: Option<SeekerIx>,
    pub picked_contract: Option<Contract>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChoiceTrace {
    pub state: StateIx,
    pub variant: RuleVariant,
    pub steps: Vec<ChoiceStep>,
    pub result: ContractSet,
    /// Accepted contracts in acceptance order.
    pub sequence: Vec<Contract>,
    pub duplicated_seeker: bool,
}

impl ChoiceTrace {
    pub fn stop_reason(&self) -> StopReason {
        self.steps.last().map_or(StopReason::NoCandidates, |s| s.stop_reason)
    }

    /// Step table for reports.
    pub fn render(&self, inst: &Instance) -> String {
        let mut out = format!(
            "choice at {} ({} rule)\n",
            inst.state(self.state).id,
            match self.variant {
                RuleVariant::Base => "base",
                RuleVariant::Completed => "completed",
            }
        );
        out.push_str("k\taccepted\tcandidates\tpicked\tstatus\n");
        for s in &self.steps {
            let picked = s.picked_contract.map_or_else(|| "-".to_string(), |x| inst.contract_label(&x));
            let status = match s.stop_reason {
                StopReason::QuotaReached => "stop: quota reached",
                StopReason::NoCandidates => "stop: no candidates",
                StopReason::Continued => "continue",
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                s.k,
                inst.set_label(&s.accepted_so_far),
                inst.set_label(&s.candidates),
                picked,
                status
            ));
        }
        out.push_str(&format!("result: {}\n", inst.set_label(&self.result)));
        out
    }
}

/// Offered contracts at `state`, sorted by (seeker priority, wait).
fn scan_order(inst: &Instance, state: StateIx, offered: &ContractSet) -> Vec<Contract> {
    let st = inst.state(state);
    let mut xs: Vec<Contract> = offered.iter().copied().filter(|x| x.state == state).collect();
    xs.sort_by_key(|x| (st.rank(x.seeker), x.wait));
    xs
}

/// Single-pass form of the step loop. A contract passed over once never
/// becomes a candidate again (full waits stay full, accepted seekers stay
/// accepted), so scanning in (priority, wait) order picks exactly what the
/// step loop picks.
pub(crate) fn greedy_sequence(
    inst: &Instance,
    state: StateIx,
    offered: &ContractSet,
    variant: RuleVariant,
    quota_stop: bool,
) -> Vec<Contract> {
    let st = inst.state(state);
    let mut used = vec![0usize; inst.waits().len()];
    let mut burden = 0u64;
    let mut accepted: Vec<Contract> = Vec::new();
    for x in scan_order(inst, state, offered) {
        if quota_stop && burden >= st.quota {
            break;
        }
        if used[x.wait.0] >= st.capacity(x.wait) {
            continue;
        }
        if variant == RuleVariant::Base && accepted.iter().any(|y| y.seeker == x.seeker) {
            continue;
        }
        used[x.wait.0] += 1;
        burden += inst.burden(x.seeker);
        accepted.push(x);
    }
    accepted
}

pub(crate) fn greedy(
    inst: &Instance,
    state: StateIx,
    offered: &ContractSet,
    variant: RuleVariant,
    quota_stop: bool,
) -> ContractSet {
    greedy_sequence(inst, state, offered, variant, quota_stop).into_iter().collect()
}

/// Runs the step loop literally, recording every step. With `quota_stop`
/// off the loop runs until no candidate remains.
pub(crate) fn traced(
    inst: &Instance,
    state: StateIx,
    offered: &ContractSet,
    variant: RuleVariant,
    quota_stop: bool,
) -> ChoiceTrace {
    let st = inst.state(state);
    let local = offered.at_state(state);
    let mut accepted = ContractSet::new();
    let mut sequence = Vec::new();
    let mut steps = Vec::new();
    let mut burden = 0u64;
    for k in 1.. {
        let candidates: ContractSet = local
            .iter()
            .copied()
            .filter(|x| {
                st.capacity(x.wait) > accepted.count_at(state, x.wait)
                    && match variant {
                        RuleVariant::Base => !accepted.has_seeker(x.seeker),
                        RuleVariant::Completed => !accepted.contains(x),
                    }
            })
            .collect();
        let stop = if quota_stop && burden >= st.quota {
            Some(StopReason::QuotaReached)
        } else if candidates.is_empty() {
            Some(StopReason::NoCandidates)
        } else {
            None
        };
        if let Some(reason) = stop {
            steps.push(ChoiceStep {
                k,
                accepted_so_far: accepted.clone(),
                candidates,
                picked_seeker: None,
                picked_contract: None,
                stop_reason: reason,
            });
            break;
        }
        let seeker = candidates.iter().map(|x| x.seeker).min_by_key(|a| st.rank(*a)).expect("candidates are nonempty");
        let mine: Vec<&Contract> = candidates.of_seeker(seeker).collect();
        let picked = **mine.iter().min_by_key(|x| x.wait).expect("seeker has a candidate");
        debug_assert_eq!(
            mine.iter().filter(|x| x.wait == picked.wait).count(),
            1,
            "one seeker's contracts at one state differ in wait"
        );
        steps.push(ChoiceStep {
            k,
            accepted_so_far: accepted.clone(),
            candidates,
            picked_seeker: Some(seeker),
            picked_contract: Some(picked),
            stop_reason: StopReason::Continued,
        });
        accepted.insert(picked);
        sequence.push(picked);
        burden += inst.burden(seeker);
    }
    let duplicated_seeker = accepted.has_duplicate_seeker();
    ChoiceTrace { state, variant, steps, result: accepted, sequence, duplicated_seeker }
}

/// The base choice rule with its full step trace.
pub fn choose(inst: &Instance, state: StateIx, offered: &ContractSet) -> ChoiceTrace {
    traced(inst, state, offered, RuleVariant::Base, true)
}

/// The base choice rule, result only.
pub fn choose_set(inst: &Instance, state: StateIx, offered: &ContractSet) -> ContractSet {
    greedy(inst, state, offered, RuleVariant::Base, true)
}

fn check_seeker(inst: &Instance, a: SeekerIx) -> Result<(), Error> {
    if a.0 < inst.seekers().len() {
        Ok(())
    } else {
        Err(Error::UnknownSeeker(format!("#{}", a.0)))
    }
}

/// Total burden of the seekers in `chosen` (at `state`) with priority above
/// `a` is below the quota.
pub fn qualifies_for_acceptance(
    inst: &Instance,
    state: StateIx,
    chosen: &ContractSet,
    a: SeekerIx,
) -> Result<bool, Error> {
    check_seeker(inst, a)?;
    let st = inst.state(state);
    let above: u64 =
        chosen.at_state(state).seekers().into_iter().filter(|b| st.ranks_above(*b, a)).map(|b| inst.burden(b)).sum();
    Ok(above < st.quota)
}

/// `a` offers a contract at `(state, w)` and fewer than `r` higher-priority
/// seekers hold a `(state, w)` contract in `chosen`.
pub fn qualifies_for_wait_time(
    inst: &Instance,
    state: StateIx,
    offered: &ContractSet,
    chosen: &ContractSet,
    a: SeekerIx,
    w: WaitIx,
) -> Result<bool, Error> {
    check_seeker(inst, a)?;
    if w.0 >= inst.waits().len() {
        return Err(Error::UnknownWaitTime(format!("#{}", w.0)));
    }
    if !offered.contains(&Contract::new(a, state, w)) {
        return Ok(false);
    }
    let st = inst.state(state);
    let mut above: Vec<SeekerIx> = chosen
        .iter()
        .filter(|x| x.state == state && x.wait == w && st.ranks_above(x.seeker, a))
        .map(|x| x.seeker)
        .collect();
    above.sort_unstable();
    above.dedup();
    Ok(above.len() < st.capacity(w))
}

/// Axiom violations of one candidate output `chosen` for the offer `offered`,
/// at most one per axiom.
pub(crate) fn axiom_violations(
    inst: &Instance,
    state: StateIx,
    offered: &ContractSet,
    chosen: &ContractSet,
) -> Vec<Witness> {
    let mut out = Vec::new();
    let local = offered.at_state(state);
    let st = inst.state(state);

    if !chosen.is_subset(&local) {
        out.push(Witness::Feasibility {
            offered: offered.clone(),
            chosen: chosen.clone(),
            reason: "chosen contracts outside the offer at this state".to_string(),
        });
    } else if chosen.has_duplicate_seeker() {
        out.push(Witness::Feasibility {
            offered: offered.clone(),
            chosen: chosen.clone(),
            reason: "a seeker holds more than one contract".to_string(),
        });
    } else if let Some(w) = inst.wait_ixs().find(|w| chosen.count_at(state, *w) > st.capacity(*w)) {
        out.push(Witness::Feasibility {
            offered: offered.clone(),
            chosen: chosen.clone(),
            reason: format!("capacity exceeded at wait {}", inst.wait_time(w)),
        });
    }

    'early: for x in chosen.iter().filter(|x| x.state == state) {
        for y in local.of_seeker(x.seeker) {
            if y.wait < x.wait
                && !chosen.contains(y)
                && qualifies_for_wait_time(inst, state, offered, chosen, x.seeker, y.wait).unwrap_or(false)
            {
                out.push(Witness::EarlyFilling {
                    offered: offered.clone(),
                    chosen: chosen.clone(),
                    accepted: *x,
                    passed_over: *y,
                });
                break 'early;
            }
        }
    }

    for a in local.seekers() {
        let holds = chosen.iter().any(|x| x.seeker == a && x.state == state);
        let accept = qualifies_for_acceptance(inst, state, chosen, a).unwrap_or(false);
        let some_wait =
            inst.wait_ixs().any(|w| qualifies_for_wait_time(inst, state, offered, chosen, a, w).unwrap_or(false));
        if holds != (accept && some_wait) {
            out.push(Witness::RespectingPriorities {
                offered: offered.clone(),
                chosen: chosen.clone(),
                seeker: a,
                holds,
                qualifies: accept && some_wait,
            });
            break;
        }
    }
    out
}

/// Default bound on universe size for subset enumeration.
pub const DEFAULT_UNIVERSE_BOUND: usize = 16;

/// Checks feasibility, early filling and respecting priorities of `rule`
/// on every subset of `universe`. Reports the first offending subset per
/// axiom in lexicographic subset order.
pub fn check_axioms<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    state: StateIx,
    rule: &R,
    universe: &ContractSet,
) -> Result<AuditReport, Error> {
    check_axioms_bounded(inst, state, rule, universe, DEFAULT_UNIVERSE_BOUND)
}

pub fn check_axioms_bounded<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    state: StateIx,
    rule: &R,
    universe: &ContractSet,
    bound: usize,
) -> Result<AuditReport, Error> {
    check_universe(universe, bound)?;
    let mut report = AuditReport::new("axioms");
    let mut seen = [false; 3];
    for mask in subsets_in_lex_order(universe.len()) {
        let offered = mask_to_set(universe, mask);
        let chosen = rule.choose(inst, state, &offered);
        report.stats.cases += 1;
        for w in axiom_violations(inst, state, &offered, &chosen) {
            report.stats.violations += 1;
            let slot = match w {
                Witness::Feasibility { .. } => 0,
                Witness::EarlyFilling { .. } => 1,
                _ => 2,
            };
            if !seen[slot] {
                seen[slot] = true;
                report.witnesses.push(w);
            }
        }
    }
    Ok(report)
}

/// Brute-force uniqueness check. The axioms constrain each offer
/// separately, so a rule passes them iff every offer's output passes; this
/// enumerates every feasible output of every offer and confirms the base
/// rule's output is the only one that passes.
pub fn unique_axiom_rule_oracle(inst: &Instance, state: StateIx, universe: &ContractSet) -> Result<AuditReport, Error> {
    const BOUND: usize = 8;
    check_universe(universe, BOUND)?;
    let mut report = AuditReport::new("axiom uniqueness");
    let mut functions: f64 = 1.0;
    for offered in lex_subsets(universe) {
        let expected = choose_set(inst, state, &offered);
        let local = offered.at_state(state);
        let mut passing = 0u64;
        let mut expected_passes = false;
        for candidate in lex_subsets(&local) {
            report.stats.cases += 1;
            if axiom_violations(inst, state, &offered, &candidate).is_empty() {
                passing += 1;
                if candidate == expected {
                    expected_passes = true;
                } else {
                    report.stats.violations += 1;
                    report.witnesses.push(Witness::Uniqueness {
                        offered: offered.clone(),
                        expected: expected.clone(),
                        alternative: Some(candidate),
                    });
                }
            }
        }
        if !expected_passes {
            report.stats.violations += 1;
            report.witnesses.push(Witness::Uniqueness { offered: offered.clone(), expected, alternative: None });
        }
        functions *= passing as f64;
    }
    report.notes.push(format!("axiom-satisfying rules found: {functions}"));
    Ok(report)
}
