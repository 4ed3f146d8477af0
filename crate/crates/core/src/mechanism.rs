//! The seeker-proposing cumulative offer mechanism.
//!
//! While some seeker holds no tentatively accepted contract and still has
//! listed contracts she has not proposed, the order policy picks one such
//! seeker and she proposes her best unproposed contract. The receiving
//! state re-chooses from everything ever offered to it. The outcome is the
//! union of the states' final choices.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::audit::enumerate_stable;
use crate::choice::{ChoiceRule, RuleVariant};
use crate::error::Error;
use crate::instance::{Allocation, Contract, ContractSet, Instance, SeekerIx};

/// Which eligible seeker proposes next.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum OrderPolicy {
    /// Cycle through seekers by id, starting after the previous proposer.
    #[default]
    RoundRobin,
    LowestIdFirst,
    HighestIdFirst,
    Random {
        seed: u64,
    },
}

impl std::str::FromStr for OrderPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "round-robin" => Ok(OrderPolicy::RoundRobin),
            "lowest-id" => Ok(OrderPolicy::LowestIdFirst),
            "highest-id" => Ok(OrderPolicy::HighestIdFirst),
            _ => match s.strip_prefix("random:") {
                Some(seed) => {
                    seed.parse().map(|seed| OrderPolicy::Random { seed }).map_err(|e| format!("bad seed in {s:?}: {e}"))
                }
                None => Err(format!(
                    "unknown order policy {s:?} (expected round-robin, lowest-id, highest-id or random:<seed>)"
                )),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Round {
    pub proposer: SeekerIx,
    pub proposed: Contract,
    /// Per state, everything offered so far.
    pub cumulative_offers: Vec<ContractSet>,
    /// Per state, the current choice from its offers.
    pub tentatively_held: Vec<ContractSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismTrace {
    pub rounds: Vec<Round>,
    pub outcome: Allocation,
    /// Seekers whose final holdings spanned several contracts; each keeps
    /// her most preferred one.
    pub multiple_holdings: Vec<SeekerIx>,
    /// Per seeker: at some point she held nothing and had no contract left
    /// to propose. When false, appending terms to her ranking cannot change
    /// the run.
    pub exhausted_unheld: Vec<bool>,
}

impl MechanismTrace {
    pub fn render(&self, inst: &Instance) -> String {
        let mut out = String::from("round\tproposer\tproposed\theld\n");
        for (i, r) in self.rounds.iter().enumerate() {
            let held: Vec<String> = inst
                .state_ixs()
                .map(|m| format!("{}:{}", inst.state(m).id, inst.set_label(&r.tentatively_held[m.0])))
                .collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                i + 1,
                inst.seeker(r.proposer).id,
                inst.contract_label(&r.proposed),
                held.join(" ")
            );
        }
        for a in &self.multiple_holdings {
            let _ = writeln!(out, "note: {} held several contracts; kept the most preferred", inst.seeker(*a).id);
        }
        let _ = writeln!(out, "outcome: {}", inst.set_label(self.outcome.contracts()));
        out
    }
}

struct Picker {
    policy: OrderPolicy,
    last: Option<SeekerIx>,
    rng: Option<ChaCha8Rng>,
}

impl Picker {
    fn new(policy: OrderPolicy) -> Self {
        let rng = match policy {
            OrderPolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Picker { policy, last: None, rng }
    }

    /// `eligible` is nonempty and ascending.
    fn pick(&mut self, eligible: &[SeekerIx]) -> SeekerIx {
        let a = match self.policy {
            OrderPolicy::LowestIdFirst => eligible[0],
            OrderPolicy::HighestIdFirst => eligible[eligible.len() - 1],
            OrderPolicy::RoundRobin => match self.last {
                Some(last) => *eligible.iter().find(|a| **a > last).unwrap_or(&eligible[0]),
                None => eligible[0],
            },
            OrderPolicy::Random { .. } => *eligible.choose(self.rng.as_mut().expect("seeded")).expect("nonempty"),
        };
        self.last = Some(a);
        a
    }
}

fn run<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    rule: &R,
    order: OrderPolicy,
    record: bool,
) -> Result<MechanismTrace, Error> {
    let n = inst.seekers().len();
    let guard = n * inst.states().len() * inst.waits().len();
    let mut offers = vec![ContractSet::new(); inst.states().len()];
    let mut held = vec![ContractSet::new(); inst.states().len()];
    let mut holding = vec![0usize; n];
    let mut next = vec![0usize; n];
    let mut exhausted_unheld = vec![false; n];
    let mut rounds = Vec::new();
    let mut picker = Picker::new(order);
    let mut eligible = Vec::with_capacity(n);
    let mut count = 0usize;
    loop {
        eligible.clear();
        for a in 0..n {
            if holding[a] == 0 {
                if next[a] < inst.preference(SeekerIx(a)).len() {
                    eligible.push(SeekerIx(a));
                } else {
                    exhausted_unheld[a] = true;
                }
            }
        }
        if eligible.is_empty() {
            break;
        }
        count += 1;
        if count > guard {
            return Err(Error::NonTermination(guard));
        }
        let a = picker.pick(&eligible);
        let term = inst.preference(a).ranking()[next[a.0]];
        next[a.0] += 1;
        let x = term.for_seeker(a);
        let m = x.state;
        offers[m.0].insert(x);
        let chosen = rule.choose(inst, m, &offers[m.0]);
        if !chosen.is_subset(&offers[m.0]) {
            return Err(Error::RuleEscapesOffer);
        }
        for y in &held[m.0] {
            holding[y.seeker.0] -= 1;
        }
        for y in &chosen {
            holding[y.seeker.0] += 1;
        }
        held[m.0] = chosen;
        if record {
            rounds.push(Round {
                proposer: a,
                proposed: x,
                cumulative_offers: offers.clone(),
                tentatively_held: held.clone(),
            });
        }
    }

    let mut multiple_holdings = Vec::new();
    let mut kept: Vec<Option<Contract>> = vec![None; n];
    for y in held.iter().flat_map(|h| h.iter()) {
        let pref = inst.preference(y.seeker);
        match kept[y.seeker.0] {
            None => kept[y.seeker.0] = Some(*y),
            Some(prev) => {
                if !multiple_holdings.contains(&y.seeker) {
                    multiple_holdings.push(y.seeker);
                }
                if pref.outcome_rank(Some(y)) < pref.outcome_rank(Some(&prev)) {
                    kept[y.seeker.0] = Some(*y);
                }
            }
        }
    }
    multiple_holdings.sort();
    let outcome = Allocation::new(inst, kept.into_iter().flatten().collect())?;
    Ok(MechanismTrace { rounds, outcome, multiple_holdings, exhausted_unheld })
}

/// Runs the mechanism with `rule` at every state.
pub fn cumulative_offer<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    rule: &R,
    order: OrderPolicy,
) -> Result<MechanismTrace, Error> {
    run(inst, rule, order, true)
}

/// Same run without per-round records.
pub fn cumulative_offer_outcome<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    rule: &R,
    order: OrderPolicy,
) -> Result<MechanismTrace, Error> {
    run(inst, rule, order, false)
}

/// Cumulative offer with the base or completed rule at every state and the
/// default order policy.
pub fn run_with_rule_variants(inst: &Instance, variant: RuleVariant) -> Result<MechanismTrace, Error> {
    cumulative_offer(inst, &variant, OrderPolicy::default())
}

/// Result of running a mechanism on one profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismOutcome {
    pub allocation: Allocation,
    /// Per seeker, whether appending terms to her reported ranking can
    /// change the result. `None` when the mechanism cannot tell.
    pub tail_sensitive: Option<Vec<bool>>,
}

/// A direct mechanism: a map from preference profiles to allocations.
pub trait Mechanism: Sync {
    fn name(&self) -> String;
    fn run(&self, inst: &Instance) -> Result<MechanismOutcome, Error>;
}

/// The cumulative offer mechanism as a [`Mechanism`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CumulativeOffer {
    pub variant: RuleVariant,
    pub order: OrderPolicy,
}

impl Default for CumulativeOffer {
    fn default() -> Self {
        CumulativeOffer { variant: RuleVariant::Base, order: OrderPolicy::default() }
    }
}

impl Mechanism for CumulativeOffer {
    fn name(&self) -> String {
        format!("cumulative offer ({:?} rule, {:?} order)", self.variant, self.order)
    }

    fn run(&self, inst: &Instance) -> Result<MechanismOutcome, Error> {
        let t = cumulative_offer_outcome(inst, &self.variant, self.order)?;
        Ok(MechanismOutcome { allocation: t.outcome, tail_sensitive: Some(t.exhausted_unheld) })
    }
}

/// How a stable-outcome mechanism breaks ties between stable allocations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Selection {
    /// Smallest in canonical serialization order.
    LexMin,
    /// Largest in canonical serialization order.
    LexMax,
}

/// Picks a stable allocation whenever one exists, falling back to the
/// cumulative offer outcome otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StableSelection {
    pub variant: RuleVariant,
    pub selection: Selection,
}

impl Mechanism for StableSelection {
    fn name(&self) -> String {
        format!("stable selection ({:?}, {:?} rule)", self.selection, self.variant)
    }

    fn run(&self, inst: &Instance) -> Result<MechanismOutcome, Error> {
        let stable = enumerate_stable(inst, &self.variant)?;
        let picked = match self.selection {
            Selection::LexMin => stable.into_iter().next(),
            Selection::LexMax => stable.into_iter().next_back(),
        };
        let allocation = match picked {
            Some(a) => a,
            None => cumulative_offer_outcome(inst, &self.variant, OrderPolicy::default())?.outcome,
        };
        Ok(MechanismOutcome { allocation, tail_sensitive: None })
    }
}
