//! Reference implementations used as test oracles. They follow the
//! definitions literally and share no code with the library's fast paths.

#![allow(dead_code)]

use std::collections::BTreeSet;

use asylum_match::{Contract, ContractSet, Instance, StateIx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The choice step loop with explicit candidate sets.
pub fn ref_choose(inst: &Instance, m: StateIx, offered: &ContractSet, completed: bool) -> ContractSet {
    let st = inst.state(m);
    let local: Vec<Contract> = offered.iter().copied().filter(|c| c.state == m).collect();
    let mut accepted: BTreeSet<Contract> = BTreeSet::new();
    loop {
        let burden: u64 = accepted.iter().map(|c| inst.burden(c.seeker)).sum();
        if burden >= st.quota {
            break;
        }
        let candidates: Vec<Contract> = local
            .iter()
            .copied()
            .filter(|c| {
                let used = accepted.iter().filter(|y| y.wait == c.wait).count();
                let free =
                    if completed { !accepted.contains(c) } else { !accepted.iter().any(|y| y.seeker == c.seeker) };
                st.capacity(c.wait) > used && free
            })
            .collect();
        if candidates.is_empty() {
            break;
        }
        let top = candidates.iter().map(|c| c.seeker).min_by_key(|a| st.rank(*a)).unwrap();
        let pick = candidates.iter().filter(|c| c.seeker == top).min_by_key(|c| c.wait).copied().unwrap();
        accepted.insert(pick);
    }
    accepted.into_iter().collect()
}

/// Every subset, by counting through bit masks.
pub fn all_subsets(u: &ContractSet) -> Vec<ContractSet> {
    let items = u.as_slice();
    (0u32..1 << items.len())
        .map(|mask| (0..items.len()).filter(|i| mask & (1 << i) != 0).map(|i| items[i]).collect())
        .collect()
}

/// Lexicographically smallest substitutability violation `(X', x, x')`.
pub fn ref_first_sub_violation<F>(
    u: &ContractSet,
    choose: F,
    unilateral: bool,
) -> Option<(Vec<Contract>, Contract, Contract)>
where
    F: Fn(&ContractSet) -> ContractSet,
{
    let mut found = Vec::new();
    for base in all_subsets(u) {
        for &x in u.iter().filter(|x| !base.contains(x)) {
            if unilateral && base.has_seeker(x.seeker) {
                continue;
            }
            for &y in u.iter().filter(|y| !base.contains(y) && **y != x) {
                let with_x = base.with(x);
                if choose(&with_x.with(y)).contains(&x) && !choose(&with_x).contains(&x) {
                    found.push((base.as_slice().to_vec(), x, y));
                }
            }
        }
    }
    found.into_iter().min()
}

/// Lexicographically smallest aggregate-demand violation `(X', x)`.
pub fn ref_first_lad_violation<F>(u: &ContractSet, choose: F) -> Option<(Vec<Contract>, Contract)>
where
    F: Fn(&ContractSet) -> ContractSet,
{
    let mut found = Vec::new();
    for base in all_subsets(u) {
        for &x in u.iter().filter(|x| !base.contains(x)) {
            if choose(&base.with(x)).len() < choose(&base).len() {
                found.push((base.as_slice().to_vec(), x));
            }
        }
    }
    found.into_iter().min()
}

/// Random dimensions `(seekers, states, waits)` with the contract count
/// `seekers * states * waits` at most `max_contracts`.
pub fn random_dims(
    rng: &mut ChaCha8Rng,
    max_seekers: usize,
    max_states: usize,
    max_waits: usize,
    max_contracts: usize,
) -> (usize, usize, usize) {
    loop {
        let a = rng.random_range(1..=max_seekers);
        let m = rng.random_range(1..=max_states);
        let w = rng.random_range(1..=max_waits);
        if a * m * w <= max_contracts {
            return (a, m, w);
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random feasible allocation. Seekers sometimes take unlisted contracts
/// so individual rationality is exercised too.
pub fn random_allocation(inst: &Instance, rng: &mut ChaCha8Rng) -> ContractSet {
    let mut out = ContractSet::new();
    let nw = inst.waits().len();
    let mut used = vec![0usize; inst.states().len() * nw];
    for a in inst.seeker_ixs() {
        let pref = inst.preference(a);
        let pick = match rng.random_range(0..10) {
            0..=1 => None,
            2 => {
                let terms = inst.terms();
                Some(terms[rng.random_range(0..terms.len())].for_seeker(a))
            }
            _ => {
                let listed: Vec<Contract> = pref.contracts().collect();
                if listed.is_empty() {
                    None
                } else {
                    Some(listed[rng.random_range(0..listed.len())])
                }
            }
        };
        if let Some(x) = pick {
            let cell = x.state.0 * nw + x.wait.0;
            if used[cell] < inst.state(x.state).capacity(x.wait) {
                used[cell] += 1;
                out.insert(x);
            }
        }
    }
    out
}

/// Stability read straight off the definition, using the reference rule.
pub fn ref_is_stable(inst: &Instance, set: &ContractSet) -> bool {
    let listed = |x: &Contract| inst.preference(x.seeker).ranking().contains(&x.term());
    if !set.iter().all(listed) {
        return false;
    }
    for m in inst.state_ixs() {
        let held = set.at_state(m);
        if ref_choose(inst, m, &held, false) != held {
            return false;
        }
    }
    for a in inst.seeker_ixs() {
        let ranking = inst.preference(a).ranking();
        let current = set.of_seeker(a).next().and_then(|y| ranking.iter().position(|t| *t == y.term()));
        let better = &ranking[..current.unwrap_or(ranking.len())];
        for t in better {
            let x = t.for_seeker(a);
            let offered = set.at_state(t.state).with(x);
            if ref_choose(inst, t.state, &offered, false).contains(&x) {
                return false;
            }
        }
    }
    true
}
