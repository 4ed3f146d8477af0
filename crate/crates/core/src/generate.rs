//! Seeded random instances for property tests and sweeps.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::format::{CapacityDoc, InstanceDoc, PreferenceDoc, SeekerDoc, StateDoc, TermDoc};
use crate::instance::{validate_instance, Instance, WaitTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Profile {
    /// Every seeker has the same burden size.
    Homogeneous,
    /// Every state ranks larger burdens weakly first.
    LargePriority,
    /// Every state ranks smaller burdens weakly first.
    SmallPriority,
    Unrestricted,
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "homogeneous" => Ok(Profile::Homogeneous),
            "large-priority" => Ok(Profile::LargePriority),
            "small-priority" => Ok(Profile::SmallPriority),
            "unrestricted" => Ok(Profile::Unrestricted),
            _ => Err(format!(
                "unknown profile {s:?} (expected homogeneous, large-priority, small-priority or unrestricted)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub seekers: usize,
    pub states: usize,
    pub waits: usize,
    /// Largest burden size drawn; 1 makes every instance homogeneous.
    pub max_burden: u64,
}

impl Dims {
    pub fn new(seekers: usize, states: usize, waits: usize) -> Self {
        Dims { seekers, states, waits, max_burden: 3 }
    }
}

impl std::str::FromStr for Dims {
    type Err = String;

    /// `AxMxW`, e.g. `3x2x2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('x').collect();
        if parts.len() != 3 {
            return Err(format!("dims {s:?} must look like 3x2x2"));
        }
        let n: Vec<usize> = parts
            .iter()
            .map(|p| p.parse::<usize>().map_err(|e| format!("bad dims {s:?}: {e}")))
            .collect::<Result<_, _>>()?;
        Ok(Dims::new(n[0], n[1], n[2]))
    }
}

/// Wait times are drawn from multiples of 1/2 up to this many steps.
const WAIT_GRID: u64 = 12;

/// A valid instance determined entirely by `seed`, `profile` and `dims`.
pub fn generate_instance(seed: u64, profile: Profile, dims: Dims) -> Result<Instance, Error> {
    if dims.seekers > 0 && (dims.states == 0 || dims.waits == 0) {
        return Err(Error::InfeasibleDims("seekers need at least one state and one wait time".to_string()));
    }
    if dims.waits as u64 > WAIT_GRID {
        return Err(Error::InfeasibleDims(format!("at most {WAIT_GRID} wait times")));
    }
    if dims.max_burden == 0 {
        return Err(Error::InfeasibleDims("burden sizes are at least 1".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let seekers: Vec<String> = (1..=dims.seekers).map(|i| format!("a{i}")).collect();
    let states: Vec<String> = (1..=dims.states).map(|i| format!("m{i}")).collect();

    let burdens: Vec<u64> = match profile {
        Profile::Homogeneous => {
            let s = rng.random_range(1..=dims.max_burden);
            vec![s; dims.seekers]
        }
        _ => (0..dims.seekers).map(|_| rng.random_range(1..=dims.max_burden)).collect(),
    };

    let mut grid: Vec<u64> = (1..=WAIT_GRID).collect();
    grid.shuffle(&mut rng);
    let mut steps: Vec<u64> = grid[..dims.waits].to_vec();
    steps.sort_unstable();
    let waits: Vec<String> =
        steps.iter().map(|&k| WaitTime::new(k, 2).expect("nonzero denominator").to_string()).collect();

    let total_burden: u64 = burdens.iter().sum();
    let mut quotas: Vec<u64> = (0..dims.states).map(|_| rng.random_range(0..=total_burden.max(1))).collect();
    while quotas.iter().sum::<u64>() < total_burden {
        let i = rng.random_range(0..dims.states);
        quotas[i] += 1;
    }

    let n = dims.seekers as u64;
    let mut state_docs = Vec::with_capacity(dims.states);
    for (i, id) in states.iter().enumerate() {
        let mut slots: Vec<usize> = (0..dims.waits).map(|_| rng.random_range(0..=dims.seekers.max(1))).collect();
        let required = quotas[i].max(n) as usize;
        while slots.iter().sum::<usize>() < required {
            let w = rng.random_range(0..dims.waits);
            slots[w] += 1;
        }
        let mut order: Vec<usize> = (0..dims.seekers).collect();
        order.shuffle(&mut rng);
        match profile {
            Profile::LargePriority => order.sort_by_key(|&a| std::cmp::Reverse(burdens[a])),
            Profile::SmallPriority => order.sort_by_key(|&a| burdens[a]),
            _ => {}
        }
        state_docs.push(StateDoc {
            id: id.clone(),
            quota: quotas[i],
            capacities: waits.iter().zip(&slots).map(|(w, &s)| CapacityDoc { wait: w.clone(), slots: s }).collect(),
            priority: order.iter().map(|&a| seekers[a].clone()).collect(),
        });
    }

    let terms: Vec<(usize, usize)> = (0..dims.states).flat_map(|m| (0..dims.waits).map(move |w| (m, w))).collect();
    let mut preferences = Vec::with_capacity(dims.seekers);
    for id in &seekers {
        let len = if terms.is_empty() { 0 } else { rng.random_range(1..=terms.len()) };
        let ranking: Vec<TermDoc> = terms
            .choose_multiple(&mut rng, len)
            .map(|&(m, w)| TermDoc { state: states[m].clone(), wait: waits[w].clone() })
            .collect();
        preferences.push(PreferenceDoc { seeker: id.clone(), ranking });
    }

    let doc = InstanceDoc {
        seekers: seekers.iter().zip(&burdens).map(|(id, &burden)| SeekerDoc { id: id.clone(), burden }).collect(),
        states: state_docs,
        waits,
        preferences,
    };
    Ok(validate_instance(&doc)?)
}
