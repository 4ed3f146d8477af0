//! Problem data for an asylum seeker matching problem. Seekers carry burden
//! sizes. Each member state has a quota, per-wait capacities and a priority
//! order. Wait times form a finite axis, and each seeker submits one ranking
//! that may be truncated.
//!
//! Entities are addressed by dense indices (`SeekerIx`, `StateIx`, `WaitIx`)
//! assigned in canonical order: seekers and states sorted by id, wait times
//! ascending. Because of that, the derived ordering on [`Contract`] is the
//! canonical serialization order.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ValidationError, ValidationErrors};
use crate::format::{CapacityDoc, InstanceDoc, PreferenceDoc, SeekerDoc, StateDoc, TermDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeekerIx(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateIx(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WaitIx(pub usize);

/// A non-negative rational wait time. Stored exactly so ordering and equality
/// never depend on floating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WaitTime(Ratio<u64>);

impl WaitTime {
    pub fn new(numer: u64, denom: u64) -> Option<Self> {
        (denom != 0).then(|| WaitTime(Ratio::new(numer, denom)))
    }

    pub fn integer(value: u64) -> Self {
        WaitTime(Ratio::from_integer(value))
    }
}

impl fmt::Display for WaitTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for WaitTime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |part: &str| {
            let part = part.trim();
            if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("invalid wait time {s:?}"));
            }
            part.parse::<u64>().map_err(|e| format!("invalid wait time {s:?}: {e}"))
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let (n, d) = (parse(n)?, parse(d)?);
                WaitTime::new(n, d).ok_or_else(|| format!("zero denominator in wait time {s:?}"))
            }
            None => Ok(WaitTime::integer(parse(s)?)),
        }
    }
}

/// A contract `(seeker, state, wait)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Contract {
    pub seeker: SeekerIx,
    pub state: StateIx,
    pub wait: WaitIx,
}

impl Contract {
    pub fn new(seeker: SeekerIx, state: StateIx, wait: WaitIx) -> Self {
        Contract { seeker, state, wait }
    }

    pub fn term(&self) -> Term {
        Term { state: self.state, wait: self.wait }
    }
}

/// A `(state, wait)` pair, the object seekers rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub state: StateIx,
    pub wait: WaitIx,
}

impl Term {
    pub fn new(state: StateIx, wait: WaitIx) -> Self {
        Term { state, wait }
    }

    pub fn for_seeker(self, seeker: SeekerIx) -> Contract {
        Contract::new(seeker, self.state, self.wait)
    }
}

/// A set of contracts kept sorted in canonical order. Sets in this crate are
/// tiny, so a sorted vector beats a tree on every operation that matters.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContractSet(Vec<Contract>);

impl ContractSet {
    pub fn new() -> Self {
        ContractSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &Contract) -> bool {
        self.0.binary_search(x).is_ok()
    }

    /// Returns `true` if `x` was not already present.
    pub fn insert(&mut self, x: Contract) -> bool {
        match self.0.binary_search(&x) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, x);
                true
            }
        }
    }

    pub fn remove(&mut self, x: &Contract) -> bool {
        match self.0.binary_search(x) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn with(&self, x: Contract) -> ContractSet {
        let mut out = self.clone();
        out.insert(x);
        out
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Contract> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Contract] {
        &self.0
    }

    pub fn is_subset(&self, other: &ContractSet) -> bool {
        self.0.iter().all(|x| other.contains(x))
    }

    pub fn union(&self, other: &ContractSet) -> ContractSet {
        self.0.iter().chain(other.0.iter()).copied().collect()
    }

    pub fn at_state(&self, state: StateIx) -> ContractSet {
        ContractSet(self.0.iter().copied().filter(|x| x.state == state).collect())
    }

    pub fn of_seeker(&self, seeker: SeekerIx) -> impl Iterator<Item = &Contract> + '_ {
        self.0.iter().filter(move |x| x.seeker == seeker)
    }

    pub fn has_seeker(&self, seeker: SeekerIx) -> bool {
        self.0.iter().any(|x| x.seeker == seeker)
    }

    /// Distinct seekers named by the contracts, ascending.
    pub fn seekers(&self) -> Vec<SeekerIx> {
        let mut out: Vec<SeekerIx> = self.0.iter().map(|x| x.seeker).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// True if two distinct contracts name the same seeker.
    pub fn has_duplicate_seeker(&self) -> bool {
        let seekers = self.seekers();
        seekers.len() != self.0.len()
    }

    pub fn count_at(&self, state: StateIx, wait: WaitIx) -> usize {
        self.0.iter().filter(|x| x.state == state && x.wait == wait).count()
    }
}

impl FromIterator<Contract> for ContractSet {
    fn from_iter<I: IntoIterator<Item = Contract>>(iter: I) -> Self {
        let mut v: Vec<Contract> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ContractSet(v)
    }
}

impl<'a> IntoIterator for &'a ContractSet {
    type Item = &'a Contract;
    type IntoIter = std::slice::Iter<'a, Contract>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsylumSeeker {
    pub id: String,
    pub burden: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberState {
    pub id: String,
    pub quota: u64,
    capacities: Vec<usize>,
    priority: Vec<SeekerIx>,
    // rank[seeker] = position in `priority`, 0 is best
    rank: Vec<usize>,
}

impl MemberState {
    pub fn capacity(&self, wait: WaitIx) -> usize {
        self.capacities[wait.0]
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn priority(&self) -> &[SeekerIx] {
        &self.priority
    }

    pub fn rank(&self, seeker: SeekerIx) -> usize {
        self.rank[seeker.0]
    }

    /// `a` has strictly higher priority than `b`.
    pub fn ranks_above(&self, a: SeekerIx, b: SeekerIx) -> bool {
        self.rank[a.0] < self.rank[b.0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaitTimeAxis {
    times: Vec<WaitTime>,
}

impl WaitTimeAxis {
    pub fn times(&self) -> &[WaitTime] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn index_of(&self, time: &WaitTime) -> Option<WaitIx> {
        self.times.binary_search(time).ok().map(WaitIx)
    }
}

/// A seeker's strict ranking over `(state, wait)` terms, best first. Terms
/// not listed are unacceptable: they rank below being unmatched.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Preference {
    seeker: SeekerIx,
    ranking: Vec<Term>,
}

/// Position of an outcome in a seeker's ranking; smaller is better.
/// Listed terms occupy `0..len`, unmatched is `len`, unlisted is `len + 1`.
pub type OutcomeRank = usize;

impl Preference {
    pub fn seeker(&self) -> SeekerIx {
        self.seeker
    }

    pub fn ranking(&self) -> &[Term] {
        &self.ranking
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    pub fn position(&self, term: Term) -> Option<usize> {
        self.ranking.iter().position(|t| *t == term)
    }

    pub fn is_listed(&self, x: &Contract) -> bool {
        x.seeker == self.seeker && self.position(x.term()).is_some()
    }

    /// The seeker's listed contracts, best first.
    pub fn contracts(&self) -> impl Iterator<Item = Contract> + '_ {
        self.ranking.iter().map(move |t| t.for_seeker(self.seeker))
    }

    pub fn outcome_rank(&self, outcome: Option<&Contract>) -> OutcomeRank {
        match outcome {
            None => self.ranking.len(),
            Some(x) => {
                if x.seeker != self.seeker {
                    return self.ranking.len() + 1;
                }
                self.position(x.term()).unwrap_or(self.ranking.len() + 1)
            }
        }
    }

    /// Strict preference between two outcomes, `None` meaning unmatched.
    pub fn prefers(&self, x: Option<&Contract>, y: Option<&Contract>) -> Result<bool, Error> {
        for c in [x, y].into_iter().flatten() {
            if c.seeker != self.seeker {
                return Err(Error::WrongSeeker { expected: self.seeker, found: c.seeker });
            }
        }
        Ok(self.outcome_rank(x) < self.outcome_rank(y))
    }
}

#[derive(Debug)]
struct Market {
    seekers: Vec<AsylumSeeker>,
    states: Vec<MemberState>,
    waits: WaitTimeAxis,
}

/// Which invariants to enforce when building an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Checks {
    /// Reference integrity, uniqueness, positive burdens, complete priorities.
    Structural,
    /// Structural checks plus aggregate quota and per-state capacity sufficiency.
    Full,
}

/// A problem instance. The market data is shared, so swapping one seeker's
/// ranking (as the manipulation audits do constantly) is cheap.
#[derive(Debug, Clone)]
pub struct Instance {
    market: Arc<Market>,
    preferences: Vec<Preference>,
}

/// Checks every invariant and returns the instance, or all violations.
pub fn validate_instance(doc: &InstanceDoc) -> Result<Instance, ValidationErrors> {
    Instance::from_doc(doc, Checks::Full)
}

impl Instance {
    pub fn from_doc(doc: &InstanceDoc, checks: Checks) -> Result<Instance, ValidationErrors> {
        let mut errors = Vec::new();

        let mut seeker_docs: Vec<&SeekerDoc> = doc.seekers.iter().collect();
        seeker_docs.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in seeker_docs.windows(2) {
            if pair[0].id == pair[1].id {
                errors.push(ValidationError::DuplicateId { kind: "seeker", id: pair[0].id.clone() });
            }
        }
        seeker_docs.dedup_by(|a, b| a.id == b.id);
        let seekers: Vec<AsylumSeeker> = seeker_docs
            .iter()
            .map(|s| {
                if s.burden == 0 {
                    errors.push(ValidationError::ZeroBurden { seeker: s.id.clone() });
                }
                AsylumSeeker { id: s.id.clone(), burden: s.burden }
            })
            .collect();
        let seeker_ix = |id: &str| seekers.binary_search_by(|s| s.id.as_str().cmp(id)).ok().map(SeekerIx);

        let mut times = Vec::with_capacity(doc.waits.len());
        for w in &doc.waits {
            match w.parse::<WaitTime>() {
                Ok(t) => times.push(t),
                Err(msg) => errors.push(ValidationError::BadWaitTime { text: w.clone(), reason: msg }),
            }
        }
        if times.windows(2).any(|p| p[0] >= p[1]) {
            errors.push(ValidationError::UnsortedWaits);
        }
        times.sort();
        times.dedup();
        let waits = WaitTimeAxis { times };
        let wait_ix = |text: &str, errors: &mut Vec<ValidationError>, context: &str| -> Option<WaitIx> {
            match text.parse::<WaitTime>() {
                Ok(t) => {
                    let ix = waits.index_of(&t);
                    if ix.is_none() {
                        errors.push(ValidationError::DanglingReference {
                            context: context.to_string(),
                            id: text.to_string(),
                        });
                    }
                    ix
                }
                Err(reason) => {
                    errors.push(ValidationError::BadWaitTime { text: text.to_string(), reason });
                    None
                }
            }
        };

        let mut state_docs: Vec<&StateDoc> = doc.states.iter().collect();
        state_docs.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in state_docs.windows(2) {
            if pair[0].id == pair[1].id {
                errors.push(ValidationError::DuplicateId { kind: "state", id: pair[0].id.clone() });
            }
        }
        state_docs.dedup_by(|a, b| a.id == b.id);

        let mut states = Vec::with_capacity(state_docs.len());
        for s in &state_docs {
            let mut capacities = vec![0usize; waits.len()];
            let mut seen = vec![false; waits.len()];
            for cap in &s.capacities {
                let ctx = format!("state {} capacity", s.id);
                if let Some(w) = wait_ix(&cap.wait, &mut errors, &ctx) {
                    if seen[w.0] {
                        errors.push(ValidationError::DuplicateCapacity { state: s.id.clone(), wait: cap.wait.clone() });
                    }
                    seen[w.0] = true;
                    capacities[w.0] = cap.slots;
                }
            }
            let mut priority = Vec::with_capacity(s.priority.len());
            let mut listed = vec![false; seekers.len()];
            for id in &s.priority {
                match seeker_ix(id) {
                    Some(a) => {
                        if listed[a.0] {
                            errors.push(ValidationError::PriorityNotPermutation {
                                state: s.id.clone(),
                                detail: format!("seeker {id} ranked twice"),
                            });
                        } else {
                            listed[a.0] = true;
                            priority.push(a);
                        }
                    }
                    None => errors.push(ValidationError::DanglingReference {
                        context: format!("state {} priority", s.id),
                        id: id.clone(),
                    }),
                }
            }
            for (i, seen) in listed.iter().enumerate() {
                if !seen {
                    errors.push(ValidationError::PriorityNotPermutation {
                        state: s.id.clone(),
                        detail: format!("seeker {} not ranked", seekers[i].id),
                    });
                }
            }
            let mut rank = vec![usize::MAX; seekers.len()];
            for (pos, a) in priority.iter().enumerate() {
                rank[a.0] = pos;
            }
            states.push(MemberState { id: s.id.clone(), quota: s.quota, capacities, priority, rank });
        }
        let state_ix = |id: &str| states.binary_search_by(|s: &MemberState| s.id.as_str().cmp(id)).ok().map(StateIx);

        let mut rankings: Vec<Option<Vec<Term>>> = vec![None; seekers.len()];
        for p in &doc.preferences {
            let Some(a) = seeker_ix(&p.seeker) else {
                errors.push(ValidationError::DanglingReference {
                    context: "preference".to_string(),
                    id: p.seeker.clone(),
                });
                continue;
            };
            if rankings[a.0].is_some() {
                errors.push(ValidationError::DuplicatePreference { seeker: p.seeker.clone() });
                continue;
            }
            let mut ranking: Vec<Term> = Vec::with_capacity(p.ranking.len());
            for t in &p.ranking {
                let ctx = format!("preference of {}", p.seeker);
                let m = state_ix(&t.state);
                if m.is_none() {
                    errors.push(ValidationError::DanglingReference { context: ctx.clone(), id: t.state.clone() });
                }
                let w = wait_ix(&t.wait, &mut errors, &ctx);
                if let (Some(m), Some(w)) = (m, w) {
                    let term = Term::new(m, w);
                    if ranking.contains(&term) {
                        errors.push(ValidationError::DuplicatePreferenceEntry {
                            seeker: p.seeker.clone(),
                            state: t.state.clone(),
                            wait: t.wait.clone(),
                        });
                    } else {
                        ranking.push(term);
                    }
                }
            }
            rankings[a.0] = Some(ranking);
        }
        let mut preferences = Vec::with_capacity(seekers.len());
        for (i, r) in rankings.into_iter().enumerate() {
            match r {
                Some(ranking) => preferences.push(Preference { seeker: SeekerIx(i), ranking }),
                None => {
                    errors.push(ValidationError::MissingPreference { seeker: seekers[i].id.clone() });
                    preferences.push(Preference { seeker: SeekerIx(i), ranking: Vec::new() });
                }
            }
        }

        let inst = Instance { market: Arc::new(Market { seekers, states, waits }), preferences };
        if checks == Checks::Full && errors.is_empty() {
            errors.extend(inst.market_violations());
        }
        if errors.is_empty() {
            Ok(inst)
        } else {
            Err(ValidationErrors(errors))
        }
    }

    /// Aggregate quota and per-state capacity violations. Empty for any
    /// instance built with [`Checks::Full`].
    pub fn market_violations(&self) -> Vec<ValidationError> {
        let mut errors = Vec::new();
        let total_burden: u64 = self.seekers().iter().map(|s| s.burden).sum();
        let total_quota: u64 = self.states().iter().map(|m| m.quota).sum();
        if total_quota < total_burden {
            errors.push(ValidationError::QuotaDeficit { total_quota, total_burden });
        }
        let n = self.seekers().len() as u64;
        for m in self.states() {
            let total: u64 = m.capacities.iter().map(|&r| r as u64).sum();
            let required = m.quota.max(n);
            if total < required {
                errors.push(ValidationError::CapacityDeficit { state: m.id.clone(), total_capacity: total, required });
            }
        }
        errors
    }

    pub fn validate(&self) -> Result<(), ValidationErrors> {
        let errors = self.market_violations();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ValidationErrors(errors))
        }
    }

    pub fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            seekers: self.seekers().iter().map(|s| SeekerDoc { id: s.id.clone(), burden: s.burden }).collect(),
            states: self
                .states()
                .iter()
                .map(|m| StateDoc {
                    id: m.id.clone(),
                    quota: m.quota,
                    capacities: self
                        .waits()
                        .times()
                        .iter()
                        .zip(&m.capacities)
                        .map(|(w, &slots)| CapacityDoc { wait: w.to_string(), slots })
                        .collect(),
                    priority: m.priority.iter().map(|a| self.seeker(*a).id.clone()).collect(),
                })
                .collect(),
            waits: self.waits().times().iter().map(|w| w.to_string()).collect(),
            preferences: self
                .preferences
                .iter()
                .map(|p| PreferenceDoc {
                    seeker: self.seeker(p.seeker).id.clone(),
                    ranking: p
                        .ranking
                        .iter()
                        .map(|t| TermDoc {
                            state: self.state(t.state).id.clone(),
                            wait: self.wait_time(t.wait).to_string(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn seekers(&self) -> &[AsylumSeeker] {
        &self.market.seekers
    }

    pub fn states(&self) -> &[MemberState] {
        &self.market.states
    }

    pub fn waits(&self) -> &WaitTimeAxis {
        &self.market.waits
    }

    pub fn seeker(&self, a: SeekerIx) -> &AsylumSeeker {
        &self.market.seekers[a.0]
    }

    pub fn state(&self, m: StateIx) -> &MemberState {
        &self.market.states[m.0]
    }

    pub fn wait_time(&self, w: WaitIx) -> WaitTime {
        self.market.waits.times[w.0]
    }

    pub fn burden(&self, a: SeekerIx) -> u64 {
        self.market.seekers[a.0].burden
    }

    pub fn seeker_ixs(&self) -> impl Iterator<Item = SeekerIx> {
        (0..self.market.seekers.len()).map(SeekerIx)
    }

    pub fn state_ixs(&self) -> impl Iterator<Item = StateIx> {
        (0..self.market.states.len()).map(StateIx)
    }

    pub fn wait_ixs(&self) -> impl Iterator<Item = WaitIx> {
        (0..self.market.waits.len()).map(WaitIx)
    }

    /// All `(state, wait)` terms in canonical order.
    pub fn terms(&self) -> Vec<Term> {
        self.state_ixs().flat_map(|m| self.wait_ixs().map(move |w| Term::new(m, w))).collect()
    }

    pub fn find_seeker(&self, id: &str) -> Result<SeekerIx, Error> {
        self.market
            .seekers
            .binary_search_by(|s| s.id.as_str().cmp(id))
            .map(SeekerIx)
            .map_err(|_| Error::UnknownSeeker(id.to_string()))
    }

    pub fn find_state(&self, id: &str) -> Result<StateIx, Error> {
        self.market
            .states
            .binary_search_by(|s| s.id.as_str().cmp(id))
            .map(StateIx)
            .map_err(|_| Error::UnknownState(id.to_string()))
    }

    pub fn find_wait(&self, text: &str) -> Result<WaitIx, Error> {
        text.parse::<WaitTime>()
            .ok()
            .and_then(|t| self.waits().index_of(&t))
            .ok_or_else(|| Error::UnknownWaitTime(text.to_string()))
    }

    /// Looks up a contract by ids, e.g. `("a1", "m", "1/2")`.
    pub fn contract(&self, seeker: &str, state: &str, wait: &str) -> Result<Contract, Error> {
        Ok(Contract::new(self.find_seeker(seeker)?, self.find_state(state)?, self.find_wait(wait)?))
    }

    pub fn preferences(&self) -> &[Preference] {
        &self.preferences
    }

    pub fn preference(&self, a: SeekerIx) -> &Preference {
        &self.preferences[a.0]
    }

    /// Builds a ranking for `seeker`, rejecting repeated terms.
    pub fn make_preference(&self, seeker: SeekerIx, ranking: Vec<Term>) -> Result<Preference, Error> {
        if seeker.0 >= self.seekers().len() {
            return Err(Error::UnknownSeeker(format!("#{}", seeker.0)));
        }
        for (i, t) in ranking.iter().enumerate() {
            if t.state.0 >= self.states().len() || t.wait.0 >= self.waits().len() {
                return Err(Error::Invalid(format!("term {t:?} out of range")));
            }
            if ranking[..i].contains(t) {
                return Err(Error::Invalid(format!(
                    "term {} listed twice for {}",
                    self.term_label(*t),
                    self.seeker(seeker).id
                )));
            }
        }
        Ok(Preference { seeker, ranking })
    }

    /// A copy of this instance with one seeker's ranking replaced.
    pub fn with_preference(&self, pref: Preference) -> Instance {
        let mut out = self.clone();
        let a = pref.seeker;
        out.preferences[a.0] = pref;
        out
    }

    /// Every contract `A × M × W`, canonical order.
    pub fn full_contract_universe(&self) -> ContractSet {
        let mut out = Vec::with_capacity(self.seekers().len() * self.states().len() * self.waits().len());
        for a in self.seeker_ixs() {
            for m in self.state_ixs() {
                for w in self.wait_ixs() {
                    out.push(Contract::new(a, m, w));
                }
            }
        }
        ContractSet(out)
    }

    /// Contracts that appear in some seeker's ranking.
    pub fn listed_contracts(&self) -> ContractSet {
        self.preferences.iter().flat_map(|p| p.contracts()).collect()
    }

    pub fn contract_label(&self, x: &Contract) -> String {
        format!("({},{},{})", self.seeker(x.seeker).id, self.state(x.state).id, self.wait_time(x.wait))
    }

    pub fn term_label(&self, t: Term) -> String {
        format!("({},{})", self.state(t.state).id, self.wait_time(t.wait))
    }

    pub fn set_label(&self, set: &ContractSet) -> String {
        let parts: Vec<String> = set.iter().map(|x| self.contract_label(x)).collect();
        format!("{{{}}}", parts.join(", "))
    }

    pub fn outcome_label(&self, x: Option<&Contract>) -> String {
        x.map_or_else(|| "unmatched".to_string(), |x| self.contract_label(x))
    }

    pub fn ranking_label(&self, pref: &Preference) -> String {
        if pref.is_empty() {
            return "(empty)".to_string();
        }
        pref.ranking.iter().map(|t| self.term_label(*t)).collect::<Vec<_>>().join(" - ")
    }

    /// Every seeker has the same burden size.
    pub fn is_homogeneous(&self) -> bool {
        self.seekers().windows(2).all(|p| p[0].burden == p[1].burden)
    }

    /// `a π_m a' ⟹ s(a) ≥ s(a')` at state `m`.
    pub fn has_large_burden_priority(&self, m: StateIx) -> bool {
        let st = self.state(m);
        st.priority.windows(2).all(|p| self.burden(p[0]) >= self.burden(p[1]))
    }

    /// `a π_m a' ⟹ s(a) ≤ s(a')` at state `m`.
    pub fn has_small_burden_priority(&self, m: StateIx) -> bool {
        let st = self.state(m);
        st.priority.windows(2).all(|p| self.burden(p[0]) <= self.burden(p[1]))
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.market, &other.market)
            || (self.market.seekers == other.market.seekers
                && self.market.states == other.market.states
                && self.market.waits == other.market.waits))
            && self.preferences == other.preferences
    }
}

impl Eq for Instance {}

/// A feasible set of contracts: at most one per seeker and no `(state, wait)`
/// cell over capacity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Allocation(ContractSet);

impl Allocation {
    pub fn empty() -> Self {
        Allocation(ContractSet::new())
    }

    pub fn new(inst: &Instance, contracts: ContractSet) -> Result<Allocation, Error> {
        if let Some(reason) = allocation_violation(inst, &contracts) {
            return Err(Error::InfeasibleAllocation(reason));
        }
        Ok(Allocation(contracts))
    }

    pub fn contracts(&self) -> &ContractSet {
        &self.0
    }

    pub fn into_contracts(self) -> ContractSet {
        self.0
    }

    pub fn of(&self, seeker: SeekerIx) -> Option<&Contract> {
        self.0.iter().find(|x| x.seeker == seeker)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One pass over the set; `None` when the allocation invariants hold.
pub fn allocation_violation(inst: &Instance, set: &ContractSet) -> Option<String> {
    let mut per_seeker = vec![0usize; inst.seekers().len()];
    let nw = inst.waits().len();
    let mut per_cell = vec![0usize; inst.states().len() * nw];
    for x in set {
        if x.seeker.0 >= inst.seekers().len() || x.state.0 >= inst.states().len() || x.wait.0 >= nw {
            return Some(format!("contract {x:?} references an undeclared entity"));
        }
        per_seeker[x.seeker.0] += 1;
        if per_seeker[x.seeker.0] > 1 {
            return Some(format!("seeker {} holds more than one contract", inst.seeker(x.seeker).id));
        }
        let cell = x.state.0 * nw + x.wait.0;
        per_cell[cell] += 1;
        if per_cell[cell] > inst.state(x.state).capacity(x.wait) {
            return Some(format!("state {} over capacity at wait {}", inst.state(x.state).id, inst.wait_time(x.wait)));
        }
    }
    None
}
