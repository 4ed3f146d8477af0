//! Strategy-proofness and obvious-manipulability audits.
//!
//! A seeker's possible reports are the strict rankings of bounded length
//! over a pool of terms. They are enumerated depth-first, so the rankings
//! extending a prefix form a contiguous block of the enumeration. When the
//! mechanism reports that the seeker's ranking tail was never read, every
//! extension of the prefix yields the same run and the block is settled by
//! one evaluation.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{AuditReport, AuditStats, Witness};
use crate::error::Error;
use crate::instance::{Contract, Instance, OutcomeRank, SeekerIx, Term};
use crate::mechanism::Mechanism;

pub const DEFAULT_DOMAIN_BOUND: u128 = 10_000_000;

/// The reports a seeker may submit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MisreportDomain {
    /// Rankings of at most `max_len` of the seeker's truly listed terms.
    Listed { max_len: usize },
    /// Rankings of at most `max_len` terms drawn from every (state, wait).
    AllTerms { max_len: usize },
    /// Every strict ranking of every subset of (state, wait) terms.
    Full,
}

impl Default for MisreportDomain {
    fn default() -> Self {
        MisreportDomain::Listed { max_len: 4 }
    }
}

impl std::str::FromStr for MisreportDomain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let len = |t: &str| t.parse::<usize>().map_err(|e| format!("bad length in {s:?}: {e}"));
        match s {
            "full" => Ok(MisreportDomain::Full),
            "listed" => Ok(MisreportDomain::Listed { max_len: 4 }),
            "all" => Ok(MisreportDomain::AllTerms { max_len: 2 }),
            _ => {
                if let Some(n) = s.strip_prefix("listed:") {
                    Ok(MisreportDomain::Listed { max_len: len(n)? })
                } else if let Some(n) = s.strip_prefix("all:") {
                    Ok(MisreportDomain::AllTerms { max_len: len(n)? })
                } else {
                    Err(format!("unknown domain {s:?} (expected listed[:n], all[:n] or full)"))
                }
            }
        }
    }
}

impl std::fmt::Display for MisreportDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MisreportDomain::Listed { max_len } => write!(f, "rankings of up to {max_len} truly listed terms"),
            MisreportDomain::AllTerms { max_len } => write!(f, "rankings of up to {max_len} terms"),
            MisreportDomain::Full => write!(f, "all rankings"),
        }
    }
}

impl MisreportDomain {
    fn pool(&self, inst: &Instance, a: SeekerIx) -> Vec<Term> {
        match self {
            MisreportDomain::Listed { .. } => inst.preference(a).ranking().to_vec(),
            _ => inst.terms(),
        }
    }

    fn max_len(&self, pool: usize) -> usize {
        match self {
            MisreportDomain::Listed { max_len } | MisreportDomain::AllTerms { max_len } => (*max_len).min(pool),
            MisreportDomain::Full => pool,
        }
    }

    /// Number of rankings in the domain for seeker `a`.
    pub fn size(&self, inst: &Instance, a: SeekerIx) -> u128 {
        let n = self.pool(inst, a).len();
        subtree_size(n, self.max_len(n), 0)
    }

    /// All rankings, depth-first.
    pub fn rankings(&self, inst: &Instance, a: SeekerIx) -> Vec<Vec<Term>> {
        let pool = self.pool(inst, a);
        let max_len = self.max_len(pool.len());
        let mut out = Vec::new();
        fn walk(pool: &[Term], max_len: usize, cur: &mut Vec<Term>, out: &mut Vec<Vec<Term>>) {
            out.push(cur.clone());
            if cur.len() == max_len {
                return;
            }
            for t in pool {
                if !cur.contains(t) {
                    cur.push(*t);
                    walk(pool, max_len, cur, out);
                    cur.pop();
                }
            }
        }
        walk(&pool, max_len, &mut Vec::new(), &mut out);
        out
    }
}

/// Rankings extending a prefix of length `depth`, the prefix included.
fn subtree_size(pool: usize, max_len: usize, depth: usize) -> u128 {
    let mut total: u128 = 0;
    let mut perms: u128 = 1;
    for k in 0..=max_len.saturating_sub(depth) {
        if k > 0 {
            perms *= (pool - depth - (k - 1)) as u128;
        }
        total += perms;
    }
    total
}

/// Worst and best outcomes over the others' reports, judged by the true
/// ranking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Extremes {
    pub worst_truthful: Option<Contract>,
    pub worst_misreport: Option<Contract>,
    pub best_truthful: Option<Contract>,
    pub best_misreport: Option<Contract>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManipulationReport {
    pub seeker: SeekerIx,
    pub true_pref: Vec<Term>,
    pub misreport: Vec<Term>,
    /// Reports of every seeker in the profile where the misreport pays off,
    /// the manipulator's entry holding her true ranking.
    pub profile_of_others: Vec<Vec<Term>>,
    pub truthful_outcome: Option<Contract>,
    pub manipulated_outcome: Option<Contract>,
    pub extremes: Option<Extremes>,
    pub obvious: bool,
    /// Rankings in the domain known to behave exactly like `misreport`.
    pub equivalent_reports: u64,
}

impl ManipulationReport {
    pub fn describe(&self, inst: &Instance) -> String {
        let ranking = |r: &[Term]| {
            if r.is_empty() {
                "(empty)".to_string()
            } else {
                r.iter().map(|t| inst.term_label(*t)).collect::<Vec<_>>().join(" - ")
            }
        };
        let o = |x: &Option<Contract>| inst.outcome_label(x.as_ref());
        let mut out = format!(
            "manipulation by {}: report {} instead of {} yields {} instead of {}",
            inst.seeker(self.seeker).id,
            ranking(&self.misreport),
            ranking(&self.true_pref),
            o(&self.manipulated_outcome),
            o(&self.truthful_outcome)
        );
        if self.equivalent_reports > 1 {
            let _ = write!(out, " ({} equivalent reports)", self.equivalent_reports);
        }
        if let Some(e) = &self.extremes {
            let _ = write!(
                out,
                "; worst {} vs {}, best {} vs {}; {}",
                o(&e.worst_misreport),
                o(&e.worst_truthful),
                o(&e.best_misreport),
                o(&e.best_truthful),
                if self.obvious { "obvious" } else { "not obvious" }
            );
        }
        out
    }
}

struct Node {
    ranking: Vec<Term>,
    outcome: Option<Contract>,
    /// Position in the depth-first enumeration.
    start: usize,
    /// Rankings settled by this evaluation.
    covers: usize,
}

/// Evaluates the mechanism on `a`'s reports, pruning extension blocks the
/// mechanism marks as irrelevant.
fn explore<M: Mechanism + ?Sized>(
    inst: &Instance,
    mech: &M,
    a: SeekerIx,
    pool: &[Term],
    max_len: usize,
) -> Result<Vec<Node>, Error> {
    let mut walk = Walk { inst, mech, a, pool, max_len, cur: Vec::new(), index: 0, nodes: Vec::new() };
    walk.visit()?;
    Ok(walk.nodes)
}

struct Walk<'a, M: ?Sized> {
    inst: &'a Instance,
    mech: &'a M,
    a: SeekerIx,
    pool: &'a [Term],
    max_len: usize,
    cur: Vec<Term>,
    index: usize,
    nodes: Vec<Node>,
}

impl<M: Mechanism + ?Sized> Walk<'_, M> {
    fn visit(&mut self) -> Result<(), Error> {
        let (inst, a) = (self.inst, self.a);
        let pref = inst.make_preference(a, self.cur.clone())?;
        let result = self.mech.run(&inst.with_preference(pref))?;
        let outcome = result.allocation.of(a).copied();
        let depth = self.cur.len();
        let settled = depth < self.max_len && result.tail_sensitive.as_ref().is_some_and(|s| !s[a.0]);
        let covers = if settled { subtree_size(self.pool.len(), self.max_len, depth) as usize } else { 1 };
        self.nodes.push(Node { ranking: self.cur.clone(), outcome, start: self.index, covers });
        self.index += covers;
        if settled || depth == self.max_len {
            return Ok(());
        }
        for &t in self.pool {
            if !self.cur.contains(&t) {
                self.cur.push(t);
                self.visit()?;
                self.cur.pop();
            }
        }
        Ok(())
    }
}

/// Finds every profitable misreport at the instance's profile. Reports
/// whose extensions behave identically are listed once, with the count of
/// equivalent reports.
pub fn audit_strategy_proofness<M: Mechanism + ?Sized>(
    inst: &Instance,
    mech: &M,
    domain: MisreportDomain,
) -> Result<AuditReport, Error> {
    audit_strategy_proofness_bounded(inst, mech, domain, DEFAULT_DOMAIN_BOUND)
}

pub fn audit_strategy_proofness_bounded<M: Mechanism + ?Sized>(
    inst: &Instance,
    mech: &M,
    domain: MisreportDomain,
    bound: u128,
) -> Result<AuditReport, Error> {
    for a in inst.seeker_ixs() {
        let size = domain.size(inst, a);
        if size > bound {
            return Err(Error::DomainTooLarge { size, bound });
        }
    }
    let truthful = mech.run(inst)?.allocation;
    let seekers: Vec<SeekerIx> = inst.seeker_ixs().collect();
    let per_seeker = seekers
        .par_iter()
        .map(|&a| -> Result<(Vec<ManipulationReport>, AuditStats), Error> {
            let pool = domain.pool(inst, a);
            let max_len = domain.max_len(pool.len());
            let nodes = explore(inst, mech, a, &pool, max_len)?;
            let pref = inst.preference(a);
            let truth = truthful.of(a).copied();
            let truth_rank = pref.outcome_rank(truth.as_ref());
            let mut stats = AuditStats::default();
            let mut found = Vec::new();
            for node in nodes {
                stats.cases += 1;
                stats.covered += node.covers as u64 - 1;
                if pref.outcome_rank(node.outcome.as_ref()) < truth_rank {
                    stats.violations += node.covers as u64;
                    found.push(ManipulationReport {
                        seeker: a,
                        true_pref: pref.ranking().to_vec(),
                        misreport: node.ranking,
                        profile_of_others: inst.preferences().iter().map(|p| p.ranking().to_vec()).collect(),
                        truthful_outcome: truth,
                        manipulated_outcome: node.outcome,
                        extremes: None,
                        obvious: false,
                        equivalent_reports: node.covers as u64,
                    });
                }
            }
            Ok((found, stats))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut report = AuditReport::new("strategy-proofness");
    report.notes.push(format!("mechanism: {}", mech.name()));
    report.notes.push(format!("domain: {domain}"));
    for (found, stats) in per_seeker {
        report.stats.cases += stats.cases;
        report.stats.covered += stats.covered;
        report.stats.violations += stats.violations;
        report.witnesses.extend(found.into_iter().map(|m| Witness::Manipulation(Box::new(m))));
    }
    Ok(report)
}

/// Domains for the obvious-manipulation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NomConfig {
    /// Reports considered for the manipulating seeker.
    pub own: MisreportDomain,
    /// Reports considered for every other seeker; their true rankings are
    /// always included.
    pub others: MisreportDomain,
    pub bound: u128,
}

impl Default for NomConfig {
    fn default() -> Self {
        NomConfig {
            own: MisreportDomain::Listed { max_len: 4 },
            others: MisreportDomain::AllTerms { max_len: 2 },
            bound: DEFAULT_DOMAIN_BOUND,
        }
    }
}

/// Per profile: the manipulator's outcome for every own report and her
/// truthful outcome, then the count of mechanism runs and the count of
/// reports settled without a run.
type ProfileResult = (Vec<Option<Contract>>, Option<Contract>, u64, u64);

#[derive(Clone, Default)]
struct Tally {
    worst: Option<(OutcomeRank, Option<Contract>)>,
    best: Option<(OutcomeRank, Option<Contract>)>,
    /// First profile (index) where the report beats the truth.
    profitable: Option<(usize, Option<Contract>, Option<Contract>)>,
}

impl Tally {
    fn observe(&mut self, rank: OutcomeRank, outcome: Option<Contract>) {
        if self.worst.is_none_or(|(r, _)| rank > r) {
            self.worst = Some((rank, outcome));
        }
        if self.best.is_none_or(|(r, _)| rank < r) {
            self.best = Some((rank, outcome));
        }
    }
}

/// Every profitable misreport in the sweep over the others' reports, each
/// flagged obvious or not.
pub fn nom_sweep<M: Mechanism + ?Sized>(
    inst: &Instance,
    mech: &M,
    config: NomConfig,
) -> Result<(Vec<ManipulationReport>, AuditStats), Error> {
    let mut reports = Vec::new();
    let mut stats = AuditStats::default();
    for a in inst.seeker_ixs() {
        let (found, s) = sweep_seeker(inst, mech, config, a)?;
        reports.extend(found);
        stats.cases += s.cases;
        stats.covered += s.covered;
        stats.violations += s.violations;
    }
    Ok((reports, stats))
}

fn sweep_seeker<M: Mechanism + ?Sized>(
    inst: &Instance,
    mech: &M,
    config: NomConfig,
    a: SeekerIx,
) -> Result<(Vec<ManipulationReport>, AuditStats), Error> {
    let pref = inst.preference(a).clone();
    let pool = config.own.pool(inst, a);
    let max_len = config.own.max_len(pool.len());
    let own = config.own.rankings(inst, a);

    let mut other_domains: Vec<Vec<Vec<Term>>> = Vec::new();
    let mut total: u128 = own.len() as u128;
    for b in inst.seeker_ixs() {
        if b == a {
            other_domains.push(vec![pref.ranking().to_vec()]);
            continue;
        }
        let mut d = config.others.rankings(inst, b);
        let truth = inst.preference(b).ranking().to_vec();
        if !d.contains(&truth) {
            d.push(truth);
        }
        total = total.saturating_mul(d.len() as u128);
        other_domains.push(d);
    }
    if total > config.bound {
        return Err(Error::DomainTooLarge { size: total, bound: config.bound });
    }

    let mut profiles: Vec<Vec<usize>> = vec![Vec::new()];
    for d in &other_domains {
        profiles = profiles
            .into_iter()
            .flat_map(|p| {
                (0..d.len()).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }

    let truth_index = own.iter().position(|r| r.as_slice() == pref.ranking());
    let per_profile = profiles
        .par_iter()
        .map(|choice| -> Result<ProfileResult, Error> {
            let mut p = inst.clone();
            for (b, &i) in choice.iter().enumerate() {
                if b != a.0 {
                    p = p.with_preference(p.make_preference(SeekerIx(b), other_domains[b][i].clone())?);
                }
            }
            let nodes = explore(&p, mech, a, &pool, max_len)?;
            let mut outcomes = vec![None; own.len()];
            for n in &nodes {
                for slot in &mut outcomes[n.start..n.start + n.covers] {
                    *slot = n.outcome;
                }
            }
            let truth = match truth_index {
                Some(i) => outcomes[i],
                None => mech.run(&p)?.allocation.of(a).copied(),
            };
            Ok((outcomes, truth, nodes.len() as u64, (own.len() - nodes.len()) as u64))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut stats = AuditStats::default();
    let mut tallies = vec![Tally::default(); own.len()];
    let mut truth_tally = Tally::default();
    for (pi, (outcomes, truth, evaluated, covered)) in per_profile.iter().enumerate() {
        stats.cases += evaluated;
        stats.covered += covered;
        let truth_rank = pref.outcome_rank(truth.as_ref());
        truth_tally.observe(truth_rank, *truth);
        for (r, outcome) in outcomes.iter().enumerate() {
            let rank = pref.outcome_rank(outcome.as_ref());
            let t = &mut tallies[r];
            t.observe(rank, *outcome);
            if rank < truth_rank && t.profitable.is_none() {
                t.profitable = Some((pi, *truth, *outcome));
            }
        }
    }

    let mut found = Vec::new();
    for (r, t) in tallies.iter().enumerate() {
        if Some(r) == truth_index {
            continue;
        }
        let Some((pi, truthful_outcome, manipulated_outcome)) = t.profitable else {
            continue;
        };
        stats.violations += 1;
        let (worst, best) = (t.worst.expect("observed"), t.best.expect("observed"));
        let (truth_worst, truth_best) = (truth_tally.worst.expect("observed"), truth_tally.best.expect("observed"));
        let obvious = worst.0 < truth_worst.0 || best.0 < truth_best.0;
        let profile = &profiles[pi];
        found.push(ManipulationReport {
            seeker: a,
            true_pref: pref.ranking().to_vec(),
            misreport: own[r].clone(),
            profile_of_others: profile.iter().enumerate().map(|(b, &i)| other_domains[b][i].clone()).collect(),
            truthful_outcome,
            manipulated_outcome,
            extremes: Some(Extremes {
                worst_truthful: truth_worst.1,
                worst_misreport: worst.1,
                best_truthful: truth_best.1,
                best_misreport: best.1,
            }),
            obvious,
            equivalent_reports: 1,
        });
    }
    Ok((found, stats))
}

/// Obvious manipulations only: profitable misreports that improve the worst
/// or the best outcome over the others' reports.
pub fn audit_nom<M: Mechanism + ?Sized>(inst: &Instance, mech: &M, config: NomConfig) -> Result<AuditReport, Error> {
    let (found, stats) = nom_sweep(inst, mech, config)?;
    let mut report = AuditReport::new("non-obvious manipulability");
    report.notes.push(format!("mechanism: {}", mech.name()));
    report.notes.push(format!("own reports: {}; others' reports: {}", config.own, config.others));
    let subtle = found.iter().filter(|m| !m.obvious).count();
    report.notes.push(format!("profitable misreports: {} ({} not obvious)", found.len(), subtle));
    report.stats = stats;
    report.stats.violations = (found.len() - subtle) as u64;
    report.witnesses = found.into_iter().filter(|m| m.obvious).map(|m| Witness::Manipulation(Box::new(m))).collect();
    Ok(report)
}

impl AuditReport {
    pub fn manipulations(&self) -> impl Iterator<Item = &ManipulationReport> {
        self.witnesses.iter().filter_map(|w| match w {
            Witness::Manipulation(m) => Some(m.as_ref()),
            _ => None,
        })
    }
}
