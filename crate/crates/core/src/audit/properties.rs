//! Choice-rule properties checked by enumerating every subset of a small
//! universe. A [`RuleTable`] evaluates the rule once per subset; every
//! property then reads the table.

use rayon::prelude::*;
use serde::Serialize;

use super::{AuditReport, Witness};
use crate::choice::{ChoiceRule, DEFAULT_UNIVERSE_BOUND};
use crate::error::Error;
use crate::instance::{ContractSet, Instance, StateIx};
use crate::subsets::{check_universe, element, mask_to_set, set_to_mask, subsets_in_lex_order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PinnedProperty {
    Substitutability,
    AggregateDemand,
}

impl std::str::FromStr for PinnedProperty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sub" | "substitutability" => Ok(PinnedProperty::Substitutability),
            "lad" | "aggregate-demand" => Ok(PinnedProperty::AggregateDemand),
            _ => Err(format!("unknown property {s:?} (expected sub or lad)")),
        }
    }
}

/// A rule's output on every subset of a universe, as bit masks.
#[derive(Debug, Clone)]
pub struct RuleTable {
    universe: ContractSet,
    table: Vec<u32>,
    order: Vec<u32>,
    seeker_masks: Vec<u32>,
}

impl RuleTable {
    pub fn build<R: ChoiceRule + ?Sized>(
        inst: &Instance,
        state: StateIx,
        rule: &R,
        universe: &ContractSet,
    ) -> Result<RuleTable, Error> {
        Self::build_bounded(inst, state, rule, universe, DEFAULT_UNIVERSE_BOUND)
    }

    pub fn build_bounded<R: ChoiceRule + ?Sized>(
        inst: &Instance,
        state: StateIx,
        rule: &R,
        universe: &ContractSet,
        bound: usize,
    ) -> Result<RuleTable, Error> {
        check_universe(universe, bound)?;
        let n = universe.len();
        let table = (0..1u32 << n)
            .into_par_iter()
            .map(|mask| {
                let offered = mask_to_set(universe, mask);
                let chosen = rule.choose(inst, state, &offered);
                match set_to_mask(universe, &chosen) {
                    Some(out) if out & !mask == 0 => Ok(out),
                    _ => Err(Error::RuleEscapesOffer),
                }
            })
            .collect::<Result<Vec<u32>, Error>>()?;
        let seeker_masks = universe
            .iter()
            .map(|x| {
                universe.iter().enumerate().filter(|(_, y)| y.seeker == x.seeker).fold(0u32, |m, (i, _)| m | (1 << i))
            })
            .collect();
        Ok(RuleTable { universe: universe.clone(), table, order: subsets_in_lex_order(n), seeker_masks })
    }

    pub fn universe(&self) -> &ContractSet {
        &self.universe
    }

    pub fn choice(&self, offered: &ContractSet) -> Option<ContractSet> {
        set_to_mask(&self.universe, offered).map(|m| mask_to_set(&self.universe, self.table[m as usize]))
    }

    fn set(&self, mask: u32) -> ContractSet {
        mask_to_set(&self.universe, mask)
    }

    fn n(&self) -> usize {
        self.universe.len()
    }

    /// Masks of `mask`'s complement, ascending.
    fn outside(&self, mask: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |i| mask & (1 << i) == 0)
    }

    /// Seekers named in `mask`, as a mask of all their contracts.
    fn seeker_cover(&self, mask: u32) -> u32 {
        (0..self.n()).filter(|i| mask & (1 << i) != 0).fold(0, |m, i| m | self.seeker_masks[i])
    }

    /// At most one contract per seeker.
    fn is_pinned(&self, mask: u32) -> bool {
        (0..self.n()).all(|i| mask & (1 << i) == 0 || (mask & self.seeker_masks[i]).count_ones() == 1)
    }

    pub fn substitutability(&self, unilateral: bool) -> AuditReport {
        let mut report = AuditReport::new(if unilateral { "unilateral substitutability" } else { "substitutability" });
        for &base in &self.order {
            report.stats.cases += 1;
            let named = self.seeker_cover(base);
            for i in self.outside(base) {
                if unilateral && named & (1 << i) != 0 {
                    continue;
                }
                let with_x = base | 1 << i;
                if self.table[with_x as usize] & (1 << i) != 0 {
                    continue;
                }
                for j in self.outside(with_x) {
                    let both = with_x | 1 << j;
                    if self.table[both as usize] & (1 << i) != 0 {
                        report.stats.violations += 1;
                        if report.witnesses.is_empty() {
                            report.witnesses.push(Witness::Substitutability {
                                base: self.set(base),
                                added: element(&self.universe, i),
                                other: element(&self.universe, j),
                                choice_with_added: self.set(self.table[with_x as usize]),
                                choice_with_both: self.set(self.table[both as usize]),
                            });
                        }
                    }
                }
            }
        }
        report
    }

    pub fn aggregate_demand(&self) -> AuditReport {
        let mut report = AuditReport::new("law of aggregate demand");
        for &base in &self.order {
            report.stats.cases += 1;
            let before = self.table[base as usize];
            for i in self.outside(base) {
                let after = self.table[(base | 1 << i) as usize];
                if after.count_ones() < before.count_ones() {
                    report.stats.violations += 1;
                    if report.witnesses.is_empty() {
                        report.witnesses.push(Witness::AggregateDemand {
                            base: self.set(base),
                            added: element(&self.universe, i),
                            choice_without: self.set(before),
                            choice_with: self.set(after),
                        });
                    }
                }
            }
        }
        report
    }

    pub fn rejected_contracts(&self) -> AuditReport {
        let mut report = AuditReport::new("irrelevance of rejected contracts");
        for &base in &self.order {
            report.stats.cases += 1;
            let before = self.table[base as usize];
            for i in self.outside(base) {
                let after = self.table[(base | 1 << i) as usize];
                if after & (1 << i) == 0 && after != before {
                    report.stats.violations += 1;
                    if report.witnesses.is_empty() {
                        report.witnesses.push(Witness::RejectedContract {
                            base: self.set(base),
                            added: element(&self.universe, i),
                            choice_without: self.set(before),
                            choice_with: self.set(after),
                        });
                    }
                }
            }
        }
        report
    }

    /// `self` is a completion of `base`: on every offer the outputs agree or
    /// `self`'s output gives some seeker two contracts.
    pub fn completion_of(&self, base: &RuleTable) -> Result<AuditReport, Error> {
        if self.universe != base.universe {
            return Err(Error::Invalid("rule tables over different universes".to_string()));
        }
        let mut report = AuditReport::new("completion");
        for &offer in &self.order {
            report.stats.cases += 1;
            let mine = self.table[offer as usize];
            if mine != base.table[offer as usize] && self.is_pinned(mine) {
                report.stats.violations += 1;
                if report.witnesses.is_empty() {
                    report.witnesses.push(Witness::Completion {
                        offered: self.set(offer),
                        completed: self.set(mine),
                        base: self.set(base.table[offer as usize]),
                    });
                }
            }
        }
        Ok(report)
    }

    /// Searches the offers with at most one contract per seeker, where any
    /// completion must agree with this rule, for a violation of `property`.
    pub fn pinned_witness(&self, property: PinnedProperty) -> AuditReport {
        let mut report = AuditReport::new(match property {
            PinnedProperty::Substitutability => "pinned completion: substitutability",
            PinnedProperty::AggregateDemand => "pinned completion: law of aggregate demand",
        });
        for &base in &self.order {
            if !self.is_pinned(base) {
                continue;
            }
            report.stats.cases += 1;
            for i in self.outside(base) {
                let with_x = base | 1 << i;
                if !self.is_pinned(with_x) {
                    continue;
                }
                let found = match property {
                    PinnedProperty::AggregateDemand => (self.table[with_x as usize].count_ones()
                        < self.table[base as usize].count_ones())
                    .then_some((base, with_x)),
                    PinnedProperty::Substitutability => {
                        if self.table[with_x as usize] & (1 << i) != 0 {
                            None
                        } else {
                            self.outside(with_x)
                                .map(|j| with_x | 1 << j)
                                .find(|&both| self.is_pinned(both) && self.table[both as usize] & (1 << i) != 0)
                                .map(|both| (with_x, both))
                        }
                    }
                };
                if let Some((small, large)) = found {
                    report.stats.violations += 1;
                    if report.witnesses.is_empty() {
                        report.witnesses.push(Witness::PinnedPair {
                            property,
                            smaller: self.set(small),
                            smaller_choice: self.set(self.table[small as usize]),
                            larger: self.set(large),
                            larger_choice: self.set(self.table[large as usize]),
                        });
                    }
                }
            }
        }
        if !report.passed() {
            report.notes.push("no completion of this rule can satisfy the property".to_string());
        }
        report
    }
}

/// Fails iff some `x` is chosen from `X' + x + x'` but not from `X' + x`.
pub fn is_substitutable<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    state: StateIx,
    rule: &R,
    universe: &ContractSet,
) -> Result<AuditReport, Error> {
    Ok(RuleTable::build(inst, state, rule, universe)?.substitutability(false))
}

/// Substitutability restricted to contracts whose seeker is absent from `X'`.
pub fn is_unilaterally_substitutable<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    state: StateIx,
    rule: &R,
    universe: &ContractSet,
) -> Result<AuditReport, Error> {
    Ok(RuleTable::build(inst, state, rule, universe)?.substitutability(true))
}

/// Fails iff adding a contract shrinks the chosen set.
pub fn satisfies_lad<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    state: StateIx,
    rule: &R,
    universe: &ContractSet,
) -> Result<AuditReport, Error> {
    Ok(RuleTable::build(inst, state, rule, universe)?.aggregate_demand())
}

/// Fails iff adding a contract that is not chosen changes the choice.
pub fn satisfies_irc<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    state: StateIx,
    rule: &R,
    universe: &ContractSet,
) -> Result<AuditReport, Error> {
    Ok(RuleTable::build(inst, state, rule, universe)?.rejected_contracts())
}

/// Looks for a violation of `property` among offers on which every
/// completion of `rule` is forced to agree with `rule`.
pub fn pinned_completion_witness<R: ChoiceRule + ?Sized>(
    inst: &Instance,
    state: StateIx,
    rule: &R,
    property: PinnedProperty,
    universe: &ContractSet,
) -> Result<AuditReport, Error> {
    Ok(RuleTable::build(inst, state, rule, universe)?.pinned_witness(property))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled::{bundled_example, label, label_set, labeled_universe};
    use crate::choice::RuleVariant;

    #[test]
    fn single_contract_universe_passes_everything() {
        let inst = bundled_example("example1").unwrap();
        let u = label_set(&inst, "example1", &["x1"]).unwrap();
        let t = RuleTable::build(&inst, StateIx(0), &RuleVariant::Base, &u).unwrap();
        assert!(t.substitutability(false).passed());
        assert!(t.substitutability(true).passed());
        assert!(t.aggregate_demand().passed());
        assert!(t.rejected_contracts().passed());
    }

    #[test]
    fn escaping_rule_is_rejected() {
        let inst = bundled_example("example1").unwrap();
        let universe = inst.full_contract_universe();
        let x1 = label(&inst, "example1", "x1").unwrap();
        let rogue = move |_: &Instance, _: StateIx, _: &ContractSet| -> ContractSet { [x1].into_iter().collect() };
        assert!(matches!(RuleTable::build(&inst, StateIx(0), &rogue, &universe), Err(Error::RuleEscapesOffer)));
    }

    #[test]
    fn adversarial_rule_breaks_irc() {
        let inst = bundled_example("example1").unwrap();
        let universe = inst.full_contract_universe();
        let x4 = label(&inst, "example1", "x4").unwrap();
        // behaves like the base rule until x4 is offered, then chooses nothing
        let rule = move |inst: &Instance, m: StateIx, offered: &ContractSet| {
            if offered.contains(&x4) {
                ContractSet::new()
            } else {
                RuleVariant::Base.choose(inst, m, offered)
            }
        };
        let r = satisfies_irc(&inst, StateIx(0), &rule, &universe).unwrap();
        assert!(!r.passed());
        assert_eq!(r.witnesses[0].recheck_choice(&inst, StateIx(0), &rule), Some(true));
        match &r.witnesses[0] {
            Witness::RejectedContract { base, added, .. } => {
                assert_eq!(base, &label_set(&inst, "example1", &["x1"]).unwrap());
                assert_eq!(*added, x4);
            }
            w => panic!("unexpected {w:?}"),
        }
    }

    #[test]
    fn completion_oracle_examples() {
        let inst = bundled_example("example1").unwrap();
        let universe = inst.full_contract_universe();
        let m = StateIx(0);
        let base = RuleTable::build(&inst, m, &RuleVariant::Base, &universe).unwrap();
        let completed = RuleTable::build(&inst, m, &RuleVariant::Completed, &universe).unwrap();
        assert!(completed.completion_of(&base).unwrap().passed());
        assert!(base.completion_of(&base).unwrap().passed());
        let empty = |_: &Instance, _: StateIx, _: &ContractSet| ContractSet::new();
        let empty = RuleTable::build(&inst, m, &empty, &universe).unwrap();
        let r = empty.completion_of(&base).unwrap();
        match &r.witnesses[0] {
            Witness::Completion { offered, .. } => {
                assert_eq!(offered, &label_set(&inst, "example1", &["x1"]).unwrap())
            }
            w => panic!("unexpected {w:?}"),
        }
    }

    #[test]
    fn pinned_witness_needs_pinned_sets() {
        let inst = bundled_example("example1").unwrap();
        let u = labeled_universe(&inst, "example1").unwrap();
        let r = pinned_completion_witness(&inst, StateIx(0), &RuleVariant::Base, PinnedProperty::Substitutability, &u)
            .unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
