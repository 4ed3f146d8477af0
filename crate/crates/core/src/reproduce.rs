//! End-to-end reproduction of the bundled examples' claims.

use std::fmt::Write;

use crate::audit::{
    audit_strategy_proofness, enumerate_stable, is_substitutable, pinned_completion_witness, satisfies_irc,
    satisfies_lad, verdict_line, PinnedProperty, Verdict, Witness,
};
use crate::bundled::{bundled_example, label, label_set, labeled_universe, name_of};
use crate::choice::{choose_set, RuleVariant};
use crate::completion::choose_completed;
use crate::error::Error;
use crate::instance::{Contract, ContractSet, Instance, StateIx, Term};
use crate::mechanism::{run_with_rule_variants, Selection, StableSelection};
use crate::MisreportDomain;

/// One claim: what was expected and what the code produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub description: String,
    pub expected: String,
    pub observed: String,
}

impl Claim {
    pub fn holds(&self) -> bool {
        self.expected == self.observed
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reproduction {
    pub example: String,
    pub claims: Vec<Claim>,
}

impl Reproduction {
    pub fn mismatches(&self) -> usize {
        self.claims.iter().filter(|c| !c.holds()).count()
    }

    pub fn verdict(&self) -> Verdict {
        if self.mismatches() == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "reproduce: {}", self.example);
        for c in &self.claims {
            let mark = if c.holds() { "ok  " } else { "DIFF" };
            let _ = writeln!(out, "{mark} {}", c.description);
            let _ = writeln!(out, "       expected: {}", c.expected);
            if !c.holds() {
                let _ = writeln!(out, "       observed: {}", c.observed);
            }
        }
        let _ = writeln!(out, "{}", verdict_line(self.verdict(), self.mismatches()));
        out
    }
}

struct Ctx {
    example: &'static str,
    inst: Instance,
    claims: Vec<Claim>,
}

impl Ctx {
    fn new(example: &'static str) -> Result<Self, Error> {
        Ok(Ctx { example, inst: bundled_example(example)?, claims: Vec::new() })
    }

    fn set(&self, names: &[&str]) -> Result<ContractSet, Error> {
        label_set(&self.inst, self.example, names)
    }

    fn name(&self, x: &Contract) -> String {
        name_of(&self.inst, self.example, x).map_or_else(|| self.inst.contract_label(x), str::to_string)
    }

    fn show(&self, set: &ContractSet) -> String {
        let parts: Vec<String> = set.iter().map(|x| self.name(x)).collect();
        format!("{{{}}}", parts.join(", "))
    }

    fn claim(&mut self, description: impl Into<String>, expected: impl Into<String>, observed: impl Into<String>) {
        self.claims.push(Claim {
            description: description.into(),
            expected: expected.into(),
            observed: observed.into(),
        });
    }

    fn choices(&mut self, completed: bool, cases: &[(&[&str], &[&str])]) -> Result<(), Error> {
        let m = StateIx(0);
        for (offer, expected) in cases {
            let offered = self.set(offer)?;
            let got = if completed {
                choose_completed(&self.inst, m, &offered).result
            } else {
                choose_set(&self.inst, m, &offered)
            };
            let rule = if completed { "completed choice" } else { "choice" };
            let description = format!("{rule} from {}", self.show(&offered));
            let expected = self.show(&self.set(expected)?);
            let observed = self.show(&got);
            self.claim(description, expected, observed);
        }
        Ok(())
    }

    fn first_witness(&self, report: &crate::AuditReport) -> String {
        match report.witnesses.first() {
            None => "pass".to_string(),
            Some(Witness::Substitutability { base, added, other, .. }) => {
                format!("fail at X'={}, x={}, x'={}", self.show(base), self.name(added), self.name(other))
            }
            Some(Witness::AggregateDemand { base, added, .. }) => {
                format!("fail at X'={}, x={}", self.show(base), self.name(added))
            }
            Some(Witness::PinnedPair { smaller, smaller_choice, larger, larger_choice, .. }) => format!(
                "{} -> {}, {} -> {}",
                self.show(smaller),
                self.show(smaller_choice),
                self.show(larger),
                self.show(larger_choice)
            ),
            Some(w) => w.describe(&self.inst),
        }
    }

    fn stable_sets(&mut self, expected: &[&[&str]]) -> Result<(), Error> {
        let found: Vec<String> =
            enumerate_stable(&self.inst, &RuleVariant::Base)?.iter().map(|a| self.show(a.contracts())).collect();
        let mut want = Vec::new();
        for names in expected {
            want.push(self.show(&self.set(names)?));
        }
        want.sort();
        let mut found = found;
        found.sort();
        self.claim("stable allocations", format!("[{}]", want.join(", ")), format!("[{}]", found.join(", ")));
        Ok(())
    }

    fn manipulation(
        &mut self,
        selection: Selection,
        seeker: &str,
        report: &[&str],
        gain: (&str, &str),
    ) -> Result<(), Error> {
        let mech = StableSelection { variant: RuleVariant::Base, selection };
        let audit = audit_strategy_proofness(&self.inst, &mech, MisreportDomain::Listed { max_len: 3 })?;
        let a = self.inst.find_seeker(seeker)?;
        let terms: Vec<Term> =
            report.iter().map(|n| label(&self.inst, self.example, n).map(|x| x.term())).collect::<Result<_, _>>()?;
        let hit = audit.manipulations().find(|m| m.seeker == a && m.misreport == terms);
        let show = |x: &Option<Contract>| x.as_ref().map_or("unmatched".to_string(), |x| self.name(x));
        let observed = match hit {
            Some(m) => format!("{} instead of {}", show(&m.manipulated_outcome), show(&m.truthful_outcome)),
            None => "no gain".to_string(),
        };
        self.claim(
            format!("{selection:?} stable selection: {seeker} reports {}", report.join(" - ")),
            format!("{} instead of {}", gain.0, gain.1),
            observed,
        );
        Ok(())
    }
}

/// Runs every claim attached to a bundled example.
pub fn reproduce(example: &str) -> Result<Reproduction, Error> {
    let name = crate::bundled::EXAMPLE_NAMES
        .into_iter()
        .find(|n| *n == example)
        .ok_or_else(|| Error::UnknownExample(example.to_string()))?;
    let mut cx = Ctx::new(name)?;
    let m = StateIx(0);
    match name {
        "example1" => {
            cx.choices(
                false,
                &[
                    (&["x1", "x2", "x4"], &["x1", "x4"]),
                    (&["x2", "x4"], &["x2"]),
                    (&["x2", "x3"], &["x2", "x3"]),
                    (&["x1", "x2", "x3"], &["x1"]),
                ],
            )?;
            let u = labeled_universe(&cx.inst, name)?;
            let sub = is_substitutable(&cx.inst, m, &RuleVariant::Base, &u)?;
            let observed = cx.first_witness(&sub);
            cx.claim("substitutability", "fail at X'={x2}, x=x4, x'=x1", observed);
            let lad = satisfies_lad(&cx.inst, m, &RuleVariant::Base, &u)?;
            let observed = cx.first_witness(&lad);
            cx.claim("aggregate demand", "fail at X'={x2, x3}, x=x1", observed);
        }
        "example2" => {
            cx.choices(
                true,
                &[(&["x1", "x2", "x4"], &["x1", "x2"]), (&["x2", "x4"], &["x2"]), (&["x1", "x2", "x3"], &["x1", "x2"])],
            )?;
            let u = labeled_universe(&cx.inst, name)?;
            let rule = RuleVariant::Completed;
            let checks = [
                ("completed rule substitutability", is_substitutable(&cx.inst, m, &rule, &u)?),
                ("completed rule aggregate demand", satisfies_lad(&cx.inst, m, &rule, &u)?),
                ("completed rule rejected contracts", satisfies_irc(&cx.inst, m, &rule, &u)?),
            ];
            for (what, report) in checks {
                let observed = cx.first_witness(&report);
                cx.claim(what, "pass", observed);
            }
        }
        "example3" | "example4" => {
            let (property, expected) = if name == "example3" {
                (PinnedProperty::Substitutability, "{x2, x3} -> {x2}, {x1, x2, x3} -> {x1, x3}")
            } else {
                (PinnedProperty::AggregateDemand, "{x2, x3} -> {x2, x3}, {x1, x2, x3} -> {x1}")
            };
            let u = labeled_universe(&cx.inst, name)?;
            let report = pinned_completion_witness(&cx.inst, m, &RuleVariant::Base, property, &u)?;
            let observed = if report.passed() { "no pinned pair".to_string() } else { cx.first_witness(&report) };
            cx.claim(format!("pinned {property:?} violation every completion inherits"), expected, observed);
        }
        "example5" => cx.stable_sets(&[])?,
        "example6" => {
            let outcome = run_with_rule_variants(&cx.inst, RuleVariant::Base)?.outcome;
            let expected = cx.show(&cx.set(&["x2", "x6", "x8", "x12"])?);
            let observed = cx.show(outcome.contracts());
            cx.claim("cumulative offer outcome", expected, observed);
            cx.stable_sets(&[&["x2", "x6", "x8", "x12"]])?;
            cx.manipulation(Selection::LexMax, "a2", &["x5", "x6", "x4"], ("x5", "x6"))?;
        }
        "example7" => {
            cx.stable_sets(&[&["x2", "x6", "x8", "x12"], &["x1", "x5", "x7", "x12"]])?;
            cx.manipulation(Selection::LexMin, "a1", &["x1", "x3", "x2"], ("x1", "x2"))?;
        }
        _ => unreachable!("every bundled example has claims"),
    }
    Ok(Reproduction { example: name.to_string(), claims: cx.claims })
}
