//! End-to-end acceptance checks. Prints one pass/fail line per criterion
//! and exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use asylum_match::audit::{
    audit_nom, audit_strategy_proofness, enumerate_stable, is_stable, is_stable_naive, is_substitutable,
    is_unilaterally_substitutable, nom_sweep, pinned_completion_witness, satisfies_irc, satisfies_lad, NomConfig,
    PinnedProperty,
};
use asylum_match::bundled::{bundled_example, label, label_set, labeled_universe};
use asylum_match::choice::{check_axioms, unique_axiom_rule_oracle};
use asylum_match::mechanism::cumulative_offer_outcome;
use asylum_match::{
    choose_completed, choose_set, displacement_check, generate_instance, is_completion_on, Allocation, ContractSet,
    CumulativeOffer, Dims, Error, Instance, Mechanism, MisreportDomain, OrderPolicy, Profile, RuleVariant, Selection,
    StableSelection, StateIx, Term, Witness,
};
use rand::Rng;

use common::{random_allocation, random_dims, ref_choose, ref_first_lad_violation, ref_first_sub_violation, rng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err(e: Error) -> String {
    e.to_string()
}

fn names(inst: &Instance, example: &str, n: &[&str]) -> ContractSet {
    label_set(inst, example, n).expect("known labels")
}

/// The universe of contracts naming `m`.
fn state_universe(inst: &Instance, m: StateIx) -> ContractSet {
    inst.full_contract_universe().at_state(m)
}

fn random_instance(seed: u64, profile: Profile, dims: (usize, usize, usize)) -> Instance {
    generate_instance(seed, profile, Dims::new(dims.0, dims.1, dims.2)).expect("generator yields valid instances")
}

fn check_choices<F>(inst: &Instance, example: &str, rule: F, cases: &[(&[&str], &[&str])]) -> Result<(), String>
where
    F: Fn(&ContractSet) -> ContractSet,
{
    for (offered, expected) in cases {
        let got = rule(&names(inst, example, offered));
        let want = names(inst, example, expected);
        ensure!(
            got == want,
            "choice from {offered:?}: got {}, expected {}",
            inst.set_label(&got),
            inst.set_label(&want)
        );
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let ex = "example1";
    let inst = bundled_example(ex).map_err(err)?;
    let m = StateIx(0);
    let base = |s: &ContractSet| choose_set(&inst, m, s);
    check_choices(
        &inst,
        ex,
        base,
        &[
            (&["x1", "x2", "x4"], &["x1", "x4"]),
            (&["x2", "x4"], &["x2"]),
            (&["x2", "x3"], &["x2", "x3"]),
            (&["x1", "x2", "x3"], &["x1"]),
        ],
    )?;
    let u = labeled_universe(&inst, ex).map_err(err)?;
    let l = |n: &str| label(&inst, ex, n).expect("known label");

    let sub = is_substitutable(&inst, m, &RuleVariant::Base, &u).map_err(err)?;
    ensure!(!sub.passed(), "substitutability passed");
    let Some(Witness::Substitutability { base: b, added, other, .. }) = sub.witnesses.first() else {
        return Err(format!("unexpected witnesses {:?}", sub.witnesses));
    };
    ensure!(
        (b, *added, *other) == (&names(&inst, ex, &["x2"]), l("x4"), l("x1")),
        "substitutability witness {}",
        sub.witnesses[0].describe(&inst)
    );
    let oracle = ref_first_sub_violation(&u, |s| ref_choose(&inst, m, s, false), false);
    ensure!(
        oracle == Some((b.as_slice().to_vec(), *added, *other)),
        "reference scan disagrees on the first substitutability violation: {oracle:?}"
    );

    let lad = satisfies_lad(&inst, m, &RuleVariant::Base, &u).map_err(err)?;
    ensure!(!lad.passed(), "aggregate demand passed");
    let Some(Witness::AggregateDemand { base: b, added, .. }) = lad.witnesses.first() else {
        return Err(format!("unexpected witnesses {:?}", lad.witnesses));
    };
    ensure!(
        (b, *added) == (&names(&inst, ex, &["x2", "x3"]), l("x1")),
        "aggregate demand witness {}",
        lad.witnesses[0].describe(&inst)
    );
    let oracle = ref_first_lad_violation(&u, |s| ref_choose(&inst, m, s, false));
    ensure!(
        oracle == Some((b.as_slice().to_vec(), *added)),
        "reference scan disagrees on the first aggregate demand violation: {oracle:?}"
    );

    let usub = is_unilaterally_substitutable(&inst, m, &RuleVariant::Base, &u).map_err(err)?;
    ensure!(!usub.passed(), "unilateral substitutability passed");
    Ok("four choices match; substitutability fails at X'={x2}, x=x4, x'=x1; aggregate demand fails at X'={x2,x3}, x=x1"
        .to_string())
}

fn criterion_2() -> Outcome {
    let ex = "example2";
    let inst = bundled_example(ex).map_err(err)?;
    let m = StateIx(0);
    let completed = |s: &ContractSet| choose_completed(&inst, m, s).result;
    check_choices(
        &inst,
        ex,
        completed,
        &[(&["x1", "x2", "x4"], &["x1", "x2"]), (&["x2", "x4"], &["x2"]), (&["x1", "x2", "x3"], &["x1", "x2"])],
    )?;
    let u = labeled_universe(&inst, ex).map_err(err)?;
    ensure!(u.len() == 4, "universe has {} contracts", u.len());
    let rule = RuleVariant::Completed;
    for (what, report) in [
        ("substitutability", is_substitutable(&inst, m, &rule, &u).map_err(err)?),
        ("aggregate demand", satisfies_lad(&inst, m, &rule, &u).map_err(err)?),
        ("rejected contracts", satisfies_irc(&inst, m, &rule, &u).map_err(err)?),
    ] {
        ensure!(report.passed(), "{what} fails: {}", report.render(&inst));
    }
    let reference = |s: &ContractSet| ref_choose(&inst, m, s, true);
    ensure!(
        ref_first_sub_violation(&u, reference, false).is_none(),
        "reference scan finds a substitutability violation"
    );
    ensure!(ref_first_lad_violation(&u, reference).is_none(), "reference scan finds an aggregate demand violation");
    Ok("three choices match; completed rule passes substitutability, aggregate demand and rejected contracts".into())
}

fn criterion_3() -> Outcome {
    let mut found = Vec::new();
    for (ex, property, expected) in [
        ("example3", PinnedProperty::Substitutability, (["x2", "x3"], ["x2"].as_slice(), ["x1", "x3"].as_slice())),
        ("example4", PinnedProperty::AggregateDemand, (["x2", "x3"], ["x2", "x3"].as_slice(), ["x1"].as_slice())),
    ] {
        let inst = bundled_example(ex).map_err(err)?;
        let m = StateIx(0);
        let u = labeled_universe(&inst, ex).map_err(err)?;
        let report = pinned_completion_witness(&inst, m, &RuleVariant::Base, property, &u).map_err(err)?;
        let Some(Witness::PinnedPair { smaller, smaller_choice, larger, larger_choice, .. }) = report.witnesses.first()
        else {
            return Err(format!("{ex}: no pinned witness ({:?})", report.notes));
        };
        let (small, small_out, large_out) = expected;
        let want = (
            names(&inst, ex, &small),
            names(&inst, ex, small_out),
            names(&inst, ex, &["x1", "x2", "x3"]),
            names(&inst, ex, large_out),
        );
        ensure!(
            (smaller, smaller_choice, larger, larger_choice) == (&want.0, &want.1, &want.2, &want.3),
            "{ex}: {}",
            report.witnesses[0].describe(&inst)
        );
        // The pinned offers give each seeker one contract, so any completion
        // must agree with the base rule there.
        for (offer, choice) in [(smaller, smaller_choice), (larger, larger_choice)] {
            ensure!(!offer.has_duplicate_seeker(), "{ex}: offer {} is not pinned", inst.set_label(offer));
            ensure!(&ref_choose(&inst, m, offer, false) == choice, "{ex}: reference choice differs");
            ensure!(&ref_choose(&inst, m, offer, true) == choice, "{ex}: completed choice differs");
        }
        found.push(format!("{ex} {}", inst.set_label(larger_choice)));
    }
    Ok(format!("pinned pairs found ({})", found.join("; ")))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut checked = 0;
    let mut offers = 0u64;
    for seed in 0..200 {
        let dims = random_dims(&mut r, 4, 3, 3, 12);
        let inst = random_instance(seed, Profile::Unrestricted, dims);
        for m in inst.state_ixs() {
            let u = state_universe(&inst, m);
            ensure!(u.len() <= 12, "universe too large");
            let report = check_axioms(&inst, m, &RuleVariant::Base, &u).map_err(err)?;
            ensure!(report.passed(), "seed {seed}: {}", report.render(&inst));
            offers += report.stats.cases;
            for offered in common::all_subsets(&u) {
                let got = choose_set(&inst, m, &offered);
                ensure!(
                    got == ref_choose(&inst, m, &offered, false),
                    "seed {seed}: rule differs from the reference step loop"
                );
            }
        }
        checked += 1;
    }
    let mut unique = 0;
    for seed in 0..20 {
        let dims = random_dims(&mut r, 3, 2, 2, 6);
        let inst = random_instance(1000 + seed, Profile::Unrestricted, dims);
        for m in inst.state_ixs() {
            let u = state_universe(&inst, m);
            let report = unique_axiom_rule_oracle(&inst, m, &u).map_err(err)?;
            ensure!(report.passed(), "seed {seed}: {}", report.render(&inst));
        }
        unique += 1;
    }
    Ok(format!("axioms hold on {checked} instances ({offers} offers); uniqueness confirmed on {unique} instances"))
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let profiles = [Profile::Unrestricted, Profile::LargePriority, Profile::SmallPriority, Profile::Homogeneous];
    let mut counts = [0usize; 2];
    for seed in 0..200u64 {
        let profile = profiles[seed as usize % profiles.len()];
        let dims = random_dims(&mut r, 4, 2, 3, 24);
        let inst = random_instance(500 + seed, profile, dims);
        for m in inst.state_ixs() {
            let u = state_universe(&inst, m);
            let base = satisfies_irc(&inst, m, &RuleVariant::Base, &u).map_err(err)?;
            ensure!(base.passed(), "seed {seed}: base rule {}", base.render(&inst));
            let comp = satisfies_irc(&inst, m, &RuleVariant::Completed, &u).map_err(err)?;
            ensure!(comp.passed(), "seed {seed}: completed rule {}", comp.render(&inst));
            let c = is_completion_on(&inst, m, &RuleVariant::Completed, &RuleVariant::Base, &u).map_err(err)?;
            ensure!(c.passed(), "seed {seed}: {}", c.render(&inst));
            if inst.has_large_burden_priority(m) {
                let s = is_substitutable(&inst, m, &RuleVariant::Completed, &u).map_err(err)?;
                ensure!(s.passed(), "seed {seed}: large priority but {}", s.render(&inst));
                counts[0] += 1;
            }
            if inst.has_small_burden_priority(m) {
                let s = satisfies_lad(&inst, m, &RuleVariant::Completed, &u).map_err(err)?;
                ensure!(s.passed(), "seed {seed}: small priority but {}", s.render(&inst));
                counts[1] += 1;
            }
        }
    }

    let mut pairs = 0;
    let mut displaced = 0;
    let mut seed = 0u64;
    while pairs < 500 {
        seed += 1;
        ensure!(seed < 100_000, "only {pairs} admissible pairs sampled");
        let dims = random_dims(&mut r, 5, 2, 3, 30);
        let inst = random_instance(9000 + seed, Profile::Unrestricted, dims);
        let m = StateIx(r.random_range(0..inst.states().len()));
        let u = state_universe(&inst, m);
        let added = u.as_slice()[r.random_range(0..u.len())];
        let offered: ContractSet = u.iter().copied().filter(|x| *x != added && r.random_bool(0.5)).collect();
        match displacement_check(&inst, m, &offered, added) {
            Ok(report) => {
                ensure!(report.passed(), "seed {seed}: {}", report.render(&inst));
                pairs += 1;
                if report.notes.first().is_some_and(|n| n.contains("displaced")) {
                    displaced += 1;
                }
            }
            Err(Error::PreconditionUnmet(_)) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!(
        "rejected-contract and completion checks hold on 200 instances; substitutability on {} large-priority states, aggregate demand on {} small-priority states; {pairs} displacement pairs ({displaced} with displacement)",
        counts[0], counts[1]
    ))
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let co = CumulativeOffer::default();
    let mut cases = 0u64;
    let mut covered = 0u64;
    for seed in 0..200u64 {
        let dims = random_dims(&mut r, 4, 3, 3, 36);
        let inst = random_instance(2000 + seed, Profile::Homogeneous, dims);
        let outcome = co.run(&inst).map_err(err)?.allocation;
        let stable = is_stable(&inst, &RuleVariant::Base, &outcome);
        ensure!(stable.passed(), "seed {seed}: {}", stable.render(&inst));
        ensure!(
            common::ref_is_stable(&inst, outcome.contracts()),
            "seed {seed}: reference stability check rejects {}",
            inst.set_label(outcome.contracts())
        );
        let sp = audit_strategy_proofness(&inst, &co, MisreportDomain::Full).map_err(err)?;
        ensure!(sp.passed(), "seed {seed}: {}", sp.render(&inst));
        cases += sp.stats.cases;
        covered += sp.stats.cases + sp.stats.covered;
    }
    Ok(format!(
        "200 homogeneous outcomes stable; no profitable report among {covered} reports ({cases} mechanism runs)"
    ))
}

fn criterion_7() -> Outcome {
    let inst = bundled_example("example5").map_err(err)?;
    let stable = enumerate_stable(&inst, &RuleVariant::Base).map_err(err)?;
    ensure!(stable.is_empty(), "found stable allocations {:?}", stable);
    // Independent sweep over every feasible allocation of listed contracts.
    let listed = inst.listed_contracts();
    let mut feasible = 0;
    for set in common::all_subsets(&listed) {
        if Allocation::new(&inst, set.clone()).is_ok() {
            feasible += 1;
            ensure!(!common::ref_is_stable(&inst, &set), "reference check accepts {}", inst.set_label(&set));
        }
    }
    Ok(format!("no stable allocation among {feasible} feasible allocations"))
}

fn terms(inst: &Instance, pairs: &[(&str, &str)]) -> Vec<Term> {
    pairs.iter().map(|(m, w)| Term::new(inst.find_state(m).expect("state"), inst.find_wait(w).expect("wait"))).collect()
}

fn criterion_8() -> Outcome {
    let ex6 = bundled_example("example6").map_err(err)?;
    let ex7 = bundled_example("example7").map_err(err)?;
    let domain = MisreportDomain::Listed { max_len: 3 };

    let y1 = names(&ex6, "example6", &["x2", "x6", "x8", "x12"]);
    let y2 = names(&ex6, "example6", &["x1", "x5", "x7", "x12"]);
    let stable6: Vec<ContractSet> =
        enumerate_stable(&ex6, &RuleVariant::Base).map_err(err)?.into_iter().map(|a| a.into_contracts()).collect();
    ensure!(stable6 == vec![y1.clone()], "truthful stable set {:?}", stable6);
    let mut stable7: Vec<ContractSet> =
        enumerate_stable(&ex7, &RuleVariant::Base).map_err(err)?.into_iter().map(|a| a.into_contracts()).collect();
    stable7.sort();
    let mut want = vec![y1.clone(), y2.clone()];
    want.sort();
    ensure!(stable7 == want, "stable set after the misreport {:?}", stable7);
    for set in common::all_subsets(&ex6.listed_contracts()) {
        if Allocation::new(&ex7, set.clone()).is_ok() {
            ensure!(
                common::ref_is_stable(&ex7, &set) == want.contains(&set),
                "reference check disagrees on {}",
                ex7.set_label(&set)
            );
        }
    }

    let a1 = ex6.find_seeker("a1").map_err(err)?;
    let a2 = ex6.find_seeker("a2").map_err(err)?;
    let lexmax = StableSelection { variant: RuleVariant::Base, selection: Selection::LexMax };
    let sp = audit_strategy_proofness(&ex6, &lexmax, domain).map_err(err)?;
    let a2_report = terms(&ex6, &[("m1", "1"), ("m3", "1"), ("m2", "1")]);
    let hit = sp.manipulations().find(|m| m.seeker == a2 && m.misreport == a2_report);
    let Some(hit) = hit else {
        return Err(format!("a2's misreport not found; {}", sp.render(&ex6)));
    };
    ensure!(
        hit.truthful_outcome == Some(label(&ex6, "example6", "x6").map_err(err)?)
            && hit.manipulated_outcome == Some(label(&ex6, "example6", "x5").map_err(err)?),
        "a2's outcomes {}",
        hit.describe(&ex6)
    );

    let lexmin = StableSelection { variant: RuleVariant::Base, selection: Selection::LexMin };
    let sp = audit_strategy_proofness(&ex7, &lexmin, domain).map_err(err)?;
    let a1_report = terms(&ex7, &[("m2", "1"), ("m3", "1"), ("m1", "1")]);
    let hit = sp.manipulations().find(|m| m.seeker == a1 && m.misreport == a1_report);
    let Some(hit) = hit else {
        return Err(format!("a1's misreport not found; {}", sp.render(&ex7)));
    };
    ensure!(
        hit.truthful_outcome == Some(label(&ex7, "example7", "x2").map_err(err)?)
            && hit.manipulated_outcome == Some(label(&ex7, "example7", "x1").map_err(err)?),
        "a1's outcomes {}",
        hit.describe(&ex7)
    );
    Ok("stable sets {Y1} and {Y1, Y2}; the larger selection rewards a2's misreport, the smaller rewards a1's".into())
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let co = CumulativeOffer::default();
    let config = NomConfig::default();
    let mut subtle = Vec::new();
    let mut seed = 3000u64;
    let mut done = 0;
    while done < 100 {
        seed += 1;
        let dims = random_dims(&mut r, 4, 2, 2, 16);
        let inst = random_instance(seed, Profile::LargePriority, dims);
        if inst.is_homogeneous() {
            continue;
        }
        done += 1;
        let outcome = co.run(&inst).map_err(err)?.allocation;
        let stable = is_stable(&inst, &RuleVariant::Base, &outcome);
        ensure!(stable.passed(), "seed {seed}: {}", stable.render(&inst));
        let (found, _) = nom_sweep(&inst, &co, config).map_err(err)?;
        ensure!(found.iter().all(|m| !m.obvious), "seed {seed}: obvious manipulation {}", found[0].describe(&inst));
        subtle.extend(found.iter().map(|m| (format!("seed {seed}"), m.describe(&inst))));
    }
    let mut detail = "100 large-priority heterogeneous instances stable with no obvious manipulation".to_string();
    if subtle.is_empty() {
        // Fall back to the market built to defeat strategy-proofness. Its
        // priorities at m2 put a small seeker above a large one, so it lies
        // outside the large-priority profile.
        let inst = bundled_example("example6").map_err(err)?;
        ensure!(
            !inst.state_ixs().all(|m| inst.has_large_burden_priority(m)),
            "fallback unexpectedly has large priority"
        );
        let outcome = co.run(&inst).map_err(err)?.allocation;
        ensure!(is_stable(&inst, &RuleVariant::Base, &outcome).passed(), "fallback outcome unstable");
        let report = audit_nom(&inst, &co, config).map_err(err)?;
        ensure!(report.passed(), "fallback: {}", report.render(&inst));
        let (found, _) = nom_sweep(&inst, &co, config).map_err(err)?;
        subtle.extend(found.iter().filter(|m| !m.obvious).map(|m| ("example6".to_string(), m.describe(&inst))));
        detail.push_str("; none profitable there, so example6 (outside the large-priority profile) was added");
    }
    ensure!(!subtle.is_empty(), "no profitable misreport found");
    Ok(format!(
        "{detail}; {} profitable but not obvious misreports, first on {}: {}",
        subtle.len(),
        subtle[0].0,
        subtle[0].1
    ))
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    for seed in 0..100u64 {
        let profile = if seed % 2 == 0 { Profile::Homogeneous } else { Profile::LargePriority };
        let dims = random_dims(&mut r, 4, 3, 3, 36);
        let inst = random_instance(4000 + seed, profile, dims);
        let outcome = cumulative_offer_outcome(&inst, &RuleVariant::Base, OrderPolicy::default()).map_err(err)?.outcome;
        let stable = enumerate_stable(&inst, &RuleVariant::Base).map_err(err)?;
        ensure!(
            stable.contains(&outcome),
            "seed {seed}: outcome {} not among stable allocations",
            inst.set_label(outcome.contracts())
        );
    }
    let mut stable_count = 0;
    for i in 0..1000u64 {
        let dims = random_dims(&mut r, 4, 3, 2, 24);
        let profile = [Profile::Unrestricted, Profile::Homogeneous, Profile::LargePriority][i as usize % 3];
        let inst = random_instance(6000 + i, profile, dims);
        let set = random_allocation(&inst, &mut r);
        let alloc = Allocation::new(&inst, set.clone()).map_err(err)?;
        let full = is_stable(&inst, &RuleVariant::Base, &alloc).passed();
        let naive = is_stable_naive(&inst, &RuleVariant::Base, &set);
        let reference = common::ref_is_stable(&inst, &set);
        ensure!(
            full == naive && naive == reference,
            "pair {i}: checks disagree ({full}, {naive}, {reference}) on {}",
            inst.set_label(&set)
        );
        stable_count += full as usize;
    }
    Ok(format!(
        "100 outcomes among the enumerated stable allocations; 1000 allocation checks agree ({stable_count} stable)"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("choice rule examples and their property failures", criterion_1),
        ("completed rule examples and properties", criterion_2),
        ("pinned completion impossibility witnesses", criterion_3),
        ("axioms characterize the choice rule", criterion_4),
        ("rejected contracts, completion, substitutability and demand", criterion_5),
        ("homogeneous markets: stable and strategy-proof", criterion_6),
        ("market without a stable allocation", criterion_7),
        ("stable selection is manipulable", criterion_8),
        ("large-burden priority: stable and not obviously manipulable", criterion_9),
        ("oracle cross-checks", criterion_10),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: pass [{title}] {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL [{title}] {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
