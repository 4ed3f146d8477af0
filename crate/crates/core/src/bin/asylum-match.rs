use std::path::Path;
use std::process::ExitCode;

use asylum_match::audit::{
    audit_nom, audit_strategy_proofness, enumerate_stable, is_stable, is_substitutable, is_unilaterally_substitutable,
    pinned_completion_witness, satisfies_irc, satisfies_lad, verdict_line, AuditReport, NomConfig, PinnedProperty,
    Verdict,
};
use asylum_match::bundled::bundled_text;
use asylum_match::choice::{check_axioms, unique_axiom_rule_oracle, ChoiceRule};
use asylum_match::format::parse_instance_with;
use asylum_match::instance::Checks;
use asylum_match::mechanism::cumulative_offer;
use asylum_match::{
    choose, choose_completed, generate_instance, is_completion_on, reproduce, write_instance, ContractSet,
    CumulativeOffer, Dims, Error, Instance, MisreportDomain, OrderPolicy, Profile, RuleVariant,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "asylum-match", version, about = "Assign asylum seekers to member states and audit the rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the cumulative offer mechanism and check the outcome's stability.
    Solve {
        /// Instance file, or the name of a bundled example.
        file: String,
        #[arg(long, default_value = "base")]
        variant: RuleVariant,
        #[arg(long, default_value = "round-robin")]
        order: OrderPolicy,
        /// Print the per-round table.
        #[arg(long)]
        trace: bool,
    },
    /// Show one state's choice from an offer, step by step.
    Trace {
        file: String,
        #[arg(long)]
        state: String,
        /// Offered contracts as seeker:wait, comma separated.
        #[arg(long, value_delimiter = ',')]
        offer: Vec<String>,
        #[arg(long, default_value = "base")]
        variant: RuleVariant,
    },
    #[command(subcommand)]
    Audit(Audit),
    /// Check a bundled example's claims end to end.
    Reproduce { example: String },
    /// Print a random valid instance.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "unrestricted")]
        profile: Profile,
        /// Seekers x states x waits, e.g. 3x2x2.
        #[arg(long)]
        dims: Dims,
        #[arg(long)]
        max_burden: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Sub,
    Usub,
    Lad,
    Irc,
    Axioms,
    Unique,
    Completion,
    PinnedSub,
    PinnedLad,
}

#[derive(Subcommand)]
enum Audit {
    /// Check a property of one state's choice rule over all offers.
    Choice {
        file: String,
        #[arg(long)]
        state: String,
        #[arg(long, value_enum, default_value = "axioms")]
        property: Property,
        #[arg(long, default_value = "base")]
        variant: RuleVariant,
    },
    /// Check the mechanism's outcome, or list every stable allocation.
    Stability {
        file: String,
        #[arg(long)]
        enumerate: bool,
        #[arg(long, default_value = "base")]
        variant: RuleVariant,
    },
    /// Search for profitable misreports at the given profile.
    Sp {
        file: String,
        /// listed[:n], all[:n] or full.
        #[arg(long, default_value = "listed")]
        domain: MisreportDomain,
        #[arg(long, default_value = "base")]
        variant: RuleVariant,
    },
    /// Search for obvious manipulations over the others' reports.
    Nom {
        file: String,
        #[arg(long, default_value = "listed")]
        domain: MisreportDomain,
        /// Reports considered for everyone else.
        #[arg(long, default_value = "all:2")]
        others: MisreportDomain,
        #[arg(long, default_value = "base")]
        variant: RuleVariant,
    },
}

fn load(file: &str, checks: Checks) -> Result<Instance, Error> {
    let text = match bundled_text(file) {
        Ok(t) if !Path::new(file).exists() => t.to_string(),
        _ => std::fs::read_to_string(file).map_err(|e| Error::Invalid(format!("cannot read {file}: {e}")))?,
    };
    parse_instance_with(&text, checks)
}

fn parse_offer(inst: &Instance, state: &str, tokens: &[String]) -> Result<ContractSet, Error> {
    tokens
        .iter()
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (seeker, wait) =
                t.split_once(':').ok_or_else(|| Error::Invalid(format!("offer entry {t:?} is not seeker:wait")))?;
            inst.contract(seeker, state, wait)
        })
        .collect()
}

fn report(inst: &Instance, r: &AuditReport) -> Verdict {
    print!("{}", r.render(inst));
    r.verdict()
}

fn run(cli: Cli) -> Result<Verdict, Error> {
    match cli.command {
        Command::Solve { file, variant, order, trace } => {
            let inst = load(&file, Checks::Full)?;
            let t = cumulative_offer(&inst, &variant, order)?;
            if trace {
                print!("{}", t.render(&inst));
            }
            for a in inst.seeker_ixs() {
                println!("{}\t{}", inst.seeker(a).id, inst.outcome_label(t.outcome.of(a)));
            }
            Ok(report(&inst, &is_stable(&inst, &variant, &t.outcome)))
        }
        Command::Trace { file, state, offer, variant } => {
            let inst = load(&file, Checks::Structural)?;
            let m = inst.find_state(&state)?;
            let offered = parse_offer(&inst, &state, &offer)?;
            let t = match variant {
                RuleVariant::Base => choose(&inst, m, &offered),
                RuleVariant::Completed => choose_completed(&inst, m, &offered),
            };
            print!("{}", t.render(&inst));
            println!("{}", verdict_line(Verdict::Pass, 0));
            Ok(Verdict::Pass)
        }
        Command::Audit(audit) => audit_command(audit),
        Command::Reproduce { example } => {
            let r = reproduce(&example)?;
            print!("{}", r.render());
            Ok(r.verdict())
        }
        Command::Generate { seed, profile, mut dims, max_burden } => {
            if let Some(b) = max_burden {
                dims.max_burden = b;
            }
            print!("{}", write_instance(&generate_instance(seed, profile, dims)?));
            Ok(Verdict::Pass)
        }
    }
}

fn audit_command(audit: Audit) -> Result<Verdict, Error> {
    match audit {
        Audit::Choice { file, state, property, variant } => {
            let inst = load(&file, Checks::Structural)?;
            let m = inst.find_state(&state)?;
            let u = inst.full_contract_universe().at_state(m);
            let rule: &dyn ChoiceRule = &variant;
            let r = match property {
                Property::Sub => is_substitutable(&inst, m, rule, &u)?,
                Property::Usub => is_unilaterally_substitutable(&inst, m, rule, &u)?,
                Property::Lad => satisfies_lad(&inst, m, rule, &u)?,
                Property::Irc => satisfies_irc(&inst, m, rule, &u)?,
                Property::Axioms => check_axioms(&inst, m, rule, &u)?,
                Property::Unique => unique_axiom_rule_oracle(&inst, m, &u)?,
                Property::Completion => is_completion_on(&inst, m, rule, &RuleVariant::Base, &u)?,
                Property::PinnedSub => pinned_completion_witness(&inst, m, rule, PinnedProperty::Substitutability, &u)?,
                Property::PinnedLad => pinned_completion_witness(&inst, m, rule, PinnedProperty::AggregateDemand, &u)?,
            };
            Ok(report(&inst, &r))
        }
        Audit::Stability { file, enumerate, variant } => {
            let inst = load(&file, Checks::Full)?;
            if enumerate {
                let stable = enumerate_stable(&inst, &variant)?;
                println!("stable allocations: {}", stable.len());
                for a in &stable {
                    println!("{}", inst.set_label(a.contracts()));
                }
                // Failing here means the market has no stable allocation.
                let verdict = if stable.is_empty() { Verdict::Fail } else { Verdict::Pass };
                println!("{}", verdict_line(verdict, usize::from(stable.is_empty())));
                Ok(verdict)
            } else {
                let t = cumulative_offer(&inst, &variant, OrderPolicy::default())?;
                println!("outcome: {}", inst.set_label(t.outcome.contracts()));
                Ok(report(&inst, &is_stable(&inst, &variant, &t.outcome)))
            }
        }
        Audit::Sp { file, domain, variant } => {
            let inst = load(&file, Checks::Full)?;
            let mech = CumulativeOffer { variant, order: OrderPolicy::default() };
            Ok(report(&inst, &audit_strategy_proofness(&inst, &mech, domain)?))
        }
        Audit::Nom { file, domain, others, variant } => {
            let inst = load(&file, Checks::Full)?;
            let mech = CumulativeOffer { variant, order: OrderPolicy::default() };
            let config = NomConfig { own: domain, others, ..NomConfig::default() };
            Ok(report(&inst, &audit_nom(&inst, &mech, config)?))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
