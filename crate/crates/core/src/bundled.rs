//! Bundled example instances and their contract labels.
//!
//! `example5` has no stable allocation. `example6` is a market where every
//! stable-outcome mechanism can be manipulated, and `example7` is the same
//! market after seeker `a2` misreports `(m1,1) - (m3,1) - (m2,1)`.
//! `example3` and `example4` are single-state markets whose quotas and
//! capacities fall short of the aggregate invariants; they load with
//! structural checks only.

use crate::error::Error;
use crate::format::parse_instance_with;
use crate::instance::{Checks, Contract, ContractSet, Instance};

const FILES: [(&str, &str); 7] = [
    ("example1", include_str!("../data/example1.json")),
    ("example2", include_str!("../data/example2.json")),
    ("example3", include_str!("../data/example3.json")),
    ("example4", include_str!("../data/example4.json")),
    ("example5", include_str!("../data/example5.json")),
    ("example6", include_str!("../data/example6.json")),
    ("example7", include_str!("../data/example7.json")),
];

pub const EXAMPLE_NAMES: [&str; 7] =
    ["example1", "example2", "example3", "example4", "example5", "example6", "example7"];

/// Examples that only pass structural validation.
pub fn is_structural_only(name: &str) -> bool {
    matches!(name, "example3" | "example4")
}

/// The canonical file text of a bundled example.
pub fn bundled_text(name: &str) -> Result<&'static str, Error> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| Error::UnknownExample(name.to_string()))
}

pub fn bundled_example(name: &str) -> Result<Instance, Error> {
    let checks = if is_structural_only(name) { Checks::Structural } else { Checks::Full };
    parse_instance_with(bundled_text(name)?, checks)
}

type Label = (&'static str, (&'static str, &'static str, &'static str));

const TWO_BY_TWO: &[Label] =
    &[("x1", ("a1", "m", "1")), ("x2", ("a1", "m", "2")), ("x3", ("a2", "m", "1")), ("x4", ("a2", "m", "2"))];

const SIZES_ONE_TWO_TWO: &[Label] = &[("x1", ("a1", "m", "1")), ("x2", ("a2", "m", "1")), ("x3", ("a3", "m", "2"))];

const ONE_WAIT: &[Label] = &[("x1", ("a1", "m", "1")), ("x2", ("a2", "m", "1")), ("x3", ("a3", "m", "1"))];

const NO_STABLE: &[Label] = &[
    ("x1", ("a1", "m2", "1")),
    ("x2", ("a1", "m1", "1")),
    ("x3", ("a2", "m1", "1")),
    ("x4", ("a2", "m3", "1")),
    ("x5", ("a3", "m1", "3")),
    ("x6", ("a3", "m2", "3")),
    ("x10", ("a4", "m4", "1")),
];

const MANIPULABLE: &[Label] = &[
    ("x1", ("a1", "m2", "1")),
    ("x2", ("a1", "m1", "1")),
    ("x3", ("a1", "m3", "1")),
    ("x4", ("a2", "m2", "1")),
    ("x5", ("a2", "m1", "1")),
    ("x6", ("a2", "m3", "1")),
    ("x7", ("a3", "m1", "1")),
    ("x8", ("a3", "m2", "1")),
    ("x12", ("a4", "m4", "2")),
];

/// Named contracts of a bundled example, e.g. `x1`.
pub fn labels(example: &str) -> Result<&'static [Label], Error> {
    Ok(match example {
        "example1" | "example2" => TWO_BY_TWO,
        "example3" => SIZES_ONE_TWO_TWO,
        "example4" => ONE_WAIT,
        "example5" => NO_STABLE,
        "example6" | "example7" => MANIPULABLE,
        _ => return Err(Error::UnknownExample(example.to_string())),
    })
}

pub fn label(inst: &Instance, example: &str, name: &str) -> Result<Contract, Error> {
    let (_, (a, m, w)) = labels(example)?
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Invalid(format!("{example} has no contract named {name}")))?;
    inst.contract(a, m, w)
}

pub fn label_set(inst: &Instance, example: &str, names: &[&str]) -> Result<ContractSet, Error> {
    names.iter().map(|n| label(inst, example, n)).collect()
}

/// The label of `x`, if it has one.
pub fn name_of(inst: &Instance, example: &str, x: &Contract) -> Option<&'static str> {
    labels(example).ok()?.iter().find(|(_, (a, m, w))| inst.contract(a, m, w).ok() == Some(*x)).map(|(n, _)| *n)
}

/// The named contracts of an example as a set.
pub fn labeled_universe(inst: &Instance, example: &str) -> Result<ContractSet, Error> {
    labels(example)?.iter().map(|(n, _)| label(inst, example, n)).collect()
}
