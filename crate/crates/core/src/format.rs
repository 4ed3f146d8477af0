//! The instance file format: one JSON document per instance.
//!
//! ```json
//! {
//!   "seekers": [{"id": "a1", "burden": 1}],
//!   "states": [{"id": "m", "quota": 1,
//!               "capacities": [{"wait": "1", "slots": 1}],
//!               "priority": ["a1"]}],
//!   "waits": ["1"],
//!   "preferences": [{"seeker": "a1", "ranking": [{"state": "m", "wait": "1"}]}]
//! }
//! ```
//!
//! Unknown fields are rejected. The writer emits fields in declaration order
//! with entities sorted by id and a capacity entry for every wait time, so
//! `write_instance(parse_instance(t))` is the canonical form of `t`.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::instance::{Checks, Instance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub seekers: Vec<SeekerDoc>,
    pub states: Vec<StateDoc>,
    pub waits: Vec<String>,
    pub preferences: Vec<PreferenceDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeekerDoc {
    pub id: String,
    pub burden: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub id: String,
    pub quota: u64,
    pub capacities: Vec<CapacityDoc>,
    pub priority: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityDoc {
    pub wait: String,
    pub slots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferenceDoc {
    pub seeker: String,
    pub ranking: Vec<TermDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub state: String,
    pub wait: String,
}

pub fn parse_doc(text: &str) -> Result<InstanceDoc, Error> {
    serde_json::from_str(text).map_err(|e| Error::Syntax { line: e.line(), column: e.column(), message: e.to_string() })
}

/// Parses and fully validates an instance.
pub fn parse_instance(text: &str) -> Result<Instance, Error> {
    parse_instance_with(text, Checks::Full)
}

pub fn parse_instance_with(text: &str, checks: Checks) -> Result<Instance, Error> {
    let doc = parse_doc(text)?;
    Ok(Instance::from_doc(&doc, checks)?)
}

/// Canonical serialization, newline terminated.
pub fn write_instance(inst: &Instance) -> String {
    let mut out = serde_json::to_string_pretty(&inst.to_doc()).expect("instance documents always serialize");
    out.push('\n');
    out
}
