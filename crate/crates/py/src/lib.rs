//! Python bindings. Contracts cross the boundary as `(seeker, state, wait)`
//! string tuples using the instance's ids.

use engine::audit::{self, PinnedProperty};
use engine::choice::{check_axioms, unique_axiom_rule_oracle, ChoiceRule};
use engine::format::parse_instance_with;
use engine::instance::Checks;
use engine::{
    bundled_example, choose_completed, choose_set, cumulative_offer, generate_instance, is_completion_on,
    write_instance, Allocation, Contract, ContractSet, CumulativeOffer, Dims, Error, MisreportDomain, NomConfig,
    OrderPolicy, Profile, RuleVariant,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

type PyContract = (String, String, String);

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_arg<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

#[pyclass(name = "Instance", frozen, module = "asylum_match")]
struct PyInstance {
    inner: engine::Instance,
}

impl PyInstance {
    fn to_py(&self, x: &Contract) -> PyContract {
        let i = &self.inner;
        (i.seeker(x.seeker).id.clone(), i.state(x.state).id.clone(), i.wait_time(x.wait).to_string())
    }

    fn to_py_set(&self, set: &ContractSet) -> Vec<PyContract> {
        set.iter().map(|x| self.to_py(x)).collect()
    }

    fn contract_set(&self, contracts: Vec<PyContract>) -> PyResult<ContractSet> {
        contracts.iter().map(|(a, m, w)| self.inner.contract(a, m, w).map_err(py_err)).collect()
    }
}

#[pymethods]
impl PyInstance {
    /// Parses the JSON instance format. `structural=True` skips the
    /// aggregate quota and capacity checks.
    #[staticmethod]
    #[pyo3(signature = (text, structural = false))]
    fn parse(text: &str, structural: bool) -> PyResult<Self> {
        let checks = if structural { Checks::Structural } else { Checks::Full };
        Ok(PyInstance { inner: parse_instance_with(text, checks).map_err(py_err)? })
    }

    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        Ok(PyInstance { inner: bundled_example(name).map_err(py_err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (seed, profile = "unrestricted", dims = "3x2x2"))]
    fn generate(seed: u64, profile: &str, dims: &str) -> PyResult<Self> {
        let profile: Profile = parse_arg(profile)?;
        let dims: Dims = parse_arg(dims)?;
        Ok(PyInstance { inner: generate_instance(seed, profile, dims).map_err(py_err)? })
    }

    fn to_json(&self) -> String {
        write_instance(&self.inner)
    }

    /// `(id, burden)` per seeker.
    fn seekers(&self) -> Vec<(String, u64)> {
        self.inner.seekers().iter().map(|s| (s.id.clone(), s.burden)).collect()
    }

    fn states(&self) -> Vec<String> {
        self.inner.states().iter().map(|s| s.id.clone()).collect()
    }

    fn waits(&self) -> Vec<String> {
        self.inner.waits().times().iter().map(|w| w.to_string()).collect()
    }

    fn contracts(&self) -> Vec<PyContract> {
        self.to_py_set(&self.inner.full_contract_universe())
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance({} seekers, {} states, {} wait times)",
            self.inner.seekers().len(),
            self.inner.states().len(),
            self.inner.waits().len()
        )
    }
}

#[pyclass(name = "AuditReport", frozen, module = "asylum_match")]
struct PyAuditReport {
    #[pyo3(get)]
    check: String,
    #[pyo3(get)]
    passed: bool,
    #[pyo3(get)]
    witnesses: Vec<String>,
    #[pyo3(get)]
    cases: u64,
    #[pyo3(get)]
    notes: Vec<String>,
    text: String,
}

impl PyAuditReport {
    fn new(inst: &PyInstance, r: &engine::AuditReport) -> Self {
        PyAuditReport {
            check: r.check.clone(),
            passed: r.passed(),
            witnesses: r.witnesses.iter().map(|w| w.describe(&inst.inner)).collect(),
            cases: r.stats.cases,
            notes: r.notes.clone(),
            text: r.render(&inst.inner),
        }
    }
}

#[pymethods]
impl PyAuditReport {
    fn render(&self) -> String {
        self.text.clone()
    }

    fn __repr__(&self) -> String {
        format!("AuditReport({:?}, passed={}, witnesses={})", self.check, self.passed, self.witnesses.len())
    }
}

/// The state's choice from `offered`.
#[pyfunction]
#[pyo3(signature = (inst, state, offered, variant = "base"))]
fn choose(inst: &PyInstance, state: &str, offered: Vec<PyContract>, variant: &str) -> PyResult<Vec<PyContract>> {
    let m = inst.inner.find_state(state).map_err(py_err)?;
    let offered = inst.contract_set(offered)?;
    let chosen = match parse_arg::<RuleVariant>(variant)? {
        RuleVariant::Base => choose_set(&inst.inner, m, &offered),
        RuleVariant::Completed => choose_completed(&inst.inner, m, &offered).result,
    };
    Ok(inst.to_py_set(&chosen))
}

/// The cumulative offer outcome as a list of contracts.
#[pyfunction(name = "cumulative_offer")]
#[pyo3(signature = (inst, variant = "base", order = "round-robin"))]
fn py_cumulative_offer(inst: &PyInstance, variant: &str, order: &str) -> PyResult<Vec<PyContract>> {
    let variant: RuleVariant = parse_arg(variant)?;
    let order: OrderPolicy = parse_arg(order)?;
    let t = cumulative_offer(&inst.inner, &variant, order).map_err(py_err)?;
    Ok(inst.to_py_set(t.outcome.contracts()))
}

#[pyfunction]
#[pyo3(signature = (inst, allocation, variant = "base"))]
fn is_stable(inst: &PyInstance, allocation: Vec<PyContract>, variant: &str) -> PyResult<PyAuditReport> {
    let variant: RuleVariant = parse_arg(variant)?;
    let alloc = Allocation::new(&inst.inner, inst.contract_set(allocation)?).map_err(py_err)?;
    Ok(PyAuditReport::new(inst, &audit::is_stable(&inst.inner, &variant, &alloc)))
}

#[pyfunction]
#[pyo3(signature = (inst, variant = "base"))]
fn enumerate_stable(inst: &PyInstance, variant: &str) -> PyResult<Vec<Vec<PyContract>>> {
    let variant: RuleVariant = parse_arg(variant)?;
    let all = audit::enumerate_stable(&inst.inner, &variant).map_err(py_err)?;
    Ok(all.iter().map(|a| inst.to_py_set(a.contracts())).collect())
}

/// Checks a property of one state's rule over every offer from its
/// contracts: sub, usub, lad, irc, axioms, unique, completion, pinned-sub
/// or pinned-lad.
#[pyfunction]
#[pyo3(signature = (inst, state, property = "axioms", variant = "base"))]
fn audit_choice(inst: &PyInstance, state: &str, property: &str, variant: &str) -> PyResult<PyAuditReport> {
    let i = &inst.inner;
    let m = i.find_state(state).map_err(py_err)?;
    let u = i.full_contract_universe().at_state(m);
    let variant: RuleVariant = parse_arg(variant)?;
    let rule: &dyn ChoiceRule = &variant;
    let r = match property {
        "sub" => audit::is_substitutable(i, m, rule, &u),
        "usub" => audit::is_unilaterally_substitutable(i, m, rule, &u),
        "lad" => audit::satisfies_lad(i, m, rule, &u),
        "irc" => audit::satisfies_irc(i, m, rule, &u),
        "axioms" => check_axioms(i, m, rule, &u),
        "unique" => unique_axiom_rule_oracle(i, m, &u),
        "completion" => is_completion_on(i, m, rule, &RuleVariant::Base, &u),
        "pinned-sub" => audit::pinned_completion_witness(i, m, rule, PinnedProperty::Substitutability, &u),
        "pinned-lad" => audit::pinned_completion_witness(i, m, rule, PinnedProperty::AggregateDemand, &u),
        _ => return Err(PyValueError::new_err(format!("unknown property {property:?}"))),
    }
    .map_err(py_err)?;
    Ok(PyAuditReport::new(inst, &r))
}

/// Profitable misreports under the cumulative offer mechanism.
#[pyfunction]
#[pyo3(signature = (inst, domain = "listed", variant = "base"))]
fn audit_sp(inst: &PyInstance, domain: &str, variant: &str) -> PyResult<PyAuditReport> {
    let mech = CumulativeOffer { variant: parse_arg(variant)?, order: OrderPolicy::default() };
    let domain: MisreportDomain = parse_arg(domain)?;
    let r = audit::audit_strategy_proofness(&inst.inner, &mech, domain).map_err(py_err)?;
    Ok(PyAuditReport::new(inst, &r))
}

/// Obvious manipulations under the cumulative offer mechanism.
#[pyfunction]
#[pyo3(signature = (inst, domain = "listed", others = "all:2", variant = "base"))]
fn audit_nom(inst: &PyInstance, domain: &str, others: &str, variant: &str) -> PyResult<PyAuditReport> {
    let mech = CumulativeOffer { variant: parse_arg(variant)?, order: OrderPolicy::default() };
    let config = NomConfig { own: parse_arg(domain)?, others: parse_arg(others)?, ..NomConfig::default() };
    let r = audit::audit_nom(&inst.inner, &mech, config).map_err(py_err)?;
    Ok(PyAuditReport::new(inst, &r))
}

/// Reproduces a bundled example's claims; returns `(passed, report)`.
#[pyfunction]
fn reproduce(example: &str) -> PyResult<(bool, String)> {
    let r = engine::reproduce(example).map_err(py_err)?;
    Ok((r.mismatches() == 0, r.render()))
}

#[pymodule]
fn asylum_match(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyAuditReport>()?;
    m.add_function(wrap_pyfunction!(choose, m)?)?;
    m.add_function(wrap_pyfunction!(py_cumulative_offer, m)?)?;
    m.add_function(wrap_pyfunction!(is_stable, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_stable, m)?)?;
    m.add_function(wrap_pyfunction!(audit_choice, m)?)?;
    m.add_function(wrap_pyfunction!(audit_sp, m)?)?;
    m.add_function(wrap_pyfunction!(audit_nom, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
