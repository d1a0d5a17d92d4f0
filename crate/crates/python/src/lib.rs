//! Python bindings: the `pfcs` module.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pfcs_core::flatten::{flatten, flatten_equiv_report};
use pfcs_core::io::{
    diff_json, diff_systems, export_r1cs, flatten_json, import_r1cs, sat_json, simplify_json, verdict_json,
};
use pfcs_core::sem::{Solver, DEFAULT_BUDGET};
use pfcs_core::verify::{Checks, Harness, SpecRegistry};
use pfcs_core::{gadgets, parse_system, print_system, FieldElement, Prime, R1csSystem, SatOutcome, System, Valuation};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn prime(p: BigUint) -> PyResult<Prime> {
    Prime::new(p).map_err(value_err)
}

/// Arithmetic in the prime field of order `p`; elements are Python ints.
#[pyclass(frozen)]
struct Field {
    p: Prime,
}

#[pymethods]
impl Field {
    #[new]
    fn new(p: BigUint) -> PyResult<Self> {
        Ok(Field { p: prime(p)? })
    }

    #[getter]
    fn prime(&self) -> BigUint {
        self.p.value().clone()
    }

    fn reduce(&self, x: BigInt) -> BigUint {
        self.p.reduce(&x)
    }

    fn add(&self, x: BigInt, y: BigInt) -> BigUint {
        (&self.p.elem(x) + &self.p.elem(y)).value().clone()
    }

    fn sub(&self, x: BigInt, y: BigInt) -> BigUint {
        (&self.p.elem(x) - &self.p.elem(y)).value().clone()
    }

    fn mul(&self, x: BigInt, y: BigInt) -> BigUint {
        (&self.p.elem(x) * &self.p.elem(y)).value().clone()
    }

    fn neg(&self, x: BigInt) -> BigUint {
        self.p.elem(x).neg().value().clone()
    }

    fn pow(&self, x: BigInt, e: BigUint) -> BigUint {
        self.p.elem(x).pow(&e).value().clone()
    }

    fn inv(&self, x: BigInt) -> PyResult<BigUint> {
        Ok(self.p.elem(x).inv().map_err(value_err)?.value().clone())
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.p.value())
    }
}

/// A PFCS system: relation definitions in dependency order.
#[pyclass(frozen)]
struct PfcsSystem {
    defs: System,
}

fn args(p: &Prime, values: Vec<BigInt>) -> Vec<FieldElement> {
    values.into_iter().map(|v| p.elem(v)).collect()
}

#[pymethods]
impl PfcsSystem {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PfcsSystem {
            defs: parse_system(text).map_err(value_err)?,
        })
    }

    /// The definitions of a built-in gadget.
    #[staticmethod]
    #[pyo3(signature = (name, n=None))]
    fn gadget(name: &str, n: Option<usize>) -> PyResult<Self> {
        Ok(PfcsSystem {
            defs: gadgets::by_name(name, n).map_err(value_err)?.defs,
        })
    }

    fn relations(&self) -> Vec<String> {
        self.defs.definitions().iter().map(|d| d.name.clone()).collect()
    }

    fn params(&self, rel: &str) -> PyResult<Vec<String>> {
        let d = self
            .defs
            .get(rel)
            .ok_or_else(|| value_err(format!("unknown relation `{rel}`")))?;
        Ok(d.params.clone())
    }

    fn __str__(&self) -> String {
        print_system(&self.defs)
    }

    fn flatten(&self, rel: &str, p: BigUint) -> PyResult<R1cs> {
        Ok(R1cs {
            sys: flatten(&self.defs, rel, &prime(p)?).map_err(value_err)?.system,
        })
    }

    /// The flattening document: system, external map and internal names.
    fn flatten_json(&self, rel: &str, p: BigUint) -> PyResult<String> {
        Ok(flatten_json(&flatten(&self.defs, rel, &prime(p)?).map_err(value_err)?))
    }

    #[pyo3(signature = (rel, p, budget=DEFAULT_BUDGET))]
    fn flatten_equivalent(&self, rel: &str, p: BigUint, budget: u64) -> PyResult<bool> {
        let r = flatten_equiv_report(&self.defs, rel, &prime(p)?, budget).map_err(value_err)?;
        Ok(r.equivalent)
    }

    /// Witness search. Returns the top-level assignment (parameters and
    /// internals) or `None` when unsatisfiable.
    #[pyo3(signature = (rel, p, values, budget=DEFAULT_BUDGET))]
    fn sat(
        &self,
        rel: &str,
        p: BigUint,
        values: Vec<BigInt>,
        budget: u64,
    ) -> PyResult<Option<HashMap<String, BigUint>>> {
        let p = prime(p)?;
        let a = args(&p, values);
        match Solver::new(&self.defs, p, budget).solve(rel, &a).map_err(value_err)? {
            SatOutcome::Satisfied(pfcs_core::ProofTree::Call { extended, .. }) => Ok(Some(
                extended.into_iter().map(|(k, v)| (k, v.value().clone())).collect(),
            )),
            SatOutcome::Satisfied(_) => unreachable!("top-level proofs are call nodes"),
            SatOutcome::Unsatisfiable => Ok(None),
            SatOutcome::Aborted(n) => Err(PyRuntimeError::new_err(format!(
                "search space of {n} candidates exceeds the budget"
            ))),
        }
    }

    /// Witness search result with the full proof tree, as JSON.
    #[pyo3(signature = (rel, p, values, budget=DEFAULT_BUDGET))]
    fn sat_json(&self, rel: &str, p: BigUint, values: Vec<BigInt>, budget: u64) -> PyResult<String> {
        let p = prime(p)?;
        let a = args(&p, values);
        let outcome = Solver::new(&self.defs, p, budget).solve(rel, &a).map_err(value_err)?;
        Ok(sat_json(&outcome))
    }

    /// Exhaustive verification against a built-in spec; returns the verdict
    /// as JSON.
    #[pyo3(signature = (rel, p, spec, checks=vec!["sound".to_string(), "complete".to_string()], inputs=None, budget=DEFAULT_BUDGET))]
    fn verify(
        &self,
        rel: &str,
        p: BigUint,
        spec: &str,
        checks: Vec<String>,
        inputs: Option<Vec<String>>,
        budget: u64,
    ) -> PyResult<String> {
        let p = prime(p)?;
        let pred = SpecRegistry::new()
            .get(spec)
            .ok_or_else(|| value_err(format!("unknown specification `{spec}`")))?;
        let mut sel = Checks {
            sound: false,
            complete: false,
            deterministic: false,
        };
        for c in &checks {
            match c.as_str() {
                "sound" => sel.sound = true,
                "complete" => sel.complete = true,
                "det" => sel.deterministic = true,
                other => return Err(value_err(format!("unknown check `{other}`"))),
            }
        }
        let mut h = Harness::new(&self.defs, rel, pred, &p, budget).map_err(value_err)?;
        let idx = match inputs {
            Some(names) => Some(
                h.input_indices(&names.iter().map(String::as_str).collect::<Vec<_>>())
                    .map_err(value_err)?,
            ),
            None => None,
        };
        let report = h.run(sel, idx.as_deref()).map_err(value_err)?;
        let params = self.params(rel)?;
        Ok(verdict_json(&report, &params, spec, &p))
    }
}

/// A flat R1CS system.
#[pyclass(frozen)]
struct R1cs {
    sys: R1csSystem,
}

#[pymethods]
impl R1cs {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(R1cs {
            sys: import_r1cs(text).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> String {
        export_r1cs(&self.sys)
    }

    #[getter]
    fn prime(&self) -> BigUint {
        self.sys.prime.value().clone()
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.sys.variables.clone()
    }

    fn __len__(&self) -> usize {
        self.sys.constraints.len()
    }

    /// Whether every constraint holds; all variables must be given.
    fn holds(&self, values: HashMap<String, BigInt>) -> PyResult<bool> {
        let p = &self.sys.prime;
        let v: Valuation = values.into_iter().map(|(k, x)| (k, p.elem(x))).collect();
        self.sys.holds(&v).map_err(value_err)
    }

    #[pyo3(signature = (max_rounds=1000))]
    fn simplify_json(&self, max_rounds: usize) -> String {
        simplify_json(&pfcs_core::simplify_system(&self.sys, max_rounds))
    }

    fn equals(&self, other: &R1cs) -> bool {
        diff_systems(&self.sys, &other.sys).equal
    }

    fn diff_json(&self, other: &R1cs) -> String {
        diff_json(&diff_systems(&self.sys, &other.sys))
    }
}

#[pymodule]
fn pfcs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Field>()?;
    m.add_class::<PfcsSystem>()?;
    m.add_class::<R1cs>()?;
    m.add("DEFAULT_BUDGET", DEFAULT_BUDGET)?;
    Ok(())
}
