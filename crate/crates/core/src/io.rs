//! JSON interchange: R1CS systems, witnesses and tool reports.
//!
//! Every document is written with sorted object keys, no insignificant
//! whitespace and a single trailing newline. Field elements and coefficients
//! are decimal strings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::field::{FieldElement, Prime};
use crate::flatten::FlattenResult;
use crate::r1cs::{LinearCombination, Monomial, PseudoVar, R1csConstraint, R1csSystem, Valuation};
use crate::sem::{ProofTree, SatOutcome};
use crate::simplify::{SimplifyReport, Solution};
use crate::verify::{CheckResult, Counterexample, VerdictReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImportError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> ImportError {
    ImportError::Invalid {
        location: location.into(),
        message: message.into(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    prime: String,
    variables: Vec<String>,
    constraints: Vec<RawConstraint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    a: Vec<(String, Option<String>)>,
    b: Vec<(String, Option<String>)>,
    c: Vec<(String, Option<String>)>,
}

fn decimal(s: &str, location: &str) -> Result<BigUint, ImportError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(invalid(location, format!("`{s}` is not a decimal number")));
    }
    Ok(BigUint::from_str(s).expect("checked digits"))
}

fn parse_prime(s: &str, location: &str) -> Result<Prime, ImportError> {
    Prime::new(decimal(s, location)?).map_err(|e| invalid(location, e.to_string()))
}

fn to_document(v: Value) -> String {
    let mut s = serde_json::to_string(&v).expect("values serialize");
    s.push('\n');
    s
}

/// Reads an R1CS document. Coefficients must lie in `0..p` and every
/// constraint variable must be declared. The result is canonical.
pub fn import_r1cs(text: &str) -> Result<R1csSystem, ImportError> {
    let raw: RawSystem = serde_json::from_str(text).map_err(|e| ImportError::Json(e.to_string()))?;
    let prime = parse_prime(&raw.prime, "prime")?;
    let mut declared = BTreeSet::new();
    for (i, v) in raw.variables.iter().enumerate() {
        if !declared.insert(v.as_str()) {
            return Err(invalid(format!("variables[{i}]"), format!("duplicate variable `{v}`")));
        }
        if v.is_empty() {
            return Err(invalid(format!("variables[{i}]"), "empty variable name"));
        }
    }
    let mut constraints = Vec::with_capacity(raw.constraints.len());
    for (ci, rc) in raw.constraints.iter().enumerate() {
        let mut sides = Vec::with_capacity(3);
        for (side, terms) in [("a", &rc.a), ("b", &rc.b), ("c", &rc.c)] {
            let mut lc = LinearCombination::zero();
            for (mi, (coeff, var)) in terms.iter().enumerate() {
                let location = format!("constraints[{ci}].{side}[{mi}]");
                let k = decimal(coeff, &location)?;
                if &k >= prime.value() {
                    return Err(invalid(
                        location,
                        format!("coefficient {k} is not below the prime {}", prime.value()),
                    ));
                }
                let pvar = match var {
                    None => PseudoVar::One,
                    Some(n) if declared.contains(n.as_str()) => PseudoVar::Var(n.clone()),
                    Some(n) => return Err(invalid(location, format!("unknown variable `{n}`"))),
                };
                lc.push(BigInt::from(k), pvar);
            }
            sides.push(lc);
        }
        let c = sides.pop().expect("three sides");
        let b = sides.pop().expect("three sides");
        let a = sides.pop().expect("three sides");
        constraints.push(R1csConstraint::new(a, b, c));
    }
    Ok(R1csSystem::new(prime, raw.variables, constraints).canonicalize())
}

fn lc_json(lc: &LinearCombination, p: &Prime) -> Value {
    Value::Array(
        lc.monomials()
            .iter()
            .map(|m| json!([p.reduce(&m.coeff).to_string(), m.pvar.name()]))
            .collect(),
    )
}

fn system_json(sys: &R1csSystem) -> Value {
    let p = &sys.prime;
    json!({
        "prime": p.value().to_string(),
        "variables": sys.variables,
        "constraints": sys.constraints.iter().map(|k| json!({
            "a": lc_json(&k.a, p),
            "b": lc_json(&k.b, p),
            "c": lc_json(&k.c, p),
        })).collect::<Vec<_>>(),
    })
}

/// Writes an R1CS document. Coefficients are reduced into `0..p`; monomial,
/// variable and constraint order are kept.
pub fn export_r1cs(sys: &R1csSystem) -> String {
    to_document(system_json(sys))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
    C,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "a",
            Side::B => "b",
            Side::C => "c",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Divergence {
    Prime {
        left: BigUint,
        right: BigUint,
    },
    /// First differing position of the variable lists; `None` past the end.
    Variable {
        index: usize,
        left: Option<String>,
        right: Option<String>,
    },
    ConstraintCount {
        left: usize,
        right: usize,
    },
    Monomial {
        constraint: usize,
        side: Side,
        position: usize,
        left: Option<Monomial>,
        right: Option<Monomial>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffResult {
    pub equal: bool,
    pub divergence: Option<Divergence>,
}

/// Compares canonical forms and reports the first difference: prime, then
/// variables, then constraints side by side, then constraint count.
pub fn diff_systems(x: &R1csSystem, y: &R1csSystem) -> DiffResult {
    let found = |d: Divergence| DiffResult {
        equal: false,
        divergence: Some(d),
    };
    if x.prime != y.prime {
        return found(Divergence::Prime {
            left: x.prime.value().clone(),
            right: y.prime.value().clone(),
        });
    }
    let (x, y) = (x.canonicalize(), y.canonicalize());
    for i in 0..x.variables.len().max(y.variables.len()) {
        let (l, r) = (x.variables.get(i), y.variables.get(i));
        if l != r {
            return found(Divergence::Variable {
                index: i,
                left: l.cloned(),
                right: r.cloned(),
            });
        }
    }
    for (ci, (kx, ky)) in x.constraints.iter().zip(&y.constraints).enumerate() {
        for (side, lx, ly) in [
            (Side::A, &kx.a, &ky.a),
            (Side::B, &kx.b, &ky.b),
            (Side::C, &kx.c, &ky.c),
        ] {
            let (mx, my) = (lx.monomials(), ly.monomials());
            for pos in 0..mx.len().max(my.len()) {
                let (l, r) = (mx.get(pos), my.get(pos));
                if l != r {
                    return found(Divergence::Monomial {
                        constraint: ci,
                        side,
                        position: pos,
                        left: l.cloned(),
                        right: r.cloned(),
                    });
                }
            }
        }
    }
    if x.constraints.len() != y.constraints.len() {
        return found(Divergence::ConstraintCount {
            left: x.constraints.len(),
            right: y.constraints.len(),
        });
    }
    DiffResult {
        equal: true,
        divergence: None,
    }
}

fn monomial_json(m: &Option<Monomial>) -> Value {
    match m {
        None => Value::Null,
        Some(m) => json!([m.coeff.to_string(), m.pvar.name()]),
    }
}

pub fn diff_json(d: &DiffResult) -> String {
    let divergence = match &d.divergence {
        None => Value::Null,
        Some(Divergence::Prime { left, right }) => json!({
            "kind": "prime", "left": left.to_string(), "right": right.to_string(),
        }),
        Some(Divergence::Variable { index, left, right }) => json!({
            "kind": "variable", "index": index, "left": left, "right": right,
        }),
        Some(Divergence::ConstraintCount { left, right }) => json!({
            "kind": "constraint_count", "left": left, "right": right,
        }),
        Some(Divergence::Monomial {
            constraint,
            side,
            position,
            left,
            right,
        }) => json!({
            "kind": "monomial",
            "constraint": constraint,
            "side": side.to_string(),
            "position": position,
            "left": monomial_json(left),
            "right": monomial_json(right),
        }),
    };
    to_document(json!({ "equal": d.equal, "divergence": divergence }))
}

/// Reads a `{"name": "value"}` witness; values must lie in `0..p`.
pub fn import_witness(text: &str, p: &Prime) -> Result<Valuation, ImportError> {
    let raw: BTreeMap<String, String> = serde_json::from_str(text).map_err(|e| ImportError::Json(e.to_string()))?;
    let mut out = Valuation::new();
    for (name, v) in raw {
        let value = decimal(&v, &name)?;
        if &value >= p.value() {
            return Err(invalid(
                name,
                format!("value {value} is not below the prime {}", p.value()),
            ));
        }
        out.insert(name, p.elem_from_biguint(value));
    }
    Ok(out)
}

fn valuation_value(v: &Valuation) -> Value {
    Value::Object(
        v.iter()
            .map(|(k, e)| (k.clone(), Value::String(e.value().to_string())))
            .collect::<Map<_, _>>(),
    )
}

pub fn export_witness(v: &Valuation) -> String {
    to_document(valuation_value(v))
}

pub fn flatten_json(f: &FlattenResult) -> String {
    let map: Map<String, Value> = f
        .external_map
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    to_document(json!({
        "external_map": map,
        "internal_names": f.internal_names,
        "system": system_json(&f.system),
    }))
}

fn solution_json(s: &Solution, p: &Prime) -> Value {
    json!({ "variable": s.variable, "rhs": lc_json(&s.rhs, p) })
}

pub fn simplify_json(r: &SimplifyReport) -> String {
    let p = &r.residual.prime;
    to_document(json!({
        "eliminated": r.eliminated.iter().map(|s| solution_json(s, p)).collect::<Vec<_>>(),
        "residual": system_json(&r.residual),
        "rounds": r.rounds,
    }))
}

fn proof_json(t: &ProofTree) -> Value {
    match t {
        ProofTree::Equality { constraint } => json!({ "kind": "equality", "constraint": constraint.to_string() }),
        ProofTree::Call {
            constraint,
            extended,
            subtrees,
        } => json!({
            "kind": "call",
            "constraint": constraint.to_string(),
            "assignment": valuation_value(extended),
            "subtrees": subtrees.iter().map(proof_json).collect::<Vec<_>>(),
        }),
    }
}

pub fn proof_tree_value(t: &ProofTree) -> Value {
    proof_json(t)
}

pub fn sat_json(o: &SatOutcome) -> String {
    to_document(match o {
        SatOutcome::Satisfied(t) => json!({ "outcome": "satisfied", "proof": proof_json(t) }),
        SatOutcome::Unsatisfiable => json!({ "outcome": "unsatisfiable" }),
        SatOutcome::Aborted(n) => json!({ "outcome": "aborted", "candidates": n.to_string() }),
    })
}

fn tuple_json(t: &[FieldElement], names: &[String]) -> Value {
    Value::Object(
        names
            .iter()
            .zip(t)
            .map(|(n, v)| (n.clone(), Value::String(v.value().to_string())))
            .collect(),
    )
}

fn check_json(c: &Option<CheckResult>, names: &[String]) -> Value {
    match c {
        None => Value::Null,
        Some(c) => {
            let counterexample = match &c.counterexample {
                None => Value::Null,
                Some(Counterexample::Tuple(t)) => tuple_json(t, names),
                Some(Counterexample::Collision(a, b)) => json!([tuple_json(a, names), tuple_json(b, names)]),
            };
            json!({ "passed": c.passed, "counterexample": counterexample })
        }
    }
}

/// A verdict with counterexamples keyed by parameter name.
pub fn verdict_json(r: &VerdictReport, params: &[String], spec_id: &str, p: &Prime) -> String {
    to_document(json!({
        "spec": spec_id,
        "prime": p.value().to_string(),
        "sound": check_json(&r.sound, params),
        "complete": check_json(&r.complete, params),
        "deterministic": check_json(&r.deterministic, params),
        "inputs": r.inputs,
        "enumerated": r.enumerated,
        "out_of_domain": r.out_of_domain,
        "hypothesis": r.hypothesis,
        "hypothesis_holds": r.hypothesis_holds,
    }))
}
