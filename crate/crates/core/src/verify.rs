//! Exhaustive verification of gadgets against specifications at small primes.
//!
//! A [`SpecPredicate`] says which external tuples are acceptable. Its domain
//! is a box (each coordinate ranging over the field or over `{0, 1}`) cut
//! down by an optional precondition; soundness and completeness only look at
//! tuples inside the domain. Solutions inside the box but failing the
//! precondition are counted as out-of-domain and do not fail soundness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{FieldElement, Prime};
use crate::gadgets::GadgetBundle;
use crate::pfcs::System;
use crate::sem::{SemError, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoordDomain {
    Field,
    Bits,
}

impl CoordDomain {
    fn values(self, p: &Prime) -> Vec<BigUint> {
        match self {
            CoordDomain::Field => {
                let q = p.to_u64().expect("enumeration needs a small prime");
                (0..q).map(BigUint::from).collect()
            }
            CoordDomain::Bits => vec![BigUint::zero(), BigUint::one()],
        }
    }
}

pub type TuplePredicate = Arc<dyn Fn(&[FieldElement]) -> bool + Send + Sync>;
pub type TupleFunction = Arc<dyn Fn(&[FieldElement]) -> Vec<FieldElement> + Send + Sync>;
pub type PrimePredicate = Arc<dyn Fn(&Prime) -> bool + Send + Sync>;

/// The accepted tuples as the graph of a function from `inputs` to
/// `outputs` (coordinate indices). Every accepted in-domain tuple must have
/// its inputs in `input_box` and its outputs equal to `compute(inputs)`.
#[derive(Clone)]
pub struct SpecFunction {
    pub inputs: Vec<usize>,
    pub input_box: Vec<CoordDomain>,
    pub outputs: Vec<usize>,
    pub compute: TupleFunction,
}

#[derive(Clone)]
pub struct SpecPredicate {
    pub id: String,
    pub arity: usize,
    pub domain_box: Vec<CoordDomain>,
    pub precondition: Option<TuplePredicate>,
    /// Only consulted inside the domain.
    pub accept: TuplePredicate,
    pub function: Option<SpecFunction>,
    /// Condition on the prime under which the gadget is claimed correct.
    pub hypothesis: Option<(String, PrimePredicate)>,
}

impl fmt::Debug for SpecPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpecPredicate")
            .field("id", &self.id)
            .field("arity", &self.arity)
            .field("domain_box", &self.domain_box)
            .finish_non_exhaustive()
    }
}

impl SpecPredicate {
    /// A spec over the whole field with no precondition.
    pub fn new(
        id: impl Into<String>,
        arity: usize,
        accept: impl Fn(&[FieldElement]) -> bool + Send + Sync + 'static,
    ) -> Self {
        SpecPredicate {
            id: id.into(),
            arity,
            domain_box: vec![CoordDomain::Field; arity],
            precondition: None,
            accept: Arc::new(accept),
            function: None,
            hypothesis: None,
        }
    }

    pub fn in_domain(&self, t: &[FieldElement]) -> bool {
        let in_box = t.iter().zip(&self.domain_box).all(|(v, d)| match d {
            CoordDomain::Field => true,
            CoordDomain::Bits => v.is_zero() || v.is_one(),
        });
        in_box && self.precondition.as_ref().is_none_or(|pre| pre(t))
    }

    pub fn accepts(&self, t: &[FieldElement]) -> bool {
        (self.accept)(t)
    }

    pub fn hypothesis_holds(&self, p: &Prime) -> bool {
        self.hypothesis.as_ref().is_none_or(|(_, h)| h(p))
    }

    /// Default input coordinates for the determinism check.
    pub fn default_inputs(&self) -> Option<&[usize]> {
        self.function.as_ref().map(|f| f.inputs.as_slice())
    }

    fn with_box(mut self, b: Vec<CoordDomain>) -> Self {
        self.domain_box = b;
        self
    }

    fn with_precondition(mut self, pre: impl Fn(&[FieldElement]) -> bool + Send + Sync + 'static) -> Self {
        self.precondition = Some(Arc::new(pre));
        self
    }

    fn with_function(
        mut self,
        inputs: Vec<usize>,
        input_box: Vec<CoordDomain>,
        outputs: Vec<usize>,
        compute: impl Fn(&[FieldElement]) -> Vec<FieldElement> + Send + Sync + 'static,
    ) -> Self {
        self.function = Some(SpecFunction {
            inputs,
            input_box,
            outputs,
            compute: Arc::new(compute),
        });
        self
    }
}

fn is_bit(v: &FieldElement) -> bool {
    v.is_zero() || v.is_one()
}

fn bit_value(bits: &[FieldElement]) -> BigUint {
    bits.iter()
        .rev()
        .fold(BigUint::zero(), |acc, b| (acc << 1u32) + b.value())
}

fn elem(like: &FieldElement, v: impl Into<num_bigint::BigInt>) -> FieldElement {
    like.modulus().elem(v)
}

fn choose(cond: bool, x: &FieldElement, y: &FieldElement) -> FieldElement {
    if cond {
        x.clone()
    } else {
        y.clone()
    }
}

fn sized(id: &str, prefix: &str) -> Option<usize> {
    id.strip_prefix(prefix)?.parse().ok()
}

/// The built-in specification with this id (an optional `builtin:` prefix is
/// ignored).
pub fn builtin_spec(id: &str) -> Option<SpecPredicate> {
    use CoordDomain::{Bits, Field};
    let id = id.strip_prefix("builtin:").unwrap_or(id);
    let spec = match id {
        "bitp" => SpecPredicate::new(id, 1, |t| is_bit(&t[0])).with_function(vec![0], vec![Bits], vec![], |_| vec![]),
        "if_then_else" => SpecPredicate::new(id, 4, |t| t[3] == choose(t[0].is_one(), &t[1], &t[2]))
            .with_precondition(|t| is_bit(&t[0]))
            .with_function(vec![0, 1, 2], vec![Bits, Field, Field], vec![3], |t| {
                vec![choose(t[0].is_one(), &t[1], &t[2])]
            }),
        "equality_test" => SpecPredicate::new(id, 3, |t| t[2] == elem(&t[0], u8::from(t[0] == t[1]))).with_function(
            vec![0, 1],
            vec![Field, Field],
            vec![2],
            |t| vec![elem(&t[0], u8::from(t[0] == t[1]))],
        ),
        "if_equal_then_else" => SpecPredicate::new(id, 5, |t| t[4] == choose(t[0] == t[1], &t[2], &t[3]))
            .with_function(vec![0, 1, 2, 3], vec![Field; 4], vec![4], |t| {
                vec![choose(t[0] == t[1], &t[2], &t[3])]
            }),
        "nand" => SpecPredicate::new(id, 3, |t| {
            t[2] == elem(&t[0], 1 - u8::from(t[0].is_one() && t[1].is_one()))
        })
        .with_precondition(|t| is_bit(&t[0]) && is_bit(&t[1]))
        .with_function(vec![0, 1], vec![Bits, Bits], vec![2], |t| {
            vec![elem(&t[0], 1 - u8::from(t[0].is_one() && t[1].is_one()))]
        }),
        _ => {
            if let Some(n) = sized(id, "bit_listp_") {
                SpecPredicate::new(id, n, |t| t.iter().all(is_bit)).with_function(
                    (0..n).collect(),
                    vec![Bits; n],
                    vec![],
                    |_| vec![],
                )
            } else if let Some(n) = sized(id, "unsigned_add_").filter(|&n| n >= 1) {
                let arity = 3 * n + 1;
                let accept = move |t: &[FieldElement]| {
                    let (x, rest) = t.split_at(n);
                    let (y, z) = rest.split_at(n);
                    z.iter().all(is_bit) && bit_value(z) == bit_value(x) + bit_value(y)
                };
                let compute = move |t: &[FieldElement]| {
                    let sum = bit_value(&t[..n]) + bit_value(&t[n..]);
                    (0..=n).map(|i| elem(&t[0], u8::from(sum.bit(i as u64)))).collect()
                };
                let mut spec = SpecPredicate::new(id, arity, accept)
                    .with_box([vec![Bits; 2 * n], vec![Field; n + 1]].concat())
                    .with_function(
                        (0..2 * n).collect(),
                        vec![Bits; 2 * n],
                        (2 * n..arity).collect(),
                        compute,
                    );
                spec.hypothesis = Some((
                    format!("the prime has at least {} bits", n + 2),
                    Arc::new(move |p: &Prime| p.bits() >= n as u64 + 2),
                ));
                spec
            } else {
                let n = sized(id, "bits_to_field_").filter(|&n| n >= 1)?;
                let accept = |t: &[FieldElement]| {
                    t[1..].iter().all(is_bit) && t[0] == t[0].modulus().elem_from_biguint(bit_value(&t[1..]))
                };
                let compute = |t: &[FieldElement]| vec![t[0].modulus().elem_from_biguint(bit_value(t))];
                SpecPredicate::new(id, n + 1, accept).with_function((1..=n).collect(), vec![Bits; n], vec![0], compute)
            }
        }
    };
    Some(spec)
}

/// Built-in spec ids, sized families shown with `<n>`.
pub const BUILTIN_SPECS: &[&str] = &[
    "bitp",
    "bit_listp_<n>",
    "if_then_else",
    "equality_test",
    "if_equal_then_else",
    "unsigned_add_<n>",
    "nand",
    "bits_to_field_<n>",
];

/// `bits_to_field_<n>` has two decompositions for some value once `2^n > p`.
pub fn known_nondeterministic(spec_id: &str, p: &Prime) -> bool {
    let id = spec_id.strip_prefix("builtin:").unwrap_or(spec_id);
    sized(id, "bits_to_field_").is_some_and(|n| (BigUint::one() << n) > *p.value())
}

/// Built-in specs plus any registered by the caller, which take precedence.
#[derive(Debug, Clone, Default)]
pub struct SpecRegistry {
    custom: BTreeMap<String, SpecPredicate>,
}

impl SpecRegistry {
    pub fn new() -> Self {
        SpecRegistry::default()
    }

    pub fn register(&mut self, spec: SpecPredicate) {
        self.custom.insert(spec.id.clone(), spec);
    }

    pub fn get(&self, id: &str) -> Option<SpecPredicate> {
        self.custom.get(id).cloned().or_else(|| builtin_spec(id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("unknown specification `{0}`")]
    UnknownSpec(String),
    #[error("specification `{spec}` has arity {spec_arity}, relation `{relation}` has {relation_arity} parameters")]
    Arity {
        spec: String,
        spec_arity: usize,
        relation: String,
        relation_arity: usize,
    },
    #[error("`{0}` is not a parameter of the relation")]
    UnknownInput(String),
    #[error("enumeration of {0} candidates exceeds the budget")]
    BudgetExceeded(BigUint),
    #[error("the prime must be small enough to enumerate")]
    PrimeTooLarge,
    #[error(transparent)]
    Sem(SemError),
}

impl From<SemError> for VerifyError {
    fn from(e: SemError) -> Self {
        match e {
            SemError::BudgetExceeded(n) => VerifyError::BudgetExceeded(n),
            other => VerifyError::Sem(other),
        }
    }
}

/// `R̃`: the external tuples having a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfactionSet {
    pub prime: Prime,
    pub variables: Vec<String>,
    pub tuples: BTreeSet<Vec<FieldElement>>,
}

impl SatisfactionSet {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[FieldElement]) -> bool {
        self.tuples.contains(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    /// A solution outside the spec (soundness) or an accepted tuple without
    /// a witness (completeness).
    Tuple(Vec<FieldElement>),
    /// Two solutions agreeing on the inputs.
    Collision(Vec<FieldElement>, Vec<FieldElement>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

impl CheckResult {
    fn pass() -> Self {
        CheckResult {
            passed: true,
            counterexample: None,
        }
    }

    fn fail(c: Counterexample) -> Self {
        CheckResult {
            passed: false,
            counterexample: Some(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerdictReport {
    pub sound: Option<CheckResult>,
    pub complete: Option<CheckResult>,
    pub deterministic: Option<CheckResult>,
    /// Determinism input parameters, when checked.
    pub inputs: Vec<String>,
    /// Candidate tuples examined across all checks.
    pub enumerated: u64,
    /// Solutions in the enumerated box that fail the spec precondition.
    pub out_of_domain: u64,
    pub hypothesis: Option<String>,
    pub hypothesis_holds: bool,
}

impl VerdictReport {
    /// Every check that ran passed.
    pub fn all_passed(&self) -> bool {
        [&self.sound, &self.complete, &self.deterministic]
            .into_iter()
            .flatten()
            .all(|c| c.passed)
    }

    fn merge(&mut self, other: VerdictReport) {
        self.sound = other.sound.or(self.sound.take());
        self.complete = other.complete.or(self.complete.take());
        self.deterministic = other.deterministic.or(self.deterministic.take());
        if !other.inputs.is_empty() {
            self.inputs = other.inputs;
        }
        self.enumerated += other.enumerated;
        self.out_of_domain = self.out_of_domain.max(other.out_of_domain);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checks {
    pub sound: bool,
    pub complete: bool,
    pub deterministic: bool,
}

impl Checks {
    pub const ALL: Checks = Checks {
        sound: true,
        complete: true,
        deterministic: true,
    };
}

/// Checks one relation of a system against one spec at one prime.
pub struct Harness<'a> {
    solver: Solver<'a>,
    top: String,
    params: Vec<String>,
    spec: SpecPredicate,
    budget: u64,
}

impl<'a> Harness<'a> {
    pub fn new(defs: &'a System, top: &str, spec: SpecPredicate, p: &Prime, budget: u64) -> Result<Self, VerifyError> {
        let def = defs
            .get(top)
            .ok_or_else(|| VerifyError::Sem(SemError::UnknownRelation(top.to_string())))?;
        if def.params.len() != spec.arity || spec.domain_box.len() != spec.arity {
            return Err(VerifyError::Arity {
                spec: spec.id.clone(),
                spec_arity: spec.arity,
                relation: top.to_string(),
                relation_arity: def.params.len(),
            });
        }
        if p.to_u64().is_none() {
            return Err(VerifyError::PrimeTooLarge);
        }
        Ok(Harness {
            solver: Solver::new(defs, p.clone(), budget),
            top: top.to_string(),
            params: def.params.clone(),
            spec,
            budget,
        })
    }

    /// A harness for a bundle with its built-in spec.
    pub fn for_bundle(bundle: &'a GadgetBundle, p: &Prime, budget: u64) -> Result<Self, VerifyError> {
        let spec = builtin_spec(&bundle.spec_id).ok_or_else(|| VerifyError::UnknownSpec(bundle.spec_id.clone()))?;
        Harness::new(&bundle.defs, &bundle.top, spec, p, budget)
    }

    pub fn prime(&self) -> &Prime {
        self.solver.prime()
    }

    pub fn spec(&self) -> &SpecPredicate {
        &self.spec
    }

    fn elems(&self, t: &[BigUint]) -> Vec<FieldElement> {
        t.iter().map(|v| self.prime().elem_from_biguint(v.clone())).collect()
    }

    /// Solutions inside `boxes`, in lexicographic order of parameter values.
    fn solutions(
        &mut self,
        boxes: &[CoordDomain],
        mut visit: impl FnMut(Vec<FieldElement>) -> ControlFlow<()>,
    ) -> Result<u64, VerifyError> {
        let p = self.prime().clone();
        let domains: Vec<Vec<BigUint>> = boxes.iter().map(|d| d.values(&p)).collect();
        let top = self.top.clone();
        let visited = self.solver.enumerate_relation(&top, &domains, self.budget, &mut |t| {
            visit(t.iter().map(|v| p.elem_from_biguint(v.clone())).collect())
        })?;
        Ok(visited)
    }

    /// `R̃` over the whole field.
    pub fn satisfaction_set(&mut self) -> Result<SatisfactionSet, VerifyError> {
        let mut tuples = BTreeSet::new();
        let boxes = vec![CoordDomain::Field; self.params.len()];
        self.solutions(&boxes, |t| {
            tuples.insert(t);
            ControlFlow::Continue(())
        })?;
        Ok(SatisfactionSet {
            prime: self.prime().clone(),
            variables: self.params.clone(),
            tuples,
        })
    }

    fn base_report(&self) -> VerdictReport {
        VerdictReport {
            hypothesis: self.spec.hypothesis.as_ref().map(|(text, _)| text.clone()),
            hypothesis_holds: self.spec.hypothesis_holds(self.prime()),
            ..VerdictReport::default()
        }
    }

    /// Every solution in the domain is accepted.
    pub fn soundness(&mut self) -> Result<VerdictReport, VerifyError> {
        let spec = self.spec.clone();
        let mut out_of_domain = 0;
        let mut violation = None;
        let enumerated = self.solutions(&spec.domain_box, |t| {
            if !spec.in_domain(&t) {
                out_of_domain += 1;
                ControlFlow::Continue(())
            } else if !spec.accepts(&t) {
                violation = Some(t);
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        Ok(VerdictReport {
            sound: Some(match violation {
                Some(t) => CheckResult::fail(Counterexample::Tuple(t)),
                None => CheckResult::pass(),
            }),
            enumerated,
            out_of_domain,
            ..self.base_report()
        })
    }

    /// Every accepted tuple in the domain has a witness.
    pub fn completeness(&mut self) -> Result<VerdictReport, VerifyError> {
        let spec = self.spec.clone();
        let p = self.prime().clone();
        let (boxes, function) = match &spec.function {
            Some(f) => (f.input_box.clone(), Some(f)),
            None => (spec.domain_box.clone(), None),
        };
        let domains: Vec<Vec<BigUint>> = boxes.iter().map(|d| d.values(&p)).collect();
        let total: BigUint = domains.iter().map(|d| BigUint::from(d.len())).product();
        if total > BigUint::from(self.budget) {
            return Err(VerifyError::BudgetExceeded(total));
        }
        let mut enumerated = 0;
        let mut missing = None;
        let mut digits = vec![0usize; domains.len()];
        'outer: loop {
            enumerated += 1;
            let point: Vec<FieldElement> = digits
                .iter()
                .zip(&domains)
                .map(|(&i, d)| p.elem_from_biguint(d[i].clone()))
                .collect();
            let tuple = match function {
                None => point,
                Some(f) => {
                    let mut t = vec![p.zero(); spec.arity];
                    for (&i, v) in f.inputs.iter().zip(&point) {
                        t[i] = v.clone();
                    }
                    for (&i, v) in f.outputs.iter().zip((f.compute)(&point)) {
                        t[i] = v;
                    }
                    t
                }
            };
            if spec.in_domain(&tuple) && spec.accepts(&tuple) {
                let top = self.top.clone();
                if !self.solver.is_satisfiable(&top, &tuple)? {
                    missing = Some(tuple);
                    break 'outer;
                }
            }
            for (d, dom) in digits.iter_mut().zip(&domains) {
                *d += 1;
                if *d < dom.len() {
                    continue 'outer;
                }
                *d = 0;
            }
            break;
        }
        Ok(VerdictReport {
            complete: Some(match missing {
                Some(t) => CheckResult::fail(Counterexample::Tuple(t)),
                None => CheckResult::pass(),
            }),
            enumerated,
            ..self.base_report()
        })
    }

    /// Parameter indices of the named inputs.
    pub fn input_indices(&self, inputs: &[&str]) -> Result<Vec<usize>, VerifyError> {
        inputs
            .iter()
            .map(|n| {
                self.params
                    .iter()
                    .position(|p| p == n)
                    .ok_or_else(|| VerifyError::UnknownInput(n.to_string()))
            })
            .collect()
    }

    /// No two in-domain solutions agree on `inputs` and differ elsewhere.
    pub fn determinism(&mut self, inputs: &[usize]) -> Result<VerdictReport, VerifyError> {
        let spec = self.spec.clone();
        let mut seen: BTreeMap<Vec<FieldElement>, Vec<FieldElement>> = BTreeMap::new();
        let mut collision = None;
        let mut out_of_domain = 0;
        let enumerated = self.solutions(&spec.domain_box, |t| {
            if !spec.in_domain(&t) {
                out_of_domain += 1;
                return ControlFlow::Continue(());
            }
            let key: Vec<FieldElement> = inputs.iter().map(|&i| t[i].clone()).collect();
            match seen.get(&key) {
                Some(first) => {
                    collision = Some((first.clone(), t));
                    ControlFlow::Break(())
                }
                None => {
                    seen.insert(key, t);
                    ControlFlow::Continue(())
                }
            }
        })?;
        Ok(VerdictReport {
            deterministic: Some(match collision {
                Some((a, b)) => CheckResult::fail(Counterexample::Collision(a, b)),
                None => CheckResult::pass(),
            }),
            inputs: inputs.iter().map(|&i| self.params[i].clone()).collect(),
            enumerated,
            out_of_domain,
            ..self.base_report()
        })
    }

    /// Runs the selected checks. Determinism uses `inputs`, or the spec's
    /// function inputs when `None`; it is skipped if neither is available.
    pub fn run(&mut self, checks: Checks, inputs: Option<&[usize]>) -> Result<VerdictReport, VerifyError> {
        let mut report = self.base_report();
        if checks.sound {
            report.merge(self.soundness()?);
        }
        if checks.complete {
            report.merge(self.completeness()?);
        }
        if checks.deterministic {
            let default = self.spec.default_inputs().map(<[usize]>::to_vec);
            if let Some(inputs) = inputs.map(<[usize]>::to_vec).or(default) {
                report.merge(self.determinism(&inputs)?);
            }
        }
        Ok(report)
    }

    pub fn is_satisfiable(&mut self, t: &[BigUint]) -> Result<bool, VerifyError> {
        let t = self.elems(t);
        let top = self.top.clone();
        Ok(self.solver.is_satisfiable(&top, &t)?)
    }
}

pub fn satisfaction_set(bundle: &GadgetBundle, p: &Prime, budget: u64) -> Result<SatisfactionSet, VerifyError> {
    Harness::for_bundle(bundle, p, budget)?.satisfaction_set()
}

pub fn check_soundness(bundle: &GadgetBundle, p: &Prime, budget: u64) -> Result<VerdictReport, VerifyError> {
    Harness::for_bundle(bundle, p, budget)?.soundness()
}

pub fn check_completeness(bundle: &GadgetBundle, p: &Prime, budget: u64) -> Result<VerdictReport, VerifyError> {
    Harness::for_bundle(bundle, p, budget)?.completeness()
}

pub fn check_deterministic(
    bundle: &GadgetBundle,
    p: &Prime,
    inputs: &[&str],
    budget: u64,
) -> Result<VerdictReport, VerifyError> {
    let mut h = Harness::for_bundle(bundle, p, budget)?;
    let idx = h.input_indices(inputs)?;
    h.determinism(&idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{self, GadgetBundle};
    use crate::pfcs::parse_system;
    use crate::sem::DEFAULT_BUDGET;

    fn p(n: u64) -> Prime {
        Prime::from_u64(n).unwrap()
    }

    fn tuple(q: &Prime, vs: &[u64]) -> Vec<FieldElement> {
        vs.iter().map(|&v| q.elem(v)).collect()
    }

    fn custom(text: &str, top: &str, spec: &str) -> GadgetBundle {
        GadgetBundle {
            defs: parse_system(text).unwrap(),
            top: top.into(),
            spec_id: spec.into(),
        }
    }

    #[test]
    fn satisfaction_set_examples() {
        let s = satisfaction_set(&gadgets::boolean_assert(), &p(7), DEFAULT_BUDGET).unwrap();
        assert_eq!(s.tuples, BTreeSet::from([tuple(&p(7), &[0]), tuple(&p(7), &[1])]));
        let s = satisfaction_set(&gadgets::nand(), &p(5), DEFAULT_BUDGET).unwrap();
        assert_eq!(s.len(), 25);
        assert!(s.contains(&tuple(&p(5), &[1, 1, 0])));
        assert!(s.contains(&tuple(&p(5), &[2, 3, 0])));
        let s = satisfaction_set(&gadgets::equality_test(), &p(3), DEFAULT_BUDGET).unwrap();
        assert_eq!(s.len(), 9);
        for t in &s.tuples {
            assert_eq!(t[2].is_one(), t[0] == t[1]);
        }
    }

    #[test]
    fn soundness_examples() {
        let r = check_soundness(&gadgets::equality_test(), &p(5), DEFAULT_BUDGET).unwrap();
        assert!(r.sound.unwrap().passed);
        let r = check_soundness(&gadgets::if_then_else(), &p(5), DEFAULT_BUDGET).unwrap();
        assert!(r.sound.unwrap().passed);
        // w ∉ {0, 1} solutions are visible but do not count.
        assert!(r.out_of_domain > 0);

        let broken = custom(
            "equality_test(u, v, w) { (u + -1 * v) * s == 1 + -1 * w }",
            "equality_test",
            "equality_test",
        );
        let r = check_soundness(&broken, &p(5), DEFAULT_BUDGET).unwrap();
        let res = r.sound.unwrap();
        assert!(!res.passed);
        let Some(Counterexample::Tuple(t)) = res.counterexample else {
            panic!()
        };
        assert_ne!(t[0], t[1]);
        assert!(t[2].is_one());
    }

    #[test]
    fn completeness_examples() {
        let r = check_completeness(&gadgets::unsigned_add(2).unwrap(), &p(13), DEFAULT_BUDGET).unwrap();
        assert!(r.complete.unwrap().passed);
        assert!(r.hypothesis_holds);
        assert_eq!(r.enumerated, 16);
        let r = check_completeness(&gadgets::boolean_assert(), &p(7), DEFAULT_BUDGET).unwrap();
        assert!(r.complete.unwrap().passed);

        let empty = custom("c(x) { x == 0\n x == 1 }", "c", "bitp");
        let mut h = Harness::for_bundle(&empty, &p(7), DEFAULT_BUDGET).unwrap();
        let r = h
            .run(
                Checks {
                    deterministic: false,
                    ..Checks::ALL
                },
                None,
            )
            .unwrap();
        assert!(r.sound.unwrap().passed);
        let c = r.complete.unwrap();
        assert!(!c.passed);
        assert_eq!(c.counterexample, Some(Counterexample::Tuple(tuple(&p(7), &[0]))));
    }

    #[test]
    fn determinism_examples() {
        let b = gadgets::bits_to_field_unchecked(3).unwrap();
        let r = check_deterministic(&b, &p(7), &["f"], DEFAULT_BUDGET).unwrap();
        let d = r.deterministic.unwrap();
        assert!(!d.passed);
        assert_eq!(
            d.counterexample,
            Some(Counterexample::Collision(
                tuple(&p(7), &[0, 0, 0, 0]),
                tuple(&p(7), &[0, 1, 1, 1])
            ))
        );
        let r = check_deterministic(&gadgets::equality_test(), &p(5), &["u", "v"], DEFAULT_BUDGET).unwrap();
        assert!(r.deterministic.unwrap().passed);
        let r = check_deterministic(&gadgets::if_then_else(), &p(5), &["w", "x", "y"], DEFAULT_BUDGET).unwrap();
        assert!(r.deterministic.unwrap().passed);
        assert!(matches!(
            check_deterministic(&gadgets::nand(), &p(5), &["q"], DEFAULT_BUDGET),
            Err(VerifyError::UnknownInput(_))
        ));
    }

    #[test]
    fn bits_to_field_determinism_threshold() {
        for q in [5u64, 7, 13] {
            for n in 1..=4usize {
                let b = gadgets::bits_to_field_unchecked(n).unwrap();
                let r = check_deterministic(&b, &p(q), &["f"], DEFAULT_BUDGET).unwrap();
                assert_eq!(r.deterministic.unwrap().passed, (1u64 << n) <= q, "n={n} p={q}");
                assert_eq!(known_nondeterministic(&b.spec_id, &p(q)), (1u64 << n) > q);
            }
        }
    }

    #[test]
    fn hypothesis_reported() {
        let b = gadgets::unsigned_add(2).unwrap();
        // 7 has 3 bits; the claim needs 4.
        let r = check_completeness(&b, &p(7), DEFAULT_BUDGET).unwrap();
        assert!(!r.hypothesis_holds);
        assert_eq!(r.hypothesis.as_deref(), Some("the prime has at least 4 bits"));
    }

    #[test]
    fn registry_and_arity() {
        let mut reg = SpecRegistry::new();
        assert!(reg.get("builtin:nand").is_some());
        assert!(reg.get("unsigned_add_0").is_none());
        assert!(reg.get("zero").is_none());
        reg.register(SpecPredicate::new("zero", 1, |t| t[0].is_zero()));
        let spec = reg.get("zero").unwrap();
        let b = gadgets::nand();
        assert!(matches!(
            Harness::new(&b.defs, &b.top, spec.clone(), &p(5), DEFAULT_BUDGET),
            Err(VerifyError::Arity { .. })
        ));
        let sys = parse_system("z(x) { x == 0 }").unwrap();
        let mut h = Harness::new(&sys, "z", spec, &p(5), DEFAULT_BUDGET).unwrap();
        let r = h.run(Checks::ALL, None).unwrap();
        assert!(r.all_passed());
        assert!(r.deterministic.is_none());
    }

    #[test]
    fn budget_errors() {
        let b = gadgets::if_equal_then_else();
        assert!(matches!(
            satisfaction_set(&b, &p(7), 100),
            Err(VerifyError::BudgetExceeded(_))
        ));
    }
}
