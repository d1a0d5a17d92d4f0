//! Compilation of PFCS relations to flat R1CS by inlining calls.
//!
//! Each relation instance gets a call index (the top relation is instance 0,
//! then call sites are numbered in depth-first body order), and its internal
//! variables are renamed to `<relation>.<index>.<local>`. PFCS names cannot
//! contain `.`, so generated names never collide with the top relation's
//! parameters, which keep their own names.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{FieldElement, Prime};
use crate::pfcs::{Constraint, Definition, Expr, System};
use crate::r1cs::{LinearCombination, Monomial, PseudoVar, R1csConstraint, R1csSystem};
use crate::sem::{SemError, Solver};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("`{equality}` is not in R1CS form: {reason}{}", render_path(.path))]
    NotR1csForm {
        equality: String,
        reason: String,
        /// Relations entered from the top, innermost last.
        path: Vec<String>,
    },
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` takes {expected} arguments, got {found}")]
    Arity {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("equivalence check needs {0} candidates, over the budget")]
    BudgetExceeded(BigUint),
    #[error(transparent)]
    Sem(#[from] SemError),
}

fn render_path(path: &[String]) -> String {
    if path.is_empty() {
        String::new()
    } else {
        format!(" (in {})", path.join(" > "))
    }
}

/// One PFCS equality rendered as `(a)(b) = (c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedEquality {
    pub a: LinearCombination,
    pub b: LinearCombination,
    pub c: LinearCombination,
}

impl NormalizedEquality {
    pub fn into_constraint(self) -> R1csConstraint {
        R1csConstraint::new(self.a, self.b, self.c)
    }
}

type Terms = Vec<(BigInt, PseudoVar)>;

/// Sums duplicate pseudo-variables in first-occurrence order and drops zero
/// coefficients. Coefficients stay unreduced integers.
fn merge(terms: Terms) -> Terms {
    let mut order: Vec<PseudoVar> = Vec::new();
    let mut sums: HashMap<PseudoVar, BigInt> = HashMap::new();
    for (c, v) in terms {
        match sums.get_mut(&v) {
            Some(s) => *s += c,
            None => {
                order.push(v.clone());
                sums.insert(v, c);
            }
        }
    }
    order
        .into_iter()
        .filter_map(|v| {
            let c = sums.remove(&v).expect("inserted above");
            (!c.is_zero()).then_some((c, v))
        })
        .collect()
}

fn constant_of(terms: &Terms) -> Option<BigInt> {
    terms
        .iter()
        .all(|(_, v)| *v == PseudoVar::One)
        .then(|| terms.iter().map(|(c, _)| c).sum())
}

fn scale(terms: Terms, k: &BigInt) -> Terms {
    merge(terms.into_iter().map(|(c, v)| (c * k, v)).collect())
}

/// The expression as a linear combination, if it has degree at most one.
fn linear(e: &Expr) -> Option<Terms> {
    match e {
        Expr::Var(n) => Some(vec![(BigInt::one(), PseudoVar::Var(n.clone()))]),
        Expr::Const(k) => Some(merge(vec![(k.clone(), PseudoVar::One)])),
        Expr::Add(l, r) => {
            let mut t = linear(l)?;
            t.extend(linear(r)?);
            Some(merge(t))
        }
        Expr::Mul(l, r) => {
            let (l, r) = (linear(l)?, linear(r)?);
            match (constant_of(&l), constant_of(&r)) {
                (Some(k), _) => Some(scale(r, &k)),
                (_, Some(k)) => Some(scale(l, &k)),
                _ => None,
            }
        }
    }
}

/// Total degree of the fully expanded polynomial.
fn degree(e: &Expr) -> usize {
    fn expand(e: &Expr) -> BTreeMap<Vec<String>, BigInt> {
        match e {
            Expr::Var(n) => BTreeMap::from([(vec![n.clone()], BigInt::one())]),
            Expr::Const(k) => BTreeMap::from([(vec![], k.clone())]),
            Expr::Add(l, r) => {
                let mut out = expand(l);
                for (m, c) in expand(r) {
                    *out.entry(m).or_insert_with(BigInt::zero) += c;
                }
                out
            }
            Expr::Mul(l, r) => {
                let (l, r) = (expand(l), expand(r));
                let mut out = BTreeMap::new();
                for (ml, cl) in &l {
                    for (mr, cr) in &r {
                        let mut m: Vec<String> = ml.iter().chain(mr).cloned().collect();
                        m.sort();
                        *out.entry(m).or_insert_with(BigInt::zero) += cl * cr;
                    }
                }
                out
            }
        }
    }
    expand(e)
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(m, _)| m.len())
        .max()
        .unwrap_or(0)
}

fn add_terms(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Add(l, r) => {
            add_terms(l, out);
            add_terms(r, out);
        }
        _ => out.push(e.clone()),
    }
}

fn mul_factors(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Mul(l, r) => {
            mul_factors(l, out);
            mul_factors(r, out);
        }
        _ => out.push(e.clone()),
    }
}

fn lc(terms: Terms) -> LinearCombination {
    LinearCombination(terms.into_iter().map(|(c, v)| Monomial { coeff: c, pvar: v }).collect())
}

/// Renders `lhs == rhs` as an R1CS constraint.
///
/// The right side must be linear. The left side is either linear, giving
/// `(lhs)(1) = (rhs)`, or a sum of linear terms plus exactly one product of
/// two linear factors `f1 * f2` (constant factors are folded into `f1`),
/// giving `(f1)(f2) = (rhs - linear terms)`.
pub fn normalize_equality(lhs: &Expr, rhs: &Expr) -> Result<NormalizedEquality, FlattenError> {
    let equality = Constraint::equal(lhs.clone(), rhs.clone()).to_string();
    let fail = |reason: String| FlattenError::NotR1csForm {
        equality: equality.clone(),
        reason,
        path: Vec::new(),
    };
    let c = linear(rhs).ok_or_else(|| fail(format!("right side `{rhs}` is not linear")))?;
    if let Some(a) = linear(lhs) {
        return Ok(NormalizedEquality {
            a: lc(a),
            b: LinearCombination::constant(1),
            c: lc(c),
        });
    }
    let d = degree(lhs);
    if d > 2 {
        return Err(fail(format!("left side `{lhs}` has degree {d}")));
    }
    let mut terms = Vec::new();
    add_terms(lhs, &mut terms);
    let mut linear_part: Terms = Vec::new();
    let mut product: Option<(Terms, Terms)> = None;
    for t in &terms {
        if let Some(l) = linear(t) {
            linear_part.extend(l);
            continue;
        }
        let mut factors = Vec::new();
        mul_factors(t, &mut factors);
        let mut k = BigInt::one();
        let mut nonconstant = Vec::new();
        for f in &factors {
            let l = linear(f).ok_or_else(|| fail(format!("factor `{f}` is not linear")))?;
            match constant_of(&l) {
                Some(c) => k *= c,
                None => nonconstant.push(l),
            }
        }
        if nonconstant.len() != 2 || product.is_some() {
            return Err(fail(format!(
                "left side `{lhs}` is not a single product of two linear factors"
            )));
        }
        let f2 = nonconstant.pop().expect("two factors");
        let f1 = nonconstant.pop().expect("two factors");
        product = Some((scale(f1, &k), f2));
    }
    let (a, b) = product.expect("a non-linear left side has a product term");
    let mut c = c;
    c.extend(linear_part.into_iter().map(|(k, v)| (-k, v)));
    Ok(NormalizedEquality {
        a: lc(a),
        b: lc(b),
        c: lc(merge(c)),
    })
}

/// The flat R1CS form of a relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlattenResult {
    /// Externals first (parameter order), then internals in generation order.
    pub system: R1csSystem,
    /// Parameter name to R1CS variable name, in parameter order.
    pub external_map: Vec<(String, String)>,
    pub internal_names: Vec<String>,
}

impl FlattenResult {
    /// The same constraints read at another prime.
    pub fn at_prime(&self, p: &Prime) -> FlattenResult {
        let mut out = self.clone();
        out.system.prime = p.clone();
        out
    }

    pub fn external_vars(&self) -> Vec<&str> {
        self.external_map.iter().map(|(_, v)| v.as_str()).collect()
    }
}

struct Inliner<'a> {
    defs: &'a System,
    constraints: Vec<R1csConstraint>,
    internals: Vec<String>,
    instances: usize,
    path: Vec<String>,
}

impl Inliner<'_> {
    fn inline(&mut self, def: &Definition, mut subst: HashMap<String, Expr>) -> Result<(), FlattenError> {
        let instance = self.instances;
        self.instances += 1;
        self.path.push(def.name.clone());
        for local in def.internal_vars() {
            let fresh = format!("{}.{}.{}", def.name, instance, local);
            self.internals.push(fresh.clone());
            subst.insert(local.to_string(), Expr::Var(fresh));
        }
        let lookup = |n: &str| subst.get(n).cloned();
        for c in &def.body {
            match c {
                Constraint::Equal { lhs, rhs } => {
                    let (lhs, rhs) = (lhs.substitute(&lookup), rhs.substitute(&lookup));
                    let eq = normalize_equality(&lhs, &rhs).map_err(|e| match e {
                        FlattenError::NotR1csForm { equality, reason, .. } => FlattenError::NotR1csForm {
                            equality,
                            reason,
                            path: self.path.clone(),
                        },
                        other => other,
                    })?;
                    self.constraints.push(eq.into_constraint());
                }
                Constraint::Call { name, args } => {
                    let callee = self
                        .defs
                        .get(name)
                        .ok_or_else(|| FlattenError::UnknownRelation(name.clone()))?;
                    if callee.params.len() != args.len() {
                        return Err(FlattenError::Arity {
                            relation: name.clone(),
                            expected: callee.params.len(),
                            found: args.len(),
                        });
                    }
                    let inner = callee
                        .params
                        .iter()
                        .cloned()
                        .zip(args.iter().map(|a| a.substitute(&lookup)))
                        .collect();
                    self.inline(callee, inner)?;
                }
            }
        }
        self.path.pop();
        Ok(())
    }
}

/// Inlines every call reachable from `relname` into one R1CS system over `p`.
/// Coefficients are left as unreduced integers.
pub fn flatten(defs: &System, relname: &str, p: &Prime) -> Result<FlattenResult, FlattenError> {
    let def = defs
        .get(relname)
        .ok_or_else(|| FlattenError::UnknownRelation(relname.to_string()))?;
    let mut inliner = Inliner {
        defs,
        constraints: Vec::new(),
        internals: Vec::new(),
        instances: 0,
        path: Vec::new(),
    };
    let subst = def.params.iter().map(|n| (n.clone(), Expr::var(n))).collect();
    inliner.inline(def, subst)?;
    let variables = def
        .params
        .iter()
        .cloned()
        .chain(inliner.internals.iter().cloned())
        .collect();
    Ok(FlattenResult {
        system: R1csSystem::new(p.clone(), variables, inliner.constraints),
        external_map: def.params.iter().map(|n| (n.clone(), n.clone())).collect(),
        internal_names: inliner.internals,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivReport {
    pub equivalent: bool,
    /// External tuples compared.
    pub checked: u64,
    /// First disagreeing external tuple, with the PFCS and R1CS verdicts.
    pub counterexample: Option<(Vec<FieldElement>, bool, bool)>,
}

/// Flattens `relname` and checks [`check_flatten_equiv`] on the result.
pub fn flatten_equiv_report(defs: &System, relname: &str, p: &Prime, budget: u64) -> Result<EquivReport, FlattenError> {
    let flat = flatten(defs, relname, p)?;
    check_flatten_equiv(defs, relname, &flat, p, budget)
}

/// For every assignment of 𝔽_p to the parameters, compares PFCS
/// satisfiability against existence of values for the remaining variables of
/// `flat` satisfying every constraint. Needs `p^(externals + internals)` to
/// be within `budget`.
pub fn check_flatten_equiv(
    defs: &System,
    relname: &str,
    flat: &FlattenResult,
    p: &Prime,
    budget: u64,
) -> Result<EquivReport, FlattenError> {
    let sys = flat.at_prime(p).system;
    let externals: Vec<&str> = flat.external_vars();
    let external_set: BTreeSet<&str> = externals.iter().copied().collect();
    let internals: Vec<&str> = sys
        .variables
        .iter()
        .map(String::as_str)
        .filter(|v| !external_set.contains(v))
        .collect();
    let total = num_traits::pow::pow(p.value().clone(), externals.len() + internals.len());
    if total > BigUint::from(budget) {
        return Err(FlattenError::BudgetExceeded(total));
    }
    let q = p.to_u64().expect("within budget");

    // Dense order: externals, then internals.
    let dense = R1csSystem::new(
        p.clone(),
        externals.iter().chain(&internals).map(|s| s.to_string()).collect(),
        sys.constraints.clone(),
    );
    let compiled = dense.compile()?;
    let mut solver = Solver::new(defs, p.clone(), budget);
    let mut checked = 0;
    let mut ext = vec![0u64; externals.len()];
    loop {
        let args: Vec<FieldElement> = ext.iter().map(|&v| p.elem(v)).collect();
        let pfcs = solver.is_satisfiable(relname, &args)?;
        let mut values: Vec<BigUint> = ext.iter().map(|&v| BigUint::from(v)).collect();
        values.resize(externals.len() + internals.len(), BigUint::zero());
        let mut int = vec![0u64; internals.len()];
        let r1cs = loop {
            for (i, v) in int.iter().enumerate() {
                values[externals.len() + i] = BigUint::from(*v);
            }
            if compiled.holds(&values) {
                break true;
            }
            if !odometer(&mut int, q) {
                break false;
            }
        };
        checked += 1;
        if pfcs != r1cs {
            return Ok(EquivReport {
                equivalent: false,
                checked,
                counterexample: Some((args, pfcs, r1cs)),
            });
        }
        if !odometer(&mut ext, q) {
            break;
        }
    }
    Ok(EquivReport {
        equivalent: true,
        checked,
        counterexample: None,
    })
}

impl From<crate::r1cs::EvalError> for FlattenError {
    fn from(e: crate::r1cs::EvalError) -> Self {
        match e {
            crate::r1cs::EvalError::Unbound(v) => FlattenError::Sem(SemError::Unbound(v)),
        }
    }
}

/// Advances a little-endian counter with digits `0..base`; false on wrap.
pub(crate) fn odometer(digits: &mut [u64], base: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
