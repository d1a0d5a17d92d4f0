//! Executable semantics for PFCS.
//!
//! An assignment satisfies an equality when both sides evaluate to the same
//! field element. It satisfies a call `r(e1, ..., en)` when some extension of
//! `{v1 ↦ ρ(e1), ..., vn ↦ ρ(en)}` to the internal variables of `r` satisfies
//! every constraint of the body. Derivations are recorded as [`ProofTree`]s
//! and validated by [`check_proof`]; [`Solver`] searches for them.

use std::collections::HashMap;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::field::{FieldElement, Prime};
use crate::pfcs::{Constraint, Expr, System};
use crate::r1cs::Valuation;

/// Default cap on candidate assignments examined by a search.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Finite map from variables to field elements.
pub type Assignment = Valuation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemError {
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` takes {expected} arguments, got {found}")]
    Arity {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` is not an internal variable of the relation")]
    NotInternal(String),
    #[error("value of `{0}` belongs to a different field")]
    WrongField(String),
    #[error("search space of {0} candidates exceeds the budget")]
    BudgetExceeded(BigUint),
}

/// Evaluates an expression; constants are reduced modulo `p`.
pub fn eval_expr(e: &Expr, rho: &Assignment, p: &Prime) -> Result<FieldElement, SemError> {
    match e {
        Expr::Var(n) => {
            let v = rho.get(n).ok_or_else(|| SemError::Unbound(n.clone()))?;
            if v.modulus() != p {
                return Err(SemError::WrongField(n.clone()));
            }
            Ok(v.clone())
        }
        Expr::Const(k) => Ok(p.elem(k.clone())),
        Expr::Add(l, r) => Ok(&eval_expr(l, rho, p)? + &eval_expr(r, rho, p)?),
        Expr::Mul(l, r) => Ok(&eval_expr(l, rho, p)? * &eval_expr(r, rho, p)?),
    }
}

/// A derivation that an assignment satisfies a constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofTree {
    Equality {
        constraint: Constraint,
    },
    Call {
        constraint: Constraint,
        /// Assignment for the callee's body: parameters and internals.
        extended: Assignment,
        /// One subtree per body constraint.
        subtrees: Vec<ProofTree>,
    },
}

impl ProofTree {
    pub fn constraint(&self) -> &Constraint {
        match self {
            ProofTree::Equality { constraint } | ProofTree::Call { constraint, .. } => constraint,
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            ProofTree::Equality { .. } => 1,
            ProofTree::Call { subtrees, .. } => 1 + subtrees.iter().map(ProofTree::size).sum::<usize>(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("proof node is for `{found}` but the constraint is `{expected}`")]
    ConstraintMismatch { expected: String, found: String },
    #[error("equality `{0}` does not hold")]
    EqualityFails(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` takes {expected} arguments, got {found}")]
    Arity {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("extended assignment maps parameter `{0}` to the wrong value")]
    WrongParameter(String),
    #[error("relation `{relation}` has {expected} body constraints but the proof has {found} subtrees")]
    SubtreeCount {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Eval(#[from] SemError),
}

/// Checks that `tree` derives "`rho` satisfies `c`" in the context of `defs`.
pub fn check_proof(
    defs: &System,
    c: &Constraint,
    rho: &Assignment,
    tree: &ProofTree,
    p: &Prime,
) -> Result<(), ProofError> {
    if tree.constraint() != c {
        return Err(ProofError::ConstraintMismatch {
            expected: c.to_string(),
            found: tree.constraint().to_string(),
        });
    }
    match (c, tree) {
        (Constraint::Equal { lhs, rhs }, ProofTree::Equality { .. }) => {
            if eval_expr(lhs, rho, p)? == eval_expr(rhs, rho, p)? {
                Ok(())
            } else {
                Err(ProofError::EqualityFails(c.to_string()))
            }
        }
        (Constraint::Call { name, args }, ProofTree::Call { extended, subtrees, .. }) => {
            let def = defs
                .get(name)
                .ok_or_else(|| ProofError::UnknownRelation(name.clone()))?;
            if def.params.len() != args.len() {
                return Err(ProofError::Arity {
                    relation: name.clone(),
                    expected: def.params.len(),
                    found: args.len(),
                });
            }
            for (param, arg) in def.params.iter().zip(args) {
                let v = eval_expr(arg, rho, p)?;
                if extended.get(param) != Some(&v) {
                    return Err(ProofError::WrongParameter(param.clone()));
                }
            }
            if subtrees.len() != def.body.len() {
                return Err(ProofError::SubtreeCount {
                    relation: name.clone(),
                    expected: def.body.len(),
                    found: subtrees.len(),
                });
            }
            for (body_c, sub) in def.body.iter().zip(subtrees) {
                check_proof(defs, body_c, extended, sub, p)?;
            }
            Ok(())
        }
        _ => Err(ProofError::ConstraintMismatch {
            expected: c.to_string(),
            found: "a proof node of the other kind".to_string(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Satisfied(ProofTree),
    Unsatisfiable,
    /// The search space (this many candidates) exceeded the budget.
    Aborted(BigUint),
}

impl SatOutcome {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, SatOutcome::Satisfied(_))
    }
}

/// Internal variables of `relname`'s body, in order of first occurrence.
pub fn internal_vars(defs: &System, relname: &str) -> Result<Vec<String>, SemError> {
    let def = defs
        .get(relname)
        .ok_or_else(|| SemError::UnknownRelation(relname.to_string()))?;
    Ok(def.internal_vars().into_iter().map(String::from).collect())
}

/// Searches for internal values satisfying `relname(args)`; see [`Solver`].
pub fn sat_search(
    defs: &System,
    relname: &str,
    args: &[FieldElement],
    p: &Prime,
    budget: u64,
) -> Result<SatOutcome, SemError> {
    Solver::new(defs, p.clone(), budget).solve(relname, args)
}

#[derive(Debug, Clone)]
enum CExpr {
    Slot(usize),
    Const(BigUint),
    Add(Box<CExpr>, Box<CExpr>),
    Mul(Box<CExpr>, Box<CExpr>),
}

impl CExpr {
    fn compile(e: &Expr, slots: &HashMap<&str, usize>, p: &Prime) -> CExpr {
        match e {
            Expr::Var(n) => CExpr::Slot(slots[n.as_str()]),
            Expr::Const(k) => CExpr::Const(p.reduce(k)),
            Expr::Add(l, r) => CExpr::Add(
                Box::new(Self::compile(l, slots, p)),
                Box::new(Self::compile(r, slots, p)),
            ),
            Expr::Mul(l, r) => CExpr::Mul(
                Box::new(Self::compile(l, slots, p)),
                Box::new(Self::compile(r, slots, p)),
            ),
        }
    }

    fn eval(&self, slots: &[BigUint], p: &BigUint) -> BigUint {
        match self {
            CExpr::Slot(i) => slots[*i].clone(),
            CExpr::Const(k) => k.clone(),
            CExpr::Add(l, r) => {
                let s = l.eval(slots, p) + r.eval(slots, p);
                if s >= *p {
                    s - p
                } else {
                    s
                }
            }
            CExpr::Mul(l, r) => l.eval(slots, p) * r.eval(slots, p) % p,
        }
    }
}

#[derive(Debug, Clone)]
enum CConstraint {
    Equal(CExpr, CExpr),
    Call(usize, Vec<CExpr>),
}

#[derive(Debug)]
struct CompiledDef {
    arity: usize,
    internals: Vec<String>,
    body: Vec<CConstraint>,
    /// `ready[i]`: number of internals that must be assigned before body
    /// constraint `i` can be checked.
    ready: Vec<usize>,
    /// For constraints without internals, the number of parameters that must
    /// be assigned; `None` if the constraint mentions internals.
    param_ready: Vec<Option<usize>>,
    space: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Found {
    Yes(Vec<BigUint>),
    No,
    Aborted(BigUint),
}

/// Memoizing witness search at a fixed prime.
///
/// Internal variables are enumerated lexicographically in first-occurrence
/// order with values `0..p`, so a reported witness is the least one. Each
/// call searches only its callee's own internals; results are cached per
/// `(relation, argument values)`. A relation whose local space `p^k` exceeds
/// the budget is reported as aborted, as is any query examining more than
/// `budget` candidates in total.
pub struct Solver<'a> {
    defs: &'a System,
    prime: Prime,
    budget: u64,
    compiled: Vec<Option<CompiledDef>>,
    cache: HashMap<(usize, Vec<BigUint>), Found>,
    work: u64,
}

impl<'a> Solver<'a> {
    pub fn new(defs: &'a System, prime: Prime, budget: u64) -> Self {
        Solver {
            defs,
            prime,
            budget,
            compiled: (0..defs.len()).map(|_| None).collect(),
            cache: HashMap::new(),
            work: 0,
        }
    }

    pub fn prime(&self) -> &Prime {
        &self.prime
    }

    pub fn defs(&self) -> &'a System {
        self.defs
    }

    fn index_of(&self, relname: &str) -> Result<usize, SemError> {
        self.defs
            .position(relname)
            .ok_or_else(|| SemError::UnknownRelation(relname.to_string()))
    }

    fn cd(&self, idx: usize) -> &CompiledDef {
        self.compiled[idx].as_ref().expect("definition compiled before use")
    }

    /// Compiles `idx` and, first, every relation it calls.
    fn compile(&mut self, idx: usize) -> Result<(), SemError> {
        if self.compiled[idx].is_some() {
            return Ok(());
        }
        let def = &self.defs.definitions()[idx];
        let internals: Vec<String> = def.internal_vars().into_iter().map(String::from).collect();
        let slots: HashMap<&str, usize> = def
            .params
            .iter()
            .map(String::as_str)
            .chain(internals.iter().map(String::as_str))
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        let arity = def.params.len();
        let mut body = Vec::new();
        let mut ready = Vec::new();
        let mut param_ready = Vec::new();
        for c in &def.body {
            let used: Vec<usize> = c.vars().iter().map(|v| slots[v]).collect();
            let max_internal = used.iter().filter(|&&s| s >= arity).map(|s| s - arity + 1).max();
            ready.push(max_internal.unwrap_or(0));
            param_ready.push(match max_internal {
                Some(_) => None,
                None => Some(used.iter().map(|s| s + 1).max().unwrap_or(0)),
            });
            body.push(match c {
                Constraint::Equal { lhs, rhs } => CConstraint::Equal(
                    CExpr::compile(lhs, &slots, &self.prime),
                    CExpr::compile(rhs, &slots, &self.prime),
                ),
                Constraint::Call { name, args } => {
                    let callee = self.index_of(name)?;
                    let expected = self.defs.definitions()[callee].params.len();
                    if expected != args.len() {
                        return Err(SemError::Arity {
                            relation: name.clone(),
                            expected,
                            found: args.len(),
                        });
                    }
                    self.compile(callee)?;
                    CConstraint::Call(
                        callee,
                        args.iter().map(|a| CExpr::compile(a, &slots, &self.prime)).collect(),
                    )
                }
            });
        }
        let space = num_traits::pow::pow(self.prime.value().clone(), internals.len());
        self.compiled[idx] = Some(CompiledDef {
            arity,
            internals,
            body,
            ready,
            param_ready,
            space,
        });
        Ok(())
    }

    /// Checks one body constraint of `idx` under `slots`. `Err` carries an
    /// abort from a nested search.
    fn check(&mut self, idx: usize, ci: usize, slots: &[BigUint]) -> Result<bool, BigUint> {
        let p = self.prime.value().clone();
        let c = self.cd(idx).body[ci].clone();
        match c {
            CConstraint::Equal(l, r) => Ok(l.eval(slots, &p) == r.eval(slots, &p)),
            CConstraint::Call(callee, args) => {
                let vals: Vec<BigUint> = args.iter().map(|a| a.eval(slots, &p)).collect();
                match self.search(callee, vals) {
                    Found::Yes(_) => Ok(true),
                    Found::No => Ok(false),
                    Found::Aborted(n) => Err(n),
                }
            }
        }
    }

    fn search(&mut self, idx: usize, args: Vec<BigUint>) -> Found {
        let key = (idx, args);
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let (idx, args) = key;
        let pins = vec![None; self.cd(idx).internals.len()];
        let found = self.search_pinned(idx, &args, &pins);
        // Aborts caused by the work counter depend on the query; only
        // space-based aborts are a property of the relation.
        if !matches!(found, Found::Aborted(_)) || self.cd(idx).space > BigUint::from(self.budget) {
            self.cache.insert((idx, args), found.clone());
        }
        found
    }

    fn search_pinned(&mut self, idx: usize, args: &[BigUint], pins: &[Option<BigUint>]) -> Found {
        let cd = self.cd(idx);
        let k = cd.internals.len();
        let arity = cd.arity;
        let mut space = BigUint::one();
        for pin in pins {
            if pin.is_none() {
                space *= self.prime.value();
            }
        }
        if space > BigUint::from(self.budget) {
            return Found::Aborted(space);
        }
        let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
        for (ci, &level) in cd.ready.iter().enumerate() {
            by_level[level].push(ci);
        }
        let mut slots: Vec<BigUint> = args.to_vec();
        slots.resize(arity + k, BigUint::zero());
        match self.dfs(idx, 0, &by_level, pins, &mut slots) {
            Ok(true) => Found::Yes(slots[arity..].to_vec()),
            Ok(false) => Found::No,
            Err(n) => Found::Aborted(n),
        }
    }

    fn dfs(
        &mut self,
        idx: usize,
        level: usize,
        by_level: &[Vec<usize>],
        pins: &[Option<BigUint>],
        slots: &mut Vec<BigUint>,
    ) -> Result<bool, BigUint> {
        for &ci in &by_level[level] {
            if !self.check(idx, ci, slots)? {
                return Ok(false);
            }
        }
        if level == pins.len() {
            return Ok(true);
        }
        let slot = slots.len() - pins.len() + level;
        if let Some(v) = &pins[level] {
            slots[slot] = v.clone();
            return self.dfs(idx, level + 1, by_level, pins, slots);
        }
        let p = self.prime.value().clone();
        let mut v = BigUint::zero();
        while v < p {
            self.work += 1;
            if self.work > self.budget {
                return Err(BigUint::from(self.work));
            }
            slots[slot] = v.clone();
            if self.dfs(idx, level + 1, by_level, pins, slots)? {
                return Ok(true);
            }
            v += 1u32;
        }
        Ok(false)
    }

    fn check_args(&mut self, relname: &str, args: &[FieldElement]) -> Result<(usize, Vec<BigUint>), SemError> {
        let idx = self.index_of(relname)?;
        self.compile(idx)?;
        let arity = self.cd(idx).arity;
        if args.len() != arity {
            return Err(SemError::Arity {
                relation: relname.to_string(),
                expected: arity,
                found: args.len(),
            });
        }
        let params = &self.defs.definitions()[idx].params;
        let vals = args
            .iter()
            .zip(params)
            .map(|(a, name)| {
                if a.modulus() == &self.prime {
                    Ok(a.value().clone())
                } else {
                    Err(SemError::WrongField(name.clone()))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok((idx, vals))
    }

    /// Decides `relname(args)` without building a proof tree.
    pub fn is_satisfiable(&mut self, relname: &str, args: &[FieldElement]) -> Result<bool, SemError> {
        let (idx, vals) = self.check_args(relname, args)?;
        self.work = 0;
        match self.search(idx, vals) {
            Found::Yes(_) => Ok(true),
            Found::No => Ok(false),
            Found::Aborted(n) => Err(SemError::BudgetExceeded(n)),
        }
    }

    /// Searches for a witness of `relname(args)`.
    pub fn solve(&mut self, relname: &str, args: &[FieldElement]) -> Result<SatOutcome, SemError> {
        self.solve_with(relname, args, &Assignment::new())
    }

    /// Like [`Solver::solve`], with some top-level internals fixed by `fixed`.
    pub fn solve_with(
        &mut self,
        relname: &str,
        args: &[FieldElement],
        fixed: &Assignment,
    ) -> Result<SatOutcome, SemError> {
        let (idx, vals) = self.check_args(relname, args)?;
        let internals = self.cd(idx).internals.clone();
        for name in fixed.keys() {
            if !internals.contains(name) {
                return Err(SemError::NotInternal(name.clone()));
            }
        }
        let pins: Vec<Option<BigUint>> = internals
            .iter()
            .map(|n| match fixed.get(n) {
                Some(v) if v.modulus() != &self.prime => Err(SemError::WrongField(n.clone())),
                Some(v) => Ok(Some(v.value().clone())),
                None => Ok(None),
            })
            .collect::<Result<_, _>>()?;
        self.work = 0;
        let found = if fixed.is_empty() {
            self.search(idx, vals.clone())
        } else {
            self.search_pinned(idx, &vals, &pins)
        };
        Ok(match found {
            Found::Yes(internal_vals) => {
                let (extended, subtrees) = self.build(idx, &vals, &internal_vals);
                SatOutcome::Satisfied(ProofTree::Call {
                    constraint: self.defs.definitions()[idx].self_call(),
                    extended,
                    subtrees,
                })
            }
            Found::No => SatOutcome::Unsatisfiable,
            Found::Aborted(n) => SatOutcome::Aborted(n),
        })
    }

    fn build(&mut self, idx: usize, args: &[BigUint], internal_vals: &[BigUint]) -> (Assignment, Vec<ProofTree>) {
        let def = &self.defs.definitions()[idx];
        let mut extended = Assignment::new();
        let mut slots = Vec::with_capacity(args.len() + internal_vals.len());
        for (name, v) in def
            .params
            .iter()
            .zip(args)
            .chain(self.cd(idx).internals.iter().zip(internal_vals))
        {
            extended.insert(name.clone(), self.prime.elem_from_biguint(v.clone()));
            slots.push(v.clone());
        }
        let p = self.prime.value().clone();
        let body = self.cd(idx).body.clone();
        let mut subtrees = Vec::with_capacity(body.len());
        for (c, ast) in body.iter().zip(&def.body) {
            subtrees.push(match c {
                CConstraint::Equal(..) => ProofTree::Equality {
                    constraint: ast.clone(),
                },
                CConstraint::Call(callee, cargs) => {
                    let vals: Vec<BigUint> = cargs.iter().map(|a| a.eval(&slots, &p)).collect();
                    let Found::Yes(inner) = self.search(*callee, vals.clone()) else {
                        unreachable!("sub-call of a witness was satisfied during the search")
                    };
                    let (extended, subtrees) = self.build(*callee, &vals, &inner);
                    ProofTree::Call {
                        constraint: ast.clone(),
                        extended,
                        subtrees,
                    }
                }
            });
        }
        (extended, subtrees)
    }

    /// Enumerates the tuples of parameter values of `relname`, drawing
    /// parameter `i` from `domains[i]` in order, for which the relation is
    /// satisfiable. Body constraints that mention only parameters prune the
    /// enumeration as soon as their parameters are assigned. `visit` may stop
    /// the enumeration early. Fails with [`SemError::BudgetExceeded`] when
    /// more than `budget` partial tuples are visited.
    pub fn enumerate_relation(
        &mut self,
        relname: &str,
        domains: &[Vec<BigUint>],
        budget: u64,
        visit: &mut dyn FnMut(&[BigUint]) -> ControlFlow<()>,
    ) -> Result<u64, SemError> {
        let idx = self.index_of(relname)?;
        self.compile(idx)?;
        let cd = self.cd(idx);
        let arity = cd.arity;
        if domains.len() != arity {
            return Err(SemError::Arity {
                relation: relname.to_string(),
                expected: arity,
                found: domains.len(),
            });
        }
        let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); arity + 1];
        for (ci, r) in cd.param_ready.iter().enumerate() {
            if let Some(level) = r {
                by_level[*level].push(ci);
            }
        }
        let mut state = Enumeration {
            by_level,
            domains,
            budget,
            visited: 0,
            tuple: Vec::with_capacity(arity),
        };
        let _ = self.enumerate_level(idx, &mut state, visit)?;
        Ok(state.visited)
    }

    fn enumerate_level(
        &mut self,
        idx: usize,
        st: &mut Enumeration<'_>,
        visit: &mut dyn FnMut(&[BigUint]) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>, SemError> {
        let level = st.tuple.len();
        for &ci in &st.by_level[level] {
            self.work = 0;
            match self.check(idx, ci, &st.tuple) {
                Ok(true) => {}
                Ok(false) => return Ok(ControlFlow::Continue(())),
                Err(n) => return Err(SemError::BudgetExceeded(n)),
            }
        }
        if level == st.domains.len() {
            self.work = 0;
            return match self.search(idx, st.tuple.clone()) {
                Found::Yes(_) => Ok(visit(&st.tuple)),
                Found::No => Ok(ControlFlow::Continue(())),
                Found::Aborted(n) => Err(SemError::BudgetExceeded(n)),
            };
        }
        for v in &st.domains[level] {
            st.visited += 1;
            if st.visited > st.budget {
                return Err(SemError::BudgetExceeded(BigUint::from(st.visited)));
            }
            st.tuple.push(v.clone());
            let flow = self.enumerate_level(idx, st, visit)?;
            st.tuple.pop();
            if flow.is_break() {
                return Ok(flow);
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

struct Enumeration<'d> {
    by_level: Vec<Vec<usize>>,
    domains: &'d [Vec<BigUint>],
    budget: u64,
    visited: u64,
    tuple: Vec<BigUint>,
}

/// `p^k`, saturating at `u64::MAX`.
pub fn space_size(p: &Prime, k: usize) -> u64 {
    num_traits::pow::pow(p.value().clone(), k).to_u64().unwrap_or(u64::MAX)
}

/// The assignment `{params ↦ args}` for a top-level query.
pub fn initial_assignment(defs: &System, relname: &str, args: &[FieldElement]) -> Result<Assignment, SemError> {
    let def = defs
        .get(relname)
        .ok_or_else(|| SemError::UnknownRelation(relname.to_string()))?;
    if def.params.len() != args.len() {
        return Err(SemError::Arity {
            relation: relname.to_string(),
            expected: def.params.len(),
            found: args.len(),
        });
    }
    Ok(def.params.iter().cloned().zip(args.iter().cloned()).collect())
}
