//! Prime field constraint systems (PFCS): equality constraints over `+`/`*`
//! expressions, plus named relations that can be called as constraints.
//!
//! A [`System`] is an ordered list of relation definitions in which every call
//! refers to a definition appearing earlier, so there is no recursion.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

mod parse;
mod print;

pub use parse::{parse_system, ParseError};
pub use print::{print_constraint, print_definition, print_expr, print_system};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Const(BigInt),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn constant(k: impl Into<BigInt>) -> Self {
        Expr::Const(k.into())
    }

    pub fn add(l: Expr, r: Expr) -> Self {
        Expr::Add(Box::new(l), Box::new(r))
    }

    pub fn mul(l: Expr, r: Expr) -> Self {
        Expr::Mul(Box::new(l), Box::new(r))
    }

    /// `k * e`, or just `e` when `k` is one.
    pub fn scaled(k: impl Into<BigInt>, e: Expr) -> Self {
        let k = k.into();
        if k == BigInt::from(1) {
            e
        } else {
            Expr::mul(Expr::Const(k), e)
        }
    }

    /// `l + -1 * r`; the language has no subtraction operator.
    pub fn sub(l: Expr, r: Expr) -> Self {
        Expr::add(l, Expr::mul(Expr::constant(-1), r))
    }

    /// Left-nested sum of the terms; `0` when empty.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Self {
        terms.into_iter().reduce(Expr::add).unwrap_or_else(|| Expr::constant(0))
    }

    /// Collects variable names in order of first occurrence.
    pub fn collect_vars<'a>(&'a self, seen: &mut BTreeSet<&'a str>, out: &mut Vec<&'a str>) {
        match self {
            Expr::Var(n) => {
                if seen.insert(n) {
                    out.push(n);
                }
            }
            Expr::Const(_) => {}
            Expr::Add(l, r) | Expr::Mul(l, r) => {
                l.collect_vars(seen, out);
                r.collect_vars(seen, out);
            }
        }
    }

    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut BTreeSet::new(), &mut out);
        out
    }

    /// Replaces variables according to `f`; variables mapped to `None` stay.
    pub fn substitute(&self, f: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Var(n) => f(n).unwrap_or_else(|| self.clone()),
            Expr::Const(_) => self.clone(),
            Expr::Add(l, r) => Expr::add(l.substitute(f), r.substitute(f)),
            Expr::Mul(l, r) => Expr::mul(l.substitute(f), r.substitute(f)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Add(l, r) | Expr::Mul(l, r) => 1 + l.depth().max(r.depth()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_expr(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint {
    Equal { lhs: Expr, rhs: Expr },
    Call { name: String, args: Vec<Expr> },
}

impl Constraint {
    pub fn equal(lhs: Expr, rhs: Expr) -> Self {
        Constraint::Equal { lhs, rhs }
    }

    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Self {
        Constraint::Call {
            name: name.into(),
            args,
        }
    }

    pub fn collect_vars<'a>(&'a self, seen: &mut BTreeSet<&'a str>, out: &mut Vec<&'a str>) {
        match self {
            Constraint::Equal { lhs, rhs } => {
                lhs.collect_vars(seen, out);
                rhs.collect_vars(seen, out);
            }
            Constraint::Call { args, .. } => {
                for a in args {
                    a.collect_vars(seen, out);
                }
            }
        }
    }

    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut BTreeSet::new(), &mut out);
        out
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_constraint(self))
    }
}

/// A named relation `name(params) { body }`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Definition {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Constraint>,
}

impl Definition {
    pub fn new(name: impl Into<String>, params: Vec<String>, body: Vec<Constraint>) -> Self {
        Definition {
            name: name.into(),
            params,
            body,
        }
    }

    /// Variables of the body that are not parameters, in order of first
    /// occurrence. Variables local to called relations are not included.
    pub fn internal_vars(&self) -> Vec<&str> {
        let mut seen: BTreeSet<&str> = self.params.iter().map(String::as_str).collect();
        let mut out = Vec::new();
        for c in &self.body {
            c.collect_vars(&mut seen, &mut out);
        }
        out
    }

    /// The call `name(p1, ..., pn)` on the definition's own parameters.
    pub fn self_call(&self) -> Constraint {
        Constraint::call(self.name.clone(), self.params.iter().map(Expr::var).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("duplicate definition of relation `{0}`")]
    DuplicateDefinition(String),
    #[error("duplicate parameter `{param}` in relation `{relation}`")]
    DuplicateParameter { relation: String, param: String },
    #[error("relation `{callee}` called from `{caller}` is not defined before use")]
    UnknownRelation { caller: String, callee: String },
    #[error("`{caller}` calls `{callee}` with {found} arguments, expected {expected}")]
    Arity {
        caller: String,
        callee: String,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` is not a valid name")]
    InvalidName(String),
}

pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An ordered, acyclic list of relation definitions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct System {
    defs: Vec<Definition>,
}

impl System {
    pub fn new(defs: Vec<Definition>) -> Result<Self, SystemError> {
        let mut sys = System::default();
        for d in defs {
            sys.push(d)?;
        }
        Ok(sys)
    }

    /// Appends a definition; it may only call relations already present.
    pub fn push(&mut self, def: Definition) -> Result<(), SystemError> {
        if !is_valid_name(&def.name) {
            return Err(SystemError::InvalidName(def.name));
        }
        if self.get(&def.name).is_some() {
            return Err(SystemError::DuplicateDefinition(def.name));
        }
        let mut params = BTreeSet::new();
        for p in &def.params {
            if !is_valid_name(p) {
                return Err(SystemError::InvalidName(p.clone()));
            }
            if !params.insert(p) {
                return Err(SystemError::DuplicateParameter {
                    relation: def.name.clone(),
                    param: p.clone(),
                });
            }
        }
        for c in &def.body {
            if let Some(bad) = c.vars().into_iter().find(|v| !is_valid_name(v)) {
                return Err(SystemError::InvalidName(bad.to_string()));
            }
            if let Constraint::Call { name, args } = c {
                let Some(callee) = self.get(name) else {
                    return Err(SystemError::UnknownRelation {
                        caller: def.name.clone(),
                        callee: name.clone(),
                    });
                };
                if callee.params.len() != args.len() {
                    return Err(SystemError::Arity {
                        caller: def.name.clone(),
                        callee: name.clone(),
                        expected: callee.params.len(),
                        found: args.len(),
                    });
                }
            }
        }
        self.defs.push(def);
        Ok(())
    }

    /// Appends every definition of `other` not already present by name.
    pub fn merge(&mut self, other: &System) -> Result<(), SystemError> {
        for d in &other.defs {
            match self.get(&d.name) {
                Some(existing) if existing == d => {}
                Some(_) => return Err(SystemError::DuplicateDefinition(d.name.clone())),
                None => self.push(d.clone())?,
            }
        }
        Ok(())
    }

    pub fn definitions(&self) -> &[Definition] {
        &self.defs
    }

    pub fn get(&self, name: &str) -> Option<&Definition> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.defs.iter().position(|d| d.name == name)
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_system(self))
    }
}
