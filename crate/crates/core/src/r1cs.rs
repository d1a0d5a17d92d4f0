//! Sparse R1CS: constraints `(a)(b) = (c)` over linear combinations of
//! pseudo-variables, and their satisfaction by valuations.
//!
//! Coefficients are kept as signed integers and reduced modulo the prime only
//! when a combination is evaluated or canonicalized, so the same syntactic
//! constraint can be interpreted at several primes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{FieldElement, Prime};

/// Finite map from variable names to field elements.
pub type Valuation = BTreeMap<String, FieldElement>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    Unbound(String),
}

/// A variable, or the distinguished constant one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PseudoVar {
    One,
    Var(String),
}

impl PseudoVar {
    pub fn var(name: impl Into<String>) -> Self {
        PseudoVar::Var(name.into())
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            PseudoVar::One => None,
            PseudoVar::Var(n) => Some(n),
        }
    }
}

impl fmt::Display for PseudoVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PseudoVar::One => write!(f, "1"),
            PseudoVar::Var(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub coeff: BigInt,
    pub pvar: PseudoVar,
}

impl Monomial {
    pub fn new(coeff: impl Into<BigInt>, pvar: PseudoVar) -> Self {
        Monomial {
            coeff: coeff.into(),
            pvar,
        }
    }
}

/// A sum of monomials. The empty combination denotes zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LinearCombination(pub Vec<Monomial>);

impl LinearCombination {
    pub fn zero() -> Self {
        LinearCombination(Vec::new())
    }

    /// The constant combination `k * 1`.
    pub fn constant(k: impl Into<BigInt>) -> Self {
        LinearCombination(vec![Monomial::new(k, PseudoVar::One)])
    }

    /// The combination `1 * name`.
    pub fn var(name: impl Into<String>) -> Self {
        LinearCombination(vec![Monomial::new(1, PseudoVar::var(name))])
    }

    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, Option<S>)>,
        S: Into<String>,
    {
        LinearCombination(
            terms
                .into_iter()
                .map(|(c, v)| {
                    let pvar = match v {
                        Some(n) => PseudoVar::Var(n.into()),
                        None => PseudoVar::One,
                    };
                    Monomial::new(c, pvar)
                })
                .collect(),
        )
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, coeff: impl Into<BigInt>, pvar: PseudoVar) {
        self.0.push(Monomial::new(coeff, pvar));
    }

    /// Concatenation; denotes the sum.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = self.0.clone();
        out.extend(other.0.iter().cloned());
        LinearCombination(out)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        LinearCombination(
            self.0
                .iter()
                .map(|m| Monomial::new(&m.coeff * k, m.pvar.clone()))
                .collect(),
        )
    }

    /// Variable names mentioned, in order of first occurrence.
    pub fn variables(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.0
            .iter()
            .filter_map(|m| m.pvar.name())
            .filter(|n| seen.insert(*n))
            .collect()
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.0.iter().any(|m| m.pvar.name() == Some(name))
    }

    /// Merges duplicate pseudo-variables, reduces coefficients into `0..p`,
    /// drops zero monomials and sorts (`One` first, then variables by name).
    pub fn canonicalize(&self, p: &Prime) -> Self {
        let mut merged: BTreeMap<&PseudoVar, BigInt> = BTreeMap::new();
        for m in &self.0 {
            *merged.entry(&m.pvar).or_insert_with(BigInt::zero) += &m.coeff;
        }
        LinearCombination(
            merged
                .into_iter()
                .filter_map(|(pv, c)| {
                    let c = p.reduce(&c);
                    (!c.is_zero()).then(|| Monomial::new(BigInt::from(c), pv.clone()))
                })
                .collect(),
        )
    }

    /// If the combination has no variables after canonicalization, its value.
    pub fn constant_value(&self, p: &Prime) -> Option<FieldElement> {
        let mut acc = BigInt::zero();
        for m in &self.0 {
            match m.pvar {
                PseudoVar::One => acc += &m.coeff,
                PseudoVar::Var(_) => {
                    if !p.reduce(&m.coeff).is_zero() {
                        return None;
                    }
                }
            }
        }
        Some(p.elem(acc))
    }

    /// Replaces every occurrence of `name` with `replacement`.
    pub fn substitute(&self, name: &str, replacement: &LinearCombination) -> Self {
        let mut out = Vec::with_capacity(self.0.len());
        for m in &self.0 {
            if m.pvar.name() == Some(name) {
                out.extend(replacement.scale(&m.coeff).0);
            } else {
                out.push(m.clone());
            }
        }
        LinearCombination(out)
    }

    /// Renders with coefficients reduced into `0..p`, or as signed integers
    /// in `(-p/2, p/2]` when `signed` is set.
    pub fn render(&self, p: &Prime, signed: bool) -> String {
        if self.0.is_empty() {
            return "0".to_string();
        }
        let half = p.value() / 2u32;
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|m| {
                let c = p.reduce(&m.coeff);
                let c = if signed && c > half {
                    BigInt::from(c) - BigInt::from(p.value().clone())
                } else {
                    BigInt::from(c)
                };
                match &m.pvar {
                    PseudoVar::One => c.to_string(),
                    PseudoVar::Var(n) if c.is_one() => n.clone(),
                    PseudoVar::Var(n) => format!("{c}*{n}"),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// Evaluates a linear combination: the sum of `coeff * value(pvar)` mod `p`.
pub fn eval_lincomb(lc: &LinearCombination, v: &Valuation, p: &Prime) -> Result<FieldElement, EvalError> {
    let mut acc = BigInt::zero();
    for m in &lc.0 {
        match &m.pvar {
            PseudoVar::One => acc += &m.coeff,
            PseudoVar::Var(name) => {
                let x = v.get(name).ok_or_else(|| EvalError::Unbound(name.clone()))?;
                acc += &m.coeff * BigInt::from(x.value().clone());
            }
        }
    }
    Ok(p.elem(acc))
}

/// A rank-1 constraint `(a)(b) = (c)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct R1csConstraint {
    pub a: LinearCombination,
    pub b: LinearCombination,
    pub c: LinearCombination,
}

impl R1csConstraint {
    pub fn new(a: LinearCombination, b: LinearCombination, c: LinearCombination) -> Self {
        R1csConstraint { a, b, c }
    }

    pub fn sides(&self) -> [(&'static str, &LinearCombination); 3] {
        [("a", &self.a), ("b", &self.b), ("c", &self.c)]
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        [&self.a, &self.b, &self.c]
            .into_iter()
            .flat_map(|lc| lc.0.iter().filter_map(|m| m.pvar.name()))
            .filter(|n| seen.insert(*n))
            .collect()
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.a.mentions(name) || self.b.mentions(name) || self.c.mentions(name)
    }

    pub fn canonicalize(&self, p: &Prime) -> Self {
        R1csConstraint::new(self.a.canonicalize(p), self.b.canonicalize(p), self.c.canonicalize(p))
    }

    pub fn substitute(&self, name: &str, replacement: &LinearCombination) -> Self {
        R1csConstraint::new(
            self.a.substitute(name, replacement),
            self.b.substitute(name, replacement),
            self.c.substitute(name, replacement),
        )
    }

    pub fn render(&self, p: &Prime, signed: bool) -> String {
        format!(
            "({}) * ({}) = ({})",
            self.a.render(p, signed),
            self.b.render(p, signed),
            self.c.render(p, signed)
        )
    }
}

/// `eval(a) * eval(b) == eval(c)` in 𝔽_p.
pub fn constraint_holds(k: &R1csConstraint, v: &Valuation, p: &Prime) -> Result<bool, EvalError> {
    let a = eval_lincomb(&k.a, v, p)?;
    let b = eval_lincomb(&k.b, v, p)?;
    let c = eval_lincomb(&k.c, v, p)?;
    Ok(&a * &b == c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct R1csSystem {
    pub prime: Prime,
    pub variables: Vec<String>,
    pub constraints: Vec<R1csConstraint>,
}

impl R1csSystem {
    pub fn new(prime: Prime, variables: Vec<String>, constraints: Vec<R1csConstraint>) -> Self {
        R1csSystem {
            prime,
            variables,
            constraints,
        }
    }

    /// Every variable used in a constraint is declared, and declarations are
    /// distinct.
    pub fn well_formed(&self) -> bool {
        let mut declared = BTreeSet::new();
        if !self
            .variables
            .iter()
            .all(|v| !v.is_empty() && declared.insert(v.as_str()))
        {
            return false;
        }
        self.constraints
            .iter()
            .all(|k| k.variables().iter().all(|v| declared.contains(v)))
    }

    /// Conjunction of [`constraint_holds`] over all constraints.
    pub fn holds(&self, v: &Valuation) -> Result<bool, EvalError> {
        system_holds(self, v)
    }

    /// Canonicalizes every linear combination; variable and constraint order
    /// are kept.
    pub fn canonicalize(&self) -> Self {
        R1csSystem {
            prime: self.prime.clone(),
            variables: self.variables.clone(),
            constraints: self.constraints.iter().map(|k| k.canonicalize(&self.prime)).collect(),
        }
    }

    pub fn compile(&self) -> Result<CompiledSystem, EvalError> {
        CompiledSystem::new(self)
    }
}

pub fn system_holds(sys: &R1csSystem, v: &Valuation) -> Result<bool, EvalError> {
    for var in &sys.variables {
        if !v.contains_key(var) {
            return Err(EvalError::Unbound(var.clone()));
        }
    }
    for k in &sys.constraints {
        if !constraint_holds(k, v, &sys.prime)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Reduced coefficients on variable positions; `None` is the constant one.
type CompiledLc = Vec<(BigUint, Option<usize>)>;

/// A system with variables resolved to positions in `variables` and
/// coefficients reduced, for evaluating many dense assignments quickly.
#[derive(Debug, Clone)]
pub struct CompiledSystem {
    prime: BigUint,
    constraints: Vec<[CompiledLc; 3]>,
}

impl CompiledSystem {
    fn new(sys: &R1csSystem) -> Result<Self, EvalError> {
        let index: BTreeMap<&str, usize> = sys.variables.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let compile_lc = |lc: &LinearCombination| -> Result<CompiledLc, EvalError> {
            lc.canonicalize(&sys.prime)
                .0
                .iter()
                .map(|m| {
                    let c = sys.prime.reduce(&m.coeff);
                    let slot = match &m.pvar {
                        PseudoVar::One => None,
                        PseudoVar::Var(n) => Some(*index.get(n.as_str()).ok_or_else(|| EvalError::Unbound(n.clone()))?),
                    };
                    Ok((c, slot))
                })
                .collect()
        };
        let constraints = sys
            .constraints
            .iter()
            .map(|k| Ok([compile_lc(&k.a)?, compile_lc(&k.b)?, compile_lc(&k.c)?]))
            .collect::<Result<_, EvalError>>()?;
        Ok(CompiledSystem {
            prime: sys.prime.value().clone(),
            constraints,
        })
    }

    fn eval(&self, lc: &[(BigUint, Option<usize>)], values: &[BigUint]) -> BigUint {
        let mut acc = BigUint::zero();
        for (c, slot) in lc {
            match slot {
                None => acc += c,
                Some(i) => acc += c * &values[*i],
            }
        }
        acc % &self.prime
    }

    /// `values[i]` is the value of the `i`-th declared variable.
    pub fn holds(&self, values: &[BigUint]) -> bool {
        self.constraints
            .iter()
            .all(|[a, b, c]| self.eval(a, values) * self.eval(b, values) % &self.prime == self.eval(c, values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p7() -> Prime {
        Prime::from_u64(7).unwrap()
    }

    fn val(p: &Prime, pairs: &[(&str, i64)]) -> Valuation {
        pairs.iter().map(|(n, v)| (n.to_string(), p.elem(*v))).collect()
    }

    fn lc(terms: &[(i64, Option<&str>)]) -> LinearCombination {
        LinearCombination::from_terms(terms.iter().copied())
    }

    /// (w)(x - y) = (z - y)
    fn conditional() -> R1csConstraint {
        R1csConstraint::new(
            lc(&[(1, Some("w"))]),
            lc(&[(1, Some("x")), (-1, Some("y"))]),
            lc(&[(1, Some("z")), (-1, Some("y"))]),
        )
    }

    /// (u - v)(s) = (1 - w); (u - v)(w) = (0)
    fn equality_test(p: Prime) -> R1csSystem {
        R1csSystem::new(
            p,
            ["u", "v", "w", "s"].iter().map(|s| s.to_string()).collect(),
            vec![
                R1csConstraint::new(
                    lc(&[(1, Some("u")), (-1, Some("v"))]),
                    lc(&[(1, Some("s"))]),
                    lc(&[(1, None), (-1, Some("w"))]),
                ),
                R1csConstraint::new(
                    lc(&[(1, Some("u")), (-1, Some("v"))]),
                    lc(&[(1, Some("w"))]),
                    LinearCombination::zero(),
                ),
            ],
        )
    }

    #[test]
    fn well_formed_examples() {
        let k = R1csConstraint::new(
            LinearCombination::var("x"),
            LinearCombination::constant(1),
            LinearCombination::zero(),
        );
        assert!(R1csSystem::new(p7(), vec!["x".into()], vec![k]).well_formed());
        let k = R1csConstraint::new(
            LinearCombination::var("y"),
            LinearCombination::constant(1),
            LinearCombination::zero(),
        );
        assert!(!R1csSystem::new(p7(), vec!["x".into()], vec![k]).well_formed());
        assert!(R1csSystem::new(p7(), vec![], vec![]).well_formed());
        assert!(!R1csSystem::new(p7(), vec!["x".into(), "x".into()], vec![]).well_formed());
    }

    #[test]
    fn eval_lincomb_examples() {
        let p = p7();
        let v = val(&p, &[("x", 3), ("y", 5)]);
        assert_eq!(
            eval_lincomb(&lc(&[(1, Some("x")), (-1, Some("y"))]), &v, &p).unwrap(),
            p.elem(5)
        );
        assert_eq!(eval_lincomb(&LinearCombination::zero(), &v, &p).unwrap(), p.zero());
        assert_eq!(eval_lincomb(&lc(&[(1, None)]), &v, &p).unwrap(), p.one());
        assert_eq!(
            eval_lincomb(&lc(&[(1, Some("q"))]), &v, &p),
            Err(EvalError::Unbound("q".into()))
        );
    }

    #[test]
    fn constraint_holds_examples() {
        let p = p7();
        let k = conditional();
        assert!(constraint_holds(&k, &val(&p, &[("w", 1), ("x", 5), ("y", 2), ("z", 5)]), &p).unwrap());
        assert!(constraint_holds(&k, &val(&p, &[("w", 0), ("x", 5), ("y", 2), ("z", 2)]), &p).unwrap());
        assert!(!constraint_holds(&k, &val(&p, &[("w", 0), ("x", 5), ("y", 2), ("z", 3)]), &p).unwrap());
    }

    #[test]
    fn system_holds_examples() {
        let p = p7();
        let sys = equality_test(p.clone());
        assert!(sys.well_formed());
        assert!(system_holds(&sys, &val(&p, &[("u", 3), ("v", 3), ("w", 1), ("s", 0)])).unwrap());
        assert!(system_holds(&sys, &val(&p, &[("u", 3), ("v", 5), ("w", 0), ("s", 3)])).unwrap());
        assert!(!system_holds(&sys, &val(&p, &[("u", 3), ("v", 5), ("w", 1), ("s", 0)])).unwrap());
        assert_eq!(
            system_holds(&sys, &val(&p, &[("u", 3), ("v", 5), ("w", 1)])),
            Err(EvalError::Unbound("s".into()))
        );
    }

    #[test]
    fn compiled_agrees_with_valuation_semantics() {
        let p = p7();
        let sys = equality_test(p.clone());
        let compiled = sys.compile().unwrap();
        for u in 0..7i64 {
            for v in 0..7 {
                for w in 0..7 {
                    for s in 0..7 {
                        let valuation = val(&p, &[("u", u), ("v", v), ("w", w), ("s", s)]);
                        let dense: Vec<BigUint> = [u, v, w, s].iter().map(|x| BigUint::from(*x as u64)).collect();
                        assert_eq!(compiled.holds(&dense), sys.holds(&valuation).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn canonicalize_merges_and_sorts() {
        let p = p7();
        let raw = lc(&[
            (3, Some("y")),
            (2, Some("x")),
            (4, Some("y")),
            (-1, None),
            (7, Some("z")),
        ]);
        let canon = raw.canonicalize(&p);
        assert_eq!(canon, lc(&[(6, None), (2, Some("x"))]));
    }

    #[test]
    fn render_signed_and_unsigned() {
        let p = p7();
        let l = lc(&[(1, None), (-1, Some("x"))]);
        assert_eq!(l.render(&p, false), "1 + 6*x");
        assert_eq!(l.render(&p, true), "1 + -1*x");
        assert_eq!(LinearCombination::zero().render(&p, true), "0");
    }

    #[test]
    fn system_holds_invariant_under_reordering() {
        let p = p7();
        let sys = equality_test(p.clone());
        let mut rev = sys.clone();
        rev.constraints.reverse();
        for u in 0..7i64 {
            for w in 0..7 {
                for s in 0..7 {
                    let v = val(&p, &[("u", u), ("v", 2), ("w", w), ("s", s)]);
                    assert_eq!(sys.holds(&v).unwrap(), rev.holds(&v).unwrap());
                }
            }
        }
    }

    /// All valuations of `names` over 𝔽_p.
    fn all_valuations(p: &Prime, names: &[&str]) -> Vec<Valuation> {
        let mut out = vec![Valuation::new()];
        for n in names {
            out = out
                .into_iter()
                .flat_map(|v| {
                    p.elements().map(move |x| {
                        let mut v = v.clone();
                        v.insert(n.to_string(), x);
                        v
                    })
                })
                .collect();
        }
        out
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_lc() -> impl Strategy<Value = LinearCombination> {
            let pvar = prop_oneof![
                Just(PseudoVar::One),
                Just(PseudoVar::var("x")),
                Just(PseudoVar::var("y")),
                Just(PseudoVar::var("z")),
            ];
            proptest::collection::vec((-20i64..20, pvar), 0..6)
                .prop_map(|ms| LinearCombination(ms.into_iter().map(|(c, v)| Monomial::new(c, v)).collect()))
        }

        proptest! {
            #[test]
            fn eval_is_linear(l1 in arb_lc(), l2 in arb_lc(), q in prop::sample::select(vec![2u64, 3, 5, 7])) {
                let p = Prime::from_u64(q).unwrap();
                for v in all_valuations(&p, &["x", "y", "z"]) {
                    let lhs = eval_lincomb(&l1.concat(&l2), &v, &p).unwrap();
                    let rhs = eval_lincomb(&l1, &v, &p).unwrap().add(&eval_lincomb(&l2, &v, &p).unwrap()).unwrap();
                    prop_assert_eq!(lhs, rhs);
                }
            }

            #[test]
            fn canonicalize_preserves_eval(l in arb_lc(), q in prop::sample::select(vec![2u64, 3, 5, 7])) {
                let p = Prime::from_u64(q).unwrap();
                let c = l.canonicalize(&p);
                prop_assert_eq!(c.canonicalize(&p), c.clone());
                for v in all_valuations(&p, &["x", "y", "z"]) {
                    prop_assert_eq!(eval_lincomb(&l, &v, &p).unwrap(), eval_lincomb(&c, &v, &p).unwrap());
                }
            }
        }
    }
}
