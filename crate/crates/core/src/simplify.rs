//! Variable elimination by batched substitution.
//!
//! A constraint whose `a` or `b` side is constant is linear, and can be solved
//! for one of its variables. Each round picks a set of such solutions whose
//! variables are independent of each other, deletes the constraints they came
//! from and substitutes them everywhere else.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use crate::field::{FieldElement, Prime};
use crate::r1cs::{eval_lincomb, EvalError, LinearCombination, PseudoVar, R1csConstraint, R1csSystem, Valuation};

/// `variable = rhs`, with `rhs` canonical and free of `variable`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub variable: String,
    pub rhs: LinearCombination,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplifyReport {
    /// In elimination order.
    pub eliminated: Vec<Solution>,
    pub residual: R1csSystem,
    /// Rounds that eliminated at least one variable.
    pub rounds: usize,
}

/// Solves an effectively linear constraint for its least variable by name.
pub fn solve_constraint(k: &R1csConstraint, p: &Prime) -> Option<Solution> {
    let k = k.canonicalize(p);
    // a·b = c with a constant α becomes α·b − c = 0.
    let (alpha, other) = match k.a.constant_value(p) {
        Some(alpha) => (alpha, &k.b),
        None => (k.b.constant_value(p)?, &k.a),
    };
    let l = other
        .scale(&BigInt::from(alpha.value().clone()))
        .concat(&k.c.scale(&BigInt::from(-1)))
        .canonicalize(p);
    let (variable, coeff) = l
        .monomials()
        .iter()
        .filter_map(|m| m.pvar.name().map(|n| (n, &m.coeff)))
        .min_by(|x, y| x.0.cmp(y.0))?;
    // x = −(L − c·x) / c
    let inv = p.elem(coeff.clone()).inv().expect("canonical coefficients are nonzero");
    let factor = BigInt::from(inv.neg().value().clone());
    let rest = LinearCombination(
        l.monomials()
            .iter()
            .filter(|m| m.pvar.name() != Some(variable))
            .cloned()
            .collect(),
    );
    Some(Solution {
        variable: variable.to_string(),
        rhs: rest.scale(&factor).canonicalize(p),
    })
}

fn trivially_true(k: &R1csConstraint, p: &Prime) -> bool {
    match (k.a.constant_value(p), k.b.constant_value(p), k.c.constant_value(p)) {
        (Some(a), Some(b), Some(c)) => &a * &b == c,
        _ => false,
    }
}

/// One elimination round.
///
/// Every constraint proposes at most one solution, and only the first
/// proposal for each variable (in constraint order) is considered. Proposals
/// are then taken greedily in variable-name order, skipping any whose
/// variable occurs in an already taken right-hand side or whose right-hand
/// side mentions an already taken variable.
pub fn substitution_round(sys: &R1csSystem) -> (R1csSystem, Vec<Solution>) {
    let p = &sys.prime;
    let mut proposals: BTreeMap<String, (usize, LinearCombination)> = BTreeMap::new();
    for (i, k) in sys.constraints.iter().enumerate() {
        if let Some(s) = solve_constraint(k, p) {
            proposals.entry(s.variable).or_insert((i, s.rhs));
        }
    }
    let mut chosen: Vec<Solution> = Vec::new();
    let mut sources = BTreeSet::new();
    for (var, (i, rhs)) in proposals {
        let clashes = chosen.iter().any(|s| s.rhs.mentions(&var) || rhs.mentions(&s.variable));
        if !clashes {
            sources.insert(i);
            chosen.push(Solution { variable: var, rhs });
        }
    }
    let constraints = sys
        .constraints
        .iter()
        .enumerate()
        .filter(|(i, _)| !sources.contains(i))
        .map(|(_, k)| {
            chosen
                .iter()
                .fold(k.clone(), |k, s| k.substitute(&s.variable, &s.rhs))
                .canonicalize(p)
        })
        .filter(|k| !trivially_true(k, p))
        .collect();
    let gone: BTreeSet<&str> = chosen.iter().map(|s| s.variable.as_str()).collect();
    let variables = sys
        .variables
        .iter()
        .filter(|v| !gone.contains(v.as_str()))
        .cloned()
        .collect();
    (R1csSystem::new(p.clone(), variables, constraints), chosen)
}

/// Runs rounds until one eliminates nothing or `max_rounds` productive
/// rounds have run. The residual is canonical.
pub fn simplify_system(sys: &R1csSystem, max_rounds: usize) -> SimplifyReport {
    let mut residual = sys.canonicalize();
    let mut eliminated = Vec::new();
    let mut rounds = 0;
    while rounds < max_rounds {
        let (next, solved) = substitution_round(&residual);
        if solved.is_empty() {
            break;
        }
        residual = next;
        eliminated.extend(solved);
        rounds += 1;
    }
    SimplifyReport {
        eliminated,
        residual,
        rounds,
    }
}

impl SimplifyReport {
    /// Extends a valuation of the residual variables with the eliminated ones.
    pub fn recover(&self, residual_values: &Valuation) -> Result<Valuation, EvalError> {
        let p = &self.residual.prime;
        let mut full = residual_values.clone();
        for s in self.eliminated.iter().rev() {
            let value: FieldElement = eval_lincomb(&s.rhs, &full, p)?;
            full.insert(s.variable.clone(), value);
        }
        Ok(full)
    }

    /// Eliminated variables in elimination order.
    pub fn eliminated_vars(&self) -> Vec<&str> {
        self.eliminated.iter().map(|s| s.variable.as_str()).collect()
    }
}

impl Solution {
    pub fn render(&self, p: &Prime) -> String {
        format!("{} := {}", self.variable, self.rhs.render(p, true))
    }

    pub fn is_constant(&self) -> bool {
        self.rhs.monomials().iter().all(|m| m.pvar == PseudoVar::One)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::r1cs::LinearCombination as Lc;
    use proptest::prelude::*;

    fn p7() -> Prime {
        Prime::from_u64(7).unwrap()
    }

    fn lc(ts: &[(i64, Option<&str>)]) -> Lc {
        Lc::from_terms(ts.iter().copied())
    }

    fn k(a: &[(i64, Option<&str>)], b: &[(i64, Option<&str>)], c: &[(i64, Option<&str>)]) -> R1csConstraint {
        R1csConstraint::new(lc(a), lc(b), lc(c))
    }

    fn sys(vars: &[&str], ks: Vec<R1csConstraint>) -> R1csSystem {
        R1csSystem::new(p7(), vars.iter().map(|s| s.to_string()).collect(), ks)
    }

    #[test]
    fn solve_examples() {
        let s = solve_constraint(&k(&[(1, Some("x"))], &[(1, None)], &[(1, Some("y")), (1, None)]), &p7()).unwrap();
        assert_eq!(s.variable, "x");
        assert_eq!(s.rhs, lc(&[(1, None), (1, Some("y"))]));
        assert!(solve_constraint(&k(&[(1, Some("x"))], &[(1, Some("y"))], &[(1, Some("z"))]), &p7()).is_none());
        let s = solve_constraint(&k(&[(2, Some("x"))], &[(1, None)], &[(1, None)]), &p7()).unwrap();
        assert_eq!(s.variable, "x");
        assert_eq!(s.rhs, lc(&[(4, None)]));
        assert!(s.is_constant());
    }

    #[test]
    fn solve_constant_on_left() {
        // (3)(y + x) = (z): solved for x, the least name.
        let s = solve_constraint(
            &k(&[(3, None)], &[(1, Some("y")), (1, Some("x"))], &[(1, Some("z"))]),
            &p7(),
        )
        .unwrap();
        assert_eq!(s.variable, "x");
        // x = z/3 − y = 5z + 6y
        assert_eq!(s.rhs, lc(&[(6, Some("y")), (5, Some("z"))]));
        // Constant-only constraints have nothing to solve.
        assert!(solve_constraint(&k(&[(1, None)], &[(1, None)], &[(1, None)]), &p7()).is_none());
    }

    #[test]
    fn independent_solutions_in_one_round() {
        let s = sys(
            &["x", "y", "z"],
            vec![
                k(&[(1, Some("x"))], &[(1, None)], &[(1, None)]),
                k(&[(1, Some("y"))], &[(1, None)], &[(2, None)]),
                k(&[(1, Some("x"))], &[(1, Some("y"))], &[(1, Some("z"))]),
            ],
        );
        let (res, sol) = substitution_round(&s);
        assert_eq!(sol.iter().map(|s| s.variable.as_str()).collect::<Vec<_>>(), ["x", "y"]);
        assert_eq!(res.variables, ["z"]);
        assert_eq!(res.constraints, vec![k(&[(1, None)], &[(2, None)], &[(1, Some("z"))])]);
    }

    #[test]
    fn dependent_solutions_deferred() {
        let s = sys(
            &["x", "y"],
            vec![
                k(&[(1, Some("x"))], &[(1, None)], &[(1, Some("y")), (1, None)]),
                k(&[(1, Some("y"))], &[(1, None)], &[(3, None)]),
            ],
        );
        let (res, sol) = substitution_round(&s);
        assert_eq!(sol.len(), 1);
        assert_eq!(sol[0].variable, "x");
        let (res, sol) = substitution_round(&res);
        assert_eq!(sol[0].variable, "y");
        assert!(res.constraints.is_empty());
        let report = simplify_system(&s, 10);
        assert_eq!(report.rounds, 2);
        let full = report.recover(&Valuation::new()).unwrap();
        assert_eq!(full["x"], p7().elem(4));
        assert_eq!(full["y"], p7().elem(3));
    }

    #[test]
    fn fixpoint_and_empty() {
        let s = sys(
            &["x", "y", "z"],
            vec![k(&[(1, Some("x"))], &[(1, Some("y"))], &[(1, Some("z"))])],
        );
        let (res, sol) = substitution_round(&s);
        assert!(sol.is_empty());
        assert_eq!(res, s);
        let r = simplify_system(&sys(&[], vec![]), 10);
        assert_eq!(r.rounds, 0);
        assert!(r.eliminated.is_empty());
    }

    #[test]
    fn chain_folds_to_constants() {
        let names: Vec<String> = (0..10).map(|i| format!("x{i}")).collect();
        let mut ks = vec![k(&[(1, Some("x0"))], &[(1, None)], &[(1, None)])];
        for i in 1..10 {
            ks.push(k(
                &[(1, Some(&names[i]))],
                &[(1, None)],
                &[(1, Some(&names[i - 1])), (1, None)],
            ));
        }
        let s = R1csSystem::new(p7(), names.clone(), ks);
        let r = simplify_system(&s, 100);
        assert!(r.rounds <= 10);
        assert!(r.residual.constraints.is_empty());
        assert!(r.residual.variables.is_empty());
        let full = r.recover(&Valuation::new()).unwrap();
        for (i, n) in names.iter().enumerate() {
            assert_eq!(full[n], p7().elem(i as u64 + 1), "{n}");
        }
    }

    /// Random small systems: constraints over x, y, z with coefficients in
    /// 0..7, some sides forced constant.
    fn small_system() -> impl Strategy<Value = R1csSystem> {
        let var = prop_oneof![Just(None), Just(Some("x")), Just(Some("y")), Just(Some("z"))];
        let side = prop::collection::vec((0i64..7, var), 0..3);
        let constant = (0i64..7).prop_map(|c| vec![(c, None)]);
        let a = prop_oneof![side.clone(), constant];
        let constraint = (a, side.clone(), side).prop_map(|(a, b, c)| {
            R1csConstraint::new(
                Lc::from_terms(a.iter().copied()),
                Lc::from_terms(b.iter().copied()),
                Lc::from_terms(c.iter().copied()),
            )
        });
        prop::collection::vec(constraint, 0..4).prop_map(|ks| sys(&["x", "y", "z"], ks))
    }

    fn all_valuations(vars: &[String]) -> Vec<Valuation> {
        let p = p7();
        let mut out = vec![Valuation::new()];
        for v in vars {
            out = out
                .into_iter()
                .flat_map(|val| {
                    let p = p.clone();
                    (0..7u64).map(move |x| {
                        let mut val = val.clone();
                        val.insert(v.clone(), p.elem(x));
                        val
                    })
                })
                .collect();
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn preserves_solutions(s in small_system()) {
            let r = simplify_system(&s, 10);
            let mut before: Vec<Valuation> = all_valuations(&s.variables)
                .into_iter()
                .filter(|v| s.holds(v).unwrap())
                .collect();
            let mut after: Vec<Valuation> = all_valuations(&r.residual.variables)
                .into_iter()
                .filter(|v| r.residual.holds(v).unwrap())
                .map(|v| r.recover(&v).unwrap())
                .collect();
            before.sort();
            after.sort();
            prop_assert_eq!(before, after);
            for sol in &r.eliminated {
                prop_assert!(!r.residual.variables.contains(&sol.variable));
                prop_assert!(r.residual.constraints.iter().all(|k| !k.mentions(&sol.variable)));
            }
            prop_assert!(r.rounds <= s.variables.len());
        }
    }
}
