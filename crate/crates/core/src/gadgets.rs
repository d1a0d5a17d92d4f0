//! Constructors for the gadget families, as PFCS definitions.
//!
//! Families indexed by `n` name their relations with an `_<n>` suffix. Each
//! bundle holds every definition its top relation needs.

use num_bigint::BigInt;
use thiserror::Error;

use crate::pfcs::{Constraint, Definition, Expr, System};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetBundle {
    pub defs: System,
    pub top: String,
    /// Key into the verification spec registry.
    pub spec_id: String,
}

impl GadgetBundle {
    fn new(defs: Vec<Definition>, spec_id: impl Into<String>) -> Self {
        let top = defs.last().expect("a bundle has a top relation").name.clone();
        GadgetBundle {
            defs: System::new(defs).expect("gadget definitions are well formed"),
            top,
            spec_id: spec_id.into(),
        }
    }

    pub fn top_def(&self) -> &Definition {
        self.defs.get(&self.top).expect("top is defined")
    }

    pub fn params(&self) -> &[String] {
        &self.top_def().params
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("unknown gadget `{0}`")]
    Unknown(String),
    #[error("gadget `{name}` needs n >= {min}, got {n}")]
    BadSize { name: String, n: usize, min: usize },
    #[error("gadget `{0}` needs --n")]
    MissingSize(String),
}

fn v(name: &str) -> Expr {
    Expr::var(name)
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}_{i}")).collect()
}

/// `2^0 * b_0 + 2^1 * b_1 + ...` over the given names.
fn weighted_sum<'a>(terms: impl IntoIterator<Item = &'a String>) -> Expr {
    Expr::sum(
        terms
            .into_iter()
            .enumerate()
            .map(|(i, n)| Expr::scaled(BigInt::from(1) << i, v(n))),
    )
}

fn def(name: &str, params: &[&str], body: Vec<Constraint>) -> Definition {
    Definition::new(name, params.iter().map(|s| s.to_string()).collect(), body)
}

fn boolean_assert_def() -> Definition {
    // x * (1 - x) == 0
    def(
        "boolean_assert",
        &["x"],
        vec![Constraint::equal(
            Expr::mul(v("x"), Expr::sub(Expr::constant(1), v("x"))),
            Expr::constant(0),
        )],
    )
}

fn if_then_else_def() -> Definition {
    def(
        "if_then_else",
        &["w", "x", "y", "z"],
        vec![Constraint::equal(
            Expr::mul(v("w"), Expr::sub(v("x"), v("y"))),
            Expr::sub(v("z"), v("y")),
        )],
    )
}

fn equality_test_def() -> Definition {
    def(
        "equality_test",
        &["u", "v", "w"],
        vec![
            Constraint::equal(
                Expr::mul(Expr::sub(v("u"), v("v")), v("s")),
                Expr::sub(Expr::constant(1), v("w")),
            ),
            Constraint::equal(Expr::mul(Expr::sub(v("u"), v("v")), v("w")), Expr::constant(0)),
        ],
    )
}

fn boolean_calls(vars: &[String]) -> Vec<Constraint> {
    vars.iter()
        .map(|x| Constraint::call("boolean_assert", vec![v(x)]))
        .collect()
}

pub fn boolean_assert() -> GadgetBundle {
    GadgetBundle::new(vec![boolean_assert_def()], "bitp")
}

pub fn boolean_assert_list(n: usize) -> GadgetBundle {
    let xs = names("x", n);
    let list = Definition::new(format!("boolean_assert_list_{n}"), xs.clone(), boolean_calls(&xs));
    let defs = if n == 0 {
        vec![list]
    } else {
        vec![boolean_assert_def(), list]
    };
    GadgetBundle::new(defs, format!("bit_listp_{n}"))
}

pub fn if_then_else() -> GadgetBundle {
    GadgetBundle::new(vec![if_then_else_def()], "if_then_else")
}

pub fn equality_test() -> GadgetBundle {
    GadgetBundle::new(vec![equality_test_def()], "equality_test")
}

pub fn if_equal_then_else() -> GadgetBundle {
    let top = def(
        "if_equal_then_else",
        &["u", "v", "x", "y", "z"],
        vec![
            Constraint::call("if_then_else", vec![v("w"), v("x"), v("y"), v("z")]),
            Constraint::call("equality_test", vec![v("u"), v("v"), v("w")]),
        ],
    );
    GadgetBundle::new(vec![if_then_else_def(), equality_test_def(), top], "if_equal_then_else")
}

/// Little-endian `n`-bit addition with an `n+1`-bit result. Only the result
/// bits are constrained to be bits.
pub fn unsigned_add(n: usize) -> Result<GadgetBundle, GadgetError> {
    if n == 0 {
        return Err(GadgetError::BadSize {
            name: "unsigned_add".into(),
            n,
            min: 1,
        });
    }
    let (xs, ys, zs) = (names("x", n), names("y", n), names("z", n + 1));
    let mut body = boolean_calls(&zs);
    body.push(Constraint::equal(
        weighted_sum(&zs),
        Expr::add(weighted_sum(&xs), weighted_sum(&ys)),
    ));
    let params = xs.into_iter().chain(ys).chain(zs).collect();
    let top = Definition::new(format!("unsigned_add_{n}"), params, body);
    Ok(GadgetBundle::new(
        vec![boolean_assert_def(), top],
        format!("unsigned_add_{n}"),
    ))
}

/// `(x)(y) = (1 - z)`.
pub fn nand() -> GadgetBundle {
    GadgetBundle::new(
        vec![def(
            "nand",
            &["x", "y", "z"],
            vec![Constraint::equal(
                Expr::mul(v("x"), v("y")),
                Expr::sub(Expr::constant(1), v("z")),
            )],
        )],
        "nand",
    )
}

/// Bit decomposition without a range check: when `2^n > p` some field
/// values have two decompositions.
pub fn bits_to_field_unchecked(n: usize) -> Result<GadgetBundle, GadgetError> {
    if n == 0 {
        return Err(GadgetError::BadSize {
            name: "bits_to_field_unchecked".into(),
            n,
            min: 1,
        });
    }
    let bs = names("b", n);
    let mut body = boolean_calls(&bs);
    body.push(Constraint::equal(weighted_sum(&bs), v("f")));
    let params = std::iter::once("f".to_string()).chain(bs).collect();
    let top = Definition::new(format!("bits_to_field_unchecked_{n}"), params, body);
    Ok(GadgetBundle::new(
        vec![boolean_assert_def(), top],
        format!("bits_to_field_{n}"),
    ))
}

pub const GADGET_NAMES: &[&str] = &[
    "boolean_assert",
    "boolean_assert_list",
    "if_then_else",
    "equality_test",
    "if_equal_then_else",
    "unsigned_add",
    "nand",
    "bits_to_field_unchecked",
];

/// Looks a gadget up by family name; sized families need `n`.
pub fn by_name(name: &str, n: Option<usize>) -> Result<GadgetBundle, GadgetError> {
    let size = || n.ok_or_else(|| GadgetError::MissingSize(name.to_string()));
    match name {
        "boolean_assert" => Ok(boolean_assert()),
        "boolean_assert_list" => Ok(boolean_assert_list(size()?)),
        "if_then_else" => Ok(if_then_else()),
        "equality_test" => Ok(equality_test()),
        "if_equal_then_else" => Ok(if_equal_then_else()),
        "unsigned_add" => unsigned_add(size()?),
        "nand" => Ok(nand()),
        "bits_to_field_unchecked" => bits_to_field_unchecked(size()?),
        _ => Err(GadgetError::Unknown(name.to_string())),
    }
}

/// One representative of every family, sized families at small `n`.
pub fn standard_bundles() -> Vec<GadgetBundle> {
    vec![
        boolean_assert(),
        boolean_assert_list(0),
        boolean_assert_list(3),
        if_then_else(),
        equality_test(),
        if_equal_then_else(),
        unsigned_add(1).expect("n >= 1"),
        unsigned_add(2).expect("n >= 1"),
        nand(),
        bits_to_field_unchecked(2).expect("n >= 1"),
        bits_to_field_unchecked(3).expect("n >= 1"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Prime;
    use crate::pfcs::{parse_system, print_system};
    use crate::sem::{Solver, DEFAULT_BUDGET};
    use crate::FieldElement;

    fn p(n: u64) -> Prime {
        Prime::from_u64(n).unwrap()
    }

    fn sat(b: &GadgetBundle, q: u64, args: &[u64]) -> bool {
        let q = p(q);
        let args: Vec<FieldElement> = args.iter().map(|&a| q.elem(a)).collect();
        Solver::new(&b.defs, q, DEFAULT_BUDGET)
            .is_satisfiable(&b.top, &args)
            .unwrap()
    }

    /// Every `z` in `0..q` for which the gadget holds with the other
    /// arguments fixed; `None` marks the `z` slot.
    fn solutions(b: &GadgetBundle, q: u64, args: &[Option<u64>]) -> Vec<u64> {
        (0..q)
            .filter(|&z| {
                let full: Vec<u64> = args.iter().map(|a| a.unwrap_or(z)).collect();
                sat(b, q, &full)
            })
            .collect()
    }

    #[test]
    fn boolean_assert_examples() {
        let b = boolean_assert();
        assert_eq!(b.params(), ["x"]);
        assert!(b.top_def().internal_vars().is_empty());
        assert!(sat(&b, 7, &[0]));
        assert!(sat(&b, 7, &[1]));
        assert!(!sat(&b, 7, &[2]));
        assert_eq!(
            print_system(&b.defs),
            "boolean_assert(x) {\n  x * (1 + -1 * x) == 0\n}\n"
        );
    }

    #[test]
    fn boolean_assert_list_examples() {
        let b = boolean_assert_list(0);
        assert!(b.top_def().body.is_empty());
        assert!(sat(&b, 7, &[]));
        let b = boolean_assert_list(3);
        assert_eq!(b.top, "boolean_assert_list_3");
        assert!(sat(&b, 7, &[0, 1, 1]));
        assert!(!sat(&b, 7, &[0, 2, 1]));
    }

    #[test]
    fn conditional_examples() {
        let b = if_then_else();
        assert_eq!(solutions(&b, 7, &[Some(1), Some(5), Some(2), None]), vec![5]);
        assert_eq!(solutions(&b, 7, &[Some(0), Some(5), Some(2), None]), vec![2]);
    }

    #[test]
    fn equality_test_examples() {
        let b = equality_test();
        assert_eq!(b.top_def().internal_vars(), vec!["s"]);
        assert_eq!(solutions(&b, 7, &[Some(4), Some(4), None]), vec![1]);
        assert_eq!(solutions(&b, 7, &[Some(3), Some(5), None]), vec![0]);
    }

    #[test]
    fn if_equal_then_else_examples() {
        let b = if_equal_then_else();
        assert_eq!(b.top_def().internal_vars(), vec!["w"]);
        assert_eq!(solutions(&b, 7, &[Some(2), Some(2), Some(4), Some(1), None]), vec![4]);
        assert_eq!(solutions(&b, 7, &[Some(2), Some(3), Some(4), Some(1), None]), vec![1]);
    }

    #[test]
    fn unsigned_add_examples() {
        assert!(unsigned_add(0).is_err());
        let b = unsigned_add(2).unwrap();
        assert_eq!(b.params(), ["x_0", "x_1", "y_0", "y_1", "z_0", "z_1", "z_2"]);
        // 3 + 1 = 4 at p = 13
        assert!(sat(&b, 13, &[1, 1, 1, 0, 0, 0, 1]));
        assert!(!sat(&b, 13, &[1, 1, 1, 0, 1, 0, 1]));
        assert!(sat(&b, 13, &[0, 0, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn nand_truth_table() {
        let b = nand();
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(solutions(&b, 7, &[Some(x), Some(y), None]), vec![1 - x * y]);
        }
    }

    #[test]
    fn bits_to_field_examples() {
        let b = bits_to_field_unchecked(3).unwrap();
        assert!(sat(&b, 7, &[0, 0, 0, 0]));
        assert!(sat(&b, 7, &[0, 1, 1, 1]));
        let b = bits_to_field_unchecked(2).unwrap();
        let mut found = vec![];
        for b0 in 0..7 {
            for b1 in 0..7 {
                if sat(&b, 7, &[3, b0, b1]) {
                    found.push((b0, b1));
                }
            }
        }
        assert_eq!(found, vec![(1, 1)]);
    }

    #[test]
    fn printed_bundles_parse_back() {
        for b in standard_bundles() {
            let text = print_system(&b.defs);
            assert_eq!(parse_system(&text).unwrap(), b.defs, "{}", b.top);
        }
    }

    #[test]
    fn lookup() {
        assert_eq!(by_name("nand", None).unwrap().top, "nand");
        assert_eq!(by_name("unsigned_add", Some(3)).unwrap().top, "unsigned_add_3");
        assert!(matches!(
            by_name("unsigned_add", None),
            Err(GadgetError::MissingSize(_))
        ));
        assert!(matches!(by_name("mimc", None), Err(GadgetError::Unknown(_))));
    }
}
