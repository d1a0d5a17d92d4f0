//! Prime-field constraint systems.
//!
//! * [`field`]: arithmetic in 𝔽_p for arbitrary primes.
//! * [`r1cs`]: sparse rank-1 constraint systems and their satisfaction.
//! * [`pfcs`]: the PFCS language of equalities and named relations.
//! * [`sem`]: PFCS semantics, proof trees and witness search.
//! * [`flatten`]: inlining PFCS relations into R1CS.
//! * [`simplify`]: substitution-based R1CS simplification.
//! * [`gadgets`]: gadget constructors.
//! * [`verify`]: exhaustive soundness, completeness and determinism checks.
//! * [`io`]: JSON interchange and syntactic diffing.

pub mod field;
pub mod flatten;
pub mod gadgets;
pub mod io;
pub mod pfcs;
pub mod r1cs;
pub mod sem;
pub mod simplify;
pub mod verify;

pub use field::{FieldElement, FieldError, Prime};
pub use flatten::{flatten, flatten_equiv_report, FlattenError, FlattenResult};
pub use gadgets::GadgetBundle;
pub use io::{diff_systems, export_r1cs, import_r1cs};
pub use pfcs::{parse_system, print_system, Constraint, Definition, Expr, System};
pub use r1cs::{LinearCombination, Monomial, PseudoVar, R1csConstraint, R1csSystem, Valuation};
pub use sem::{Assignment, ProofTree, SatOutcome, Solver};
pub use simplify::{simplify_system, SimplifyReport, Solution};
pub use verify::{Harness, SpecPredicate, VerdictReport};
