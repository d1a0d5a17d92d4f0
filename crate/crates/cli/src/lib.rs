//! The `pfcs` command line.
//!
//! Exit codes: 0 for success, equality or a passing verification; 1 for a
//! negative result, reported on stdout; 2 for usage, parse, input or budget
//! errors, reported on stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use num_bigint::{BigInt, BigUint};
use pfcs_core::flatten::flatten;
use pfcs_core::gadgets;
use pfcs_core::io::{
    diff_json, diff_systems, flatten_json, import_r1cs, import_witness, proof_tree_value, sat_json, simplify_json,
    verdict_json,
};
use pfcs_core::sem::{check_proof, Solver, DEFAULT_BUDGET};
use pfcs_core::simplify::simplify_system;
use pfcs_core::verify::{Checks, Harness, SpecRegistry};
use pfcs_core::{parse_system, print_system, FieldElement, Prime, SatOutcome, System};

/// Scalar field of BN254, the usual prime for circuits when none is given.
pub const DEFAULT_PRIME: &str = "21888242871839275222246405745257275088548364400416034343698204186575808495617";

#[derive(Debug, Parser)]
#[command(
    name = "pfcs",
    version,
    about = "Prime-field constraint systems: PFCS and R1CS tools"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a PFCS file and print it in normal form.
    Parse { file: PathBuf },
    /// Print the PFCS definitions of a built-in gadget.
    GenGadget {
        name: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Inline a relation into a flat R1CS system.
    Flatten {
        file: PathBuf,
        #[arg(long)]
        rel: String,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_PRIME)]
        prime: String,
    },
    /// Check a relation on given arguments, optionally with witness values
    /// for its internal variables.
    Check {
        file: PathBuf,
        #[arg(long)]
        rel: String,
        #[arg(long)]
        prime: String,
        #[arg(long, allow_hyphen_values = true)]
        args: String,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Search for a witness and print the proof tree.
    Sat {
        file: PathBuf,
        #[arg(long)]
        rel: String,
        #[arg(long)]
        prime: String,
        #[arg(long, allow_hyphen_values = true)]
        args: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Check a relation against a specification by enumeration.
    Verify {
        file: PathBuf,
        #[arg(long)]
        rel: String,
        #[arg(long)]
        prime: String,
        #[arg(long)]
        spec: String,
        /// Input parameters for the determinism check.
        #[arg(long)]
        inputs: Option<String>,
        #[arg(long, default_value = "sound,complete")]
        checks: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Eliminate variables of an R1CS system by substitution.
    Simplify {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        max_rounds: usize,
    },
    /// Compare two R1CS systems syntactically after canonicalization.
    Diff { a: PathBuf, b: PathBuf },
}

/// A failure reported on stderr with exit code 2.
#[derive(Debug)]
pub struct Fatal(pub String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<System, Fatal> {
    parse_system(&read(path)?).map_err(|e| Fatal(format!("{}:{e}", path.display())))
}

fn prime(s: &str) -> Result<Prime, Fatal> {
    let n = BigUint::from_str(s.trim()).map_err(|_| Fatal(format!("`{s}` is not a decimal number")))?;
    Ok(Prime::new(n)?)
}

/// Comma-separated integers, reduced modulo `p`. An empty string is the
/// empty list.
fn field_args(csv: &str, p: &Prime) -> Result<Vec<FieldElement>, Fatal> {
    if csv.trim().is_empty() {
        return Ok(Vec::new());
    }
    csv.split(',')
        .map(|s| {
            BigInt::from_str(s.trim())
                .map(|k| p.elem(k))
                .map_err(|_| Fatal(format!("`{s}` is not an integer")))
        })
        .collect()
}

fn parse_checks(s: &str) -> Result<Checks, Fatal> {
    let mut checks = Checks {
        sound: false,
        complete: false,
        deterministic: false,
    };
    for c in s.split(',').map(str::trim) {
        match c {
            "sound" => checks.sound = true,
            "complete" => checks.complete = true,
            "det" => checks.deterministic = true,
            _ => return Err(Fatal(format!("unknown check `{c}` (expected sound, complete or det)"))),
        }
    }
    Ok(checks)
}

/// Runs one command, writing its report to `out`. Returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, Fatal> {
    match cli.command {
        Command::Parse { file } => {
            write!(out, "{}", print_system(&load_system(&file)?))?;
            Ok(0)
        }
        Command::GenGadget { name, n } => {
            let b = gadgets::by_name(&name, n)?;
            write!(out, "{}", print_system(&b.defs))?;
            Ok(0)
        }
        Command::Flatten {
            file,
            rel,
            output,
            prime: p,
        } => {
            let defs = load_system(&file)?;
            let doc = flatten_json(&flatten(&defs, &rel, &prime(&p)?)?);
            match output {
                Some(path) => fs::write(&path, doc).map_err(|e| Fatal(format!("{}: {e}", path.display())))?,
                None => write!(out, "{doc}")?,
            }
            Ok(0)
        }
        Command::Check {
            file,
            rel,
            prime: p,
            args,
            witness,
            budget,
        } => {
            let defs = load_system(&file)?;
            let p = prime(&p)?;
            let args = field_args(&args, &p)?;
            let fixed = match witness {
                Some(w) => import_witness(&read(&w)?, &p)?,
                None => Default::default(),
            };
            let outcome = Solver::new(&defs, p.clone(), budget).solve_with(&rel, &args, &fixed)?;
            match outcome {
                SatOutcome::Satisfied(tree) => {
                    let def = defs.get(&rel).expect("solved");
                    let rho = def.params.iter().cloned().zip(args).collect();
                    check_proof(&defs, &def.self_call(), &rho, &tree, &p)?;
                    let doc = serde_json::json!({ "holds": true, "proof": proof_tree_value(&tree) });
                    writeln!(out, "{doc}")?;
                    Ok(0)
                }
                SatOutcome::Unsatisfiable => {
                    writeln!(out, "{}", serde_json::json!({ "holds": false }))?;
                    Ok(1)
                }
                SatOutcome::Aborted(n) => Err(Fatal(format!("search space of {n} candidates exceeds the budget"))),
            }
        }
        Command::Sat {
            file,
            rel,
            prime: p,
            args,
            budget,
        } => {
            let defs = load_system(&file)?;
            let p = prime(&p)?;
            let args = field_args(&args, &p)?;
            let outcome = Solver::new(&defs, p, budget).solve(&rel, &args)?;
            write!(out, "{}", sat_json(&outcome))?;
            Ok(match outcome {
                SatOutcome::Satisfied(_) => 0,
                SatOutcome::Unsatisfiable => 1,
                SatOutcome::Aborted(_) => 2,
            })
        }
        Command::Verify {
            file,
            rel,
            prime: p,
            spec,
            inputs,
            checks,
            budget,
        } => {
            let defs = load_system(&file)?;
            let p = prime(&p)?;
            let checks = parse_checks(&checks)?;
            let spec_pred = SpecRegistry::new()
                .get(&spec)
                .ok_or_else(|| Fatal(format!("unknown specification `{spec}`")))?;
            let mut h = Harness::new(&defs, &rel, spec_pred, &p, budget)?;
            let inputs = match &inputs {
                Some(csv) => {
                    let names: Vec<&str> = csv.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                    Some(h.input_indices(&names)?)
                }
                None => None,
            };
            if checks.deterministic && inputs.is_none() && h.spec().default_inputs().is_none() {
                return Err(Fatal("determinism check needs --inputs".into()));
            }
            let report = h.run(checks, inputs.as_deref())?;
            let params = defs.get(&rel).expect("harness checked").params.clone();
            write!(out, "{}", verdict_json(&report, &params, &spec, &p))?;
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::Simplify { file, max_rounds } => {
            let sys = import_r1cs(&read(&file)?)?;
            write!(out, "{}", simplify_json(&simplify_system(&sys, max_rounds)))?;
            Ok(0)
        }
        Command::Diff { a, b } => {
            let x = import_r1cs(&read(&a)?).map_err(|e| Fatal(format!("{}: {e}", a.display())))?;
            let y = import_r1cs(&read(&b)?).map_err(|e| Fatal(format!("{}: {e}", b.display())))?;
            let d = diff_systems(&x, &y);
            write!(out, "{}", diff_json(&d))?;
            Ok(if d.equal { 0 } else { 1 })
        }
    }
}
