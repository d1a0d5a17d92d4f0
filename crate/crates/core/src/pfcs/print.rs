use super::{Constraint, Definition, Expr, System};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const ATOM: u8 = 3;

fn write_expr(e: &Expr, min_prec: u8, out: &mut String) {
    let prec = match e {
        Expr::Add(..) => SUM,
        Expr::Mul(..) => PRODUCT,
        _ => ATOM,
    };
    let paren = prec < min_prec;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Var(n) => out.push_str(n),
        Expr::Const(k) => out.push_str(&k.to_string()),
        // Both operators are left-associative: a right operand of the same
        // operator needs parentheses.
        Expr::Add(l, r) => {
            write_expr(l, SUM, out);
            out.push_str(" + ");
            write_expr(r, PRODUCT, out);
        }
        Expr::Mul(l, r) => {
            write_expr(l, PRODUCT, out);
            out.push_str(" * ");
            write_expr(r, ATOM, out);
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, SUM, &mut out);
    out
}

pub fn print_constraint(c: &Constraint) -> String {
    match c {
        Constraint::Equal { lhs, rhs } => format!("{} == {}", print_expr(lhs), print_expr(rhs)),
        Constraint::Call { name, args } => {
            let args: Vec<String> = args.iter().map(print_expr).collect();
            format!("{name}({})", args.join(", "))
        }
    }
}

pub fn print_definition(d: &Definition) -> String {
    let mut out = format!("{}({}) {{\n", d.name, d.params.join(", "));
    for c in &d.body {
        out.push_str("  ");
        out.push_str(&print_constraint(c));
        out.push('\n');
    }
    out.push_str("}\n");
    out
}

/// Definitions in order, separated by blank lines.
pub fn print_system(sys: &System) -> String {
    sys.definitions()
        .iter()
        .map(print_definition)
        .collect::<Vec<_>>()
        .join("\n")
}
