//! Canonical text output. Parsing the output gives back the same system.

use crate::index::IndexSet;
use crate::pseries::{Expr, PsSystem};
use crate::scalar::Scalar;
use crate::setsys::SetSystem;

pub fn print_index(s: &IndexSet) -> String {
    s.to_string()
}

// Bracketed when the text would not read as one atom.
fn atomic_index(s: &IndexSet) -> String {
    let t = print_index(s);
    if t.contains('+') || t.contains('|') {
        format!("({})", t)
    } else {
        t
    }
}

/// Prints an expression. `Sum` and `Product` nodes are assumed to have at
/// least two children; nested ones are bracketed so the shape survives.
pub fn print_expr<T: Scalar>(e: &Expr<T>, vars: &[String]) -> String {
    match e {
        Expr::Const(c) => c.to_string(),
        Expr::X => "x".into(),
        Expr::Var(j) => vars[*j].clone(),
        Expr::Sum(v) => {
            if v.is_empty() {
                return "0".into();
            }
            let parts: Vec<String> = v
                .iter()
                .map(|c| match c {
                    Expr::Sum(_) => format!("({})", print_expr(c, vars)),
                    _ => print_expr(c, vars),
                })
                .collect();
            parts.join(" + ")
        }
        Expr::Product(v) => {
            if v.is_empty() {
                return "1".into();
            }
            let parts: Vec<String> = v
                .iter()
                .map(|c| match c {
                    Expr::Sum(_) | Expr::Product(_) => format!("({})", print_expr(c, vars)),
                    _ => print_expr(c, vars),
                })
                .collect();
            parts.join("*")
        }
        Expr::Pow(b, n) => match **b {
            Expr::Sum(_) | Expr::Product(_) | Expr::Pow(..) => format!("({})^{}", print_expr(b, vars), n),
            _ => format!("{}^{}", print_expr(b, vars), n),
        },
        Expr::Construct { kind, index, arg } => match index {
            Some(j) => format!("{}[{}]({})", kind, print_index(j), print_expr(arg, vars)),
            None => format!("{}({})", kind, print_expr(arg, vars)),
        },
    }
}

pub fn print_series<T: Scalar>(sys: &PsSystem<T>) -> String {
    let vars = sys.variables();
    let mut out = format!("vars {};\n", vars.join(", "));
    for (v, e) in vars.iter().zip(sys.equations()) {
        out.push_str(&format!("{} = {};\n", v, print_expr(e, vars)));
    }
    out
}

/// One equation, such as `T = {1} | {1} + {2}*T;`.
pub fn print_set_equation(sys: &SetSystem, i: usize) -> String {
    let vars = sys.variables();
    let terms: Vec<String> = sys
        .equation(i)
        .iter()
        .map(|t| {
            let mut parts = Vec::new();
            let has_vars = t.exponents.iter().any(|e| !e.is_absent());
            if !has_vars || t.base != crate::EpSet::zero() {
                let b = t.base.to_string();
                parts.push(if b.contains('|') { format!("({})", b) } else { b });
            }
            for (j, e) in t.exponents.iter().enumerate() {
                if e.is_absent() {
                    continue;
                }
                if *e == IndexSet::single(1) {
                    parts.push(vars[j].clone());
                } else {
                    parts.push(format!("{}*{}", atomic_index(e), vars[j]));
                }
            }
            parts.join(" + ")
        })
        .collect();
    let rhs = if terms.is_empty() { "{}".to_string() } else { terms.join(" | ") };
    format!("{} = {};", vars[i], rhs)
}

pub fn print_sets(sys: &SetSystem) -> String {
    let mut out = format!("mode sets;\nvars {};\n", sys.variables().join(", "));
    for i in 0..sys.len() {
        out.push_str(&print_set_equation(sys, i));
        out.push('\n');
    }
    out
}
