//! Canonical formatting: four-space indent, one statement per line, minimal parentheses.

use std::fmt::Write;

use super::ast::*;

pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    if !program.state.is_empty() {
        out.push_str("state {\n");
        for decl in &program.state {
            let _ = writeln!(out, "    {} = {};", decl.name, expr_to_string(&decl.init));
        }
        out.push_str("}\n\n");
    }
    out.push_str("tick ");
    block(&mut out, &program.tick, 0);
    out.push('\n');
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn block(out: &mut String, stmts: &[Stmt], depth: usize) {
    out.push_str("{\n");
    for s in stmts {
        stmt(out, s, depth + 1);
    }
    indent(out, depth);
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Let { name, value } => {
            let _ = write!(out, "let {name} = {};", expr_to_string(value));
        }
        StmtKind::Assign { name, value } => {
            let _ = write!(out, "{name} = {};", expr_to_string(value));
        }
        StmtKind::Drive { v, omega } => {
            let _ = write!(out, "drive({}, {});", expr_to_string(v), expr_to_string(omega));
        }
        StmtKind::While { cond, body } => {
            let _ = write!(out, "while {} ", expr_to_string(cond));
            block(out, body, depth);
        }
        StmtKind::If { branches, otherwise } => {
            for (i, (cond, body)) in branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(" else ");
                }
                let _ = write!(out, "if {} ", expr_to_string(cond));
                block(out, body, depth);
            }
            if let Some(body) = otherwise {
                out.push_str(" else ");
                block(out, body, depth);
            }
        }
    }
    out.push('\n');
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e);
    out
}

fn expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Number(n) => {
            let _ = write!(out, "{n}");
        }
        ExprKind::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::Unary(op, operand) => {
            out.push(match op {
                UnaryOp::Neg => '-',
                UnaryOp::Not => '!',
            });
            child(out, operand, operand.kind.precedence() < UNARY_PRECEDENCE);
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let p = op.precedence();
            child(out, lhs, lhs.kind.precedence() < p);
            let _ = write!(out, " {} ", op.symbol());
            child(out, rhs, rhs.kind.precedence() <= p);
        }
        ExprKind::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(out, a);
            }
            out.push(')');
        }
    }
}

fn child(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        expr(out, e);
        out.push(')');
    } else {
        expr(out, e);
    }
}
