//! Canonical source rendering. Reparsing the output yields a structurally
//! equal tree.

use std::fmt::Write;

use super::ast::*;

pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for (i, class) in program.classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_class(&mut out, class);
    }
    out
}

fn vis(v: Visibility) -> &'static str {
    match v {
        Visibility::Public => "public ",
        Visibility::Private => "private ",
    }
}

fn print_class(out: &mut String, class: &ClassDef) {
    let _ = writeln!(out, "class {} {{", class.name);
    for field in &class.fields {
        let _ = writeln!(out, "    {}{} {};", vis(field.visibility), field.ty, field.name);
    }
    for ctor in class.constructors.iter().filter(|c| !c.synthesized) {
        out.push_str("    ");
        out.push_str(vis(ctor.visibility));
        out.push_str(&class.name);
        print_params(out, &ctor.params);
        print_block(out, &ctor.body, 1);
        out.push('\n');
    }
    for method in &class.methods {
        out.push_str("    ");
        out.push_str(vis(method.visibility));
        if method.is_static {
            out.push_str("static ");
        }
        match &method.return_type {
            Some(t) => {
                let _ = write!(out, "{t} ");
            }
            None => out.push_str("void "),
        }
        out.push_str(&method.name);
        print_params(out, &method.params);
        print_block(out, &method.body, 1);
        out.push('\n');
    }
    out.push_str("}\n");
}

fn print_params(out: &mut String, params: &[Param]) {
    out.push('(');
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{} {}", p.ty, p.name);
    }
    out.push_str(") ");
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_block(out: &mut String, stmts: &[Stmt], level: usize) {
    out.push_str("{\n");
    for s in stmts {
        print_stmt(out, s, level + 1);
    }
    indent(out, level);
    out.push('}');
}

fn print_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    indent(out, level);
    print_stmt_inline(out, stmt, level);
    out.push('\n');
}

fn print_stmt_inline(out: &mut String, stmt: &Stmt, level: usize) {
    match stmt {
        Stmt::Assign {
            declared,
            name,
            value,
            ..
        } => {
            if let Some(t) = declared {
                let _ = write!(out, "{t} ");
            }
            let _ = write!(out, "{name} = {};", expr_to_string(value));
        }
        Stmt::FieldAssign {
            receiver,
            field,
            value,
            ..
        } => {
            let _ = write!(
                out,
                "{}.{field} = {};",
                postfix_operand(receiver),
                expr_to_string(value)
            );
        }
        Stmt::If {
            cond,
            then_body,
            else_body,
            ..
        } => {
            let _ = write!(out, "if ({}) ", expr_to_string(cond));
            print_block(out, then_body, level);
            match else_body.as_slice() {
                [] => {}
                [nested @ Stmt::If { .. }] => {
                    out.push_str(" else ");
                    print_stmt_inline(out, nested, level);
                }
                _ => {
                    out.push_str(" else ");
                    print_block(out, else_body, level);
                }
            }
        }
        Stmt::While { cond, body, .. } => {
            let _ = write!(out, "while ({}) ", expr_to_string(cond));
            print_block(out, body, level);
        }
        Stmt::Return { value, .. } => match value {
            Some(v) => {
                let _ = write!(out, "return {};", expr_to_string(v));
            }
            None => out.push_str("return;"),
        },
        Stmt::Expr { expr, .. } => {
            let _ = write!(out, "{};", expr_to_string(expr));
        }
    }
}

const UNARY_PREC: u8 = 7;
const POSTFIX_PREC: u8 = 8;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => op.precedence(),
        Expr::Unary { .. } => UNARY_PREC,
        Expr::Int(n, _) if *n < 0 => UNARY_PREC,
        _ => POSTFIX_PREC,
    }
}

fn wrap(e: &Expr, parens: bool) -> String {
    if parens {
        format!("({})", expr_to_string(e))
    } else {
        expr_to_string(e)
    }
}

fn postfix_operand(e: &Expr) -> String {
    wrap(e, prec(e) < POSTFIX_PREC)
}

pub fn escape_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn expr_to_string(e: &Expr) -> String {
    match e {
        Expr::Int(n, _) => n.to_string(),
        Expr::Bool(b, _) => b.to_string(),
        Expr::Str(s, _) => escape_str(s),
        Expr::Null(_) => "null".to_string(),
        Expr::This(_) => "this".to_string(),
        Expr::Var(name, _) => name.clone(),
        Expr::Field {
            receiver, field, ..
        } => format!("{}.{field}", postfix_operand(receiver)),
        Expr::Binary { op, lhs, rhs, .. } => {
            let p = op.precedence();
            format!(
                "{} {} {}",
                wrap(lhs, prec(lhs) < p),
                op.symbol(),
                wrap(rhs, prec(rhs) <= p)
            )
        }
        Expr::Unary { op, operand, .. } => {
            let needs = match (op, operand.as_ref()) {
                (UnOp::Neg, Expr::Int(..)) | (UnOp::Neg, Expr::Unary { .. }) => true,
                _ => prec(operand) < UNARY_PREC,
            };
            let sym = match op {
                UnOp::Not => "!",
                UnOp::Neg => "-",
            };
            format!("{sym}{}", wrap(operand, needs))
        }
        Expr::Call {
            receiver,
            method,
            args,
            ..
        } => {
            let args = args.iter().map(expr_to_string).collect::<Vec<_>>().join(", ");
            match receiver {
                Some(r) => format!("{}.{method}({args})", postfix_operand(r)),
                None => format!("{method}({args})"),
            }
        }
        Expr::New { class, args, .. } => {
            let args = args.iter().map(expr_to_string).collect::<Vec<_>>().join(", ");
            format!("new {class}({args})")
        }
    }
}
