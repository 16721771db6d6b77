//! Canonical source formatter.
//!
//! The output is deterministic and idempotent: formatting, re-parsing and
//! formatting again reproduces the same text, and the re-parsed AST equals
//! the original (positions aside). Advisor transforms rely on this to emit
//! source and diffs.

use super::ast::*;

const INDENT: &str = "    ";

/// Render a program as canonical MJ source.
pub fn format_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, class) in p.classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        format_class(&mut out, class);
    }
    out
}

fn format_class(out: &mut String, class: &ClassDecl) {
    out.push_str(&format!("class {} {{\n", class.name));
    for f in &class.fields {
        out.push_str(INDENT);
        if f.public {
            out.push_str("public ");
        }
        out.push_str(&format!("{} {};\n", type_text(&f.ty), f.name));
    }
    for (i, m) in class.methods.iter().enumerate() {
        if i > 0 || !class.fields.is_empty() {
            out.push('\n');
        }
        format_method(out, class, m);
    }
    out.push_str("}\n");
}

fn format_method(out: &mut String, class: &ClassDecl, m: &MethodDecl) {
    out.push_str(INDENT);
    if m.is_ctor {
        out.push_str(&class.name);
    } else {
        out.push_str(&format!("{} {}", type_text(&m.ret), m.name));
    }
    out.push('(');
    for (i, p) in m.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format!("{} {}", type_text(&p.ty), p.name));
    }
    out.push_str(") {\n");
    for s in &m.body {
        format_stmt(out, s, 2);
    }
    out.push_str(INDENT);
    out.push_str("}\n");
}

pub fn type_text(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Int => "int".to_string(),
        TypeExpr::Float => "float".to_string(),
        TypeExpr::Bool => "bool".to_string(),
        TypeExpr::Char => "char".to_string(),
        TypeExpr::Void => "void".to_string(),
        TypeExpr::Class(name) => name.clone(),
        TypeExpr::List(e) => format!("List<{}>", type_text(e)),
        TypeExpr::Buffer => "Buffer".to_string(),
        TypeExpr::Array(e) => format!("{}[]", type_text(e)),
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str(INDENT);
    }
}

fn format_stmt(out: &mut String, s: &Stmt, level: usize) {
    match &s.kind {
        StmtKind::Decl { .. } | StmtKind::Assign { .. } | StmtKind::Incr { .. } | StmtKind::Expr(_) => {
            indent(out, level);
            out.push_str(&simple_stmt_text(s));
            out.push_str(";\n");
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            indent(out, level);
            out.push_str(&format!("if ({}) {{\n", expr_text(cond)));
            for t in then_branch {
                format_stmt(out, t, level + 1);
            }
            indent(out, level);
            if let Some(eb) = else_branch {
                out.push_str("} else {\n");
                for t in eb {
                    format_stmt(out, t, level + 1);
                }
                indent(out, level);
            }
            out.push_str("}\n");
        }
        StmtKind::While { cond, body } => {
            indent(out, level);
            out.push_str(&format!("while ({}) {{\n", expr_text(cond)));
            for t in body {
                format_stmt(out, t, level + 1);
            }
            indent(out, level);
            out.push_str("}\n");
        }
        StmtKind::For {
            init,
            cond,
            update,
            body,
        } => {
            indent(out, level);
            let init_text = init.as_ref().map(|s| simple_stmt_text(s)).unwrap_or_default();
            let update_text = update
                .as_ref()
                .map(|s| simple_stmt_text(s))
                .unwrap_or_default();
            out.push_str(&format!(
                "for ({}; {}; {}) {{\n",
                init_text,
                expr_text(cond),
                update_text
            ));
            for t in body {
                format_stmt(out, t, level + 1);
            }
            indent(out, level);
            out.push_str("}\n");
        }
        StmtKind::Break => {
            indent(out, level);
            out.push_str("break;\n");
        }
        StmtKind::Return(value) => {
            indent(out, level);
            match value {
                Some(e) => out.push_str(&format!("return {};\n", expr_text(e))),
                None => out.push_str("return;\n"),
            }
        }
        StmtKind::Block(stmts) => {
            indent(out, level);
            out.push_str("{\n");
            for t in stmts {
                format_stmt(out, t, level + 1);
            }
            indent(out, level);
            out.push_str("}\n");
        }
    }
}

/// Text of a declaration/assignment/increment/call without the trailing
/// semicolon (shared by statement and for-header rendering).
fn simple_stmt_text(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Decl { ty, name, init } => match init {
            Some(e) => format!("{} {} = {}", type_text(ty), name, expr_text(e)),
            None => format!("{} {}", type_text(ty), name),
        },
        StmtKind::Assign { target, value } => {
            format!("{} = {}", expr_text(target), expr_text(value))
        }
        StmtKind::Incr { target, negative } => {
            format!("{}{}", expr_text(target), if *negative { "--" } else { "++" })
        }
        StmtKind::Expr(e) => expr_text(e),
        _ => unreachable!("not a simple statement"),
    }
}

/// Binding strength used for minimal parenthesization.
fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => match op {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        },
        ExprKind::Unary { .. } => 7,
        _ => 8,
    }
}

pub fn expr_text(e: &Expr) -> String {
    match &e.kind {
        ExprKind::IntLit(v) => format!("{v}"),
        ExprKind::FloatLit(v) => float_text(*v),
        ExprKind::BoolLit(b) => format!("{b}"),
        ExprKind::CharLit(c) => char_text(*c),
        ExprKind::NullLit => "null".to_string(),
        ExprKind::Name(n) => n.clone(),
        ExprKind::Field { recv, name } => format!("{}.{}", sub_text(recv, 8), name),
        ExprKind::Index { arr, idx } => format!("{}[{}]", sub_text(arr, 8), expr_text(idx)),
        ExprKind::Unary { op, operand } => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            // parenthesize a negated negation so `--` does not appear
            let needs_parens = prec(operand) < 7
                || matches!(
                    (op, &operand.kind),
                    (UnOp::Neg, ExprKind::Unary { op: UnOp::Neg, .. })
                        | (UnOp::Neg, ExprKind::IntLit(i32::MIN..=-1))
                );
            if needs_parens {
                format!("{sym}({})", expr_text(operand))
            } else {
                format!("{sym}{}", expr_text(operand))
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = prec(e);
            format!(
                "{} {} {}",
                sub_text(lhs, p),
                op.symbol(),
                sub_text(rhs, p + 1)
            )
        }
        ExprKind::Call { recv, name, args } => {
            let args_text: Vec<String> = args.iter().map(expr_text).collect();
            let args_text = args_text.join(", ");
            match recv {
                CallRecv::None => format!("{name}({args_text})"),
                CallRecv::Math => format!("Math.{name}({args_text})"),
                CallRecv::Expr(r) => format!("{}.{}({})", sub_text(r, 8), name, args_text),
            }
        }
        ExprKind::New { ty, args } => {
            let args_text: Vec<String> = args.iter().map(expr_text).collect();
            format!("new {}({})", type_text(ty), args_text.join(", "))
        }
        ExprKind::NewArray { elem, len } => {
            format!("new {}[{}]", type_text(elem), expr_text(len))
        }
    }
}

fn sub_text(e: &Expr, min_prec: u8) -> String {
    if prec(e) < min_prec {
        format!("({})", expr_text(e))
    } else {
        expr_text(e)
    }
}

pub(crate) fn float_text(v: f64) -> String {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        // shortest round-trip representation; plain decimal for every value
        // the grammar can spell
        format!("{v}")
    }
}

fn char_text(c: char) -> String {
    match c {
        '\n' => "'\\n'".to_string(),
        '\t' => "'\\t'".to_string(),
        '\\' => "'\\\\'".to_string(),
        '\'' => "'\\''".to_string(),
        '\0' => "'\\0'".to_string(),
        other => format!("'{other}'"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parse_program;

    fn roundtrip(src: &str) -> (Program, String) {
        let p = parse_program(src).unwrap();
        let text = format_program(&p);
        (p, text)
    }

    #[test]
    fn canonical_spacing_for_return() {
        let (_, text) = roundtrip("class A { int f(int x) { return x+1; } }");
        assert!(text.contains("return x + 1;"));
    }

    #[test]
    fn format_parse_format_is_identity() {
        let src = r#"
class B { public float v_; B(float v) { v_ = v; } }
class A {
    int count_;
    void main() {
        List<B> l = new List<B>();
        for (int i = 0; i < 5; ++i) {
            if (i % 2 == 0 && i != 3) { l.add(new B(1.5)); } else { count_ = count_ - (2 + 1) * 4; }
        }
        while (count_ < 0) { count_++; }
        float f = -(count_ + 1) * 2.0;
        print(f);
    }
}
"#;
        let (p1, text1) = roundtrip(src);
        let p2 = parse_program(&text1).unwrap();
        assert_eq!(p1, p2, "re-parsing formatted source changed the AST");
        let text2 = format_program(&p2);
        assert_eq!(text1, text2, "formatting is not idempotent");
    }

    #[test]
    fn parens_preserved_only_when_needed() {
        let (p1, text) = roundtrip("class A { int f(int a, int b) { return (a + b) * (a - (b)); } }");
        assert!(text.contains("return (a + b) * (a - b);"));
        let p2 = parse_program(&text).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn float_literals_keep_a_decimal_point() {
        let (_, text) = roundtrip("class A { void f() { float x = 2.0f; float y = 0.25; } }");
        assert!(text.contains("x = 2.0;"));
        assert!(text.contains("y = 0.25;"));
    }

    #[test]
    fn negative_int_min_roundtrips() {
        let (p1, text) = roundtrip("class A { void f() { int x = -2147483648; } }");
        assert!(text.contains("-2147483648"));
        let p2 = parse_program(&text).unwrap();
        assert_eq!(p1, p2);
    }
}
