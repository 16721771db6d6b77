//! Identification of energy operations directly from typed source
//! constructs.
//!
//! [`build_plan`] precomputes, for every AST node, the operations that fire
//! when that node executes once — its *own* ops, excluding sub-expressions.
//! [`identify_stmt_ops`]/[`identify_expr_ops`] sum a whole subtree into a
//! multiset. Control-transfer ops (`BlockGoto_*`) are attributed by the CFG
//! and interpreter, never here.

use std::collections::BTreeMap;

use super::{catalog, Catalog, OpId};
use crate::minilang::ast::*;
use crate::minilang::typeck::{Callee, NameTarget, TypedProgram};
use crate::minilang::types::SemType;

/// A typed construct had no catalog entry. This is a build-time failure:
/// the catalog enumeration must cover the grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncataloguedConstruct {
    pub name: String,
}

impl std::fmt::Display for UncataloguedConstruct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "construct maps to no catalog entry: {}", self.name)
    }
}

impl std::error::Error for UncataloguedConstruct {}

/// Per-node operation table for one program.
#[derive(Debug, Clone)]
pub struct OpPlan {
    per_node: Vec<Vec<OpId>>,
}

impl OpPlan {
    pub fn own_ops(&self, id: NodeId) -> &[OpId] {
        &self.per_node[id.index()]
    }
}

/// Compute every node's own operations for a typed program.
pub fn build_plan(tp: &TypedProgram) -> Result<OpPlan, UncataloguedConstruct> {
    let cat = catalog();
    let mut plan = OpPlan {
        per_node: vec![Vec::new(); tp.program.node_count as usize],
    };
    for class in &tp.program.classes {
        for method in &class.methods {
            for stmt in &method.body {
                plan_stmt(tp, cat, stmt, &mut plan)?;
            }
        }
    }
    Ok(plan)
}

fn plan_stmt(
    tp: &TypedProgram,
    cat: &Catalog,
    stmt: &Stmt,
    plan: &mut OpPlan,
) -> Result<(), UncataloguedConstruct> {
    let mut own = Vec::new();
    match &stmt.kind {
        StmtKind::Decl { init, .. } => {
            let ty = tp.decl_type(stmt.id);
            own.push(cat.typed1("Declaration", &ty.op_token())?);
            if let Some(e) = init {
                plan_expr(tp, cat, e, plan)?;
                own.push(assign_op(cat, ty, tp.expr_ty(e.id))?);
            }
        }
        StmtKind::Assign { target, value } => {
            plan_expr(tp, cat, target, plan)?;
            plan_expr(tp, cat, value, plan)?;
            own.push(assign_op(cat, tp.expr_ty(target.id), tp.expr_ty(value.id))?);
        }
        StmtKind::Incr { target, negative } => {
            plan_expr(tp, cat, target, plan)?;
            own.push(if *negative { cat.decrement } else { cat.increment });
        }
        StmtKind::Expr(e) => plan_expr(tp, cat, e, plan)?,
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            plan_expr(tp, cat, cond, plan)?;
            for s in then_branch {
                plan_stmt(tp, cat, s, plan)?;
            }
            if let Some(eb) = else_branch {
                for s in eb {
                    plan_stmt(tp, cat, s, plan)?;
                }
            }
        }
        StmtKind::While { cond, body } => {
            plan_expr(tp, cat, cond, plan)?;
            for s in body {
                plan_stmt(tp, cat, s, plan)?;
            }
        }
        StmtKind::For {
            init,
            cond,
            update,
            body,
        } => {
            if let Some(i) = init {
                plan_stmt(tp, cat, i, plan)?;
            }
            plan_expr(tp, cat, cond, plan)?;
            if let Some(u) = update {
                plan_stmt(tp, cat, u, plan)?;
            }
            for s in body {
                plan_stmt(tp, cat, s, plan)?;
            }
        }
        StmtKind::Return(value) => {
            if let Some(e) = value {
                plan_expr(tp, cat, e, plan)?;
            }
        }
        StmtKind::Block(stmts) => {
            for s in stmts {
                plan_stmt(tp, cat, s, plan)?;
            }
        }
        StmtKind::Break => {}
    }
    plan.per_node[stmt.id.index()] = own;
    Ok(())
}

fn plan_expr(
    tp: &TypedProgram,
    cat: &Catalog,
    e: &Expr,
    plan: &mut OpPlan,
) -> Result<(), UncataloguedConstruct> {
    let mut own = Vec::new();
    match &e.kind {
        ExprKind::IntLit(_)
        | ExprKind::FloatLit(_)
        | ExprKind::BoolLit(_)
        | ExprKind::CharLit(_)
        | ExprKind::NullLit => {}
        ExprKind::Name(_) => {
            if matches!(tp.name_target(e.id), NameTarget::SelfField(_)) {
                own.push(cat.field_reference);
            }
        }
        ExprKind::Field { recv, .. } => {
            plan_expr(tp, cat, recv, plan)?;
            own.push(cat.field_reference);
        }
        ExprKind::Index { arr, idx } => {
            plan_expr(tp, cat, arr, plan)?;
            plan_expr(tp, cat, idx, plan)?;
            own.push(cat.array_reference);
        }
        ExprKind::Unary { op, operand } => {
            plan_expr(tp, cat, operand, plan)?;
            match op {
                UnOp::Neg => {
                    own.push(cat.typed1("Neg", &tp.expr_ty(operand.id).op_token())?)
                }
                UnOp::Not => own.push(cat.not_op),
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            plan_expr(tp, cat, lhs, plan)?;
            plan_expr(tp, cat, rhs, plan)?;
            let lt = tp.expr_ty(lhs.id);
            let rt = tp.expr_ty(rhs.id);
            match op {
                BinOp::Add => own.push(cat.typed2("Addition", &lt.op_token(), &rt.op_token())?),
                BinOp::Sub => own.push(cat.typed2("Subtraction", &lt.op_token(), &rt.op_token())?),
                BinOp::Mul => own.push(cat.typed2("Multi", &lt.op_token(), &rt.op_token())?),
                BinOp::Div => own.push(cat.typed2("Div", &lt.op_token(), &rt.op_token())?),
                BinOp::Mod => own.push(cat.typed2("Mod", "int", "int")?),
                BinOp::Lt => own.push(cat.typed2("Less", &lt.op_token(), &rt.op_token())?),
                BinOp::Le => own.push(cat.typed2("LessEq", &lt.op_token(), &rt.op_token())?),
                BinOp::Gt => own.push(cat.typed2("Greater", &lt.op_token(), &rt.op_token())?),
                BinOp::Ge => own.push(cat.typed2("GreaterEq", &lt.op_token(), &rt.op_token())?),
                BinOp::Eq => own.push(equal_op(cat, lt, rt)?),
                BinOp::Ne => {
                    // `!=` is an equality test plus a negation
                    own.push(equal_op(cat, lt, rt)?);
                    own.push(cat.not_op);
                }
                BinOp::And => own.push(cat.and_op),
                BinOp::Or => own.push(cat.or_op),
            }
        }
        ExprKind::Call { recv, args, .. } => {
            if let CallRecv::Expr(r) = recv {
                plan_expr(tp, cat, r, plan)?;
            }
            for a in args {
                plan_expr(tp, cat, a, plan)?;
            }
            own.push(cat.method_invocation);
            match tp.call_target(e.id).expect("call resolved") {
                Callee::Method { class, method } => {
                    let sig = tp.sig(class, method);
                    for p in &sig.params {
                        own.push(cat.typed1("Parameter", &p.op_token())?);
                    }
                    if sig.ret != SemType::Void {
                        own.push(cat.typed1("Return", &sig.ret.op_token())?);
                    }
                }
                Callee::Lib(key) => own.push(cat.lib_op(key)),
                Callee::Ctor { .. } => unreachable!("constructors only reachable via new"),
            }
        }
        ExprKind::New { args, .. } => {
            for a in args {
                plan_expr(tp, cat, a, plan)?;
            }
            own.push(cat.new_object);
            if let Some(Callee::Ctor { class, method }) = tp.call_target(e.id) {
                own.push(cat.method_invocation);
                let sig = tp.sig(class, method);
                for p in &sig.params {
                    own.push(cat.typed1("Parameter", &p.op_token())?);
                }
            }
        }
        ExprKind::NewArray { len, .. } => {
            plan_expr(tp, cat, len, plan)?;
            own.push(cat.new_array);
        }
    }
    plan.per_node[e.id.index()] = own;
    Ok(())
}

fn assign_op(cat: &Catalog, target: &SemType, value: &SemType) -> Result<OpId, UncataloguedConstruct> {
    let vt = if *value == SemType::Null {
        "null".to_string()
    } else if target.is_reference() {
        // reference-typed targets erase the source the same way
        value.op_token()
    } else {
        value.op_token()
    };
    cat.typed2("Assign", &target.op_token(), &vt)
}

fn equal_op(cat: &Catalog, lt: &SemType, rt: &SemType) -> Result<OpId, UncataloguedConstruct> {
    // null normalizes to the right operand: `null == o` is Equal_Object_null
    if *lt == SemType::Null {
        cat.typed2("Equal", &rt.op_token(), "null")
    } else if *rt == SemType::Null {
        cat.typed2("Equal", &lt.op_token(), "null")
    } else {
        cat.typed2("Equal", &lt.op_token(), &rt.op_token())
    }
}

/// Multiset of operations for one execution of a whole statement subtree.
pub fn identify_stmt_ops(
    tp: &TypedProgram,
    plan: &OpPlan,
    stmt: &Stmt,
) -> BTreeMap<OpId, u64> {
    let mut acc = BTreeMap::new();
    sum_stmt(tp, plan, stmt, &mut acc);
    acc
}

/// Multiset of operations for one evaluation of an expression subtree.
pub fn identify_expr_ops(plan: &OpPlan, e: &Expr) -> BTreeMap<OpId, u64> {
    let mut acc = BTreeMap::new();
    sum_expr(plan, e, &mut acc);
    acc
}

fn bump(acc: &mut BTreeMap<OpId, u64>, ops: &[OpId]) {
    for op in ops {
        *acc.entry(*op).or_insert(0) += 1;
    }
}

pub(crate) fn sum_expr(plan: &OpPlan, e: &Expr, acc: &mut BTreeMap<OpId, u64>) {
    bump(acc, plan.own_ops(e.id));
    match &e.kind {
        ExprKind::Field { recv, .. } => sum_expr(plan, recv, acc),
        ExprKind::Index { arr, idx } => {
            sum_expr(plan, arr, acc);
            sum_expr(plan, idx, acc);
        }
        ExprKind::Unary { operand, .. } => sum_expr(plan, operand, acc),
        ExprKind::Binary { lhs, rhs, .. } => {
            sum_expr(plan, lhs, acc);
            sum_expr(plan, rhs, acc);
        }
        ExprKind::Call { recv, args, .. } => {
            if let CallRecv::Expr(r) = recv {
                sum_expr(plan, r, acc);
            }
            for a in args {
                sum_expr(plan, a, acc);
            }
        }
        ExprKind::New { args, .. } => {
            for a in args {
                sum_expr(plan, a, acc);
            }
        }
        ExprKind::NewArray { len, .. } => sum_expr(plan, len, acc),
        _ => {}
    }
}

pub(crate) fn sum_stmt(tp: &TypedProgram, plan: &OpPlan, stmt: &Stmt, acc: &mut BTreeMap<OpId, u64>) {
    bump(acc, plan.own_ops(stmt.id));
    match &stmt.kind {
        StmtKind::Decl { init, .. } => {
            if let Some(e) = init {
                sum_expr(plan, e, acc);
            }
        }
        StmtKind::Assign { target, value } => {
            sum_expr(plan, target, acc);
            sum_expr(plan, value, acc);
        }
        StmtKind::Incr { target, .. } => sum_expr(plan, target, acc),
        StmtKind::Expr(e) => sum_expr(plan, e, acc),
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            sum_expr(plan, cond, acc);
            for s in then_branch {
                sum_stmt(tp, plan, s, acc);
            }
            if let Some(eb) = else_branch {
                for s in eb {
                    sum_stmt(tp, plan, s, acc);
                }
            }
        }
        StmtKind::While { cond, body } => {
            sum_expr(plan, cond, acc);
            for s in body {
                sum_stmt(tp, plan, s, acc);
            }
        }
        StmtKind::For {
            init,
            cond,
            update,
            body,
        } => {
            if let Some(i) = init {
                sum_stmt(tp, plan, i, acc);
            }
            sum_expr(plan, cond, acc);
            if let Some(u) = update {
                sum_stmt(tp, plan, u, acc);
            }
            for s in body {
                sum_stmt(tp, plan, s, acc);
            }
        }
        StmtKind::Return(Some(e)) => sum_expr(plan, e, acc),
        StmtKind::Block(stmts) => {
            for s in stmts {
                sum_stmt(tp, plan, s, acc);
            }
        }
        _ => {}
    }
}

/// Render a multiset with op names, for assertions and reports.
pub fn named_counts(counts: &BTreeMap<OpId, u64>) -> BTreeMap<String, u64> {
    let cat = catalog();
    counts
        .iter()
        .map(|(op, n)| (cat.name(*op).to_string(), *n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::frontend;

    fn stmt_counts(src: &str, class: &str, method: &str, stmt_idx: usize) -> BTreeMap<String, u64> {
        let tp = frontend(src).unwrap();
        let plan = build_plan(&tp).unwrap();
        let m = tp.program.method(class, method).unwrap();
        named_counts(&identify_stmt_ops(&tp, &plan, &m.body[stmt_idx]))
    }

    #[test]
    fn float_product_assignment() {
        let counts = stmt_counts(
            "class A { void f(float a, float b) { float x; x = a * b; } }",
            "A",
            "f",
            1,
        );
        let expect: BTreeMap<String, u64> = [
            ("Multi_float_float".to_string(), 1),
            ("Assign_float_float".to_string(), 1),
        ]
        .into();
        assert_eq!(counts, expect);
    }

    #[test]
    fn increment_is_a_single_op() {
        let counts = stmt_counts("class A { void f(int i) { i++; } }", "A", "f", 0);
        let expect: BTreeMap<String, u64> = [("Increment".to_string(), 1)].into();
        assert_eq!(counts, expect);
    }

    #[test]
    fn array_element_assignment() {
        let counts = stmt_counts(
            "class A { void f(int[] v, int i) { v[i] = 0; } }",
            "A",
            "f",
            0,
        );
        let expect: BTreeMap<String, u64> = [
            ("Array_Reference".to_string(), 1),
            ("Assign_int_int".to_string(), 1),
        ]
        .into();
        assert_eq!(counts, expect);
    }

    #[test]
    fn call_with_object_parameter_and_return() {
        let counts = stmt_counts(
            "class A { A f(A obj) { return obj; } void g(A obj) { f(obj); } }",
            "A",
            "g",
            0,
        );
        let expect: BTreeMap<String, u64> = [
            ("Method_Invocation".to_string(), 1),
            ("Parameter_Object".to_string(), 1),
            ("Return_Object".to_string(), 1),
        ]
        .into();
        assert_eq!(counts, expect);
    }

    #[test]
    fn not_equal_on_object_counts_equal_plus_not() {
        let counts = stmt_counts(
            "class A { void f(A o) { bool b = o != null; } }",
            "A",
            "f",
            0,
        );
        assert_eq!(counts.get("Equal_Object_null"), Some(&1));
        assert_eq!(counts.get("Not"), Some(&1));
        assert_eq!(counts.get("Declaration_bool"), Some(&1));
        assert_eq!(counts.get("Assign_bool_bool"), Some(&1));
    }

    #[test]
    fn library_call_counts_invocation_plus_unit() {
        let counts = stmt_counts(
            "class A { void f(Buffer b, int i) { b.put(b.get(i + 1)); } }",
            "A",
            "f",
            0,
        );
        let expect: BTreeMap<String, u64> = [
            ("Method_Invocation".to_string(), 2),
            ("Buffer.put".to_string(), 1),
            ("Buffer.get".to_string(), 1),
            ("Addition_int_int".to_string(), 1),
        ]
        .into();
        assert_eq!(counts, expect);
    }

    #[test]
    fn mixed_literal_comparison_names_types() {
        let counts = stmt_counts(
            "class A { void f(int i) { bool b = i < 2.0f; } }",
            "A",
            "f",
            0,
        );
        assert_eq!(counts.get("Less_int_float"), Some(&1));
    }

    #[test]
    fn bare_field_read_is_a_field_reference() {
        let counts = stmt_counts(
            "class A { int n_; void f() { int x = n_ + 1; } }",
            "A",
            "f",
            0,
        );
        assert_eq!(counts.get("Field_Reference"), Some(&1));
    }

    #[test]
    fn new_with_constructor_counts_invocation() {
        let counts = stmt_counts(
            "class B { B(int x) { print(x); } } class A { void f() { B b = new B(7); } }",
            "A",
            "f",
            0,
        );
        assert_eq!(counts.get("New_Object"), Some(&1));
        assert_eq!(counts.get("Method_Invocation"), Some(&1));
        assert_eq!(counts.get("Parameter_int"), Some(&1));
        assert_eq!(counts.get("Declaration_Object"), Some(&1));
        assert_eq!(counts.get("Assign_Object_Object"), Some(&1));
        assert_eq!(counts.get("Return_Object"), None);
    }

    #[test]
    fn compound_assign_decomposes() {
        let counts = stmt_counts("class A { void f(int x) { x += 3; } }", "A", "f", 0);
        let expect: BTreeMap<String, u64> = [
            ("Addition_int_int".to_string(), 1),
            ("Assign_int_int".to_string(), 1),
        ]
        .into();
        assert_eq!(counts, expect);
    }
}
