//! Type checker and name/call resolver.
//!
//! Produces a [`TypedProgram`]: the untyped AST plus dense side tables with a
//! `SemType` for every expression and a resolved target for every name, field
//! access and call site. Two runs over equal ASTs produce identical tables.

use std::collections::BTreeMap;

use super::ast::*;
use super::library::{self, LibClass, LibFuncKey};
use super::types::{numeric_join, ClassId, SemType};

#[derive(Debug, Clone, PartialEq)]
pub enum TypeError {
    Mismatch {
        pos: Pos,
        found: String,
        expected: String,
    },
    UnresolvedName {
        pos: Pos,
        name: String,
    },
    UnknownLibraryFunction {
        pos: Pos,
        name: String,
    },
    UnknownClass {
        pos: Pos,
        name: String,
    },
    UnknownMethod {
        pos: Pos,
        class: String,
        name: String,
    },
    UnknownField {
        pos: Pos,
        class: String,
        name: String,
    },
    PrivateField {
        pos: Pos,
        class: String,
        name: String,
    },
    Duplicate {
        pos: Pos,
        what: &'static str,
        name: String,
    },
    ArityMismatch {
        pos: Pos,
        callee: String,
        expected: usize,
        found: usize,
    },
    NotCallable {
        pos: Pos,
        found: String,
    },
    BadTarget {
        pos: Pos,
        message: String,
    },
    BreakOutsideLoop {
        pos: Pos,
    },
}

impl TypeError {
    pub fn pos(&self) -> Pos {
        match self {
            TypeError::Mismatch { pos, .. }
            | TypeError::UnresolvedName { pos, .. }
            | TypeError::UnknownLibraryFunction { pos, .. }
            | TypeError::UnknownClass { pos, .. }
            | TypeError::UnknownMethod { pos, .. }
            | TypeError::UnknownField { pos, .. }
            | TypeError::PrivateField { pos, .. }
            | TypeError::Duplicate { pos, .. }
            | TypeError::ArityMismatch { pos, .. }
            | TypeError::NotCallable { pos, .. }
            | TypeError::BadTarget { pos, .. }
            | TypeError::BreakOutsideLoop { pos } => *pos,
        }
    }
}

impl std::fmt::Display for TypeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TypeError::Mismatch {
                pos,
                found,
                expected,
            } => write!(f, "{pos}: type mismatch: found {found}, expected {expected}"),
            TypeError::UnresolvedName { pos, name } => {
                write!(f, "{pos}: unresolved name `{name}`")
            }
            TypeError::UnknownLibraryFunction { pos, name } => {
                write!(f, "{pos}: unknown library function `{name}`")
            }
            TypeError::UnknownClass { pos, name } => write!(f, "{pos}: unknown class `{name}`"),
            TypeError::UnknownMethod { pos, class, name } => {
                write!(f, "{pos}: class `{class}` has no method `{name}`")
            }
            TypeError::UnknownField { pos, class, name } => {
                write!(f, "{pos}: class `{class}` has no field `{name}`")
            }
            TypeError::PrivateField { pos, class, name } => {
                write!(f, "{pos}: field `{class}.{name}` is not public")
            }
            TypeError::Duplicate { pos, what, name } => {
                write!(f, "{pos}: duplicate {what} `{name}`")
            }
            TypeError::ArityMismatch {
                pos,
                callee,
                expected,
                found,
            } => write!(
                f,
                "{pos}: `{callee}` expects {expected} argument(s), found {found}"
            ),
            TypeError::NotCallable { pos, found } => {
                write!(f, "{pos}: value of type {found} has no methods")
            }
            TypeError::BadTarget { pos, message } => write!(f, "{pos}: {message}"),
            TypeError::BreakOutsideLoop { pos } => write!(f, "{pos}: break outside of a loop"),
        }
    }
}

impl std::error::Error for TypeError {}

/// Where a bare name resolved to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameTarget {
    Local,
    Param(usize),
    /// Field of the enclosing class (implicit receiver), by field index.
    SelfField(usize),
}

/// The unique callee of a call site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Callee {
    Method { class: ClassId, method: usize },
    Ctor { class: ClassId, method: usize },
    Lib(LibFuncKey),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSig {
    pub params: Vec<SemType>,
    pub ret: SemType,
}

/// A type-annotated program: the AST plus resolution tables indexed by
/// [`NodeId`].
#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub program: Program,
    expr_ty: Vec<Option<SemType>>,
    name_targets: Vec<Option<NameTarget>>,
    call_targets: Vec<Option<Callee>>,
    /// For `Field` expressions and `SelfField` names: (class, field index).
    field_targets: Vec<Option<(ClassId, usize)>>,
    /// For `Decl` statements: the resolved declared type.
    decl_types: Vec<Option<SemType>>,
    pub class_ids: BTreeMap<String, ClassId>,
    pub method_sigs: Vec<Vec<MethodSig>>,
    pub field_tys: Vec<Vec<SemType>>,
}

impl TypedProgram {
    pub fn expr_ty(&self, id: NodeId) -> &SemType {
        self.expr_ty[id.index()]
            .as_ref()
            .expect("expression was not typed")
    }

    pub fn name_target(&self, id: NodeId) -> NameTarget {
        self.name_targets[id.index()].expect("name was not resolved")
    }

    pub fn call_target(&self, id: NodeId) -> Option<Callee> {
        self.call_targets[id.index()]
    }

    pub fn field_target(&self, id: NodeId) -> Option<(ClassId, usize)> {
        self.field_targets[id.index()]
    }

    pub fn decl_type(&self, id: NodeId) -> &SemType {
        self.decl_types[id.index()]
            .as_ref()
            .expect("declaration was not typed")
    }

    pub fn class_name(&self, id: ClassId) -> &str {
        &self.program.classes[id.index()].name
    }

    pub fn method_decl(&self, class: ClassId, method: usize) -> &MethodDecl {
        &self.program.classes[class.index()].methods[method]
    }

    pub fn sig(&self, class: ClassId, method: usize) -> &MethodSig {
        &self.method_sigs[class.index()][method]
    }

    /// Number of untyped expression nodes left after checking; zero in any
    /// well-typed program (totality of annotation).
    pub fn untyped_expr_count(&self) -> usize {
        count_untyped(&self.program, &self.expr_ty)
    }
}

fn count_untyped(program: &Program, expr_ty: &[Option<SemType>]) -> usize {
    struct V<'a> {
        expr_ty: &'a [Option<SemType>],
        missing: usize,
    }
    impl V<'_> {
        fn expr(&mut self, e: &Expr) {
            if self.expr_ty[e.id.index()].is_none() {
                self.missing += 1;
            }
            match &e.kind {
                ExprKind::Field { recv, .. } => self.expr(recv),
                ExprKind::Index { arr, idx } => {
                    self.expr(arr);
                    self.expr(idx);
                }
                ExprKind::Unary { operand, .. } => self.expr(operand),
                ExprKind::Binary { lhs, rhs, .. } => {
                    self.expr(lhs);
                    self.expr(rhs);
                }
                ExprKind::Call { recv, args, .. } => {
                    if let CallRecv::Expr(r) = recv {
                        self.expr(r);
                    }
                    for a in args {
                        self.expr(a);
                    }
                }
                ExprKind::New { args, .. } => {
                    for a in args {
                        self.expr(a);
                    }
                }
                ExprKind::NewArray { len, .. } => self.expr(len),
                _ => {}
            }
        }
        fn stmt(&mut self, s: &Stmt) {
            match &s.kind {
                StmtKind::Decl { init, .. } => {
                    if let Some(e) = init {
                        self.expr(e);
                    }
                }
                StmtKind::Assign { target, value } => {
                    self.expr(target);
                    self.expr(value);
                }
                StmtKind::Incr { target, .. } => self.expr(target),
                StmtKind::Expr(e) => self.expr(e),
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    self.expr(cond);
                    for s in then_branch {
                        self.stmt(s);
                    }
                    if let Some(eb) = else_branch {
                        for s in eb {
                            self.stmt(s);
                        }
                    }
                }
                StmtKind::While { cond, body } => {
                    self.expr(cond);
                    for s in body {
                        self.stmt(s);
                    }
                }
                StmtKind::For {
                    init,
                    cond,
                    update,
                    body,
                } => {
                    if let Some(i) = init {
                        self.stmt(i);
                    }
                    self.expr(cond);
                    if let Some(u) = update {
                        self.stmt(u);
                    }
                    for s in body {
                        self.stmt(s);
                    }
                }
                StmtKind::Return(Some(e)) => self.expr(e),
                StmtKind::Block(stmts) => {
                    for s in stmts {
                        self.stmt(s);
                    }
                }
                _ => {}
            }
        }
    }
    let mut v = V {
        expr_ty,
        missing: 0,
    };
    for c in &program.classes {
        for m in &c.methods {
            for s in &m.body {
                v.stmt(s);
            }
        }
    }
    v.missing
}

/// Type-check a program, resolving every name and call site.
pub fn type_check(program: Program) -> Result<TypedProgram, TypeError> {
    let n = program.node_count as usize;
    let mut ck = Checker {
        class_ids: BTreeMap::new(),
        method_sigs: Vec::new(),
        field_tys: Vec::new(),
        expr_ty: vec![None; n],
        name_targets: vec![None; n],
        call_targets: vec![None; n],
        field_targets: vec![None; n],
        decl_types: vec![None; n],
        program: &program,
    };
    ck.collect_declarations()?;
    for (ci, class) in program.classes.iter().enumerate() {
        for (mi, method) in class.methods.iter().enumerate() {
            ck.check_method(ClassId(ci as u32), mi, method)?;
        }
    }
    let Checker {
        class_ids,
        method_sigs,
        field_tys,
        expr_ty,
        name_targets,
        call_targets,
        field_targets,
        decl_types,
        ..
    } = ck;
    Ok(TypedProgram {
        program,
        expr_ty,
        name_targets,
        call_targets,
        field_targets,
        decl_types,
        class_ids,
        method_sigs,
        field_tys,
    })
}

struct Checker<'p> {
    program: &'p Program,
    class_ids: BTreeMap<String, ClassId>,
    method_sigs: Vec<Vec<MethodSig>>,
    field_tys: Vec<Vec<SemType>>,
    expr_ty: Vec<Option<SemType>>,
    name_targets: Vec<Option<NameTarget>>,
    call_targets: Vec<Option<Callee>>,
    field_targets: Vec<Option<(ClassId, usize)>>,
    decl_types: Vec<Option<SemType>>,
}

struct MethodCtx<'m> {
    class: ClassId,
    method: &'m MethodDecl,
    method_idx: usize,
    param_tys: Vec<SemType>,
    /// Lexical scopes of locals, innermost last.
    scopes: Vec<Vec<(String, SemType)>>,
    loop_depth: u32,
}

impl MethodCtx<'_> {
    fn lookup_local(&self, name: &str) -> Option<&SemType> {
        for scope in self.scopes.iter().rev() {
            if let Some((_, t)) = scope.iter().rev().find(|(n, _)| n == name) {
                return Some(t);
            }
        }
        None
    }
}

impl<'p> Checker<'p> {
    fn collect_declarations(&mut self) -> Result<(), TypeError> {
        for (ci, class) in self.program.classes.iter().enumerate() {
            if self
                .class_ids
                .insert(class.name.clone(), ClassId(ci as u32))
                .is_some()
            {
                return Err(TypeError::Duplicate {
                    pos: class.pos,
                    what: "class",
                    name: class.name.clone(),
                });
            }
            if class.name == "List" || class.name == "Buffer" || class.name == "Math" {
                return Err(TypeError::Duplicate {
                    pos: class.pos,
                    what: "builtin class name",
                    name: class.name.clone(),
                });
            }
        }
        for class in &self.program.classes {
            let mut fields = Vec::new();
            let mut seen = Vec::new();
            for f in &class.fields {
                if seen.contains(&&f.name) {
                    return Err(TypeError::Duplicate {
                        pos: f.pos,
                        what: "field",
                        name: f.name.clone(),
                    });
                }
                seen.push(&f.name);
                fields.push(self.resolve_type(&f.ty, f.pos)?);
            }
            self.field_tys.push(fields);

            let mut sigs = Vec::new();
            let mut mseen = Vec::new();
            for m in &class.methods {
                if mseen.contains(&&m.name) {
                    return Err(TypeError::Duplicate {
                        pos: m.pos,
                        what: "method",
                        name: m.name.clone(),
                    });
                }
                mseen.push(&m.name);
                let mut params = Vec::new();
                let mut pseen = Vec::new();
                for p in &m.params {
                    if pseen.contains(&&p.name) {
                        return Err(TypeError::Duplicate {
                            pos: p.pos,
                            what: "parameter",
                            name: p.name.clone(),
                        });
                    }
                    pseen.push(&p.name);
                    params.push(self.resolve_type(&p.ty, p.pos)?);
                }
                let ret = self.resolve_type(&m.ret, m.pos)?;
                sigs.push(MethodSig { params, ret });
            }
            self.method_sigs.push(sigs);
        }
        Ok(())
    }

    fn resolve_type(&self, te: &TypeExpr, pos: Pos) -> Result<SemType, TypeError> {
        Ok(match te {
            TypeExpr::Int => SemType::Int,
            TypeExpr::Float => SemType::Float,
            TypeExpr::Bool => SemType::Bool,
            TypeExpr::Char => SemType::Char,
            TypeExpr::Void => SemType::Void,
            TypeExpr::Buffer => SemType::Buffer,
            TypeExpr::List(e) => SemType::List(Box::new(self.resolve_type(e, pos)?)),
            TypeExpr::Array(e) => SemType::Array(Box::new(self.resolve_type(e, pos)?)),
            TypeExpr::Class(name) => {
                let id = self
                    .class_ids
                    .get(name)
                    .copied()
                    .ok_or_else(|| TypeError::UnknownClass {
                        pos,
                        name: name.clone(),
                    })?;
                SemType::Object(id)
            }
        })
    }

    fn check_method(
        &mut self,
        class: ClassId,
        method: usize,
        decl: &'p MethodDecl,
    ) -> Result<(), TypeError> {
        let sig = self.method_sigs[class.index()][method].clone();
        let mut ctx = MethodCtx {
            class,
            method: decl,
            method_idx: method,
            param_tys: sig.params,
            scopes: vec![Vec::new()],
            loop_depth: 0,
        };
        for stmt in &decl.body {
            self.check_stmt(&mut ctx, stmt)?;
        }
        Ok(())
    }

    fn check_stmt(&mut self, ctx: &mut MethodCtx<'p>, stmt: &'p Stmt) -> Result<(), TypeError> {
        match &stmt.kind {
            StmtKind::Decl { ty, name, init } => {
                let sem = self.resolve_type(ty, stmt.pos)?;
                if ctx
                    .scopes
                    .last()
                    .unwrap()
                    .iter()
                    .any(|(n, _)| n == name)
                {
                    return Err(TypeError::Duplicate {
                        pos: stmt.pos,
                        what: "local variable",
                        name: name.clone(),
                    });
                }
                if let Some(e) = init {
                    let it = self.check_expr(ctx, e)?;
                    if !sem.assignable_from(&it) {
                        return Err(TypeError::Mismatch {
                            pos: e.pos,
                            found: it.describe(),
                            expected: sem.describe(),
                        });
                    }
                }
                self.decl_types[stmt.id.index()] = Some(sem.clone());
                ctx.scopes.last_mut().unwrap().push((name.clone(), sem));
                Ok(())
            }
            StmtKind::Assign { target, value } => {
                let tt = self.check_lvalue(ctx, target)?;
                let vt = self.check_expr(ctx, value)?;
                if !tt.assignable_from(&vt) {
                    return Err(TypeError::Mismatch {
                        pos: value.pos,
                        found: vt.describe(),
                        expected: tt.describe(),
                    });
                }
                Ok(())
            }
            StmtKind::Incr { target, .. } => {
                if !matches!(target.kind, ExprKind::Name(_)) {
                    return Err(TypeError::BadTarget {
                        pos: target.pos,
                        message: "increment target must be a named variable".to_string(),
                    });
                }
                let tt = self.check_lvalue(ctx, target)?;
                if tt != SemType::Int {
                    return Err(TypeError::Mismatch {
                        pos: target.pos,
                        found: tt.describe(),
                        expected: "int".to_string(),
                    });
                }
                Ok(())
            }
            StmtKind::Expr(e) => {
                self.check_expr(ctx, e)?;
                Ok(())
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.check_cond(ctx, cond)?;
                self.check_scoped(ctx, then_branch)?;
                if let Some(eb) = else_branch {
                    self.check_scoped(ctx, eb)?;
                }
                Ok(())
            }
            StmtKind::While { cond, body } => {
                self.check_cond(ctx, cond)?;
                ctx.loop_depth += 1;
                self.check_scoped(ctx, body)?;
                ctx.loop_depth -= 1;
                Ok(())
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                // loop-scoped: the init declaration is visible to cond,
                // update and body.
                ctx.scopes.push(Vec::new());
                if let Some(i) = init {
                    match &i.kind {
                        StmtKind::Decl { .. } | StmtKind::Assign { .. } | StmtKind::Incr { .. } => {
                            self.check_stmt(ctx, i)?
                        }
                        _ => {
                            return Err(TypeError::BadTarget {
                                pos: i.pos,
                                message: "for-init must be a declaration or assignment"
                                    .to_string(),
                            })
                        }
                    }
                }
                self.check_cond(ctx, cond)?;
                if let Some(u) = update {
                    match &u.kind {
                        StmtKind::Assign { .. } | StmtKind::Incr { .. } | StmtKind::Expr(_) => {
                            self.check_stmt(ctx, u)?
                        }
                        _ => {
                            return Err(TypeError::BadTarget {
                                pos: u.pos,
                                message: "for-update must be an assignment, increment or call"
                                    .to_string(),
                            })
                        }
                    }
                }
                ctx.loop_depth += 1;
                self.check_scoped(ctx, body)?;
                ctx.loop_depth -= 1;
                ctx.scopes.pop();
                Ok(())
            }
            StmtKind::Break => {
                if ctx.loop_depth == 0 {
                    return Err(TypeError::BreakOutsideLoop { pos: stmt.pos });
                }
                Ok(())
            }
            StmtKind::Return(value) => {
                let ret = self.method_sigs[ctx.class.index()][ctx.method_idx].ret.clone();
                match (value, ret) {
                    (None, SemType::Void) => Ok(()),
                    (Some(e), SemType::Void) => Err(TypeError::Mismatch {
                        pos: e.pos,
                        found: "a value".to_string(),
                        expected: "no return value (void method)".to_string(),
                    }),
                    (None, other) => Err(TypeError::Mismatch {
                        pos: stmt.pos,
                        found: "no value".to_string(),
                        expected: other.describe(),
                    }),
                    (Some(e), expected) => {
                        let vt = self.check_expr(ctx, e)?;
                        if !expected.assignable_from(&vt) {
                            return Err(TypeError::Mismatch {
                                pos: e.pos,
                                found: vt.describe(),
                                expected: expected.describe(),
                            });
                        }
                        Ok(())
                    }
                }
            }
            StmtKind::Block(stmts) => self.check_scoped(ctx, stmts),
        }
    }

    fn check_scoped(&mut self, ctx: &mut MethodCtx<'p>, stmts: &'p [Stmt]) -> Result<(), TypeError> {
        ctx.scopes.push(Vec::new());
        for s in stmts {
            self.check_stmt(ctx, s)?;
        }
        ctx.scopes.pop();
        Ok(())
    }

    fn check_cond(&mut self, ctx: &mut MethodCtx<'p>, cond: &'p Expr) -> Result<(), TypeError> {
        let t = self.check_expr(ctx, cond)?;
        if t != SemType::Bool {
            return Err(TypeError::Mismatch {
                pos: cond.pos,
                found: t.describe(),
                expected: "bool".to_string(),
            });
        }
        Ok(())
    }

    /// Types an assignment target. Targets are names, field accesses or
    /// array elements.
    fn check_lvalue(&mut self, ctx: &mut MethodCtx<'p>, e: &'p Expr) -> Result<SemType, TypeError> {
        match &e.kind {
            ExprKind::Name(_) | ExprKind::Field { .. } | ExprKind::Index { .. } => {
                self.check_expr(ctx, e)
            }
            _ => Err(TypeError::BadTarget {
                pos: e.pos,
                message: "assignment target must be a variable, field or array element"
                    .to_string(),
            }),
        }
    }

    fn check_expr(&mut self, ctx: &mut MethodCtx<'p>, e: &'p Expr) -> Result<SemType, TypeError> {
        let ty = self.infer_expr(ctx, e)?;
        self.expr_ty[e.id.index()] = Some(ty.clone());
        Ok(ty)
    }

    fn infer_expr(&mut self, ctx: &mut MethodCtx<'p>, e: &'p Expr) -> Result<SemType, TypeError> {
        match &e.kind {
            ExprKind::IntLit(_) => Ok(SemType::Int),
            ExprKind::FloatLit(_) => Ok(SemType::Float),
            ExprKind::BoolLit(_) => Ok(SemType::Bool),
            ExprKind::CharLit(_) => Ok(SemType::Char),
            ExprKind::NullLit => Ok(SemType::Null),
            ExprKind::Name(name) => {
                if let Some(t) = ctx.lookup_local(name) {
                    self.name_targets[e.id.index()] = Some(NameTarget::Local);
                    return Ok(t.clone());
                }
                if let Some(pi) = ctx.method.params.iter().position(|p| &p.name == name) {
                    self.name_targets[e.id.index()] = Some(NameTarget::Param(pi));
                    return Ok(ctx.param_tys[pi].clone());
                }
                let class = &self.program.classes[ctx.class.index()];
                if let Some(fi) = class.fields.iter().position(|f| &f.name == name) {
                    self.name_targets[e.id.index()] = Some(NameTarget::SelfField(fi));
                    self.field_targets[e.id.index()] = Some((ctx.class, fi));
                    return Ok(self.field_tys[ctx.class.index()][fi].clone());
                }
                Err(TypeError::UnresolvedName {
                    pos: e.pos,
                    name: name.clone(),
                })
            }
            ExprKind::Field { recv, name } => {
                let rt = self.check_expr(ctx, recv)?;
                let SemType::Object(cid) = rt else {
                    return Err(TypeError::Mismatch {
                        pos: e.pos,
                        found: rt.describe(),
                        expected: "an object with fields".to_string(),
                    });
                };
                let class = &self.program.classes[cid.index()];
                let Some(fi) = class.fields.iter().position(|f| &f.name == name) else {
                    return Err(TypeError::UnknownField {
                        pos: e.pos,
                        class: class.name.clone(),
                        name: name.clone(),
                    });
                };
                if cid != ctx.class && !class.fields[fi].public {
                    return Err(TypeError::PrivateField {
                        pos: e.pos,
                        class: class.name.clone(),
                        name: name.clone(),
                    });
                }
                self.field_targets[e.id.index()] = Some((cid, fi));
                Ok(self.field_tys[cid.index()][fi].clone())
            }
            ExprKind::Index { arr, idx } => {
                let at = self.check_expr(ctx, arr)?;
                let it = self.check_expr(ctx, idx)?;
                let SemType::Array(elem) = at else {
                    return Err(TypeError::Mismatch {
                        pos: arr.pos,
                        found: at.describe(),
                        expected: "an array".to_string(),
                    });
                };
                if it != SemType::Int {
                    return Err(TypeError::Mismatch {
                        pos: idx.pos,
                        found: it.describe(),
                        expected: "int".to_string(),
                    });
                }
                Ok(*elem)
            }
            ExprKind::Unary { op, operand } => {
                let t = self.check_expr(ctx, operand)?;
                match op {
                    UnOp::Neg => {
                        if !t.is_numeric() {
                            return Err(TypeError::Mismatch {
                                pos: operand.pos,
                                found: t.describe(),
                                expected: "a numeric operand".to_string(),
                            });
                        }
                        Ok(t)
                    }
                    UnOp::Not => {
                        if t != SemType::Bool {
                            return Err(TypeError::Mismatch {
                                pos: operand.pos,
                                found: t.describe(),
                                expected: "bool".to_string(),
                            });
                        }
                        Ok(SemType::Bool)
                    }
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let lt = self.check_expr(ctx, lhs)?;
                let rt = self.check_expr(ctx, rhs)?;
                self.binary_type(*op, &lt, &rt, e.pos)
            }
            ExprKind::Call { recv, name, args } => {
                if let CallRecv::Expr(r) = recv {
                    self.check_expr(ctx, r)?;
                }
                let mut arg_tys = Vec::with_capacity(args.len());
                for a in args {
                    arg_tys.push(self.check_expr(ctx, a)?);
                }
                let (callee, ret) = self.resolve_call(ctx, recv, name, &arg_tys, e.pos)?;
                self.call_targets[e.id.index()] = Some(callee);
                Ok(ret)
            }
            ExprKind::New { ty, args } => {
                let sem = self.resolve_type(ty, e.pos)?;
                let mut arg_tys = Vec::with_capacity(args.len());
                for a in args {
                    arg_tys.push(self.check_expr(ctx, a)?);
                }
                match &sem {
                    SemType::Object(cid) => {
                        let class = &self.program.classes[cid.index()];
                        if let Some(mi) = class.methods.iter().position(|m| m.is_ctor) {
                            let sig = self.method_sigs[cid.index()][mi].clone();
                            self.check_args(&class.name, &sig.params, &arg_tys, args, e.pos)?;
                            self.call_targets[e.id.index()] = Some(Callee::Ctor {
                                class: *cid,
                                method: mi,
                            });
                        } else if !args.is_empty() {
                            return Err(TypeError::ArityMismatch {
                                pos: e.pos,
                                callee: format!("new {}", class.name),
                                expected: 0,
                                found: args.len(),
                            });
                        }
                        Ok(sem)
                    }
                    SemType::List(_) => {
                        if !args.is_empty() {
                            return Err(TypeError::ArityMismatch {
                                pos: e.pos,
                                callee: "new List".to_string(),
                                expected: 0,
                                found: args.len(),
                            });
                        }
                        Ok(sem)
                    }
                    SemType::Buffer => {
                        if arg_tys.len() != 1 || arg_tys[0] != SemType::Int {
                            return Err(TypeError::Mismatch {
                                pos: e.pos,
                                found: format!("{} argument(s)", args.len()),
                                expected: "new Buffer(capacity: int)".to_string(),
                            });
                        }
                        Ok(sem)
                    }
                    other => Err(TypeError::Mismatch {
                        pos: e.pos,
                        found: other.describe(),
                        expected: "a class, List or Buffer type".to_string(),
                    }),
                }
            }
            ExprKind::NewArray { elem, len } => {
                let et = self.resolve_type(elem, e.pos)?;
                if et == SemType::Void {
                    return Err(TypeError::Mismatch {
                        pos: e.pos,
                        found: "void".to_string(),
                        expected: "a value element type".to_string(),
                    });
                }
                let lt = self.check_expr(ctx, len)?;
                if lt != SemType::Int {
                    return Err(TypeError::Mismatch {
                        pos: len.pos,
                        found: lt.describe(),
                        expected: "int".to_string(),
                    });
                }
                Ok(SemType::Array(Box::new(et)))
            }
        }
    }

    fn binary_type(
        &self,
        op: BinOp,
        lt: &SemType,
        rt: &SemType,
        pos: Pos,
    ) -> Result<SemType, TypeError> {
        use BinOp::*;
        match op {
            Add | Sub | Mul | Div => {
                if lt.is_numeric() && rt.is_numeric() {
                    Ok(numeric_join(lt, rt))
                } else {
                    Err(TypeError::Mismatch {
                        pos,
                        found: format!("{} {} {}", lt.describe(), op.symbol(), rt.describe()),
                        expected: "numeric operands".to_string(),
                    })
                }
            }
            Mod => {
                if *lt == SemType::Int && *rt == SemType::Int {
                    Ok(SemType::Int)
                } else {
                    Err(TypeError::Mismatch {
                        pos,
                        found: format!("{} % {}", lt.describe(), rt.describe()),
                        expected: "int % int".to_string(),
                    })
                }
            }
            Lt | Le | Gt | Ge => {
                if lt.is_numeric() && rt.is_numeric() {
                    Ok(SemType::Bool)
                } else {
                    Err(TypeError::Mismatch {
                        pos,
                        found: format!("{} {} {}", lt.describe(), op.symbol(), rt.describe()),
                        expected: "numeric operands".to_string(),
                    })
                }
            }
            Eq | Ne => {
                let ok = (lt.is_numeric() && rt.is_numeric())
                    || (lt == rt && matches!(lt, SemType::Bool | SemType::Char))
                    || (lt == rt && lt.is_reference())
                    || (lt.is_reference() && *rt == SemType::Null)
                    || (*lt == SemType::Null && rt.is_reference());
                if ok {
                    Ok(SemType::Bool)
                } else {
                    Err(TypeError::Mismatch {
                        pos,
                        found: format!("{} {} {}", lt.describe(), op.symbol(), rt.describe()),
                        expected: "comparable operands".to_string(),
                    })
                }
            }
            And | Or => {
                if *lt == SemType::Bool && *rt == SemType::Bool {
                    Ok(SemType::Bool)
                } else {
                    Err(TypeError::Mismatch {
                        pos,
                        found: format!("{} {} {}", lt.describe(), op.symbol(), rt.describe()),
                        expected: "bool operands".to_string(),
                    })
                }
            }
        }
    }

    fn check_args(
        &self,
        callee: &str,
        params: &[SemType],
        arg_tys: &[SemType],
        args: &[Expr],
        pos: Pos,
    ) -> Result<(), TypeError> {
        if params.len() != arg_tys.len() {
            return Err(TypeError::ArityMismatch {
                pos,
                callee: callee.to_string(),
                expected: params.len(),
                found: arg_tys.len(),
            });
        }
        for ((p, a), ae) in params.iter().zip(arg_tys).zip(args) {
            if !p.assignable_from(a) {
                return Err(TypeError::Mismatch {
                    pos: ae.pos,
                    found: a.describe(),
                    expected: p.describe(),
                });
            }
        }
        Ok(())
    }

    fn resolve_call(
        &mut self,
        ctx: &MethodCtx<'p>,
        recv: &'p CallRecv,
        name: &str,
        arg_tys: &[SemType],
        pos: Pos,
    ) -> Result<(Callee, SemType), TypeError> {
        match recv {
            CallRecv::None => {
                let class = &self.program.classes[ctx.class.index()];
                if let Some(mi) = class
                    .methods
                    .iter()
                    .position(|m| m.name == name && !m.is_ctor)
                {
                    let sig = self.method_sigs[ctx.class.index()][mi].clone();
                    self.check_args_loose(name, &sig.params, arg_tys, pos)?;
                    return Ok((
                        Callee::Method {
                            class: ctx.class,
                            method: mi,
                        },
                        sig.ret,
                    ));
                }
                // bare library functions
                match name {
                    "print" => {
                        if arg_tys.len() != 1 {
                            return Err(TypeError::ArityMismatch {
                                pos,
                                callee: "print".to_string(),
                                expected: 1,
                                found: arg_tys.len(),
                            });
                        }
                        if !matches!(
                            arg_tys[0],
                            SemType::Int | SemType::Float | SemType::Bool | SemType::Char
                        ) {
                            return Err(TypeError::Mismatch {
                                pos,
                                found: arg_tys[0].describe(),
                                expected: "a printable primitive (int, float, bool, char)"
                                    .to_string(),
                            });
                        }
                        let key = library::lookup(LibClass::Io, "print").unwrap();
                        Ok((Callee::Lib(key), SemType::Void))
                    }
                    "readInput" => {
                        self.expect_arity(name, 0, arg_tys.len(), pos)?;
                        let key = library::lookup(LibClass::Io, "readInput").unwrap();
                        Ok((Callee::Lib(key), SemType::Int))
                    }
                    "readInputFloat" => {
                        self.expect_arity(name, 0, arg_tys.len(), pos)?;
                        let key = library::lookup(LibClass::Io, "readInputFloat").unwrap();
                        Ok((Callee::Lib(key), SemType::Float))
                    }
                    _ => Err(TypeError::UnknownMethod {
                        pos,
                        class: class.name.clone(),
                        name: name.to_string(),
                    }),
                }
            }
            CallRecv::Math => {
                let key = library::lookup(LibClass::Math, name).ok_or_else(|| {
                    TypeError::UnknownLibraryFunction {
                        pos,
                        name: format!("Math.{name}"),
                    }
                })?;
                self.expect_arity(key.spec().qualified, key.spec().arity, arg_tys.len(), pos)?;
                for t in arg_tys {
                    if !t.is_numeric() {
                        return Err(TypeError::Mismatch {
                            pos,
                            found: t.describe(),
                            expected: "a numeric argument".to_string(),
                        });
                    }
                }
                let ret = match name {
                    "max" => {
                        if arg_tys.iter().any(|t| *t == SemType::Float) {
                            SemType::Float
                        } else {
                            SemType::Int
                        }
                    }
                    _ => SemType::Float,
                };
                Ok((Callee::Lib(key), ret))
            }
            CallRecv::Expr(robj) => {
                let rt = self.expr_ty[robj.id.index()]
                    .clone()
                    .expect("receiver typed before call resolution");
                match rt {
                    SemType::Object(cid) => {
                        let class = &self.program.classes[cid.index()];
                        let Some(mi) = class
                            .methods
                            .iter()
                            .position(|m| m.name == name && !m.is_ctor)
                        else {
                            return Err(TypeError::UnknownMethod {
                                pos,
                                class: class.name.clone(),
                                name: name.to_string(),
                            });
                        };
                        let sig = self.method_sigs[cid.index()][mi].clone();
                        self.check_args_loose(name, &sig.params, arg_tys, pos)?;
                        Ok((
                            Callee::Method {
                                class: cid,
                                method: mi,
                            },
                            sig.ret,
                        ))
                    }
                    SemType::List(elem) => {
                        let key = library::lookup(LibClass::List, name).ok_or_else(|| {
                            TypeError::UnknownLibraryFunction {
                                pos,
                                name: format!("List.{name}"),
                            }
                        })?;
                        self.expect_arity(
                            key.spec().qualified,
                            key.spec().arity,
                            arg_tys.len(),
                            pos,
                        )?;
                        let ret = match name {
                            "add" => {
                                if !elem.assignable_from(&arg_tys[0]) {
                                    return Err(TypeError::Mismatch {
                                        pos,
                                        found: arg_tys[0].describe(),
                                        expected: elem.describe(),
                                    });
                                }
                                SemType::Void
                            }
                            "get" | "remove" => {
                                if arg_tys[0] != SemType::Int {
                                    return Err(TypeError::Mismatch {
                                        pos,
                                        found: arg_tys[0].describe(),
                                        expected: "int".to_string(),
                                    });
                                }
                                *elem
                            }
                            "size" => SemType::Int,
                            "isEmpty" => SemType::Bool,
                            _ => unreachable!(),
                        };
                        Ok((Callee::Lib(key), ret))
                    }
                    SemType::Buffer => {
                        let key = library::lookup(LibClass::Buffer, name).ok_or_else(|| {
                            TypeError::UnknownLibraryFunction {
                                pos,
                                name: format!("Buffer.{name}"),
                            }
                        })?;
                        self.expect_arity(
                            key.spec().qualified,
                            key.spec().arity,
                            arg_tys.len(),
                            pos,
                        )?;
                        let ret = match name {
                            "put" => {
                                if !SemType::Float.assignable_from(&arg_tys[0]) {
                                    return Err(TypeError::Mismatch {
                                        pos,
                                        found: arg_tys[0].describe(),
                                        expected: "float".to_string(),
                                    });
                                }
                                SemType::Void
                            }
                            "putAll" => {
                                if arg_tys[0] != SemType::Buffer {
                                    return Err(TypeError::Mismatch {
                                        pos,
                                        found: arg_tys[0].describe(),
                                        expected: "Buffer".to_string(),
                                    });
                                }
                                SemType::Void
                            }
                            "get" => {
                                if arg_tys[0] != SemType::Int {
                                    return Err(TypeError::Mismatch {
                                        pos,
                                        found: arg_tys[0].describe(),
                                        expected: "int".to_string(),
                                    });
                                }
                                SemType::Float
                            }
                            "limit" | "position" => SemType::Int,
                            "clear" => SemType::Void,
                            _ => unreachable!(),
                        };
                        Ok((Callee::Lib(key), ret))
                    }
                    other => Err(TypeError::NotCallable {
                        pos,
                        found: other.describe(),
                    }),
                }
            }
        }
    }

    fn expect_arity(
        &self,
        callee: &str,
        expected: usize,
        found: usize,
        pos: Pos,
    ) -> Result<(), TypeError> {
        if expected != found {
            return Err(TypeError::ArityMismatch {
                pos,
                callee: callee.to_string(),
                expected,
                found,
            });
        }
        Ok(())
    }

    fn check_args_loose(
        &self,
        callee: &str,
        params: &[SemType],
        arg_tys: &[SemType],
        pos: Pos,
    ) -> Result<(), TypeError> {
        if params.len() != arg_tys.len() {
            return Err(TypeError::ArityMismatch {
                pos,
                callee: callee.to_string(),
                expected: params.len(),
                found: arg_tys.len(),
            });
        }
        for (p, a) in params.iter().zip(arg_tys) {
            if !p.assignable_from(a) {
                return Err(TypeError::Mismatch {
                    pos,
                    found: a.describe(),
                    expected: p.describe(),
                });
            }
        }
        Ok(())
    }
}
