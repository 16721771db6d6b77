//! Deterministic tree-walking interpreter with per-block operation
//! accounting and block ablation.
//!
//! Semantics notes (also in `docs/mj-grammar`):
//! - `int` is wrapping 32-bit; `float` is IEEE 754 binary64.
//! - `&&`/`||` evaluate both operands (no short circuit), so a block's
//!   static counts match what actually executes.
//! - `Math.random` draws from the case's seeded generator; `readInput`
//!   past the end of the input sequence yields 0 and sets a flag.
//! - An ablated block is skipped entirely: no operations, no side effects,
//!   no execution count; control flow around it proceeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cases::{ExecutionCase, InputEvent};
use super::counts::CountVector;
use crate::cfg::{BlockIdx, ProgramCfg};
use crate::minilang::ast::*;
use crate::minilang::format::float_text;
use crate::minilang::library::{LibClass, LibFuncKey};
use crate::minilang::typeck::{Callee, NameTarget, TypedProgram};
use crate::minilang::types::{ClassId, SemType};
use crate::ops::{catalog, Catalog, OpId, OpPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    NullDeref,
    IndexOutOfBounds,
    DivideByZero,
    BufferOverflow,
    StackOverflow,
    MissingReturn,
}

impl FaultKind {
    pub fn describe(self) -> &'static str {
        match self {
            FaultKind::NullDeref => "null dereference",
            FaultKind::IndexOutOfBounds => "index out of bounds",
            FaultKind::DivideByZero => "division by zero",
            FaultKind::BufferOverflow => "buffer overflow",
            FaultKind::StackOverflow => "call stack overflow",
            FaultKind::MissingReturn => "non-void method fell off its end",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// Runaway execution; the case should be discarded and regenerated.
    StepBudgetExceeded { budget: u64 },
    Fault { kind: FaultKind, pos: Pos },
    NoEntryPoint,
    UnknownBlock { id: String },
    NotAblatable { id: String },
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::StepBudgetExceeded { budget } => {
                write!(f, "step budget of {budget} statements exceeded")
            }
            RunError::Fault { kind, pos } => write!(f, "{pos}: runtime fault: {}", kind.describe()),
            RunError::NoEntryPoint => write!(f, "no `void main()` method found"),
            RunError::UnknownBlock { id } => write!(f, "case ablates unknown block `{id}`"),
            RunError::NotAblatable { id } => write!(f, "case ablates non-ablatable block `{id}`"),
        }
    }
}

impl std::error::Error for RunError {}

/// Everything one case execution produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub case_id: String,
    /// Executions per block (loop headers count iteration tests).
    pub block_exec: Vec<u64>,
    /// Operations actually executed, attributed per block.
    pub block_counts: Vec<Vec<u64>>,
    /// Sum over blocks, with the case duration attached.
    pub aggregate: CountVector,
    /// Captured `print` emissions, in order.
    pub outputs: Vec<String>,
    pub steps: u64,
    /// Calls per method, indexed by the CFG's flat method order.
    pub method_calls: Vec<u64>,
    /// True when `aggregate == Σ_blocks exec × static` held exactly; early
    /// exits, loop-header first tests and false `if` jumps all clear it.
    pub exact_attribution: bool,
    pub input_exhausted: bool,
}

/// Default per-case statement budget.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// Execute one case. Deterministic for a fixed `(program, case)`.
pub fn run_case(
    tp: &TypedProgram,
    plan: &OpPlan,
    cfg: &ProgramCfg,
    case: &ExecutionCase,
    step_budget: u64,
) -> Result<RunResult, RunError> {
    let mut ablated = vec![false; cfg.blocks.len()];
    for id in &case.ablated {
        let idx = cfg
            .find(id)
            .ok_or_else(|| RunError::UnknownBlock { id: id.clone() })?;
        if !cfg.block(idx).ablatable {
            return Err(RunError::NotAblatable { id: id.clone() });
        }
        ablated[idx] = true;
    }
    let (main_class, main_idx) = find_main(tp).ok_or(RunError::NoEntryPoint)?;
    let cat = catalog();
    let mut interp = Interp {
        tp,
        plan,
        cfg,
        cat,
        heap: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(case.seed),
        inputs: &case.inputs,
        input_pos: 0,
        input_exhausted: false,
        outputs: Vec::new(),
        steps: 0,
        budget: step_budget,
        depth: 0,
        block_exec: vec![0; cfg.blocks.len()],
        block_counts: vec![vec![0; cat.len()]; cfg.blocks.len()],
        cur_block: Vec::new(),
        ablated,
        method_calls: vec![0; cfg.methods.len()],
    };
    let this = interp.alloc_object(main_class);
    interp.call_method(main_class, main_idx, this, Vec::new(), Pos::default())?;

    let mut aggregate = CountVector::new();
    for per_block in &interp.block_counts {
        for (i, n) in per_block.iter().enumerate() {
            if *n > 0 {
                aggregate.add(OpId(i as u16), *n);
            }
        }
    }
    aggregate.duration_s = case.duration_s;
    let exact = (0..cfg.blocks.len()).all(|b| {
        let expect = &cfg.block(b).static_counts;
        interp.block_counts[b]
            .iter()
            .zip(expect)
            .all(|(actual, stat)| *actual == stat * interp.block_exec[b])
    });
    Ok(RunResult {
        case_id: case.case_id.clone(),
        block_exec: interp.block_exec,
        block_counts: interp.block_counts,
        aggregate,
        outputs: interp.outputs,
        steps: interp.steps,
        method_calls: interp.method_calls,
        exact_attribution: exact,
        input_exhausted: interp.input_exhausted,
    })
}

/// Aggregate counts of a finished run (the RunResult already carries the
/// exact sum; this re-derives it from the per-block table).
pub fn aggregate_counts(r: &RunResult) -> CountVector {
    let mut v = CountVector::new();
    for per_block in &r.block_counts {
        for (i, n) in per_block.iter().enumerate() {
            if *n > 0 {
                v.add(OpId(i as u16), *n);
            }
        }
    }
    v.duration_s = r.aggregate.duration_s;
    v
}

fn find_main(tp: &TypedProgram) -> Option<(ClassId, usize)> {
    for (ci, class) in tp.program.classes.iter().enumerate() {
        for (mi, m) in class.methods.iter().enumerate() {
            if m.name == "main" && !m.is_ctor && m.params.is_empty() {
                return Some((ClassId(ci as u32), mi));
            }
        }
    }
    None
}

const MAX_CALL_DEPTH: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    Int(i32),
    Float(f64),
    Bool(bool),
    Char(char),
    Null,
    Ref(u32),
}

#[derive(Debug, Clone)]
enum HeapCell {
    Obj { fields: Vec<Value> },
    Arr { data: Vec<Value> },
    List { items: Vec<Value> },
    Buf { data: Vec<f64>, pos: usize, limit: usize },
}

struct Frame {
    this_ref: u32,
    class: ClassId,
    params: Vec<Value>,
    scopes: Vec<Vec<(String, Value)>>,
}

enum Flow {
    Normal,
    Break,
    Return(Value),
}

struct Interp<'a> {
    tp: &'a TypedProgram,
    plan: &'a OpPlan,
    cfg: &'a ProgramCfg,
    cat: &'static Catalog,
    heap: Vec<HeapCell>,
    rng: ChaCha8Rng,
    inputs: &'a [InputEvent],
    input_pos: usize,
    input_exhausted: bool,
    outputs: Vec<String>,
    steps: u64,
    budget: u64,
    depth: u32,
    block_exec: Vec<u64>,
    block_counts: Vec<Vec<u64>>,
    cur_block: Vec<BlockIdx>,
    ablated: Vec<bool>,
    method_calls: Vec<u64>,
}

impl Interp<'_> {
    fn alloc(&mut self, cell: HeapCell) -> u32 {
        self.heap.push(cell);
        (self.heap.len() - 1) as u32
    }

    fn alloc_object(&mut self, class: ClassId) -> u32 {
        let fields = self.tp.field_tys[class.index()]
            .iter()
            .map(default_value)
            .collect();
        self.alloc(HeapCell::Obj { fields })
    }

    /// Record a node's own operations into the current block.
    fn fire_node(&mut self, id: NodeId) {
        let plan = self.plan;
        let b = *self.cur_block.last().expect("inside a block");
        for op in plan.own_ops(id) {
            self.block_counts[b][op.index()] += 1;
        }
    }

    fn fire_one(&mut self, op: OpId) {
        let b = *self.cur_block.last().expect("inside a block");
        self.block_counts[b][op.index()] += 1;
    }

    fn step(&mut self) -> Result<(), RunError> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(RunError::StepBudgetExceeded {
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    fn call_method(
        &mut self,
        class: ClassId,
        method: usize,
        this_ref: u32,
        args: Vec<Value>,
        pos: Pos,
    ) -> Result<Value, RunError> {
        self.depth += 1;
        if self.depth > MAX_CALL_DEPTH {
            return Err(RunError::Fault {
                kind: FaultKind::StackOverflow,
                pos,
            });
        }
        self.method_calls[self.cfg.method_ordinal(class, method)] += 1;
        let decl = self.tp.method_decl(class, method);
        let mut frame = Frame {
            this_ref,
            class,
            params: args,
            scopes: Vec::new(),
        };
        let entry = self.cfg.entry_of(class, method);
        let flow = self.run_block(entry, &decl.body, &mut frame)?;
        self.depth -= 1;
        let ret = &self.tp.sig(class, method).ret;
        match flow {
            Flow::Return(v) => Ok(coerce(v, ret)),
            Flow::Normal | Flow::Break => {
                if *ret == SemType::Void || decl.is_ctor {
                    Ok(Value::Null)
                } else {
                    Err(RunError::Fault {
                        kind: FaultKind::MissingReturn,
                        pos: decl.pos,
                    })
                }
            }
        }
    }

    /// Enter a region block: bump its execution count, run its statements
    /// in a fresh scope.
    fn run_block(
        &mut self,
        block: BlockIdx,
        stmts: &[Stmt],
        frame: &mut Frame,
    ) -> Result<Flow, RunError> {
        self.block_exec[block] += 1;
        self.cur_block.push(block);
        frame.scopes.push(Vec::new());
        let flow = self.exec_stmts(stmts, frame);
        frame.scopes.pop();
        self.cur_block.pop();
        flow
    }

    fn exec_stmts(&mut self, stmts: &[Stmt], frame: &mut Frame) -> Result<Flow, RunError> {
        for stmt in stmts {
            match self.exec_stmt(stmt, frame)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, stmt: &Stmt, frame: &mut Frame) -> Result<Flow, RunError> {
        self.step()?;
        match &stmt.kind {
            StmtKind::Decl { name, init, .. } => {
                let ty = self.tp.decl_type(stmt.id).clone();
                let value = match init {
                    Some(e) => coerce(self.eval(e, frame)?, &ty),
                    None => default_value(&ty),
                };
                self.fire_node(stmt.id);
                frame.scopes.last_mut().unwrap().push((name.clone(), value));
                Ok(Flow::Normal)
            }
            StmtKind::Assign { target, value } => {
                let v = self.eval_assign(target, value, frame)?;
                self.fire_node(stmt.id);
                let _ = v;
                Ok(Flow::Normal)
            }
            StmtKind::Incr { target, negative } => {
                // target is a named int variable
                let cur = self.eval(target, frame)?;
                let Value::Int(i) = cur else {
                    unreachable!("typechecked increment");
                };
                let next = if *negative {
                    i.wrapping_sub(1)
                } else {
                    i.wrapping_add(1)
                };
                self.write_name(target, Value::Int(next), frame)?;
                self.fire_node(stmt.id);
                Ok(Flow::Normal)
            }
            StmtKind::Expr(e) => {
                self.eval(e, frame)?;
                Ok(Flow::Normal)
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.eval_bool(cond, frame)?;
                let blocks = self.cfg.if_blocks(stmt.id);
                if c {
                    if self.ablated[blocks.then_block] {
                        return Ok(Flow::Normal);
                    }
                    self.run_block(blocks.then_block, then_branch, frame)
                } else {
                    // the jump past the then-branch
                    self.fire_one(self.cat.blockgoto_if);
                    match (blocks.else_block, else_branch) {
                        (Some(idx), Some(eb)) => {
                            if self.ablated[idx] {
                                return Ok(Flow::Normal);
                            }
                            self.run_block(idx, eb, frame)
                        }
                        _ => Ok(Flow::Normal),
                    }
                }
            }
            StmtKind::While { cond, body } => {
                let blocks = self.cfg.loop_blocks(stmt.id);
                loop {
                    // header: one execution per iteration test
                    self.step()?;
                    self.block_exec[blocks.header] += 1;
                    self.cur_block.push(blocks.header);
                    let c = self.eval_bool(cond, frame);
                    self.cur_block.pop();
                    if !c? {
                        return Ok(Flow::Normal);
                    }
                    if self.ablated[blocks.body] {
                        continue;
                    }
                    // entering the loop body costs its goto
                    self.block_counts[blocks.body][self.cat.blockgoto_while.index()] += 1;
                    match self.run_block(blocks.body, body, frame)? {
                        Flow::Normal => {}
                        Flow::Break => return Ok(Flow::Normal),
                        ret @ Flow::Return(_) => return Ok(ret),
                    }
                }
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                frame.scopes.push(Vec::new());
                let result = self.exec_for(stmt, init, cond, update, body, frame);
                frame.scopes.pop();
                result
            }
            StmtKind::Break => Ok(Flow::Break),
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => self.eval(e, frame)?,
                    None => Value::Null,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Block(stmts) => {
                frame.scopes.push(Vec::new());
                let flow = self.exec_stmts(stmts, frame);
                frame.scopes.pop();
                flow
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn exec_for(
        &mut self,
        stmt: &Stmt,
        init: &Option<Box<Stmt>>,
        cond: &Expr,
        update: &Option<Box<Stmt>>,
        body: &[Stmt],
        frame: &mut Frame,
    ) -> Result<Flow, RunError> {
        if let Some(i) = init {
            match self.exec_stmt(i, frame)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        let blocks = self.cfg.loop_blocks(stmt.id);
        let mut first = true;
        loop {
            // header runs the update (after the first pass) and the test
            self.step()?;
            self.block_exec[blocks.header] += 1;
            self.cur_block.push(blocks.header);
            let c = (|| -> Result<bool, RunError> {
                if !first {
                    if let Some(u) = update {
                        match self.exec_stmt(u, frame)? {
                            Flow::Normal => {}
                            _ => unreachable!("update is a simple statement"),
                        }
                    }
                }
                self.eval_bool(cond, frame)
            })();
            self.cur_block.pop();
            first = false;
            if !c? {
                return Ok(Flow::Normal);
            }
            if self.ablated[blocks.body] {
                continue;
            }
            // entering the loop body costs its goto
            self.block_counts[blocks.body][self.cat.blockgoto_for.index()] += 1;
            match self.run_block(blocks.body, body, frame)? {
                Flow::Normal => {}
                Flow::Break => return Ok(Flow::Normal),
                ret @ Flow::Return(_) => return Ok(ret),
            }
        }
    }

    fn eval_bool(&mut self, e: &Expr, frame: &mut Frame) -> Result<bool, RunError> {
        match self.eval(e, frame)? {
            Value::Bool(b) => Ok(b),
            _ => unreachable!("typechecked condition"),
        }
    }

    fn eval_assign(
        &mut self,
        target: &Expr,
        value: &Expr,
        frame: &mut Frame,
    ) -> Result<Value, RunError> {
        let target_ty = self.tp.expr_ty(target.id).clone();
        match &target.kind {
            ExprKind::Name(_) => {
                let v = coerce(self.eval(value, frame)?, &target_ty);
                // the name node's own ops (a self-field write counts one
                // field reference)
                self.fire_node(target.id);
                self.write_name(target, v, frame)?;
                Ok(v)
            }
            ExprKind::Field { recv, .. } => {
                let obj = self.eval(recv, frame)?;
                let v = coerce(self.eval(value, frame)?, &target_ty);
                self.fire_node(target.id);
                let (_, fi) = self.tp.field_target(target.id).expect("field resolved");
                let r = self.expect_ref(obj, recv.pos)?;
                match &mut self.heap[r as usize] {
                    HeapCell::Obj { fields } => {
                        fields[fi] = v;
                        Ok(v)
                    }
                    _ => unreachable!("typechecked field write"),
                }
            }
            ExprKind::Index { arr, idx } => {
                let a = self.eval(arr, frame)?;
                let i = self.eval_int(idx, frame)?;
                let v = coerce(self.eval(value, frame)?, &target_ty);
                self.fire_node(target.id);
                let r = self.expect_ref(a, arr.pos)?;
                match &mut self.heap[r as usize] {
                    HeapCell::Arr { data } => {
                        if i < 0 || i as usize >= data.len() {
                            return Err(RunError::Fault {
                                kind: FaultKind::IndexOutOfBounds,
                                pos: idx.pos,
                            });
                        }
                        data[i as usize] = v;
                        Ok(v)
                    }
                    _ => unreachable!("typechecked index write"),
                }
            }
            _ => unreachable!("typechecked assignment target"),
        }
    }

    fn write_name(&mut self, target: &Expr, v: Value, frame: &mut Frame) -> Result<(), RunError> {
        let ExprKind::Name(name) = &target.kind else {
            unreachable!()
        };
        match self.tp.name_target(target.id) {
            NameTarget::Local => {
                for scope in frame.scopes.iter_mut().rev() {
                    if let Some(slot) = scope.iter_mut().rev().find(|(n, _)| n == name) {
                        slot.1 = v;
                        return Ok(());
                    }
                }
                unreachable!("local resolved at typecheck");
            }
            NameTarget::Param(i) => {
                frame.params[i] = v;
                Ok(())
            }
            NameTarget::SelfField(fi) => {
                match &mut self.heap[frame.this_ref as usize] {
                    HeapCell::Obj { fields } => fields[fi] = v,
                    _ => unreachable!("this is an object"),
                }
                Ok(())
            }
        }
    }

    fn eval_int(&mut self, e: &Expr, frame: &mut Frame) -> Result<i32, RunError> {
        match self.eval(e, frame)? {
            Value::Int(i) => Ok(i),
            _ => unreachable!("typechecked int expression"),
        }
    }

    fn expect_ref(&self, v: Value, pos: Pos) -> Result<u32, RunError> {
        match v {
            Value::Ref(r) => Ok(r),
            Value::Null => Err(RunError::Fault {
                kind: FaultKind::NullDeref,
                pos,
            }),
            _ => unreachable!("typechecked reference"),
        }
    }

    fn eval(&mut self, e: &Expr, frame: &mut Frame) -> Result<Value, RunError> {
        match &e.kind {
            ExprKind::IntLit(v) => Ok(Value::Int(*v)),
            ExprKind::FloatLit(v) => Ok(Value::Float(*v)),
            ExprKind::BoolLit(b) => Ok(Value::Bool(*b)),
            ExprKind::CharLit(c) => Ok(Value::Char(*c)),
            ExprKind::NullLit => Ok(Value::Null),
            ExprKind::Name(name) => {
                self.fire_node(e.id);
                match self.tp.name_target(e.id) {
                    NameTarget::Local => {
                        for scope in frame.scopes.iter().rev() {
                            if let Some((_, v)) = scope.iter().rev().find(|(n, _)| n == name) {
                                return Ok(*v);
                            }
                        }
                        unreachable!("local resolved at typecheck");
                    }
                    NameTarget::Param(i) => Ok(frame.params[i]),
                    NameTarget::SelfField(fi) => match &self.heap[frame.this_ref as usize] {
                        HeapCell::Obj { fields } => Ok(fields[fi]),
                        _ => unreachable!("this is an object"),
                    },
                }
            }
            ExprKind::Field { recv, .. } => {
                let obj = self.eval(recv, frame)?;
                self.fire_node(e.id);
                let r = self.expect_ref(obj, recv.pos)?;
                let (_, fi) = self.tp.field_target(e.id).expect("field resolved");
                match &self.heap[r as usize] {
                    HeapCell::Obj { fields } => Ok(fields[fi]),
                    _ => unreachable!("typechecked field read"),
                }
            }
            ExprKind::Index { arr, idx } => {
                let a = self.eval(arr, frame)?;
                let i = self.eval_int(idx, frame)?;
                self.fire_node(e.id);
                let r = self.expect_ref(a, arr.pos)?;
                match &self.heap[r as usize] {
                    HeapCell::Arr { data } => {
                        if i < 0 || i as usize >= data.len() {
                            return Err(RunError::Fault {
                                kind: FaultKind::IndexOutOfBounds,
                                pos: idx.pos,
                            });
                        }
                        Ok(data[i as usize])
                    }
                    _ => unreachable!("typechecked index read"),
                }
            }
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand, frame)?;
                self.fire_node(e.id);
                Ok(match (op, v) {
                    (UnOp::Neg, Value::Int(i)) => Value::Int(i.wrapping_neg()),
                    (UnOp::Neg, Value::Float(x)) => Value::Float(-x),
                    (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    _ => unreachable!("typechecked unary"),
                })
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let a = self.eval(lhs, frame)?;
                let b = self.eval(rhs, frame)?;
                self.fire_node(e.id);
                self.apply_binary(*op, a, b, e.pos)
            }
            ExprKind::Call { recv, args, .. } => {
                let recv_val = match recv {
                    CallRecv::Expr(r) => Some((self.eval(r, frame)?, r.pos)),
                    _ => None,
                };
                let mut arg_vals = Vec::with_capacity(args.len());
                for a in args {
                    arg_vals.push(self.eval(a, frame)?);
                }
                self.fire_node(e.id);
                match self.tp.call_target(e.id).expect("call resolved") {
                    Callee::Method { class, method } => {
                        let this = match recv_val {
                            Some((v, pos)) => self.expect_ref(v, pos)?,
                            None => frame.this_ref,
                        };
                        let sig = self.tp.sig(class, method).clone();
                        let coerced = arg_vals
                            .into_iter()
                            .zip(&sig.params)
                            .map(|(v, t)| coerce(v, t))
                            .collect();
                        self.call_method(class, method, this, coerced, e.pos)
                    }
                    Callee::Lib(key) => self.call_lib(key, recv_val, arg_vals, args, e),
                    Callee::Ctor { .. } => unreachable!("constructors only via new"),
                }
            }
            ExprKind::New { args, .. } => {
                let mut arg_vals = Vec::with_capacity(args.len());
                for a in args {
                    arg_vals.push(self.eval(a, frame)?);
                }
                self.fire_node(e.id);
                match self.tp.expr_ty(e.id).clone() {
                    SemType::Object(class) => {
                        let this = self.alloc_object(class);
                        if let Some(Callee::Ctor { class, method }) = self.tp.call_target(e.id) {
                            let sig = self.tp.sig(class, method).clone();
                            let coerced = arg_vals
                                .into_iter()
                                .zip(&sig.params)
                                .map(|(v, t)| coerce(v, t))
                                .collect();
                            self.call_method(class, method, this, coerced, e.pos)?;
                        }
                        Ok(Value::Ref(this))
                    }
                    SemType::List(_) => Ok(Value::Ref(self.alloc(HeapCell::List {
                        items: Vec::new(),
                    }))),
                    SemType::Buffer => {
                        let Value::Int(n) = arg_vals[0] else {
                            unreachable!("typechecked buffer capacity");
                        };
                        if n < 0 {
                            return Err(RunError::Fault {
                                kind: FaultKind::IndexOutOfBounds,
                                pos: e.pos,
                            });
                        }
                        Ok(Value::Ref(self.alloc(HeapCell::Buf {
                            data: vec![0.0; n as usize],
                            pos: 0,
                            limit: n as usize,
                        })))
                    }
                    _ => unreachable!("typechecked new"),
                }
            }
            ExprKind::NewArray { len, .. } => {
                let n = self.eval_int(len, frame)?;
                self.fire_node(e.id);
                if n < 0 {
                    return Err(RunError::Fault {
                        kind: FaultKind::IndexOutOfBounds,
                        pos: len.pos,
                    });
                }
                let SemType::Array(elem) = self.tp.expr_ty(e.id) else {
                    unreachable!("typechecked array allocation");
                };
                let fill = default_value(elem);
                Ok(Value::Ref(self.alloc(HeapCell::Arr {
                    data: vec![fill; n as usize],
                })))
            }
        }
    }

    fn apply_binary(&mut self, op: BinOp, a: Value, b: Value, pos: Pos) -> Result<Value, RunError> {
        use BinOp::*;
        match op {
            Add | Sub | Mul | Div | Mod => match (a, b) {
                (Value::Int(x), Value::Int(y)) => {
                    let v = match op {
                        Add => x.wrapping_add(y),
                        Sub => x.wrapping_sub(y),
                        Mul => x.wrapping_mul(y),
                        Div | Mod => {
                            if y == 0 {
                                return Err(RunError::Fault {
                                    kind: FaultKind::DivideByZero,
                                    pos,
                                });
                            }
                            if op == Div {
                                x.wrapping_div(y)
                            } else {
                                x.wrapping_rem(y)
                            }
                        }
                        _ => unreachable!(),
                    };
                    Ok(Value::Int(v))
                }
                (a, b) => {
                    let x = as_float(a);
                    let y = as_float(b);
                    let v = match op {
                        Add => x + y,
                        Sub => x - y,
                        Mul => x * y,
                        Div => x / y,
                        _ => unreachable!("float % is rejected by the checker"),
                    };
                    Ok(Value::Float(v))
                }
            },
            Lt | Le | Gt | Ge => {
                let (x, y) = match (a, b) {
                    (Value::Int(x), Value::Int(y)) => (x as f64, y as f64),
                    (a, b) => (as_float(a), as_float(b)),
                };
                Ok(Value::Bool(match op {
                    Lt => x < y,
                    Le => x <= y,
                    Gt => x > y,
                    Ge => x >= y,
                    _ => unreachable!(),
                }))
            }
            Eq | Ne => {
                let eq = value_eq(a, b);
                Ok(Value::Bool(if op == Eq { eq } else { !eq }))
            }
            And | Or => match (a, b) {
                (Value::Bool(x), Value::Bool(y)) => {
                    Ok(Value::Bool(if op == And { x && y } else { x || y }))
                }
                _ => unreachable!("typechecked boolean"),
            },
        }
    }

    fn call_lib(
        &mut self,
        key: LibFuncKey,
        recv: Option<(Value, Pos)>,
        args: Vec<Value>,
        arg_exprs: &[Expr],
        call: &Expr,
    ) -> Result<Value, RunError> {
        let spec = key.spec();
        match (spec.class, spec.name) {
            (LibClass::List, _) => {
                let (rv, rpos) = recv.expect("list call has a receiver");
                let r = self.expect_ref(rv, rpos)? as usize;
                match spec.name {
                    "add" => {
                        // coerce into the receiver's element type so a later
                        // `get` yields the declared type
                        let ExprKind::Call {
                            recv: CallRecv::Expr(robj),
                            ..
                        } = &call.kind
                        else {
                            unreachable!()
                        };
                        let SemType::List(elem) = self.tp.expr_ty(robj.id) else {
                            unreachable!()
                        };
                        let v = coerce(args[0], elem);
                        let HeapCell::List { items } = &mut self.heap[r] else {
                            unreachable!()
                        };
                        items.push(v);
                        Ok(Value::Null)
                    }
                    "get" | "remove" => {
                        let Value::Int(i) = args[0] else { unreachable!() };
                        let HeapCell::List { items } = &mut self.heap[r] else {
                            unreachable!()
                        };
                        if i < 0 || i as usize >= items.len() {
                            return Err(RunError::Fault {
                                kind: FaultKind::IndexOutOfBounds,
                                pos: arg_exprs[0].pos,
                            });
                        }
                        if spec.name == "get" {
                            Ok(items[i as usize])
                        } else {
                            Ok(items.remove(i as usize))
                        }
                    }
                    "size" => {
                        let HeapCell::List { items } = &self.heap[r] else {
                            unreachable!()
                        };
                        Ok(Value::Int(items.len() as i32))
                    }
                    "isEmpty" => {
                        let HeapCell::List { items } = &self.heap[r] else {
                            unreachable!()
                        };
                        Ok(Value::Bool(items.is_empty()))
                    }
                    _ => unreachable!("unknown List function"),
                }
            }
            (LibClass::Buffer, _) => {
                let (rv, rpos) = recv.expect("buffer call has a receiver");
                let r = self.expect_ref(rv, rpos)? as usize;
                match spec.name {
                    "put" => {
                        let v = as_float(args[0]);
                        let HeapCell::Buf { data, pos, limit } = &mut self.heap[r] else {
                            unreachable!()
                        };
                        if *pos >= *limit {
                            return Err(RunError::Fault {
                                kind: FaultKind::BufferOverflow,
                                pos: call.pos,
                            });
                        }
                        data[*pos] = v;
                        *pos += 1;
                        Ok(Value::Null)
                    }
                    "putAll" => {
                        let (ov, opos) = match args[0] {
                            Value::Ref(o) => (o as usize, arg_exprs[0].pos),
                            Value::Null => {
                                return Err(RunError::Fault {
                                    kind: FaultKind::NullDeref,
                                    pos: arg_exprs[0].pos,
                                })
                            }
                            _ => unreachable!(),
                        };
                        let HeapCell::Buf { data: src, limit: src_limit, .. } = &self.heap[ov]
                        else {
                            unreachable!()
                        };
                        let elems: Vec<f64> = src[..*src_limit].to_vec();
                        let HeapCell::Buf { data, pos, limit } = &mut self.heap[r] else {
                            unreachable!()
                        };
                        for v in elems {
                            if *pos >= *limit {
                                return Err(RunError::Fault {
                                    kind: FaultKind::BufferOverflow,
                                    pos: opos,
                                });
                            }
                            data[*pos] = v;
                            *pos += 1;
                        }
                        Ok(Value::Null)
                    }
                    "get" => {
                        let Value::Int(i) = args[0] else { unreachable!() };
                        let HeapCell::Buf { data, limit, .. } = &self.heap[r] else {
                            unreachable!()
                        };
                        if i < 0 || i as usize >= *limit {
                            return Err(RunError::Fault {
                                kind: FaultKind::IndexOutOfBounds,
                                pos: arg_exprs[0].pos,
                            });
                        }
                        Ok(Value::Float(data[i as usize]))
                    }
                    "limit" => {
                        let HeapCell::Buf { limit, .. } = &self.heap[r] else {
                            unreachable!()
                        };
                        Ok(Value::Int(*limit as i32))
                    }
                    "position" => {
                        let HeapCell::Buf { pos, .. } = &self.heap[r] else {
                            unreachable!()
                        };
                        Ok(Value::Int(*pos as i32))
                    }
                    "clear" => {
                        let HeapCell::Buf { pos, .. } = &mut self.heap[r] else {
                            unreachable!()
                        };
                        *pos = 0;
                        Ok(Value::Null)
                    }
                    _ => unreachable!("unknown Buffer function"),
                }
            }
            (LibClass::Math, "max") => match (args[0], args[1]) {
                (Value::Int(a), Value::Int(b)) => Ok(Value::Int(a.max(b))),
                (a, b) => Ok(Value::Float(as_float(a).max(as_float(b)))),
            },
            (LibClass::Math, "pow") => Ok(Value::Float(as_float(args[0]).powf(as_float(args[1])))),
            (LibClass::Math, "sqrt") => Ok(Value::Float(as_float(args[0]).sqrt())),
            (LibClass::Math, "random") => Ok(Value::Float(self.rng.gen::<f64>())),
            (LibClass::Io, "print") => {
                self.outputs.push(print_text(args[0]));
                Ok(Value::Null)
            }
            (LibClass::Io, "readInput") => Ok(Value::Int(match self.next_input() {
                Some(InputEvent::Int(i)) => i,
                Some(InputEvent::Float(f)) => f as i32,
                None => 0,
            })),
            (LibClass::Io, "readInputFloat") => Ok(Value::Float(match self.next_input() {
                Some(InputEvent::Int(i)) => i as f64,
                Some(InputEvent::Float(f)) => f,
                None => 0.0,
            })),
            _ => unreachable!("unknown library function"),
        }
    }

    fn next_input(&mut self) -> Option<InputEvent> {
        if self.input_pos < self.inputs.len() {
            let ev = self.inputs[self.input_pos];
            self.input_pos += 1;
            Some(ev)
        } else {
            self.input_exhausted = true;
            None
        }
    }
}

fn as_float(v: Value) -> f64 {
    match v {
        Value::Int(i) => i as f64,
        Value::Float(f) => f,
        _ => unreachable!("typechecked numeric"),
    }
}

fn value_eq(a: Value, b: Value) -> bool {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Float(_), _) | (_, Value::Float(_)) => as_float(a) == as_float(b),
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Char(x), Value::Char(y)) => x == y,
        (Value::Null, Value::Null) => true,
        (Value::Ref(x), Value::Ref(y)) => x == y,
        (Value::Ref(_), Value::Null) | (Value::Null, Value::Ref(_)) => false,
        _ => unreachable!("typechecked equality"),
    }
}

fn default_value(t: &SemType) -> Value {
    match t {
        SemType::Int => Value::Int(0),
        SemType::Float => Value::Float(0.0),
        SemType::Bool => Value::Bool(false),
        SemType::Char => Value::Char('\0'),
        _ => Value::Null,
    }
}

fn coerce(v: Value, target: &SemType) -> Value {
    match (v, target) {
        (Value::Int(i), SemType::Float) => Value::Float(i as f64),
        _ => v,
    }
}

fn print_text(v: Value) -> String {
    match v {
        Value::Int(i) => format!("{i}"),
        Value::Float(f) => float_text(f),
        Value::Bool(b) => format!("{b}"),
        Value::Char(c) => format!("{c}"),
        _ => unreachable!("print takes primitives"),
    }
}
