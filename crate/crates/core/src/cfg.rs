//! Per-method control-flow structure: basic blocks with hierarchical names
//! and static per-execution operation counts.
//!
//! Blocks mirror the lexical regions of a method: the entry block holds the
//! method's top-level statements (including `if` conditions and `for`
//! initializers), each branch and loop body is its own block, and every loop
//! gets a header block owning its condition and update, executed once per
//! iteration test. Bare `{ }` blocks are transparent.
//!
//! Naming: `Class.method()` for the entry, then dotted construct segments
//! with 1-based sibling ordinals per construct kind, e.g.
//! `CCNode.visit().if_4.for_1` (the body of the first `for` inside the
//! fourth `if`). Loop headers append `.header`, else-branches `.else`.
//!
//! `BlockGoto` accounting: entering a `for`/`while` body costs one
//! `BlockGoto_for`/`BlockGoto_while`, carried in the body block's static
//! counts. `BlockGoto_if` instead fires on each false `if`-condition
//! evaluation (the jump past the then-branch) and is attributed dynamically
//! to the block evaluating the condition, so branch blocks carry no goto in
//! their static counts.

use std::collections::BTreeMap;

use crate::minilang::ast::*;
use crate::minilang::typeck::TypedProgram;
use crate::minilang::types::ClassId;
use crate::ops::{self, catalog, OpPlan, UncataloguedConstruct};

/// Global block index within a [`ProgramCfg`].
pub type BlockIdx = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    MethodEntry,
    Then,
    Else,
    ForHeader,
    ForBody,
    WhileHeader,
    WhileBody,
}

/// Which construct guards entry into a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GotoKind {
    None,
    If,
    For,
    While,
}

#[derive(Debug, Clone)]
pub struct BasicBlock {
    pub id: String,
    pub kind: BlockKind,
    pub goto_kind: GotoKind,
    /// Whether an execution case may ablate this block. Method entries and
    /// loop headers never; `while` bodies never (ablating one usually breaks
    /// termination since the condition's progress lives in the body).
    pub ablatable: bool,
    /// Operation counts for one full execution of the block, dense over the
    /// catalog. Loop body blocks include their `BlockGoto_for`/`_while`.
    pub static_counts: Vec<u64>,
    /// Number of statements owned by this block (partition check).
    pub owned_stmts: usize,
    pub class: ClassId,
    pub method: usize,
}

/// Blocks attached to one `if` statement.
#[derive(Debug, Clone, Copy)]
pub struct IfBlocks {
    pub then_block: BlockIdx,
    pub else_block: Option<BlockIdx>,
}

/// Blocks attached to one loop statement.
#[derive(Debug, Clone, Copy)]
pub struct LoopBlocks {
    pub header: BlockIdx,
    pub body: BlockIdx,
}

#[derive(Debug, Clone)]
pub struct MethodCfg {
    pub class: ClassId,
    pub method: usize,
    pub entry: BlockIdx,
}

#[derive(Debug, Clone)]
pub struct ProgramCfg {
    pub blocks: Vec<BasicBlock>,
    pub methods: Vec<MethodCfg>,
    /// flat method ordinal by (class index, method index)
    method_index: BTreeMap<(u32, usize), usize>,
    pub by_id: BTreeMap<String, BlockIdx>,
    if_blocks: BTreeMap<NodeId, IfBlocks>,
    loop_blocks: BTreeMap<NodeId, LoopBlocks>,
}

impl ProgramCfg {
    pub fn block(&self, idx: BlockIdx) -> &BasicBlock {
        &self.blocks[idx]
    }

    pub fn entry_of(&self, class: ClassId, method: usize) -> BlockIdx {
        let mi = self.method_index[&(class.0, method)];
        self.methods[mi].entry
    }

    /// Flat ordinal of a method (index into per-method profile vectors).
    pub fn method_ordinal(&self, class: ClassId, method: usize) -> usize {
        self.method_index[&(class.0, method)]
    }

    pub fn if_blocks(&self, stmt: NodeId) -> IfBlocks {
        self.if_blocks[&stmt]
    }

    pub fn loop_blocks(&self, stmt: NodeId) -> LoopBlocks {
        self.loop_blocks[&stmt]
    }

    pub fn find(&self, id: &str) -> Option<BlockIdx> {
        self.by_id.get(id).copied()
    }

    /// Blocks of one method, in creation (source) order.
    pub fn method_blocks(&self, class: ClassId, method: usize) -> Vec<BlockIdx> {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.class == class && b.method == method)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Build the control-flow structure for every method of a program.
pub fn build_cfg(tp: &TypedProgram, plan: &OpPlan) -> Result<ProgramCfg, UncataloguedConstruct> {
    let cat_len = catalog().len();
    let mut cfg = ProgramCfg {
        blocks: Vec::new(),
        methods: Vec::new(),
        method_index: BTreeMap::new(),
        by_id: BTreeMap::new(),
        if_blocks: BTreeMap::new(),
        loop_blocks: BTreeMap::new(),
    };
    for (ci, class) in tp.program.classes.iter().enumerate() {
        let cid = ClassId(ci as u32);
        for (mi, method) in class.methods.iter().enumerate() {
            let entry_id = format!("{}.{}()", class.name, method.name);
            let entry = new_block(
                &mut cfg,
                entry_id,
                BlockKind::MethodEntry,
                GotoKind::None,
                false,
                cid,
                mi,
                cat_len,
            );
            let ordinal = cfg.methods.len();
            cfg.methods.push(MethodCfg {
                class: cid,
                method: mi,
                entry,
            });
            cfg.method_index.insert((cid.0, mi), ordinal);
            let mut b = Builder {
                tp,
                plan,
                cfg: &mut cfg,
                cat_len,
                class: cid,
                method: mi,
            };
            b.region(entry, &method.body)?;
        }
    }
    Ok(cfg)
}

#[allow(clippy::too_many_arguments)]
fn new_block(
    cfg: &mut ProgramCfg,
    id: String,
    kind: BlockKind,
    goto_kind: GotoKind,
    ablatable: bool,
    class: ClassId,
    method: usize,
    cat_len: usize,
) -> BlockIdx {
    let idx = cfg.blocks.len();
    let prev = cfg.by_id.insert(id.clone(), idx);
    assert!(prev.is_none(), "duplicate block id {id}");
    cfg.blocks.push(BasicBlock {
        id,
        kind,
        goto_kind,
        ablatable,
        static_counts: vec![0; cat_len],
        owned_stmts: 0,
        class,
        method,
    });
    idx
}

struct Builder<'a> {
    tp: &'a TypedProgram,
    plan: &'a OpPlan,
    cfg: &'a mut ProgramCfg,
    cat_len: usize,
    class: ClassId,
    method: usize,
}

#[derive(Default)]
struct Ordinals {
    ifs: u32,
    fors: u32,
    whiles: u32,
}

impl Builder<'_> {
    /// Walk the direct statements of a region block, creating child blocks
    /// for nested constructs and accumulating the region's static counts.
    fn region(&mut self, block: BlockIdx, stmts: &[Stmt]) -> Result<(), UncataloguedConstruct> {
        let mut ord = Ordinals::default();
        self.region_inner(block, stmts, &mut ord)
    }

    fn region_inner(
        &mut self,
        block: BlockIdx,
        stmts: &[Stmt],
        ord: &mut Ordinals,
    ) -> Result<(), UncataloguedConstruct> {
        for stmt in stmts {
            match &stmt.kind {
                StmtKind::Block(inner) => {
                    // transparent: statements and ordinals continue in the
                    // enclosing region
                    self.cfg.blocks[block].owned_stmts += 1;
                    self.region_inner(block, inner, ord)?;
                }
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    ord.ifs += 1;
                    self.cfg.blocks[block].owned_stmts += 1;
                    self.add_expr(block, cond);
                    let base = format!("{}.if_{}", self.cfg.blocks[block].id, ord.ifs);
                    let then_block = new_block(
                        self.cfg,
                        base.clone(),
                        BlockKind::Then,
                        GotoKind::If,
                        true,
                        self.class,
                        self.method,
                        self.cat_len,
                    );
                    self.region(then_block, then_branch)?;
                    let else_block = match else_branch {
                        Some(eb) => {
                            let idx = new_block(
                                self.cfg,
                                format!("{base}.else"),
                                BlockKind::Else,
                                GotoKind::If,
                                true,
                                self.class,
                                self.method,
                                self.cat_len,
                            );
                            self.region(idx, eb)?;
                            Some(idx)
                        }
                        None => None,
                    };
                    self.cfg.if_blocks.insert(
                        stmt.id,
                        IfBlocks {
                            then_block,
                            else_block,
                        },
                    );
                }
                StmtKind::For {
                    init,
                    cond,
                    update,
                    body,
                } => {
                    ord.fors += 1;
                    self.cfg.blocks[block].owned_stmts += 1;
                    // init runs once, in the block preceding the loop
                    if let Some(i) = init {
                        self.add_stmt(block, i);
                        self.cfg.blocks[block].owned_stmts += 1;
                    }
                    let base = format!("{}.for_{}", self.cfg.blocks[block].id, ord.fors);
                    let header = new_block(
                        self.cfg,
                        format!("{base}.header"),
                        BlockKind::ForHeader,
                        GotoKind::None,
                        false,
                        self.class,
                        self.method,
                        self.cat_len,
                    );
                    self.add_expr(header, cond);
                    if let Some(u) = update {
                        self.add_stmt(header, u);
                        self.cfg.blocks[header].owned_stmts += 1;
                    }
                    let body_block = new_block(
                        self.cfg,
                        base,
                        BlockKind::ForBody,
                        GotoKind::For,
                        true,
                        self.class,
                        self.method,
                        self.cat_len,
                    );
                    let goto_for = catalog().blockgoto_for;
                    self.cfg.blocks[body_block].static_counts[goto_for.index()] += 1;
                    self.region(body_block, body)?;
                    self.cfg
                        .loop_blocks
                        .insert(stmt.id, LoopBlocks { header, body: body_block });
                }
                StmtKind::While { cond, body } => {
                    ord.whiles += 1;
                    self.cfg.blocks[block].owned_stmts += 1;
                    let base = format!("{}.while_{}", self.cfg.blocks[block].id, ord.whiles);
                    let header = new_block(
                        self.cfg,
                        format!("{base}.header"),
                        BlockKind::WhileHeader,
                        GotoKind::None,
                        false,
                        self.class,
                        self.method,
                        self.cat_len,
                    );
                    self.add_expr(header, cond);
                    let body_block = new_block(
                        self.cfg,
                        base,
                        BlockKind::WhileBody,
                        GotoKind::While,
                        false,
                        self.class,
                        self.method,
                        self.cat_len,
                    );
                    let goto_while = catalog().blockgoto_while;
                    self.cfg.blocks[body_block].static_counts[goto_while.index()] += 1;
                    self.region(body_block, body)?;
                    self.cfg
                        .loop_blocks
                        .insert(stmt.id, LoopBlocks { header, body: body_block });
                }
                _ => {
                    self.cfg.blocks[block].owned_stmts += 1;
                    self.add_stmt(block, stmt);
                }
            }
        }
        Ok(())
    }

    fn add_stmt(&mut self, block: BlockIdx, stmt: &Stmt) {
        let counts = ops::identify_stmt_ops(self.tp, self.plan, stmt);
        for (op, n) in counts {
            self.cfg.blocks[block].static_counts[op.index()] += n;
        }
    }

    fn add_expr(&mut self, block: BlockIdx, e: &Expr) {
        let counts = ops::identify_expr_ops(self.plan, e);
        for (op, n) in counts {
            self.cfg.blocks[block].static_counts[op.index()] += n;
        }
    }
}

/// Static per-execution counts of a block as a name → count map.
pub fn block_static_counts(b: &BasicBlock) -> BTreeMap<String, u64> {
    let cat = catalog();
    b.static_counts
        .iter()
        .enumerate()
        .filter(|(_, n)| **n > 0)
        .map(|(i, n)| (cat.name(crate::ops::OpId(i as u16)).to_string(), *n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::frontend;
    use crate::ops::build_plan;

    fn cfg_for(src: &str) -> (crate::minilang::TypedProgram, ProgramCfg) {
        let tp = frontend(src).unwrap();
        let plan = build_plan(&tp).unwrap();
        let cfg = build_cfg(&tp, &plan).unwrap();
        (tp, cfg)
    }

    #[test]
    fn straight_line_method_is_one_block() {
        let (_, cfg) = cfg_for("class A { void f() { int x = 1; print(x); } }");
        assert_eq!(cfg.blocks.len(), 1);
        assert_eq!(cfg.blocks[0].id, "A.f()");
        assert_eq!(cfg.blocks[0].goto_kind, GotoKind::None);
        assert!(!cfg.blocks[0].ablatable);
    }

    #[test]
    fn hierarchical_naming_matches_convention() {
        let src = r#"
class CCNode {
    public int x_;
    void visit() {
        if (x_ > 0) { print(1); }
        if (x_ > 1) { print(2); }
        if (x_ > 2) { print(3); }
        if (x_ > 3) {
            for (int i = 0; i < x_; i++) { print(i); }
        }
    }
}
"#;
        let (_, cfg) = cfg_for(src);
        assert!(cfg.find("CCNode.visit()").is_some());
        assert!(cfg.find("CCNode.visit().if_4").is_some());
        assert!(cfg.find("CCNode.visit().if_4.for_1").is_some());
        assert!(cfg.find("CCNode.visit().if_4.for_1.header").is_some());
        let body = cfg.block(cfg.find("CCNode.visit().if_4.for_1").unwrap());
        assert_eq!(body.goto_kind, GotoKind::For);
        assert!(body.ablatable);
        let header = cfg.block(cfg.find("CCNode.visit().if_4.for_1.header").unwrap());
        assert!(!header.ablatable);
    }

    #[test]
    fn while_body_costs_one_goto_per_entry() {
        let (_, cfg) = cfg_for(
            "class A { void f(int n) { int i = 0; while (i < n) { i++; } } }",
        );
        let body = cfg.block(cfg.find("A.f().while_1").unwrap());
        let counts = block_static_counts(body);
        assert_eq!(counts.get("BlockGoto_while"), Some(&1));
        assert_eq!(counts.get("Increment"), Some(&1));
        let header = cfg.block(cfg.find("A.f().while_1.header").unwrap());
        let hcounts = block_static_counts(header);
        assert_eq!(hcounts.get("Less_int_int"), Some(&1));
    }

    #[test]
    fn copy_loop_body_counts_match_hand_count() {
        // three `dst.put(src.get(i + k))` statements: six invocations, three
        // puts, three gets, two additions, one goto
        let src = r#"
class G {
    void blit(Buffer dst, Buffer src) {
        for (int i = 0; i < src.limit(); i = i + 3) {
            dst.put(src.get(i));
            dst.put(src.get(i + 1));
            dst.put(src.get(i + 2));
        }
    }
}
"#;
        let (_, cfg) = cfg_for(src);
        let body = cfg.block(cfg.find("G.blit().for_1").unwrap());
        let counts = block_static_counts(body);
        let expect: BTreeMap<String, u64> = [
            ("Method_Invocation".to_string(), 6),
            ("Buffer.put".to_string(), 3),
            ("Buffer.get".to_string(), 3),
            ("Addition_int_int".to_string(), 2),
            ("BlockGoto_for".to_string(), 1),
        ]
        .into();
        assert_eq!(counts, expect);
        // header owns the condition (one invocation + limit) and the update
        let header = cfg.block(cfg.find("G.blit().for_1.header").unwrap());
        let hcounts = block_static_counts(header);
        assert_eq!(hcounts.get("Less_int_int"), Some(&1));
        assert_eq!(hcounts.get("Buffer.limit"), Some(&1));
        assert_eq!(hcounts.get("Method_Invocation"), Some(&1));
        assert_eq!(hcounts.get("Assign_int_int"), Some(&1));
        assert_eq!(hcounts.get("Addition_int_int"), Some(&1));
    }

    #[test]
    fn then_block_carries_no_static_goto() {
        let (_, cfg) = cfg_for("class A { void f(int n) { if (n > 0) { print(n); } } }");
        let then = cfg.block(cfg.find("A.f().if_1").unwrap());
        let counts = block_static_counts(then);
        assert_eq!(counts.get("BlockGoto_if"), None);
        assert_eq!(then.goto_kind, GotoKind::If);
    }

    #[test]
    fn statements_partition_across_blocks() {
        let src = r#"
class A {
    void f(int n) {
        int acc = 0;
        for (int i = 0; i < n; i++) {
            if (i % 2 == 0) { acc = acc + i; } else { acc = acc - 1; }
        }
        { print(acc); }
        while (acc > 0) { acc = acc - 3; }
    }
}
"#;
        let (tp, cfg) = cfg_for(src);
        let total_owned: usize = cfg.blocks.iter().map(|b| b.owned_stmts).sum();
        fn count_stmts(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| match &s.kind {
                    StmtKind::If {
                        then_branch,
                        else_branch,
                        ..
                    } => {
                        1 + count_stmts(then_branch)
                            + else_branch.as_ref().map(|e| count_stmts(e)).unwrap_or(0)
                    }
                    StmtKind::While { body, .. } => 1 + count_stmts(body),
                    StmtKind::For {
                        init, update, body, ..
                    } => {
                        1 + init.is_some() as usize
                            + update.is_some() as usize
                            + count_stmts(body)
                    }
                    StmtKind::Block(inner) => 1 + count_stmts(inner),
                    _ => 1,
                })
                .sum()
        }
        let m = tp.program.method("A", "f").unwrap();
        assert_eq!(total_owned, count_stmts(&m.body));
    }

    #[test]
    fn block_ids_stable_across_reparses() {
        let src = "class A { void f(int n) { if (n > 0) { for (int i = 0; i < n; i++) { print(i); } } } }";
        let (_, cfg1) = cfg_for(src);
        let tp = frontend(src).unwrap();
        let formatted = crate::minilang::format_program(&tp.program);
        let (_, cfg2) = cfg_for(&formatted);
        let ids1: Vec<&String> = cfg1.blocks.iter().map(|b| &b.id).collect();
        let ids2: Vec<&String> = cfg2.blocks.iter().map(|b| &b.id).collect();
        assert_eq!(ids1, ids2);
    }
}
