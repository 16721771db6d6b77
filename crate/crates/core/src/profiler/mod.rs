//! Deterministic execution of typed programs under execution cases:
//! per-block execution counts, per-op totals, block ablation, case
//! generation with coverage, and output capture for equivalence checking.

mod cases;
mod counts;
mod interp;

pub use cases::{
    cases_from_jsonl, cases_to_jsonl, generate_cases, CaseFileError, CaseGenError, DurationModel,
    ExecutionCase, InputEvent, InputTemplate,
};
pub use counts::{counts_from_csv, counts_to_csv, CountFileError, CountVector};
pub use interp::{aggregate_counts, run_case, FaultKind, RunError, RunResult, DEFAULT_STEP_BUDGET};

use crate::cfg::ProgramCfg;
use crate::minilang::TypedProgram;
use crate::ops::OpPlan;

/// A program ready to execute: typed AST, op plan and CFG together.
pub struct Runnable<'p> {
    pub tp: &'p TypedProgram,
    pub plan: &'p OpPlan,
    pub cfg: &'p ProgramCfg,
}

impl Runnable<'_> {
    pub fn run(&self, case: &ExecutionCase, budget: u64) -> Result<RunResult, RunError> {
        run_case(self.tp, self.plan, self.cfg, case, budget)
    }
}

/// Run a suite of cases, discarding and regenerating any case that blows
/// the step budget (runaway ablation). Returns the surviving (case, result)
/// pairs plus a log line per discarded case.
pub fn run_suite(
    tp: &TypedProgram,
    plan: &OpPlan,
    cfg: &ProgramCfg,
    cases: &[ExecutionCase],
    budget: u64,
) -> Result<(Vec<(ExecutionCase, RunResult)>, Vec<String>), RunError> {
    let mut out = Vec::with_capacity(cases.len());
    let mut log = Vec::new();
    for case in cases {
        match run_case(tp, plan, cfg, case, budget) {
            Ok(r) => out.push((case.clone(), r)),
            Err(RunError::StepBudgetExceeded { .. }) => {
                // retry with half the ablation set until the case runs
                let mut ablated = case.ablated.clone();
                let mut retried = false;
                while !ablated.is_empty() {
                    ablated.truncate(ablated.len() / 2);
                    let mut retry = case.clone();
                    retry.ablated = ablated.clone();
                    if let Ok(r) = run_case(tp, plan, cfg, &retry, budget) {
                        log.push(format!(
                            "case {}: step budget exceeded; reran with {} of {} ablated blocks",
                            case.case_id,
                            retry.ablated.len(),
                            case.ablated.len()
                        ));
                        out.push((retry, r));
                        retried = true;
                        break;
                    }
                }
                if !retried {
                    log.push(format!(
                        "case {}: step budget exceeded even without ablation; discarded",
                        case.case_id
                    ));
                }
            }
            Err(other) => return Err(other),
        }
    }
    Ok((out, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::build_cfg;
    use crate::minilang::frontend;
    use crate::ops::{build_plan, catalog};

    struct Prepared {
        tp: TypedProgram,
        plan: OpPlan,
        cfg: ProgramCfg,
    }

    fn prepare(src: &str) -> Prepared {
        let tp = frontend(src).unwrap();
        let plan = build_plan(&tp).unwrap();
        let cfg = build_cfg(&tp, &plan).unwrap();
        Prepared { tp, plan, cfg }
    }

    fn case_with(inputs: Vec<InputEvent>, ablated: Vec<&str>) -> ExecutionCase {
        ExecutionCase {
            case_id: "t".to_string(),
            inputs,
            ablated: ablated.into_iter().map(String::from).collect(),
            duration_s: 1.0,
            seed: 7,
        }
    }

    fn run(p: &Prepared, case: &ExecutionCase) -> RunResult {
        run_case(&p.tp, &p.plan, &p.cfg, case, DEFAULT_STEP_BUDGET).unwrap()
    }

    #[test]
    fn three_iteration_loop_counts() {
        let p = prepare(
            "class A { void main() { for (int i = 0; i < 3; i++) { print(i); } } }",
        );
        let r = run(&p, &case_with(vec![], vec![]));
        let body = p.cfg.find("A.main().for_1").unwrap();
        let header = p.cfg.find("A.main().for_1.header").unwrap();
        assert_eq!(r.block_exec[body], 3, "body executes per iteration");
        assert_eq!(r.block_exec[header], 4, "header tested once more");
        assert_eq!(r.outputs, vec!["0", "1", "2"]);
        let named = r.aggregate.named();
        assert_eq!(named.get("BlockGoto_for"), Some(&3));
        assert_eq!(named.get("Less_int_int"), Some(&4));
        assert_eq!(named.get("Increment"), Some(&3));
    }

    #[test]
    fn ablated_body_contributes_nothing_but_loop_still_runs() {
        let p = prepare(
            "class A { void main() { for (int i = 0; i < 3; i++) { print(i); } print(9); } }",
        );
        let full = run(&p, &case_with(vec![], vec![]));
        let ablated = run(&p, &case_with(vec![], vec!["A.main().for_1"]));
        let body = p.cfg.find("A.main().for_1").unwrap();
        let header = p.cfg.find("A.main().for_1.header").unwrap();
        assert_eq!(ablated.block_exec[body], 0);
        assert_eq!(ablated.block_exec[header], full.block_exec[header]);
        assert_eq!(ablated.outputs, vec!["9"], "side effects skipped");
        assert_eq!(ablated.aggregate.named().get("BlockGoto_for"), None);
    }

    #[test]
    fn program_one_analog_with_null_children() {
        let src = r#"
class CCNode {
    public List<CCNode> children_;
    void draw(int gl) { print(gl); }
    void visit(int gl) {
        if (children_ != null) { draw(gl); }
        draw(gl);
        if (children_ != null) { draw(gl); }
    }
    void main() { visit(5); }
}
"#;
        let p = prepare(src);
        let r = run(&p, &case_with(vec![], vec![]));
        let if1 = p.cfg.find("CCNode.visit().if_1").unwrap();
        let if2 = p.cfg.find("CCNode.visit().if_2").unwrap();
        assert_eq!(r.block_exec[if1], 0);
        assert_eq!(r.block_exec[if2], 0);
        let named = r.aggregate.named();
        assert_eq!(named.get("Equal_Object_null"), Some(&2));
        // both failed tests jump past their then-branches
        assert_eq!(named.get("BlockGoto_if"), Some(&2));
        assert_eq!(r.outputs, vec!["5"]);
    }

    #[test]
    fn aggregate_matches_exec_times_static_without_loops_or_branches() {
        let p = prepare(
            "class A { int sq(int x) { return x * x; } void main() { int a = sq(4); print(a); } }",
        );
        let r = run(&p, &case_with(vec![], vec![]));
        assert!(r.exact_attribution);
        let mut expect = CountVector::new();
        for (i, b) in p.cfg.blocks.iter().enumerate() {
            for (op, n) in b.static_counts.iter().enumerate() {
                expect.add(crate::ops::OpId(op as u16), n * r.block_exec[i]);
            }
        }
        assert_eq!(expect.dense(), r.aggregate.dense());
        assert_eq!(r.outputs, vec!["16"]);
    }

    #[test]
    fn deterministic_for_fixed_seed_including_random() {
        let src = r#"
class A {
    void main() {
        float acc = 0.0;
        for (int i = 0; i < 8; i++) { acc = acc + Math.random(); }
        print(acc);
    }
}
"#;
        let p = prepare(src);
        let a = run(&p, &case_with(vec![], vec![]));
        let b = run(&p, &case_with(vec![], vec![]));
        assert_eq!(a, b);
        let mut other_case = case_with(vec![], vec![]);
        other_case.seed = 8;
        let c = run(&p, &other_case);
        assert_ne!(a.outputs, c.outputs, "seed changes Math.random stream");
    }

    #[test]
    fn inputs_drive_execution_and_exhaustion_flag() {
        let src = r#"
class A {
    void main() {
        int n = readInput();
        float x = readInputFloat();
        print(n);
        print(x);
        print(readInput());
    }
}
"#;
        let p = prepare(src);
        let r = run(
            &p,
            &case_with(vec![InputEvent::Int(42), InputEvent::Float(2.5)], vec![]),
        );
        assert_eq!(r.outputs, vec!["42", "2.5", "0"]);
        assert!(r.input_exhausted);
    }

    #[test]
    fn runaway_loop_hits_step_budget() {
        let p = prepare("class A { void main() { int i = 0; while (i < 10) { print(i); } } }");
        let err = run_case(&p.tp, &p.plan, &p.cfg, &case_with(vec![], vec![]), 10_000)
            .unwrap_err();
        assert!(matches!(err, RunError::StepBudgetExceeded { .. }));
    }

    #[test]
    fn faults_carry_positions() {
        let p2 = prepare("class B { public int f_; } class A { void main() { B b = null; print(b.f_); } }");
        let err2 = run_case(&p2.tp, &p2.plan, &p2.cfg, &case_with(vec![], vec![]), 1000)
            .unwrap_err();
        assert!(matches!(
            err2,
            RunError::Fault {
                kind: FaultKind::NullDeref,
                ..
            }
        ));
        let p3 = prepare("class A { void main() { int z = 0; print(3 / z); } }");
        let err3 = run_case(&p3.tp, &p3.plan, &p3.cfg, &case_with(vec![], vec![]), 1000)
            .unwrap_err();
        assert!(matches!(
            err3,
            RunError::Fault {
                kind: FaultKind::DivideByZero,
                ..
            }
        ));
    }

    #[test]
    fn index_out_of_bounds_is_a_fault() {
        let p = prepare("class A { void main() { int[] v = new int[2]; print(v[5]); } }");
        let err = run_case(&p.tp, &p.plan, &p.cfg, &case_with(vec![], vec![]), 1000)
            .unwrap_err();
        assert!(matches!(
            err,
            RunError::Fault {
                kind: FaultKind::IndexOutOfBounds,
                ..
            }
        ));
    }

    #[test]
    fn ablation_never_increases_counts_on_branch_only_programs() {
        let src = r#"
class A {
    void main() {
        int n = readInput();
        if (n > 10) { print(1); }
        if (n > 20) { print(2); } else { print(3); }
        for (int i = 0; i < n; i++) {
            if (i % 3 == 0) { print(i); }
        }
    }
}
"#;
        let p = prepare(src);
        let inputs = vec![InputEvent::Int(25)];
        let full = run(&p, &case_with(inputs.clone(), vec![]));
        for b in p.cfg.blocks.iter().filter(|b| b.ablatable) {
            let ablated = run(&p, &case_with(inputs.clone(), vec![b.id.as_str()]));
            for (i, (a, f)) in ablated
                .aggregate
                .dense()
                .iter()
                .zip(full.aggregate.dense())
                .enumerate()
            {
                assert!(
                    a <= f,
                    "op {} increased under ablation of {}",
                    catalog().name(crate::ops::OpId(i as u16)),
                    b.id
                );
            }
        }
    }

    #[test]
    fn buffer_and_list_semantics() {
        let src = r#"
class A {
    void main() {
        Buffer b = new Buffer(3);
        b.put(1.5);
        b.put(2.5);
        print(b.position());
        print(b.limit());
        print(b.get(0));
        b.clear();
        print(b.position());
        List<A> l = new List<A>();
        print(l.isEmpty());
        l.add(new A());
        print(l.size());
    }
}
"#;
        let p = prepare(src);
        let r = run(&p, &case_with(vec![], vec![]));
        assert_eq!(r.outputs, vec!["2", "3", "1.5", "0", "true", "1"]);
    }

    #[test]
    fn buffer_overflow_faults() {
        let p = prepare(
            "class A { void main() { Buffer b = new Buffer(1); b.put(1.0); b.put(2.0); } }",
        );
        let err = run_case(&p.tp, &p.plan, &p.cfg, &case_with(vec![], vec![]), 1000)
            .unwrap_err();
        assert!(matches!(
            err,
            RunError::Fault {
                kind: FaultKind::BufferOverflow,
                ..
            }
        ));
    }

    #[test]
    fn method_call_profile_counts_callees() {
        let src = r#"
class A {
    void tick() { print(1); }
    void main() {
        for (int i = 0; i < 5; i++) { tick(); }
    }
}
"#;
        let p = prepare(src);
        let r = run(&p, &case_with(vec![], vec![]));
        let tick_ord = {
            let cid = p.tp.class_ids["A"];
            p.cfg.method_ordinal(cid, 0)
        };
        assert_eq!(r.method_calls[tick_ord], 5);
    }

    #[test]
    fn early_return_clears_exact_attribution() {
        let src = r#"
class A {
    int f(int n) {
        for (int i = 0; i < n; i++) {
            if (i > 2) { return i; }
            print(i);
        }
        return 0;
    }
    void main() { print(f(10)); }
}
"#;
        let p = prepare(src);
        let r = run(&p, &case_with(vec![], vec![]));
        assert!(!r.exact_attribution);
        assert_eq!(r.outputs, vec!["0", "1", "2", "3"]);
        // the flat aggregate still equals the per-block sum by construction
        assert_eq!(aggregate_counts(&r).dense(), r.aggregate.dense());
    }

    #[test]
    fn run_suite_discards_runaway_ablations() {
        // ablating the decrementing then-branch makes the while spin
        let src = r#"
class A {
    void main() {
        int w = 5;
        while (w > 0) {
            if (w > 0) { w = w - 1; }
        }
    }
}
"#;
        let p = prepare(src);
        let bad = case_with(vec![], vec!["A.main().while_1.if_1"]);
        let good = case_with(vec![], vec![]);
        let (results, log) = run_suite(
            &p.tp,
            &p.plan,
            &p.cfg,
            &[good, bad],
            50_000,
        )
        .unwrap();
        assert_eq!(results.len(), 2, "runaway case reruns without ablation");
        assert_eq!(log.len(), 1);
        assert!(log[0].contains("step budget"));
    }
}
