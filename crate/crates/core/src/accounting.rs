//! Reporting surfaces: operation ranking with cumulative-share bands,
//! block-level "In Application" totals with fixed-count normalization, and
//! per-block class proportions.
//!
//! All shares are over modeled dynamic energy; idle energy is reported
//! separately, never inside a percentage.

use serde::{Deserialize, Serialize};

use crate::cfg::ProgramCfg;
use crate::fitter::EnergyModel;
use crate::ops::{catalog, OpClass, OpId};
use crate::profiler::{CountVector, RunResult};
use crate::Scalar;

/// Default normalization count for single-execution block costs.
pub const DEFAULT_NORM_N: u64 = 3000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpReportEntry {
    pub rank: usize,
    pub name: String,
    pub class: OpClass,
    pub unit_cost_uj: Scalar,
    pub count: u64,
    pub in_app_mj: Scalar,
    pub share_pct: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpBand {
    pub from_rank: usize,
    pub to_rank: usize,
    pub cumulative_share_pct: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpReport {
    /// Observed operations ranked by single-execution cost (ties broken by
    /// id), with in-application totals and shares of dynamic energy.
    pub entries: Vec<OpReportEntry>,
    pub bands: Vec<OpBand>,
    pub total_dynamic_j: Scalar,
    pub idle_j: Scalar,
}

/// Rank observed operations by unit cost over a full-run count vector.
pub fn rank_operations(model: &EnergyModel, v: &CountVector, bands: &[usize]) -> OpReport {
    let cat = catalog();
    let mut entries: Vec<OpReportEntry> = v
        .iter_nonzero()
        .map(|(op, n)| {
            let name = cat.name(op).to_string();
            let unit = model.cost_of(&name).unwrap_or(0.0);
            OpReportEntry {
                rank: 0,
                class: cat.classify(op),
                unit_cost_uj: unit,
                count: n,
                in_app_mj: unit * n as Scalar / 1000.0,
                share_pct: 0.0,
                name,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.unit_cost_uj
            .partial_cmp(&a.unit_cost_uj)
            .unwrap()
            .then_with(|| a.name.cmp(&b.name))
    });
    let total_mj: Scalar = entries.iter().map(|e| e.in_app_mj).sum();
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
        e.share_pct = if total_mj > 0.0 {
            100.0 * e.in_app_mj / total_mj
        } else {
            0.0
        };
    }
    let mut out_bands = Vec::new();
    let mut from = 1usize;
    for &k in bands {
        let to = k.min(entries.len());
        if to < from {
            break;
        }
        let share: Scalar = entries[(from - 1)..to].iter().map(|e| e.share_pct).sum();
        out_bands.push(OpBand {
            from_rank: from,
            to_rank: to,
            cumulative_share_pct: share,
        });
        from = to + 1;
    }
    let idle_j = model.idle_power_w * v.duration_s;
    OpReport {
        entries,
        bands: out_bands,
        total_dynamic_j: total_mj / 1000.0,
        idle_j,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReportEntry {
    pub id: String,
    pub exec_count: u64,
    /// Modeled cost of one full execution (from static counts), µJ.
    pub single_exec_uj: Scalar,
    /// Modeled energy actually spent in this block over the run, mJ.
    pub in_app_mj: Scalar,
    /// single_exec × norm_n, mJ — comparable across blocks.
    pub normalized_mj: Scalar,
    /// Energy share per reporting class within this block, percent, in
    /// [`OpClass::ALL`] order.
    pub class_shares_pct: [Scalar; 8],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    /// Sorted by in-application energy, descending.
    pub by_in_app: Vec<BlockReportEntry>,
    /// Block ids sorted by single-execution cost, descending.
    pub by_single_exec: Vec<String>,
    pub norm_n: u64,
    pub total_dynamic_j: Scalar,
    /// Set when the run had partial block executions, making
    /// `single_exec × exec_count` an approximation of in-app energy.
    pub approximate: bool,
}

/// Per-block accounting over one full (no-ablation) run.
pub fn block_report(
    model: &EnergyModel,
    cfg: &ProgramCfg,
    run: &RunResult,
    norm_n: u64,
) -> BlockReport {
    let mut entries = Vec::new();
    let mut total_mj = 0.0;
    for (i, block) in cfg.blocks.iter().enumerate() {
        let single_uj = dense_cost_uj(model, &block.static_counts);
        let actual_uj = dense_cost_uj(model, &run.block_counts[i]);
        let shares = class_proportions_dense(model, &run.block_counts[i]);
        total_mj += actual_uj / 1000.0;
        entries.push(BlockReportEntry {
            id: block.id.clone(),
            exec_count: run.block_exec[i],
            single_exec_uj: single_uj,
            in_app_mj: actual_uj / 1000.0,
            normalized_mj: single_uj * norm_n as Scalar / 1000.0,
            class_shares_pct: shares,
        });
    }
    let mut by_single: Vec<(Scalar, String)> = entries
        .iter()
        .map(|e| (e.single_exec_uj, e.id.clone()))
        .collect();
    by_single.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    entries.sort_by(|a, b| {
        b.in_app_mj
            .partial_cmp(&a.in_app_mj)
            .unwrap()
            .then_with(|| a.id.cmp(&b.id))
    });
    BlockReport {
        by_in_app: entries,
        by_single_exec: by_single.into_iter().map(|(_, id)| id).collect(),
        norm_n,
        total_dynamic_j: total_mj / 1000.0,
        approximate: !run.exact_attribution,
    }
}

fn dense_cost_uj(model: &EnergyModel, counts: &[u64]) -> Scalar {
    let cat = catalog();
    let mut uj = 0.0;
    for (i, n) in counts.iter().enumerate() {
        if *n > 0 {
            if let Some(c) = model.cost_of(cat.name(OpId(i as u16))) {
                uj += c * *n as Scalar;
            }
        }
    }
    uj
}

/// Energy share of each of the eight classes within one count vector,
/// percentages in [`OpClass::ALL`] order. All zeros for a zero-energy
/// vector.
pub fn class_proportions(model: &EnergyModel, counts: &CountVector) -> [Scalar; 8] {
    let mut dense = vec![0u64; catalog().len()];
    for (op, n) in counts.iter_nonzero() {
        dense[op.index()] = n;
    }
    class_proportions_dense(model, &dense)
}

fn class_proportions_dense(model: &EnergyModel, counts: &[u64]) -> [Scalar; 8] {
    let cat = catalog();
    let mut per_class = [0.0; 8];
    for (i, n) in counts.iter().enumerate() {
        if *n > 0 {
            let op = OpId(i as u16);
            if let Some(c) = model.cost_of(cat.name(op)) {
                let class_idx = OpClass::ALL
                    .iter()
                    .position(|cl| *cl == cat.classify(op))
                    .unwrap();
                per_class[class_idx] += c * *n as Scalar;
            }
        }
    }
    let total: Scalar = per_class.iter().sum();
    if total > 0.0 {
        for s in &mut per_class {
            *s = 100.0 * *s / total;
        }
    }
    per_class
}

/// Total modeled dynamic energy of a run, in joules (accounting identity
/// anchor: equals the sum of block energies and the op-level sum).
pub fn total_dynamic_energy_j(model: &EnergyModel, aggregate: &CountVector) -> Scalar {
    model.dynamic_energy_j(aggregate)
}

/// Human-readable operation ranking table.
pub fn render_op_report(report: &OpReport, top: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<5} {:<28} {:<14} {:>12} {:>10} {:>12} {:>8}\n",
        "rank", "operation", "class", "unit µJ", "count", "in-app mJ", "share"
    ));
    for e in report.entries.iter().take(top) {
        out.push_str(&format!(
            "{:<5} {:<28} {:<14} {:>12.4} {:>10} {:>12.4} {:>7.2}%\n",
            e.rank,
            e.name,
            e.class.name(),
            e.unit_cost_uj,
            e.count,
            e.in_app_mj,
            e.share_pct
        ));
    }
    for b in &report.bands {
        out.push_str(&format!(
            "ranks {:>3}..{:<3} consume {:.1}% of dynamic energy\n",
            b.from_rank, b.to_rank, b.cumulative_share_pct
        ));
    }
    out.push_str(&format!(
        "total dynamic energy: {:.6} J (idle reported separately: {:.6} J)\n",
        report.total_dynamic_j, report.idle_j
    ));
    out
}

/// Human-readable block table (in-application order).
pub fn render_block_report(report: &BlockReport, top: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<44} {:>9} {:>13} {:>12} {:>14}\n",
        "block",
        "execs",
        "single µJ",
        "in-app mJ",
        format!("{}x mJ", report.norm_n)
    ));
    for e in report.by_in_app.iter().take(top) {
        out.push_str(&format!(
            "{:<44} {:>9} {:>13.4} {:>12.4} {:>14.4}\n",
            e.id, e.exec_count, e.single_exec_uj, e.in_app_mj, e.normalized_mj
        ));
    }
    out.push_str("class shares per block (");
    out.push_str(
        &OpClass::ALL
            .iter()
            .map(|c| c.abbrev())
            .collect::<Vec<_>>()
            .join(" "),
    );
    out.push_str("):\n");
    for e in report.by_in_app.iter().take(top) {
        let shares = e
            .class_shares_pct
            .iter()
            .map(|s| format!("{s:>5.1}%"))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!("{:<44} {shares}\n", e.id));
    }
    if report.approximate {
        out.push_str(
            "note: run had partial block executions; single-exec × count is approximate\n",
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn model_with(costs: &[(&str, Scalar)], idle: Scalar) -> EnergyModel {
        let cat = catalog();
        let mut op_costs_uj = BTreeMap::new();
        let mut libfunc_costs_uj = BTreeMap::new();
        for (name, c) in costs {
            if cat.entry(cat.find(name).unwrap()).kind == crate::ops::EntryKind::EnergyOp {
                op_costs_uj.insert(name.to_string(), *c);
            } else {
                libfunc_costs_uj.insert(name.to_string(), *c);
            }
        }
        EnergyModel {
            op_costs_uj,
            libfunc_costs_uj,
            idle_power_w: idle,
            merged_groups: Vec::new(),
            never_observed: Vec::new(),
        }
    }

    fn counts(entries: &[(&str, u64)]) -> CountVector {
        let cat = catalog();
        let mut v = CountVector::new();
        for (name, n) in entries {
            v.set(cat.find(name).unwrap(), *n);
        }
        v.duration_s = 1.0;
        v
    }

    #[test]
    fn single_op_gets_full_share() {
        let m = model_with(&[("And", 5.0)], 0.0);
        let r = rank_operations(&m, &counts(&[("And", 10)]), &[10]);
        assert_eq!(r.entries.len(), 1);
        assert!((r.entries[0].share_pct - 100.0).abs() < 1e-9);
    }

    #[test]
    fn goto_trio_shares_match_hand_arithmetic() {
        let m = model_with(
            &[
                ("BlockGoto_if", 6.7),
                ("BlockGoto_for", 4.1),
                ("BlockGoto_while", 1.1),
            ],
            0.0,
        );
        let v = counts(&[
            ("BlockGoto_if", 1),
            ("BlockGoto_for", 1),
            ("BlockGoto_while", 1),
        ]);
        let r = rank_operations(&m, &v, &[30]);
        assert_eq!(r.entries[0].name, "BlockGoto_if");
        assert_eq!(r.entries[1].name, "BlockGoto_for");
        assert_eq!(r.entries[2].name, "BlockGoto_while");
        // 6.7/11.9, 4.1/11.9, 1.1/11.9 → 56.3%, 34.5%, 9.2% (1 decimal)
        assert!((r.entries[0].share_pct - 56.3).abs() < 0.05);
        assert!((r.entries[1].share_pct - 34.5).abs() < 0.05);
        assert!((r.entries[2].share_pct - 9.2).abs() < 0.05);
        let total: Scalar = r.entries.iter().map(|e| e.share_pct).sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn ties_break_lexicographically() {
        let m = model_with(&[("And", 2.0), ("Or", 2.0), ("Not", 2.0)], 0.0);
        let r = rank_operations(&m, &counts(&[("Or", 1), ("And", 1), ("Not", 1)]), &[3]);
        let names: Vec<&str> = r.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, vec!["And", "Not", "Or"]);
    }

    #[test]
    fn normalization_reproduces_paper_arithmetic_exactly() {
        // 30.6 µJ × 3000 = 91.8 mJ, exact in f64
        let single_exec_uj: Scalar = 30.6;
        let normalized_mj = single_exec_uj * 3000.0 / 1000.0;
        assert_eq!(normalized_mj, 91.8);
    }

    #[test]
    fn class_proportions_sum_to_hundred() {
        let m = model_with(&[("Method_Invocation", 10.0), ("Assign_int_int", 5.0)], 0.0);
        let shares = class_proportions(
            &m,
            &counts(&[("Method_Invocation", 2), ("Assign_int_int", 4)]),
        );
        let total: Scalar = shares.iter().sum();
        assert!((total - 100.0).abs() < 1e-9);
        // equal energy: 20 µJ each → 50/50 between ControlOps and Assignments
        let cont = OpClass::ALL
            .iter()
            .position(|c| *c == OpClass::ControlOps)
            .unwrap();
        let assi = OpClass::ALL
            .iter()
            .position(|c| *c == OpClass::Assignments)
            .unwrap();
        assert!((shares[cont] - 50.0).abs() < 1e-9);
        assert!((shares[assi] - 50.0).abs() < 1e-9);
    }

    #[test]
    fn pure_control_block_is_all_control() {
        let m = model_with(&[("Method_Invocation", 10.0)], 0.0);
        let shares = class_proportions(&m, &counts(&[("Method_Invocation", 7)]));
        let cont = OpClass::ALL
            .iter()
            .position(|c| *c == OpClass::ControlOps)
            .unwrap();
        assert!((shares[cont] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn bands_partition_the_ranking() {
        let m = model_with(&[("And", 3.0), ("Or", 2.0), ("Not", 1.0)], 0.0);
        let r = rank_operations(&m, &counts(&[("And", 1), ("Or", 1), ("Not", 1)]), &[2, 3]);
        assert_eq!(r.bands.len(), 2);
        assert_eq!(r.bands[0].from_rank, 1);
        assert_eq!(r.bands[0].to_rank, 2);
        assert_eq!(r.bands[1].from_rank, 3);
        let total: Scalar = r.bands.iter().map(|b| b.cumulative_share_pct).sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn zero_execution_block_still_listed() {
        use crate::cfg::build_cfg;
        use crate::minilang::frontend;
        use crate::ops::build_plan;
        use crate::profiler::{run_case, ExecutionCase, DEFAULT_STEP_BUDGET};

        let tp = frontend(
            "class A { void main() { if (1 > 2) { print(0); } } }",
        )
        .unwrap();
        let plan = build_plan(&tp).unwrap();
        let cfg = build_cfg(&tp, &plan).unwrap();
        let case = ExecutionCase {
            case_id: "t".into(),
            inputs: vec![],
            ablated: vec![],
            duration_s: 1.0,
            seed: 1,
        };
        let run = run_case(&tp, &plan, &cfg, &case, DEFAULT_STEP_BUDGET).unwrap();
        let m = model_with(&[("IO.print", 4.0), ("Greater_int_int", 1.0), ("BlockGoto_if", 6.7)], 0.0);
        let report = block_report(&m, &cfg, &run, 3000);
        let then = report
            .by_in_app
            .iter()
            .find(|e| e.id == "A.main().if_1")
            .unwrap();
        assert_eq!(then.exec_count, 0);
        assert_eq!(then.in_app_mj, 0.0);
        assert!(then.single_exec_uj > 0.0, "still priced per execution");
        assert!(then.normalized_mj > 0.0);
    }
}
