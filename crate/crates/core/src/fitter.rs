//! Regression recovery of per-operation energy costs from per-case counts
//! and measured energies.
//!
//! The design matrix has one row per case and one column per observed
//! catalog operation (plus a duration column when idle power is fitted).
//! Solving goes through the rank-revealing pivoted QR in [`crate::linalg`]
//! with column normalization — never normal equations. Collinear column
//! groups are merged into a representative before fitting and reported;
//! nonnegativity is enforced by clamping negative coefficients to zero and
//! refitting the remaining active set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{normalize_columns, Matrix, PivotedQr};
use crate::ops::{catalog, EntryKind, OpId};
use crate::profiler::CountVector;
use crate::{j_to_uj, Scalar};

/// How the idle baseline enters the regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IdleMode {
    /// Idle power measured separately: `idle × duration` is subtracted from
    /// each response.
    Known(Scalar),
    /// Append a duration column; its fitted coefficient is idle power in
    /// watts.
    Fit,
}

/// Assembled regression problem.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    /// One column per entry of `columns`, one row per case.
    pub matrix: Matrix<Scalar>,
    /// Responses in joules (idle-adjusted when mode is `Known`).
    pub response: Vec<Scalar>,
    pub columns: Vec<DesignColumn>,
    pub idle_mode: IdleMode,
    /// Catalog ops observed in no case at all.
    pub never_observed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesignColumn {
    Op(OpId),
    Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitError {
    LengthMismatch { counts: usize, energies: usize },
    NegativeEnergyAfterIdleSubtraction { case: usize, energy_j: Scalar },
    TooFewCases { cases: usize, needed: usize },
    RankDeficient { groups: Vec<Vec<String>>, condition: Scalar },
}

impl std::fmt::Display for FitError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitError::LengthMismatch { counts, energies } => {
                write!(f, "{counts} count vectors but {energies} energies")
            }
            FitError::NegativeEnergyAfterIdleSubtraction { case, energy_j } => write!(
                f,
                "case {case} has negative dynamic energy {energy_j} J after idle subtraction; idle power estimate is too high"
            ),
            FitError::TooFewCases { cases, needed } => {
                write!(f, "{cases} case(s) for {needed} unknowns; add execution cases")
            }
            FitError::RankDeficient { groups, condition } => write!(
                f,
                "design matrix is rank deficient after grouping (condition ~{condition:.3e}); add ablation cases that separate {}",
                groups
                    .iter()
                    .map(|g| g.join(" ~ "))
                    .collect::<Vec<_>>()
                    .join("; ")
            ),
        }
    }
}

impl std::error::Error for FitError {}

/// Fitted model: µJ per op, µJ per library call, idle power, merge notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    pub op_costs_uj: BTreeMap<String, Scalar>,
    pub libfunc_costs_uj: BTreeMap<String, Scalar>,
    pub idle_power_w: Scalar,
    /// Groups of ops fitted as one merged column (costs not separable from
    /// these cases alone); every member reports the shared cost.
    pub merged_groups: Vec<Vec<String>>,
    pub never_observed: Vec<String>,
}

impl EnergyModel {
    pub fn cost_of(&self, name: &str) -> Option<Scalar> {
        self.op_costs_uj
            .get(name)
            .or_else(|| self.libfunc_costs_uj.get(name))
            .copied()
    }

    /// Modeled dynamic energy of a count vector in joules; unknown ops cost
    /// zero (they are reported in `never_observed`).
    pub fn dynamic_energy_j(&self, v: &CountVector) -> Scalar {
        let cat = catalog();
        let mut uj = 0.0;
        for (op, n) in v.iter_nonzero() {
            if let Some(c) = self.cost_of(cat.name(op)) {
                uj += c * n as Scalar;
            }
        }
        crate::uj_to_j(uj)
    }
}

/// Fit quality report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub r_squared: Scalar,
    /// Per-case relative residuals |fit − measured| / measured.
    pub per_case_relative_residual: Vec<Scalar>,
    pub mape: Scalar,
    pub condition_number: Scalar,
    pub merged_groups: Vec<Vec<String>>,
    pub never_observed: Vec<String>,
    pub cases: usize,
    pub fitted_columns: usize,
}

/// Build the design matrix from per-case counts and measured energies.
pub fn assemble_design(
    counts: &[CountVector],
    energies_j: &[Scalar],
    idle: IdleMode,
) -> Result<DesignMatrix, FitError> {
    if counts.len() != energies_j.len() {
        return Err(FitError::LengthMismatch {
            counts: counts.len(),
            energies: energies_j.len(),
        });
    }
    let cat = catalog();
    let mut observed = vec![false; cat.len()];
    for v in counts {
        for (op, _) in v.iter_nonzero() {
            observed[op.index()] = true;
        }
    }
    let mut columns: Vec<DesignColumn> = observed
        .iter()
        .enumerate()
        .filter(|(_, o)| **o)
        .map(|(i, _)| DesignColumn::Op(OpId(i as u16)))
        .collect();
    let never_observed: Vec<String> = observed
        .iter()
        .enumerate()
        .filter(|(_, o)| !**o)
        .map(|(i, _)| cat.name(OpId(i as u16)).to_string())
        .collect();
    if matches!(idle, IdleMode::Fit) {
        columns.push(DesignColumn::Duration);
    }
    let mut matrix = Matrix::zeros(counts.len(), columns.len());
    for (r, v) in counts.iter().enumerate() {
        for (c, col) in columns.iter().enumerate() {
            let value = match col {
                DesignColumn::Op(op) => v.get(*op) as Scalar,
                DesignColumn::Duration => v.duration_s,
            };
            matrix.set(r, c, value);
        }
    }
    let response: Vec<Scalar> = match idle {
        IdleMode::Known(p_idle) => {
            let mut out = Vec::with_capacity(energies_j.len());
            for (i, (e, v)) in energies_j.iter().zip(counts).enumerate() {
                let adjusted = e - p_idle * v.duration_s;
                if adjusted < 0.0 {
                    return Err(FitError::NegativeEnergyAfterIdleSubtraction {
                        case: i,
                        energy_j: adjusted,
                    });
                }
                out.push(adjusted);
            }
            out
        }
        IdleMode::Fit => energies_j.to_vec(),
    };
    Ok(DesignMatrix {
        matrix,
        response,
        columns,
        idle_mode: idle,
        never_observed,
    })
}

/// Find groups of linearly dependent columns within `rel_tol`, via the
/// rank-revealing pivoted QR. Each dependent column is grouped with the
/// pivot column carrying the largest coefficient in its representation.
pub fn detect_collinear(d: &DesignMatrix, rel_tol: Scalar) -> Vec<Vec<usize>> {
    let (normalized, _) = normalize_columns(&d.matrix);
    let qr = PivotedQr::factor(&normalized, rel_tol);
    let n = d.matrix.cols();
    if qr.rank == n.min(d.matrix.rows()) && qr.rank == n {
        return Vec::new();
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for j in qr.rank..n.min(qr.perm.len()) {
        let coeffs = qr.dependent_representation(j);
        let Some((anchor_pos, _)) = coeffs
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
        else {
            continue;
        };
        let anchor = qr.perm[anchor_pos];
        let dependent = qr.perm[j];
        groups.entry(anchor).or_insert_with(|| vec![anchor]).push(dependent);
    }
    groups.into_values().collect()
}

fn column_name(d: &DesignMatrix, c: usize) -> String {
    match d.columns[c] {
        DesignColumn::Op(op) => catalog().name(op).to_string(),
        DesignColumn::Duration => "duration_s".to_string(),
    }
}

/// Least-squares fit of a design matrix.
///
/// Collinear groups are summed into their representative column first; if
/// `nonneg`, negative coefficients are clamped to zero and the remaining
/// active set refit until all coefficients are nonnegative.
pub fn fit(d: &DesignMatrix, nonneg: bool, rel_tol: Scalar) -> Result<(EnergyModel, FitReport), FitError> {
    let n_cols = d.matrix.cols();
    let groups = detect_collinear(d, rel_tol);
    // merged matrix: representative column = sum of its group
    let mut rep_of: BTreeMap<usize, usize> = BTreeMap::new();
    for g in &groups {
        for &m in &g[1..] {
            rep_of.insert(m, g[0]);
        }
    }
    let kept: Vec<usize> = (0..n_cols).filter(|c| !rep_of.contains_key(c)).collect();
    let mut merged = Matrix::zeros(d.matrix.rows(), kept.len());
    for r in 0..d.matrix.rows() {
        for (j, &c) in kept.iter().enumerate() {
            let mut v = d.matrix.get(r, c);
            for (m, rep) in &rep_of {
                if *rep == c {
                    v += d.matrix.get(r, *m);
                }
            }
            merged.set(r, j, v);
        }
    }
    if merged.rows() < kept.len() {
        return Err(FitError::TooFewCases {
            cases: merged.rows(),
            needed: kept.len(),
        });
    }
    let named_groups: Vec<Vec<String>> = groups
        .iter()
        .map(|g| g.iter().map(|c| column_name(d, *c)).collect())
        .collect();

    // solve on the merged, column-normalized system
    let solve = |mat: &Matrix<Scalar>, resp: &[Scalar]| -> Result<(Vec<Scalar>, Scalar), FitError> {
        let (normalized, scales) = normalize_columns(mat);
        let qr = PivotedQr::factor(&normalized, rel_tol);
        if qr.rank < mat.cols() {
            let cond = qr.condition_estimate();
            return Err(FitError::RankDeficient {
                groups: named_groups.clone(),
                condition: cond,
            });
        }
        let xs = qr.solve_ls(resp);
        let x: Vec<Scalar> = xs.iter().zip(&scales).map(|(v, s)| v / s).collect();
        Ok((x, qr.condition_estimate()))
    };

    let (mut coeffs, condition) = solve(&merged, &d.response)?;

    if nonneg {
        // clamp-and-refit: zero out negative coefficients, refit the rest
        let mut active: Vec<usize> = (0..kept.len()).collect();
        loop {
            let negatives: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&j| coeffs[j] < 0.0)
                .collect();
            if negatives.is_empty() {
                break;
            }
            for j in &negatives {
                coeffs[*j] = 0.0;
            }
            active.retain(|j| !negatives.contains(j));
            if active.is_empty() {
                break;
            }
            let sub = merged.select_columns(&active);
            let (sub_coeffs, _) = solve(&sub, &d.response)?;
            for (slot, &j) in active.iter().enumerate() {
                coeffs[j] = sub_coeffs[slot];
            }
        }
    }

    // scatter back to full column space (group members share the
    // representative's cost)
    let mut full = vec![0.0; n_cols];
    for (slot, &c) in kept.iter().enumerate() {
        full[c] = coeffs[slot];
    }
    for (m, rep) in &rep_of {
        let slot = kept.iter().position(|c| c == rep).expect("rep kept");
        full[*m] = coeffs[slot];
    }

    // report on the final model
    let fitted = {
        let mut out = vec![0.0; d.matrix.rows()];
        for (r, o) in out.iter_mut().enumerate() {
            // predictions use the merged model applied to original columns
            let mut acc = 0.0;
            for c in 0..n_cols {
                acc += d.matrix.get(r, c) * full[c];
            }
            *o = acc;
        }
        out
    };
    let report = build_report(d, &fitted, condition, named_groups.clone());

    let cat = catalog();
    let mut op_costs_uj = BTreeMap::new();
    let mut libfunc_costs_uj = BTreeMap::new();
    let mut idle_power_w = match d.idle_mode {
        IdleMode::Known(p) => p,
        IdleMode::Fit => 0.0,
    };
    for (c, col) in d.columns.iter().enumerate() {
        match col {
            DesignColumn::Op(op) => {
                let name = cat.name(*op).to_string();
                let uj = j_to_uj(full[c]);
                match cat.entry(*op).kind {
                    EntryKind::EnergyOp => {
                        op_costs_uj.insert(name, uj);
                    }
                    EntryKind::LibFunc(_) => {
                        libfunc_costs_uj.insert(name, uj);
                    }
                }
            }
            DesignColumn::Duration => idle_power_w = full[c],
        }
    }
    let model = EnergyModel {
        op_costs_uj,
        libfunc_costs_uj,
        idle_power_w,
        merged_groups: named_groups,
        never_observed: d.never_observed.clone(),
    };
    Ok((model, report))
}

fn build_report(
    d: &DesignMatrix,
    fitted: &[Scalar],
    condition: Scalar,
    merged_groups: Vec<Vec<String>>,
) -> FitReport {
    let n = d.response.len();
    let mean = d.response.iter().sum::<Scalar>() / n as Scalar;
    let ss_tot: Scalar = d.response.iter().map(|y| (y - mean) * (y - mean)).sum();
    let ss_res: Scalar = d
        .response
        .iter()
        .zip(fitted)
        .map(|(y, f)| (y - f) * (y - f))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    let rel: Vec<Scalar> = d
        .response
        .iter()
        .zip(fitted)
        .map(|(y, f)| {
            if *y == 0.0 {
                f.abs()
            } else {
                ((y - f) / y).abs()
            }
        })
        .collect();
    let mape = 100.0 * rel.iter().sum::<Scalar>() / n.max(1) as Scalar;
    FitReport {
        r_squared,
        per_case_relative_residual: rel,
        mape,
        condition_number: condition,
        merged_groups,
        never_observed: d.never_observed.clone(),
        cases: n,
        fitted_columns: d.columns.len(),
    }
}

/// Seeded k-fold cross validation; the report aggregates out-of-sample
/// relative errors (MAPE) across folds.
pub fn cross_validate(
    counts: &[CountVector],
    energies_j: &[Scalar],
    idle: IdleMode,
    nonneg: bool,
    rel_tol: Scalar,
    k_folds: usize,
    seed: u64,
) -> Result<FitReport, FitError> {
    if k_folds < 2 || counts.len() < k_folds {
        return Err(FitError::TooFewCases {
            cases: counts.len(),
            needed: k_folds.max(2),
        });
    }
    let mut order: Vec<usize> = (0..counts.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut rel_all = Vec::new();
    let mut worst_condition: Scalar = 0.0;
    let mut merged = Vec::new();
    for fold in 0..k_folds {
        let test: Vec<usize> = order
            .iter()
            .copied()
            .skip(fold)
            .step_by(k_folds)
            .collect();
        let train: Vec<usize> = order
            .iter()
            .copied()
            .filter(|i| !test.contains(i))
            .collect();
        let train_counts: Vec<CountVector> = train.iter().map(|&i| counts[i].clone()).collect();
        let train_energies: Vec<Scalar> = train.iter().map(|&i| energies_j[i]).collect();
        let d = assemble_design(&train_counts, &train_energies, idle)?;
        let (model, report) = fit(&d, nonneg, rel_tol)?;
        worst_condition = worst_condition.max(report.condition_number);
        merged = report.merged_groups.clone();
        for &i in &test {
            let idle_j = match idle {
                IdleMode::Known(p) => p * counts[i].duration_s,
                IdleMode::Fit => model.idle_power_w * counts[i].duration_s,
            };
            let predicted = model.dynamic_energy_j(&counts[i]) + idle_j;
            let actual = energies_j[i];
            let rel = if actual == 0.0 {
                predicted.abs()
            } else {
                ((actual - predicted) / actual).abs()
            };
            rel_all.push(rel);
        }
    }
    let mape = 100.0 * rel_all.iter().sum::<Scalar>() / rel_all.len().max(1) as Scalar;
    Ok(FitReport {
        r_squared: Scalar::NAN,
        per_case_relative_residual: rel_all,
        mape,
        condition_number: worst_condition,
        merged_groups: merged,
        never_observed: Vec::new(),
        cases: counts.len(),
        fitted_columns: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(entries: &[(&str, u64)], duration: Scalar) -> CountVector {
        let cat = catalog();
        let mut v = CountVector::new();
        for (name, n) in entries {
            v.set(cat.find(name).unwrap(), *n);
        }
        v.duration_s = duration;
        v
    }

    #[test]
    fn assemble_subtracts_known_idle() {
        let counts = vec![cv(&[("And", 4)], 2.0)];
        let d = assemble_design(&counts, &[2.00004], IdleMode::Known(1.0)).unwrap();
        assert_eq!(d.matrix.cols(), 1);
        assert_eq!(d.matrix.get(0, 0), 4.0);
        assert!((d.response[0] - 4.0e-5).abs() < 1e-12);
    }

    #[test]
    fn assemble_adds_duration_column_in_fit_mode() {
        let counts = vec![cv(&[("And", 4)], 2.0)];
        let d = assemble_design(&counts, &[2.00004], IdleMode::Fit).unwrap();
        assert_eq!(d.matrix.cols(), 2);
        assert_eq!(d.matrix.get(0, 1), 2.0);
    }

    #[test]
    fn negative_energy_after_idle_subtraction_is_an_error() {
        let counts = vec![cv(&[("And", 4)], 2.0)];
        let err = assemble_design(&counts, &[1.9], IdleMode::Known(1.0)).unwrap_err();
        assert!(matches!(
            err,
            FitError::NegativeEnergyAfterIdleSubtraction { case: 0, .. }
        ));
    }

    #[test]
    fn exact_two_by_two_recovery() {
        let counts = vec![
            cv(&[("And", 2), ("Or", 1)], 1.0),
            cv(&[("And", 1), ("Or", 1)], 1.0),
        ];
        let d = assemble_design(&counts, &[5.0e-6, 3.0e-6], IdleMode::Known(0.0)).unwrap();
        let (model, report) = fit(&d, false, 1e-10).unwrap();
        assert!((model.op_costs_uj["And"] - 2.0).abs() < 1e-9);
        assert!((model.op_costs_uj["Or"] - 1.0).abs() < 1e-9);
        assert!((report.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duplicate_columns_merge_into_one_group() {
        // And and Or always co-occur 1:1 → one merged group of two
        let counts = vec![
            cv(&[("And", 1), ("Or", 1)], 1.0),
            cv(&[("And", 2), ("Or", 2)], 1.0),
            cv(&[("And", 3), ("Or", 3)], 1.0),
        ];
        let d = assemble_design(&counts, &[3.0e-6, 6.0e-6, 9.0e-6], IdleMode::Known(0.0)).unwrap();
        let groups = detect_collinear(&d, 1e-10);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].len(), 2);
        let (model, report) = fit(&d, false, 1e-10).unwrap();
        assert_eq!(report.merged_groups.len(), 1);
        // merged column counts 2 per case: the shared cost is 1.5 µJ
        assert!((model.op_costs_uj["And"] - 1.5).abs() < 1e-9);
        assert!((model.op_costs_uj["Or"] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn full_rank_matrix_has_no_groups() {
        let counts = vec![
            cv(&[("And", 1)], 1.0),
            cv(&[("Or", 2)], 1.0),
            cv(&[("And", 1), ("Or", 1)], 1.0),
        ];
        let d = assemble_design(&counts, &[1.0e-6, 2.0e-6, 2.0e-6], IdleMode::Known(0.0)).unwrap();
        assert!(detect_collinear(&d, 1e-10).is_empty());
    }

    #[test]
    fn never_observed_ops_are_flagged_not_fitted() {
        let counts = vec![cv(&[("And", 1)], 1.0), cv(&[("And", 2)], 1.0)];
        let d = assemble_design(&counts, &[1.0e-6, 2.0e-6], IdleMode::Known(0.0)).unwrap();
        assert_eq!(d.matrix.cols(), 1);
        assert!(d.never_observed.iter().any(|n| n == "Or"));
        let (model, _) = fit(&d, false, 1e-10).unwrap();
        assert!(model.cost_of("Or").is_none());
        assert!(model.never_observed.iter().any(|n| n == "Or"));
    }

    #[test]
    fn nonneg_clamps_and_refits() {
        // responses generated from costs [2, -1] µJ on a coupled design
        let counts = vec![
            cv(&[("And", 1), ("Or", 1)], 1.0),
            cv(&[("And", 1), ("Or", 2)], 1.0),
        ];
        // y = 2*And − 1*Or  (µJ→J)
        let energies = [1.0e-6, 0.0];
        let d = assemble_design(&counts, &energies, IdleMode::Known(0.0)).unwrap();
        let (unconstrained, _) = fit(&d, false, 1e-10).unwrap();
        assert!((unconstrained.op_costs_uj["And"] - 2.0).abs() < 1e-8);
        assert!((unconstrained.op_costs_uj["Or"] + 1.0).abs() < 1e-8);
        let (clamped, _) = fit(&d, true, 1e-10).unwrap();
        assert_eq!(clamped.op_costs_uj["Or"], 0.0);
        // refit on And alone: columns [1,1], responses [1e-6, 0] → 0.5e-6
        assert!((clamped.op_costs_uj["And"] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn scale_equivariance() {
        let counts = vec![
            cv(&[("And", 2), ("Or", 1)], 1.0),
            cv(&[("And", 1), ("Or", 1)], 1.0),
        ];
        let d1 = assemble_design(&counts, &[5.0e-6, 3.0e-6], IdleMode::Known(0.0)).unwrap();
        let d2 = assemble_design(&counts, &[5.0e-5, 3.0e-5], IdleMode::Known(0.0)).unwrap();
        let (m1, _) = fit(&d1, false, 1e-10).unwrap();
        let (m2, _) = fit(&d2, false, 1e-10).unwrap();
        assert!((m2.op_costs_uj["And"] - 10.0 * m1.op_costs_uj["And"]).abs() < 1e-8);
        assert!((m2.op_costs_uj["Or"] - 10.0 * m1.op_costs_uj["Or"]).abs() < 1e-8);
    }

    #[test]
    fn permutation_invariance() {
        let counts = vec![
            cv(&[("And", 2), ("Or", 1)], 1.0),
            cv(&[("And", 1), ("Or", 1)], 1.0),
            cv(&[("And", 5), ("Or", 2)], 1.0),
        ];
        let energies = [5.0e-6, 3.0e-6, 12.0e-6];
        let d1 = assemble_design(&counts, &energies, IdleMode::Known(0.0)).unwrap();
        let rev_counts: Vec<CountVector> = counts.iter().rev().cloned().collect();
        let rev_energies: Vec<Scalar> = energies.iter().rev().copied().collect();
        let d2 = assemble_design(&rev_counts, &rev_energies, IdleMode::Known(0.0)).unwrap();
        let (m1, _) = fit(&d1, false, 1e-10).unwrap();
        let (m2, _) = fit(&d2, false, 1e-10).unwrap();
        for (name, c1) in &m1.op_costs_uj {
            let c2 = m2.op_costs_uj[name];
            assert!((c1 - c2).abs() < 1e-9, "{name}: {c1} vs {c2}");
        }
    }

    #[test]
    fn idle_fit_mode_recovers_idle_power() {
        let counts = vec![
            cv(&[("And", 10)], 1.0),
            cv(&[("And", 20)], 2.0),
            cv(&[("And", 5)], 1.5),
        ];
        // energy = 0.5 W × duration + 3 µJ × n
        let energies: Vec<Scalar> = counts
            .iter()
            .map(|v| 0.5 * v.duration_s + 3.0e-6 * v.get(catalog().find("And").unwrap()) as Scalar)
            .collect();
        let d = assemble_design(&counts, &energies, IdleMode::Fit).unwrap();
        let (model, _) = fit(&d, false, 1e-10).unwrap();
        assert!((model.idle_power_w - 0.5).abs() < 1e-9);
        assert!((model.op_costs_uj["And"] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn cross_validate_perfect_data_has_tiny_mape() {
        let mut counts = Vec::new();
        let mut energies = Vec::new();
        for i in 1..=10u64 {
            counts.push(cv(&[("And", i), ("Or", 2 * i % 7 + 1)], 1.0));
            let e = 2.0e-6 * i as Scalar
                + 1.0e-6 * ((2 * i % 7 + 1) as Scalar);
            energies.push(e);
        }
        let report = cross_validate(
            &counts,
            &energies,
            IdleMode::Known(0.0),
            false,
            1e-10,
            5,
            42,
        )
        .unwrap();
        assert!(report.mape < 1e-7, "mape = {}", report.mape);
    }

    #[test]
    fn cross_validate_needs_enough_cases() {
        let counts = vec![cv(&[("And", 1)], 1.0), cv(&[("And", 2)], 1.0)];
        let err = cross_validate(
            &counts,
            &[1.0e-6, 2.0e-6],
            IdleMode::Known(0.0),
            false,
            1e-10,
            5,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, FitError::TooFewCases { .. }));
    }

    #[test]
    fn rank_deficient_when_cases_never_separate_ops() {
        // three ops, but only two independent case shapes and constant ratio
        // between Or and Not
        let counts = vec![
            cv(&[("And", 1), ("Or", 1), ("Not", 2)], 1.0),
            cv(&[("And", 2), ("Or", 1), ("Not", 2)], 1.0),
            cv(&[("And", 3), ("Or", 2), ("Not", 4)], 1.0),
        ];
        let d = assemble_design(
            &counts,
            &[4.0e-6, 6.0e-6, 9.0e-6],
            IdleMode::Known(0.0),
        )
        .unwrap();
        // Or and Not merge; fit succeeds on the merged system
        let (model, report) = fit(&d, false, 1e-10).unwrap();
        assert_eq!(report.merged_groups.len(), 1);
        assert!(model.cost_of("Or").is_some());
    }
}
