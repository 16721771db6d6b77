//! Execution cases: input sequence + ablated block set + session duration.
//!
//! Case files are JSON Lines, one case per line. Generation is seeded and
//! deterministic; every ablatable block is ablated in at least one case and
//! at least one case ablates nothing (the "In Application" run).

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cfg::ProgramCfg;

/// One input event consumed by `readInput()` / `readInputFloat()`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputEvent {
    Int(i32),
    Float(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionCase {
    pub case_id: String,
    pub inputs: Vec<InputEvent>,
    /// Block ids ablated in this case; all must be ablatable.
    pub ablated: Vec<String>,
    pub duration_s: f64,
    /// Seed for the in-language `Math.random`.
    pub seed: u64,
}

/// Shape of generated input sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputTemplate {
    pub min_events: usize,
    pub max_events: usize,
    pub int_lo: i32,
    pub int_hi: i32,
    pub float_lo: f64,
    pub float_hi: f64,
    /// Probability that an event is a float token.
    pub float_prob: f64,
}

impl Default for InputTemplate {
    fn default() -> Self {
        InputTemplate {
            min_events: 3,
            max_events: 10,
            int_lo: 0,
            int_hi: 100,
            float_lo: 0.0,
            float_hi: 1.0,
            float_prob: 0.25,
        }
    }
}

/// Session-duration model: base seconds plus a per-input-event increment,
/// standing in for input-sequence-driven session lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationModel {
    pub base_s: f64,
    pub per_event_s: f64,
}

impl Default for DurationModel {
    fn default() -> Self {
        DurationModel {
            base_s: 1.0,
            per_event_s: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CaseGenError {
    /// Coverage of every ablatable block plus one full run cannot fit in
    /// the requested number of cases.
    CoverageImpossible { requested: usize, needed: usize },
}

impl std::fmt::Display for CaseGenError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseGenError::CoverageImpossible { requested, needed } => write!(
                f,
                "cannot cover every ablatable block with {requested} case(s); at least {needed} needed (one full run plus ablation cases)"
            ),
        }
    }
}

impl std::error::Error for CaseGenError {}

/// Generate `n` execution cases for a program's CFG.
///
/// Case 0 ablates nothing. Later cases ablate each ablatable block with
/// probability 1/2; any block never drawn is then forced into one of them,
/// so coverage holds deterministically for a fixed seed.
pub fn generate_cases(
    cfg: &ProgramCfg,
    template: &InputTemplate,
    duration: &DurationModel,
    n: usize,
    seed: u64,
) -> Result<Vec<ExecutionCase>, CaseGenError> {
    let ablatable: Vec<&str> = cfg
        .blocks
        .iter()
        .filter(|b| b.ablatable)
        .map(|b| b.id.as_str())
        .collect();
    let needed = if ablatable.is_empty() { 1 } else { 2 };
    if n < needed {
        return Err(CaseGenError::CoverageImpossible {
            requested: n,
            needed,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(n);
    for i in 0..n {
        let len = rng.gen_range(template.min_events..=template.max_events.max(template.min_events));
        let mut inputs = Vec::with_capacity(len);
        for _ in 0..len {
            if rng.gen_bool(template.float_prob.clamp(0.0, 1.0)) {
                inputs.push(InputEvent::Float(
                    rng.gen_range(template.float_lo..=template.float_hi),
                ));
            } else {
                inputs.push(InputEvent::Int(rng.gen_range(template.int_lo..=template.int_hi)));
            }
        }
        let mut ablated: Vec<String> = Vec::new();
        if i > 0 {
            for b in &ablatable {
                if rng.gen_bool(0.5) {
                    ablated.push((*b).to_string());
                }
            }
        }
        let duration_s = duration.base_s + duration.per_event_s * inputs.len() as f64;
        cases.push(ExecutionCase {
            case_id: format!("case_{i:03}"),
            inputs,
            ablated,
            duration_s,
            seed: rng.next_u64(),
        });
    }
    // force coverage for any block the coin flips missed
    for b in &ablatable {
        if !cases.iter().any(|c| c.ablated.iter().any(|a| a == b)) {
            let slot = 1 + (rng.next_u64() as usize) % (n - 1);
            cases[slot].ablated.push((*b).to_string());
        }
    }
    for c in &mut cases {
        c.ablated.sort_unstable();
        c.ablated.dedup();
    }
    Ok(cases)
}

/// Serialize cases as JSON Lines, with `#` metadata comment lines.
pub fn cases_to_jsonl(cases: &[ExecutionCase], meta: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k}={v}\n"));
    }
    for c in cases {
        out.push_str(&serde_json::to_string(c).expect("case serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug)]
pub enum CaseFileError {
    BadLine { line: usize, error: serde_json::Error },
}

impl std::fmt::Display for CaseFileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseFileError::BadLine { line, error } => {
                write!(f, "case file line {line}: {error}")
            }
        }
    }
}

impl std::error::Error for CaseFileError {}

pub fn cases_from_jsonl(text: &str) -> Result<Vec<ExecutionCase>, CaseFileError> {
    let mut cases = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        cases.push(
            serde_json::from_str(line).map_err(|error| CaseFileError::BadLine {
                line: i + 1,
                error,
            })?,
        );
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::frontend;
    use crate::ops::build_plan;

    fn demo_cfg() -> ProgramCfg {
        let tp = frontend(
            r#"
class A {
    void main() {
        int n = readInput();
        if (n > 1) { print(1); }
        if (n > 2) { print(2); } else { print(3); }
        for (int i = 0; i < n; i++) { print(i); }
        if (n > 4) { print(4); }
        if (n > 5) { print(5); }
    }
}
"#,
        )
        .unwrap();
        let plan = build_plan(&tp).unwrap();
        crate::cfg::build_cfg(&tp, &plan).unwrap()
    }

    #[test]
    fn every_ablatable_block_is_covered() {
        let cfg = demo_cfg();
        let ablatable: Vec<&str> = cfg
            .blocks
            .iter()
            .filter(|b| b.ablatable)
            .map(|b| b.id.as_str())
            .collect();
        assert!(ablatable.len() >= 5);
        let cases = generate_cases(
            &cfg,
            &InputTemplate::default(),
            &DurationModel::default(),
            6,
            7,
        )
        .unwrap();
        assert!(cases[0].ablated.is_empty(), "first case is the full run");
        for b in ablatable {
            assert!(
                cases.iter().any(|c| c.ablated.iter().any(|a| a == b)),
                "block {b} never ablated"
            );
        }
    }

    #[test]
    fn one_case_cannot_cover_ablation() {
        let cfg = demo_cfg();
        let err = generate_cases(
            &cfg,
            &InputTemplate::default(),
            &DurationModel::default(),
            1,
            7,
        )
        .unwrap_err();
        assert!(matches!(err, CaseGenError::CoverageImpossible { needed: 2, .. }));
    }

    #[test]
    fn same_seed_gives_identical_case_files() {
        let cfg = demo_cfg();
        let t = InputTemplate::default();
        let d = DurationModel::default();
        let a = cases_to_jsonl(&generate_cases(&cfg, &t, &d, 8, 99).unwrap(), &[]);
        let b = cases_to_jsonl(&generate_cases(&cfg, &t, &d, 8, 99).unwrap(), &[]);
        assert_eq!(a, b);
        let c = cases_to_jsonl(&generate_cases(&cfg, &t, &d, 8, 100).unwrap(), &[]);
        assert_ne!(a, c);
    }

    #[test]
    fn jsonl_roundtrip() {
        let cfg = demo_cfg();
        let cases = generate_cases(
            &cfg,
            &InputTemplate::default(),
            &DurationModel::default(),
            4,
            1,
        )
        .unwrap();
        let text = cases_to_jsonl(&cases, &[("v".into(), "1".into())]);
        let back = cases_from_jsonl(&text).unwrap();
        assert_eq!(cases, back);
    }

    #[test]
    fn durations_follow_the_model() {
        let cfg = demo_cfg();
        let cases = generate_cases(
            &cfg,
            &InputTemplate::default(),
            &DurationModel {
                base_s: 1.0,
                per_event_s: 0.1,
            },
            4,
            1,
        )
        .unwrap();
        for c in &cases {
            let expect = 1.0 + 0.1 * c.inputs.len() as f64;
            assert!((c.duration_s - expect).abs() < 1e-12);
        }
    }
}
