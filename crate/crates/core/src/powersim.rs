//! Power-trace synthesis and ingestion, replacing the development board's
//! 30 Hz power monitor.
//!
//! A simulated trace spreads a case's total energy (idle power × duration
//! plus modeled dynamic energy) uniformly over `ceil(duration × rate)`
//! samples, then applies multiplicative Gaussian noise per sample. At zero
//! noise, [`integrate_energy`] inverts [`simulate_trace`] exactly.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ops::catalog;
use crate::profiler::CountVector;
use crate::{uj_to_j, Scalar};

pub const DEFAULT_SAMPLE_RATE_HZ: Scalar = 30.0;

/// Known per-operation costs used to synthesize traces (the simulator's
/// ground truth, standing in for real hardware).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthModel {
    /// µJ per execution, keyed by energy-op id.
    pub op_costs_uj: BTreeMap<String, Scalar>,
    /// µJ per call, keyed by qualified library-function id.
    pub libfunc_costs_uj: BTreeMap<String, Scalar>,
    pub idle_power_w: Scalar,
    /// Relative per-sample noise σ.
    pub noise_sigma_rel: Scalar,
}

impl GroundTruthModel {
    pub fn cost_of(&self, name: &str) -> Option<Scalar> {
        self.op_costs_uj
            .get(name)
            .or_else(|| self.libfunc_costs_uj.get(name))
            .copied()
    }

    /// Modeled dynamic energy of a count vector, in joules.
    pub fn dynamic_energy_j(&self, v: &CountVector) -> Result<Scalar, TraceError> {
        let cat = catalog();
        let mut uj = 0.0;
        for (op, n) in v.iter_nonzero() {
            let name = cat.name(op);
            let cost = self
                .cost_of(name)
                .ok_or_else(|| TraceError::UnknownOpId { name: name.to_string() })?;
            uj += cost * n as Scalar;
        }
        Ok(uj_to_j(uj))
    }
}

/// A power trace: samples in watts at a fixed rate starting at t = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTrace {
    pub sample_rate_hz: Scalar,
    pub samples: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceError {
    UnknownOpId { name: String },
    EmptyTrace,
    MalformedTrace { line: usize, message: String },
    NonMonotoneTime { line: usize },
}

impl std::fmt::Display for TraceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceError::UnknownOpId { name } => {
                write!(f, "count vector contains op `{name}` missing from the model")
            }
            TraceError::EmptyTrace => write!(f, "trace has no samples"),
            TraceError::MalformedTrace { line, message } => {
                write!(f, "trace line {line}: {message}")
            }
            TraceError::NonMonotoneTime { line } => {
                write!(f, "trace line {line}: timestamps must increase")
            }
        }
    }
}

impl std::error::Error for TraceError {}

/// Synthesize the power trace a meter would record for one case.
///
/// Sample count is `ceil(duration × rate)`; each sample is the case's mean
/// power scaled so the rectangle integral reproduces total energy exactly,
/// then perturbed by `(1 + ε)`, `ε ~ N(0, σ)`, and clamped at zero.
pub fn simulate_trace(
    model: &GroundTruthModel,
    counts: &CountVector,
    sample_rate_hz: Scalar,
    seed: u64,
) -> Result<PowerTrace, TraceError> {
    let duration = counts.duration_s;
    let n = (duration * sample_rate_hz).ceil() as usize;
    let n = n.max(1);
    let e_dyn = model.dynamic_energy_j(counts)?;
    let total_energy = model.idle_power_w * duration + e_dyn;
    // power such that n samples × (1/rate) integrate to exactly total_energy
    let sample_power = total_energy * sample_rate_hz / n as Scalar;
    let mut samples = vec![sample_power; n];
    if model.noise_sigma_rel > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, model.noise_sigma_rel).expect("valid sigma");
        for s in &mut samples {
            let eps: Scalar = normal.sample(&mut rng);
            *s = (*s * (1.0 + eps)).max(0.0);
        }
    }
    Ok(PowerTrace {
        sample_rate_hz,
        samples,
    })
}

/// Left-rectangle integration: Σ samples × Δt.
pub fn integrate_energy(trace: &PowerTrace) -> Result<Scalar, TraceError> {
    if trace.samples.is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let dt = 1.0 / trace.sample_rate_hz;
    Ok(trace.samples.iter().sum::<Scalar>() * dt)
}

/// Render a trace as `t_s,power_w` CSV (the same format [`parse_trace`]
/// reads back).
pub fn trace_to_csv(trace: &PowerTrace, meta: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str("t_s,power_w\n");
    let dt = 1.0 / trace.sample_rate_hz;
    for (i, p) in trace.samples.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i as Scalar * dt, p));
    }
    out
}

/// Parse an externally measured `t_s,power_w` CSV, resampling to the
/// declared rate by linear interpolation when the source timestamps do not
/// already sit on the sample grid.
pub fn parse_trace(text: &str, sample_rate_hz: Scalar) -> Result<PowerTrace, TraceError> {
    let mut points: Vec<(Scalar, Scalar)> = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "t_s,power_w" {
                return Err(TraceError::MalformedTrace {
                    line: lineno + 1,
                    message: format!("expected header `t_s,power_w`, found `{line}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let mut parts = line.split(',');
        let (Some(t), Some(p), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(TraceError::MalformedTrace {
                line: lineno + 1,
                message: "expected two comma-separated fields".to_string(),
            });
        };
        let t: Scalar = t.trim().parse().map_err(|_| TraceError::MalformedTrace {
            line: lineno + 1,
            message: format!("bad timestamp `{t}`"),
        })?;
        let p: Scalar = p.trim().parse().map_err(|_| TraceError::MalformedTrace {
            line: lineno + 1,
            message: format!("bad power `{p}`"),
        })?;
        if let Some((prev, _)) = points.last() {
            if t <= *prev {
                return Err(TraceError::NonMonotoneTime { line: lineno + 1 });
            }
        }
        points.push((t, p));
    }
    if !saw_header {
        return Err(TraceError::MalformedTrace {
            line: 1,
            message: "missing header `t_s,power_w`".to_string(),
        });
    }
    if points.is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let dt = 1.0 / sample_rate_hz;
    let t_end = points.last().unwrap().0;
    // grid points at k·dt for k·dt ≤ t_end (within rounding): a file written
    // by `trace_to_csv` reads back with the same sample count
    let n = (t_end / dt).round() as usize + 1;
    let mut samples = Vec::with_capacity(n);
    let mut seg = 0usize;
    for k in 0..n {
        let t = k as Scalar * dt;
        while seg + 1 < points.len() && points[seg + 1].0 < t {
            seg += 1;
        }
        let v = if t <= points[0].0 {
            points[0].1
        } else if t >= t_end {
            points[points.len() - 1].1
        } else {
            let (t0, p0) = points[seg];
            let (t1, p1) = points[seg + 1];
            p0 + (p1 - p0) * (t - t0) / (t1 - t0)
        };
        samples.push(v.max(0.0));
    }
    Ok(PowerTrace {
        sample_rate_hz,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idle_only(idle: Scalar, noise: Scalar) -> GroundTruthModel {
        GroundTruthModel {
            op_costs_uj: BTreeMap::new(),
            libfunc_costs_uj: BTreeMap::new(),
            idle_power_w: idle,
            noise_sigma_rel: noise,
        }
    }

    fn counts_with(duration: Scalar, op: &str, n: u64) -> CountVector {
        let mut v = CountVector::new();
        if n > 0 {
            v.set(catalog().find(op).unwrap(), n);
        }
        v.duration_s = duration;
        v
    }

    #[test]
    fn idle_one_watt_one_second_noiseless() {
        let trace = simulate_trace(&idle_only(1.0, 0.0), &counts_with(1.0, "And", 0), 30.0, 1)
            .unwrap();
        assert_eq!(trace.samples.len(), 30);
        for s in &trace.samples {
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert!((integrate_energy(&trace).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn four_ops_at_ten_microjoules_over_two_seconds() {
        let mut model = idle_only(1.0, 0.0);
        model.op_costs_uj.insert("And".to_string(), 10.0);
        let trace = simulate_trace(&model, &counts_with(2.0, "And", 4), 30.0, 1).unwrap();
        assert_eq!(trace.samples.len(), 60);
        let expect = 1.0 + 4.0 * 10.0e-6 / 2.0;
        for s in &trace.samples {
            assert!((s - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let model = idle_only(1.0, 0.01);
        let v = counts_with(1.5, "And", 0);
        let a = simulate_trace(&model, &v, 30.0, 42).unwrap();
        let b = simulate_trace(&model, &v, 30.0, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_trace(&model, &v, 30.0, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unknown_op_is_reported() {
        let model = idle_only(1.0, 0.0);
        let v = counts_with(1.0, "Multi_float_float", 3);
        assert!(matches!(
            simulate_trace(&model, &v, 30.0, 1),
            Err(TraceError::UnknownOpId { .. })
        ));
    }

    #[test]
    fn single_sample_integration() {
        let trace = PowerTrace {
            sample_rate_hz: 30.0,
            samples: vec![3.0],
        };
        assert!((integrate_energy(&trace).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn integrate_rejects_empty() {
        let trace = PowerTrace {
            sample_rate_hz: 30.0,
            samples: vec![],
        };
        assert!(matches!(integrate_energy(&trace), Err(TraceError::EmptyTrace)));
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let text = "t_s,power_w\n0,1.0\n0.0333,1.0\n";
        let trace = parse_trace(text, 30.0).unwrap();
        assert!(!trace.samples.is_empty());
        for s in &trace.samples {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            parse_trace("0,1.0\n", 30.0),
            Err(TraceError::MalformedTrace { .. })
        ));
        assert!(matches!(
            parse_trace("t_s,power_w\n0,1.0\n0.5,1.0\n0.25,1.0\n", 30.0),
            Err(TraceError::NonMonotoneTime { line: 4 })
        ));
    }

    #[test]
    fn simulated_trace_roundtrips_through_csv() {
        let model = idle_only(0.8, 0.0);
        let trace = simulate_trace(&model, &counts_with(1.3, "And", 0), 30.0, 1).unwrap();
        let text = trace_to_csv(&trace, &[("case".into(), "x".into())]);
        let back = parse_trace(&text, 30.0).unwrap();
        assert_eq!(back.samples.len(), trace.samples.len());
        let e1 = integrate_energy(&trace).unwrap();
        let e2 = integrate_energy(&back).unwrap();
        assert!((e1 - e2).abs() / e1 < 1e-9);
    }
}
