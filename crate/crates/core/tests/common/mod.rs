#![allow(dead_code)]

use std::f64::consts::PI;

use lsip_rescale::oracle::{CallbackOracle, Separation, Witness, WitnessedColumn};
use lsip_rescale::solver::{ConvexCombination, Elimination, SolveObserver, StepRecord};

/// `a_t = (cos t, sin t)` for `t ∈ (0, π]` (`closed_at_pi`) or `t ∈ (0, π)`.
///
/// The query returns the minimizer of `a_tᵀy` when it lies in the index set.
/// Otherwise it tries the included endpoint and then points creeping towards
/// the open ends, `2⁻ᵏπ/2` and `π − 2⁻ᵏπ/2`.
pub fn arc_oracle(closed_at_pi: bool) -> CallbackOracle {
    let in_set = move |t: f64| t > 0.0 && (t < PI || (closed_at_pi && t == PI));
    let query = move |y: &[f64]| {
        let f = |t: f64| t.cos() * y[0] + t.sin() * y[1];
        let hit = |t: f64| {
            Separation::Violated(WitnessedColumn {
                witness: Witness::Custom { label: t.to_string(), column: vec![t.cos(), t.sin()] },
                column: vec![t.cos(), t.sin()],
            })
        };
        if y[0] == 0.0 && y[1] == 0.0 {
            return hit(PI / 2.0);
        }
        let mut phi = y[1].atan2(y[0]) + PI;
        if phi > PI {
            phi -= 2.0 * PI;
        }
        if in_set(phi) && f(phi) <= 0.0 {
            return hit(phi);
        }
        if closed_at_pi && f(PI) <= 0.0 {
            return hit(PI);
        }
        let mut d = PI / 2.0;
        while d > 0.0 {
            for t in [d, PI - d] {
                if in_set(t) && f(t) <= 0.0 {
                    return hit(t);
                }
            }
            d /= 2.0;
        }
        Separation::Interior
    };
    CallbackOracle::new(2, query).with_resolver(move |label| {
        let t: f64 = label.parse().ok()?;
        in_set(t).then(|| vec![t.cos(), t.sin()])
    })
}

/// Violations found by [`Recorder`].
#[derive(Debug, Default)]
pub struct Recorder {
    pub m: usize,
    pub basic_calls: usize,
    pub steps: usize,
    pub eliminations: usize,
    pub max_iterations: usize,
    pub bound_violations: Vec<String>,
    pub potential_violations: Vec<String>,
    pub elimination_violations: Vec<String>,
    pub worst_gain: f64,
    pub worst_g_residual: f64,
}

impl Recorder {
    pub fn new(m: usize) -> Self {
        Recorder { m, worst_gain: f64::INFINITY, ..Recorder::default() }
    }

    /// `⌈3m(m+1)²⌉`, the iteration bound at `μ = 1/√(3m)`.
    pub fn iteration_limit(&self) -> usize {
        3 * self.m * (self.m + 1) * (self.m + 1)
    }
}

impl SolveObserver for Recorder {
    fn on_step(&mut self, step: &StepRecord) {
        self.steps += 1;
        let gain = 1.0 / (step.z_new_norm * step.z_new_norm) - 1.0 / (step.z_old_norm * step.z_old_norm);
        self.worst_gain = self.worst_gain.min(gain);
        if !(gain >= 1.0 - 1e-9) {
            self.potential_violations.push(format!("gain {gain} at step {}", self.steps));
        }
    }

    fn on_elimination(&mut self, c: &ConvexCombination, kind: Elimination) {
        self.eliminations += 1;
        let mut bad = Vec::new();
        if c.min_weight() < -1e-12 {
            bad.push(format!("min weight {}", c.min_weight()));
        }
        if (c.weight_sum() - 1.0).abs() > 1e-10 {
            bad.push(format!("weight sum {}", c.weight_sum()));
        }
        if c.combination_residual() > 1e-10 {
            bad.push(format!("combination residual {}", c.combination_residual()));
        }
        if c.len() > self.m + 1 {
            bad.push(format!("{} active members", c.len()));
        }
        if let Some(r) = c.g_residual() {
            self.worst_g_residual = self.worst_g_residual.max(r);
            if r > 1e-8 {
                bad.push(format!("inverse residual {r}"));
            }
        }
        if !bad.is_empty() {
            self.elimination_violations.push(format!("{kind:?}: {}", bad.join(", ")));
        }
    }

    fn on_basic_end(&mut self, iterations: usize, _bound: usize) {
        self.basic_calls += 1;
        self.max_iterations = self.max_iterations.max(iterations);
        if iterations > self.iteration_limit() {
            self.bound_violations.push(format!("{iterations} > {}", self.iteration_limit()));
        }
    }
}
