//! Projection and rescaling.
//!
//! The basic procedure is a von Neumann scheme on the normalized columns
//! `ã_t = Mᵀa_t / ‖Mᵀa_t‖`: it keeps a convex combination `z̃ = Σ x_t ã_t` of
//! at most `m+1` columns, asks the oracle about `M z̃`, and moves `z̃` to the
//! point of minimum norm on the segment towards the returned column. Each step
//! raises `1/‖z̃‖²` by at least one, so after `(m+1)²/μ²` steps either a
//! feasible point, an exact zero combination, or a short aggregate
//! `‖z̃‖ ≤ μ/(m+1)` has been found.
//!
//! The main algorithm turns a short aggregate into the rescaling
//! `D = I − ½ããᵀ` along its heaviest column. Every rescaling shrinks the
//! volume measure of the bounded feasible region by at least `√e/2`, which
//! bounds the number of rounds by [`rescale_budget`].

use std::time::{Duration, Instant};

use log::{debug, trace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify;
use crate::linalg::{self, LinalgError, Matrix};
use crate::oracle::{OracleError, Separation, SeparationOracle, Witness, WitnessedColumn};

/// `‖z̃‖` at or below which the basic procedure tries to return a dual certificate.
pub const TAU_ZERO: f64 = 1e-12;
/// Weights below this are dropped after elimination.
pub const WEIGHT_FLOOR: f64 = 1e-15;
/// Accepted `‖G[Ã;𝟙ᵀ] − I‖_∞` for the stored inverse.
pub const G_RESIDUAL_TOL: f64 = 1e-8;
/// Residual of `[Ã;𝟙ᵀ]x = (z̃;1)` below which refinement is skipped.
pub const REFINE_THRESHOLD: f64 = 1e-15;
/// Largest accepted `|Σx − 1|` and `‖Σ x ã − z̃‖` after an elimination.
pub const INVARIANT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("oracle separation violates aᵀy ≤ 0 in the scaled system (value {value:e})")]
    OracleContractViolation { value: f64 },
    #[error("scaled column has norm {norm:e}")]
    DegenerateColumn { norm: f64 },
    #[error("step endpoints coincide")]
    CoincidentPoints,
    #[error("basic procedure ran {iterations} iterations, bound is {bound}")]
    IterationBoundViolated { iterations: usize, bound: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

// ---------------------------------------------------------------------------
// Rescaling state

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    Dense,
    Factored,
    /// Factored while the number of rescalings is at most the switch
    /// threshold (default `m`), dense afterwards.
    #[default]
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
enum Scaling {
    Dense(Matrix),
    /// `M = D₁ D₂ ⋯ D_s` stored as the unit vectors defining each `D`.
    Factored(Vec<Vec<f64>>),
}

/// The accumulated scaling matrix `M_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescalingState {
    m: usize,
    repr: Scaling,
    count: usize,
    switch_after: Option<usize>,
}

impl RescalingState {
    pub fn identity(m: usize, mode: ScalingMode) -> Self {
        Self::with_threshold(m, mode, m)
    }

    pub fn with_threshold(m: usize, mode: ScalingMode, threshold: usize) -> Self {
        let (repr, switch_after) = match mode {
            ScalingMode::Dense => (Scaling::Dense(Matrix::identity(m)), None),
            ScalingMode::Factored => (Scaling::Factored(Vec::new()), None),
            ScalingMode::Auto => (Scaling::Factored(Vec::new()), Some(threshold)),
        };
        RescalingState { m, repr, count: 0, switch_after }
    }

    /// An arbitrary invertible dense scaling.
    pub fn from_dense(matrix: Matrix) -> Self {
        assert!(matrix.is_square());
        RescalingState { m: matrix.rows(), repr: Scaling::Dense(matrix), count: 0, switch_after: None }
    }

    /// `M = D(u₁) ⋯ D(u_s)` in factored form.
    pub fn from_factors(m: usize, units: Vec<Vec<f64>>) -> Self {
        let count = units.len();
        RescalingState { m, repr: Scaling::Factored(units), count, switch_after: None }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn rescalings(&self) -> usize {
        self.count
    }

    pub fn is_factored(&self) -> bool {
        matches!(self.repr, Scaling::Factored(_))
    }

    /// `M z`
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        match &self.repr {
            Scaling::Dense(mat) => mat.mul_vec(z),
            Scaling::Factored(units) => {
                let mut out = z.to_vec();
                for u in units.iter().rev() {
                    apply_rescale(u, &mut out);
                }
                out
            }
        }
    }

    /// `Mᵀ a`
    pub fn apply_transpose(&self, a: &[f64]) -> Vec<f64> {
        match &self.repr {
            Scaling::Dense(mat) => mat.tr_mul_vec(a),
            Scaling::Factored(units) => {
                let mut out = a.to_vec();
                for u in units {
                    apply_rescale(u, &mut out);
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match &self.repr {
            Scaling::Dense(mat) => mat.clone(),
            Scaling::Factored(units) => {
                let mut mat = Matrix::identity(self.m);
                for u in units {
                    right_multiply_rescale(&mut mat, u);
                }
                mat
            }
        }
    }

    /// `M ← M D(unit)`
    pub fn push(&mut self, unit: &[f64]) {
        assert_eq!(unit.len(), self.m);
        match &mut self.repr {
            Scaling::Dense(mat) => right_multiply_rescale(mat, unit),
            Scaling::Factored(units) => units.push(unit.to_vec()),
        }
        self.count += 1;
        if let (Some(limit), Scaling::Factored(_)) = (self.switch_after, &self.repr) {
            if self.count > limit {
                debug!("materializing dense scaling after {} rescalings", self.count);
                self.repr = Scaling::Dense(self.to_dense());
            }
        }
    }
}

/// `x ← x − ½ u (uᵀx)`
fn apply_rescale(u: &[f64], x: &mut [f64]) {
    let c = -0.5 * linalg::dot(u, x);
    linalg::axpy(c, u, x);
}

/// `M ← M − ½ (M u) uᵀ`
fn right_multiply_rescale(mat: &mut Matrix, u: &[f64]) {
    let mu = mat.mul_vec(u);
    for (i, mui) in mu.iter().enumerate() {
        for (j, uj) in u.iter().enumerate() {
            mat[(i, j)] -= 0.5 * mui * uj;
        }
    }
}

/// `M z` for either representation.
pub fn apply_scaling(scaling: &RescalingState, z: &[f64]) -> Vec<f64> {
    scaling.apply(z)
}

/// `D = I − ½ ããᵀ` for unit `ã`; `det D = ½`, `D⁻¹ = I + ããᵀ`.
pub fn rescale_matrix(unit: &[f64]) -> Matrix {
    let m = unit.len();
    let mut d = Matrix::identity(m);
    for i in 0..m {
        for j in 0..m {
            d[(i, j)] -= 0.5 * unit[i] * unit[j];
        }
    }
    d
}

/// `Mᵀa / ‖Mᵀa‖`.
pub fn normalize_column(a: &[f64], scaling: &RescalingState) -> Result<Vec<f64>, SolveError> {
    let mut v = scaling.apply_transpose(a);
    let norm = linalg::norm(&v);
    if !(norm >= 1e-300) {
        return Err(SolveError::DegenerateColumn { norm });
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    Ok(v)
}

/// Number of rescalings after which the volume measure is certified below `ε`:
/// the smallest `s ≥ 1` with `(√e/2)^s ≤ ε`.
pub fn rescale_budget(epsilon: f64) -> usize {
    let rate = (2.0 / std::f64::consts::E.sqrt()).ln();
    let s = ((1.0 / epsilon).ln() / rate).ceil();
    if s.is_finite() && s > 1.0 {
        s as usize
    } else {
        1
    }
}

/// Minimum-norm point on the segment between `z` and `a`:
/// `α = aᵀ(a − z)/‖a − z‖²`, `z_new = α z + (1 − α) a`.
pub fn step_alpha(z: &[f64], a: &[f64]) -> Result<(f64, Vec<f64>), SolveError> {
    let d = linalg::sub(a, z);
    let dd = linalg::dot(&d, &d);
    if dd.sqrt() < 1e-14 {
        return Err(SolveError::CoincidentPoints);
    }
    let alpha = (linalg::dot(a, &d) / dd).clamp(0.0, 1.0);
    let z_new = z.iter().zip(a).map(|(zi, ai)| alpha * zi + (1.0 - alpha) * ai).collect();
    Ok((alpha, z_new))
}

// ---------------------------------------------------------------------------
// Convex combination and index elimination

/// One active column of the basic procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub witness: Witness,
    /// Raw `a_t`.
    pub column: Vec<f64>,
    /// `ã_t` under the scaling the basic procedure was called with.
    pub unit: Vec<f64>,
    pub weight: f64,
}

/// What [`ConvexCombination::index_eliminate`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elimination {
    /// At most `m+1` members; bookkeeping only.
    NoOp,
    /// The member outside the basis was absorbed by the basis.
    DroppedIncoming,
    /// The member outside the basis replaced basis position `position`.
    Replaced { position: usize },
    /// No invertible basis exists; a kernel vector of `[Ã;𝟙ᵀ]` removed one member.
    KernelReduced,
}

/// State of the basic procedure: weights `x_t ≥ 0` summing to one over at most
/// `m+1` columns, the aggregate `z̃`, and, once available, the inverse
/// `G = [Ã;𝟙ᵀ]⁻¹` over the members in order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCombination {
    m: usize,
    members: Vec<Member>,
    z: Vec<f64>,
    g: Option<Matrix>,
}

impl ConvexCombination {
    pub fn singleton(m: usize, witness: Witness, column: Vec<f64>, unit: Vec<f64>) -> Self {
        let z = unit.clone();
        ConvexCombination { m, members: vec![Member { witness, column, unit, weight: 1.0 }], z, g: None }
    }

    /// Builds a combination from explicit members; `z̃` is recomputed from them.
    pub fn from_members(m: usize, members: Vec<Member>) -> Self {
        let mut c = ConvexCombination { m, members, z: vec![0.0; m], g: None };
        c.z = c.weighted_sum();
        c
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn aggregate(&self) -> &[f64] {
        &self.z
    }

    pub fn inverse(&self) -> Option<&Matrix> {
        self.g.as_ref()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|mb| mb.weight).collect()
    }

    pub fn weight_sum(&self) -> f64 {
        self.members.iter().map(|mb| mb.weight).sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.members.iter().map(|mb| mb.weight).fold(f64::INFINITY, f64::min)
    }

    /// `Σ x_t ã_t`
    pub fn weighted_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.m];
        for mb in &self.members {
            linalg::axpy(mb.weight, &mb.unit, &mut s);
        }
        s
    }

    /// `‖Σ x_t ã_t − z̃‖`
    pub fn combination_residual(&self) -> f64 {
        linalg::norm(&linalg::sub(&self.weighted_sum(), &self.z))
    }

    /// `[Ã;𝟙ᵀ]` over the first `m+1` members.
    fn basis_matrix(&self) -> Matrix {
        let k = self.m + 1;
        let mut b = Matrix::zeros(k, k);
        for (j, mb) in self.members.iter().take(k).enumerate() {
            for (i, v) in mb.unit.iter().enumerate() {
                b[(i, j)] = *v;
            }
            b[(self.m, j)] = 1.0;
        }
        b
    }

    /// `‖G[Ã;𝟙ᵀ] − I‖_∞` when `G` is stored.
    pub fn g_residual(&self) -> Option<f64> {
        let g = self.g.as_ref()?;
        Some(g.matmul(&self.basis_matrix()).dist_inf(&Matrix::identity(self.m + 1)))
    }

    /// `1 / Σ x_t` applied to every weight.
    fn renormalize(&mut self) {
        let s = self.weight_sum();
        if s > 0.0 && s != 1.0 {
            for mb in self.members.iter_mut() {
                mb.weight /= s;
            }
        }
    }

    /// Inverse of the basis matrix, unless it is too ill-conditioned to keep
    /// `‖G[Ã;𝟙ᵀ] − I‖_∞` within tolerance.
    fn try_build_inverse(&self) -> Option<Matrix> {
        if self.members.len() < self.m + 1 {
            return None;
        }
        let b = self.basis_matrix();
        let g = linalg::invert(&b).ok()?;
        (g.matmul(&b).dist_inf(&Matrix::identity(self.m + 1)) <= G_RESIDUAL_TOL).then_some(g)
    }

    /// Steps 6 and 7: `x ← αx`, `x_t̂ += 1 − α`, `z̃ ← z_new`. Members that are
    /// already active are merged rather than duplicated.
    pub fn absorb(&mut self, incoming: WitnessedColumn, unit: Vec<f64>, alpha: f64, z_new: Vec<f64>) {
        for mb in self.members.iter_mut() {
            mb.weight *= alpha;
        }
        match self.members.iter_mut().find(|mb| mb.witness == incoming.witness) {
            Some(mb) => mb.weight += 1.0 - alpha,
            None => self.members.push(Member {
                witness: incoming.witness,
                column: incoming.column,
                unit,
                weight: 1.0 - alpha,
            }),
        }
        self.z = z_new;
    }

    /// Appends a member without touching the other weights.
    pub fn push_member(&mut self, member: Member) {
        self.members.push(member);
    }

    /// Keeps at most `m+1` members while preserving `Σx = 1` and `Σ x ã = z̃`.
    ///
    /// With the basis inverse `G`, the extra member `t̂` has coordinates
    /// `γ = G(ã_t̂; 1)`, so `Σγ_t ã_t = ã_t̂` and `Σγ_t = 1`. Moving weight
    /// `β` from `t̂` onto the basis along `γ` stays feasible up to
    /// `β* = min{−x_t/γ_t : γ_t < 0}`. If `β* ≥ x_t̂` the extra member
    /// disappears; otherwise the minimizer `t*` leaves and `t̂` takes its
    /// basis slot, with `G` updated by a rank-one correction.
    pub fn index_eliminate(&mut self) -> Result<Elimination, SolveError> {
        let cap = self.m + 1;
        if self.members.len() <= cap {
            if self.members.len() == cap && self.g.is_none() {
                self.g = self.try_build_inverse();
            }
            return Ok(Elimination::NoOp);
        }
        debug_assert_eq!(self.members.len(), cap + 1);

        if self.g.is_none() && !self.select_basis() {
            self.kernel_reduce();
            self.drop_small_weights();
            self.refine();
            return Ok(Elimination::KernelReduced);
        }
        let snapshot = self.members.clone();
        let outcome = self.eliminate_with_inverse();
        self.drop_small_weights();
        self.refine();
        if !self.invariants_hold() {
            debug!("elimination through the stored inverse lost accuracy; using a kernel step");
            self.members = snapshot;
            self.g = None;
            self.kernel_reduce();
            self.drop_small_weights();
            self.refine();
            return Ok(Elimination::KernelReduced);
        }
        Ok(outcome)
    }

    fn eliminate_with_inverse(&mut self) -> Elimination {
        let cap = self.m + 1;
        let g = self.g.as_ref().expect("basis inverse");

        let extra = &self.members[cap];
        let mut rhs = extra.unit.clone();
        rhs.push(1.0);
        let gamma = g.mul_vec(&rhs);
        let x_hat = extra.weight;

        let mut beta_star = f64::INFINITY;
        let mut t_star = usize::MAX;
        for (t, (mb, gt)) in self.members.iter().zip(&gamma).enumerate() {
            if *gt < 0.0 {
                let b = -mb.weight / gt;
                if b < beta_star {
                    beta_star = b;
                    t_star = t;
                }
            }
        }

        let outcome = if beta_star >= x_hat {
            for (mb, gt) in self.members.iter_mut().zip(&gamma) {
                mb.weight += x_hat * gt;
            }
            self.members.pop();
            Elimination::DroppedIncoming
        } else {
            for (t, (mb, gt)) in self.members.iter_mut().zip(&gamma).enumerate() {
                if t != t_star {
                    mb.weight += beta_star * gt;
                }
            }
            self.members[cap].weight = x_hat - beta_star;
            let mut shift = linalg::sub(&self.members[cap].unit, &self.members[t_star].unit);
            shift.push(0.0);
            let updated = linalg::smw_inverse_update(g, &shift, t_star);
            self.members.swap_remove(t_star);
            self.g = match updated {
                Ok(g_new) => {
                    self.g = Some(g_new);
                    match self.g_residual() {
                        Some(res) if res <= G_RESIDUAL_TOL => self.g.take(),
                        _ => {
                            debug!("rank-one update lost accuracy; refactorizing");
                            self.try_build_inverse()
                        }
                    }
                }
                Err(err) => {
                    debug!("rank-one update failed ({err}); refactorizing");
                    self.try_build_inverse()
                }
            };
            Elimination::Replaced { position: t_star }
        };
        outcome
    }

    /// One step of iterative refinement of `x` against `[Ã;𝟙ᵀ]x = (z̃;1)`,
    /// through `G` when there is a basis and least squares otherwise.
    fn refine(&mut self) {
        let mut r = self.z.clone();
        r.push(1.0);
        for mb in &self.members {
            linalg::axpy(-mb.weight, &mb.unit, &mut r[..self.m]);
            r[self.m] -= mb.weight;
        }
        if linalg::norm_inf(&r) <= REFINE_THRESHOLD {
            return;
        }
        let dx = match self.g.as_ref() {
            Some(g) if self.members.len() == self.m + 1 => g.mul_vec(&r),
            _ => {
                let mut b = Matrix::zeros(self.m + 1, self.members.len());
                for (j, mb) in self.members.iter().enumerate() {
                    for (i, v) in mb.unit.iter().enumerate() {
                        b[(i, j)] = *v;
                    }
                    b[(self.m, j)] = 1.0;
                }
                linalg::PivotedQr::factor(&b).least_squares(&r)
            }
        };
        if dx.iter().zip(&self.members).all(|(d, mb)| mb.weight + d >= 0.0) {
            for (mb, d) in self.members.iter_mut().zip(dx) {
                mb.weight += d;
            }
        }
    }

    fn invariants_hold(&self) -> bool {
        self.min_weight() >= 0.0
            && (self.weight_sum() - 1.0).abs() <= INVARIANT_TOL
            && self.combination_residual() <= INVARIANT_TOL
    }

    /// Finds an invertible `(m+1)`-subset among `m+2` members and moves the
    /// left-out member to the end. Tries the newest member as the outsider first.
    fn select_basis(&mut self) -> bool {
        let cap = self.m + 1;
        for out in (0..=cap).rev() {
            self.members.swap(out, cap);
            if let Some(g) = self.try_build_inverse() {
                self.g = Some(g);
                return true;
            }
            self.members.swap(out, cap);
        }
        false
    }

    /// Carathéodory step along a kernel vector of `[Ã;𝟙ᵀ]`.
    fn kernel_reduce(&mut self) {
        let k = self.members.len();
        let mut b = Matrix::zeros(self.m + 1, k);
        for (j, mb) in self.members.iter().enumerate() {
            for (i, v) in mb.unit.iter().enumerate() {
                b[(i, j)] = *v;
            }
            b[(self.m, j)] = 1.0;
        }
        let Some(mut lambda) = linalg::null_vector(&b) else {
            return;
        };
        if !lambda.iter().any(|l| *l > 0.0) {
            lambda.iter_mut().for_each(|l| *l = -*l);
        }
        let mut beta = f64::INFINITY;
        let mut drop = 0;
        for (t, (mb, l)) in self.members.iter().zip(&lambda).enumerate() {
            if *l > 0.0 && mb.weight / l < beta {
                beta = mb.weight / l;
                drop = t;
            }
        }
        for (mb, l) in self.members.iter_mut().zip(&lambda) {
            mb.weight -= beta * l;
        }
        self.members.remove(drop);
        self.g = None;
    }

    fn drop_small_weights(&mut self) {
        let before = self.members.len();
        let basis_len = self.m + 1;
        let mut basis_hit = false;
        let mut idx = 0;
        self.members.retain(|mb| {
            let keep = mb.weight >= WEIGHT_FLOOR;
            if !keep && idx < basis_len {
                basis_hit = true;
            }
            idx += 1;
            keep
        });
        if self.members.len() != before {
            if basis_hit {
                self.g = None;
            }
            self.renormalize();
        }
    }
}

// ---------------------------------------------------------------------------
// Instrumentation

/// One Step-6 update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub alpha: f64,
    pub z_old_norm: f64,
    pub z_new_norm: f64,
    /// `1/‖z_new‖² − 1/‖z_old‖²`; at least one in exact arithmetic.
    pub potential_gain: f64,
}

/// Hooks called from inside a solve. All methods default to no-ops.
pub trait SolveObserver {
    fn on_step(&mut self, _step: &StepRecord) {}
    fn on_elimination(&mut self, _combination: &ConvexCombination, _kind: Elimination) {}
    fn on_basic_end(&mut self, _iterations: usize, _bound: usize) {}
    fn on_rescale(&mut self, _combination: &ConvexCombination, _chosen: usize) {}
}

pub struct NoopObserver;

impl SolveObserver for NoopObserver {}

// ---------------------------------------------------------------------------
// Basic procedure

#[derive(Debug, Clone, PartialEq)]
pub enum BasicOutcome {
    /// The oracle declared `M ỹ` strictly feasible. `y = M ỹ`.
    FoundD { y_scaled: Vec<f64>, y: Vec<f64> },
    /// Verified positive weights on raw columns with `Σ x_t a_t ≈ 0`.
    FoundP { weights: Vec<WeightedWitness> },
    /// `‖z̃‖ ≤ μ/(m+1)`.
    SmallAggregate(ConvexCombination),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BasicStats {
    pub iterations: usize,
    pub oracle_calls: usize,
}

/// `⌈(m+1)²/μ²⌉ + 1`
pub fn iteration_bound(m: usize, mu: f64) -> usize {
    let k = (m as f64 + 1.0) / mu;
    (k * k).ceil() as usize + 1
}

/// Queries the oracle at `M z̃` and normalizes the returned column.
fn separate<O: SeparationOracle + ?Sized>(
    oracle: &O,
    scaling: &RescalingState,
    z: &[f64],
    stats: &mut BasicStats,
) -> Result<Result<(WitnessedColumn, Vec<f64>), Vec<f64>>, SolveError> {
    let y = scaling.apply(z);
    stats.oracle_calls += 1;
    match oracle.query(&y)? {
        Separation::Interior => Ok(Err(y)),
        Separation::Violated(w) => {
            let value = linalg::dot(&w.column, &y);
            if !(value <= crate::oracle::SOUNDNESS_TOL * linalg::norm(&w.column) * linalg::norm(&y)) {
                return Err(SolveError::OracleContractViolation { value });
            }
            let unit = normalize_column(&w.column, scaling)?;
            Ok(Ok((w, unit)))
        }
    }
}

/// Maps weights on `ã_t` to weights on raw `a_t`: `x_t / ‖Mᵀa_t‖`, normalized.
fn unscaled_weights(c: &ConvexCombination, scaling: &RescalingState) -> Vec<WeightedWitness> {
    let mut out: Vec<WeightedWitness> = c
        .members
        .iter()
        .filter(|mb| mb.weight > 0.0)
        .map(|mb| WeightedWitness {
            witness: mb.witness.clone(),
            x: mb.weight / linalg::norm(&scaling.apply_transpose(&mb.column)),
        })
        .collect();
    let s: f64 = out.iter().map(|w| w.x).sum();
    for w in out.iter_mut() {
        w.x /= s;
    }
    out
}

/// Runs the basic procedure on the system scaled by `scaling`.
pub fn basic_procedure<O: SeparationOracle + ?Sized>(
    oracle: &O,
    scaling: &RescalingState,
    mu: f64,
    initial_y: &[f64],
    observer: &mut dyn SolveObserver,
) -> Result<(BasicOutcome, BasicStats), SolveError> {
    let m = oracle.dim();
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(SolveError::Config(format!("mu must be positive, got {mu}")));
    }
    if initial_y.len() != m {
        return Err(SolveError::Config("initial point has wrong dimension".into()));
    }
    let mut stats = BasicStats::default();
    let bound = iteration_bound(m, mu);
    let stop_norm = mu / (m as f64 + 1.0);

    let (w0, u0) = match separate(oracle, scaling, initial_y, &mut stats)? {
        Err(y) => {
            observer.on_basic_end(0, bound);
            return Ok((BasicOutcome::FoundD { y_scaled: initial_y.to_vec(), y }, stats));
        }
        Ok(sep) => sep,
    };
    let mut combo = ConvexCombination::singleton(m, w0.witness, w0.column, u0);

    loop {
        if stats.iterations >= bound {
            return Err(SolveError::IterationBoundViolated { iterations: stats.iterations + 1, bound });
        }
        stats.iterations += 1;

        let (w, unit) = match separate(oracle, scaling, &combo.z, &mut stats)? {
            Err(y) => {
                observer.on_basic_end(stats.iterations, bound);
                return Ok((BasicOutcome::FoundD { y_scaled: combo.z.clone(), y }, stats));
            }
            Ok(sep) => sep,
        };

        let z_old_norm = linalg::norm(&combo.z);
        let (alpha, z_new) = step_alpha(&combo.z, &unit)?;
        let z_new_norm = linalg::norm(&z_new);
        let step = StepRecord {
            alpha,
            z_old_norm,
            z_new_norm,
            potential_gain: 1.0 / (z_new_norm * z_new_norm) - 1.0 / (z_old_norm * z_old_norm),
        };
        debug_assert!(
            step.potential_gain >= 1.0 - 1e-9 * (1.0 / (z_old_norm * z_old_norm)).max(1.0),
            "potential gain {} below one",
            step.potential_gain
        );
        observer.on_step(&step);

        combo.absorb(w, unit, alpha, z_new);
        debug_assert!((combo.weight_sum() - 1.0).abs() <= 1e-10);
        let kind = combo.index_eliminate()?;
        observer.on_elimination(&combo, kind);

        let z_norm = linalg::norm(&combo.z);
        if z_norm <= TAU_ZERO {
            let weights = unscaled_weights(&combo, scaling);
            match certify::verify_p_certificate(oracle, &weights) {
                Ok(report) if report.accepted => {
                    observer.on_basic_end(stats.iterations, bound);
                    return Ok((BasicOutcome::FoundP { weights }, stats));
                }
                Ok(report) => debug!("zero aggregate rejected (residual {:e})", report.residual),
                Err(err) => debug!("zero aggregate not verifiable: {err}"),
            }
        }
        if z_norm <= stop_norm {
            trace!("short aggregate after {} iterations", stats.iterations);
            observer.on_basic_end(stats.iterations, bound);
            return Ok((BasicOutcome::SmallAggregate(combo), stats));
        }
    }
}

// ---------------------------------------------------------------------------
// Main algorithm

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedWitness {
    pub witness: Witness,
    pub x: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverConfig {
    /// Replaces `μ = 1/√(3m)`.
    pub mu: Option<f64>,
    /// Caps the number of rescalings below the budget.
    pub max_rescalings: Option<usize>,
    pub mode: ScalingMode,
    /// Rescalings kept factored in [`ScalingMode::Auto`]; defaults to `m`.
    pub dense_threshold: Option<usize>,
    /// Starting point of every basic procedure call; defaults to all ones.
    pub initial_y: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub bp_calls: usize,
    pub bp_iterations: usize,
    pub oracle_calls: usize,
    pub rescalings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    FeasibleD { y: Vec<f64> },
    DualP { weights: Vec<WeightedWitness> },
    EpsilonDeclared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub outcome: Outcome,
    pub epsilon: f64,
    pub s_star: usize,
    pub counters: Counters,
    pub wall: Duration,
}

/// `1/√(3m)`
pub fn default_mu(m: usize) -> f64 {
    1.0 / (3.0 * m as f64).sqrt()
}

pub fn main_algorithm<O: SeparationOracle + ?Sized>(
    oracle: &O,
    epsilon: f64,
    config: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    main_algorithm_observed(oracle, epsilon, config, &mut NoopObserver)
}

pub fn main_algorithm_observed<O: SeparationOracle + ?Sized>(
    oracle: &O,
    epsilon: f64,
    config: &SolverConfig,
    observer: &mut dyn SolveObserver,
) -> Result<SolveOutcome, SolveError> {
    let start = Instant::now();
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SolveError::Config(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let m = oracle.dim();
    if m == 0 {
        return Err(SolveError::Config("dimension must be at least 1".into()));
    }
    let mu = config.mu.unwrap_or_else(|| default_mu(m));
    let s_star = rescale_budget(epsilon);
    let rounds = config.max_rescalings.map_or(s_star, |cap| cap.min(s_star)).max(1);
    let initial = config.initial_y.clone().unwrap_or_else(|| vec![1.0; m]);
    if initial.len() != m || !linalg::all_finite(&initial) || initial.iter().all(|v| *v == 0.0) {
        return Err(SolveError::Config("initial point must be a finite nonzero vector of length m".into()));
    }
    let mut scaling =
        RescalingState::with_threshold(m, config.mode, config.dense_threshold.unwrap_or(m));
    let mut counters = Counters::default();

    let finish = |outcome, counters| SolveOutcome {
        outcome,
        epsilon,
        s_star,
        counters,
        wall: start.elapsed(),
    };

    for _ in 0..rounds {
        let (result, stats) = basic_procedure(oracle, &scaling, mu, &initial, observer)?;
        counters.bp_calls += 1;
        counters.bp_iterations += stats.iterations;
        counters.oracle_calls += stats.oracle_calls;
        match result {
            BasicOutcome::FoundD { y, .. } => {
                counters.oracle_calls += 1;
                if !oracle.query(&y)?.is_interior() {
                    return Err(SolveError::OracleContractViolation { value: f64::NAN });
                }
                return Ok(finish(Outcome::FeasibleD { y }, counters));
            }
            BasicOutcome::FoundP { weights } => {
                return Ok(finish(Outcome::DualP { weights }, counters));
            }
            BasicOutcome::SmallAggregate(combo) => {
                if let Some(weights) = support_certificate(oracle, &combo, &scaling) {
                    return Ok(finish(Outcome::DualP { weights }, counters));
                }
                let chosen = heaviest(&combo);
                observer.on_rescale(&combo, chosen);
                scaling.push(&combo.members()[chosen].unit);
                counters.rescalings += 1;
            }
        }
    }
    Ok(finish(Outcome::EpsilonDeclared, counters))
}

/// Looks for positive weights on the active set that cancel exactly.
///
/// A small aggregate often sits next to an exact zero of the same support;
/// the kernel of the active columns finds it. Only returned if it verifies.
fn support_certificate<O: SeparationOracle + ?Sized>(
    oracle: &O,
    combo: &ConvexCombination,
    scaling: &RescalingState,
) -> Option<Vec<WeightedWitness>> {
    let k = combo.len();
    if k < 2 {
        return None;
    }
    let mut b = Matrix::zeros(combo.m, k);
    for (j, mb) in combo.members.iter().enumerate() {
        for (i, v) in mb.unit.iter().enumerate() {
            b[(i, j)] = *v;
        }
    }
    let mut lambda = linalg::null_vector(&b)?;
    if lambda.iter().sum::<f64>() < 0.0 {
        lambda.iter_mut().for_each(|l| *l = -*l);
    }
    if !lambda.iter().all(|l| *l > 0.0) {
        return None;
    }
    let members = combo
        .members
        .iter()
        .zip(&lambda)
        .map(|(mb, l)| Member { weight: *l, ..mb.clone() })
        .collect();
    let weights = unscaled_weights(&ConvexCombination::from_members(combo.m, members), scaling);
    match certify::verify_p_certificate(oracle, &weights) {
        Ok(report) if report.accepted => Some(weights),
        _ => None,
    }
}

/// First index of the largest weight.
pub fn heaviest(c: &ConvexCombination) -> usize {
    let mut best = 0;
    for (i, mb) in c.members().iter().enumerate() {
        if mb.weight > c.members()[best].weight {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ProblemInstance;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn normalize_examples() {
        let id = RescalingState::identity(2, ScalingMode::Dense);
        assert_eq!(normalize_column(&[3.0, 4.0], &id).unwrap(), vec![0.6, 0.8]);
        let half = RescalingState::from_dense(Matrix::diag(&[0.5, 1.0]));
        assert_eq!(normalize_column(&[1.0, 0.0], &half).unwrap(), vec![1.0, 0.0]);
        let f = RescalingState::from_factors(2, vec![vec![1.0, 0.0]]);
        let s5 = 5f64.sqrt();
        assert!(close(&normalize_column(&[1.0, 1.0], &f).unwrap(), &[1.0 / s5, 2.0 / s5], 1e-15));
        assert!(matches!(
            normalize_column(&[0.0, 0.0], &id),
            Err(SolveError::DegenerateColumn { .. })
        ));
    }

    #[test]
    fn step_alpha_examples() {
        let (a, z) = step_alpha(&[1.0, 0.0], &[-1.0, 0.0]).unwrap();
        assert_eq!((a, z), (0.5, vec![0.0, 0.0]));

        let (a, z) = step_alpha(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(a, 0.5);
        assert_eq!(z, vec![0.5, 0.5]);
        assert!((1.0 / linalg::dot(&z, &z) - 2.0).abs() < 1e-15);

        let (a, z) = step_alpha(&[0.6, 0.8], &[0.0, -1.0]).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
        assert!(close(&z, &[0.3, -0.1], 1e-15));
        assert!((1.0 / linalg::dot(&z, &z) - 10.0).abs() < 1e-12);

        assert_eq!(step_alpha(&[1.0, 0.0], &[1.0, 0.0]), Err(SolveError::CoincidentPoints));
    }

    #[test]
    fn rescale_matrix_examples() {
        assert_eq!(rescale_matrix(&[1.0, 0.0]), Matrix::diag(&[0.5, 1.0]));
        let s = 0.5f64.sqrt();
        let d = rescale_matrix(&[s, s]);
        let expect = Matrix::from_rows(&[vec![0.75, -0.25], vec![-0.25, 0.75]]).unwrap();
        assert!(d.dist_inf(&expect) < 1e-15);
        assert!((linalg::determinant(&d) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rescale_budget_examples() {
        assert_eq!(rescale_budget(0.5), 4);
        assert_eq!(rescale_budget(0.9), 1);
        assert_eq!(rescale_budget(1.0 - 1e-15), 1);
    }

    #[test]
    fn apply_scaling_examples() {
        let id = RescalingState::identity(2, ScalingMode::Factored);
        assert_eq!(apply_scaling(&id, &[2.0, 3.0]), vec![2.0, 3.0]);
        let f = RescalingState::from_factors(2, vec![vec![1.0, 0.0]]);
        assert_eq!(apply_scaling(&f, &[2.0, 3.0]), vec![1.0, 3.0]);
    }

    #[test]
    fn auto_mode_switches_to_dense() {
        let mut s = RescalingState::identity(2, ScalingMode::Auto);
        let mut dense = RescalingState::identity(2, ScalingMode::Dense);
        let u = [0.6, 0.8];
        for k in 0..3 {
            assert_eq!(s.is_factored(), k <= 2);
            s.push(&u);
            dense.push(&u);
        }
        assert!(!s.is_factored());
        assert!(close(&s.apply(&[1.0, -2.0]), &dense.apply(&[1.0, -2.0]), 1e-15));
    }

    fn member(i: usize, unit: Vec<f64>, weight: f64) -> Member {
        Member { witness: Witness::Index(i), column: unit.clone(), unit, weight }
    }

    #[test]
    fn eliminate_drops_duplicate_direction() {
        let mut c = ConvexCombination::from_members(
            1,
            vec![member(0, vec![1.0], 0.3), member(1, vec![-1.0], 0.2), member(2, vec![1.0], 0.5)],
        );
        let z = c.aggregate().to_vec();
        assert!((z[0] - 0.6).abs() < 1e-15);
        assert_eq!(c.index_eliminate().unwrap(), Elimination::DroppedIncoming);
        assert!(close(&c.weights(), &[0.8, 0.2], 1e-15));
        assert!(c.combination_residual() < 1e-15);
    }

    fn two_dim_basis(x: f64, x_hat: f64) -> ConvexCombination {
        let s = 0.5f64.sqrt();
        ConvexCombination::from_members(
            2,
            vec![
                member(0, vec![1.0, 0.0], x),
                member(1, vec![0.0, 1.0], x),
                member(2, vec![-s, -s], x),
                member(3, vec![0.0, -1.0], x_hat),
            ],
        )
    }

    #[test]
    fn eliminate_case_keep_basis() {
        let mut c = two_dim_basis(0.25, 0.25);
        assert_eq!(c.index_eliminate().unwrap(), Elimination::DroppedIncoming);
        let w = c.weights();
        assert!(close(&w, &[0.39645, 0.14645, 0.45711], 1e-5), "{w:?}");
        assert!((c.weight_sum() - 1.0).abs() < 1e-15);
        assert!(c.combination_residual() < 1e-15);
        assert!(c.g_residual().unwrap() < 1e-12);
    }

    #[test]
    fn eliminate_case_replace_member() {
        let mut c = two_dim_basis(0.05, 0.85);
        assert_eq!(c.index_eliminate().unwrap(), Elimination::Replaced { position: 1 });
        // survivors (0, 2) then t̂ in slot 1
        let w = c.weights();
        assert_eq!(c.members()[1].witness, Witness::Index(3));
        assert!(close(&w, &[0.12071, 0.72929, 0.15], 1e-5), "{w:?}");
        assert!((c.weight_sum() - 1.0).abs() < 1e-15);
        assert!(c.combination_residual() < 1e-15);
        assert!(c.g_residual().unwrap() < 1e-12);
    }

    #[test]
    fn eliminate_without_invertible_basis_uses_kernel() {
        // all columns on a line through the origin: [Ã;1] has rank 2 < 3
        let mut c = ConvexCombination::from_members(
            2,
            vec![
                member(0, vec![1.0, 0.0], 0.25),
                member(1, vec![-1.0, 0.0], 0.25),
                member(2, vec![1.0, 0.0], 0.25),
                member(3, vec![-1.0, 0.0], 0.25),
            ],
        );
        assert_eq!(c.index_eliminate().unwrap(), Elimination::KernelReduced);
        assert!(c.len() <= 3);
        assert!(c.min_weight() >= 0.0);
        assert!((c.weight_sum() - 1.0).abs() < 1e-14);
        assert!(c.combination_residual() < 1e-14);
    }

    fn lp(m: usize, cols: Vec<Vec<f64>>) -> ProblemInstance {
        ProblemInstance::finite_lp(m, cols).unwrap()
    }

    #[test]
    fn basic_procedure_immediate_feasible() {
        let inst = lp(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let id = RescalingState::identity(2, ScalingMode::Auto);
        let (out, stats) = basic_procedure(&inst, &id, default_mu(2), &[1.0, 1.0], &mut NoopObserver).unwrap();
        assert_eq!(out, BasicOutcome::FoundD { y_scaled: vec![1.0, 1.0], y: vec![1.0, 1.0] });
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn basic_procedure_antipodal_dual() {
        let inst = lp(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let id = RescalingState::identity(2, ScalingMode::Auto);
        let (out, stats) = basic_procedure(&inst, &id, default_mu(2), &[1.0, 1.0], &mut NoopObserver).unwrap();
        match out {
            BasicOutcome::FoundP { weights } => {
                let mut x: Vec<_> = weights.iter().map(|w| (w.witness.clone(), w.x)).collect();
                x.sort_by_key(|(w, _)| match w {
                    Witness::Index(i) => *i,
                    _ => usize::MAX,
                });
                assert_eq!(x, vec![(Witness::Index(0), 0.5), (Witness::Index(1), 0.5)]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(stats.iterations, 1);
    }

    #[test]
    fn basic_procedure_thin_cone_stops_within_bound() {
        let e0 = 1e-3;
        let inst = lp(2, vec![vec![1.0, e0], vec![-1.0, e0]]);
        let id = RescalingState::identity(2, ScalingMode::Auto);
        let mu = 1.0 / 6f64.sqrt();
        let (out, stats) = basic_procedure(&inst, &id, mu, &[1.0, 1.0], &mut NoopObserver).unwrap();
        assert!(stats.iterations <= 54, "{}", stats.iterations);
        match out {
            BasicOutcome::SmallAggregate(c) => {
                assert!(linalg::norm(c.aggregate()) <= mu / 3.0);
                assert!(c.len() <= 3);
            }
            BasicOutcome::FoundD { y, .. } => assert!(inst.query(&y).unwrap().is_interior()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn main_algorithm_rejects_bad_epsilon() {
        let inst = lp(1, vec![vec![1.0]]);
        for eps in [0.0, 1.0, -1.0, f64::NAN] {
            assert!(matches!(
                main_algorithm(&inst, eps, &SolverConfig::default()),
                Err(SolveError::Config(_))
            ));
        }
    }

    #[test]
    fn main_algorithm_basis_is_feasible() {
        for m in 1..6 {
            let cols: Vec<Vec<f64>> =
                (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
            let out = main_algorithm(&lp(m, cols), 1e-3, &SolverConfig::default()).unwrap();
            match out.outcome {
                Outcome::FeasibleD { y } => assert!(y.iter().all(|v| *v > 0.0)),
                other => panic!("{other:?}"),
            }
        }
    }
}
