//! Certificate checks, planted instances, and the volume lower bound.
//!
//! A strictly feasible `y` and positive weights with `Σ x_t a_t = 0` can never
//! coexist: `0 < Σ x_t a_tᵀy = (Σ x_t a_t)ᵀy = 0`. Both checks here recompute
//! everything from the instance and never trust solver state.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, certifying_cholesky, Definiteness, Matrix};
use crate::oracle::{
    block_ranges, socp_separate, sdp_aggregate, InstanceError, OracleError, ProblemInstance,
    Separation, SeparationOracle, Witness,
};
use crate::solver::WeightedWitness;

/// Accepted relative residual `‖Σ x_t a_t‖ / Σ x_t‖a_t‖` of a dual certificate.
pub const P_RESIDUAL_TOL: f64 = 1e-9;

/// Default margin `a_tᵀy* ≥ δ` of planted feasible instances.
pub const DEFAULT_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("invalid generator request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    D,
    P,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: CertificateKind,
    /// D: negated worst constraint value where the instance exposes one
    /// (`−min a_tᵀy` for LP, `−min pivot` for SDP, `−min (x₀ − ‖x̃‖)` for SOCP).
    /// P: `‖Σ x_t a_t‖ / Σ x_t‖a_t‖`.
    pub residual: f64,
    pub accepted: bool,
    /// D only: the worst constraint value itself.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub margin: Option<f64>,
}

/// Checks `a_tᵀy > 0` for all `t`; acceptance is the oracle's Interior verdict.
pub fn verify_d_solution(
    instance: &ProblemInstance,
    y: &[f64],
) -> Result<VerificationReport, CertifyError> {
    let sep = instance.query(y)?;
    let margin = match instance {
        ProblemInstance::FiniteLp { columns, .. } => {
            columns.iter().map(|c| linalg::dot(c, y)).reduce(f64::min)
        }
        ProblemInstance::Sdp { matrices, .. } => {
            match certifying_cholesky(&sdp_aggregate(matrices, y)).map_err(OracleError::from)? {
                Definiteness::PositiveDefinite { l } => {
                    (0..l.rows()).map(|i| l[(i, i)] * l[(i, i)]).reduce(f64::min)
                }
                Definiteness::NotPositiveDefinite { pivot, .. } => Some(pivot),
            }
        }
        ProblemInstance::Socp { a, blocks } => {
            let x = a.tr_mul_vec(y);
            block_ranges(blocks)
                .map(|r| x[r.start] - linalg::norm(&x[r.start + 1..r.end]))
                .reduce(f64::min)
        }
        ProblemInstance::Custom(_) => match &sep {
            Separation::Violated(w) => Some(linalg::dot(&w.column, y)),
            Separation::Interior => None,
        },
    };
    Ok(VerificationReport {
        kind: CertificateKind::D,
        residual: margin.map_or(0.0, |v| -v),
        accepted: sep.is_interior(),
        margin,
    })
}

/// Recomputes every `a_t` from its witness and measures `‖Σ x_t a_t‖ / Σ x_t‖a_t‖`.
pub fn verify_p_certificate<O: SeparationOracle + ?Sized>(
    oracle: &O,
    weights: &[WeightedWitness],
) -> Result<VerificationReport, CertifyError> {
    if weights.is_empty() {
        return Err(CertifyError::InvalidCertificate("no weights".into()));
    }
    let mut sum = vec![0.0; oracle.dim()];
    let mut scale = 0.0;
    for w in weights {
        if !(w.x > 0.0) || !w.x.is_finite() {
            return Err(CertifyError::InvalidCertificate(format!("weight {} is not positive", w.x)));
        }
        let a = oracle.resolve(&w.witness)?;
        linalg::axpy(w.x, &a, &mut sum);
        scale += w.x * linalg::norm(&a);
    }
    let residual = linalg::norm(&sum) / scale;
    Ok(VerificationReport {
        kind: CertificateKind::P,
        residual,
        accepted: residual <= P_RESIDUAL_TOL,
        margin: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Lp,
    Sdp,
    Socp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantTarget {
    FeasibleD,
    FeasibleP,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlantedCertificate {
    D { y: Vec<f64> },
    P { weights: Vec<WeightedWitness> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateRequest {
    pub kind: InstanceKind,
    /// Dimension of `y`.
    pub m: usize,
    /// LP: number of columns. SDP: matrix order. SOCP: total cone dimension.
    pub n: usize,
    pub seed: u64,
    pub target: PlantTarget,
    pub margin: f64,
}

impl GenerateRequest {
    pub fn new(kind: InstanceKind, m: usize, n: usize, seed: u64, target: PlantTarget) -> Self {
        GenerateRequest { kind, m, n, seed, target, margin: DEFAULT_MARGIN }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn unit_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let g = gaussian(rng, len);
        let n = linalg::norm(&g);
        if n > 1e-8 {
            return linalg::scale(1.0 / n, &g);
        }
    }
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = scale * rng.sample::<f64, _>(StandardNormal);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// Random orthogonal matrix from Gram-Schmidt on Gaussian columns.
fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = gaussian(rng, n);
        for c in &cols {
            let d = linalg::dot(c, &v);
            linalg::axpy(-d, c, &mut v);
        }
        let nv = linalg::norm(&v);
        if nv > 1e-6 {
            cols.push(linalg::scale(1.0 / nv, &v));
        }
    }
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    Matrix::from_columns(&refs).expect("square")
}

/// Random partition of `n` into blocks of size 1 to 5, with at least
/// `min_blocks` blocks when `n` allows.
fn random_blocks(rng: &mut ChaCha8Rng, n: usize, min_blocks: usize) -> Vec<usize> {
    let mut blocks = Vec::new();
    let mut left = n;
    while left > 0 {
        let reserve = min_blocks.saturating_sub(blocks.len() + 1).min(left - 1);
        let b = rng.random_range(1..=(left - reserve).min(5));
        blocks.push(b);
        left -= b;
    }
    blocks
}

/// Seed-deterministic instance with a known certificate.
///
/// `feasible_d` plants a unit `y*` with margin at least `margin`;
/// `feasible_p` plants positive weights whose combination of columns vanishes.
pub fn generate_planted(
    req: &GenerateRequest,
) -> Result<(ProblemInstance, PlantedCertificate), CertifyError> {
    let (m, n) = (req.m, req.n);
    if m == 0 || n == 0 {
        return Err(CertifyError::InvalidRequest("m and n must be positive".into()));
    }
    if !(req.margin > 0.0 && req.margin < 1.0) {
        return Err(CertifyError::InvalidRequest("margin must lie in (0,1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let delta = req.margin;
    match (req.kind, req.target) {
        (InstanceKind::Lp, PlantTarget::FeasibleD) => {
            if m == 1 && n > 0 {
                let cols = (0..n).map(|_| vec![1.0]).collect();
                return Ok((ProblemInstance::finite_lp(1, cols)?, PlantedCertificate::D { y: vec![1.0] }));
            }
            let y = unit_vector(&mut rng, m);
            let mut cols = Vec::with_capacity(n);
            for _ in 0..n {
                // unit column with aᵀy* = c ∈ [δ, 1]
                let mut g = gaussian(&mut rng, m);
                let d = linalg::dot(&g, &y);
                linalg::axpy(-d, &y, &mut g);
                let gn = linalg::norm(&g);
                let u: f64 = rng.random();
                let c = delta + (1.0 - delta) * u * u;
                let mut a = linalg::scale((1.0 - c * c).sqrt() / gn, &g);
                linalg::axpy(c, &y, &mut a);
                cols.push(a);
            }
            Ok((ProblemInstance::finite_lp(m, cols)?, PlantedCertificate::D { y }))
        }
        (InstanceKind::Lp, PlantTarget::FeasibleP) => {
            if n < 2 {
                return Err(CertifyError::InvalidRequest("feasible_p LP needs n ≥ 2".into()));
            }
            let mut cols: Vec<Vec<f64>> = (0..n - 1).map(|_| gaussian(&mut rng, m)).collect();
            let lambda: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.5..1.5)).collect();
            let mut last = vec![0.0; m];
            for (c, l) in cols.iter().zip(&lambda) {
                linalg::axpy(-l, c, &mut last);
            }
            cols.push(last);
            let weights = lambda
                .into_iter()
                .chain(std::iter::once(1.0))
                .enumerate()
                .map(|(i, x)| WeightedWitness { witness: Witness::Index(i), x })
                .collect();
            Ok((ProblemInstance::finite_lp(m, cols)?, PlantedCertificate::P { weights }))
        }
        (InstanceKind::Sdp, PlantTarget::FeasibleD) => {
            let y = unit_vector(&mut rng, m);
            let q = random_orthogonal(&mut rng, n);
            let d: Vec<f64> = (0..n).map(|_| rng.random_range(delta..1.0)).collect();
            let target = q.transpose().matmul(&Matrix::diag(&d)).matmul(&q);
            let noise = 1.0 / (n as f64).sqrt();
            let mut mats: Vec<Matrix> = (0..m).map(|_| random_symmetric(&mut rng, n, noise)).collect();
            // Σ y*_i A_i = S + (T − S)Σ y*_i² = T
            let s = sdp_aggregate(&mats, &y);
            let mut corr = target.clone();
            corr.add_scaled(-1.0, &s);
            for (a, yi) in mats.iter_mut().zip(&y) {
                a.add_scaled(*yi, &corr);
            }
            let mats = mats.into_iter().map(|a| a.symmetrized()).collect();
            Ok((ProblemInstance::sdp(mats)?, PlantedCertificate::D { y }))
        }
        (InstanceKind::Sdp, PlantTarget::FeasibleP) => {
            if n < 2 {
                return Err(CertifyError::InvalidRequest("feasible_p SDP needs n ≥ 2".into()));
            }
            // A_i • W = 0 for W = Σ x_k v_k v_kᵀ
            let r = n;
            let vs: Vec<Vec<f64>> = (0..r).map(|_| unit_vector(&mut rng, n)).collect();
            let xs: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..1.5)).collect();
            let mut w = Matrix::zeros(n, n);
            for (v, x) in vs.iter().zip(&xs) {
                for i in 0..n {
                    for j in 0..n {
                        w[(i, j)] += x * v[i] * v[j];
                    }
                }
            }
            let ww = frobenius(&w, &w);
            let noise = 1.0 / (n as f64).sqrt();
            let mats = (0..m)
                .map(|_| {
                    let mut a = random_symmetric(&mut rng, n, noise);
                    let c = frobenius(&a, &w) / ww;
                    a.add_scaled(-c, &w);
                    a.symmetrized()
                })
                .collect();
            let weights = vs
                .into_iter()
                .zip(xs)
                .map(|(v, x)| WeightedWitness { witness: Witness::SdpVector(v), x })
                .collect();
            Ok((ProblemInstance::sdp(mats)?, PlantedCertificate::P { weights }))
        }
        (InstanceKind::Socp, PlantTarget::FeasibleD) => {
            let y = unit_vector(&mut rng, m);
            let blocks = random_blocks(&mut rng, n, 1);
            let mut target = vec![0.0; n];
            for r in block_ranges(&blocks) {
                let len = r.len();
                let tail = gaussian(&mut rng, len - 1);
                let tn = linalg::norm(&tail);
                let rho: f64 = rng.random();
                target[r.start] = delta + rho * (1.0 - delta) + tn;
                target[r.start + 1..r.end].copy_from_slice(&tail);
            }
            let b = Matrix::from_rows(&(0..m).map(|_| gaussian(&mut rng, n)).collect::<Vec<_>>())
                .expect("rectangular");
            // A = B + y*(x* − Bᵀy*)ᵀ so that Aᵀy* = x*
            let shift = linalg::sub(&target, &b.tr_mul_vec(&y));
            let mut a = b;
            for i in 0..m {
                for j in 0..n {
                    a[(i, j)] += y[i] * shift[j];
                }
            }
            Ok((ProblemInstance::socp(a, blocks)?, PlantedCertificate::D { y }))
        }
        (InstanceKind::Socp, PlantTarget::FeasibleP) => {
            // one block alone would plant a zero column
            if n < 2 {
                return Err(CertifyError::InvalidRequest("feasible_p SOCP needs n ≥ 2".into()));
            }
            let blocks = random_blocks(&mut rng, n, 2);
            let mut vs = Vec::with_capacity(blocks.len());
            let mut w = vec![0.0; n];
            for r in block_ranges(&blocks) {
                let mut v = vec![0.0; n];
                v[r.start] = 1.0;
                if r.len() > 1 {
                    let u = unit_vector(&mut rng, r.len() - 1);
                    let rho: f64 = rng.random_range(0.0..0.9);
                    for (k, ui) in u.iter().enumerate() {
                        v[r.start + 1 + k] = rho * ui;
                    }
                }
                let x: f64 = rng.random_range(0.5..1.5);
                linalg::axpy(x, &v, &mut w);
                vs.push((v, x));
            }
            // rows of A orthogonal to w = Σ x_b v_b
            let ww = linalg::dot(&w, &w);
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    let mut row = gaussian(&mut rng, n);
                    let c = linalg::dot(&row, &w) / ww;
                    linalg::axpy(-c, &w, &mut row);
                    row
                })
                .collect();
            let a = Matrix::from_rows(&rows).expect("rectangular");
            let weights = vs
                .into_iter()
                .map(|(v, x)| WeightedWitness { witness: Witness::SocpVector(v), x })
                .collect();
            Ok((ProblemInstance::socp(a, blocks)?, PlantedCertificate::P { weights }))
        }
    }
}

fn frobenius(a: &Matrix, b: &Matrix) -> f64 {
    linalg::dot(a.as_slice(), b.as_slice())
}

/// Checks a planted certificate against its instance.
pub fn verify_planted(
    instance: &ProblemInstance,
    cert: &PlantedCertificate,
) -> Result<VerificationReport, CertifyError> {
    match cert {
        PlantedCertificate::D { y } => verify_d_solution(instance, y),
        PlantedCertificate::P { weights } => verify_p_certificate(instance, weights),
    }
}

/// Seed of the subset sampler in [`dstar_lower_bound`].
const DSTAR_SEED: u64 = 0x5eed_d57a;

fn binomial_at_most(n: usize, k: usize, cap: usize) -> Option<usize> {
    let mut c: usize = 1;
    for i in 0..k {
        c = c.checked_mul(n - i)? / (i + 1);
        if c > cap {
            return None;
        }
    }
    Some(c)
}

fn subset_det(samples: &[Vec<f64>], idx: &[usize]) -> f64 {
    let cols: Vec<&[f64]> = idx.iter().map(|&i| samples[i].as_slice()).collect();
    linalg::determinant(&Matrix::from_columns(&cols).expect("square")).abs()
}

/// Lower bound on the largest `|det|` of `m` vectors drawn from `samples`.
///
/// All `m`-subsets are scanned when there are at most `10m²` of them;
/// otherwise `10m²` subsets are drawn at random (fixed seed). A greedy
/// volume-pivoting pass is always added.
pub fn dstar_lower_bound(samples: &[Vec<f64>], m: usize) -> f64 {
    if m == 0 || samples.len() < m || samples.iter().any(|s| s.len() != m) {
        return 0.0;
    }
    let budget = 10 * m * m;
    let mut best = greedy_volume(samples, m);
    match binomial_at_most(samples.len(), m, budget) {
        Some(_) => {
            let mut idx: Vec<usize> = (0..m).collect();
            loop {
                best = best.max(subset_det(samples, &idx));
                // next combination in lexicographic order
                let k = samples.len();
                let Some(pos) = (0..m).rev().find(|&i| idx[i] != i + k - m) else {
                    break;
                };
                idx[pos] += 1;
                for j in pos + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(DSTAR_SEED);
            for _ in 0..budget {
                let mut idx = sample(&mut rng, samples.len(), m).into_vec();
                idx.sort_unstable();
                best = best.max(subset_det(samples, &idx));
            }
        }
    }
    best
}

/// Picks, `m` times, the sample with the largest component orthogonal to
/// those already picked.
fn greedy_volume(samples: &[Vec<f64>], m: usize) -> f64 {
    let mut residual: Vec<Vec<f64>> = samples.to_vec();
    let mut chosen = Vec::with_capacity(m);
    for _ in 0..m {
        let (best, norm) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, r)| (i, linalg::norm(r)))
            .fold((usize::MAX, -1.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
        if best == usize::MAX || norm <= 0.0 {
            return 0.0;
        }
        chosen.push(best);
        let q = linalg::scale(1.0 / norm, &residual[best]);
        for r in residual.iter_mut() {
            let d = linalg::dot(&q, r);
            linalg::axpy(-d, &q, r);
        }
    }
    chosen.sort_unstable();
    subset_det(samples, &chosen)
}

/// SOCP witness check used by tests: the separating block is `(1, u)` with `‖u‖ ≤ 1`.
pub fn socp_witness_in_cone_slice(v: &[f64], blocks: &[usize]) -> bool {
    let mut found = false;
    for r in block_ranges(blocks) {
        let blk = &v[r];
        if blk.iter().all(|x| *x == 0.0) {
            continue;
        }
        if blk[0] != 1.0 || linalg::norm(&blk[1..]) > 1.0 + 1e-12 {
            return false;
        }
        found = true;
    }
    found
}

/// Recomputes `x₀ − ‖x̃‖` for the block a SOCP separation used.
pub fn socp_check_value(x: &[f64], blocks: &[usize]) -> Option<f64> {
    socp_separate(x, blocks).map(|(r, _)| x[r.start] - linalg::norm(&x[r.start + 1..r.end]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, m: usize) -> Vec<f64> {
        let mut v = vec![0.0; m];
        v[i] = 1.0;
        v
    }

    fn ww(witness: Witness, x: f64) -> WeightedWitness {
        WeightedWitness { witness, x }
    }

    #[test]
    fn d_reports() {
        let inst = ProblemInstance::finite_lp(2, vec![e(0, 2), e(1, 2)]).unwrap();
        let r = verify_d_solution(&inst, &[1.0, 1.0]).unwrap();
        assert!(r.accepted);
        assert_eq!(r.margin, Some(1.0));
        let r = verify_d_solution(&inst, &[1.0, 0.0]).unwrap();
        assert!(!r.accepted);
        assert_eq!(r.margin, Some(0.0));
        let sdp = ProblemInstance::sdp(vec![Matrix::identity(2)]).unwrap();
        assert!(verify_d_solution(&sdp, &[1.0]).unwrap().accepted);
    }

    #[test]
    fn p_reports() {
        let inst = ProblemInstance::finite_lp(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let r = verify_p_certificate(&inst, &[ww(Witness::Index(0), 0.5), ww(Witness::Index(1), 0.5)])
            .unwrap();
        assert!(r.accepted);
        assert_eq!(r.residual, 0.0);

        let inst = ProblemInstance::finite_lp(2, vec![vec![1.0, 0.0], vec![-1.0, 1.0]]).unwrap();
        let r = verify_p_certificate(&inst, &[ww(Witness::Index(0), 0.5), ww(Witness::Index(1), 0.5)])
            .unwrap();
        assert!(!r.accepted);
        // ‖(0, ½)‖ / (½·1 + ½·√2)
        let expect = 0.5 / (0.5 + 0.5 * 2f64.sqrt());
        assert!((r.residual - expect).abs() < 1e-15);

        let sdp = ProblemInstance::sdp(vec![Matrix::diag(&[1.0, -1.0])]).unwrap();
        let r = verify_p_certificate(
            &sdp,
            &[ww(Witness::SdpVector(vec![1.0, 0.0]), 0.5), ww(Witness::SdpVector(vec![0.0, 1.0]), 0.5)],
        )
        .unwrap();
        assert!(r.accepted);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn p_rejects_malformed() {
        let inst = ProblemInstance::finite_lp(1, vec![vec![1.0]]).unwrap();
        assert!(matches!(verify_p_certificate(&inst, &[]), Err(CertifyError::InvalidCertificate(_))));
        assert!(matches!(
            verify_p_certificate(&inst, &[ww(Witness::Index(0), 0.0)]),
            Err(CertifyError::InvalidCertificate(_))
        ));
        assert!(matches!(
            verify_p_certificate(&inst, &[ww(Witness::Index(5), 1.0)]),
            Err(CertifyError::Oracle(OracleError::UnresolvableWitness(_)))
        ));
    }

    #[test]
    fn generator_examples() {
        let (inst, cert) =
            generate_planted(&GenerateRequest::new(InstanceKind::Lp, 2, 4, 7, PlantTarget::FeasibleD))
                .unwrap();
        let r = verify_planted(&inst, &cert).unwrap();
        assert!(r.accepted);
        assert!(r.margin.unwrap() >= DEFAULT_MARGIN - 1e-12);

        let (inst, cert) =
            generate_planted(&GenerateRequest::new(InstanceKind::Lp, 2, 4, 7, PlantTarget::FeasibleP))
                .unwrap();
        let r = verify_planted(&inst, &cert).unwrap();
        assert!(r.accepted && r.residual <= 1e-10);

        let (inst, cert) =
            generate_planted(&GenerateRequest::new(InstanceKind::Sdp, 3, 4, 1, PlantTarget::FeasibleD))
                .unwrap();
        let (ProblemInstance::Sdp { matrices, .. }, PlantedCertificate::D { y }) = (&inst, &cert) else {
            panic!()
        };
        assert!(certifying_cholesky(&sdp_aggregate(matrices, y)).unwrap().is_positive_definite());
    }

    #[test]
    fn generator_is_deterministic() {
        let req = GenerateRequest::new(InstanceKind::Socp, 3, 9, 42, PlantTarget::FeasibleD);
        let (a, ca) = generate_planted(&req).unwrap();
        let (b, cb) = generate_planted(&req).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert_eq!(ca, cb);
    }

    #[test]
    fn dstar_examples() {
        let s = vec![vec![0.99, 0.0], vec![0.0, 0.99]];
        assert!((dstar_lower_bound(&s, 2) - 0.9801).abs() < 1e-15);
        assert_eq!(dstar_lower_bound(&[vec![1.0, 0.0]], 2), 0.0);
    }

    #[test]
    fn socp_helpers() {
        assert!(socp_witness_in_cone_slice(&[0.0, 0.0, 1.0, -1.0], &[2, 2]));
        assert!(!socp_witness_in_cone_slice(&[0.0, 0.0, 1.0, -1.5], &[2, 2]));
        assert!(!socp_witness_in_cone_slice(&[0.0, 0.0, 0.0, 0.0], &[2, 2]));
        assert_eq!(socp_check_value(&[1.0, 2.0, 0.0], &[3]), Some(-1.0));
        assert_eq!(socp_check_value(&[3.0, 2.0, 0.0], &[3]), None);
    }
}
