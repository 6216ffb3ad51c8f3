//! Separation oracles.
//!
//! A problem is a family of vectors `{a_t : t ∈ T} ⊂ ℝᵐ` and we look for `y`
//! with `a_tᵀy > 0` for every `t`. The index set may be infinite, so the
//! solver only ever talks to it through [`SeparationOracle::query`], which
//! either returns some `t` with `a_tᵀy ≤ 0` or certifies that no such `t`
//! exists.
//!
//! Built-in families:
//!
//! * finite LP: the columns of a matrix,
//! * SDP: `y ↦ Σ yᵢAᵢ ≻ 0`, indexed by unit vectors `v` with `(a_v)ᵢ = vᵀAᵢv`,
//! * SOCP: `Aᵀy ∈ int 𝒦`, indexed by `v ∈ 𝒦 ∩ ℒ` with `a_v = A v`
//!   (rows of `A` are the constraint vectors `aᵢ ∈ ℝⁿ`),
//! * custom callbacks for anything else.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, certifying_cholesky, Definiteness, LinalgError, Matrix};

/// Slack allowed when checking a separation by a different evaluation route
/// than the one the oracle used, relative to `‖a‖‖y‖`.
pub const SOUNDNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid query point: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("oracle returned column with aᵀy = {value:e} > 0")]
    ContractViolation { value: f64 },
    #[error("witness does not belong to this instance: {0}")]
    UnresolvableWitness(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("dimension m must be at least 1")]
    EmptyDimension,
    #[error("{0}")]
    Shape(String),
    #[error("column {0} is zero")]
    ZeroColumn(usize),
    #[error("matrix {index} is not symmetric (asymmetry {asymmetry:e})")]
    NonSymmetric { index: usize, asymmetry: f64 },
    #[error("non-finite entry in {0}")]
    NonFinite(String),
}

/// Index `t ∈ T` of a constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Zero-based column index of a finite LP.
    Index(usize),
    /// Unit vector `v ∈ ℝⁿ` of an SDP instance.
    SdpVector(Vec<f64>),
    /// Full-length `v ∈ ℝⁿ` of an SOCP instance: every block is either zero
    /// or of the form `(1, u)` with `‖u‖ ≤ 1`.
    SocpVector(Vec<f64>),
    /// Witness produced by a custom oracle.
    Custom { label: String, column: Vec<f64> },
}

/// A witness together with its constraint vector `a_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessedColumn {
    pub witness: Witness,
    pub column: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Separation {
    /// `columnᵀy ≤ 0`.
    Violated(WitnessedColumn),
    /// `a_tᵀy > 0` for every `t`.
    Interior,
}

impl Separation {
    pub fn is_interior(&self) -> bool {
        matches!(self, Separation::Interior)
    }
}

pub trait SeparationOracle {
    /// Dimension `m` of the query space.
    fn dim(&self) -> usize;

    /// Returns a violated constraint at `y` or certifies strict feasibility.
    fn query(&self, y: &[f64]) -> Result<Separation, OracleError>;

    /// Recomputes `a_t` for a witness, rejecting witnesses outside `T`.
    fn resolve(&self, witness: &Witness) -> Result<Vec<f64>, OracleError>;
}

pub type QueryFn = dyn Fn(&[f64]) -> Separation + Send + Sync;
pub type ResolveFn = dyn Fn(&str) -> Option<Vec<f64>> + Send + Sync;

/// Oracle backed by user callbacks, for index sets that have no finite description.
///
/// The query callback must be sound (`columnᵀy ≤ 0` on every separation); this
/// is checked on every call. Certificates are resolved through the optional
/// label resolver; without one, custom witnesses cannot be verified.
#[derive(Clone)]
pub struct CallbackOracle {
    m: usize,
    query: Arc<QueryFn>,
    resolve: Option<Arc<ResolveFn>>,
}

impl CallbackOracle {
    pub fn new(m: usize, query: impl Fn(&[f64]) -> Separation + Send + Sync + 'static) -> Self {
        CallbackOracle { m, query: Arc::new(query), resolve: None }
    }

    pub fn with_resolver(
        mut self,
        resolve: impl Fn(&str) -> Option<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.resolve = Some(Arc::new(resolve));
        self
    }
}

impl fmt::Debug for CallbackOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallbackOracle")
            .field("m", &self.m)
            .field("resolver", &self.resolve.is_some())
            .finish()
    }
}

/// A feasibility problem together with its built-in oracle.
#[derive(Debug, Clone)]
pub enum ProblemInstance {
    FiniteLp { m: usize, columns: Vec<Vec<f64>> },
    Sdp { m: usize, n: usize, matrices: Vec<Matrix> },
    Socp { a: Matrix, blocks: Vec<usize> },
    Custom(CallbackOracle),
}

impl ProblemInstance {
    pub fn finite_lp(m: usize, columns: Vec<Vec<f64>>) -> Result<Self, InstanceError> {
        if m == 0 {
            return Err(InstanceError::EmptyDimension);
        }
        if columns.is_empty() {
            return Err(InstanceError::Shape("LP instance has no columns".into()));
        }
        for (i, c) in columns.iter().enumerate() {
            if c.len() != m {
                return Err(InstanceError::Shape(format!(
                    "column {i} has length {} but m = {m}",
                    c.len()
                )));
            }
            if !linalg::all_finite(c) {
                return Err(InstanceError::NonFinite(format!("column {i}")));
            }
            if c.iter().all(|v| *v == 0.0) {
                return Err(InstanceError::ZeroColumn(i));
            }
        }
        Ok(ProblemInstance::FiniteLp { m, columns })
    }

    /// Matrices are checked for symmetry to `1e-12` relative and stored symmetrized.
    pub fn sdp(matrices: Vec<Matrix>) -> Result<Self, InstanceError> {
        let m = matrices.len();
        if m == 0 {
            return Err(InstanceError::EmptyDimension);
        }
        let n = matrices[0].rows();
        if n == 0 {
            return Err(InstanceError::Shape("SDP matrices are empty".into()));
        }
        let mut stored = Vec::with_capacity(m);
        for (i, a) in matrices.into_iter().enumerate() {
            if a.rows() != n || a.cols() != n {
                return Err(InstanceError::Shape(format!(
                    "matrix {i} is {}x{}, expected {n}x{n}",
                    a.rows(),
                    a.cols()
                )));
            }
            if !a.all_finite() {
                return Err(InstanceError::NonFinite(format!("matrix {i}")));
            }
            let asymmetry = a.asymmetry();
            if asymmetry > linalg::SYMMETRY_TOL * a.norm_inf() {
                return Err(InstanceError::NonSymmetric { index: i, asymmetry });
            }
            stored.push(a.symmetrized());
        }
        Ok(ProblemInstance::Sdp { m, n, matrices: stored })
    }

    /// `a` is `m×n`; `blocks` partitions the `n` columns into second-order cones.
    pub fn socp(a: Matrix, blocks: Vec<usize>) -> Result<Self, InstanceError> {
        if a.rows() == 0 {
            return Err(InstanceError::EmptyDimension);
        }
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(InstanceError::Shape("SOCP block sizes must be at least 1".into()));
        }
        let total = blocks
            .iter()
            .try_fold(0usize, |acc, &b| acc.checked_add(b))
            .ok_or_else(|| InstanceError::Shape("block sizes overflow".into()))?;
        if total != a.cols() {
            return Err(InstanceError::Shape(format!(
                "block sizes sum to {total} but A has {} columns",
                a.cols()
            )));
        }
        if !a.all_finite() {
            return Err(InstanceError::NonFinite("A".into()));
        }
        Ok(ProblemInstance::Socp { a, blocks })
    }

    pub fn custom(oracle: CallbackOracle) -> Result<Self, InstanceError> {
        if oracle.m == 0 {
            return Err(InstanceError::EmptyDimension);
        }
        Ok(ProblemInstance::Custom(oracle))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ProblemInstance::FiniteLp { .. } => "lp",
            ProblemInstance::Sdp { .. } => "sdp",
            ProblemInstance::Socp { .. } => "socp",
            ProblemInstance::Custom(_) => "custom",
        }
    }
}

/// Smallest index `i` with `a_iᵀy ≤ 0`.
pub fn lp_query(columns: &[Vec<f64>], y: &[f64]) -> Separation {
    for (i, c) in columns.iter().enumerate() {
        if linalg::dot(c, y) <= 0.0 {
            return Separation::Violated(WitnessedColumn {
                witness: Witness::Index(i),
                column: c.clone(),
            });
        }
    }
    Separation::Interior
}

/// `X = Σ yᵢAᵢ`.
pub fn sdp_aggregate(matrices: &[Matrix], y: &[f64]) -> Matrix {
    let n = matrices[0].rows();
    let mut x = Matrix::zeros(n, n);
    for (a, yi) in matrices.iter().zip(y) {
        if *yi != 0.0 {
            x.add_scaled(*yi, a);
        }
    }
    x
}

/// `(vᵀAᵢv)ᵢ`.
pub fn sdp_column(matrices: &[Matrix], v: &[f64]) -> Vec<f64> {
    matrices.iter().map(|a| a.quad_form(v)).collect()
}

/// Certifying Cholesky on `Σ yᵢAᵢ`; a failed pivot yields `v` and the column `(vᵀAᵢv)ᵢ`.
pub fn sdp_query(matrices: &[Matrix], y: &[f64]) -> Result<Separation, OracleError> {
    let x = sdp_aggregate(matrices, y);
    match certifying_cholesky(&x)? {
        Definiteness::PositiveDefinite { .. } => Ok(Separation::Interior),
        Definiteness::NotPositiveDefinite { v, .. } => {
            let column = sdp_column(matrices, &v);
            Ok(Separation::Violated(WitnessedColumn { witness: Witness::SdpVector(v), column }))
        }
    }
}

/// Offsets of each block within `ℝⁿ`.
pub fn block_ranges(blocks: &[usize]) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
    blocks.iter().scan(0usize, |start, &len| {
        let r = *start..*start + len;
        *start += len;
        Some(r)
    })
}

/// The first block of `x` not in the interior of its cone, with the witness
/// block `(1, −x̃/‖x̃‖)` (or `(1, 0, …, 0)` when `x̃ = 0`), or `None` if every
/// block is strictly inside.
pub fn socp_separate(x: &[f64], blocks: &[usize]) -> Option<(std::ops::Range<usize>, Vec<f64>)> {
    for range in block_ranges(blocks) {
        let blk = &x[range.clone()];
        let tail_norm = linalg::norm(&blk[1..]);
        if blk[0] > tail_norm {
            continue;
        }
        let mut v = vec![0.0; blk.len()];
        v[0] = 1.0;
        if tail_norm > 0.0 {
            for (vi, xi) in v[1..].iter_mut().zip(&blk[1..]) {
                *vi = -xi / tail_norm;
            }
        }
        return Some((range, v));
    }
    None
}

/// Checks `x = Aᵀy` block by block; the witness is zero outside the separating block.
pub fn socp_query(a: &Matrix, blocks: &[usize], y: &[f64]) -> Separation {
    let x = a.tr_mul_vec(y);
    match socp_separate(&x, blocks) {
        None => Separation::Interior,
        Some((range, vb)) => {
            let mut v = vec![0.0; a.cols()];
            v[range].copy_from_slice(&vb);
            let column = a.mul_vec(&v);
            Separation::Violated(WitnessedColumn { witness: Witness::SocpVector(v), column })
        }
    }
}

fn check_query_point(m: usize, y: &[f64]) -> Result<(), OracleError> {
    if y.len() != m {
        return Err(OracleError::InvalidQuery(format!("length {} but m = {m}", y.len())));
    }
    if !linalg::all_finite(y) {
        return Err(OracleError::InvalidQuery("non-finite entry".into()));
    }
    if y.iter().all(|v| *v == 0.0) {
        return Err(OracleError::InvalidQuery("y = 0".into()));
    }
    Ok(())
}

/// Accepts `columnᵀy ≤ SOUNDNESS_TOL ‖column‖‖y‖`; zero columns are never sound.
pub fn check_soundness(column: &[f64], y: &[f64]) -> Result<(), OracleError> {
    let value = linalg::dot(column, y);
    let slack = SOUNDNESS_TOL * linalg::norm(column) * linalg::norm(y);
    if value <= slack && column.iter().any(|v| *v != 0.0) && value.is_finite() {
        Ok(())
    } else {
        Err(OracleError::ContractViolation { value })
    }
}

impl SeparationOracle for ProblemInstance {
    fn dim(&self) -> usize {
        match self {
            ProblemInstance::FiniteLp { m, .. } | ProblemInstance::Sdp { m, .. } => *m,
            ProblemInstance::Socp { a, .. } => a.rows(),
            ProblemInstance::Custom(c) => c.m,
        }
    }

    fn query(&self, y: &[f64]) -> Result<Separation, OracleError> {
        check_query_point(self.dim(), y)?;
        let sep = match self {
            ProblemInstance::FiniteLp { columns, .. } => lp_query(columns, y),
            ProblemInstance::Sdp { matrices, .. } => sdp_query(matrices, y)?,
            ProblemInstance::Socp { a, blocks } => socp_query(a, blocks, y),
            ProblemInstance::Custom(c) => {
                let sep = (c.query)(y);
                if let Separation::Violated(w) = &sep {
                    if w.column.len() != c.m {
                        return Err(OracleError::ContractViolation { value: f64::NAN });
                    }
                }
                sep
            }
        };
        if let Separation::Violated(w) = &sep {
            check_soundness(&w.column, y)?;
        }
        Ok(sep)
    }

    fn resolve(&self, witness: &Witness) -> Result<Vec<f64>, OracleError> {
        let bad = |msg: &str| Err(OracleError::UnresolvableWitness(msg.to_string()));
        match (self, witness) {
            (ProblemInstance::FiniteLp { columns, .. }, Witness::Index(i)) => match columns.get(*i) {
                Some(c) => Ok(c.clone()),
                None => bad("column index out of range"),
            },
            (ProblemInstance::Sdp { n, matrices, .. }, Witness::SdpVector(v)) => {
                if v.len() != *n || !linalg::all_finite(v) {
                    return bad("SDP witness has wrong length");
                }
                if (linalg::norm(v) - 1.0).abs() > 1e-9 {
                    return bad("SDP witness is not a unit vector");
                }
                Ok(sdp_column(matrices, v))
            }
            (ProblemInstance::Socp { a, blocks }, Witness::SocpVector(v)) => {
                if v.len() != a.cols() || !linalg::all_finite(v) {
                    return bad("SOCP witness has wrong length");
                }
                let mut nonzero = false;
                for range in block_ranges(blocks) {
                    let blk = &v[range];
                    if blk.iter().all(|x| *x == 0.0) {
                        continue;
                    }
                    nonzero = true;
                    if blk[0] != 1.0 || linalg::norm(&blk[1..]) > 1.0 + 1e-12 {
                        return bad("SOCP witness block is not in the cone slice");
                    }
                }
                if !nonzero {
                    return bad("SOCP witness is zero");
                }
                Ok(a.mul_vec(v))
            }
            (ProblemInstance::Custom(c), Witness::Custom { label, .. }) => {
                let Some(resolve) = &c.resolve else {
                    return bad("custom oracle has no resolver");
                };
                match resolve(label) {
                    Some(col) if col.len() == c.m => Ok(col),
                    _ => bad("label rejected by custom resolver"),
                }
            }
            _ => bad("witness kind does not match instance kind"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, m: usize) -> Vec<f64> {
        let mut v = vec![0.0; m];
        v[i] = 1.0;
        v
    }

    #[test]
    fn lp_interior_and_separation() {
        let inst = ProblemInstance::finite_lp(2, vec![e(0, 2), e(1, 2)]).unwrap();
        assert_eq!(inst.query(&[1.0, 1.0]).unwrap(), Separation::Interior);
        match inst.query(&[1.0, -1.0]).unwrap() {
            Separation::Violated(w) => {
                assert_eq!(w.witness, Witness::Index(1));
                assert_eq!(w.column, e(1, 2));
                assert_eq!(linalg::dot(&w.column, &[1.0, -1.0]), -1.0);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn lp_boundary_counts_as_violation_and_picks_smallest_index() {
        let inst = ProblemInstance::finite_lp(2, vec![e(0, 2), e(1, 2), vec![-1.0, 0.0]]).unwrap();
        match inst.query(&[0.0, -1.0]).unwrap() {
            Separation::Violated(w) => assert_eq!(w.witness, Witness::Index(0)),
            _ => panic!(),
        }
    }

    #[test]
    fn invalid_queries() {
        let inst = ProblemInstance::finite_lp(2, vec![e(0, 2)]).unwrap();
        assert!(matches!(inst.query(&[0.0, 0.0]), Err(OracleError::InvalidQuery(_))));
        assert!(matches!(inst.query(&[f64::NAN, 1.0]), Err(OracleError::InvalidQuery(_))));
        assert!(matches!(inst.query(&[1.0]), Err(OracleError::InvalidQuery(_))));
    }

    #[test]
    fn instance_validation() {
        assert_eq!(
            ProblemInstance::finite_lp(2, vec![vec![0.0, 0.0]]).unwrap_err(),
            InstanceError::ZeroColumn(0)
        );
        let nonsym = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            ProblemInstance::sdp(vec![nonsym]),
            Err(InstanceError::NonSymmetric { index: 0, .. })
        ));
        let a = Matrix::zeros(2, 3);
        assert!(ProblemInstance::socp(a.clone(), vec![2, 2]).is_err());
        assert!(ProblemInstance::socp(a.clone(), vec![3, 0]).is_err());
        assert!(ProblemInstance::socp(a, vec![1, 2]).is_ok());
    }

    #[test]
    fn sdp_examples() {
        let a1 = Matrix::diag(&[1.0, -1.0]);
        let inst = ProblemInstance::sdp(vec![a1]).unwrap();
        match inst.query(&[1.0]).unwrap() {
            Separation::Violated(w) => {
                assert_eq!(w.witness, Witness::SdpVector(vec![0.0, 1.0]));
                assert_eq!(w.column, vec![-1.0]);
            }
            _ => panic!(),
        }

        let id = ProblemInstance::sdp(vec![Matrix::identity(2)]).unwrap();
        assert!(id.query(&[1.0]).unwrap().is_interior());
        match id.query(&[-1.0]).unwrap() {
            Separation::Violated(w) => {
                assert_eq!(w.column, vec![1.0]);
                assert_eq!(linalg::dot(&w.column, &[-1.0]), -1.0);
            }
            _ => panic!(),
        }

        let two = ProblemInstance::sdp(vec![Matrix::diag(&[1.0, 0.0]), Matrix::diag(&[0.0, 1.0])])
            .unwrap();
        match two.query(&[1.0, -2.0]).unwrap() {
            Separation::Violated(w) => {
                assert_eq!(w.witness, Witness::SdpVector(vec![0.0, 1.0]));
                assert_eq!(w.column, vec![0.0, 1.0]);
                assert_eq!(linalg::dot(&w.column, &[1.0, -2.0]), -2.0);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn socp_single_block_examples() {
        // A = I₃, m = 3, so Aᵀy = y.
        let inst = ProblemInstance::socp(Matrix::identity(3), vec![3]).unwrap();
        assert!(inst.query(&[2.0, 1.0, 0.0]).unwrap().is_interior());
        match inst.query(&[1.0, 2.0, 0.0]).unwrap() {
            Separation::Violated(w) => {
                assert_eq!(w.witness, Witness::SocpVector(vec![1.0, -1.0, 0.0]));
                assert_eq!(linalg::dot(&w.column, &[1.0, 2.0, 0.0]), -1.0);
            }
            _ => panic!(),
        }
        // degenerate x̃ = 0, x₀ ≤ 0
        let x = [0.0, 0.0, 0.0];
        let (range, v) = socp_separate(&x, &[3]).unwrap();
        assert_eq!(range, 0..3);
        assert_eq!(v, vec![1.0, 0.0, 0.0]);
        assert_eq!(linalg::dot(&v, &x), 0.0);
    }

    #[test]
    fn socp_witness_zero_outside_separating_block() {
        let inst = ProblemInstance::socp(Matrix::identity(4), vec![2, 2]).unwrap();
        match inst.query(&[1.0, 0.5, -1.0, 0.0]).unwrap() {
            Separation::Violated(w) => {
                assert_eq!(w.witness, Witness::SocpVector(vec![0.0, 0.0, 1.0, 0.0]));
                assert_eq!(inst.resolve(&w.witness).unwrap(), w.column);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn resolve_rejects_foreign_witnesses() {
        let inst = ProblemInstance::finite_lp(2, vec![e(0, 2)]).unwrap();
        assert!(inst.resolve(&Witness::Index(3)).is_err());
        assert!(inst.resolve(&Witness::SdpVector(vec![1.0, 0.0])).is_err());
        let sdp = ProblemInstance::sdp(vec![Matrix::identity(2)]).unwrap();
        assert!(sdp.resolve(&Witness::SdpVector(vec![1.0, 1.0])).is_err());
        let socp = ProblemInstance::socp(Matrix::identity(3), vec![3]).unwrap();
        assert!(socp.resolve(&Witness::SocpVector(vec![1.0, 2.0, 0.0])).is_err());
        assert!(socp.resolve(&Witness::SocpVector(vec![0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn custom_oracle_contract_is_checked() {
        let liar = CallbackOracle::new(1, |_| {
            Separation::Violated(WitnessedColumn {
                witness: Witness::Custom { label: "x".into(), column: vec![1.0] },
                column: vec![1.0],
            })
        });
        let inst = ProblemInstance::custom(liar).unwrap();
        assert!(matches!(inst.query(&[1.0]), Err(OracleError::ContractViolation { .. })));
    }
}
