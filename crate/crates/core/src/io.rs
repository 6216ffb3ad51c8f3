//! JSON problem files, certificate files, and solve reports.
//!
//! Every document carries `"schema": 1`. Matrices are row-major and may be
//! given either as nested rows or as one flat array.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{CertificateKind, PlantedCertificate, VerificationReport};
use crate::linalg::Matrix;
use crate::oracle::{InstanceError, ProblemInstance};
use crate::solver::{Counters, Outcome, SolveOutcome, WeightedWitness};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("custom oracles have no file representation")]
    NotSerializable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixData {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl MatrixData {
    fn to_matrix(&self, rows: usize, cols: usize, what: &str) -> Result<Matrix, IoError> {
        let shape_err = || IoError::Shape(format!("{what} must be {rows}×{cols}"));
        match self {
            MatrixData::Rows(r) => {
                if r.len() != rows || r.iter().any(|row| row.len() != cols) {
                    return Err(shape_err());
                }
                Ok(Matrix::from_rows(r).map_err(|_| shape_err())?)
            }
            MatrixData::Flat(d) => Matrix::from_row_major(rows, cols, d.clone()).map_err(|_| shape_err()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProblemBody {
    Lp {
        m: usize,
        columns: Vec<Vec<f64>>,
    },
    Sdp {
        m: usize,
        n: usize,
        matrices: Vec<MatrixData>,
    },
    Socp {
        m: usize,
        blocks: Vec<usize>,
        #[serde(rename = "A")]
        a: MatrixData,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(flatten)]
    pub body: ProblemBody,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn check_schema(schema: u32) -> Result<(), IoError> {
    if schema == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(IoError::Schema(schema))
    }
}

impl ProblemFile {
    pub fn to_instance(&self) -> Result<ProblemInstance, IoError> {
        check_schema(self.schema)?;
        match &self.body {
            ProblemBody::Lp { m, columns } => Ok(ProblemInstance::finite_lp(*m, columns.clone())?),
            ProblemBody::Sdp { m, n, matrices } => {
                if matrices.len() != *m {
                    return Err(IoError::Shape(format!("expected {m} matrices, got {}", matrices.len())));
                }
                let mats = matrices
                    .iter()
                    .enumerate()
                    .map(|(i, d)| d.to_matrix(*n, *n, &format!("matrix {i}")))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ProblemInstance::sdp(mats)?)
            }
            ProblemBody::Socp { m, blocks, a } => {
                let cols: usize = blocks.iter().sum();
                Ok(ProblemInstance::socp(a.to_matrix(*m, cols, "A")?, blocks.clone())?)
            }
        }
    }

    pub fn from_instance(instance: &ProblemInstance) -> Result<ProblemFile, IoError> {
        let body = match instance {
            ProblemInstance::FiniteLp { m, columns } => ProblemBody::Lp { m: *m, columns: columns.clone() },
            ProblemInstance::Sdp { m, n, matrices } => ProblemBody::Sdp {
                m: *m,
                n: *n,
                matrices: matrices.iter().map(|a| MatrixData::Rows(a.to_rows())).collect(),
            },
            ProblemInstance::Socp { a, blocks } => ProblemBody::Socp {
                m: a.rows(),
                blocks: blocks.clone(),
                a: MatrixData::Rows(a.to_rows()),
            },
            ProblemInstance::Custom(_) => return Err(IoError::NotSerializable),
        };
        Ok(ProblemFile { schema: SCHEMA_VERSION, body })
    }
}

pub fn parse_problem(bytes: &[u8]) -> Result<ProblemInstance, IoError> {
    serde_json::from_slice::<ProblemFile>(bytes)?.to_instance()
}

/// A `y` for (D) or weights for (P).
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    D { y: Vec<f64> },
    P { weights: Vec<WeightedWitness> },
}

impl From<PlantedCertificate> for Certificate {
    fn from(c: PlantedCertificate) -> Self {
        match c {
            PlantedCertificate::D { y } => Certificate::D { y },
            PlantedCertificate::P { weights } => Certificate::P { weights },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<CertificateKind>,
    /// Present when the document is a solve report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<WeightedWitness>>,
}

impl CertificateFile {
    pub fn new(cert: &Certificate) -> Self {
        let (kind, y, weights) = match cert {
            Certificate::D { y } => (CertificateKind::D, Some(y.clone()), None),
            Certificate::P { weights } => (CertificateKind::P, None, Some(weights.clone())),
        };
        CertificateFile { schema: SCHEMA_VERSION, kind: Some(kind), status: None, y, weights }
    }

    pub fn to_certificate(&self) -> Result<Certificate, IoError> {
        check_schema(self.schema)?;
        let cert = match (&self.y, &self.weights) {
            (Some(y), None) => Certificate::D { y: y.clone() },
            (None, Some(w)) => Certificate::P { weights: w.clone() },
            (Some(_), Some(_)) => return Err(IoError::Shape("certificate has both y and weights".into())),
            (None, None) => return Err(IoError::Shape("certificate has neither y nor weights".into())),
        };
        let actual = match cert {
            Certificate::D { .. } => CertificateKind::D,
            Certificate::P { .. } => CertificateKind::P,
        };
        if self.kind.is_some_and(|k| k != actual) {
            return Err(IoError::Shape("certificate kind does not match its contents".into()));
        }
        Ok(cert)
    }
}

/// Accepts a certificate file or a solve report carrying `y` or `weights`.
pub fn parse_certificate(bytes: &[u8]) -> Result<Certificate, IoError> {
    serde_json::from_slice::<CertificateFile>(bytes)?.to_certificate()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Feasible,
    DualCertificate,
    EpsilonDeclared,
}

impl Status {
    pub fn of(outcome: &Outcome) -> Status {
        match outcome {
            Outcome::FeasibleD { .. } => Status::Feasible,
            Outcome::DualP { .. } => Status::DualCertificate,
            Outcome::EpsilonDeclared => Status::EpsilonDeclared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: u32,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<WeightedWitness>>,
    pub epsilon: f64,
    pub s_star: usize,
    pub counters: Counters,
    /// Absent for `epsilon_declared`, which has no witness to check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
    /// Only with `--timing`; omitted by default so reports are reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl SolveReport {
    pub fn new(solve: &SolveOutcome, verification: Option<VerificationReport>, timing: bool) -> Self {
        let (y, weights) = match &solve.outcome {
            Outcome::FeasibleD { y } => (Some(y.clone()), None),
            Outcome::DualP { weights } => (None, Some(weights.clone())),
            Outcome::EpsilonDeclared => (None, None),
        };
        SolveReport {
            schema: SCHEMA_VERSION,
            status: Status::of(&solve.outcome),
            y,
            weights,
            epsilon: solve.epsilon,
            s_star: solve.s_star,
            counters: solve.counters,
            verification,
            wall_ms: timing.then_some(solve.wall.as_secs_f64() * 1e3),
        }
    }
}

/// Serializes with `indent` spaces per level, or on one line when `indent` is 0.
pub fn to_json<T: Serialize>(value: &T, indent: usize) -> String {
    let mut out = Vec::new();
    if indent == 0 {
        serde_json::to_writer(&mut out, value).expect("in-memory serialization");
    } else {
        let pad = vec![b' '; indent];
        let fmt = serde_json::ser::PrettyFormatter::with_indent(&pad);
        let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
        value.serialize(&mut ser).expect("in-memory serialization");
    }
    String::from_utf8(out).expect("serde_json emits UTF-8")
}
