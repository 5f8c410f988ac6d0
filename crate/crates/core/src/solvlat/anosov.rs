use serde::{Deserialize, Serialize};

use super::intmat::{self, IntMat};
use crate::error::{Error, Result};

/// Integer monodromy of a torus bundle: `det = 1`, `|trace| > 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IntMat", into = "IntMat")]
pub struct AnosovMatrix {
    entries: IntMat,
}

impl AnosovMatrix {
    pub fn new(entries: IntMat) -> Result<Self> {
        let det = intmat::det(&entries);
        if det != 1 {
            return Err(Error::NotUnimodular { det });
        }
        let trace = intmat::trace(&entries);
        if trace.abs() <= 2 {
            return Err(Error::NotAnosov { trace: trace.abs() });
        }
        Ok(Self { entries })
    }

    /// Parses `"a,b,c,d"` (row-major).
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<i64> = text
            .split(',')
            .map(|s| s.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("matrix entry: {e}")))?;
        if parts.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "expected 4 matrix entries, got {}",
                parts.len()
            )));
        }
        Self::new([[parts[0], parts[1]], [parts[2], parts[3]]])
    }

    pub fn figure_eight() -> Self {
        Self {
            entries: [[2, 1], [1, 1]],
        }
    }

    pub fn entries(&self) -> IntMat {
        self.entries
    }

    pub fn trace(&self) -> i64 {
        intmat::trace(&self.entries)
    }
}

impl TryFrom<IntMat> for AnosovMatrix {
    type Error = Error;
    fn try_from(value: IntMat) -> Result<Self> {
        Self::new(value)
    }
}

impl From<AnosovMatrix> for IntMat {
    fn from(value: AnosovMatrix) -> Self {
        value.entries
    }
}

/// Eigendata of an Anosov matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnosovData {
    pub matrix: AnosovMatrix,
    /// Expanding eigenvalue modulus `e^a`.
    pub expansion: f64,
    /// Translation length `a = log e^a`.
    pub a: f64,
    /// Sign of the eigenvalues (the sign of the trace).
    pub sign: i64,
    /// Columns are unit eigenvectors for `sign·e^a` and `sign·e^{-a}`, `det > 0`.
    pub frame: [[f64; 2]; 2],
}

impl AnosovData {
    /// The two signed eigenvalues, expanding first.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let s = self.sign as f64;
        [s * self.expansion, s / self.expansion]
    }
}

pub fn anosov_eigendata(matrix: &AnosovMatrix) -> AnosovData {
    let m = matrix.entries();
    let t = matrix.trace();
    let disc = (t as i128 * t as i128 - 4) as f64;
    let expansion = (t.abs() as f64 + disc.sqrt()) / 2.0;
    let a = (t.abs() as f64 / 2.0).acosh();
    let sign = t.signum();
    let lambdas = [sign as f64 * expansion, sign as f64 / expansion];

    let mut cols = [[0.0; 2]; 2];
    for (col, &lam) in cols.iter_mut().zip(lambdas.iter()) {
        // (A - λ) x = 0; pick the better conditioned of the two kernel formulas.
        let c1 = [m[0][1] as f64, lam - m[0][0] as f64];
        let c2 = [lam - m[1][1] as f64, m[1][0] as f64];
        let pick = if norm2(c1) >= norm2(c2) { c1 } else { c2 };
        let n = norm2(pick);
        *col = [pick[0] / n, pick[1] / n];
    }
    if cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1] < 0.0 {
        cols[1] = [-cols[1][0], -cols[1][1]];
    }
    AnosovData {
        matrix: *matrix,
        expansion,
        a,
        sign,
        frame: [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]],
    }
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}
