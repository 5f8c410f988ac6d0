//! End-to-end report for the spectral criterion: `λ₁* >= -s̃/2 = 1` on
//! coexact 1-forms and no harmonic spinors for the twisted structure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coexact::{certify_lambda1_star, Lambda1Certificate, Lambda1Config};
use crate::dirac::{dirac_kernel, dirac_kernel_odd_under, DiracConfig, KernelReport};
use crate::error::{Error, Result};
use crate::solvlat::{
    anosov_eigendata, build_cover, build_lattice, dual_lattice, fiber_threshold, AnosovMatrix, BasisChoice, IntMat,
    SpinStructure,
};

/// Sum of the two least Ricci eigenvalues of the Solv metric.
pub const S_TILDE: f64 = -2.0;

/// Every element of `SL(2, Z/2)` has order dividing 6.
pub const COVER_POWER: u32 = 6;

/// Significant digits kept for floats in the JSON output.
const JSON_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ReportConfig {
    pub grid: usize,
    /// Orbits of the curl solved numerically up to this `|μ μ'|`.
    pub coexact_cutoff: f64,
    /// Dirac modes checked one by one up to this `|μ μ'|`.
    pub dirac_cutoff: f64,
    pub det_floor: f64,
    pub numeric_confirmation: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            grid: crate::coexact::DEFAULT_GRID,
            coexact_cutoff: crate::coexact::DEFAULT_NORM_CUTOFF,
            dirac_cutoff: crate::dirac::DEFAULT_NORM_CUTOFF,
            det_floor: crate::dirac::DEFAULT_DET_FLOOR,
            numeric_confirmation: true,
        }
    }
}

impl ReportConfig {
    /// Parses flat `key = value` lines; unknown keys are rejected.
    pub fn from_text(text: &str) -> Result<Self> {
        let table: BTreeMap<String, toml::Value> =
            toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        let mut cfg = Self::default();
        for (key, value) in &table {
            let num = || {
                value
                    .as_float()
                    .or_else(|| value.as_integer().map(|i| i as f64))
                    .ok_or_else(|| Error::InvalidArgument(format!("config: {key} must be a number")))
            };
            match key.as_str() {
                "grid" => {
                    let g = value
                        .as_integer()
                        .filter(|g| *g > 0)
                        .ok_or_else(|| Error::InvalidArgument("config: grid must be a positive integer".into()))?;
                    cfg.grid = g as usize;
                }
                "coexact_cutoff" | "cutoff" => cfg.coexact_cutoff = num()?,
                "dirac_cutoff" => cfg.dirac_cutoff = num()?,
                "det_floor" => cfg.det_floor = num()?,
                "numeric_confirmation" => {
                    cfg.numeric_confirmation = value.as_bool().ok_or_else(|| {
                        Error::InvalidArgument("config: numeric_confirmation must be true or false".into())
                    })?
                }
                other => return Err(Error::InvalidArgument(format!("config: unknown key {other}"))),
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InputEcho {
    pub matrix: IntMat,
    pub scale: f64,
    pub basis: String,
    pub v: [f64; 2],
    pub w: [f64; 2],
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Geometry {
    pub s_tilde: f64,
    /// `-s̃ / 2`.
    pub required_lambda1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Thresholds {
    pub min_norm_unit: f64,
    pub min_norm: f64,
    pub t_star: f64,
    /// `c / t²`, which must exceed 8.
    pub norm_ratio: f64,
    pub fiber_condition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Failure {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for Failure {
    fn from(e: &Error) -> Self {
        Self { kind: e.kind().to_string(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum Outcome<T> {
    Ok { result: T },
    Failed { error: Failure },
}

impl<T> Outcome<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(result) => Outcome::Ok { result },
            Err(e) => Outcome::Failed { error: Failure::from(&e) },
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok { result } => Some(result),
            Outcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiracKernels {
    pub base: Outcome<KernelReport>,
    /// Sections odd under `v` on the `⟨2v, w⟩` sublattice cover of `A⁶`.
    pub twisted: Outcome<KernelReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    CriterionSatisfied,
    NotCertified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub status: VerdictStatus,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LSpaceReport {
    pub schema_version: String,
    pub input: InputEcho,
    pub config: ReportConfig,
    /// The config file as given, if any.
    pub config_text: Option<String>,
    pub geometry: Geometry,
    pub thresholds: Thresholds,
    pub lambda1: Outcome<Lambda1Certificate>,
    pub dirac_kernels: DiracKernels,
    pub verdict: Verdict,
}

impl LSpaceReport {
    pub fn satisfied(&self) -> bool {
        self.verdict.status == VerdictStatus::CriterionSatisfied
    }

    /// Pretty JSON with floats rounded to a fixed number of significant
    /// digits, so equal inputs give identical bytes.
    pub fn to_json(&self) -> Result<String> {
        to_stable_json(self)
    }
}

/// Serializes with every float rounded to 12 significant digits.
pub fn to_stable_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::InvalidArgument(format!("json output failed: {e}")))?;
    round_floats(&mut v);
    let mut s =
        serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidArgument(format!("json output failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                let r: f64 = format!("{:.*e}", JSON_DIGITS - 1, x).parse().unwrap_or(x);
                if let Some(num) = serde_json::Number::from_f64(r) {
                    *n = num;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Runs lattice construction, the `λ₁*` certificate and both Dirac kernel
/// counts, and decides the verdict. Input errors are returned; failures of
/// the certification steps are recorded in the report.
pub fn lspace_report(
    matrix: &AnosovMatrix,
    scale: f64,
    config: &ReportConfig,
    config_text: Option<String>,
) -> Result<LSpaceReport> {
    let data = anosov_eigendata(matrix);
    let lattice = build_lattice(&data, scale, BasisChoice::Canonical)?;
    let dual = dual_lattice(&lattice)?;
    let ft = fiber_threshold(&dual, lattice.a)?;
    let thresholds = Thresholds {
        min_norm_unit: ft.min_norm_unit,
        min_norm: ft.min_norm,
        t_star: ft.t_star,
        norm_ratio: ft.min_norm,
        fiber_condition: ft.admits(scale),
    };

    let lambda_cfg = Lambda1Config {
        grid: config.grid,
        norm_cutoff: config.coexact_cutoff,
        numeric: config.numeric_confirmation,
    };
    let lambda1 = certify_lambda1_star(&lattice, &lambda_cfg);
    if let Err(e @ Error::BoundViolated(_)) = &lambda1 {
        return Err(e.clone());
    }
    let lambda1 = Outcome::from_result(lambda1);

    let dirac_cfg = DiracConfig { det_floor: config.det_floor, norm_cutoff: config.dirac_cutoff, always_match: true };
    let base = Outcome::from_result(dirac_kernel(&lattice, &SpinStructure::base(), &dirac_cfg));
    let twisted = Outcome::from_result(
        build_cover(&lattice, COVER_POWER, [[2, 0], [0, 1]])
            .and_then(|cover| dirac_kernel_odd_under(&cover, lattice.v, &dirac_cfg)),
    );

    let mut reasons = Vec::new();
    if !thresholds.fiber_condition {
        reasons.push(format!(
            "fiber condition fails: c/t^2 = {:.6} <= 8 (t = {}, t* = {:.6})",
            thresholds.norm_ratio, scale, thresholds.t_star
        ));
    }
    match &lambda1 {
        Outcome::Ok { result } if result.lambda1_star >= -S_TILDE / 2.0 => {}
        Outcome::Ok { result } => reasons.push(format!("lambda1* = {} is below 1", result.lambda1_star)),
        Outcome::Failed { error } if thresholds.fiber_condition => {
            reasons.push(format!("lambda1* not certified: {}", error.message))
        }
        Outcome::Failed { .. } => {}
    }
    match &twisted {
        Outcome::Ok { result } => {
            if !result.is_conclusive() {
                reasons.push(format!("twisted Dirac kernel: {} modes inconclusive", result.inconclusive.len()));
            } else if result.total_kernel_dim != 0 {
                reasons.push(format!("twisted Dirac kernel has dimension {}", result.total_kernel_dim));
            }
        }
        Outcome::Failed { error } => reasons.push(format!("twisted Dirac kernel failed: {}", error.message)),
    }
    let status = if reasons.is_empty() { VerdictStatus::CriterionSatisfied } else { VerdictStatus::NotCertified };

    Ok(LSpaceReport {
        schema_version: crate::SCHEMA_VERSION.to_string(),
        input: InputEcho {
            matrix: matrix.entries(),
            scale,
            basis: "canonical".into(),
            v: lattice.v,
            w: lattice.w,
            a: lattice.a,
        },
        config: *config,
        config_text,
        geometry: Geometry { s_tilde: S_TILDE, required_lambda1: -S_TILDE / 2.0 },
        thresholds,
        lambda1,
        dirac_kernels: DiracKernels { base, twisted },
        verdict: Verdict { status, reasons },
    })
}
