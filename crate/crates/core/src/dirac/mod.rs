//! The Dirac operator of the left-invariant spin structure, mode by mode.
//!
//! On a Fourier mode `μ` a harmonic spinor `(f, g)` solves
//!
//! ```text
//! f' = (μ e^{-z} - iμ' e^z) g
//! g' = (μ e^{-z} + iμ' e^z) f
//! ```
//!
//! which preserves `|f|² - |g|²` and commutes with `(f, g) -> (ḡ, f̄)`, so a
//! decaying solution can be taken with `g = f̄`. Then `A = e^{-z/2} Re f`
//! solves `A'' = Ψ A` with `Ψ = ¼ + μ² e^{-2z} + μ'² e^{2z} - 2μ e^{-z}`,
//! and `e^{-z/2} Im f` the same equation with `+2μ`. Positivity of either
//! potential rules out a kernel.

pub mod clifford;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode1d::{
    auto_domain, gl2_integrate, positivity_certificate, Certificate, CertificateConfig, Location, OperatorSpec,
    PotentialSpec,
};
use crate::solvlat::{odd_modes_under, twisted_modes, DualMode, SolvLattice, SpinLabel, SpinStructure};
use crate::Complex64 as C;

/// Smallest normalized mismatch determinant accepted as "no kernel".
pub const DEFAULT_DET_FLOOR: f64 = 1e-6;
/// Largest accepted relative drift of `|f|² - |g|²`.
pub const DRIFT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_NORM_CUTOFF: f64 = 12.0;

/// Frame-component kernel equations of a nonzero mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiracModeOperator {
    pub mode: DualMode,
}

impl DiracModeOperator {
    pub fn new(mode: DualMode) -> Result<Self> {
        if mode.is_zero() {
            return Err(Error::InvalidArgument("the zero mode is handled in closed form".into()));
        }
        Ok(Self { mode })
    }

    /// The self-adjoint block for eigenvalue solves.
    pub fn operator(&self) -> OperatorSpec {
        OperatorSpec::Dirac { mu: self.mode.mu, mu_prime: self.mode.mu_prime }
    }

    /// `M(z)` with `(f, g)' = M (f, g)` on the kernel.
    pub fn kernel_matrix(&self, z: f64) -> [[C; 2]; 2] {
        let a = self.mode.mu * (-z).exp();
        let b = self.mode.mu_prime * z.exp();
        let zero = C::new(0.0, 0.0);
        [[zero, C::new(a, -b)], [C::new(a, b), zero]]
    }
}

/// `Ψ = ¼ + μ² e^{-2z} + μ'² e^{2z} - 2μ e^{-z}`.
pub fn dirac_reduction_potential(mode: &DualMode) -> PotentialSpec {
    reduction(mode, -2.0)
}

/// The same with `+2μ e^{-z}`, governing `Im f`.
pub fn dirac_companion_potential(mode: &DualMode) -> PotentialSpec {
    reduction(mode, 2.0)
}

fn reduction(mode: &DualMode, linear: f64) -> PotentialSpec {
    let (mu, mp) = (mode.mu, mode.mu_prime);
    PotentialSpec::exp_sum(&[(mu * mu, -2), (mp * mp, 2), (linear * mu, -1)], 0.25)
}

/// `|μ μ'|` above which `Ψ > 0` for every mode: for `μ > 0`, with
/// `x = μ e^{-z}`, `Ψ = (x - 1)² + N²/x² - ¾`, whose minimum is increasing in
/// `N`; for `μ < 0` every term of `Ψ` is positive.
pub fn bulk_threshold() -> f64 {
    // min over x of (x-1)² + N²/x² is at the positive root of x⁴ - x³ = N².
    let min_value = |n: f64| {
        let (mut lo, mut hi) = (1.0f64, 2.0f64 + n.sqrt());
        for _ in 0..200 {
            let x = 0.5 * (lo + hi);
            if x.powi(4) - x.powi(3) < n * n {
                lo = x;
            } else {
                hi = x;
            }
        }
        let x = 0.5 * (lo + hi);
        (x - 1.0).powi(2) + n * n / (x * x) - 0.75
    };
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    for _ in 0..200 {
        let n = 0.5 * (lo + hi);
        if min_value(n) > 0.0 {
            hi = n;
        } else {
            lo = n;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum KernelEvidence {
    /// The zero mode: `f' = g' = 0`, constant spinors.
    Constants,
    /// `inf Ψ > 0`.
    Positivity { min: f64, argmin: Location },
    /// Decaying solutions from the two ends stay independent.
    #[serde(rename_all = "camelCase")]
    Mismatch { min_abs_det: f64, matching_points: usize },
    /// `inf` of the `+2μ` companion potential is positive.
    CompanionPositivity { min: f64, argmin: Location },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModeKernel {
    pub mode: DualMode,
    pub kernel_dim: u32,
    pub evidence: KernelEvidence,
    /// Minimum of `Ψ`, or the value at the witness when it is not positive.
    pub reduction_min: f64,
    /// Normalized mismatch determinant, when computed.
    pub mismatch_det: Option<f64>,
    /// Largest relative drift of `|f|² - |g|²` over all integrations.
    pub max_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiracConfig {
    pub det_floor: f64,
    pub norm_cutoff: f64,
    /// Run the matching determinant even when a potential is positive.
    pub always_match: bool,
}

impl Default for DiracConfig {
    fn default() -> Self {
        Self { det_floor: DEFAULT_DET_FLOOR, norm_cutoff: DEFAULT_NORM_CUTOFF, always_match: true }
    }
}

/// Normalized determinant of the two decaying solutions at matching points
/// around the balance point, and the worst conservation drift.
pub fn mismatch_determinant(mode: &DualMode) -> Result<(f64, usize, f64)> {
    let op = DiracModeOperator::new(*mode)?;
    let confining = PotentialSpec::mode(mode.mu, mode.mu_prime);
    let center = mode.balance_point();
    let dom = auto_domain(&confining, center, 1.0, 64)?;
    let (lo, hi) = (dom.lower(), dom.upper());
    let size = |z: f64| confining.value(z).sqrt();
    let step = |z: f64| (0.05 / size(z).max(1.0)).min(0.01);
    // Eigenvectors of M for ±|B|: growing into the interior from each end.
    let start = |z: f64, sign: f64| -> [C; 2] {
        let m = op.kernel_matrix(z);
        let b = m[0][1];
        [b / (sign * b.norm()), C::new(1.0, 0.0)]
    };
    let points = [center - 1.0, center, center + 1.0];
    let mut min_det = f64::INFINITY;
    let mut drift = 0.0f64;
    for &zm in &points {
        let left = gl2_integrate(|z| op.kernel_matrix(z), start(lo, 1.0), lo, zm, step)?;
        let right = gl2_integrate(|z| op.kernel_matrix(z), start(hi, -1.0), hi, zm, step)?;
        drift = drift.max(left.max_drift).max(right.max_drift);
        let (l, r) = (left.end, right.end);
        let det = (l[0] * r[1] - l[1] * r[0]).norm();
        min_det = min_det.min(det);
    }
    Ok((min_det, points.len(), drift))
}

/// Kernel dimension of one nonzero mode with its evidence.
pub fn dirac_mode_kernel(mode: &DualMode, config: &DiracConfig) -> Result<ModeKernel> {
    DiracModeOperator::new(*mode)?;
    let cert_cfg = CertificateConfig::default();
    let psi = positivity_certificate(&dirac_reduction_potential(mode), &cert_cfg)?;
    let reduction_min = match psi {
        Certificate::Positive { min, .. } => min,
        Certificate::NotPositive { value, .. } => value,
    };
    let matched = if config.always_match || !psi.is_positive() { Some(mismatch_determinant(mode)?) } else { None };
    let max_drift = matched.map_or(0.0, |m| m.2);
    if max_drift > DRIFT_TOLERANCE {
        return Err(Error::Inconclusive(format!(
            "conservation drift {max_drift:e} exceeds {DRIFT_TOLERANCE:e} for mode ({},{})",
            mode.m1, mode.m2
        )));
    }
    let mismatch_det = matched.map(|m| m.0);
    let base = |evidence| ModeKernel { mode: *mode, kernel_dim: 0, evidence, reduction_min, mismatch_det, max_drift };

    if let Certificate::Positive { min, argmin } = psi {
        if let Some(det) = mismatch_det {
            if det <= config.det_floor {
                return Err(Error::Inconclusive(format!(
                    "Ψ > 0 but mismatch determinant {det:e} is below the floor for mode ({},{})",
                    mode.m1, mode.m2
                )));
            }
        }
        return Ok(base(KernelEvidence::Positivity { min, argmin }));
    }
    if let Some((det, points, _)) = matched {
        if det > config.det_floor {
            return Ok(base(KernelEvidence::Mismatch { min_abs_det: det, matching_points: points }));
        }
    }
    match positivity_certificate(&dirac_companion_potential(mode), &cert_cfg)? {
        Certificate::Positive { min, argmin } => Ok(base(KernelEvidence::CompanionPositivity { min, argmin })),
        Certificate::NotPositive { .. } => Err(Error::Inconclusive(format!(
            "no evidence for mode ({},{}): Ψ not positive and mismatch determinant below floor",
            mode.m1, mode.m2
        ))),
    }
}

/// Which spinor sections a report covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum KernelStructure {
    Spin { structure: SpinStructure },
    /// Sections of the standard structure on a cover that change sign under
    /// translation by `u`.
    OddUnder { u: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelReport {
    pub structure: KernelStructure,
    pub per_mode: Vec<ModeKernel>,
    pub total_kernel_dim: u32,
    /// Modes were listed up to this `|μ μ'|`; above it `Ψ > 0` by the bulk bound.
    pub norm_cutoff: f64,
    pub bulk_threshold: f64,
    /// Errors of modes that could not be decided, as `(m1, m2, message)`.
    pub inconclusive: Vec<(i64, i64, String)>,
    pub max_drift: f64,
}

impl KernelReport {
    pub fn is_conclusive(&self) -> bool {
        self.inconclusive.is_empty()
    }
}

fn kernel_report(structure: KernelStructure, modes: Vec<DualMode>, cutoff: f64, config: &DiracConfig) -> KernelReport {
    let results: Vec<std::result::Result<ModeKernel, (DualMode, Error)>> = modes
        .par_iter()
        .map(|m| {
            if m.is_zero() {
                Ok(ModeKernel {
                    mode: *m,
                    kernel_dim: 2,
                    evidence: KernelEvidence::Constants,
                    reduction_min: 0.25,
                    mismatch_det: None,
                    max_drift: 0.0,
                })
            } else {
                dirac_mode_kernel(m, config).map_err(|e| (*m, e))
            }
        })
        .collect();
    let mut per_mode = Vec::new();
    let mut inconclusive = Vec::new();
    for r in results {
        match r {
            Ok(k) => per_mode.push(k),
            Err((m, e)) => inconclusive.push((m.m1, m.m2, e.to_string())),
        }
    }
    let total_kernel_dim = per_mode.iter().map(|k| k.kernel_dim).sum();
    let max_drift = per_mode.iter().map(|k| k.max_drift).fold(0.0, f64::max);
    KernelReport {
        structure,
        per_mode,
        total_kernel_dim,
        norm_cutoff: cutoff,
        bulk_threshold: bulk_threshold(),
        inconclusive,
        max_drift,
    }
}

/// Harmonic spinors of `spin` on the torus bundle of `lattice`. Modes up to
/// `max(norm_cutoff, bulk threshold)` are checked one by one.
pub fn dirac_kernel(lattice: &SolvLattice, spin: &SpinStructure, config: &DiracConfig) -> Result<KernelReport> {
    let cutoff = config.norm_cutoff.max(bulk_threshold());
    let modes = twisted_modes(lattice, spin, cutoff)?;
    if spin.label == SpinLabel::Base && modes.first().map_or(true, |m| !m.is_zero()) {
        return Err(Error::InvalidTwist("base structure without the zero mode".into()));
    }
    Ok(kernel_report(KernelStructure::Spin { structure: spin.clone() }, modes, cutoff, config))
}

/// Harmonic spinors of the standard structure on `cover` that change sign
/// under translation by `u`.
pub fn dirac_kernel_odd_under(cover: &SolvLattice, u: [f64; 2], config: &DiracConfig) -> Result<KernelReport> {
    let cutoff = config.norm_cutoff.max(bulk_threshold());
    let modes = odd_modes_under(cover, u, cutoff)?;
    Ok(kernel_report(KernelStructure::OddUnder { u }, modes, cutoff, config))
}
