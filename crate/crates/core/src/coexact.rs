//! The curl operator `*d` on coexact 1-forms, mode by mode.
//!
//! In the frame `𝒳 = e^z dx`, `𝒴 = e^{-z} dy`, `𝒵 = dz` a 1-form
//! `ξ = f𝒳 + g𝒴 + h𝒵` in the Fourier mode `μ` satisfies
//!
//! ```text
//! λf = -g' + g + iμ' e^z h
//! λg =  f' + f - iμ e^{-z} h
//! λh = iμ e^{-z} g - iμ' e^z f
//! ```
//!
//! and the Hodge Laplacian on coexact forms is `λ²`. For `|μ μ'| > 8` every
//! eigenvalue has `λ² > 1`, which together with the zero mode gives
//! `λ₁* = 1` once the fibers are small enough.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode1d::{count_in_window, fd_solve, fd_solve_auto, DomainSpec, EigenPair, FdSolution, OperatorSpec};
use crate::solvlat::{dual_lattice, enumerate_modes, fiber_threshold, DualMode, FiberThreshold, SolvLattice};
use crate::Complex64 as C;

/// Norm above which `λ² > 1` holds for every eigenvalue of a mode.
pub const NORM_THRESHOLD: f64 = 8.0;

/// Orbits up to this `|μ μ'|` get a numeric confirmation solve by default.
pub const DEFAULT_NORM_CUTOFF: f64 = 40.0;

pub const DEFAULT_GRID: usize = 3000;

/// The curl block of a nonzero mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CurlModeOperator {
    pub mode: DualMode,
}

impl CurlModeOperator {
    pub fn new(mode: DualMode) -> Result<Self> {
        if mode.is_zero() {
            return Err(Error::InvalidArgument("the zero mode is handled in closed form".into()));
        }
        Ok(Self { mode })
    }

    pub fn operator(&self) -> OperatorSpec {
        OperatorSpec::Curl { mu: self.mode.mu, mu_prime: self.mode.mu_prime }
    }
}

/// Coexact eigenpairs of one mode with the exact-form bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CurlModeSpectrum {
    pub mode: DualMode,
    /// Smallest `|λ|` first; `value` is `λ`, the Laplacian eigenvalue is `λ²`.
    pub pairs: Vec<EigenPair>,
    /// Near-zero eigenvalues (discrete exact forms), excluded from `pairs`.
    pub exact_forms: usize,
    /// More near-zero eigenvalues than exact forms account for.
    pub spurious_kernel: bool,
    pub boundary_states: usize,
    pub domain: DomainSpec,
}

impl CurlModeSpectrum {
    fn from_solution(mode: DualMode, sol: FdSolution) -> Self {
        Self {
            mode,
            exact_forms: sol.kernel_dim,
            spurious_kernel: sol.spurious_kernel(),
            boundary_states: sol.boundary_states,
            domain: sol.domain,
            pairs: sol.pairs,
        }
    }

    /// `min λ²` with its error, if any pair was computed.
    pub fn min_lambda_sq(&self) -> Option<(f64, f64)> {
        self.pairs
            .iter()
            .map(|p| (p.value * p.value, 2.0 * p.value.abs() * p.error_estimate))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }
}

pub fn coexact_mode_spectrum(mode: &DualMode, k: usize, dom: &DomainSpec) -> Result<CurlModeSpectrum> {
    let op = CurlModeOperator::new(*mode)?.operator();
    Ok(CurlModeSpectrum::from_solution(*mode, fd_solve(&op, dom, k)?))
}

/// As [`coexact_mode_spectrum`] with the truncation chosen from the potential.
pub fn coexact_mode_spectrum_auto(mode: &DualMode, k: usize, grid: usize) -> Result<CurlModeSpectrum> {
    let op = CurlModeOperator::new(*mode)?.operator();
    Ok(CurlModeSpectrum::from_solution(*mode, fd_solve_auto(&op, grid, k)?))
}

/// Residuals of the second-order identities satisfied by a coexact eigenform,
/// each relative to the size of its terms:
///
/// ```text
/// Δ_μ f = (λ² - 1) f + 2iμ e^{-z} h
/// Δ_μ g = (λ² - 1) g - 2iμ' e^z h
/// Δ_μ h = λ² h - 2iμ e^{-z} f + 2iμ' e^z g
/// ```
///
/// with `Δ_μ = -∂² + μ² e^{-2z} + μ'² e^{2z}`. Evaluated with second
/// differences on the grid of `pair`, so they decay like `h²`.
pub fn second_order_residuals(mode: &DualMode, pair: &EigenPair) -> Result<[f64; 3]> {
    let get = |label: &str| {
        pair.component(label)
            .ok_or_else(|| Error::InvalidArgument(format!("eigenpair has no component {label}")))
    };
    let (f, g, h) = (get("f")?, get("g")?, get("h")?);
    if g.values.len() < 4 || f.values.len() + 1 != g.values.len() {
        return Err(Error::InvalidArgument("not a curl eigenpair".into()));
    }
    let step = g.z[1] - g.z[0];
    let (mu, mp) = (mode.mu, mode.mu_prime);
    let lam2 = pair.grid_value * pair.grid_value;
    let i = C::new(0.0, 1.0);
    let phi = |z: f64| mu * mu * (-2.0 * z).exp() + mp * mp * (2.0 * z).exp();

    // g and h share the half nodes; f lives on the nodes between them.
    let n = g.values.len();
    let f_half = |j: usize| -> C {
        let left = if j == 0 { C::new(0.0, 0.0) } else { f.values[j - 1] };
        let right = if j + 1 == n { C::new(0.0, 0.0) } else { f.values[j] };
        0.5 * (left + right)
    };
    let h_node = |j: usize| 0.5 * (h.values[j] + h.values[j + 1]);

    let mut acc = [[0.0f64; 2]; 3];
    let mut add = |slot: usize, res: C, scale: f64| {
        acc[slot][0] += res.norm_sqr();
        acc[slot][1] += scale * scale;
    };
    for j in 1..n - 1 {
        let z = g.z[j];
        let lap = |v: &[C]| -(v[j + 1] - 2.0 * v[j] + v[j - 1]) / (step * step) + v[j] * phi(z);
        let lg = lap(&g.values);
        let tg = (lam2 - 1.0) * g.values[j] - 2.0 * i * mp * z.exp() * h.values[j];
        add(1, lg - tg, lg.norm() + tg.norm());
        let lh = lap(&h.values);
        let th = lam2 * h.values[j] - 2.0 * i * mu * (-z).exp() * f_half(j) + 2.0 * i * mp * z.exp() * g.values[j];
        add(2, lh - th, lh.norm() + th.norm());
    }
    for j in 1..f.values.len() - 1 {
        let z = f.z[j];
        let v = &f.values;
        let lf = -(v[j + 1] - 2.0 * v[j] + v[j - 1]) / (step * step) + v[j] * phi(z);
        let tf = (lam2 - 1.0) * v[j] + 2.0 * i * mu * (-z).exp() * h_node(j);
        add(0, lf - tf, lf.norm() + tf.norm());
    }
    Ok(acc.map(|[r, s]| if s > 0.0 { (r / s).sqrt() } else { 0.0 }))
}

/// An analytic eigenvalue of the curl on the zero mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ZeroModeCurlLevel {
    pub lambda: f64,
    pub multiplicity: u32,
    /// Frequency `n` of `e^{2πinz/a}`.
    pub n: u32,
    pub eigenform: String,
    /// False for the harmonic form `𝒵`, which is not coexact.
    pub coexact: bool,
}

/// Zero-mode curl eigendata: `λ = 0` on `𝒵` (harmonic), `λ = ±1` on
/// `𝒳 ± 𝒴`, and `λ = ±√(1 + (2πn/a)²)` with multiplicity 2 for `n >= 1`.
///
/// For constant `(μ, μ')` the system reduces to `-g' + g = λf`,
/// `f' + f = λg`, so `f'' = (1 - λ²) f` and periodicity forces
/// `λ² = 1 + k²` with `k ∈ (2π/a)ℤ`.
pub fn coexact_zero_mode(a: f64, n_max: u32) -> Vec<ZeroModeCurlLevel> {
    let mut out = vec![ZeroModeCurlLevel {
        lambda: 0.0,
        multiplicity: 1,
        n: 0,
        eigenform: "h = const (harmonic form Z)".into(),
        coexact: false,
    }];
    for sign in [1.0, -1.0] {
        out.push(ZeroModeCurlLevel {
            lambda: sign,
            multiplicity: 1,
            n: 0,
            eigenform: if sign > 0.0 { "f = g = const, h = 0" } else { "f = -g = const, h = 0" }.into(),
            coexact: true,
        });
    }
    for n in 1..=n_max {
        let k = 2.0 * PI * n as f64 / a;
        let lam = (1.0 + k * k).sqrt();
        for sign in [1.0, -1.0] {
            out.push(ZeroModeCurlLevel {
                lambda: sign * lam,
                multiplicity: 2,
                n,
                eigenform: format!("f, g ∝ e^(±{k:.6} i z), h = 0"),
                coexact: true,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NumericEvidence {
    pub min_lambda_sq: f64,
    pub error: f64,
    /// Eigenvalues of the fine-grid matrix in `[-1, 1]` beyond the exact forms.
    pub window_excess: usize,
    pub grid: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrbitEvidence {
    pub orbit: DualMode,
    pub abs_norm: f64,
    /// `|μ μ'| > 8`, which forces `λ² > 1`.
    pub bound: bool,
    pub numeric: Option<NumericEvidence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Descent {
    /// `ξ = f𝒳 + g𝒴` of unit length with `ξ(w) = 0` at `z = 0`.
    pub f: f64,
    pub g: f64,
    /// `ξ(v)` at `z = 0`, positive by normalization.
    pub eta_v: f64,
    pub base_multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Lambda1Certificate {
    pub lambda1_star: f64,
    pub cover_multiplicity: u32,
    pub base_multiplicity: u32,
    pub scale: f64,
    pub threshold: FiberThreshold,
    /// Orbits with `|μ μ'|` above this carry bound evidence only.
    pub norm_cutoff: f64,
    pub per_mode_evidence: Vec<OrbitEvidence>,
    pub zero_mode_evidence: Vec<ZeroModeCurlLevel>,
    pub descent: Descent,
}

impl Lambda1Certificate {
    /// Smallest numerically confirmed `λ²` among nonzero orbits.
    pub fn min_numeric_lambda_sq(&self) -> Option<f64> {
        self.per_mode_evidence
            .iter()
            .filter_map(|e| e.numeric.map(|n| n.min_lambda_sq))
            .min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Lambda1Config {
    pub grid: usize,
    pub norm_cutoff: f64,
    /// Confirm every orbit up to `norm_cutoff` with a solve.
    pub numeric: bool,
}

impl Default for Lambda1Config {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID, norm_cutoff: DEFAULT_NORM_CUTOFF, numeric: true }
    }
}

fn numeric_evidence(mode: &DualMode, grid: usize) -> Result<NumericEvidence> {
    let spec = coexact_mode_spectrum_auto(mode, 2, grid)?;
    let (min_lambda_sq, error) = spec
        .min_lambda_sq()
        .ok_or_else(|| Error::InvalidArgument(format!("no eigenvalues computed for orbit ({},{})", mode.m1, mode.m2)))?;
    let op = CurlModeOperator::new(*mode)?.operator();
    let in_window = count_in_window(&op, &spec.domain, -1.0, 1.0)?;
    Ok(NumericEvidence {
        min_lambda_sq,
        error,
        window_excess: in_window.saturating_sub(spec.exact_forms),
        grid: spec.domain.grid,
        half_width: spec.domain.half_width,
    })
}

/// Certifies `λ₁* = 1` on the torus bundle of `lattice` and descends the
/// 1-eigenforms to the semibundle quotient.
pub fn certify_lambda1_star(lattice: &SolvLattice, config: &Lambda1Config) -> Result<Lambda1Certificate> {
    let dual = dual_lattice(lattice)?;
    let threshold = fiber_threshold(&dual, lattice.a)?;
    if !threshold.admits(lattice.scale) {
        return Err(Error::CertificateUnavailable(format!(
            "fiber condition fails: scale {} is not below t* = {:.12}",
            lattice.scale, threshold.t_star
        )));
    }
    let orbits = if config.numeric { enumerate_modes(&dual, lattice.a, config.norm_cutoff)? } else { Vec::new() };
    let evidence: Vec<OrbitEvidence> = orbits
        .par_iter()
        .map(|m| -> Result<OrbitEvidence> {
            let bound = m.abs_norm() > NORM_THRESHOLD;
            let numeric = numeric_evidence(m, config.grid)?;
            if numeric.min_lambda_sq <= 1.0 || numeric.window_excess > 0 {
                let msg = format!(
                    "orbit ({},{}) with |μμ'| = {:.6} has min λ² = {:.9} and {} extra eigenvalues in [-1, 1]",
                    m.m1,
                    m.m2,
                    m.abs_norm(),
                    numeric.min_lambda_sq,
                    numeric.window_excess
                );
                return Err(if bound { Error::BoundViolated(msg) } else { Error::CertificateUnavailable(msg) });
            }
            Ok(OrbitEvidence { orbit: *m, abs_norm: m.abs_norm(), bound, numeric: Some(numeric) })
        })
        .collect::<Result<_>>()?;
    if let Some(e) = evidence.iter().find(|e| !e.bound) {
        return Err(Error::CertificateUnavailable(format!(
            "orbit ({},{}) has |μμ'| = {} <= {NORM_THRESHOLD}",
            e.orbit.m1, e.orbit.m2, e.abs_norm
        )));
    }

    let n_max = 2;
    let zero = coexact_zero_mode(lattice.a, n_max);
    let cover_multiplicity: u32 =
        zero.iter().filter(|z| z.coexact && (z.lambda.abs() - 1.0).abs() < 1e-12).map(|z| z.multiplicity).sum();
    let descent = descend_to_base(lattice)?;
    Ok(Lambda1Certificate {
        lambda1_star: 1.0,
        cover_multiplicity,
        base_multiplicity: descent.base_multiplicity,
        scale: lattice.scale,
        threshold,
        norm_cutoff: if config.numeric { config.norm_cutoff } else { 0.0 },
        per_mode_evidence: evidence,
        zero_mode_evidence: zero,
        descent,
    })
}

/// The combination of `𝒳` and `𝒴` that vanishes on `w` at `z = 0`,
/// normalized to unit length with `ξ(v) > 0`. Only this line descends to the
/// quotient by the involution, so the 1-eigenspace there is one dimensional.
pub fn descend_to_base(lattice: &SolvLattice) -> Result<Descent> {
    let [wx, wy] = lattice.w;
    let len = wx.hypot(wy);
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::DegenerateDescent("w evaluates to zero on both frame forms".into()));
    }
    // At z = 0 the frame is (dx, dy), so ξ(w) = f w_x + g w_y.
    let (mut f, mut g) = (wy / len, -wx / len);
    let mut eta_v = f * lattice.v[0] + g * lattice.v[1];
    if eta_v == 0.0 {
        return Err(Error::DegenerateDescent("v is parallel to w".into()));
    }
    if eta_v < 0.0 {
        f = -f;
        g = -g;
        eta_v = -eta_v;
    }
    Ok(Descent { f, g, eta_v, base_multiplicity: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode1d::{curl_diagnostics, Boundary};
    use crate::solvlat::{anosov_eigendata, build_lattice, AnosovMatrix, BasisChoice};

    fn figure_eight(scale: f64) -> SolvLattice {
        let data = anosov_eigendata(&AnosovMatrix::figure_eight());
        build_lattice(&data, scale, BasisChoice::Canonical).unwrap()
    }

    #[test]
    fn zero_mode_branch_list() {
        let a = 2.0;
        let z = coexact_zero_mode(a, 2);
        assert_eq!(z.len(), 7);
        assert!(!z[0].coexact && z[0].lambda == 0.0);
        assert_eq!((z[1].lambda, z[2].lambda), (1.0, -1.0));
        let k = 2.0 * PI / a;
        assert!((z[3].lambda - (1.0 + k * k).sqrt()).abs() < 1e-15);
        assert_eq!(z[3].multiplicity, 2);
    }

    #[test]
    fn periodic_zero_mode_solve_matches_branches() {
        let a = (((1.0 + 5f64.sqrt()) / 2.0).powi(2)).ln();
        let dom = DomainSpec::periodic(a, 400).unwrap();
        let sol = fd_solve(&OperatorSpec::Curl { mu: 0.0, mu_prime: 0.0 }, &dom, 6).unwrap();
        assert!(matches!(sol.domain.boundary, Boundary::Periodic { .. }));
        let mut sq: Vec<f64> = sol.pairs.iter().map(|p| p.grid_value * p.grid_value).collect();
        sq.sort_by(f64::total_cmp);
        assert!((sq[0] - 1.0).abs() < 1e-12 && (sq[1] - 1.0).abs() < 1e-12);
        let k = 2.0 * PI / a;
        for v in &sq[2..6] {
            assert!((v - (1.0 + k * k)).abs() < 1e-3 * (1.0 + k * k));
        }
    }

    #[test]
    fn large_norm_mode_above_one() {
        let m = DualMode::from_components(4.0, 3.0);
        let s = coexact_mode_spectrum_auto(&m, 4, 1200).unwrap();
        assert!(!s.spurious_kernel);
        let (l2, _) = s.min_lambda_sq().unwrap();
        assert!(l2 > 1.0);
        for p in &s.pairs {
            let dom = s.domain;
            let d = curl_diagnostics(m.mu, m.mu_prime, &dom, p).unwrap();
            assert!(d.coclosed_residual < 1e-6);
            assert!((d.hodge_rayleigh - p.grid_value * p.grid_value).abs() < 1e-6 * d.hodge_rayleigh);
        }
    }

    #[test]
    fn second_order_identities_converge() {
        let m = DualMode::from_components(2.0, 1.5);
        let coarse = coexact_mode_spectrum_auto(&m, 1, 800).unwrap();
        let dom = coarse.domain.with_grid(1600);
        let fine = coexact_mode_spectrum(&m, 1, &dom).unwrap();
        let rc = second_order_residuals(&m, &coarse.pairs[0]).unwrap();
        let rf = second_order_residuals(&m, &fine.pairs[0]).unwrap();
        for k in 0..3 {
            assert!(rf[k] < 1e-3, "residual {k}: {}", rf[k]);
            let ratio = rc[k] / rf[k];
            assert!(ratio > 3.0, "residual {k} ratio {ratio}");
        }
    }

    #[test]
    fn descent_normalization() {
        let l = figure_eight(0.9);
        let d = descend_to_base(&l).unwrap();
        assert!((d.f.hypot(d.g) - 1.0).abs() < 1e-15);
        assert!((d.f * l.w[0] + d.g * l.w[1]).abs() < 1e-14);
        assert!(d.eta_v > 0.0);
        assert_eq!(d.base_multiplicity, 1);
        let flipped = SolvLattice { w: [-l.w[0], -l.w[1]], ..l.clone() };
        let e = descend_to_base(&flipped).unwrap();
        assert!((e.f - d.f).abs() < 1e-15 && (e.g - d.g).abs() < 1e-15);
        let broken = SolvLattice { w: [0.0, 0.0], ..l };
        assert!(matches!(descend_to_base(&broken), Err(Error::DegenerateDescent(_))));
    }

    #[test]
    fn certificate_requires_small_fibers() {
        let l = figure_eight(2.0);
        let err = certify_lambda1_star(&l, &Lambda1Config::default()).unwrap_err();
        assert!(matches!(err, Error::CertificateUnavailable(_)));
    }

    #[test]
    fn certificate_at_small_scale() {
        let l = figure_eight(0.9);
        let cfg = Lambda1Config { grid: 600, norm_cutoff: 15.0, numeric: true };
        let c = certify_lambda1_star(&l, &cfg).unwrap();
        assert_eq!(c.lambda1_star, 1.0);
        assert_eq!(c.cover_multiplicity, 2);
        assert_eq!(c.base_multiplicity, 1);
        assert!(!c.per_mode_evidence.is_empty());
        assert!(c.per_mode_evidence.iter().all(|e| e.bound && e.numeric.unwrap().min_lambda_sq > 1.0));
    }
}
