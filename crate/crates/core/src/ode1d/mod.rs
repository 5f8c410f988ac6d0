//! One-dimensional eigenvalue machinery for the per-mode operators.
//!
//! [`fd_hermitian_eig`] discretizes a mode operator on a truncated line (or a
//! periodic interval), solves at grids `n` and `n/2`, and reports the
//! Richardson-extrapolated eigenvalues with `|λ(n) - λ(n/2)|` as the error
//! estimate. [`shooting_eigenvalue`] is an independent oracle for scalar
//! problems, and [`positivity_certificate`] decides `inf Φ > 0` for
//! exponential and polynomial potentials.

mod blocktri;
mod discretize;
pub mod domain;
pub mod potential;
mod roots;
pub mod shooting;

use std::io::Write;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use discretize::{discretize, with_tridiag, Assembled, Discretization};
pub use domain::{auto_domain, check_truncation, Boundary, DomainSpec, AGMON_EXPONENT, SAFETY_FACTOR};
pub use potential::{positivity_certificate, Certificate, CertificateConfig, ExpTerm, Location, PotentialSpec};
pub use shooting::{gl2_integrate, matching_function, shooting_eigenvalue, Integration};

use crate::error::{Error, Result};

pub const DEFAULT_EIGEN_COUNT: usize = 8;

/// A per-mode operator on the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum OperatorSpec {
    /// `-f'' + Φ f`.
    Schrodinger { potential: PotentialSpec },
    /// Curl on the frame components `(f, g, h)`:
    /// `λf = -g' + g + iμ' e^z h`, `λg = f' + f - iμ e^{-z} h`,
    /// `λh = iμ e^{-z} g - iμ' e^z f`.
    #[serde(rename_all = "camelCase")]
    Curl { mu: f64, mu_prime: f64 },
    /// Dirac operator `[[i∂, b], [b̄, -i∂]]` with `b = -iμ e^{-z} - μ' e^z`.
    #[serde(rename_all = "camelCase")]
    Dirac { mu: f64, mu_prime: f64 },
}

impl OperatorSpec {
    pub fn schrodinger(potential: PotentialSpec) -> Self {
        OperatorSpec::Schrodinger { potential }
    }

    pub fn block_size(&self) -> usize {
        match self {
            OperatorSpec::Schrodinger { .. } => 1,
            OperatorSpec::Curl { .. } => 3,
            OperatorSpec::Dirac { .. } => 2,
        }
    }

    pub fn is_first_order(&self) -> bool {
        !matches!(self, OperatorSpec::Schrodinger { .. })
    }

    /// Potential controlling decay: `Φ` itself, or `μ² e^{-2z} + μ'² e^{2z}`
    /// for first-order blocks, whose squares behave like `-∂² + Φ`.
    pub fn confining_potential(&self) -> PotentialSpec {
        match self {
            OperatorSpec::Schrodinger { potential } => potential.clone(),
            &OperatorSpec::Curl { mu, mu_prime } | &OperatorSpec::Dirac { mu, mu_prime } => {
                PotentialSpec::mode(mu, mu_prime)
            }
        }
    }

    /// The eigenvalue in second-order units (`λ` or `λ²`).
    pub fn second_order_value(&self, lambda: f64) -> f64 {
        if self.is_first_order() {
            lambda * lambda
        } else {
            lambda
        }
    }

    /// Where the well sits: the balance point `½ ln|μ/μ'|` for modes, the
    /// minimizer of `Φ` otherwise.
    pub fn natural_center(&self) -> f64 {
        match self {
            OperatorSpec::Schrodinger { potential } => {
                match positivity_certificate(potential, &CertificateConfig::default()) {
                    Ok(Certificate::Positive { argmin: Location::At(z), .. }) => z,
                    Ok(Certificate::NotPositive { witness, .. }) if potential.is_confining() => witness,
                    _ => 0.0,
                }
            }
            &OperatorSpec::Curl { mu, mu_prime } | &OperatorSpec::Dirac { mu, mu_prime } => {
                if mu != 0.0 && mu_prime != 0.0 {
                    0.5 * (mu.abs() / mu_prime.abs()).ln()
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentSamples {
    pub label: String,
    pub z: Vec<f64>,
    pub values: Vec<C>,
}

/// An eigenvalue with its eigenfunction samples.
///
/// `value` is the extrapolation `(4λ(n) - λ(n/2)) / 3`; `grid_value` is the
/// Rayleigh quotient on the finest grid, to which `components` belong.
/// Components are normalized so that `Σ |x|² h = 1` over all samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EigenPair {
    pub value: f64,
    pub grid_value: f64,
    pub error_estimate: f64,
    pub components: Vec<ComponentSamples>,
}

impl EigenPair {
    pub fn component(&self, label: &str) -> Option<&ComponentSamples> {
        self.components.iter().find(|c| c.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FdSolution {
    pub pairs: Vec<EigenPair>,
    pub domain: DomainSpec,
    /// Eigenvalues with `|λ| <= kernel_tolerance` on the finest grid
    /// (first-order blocks only).
    pub kernel_dim: usize,
    pub expected_kernel: usize,
    pub kernel_tolerance: f64,
    /// Wall-bound states of the truncated operator skipped while collecting
    /// `pairs`.
    #[serde(default)]
    pub boundary_states: usize,
}

impl FdSolution {
    /// More near-zero eigenvalues than discrete exact forms account for.
    pub fn spurious_kernel(&self) -> bool {
        self.kernel_dim != self.expected_kernel
    }
}

struct Selected {
    values: Vec<f64>,
    kernel: usize,
    tolerance: f64,
    /// Dense path: eigenvectors come with the decomposition.
    vectors: Option<Vec<Vec<C>>>,
}

fn order_key(first_order: bool, x: f64) -> (f64, f64) {
    if first_order {
        (x.abs(), x)
    } else {
        (x, 0.0)
    }
}

/// Eigenvalues targeted by the solve: the `k` smallest, or for first-order
/// blocks the `k` smallest in modulus outside the kernel cluster.
fn select(disc: &Discretization, first_order: bool, k: usize, want_vectors: bool) -> Result<Selected> {
    let real_dim = disc.dim() - disc.padding;
    match &disc.matrix {
        Assembled::Dense(m) => {
            let eig = m.clone().symmetric_eigen();
            let mut order: Vec<usize> = (0..m.nrows()).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let bound = eig.eigenvalues.iter().fold(1.0f64, |a, b| a.max(b.abs()));
            let tol = 1e-6 * bound;
            let mut chosen: Vec<usize> = order.clone();
            let kernel = chosen.iter().filter(|&&i| eig.eigenvalues[i].abs() <= tol).count();
            if first_order {
                chosen.retain(|&i| eig.eigenvalues[i].abs() > tol);
                chosen.sort_by(|&a, &b| {
                    let (x, y) = (eig.eigenvalues[a], eig.eigenvalues[b]);
                    order_key(true, x).partial_cmp(&order_key(true, y)).unwrap()
                });
            }
            chosen.truncate(k);
            let values = chosen.iter().map(|&i| eig.eigenvalues[i]).collect();
            let vectors = want_vectors.then(|| {
                chosen.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect()
            });
            Ok(Selected { values, kernel: if first_order { kernel } else { 0 }, tolerance: tol, vectors })
        }
        other => with_tridiag!(other, m => {
            let bound = m.norm_bound().max(1.0);
            let bis_tol = 1e-12 * bound;
            if !first_order {
                let values = m.eigenvalues_by_index(0, k.min(real_dim), bis_tol);
                return Ok(Selected { values, kernel: 0, tolerance: 0.0, vectors: None });
            }
            let tol = 1e-6 * bound;
            let below_neg = m.count_below(-tol);
            let below_pos = m.count_below(tol);
            let kernel = below_pos - below_neg;
            let pos_len = k.min(real_dim.saturating_sub(below_pos));
            let mut values = m.eigenvalues_by_index(below_pos, pos_len, bis_tol);
            let neg_first = below_neg.saturating_sub(k);
            values.extend(m.eigenvalues_by_index(neg_first, below_neg - neg_first, bis_tol));
            values.sort_by(|a, b| order_key(true, *a).partial_cmp(&order_key(true, *b)).unwrap());
            values.truncate(k);
            Ok(Selected { values, kernel, tolerance: tol, vectors: None })
        }, dense _d => unreachable!()),
    }
}

fn eigenvectors(disc: &Discretization, values: &[f64]) -> Result<Vec<(f64, Vec<C>)>> {
    with_tridiag!(&disc.matrix, m => {
        let bound = m.norm_bound().max(1.0);
        let mut out: Vec<(f64, Vec<C>)> = Vec::with_capacity(values.len());
        for (i, &lam) in values.iter().enumerate() {
            let cluster: Vec<Vec<C>> = out
                .iter()
                .filter(|(mu, _)| (mu - lam).abs() <= 1e-9 * bound)
                .map(|(_, v)| v.clone())
                .collect();
            let x = m.eigenvector(lam, &cluster, i as u64 + 1)?;
            let rq = m.rayleigh(&x);
            out.push((rq, x));
        }
        Ok(out)
    }, dense _d => unreachable!())
}

/// Share of the eigenfunction's weight a boundary state must carry in the
/// forbidden zone before it is discarded.
const BOUNDARY_STATE_WEIGHT: f64 = 0.5;

/// Fraction of `|x|²` sitting where `Φ > 4(λ² + 1)`. Eigenfunctions of the
/// line decay there; states of the truncated first-order operator bound to a
/// wall do not.
fn forbidden_weight(disc: &Discretization, pot: &PotentialSpec, lambda: f64, x: &[C]) -> f64 {
    let level = SAFETY_FACTOR * (lambda * lambda + 1.0);
    let (mut inside, mut total) = (0.0, 0.0);
    for c in &disc.components {
        for (&z, &i) in c.z.iter().zip(&c.index) {
            let w = x[i].norm_sqr();
            total += w;
            if pot.value(z) > level {
                inside += w;
            }
        }
    }
    if total > 0.0 {
        inside / total
    } else {
        0.0
    }
}

struct GridSolve {
    /// Finest-grid Rayleigh quotients with their eigenvectors, solver order.
    pairs: Vec<(f64, Vec<C>)>,
    kernel: usize,
    tolerance: f64,
    boundary_states: usize,
}

fn solve_grid(op: &OperatorSpec, disc: &Discretization, k: usize) -> Result<GridSolve> {
    let first_order = op.is_first_order();
    let filter = first_order && !matches!(disc.matrix, Assembled::Dense(_));
    let pot = op.confining_potential();
    let available = disc.dim() - disc.padding;
    let mut want = if filter { k + 4 } else { k };
    loop {
        let sel = select(disc, first_order, want, true)?;
        let got = sel.values.len();
        let raw: Vec<(f64, Vec<C>)> = match sel.vectors {
            Some(vecs) => sel
                .values
                .iter()
                .zip(vecs)
                .map(|(&v, x)| {
                    let hx = disc.apply(&x);
                    let num: C = x.iter().zip(&hx).map(|(a, b)| a.conj() * b).sum();
                    let den: f64 = x.iter().map(|a| a.norm_sqr()).sum();
                    (if den > 0.0 { num.re / den } else { v }, x)
                })
                .collect(),
            None => eigenvectors(disc, &sel.values)?,
        };
        if !filter {
            return Ok(GridSolve { pairs: raw, kernel: sel.kernel, tolerance: sel.tolerance, boundary_states: 0 });
        }
        let total = raw.len();
        let pairs: Vec<(f64, Vec<C>)> = raw
            .into_iter()
            .filter(|(lam, x)| forbidden_weight(disc, &pot, *lam, x) <= BOUNDARY_STATE_WEIGHT)
            .collect();
        let removed = total - pairs.len();
        if pairs.len() >= k || got < want || want >= available {
            let mut pairs = pairs;
            pairs.truncate(k);
            return Ok(GridSolve { pairs, kernel: sel.kernel, tolerance: sel.tolerance, boundary_states: removed });
        }
        want = (2 * want).min(available);
    }
}

/// Solve on `dom`, returning `k` eigenpairs with extrapolated values, error
/// estimates and kernel bookkeeping.
///
/// For first-order blocks on a truncated line, states bound to a wall (most
/// of their weight where `Φ > 4(λ² + 1)`) are dropped and counted in
/// [`FdSolution::boundary_states`].
pub fn fd_solve(op: &OperatorSpec, dom: &DomainSpec, k: usize) -> Result<FdSolution> {
    dom.validate()?;
    if k == 0 {
        return Err(Error::InvalidArgument("eigenvalue count must be positive".into()));
    }
    if dom.grid % 2 != 0 {
        return Err(Error::InvalidArgument(format!("grid {} must be even", dom.grid)));
    }
    let first_order = op.is_first_order();
    if dom.boundary == Boundary::Dirichlet && !op.confining_potential().is_confining() {
        return Err(Error::NotConfining);
    }
    let fine = discretize(op, dom)?;
    let coarse = discretize(op, &dom.with_grid(dom.grid / 2))?;
    let sel = solve_grid(op, &fine, k)?;
    let coarse_values: Vec<f64> = solve_grid(op, &coarse, k + 2)?.pairs.into_iter().map(|(v, _)| v).collect();
    let pairs_raw = sel.pairs;

    let h = fine.step;
    let mut pairs = Vec::with_capacity(pairs_raw.len());
    for (raw, x) in pairs_raw {
        let partner = coarse_values
            .iter()
            .copied()
            .filter(|c| !first_order || c.signum() == raw.signum())
            .min_by(|a, b| (a - raw).abs().total_cmp(&(b - raw).abs()))
            .ok_or_else(|| Error::InvalidArgument("coarse grid produced no matching eigenvalue".into()))?;
        let value = (4.0 * raw - partner) / 3.0;
        let scale = 1.0 / h.sqrt();
        let samples = fine.split_vector(&x);
        let components = fine
            .components
            .iter()
            .zip(samples)
            .map(|(c, vals)| ComponentSamples {
                label: c.label.to_string(),
                z: c.z.clone(),
                values: vals.into_iter().map(|v| v * scale).collect(),
            })
            .collect();
        pairs.push(EigenPair { value, grid_value: raw, error_estimate: (raw - partner).abs(), components });
    }
    pairs.sort_by(|a, b| order_key(first_order, a.value).partial_cmp(&order_key(first_order, b.value)).unwrap());

    if dom.boundary == Boundary::Dirichlet {
        let lambda_max = pairs
            .iter()
            .map(|p| op.second_order_value(p.grid_value))
            .fold(f64::NEG_INFINITY, f64::max);
        check_truncation(&op.confining_potential(), dom, lambda_max)?;
    }
    Ok(FdSolution {
        pairs,
        domain: *dom,
        kernel_dim: sel.kernel,
        expected_kernel: fine.expected_kernel,
        kernel_tolerance: sel.tolerance,
        boundary_states: sel.boundary_states,
    })
}

/// The `k` eigenpairs of smallest eigenvalue (second-order operators) or
/// smallest `|λ|` outside the discrete kernel (first-order blocks).
pub fn fd_hermitian_eig(op: &OperatorSpec, dom: &DomainSpec, k: usize) -> Result<Vec<EigenPair>> {
    Ok(fd_solve(op, dom, k)?.pairs)
}

/// Chooses the truncation from the potential, retrying with a wider domain
/// until the computed eigenvalues lie below the level it was built for.
pub fn fd_solve_auto(op: &OperatorSpec, grid: usize, k: usize) -> Result<FdSolution> {
    let pot = op.confining_potential();
    if !pot.is_confining() {
        return Err(Error::NotConfining);
    }
    let center = op.natural_center();
    let base = pot.value(center);
    let curvature = {
        let d = 1e-3;
        ((pot.value(center + d) - 2.0 * base + pot.value(center - d)) / (d * d)).max(1.0)
    };
    let mut level = base + (2.0 * k as f64 + 1.0) * (2.0 * curvature).sqrt() + 4.0;
    let mut last_err = None;
    for _ in 0..8 {
        let dom = auto_domain(&pot, center, level, grid)?;
        match fd_solve(op, &dom, k) {
            Ok(sol) => {
                let top = sol
                    .pairs
                    .iter()
                    .map(|p| op.second_order_value(p.grid_value))
                    .fold(f64::NEG_INFINITY, f64::max);
                if top <= level {
                    return Ok(sol);
                }
                level = 1.5 * top + 1.0;
            }
            Err(Error::DomainTooSmall { boundary, required }) => {
                last_err = Some(Error::DomainTooSmall { boundary, required });
                level = 2.0 * level.max(required / SAFETY_FACTOR);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::InvalidArgument("automatic truncation did not settle".into())))
}

/// Number of eigenvalues of the fine-grid matrix in `[lo, hi]`, not counting
/// wall-bound states of first-order blocks (see [`fd_solve`]).
pub fn count_in_window(op: &OperatorSpec, dom: &DomainSpec, lo: f64, hi: f64) -> Result<usize> {
    let disc = discretize(op, dom)?;
    let pot = op.confining_potential();
    with_tridiag!(&disc.matrix, m => {
        let bound = m.norm_bound().max(1.0);
        let eps = 1e-12 * bound;
        let total = m.count_below(hi + eps) - m.count_below(lo - eps);
        if !op.is_first_order() || dom.boundary != Boundary::Dirichlet {
            return Ok(total);
        }
        // The kernel cluster holds exact forms; only the rest can be wall states.
        let tol = 1e-6 * bound;
        let mut values = Vec::new();
        for (a, b) in [(lo - eps, (-tol).min(hi + eps)), (tol.max(lo - eps), hi + eps)] {
            if a < b {
                let first = m.count_below(a);
                let len = m.count_below(b) - first;
                values.extend(m.eigenvalues_by_index(first, len, eps));
            }
        }
        let pairs = eigenvectors(&disc, &values)?;
        let walls = pairs
            .iter()
            .filter(|(lam, x)| forbidden_weight(&disc, &pot, *lam, x) > BOUNDARY_STATE_WEIGHT)
            .count();
        Ok(total - walls)
    }, dense d => {
        let eig = d.clone().symmetric_eigenvalues();
        let bound = eig.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let eps = 1e-12 * bound;
        Ok(eig.iter().filter(|&&x| x >= lo - eps && x <= hi + eps).count())
    })
}

/// Consistency checks for a curl eigenpair on the grid it was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CurlDiagnostics {
    /// `‖G*ξ‖ / ‖ξ‖`: discrete `iμ e^{-z} f + iμ' e^z g + h'`.
    pub coclosed_residual: f64,
    /// `(‖Hξ‖² + ‖G*ξ‖²) / ‖ξ‖²`, the Rayleigh quotient of `H² + GG*`.
    pub hodge_rayleigh: f64,
    /// `‖Hξ - λξ‖ / ‖ξ‖`.
    pub eigen_residual: f64,
}

pub fn curl_diagnostics(mu: f64, mu_prime: f64, dom: &DomainSpec, pair: &EigenPair) -> Result<CurlDiagnostics> {
    if dom.boundary != Boundary::Dirichlet {
        return Err(Error::InvalidArgument("curl diagnostics need a Dirichlet domain".into()));
    }
    let disc = discretize(&OperatorSpec::Curl { mu, mu_prime }, dom)?;
    let get = |label: &str| -> Result<Vec<C>> {
        pair.component(label)
            .map(|c| c.values.clone())
            .ok_or_else(|| Error::InvalidArgument(format!("missing component {label}")))
    };
    let (f, g, h) = (get("f")?, get("g")?, get("h")?);
    if f.len() + 1 != dom.grid || g.len() != dom.grid {
        return Err(Error::InvalidArgument("eigenpair was computed on a different grid".into()));
    }
    let x = disc.assemble_vector(&[f.clone(), g.clone(), h.clone()]);
    let hx = disc.apply(&x);
    let norm2: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let hx2: f64 = hx.iter().map(|v| v.norm_sqr()).sum();
    let res2: f64 = hx.iter().zip(&x).map(|(a, b)| (a - b * pair.grid_value).norm_sqr()).sum();
    let gs = discretize::curl_codifferential(mu, mu_prime, dom, &f, &g, &h);
    let gs2: f64 = gs.iter().map(|v| v.norm_sqr()).sum();
    Ok(CurlDiagnostics {
        coclosed_residual: (gs2 / norm2).sqrt(),
        hodge_rayleigh: (hx2 + gs2) / norm2,
        eigen_residual: (res2 / norm2).sqrt(),
    })
}

/// Writes `z` and the real and imaginary parts of every component as CSV,
/// one block of rows per component.
pub fn write_samples_csv<W: Write>(pair: &EigenPair, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
    w.write_record(["component", "z", "re", "im"]).map_err(io)?;
    for c in &pair.components {
        for (z, v) in c.z.iter().zip(&c.values) {
            w.write_record([c.label.clone(), format!("{z:.12e}"), format!("{:.12e}", v.re), format!("{:.12e}", v.im)])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
    Ok(())
}
