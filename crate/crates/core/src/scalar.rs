//! The Laplacian on functions, decomposed into Fourier modes of the fiber.
//!
//! A nonzero mode `μ` reduces to `-f'' + (μ² e^{-2z} + μ'² e^{2z}) f` on the
//! line, whose spectrum lies above `2|μ μ'|` by AM-GM. The zero mode is the
//! circle of length `a` and is known in closed form.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode1d::{fd_solve, fd_solve_auto, DomainSpec, EigenPair, OperatorSpec, PotentialSpec, DEFAULT_EIGEN_COUNT};
use crate::solvlat::{dual_lattice, enumerate_modes, DualMode, SolvLattice};

/// Grid used by [`scalar_spectrum`] for every orbit solve.
pub const DEFAULT_GRID: usize = 2000;

/// The operator of a single nonzero mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalarModeOperator {
    pub mode: DualMode,
    pub potential: PotentialSpec,
}

impl ScalarModeOperator {
    pub fn new(mode: DualMode) -> Result<Self> {
        if mode.is_zero() {
            return Err(Error::InvalidArgument("the zero mode has no confining operator".into()));
        }
        Ok(Self { mode, potential: PotentialSpec::mode(mode.mu, mode.mu_prime) })
    }

    /// `2|μ μ'|`, the minimum of the potential.
    pub fn lower_bound(&self) -> f64 {
        2.0 * self.mode.abs_norm()
    }

    pub fn operator(&self) -> OperatorSpec {
        OperatorSpec::schrodinger(self.potential.clone())
    }
}

/// The `k` lowest eigenpairs of a nonzero mode on `dom`.
pub fn scalar_mode_spectrum(mode: &DualMode, k: usize, dom: &DomainSpec) -> Result<Vec<EigenPair>> {
    let op = ScalarModeOperator::new(*mode)?;
    Ok(fd_solve(&op.operator(), dom, k)?.pairs)
}

/// A closed-form eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ZeroModeLevel {
    pub n: u32,
    pub eigenvalue: f64,
    pub multiplicity: u32,
}

/// `4π² n² / a²` for `n = 0..=n_max`; `±n` share a level.
pub fn scalar_zero_mode(a: f64, n_max: u32) -> Vec<ZeroModeLevel> {
    (0..=n_max)
        .map(|n| {
            let k = 2.0 * PI * n as f64 / a;
            ZeroModeLevel { n, eigenvalue: k * k, multiplicity: if n == 0 { 1 } else { 2 } }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumEntry {
    pub eigenvalue: f64,
    /// `zero:n=<n>` or `orbit:(<m1>,<m2>)#<index>`.
    pub source: String,
    pub multiplicity: u32,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrbitExclusion {
    pub orbit: DualMode,
    /// Ground state of the orbit, solved and found above the cutoff.
    pub ground_state: f64,
}

/// Every orbit with `2|μ μ'| > cutoff` is absent by the AM-GM bound; this
/// records the norm from which that holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TailBound {
    pub norm_above: f64,
    pub eigenvalue_above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumReport {
    pub schema_version: String,
    pub cutoff: f64,
    pub entries: Vec<SpectrumEntry>,
    pub solved_orbits: Vec<DualMode>,
    pub exclusions: Vec<OrbitExclusion>,
    pub tail: TailBound,
}

impl SpectrumReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(format!("json output failed: {e}")))
    }

    /// Columns `eigenvalue,source,multiplicity,error`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
        w.write_record(["eigenvalue", "source", "multiplicity", "error"]).map_err(io)?;
        for e in &self.entries {
            w.write_record([
                format!("{:.12e}", e.eigenvalue),
                e.source.clone(),
                e.multiplicity.to_string(),
                format!("{:.3e}", e.error),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// All eigenvalues of one orbit up to `cutoff`, asking for more until the
/// last computed one clears it.
fn orbit_levels(mode: &DualMode, cutoff: f64, k: usize, grid: usize) -> Result<(Vec<EigenPair>, f64)> {
    let op = ScalarModeOperator::new(*mode)?.operator();
    let mut k = k.max(1);
    loop {
        let sol = fd_solve_auto(&op, grid, k)?;
        let ground = sol.pairs.first().map(|p| p.value).unwrap_or(f64::INFINITY);
        let top = sol.pairs.last().map(|p| p.value).unwrap_or(f64::INFINITY);
        if top > cutoff || sol.pairs.len() < k {
            let below = sol.pairs.into_iter().filter(|p| p.value <= cutoff).collect();
            return Ok((below, ground));
        }
        k *= 2;
    }
}

/// Spectrum of the Laplacian on functions up to `cutoff`.
pub fn scalar_spectrum(lattice: &SolvLattice, cutoff: f64, k: usize) -> Result<SpectrumReport> {
    scalar_spectrum_on_grid(lattice, cutoff, k, DEFAULT_GRID)
}

pub fn scalar_spectrum_on_grid(lattice: &SolvLattice, cutoff: f64, k: usize, grid: usize) -> Result<SpectrumReport> {
    if !(cutoff > 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff {cutoff} must be positive")));
    }
    let k = if k == 0 { DEFAULT_EIGEN_COUNT } else { k };
    let mut entries = Vec::new();
    let first = 2.0 * PI / lattice.a;
    let n_max = (cutoff.sqrt() / first).floor() as u32;
    for level in scalar_zero_mode(lattice.a, n_max) {
        if level.eigenvalue <= cutoff {
            entries.push(SpectrumEntry {
                eigenvalue: level.eigenvalue,
                source: format!("zero:n={}", level.n),
                multiplicity: level.multiplicity,
                error: 0.0,
            });
        }
    }

    let dual = dual_lattice(lattice)?;
    let orbits = enumerate_modes(&dual, lattice.a, cutoff / 2.0)?;
    let solved: Vec<(DualMode, Vec<EigenPair>, f64)> = orbits
        .par_iter()
        .map(|m| orbit_levels(m, cutoff, k, grid).map(|(p, g)| (*m, p, g)))
        .collect::<Result<_>>()?;

    let mut exclusions = Vec::new();
    for (mode, pairs, ground) in &solved {
        if pairs.is_empty() {
            exclusions.push(OrbitExclusion { orbit: *mode, ground_state: *ground });
        }
        for (i, p) in pairs.iter().enumerate() {
            entries.push(SpectrumEntry {
                eigenvalue: p.value,
                source: format!("orbit:({},{})#{}", mode.m1, mode.m2, i),
                multiplicity: 2,
                error: p.error_estimate,
            });
        }
    }
    entries.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue).then_with(|| a.source.cmp(&b.source)));

    Ok(SpectrumReport {
        schema_version: crate::SCHEMA_VERSION.to_string(),
        cutoff,
        entries,
        solved_orbits: orbits,
        exclusions,
        tail: TailBound { norm_above: cutoff / 2.0, eigenvalue_above: cutoff },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvlat::{anosov_eigendata, build_lattice, AnosovMatrix, BasisChoice};

    fn figure_eight(scale: f64) -> SolvLattice {
        let data = anosov_eigendata(&AnosovMatrix::figure_eight());
        build_lattice(&data, scale, BasisChoice::Canonical).unwrap()
    }

    #[test]
    fn zero_mode_levels() {
        let a = (((1.0 + 5f64.sqrt()) / 2.0).powi(2)).ln();
        let levels = scalar_zero_mode(a, 3);
        assert_eq!(levels[0].eigenvalue, 0.0);
        assert_eq!(levels[0].multiplicity, 1);
        assert_eq!(levels[1].multiplicity, 2);
        // 4π² / (ln φ²)² ≈ 42.6
        assert!((levels[1].eigenvalue - 42.6).abs() < 0.1);
        let doubled = scalar_zero_mode(2.0 * a, 3);
        for (x, y) in levels.iter().zip(&doubled).skip(1) {
            assert!((x.eigenvalue / 4.0 - y.eigenvalue).abs() < 1e-12 * x.eigenvalue);
        }
    }

    #[test]
    fn zero_mode_rejected_for_mode_solve() {
        let dom = DomainSpec::dirichlet(0.0, 5.0, 200).unwrap();
        assert!(scalar_mode_spectrum(&DualMode::zero(), 1, &dom).is_err());
    }

    #[test]
    fn unit_mode_ground_state_above_bound() {
        let dom = DomainSpec::dirichlet(0.0, 8.0, 2000).unwrap();
        let pairs = scalar_mode_spectrum(&DualMode::from_components(1.0, 1.0), 3, &dom).unwrap();
        assert!(pairs[0].value >= 2.0 - pairs[0].error_estimate);
        assert!(pairs.windows(2).all(|w| w[0].value < w[1].value));
    }

    #[test]
    fn small_cutoff_keeps_only_constants() {
        let l = figure_eight(1.0);
        let r = scalar_spectrum(&l, 5.0, 4).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].eigenvalue, 0.0);
        assert!(r.solved_orbits.is_empty());
    }

    #[test]
    fn figure_eight_minimal_orbits() {
        let l = figure_eight(1.0);
        let c = 4.0 * PI * PI / 5.0;
        // At cutoff 20 the minimal orbits are solved but their ground states
        // (about 2c + 2√c) lie above it.
        let r = scalar_spectrum_on_grid(&l, 20.0, 4, 1000).unwrap();
        let minimal: Vec<_> = r.solved_orbits.iter().filter(|m| (m.abs_norm() - c).abs() < 1e-9).collect();
        assert_eq!(minimal.len(), 2);
        assert_eq!(r.exclusions.len(), r.solved_orbits.len());
        for x in &r.exclusions {
            assert!(x.ground_state > 20.0 && x.ground_state >= 2.0 * x.orbit.abs_norm());
        }

        let r = scalar_spectrum_on_grid(&l, 25.0, 4, 1000).unwrap();
        for m in r.solved_orbits.iter().filter(|m| (m.abs_norm() - c).abs() < 1e-9) {
            let tag = format!("orbit:({},{})#0", m.m1, m.m2);
            let e = r.entries.iter().find(|e| e.source == tag).expect("ground state reported");
            assert!(e.eigenvalue >= 2.0 * c - 10.0 * e.error);
            assert_eq!(e.multiplicity, 2);
        }
        assert!(r.entries.windows(2).all(|w| w[0].eigenvalue <= w[1].eigenvalue));
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("eigenvalue,source,multiplicity,error"));
        assert_eq!(text.lines().count(), r.entries.len() + 1);
    }
}
