use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::intmat::{self, IntMat};
use super::lattice::{dual_lattice, DualLattice, SolvLattice};
use crate::error::{Error, Result};

/// Relative size below which a component of a dual vector counts as zero.
const AXIS_TOL: f64 = 1e-10;

/// A nonzero Fourier mode `μ = μ_x dx + μ_y dy` of the fiber torus, stored as
/// a representative of its orbit under `(μ, μ') -> (e^a μ, e^{-a} μ')` and
/// `μ -> -μ`.
///
/// `coeffs` are the integer coordinates in the dual basis. For twisted
/// structures they are measured from the twist offset, so that
/// `μ = δ + m1·μ¹ + m2·μ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DualMode {
    #[serde(rename = "m1")]
    pub m1: i64,
    #[serde(rename = "m2")]
    pub m2: i64,
    pub mu: f64,
    pub mu_prime: f64,
    /// `μ μ'`, constant along the orbit.
    pub norm: f64,
}

impl DualMode {
    pub fn zero() -> Self {
        Self { m1: 0, m2: 0, mu: 0.0, mu_prime: 0.0, norm: 0.0 }
    }

    /// A mode given only by its components, with no lattice coordinates.
    pub fn from_components(mu: f64, mu_prime: f64) -> Self {
        Self { m1: 0, m2: 0, mu, mu_prime, norm: mu * mu_prime }
    }

    pub fn coeffs(&self) -> [i64; 2] {
        [self.m1, self.m2]
    }

    pub fn is_zero(&self) -> bool {
        self.mu == 0.0 && self.mu_prime == 0.0
    }

    /// `θ = ½ ln|μ/μ'|`, the point where `|μ| e^{-θ} = |μ'| e^{θ}`.
    pub fn balance_point(&self) -> f64 {
        0.5 * (self.mu.abs() / self.mu_prime.abs()).ln()
    }

    /// `|N|` with `N = μ μ'`.
    pub fn abs_norm(&self) -> f64 {
        self.norm.abs()
    }

    /// The mode with `μ' -> -μ'`, i.e. `N -> -N`.
    pub fn reflected(&self) -> Self {
        Self { mu_prime: -self.mu_prime, norm: -self.norm, ..*self }
    }

    /// The mode with `(μ, μ') -> (μ', μ)`.
    pub fn swapped(&self) -> Self {
        Self { mu: self.mu_prime, mu_prime: self.mu, ..*self }
    }
}

/// Smallest `|μ μ'|` over nonzero dual vectors, and the threshold
/// `t* = scale · sqrt(c / 8)` below which the fiber condition holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FiberThreshold {
    /// Minimum of `|N|` for the dual lattice at scale 1.
    pub min_norm_unit: f64,
    /// Minimum of `|N|` for the dual lattice at its own scale.
    pub min_norm: f64,
    pub t_star: f64,
}

impl FiberThreshold {
    /// The condition is strict: `scale < t*`.
    pub fn admits(&self, scale: f64) -> bool {
        scale < self.t_star
    }
}

/// Which spin structure a set of modes belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SpinLabel {
    Base,
    TwistedByV,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpinStructure {
    pub label: SpinLabel,
    /// Offset `δ` with `2δ ∈ Λ'`; modes live on `δ + Λ'`.
    pub twist: [f64; 2],
}

impl SpinStructure {
    pub fn base() -> Self {
        Self { label: SpinLabel::Base, twist: [0.0, 0.0] }
    }

    /// Modes on `μ¹/2 + Λ'`: sections that change sign along `v` and are
    /// periodic along `w`.
    pub fn twisted_by_v(dual: &DualLattice) -> Self {
        Self {
            label: SpinLabel::TwistedByV,
            twist: [dual.mu1[0] / 2.0, dual.mu1[1] / 2.0],
        }
    }

    /// Doubled coordinates of `δ` in the dual basis, reduced mod 2.
    pub fn parity(&self, dual: &DualLattice) -> Result<[i64; 2]> {
        let c = dual.coefficients(self.twist)?;
        let mut out = [0i64; 2];
        for k in 0..2 {
            let d = 2.0 * c[k];
            let r = d.round();
            if (d - r).abs() > 1e-8 * (1.0 + r.abs()) {
                return Err(Error::InvalidTwist(format!(
                    "twist is not a half lattice vector (coefficient {})",
                    c[k]
                )));
            }
            out[k] = (r as i64).rem_euclid(2);
        }
        Ok(out)
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn is_axis(mu: [f64; 2]) -> bool {
    let size = mu[0].hypot(mu[1]);
    mu[0].abs() <= AXIS_TOL * size || mu[1].abs() <= AXIS_TOL * size
}

/// Action of `diag(e^a, e^{-a})` on dual coefficients.
fn coefficient_action(dual: &DualLattice, a: f64) -> Result<IntMat> {
    let ea = a.exp();
    let ema = (-a).exp();
    let image = |mu: [f64; 2]| dual.coefficients([ea * mu[0], ema * mu[1]]);
    let c0 = image(dual.mu1)?;
    let c1 = image(dual.mu2)?;
    let real = [[c0[0], c1[0]], [c0[1], c1[1]]];
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let r = real[i][j].round();
            if (real[i][j] - r).abs() > 1e-8 * (1.0 + r.abs()) {
                return Err(Error::NotInvariant(format!(
                    "dual lattice is not invariant under translation length {a}"
                )));
            }
            out[i][j] = r as i64;
        }
    }
    if intmat::det(&out).abs() != 1 {
        return Err(Error::NotInvariant("dual action is not unimodular".into()));
    }
    Ok(out)
}

struct Enumerator<'a> {
    dual: &'a DualLattice,
    a: f64,
    action: IntMat,
    action_inv: IntMat,
    parity: [i64; 2],
}

impl<'a> Enumerator<'a> {
    fn new(dual: &'a DualLattice, a: f64, parity: [i64; 2]) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("translation length {a} must be positive")));
        }
        for (k, mu) in [dual.mu1, dual.mu2].into_iter().enumerate() {
            if is_axis(mu) {
                let (m1, m2) = if k == 0 { (1, 0) } else { (0, 1) };
                return Err(Error::AxisMode { m1, m2 });
            }
        }
        let action = coefficient_action(dual, a)?;
        let action_inv = intmat::inverse_unimodular(&action)
            .ok_or_else(|| Error::NotInvariant("dual action is not invertible".into()))?;
        let image = intmat::apply(&action, parity);
        if image[0].rem_euclid(2) != parity[0] || image[1].rem_euclid(2) != parity[1] {
            return Err(Error::InvalidTwist("twist class is not preserved by the monodromy".into()));
        }
        Ok(Self { dual, a, action, action_inv, parity })
    }

    /// `μ` for doubled coordinates `n`, i.e. `μ = (n1 μ¹ + n2 μ²) / 2`.
    fn vector(&self, n: [i64; 2]) -> [f64; 2] {
        self.dual.vector([n[0] as f64 / 2.0, n[1] as f64 / 2.0])
    }

    fn mode(&self, n: [i64; 2]) -> DualMode {
        let mu = self.vector(n);
        DualMode {
            m1: (n[0] - self.parity[0]).div_euclid(2),
            m2: (n[1] - self.parity[1]).div_euclid(2),
            mu: mu[0],
            mu_prime: mu[1],
            norm: mu[0] * mu[1],
        }
    }

    /// Orbit representative with balance point in `[0, a)` and `μ > 0`.
    fn canonical(&self, n: [i64; 2]) -> Result<[i64; 2]> {
        let mu = self.vector(n);
        let theta = 0.5 * (mu[0].abs() / mu[1].abs()).ln();
        let k = (theta / self.a + 1e-9).floor() as i64;
        let m = if k >= 0 {
            intmat::signed_pow(&self.action_inv, k)
        } else {
            intmat::signed_pow(&self.action, -k)
        }
        .ok_or_else(|| Error::InvalidArgument("orbit reduction overflowed".into()))?;
        let mut r = intmat::apply(&m, n);
        let rv = self.vector(r);
        if rv[0] < 0.0 {
            r = [-r[0], -r[1]];
        }
        if (r[0] - self.parity[0]).rem_euclid(2) != 0 || (r[1] - self.parity[1]).rem_euclid(2) != 0 {
            return Err(Error::InvalidTwist("twist class is not preserved by the monodromy".into()));
        }
        Ok(r)
    }

    /// All orbit representatives with `0 < |N| <= cutoff`.
    fn orbits(&self, cutoff: f64) -> Result<Vec<DualMode>> {
        if !(cutoff >= 0.0) || !cutoff.is_finite() {
            return Err(Error::InvalidArgument(format!("cutoff {cutoff} must be finite and nonnegative")));
        }
        let limit = cutoff * (1.0 + 1e-12);
        // Every orbit has a representative with |μ| <= sqrt(C) e^a and |μ'| <= sqrt(C).
        let bx = limit.sqrt() * self.a.exp() * (1.0 + 1e-9) + 1e-12;
        let by = limit.sqrt() * (1.0 + 1e-9) + 1e-12;
        let [v, _] = self.dual.primal_basis()?;
        // n_j = (b_j · μ) / π in doubled coordinates
        let n1_max = ((v[0].abs() * bx + v[1].abs() * by) / PI).floor() as i64;
        let (m1x, m1y) = (self.dual.mu1[0], self.dual.mu1[1]);
        let (m2x, m2y) = (self.dual.mu2[0], self.dual.mu2[1]);
        let interval = |n1: f64, c1: f64, c2: f64, bound: f64| {
            let lo = (-2.0 * bound - n1 * c1) / c2;
            let hi = (2.0 * bound - n1 * c1) / c2;
            if lo <= hi {
                (lo, hi)
            } else {
                (hi, lo)
            }
        };
        let mut found: BTreeMap<[i64; 2], DualMode> = BTreeMap::new();
        for n1 in -n1_max..=n1_max {
            if (n1 - self.parity[0]).rem_euclid(2) != 0 {
                continue;
            }
            let (lx, hx) = interval(n1 as f64, m1x, m2x, bx);
            let (ly, hy) = interval(n1 as f64, m1y, m2y, by);
            let lo = lx.max(ly).ceil() as i64;
            let hi = hx.min(hy).floor() as i64;
            for n2 in lo..=hi {
                if (n2 - self.parity[1]).rem_euclid(2) != 0 || (n1 == 0 && n2 == 0) {
                    continue;
                }
                let mu = self.vector([n1, n2]);
                if is_axis(mu) {
                    return Err(Error::AxisMode {
                        m1: (n1 - self.parity[0]).div_euclid(2),
                        m2: (n2 - self.parity[1]).div_euclid(2),
                    });
                }
                if (mu[0] * mu[1]).abs() > limit {
                    continue;
                }
                let rep = self.canonical([n1, n2])?;
                found.entry(rep).or_insert_with(|| self.mode(rep));
            }
        }
        let mut modes: Vec<DualMode> = found.into_values().collect();
        sort_modes(&mut modes);
        Ok(modes)
    }
}

pub(crate) fn sort_modes(modes: &mut [DualMode]) {
    modes.sort_by(|x, y| {
        x.abs_norm()
            .total_cmp(&y.abs_norm())
            .then(x.m1.cmp(&y.m1))
            .then(x.m2.cmp(&y.m2))
    });
}

/// One representative per orbit of nonzero modes with `|N| <= cutoff`,
/// sorted by `|N|`. The zero mode is not included.
pub fn enumerate_modes(dual: &DualLattice, a: f64, cutoff: f64) -> Result<Vec<DualMode>> {
    Enumerator::new(dual, a, [0, 0])?.orbits(cutoff)
}

/// Smallest `|μ μ'|` over nonzero dual vectors.
pub fn min_norm(dual: &DualLattice, a: f64) -> Result<f64> {
    let e = Enumerator::new(dual, a, [0, 0])?;
    let initial = [[2, 0], [0, 2], [2, 2], [2, -2]]
        .into_iter()
        .map(|n| {
            let mu = e.vector(n);
            (mu[0] * mu[1]).abs()
        })
        .fold(f64::INFINITY, f64::min);
    let modes = e.orbits(initial)?;
    modes
        .first()
        .map(|m| m.abs_norm())
        .ok_or_else(|| Error::InvalidArgument("no nonzero modes found".into()))
}

/// Threshold `t*` on the fiber scale for the lattice shape of `dual`.
pub fn fiber_threshold(dual: &DualLattice, a: f64) -> Result<FiberThreshold> {
    let c = min_norm(dual, a)?;
    let c_unit = c * dual.scale * dual.scale;
    Ok(FiberThreshold {
        min_norm_unit: c_unit,
        min_norm: c,
        t_star: (c_unit / 8.0).sqrt(),
    })
}

/// Orbit representatives for a spin structure on the lattice. The base
/// structure includes the zero mode first; twisted structures have none.
pub fn twisted_modes(lattice: &SolvLattice, spin: &SpinStructure, cutoff: f64) -> Result<Vec<DualMode>> {
    let dual = dual_lattice(lattice)?;
    let parity = spin.parity(&dual)?;
    let e = Enumerator::new(&dual, lattice.a, parity)?;
    let mut modes = e.orbits(cutoff)?;
    if parity == [0, 0] {
        modes.insert(0, DualMode::zero());
    }
    Ok(modes)
}

/// Orbit representatives of nonzero modes on `cover` that change sign under
/// translation by `u`, i.e. with `μ·u ≡ π (mod 2π)`. `2u` must lie in the
/// cover lattice.
pub fn odd_modes_under(cover: &SolvLattice, u: [f64; 2], cutoff: f64) -> Result<Vec<DualMode>> {
    let dual = dual_lattice(cover)?;
    let modes = enumerate_modes(&dual, cover.a, cutoff)?;
    let mut out = Vec::new();
    for m in modes {
        let phase = dot([m.mu, m.mu_prime], u) / PI;
        let r = phase.round();
        if (phase - r).abs() > 1e-7 * (1.0 + r.abs()) {
            return Err(Error::InvalidTwist(format!(
                "translation is not half a lattice vector (phase {phase}π)"
            )));
        }
        if (r as i64).rem_euclid(2) == 1 {
            out.push(m);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvlat::anosov::{anosov_eigendata, AnosovMatrix};
    use crate::solvlat::lattice::{build_cover, build_lattice, BasisChoice};

    fn figure_eight(scale: f64) -> SolvLattice {
        let data = anosov_eigendata(&AnosovMatrix::figure_eight());
        build_lattice(&data, scale, BasisChoice::Canonical).unwrap()
    }

    #[test]
    fn square_lattice_is_axis() {
        let d = DualLattice::from_basis([2.0 * PI, 0.0], [0.0, 2.0 * PI], 1.0);
        assert_eq!(min_norm(&d, 1.0), Err(Error::AxisMode { m1: 1, m2: 0 }));
    }

    #[test]
    fn figure_eight_min_norm() {
        let d = dual_lattice(&figure_eight(1.0)).unwrap();
        let a = 2.0 * 1.618_033_988_749_895f64.ln();
        let c = min_norm(&d, a).unwrap();
        let expected = 4.0 * PI * PI / 5.0;
        assert!((c - expected).abs() < 1e-12 * expected, "{c}");
        let t = fiber_threshold(&d, a).unwrap();
        assert!((t.t_star - PI / 10f64.sqrt()).abs() < 1e-12);
        assert!(t.admits(0.9));
        assert!(!t.admits(t.t_star));
    }

    #[test]
    fn threshold_is_scale_invariant() {
        let a = 2.0 * 1.618_033_988_749_895f64.ln();
        let t1 = fiber_threshold(&dual_lattice(&figure_eight(1.0)).unwrap(), a).unwrap();
        let t2 = fiber_threshold(&dual_lattice(&figure_eight(0.37)).unwrap(), a).unwrap();
        assert!((t1.t_star - t2.t_star).abs() < 1e-12);
        assert!((t2.min_norm * 0.37 * 0.37 - t1.min_norm).abs() < 1e-10);
    }

    #[test]
    fn representatives_are_canonical() {
        let l = figure_eight(0.9);
        let d = dual_lattice(&l).unwrap();
        let modes = enumerate_modes(&d, l.a, 60.0).unwrap();
        assert!(!modes.is_empty());
        for m in &modes {
            assert!(m.mu > 0.0);
            let th = m.balance_point();
            assert!(th > -1e-8 && th < l.a * (1.0 + 1e-8), "{th}");
            assert!(m.abs_norm() <= 60.0);
            let v = d.vector([m.m1 as f64, m.m2 as f64]);
            assert!((v[0] - m.mu).abs() < 1e-9 && (v[1] - m.mu_prime).abs() < 1e-9);
        }
        for w in modes.windows(2) {
            assert!(w[0].abs_norm() <= w[1].abs_norm());
        }
    }

    #[test]
    fn twisted_by_v_at_cover() {
        let l = figure_eight(0.9);
        let ybar = build_cover(&l, 6, intmat::IDENTITY).unwrap();
        let twisted = SpinStructure::twisted_by_v(&dual_lattice(&ybar).unwrap());
        let modes = twisted_modes(&ybar, &twisted, 40.0).unwrap();
        assert!(!modes.is_empty());
        assert!(modes.iter().all(|m| !m.is_zero()));
        let cover = build_cover(&l, 6, [[2, 0], [0, 1]]).unwrap();
        let odd = odd_modes_under(&cover, ybar.v, 40.0).unwrap();
        assert_eq!(odd.len(), modes.len());
        for (x, y) in odd.iter().zip(&modes) {
            assert!((x.abs_norm() - y.abs_norm()).abs() < 1e-9 * (1.0 + x.abs_norm()));
        }
    }

    #[test]
    fn twist_on_base_not_preserved() {
        // A moves μ¹/2 + Λ' off itself for the figure-eight matrix.
        let l = figure_eight(1.0);
        let spin = SpinStructure::twisted_by_v(&dual_lattice(&l).unwrap());
        let err = twisted_modes(&l, &spin, 100.0).unwrap_err();
        assert!(matches!(err, Error::InvalidTwist(_)));
    }

    #[test]
    fn base_structure_has_zero_mode() {
        let l = figure_eight(1.0);
        let modes = twisted_modes(&l, &SpinStructure::base(), 10.0).unwrap();
        assert!(modes[0].is_zero());
    }
}
