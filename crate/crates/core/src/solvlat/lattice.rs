use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::anosov::AnosovData;
use super::intmat::{self, IntMat};
use crate::error::{Error, Result};

/// Tolerance on the integrality of the monodromy action in a lattice basis.
const INTEGRALITY_TOL: f64 = 1e-9;

/// A lattice in the fiber, in eigen-coordinates of the monodromy, together
/// with the translation length of the base circle.
///
/// `monodromy` is the integer matrix `M` with `diag(e^a, e^{-a}) · [v w] = [v w] · M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolvLattice {
    pub v: [f64; 2],
    pub w: [f64; 2],
    pub a: f64,
    pub scale: f64,
    pub monodromy: IntMat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisChoice {
    /// Rows of `[v w]` are left eigenvectors `(r / (λ - p), 1)` of `A = [[p, q], [r, s]]`.
    /// For `[[2, 1], [1, 1]]` this is `v = (φ, 1 - φ)`, `w = (1, 1)`.
    Canonical,
    Explicit { v: [f64; 2], w: [f64; 2] },
}

impl SolvLattice {
    /// Validates invariance of `Zv + Zw` under `diag(e^a, e^{-a})`.
    pub fn new(v: [f64; 2], w: [f64; 2], a: f64, scale: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("translation length {a} must be positive")));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidArgument(format!("scale {scale} must be positive")));
        }
        let monodromy = invariance_matrix(v, w, a)?;
        Ok(Self { v, w, a, scale, monodromy })
    }

    pub fn basis_det(&self) -> f64 {
        self.v[0] * self.w[1] - self.w[0] * self.v[1]
    }

    /// The same lattice with the fiber rescaled by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self {
            v: [self.v[0] * factor, self.v[1] * factor],
            w: [self.w[0] * factor, self.w[1] * factor],
            scale: self.scale * factor,
            ..self.clone()
        }
    }

    /// `m1·v + m2·w`.
    pub fn point(&self, m: [f64; 2]) -> [f64; 2] {
        [
            m[0] * self.v[0] + m[1] * self.w[0],
            m[0] * self.v[1] + m[1] * self.w[1],
        ]
    }
}

/// Integer matrix of `diag(e^a, e^{-a})` in the basis `(v, w)`.
pub fn invariance_matrix(v: [f64; 2], w: [f64; 2], a: f64) -> Result<IntMat> {
    let det = v[0] * w[1] - w[0] * v[1];
    let size = v[0].hypot(v[1]) * w[0].hypot(w[1]);
    if det.abs() <= 1e-14 * size || !det.is_finite() {
        return Err(Error::Degenerate { det });
    }
    let (ea, ema) = (a.exp(), (-a).exp());
    // B^{-1} D B with B = [v w]
    let dv = [ea * v[0], ema * v[1]];
    let dw = [ea * w[0], ema * w[1]];
    let solve = |x: [f64; 2]| -> [f64; 2] {
        [
            (x[0] * w[1] - w[0] * x[1]) / det,
            (v[0] * x[1] - x[0] * v[1]) / det,
        ]
    };
    let c0 = solve(dv);
    let c1 = solve(dw);
    let real = [[c0[0], c1[0]], [c0[1], c1[1]]];
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let r = real[i][j].round();
            if (real[i][j] - r).abs() > INTEGRALITY_TOL * (1.0 + r.abs()) {
                return Err(Error::NotInvariant(format!(
                    "change of basis entry ({i},{j}) = {} is not an integer",
                    real[i][j]
                )));
            }
            out[i][j] = r as i64;
        }
    }
    let d = intmat::det(&out);
    if d.abs() != 1 {
        return Err(Error::NotInvariant(format!("change of basis has determinant {d}")));
    }
    Ok(out)
}

pub fn build_lattice(data: &AnosovData, scale: f64, choice: BasisChoice) -> Result<SolvLattice> {
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument(format!("scale {scale} must be positive")));
    }
    let (v, w) = match choice {
        BasisChoice::Canonical => {
            let m = data.matrix.entries();
            let (p, r) = (m[0][0] as f64, m[1][0] as f64);
            let [l1, l2] = data.eigenvalues();
            ([r / (l1 - p), r / (l2 - p)], [1.0, 1.0])
        }
        BasisChoice::Explicit { v, w } => (v, w),
    };
    let base = SolvLattice::new(v, w, data.a, 1.0)?;
    Ok(base.rescaled(scale))
}

/// Basis of `Λ' = { μ : μ·m ∈ 2πZ for all m ∈ Λ }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DualLattice {
    pub mu1: [f64; 2],
    pub mu2: [f64; 2],
    /// Fiber scale of the primal lattice this was built from.
    pub scale: f64,
}

impl DualLattice {
    pub fn from_basis(mu1: [f64; 2], mu2: [f64; 2], scale: f64) -> Self {
        Self { mu1, mu2, scale }
    }

    /// `μ = c1·μ¹ + c2·μ²`.
    pub fn vector(&self, c: [f64; 2]) -> [f64; 2] {
        [
            c[0] * self.mu1[0] + c[1] * self.mu2[0],
            c[0] * self.mu1[1] + c[1] * self.mu2[1],
        ]
    }

    pub fn det(&self) -> f64 {
        self.mu1[0] * self.mu2[1] - self.mu2[0] * self.mu1[1]
    }

    /// Primal basis `(v, w)` recovered from `μⁱ · v_j = 2π δ_ij`.
    pub fn primal_basis(&self) -> Result<[[f64; 2]; 2]> {
        let det = self.det();
        if det.abs() <= 1e-300 || !det.is_finite() {
            return Err(Error::Degenerate { det });
        }
        let s = 2.0 * PI / det;
        Ok([
            [s * self.mu2[1], -s * self.mu2[0]],
            [-s * self.mu1[1], s * self.mu1[0]],
        ])
    }

    /// Coefficients of `μ` in the dual basis.
    pub fn coefficients(&self, mu: [f64; 2]) -> Result<[f64; 2]> {
        let [v, w] = self.primal_basis()?;
        Ok([
            (v[0] * mu[0] + v[1] * mu[1]) / (2.0 * PI),
            (w[0] * mu[0] + w[1] * mu[1]) / (2.0 * PI),
        ])
    }
}

pub fn dual_lattice(lattice: &SolvLattice) -> Result<DualLattice> {
    let (v, w) = (lattice.v, lattice.w);
    let det = lattice.basis_det();
    let size = v[0].hypot(v[1]) * w[0].hypot(w[1]);
    if det.abs() <= 1e-14 * size || !det.is_finite() {
        return Err(Error::Degenerate { det });
    }
    let s = 2.0 * PI / det;
    Ok(DualLattice {
        mu1: [s * w[1], -s * w[0]],
        mu2: [-s * v[1], s * v[0]],
        scale: lattice.scale,
    })
}

/// Lattice of the cover given by the `power`-th monodromy and the sublattice
/// whose basis vectors are the columns of `sublattice`, in the `(v, w)` basis.
pub fn build_cover(lattice: &SolvLattice, power: u32, sublattice: IntMat) -> Result<SolvLattice> {
    if power == 0 {
        return Err(Error::InvalidArgument("monodromy power must be positive".into()));
    }
    let d = intmat::det(&sublattice);
    if d == 0 {
        return Err(Error::InvalidArgument("sublattice matrix is singular".into()));
    }
    let mk = intmat::checked_pow(&lattice.monodromy, power)
        .ok_or_else(|| Error::InvalidArgument(format!("monodromy power {power} overflows")))?;
    // S^{-1} M^k S = adj(S) M^k S / det S must be integral.
    let num = intmat::mul(&intmat::mul(&intmat::adjugate(&sublattice), &mk), &sublattice);
    let mut action = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            if num[i][j] % d != 0 {
                return Err(Error::NotPreserved { power });
            }
            action[i][j] = num[i][j] / d;
        }
    }
    let col = |j: usize| lattice.point([sublattice[0][j] as f64, sublattice[1][j] as f64]);
    Ok(SolvLattice {
        v: col(0),
        w: col(1),
        a: lattice.a * power as f64,
        scale: lattice.scale,
        monodromy: action,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvlat::anosov::{anosov_eigendata, AnosovMatrix};

    const PHI: f64 = 1.618_033_988_749_895;

    fn figure_eight(scale: f64) -> SolvLattice {
        let data = anosov_eigendata(&AnosovMatrix::figure_eight());
        build_lattice(&data, scale, BasisChoice::Canonical).unwrap()
    }

    #[test]
    fn canonical_figure_eight_basis() {
        let l = figure_eight(1.0);
        assert!((l.v[0] - PHI).abs() < 1e-14);
        assert!((l.v[1] - (1.0 - PHI)).abs() < 1e-14);
        assert_eq!(l.w, [1.0, 1.0]);
        assert_eq!(l.monodromy, [[2, 1], [1, 1]]);
    }

    #[test]
    fn scaling_doubles_basis() {
        let l1 = figure_eight(1.0);
        let l2 = figure_eight(2.0);
        assert!((l2.v[0] - 2.0 * l1.v[0]).abs() < 1e-14);
        assert!((l2.w[1] - 2.0).abs() < 1e-14);
        assert_eq!(l2.a, l1.a);
        assert_eq!(l2.monodromy, l1.monodromy);
    }

    #[test]
    fn canonical_basis_for_other_matrices() {
        for entries in [[[3, 1], [2, 1]], [[-3, 1], [-1, 0]], [[5, 2], [2, 1]], [[0, -1], [1, 4]]] {
            let m = AnosovMatrix::new(entries).unwrap();
            let data = anosov_eigendata(&m);
            let l = build_lattice(&data, 1.0, BasisChoice::Canonical).unwrap();
            let sign = data.sign;
            let expected = [
                [sign * entries[0][0], sign * entries[0][1]],
                [sign * entries[1][0], sign * entries[1][1]],
            ];
            assert_eq!(l.monodromy, expected);
        }
    }

    #[test]
    fn explicit_non_invariant_basis_rejected() {
        let data = anosov_eigendata(&AnosovMatrix::figure_eight());
        let err = build_lattice(
            &data,
            1.0,
            BasisChoice::Explicit { v: [1.0, 0.0], w: [0.0, 1.0] },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotInvariant(_)));
        let err = build_lattice(
            &data,
            1.0,
            BasisChoice::Explicit { v: [1.0, 1.0], w: [2.0, 2.0] },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
    }

    #[test]
    fn dual_of_square_lattice() {
        let sq = SolvLattice {
            v: [1.0, 0.0],
            w: [0.0, 1.0],
            a: 1.0,
            scale: 1.0,
            monodromy: intmat::IDENTITY,
        };
        let d = dual_lattice(&sq).unwrap();
        assert_eq!(d.mu1, [2.0 * PI, 0.0]);
        assert_eq!(d.mu2, [0.0, 2.0 * PI]);
    }

    #[test]
    fn figure_eight_dual() {
        let l = figure_eight(1.0);
        let d = dual_lattice(&l).unwrap();
        let s = 2.0 * PI / 5f64.sqrt();
        assert!((d.mu1[0] - s).abs() < 1e-13 && (d.mu1[1] + s).abs() < 1e-13);
        assert!((d.mu2[0] - s * (PHI - 1.0)).abs() < 1e-13);
        assert!((d.mu2[1] - s * PHI).abs() < 1e-13);
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        for (i, mu) in [d.mu1, d.mu2].iter().enumerate() {
            for (j, b) in [l.v, l.w].iter().enumerate() {
                let expect = if i == j { 2.0 * PI } else { 0.0 };
                assert!((dot(*mu, *b) - expect).abs() < 1e-12 * 2.0 * PI);
            }
        }
        let [pv, pw] = d.primal_basis().unwrap();
        assert!((pv[0] - l.v[0]).abs() < 1e-13 && (pw[1] - l.w[1]).abs() < 1e-13);
    }

    #[test]
    fn dual_scales_inversely() {
        let d1 = dual_lattice(&figure_eight(1.0)).unwrap();
        let d3 = dual_lattice(&figure_eight(3.0)).unwrap();
        for k in 0..2 {
            assert!((d3.mu1[k] * 3.0 - d1.mu1[k]).abs() < 1e-13);
            assert!((d3.mu2[k] * 3.0 - d1.mu2[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn covers() {
        let l = figure_eight(1.0);
        assert_eq!(build_cover(&l, 1, intmat::IDENTITY).unwrap(), l);

        let c = build_cover(&l, 6, [[2, 0], [0, 1]]).unwrap();
        assert!((c.v[0] - 2.0 * l.v[0]).abs() < 1e-14);
        assert_eq!(c.w, l.w);
        assert!((c.a - 6.0 * l.a).abs() < 1e-14);
        // the integer action agrees with the floating-point invariance check
        assert_eq!(invariance_matrix(c.v, c.w, c.a).unwrap(), c.monodromy);

        // A sends 2v to 4v + 2w and w to v + w; v is not in <2v, w>.
        assert_eq!(
            build_cover(&l, 1, [[2, 0], [0, 1]]),
            Err(Error::NotPreserved { power: 1 })
        );
        // A^3 ≡ I mod 2 for the figure-eight matrix
        assert!(build_cover(&l, 3, [[2, 0], [0, 1]]).is_ok());
    }

    #[test]
    fn cover_dual_pairs_with_sublattice() {
        let l = figure_eight(0.9);
        let c = build_cover(&l, 6, [[2, 0], [0, 1]]).unwrap();
        let d = dual_lattice(&c).unwrap();
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        for mu in [d.mu1, d.mu2] {
            for b in [c.v, c.w] {
                let r = dot(mu, b) / (2.0 * PI);
                assert!((r - r.round()).abs() < 1e-9);
            }
        }
    }
}
