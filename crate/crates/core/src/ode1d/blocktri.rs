//! Block-tridiagonal Hermitian matrices with small blocks.
//!
//! Eigenvalues come from Sylvester inertia counts on the block `LDL*`
//! factorization, refined by bisection; eigenvectors from inverse iteration
//! with a pivoted banded LU.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};

pub type Block<const S: usize> = [[C; S]; S];

const ZERO: C = C { re: 0.0, im: 0.0 };

pub(crate) fn zero_block<const S: usize>() -> Block<S> {
    [[ZERO; S]; S]
}

#[derive(Debug, Clone)]
pub struct BlockTridiag<const S: usize> {
    /// Diagonal blocks, one per cell.
    pub diag: Vec<Block<S>>,
    /// `upper[i]` is the block in cell row `i`, cell column `i + 1`; the
    /// lower blocks are its adjoints.
    pub upper: Vec<Block<S>>,
}

fn mul<const S: usize>(a: &Block<S>, b: &Block<S>) -> Block<S> {
    let mut out = zero_block::<S>();
    for i in 0..S {
        for k in 0..S {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..S {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn adjoint<const S: usize>(a: &Block<S>) -> Block<S> {
    let mut out = zero_block::<S>();
    for i in 0..S {
        for j in 0..S {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

fn det<const S: usize>(a: &Block<S>) -> C {
    match S {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => unreachable!("block size {S} is not supported"),
    }
}

fn adjugate<const S: usize>(a: &Block<S>) -> Block<S> {
    let mut out = zero_block::<S>();
    match S {
        1 => out[0][0] = C::new(1.0, 0.0),
        2 => {
            out[0][0] = a[1][1];
            out[0][1] = -a[0][1];
            out[1][0] = -a[1][0];
            out[1][1] = a[0][0];
        }
        3 => {
            for i in 0..3 {
                for j in 0..3 {
                    let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                    let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                    out[i][j] = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
                }
            }
        }
        _ => unreachable!("block size {S} is not supported"),
    }
    out
}

/// Number of negative eigenvalues of a Hermitian block, from the signs of
/// its characteristic polynomial coefficients (exact for real-rooted
/// polynomials by Descartes' rule).
fn negative_count<const S: usize>(a: &Block<S>) -> usize {
    let e1 = (0..S).map(|i| a[i][i].re).sum::<f64>();
    let coeffs: [f64; 4] = match S {
        1 => [1.0, e1, 0.0, 0.0],
        2 => [1.0, e1, det(a).re, 0.0],
        3 => {
            let mut e2 = 0.0;
            for i in 0..3 {
                for j in i + 1..3 {
                    e2 += a[i][i].re * a[j][j].re - a[i][j].norm_sqr();
                }
            }
            [1.0, e1, e2, det(a).re]
        }
        _ => unreachable!(),
    };
    let mut changes = 0;
    let mut last = 1.0f64;
    for &c in coeffs.iter().take(S + 1).skip(1) {
        if c != 0.0 {
            if c.signum() != last.signum() {
                changes += 1;
            }
            last = c;
        }
    }
    changes
}

impl<const S: usize> BlockTridiag<S> {
    pub fn new(diag: Vec<Block<S>>, upper: Vec<Block<S>>) -> Result<Self> {
        if diag.is_empty() || upper.len() + 1 != diag.len() {
            return Err(Error::InvalidArgument(format!(
                "block counts {} diagonal / {} upper are inconsistent",
                diag.len(),
                upper.len()
            )));
        }
        let m = Self { diag, upper };
        m.check_hermitian()?;
        Ok(m)
    }

    pub fn cells(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        S * self.diag.len()
    }

    /// Diagonal blocks must equal their adjoints exactly.
    pub fn check_hermitian(&self) -> Result<()> {
        for (c, d) in self.diag.iter().enumerate() {
            for i in 0..S {
                for j in 0..S {
                    if d[i][j] != d[j][i].conj() {
                        return Err(Error::InvalidArgument(format!(
                            "assembled block {c} is not Hermitian at ({i},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.cells();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in 0..n {
            for i in 0..S {
                let centre = self.diag[c][i][i].re;
                let mut r = 0.0;
                for j in 0..S {
                    if j != i {
                        r += self.diag[c][i][j].norm();
                    }
                    if c + 1 < n {
                        r += self.upper[c][i][j].norm();
                    }
                    if c > 0 {
                        r += self.upper[c - 1][j][i].norm();
                    }
                }
                lo = lo.min(centre - r);
                hi = hi.max(centre + r);
            }
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.cells();
        let floor = f64::EPSILON * self.norm_bound().max(1.0);
        let mut count = 0;
        let mut prev_inv: Option<Block<S>> = None;
        for c in 0..n {
            let mut e = self.diag[c];
            for i in 0..S {
                e[i][i] -= sigma;
            }
            if let Some(inv) = &prev_inv {
                let u = &self.upper[c - 1];
                let corr = mul(&adjoint(u), &mul(inv, u));
                for i in 0..S {
                    for j in 0..S {
                        e[i][j] -= corr[i][j];
                    }
                }
                // keep the Schur complement exactly Hermitian
                for i in 0..S {
                    e[i][i].im = 0.0;
                    for j in i + 1..S {
                        let avg = 0.5 * (e[i][j] + e[j][i].conj());
                        e[i][j] = avg;
                        e[j][i] = avg.conj();
                    }
                }
            }
            let mut d = det(&e);
            if d.norm() <= floor.powi(S as i32) {
                // a singular pivot: nudge it, as in the scalar Sturm count
                for i in 0..S {
                    e[i][i] += floor;
                }
                d = det(&e);
            }
            count += negative_count(&e);
            if c + 1 < n {
                let adj = adjugate(&e);
                let mut inv = zero_block::<S>();
                for i in 0..S {
                    for j in 0..S {
                        inv[i][j] = adj[i][j] / d;
                    }
                }
                prev_inv = Some(inv);
            }
        }
        count
    }

    /// Eigenvalues with (0-based, ascending) indices `first..first + len`,
    /// each to absolute width `tol`.
    pub fn eigenvalues_by_index(&self, first: usize, len: usize, tol: f64) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        let pad = 1e-9 * (hi - lo).abs().max(1.0);
        let (lo, hi) = (lo - pad, hi + pad);
        let mut out = vec![f64::NAN; len];
        let last = (first + len).min(self.dim());
        if first >= last {
            return Vec::new();
        }
        out.truncate(last - first);
        let mut stack = vec![(lo, hi, 0usize, self.dim())];
        while let Some((a, b, ca, cb)) = stack.pop() {
            // indices ca..cb lie in [a, b)
            let lo_i = ca.max(first);
            let hi_i = cb.min(last);
            if lo_i >= hi_i {
                continue;
            }
            if b - a <= tol {
                for idx in lo_i..hi_i {
                    out[idx - first] = 0.5 * (a + b);
                }
                continue;
            }
            let m = 0.5 * (a + b);
            let cm = self.count_below(m);
            stack.push((a, m, ca, cm));
            stack.push((m, b, cm, cb));
        }
        out
    }

    pub fn apply(&self, x: &[C]) -> Vec<C> {
        let n = self.cells();
        let mut y = vec![ZERO; self.dim()];
        for c in 0..n {
            for i in 0..S {
                let mut acc = ZERO;
                for j in 0..S {
                    acc += self.diag[c][i][j] * x[c * S + j];
                    if c + 1 < n {
                        acc += self.upper[c][i][j] * x[(c + 1) * S + j];
                    }
                    if c > 0 {
                        acc += self.upper[c - 1][j][i].conj() * x[(c - 1) * S + j];
                    }
                }
                y[c * S + i] = acc;
            }
        }
        y
    }

    /// `H - sigma I` as a general band matrix.
    fn shifted_band(&self, sigma: f64) -> Band {
        let bw = 2 * S - 1;
        let mut band = Band::zeros(self.dim(), bw, bw);
        let n = self.cells();
        for c in 0..n {
            for i in 0..S {
                for j in 0..S {
                    let r = c * S + i;
                    band.set(r, c * S + j, self.diag[c][i][j]);
                    if c + 1 < n {
                        band.set(r, (c + 1) * S + j, self.upper[c][i][j]);
                        band.set((c + 1) * S + j, r, self.upper[c][i][j].conj());
                    }
                }
                let r = c * S + i;
                let v = band.get(r, r) - sigma;
                band.set(r, r, v);
            }
        }
        band
    }

    /// Unit eigenvector for an eigenvalue estimate `sigma`, orthogonal to
    /// `deflate` (vectors of nearby eigenvalues already computed).
    pub fn eigenvector(&self, sigma: f64, deflate: &[Vec<C>], seed: u64) -> Result<Vec<C>> {
        let n = self.dim();
        let scale = self.norm_bound().max(1.0);
        let mut shift = sigma;
        let lu = loop {
            match self.shifted_band(shift).factor() {
                Some(lu) => break lu,
                None => shift += 1e-13 * scale,
            }
        };
        let mut x = start_vector(n, seed);
        for _ in 0..3 {
            orthogonalize(&mut x, deflate);
            normalize(&mut x);
            x = lu.solve(&x);
        }
        orthogonalize(&mut x, deflate);
        normalize(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("inverse iteration failed at {sigma}")));
        }
        Ok(x)
    }

    /// `x* H x / x* x`.
    pub fn rayleigh(&self, x: &[C]) -> f64 {
        let hx = self.apply(x);
        let num: C = x.iter().zip(&hx).map(|(a, b)| a.conj() * b).sum();
        let den: f64 = x.iter().map(|a| a.norm_sqr()).sum();
        num.re / den
    }
}

fn start_vector(n: usize, seed: u64) -> Vec<C> {
    // fixed pseudo-random start so results are reproducible
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((state >> 33) as f64) / (1u64 << 31) as f64 - 0.5;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((state >> 33) as f64) / (1u64 << 31) as f64 - 0.5;
            C::new(a + 0.1, b)
        })
        .collect()
}

pub(crate) fn dotc(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(x: &[C]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(x: &mut [C]) {
    let s = norm(x);
    if s > 0.0 {
        for v in x.iter_mut() {
            *v /= s;
        }
    }
}

fn orthogonalize(x: &mut [C], basis: &[Vec<C>]) {
    for _ in 0..2 {
        for q in basis {
            let p = dotc(q, x);
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi -= p * qi;
            }
        }
    }
}

/// Square band matrix stored row-wise with room for pivoting fill-in.
#[derive(Debug, Clone)]
pub(crate) struct Band {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<C>,
}

impl Band {
    pub(crate) fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        // after partial pivoting the upper bandwidth grows to kl + ku
        let width = 2 * kl + ku + 1;
        Self { n, kl, width, data: vec![ZERO; n * width] }
    }

    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        let k = j as isize - i as isize + self.kl as isize;
        if k < 0 || k as usize >= self.width {
            None
        } else {
            Some(i * self.width + k as usize)
        }
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> C {
        self.offset(i, j).map(|o| self.data[o]).unwrap_or(ZERO)
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: C) {
        let o = self.offset(i, j).expect("entry outside the band");
        self.data[o] = v;
    }

    /// LU with partial pivoting; `None` if a pivot is exactly zero.
    pub(crate) fn factor(mut self) -> Option<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let max_col = self.width - kl - 1;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).norm();
            for r in k + 1..=last_row {
                let v = self.get(r, k).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return None;
            }
            piv[k] = p;
            let last_col = (k + max_col).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
            }
            let pivot = self.get(k, k);
            for r in k + 1..=last_row {
                let l = self.get(r, k) / pivot;
                if l == ZERO {
                    continue;
                }
                self.set(r, k, l);
                for j in k + 1..=last_col {
                    let v = self.get(r, j) - l * self.get(k, j);
                    self.set(r, j, v);
                }
            }
        }
        Some(BandLu { band: self, piv })
    }
}

pub(crate) struct BandLu {
    band: Band,
    piv: Vec<usize>,
}

impl BandLu {
    pub(crate) fn solve(&self, b: &[C]) -> Vec<C> {
        let n = self.band.n;
        let kl = self.band.kl;
        let max_col = self.band.width - kl - 1;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let last_row = (k + kl).min(n - 1);
            for r in k + 1..=last_row {
                let l = self.band.get(r, k);
                let xk = x[k];
                x[r] -= l * xk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + max_col).min(n - 1);
            let mut acc = x[k];
            for j in k + 1..=last_col {
                acc -= self.band.get(k, j) * x[j];
            }
            x[k] = acc / self.band.get(k, k);
        }
        x
    }
}
