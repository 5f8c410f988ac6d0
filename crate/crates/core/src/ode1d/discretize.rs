//! Assembly of the discrete mode operators.
//!
//! Second-order problems use the 3-point Laplacian on interior nodes.
//! First-order blocks use a staggered layout (some components on nodes,
//! the others on half-nodes), which keeps the matrix Hermitian without the
//! spurious doubled modes of a collocated centered derivative. For the curl
//! block the discrete exact forms `(iμ e^{-z} φ, iμ' e^z φ, φ')` lie in the
//! kernel to rounding.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use super::blocktri::{zero_block, BlockTridiag};
use super::domain::{Boundary, DomainSpec};
use super::OperatorSpec;
use crate::error::{Error, Result};

const I: C = C { re: 0.0, im: 1.0 };

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

#[derive(Debug, Clone)]
pub(crate) enum Assembled {
    S1(BlockTridiag<1>),
    S2(BlockTridiag<2>),
    S3(BlockTridiag<3>),
    Dense(DMatrix<C>),
}

#[derive(Debug, Clone)]
pub(crate) struct Component {
    pub label: &'static str,
    pub z: Vec<f64>,
    pub index: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Discretization {
    pub matrix: Assembled,
    pub components: Vec<Component>,
    /// Indices of decoupled padding unknowns (eigenvalue above the spectrum).
    pub padding: usize,
    pub expected_kernel: usize,
    pub step: f64,
}

impl Discretization {
    pub fn dim(&self) -> usize {
        match &self.matrix {
            Assembled::S1(m) => m.dim(),
            Assembled::S2(m) => m.dim(),
            Assembled::S3(m) => m.dim(),
            Assembled::Dense(m) => m.nrows(),
        }
    }

    pub fn apply(&self, x: &[C]) -> Vec<C> {
        match &self.matrix {
            Assembled::S1(m) => m.apply(x),
            Assembled::S2(m) => m.apply(x),
            Assembled::S3(m) => m.apply(x),
            Assembled::Dense(m) => {
                let v = nalgebra::DVector::from_column_slice(x);
                (m * v).iter().copied().collect()
            }
        }
    }

    /// Places component samples back into a full vector.
    pub fn assemble_vector(&self, samples: &[Vec<C>]) -> Vec<C> {
        let mut x = vec![C::new(0.0, 0.0); self.dim()];
        for (comp, vals) in self.components.iter().zip(samples) {
            for (&i, &v) in comp.index.iter().zip(vals) {
                x[i] = v;
            }
        }
        x
    }

    pub fn split_vector(&self, x: &[C]) -> Vec<Vec<C>> {
        self.components.iter().map(|c| c.index.iter().map(|&i| x[i]).collect()).collect()
    }
}

macro_rules! with_tridiag {
    ($m:expr, $t:ident => $body:expr, dense $d:ident => $dense:expr) => {
        match $m {
            Assembled::S1($t) => $body,
            Assembled::S2($t) => $body,
            Assembled::S3($t) => $body,
            Assembled::Dense($d) => $dense,
        }
    };
}
pub(crate) use with_tridiag;

/// `(h/2) / sinh(h/2)`: makes `e^{-z} (e^z f)'` exact on constants.
fn kappa(h: f64) -> f64 {
    let x = 0.5 * h;
    if x < 1e-8 {
        1.0
    } else {
        x / x.sinh()
    }
}

pub(crate) fn discretize(op: &OperatorSpec, dom: &DomainSpec) -> Result<Discretization> {
    dom.validate()?;
    match (op, dom.boundary) {
        (OperatorSpec::Schrodinger { potential }, Boundary::Dirichlet) => {
            let n = dom.grid;
            let h = dom.step();
            let inv = 1.0 / (h * h);
            let diag = (1..n).map(|j| [[re(2.0 * inv + potential.value(dom.node(j)))]]).collect();
            let upper = (1..n - 1).map(|_| [[re(-inv)]]).collect();
            Ok(Discretization {
                matrix: Assembled::S1(BlockTridiag::new(diag, upper)?),
                components: vec![Component {
                    label: "f",
                    z: (1..n).map(|j| dom.node(j)).collect(),
                    index: (0..n - 1).collect(),
                }],
                padding: 0,
                expected_kernel: 0,
                step: h,
            })
        }
        (OperatorSpec::Schrodinger { potential }, Boundary::Periodic { .. }) => {
            let n = dom.grid;
            let h = dom.step();
            let inv = 1.0 / (h * h);
            let mut m = DMatrix::from_element(n, n, re(0.0));
            for j in 0..n {
                m[(j, j)] = re(2.0 * inv + potential.value(dom.node(j)));
                m[(j, (j + 1) % n)] -= re(inv);
                m[((j + 1) % n, j)] -= re(inv);
            }
            Ok(Discretization {
                matrix: Assembled::Dense(m),
                components: vec![Component {
                    label: "f",
                    z: (0..n).map(|j| dom.node(j)).collect(),
                    index: (0..n).collect(),
                }],
                padding: 0,
                expected_kernel: 0,
                step: h,
            })
        }
        (&OperatorSpec::Curl { mu, mu_prime }, Boundary::Dirichlet) => curl_dirichlet(mu, mu_prime, dom),
        (&OperatorSpec::Curl { mu, mu_prime }, Boundary::Periodic { .. }) => {
            if mu != 0.0 || mu_prime != 0.0 {
                return Err(Error::InvalidArgument(
                    "periodic curl blocks are only defined for the zero mode".into(),
                ));
            }
            Ok(curl_zero_mode_periodic(dom))
        }
        (&OperatorSpec::Dirac { mu, mu_prime }, Boundary::Dirichlet) => dirac_dirichlet(mu, mu_prime, dom),
        (OperatorSpec::Dirac { .. }, Boundary::Periodic { .. }) => Err(Error::InvalidArgument(
            "periodic Dirac blocks are not supported; the zero mode is solved analytically".into(),
        )),
    }
}

/// Cells `[g_{i+1/2}, h_{i+1/2}, f_{i+1}]` for `i = 0..n`; `f_n` is padding.
fn curl_dirichlet(mu: f64, mu_prime: f64, dom: &DomainSpec) -> Result<Discretization> {
    let n = dom.grid;
    let h = dom.step();
    let k = kappa(h);
    // weighted exponentials: ẽ at nodes, e^{-z} at half nodes
    let en = |j: usize| k * dom.node(j).exp();
    let eh = |j: usize| (-dom.half_node(j)).exp();
    let mut diag = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n - 1);
    for i in 0..n {
        let mut d = zero_block::<3>();
        let (g, hh, f) = (0, 1, 2);
        d[g][hh] = -I * mu * eh(i);
        d[hh][g] = I * mu * eh(i);
        if i + 1 < n {
            d[g][f] = re(eh(i) * en(i + 1) / h);
            d[f][g] = d[g][f];
            d[hh][f] = -I * mu_prime * en(i + 1) * 0.5;
            d[f][hh] = d[hh][f].conj();
        }
        diag.push(d);
        if i + 1 < n {
            let mut u = zero_block::<3>();
            u[f][g] = re(-eh(i + 1) * en(i + 1) / h);
            u[f][hh] = I * mu_prime * en(i + 1) * 0.5;
            upper.push(u);
        }
    }
    let mut m = BlockTridiag::new(diag, upper)?;
    let pad = 2.0 * m.norm_bound() + 1.0;
    m.diag[n - 1][2][2] = re(pad);
    Ok(Discretization {
        matrix: Assembled::S3(m),
        components: vec![
            Component { label: "f", z: (1..n).map(|j| dom.node(j)).collect(), index: (0..n - 1).map(|i| 3 * i + 2).collect() },
            Component { label: "g", z: (0..n).map(|j| dom.half_node(j)).collect(), index: (0..n).map(|i| 3 * i).collect() },
            Component { label: "h", z: (0..n).map(|j| dom.half_node(j)).collect(), index: (0..n).map(|i| 3 * i + 1).collect() },
        ],
        padding: 1,
        expected_kernel: n - 1,
        step: h,
    })
}

/// Constant-mode curl block on a periodic grid: `f` on nodes, `g, h` on
/// half nodes; the `h` rows vanish.
fn curl_zero_mode_periodic(dom: &DomainSpec) -> Discretization {
    let n = dom.grid;
    let h = dom.step();
    let dim = 3 * n;
    // layout: f_j at j, g_{j+1/2} at n + j, h_{j+1/2} at 2n + j
    let mut m = DMatrix::from_element(dim, dim, re(0.0));
    for j in 0..n {
        let next = (j + 1) % n;
        let g = n + j;
        m[(g, next)] += re(1.0 / h + 0.5);
        m[(g, j)] += re(-1.0 / h + 0.5);
    }
    for r in 0..dim {
        for c in 0..dim {
            if m[(r, c)] != re(0.0) {
                m[(c, r)] = m[(r, c)].conj();
            }
        }
    }
    Discretization {
        matrix: Assembled::Dense(m),
        components: vec![
            Component { label: "f", z: (0..n).map(|j| dom.node(j)).collect(), index: (0..n).collect() },
            Component { label: "g", z: (0..n).map(|j| dom.half_node(j)).collect(), index: (n..2 * n).collect() },
            Component { label: "h", z: (0..n).map(|j| dom.half_node(j)).collect(), index: (2 * n..3 * n).collect() },
        ],
        padding: 0,
        expected_kernel: n,
        step: h,
    }
}

/// Dirac block in the rotated variables `u = (f + g)/√2` on nodes and
/// `v = (f - g)/√2` on half nodes. With `b = -iμ e^{-z} - μ' e^z` the block
/// reads `[[Re b, i∂ - i Im b], [i∂ + i Im b, -Re b]]`. Cells are
/// `[v_{i+1/2}, u_{i+1}]`; `u_n` is padding.
fn dirac_dirichlet(mu: f64, mu_prime: f64, dom: &DomainSpec) -> Result<Discretization> {
    let n = dom.grid;
    let h = dom.step();
    let re_b = |z: f64| -mu_prime * z.exp();
    let im_b = |z: f64| -mu * (-z).exp();
    let mut diag = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n - 1);
    for i in 0..n {
        let mut d = zero_block::<2>();
        let (v, u) = (0, 1);
        let zh = dom.half_node(i);
        d[v][v] = re(-re_b(zh));
        if i + 1 < n {
            d[u][u] = re(re_b(dom.node(i + 1)));
            d[v][u] = I * (1.0 / h + 0.5 * im_b(zh));
            d[u][v] = d[v][u].conj();
        }
        diag.push(d);
        if i + 1 < n {
            let mut w = zero_block::<2>();
            w[u][v] = I * (1.0 / h - 0.5 * im_b(dom.half_node(i + 1)));
            upper.push(w);
        }
    }
    let mut m = BlockTridiag::new(diag, upper)?;
    let pad = 2.0 * m.norm_bound() + 1.0;
    m.diag[n - 1][1][1] = re(pad);
    Ok(Discretization {
        matrix: Assembled::S2(m),
        components: vec![
            Component { label: "u", z: (1..n).map(|j| dom.node(j)).collect(), index: (0..n - 1).map(|i| 2 * i + 1).collect() },
            Component { label: "v", z: (0..n).map(|j| dom.half_node(j)).collect(), index: (0..n).map(|i| 2 * i).collect() },
        ],
        padding: 1,
        expected_kernel: 0,
        step: h,
    })
}

/// `G* ξ` for the discrete exact-form map `G φ = (iμ ẽ^{-1} φ, iμ' e A φ, P φ)`;
/// the discrete analogue of `-(iμ e^{-z} f + iμ' e^z g + h')`.
pub(crate) fn curl_codifferential(mu: f64, mu_prime: f64, dom: &DomainSpec, f: &[C], g: &[C], hh: &[C]) -> Vec<C> {
    let n = dom.grid;
    let h = dom.step();
    let k = kappa(h);
    (1..n)
        .map(|j| {
            let fj = f[j - 1];
            let eg = 0.5 * (dom.half_node(j - 1).exp() * g[j - 1] + dom.half_node(j).exp() * g[j]);
            -I * mu * ((-dom.node(j)).exp() / k) * fj - I * mu_prime * eg + (hh[j - 1] - hh[j]) / h
        })
        .collect()
}

/// `G φ` for node values `φ_1..φ_{n-1}`, returned as `(f, g, h)` samples.
#[cfg(test)]
pub(crate) fn curl_exact_form(mu: f64, mu_prime: f64, dom: &DomainSpec, phi: &[C]) -> [Vec<C>; 3] {
    let n = dom.grid;
    let h = dom.step();
    let k = kappa(h);
    let at = |j: usize| if j == 0 || j == n { C::new(0.0, 0.0) } else { phi[j - 1] };
    let f = (1..n).map(|j| I * mu * ((-dom.node(j)).exp() / k) * at(j)).collect();
    let g = (0..n).map(|j| I * mu_prime * dom.half_node(j).exp() * 0.5 * (at(j) + at(j + 1))).collect();
    let hh = (0..n).map(|j| (at(j + 1) - at(j)) / h).collect();
    [f, g, hh]
}
