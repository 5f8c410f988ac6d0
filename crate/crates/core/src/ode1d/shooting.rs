//! Gauss–Legendre integration of 2×2 linear systems and a shooting oracle
//! for scalar Schrödinger problems.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::domain::{auto_domain, DomainSpec};
use super::potential::PotentialSpec;
use super::OperatorSpec;
use crate::error::{Error, Result};

pub type Mat2 = [[C; 2]; 2];

/// Result of integrating `y' = M(z) y` with positive renormalizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Integration {
    /// Final state divided by `e^{log_scale}`.
    pub end: [C; 2],
    pub log_scale: f64,
    /// Largest change of `|y₀|² - |y₁|²` relative to the current `|y|²`.
    /// Zero in exact arithmetic when `M` preserves this form.
    pub max_drift: f64,
    pub steps: usize,
}

fn form(y: &[C; 2]) -> f64 {
    y[0].norm_sqr() - y[1].norm_sqr()
}

fn norm(y: &[C; 2]) -> f64 {
    (y[0].norm_sqr() + y[1].norm_sqr()).sqrt()
}

/// One 2-stage Gauss–Legendre step (order 4).
fn gl2_step<F: Fn(f64) -> Mat2>(m: &F, z: f64, h: f64, y: &[C; 2]) -> Option<[C; 2]> {
    let r = 3f64.sqrt() / 6.0;
    let c = [0.5 - r, 0.5 + r];
    let a = [[0.25, 0.25 - r], [0.25 + r, 0.25]];
    let ms = [m(z + c[0] * h), m(z + c[1] * h)];
    let mut lhs = Matrix4::<C>::identity();
    let mut rhs = Vector4::<C>::zeros();
    for s in 0..2 {
        for t in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    lhs[(2 * s + i, 2 * t + j)] -= ms[s][i][j] * (h * a[s][t]);
                }
            }
        }
        for i in 0..2 {
            rhs[2 * s + i] = ms[s][i][0] * y[0] + ms[s][i][1] * y[1];
        }
    }
    let k = lhs.lu().solve(&rhs)?;
    Some([
        y[0] + (k[0] + k[2]) * (0.5 * h),
        y[1] + (k[1] + k[3]) * (0.5 * h),
    ])
}

/// Integrates `y' = M(z) y` from `z0` to `z1` (either direction) with step
/// lengths `step(z)`, renormalizing by positive factors.
pub fn gl2_integrate<F, S>(m: F, y0: [C; 2], z0: f64, z1: f64, step: S) -> Result<Integration>
where
    F: Fn(f64) -> Mat2,
    S: Fn(f64) -> f64,
{
    let dir = if z1 >= z0 { 1.0 } else { -1.0 };
    let n0 = norm(&y0);
    if n0 == 0.0 {
        return Err(Error::InvalidArgument("zero initial state".into()));
    }
    let mut y = [y0[0] / n0, y0[1] / n0];
    let mut log_scale = n0.ln();
    let q0 = form(&y0);
    let mut z = z0;
    let mut steps = 0usize;
    let mut max_drift = 0.0f64;
    while (z1 - z) * dir > 0.0 {
        let mut h = step(z).min((z1 - z).abs());
        if !(h > 1e-12 * z.abs().max(1.0)) {
            return Err(Error::StiffnessFailure { z });
        }
        if (z1 - z).abs() - h < 1e-12 * z.abs().max(1.0) {
            h = (z1 - z).abs();
        }
        let next = gl2_step(&m, z, dir * h, &y).ok_or(Error::StiffnessFailure { z })?;
        let n = norm(&next);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::StiffnessFailure { z });
        }
        // drift of the form relative to the current size of the solution
        let expected = q0 * (-2.0 * log_scale).exp();
        max_drift = max_drift.max((form(&next) - expected).abs() / (n * n));
        y = [next[0] / n, next[1] / n];
        log_scale += n.ln();
        z = if (z1 - z).abs() <= h { z1 } else { z + dir * h };
        steps += 1;
        if steps > 50_000_000 {
            return Err(Error::StiffnessFailure { z });
        }
    }
    Ok(Integration { end: y, log_scale, max_drift, steps })
}

const MAX_STEP: f64 = 0.005;
const PHASE_STEP: f64 = 0.005;

fn schrodinger_matrix(potential: &PotentialSpec, lambda: f64) -> impl Fn(f64) -> Mat2 + '_ {
    move |z| {
        [
            [C::new(0.0, 0.0), C::new(1.0, 0.0)],
            [C::new(potential.value(z) - lambda, 0.0), C::new(0.0, 0.0)],
        ]
    }
}

/// Normalized Wronskian at `z_match` of the solutions of `-f'' + Φf = λf`
/// that decay at the two ends of `dom` (first-order WKB initial data).
pub fn matching_function(potential: &PotentialSpec, dom: &DomainSpec, z_match: f64, lambda: f64) -> Result<f64> {
    let (lo, hi) = (dom.lower(), dom.upper());
    let init = |z: f64, sign: f64| -> Result<[C; 2]> {
        let q = potential.value(z) - lambda;
        if !(q > 0.0) {
            return Err(Error::DomainTooSmall { boundary: potential.value(z), required: lambda });
        }
        let slope = sign * q.sqrt() - potential.derivative(z) / (4.0 * q);
        Ok([C::new(1.0, 0.0), C::new(slope, 0.0)])
    };
    let step = |z: f64| MAX_STEP.min(PHASE_STEP / (potential.value(z) - lambda).abs().sqrt().max(1e-300));
    let left = gl2_integrate(schrodinger_matrix(potential, lambda), init(lo, 1.0)?, lo, z_match, step)?;
    let right = gl2_integrate(schrodinger_matrix(potential, lambda), init(hi, -1.0)?, hi, z_match, step)?;
    let (l, r) = (left.end, right.end);
    Ok((l[0] * r[1] - l[1] * r[0]).re)
}

/// Eigenvalue of a scalar Schrödinger operator inside `bracket`, located
/// where the matching Wronskian changes sign and refined to `1e-10`.
pub fn shooting_eigenvalue(op: &OperatorSpec, bracket: (f64, f64)) -> Result<f64> {
    let OperatorSpec::Schrodinger { potential } = op else {
        return Err(Error::InvalidArgument("shooting is implemented for scalar operators".into()));
    };
    let (mut a, mut b) = bracket;
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("empty bracket [{a}, {b}]")));
    }
    if !potential.is_confining() {
        return Err(Error::NotConfining);
    }
    let center = op.natural_center();
    let dom = auto_domain(potential, center, b, 16)?;
    let f = |l: f64| matching_function(potential, &dom, center, l);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRootInBracket { lo: bracket.0, hi: bracket.1 });
    }
    // Illinois variant of regula falsi, with a bisection step whenever the
    // bracket fails to halve
    let mut side = 0i8;
    let mut width = b - a;
    for iter in 0..300 {
        if b - a <= 1e-10 {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if iter % 3 == 2 {
            if b - a > 0.5 * width {
                c = 0.5 * (a + b);
            }
            width = b - a;
        }
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}
