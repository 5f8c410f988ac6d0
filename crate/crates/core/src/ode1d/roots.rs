//! Real roots of small real polynomials by Sturm-sequence bisection.

use crate::error::{Error, Result};

/// Polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Poly(pub Vec<f64>);

impl Poly {
    pub(crate) fn trimmed(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub(crate) fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub(crate) fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly::trimmed(self.0.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }

    fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    fn normalized(self) -> Poly {
        let m = self.max_abs();
        if m == 0.0 {
            self
        } else {
            Poly(self.0.into_iter().map(|c| c / m).collect())
        }
    }

    /// Remainder of `self / d`; coefficients below `tol` relative to the
    /// dividend are flushed to zero.
    fn rem(&self, d: &Poly) -> Poly {
        let mut r = self.0.clone();
        let dd = d.degree();
        let lead = d.0[dd];
        let scale = self.max_abs();
        while r.len() > dd && r.len() > 0 {
            let k = r.len() - 1;
            let q = r[k] / lead;
            for i in 0..=dd {
                r[k - dd + i] -= q * d.0[i];
            }
            r.pop();
        }
        for c in r.iter_mut() {
            if c.abs() <= 1e-12 * scale {
                *c = 0.0;
            }
        }
        if r.is_empty() {
            r.push(0.0);
        }
        Poly::trimmed(r)
    }
}

pub(crate) struct Sturm {
    chain: Vec<Poly>,
}

impl Sturm {
    pub(crate) fn new(p: &Poly) -> Self {
        let p0 = p.clone().normalized();
        let p1 = p0.derivative().normalized();
        let mut chain = vec![p0];
        if !p1.is_zero() {
            chain.push(p1);
        }
        while chain.len() >= 2 {
            let k = chain.len();
            if chain[k - 1].degree() == 0 {
                break;
            }
            let r = chain[k - 2].rem(&chain[k - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(Poly(r.0.into_iter().map(|c| -c).collect()).normalized());
        }
        Self { chain }
    }

    fn variations(&self, x: f64) -> usize {
        let mut count = 0;
        let mut last = 0.0f64;
        for p in &self.chain {
            let v = p.eval(x);
            if v != 0.0 {
                if last != 0.0 && v.signum() != last.signum() {
                    count += 1;
                }
                last = v;
            }
        }
        count
    }

    /// Distinct roots in `(a, b]`, or `None` if the count is inconsistent.
    pub(crate) fn count(&self, a: f64, b: f64) -> Option<usize> {
        let (va, vb) = (self.variations(a), self.variations(b));
        va.checked_sub(vb)
    }
}

/// Distinct real roots of `p` in `[lo, hi]`, located to relative width
/// `rel_tol`. With `geometric`, intervals are split at the geometric mean
/// (for `0 < lo`).
pub(crate) fn real_roots(p: &Poly, lo: f64, hi: f64, rel_tol: f64, geometric: bool) -> Result<Vec<f64>> {
    if p.is_zero() {
        return Err(Error::Inconclusive("identically zero polynomial has no isolated roots".into()));
    }
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    let sturm = Sturm::new(p);
    let total = sturm
        .count(lo, hi)
        .ok_or_else(|| Error::Inconclusive("Sturm sequence gave a negative root count".into()))?;
    let mut roots = Vec::new();
    let mut stack = vec![(lo, hi, total)];
    let mut guard = 0usize;
    while let Some((a, b, n)) = stack.pop() {
        guard += 1;
        if guard > 100_000 {
            return Err(Error::Inconclusive("root isolation did not terminate".into()));
        }
        if n == 0 {
            continue;
        }
        let width_ok = b - a <= rel_tol * a.abs().max(b.abs()).max(1e-300);
        if width_ok {
            roots.push(0.5 * (a + b));
            continue;
        }
        if n == 1 {
            let (fa, fb) = (p.eval(a), p.eval(b));
            if fa != 0.0 && fb != 0.0 && fa.signum() != fb.signum() {
                roots.push(bisect_sign(p, a, b, rel_tol));
                continue;
            }
        }
        let mut m = if geometric && a > 0.0 { (a * b).sqrt() } else { 0.5 * (a + b) };
        if p.eval(m) == 0.0 {
            // keep split points off the roots so counts stay well defined
            m += 1e-3 * (b - m);
        }
        let left = sturm.count(a, m);
        let right = sturm.count(m, b);
        match (left, right) {
            (Some(l), Some(r)) if l + r == n => {
                stack.push((m, b, r));
                stack.push((a, m, l));
            }
            _ => {
                return Err(Error::Inconclusive(format!(
                    "inconsistent Sturm counts on [{a}, {b}]"
                )))
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

fn bisect_sign(p: &Poly, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let mut fa = p.eval(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= rel_tol * a.abs().max(b.abs()) || m == a || m == b {
            break;
        }
        let fm = p.eval(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Upper bound on the modulus of every root (Cauchy).
pub(crate) fn root_bound(p: &Poly) -> f64 {
    let n = p.degree();
    let lead = p.0[n].abs();
    1.0 + p.0[..n].iter().fold(0.0f64, |m, c| m.max(c.abs() / lead))
}

/// Lower bound on the modulus of every nonzero root, for `p(0) != 0`.
pub(crate) fn root_lower_bound(p: &Poly) -> f64 {
    let c0 = p.0[0].abs();
    1.0 / (1.0 + p.0[1..].iter().fold(0.0f64, |m, c| m.max(c.abs() / c0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        // (x - 1)(x - 2)(x + 3) = x^3 - 7x + 6
        let p = Poly(vec![6.0, -7.0, 0.0, 1.0]);
        let r = real_roots(&p, -10.0, 10.0, 1e-14, false).unwrap();
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn double_root_found() {
        // (x - 1)^2 (x + 1)
        let p = Poly(vec![1.0, -1.0, -1.0, 1.0]);
        let r = real_roots(&p, -5.0, 5.0, 1e-12, false).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-10);
        // A double root is only determined to about sqrt(eps).
        assert!((r[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn no_real_roots() {
        let p = Poly(vec![1.0, 0.0, 1.0]);
        assert!(real_roots(&p, -5.0, 5.0, 1e-12, false).unwrap().is_empty());
    }

    #[test]
    fn geometric_split_for_tiny_roots() {
        // roots 1e-6 and 1e3
        let p = Poly(vec![1e-3, -(1e3 + 1e-6), 1.0]);
        let lo = root_lower_bound(&p);
        let hi = root_bound(&p);
        let r = real_roots(&p, lo * 0.5, hi, 1e-13, true).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] / 1e-6 - 1.0).abs() < 1e-9);
        assert!((r[1] / 1e3 - 1.0).abs() < 1e-9);
    }
}
