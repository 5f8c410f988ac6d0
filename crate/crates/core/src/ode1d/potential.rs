use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::roots::{real_roots, root_bound, root_lower_bound, Poly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub coeff: f64,
    pub exponent: i32,
}

/// A potential on the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum PotentialSpec {
    /// `Σ cᵢ e^{kᵢ z} + offset`.
    ExpSum { terms: Vec<ExpTerm>, offset: f64 },
    /// `Σ c_k z^k`, used for validation problems such as `z²`.
    Polynomial { coeffs: Vec<f64> },
}

impl PotentialSpec {
    pub fn exp_sum(terms: &[(f64, i32)], offset: f64) -> Self {
        PotentialSpec::ExpSum {
            terms: terms.iter().map(|&(coeff, exponent)| ExpTerm { coeff, exponent }).collect(),
            offset,
        }
    }

    pub fn polynomial(coeffs: &[f64]) -> Self {
        PotentialSpec::Polynomial { coeffs: coeffs.to_vec() }
    }

    /// `μ² e^{-2z} + μ'² e^{2z}`.
    pub fn mode(mu: f64, mu_prime: f64) -> Self {
        Self::exp_sum(&[(mu * mu, -2), (mu_prime * mu_prime, 2)], 0.0)
    }

    /// Coefficients by exponent with like terms merged; the offset is the
    /// exponent-0 term. Zero coefficients are dropped.
    fn merged(&self) -> BTreeMap<i32, f64> {
        let mut map = BTreeMap::new();
        match self {
            PotentialSpec::ExpSum { terms, offset } => {
                *map.entry(0).or_insert(0.0) += offset;
                for t in terms {
                    *map.entry(t.exponent).or_insert(0.0) += t.coeff;
                }
            }
            PotentialSpec::Polynomial { coeffs } => {
                for (k, &c) in coeffs.iter().enumerate() {
                    map.insert(k as i32, c);
                }
            }
        }
        map.retain(|_, c| *c != 0.0);
        map
    }

    pub fn value(&self, z: f64) -> f64 {
        match self {
            PotentialSpec::ExpSum { terms, offset } => {
                offset + terms.iter().map(|t| t.coeff * (t.exponent as f64 * z).exp()).sum::<f64>()
            }
            PotentialSpec::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c),
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            PotentialSpec::ExpSum { terms, .. } => terms
                .iter()
                .map(|t| t.exponent as f64 * t.coeff * (t.exponent as f64 * z).exp())
                .sum(),
            PotentialSpec::Polynomial { coeffs } => Poly(coeffs.clone()).derivative().eval(z),
        }
    }

    /// The potential plus a constant.
    pub fn shifted(&self, delta: f64) -> Self {
        match self {
            PotentialSpec::ExpSum { terms, offset } => {
                PotentialSpec::ExpSum { terms: terms.clone(), offset: offset + delta }
            }
            PotentialSpec::Polynomial { coeffs } => {
                let mut c = coeffs.clone();
                if c.is_empty() {
                    c.push(0.0);
                }
                c[0] += delta;
                PotentialSpec::Polynomial { coeffs: c }
            }
        }
    }

    /// Limits at `-∞` and `+∞`.
    pub fn limits(&self) -> (f64, f64) {
        let map = self.merged();
        let (Some((&kmin, &cmin)), Some((&kmax, &cmax))) = (map.first_key_value(), map.last_key_value()) else {
            return (0.0, 0.0);
        };
        let inf = |c: f64| if c > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        match self {
            PotentialSpec::ExpSum { .. } => {
                let minus = if kmin < 0 {
                    inf(cmin)
                } else if kmin == 0 {
                    cmin
                } else {
                    0.0
                };
                let plus = if kmax > 0 {
                    inf(cmax)
                } else if kmax == 0 {
                    cmax
                } else {
                    0.0
                };
                (minus, plus)
            }
            PotentialSpec::Polynomial { .. } => {
                if kmax == 0 {
                    (cmax, cmax)
                } else if kmax % 2 == 0 {
                    (inf(cmax), inf(cmax))
                } else {
                    (inf(-cmax), inf(cmax))
                }
            }
        }
    }

    /// Growth to `+∞` in both directions.
    pub fn is_confining(&self) -> bool {
        let (a, b) = self.limits();
        a == f64::INFINITY && b == f64::INFINITY
    }

    /// Real critical points, sorted.
    pub fn critical_points(&self, rel_tol: f64) -> Result<Vec<f64>> {
        let map = self.merged();
        match self {
            PotentialSpec::ExpSum { .. } => {
                // Φ'(z) = Σ k c_k u^k with u = e^z; clear the lowest power.
                let deriv: Vec<(i32, f64)> =
                    map.iter().filter(|(k, _)| **k != 0).map(|(&k, &c)| (k, k as f64 * c)).collect();
                if deriv.len() < 2 {
                    return Ok(Vec::new());
                }
                let kmin = deriv[0].0;
                let kmax = deriv[deriv.len() - 1].0;
                let mut coeffs = vec![0.0; (kmax - kmin) as usize + 1];
                for (k, c) in deriv {
                    coeffs[(k - kmin) as usize] = c;
                }
                let p = Poly::trimmed(coeffs);
                let lo = 0.5 * root_lower_bound(&p);
                let hi = 2.0 * root_bound(&p);
                let roots = real_roots(&p, lo, hi, rel_tol, true)?;
                Ok(roots.into_iter().map(f64::ln).collect())
            }
            PotentialSpec::Polynomial { coeffs } => {
                let p = Poly::trimmed(coeffs.clone()).derivative();
                if p.is_zero() || p.degree() == 0 {
                    return Ok(Vec::new());
                }
                let b = 2.0 * root_bound(&p);
                real_roots(&p, -b, b, rel_tol, false)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "z", rename_all = "camelCase")]
pub enum Location {
    At(f64),
    MinusInfinity,
    PlusInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Certificate {
    /// `inf Φ = min > 0`, attained at `argmin` or approached there.
    Positive { min: f64, argmin: Location },
    /// `inf Φ <= 0`; `witness` is a point with `Φ(witness) = value`, which is
    /// `<= 0` unless the infimum is only approached at infinity.
    NotPositive { witness: f64, value: f64 },
}

impl Certificate {
    pub fn is_positive(&self) -> bool {
        matches!(self, Certificate::Positive { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateConfig {
    /// Relative width to which critical points are located.
    pub root_tol: f64,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self { root_tol: 1e-13 }
    }
}

/// Decides whether `inf Φ > 0` from the critical points of `Φ` and its limits.
pub fn positivity_certificate(phi: &PotentialSpec, config: &CertificateConfig) -> Result<Certificate> {
    let (minus, plus) = phi.limits();
    for (limit, dir) in [(minus, -1.0), (plus, 1.0)] {
        if limit == f64::NEG_INFINITY {
            let mut z = dir;
            while phi.value(z) > 0.0 {
                z *= 2.0;
                if z.abs() > 1e6 {
                    return Err(Error::Inconclusive("could not locate a negative value".into()));
                }
            }
            return Ok(Certificate::NotPositive { witness: z, value: phi.value(z) });
        }
    }
    let crit = phi.critical_points(config.root_tol)?;
    let mut best: Option<(f64, Location)> = None;
    let mut consider = |v: f64, loc: Location| {
        if best.map_or(true, |(b, _)| v < b) {
            best = Some((v, loc));
        }
    };
    for &z in &crit {
        consider(phi.value(z), Location::At(z));
    }
    if minus.is_finite() {
        consider(minus, Location::MinusInfinity);
    }
    if plus.is_finite() {
        consider(plus, Location::PlusInfinity);
    }
    let Some((min, argmin)) = best else {
        // no critical points and infinite limits of the same sign cannot both be +∞ without a minimum
        return Err(Error::Inconclusive("no candidate minimum found".into()));
    };
    if !min.is_finite() {
        return Err(Error::Inconclusive(format!("non-finite candidate minimum {min}")));
    }
    if min > 0.0 {
        return Ok(Certificate::Positive { min, argmin });
    }
    let witness = match argmin {
        Location::At(z) => z,
        Location::MinusInfinity | Location::PlusInfinity => {
            let dir = if argmin == Location::MinusInfinity { -1.0 } else { 1.0 };
            let mut z = dir;
            // walk out until Φ is within 1e-12 of its limit
            while (phi.value(z) - min).abs() > 1e-12 && z.abs() < 1e4 {
                z *= 2.0;
            }
            z
        }
    };
    Ok(Certificate::NotPositive { witness, value: phi.value(witness) })
}
