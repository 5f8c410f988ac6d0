//! Clifford action of the orthonormal frame `(e₁, e₂, e₃)` dual to
//! `(𝒵, 𝒳, 𝒴)` on the trivialized spinor bundle `ℂ²`.

use num_complex::Complex;

/// Gaussian-integer 2×2 matrix, so algebraic identities check exactly.
pub type GaussMat = [[Complex<i64>; 2]; 2];

const fn c(re: i64, im: i64) -> Complex<i64> {
    Complex { re, im }
}

/// `σ₁ = diag(i, -i)`, `σ₂ = [[0, -1], [1, 0]]`, `σ₃ = [[0, i], [i, 0]]`.
pub const SIGMA: [GaussMat; 3] = [
    [[c(0, 1), c(0, 0)], [c(0, 0), c(0, -1)]],
    [[c(0, 0), c(-1, 0)], [c(1, 0), c(0, 0)]],
    [[c(0, 0), c(0, 1)], [c(0, 1), c(0, 0)]],
];

/// Lie brackets of the frame: `[e₁, e₂] = -e₂`, `[e₁, e₃] = e₃`,
/// `[e₂, e₃] = 0`, as integer coefficients `[i][j] -> (coefficients of e₁, e₂, e₃)`.
pub const FRAME_BRACKETS: [[[i64; 3]; 3]; 3] = [
    [[0, 0, 0], [0, -1, 0], [0, 0, 1]],
    [[0, 1, 0], [0, 0, 0], [0, 0, 0]],
    [[0, 0, -1], [0, 0, 0], [0, 0, 0]],
];

pub fn mul(a: &GaussMat, b: &GaussMat) -> GaussMat {
    let mut out = [[c(0, 0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn add(a: &GaussMat, b: &GaussMat) -> GaussMat {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn scale(a: &GaussMat, k: i64) -> GaussMat {
    a.map(|row| row.map(|x| x * k))
}

pub fn commutator(a: &GaussMat, b: &GaussMat) -> GaussMat {
    add(&mul(a, b), &scale(&mul(b, a), -1))
}

pub fn anticommutator(a: &GaussMat, b: &GaussMat) -> GaussMat {
    add(&mul(a, b), &mul(b, a))
}

pub fn identity() -> GaussMat {
    [[c(1, 0), c(0, 0)], [c(0, 0), c(1, 0)]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_relations() {
        let zero = [[c(0, 0); 2]; 2];
        for i in 0..3 {
            assert_eq!(mul(&SIGMA[i], &SIGMA[i]), scale(&identity(), -1));
            for j in 0..3 {
                if i != j {
                    assert_eq!(anticommutator(&SIGMA[i], &SIGMA[j]), zero);
                }
            }
        }
        assert_eq!(commutator(&SIGMA[0], &SIGMA[1]), scale(&SIGMA[2], -2));
        assert_eq!(commutator(&SIGMA[0], &SIGMA[2]), scale(&SIGMA[1], 2));
    }

    #[test]
    fn brackets_antisymmetric() {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(FRAME_BRACKETS[i][j][k], -FRAME_BRACKETS[j][i][k]);
                }
            }
        }
    }
}
