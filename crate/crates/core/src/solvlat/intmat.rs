//! 2×2 integer matrix arithmetic. Row-major `[[a, b], [c, d]]`.

pub type IntMat = [[i64; 2]; 2];

pub const IDENTITY: IntMat = [[1, 0], [0, 1]];

pub fn det(m: &IntMat) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn trace(m: &IntMat) -> i64 {
    m[0][0] + m[1][1]
}

pub fn mul(a: &IntMat, b: &IntMat) -> IntMat {
    let mut out = [[0i64; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn transpose(m: &IntMat) -> IntMat {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

/// Adjugate: `m · adj(m) = det(m) · I`.
pub fn adjugate(m: &IntMat) -> IntMat {
    [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
}

/// Inverse of a matrix with determinant ±1.
pub fn inverse_unimodular(m: &IntMat) -> Option<IntMat> {
    match det(m) {
        1 => Some(adjugate(m)),
        -1 => {
            let a = adjugate(m);
            Some([[-a[0][0], -a[0][1]], [-a[1][0], -a[1][1]]])
        }
        _ => None,
    }
}

/// `m^k` for `k >= 0`, or `None` on overflow.
pub fn checked_pow(m: &IntMat, k: u32) -> Option<IntMat> {
    let mut acc = IDENTITY;
    for _ in 0..k {
        let mut next = [[0i64; 2]; 2];
        for (i, row) in next.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let x = (acc[i][0] as i128) * (m[0][j] as i128)
                    + (acc[i][1] as i128) * (m[1][j] as i128);
                *cell = i64::try_from(x).ok()?;
            }
        }
        acc = next;
    }
    Some(acc)
}

/// `m^k` for any integer `k`, requiring `det m = ±1` when `k < 0`.
pub fn signed_pow(m: &IntMat, k: i64) -> Option<IntMat> {
    if k >= 0 {
        checked_pow(m, u32::try_from(k).ok()?)
    } else {
        checked_pow(&inverse_unimodular(m)?, u32::try_from(-k).ok()?)
    }
}

pub fn apply(m: &IntMat, v: [i64; 2]) -> [i64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}
