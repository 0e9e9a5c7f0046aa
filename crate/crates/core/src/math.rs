//! Combinatorial helpers shared by the step maps and matrix elements.

/// `ln(n!)` for `n = 0..=max`.
pub(crate) fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for n in 1..=max {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

/// Rows of Pascal's triangle as floats, `table[n][r] = C(n, r)`.
pub(crate) fn binomials(max: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max + 1);
    for n in 0..=max {
        let mut row = vec![1.0; n + 1];
        for r in 1..n {
            row[r] = rows[n - 1][r - 1] + rows[n - 1][r];
        }
        rows.push(row);
    }
    rows
}

/// `table[n][r] = sqrt(C(n, r))`.
pub(crate) fn sqrt_binomials(max: usize) -> Vec<Vec<f64>> {
    binomials(max)
        .into_iter()
        .map(|row| row.into_iter().map(f64::sqrt).collect())
        .collect()
}

pub(crate) fn parity_sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
