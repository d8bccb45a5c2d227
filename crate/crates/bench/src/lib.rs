//! Fixtures shared by the benchmarks.

use isoedge_core::enumeration::{enumerate_primitive, CellRecord, Options};
use isoedge_core::ExactMatrix;

/// The `D_n` Gram matrix (`2` on the diagonal, `−1` between neighbours, plus the fork).
pub fn d_lattice(n: usize) -> ExactMatrix {
    let mut rows = vec![vec![0i64; n]; n];
    for i in 0..n {
        rows[i][i] = 2;
        if i + 1 < n {
            rows[i][i + 1] = -1;
            rows[i + 1][i] = -1;
        }
    }
    if n >= 3 {
        rows[n - 1][n - 2] = 0;
        rows[n - 2][n - 1] = 0;
        rows[n - 1][n - 3] = -1;
        rows[n - 3][n - 1] = -1;
    }
    ExactMatrix::from_i64(&rows)
}

/// A dense, skewed positive definite form.
pub fn skewed(n: usize) -> ExactMatrix {
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 9 + i as i64 } else { ((i * 3 + j * 5) % 5) as i64 - 2 }).collect())
        .collect();
    let sym: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| if i <= j { rows[i][j] } else { rows[j][i] }).collect())
        .collect();
    ExactMatrix::from_i64(&sym)
}

pub fn domains(n: usize) -> Vec<CellRecord> {
    enumerate_primitive(n, &Options::default())
        .expect("enumeration succeeds")
        .domains
}
