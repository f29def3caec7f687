//! Least squares through Householder QR with column pivoting.

/// Column norms below `RANK_TOL` times the largest initial column norm are
/// treated as linearly dependent.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankDeficiency {
    pub rank: usize,
    /// Columns left over once the numerical rank is exhausted.
    pub dependent: Vec<usize>,
}

fn norm(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large prices
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

/// Minimizes `||y - X b||` for the column-major design `columns`.
pub fn lstsq(columns: &[Vec<f64>], y: &[f64]) -> Result<LeastSquares, RankDeficiency> {
    let m = columns.len();
    let n = y.len();
    debug_assert!(columns.iter().all(|c| c.len() == n));
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut qty = y.to_vec();
    let mut perm: Vec<usize> = (0..m).collect();
    let max_norm = a.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let tol = RANK_TOL * max_norm;

    let steps = m.min(n);
    for k in 0..steps {
        let (pivot, pnorm) = (k..m)
            .map(|j| (j, norm(&a[j][k..])))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("k < m");
        if pnorm <= tol {
            return Err(RankDeficiency {
                rank: k,
                dependent: perm[k..].to_vec(),
            });
        }
        a.swap(k, pivot);
        perm.swap(k, pivot);

        let alpha = if a[k][k] > 0.0 { -pnorm } else { pnorm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            let reflect = |col: &mut [f64]| {
                let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
                let f = 2.0 * dot / vnorm2;
                for (c, vi) in col.iter_mut().zip(&v) {
                    *c -= f * vi;
                }
            };
            for col in a.iter_mut().skip(k + 1) {
                reflect(&mut col[k..]);
            }
            reflect(&mut qty[k..]);
        }
        a[k][k] = alpha;
        for x in a[k][k + 1..].iter_mut() {
            *x = 0.0;
        }
    }
    if m > n {
        return Err(RankDeficiency {
            rank: n,
            dependent: perm[n..].to_vec(),
        });
    }

    // back substitution on R
    let mut b = vec![0.0; m];
    for k in (0..m).rev() {
        let s: f64 = (k + 1..m).map(|j| a[j][k] * b[j]).sum();
        b[k] = (qty[k] - s) / a[k][k];
    }
    let mut coef = vec![0.0; m];
    for (k, &orig) in perm.iter().enumerate() {
        coef[orig] = b[k];
    }
    let residuals = (0..n)
        .map(|i| y[i] - columns.iter().zip(&coef).map(|(c, b)| c[i] * b).sum::<f64>())
        .collect();
    Ok(LeastSquares { coef, residuals })
}
