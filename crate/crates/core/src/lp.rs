//! Dense tableau simplex for `max c·x  s.t.  A x ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! Every LP in this crate has that form (the zero vector is feasible), so the
//! slack basis is a valid start and no phase one is needed. Rows and the
//! objective are scaled by their largest coefficient before pivoting.

const PIVOT_EPS: f64 = 1e-9;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
}

/// Solves the LP. `a` is row-major with `rows.len() == b.len()` and each row of
/// length `c.len()`. Panics if `b` has a negative entry.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let n = c.len();
    let m = b.len();
    assert_eq!(a.len(), m, "constraint matrix rows");
    assert!(b.iter().all(|v| *v >= 0.0), "right-hand side must be nonnegative");

    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n, "constraint row length");
        let scale = row.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let base = i * width;
        for (k, v) in row.iter().enumerate() {
            t[base + k] = v / scale;
        }
        t[base + n + i] = 1.0;
        t[base + n + m] = b[i] / scale;
    }
    let obj_scale = c.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let obj_scale = if obj_scale > 0.0 { obj_scale } else { 1.0 };
    let obj = m * width;
    for (k, v) in c.iter().enumerate() {
        t[obj + k] = -v / obj_scale;
    }

    let mut basis: Vec<usize> = (n..n + m).collect();
    let max_iter = 50 * (n + m) + 1000;
    let mut bland = false;
    let mut streak = 0;
    let mut status = LpStatus::IterationLimit;

    for _ in 0..max_iter {
        let entering = if bland {
            (0..n + m).find(|&k| t[obj + k] < -PIVOT_EPS)
        } else {
            let mut best = None;
            let mut most = -PIVOT_EPS;
            for k in 0..n + m {
                if t[obj + k] < most {
                    most = t[obj + k];
                    best = Some(k);
                }
            }
            best
        };
        let Some(e) = entering else {
            status = LpStatus::Optimal;
            break;
        };

        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let coef = t[i * width + e];
            if coef > PIVOT_EPS {
                let ratio = t[i * width + n + m] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && basis[i] < basis[l]),
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            status = LpStatus::Unbounded;
            break;
        };

        if best_ratio <= 1e-12 {
            streak += 1;
            if streak >= DEGENERATE_STREAK {
                bland = true;
            }
        } else {
            streak = 0;
        }
        pivot(&mut t, width, m, r, e);
        basis[r] = e;
    }

    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[i * width + n + m].max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome { x, objective, status }
}

fn pivot(t: &mut [f64], width: usize, m: usize, r: usize, e: usize) {
    let pr = r * width;
    let inv = 1.0 / t[pr + e];
    for k in 0..width {
        t[pr + k] *= inv;
    }
    t[pr + e] = 1.0;
    let (before, rest) = t.split_at_mut(pr);
    let (pivot_row, after) = rest.split_at_mut(width);
    let eliminate = |row: &mut [f64]| {
        let f = row[e];
        if f != 0.0 {
            for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                *v -= f * p;
            }
            row[e] = 0.0;
        }
    };
    for row in before.chunks_mut(width) {
        eliminate(row);
    }
    for row in after.chunks_mut(width).take(m + 1 - r - 1) {
        eliminate(row);
    }
}
