//! Dense Phase-I simplex for `{ x >= 0 : A x = b }`.
//!
//! Returns either a feasible point or a Farkas certificate `z` with
//! `Aᵀz >= 0` and `bᵀz = -1`, which proves that no nonnegative solution
//! exists. The marginal-consistency systems are highly degenerate and
//! rank deficient, so pivoting needs some care.

const PIVOT_TOL: f64 = 1e-9;
const RATIO_TOL: f64 = 1e-13;
const COST_TOL: f64 = 1e-11;
/// Phase-I optimum below this counts as feasible.
const PHASE_ONE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Feasible(Vec<f64>),
    /// Farkas multipliers `z`, one per row of `A`.
    Infeasible(Vec<f64>),
}

/// Finds `x >= 0` with `A x = b` or proves that none exists.
///
/// `a` is row-major with every row of the same length.
pub fn find_feasible_point(a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let m = a.len();
    assert_eq!(m, b.len(), "row count mismatch");
    let nvar = a.first().map_or(0, Vec::len);
    let width = nvar + m + 1;
    let rhs = width - 1;

    // rows with negative rhs are flipped so the artificial basis starts feasible
    let signs: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut t = vec![0.0; m * width];
    for i in 0..m {
        assert_eq!(a[i].len(), nvar, "ragged constraint matrix");
        let row = &mut t[i * width..(i + 1) * width];
        for j in 0..nvar {
            row[j] = signs[i] * a[i][j];
        }
        row[nvar + i] = 1.0;
        row[rhs] = signs[i] * b[i];
    }
    // reduced costs of the Phase-I objective (sum of artificials); last entry is -w
    let mut cost = vec![0.0; width];
    for i in 0..m {
        for j in 0..nvar {
            cost[j] -= t[i * width + j];
        }
        cost[rhs] -= t[i * width + rhs];
    }
    let mut basis: Vec<usize> = (nvar..nvar + m).collect();

    // Dantzig pricing with largest-pivot tie-breaking keeps the pivot count
    // and the conditioning reasonable on these rank-deficient systems. After
    // a long run of degenerate pivots we switch to Bland's rule for good,
    // which cannot cycle.
    let stall_limit = 5 * m + 50;
    let mut degenerate_run = 0;
    let mut bland = false;
    loop {
        let mut candidates: Vec<usize> = (0..nvar + m).filter(|&j| cost[j] < -COST_TOL).collect();
        if !bland {
            candidates.sort_by(|&x, &y| cost[x].total_cmp(&cost[y]));
        }
        let step = candidates
            .into_iter()
            .find_map(|enter| leaving_row(&t, width, &basis, enter, bland).map(|r| (r, enter)));
        // Phase-I is bounded below by 0, so a column without an admissible
        // pivot only has roundoff-level cost; no step left means optimal.
        let Some((r, enter)) = step else { break };
        let before = cost[rhs];
        pivot(&mut t, &mut cost, width, r, enter);
        basis[r] = enter;
        if (cost[rhs] - before).abs() <= PHASE_ONE_TOL * 1e-3 {
            degenerate_run += 1;
            bland |= degenerate_run > stall_limit;
        } else {
            degenerate_run = 0;
        }
    }

    let objective = -cost[rhs];
    if objective <= PHASE_ONE_TOL {
        let mut x = vec![0.0; nvar];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < nvar {
                x[bv] = t[i * width + rhs].max(0.0);
            }
        }
        LpOutcome::Feasible(x)
    } else {
        // reduced cost of artificial k is 1 - y_k, and -y is a Farkas ray
        // for the flipped system; undo the flips and scale so that bᵀz = -1.
        let mut z: Vec<f64> = (0..m).map(|k| -(1.0 - cost[nvar + k]) * signs[k]).collect();
        let btz: f64 = z.iter().zip(b).map(|(zi, bi)| zi * bi).sum();
        if btz < 0.0 {
            for v in &mut z {
                *v /= -btz;
            }
        }
        LpOutcome::Infeasible(z)
    }
}

fn leaving_row(t: &[f64], width: usize, basis: &[usize], enter: usize, strict: bool) -> Option<usize> {
    let rhs = width - 1;
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, &bv) in basis.iter().enumerate() {
        let piv = t[i * width + enter];
        if piv <= PIVOT_TOL {
            continue;
        }
        let ratio = t[i * width + rhs].max(0.0) / piv;
        best = match best {
            None => Some((i, ratio, piv)),
            Some((l, r0, p0)) => {
                let take = if ratio < r0 - RATIO_TOL {
                    true
                } else if ratio > r0 + RATIO_TOL {
                    false
                } else if strict {
                    bv < basis[l]
                } else {
                    piv > p0
                };
                if take { Some((i, ratio, piv)) } else { Some((l, r0, p0)) }
            }
        };
    }
    best.map(|(i, _, _)| i)
}

fn pivot(t: &mut [f64], cost: &mut [f64], width: usize, r: usize, c: usize) {
    let m = t.len() / width;
    let p = t[r * width + c];
    for v in &mut t[r * width..(r + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[r * width..(r + 1) * width].to_vec();
    for i in 0..m {
        if i == r {
            continue;
        }
        let f = t[i * width + c];
        if f != 0.0 {
            let row = &mut t[i * width..(i + 1) * width];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[c] = 0.0;
        }
    }
    let f = cost[c];
    if f != 0.0 {
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        cost[c] = 0.0;
    }
}

/// `max_i |(A x - b)_i|`.
pub fn equality_residual(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(row, bi)| (row.iter().zip(x).map(|(r, xv)| r * xv).sum::<f64>() - bi).abs())
        .fold(0.0, f64::max)
}

/// How far `z` is from a valid Farkas certificate: the worst violation of
/// `Aᵀz >= 0` and of `bᵀz = -1`, clipped at zero.
pub fn certificate_violation(a: &[Vec<f64>], b: &[f64], z: &[f64]) -> f64 {
    let nvar = a.first().map_or(0, Vec::len);
    let mut worst: f64 = 0.0;
    for j in 0..nvar {
        let col: f64 = a.iter().zip(z).map(|(row, zi)| row[j] * zi).sum();
        worst = worst.max(-col);
    }
    let btz: f64 = z.iter().zip(b).map(|(zi, bi)| zi * bi).sum();
    worst.max((btz + 1.0).abs())
}
