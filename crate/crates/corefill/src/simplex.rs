//! Exact simplex for the utility-maximization LP on small cores.
//!
//! Maximizes the sum of nonnegative variables subject to rows of the form
//! "the variables in this mask sum to at most this cap". All arithmetic is
//! in arbitrary-precision rationals, so the reported optimum is exact, and
//! Bland's rule makes termination certain even on degenerate cores. The
//! origin is feasible because caps are nonnegative, so no feasibility phase
//! is needed.

use num::{BigRational, One, Zero};

use crate::error::{Error, Result};

/// One constraint: the variables selected by `mask` sum to at most `cap`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SumBound {
    pub mask: u64,
    pub cap: u64,
}

/// Maximizes `x_0 + ... + x_{n-1}` subject to `x >= 0` and the given sum
/// bounds. Every variable must appear in at least one bound, otherwise the
/// program is unbounded and an error comes back.
pub(crate) fn maximize_unit_sum(n: usize, bounds: &[SumBound]) -> Result<Vec<BigRational>> {
    let m = bounds.len();
    let cols = n + m;
    let mut rows: Vec<Vec<BigRational>> = bounds
        .iter()
        .enumerate()
        .map(|(i, bound)| {
            let mut row = vec![BigRational::zero(); cols + 1];
            for (j, cell) in row.iter_mut().enumerate().take(n) {
                if bound.mask >> j & 1 == 1 {
                    *cell = BigRational::one();
                }
            }
            row[n + i] = BigRational::one();
            row[cols] = BigRational::from_integer(bound.cap.into());
            row
        })
        .collect();
    // Reduced costs of the maximization; positive means "worth entering".
    let mut costs: Vec<BigRational> = (0..cols)
        .map(|j| if j < n { BigRational::one() } else { BigRational::zero() })
        .collect();
    let mut basis: Vec<usize> = (0..m).map(|i| n + i).collect();

    loop {
        // Bland's rule: the lowest-index improving column enters, and ties
        // in the ratio test break toward the lowest-index basic variable.
        let Some(enter) = (0..cols).find(|&j| costs[j] > BigRational::zero()) else {
            break;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if rows[i][enter] > BigRational::zero() {
                let ratio = &rows[i][cols] / &rows[i][enter];
                let tighter = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && basis[i] < basis[*l])
                    }
                };
                if tighter {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leave else {
            return Err(Error::invariant(format!(
                "variable {enter} is unbounded; every variable needs a covering sum bound"
            )));
        };

        let divisor = rows[pivot_row][enter].clone();
        for cell in rows[pivot_row].iter_mut() {
            *cell /= &divisor;
        }
        for i in 0..m {
            if i != pivot_row && !rows[i][enter].is_zero() {
                let factor = rows[i][enter].clone();
                for j in 0..=cols {
                    let delta = &factor * &rows[pivot_row][j];
                    rows[i][j] -= delta;
                }
            }
        }
        if !costs[enter].is_zero() {
            let factor = costs[enter].clone();
            for j in 0..cols {
                let delta = &factor * &rows[pivot_row][j];
                costs[j] -= delta;
            }
        }
        basis[pivot_row] = enter;
    }

    let mut solution = vec![BigRational::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            solution[var] = rows[i][cols].clone();
        }
    }
    Ok(solution)
}
