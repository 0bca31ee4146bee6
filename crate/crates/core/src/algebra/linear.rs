//! Exact Gaussian elimination over rational functions.

use super::coeff::Coeff;
use super::error::{AlgebraError, Result};
use super::rational_fn::RationalFn;

/// Outcome of `exact_linear_solve`.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearSolution<C: Coeff> {
    Unique(Vec<RationalFn<C>>),
    /// Singular but consistent: every solution is `particular + Σ tᵢ·nullspace[i]`.
    Free { particular: Vec<RationalFn<C>>, nullspace: Vec<Vec<RationalFn<C>>>, rank: usize },
}

impl<C: Coeff> LinearSolution<C> {
    pub fn particular(&self) -> &[RationalFn<C>] {
        match self {
            LinearSolution::Unique(v) => v,
            LinearSolution::Free { particular, .. } => particular,
        }
    }
}

fn cost<C: Coeff>(r: &RationalFn<C>) -> usize {
    r.numer().len() + r.denom().len()
}

/// Reduced row echelon form in place. Returns pivot columns.
fn rref<C: Coeff>(m: &mut [Vec<RationalFn<C>>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= m.len() {
            break;
        }
        // Prefer the simplest nonzero entry as pivot to limit expression swell.
        let pick = (row..m.len()).filter(|&r| !m[r][col].is_zero()).min_by_key(|&r| cost(&m[r][col]));
        let Some(p) = pick else { continue };
        m.swap(row, p);
        let inv = m[row][col].inv().expect("nonzero pivot");
        for c in col..m[row].len() {
            m[row][c] = &m[row][c] * &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..m[r].len() {
                    let t = &factor * &m[row][c];
                    m[r][c] = &m[r][c] - &t;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Solves `A x = b` exactly.
///
/// A singular but consistent system yields `LinearSolution::Free`; an
/// inconsistent one is an error carrying both ranks.
pub fn exact_linear_solve<C: Coeff>(
    a: &[Vec<RationalFn<C>>],
    b: &[RationalFn<C>],
) -> Result<LinearSolution<C>> {
    let n = a.len();
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(AlgebraError::NotSquare { rows: n, cols: row.len() });
    }
    if b.len() != n {
        return Err(AlgebraError::DimensionMismatch { rows: n, rhs: b.len() });
    }
    let mut m: Vec<Vec<RationalFn<C>>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m, n);
    let rank = pivots.len();
    let inconsistent = m[rank..].iter().any(|r| !r[n].is_zero());
    if inconsistent {
        return Err(AlgebraError::Inconsistent { rank, augmented_rank: rank + 1 });
    }
    let mut particular = vec![RationalFn::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = m[r][n].clone();
    }
    if rank == n {
        return Ok(LinearSolution::Unique(particular));
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let nullspace = free
        .iter()
        .map(|&f| {
            let mut v = vec![RationalFn::zero(); n];
            v[f] = RationalFn::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -&m[r][f];
            }
            v
        })
        .collect();
    Ok(LinearSolution::Free { particular, nullspace, rank })
}

/// Rank of a (not necessarily square) matrix.
pub fn rank<C: Coeff>(a: &[Vec<RationalFn<C>>]) -> usize {
    if a.is_empty() {
        return 0;
    }
    let ncols = a[0].len();
    let mut m = a.to_vec();
    rref(&mut m, ncols).len()
}
