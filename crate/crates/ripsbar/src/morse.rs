//! Block reduction through discrete Morse pairings and Schur complements.
//!
//! Each round selects a set of pivot pairs (i = low(j), j) whose pivot block
//! A is upper-triangular with unit diagonal by construction, eliminates the
//! whole block at once (E' = D + C * A^-1 B, computed without forming the
//! inverse), and recurses on the smaller matrix. With filtration birth data
//! the selection is restricted to pairs born at the same grade, so each round
//! removes simplices that cancel instantly; the remaining pairs fall out of
//! later unrestricted rounds.

use std::time::Instant;

use crate::error::Result;
use crate::gf2::{xor_sorted, PivotSet, ReductionResult, SparseBoolMatrix};
use crate::kernels::blockprodsum;
use crate::reduce::ClearedColumn;

/// Per-round instrumentation of the block reduction.
#[derive(Clone, Debug)]
pub struct MorseIteration {
    pub npairs: usize,
    /// Nonzeros of the working block before elimination.
    pub block_nnz: usize,
    pub field_seconds: f64,
    pub schur_seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct MorseStats {
    pub iterations: Vec<MorseIteration>,
}

impl MorseStats {
    pub fn total_pairs(&self) -> usize {
        self.iterations.iter().map(|it| it.npairs).sum()
    }

    pub fn field_seconds(&self) -> f64 {
        self.iterations.iter().map(|it| it.field_seconds).sum()
    }

    pub fn schur_seconds(&self) -> f64 {
        self.iterations.iter().map(|it| it.schur_seconds).sum()
    }
}

/// Selects a Morse field on the working block: pairs (low(j), j) with
/// strictly increasing rows and columns such that in each pivot row, every
/// earlier nonzero column is itself paired. Those two conditions make the
/// pivot block upper-unitriangular and keep the accumulated basis matrix
/// upper-triangular. `compatible` restricts which (row, col) pairs are
/// admissible; selection falls back to unrestricted pairing when the
/// restriction admits nothing, which guarantees progress on any nonzero
/// block.
pub fn select_morse_field(
    e: &SparseBoolMatrix,
    compatible: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let attempt = |check: bool| -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut row_used = vec![false; e.nrows()];
        let mut col_paired = vec![false; e.ncols()];
        // Row-access copy for the earlier-columns condition.
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); e.nrows()];
        for j in 0..e.ncols() {
            for &i in e.col(j) {
                rows[i].push(j);
            }
        }
        let mut last_row = None;
        for j in 0..e.ncols() {
            let Some(i) = e.low(j) else { continue };
            if row_used[i] || (check && !compatible(i, j)) {
                continue;
            }
            if last_row.is_some_and(|r| i <= r) {
                continue;
            }
            if !rows[i].iter().take_while(|&&c| c < j).all(|&c| col_paired[c]) {
                continue;
            }
            row_used[i] = true;
            col_paired[j] = true;
            last_row = Some(i);
            pairs.push((i, j));
        }
        pairs
    };
    let pairs = attempt(true);
    if pairs.is_empty() && !e.is_zero() {
        attempt(false)
    } else {
        pairs
    }
}

/// Morse block reduction of `d` into an R = D*V decomposition.
///
/// `births`, when present, gives the filtration grade of each row and column
/// of `d`; pair selection then prefers equal-grade pairs. `cleared` seeds
/// known-zero columns exactly as in the other backends.
pub fn morse_reduce_with_births(
    d: &SparseBoolMatrix,
    cleared: &[ClearedColumn],
    births: Option<(&[usize], &[usize])>,
    workers: usize,
) -> Result<(ReductionResult, MorseStats)> {
    let n = d.ncols();
    let mut vcols: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
    let mut e = d.clone();
    if !cleared.is_empty() {
        let mut ecols = e.to_columns();
        for (c, vcol) in cleared {
            ecols[*c].clear();
            vcols[*c] = vcol.clone();
        }
        e = SparseBoolMatrix::from_columns(d.nrows(), &ecols)?;
    }
    let mut row_ids: Vec<usize> = (0..d.nrows()).collect();
    let mut col_ids: Vec<usize> = (0..n).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut stats = MorseStats::default();

    while !e.is_zero() {
        let block_nnz = e.nnz();
        let t0 = Instant::now();
        let pairs = select_morse_field(&e, |i, j| match births {
            Some((rb, cb)) => rb[row_ids[i]] == cb[col_ids[j]],
            None => true,
        });
        let field_seconds = t0.elapsed().as_secs_f64();
        debug_assert!(!pairs.is_empty());

        let t1 = Instant::now();
        let pair_rows: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let pair_cols: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let mut in_pair_row = vec![false; e.nrows()];
        let mut in_pair_col = vec![false; e.ncols()];
        for &(i, j) in &pairs {
            in_pair_row[i] = true;
            in_pair_col[j] = true;
        }
        let rest_rows: Vec<usize> = (0..e.nrows()).filter(|&i| !in_pair_row[i]).collect();
        let rest_cols: Vec<usize> = (0..e.ncols()).filter(|&j| !in_pair_col[j]).collect();

        let a = e.submatrix(&pair_rows, &pair_cols);
        let b = e.submatrix(&pair_rows, &rest_cols);
        let c = e.submatrix(&rest_rows, &pair_cols);
        let dblk = e.submatrix(&rest_rows, &rest_cols);
        let x = a.upper_tri_solve(&b)?;
        let e_next = blockprodsum(&dblk, &c, &x, workers)?;

        for (q, &rc) in rest_cols.iter().enumerate() {
            for &p in x.col(q) {
                vcols[col_ids[rc]] =
                    xor_sorted(&vcols[col_ids[rc]], &vcols[col_ids[pair_cols[p]]]);
            }
        }
        pivots.extend(pairs.iter().map(|&(i, j)| (row_ids[i], col_ids[j])));
        let schur_seconds = t1.elapsed().as_secs_f64();
        stats.iterations.push(MorseIteration {
            npairs: pairs.len(),
            block_nnz,
            field_seconds,
            schur_seconds,
        });

        row_ids = rest_rows.iter().map(|&i| row_ids[i]).collect();
        col_ids = rest_cols.iter().map(|&j| col_ids[j]).collect();
        e = e_next;
    }

    let v = SparseBoolMatrix::from_columns(n, &vcols)?;
    let r = d.multiply(&v)?;
    Ok((
        ReductionResult { r, v, pivots: PivotSet::new(pivots) },
        stats,
    ))
}

/// [`morse_reduce_with_births`] without filtration data.
pub fn morse_reduce(
    d: &SparseBoolMatrix,
    cleared: &[ClearedColumn],
    workers: usize,
) -> Result<(ReductionResult, MorseStats)> {
    morse_reduce_with_births(d, cleared, None, workers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce::ph_col;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut impl Rng, max_dim: usize, density: f64) -> SparseBoolMatrix {
        let nrows = rng.gen_range(1..=max_dim);
        let ncols = rng.gen_range(1..=max_dim);
        let mut triplets = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                if rng.gen_bool(density) {
                    triplets.push((i, j));
                }
            }
        }
        SparseBoolMatrix::from_triplets(nrows, ncols, &triplets).unwrap()
    }

    #[test]
    fn reduces_zero_matrix_in_zero_rounds() {
        let d = SparseBoolMatrix::zero(4, 3);
        let (res, stats) = morse_reduce(&d, &[], 1).unwrap();
        res.verify(&d).unwrap();
        assert!(stats.iterations.is_empty());
        assert!(res.pivots.is_empty());
        assert!(res.v.is_upper_unitriangular());
    }

    #[test]
    fn reduces_identity_in_one_round() {
        let d = SparseBoolMatrix::identity(5);
        let (res, stats) = morse_reduce(&d, &[], 1).unwrap();
        res.verify(&d).unwrap();
        assert_eq!(stats.iterations.len(), 1);
        assert_eq!(stats.iterations[0].npairs, 5);
    }

    #[test]
    fn matches_column_reduction_pivots() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for trial in 0..300 {
            let d = random_matrix(&mut rng, 25, 0.2 + 0.4 * (trial % 3) as f64 / 3.0);
            let (res, _) = morse_reduce(&d, &[], 1).unwrap();
            res.verify(&d).unwrap();
            let oracle = ph_col(&d, &[]).unwrap();
            assert_eq!(res.pivots.pairs(), oracle.pivots.pairs());
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let d = random_matrix(&mut rng, 60, 0.15);
        let (base, _) = morse_reduce(&d, &[], 1).unwrap();
        for workers in [2, 3, 4, 8] {
            let (res, _) = morse_reduce(&d, &[], workers).unwrap();
            assert_eq!(res.r, base.r);
            assert_eq!(res.v, base.v);
            assert_eq!(res.pivots, base.pivots);
        }
    }

    #[test]
    fn cleared_columns_stay_zero_and_keep_contract() {
        // Column 1 equals column 0, so clearing it with the witness
        // V[:, 1] = e0 + e1 preserves D*V = R.
        let d =
            SparseBoolMatrix::from_triplets(3, 2, &[(0, 0), (2, 0), (0, 1), (2, 1)]).unwrap();
        let (res, _) = morse_reduce(&d, &[(1, vec![0, 1])], 1).unwrap();
        res.verify(&d).unwrap();
        assert!(res.r.col(1).is_empty());
        assert_eq!(res.pivots.len(), 1);
    }

    #[test]
    fn birth_restricted_rounds_pair_equal_grades_first() {
        // Rows graded 1,1,2 and columns graded 1,3: only the grade-1 pair is
        // eliminated in round one, the mismatched one falls to a later round.
        let d =
            SparseBoolMatrix::from_triplets(3, 2, &[(0, 0), (1, 0), (1, 1), (2, 1)]).unwrap();
        let (res, stats) =
            morse_reduce_with_births(&d, &[], Some((&[1, 1, 2], &[1, 3])), 1).unwrap();
        res.verify(&d).unwrap();
        assert!(stats.iterations.len() >= 2);
        assert_eq!(stats.iterations[0].npairs, 1);
        let oracle = ph_col(&d, &[]).unwrap();
        assert_eq!(res.pivots.pairs(), oracle.pivots.pairs());
    }

    #[test]
    fn births_do_not_change_the_answer() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(83);
        for _ in 0..100 {
            let d = random_matrix(&mut rng, 20, 0.3);
            let rb: Vec<usize> = (0..d.nrows()).map(|_| rng.gen_range(0..4)).collect();
            let cb: Vec<usize> = (0..d.ncols()).map(|_| rng.gen_range(0..4)).collect();
            let (res, _) = morse_reduce_with_births(&d, &[], Some((&rb, &cb)), 1).unwrap();
            res.verify(&d).unwrap();
            let oracle = ph_col(&d, &[]).unwrap();
            assert_eq!(res.pivots.pairs(), oracle.pivots.pairs());
        }
    }

    #[test]
    fn field_selection_block_is_unitriangular() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        for _ in 0..200 {
            let d = random_matrix(&mut rng, 30, 0.25);
            let pairs = select_morse_field(&d, |_, _| true);
            if d.is_zero() {
                assert!(pairs.is_empty());
                continue;
            }
            assert!(!pairs.is_empty());
            assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
            for &(i, j) in &pairs {
                assert_eq!(d.low(j), Some(i));
            }
            let rows: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let cols: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            assert!(d.submatrix(&rows, &cols).is_upper_unitriangular());
        }
    }

    #[test]
    fn stats_account_for_every_pivot() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let d = random_matrix(&mut rng, 40, 0.2);
        let (res, stats) = morse_reduce(&d, &[], 2).unwrap();
        assert_eq!(stats.total_pairs(), res.pivots.len());
        assert!(stats.iterations.iter().all(|it| it.block_nnz > 0));
        assert!(stats.field_seconds() >= 0.0 && stats.schur_seconds() >= 0.0);
    }
}
