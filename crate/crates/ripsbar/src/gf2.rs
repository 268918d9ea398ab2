//! Sparse GF(2) matrices in compressed sparse column form.
//!
//! Every matrix in the reduction pipeline (boundary operators, the reduced
//! matrix R, the transformation V, the Schur blocks) is one of these. Entries
//! are implicitly 1; addition is XOR.

use crate::error::{Error, Result};

/// A sparse boolean matrix over GF(2), stored column-compressed.
///
/// `colptr` has length `ncols + 1`; the row indices of column `j` live in
/// `rowval[colptr[j]..colptr[j + 1]]`, strictly increasing.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparseBoolMatrix {
    nrows: usize,
    ncols: usize,
    colptr: Vec<usize>,
    rowval: Vec<usize>,
}

impl std::fmt::Debug for SparseBoolMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SparseBoolMatrix({}x{}, nnz={})", self.nrows, self.ncols, self.nnz())
    }
}

impl SparseBoolMatrix {
    /// The all-zero matrix.
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            colptr: vec![0; ncols + 1],
            rowval: Vec::new(),
        }
    }

    /// The identity pattern.
    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowval: (0..n).collect(),
        }
    }

    /// Builds a matrix from (row, col) entry coordinates. Duplicate entries
    /// cancel in pairs, matching GF(2) addition.
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize)]) -> Result<Self> {
        for &(r, c) in entries {
            if r >= nrows || c >= ncols {
                return Err(Error::IndexOutOfRange { row: r, col: c, nrows, ncols });
            }
        }
        let mut sorted: Vec<(usize, usize)> = entries.iter().map(|&(r, c)| (c, r)).collect();
        sorted.sort_unstable();
        let mut colptr = vec![0usize; ncols + 1];
        let mut rowval = Vec::with_capacity(sorted.len());
        let mut i = 0;
        while i < sorted.len() {
            let mut run = 1;
            while i + run < sorted.len() && sorted[i + run] == sorted[i] {
                run += 1;
            }
            if run % 2 == 1 {
                let (c, r) = sorted[i];
                colptr[c + 1] += 1;
                rowval.push(r);
            }
            i += run;
        }
        for c in 0..ncols {
            colptr[c + 1] += colptr[c];
        }
        Ok(Self { nrows, ncols, colptr, rowval })
    }

    /// Builds a matrix from per-column row-index lists. Each list must be
    /// strictly increasing and in range.
    pub fn from_columns(nrows: usize, cols: &[Vec<usize>]) -> Result<Self> {
        let ncols = cols.len();
        let mut colptr = Vec::with_capacity(ncols + 1);
        let mut rowval = Vec::new();
        colptr.push(0);
        for (c, col) in cols.iter().enumerate() {
            for (k, &r) in col.iter().enumerate() {
                if r >= nrows {
                    return Err(Error::IndexOutOfRange { row: r, col: c, nrows, ncols });
                }
                debug_assert!(k == 0 || col[k - 1] < r, "column rows must strictly increase");
            }
            rowval.extend_from_slice(col);
            colptr.push(rowval.len());
        }
        Ok(Self { nrows, ncols, colptr, rowval })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rowval.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rowval.is_empty()
    }

    pub fn colptr(&self) -> &[usize] {
        &self.colptr
    }

    /// Row indices of the nonzeros in column `j`, ascending.
    pub fn col(&self, j: usize) -> &[usize] {
        &self.rowval[self.colptr[j]..self.colptr[j + 1]]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.col(j).binary_search(&i).is_ok()
    }

    /// Row index of the lowest nonzero entry of column `j`; `None` on a zero
    /// column.
    pub fn low(&self, j: usize) -> Option<usize> {
        self.col(j).last().copied()
    }

    /// Extracts per-column row lists, for reduction working state.
    pub fn to_columns(&self) -> Vec<Vec<usize>> {
        (0..self.ncols).map(|j| self.col(j).to_vec()).collect()
    }

    /// GF(2) sum: the symmetric difference of the nonzero patterns.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::ShapeMismatch {
                op: "gf2_add",
                left_rows: self.nrows,
                left_cols: self.ncols,
                right_rows: other.nrows,
                right_cols: other.ncols,
            });
        }
        let cols: Vec<Vec<usize>> = (0..self.ncols)
            .map(|j| xor_sorted(self.col(j), other.col(j)))
            .collect();
        Self::from_columns(self.nrows, &cols)
    }

    /// GF(2) product. Column j of the result is the XOR of this matrix's
    /// columns selected by the nonzeros of `other`'s column j.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::ShapeMismatch {
                op: "gf2_multiply",
                left_rows: self.nrows,
                left_cols: self.ncols,
                right_rows: other.nrows,
                right_cols: other.ncols,
            });
        }
        let words = self.nrows.div_ceil(64);
        let mut scratch = vec![0u64; words];
        let mut colptr = Vec::with_capacity(other.ncols + 1);
        let mut rowval = Vec::new();
        colptr.push(0);
        for j in 0..other.ncols {
            for &k in other.col(j) {
                for &r in self.col(k) {
                    scratch[r / 64] ^= 1u64 << (r % 64);
                }
            }
            for (w, &bits) in scratch.iter().enumerate() {
                let mut b = bits;
                while b != 0 {
                    let t = b.trailing_zeros() as usize;
                    rowval.push(w * 64 + t);
                    b &= b - 1;
                }
            }
            colptr.push(rowval.len());
            scratch.fill(0);
        }
        Ok(Self { nrows: self.nrows, ncols: other.ncols, colptr, rowval })
    }

    /// Checks that the matrix is square and upper-triangular with a full unit
    /// diagonal over GF(2).
    pub fn is_upper_unitriangular(&self) -> bool {
        self.nrows == self.ncols && (0..self.ncols).all(|j| self.low(j) == Some(j))
    }

    /// Solves `self * X = b` by back-substitution, where `self` is square,
    /// upper-triangular, with unit diagonal. Never forms the inverse.
    pub fn upper_tri_solve(&self, b: &Self) -> Result<Self> {
        if self.nrows != self.ncols || self.nrows != b.nrows {
            return Err(Error::ShapeMismatch {
                op: "upper_tri_solve",
                left_rows: self.nrows,
                left_cols: self.ncols,
                right_rows: b.nrows,
                right_cols: b.ncols,
            });
        }
        if let Some(j) = (0..self.ncols).find(|&j| self.low(j) != Some(j)) {
            return Err(Error::NotUpperUnitriangular { col: j });
        }
        let mut cols = Vec::with_capacity(b.ncols);
        for j in 0..b.ncols {
            let mut work = b.col(j).to_vec();
            let mut x = Vec::new();
            while let Some(&i) = work.last() {
                x.push(i);
                // a.col(i) has low i, so the XOR strictly shrinks the tail.
                work = xor_sorted(&work, self.col(i));
            }
            x.reverse();
            cols.push(x);
        }
        Self::from_columns(self.ncols, &cols)
    }

    /// Transpose across the anti-diagonal: entry (i, j) of the result is entry
    /// (ncols-1-j, nrows-1-i) of the input.
    pub fn antitranspose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            for &i in self.col(j) {
                entries.push((self.ncols - 1 - j, self.nrows - 1 - i));
            }
        }
        // The index map is a bijection, so no cancellation can occur.
        Self::from_triplets(self.ncols, self.nrows, &entries).expect("indices in range")
    }

    /// Submatrix selection: `rows` and `cols` give the kept indices, in the
    /// order they should appear in the result.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut pos_of_row = vec![usize::MAX; self.nrows];
        for (p, &r) in rows.iter().enumerate() {
            pos_of_row[r] = p;
        }
        let out_cols: Vec<Vec<usize>> = cols
            .iter()
            .map(|&c| {
                let mut picked: Vec<usize> = self
                    .col(c)
                    .iter()
                    .filter_map(|&r| (pos_of_row[r] != usize::MAX).then(|| pos_of_row[r]))
                    .collect();
                picked.sort_unstable();
                picked
            })
            .collect();
        Self::from_columns(rows.len(), &out_cols).expect("indices in range")
    }
}

/// Symmetric difference of two strictly-increasing index slices.
pub fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// The pivot set of a reduction: (row, column) pairs with pairwise-distinct
/// rows and pairwise-distinct columns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PivotSet {
    pairs: Vec<(usize, usize)>,
}

impl PivotSet {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable_by_key(|&(_, c)| c);
        debug_assert!(distinct(pairs.iter().map(|p| p.0)), "pivot rows must be distinct");
        debug_assert!(distinct(pairs.iter().map(|p| p.1)), "pivot columns must be distinct");
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|p| p.1)
    }
}

fn distinct(it: impl Iterator<Item = usize>) -> bool {
    let mut seen = std::collections::HashSet::new();
    it.into_iter().all(|x| seen.insert(x))
}

/// The (R, V, pivots) triple of a matrix decomposition D * V = R.
#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub r: SparseBoolMatrix,
    pub v: SparseBoolMatrix,
    pub pivots: PivotSet,
}

impl ReductionResult {
    /// Checks the decomposition invariants against the input matrix:
    /// D * V == R, V upper-unitriangular, low_R injective, and the pivot set
    /// consistent with R's lows.
    pub fn verify(&self, d: &SparseBoolMatrix) -> Result<()> {
        let dv = d.multiply(&self.v)?;
        if dv != self.r {
            return Err(Error::InvalidConfig("D*V != R".into()));
        }
        if !self.v.is_upper_unitriangular() {
            return Err(Error::InvalidConfig("V is not upper-unitriangular".into()));
        }
        let lows: Vec<(usize, usize)> = (0..self.r.ncols())
            .filter_map(|j| self.r.low(j).map(|i| (i, j)))
            .collect();
        if PivotSet::new(lows) != self.pivots {
            return Err(Error::InvalidConfig("pivot set disagrees with low_R".into()));
        }
        if !distinct(self.pivots.rows()) {
            return Err(Error::InvalidConfig("low_R is not injective".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(m: &SparseBoolMatrix) -> Vec<Vec<bool>> {
        let mut out = vec![vec![false; m.ncols()]; m.nrows()];
        for j in 0..m.ncols() {
            for &i in m.col(j) {
                out[i][j] = true;
            }
        }
        out
    }

    fn from_dense(d: &[Vec<bool>]) -> SparseBoolMatrix {
        let nrows = d.len();
        let ncols = if nrows == 0 { 0 } else { d[0].len() };
        let mut entries = Vec::new();
        for (i, row) in d.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if x {
                    entries.push((i, j));
                }
            }
        }
        SparseBoolMatrix::from_triplets(nrows, ncols, &entries).unwrap()
    }

    #[test]
    fn triplets_identity_pattern() {
        let m = SparseBoolMatrix::from_triplets(2, 2, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(m, SparseBoolMatrix::identity(2));
    }

    #[test]
    fn triplets_duplicates_cancel() {
        let m = SparseBoolMatrix::from_triplets(2, 2, &[(0, 0), (0, 0)]).unwrap();
        assert!(m.is_zero());
    }

    #[test]
    fn triplets_sort_and_cancel() {
        // Oracle: sort entries per column and cancel duplicate pairs by hand.
        let m = SparseBoolMatrix::from_triplets(3, 2, &[(2, 0), (0, 0), (1, 1)]).unwrap();
        assert_eq!(m.col(0), &[0, 2]);
        assert_eq!(m.col(1), &[1]);
        assert_eq!(m.colptr(), &[0, 2, 3]);
    }

    #[test]
    fn triplets_out_of_range() {
        let err = SparseBoolMatrix::from_triplets(2, 2, &[(2, 0)]).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { .. }));
    }

    #[test]
    fn add_identities() {
        let a = SparseBoolMatrix::from_triplets(2, 2, &[(0, 0), (0, 1), (1, 1)]).unwrap();
        assert!(a.add(&a).unwrap().is_zero());
        let zero = SparseBoolMatrix::zero(2, 2);
        assert_eq!(a.add(&zero).unwrap(), a);
    }

    #[test]
    fn add_dense_oracle() {
        // [[1,1],[0,1]] + [[0,1],[1,1]] = [[1,0],[1,0]]
        let a = from_dense(&[vec![true, true], vec![false, true]]);
        let b = from_dense(&[vec![false, true], vec![true, true]]);
        let expected = from_dense(&[vec![true, false], vec![true, false]]);
        assert_eq!(a.add(&b).unwrap(), expected);
    }

    #[test]
    fn add_shape_mismatch() {
        let a = SparseBoolMatrix::zero(2, 2);
        let b = SparseBoolMatrix::zero(2, 3);
        assert!(matches!(a.add(&b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn multiply_identity() {
        let a = SparseBoolMatrix::from_triplets(3, 3, &[(0, 1), (2, 1), (1, 2)]).unwrap();
        assert_eq!(SparseBoolMatrix::identity(3).multiply(&a).unwrap(), a);
    }

    #[test]
    fn multiply_characteristic_two() {
        let a = SparseBoolMatrix::from_triplets(1, 2, &[(0, 0), (0, 1)]).unwrap();
        let b = SparseBoolMatrix::from_triplets(2, 1, &[(0, 0), (1, 0)]).unwrap();
        assert!(a.multiply(&b).unwrap().is_zero());
    }

    #[test]
    fn multiply_permutation_oracle() {
        // Left-multiplying by a permutation pattern permutes rows; checked
        // against a dense mod-2 product.
        let p = SparseBoolMatrix::from_triplets(3, 3, &[(1, 0), (2, 1), (0, 2)]).unwrap();
        let a = SparseBoolMatrix::from_triplets(3, 2, &[(0, 0), (2, 0), (1, 1)]).unwrap();
        let prod = p.multiply(&a).unwrap();
        let (dp, da) = (dense(&p), dense(&a));
        for i in 0..3 {
            for j in 0..2 {
                let mut acc = false;
                for k in 0..3 {
                    acc ^= dp[i][k] && da[k][j];
                }
                assert_eq!(prod.get(i, j), acc);
            }
        }
    }

    #[test]
    fn solve_identity() {
        let b = SparseBoolMatrix::from_triplets(3, 2, &[(0, 0), (2, 1)]).unwrap();
        let x = SparseBoolMatrix::identity(3).upper_tri_solve(&b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn solve_two_by_two() {
        // a = [[1,1],[0,1]], b = [[0],[1]] -> x = [[1],[1]]
        let a = from_dense(&[vec![true, true], vec![false, true]]);
        let b = SparseBoolMatrix::from_triplets(2, 1, &[(1, 0)]).unwrap();
        let x = a.upper_tri_solve(&b).unwrap();
        assert_eq!(x.col(0), &[0, 1]);
        assert_eq!(a.multiply(&x).unwrap(), b);
    }

    #[test]
    fn solve_rejects_non_triangular() {
        let a = SparseBoolMatrix::from_triplets(2, 2, &[(0, 0), (1, 0), (1, 1)]).unwrap();
        let b = SparseBoolMatrix::zero(2, 1);
        assert!(matches!(a.upper_tri_solve(&b), Err(Error::NotUpperUnitriangular { col: 0 })));
    }

    #[test]
    fn low_cases() {
        let m = SparseBoolMatrix::from_triplets(5, 3, &[(0, 0), (2, 0), (4, 2)]).unwrap();
        assert_eq!(m.low(0), Some(2));
        assert_eq!(m.low(1), None);
        assert_eq!(m.low(2), Some(4));
    }

    #[test]
    fn antitranspose_single_entry() {
        // 2x3 with entry (0,2) -> 3x2 with entry (0,1), by the dense index map.
        let m = SparseBoolMatrix::from_triplets(2, 3, &[(0, 2)]).unwrap();
        let at = m.antitranspose();
        assert_eq!((at.nrows(), at.ncols()), (3, 2));
        assert!(at.get(0, 1));
        assert_eq!(at.nnz(), 1);
    }

    #[test]
    fn antitranspose_identity() {
        let i = SparseBoolMatrix::identity(4);
        assert_eq!(i.antitranspose(), i);
    }

    fn arb_matrix(max_dim: usize) -> impl Strategy<Value = SparseBoolMatrix> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(|(nr, nc)| {
            proptest::collection::vec((0..nr, 0..nc), 0..=nr * nc)
                .prop_map(move |e| SparseBoolMatrix::from_triplets(nr, nc, &e).unwrap())
        })
    }

    proptest! {
        #[test]
        fn add_self_is_zero(a in arb_matrix(12)) {
            prop_assert!(a.add(&a).unwrap().is_zero());
        }

        #[test]
        fn add_commutative_associative(
            (a, b, c) in (1usize..10, 1usize..10).prop_flat_map(|(nr, nc)| {
                let m = proptest::collection::vec((0..nr, 0..nc), 0..=nr * nc)
                    .prop_map(move |e| SparseBoolMatrix::from_triplets(nr, nc, &e).unwrap());
                (m.clone(), m.clone(), m)
            })
        ) {
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
            prop_assert_eq!(
                a.add(&b).unwrap().add(&c).unwrap(),
                a.add(&b.add(&c).unwrap()).unwrap()
            );
        }

        #[test]
        fn antitranspose_involution(a in arb_matrix(12)) {
            prop_assert_eq!(a.antitranspose().antitranspose(), a);
        }

        #[test]
        fn solve_round_trip(
            (a, b) in (1usize..10, 1usize..6).prop_flat_map(|(n, nc)| {
                let tri = proptest::collection::vec((0..n, 0..n), 0..=n * n).prop_map(move |e| {
                    let mut entries: Vec<(usize, usize)> =
                        e.into_iter().filter(|&(i, j)| i < j).collect();
                    entries.extend((0..n).map(|i| (i, i)));
                    entries.dedup();
                    SparseBoolMatrix::from_triplets(n, n, &entries).unwrap()
                });
                let rhs = proptest::collection::vec((0..n, 0..nc), 0..=n * nc)
                    .prop_map(move |e| SparseBoolMatrix::from_triplets(n, nc, &e).unwrap());
                (tri, rhs)
            })
        ) {
            let x = a.upper_tri_solve(&b).unwrap();
            prop_assert_eq!(a.multiply(&x).unwrap(), b);
        }

        #[test]
        fn canonical_form_idempotent(a in arb_matrix(12)) {
            let mut entries = Vec::new();
            for j in 0..a.ncols() {
                for &i in a.col(j) {
                    entries.push((i, j));
                }
            }
            let rebuilt = SparseBoolMatrix::from_triplets(a.nrows(), a.ncols(), &entries).unwrap();
            prop_assert_eq!(rebuilt, a);
        }
    }

    #[test]
    fn low_matches_dense_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let nr = rng.gen_range(1..=50);
            let nc = rng.gen_range(1..=50);
            let n_entries = rng.gen_range(0..=nr * nc / 4);
            let entries: Vec<(usize, usize)> = (0..n_entries)
                .map(|_| (rng.gen_range(0..nr), rng.gen_range(0..nc)))
                .collect();
            let m = SparseBoolMatrix::from_triplets(nr, nc, &entries).unwrap();
            let d = dense(&m);
            for j in 0..nc {
                let expected = (0..nr).rev().find(|&i| d[i][j]);
                assert_eq!(m.low(j), expected);
            }
        }
    }
}
