//! Boundary-matrix reduction and barcode extraction.
//!
//! Three interchangeable backends produce the same R = D*V decomposition
//! contract: `Column` is left-to-right column reduction, `Row` sweeps pivot
//! rows from the bottom up, `Morse` (in the sibling module) eliminates blocks
//! of pivots at once through a Schur complement. On top of any backend sit
//! two toggleable accelerations: clearing (a reduced matrix donates zero
//! columns to the next one in the chain) and cohomology (reduce the
//! antitransposes instead; same pairs, no generators).

use std::collections::HashMap;

use crate::complex::FilteredComplex;
use crate::error::{Error, Result};
use crate::gf2::{xor_sorted, PivotSet, ReductionResult, SparseBoolMatrix};
use crate::ingest::SortAlgo;
use crate::kernels::{column_weights, WeightInput, WeightPredicate};
use crate::morse;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Column,
    Row,
    Morse,
}

impl Backend {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "column" => Ok(Self::Column),
            "row" => Ok(Self::Row),
            "morse" => Ok(Self::Morse),
            other => Err(Error::InvalidConfig(format!("unknown backend {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Column => "column",
            Self::Row => "row",
            Self::Morse => "morse",
        }
    }
}

/// A column of the next matrix in the chain that is known to reduce to zero,
/// together with the V column that witnesses it.
pub type ClearedColumn = (usize, Vec<usize>);

/// Left-to-right column reduction: repeatedly add the unique earlier column
/// sharing the current column's low entry until the low is fresh.
pub fn ph_col(d: &SparseBoolMatrix, cleared: &[ClearedColumn]) -> Result<ReductionResult> {
    let n = d.ncols();
    let mut rcols = d.to_columns();
    let mut vcols: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
    apply_cleared(&mut rcols, &mut vcols, cleared)?;
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; d.nrows()];
    let mut pivots = Vec::new();
    for i in 0..n {
        while let Some(&low) = rcols[i].last() {
            match pivot_of_row[low] {
                Some(j) => {
                    rcols[i] = xor_sorted(&rcols[i], &rcols[j]);
                    vcols[i] = xor_sorted(&vcols[i], &vcols[j]);
                }
                None => {
                    pivot_of_row[low] = Some(i);
                    pivots.push((low, i));
                    break;
                }
            }
        }
    }
    assemble(d, rcols, vcols, pivots)
}

/// Bottom-up row reduction: for each row from the last to the first, the
/// earliest column whose low sits in that row becomes the pivot and clears
/// every later one.
pub fn ph_row(d: &SparseBoolMatrix, cleared: &[ClearedColumn]) -> Result<ReductionResult> {
    let n = d.ncols();
    let mut rcols = d.to_columns();
    let mut vcols: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
    apply_cleared(&mut rcols, &mut vcols, cleared)?;
    let mut cols_by_low: Vec<Vec<usize>> = vec![Vec::new(); d.nrows()];
    for (j, c) in rcols.iter().enumerate() {
        if let Some(&low) = c.last() {
            cols_by_low[low].push(j);
        }
    }
    let mut pivots = Vec::new();
    for i in (0..d.nrows()).rev() {
        let mut bucket = std::mem::take(&mut cols_by_low[i]);
        if bucket.is_empty() {
            continue;
        }
        let p = *bucket.iter().min().unwrap();
        pivots.push((i, p));
        bucket.retain(|&j| j != p);
        for j in bucket {
            rcols[j] = xor_sorted(&rcols[j], &rcols[p]);
            vcols[j] = xor_sorted(&vcols[j], &vcols[p]);
            if let Some(&low) = rcols[j].last() {
                debug_assert!(low < i);
                cols_by_low[low].push(j);
            }
        }
    }
    assemble(d, rcols, vcols, pivots)
}

fn apply_cleared(
    rcols: &mut [Vec<usize>],
    vcols: &mut [Vec<usize>],
    cleared: &[ClearedColumn],
) -> Result<()> {
    for (c, vcol) in cleared {
        if *c >= rcols.len() {
            return Err(Error::ColumnOutOfRange { col: *c, ncols: rcols.len() });
        }
        rcols[*c].clear();
        vcols[*c] = vcol.clone();
    }
    Ok(())
}

fn assemble(
    d: &SparseBoolMatrix,
    rcols: Vec<Vec<usize>>,
    vcols: Vec<Vec<usize>>,
    pivots: Vec<(usize, usize)>,
) -> Result<ReductionResult> {
    Ok(ReductionResult {
        r: SparseBoolMatrix::from_columns(d.nrows(), &rcols)?,
        v: SparseBoolMatrix::from_columns(d.ncols(), &vcols)?,
        pivots: PivotSet::new(pivots),
    })
}

pub fn reduce_matrix(
    d: &SparseBoolMatrix,
    backend: Backend,
    cleared: &[ClearedColumn],
    births: Option<(&[usize], &[usize])>,
    workers: usize,
) -> Result<(ReductionResult, Option<morse::MorseStats>)> {
    match backend {
        Backend::Column => ph_col(d, cleared).map(|r| (r, None)),
        Backend::Row => ph_row(d, cleared).map(|r| (r, None)),
        Backend::Morse => morse::morse_reduce_with_births(d, cleared, births, workers)
            .map(|(res, stats)| (res, Some(stats))),
    }
}

/// Reduces a chain of matrices in which pivot rows of `mats[t]` index columns
/// of `mats[t + 1]` and `mats[t + 1] * mats[t] = 0`. With clearing enabled,
/// each pivot (i, j) of matrix t zeroes column i of matrix t + 1 up front and
/// installs R_t column j as its V column, which keeps D*V = R exact against
/// the original matrices. `births` optionally carries per-matrix (row, col)
/// filtration grades for the Morse backend's field selection.
pub fn reduce_chain(
    mats: &[SparseBoolMatrix],
    births: Option<&[(Vec<usize>, Vec<usize>)]>,
    backend: Backend,
    clearing: bool,
    workers: usize,
) -> Result<Vec<(ReductionResult, Option<morse::MorseStats>)>> {
    let mut results: Vec<(ReductionResult, Option<morse::MorseStats>)> =
        Vec::with_capacity(mats.len());
    for (t, d) in mats.iter().enumerate() {
        let cleared: Vec<ClearedColumn> = if clearing && t > 0 {
            let prev = &results[t - 1].0;
            prev.pivots
                .pairs()
                .iter()
                .map(|&(i, j)| (i, prev.r.col(j).to_vec()))
                .collect()
        } else {
            Vec::new()
        };
        let b = births.map(|bs| (bs[t].0.as_slice(), bs[t].1.as_slice()));
        results.push(reduce_matrix(d, backend, &cleared, b, workers)?);
    }
    Ok(results)
}

/// One bar of a persistence diagram. `death` is infinite for essential
/// classes. `birth_index` and `death_index` are simplex positions within
/// their own dimensions (`dim` for birth, `dim + 1` for death).
#[derive(Clone, Debug, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    pub birth_index: usize,
    pub death_index: Option<usize>,
}

impl PersistencePair {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    /// The comparison form: zero-length bars dropped, sorted by dimension,
    /// birth, death, with the simplex bookkeeping erased. Two runs agree
    /// exactly when their normalized forms are equal.
    pub fn normalized(&self) -> Vec<(usize, f64, f64)> {
        let mut out: Vec<(usize, f64, f64)> = self
            .pairs
            .iter()
            .filter(|p| p.birth != p.death)
            .map(|p| (p.dim, p.birth, p.death))
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    pub fn pairs_in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn betti_at(&self, dim: usize, t: f64) -> usize {
        self.pairs_in_dim(dim)
            .filter(|p| p.birth <= t && t < p.death)
            .count()
    }

    /// The Betti number of `dim` as a step function: (t, value) at every
    /// filtration value where it changes, starting from its value at t = 0.
    pub fn betti_curve(&self, dim: usize) -> Vec<(f64, usize)> {
        if self.pairs_in_dim(dim).next().is_none() {
            return Vec::new();
        }
        let mut ts: Vec<f64> = self
            .pairs_in_dim(dim)
            .flat_map(|p| [p.birth, p.death])
            .filter(|t| t.is_finite())
            .chain(std::iter::once(0.0))
            .collect();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        let mut curve: Vec<(f64, usize)> = Vec::new();
        for t in ts {
            let b = self.betti_at(dim, t);
            if curve.last().map(|&(_, v)| v) != Some(b) {
                curve.push((t, b));
            }
        }
        curve
    }
}

/// Turns one matrix's pivot set into finite bars, given the real birth values
/// of its rows and columns. Zero-length bars are kept only on request.
pub fn pairs_from_pivots(
    dim: usize,
    row_births: &[f64],
    col_births: &[f64],
    pivots: &PivotSet,
    keep_zero: bool,
) -> Vec<PersistencePair> {
    pivots
        .pairs()
        .iter()
        .filter_map(|&(i, j)| {
            let (birth, death) = (row_births[i], col_births[j]);
            (keep_zero || birth != death).then_some(PersistencePair {
                dim,
                birth,
                death,
                birth_index: i,
                death_index: Some(j),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistOpts {
    pub backend: Backend,
    pub cohomology: bool,
    pub clearing: bool,
    pub reorder: bool,
    pub workers: usize,
    pub keep_zero: bool,
    pub sort: SortAlgo,
}

impl Default for PersistOpts {
    fn default() -> Self {
        Self {
            backend: Backend::Column,
            cohomology: false,
            clearing: true,
            reorder: false,
            workers: 1,
            keep_zero: false,
            sort: SortAlgo::Radix,
        }
    }
}

/// A finished computation: the (possibly reordered) complex, its boundary
/// operators, one reduction per operator, pivots mapped to the original
/// column order of each operator, and the assembled diagram.
pub struct Reduced {
    pub complex: FilteredComplex,
    pub diagram: PersistenceDiagram,
    pub opts: PersistOpts,
    /// One entry per Morse-reduced matrix; empty for the other backends.
    pub morse_stats: Vec<morse::MorseStats>,
    boundaries: Vec<SparseBoolMatrix>,
    reductions: Vec<ReductionResult>,
    pivots_by_matrix: Vec<PivotSet>,
}

impl Reduced {
    /// Boundary operator of k-simplices, k >= 1.
    pub fn boundary(&self, k: usize) -> &SparseBoolMatrix {
        &self.boundaries[k - 1]
    }

    /// The raw reduction of boundary k: of D_k in homology mode, of the
    /// antitranspose of D_k in cohomology mode.
    pub fn reduction(&self, k: usize) -> &ReductionResult {
        &self.reductions[k - 1]
    }

    /// Pivots of D_k in its own row/column indexing, whichever mode produced
    /// them.
    pub fn pivots(&self, k: usize) -> &PivotSet {
        &self.pivots_by_matrix[k - 1]
    }

    pub fn maxdim(&self) -> usize {
        self.boundaries.len().saturating_sub(1)
    }

    /// Checks the full R = D*V contract on every reduced matrix.
    pub fn verify(&self) -> Result<()> {
        for (t, res) in self.reductions.iter().enumerate() {
            let d = if self.opts.cohomology {
                self.boundaries[t].antitranspose()
            } else {
                self.boundaries[t].clone()
            };
            res.verify(&d)?;
        }
        Ok(())
    }

    /// A representative cycle per diagram pair, as lists of simplex vertex
    /// sets. Homology mode only: the cohomology reduction never materializes
    /// cycle representatives.
    pub fn generators(&self) -> Result<Vec<Generator>> {
        if self.opts.cohomology {
            return Err(Error::GeneratorsUnavailable);
        }
        let homology_reduction = |k: usize| -> &ReductionResult { self.reduction(k) };
        let mut out = Vec::with_capacity(self.diagram.pairs.len());
        for (pair_index, p) in self.diagram.pairs.iter().enumerate() {
            let chain: Vec<usize> = match p.death_index {
                // A finite dim-k bar dies at pivot column j of D_{k+1}; the
                // reduced column R_{k+1}[:, j] is a cycle born with the bar.
                Some(j) => homology_reduction(p.dim + 1).r.col(j).to_vec(),
                None => {
                    if p.dim == 0 {
                        vec![p.birth_index]
                    } else {
                        // Essential class: R_k[:, c] = 0, so V_k[:, c] is a
                        // cycle entering at the bar's birth.
                        homology_reduction(p.dim).v.col(p.birth_index).to_vec()
                    }
                }
            };
            let simplices = chain
                .iter()
                .map(|&s| self.complex.simplices[p.dim][s].vertices.clone())
                .collect();
            out.push(Generator { pair_index, simplices });
        }
        Ok(out)
    }
}

/// A representative cycle for `diagram.pairs[pair_index]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub pair_index: usize,
    pub simplices: Vec<Vec<usize>>,
}

/// Weights each vertex by the start-weight of its column in the closed
/// neighborhood adjacency matrix; a simplex inherits the sum over its
/// vertices. Used by the reordering toggle to push heavy columns later
/// within each birth class.
fn simplex_weights(complex: &FilteredComplex, workers: usize) -> Vec<Vec<u64>> {
    let f = &complex.filtration;
    let m = f.npoints();
    let mut s = vec![0i64; m * m];
    for v in 0..m {
        for u in 0..m {
            if u == v || f.included(u, v) {
                s[v * m + u] = 1;
            }
        }
    }
    let input = WeightInput::new(s, m).expect("adjacency matrix is square");
    let vertex_w = column_weights(&input, WeightPredicate::CosupportTriangles, workers);
    complex
        .simplices
        .iter()
        .map(|dim| {
            dim.iter()
                .map(|s| s.vertices.iter().map(|&v| vertex_w[v]).sum())
                .collect()
        })
        .collect()
}

/// Reorders simplices within each dimension by (birth, descending weight,
/// original index). The permutation is filtration-compatible, so the diagram
/// is unchanged up to zero-length bars.
pub fn reorder_complex(complex: &FilteredComplex, workers: usize) -> FilteredComplex {
    let weights = simplex_weights(complex, workers);
    let mut out = complex.clone();
    for (dim, simplices) in out.simplices.iter_mut().enumerate() {
        let mut order: Vec<usize> = (0..simplices.len()).collect();
        order.sort_by(|&a, &b| {
            simplices[a]
                .birth
                .cmp(&simplices[b].birth)
                .then(weights[dim][b].cmp(&weights[dim][a]))
                .then(a.cmp(&b))
        });
        *simplices = order.iter().map(|&i| simplices[i].clone()).collect();
    }
    out
}

fn antitranspose_pivots(at_pivots: &PivotSet, nrows: usize, ncols: usize) -> PivotSet {
    PivotSet::new(
        at_pivots
            .pairs()
            .iter()
            .map(|&(i, j)| (nrows - 1 - j, ncols - 1 - i))
            .collect(),
    )
}

/// Runs the reduction pipeline on a built complex and assembles the diagram.
///
/// Homology is reported for dimensions 0 through `complex.maxdim() - 1`; the
/// top dimension of the complex only supplies death information, so build one
/// dimension above the homology you want.
pub fn persist_complex(complex: &FilteredComplex, opts: &PersistOpts) -> Result<Reduced> {
    if complex.maxdim() == 0 {
        return Err(Error::InvalidConfig(
            "complex must contain at least edges; build with maxdim >= 1".into(),
        ));
    }
    let complex = if opts.reorder {
        reorder_complex(complex, opts.workers)
    } else {
        complex.clone()
    };
    let nmat = complex.maxdim();
    let boundaries: Vec<SparseBoolMatrix> =
        (1..=nmat).map(|k| complex.boundary_operator(k)).collect::<Result<_>>()?;

    let grade: Vec<Vec<usize>> = complex
        .simplices
        .iter()
        .map(|dim| dim.iter().map(|s| s.birth).collect())
        .collect();
    let reversed = |dim: usize| -> Vec<usize> { grade[dim].iter().rev().copied().collect() };

    // Chain order: homology clears downward in dimension, cohomology upward.
    let (mats, births, chain_order): (Vec<SparseBoolMatrix>, Vec<(Vec<usize>, Vec<usize>)>, Vec<usize>) =
        if opts.cohomology {
            (
                boundaries.iter().map(SparseBoolMatrix::antitranspose).collect(),
                (1..=nmat).map(|k| (reversed(k), reversed(k - 1))).collect(),
                (0..nmat).collect(),
            )
        } else {
            (
                boundaries.iter().rev().cloned().collect(),
                (1..=nmat).rev().map(|k| (grade[k - 1].clone(), grade[k].clone())).collect(),
                (0..nmat).rev().collect(),
            )
        };
    let chain_results =
        reduce_chain(&mats, Some(&births), opts.backend, opts.clearing, opts.workers)?;

    let mut reductions: Vec<Option<ReductionResult>> = (0..nmat).map(|_| None).collect();
    let mut morse_stats = Vec::new();
    for ((res, stats), &k) in chain_results.into_iter().zip(&chain_order) {
        reductions[k] = Some(res);
        morse_stats.extend(stats);
    }
    let reductions: Vec<ReductionResult> = reductions.into_iter().map(Option::unwrap).collect();
    let pivots_by_matrix: Vec<PivotSet> = reductions
        .iter()
        .zip(&boundaries)
        .map(|(res, d)| {
            if opts.cohomology {
                antitranspose_pivots(&res.pivots, d.nrows(), d.ncols())
            } else {
                res.pivots.clone()
            }
        })
        .collect();

    let diagram = diagram_from_pivots(&complex, &pivots_by_matrix, opts.keep_zero);
    Ok(Reduced {
        complex,
        diagram,
        opts: *opts,
        morse_stats,
        boundaries,
        reductions,
        pivots_by_matrix,
    })
}

/// Assembles the diagram from per-matrix pivot sets in original indexing.
/// Finite dim-k bars come from pivots of D_{k+1}; essential dim-k bars are
/// the k-simplices that are neither a pivot column of D_k nor a pivot row of
/// D_{k+1}.
pub fn diagram_from_pivots(
    complex: &FilteredComplex,
    pivots_by_matrix: &[PivotSet],
    keep_zero: bool,
) -> PersistenceDiagram {
    let nmat = pivots_by_matrix.len();
    let births: Vec<Vec<f64>> = (0..=nmat)
        .map(|k| (0..complex.count(k)).map(|i| complex.birth_value(k, i)).collect())
        .collect();
    let mut pairs = Vec::new();
    for dim in 0..nmat {
        pairs.extend(pairs_from_pivots(
            dim,
            &births[dim],
            &births[dim + 1],
            &pivots_by_matrix[dim],
            keep_zero,
        ));
        let mut essential = vec![true; complex.count(dim)];
        for i in pivots_by_matrix[dim].rows() {
            essential[i] = false;
        }
        if dim >= 1 {
            for j in pivots_by_matrix[dim - 1].cols() {
                essential[j] = false;
            }
        }
        for (c, _) in essential.iter().enumerate().filter(|(_, &e)| e) {
            pairs.push(PersistencePair {
                dim,
                birth: births[dim][c],
                death: f64::INFINITY,
                birth_index: c,
                death_index: None,
            });
        }
    }
    pairs.sort_by(|a, b| {
        (a.dim, a.birth, a.death, a.birth_index)
            .partial_cmp(&(b.dim, b.birth, b.death, b.birth_index))
            .unwrap()
    });
    PersistenceDiagram { pairs }
}

/// Euler characteristic cross-check: alternating sum of simplex counts equals
/// the alternating sum of Betti numbers at full filtration value. Used by
/// tests; exposed because the benchmark harness reports it too.
pub fn euler_characteristic_consistent(reduced: &Reduced) -> bool {
    let complex = &reduced.complex;
    let full: i64 = (0..=complex.maxdim())
        .map(|k| {
            let n = complex.count(k) as i64;
            if k % 2 == 0 {
                n
            } else {
                -n
            }
        })
        .sum();
    // Pair every simplex off: each pivot of any D_k cancels one (k-1)- and
    // one k-simplex, so the alternating Betti sum over all dims (including
    // the top one, whose essential count is count - pivots involved) must
    // match. Count essentials per dimension directly.
    let mut essential = vec![0i64; complex.maxdim() + 1];
    for dim in 0..=complex.maxdim() {
        let mut is_essential = vec![true; complex.count(dim)];
        if dim < complex.maxdim() {
            for i in reduced.pivots(dim + 1).rows() {
                is_essential[i] = false;
            }
        }
        if dim >= 1 {
            for j in reduced.pivots(dim).cols() {
                is_essential[j] = false;
            }
        }
        essential[dim] = is_essential.iter().filter(|&&e| e).count() as i64;
    }
    let betti_sum: i64 = essential
        .iter()
        .enumerate()
        .map(|(k, &b)| if k % 2 == 0 { b } else { -b })
        .sum();
    full == betti_sum
}

/// Dense textbook reduction used as an oracle in tests: builds the full
/// boundary matrix of the whole complex in one filtration-ordered basis and
/// reduces it column by column with no optimizations.
pub fn brute_force_diagram(complex: &FilteredComplex, keep_zero: bool) -> Result<PersistenceDiagram> {
    // Global order: dimension-respecting filtration order. All simplices in
    // one basis, columns sorted by (birth, dim, index within dim).
    let mut global: Vec<(usize, usize)> = Vec::new();
    for dim in 0..=complex.maxdim() {
        for i in 0..complex.count(dim) {
            global.push((dim, i));
        }
    }
    global.sort_by_key(|&(dim, i)| (complex.simplices[dim][i].birth, dim, i));
    let pos: HashMap<(usize, usize), usize> =
        global.iter().enumerate().map(|(p, &s)| (s, p)).collect();
    let n = global.len();
    let mut triplets = Vec::new();
    for (p, &(dim, i)) in global.iter().enumerate() {
        if dim == 0 {
            continue;
        }
        let s = &complex.simplices[dim][i];
        for omit in 0..s.vertices.len() {
            let mut face = s.vertices.clone();
            face.remove(omit);
            let fi = complex.simplices[dim - 1]
                .iter()
                .position(|t| t.vertices == face)
                .expect("face present");
            triplets.push((pos[&(dim - 1, fi)], p));
        }
    }
    let d = SparseBoolMatrix::from_triplets(n, n, &triplets)?;
    let res = ph_col(&d, &[])?;
    res.verify(&d)?;

    let mut paired = vec![false; n];
    let mut pairs = Vec::new();
    for &(i, j) in res.pivots.pairs() {
        paired[i] = true;
        paired[j] = true;
        let (bdim, bi) = global[i];
        let (_, di) = global[j];
        let (birth, death) = (complex.birth_value(bdim, bi), complex.birth_value(bdim + 1, di));
        if keep_zero || birth != death {
            pairs.push(PersistencePair {
                dim: bdim,
                birth,
                death,
                birth_index: bi,
                death_index: Some(di),
            });
        }
    }
    for (p, &(dim, i)) in global.iter().enumerate() {
        if !paired[p] {
            pairs.push(PersistencePair {
                dim,
                birth: complex.birth_value(dim, i),
                death: f64::INFINITY,
                birth_index: i,
                death_index: None,
            });
        }
    }
    pairs.sort_by(|a, b| {
        (a.dim, a.birth, a.death, a.birth_index)
            .partial_cmp(&(b.dim, b.birth, b.death, b.birth_index))
            .unwrap()
    });
    Ok(PersistenceDiagram { pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_vr_complex;
    use crate::ingest::{order_canonical_form, CanonicalFiltration, DistanceMatrix};
    use rand::{Rng, SeedableRng};

    fn dm_from_upper(m: usize, upper: &[f64]) -> DistanceMatrix {
        let mut d = vec![0.0; m * m];
        let mut it = upper.iter();
        for i in 0..m {
            for j in (i + 1)..m {
                let v = *it.next().unwrap();
                d[i * m + j] = v;
                d[j * m + i] = v;
            }
        }
        DistanceMatrix::new(m, d).unwrap()
    }

    fn filt(m: usize, upper: &[f64], lim: f64) -> CanonicalFiltration {
        order_canonical_form(&dm_from_upper(m, upper), lim, false, SortAlgo::Merge).unwrap()
    }

    fn random_filtration(rng: &mut impl Rng, max_points: usize) -> CanonicalFiltration {
        let m = rng.gen_range(2..=max_points);
        let upper: Vec<f64> =
            (0..m * (m - 1) / 2).map(|_| f64::from(rng.gen_range(1..15))).collect();
        let lim = rng.gen_range(3.0..16.0);
        filt(m, &upper, lim)
    }

    fn all_opts() -> Vec<PersistOpts> {
        let mut out = Vec::new();
        for backend in [Backend::Column, Backend::Row, Backend::Morse] {
            for cohomology in [false, true] {
                for clearing in [false, true] {
                    for reorder in [false, true] {
                        out.push(PersistOpts {
                            backend,
                            cohomology,
                            clearing,
                            reorder,
                            ..PersistOpts::default()
                        });
                    }
                }
            }
        }
        out
    }

    #[test]
    fn ph_col_single_triangle() {
        // Boundary of one triangle on rows e1, e2, e3.
        let d = SparseBoolMatrix::from_triplets(3, 1, &[(0, 0), (1, 0), (2, 0)]).unwrap();
        let res = ph_col(&d, &[]).unwrap();
        res.verify(&d).unwrap();
        assert_eq!(res.pivots.pairs(), &[(2, 0)]);
    }

    #[test]
    fn ph_col_two_columns_cancel() {
        // Second column reduces to zero against the first.
        let d =
            SparseBoolMatrix::from_triplets(2, 2, &[(0, 0), (1, 0), (0, 1), (1, 1)]).unwrap();
        let res = ph_col(&d, &[]).unwrap();
        res.verify(&d).unwrap();
        assert_eq!(res.pivots.pairs(), &[(1, 0)]);
        assert!(res.r.col(1).is_empty());
        assert_eq!(res.v.col(1), &[0, 1]);
    }

    #[test]
    fn ph_row_matches_ph_col_pivots() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let nrows = rng.gen_range(1..=25);
            let ncols = rng.gen_range(1..=25);
            let mut triplets = Vec::new();
            for i in 0..nrows {
                for j in 0..ncols {
                    if rng.gen_bool(0.25) {
                        triplets.push((i, j));
                    }
                }
            }
            let d = SparseBoolMatrix::from_triplets(nrows, ncols, &triplets).unwrap();
            let a = ph_col(&d, &[]).unwrap();
            let b = ph_row(&d, &[]).unwrap();
            a.verify(&d).unwrap();
            b.verify(&d).unwrap();
            // Pivots of R = DV are unique to D, not to the algorithm.
            assert_eq!(a.pivots.pairs(), b.pivots.pairs());
        }
    }

    #[test]
    fn clearing_preserves_decomposition() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let f = random_filtration(&mut rng, 9);
            let c = build_vr_complex(&f, 3);
            if c.maxdim() == 0 {
                continue;
            }
            for backend in [Backend::Column, Backend::Row] {
                let mats: Vec<SparseBoolMatrix> = (1..=c.maxdim())
                    .rev()
                    .map(|k| c.boundary_operator(k).unwrap())
                    .collect();
                let with = reduce_chain(&mats, None, backend, true, 1).unwrap();
                let without = reduce_chain(&mats, None, backend, false, 1).unwrap();
                for ((d, (rw, _)), (rn, _)) in mats.iter().zip(&with).zip(&without) {
                    rw.verify(d).unwrap();
                    rn.verify(d).unwrap();
                    assert_eq!(rw.pivots.pairs(), rn.pivots.pairs());
                }
            }
        }
    }

    #[test]
    fn all_backends_and_modes_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..40 {
            let f = random_filtration(&mut rng, 8);
            let c = build_vr_complex(&f, 3);
            if c.maxdim() == 0 {
                continue;
            }
            let reference = persist_complex(&c, &PersistOpts::default()).unwrap();
            reference.verify().unwrap();
            for opts in all_opts() {
                let r = persist_complex(&c, &opts).unwrap();
                r.verify().unwrap();
                assert_eq!(
                    r.diagram.normalized(),
                    reference.diagram.normalized(),
                    "backend {:?} cohomology {} clearing {} reorder {}",
                    opts.backend,
                    opts.cohomology,
                    opts.clearing,
                    opts.reorder
                );
            }
        }
    }

    #[test]
    fn diagram_matches_brute_force_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..60 {
            let f = random_filtration(&mut rng, 8);
            let c = build_vr_complex(&f, 3);
            if c.maxdim() == 0 {
                continue;
            }
            let r = persist_complex(&c, &PersistOpts::default()).unwrap();
            let oracle = brute_force_diagram(&c, false).unwrap();
            // The oracle reports essentials for the top dimension too; the
            // pipeline stops one below, so compare only shared dimensions.
            let keep = |pairs: &PersistenceDiagram| {
                pairs
                    .pairs
                    .iter()
                    .filter(|p| p.dim < c.maxdim())
                    .map(|p| (p.dim, p.birth, p.death))
                    .collect::<Vec<_>>()
            };
            assert_eq!(keep(&r.diagram), keep(&oracle));
        }
    }

    #[test]
    fn two_points_one_bar_dies_at_distance() {
        let f = filt(2, &[2.5], f64::INFINITY);
        let c = build_vr_complex(&f, 1);
        let r = persist_complex(&c, &PersistOpts::default()).unwrap();
        let bars = r.diagram.normalized();
        assert_eq!(bars, vec![(0, 0.0, 2.5), (0, 0.0, f64::INFINITY)]);
    }

    #[test]
    fn four_cycle_has_one_loop() {
        // Unit square traversed by short edges only: one essential component
        // and a dim-1 bar born at 1 killed by the diagonal at sqrt(2).
        let s = 2f64.sqrt();
        let f = filt(4, &[1.0, s, 1.0, 1.0, s, 1.0], f64::INFINITY);
        let c = build_vr_complex(&f, 2);
        let r = persist_complex(&c, &PersistOpts::default()).unwrap();
        let h1: Vec<_> = r.diagram.pairs_in_dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!(h1[0].birth, 1.0);
        assert!((h1[0].death - s).abs() < 1e-12);
        let h0: Vec<_> = r.diagram.pairs_in_dim(0).collect();
        assert_eq!(h0.iter().filter(|p| p.is_essential()).count(), 1);
    }

    #[test]
    fn named_pivot_gives_expected_bar() {
        // Three vertices born at 1, 2, 3 and two edges at 4 and 5; the pivot
        // pairing the third vertex with the second edge yields the bar [3, 5).
        let d = SparseBoolMatrix::from_triplets(3, 2, &[(0, 0), (1, 0), (1, 1), (2, 1)]).unwrap();
        let res = ph_col(&d, &[]).unwrap();
        let pairs = pairs_from_pivots(0, &[1.0, 2.0, 3.0], &[4.0, 5.0], &res.pivots, false);
        assert!(pairs.contains(&PersistencePair {
            dim: 0,
            birth: 3.0,
            death: 5.0,
            birth_index: 2,
            death_index: Some(1),
        }));
    }

    #[test]
    fn betti_curve_step_function() {
        let diagram = PersistenceDiagram {
            pairs: vec![
                PersistencePair { dim: 0, birth: 0.0, death: 2.0, birth_index: 0, death_index: Some(0) },
                PersistencePair { dim: 0, birth: 0.0, death: f64::INFINITY, birth_index: 1, death_index: None },
                PersistencePair { dim: 0, birth: 1.0, death: 3.0, birth_index: 2, death_index: Some(1) },
            ],
        };
        assert_eq!(diagram.betti_at(0, 0.0), 2);
        assert_eq!(diagram.betti_at(0, 1.5), 3);
        assert_eq!(diagram.betti_at(0, 2.0), 2);
        assert_eq!(diagram.betti_at(0, 10.0), 1);
        assert_eq!(
            diagram.betti_curve(0),
            vec![(0.0, 2), (1.0, 3), (2.0, 2), (3.0, 1)]
        );
        assert!(diagram.betti_curve(1).is_empty());
    }

    #[test]
    fn generators_are_cycles_born_with_their_bars() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let f = random_filtration(&mut rng, 8);
            let c = build_vr_complex(&f, 3);
            if c.maxdim() == 0 {
                continue;
            }
            let r = persist_complex(&c, &PersistOpts::default()).unwrap();
            let gens = r.generators().unwrap();
            assert_eq!(gens.len(), r.diagram.pairs.len());
            for g in &gens {
                let p = &r.diagram.pairs[g.pair_index];
                assert!(!g.simplices.is_empty());
                for s in &g.simplices {
                    assert_eq!(s.len(), p.dim + 1);
                }
                if p.dim >= 1 {
                    // The chain is a cycle: its boundary over GF(2) vanishes.
                    let idx: Vec<usize> = g
                        .simplices
                        .iter()
                        .map(|vs| {
                            r.complex.simplices[p.dim]
                                .iter()
                                .position(|t| &t.vertices == vs)
                                .unwrap()
                        })
                        .collect();
                    let chain =
                        SparseBoolMatrix::from_columns(r.complex.count(p.dim), &[idx]).unwrap();
                    assert!(r.boundary(p.dim).multiply(&chain).unwrap().is_zero());
                }
                // Every simplex in the chain exists by the birth time.
                for vs in &g.simplices {
                    let s = r.complex.simplices[p.dim]
                        .iter()
                        .find(|t| &t.vertices == vs)
                        .unwrap();
                    assert!(r.complex.filtration.birth_value(s.birth) <= p.birth);
                }
            }
        }
    }

    #[test]
    fn square_loop_generator_is_the_four_edge_cycle() {
        let s = 2f64.sqrt();
        let f = filt(4, &[1.0, s, 1.0, 1.0, s, 1.0], f64::INFINITY);
        let c = build_vr_complex(&f, 2);
        let r = persist_complex(&c, &PersistOpts::default()).unwrap();
        let (i, _) = r
            .diagram
            .pairs
            .iter()
            .enumerate()
            .find(|(_, p)| p.dim == 1)
            .unwrap();
        let gens = r.generators().unwrap();
        let g = gens.iter().find(|g| g.pair_index == i).unwrap();
        let mut edges = g.simplices.clone();
        edges.sort();
        assert_eq!(edges, vec![vec![0, 1], vec![0, 3], vec![1, 2], vec![2, 3]]);
    }

    #[test]
    fn cohomology_mode_refuses_generators() {
        let f = filt(3, &[1.0, 2.0, 3.0], f64::INFINITY);
        let c = build_vr_complex(&f, 2);
        let opts = PersistOpts { cohomology: true, ..PersistOpts::default() };
        let r = persist_complex(&c, &opts).unwrap();
        assert!(matches!(r.generators(), Err(Error::GeneratorsUnavailable)));
    }

    #[test]
    fn euler_characteristic_holds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        for _ in 0..50 {
            let f = random_filtration(&mut rng, 9);
            let c = build_vr_complex(&f, 3);
            if c.maxdim() == 0 {
                continue;
            }
            let r = persist_complex(&c, &PersistOpts::default()).unwrap();
            assert!(euler_characteristic_consistent(&r));
        }
    }

    #[test]
    fn reorder_is_filtration_compatible() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for _ in 0..30 {
            let f = random_filtration(&mut rng, 9);
            let c = build_vr_complex(&f, 2);
            let rc = reorder_complex(&c, 2);
            for dim in 0..=rc.maxdim() {
                assert_eq!(rc.count(dim), c.count(dim));
                assert!(rc.simplices[dim].windows(2).all(|w| w[0].birth <= w[1].birth));
                let mut a: Vec<_> = c.simplices[dim].iter().map(|s| &s.vertices).collect();
                let mut b: Vec<_> = rc.simplices[dim].iter().map(|s| &s.vertices).collect();
                a.sort();
                b.sort();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn backend_names_round_trip() {
        for b in [Backend::Column, Backend::Row, Backend::Morse] {
            assert_eq!(Backend::from_name(b.name()).unwrap(), b);
        }
        assert!(Backend::from_name("gauss").is_err());
    }

    #[test]
    fn keep_zero_retains_equal_birth_death() {
        // Two points at equal distances force a tie class; a zero bar appears
        // only when two simplices share a birth value across a pivot.
        let f = filt(3, &[1.0, 1.0, 1.0], f64::INFINITY);
        let c = build_vr_complex(&f, 2);
        let keep = persist_complex(
            &c,
            &PersistOpts { keep_zero: true, ..PersistOpts::default() },
        )
        .unwrap();
        let drop = persist_complex(&c, &PersistOpts::default()).unwrap();
        assert!(keep.diagram.pairs.len() > drop.diagram.pairs.len());
        assert_eq!(keep.diagram.normalized(), drop.diagram.normalized());
    }
}
