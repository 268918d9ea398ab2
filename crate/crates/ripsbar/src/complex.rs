//! Filtered Vietoris-Rips complexes and their boundary operators.
//!
//! Simplices are stored per dimension in filtration order: ascending birth
//! rank, ties broken lexicographically on the vertex list. This order is what
//! makes the boundary matrices "filtered": every face of a simplex appears at
//! a column index whose birth is no later.

use crate::error::{Error, Result};
use crate::gf2::SparseBoolMatrix;
use crate::ingest::CanonicalFiltration;

/// One simplex: sorted vertex indices plus the integer birth rank of its
/// latest edge (0 for vertices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub birth: usize,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// All simplices of a filtered complex up to a dimension cap, in filtration
/// order within each dimension.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    /// `simplices[k]` lists the k-simplices.
    pub simplices: Vec<Vec<Simplex>>,
    pub filtration: CanonicalFiltration,
}

impl FilteredComplex {
    pub fn maxdim(&self) -> usize {
        self.simplices.len() - 1
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices.get(dim).map_or(0, Vec::len)
    }

    /// Real filtration value at which simplex `idx` of dimension `dim` is born.
    pub fn birth_value(&self, dim: usize, idx: usize) -> f64 {
        self.filtration.birth_value(self.simplices[dim][idx].birth)
    }

    /// Boundary operator from k-simplices to (k-1)-simplices over GF(2).
    /// For k = 0 this is the zero map into a single-row augmentation target,
    /// kept so dimension bookkeeping stays uniform; callers normally start at
    /// k = 1.
    pub fn boundary_operator(&self, dim: usize) -> Result<SparseBoolMatrix> {
        if dim > self.maxdim() {
            return Err(Error::DimOutOfRange { dim, max: self.maxdim() });
        }
        if dim == 0 {
            return Ok(SparseBoolMatrix::zero(1, self.count(0)));
        }
        let faces = &self.simplices[dim - 1];
        let mut face_index = std::collections::HashMap::with_capacity(faces.len());
        for (i, s) in faces.iter().enumerate() {
            face_index.insert(s.vertices.clone(), i);
        }
        let mut triplets = Vec::new();
        for (j, s) in self.simplices[dim].iter().enumerate() {
            for omit in 0..s.vertices.len() {
                let mut face = s.vertices.clone();
                face.remove(omit);
                let &i = face_index
                    .get(&face)
                    .expect("every face of an included simplex is included");
                triplets.push((i, j));
            }
        }
        SparseBoolMatrix::from_triplets(faces.len(), self.count(dim), &triplets)
    }
}

/// Builds the Vietoris-Rips complex of a canonical filtration up to `maxdim`.
///
/// A k-simplex enters at the rank of its latest edge; only pairs included in
/// the filtration span edges. Expansion adds one cofacet vertex at a time,
/// drawn from the common neighborhood, with the new vertex always larger than
/// the current ones so each simplex is generated once.
pub fn build_vr_complex(filtration: &CanonicalFiltration, maxdim: usize) -> FilteredComplex {
    let m = filtration.npoints();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..m {
        for j in 0..m {
            if filtration.included(i, j) {
                neighbors[i].push(j);
            }
        }
    }

    let mut simplices: Vec<Vec<Simplex>> = Vec::with_capacity(maxdim + 1);
    simplices.push(
        (0..m)
            .map(|v| Simplex { vertices: vec![v], birth: 0 })
            .collect(),
    );

    for dim in 1..=maxdim {
        let mut next = Vec::new();
        for s in &simplices[dim - 1] {
            let &last = s.vertices.last().unwrap();
            // Common neighbors above the current top vertex.
            for &v in &neighbors[last] {
                if v <= last {
                    continue;
                }
                if !s.vertices[..s.vertices.len() - 1]
                    .iter()
                    .all(|&u| filtration.included(u, v))
                {
                    continue;
                }
                let birth = s
                    .vertices
                    .iter()
                    .map(|&u| filtration.rank(u, v))
                    .chain(std::iter::once(s.birth))
                    .max()
                    .unwrap();
                let mut vertices = s.vertices.clone();
                vertices.push(v);
                next.push(Simplex { vertices, birth });
            }
        }
        next.sort_by(|a, b| a.birth.cmp(&b.birth).then_with(|| a.vertices.cmp(&b.vertices)));
        simplices.push(next);
    }

    FilteredComplex {
        simplices,
        filtration: filtration.clone(),
    }
}
