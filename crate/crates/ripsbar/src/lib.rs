//! Persistent homology of filtered Vietoris-Rips complexes over GF(2).
//!
//! Pipeline: ingest a point cloud or distance matrix, rank the distances into
//! a canonical integer filtration, build the complex, reduce its boundary
//! matrices with one of three interchangeable backends, and extract barcodes,
//! Betti curves, and cycle generators. The kernels module holds the low-level
//! sorting, ranking, compaction, and block-multiply routines the pipeline is
//! built from, each usable and benchmarkable on its own.

pub mod bench;
pub mod complex;
pub mod error;
pub mod gf2;
pub mod ingest;
pub mod kernels;
pub mod morse;
pub mod reduce;

pub use error::{Error, Result};
