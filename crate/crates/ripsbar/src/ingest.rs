//! Input loading: point-cloud and distance-matrix CSV files, coordinate
//! conversion, label cleanup, and the integer filtration ranking that the
//! complex builder consumes.
//!
//! All file formats are 1-based on the outside (column selections, error
//! positions); indices are 0-based everywhere else.

use std::path::Path;

use crate::error::{Error, Result};
use crate::kernels::{self, SortKey};

/// Which argsort backs the distance ranking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SortAlgo {
    #[default]
    Radix,
    Merge,
}

pub fn sortperm<K: SortKey>(v: &[K], algo: SortAlgo) -> Result<Vec<usize>> {
    match algo {
        SortAlgo::Radix => kernels::sortperm_radix(v),
        SortAlgo::Merge => kernels::sortperm_merge(v),
    }
}

/// Whether file rows are points or coordinate dimensions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RowsAre {
    #[default]
    Points,
    Dimensions,
}

/// A finite point cloud: `coords[d][p]` is coordinate `d` of point `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub coords: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

impl PointCloud {
    pub fn new(coords: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        let npoints = coords.first().map_or(0, Vec::len);
        if coords.iter().any(|d| d.len() != npoints) {
            return Err(Error::InvalidConfig("coordinate rows have unequal lengths".into()));
        }
        if coords.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("coordinates must be finite".into()));
        }
        if let Some(l) = &labels {
            if l.len() != npoints {
                return Err(Error::InvalidConfig("label count differs from point count".into()));
            }
        }
        Ok(Self { coords, labels })
    }

    pub fn dims(&self) -> usize {
        self.coords.len()
    }

    pub fn npoints(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }
}

/// A symmetric pairwise distance matrix with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    m: usize,
    d: Vec<f64>, // row-major m*m
    pub labels: Option<Vec<String>>,
}

impl DistanceMatrix {
    pub fn new(m: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != m * m {
            return Err(Error::InvalidDistanceMatrix(format!(
                "expected {} values for a {m}x{m} matrix, got {}",
                m * m,
                d.len()
            )));
        }
        for i in 0..m {
            if d[i * m + i] != 0.0 {
                return Err(Error::InvalidDistanceMatrix(format!("diagonal entry {} is nonzero", i + 1)));
            }
            for j in 0..m {
                let x = d[i * m + j];
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::InvalidDistanceMatrix(format!(
                        "entry ({}, {}) is {x}",
                        i + 1,
                        j + 1
                    )));
                }
                if d[i * m + j] != d[j * m + i] {
                    return Err(Error::InvalidDistanceMatrix(format!(
                        "entries ({}, {}) and ({}, {}) differ",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(Self { m, d, labels: None })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.m + j]
    }
}

fn read_records(path: &Path) -> Result<Vec<Vec<String>>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        })?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn parse_cell(rows: &[Vec<String>], row: usize, col: usize) -> Result<f64> {
    let value = &rows[row][col];
    value.parse::<f64>().map_err(|_| Error::Parse {
        row: row + 1,
        col: col + 1,
        value: value.clone(),
    })
}

/// Loads a point cloud from a CSV file.
///
/// `columns` selects file columns by 1-based index (all columns when `None`);
/// `label_col` optionally names a 1-based column of point labels, read only
/// when rows are points. Labels pass through [`sanitize_labels`].
pub fn read_point_cloud_csv(
    path: &Path,
    rowsare: RowsAre,
    columns: Option<&[usize]>,
    has_header: bool,
    label_col: Option<usize>,
) -> Result<PointCloud> {
    let mut rows = read_records(path)?;
    let header_offset = usize::from(has_header);
    if has_header && !rows.is_empty() {
        rows.remove(0);
    }
    if rows.is_empty() {
        return Err(Error::InvalidConfig("file contains no data rows".into()));
    }
    let width = rows[0].len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::RaggedRow {
                row: r + 1 + header_offset,
                got: row.len(),
                expected: width,
            });
        }
    }
    let selected: Vec<usize> = match columns {
        Some(cols) => cols
            .iter()
            .map(|&c| {
                if c == 0 || c > width {
                    Err(Error::ColumnOutOfRange { col: c, ncols: width })
                } else {
                    Ok(c - 1)
                }
            })
            .collect::<Result<_>>()?,
        None => (0..width).collect(),
    };
    let mut table = vec![vec![0.0f64; rows.len()]; selected.len()];
    for (r, _) in rows.iter().enumerate() {
        for (k, &c) in selected.iter().enumerate() {
            // Error positions are 1-based and count the header row.
            table[k][r] = parse_cell(&rows, r, c).map_err(|e| match e {
                Error::Parse { row, col, value } => Error::Parse {
                    row: row + header_offset,
                    col,
                    value,
                },
                other => other,
            })?;
        }
    }
    let (coords, labels) = match rowsare {
        RowsAre::Points => {
            let labels = match label_col {
                Some(c) => {
                    if c == 0 || c > width {
                        return Err(Error::ColumnOutOfRange { col: c, ncols: width });
                    }
                    let raw: Vec<String> = rows.iter().map(|row| row[c - 1].clone()).collect();
                    Some(sanitize_labels(&raw))
                }
                None => None,
            };
            (table, labels)
        }
        RowsAre::Dimensions => {
            // File rows are coordinate dimensions; transpose.
            let npoints = selected.len();
            let dims = rows.len();
            let mut coords = vec![vec![0.0f64; dims]; 0];
            for d in 0..dims {
                let mut row = Vec::with_capacity(npoints);
                for p in 0..npoints {
                    row.push(table[p][d]);
                }
                coords.push(row);
            }
            (coords, None)
        }
    };
    PointCloud::new(coords, labels)
}

/// Replaces every label that is not plain ASCII with its 1-based row number.
pub fn sanitize_labels(raw: &[String]) -> Vec<String> {
    raw.iter()
        .enumerate()
        .map(|(i, s)| {
            if s.is_ascii() {
                s.clone()
            } else {
                (i + 1).to_string()
            }
        })
        .collect()
}

/// Converts (latitude, longitude) pairs in degrees to unit-sphere Euclidean
/// coordinates. Convention (fixed by the reference output this is checked
/// against): x = cos(lat)cos(lon), y = cos(lat)sin(lon), z = sin(lat).
pub fn latlon2euc(latlon: &[(f64, f64)]) -> Result<Vec<[f64; 3]>> {
    latlon
        .iter()
        .map(|&(lat, lon)| {
            if !(-90.0..=90.0).contains(&lat) {
                return Err(Error::LatitudeOutOfRange(lat));
            }
            let (lat, lon) = (lat.to_radians(), lon.to_radians());
            Ok([lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()])
        })
        .collect()
}

/// Euclidean pairwise distances.
pub fn distance_matrix(pc: &PointCloud) -> DistanceMatrix {
    let m = pc.npoints();
    let mut d = vec![0.0f64; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let dist = pc
                .coords
                .iter()
                .map(|row| (row[i] - row[j]).powi(2))
                .sum::<f64>()
                .sqrt();
            d[i * m + j] = dist;
            d[j * m + i] = dist;
        }
    }
    let mut dm = DistanceMatrix::new(m, d).expect("construction is symmetric by construction");
    dm.labels = pc.labels.clone();
    dm
}

/// Reads a full symmetric m x m grid of reals, comma-separated, no header.
pub fn read_distance_matrix_csv(path: &Path) -> Result<DistanceMatrix> {
    let rows = read_records(path)?;
    let m = rows.len();
    let mut d = vec![0.0f64; m * m];
    for (r, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(Error::RaggedRow { row: r + 1, got: row.len(), expected: m });
        }
        for c in 0..m {
            d[r * m + c] = parse_cell(&rows, r, c)?;
        }
    }
    DistanceMatrix::new(m, d)
}

/// The integer filtration order: every included off-diagonal distance is
/// replaced by its rank among the distinct distance values.
///
/// `rank(i, j)` is 0 on the diagonal and on excluded pairs, otherwise in
/// `1..=nvals`; equal distances share a rank and `value_of_rank` recovers the
/// original value exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalFiltration {
    m: usize,
    rank: Vec<usize>, // row-major m*m; 0 = diagonal or excluded
    pub nvals: usize,
    pub value_of_rank: Vec<f64>,
    pub labels: Option<Vec<String>>,
}

impl CanonicalFiltration {
    pub fn npoints(&self) -> usize {
        self.m
    }

    pub fn rank(&self, i: usize, j: usize) -> usize {
        self.rank[i * self.m + j]
    }

    /// Whether the pair (i, j) survives the threshold. The diagonal is not an
    /// edge and reports false.
    pub fn included(&self, i: usize, j: usize) -> bool {
        i != j && self.rank[i * self.m + j] != 0
    }

    /// Real birth value for a rank; rank 0 (vertices) is born at 0.
    pub fn birth_value(&self, rank: usize) -> f64 {
        if rank == 0 {
            0.0
        } else {
            self.value_of_rank[rank - 1]
        }
    }
}

/// Ranks the strictly-upper-triangle distances at or below `upperlim`
/// (strictly below with `strict`). Tie classes share one rank.
pub fn order_canonical_form(
    d: &DistanceMatrix,
    upperlim: f64,
    strict: bool,
    sort: SortAlgo,
) -> Result<CanonicalFiltration> {
    let m = d.size();
    let mut pairs = Vec::new();
    let mut values = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let v = d.get(i, j);
            let included = if strict { v < upperlim } else { v <= upperlim };
            if included {
                pairs.push((i, j));
                values.push(v);
            }
        }
    }
    let perm = sortperm(&values, sort)?;
    canonical_from_sorted(d, &pairs, &values, &perm)
}

/// Builds the canonical filtration from a precomputed sort permutation of the
/// included pair values. Split out so the sort can be timed on its own.
pub fn canonical_from_sorted(
    d: &DistanceMatrix,
    pairs: &[(usize, usize)],
    values: &[f64],
    perm: &[usize],
) -> Result<CanonicalFiltration> {
    let m = d.size();
    let mut rank = vec![0usize; m * m];
    let mut value_of_rank = Vec::new();
    let mut current = 0usize;
    for &p in perm {
        let v = values[p];
        if value_of_rank.last() != Some(&v) {
            value_of_rank.push(v);
            current += 1;
        }
        let (i, j) = pairs[p];
        rank[i * m + j] = current;
        rank[j * m + i] = current;
    }
    Ok(CanonicalFiltration {
        m,
        rank,
        nvals: current,
        value_of_rank,
        labels: d.labels.clone(),
    })
}
