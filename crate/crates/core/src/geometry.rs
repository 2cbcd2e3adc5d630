//! Cayley-Menger matrices and simplex content.
//!
//! A d-simplex is described only by the squared pairwise distances between
//! its d+1 vertices. Its content C_d (length, area, volume, ...) satisfies
//!
//! ```text
//! a_d * C_d^2 = det(M_d),    a_d = (-1)^(d+1) * 2^d * (d!)^2
//! ```
//!
//! where `M_d` is the distance matrix bordered by a row and column of ones.
//! The determinant is taken by LU decomposition with partial pivoting,
//! carried out in double-double arithmetic.

use thiserror::Error;

/// Raw squared content at or below this value marks the simplex degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("distance matrix needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("distance matrix of order {order} needs {expected} entries, got {got}")]
    WrongEntryCount {
        order: usize,
        expected: usize,
        got: usize,
    },
    #[error("distance matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("negative or non-finite squared distance {value} at ({row}, {col})")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("nonzero diagonal entry {value} at index {index}")]
    NonzeroDiagonal { index: usize, value: f64 },
    #[error("simplex dimension must be at least 1, got {0}")]
    InvalidDimension(i64),
    #[error("Cayley-Menger coefficient overflows i128 at dimension {0}")]
    CoefficientOverflow(u32),
}

/// Symmetric matrix of squared pairwise distances between simplex vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major entries, validating symmetry, a zero
    /// diagonal and nonnegative entries.
    pub fn new(order: usize, entries: Vec<f64>) -> Result<Self, GeometryError> {
        if order < 2 {
            return Err(GeometryError::TooFewVertices(order));
        }
        if entries.len() != order * order {
            return Err(GeometryError::WrongEntryCount {
                order,
                expected: order * order,
                got: entries.len(),
            });
        }
        for i in 0..order {
            let diag = entries[i * order + i];
            if diag != 0.0 {
                return Err(GeometryError::NonzeroDiagonal {
                    index: i,
                    value: diag,
                });
            }
            for j in 0..order {
                let v = entries[i * order + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(GeometryError::InvalidEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                if v != entries[j * order + i] {
                    return Err(GeometryError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { order, entries })
    }

    /// Builds a matrix from a function of the (i, j) pair with i < j; the
    /// lower triangle is mirrored and the diagonal is zero.
    pub fn from_upper<F>(order: usize, mut squared: F) -> Result<Self, GeometryError>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let mut entries = vec![0.0; order * order];
        for i in 0..order {
            for j in (i + 1)..order {
                let v = squared(i, j);
                entries[i * order + j] = v;
                entries[j * order + i] = v;
            }
        }
        Self::new(order, entries)
    }

    /// Squared distances between points given by their coordinates.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self, GeometryError> {
        Self::from_upper(points.len(), |i, j| {
            points[i]
                .as_ref()
                .iter()
                .zip(points[j].as_ref())
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        })
    }

    /// Number of vertices (d + 1).
    pub fn order(&self) -> usize {
        self.order
    }

    /// Simplex dimension d.
    pub fn dimension(&self) -> usize {
        self.order - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Outcome of a content computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmResult {
    pub dimension: usize,
    pub determinant: f64,
    /// `det / a_d`, clamped at zero.
    pub squared_content: f64,
    /// `det / a_d` before clamping.
    pub raw_squared_content: f64,
    pub content: f64,
    pub degenerate: bool,
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    pub size: usize,
    pub data: Vec<f64>,
}

impl SquareMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.size).map(<[f64]>::to_vec).collect()
    }
}

/// The bordered Cayley-Menger matrix of order d+2.
pub fn cm_matrix(dist: &DistanceMatrix) -> SquareMatrix {
    let n = dist.order + 1;
    let mut data = vec![0.0; n * n];
    for k in 1..n {
        data[k] = 1.0;
        data[k * n] = 1.0;
    }
    for i in 0..dist.order {
        for j in 0..dist.order {
            data[(i + 1) * n + (j + 1)] = dist.get(i, j);
        }
    }
    SquareMatrix { size: n, data }
}

/// `a_d = (-1)^(d+1) 2^d (d!)^2`, exactly.
pub fn cm_coefficient(d: i64) -> Result<i128, GeometryError> {
    if d < 1 {
        return Err(GeometryError::InvalidDimension(d));
    }
    let dim = u32::try_from(d).map_err(|_| GeometryError::CoefficientOverflow(u32::MAX))?;
    let overflow = || GeometryError::CoefficientOverflow(dim);
    let mut factorial: i128 = 1;
    for k in 2..=i128::from(dim) {
        factorial = factorial.checked_mul(k).ok_or_else(overflow)?;
    }
    let magnitude = 2i128
        .checked_pow(dim)
        .and_then(|p| p.checked_mul(factorial))
        .and_then(|p| p.checked_mul(factorial))
        .ok_or_else(overflow)?;
    Ok(if dim % 2 == 1 { magnitude } else { -magnitude })
}

/// Content of the simplex whose squared edge lengths are `dist`.
pub fn simplex_content(dist: &DistanceMatrix) -> Result<CmResult, GeometryError> {
    let d = dist.dimension();
    let coefficient = cm_coefficient(d as i64)? as f64;
    let determinant = lu_determinant(&cm_matrix(dist));
    let raw = determinant / coefficient;
    let squared_content = raw.max(0.0);
    Ok(CmResult {
        dimension: d,
        determinant,
        squared_content,
        raw_squared_content: raw,
        content: squared_content.sqrt(),
        degenerate: raw <= DEGENERACY_TOLERANCE,
    })
}

/// Determinant by LU decomposition with partial pivoting.
pub fn lu_determinant(matrix: &SquareMatrix) -> f64 {
    let n = matrix.size;
    let mut a: Vec<Dd> = matrix.data.iter().copied().map(Dd::from).collect();
    let mut det = Dd::from(1.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                a[r * n + col]
                    .hi
                    .abs()
                    .total_cmp(&a[s * n + col].hi.abs())
                    // prefer the earliest row on equal magnitude
                    .then(s.cmp(&r))
            })
            .unwrap_or(col);
        let pivot = a[pivot_row * n + col];
        if pivot.hi == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            det = -det;
        }
        det = det * pivot;
        for row in (col + 1)..n {
            let factor = a[row * n + col] / pivot;
            if factor.hi == 0.0 {
                continue;
            }
            for k in (col + 1)..n {
                a[row * n + k] = a[row * n + k] - factor * a[col * n + k];
            }
        }
    }
    det.hi + det.lo
}

/// Unevaluated sum of two doubles, roughly 106 bits of significand.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        let p = self.hi * rhs.hi;
        let e = self.hi.mul_add(rhs.hi, -p);
        quick_two_sum(p, e + (self.hi * rhs.lo + self.lo * rhs.hi))
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from(q2);
        let q3 = r.hi / rhs.hi;
        let q = quick_two_sum(q1, q2);
        q + Dd::from(q3)
    }
}
