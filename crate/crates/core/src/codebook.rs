//! Per-user sparse codebooks and per-user channel gains.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, FactorGraph, MappingMatrix, Matrix, Result};

/// One user's `K x M` real codebook. Columns are codewords; rows outside the
/// support are identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    user: usize,
    matrix: Matrix,
    support: Vec<usize>,
}

impl Codebook {
    pub fn new(user: usize, matrix: Matrix, support: Vec<usize>) -> Result<Self> {
        if support.windows(2).any(|w| w[0] >= w[1]) || support.iter().any(|&k| k >= matrix.rows())
        {
            return Err(Error::DimensionMismatch(format!(
                "support {support:?} is not an increasing subset of 0..{}",
                matrix.rows()
            )));
        }
        if matrix.cols() == 0 {
            return Err(Error::DimensionMismatch("codebook has no codewords".into()));
        }
        for r in (0..matrix.rows()).filter(|r| !support.contains(r)) {
            if let Some(col) = matrix.row(r).iter().position(|&v| v != 0.0) {
                return Err(Error::OffSupport { row: r, col, value: matrix[(r, col)] });
            }
        }
        Ok(Codebook { user, matrix, support })
    }

    /// Builds a codebook from its `N x M` active part.
    pub fn from_active(mapping: &MappingMatrix, active: &Matrix) -> Result<Self> {
        if active.rows() != mapping.active() {
            return Err(Error::DimensionMismatch(format!(
                "active part has {} rows, mapping has {} columns",
                active.rows(),
                mapping.active()
            )));
        }
        let mut matrix = Matrix::zeros(mapping.resources(), active.cols());
        for (r, &k) in mapping.support().iter().enumerate() {
            for m in 0..active.cols() {
                matrix[(k, m)] = active[(r, m)];
            }
        }
        Codebook::new(mapping.user(), matrix, mapping.support().to_vec())
    }

    pub fn user(&self) -> usize {
        self.user
    }

    /// Ambient dimension `K`.
    pub fn resources(&self) -> usize {
        self.matrix.rows()
    }

    /// Codebook size `M`.
    pub fn size(&self) -> usize {
        self.matrix.cols()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    #[inline]
    pub fn value(&self, resource: usize, codeword: usize) -> f64 {
        self.matrix[(resource, codeword)]
    }

    pub fn codeword(&self, m: usize) -> Vec<f64> {
        self.matrix.column(m)
    }

    /// The `N x M` block of active rows.
    pub fn active(&self) -> Matrix {
        Matrix::from_fn(self.support.len(), self.size(), |r, m| self.matrix[(self.support[r], m)])
    }

    pub fn mapping(&self) -> MappingMatrix {
        MappingMatrix::new(self.user, self.resources(), self.support.clone())
            .expect("codebook support is validated")
    }

    /// True when every pair of codewords differs by more than `tol` in some coordinate.
    pub fn has_distinct_codewords(&self, tol: f64) -> bool {
        let m = self.size();
        (0..m).all(|a| {
            (a + 1..m).all(|b| {
                (0..self.resources()).any(|k| (self.matrix[(k, a)] - self.matrix[(k, b)]).abs() > tol)
            })
        })
    }

    pub fn scaled(&self, factor: f64) -> Codebook {
        Codebook { user: self.user, matrix: self.matrix.scaled(factor), support: self.support.clone() }
    }

    /// Checks the support against the user's column of a factor graph.
    pub fn matches_graph(&self, graph: &FactorGraph) -> bool {
        self.user < graph.users()
            && self.resources() == graph.resources()
            && self.support == graph.resources_of(self.user)
    }
}

/// Checks that a codebook set shares `K` and `M`, and is non-empty.
pub fn check_set(codebooks: &[Codebook]) -> Result<(usize, usize)> {
    let first = codebooks
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty codebook list".into()))?;
    let (k, m) = (first.resources(), first.size());
    for cb in codebooks {
        if cb.resources() != k || cb.size() != m {
            return Err(Error::DimensionMismatch(format!(
                "codebook of user {} is {}x{}, expected {k}x{m}",
                cb.user(),
                cb.resources(),
                cb.size()
            )));
        }
    }
    Ok((k, m))
}

/// Per-user, per-resource channel gains `h_{k,j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gains {
    resources: usize,
    per_user: Vec<Vec<f64>>,
}

impl Gains {
    /// All-ones gains (plain AWGN).
    pub fn unit(users: usize, resources: usize) -> Self {
        Gains { resources, per_user: vec![vec![1.0; resources]; users] }
    }

    pub fn new(per_user: Vec<Vec<f64>>) -> Result<Self> {
        let resources = per_user.first().map_or(0, Vec::len);
        if per_user.iter().any(|h| h.len() != resources) {
            return Err(Error::DimensionMismatch("gain vectors differ in length".into()));
        }
        Ok(Gains { resources, per_user })
    }

    pub fn users(&self) -> usize {
        self.per_user.len()
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    #[inline]
    pub fn get(&self, resource: usize, user: usize) -> f64 {
        self.per_user[user][resource]
    }

    pub fn user(&self, user: usize) -> &[f64] {
        &self.per_user[user]
    }

    pub(crate) fn check(&self, users: usize, resources: usize) -> Result<()> {
        if self.users() != users || self.resources != resources {
            return Err(Error::DimensionMismatch(format!(
                "gains are {}x{}, expected {users} users on {resources} resources",
                self.users(),
                self.resources
            )));
        }
        Ok(())
    }
}
