//! Column-wise Kronecker sum and difference, and the superimposed constellation.
//!
//! For `U` (`p x n`) and `W` (`p x l`), `U ⊕ W = U ⊗ 1ᵀ_l + 1ᵀ_n ⊗ W`: column `a·l + b`
//! is `U[:, a] + W[:, b]`, so the left operand's index varies slowest. Folding `⊕`
//! over per-user codebooks therefore enumerates codeword tuples in lexicographic
//! order, which is the tuple/column convention used throughout the crate.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::codebook::check_set;
use crate::{Codebook, Error, Gains, Matrix, Result};

/// Default cap on materialized superimposed columns.
pub const DEFAULT_COLUMN_CAP: u128 = 1 << 24;

fn kronecker_columns(u: &Matrix, w: &Matrix, sign: f64) -> Result<Matrix> {
    if u.rows() != w.rows() {
        return Err(Error::DimensionMismatch(format!(
            "operands have {} and {} rows",
            u.rows(),
            w.rows()
        )));
    }
    let (n, l) = (u.cols(), w.cols());
    Ok(Matrix::from_fn(u.rows(), n * l, |r, c| u[(r, c / l)] + sign * w[(r, c % l)]))
}

/// `U ⊕ W`: every column of `U` plus every column of `W`.
pub fn column_sum_set(u: &Matrix, w: &Matrix) -> Result<Matrix> {
    kronecker_columns(u, w, 1.0)
}

/// `U ⊖ W`: every column of `U` minus every column of `W`.
pub fn column_diff_set(u: &Matrix, w: &Matrix) -> Result<Matrix> {
    kronecker_columns(u, w, -1.0)
}

/// Number of superimposed columns `M^J`, exact.
pub fn tuple_count(codebooks: &[Codebook]) -> u128 {
    codebooks.iter().map(|cb| cb.size() as u128).product()
}

/// Decodes a lexicographic column index into per-user codeword indices.
pub fn tuple_from_index(mut index: u64, sizes: &[usize], out: &mut [usize]) {
    for (slot, &m) in out.iter_mut().zip(sizes).rev() {
        *slot = (index % m as u64) as usize;
        index /= m as u64;
    }
}

/// Inverse of [`tuple_from_index`].
pub fn index_from_tuple(tuple: &[usize], sizes: &[usize]) -> u64 {
    tuple.iter().zip(sizes).fold(0u64, |acc, (&t, &m)| acc * m as u64 + t as u64)
}

/// `S = C_1 ⊕ C_2 ⊕ … ⊕ C_J`, refusing to materialize more than `cap` columns.
pub fn superimpose(codebooks: &[Codebook], cap: u128) -> Result<Matrix> {
    check_set(codebooks)?;
    let columns = tuple_count(codebooks);
    if columns > cap {
        return Err(Error::CapExceeded { columns, cap });
    }
    let mut acc = codebooks[0].matrix().clone();
    for cb in &codebooks[1..] {
        acc = column_sum_set(&acc, cb.matrix())?;
    }
    Ok(acc)
}

/// Writes `Σ_j C_j[:, t_j]` into `out`.
pub fn superimposed_column(codebooks: &[Codebook], tuple: &[usize], out: &mut [f64]) {
    out.fill(0.0);
    for (cb, &m) in codebooks.iter().zip(tuple) {
        for &k in cb.support() {
            out[k] += cb.value(k, m);
        }
    }
}

/// Streams superimposed columns in lexicographic tuple order without materializing `S`.
pub struct SuperimposedColumns<'a> {
    codebooks: &'a [Codebook],
    next: Option<Vec<usize>>,
    current: Vec<usize>,
    column: Vec<f64>,
}

impl<'a> SuperimposedColumns<'a> {
    pub fn new(codebooks: &'a [Codebook]) -> Result<Self> {
        let (k, _) = check_set(codebooks)?;
        Ok(SuperimposedColumns {
            codebooks,
            next: Some(vec![0; codebooks.len()]),
            current: Vec::new(),
            column: vec![0.0; k],
        })
    }

    /// Advances to the next column; returns its tuple and values, or `None` at the end.
    pub fn next_column(&mut self) -> Option<(&[usize], &[f64])> {
        let tuple = self.next.take()?;
        superimposed_column(self.codebooks, &tuple, &mut self.column);
        let m = self.codebooks[0].size();
        let mut succ = tuple.clone();
        for pos in (0..succ.len()).rev() {
            succ[pos] += 1;
            if succ[pos] < m {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        self.current = tuple;
        Some((&self.current, &self.column))
    }
}

/// `Σ_j diag(h_j) C_j[:, m_j]`: the received signal before noise.
pub fn noiseless_superposition(
    indices: &[usize],
    codebooks: &[Codebook],
    gains: &Gains,
) -> Result<Vec<f64>> {
    let (k, m) = check_set(codebooks)?;
    if indices.len() != codebooks.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} indices for {} users",
            indices.len(),
            codebooks.len()
        )));
    }
    gains.check(codebooks.len(), k)?;
    let mut y = vec![0.0; k];
    for (j, (cb, &idx)) in codebooks.iter().zip(indices).enumerate() {
        if idx >= m {
            return Err(Error::CodewordOutOfRange { index: idx, size: m });
        }
        for &r in cb.support() {
            y[r] += gains.get(r, j) * cb.value(r, idx);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[f64]) -> Matrix {
        Matrix::from_rows(&[v]).unwrap()
    }

    fn nested_loop(u: &Matrix, w: &Matrix, sign: f64) -> Matrix {
        let mut cols = Vec::new();
        for a in 0..u.cols() {
            for b in 0..w.cols() {
                cols.push((0..u.rows()).map(|r| u[(r, a)] + sign * w[(r, b)]).collect::<Vec<_>>());
            }
        }
        Matrix::from_columns(u.rows(), &cols).unwrap()
    }

    #[test]
    fn sum_and_difference_examples() {
        let s = column_sum_set(&row(&[1.0, 2.0]), &row(&[10.0, 20.0])).unwrap();
        assert_eq!(s, row(&[11.0, 21.0, 12.0, 22.0]));
        let d = column_diff_set(&row(&[1.0, 2.0]), &row(&[1.0, 2.0])).unwrap();
        assert_eq!(d, row(&[0.0, -1.0, 1.0, 0.0]));
        let w = Matrix::from_rows(&[[3.0, -4.0, 5.0]]).unwrap();
        assert_eq!(column_sum_set(&row(&[0.0]), &w).unwrap(), w);
        assert!(column_sum_set(&Matrix::zeros(2, 1), &w).is_err());
    }

    #[test]
    fn zero_operands() {
        let u = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let z = Matrix::zeros(2, 3);
        let d = column_diff_set(&u, &z).unwrap();
        for c in 0..6 {
            assert_eq!(d.column(c), u.column(c / 3));
        }
        let d = column_diff_set(&z, &u).unwrap();
        for c in 0..6 {
            assert_eq!(d.column(c), u.column(c % 2).iter().map(|v| -v).collect::<Vec<_>>());
        }
    }

    #[test]
    fn matches_nested_loop() {
        let u = Matrix::from_fn(3, 4, |r, c| (r * 7 + c * 3) as f64 * 0.25 - 1.0);
        let w = Matrix::from_fn(3, 5, |r, c| ((r + 2) * (c + 1)) as f64 * -0.5);
        assert_eq!(column_sum_set(&u, &w).unwrap(), nested_loop(&u, &w, 1.0));
        assert_eq!(column_diff_set(&u, &w).unwrap(), nested_loop(&u, &w, -1.0));
    }

    #[test]
    fn superimpose_small() {
        let a = Codebook::new(0, row(&[0.0, 1.0]), vec![0]).unwrap();
        let b = Codebook::new(1, row(&[0.0, 2.0]), vec![0]).unwrap();
        let s = superimpose(&[a.clone(), b], DEFAULT_COLUMN_CAP).unwrap();
        assert_eq!(s, row(&[0.0, 2.0, 1.0, 3.0]));
        assert_eq!(superimpose(core::slice::from_ref(&a), DEFAULT_COLUMN_CAP).unwrap(), *a.matrix());
        let many = vec![a; 5];
        assert!(matches!(superimpose(&many, 16), Err(Error::CapExceeded { columns: 32, cap: 16 })));
    }

    #[test]
    fn streaming_matches_materialized() {
        let cbs: Vec<Codebook> = (0..3)
            .map(|j| {
                let m = Matrix::from_fn(2, 3, |r, c| (j * 5 + r * 3 + c) as f64 * 0.1 - 0.4);
                Codebook::new(j, m, vec![0, 1]).unwrap()
            })
            .collect();
        let s = superimpose(&cbs, DEFAULT_COLUMN_CAP).unwrap();
        let mut stream = SuperimposedColumns::new(&cbs).unwrap();
        let sizes = [3, 3, 3];
        let mut seen = 0;
        while let Some((tuple, col)) = stream.next_column() {
            let idx = index_from_tuple(tuple, &sizes) as usize;
            assert_eq!(idx, seen);
            let mut back = [0; 3];
            tuple_from_index(idx as u64, &sizes, &mut back);
            assert_eq!(&back, tuple);
            for r in 0..2 {
                assert!((col[r] - s[(r, idx)]).abs() < 1e-12);
            }
            seen += 1;
        }
        assert_eq!(seen, 27);
    }

    #[test]
    fn superposition_with_gains() {
        let a = Codebook::new(0, Matrix::from_rows(&[[1.0, -1.0], [0.0, 0.0]]).unwrap(), vec![0])
            .unwrap();
        let b = Codebook::new(1, Matrix::from_rows(&[[0.5, -0.5], [2.0, -2.0]]).unwrap(), vec![0, 1])
            .unwrap();
        let unit = Gains::unit(2, 2);
        assert_eq!(noiseless_superposition(&[0, 1], &[a.clone(), b.clone()], &unit).unwrap(), vec![0.5, -2.0]);
        assert_eq!(noiseless_superposition(&[1], core::slice::from_ref(&a), &Gains::unit(1, 2)).unwrap(), vec![-1.0, 0.0]);
        let zero = Gains::new(vec![vec![0.0; 2]; 2]).unwrap();
        assert_eq!(noiseless_superposition(&[1, 1], &[a.clone(), b.clone()], &zero).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            noiseless_superposition(&[2, 0], &[a, b], &unit),
            Err(Error::CodewordOutOfRange { index: 2, size: 2 })
        ));
    }
}
