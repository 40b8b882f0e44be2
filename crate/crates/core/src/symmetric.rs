//! Hadamard-signed symmetric codebooks and codeword difference sets.
//!
//! A symmetric codebook fixes one magnitude per active resource and draws the signs
//! from a Hadamard-type matrix, `C = H ⊙ (c ⊗ 1ᵀ_M)`. Only the magnitudes are free, and
//! the per-user difference set collapses from `M(M-1)+1` columns to far fewer.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::column_diff_set;
use crate::{Codebook, Error, MappingMatrix, Matrix, Result};

/// Default absolute per-coordinate tolerance for merging repeated difference columns.
pub const DEFAULT_MERGE_TOLERANCE: f64 = 1e-9;

/// A matrix of `±1` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<i8>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} sign entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(i) = entries.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSign { row: i / cols, col: i % cols, value: entries[i] });
        }
        Ok(SignMatrix { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.cols + col]
    }

    pub fn column(&self, col: usize) -> Vec<i8> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Reorders columns: column `m` of the result is column `order[m]` of `self`.
    pub fn with_column_order(&self, order: &[usize]) -> Result<SignMatrix> {
        let mut seen = vec![false; self.cols];
        if order.len() != self.cols
            || order.iter().any(|&c| c >= self.cols || core::mem::replace(&mut seen[c], true))
        {
            return Err(Error::DimensionMismatch(format!(
                "{order:?} is not a permutation of 0..{}",
                self.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for r in 0..self.rows {
            entries.extend(order.iter().map(|&c| self.get(r, c)));
        }
        Ok(SignMatrix { rows: self.rows, cols: self.cols, entries })
    }
}

/// `H_0 = [[1, -1], [1, -1]]`, `H_{l+1} = [[H_l, H_l], [H_l, -H_l]]`; level `l` is
/// `2^(l+1)` square.
pub fn hadamard_sign(level: u32) -> SignMatrix {
    let mut size = 2;
    let mut entries = vec![1i8, -1, 1, -1];
    for _ in 0..level {
        let next = 2 * size;
        let mut grown = vec![0i8; next * next];
        for r in 0..size {
            for c in 0..size {
                let h = entries[r * size + c];
                grown[r * next + c] = h;
                grown[r * next + c + size] = h;
                grown[(r + size) * next + c] = h;
                grown[(r + size) * next + c + size] = -h;
            }
        }
        entries = grown;
        size = next;
    }
    SignMatrix { rows: size, cols: size, entries }
}

/// The Hadamard level whose matrix has `m` columns.
pub fn hadamard_level(m: usize) -> Result<u32> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    Ok(m.trailing_zeros() - 1)
}

/// Magnitude-plus-sign factorization of one user's symmetric codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricProfile {
    magnitudes: Vec<f64>,
    sign: SignMatrix,
    mapping: MappingMatrix,
}

impl SymmetricProfile {
    pub fn new(magnitudes: Vec<f64>, sign: SignMatrix, mapping: MappingMatrix) -> Result<Self> {
        if magnitudes.len() != sign.rows() || sign.rows() != mapping.active() {
            return Err(Error::DimensionMismatch(format!(
                "{} magnitudes, {} sign rows, {} active resources",
                magnitudes.len(),
                sign.rows(),
                mapping.active()
            )));
        }
        if let Some((row, &value)) = magnitudes.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NegativeMagnitude { row, value });
        }
        hadamard_level(sign.cols())?;
        Ok(SymmetricProfile { magnitudes, sign, mapping })
    }

    pub fn user(&self) -> usize {
        self.mapping.user()
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn sign(&self) -> &SignMatrix {
        &self.sign
    }

    pub fn mapping(&self) -> &MappingMatrix {
        &self.mapping
    }
}

/// Expands a profile into its codebook: active row `r`, column `m` is
/// `sign[r][m] * magnitudes[r]`.
pub fn symmetric_codebook(profile: &SymmetricProfile) -> Result<Codebook> {
    let sign = &profile.sign;
    let active = Matrix::from_fn(sign.rows(), sign.cols(), |r, m| {
        f64::from(sign.get(r, m)) * profile.magnitudes[r]
    });
    Codebook::from_active(&profile.mapping, &active)
}

/// Distinct columns of a codeword difference matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSet {
    matrix: Matrix,
    tolerance: f64,
}

impl DifferenceSet {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Number of distinct columns `P`.
    pub fn len(&self) -> usize {
        self.matrix.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.cols() == 0
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn zero_index(&self) -> Option<usize> {
        (0..self.len()).find(|&c| (0..self.matrix.rows()).all(|r| self.matrix[(r, c)].abs() <= self.tolerance))
    }
}

/// Keeps the first occurrence of every column, merging columns equal within `tol`.
pub fn dedup_columns(m: &Matrix, tol: f64) -> Matrix {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for c in 0..m.cols() {
        let col = m.column(c);
        if !kept.iter().any(|k| k.iter().zip(&col).all(|(a, b)| (a - b).abs() <= tol)) {
            kept.push(col);
        }
    }
    Matrix::from_columns(m.rows(), &kept).expect("columns share the row count")
}

/// `D_i = C_i ⊖ C_i` with repeated columns merged. The zero column comes first.
pub fn difference_set(codebook: &Codebook, tolerance: f64) -> DifferenceSet {
    let diffs = column_diff_set(codebook.matrix(), codebook.matrix()).expect("same row count");
    DifferenceSet { matrix: dedup_columns(&diffs, tolerance), tolerance }
}

/// `D = D_1 ⊕ … ⊕ D_J`, enumerated lazily in lexicographic order.
#[derive(Debug, Clone)]
pub struct CombinedDifferenceSet<'a> {
    sets: &'a [DifferenceSet],
    skip: Option<u64>,
    total: u64,
}

/// Combines per-user difference sets, optionally dropping the single all-zero column
/// formed from every set's zero column.
pub fn combined_difference_set(
    sets: &[DifferenceSet],
    strip_zero: bool,
) -> Result<CombinedDifferenceSet<'_>> {
    let first = sets
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no difference sets to combine".into()))?;
    if let Some(bad) = sets.iter().find(|s| s.matrix.rows() != first.matrix.rows()) {
        return Err(Error::DimensionMismatch(format!(
            "difference sets have {} and {} rows",
            first.matrix.rows(),
            bad.matrix.rows()
        )));
    }
    let mut total: u64 = 1;
    for s in sets {
        total = total.checked_mul(s.len() as u64).ok_or(Error::CapExceeded {
            columns: u128::MAX,
            cap: u64::MAX as u128,
        })?;
    }
    let skip = if strip_zero {
        let mut idx = 0u64;
        for s in sets {
            idx = idx * s.len() as u64 + s.zero_index().ok_or(Error::NoZeroColumn)? as u64;
        }
        Some(idx)
    } else {
        None
    };
    Ok(CombinedDifferenceSet { sets, skip, total })
}

impl CombinedDifferenceSet<'_> {
    pub fn rows(&self) -> usize {
        self.sets[0].matrix.rows()
    }

    /// Column count: the product of the input counts, less one when stripped.
    pub fn len(&self) -> u64 {
        self.total - u64::from(self.skip.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-set column indices of combined column `index`.
    pub fn tuple(&self, index: u64) -> Vec<usize> {
        let mut raw = index;
        if let Some(skip) = self.skip {
            if raw >= skip {
                raw += 1;
            }
        }
        let mut tuple = vec![0; self.sets.len()];
        for (slot, s) in tuple.iter_mut().zip(self.sets).rev() {
            *slot = (raw % s.len() as u64) as usize;
            raw /= s.len() as u64;
        }
        tuple
    }

    pub fn column(&self, index: u64, out: &mut [f64]) {
        out.fill(0.0);
        for (s, c) in self.sets.iter().zip(self.tuple(index)) {
            for (r, o) in out.iter_mut().enumerate() {
                *o += s.matrix[(r, c)];
            }
        }
    }

    /// Materializes the columns, merging duplicates when `merge_tolerance` is given.
    pub fn to_difference_set(&self, merge_tolerance: Option<f64>) -> DifferenceSet {
        let rows = self.rows();
        let mut m = Matrix::zeros(rows, self.len() as usize);
        let mut col = vec![0.0; rows];
        for i in 0..self.len() {
            self.column(i, &mut col);
            for (r, v) in col.iter().enumerate() {
                m[(r, i as usize)] = *v;
            }
        }
        let tolerance = self.sets[0].tolerance;
        match merge_tolerance {
            Some(tol) => DifferenceSet { matrix: dedup_columns(&m, tol), tolerance: tol },
            None => DifferenceSet { matrix: m, tolerance },
        }
    }
}

/// Outcome of checking a codebook against the symmetric structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCheck {
    /// Every active row takes a single absolute value.
    pub two_value: bool,
    /// Signs of the nonzero rows match a Hadamard matrix up to a column permutation.
    pub sign_pattern: bool,
    /// Per-active-row absolute values (meaningful when `two_value` holds).
    pub magnitudes: Vec<f64>,
    /// Column `m` of the codebook uses Hadamard column `column_order[m]`.
    pub column_order: Option<Vec<usize>>,
    pub profile: Option<SymmetricProfile>,
    pub failures: Vec<String>,
}

impl SymmetricCheck {
    pub fn passed(&self) -> bool {
        self.two_value && self.sign_pattern
    }
}

/// Checks the two-value and Hadamard sign-pattern properties and recovers the profile.
pub fn validate_symmetric(codebook: &Codebook, tolerance: f64) -> SymmetricCheck {
    let active = codebook.active();
    let (n, m) = (active.rows(), active.cols());
    let mut failures = Vec::new();

    let magnitudes: Vec<f64> =
        (0..n).map(|r| active.row(r).iter().map(|v| v.abs()).sum::<f64>() / m as f64).collect();
    let mut two_value = true;
    for (r, &c) in magnitudes.iter().enumerate() {
        if active.row(r).iter().any(|v| (v.abs() - c).abs() > tolerance) {
            two_value = false;
            failures.push(format!(
                "resource {}: entries take more than one absolute value",
                codebook.support()[r]
            ));
        }
    }

    let mut column_order = None;
    let mut sign_pattern = false;
    match hadamard_level(m) {
        Err(_) => failures.push(format!("codebook size {m} has no Hadamard sign pattern")),
        Ok(_) if n != m => failures.push(format!(
            "{n} active resources; the Hadamard pattern for M = {m} needs {m}"
        )),
        Ok(level) if two_value => {
            let h = hadamard_sign(level);
            let nonzero: Vec<usize> = (0..n).filter(|&r| magnitudes[r] > tolerance).collect();
            let restricted_h = |c: usize| nonzero.iter().map(|&r| h.get(r, c)).collect::<Vec<_>>();
            let mut used = vec![false; m];
            let mut order = Vec::with_capacity(m);
            for col in 0..m {
                let signs: Vec<i8> =
                    nonzero.iter().map(|&r| if active[(r, col)] > 0.0 { 1 } else { -1 }).collect();
                match (0..m).find(|&c| !used[c] && restricted_h(c) == signs) {
                    Some(c) => {
                        used[c] = true;
                        order.push(c);
                    }
                    None => break,
                }
            }
            if order.len() == m {
                sign_pattern = true;
                column_order = Some(order);
            } else {
                failures.push("sign pattern is not a column permutation of the Hadamard matrix".into());
            }
        }
        Ok(_) => failures.push("sign pattern not checked: two-value property fails".into()),
    }

    let profile = column_order.as_ref().and_then(|order| {
        let sign = hadamard_sign(hadamard_level(m).ok()?).with_column_order(order).ok()?;
        SymmetricProfile::new(magnitudes.clone(), sign, codebook.mapping()).ok()
    });
    SymmetricCheck { two_value, sign_pattern, magnitudes, column_order, profile, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FactorGraph;

    fn signs(rows: &[&[i8]]) -> SignMatrix {
        let cols = rows[0].len();
        SignMatrix::new(rows.len(), cols, rows.iter().flat_map(|r| r.iter().copied()).collect())
            .unwrap()
    }

    #[test]
    fn hadamard_levels() {
        assert_eq!(hadamard_sign(0), signs(&[&[1, -1], &[1, -1]]));
        assert_eq!(
            hadamard_sign(1),
            signs(&[&[1, -1, 1, -1], &[1, -1, 1, -1], &[1, -1, -1, 1], &[1, -1, -1, 1]])
        );
        let h1 = hadamard_sign(1);
        let h2 = hadamard_sign(2);
        assert_eq!((h2.rows(), h2.cols()), (8, 8));
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(h2.get(r, c), h1.get(r, c));
                assert_eq!(h2.get(r + 4, c + 4), -h1.get(r, c));
            }
        }
        assert_eq!(hadamard_level(4), Ok(1));
        assert_eq!(hadamard_level(6), Err(Error::NotPowerOfTwo(6)));
    }

    #[test]
    fn column_reordering() {
        let h = hadamard_sign(1).with_column_order(&[0, 2, 3, 1]).unwrap();
        assert_eq!(h.column(1), vec![1, 1, -1, -1]);
        assert!(hadamard_sign(1).with_column_order(&[0, 0, 1, 2]).is_err());
    }

    fn unit_codebook(k: usize) -> Codebook {
        let mapping = MappingMatrix::new(0, k, (0..4).collect()).unwrap();
        let profile = SymmetricProfile::new(vec![1.0; 4], hadamard_sign(1), mapping).unwrap();
        symmetric_codebook(&profile).unwrap()
    }

    #[test]
    fn unit_profile_codebook() {
        let cb = unit_codebook(4);
        assert!(cb.matrix().as_slice().iter().all(|v| v.abs() == 1.0));
        let zero = SymmetricProfile::new(
            vec![0.0; 4],
            hadamard_sign(1),
            MappingMatrix::new(0, 4, (0..4).collect()).unwrap(),
        )
        .unwrap();
        let cb = symmetric_codebook(&zero).unwrap();
        assert!(cb.matrix().as_slice().iter().all(|&v| v == 0.0));
        assert!(!cb.has_distinct_codewords(0.0));
    }

    #[test]
    fn profile_rejects_bad_input() {
        let mapping = MappingMatrix::new(0, 4, (0..4).collect()).unwrap();
        assert!(matches!(
            SymmetricProfile::new(vec![1.0, -0.5, 1.0, 1.0], hadamard_sign(1), mapping.clone()),
            Err(Error::NegativeMagnitude { row: 1, .. })
        ));
        assert!(SymmetricProfile::new(vec![1.0; 3], hadamard_sign(1), mapping.clone()).is_err());
        let odd = SignMatrix::new(4, 3, vec![1; 12]).unwrap();
        assert_eq!(
            SymmetricProfile::new(vec![1.0; 4], odd, mapping),
            Err(Error::NotPowerOfTwo(3))
        );
    }

    fn columns_close(m: &Matrix, a: usize, other: &[f64], tol: f64) -> bool {
        other.iter().enumerate().all(|(r, v)| (m[(r, a)] - v).abs() <= tol)
    }

    #[test]
    fn symmetric_difference_set_is_nine_columns() {
        let d = difference_set(&unit_codebook(4), DEFAULT_MERGE_TOLERANCE);
        assert_eq!(d.len(), 9);
        assert_eq!(d.zero_index(), Some(0));
        let expected: [[f64; 9]; 4] = [
            [0.0, 2.0, -2.0, -2.0, 2.0, 2.0, -2.0, 0.0, 0.0],
            [0.0, 2.0, -2.0, -2.0, 2.0, 2.0, -2.0, 0.0, 0.0],
            [0.0, 2.0, -2.0, 2.0, -2.0, 0.0, 0.0, 2.0, -2.0],
            [0.0, 2.0, -2.0, 2.0, -2.0, 0.0, 0.0, 2.0, -2.0],
        ];
        let expected = Matrix::from_rows(&expected).unwrap();
        for c in 0..9 {
            let col = expected.column(c);
            assert!((0..9).any(|a| columns_close(d.matrix(), a, &col, 1e-12)), "missing {col:?}");
        }
    }

    #[test]
    fn generic_difference_set_is_thirteen_columns() {
        let active = Matrix::from_rows(&[[0.3, -1.1, 0.7, 2.0], [1.9, 0.2, -0.4, -1.3]]).unwrap();
        let cb = Codebook::from_active(&MappingMatrix::new(0, 3, vec![0, 2]).unwrap(), &active)
            .unwrap();
        assert_eq!(difference_set(&cb, DEFAULT_MERGE_TOLERANCE).len(), 13);
        let single = Codebook::new(0, Matrix::from_rows(&[[0.5]]).unwrap(), vec![0]).unwrap();
        assert_eq!(difference_set(&single, DEFAULT_MERGE_TOLERANCE).len(), 1);
    }

    #[test]
    fn combined_counts() {
        let sym = difference_set(&unit_codebook(4), DEFAULT_MERGE_TOLERANCE);
        let six = vec![sym.clone(); 6];
        assert_eq!(combined_difference_set(&six, true).unwrap().len(), 531_440);
        let one = combined_difference_set(core::slice::from_ref(&sym), false).unwrap();
        assert_eq!(one.to_difference_set(None), sym);
        let short = DifferenceSet { matrix: Matrix::zeros(3, 2), tolerance: 1e-9 };
        assert!(combined_difference_set(&[sym, short], false).is_err());
    }

    #[test]
    fn stripped_set_skips_only_the_zero_tuple() {
        let sym = difference_set(&unit_codebook(4), DEFAULT_MERGE_TOLERANCE);
        let pair = vec![sym.clone(), sym];
        let full = combined_difference_set(&pair, false).unwrap();
        let stripped = combined_difference_set(&pair, true).unwrap();
        assert_eq!(stripped.len() + 1, full.len());
        assert_eq!(stripped.tuple(0), vec![0, 1]);
        assert_eq!(stripped.tuple(79), vec![8, 8]);
    }

    #[test]
    fn validator_detects_flipped_sign() {
        let g = FactorGraph::canonical().doubled();
        let mapping = g.mapping_matrix(0).unwrap();
        let sign = hadamard_sign(1).with_column_order(&[0, 2, 3, 1]).unwrap();
        let profile = SymmetricProfile::new(vec![0.75, 0.0, 0.375, 0.375], sign, mapping).unwrap();
        let cb = symmetric_codebook(&profile).unwrap();
        let check = validate_symmetric(&cb, 1e-9);
        assert!(check.passed(), "{:?}", check.failures);
        assert_eq!(check.profile.as_ref(), Some(&profile));

        let mut m = cb.matrix().clone();
        m[(4, 0)] = -m[(4, 0)];
        let flipped = Codebook::new(0, m, cb.support().to_vec()).unwrap();
        let check = validate_symmetric(&flipped, 1e-9);
        assert!(check.two_value);
        assert!(!check.sign_pattern);
        assert!(check.profile.is_none());
    }

    #[test]
    fn validator_detects_two_values() {
        let mut m = unit_codebook(4).matrix().clone();
        m[(2, 1)] = -0.5;
        let cb = Codebook::new(0, m, (0..4).collect()).unwrap();
        let check = validate_symmetric(&cb, 1e-9);
        assert!(!check.two_value);
        assert!(!check.passed());
    }
}
