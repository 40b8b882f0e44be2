//! The six reference codebooks for the doubled 4x6 graph, as published (four decimals).

#![allow(clippy::approx_constant)] // printed four-decimal values, not approximations of constants

use scma_core::designer::default_sign_structure;
use scma_core::symmetric::SymmetricProfile;
use scma_core::{Codebook, FactorGraph, Matrix};

const C1: [[f64; 4]; 8] = [
    [0.7071, 0.7071, -0.7071, -0.7071],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.3536, -0.3536, 0.3536, -0.3536],
    [0.3536, -0.3536, 0.3536, -0.3536],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
];

const C2: [[f64; 4]; 8] = [
    [0.3536, 0.3536, -0.3536, -0.3536],
    [0.0, 0.0, 0.0, 0.0],
    [0.3536, 0.3536, -0.3536, -0.3536],
    [0.0, 0.0, 0.0, 0.0],
    [0.7071, -0.7071, 0.7071, -0.7071],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, -0.0, 0.0, -0.0],
    [0.0, 0.0, 0.0, 0.0],
];

const C3: [[f64; 4]; 8] = [
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.5, 0.5, -0.5, -0.5],
    [0.3536, -0.3536, 0.3536, -0.3536],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.3536, -0.3536, 0.3536, -0.3536],
];

const C4: [[f64; 4]; 8] = [
    [0.0, 0.0, 0.0, 0.0],
    [0.3536, 0.3536, -0.3536, -0.3536],
    [0.3536, 0.3536, -0.3536, -0.3536],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.5, -0.5, 0.5, -0.5],
    [0.0, 0.0, 0.0, 0.0],
];

const C5: [[f64; 4]; 8] = [
    [0.0, 0.0, 0.0, 0.0],
    [0.6036, 0.6036, -0.6036, -0.6036],
    [0.0, 0.0, 0.0, 0.0],
    [0.25, 0.25, -0.25, -0.25],
    [0.0, 0.0, 0.0, 0.0],
    [0.7071, -0.7071, 0.7071, -0.7071],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
];

const C6: [[f64; 4]; 8] = [
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.7071, 0.7071, -0.7071, -0.7071],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.25, -0.25, 0.25, -0.25],
    [0.6036, -0.6036, 0.6036, -0.6036],
];

const TABLES: [&[[f64; 4]; 8]; 6] = [&C1, &C2, &C3, &C4, &C5, &C6];

/// Sign-matrix column order of the reference codebooks, 0-based.
pub const GOLDEN_COLUMN_ORDER: [usize; 4] = [0, 2, 3, 1];

/// The doubled 4x6 graph the reference codebooks live on.
pub fn golden_graph() -> FactorGraph {
    FactorGraph::canonical().doubled()
}

pub fn golden_codebooks() -> Vec<Codebook> {
    let graph = golden_graph();
    TABLES
        .iter()
        .enumerate()
        .map(|(j, rows)| {
            let matrix = Matrix::from_rows(&rows[..]).expect("8x4 table");
            Codebook::new(j, matrix, graph.resources_of(j).to_vec()).expect("table fits the graph")
        })
        .collect()
}

/// Magnitude-and-sign form of the reference codebooks.
pub fn golden_profiles() -> Vec<SymmetricProfile> {
    let graph = golden_graph();
    let sign = default_sign_structure(4).expect("M = 4 is a power of two");
    golden_codebooks()
        .iter()
        .map(|cb| {
            let magnitudes = cb.support().iter().map(|&k| cb.value(k, 0).abs()).collect();
            let mapping = graph.mapping_matrix(cb.user()).expect("user in range");
            SymmetricProfile::new(magnitudes, sign.clone(), mapping).expect("valid profile")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use scma_core::symmetric::symmetric_codebook;

    #[test]
    fn first_column_of_c1() {
        let c1 = &golden_codebooks()[0];
        assert_eq!(c1.codeword(0), vec![0.7071, 0.0, 0.0, 0.0, 0.3536, 0.3536, 0.0, 0.0]);
    }

    #[test]
    fn supports_follow_doubled_graph() {
        let cbs = golden_codebooks();
        assert_eq!(cbs[2].support(), &[0, 3, 4, 7]);
        let g = golden_graph();
        assert!(cbs.iter().all(|cb| cb.matches_graph(&g)));
    }

    #[test]
    fn profiles_reproduce_tables() {
        for (p, cb) in golden_profiles().iter().zip(golden_codebooks()) {
            let rebuilt = symmetric_codebook(p).unwrap();
            assert!(rebuilt.matrix().max_abs_diff(cb.matrix()) == 0.0);
        }
    }
}
