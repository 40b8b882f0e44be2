use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{superimpose, tuple_from_index};
use crate::codebook::check_set;
use crate::math::exp;
use crate::{Codebook, Error, Gains, Matrix, Result};

/// Largest constellation the MAP detector will enumerate.
pub const MAP_COLUMN_CAP: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MapDecision {
    /// Codeword tuple of the nearest superimposed point.
    pub joint: Vec<usize>,
    /// Another point was exactly as near; the lowest tuple index was taken.
    pub joint_tie: bool,
    /// Exact per-user posterior marginals under a uniform prior.
    pub marginals: Vec<Vec<f64>>,
}

/// Exhaustive detector over the precomputed superimposed constellation (gains applied).
#[derive(Debug, Clone)]
pub struct MapDetector {
    k: usize,
    m: usize,
    users: usize,
    /// Column-major constellation, `K` values per point.
    points: Vec<f64>,
}

impl MapDetector {
    pub fn new(codebooks: &[Codebook], gains: &Gains) -> Result<Self> {
        let (k, m) = check_set(codebooks)?;
        gains.check(codebooks.len(), k)?;
        let gained: Vec<Codebook> = codebooks
            .iter()
            .enumerate()
            .map(|(j, cb)| {
                let mat = Matrix::from_fn(k, m, |r, c| gains.get(r, j) * cb.value(r, c));
                Codebook::new(cb.user(), mat, cb.support().to_vec())
            })
            .collect::<Result<_>>()?;
        let s = superimpose(&gained, MAP_COLUMN_CAP)?;
        let mut points = vec![0.0; s.cols() * k];
        for c in 0..s.cols() {
            s.column_into(c, &mut points[c * k..(c + 1) * k]);
        }
        Ok(MapDetector { k, m, users: codebooks.len(), points })
    }

    pub fn points(&self) -> usize {
        self.points.len() / self.k
    }

    fn distances(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "received vector has {} entries, expected {}",
                y.len(),
                self.k
            )));
        }
        Ok(self
            .points
            .chunks_exact(self.k)
            .map(|p| p.iter().zip(y).map(|(a, b)| (b - a) * (b - a)).sum())
            .collect())
    }

    fn nearest(d: &[f64]) -> (usize, bool) {
        let mut best = 0;
        for (i, &v) in d.iter().enumerate() {
            if v < d[best] {
                best = i;
            }
        }
        let tie = d.iter().enumerate().any(|(i, &v)| i != best && v == d[best]);
        (best, tie)
    }

    /// Nearest superimposed point only.
    pub fn detect_joint(&self, y: &[f64]) -> Result<(Vec<usize>, bool)> {
        let d = self.distances(y)?;
        let (best, tie) = Self::nearest(&d);
        let mut tuple = vec![0; self.users];
        tuple_from_index(best as u64, &vec![self.m; self.users], &mut tuple);
        Ok((tuple, tie))
    }

    pub fn detect(&self, y: &[f64], sigma2: f64) -> Result<MapDecision> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidNoiseVariance(sigma2));
        }
        let d = self.distances(y)?;
        let (best, tie) = Self::nearest(&d);
        let sizes = vec![self.m; self.users];
        let mut joint = vec![0; self.users];
        tuple_from_index(best as u64, &sizes, &mut joint);

        let dmin = d[best];
        let inv = 1.0 / (2.0 * sigma2);
        let mut marginals = vec![vec![0.0; self.m]; self.users];
        let mut tuple = vec![0; self.users];
        for (i, &di) in d.iter().enumerate() {
            let w = exp(-(di - dmin) * inv);
            tuple_from_index(i as u64, &sizes, &mut tuple);
            for (j, &t) in tuple.iter().enumerate() {
                marginals[j][t] += w;
            }
        }
        for p in &mut marginals {
            let s: f64 = p.iter().sum();
            for v in p.iter_mut() {
                *v /= s;
            }
        }
        Ok(MapDecision { joint, joint_tie: tie, marginals })
    }
}

/// One-shot exhaustive detection.
pub fn map_detect(y: &[f64], codebooks: &[Codebook], gains: &Gains, sigma2: f64) -> Result<MapDecision> {
    MapDetector::new(codebooks, gains)?.detect(y, sigma2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> Vec<Codebook> {
        let a = Codebook::new(0, Matrix::from_rows(&[[0.0, 2.0]]).unwrap(), vec![0]).unwrap();
        let b = Codebook::new(1, Matrix::from_rows(&[[0.0, 0.5]]).unwrap(), vec![0]).unwrap();
        vec![a, b]
    }

    #[test]
    fn noiseless_point_recovered() {
        let cbs = pair();
        let det = MapDetector::new(&cbs, &Gains::unit(2, 1)).unwrap();
        for (t, y) in [([0, 0], 0.0), ([0, 1], 0.5), ([1, 0], 2.0), ([1, 1], 2.5)] {
            let d = det.detect(&[y], 0.1).unwrap();
            assert_eq!(d.joint, t);
            assert!(!d.joint_tie);
        }
    }

    #[test]
    fn equidistant_tie_breaks_low() {
        let cbs = pair();
        let (t, tie) = MapDetector::new(&cbs, &Gains::unit(2, 1)).unwrap().detect_joint(&[1.2]).unwrap();
        assert_eq!(t, vec![0, 1]);
        assert!(!tie);
        let (t, tie) = MapDetector::new(&cbs, &Gains::unit(2, 1)).unwrap().detect_joint(&[0.25]).unwrap();
        assert_eq!(t, vec![0, 0]);
        assert!(tie);
    }

    #[test]
    fn marginals_normalized() {
        let d = map_detect(&[0.9], &pair(), &Gains::unit(2, 1), 0.5).unwrap();
        for p in &d.marginals {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(map_detect(&[0.9], &pair(), &Gains::unit(2, 1), 0.0).is_err());
    }
}
