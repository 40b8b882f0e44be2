//! Received power, SNR convention and DC bias.
//!
//! SNR is the average received superimposed power per real resource divided by the
//! noise variance per real resource. With independent, uniformly chosen codewords,
//! `E[(Σ_j a_j)²] = Σ_j Var(a_j) + (Σ_j E[a_j])²` per resource.

use scma_core::{Codebook, Gains};

/// Mean over resources of the expected squared superimposed signal.
pub fn average_power(codebooks: &[Codebook], gains: &Gains) -> f64 {
    let Some(first) = codebooks.first() else { return 0.0 };
    let (k, m) = (first.resources(), first.size());
    let mut total = 0.0;
    for r in 0..k {
        let mut mean_sum = 0.0;
        let mut var_sum = 0.0;
        for (j, cb) in codebooks.iter().enumerate() {
            let h = gains.get(r, j);
            let mean = (0..m).map(|c| h * cb.value(r, c)).sum::<f64>() / m as f64;
            let second = (0..m).map(|c| (h * cb.value(r, c)).powi(2)).sum::<f64>() / m as f64;
            mean_sum += mean;
            var_sum += second - mean * mean;
        }
        total += var_sum + mean_sum * mean_sum;
    }
    total / k as f64
}

/// Noise variance per real resource at the given SNR.
pub fn snr_to_noise(snr_db: f64, codebooks: &[Codebook], gains: &Gains) -> f64 {
    average_power(codebooks, gains) / 10f64.powf(snr_db / 10.0)
}

/// Scales every codebook by one common factor so the average power becomes 1.
/// Returns the scaled set and the factor.
pub fn normalize_power(codebooks: &[Codebook], gains: &Gains) -> (Vec<Codebook>, f64) {
    let p = average_power(codebooks, gains);
    let factor = if p > 0.0 { 1.0 / p.sqrt() } else { 1.0 };
    (codebooks.iter().map(|cb| cb.scaled(factor)).collect(), factor)
}

/// Offset that makes every received noiseless sample nonnegative.
pub fn dc_bias(codebooks: &[Codebook], gains: &Gains) -> f64 {
    let Some(first) = codebooks.first() else { return 0.0 };
    let (k, m) = (first.resources(), first.size());
    (0..k)
        .map(|r| {
            let low: f64 = codebooks
                .iter()
                .enumerate()
                .map(|(j, cb)| (0..m).map(|c| gains.get(r, j) * cb.value(r, c)).fold(f64::INFINITY, f64::min))
                .sum();
            -low
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use scma_core::Matrix;

    fn unit_power() -> Vec<Codebook> {
        vec![Codebook::new(0, Matrix::from_rows(&[[1.0, -1.0]]).unwrap(), vec![0]).unwrap()]
    }

    #[test]
    fn snr_examples() {
        let cbs = unit_power();
        let g = Gains::unit(1, 1);
        assert_eq!(average_power(&cbs, &g), 1.0);
        assert_eq!(snr_to_noise(0.0, &cbs, &g), 1.0);
        assert!((snr_to_noise(10.0, &cbs, &g) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mean_term_counts() {
        let cbs = vec![Codebook::new(0, Matrix::from_rows(&[[1.0, 3.0]]).unwrap(), vec![0]).unwrap()];
        assert_eq!(average_power(&cbs, &Gains::unit(1, 1)), 5.0);
        assert_eq!(dc_bias(&cbs, &Gains::unit(1, 1)), 0.0);
        assert_eq!(dc_bias(&unit_power(), &Gains::unit(1, 1)), 1.0);
    }
}
