use proptest::prelude::*;
use scma_core::designer::med;
use scma_core::Gains;
use scma_sim::bits::{demap, map_bits, Labeling};
use scma_sim::golden::golden_codebooks;
use scma_sim::power::{average_power, normalize_power};
use scma_sim::sim::{ber_sweep, SimConfig};

/// Squared MED of the reference tables, from an exact rational evaluation of the
/// four-decimal entries.
const GOLDEN_MED_SQ: f64 = 0.999_698;

#[test]
fn golden_med_regression() {
    let d = med(&golden_codebooks()).unwrap();
    assert!((d * d - GOLDEN_MED_SQ).abs() < 1e-12, "{}", d * d);
}

#[test]
fn golden_average_power_matches_tuple_enumeration() {
    let cbs = golden_codebooks();
    let mut total = 0.0;
    for i in 0..4096usize {
        for k in 0..8 {
            let s: f64 = (0..6).map(|j| cbs[j].value(k, (i >> (2 * j)) & 3)).sum();
            total += s * s;
        }
    }
    let brute = total / 4096.0 / 8.0;
    let p = average_power(&cbs, &Gains::unit(6, 8));
    assert!((p - brute).abs() < 1e-12, "{p} vs {brute}");
    assert!((p - 0.544_236_405).abs() < 1e-12);
    let (scaled, _) = normalize_power(&cbs, &Gains::unit(6, 8));
    assert!((average_power(&scaled, &Gains::unit(6, 8)) - 1.0).abs() < 1e-12);
}

#[test]
fn default_point_counts_51200_bits() {
    let cfg = SimConfig { snr_grid_db: vec![200.0], ..SimConfig::default() };
    let r = ber_sweep(&cfg, &golden_codebooks()).unwrap();
    assert_eq!(r.points[0].total_bits, 51_200);
    assert_eq!(r.points[0].bit_errors, 0);
}

#[test]
fn ber_does_not_rise_with_snr() {
    let cfg = SimConfig { snr_grid_db: vec![0.0, 6.0, 12.0, 18.0], frames: 20, seed: 9, ..SimConfig::default() };
    let r = ber_sweep(&cfg, &golden_codebooks()).unwrap();
    for w in r.points.windows(2) {
        assert!(w[1].ci_lo <= w[0].ci_hi, "{:?}", w);
    }
}

proptest! {
    #[test]
    fn demap_inverts_map(
        bits in prop::collection::vec(0u8..=1, 0..20).prop_map(|v| v.repeat(12)),
        gray in any::<bool>(),
    ) {
        let labeling = if gray { Labeling::Gray } else { Labeling::Natural };
        let syms = map_bits(&bits, 6, 4, labeling).unwrap();
        prop_assert_eq!(demap(&syms, 4, labeling).unwrap(), bits);
    }
}
