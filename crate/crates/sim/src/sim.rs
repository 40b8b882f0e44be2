//! Monte Carlo BER simulation over a real AWGN channel.
//!
//! Every frame draws its bits and noise from its own ChaCha8 stream: the generator is
//! keyed by the master seed and the stream id is `(snr_index << 32) | frame_index`.
//! Frames are therefore independent of execution order and thread count.
//!
//! A frame carries `bits_per_frame` counted bits. When that is not a multiple of the
//! bits in one multiplexed symbol (`J log2 M`), the last symbol is topped up with
//! random padding bits that are transmitted but not counted.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use scma_core::algebra::noiseless_superposition;
use scma_core::detector::{DetectorConfig, FastPath, MapDetector, MpaDetector};
use scma_core::{Codebook, FactorGraph, Gains};
use sha2::{Digest, Sha256};

use crate::bits::{bits_per_symbol, demap, map_bits, Labeling};
use crate::power::{dc_bias, normalize_power, snr_to_noise};
use crate::stats::{wilson_interval, Z_95};
use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorKind {
    Mpa { t_max: usize, fast_path: FastPath },
    /// Exhaustive joint nearest-point detection.
    Map,
}

impl Default for DetectorKind {
    fn default() -> Self {
        DetectorKind::Mpa { t_max: 5, fast_path: FastPath::Auto }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub snr_grid_db: Vec<f64>,
    pub frames: usize,
    pub bits_per_frame: usize,
    pub seed: u64,
    /// Per-user gains; `None` means all ones.
    pub gains: Option<Gains>,
    pub normalize_power: bool,
    pub detector: DetectorKind,
    pub labeling: Labeling,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            snr_grid_db: Vec::new(),
            frames: 50,
            bits_per_frame: 1024,
            seed: 0,
            gains: None,
            normalize_power: true,
            detector: DetectorKind::default(),
            labeling: Labeling::Natural,
        }
    }
}

impl SimConfig {
    fn echo(&self) -> String {
        let detector = match self.detector {
            DetectorKind::Mpa { t_max, fast_path } => format!("mpa(t_max={t_max},fast_path={fast_path:?})"),
            DetectorKind::Map => "map".to_string(),
        };
        format!(
            "frames={} bits_per_frame={} normalize_power={} detector={} labeling={:?} gains={}",
            self.frames,
            self.bits_per_frame,
            self.normalize_power,
            detector,
            self.labeling,
            if self.gains.is_some() { "custom" } else { "unit" }
        )
    }
}

/// Parses `A:STEP:B` (inclusive) or a single value into an SNR grid.
pub fn parse_snr_grid(range: &str) -> Result<Vec<f64>> {
    let bad = || SimError::Config(format!("invalid SNR range '{range}', expected A:STEP:B"));
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [a] => Ok(vec![*a]),
        [a, step, b] if *step > 0.0 && b >= a => {
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + step * i as f64).collect())
        }
        _ => Err(bad()),
    }
}

/// Rebuilds the factor graph from codebook supports.
pub fn graph_from_codebooks(codebooks: &[Codebook]) -> Result<FactorGraph> {
    let first = codebooks.first().ok_or_else(|| SimError::Config("no codebooks".into()))?;
    let rows: Vec<Vec<u8>> = (0..first.resources())
        .map(|k| codebooks.iter().map(|cb| u8::from(cb.support().contains(&k))).collect())
        .collect();
    Ok(FactorGraph::new(&rows)?)
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn frame_rng(seed: u64, snr_index: usize, frame_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 32) | frame_index as u64);
    rng
}

/// One frame's transmitted bits (padding included), symbols and received vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub bits: Vec<u8>,
    pub symbols: Vec<Vec<usize>>,
    pub received: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameResult {
    pub bit_errors: u64,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub sigma2: f64,
    pub total_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl BerPoint {
    fn new(snr_db: f64, sigma2: f64, bit_errors: u64, total_bits: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(bit_errors, total_bits, Z_95);
        let ber = if total_bits == 0 { 0.0 } else { bit_errors as f64 / total_bits as f64 };
        BerPoint { snr_db, sigma2, total_bits, bit_errors, ber, ci_lo, ci_hi }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.5e},{:.5e},{:.5e}",
            self.snr_db, self.total_bits, self.bit_errors, self.ber, self.ci_lo, self.ci_hi
        )
    }
}

pub const CSV_HEADER: &str = "snr_db,total_bits,bit_errors,ber,ci_lo,ci_hi";

#[derive(Debug, Clone, PartialEq)]
pub struct BerReport {
    pub points: Vec<BerPoint>,
    /// Ordered key/value pairs written as `#` comment lines.
    pub metadata: Vec<(String, String)>,
}

impl BerReport {
    pub fn metadata_lines(&self) -> String {
        self.metadata.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
    }

    /// Header and data rows only.
    pub fn csv_body(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for p in &self.points {
            out.push_str(&p.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        self.metadata_lines() + &self.csv_body()
    }
}

enum Receiver {
    Mpa(MpaDetector),
    Map(MapDetector),
}

impl Receiver {
    fn detect(&self, y: &[f64]) -> Result<Vec<usize>> {
        Ok(match self {
            Receiver::Mpa(d) => d.detect(y)?.hard,
            Receiver::Map(d) => d.detect_joint(y)?.0,
        })
    }
}

/// A configured link: codebooks (power-normalized if requested), gains and graph.
pub struct Simulator {
    config: SimConfig,
    codebooks: Vec<Codebook>,
    gains: Gains,
    graph: FactorGraph,
    m: usize,
    bits_per_symbol: usize,
    symbols_per_frame: usize,
    power_factor: f64,
    codebook_hash: String,
}

impl Simulator {
    pub fn new(config: SimConfig, codebooks: &[Codebook]) -> Result<Self> {
        let graph = graph_from_codebooks(codebooks)?;
        let m = codebooks[0].size();
        if codebooks.iter().any(|cb| cb.size() != m || cb.resources() != graph.resources()) {
            return Err(SimError::Config("codebooks differ in shape".into()));
        }
        let b = bits_per_symbol(m)?;
        if config.frames == 0 || config.bits_per_frame == 0 {
            return Err(SimError::Config("frames and bits per frame must be positive".into()));
        }
        if let DetectorKind::Mpa { t_max: 0, .. } = config.detector {
            return Err(SimError::Config("MPA needs at least one iteration".into()));
        }
        let gains = config.gains.clone().unwrap_or_else(|| Gains::unit(graph.users(), graph.resources()));
        if gains.users() != graph.users() || gains.resources() != graph.resources() {
            return Err(SimError::Config("gains do not match the codebooks".into()));
        }
        let doc = crate::codebook_file::CodebookDocument::new(graph.clone(), codebooks.to_vec());
        let codebook_hash = sha256_hex(crate::codebook_file::to_string(&doc)?.as_bytes());
        let (codebooks, power_factor) = if config.normalize_power {
            normalize_power(codebooks, &gains)
        } else {
            (codebooks.to_vec(), 1.0)
        };
        let per_symbol = graph.users() * b;
        let symbols_per_frame = config.bits_per_frame.div_ceil(per_symbol);
        Ok(Simulator {
            config,
            codebooks,
            gains,
            graph,
            m,
            bits_per_symbol: b,
            symbols_per_frame,
            power_factor,
            codebook_hash,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Codebooks as transmitted (after normalization).
    pub fn codebooks(&self) -> &[Codebook] {
        &self.codebooks
    }

    pub fn gains(&self) -> &Gains {
        &self.gains
    }

    pub fn graph(&self) -> &FactorGraph {
        &self.graph
    }

    pub fn symbols_per_frame(&self) -> usize {
        self.symbols_per_frame
    }

    pub fn sigma2(&self, snr_db: f64) -> f64 {
        snr_to_noise(snr_db, &self.codebooks, &self.gains)
    }

    /// Draws frame `frame_index` of SNR point `snr_index` at noise variance `sigma2`.
    pub fn frame(&self, sigma2: f64, snr_index: usize, frame_index: usize) -> Result<Frame> {
        let mut rng = frame_rng(self.config.seed, snr_index, frame_index);
        let n_bits = self.symbols_per_frame * self.graph.users() * self.bits_per_symbol;
        let bits: Vec<u8> = (0..n_bits).map(|_| u8::from(rng.random::<bool>())).collect();
        let symbols = map_bits(&bits, self.graph.users(), self.m, self.config.labeling)?;
        let sd = sigma2.sqrt();
        let received = symbols
            .iter()
            .map(|t| {
                let mut y = noiseless_superposition(t, &self.codebooks, &self.gains)?;
                for v in &mut y {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    *v += sd * n;
                }
                Ok(y)
            })
            .collect::<Result<_>>()?;
        Ok(Frame { bits, symbols, received })
    }

    fn receiver(&self, sigma2: f64, detector: DetectorKind) -> Result<Receiver> {
        Ok(match detector {
            DetectorKind::Mpa { t_max, fast_path } => {
                let cfg = DetectorConfig { t_max, sigma2, fast_path };
                Receiver::Mpa(MpaDetector::new(&self.graph, &self.codebooks, &self.gains, cfg)?)
            }
            DetectorKind::Map => Receiver::Map(MapDetector::new(&self.codebooks, &self.gains)?),
        })
    }

    fn run_frame(&self, rx: &Receiver, sigma2: f64, snr_index: usize, frame_index: usize) -> Result<FrameResult> {
        let frame = self.frame(sigma2, snr_index, frame_index)?;
        let decided = frame.received.iter().map(|y| rx.detect(y)).collect::<Result<Vec<_>>>()?;
        let out = demap(&decided, self.m, self.config.labeling)?;
        let counted = self.config.bits_per_frame;
        let bit_errors = frame.bits[..counted].iter().zip(&out[..counted]).filter(|(a, b)| a != b).count();
        Ok(FrameResult { bit_errors: bit_errors as u64, bits: counted as u64 })
    }

    /// Simulates one frame with the configured detector.
    pub fn simulate_frame(&self, snr_index: usize, frame_index: usize) -> Result<FrameResult> {
        let snr = *self
            .config
            .snr_grid_db
            .get(snr_index)
            .ok_or_else(|| SimError::Config(format!("SNR index {snr_index} out of range")))?;
        let sigma2 = self.sigma2(snr);
        let rx = self.receiver(sigma2, self.config.detector)?;
        self.run_frame(&rx, sigma2, snr_index, frame_index)
    }

    /// Runs `frames` frames at one SNR, using `snr_index` to select random streams.
    pub fn run_point(&self, snr_db: f64, snr_index: usize, frames: usize) -> Result<BerPoint> {
        self.run_point_with(snr_db, snr_index, frames, self.config.detector)
    }

    /// As [`Simulator::run_point`] with another detector; same streams, so the
    /// comparison uses common random numbers.
    pub fn run_point_with(
        &self,
        snr_db: f64,
        snr_index: usize,
        frames: usize,
        detector: DetectorKind,
    ) -> Result<BerPoint> {
        let sigma2 = self.sigma2(snr_db);
        let rx = self.receiver(sigma2, detector)?;
        let results = (0..frames)
            .into_par_iter()
            .map(|f| self.run_frame(&rx, sigma2, snr_index, f))
            .collect::<Result<Vec<_>>>()?;
        let errors = results.iter().map(|r| r.bit_errors).sum();
        let bits = results.iter().map(|r| r.bits).sum();
        Ok(BerPoint::new(snr_db, sigma2, errors, bits))
    }

    pub fn metadata(&self) -> Vec<(String, String)> {
        let per_symbol = self.graph.users() * self.bits_per_symbol;
        let padding = self.symbols_per_frame * per_symbol - self.config.bits_per_frame;
        vec![
            ("codebook_sha256".into(), self.codebook_hash.clone()),
            ("seed".into(), self.config.seed.to_string()),
            ("config".into(), self.config.echo()),
            (
                "snr_convention".into(),
                "mean received superimposed power per real resource / noise variance per real resource".into(),
            ),
            ("power_scale".into(), format!("{:e}", self.power_factor)),
            ("dc_bias".into(), format!("{:e}", dc_bias(&self.codebooks, &self.gains))),
            (
                "frame_layout".into(),
                format!(
                    "{} counted bits in {} symbols of {per_symbol} bits ({padding} uncounted padding bits)",
                    self.config.bits_per_frame, self.symbols_per_frame
                ),
            ),
        ]
    }

    /// Runs the whole SNR grid, calling `on_point` as each point completes.
    pub fn sweep_with(&self, mut on_point: impl FnMut(&BerPoint) -> Result<()>) -> Result<BerReport> {
        let mut points = Vec::with_capacity(self.config.snr_grid_db.len());
        for (i, &snr) in self.config.snr_grid_db.iter().enumerate() {
            let p = self.run_point(snr, i, self.config.frames)?;
            on_point(&p)?;
            points.push(p);
        }
        Ok(BerReport { points, metadata: self.metadata() })
    }

    pub fn sweep(&self) -> Result<BerReport> {
        self.sweep_with(|_| Ok(()))
    }
}

/// Configures a simulator and runs its SNR grid.
pub fn ber_sweep(config: &SimConfig, codebooks: &[Codebook]) -> Result<BerReport> {
    Simulator::new(config.clone(), codebooks)?.sweep()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::golden_codebooks;

    #[test]
    fn snr_grid_parsing() {
        assert_eq!(parse_snr_grid("0:2:6").unwrap(), vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(parse_snr_grid("5").unwrap(), vec![5.0]);
        assert_eq!(parse_snr_grid("0:0.5:1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_snr_grid("0:-1:4").is_err());
        assert!(parse_snr_grid("a:b").is_err());
    }

    #[test]
    fn frame_layout_pads_last_symbol() {
        let sim = Simulator::new(SimConfig::default(), &golden_codebooks()).unwrap();
        assert_eq!(sim.symbols_per_frame(), 86);
        let f = sim.frame(0.1, 0, 0).unwrap();
        assert_eq!(f.bits.len(), 86 * 12);
        assert_eq!(f.received.len(), 86);
    }

    #[test]
    fn noiseless_limit_and_determinism() {
        let cfg = SimConfig { snr_grid_db: vec![200.0, 200.0], frames: 3, ..SimConfig::default() };
        let report = ber_sweep(&cfg, &golden_codebooks()).unwrap();
        assert!(report.points.iter().all(|p| p.bit_errors == 0 && p.total_bits == 3 * 1024));
        assert_eq!(report, ber_sweep(&cfg, &golden_codebooks()).unwrap());
    }

    #[test]
    fn streams_differ_by_index() {
        let sim = Simulator::new(SimConfig::default(), &golden_codebooks()).unwrap();
        let a = sim.frame(0.5, 0, 0).unwrap();
        assert_ne!(a.bits, sim.frame(0.5, 0, 1).unwrap().bits);
        assert_ne!(a.bits, sim.frame(0.5, 1, 0).unwrap().bits);
        assert_eq!(a, sim.frame(0.5, 0, 0).unwrap());
    }
}
