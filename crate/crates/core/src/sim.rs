//! AWGN simulation with side-information-aware maximum-likelihood decoding.
//!
//! The transmitter sends the centered representative of `Ψ(w)`. A receiver
//! knowing the levels in `S` subtracts the known translate and decodes over
//! `Λ_{S^c}` exactly, by nearest-coset search over the unknown-levels code.
//!
//! Monte Carlo runs are reproducible: every SNR point owns a ChaCha stream
//! derived from the master seed, split into fixed-size chunks that are
//! counted independently and summed in order. The same streams are reused
//! for every subset, so curves of nested subsets are compared on identical
//! messages and noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};


use crate::codes::centered;
use crate::error::{Error, Result};
use crate::index_code::{CrtIndexCode, Subset};
use crate::lattices::{CosetSearch, IntegerLattice};
use crate::scalar::Real;

const CHUNK: u64 = 1024;

/// Gaussian tail `Q(x) = P(Z > x)`.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `(1/n) · K · Q(sqrt(d² / 4σ²))`.
pub fn theoretical_ser<F: Real>(dimension: usize, kissing: u64, d_sq: u64, sigma2: F) -> F {
    let s2 = sigma2.to_f64_lossy();
    if s2 <= 0.0 {
        return F::zero();
    }
    let arg = (d_sq as f64 / (4.0 * s2)).sqrt();
    F::from_f64_lossy(kissing as f64 * gaussian_q(arg) / dimension as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseGrid<F> {
    /// Inclusive SNR grid in dB.
    SnrDb { start: F, stop: F, step: F },
    /// Explicit per-dimension noise variances.
    Sigma2(Vec<F>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig<F> {
    pub grid: NoiseGrid<F>,
    pub trials: u64,
    pub seed: u64,
    /// Side-information sets to simulate; `None` means every nonempty proper
    /// subset plus the empty set (no side information).
    pub subsets: Option<Vec<Subset>>,
}

impl<F: Real> ChannelConfig<F> {
    pub fn new(grid: NoiseGrid<F>, trials: u64, seed: u64) -> Result<Self> {
        let cfg = ChannelConfig {
            grid,
            trials,
            seed,
            subsets: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_subsets(mut self, subsets: Vec<Subset>) -> Self {
        self.subsets = Some(subsets);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        match &self.grid {
            NoiseGrid::SnrDb { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) || *step <= F::zero() || stop < start {
                    return Err(Error::InvalidArgument(format!(
                        "SNR grid {start}:{stop}:{step} is empty or malformed"
                    )));
                }
            }
            NoiseGrid::Sigma2(v) => {
                if v.is_empty() || v.iter().any(|s| !(s.is_finite() && *s > F::zero())) {
                    return Err(Error::InvalidArgument("noise variances must be positive and nonempty".into()));
                }
            }
        }
        Ok(())
    }

    /// `(snr_db, σ²)` pairs for a constellation of average per-dimension
    /// energy `energy`.
    pub fn points(&self, energy: f64) -> Vec<(F, F)> {
        match &self.grid {
            NoiseGrid::SnrDb { start, stop, step } => {
                let (start, stop, step) = (start.to_f64_lossy(), stop.to_f64_lossy(), step.to_f64_lossy());
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count)
                    .map(|i| {
                        let snr = start + i as f64 * step;
                        (F::from_f64_lossy(snr), F::from_f64_lossy(energy / 10f64.powf(snr / 10.0)))
                    })
                    .collect()
            }
            NoiseGrid::Sigma2(v) => v
                .iter()
                .map(|&s2| (F::from_f64_lossy(10.0 * (energy / s2.to_f64_lossy()).log10()), s2))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerPoint<F> {
    pub snr_db: F,
    pub sigma2: F,
    pub trials: u64,
    /// Trials whose decoded unknown-message tuple differed from the sent one.
    pub errors: u64,
    /// Per-dimension symbol error rate, `errors / (n · trials)`.
    pub ser: F,
    /// Binomial standard error of `ser`.
    pub stderr: F,
    /// `(1/n) K Q(sqrt(d² / 4σ²))` for the decoding lattice.
    pub theory: F,
}

impl<F: Real> SerPoint<F> {
    /// Fraction of trials with a wrong message tuple.
    pub fn tuple_error_rate(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerCurve<F> {
    pub subset: Subset,
    pub dimension: usize,
    pub d_sq: u64,
    pub kissing: u64,
    pub points: Vec<SerPoint<F>>,
}

impl<F: Real> SerCurve<F> {
    /// SNR (dB) at which the curve crosses `level`, interpolating `log10(ser)`
    /// linearly between the bracketing grid points.
    pub fn snr_at(&self, level: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|p| (p.snr_db.to_f64_lossy(), p.ser.to_f64_lossy()))
            .collect();
        for w in pts.windows(2) {
            let ((s0, e0), (s1, e1)) = (w[0], w[1]);
            if e0 >= level && e1 <= level && e1 > 0.0 {
                let (l0, l1, lt) = (e0.log10(), e1.log10(), level.log10());
                if (l0 - l1).abs() < f64::EPSILON {
                    return Some(s0);
                }
                return Some(s0 + (s1 - s0) * (l0 - lt) / (l0 - l1));
            }
        }
        None
    }
}

/// Exact decoder for receivers with side information `known`.
#[derive(Debug, Clone)]
pub struct SubsetDecoder {
    known: Subset,
    search: CosetSearch,
    lattice: IntegerLattice,
}

impl SubsetDecoder {
    pub fn new(idx: &CrtIndexCode, known: Subset) -> Result<Self> {
        let r = idx.num_levels();
        if !known.is_subset_of(Subset::full(r)) || known == Subset::full(r) {
            return Err(Error::InvalidSubset(format!(
                "cannot decode with side information {known} over {r} levels"
            )));
        }
        let code = idx.unknown_levels_code(known)?;
        let book = code.enumerate(idx.limits())?;
        let flat: Vec<i64> = book.words().iter().flatten().copied().collect();
        let lattice = IntegerLattice::construction_a(&code, idx.limits())?;
        Ok(SubsetDecoder {
            known,
            search: CosetSearch::new(flat, idx.length(), idx.modulus()),
            lattice,
        })
    }

    pub fn known(&self) -> Subset {
        self.known
    }

    /// `Λ_{S^c}` (or `Λ` itself without side information).
    pub fn lattice(&self) -> &IntegerLattice {
        &self.lattice
    }

    /// Number of candidate points per decision.
    pub fn size(&self) -> usize {
        self.search.len()
    }

    /// Nearest codeword of `C` to `received` among those consistent with
    /// `translate` (the encoding of the known levels).
    fn decide<F: Real>(&self, received: &[F], translate: &[i64], modulus: i64, scratch: &mut Vec<F>) -> Vec<i64> {
        scratch.clear();
        scratch.extend(received.iter().zip(translate).map(|(&y, &t)| y - F::of_int(t)));
        let (i, _) = self.search.nearest_index(scratch.as_slice());
        self.search
            .representative(i)
            .iter()
            .zip(translate)
            .map(|(&z, &t)| (z + t) % modulus)
            .collect()
    }
}

/// Centered representative of `Ψ(w)` as a real vector.
pub fn transmit_point<F: Real>(idx: &CrtIndexCode, messages: &[Vec<i64>]) -> Result<Vec<F>> {
    let x = idx.encode(messages)?;
    Ok(centered(&x, idx.modulus()).into_iter().map(F::of_int).collect())
}

/// Maximum-likelihood decision given side information: the nearest point of
/// `t + Λ_{S^c}`, mapped back to level messages. Levels in `known` are
/// copied from `known_messages`.
pub fn ml_decode<F: Real>(
    idx: &CrtIndexCode,
    received: &[F],
    known: Subset,
    known_messages: &[Vec<i64>],
) -> Result<Vec<Vec<i64>>> {
    let decoder = SubsetDecoder::new(idx, known)?;
    ml_decode_with(idx, &decoder, received, known_messages)
}

pub fn ml_decode_with<F: Real>(
    idx: &CrtIndexCode,
    decoder: &SubsetDecoder,
    received: &[F],
    known_messages: &[Vec<i64>],
) -> Result<Vec<Vec<i64>>> {
    if received.len() != idx.length() {
        return Err(Error::LengthMismatch {
            expected: idx.length(),
            found: received.len(),
        });
    }
    let known = decoder.known();
    if !known.is_empty() && known_messages.len() != idx.num_levels() {
        return Err(Error::LengthMismatch {
            expected: idx.num_levels(),
            found: known_messages.len(),
        });
    }
    let translate = if known.is_empty() {
        vec![0; idx.length()]
    } else {
        for j in known.levels() {
            if !idx.levels()[j].contains(&known_messages[j], idx.limits())? {
                return Err(Error::NotACodeword { level: j + 1 });
            }
        }
        idx.encode_unchecked(known_messages, known)
    };
    let mut scratch = Vec::with_capacity(idx.length());
    let decided = decoder.decide(received, &translate, idx.modulus(), &mut scratch);
    idx.decode_exact(&decided)
}

/// Average per-dimension energy of the centered constellation.
pub fn average_energy(idx: &CrtIndexCode) -> Result<f64> {
    let q = idx.modulus();
    let book = idx.combined_code().enumerate(idx.limits())?;
    let total: f64 = book
        .words()
        .iter()
        .map(|w| crate::codes::centered_norm(w, q) as f64)
        .sum();
    Ok(total / (book.len() as f64 * idx.length() as f64))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn point_rng(seed: u64, point: usize, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(point as u64)));
    rng.set_stream(chunk);
    rng
}

fn count_errors<F: Real>(
    idx: &CrtIndexCode,
    decoder: &SubsetDecoder,
    sigma: F,
    trials: u64,
    seed: u64,
    point: usize,
) -> u64
where
    StandardNormal: Distribution<F>,
{
    let q = idx.modulus();
    let n = idx.length();
    let full = Subset::full(idx.num_levels());
    let known = decoder.known();
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = point_rng(seed, point, chunk);
            let in_chunk = CHUNK.min(trials - chunk * CHUNK);
            let mut received = vec![F::zero(); n];
            let mut scratch = Vec::with_capacity(n);
            let mut errors = 0u64;
            for _ in 0..in_chunk {
                let msgs = idx.random_messages(&mut rng);
                let x = idx.encode_unchecked(&msgs, full);
                for (y, &xi) in received.iter_mut().zip(&x) {
                    let z: F = rng.sample(StandardNormal);
                    *y = F::of_int(crate::ring_arith::centered_residue(xi, q)) + sigma * z;
                }
                let translate = idx.encode_unchecked(&msgs, known);
                if decoder.decide(&received, &translate, q, &mut scratch) != x {
                    errors += 1;
                }
            }
            errors
        })
        .sum()
}

/// Monte Carlo symbol error rates for every configured side-information set.
pub fn monte_carlo<F: Real>(idx: &CrtIndexCode, cfg: &ChannelConfig<F>) -> Result<Vec<SerCurve<F>>>
where
    StandardNormal: Distribution<F>,
{
    cfg.validate()?;
    let subsets = cfg.subsets.clone().unwrap_or_else(|| {
        let mut all = Subset::proper_nonempty(idx.num_levels());
        all.push(Subset::EMPTY);
        all
    });
    let energy = average_energy(idx)?;
    let grid = cfg.points(energy);
    let n = idx.length();
    let nf = F::of_int(n as i64);
    let mut curves = Vec::with_capacity(subsets.len());
    for known in subsets {
        let decoder = SubsetDecoder::new(idx, known)?;
        let d_sq = decoder.lattice().min_distance_sq(idx.limits())?;
        let kissing = decoder.lattice().kissing_number(idx.limits())?;
        let points = grid
            .iter()
            .enumerate()
            .map(|(p, &(snr_db, sigma2))| {
                let errors = count_errors(idx, &decoder, sigma2.sqrt(), cfg.trials, cfg.seed, p);
                let tuple_rate = errors as f64 / cfg.trials as f64;
                let stderr = (tuple_rate * (1.0 - tuple_rate) / cfg.trials as f64).sqrt() / n as f64;
                SerPoint {
                    snr_db,
                    sigma2,
                    trials: cfg.trials,
                    errors,
                    ser: F::from_f64_lossy(tuple_rate) / nf,
                    stderr: F::from_f64_lossy(stderr),
                    theory: theoretical_ser(n, kissing, d_sq, sigma2),
                }
            })
            .collect();
        curves.push(SerCurve {
            subset: known,
            dimension: n,
            d_sq,
            kissing,
            points,
        });
    }
    Ok(curves)
}
