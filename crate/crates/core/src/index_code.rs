//! CRT lattice index codes.
//!
//! Level codes `C_j ⊂ Z_{p_j}^n` are combined by `Ψ(w_1, …, w_r) = Σ e_j w_j mod q`
//! where `e_j` are the CRT idempotents of `Z_q`. A receiver that knows the
//! messages of the levels in `S` decodes over a translate of `Λ_{S^c}`, the
//! Construction A lattice of the combined code with the known levels zeroed.
//! Its minimum distance `d_S` against `d_0 = d_min(Λ)` gives the
//! side-information gain
//!
//! ```text
//! Γ(C, S) = 10 log10(d_S² / d_0²) / R_S   dB/bit/dim,   R_S = (1/n) Σ_{j∈S} k_j log2 p_j.
//! ```

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::codes::{reduce_mod, LinearCode};
use crate::error::{Error, Result};
use crate::lattices::IntegerLattice;
use crate::limits::Limits;
use crate::ring_arith::{mul_mod, CrtBasis, PrimeSet};

/// Two uniformity verdicts closer than this (in dB/bit/dim) count as equal.
pub const UNIFORM_TOLERANCE_DB: f64 = 1e-9;

/// `20 log10 2`, the gain unit of the closed-form bounds.
pub fn twenty_log10_2() -> f64 {
    20.0 * 2f64.log10()
}

/// A set of levels, stored as a bitmask over 0-based level indices.
///
/// Displayed and serialized with 1-based indices, e.g. `{1,3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_mask(mask: u32) -> Self {
        Subset(mask)
    }

    /// Builds a subset from 1-based level indices.
    pub fn from_levels(levels: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &l in levels {
            if l == 0 || l > 32 {
                return Err(Error::InvalidSubset(format!("level index {l} out of range")));
            }
            mask |= 1 << (l - 1);
        }
        Ok(Subset(mask))
    }

    pub fn full(levels: usize) -> Self {
        Subset(((1u64 << levels) - 1) as u32)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn contains(self, level: usize) -> bool {
        self.0 >> level & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn complement(self, levels: usize) -> Self {
        Subset(!self.0 & Self::full(levels).0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// 0-based level indices in increasing order.
    pub fn levels(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&l| self.contains(l))
    }

    /// 1-based level indices.
    pub fn one_based(self) -> Vec<usize> {
        self.levels().map(|l| l + 1).collect()
    }

    /// All nonempty proper subsets of `levels` levels, ordered by size and
    /// then lexicographically (`{1},{2},{3},{1,2},{1,3},{2,3}`).
    pub fn proper_nonempty(levels: usize) -> Vec<Subset> {
        if levels < 2 {
            return Vec::new();
        }
        let full = Self::full(levels).0;
        let mut all: Vec<Subset> = (1..full).map(Subset).collect();
        all.sort_by_key(|s| (s.len(), s.one_based()));
        all
    }

    /// All nonempty subsets (including the full set), same ordering.
    pub fn nonempty(levels: usize) -> Vec<Subset> {
        let full = Self::full(levels).0;
        let mut all: Vec<Subset> = (1..=full).map(Subset).collect();
        all.sort_by_key(|s| (s.len(), s.one_based()));
        all
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let levels = Vec::<usize>::deserialize(d)?;
        Subset::from_levels(&levels).map_err(serde::de::Error::custom)
    }
}

/// A CRT lattice index code.
#[derive(Debug, Clone)]
pub struct CrtIndexCode {
    primes: PrimeSet,
    crt: CrtBasis,
    length: usize,
    levels: Vec<LinearCode>,
    level_bases: Vec<Vec<Vec<i64>>>,
    ranks: Vec<usize>,
    combined: LinearCode,
    lattice: IntegerLattice,
    d0_sq: u64,
    limits: Limits,
}

impl CrtIndexCode {
    pub fn new(primes: PrimeSet, levels: Vec<LinearCode>) -> Result<Self> {
        Self::with_limits(primes, levels, Limits::default())
    }

    pub fn with_limits(primes: PrimeSet, levels: Vec<LinearCode>, limits: Limits) -> Result<Self> {
        if levels.len() != primes.len() {
            return Err(Error::LengthMismatch {
                expected: primes.len(),
                found: levels.len(),
            });
        }
        let length = levels[0].length();
        for (j, (code, &p)) in levels.iter().zip(primes.primes()).enumerate() {
            if code.length() != length {
                return Err(Error::LengthMismatch {
                    expected: length,
                    found: code.length(),
                });
            }
            if code.modulus() != p {
                return Err(Error::InvalidArgument(format!(
                    "level {} code is over Z_{}, expected Z_{p}",
                    j + 1,
                    code.modulus()
                )));
            }
        }
        let crt = CrtBasis::new(&primes)?;
        let level_bases = levels
            .iter()
            .map(LinearCode::echelon_basis)
            .collect::<Result<Vec<_>>>()?;
        let ranks: Vec<usize> = level_bases.iter().map(Vec::len).collect();
        let combined = zeroed_code(&primes, &crt, &level_bases, length, Subset::EMPTY)?;
        let lattice = IntegerLattice::construction_a(&combined, &limits)?;

        let q = primes.modulus() as u128;
        let expected_size: u128 = primes
            .primes()
            .iter()
            .zip(&ranks)
            .map(|(&p, &k)| (p as u128).pow(k as u32))
            .product();
        let size_from_volume = q.pow(length as u32) / lattice.volume();
        if size_from_volume != expected_size {
            return Err(Error::Inconsistent(format!(
                "|C| = {size_from_volume} from the lattice volume, expected Π p_j^k_j = {expected_size}"
            )));
        }
        let d0_sq = lattice.min_distance_sq(&limits)?;
        Ok(CrtIndexCode {
            primes,
            crt,
            length,
            levels,
            level_bases,
            ranks,
            combined,
            lattice,
            d0_sq,
            limits,
        })
    }

    pub fn primes(&self) -> &PrimeSet {
        &self.primes
    }

    pub fn crt(&self) -> &CrtBasis {
        &self.crt
    }

    pub fn modulus(&self) -> i64 {
        self.primes.modulus()
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[LinearCode] {
        &self.levels
    }

    /// Reduced echelon basis of level `j` (its `k_j` information rows).
    pub fn level_basis(&self, level: usize) -> &[Vec<i64>] {
        &self.level_bases[level]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `rank(C) = max k_j`.
    pub fn rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    /// Common rank when all levels agree.
    pub fn common_rank(&self) -> Option<usize> {
        let k = self.ranks[0];
        self.ranks.iter().all(|&r| r == k).then_some(k)
    }

    pub fn combined_code(&self) -> &LinearCode {
        &self.combined
    }

    pub fn lattice(&self) -> &IntegerLattice {
        &self.lattice
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    /// `d_0² = d_min(Λ)²`.
    pub fn d0_sq(&self) -> u64 {
        self.d0_sq
    }

    /// `|C| = Π p_j^{k_j}`.
    pub fn cardinality(&self) -> u128 {
        self.primes
            .primes()
            .iter()
            .zip(&self.ranks)
            .map(|(&p, &k)| (p as u128).pow(k as u32))
            .product()
    }

    /// Level codeword `u · G_j mod p_j` for an information tuple of length `k_j`.
    pub fn message_from_info(&self, level: usize, info: &[i64]) -> Result<Vec<i64>> {
        let basis = &self.level_bases[level];
        if info.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                found: info.len(),
            });
        }
        let p = self.primes.primes()[level];
        let mut w = vec![0i64; self.length];
        for (&u, row) in info.iter().zip(basis) {
            for (x, &g) in w.iter_mut().zip(row) {
                *x = (*x + mul_mod(u, g, p)) % p;
            }
        }
        Ok(w)
    }

    /// Uniformly random message tuple.
    pub fn random_messages<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<i64>> {
        (0..self.num_levels())
            .map(|j| {
                let p = self.primes.primes()[j];
                let info: Vec<i64> = (0..self.ranks[j]).map(|_| rng.gen_range(0..p)).collect();
                self.message_from_info(j, &info).expect("info length matches rank")
            })
            .collect()
    }

    fn check_level_word(&self, level: usize, w: &[i64]) -> Result<()> {
        if w.len() != self.length {
            return Err(Error::LengthMismatch {
                expected: self.length,
                found: w.len(),
            });
        }
        if !self.levels[level].contains(w, &self.limits)? {
            return Err(Error::NotACodeword { level: level + 1 });
        }
        Ok(())
    }

    /// `Ψ(w) = Σ e_j σ(w_j) mod q`.
    pub fn encode(&self, messages: &[Vec<i64>]) -> Result<Vec<i64>> {
        if messages.len() != self.num_levels() {
            return Err(Error::LengthMismatch {
                expected: self.num_levels(),
                found: messages.len(),
            });
        }
        for (j, w) in messages.iter().enumerate() {
            self.check_level_word(j, w)?;
        }
        Ok(self.encode_unchecked(messages, Subset::full(self.num_levels())))
    }

    /// `Σ_{j∈levels} e_j σ(w_j) mod q`, no membership checks.
    pub(crate) fn encode_unchecked(&self, messages: &[Vec<i64>], levels: Subset) -> Vec<i64> {
        let q = self.modulus();
        let mut x = vec![0i64; self.length];
        for j in levels.levels().take_while(|&j| j < self.num_levels()) {
            let e = self.crt.idempotent(j);
            for (xi, &wi) in x.iter_mut().zip(&messages[j]) {
                *xi = (*xi + mul_mod(e, wi, q)) % q;
            }
        }
        x
    }

    /// Inverse of [`encode`](Self::encode): `w_j = x mod p_j`.
    pub fn decode_exact(&self, codeword: &[i64]) -> Result<Vec<Vec<i64>>> {
        if codeword.len() != self.length {
            return Err(Error::LengthMismatch {
                expected: self.length,
                found: codeword.len(),
            });
        }
        self.primes
            .primes()
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                let w = reduce_mod(codeword, p);
                self.check_level_word(j, &w)?;
                Ok(w)
            })
            .collect()
    }

    fn check_proper(&self, known: Subset) -> Result<()> {
        let r = self.num_levels();
        if known.is_empty() {
            return Err(Error::InvalidSubset("side information set is empty".into()));
        }
        if !known.is_subset_of(Subset::full(r)) {
            return Err(Error::InvalidSubset(format!("{known} names a level beyond {r}")));
        }
        if known == Subset::full(r) {
            return Err(Error::InvalidSubset("every level is already known".into()));
        }
        Ok(())
    }

    /// The combined code with the known levels zeroed: generators
    /// `e_j G_j` for `j ∉ known`. Its Construction A lattice is `Λ_{S^c}`.
    pub fn unknown_levels_code(&self, known: Subset) -> Result<LinearCode> {
        zeroed_code(&self.primes, &self.crt, &self.level_bases, self.length, known)
    }

    /// `Λ_{S^c}`: the lattice a receiver knowing the levels in `known` decodes over.
    pub fn sublattice_known(&self, known: Subset) -> Result<IntegerLattice> {
        self.check_proper(known)?;
        IntegerLattice::construction_a(&self.unknown_levels_code(known)?, &self.limits)
    }

    /// The subcode `C_S`: the translate `t + Λ_{S^c}` reduced mod `qZ^n`,
    /// where `t = Σ_{j∈S} e_j σ(v_j)`.
    ///
    /// `known_messages` holds one entry per level; entries outside `known` are
    /// ignored.
    pub fn subcode(&self, known: Subset, known_messages: &[Vec<i64>]) -> Result<Subcode> {
        self.check_proper(known)?;
        if known_messages.len() != self.num_levels() {
            return Err(Error::LengthMismatch {
                expected: self.num_levels(),
                found: known_messages.len(),
            });
        }
        for j in known.levels() {
            self.check_level_word(j, &known_messages[j])?;
        }
        let translate = self.encode_unchecked(known_messages, known);
        let unknown = self.unknown_levels_code(known)?;
        let q = self.modulus();
        let mut points: Vec<Vec<i64>> = unknown
            .enumerate(&self.limits)?
            .words()
            .iter()
            .map(|z| z.iter().zip(&translate).map(|(a, b)| (a + b) % q).collect())
            .collect();
        points.sort_unstable();
        Ok(Subcode {
            known,
            translate,
            points,
            modulus: q,
        })
    }

    /// `R_S = (1/n) Σ_{j∈S} k_j log2 p_j`.
    pub fn side_information_rate(&self, known: Subset) -> f64 {
        known
            .levels()
            .map(|j| self.level_rate(j))
            .sum()
    }

    /// `R_j = (k_j / n) log2 p_j`.
    pub fn level_rate(&self, level: usize) -> f64 {
        self.ranks[level] as f64 * (self.primes.primes()[level] as f64).log2() / self.length as f64
    }

    /// `(n/k) · 20 log10 2`, available when every level has the same rank `k >= 1`.
    pub fn gain_upper_bound(&self) -> Result<f64> {
        match self.common_rank() {
            Some(k) if k >= 1 => Ok(self.length as f64 / k as f64 * twenty_log10_2()),
            Some(_) => Err(Error::NotApplicable("all level codes are zero".into())),
            None => Err(Error::NotApplicable(format!(
                "level ranks {:?} are not all equal",
                self.ranks
            ))),
        }
    }

    pub fn gain_report(&self) -> Result<GainReport> {
        let r = self.num_levels();
        let mut rows = Vec::new();
        for known in Subset::proper_nonempty(r) {
            let sub = self.sublattice_known(known)?;
            let d_sq = sub.min_distance_sq(&self.limits)?;
            let rate = self.side_information_rate(known);
            let gain = (rate > 0.0).then(|| 10.0 * (d_sq as f64 / self.d0_sq as f64).log10() / rate);
            rows.push(SubsetGain {
                subset: known,
                distance_sq: d_sq,
                distance: surd(d_sq),
                distance_value: (d_sq as f64).sqrt(),
                rate,
                gain_db: gain,
            });
        }
        let gains: Vec<f64> = rows.iter().filter_map(|row| row.gain_db).collect();
        let overall = if gains.len() == rows.len() && !gains.is_empty() {
            gains.iter().copied().reduce(f64::min)
        } else {
            None
        };
        let uniform = overall.is_some_and(|min| {
            gains.iter().all(|g| (g - min).abs() <= UNIFORM_TOLERANCE_DB)
        });
        let level_rates: Vec<f64> = (0..r).map(|j| self.level_rate(j)).collect();
        Ok(GainReport {
            primes: self.primes.primes().to_vec(),
            length: self.length,
            ranks: self.ranks.clone(),
            d0_sq: self.d0_sq,
            d0: surd(self.d0_sq),
            total_rate: level_rates.iter().sum(),
            level_rates,
            rows,
            overall_gain_db: overall,
            uniform,
            gain_bound_db: if r >= 2 { self.gain_upper_bound().ok() } else { None },
        })
    }

    /// Checks `vol(Λ_{S^c}) = Π_{j∈S} p_j^{k_j} vol(Λ)` and
    /// `d_0² <= d_S² <= (Π_{j∈S} p_j)² d_0²` for every nonempty proper `S`.
    pub fn verify_volume_distance(&self) -> Result<VolumeDistanceReport> {
        let base_volume = self.lattice.volume();
        let mut rows = Vec::new();
        for known in Subset::proper_nonempty(self.num_levels()) {
            let sub = self.sublattice_known(known)?;
            let d_sq = sub.min_distance_sq(&self.limits)?;
            let expected_ratio: u128 = known
                .levels()
                .map(|j| (self.primes.primes()[j] as u128).pow(self.ranks[j] as u32))
                .product();
            let prime_product: u128 = known.levels().map(|j| self.primes.primes()[j] as u128).product();
            let volume = sub.volume();
            let volume_ok = volume == expected_ratio * base_volume;
            let upper = prime_product * prime_product * self.d0_sq as u128;
            let distance_ok = self.d0_sq <= d_sq && (d_sq as u128) <= upper;
            rows.push(VolumeDistanceRow {
                subset: known,
                volume,
                expected_volume: expected_ratio * base_volume,
                d_sq,
                lower_sq: self.d0_sq,
                upper_sq: upper,
                volume_ok,
                distance_ok,
            });
        }
        Ok(VolumeDistanceReport {
            passed: rows.iter().all(|r| r.volume_ok && r.distance_ok),
            rows,
        })
    }

    /// Round-trip and injectivity of `Ψ` on `C_1 × … × C_r`: exhaustive when
    /// `|C|` is at most the configured limit, otherwise `samples` random tuples.
    pub fn check_bijectivity(&self, samples: usize, seed: u64) -> Result<BijectivityReport> {
        let total = self.cardinality();
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut mismatches = 0u64;
        let mut checked = 0u64;
        let mut draws = 0u64;
        let mut check = |msgs: Vec<Vec<i64>>, seen: &mut HashSet<Vec<i64>>| -> Result<bool> {
            let x = self.encode(&msgs)?;
            checked += 1;
            let back = self.decode_exact(&x);
            let fresh = seen.insert(x);
            Ok(back.is_ok_and(|b| b == msgs) && fresh)
        };
        let exhaustive = total <= self.limits.exhaustive_check_max as u128;
        if exhaustive {
            let info_lens: Vec<usize> = self.ranks.clone();
            let dims: Vec<i64> = info_lens
                .iter()
                .zip(self.primes.primes())
                .flat_map(|(&k, &p)| std::iter::repeat_n(p, k))
                .collect();
            let mut digits = vec![0i64; dims.len()];
            loop {
                let mut offset = 0;
                let msgs: Vec<Vec<i64>> = info_lens
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| {
                        let w = self.message_from_info(j, &digits[offset..offset + k]);
                        offset += k;
                        w
                    })
                    .collect::<Result<_>>()?;
                if !check(msgs, &mut seen)? {
                    mismatches += 1;
                }
                let mut i = 0;
                while i < digits.len() {
                    digits[i] += 1;
                    if digits[i] < dims[i] {
                        break;
                    }
                    digits[i] = 0;
                    i += 1;
                }
                if i == digits.len() {
                    break;
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut drawn: HashSet<Vec<Vec<i64>>> = HashSet::new();
            for _ in 0..samples {
                draws += 1;
                let msgs = self.random_messages(&mut rng);
                if !drawn.insert(msgs.clone()) {
                    continue;
                }
                if !check(msgs, &mut seen)? {
                    mismatches += 1;
                }
            }
        }
        Ok(BijectivityReport {
            exhaustive,
            draws: if exhaustive { checked } else { draws },
            checked,
            distinct_images: seen.len() as u64,
            mismatches,
            expected_cardinality: total,
        })
    }
}

fn zeroed_code(
    primes: &PrimeSet,
    crt: &CrtBasis,
    level_bases: &[Vec<Vec<i64>>],
    length: usize,
    known: Subset,
) -> Result<LinearCode> {
    let q = primes.modulus();
    let mut gens = Vec::new();
    for (j, basis) in level_bases.iter().enumerate() {
        if known.contains(j) {
            continue;
        }
        let e = crt.idempotent(j);
        for row in basis {
            gens.push(row.iter().map(|&g| mul_mod(e, g, q)).collect());
        }
    }
    LinearCode::new(q, length, gens)
}

/// Renders `sqrt(d_sq)` as `a*sqrt(b)` with `b` squarefree.
pub fn surd(d_sq: u64) -> String {
    let mut outside = 1u64;
    let mut inside = d_sq;
    let mut f = 2u64;
    while f * f <= inside {
        while inside.is_multiple_of(f * f) {
            inside /= f * f;
            outside *= f;
        }
        f += 1;
    }
    match (outside, inside) {
        (o, 1) => o.to_string(),
        (1, i) => format!("sqrt({i})"),
        (o, i) => format!("{o}*sqrt({i})"),
    }
}

/// A translated subcode `(t + Λ_{S^c}) mod qZ^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subcode {
    pub known: Subset,
    pub translate: Vec<i64>,
    /// Points in `[0, q)^n`, sorted.
    pub points: Vec<Vec<i64>>,
    pub modulus: i64,
}

impl Subcode {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetGain {
    pub subset: Subset,
    /// `d_S²`, exact.
    pub distance_sq: u64,
    /// `d_S` as an exact surd, e.g. `3*sqrt(187)`.
    pub distance: String,
    pub distance_value: f64,
    /// `R_S` in bits/dim.
    pub rate: f64,
    /// `Γ(C, S)` in dB/bit/dim; absent when `R_S = 0`.
    pub gain_db: Option<f64>,
}

/// Side-information gains of every nonempty proper subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub primes: Vec<i64>,
    pub length: usize,
    pub ranks: Vec<usize>,
    pub d0_sq: u64,
    pub d0: String,
    pub level_rates: Vec<f64>,
    pub total_rate: f64,
    pub rows: Vec<SubsetGain>,
    pub overall_gain_db: Option<f64>,
    pub uniform: bool,
    /// `(n/k) 20 log10 2` when all ranks equal `k`.
    pub gain_bound_db: Option<f64>,
}

impl GainReport {
    pub fn row(&self, subset: Subset) -> Option<&SubsetGain> {
        self.rows.iter().find(|r| r.subset == subset)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeDistanceRow {
    pub subset: Subset,
    pub volume: u128,
    pub expected_volume: u128,
    pub d_sq: u64,
    pub lower_sq: u64,
    pub upper_sq: u128,
    pub volume_ok: bool,
    pub distance_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeDistanceReport {
    pub passed: bool,
    pub rows: Vec<VolumeDistanceRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectivityReport {
    pub exhaustive: bool,
    /// Tuples drawn; repeated draws are checked once.
    pub draws: u64,
    /// Distinct tuples checked.
    pub checked: u64,
    pub distinct_images: u64,
    pub mismatches: u64,
    pub expected_cardinality: u128,
}

impl BijectivityReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
            && self.distinct_images == self.checked
            && (!self.exhaustive || self.distinct_images as u128 == self.expected_cardinality)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy() -> CrtIndexCode {
        let primes = PrimeSet::new(vec![3, 5]).unwrap();
        let c1 = LinearCode::new(3, 2, vec![vec![1, 1]]).unwrap();
        let c2 = LinearCode::new(5, 2, vec![vec![1, 2]]).unwrap();
        CrtIndexCode::new(primes, vec![c1, c2]).unwrap()
    }

    pub(crate) fn sos_561() -> CrtIndexCode {
        let primes = PrimeSet::new(vec![3, 11, 17]).unwrap();
        let levels = vec![
            LinearCode::new(3, 3, vec![vec![1, 2, 2]]).unwrap(),
            LinearCode::new(11, 3, vec![vec![8, 1, 1]]).unwrap(),
            LinearCode::new(17, 3, vec![vec![14, 2, 2]]).unwrap(),
        ];
        CrtIndexCode::new(primes, levels).unwrap()
    }

    #[test]
    fn subset_ordering_and_display() {
        let s = Subset::proper_nonempty(3);
        let shown: Vec<String> = s.iter().map(|x| x.to_string()).collect();
        assert_eq!(shown, ["{1}", "{2}", "{3}", "{1,2}", "{1,3}", "{2,3}"]);
        assert!(Subset::proper_nonempty(1).is_empty());
        assert_eq!(Subset::from_levels(&[2]).unwrap().complement(3).one_based(), vec![1, 3]);
        assert!(Subset::from_levels(&[0]).is_err());
    }

    #[test]
    fn toy_code_basics() {
        let idx = toy();
        assert_eq!(idx.cardinality(), 15);
        assert_eq!(idx.rank(), 1);
        assert_eq!(idx.lattice().volume(), 15);
        assert_eq!(idx.encode(&[vec![1, 1], vec![1, 2]]).unwrap(), vec![1, 7]);
        assert_eq!(idx.encode(&[vec![0, 0], vec![0, 0]]).unwrap(), vec![0, 0]);
        assert_eq!(
            idx.decode_exact(&[1, 7]).unwrap(),
            vec![vec![1, 1], vec![1, 2]]
        );
        assert_eq!(idx.decode_exact(&[0, 0]).unwrap(), vec![vec![0, 0], vec![0, 0]]);
    }

    #[test]
    fn encode_rejects_non_codewords() {
        let idx = toy();
        assert_eq!(
            idx.encode(&[vec![1, 0], vec![1, 2]]),
            Err(Error::NotACodeword { level: 1 })
        );
        assert!(matches!(idx.decode_exact(&[1, 0]), Err(Error::NotACodeword { .. })));
    }

    #[test]
    fn encoding_over_561() {
        let idx = sos_561();
        let x = idx
            .encode(&[vec![1, 2, 2], vec![8, 1, 1], vec![14, 2, 2]])
            .unwrap();
        assert_eq!(x, vec![184, 155, 155]);
        let multiple: Vec<i64> = [13, 14, 14].iter().map(|v| v * 532 % 561).collect();
        assert_eq!(x, multiple);
        assert_eq!(
            idx.decode_exact(&x).unwrap(),
            vec![vec![1, 2, 2], vec![8, 1, 1], vec![14, 2, 2]]
        );
        assert_eq!(idx.d0_sq(), 561);
    }

    #[test]
    fn sublattice_examples() {
        let idx = sos_561();
        let s1 = idx.sublattice_known(Subset::from_levels(&[1]).unwrap()).unwrap();
        assert_eq!(s1.volume(), 3 * idx.lattice().volume());
        assert_eq!(idx.lattice().volume(), 561 * 561);
        assert_eq!(s1.min_distance_sq(idx.limits()).unwrap(), 9 * 187);
        let s23 = idx.sublattice_known(Subset::from_levels(&[2, 3]).unwrap()).unwrap();
        assert_eq!(s23.min_distance_sq(idx.limits()).unwrap(), 187 * 187 * 3);
        assert!(idx.sublattice_known(Subset::EMPTY).is_err());
        assert!(idx.sublattice_known(Subset::full(3)).is_err());
    }

    #[test]
    fn subcode_translate_example() {
        let idx = sos_561();
        let msgs = vec![vec![1, 2, 2], vec![0, 0, 0], vec![0, 0, 0]];
        let sc = idx.subcode(Subset::from_levels(&[1]).unwrap(), &msgs).unwrap();
        assert_eq!(sc.translate, vec![187, 374, 374]);
        assert_eq!(sc.len(), 187);
    }

    #[test]
    fn toy_subcodes_partition_the_code() {
        let idx = toy();
        let known = Subset::from_levels(&[1]).unwrap();
        let mut union: Vec<Vec<i64>> = Vec::new();
        for u in 0..3 {
            let v = idx.message_from_info(0, &[u]).unwrap();
            let sc = idx.subcode(known, &[v, vec![0, 0]]).unwrap();
            assert_eq!(sc.len(), 5);
            union.extend(sc.points);
        }
        union.sort();
        let before = union.len();
        union.dedup();
        assert_eq!(before, union.len());
        let book = idx.combined_code().enumerate(idx.limits()).unwrap();
        assert_eq!(union, book.words());
    }

    #[test]
    fn surd_rendering() {
        assert_eq!(surd(1683), "3*sqrt(187)");
        assert_eq!(surd(34969 * 3), "187*sqrt(3)");
        assert_eq!(surd(561), "sqrt(561)");
        assert_eq!(surd(9), "3");
        assert_eq!(surd(1), "1");
    }

    #[test]
    fn gain_bound_values() {
        let idx = sos_561();
        assert!((idx.gain_upper_bound().unwrap() - 18.061_799_739_838_87).abs() < 1e-12);
        let primes = PrimeSet::new(vec![3, 5]).unwrap();
        let unequal = CrtIndexCode::new(
            primes,
            vec![
                LinearCode::full(3, 2).unwrap(),
                LinearCode::new(5, 2, vec![vec![1, 0]]).unwrap(),
            ],
        )
        .unwrap();
        assert!(matches!(unequal.gain_upper_bound(), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn single_level_report_has_rates_only() {
        let primes = PrimeSet::new(vec![7]).unwrap();
        let idx = CrtIndexCode::new(primes, vec![LinearCode::new(7, 2, vec![vec![1, 3]]).unwrap()]).unwrap();
        let report = idx.gain_report().unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.overall_gain_db, None);
        assert!(!report.uniform);
        assert!((report.total_rate - 7f64.log2() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn bijectivity_toy() {
        let rep = toy().check_bijectivity(0, 1).unwrap();
        assert!(rep.exhaustive);
        assert_eq!(rep.checked, 15);
        assert!(rep.passed());
    }
}
