//! Linear codes over `Z_q`: enumeration, centered representatives, Euclidean
//! minimum distance, rank over prime fields and Cartesian lifting.

use std::collections::HashSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::ring_arith::{centered_residue, is_prime, mod_inverse, mul_mod};

/// Maps each coordinate to its representative in `(-q/2, q/2]`.
pub fn centered(v: &[i64], modulus: i64) -> Vec<i64> {
    v.iter().map(|&x| centered_residue(x, modulus)).collect()
}

/// Componentwise reduction into `[0, p)`.
pub fn reduce_mod(v: &[i64], modulus: i64) -> Vec<i64> {
    v.iter().map(|x| x.rem_euclid(modulus)).collect()
}

pub fn squared_norm(v: &[i64]) -> u64 {
    v.iter().map(|&x| (x as i128 * x as i128) as u64).sum()
}

/// Squared norm of the centered representative of `v mod q`.
#[inline]
pub fn centered_norm(v: &[i64], modulus: i64) -> u64 {
    v.iter()
        .map(|&x| {
            let c = centered_residue(x, modulus) as i128;
            (c * c) as u64
        })
        .sum()
}

/// A linear code over `Z_q`, given by generator rows.
///
/// Entries are stored reduced into `[0, q)`. Duplicate and zero rows are
/// allowed; an empty generator list is the zero code.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearCode {
    modulus: i64,
    length: usize,
    generators: Vec<Vec<i64>>,
}

impl LinearCode {
    pub fn new(modulus: i64, length: usize, generators: Vec<Vec<i64>>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidArgument(format!("modulus must be at least 2, got {modulus}")));
        }
        if length == 0 {
            return Err(Error::InvalidArgument("code length must be at least 1".into()));
        }
        let generators = generators
            .into_iter()
            .map(|g| {
                if g.len() != length {
                    return Err(Error::LengthMismatch {
                        expected: length,
                        found: g.len(),
                    });
                }
                Ok(reduce_mod(&g, modulus))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LinearCode {
            modulus,
            length,
            generators,
        })
    }

    pub fn zero(modulus: i64, length: usize) -> Result<Self> {
        Self::new(modulus, length, Vec::new())
    }

    /// The full space `Z_q^n`, generated by the unit vectors.
    pub fn full(modulus: i64, length: usize) -> Result<Self> {
        let gens = (0..length)
            .map(|i| {
                let mut g = vec![0; length];
                g[i] = 1;
                g
            })
            .collect();
        Self::new(modulus, length, gens)
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    /// Additive order of a vector in `Z_q^n`.
    pub fn order_of(&self, v: &[i64]) -> i64 {
        let g = v.iter().fold(self.modulus, |acc, &x| acc.gcd(&x));
        self.modulus / g
    }

    /// Product of the generator orders; an upper bound on `|C|`, exact when
    /// the generators are independent.
    pub fn predicted_size(&self) -> u128 {
        self.generators
            .iter()
            .map(|g| self.order_of(g) as u128)
            .fold(1u128, |acc, o| acc.saturating_mul(o))
    }

    fn check_cap(&self, limits: &Limits) -> Result<()> {
        let predicted = self.predicted_size();
        if predicted > limits.codebook_max as u128 {
            return Err(Error::CapExceeded {
                what: "codebook size",
                requested: predicted,
                cap: limits.codebook_max as u128,
            });
        }
        Ok(())
    }

    /// Visits every combination `Σ t_i g_i` with `0 <= t_i < ord(g_i)`.
    /// Words repeat when the generators are dependent.
    pub fn for_each_combination(&self, limits: &Limits, mut visit: impl FnMut(&[i64])) -> Result<()> {
        self.check_cap(limits)?;
        let q = self.modulus;
        let orders: Vec<i64> = self.generators.iter().map(|g| self.order_of(g)).collect();
        let mut coeffs = vec![0i64; self.generators.len()];
        let mut word = vec![0i64; self.length];
        loop {
            visit(&word);
            // odometer step; adding g_i once advances coefficient i by one
            let mut i = 0;
            loop {
                if i == coeffs.len() {
                    return Ok(());
                }
                coeffs[i] += 1;
                let g = &self.generators[i];
                if coeffs[i] < orders[i] {
                    for (w, &x) in word.iter_mut().zip(g) {
                        *w = (*w + x) % q;
                    }
                    break;
                }
                // wrapped: ord(g)·g ≡ 0, so one more addition restores the word
                for (w, &x) in word.iter_mut().zip(g) {
                    *w = (*w + x) % q;
                }
                coeffs[i] = 0;
                i += 1;
            }
        }
    }

    /// All distinct codewords, sorted lexicographically.
    pub fn enumerate(&self, limits: &Limits) -> Result<Codebook> {
        self.check_cap(limits)?;
        let mut words: HashSet<Vec<i64>> = HashSet::new();
        words.insert(vec![0; self.length]);
        for g in &self.generators {
            if g.iter().all(|&x| x == 0) {
                continue;
            }
            let order = self.order_of(g);
            let base: Vec<Vec<i64>> = words.iter().cloned().collect();
            for w in base {
                let mut cur = w;
                for _ in 1..order {
                    for (c, &x) in cur.iter_mut().zip(g) {
                        *c = (*c + x) % self.modulus;
                    }
                    words.insert(cur.clone());
                }
            }
        }
        let mut words: Vec<Vec<i64>> = words.into_iter().collect();
        words.sort_unstable();
        Ok(Codebook {
            code: self.clone(),
            words,
        })
    }

    /// Minimum squared norm of the centered representatives of the nonzero
    /// codewords; `None` for the zero code. Streams codewords.
    pub fn min_distance_sq(&self, limits: &Limits) -> Result<Option<u64>> {
        let mut best: Option<u64> = None;
        let q = self.modulus;
        self.for_each_combination(limits, |w| {
            if w.iter().all(|&x| x == 0) {
                return;
            }
            let d = centered_norm(w, q);
            if best.is_none_or(|b| d < b) {
                best = Some(d);
            }
        })?;
        Ok(best)
    }

    fn require_prime(&self) -> Result<()> {
        if !is_prime(self.modulus) {
            return Err(Error::NotApplicable(format!(
                "rank over Z_{} is only computed for prime moduli",
                self.modulus
            )));
        }
        Ok(())
    }

    /// Reduced row echelon basis of the row space over the field `Z_p`.
    pub fn echelon_basis(&self) -> Result<Vec<Vec<i64>>> {
        self.require_prime()?;
        Ok(row_reduce(self.generators.clone(), self.modulus))
    }

    /// Dimension of the row space over `Z_p`.
    pub fn rank_over_prime_field(&self) -> Result<usize> {
        Ok(self.echelon_basis()?.len())
    }

    /// Membership test. Uses linear algebra for prime moduli and
    /// enumeration otherwise.
    pub fn contains(&self, word: &[i64], limits: &Limits) -> Result<bool> {
        if word.len() != self.length {
            return Err(Error::LengthMismatch {
                expected: self.length,
                found: word.len(),
            });
        }
        let w = reduce_mod(word, self.modulus);
        if is_prime(self.modulus) {
            let basis = self.echelon_basis()?;
            let mut extended = basis.clone();
            extended.push(w);
            return Ok(row_reduce(extended, self.modulus).len() == basis.len());
        }
        Ok(self.enumerate(limits)?.contains(&w))
    }

    /// `m` independent copies side by side: generator `i` of copy `b` sits in
    /// coordinates `b*n .. (b+1)*n`.
    pub fn cartesian_power(&self, copies: usize) -> Result<LinearCode> {
        if copies == 0 {
            return Err(Error::InvalidArgument("cartesian power needs at least one copy".into()));
        }
        let n = self.length;
        let mut gens = Vec::with_capacity(self.generators.len() * copies);
        for block in 0..copies {
            for g in &self.generators {
                let mut row = vec![0; n * copies];
                row[block * n..(block + 1) * n].copy_from_slice(g);
                gens.push(row);
            }
        }
        LinearCode::new(self.modulus, n * copies, gens)
    }

    /// The code generated by `factor * g` for every generator `g`.
    pub fn scaled(&self, factor: i64) -> LinearCode {
        let q = self.modulus;
        LinearCode {
            modulus: q,
            length: self.length,
            generators: self
                .generators
                .iter()
                .map(|g| g.iter().map(|&x| mul_mod(x, factor, q)).collect())
                .collect(),
        }
    }
}

/// Gauss–Jordan elimination over `Z_p`; returns the nonzero rows of the
/// reduced row echelon form with leading entries 1.
fn row_reduce(mut rows: Vec<Vec<i64>>, p: i64) -> Vec<Vec<i64>> {
    let width = rows.first().map_or(0, Vec::len);
    for r in rows.iter_mut() {
        for x in r.iter_mut() {
            *x = x.rem_euclid(p);
        }
    }
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = mod_inverse(rows[rank][col], p).expect("nonzero element of a prime field");
        for x in rows[rank].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = (*x - mul_mod(factor, y, p)).rem_euclid(p);
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

/// An enumerated code: the distinct codewords in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    code: LinearCode,
    words: Vec<Vec<i64>>,
}

impl Codebook {
    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn words(&self) -> &[Vec<i64>] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &[i64]) -> bool {
        self.words.binary_search_by(|w| w.as_slice().cmp(word)).is_ok()
    }

    /// Minimum squared centered norm over nonzero words; `None` for `{0}`.
    pub fn min_distance_sq(&self) -> Option<u64> {
        let q = self.code.modulus;
        self.words
            .iter()
            .filter(|w| w.iter().any(|&x| x != 0))
            .map(|w| centered_norm(w, q))
            .min()
    }
}
