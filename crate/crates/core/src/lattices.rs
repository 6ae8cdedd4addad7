//! Full-rank integer lattices.
//!
//! A lattice is stored by its Hermite normal form: basis vectors `b_0 .. b_{n-1}`
//! (the columns of an upper-triangular matrix) with `b_j[i] = 0` for `i > j`,
//! `b_j[j] > 0` and `0 <= b_j[i] < b_i[i]` for `i < j`. The form is unique,
//! so equal lattices compare equal.
//!
//! Lattices lifted from a code remember that code; distance, kissing number
//! and nearest-point queries then run over codeword cosets instead of a tree
//! search.

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::codes::{centered_norm, LinearCode};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerLattice {
    basis: Vec<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    lifted_from: Option<LinearCode>,
}

impl IntegerLattice {
    /// Lattice generated by integer combinations of `gens`, which must span
    /// `R^n`.
    pub fn from_generators(gens: &[Vec<i64>]) -> Result<Self> {
        let dim = gens.first().map(Vec::len).ok_or(Error::NotFullRank)?;
        if dim == 0 {
            return Err(Error::NotFullRank);
        }
        Ok(IntegerLattice {
            basis: hermite_basis(dim, gens)?,
            lifted_from: None,
        })
    }

    /// Construction A: `σ(C) + qZ^n`.
    pub fn construction_a(code: &LinearCode, limits: &Limits) -> Result<Self> {
        let q = code.modulus();
        let n = code.length();
        let mut gens: Vec<Vec<i64>> = code.generators().to_vec();
        for i in 0..n {
            let mut v = vec![0; n];
            v[i] = q;
            gens.push(v);
        }
        let lattice = IntegerLattice {
            basis: hermite_basis(n, &gens)?,
            lifted_from: Some(code.clone()),
        };
        if code.predicted_size() <= limits.exhaustive_check_max as u128 {
            let size = code.enumerate(limits)?.len() as u128;
            let expected = (q as u128).pow(n as u32) / size;
            if lattice.volume() != expected {
                return Err(Error::Inconsistent(format!(
                    "Construction A volume {} differs from q^n/|C| = {expected}",
                    lattice.volume()
                )));
            }
        }
        Ok(lattice)
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Basis vectors in Hermite normal form; vector `j` is zero past index `j`.
    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    /// The code this lattice was lifted from, if any.
    pub fn lifted_from(&self) -> Option<&LinearCode> {
        self.lifted_from.as_ref()
    }

    /// The same point set without the code provenance, so every query takes
    /// the generic tree-search path.
    pub fn without_lift(&self) -> Self {
        IntegerLattice {
            basis: self.basis.clone(),
            lifted_from: None,
        }
    }

    pub fn volume(&self) -> u128 {
        self.basis
            .iter()
            .enumerate()
            .map(|(j, b)| b[j] as u128)
            .product()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        if v.len() != self.dimension() {
            return false;
        }
        let mut rest: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for j in (0..self.dimension()).rev() {
            let h = self.basis[j][j] as i128;
            if rest[j] % h != 0 {
                return false;
            }
            let c = rest[j] / h;
            for (i, r) in rest.iter_mut().enumerate().take(j + 1) {
                *r -= c * self.basis[j][i] as i128;
            }
        }
        true
    }

    /// Exact squared minimum norm.
    ///
    /// Code lifts use `min{d_min(C)^2, q^2}` over centered representatives;
    /// other lattices run an exhaustive enumeration inside the ball whose
    /// radius is the shortest basis vector.
    pub fn min_distance_sq(&self, limits: &Limits) -> Result<u64> {
        if let Some(code) = &self.lifted_from {
            let q = code.modulus() as u64;
            return Ok(code.min_distance_sq(limits)?.map_or(q * q, |d| d.min(q * q)));
        }
        let radius = self
            .basis
            .iter()
            .map(|b| crate::codes::squared_norm(b))
            .min()
            .expect("nonempty basis");
        let mut best = radius;
        self.enumerate_ball(radius, limits, |_, norm| {
            if norm > 0 && norm < best {
                best = norm;
            }
        })?;
        Ok(best)
    }

    /// Number of lattice vectors of minimum nonzero norm.
    pub fn kissing_number(&self, limits: &Limits) -> Result<u64> {
        let d2 = self.min_distance_sq(limits)?;
        if let Some(code) = &self.lifted_from {
            let q = code.modulus();
            let mut count: u64 = 0;
            for w in code.enumerate(limits)?.words() {
                if w.iter().all(|&x| x == 0) || centered_norm(w, q) != d2 {
                    continue;
                }
                // a coordinate equal to q/2 has two minimal representatives
                let halves = w.iter().filter(|&&x| 2 * x == q).count() as u32;
                count += 1u64 << halves;
            }
            if (q as u64) * (q as u64) == d2 {
                count += 2 * self.dimension() as u64;
            }
            return Ok(count);
        }
        let mut count = 0u64;
        self.enumerate_ball(d2, limits, |_, norm| {
            if norm == d2 {
                count += 1;
            }
        })?;
        Ok(count)
    }

    pub fn centre_density(&self, limits: &Limits) -> Result<CentreDensity> {
        let d2 = self.min_distance_sq(limits)?;
        Ok(CentreDensity::new(d2, self.volume(), self.dimension()))
    }

    /// Visits every lattice vector with squared norm `<= radius_sq`
    /// (including the origin), exactly, using the triangular basis.
    pub fn enumerate_ball(
        &self,
        radius_sq: u64,
        limits: &Limits,
        mut visit: impl FnMut(&[i64], u64),
    ) -> Result<()> {
        let n = self.dimension();
        let mut coeffs = vec![0i64; n];
        let mut point = vec![0i64; n];
        let mut nodes = 0u64;
        self.ball_level(n, radius_sq as i128, &mut coeffs, &mut point, &mut nodes, limits, &mut visit)
    }

    #[allow(clippy::too_many_arguments)]
    fn ball_level(
        &self,
        level: usize,
        remaining: i128,
        coeffs: &mut [i64],
        point: &mut [i64],
        nodes: &mut u64,
        limits: &Limits,
        visit: &mut impl FnMut(&[i64], u64),
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > limits.search_nodes {
            return Err(Error::CapExceeded {
                what: "lattice enumeration nodes",
                requested: *nodes as u128,
                cap: limits.search_nodes as u128,
            });
        }
        if level == 0 {
            let norm = crate::codes::squared_norm(point);
            visit(point, norm);
            return Ok(());
        }
        let i = level - 1;
        // coordinate i only depends on coefficients i..n
        let offset: i128 = (i + 1..self.dimension())
            .map(|j| self.basis[j][i] as i128 * coeffs[j] as i128)
            .sum();
        let h = self.basis[i][i] as i128;
        let r = remaining.sqrt();
        let lo = div_ceil(-r - offset, h);
        let hi = div_floor(r - offset, h);
        for u in lo..=hi {
            let x = h * u + offset;
            let rest = remaining - x * x;
            if rest < 0 {
                continue;
            }
            coeffs[i] = u as i64;
            point[i] = x as i64;
            self.ball_level(i, rest, coeffs, point, nodes, limits, visit)?;
        }
        coeffs[i] = 0;
        point[i] = 0;
        Ok(())
    }

    /// A closest lattice point to `target`; ties go to the lexicographically
    /// smallest point.
    pub fn quantize<F: Real>(&self, target: &[F], limits: &Limits) -> Result<Vec<i64>> {
        if target.len() != self.dimension() {
            return Err(Error::LengthMismatch {
                expected: self.dimension(),
                found: target.len(),
            });
        }
        if let Some(code) = &self.lifted_from {
            let book = code.enumerate(limits)?;
            let flat: Vec<i64> = book.words().iter().flatten().copied().collect();
            let cosets = CosetSearch::new(flat, code.length(), code.modulus());
            return Ok(cosets.nearest(target).point);
        }
        self.quantize_generic(target, limits)
    }

    fn quantize_generic<F: Real>(&self, target: &[F], limits: &Limits) -> Result<Vec<i64>> {
        let n = self.dimension();
        let y: Vec<f64> = target.iter().map(|t| t.to_f64_lossy()).collect();
        // Babai back-substitution gives the initial radius.
        let mut coeffs = vec![0i64; n];
        for i in (0..n).rev() {
            let offset: f64 = (i + 1..n).map(|j| self.basis[j][i] as f64 * coeffs[j] as f64).sum();
            coeffs[i] = ((y[i] - offset) / self.basis[i][i] as f64).round() as i64;
        }
        let babai = self.combine(&coeffs);
        let radius = dist_sq(&babai, &y);
        let slack = radius * 1e-9 + 1e-9;

        let mut best: Option<(f64, Vec<i64>)> = None;
        let mut point = vec![0i64; n];
        let mut nodes = 0u64;
        let mut stack_coeffs = vec![0i64; n];
        self.cvp_level(
            n,
            radius + slack,
            &y,
            &mut stack_coeffs,
            &mut point,
            &mut nodes,
            limits,
            &mut best,
        )?;
        Ok(best.map(|(_, p)| p).unwrap_or(babai))
    }

    #[allow(clippy::too_many_arguments)]
    fn cvp_level(
        &self,
        level: usize,
        remaining: f64,
        y: &[f64],
        coeffs: &mut [i64],
        point: &mut [i64],
        nodes: &mut u64,
        limits: &Limits,
        best: &mut Option<(f64, Vec<i64>)>,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > limits.search_nodes {
            return Err(Error::CapExceeded {
                what: "lattice enumeration nodes",
                requested: *nodes as u128,
                cap: limits.search_nodes as u128,
            });
        }
        if level == 0 {
            let d = dist_sq(point, y);
            let better = match best {
                None => true,
                Some((bd, bp)) => d < *bd || (d == *bd && point[..] < bp[..]),
            };
            if better {
                *best = Some((d, point.to_vec()));
            }
            return Ok(());
        }
        let i = level - 1;
        let offset: i64 = (i + 1..self.dimension())
            .map(|j| self.basis[j][i] * coeffs[j])
            .sum();
        let h = self.basis[i][i] as f64;
        let r = remaining.max(0.0).sqrt();
        let lo = ((y[i] - offset as f64 - r) / h).ceil() as i64 - 1;
        let hi = ((y[i] - offset as f64 + r) / h).floor() as i64 + 1;
        for u in lo..=hi {
            let x = self.basis[i][i] * u + offset;
            let diff = x as f64 - y[i];
            let rest = remaining - diff * diff;
            if rest < 0.0 {
                continue;
            }
            coeffs[i] = u;
            point[i] = x;
            self.cvp_level(i, rest, y, coeffs, point, nodes, limits, best)?;
        }
        coeffs[i] = 0;
        point[i] = 0;
        Ok(())
    }

    fn combine(&self, coeffs: &[i64]) -> Vec<i64> {
        let n = self.dimension();
        let mut out = vec![0i64; n];
        for (j, &c) in coeffs.iter().enumerate() {
            for (o, &b) in out.iter_mut().zip(&self.basis[j]) {
                *o += c * b;
            }
        }
        out
    }
}

fn dist_sq(point: &[i64], y: &[f64]) -> f64 {
    point
        .iter()
        .zip(y)
        .map(|(&p, &t)| {
            let d = p as f64 - t;
            d * d
        })
        .sum()
}

fn div_floor(a: i128, b: i128) -> i128 {
    a.div_euclid(b)
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

/// Column-style Hermite normal form of the lattice generated by `gens`.
fn hermite_basis(dim: usize, gens: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let overflow = || Error::Overflow("Hermite normal form");
    let mut cols: Vec<Vec<i128>> = Vec::with_capacity(gens.len());
    for g in gens {
        if g.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                found: g.len(),
            });
        }
        if g.iter().any(|&x| x != 0) {
            cols.push(g.iter().map(|&x| x as i128).collect());
        }
    }
    let mut basis: Vec<Vec<i128>> = vec![Vec::new(); dim];
    for row in (0..dim).rev() {
        // Euclid on the row entries until a single column is nonzero there.
        loop {
            let mut active: Vec<usize> = (0..cols.len()).filter(|&c| cols[c][row] != 0).collect();
            if active.is_empty() {
                return Err(Error::NotFullRank);
            }
            if active.len() == 1 {
                let mut pivot = cols.swap_remove(active[0]);
                if pivot[row] < 0 {
                    pivot.iter_mut().for_each(|x| *x = -*x);
                }
                basis[row] = pivot;
                break;
            }
            active.sort_by_key(|&c| cols[c][row].abs());
            let p = active[0];
            let pivot = cols[p].clone();
            for &c in &active[1..] {
                let quot = cols[c][row] / pivot[row];
                for (x, &y) in cols[c].iter_mut().zip(&pivot) {
                    *x = x
                        .checked_sub(quot.checked_mul(y).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                }
            }
            cols.retain(|c| c.iter().any(|&x| x != 0));
        }
    }
    // Reduce entries above the diagonal into [0, h_ii).
    for i in (0..dim).rev() {
        let h = basis[i][i];
        for j in i + 1..dim {
            let quot = basis[j][i].div_euclid(h);
            if quot != 0 {
                let pivot = basis[i].clone();
                for (x, &y) in basis[j].iter_mut().zip(&pivot) {
                    *x = x
                        .checked_sub(quot.checked_mul(y).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                }
            }
        }
    }
    basis
        .into_iter()
        .map(|b| {
            b.into_iter()
                .map(|x| i64::try_from(x).map_err(|_| overflow()))
                .collect()
        })
        .collect()
}

/// Centre density `(d/2)^n / vol`, kept exactly through its square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentreDensity {
    /// `δ² = (d²/4)^n / vol²`.
    pub squared: BigRational,
    pub min_distance_sq: u64,
    pub volume: u128,
    pub dimension: usize,
}

impl CentreDensity {
    pub fn new(min_distance_sq: u64, volume: u128, dimension: usize) -> Self {
        let quarter = BigRational::new(BigInt::from(min_distance_sq), BigInt::from(4));
        let mut num = BigRational::from_integer(BigInt::from(1));
        for _ in 0..dimension {
            num *= &quarter;
        }
        let vol = BigInt::from(volume);
        let squared = num / BigRational::from_integer(&vol * &vol);
        CentreDensity {
            squared,
            min_distance_sq,
            volume,
            dimension,
        }
    }

    pub fn value(&self) -> f64 {
        let n = self.dimension as f64;
        (0.5 * n * (self.min_distance_sq as f64 / 4.0).ln() - (self.volume as f64).ln()).exp()
    }
}

/// Nearest-point search over `points + qZ^n`, where `points` lists
/// representatives in `[0, q)^n` (flattened, `n` per point).
///
/// The target is first reduced into `[0, q)^n`; afterwards each coordinate's
/// best shift is one of `{-q, 0, q}` and can be chosen independently.
#[derive(Debug, Clone)]
pub struct CosetSearch {
    points: Vec<i64>,
    dim: usize,
    modulus: i64,
}

/// Result of a [`CosetSearch`].
#[derive(Debug, Clone, PartialEq)]
pub struct CosetMatch {
    /// Index of the winning representative.
    pub index: usize,
    /// The nearest lattice point itself (target offset included).
    pub point: Vec<i64>,
    pub dist_sq: f64,
}

impl CosetSearch {
    pub fn new(points: Vec<i64>, dim: usize, modulus: i64) -> Self {
        assert!(dim > 0 && points.len().is_multiple_of(dim));
        CosetSearch { points, dim, modulus }
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn representative(&self, index: usize) -> &[i64] {
        &self.points[index * self.dim..(index + 1) * self.dim]
    }

    /// Index of a nearest representative and its squared distance, without
    /// building the point. Exact ties are resolved like [`Self::nearest`].
    pub fn nearest_index<F: Real>(&self, target: &[F]) -> (usize, F) {
        let q = F::of_int(self.modulus);
        let half = q / (F::one() + F::one());
        let reduced: Vec<F> = target.iter().map(|&t| t - q * (t / q).floor()).collect();
        let mut best = F::infinity();
        let mut best_idx = 0usize;
        for (idx, rep) in self.points.chunks_exact(self.dim).enumerate() {
            let mut d = F::zero();
            for (&c, &r) in rep.iter().zip(&reduced) {
                let mut diff = F::of_int(c) - r;
                // diff in (-q, q); ties at ±q/2 take the smaller point
                if diff >= half {
                    diff = diff - q;
                } else if diff < -half {
                    diff = diff + q;
                }
                d = d + diff * diff;
                if d > best {
                    break;
                }
            }
            if d < best {
                best = d;
                best_idx = idx;
            } else if d == best && self.point_for(idx, target) < self.point_for(best_idx, target) {
                best_idx = idx;
            }
        }
        (best_idx, best)
    }

    /// Nearest lattice point with the lexicographic tie rule.
    pub fn nearest<F: Real>(&self, target: &[F]) -> CosetMatch {
        let (index, dist) = self.nearest_index(target);
        CosetMatch {
            index,
            point: self.point_for(index, target),
            dist_sq: dist.to_f64_lossy(),
        }
    }

    fn point_for<F: Real>(&self, index: usize, target: &[F]) -> Vec<i64> {
        let q = self.modulus;
        let qf = F::of_int(q);
        let half = qf / (F::one() + F::one());
        self.representative(index)
            .iter()
            .zip(target)
            .map(|(&c, &t)| {
                let cell = (t / qf).floor();
                let r = t - qf * cell;
                let base = cell.to_i64().expect("finite target") * q;
                let diff = F::of_int(c) - r;
                let shift = if diff >= half {
                    -q
                } else if diff < -half {
                    q
                } else {
                    0
                };
                base + c + shift
            })
            .collect()
    }
}
