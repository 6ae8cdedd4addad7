//! Exact integer and modular arithmetic: Bézout coefficients, CRT
//! idempotents, sum-of-squares enumeration and the scalar-collinearity
//! congruence search used to certify sum-of-squares designs.
//!
//! Everything here is desk scale. Primality is decided by trial division and
//! moduli are limited to [`MAX_MODULUS`] so that every product of two residues
//! fits comfortably in `i128` and every squared norm in `u64`.

use num_integer::{Integer, Roots};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::Limits;

/// Largest supported modulus `q = p_1 ... p_r` (2^31 - 1).
pub const MAX_MODULUS: i64 = i32::MAX as i64;

/// Returns `(g, u, v)` with `u*a + v*b = g = gcd(a, b) > 0`.
pub fn extended_gcd(a: i64, b: i64) -> Result<(i64, i64, i64)> {
    if a == 0 && b == 0 {
        return Err(Error::ZeroGcd);
    }
    let (mut old_r, mut r) = (a as i128, b as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
        (old_t, t) = (t, old_t - quot * t);
    }
    if old_r < 0 {
        old_r = -old_r;
        old_s = -old_s;
        old_t = -old_t;
    }
    let narrow = |v: i128| i64::try_from(v).map_err(|_| Error::Overflow("extended_gcd"));
    Ok((narrow(old_r)?, narrow(old_s)?, narrow(old_t)?))
}

/// Inverse of `a` modulo `m` in `[0, m)`, if it exists.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    if m < 1 {
        return None;
    }
    let (g, u, _) = extended_gcd(a.rem_euclid(m), m).ok()?;
    (g == 1).then(|| u.rem_euclid(m))
}

/// Deterministic trial division.
pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3i64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Representative of `v mod q` in `(-q/2, q/2]`.
#[inline]
pub fn centered_residue(v: i64, q: i64) -> i64 {
    let r = v.rem_euclid(q);
    if 2 * r > q {
        r - q
    } else {
        r
    }
}

/// `(a * b) mod m` in `[0, m)` without intermediate overflow.
#[inline]
pub fn mul_mod(a: i64, b: i64, m: i64) -> i64 {
    ((a as i128 * b as i128).rem_euclid(m as i128)) as i64
}

/// An ordered set of distinct primes and their product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct PrimeSet {
    primes: Vec<i64>,
    modulus: i64,
}

impl PrimeSet {
    pub fn new(primes: Vec<i64>) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::InvalidArgument("prime set is empty".into()));
        }
        let mut modulus: i128 = 1;
        for (i, &p) in primes.iter().enumerate() {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if primes[..i].contains(&p) {
                return Err(Error::DuplicatePrime(p));
            }
            modulus *= p as i128;
            if modulus > MAX_MODULUS as i128 {
                return Err(Error::ModulusTooLarge {
                    value: modulus,
                    max: MAX_MODULUS,
                });
            }
        }
        Ok(PrimeSet {
            primes,
            modulus: modulus as i64,
        })
    }

    pub fn primes(&self) -> &[i64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// The product `q` of all primes.
    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    /// `m_j = q / p_j`.
    pub fn cofactor(&self, level: usize) -> i64 {
        self.modulus / self.primes[level]
    }
}

impl TryFrom<Vec<i64>> for PrimeSet {
    type Error = Error;

    fn try_from(primes: Vec<i64>) -> Result<Self> {
        PrimeSet::new(primes)
    }
}

impl From<PrimeSet> for Vec<i64> {
    fn from(ps: PrimeSet) -> Self {
        ps.primes
    }
}

/// Bézout coefficients and orthogonal idempotents of `Z_q = Z_{p_1} x ... x Z_{p_r}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtBasis {
    modulus: i64,
    bezout: Vec<i64>,
    idempotents: Vec<i64>,
}

impl CrtBasis {
    /// Computes `x_j` with `x_j m_j ≡ 1 (mod p_j)` and `e_j = x_j m_j mod q`,
    /// then checks the idempotent identities.
    pub fn new(primes: &PrimeSet) -> Result<Self> {
        let q = primes.modulus();
        let mut bezout = Vec::with_capacity(primes.len());
        let mut idempotents = Vec::with_capacity(primes.len());
        for (j, &p) in primes.primes().iter().enumerate() {
            let m = primes.cofactor(j);
            let (g, x, _) = extended_gcd(m, p)?;
            if g != 1 {
                return Err(Error::Inconsistent(format!("gcd(q/{p}, {p}) = {g}")));
            }
            bezout.push(x);
            idempotents.push(mul_mod(x, m, q));
        }
        let basis = CrtBasis {
            modulus: q,
            bezout,
            idempotents,
        };
        basis.check(primes)?;
        Ok(basis)
    }

    fn check(&self, primes: &PrimeSet) -> Result<()> {
        let q = self.modulus;
        for (j, &e) in self.idempotents.iter().enumerate() {
            for (i, &p) in primes.primes().iter().enumerate() {
                let expected = i64::from(i == j);
                if e.rem_euclid(p) != expected {
                    return Err(Error::Inconsistent(format!(
                        "idempotent e_{} = {e} has residue {} mod {p}",
                        j + 1,
                        e.rem_euclid(p)
                    )));
                }
            }
            if mul_mod(e, e, q) != e {
                return Err(Error::Inconsistent(format!("e_{} is not idempotent", j + 1)));
            }
        }
        let sum = self
            .idempotents
            .iter()
            .fold(0i64, |acc, &e| (acc + e).rem_euclid(q));
        if sum != 1 % q {
            return Err(Error::Inconsistent("idempotents do not sum to 1".into()));
        }
        Ok(())
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    /// Bézout coefficients `x_j`.
    pub fn bezout(&self) -> &[i64] {
        &self.bezout
    }

    /// Idempotents `e_j` in `[0, q)`.
    pub fn idempotents(&self) -> &[i64] {
        &self.idempotents
    }

    pub fn idempotent(&self, level: usize) -> i64 {
        self.idempotents[level]
    }
}

/// `target = Σ coords_i^2` with nonnegative nondecreasing coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SquareDecomposition {
    pub target: i64,
    pub coords: Vec<i64>,
}

impl SquareDecomposition {
    pub fn count(&self) -> usize {
        self.coords.len()
    }
}

/// All ways of writing `target` as a sum of `count` squares, canonicalized to
/// nonnegative nondecreasing coordinates and sorted lexicographically.
pub fn sum_of_squares(target: i64, count: usize, limits: &Limits) -> Result<Vec<SquareDecomposition>> {
    if target < 1 {
        return Err(Error::InvalidArgument(format!(
            "sum-of-squares target must be positive, got {target}"
        )));
    }
    if !(1..=8).contains(&count) {
        return Err(Error::InvalidArgument(format!(
            "number of squares must be in 1..=8, got {count}"
        )));
    }
    if target > limits.sum_of_squares_max {
        return Err(Error::CapExceeded {
            what: "sum-of-squares target",
            requested: target as u128,
            cap: limits.sum_of_squares_max as u128,
        });
    }

    struct Search<'a> {
        out: Vec<SquareDecomposition>,
        prefix: Vec<i64>,
        target: i64,
        nodes: u64,
        limits: &'a Limits,
    }

    impl Search<'_> {
        fn descend(&mut self, remaining: i64, slots: usize, min: i64) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.limits.search_nodes {
                return Err(Error::CapExceeded {
                    what: "sum-of-squares search nodes",
                    requested: self.nodes as u128,
                    cap: self.limits.search_nodes as u128,
                });
            }
            if slots == 1 {
                let root = remaining.sqrt();
                if root * root == remaining && root >= min {
                    self.prefix.push(root);
                    self.out.push(SquareDecomposition {
                        target: self.target,
                        coords: self.prefix.clone(),
                    });
                    self.prefix.pop();
                }
                return Ok(());
            }
            let mut x = min;
            // every later coordinate is at least x
            while x * x * slots as i64 <= remaining {
                self.prefix.push(x);
                self.descend(remaining - x * x, slots - 1, x)?;
                self.prefix.pop();
                x += 1;
            }
            Ok(())
        }
    }

    let mut search = Search {
        out: Vec::new(),
        prefix: Vec::with_capacity(count),
        target,
        nodes: 0,
        limits,
    };
    search.descend(target, count, 0)?;
    Ok(search.out)
}

/// A solution of `lambda * witness ≡ x (mod P)` with `‖witness‖² = P`.
///
/// `multiplier` is `lambda⁻¹ mod P`, so `witness = centered(multiplier * x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollinearSolution {
    pub modulus: i64,
    pub lambda: i64,
    pub multiplier: i64,
    pub witness: Vec<i64>,
}

/// Finds every unit `lambda` of `Z_P` for which the centered vector
/// `b = lambda⁻¹ x mod P` has squared norm exactly `P`. Sorted by `lambda`.
pub fn scalar_collinear(x: &[i64], modulus: i64, limits: &Limits) -> Result<Vec<CollinearSolution>> {
    if modulus < 2 {
        return Err(Error::InvalidArgument(format!(
            "collinearity modulus must be at least 2, got {modulus}"
        )));
    }
    if modulus > limits.collinear_max {
        return Err(Error::CapExceeded {
            what: "collinearity modulus",
            requested: modulus as u128,
            cap: limits.collinear_max as u128,
        });
    }
    let reduced: Vec<i64> = x.iter().map(|v| v.rem_euclid(modulus)).collect();
    let mut out = Vec::new();
    let mut witness = vec![0i64; x.len()];
    for multiplier in 1..modulus {
        if multiplier.gcd(&modulus) != 1 {
            continue;
        }
        let mut norm: i128 = 0;
        for (w, &r) in witness.iter_mut().zip(&reduced) {
            *w = centered_residue(mul_mod(multiplier, r, modulus), modulus);
            norm += (*w as i128) * (*w as i128);
        }
        if norm == modulus as i128 {
            let lambda = mod_inverse(multiplier, modulus).expect("unit has an inverse");
            out.push(CollinearSolution {
                modulus,
                lambda,
                multiplier,
                witness: witness.clone(),
            });
        }
    }
    out.sort_by_key(|s| s.lambda);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn extended_gcd_identities() {
        for &(a, b, g) in &[(3, 5, 1), (7, 0, 7), (12, 18, 6), (-12, 18, 6), (0, -4, 4)] {
            let (gg, u, v) = extended_gcd(a, b).unwrap();
            assert_eq!(gg, g);
            assert_eq!(u * a + v * b, g, "({a},{b})");
        }
        assert_eq!(extended_gcd(7, 0).unwrap(), (7, 1, 0));
        assert_eq!(extended_gcd(0, 0), Err(Error::ZeroGcd));
    }

    #[test]
    fn crt_basis_examples() {
        let cases: &[(&[i64], &[i64])] = &[
            (&[3, 5], &[10, 6]),
            (&[7, 19], &[57, 77]),
            (&[3, 11, 17], &[187, 408, 528]),
            (&[13], &[1]),
        ];
        for (primes, expected) in cases {
            let ps = PrimeSet::new(primes.to_vec()).unwrap();
            let crt = CrtBasis::new(&ps).unwrap();
            assert_eq!(crt.idempotents(), *expected);
        }
        assert_eq!((187 + 408 + 528) % 561, 1);
    }

    #[test]
    fn prime_set_validation() {
        assert_eq!(PrimeSet::new(vec![3, 9]), Err(Error::NotPrime(9)));
        assert_eq!(PrimeSet::new(vec![3, 5, 3]), Err(Error::DuplicatePrime(3)));
        assert!(PrimeSet::new(vec![]).is_err());
        assert!(matches!(
            PrimeSet::new(vec![65521, 65519, 65497]),
            Err(Error::ModulusTooLarge { .. })
        ));
        let ps = PrimeSet::new(vec![3, 11, 17]).unwrap();
        assert_eq!(ps.modulus(), 561);
        assert_eq!(ps.cofactor(1) * 11, 561);
    }

    /// Independent nested-loop oracle over all nondecreasing tuples.
    fn brute_squares(target: i64, count: usize) -> Vec<Vec<i64>> {
        let bound = target.sqrt();
        let mut out = Vec::new();
        let mut cur = vec![0i64; count];
        loop {
            if cur.windows(2).all(|w| w[0] <= w[1]) && cur.iter().map(|v| v * v).sum::<i64>() == target {
                out.push(cur.clone());
            }
            let mut i = 0;
            loop {
                if i == count {
                    out.sort();
                    return out;
                }
                cur[i] += 1;
                if cur[i] <= bound {
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn sum_of_squares_examples() {
        let has = |p: i64, n: usize, c: &[i64]| {
            sum_of_squares(p, n, &limits())
                .unwrap()
                .iter()
                .any(|d| d.coords == c)
        };
        assert!(has(133, 4, &[1, 2, 8, 8]));
        assert!(has(133, 4, &[5, 6, 6, 6]));
        assert!(has(561, 3, &[13, 14, 14]));
        let one = sum_of_squares(1, 1, &limits()).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].coords, vec![1]);
        let coords: Vec<_> = sum_of_squares(65, 2, &limits())
            .unwrap()
            .into_iter()
            .map(|d| d.coords)
            .collect();
        assert_eq!(coords, brute_squares(65, 2));
        assert_eq!(coords, vec![vec![1, 8], vec![4, 7]]);
        assert!(sum_of_squares(3, 2, &limits()).unwrap().is_empty());
    }

    #[test]
    fn sum_of_squares_matches_oracle_small() {
        for target in [1, 2, 7, 50, 133, 325, 561, 997] {
            for count in 1..=3 {
                let got: Vec<_> = sum_of_squares(target, count, &limits())
                    .unwrap()
                    .into_iter()
                    .map(|d| d.coords)
                    .collect();
                let mut want = brute_squares(target, count);
                want.sort();
                assert_eq!(got, want, "target {target}, count {count}");
            }
        }
    }

    #[test]
    fn sum_of_squares_caps() {
        let tight = Limits {
            sum_of_squares_max: 100,
            ..Limits::default()
        };
        assert!(matches!(sum_of_squares(101, 2, &tight), Err(Error::CapExceeded { .. })));
        let few_nodes = Limits {
            search_nodes: 10,
            ..Limits::default()
        };
        assert!(matches!(sum_of_squares(900, 6, &few_nodes), Err(Error::CapExceeded { .. })));
        assert!(sum_of_squares(0, 2, &limits()).is_err());
        assert!(sum_of_squares(5, 9, &limits()).is_err());
    }

    fn witnesses(x: &[i64], p: i64) -> Vec<Vec<i64>> {
        scalar_collinear(x, p, &limits())
            .unwrap()
            .into_iter()
            .map(|s| s.witness)
            .collect()
    }

    #[test]
    fn scalar_collinear_examples() {
        let w7 = witnesses(&[5, 6, 6, 6], 7);
        assert!(w7.contains(&vec![-2, -1, -1, -1]));
        assert!(w7.contains(&vec![2, 1, 1, 1]));
        let w19 = witnesses(&[5, 6, 6, 6], 19);
        assert!(w19.contains(&vec![-4, -1, -1, -1]));
        assert!(witnesses(&[1, 2, 8, 8], 19).is_empty());
        assert!(witnesses(&[13, 14, 14], 33).contains(&vec![-1, 4, 4]));
        assert!(witnesses(&[13, 14, 14], 187).contains(&vec![5, -9, -9]));
    }

    #[test]
    fn scalar_collinear_reports_both_conventions() {
        // a = 3·x (mod 19) is the b = λ⁻¹x solution with λ = 3⁻¹ = 13
        let sols = scalar_collinear(&[5, 6, 6, 6], 19, &limits()).unwrap();
        let s = sols.iter().find(|s| s.witness == vec![-4, -1, -1, -1]).unwrap();
        assert_eq!(s.multiplier, 3);
        assert_eq!(s.lambda, 13);
        for s in &sols {
            for (b, x) in s.witness.iter().zip([5, 6, 6, 6]) {
                assert_eq!((s.lambda * b - x).rem_euclid(19), 0);
            }
        }
    }

    #[test]
    fn scalar_collinear_rejects_bad_modulus() {
        assert!(scalar_collinear(&[1, 1], 1, &limits()).is_err());
        let tight = Limits {
            collinear_max: 50,
            ..Limits::default()
        };
        assert!(matches!(
            scalar_collinear(&[1, 1], 51, &tight),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn centered_residue_range() {
        assert_eq!(centered_residue(5, 7), -2);
        assert_eq!(centered_residue(3, 7), 3);
        assert_eq!(centered_residue(2, 4), 2);
        assert_eq!(centered_residue(-1, 4), -1);
    }
}
