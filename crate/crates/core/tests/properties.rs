//! Randomized checks of the exact machinery against brute-force oracles that
//! share no code with the library (box enumeration, direct residue maps).

use std::collections::HashSet;

use crt_lattice::codes::LinearCode;
use crt_lattice::index_code::twenty_log10_2;
use crt_lattice::ring_arith::{is_prime, sum_of_squares};
use crt_lattice::sim::{monte_carlo, NoiseGrid};
use crt_lattice::{ChannelConfig, CrtBasis, CrtIndexCode, IntegerLattice, Limits, PrimeSet, Subset};
use proptest::prelude::*;
use rand::SeedableRng;

const SMALL_PRIMES: [i64; 4] = [2, 3, 5, 7];

/// Every codeword, by expanding all coefficient tuples.
fn oracle_codebook(q: i64, n: usize, gens: &[Vec<i64>]) -> HashSet<Vec<i64>> {
    let mut words = HashSet::new();
    let mut coeffs = vec![0i64; gens.len()];
    loop {
        let mut w = vec![0i64; n];
        for (c, g) in coeffs.iter().zip(gens) {
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi = (*wi + c * gi).rem_euclid(q);
            }
        }
        words.insert(w);
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return words;
            }
            coeffs[i] += 1;
            if coeffs[i] < q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// Shortest nonzero vector of `σ(C) + qZ^n` over the box `[-q, q]^n`, which
/// contains a shortest vector because `q e_1` is in the lattice.
fn oracle_min_distance_sq(q: i64, n: usize, words: &HashSet<Vec<i64>>) -> u64 {
    let mut best = u64::MAX;
    let mut v = vec![-q; n];
    loop {
        if v.iter().any(|&x| x != 0) {
            let r: Vec<i64> = v.iter().map(|x| x.rem_euclid(q)).collect();
            if words.contains(&r) {
                best = best.min(v.iter().map(|x| (x * x) as u64).sum());
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            v[i] += 1;
            if v[i] <= q {
                break;
            }
            v[i] = -q;
            i += 1;
        }
    }
}

fn code_strategy() -> impl Strategy<Value = (i64, usize, Vec<Vec<i64>>)> {
    (2i64..=15, 1usize..=3, 0usize..=3).prop_flat_map(|(q, n, k)| {
        let row = prop::collection::vec(0..q, n);
        (Just(q), Just(n), prop::collection::vec(row, k))
    })
}

fn prime_subset() -> impl Strategy<Value = Vec<i64>> {
    prop::sample::subsequence(SMALL_PRIMES.to_vec(), 1..=3)
}

/// Random index code with `r <= 3`, `p <= 7`, `n <= 4` and at most two
/// generators per level, small enough to enumerate.
fn index_code_strategy() -> impl Strategy<Value = CrtIndexCode> {
    (prime_subset(), 1usize..=4)
        .prop_flat_map(|(primes, n)| {
            let levels: Vec<_> = primes
                .iter()
                .map(|&p| prop::collection::vec(prop::collection::vec(0..p, n), 0..=2usize.min(n)))
                .collect();
            (Just(primes), Just(n), levels)
        })
        .prop_map(|(primes, n, gens)| {
            let levels = primes
                .iter()
                .zip(gens)
                .map(|(&p, g)| LinearCode::new(p, n, g).unwrap())
                .collect();
            CrtIndexCode::new(PrimeSet::new(primes).unwrap(), levels).unwrap()
        })
}

fn equal_rank_strategy() -> impl Strategy<Value = CrtIndexCode> {
    index_code_strategy().prop_filter("equal nonzero ranks and r >= 2", |c| {
        c.num_levels() >= 2 && c.common_rank().is_some_and(|k| k >= 1)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn construction_a_matches_box_oracle((q, n, gens) in code_strategy()) {
        let limits = Limits::default();
        let code = LinearCode::new(q, n, gens.clone()).unwrap();
        let words = oracle_codebook(q, n, &gens);
        let lattice = IntegerLattice::construction_a(&code, &limits).unwrap();
        prop_assert_eq!(lattice.volume(), (q as u128).pow(n as u32) / words.len() as u128);
        prop_assert_eq!(lattice.min_distance_sq(&limits).unwrap(), oracle_min_distance_sq(q, n, &words));
        // the same lattice from plain generators reaches the same canonical basis
        let mut raw: Vec<Vec<i64>> = gens.clone();
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = q;
            raw.push(e);
        }
        raw.reverse();
        let generic = IntegerLattice::from_generators(&raw).unwrap();
        prop_assert_eq!(generic.basis(), lattice.basis());
        prop_assert_eq!(generic.min_distance_sq(&limits).unwrap(), oracle_min_distance_sq(q, n, &words));
    }

    #[test]
    fn quantizer_matches_box_oracle(
        (q, n, gens) in code_strategy(),
        target in prop::collection::vec(-20.0f64..20.0, 3),
    ) {
        let limits = Limits::default();
        let code = LinearCode::new(q, n, gens.clone()).unwrap();
        let words = oracle_codebook(q, n, &gens);
        let lattice = IntegerLattice::construction_a(&code, &limits).unwrap();
        let t = &target[..n];
        let got = lattice.quantize(t, &limits).unwrap();
        prop_assert!(words.contains(&got.iter().map(|x| x.rem_euclid(q)).collect::<Vec<_>>()));
        let dist = |v: &[i64]| v.iter().zip(t).map(|(&a, &b)| (a as f64 - b).powi(2)).sum::<f64>();
        // oracle: every lattice point within one period of the target's box
        let mut best = f64::INFINITY;
        let lo: Vec<i64> = t.iter().map(|x| x.floor() as i64 - q).collect();
        let mut v = lo.clone();
        'outer: loop {
            if words.contains(&v.iter().map(|x| x.rem_euclid(q)).collect::<Vec<_>>()) {
                best = best.min(dist(&v));
            }
            let mut i = 0;
            loop {
                if i == n {
                    break 'outer;
                }
                v[i] += 1;
                if v[i] <= lo[i] + 2 * q + 1 {
                    break;
                }
                v[i] = lo[i];
                i += 1;
            }
        }
        prop_assert!((dist(&got) - best).abs() < 1e-9, "got {} best {}", dist(&got), best);
    }

    #[test]
    fn crt_idempotents(primes in prime_subset()) {
        let set = PrimeSet::new(primes.clone()).unwrap();
        let crt = CrtBasis::new(&set).unwrap();
        let q = set.modulus();
        for (j, &e) in crt.idempotents().iter().enumerate() {
            for (i, &p) in primes.iter().enumerate() {
                prop_assert_eq!(e.rem_euclid(p), i64::from(i == j));
            }
            prop_assert_eq!((e * e).rem_euclid(q), e);
        }
        prop_assert_eq!(crt.idempotents().iter().sum::<i64>().rem_euclid(q), 1 % q);
    }

    #[test]
    fn crt_encoding_is_a_bijection(code in index_code_strategy(), seed in any::<u64>()) {
        let report = code.check_bijectivity(2_000, 5).unwrap();
        prop_assert!(report.passed());
        // decoding is plain reduction mod each prime
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let msgs = code.random_messages(&mut rng);
        let x = code.encode(&msgs).unwrap();
        for (j, &p) in code.primes().primes().iter().enumerate() {
            let reduced: Vec<i64> = x.iter().map(|v| v.rem_euclid(p)).collect();
            prop_assert_eq!(&reduced, &msgs[j]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn volume_and_distance_identities(code in index_code_strategy()) {
        let limits = Limits::default();
        let d0 = code.d0_sq() as u128;
        for known in Subset::proper_nonempty(code.num_levels()) {
            let sub = code.sublattice_known(known).unwrap();
            let ratio: u128 = known
                .levels()
                .map(|j| (code.primes().primes()[j] as u128).pow(code.ranks()[j] as u32))
                .product();
            prop_assert_eq!(sub.volume(), ratio * code.lattice().volume());
            let product: u128 = known.levels().map(|j| code.primes().primes()[j] as u128).product();
            let d = sub.min_distance_sq(&limits).unwrap() as u128;
            prop_assert!(d0 <= d && d <= product * product * d0, "{} {} {}", known, d0, d);
        }
        prop_assert!(code.verify_volume_distance().unwrap().passed);
    }

    #[test]
    fn gain_never_exceeds_the_rank_bound(code in equal_rank_strategy()) {
        let report = code.gain_report().unwrap();
        let k = code.common_rank().unwrap();
        let bound = code.length() as f64 / k as f64 * twenty_log10_2();
        prop_assert!((report.gain_bound_db.unwrap() - bound).abs() < 1e-12);
        let overall = report.overall_gain_db.unwrap();
        prop_assert!(overall <= bound + 1e-9, "{} > {}", overall, bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sum_of_squares_codes_have_distance_sqrt_q(q in 2i64..400, squares in 2usize..=4, pick in any::<prop::sample::Index>()) {
        let limits = Limits::default();
        let decs = sum_of_squares(q, squares, &limits).unwrap();
        prop_assume!(!decs.is_empty());
        let x = &decs[pick.index(decs.len())].coords;
        let code = LinearCode::new(q, squares, vec![x.clone()]).unwrap();
        let lattice = IntegerLattice::construction_a(&code, &limits).unwrap();
        prop_assert_eq!(lattice.min_distance_sq(&limits).unwrap(), q as u64);
        prop_assert_eq!(x.iter().map(|v| v * v).sum::<i64>(), q);
    }

    #[test]
    fn primality_agrees_with_trial_division(n in -5i64..5000) {
        let oracle = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        prop_assert_eq!(is_prime(n), oracle);
    }
}

#[test]
fn more_side_information_never_hurts_pathwise() {
    let primes = PrimeSet::new(vec![3, 5, 7]).unwrap();
    let levels = vec![
        LinearCode::new(3, 2, vec![vec![1, 1]]).unwrap(),
        LinearCode::new(5, 2, vec![vec![1, 2]]).unwrap(),
        LinearCode::new(7, 2, vec![vec![1, 3]]).unwrap(),
    ];
    let code = CrtIndexCode::new(primes, levels).unwrap();
    let cfg = ChannelConfig::new(
        NoiseGrid::SnrDb {
            start: 5.0,
            stop: 25.0,
            step: 5.0,
        },
        20_000,
        11,
    )
    .unwrap();
    let curves = monte_carlo(&code, &cfg).unwrap();
    for small in &curves {
        for big in &curves {
            if small.subset.is_subset_of(big.subset) {
                for (a, b) in small.points.iter().zip(&big.points) {
                    assert!(
                        b.errors <= a.errors,
                        "{} vs {} at {} dB: {} > {}",
                        big.subset,
                        small.subset,
                        a.snr_db,
                        b.errors,
                        a.errors
                    );
                }
            }
        }
    }
}
