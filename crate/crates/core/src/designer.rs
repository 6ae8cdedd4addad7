//! Uniform-gain designs.
//!
//! Two families reach a side-information gain that is the same for every
//! side-information set:
//!
//! * canonical designs, where every level code is spanned by `k` unit vectors
//!   sharing one common unit vector, giving `(n/k) · 20 log10 2`;
//! * rank-1 sum-of-squares designs, where `q = Σ x_i²` and every subset
//!   product of the primes has a short collinear witness, giving
//!   `(N/2) · 20 log10 2`. Cartesian powers keep that gain.
//!
//! Every design is pushed through [`CrtIndexCode::gain_report`] before it is
//! returned; a predicted gain that the report does not confirm is an error.

use serde::{Deserialize, Serialize};

use crate::codes::{centered, reduce_mod, LinearCode};
use crate::error::{Error, Result};
use crate::index_code::{twenty_log10_2, CrtIndexCode, GainReport, Subset, UNIFORM_TOLERANCE_DB};
use crate::lattices::IntegerLattice;
use crate::limits::Limits;
use crate::ring_arith::{scalar_collinear, sum_of_squares, CollinearSolution, PrimeSet, SquareDecomposition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DesignKind {
    Canonical {
        /// 1-based index of the unit vector shared by all levels.
        shared_index: usize,
        /// 1-based unit-vector indices spanning each level.
        index_sets: Vec<Vec<usize>>,
    },
    SumOfSquares {
        decomposition: Vec<i64>,
    },
    CartesianLift {
        decomposition: Vec<i64>,
        copies: usize,
    },
}

/// A design whose uniform gain has been confirmed by a gain report.
#[derive(Debug, Clone)]
pub struct UniformDesign {
    pub code: CrtIndexCode,
    pub kind: DesignKind,
    pub predicted_gain_db: f64,
    /// Per-level collinearity solutions (sum-of-squares designs).
    pub level_witnesses: Vec<Vec<CollinearSolution>>,
    pub certificate: Option<ProductCertificate>,
    pub report: GainReport,
}

fn confirm(
    code: CrtIndexCode,
    kind: DesignKind,
    predicted_gain_db: f64,
    level_witnesses: Vec<Vec<CollinearSolution>>,
    certificate: Option<ProductCertificate>,
) -> Result<UniformDesign> {
    let report = code.gain_report()?;
    let confirmed = report.uniform
        && report
            .overall_gain_db
            .is_some_and(|g| (g - predicted_gain_db).abs() <= UNIFORM_TOLERANCE_DB);
    if !confirmed {
        return Err(Error::Inconsistent(format!(
            "predicted uniform gain {predicted_gain_db:.10} not confirmed (uniform = {}, overall = {:?})",
            report.uniform, report.overall_gain_db
        )));
    }
    Ok(UniformDesign {
        code,
        kind,
        predicted_gain_db,
        level_witnesses,
        certificate,
        report,
    })
}

/// Canonical design with the default index sets: the shared index `l` plus
/// the `k - 1` smallest other indices, identical for every level.
pub fn design_canonical(primes: &PrimeSet, n: usize, k: usize, shared_index: usize) -> Result<UniformDesign> {
    if !(1..=n).contains(&shared_index) {
        return Err(Error::InvalidArgument(format!(
            "shared index {shared_index} outside 1..={n}"
        )));
    }
    let mut set = vec![shared_index];
    set.extend((1..=n).filter(|&i| i != shared_index).take(k.saturating_sub(1)));
    set.sort_unstable();
    design_canonical_with(primes, n, k, shared_index, vec![set; primes.len()])
}

/// Canonical design with caller-chosen index sets (1-based), one per level.
pub fn design_canonical_with(
    primes: &PrimeSet,
    n: usize,
    k: usize,
    shared_index: usize,
    index_sets: Vec<Vec<usize>>,
) -> Result<UniformDesign> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "canonical designs need 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    if index_sets.len() != primes.len() {
        return Err(Error::LengthMismatch {
            expected: primes.len(),
            found: index_sets.len(),
        });
    }
    let mut levels = Vec::with_capacity(primes.len());
    for (set, &p) in index_sets.iter().zip(primes.primes()) {
        let mut sorted = set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k || !sorted.contains(&shared_index) || sorted.iter().any(|&i| i == 0 || i > n) {
            return Err(Error::InvalidArgument(format!(
                "index set {set:?} must hold {k} distinct indices in 1..={n} including {shared_index}"
            )));
        }
        let gens = sorted
            .iter()
            .map(|&i| {
                let mut g = vec![0; n];
                g[i - 1] = 1;
                g
            })
            .collect();
        levels.push(LinearCode::new(p, n, gens)?);
    }
    let code = CrtIndexCode::new(primes.clone(), levels)?;
    let predicted = n as f64 / k as f64 * twenty_log10_2();
    confirm(
        code,
        DesignKind::Canonical {
            shared_index,
            index_sets,
        },
        predicted,
        Vec::new(),
        None,
    )
}

/// Witnesses for one subset product `P = Π_{j∈S} p_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductWitness {
    pub subset: Subset,
    pub product: i64,
    pub witnesses: Vec<CollinearSolution>,
}

/// Collinear witnesses for every nonempty subset product of the primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductCertificate {
    pub decomposition: Vec<i64>,
    pub products: Vec<ProductWitness>,
}

impl ProductCertificate {
    pub fn passed(&self) -> bool {
        self.products.iter().all(|p| !p.witnesses.is_empty())
    }

    pub fn failing_products(&self) -> Vec<i64> {
        self.products
            .iter()
            .filter(|p| p.witnesses.is_empty())
            .map(|p| p.product)
            .collect()
    }

    pub fn witness_for(&self, product: i64) -> Option<&ProductWitness> {
        self.products.iter().find(|p| p.product == product)
    }
}

/// Predicted uniform gain of a certified `N`-square design.
pub fn sum_of_squares_gain(squares: usize) -> f64 {
    squares as f64 / 2.0 * twenty_log10_2()
}

/// Searches a collinear witness for all `2^r - 1` subset products.
pub fn certify_subset_products(primes: &PrimeSet, decomposition: &[i64], limits: &Limits) -> Result<ProductCertificate> {
    let norm: i128 = decomposition.iter().map(|&x| x as i128 * x as i128).sum();
    if norm != primes.modulus() as i128 {
        return Err(Error::InvalidArgument(format!(
            "decomposition {decomposition:?} has squared norm {norm}, expected {}",
            primes.modulus()
        )));
    }
    let products = Subset::nonempty(primes.len())
        .into_iter()
        .map(|subset| {
            let product: i64 = subset.levels().map(|j| primes.primes()[j]).product();
            Ok(ProductWitness {
                subset,
                product,
                witnesses: scalar_collinear(decomposition, product, limits)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductCertificate {
        decomposition: decomposition.to_vec(),
        products,
    })
}

#[derive(Debug, Clone)]
pub enum SosOutcome {
    Accepted(Box<UniformDesign>),
    /// Some single-prime congruence system has no solution; 1-based levels.
    Rejected { failing_levels: Vec<usize> },
    /// Every level solves, but some subset product has no witness, so the
    /// gain is not guaranteed uniform.
    NotCertified { certificate: ProductCertificate },
}

#[derive(Debug, Clone)]
pub struct SosCandidate {
    pub decomposition: SquareDecomposition,
    pub level_solutions: Vec<Vec<CollinearSolution>>,
    pub outcome: SosOutcome,
}

#[derive(Debug, Clone)]
pub struct SosSearch {
    pub target: i64,
    pub squares: usize,
    pub candidates: Vec<SosCandidate>,
}

impl SosSearch {
    pub fn accepted(&self) -> impl Iterator<Item = &UniformDesign> {
        self.candidates.iter().filter_map(|c| match &c.outcome {
            SosOutcome::Accepted(d) => Some(d.as_ref()),
            _ => None,
        })
    }

    /// The accepted design with the smallest peak coordinate (lowest peak
    /// amplitude); ties go to the lexicographically smallest decomposition.
    pub fn preferred(&self) -> Option<&UniformDesign> {
        self.candidates
            .iter()
            .filter_map(|c| match &c.outcome {
                SosOutcome::Accepted(d) => Some((c.decomposition.coords.iter().max().copied(), d.as_ref())),
                _ => None,
            })
            .min_by_key(|(peak, _)| *peak)
            .map(|(_, d)| d)
    }

    pub fn diagnostic(&self) -> Option<String> {
        if self.candidates.is_empty() {
            return Some(format!(
                "{} is not a sum of {} squares",
                self.target, self.squares
            ));
        }
        if self.accepted().next().is_none() {
            return Some(format!(
                "none of the {} decompositions of {} into {} squares yields a uniform design",
                self.candidates.len(),
                self.target,
                self.squares
            ));
        }
        None
    }
}

/// Level generator: the solution witness with the smallest centered form.
fn level_generator(solutions: &[CollinearSolution]) -> Option<&CollinearSolution> {
    solutions.iter().min_by(|a, b| a.witness.cmp(&b.witness))
}

/// Tries every decomposition of `q` into `squares` squares as a rank-1 design.
pub fn design_sos(primes: &PrimeSet, squares: usize, limits: &Limits) -> Result<SosSearch> {
    if primes.len() < 2 {
        return Err(Error::InvalidArgument("sum-of-squares designs need at least two primes".into()));
    }
    let q = primes.modulus();
    let mut candidates = Vec::new();
    for decomposition in sum_of_squares(q, squares, limits)? {
        let x = &decomposition.coords;
        let level_solutions = primes
            .primes()
            .iter()
            .map(|&p| scalar_collinear(x, p, limits))
            .collect::<Result<Vec<_>>>()?;
        let failing_levels: Vec<usize> = level_solutions
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_empty())
            .map(|(j, _)| j + 1)
            .collect();
        let outcome = if !failing_levels.is_empty() {
            SosOutcome::Rejected { failing_levels }
        } else {
            let certificate = certify_subset_products(primes, x, limits)?;
            if certificate.passed() {
                let levels = level_solutions
                    .iter()
                    .zip(primes.primes())
                    .map(|(sols, &p)| {
                        let g = level_generator(sols).expect("level has a solution");
                        LinearCode::new(p, x.len(), vec![g.witness.clone()])
                    })
                    .collect::<Result<Vec<_>>>()?;
                let code = CrtIndexCode::with_limits(primes.clone(), levels, *limits)?;
                SosOutcome::Accepted(Box::new(confirm(
                    code,
                    DesignKind::SumOfSquares {
                        decomposition: x.clone(),
                    },
                    sum_of_squares_gain(squares),
                    level_solutions.clone(),
                    Some(certificate),
                )?))
            } else {
                SosOutcome::NotCertified { certificate }
            }
        };
        candidates.push(SosCandidate {
            decomposition,
            level_solutions,
            outcome,
        });
    }
    Ok(SosSearch {
        target: q,
        squares,
        candidates,
    })
}

/// Rank-1 design from one given decomposition; fails if it is not certified.
pub fn design_sos_from(primes: &PrimeSet, decomposition: &[i64], limits: &Limits) -> Result<UniformDesign> {
    let mut sorted = decomposition.iter().map(|x| x.abs()).collect::<Vec<_>>();
    sorted.sort_unstable();
    let search = design_sos(primes, decomposition.len(), limits)?;
    let candidate = search
        .candidates
        .into_iter()
        .find(|c| c.decomposition.coords == sorted)
        .ok_or_else(|| Error::InvalidArgument(format!("{decomposition:?} is not a decomposition of q")))?;
    match candidate.outcome {
        SosOutcome::Accepted(d) => Ok(*d),
        SosOutcome::Rejected { failing_levels } => Err(Error::NotApplicable(format!(
            "decomposition {sorted:?} has no collinear witness at levels {failing_levels:?}"
        ))),
        SosOutcome::NotCertified { certificate } => Err(Error::NotApplicable(format!(
            "decomposition {sorted:?} has no witness for products {:?}",
            certificate.failing_products()
        ))),
    }
}

/// `m` Cartesian copies of a certified rank-1 sum-of-squares design.
pub fn lift_cartesian(design: &UniformDesign, copies: usize) -> Result<UniformDesign> {
    let decomposition = match &design.kind {
        DesignKind::SumOfSquares { decomposition } => decomposition.clone(),
        other => {
            return Err(Error::NotApplicable(format!(
                "Cartesian lifting expects a rank-1 sum-of-squares design, got {other:?}"
            )))
        }
    };
    if copies == 0 {
        return Err(Error::InvalidArgument("need at least one copy".into()));
    }
    if copies == 1 {
        return Ok(design.clone());
    }
    let levels = design
        .code
        .levels()
        .iter()
        .map(|c| c.cartesian_power(copies))
        .collect::<Result<Vec<_>>>()?;
    let code = CrtIndexCode::with_limits(design.code.primes().clone(), levels, *design.code.limits())?;
    confirm(
        code,
        DesignKind::CartesianLift {
            decomposition,
            copies,
        },
        design.predicted_gain_db,
        design.level_witnesses.clone(),
        design.certificate.clone(),
    )
}

/// Outcome of comparing the two-level Construction π_A lattice from
/// two-square primes with the scaled rotated `Z[i]` lattice `⟨(a,b), (-b,a)⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianEquivalence {
    /// `(a, b)` with `a + bi = (a_1 + b_1 i)(a_2 + b_2 i)`.
    pub product: (i64, i64),
    pub modulus: i64,
    pub pia_lattice: IntegerLattice,
    pub gaussian_lattice: IntegerLattice,
    pub combined_generator: Vec<i64>,
}

impl GaussianEquivalence {
    pub fn equal(&self) -> bool {
        self.pia_lattice.basis() == self.gaussian_lattice.basis()
    }
}

pub fn gaussian_equivalence(p1: i64, ab1: (i64, i64), p2: i64, ab2: (i64, i64)) -> Result<GaussianEquivalence> {
    for (p, (a, b)) in [(p1, ab1), (p2, ab2)] {
        if a * a + b * b != p {
            return Err(Error::InvalidArgument(format!("{a}^2 + {b}^2 != {p}")));
        }
    }
    let primes = PrimeSet::new(vec![p1, p2])?;
    let (a1, b1) = ab1;
    let (a2, b2) = ab2;
    let a = a1 * a2 - b1 * b2;
    let b = a2 * b1 + a1 * b2;
    let levels = vec![
        LinearCode::new(p1, 2, vec![reduce_mod(&[a1, b1], p1)])?,
        LinearCode::new(p2, 2, vec![reduce_mod(&[a2, b2], p2)])?,
    ];
    let code = CrtIndexCode::new(primes, levels)?;
    let gaussian = IntegerLattice::from_generators(&[vec![a, b], vec![-b, a]])?;
    let combined_generator = code
        .combined_code()
        .generators()
        .iter()
        .fold(vec![0i64; 2], |acc, g| {
            acc.iter()
                .zip(g)
                .map(|(x, y)| (x + y).rem_euclid(code.modulus()))
                .collect()
        });
    Ok(GaussianEquivalence {
        product: (a, b),
        modulus: a * a + b * b,
        pia_lattice: code.lattice().without_lift(),
        gaussian_lattice: gaussian,
        combined_generator: centered(&combined_generator, code.modulus()),
    })
}

/// Same as [`gaussian_equivalence`], picking the first two-square
/// decomposition of each prime.
pub fn gaussian_equivalence_for(p1: i64, p2: i64, limits: &Limits) -> Result<GaussianEquivalence> {
    let pick = |p: i64| -> Result<(i64, i64)> {
        let d = sum_of_squares(p, 2, limits)?;
        d.first()
            .map(|d| (d.coords[0], d.coords[1]))
            .ok_or_else(|| Error::InvalidArgument(format!("{p} is not a sum of two squares")))
    };
    gaussian_equivalence(p1, pick(p1)?, p2, pick(p2)?)
}
