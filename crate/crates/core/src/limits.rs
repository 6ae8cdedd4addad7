use serde::{Deserialize, Serialize};

/// Resource caps for the exhaustive searches. Exceeding any of them is
/// reported as [`Error::CapExceeded`](crate::Error::CapExceeded), never as a
/// silently truncated result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest target accepted by the sum-of-squares enumeration.
    pub sum_of_squares_max: i64,
    /// Largest modulus scanned by the scalar-collinearity search.
    pub collinear_max: i64,
    /// Largest codebook (predicted size) that may be enumerated or streamed.
    pub codebook_max: u64,
    /// Node budget for tree searches (square decompositions, lattice
    /// enumeration).
    pub search_nodes: u64,
    /// Codes up to this size get an exhaustive bijectivity check; larger
    /// ones are sampled.
    pub exhaustive_check_max: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            sum_of_squares_max: 1_000_000,
            collinear_max: 100_000,
            codebook_max: 10_000_000,
            search_nodes: 10_000_000,
            exhaustive_check_max: 100_000,
        }
    }
}
