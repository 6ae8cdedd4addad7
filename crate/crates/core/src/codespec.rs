//! JSON code-spec files: the on-disk form of a CRT index code and, when it
//! came out of the designer, the design record that produced it.
//!
//! ```json
//! {
//!   "version": 1,
//!   "primes": [3, 11, 17],
//!   "n": 3,
//!   "levels": [[[2, 1, 1]], [[8, 1, 1]], [[14, 2, 2]]],
//!   "design": { "kind": "sum-of-squares", "decomposition": [13, 14, 14], ... }
//! }
//! ```
//!
//! `levels[j]` is the generator matrix of level `j + 1`, one row per
//! generator, entries already reduced into `[0, p_j)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codes::LinearCode;
use crate::designer::{DesignKind, ProductCertificate, UniformDesign};
use crate::error::{Error, Result};
use crate::index_code::CrtIndexCode;
use crate::limits::Limits;
use crate::ring_arith::{CollinearSolution, PrimeSet};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRecord {
    #[serde(flatten)]
    pub kind: DesignKind,
    pub predicted_gain_db: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub level_witnesses: Vec<Vec<CollinearSolution>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ProductCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpecFile {
    pub version: u32,
    pub primes: Vec<i64>,
    pub n: usize,
    pub levels: Vec<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignRecord>,
}

impl CodeSpecFile {
    pub fn from_code(code: &CrtIndexCode) -> Self {
        CodeSpecFile {
            version: SPEC_VERSION,
            primes: code.primes().primes().to_vec(),
            n: code.length(),
            levels: code.levels().iter().map(|c| c.generators().to_vec()).collect(),
            design: None,
        }
    }

    pub fn from_design(design: &UniformDesign) -> Self {
        let mut spec = Self::from_code(&design.code);
        spec.design = Some(DesignRecord {
            kind: design.kind.clone(),
            predicted_gain_db: design.predicted_gain_db,
            level_witnesses: design.level_witnesses.clone(),
            certificate: design.certificate.clone(),
        });
        spec
    }

    /// Shape and reduction checks that do not need the code itself.
    pub fn validate(&self) -> Result<()> {
        if self.version != SPEC_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported spec version {} (expected {SPEC_VERSION})",
                self.version
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("code length n must be positive".into()));
        }
        if self.levels.len() != self.primes.len() {
            return Err(Error::LengthMismatch {
                expected: self.primes.len(),
                found: self.levels.len(),
            });
        }
        for (j, (gens, &p)) in self.levels.iter().zip(&self.primes).enumerate() {
            for row in gens {
                if row.len() != self.n {
                    return Err(Error::LengthMismatch {
                        expected: self.n,
                        found: row.len(),
                    });
                }
                if let Some(v) = row.iter().find(|&&v| !(0..p).contains(&v)) {
                    return Err(Error::InvalidArgument(format!(
                        "level {} generator entry {v} is not reduced mod {p}",
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_code(&self, limits: Limits) -> Result<CrtIndexCode> {
        self.validate()?;
        let primes = PrimeSet::new(self.primes.clone())?;
        let levels = self
            .levels
            .iter()
            .zip(&self.primes)
            .map(|(gens, &p)| LinearCode::new(p, self.n, gens.clone()))
            .collect::<Result<Vec<_>>>()?;
        CrtIndexCode::with_limits(primes, levels, limits)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: CodeSpecFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("malformed code spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("code spec serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
    }
}
