use std::fmt;
use std::str::FromStr;

use crate::error::{DesignError, Result};

/// Variance of one random coefficient, including the two limiting cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceTag {
    /// Variance tends to zero: the coefficient behaves as a fixed effect.
    Zero,
    /// A known strictly positive variance.
    Finite(f64),
    /// Variance tends to infinity: no shrinkage toward the population mean.
    Infinite,
}

impl VarianceTag {
    pub fn finite(d: f64) -> Result<Self> {
        if d > 0.0 && d.is_finite() {
            Ok(VarianceTag::Finite(d))
        } else {
            Err(DesignError::InvalidArgument(format!(
                "finite variance must be strictly positive, got {d}"
            )))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, VarianceTag::Finite(_))
    }
}

impl fmt::Display for VarianceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarianceTag::Zero => f.write_str("zero"),
            VarianceTag::Finite(d) => write!(f, "{d}"),
            VarianceTag::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for VarianceTag {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(VarianceTag::Zero),
            "inf" | "infinite" | "infinity" => Ok(VarianceTag::Infinite),
            other => {
                let d: f64 = other.parse().map_err(|_| {
                    DesignError::InvalidArgument(format!(
                        "variance `{s}` is neither zero, inf nor a number"
                    ))
                })?;
                VarianceTag::finite(d)
            }
        }
    }
}

/// Diagonal covariance `D = diag(d_1, ..., d_p)` of the random effects, in units of `sigma^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedCovariance {
    entries: Vec<VarianceTag>,
}

impl TaggedCovariance {
    pub fn new(entries: Vec<VarianceTag>) -> Result<Self> {
        if entries.is_empty() {
            return Err(DesignError::InvalidArgument("empty covariance".into()));
        }
        for e in &entries {
            if let VarianceTag::Finite(d) = e {
                VarianceTag::finite(*d)?;
            }
        }
        Ok(Self { entries })
    }

    /// All-finite covariance from plain variances.
    pub fn from_variances(d: &[f64]) -> Result<Self> {
        Self::new(
            d.iter()
                .map(|&v| VarianceTag::finite(v))
                .collect::<Result<_>>()?,
        )
    }

    pub fn entries(&self) -> &[VarianceTag] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(VarianceTag::is_finite)
    }

    /// Finite variances, or `None` if any entry is a limit tag.
    pub fn finite_values(&self) -> Option<Vec<f64>> {
        self.entries
            .iter()
            .map(|e| match e {
                VarianceTag::Finite(d) => Some(*d),
                _ => None,
            })
            .collect()
    }

    /// Replaces limit tags by finite proxies (used to cross-check the structural limits).
    pub fn with_proxies(&self, zero: f64, infinite: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| match e {
                VarianceTag::Zero => VarianceTag::Finite(zero),
                VarianceTag::Infinite => VarianceTag::Finite(infinite),
                f => *f,
            })
            .collect();
        Self { entries }
    }

    pub(crate) fn check_dimension(&self, p: usize) -> Result<()> {
        if self.entries.len() != p {
            return Err(DesignError::DimensionMismatch {
                expected: p,
                got: self.entries.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for TaggedCovariance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for TaggedCovariance {
    type Err = DesignError;

    /// Parses a comma list such as `zero,inf,0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(str::parse::<VarianceTag>)
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

/// Number of individuals `n` and observations per individual `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PopulationSetup {
    n: usize,
    m: usize,
}

impl PopulationSetup {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(DesignError::InvalidArgument(format!(
                "need n >= 1 and m >= 1, got n = {n}, m = {m}"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }
}
