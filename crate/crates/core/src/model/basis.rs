use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};

/// Tolerance for points sitting marginally outside the region.
pub const REGION_TOL: f64 = 1e-12;

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    lo: f64,
    hi: f64,
}

impl Region {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(DesignError::InvalidArgument(format!(
                "region [{lo}, {hi}] must be a finite interval with lo < hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo - REGION_TOL && x <= self.hi + REGION_TOL
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(DesignError::OutsideRegion {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

/// Regression function family. Only monomials `1, x, ..., x^(p-1)` are built in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisFamily {
    Monomial,
}

/// The vector `f = (f_1, ..., f_p)` of known regression functions on a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    p: usize,
    family: BasisFamily,
    region: Region,
}

impl BasisSpec {
    /// Monomial basis with `p` functions (degree `p - 1`) on `region`.
    pub fn polynomial(p: usize, region: Region) -> Result<Self> {
        if p == 0 {
            return Err(DesignError::InvalidArgument(
                "a basis needs at least one regression function".into(),
            ));
        }
        Ok(Self {
            p,
            family: BasisFamily::Monomial,
            region,
        })
    }

    /// Straight line `(1, x)` on `[0, 1]`.
    pub fn straight_line() -> Self {
        Self::polynomial(2, Region { lo: 0.0, hi: 1.0 }).expect("valid")
    }

    /// Quadratic `(1, x, x^2)` on `[-1, 1]`.
    pub fn quadratic() -> Self {
        Self::polynomial(3, Region { lo: -1.0, hi: 1.0 }).expect("valid")
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// Evaluates `f(x)`; errors when `x` lies outside the region.
    pub fn evaluate(&self, x: f64) -> Result<DVector<f64>> {
        self.region.check(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.p);
        let mut power = 1.0;
        for t in 0..self.p {
            out[t] = power;
            power *= x;
        }
        out
    }
}
