use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{DesignError, Result};
use crate::model::basis::BasisSpec;

/// Weight sums may drift from 1 by this much before they are rejected.
pub const WEIGHT_SUM_DRIFT: f64 = 1e-9;
/// Support points closer than this are merged.
pub const MIN_SEPARATION: f64 = 1e-12;

/// Approximate design: distinct support points with nonnegative weights summing to one.
///
/// Always held in canonical form: support sorted ascending, duplicates merged,
/// weights rescaled to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl Design {
    /// Validates raw support/weight lists and brings them into canonical form.
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(DesignError::InvalidDesign("empty support".into()));
        }
        if support.len() != weights.len() {
            return Err(DesignError::InvalidDesign(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if let Some(x) = support.iter().find(|x| !x.is_finite()) {
            return Err(DesignError::InvalidDesign(format!(
                "non-finite support point {x}"
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(DesignError::InvalidDesign(format!(
                "negative or non-finite weight {w}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_DRIFT {
            return Err(DesignError::InvalidDesign(format!(
                "weights sum to {total}, expected 1"
            )));
        }

        let mut pairs: Vec<(f64, f64)> = support.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match merged.last_mut() {
                Some(last) if x - last.0 < MIN_SEPARATION => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        let (support, mut weights): (Vec<f64>, Vec<f64>) = merged.into_iter().unzip();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { support, weights })
    }

    /// One-point design.
    pub fn point(x: f64) -> Self {
        Self {
            support: vec![x],
            weights: vec![1.0],
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Number of support points carrying positive weight.
    pub fn effective_support(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    /// Standardized information matrix `M = sum_j w_j f(x_j) f(x_j)^T`.
    pub fn information_matrix(&self, basis: &BasisSpec) -> Result<DMatrix<f64>> {
        for &x in &self.support {
            basis.region().check(x)?;
        }
        Ok(information_matrix_unchecked(
            basis,
            &self.support,
            &self.weights,
        ))
    }

    /// Integer replications `m_j` summing to `m`, by largest remainders.
    ///
    /// Each `m_j` starts at `floor(m w_j)`; the leftover observations go to the
    /// largest fractional parts, ties broken toward the smaller support point.
    pub fn exact_replications(&self, m: usize) -> Vec<usize> {
        let scaled: Vec<f64> = self.weights.iter().map(|w| w * m as f64).collect();
        let mut reps: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
        let assigned: usize = reps.iter().sum();
        let mut order: Vec<usize> = (0..reps.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = scaled[a] - scaled[a].floor();
            let rb = scaled[b] - scaled[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &j in order.iter().take(m.saturating_sub(assigned)) {
            reps[j] += 1;
        }
        reps
    }

    /// The `m x p` design matrix `F` of the exact design with `m` observations.
    pub fn design_matrix(&self, basis: &BasisSpec, m: usize) -> Result<DMatrix<f64>> {
        let reps = self.exact_replications(m);
        let mut rows = Vec::with_capacity(m);
        for (&x, &r) in self.support.iter().zip(&reps) {
            let f = basis.evaluate(x)?;
            rows.extend(std::iter::repeat_n(f.transpose(), r));
        }
        Ok(DMatrix::from_rows(&rows))
    }
}

pub(crate) fn information_matrix_unchecked(
    basis: &BasisSpec,
    support: &[f64],
    weights: &[f64],
) -> DMatrix<f64> {
    let p = basis.p();
    let mut m = DMatrix::zeros(p, p);
    for (&x, &w) in support.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let f = basis.evaluate_unchecked(x);
        for i in 0..p {
            for j in 0..=i {
                m[(i, j)] += w * f[i] * f[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            m[(j, i)] = m[(i, j)];
        }
    }
    m
}

impl fmt::Display for Design {
    /// Formats as `x:w,x:w,...`, the same syntax accepted by [`FromStr`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, w)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}:{w}")?;
        }
        Ok(())
    }
}

impl FromStr for Design {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        let mut support = Vec::new();
        let mut weights = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (x, w) = item.split_once(':').ok_or_else(|| {
                DesignError::InvalidDesign(format!("expected `point:weight`, got `{item}`"))
            })?;
            let parse = |t: &str| {
                t.trim().parse::<f64>().map_err(|_| {
                    DesignError::InvalidDesign(format!("cannot parse number `{t}` in `{item}`"))
                })
            };
            support.push(parse(x)?);
            weights.push(parse(w)?);
        }
        Design::new(support, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepted_unchanged() {
        let d = Design::new(vec![0.0, 1.0], vec![0.3, 0.7]).unwrap();
        assert_eq!(d.support(), &[0.0, 1.0]);
        assert_eq!(d.weights(), &[0.3, 0.7]);
    }

    #[test]
    fn sorted_canonically() {
        let d = Design::new(vec![1.0, 0.0], vec![0.7, 0.3]).unwrap();
        assert_eq!(d.support(), &[0.0, 1.0]);
        assert_eq!(d.weights(), &[0.3, 0.7]);
    }

    #[test]
    fn rejects_bad_sum() {
        assert!(Design::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn rejects_negative_and_empty() {
        assert!(Design::new(vec![0.0, 1.0], vec![-0.1, 1.1]).is_err());
        assert!(Design::new(vec![], vec![]).is_err());
        assert!(Design::new(vec![0.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn small_drift_is_rescaled() {
        let d = Design::new(vec![0.0, 1.0], vec![0.5, 0.5 + 5e-10]).unwrap();
        let total: f64 = d.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duplicates_merge() {
        let d = Design::new(vec![0.0, 1.0, 0.0], vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(d.support(), &[0.0, 1.0]);
        assert_eq!(d.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn parse_and_display() {
        let d: Design = "1:0.7, 0:0.3".parse().unwrap();
        assert_eq!(d.to_string(), "0:0.3,1:0.7");
        assert!("0-0.5".parse::<Design>().is_err());
        assert!("0:abc".parse::<Design>().is_err());
    }

    #[test]
    fn information_matrix_examples() {
        let line = BasisSpec::straight_line();
        let d = Design::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let m = d.information_matrix(&line).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 0.5]));

        let quad = BasisSpec::quadratic();
        let d = Design::new(vec![-1.0, 0.0, 1.0], vec![0.25, 0.5, 0.25]).unwrap();
        let m = d.information_matrix(&quad).unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5]);
        assert_eq!(m, expected);

        let m = Design::point(1.0).information_matrix(&line).unwrap();
        assert_eq!(m, DMatrix::from_element(2, 2, 1.0));
    }

    #[test]
    fn replications_sum_to_m() {
        let d = Design::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(d.exact_replications(3), vec![2, 1]);
        let d = Design::new(vec![-1.0, 0.0, 1.0], vec![0.3, 0.4, 0.3]).unwrap();
        assert_eq!(d.exact_replications(10), vec![3, 4, 3]);
        assert_eq!(d.exact_replications(4), vec![1, 2, 1]);
        let d = Design::new(vec![0.0, 0.5, 1.0], vec![0.24, 0.38, 0.38]).unwrap();
        // floors 1, 1, 1 and remainders .2, .9, .9
        assert_eq!(d.exact_replications(5), vec![1, 2, 2]);
    }

    #[test]
    fn design_matrix_rows_follow_replications() {
        let d = Design::new(vec![0.0, 1.0], vec![0.25, 0.75]).unwrap();
        let f = d.design_matrix(&BasisSpec::straight_line(), 4).unwrap();
        assert_eq!(
            f,
            DMatrix::from_row_slice(4, 2, &[1., 0., 1., 1., 1., 1., 1., 1.])
        );
        // F^T F / m reproduces M for a design with integer replications
        let m = d.information_matrix(&BasisSpec::straight_line()).unwrap();
        assert!(((f.transpose() * &f) / 4.0 - m).abs().max() < 1e-15);
    }

    #[test]
    fn information_matrix_rejects_outside_support() {
        let d = Design::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(d.information_matrix(&BasisSpec::straight_line()).is_err());
    }
}
