//! The JSON problem configuration and its resolution into library inputs.
//!
//! Every key is optional; command-line flags override file values. Unknown
//! keys are rejected.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::model::{BasisSpec, Design, Region, TaggedCovariance, VarianceTag, WeightMeasure};
use crate::solvers::{DesignFamily, MinimaxCase, ModelKind};

/// Largest accepted number of individuals for weight sweeps.
pub const MAX_N: usize = 1_000_000;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// `linear`, `quadratic` or `polynomial`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Polynomial degree, only for `polynomial`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Variances, e.g. `"zero,inf,0.5"` or `["zero", "inf", 0.5]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<VarianceList>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    /// Inline design `x:w,x:w,...`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<String>,
    /// `lo:hi:step`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<String>,
    /// `lo:hi`, inclusive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_range: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase", tag = "kind")]
pub enum MeasureConfig {
    /// Uniform on `interval`, or on the whole region when omitted.
    Uniform {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interval: Option<[f64; 2]>,
    },
    Discrete {
        points: Vec<f64>,
        masses: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VarianceList {
    Text(String),
    List(Vec<VarianceItem>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VarianceItem {
    Number(f64),
    Text(String),
}

fn config_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::config(e.to_string())
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fields set in `other` replace the ones here.
    pub fn merge(self, other: ProblemConfig) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { ProblemConfig { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            model, degree, region, measure, n, m, d, case, design, rho_grid, n_range, out, seed,
            replicates, sigma2, beta, threads
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn case(&self) -> Result<MinimaxCase, CliError> {
        let raw = self
            .case
            .as_deref()
            .ok_or_else(|| CliError::config("missing --case (SL, Q1..Q5)"))?;
        let case: MinimaxCase = raw.parse().map_err(config_err)?;
        if let Some(kind) = self.model_kind()? {
            if kind != case.model() {
                return Err(CliError::config(format!(
                    "case {case} belongs to the {} model, not `{}`",
                    model_name(case.model()),
                    self.model.as_deref().unwrap_or_default()
                )));
            }
        }
        Ok(case)
    }

    fn model_kind(&self) -> Result<Option<ModelKind>, CliError> {
        match self.model.as_deref() {
            None | Some("polynomial") => Ok(None),
            Some("linear") | Some("straight-line") => Ok(Some(ModelKind::StraightLine)),
            Some("quadratic") => Ok(Some(ModelKind::Quadratic)),
            Some(other) => Err(CliError::config(format!(
                "unknown model `{other}`; expected linear, quadratic or polynomial"
            ))),
        }
    }

    pub fn basis(&self) -> Result<BasisSpec, CliError> {
        let model = self
            .model
            .as_deref()
            .ok_or_else(|| CliError::config("missing --model"))?;
        let region = |default: Option<(f64, f64)>| -> Result<Region, CliError> {
            let (lo, hi) = match (self.region, default) {
                (Some([lo, hi]), _) => (lo, hi),
                (None, Some(d)) => d,
                (None, None) => {
                    return Err(CliError::config("model `polynomial` needs --region lo:hi"))
                }
            };
            Region::new(lo, hi).map_err(config_err)
        };
        let basis = match model {
            "polynomial" => {
                let degree = self
                    .degree
                    .ok_or_else(|| CliError::config("model `polynomial` needs --degree"))?;
                BasisSpec::polynomial(degree + 1, region(None)?)
            }
            _ => match self.model_kind()?.expect("named model") {
                ModelKind::StraightLine => BasisSpec::polynomial(2, region(Some((0.0, 1.0)))?),
                ModelKind::Quadratic => BasisSpec::polynomial(3, region(Some((-1.0, 1.0)))?),
            },
        };
        basis.map_err(config_err)
    }

    pub fn measure(&self, basis: &BasisSpec) -> Result<WeightMeasure, CliError> {
        match &self.measure {
            None | Some(MeasureConfig::Uniform { interval: None }) => {
                Ok(WeightMeasure::uniform(basis.region()))
            }
            Some(MeasureConfig::Uniform {
                interval: Some([lo, hi]),
            }) => Ok(WeightMeasure::uniform(
                Region::new(*lo, *hi).map_err(config_err)?,
            )),
            Some(MeasureConfig::Discrete { points, masses }) => {
                WeightMeasure::discrete(points.clone(), masses.clone()).map_err(config_err)
            }
        }
    }

    pub fn n(&self) -> Result<usize, CliError> {
        self.n.ok_or_else(|| CliError::config("missing --n"))
    }

    pub fn m(&self) -> usize {
        self.m.unwrap_or(1)
    }

    pub fn covariance(&self) -> Result<TaggedCovariance, CliError> {
        let d = self
            .d
            .as_ref()
            .ok_or_else(|| CliError::config("missing --d"))?;
        match d {
            VarianceList::Text(s) => s.parse().map_err(config_err),
            VarianceList::List(items) => {
                let tags = items
                    .iter()
                    .map(|item| match item {
                        VarianceItem::Number(v) if *v == 0.0 => Ok(VarianceTag::Zero),
                        VarianceItem::Number(v) => VarianceTag::finite(*v),
                        VarianceItem::Text(s) => s.parse(),
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(config_err)?;
                TaggedCovariance::new(tags).map_err(config_err)
            }
        }
    }

    pub fn design(&self) -> Result<Design, CliError> {
        let raw = self
            .design
            .as_deref()
            .ok_or_else(|| CliError::config("missing --design"))?;
        raw.parse().map_err(config_err)
    }

    pub fn rho_grid(&self) -> Result<Vec<f64>, CliError> {
        parse_rho_grid(self.rho_grid.as_deref().unwrap_or("0.01:0.99:0.01"))
    }

    pub fn n_range(&self) -> Result<(usize, usize), CliError> {
        parse_n_range(self.n_range.as_deref().unwrap_or("2:500"))
    }

    pub fn beta(&self, p: usize) -> Result<DVector<f64>, CliError> {
        match &self.beta {
            None => Ok(DVector::zeros(p)),
            Some(b) if b.len() == p => Ok(DVector::from_vec(b.clone())),
            Some(b) => Err(CliError::config(format!(
                "beta has {} entries, model has {p}",
                b.len()
            ))),
        }
    }
}

pub fn model_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::StraightLine => "linear",
        ModelKind::Quadratic => "quadratic",
    }
}

pub fn family_name(family: DesignFamily) -> &'static str {
    match family {
        DesignFamily::StraightLine => "linear",
        DesignFamily::Quadratic => "quadratic",
    }
}

/// Parses `lo:hi:step` into the points `lo, lo + step, ...` not exceeding `hi`; all must lie in (0, 1).
pub fn parse_rho_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::config(format!("rho grid `{text}` is not lo:hi:step")))?;
    let [lo, hi, step] = nums[..] else {
        return Err(CliError::config(format!(
            "rho grid `{text}` is not lo:hi:step"
        )));
    };
    if !(step > 0.0) || !(lo <= hi) {
        return Err(CliError::config(format!(
            "rho grid `{text}` needs step > 0 and lo <= hi"
        )));
    }
    if !(lo > 0.0 && hi < 1.0) {
        return Err(CliError::config(format!(
            "rho grid `{text}` must lie inside (0, 1)"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > MAX_N {
        return Err(CliError::config(format!(
            "rho grid `{text}` has too many points"
        )));
    }
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

/// Parses an inclusive `lo:hi` range of individual counts within `[2, 10^6]`.
pub fn parse_n_range(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || {
        CliError::config(format!(
            "n range `{text}` is not lo:hi with 2 <= lo <= hi <= {MAX_N}"
        ))
    };
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo < 2 || lo > hi || hi > MAX_N {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ProblemConfig::from_json(r#"{"n": 3, "nn": 4}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("nn"));
    }

    #[test]
    fn full_config_parses() {
        let cfg = ProblemConfig::from_json(
            r#"{
                "model": "quadratic", "n": 10, "m": 2, "d": ["zero", 0.5, "inf"],
                "measure": {"kind": "discrete", "points": [-1, 1], "masses": [0.5, 0.5]},
                "case": "Q1", "rho_grid": "0.1:0.9:0.1", "seed": 7
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.covariance().unwrap().to_string(), "zero,0.5,inf");
        assert_eq!(cfg.case().unwrap(), MinimaxCase::Q1);
        assert_eq!(cfg.rho_grid().unwrap().len(), 9);
        let basis = cfg.basis().unwrap();
        assert_eq!(basis.p(), 3);
        assert!(matches!(
            cfg.measure(&basis).unwrap(),
            WeightMeasure::Discrete { .. }
        ));
    }

    #[test]
    fn merge_prefers_overrides() {
        let file = ProblemConfig {
            n: Some(3),
            m: Some(5),
            ..Default::default()
        };
        let flags = ProblemConfig {
            n: Some(9),
            ..Default::default()
        };
        let merged = file.merge(flags);
        assert_eq!(merged.n, Some(9));
        assert_eq!(merged.m, Some(5));
    }

    #[test]
    fn case_must_match_model() {
        let cfg = ProblemConfig {
            model: Some("linear".into()),
            case: Some("Q2".into()),
            ..Default::default()
        };
        assert!(cfg.case().is_err());
    }

    #[test]
    fn polynomial_model() {
        let cfg = ProblemConfig {
            model: Some("polynomial".into()),
            degree: Some(3),
            region: Some([0.0, 2.0]),
            ..Default::default()
        };
        let b = cfg.basis().unwrap();
        assert_eq!(b.p(), 4);
        assert_eq!(b.region().hi(), 2.0);
        let missing = ProblemConfig {
            model: Some("polynomial".into()),
            degree: Some(3),
            ..Default::default()
        };
        assert!(missing.basis().is_err());
    }

    #[test]
    fn grids() {
        let g = parse_rho_grid("0.01:0.99:0.01").unwrap();
        assert_eq!(g.len(), 99);
        assert!((g[98] - 0.99).abs() < 1e-12);
        assert!(parse_rho_grid("0:0.5:0.1").is_err());
        assert!(parse_rho_grid("0.1:0.5").is_err());
        assert!(parse_rho_grid("0.1:0.5:-1").is_err());
        assert_eq!(parse_n_range("2:500").unwrap(), (2, 500));
        assert!(parse_n_range("1:5").is_err());
        assert!(parse_n_range("2:2000000").is_err());
    }
}
