use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::config::{family_name, ProblemConfig};
use super::output::{fmt_num, write_atomic, Csv};
use super::{CliError, CommonArgs};
use crate::criteria::{imse_limit, imse_pred};
use crate::model::{Design, PopulationSetup};
use crate::simulation::{compare_mse, empirical_mse, SimulationPlan, MIN_REPLICATES};
use crate::solvers::{closed_form_minimax_weight, efficiency, locally_optimal_weight, MinimaxCase};

/// Deviation allowed between Monte Carlo and closed form, in standard errors.
pub const SIMULATION_Z: f64 = 4.0;
/// Population sizes of the efficiency figures.
pub const FIGURE_SIZES: [usize; 3] = [10, 50, 500];
pub const WEIGHT_FIGURES: [(usize, MinimaxCase); 5] = [
    (1, MinimaxCase::SL),
    (3, MinimaxCase::Q1),
    (4, MinimaxCase::Q2),
    (5, MinimaxCase::Q4),
    (6, MinimaxCase::Q5),
];
pub const EFFICIENCY_FIGURES: [(usize, MinimaxCase); 3] = [
    (2, MinimaxCase::SL),
    (7, MinimaxCase::Q1),
    (8, MinimaxCase::Q2),
];

/// What a command prints, and whether it counts as failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub failure: Option<CliError>,
}

impl From<String> for Report {
    fn from(text: String) -> Self {
        Report {
            text,
            failure: None,
        }
    }
}

/// Writes to `--out` when given and prints nothing, otherwise prints.
fn emit(cfg: &ProblemConfig, text: String) -> Result<String, CliError> {
    match &cfg.out {
        Some(path) => {
            write_atomic(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn key_values(pairs: &[(&str, String)]) -> String {
    pairs.iter().fold(String::new(), |mut s, (k, v)| {
        let _ = writeln!(s, "{k}={v}");
        s
    })
}

fn require_two(n: usize, what: &str) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::config(format!(
            "{what} needs n >= 2 individuals, got n = {n}"
        )));
    }
    Ok(())
}

pub fn minimax(cfg: &ProblemConfig, args: &CommonArgs) -> Result<Report, CliError> {
    let n = cfg.n()?;
    require_two(n, "the minimax weight")?;
    let case = cfg.case()?;
    let family = case.family();
    let w_closed = closed_form_minimax_weight(case, n)?;
    let crit = case.criterion(n)?;
    let w_numeric = crit.optimal_weight()?;
    let report = crit.report(w_numeric)?;
    let abs_diff = (w_closed - w_numeric).abs();

    let text = if args.csv {
        let mut csv = Csv::with_header(&[
            "n",
            "w_closed",
            "w_numeric",
            "abs_diff",
            "criterion",
            "population_term",
            "prediction_term",
        ]);
        csv.row(&[
            n as f64,
            w_closed,
            w_numeric,
            abs_diff,
            report.value,
            report.population_term,
            report.prediction_term,
        ]);
        csv.as_str().to_string()
    } else {
        key_values(&[
            ("case", case.to_string()),
            ("model", family_name(family).into()),
            ("description", case.description().into()),
            ("n", n.to_string()),
            ("w_closed", fmt_num(w_closed)),
            ("w_numeric", fmt_num(w_numeric)),
            ("abs_diff", fmt_num(abs_diff)),
            ("criterion", fmt_num(report.value)),
            ("population_term", fmt_num(report.population_term)),
            ("prediction_term", fmt_num(report.prediction_term)),
        ])
    };
    Ok(emit(cfg, text)?.into())
}

pub fn criterion(cfg: &ProblemConfig, args: &CommonArgs) -> Result<Report, CliError> {
    let basis = cfg.basis()?;
    let measure = cfg.measure(&basis)?;
    let design = cfg.design()?;
    let cov = cfg.covariance()?;
    let setup = PopulationSetup::new(cfg.n()?, cfg.m())?;
    let report = if cov.all_finite() {
        imse_pred(&design, &basis, &measure, &cov, setup)?
    } else {
        imse_limit(&design, &basis, &measure, &cov, setup)?
    };
    let text = if args.csv || cfg.out.is_some() {
        let mut csv = Csv::with_header(&["value", "population_term", "prediction_term"]);
        csv.row(&[report.value, report.population_term, report.prediction_term]);
        csv.as_str().to_string()
    } else {
        key_values(&[
            ("value", fmt_num(report.value)),
            ("population_term", fmt_num(report.population_term)),
            ("prediction_term", fmt_num(report.prediction_term)),
        ])
    };
    Ok(emit(cfg, text)?.into())
}

/// `[rho, d, w_local, w_minimax, efficiency]` for the minimax design of `case`.
pub fn efficiency_rows(
    case: MinimaxCase,
    n: usize,
    m: usize,
    rhos: &[f64],
) -> Result<Vec<[f64; 5]>, CliError> {
    let family = case.family();
    let w_minimax = closed_form_minimax_weight(case, n)?;
    let candidate = family.design(w_minimax)?;
    let setup = PopulationSetup::new(n, m)?;
    let rows = rhos
        .par_iter()
        .map(|&rho| {
            let d = rho / (1.0 - rho);
            let cov = case.tags_at(d)?;
            let w_local = locally_optimal_weight(family, &cov, setup)?;
            let eff = efficiency(&candidate, family, &cov, setup)?;
            Ok([rho, d, w_local, w_minimax, eff])
        })
        .collect::<Result<Vec<_>, crate::DesignError>>()?;
    Ok(rows)
}

pub fn efficiency_table(
    case: MinimaxCase,
    n: usize,
    m: usize,
    rhos: &[f64],
) -> Result<Csv, CliError> {
    let rows = efficiency_rows(case, n, m, rhos)?;
    let mut csv = Csv::with_header(&["rho", "d", "w_local", "w_minimax", "efficiency"]);
    rows.iter().for_each(|r| csv.row(r));
    Ok(csv)
}

pub fn efficiency_curve(cfg: &ProblemConfig, _args: &CommonArgs) -> Result<Report, CliError> {
    let n = cfg.n()?;
    require_two(n, "the minimax design")?;
    let case = cfg.case()?;
    let table = efficiency_table(case, n, cfg.m(), &cfg.rho_grid()?)?;
    Ok(emit(cfg, table.as_str().to_string())?.into())
}

/// Contents of `figure1.csv` .. `figure8.csv`, in file order.
pub fn figure_data(
    n_range: (usize, usize),
    rhos: &[f64],
) -> Result<Vec<(String, String)>, CliError> {
    let mut files = Vec::new();
    for (index, case) in WEIGHT_FIGURES {
        let mut csv = Csv::with_header(&["n", "w_star"]);
        for n in n_range.0..=n_range.1 {
            csv.row(&[n as f64, closed_form_minimax_weight(case, n)?]);
        }
        files.push((index, csv.as_str().to_string()));
    }
    for (index, case) in EFFICIENCY_FIGURES {
        let columns = FIGURE_SIZES
            .iter()
            .map(|&n| efficiency_rows(case, n, 1, rhos))
            .collect::<Result<Vec<_>, _>>()?;
        let mut csv = Csv::with_header(&["rho", "eff_n10", "eff_n50", "eff_n500"]);
        for (i, rho) in rhos.iter().enumerate() {
            csv.row(&[*rho, columns[0][i][4], columns[1][i][4], columns[2][i][4]]);
        }
        files.push((index, csv.as_str().to_string()));
    }
    files.sort_by_key(|(i, _)| *i);
    Ok(files
        .into_iter()
        .map(|(i, text)| (format!("figure{i}.csv"), text))
        .collect())
}

pub fn figures(cfg: &ProblemConfig, _args: &CommonArgs) -> Result<Report, CliError> {
    let dir = cfg
        .out
        .as_deref()
        .ok_or_else(|| CliError::config("figures needs --out DIR"))?;
    let files = figure_data(cfg.n_range()?, &cfg.rho_grid()?)?;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    let mut listing = String::new();
    for (name, text) in &files {
        write_atomic(&Path::new(dir).join(name), text)?;
        let _ = writeln!(listing, "{name}");
    }
    Ok(listing.into())
}

pub fn simulate(cfg: &ProblemConfig, _args: &CommonArgs) -> Result<Report, CliError> {
    let mut cfg = cfg.clone();
    cfg.model.get_or_insert_with(|| "linear".into());
    cfg.design.get_or_insert_with(|| "0:0.5,1:0.5".into());
    let basis = cfg.basis()?;
    let p = basis.p();
    let design: Design = cfg.design()?;
    let m = cfg.m.unwrap_or(2);
    let n = cfg.n.unwrap_or(1);
    let replicates = cfg.replicates.unwrap_or(100_000);
    let seed = cfg.seed.unwrap_or(42);
    if replicates < MIN_REPLICATES {
        return Err(CliError::config(format!(
            "simulation needs at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    let d = match cfg.d {
        None => vec![1.0; p],
        Some(_) => cfg.covariance()?.finite_values().ok_or_else(|| {
            CliError::config("simulation needs finite positive variances, not zero/inf tags")
        })?,
    };
    let f = design.design_matrix(&basis, m)?;
    let plan = SimulationPlan::new(
        f,
        d,
        cfg.beta(p)?,
        cfg.sigma2.unwrap_or(1.0),
        n,
        replicates,
        seed,
    )?;
    let emp = empirical_mse(&plan)?;
    let theo = plan.theoretical_mse()?;
    let cmp = compare_mse(&emp, &theo, SIMULATION_Z)?;
    let text = key_values(&[
        ("n", n.to_string()),
        ("m", m.to_string()),
        ("p", p.to_string()),
        ("replicates", replicates.to_string()),
        ("seed", seed.to_string()),
        ("max_abs_deviation", fmt_num(cmp.max_abs_deviation)),
        ("std_error", fmt_num(cmp.std_error_at_max)),
        ("max_z", fmt_num(cmp.max_z)),
        ("result", if cmp.pass { "pass" } else { "fail" }.into()),
    ]);
    let failure = (!cmp.pass).then(|| {
        CliError::statistical(format!(
            "empirical MSE deviates by {} standard errors (limit {SIMULATION_Z})",
            fmt_num(cmp.max_z)
        ))
    });
    Ok(Report {
        text: emit(&cfg, text)?,
        failure,
    })
}
