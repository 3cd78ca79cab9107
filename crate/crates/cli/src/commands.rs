use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::Datelike;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vargamma::estimators::{
    fit_returns, fit_vg_returns, likelihood_ratio_test, lrt_from_logliks, run_efficiency_experiment, FitResult,
    LikelihoodRatio, Model, ModelParams, VgFitOptions,
};
use vargamma::io;
use vargamma::numerics::RngStream;
use vargamma::processes::{
    simulate_brownian, simulate_subordinator, simulate_vg, uniform_grid, BrownianParams,
    SubordinatorParams, VgProcessParams,
};
use vargamma::risk_neutral::{
    calibrate_quotes, price_call_black_scholes, MarketParams, OptionQuote, RiskNeutralModel, VgCallPricer,
};
use vargamma::distributions::LaplaceParams;

use crate::config::RunConfig;
use crate::{
    CalibrateArgs, CliError, EfficiencyArgs, FitArgs, FitModel, LrtArgs, PriceArgs, ProcessKind, QuoteModel,
    SimulateArgs,
};

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn required(name: &str, value: Option<f64>) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--{name} is required for this process")))
}

/// File for path `i` of a multi-path run: `<stem>_<i>.<ext>` next to `out`.
pub fn indexed_path(out: &Path, i: usize) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{i}"),
    };
    out.with_file_name(name)
}

pub fn simulate(a: &SimulateArgs, config: &RunConfig, stdout: &mut impl Write) -> Result<(), CliError> {
    let out = config.require_out(a.out.clone())?;
    if a.paths == 0 {
        return Err(CliError::Usage("--paths must be at least 1".into()));
    }
    let seed = config.seed(a.seed);
    let times = uniform_grid(a.t_max, a.steps)?;
    for i in 0..a.paths {
        let mut rng = RngStream::new(seed, i as u64);
        let grid = match a.process {
            ProcessKind::Bm => {
                simulate_brownian(&BrownianParams::new(a.theta, required("sigma", a.sigma)?)?, &times, &mut rng)?
            }
            ProcessKind::Gamma => {
                simulate_subordinator(&SubordinatorParams::new(1.0, required("nu", a.nu)?)?, &times, &mut rng)?
            }
            ProcessKind::Vg => {
                let p = VgProcessParams::new(a.theta, required("sigma", a.sigma)?, required("nu", a.nu)?)?;
                simulate_vg(&p, &times, &mut rng)?
            }
        };
        let target = if a.paths == 1 { out.clone() } else { indexed_path(&out, i) };
        io::write_path(&grid, create(&target)?)?;
        writeln!(stdout, "{}", target.display()).map_err(out_err)?;
    }
    Ok(())
}

/// JSON document written by `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub dt: f64,
    pub fits: Vec<FitResult>,
    /// Gaussian against VG, one degree of freedom.
    pub lrt: Option<LikelihoodRatio>,
}

fn param_columns(p: &ModelParams) -> (Option<f64>, Option<f64>, Option<f64>) {
    let nu = match p {
        ModelParams::Vg { nu, .. } => Some(*nu),
        _ => None,
    };
    (p.theta(), p.sigma(), nu)
}

fn cell(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |v| format!("{v:.6e}"))
}

pub fn fit(a: &FitArgs, config: &RunConfig, stdout: &mut impl Write) -> Result<(), CliError> {
    let dt = config.dt(a.dt);
    let model = config.model(a.model, FitModel::Both)?;
    let series = io::load_price_series(&a.returns)?;
    let returns = io::log_returns(&series);
    let opts = VgFitOptions {
        quadrature: config.quadrature()?,
        ..VgFitOptions::default()
    };
    let mut fits = Vec::new();
    if matches!(model, FitModel::Gaussian | FitModel::Both) {
        fits.push(fit_returns(&returns, Model::Gaussian, dt)?);
    }
    if matches!(model, FitModel::Vg | FitModel::Both) {
        fits.push(fit_vg_returns(&returns, dt, &opts)?);
    }
    let lrt = match fits.as_slice() {
        [g, v] => Some(likelihood_ratio_test(g, v, 1)?),
        _ => None,
    };

    writeln!(stdout, "{:<10} {:>14} {:>14} {:>14} {:>16} {:>6}", "model", "theta", "sigma", "nu", "logL", "NOBS")
        .map_err(out_err)?;
    for f in &fits {
        let (theta, sigma, nu) = param_columns(&f.params);
        writeln!(
            stdout,
            "{:<10} {:>14} {:>14} {:>14} {:>16.4} {:>6}",
            f.model.name(),
            cell(theta),
            cell(sigma),
            cell(nu),
            f.log_likelihood,
            f.n_obs
        )
        .map_err(out_err)?;
    }
    if let Some(l) = &lrt {
        writeln!(stdout, "LR statistic {:.4} (df {}), p-value {:.4e}", l.statistic, l.df, l.p_value).map_err(out_err)?;
    }

    if let Some(path) = config.out(a.out.clone()) {
        let report = FitReport { dt, fits, lrt };
        let mut f = create(&path)?;
        serde_json::to_writer_pretty(&mut f, &report).map_err(|e| CliError::Serialize(e.to_string()))?;
        writeln!(f).map_err(out_err)?;
    }
    Ok(())
}

pub fn lrt(a: &LrtArgs, stdout: &mut impl Write) -> Result<(), CliError> {
    let r = lrt_from_logliks(a.null_loglik, a.alt_loglik, a.df)?;
    writeln!(stdout, "statistic {:.4}", r.statistic).map_err(out_err)?;
    writeln!(stdout, "df {}", r.df).map_err(out_err)?;
    writeln!(stdout, "p_value {:.6e}", r.p_value).map_err(out_err)?;
    Ok(())
}

/// `LO:HI:N` with N ≥ 1 points, both ends included.
pub fn parse_strike_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("strike grid `{s}` is not LO:HI:N"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect())
}

/// `LO:HI:STEP` sample sizes, HI included when reached.
pub fn parse_n_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("n grid `{s}` is not LO:HI:STEP"));
    let parts: Vec<usize> = s
        .split(':')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts.as_slice() else {
        return Err(bad());
    };
    if *step == 0 || hi < lo {
        return Err(bad());
    }
    Ok((*lo..=*hi).step_by(*step).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub strike: f64,
    pub vg: f64,
    pub black_scholes: f64,
}

pub fn price(a: &PriceArgs, config: &RunConfig, stdout: &mut impl Write) -> Result<(), CliError> {
    let strikes = match (&a.strike_grid, a.strike) {
        (Some(g), _) => parse_strike_grid(g)?,
        (None, Some(k)) => vec![k],
        (None, None) => return Err(CliError::Usage("give --strike or --strike-grid".into())),
    };
    let m = MarketParams::new(a.rate, a.s0, a.maturity)?;
    let p = VgProcessParams::new(a.theta, a.sigma, a.nu)?;
    let pricer = VgCallPricer::new(&p, &m, &config.quadrature()?)?;
    // Black-Scholes volatility matched to the VG variance rate.
    let bs_sigma = (a.sigma * a.sigma + a.theta * a.theta * a.nu).sqrt();
    let rows = strikes
        .iter()
        .map(|&k| {
            Ok(PriceRow {
                strike: k,
                vg: pricer.price(k)?,
                black_scholes: price_call_black_scholes(&m, k, bs_sigma)?,
            })
        })
        .collect::<Result<Vec<_>, vargamma::Error>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Serialize(e.to_string()))?;
    }
    let text = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    match config.out(a.out.clone()) {
        Some(path) => {
            create(&path)?.write_all(&text).map_err(out_err)?;
            if let [r] = rows.as_slice() {
                writeln!(stdout, "vg {:.6}\nblack_scholes {:.6}", r.vg, r.black_scholes).map_err(out_err)?;
            }
        }
        None => stdout.write_all(&text).map_err(out_err)?,
    }
    Ok(())
}

/// One row of the `calibrate` report. Fields of models that were not run, or failed, are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekRow {
    /// ISO week, e.g. `2024-W09`.
    pub week: String,
    pub n_quotes: usize,
    /// `ok`, or the kind of the first error.
    pub status: String,
    pub bs_sigma: Option<f64>,
    pub bs_sse: Option<f64>,
    pub bs_loglik: Option<f64>,
    pub vg_theta: Option<f64>,
    pub vg_sigma: Option<f64>,
    pub vg_nu: Option<f64>,
    pub vg_sse: Option<f64>,
    pub vg_loglik: Option<f64>,
    pub lr_statistic: Option<f64>,
    pub p_value: Option<f64>,
}

fn calibrate_week(week: String, quotes: &[OptionQuote], models: QuoteModel) -> WeekRow {
    let mut row = WeekRow {
        week,
        n_quotes: quotes.len(),
        status: "ok".into(),
        bs_sigma: None,
        bs_sse: None,
        bs_loglik: None,
        vg_theta: None,
        vg_sigma: None,
        vg_nu: None,
        vg_sse: None,
        vg_loglik: None,
        lr_statistic: None,
        p_value: None,
    };
    let fail = |row: &mut WeekRow, e: vargamma::Error| {
        if row.status == "ok" {
            row.status = e.kind().into();
        }
    };
    let bs = if models != QuoteModel::Vg {
        match calibrate_quotes(quotes, RiskNeutralModel::BlackScholes) {
            Ok(c) => {
                row.bs_sigma = c.fit.params.sigma();
                row.bs_sse = Some(c.sse);
                row.bs_loglik = Some(c.fit.log_likelihood);
                Some(c)
            }
            Err(e) => {
                fail(&mut row, e);
                None
            }
        }
    } else {
        None
    };
    let vg = if models != QuoteModel::Bs {
        match calibrate_quotes(quotes, RiskNeutralModel::Vg) {
            Ok(c) => {
                let (theta, sigma, nu) = param_columns(&c.fit.params);
                row.vg_theta = theta;
                row.vg_sigma = sigma;
                row.vg_nu = nu;
                row.vg_sse = Some(c.sse);
                row.vg_loglik = Some(c.fit.log_likelihood);
                Some(c)
            }
            Err(e) => {
                fail(&mut row, e);
                None
            }
        }
    } else {
        None
    };
    if let (Some(bs), Some(vg)) = (bs, vg) {
        match likelihood_ratio_test(&bs.fit, &vg.fit, 2) {
            Ok(l) => {
                row.lr_statistic = Some(l.statistic);
                row.p_value = Some(l.p_value);
            }
            Err(e) => fail(&mut row, e),
        }
    }
    row
}

/// Groups quotes by ISO week of their date, in calendar order.
pub fn group_by_week(records: &[io::QuoteRecord]) -> Vec<(String, Vec<OptionQuote>)> {
    let mut weeks: BTreeMap<(i32, u32), Vec<OptionQuote>> = BTreeMap::new();
    for r in records {
        let w = r.date.iso_week();
        weeks.entry((w.year(), w.week())).or_default().push(r.to_quote());
    }
    weeks
        .into_iter()
        .map(|((y, w), q)| (format!("{y}-W{w:02}"), q))
        .collect()
}

pub fn calibrate(a: &CalibrateArgs, config: &RunConfig, stdout: &mut impl Write) -> Result<(), CliError> {
    let models = config.model(a.models, QuoteModel::Both)?;
    let out = config.require_out(a.out.clone())?;
    let records = io::load_quotes(&a.quotes)?;
    let weeks = group_by_week(&records);
    let rows: Vec<WeekRow> = weeks
        .into_par_iter()
        .map(|(week, quotes)| calibrate_week(week, &quotes, models))
        .collect();

    let mut w = csv::Writer::from_writer(create(&out)?);
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Serialize(e.to_string()))?;
    }
    w.flush().map_err(out_err)?;

    let ok = rows.iter().filter(|r| r.status == "ok").count();
    writeln!(stdout, "weeks {} calibrated {}", rows.len(), ok).map_err(out_err)?;
    if models == QuoteModel::Both {
        let p: Vec<f64> = rows.iter().filter_map(|r| r.p_value).collect();
        for level in [0.05, 0.01] {
            let rejected = p.iter().filter(|&&v| v < level).count();
            writeln!(stdout, "black_scholes rejected at {level}: {rejected} of {}", p.len()).map_err(out_err)?;
        }
    }
    Ok(())
}

pub fn efficiency(a: &EfficiencyArgs, config: &RunConfig, stdout: &mut impl Write) -> Result<(), CliError> {
    let out = config.require_out(a.out.clone())?;
    let n_values = parse_n_grid(&a.n_grid)?;
    let params = LaplaceParams::new(a.theta, a.s)?;
    let rng = RngStream::new(config.seed(a.seed), 0);
    let reports = run_efficiency_experiment(&params, &n_values, config.reps(a.reps), &rng)?;
    io::write_efficiency(&reports, create(&out)?)?;
    writeln!(stdout, "{:>8} {:>14} {:>14}", "n", "mean/median", "sd/mad").map_err(out_err)?;
    for r in &reports {
        writeln!(stdout, "{:>8} {:>14.4} {:>14.4}", r.n, r.mean_over_median(), r.scaled_sd_over_mad()).map_err(out_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strike_grid_parsing() {
        assert_eq!(parse_strike_grid("80:120:5").unwrap(), vec![80.0, 90.0, 100.0, 110.0, 120.0]);
        assert_eq!(parse_strike_grid("90:90:1").unwrap(), vec![90.0]);
        for bad in ["80:120", "120:80:3", "0:10:3", "80:120:0", "a:b:c"] {
            assert!(parse_strike_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn n_grid_parsing() {
        assert_eq!(parse_n_grid("10:40:10").unwrap(), vec![10, 20, 30, 40]);
        assert_eq!(parse_n_grid("99:101:1").unwrap(), vec![99, 100, 101]);
        assert_eq!(parse_n_grid("10:45:10").unwrap(), vec![10, 20, 30, 40]);
        assert!(parse_n_grid("10:5:1").is_err());
        assert!(parse_n_grid("10:20:0").is_err());
    }

    #[test]
    fn indexed_paths() {
        assert_eq!(indexed_path(Path::new("/tmp/out/vg.csv"), 3), PathBuf::from("/tmp/out/vg_3.csv"));
        assert_eq!(indexed_path(Path::new("paths"), 0), PathBuf::from("paths_0"));
    }

    #[test]
    fn iso_weeks_span_year_end() {
        let rec = |d: &str| io::QuoteRecord {
            date: d.parse().unwrap(),
            spot: 100.0,
            rate: 0.01,
            strike: 100.0,
            maturity_days: 30.0,
            mid_price: 2.0,
        };
        // 2024-12-30 and 2025-01-02 share ISO week 2025-W01.
        let weeks = group_by_week(&[rec("2025-01-02"), rec("2024-12-30"), rec("2024-12-27")]);
        let labels: Vec<_> = weeks.iter().map(|(w, q)| (w.as_str(), q.len())).collect();
        assert_eq!(labels, vec![("2024-W52", 1), ("2025-W01", 2)]);
    }
}
