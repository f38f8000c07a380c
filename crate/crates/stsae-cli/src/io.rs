//! Readers and writers for every file format: adjacency edge lists, plot and
//! covariate CSVs, posterior summaries, draw matrices, and reports.
//!
//! Numbers are written with Rust's shortest round-trip formatting and no
//! locale, so identical runs produce byte-identical files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use stsae_core::estimators::{quantile_sorted, DirectEstimates, MissingReason, TrendSummary};
use stsae_core::graph::AdjacencyGraph;
use stsae_core::model::{Dataset, PosteriorDraws};
use stsae_core::sampler::MetropolisStats;
use stsae_core::simulation::SimulationReport;

use crate::error::{CliError, Result};

/// Maps between external identifiers and internal indices. Areas sort
/// lexicographically, years numerically; both orders are the index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMaps {
    pub areas: Vec<String>,
    pub years: Vec<i64>,
}

impl IndexMaps {
    pub fn area_index(&self) -> BTreeMap<String, usize> {
        self.areas
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect()
    }

    pub fn year_index(&self) -> BTreeMap<i64, usize> {
        self.years
            .iter()
            .enumerate()
            .map(|(i, y)| (*y, i))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub maps: IndexMaps,
    pub covariate_names: Vec<String>,
    /// 1-based indices of the space-varying covariate columns.
    pub svc_selection: Vec<usize>,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

fn validate_identifier(id: &str, path: &Path, line: usize) -> Result<()> {
    if id.is_empty() {
        return Err(CliError::data(format!(
            "{}:{line}: empty identifier",
            path.display()
        )));
    }
    Ok(())
}

fn parse_number(field: &str, path: &Path, line: usize, column: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        CliError::data(format!(
            "{}:{line}: non-numeric value `{field}` in column {column}",
            path.display()
        ))
    })
}

fn parse_year(field: &str, path: &Path, line: usize) -> Result<i64> {
    field.trim().parse::<i64>().map_err(|_| {
        CliError::data(format!(
            "{}:{line}: non-numeric year `{field}`",
            path.display()
        ))
    })
}

/// Plain-text key-value file with `#` comments and `key = value` lines.
pub fn read_key_value_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = read_to_string(path)?;
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::data(format!(
                "{}:{}: expected `key = value`, got `{raw}`",
                path.display(),
                idx + 1
            ))
        })?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Edge list: one `area_a,area_b` pair per line, `#` comments allowed.
pub fn load_adjacency(path: &Path, maps: &IndexMaps) -> Result<AdjacencyGraph> {
    let text = read_to_string(path)?;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| {
            CliError::data(format!(
                "{}:{}: expected `area_a,area_b`, got `{raw}`",
                path.display(),
                idx + 1
            ))
        })?;
        edges.push((a.trim().to_string(), b.trim().to_string()));
    }
    Ok(AdjacencyGraph::from_named_edges(&edges, &maps.area_index())?)
}

/// Loads plot observations and the complete covariate grid.
///
/// The covariate file defines the `(area, year)` universe and must be a full
/// cartesian grid; every plot row must land in it. The intercept column is
/// prepended automatically and `svc_selection` picks the space-varying
/// columns by 1-based position.
pub fn load_dataset(
    plots_path: &Path,
    covariates_path: &Path,
    svc_selection: &[usize],
) -> Result<LoadedDataset> {
    let cov_text = read_to_string(covariates_path)?;
    let mut lines = cov_text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| {
        CliError::data(format!("{}: empty file", covariates_path.display()))
    })?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 3 || columns[0] != "area_id" || columns[1] != "year" {
        return Err(CliError::data(format!(
            "{}: header must be `area_id,year,<covariate columns>`",
            covariates_path.display()
        )));
    }
    let covariate_names: Vec<String> = columns[2..].iter().map(|s| s.to_string()).collect();
    let num_covariates = covariate_names.len();

    for &s in svc_selection {
        if s == 0 || s > num_covariates {
            return Err(CliError::data(format!(
                "space-varying covariate index {s} outside 1..={num_covariates}"
            )));
        }
    }

    let mut grid: BTreeMap<(String, i64), Vec<f64>> = BTreeMap::new();
    let mut areas: BTreeSet<String> = BTreeSet::new();
    let mut years: BTreeSet<i64> = BTreeSet::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 2 + num_covariates {
            return Err(CliError::data(format!(
                "{}:{line_no}: expected {} fields, got {}",
                covariates_path.display(),
                2 + num_covariates,
                fields.len()
            )));
        }
        validate_identifier(fields[0], covariates_path, line_no)?;
        let area = fields[0].to_string();
        let year = parse_year(fields[1], covariates_path, line_no)?;
        let mut values = Vec::with_capacity(num_covariates);
        for (c, field) in fields[2..].iter().enumerate() {
            values.push(parse_number(
                field,
                covariates_path,
                line_no,
                &covariate_names[c],
            )?);
        }
        if grid.insert((area.clone(), year), values).is_some() {
            return Err(CliError::data(format!(
                "{}:{line_no}: duplicate covariate row for ({area}, {year})",
                covariates_path.display()
            )));
        }
        areas.insert(area);
        years.insert(year);
    }

    let maps = IndexMaps {
        areas: areas.into_iter().collect(),
        years: years.into_iter().collect(),
    };
    for area in &maps.areas {
        for &year in &maps.years {
            if !grid.contains_key(&(area.clone(), year)) {
                return Err(CliError::data(format!(
                    "covariate gap: no row for area `{area}`, year {year}"
                )));
            }
        }
    }

    let plots_text = read_to_string(plots_path)?;
    let mut plot_lines = plots_text.lines().enumerate();
    let (_, plots_header) = plot_lines.next().ok_or_else(|| {
        CliError::data(format!("{}: empty file", plots_path.display()))
    })?;
    let plot_columns: Vec<&str> = plots_header.split(',').map(str::trim).collect();
    if plot_columns != ["area_id", "year", "value"] {
        return Err(CliError::data(format!(
            "{}: header must be `area_id,year,value`",
            plots_path.display()
        )));
    }

    let area_index = maps.area_index();
    let year_index = maps.year_index();
    let mut observations = Vec::new();
    for (idx, raw) in plot_lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CliError::data(format!(
                "{}:{line_no}: expected 3 fields, got {}",
                plots_path.display(),
                fields.len()
            )));
        }
        validate_identifier(fields[0], plots_path, line_no)?;
        let year = parse_year(fields[1], plots_path, line_no)?;
        let value = parse_number(fields[2], plots_path, line_no, "value")?;
        let j = *area_index.get(fields[0]).ok_or_else(|| {
            CliError::data(format!(
                "covariate gap: plot area `{}` (line {line_no}) has no covariate rows",
                fields[0]
            ))
        })?;
        let t = *year_index.get(&year).ok_or_else(|| {
            CliError::data(format!(
                "covariate gap: plot year {year} (line {line_no}) has no covariate rows"
            ))
        })?;
        observations.push((j, t, value));
    }

    let num_areas = maps.areas.len();
    let num_times = maps.years.len();
    let mut x = Vec::with_capacity(num_areas * num_times * (num_covariates + 1));
    let mut x_svc = Vec::with_capacity(num_areas * num_times * svc_selection.len());
    for area in &maps.areas {
        for &year in &maps.years {
            let values = &grid[&(area.clone(), year)];
            x.push(1.0);
            x.extend_from_slice(values);
            for &s in svc_selection {
                x_svc.push(values[s - 1]);
            }
        }
    }

    let dataset = Dataset::new(
        num_areas,
        num_times,
        num_covariates,
        svc_selection.len(),
        &observations,
        x,
        x_svc,
    )?;
    Ok(LoadedDataset {
        dataset,
        maps,
        covariate_names,
        svc_selection: svc_selection.to_vec(),
    })
}

/// Loads plot observations alone, with the universe taken from the distinct
/// areas and years present. Intercept-only covariates.
pub fn load_plots_only(plots_path: &Path) -> Result<(Dataset, IndexMaps)> {
    let text = read_to_string(plots_path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| {
        CliError::data(format!("{}: empty file", plots_path.display()))
    })?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns != ["area_id", "year", "value"] {
        return Err(CliError::data(format!(
            "{}: header must be `area_id,year,value`",
            plots_path.display()
        )));
    }
    let mut rows = Vec::new();
    let mut areas = BTreeSet::new();
    let mut years = BTreeSet::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CliError::data(format!(
                "{}:{line_no}: expected 3 fields, got {}",
                plots_path.display(),
                fields.len()
            )));
        }
        validate_identifier(fields[0], plots_path, line_no)?;
        let year = parse_year(fields[1], plots_path, line_no)?;
        let value = parse_number(fields[2], plots_path, line_no, "value")?;
        areas.insert(fields[0].to_string());
        years.insert(year);
        rows.push((fields[0].to_string(), year, value));
    }
    let maps = IndexMaps {
        areas: areas.into_iter().collect(),
        years: years.into_iter().collect(),
    };
    let area_index = maps.area_index();
    let year_index = maps.year_index();
    let observations: Vec<(usize, usize, f64)> = rows
        .into_iter()
        .map(|(a, y, v)| (area_index[&a], year_index[&y], v))
        .collect();
    let x = vec![1.0; maps.areas.len() * maps.years.len()];
    let dataset = Dataset::new(
        maps.areas.len(),
        maps.years.len(),
        0,
        0,
        &observations,
        x,
        vec![],
    )?;
    Ok((dataset, maps))
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

pub fn write_maps(dir: &Path, maps: &IndexMaps) -> Result<()> {
    let mut f = create(&dir.join("area_map.csv"))?;
    writeln!(f, "area_id,index")?;
    for (i, a) in maps.areas.iter().enumerate() {
        writeln!(f, "{a},{i}")?;
    }
    let mut f = create(&dir.join("year_map.csv"))?;
    writeln!(f, "year,t")?;
    for (i, y) in maps.years.iter().enumerate() {
        writeln!(f, "{y},{}", i + 1)?;
    }
    Ok(())
}

pub fn read_maps(dir: &Path) -> Result<IndexMaps> {
    let area_text = read_to_string(&dir.join("area_map.csv"))?;
    let mut areas = Vec::new();
    for raw in area_text.lines().skip(1) {
        if raw.trim().is_empty() {
            continue;
        }
        let (a, _) = raw.split_once(',').ok_or_else(|| {
            CliError::data(format!("{}: malformed area_map.csv", dir.display()))
        })?;
        areas.push(a.to_string());
    }
    let year_text = read_to_string(&dir.join("year_map.csv"))?;
    let mut years = Vec::new();
    for raw in year_text.lines().skip(1) {
        if raw.trim().is_empty() {
            continue;
        }
        let (y, _) = raw.split_once(',').ok_or_else(|| {
            CliError::data(format!("{}: malformed year_map.csv", dir.display()))
        })?;
        years.push(y.trim().parse::<i64>().map_err(|_| {
            CliError::data(format!("{}: non-numeric year in year_map.csv", dir.display()))
        })?);
    }
    Ok(IndexMaps { areas, years })
}

pub struct SummaryStats {
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q500: f64,
    pub q975: f64,
}

pub fn summarize_series(series: &mut [f64]) -> SummaryStats {
    let n = series.len();
    assert!(n > 0);
    let mean = series.iter().sum::<f64>() / n as f64;
    let sd = if n == 1 {
        0.0
    } else {
        (series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    series.sort_by(|a, b| a.partial_cmp(b).unwrap());
    SummaryStats {
        mean,
        sd,
        q025: quantile_sorted(series, 0.025),
        q500: quantile_sorted(series, 0.5),
        q975: quantile_sorted(series, 0.975),
    }
}

pub fn write_mu_summary(dir: &Path, draws: &PosteriorDraws, maps: &IndexMaps) -> Result<()> {
    let mut f = create(&dir.join("mu_summary.csv"))?;
    writeln!(f, "area_id,year,mean,sd,q025,q500,q975")?;
    for (j, area) in maps.areas.iter().enumerate() {
        for (t, year) in maps.years.iter().enumerate() {
            let mut series = draws.mu_series(j, t);
            let s = summarize_series(&mut series);
            writeln!(
                f,
                "{area},{year},{},{},{},{},{}",
                s.mean, s.sd, s.q025, s.q500, s.q975
            )?;
        }
    }
    Ok(())
}

pub fn write_trend_summary(
    dir: &Path,
    summaries: &[TrendSummary],
    maps: &IndexMaps,
) -> Result<()> {
    let mut f = create(&dir.join("trend_summary.csv"))?;
    writeln!(f, "area_id,mean,lower,upper,significant")?;
    for (j, area) in maps.areas.iter().enumerate() {
        let s = &summaries[j];
        writeln!(
            f,
            "{area},{},{},{},{}",
            s.mean, s.lower, s.upper, s.significant
        )?;
    }
    Ok(())
}

fn reason_label(reason: Option<MissingReason>) -> &'static str {
    match reason {
        None => "",
        Some(MissingReason::NoPlots) => "no_plots",
        Some(MissingReason::OnePlot) => "one_plot",
        Some(MissingReason::AllIdentical) => "all_identical",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_direct_estimates(
    dir: &Path,
    estimates: &DirectEstimates,
    maps: &IndexMaps,
) -> Result<()> {
    let mut f = create(&dir.join("direct_estimates.csv"))?;
    writeln!(f, "area_id,year,n,mean,variance,missing_reason")?;
    for (j, area) in maps.areas.iter().enumerate() {
        for (t, year) in maps.years.iter().enumerate() {
            writeln!(
                f,
                "{area},{year},{},{},{},{}",
                estimates.count[j * estimates.num_times + t],
                opt(estimates.mean_at(j, t)),
                opt(estimates.variance_at(j, t)),
                reason_label(estimates.reason_at(j, t))
            )?;
        }
    }
    Ok(())
}

pub fn write_params_summary(dir: &Path, draws: &PosteriorDraws) -> Result<()> {
    let mut f = create(&dir.join("params_summary.csv"))?;
    writeln!(f, "parameter,mean,sd,q025,q500,q975")?;
    if draws.beta.is_empty() {
        return Ok(());
    }
    let s_total = draws.num_draws;
    let p1 = draws.num_coeffs;
    let t1 = draws.num_times + 1;
    let emit = |name: String, series: &mut [f64], f: &mut fs::File| -> Result<()> {
        let s = summarize_series(series);
        writeln!(
            f,
            "{name},{},{},{},{},{}",
            s.mean, s.sd, s.q025, s.q500, s.q975
        )?;
        Ok(())
    };
    for k in 0..t1 {
        for p in 0..p1 {
            let mut series: Vec<f64> = (0..s_total)
                .map(|m| draws.beta[(m * t1 + k) * p1 + p])
                .collect();
            emit(format!("beta_{k}_{p}"), &mut series, &mut f)?;
        }
    }
    for q in 0..draws.num_svc {
        let mut series: Vec<f64> = (0..s_total)
            .map(|m| draws.tau_sq_eta[m * draws.num_svc + q])
            .collect();
        emit(format!("tau_sq_eta_{}", q + 1), &mut series, &mut f)?;
        let mut series: Vec<f64> = (0..s_total)
            .map(|m| draws.rho_eta[m * draws.num_svc + q])
            .collect();
        emit(format!("rho_eta_{}", q + 1), &mut series, &mut f)?;
    }
    for t in 0..draws.num_times {
        let mut series: Vec<f64> = (0..s_total)
            .map(|m| draws.tau_sq_omega[m * draws.num_times + t])
            .collect();
        emit(format!("tau_sq_omega_{}", t + 1), &mut series, &mut f)?;
    }
    let mut series: Vec<f64> = draws.rho_omega.clone();
    emit("rho_omega".to_string(), &mut series, &mut f)?;
    for t in 0..draws.num_times {
        let mut series: Vec<f64> = (0..s_total)
            .map(|m| draws.sigma_sq[m * draws.num_times + t])
            .collect();
        emit(format!("sigma_sq_{}", t + 1), &mut series, &mut f)?;
    }
    Ok(())
}

pub fn write_mu_draws(dir: &Path, draws: &PosteriorDraws, maps: &IndexMaps) -> Result<()> {
    let mut f = create(&dir.join("mu_draws.csv"))?;
    writeln!(f, "draw,area_id,year,mu")?;
    for s in 0..draws.num_draws {
        for (j, area) in maps.areas.iter().enumerate() {
            for (t, year) in maps.years.iter().enumerate() {
                writeln!(f, "{},{area},{year},{}", s + 1, draws.mu_value(s, j, t))?;
            }
        }
    }
    Ok(())
}

pub fn write_sigma_sq_draws(dir: &Path, draws: &PosteriorDraws, maps: &IndexMaps) -> Result<()> {
    let mut f = create(&dir.join("sigma_sq_draws.csv"))?;
    writeln!(f, "draw,year,sigma_sq")?;
    for s in 0..draws.num_draws {
        for (t, year) in maps.years.iter().enumerate() {
            writeln!(f, "{},{year},{}", s + 1, draws.sigma_sq_value(s, t))?;
        }
    }
    Ok(())
}

/// Reads `mu_draws.csv` and `sigma_sq_draws.csv` back into draw matrices.
pub fn read_draws(dir: &Path, maps: &IndexMaps) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let area_index = maps.area_index();
    let year_index = maps.year_index();
    let j_total = maps.areas.len();
    let t_total = maps.years.len();

    let mu_path = dir.join("mu_draws.csv");
    let text = read_to_string(&mu_path)?;
    let mut entries: Vec<(usize, usize, usize, f64)> = Vec::new();
    let mut max_draw = 0usize;
    for (idx, raw) in text.lines().enumerate().skip(1) {
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 4 {
            return Err(CliError::data(format!(
                "{}:{}: expected 4 fields",
                mu_path.display(),
                idx + 1
            )));
        }
        let s: usize = fields[0].trim().parse().map_err(|_| {
            CliError::data(format!("{}:{}: bad draw index", mu_path.display(), idx + 1))
        })?;
        let j = *area_index.get(fields[1].trim()).ok_or_else(|| {
            CliError::data(format!(
                "{}:{}: unknown area `{}`",
                mu_path.display(),
                idx + 1,
                fields[1]
            ))
        })?;
        let year = parse_year(fields[2], &mu_path, idx + 1)?;
        let t = *year_index.get(&year).ok_or_else(|| {
            CliError::data(format!("{}:{}: unknown year {year}", mu_path.display(), idx + 1))
        })?;
        let v = parse_number(fields[3], &mu_path, idx + 1, "mu")?;
        max_draw = max_draw.max(s);
        entries.push((s, j, t, v));
    }
    if max_draw == 0 {
        return Err(CliError::data(format!("{}: no draws", mu_path.display())));
    }
    let mut mu = vec![f64::NAN; max_draw * j_total * t_total];
    for (s, j, t, v) in entries {
        mu[((s - 1) * j_total + j) * t_total + t] = v;
    }
    if mu.iter().any(|v| v.is_nan()) {
        return Err(CliError::data(format!(
            "{}: incomplete draw matrix",
            mu_path.display()
        )));
    }

    let sigma_path = dir.join("sigma_sq_draws.csv");
    let text = read_to_string(&sigma_path)?;
    let mut sigma = vec![f64::NAN; max_draw * t_total];
    for (idx, raw) in text.lines().enumerate().skip(1) {
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::data(format!(
                "{}:{}: expected 3 fields",
                sigma_path.display(),
                idx + 1
            )));
        }
        let s: usize = fields[0].trim().parse().map_err(|_| {
            CliError::data(format!("{}:{}: bad draw index", sigma_path.display(), idx + 1))
        })?;
        let year = parse_year(fields[1], &sigma_path, idx + 1)?;
        let t = *year_index.get(&year).ok_or_else(|| {
            CliError::data(format!(
                "{}:{}: unknown year {year}",
                sigma_path.display(),
                idx + 1
            ))
        })?;
        let v = parse_number(fields[2], &sigma_path, idx + 1, "sigma_sq")?;
        sigma[(s - 1) * t_total + t] = v;
    }
    if sigma.iter().any(|v| v.is_nan()) {
        return Err(CliError::data(format!(
            "{}: incomplete draw matrix",
            sigma_path.display()
        )));
    }
    Ok((mu, sigma, max_draw))
}

pub fn write_metropolis_stats(dir: &Path, per_chain: &[MetropolisStats]) -> Result<()> {
    let mut f = create(&dir.join("metropolis.csv"))?;
    writeln!(f, "chain,parameter,proposals,accepts,acceptance_rate,step_size")?;
    for (c, stats) in per_chain.iter().enumerate() {
        for (q, s) in stats.rho_eta.iter().enumerate() {
            writeln!(
                f,
                "{c},rho_eta_{},{},{},{},{}",
                q + 1,
                s.proposals,
                s.accepts,
                s.acceptance_rate(),
                s.step_size
            )?;
        }
        let s = &stats.rho_omega;
        writeln!(
            f,
            "{c},rho_omega,{},{},{},{}",
            s.proposals,
            s.accepts,
            s.acceptance_rate(),
            s.step_size
        )?;
    }
    Ok(())
}

pub fn write_simulation_report(dir: &Path, report: &SimulationReport) -> Result<()> {
    let mut f = create(&dir.join("simulation_report.csv"))?;
    writeln!(
        f,
        "area,year,estimator,avg_n,bias,rmse,coverage,width,point_replicates,interval_replicates"
    )?;
    for est in &report.estimators {
        for j in 0..report.num_areas {
            for t in 0..report.num_times {
                let idx = j * report.num_times + t;
                let c = &est.cells[idx];
                writeln!(
                    f,
                    "{j},{},{},{},{},{},{},{},{},{}",
                    t + 1,
                    est.name,
                    report.avg_sample_size[idx],
                    opt(c.bias),
                    opt(c.rmse),
                    opt(c.coverage),
                    opt(c.width),
                    c.point_replicates,
                    c.interval_replicates
                )?;
            }
        }
    }
    Ok(())
}

/// Writes a dataset back out in the plot/covariate CSV formats. With
/// shortest round-trip float formatting, load followed by write is lossless.
pub fn write_dataset_csvs(
    plots_path: &Path,
    covariates_path: &Path,
    dataset: &Dataset,
    maps: &IndexMaps,
    covariate_names: &[String],
) -> Result<()> {
    let mut f = create(plots_path)?;
    writeln!(f, "area_id,year,value")?;
    for (j, area) in maps.areas.iter().enumerate() {
        for (t, year) in maps.years.iter().enumerate() {
            for &y in dataset.cell(j, t).values() {
                writeln!(f, "{area},{year},{y}")?;
            }
        }
    }
    let mut f = create(covariates_path)?;
    writeln!(f, "area_id,year,{}", covariate_names.join(","))?;
    for (j, area) in maps.areas.iter().enumerate() {
        for (t, year) in maps.years.iter().enumerate() {
            let row = dataset.x_row(j, t);
            let values: Vec<String> = row[1..].iter().map(|v| v.to_string()).collect();
            writeln!(f, "{area},{year},{}", values.join(","))?;
        }
    }
    Ok(())
}

/// FNV-1a over file bytes, for the run manifest.
pub fn content_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    Ok(format!("{hash:016x}"))
}

pub fn write_manifest(dir: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut f = create(&dir.join("run_manifest.txt"))?;
    for (k, v) in entries {
        writeln!(f, "{k} = {v}")?;
    }
    Ok(())
}
