//! Subcommand implementations. Argument structs double as the clap surface;
//! each command is an ordinary function so tests can drive it directly.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;

use stsae_core::estimators::{
    compare_waic, direct_estimates, significant_trends, trend_draws, waic, WaicReport,
};
use stsae_core::graph::CarEigenSystem;
use stsae_core::model::{Dataset, PosteriorDraws};
use stsae_core::sampler::{run_chain, ChainRun};
use stsae_core::simulation::{self, IntensitySpec, PopulationSpec, StudySpec};

use crate::checkpoint::{self, Checkpoint};
use crate::config::{parse_f64_list, parse_usize_list, FitOptions, ResolvedRun};
use crate::error::{CliError, Result};
use crate::io;
use crate::parallel::parallel_map;

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", path.display())))
}

fn first_error<T>(results: Vec<std::result::Result<T, stsae_core::Error>>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(r?);
    }
    Ok(out)
}

#[derive(Args, Clone, Debug)]
pub struct FitArgs {
    /// Plot observations CSV (`area_id,year,value`).
    #[arg(long)]
    pub plots: PathBuf,
    /// Covariate CSV (`area_id,year,<columns>`), complete over all cells.
    #[arg(long)]
    pub cov: PathBuf,
    /// Adjacency edge list (`area_a,area_b` per line).
    #[arg(long)]
    pub adj: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional key-value config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// 1-based covariate columns given space-varying coefficients.
    #[arg(long)]
    pub svc: Option<String>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long = "burn-in")]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Worker threads for parallel chains (results identical to sequential).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fit the sub-model without space-varying coefficients.
    #[arg(long = "sub-model")]
    pub sub_model: bool,
    /// Freeze proposal step sizes during burn-in.
    #[arg(long = "no-adapt")]
    pub no_adapt: bool,
    /// Logit-scale proposal standard deviations per space-varying covariate.
    #[arg(long = "proposal-sd-rho-eta")]
    pub proposal_sd_rho_eta: Option<String>,
    #[arg(long = "proposal-sd-rho-omega")]
    pub proposal_sd_rho_omega: Option<f64>,
    /// Write a terminal checkpoint per chain.
    #[arg(long)]
    pub checkpoint: bool,
    #[arg(long)]
    pub quiet: bool,
}

impl FitArgs {
    fn flag_options(&self) -> Result<FitOptions> {
        Ok(FitOptions {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            seed: self.seed,
            chains: self.chains,
            workers: self.workers,
            sub_model: self.sub_model.then_some(true),
            adapt: self.no_adapt.then_some(false),
            save_param_traces: None,
            svc: self.svc.as_deref().map(parse_usize_list).transpose()?,
            level: None,
            proposal_sd_rho_omega: self.proposal_sd_rho_omega,
            proposal_sd_rho_eta: self
                .proposal_sd_rho_eta
                .as_deref()
                .map(parse_f64_list)
                .transpose()?,
            ..FitOptions::default()
        })
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let file_options = match &self.config {
            Some(path) => FitOptions::from_file(path)?,
            None => FitOptions::default(),
        };
        Ok(ResolvedRun::from_options(
            file_options.overlay(self.flag_options()?),
        ))
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let resolved = args.resolve()?;
    ensure_dir(&args.out)?;

    let loaded = io::load_dataset(&args.plots, &args.cov, &resolved.svc)?;
    let dataset = &loaded.dataset;
    let graph = io::load_adjacency(&args.adj, &loaded.maps)?;
    let sys = CarEigenSystem::new(graph)?;
    let hyper = resolved.hyperparameters(
        dataset.num_covariates(),
        dataset.num_svc(),
        dataset.num_times(),
    );

    let streams: Vec<u64> = (0..resolved.chains as u64).collect();
    let runs: Vec<std::result::Result<ChainRun, stsae_core::Error>> =
        parallel_map(streams, resolved.workers, |_, stream| {
            run_chain(dataset, &sys, &hyper, &resolved.mcmc, stream)
        });
    let runs = first_error(runs)?;
    let pooled = PosteriorDraws::pool(
        &runs.iter().map(|r| r.draws.clone()).collect::<Vec<_>>(),
    )?;

    io::write_maps(&args.out, &loaded.maps)?;
    io::write_mu_summary(&args.out, &pooled, &loaded.maps)?;
    if dataset.num_times() >= 2 {
        let summaries = significant_trends(
            &pooled.theta,
            pooled.num_draws,
            dataset.num_areas(),
            resolved.level,
        )?;
        io::write_trend_summary(&args.out, &summaries, &loaded.maps)?;
    }
    io::write_direct_estimates(&args.out, &direct_estimates(dataset), &loaded.maps)?;
    io::write_params_summary(&args.out, &pooled)?;
    io::write_mu_draws(&args.out, &pooled, &loaded.maps)?;
    io::write_sigma_sq_draws(&args.out, &pooled, &loaded.maps)?;
    io::write_metropolis_stats(
        &args.out,
        &runs.iter().map(|r| r.stats.clone()).collect::<Vec<_>>(),
    )?;

    let mut manifest = vec![
        ("tool".to_string(), "stsae".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".to_string(), "fit".to_string()),
        ("plots".to_string(), args.plots.display().to_string()),
        ("plots_hash".to_string(), io::content_hash(&args.plots)?),
        ("covariates".to_string(), args.cov.display().to_string()),
        ("covariates_hash".to_string(), io::content_hash(&args.cov)?),
        ("adjacency".to_string(), args.adj.display().to_string()),
        ("adjacency_hash".to_string(), io::content_hash(&args.adj)?),
        ("num_areas".to_string(), dataset.num_areas().to_string()),
        ("num_times".to_string(), dataset.num_times().to_string()),
        ("num_covariates".to_string(), dataset.num_covariates().to_string()),
        ("num_svc".to_string(), dataset.num_svc().to_string()),
        ("observations".to_string(), dataset.total_count().to_string()),
        ("retained_draws".to_string(), pooled.num_draws.to_string()),
    ];
    if let Some(config) = &args.config {
        manifest.push(("config".to_string(), config.display().to_string()));
        manifest.push(("config_hash".to_string(), io::content_hash(config)?));
    }
    manifest.extend(resolved.manifest_entries());
    io::write_manifest(&args.out, &manifest)?;

    if args.checkpoint {
        for (c, run) in runs.iter().enumerate() {
            checkpoint::save(
                &args.out.join(format!("checkpoint_chain{c}.json")),
                &Checkpoint {
                    format_version: checkpoint::FORMAT_VERSION,
                    iteration: resolved.mcmc.iterations,
                    chain_stream: c as u64,
                    state: run.final_state.clone(),
                    rng: run.rng.clone(),
                },
            )?;
        }
    }

    if !args.quiet {
        println!(
            "fit: {} areas x {} years, {} observations, {} retained draws ({} chains) -> {}",
            dataset.num_areas(),
            dataset.num_times(),
            dataset.total_count(),
            pooled.num_draws,
            resolved.chains,
            args.out.display()
        );
    }
    Ok(())
}

#[derive(Args, Clone, Debug)]
pub struct DirectArgs {
    #[arg(long)]
    pub plots: PathBuf,
    /// Optional covariate CSV; when given, its grid defines the universe of
    /// cells (so areas or years with no plots at all still appear).
    #[arg(long)]
    pub cov: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub quiet: bool,
}

pub fn cmd_direct(args: &DirectArgs) -> Result<()> {
    ensure_dir(&args.out)?;
    let (dataset, maps) = match &args.cov {
        Some(cov) => {
            let loaded = io::load_dataset(&args.plots, cov, &[])?;
            (loaded.dataset, loaded.maps)
        }
        None => io::load_plots_only(&args.plots)?,
    };
    let estimates = direct_estimates(&dataset);
    io::write_maps(&args.out, &maps)?;
    io::write_direct_estimates(&args.out, &estimates, &maps)?;
    io::write_manifest(
        &args.out,
        &[
            ("tool".to_string(), "stsae".to_string()),
            ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("command".to_string(), "direct".to_string()),
            ("plots".to_string(), args.plots.display().to_string()),
            ("plots_hash".to_string(), io::content_hash(&args.plots)?),
        ],
    )?;
    if !args.quiet {
        println!(
            "direct: {} areas x {} years -> {}",
            dataset.num_areas(),
            dataset.num_times(),
            args.out.display()
        );
    }
    Ok(())
}

#[derive(Args, Clone, Debug)]
pub struct TrendArgs {
    /// Directory produced by `fit` (draw files and index maps).
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub quiet: bool,
}

pub fn cmd_trend(args: &TrendArgs) -> Result<()> {
    ensure_dir(&args.out)?;
    let maps = io::read_maps(&args.fit)?;
    let (mu, _sigma, draws) = io::read_draws(&args.fit, &maps)?;
    let theta = trend_draws(&mu, draws, maps.areas.len(), maps.years.len())?;
    let summaries = significant_trends(&theta, draws, maps.areas.len(), args.level)?;
    io::write_trend_summary(&args.out, &summaries, &maps)?;
    if !args.quiet {
        let significant = summaries.iter().filter(|s| s.significant).count();
        println!(
            "trend: {} areas, {significant} significant at level {} -> {}",
            maps.areas.len(),
            args.level,
            args.out.display()
        );
    }
    Ok(())
}

#[derive(Args, Clone, Debug)]
pub struct SummarizeArgs {
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub quiet: bool,
}

pub fn cmd_summarize(args: &SummarizeArgs) -> Result<()> {
    ensure_dir(&args.out)?;
    let maps = io::read_maps(&args.fit)?;
    let (mu, sigma, num_draws) = io::read_draws(&args.fit, &maps)?;
    let draws = PosteriorDraws {
        num_areas: maps.areas.len(),
        num_times: maps.years.len(),
        num_draws,
        mu,
        theta: Vec::new(),
        sigma_sq: sigma,
        beta: Vec::new(),
        tau_sq_eta: Vec::new(),
        rho_eta: Vec::new(),
        tau_sq_omega: Vec::new(),
        rho_omega: Vec::new(),
        num_coeffs: 0,
        num_svc: 0,
        burn_in: 0,
        thin: 1,
    };
    io::write_maps(&args.out, &maps)?;
    io::write_mu_summary(&args.out, &draws, &maps)?;
    if maps.years.len() >= 2 {
        let theta = trend_draws(&draws.mu, num_draws, maps.areas.len(), maps.years.len())?;
        let summaries = significant_trends(&theta, num_draws, maps.areas.len(), args.level)?;
        io::write_trend_summary(&args.out, &summaries, &maps)?;
    }
    if !args.quiet {
        println!(
            "summarize: {} draws over {} areas x {} years -> {}",
            num_draws,
            maps.areas.len(),
            maps.years.len(),
            args.out.display()
        );
    }
    Ok(())
}

#[derive(Args, Clone, Debug)]
pub struct WaicCompareArgs {
    /// Fit directory of the first model (reference layout column).
    pub fit_a: PathBuf,
    /// Fit directory of the second model.
    pub fit_b: PathBuf,
    /// Plot observations both models were fit to.
    #[arg(long)]
    pub plots: PathBuf,
    /// Optional output directory for `waic_compare.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
}

fn waic_for_fit(dir: &Path, plots: &Path) -> Result<(WaicReport, io::IndexMaps)> {
    let maps = io::read_maps(dir)?;
    let (mu, sigma, draws) = io::read_draws(dir, &maps)?;
    let dataset = dataset_from_plots(plots, &maps)?;
    Ok((waic(&dataset, &mu, &sigma, draws)?, maps))
}

/// Intercept-only dataset over a known universe; only cell membership and
/// values matter for predictive scoring.
fn dataset_from_plots(plots: &Path, maps: &io::IndexMaps) -> Result<Dataset> {
    let (raw, raw_maps) = io::load_plots_only(plots)?;
    let area_index = maps.area_index();
    let year_index = maps.year_index();
    let mut observations = Vec::new();
    for j in 0..raw.num_areas() {
        for t in 0..raw.num_times() {
            for &y in raw.cell(j, t).values() {
                let area = &raw_maps.areas[j];
                let year = raw_maps.years[t];
                let jj = *area_index.get(area).ok_or_else(|| {
                    CliError::data(format!("plot area `{area}` not present in the fit"))
                })?;
                let tt = *year_index.get(&year).ok_or_else(|| {
                    CliError::data(format!("plot year {year} not present in the fit"))
                })?;
                observations.push((jj, tt, y));
            }
        }
    }
    let x = vec![1.0; maps.areas.len() * maps.years.len()];
    Ok(Dataset::new(
        maps.areas.len(),
        maps.years.len(),
        0,
        0,
        &observations,
        x,
        vec![],
    )?)
}

fn fmt_pair(value: f64, se: f64) -> String {
    format!("{value:.1} ({se:.1})")
}

pub fn cmd_waic_compare(args: &WaicCompareArgs) -> Result<()> {
    let (report_a, maps_a) = waic_for_fit(&args.fit_a, &args.plots)?;
    let (report_b, maps_b) = waic_for_fit(&args.fit_b, &args.plots)?;
    if maps_a != maps_b {
        return Err(CliError::data(
            "fits were produced on different area/year universes".to_string(),
        ));
    }

    // Differences are taken against the better-scoring model.
    let a_is_best = report_a.elpd >= report_b.elpd;
    let best = if a_is_best { &report_a } else { &report_b };
    let diff_a = compare_waic(&report_a, best)?;
    let diff_b = compare_waic(&report_b, best)?;

    let name = |p: &Path| {
        p.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string())
    };
    let (name_a, name_b) = (name(&args.fit_a), name(&args.fit_b));

    if !args.quiet {
        println!("{:<12} {:>24} {:>24}", "", name_a, name_b);
        println!(
            "{:<12} {:>24} {:>24}",
            "elpd_waic",
            fmt_pair(report_a.elpd, report_a.elpd_se),
            fmt_pair(report_b.elpd, report_b.elpd_se)
        );
        println!(
            "{:<12} {:>24} {:>24}",
            "p_waic",
            fmt_pair(report_a.p_eff, report_a.p_eff_se),
            fmt_pair(report_b.p_eff, report_b.p_eff_se)
        );
        println!(
            "{:<12} {:>24} {:>24}",
            "waic",
            fmt_pair(report_a.waic, report_a.waic_se),
            fmt_pair(report_b.waic, report_b.waic_se)
        );
        println!(
            "{:<12} {:>24} {:>24}",
            "elpd_diff",
            fmt_pair(diff_a.elpd_diff, diff_a.elpd_diff_se),
            fmt_pair(diff_b.elpd_diff, diff_b.elpd_diff_se)
        );
    }

    if let Some(out) = &args.out {
        ensure_dir(out)?;
        let path = out.join("waic_compare.csv");
        let mut rows = String::from("metric,model,value,se\n");
        for (label, report, diff) in [
            (&name_a, &report_a, &diff_a),
            (&name_b, &report_b, &diff_b),
        ] {
            rows.push_str(&format!("elpd_waic,{label},{},{}\n", report.elpd, report.elpd_se));
            rows.push_str(&format!("p_waic,{label},{},{}\n", report.p_eff, report.p_eff_se));
            rows.push_str(&format!("waic,{label},{},{}\n", report.waic, report.waic_se));
            rows.push_str(&format!(
                "elpd_diff,{label},{},{}\n",
                diff.elpd_diff, diff.elpd_diff_se
            ));
        }
        fs::write(&path, rows)
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

#[derive(Args, Clone, Debug)]
pub struct SimulateArgs {
    /// Study specification file (key-value).
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads over replicates; results identical to sequential.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Overrides the seed in the spec file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

fn spec_get<T: std::str::FromStr>(
    map: &std::collections::BTreeMap<String, String>,
    key: &str,
) -> Result<T> {
    let raw = map
        .get(key)
        .ok_or_else(|| CliError::data(format!("study spec missing key `{key}`")))?;
    raw.parse::<T>()
        .map_err(|_| CliError::data(format!("study spec key `{key}`: cannot parse `{raw}`")))
}

fn spec_get_or<T: std::str::FromStr + Copy>(
    map: &std::collections::BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse::<T>()
            .map_err(|_| CliError::data(format!("study spec key `{key}`: cannot parse `{raw}`"))),
    }
}

fn parse_intensity(raw: &str, base: &Path) -> Result<IntensitySpec> {
    let (kind, rest) = raw.split_once(':').ok_or_else(|| {
        CliError::data(format!(
            "intensity must be `constant:<n>`, `cycle:<a,b,...>`, or `csv:<path>`, got `{raw}`"
        ))
    })?;
    match kind.trim() {
        "constant" => Ok(IntensitySpec::Constant(rest.trim().parse().map_err(
            |_| CliError::data(format!("bad constant intensity `{rest}`")),
        )?)),
        "cycle" => Ok(IntensitySpec::Cycle(parse_usize_list(rest)?)),
        "csv" => {
            let path = base.parent().unwrap_or(Path::new(".")).join(rest.trim());
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
            let mut rows = Vec::new();
            for (idx, line) in text.lines().enumerate().skip(1) {
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 3 {
                    return Err(CliError::data(format!(
                        "{}:{}: expected `area,year,n`",
                        path.display(),
                        idx + 1
                    )));
                }
                let area: usize = fields[0].trim().parse().map_err(|_| {
                    CliError::data(format!("{}:{}: bad area index", path.display(), idx + 1))
                })?;
                let year: usize = fields[1].trim().parse().map_err(|_| {
                    CliError::data(format!("{}:{}: bad year index", path.display(), idx + 1))
                })?;
                let n: usize = fields[2].trim().parse().map_err(|_| {
                    CliError::data(format!("{}:{}: bad count", path.display(), idx + 1))
                })?;
                rows.push((area, year, n));
            }
            let j_max = rows.iter().map(|r| r.0).max().unwrap_or(0) + 1;
            let t_max = rows.iter().map(|r| r.1).max().unwrap_or(0);
            let mut matrix = vec![0usize; j_max * t_max];
            for (area, year, n) in rows {
                if year == 0 {
                    return Err(CliError::data("year indices are 1-based".to_string()));
                }
                matrix[area * t_max + (year - 1)] = n;
            }
            Ok(IntensitySpec::Matrix(matrix))
        }
        other => Err(CliError::data(format!("unknown intensity kind `{other}`"))),
    }
}

pub fn load_study_spec(path: &Path) -> Result<StudySpec> {
    let map = io::read_key_value_file(path)?;
    let population = PopulationSpec {
        lattice_rows: spec_get(&map, "rows")?,
        lattice_cols: spec_get(&map, "cols")?,
        num_times: spec_get(&map, "years")?,
        units_per_area: spec_get(&map, "units_per_area")?,
        intercept: spec_get_or(&map, "intercept", 30.0)?,
        covariate_effect: spec_get_or(&map, "covariate_effect", 1.0)?,
        covariate_min: spec_get_or(&map, "covariate_min", 0.0)?,
        covariate_max: spec_get_or(&map, "covariate_max", 60.0)?,
        covariate_drift_sd: spec_get_or(&map, "covariate_drift_sd", 1.0)?,
        field_tau_sq: spec_get_or(&map, "field_tau_sq", 16.0)?,
        field_rho: spec_get_or(&map, "field_rho", 0.9)?,
        drift_phi: spec_get_or(&map, "drift_phi", 0.6)?,
        drift_sd: spec_get_or(&map, "drift_sd", 1.0)?,
        unit_noise_sd: spec_get_or(&map, "unit_noise_sd", 10.0)?,
        zero_inflation: spec_get_or(&map, "zero_inflation", 0.0)?,
    };
    let intensity_raw: String = spec_get(&map, "intensity")?;
    let mut fit = stsae_core::sampler::McmcConfig::new(
        spec_get_or(&map, "iterations", 1500)?,
        spec_get_or(&map, "burn_in", 500)?,
        spec_get_or(&map, "thin", 1)?,
        0,
    );
    fit.save_param_traces = false;
    Ok(StudySpec {
        population,
        intensity: parse_intensity(&intensity_raw, path)?,
        replicates: spec_get(&map, "replicates")?,
        chains: spec_get_or(&map, "chains", 1)?,
        fit,
        seed: spec_get_or(&map, "seed", 0u64)?,
    })
}

/// Runs a study with replicates spread over workers; stream assignment is
/// the same as the sequential path, so results match `run_study` exactly.
pub fn run_study_parallel(
    study: &StudySpec,
    workers: usize,
) -> Result<(stsae_core::simulation::SimulationReport, stsae_core::simulation::SyntheticPopulation)>
{
    use rand::SeedableRng;
    let mut pop_rng = rand_chacha::ChaCha20Rng::seed_from_u64(study.seed);
    pop_rng.set_stream(0);
    let pop = simulation::generate_population(&study.population, &mut pop_rng)?;
    let intensity = study.intensity.resolve(pop.num_areas(), pop.num_times())?;
    let sys = CarEigenSystem::new(pop.graph.clone())?;
    let hyper = stsae_core::model::Hyperparameters::vague(1, 1, pop.num_times());

    let replicate_ids: Vec<usize> = (0..study.replicates).collect();
    let results = parallel_map(replicate_ids, workers, |_, r| {
        simulation::run_study_replicate(study, &pop, &intensity, &sys, &hyper, r)
    });
    let results = first_error(results)?;

    let (model_reps, direct_reps): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let avg_n: Vec<f64> = intensity.iter().map(|&n| n as f64).collect();
    let report = simulation::score_estimators(
        &pop,
        &[
            ("model".to_string(), model_reps),
            ("direct".to_string(), direct_reps),
        ],
        avg_n,
    )?;
    Ok((report, pop))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    ensure_dir(&args.out)?;
    let mut study = load_study_spec(&args.spec)?;
    if let Some(seed) = args.seed {
        study.seed = seed;
    }
    let (report, pop) = run_study_parallel(&study, args.workers)?;
    io::write_simulation_report(&args.out, &report)?;

    // Ground truth alongside the report for downstream plotting.
    let path = args.out.join("true_mu.csv");
    let mut text = String::from("area,year,true_mu,covariate\n");
    for j in 0..pop.num_areas() {
        for t in 0..pop.num_times() {
            text.push_str(&format!(
                "{j},{},{},{}\n",
                t + 1,
                pop.true_mu_at(j, t),
                pop.covariate_at(j, t)
            ));
        }
    }
    fs::write(&path, text)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;

    io::write_manifest(
        &args.out,
        &[
            ("tool".to_string(), "stsae".to_string()),
            ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("command".to_string(), "simulate".to_string()),
            ("spec".to_string(), args.spec.display().to_string()),
            ("spec_hash".to_string(), io::content_hash(&args.spec)?),
            ("seed".to_string(), study.seed.to_string()),
            ("replicates".to_string(), study.replicates.to_string()),
        ],
    )?;
    if !args.quiet {
        println!(
            "simulate: {} replicates over {} areas x {} years -> {}",
            report.replicates,
            report.num_areas,
            report.num_times,
            args.out.display()
        );
    }
    Ok(())
}
