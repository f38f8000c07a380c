//! Synthetic-population generation, replicate sampling, and estimator
//! scoring.
//!
//! The generator is a self-contained stand-in for a landscape-scale
//! population: a deterministic covariate gradient with a random-walk drift,
//! a CAR-smoothed spatial field, an AR(1) temporal drift per area, unit
//! noise, zero truncation, and a zero-inflation knob that forces a fraction
//! of areas to all-zero measurements. Every replicate is a simple random
//! sample without replacement per cell at a fixed intensity.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample as srs_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::estimators::{self, quantile_sorted};
use crate::graph::{AdjacencyGraph, CarEigenSystem};
use crate::linalg;
use crate::model::{Dataset, Hyperparameters, PosteriorDraws};
use crate::sampler::{self, McmcConfig};
use crate::Result;

/// Population generator parameters over a rook-adjacency lattice.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PopulationSpec {
    pub lattice_rows: usize,
    pub lattice_cols: usize,
    pub num_times: usize,
    pub units_per_area: usize,
    /// Baseline unit mean before covariate and random-effect contributions.
    pub intercept: f64,
    /// Slope tying the covariate surface to the unit mean.
    pub covariate_effect: f64,
    pub covariate_min: f64,
    pub covariate_max: f64,
    /// Standard deviation of the covariate's per-year random-walk drift.
    pub covariate_drift_sd: f64,
    /// CAR field variance and correlation for the static area effect.
    pub field_tau_sq: f64,
    pub field_rho: f64,
    /// AR(1) temporal drift per area.
    pub drift_phi: f64,
    pub drift_sd: f64,
    pub unit_noise_sd: f64,
    /// Fraction of areas forced to all-zero unit values.
    pub zero_inflation: f64,
}

impl PopulationSpec {
    pub fn num_areas(&self) -> usize {
        self.lattice_rows * self.lattice_cols
    }

    pub fn validate(&self) -> Result<()> {
        let err = |detail: &str| Error::InvalidSpec {
            detail: String::from(detail),
        };
        if self.num_areas() < 2 {
            return Err(err("lattice must contain at least two areas"));
        }
        if self.num_times == 0 {
            return Err(err("at least one time point required"));
        }
        if self.units_per_area == 0 {
            return Err(err("units_per_area must be positive"));
        }
        if !(self.field_rho > 0.0 && self.field_rho < 1.0) {
            return Err(err("field_rho must lie in (0, 1)"));
        }
        if self.field_tau_sq < 0.0 || self.field_tau_sq.is_nan() {
            return Err(err("field_tau_sq must be non-negative"));
        }
        if self.covariate_min > self.covariate_max {
            return Err(err("covariate_min must not exceed covariate_max"));
        }
        for (name, v) in [
            ("covariate_drift_sd", self.covariate_drift_sd),
            ("drift_sd", self.drift_sd),
            ("unit_noise_sd", self.unit_noise_sd),
        ] {
            if v < 0.0 || v.is_nan() {
                return Err(Error::InvalidSpec {
                    detail: alloc::format!("{name} must be non-negative"),
                });
            }
        }
        if !(0.0..=1.0).contains(&self.zero_inflation) {
            return Err(err("zero_inflation must lie in [0, 1]"));
        }
        if libm::fabs(self.drift_phi) >= 1.0 {
            return Err(err("drift_phi must lie in (-1, 1)"));
        }
        Ok(())
    }
}

/// A fully enumerated synthetic population with its exact cell means.
#[derive(Clone, Debug)]
pub struct SyntheticPopulation {
    pub spec: PopulationSpec,
    pub graph: AdjacencyGraph,
    /// `[J][U][T]` row-major unit values.
    units: Vec<f64>,
    /// `[J][T]` exact per-cell means of the units.
    pub true_mu: Vec<f64>,
    /// `[J][T]` covariate surface observed by every estimator.
    pub covariate: Vec<f64>,
}

impl SyntheticPopulation {
    pub fn num_areas(&self) -> usize {
        self.spec.num_areas()
    }

    pub fn num_times(&self) -> usize {
        self.spec.num_times
    }

    pub fn units_per_area(&self) -> usize {
        self.spec.units_per_area
    }

    pub fn unit_value(&self, j: usize, u: usize, t: usize) -> f64 {
        let t_total = self.spec.num_times;
        self.units[(j * self.spec.units_per_area + u) * t_total + t]
    }

    pub fn true_mu_at(&self, j: usize, t: usize) -> f64 {
        self.true_mu[j * self.spec.num_times + t]
    }

    pub fn covariate_at(&self, j: usize, t: usize) -> f64 {
        self.covariate[j * self.spec.num_times + t]
    }
}

/// Builds the population: covariate gradient plus drift, CAR spatial field,
/// AR(1) drift, unit noise, zero truncation, and exact cell means.
pub fn generate_population(
    spec: &PopulationSpec,
    rng: &mut ChaCha20Rng,
) -> Result<SyntheticPopulation> {
    spec.validate()?;
    let j_total = spec.num_areas();
    let t_total = spec.num_times;
    let units_per_area = spec.units_per_area;
    let graph = AdjacencyGraph::lattice(spec.lattice_rows, spec.lattice_cols)?;

    // Deterministic diagonal gradient over the lattice in [0, 1].
    let denom = (spec.lattice_rows + spec.lattice_cols).saturating_sub(2).max(1) as f64;
    let base: Vec<f64> = (0..j_total)
        .map(|j| {
            let row = j / spec.lattice_cols;
            let col = j % spec.lattice_cols;
            (row + col) as f64 / denom
        })
        .collect();

    // Covariate surface: gradient plus a clamped random-walk drift in time.
    let span = spec.covariate_max - spec.covariate_min;
    let mut covariate = vec![0.0; j_total * t_total];
    for j in 0..j_total {
        let mut level = spec.covariate_min + span * base[j];
        for t in 0..t_total {
            if t > 0 && spec.covariate_drift_sd > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                level += spec.covariate_drift_sd * z;
            }
            covariate[j * t_total + t] = level.clamp(spec.covariate_min, spec.covariate_max);
        }
    }

    // Static CAR field sampled by factoring the sparse precision once.
    let field = if spec.field_tau_sq > 0.0 {
        let precision = graph.precision_matrix(spec.field_rho, spec.field_tau_sq)?;
        let l = precision.cholesky().ok_or(Error::CholeskyFailure {
            context: "population field precision",
        })?;
        let z: Vec<f64> = (0..j_total).map(|_| StandardNormal.sample(rng)).collect();
        linalg::solve_lower_transpose(&l, &z)
    } else {
        vec![0.0; j_total]
    };

    // AR(1) drift per area.
    let mut drift = vec![0.0; j_total * t_total];
    for j in 0..j_total {
        let mut g = 0.0;
        for t in 0..t_total {
            let z: f64 = StandardNormal.sample(rng);
            g = spec.drift_phi * g + spec.drift_sd * z;
            drift[j * t_total + t] = g;
        }
    }

    // Zero-inflated areas mimic sparsely forested counties.
    let all_zero: Vec<bool> = (0..j_total)
        .map(|_| rng.random::<f64>() < spec.zero_inflation)
        .collect();

    let mut units = vec![0.0; j_total * units_per_area * t_total];
    let mut true_mu = vec![0.0; j_total * t_total];
    for j in 0..j_total {
        if all_zero[j] {
            continue;
        }
        // Per-unit persistent noise keeps a unit's trajectory coherent in
        // time; measurement-scale noise is added on top per year.
        let unit_offsets: Vec<f64> = (0..units_per_area)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                spec.unit_noise_sd * z
            })
            .collect();
        for t in 0..t_total {
            let cell_mean = spec.intercept
                + spec.covariate_effect * covariate[j * t_total + t]
                + field[j]
                + drift[j * t_total + t];
            let mut sum = 0.0;
            for u in 0..units_per_area {
                let z: f64 = StandardNormal.sample(rng);
                let value =
                    (cell_mean + unit_offsets[u] + 0.5 * spec.unit_noise_sd * z).max(0.0);
                units[(j * units_per_area + u) * t_total + t] = value;
                sum += value;
            }
            true_mu[j * t_total + t] = sum / units_per_area as f64;
        }
    }

    Ok(SyntheticPopulation {
        spec: spec.clone(),
        graph,
        units,
        true_mu,
        covariate,
    })
}

/// How per-cell sampling intensities are specified.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum IntensitySpec {
    /// The same count everywhere.
    Constant(usize),
    /// A repeating pattern applied in `(area, time)` row-major order.
    Cycle(Vec<usize>),
    /// Full `[J][T]` matrix.
    Matrix(Vec<usize>),
}

impl IntensitySpec {
    pub fn resolve(&self, num_areas: usize, num_times: usize) -> Result<Vec<usize>> {
        let cells = num_areas * num_times;
        match self {
            IntensitySpec::Constant(n) => Ok(vec![*n; cells]),
            IntensitySpec::Cycle(pattern) => {
                if pattern.is_empty() {
                    return Err(Error::InvalidSpec {
                        detail: String::from("intensity cycle pattern is empty"),
                    });
                }
                Ok((0..cells).map(|i| pattern[i % pattern.len()]).collect())
            }
            IntensitySpec::Matrix(matrix) => {
                if matrix.len() != cells {
                    return Err(Error::DimensionMismatch {
                        what: "intensity matrix",
                        expected: cells,
                        actual: matrix.len(),
                    });
                }
                Ok(matrix.clone())
            }
        }
    }
}

/// Simple random sample without replacement of `intensity[j][t]` units per
/// cell, packaged as a model-ready dataset with the population's covariate
/// as both the regression and space-varying column. Selected unit indices
/// are emitted in ascending order, so a census replicate reproduces the
/// population mean exactly.
pub fn draw_replicate(
    pop: &SyntheticPopulation,
    intensity: &[usize],
    rng: &mut ChaCha20Rng,
) -> Result<Dataset> {
    let j_total = pop.num_areas();
    let t_total = pop.num_times();
    let units_per_area = pop.units_per_area();
    if intensity.len() != j_total * t_total {
        return Err(Error::DimensionMismatch {
            what: "intensity matrix",
            expected: j_total * t_total,
            actual: intensity.len(),
        });
    }

    let mut observations = Vec::new();
    for j in 0..j_total {
        for t in 0..t_total {
            let n = intensity[j * t_total + t];
            if n == 0 {
                continue;
            }
            if n > units_per_area {
                return Err(Error::IntensityExceedsPopulation {
                    area: j,
                    year: t,
                    requested: n,
                    available: units_per_area,
                });
            }
            let mut chosen = srs_indices(rng, units_per_area, n).into_vec();
            chosen.sort_unstable();
            for u in chosen {
                observations.push((j, t, pop.unit_value(j, u, t)));
            }
        }
    }

    let mut x = Vec::with_capacity(j_total * t_total * 2);
    let mut x_svc = Vec::with_capacity(j_total * t_total);
    for j in 0..j_total {
        for t in 0..t_total {
            let c = pop.covariate_at(j, t);
            x.push(1.0);
            x.push(c);
            x_svc.push(c);
        }
    }
    Dataset::new(j_total, t_total, 1, 1, &observations, x, x_svc)
}

/// One estimator's output for one replicate and cell.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateCell {
    pub point: Option<f64>,
    pub interval: Option<(f64, f64)>,
}

/// One estimator's full grid of estimates for one replicate.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicateEstimates {
    pub cells: Vec<EstimateCell>,
}

/// Per-cell averages across replicates. Metrics are `None` when no replicate
/// produced the inputs they need; the replicate counts say how many did.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellScore {
    pub bias: Option<f64>,
    pub rmse: Option<f64>,
    pub coverage: Option<f64>,
    pub width: Option<f64>,
    pub point_replicates: usize,
    pub interval_replicates: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimatorScore {
    pub name: String,
    pub cells: Vec<CellScore>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationReport {
    pub num_areas: usize,
    pub num_times: usize,
    pub replicates: usize,
    /// Per-cell average sample size across replicates.
    pub avg_sample_size: Vec<f64>,
    pub estimators: Vec<EstimatorScore>,
}

impl SimulationReport {
    pub fn estimator(&self, name: &str) -> Option<&EstimatorScore> {
        self.estimators.iter().find(|e| e.name == name)
    }
}

/// Averages bias, root mean squared error, interval coverage, and interval
/// width against the exact population means. Cells a replicate could not
/// estimate are excluded from that metric's average and counted instead.
pub fn score_estimators(
    pop: &SyntheticPopulation,
    results: &[(String, Vec<ReplicateEstimates>)],
    avg_sample_size: Vec<f64>,
) -> Result<SimulationReport> {
    let cells = pop.num_areas() * pop.num_times();
    let replicates = results
        .first()
        .map(|(_, reps)| reps.len())
        .unwrap_or_default();
    let mut estimators_out = Vec::with_capacity(results.len());

    for (name, reps) in results {
        for rep in reps {
            if rep.cells.len() != cells {
                return Err(Error::DimensionMismatch {
                    what: "replicate estimate grid",
                    expected: cells,
                    actual: rep.cells.len(),
                });
            }
        }
        let mut scored = Vec::with_capacity(cells);
        let mut any_valid = false;
        for idx in 0..cells {
            let truth = pop.true_mu[idx];
            let mut err_sum = 0.0;
            let mut err_sq_sum = 0.0;
            let mut points = 0usize;
            let mut cover_sum = 0.0;
            let mut width_sum = 0.0;
            let mut intervals = 0usize;
            for rep in reps {
                let cell = rep.cells[idx];
                if let Some(point) = cell.point {
                    err_sum += point - truth;
                    err_sq_sum += (point - truth) * (point - truth);
                    points += 1;
                }
                if let Some((lower, upper)) = cell.interval {
                    cover_sum += f64::from(u8::from(lower <= truth && truth <= upper));
                    width_sum += upper - lower;
                    intervals += 1;
                }
            }
            any_valid |= points > 0;
            scored.push(CellScore {
                bias: (points > 0).then(|| err_sum / points as f64),
                rmse: (points > 0).then(|| libm::sqrt(err_sq_sum / points as f64)),
                coverage: (intervals > 0).then(|| cover_sum / intervals as f64),
                width: (intervals > 0).then(|| width_sum / intervals as f64),
                point_replicates: points,
                interval_replicates: intervals,
            });
        }
        if !any_valid {
            return Err(Error::NoValidReplicates {
                estimator: name.clone(),
            });
        }
        estimators_out.push(EstimatorScore {
            name: name.clone(),
            cells: scored,
        });
    }

    Ok(SimulationReport {
        num_areas: pop.num_areas(),
        num_times: pop.num_times(),
        replicates,
        avg_sample_size,
        estimators: estimators_out,
    })
}

/// A full study: population, sampling plan, replicate count, and the fit
/// configuration applied to every replicate.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudySpec {
    pub population: PopulationSpec,
    pub intensity: IntensitySpec,
    pub replicates: usize,
    pub chains: usize,
    /// Sweeps, burn-in, and thinning for each replicate fit; the seed field
    /// is overridden by the study's master seed.
    pub fit: McmcConfig,
    pub seed: u64,
}

// RNG stream layout under the master seed: population, then one stream per
// replicate draw, then one per (replicate, chain) fit.
const STREAM_POPULATION: u64 = 0;
const STREAM_REPLICATE_BASE: u64 = 1;
const STREAM_FIT_BASE: u64 = 1 << 20;

fn study_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Model-based estimates for one fitted replicate: posterior means and
/// equal-tailed 95% intervals per cell.
pub fn model_estimates(draws: &PosteriorDraws) -> ReplicateEstimates {
    let mut cells = Vec::with_capacity(draws.num_areas * draws.num_times);
    for j in 0..draws.num_areas {
        for t in 0..draws.num_times {
            let mut series = draws.mu_series(j, t);
            series.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mean = series.iter().sum::<f64>() / series.len() as f64;
            cells.push(EstimateCell {
                point: Some(mean),
                interval: Some((
                    quantile_sorted(&series, 0.025),
                    quantile_sorted(&series, 0.975),
                )),
            });
        }
    }
    ReplicateEstimates { cells }
}

/// Design-based estimates for one replicate: cell means with normal-theory
/// intervals wherever the variance exists.
pub fn direct_replicate_estimates(dataset: &Dataset) -> ReplicateEstimates {
    let direct = estimators::direct_estimates(dataset);
    let mut cells = Vec::with_capacity(dataset.num_areas() * dataset.num_times());
    for j in 0..dataset.num_areas() {
        for t in 0..dataset.num_times() {
            cells.push(EstimateCell {
                point: direct.mean_at(j, t),
                interval: direct.interval_at(j, t),
            });
        }
    }
    ReplicateEstimates { cells }
}

/// Generates one population, then for each replicate draws a sample, fits
/// the model, computes direct estimates, and scores both. Deterministic
/// given the master seed; replicate and chain RNG streams are derived by
/// fixed offsets.
pub fn run_study(study: &StudySpec) -> Result<SimulationReport> {
    if study.replicates == 0 {
        return Err(Error::InvalidSpec {
            detail: String::from("at least one replicate required"),
        });
    }
    if study.chains == 0 {
        return Err(Error::InvalidSpec {
            detail: String::from("at least one chain required"),
        });
    }
    let mut pop_rng = study_rng(study.seed, STREAM_POPULATION);
    let pop = generate_population(&study.population, &mut pop_rng)?;
    let intensity = study
        .intensity
        .resolve(pop.num_areas(), pop.num_times())?;
    let sys = CarEigenSystem::new(pop.graph.clone())?;
    let hyper = Hyperparameters::vague(1, 1, pop.num_times());

    let mut model_reps = Vec::with_capacity(study.replicates);
    let mut direct_reps = Vec::with_capacity(study.replicates);
    for r in 0..study.replicates {
        let run = run_study_replicate(study, &pop, &intensity, &sys, &hyper, r)?;
        model_reps.push(run.0);
        direct_reps.push(run.1);
    }

    let avg_n: Vec<f64> = intensity.iter().map(|&n| n as f64).collect();
    score_estimators(
        &pop,
        &[
            (String::from("model"), model_reps),
            (String::from("direct"), direct_reps),
        ],
        avg_n,
    )
}

/// One replicate of a study: sample, fit, and summarize both estimators.
/// Exposed so drivers can parallelize replicates while keeping the exact
/// stream assignment of the sequential run.
pub fn run_study_replicate(
    study: &StudySpec,
    pop: &SyntheticPopulation,
    intensity: &[usize],
    sys: &CarEigenSystem,
    hyper: &Hyperparameters,
    replicate: usize,
) -> Result<(ReplicateEstimates, ReplicateEstimates)> {
    let mut rep_rng = study_rng(study.seed, STREAM_REPLICATE_BASE + replicate as u64);
    let dataset = draw_replicate(pop, intensity, &mut rep_rng)?;

    let mut config = study.fit.clone();
    config.seed = study.seed;
    let mut chain_draws = Vec::with_capacity(study.chains);
    for c in 0..study.chains {
        let stream = STREAM_FIT_BASE + (replicate * study.chains + c) as u64;
        chain_draws.push(sampler::run_chain(&dataset, sys, hyper, &config, stream)?.draws);
    }
    let pooled = PosteriorDraws::pool(&chain_draws)?;

    Ok((
        model_estimates(&pooled),
        direct_replicate_estimates(&dataset),
    ))
}
