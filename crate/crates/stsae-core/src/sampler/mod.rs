//! The MCMC engine: one Gibbs sweep over every block in model order, plus
//! chain orchestration, initialization, and draw retention.
//!
//! Sweep order: starting coefficients; each space-varying coefficient block
//! with its variance; the coefficient innovation covariance; Metropolis
//! updates for the spatial correlations; then per time step the coefficient
//! vector, dynamic intercept, spatial innovation variance, and residual
//! variance. A chain is strictly sequential; independent chains share the
//! immutable dataset and spectral cache and own disjoint RNG streams.

pub mod conditionals;
pub mod metropolis;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::Error;
use crate::estimators;
use crate::graph::CarEigenSystem;
use crate::linalg::{self, Mat};
use crate::model::{derive_mu, Dataset, Hyperparameters, ModelState, PosteriorDraws};
use crate::Result;

pub use metropolis::ProposalStats;

const DEFAULT_PROPOSAL_SD: f64 = 0.5;

/// Sampler run configuration.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McmcConfig {
    /// Total sweeps `M`.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Initial logit-scale proposal standard deviations per space-varying
    /// covariate; empty means the default for every covariate.
    pub proposal_sd_rho_eta: Vec<f64>,
    pub proposal_sd_rho_omega: f64,
    /// Retune proposal step sizes every 100 burn-in iterations toward 43%
    /// acceptance; frozen after burn-in either way.
    pub adapt_during_burnin: bool,
    pub seed: u64,
    pub sub_model: bool,
    /// Keep scalar parameter traces (coefficients, variances, correlations)
    /// alongside the latent mean draws.
    pub save_param_traces: bool,
}

impl McmcConfig {
    pub fn new(iterations: usize, burn_in: usize, thin: usize, seed: u64) -> Self {
        McmcConfig {
            iterations,
            burn_in,
            thin,
            proposal_sd_rho_eta: Vec::new(),
            proposal_sd_rho_omega: DEFAULT_PROPOSAL_SD,
            adapt_during_burnin: true,
            seed,
            sub_model: false,
            save_param_traces: true,
        }
    }

    /// The reported run shape: 7,500 sweeps with 2,500 retained.
    pub fn reference_run(seed: u64) -> Self {
        McmcConfig::new(7500, 5000, 1, seed)
    }

    /// Retained draw count `floor((M - burn_in) / thin)`.
    pub fn retained(&self) -> usize {
        if self.iterations <= self.burn_in {
            0
        } else {
            (self.iterations - self.burn_in) / self.thin
        }
    }

    pub fn validate(&self, num_svc: usize) -> Result<()> {
        let err = |detail: &str| Error::InvalidConfig {
            detail: String::from(detail),
        };
        if self.burn_in >= self.iterations {
            return Err(err("burn_in must be smaller than iterations"));
        }
        if self.thin == 0 {
            return Err(err("thin must be at least 1"));
        }
        if self.retained() == 0 {
            return Err(err("no draws would be retained"));
        }
        if !self.proposal_sd_rho_eta.is_empty() && self.proposal_sd_rho_eta.len() != num_svc {
            return Err(err("proposal_sd_rho_eta must be empty or length Q"));
        }
        if self.proposal_sd_rho_eta.iter().any(|&s| s <= 0.0 || s.is_nan())
            || self.proposal_sd_rho_omega <= 0.0
            || self.proposal_sd_rho_omega.is_nan()
        {
            return Err(err("proposal standard deviations must be positive"));
        }
        Ok(())
    }

    fn eta_proposal_sd(&self, q: usize) -> f64 {
        self.proposal_sd_rho_eta
            .get(q)
            .copied()
            .unwrap_or(DEFAULT_PROPOSAL_SD)
    }
}

/// Acceptance statistics for every Metropolis-updated parameter.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetropolisStats {
    pub rho_eta: Vec<ProposalStats>,
    pub rho_omega: ProposalStats,
}

impl MetropolisStats {
    fn new(config: &McmcConfig, num_svc: usize) -> Self {
        MetropolisStats {
            rho_eta: (0..num_svc)
                .map(|q| ProposalStats::new(config.eta_proposal_sd(q)))
                .collect(),
            rho_omega: ProposalStats::new(config.proposal_sd_rho_omega),
        }
    }
}

/// Everything a finished chain hands back: retained draws, proposal
/// statistics, and the terminal state plus RNG for checkpointing.
#[derive(Clone, Debug)]
pub struct ChainRun {
    pub draws: PosteriorDraws,
    pub stats: MetropolisStats,
    pub final_state: ModelState,
    pub rng: ChaCha20Rng,
}

/// Starting point: pooled least-squares coefficients (zeros on a singular
/// normal system), zero random effects, prior-mean variances, and mid-range
/// correlations.
pub fn initial_state(dataset: &Dataset, hyper: &Hyperparameters, sub_model: bool) -> ModelState {
    let p1 = dataset.num_covariates() + 1;
    let t_total = dataset.num_times();
    let j_total = dataset.num_areas();
    let q = if sub_model { 0 } else { dataset.num_svc() };

    let beta_init = pooled_fit(dataset).unwrap_or_else(|| vec![0.0; p1]);
    let prior_mean = |a: f64, b: f64| if a > 1.0 { b / (a - 1.0) } else { b };

    let sigma_xi = {
        let denom = hyper.nu_xi - p1 as f64 - 1.0;
        if denom > 0.0 {
            hyper.h_xi.scale(1.0 / denom)
        } else {
            hyper.h_xi.clone()
        }
    };

    ModelState {
        beta: vec![beta_init; t_total + 1],
        eta_star: vec![vec![0.0; j_total]; q],
        u: vec![vec![0.0; j_total]; t_total + 1],
        sigma_xi,
        tau_sq_eta: (0..q)
            .map(|k| prior_mean(hyper.a_eta[k], hyper.b_eta[k]))
            .collect(),
        rho_eta: vec![0.5; q],
        tau_sq_omega: (0..t_total)
            .map(|t| prior_mean(hyper.a_omega[t], hyper.b_omega[t]))
            .collect(),
        rho_omega: 0.5,
        sigma_sq: vec![prior_mean(hyper.a_sigma, hyper.b_sigma); t_total],
        sub_model,
    }
}

/// Least-squares fit of all observations pooled across cells; `None` when
/// the normal equations are singular.
fn pooled_fit(dataset: &Dataset) -> Option<Vec<f64>> {
    let p1 = dataset.num_covariates() + 1;
    let mut xtx = Mat::zeros(p1, p1);
    let mut xty = vec![0.0; p1];
    for j in 0..dataset.num_areas() {
        for t in 0..dataset.num_times() {
            let cell = dataset.cell(j, t);
            let n = cell.len();
            if n == 0 {
                continue;
            }
            let x = dataset.x_row(j, t);
            xtx.add_scaled_outer(n as f64, x);
            for a in 0..p1 {
                xty[a] += x[a] * cell.sum();
            }
        }
    }
    let l = xtx.cholesky()?;
    let fit = linalg::chol_solve(&l, &xty);
    fit.iter().all(|v| v.is_finite()).then_some(fit)
}

/// One full sweep in model order, mutating `state` in place. `iteration` is
/// 1-based and drives burn-in adaptation gating and error context.
#[allow(clippy::too_many_arguments)]
pub fn gibbs_sweep(
    state: &mut ModelState,
    dataset: &Dataset,
    sys: &CarEigenSystem,
    hyper: &Hyperparameters,
    config: &McmcConfig,
    iteration: usize,
    rng: &mut ChaCha20Rng,
    stats: &mut MetropolisStats,
) -> Result<()> {
    let wrap = |parameter: &'static str| move |e: Error| e.at_iteration(iteration, parameter);
    let adapt = config.adapt_during_burnin && iteration <= config.burn_in;
    let num_svc = state.num_svc();
    let t_total = dataset.num_times();

    state.beta[0] = conditionals::beta0(state, hyper)
        .and_then(|c| c.sample(rng))
        .map_err(wrap("beta_0"))?;

    for k in 0..num_svc {
        state.eta_star[k] = conditionals::eta_star(k, state, dataset, sys)
            .and_then(|c| c.sample(rng))
            .map_err(wrap("eta_star"))?;
        state.tau_sq_eta[k] = conditionals::tau_sq_eta(k, state, hyper, sys)
            .map_err(wrap("tau_sq_eta"))?
            .sample(rng);
    }

    state.sigma_xi = conditionals::sigma_xi(state, hyper)
        .sample(rng)
        .map_err(wrap("sigma_xi"))?;

    for q in 0..num_svc {
        let (rho, _) = metropolis::step(
            state.rho_eta[q],
            |rho| metropolis::rho_eta_log_target(sys, &state.eta_star[q], state.tau_sq_eta[q], rho),
            &mut stats.rho_eta[q],
            adapt,
            rng,
        )
        .map_err(wrap("rho_eta"))?;
        state.rho_eta[q] = rho;
    }

    let (rho_omega, _) = metropolis::step(
        state.rho_omega,
        |rho| metropolis::rho_omega_log_target(sys, &state.u, &state.tau_sq_omega, rho),
        &mut stats.rho_omega,
        adapt,
        rng,
    )
    .map_err(wrap("rho_omega"))?;
    state.rho_omega = rho_omega;

    for t in 0..t_total {
        state.beta[t + 1] = conditionals::beta_t(t, state, dataset)
            .and_then(|c| c.sample(rng))
            .map_err(wrap("beta_t"))?;
        state.u[t + 1] = conditionals::u_t(t, state, dataset, sys)
            .and_then(|c| c.sample(rng))
            .map_err(wrap("u_t"))?;
        state.tau_sq_omega[t] = conditionals::tau_sq_omega(t, state, hyper, sys)
            .map_err(wrap("tau_sq_omega"))?
            .sample(rng);
        state.sigma_sq[t] = conditionals::sigma_sq(t, state, dataset, hyper).sample(rng);
    }

    Ok(())
}

/// Runs one chain: `iterations` sweeps with draws retained after burn-in at
/// the thinning stride. The RNG stream is derived from the seed and
/// `chain_stream`, so chains are reproducible and disjoint.
pub fn run_chain(
    dataset: &Dataset,
    sys: &CarEigenSystem,
    hyper: &Hyperparameters,
    config: &McmcConfig,
    chain_stream: u64,
) -> Result<ChainRun> {
    let num_svc = if config.sub_model { 0 } else { dataset.num_svc() };
    config.validate(num_svc)?;
    hyper.validate(dataset.num_covariates(), dataset.num_svc(), dataset.num_times())?;
    if sys.num_areas() != dataset.num_areas() {
        return Err(Error::DimensionMismatch {
            what: "spectral cache area count",
            expected: dataset.num_areas(),
            actual: sys.num_areas(),
        });
    }

    let j_total = dataset.num_areas();
    let t_total = dataset.num_times();
    let p1 = dataset.num_covariates() + 1;
    let retained = config.retained();

    let mut state = initial_state(dataset, hyper, config.sub_model);
    state.validate(dataset)?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    rng.set_stream(chain_stream);
    let mut stats = MetropolisStats::new(config, num_svc);

    let mut draws = PosteriorDraws {
        num_areas: j_total,
        num_times: t_total,
        num_draws: 0,
        mu: Vec::with_capacity(retained * j_total * t_total),
        theta: Vec::new(),
        sigma_sq: Vec::with_capacity(retained * t_total),
        beta: Vec::new(),
        tau_sq_eta: Vec::new(),
        rho_eta: Vec::new(),
        tau_sq_omega: Vec::new(),
        rho_omega: Vec::new(),
        num_coeffs: p1,
        num_svc,
        burn_in: config.burn_in,
        thin: config.thin,
    };

    for iteration in 1..=config.iterations {
        gibbs_sweep(
            &mut state, dataset, sys, hyper, config, iteration, &mut rng, &mut stats,
        )?;
        let past_burn = iteration > config.burn_in;
        if !past_burn || !(iteration - config.burn_in).is_multiple_of(config.thin) {
            continue;
        }
        let mu = derive_mu(&state, dataset)?;
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig {
                detail: String::from("non-finite latent mean draw"),
            }
            .at_iteration(iteration, "mu"));
        }
        if t_total >= 2 {
            draws
                .theta
                .extend(estimators::trend_slopes(&mu, j_total, t_total)?);
        }
        draws.mu.extend_from_slice(&mu);
        draws.sigma_sq.extend_from_slice(&state.sigma_sq);
        if config.save_param_traces {
            for b in &state.beta {
                draws.beta.extend_from_slice(b);
            }
            draws.tau_sq_eta.extend_from_slice(&state.tau_sq_eta);
            draws.rho_eta.extend_from_slice(&state.rho_eta);
            draws.tau_sq_omega.extend_from_slice(&state.tau_sq_omega);
            draws.rho_omega.push(state.rho_omega);
        }
        draws.num_draws += 1;
    }

    Ok(ChainRun {
        draws,
        stats,
        final_state: state,
        rng,
    })
}

/// Runs `num_chains` independent chains sequentially on streams `0..n`.
/// Callers that parallelize must keep the same stream assignment to
/// reproduce the single-threaded result.
pub fn run_chains(
    dataset: &Dataset,
    sys: &CarEigenSystem,
    hyper: &Hyperparameters,
    config: &McmcConfig,
    num_chains: usize,
) -> Result<Vec<ChainRun>> {
    (0..num_chains as u64)
        .map(|stream| run_chain(dataset, sys, hyper, config, stream))
        .collect()
}
