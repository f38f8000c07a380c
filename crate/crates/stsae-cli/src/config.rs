//! Run configuration assembly: command-line flags layered over an optional
//! plain-text key-value config file, layered over the reference defaults.
//! Environment variables are never consulted, so the manifest plus inputs
//! reproduce a run completely.

use std::collections::BTreeMap;
use std::path::Path;

use stsae_core::model::Hyperparameters;
use stsae_core::sampler::McmcConfig;

use crate::error::{CliError, Result};
use crate::io;

/// Every overridable knob, each optional so layers can be merged.
#[derive(Clone, Debug, Default)]
pub struct FitOptions {
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub workers: Option<usize>,
    pub sub_model: Option<bool>,
    pub adapt: Option<bool>,
    pub save_param_traces: Option<bool>,
    pub svc: Option<Vec<usize>>,
    pub level: Option<f64>,
    pub proposal_sd_rho_omega: Option<f64>,
    pub proposal_sd_rho_eta: Option<Vec<f64>>,
    pub a_sigma: Option<f64>,
    pub b_sigma: Option<f64>,
    pub a_eta: Option<f64>,
    pub b_eta: Option<f64>,
    pub a_omega: Option<f64>,
    pub b_omega: Option<f64>,
    pub nu_xi: Option<f64>,
    pub h_xi_diag: Option<f64>,
    pub mu0: Option<f64>,
    pub sigma0_diag: Option<f64>,
}

fn parse<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| CliError::data(format!("config key `{key}`: cannot parse `{raw}`"))),
    }
}

fn parse_bool(map: &BTreeMap<String, String>, key: &str) -> Result<Option<bool>> {
    match map.get(key).map(String::as_str) {
        None => Ok(None),
        Some("true") | Some("1") | Some("yes") => Ok(Some(true)),
        Some("false") | Some("0") | Some("no") => Ok(Some(false)),
        Some(other) => Err(CliError::data(format!(
            "config key `{key}`: expected a boolean, got `{other}`"
        ))),
    }
}

pub fn parse_usize_list(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::data(format!("cannot parse `{s}` as an index")))
        })
        .collect()
}

pub fn parse_f64_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::data(format!("cannot parse `{s}` as a number")))
        })
        .collect()
}

impl FitOptions {
    /// Reads a config file; unknown keys are rejected so typos surface.
    pub fn from_file(path: &Path) -> Result<Self> {
        let map = io::read_key_value_file(path)?;
        const KNOWN: &[&str] = &[
            "iterations",
            "burn_in",
            "thin",
            "seed",
            "chains",
            "workers",
            "sub_model",
            "adapt",
            "save_param_traces",
            "svc",
            "level",
            "proposal_sd_rho_omega",
            "proposal_sd_rho_eta",
            "a_sigma",
            "b_sigma",
            "a_eta",
            "b_eta",
            "a_omega",
            "b_omega",
            "nu_xi",
            "h_xi_diag",
            "mu0",
            "sigma0_diag",
        ];
        for key in map.keys() {
            if !KNOWN.contains(&key.as_str()) {
                return Err(CliError::data(format!("unknown config key `{key}`")));
            }
        }
        Ok(FitOptions {
            iterations: parse(&map, "iterations")?,
            burn_in: parse(&map, "burn_in")?,
            thin: parse(&map, "thin")?,
            seed: parse(&map, "seed")?,
            chains: parse(&map, "chains")?,
            workers: parse(&map, "workers")?,
            sub_model: parse_bool(&map, "sub_model")?,
            adapt: parse_bool(&map, "adapt")?,
            save_param_traces: parse_bool(&map, "save_param_traces")?,
            svc: map.get("svc").map(|raw| parse_usize_list(raw)).transpose()?,
            level: parse(&map, "level")?,
            proposal_sd_rho_omega: parse(&map, "proposal_sd_rho_omega")?,
            proposal_sd_rho_eta: map
                .get("proposal_sd_rho_eta")
                .map(|raw| parse_f64_list(raw))
                .transpose()?,
            a_sigma: parse(&map, "a_sigma")?,
            b_sigma: parse(&map, "b_sigma")?,
            a_eta: parse(&map, "a_eta")?,
            b_eta: parse(&map, "b_eta")?,
            a_omega: parse(&map, "a_omega")?,
            b_omega: parse(&map, "b_omega")?,
            nu_xi: parse(&map, "nu_xi")?,
            h_xi_diag: parse(&map, "h_xi_diag")?,
            mu0: parse(&map, "mu0")?,
            sigma0_diag: parse(&map, "sigma0_diag")?,
        })
    }

    /// Overlays `top` on `self`: any value set in `top` wins.
    pub fn overlay(mut self, top: FitOptions) -> FitOptions {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if top.$field.is_some() { self.$field = top.$field; })*
            };
        }
        take!(
            iterations, burn_in, thin, seed, chains, workers, sub_model, adapt,
            save_param_traces, svc, level, proposal_sd_rho_omega, proposal_sd_rho_eta,
            a_sigma, b_sigma, a_eta, b_eta, a_omega, b_omega, nu_xi, h_xi_diag, mu0,
            sigma0_diag
        );
        self
    }
}

/// Fully resolved run settings.
#[derive(Clone, Debug)]
pub struct ResolvedRun {
    pub mcmc: McmcConfig,
    pub chains: usize,
    pub workers: usize,
    pub svc: Vec<usize>,
    pub level: f64,
    pub options: FitOptions,
}

impl ResolvedRun {
    /// Applies defaults: the reference 7,500/5,000/1 run shape, one chain,
    /// one worker, first covariate space-varying, 95% intervals.
    pub fn from_options(options: FitOptions) -> Self {
        let mut mcmc = McmcConfig::new(
            options.iterations.unwrap_or(7500),
            options.burn_in.unwrap_or(5000),
            options.thin.unwrap_or(1),
            options.seed.unwrap_or(0),
        );
        if let Some(adapt) = options.adapt {
            mcmc.adapt_during_burnin = adapt;
        }
        if let Some(save) = options.save_param_traces {
            mcmc.save_param_traces = save;
        }
        if let Some(sub) = options.sub_model {
            mcmc.sub_model = sub;
        }
        if let Some(sd) = options.proposal_sd_rho_omega {
            mcmc.proposal_sd_rho_omega = sd;
        }
        if let Some(sds) = &options.proposal_sd_rho_eta {
            mcmc.proposal_sd_rho_eta = sds.clone();
        }
        ResolvedRun {
            mcmc,
            chains: options.chains.unwrap_or(1).max(1),
            workers: options.workers.unwrap_or(1).max(1),
            svc: options.svc.clone().unwrap_or_else(|| vec![1]),
            level: options.level.unwrap_or(0.95),
            options,
        }
    }

    /// Builds hyperparameters from the vague defaults plus any overrides.
    pub fn hyperparameters(
        &self,
        num_covariates: usize,
        num_svc: usize,
        num_times: usize,
    ) -> Hyperparameters {
        let o = &self.options;
        let mut h = Hyperparameters::vague(num_covariates, num_svc, num_times);
        if let Some(v) = o.a_sigma {
            h.a_sigma = v;
        }
        if let Some(v) = o.b_sigma {
            h.b_sigma = v;
        }
        if let Some(v) = o.a_eta {
            h.a_eta = vec![v; num_svc];
        }
        if let Some(v) = o.b_eta {
            h.b_eta = vec![v; num_svc];
        }
        if let Some(v) = o.a_omega {
            h.a_omega = vec![v; num_times];
        }
        if let Some(v) = o.b_omega {
            h.b_omega = vec![v; num_times];
        }
        if let Some(v) = o.nu_xi {
            h.nu_xi = v;
        }
        if let Some(v) = o.h_xi_diag {
            h.h_xi = stsae_core::linalg::Mat::diag(&vec![v; num_covariates + 1]);
        }
        if let Some(v) = o.mu0 {
            h.mu0 = vec![v; num_covariates + 1];
        }
        if let Some(v) = o.sigma0_diag {
            h.sigma0 = stsae_core::linalg::Mat::diag(&vec![v; num_covariates + 1]);
        }
        h
    }

    /// Deterministic manifest entries describing the resolved run.
    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("iterations".into(), self.mcmc.iterations.to_string()),
            ("burn_in".into(), self.mcmc.burn_in.to_string()),
            ("thin".into(), self.mcmc.thin.to_string()),
            ("retained_per_chain".into(), self.mcmc.retained().to_string()),
            ("seed".into(), self.mcmc.seed.to_string()),
            ("chains".into(), self.chains.to_string()),
            ("sub_model".into(), self.mcmc.sub_model.to_string()),
            ("adapt_during_burnin".into(), self.mcmc.adapt_during_burnin.to_string()),
            ("level".into(), self.level.to_string()),
        ];
        let svc: Vec<String> = self.svc.iter().map(|s| s.to_string()).collect();
        out.push(("svc".into(), svc.join(" ")));
        out
    }
}
