//! Metropolis updates for the spatial correlation parameters.
//!
//! Both correlations carry a uniform (0,1) prior, so the random walk runs on
//! the logit scale with the change-of-variables term `log(rho) + log(1-rho)`
//! folded into the log target. Determinants come from the spectral cache, so
//! a target evaluation is O(J) plus one sparse quadratic form per time step.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::graph::CarEigenSystem;
use crate::Result;

const ADAPT_WINDOW: u64 = 100;
const TARGET_ACCEPT: f64 = 0.43;
const MIN_STEP: f64 = 1e-3;
const MAX_STEP: f64 = 10.0;

/// Running acceptance bookkeeping plus the current random-walk step size.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProposalStats {
    pub proposals: u64,
    pub accepts: u64,
    pub step_size: f64,
    window_proposals: u64,
    window_accepts: u64,
}

impl ProposalStats {
    pub fn new(step_size: f64) -> Self {
        ProposalStats {
            proposals: 0,
            accepts: 0,
            step_size,
            window_proposals: 0,
            window_accepts: 0,
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepts as f64 / self.proposals as f64
        }
    }

    fn record(&mut self, accepted: bool, adapt: bool) {
        self.proposals += 1;
        self.window_proposals += 1;
        if accepted {
            self.accepts += 1;
            self.window_accepts += 1;
        }
        if adapt && self.window_proposals >= ADAPT_WINDOW {
            let rate = self.window_accepts as f64 / self.window_proposals as f64;
            self.step_size *= libm::exp(rate - TARGET_ACCEPT);
            self.step_size = self.step_size.clamp(MIN_STEP, MAX_STEP);
            self.window_proposals = 0;
            self.window_accepts = 0;
        }
    }
}

/// Log target for `rho_eta_q`: the CAR density of `eta*_q` plus the logit
/// Jacobian, dropping constants that do not involve `rho`.
pub fn rho_eta_log_target(
    sys: &CarEigenSystem,
    eta: &[f64],
    tau_sq: f64,
    rho: f64,
) -> Result<f64> {
    let log_det = sys.log_det_cov(rho, tau_sq)?;
    let quad = sys.graph().precision_quad_form(rho, tau_sq, eta, eta)?;
    Ok(-0.5 * log_det - 0.5 * quad + libm::log(rho) + libm::log(1.0 - rho))
}

/// Log target for `rho_omega`: CAR increment densities summed over every
/// time step, plus the logit Jacobian.
pub fn rho_omega_log_target(
    sys: &CarEigenSystem,
    u: &[Vec<f64>],
    tau_sq_omega: &[f64],
    rho: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for (t, &tau_sq) in tau_sq_omega.iter().enumerate() {
        let inc: Vec<f64> = u[t + 1].iter().zip(&u[t]).map(|(a, b)| a - b).collect();
        let log_det = sys.log_det_cov(rho, tau_sq)?;
        let quad = sys.graph().precision_quad_form(rho, tau_sq, &inc, &inc)?;
        acc += -0.5 * log_det - 0.5 * quad;
    }
    Ok(acc + libm::log(rho) + libm::log(1.0 - rho))
}

fn logit(rho: f64) -> f64 {
    libm::log(rho / (1.0 - rho))
}

fn inv_logit(g: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-g))
}

/// One random-walk Metropolis step on the logit scale. Returns the new value
/// and whether the proposal was accepted. Proposals that saturate to the
/// boundary in floating point, or whose target cannot be evaluated, are
/// rejected; an unevaluable target at the *current* value is an error.
pub fn step<R, F>(
    current: f64,
    log_target: F,
    stats: &mut ProposalStats,
    adapt: bool,
    rng: &mut R,
) -> Result<(f64, bool)>
where
    R: Rng + ?Sized,
    F: Fn(f64) -> Result<f64>,
{
    let z: f64 = StandardNormal.sample(rng);
    let proposed = inv_logit(logit(current) + stats.step_size * z);

    let accepted = if proposed <= 0.0 || proposed >= 1.0 {
        false
    } else {
        match log_target(proposed) {
            Err(_) => false,
            Ok(lt_proposed) => {
                let lt_current = log_target(current)?;
                let delta = lt_proposed - lt_current;
                // A NaN delta fails both comparisons and rejects.
                delta >= 0.0 || rng.random::<f64>() < libm::exp(delta)
            }
        }
    };

    stats.record(accepted, adapt);
    Ok((if accepted { proposed } else { current }, accepted))
}
