//! Full conditional distributions for every Gibbs block.
//!
//! Each builder assembles the distribution's parameters by matching quadratic
//! and linear terms in the log posterior: for multivariate normal blocks the
//! precision `V⁻¹` and shift `v`, with the update drawn from `MVN(Vv, V)`;
//! for variance blocks the inverse gamma shape and scale; for the coefficient
//! innovation covariance the inverse Wishart degrees of freedom and scale.
//! Builders are separated from sampling so the distributions themselves can
//! be checked against the joint posterior.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};

use crate::error::Error;
use crate::graph::CarEigenSystem;
use crate::linalg::{self, Mat};
use crate::model::{Dataset, Hyperparameters, ModelState};
use crate::Result;

/// Multivariate normal full conditional, parameterized by precision and
/// shift: the distribution is `MVN(V v, V)` with `V = precision⁻¹`.
#[derive(Clone, Debug)]
pub struct MvnConditional {
    pub precision: Mat,
    pub shift: Vec<f64>,
}

impl MvnConditional {
    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// Mean `V v` via one Cholesky solve.
    pub fn mean(&self) -> Result<Vec<f64>> {
        let l = self.precision.cholesky().ok_or(Error::CholeskyFailure {
            context: "full-conditional precision",
        })?;
        Ok(linalg::chol_solve(&l, &self.shift))
    }

    /// Draws from `MVN(Vv, V)`: factor the precision, solve for the mean,
    /// and solve `Lᵀ w = z` for the correlated noise.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let l = self.precision.cholesky().ok_or(Error::CholeskyFailure {
            context: "full-conditional precision",
        })?;
        let mean = linalg::chol_solve(&l, &self.shift);
        let z: Vec<f64> = (0..self.dim())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let noise = linalg::solve_lower_transpose(&l, &z);
        Ok(mean.iter().zip(&noise).map(|(m, w)| m + w).collect())
    }

    /// Unnormalized log density `-1/2 xᵀ V⁻¹ x + xᵀ v`; differences of this
    /// kernel at two points are exact log-density differences.
    pub fn log_kernel(&self, x: &[f64]) -> f64 {
        let qx = self.precision.matvec(x);
        -0.5 * linalg::dot(x, &qx) + linalg::dot(x, &self.shift)
    }
}

/// Inverse gamma full conditional with shape/scale parameterization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvGammaConditional {
    pub shape: f64,
    pub scale: f64,
}

impl InvGammaConditional {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // 1/X with X ~ Gamma(shape, rate = scale).
        let g = Gamma::new(self.shape, 1.0 / self.scale).expect("positive IG parameters");
        1.0 / g.sample(rng)
    }

    pub fn mean(&self) -> f64 {
        self.scale / (self.shape - 1.0)
    }

    /// Unnormalized log density `-(shape + 1) ln x - scale / x`.
    pub fn log_kernel(&self, x: f64) -> f64 {
        -(self.shape + 1.0) * libm::log(x) - self.scale / x
    }
}

/// Inverse Wishart full conditional.
#[derive(Clone, Debug)]
pub struct InvWishartConditional {
    pub dof: f64,
    pub scale: Mat,
}

impl InvWishartConditional {
    /// Bartlett construction: draw `Sigma⁻¹ ~ Wishart(dof, scale⁻¹)` and
    /// invert. Dimensions here are `P + 1`, so the extra factorizations are
    /// cheap.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Mat> {
        let p = self.scale.rows();
        let l_scale = self.scale.cholesky().ok_or(Error::CholeskyFailure {
            context: "inverse Wishart scale",
        })?;
        let scale_inv = linalg::chol_inverse(&l_scale);
        let l_s = scale_inv.cholesky().ok_or(Error::CholeskyFailure {
            context: "inverse Wishart scale inverse",
        })?;
        let mut bartlett = Mat::zeros(p, p);
        for i in 0..p {
            let chi = ChiSquared::new(self.dof - i as f64).expect("dof exceeds dimension");
            bartlett[(i, i)] = libm::sqrt(chi.sample(rng));
            for j in 0..i {
                bartlett[(i, j)] = StandardNormal.sample(rng);
            }
        }
        let f = l_s.matmul(&bartlett);
        let wishart = f.matmul(&f.transpose());
        let l_w = wishart.cholesky().ok_or(Error::CholeskyFailure {
            context: "inverse Wishart draw",
        })?;
        Ok(linalg::chol_inverse(&l_w))
    }

    /// Unnormalized log density
    /// `-(dof + p + 1)/2 ln|X| - 1/2 tr(scale X⁻¹)`.
    pub fn log_kernel(&self, x: &Mat) -> Result<f64> {
        let p = x.rows();
        let l = x.cholesky().ok_or(Error::CholeskyFailure {
            context: "inverse Wishart kernel argument",
        })?;
        let log_det = linalg::chol_log_det(&l);
        let x_inv = linalg::chol_inverse(&l);
        let prod = self.scale.matmul(&x_inv);
        let trace: f64 = (0..p).map(|i| prod[(i, i)]).sum();
        Ok(-0.5 * (self.dof + p as f64 + 1.0) * log_det - 0.5 * trace)
    }
}

fn inverse_of(m: &Mat, context: &'static str) -> Result<Mat> {
    let l = m.cholesky().ok_or(Error::CholeskyFailure { context })?;
    Ok(linalg::chol_inverse(&l))
}

/// Mean contribution at `(j, t)` from everything except the space-varying
/// term for covariate `k`.
fn mean_excluding_eta_k(state: &ModelState, dataset: &Dataset, k: usize, j: usize, t: usize) -> f64 {
    let mut m = linalg::dot(dataset.x_row(j, t), &state.beta[t + 1]);
    let svc = dataset.svc_row(j, t);
    for (q, eta) in state.eta_star.iter().enumerate() {
        if q != k {
            m += svc[q] * eta[j];
        }
    }
    m + state.u[t + 1][j]
}

/// Mean contribution at `(j, t)` from everything except `beta_t`.
fn mean_excluding_beta(state: &ModelState, dataset: &Dataset, j: usize, t: usize) -> f64 {
    let mut m = state.u[t + 1][j];
    if !state.sub_model {
        let svc = dataset.svc_row(j, t);
        for (q, eta) in state.eta_star.iter().enumerate() {
            m += svc[q] * eta[j];
        }
    }
    m
}

/// Mean contribution at `(j, t)` from everything except `u_t`.
fn mean_excluding_u(state: &ModelState, dataset: &Dataset, j: usize, t: usize) -> f64 {
    let mut m = linalg::dot(dataset.x_row(j, t), &state.beta[t + 1]);
    if !state.sub_model {
        let svc = dataset.svc_row(j, t);
        for (q, eta) in state.eta_star.iter().enumerate() {
            m += svc[q] * eta[j];
        }
    }
    m
}

/// Starting coefficient block: precision `Sigma_0⁻¹ + Sigma_xi⁻¹`, shift
/// `Sigma_0⁻¹ mu_0 + Sigma_xi⁻¹ beta_1`.
pub fn beta0(state: &ModelState, hyper: &Hyperparameters) -> Result<MvnConditional> {
    let sigma0_inv = inverse_of(&hyper.sigma0, "Sigma_0")?;
    let sigma_xi_inv = inverse_of(&state.sigma_xi, "Sigma_xi")?;
    let precision = sigma0_inv.add(&sigma_xi_inv);
    let shift: Vec<f64> = sigma0_inv
        .matvec(&hyper.mu0)
        .iter()
        .zip(&sigma_xi_inv.matvec(&state.beta[1]))
        .map(|(a, b)| a + b)
        .collect();
    Ok(MvnConditional { precision, shift })
}

/// Space-varying coefficient block `k`: CAR prior precision plus a diagonal
/// data term with entries `sum_t n_{j,t} x~_{k,j,t}^2 / sigma_t^2`.
pub fn eta_star(
    k: usize,
    state: &ModelState,
    dataset: &Dataset,
    sys: &CarEigenSystem,
) -> Result<MvnConditional> {
    let j_total = dataset.num_areas();
    let t_total = dataset.num_times();
    let mut precision = sys
        .graph()
        .precision_matrix(state.rho_eta[k], state.tau_sq_eta[k])?;
    let mut shift = vec![0.0; j_total];
    for j in 0..j_total {
        for t in 0..t_total {
            let cell = dataset.cell(j, t);
            let n = cell.len();
            if n == 0 {
                continue;
            }
            let xk = dataset.svc_row(j, t)[k];
            let sigma_sq = state.sigma_sq[t];
            precision[(j, j)] += n as f64 * xk * xk / sigma_sq;
            let residual_sum = cell.sum() - n as f64 * mean_excluding_eta_k(state, dataset, k, j, t);
            shift[j] += xk * residual_sum / sigma_sq;
        }
    }
    Ok(MvnConditional { precision, shift })
}

/// Spatial variance for space-varying covariate `k`:
/// `IG(a + J/2, b + 1/2 etaᵀ (D - rho W) eta)`.
pub fn tau_sq_eta(
    k: usize,
    state: &ModelState,
    hyper: &Hyperparameters,
    sys: &CarEigenSystem,
) -> Result<InvGammaConditional> {
    let eta = &state.eta_star[k];
    let quad = sys
        .graph()
        .precision_quad_form(state.rho_eta[k], 1.0, eta, eta)?;
    Ok(InvGammaConditional {
        shape: hyper.a_eta[k] + sys.num_areas() as f64 / 2.0,
        scale: hyper.b_eta[k] + 0.5 * quad,
    })
}

/// Coefficient innovation covariance:
/// `IW(nu + T, H + sum_t (beta_t - beta_{t-1})(beta_t - beta_{t-1})ᵀ)`.
pub fn sigma_xi(state: &ModelState, hyper: &Hyperparameters) -> InvWishartConditional {
    let t_total = state.num_times();
    let mut scale = hyper.h_xi.clone();
    for t in 1..=t_total {
        let inc: Vec<f64> = state.beta[t]
            .iter()
            .zip(&state.beta[t - 1])
            .map(|(a, b)| a - b)
            .collect();
        scale.add_scaled_outer(1.0, &inc);
    }
    InvWishartConditional {
        dof: hyper.nu_xi + t_total as f64,
        scale,
    }
}

/// Time-`t` coefficient block. Interior times smooth against both neighbors
/// (precision `2 Sigma_xi⁻¹` plus the data term); the final time has a single
/// prior neighbor.
pub fn beta_t(t: usize, state: &ModelState, dataset: &Dataset) -> Result<MvnConditional> {
    let t_total = dataset.num_times();
    let p1 = dataset.num_covariates() + 1;
    let sigma_xi_inv = inverse_of(&state.sigma_xi, "Sigma_xi")?;
    let last = t + 1 == t_total;

    let mut precision = if last {
        sigma_xi_inv.clone()
    } else {
        sigma_xi_inv.scale(2.0)
    };
    let neighbor_sum: Vec<f64> = if last {
        state.beta[t].clone()
    } else {
        state.beta[t]
            .iter()
            .zip(&state.beta[t + 2])
            .map(|(a, b)| a + b)
            .collect()
    };
    let mut shift = sigma_xi_inv.matvec(&neighbor_sum);

    let sigma_sq = state.sigma_sq[t];
    for j in 0..dataset.num_areas() {
        let cell = dataset.cell(j, t);
        let n = cell.len();
        if n == 0 {
            continue;
        }
        let x = dataset.x_row(j, t);
        for a in 0..p1 {
            for b in 0..p1 {
                precision[(a, b)] += n as f64 * x[a] * x[b] / sigma_sq;
            }
        }
        let residual_sum = cell.sum() - n as f64 * mean_excluding_beta(state, dataset, j, t);
        for a in 0..p1 {
            shift[a] += x[a] * residual_sum / sigma_sq;
        }
    }
    Ok(MvnConditional { precision, shift })
}

/// Time-`t` dynamic intercept block. CAR random-walk priors on both sides
/// (one side at the final time) plus a diagonal data term `n_{j,t}/sigma_t^2`.
pub fn u_t(
    t: usize,
    state: &ModelState,
    dataset: &Dataset,
    sys: &CarEigenSystem,
) -> Result<MvnConditional> {
    let t_total = dataset.num_times();
    let j_total = dataset.num_areas();
    let last = t + 1 == t_total;
    let graph = sys.graph();

    let prior = graph.precision_matrix(state.rho_omega, state.tau_sq_omega[t])?;
    let mut shift = prior.matvec(&state.u[t]);
    let mut precision = prior;
    if !last {
        let next = graph.precision_matrix(state.rho_omega, state.tau_sq_omega[t + 1])?;
        precision = precision.add(&next);
        let next_term = next.matvec(&state.u[t + 2]);
        for (s, v) in shift.iter_mut().zip(&next_term) {
            *s += v;
        }
    }

    let sigma_sq = state.sigma_sq[t];
    for j in 0..j_total {
        let cell = dataset.cell(j, t);
        let n = cell.len();
        if n == 0 {
            continue;
        }
        precision[(j, j)] += n as f64 / sigma_sq;
        let residual_sum = cell.sum() - n as f64 * mean_excluding_u(state, dataset, j, t);
        shift[j] += residual_sum / sigma_sq;
    }
    Ok(MvnConditional { precision, shift })
}

/// Time-`t` spatial innovation variance:
/// `IG(a + J/2, b + 1/2 (u_t - u_{t-1})ᵀ (D - rho W) (u_t - u_{t-1}))`.
pub fn tau_sq_omega(
    t: usize,
    state: &ModelState,
    hyper: &Hyperparameters,
    sys: &CarEigenSystem,
) -> Result<InvGammaConditional> {
    let inc: Vec<f64> = state.u[t + 1]
        .iter()
        .zip(&state.u[t])
        .map(|(a, b)| a - b)
        .collect();
    let quad = sys
        .graph()
        .precision_quad_form(state.rho_omega, 1.0, &inc, &inc)?;
    Ok(InvGammaConditional {
        shape: hyper.a_omega[t] + sys.num_areas() as f64 / 2.0,
        scale: hyper.b_omega[t] + 0.5 * quad,
    })
}

/// Time-`t` residual variance: `IG(a + N_t/2, b + 1/2 sum (y - mu)^2)`, with
/// the residual sum assembled from per-cell sufficient statistics.
pub fn sigma_sq(t: usize, state: &ModelState, dataset: &Dataset, hyper: &Hyperparameters) -> InvGammaConditional {
    let mut residual_sq = 0.0;
    let mut count = 0usize;
    for j in 0..dataset.num_areas() {
        let cell = dataset.cell(j, t);
        let n = cell.len();
        if n == 0 {
            continue;
        }
        let mu = crate::model::mu_cell(state, dataset, j, t);
        residual_sq += cell.sum_sq() - 2.0 * mu * cell.sum() + n as f64 * mu * mu;
        count += n;
    }
    InvGammaConditional {
        shape: hyper.a_sigma + count as f64 / 2.0,
        scale: hyper.b_sigma + 0.5 * residual_sq,
    }
}
