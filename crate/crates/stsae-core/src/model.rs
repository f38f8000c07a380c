//! Dataset, hyperparameter, and model-state containers.
//!
//! Index conventions used everywhere downstream: areas `j = 0..J`, time
//! `t = 0..T` for data-aligned arrays, and `k = 0..=T` for the coefficient
//! and intercept paths, where entry `k = 0` is the pre-sample starting value
//! and entry `t + 1` pairs with data at time `t`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::Mat;
use crate::Result;

/// One area-year cell: the raw plot values plus cached sufficient
/// statistics. Every full conditional touches the data only through
/// `(n, sum, sum_sq)`.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    values: Vec<f64>,
    sum: f64,
    sum_sq: f64,
}

impl Cell {
    fn push(&mut self, y: f64) {
        self.values.push(y);
        self.sum += y;
        self.sum_sq += y * y;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn sum_sq(&self) -> f64 {
        self.sum_sq
    }
}

/// Plot-level observations plus complete covariate surfaces.
///
/// Covariates must be present for every `(area, year)` cell, including cells
/// with no observations, because the latent mean is estimated everywhere.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    num_areas: usize,
    num_times: usize,
    num_covariates: usize,
    num_svc: usize,
    cells: Vec<Cell>,
    /// `[J][T][P+1]` row-major; `x[j][t][0] = 1`.
    x: Vec<f64>,
    /// `[J][T][Q]` row-major.
    x_svc: Vec<f64>,
}

impl Dataset {
    /// Validates bounds, the intercept column, and `Q <= P`, then groups
    /// observations into per-cell sufficient statistics.
    pub fn new(
        num_areas: usize,
        num_times: usize,
        num_covariates: usize,
        num_svc: usize,
        observations: &[(usize, usize, f64)],
        x: Vec<f64>,
        x_svc: Vec<f64>,
    ) -> Result<Self> {
        if num_svc > num_covariates {
            return Err(Error::DimensionMismatch {
                what: "space-varying covariate count (must be <= P)",
                expected: num_covariates,
                actual: num_svc,
            });
        }
        let p1 = num_covariates + 1;
        if x.len() != num_areas * num_times * p1 {
            return Err(Error::DimensionMismatch {
                what: "covariate array",
                expected: num_areas * num_times * p1,
                actual: x.len(),
            });
        }
        if x_svc.len() != num_areas * num_times * num_svc {
            return Err(Error::DimensionMismatch {
                what: "space-varying covariate array",
                expected: num_areas * num_times * num_svc,
                actual: x_svc.len(),
            });
        }
        for j in 0..num_areas {
            for t in 0..num_times {
                let intercept = x[(j * num_times + t) * p1];
                if intercept != 1.0 {
                    return Err(Error::DimensionMismatch {
                        what: "intercept column (x[j][t][0] must equal 1)",
                        expected: 1,
                        actual: 0,
                    });
                }
            }
        }
        let mut cells = vec![Cell::default(); num_areas * num_times];
        for &(j, t, y) in observations {
            if j >= num_areas {
                return Err(Error::DimensionMismatch {
                    what: "observation area index",
                    expected: num_areas,
                    actual: j,
                });
            }
            if t >= num_times {
                return Err(Error::DimensionMismatch {
                    what: "observation time index",
                    expected: num_times,
                    actual: t,
                });
            }
            cells[j * num_times + t].push(y);
        }
        Ok(Dataset {
            num_areas,
            num_times,
            num_covariates,
            num_svc,
            cells,
            x,
            x_svc,
        })
    }

    pub fn num_areas(&self) -> usize {
        self.num_areas
    }

    pub fn num_times(&self) -> usize {
        self.num_times
    }

    /// Number of covariates excluding the intercept.
    pub fn num_covariates(&self) -> usize {
        self.num_covariates
    }

    pub fn num_svc(&self) -> usize {
        self.num_svc
    }

    pub fn cell(&self, j: usize, t: usize) -> &Cell {
        &self.cells[j * self.num_times + t]
    }

    pub fn count(&self, j: usize, t: usize) -> usize {
        self.cell(j, t).len()
    }

    /// Total observations at time `t`.
    pub fn count_at_time(&self, t: usize) -> usize {
        (0..self.num_areas).map(|j| self.count(j, t)).sum()
    }

    pub fn total_count(&self) -> usize {
        self.cells.iter().map(Cell::len).sum()
    }

    /// Covariate row `(1, x_1, ..., x_P)` for `(j, t)`.
    pub fn x_row(&self, j: usize, t: usize) -> &[f64] {
        let p1 = self.num_covariates + 1;
        let base = (j * self.num_times + t) * p1;
        &self.x[base..base + p1]
    }

    /// Space-varying covariate row of length `Q` for `(j, t)`.
    pub fn svc_row(&self, j: usize, t: usize) -> &[f64] {
        let base = (j * self.num_times + t) * self.num_svc;
        &self.x_svc[base..base + self.num_svc]
    }

    pub fn observations(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_areas).flat_map(move |j| {
            (0..self.num_times).flat_map(move |t| {
                self.cell(j, t).values().iter().map(move |&y| (j, t, y))
            })
        })
    }
}

/// Prior hyperparameters. Defaults are the vague specification: inverse
/// gamma shapes 2 and scales 100, `nu_xi = 10`, and diagonal-100 matrices
/// for `H_xi` and `Sigma_0` with `mu_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hyperparameters {
    pub a_sigma: f64,
    pub b_sigma: f64,
    /// Per space-varying covariate, length `Q`.
    pub a_eta: Vec<f64>,
    pub b_eta: Vec<f64>,
    /// Per time point, length `T`.
    pub a_omega: Vec<f64>,
    pub b_omega: Vec<f64>,
    pub nu_xi: f64,
    pub h_xi: Mat,
    pub mu0: Vec<f64>,
    pub sigma0: Mat,
}

impl Hyperparameters {
    pub fn vague(num_covariates: usize, num_svc: usize, num_times: usize) -> Self {
        let p1 = num_covariates + 1;
        Hyperparameters {
            a_sigma: 2.0,
            b_sigma: 100.0,
            a_eta: vec![2.0; num_svc],
            b_eta: vec![100.0; num_svc],
            a_omega: vec![2.0; num_times],
            b_omega: vec![100.0; num_times],
            nu_xi: 10.0,
            h_xi: Mat::diag(&vec![100.0; p1]),
            mu0: vec![0.0; p1],
            sigma0: Mat::diag(&vec![100.0; p1]),
        }
    }

    /// Checks dimensions, positivity, `nu_xi > P`, and that `H_xi` and
    /// `Sigma_0` admit Cholesky factors.
    pub fn validate(&self, num_covariates: usize, num_svc: usize, num_times: usize) -> Result<()> {
        let p1 = num_covariates + 1;
        let err = |detail: &str| Error::InvalidHyperparameters {
            detail: String::from(detail),
        };
        if self.a_eta.len() != num_svc || self.b_eta.len() != num_svc {
            return Err(err("a_eta/b_eta length must equal Q"));
        }
        if self.a_omega.len() != num_times || self.b_omega.len() != num_times {
            return Err(err("a_omega/b_omega length must equal T"));
        }
        let shapes_scales = [self.a_sigma, self.b_sigma]
            .into_iter()
            .chain(self.a_eta.iter().copied())
            .chain(self.b_eta.iter().copied())
            .chain(self.a_omega.iter().copied())
            .chain(self.b_omega.iter().copied());
        for v in shapes_scales {
            if v <= 0.0 || !v.is_finite() {
                return Err(err("inverse gamma shapes and scales must be positive"));
            }
        }
        if self.nu_xi.is_nan() || self.nu_xi <= num_covariates as f64 {
            return Err(err("nu_xi must exceed P"));
        }
        if self.mu0.len() != p1 {
            return Err(err("mu0 length must equal P + 1"));
        }
        if self.h_xi.rows() != p1 || self.h_xi.cols() != p1 {
            return Err(err("H_xi must be (P+1) x (P+1)"));
        }
        if self.sigma0.rows() != p1 || self.sigma0.cols() != p1 {
            return Err(err("Sigma_0 must be (P+1) x (P+1)"));
        }
        if self.h_xi.cholesky().is_none() {
            return Err(err("H_xi is not symmetric positive definite"));
        }
        if self.sigma0.cholesky().is_none() {
            return Err(err("Sigma_0 is not symmetric positive definite"));
        }
        Ok(())
    }
}

/// Current values of every sampled parameter.
///
/// `beta[0]` is the starting coefficient vector; `beta[t + 1]`, `u[t + 1]`,
/// `tau_sq_omega[t]`, and `sigma_sq[t]` belong to data time `t`. `u[0]` is
/// pinned at zero. In sub-model mode the space-varying blocks are empty.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelState {
    pub beta: Vec<Vec<f64>>,
    pub eta_star: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub sigma_xi: Mat,
    pub tau_sq_eta: Vec<f64>,
    pub rho_eta: Vec<f64>,
    pub tau_sq_omega: Vec<f64>,
    pub rho_omega: f64,
    pub sigma_sq: Vec<f64>,
    pub sub_model: bool,
}

impl ModelState {
    /// Effective number of space-varying covariates (zero in sub-model mode).
    pub fn num_svc(&self) -> usize {
        self.eta_star.len()
    }

    pub fn num_times(&self) -> usize {
        self.sigma_sq.len()
    }

    /// Checks internal dimensions against a dataset, including the pinned
    /// `u[0] = 0` invariant and parameter domains.
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        let t_total = dataset.num_times();
        let p1 = dataset.num_covariates() + 1;
        let j_total = dataset.num_areas();
        let q = if self.sub_model { 0 } else { dataset.num_svc() };
        let dims = [
            ("beta path length", t_total + 1, self.beta.len()),
            ("eta_star count", q, self.eta_star.len()),
            ("u path length", t_total + 1, self.u.len()),
            ("tau_sq_eta length", q, self.tau_sq_eta.len()),
            ("rho_eta length", q, self.rho_eta.len()),
            ("tau_sq_omega length", t_total, self.tau_sq_omega.len()),
            ("sigma_sq length", t_total, self.sigma_sq.len()),
        ];
        for (what, expected, actual) in dims {
            if expected != actual {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    actual,
                });
            }
        }
        for b in &self.beta {
            if b.len() != p1 {
                return Err(Error::DimensionMismatch {
                    what: "beta vector length",
                    expected: p1,
                    actual: b.len(),
                });
            }
        }
        for e in &self.eta_star {
            if e.len() != j_total {
                return Err(Error::DimensionMismatch {
                    what: "eta_star vector length",
                    expected: j_total,
                    actual: e.len(),
                });
            }
        }
        for u in &self.u {
            if u.len() != j_total {
                return Err(Error::DimensionMismatch {
                    what: "u vector length",
                    expected: j_total,
                    actual: u.len(),
                });
            }
        }
        if self.u[0].iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidConfig {
                detail: String::from("u[0] must be identically zero"),
            });
        }
        for &v in self
            .tau_sq_eta
            .iter()
            .chain(&self.tau_sq_omega)
            .chain(&self.sigma_sq)
        {
            crate::graph::check_tau_sq(v)?;
        }
        for &r in self.rho_eta.iter().chain(core::iter::once(&self.rho_omega)) {
            crate::graph::check_rho(r)?;
        }
        Ok(())
    }
}

/// Latent mean surface `mu[j][t] = x_{j,t}ᵀ beta_t + x~_{j,t}ᵀ eta_j + u_{j,t}`
/// for every cell, including cells with no observations. The space-varying
/// term is skipped in sub-model mode.
pub fn derive_mu(state: &ModelState, dataset: &Dataset) -> Result<Vec<f64>> {
    let j_total = dataset.num_areas();
    let t_total = dataset.num_times();
    state.validate(dataset)?;
    let mut mu = vec![0.0; j_total * t_total];
    for j in 0..j_total {
        for t in 0..t_total {
            mu[j * t_total + t] = mu_cell(state, dataset, j, t);
        }
    }
    Ok(mu)
}

/// Single-cell latent mean; callers guarantee dimensions.
pub(crate) fn mu_cell(state: &ModelState, dataset: &Dataset, j: usize, t: usize) -> f64 {
    let mut value = crate::linalg::dot(dataset.x_row(j, t), &state.beta[t + 1]);
    if !state.sub_model {
        let svc = dataset.svc_row(j, t);
        for (q, eta) in state.eta_star.iter().enumerate() {
            value += svc[q] * eta[j];
        }
    }
    value + state.u[t + 1][j]
}

/// Retained post-burn-in draws and the metadata needed to reproduce them.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PosteriorDraws {
    pub num_areas: usize,
    pub num_times: usize,
    /// Retained draw count.
    pub num_draws: usize,
    /// `[S][J][T]` row-major.
    pub mu: Vec<f64>,
    /// `[S][J]` row-major; empty when `T < 2`.
    pub theta: Vec<f64>,
    /// `[S][T]` row-major; always retained (needed for predictive scoring).
    pub sigma_sq: Vec<f64>,
    /// `[S][T+1][P+1]` row-major; empty unless parameter traces are kept.
    pub beta: Vec<f64>,
    /// `[S][Q]` row-major; empty unless parameter traces are kept.
    pub tau_sq_eta: Vec<f64>,
    /// `[S][Q]` row-major; empty unless parameter traces are kept.
    pub rho_eta: Vec<f64>,
    /// `[S][T]` row-major; empty unless parameter traces are kept.
    pub tau_sq_omega: Vec<f64>,
    /// `[S]`; empty unless parameter traces are kept.
    pub rho_omega: Vec<f64>,
    pub num_coeffs: usize,
    pub num_svc: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl PosteriorDraws {
    pub fn mu_draw(&self, s: usize) -> &[f64] {
        let stride = self.num_areas * self.num_times;
        &self.mu[s * stride..(s + 1) * stride]
    }

    pub fn mu_value(&self, s: usize, j: usize, t: usize) -> f64 {
        self.mu[(s * self.num_areas + j) * self.num_times + t]
    }

    pub fn sigma_sq_value(&self, s: usize, t: usize) -> f64 {
        self.sigma_sq[s * self.num_times + t]
    }

    pub fn theta_draw(&self, s: usize) -> &[f64] {
        &self.theta[s * self.num_areas..(s + 1) * self.num_areas]
    }

    /// Per-cell series of a given `(j, t)` across draws.
    pub fn mu_series(&self, j: usize, t: usize) -> Vec<f64> {
        (0..self.num_draws).map(|s| self.mu_value(s, j, t)).collect()
    }

    /// Concatenates retained draws from several chains, in order.
    pub fn pool(chains: &[PosteriorDraws]) -> Result<PosteriorDraws> {
        let first = chains.first().ok_or_else(|| Error::MisalignedDraws {
            detail: String::from("no chains to pool"),
        })?;
        let mut pooled = first.clone();
        for c in &chains[1..] {
            if c.num_areas != first.num_areas
                || c.num_times != first.num_times
                || c.num_coeffs != first.num_coeffs
                || c.num_svc != first.num_svc
                || c.beta.is_empty() != first.beta.is_empty()
            {
                return Err(Error::MisalignedDraws {
                    detail: String::from("chains disagree on dimensions"),
                });
            }
            pooled.num_draws += c.num_draws;
            pooled.mu.extend_from_slice(&c.mu);
            pooled.theta.extend_from_slice(&c.theta);
            pooled.sigma_sq.extend_from_slice(&c.sigma_sq);
            pooled.beta.extend_from_slice(&c.beta);
            pooled.tau_sq_eta.extend_from_slice(&c.tau_sq_eta);
            pooled.rho_eta.extend_from_slice(&c.rho_eta);
            pooled.tau_sq_omega.extend_from_slice(&c.tau_sq_omega);
            pooled.rho_omega.extend_from_slice(&c.rho_omega);
        }
        Ok(pooled)
    }
}
