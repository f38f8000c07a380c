//! Dense reference computations used to cross-check the engine.
//!
//! Everything here goes through nalgebra so the oracle path shares no code
//! with the implementation under test: dense determinants, dense
//! multivariate normal densities, and a from-scratch evaluator of the full
//! joint log posterior.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use stsae_core::graph::AdjacencyGraph;
use stsae_core::linalg::Mat;
use stsae_core::model::{Dataset, Hyperparameters, ModelState};

pub const LN_2PI: f64 = 1.8378770664093453;

/// Dense `D - rho W` for a graph.
pub fn dense_precision(graph: &AdjacencyGraph, rho: f64, tau_sq: f64) -> DMatrix<f64> {
    let n = graph.num_areas();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = graph.degree(j) as f64 / tau_sq;
        for &k in graph.neighbors(j) {
            m[(j, k)] = -rho / tau_sq;
        }
    }
    m
}

/// `log |tau^2 (D - rho W)^{-1}|` computed densely: the negated log
/// determinant of the dense precision.
pub fn dense_log_det_cov(graph: &AdjacencyGraph, rho: f64, tau_sq: f64) -> f64 {
    let precision = dense_precision(graph, rho, tau_sq);
    let chol = precision.cholesky().expect("dense precision is SPD");
    let ln_det_precision: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    -ln_det_precision
}

/// Normalized log density of `MVN(mean, tau^2 (D - rho W)^{-1})` evaluated
/// densely.
pub fn dense_car_log_density(
    graph: &AdjacencyGraph,
    rho: f64,
    tau_sq: f64,
    mean: &[f64],
    x: &[f64],
) -> f64 {
    let n = graph.num_areas() as f64;
    let precision = dense_precision(graph, rho, tau_sq);
    let centered = DVector::from_iterator(
        mean.len(),
        x.iter().zip(mean).map(|(a, b)| a - b),
    );
    let quad = (centered.transpose() * &precision * &centered)[(0, 0)];
    let log_det_cov = dense_log_det_cov(graph, rho, tau_sq);
    -0.5 * n * LN_2PI - 0.5 * log_det_cov - 0.5 * quad
}

/// Normalized log density of `MVN(mean, cov)` for small dense covariances.
pub fn dense_mvn_log_density(mean: &[f64], cov: &DMatrix<f64>, x: &[f64]) -> f64 {
    let d = mean.len() as f64;
    let chol = cov.clone().cholesky().expect("covariance is SPD");
    let ln_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
    let centered = DVector::from_iterator(mean.len(), x.iter().zip(mean).map(|(a, b)| a - b));
    let solved = chol.solve(&centered);
    let quad = centered.dot(&solved);
    -0.5 * d * LN_2PI - 0.5 * ln_det - 0.5 * quad
}

pub fn log_normal_density(y: f64, mean: f64, variance: f64) -> f64 {
    let d = y - mean;
    -0.5 * (LN_2PI + variance.ln()) - 0.5 * d * d / variance
}

/// Normalized inverse gamma log density with shape/scale parameterization.
pub fn log_inv_gamma_density(x: f64, shape: f64, scale: f64) -> f64 {
    shape * scale.ln() - libm::lgamma(shape) - (shape + 1.0) * x.ln() - scale / x
}

fn ln_multigamma(p: usize, a: f64) -> f64 {
    let mut acc = 0.25 * (p * (p - 1)) as f64 * core::f64::consts::PI.ln();
    for i in 1..=p {
        acc += libm::lgamma(a + 0.5 * (1.0 - i as f64));
    }
    acc
}

fn to_dmatrix(m: &Mat) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Normalized inverse Wishart log density.
pub fn log_inv_wishart_density(x: &Mat, dof: f64, scale: &Mat) -> f64 {
    let p = x.rows();
    let xd = to_dmatrix(x);
    let sd = to_dmatrix(scale);
    let ln_det_scale: f64 = sd
        .clone()
        .cholesky()
        .expect("scale SPD")
        .l()
        .diagonal()
        .iter()
        .map(|v| 2.0 * v.ln())
        .sum();
    let chol_x = xd.clone().cholesky().expect("argument SPD");
    let ln_det_x: f64 = chol_x.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
    let x_inv = chol_x.inverse();
    let trace = (sd * x_inv).trace();
    0.5 * dof * ln_det_scale
        - 0.5 * dof * p as f64 * core::f64::consts::LN_2
        - ln_multigamma(p, 0.5 * dof)
        - 0.5 * (dof + p as f64 + 1.0) * ln_det_x
        - 0.5 * trace
}

/// Full joint log posterior: likelihood times every prior, all evaluated
/// densely with normalizing constants.
pub fn log_joint(
    state: &ModelState,
    dataset: &Dataset,
    hyper: &Hyperparameters,
    graph: &AdjacencyGraph,
) -> f64 {
    let t_total = dataset.num_times();
    let mut acc = 0.0;

    // Likelihood.
    for j in 0..dataset.num_areas() {
        for t in 0..t_total {
            let x = dataset.x_row(j, t);
            let mut mu: f64 = x.iter().zip(&state.beta[t + 1]).map(|(a, b)| a * b).sum();
            if !state.sub_model {
                let svc = dataset.svc_row(j, t);
                for (q, eta) in state.eta_star.iter().enumerate() {
                    mu += svc[q] * eta[j];
                }
            }
            mu += state.u[t + 1][j];
            for &y in dataset.cell(j, t).values() {
                acc += log_normal_density(y, mu, state.sigma_sq[t]);
            }
        }
    }

    // Residual variance priors.
    for t in 0..t_total {
        acc += log_inv_gamma_density(state.sigma_sq[t], hyper.a_sigma, hyper.b_sigma);
    }

    // Coefficient path.
    let sigma0 = to_dmatrix(&hyper.sigma0);
    acc += dense_mvn_log_density(&hyper.mu0, &sigma0, &state.beta[0]);
    let sigma_xi = to_dmatrix(&state.sigma_xi);
    for t in 1..=t_total {
        acc += dense_mvn_log_density(&state.beta[t - 1], &sigma_xi, &state.beta[t]);
    }
    acc += log_inv_wishart_density(&state.sigma_xi, hyper.nu_xi, &hyper.h_xi);

    // Space-varying coefficient blocks.
    for (q, eta) in state.eta_star.iter().enumerate() {
        let zeros = vec![0.0; graph.num_areas()];
        acc += dense_car_log_density(graph, state.rho_eta[q], state.tau_sq_eta[q], &zeros, eta);
        acc += log_inv_gamma_density(state.tau_sq_eta[q], hyper.a_eta[q], hyper.b_eta[q]);
        // Uniform(0,1) prior contributes zero inside the support.
    }

    // Dynamic intercept path.
    for t in 0..t_total {
        acc += dense_car_log_density(
            graph,
            state.rho_omega,
            state.tau_sq_omega[t],
            &state.u[t],
            &state.u[t + 1],
        );
        acc += log_inv_gamma_density(state.tau_sq_omega[t], hyper.a_omega[t], hyper.b_omega[t]);
    }

    acc
}

pub fn standard_normal(rng: &mut ChaCha20Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn uniform_in(rng: &mut ChaCha20Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Random SPD matrix `A Aᵀ + 0.5 I`.
pub fn random_spd(rng: &mut ChaCha20Rng, dim: usize) -> Mat {
    let mut a = Mat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            a[(i, j)] = standard_normal(rng);
        }
    }
    let mut spd = a.matmul(&a.transpose());
    for i in 0..dim {
        spd[(i, i)] += 0.5;
    }
    spd
}

/// Random valid model state for the given dataset dimensions.
pub fn random_state(rng: &mut ChaCha20Rng, dataset: &Dataset) -> ModelState {
    let t_total = dataset.num_times();
    let j_total = dataset.num_areas();
    let p1 = dataset.num_covariates() + 1;
    let q = dataset.num_svc();
    let mut u: Vec<Vec<f64>> = (0..=t_total)
        .map(|_| (0..j_total).map(|_| standard_normal(rng)).collect())
        .collect();
    u[0] = vec![0.0; j_total];
    ModelState {
        beta: (0..=t_total)
            .map(|_| (0..p1).map(|_| standard_normal(rng)).collect())
            .collect(),
        eta_star: (0..q)
            .map(|_| (0..j_total).map(|_| standard_normal(rng)).collect())
            .collect(),
        u,
        sigma_xi: random_spd(rng, p1),
        tau_sq_eta: (0..q).map(|_| uniform_in(rng, 0.5, 2.0)).collect(),
        rho_eta: (0..q).map(|_| uniform_in(rng, 0.1, 0.9)).collect(),
        tau_sq_omega: (0..t_total).map(|_| uniform_in(rng, 0.5, 2.0)).collect(),
        rho_omega: uniform_in(rng, 0.1, 0.9),
        sigma_sq: (0..t_total).map(|_| uniform_in(rng, 0.5, 2.0)).collect(),
        sub_model: false,
    }
}

/// Small fixture: path graph over `J = 4`, `T = 3`, `P = Q = 1`, with a mix
/// of empty, single-plot, and multi-plot cells.
pub fn conjugacy_fixture(rng: &mut ChaCha20Rng) -> (Dataset, AdjacencyGraph) {
    let j_total = 4;
    let t_total = 3;
    let graph = AdjacencyGraph::from_edges(j_total, &[(0, 1), (1, 2), (2, 3)]).unwrap();

    let mut x = Vec::new();
    let mut x_svc = Vec::new();
    for _ in 0..j_total {
        for _ in 0..t_total {
            let c = uniform_in(rng, 0.0, 2.0);
            x.push(1.0);
            x.push(c);
            x_svc.push(c);
        }
    }
    let mut observations = Vec::new();
    for j in 0..j_total {
        for t in 0..t_total {
            let n = (rng.random::<u32>() % 4) as usize; // includes n = 0
            for _ in 0..n {
                observations.push((j, t, 2.0 + standard_normal(rng)));
            }
        }
    }
    let dataset = Dataset::new(j_total, t_total, 1, 1, &observations, x, x_svc).unwrap();
    (dataset, graph)
}

/// Random connected graph on `n` nodes: a random spanning tree plus a few
/// extra edges.
pub fn random_connected_graph(rng: &mut ChaCha20Rng, n: usize) -> AdjacencyGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        let parent = (rng.random::<u64>() % v as u64) as usize;
        edges.push((parent, v));
    }
    let extra = n / 2;
    for _ in 0..extra {
        let a = (rng.random::<u64>() % n as u64) as usize;
        let b = (rng.random::<u64>() % n as u64) as usize;
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    }
    AdjacencyGraph::from_edges(n, &edges).unwrap()
}
