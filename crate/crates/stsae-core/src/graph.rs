//! Area adjacency structure and its spectral cache.
//!
//! The CAR prior precision is `(D - rho W) / tau^2`, with `D` the diagonal
//! degree matrix and `W` the binary adjacency. Writing
//! `D^{-1/2} W D^{-1/2} = P Lambda P^T` once per fit turns every
//! log-determinant into an O(J) product over `d_j (1 - rho lambda_j)` and
//! lets the precision be assembled from the neighbor lists without forming
//! dense matrices per iteration.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{self, Mat};
use crate::Result;

/// Symmetric area neighbor structure with no self-loops and no islands.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdjacencyGraph {
    num_areas: usize,
    neighbors: Vec<Vec<usize>>,
}

impl AdjacencyGraph {
    /// Builds a validated graph from index pairs. Edges may be listed once or
    /// twice; duplicates collapse. Every area must end up with at least one
    /// neighbor.
    pub fn from_edges(num_areas: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); num_areas];
        for &(a, b) in edges {
            if a >= num_areas {
                return Err(Error::UnknownArea { id: a.to_string() });
            }
            if b >= num_areas {
                return Err(Error::UnknownArea { id: b.to_string() });
            }
            if a == b {
                return Err(Error::SelfLoop { id: a.to_string() });
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for (j, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.is_empty() {
                return Err(Error::IslandArea { id: j.to_string() });
            }
        }
        Ok(AdjacencyGraph {
            num_areas,
            neighbors,
        })
    }

    /// Builds a graph from identifier pairs resolved through `area_index`.
    /// Errors name the offending identifier.
    pub fn from_named_edges(
        edges: &[(String, String)],
        area_index: &BTreeMap<String, usize>,
    ) -> Result<Self> {
        let num_areas = area_index.len();
        let mut index_edges = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let ia = *area_index
                .get(a)
                .ok_or_else(|| Error::UnknownArea { id: a.clone() })?;
            let ib = *area_index
                .get(b)
                .ok_or_else(|| Error::UnknownArea { id: b.clone() })?;
            if ia == ib {
                return Err(Error::SelfLoop { id: a.clone() });
            }
            index_edges.push((ia, ib));
        }
        let mut graph = AdjacencyGraph::from_edges(num_areas, &index_edges);
        // Re-report island errors with the original identifier.
        if let Err(Error::IslandArea { id }) = &graph {
            if let Ok(j) = id.parse::<usize>() {
                if let Some(name) = area_index.iter().find(|(_, &v)| v == j).map(|(k, _)| k) {
                    graph = Err(Error::IslandArea { id: name.clone() });
                }
            }
        }
        graph
    }

    /// Rook-neighbor rectangular lattice with `rows * cols` areas, indexed
    /// row-major. Handy for simulations and tests.
    pub fn lattice(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let j = r * cols + c;
                if c + 1 < cols {
                    edges.push((j, j + 1));
                }
                if r + 1 < rows {
                    edges.push((j, j + cols));
                }
            }
        }
        AdjacencyGraph::from_edges(rows * cols, &edges)
    }

    pub fn num_areas(&self) -> usize {
        self.num_areas
    }

    pub fn degree(&self, j: usize) -> usize {
        self.neighbors[j].len()
    }

    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.neighbors[j]
    }

    /// Quadratic form `aᵀ (D - rho W) b / tau^2` off the neighbor lists; no
    /// dense matrix is formed. Any real `rho` is accepted here; the CAR
    /// domain restriction applies to determinants, not quadratic forms.
    pub fn precision_quad_form(&self, rho: f64, tau_sq: f64, a: &[f64], b: &[f64]) -> Result<f64> {
        check_tau_sq(tau_sq)?;
        if a.len() != self.num_areas {
            return Err(Error::DimensionMismatch {
                what: "quadratic form left vector",
                expected: self.num_areas,
                actual: a.len(),
            });
        }
        if b.len() != self.num_areas {
            return Err(Error::DimensionMismatch {
                what: "quadratic form right vector",
                expected: self.num_areas,
                actual: b.len(),
            });
        }
        let mut acc = 0.0;
        for j in 0..self.num_areas {
            let mut neighbor_sum = 0.0;
            for &k in &self.neighbors[j] {
                neighbor_sum += b[k];
            }
            acc += a[j] * (self.degree(j) as f64 * b[j] - rho * neighbor_sum);
        }
        Ok(acc / tau_sq)
    }

    /// Dense `(D - rho W) / tau^2`, assembled from the neighbor lists.
    pub fn precision_matrix(&self, rho: f64, tau_sq: f64) -> Result<Mat> {
        check_rho(rho)?;
        check_tau_sq(tau_sq)?;
        let j_total = self.num_areas;
        let mut q = Mat::zeros(j_total, j_total);
        for j in 0..j_total {
            q[(j, j)] = self.degree(j) as f64 / tau_sq;
            for &k in &self.neighbors[j] {
                q[(j, k)] = -rho / tau_sq;
            }
        }
        Ok(q)
    }
}

/// Spectral cache for a graph: eigenvalues of `D^{-1/2} W D^{-1/2}` and the
/// basis columns `D^{1/2} P`. Immutable after construction; shared read-only
/// by every sampler step.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CarEigenSystem {
    graph: AdjacencyGraph,
    eigenvalues: Vec<f64>,
    basis: Mat,
}

impl CarEigenSystem {
    /// One dense symmetric eigendecomposition; everything downstream is O(J)
    /// per iteration.
    pub fn new(graph: AdjacencyGraph) -> Result<Self> {
        let j_total = graph.num_areas();
        let mut scaled = Mat::zeros(j_total, j_total);
        for j in 0..j_total {
            let dj = libm::sqrt(graph.degree(j) as f64);
            for &k in graph.neighbors(j) {
                let dk = libm::sqrt(graph.degree(k) as f64);
                scaled[(j, k)] = 1.0 / (dj * dk);
            }
        }
        let (eigenvalues, vectors) = linalg::sym_eigen(&scaled).ok_or(Error::EigenFailure)?;
        // basis = D^{1/2} P: scale row j of the eigenvector matrix by sqrt(d_j).
        let mut basis = vectors;
        for j in 0..j_total {
            let s = libm::sqrt(graph.degree(j) as f64);
            for c in 0..j_total {
                basis[(j, c)] *= s;
            }
        }
        Ok(CarEigenSystem {
            graph,
            eigenvalues,
            basis,
        })
    }

    pub fn graph(&self) -> &AdjacencyGraph {
        &self.graph
    }

    pub fn num_areas(&self) -> usize {
        self.graph.num_areas()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `c` of `D^{1/2} P`.
    pub fn basis_column(&self, c: usize) -> Vec<f64> {
        (0..self.num_areas()).map(|r| self.basis[(r, c)]).collect()
    }

    /// `log |tau^2 (D - rho W)^{-1}|` in O(J):
    /// `-J log(1/tau^2) - sum_j log(d_j (1 - rho lambda_j))`.
    pub fn log_det_cov(&self, rho: f64, tau_sq: f64) -> Result<f64> {
        check_rho(rho)?;
        check_tau_sq(tau_sq)?;
        let j_total = self.num_areas();
        let mut sum = 0.0;
        for j in 0..j_total {
            let factor = self.graph.degree(j) as f64 * (1.0 - rho * self.eigenvalues[j]);
            if factor <= 0.0 || factor.is_nan() {
                return Err(Error::NonPositiveFactor { area: j, factor });
            }
            sum += libm::log(factor);
        }
        Ok(-(j_total as f64) * libm::log(1.0 / tau_sq) - sum)
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::CorrelationOutOfRange { value: rho })
    }
}

pub(crate) fn check_tau_sq(tau_sq: f64) -> Result<()> {
    if tau_sq > 0.0 && tau_sq.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveVariance { value: tau_sq })
    }
}
