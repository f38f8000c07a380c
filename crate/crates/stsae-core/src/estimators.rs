//! Design-based direct estimation, posterior trend derivation, significance
//! flagging, and predictive model comparison.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::model::Dataset;
use crate::Result;

/// Why a direct estimate is unavailable for a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MissingReason {
    /// `n = 0`: no mean and no variance.
    NoPlots,
    /// `n = 1`: mean only.
    OnePlot,
    /// All measurements identical: the raw variance is exactly zero and the
    /// estimate is unusable; the mean is still reported.
    AllIdentical,
}

/// Per-cell design-based estimates; `variance` present implies `mean`
/// present.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DirectEstimates {
    pub num_areas: usize,
    pub num_times: usize,
    pub mean: Vec<Option<f64>>,
    pub variance: Vec<Option<f64>>,
    pub missing_reason: Vec<Option<MissingReason>>,
    pub count: Vec<usize>,
}

impl DirectEstimates {
    fn idx(&self, j: usize, t: usize) -> usize {
        j * self.num_times + t
    }

    pub fn mean_at(&self, j: usize, t: usize) -> Option<f64> {
        self.mean[self.idx(j, t)]
    }

    pub fn variance_at(&self, j: usize, t: usize) -> Option<f64> {
        self.variance[self.idx(j, t)]
    }

    pub fn reason_at(&self, j: usize, t: usize) -> Option<MissingReason> {
        self.missing_reason[self.idx(j, t)]
    }

    /// Symmetric normal-theory 95% bounds `mean ± 1.96 sqrt(variance)`;
    /// `None` whenever the variance is unavailable.
    pub fn interval_at(&self, j: usize, t: usize) -> Option<(f64, f64)> {
        let m = self.mean_at(j, t)?;
        let v = self.variance_at(j, t)?;
        let half = 1.96 * libm::sqrt(v);
        Some((m - half, m + half))
    }
}

/// Sample mean and variance-of-the-mean per cell:
/// `mean = sum(y)/n`, `variance = sum((y - mean)^2) / (n (n - 1))`.
///
/// The mean is missing iff `n = 0`. The variance is missing for `n <= 1` and
/// when every measurement in the cell is identical (the raw zero is recorded
/// only through the missing reason).
pub fn direct_estimates(dataset: &Dataset) -> DirectEstimates {
    let num_areas = dataset.num_areas();
    let num_times = dataset.num_times();
    let cells = num_areas * num_times;
    let mut out = DirectEstimates {
        num_areas,
        num_times,
        mean: vec![None; cells],
        variance: vec![None; cells],
        missing_reason: vec![None; cells],
        count: vec![0; cells],
    };
    for j in 0..num_areas {
        for t in 0..num_times {
            let idx = j * num_times + t;
            let cell = dataset.cell(j, t);
            let n = cell.len();
            out.count[idx] = n;
            if n == 0 {
                out.missing_reason[idx] = Some(MissingReason::NoPlots);
                continue;
            }
            let mean = cell.sum() / n as f64;
            out.mean[idx] = Some(mean);
            if n == 1 {
                out.missing_reason[idx] = Some(MissingReason::OnePlot);
                continue;
            }
            let values = cell.values();
            if values.iter().all(|&y| y == values[0]) {
                out.missing_reason[idx] = Some(MissingReason::AllIdentical);
                continue;
            }
            let ss: f64 = values.iter().map(|&y| (y - mean) * (y - mean)).sum();
            out.variance[idx] = Some(ss / (n as f64 * (n - 1) as f64));
        }
    }
    out
}

/// Per-area least-squares slope of one latent-mean draw against time
/// `t = 1..T`: `sum_t (t - tbar)(mu_t - mubar) / sum_t (t - tbar)^2`.
pub fn trend_slopes(mu_draw: &[f64], num_areas: usize, num_times: usize) -> Result<Vec<f64>> {
    if num_times < 2 {
        return Err(Error::DegenerateTime { num_times });
    }
    if mu_draw.len() != num_areas * num_times {
        return Err(Error::DimensionMismatch {
            what: "latent mean draw",
            expected: num_areas * num_times,
            actual: mu_draw.len(),
        });
    }
    let t_bar = (num_times as f64 + 1.0) / 2.0;
    let denom: f64 = (1..=num_times)
        .map(|t| (t as f64 - t_bar) * (t as f64 - t_bar))
        .sum();
    let mut slopes = Vec::with_capacity(num_areas);
    for j in 0..num_areas {
        let series = &mu_draw[j * num_times..(j + 1) * num_times];
        let mu_bar: f64 = series.iter().sum::<f64>() / num_times as f64;
        let numer: f64 = series
            .iter()
            .enumerate()
            .map(|(t0, &m)| (t0 as f64 + 1.0 - t_bar) * (m - mu_bar))
            .sum();
        slopes.push(numer / denom);
    }
    Ok(slopes)
}

/// Slopes for a whole draw matrix `[S][J][T]`, returned as `[S][J]`.
pub fn trend_draws(
    mu_draws: &[f64],
    num_draws: usize,
    num_areas: usize,
    num_times: usize,
) -> Result<Vec<f64>> {
    let stride = num_areas * num_times;
    if mu_draws.len() != num_draws * stride {
        return Err(Error::DimensionMismatch {
            what: "latent mean draw matrix",
            expected: num_draws * stride,
            actual: mu_draws.len(),
        });
    }
    let mut out = Vec::with_capacity(num_draws * num_areas);
    for s in 0..num_draws {
        out.extend(trend_slopes(
            &mu_draws[s * stride..(s + 1) * stride],
            num_areas,
            num_times,
        )?);
    }
    Ok(out)
}

/// Equal-tailed interval summary of one area's trend draws.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrendSummary {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub significant: bool,
}

/// Per-area posterior trend summaries at the given credible level;
/// `significant` means the equal-tailed interval excludes zero.
pub fn significant_trends(
    theta_draws: &[f64],
    num_draws: usize,
    num_areas: usize,
    level: f64,
) -> Result<Vec<TrendSummary>> {
    if theta_draws.len() != num_draws * num_areas {
        return Err(Error::DimensionMismatch {
            what: "trend draw matrix",
            expected: num_draws * num_areas,
            actual: theta_draws.len(),
        });
    }
    if num_draws < 2 {
        return Err(Error::MisalignedDraws {
            detail: String::from("need at least two draws for interval summaries"),
        });
    }
    let tail = (1.0 - level) / 2.0;
    let mut out = Vec::with_capacity(num_areas);
    for j in 0..num_areas {
        let mut series: Vec<f64> = (0..num_draws)
            .map(|s| theta_draws[s * num_areas + j])
            .collect();
        series.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = series.iter().sum::<f64>() / num_draws as f64;
        let lower = quantile_sorted(&series, tail);
        let upper = quantile_sorted(&series, 1.0 - tail);
        out.push(TrendSummary {
            mean,
            lower,
            upper,
            significant: lower > 0.0 || upper < 0.0,
        });
    }
    Ok(out)
}

/// Quantile by linear interpolation between order statistics
/// (`h = (n - 1) p`), on an ascending-sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty slice");
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Pointwise predictive summary for one fitted model. The pointwise unit is
/// a single plot observation.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WaicReport {
    pub elpd: f64,
    pub elpd_se: f64,
    pub p_eff: f64,
    pub p_eff_se: f64,
    pub waic: f64,
    pub waic_se: f64,
    pub num_points: usize,
    /// Per-observation `lppd_i - p_i`, kept for paired model comparison.
    pub pointwise_elpd: Vec<f64>,
}

/// Difference row against a reference model, with the paired pointwise
/// standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WaicComparison {
    pub elpd_diff: f64,
    pub elpd_diff_se: f64,
}

fn log_normal_density(y: f64, mean: f64, variance: f64) -> f64 {
    const LN_2PI: f64 = 1.8378770664093453;
    let d = y - mean;
    -0.5 * (LN_2PI + libm::log(variance)) - 0.5 * d * d / variance
}

fn log_mean_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| libm::exp(v - max)).sum();
    max + libm::log(sum / values.len() as f64)
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
}

/// Widely applicable information criterion over plot observations.
///
/// For observation `i` in cell `(j, t)` and draw `m`:
/// `lppd_i = log mean_m N(y_i | mu_m[j][t], sigma_sq_m[t])`,
/// `p_i = var_m log N(y_i | ...)`, `elpd = sum_i (lppd_i - p_i)`, and
/// `waic = -2 elpd`. Standard errors are `sqrt(N var_i(...))` over pointwise
/// contributions.
pub fn waic(
    dataset: &Dataset,
    mu_draws: &[f64],
    sigma_sq_draws: &[f64],
    num_draws: usize,
) -> Result<WaicReport> {
    let num_areas = dataset.num_areas();
    let num_times = dataset.num_times();
    let stride = num_areas * num_times;
    if mu_draws.len() != num_draws * stride {
        return Err(Error::MisalignedDraws {
            detail: String::from("latent mean draws do not match dataset dimensions"),
        });
    }
    if sigma_sq_draws.len() != num_draws * num_times {
        return Err(Error::MisalignedDraws {
            detail: String::from("variance draws do not match dataset dimensions"),
        });
    }
    if num_draws == 0 {
        return Err(Error::MisalignedDraws {
            detail: String::from("no draws"),
        });
    }

    let num_points = dataset.total_count();
    let mut pointwise_lppd = Vec::with_capacity(num_points);
    let mut pointwise_p = Vec::with_capacity(num_points);
    let mut pointwise_elpd = Vec::with_capacity(num_points);
    let mut log_liks = vec![0.0; num_draws];

    for j in 0..num_areas {
        for t in 0..num_times {
            for &y in dataset.cell(j, t).values() {
                for m in 0..num_draws {
                    let mu = mu_draws[(m * num_areas + j) * num_times + t];
                    let sigma_sq = sigma_sq_draws[m * num_times + t];
                    log_liks[m] = log_normal_density(y, mu, sigma_sq);
                }
                let lppd = log_mean_exp(&log_liks);
                let p = sample_variance(&log_liks);
                pointwise_lppd.push(lppd);
                pointwise_p.push(p);
                pointwise_elpd.push(lppd - p);
            }
        }
    }

    let n = num_points as f64;
    let elpd: f64 = pointwise_elpd.iter().sum();
    let p_eff: f64 = pointwise_p.iter().sum();
    let elpd_se = libm::sqrt(n * sample_variance(&pointwise_elpd));
    let p_eff_se = libm::sqrt(n * sample_variance(&pointwise_p));
    Ok(WaicReport {
        elpd,
        elpd_se,
        p_eff,
        p_eff_se,
        waic: -2.0 * elpd,
        waic_se: 2.0 * elpd_se,
        num_points,
        pointwise_elpd,
    })
}

/// Paired comparison `model - reference` over shared pointwise units.
pub fn compare_waic(model: &WaicReport, reference: &WaicReport) -> Result<WaicComparison> {
    if model.num_points != reference.num_points {
        return Err(Error::MisalignedDraws {
            detail: String::from("models were scored on different observation sets"),
        });
    }
    let diffs: Vec<f64> = model
        .pointwise_elpd
        .iter()
        .zip(&reference.pointwise_elpd)
        .map(|(a, b)| a - b)
        .collect();
    let n = diffs.len() as f64;
    Ok(WaicComparison {
        elpd_diff: diffs.iter().sum(),
        elpd_diff_se: libm::sqrt(n * sample_variance(&diffs)),
    })
}
