//! Sum-power relaxation solved through its uplink dual.
//!
//! Pooling the per-BS budgets into one sum budget gives an upper bound on the
//! max-min SINR. Under equal noise the downlink relaxation has the same value
//! and optimal association as the uplink problem, which ULSum solves as the
//! fixed point of `p = T(p) * S / ||T(p)||_1`, where `T_k(p)` is the least
//! power user `k` needs for unit SINR over its best BS.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    downlink_sinr_unchecked, uplink_sinr_unchecked, Association, Network, PowerVector, SolveResult,
};
use crate::power::{m_map_into, normalized_fixed_point, FixedPointOptions};

/// `T_k^{(n)}` for every (BS, user) pair together with the per-user minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct TMaps {
    /// Row-major N×K; `+inf` where the link gain is zero.
    pub t_matrix: Vec<f64>,
    pub t: Vec<f64>,
    /// Minimizing BS per user, lowest index on ties.
    pub a: Vec<usize>,
}

/// Writes `T(p)` into `t` and its argmin into `a`.
pub(crate) fn t_map_into(net: &Network, p: &[f64], t: &mut [f64], a: &mut [usize]) {
    let k_users = net.n_users();
    t.fill(f64::INFINITY);
    for n in 0..net.n_bs() {
        let row = net.gain_row(n);
        let total: f64 = row.iter().zip(p).map(|(g, x)| g * x).sum();
        let noise = net.noise_ul()[n];
        for k in 0..k_users {
            let g = row[k];
            if g <= 0.0 {
                continue;
            }
            let v = (noise + (total - g * p[k]).max(0.0)) / g;
            if v < t[k] {
                t[k] = v;
                a[k] = n;
            }
        }
    }
}

/// Evaluates every `T_k^{(n)}(p) = (δ_n² + Σ_{j≠k} g_nj p_j) / g_nk`.
pub fn t_maps(net: &Network, power: &PowerVector) -> Result<TMaps> {
    if power.len() != net.n_users() {
        return Err(Error::DimensionMismatch {
            what: "power",
            expected: net.n_users(),
            found: power.len(),
        });
    }
    let (n_bs, k_users) = (net.n_bs(), net.n_users());
    let mut t_matrix = vec![f64::INFINITY; n_bs * k_users];
    for n in 0..n_bs {
        let row = net.gain_row(n);
        for k in 0..k_users {
            if row[k] > 0.0 {
                let interference: f64 = (0..k_users)
                    .filter(|&j| j != k)
                    .map(|j| row[j] * power[j])
                    .sum();
                t_matrix[n * k_users + k] = (net.noise_ul()[n] + interference) / row[k];
            }
        }
    }
    let mut t = vec![f64::INFINITY; k_users];
    let mut a = vec![0; k_users];
    for k in 0..k_users {
        for n in 0..n_bs {
            let v = t_matrix[n * k_users + k];
            if v < t[k] {
                t[k] = v;
                a[k] = n;
            }
        }
        if !t[k].is_finite() {
            return Err(Error::UnreachableUser(k));
        }
    }
    Ok(TMaps { t_matrix, t, a })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UlsumResult {
    pub power_ul: PowerVector,
    pub assoc: Association,
    /// Optimal value of the uplink sum-power problem, `S / ||T(p)||_1`.
    pub gamma_sum: f64,
    pub sum_budget: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    /// Last iteration at which the association changed.
    pub assoc_settled_at: usize,
    /// Per-iteration `||p(t+1) - p(t)||_inf` when tracing was requested.
    pub trace: Vec<f64>,
}

impl UlsumResult {
    /// Uplink SINRs at the returned power and association.
    pub fn uplink_sinr(&self, net: &Network) -> Vec<f64> {
        uplink_sinr_unchecked(net, &self.assoc, &self.power_ul)
    }

    pub fn to_solve_result(&self, net: &Network) -> SolveResult {
        SolveResult::new(
            self.assoc.clone(),
            self.power_ul.clone(),
            self.uplink_sinr(net),
            self.iterations,
            self.converged,
            self.residual,
        )
    }
}

fn check_budget(sum_budget: f64) -> Result<()> {
    if !(sum_budget > 0.0 && sum_budget.is_finite()) {
        return Err(Error::InvalidValue(format!(
            "sum budget {sum_budget} must be finite and > 0"
        )));
    }
    Ok(())
}

/// ULSum: joint association and power for the uplink sum-power problem.
pub fn ulsum(net: &Network, sum_budget: f64, opts: &FixedPointOptions) -> Result<UlsumResult> {
    check_budget(sum_budget)?;
    opts.validate()?;
    let k_users = net.n_users();
    let p0 = opts.initial_vector(vec![sum_budget / k_users as f64; k_users])?;
    let mut assoc = vec![0usize; k_users];
    let mut prev_assoc = vec![usize::MAX; k_users];
    let mut iteration = 0usize;
    let mut settled_at = 0usize;
    let out = normalized_fixed_point(
        p0,
        opts,
        sum_budget,
        |p, y| {
            iteration += 1;
            t_map_into(net, p, y, &mut assoc);
            if assoc != prev_assoc {
                settled_at = iteration;
                prev_assoc.copy_from_slice(&assoc);
            }
        },
        |y| (y.iter().sum(), sum_budget),
    );
    // Association and value at the final iterate.
    let mut t = vec![0.0; k_users];
    let mut a = vec![0usize; k_users];
    t_map_into(net, &out.power, &mut t, &mut a);
    if a != assoc {
        settled_at = out.iterations + 1;
    }
    let gamma_sum = sum_budget / t.iter().sum::<f64>();
    Ok(UlsumResult {
        power_ul: PowerVector::from_vec_unchecked(out.power),
        assoc: Association::from_vec(a),
        gamma_sum,
        sum_budget,
        iterations: out.iterations,
        converged: out.converged,
        residual: out.residual,
        assoc_settled_at: settled_at,
        trace: out.trace,
    })
}

/// Downlink max-min power at a fixed association under one sum budget:
/// the fixed point of `p = M(p) * S / ||M(p)||_1`.
pub fn dl_sumpower_power(
    net: &Network,
    assoc: &Association,
    sum_budget: f64,
    opts: &FixedPointOptions,
) -> Result<SolveResult> {
    assoc.validate(net)?;
    check_budget(sum_budget)?;
    opts.validate()?;
    let k_users = net.n_users();
    let p0 = opts.initial_vector(vec![sum_budget / k_users as f64; k_users])?;
    let out = normalized_fixed_point(
        p0,
        opts,
        sum_budget,
        |p, y| m_map_into(net, assoc, p, y),
        |y| (y.iter().sum(), sum_budget),
    );
    let sinr = downlink_sinr_unchecked(net, assoc, &out.power);
    Ok(SolveResult::new(
        assoc.clone(),
        PowerVector::from_vec_unchecked(out.power),
        sinr,
        out.iterations,
        out.converged,
        out.residual,
    ))
}

/// Sum-power upper bound on the max-min SINR, pooling all budgets.
pub fn upper_bound_sum(net: &Network, opts: &FixedPointOptions) -> Result<f64> {
    Ok(ulsum(net, net.total_budget(), opts)?.gamma_sum)
}

/// Geometric contraction rate `1 - min_k A_k / B_k` of ULSum, with
/// `A_k = min_n δ_n²/g_nk` and `B_k = min_n (δ_n² + S max_j g_nj)/g_nk`.
pub fn convergence_rate_kappa(net: &Network, sum_budget: f64) -> f64 {
    let (n_bs, k_users) = (net.n_bs(), net.n_users());
    let row_max: Vec<f64> = (0..n_bs)
        .map(|n| net.gain_row(n).iter().copied().fold(0.0, f64::max))
        .collect();
    let mut worst = f64::INFINITY;
    for k in 0..k_users {
        let mut a_k = f64::INFINITY;
        let mut b_k = f64::INFINITY;
        for n in 0..n_bs {
            let g = net.gain(n, k);
            if g > 0.0 {
                let noise = net.noise_ul()[n];
                a_k = a_k.min(noise / g);
                b_k = b_k.min((noise + sum_budget * row_max[n]) / g);
            }
        }
        worst = worst.min(a_k / b_k);
    }
    1.0 - worst
}

/// Geometric-mean decay factor of a residual trace, skipping the first
/// quarter and anything below `floor` (rounding noise).
pub fn observed_decay_factor(trace: &[f64], floor: f64) -> Option<f64> {
    let start = trace.len() / 4;
    let end = trace.iter().rposition(|&r| r > floor)?;
    if end <= start || trace[start] <= 0.0 {
        return None;
    }
    Some((trace[end] / trace[start]).powf(1.0 / (end - start) as f64))
}
