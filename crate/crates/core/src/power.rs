//! Max-min power allocation for a fixed association.
//!
//! The allocation is the unique positive fixed point of
//! `p = M(p) / ||M(p)||_Ω`, where `M_k(p)` is the power BS `a_k` needs to
//! give user `k` unit SINR against the current interference, and `||·||_Ω`
//! is the largest per-BS ratio of served power to budget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{downlink_sinr_unchecked, Association, Network, PowerVector, SolveResult};

/// Starting point of a fixed-point iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialPower {
    /// Strictly positive uniform split of the budgets.
    Uniform,
    /// Random positive vector drawn from a seeded generator.
    Random { seed: u64 },
    Given(PowerVector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    /// Stop once every component moves by at most `tol` relative to its new value.
    pub tol: f64,
    /// Optional absolute rule `||p(t) - p(t+1)||_inf <= abs_tol * ||budget||_inf`.
    pub abs_tol: Option<f64>,
    pub max_iter: usize,
    pub initial: InitialPower,
    /// Keep the per-iteration residual `||p(t+1) - p(t)||_inf`.
    pub record_trace: bool,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            tol: 1e-10,
            abs_tol: None,
            max_iter: 100_000,
            initial: InitialPower::Uniform,
            record_trace: false,
        }
    }
}

impl FixedPointOptions {
    pub fn with_tol(tol: f64) -> Self {
        FixedPointOptions {
            tol,
            ..Default::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidValue(format!("tol = {} must be > 0", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidValue("max_iter must be >= 1".into()));
        }
        Ok(())
    }

    /// Initial vector; `base[k]` is the uniform value for user `k`.
    pub(crate) fn initial_vector(&self, base: Vec<f64>) -> Result<Vec<f64>> {
        match &self.initial {
            InitialPower::Uniform => Ok(base),
            InitialPower::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(base
                    .into_iter()
                    .map(|b| b * rng.random_range(0.05..1.0))
                    .collect())
            }
            InitialPower::Given(p) => {
                if p.len() != base.len() {
                    return Err(Error::DimensionMismatch {
                        what: "initial power",
                        expected: base.len(),
                        found: p.len(),
                    });
                }
                if p.iter().any(|&x| x <= 0.0) {
                    return Err(Error::InvalidValue(
                        "initial power must be strictly positive".into(),
                    ));
                }
                Ok(p.to_vec())
            }
        }
    }
}

/// Outcome of a normalized fixed-point iteration.
#[derive(Debug, Clone)]
pub(crate) struct Iterated {
    pub power: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub trace: Vec<f64>,
}

/// Iterates `p <- y * b / s` where `y = map(p)` and `(s, b) = scale(y)`, so
/// that the norm of the new iterate is `s / b` of `y` rescaled to one.
pub(crate) fn normalized_fixed_point(
    mut p: Vec<f64>,
    opts: &FixedPointOptions,
    abs_scale: f64,
    mut map: impl FnMut(&[f64], &mut [f64]),
    scale: impl Fn(&[f64]) -> (f64, f64),
) -> Iterated {
    let mut y = vec![0.0; p.len()];
    let mut trace = Vec::new();
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        map(&p, &mut y);
        let (s, b) = scale(&y);
        let mut rel: f64 = 0.0;
        let mut abs: f64 = 0.0;
        for (pk, &yk) in p.iter_mut().zip(&y) {
            let next = yk * b / s;
            let d = (next - *pk).abs();
            abs = abs.max(d);
            rel = rel.max(d / next);
            *pk = next;
        }
        if opts.record_trace {
            trace.push(abs);
        }
        residual = rel;
        let abs_done = opts.abs_tol.is_some_and(|t| abs <= t * abs_scale);
        if rel <= opts.tol || abs_done {
            return Iterated {
                power: p,
                iterations: it,
                converged: true,
                residual,
                trace,
            };
        }
    }
    Iterated {
        power: p,
        iterations: opts.max_iter,
        converged: false,
        residual,
        trace,
    }
}

/// `M_k(p)` for every user, without validation.
pub(crate) fn m_map_into(net: &Network, assoc: &[usize], p: &[f64], out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        let mut interference = 0.0;
        for (i, &pi) in p.iter().enumerate() {
            if i != k {
                interference += pi * net.gain(assoc[i], k);
            }
        }
        *o = (net.noise_dl()[k] + interference) / net.gain(assoc[k], k);
    }
}

/// Power BS `a_k` needs to give user `k` unit SINR with the other powers held fixed.
pub fn m_map(net: &Network, assoc: &Association, power: &PowerVector) -> Result<Vec<f64>> {
    assoc.validate(net)?;
    if power.len() != net.n_users() {
        return Err(Error::DimensionMismatch {
            what: "power",
            expected: net.n_users(),
            found: power.len(),
        });
    }
    let mut out = vec![0.0; net.n_users()];
    m_map_into(net, assoc, power, &mut out);
    Ok(out)
}

/// Largest (served power) / budget over BSs with a non-empty serving set,
/// returned as the `(served power, budget)` pair attaining it.
fn omega_parts(power: &[f64], assoc: &[usize], budgets: &[f64]) -> (f64, f64) {
    let mut sums = vec![0.0; budgets.len()];
    let mut used = vec![false; budgets.len()];
    for (&p, &n) in power.iter().zip(assoc) {
        sums[n] += p;
        used[n] = true;
    }
    let mut best = (0.0, 1.0);
    let mut best_ratio = f64::NEG_INFINITY;
    for n in 0..budgets.len() {
        if used[n] {
            let r = sums[n] / budgets[n];
            if r > best_ratio {
                best_ratio = r;
                best = (sums[n], budgets[n]);
            }
        }
    }
    best
}

/// `||p||_Ω`; a power vector meets every per-BS budget iff this is at most one.
pub fn omega_norm(power: &[f64], assoc: &[usize], budgets: &[f64]) -> f64 {
    let (s, b) = omega_parts(power, assoc, budgets);
    s / b
}

/// One step of the normalized iteration, `M(p) / ||M(p)||_Ω`.
pub fn fixed_point_step(net: &Network, assoc: &Association, power: &PowerVector) -> Result<PowerVector> {
    let m = m_map(net, assoc, power)?;
    let (s, b) = omega_parts(&m, assoc, net.budget());
    Ok(PowerVector::from_vec_unchecked(
        m.iter().map(|&x| x * b / s).collect(),
    ))
}

/// Max-min SINR power allocation for the association `assoc` under per-BS budgets.
pub fn solve_power_fixed_assoc(
    net: &Network,
    assoc: &Association,
    opts: &FixedPointOptions,
) -> Result<SolveResult> {
    Ok(solve_power_fixed_assoc_with_trace(net, assoc, opts)?.0)
}

/// As [`solve_power_fixed_assoc`], also returning the residual trace when
/// `opts.record_trace` is set.
pub fn solve_power_fixed_assoc_with_trace(
    net: &Network,
    assoc: &Association,
    opts: &FixedPointOptions,
) -> Result<(SolveResult, Vec<f64>)> {
    assoc.validate(net)?;
    opts.validate()?;
    let k = net.n_users() as f64;
    let base = assoc.iter().map(|&n| net.budget()[n] / k).collect();
    let p0 = opts.initial_vector(base)?;
    let budget_scale = net.max_budget();
    let out = normalized_fixed_point(
        p0,
        opts,
        budget_scale,
        |p, y| m_map_into(net, assoc, p, y),
        |y| omega_parts(y, assoc, net.budget()),
    );
    let sinr = downlink_sinr_unchecked(net, assoc, &out.power);
    let result = SolveResult::new(
        assoc.clone(),
        PowerVector::from_vec_unchecked(out.power),
        sinr,
        out.iterations,
        out.converged,
        out.residual,
    );
    Ok((result, out.trace))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub power: PowerVector,
    pub iterations: usize,
    pub converged: bool,
}

/// Slack allowed on the budget check of [`feasibility_min_power`].
const BUDGET_SLACK: f64 = 1e-9;

/// Smallest power vector reaching SINR >= `gamma` for every user, if it fits
/// the budgets.
///
/// Runs `p <- gamma * M(p)` from zero. The iterates increase monotonically,
/// so the first iterate that overshoots a budget proves infeasibility.
pub fn feasibility_min_power(
    net: &Network,
    assoc: &Association,
    gamma: f64,
    opts: &FixedPointOptions,
) -> Result<Feasibility> {
    assoc.validate(net)?;
    opts.validate()?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidValue(format!("target SINR {gamma} must be > 0")));
    }
    let mut p = vec![0.0; net.n_users()];
    let mut next = vec![0.0; net.n_users()];
    for it in 1..=opts.max_iter {
        m_map_into(net, assoc, &p, &mut next);
        let mut rel: f64 = 0.0;
        for (pk, nk) in p.iter_mut().zip(next.iter_mut()) {
            *nk *= gamma;
            rel = rel.max((*nk - *pk).abs() / *nk);
            *pk = *nk;
        }
        if omega_norm(&p, assoc, net.budget()) > 1.0 + BUDGET_SLACK {
            return Ok(Feasibility {
                feasible: false,
                power: PowerVector::from_vec_unchecked(p),
                iterations: it,
                converged: false,
            });
        }
        if rel <= opts.tol {
            return Ok(Feasibility {
                feasible: true,
                power: PowerVector::from_vec_unchecked(p),
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(Feasibility {
        feasible: false,
        power: PowerVector::from_vec_unchecked(p),
        iterations: opts.max_iter,
        converged: false,
    })
}
