//! Network data model and SINR evaluation.
//!
//! All quantities are linear (gains, powers, noise). Base stations and users
//! are indexed from zero. Gains are stored row-major: row `n` holds the gains
//! from BS `n` to every user.

use serde::{Deserialize, Serialize};
use std::ops::Deref;

use crate::error::{Error, Result};

/// Channel gains, power budgets and noise powers of a downlink network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct Network {
    n_bs: usize,
    n_users: usize,
    gain: Vec<f64>,
    budget: Vec<f64>,
    noise_dl: Vec<f64>,
    noise_ul: Vec<f64>,
}

#[derive(Deserialize)]
struct RawNetwork {
    n_bs: usize,
    n_users: usize,
    gain: Vec<f64>,
    budget: Vec<f64>,
    noise_dl: Vec<f64>,
    noise_ul: Vec<f64>,
}

impl TryFrom<RawNetwork> for Network {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        Network::new(
            raw.n_bs,
            raw.n_users,
            raw.gain,
            raw.budget,
            raw.noise_dl,
            raw.noise_ul,
        )
    }
}

fn check_len(what: &'static str, expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

fn check_positive(what: &str, v: &[f64]) -> Result<()> {
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::InvalidValue(format!(
            "{what}[{i}] = {x} must be finite and > 0"
        )));
    }
    Ok(())
}

impl Network {
    pub fn new(
        n_bs: usize,
        n_users: usize,
        gain: Vec<f64>,
        budget: Vec<f64>,
        noise_dl: Vec<f64>,
        noise_ul: Vec<f64>,
    ) -> Result<Self> {
        if n_bs == 0 || n_users == 0 {
            return Err(Error::InvalidValue(
                "network needs at least one BS and one user".into(),
            ));
        }
        check_len("gain", n_bs * n_users, &gain)?;
        check_len("budget", n_bs, &budget)?;
        check_len("noise_dl", n_users, &noise_dl)?;
        check_len("noise_ul", n_bs, &noise_ul)?;
        check_positive("budget", &budget)?;
        check_positive("noise_dl", &noise_dl)?;
        check_positive("noise_ul", &noise_ul)?;
        if let Some((i, g)) = gain
            .iter()
            .enumerate()
            .find(|(_, g)| !(g.is_finite() && **g >= 0.0))
        {
            return Err(Error::InvalidValue(format!(
                "gain[{i}] = {g} must be finite and >= 0"
            )));
        }
        let net = Network {
            n_bs,
            n_users,
            gain,
            budget,
            noise_dl,
            noise_ul,
        };
        for k in 0..n_users {
            if (0..n_bs).all(|n| net.gain(n, k) <= 0.0) {
                return Err(Error::UnreachableUser(k));
            }
        }
        Ok(net)
    }

    /// Network with one noise power shared by all users and all BSs.
    pub fn with_equal_noise(
        n_bs: usize,
        n_users: usize,
        gain: Vec<f64>,
        budget: Vec<f64>,
        noise: f64,
    ) -> Result<Self> {
        Self::new(
            n_bs,
            n_users,
            gain,
            budget,
            vec![noise; n_users],
            vec![noise; n_bs],
        )
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    /// Gain from BS `n` to user `k`.
    #[inline]
    pub fn gain(&self, n: usize, k: usize) -> f64 {
        self.gain[n * self.n_users + k]
    }

    /// Row of gains from BS `n` to all users.
    #[inline]
    pub fn gain_row(&self, n: usize) -> &[f64] {
        &self.gain[n * self.n_users..(n + 1) * self.n_users]
    }

    pub fn gains(&self) -> &[f64] {
        &self.gain
    }

    pub fn budget(&self) -> &[f64] {
        &self.budget
    }

    pub fn noise_dl(&self) -> &[f64] {
        &self.noise_dl
    }

    pub fn noise_ul(&self) -> &[f64] {
        &self.noise_ul
    }

    pub fn total_budget(&self) -> f64 {
        self.budget.iter().sum()
    }

    pub fn max_budget(&self) -> f64 {
        self.budget.iter().copied().fold(f64::MIN, f64::max)
    }

    /// Same topology with new gains and budgets; noise is kept.
    pub fn with_gains_and_budgets(&self, gain: Vec<f64>, budget: Vec<f64>) -> Result<Self> {
        Network::new(
            self.n_bs,
            self.n_users,
            gain,
            budget,
            self.noise_dl.clone(),
            self.noise_ul.clone(),
        )
    }

    /// Restriction of the network to a subset of users (order preserved).
    pub fn restrict_users(&self, users: &[usize]) -> Result<Self> {
        let mut gain = Vec::with_capacity(self.n_bs * users.len());
        for n in 0..self.n_bs {
            gain.extend(users.iter().map(|&k| self.gain(n, k)));
        }
        Network::new(
            self.n_bs,
            users.len(),
            gain,
            self.budget.clone(),
            users.iter().map(|&k| self.noise_dl[k]).collect(),
            self.noise_ul.clone(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// User-to-BS association: entry `k` is the serving BS of user `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Association(Vec<usize>);

impl Association {
    /// Builds an association and checks it against `net`.
    pub fn new(net: &Network, a: Vec<usize>) -> Result<Self> {
        let assoc = Association(a);
        assoc.validate(net)?;
        Ok(assoc)
    }

    /// Wraps a raw vector without checking it against a network.
    pub fn from_vec(a: Vec<usize>) -> Self {
        Association(a)
    }

    pub fn validate(&self, net: &Network) -> Result<()> {
        if self.0.len() != net.n_users() {
            return Err(Error::DimensionMismatch {
                what: "association",
                expected: net.n_users(),
                found: self.0.len(),
            });
        }
        for (k, &n) in self.0.iter().enumerate() {
            if n >= net.n_bs() {
                return Err(Error::BsOutOfRange {
                    user: k,
                    bs: n,
                    n_bs: net.n_bs(),
                });
            }
            if net.gain(n, k) <= 0.0 {
                return Err(Error::ZeroLink { user: k, bs: n });
            }
        }
        Ok(())
    }

    /// Number of users served by each BS.
    pub fn loads(&self, n_bs: usize) -> Vec<usize> {
        let mut loads = vec![0; n_bs];
        for &n in &self.0 {
            loads[n] += 1;
        }
        loads
    }

    pub fn is_one_to_one(&self, n_bs: usize) -> bool {
        self.loads(n_bs).iter().all(|&l| l <= 1)
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for Association {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// Per-user transmit powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerVector(Vec<f64>);

impl PowerVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some((i, x)) = p.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidValue(format!(
                "power[{i}] = {x} must be finite and >= 0"
            )));
        }
        Ok(PowerVector(p))
    }

    pub fn zeros(k: usize) -> Self {
        PowerVector(vec![0.0; k])
    }

    pub(crate) fn from_vec_unchecked(p: Vec<f64>) -> Self {
        PowerVector(p)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PowerVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Output of every solver: association, powers, SINRs and convergence telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub association: Association,
    pub power: PowerVector,
    pub sinr: Vec<f64>,
    pub min_sinr: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
}

impl SolveResult {
    pub(crate) fn new(
        association: Association,
        power: PowerVector,
        sinr: Vec<f64>,
        iterations: usize,
        converged: bool,
        residual: f64,
    ) -> Self {
        let min_sinr = min_of(&sinr);
        SolveResult {
            association,
            power,
            sinr,
            min_sinr,
            iterations,
            converged,
            residual,
        }
    }

    /// Total power each BS spends on its serving set.
    pub fn bs_power(&self, n_bs: usize) -> Vec<f64> {
        bs_power_sums(&self.power, &self.association, n_bs)
    }
}

pub(crate) fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn bs_power_sums(power: &[f64], assoc: &[usize], n_bs: usize) -> Vec<f64> {
    let mut sums = vec![0.0; n_bs];
    for (&p, &n) in power.iter().zip(assoc) {
        sums[n] += p;
    }
    sums
}

fn check_dims(net: &Network, assoc: &Association, power: &PowerVector) -> Result<()> {
    assoc.validate(net)?;
    if power.len() != net.n_users() {
        return Err(Error::DimensionMismatch {
            what: "power",
            expected: net.n_users(),
            found: power.len(),
        });
    }
    Ok(())
}

/// Users served by each BS.
pub fn serving_sets(assoc: &Association, n_bs: usize) -> Vec<Vec<usize>> {
    let mut sets = vec![Vec::new(); n_bs];
    for (k, &n) in assoc.iter().enumerate() {
        sets[n].push(k);
    }
    sets
}

fn ratio(signal: f64, denom: f64) -> f64 {
    if signal == 0.0 {
        0.0
    } else {
        signal / denom
    }
}

/// Downlink SINR of every user. Co-served users of the same BS interfere.
pub fn downlink_sinr(net: &Network, assoc: &Association, power: &PowerVector) -> Result<Vec<f64>> {
    check_dims(net, assoc, power)?;
    Ok(downlink_sinr_unchecked(net, assoc, power))
}

pub(crate) fn downlink_sinr_unchecked(net: &Network, assoc: &[usize], power: &[f64]) -> Vec<f64> {
    (0..net.n_users())
        .map(|k| {
            let interference: f64 = (0..net.n_users())
                .filter(|&i| i != k)
                .map(|i| power[i] * net.gain(assoc[i], k))
                .sum();
            ratio(power[k] * net.gain(assoc[k], k), net.noise_dl()[k] + interference)
        })
        .collect()
}

/// Uplink SINR: user `k` is received at BS `a_k` against that BS's noise
/// and every other user's signal.
pub fn uplink_sinr(net: &Network, assoc: &Association, power: &PowerVector) -> Result<Vec<f64>> {
    check_dims(net, assoc, power)?;
    Ok(uplink_sinr_unchecked(net, assoc, power))
}

pub(crate) fn uplink_sinr_unchecked(net: &Network, assoc: &[usize], power: &[f64]) -> Vec<f64> {
    (0..net.n_users())
        .map(|k| {
            let n = assoc[k];
            let row = net.gain_row(n);
            let interference: f64 = (0..net.n_users())
                .filter(|&j| j != k)
                .map(|j| row[j] * power[j])
                .sum();
            ratio(row[k] * power[k], net.noise_ul()[n] + interference)
        })
        .collect()
}

/// Associates each user with the BS of largest `g_nk * budget_n`; ties go to
/// the lowest BS index.
pub fn max_snr_association(net: &Network) -> Association {
    let a = (0..net.n_users())
        .map(|k| {
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for n in 0..net.n_bs() {
                let v = net.gain(n, k) * net.budget()[n];
                if v > best_val {
                    best_val = v;
                    best = n;
                }
            }
            best
        })
        .collect();
    Association(a)
}
