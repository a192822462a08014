//! One-to-one association through assignment on log channel gains.
//!
//! When some one-to-one association reaches SINR >= 1 for every user, it is
//! the unique maximizer of `Σ_k log g_{a_k k}`. Stage 1 solves that
//! assignment problem (Hungarian or auction); stage 2 runs the
//! fixed-association power solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Association, Network, SolveResult};
use crate::power::{solve_power_fixed_assoc, FixedPointOptions};

/// Entry value for a zero-gain link.
pub const FORBIDDEN: f64 = -1e18;

fn is_forbidden(g: f64) -> bool {
    g <= FORBIDDEN / 2.0
}

/// Square assignment problem. `gain[n * k + user]` is the value of giving
/// object (BS) `n` to person (user) `user`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentProblem {
    pub k: usize,
    pub gain: Vec<f64>,
}

impl AssignmentProblem {
    pub fn new(k: usize, gain: Vec<f64>) -> Result<Self> {
        if gain.len() != k * k {
            return Err(Error::DimensionMismatch {
                what: "assignment gain",
                expected: k * k,
                found: gain.len(),
            });
        }
        if gain.iter().any(|g| g.is_nan()) {
            return Err(Error::InvalidValue("assignment gain contains NaN".into()));
        }
        let prob = AssignmentProblem { k, gain };
        for i in 0..k {
            if (0..k).all(|j| is_forbidden(prob.value(i, j))) {
                return Err(Error::NoPerfectMatching);
            }
            if (0..k).all(|j| is_forbidden(prob.value(j, i))) {
                return Err(Error::NoPerfectMatching);
            }
        }
        Ok(prob)
    }

    /// Value of assigning BS `n` to user `user`.
    #[inline]
    pub fn value(&self, n: usize, user: usize) -> f64 {
        self.gain[n * self.k + user]
    }

    pub fn total_gain(&self, assignment: &[usize]) -> f64 {
        assignment
            .iter()
            .enumerate()
            .map(|(user, &n)| self.value(n, user))
            .sum()
    }

    /// Largest minus smallest allowed entry.
    pub fn gain_range(&self) -> f64 {
        let (lo, hi) = self
            .gain
            .iter()
            .filter(|g| !is_forbidden(**g))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &g| {
                (lo.min(g), hi.max(g))
            });
        hi - lo
    }

    pub fn max_abs_gain(&self) -> f64 {
        self.gain
            .iter()
            .filter(|g| !is_forbidden(**g))
            .fold(0.0, |m, g| m.max(g.abs()))
    }

    /// Default auction precision: `1e-6` of the gain range.
    pub fn default_eps(&self) -> f64 {
        let r = self.gain_range();
        if r > 0.0 {
            1e-6 * r
        } else {
            1e-6
        }
    }

    fn uses_forbidden(&self, assignment: &[usize]) -> bool {
        assignment
            .iter()
            .enumerate()
            .any(|(user, &n)| is_forbidden(self.value(n, user)))
    }
}

/// `G_nk = log g_nk`, forbidden where the gain is zero.
pub fn log_gain_matrix(net: &Network) -> Result<AssignmentProblem> {
    if net.n_bs() != net.n_users() {
        return Err(Error::NotSquare {
            n_bs: net.n_bs(),
            n_users: net.n_users(),
        });
    }
    let gain = net
        .gains()
        .iter()
        .map(|&g| if g > 0.0 { g.ln() } else { FORBIDDEN })
        .collect();
    AssignmentProblem::new(net.n_users(), gain)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// BS assigned to each user.
    pub assignment: Vec<usize>,
    pub total_gain: f64,
}

/// Maximum-gain perfect matching (shortest augmenting paths with potentials).
pub fn hungarian(prob: &AssignmentProblem) -> Result<Assignment> {
    let n = prob.k;
    // Rows are users, columns BSs; minimize -gain. Index 0 is a sentinel.
    let cost = |user: usize, bs: usize| -prob.value(bs, user);
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[col_owner[j] - 1] = j - 1;
    }
    if prob.uses_forbidden(&assignment) {
        return Err(Error::NoPerfectMatching);
    }
    let total_gain = prob.total_gain(&assignment);
    Ok(Assignment {
        assignment,
        total_gain,
    })
}

/// Initial auction prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialPrices {
    Zero,
    /// `w_n = -log budget_n`.
    NegLogBudget(Vec<f64>),
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOptions {
    /// Round cap for each ε phase.
    pub max_rounds: usize,
    pub initial_prices: InitialPrices,
}

impl Default for AuctionOptions {
    fn default() -> Self {
        AuctionOptions {
            max_rounds: 1_000_000,
            initial_prices: InitialPrices::Zero,
        }
    }
}

/// Jacobi auction state: every unassigned user bids in each round.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionState {
    pub prices: Vec<f64>,
    /// BS assigned to each user, if any.
    pub assigned: Vec<Option<usize>>,
    /// User held by each BS, if any.
    pub owner: Vec<Option<usize>>,
    pub eps: f64,
    pub rounds: usize,
    pub bids: usize,
    pub reassignments: usize,
}

impl AuctionState {
    pub fn new(prob: &AssignmentProblem, eps: f64, prices: Vec<f64>) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidValue(format!("eps = {eps} must be > 0")));
        }
        if prices.len() != prob.k {
            return Err(Error::DimensionMismatch {
                what: "prices",
                expected: prob.k,
                found: prices.len(),
            });
        }
        Ok(AuctionState {
            prices,
            assigned: vec![None; prob.k],
            owner: vec![None; prob.k],
            eps,
            rounds: 0,
            bids: 0,
            reassignments: 0,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.assigned.iter().all(Option::is_some)
    }

    /// Best BS of `user` at current prices and the bidding increment
    /// (best net value minus second best).
    fn best_bid(&self, prob: &AssignmentProblem, user: usize, range: f64) -> Option<(usize, f64)> {
        let mut best = None;
        let mut best_val = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for n in 0..prob.k {
            let g = prob.value(n, user);
            if is_forbidden(g) {
                continue;
            }
            let v = g - self.prices[n];
            if v > best_val {
                second = best_val;
                best_val = v;
                best = Some(n);
            } else if v > second {
                second = v;
            }
        }
        let n = best?;
        // No alternative: bid the full gain range.
        let increment = if second == f64::NEG_INFINITY {
            range + self.eps
        } else {
            best_val - second
        };
        Some((n, increment))
    }

    /// One bidding and assignment round.
    pub fn step(&mut self, prob: &AssignmentProblem) {
        let range = prob.gain_range();
        let mut best_for_bs: Vec<Option<(usize, f64)>> = vec![None; prob.k];
        for user in 0..prob.k {
            if self.assigned[user].is_some() {
                continue;
            }
            let Some((n, inc)) = self.best_bid(prob, user, range) else {
                continue;
            };
            self.bids += 1;
            // Highest increment wins; ties go to the lower user index.
            match best_for_bs[n] {
                Some((_, top)) if top >= inc => {}
                _ => best_for_bs[n] = Some((user, inc)),
            }
        }
        for (n, bid) in best_for_bs.into_iter().enumerate() {
            let Some((user, inc)) = bid else { continue };
            if let Some(prev) = self.owner[n] {
                self.assigned[prev] = None;
                self.reassignments += 1;
            }
            self.owner[n] = Some(user);
            self.assigned[user] = Some(n);
            self.prices[n] += inc + self.eps;
        }
        self.rounds += 1;
    }

    /// Drops every assignment, keeping prices (for ε-scaling warm starts).
    fn reset_assignment(&mut self, eps: f64) {
        self.assigned.fill(None);
        self.owner.fill(None);
        self.eps = eps;
    }

    fn run(&mut self, prob: &AssignmentProblem, max_rounds: usize) -> Result<()> {
        let start = self.rounds;
        while !self.is_complete() {
            if self.rounds - start >= max_rounds {
                return Err(Error::AuctionRoundCap { rounds: max_rounds });
            }
            self.step(prob);
        }
        Ok(())
    }

    fn assignment(&self) -> Vec<usize> {
        self.assigned.iter().map(|a| a.expect("complete auction")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub assignment: Vec<usize>,
    pub total_gain: f64,
    pub prices: Vec<f64>,
    pub iterations: usize,
    pub bids: usize,
}

fn initial_prices(prob: &AssignmentProblem, opts: &AuctionOptions) -> Result<Vec<f64>> {
    let w = match &opts.initial_prices {
        InitialPrices::Zero => vec![0.0; prob.k],
        InitialPrices::NegLogBudget(b) => b.iter().map(|x| -x.ln()).collect(),
        InitialPrices::Given(w) => w.clone(),
    };
    if w.len() != prob.k || w.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidValue("initial prices must be K finite values".into()));
    }
    Ok(w)
}

fn finish(prob: &AssignmentProblem, state: &AuctionState) -> AuctionOutcome {
    let assignment = state.assignment();
    AuctionOutcome {
        total_gain: prob.total_gain(&assignment),
        assignment,
        prices: state.prices.clone(),
        iterations: state.rounds,
        bids: state.bids,
    }
}

/// Jacobi auction. The result is within `K * eps` of the optimal total gain.
pub fn auction(prob: &AssignmentProblem, eps: f64, opts: &AuctionOptions) -> Result<AuctionOutcome> {
    let mut state = AuctionState::new(prob, eps, initial_prices(prob, opts)?)?;
    state.run(prob, opts.max_rounds)?;
    Ok(finish(prob, &state))
}

/// Auction run with a strictly decreasing ε schedule, warm-starting prices.
pub fn auction_eps_scaling(
    prob: &AssignmentProblem,
    schedule: &[f64],
    opts: &AuctionOptions,
) -> Result<AuctionOutcome> {
    let Some(&first) = schedule.first() else {
        return Err(Error::InvalidValue("empty eps schedule".into()));
    };
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidValue("eps schedule must strictly decrease".into()));
    }
    let mut state = AuctionState::new(prob, first, initial_prices(prob, opts)?)?;
    for &eps in schedule {
        if !(eps > 0.0) {
            return Err(Error::InvalidValue(format!("eps = {eps} must be > 0")));
        }
        state.reset_assignment(eps);
        state.run(prob, opts.max_rounds)?;
    }
    Ok(finish(prob, &state))
}

/// Schedule starting at the gain range and dividing by ten down to `eps`.
pub fn default_eps_schedule(prob: &AssignmentProblem, eps: f64) -> Vec<f64> {
    let mut schedule = Vec::new();
    let mut e = prob.gain_range();
    while e > eps {
        schedule.push(e);
        e /= 10.0;
    }
    schedule.push(eps);
    schedule
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OneToOneStatus {
    /// min-SINR >= 1: globally optimal, also for the many-to-one problem.
    Optimal,
    /// min-SINR < 1: no association reaches SINR >= 1 for all users; the
    /// result is a feasible but possibly suboptimal point.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneToOneResult {
    pub status: OneToOneStatus,
    pub result: SolveResult,
}

fn classify(result: SolveResult) -> OneToOneResult {
    let status = if result.min_sinr >= 1.0 {
        OneToOneStatus::Optimal
    } else {
        OneToOneStatus::Infeasible
    };
    OneToOneResult { status, result }
}

/// Hungarian assignment on log gains, then fixed-association power.
pub fn solve_p1prime(net: &Network, opts: &FixedPointOptions) -> Result<OneToOneResult> {
    let prob = log_gain_matrix(net)?;
    let assign = hungarian(&prob).map_err(Error::at_stage("p1prime stage 1"))?;
    let assoc = Association::new(net, assign.assignment)?;
    let result = solve_power_fixed_assoc(net, &assoc, opts)
        .map_err(Error::at_stage("p1prime stage 2"))?;
    Ok(classify(result))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AufpOptions {
    /// Final auction precision; defaults to `1e-6` of the log-gain range.
    pub eps: Option<f64>,
    /// Run ε-scaling down to `eps` instead of a single auction.
    pub eps_scaling: bool,
    pub auction: AuctionOptions,
    pub power: FixedPointOptions,
}

impl Default for AufpOptions {
    fn default() -> Self {
        AufpOptions {
            eps: None,
            eps_scaling: true,
            auction: AuctionOptions::default(),
            power: FixedPointOptions::default(),
        }
    }
}

/// AUFP: auction on log gains, then fixed-association power.
pub fn aufp(net: &Network, opts: &AufpOptions) -> Result<OneToOneResult> {
    let prob = log_gain_matrix(net)?;
    let eps = opts.eps.unwrap_or_else(|| prob.default_eps());
    let outcome = if opts.eps_scaling {
        auction_eps_scaling(&prob, &default_eps_schedule(&prob, eps), &opts.auction)
    } else {
        auction(&prob, eps, &opts.auction)
    }
    .map_err(Error::at_stage("aufp stage 1"))?;
    let assoc = Association::new(net, outcome.assignment)?;
    let result = solve_power_fixed_assoc(net, &assoc, &opts.power)
        .map_err(Error::at_stage("aufp stage 2"))?;
    Ok(classify(result))
}
