//! Ground-truth engines: exhaustive and branch-and-bound global optima for
//! small networks, the 3-SAT gadget network and its closed-form constants.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{max_snr_association, Association, Network, SolveResult};
use crate::power::{solve_power_fixed_assoc, FixedPointOptions};
use crate::twostage::dlsuma;

/// Largest number of associations the exhaustive search will visit.
pub const BRUTE_FORCE_CAP: f64 = 1e6;

/// Optimal min-SINR of a satisfiable gadget network, `(√7 - 1) / 3`.
pub fn gadget_threshold() -> f64 {
    (7f64.sqrt() - 1.0) / 3.0
}

fn allowed_bs(net: &Network) -> Result<Vec<Vec<usize>>> {
    (0..net.n_users())
        .map(|k| {
            let v: Vec<usize> = (0..net.n_bs()).filter(|&n| net.gain(n, k) > 0.0).collect();
            if v.is_empty() {
                Err(Error::UnreachableUser(k))
            } else {
                Ok(v)
            }
        })
        .collect()
}

fn better(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn pick(a: (f64, Vec<usize>), b: (f64, Vec<usize>)) -> (f64, Vec<usize>) {
    if better(&b, &a) {
        b
    } else {
        a
    }
}

fn value_of(net: &Network, a: &[usize], opts: &FixedPointOptions) -> f64 {
    let assoc = Association::from_vec(a.to_vec());
    solve_power_fixed_assoc(net, &assoc, opts).map_or(f64::NEG_INFINITY, |r| r.min_sinr)
}

/// Global max-min optimum by enumerating every association (or every
/// one-to-one association) that avoids zero-gain links. Ties go to the
/// lexicographically smallest association.
pub fn brute_force_optimum(
    net: &Network,
    restrict_one_to_one: bool,
    opts: &FixedPointOptions,
) -> Result<SolveResult> {
    let allowed = allowed_bs(net)?;
    let best = if restrict_one_to_one {
        if net.n_bs() != net.n_users() {
            return Err(Error::NotSquare {
                n_bs: net.n_bs(),
                n_users: net.n_users(),
            });
        }
        let size: f64 = (1..=net.n_users()).map(|i| i as f64).product();
        if size > BRUTE_FORCE_CAP {
            return Err(Error::TooLarge {
                size,
                cap: BRUTE_FORCE_CAP,
            });
        }
        allowed[0]
            .par_iter()
            .map(|&first| {
                let mut used = vec![false; net.n_bs()];
                used[first] = true;
                let mut cur = vec![first];
                let mut best = (f64::NEG_INFINITY, Vec::new());
                permutations_dfs(net, &allowed, opts, &mut cur, &mut used, &mut best);
                best
            })
            .reduce(|| (f64::NEG_INFINITY, Vec::new()), pick)
    } else {
        let size: f64 = allowed.iter().map(|v| v.len() as f64).product();
        if size > BRUTE_FORCE_CAP {
            return Err(Error::TooLarge {
                size,
                cap: BRUTE_FORCE_CAP,
            });
        }
        let allowed = &allowed;
        (0..size as usize)
            .into_par_iter()
            .map(|mut idx| {
                // Mixed radix with user 0 most significant keeps index order
                // equal to lexicographic order.
                let mut a = vec![0; allowed.len()];
                for k in (0..allowed.len()).rev() {
                    let r = allowed[k].len();
                    a[k] = allowed[k][idx % r];
                    idx /= r;
                }
                (value_of(net, &a, opts), a)
            })
            .reduce(|| (f64::NEG_INFINITY, Vec::new()), pick)
    };
    if best.1.is_empty() {
        return Err(Error::NoPerfectMatching);
    }
    let assoc = Association::new(net, best.1)?;
    solve_power_fixed_assoc(net, &assoc, opts)
}

fn permutations_dfs(
    net: &Network,
    allowed: &[Vec<usize>],
    opts: &FixedPointOptions,
    cur: &mut Vec<usize>,
    used: &mut [bool],
    best: &mut (f64, Vec<usize>),
) {
    let k = cur.len();
    if k == allowed.len() {
        let cand = (value_of(net, cur, opts), cur.clone());
        if better(&cand, best) {
            *best = cand;
        }
        return;
    }
    for &n in &allowed[k] {
        if !used[n] {
            used[n] = true;
            cur.push(n);
            permutations_dfs(net, allowed, opts, cur, used, best);
            cur.pop();
            used[n] = false;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    /// Order in which users are branched on; defaults to index order.
    pub order: Option<Vec<usize>>,
    /// Starting incumbent; defaults to the better of DLSumA and Max-SNR.
    pub incumbent: Option<Association>,
    /// A node is pruned when its bound is below `best * (1 - prune_rel)`.
    pub prune_rel: f64,
    pub power: FixedPointOptions,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            order: None,
            incumbent: None,
            prune_rel: 1e-7,
            power: FixedPointOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub result: SolveResult,
    /// Partial associations whose bound was evaluated.
    pub nodes: usize,
}

/// Global optimum by depth-first branch and bound. The max-min value of the
/// users assigned so far (all others removed) bounds every completion,
/// because dropping users only removes interference and power demand.
pub fn exact_optimum(net: &Network, opts: &ExactOptions) -> Result<ExactResult> {
    let allowed = allowed_bs(net)?;
    let k = net.n_users();
    let order = match &opts.order {
        Some(o) => {
            let mut seen = vec![false; k];
            if o.len() != k || o.iter().any(|&u| u >= k || std::mem::replace(&mut seen[u], true)) {
                return Err(Error::InvalidValue("order must be a permutation of the users".into()));
            }
            o.clone()
        }
        None => (0..k).collect(),
    };
    let incumbent = match &opts.incumbent {
        Some(a) => {
            a.validate(net)?;
            a.clone()
        }
        None => {
            let msnr = max_snr_association(net);
            match dlsuma(net, &opts.power) {
                Ok(r) if r.result.min_sinr > value_of(net, &msnr, &opts.power) => {
                    r.result.association
                }
                _ => msnr,
            }
        }
    };
    let mut search = Search {
        net,
        allowed: &allowed,
        order: &order,
        opts,
        best_value: value_of(net, &incumbent, &opts.power),
        best: incumbent.into_inner(),
        partial: vec![0; k],
        nodes: 0,
    };
    search.dfs(0)?;
    let assoc = Association::new(net, search.best)?;
    let result = solve_power_fixed_assoc(net, &assoc, &opts.power)?;
    Ok(ExactResult {
        result,
        nodes: search.nodes,
    })
}

struct Search<'a> {
    net: &'a Network,
    allowed: &'a [Vec<usize>],
    order: &'a [usize],
    opts: &'a ExactOptions,
    best_value: f64,
    best: Vec<usize>,
    partial: Vec<usize>,
    nodes: usize,
}

impl Search<'_> {
    fn dfs(&mut self, depth: usize) -> Result<()> {
        let user = self.order[depth];
        let mut choices = self.allowed[user].clone();
        choices.sort_by(|&a, &b| self.net.gain(b, user).total_cmp(&self.net.gain(a, user)));
        for n in choices {
            self.partial[user] = n;
            let users = &self.order[..=depth];
            let sub = self.net.restrict_users(users)?;
            let a: Vec<usize> = users.iter().map(|&u| self.partial[u]).collect();
            let bound = value_of(&sub, &a, &self.opts.power);
            self.nodes += 1;
            if bound < self.best_value * (1.0 - self.opts.prune_rel) {
                continue;
            }
            if depth + 1 == self.order.len() {
                if bound > self.best_value {
                    self.best_value = bound;
                    self.best = self.partial.clone();
                }
            } else {
                self.dfs(depth + 1)?;
            }
        }
        Ok(())
    }
}

/// Closed-form max-min values of the four configurations of the two-BS,
/// two-user gadget block with cross gains `f` (to user x) and `g` (to user
/// x̄), unit noise and budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockValues {
    /// Configurations 1..4: X serves x, X serves x̄ (swap), X serves both,
    /// X̄ serves both.
    pub gamma: [f64; 4],
    /// Optimal power of the lower-power BS in configurations 1 and 2; the
    /// other BS transmits at full power.
    pub low_power: f64,
}

pub fn block_config_values(f: f64, g: f64) -> Result<BlockValues> {
    if !(g > 0.0 && f >= g && f.is_finite()) {
        return Err(Error::InvalidValue(format!("need f >= g > 0, got f = {f}, g = {g}")));
    }
    let g1 = 2.0 / (1.0 / g + (1.0 / (g * g) + 4.0 * (1.0 + 1.0 / f)).sqrt());
    let g3 = 1.0 / (1.0 / f + 1.0 / g + 1.0);
    Ok(BlockValues {
        gamma: [g1, g1, g3, g3],
        low_power: 1.0 / g1 - 1.0 / g,
    })
}

/// A literal: variable index (1-based) with polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn from_dimacs(x: i64) -> Self {
        Literal {
            var: x.unsigned_abs() as usize,
            negated: x < 0,
        }
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var - 1] != self.negated
    }
}

/// 3-CNF formula with distinct variables inside every clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    n_vars: usize,
    clauses: Vec<[Literal; 3]>,
}

impl CnfFormula {
    pub fn new(n_vars: usize, clauses: Vec<[i64; 3]>) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::Parse("formula needs at least one variable".into()));
        }
        let mut out = Vec::with_capacity(clauses.len());
        for (m, c) in clauses.iter().enumerate() {
            for &x in c {
                if x == 0 || x.unsigned_abs() as usize > n_vars {
                    return Err(Error::Parse(format!(
                        "clause {m}: literal {x} out of range 1..={n_vars}"
                    )));
                }
            }
            let v = c.map(|x| x.unsigned_abs());
            if v[0] == v[1] || v[0] == v[2] || v[1] == v[2] {
                return Err(Error::Parse(format!(
                    "clause {m} repeats a variable: {} {} {}",
                    c[0], c[1], c[2]
                )));
            }
            out.push(c.map(Literal::from_dimacs));
        }
        Ok(CnfFormula {
            n_vars,
            clauses: out,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    /// Satisfiability by checking all `2^T` truth assignments.
    pub fn satisfiable_by_truth_table(&self) -> bool {
        assert!(self.n_vars < 32, "truth table too large");
        let mut a = vec![false; self.n_vars];
        (0u32..1 << self.n_vars).any(|bits| {
            for (t, v) in a.iter_mut().enumerate() {
                *v = bits >> t & 1 == 1;
            }
            self.eval(&a)
        })
    }

    /// Satisfying assignment found by DPLL with unit propagation.
    pub fn solve(&self) -> Option<Vec<bool>> {
        let clauses: Vec<Vec<Literal>> = self.clauses.iter().map(|c| c.to_vec()).collect();
        let mut assign = vec![None; self.n_vars];
        if dpll(&clauses, &mut assign) {
            Some(assign.into_iter().map(|v| v.unwrap_or(false)).collect())
        } else {
            None
        }
    }

    /// Uniform random formula: each clause draws 3 distinct variables and
    /// independent signs.
    pub fn random(n_vars: usize, n_clauses: usize, seed: u64) -> Result<Self> {
        if n_vars < 3 {
            return Err(Error::InvalidValue("random 3-CNF needs at least 3 variables".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let clauses = (0..n_clauses)
            .map(|_| {
                let vars = rand::seq::index::sample(&mut rng, n_vars, 3);
                let mut c = [0i64; 3];
                for (slot, v) in c.iter_mut().zip(vars.iter()) {
                    let s = if rng.random_bool(0.5) { -1 } else { 1 };
                    *slot = s * (v as i64 + 1);
                }
                c
            })
            .collect();
        CnfFormula::new(n_vars, clauses)
    }
}

fn dpll(clauses: &[Vec<Literal>], assign: &mut Vec<Option<bool>>) -> bool {
    let mut trail = Vec::new();
    loop {
        let mut unit = None;
        for c in clauses {
            let mut unassigned = None;
            let mut n_free = 0;
            let mut sat = false;
            for l in c {
                match assign[l.var - 1] {
                    Some(v) if v != l.negated => {
                        sat = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        n_free += 1;
                        unassigned = Some(*l);
                    }
                }
            }
            if sat {
                continue;
            }
            if n_free == 0 {
                for v in trail {
                    assign[v] = None;
                }
                return false;
            }
            if n_free == 1 {
                unit = unassigned;
                break;
            }
        }
        match unit {
            Some(l) => {
                assign[l.var - 1] = Some(!l.negated);
                trail.push(l.var - 1);
            }
            None => break,
        }
    }
    let Some(v) = assign.iter().position(Option::is_none) else {
        return true;
    };
    for value in [true, false] {
        assign[v] = Some(value);
        if dpll(clauses, assign) {
            return true;
        }
    }
    assign[v] = None;
    for v in trail {
        assign[v] = None;
    }
    false
}

impl FromStr for CnfFormula {
    type Err = Error;

    /// Parses DIMACS CNF text.
    fn from_str(s: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut lits: Vec<i64> = Vec::new();
        for line in s.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                break;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if header.is_some() || f.len() != 3 || f[0] != "cnf" {
                    return Err(Error::Parse(format!("bad problem line: {line}")));
                }
                let n = f[1].parse().map_err(|_| Error::Parse(format!("bad variable count: {}", f[1])))?;
                let m = f[2].parse().map_err(|_| Error::Parse(format!("bad clause count: {}", f[2])))?;
                header = Some((n, m));
                continue;
            }
            if header.is_none() {
                return Err(Error::Parse("clause before problem line".into()));
            }
            for tok in line.split_whitespace() {
                lits.push(tok.parse().map_err(|_| Error::Parse(format!("bad literal: {tok}")))?);
            }
        }
        let (n_vars, n_clauses) = header.ok_or_else(|| Error::Parse("missing problem line".into()))?;
        let mut clauses = Vec::new();
        let mut cur = Vec::new();
        for x in lits {
            if x == 0 {
                let c: [i64; 3] = cur.as_slice().try_into().map_err(|_| {
                    Error::Parse(format!("clause {} has {} literals, need 3", clauses.len(), cur.len()))
                })?;
                clauses.push(c);
                cur.clear();
            } else {
                cur.push(x);
            }
        }
        if !cur.is_empty() {
            return Err(Error::Parse("last clause is not terminated by 0".into()));
        }
        if clauses.len() != n_clauses {
            return Err(Error::Parse(format!(
                "header declares {n_clauses} clauses, found {}",
                clauses.len()
            )));
        }
        CnfFormula::new(n_vars, clauses)
    }
}

impl fmt::Display for CnfFormula {
    /// DIMACS CNF text.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.n_vars, self.clauses.len())?;
        for c in &self.clauses {
            writeln!(f, "{} {} {} 0", c[0].to_dimacs(), c[1].to_dimacs(), c[2].to_dimacs())?;
        }
        Ok(())
    }
}

/// Gain pattern inside a variable block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockGains {
    /// User x hears 2 from both variable BSs, user x̄ hears 1 from both.
    /// These gains give the closed-form block values.
    #[default]
    Corrected,
    /// Each variable BS has gain 2 to its own user and 1 to the other.
    TableFaithful,
}

/// Network encoding a 3-CNF formula. BS and user indices coincide: clause
/// `m` at index `m`, then for variable `t` the pair `(X_t, X̄_t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GadgetNetwork {
    pub network: Network,
    pub clause: Vec<usize>,
    /// `(X_t, X̄_t)` indices, used for both the BSs and their users.
    pub variable: Vec<(usize, usize)>,
}

impl GadgetNetwork {
    /// Variable users first, then clause users: a good branching order for
    /// [`exact_optimum`].
    pub fn search_order(&self) -> Vec<usize> {
        self.variable
            .iter()
            .flat_map(|&(x, xb)| [x, xb])
            .chain(self.clause.iter().copied())
            .collect()
    }
}

pub fn build_3sat_gadget(formula: &CnfFormula, block: BlockGains) -> GadgetNetwork {
    let m = formula.clauses().len();
    let t = formula.n_vars();
    let n = m + 2 * t;
    let clause: Vec<usize> = (0..m).collect();
    let variable: Vec<(usize, usize)> = (0..t).map(|i| (m + 2 * i, m + 2 * i + 1)).collect();
    let mut gain = vec![0.0; n * n];
    let h = (2.0 * 7f64.sqrt() + 1.0) / 3.0;
    for (j, c) in formula.clauses().iter().enumerate() {
        gain[j * n + j] = h;
        for l in c {
            let (x, xb) = variable[l.var - 1];
            let bs = if l.negated { xb } else { x };
            gain[bs * n + j] = 1.0;
        }
    }
    for &(x, xb) in &variable {
        let (xx, xbx, xxb, xbxb) = match block {
            BlockGains::Corrected => (2.0, 2.0, 1.0, 1.0),
            BlockGains::TableFaithful => (2.0, 1.0, 1.0, 2.0),
        };
        gain[x * n + x] = xx;
        gain[xb * n + x] = xbx;
        gain[x * n + xb] = xxb;
        gain[xb * n + xb] = xbxb;
    }
    let network = Network::with_equal_noise(n, n, gain, vec![1.0; n], 1.0)
        .expect("gadget gains are valid");
    GadgetNetwork {
        network,
        clause,
        variable,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatCheck {
    pub sat_by_solver: bool,
    pub network_opt: f64,
    pub agrees: bool,
    pub association: Association,
    pub nodes: usize,
}

/// Compares DPLL satisfiability with whether the gadget network reaches the
/// threshold `(√7 - 1) / 3 - tol`.
pub fn verify_sat_equivalence(formula: &CnfFormula, tol: f64) -> Result<SatCheck> {
    let gadget = build_3sat_gadget(formula, BlockGains::Corrected);
    let opts = ExactOptions {
        order: Some(gadget.search_order()),
        ..Default::default()
    };
    let exact = exact_optimum(&gadget.network, &opts)?;
    let sat_by_solver = formula.solve().is_some();
    let network_opt = exact.result.min_sinr;
    let reaches = network_opt >= gadget_threshold() - tol;
    Ok(SatCheck {
        sat_by_solver,
        network_opt,
        agrees: sat_by_solver == reaches,
        association: exact.result.association,
        nodes: exact.nodes,
    })
}
