//! Random HetNet instances: hexagonal macro grid, picos scattered inside each
//! macro cell, path loss with log-normal shadowing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Network;

const MAX_TRIES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserDist {
    /// `floor(sqrt(K))` users in one macro cell, the rest uniform.
    Congested,
    /// User `k` uniform in cell `phi(k)`; `phi` is a random permutation of
    /// the BSs repeated with period `N`.
    UniInCell,
}

fn d_gap() -> f64 {
    16.0
}
fn d_spacing() -> f64 {
    1000.0
}
fn d_pico_min() -> f64 {
    250.0
}
fn d_ref() -> f64 {
    200.0
}
fn d_exp() -> f64 {
    3.7
}
fn d_shadow() -> f64 {
    8.0
}
fn d_noise() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_macro: usize,
    pub picos_per_macro: usize,
    pub n_users: usize,
    /// Pico budget in dB relative to the unit noise power. Sweeps replace it.
    #[serde(default)]
    pub snr_db: f64,
    #[serde(default = "d_gap")]
    pub macro_power_gap_db: f64,
    #[serde(default = "d_spacing")]
    pub macro_spacing_m: f64,
    #[serde(default = "d_pico_min")]
    pub pico_min_dist_m: f64,
    #[serde(default = "d_ref")]
    pub pathloss_ref_m: f64,
    #[serde(default = "d_exp")]
    pub pathloss_exp: f64,
    #[serde(default = "d_shadow")]
    pub shadow_std_db: f64,
    #[serde(default = "d_noise")]
    pub noise: f64,
    pub user_dist: UserDist,
    #[serde(default)]
    pub seed: u64,
    /// Macro cell holding the congested users; defaults to the one nearest
    /// the grid center.
    #[serde(default)]
    pub congested_cell: Option<usize>,
    /// Number of congested users; defaults to `floor(sqrt(K))`.
    #[serde(default)]
    pub n_congested: Option<usize>,
    /// Measure distances on a torus over the bounding box.
    #[serde(default)]
    pub wrap_around: bool,
}

impl ScenarioConfig {
    pub fn new(n_macro: usize, picos_per_macro: usize, n_users: usize, snr_db: f64, user_dist: UserDist) -> Self {
        ScenarioConfig {
            n_macro,
            picos_per_macro,
            n_users,
            snr_db,
            macro_power_gap_db: d_gap(),
            macro_spacing_m: d_spacing(),
            pico_min_dist_m: d_pico_min(),
            pathloss_ref_m: d_ref(),
            pathloss_exp: d_exp(),
            shadow_std_db: d_shadow(),
            noise: d_noise(),
            user_dist,
            seed: 0,
            congested_cell: None,
            n_congested: None,
            wrap_around: false,
        }
    }

    pub fn n_bs(&self) -> usize {
        self.n_macro * (self.picos_per_macro + 1)
    }

    pub fn pico_power(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn macro_power(&self) -> f64 {
        10f64.powf((self.snr_db + self.macro_power_gap_db) / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidValue(m.into()));
        if self.n_macro == 0 || self.n_users == 0 {
            return bad("n_macro and n_users must be >= 1");
        }
        let positive = [
            self.macro_spacing_m,
            self.pathloss_ref_m,
            self.pathloss_exp,
            self.noise,
        ];
        if positive.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return bad("spacing, reference distance, exponent and noise must be positive");
        }
        if !(self.pico_min_dist_m >= 0.0 && self.shadow_std_db >= 0.0) {
            return bad("pico_min_dist_m and shadow_std_db must be >= 0");
        }
        if !self.snr_db.is_finite() || !self.macro_power_gap_db.is_finite() {
            return bad("snr_db and macro_power_gap_db must be finite");
        }
        if let Some(c) = self.congested_cell {
            if c >= self.n_macro {
                return bad("congested_cell out of range");
            }
        }
        if self.n_congested.is_some_and(|c| c > self.n_users) {
            return bad("n_congested exceeds n_users");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsKind {
    Macro,
    Pico,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsSite {
    pub x: f64,
    pub y: f64,
    pub kind: BsKind,
    /// Macro cell the site belongs to.
    pub macro_cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Macros first, then the picos of macro 0, macro 1, ...
    pub bs: Vec<BsSite>,
    pub users: Vec<[f64; 2]>,
    /// Nearest BS of each user (its Voronoi cell).
    pub user_cell: Vec<usize>,
    /// Bounding box `[x_min, y_min, x_max, y_max]` of the macro hexagons.
    pub bbox: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hetnet {
    pub network: Network,
    pub geometry: Geometry,
}

/// `(rows, cols)` of the near-square macro layout.
pub fn grid_shape(n_macro: usize) -> (usize, usize) {
    let rows = ((n_macro as f64).sqrt().round() as usize).max(1);
    (rows, n_macro.div_ceil(rows))
}

/// Macro centers: rows spaced `spacing * √3/2` apart, odd rows shifted by
/// half a spacing.
pub fn macro_centers(n_macro: usize, spacing: f64) -> Vec<[f64; 2]> {
    let (_, cols) = grid_shape(n_macro);
    (0..n_macro)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            let shift = if r % 2 == 1 { spacing / 2.0 } else { 0.0 };
            [c as f64 * spacing + shift, r as f64 * spacing * 3f64.sqrt() / 2.0]
        })
        .collect()
}

/// Pointy-top hexagon with inradius `spacing / 2` centered at the origin.
fn in_hexagon(dx: f64, dy: f64, spacing: f64) -> bool {
    let r = spacing / 2.0;
    dx.abs() <= r && dx.abs() / 2.0 + dy.abs() * 3f64.sqrt() / 2.0 <= r
}

fn sample_in_hexagon(rng: &mut ChaCha8Rng, center: [f64; 2], spacing: f64) -> [f64; 2] {
    let r = spacing / 2.0;
    let circ = spacing / 3f64.sqrt();
    loop {
        let dx = rng.random_range(-r..=r);
        let dy = rng.random_range(-circ..=circ);
        if in_hexagon(dx, dy, spacing) {
            return [center[0] + dx, center[1] + dy];
        }
    }
}

fn sample_in_area(rng: &mut ChaCha8Rng, centers: &[[f64; 2]], spacing: f64) -> [f64; 2] {
    let m = rng.random_range(0..centers.len());
    sample_in_hexagon(rng, centers[m], spacing)
}

/// Path-loss gain `10^(shadow_db/10) * (ref / d)^exp`, with `d` clamped to
/// at least 1 m.
pub fn pathloss_gain(d: f64, ref_m: f64, exp: f64, shadow_db: f64) -> f64 {
    10f64.powf(shadow_db / 10.0) * (ref_m / d.max(1.0)).powf(exp)
}

/// One log-normal shadowing draw in dB.
pub fn shadowing_db_sample<R: Rng + ?Sized>(rng: &mut R, std_db: f64) -> f64 {
    if std_db == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, std_db).expect("finite std").sample(rng)
}

struct Metric {
    wrap: Option<(f64, f64)>,
}

impl Metric {
    fn dist(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mut dx = (a[0] - b[0]).abs();
        let mut dy = (a[1] - b[1]).abs();
        if let Some((w, h)) = self.wrap {
            dx = dx.min(w - dx);
            dy = dy.min(h - dy);
        }
        dx.hypot(dy)
    }

    fn nearest(&self, p: [f64; 2], bs: &[BsSite]) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, s) in bs.iter().enumerate() {
            let d = self.dist(p, [s.x, s.y]);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        best
    }
}

fn bounding_box(centers: &[[f64; 2]], spacing: f64) -> [f64; 4] {
    let r = spacing / 2.0;
    let circ = spacing / 3f64.sqrt();
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for c in centers {
        b[0] = b[0].min(c[0] - r);
        b[1] = b[1].min(c[1] - circ);
        b[2] = b[2].max(c[0] + r);
        b[3] = b[3].max(c[1] + circ);
    }
    b
}

fn center_macro(centers: &[[f64; 2]]) -> usize {
    let n = centers.len() as f64;
    let cx = centers.iter().map(|c| c[0]).sum::<f64>() / n;
    let cy = centers.iter().map(|c| c[1]).sum::<f64>() / n;
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = (c[0] - cx).hypot(c[1] - cy);
        if d < bd - 1e-9 {
            bd = d;
            best = i;
        }
    }
    best
}

/// Builds the network and geometry for `config`; deterministic in
/// `config.seed`.
pub fn generate_hetnet(config: &ScenarioConfig) -> Result<Hetnet> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let spacing = config.macro_spacing_m;
    let centers = macro_centers(config.n_macro, spacing);
    let bbox = bounding_box(&centers, spacing);
    let metric = Metric {
        wrap: config
            .wrap_around
            .then(|| (bbox[2] - bbox[0], bbox[3] - bbox[1])),
    };

    let mut bs: Vec<BsSite> = centers
        .iter()
        .enumerate()
        .map(|(m, c)| BsSite {
            x: c[0],
            y: c[1],
            kind: BsKind::Macro,
            macro_cell: m,
        })
        .collect();
    for (m, &c) in centers.iter().enumerate() {
        for _ in 0..config.picos_per_macro {
            let mut tries = 0;
            let p = loop {
                let p = sample_in_hexagon(&mut rng, c, spacing);
                if (p[0] - c[0]).hypot(p[1] - c[1]) >= config.pico_min_dist_m {
                    break p;
                }
                tries += 1;
                if tries >= MAX_TRIES {
                    return Err(Error::Geometry(format!(
                        "no pico site at least {} m from macro {m}",
                        config.pico_min_dist_m
                    )));
                }
            };
            bs.push(BsSite {
                x: p[0],
                y: p[1],
                kind: BsKind::Pico,
                macro_cell: m,
            });
        }
    }
    let n_bs = bs.len();
    let k = config.n_users;

    let users = place_users(config, &bs, &centers, &metric, &mut rng)?;
    let user_cell: Vec<usize> = users.iter().map(|&u| metric.nearest(u, &bs)).collect();

    let mut gain = Vec::with_capacity(n_bs * k);
    for s in &bs {
        for &u in &users {
            let shadow = shadowing_db_sample(&mut rng, config.shadow_std_db);
            let d = metric.dist([s.x, s.y], u);
            gain.push(pathloss_gain(d, config.pathloss_ref_m, config.pathloss_exp, shadow));
        }
    }
    let budget = bs
        .iter()
        .map(|s| match s.kind {
            BsKind::Macro => config.macro_power(),
            BsKind::Pico => config.pico_power(),
        })
        .collect();
    let network = Network::with_equal_noise(n_bs, k, gain, budget, config.noise)?;
    Ok(Hetnet {
        network,
        geometry: Geometry {
            bs,
            users,
            user_cell,
            bbox,
        },
    })
}

fn place_users(
    config: &ScenarioConfig,
    bs: &[BsSite],
    centers: &[[f64; 2]],
    metric: &Metric,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<[f64; 2]>> {
    let k = config.n_users;
    let spacing = config.macro_spacing_m;
    match config.user_dist {
        UserDist::Congested => {
            let cell = config.congested_cell.unwrap_or_else(|| center_macro(centers));
            let n_cong = config
                .n_congested
                .unwrap_or_else(|| (k as f64).sqrt().floor() as usize);
            Ok((0..k)
                .map(|i| {
                    if i < n_cong {
                        sample_in_hexagon(rng, centers[cell], spacing)
                    } else {
                        sample_in_area(rng, centers, spacing)
                    }
                })
                .collect())
        }
        UserDist::UniInCell => {
            let mut phi: Vec<usize> = (0..bs.len()).collect();
            phi.shuffle(rng);
            (0..k)
                .map(|i| {
                    let target = phi[i % bs.len()];
                    for _ in 0..MAX_TRIES {
                        let p = sample_in_area(rng, centers, spacing);
                        if metric.nearest(p, bs) == target {
                            return Ok(p);
                        }
                    }
                    Err(Error::Geometry(format!("cell of BS {target} has no sampled point")))
                })
                .collect()
        }
    }
}
