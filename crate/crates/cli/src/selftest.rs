//! Small oracle-equivalence suite: every check compares a solver against an
//! independent computation on seeded random instances.

use anyhow::Result;
use hetassoc::matching::{auction, hungarian, log_gain_matrix, solve_p1prime, OneToOneStatus};
use hetassoc::oracle::{
    brute_force_optimum, gadget_threshold, block_config_values, verify_sat_equivalence, CnfFormula,
};
use hetassoc::power::FixedPointOptions;
use hetassoc::sumpower::{dl_sumpower_power, ulsum};
use hetassoc::twostage::dlsuma;
use hetassoc::Network;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_net(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Network {
    let g = (0..n * k).map(|_| 10f64.powf(rng.random_range(-2.0..1.5))).collect();
    let b = (0..n).map(|_| 10f64.powf(rng.random_range(0.0..1.0))).collect();
    Network::with_equal_noise(n, k, g, b, 1.0).expect("positive gains")
}

fn report(name: &str, ok: bool, detail: String) -> bool {
    println!("{name}: {} - {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

pub fn run(seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = FixedPointOptions::default();
    let mut all = true;

    let block = Network::with_equal_noise(2, 2, vec![2.0, 1.0, 2.0, 1.0], vec![1.0; 2], 1.0)?;
    let bf = brute_force_optimum(&block, false, &opts)?;
    let cf = block_config_values(2.0, 1.0)?;
    all &= report(
        "gadget block",
        (bf.min_sinr - cf.gamma[0]).abs() < 1e-9,
        format!("exhaustive {:.9}, closed form {:.9}", bf.min_sinr, cf.gamma[0]),
    );

    let mut agree = 0;
    let n_formulas = 6;
    for i in 0..n_formulas {
        let f = CnfFormula::random(3, 1 + i % 3, rng.random())?;
        let c = verify_sat_equivalence(&f, 1e-6)?;
        agree += (c.agrees && c.sat_by_solver == f.satisfiable_by_truth_table()) as usize;
    }
    all &= report(
        "3-SAT gadget",
        agree == n_formulas,
        format!("{agree}/{n_formulas} formulas agree at threshold {:.6}", gadget_threshold()),
    );

    let (mut high, mut bad) = (0, 0);
    let n_inst = 40;
    for _ in 0..n_inst {
        let net = random_net(&mut rng, 3, 3);
        let best = brute_force_optimum(&net, false, &opts)?;
        let p1 = solve_p1prime(&net, &opts)?;
        let d = dlsuma(&net, &opts)?;
        if best.min_sinr >= 1.0 {
            high += 1;
            bad += ((p1.result.min_sinr - best.min_sinr).abs() > 1e-6) as usize;
            bad += ((d.result.min_sinr - best.min_sinr).abs() > 1e-6) as usize;
        } else {
            bad += (p1.status != OneToOneStatus::Infeasible) as usize;
        }
        bad += (d.result.min_sinr > best.min_sinr * (1.0 + 1e-9)) as usize;
    }
    all &= report(
        "one-to-one optimum",
        bad == 0,
        format!("{n_inst} instances ({high} with optimum >= 1), {bad} mismatches"),
    );

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(1..=4);
        let k = rng.random_range(1..=5);
        let net = random_net(&mut rng, n, k);
        let s = net.total_budget();
        let ul = ulsum(&net, s, &opts)?;
        let dl = dl_sumpower_power(&net, &ul.assoc, s, &opts)?;
        worst = worst.max((ul.gamma_sum - dl.min_sinr).abs() / ul.gamma_sum.max(1.0));
    }
    all &= report("duality", worst <= 1e-6, format!("max relative gap {worst:.1e}"));

    let mut bad = 0;
    for _ in 0..20 {
        let net = random_net(&mut rng, 5, 5);
        let prob = log_gain_matrix(&net)?;
        let h = hungarian(&prob)?;
        let eps = prob.default_eps();
        let a = auction(&prob, eps, &Default::default())?;
        bad += (a.total_gain > h.total_gain + 1e-12 || a.total_gain < h.total_gain - 5.0 * eps) as usize;
    }
    all &= report("assignment", bad == 0, format!("{bad} of 20 auctions off the Hungarian optimum"));

    Ok(all)
}
