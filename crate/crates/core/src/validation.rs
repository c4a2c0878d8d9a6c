//! Self-checks run by `relay-secrecy validate`: simulated statistics
//! against closed forms, degenerate operating points, the protocol
//! ordering, and per-slot invariants over randomised parameters.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    analytic_throughput_saturated, energy_saturation_condition, outage_triple, saturated_transition_probs,
    stationary_distribution, BirthDeathChain,
};
use crate::channel::{closed_form_outage, Link, LinkStats};
use crate::config::DEFAULT_SWEEP_VALUES;
use crate::engine::{run, sweep_protocols, SimConfig, Simulation, SweepAxis};
use crate::error::Result;
use crate::params::SystemParams;
use crate::protocol::{ActionKind, Protocol};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Engine outage frequencies over `slots` slots against the closed form,
/// within three binomial standard errors, for R in {0.5, 1, 2}.
pub fn check_outage(slots: u64, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for rate in [0.5, 1.0, 2.0] {
        let start = Instant::now();
        let mut cfg = SimConfig { n_slots: slots, seed, ..Default::default() };
        cfg.params.rate = rate;
        let m = run(&cfg)?;
        let freq = m.outage_frequencies();
        let closed = outage_triple(&cfg.params, &cfg.stats, Protocol::Fixed);
        let mut passed = true;
        let mut detail = String::new();
        for (name, f, p) in [("sd", freq[0], closed.sd), ("sr", freq[1], closed.sr), ("rd", freq[2], closed.rd)] {
            let se = (p * (1.0 - p) / slots as f64).sqrt();
            passed &= (f - p).abs() <= 3.0 * se;
            detail.push_str(&format!("{name}: {f:.5} vs {p:.5} (3se {:.5}); ", 3.0 * se));
        }
        detail.push_str(&format!("{:.2?}", start.elapsed()));
        out.push(CheckResult::new(format!("outage R={rate}"), passed, detail));
    }
    Ok(out)
}

/// Stationary law by repeated multiplication with the lazy transition matrix.
pub fn power_iteration(chain: &BirthDeathChain, iterations: usize) -> Vec<f64> {
    let mat = chain.transition_matrix();
    let n = mat.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        let mut next = vec![0.0; n];
        for (i, row) in mat.iter().enumerate() {
            for (j, &pij) in row.iter().enumerate() {
                next[j] += pi[i] * 0.5 * (pij + if i == j { 1.0 } else { 0.0 });
            }
        }
        pi = next;
    }
    pi
}

/// Fixed protocol with a near-unbounded battery: empirical relay-queue
/// occupancy against the product form (TV <= 0.05), and the product form
/// against power iteration (L-inf <= 1e-9).
pub fn check_stationary(seed: u64) -> Result<CheckResult> {
    let mut cfg = SimConfig { warmup: 10_000, n_slots: 60_000, seed, ..Default::default() };
    cfg.params.e_max = 1_000.0 * cfg.params.e_t();
    let t = outage_triple(&cfg.params, &cfg.stats, Protocol::Fixed);
    let chain = saturated_transition_probs(&t, cfg.params.c_r)?;
    let gamma = stationary_distribution(&chain);
    let oracle = power_iteration(&chain, 100_000);
    let linf = gamma
        .probabilities()
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let m = run(&cfg)?;
    let tv = 0.5
        * m.qr_occupancy()
            .iter()
            .zip(gamma.probabilities())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    let sat = energy_saturation_condition(&cfg.params, &cfg.stats, t.rd);
    Ok(CheckResult::new(
        "stationary distribution",
        sat && tv <= 0.05 && linf <= 1e-9,
        format!("tv {tv:.4} (<= 0.05), product vs power iteration {linf:.2e} (<= 1e-9), saturation {sat}"),
    ))
}

/// Fraction of post-warm-up slots with `q_e >= E_t`: above 0.99 when the
/// saturation condition holds, below 0.5 when it is strongly violated.
pub fn check_energy_saturation(seed: u64) -> Result<CheckResult> {
    let frac = |eta: f64| -> Result<(f64, f64, bool)> {
        let mut cfg = SimConfig { warmup: 10_000, n_slots: 60_000, seed, ..Default::default() };
        cfg.params.e_max = 1_000.0 * cfg.params.e_t();
        cfg.params.eta = eta;
        let t = outage_triple(&cfg.params, &cfg.stats, Protocol::Fixed);
        let threshold = crate::analysis::energy_saturation_threshold(&cfg.params, &cfg.stats, t.rd).unwrap_or(f64::INFINITY);
        Ok((run(&cfg)?.frac_energy_ge_et(), threshold, energy_saturation_condition(&cfg.params, &cfg.stats, t.rd)))
    };
    let (high, th_hi, cond_hi) = frac(1.0)?;
    let (low, th_lo, cond_lo) = frac(0.05)?;
    let violated = 20.0 < 0.5 * th_lo;
    Ok(CheckResult::new(
        "energy saturation",
        cond_hi && high > 0.99 && !cond_lo && violated && low < 0.5,
        format!("holds (P_S 20 > {th_hi:.3}): {high:.4} > 0.99; violated (P_S 20 < {th_lo:.1}/2): {low:.4} < 0.5"),
    ))
}

/// Adaptive >= fixed >= half-slot >= conventional at every rate.
pub fn check_ordering(replicates: u32, seed: u64) -> Result<CheckResult> {
    let start = Instant::now();
    let base = SimConfig { seed, ..Default::default() };
    let recs = sweep_protocols(&base, &Protocol::ALL, SweepAxis::Rate, &DEFAULT_SWEEP_VALUES, replicates)?;
    let n = DEFAULT_SWEEP_VALUES.len();
    let mut passed = true;
    let mut detail = String::new();
    for i in 0..n {
        for w in 0..Protocol::ALL.len() - 1 {
            let (a, b) = (&recs[w * n + i], &recs[(w + 1) * n + i]);
            let pooled = (a.throughput_stderr.unwrap_or(0.0).powi(2) + b.throughput_stderr.unwrap_or(0.0).powi(2)).sqrt();
            let gap = a.throughput_mean - b.throughput_mean;
            let ok = if gap.abs() > 0.01 { gap > 2.0 * pooled } else { gap >= -2.0 * pooled };
            if !ok {
                passed = false;
                detail.push_str(&format!(
                    "R={} {} {:.4} vs {} {:.4}; ",
                    a.value, a.protocol, a.throughput_mean, b.protocol, b.throughput_mean
                ));
            }
        }
    }
    detail.push_str(&format!("{} points in {:.1?}", recs.len(), start.elapsed()));
    Ok(CheckResult::new("protocol ordering", passed, detail))
}

/// Operating points with a known answer.
pub fn check_degenerate(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    // No harvesting: only the direct link can deliver.
    let mut worst = 0.0f64;
    for proto in Protocol::ALL {
        let mut cfg = SimConfig { protocol: proto, seed, ..Default::default() };
        cfg.params.eta = 0.0;
        cfg.params.lambda_s = 0.2;
        let m = run(&cfg)?;
        let p = 1.0 - outage_triple(&cfg.params, &cfg.stats, proto).sd;
        let busy = m.source_busy_slots as f64;
        let expect = p * m.source_busy_fraction();
        let se = (busy * p * (1.0 - p)).sqrt() / m.n_slots as f64;
        worst = worst.max((m.throughput() - expect).abs() / se);
    }
    out.push(CheckResult::new("eta = 0", worst <= 3.0, format!("max deviation {worst:.2} se")));

    let mut idle = true;
    for proto in Protocol::ALL {
        let mut cfg = SimConfig { protocol: proto, seed, ..Default::default() };
        cfg.params.lambda_s = 0.0;
        idle &= run(&cfg)?.delivered == 0;
    }
    out.push(CheckResult::new("lambda_s = 0", idle, "no deliveries"));

    // Direct link practically never in outage.
    let mut cfg = SimConfig { seed, ..Default::default() };
    cfg.params.p_s = 1e6;
    cfg.params.lambda_s = 0.5;
    cfg.stats = LinkStats::default().with(Link::SourceEave, 1e-9)?;
    let p_sd = outage_triple(&cfg.params, &cfg.stats, Protocol::Fixed).sd;
    let m = run(&cfg)?;
    let gap = (m.throughput() - m.source_busy_fraction()).abs();
    let tol = 3.0 * (m.source_busy_slots as f64 * p_sd * (1.0 - p_sd)).sqrt() / m.n_slots as f64 + p_sd;
    out.push(CheckResult::new(
        "direct link always secure",
        gap <= tol,
        format!("throughput {:.5} vs busy fraction {:.5}", m.throughput(), m.source_busy_fraction()),
    ));
    Ok(out)
}

fn random_params(rng: &mut ChaCha8Rng) -> (SystemParams, LinkStats, Protocol) {
    let mut p = SystemParams {
        p_s: rng.random_range(0.0..60.0),
        p_r: rng.random_range(0.0..60.0),
        e_p: rng.random_range(0.0..5.0),
        e_d: rng.random_range(0.0..10.0),
        c_r: rng.random_range(1..15),
        eta: rng.random_range(0.0..=1.0),
        rate: rng.random_range(0.05..4.0),
        kappa_w: rng.random_range(0.1..5.0),
        lambda_s: rng.random_range(0.0..=1.0),
        ..Default::default()
    };
    p.e_max = p.e_t() + rng.random_range(0.0..100.0);
    if rng.random_bool(0.5) {
        p.eavesdropper = crate::channel::EavesdropperModel::Shared;
    }
    let mut sigma = [0.0; Link::COUNT];
    sigma.iter_mut().for_each(|s| *s = rng.random_range(0.05..3.0));
    let proto = Protocol::ALL[rng.random_range(0..4)];
    (p, LinkStats::new(sigma).expect("positive sigmas"), proto)
}

/// Per-slot invariants over `sets` random parameter sets of `slots` slots each.
pub fn check_invariants(sets: usize, slots: u64, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for set in 0..sets {
        let (params, stats, protocol) = random_params(&mut rng);
        let initial = rng.random_range(0.0..=params.e_max);
        let cfg = SimConfig { params, stats, protocol, n_slots: slots, seed: rng.random(), initial_energy: initial, ..Default::default() };
        let mut sim = Simulation::new(cfg)?;
        while !sim.is_done() {
            let rec = sim.step()?;
            let (s, e, kind) = (rec.start, rec.end, rec.outcome.action.kind);
            let level = e.energy.level();
            if !(0.0..=params.e_max).contains(&level) {
                violations.push(format!("set {set}: battery {level}"));
            }
            if e.q_r > params.c_r || (protocol == Protocol::Conventional && e.q_r > 1) {
                violations.push(format!("set {set}: relay queue {}", e.q_r));
            }
            let e_out = rec.outcome.energy_flow.e_out();
            if e_out > s.energy.level() {
                violations.push(format!("set {set}: spent {e_out} of {}", s.energy.level()));
            }
            if matches!(protocol, Protocol::Fixed | Protocol::Adaptive) && !kind.is_proposed_state() {
                violations.push(format!("set {set}: {kind:?} outside the six states"));
            }
            let up = e.q_r > s.q_r;
            let down = e.q_r < s.q_r;
            if up != (kind == ActionKind::SrcToRelayData)
                || down != matches!(kind, ActionKind::RelayToDestSrcEnergy | ActionKind::RelayDrop)
            {
                violations.push(format!("set {set}: relay queue moved under {kind:?}"));
            }
            if violations.len() > 5 {
                break;
            }
        }
    }
    Ok(CheckResult::new(
        "invariants",
        violations.is_empty(),
        if violations.is_empty() {
            format!("{sets} parameter sets x {slots} slots")
        } else {
            violations.join("; ")
        },
    ))
}

/// Closed-form throughput bound: the saturated analytic throughput never
/// exceeds `mu_max`.
pub fn check_mu_bound(sets: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..sets {
        let (params, stats, protocol) = random_params(&mut rng);
        let t = outage_triple(&params, &stats, protocol);
        let g = stationary_distribution(&saturated_transition_probs(&t, params.c_r)?);
        let mu = analytic_throughput_saturated(&t, &g);
        worst = worst.max(mu.throughput - mu.mu_max);
    }
    Ok(CheckResult::new("mu <= mu_max", worst <= 1e-12, format!("max excess {worst:.2e}")))
}

/// Closed-form outage of the reference point at R = 1.
pub fn reference_outage() -> f64 {
    closed_form_outage(20.0, 1.0, 1.0, 1.0, 1.0)
}

/// Every check. `quick` shrinks sample sizes for a fast smoke run.
pub fn run_all(quick: bool, seed: u64) -> Result<Vec<CheckResult>> {
    let (outage_slots, reps, sets) = if quick { (100_000, 2, 100) } else { (1_000_000, 10, 1_000) };
    let mut out = check_outage(outage_slots, seed)?;
    out.push(check_stationary(seed)?);
    out.push(check_energy_saturation(seed)?);
    out.push(check_ordering(reps, seed)?);
    out.extend(check_degenerate(seed)?);
    out.push(check_invariants(sets, 100, seed)?);
    out.push(check_mu_bound(sets, seed)?);
    Ok(out)
}
