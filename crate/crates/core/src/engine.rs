//! Seeded slot-by-slot simulation and parameter sweeps.
//!
//! Every slot draws the nine link gains and then the source arrival from
//! the same stream, whatever the protocol does. Runs with the same seed
//! therefore see the same channels and arrivals across protocols.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::analysis::{analytic_companion, energy_saturation_condition, outage_triple};
use crate::channel::{is_secure, sample_slot, LinkStats, SlotChannels};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::protocol::{apply_action, decide_with_capacities, ActionKind, NetworkState, Protocol, SlotCapacities, SlotOutcome};

pub const DEFAULT_SLOTS: u64 = 50_000;
pub const DEFAULT_REPLICATES: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: SystemParams,
    pub stats: LinkStats,
    pub protocol: Protocol,
    pub n_slots: u64,
    /// Slots excluded from occupancy and battery statistics. Throughput
    /// always counts every slot.
    pub warmup: u64,
    pub seed: u64,
    pub initial_energy: f64,
    /// Whether the half-slot baseline may use the direct link.
    pub halfslot_direct_link: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            stats: LinkStats::default(),
            protocol: Protocol::Fixed,
            n_slots: DEFAULT_SLOTS,
            warmup: 0,
            seed: 0,
            initial_energy: 0.0,
            halfslot_direct_link: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_slots == 0 {
            return Err(Error::param("n_slots", "must be at least 1"));
        }
        if self.warmup >= self.n_slots {
            return Err(Error::param(
                "warmup",
                format!("warmup {} must be below n_slots {}", self.warmup, self.n_slots),
            ));
        }
        if !(0.0..=self.params.e_max).contains(&self.initial_energy) {
            return Err(Error::param(
                "initial_energy",
                format!("{} outside [0, E_max = {}]", self.initial_energy, self.params.e_max),
            ));
        }
        Ok(())
    }
}

/// Aggregated statistics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub protocol: Protocol,
    pub n_slots: u64,
    pub warmup: u64,
    pub delivered: u64,
    pub delivered_post_warmup: u64,
    pub drops: u64,
    /// Slots per action kind, indexed by [`ActionKind::index`].
    pub state_histogram: [u64; ActionKind::COUNT],
    /// Slots in which relay antenna 1 or 2 carried data.
    pub antenna_histogram: [u64; 2],
    /// Slots with a non-empty source queue at slot start, over all slots.
    pub source_busy_slots: u64,
    /// Post-warm-up slot-start occupancy counts of the relay queue.
    pub qr_counts: Vec<u64>,
    /// Post-warm-up up and down moves out of each relay-queue state.
    pub qr_up: Vec<u64>,
    pub qr_down: Vec<u64>,
    pub energy_sum: f64,
    pub slots_energy_ge_et: u64,
    pub slots_energy_ge_ed: u64,
    pub clipping_loss: f64,
    /// Slot counts in secrecy outage at rate R on the S-D, S-R and R-D
    /// links. For the adaptive protocol a relay hop is in outage only
    /// when both antennas are.
    pub outage_counts: [u64; 3],
    pub signaling_bits: u8,
}

impl Metrics {
    fn new(cfg: &SimConfig) -> Self {
        let states = cfg.params.c_r + 1;
        Self {
            protocol: cfg.protocol,
            n_slots: cfg.n_slots,
            warmup: cfg.warmup,
            delivered: 0,
            delivered_post_warmup: 0,
            drops: 0,
            state_histogram: [0; ActionKind::COUNT],
            antenna_histogram: [0; 2],
            source_busy_slots: 0,
            qr_counts: vec![0; states],
            qr_up: vec![0; states],
            qr_down: vec![0; states],
            energy_sum: 0.0,
            slots_energy_ge_et: 0,
            slots_energy_ge_ed: 0,
            clipping_loss: 0.0,
            outage_counts: [0; 3],
            signaling_bits: cfg.protocol.signaling_bits(),
        }
    }

    pub fn measured_slots(&self) -> u64 {
        self.n_slots - self.warmup
    }

    /// Secure packets per slot over the whole run.
    pub fn throughput(&self) -> f64 {
        self.delivered as f64 / self.n_slots as f64
    }

    pub fn throughput_post_warmup(&self) -> f64 {
        self.delivered_post_warmup as f64 / self.measured_slots() as f64
    }

    pub fn source_busy_fraction(&self) -> f64 {
        self.source_busy_slots as f64 / self.n_slots as f64
    }

    /// Empirical relay-queue occupancy after warm-up.
    pub fn qr_occupancy(&self) -> Vec<f64> {
        let n = self.measured_slots() as f64;
        self.qr_counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn mean_energy(&self) -> f64 {
        self.energy_sum / self.measured_slots() as f64
    }

    pub fn frac_energy_ge_et(&self) -> f64 {
        self.slots_energy_ge_et as f64 / self.measured_slots() as f64
    }

    pub fn frac_energy_ge_ed(&self) -> f64 {
        self.slots_energy_ge_ed as f64 / self.measured_slots() as f64
    }

    /// Empirical outage frequencies `(S-D, S-R, R-D)`.
    pub fn outage_frequencies(&self) -> [f64; 3] {
        self.outage_counts.map(|c| c as f64 / self.n_slots as f64)
    }

    pub fn signaling_overhead(&self) -> f64 {
        f64::from(self.signaling_bits)
    }
}

/// A single trajectory, advanced one slot at a time.
pub struct Simulation {
    cfg: SimConfig,
    rng: ChaCha8Rng,
    arrivals: Bernoulli,
    state: NetworkState,
    slot: u64,
    metrics: Metrics,
}

/// Everything observable about one simulated slot.
#[derive(Debug, Clone, Copy)]
pub struct SlotRecord {
    pub slot: u64,
    pub start: NetworkState,
    pub channels: SlotChannels,
    pub outcome: SlotOutcome,
    pub end: NetworkState,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let arrivals = Bernoulli::new(cfg.params.lambda_s)
            .map_err(|e| Error::param("lambda_s", e.to_string()))?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            state: NetworkState::new(cfg.initial_energy, &cfg.params)?,
            slot: 0,
            metrics: Metrics::new(&cfg),
            arrivals,
            cfg,
        })
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.slot >= self.cfg.n_slots
    }

    pub fn step(&mut self) -> Result<SlotRecord> {
        let p = &self.cfg.params;
        let ch = sample_slot(&self.cfg.stats, &mut self.rng);
        let arrival = self.arrivals.sample(&mut self.rng);
        let start = self.state;

        let caps = SlotCapacities::evaluate(&ch, p);
        let action = decide_with_capacities(self.cfg.protocol, &caps, &ch, &start, p, self.cfg.halfslot_direct_link);
        let (end, outcome) = apply_action(&start, &action, &ch, p, arrival).map_err(|e| match e {
            Error::Protocol { reason, state, .. } => Error::Protocol {
                slot: self.slot,
                reason,
                state,
            },
            other => other,
        })?;

        self.record(&caps, &start, &outcome, &end);
        self.state = end;
        let rec = SlotRecord {
            slot: self.slot,
            start,
            channels: ch,
            outcome,
            end,
        };
        self.slot += 1;
        Ok(rec)
    }

    fn record(&mut self, caps: &SlotCapacities, start: &NetworkState, out: &SlotOutcome, end: &NetworkState) {
        let p = &self.cfg.params;
        let m = &mut self.metrics;
        let measured = self.slot >= self.cfg.warmup;

        m.state_histogram[out.action.kind.index()] += 1;
        if let Some(a) = out.action.antenna {
            m.antenna_histogram[a.index()] += 1;
        }
        if out.delivered_secure_packet {
            m.delivered += 1;
            if measured {
                m.delivered_post_warmup += 1;
            }
        }
        m.drops += u64::from(out.drops);
        m.clipping_loss += out.clipped;
        if start.q_s > 0 {
            m.source_busy_slots += 1;
        }

        let (sr, rd) = if self.cfg.protocol == Protocol::Adaptive {
            (caps.source_relay[0].max(caps.source_relay[1]), caps.relay_dest[0].max(caps.relay_dest[1]))
        } else {
            (caps.source_relay[0], caps.relay_dest[0])
        };
        for (count, c) in m.outage_counts.iter_mut().zip([caps.source_dest, sr, rd]) {
            if !is_secure(c, p.rate) {
                *count += 1;
            }
        }

        if measured {
            m.qr_counts[start.q_r] += 1;
            if end.q_r > start.q_r {
                m.qr_up[start.q_r] += 1;
            } else if end.q_r < start.q_r {
                m.qr_down[start.q_r] += 1;
            }
            let level = start.energy.level();
            m.energy_sum += level;
            if level >= p.e_t() {
                m.slots_energy_ge_et += 1;
            }
            if level >= p.e_d {
                m.slots_energy_ge_ed += 1;
            }
        }
    }

    pub fn finish(self) -> Metrics {
        self.metrics
    }
}

/// Runs `cfg` to completion.
pub fn run(cfg: &SimConfig) -> Result<Metrics> {
    let mut sim = Simulation::new(cfg.clone())?;
    while !sim.is_done() {
        sim.step()?;
    }
    Ok(sim.finish())
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    Rate,
    SourcePower,
    RelayPower,
    ArrivalRate,
    BatteryCapacity,
    RelayBuffer,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        SweepAxis::Rate,
        SweepAxis::SourcePower,
        SweepAxis::RelayPower,
        SweepAxis::ArrivalRate,
        SweepAxis::BatteryCapacity,
        SweepAxis::RelayBuffer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Rate => "R",
            SweepAxis::SourcePower => "P_S",
            SweepAxis::RelayPower => "P_R",
            SweepAxis::ArrivalRate => "lambda_s",
            SweepAxis::BatteryCapacity => "E_max",
            SweepAxis::RelayBuffer => "C_R",
        }
    }

    pub fn apply(self, params: &mut SystemParams, value: f64) -> Result<()> {
        match self {
            SweepAxis::Rate => params.rate = value,
            SweepAxis::SourcePower => params.p_s = value,
            SweepAxis::RelayPower => params.p_r = value,
            SweepAxis::ArrivalRate => params.lambda_s = value,
            SweepAxis::BatteryCapacity => params.e_max = value,
            SweepAxis::RelayBuffer => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::param("C_R", format!("sweep value {value} is not a positive integer")));
                }
                params.c_r = value as usize;
            }
        }
        params.validate()
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config("axis", format!("unknown sweep axis `{s}` (expected R, P_S, P_R, lambda_s, E_max or C_R)")))
    }
}

/// Seed of replicate `replicate` at sweep point `value_index`: the first
/// eight bytes (little endian) of
/// `SHA-256(base_seed_le || axis_name || value_index_le || replicate_le)`.
/// The protocol is not part of the hash, so protocols compared at the same
/// point share channel realisations.
pub fn derive_seed(base_seed: u64, axis: SweepAxis, value_index: usize, replicate: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(base_seed.to_le_bytes());
    h.update(axis.name().as_bytes());
    h.update((value_index as u64).to_le_bytes());
    h.update(u64::from(replicate).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest is 32 bytes"))
}

/// One (protocol, axis value) point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub protocol: Protocol,
    pub axis: SweepAxis,
    pub value: f64,
    pub replicates: u32,
    pub throughput_mean: f64,
    /// Standard error of the mean across replicates; `None` for one replicate.
    pub throughput_stderr: Option<f64>,
    pub analytic_throughput: Option<f64>,
    pub analytic_mu_max: Option<f64>,
    pub analytic_outage: [f64; 3],
    pub analytic_approximate: bool,
    pub empirical_outage: [f64; 3],
    pub mean_battery: f64,
    pub frac_battery_ge_et: f64,
    pub drops_mean: f64,
    pub saturation_condition: bool,
    pub seed: u64,
    pub n_slots: u64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn stderr(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    Some((var / xs.len() as f64).sqrt())
}

/// Sweeps one protocol (taken from `base`) over `values` of `axis`.
pub fn sweep(base: &SimConfig, axis: SweepAxis, values: &[f64], replicates: u32) -> Result<Vec<SweepRecord>> {
    sweep_protocols(base, &[base.protocol], axis, values, replicates)
}

/// Sweeps several protocols; records are ordered by protocol, then value.
/// Points run in parallel and are merged by index.
pub fn sweep_protocols(
    base: &SimConfig,
    protocols: &[Protocol],
    axis: SweepAxis,
    values: &[f64],
    replicates: u32,
) -> Result<Vec<SweepRecord>> {
    if values.is_empty() {
        return Err(Error::param("values", "sweep needs at least one value"));
    }
    if replicates == 0 {
        return Err(Error::param("replicates", "must be at least 1"));
    }
    if protocols.is_empty() {
        return Err(Error::param("protocols", "sweep needs at least one protocol"));
    }

    let mut points = Vec::with_capacity(protocols.len() * values.len());
    for &protocol in protocols {
        for (i, &value) in values.iter().enumerate() {
            let mut cfg = base.clone();
            cfg.protocol = protocol;
            axis.apply(&mut cfg.params, value)?;
            cfg.validate()?;
            points.push((i, value, cfg));
        }
    }

    let jobs: Vec<(usize, u32)> = (0..points.len())
        .flat_map(|k| (0..replicates).map(move |j| (k, j)))
        .collect();
    let results: Vec<Metrics> = jobs
        .par_iter()
        .map(|&(k, j)| {
            let (i, _, cfg) = &points[k];
            let mut cfg = cfg.clone();
            cfg.seed = derive_seed(base.seed, axis, *i, j);
            run(&cfg)
        })
        .collect::<Result<_>>()?;

    let reps = replicates as usize;
    Ok(points
        .iter()
        .zip(results.chunks(reps))
        .map(|((_, value, cfg), runs)| summarize(cfg, axis, *value, replicates, base.seed, runs))
        .collect())
}

/// Folds replicate runs of one configuration into a sweep record.
pub fn summarize(cfg: &SimConfig, axis: SweepAxis, value: f64, replicates: u32, seed: u64, runs: &[Metrics]) -> SweepRecord {
    let thr: Vec<f64> = runs.iter().map(Metrics::throughput).collect();
    let avg = |f: fn(&Metrics) -> f64| mean(&runs.iter().map(f).collect::<Vec<_>>());
    let outage = outage_triple(&cfg.params, &cfg.stats, cfg.protocol);
    let analytic = analytic_companion(&cfg.params, &cfg.stats, cfg.protocol);
    let mut empirical = [0.0; 3];
    for (k, e) in empirical.iter_mut().enumerate() {
        *e = mean(&runs.iter().map(|m| m.outage_frequencies()[k]).collect::<Vec<_>>());
    }
    SweepRecord {
        protocol: cfg.protocol,
        axis,
        value,
        replicates,
        throughput_mean: mean(&thr),
        throughput_stderr: stderr(&thr),
        analytic_throughput: analytic.map(|(_, mu)| mu.throughput),
        analytic_mu_max: analytic.map(|(_, mu)| mu.mu_max),
        analytic_outage: [outage.sd, outage.sr, outage.rd],
        analytic_approximate: outage.approximate,
        empirical_outage: empirical,
        mean_battery: avg(Metrics::mean_energy),
        frac_battery_ge_et: avg(Metrics::frac_energy_ge_et),
        drops_mean: avg(|m| m.drops as f64),
        saturation_condition: energy_saturation_condition(&cfg.params, &cfg.stats, outage.rd),
        seed,
        n_slots: cfg.n_slots,
    }
}
