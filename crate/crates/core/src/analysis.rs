//! Closed-form companion to the simulator: link outage probabilities, the
//! energy-saturation condition, and the relay-queue birth-death chain in
//! the regime where both the source queue and the battery are saturated.

use crate::channel::{closed_form_outage, EavesdropperModel, Link, LinkStats};
use crate::error::{Error, Result};
use crate::params::{SystemParams, SLOT_DURATION};
use crate::protocol::Protocol;

/// Secrecy-outage probabilities of the three data links, each against the
/// eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageTriple {
    pub sd: f64,
    pub sr: f64,
    pub rd: f64,
    /// Set when the eavesdropper gain is shared across source links, so
    /// the products of outage probabilities used by the queue analysis
    /// ignore a correlation.
    pub approximate: bool,
}

impl OutageTriple {
    pub fn new(sd: f64, sr: f64, rd: f64) -> Result<Self> {
        for (name, v) in [("p_sd", sd), ("p_sr", sr), ("p_rd", rd)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("probability {v} outside [0, 1]")));
            }
        }
        Ok(Self { sd, sr, rd, approximate: false })
    }
}

/// Per-link outage for `protocol`. The adaptive relay is in outage on a
/// hop only when both antennas are.
pub fn outage_triple(p: &SystemParams, stats: &LinkStats, protocol: Protocol) -> OutageTriple {
    let approximate = p.eavesdropper == EavesdropperModel::Shared;
    let out = |power, main, eave| {
        closed_form_outage(power, stats.sigma(main), stats.sigma(eave), p.rate, p.kappa_w)
    };
    let sd = out(p.p_s, Link::SourceDest, Link::SourceEave);
    let sr1 = out(p.p_s, Link::SourceRelay1, Link::SourceEave);
    let rd1 = out(p.p_r, Link::Relay1Dest, Link::Relay1Eave);
    if protocol == Protocol::Adaptive {
        let sr2 = out(p.p_s, Link::SourceRelay2, Link::SourceEave);
        let rd2 = out(p.p_r, Link::Relay2Dest, Link::Relay2Eave);
        OutageTriple { sd, sr: sr1 * sr2, rd: rd1 * rd2, approximate }
    } else {
        OutageTriple { sd, sr: sr1, rd: rd1, approximate }
    }
}

/// Source power above which the battery saturates, from the minimum
/// single-antenna harvest `eta P_S sigma_SR` exceeding the maximum average
/// relay spend `(P_R + E_p)(1 - p_rd)`. `None` when nothing is harvested.
pub fn energy_saturation_threshold(p: &SystemParams, stats: &LinkStats, p_rd: f64) -> Option<f64> {
    if p.eta <= 0.0 {
        return None;
    }
    let spend = (p.p_r * SLOT_DURATION + p.e_p) * (1.0 - p_rd);
    Some(spend / (p.eta * stats.sigma(Link::SourceRelay1) * SLOT_DURATION))
}

/// Sufficient condition for an unbounded battery to saturate. Always false
/// for `eta == 0`.
pub fn energy_saturation_condition(p: &SystemParams, stats: &LinkStats, p_rd: f64) -> bool {
    energy_saturation_threshold(p, stats, p_rd).is_some_and(|t| p.p_s > t)
}

/// Upper bound on the source service rate once the battery is saturated:
/// `(1 - p_sd) + p_sd (1 - p_sr)`.
pub fn mu_max(t: &OutageTriple) -> f64 {
    (1.0 - t.sd) + t.sd * (1.0 - t.sr)
}

/// Bernoulli arrivals at rate `lambda_s >= mu_max` keep the source backlogged.
pub fn source_saturated(lambda_s: f64, t: &OutageTriple) -> bool {
    lambda_s >= mu_max(t)
}

/// Relay data-queue chain on `{0, .., C_R}` with at most one step per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathChain {
    /// `alpha[m]`: probability of `m -> m + 1`, for `m` in `0..C_R`.
    alpha: Vec<f64>,
    /// `beta[m - 1]`: probability of `m -> m - 1`, for `m` in `1..=C_R`.
    beta: Vec<f64>,
}

impl BirthDeathChain {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::param(
                "chain",
                format!("need C_R >= 1 up and down rates, got {} and {}", alpha.len(), beta.len()),
            ));
        }
        for (m, (&a, &b)) in alpha.iter().zip(&beta).enumerate() {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Err(Error::param("chain", format!("rates at state {m} outside [0, 1]")));
            }
            // Leaving state m: up from m plus down from m.
            let down = if m == 0 { 0.0 } else { beta[m - 1] };
            if a + down > 1.0 + 1e-12 {
                return Err(Error::param("chain", format!("exit probability of state {m} exceeds 1")));
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn capacity(&self) -> usize {
        self.alpha.len()
    }

    /// Up-transition probability from state `m < C_R`.
    pub fn alpha(&self, m: usize) -> f64 {
        self.alpha[m]
    }

    /// Down-transition probability from state `1 <= m <= C_R`.
    pub fn beta(&self, m: usize) -> f64 {
        self.beta[m - 1]
    }

    /// Row-stochastic transition matrix, `(C_R + 1)^2` entries.
    pub fn transition_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.capacity() + 1;
        let mut mat = vec![vec![0.0; n]; n];
        for m in 0..n {
            let up = if m + 1 < n { self.alpha(m) } else { 0.0 };
            let down = if m > 0 { self.beta(m) } else { 0.0 };
            if m + 1 < n {
                mat[m][m + 1] = up;
            }
            if m > 0 {
                mat[m][m - 1] = down;
            }
            mat[m][m] = 1.0 - up - down;
        }
        mat
    }
}

/// Relay-queue transitions with the source backlogged and the battery
/// saturated: `alpha = p_sd (1 - p_sr)`, `beta_m = (1 - p_rd) p_sr p_sd`
/// below capacity and `beta_C = (1 - p_rd) p_sd` at capacity.
pub fn saturated_transition_probs(t: &OutageTriple, c_r: usize) -> Result<BirthDeathChain> {
    if c_r < 1 {
        return Err(Error::param("C_R", "relay buffer must hold at least one packet"));
    }
    let alpha = t.sd * (1.0 - t.sr);
    let beta = (1.0 - t.rd) * t.sr * t.sd;
    let beta_full = (1.0 - t.rd) * t.sd;
    let mut betas = vec![beta; c_r];
    betas[c_r - 1] = beta_full;
    BirthDeathChain::new(vec![alpha; c_r], betas)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    gamma: Vec<f64>,
    /// Set when a zero down-rate traps the chain above some level; the
    /// mass then sits on the recurrent states above the trap.
    pub degenerate: bool,
}

impl StationaryDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.gamma
    }

    pub fn prob(&self, m: usize) -> f64 {
        self.gamma[m]
    }

    pub fn capacity(&self) -> usize {
        self.gamma.len() - 1
    }
}

/// Product-form solution of the local balance equations
/// `gamma_m alpha_m = gamma_{m+1} beta_{m+1}` for a chain started empty.
pub fn stationary_distribution(c: &BirthDeathChain) -> StationaryDistribution {
    let n = c.capacity();
    let mut weights = vec![0.0; n + 1];
    weights[0] = 1.0;
    let mut degenerate = false;
    for m in 0..n {
        let (a, b) = (c.alpha(m), c.beta(m + 1));
        if a == 0.0 {
            // States above m are never reached from an empty queue.
            break;
        }
        if b == 0.0 {
            // No way back down: everything at or below m is transient.
            weights[..=m].iter_mut().for_each(|w| *w = 0.0);
            weights[m + 1] = 1.0;
            degenerate = true;
        } else {
            weights[m + 1] = weights[m] * a / b;
        }
    }
    let total: f64 = weights.iter().sum();
    StationaryDistribution {
        gamma: weights.into_iter().map(|w| w / total).collect(),
        degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturatedThroughput {
    /// Secure packets delivered per slot.
    pub throughput: f64,
    /// Upper bound on the source service rate.
    pub mu_max: f64,
}

/// End-to-end secure throughput with `Pr{Q_S > 0} = Pr{Q_e >= E_t} = 1`:
/// `(1 - p_sd) + (1 - p_rd) [p_sd p_sr Pr{0 < Q_R < C} + p_sd Pr{Q_R = C}]`.
pub fn analytic_throughput_saturated(t: &OutageTriple, gamma: &StationaryDistribution) -> SaturatedThroughput {
    let c = gamma.capacity();
    let interior: f64 = gamma.probabilities()[1..c].iter().sum();
    let full = gamma.prob(c);
    let relay = (1.0 - t.rd) * (t.sd * t.sr * interior + t.sd * full);
    SaturatedThroughput {
        throughput: (1.0 - t.sd) + relay,
        mu_max: mu_max(t),
    }
}

/// Analytic throughput when the double-saturation regime holds for the
/// given operating point, else `None`. Only the two proposed protocols
/// have a closed form.
pub fn analytic_companion(
    p: &SystemParams,
    stats: &LinkStats,
    protocol: Protocol,
) -> Option<(OutageTriple, SaturatedThroughput)> {
    if !matches!(protocol, Protocol::Fixed | Protocol::Adaptive) {
        return None;
    }
    let t = outage_triple(p, stats, protocol);
    if !source_saturated(p.lambda_s, &t) || !energy_saturation_condition(p, stats, t.rd) {
        return None;
    }
    let chain = saturated_transition_probs(&t, p.c_r).ok()?;
    let gamma = stationary_distribution(&chain);
    Some((t, analytic_throughput_saturated(&t, &gamma)))
}
