//! Rayleigh block fading, instantaneous secrecy capacity and secrecy outage.
//!
//! Every link gain is the squared magnitude of a circularly-symmetric
//! Gaussian coefficient, i.e. exponentially distributed with mean `sigma`.
//! Phases never enter any formula, so gains are drawn directly.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// The nine directed links of the network. The loopback between the two
/// relay antennas is reciprocal and carries a single gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Link {
    SourceDest,
    SourceEave,
    SourceRelay1,
    SourceRelay2,
    Relay1Dest,
    Relay2Dest,
    Relay1Eave,
    Relay2Eave,
    Loopback,
}

impl Link {
    pub const COUNT: usize = 9;

    pub const ALL: [Link; Link::COUNT] = [
        Link::SourceDest,
        Link::SourceEave,
        Link::SourceRelay1,
        Link::SourceRelay2,
        Link::Relay1Dest,
        Link::Relay2Dest,
        Link::Relay1Eave,
        Link::Relay2Eave,
        Link::Loopback,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short name used by config keys (`sigma_<name>`).
    pub fn name(self) -> &'static str {
        match self {
            Link::SourceDest => "SD",
            Link::SourceEave => "SE",
            Link::SourceRelay1 => "SR1",
            Link::SourceRelay2 => "SR2",
            Link::Relay1Dest => "R1D",
            Link::Relay2Dest => "R2D",
            Link::Relay1Eave => "R1E",
            Link::Relay2Eave => "R2E",
            Link::Loopback => "loop",
        }
    }

    pub fn from_name(name: &str) -> Option<Link> {
        Link::ALL.into_iter().find(|l| l.name() == name)
    }
}

/// Mean power gain of every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStats {
    sigma: [f64; Link::COUNT],
}

impl LinkStats {
    pub fn new(sigma: [f64; Link::COUNT]) -> Result<Self> {
        for link in Link::ALL {
            let s = sigma[link.index()];
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::param(
                    format!("sigma_{}", link.name()),
                    format!("mean channel gain must be finite and > 0, got {s}"),
                ));
            }
        }
        Ok(Self { sigma })
    }

    /// Same mean gain on every link.
    pub fn uniform(sigma: f64) -> Result<Self> {
        Self::new([sigma; Link::COUNT])
    }

    pub fn sigma(&self, link: Link) -> f64 {
        self.sigma[link.index()]
    }

    /// Returns a copy with one link's mean gain replaced.
    pub fn with(mut self, link: Link, sigma: f64) -> Result<Self> {
        self.sigma[link.index()] = sigma;
        Self::new(self.sigma)
    }
}

impl Default for LinkStats {
    fn default() -> Self {
        Self {
            sigma: [1.0; Link::COUNT],
        }
    }
}

/// How the eavesdropper's observation of the source is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EavesdropperModel {
    /// Each source secrecy test (towards the destination and towards each
    /// relay antenna) sees its own independent source-to-eavesdropper
    /// gain. Outage events of different source links are then independent,
    /// which is what the closed-form queue analysis assumes.
    #[default]
    Independent,
    /// One source-to-eavesdropper gain per slot, shared by every source
    /// secrecy test.
    Shared,
}

impl EavesdropperModel {
    pub fn id(self) -> &'static str {
        match self {
            EavesdropperModel::Independent => "independent",
            EavesdropperModel::Shared => "shared",
        }
    }
}

impl std::str::FromStr for EavesdropperModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(EavesdropperModel::Independent),
            "shared" => Ok(EavesdropperModel::Shared),
            _ => Err(Error::config("eavesdropper", format!("expected independent or shared, got `{s}`"))),
        }
    }
}

/// Instantaneous power gains for one slot.
///
/// Besides the nine link gains, a slot carries two further draws of the
/// source-to-eavesdropper gain, used against the two relay antennas under
/// [`EavesdropperModel::Independent`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotChannels {
    gains: [f64; Link::COUNT],
    relay_side_eave: [f64; 2],
}

impl SlotChannels {
    /// Gains in [`Link::ALL`] order; the relay-side eavesdropper draws
    /// default to the `SourceEave` gain.
    pub fn from_gains(gains: [f64; Link::COUNT]) -> Result<Self> {
        if let Some(link) = Link::ALL
            .into_iter()
            .find(|l| !(gains[l.index()].is_finite() && gains[l.index()] >= 0.0))
        {
            return Err(Error::param(
                format!("g_{}", link.name()),
                "gain must be finite and >= 0",
            ));
        }
        let se = gains[Link::SourceEave.index()];
        Ok(Self {
            gains,
            relay_side_eave: [se, se],
        })
    }

    pub fn with_relay_side_eave(mut self, gains: [f64; 2]) -> Result<Self> {
        if gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::param("g_SE", "gain must be finite and >= 0"));
        }
        self.relay_side_eave = gains;
        Ok(self)
    }

    pub fn gain(&self, link: Link) -> f64 {
        self.gains[link.index()]
    }

    /// Source-to-eavesdropper gain that the source-to-relay-antenna
    /// `antenna` (0 or 1) secrecy test is judged against.
    pub fn source_eave_for_relay(&self, antenna: usize, model: EavesdropperModel) -> f64 {
        match model {
            EavesdropperModel::Independent => self.relay_side_eave[antenna],
            EavesdropperModel::Shared => self.gain(Link::SourceEave),
        }
    }
}

/// Draws one slot of independent exponential gains: the nine links in
/// `Link::ALL` order, then the two relay-side eavesdropper draws.
pub fn sample_slot<R: Rng + ?Sized>(stats: &LinkStats, rng: &mut R) -> SlotChannels {
    let mut gains = [0.0; Link::COUNT];
    for (g, s) in gains.iter_mut().zip(stats.sigma) {
        let e: f64 = Exp1.sample(rng);
        *g = s * e;
    }
    let se = stats.sigma(Link::SourceEave);
    let mut relay_side_eave = [0.0; 2];
    for g in &mut relay_side_eave {
        let e: f64 = Exp1.sample(rng);
        *g = se * e;
    }
    SlotChannels { gains, relay_side_eave }
}

/// `[log2(1 + P g_main / kW) - log2(1 + P g_eave / kW)]^+`
pub fn secrecy_capacity(power: f64, g_main: f64, g_eave: f64, kappa_w: f64) -> Result<f64> {
    if kappa_w.is_nan() || kappa_w <= 0.0 {
        return Err(Error::param("kappaW", format!("must be > 0, got {kappa_w}")));
    }
    Ok(capacity(power, g_main, g_eave, kappa_w))
}

#[inline]
pub(crate) fn capacity(power: f64, g_main: f64, g_eave: f64, kappa_w: f64) -> f64 {
    let main = (power * g_main / kappa_w).ln_1p();
    let eave = (power * g_eave / kappa_w).ln_1p();
    ((main - eave) / LN_2).max(0.0)
}

/// A link is secure when its secrecy capacity supports the rate; the
/// boundary `C == R` counts as secure.
#[inline]
pub fn is_secure(capacity: f64, rate: f64) -> bool {
    capacity >= rate
}

/// Rayleigh-fading secrecy outage probability `Pr{C < R}`:
/// `1 - sigma_main / (sigma_main + 2^R sigma_eave) * exp(-kW (2^R - 1) / (P sigma_main))`.
///
/// A silent transmitter (`power == 0`) is always in outage.
pub fn closed_form_outage(
    power: f64,
    sigma_main: f64,
    sigma_eave: f64,
    rate: f64,
    kappa_w: f64,
) -> f64 {
    if power <= 0.0 {
        return 1.0;
    }
    let two_r = rate.exp2();
    let ratio = sigma_main / (sigma_main + two_r * sigma_eave);
    let decay = (-kappa_w * (two_r - 1.0) / (power * sigma_main)).exp();
    (1.0 - ratio * decay).clamp(0.0, 1.0)
}

/// Best secrecy capacity over a set of antennas and the (zero-based)
/// antennas that individually meet the target rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaChoice {
    pub max: f64,
    pub feasible: Vec<usize>,
}

pub fn max_antenna_secrecy(caps: &[f64], target: f64) -> AntennaChoice {
    let max = caps.iter().copied().fold(0.0, f64::max);
    let feasible = caps
        .iter()
        .enumerate()
        .filter(|(_, &c)| is_secure(c, target))
        .map(|(i, _)| i)
        .collect();
    AntennaChoice { max, feasible }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eavesdropper_models() {
        let ch = SlotChannels::from_gains([1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap()
            .with_relay_side_eave([0.5, 0.25])
            .unwrap();
        assert_eq!(ch.source_eave_for_relay(0, EavesdropperModel::Shared), 2.0);
        assert_eq!(ch.source_eave_for_relay(1, EavesdropperModel::Shared), 2.0);
        assert_eq!(ch.source_eave_for_relay(0, EavesdropperModel::Independent), 0.5);
        assert_eq!(ch.source_eave_for_relay(1, EavesdropperModel::Independent), 0.25);
        assert!(ch.with_relay_side_eave([-1.0, 0.0]).is_err());
        assert_eq!("shared".parse::<EavesdropperModel>().unwrap(), EavesdropperModel::Shared);
        assert!("both".parse::<EavesdropperModel>().is_err());
    }

    #[test]
    fn relay_side_draws_follow_sigma_se() {
        let stats = LinkStats::default().with(Link::SourceEave, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200_000;
        let mean = (0..n)
            .map(|_| sample_slot(&stats, &mut rng).source_eave_for_relay(1, EavesdropperModel::Independent))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 3.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn capacity_hand_value() {
        // log2(21) - log2(11)
        let c = secrecy_capacity(20.0, 1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(c, 0.932_885_804, epsilon = 1e-8);
        assert!(is_secure(c, 0.9));
    }

    #[test]
    fn capacity_zero_cases() {
        assert_eq!(secrecy_capacity(20.0, 0.4, 0.5, 1.0).unwrap(), 0.0);
        assert_eq!(secrecy_capacity(20.0, 0.5, 0.5, 1.0).unwrap(), 0.0);
        assert_eq!(secrecy_capacity(0.0, 3.0, 0.1, 1.0).unwrap(), 0.0);
        assert!(secrecy_capacity(20.0, 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn secure_boundary() {
        assert!(is_secure(1.0, 1.0));
        assert!(!is_secure(0.0, 0.1));
    }

    #[test]
    fn outage_hand_value() {
        let p = closed_form_outage(20.0, 1.0, 1.0, 1.0, 1.0);
        assert_relative_eq!(p, 1.0 - (-0.05f64).exp() / 3.0, epsilon = 1e-15);
        assert_relative_eq!(p, 0.682_924, epsilon = 1e-6);
        assert_eq!(closed_form_outage(0.0, 1.0, 1.0, 1.0, 1.0), 1.0);
        assert!(closed_form_outage(20.0, 1.0, 0.0, 1e-9, 1.0) < 1e-9);
    }

    #[test]
    fn antenna_sets() {
        assert_eq!(
            max_antenna_secrecy(&[0.5, 1.2], 1.0),
            AntennaChoice { max: 1.2, feasible: vec![1] }
        );
        assert_eq!(
            max_antenna_secrecy(&[0.0, 0.0], 1.0),
            AntennaChoice { max: 0.0, feasible: vec![] }
        );
        assert_eq!(max_antenna_secrecy(&[1.1, 1.3], 1.0).feasible, vec![0, 1]);
    }

    #[test]
    fn rejects_zero_sigma() {
        assert!(LinkStats::uniform(0.0).is_err());
        assert!(LinkStats::default().with(Link::Loopback, -1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_unbiased() {
        let stats = LinkStats::default();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(sample_slot(&stats, &mut a), sample_slot(&stats, &mut b));
        }

        let n = 1_000_000;
        let mut sums = [0.0; Link::COUNT];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..n {
            let ch = sample_slot(&stats, &mut rng);
            for l in Link::ALL {
                sums[l.index()] += ch.gain(l);
            }
        }
        for s in sums {
            let mean = s / n as f64;
            assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        }
    }

    #[test]
    fn outage_matches_monte_carlo() {
        // Empirical frequency of C < R from sampled gains, against the closed form.
        let cases = [(20.0, 1.0, 1.0, 1.0), (5.0, 2.0, 0.5, 0.7), (50.0, 0.8, 1.5, 0.3)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        for (power, sm, se, rate) in cases {
            let stats = LinkStats::default()
                .with(Link::SourceDest, sm)
                .unwrap()
                .with(Link::SourceEave, se)
                .unwrap();
            let mut hits = 0u32;
            for _ in 0..n {
                let ch = sample_slot(&stats, &mut rng);
                let c = capacity(power, ch.gain(Link::SourceDest), ch.gain(Link::SourceEave), 1.0);
                hits += u32::from(!is_secure(c, rate));
            }
            let freq = f64::from(hits) / n as f64;
            let p = closed_form_outage(power, sm, se, rate, 1.0);
            let se_bin = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 0.002, "{freq} vs {p}");
            assert!((freq - p).abs() < 3.0 * se_bin + 1e-12, "{freq} vs {p}");
        }
    }

    proptest! {
        #[test]
        fn capacity_monotone(p in 0.0f64..100.0, a in 0.0f64..10.0, b in 0.0f64..10.0, d in 0.0f64..5.0) {
            let base = capacity(p, a, b, 1.0);
            prop_assert!(base >= 0.0);
            prop_assert!(capacity(p, a + d, b, 1.0) >= base - 1e-12);
            prop_assert!(capacity(p, a, b + d, 1.0) <= base + 1e-12);
        }

        #[test]
        fn two_antennas_dominate(c1 in 0.0f64..5.0, c2 in 0.0f64..5.0, r in 0.01f64..4.0) {
            let choice = max_antenna_secrecy(&[c1, c2], r);
            prop_assert!(choice.max >= c1 && choice.max >= c2);
            prop_assert_eq!(choice.feasible.is_empty(), choice.max < r);
        }

        #[test]
        fn outage_monotone(p in 0.1f64..100.0, sm in 0.05f64..5.0, se in 0.0f64..5.0,
                           r in 0.01f64..4.0, dr in 0.0f64..1.0, ds in 0.0f64..1.0) {
            let base = closed_form_outage(p, sm, se, r, 1.0);
            prop_assert!((0.0..=1.0).contains(&base));
            prop_assert!(closed_form_outage(p, sm, se, r + dr, 1.0) >= base - 1e-12);
            prop_assert!(closed_form_outage(p, sm, se + ds, r, 1.0) >= base - 1e-12);
        }
    }
}
