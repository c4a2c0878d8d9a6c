//! RF harvesting with self-energy recycling, and the finite battery.

use crate::error::{Error, Result};
use crate::params::{SystemParams, SLOT_DURATION};

/// Battery content in joules, always within `[0, E_max]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EnergyQueue {
    level: f64,
}

impl EnergyQueue {
    pub fn new(level: f64, e_max: f64) -> Result<Self> {
        if !(level.is_finite() && (0.0..=e_max).contains(&level)) {
            return Err(Error::param(
                "initial_energy",
                format!("battery level {level} outside [0, {e_max}]"),
            ));
        }
        Ok(Self { level })
    }

    pub fn empty() -> Self {
        Self { level: 0.0 }
    }

    pub fn level(&self) -> f64 {
        self.level
    }
}

/// What the relay spends in a slot. Consumption is all-or-nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Consumption {
    Idle,
    /// Decoding one received packet: `E_d`.
    Decode,
    /// Transmitting one packet: `E_t = P_R + E_p`.
    Transmit,
    /// Half-slot baseline, decode over half a slot: `E_d / 2`.
    HalfSlotDecode,
    /// Half-slot baseline, decode then forward: `(E_d + E_t) / 2`.
    HalfSlotRelay,
}

impl Consumption {
    pub fn amount(self, p: &SystemParams) -> f64 {
        match self {
            Consumption::Idle => 0.0,
            Consumption::Decode => p.e_d,
            Consumption::Transmit => p.e_t(),
            Consumption::HalfSlotDecode => 0.5 * p.e_d,
            Consumption::HalfSlotRelay => 0.5 * (p.e_d + p.e_t()),
        }
    }
}

/// Energy harvested and spent in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyFlow {
    e_in: f64,
    e_out: f64,
    consumption: Consumption,
}

impl EnergyFlow {
    pub fn new(e_in: f64, consumption: Consumption, p: &SystemParams) -> Self {
        debug_assert!(e_in >= 0.0);
        Self {
            e_in,
            e_out: consumption.amount(p),
            consumption,
        }
    }

    pub fn e_in(&self) -> f64 {
        self.e_in
    }

    pub fn e_out(&self) -> f64 {
        self.e_out
    }

    pub fn consumption(&self) -> Consumption {
        self.consumption
    }
}

/// Harvest through a single antenna: `eta (P_S T g_sr + delta P_R T g_loop)`,
/// where the loopback term is the relay's own recycled transmit energy.
pub fn harvest_one_antenna(
    eta: f64,
    p_s: f64,
    g_sr: f64,
    relay_transmitting: bool,
    p_r: f64,
    g_loop: f64,
) -> f64 {
    let recycled = if relay_transmitting { p_r * SLOT_DURATION * g_loop } else { 0.0 };
    eta * (p_s * SLOT_DURATION * g_sr + recycled)
}

/// Harvest through both antennas from the source signal: `eta P_S T (g_sr1 + g_sr2)`.
pub fn harvest_two_antenna(eta: f64, p_s: f64, g_sr1: f64, g_sr2: f64) -> f64 {
    eta * p_s * SLOT_DURATION * (g_sr1 + g_sr2)
}

/// Slot-boundary battery update `min(E_max, level - e_out + e_in)`.
///
/// Returns the new queue and the energy discarded by the capacity clip.
/// Spending more than the slot-start level is a decision-layer bug.
pub fn energy_step(q: EnergyQueue, flow: &EnergyFlow, e_max: f64) -> Result<(EnergyQueue, f64)> {
    if flow.e_out > q.level {
        return Err(Error::Protocol {
            slot: 0,
            reason: format!(
                "relay spends {} J ({:?}) with only {} J stored",
                flow.e_out, flow.consumption, q.level
            ),
            state: format!("{q:?}"),
        });
    }
    let raw = q.level - flow.e_out + flow.e_in;
    let clipped = (raw - e_max).max(0.0);
    Ok((EnergyQueue { level: raw.min(e_max) }, clipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flow(e_in: f64, c: Consumption) -> EnergyFlow {
        EnergyFlow::new(e_in, c, &SystemParams::default())
    }

    #[test]
    fn one_antenna_values() {
        assert_eq!(harvest_one_antenna(1.0, 20.0, 0.5, true, 20.0, 0.2), 14.0);
        assert_eq!(harvest_one_antenna(1.0, 20.0, 0.5, false, 20.0, 0.2), 10.0);
        assert_eq!(harvest_one_antenna(0.0, 20.0, 0.5, true, 20.0, 0.2), 0.0);
    }

    #[test]
    fn two_antenna_values() {
        assert_eq!(harvest_two_antenna(1.0, 20.0, 0.5, 0.3), 16.0);
        assert_eq!(harvest_two_antenna(1.0, 20.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn step_values() {
        let q = EnergyQueue::new(10.0, 40.0).unwrap();
        let (next, clip) = energy_step(q, &flow(5.0, Consumption::Decode), 40.0).unwrap();
        assert_eq!(next.level(), 12.0);
        assert_eq!(clip, 0.0);

        let q = EnergyQueue::new(38.0, 40.0).unwrap();
        let (next, clip) = energy_step(q, &flow(16.0, Consumption::Idle), 40.0).unwrap();
        assert_eq!(next.level(), 40.0);
        assert_eq!(clip, 14.0);

        let (next, _) = energy_step(EnergyQueue::empty(), &flow(0.0, Consumption::Idle), 40.0).unwrap();
        assert_eq!(next.level(), 0.0);
    }

    #[test]
    fn overspend_is_an_error() {
        let q = EnergyQueue::new(21.0, 40.0).unwrap();
        assert!(matches!(
            energy_step(q, &flow(30.0, Consumption::Transmit), 40.0),
            Err(Error::Protocol { .. })
        ));
    }

    #[test]
    fn consumption_amounts() {
        let p = SystemParams::default();
        assert_eq!(Consumption::Transmit.amount(&p), 22.0);
        assert_eq!(Consumption::Decode.amount(&p), 3.0);
        assert_eq!(Consumption::HalfSlotRelay.amount(&p), 12.5);
    }

    proptest! {
        #[test]
        fn two_antennas_harvest_at_least_one(eta in 0.0f64..=1.0, ps in 0.0f64..50.0,
                                             g1 in 0.0f64..10.0, g2 in 0.0f64..10.0) {
            let two = harvest_two_antenna(eta, ps, g1, g2);
            prop_assert!(two >= harvest_one_antenna(eta, ps, g1, false, 20.0, 1.0));
            prop_assert!(two >= harvest_one_antenna(eta, ps, g2, false, 20.0, 1.0));
        }

        #[test]
        fn step_ledger(level in 0.0f64..=40.0, e_in in 0.0f64..60.0, spend in 0usize..3) {
            let c = [Consumption::Idle, Consumption::Decode, Consumption::Transmit][spend];
            let f = flow(e_in, c);
            let q = EnergyQueue::new(level, 40.0).unwrap();
            match energy_step(q, &f, 40.0) {
                Ok((next, clip)) => {
                    prop_assert!((0.0..=40.0).contains(&next.level()));
                    prop_assert!(clip >= 0.0);
                    let delta = next.level() - level + clip;
                    prop_assert!((delta - (e_in - f.e_out())).abs() < 1e-9);
                }
                Err(_) => prop_assert!(f.e_out() > level),
            }
        }
    }
}
