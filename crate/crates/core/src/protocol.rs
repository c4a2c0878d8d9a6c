//! Per-slot joint (source, relay) decisions and their application to the
//! network state.
//!
//! The two proposed protocols share a strict priority order:
//! direct transmission, then source-to-relay, then relay-to-destination,
//! then energy transfer, then idle. They differ only in how the relay
//! antennas are assigned. Two reconstructed baselines are provided for
//! comparison: a half-slot recycling relay and a conventional buffer-less
//! relay without recycling.

use std::fmt;
use std::str::FromStr;

use crate::channel::{capacity, is_secure, Link, SlotChannels};
use crate::energy::{
    energy_step, harvest_one_antenna, harvest_two_antenna, Consumption, EnergyFlow, EnergyQueue,
};
use crate::error::{Error, Result};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    /// Antenna 1 always carries data, antenna 2 always harvests.
    Fixed,
    /// Per-slot antenna selection at the relay.
    Adaptive,
    /// Half-slot decode-and-forward with recycling and no data buffer.
    HalfSlot,
    /// Buffer-less relay, no recycling, drops on second-hop failure.
    Conventional,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [
        Protocol::Adaptive,
        Protocol::Fixed,
        Protocol::HalfSlot,
        Protocol::Conventional,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Protocol::Fixed => "fixed",
            Protocol::Adaptive => "adaptive",
            Protocol::HalfSlot => "halfslot",
            Protocol::Conventional => "conventional",
        }
    }

    /// Control bits broadcast per slot to announce the joint state.
    pub fn signaling_bits(self) -> u8 {
        match self {
            Protocol::Adaptive => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| {
                Error::config(
                    "protocol",
                    format!("unknown protocol `{s}` (expected fixed, adaptive, halfslot or conventional)"),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Antenna {
    One,
    Two,
}

impl Antenna {
    pub fn index(self) -> usize {
        match self {
            Antenna::One => 0,
            Antenna::Two => 1,
        }
    }

    pub fn other(self) -> Antenna {
        match self {
            Antenna::One => Antenna::Two,
            Antenna::Two => Antenna::One,
        }
    }

    fn source_link(self) -> Link {
        match self {
            Antenna::One => Link::SourceRelay1,
            Antenna::Two => Link::SourceRelay2,
        }
    }

    fn dest_link(self) -> Link {
        match self {
            Antenna::One => Link::Relay1Dest,
            Antenna::Two => Link::Relay2Dest,
        }
    }

    fn eave_link(self) -> Link {
        match self {
            Antenna::One => Link::Relay1Eave,
            Antenna::Two => Link::Relay2Eave,
        }
    }
}

/// Joint (source, relay) activity in a slot.
///
/// The first six variants are the states of the proposed protocols; the
/// remaining three only occur in the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    /// Source sends to the destination, relay harvests on both antennas.
    SrcToDest,
    /// Source sends to the relay, which decodes on one antenna and harvests on the other.
    SrcToRelayData,
    /// Source sends to the destination, relay idle (battery full).
    SrcInfoRelayIdle,
    /// Relay forwards a buffered packet while the source sends energy.
    RelayToDestSrcEnergy,
    /// Source sends energy, relay harvests on both antennas.
    SrcEnergyOnly,
    BothIdle,
    /// Half-slot baseline: both hops succeed within one slot.
    HalfSlotTwoHop,
    /// Half-slot baseline: relay decodes but the second hop is insecure.
    HalfSlotDrop,
    /// Conventional baseline: in-flight packet discarded.
    RelayDrop,
}

impl ActionKind {
    pub const COUNT: usize = 9;

    pub const ALL: [ActionKind; ActionKind::COUNT] = [
        ActionKind::SrcToDest,
        ActionKind::SrcToRelayData,
        ActionKind::SrcInfoRelayIdle,
        ActionKind::RelayToDestSrcEnergy,
        ActionKind::SrcEnergyOnly,
        ActionKind::BothIdle,
        ActionKind::HalfSlotTwoHop,
        ActionKind::HalfSlotDrop,
        ActionKind::RelayDrop,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// One of the six joint states of the proposed protocols.
    pub fn is_proposed_state(self) -> bool {
        self.index() < 6
    }

    pub fn delivers(self) -> bool {
        matches!(
            self,
            ActionKind::SrcToDest
                | ActionKind::SrcInfoRelayIdle
                | ActionKind::RelayToDestSrcEnergy
                | ActionKind::HalfSlotTwoHop
        )
    }

    fn consumption(self) -> Consumption {
        match self {
            ActionKind::SrcToRelayData => Consumption::Decode,
            ActionKind::RelayToDestSrcEnergy => Consumption::Transmit,
            ActionKind::HalfSlotTwoHop => Consumption::HalfSlotRelay,
            ActionKind::HalfSlotDrop => Consumption::HalfSlotDecode,
            _ => Consumption::Idle,
        }
    }
}

/// How the relay collects energy in a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Harvest {
    None,
    /// Both antennas collect the source signal.
    TwoAntenna,
    /// One antenna collects the source signal, plus the loopback if `recycle`.
    OneAntenna { antenna: Antenna, recycle: bool },
    /// Half-slot baseline: source signal on `antenna` over the whole slot,
    /// loopback recycled over the second half if the relay forwards.
    HalfSlot { antenna: Antenna, relay_forwards: bool },
}

impl Harvest {
    pub fn energy(self, ch: &SlotChannels, p: &SystemParams) -> f64 {
        let g_loop = ch.gain(Link::Loopback);
        match self {
            Harvest::None => 0.0,
            Harvest::TwoAntenna => harvest_two_antenna(
                p.eta,
                p.p_s,
                ch.gain(Link::SourceRelay1),
                ch.gain(Link::SourceRelay2),
            ),
            Harvest::OneAntenna { antenna, recycle } => {
                harvest_one_antenna(p.eta, p.p_s, ch.gain(antenna.source_link()), recycle, p.p_r, g_loop)
            }
            Harvest::HalfSlot { antenna, relay_forwards } => {
                let g = ch.gain(antenna.source_link());
                0.5 * harvest_one_antenna(p.eta, p.p_s, g, false, p.p_r, g_loop)
                    + 0.5 * harvest_one_antenna(p.eta, p.p_s, g, relay_forwards, p.p_r, g_loop)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAction {
    pub kind: ActionKind,
    /// Relay antenna used for data reception or transmission, if any.
    pub antenna: Option<Antenna>,
    pub harvest: Harvest,
    pub signaling_bits: u8,
}

/// Queue contents at a slot boundary.
///
/// In the conventional baseline `q_r` is the single in-flight packet slot
/// and never exceeds one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkState {
    pub q_s: u64,
    pub q_r: usize,
    pub energy: EnergyQueue,
}

impl NetworkState {
    pub fn new(initial_energy: f64, p: &SystemParams) -> Result<Self> {
        Ok(Self {
            q_s: 0,
            q_r: 0,
            energy: EnergyQueue::new(initial_energy, p.e_max)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotOutcome {
    pub delivered_secure_packet: bool,
    pub action: JointAction,
    pub energy_flow: EnergyFlow,
    /// Harvested energy discarded because the battery was full.
    pub clipped: f64,
    pub drops: u32,
}

/// Secrecy capacities of every data link the protocols consider in a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotCapacities {
    pub source_dest: f64,
    /// Source to relay antenna 1 and 2.
    pub source_relay: [f64; 2],
    /// Relay antenna 1 and 2 to destination.
    pub relay_dest: [f64; 2],
}

impl SlotCapacities {
    pub fn evaluate(ch: &SlotChannels, p: &SystemParams) -> Self {
        let g_se = ch.gain(Link::SourceEave);
        let sr = |a: Antenna| {
            let eave = ch.source_eave_for_relay(a.index(), p.eavesdropper);
            capacity(p.p_s, ch.gain(a.source_link()), eave, p.kappa_w)
        };
        let rd = |a: Antenna| capacity(p.p_r, ch.gain(a.dest_link()), ch.gain(a.eave_link()), p.kappa_w);
        Self {
            source_dest: capacity(p.p_s, ch.gain(Link::SourceDest), g_se, p.kappa_w),
            source_relay: [sr(Antenna::One), sr(Antenna::Two)],
            relay_dest: [rd(Antenna::One), rd(Antenna::Two)],
        }
    }
}

fn action(kind: ActionKind, antenna: Option<Antenna>, harvest: Harvest, bits: u8) -> JointAction {
    JointAction {
        kind,
        antenna,
        harvest,
        signaling_bits: bits,
    }
}

/// Direct source-to-destination slot; the relay harvests unless its battery is full.
fn direct(st: &NetworkState, p: &SystemParams, bits: u8) -> JointAction {
    if st.energy.level() < p.e_max {
        action(ActionKind::SrcToDest, None, Harvest::TwoAntenna, bits)
    } else {
        action(ActionKind::SrcInfoRelayIdle, None, Harvest::None, bits)
    }
}

fn energy_transfer(st: &NetworkState, p: &SystemParams, bits: u8) -> JointAction {
    if st.energy.level() < p.e_max {
        action(ActionKind::SrcEnergyOnly, None, Harvest::TwoAntenna, bits)
    } else {
        action(ActionKind::BothIdle, None, Harvest::None, bits)
    }
}

/// Fixed-antenna protocol: antenna 1 for data, antenna 2 for harvesting.
pub fn decide_fixed(ch: &SlotChannels, st: &NetworkState, p: &SystemParams) -> JointAction {
    fixed_rule(&SlotCapacities::evaluate(ch, p), st, p)
}

fn fixed_rule(caps: &SlotCapacities, st: &NetworkState, p: &SystemParams) -> JointAction {
    let bits = Protocol::Fixed.signaling_bits();
    let level = st.energy.level();
    let secure = |c| is_secure(c, p.rate);

    if st.q_s > 0 && secure(caps.source_dest) {
        direct(st, p, bits)
    } else if st.q_s > 0 && secure(caps.source_relay[0]) && st.q_r < p.c_r && level >= p.e_d {
        let harvest = Harvest::OneAntenna { antenna: Antenna::Two, recycle: false };
        action(ActionKind::SrcToRelayData, Some(Antenna::One), harvest, bits)
    } else if st.q_r > 0 && level >= p.e_t() && secure(caps.relay_dest[0]) {
        let harvest = Harvest::OneAntenna { antenna: Antenna::Two, recycle: true };
        action(ActionKind::RelayToDestSrcEnergy, Some(Antenna::One), harvest, bits)
    } else {
        energy_transfer(st, p, bits)
    }
}

/// Among the antennas that meet the rate, the one with the weaker source
/// link carries data so the stronger one harvests. Ties go to antenna 1.
fn select_antenna(caps: [f64; 2], ch: &SlotChannels, rate: f64) -> Option<Antenna> {
    match (is_secure(caps[0], rate), is_secure(caps[1], rate)) {
        (true, true) => {
            if ch.gain(Link::SourceRelay2) < ch.gain(Link::SourceRelay1) {
                Some(Antenna::Two)
            } else {
                Some(Antenna::One)
            }
        }
        (true, false) => Some(Antenna::One),
        (false, true) => Some(Antenna::Two),
        (false, false) => None,
    }
}

/// Adaptive-antenna protocol: the same priority order as [`decide_fixed`],
/// with each relay link taken as the best over the two antennas.
pub fn decide_adaptive(ch: &SlotChannels, st: &NetworkState, p: &SystemParams) -> JointAction {
    adaptive_rule(&SlotCapacities::evaluate(ch, p), ch, st, p)
}

fn adaptive_rule(caps: &SlotCapacities, ch: &SlotChannels, st: &NetworkState, p: &SystemParams) -> JointAction {
    let bits = Protocol::Adaptive.signaling_bits();
    let level = st.energy.level();

    if st.q_s > 0 && is_secure(caps.source_dest, p.rate) {
        return direct(st, p, bits);
    }
    if st.q_s > 0 && st.q_r < p.c_r && level >= p.e_d {
        if let Some(rx) = select_antenna(caps.source_relay, ch, p.rate) {
            let harvest = Harvest::OneAntenna { antenna: rx.other(), recycle: false };
            return action(ActionKind::SrcToRelayData, Some(rx), harvest, bits);
        }
    }
    if st.q_r > 0 && level >= p.e_t() {
        if let Some(tx) = select_antenna(caps.relay_dest, ch, p.rate) {
            let harvest = Harvest::OneAntenna { antenna: tx.other(), recycle: true };
            return action(ActionKind::RelayToDestSrcEnergy, Some(tx), harvest, bits);
        }
    }
    energy_transfer(st, p, bits)
}

/// Half-slot recycling baseline.
///
/// One packet crosses both hops inside a slot, each hop in half the slot and
/// therefore at twice the target rate. Antenna 1 carries data, antenna 2
/// harvests. With `direct_link` the source first uses a secure direct link
/// like the proposed protocols.
pub fn decide_baseline_halfslot(
    ch: &SlotChannels,
    st: &NetworkState,
    p: &SystemParams,
    direct_link: bool,
) -> JointAction {
    halfslot_rule(&SlotCapacities::evaluate(ch, p), st, p, direct_link)
}

fn halfslot_rule(caps: &SlotCapacities, st: &NetworkState, p: &SystemParams, direct_link: bool) -> JointAction {
    let bits = Protocol::HalfSlot.signaling_bits();
    let hop_rate = 2.0 * p.rate;

    if direct_link && st.q_s > 0 && is_secure(caps.source_dest, p.rate) {
        return direct(st, p, bits);
    }
    let budget = Consumption::HalfSlotRelay.amount(p);
    if st.q_s > 0 && is_secure(caps.source_relay[0], hop_rate) && st.energy.level() >= budget {
        let forwards = is_secure(caps.relay_dest[0], hop_rate);
        let kind = if forwards { ActionKind::HalfSlotTwoHop } else { ActionKind::HalfSlotDrop };
        let harvest = Harvest::HalfSlot { antenna: Antenna::Two, relay_forwards: forwards };
        return action(kind, Some(Antenna::One), harvest, bits);
    }
    energy_transfer(st, p, bits)
}

/// Conventional baseline: the relay holds at most one packet, must forward
/// it in the very next slot or discard it, and never recycles.
pub fn decide_baseline_conventional(
    ch: &SlotChannels,
    st: &NetworkState,
    p: &SystemParams,
) -> JointAction {
    conventional_rule(&SlotCapacities::evaluate(ch, p), st, p)
}

fn conventional_rule(caps: &SlotCapacities, st: &NetworkState, p: &SystemParams) -> JointAction {
    let bits = Protocol::Conventional.signaling_bits();
    let level = st.energy.level();
    let secure = |c| is_secure(c, p.rate);

    if st.q_r == 0 {
        if st.q_s > 0 && secure(caps.source_dest) {
            direct(st, p, bits)
        } else if st.q_s > 0 && secure(caps.source_relay[0]) && level >= p.e_d {
            let harvest = Harvest::OneAntenna { antenna: Antenna::Two, recycle: false };
            action(ActionKind::SrcToRelayData, Some(Antenna::One), harvest, bits)
        } else {
            energy_transfer(st, p, bits)
        }
    } else if secure(caps.relay_dest[0]) && level >= p.e_t() {
        let harvest = Harvest::OneAntenna { antenna: Antenna::Two, recycle: false };
        action(ActionKind::RelayToDestSrcEnergy, Some(Antenna::One), harvest, bits)
    } else {
        action(ActionKind::RelayDrop, None, Harvest::TwoAntenna, bits)
    }
}

/// Dispatches to the decision rule of `protocol`.
pub fn decide(
    protocol: Protocol,
    ch: &SlotChannels,
    st: &NetworkState,
    p: &SystemParams,
    halfslot_direct_link: bool,
) -> JointAction {
    let caps = SlotCapacities::evaluate(ch, p);
    decide_with_capacities(protocol, &caps, ch, st, p, halfslot_direct_link)
}

/// [`decide`] with the slot's capacities already evaluated.
pub fn decide_with_capacities(
    protocol: Protocol,
    caps: &SlotCapacities,
    ch: &SlotChannels,
    st: &NetworkState,
    p: &SystemParams,
    halfslot_direct_link: bool,
) -> JointAction {
    match protocol {
        Protocol::Fixed => fixed_rule(caps, st, p),
        Protocol::Adaptive => adaptive_rule(caps, ch, st, p),
        Protocol::HalfSlot => halfslot_rule(caps, st, p, halfslot_direct_link),
        Protocol::Conventional => conventional_rule(caps, st, p),
    }
}

fn check_feasible(st: &NetworkState, a: &JointAction, p: &SystemParams) -> std::result::Result<(), String> {
    let level = st.energy.level();
    let need_source = |ok: bool| if ok { Ok(()) } else { Err("source queue is empty".to_string()) };
    match a.kind {
        ActionKind::SrcToDest | ActionKind::SrcInfoRelayIdle => need_source(st.q_s > 0),
        ActionKind::SrcToRelayData => {
            need_source(st.q_s > 0)?;
            if st.q_r >= p.c_r {
                return Err("relay buffer is full".into());
            }
            if level < p.e_d {
                return Err(format!("decode needs {} J, battery holds {level}", p.e_d));
            }
            Ok(())
        }
        ActionKind::RelayToDestSrcEnergy => {
            if st.q_r == 0 {
                return Err("relay buffer is empty".into());
            }
            if level < p.e_t() {
                return Err(format!("transmit needs {} J, battery holds {level}", p.e_t()));
            }
            Ok(())
        }
        ActionKind::HalfSlotTwoHop | ActionKind::HalfSlotDrop => {
            need_source(st.q_s > 0)?;
            let budget = Consumption::HalfSlotRelay.amount(p);
            if level < budget {
                return Err(format!("half-slot relaying needs {budget} J, battery holds {level}"));
            }
            Ok(())
        }
        ActionKind::RelayDrop => {
            if st.q_r == 0 {
                Err("no in-flight packet to drop".into())
            } else {
                Ok(())
            }
        }
        ActionKind::SrcEnergyOnly | ActionKind::BothIdle => Ok(()),
    }
}

/// Applies `a` to the slot-start state, then appends the slot's arrival.
///
/// Energy feasibility is judged against the slot-start battery; the
/// slot's harvest is only usable from the next slot on.
pub fn apply_action(
    st: &NetworkState,
    a: &JointAction,
    ch: &SlotChannels,
    p: &SystemParams,
    arrival: bool,
) -> Result<(NetworkState, SlotOutcome)> {
    check_feasible(st, a, p).map_err(|reason| Error::Protocol {
        slot: 0,
        reason: format!("{:?}: {reason}", a.kind),
        state: format!("{st:?}"),
    })?;

    let mut next = *st;
    let mut drops = 0;
    match a.kind {
        ActionKind::SrcToDest | ActionKind::SrcInfoRelayIdle | ActionKind::HalfSlotTwoHop => {
            next.q_s -= 1;
        }
        ActionKind::HalfSlotDrop => {
            next.q_s -= 1;
            drops = 1;
        }
        ActionKind::SrcToRelayData => {
            next.q_s -= 1;
            next.q_r += 1;
        }
        ActionKind::RelayToDestSrcEnergy => next.q_r -= 1,
        ActionKind::RelayDrop => {
            next.q_r -= 1;
            drops = 1;
        }
        ActionKind::SrcEnergyOnly | ActionKind::BothIdle => {}
    }
    if arrival {
        next.q_s += 1;
    }

    let flow = EnergyFlow::new(a.harvest.energy(ch, p), a.kind.consumption(), p);
    let (energy, clipped) = energy_step(st.energy, &flow, p.e_max)?;
    next.energy = energy;

    Ok((
        next,
        SlotOutcome {
            delivered_secure_packet: a.kind.delivers(),
            action: *a,
            energy_flow: flow,
            clipped,
            drops,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gains in `Link::ALL` order: SD, SE, SR1, SR2, R1D, R2D, R1E, R2E, loop.
    fn channels(g: [f64; 9]) -> SlotChannels {
        SlotChannels::from_gains(g).unwrap()
    }

    fn state(q_s: u64, q_r: usize, level: f64) -> NetworkState {
        NetworkState {
            q_s,
            q_r,
            energy: EnergyQueue::new(level, 40.0).unwrap(),
        }
    }

    // With P = 20, kW = 1, R = 1: a link with main gain 1 against eave gain 0
    // has capacity log2(21) >= 1; main 0.01 against eave 1 is in outage.
    const GOOD: f64 = 1.0;
    const BAD: f64 = 0.01;

    fn all_bad() -> [f64; 9] {
        [BAD, 1.0, BAD, BAD, BAD, BAD, 1.0, 1.0, 0.5]
    }

    #[test]
    fn fixed_direct_when_secure() {
        let p = SystemParams::default();
        let mut g = all_bad();
        g[0] = 100.0; // S-D well above S-E
        let a = decide_fixed(&channels(g), &state(3, 0, 10.0), &p);
        assert_eq!(a.kind, ActionKind::SrcToDest);
        assert_eq!(a.harvest, Harvest::TwoAntenna);
        assert_eq!(a.signaling_bits, 3);
    }

    #[test]
    fn fixed_idle_when_everything_fails_and_battery_full() {
        let p = SystemParams::default();
        let a = decide_fixed(&channels(all_bad()), &state(3, 2, 40.0), &p);
        assert_eq!(a.kind, ActionKind::BothIdle);
        let a = decide_fixed(&channels(all_bad()), &state(3, 2, 39.0), &p);
        assert_eq!(a.kind, ActionKind::SrcEnergyOnly);
    }

    #[test]
    fn fixed_relay_serves_when_source_empty() {
        let p = SystemParams::default();
        let mut g = all_bad();
        g[4] = GOOD;
        g[6] = 0.0;
        let a = decide_fixed(&channels(g), &state(0, 2, 30.0), &p);
        assert_eq!(a.kind, ActionKind::RelayToDestSrcEnergy);
        assert_eq!(a.antenna, Some(Antenna::One));
        assert_eq!(a.harvest, Harvest::OneAntenna { antenna: Antenna::Two, recycle: true });
    }

    #[test]
    fn fixed_never_fills_a_full_relay() {
        let p = SystemParams::default();
        let mut g = all_bad();
        g[1] = 0.0;
        g[0] = 0.0; // S-D insecure
        g[2] = GOOD; // S-R secure
        g[4] = GOOD;
        g[6] = 0.0;
        let full = state(5, p.c_r, 30.0);
        let a = decide_fixed(&channels(g), &full, &p);
        assert_eq!(a.kind, ActionKind::RelayToDestSrcEnergy);
        let not_full = state(5, p.c_r - 1, 30.0);
        assert_eq!(decide_fixed(&channels(g), &not_full, &p).kind, ActionKind::SrcToRelayData);
        // Transmission requires E_t even when the buffer is full.
        assert_eq!(
            decide_fixed(&channels(g), &state(5, p.c_r, 21.0), &p).kind,
            ActionKind::SrcEnergyOnly
        );
    }

    #[test]
    fn fixed_reception_needs_decode_energy() {
        let p = SystemParams::default();
        let mut g = all_bad();
        g[0] = 0.0;
        g[1] = 0.0;
        g[2] = GOOD;
        assert_eq!(decide_fixed(&channels(g), &state(1, 0, 2.9), &p).kind, ActionKind::SrcEnergyOnly);
        assert_eq!(decide_fixed(&channels(g), &state(1, 0, 3.0), &p).kind, ActionKind::SrcToRelayData);
    }

    #[test]
    fn adaptive_picks_weaker_source_antenna_for_transmission() {
        let p = SystemParams::default();
        let mut g = all_bad();
        g[2] = 0.2;
        g[3] = 0.9;
        g[4] = GOOD;
        g[5] = GOOD;
        g[6] = 0.0;
        g[7] = 0.0;
        let a = decide_adaptive(&channels(g), &state(0, 1, 30.0), &p);
        assert_eq!(a.kind, ActionKind::RelayToDestSrcEnergy);
        assert_eq!(a.antenna, Some(Antenna::One));
        assert_eq!(a.harvest, Harvest::OneAntenna { antenna: Antenna::Two, recycle: true });
        assert_eq!(a.signaling_bits, 4);

        g[2] = 0.9;
        g[3] = 0.2;
        let a = decide_adaptive(&channels(g), &state(0, 1, 30.0), &p);
        assert_eq!(a.antenna, Some(Antenna::Two));
    }

    #[test]
    fn adaptive_single_feasible_rx_antenna() {
        let p = SystemParams::default();
        let mut g = all_bad();
        g[0] = 0.0;
        g[1] = 0.05;
        g[2] = 0.01; // antenna 1 below the eavesdropper
        g[3] = 0.5; // antenna 2 secure, even though its gain is larger
        let a = decide_adaptive(&channels(g), &state(2, 0, 10.0), &p);
        assert_eq!(a.kind, ActionKind::SrcToRelayData);
        assert_eq!(a.antenna, Some(Antenna::Two));
        assert_eq!(a.harvest, Harvest::OneAntenna { antenna: Antenna::One, recycle: false });
    }

    #[test]
    fn adaptive_falls_through_to_energy() {
        let p = SystemParams::default();
        let a = decide_adaptive(&channels(all_bad()), &state(2, 3, 30.0), &p);
        assert_eq!(a.kind, ActionKind::SrcEnergyOnly);
        assert_eq!(a.antenna, None);
    }

    #[test]
    fn halfslot_rules() {
        let p = SystemParams::default();
        // Capacities log2(1 + 20 g) with no eavesdropper signal: g = 1 gives 4.39 >= 2R.
        let mut g = all_bad();
        g[1] = 0.0;
        g[0] = 0.0;
        g[2] = GOOD;
        g[4] = GOOD;
        g[6] = 0.0;
        let st = state(1, 0, 20.0);
        let a = decide_baseline_halfslot(&channels(g), &st, &p, true);
        assert_eq!(a.kind, ActionKind::HalfSlotTwoHop);
        let (next, out) = apply_action(&st, &a, &channels(g), &p, false).unwrap();
        assert!(out.delivered_secure_packet);
        assert_eq!(next.q_s, 0);
        assert_eq!(out.energy_flow.e_out(), 12.5);
        // Half slot of source energy on antenna 2 (0.01) plus half slot of loopback (0.5).
        assert!((out.energy_flow.e_in() - (20.0 * 0.01 + 0.5 * 20.0 * 0.5)).abs() < 1e-12);

        g[6] = 1.0; // R-D now insecure
        let a = decide_baseline_halfslot(&channels(g), &st, &p, true);
        assert_eq!(a.kind, ActionKind::HalfSlotDrop);
        let (_, out) = apply_action(&st, &a, &channels(g), &p, false).unwrap();
        assert!(!out.delivered_secure_packet);
        assert_eq!(out.drops, 1);
        assert_eq!(out.energy_flow.e_out(), 1.5);

        let a = decide_baseline_halfslot(&channels(g), &state(0, 0, 20.0), &p, true);
        assert_eq!(a.kind, ActionKind::SrcEnergyOnly);
        assert_eq!(a.harvest, Harvest::TwoAntenna);
    }

    #[test]
    fn conventional_rules() {
        let p = SystemParams::default();
        let mut g = all_bad();
        g[0] = 100.0;
        assert_eq!(
            decide_baseline_conventional(&channels(g), &state(1, 0, 0.0), &p).kind,
            ActionKind::SrcToDest
        );
        // Holding a packet blocks the direct link; R-D in outage drops it.
        let held = state(1, 1, 30.0);
        let a = decide_baseline_conventional(&channels(g), &held, &p);
        assert_eq!(a.kind, ActionKind::RelayDrop);
        let (next, out) = apply_action(&held, &a, &channels(g), &p, false).unwrap();
        assert_eq!((next.q_r, out.drops), (0, 1));

        g[4] = GOOD;
        g[6] = 0.0;
        let a = decide_baseline_conventional(&channels(g), &state(1, 1, 21.0), &p);
        assert_eq!(a.kind, ActionKind::RelayDrop);
        let a = decide_baseline_conventional(&channels(g), &held, &p);
        assert_eq!(a.kind, ActionKind::RelayToDestSrcEnergy);
        assert_eq!(a.harvest, Harvest::OneAntenna { antenna: Antenna::Two, recycle: false });
    }

    #[test]
    fn apply_bookkeeping() {
        let p = SystemParams::default();
        let g = channels([0.0, 0.0, 1.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.2]);

        let st = state(2, 0, 10.0);
        let a = decide_fixed(&g, &st, &p);
        assert_eq!(a.kind, ActionKind::SrcToRelayData);
        let (next, out) = apply_action(&st, &a, &g, &p, true).unwrap();
        assert_eq!((next.q_s, next.q_r), (2, 1));
        assert_eq!(out.energy_flow.e_out(), 3.0);
        assert_eq!(out.energy_flow.e_in(), 10.0); // antenna 2 only, no recycling
        assert_eq!(next.energy.level(), 17.0);

        let st = state(0, 1, 30.0);
        let a = decide_fixed(&g, &st, &p);
        assert_eq!(a.kind, ActionKind::RelayToDestSrcEnergy);
        let (next, out) = apply_action(&st, &a, &g, &p, false).unwrap();
        assert_eq!(next.q_r, 0);
        assert!(out.delivered_secure_packet);
        assert_eq!(out.energy_flow.e_out(), 22.0);
        assert!((out.energy_flow.e_in() - (10.0 + 4.0)).abs() < 1e-12);

        let st = state(4, 2, 40.0);
        let idle = action(ActionKind::BothIdle, None, Harvest::None, 3);
        let (next, out) = apply_action(&st, &idle, &g, &p, true).unwrap();
        assert_eq!((next.q_s, next.q_r, next.energy.level()), (5, 2, 40.0));
        assert_eq!((out.energy_flow.e_in(), out.energy_flow.e_out()), (0.0, 0.0));
    }

    #[test]
    fn apply_rejects_infeasible() {
        let p = SystemParams::default();
        let g = channels(all_bad());
        let tx = action(
            ActionKind::RelayToDestSrcEnergy,
            Some(Antenna::One),
            Harvest::OneAntenna { antenna: Antenna::Two, recycle: true },
            3,
        );
        assert!(apply_action(&state(0, 1, 10.0), &tx, &g, &p, false).is_err());
        assert!(apply_action(&state(0, 0, 30.0), &tx, &g, &p, false).is_err());
        let direct = action(ActionKind::SrcToDest, None, Harvest::TwoAntenna, 3);
        assert!(apply_action(&state(0, 0, 30.0), &direct, &g, &p, false).is_err());
    }

    #[test]
    fn protocol_ids_round_trip() {
        for proto in Protocol::ALL {
            assert_eq!(proto.id().parse::<Protocol>().unwrap(), proto);
        }
        assert!("tsr".parse::<Protocol>().is_err());
    }
}
