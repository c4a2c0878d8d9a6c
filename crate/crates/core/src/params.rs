//! Physical and protocol constants shared by every module.

use crate::channel::EavesdropperModel;
use crate::error::{Error, Result};

/// Slot duration in seconds. Power and per-slot energy are interchangeable.
pub const SLOT_DURATION: f64 = 1.0;

/// System constants. Powers in watts, energies in joules per slot.
///
/// `Default` gives the reference operating point: `P_S = P_R = 20`,
/// `E_p = 2`, `E_d = 3`, `E_max = 40`, `C_R = 10`, `eta = 1`,
/// `kappaW = 1`, `lambda_s = 1` and a target rate of 1 bit/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Source transmit power, also used for the energy-transfer signal.
    pub p_s: f64,
    /// Relay transmit power.
    pub p_r: f64,
    /// Relay transmit-circuit energy per slot.
    pub e_p: f64,
    /// Relay decode/processing energy per received packet.
    pub e_d: f64,
    /// Battery capacity.
    pub e_max: f64,
    /// Relay data-buffer capacity in packets.
    pub c_r: usize,
    /// RF-to-DC conversion efficiency.
    pub eta: f64,
    /// Target spectral efficiency (bits/s/Hz).
    pub rate: f64,
    /// Lumped noise power at every receiver.
    pub kappa_w: f64,
    /// Bernoulli arrival probability at the source per slot.
    pub lambda_s: f64,
    pub eavesdropper: EavesdropperModel,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            p_s: 20.0,
            p_r: 20.0,
            e_p: 2.0,
            e_d: 3.0,
            e_max: 40.0,
            c_r: 10,
            eta: 1.0,
            rate: 1.0,
            kappa_w: 1.0,
            lambda_s: 1.0,
            eavesdropper: EavesdropperModel::Independent,
        }
    }
}

impl SystemParams {
    /// Energy the battery must hold for the relay to transmit one packet.
    pub fn e_t(&self) -> f64 {
        self.p_r * SLOT_DURATION + self.e_p
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("P_S", self.p_s),
            ("P_R", self.p_r),
            ("E_p", self.e_p),
            ("E_d", self.e_d),
            ("E_max", self.e_max),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::param("eta", format!("must lie in [0, 1], got {}", self.eta)));
        }
        if !(0.0..=1.0).contains(&self.lambda_s) {
            return Err(Error::param(
                "lambda_s",
                format!("must lie in [0, 1], got {}", self.lambda_s),
            ));
        }
        if self.c_r < 1 {
            return Err(Error::param("C_R", "relay buffer must hold at least one packet"));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::param("R", format!("must be finite and > 0, got {}", self.rate)));
        }
        if !(self.kappa_w.is_finite() && self.kappa_w > 0.0) {
            return Err(Error::param(
                "kappaW",
                format!("must be finite and > 0, got {}", self.kappa_w),
            ));
        }
        if self.e_max < self.e_t() {
            return Err(Error::param(
                "E_max",
                format!(
                    "battery capacity {} is below the transmit requirement E_t = P_R + E_p = {}",
                    self.e_max,
                    self.e_t()
                ),
            ));
        }
        Ok(())
    }
}
