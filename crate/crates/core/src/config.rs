//! Plain-text `key=value` configuration.
//!
//! One assignment per line; blank lines and lines starting with `#` are
//! ignored; later assignments win. Keys not listed in [`KEYS`] are
//! rejected. A manifest written by [`RunConfig::to_manifest`] is itself a
//! valid config that reproduces the run.

use std::path::Path;

use crate::channel::{Link, LinkStats};
use crate::engine::{SimConfig, SweepAxis, DEFAULT_REPLICATES};
use crate::error::{Error, Result};
use crate::params::SLOT_DURATION;
use crate::protocol::Protocol;

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("P_S", "source transmit power, W (default 20)"),
    ("P_R", "relay transmit power, W (default 20)"),
    ("E_p", "relay transmit-circuit energy per slot, J (default 2)"),
    ("E_d", "relay decode energy per packet, J (default 3)"),
    ("E_max", "battery capacity, J (default 40)"),
    ("C_R", "relay buffer capacity, packets (default 10)"),
    ("eta", "RF-to-DC efficiency in [0, 1] (default 1)"),
    ("R", "target spectral efficiency, bits/s/Hz (default 1)"),
    ("kappaW", "noise power, W (default 1)"),
    ("lambda_s", "Bernoulli arrival probability per slot (default 1)"),
    ("T", "slot duration, s; only 1 is supported"),
    ("eavesdropper", "independent | shared source-to-eavesdropper draws (default independent)"),
    ("sigma", "mean gain of every link (default 1)"),
    ("sigma_SD", "mean gain, source to destination"),
    ("sigma_SE", "mean gain, source to eavesdropper"),
    ("sigma_SR1", "mean gain, source to relay antenna 1"),
    ("sigma_SR2", "mean gain, source to relay antenna 2"),
    ("sigma_R1D", "mean gain, relay antenna 1 to destination"),
    ("sigma_R2D", "mean gain, relay antenna 2 to destination"),
    ("sigma_R1E", "mean gain, relay antenna 1 to eavesdropper"),
    ("sigma_R2E", "mean gain, relay antenna 2 to eavesdropper"),
    ("sigma_loop", "mean loopback gain between the relay antennas"),
    ("protocol", "fixed | adaptive | halfslot | conventional (default fixed)"),
    ("n_slots", "slots per run (default 50000)"),
    ("warmup", "slots excluded from occupancy/battery statistics (default 0)"),
    ("seed", "64-bit base seed (default 0)"),
    ("initial_energy", "battery level at slot 0, J (default 0)"),
    ("halfslot_direct", "half-slot baseline may use the direct link (default true)"),
    ("axis", "sweep axis: R | P_S | P_R | lambda_s | E_max | C_R (default R)"),
    ("values", "comma-separated sweep values (default 0.5,1,1.5,2,2.5,3)"),
    ("replicates", "runs per sweep point (default 10)"),
    ("protocols", "comma-separated protocols to sweep (default all four)"),
];

pub const DEFAULT_SWEEP_VALUES: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub replicates: u32,
    pub protocols: Vec<Protocol>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            axis: SweepAxis::Rate,
            values: DEFAULT_SWEEP_VALUES.to_vec(),
            replicates: DEFAULT_REPLICATES,
            protocols: Protocol::ALL.to_vec(),
        }
    }
}

/// A single-run configuration plus the sweep description.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub sweep: SweepSpec,
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn list<T, F: Fn(&str) -> Result<T>>(key: &str, value: &str, parse: F) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::config(key, "list is empty"));
    }
    Ok(items)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.sim.params;
        let value = value.trim();
        match key {
            "P_S" => p.p_s = number(key, value)?,
            "P_R" => p.p_r = number(key, value)?,
            "E_p" => p.e_p = number(key, value)?,
            "E_d" => p.e_d = number(key, value)?,
            "E_max" => p.e_max = number(key, value)?,
            "C_R" => p.c_r = number(key, value)?,
            "eta" => p.eta = number(key, value)?,
            "R" => p.rate = number(key, value)?,
            "kappaW" => p.kappa_w = number(key, value)?,
            "lambda_s" => p.lambda_s = number(key, value)?,
            "T" => {
                let t: f64 = number(key, value)?;
                if t != SLOT_DURATION {
                    return Err(Error::config(key, "slot duration is normalised to 1 s"));
                }
            }
            "eavesdropper" => p.eavesdropper = value.parse()?,
            "sigma" => {
                let s: f64 = number(key, value)?;
                self.sim.stats = LinkStats::uniform(s).map_err(|e| Error::config(key, e.to_string()))?;
            }
            "protocol" => self.sim.protocol = value.parse()?,
            "n_slots" => self.sim.n_slots = number(key, value)?,
            "warmup" => self.sim.warmup = number(key, value)?,
            "seed" => self.sim.seed = number(key, value)?,
            "initial_energy" => self.sim.initial_energy = number(key, value)?,
            "halfslot_direct" => self.sim.halfslot_direct_link = number(key, value)?,
            "axis" => self.sweep.axis = value.parse()?,
            "values" => self.sweep.values = list(key, value, |v| number(key, v))?,
            "replicates" => self.sweep.replicates = number(key, value)?,
            "protocols" => self.sweep.protocols = list(key, value, str::parse)?,
            _ => {
                let link = key
                    .strip_prefix("sigma_")
                    .and_then(Link::from_name)
                    .ok_or_else(|| Error::config(key, "unknown key"))?;
                let s: f64 = number(key, value)?;
                self.sim.stats = self
                    .sim
                    .stats
                    .with(link, s)
                    .map_err(|e| Error::config(key, e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Parses `key=value` text on top of the defaults and validates the result.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", n + 1), format!("expected key=value, got `{line}`")))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate().map_err(|e| match e {
            Error::Param { name, reason } => Error::Config { key: name, reason },
            other => other,
        })?;
        if self.sweep.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        Ok(())
    }

    /// Full configuration as `key=value` text, preceded by comment lines
    /// carrying the tool and CSV schema versions.
    pub fn to_manifest(&self) -> String {
        let p = &self.sim.params;
        let mut out = String::new();
        out.push_str("# relay-secrecy run manifest\n");
        out.push_str(&format!("# version={}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# schema={}\n", crate::report::SCHEMA_VERSION));
        let mut kv = |k: &str, v: String| out.push_str(&format!("{k}={v}\n"));
        kv("P_S", p.p_s.to_string());
        kv("P_R", p.p_r.to_string());
        kv("E_p", p.e_p.to_string());
        kv("E_d", p.e_d.to_string());
        kv("E_max", p.e_max.to_string());
        kv("C_R", p.c_r.to_string());
        kv("eta", p.eta.to_string());
        kv("R", p.rate.to_string());
        kv("kappaW", p.kappa_w.to_string());
        kv("lambda_s", p.lambda_s.to_string());
        kv("T", SLOT_DURATION.to_string());
        kv("eavesdropper", p.eavesdropper.id().to_string());
        for link in Link::ALL {
            kv(&format!("sigma_{}", link.name()), self.sim.stats.sigma(link).to_string());
        }
        kv("protocol", self.sim.protocol.to_string());
        kv("n_slots", self.sim.n_slots.to_string());
        kv("warmup", self.sim.warmup.to_string());
        kv("seed", self.sim.seed.to_string());
        kv("initial_energy", self.sim.initial_energy.to_string());
        kv("halfslot_direct", self.sim.halfslot_direct_link.to_string());
        kv("axis", self.sweep.axis.to_string());
        kv("values", join(&self.sweep.values));
        kv("replicates", self.sweep.replicates.to_string());
        kv("protocols", join(&self.sweep.protocols));
        out
    }
}
