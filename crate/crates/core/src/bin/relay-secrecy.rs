use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relay_secrecy::analysis::{
    analytic_throughput_saturated, energy_saturation_threshold, mu_max, outage_triple, saturated_transition_probs,
    source_saturated, stationary_distribution,
};
use relay_secrecy::config::{RunConfig, KEYS};
use relay_secrecy::engine::{run, summarize, sweep_protocols, SweepAxis};
use relay_secrecy::protocol::{ActionKind, Protocol};
use relay_secrecy::report::{csv_string, write_outputs};
use relay_secrecy::{validation, Error, Result};

#[derive(Parser)]
#[command(name = "relay-secrecy", version, about = "Secure relaying with a buffer-aided energy-harvesting relay")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one configuration and print its metrics.
    Run(Common),
    /// Sweep one parameter across protocols and write a CSV plus manifest.
    Sweep(Common),
    /// Closed-form outage, threshold and stationary results only.
    Analyze(Common),
    /// Run the built-in self-checks.
    Validate {
        /// Smaller sample sizes.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// List configuration keys.
    Keys,
}

#[derive(Args)]
struct Common {
    /// key=value file applied before the overrides.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// CSV destination (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Manifest destination (default: <out>.manifest).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Overrides, e.g. `P_S=30 protocol=adaptive`.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_str(&std::fs::read_to_string(path)?)?;
        }
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config { key: o.clone(), reason: "expected KEY=VALUE".into() })?;
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn emit(&self, csv: String, cfg: &RunConfig, records: &[relay_secrecy::engine::SweepRecord]) -> Result<()> {
        match &self.out {
            Some(out) => {
                let manifest = self.manifest.clone().unwrap_or_else(|| manifest_for(out));
                write_outputs(records, cfg, out, &manifest)?;
                eprintln!("wrote {} and {}", out.display(), manifest.display());
            }
            None => {
                print!("{csv}");
                if let Some(m) = &self.manifest {
                    std::fs::write(m, cfg.to_manifest())?;
                }
            }
        }
        Ok(())
    }
}

fn manifest_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn cmd_run(c: &Common) -> Result<()> {
    let cfg = c.load()?;
    let sim = &cfg.sim;
    let m = run(sim)?;
    eprintln!("protocol            {}", m.protocol);
    eprintln!("slots               {} (warmup {})", m.n_slots, m.warmup);
    eprintln!("throughput          {:.6}", m.throughput());
    eprintln!("source busy         {:.6}", m.source_busy_fraction());
    eprintln!("mean battery        {:.4}", m.mean_energy());
    eprintln!("battery >= E_t      {:.6}", m.frac_energy_ge_et());
    eprintln!("clipping loss       {:.4}", m.clipping_loss);
    eprintln!("drops               {}", m.drops);
    let o = m.outage_frequencies();
    eprintln!("outage sd/sr/rd     {:.5} {:.5} {:.5}", o[0], o[1], o[2]);
    eprintln!("signaling bits/slot {:.3}", m.signaling_overhead());
    for k in ActionKind::ALL {
        let n = m.state_histogram[k.index()];
        if n > 0 {
            eprintln!("  {k:?}: {n}");
        }
    }
    let rec = summarize(sim, SweepAxis::Rate, sim.params.rate, 1, sim.seed, std::slice::from_ref(&m));
    let records = [rec];
    c.emit(csv_string(&records)?, &cfg, &records)
}

fn cmd_sweep(c: &Common) -> Result<()> {
    let cfg = c.load()?;
    let s = &cfg.sweep;
    let records = sweep_protocols(&cfg.sim, &s.protocols, s.axis, &s.values, s.replicates)?;
    c.emit(csv_string(&records)?, &cfg, &records)
}

fn cmd_analyze(c: &Common) -> Result<()> {
    let cfg = c.load()?;
    let (p, stats) = (&cfg.sim.params, &cfg.sim.stats);
    let protocols: Vec<Protocol> = if c.overrides.iter().any(|o| o.starts_with("protocol=")) {
        vec![cfg.sim.protocol]
    } else {
        vec![Protocol::Fixed, Protocol::Adaptive]
    };
    for proto in protocols {
        let t = outage_triple(p, stats, proto);
        println!("[{proto}]");
        println!("outage_sd={:.6}", t.sd);
        println!("outage_sr={:.6}", t.sr);
        println!("outage_rd={:.6}", t.rd);
        if t.approximate {
            println!("# shared eavesdropper draws: relay-path outages are approximate");
        }
        println!("mu_max={:.6}", mu_max(&t));
        println!("source_saturated={}", source_saturated(p.lambda_s, &t));
        match energy_saturation_threshold(p, stats, t.rd) {
            Some(th) => println!("energy_threshold_P_S={th:.6} (P_S={} {})", p.p_s, if p.p_s >= th { "holds" } else { "violated" }),
            None => println!("energy_threshold_P_S=inf"),
        }
        let g = stationary_distribution(&saturated_transition_probs(&t, p.c_r)?);
        let probs: Vec<String> = g.probabilities().iter().map(|x| format!("{x:.6}")).collect();
        println!("stationary_q_r={}", probs.join(","));
        println!("analytic_throughput={:.6}", analytic_throughput_saturated(&t, &g).throughput);
    }
    Ok(())
}

fn cmd_validate(quick: bool, seed: u64) -> Result<bool> {
    let results = validation::run_all(quick, seed)?;
    let mut ok = true;
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        ok &= r.passed;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run(c) => cmd_run(c).map(|_| true),
        Cmd::Sweep(c) => cmd_sweep(c).map(|_| true),
        Cmd::Analyze(c) => cmd_analyze(c).map(|_| true),
        Cmd::Validate { quick, seed } => cmd_validate(*quick, *seed),
        Cmd::Keys => {
            for (k, d) in KEYS {
                println!("{k:<16} {d}");
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
