//! `dtea` command line: one subcommand per characterization protocol.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtea_core::control::TorqueCycle;
use dtea_core::experiments::disturbance::default_impacts;
use dtea_core::experiments::{
    run_disturbance, run_dynamic_switching, run_static_stiffness, run_switch_cycle, Channel,
    CycleConfig, DisturbanceConfig, HubLaw, StiffnessConfig, Trace, TrackingConfig,
};
use dtea_core::params::PreloadBasis;
use dtea_core::{Mode, Preset, SpringHub};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::io::{write_json, write_switches_csv, write_trace_csv};
use crate::noise::{apply_noise, NoiseModel};
use crate::plot::{emit_svg_plot, mode_bands, Panel, PlotStyle, Series};
use crate::presets::resolve_preset;

pub const TRACE_FILE: &str = "trace.csv";
pub const REPORT_FILE: &str = "report.json";
pub const PLOT_FILE: &str = "plot.svg";
pub const HUB_CURVE_FILE: &str = "hub_curve.csv";
pub const SWITCHES_FILE: &str = "switches.csv";

#[derive(Debug, Parser)]
#[command(
    name = "dtea",
    version,
    about = "Dual-topology elastic actuator simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Built-in preset name or path to a preset JSON file.
    #[arg(long, default_value = dtea_core::params::PRESET_CALIBRATED)]
    pub preset: String,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for the measurement noise generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Quantize and perturb the output angle written to trace.csv.
    #[arg(long)]
    pub noise: bool,
    /// Also write plot.svg.
    #[arg(long)]
    pub plot: bool,
    /// Decimate trace.csv to about this rate (Hz).
    #[arg(long)]
    pub log_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sea,
    Pea,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Sea => Mode::Sea,
            ModeArg::Pea => Mode::Pea,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HubLawArg {
    Configured,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Output,
    Motor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    FreeLength,
    CollinearLength,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locked-output torque cycle; fits stiffness and hysteresis.
    Stiffness {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Torque ramp rate (Nm/s).
        #[arg(long, default_value_t = 0.2)]
        ramp_rate: f64,
        /// Peak torque of the cycle (Nm).
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 3)]
        cycles: u32,
        #[arg(long, value_enum, default_value_t = HubLawArg::Configured)]
        hub_law: HubLawArg,
        #[command(flatten)]
        common: Common,
    },
    /// Sinusoidal tracking with periodic topology switches.
    Track {
        /// Run length (s).
        #[arg(long, default_value_t = 30.0)]
        duration: f64,
        /// Time between switch requests (s).
        #[arg(long, default_value_t = 5.0)]
        period: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Output torque pulses under a horizontal position hold.
    Disturb {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Number of impacts (6 in SEA, 5 in PEA by default).
        #[arg(long)]
        impacts: Option<usize>,
        /// Pulse torque (Nm).
        #[arg(long)]
        pulse: Option<f64>,
        /// Pulse length (ms).
        #[arg(long, default_value_t = 10.0)]
        pulse_ms: f64,
        /// Angle the peak and settling metrics are taken on.
        #[arg(long, value_enum, default_value_t = ChannelArg::Output)]
        channel: ChannelArg,
        #[command(flatten)]
        common: Common,
    },
    /// Repeated switching under load with invariant checks.
    Cycle {
        #[arg(long, default_value_t = 324)]
        n: usize,
        /// Hold time between switches (s).
        #[arg(long, default_value_t = 0.25)]
        dwell: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep of the geometric hub torque law.
    HubCurve {
        /// Deflection range (rad), as two values.
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-PI, PI])]
        range: Vec<f64>,
        #[arg(long, default_value_t = 201)]
        steps: usize,
        /// Length the preload extension is measured from.
        #[arg(long, value_enum)]
        basis: Option<BasisArg>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Stiffness { common, .. }
            | Command::Track { common, .. }
            | Command::Disturb { common, .. }
            | Command::Cycle { common, .. }
            | Command::HubCurve { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Stiffness { .. } => "stiffness",
            Command::Track { .. } => "track",
            Command::Disturb { .. } => "disturb",
            Command::Cycle { .. } => "cycle",
            Command::HubCurve { .. } => "hub-curve",
        }
    }
}

#[derive(Serialize)]
struct RunReport<'a, T: Serialize> {
    command: &'a str,
    preset: &'a Preset,
    seed: u64,
    noise: NoiseModel,
    result: &'a T,
}

struct Context<'a> {
    command: &'static str,
    common: &'a Common,
    preset: Preset,
    noise: NoiseModel,
}

impl Context<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.common.out.join(name)
    }

    fn report<T: Serialize>(&self, result: &T) -> Result<()> {
        let body = RunReport {
            command: self.command,
            preset: &self.preset,
            seed: self.common.seed,
            noise: self.noise,
            result,
        };
        write_json(&self.path(REPORT_FILE), "report", &body)
    }

    fn trace(&self, trace: &Trace, default_rate: Option<f64>) -> Result<usize> {
        let noisy = apply_noise(trace, &self.noise);
        write_trace_csv(
            &noisy,
            &self.path(TRACE_FILE),
            self.common.log_rate.or(default_rate),
        )
    }

    fn plot(&self, trace: &Trace, title: &str, panels: Vec<Panel>) -> Result<()> {
        if !self.common.plot {
            return Ok(());
        }
        let style = PlotStyle {
            title: title.to_string(),
            ..PlotStyle::default()
        };
        emit_svg_plot(
            &self.path(PLOT_FILE),
            &trace.column(|r| r.t),
            &panels,
            &mode_bands(trace),
            &style,
        )
    }
}

fn deg(trace: &Trace, f: impl Fn(&dtea_core::experiments::TraceRow) -> f64) -> Vec<f64> {
    trace.column(|r| f(r).to_degrees())
}

fn positive(flag: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{flag} must be positive, got {v}")))
    }
}

/// Runs a parsed invocation and returns the summary lines for stdout.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    let common = cli.command.common();
    if let Some(r) = common.log_rate {
        positive("--log-rate", r)?;
    }
    let preset = resolve_preset(&common.preset)?;
    let noise = NoiseModel {
        enabled: common.noise,
        seed: common.seed,
        ..NoiseModel::default()
    };
    fs::create_dir_all(&common.out).map_err(|e| CliError::io(&common.out, e))?;
    let ctx = Context {
        command: cli.command.name(),
        common,
        preset,
        noise,
    };
    let p = &ctx.preset;
    let mut lines = Vec::new();

    match &cli.command {
        Command::Stiffness {
            mode,
            ramp_rate,
            amplitude,
            cycles,
            hub_law,
            ..
        } => {
            positive("--ramp-rate", *ramp_rate)?;
            positive("--amplitude", *amplitude)?;
            let cfg = StiffnessConfig {
                cycle: TorqueCycle {
                    amplitude: *amplitude,
                    ramp_rate: *ramp_rate,
                    cycles: *cycles,
                },
                hub_law: match hub_law {
                    HubLawArg::Configured => HubLaw::Configured,
                    HubLawArg::Geometric => HubLaw::Geometric,
                },
                ..StiffnessConfig::default()
            };
            let mode = Mode::from(*mode);
            let (trace, report) = run_static_stiffness(mode, p, &cfg)?;
            ctx.trace(&trace, None)?;
            ctx.report(&report)?;
            ctx.plot(
                &trace,
                &format!("{mode} locked-output torque cycle"),
                vec![
                    Panel {
                        y_label: "motor angle (deg)".into(),
                        series: vec![Series::new("theta_m", deg(&trace, |r| r.theta_m))],
                    },
                    Panel {
                        y_label: "torque (Nm)".into(),
                        series: vec![Series::new("tau_m", trace.column(|r| r.tau_applied))],
                    },
                ],
            )?;
            lines.push(format!(
                "{mode} stiffness {:.3} Nm/rad (stderr {:.4}), loop area {:.4} Nm·rad",
                report.stiffness, report.stderr, report.loop_area
            ));
        }
        Command::Track {
            duration, period, ..
        } => {
            positive("--duration", *duration)?;
            positive("--period", *period)?;
            let cfg = TrackingConfig {
                duration: *duration,
                switch_period: *period,
                ..TrackingConfig::default()
            };
            let (trace, report) = run_dynamic_switching(p, &cfg)?;
            ctx.trace(&trace, Some(1000.0))?;
            write_switches_csv(&report.switches, &ctx.path(SWITCHES_FILE))?;
            ctx.report(&report)?;
            let target: Vec<f64> = trace
                .rows
                .iter()
                .map(|r| cfg.target(r.t).to_degrees())
                .collect();
            ctx.plot(
                &trace,
                "Tracking with topology switches",
                vec![
                    Panel {
                        y_label: "angle (deg)".into(),
                        series: vec![
                            Series::new("target", target),
                            Series::new("theta_m", deg(&trace, |r| r.theta_m)),
                            Series::new("theta_o", deg(&trace, |r| r.theta_o)),
                        ],
                    },
                    Panel {
                        y_label: "i_q (A)".into(),
                        series: vec![Series::new("i_q", trace.column(|r| r.i_q))],
                    },
                ],
            )?;
            for (mode, stats) in [(Mode::Sea, report.sea), (Mode::Pea, report.pea)] {
                if let Some(s) = stats {
                    lines.push(format!(
                        "{mode}: rms current {:.2} A, peak current {:.2} A, rms tracking error {:.4} rad over {:.2} s",
                        s.rms_current, s.peak_current, s.rms_error, s.time
                    ));
                }
            }
            lines.push(format!(
                "{} switches completed, {} gated retries",
                report.switches.len(),
                report.retries
            ));
        }
        Command::Disturb {
            mode,
            impacts,
            pulse,
            pulse_ms,
            channel,
            ..
        } => {
            let mode = Mode::from(*mode);
            let n = impacts.unwrap_or_else(|| default_impacts(mode));
            if n == 0 {
                return Err(CliError::Usage("--impacts must be at least 1".into()));
            }
            let mut cfg = DisturbanceConfig {
                pulse_duration: pulse_ms / 1000.0,
                channel: match channel {
                    ChannelArg::Output => Channel::Output,
                    ChannelArg::Motor => Channel::Motor,
                },
                ..DisturbanceConfig::default()
            };
            if let Some(tau) = pulse {
                cfg.pulse_torque = *tau;
            }
            let (trace, report) = run_disturbance(mode, p, n, &cfg)?;
            ctx.trace(&trace, Some(1000.0))?;
            ctx.report(&report)?;
            ctx.plot(
                &trace,
                &format!("{mode} disturbance rejection"),
                vec![
                    Panel {
                        y_label: "angle (deg)".into(),
                        series: vec![
                            Series::new("theta_m", deg(&trace, |r| r.theta_m)),
                            Series::new("theta_o", deg(&trace, |r| r.theta_o)),
                        ],
                    },
                    Panel {
                        y_label: "i_q (A)".into(),
                        series: vec![Series::new("i_q", trace.column(|r| r.i_q))],
                    },
                ],
            )?;
            let settle = report
                .mean_settling_ms
                .map_or_else(|| "not settled".to_string(), |ms| format!("{ms:.0} ms"));
            lines.push(format!(
                "{mode}: mean peak {:.2} deg, mean settling {settle} over {n} impacts",
                report.mean_peak_deg
            ));
        }
        Command::Cycle { n, dwell, .. } => {
            if *n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            let cfg = CycleConfig {
                dwell: *dwell,
                ..CycleConfig::default()
            };
            let report = run_switch_cycle(p, *n, &cfg)?;
            ctx.report(&report)?;
            write_switches_csv(&report.records, &ctx.path(SWITCHES_FILE))?;
            lines.push(format!(
                "{} completed, {} violations",
                report.completed, report.violations
            ));
            lines.push(format!(
                "{} rejected, {} gated retries, max engagement loss {:.3e} J",
                report.rejected, report.retried, report.max_energy_loss
            ));
        }
        Command::HubCurve {
            range,
            steps,
            basis,
            ..
        } => {
            let (lo, hi) = (range[0], range[1]);
            if *steps < 2 {
                return Err(CliError::Usage("--steps must be at least 2".into()));
            }
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(CliError::Usage(format!(
                    "--range needs two finite values, low first; got {lo} {hi}"
                )));
            }
            let mut geometry = p.hub;
            if let Some(b) = basis {
                geometry.preload_basis = match b {
                    BasisArg::FreeLength => PreloadBasis::FreeLength,
                    BasisArg::CollinearLength => PreloadBasis::CollinearLength,
                };
            }
            let hub = SpringHub::new(geometry);
            let curve = hub_curve(&hub, lo, hi, *steps);
            write_hub_curve(&ctx.path(HUB_CURVE_FILE), &curve)?;
            let stiffness = hub.linearized_stiffness()?;
            #[derive(Serialize)]
            struct HubSummary {
                linearized_stiffness: f64,
                preload_length: f64,
                preload_offset: f64,
                rows: usize,
            }
            ctx.report(&HubSummary {
                linearized_stiffness: stiffness,
                preload_length: geometry.preload_length(),
                preload_offset: hub.preload_offset(),
                rows: curve.len(),
            })?;
            lines.push(format!(
                "{} rows, linearized stiffness {stiffness:.3} Nm/rad, installed length {:.2} mm",
                curve.len(),
                geometry.preload_length()
            ));
        }
    }
    Ok(lines)
}

/// (β, τ, l_eff) on a uniform grid. Grid points are computed so a symmetric
/// range gives exactly mirrored β.
pub fn hub_curve(hub: &SpringHub, lo: f64, hi: f64, steps: usize) -> Vec<(f64, f64, f64)> {
    let n = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            let i = i as f64;
            let beta = ((n - i) * lo + i * hi) / n;
            (beta, hub.torque(beta), hub.effective_length(beta))
        })
        .collect()
}

fn write_hub_curve(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let wrap = |source| CliError::Csv {
        path: path.into(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(["beta", "tau_hub", "l_eff"]).map_err(wrap)?;
    for (b, t, l) in rows {
        w.write_record([b.to_string(), t.to_string(), l.to_string()])
            .map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Parses `args`, runs, prints, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
