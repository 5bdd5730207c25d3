//! `stark-toric`: periods, moment-map profiles, convexity certificates,
//! regularized trajectories and Hill's-region rasters for the planar Stark
//! problem.
//!
//! Exit codes: 0 success, 1 a certificate failed, 2 usage, domain or regime
//! error, 3 numerical failure at run time.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stark_toric::dynamics::{flow_equivalence, integrate_regularized, IntegratorSpec, Scheme};
use stark_toric::levi_civita::RegularizedState;
use stark_toric::periods::{period, period_oracle, OscillatorSelector, SliceEnergy};
use stark_toric::quadrature::QuadratureSpec;
use stark_toric::stark_model::{FieldStrength, HillMap};
use stark_toric::toric_profile::{action_spec, profile_sample, verify_convexity};
use stark_toric::Error;

#[derive(Parser)]
#[command(name = "stark-toric", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Period of one or both separated oscillators, with the quadrature oracle.
    Periods {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, value_enum)]
        which: Option<Which>,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Samples of the moment-map image as CSV.
    Profile {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Convexity certificates as a JSON array, one per field strength.
    Verify {
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Regularized trajectory with accumulated physical time.
    Flow {
        #[arg(long)]
        eps: f64,
        /// Initial state as z1,w1,z2,w2.
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        init: [f64; 4],
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Yoshida4)]
        scheme: SchemeArg,
        /// Also compare against the unregularized flow through the lift.
        #[arg(long)]
        check_lc: bool,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Hill's-region classification raster as CSV.
    Hill {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Plus,
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Leapfrog2,
    Yoshida4,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Leapfrog2 => Scheme::Leapfrog2,
            SchemeArg::Yoshida4 => Scheme::Yoshida4,
        }
    }
}

enum Failure {
    Lib(Error),
    Io(io::Error),
    Verdict,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

fn parse_state(s: &str) -> Result<[f64; 4], String> {
    let parts = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 4 comma-separated values, got {}", v.len()))
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::Regime { .. } | Error::LevelSet { .. } => 2,
        Error::ToleranceNotMet { .. }
        | Error::CollisionApproach { .. }
        | Error::Escape { .. }
        | Error::NoReturn { .. }
        | Error::InvariantViolation(_) => 3,
    }
}

fn open_out(path: &PathBuf) -> io::Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

/// Full precision: 17 significant digits round-trip every `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_periods(eps: f64, c: f64, which: Option<Which>, out: &PathBuf) -> Result<(), Failure> {
    let eps = FieldStrength::new(eps)?;
    let c = SliceEnergy::new(c)?;
    let selectors: &[OscillatorSelector] = match which {
        Some(Which::Plus) => &[OscillatorSelector::Plus],
        Some(Which::Minus) => &[OscillatorSelector::Minus],
        None => &[OscillatorSelector::Plus, OscillatorSelector::Minus],
    };
    let spec = QuadratureSpec::new(1e-13, 1e-13, 40)?;
    let mut rows = Vec::new();
    for &sel in selectors {
        let tau = period(eps, c, sel)?;
        let oracle = period_oracle(eps, c, sel, &spec)?;
        let name = match sel {
            OscillatorSelector::Plus => "plus",
            OscillatorSelector::Minus => "minus",
        };
        rows.push(format!(
            "{name},{},{},{},{}",
            num(c.value()),
            num(tau),
            num(oracle),
            num(((tau - oracle) / tau).abs())
        ));
    }
    let mut w = open_out(out)?;
    writeln!(w, "which,c,tau,oracle,rel_residual")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_profile(eps: f64, samples: usize, out: &PathBuf) -> Result<(), Failure> {
    let eps = FieldStrength::new(eps)?;
    let prof = profile_sample(eps, samples, &action_spec())?;
    let mut w = open_out(out)?;
    writeln!(w, "c,x,y,slope,f_second")?;
    for ((p, s), d) in prof
        .samples
        .iter()
        .zip(&prof.slopes)
        .zip(&prof.second_derivs)
    {
        writeln!(
            w,
            "{},{},{},{},{}",
            num(p.c),
            num(p.x),
            num(p.y),
            num(*s),
            num(*d)
        )?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify(eps_list: &[f64], samples: usize, tol: f64, out: &PathBuf) -> Result<(), Failure> {
    let fields = eps_list
        .iter()
        .map(|&e| FieldStrength::new(e).and_then(FieldStrength::require_toric))
        .collect::<Result<Vec<_>, _>>()?;
    let mut certs = Vec::with_capacity(fields.len());
    for eps in fields {
        let cert = verify_convexity(eps, samples, tol)?;
        eprintln!(
            "eps {}: min f'' {:.3e}, max residual {:.3e}, {}",
            eps.value(),
            cert.min_f_second,
            cert.max_fd_residual,
            if cert.passed() { "pass" } else { "fail" }
        );
        certs.push(cert);
    }
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, &certs)?;
    writeln!(w)?;
    w.flush()?;
    if certs.iter().all(|c| c.passed()) {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_flow(
    eps: f64,
    init: [f64; 4],
    duration: f64,
    step: f64,
    scheme: SchemeArg,
    check_lc: bool,
    out: &PathBuf,
) -> Result<(), Failure> {
    let eps = FieldStrength::new(eps)?;
    let s0 = RegularizedState::from_array(init);
    let spec = IntegratorSpec::new(step, scheme.into(), usize::MAX)?;
    let deviation = if check_lc {
        Some(flow_equivalence(&s0, eps, &spec, duration)?)
    } else {
        None
    };
    let traj = integrate_regularized(&s0, eps, &spec, duration)?;

    let mut w = open_out(out)?;
    writeln!(w, "s,t,z1,w1,z2,w2,E")?;
    for k in 0..traj.states.len() {
        let [z1, w1, z2, w2] = traj.states[k].to_array();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            num(traj.s[k]),
            num(traj.t[k]),
            num(z1),
            num(w1),
            num(z2),
            num(w2),
            num(traj.energy[k])
        )?;
    }
    writeln!(w, "# energy_drift={}", num(traj.energy_drift))?;
    if let Some(d) = deviation {
        writeln!(w, "# lc_max_deviation={}", num(d))?;
        eprintln!("max deviation from the unregularized flow: {d:.3e}");
    }
    w.flush()?;
    eprintln!("energy drift: {:.3e}", traj.energy_drift);
    Ok(())
}

fn cmd_hill(eps: f64, resolution: usize, out: &PathBuf) -> Result<(), Failure> {
    let eps = FieldStrength::new(eps)?;
    let map = HillMap::compute(eps, resolution)?;
    let mut w = open_out(out)?;
    writeln!(w, "q1,q2,class")?;
    for j in 0..map.cells() {
        for i in 0..map.cells() {
            let [q1, q2] = map.cell_center(i, j);
            writeln!(w, "{},{},{}", num(q1), num(q2), map.cell_class(i, j).code())?;
        }
    }
    w.flush()?;
    eprintln!("components: {}", map.component_count());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Periods { eps, c, which, out } => cmd_periods(*eps, *c, *which, out),
        Command::Profile { eps, samples, out } => cmd_profile(*eps, *samples, out),
        Command::Verify {
            eps,
            samples,
            tol,
            out,
        } => cmd_verify(eps, *samples, *tol, out),
        Command::Flow {
            eps,
            init,
            duration,
            step,
            scheme,
            check_lc,
            out,
        } => cmd_flow(*eps, *init, *duration, *step, *scheme, *check_lc, out),
        Command::Hill {
            eps,
            resolution,
            out,
        } => cmd_hill(*eps, *resolution, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Verdict) => {
            eprintln!("error: convexity certificate failed");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
