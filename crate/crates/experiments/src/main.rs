use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};
use kirchhoff_experiments::config::Overrides;
use kirchhoff_experiments::error::Result;
use kirchhoff_experiments::{conjugacy, energy, simulate, sweep, verify};
use kirchhoff_experiments::{Envelope, ExitCode, ExperimentConfig, Representation};

const CSV_HELP: &str = "\
Outputs (UTF-8, LF line endings, floats with 17 significant digits):
  <out>/<command>.json   report: schema_version, command, build_id, config_hash, grid, pass, result
  <out>/trajectory.csv   simulate: t, hamiltonian, M_<j>_ax<a> for every mode j and axis a,
                         norm_s<s> (‖w‖_s in normal-form coordinates), phys_s<s> (‖u‖_{s+1/2} + ‖v‖_{s-1/2}),
                         ed_s<s> (d/dt ‖w‖_s² along the normal-form field), script_p
  <out>/sweep.csv        sweep: eps, seed, t_target, t_run, achieved_time, exit, max_physical,
                         physical_ratio, max_norm_ratio, c_star, pass

Exit codes: 0 pass, 1 suite failure, 2 config error, 3 numerical error.";

#[derive(Parser)]
#[command(name = "kirchhoff", version = kirchhoff_experiments::BUILD_ID, about = "Kirchhoff equation workbench", after_help = CSV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity, inequality and round-trip suites.
    Verify(Common),
    /// Integrate one trajectory and write its diagnostics.
    Simulate(Common),
    /// Compare the original flow, pulled back, with the normal-form flow.
    Conjugacy(Common),
    /// Measure the sextic growth of ‖w‖_{m0}² along the normal-form flow.
    Energy(Common),
    /// Check norm bounds up to c1_op/ε⁴ for a list of ε.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n_modes: Option<i64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// original, syst6dic or xplus.
    #[arg(long, value_parser = parse_rep)]
    representation: Option<Representation>,
    #[arg(long, hide = true)]
    corrupt_a12_sign: bool,
}

fn parse_rep(s: &str) -> std::result::Result<Representation, String> {
    Representation::parse(s).ok_or_else(|| format!("unknown representation `{s}`"))
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        config.apply(&Overrides {
            out: self.out.clone(),
            seed: self.seed,
            d: self.d,
            n_modes: self.n_modes,
            eps: self.eps,
            t_end: self.t_end,
            representation: self.representation,
            corrupt_a12_sign: self.corrupt_a12_sign,
        });
        config.validate()?;
        Ok(config)
    }
}

fn emit<R: serde::Serialize>(config: &ExperimentConfig, command: &str, pass: bool, result: R) -> Result<ExitCode> {
    let path = Envelope::new(command, config, pass, result).write(&config.out, &format!("{command}.json"))?;
    println!("{command}: {} ({})", if pass { "PASS" } else { "FAIL" }, path.display());
    Ok(if pass { ExitCode::Pass } else { ExitCode::SuiteFailure })
}

fn dispatch(cmd: &Command) -> Result<ExitCode> {
    match cmd {
        Command::Verify(c) => {
            let config = c.load()?;
            let report = verify::run(&config)?;
            for name in &report.failed {
                eprintln!("failed: {name}");
            }
            emit(&config, "verify", report.pass, report)
        }
        Command::Simulate(c) => {
            let config = c.load()?;
            let summary = simulate::run(&config)?;
            emit(&config, "simulate", summary.pass(), summary)
        }
        Command::Conjugacy(c) => {
            let config = c.load()?;
            let report = conjugacy::run(&config)?;
            if let Some(note) = &report.note {
                eprintln!("inconclusive: {note}");
            }
            let pass = report.status != conjugacy::Status::Fail;
            emit(&config, "conjugacy", pass, report)
        }
        Command::Energy(c) => {
            let config = c.load()?;
            let report = energy::run(&config)?;
            emit(&config, "energy", report.pass, report)
        }
        Command::Sweep(c) => {
            let config = c.load()?;
            let mut result = sweep::run(&config)?;
            sweep::write(&mut result, &config.out)?;
            emit(&config, "sweep", result.pass, result)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    process::exit(code as i32);
}
