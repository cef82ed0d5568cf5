use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use llwall::config::RunConfig;
use llwall::dynamics::{residual_travelling_wall, simulate_with, write_diagnostics_csv, write_snapshots, Frame, Probe, SimConfig};
use llwall::experiments::{initial_field, run_theorem1, track_wall, Comparison, CriterionResult, ExperimentReport};
use llwall::reduction::{lift_project_rhs, reduced_rhs};
use llwall::stability::spectral_report;
use llwall::walls::{sech, th};
use llwall::{ControlSchedule, Error, Grid, PairField, WallParams};

#[derive(Parser)]
#[command(name = "llwall", version, about = "Domain-wall dynamics and open-loop steering for the 1D Landau-Lifschitz equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config and LLG_OUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    half_width: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate from a (perturbed) wall under a constant field
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        frame: Option<Frame>,
        /// Also write one CSV per output time
        #[arg(long)]
        snapshots: bool,
    },
    /// Residual of the exact travelling walls and its grid convergence
    VerifyWall {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.05, 0.1])]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Compare the reduced right-hand side with the lifted moving-frame equation
    ReduceCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.02)]
        delta: f64,
        #[arg(long, default_value_t = 0.05)]
        amplitude: f64,
    },
    /// Leading eigenvalues of the linearised operator
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(short, default_value_t = 6)]
        k: usize,
    },
    /// Steering experiment: move the wall, then watch it settle
    Control {
        #[command(flatten)]
        common: Common,
        /// Run several configs in parallel, each into <out>/<config stem>
        #[arg(long, num_args = 1..)]
        sweep: Vec<PathBuf>,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Precondition(_) | Error::InvalidGrid(_) | Error::InvalidSchedule(_) => 2,
        Error::Stage { source, .. } => exit_code(source),
        _ => 1,
    }
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(n) = common.n {
        cfg.n = n;
    }
    if let Some(x) = common.half_width {
        cfg.half_width = x;
    }
    cfg.grid()?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig, common: &Common) -> Result<PathBuf, Error> {
    let dir = cfg.resolve_out_dir(common.out.as_deref());
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn summarise(criteria: &[CriterionResult]) -> Outcome {
    for c in criteria {
        println!("{c}");
    }
    if criteria.iter().all(CriterionResult::pass) {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn simulate(common: &Common, t_end: Option<f64>, delta: Option<f64>, frame: Option<Frame>, snapshots: bool) -> Result<Outcome, Error> {
    let mut cfg = load(common)?;
    if let Some(t) = t_end {
        cfg.t_end = t;
    }
    if let Some(d) = delta {
        cfg.delta = d;
    }
    if let Some(f) = frame {
        cfg.frame = f;
    }
    let dir = out_dir(&cfg, common)?;
    let t1 = cfg.theorem1()?;
    let u0 = initial_field(&t1)?;
    let sim = SimConfig {
        keep_snapshots: snapshots,
        ..SimConfig::new(t1.grid, cfg.t_end, cfg.dt_cfl)?.with_output_interval(cfg.output_interval)
    };
    let traj = simulate_with(&u0, &ControlSchedule::constant(cfg.delta), &sim, cfg.frame, |_, u| {
        Ok(match track_wall(u) {
            Ok(e) => Probe {
                sigma_est: Some(e.sigma_est),
                theta_est: Some(e.theta_est),
                ..Probe::default()
            },
            Err(_) => Probe::default(),
        })
    })?;
    write_diagnostics_csv(&dir.join("diagnostics.csv"), &traj.records)?;
    if snapshots {
        write_snapshots(&dir.join("snapshots"), &traj)?;
    }
    Ok(summarise(&[CriterionResult::new(
        "sphere_constraint",
        traj.max_norm_drift(),
        1e-12,
        Comparison::AtMost,
    )]))
}

fn verify_wall(common: &Common, deltas: &[f64], t: f64) -> Result<Outcome, Error> {
    let cfg = load(common)?;
    let dir = out_dir(&cfg, common)?;
    let coarse = cfg.grid()?;
    let fine = Grid::new(cfg.half_width, 2 * cfg.n - 1)?;
    let mut csv = String::from("delta,n,residual\n");
    let mut criteria = Vec::new();
    for &d in deltas {
        let p = WallParams::new(d, 0.0, 0.0);
        let rc = residual_travelling_wall(&p, &coarse, t);
        let rf = residual_travelling_wall(&p, &fine, t);
        csv.push_str(&format!("{d:.16e},{},{rc:.16e}\n{d:.16e},{},{rf:.16e}\n", coarse.len(), fine.len()));
        criteria.push(CriterionResult::new(format!("residual[delta={d}]"), rc, 5e-3, Comparison::AtMost));
        criteria.push(CriterionResult::new(
            format!("refinement_ratio_error[delta={d}]"),
            (rc / rf - 4.0).abs(),
            0.8,
            Comparison::AtMost,
        ));
    }
    fs::write(dir.join("verify_wall.csv"), csv)?;
    Ok(summarise(&criteria))
}

fn reduce_check(common: &Common, delta: f64, amplitude: f64) -> Result<Outcome, Error> {
    let cfg = load(common)?;
    let dir = out_dir(&cfg, common)?;
    let grid = cfg.grid()?;
    let r = PairField::from_fn(grid, |x| (amplitude * sech(x), -0.6 * amplitude * sech(x) * th(x)));
    let lhs = lift_project_rhs(&r, delta)?;
    let (rhs, _) = reduced_rhs(&r, delta)?;
    let mut w = std::io::BufWriter::new(fs::File::create(dir.join("reduce_check.csv"))?);
    writeln!(w, "x,lhs1,lhs2,rhs1,rhs2,abs_err")?;
    let mut worst: f64 = 0.0;
    for (i, x) in grid.nodes().enumerate() {
        let (l1, l2) = (lhs.r1().values()[i], lhs.r2().values()[i]);
        let (r1, r2) = (rhs.r1().values()[i], rhs.r2().values()[i]);
        let err = (l1 - r1).abs().max((l2 - r2).abs());
        worst = worst.max(err);
        writeln!(w, "{x:.16e},{l1:.16e},{l2:.16e},{r1:.16e},{r2:.16e},{err:.16e}")?;
    }
    w.flush()?;
    Ok(summarise(&[CriterionResult::new("reduction_max_abs_err", worst, 1e-10, Comparison::AtMost)]))
}

fn spectrum(common: &Common, k: usize) -> Result<Outcome, Error> {
    let cfg = load(common)?;
    let dir = out_dir(&cfg, common)?;
    let rep = spectral_report(&cfg.grid()?, k.max(2))?;
    fs::write(dir.join("spectrum.csv"), rep.to_csv())?;
    Ok(summarise(&[
        CriterionResult::new("lambda1_abs", rep.eigenvalues[0].abs(), 1e-3, Comparison::AtMost),
        CriterionResult::new("overlap_sech_deficit", 1.0 - rep.overlap_sech[0], 1e-3, Comparison::AtMost),
        CriterionResult::new("lambda2_above", rep.eigenvalues[1], -1.05, Comparison::Above),
        CriterionResult::new("lambda2_at_most", rep.eigenvalues[1], -0.90, Comparison::AtMost),
    ]))
}

fn print_report(rep: &ExperimentReport) {
    println!(
        "switch time {:.6}, first level {:.6}, theta2 {:.6}, limit (theta, sigma) = ({:.6}, {:.6}), decay rate {:.4} on [{:.2}, {:.2}], {:.1} s",
        rep.plan.switch_time,
        rep.plan.first_level,
        rep.theta2,
        rep.lambda_limit.theta,
        rep.lambda_limit.sigma,
        rep.decay_rate,
        rep.decay_window.0,
        rep.decay_window.1,
        rep.runtime_secs
    );
}

fn control_one(cfg: &RunConfig, dir: &Path) -> Result<ExperimentReport, Error> {
    let rep = run_theorem1(&cfg.theorem1()?)?;
    rep.write(dir)?;
    Ok(rep)
}

fn control(common: &Common, sweep: &[PathBuf]) -> Result<Outcome, Error> {
    if sweep.is_empty() {
        let cfg = load(common)?;
        let dir = out_dir(&cfg, common)?;
        let rep = control_one(&cfg, &dir)?;
        print_report(&rep);
        return Ok(summarise(&rep.criteria));
    }
    let base = RunConfig::default().resolve_out_dir(common.out.as_deref());
    let configs = sweep
        .iter()
        .map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
            Ok((RunConfig::load(p)?, base.join(stem)))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let results: Vec<Result<ExperimentReport, Error>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(cfg, dir)| s.spawn(move || control_one(cfg, dir)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut all_pass = true;
    for ((_, dir), res) in configs.iter().zip(results) {
        println!("== {}", dir.display());
        let rep = res?;
        print_report(&rep);
        all_pass &= matches!(summarise(&rep.criteria), Outcome::Pass);
    }
    Ok(if all_pass { Outcome::Pass } else { Outcome::Fail })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Simulate {
            common,
            t_end,
            delta,
            frame,
            snapshots,
        } => simulate(common, *t_end, *delta, *frame, *snapshots),
        Command::VerifyWall { common, deltas, t } => verify_wall(common, deltas, *t),
        Command::ReduceCheck { common, delta, amplitude } => reduce_check(common, *delta, *amplitude),
        Command::Spectrum { common, k } => spectrum(common, *k),
        Command::Control { common, sweep } => control(common, sweep),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
