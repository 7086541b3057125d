use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chainswap::model::resolve_secular_mode;
use chainswap::pulse::swap_program;
use chainswap::sweep::{write_table, SweepSummary};
use chainswap::{argmax_report, gate_check, run_sweep, Error, PulseProgram};
use serde_json::json;

use crate::config::ResolvedConfig;

/// Failure classes, one per exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Physics(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Physics(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Physics(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Positivity { .. }
            | Error::StateInvariant { .. }
            | Error::NotTracePreserving { .. }
            | Error::NotHermitian { .. }
            | Error::NonFinite(_) => Failure::Physics(e.to_string()),
            Error::InvalidParameter(_) | Error::SiteOutOfRange { .. } | Error::DimensionMismatch { .. } => {
                Failure::Config(e.to_string())
            }
            Error::MissingMetadata | Error::AllPointsFailed => Failure::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<fs::File>), Failure> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    let f = fs::File::create(&path).map_err(io_err(&path))?;
    Ok((path, BufWriter::new(f)))
}

fn config_line(cfg: &ResolvedConfig) -> String {
    serde_json::to_string(cfg).expect("config serializes")
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<PathBuf, Failure> {
    let (path, mut w) = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    Ok(path)
}

pub fn simulate(cfg: &ResolvedConfig, out: &Path) -> Result<(), Failure> {
    if cfg.grid.is_some() {
        eprintln!("note: simulate ignores the [grid] section");
    }
    let sim = cfg.scenario.simulate()?;
    let (path, mut w) = create(out, "trajectory.dat")?;
    let meta = sim.trajectory.meta.as_ref().expect("simulate attaches metadata");
    writeln!(w, "# config: {}", config_line(cfg))
        .and_then(|_| writeln!(w, "# initial: {}", meta.initial_label))
        .and_then(|_| writeln!(w, "# target: {}", meta.target_label))
        .and_then(|_| sim.trajectory.write_columns(&mut w))
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;
    let report_path = write_json(
        out,
        "report.json",
        &json!({
            "config": cfg,
            "coupling_form": sim.form,
            "clipped_samples": sim.trajectory.clipped,
            "report": sim.report,
        }),
    )?;
    let r = &sim.report;
    println!("coupling form   {:?}", sim.form);
    println!("fidelity        {:.9}", r.fidelity);
    println!("concurrence_23  {:.9}", r.concurrence_23);
    println!("efficiency      {:.9}", r.efficiency);
    if sim.trajectory.clipped > 0 {
        println!("clipped samples {}", sim.trajectory.clipped);
    }
    println!("wrote {} and {}", path.display(), report_path.display());
    Ok(())
}

pub fn gate(cfg: &ResolvedConfig, program_path: Option<&Path>, out: &Path) -> Result<(), Failure> {
    let s = &cfg.scenario;
    let pair = cfg.gate_pair;
    let j = s.chain.coupling(pair.0, pair.1);
    if !(j > 0.0) {
        return Err(Failure::Config(format!("gate.spins: spins {} and {} are not coupled", pair.0 + 1, pair.1 + 1)));
    }
    let form = resolve_secular_mode(&s.mode()?, pair, &s.chain)?;
    let program = match program_path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            PulseProgram::from_json(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => swap_program(form, (0, 1), j, s.omega1)?,
    };
    let g = gate_check(&program, j, form)?;
    println!("pair            spins {} and {}, J = {} Hz, form {:?}", pair.0 + 1, pair.1 + 1, j, form);
    for c in &g.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("phase           {:.12} pi", g.phase / std::f64::consts::PI);
    println!("max deviation   {:.3e}", g.max_deviation);
    write_json(
        out,
        "gate_check.json",
        &json!({ "config": cfg, "coupling_form": form, "program": program, "passed": g.passed(), "result": g }),
    )?;
    if g.passed() {
        Ok(())
    } else {
        Err(Failure::Physics(format!("gate check failed (max deviation {:.3e})", g.max_deviation)))
    }
}

pub fn sweep(cfg: &ResolvedConfig, workers: usize, out: &Path) -> Result<(), Failure> {
    let grid = cfg.grid.as_ref().ok_or_else(|| Failure::Config("grid: sweep needs a [grid] section".into()))?;
    let start = Instant::now();
    let records = run_sweep(grid, &cfg.scenario, workers)?;
    eprintln!("{} points on {workers} worker(s) in {:.2} s", records.len(), start.elapsed().as_secs_f64());

    let (path, mut w) = create(out, "sweep.csv")?;
    writeln!(w, "# config: {}", config_line(cfg))
        .and_then(|_| write_table(&records, &mut w))
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;
    let summary_path = write_json(out, "sweep_summary.json", &SweepSummary::new(cfg, &records))?;
    println!("wrote {} and {}", path.display(), summary_path.display());

    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        eprintln!("{failed} of {} points failed", records.len());
    }
    let best = argmax_report(&records)?;
    let (a, b, c) = best.scaled();
    println!(
        "argmax          w1 = {:.6e} rad/s ({a:.4} w_SE), w_D = {:.6e} rad/s ({b:.4} w_SE), tau_c = {:.6e} s ({c:.4}/w_SE)",
        best.omega1_rad_s, best.omega_d_rad_s, best.tau_c_s
    );
    println!(
        "                fidelity {:.9}, concurrence_23 {:.9}, efficiency {:.9}",
        best.fidelity, best.concurrence_23, best.efficiency
    );
    Ok(())
}

pub fn validate(cfg: &ResolvedConfig) -> Result<(), Failure> {
    let protocol = cfg.scenario.protocol()?;
    if let Some(g) = &cfg.grid {
        g.validate()?;
    }
    println!("config ok: {} spins, transport pair form {:?}", cfg.scenario.chain.nsites(), protocol.form);
    println!("{}", serde_json::to_string_pretty(cfg).expect("config serializes"));
    Ok(())
}
