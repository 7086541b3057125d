//! TOML run configuration. Every physical quantity is a string carrying its
//! unit; spins are numbered from 1 in the file.

use chainswap::model::Coupling;
use chainswap::pulse::Axis;
use chainswap::sweep::logspace;
use chainswap::{BathSpec, ChainSpec, GridSpec, PulseModel, Refocus, RegimeChoice, Scenario};
use serde::{Deserialize, Serialize};

use crate::units::{parse_quantity, Dimension};

pub const FIG2: &str = include_str!("../presets/fig2.cfg");
pub const FIG3: &str = include_str!("../presets/fig3.cfg");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    chain: RawChain,
    bath: RawBath,
    drive: RawDrive,
    #[serde(default)]
    regime: RawRegime,
    #[serde(default)]
    protocol: RawProtocol,
    grid: Option<RawGrid>,
    #[serde(default)]
    gate: RawGate,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    larmor: Vec<String>,
    /// One `J` for every pair.
    coupling: Option<String>,
    couplings: Option<Vec<RawCoupling>>,
    geometry: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    spins: [usize; 2],
    j: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    omega_se: String,
    tau_c: Option<String>,
    kappa: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    omega1: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegime {
    #[serde(default)]
    mode: RegimeChoice,
    dt: Option<String>,
    secular_cutoff: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    refocus: Option<String>,
    #[serde(default)]
    pulses: PulseModel,
    sample_dt: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    omega1: RawAxis,
    omega_d: RawAxis,
    tau_c: RawAxis,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAxis {
    List(Vec<String>),
    Range {
        from: String,
        to: String,
        points: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    #[serde(default = "outer_pair")]
    spins: [usize; 2],
}

impl Default for RawGate {
    fn default() -> Self {
        RawGate { spins: outer_pair() }
    }
}

fn outer_pair() -> [usize; 2] {
    [1, 3]
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    workers: Option<usize>,
}

/// Everything a run needs after defaulting. Serialized into every output
/// file. Site indices here are 0-based.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedConfig {
    pub scenario: Scenario,
    pub coarse_grain_dt_s: f64,
    pub secular_cutoff_rad_s: f64,
    pub grid: Option<GridSpec>,
    pub gate_pair: (usize, usize),
    pub seed: u64,
    /// Execution settings; kept out of the echo so they cannot change outputs.
    #[serde(skip)]
    pub output_dir: Option<String>,
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

fn field<T>(name: &str, r: Result<T, String>) -> Result<T, String> {
    r.map_err(|e| format!("{name}: {e}"))
}

fn quantity(name: &str, text: &str, dim: Dimension) -> Result<f64, String> {
    field(name, parse_quantity(text, dim))
}

fn site(name: &str, spin: usize, n: usize) -> Result<usize, String> {
    if spin == 0 || spin > n {
        return Err(format!("{name}: spin {spin} is outside 1..={n}"));
    }
    Ok(spin - 1)
}

fn parse_refocus(text: &str) -> Result<Refocus, String> {
    let axis = |a: &str| match a {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        "z" => Ok(Axis::Z),
        _ => Err(format!("unknown axis {a:?}")),
    };
    match text.split_once('-') {
        None if text == "none" => Ok(Refocus::None),
        Some(("ideal", a)) => Ok(Refocus::Ideal { axis: axis(a)? }),
        Some(("finite", a)) => Ok(Refocus::Finite { axis: axis(a)? }),
        _ => Err(format!("{text:?} is not one of none, ideal-x|y|z, finite-x|y|z")),
    }
}

fn axis_values(name: &str, axis: &RawAxis, dim: Dimension) -> Result<Vec<f64>, String> {
    let values = match axis {
        RawAxis::List(items) => items
            .iter()
            .enumerate()
            .map(|(i, t)| quantity(&format!("{name}[{i}]"), t, dim))
            .collect::<Result<Vec<_>, _>>()?,
        RawAxis::Range { from, to, points, spacing } => {
            let lo = quantity(&format!("{name}.from"), from, dim)?;
            let hi = quantity(&format!("{name}.to"), to, dim)?;
            if *points == 0 {
                return Err(format!("{name}.points: must be at least 1"));
            }
            match spacing {
                Spacing::Log => {
                    if !(lo > 0.0 && hi > 0.0) {
                        return Err(format!("{name}: log spacing needs positive bounds"));
                    }
                    logspace(lo, hi, *points)
                }
                Spacing::Linear if *points == 1 => vec![lo],
                Spacing::Linear => (0..*points).map(|k| lo + (hi - lo) * k as f64 / (*points - 1) as f64).collect(),
            }
        }
    };
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(format!("{name}: value {v} must be positive"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("{name}: values must be strictly increasing"));
    }
    Ok(values)
}

pub fn parse(text: &str) -> Result<ResolvedConfig, String> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| format!("config: {e}"))?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<ResolvedConfig, String> {
    let larmor = raw
        .chain
        .larmor
        .iter()
        .enumerate()
        .map(|(i, t)| quantity(&format!("chain.larmor[{i}]"), t, Dimension::Frequency))
        .collect::<Result<Vec<_>, _>>()?;
    let n = larmor.len();
    if n == 0 {
        return Err("chain.larmor: at least one spin is required".into());
    }
    let mut chain = match (&raw.chain.coupling, &raw.chain.couplings) {
        (Some(_), Some(_)) => return Err("chain: give either coupling or couplings, not both".into()),
        (Some(j), None) => {
            let j = quantity("chain.coupling", j, Dimension::Frequency)?;
            field("chain.coupling", ChainSpec::uniform(larmor, j).map_err(|e| e.to_string()))?
        }
        (None, list) => {
            let mut couplings = Vec::new();
            for (i, c) in list.iter().flatten().enumerate() {
                let name = format!("chain.couplings[{i}]");
                let a = site(&format!("{name}.spins"), c.spins[0], n)?;
                let b = site(&format!("{name}.spins"), c.spins[1], n)?;
                let j_hz = quantity(&format!("{name}.j"), &c.j, Dimension::Frequency)?;
                couplings.push(Coupling { sites: (a, b), j_hz });
            }
            field("chain.couplings", ChainSpec::new(larmor, couplings).map_err(|e| e.to_string()))?
        }
    };
    if let Some(g) = raw.chain.geometry {
        chain.geometry = g;
    }

    let omega_se = quantity("bath.omega_se", &raw.bath.omega_se, Dimension::Frequency)?;
    let tau_c = raw.bath.tau_c.as_deref().map(|t| quantity("bath.tau_c", t, Dimension::Time)).transpose()?;
    let kappa = raw.bath.kappa.as_deref().map(|t| quantity("bath.kappa", t, Dimension::RootRate)).transpose()?;
    let bath = match (tau_c, kappa) {
        (Some(t), Some(k)) => BathSpec::with_kappa_check(omega_se, t, k),
        (Some(t), None) => BathSpec::new(omega_se, t),
        (None, Some(k)) => BathSpec::from_kappa(omega_se, k),
        (None, None) => return Err("bath: one of tau_c or kappa is required".into()),
    }
    .map_err(|e| format!("bath.tau_c: {e}"))?;

    let omega1 = quantity("drive.omega1", &raw.drive.omega1, Dimension::Frequency)?;
    if !(omega1 > 0.0) {
        return Err("drive.omega1: must be positive".into());
    }

    let coarse_grain_dt = raw.regime.dt.as_deref().map(|t| quantity("regime.dt", t, Dimension::Time)).transpose()?;
    if let Some(dt) = coarse_grain_dt {
        if !(dt > 0.0) {
            return Err("regime.dt: must be positive".into());
        }
    }
    let secular_cutoff = raw
        .regime
        .secular_cutoff
        .as_deref()
        .map(|t| quantity("regime.secular_cutoff", t, Dimension::Frequency))
        .transpose()?;
    if let Some(c) = secular_cutoff {
        if !(c > 0.0) {
            return Err("regime.secular_cutoff: must be positive".into());
        }
    }
    let refocus = match raw.protocol.refocus.as_deref() {
        Some(t) => field("protocol.refocus", parse_refocus(t))?,
        None => Refocus::Finite { axis: Axis::X },
    };
    let sample_dt = raw
        .protocol
        .sample_dt
        .as_deref()
        .map(|t| quantity("protocol.sample_dt", t, Dimension::Time))
        .transpose()?;
    if let Some(dt) = sample_dt {
        if !(dt > 0.0) {
            return Err("protocol.sample_dt: must be positive".into());
        }
    }

    let scenario = Scenario {
        chain,
        bath,
        omega1,
        regime: raw.regime.mode,
        coarse_grain_dt,
        secular_cutoff,
        pulse_model: raw.protocol.pulses,
        refocus,
        sample_dt,
    };
    let mode = scenario.mode().map_err(|e| format!("regime.dt: {e}"))?;

    let grid = raw
        .grid
        .map(|g| -> Result<GridSpec, String> {
            Ok(GridSpec {
                omega1: axis_values("grid.omega1", &g.omega1, Dimension::Frequency)?,
                omega_d: axis_values("grid.omega_d", &g.omega_d, Dimension::Frequency)?,
                tau_c: axis_values("grid.tau_c", &g.tau_c, Dimension::Time)?,
            })
        })
        .transpose()?;

    let a = site("gate.spins", raw.gate.spins[0], n)?;
    let b = site("gate.spins", raw.gate.spins[1], n)?;
    if a == b {
        return Err("gate.spins: the two spins must differ".into());
    }

    if raw.output.workers == Some(0) {
        return Err("output.workers: must be at least 1".into());
    }

    Ok(ResolvedConfig {
        warnings: scenario.bath.timescale_warnings(scenario.omega1),
        coarse_grain_dt_s: mode.coarse_grain_dt,
        secular_cutoff_rad_s: secular_cutoff.unwrap_or(1.0 / mode.coarse_grain_dt),
        scenario,
        grid,
        gate_pair: (a.min(b), a.max(b)),
        seed: raw.seed,
        output_dir: raw.output.dir,
        workers: raw.output.workers,
    })
}
