//! Window-by-window evolution in Liouville space.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::frqme::assemble;
use crate::operator::{expm, hermitian_deviation, trace, unitary_superop, unvec, vec, Operator, StateVec, Superoperator, C64};
use crate::pulse::Window;

/// Tiny negative eigenvalues below this magnitude are numerical noise and
/// left alone.
const NOISE_FLOOR: f64 = 1e-12;
/// Negative eigenvalues down to this are clipped; beyond it we abort.
const CLIP_LIMIT: f64 = 1e-8;
const STATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct TrajectoryMeta {
    pub initial_label: String,
    pub target_label: String,
    pub target: StateVec,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
    pub meta: Option<TrajectoryMeta>,
    /// Number of samples whose spectrum was floored at zero.
    pub clipped: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &Operator {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Columns: time, then re/im of every entry in row-major order, then the
    /// fidelity to the target when one is attached.
    pub fn write_columns<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.states.first().map(|s| s.nrows()).unwrap_or(0);
        write!(w, "time_s")?;
        for i in 0..d {
            for j in 0..d {
                write!(w, " re_{i}_{j} im_{i}_{j}")?;
            }
        }
        if self.meta.is_some() {
            write!(w, " fidelity")?;
        }
        writeln!(w)?;
        for (t, rho) in self.times.iter().zip(&self.states) {
            write!(w, "{t:.12e}")?;
            for i in 0..d {
                for j in 0..d {
                    let z = rho[(i, j)];
                    write!(w, " {:.12e} {:.12e}", z.re, z.im)?;
                }
            }
            if let Some(m) = &self.meta {
                write!(w, " {:.12e}", m.target.dotc(&(rho * &m.target)).re)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Exact propagator of one window.
pub fn window_propagator(w: &Window) -> Result<Superoperator> {
    match w {
        Window::Evolve { spec, duration } => expm(&assemble(spec)?.gen, *duration),
        Window::Instant { unitary, .. } => Ok(unitary_superop(unitary)),
    }
}

/// Product of all window propagators, latest on the left.
pub fn program_superoperator(windows: &[Window], dim: usize) -> Result<Superoperator> {
    let mut s = Superoperator::identity(dim * dim, dim * dim);
    for w in windows {
        s = window_propagator(w)? * s;
    }
    Ok(s)
}

/// Check trace, Hermiticity and positivity of a sampled state. Returns the
/// (possibly clipped) state and whether clipping happened.
pub fn check_state(rho: Operator, time: f64) -> Result<(Operator, bool)> {
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("density matrix"));
    }
    let tr = trace(&rho);
    if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
        return Err(Error::StateInvariant { time, what: format!("trace {tr}") });
    }
    let herm = hermitian_deviation(&rho);
    if herm > STATE_TOL {
        return Err(Error::StateInvariant { time, what: format!("Hermiticity deviation {herm:.3e}") });
    }
    let eig = ((&rho + rho.adjoint()) * C64::new(0.5, 0.0)).symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= -NOISE_FLOOR {
        return Ok((rho, false));
    }
    if min < -CLIP_LIMIT {
        return Err(Error::Positivity { time, eigenvalue: min });
    }
    let floored = eig.eigenvalues.map(|x| x.max(0.0));
    let total: f64 = floored.sum();
    let diag = Operator::from_diagonal(&floored.map(|x| C64::new(x / total, 0.0)));
    let v = &eig.eigenvectors;
    Ok((v * diag * v.adjoint(), true))
}

/// Evolve `rho0` through `windows`, recording samples every `sample_dt`
/// (default: 50 samples per window). Zero-duration windows add a sample at
/// the same time.
pub fn propagate(rho0: &Operator, windows: &[Window], sample_dt: Option<f64>) -> Result<Trajectory> {
    if let Some(dt) = sample_dt {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("sample_dt = {dt} must be positive")));
        }
    }
    let (rho0, _) = check_state(rho0.clone(), 0.0)?;
    let mut traj = Trajectory { times: vec![0.0], states: vec![rho0.clone()], meta: None, clipped: 0 };
    let mut t = 0.0;
    let mut v = vec(&rho0);
    for w in windows {
        let (steps, step_prop, step_dt) = match w {
            Window::Evolve { spec, duration } => {
                let n = match sample_dt {
                    Some(dt) => ((duration / dt).ceil() as usize).max(1),
                    None => 50,
                };
                let h = duration / n as f64;
                (n, expm(&assemble(spec)?.gen, h)?, h)
            }
            Window::Instant { unitary, .. } => (1, unitary_superop(unitary), 0.0),
        };
        for k in 0..steps {
            v = &step_prop * v;
            let now = if k + 1 == steps { t + w_duration(w) } else { t + step_dt * (k + 1) as f64 };
            let (rho, clipped) = check_state(unvec(&v)?, now)?;
            if clipped {
                traj.clipped += 1;
                v = vec(&rho);
            }
            traj.times.push(now);
            traj.states.push(rho);
        }
        t += w_duration(w);
    }
    Ok(traj)
}

fn w_duration(w: &Window) -> f64 {
    match w {
        Window::Evolve { duration, .. } => *duration,
        Window::Instant { .. } => 0.0,
    }
}
