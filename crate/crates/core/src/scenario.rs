//! One transport run: chain + bath + drive amplitude, compiled and evolved.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{pair_channel, report, ParameterEcho, TransferReport};
use crate::model::{default_coarse_grain, BathSpec, ChainSpec, CouplingForm, RegimeChoice, SecularMode};
use crate::operator::{projector, unvec, vec};
use crate::propagator::{check_state, program_superoperator, propagate, Trajectory, TrajectoryMeta};
use crate::pulse::{compile, transport_protocol, Axis, CompileOptions, Protocol, PulseModel, Refocus, Window};

const KHZ: f64 = 2.0 * PI * 1e3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub chain: ChainSpec,
    pub bath: BathSpec,
    /// Drive amplitude, rad/s.
    pub omega1: f64,
    pub regime: RegimeChoice,
    /// Coarse-graining window, s. Defaults to `sqrt(tau_c / max(w1, w_SE))`.
    pub coarse_grain_dt: Option<f64>,
    /// Secular cutoff, rad/s. Defaults to `1/dt`.
    pub secular_cutoff: Option<f64>,
    pub pulse_model: PulseModel,
    pub refocus: Refocus,
    /// Trajectory sampling step, s. Defaults to 50 samples per window.
    pub sample_dt: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub trajectory: Trajectory,
    pub report: TransferReport,
    pub form: CouplingForm,
}

impl Scenario {
    /// Three spins at 2pi x (10^4, 10^3, 5x10^2) kHz, uniform J = 150 kHz,
    /// w1 = 2pi x 150 kHz, w_SE = 2pi x 100 kHz, w_SE tau_c = 0.1.
    pub fn nonidentical_default() -> Self {
        Self::with_larmor(vec![1e4 * KHZ, 1e3 * KHZ, 5e2 * KHZ])
    }

    /// As above but with spins 1 and 3 both at 2pi x 10^4 kHz.
    pub fn identical_default() -> Self {
        Self::with_larmor(vec![1e4 * KHZ, 1e3 * KHZ, 1e4 * KHZ])
    }

    fn with_larmor(larmor: Vec<f64>) -> Self {
        let omega_se = 100.0 * KHZ;
        Scenario {
            chain: ChainSpec::uniform(larmor, 150e3).expect("valid default chain"),
            bath: BathSpec::new(omega_se, 0.1 / omega_se).expect("valid default bath"),
            omega1: 150.0 * KHZ,
            regime: RegimeChoice::Auto,
            coarse_grain_dt: None,
            secular_cutoff: None,
            pulse_model: PulseModel::ShortPulse,
            refocus: Refocus::Finite { axis: Axis::X },
            sample_dt: None,
        }
    }

    pub fn mode(&self) -> Result<SecularMode> {
        let dt = self
            .coarse_grain_dt
            .unwrap_or_else(|| default_coarse_grain(self.bath.tau_c, self.omega1, self.bath.omega_se));
        SecularMode::new(self.regime, dt)
    }

    pub fn protocol(&self) -> Result<Protocol> {
        transport_protocol(&self.chain, self.omega1, &self.mode()?, self.refocus)
    }

    pub fn windows(&self, protocol: &Protocol) -> Result<Vec<Window>> {
        let opts = CompileOptions { pulse_model: self.pulse_model, secular_cutoff: self.secular_cutoff };
        compile(&protocol.program, &self.chain, &self.bath, &self.mode()?, &opts)
    }

    pub fn echo(&self) -> ParameterEcho {
        ParameterEcho {
            omega1_rad_s: self.omega1,
            omega_d_rad_s: 2.0 * PI * self.chain.coupling(0, 2),
            tau_c_s: self.bath.tau_c,
            omega_se_rad_s: self.bath.omega_se,
        }
    }

    /// Full sampled trajectory plus the metrics.
    pub fn simulate(&self) -> Result<Simulation> {
        let protocol = self.protocol()?;
        let windows = self.windows(&protocol)?;
        let mut trajectory = propagate(&projector(&protocol.initial), &windows, self.sample_dt)?;
        trajectory.meta = Some(TrajectoryMeta {
            initial_label: protocol.initial_label.clone(),
            target_label: protocol.target_label.clone(),
            target: protocol.target.clone(),
        });
        let total = program_superoperator(&windows, self.chain.dim())?;
        let channel = pair_channel(&total, self.chain.nsites(), protocol.pair)?;
        let report = report(&trajectory, self.chain.nsites(), &channel, self.echo())?;
        Ok(Simulation { trajectory, report, form: protocol.form })
    }

    /// Metrics only: one propagator for the whole program, applied to the
    /// initial state. Only the final state is checked for positivity.
    pub fn evaluate(&self) -> Result<TransferReport> {
        let protocol = self.protocol()?;
        let windows = self.windows(&protocol)?;
        let total = program_superoperator(&windows, self.chain.dim())?;
        let rho0 = projector(&protocol.initial);
        let (rho, _) = check_state(unvec(&(&total * vec(&rho0)))?, protocol.program.total_duration())?;
        let trajectory = Trajectory {
            times: vec![protocol.program.total_duration()],
            states: vec![rho],
            meta: Some(TrajectoryMeta {
                initial_label: protocol.initial_label,
                target_label: protocol.target_label,
                target: protocol.target,
            }),
            clipped: 0,
        };
        let channel = pair_channel(&total, self.chain.nsites(), protocol.pair)?;
        report(&trajectory, self.chain.nsites(), &channel, self.echo())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_norm;

    // Pin dt first: the default shrinks with tau_c and would flip every pair
    // to zero-quantum.
    fn closed(mut s: Scenario) -> Scenario {
        s.coarse_grain_dt = Some(s.mode().unwrap().coarse_grain_dt);
        s.bath = BathSpec::new(0.0, 1e-15).unwrap();
        s
    }

    #[test]
    fn closed_transport_is_exact_in_both_regimes() {
        for s in [Scenario::nonidentical_default(), Scenario::identical_default()] {
            let r = closed(s).evaluate().unwrap();
            assert!(r.fidelity > 1.0 - 1e-6, "{r:?}");
            assert!(r.concurrence_23 > 1.0 - 1e-6, "{r:?}");
            assert!(r.efficiency > 1.0 - 1e-6, "{r:?}");
        }
    }

    #[test]
    fn regimes_resolve_as_expected() {
        assert_eq!(Scenario::nonidentical_default().protocol().unwrap().form, CouplingForm::Ising);
        assert_eq!(Scenario::identical_default().protocol().unwrap().form, CouplingForm::ZeroQuantum);
    }

    #[test]
    fn simulate_and_evaluate_agree() {
        let s = Scenario::nonidentical_default();
        let a = s.simulate().unwrap();
        let b = s.evaluate().unwrap();
        assert!((a.report.fidelity - b.fidelity).abs() < 1e-10);
        assert!((a.report.concurrence_23 - b.concurrence_23).abs() < 1e-10);
        assert_eq!(a.report.efficiency, b.efficiency);
        assert!(a.trajectory.times.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn open_metrics_are_strictly_inside_unit_interval() {
        let r = Scenario::nonidentical_default().evaluate().unwrap();
        for v in [r.fidelity, r.efficiency] {
            assert!(v > 0.0 && v < 1.0, "{r:?}");
        }
        assert!((0.0..1.0).contains(&r.concurrence_23));
    }

    #[test]
    fn simulate_is_deterministic() {
        let s = Scenario::identical_default();
        let a = s.simulate().unwrap();
        let b = s.simulate().unwrap();
        assert_eq!(a.report, b.report);
        assert!(max_norm(&(a.trajectory.final_state() - b.trajectory.final_state())) == 0.0);
    }
}
