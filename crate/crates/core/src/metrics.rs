//! Transfer fidelity, pair concurrence and SWAP efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    apply, basis_ket, kron, partial_trace, pauli_basis, projector, spin_half_ops, trace, vec, Operator, StateVec,
    Superoperator, C64,
};
use crate::propagator::Trajectory;

/// `<psi| rho |psi>`; for a pure target this equals the Uhlmann fidelity.
pub fn state_fidelity(rho: &Operator, target: &StateVec) -> Result<f64> {
    if rho.nrows() != target.len() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), found: target.len() });
    }
    if (target.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("target norm {} is not 1", target.norm())));
    }
    Ok(target.dotc(&(rho * target)).re)
}

fn psd_sqrt(rho: &Operator) -> Operator {
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let d = Operator::from_diagonal(&eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &Operator) -> Result<f64> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.nrows() });
    }
    let s = spin_half_ops();
    let sy = &s.iy * C64::new(2.0, 0.0);
    let yy = kron(&sy, &sy);
    let tilde = &yy * rho.map(|z| z.conj()) * &yy;
    let root = psd_sqrt(rho);
    let r = &root * tilde * &root;
    let r = (&r + r.adjoint()) * C64::new(0.5, 0.0);
    let mut lam: Vec<f64> = r.symmetric_eigen().eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).max(0.0))
}

/// Average gate fidelity of `channel` (a superoperator on `d x d`
/// operators) against the unitary `ideal`.
pub fn average_gate_fidelity(channel: &Superoperator, ideal: &Operator) -> Result<f64> {
    let d = ideal.nrows();
    if channel.nrows() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: channel.nrows() });
    }
    check_trace_preserving(channel, d)?;
    let nq = d.trailing_zeros() as usize;
    let mut sum = C64::new(0.0, 0.0);
    for p in pauli_basis(nq) {
        let out = apply(channel, &p)?;
        sum += trace(&(ideal * p.adjoint() * ideal.adjoint() * out));
    }
    let f_pro = sum.re / (d * d) as f64;
    Ok((d as f64 * f_pro + 1.0) / (d as f64 + 1.0))
}

/// Average gate fidelity of a two-qubit channel against SWAP.
pub fn swap_efficiency(channel: &Superoperator, ideal: &Operator) -> Result<f64> {
    if ideal.nrows() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: ideal.nrows() });
    }
    average_gate_fidelity(channel, ideal)
}

fn check_trace_preserving(channel: &Superoperator, d: usize) -> Result<()> {
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut e = Operator::zeros(d, d);
            e[(i, j)] = C64::new(1.0, 0.0);
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((trace(&apply(channel, &e)?) - C64::new(want, 0.0)).norm());
        }
    }
    if worst > 1e-6 {
        return Err(Error::NotTracePreserving { deviation: worst });
    }
    Ok(())
}

/// Two-qubit channel on `pair` obtained from a full-register propagator by
/// preparing every other spin in `|0>` and tracing it out afterwards.
pub fn pair_channel(total: &Superoperator, nsites: usize, pair: (usize, usize)) -> Result<Superoperator> {
    let (a, b) = pair;
    if a >= b || b >= nsites {
        return Err(Error::InvalidParameter(format!("pair ({a}, {b}) must be ascending sites of a {nsites}-spin chain")));
    }
    let dim = 1usize << nsites;
    if total.nrows() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, found: total.nrows() });
    }
    let shift = |s: usize| nsites - 1 - s;
    let dims = vec![2; nsites];
    let mut out = Superoperator::zeros(16, 16);
    for col in 0..16 {
        let (pi, pj) = (col % 4, col / 4);
        let spread = |p: usize| ((p >> 1) << shift(a)) | ((p & 1) << shift(b));
        let mut full = Operator::zeros(dim, dim);
        full[(spread(pi), spread(pj))] = C64::new(1.0, 0.0);
        let reduced = partial_trace(&apply(total, &full)?, &[a, b], &dims)?;
        out.set_column(col, &vec(&reduced));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterEcho {
    pub omega1_rad_s: f64,
    pub omega_d_rad_s: f64,
    pub tau_c_s: f64,
    pub omega_se_rad_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub fidelity: f64,
    pub concurrence_23: f64,
    pub efficiency: f64,
    pub parameters: ParameterEcho,
}

/// Metrics of a finished transport run. `channel` is the two-qubit channel
/// on the swapped pair.
pub fn report(traj: &Trajectory, nsites: usize, channel: &Superoperator, parameters: ParameterEcho) -> Result<TransferReport> {
    let meta = traj.meta.as_ref().ok_or(Error::MissingMetadata)?;
    if nsites != 3 {
        return Err(Error::InvalidParameter(format!("report expects a 3-spin chain, got {nsites}")));
    }
    let rho = traj.final_state();
    let fidelity = state_fidelity(rho, &meta.target)?;
    let concurrence_23 = concurrence(&partial_trace(rho, &[1, 2], &[2, 2, 2])?)?;
    let swap = crate::operator::swap_operator(0, 1, 2)?;
    let efficiency = swap_efficiency(channel, &swap)?;
    Ok(TransferReport { fidelity, concurrence_23, efficiency, parameters })
}

/// `|psi_-> = (|10> - |01>)/sqrt(2)`.
pub fn singlet() -> StateVec {
    (basis_ket("10") - basis_ket("01")) * C64::new(0.5f64.sqrt(), 0.0)
}

pub fn werner(p: f64) -> Operator {
    projector(&singlet()) * C64::new(p, 0.0) + Operator::identity(4, 4) * C64::new((1.0 - p) / 4.0, 0.0)
}
