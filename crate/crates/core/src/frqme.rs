//! Generator of the fluctuation-regulated master equation.
//!
//! ```text
//! d rho/dt = -i [Hbar, rho]
//!            - sum_{a,b sec} G(W_b) ( c_ab (A_a A_b rho - A_b rho A_a)
//!                                   + c_ba (rho A_b A_a - A_a rho A_b) )
//! ```
//!
//! with `G(W) = tau_c / (1 - i W tau_c)` the regulated memory integral and
//! `c_ab = Tr(B_a B_b rho_E)`. A pair is secular when `|W_a + W_b|` is below
//! the cutoff. Since component lists are closed under conjugation this is the
//! usual frequency-matching condition between a term and a conjugate partner.
//! The imaginary part of `G` produces the Lamb-type shift.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{BathSpec, EnvFactor, HarmonicComponent};
use crate::operator::{commutator_superop, kron, pauli_basis, sandwich, spost, spre, Operator, Superoperator, C64};

#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    pub components: Vec<HarmonicComponent>,
    /// Static part of the system Hamiltonian not listed as a component.
    pub static_h: Operator,
    pub bath: BathSpec,
    /// rad/s
    pub secular_cutoff: f64,
}

impl GeneratorSpec {
    pub fn dim(&self) -> usize {
        self.static_h.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.secular_cutoff > 0.0) {
            return Err(Error::InvalidParameter(format!("secular cutoff {} must be positive", self.secular_cutoff)));
        }
        let d = self.dim();
        for c in &self.components {
            if !c.freq.is_finite() {
                return Err(Error::NonFinite("component frequency"));
            }
            if c.op.nrows() != d {
                return Err(Error::DimensionMismatch { expected: d, found: c.op.nrows() });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GklsDiagnostic {
    pub valid: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub gen: Superoperator,
    pub gkls: GklsDiagnostic,
}

/// `int_0^inf e^{i W tau} e^{-tau/tau_c} d tau = tau_c / (1 - i W tau_c)`.
pub fn regulator_integral(omega: f64, tau_c: f64) -> Result<C64> {
    if !(tau_c > 0.0) {
        return Err(Error::InvalidParameter(format!("tau_c = {tau_c} must be positive")));
    }
    Ok(C64::new(tau_c, 0.0) / C64::new(1.0, -omega * tau_c))
}

/// Environment-averaged secular Hamiltonian.
pub fn secular_hamiltonian(spec: &GeneratorSpec) -> Operator {
    let mut h = spec.static_h.clone();
    for c in &spec.components {
        let m = c.env.mean();
        if m != 0.0 && c.freq.abs() < spec.secular_cutoff {
            h += &c.op * C64::new(m, 0.0);
        }
    }
    h
}

pub fn first_order_generator(spec: &GeneratorSpec) -> Result<Superoperator> {
    spec.validate()?;
    commutator_superop(&secular_hamiltonian(spec))
}

pub fn second_order_dissipator(spec: &GeneratorSpec) -> Result<Superoperator> {
    spec.validate()?;
    let d = spec.dim();
    let mut out = Superoperator::zeros(d * d, d * d);
    let comps = &spec.components;
    for a in comps {
        for b in comps {
            if (a.freq + b.freq).abs() >= spec.secular_cutoff {
                continue;
            }
            let cab = EnvFactor::correlation(a.env, b.env);
            let cba = EnvFactor::correlation(b.env, a.env);
            if cab == 0.0 && cba == 0.0 {
                continue;
            }
            let g = regulator_integral(b.freq, spec.bath.tau_c)?;
            if cab != 0.0 {
                let w = g * cab;
                out -= (spre(&(&a.op * &b.op)) - sandwich(&b.op, &a.op)) * w;
            }
            if cba != 0.0 {
                let w = g * cba;
                out -= (spost(&(&b.op * &a.op)) - sandwich(&a.op, &b.op)) * w;
            }
        }
    }
    Ok(out)
}

pub fn assemble(spec: &GeneratorSpec) -> Result<Liouvillian> {
    let gen = first_order_generator(spec)? + second_order_dissipator(spec)?;
    let gkls = gkls_diagnostic(&gen)?;
    Ok(Liouvillian { gen, gkls })
}

/// Choi matrix `sum_{mn} E_mn (x) L(E_mn)` in the column-stacking layout.
fn choi(gen: &Superoperator, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d * d, d * d, |row, col| {
        let (c, r) = (row / d, row % d);
        let (cp, rp) = (col / d, col % d);
        gen[(rp * d + r, cp * d + c)]
    })
}

/// Coefficients `c_ij` of `L(rho) = sum c_ij F_i rho F_j^dagger` over the
/// normalized Pauli-string basis. The block with `i, j >= 1` is the
/// Kossakowski matrix.
pub fn process_coefficients(gen: &Superoperator) -> Result<DMatrix<C64>> {
    let d2 = gen.nrows();
    let d = (d2 as f64).sqrt().round() as usize;
    if d * d != d2 || !d.is_power_of_two() {
        return Err(Error::DimensionMismatch { expected: d * d, found: d2 });
    }
    let basis = pauli_basis(d.trailing_zeros() as usize);
    let m = DMatrix::from_fn(d2, d2, |row, k| basis[k].as_slice()[row]);
    Ok(m.adjoint() * choi(gen, d) * m)
}

pub fn kossakowski_matrix(gen: &Superoperator) -> Result<DMatrix<C64>> {
    let c = process_coefficients(gen)?;
    let n = c.nrows();
    let k = c.view((1, 1), (n - 1, n - 1)).into_owned();
    Ok((&k + k.adjoint()) * C64::new(0.5, 0.0))
}

pub fn gkls_diagnostic(gen: &Superoperator) -> Result<GklsDiagnostic> {
    let k = kossakowski_matrix(gen)?;
    let ev = k.symmetric_eigen().eigenvalues;
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(GklsDiagnostic { valid: min >= -1e-9 * max.max(1.0), min_eigenvalue: min, max_eigenvalue: max })
}

/// Largest `|sum_i L[(i,i), :]|`, relative to the generator's max-norm.
pub fn trace_annihilation_defect(gen: &Superoperator) -> f64 {
    let d = (gen.nrows() as f64).sqrt().round() as usize;
    let scale = crate::operator::max_norm(gen).max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for col in 0..gen.ncols() {
        let s: C64 = (0..d).map(|i| gen[(i * d + i, col)]).sum();
        worst = worst.max(s.norm());
    }
    worst / scale
}

/// The same dissipator built from an explicit `D[L]` list, used to cross-check
/// Lindblad structure in tests and benches.
pub fn lindblad_superop(ops: &[(f64, Operator)]) -> Superoperator {
    let d = ops.first().map(|(_, l)| l.nrows()).unwrap_or(1);
    let mut out = Superoperator::zeros(d * d, d * d);
    for (rate, l) in ops {
        let ldl = l.adjoint() * l;
        let jump = kron(&l.map(|z| z.conj()), l);
        out += (jump - (spre(&ldl) + spost(&ldl)) * C64::new(0.5, 0.0)) * C64::new(*rate, 0.0);
    }
    out
}
