//! Dense operators on spin registers and their Liouville-space forms.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex matrix on a tensor-product Hilbert space.
pub type Operator = DMatrix<C64>;
/// Linear map on vectorized operators, `dim^2 x dim^2`.
pub type Superoperator = DMatrix<C64>;
pub type StateVec = DVector<C64>;

/// Tolerance for treating an operator as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// The spin-1/2 operators `I_x, I_y, I_z, I_+, I_-`.
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub ix: Operator,
    pub iy: Operator,
    pub iz: Operator,
    pub iplus: Operator,
    pub iminus: Operator,
}

pub fn spin_half_ops() -> SpinOps {
    let h = 0.5;
    let ix = Operator::from_row_slice(2, 2, &[ZERO, C64::new(h, 0.0), C64::new(h, 0.0), ZERO]);
    let iy = Operator::from_row_slice(2, 2, &[ZERO, C64::new(0.0, -h), C64::new(0.0, h), ZERO]);
    let iz = Operator::from_row_slice(2, 2, &[C64::new(h, 0.0), ZERO, ZERO, C64::new(-h, 0.0)]);
    let iplus = Operator::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
    let iminus = Operator::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]);
    SpinOps { ix, iy, iz, iplus, iminus }
}

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

/// `identity (x) ... (x) op (x) ... (x) identity` with `op` on `site`.
pub fn embed(op: &Operator, site: usize, nsites: usize) -> Result<Operator> {
    if site >= nsites {
        return Err(Error::SiteOutOfRange { site, nsites });
    }
    if op.nrows() != 2 || op.ncols() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: op.nrows() });
    }
    let left = identity(1 << site);
    let right = identity(1 << (nsites - site - 1));
    Ok(kron(&kron(&left, op), &right))
}

/// Split a flat index into per-subsystem digits, most significant first.
fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

/// Reduced operator on the subsystems in `keep`, listed in ascending order
/// in the output regardless of the order given.
pub fn partial_trace(rho: &Operator, keep: &[usize], dims: &[usize]) -> Result<Operator> {
    let total: usize = dims.iter().product();
    if rho.nrows() != total || rho.ncols() != total {
        return Err(Error::DimensionMismatch { expected: total, found: rho.nrows() });
    }
    if keep.is_empty() {
        return Err(Error::InvalidParameter("partial trace needs at least one kept site".into()));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::SiteOutOfRange { site: k, nsites: dims.len() });
        }
        kept[k] = true;
    }
    let kdims: Vec<usize> = (0..dims.len()).filter(|&k| kept[k]).map(|k| dims[k]).collect();
    let rdim: usize = kdims.iter().product();
    let flat = |d: &[usize], keep_side: bool| {
        let mut acc = 0;
        for k in 0..dims.len() {
            if kept[k] == keep_side {
                acc = acc * dims[k] + d[k];
            }
        }
        acc
    };

    let mut out = Operator::zeros(rdim, rdim);
    let mut di = vec![0; dims.len()];
    let mut dj = vec![0; dims.len()];
    for i in 0..total {
        digits(i, dims, &mut di);
        let ti = flat(&di, false);
        for j in 0..total {
            digits(j, dims, &mut dj);
            if flat(&dj, false) != ti {
                continue;
            }
            out[(flat(&di, true), flat(&dj, true))] += rho[(i, j)];
        }
    }
    Ok(out)
}

/// `exp(a * t)` by scaling and squaring with a Padé approximant.
pub fn expm(a: &DMatrix<C64>, t: f64) -> Result<DMatrix<C64>> {
    if !t.is_finite() || a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix exponential input"));
    }
    let out = (a * C64::new(t, 0.0)).exp();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix exponential output"));
    }
    Ok(out)
}

pub fn hermitian_deviation(a: &Operator) -> f64 {
    (a - a.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_norm(a: &DMatrix<C64>) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn ensure_hermitian(a: &Operator) -> Result<()> {
    let scale = max_norm(a).max(1.0);
    let dev = hermitian_deviation(a);
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// Left multiplication `rho -> a rho`.
pub fn spre(a: &Operator) -> Superoperator {
    kron(&identity(a.nrows()), a)
}

/// Right multiplication `rho -> rho a`.
pub fn spost(a: &Operator) -> Superoperator {
    kron(&a.transpose(), &identity(a.nrows()))
}

/// Two-sided multiplication `rho -> a rho b`.
pub fn sandwich(a: &Operator, b: &Operator) -> Superoperator {
    kron(&b.transpose(), a)
}

/// Conjugation `rho -> u rho u^dagger`.
pub fn unitary_superop(u: &Operator) -> Superoperator {
    kron(&u.map(|z| z.conj()), u)
}

/// `rho -> -i [h, rho]`.
pub fn commutator_superop(h: &Operator) -> Result<Superoperator> {
    ensure_hermitian(h)?;
    Ok((spre(h) - spost(h)) * (-I))
}

pub fn vec(rho: &Operator) -> StateVec {
    StateVec::from_column_slice(rho.as_slice())
}

pub fn unvec(v: &StateVec) -> Result<Operator> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::DimensionMismatch { expected: d * d, found: v.len() });
    }
    Ok(Operator::from_column_slice(d, d, v.as_slice()))
}

pub fn apply(s: &Superoperator, rho: &Operator) -> Result<Operator> {
    if s.ncols() != rho.len() {
        return Err(Error::DimensionMismatch { expected: s.ncols(), found: rho.len() });
    }
    unvec(&(s * vec(rho)))
}

pub fn trace(a: &Operator) -> C64 {
    a.diagonal().sum()
}

/// Eigenvalues of a Hermitian operator, ascending. Input is symmetrized first.
pub fn hermitian_eigenvalues(a: &Operator) -> Vec<f64> {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Computational basis state on `bits.len()` qubits, e.g. `basis_ket("100")`.
pub fn basis_ket(bits: &str) -> StateVec {
    let n = bits.len();
    let idx = usize::from_str_radix(bits, 2).expect("basis label must be binary");
    let mut v = StateVec::zeros(1 << n);
    v[idx] = ONE;
    v
}

pub fn projector(psi: &StateVec) -> Operator {
    psi * psi.adjoint()
}

/// Exchange of the two sites `a` and `b` on an `nsites` register.
pub fn swap_operator(a: usize, b: usize, nsites: usize) -> Result<Operator> {
    for s in [a, b] {
        if s >= nsites {
            return Err(Error::SiteOutOfRange { site: s, nsites });
        }
    }
    let dim = 1 << nsites;
    let mut u = Operator::zeros(dim, dim);
    let (sa, sb) = (nsites - 1 - a, nsites - 1 - b);
    for i in 0..dim {
        let ba = (i >> sa) & 1;
        let bb = (i >> sb) & 1;
        let j = (i & !(1 << sa) & !(1 << sb)) | (bb << sa) | (ba << sb);
        u[(j, i)] = ONE;
    }
    Ok(u)
}

/// Orthonormal Pauli-string basis `sigma_i (x) ... / sqrt(2^n)` with the
/// identity string first.
pub fn pauli_basis(nqubits: usize) -> Vec<Operator> {
    let s = spin_half_ops();
    let single = [identity(2), &s.ix * C64::new(2.0, 0.0), &s.iy * C64::new(2.0, 0.0), &s.iz * C64::new(2.0, 0.0)];
    let norm = C64::new(1.0 / ((1usize << nqubits) as f64).sqrt(), 0.0);
    let mut out = vec![Operator::identity(1, 1)];
    for _ in 0..nqubits {
        out = out.iter().flat_map(|m| single.iter().map(move |p| kron(m, p))).collect();
    }
    out.into_iter().map(|m| m * norm).collect()
}
