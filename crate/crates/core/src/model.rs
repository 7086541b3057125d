//! Physical Hamiltonians of the chain in the Zeeman interaction frame.
//!
//! Every spin rotates at its own Larmor frequency, so a drive on spin `k` at
//! carrier `w` survives with residual frequency `w - w0_k` and a resonant
//! drive is static. Time-dependent pieces are kept as [`HarmonicComponent`]s
//! so the master equation can apply its secular filter pair by pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{embed, spin_half_ops, Operator, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub sites: (usize, usize),
    pub j_hz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Larmor frequency of each spin, rad/s.
    pub larmor: Vec<f64>,
    pub couplings: Vec<Coupling>,
    /// Informational only.
    #[serde(default)]
    pub geometry: String,
}

impl ChainSpec {
    pub fn new(larmor: Vec<f64>, couplings: Vec<Coupling>) -> Result<Self> {
        let chain = ChainSpec { larmor, couplings, geometry: "linear chain".into() };
        chain.validate()?;
        Ok(chain)
    }

    /// Every pair coupled with the same `J`.
    pub fn uniform(larmor: Vec<f64>, j_hz: f64) -> Result<Self> {
        let n = larmor.len();
        let couplings = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| Coupling { sites: (a, b), j_hz }))
            .collect();
        Self::new(larmor, couplings)
    }

    pub fn validate(&self) -> Result<()> {
        if self.larmor.is_empty() {
            return Err(Error::InvalidParameter("chain needs at least one spin".into()));
        }
        if self.larmor.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("Larmor frequencies"));
        }
        let n = self.nsites();
        for c in &self.couplings {
            let (a, b) = c.sites;
            for s in [a, b] {
                if s >= n {
                    return Err(Error::SiteOutOfRange { site: s, nsites: n });
                }
            }
            if a == b {
                return Err(Error::InvalidParameter(format!("coupling pair ({a}, {b}) is not distinct")));
            }
            if !(c.j_hz >= 0.0) || !c.j_hz.is_finite() {
                return Err(Error::InvalidParameter(format!("coupling J = {} must be finite and >= 0", c.j_hz)));
            }
        }
        Ok(())
    }

    pub fn nsites(&self) -> usize {
        self.larmor.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.nsites()
    }

    /// Total `J` between two sites, zero if uncoupled.
    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.couplings
            .iter()
            .filter(|c| c.sites == (a, b) || c.sites == (b, a))
            .map(|c| c.j_hz)
            .sum()
    }

    /// Same Larmor frequencies, all pairs recoupled with `j_hz`.
    pub fn with_uniform_coupling(&self, j_hz: f64) -> Result<Self> {
        let mut c = Self::uniform(self.larmor.clone(), j_hz)?;
        c.geometry = self.geometry.clone();
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// System-environment coupling strength, rad/s.
    pub omega_se: f64,
    /// Bath correlation time, s.
    pub tau_c: f64,
}

impl BathSpec {
    pub fn new(omega_se: f64, tau_c: f64) -> Result<Self> {
        if !(tau_c > 0.0) || !tau_c.is_finite() {
            return Err(Error::InvalidParameter(format!("tau_c = {tau_c} must be positive")));
        }
        if !(omega_se >= 0.0) || !omega_se.is_finite() {
            return Err(Error::InvalidParameter(format!("omega_se = {omega_se} must be >= 0")));
        }
        Ok(BathSpec { omega_se, tau_c })
    }

    /// From the fluctuation strength, `tau_c = 2 / kappa^2`.
    pub fn from_kappa(omega_se: f64, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} must be positive")));
        }
        Self::new(omega_se, 2.0 / (kappa * kappa))
    }

    /// Both given: they must agree to 1e-9 relative.
    pub fn with_kappa_check(omega_se: f64, tau_c: f64, kappa: f64) -> Result<Self> {
        let from_k = Self::from_kappa(omega_se, kappa)?;
        if ((from_k.tau_c - tau_c) / tau_c).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "tau_c = {tau_c} disagrees with 2/kappa^2 = {}",
                from_k.tau_c
            )));
        }
        Self::new(omega_se, tau_c)
    }

    pub fn kappa(&self) -> f64 {
        (2.0 / self.tau_c).sqrt()
    }

    /// Warnings when the fast-bath assumption is stretched.
    pub fn timescale_warnings(&self, omega1: f64) -> Vec<String> {
        let mut w = Vec::new();
        if omega1 * self.tau_c >= 1.0 {
            w.push(format!("omega1*tau_c = {:.3} is not small", omega1 * self.tau_c));
        }
        if self.omega_se * self.tau_c >= 1.0 {
            w.push(format!("omega_se*tau_c = {:.3} is not small", self.omega_se * self.tau_c));
        }
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Carrier {
    /// Each target driven at its own Larmor frequency.
    Resonant,
    Fixed { omega_rad_s: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseTarget {
    pub site: usize,
    #[serde(rename = "phase_rad")]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriveSpec {
    /// rad/s
    pub amplitude: f64,
    pub carrier: Carrier,
    pub targets: Vec<PulseTarget>,
}

/// Environment factor `B` of a component `A (x) B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvFactor {
    Identity,
    /// `S_-` of the local environment attached to a site.
    Lower(usize),
    /// `S_+` of the local environment attached to a site.
    Raise(usize),
}

impl EnvFactor {
    /// `Tr(B rho_E)` with every local environment maximally mixed.
    pub fn mean(self) -> f64 {
        match self {
            EnvFactor::Identity => 1.0,
            _ => 0.0,
        }
    }

    /// `Tr(B_a B_b rho_E)` with every local environment maximally mixed.
    pub fn correlation(a: EnvFactor, b: EnvFactor) -> f64 {
        match (a, b) {
            (EnvFactor::Identity, EnvFactor::Identity) => 1.0,
            (EnvFactor::Lower(i), EnvFactor::Raise(j)) | (EnvFactor::Raise(i), EnvFactor::Lower(j)) if i == j => 0.5,
            _ => 0.0,
        }
    }
}

/// One term `op (x) env * exp(-i freq t)` of the interaction-frame
/// Hamiltonian. Lists of components are closed under Hermitian conjugation
/// and sum to `H_eff(t)` with no extra conjugate terms.
#[derive(Clone, Debug)]
pub struct HarmonicComponent {
    pub op: Operator,
    /// rad/s
    pub freq: f64,
    pub env: EnvFactor,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeChoice {
    #[default]
    Auto,
    IsingOnly,
    ZeroQuantum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingForm {
    Ising,
    ZeroQuantum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecularMode {
    pub choice: RegimeChoice,
    /// Coarse-graining window, s.
    pub coarse_grain_dt: f64,
}

impl SecularMode {
    pub fn new(choice: RegimeChoice, coarse_grain_dt: f64) -> Result<Self> {
        if !(coarse_grain_dt > 0.0) || !coarse_grain_dt.is_finite() {
            return Err(Error::InvalidParameter(format!("coarse-graining dt = {coarse_grain_dt} must be positive")));
        }
        Ok(SecularMode { choice, coarse_grain_dt })
    }
}

/// Geometric mean of `tau_c` and `1/max(omega1, omega_se)`.
pub fn default_coarse_grain(tau_c: f64, omega1: f64, omega_se: f64) -> f64 {
    let fastest = omega1.max(omega_se);
    if fastest > 0.0 {
        (tau_c / fastest).sqrt()
    } else {
        100.0 * tau_c
    }
}

/// Lab-frame Zeeman term `sum_k w0_k I_z^k`.
pub fn zeeman_hamiltonian(chain: &ChainSpec) -> Operator {
    let s = spin_half_ops();
    let n = chain.nsites();
    let mut h = Operator::zeros(chain.dim(), chain.dim());
    for (k, &w) in chain.larmor.iter().enumerate() {
        h += embed(&s.iz, k, n).expect("site in range") * C64::new(w, 0.0);
    }
    h
}

/// Secular dipolar coupling on one pair. Double-quantum terms are always
/// dropped; `ZeroQuantum` keeps the flip-flop part.
pub fn dipolar_hamiltonian(pair: (usize, usize), j_hz: f64, form: CouplingForm, nsites: usize) -> Result<Operator> {
    let (a, b) = pair;
    if a == b {
        return Err(Error::InvalidParameter(format!("pair ({a}, {b}) is not distinct")));
    }
    if !(j_hz >= 0.0) {
        return Err(Error::InvalidParameter(format!("J = {j_hz} must be >= 0")));
    }
    let s = spin_half_ops();
    let za = embed(&s.iz, a, nsites)?;
    let zb = embed(&s.iz, b, nsites)?;
    let mut h = &za * &zb;
    if form == CouplingForm::ZeroQuantum {
        let pa = embed(&s.iplus, a, nsites)?;
        let ma = embed(&s.iminus, a, nsites)?;
        let pb = embed(&s.iplus, b, nsites)?;
        let mb = embed(&s.iminus, b, nsites)?;
        h -= (&pa * &mb + &ma * &pb) * C64::new(0.25, 0.0);
    }
    Ok(h * C64::new(2.0 * std::f64::consts::PI * j_hz, 0.0))
}

/// Which coupling form a pair gets: zero-quantum when
/// `|w0_a - w0_b| * dt < 1`, Ising otherwise (the tie goes to Ising).
pub fn resolve_secular_mode(mode: &SecularMode, pair: (usize, usize), chain: &ChainSpec) -> Result<CouplingForm> {
    let n = chain.nsites();
    for s in [pair.0, pair.1] {
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, nsites: n });
        }
    }
    Ok(match mode.choice {
        RegimeChoice::IsingOnly => CouplingForm::Ising,
        RegimeChoice::ZeroQuantum => CouplingForm::ZeroQuantum,
        RegimeChoice::Auto => {
            let dw = (chain.larmor[pair.0] - chain.larmor[pair.1]).abs();
            if dw * mode.coarse_grain_dt < 1.0 {
                CouplingForm::ZeroQuantum
            } else {
                CouplingForm::Ising
            }
        }
    })
}

/// Sum of all pair couplings, each in its resolved secular form.
pub fn coupling_hamiltonian(chain: &ChainSpec, mode: &SecularMode) -> Result<Operator> {
    let mut h = Operator::zeros(chain.dim(), chain.dim());
    for c in &chain.couplings {
        let form = resolve_secular_mode(mode, c.sites, chain)?;
        h += dipolar_hamiltonian(c.sites, c.j_hz, form, chain.nsites())?;
    }
    Ok(h)
}

/// Rotating-wave drive: `(w1/2) e^{-i phi} I_+` at `w - w0_k` plus its
/// conjugate, per target.
pub fn drive_hamiltonian(drive: &DriveSpec, chain: &ChainSpec) -> Result<Vec<HarmonicComponent>> {
    if !(drive.amplitude >= 0.0) || !drive.amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!("drive amplitude {} must be finite and >= 0", drive.amplitude)));
    }
    if drive.amplitude == 0.0 {
        return Ok(Vec::new());
    }
    let s = spin_half_ops();
    let n = chain.nsites();
    let mut out = Vec::with_capacity(2 * drive.targets.len());
    for t in &drive.targets {
        let site = t.site;
        if site >= n {
            return Err(Error::SiteOutOfRange { site, nsites: n });
        }
        let freq = match drive.carrier {
            Carrier::Resonant => 0.0,
            Carrier::Fixed { omega_rad_s } => omega_rad_s - chain.larmor[site],
        };
        let amp = C64::from_polar(drive.amplitude / 2.0, -t.phase);
        out.push(HarmonicComponent { op: embed(&s.iplus, site, n)? * amp, freq, env: EnvFactor::Identity });
        out.push(HarmonicComponent { op: embed(&s.iminus, site, n)? * amp.conj(), freq: -freq, env: EnvFactor::Identity });
    }
    Ok(merge_components(out))
}

/// Flip-flop exchange `(w_SE/2)(I_+ S_- + I_- S_+)` with a resonant local
/// two-level environment on every spin.
pub fn system_env_coupling(chain: &ChainSpec, bath: &BathSpec) -> Result<Vec<HarmonicComponent>> {
    if bath.omega_se == 0.0 {
        return Ok(Vec::new());
    }
    let s = spin_half_ops();
    let n = chain.nsites();
    let g = C64::new(bath.omega_se / 2.0, 0.0);
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        out.push(HarmonicComponent { op: embed(&s.iplus, k, n)? * g, freq: 0.0, env: EnvFactor::Lower(k) });
        out.push(HarmonicComponent { op: embed(&s.iminus, k, n)? * g, freq: 0.0, env: EnvFactor::Raise(k) });
    }
    Ok(out)
}

/// Sum components that share frequency and environment factor. Keeps first
/// occurrence order so results are deterministic.
pub fn merge_components(components: Vec<HarmonicComponent>) -> Vec<HarmonicComponent> {
    let mut out: Vec<HarmonicComponent> = Vec::with_capacity(components.len());
    for c in components {
        match out.iter_mut().find(|o| o.freq == c.freq && o.env == c.env) {
            Some(o) => o.op += &c.op,
            None => out.push(c),
        }
    }
    out
}

/// `sum_alpha Tr(B_alpha rho_E) A_alpha e^{-i Omega_alpha t}`.
pub fn system_hamiltonian_at(components: &[HarmonicComponent], t: f64) -> Option<Operator> {
    let first = components.first()?;
    let mut h = Operator::zeros(first.op.nrows(), first.op.ncols());
    for c in components {
        h += &c.op * C64::from_polar(c.env.mean(), -c.freq * t);
    }
    Some(h)
}
