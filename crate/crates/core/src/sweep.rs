//! Parallel grid evaluation over (w1, w_D, tau_c) with deterministic output.

use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BathSpec;
use crate::scenario::Scenario;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// rad/s
    pub omega1: Vec<f64>,
    /// rad/s; applied as a uniform coupling `J = w_D / 2pi` on every pair.
    pub omega_d: Vec<f64>,
    /// s
    pub tau_c: Vec<f64>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("omega1", &self.omega1), ("omega_d", &self.omega_d), ("tau_c", &self.tau_c)] {
            if axis.is_empty() {
                return Err(Error::InvalidParameter(format!("grid axis {name} is empty")));
            }
            if axis.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("grid axis {name} must be finite and positive")));
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(format!("grid axis {name} must be strictly increasing")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.omega1.len() * self.omega_d.len() * self.tau_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major: w1 outermost, tau_c fastest.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &w1 in &self.omega1 {
            for &wd in &self.omega_d {
                for &tc in &self.tau_c {
                    out.push((w1, wd, tc));
                }
            }
        }
        out
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum PointStatus {
    Ok,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub omega1_rad_s: f64,
    pub omega_d_rad_s: f64,
    pub tau_c_s: f64,
    pub omega_se_rad_s: f64,
    /// NaN when the point failed.
    pub fidelity: f64,
    pub concurrence_23: f64,
    pub efficiency: f64,
    #[serde(flatten)]
    pub status: PointStatus,
    /// Not serialized, so outputs stay reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == PointStatus::Ok
    }

    pub fn scaled(&self) -> (f64, f64, f64) {
        let s = self.omega_se_rad_s;
        (self.omega1_rad_s / s, self.omega_d_rad_s / s, self.tau_c_s * s)
    }
}

/// The scenario evaluated at one grid point.
pub fn point_scenario(base: &Scenario, omega1: f64, omega_d: f64, tau_c: f64) -> Result<Scenario> {
    let mut s = base.clone();
    s.omega1 = omega1;
    s.chain = base.chain.with_uniform_coupling(omega_d / (2.0 * std::f64::consts::PI))?;
    s.bath = BathSpec::new(base.bath.omega_se, tau_c)?;
    Ok(s)
}

fn run_point(base: &Scenario, (w1, wd, tc): (f64, f64, f64)) -> SweepRecord {
    let start = Instant::now();
    let result = point_scenario(base, w1, wd, tc).and_then(|s| s.evaluate());
    let (fidelity, concurrence_23, efficiency, status) = match result {
        Ok(r) => (r.fidelity, r.concurrence_23, r.efficiency, PointStatus::Ok),
        Err(e) => (f64::NAN, f64::NAN, f64::NAN, PointStatus::Failed(e.to_string())),
    };
    SweepRecord {
        omega1_rad_s: w1,
        omega_d_rad_s: wd,
        tau_c_s: tc,
        omega_se_rad_s: base.bath.omega_se,
        fidelity,
        concurrence_23,
        efficiency,
        status,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Evaluate every grid point on `workers` threads. Records come back in
/// grid order whatever the scheduling; failed points are marked, not fatal.
pub fn run_sweep(grid: &GridSpec, base: &Scenario, workers: usize) -> Result<Vec<SweepRecord>> {
    grid.validate()?;
    if workers == 0 {
        return Err(Error::InvalidParameter("worker count must be at least 1".into()));
    }
    let points = grid.points();
    if workers == 1 {
        return Ok(points.into_iter().map(|p| run_point(base, p)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| points.into_par_iter().map(|p| run_point(base, p)).collect()))
}

/// Highest-fidelity successful record; ties go to the smaller w1, then the
/// smaller tau_c, then the smaller w_D.
pub fn argmax_report(records: &[SweepRecord]) -> Result<&SweepRecord> {
    records
        .iter()
        .filter(|r| r.is_ok())
        .min_by(|a, b| {
            b.fidelity
                .total_cmp(&a.fidelity)
                .then(a.omega1_rad_s.total_cmp(&b.omega1_rad_s))
                .then(a.tau_c_s.total_cmp(&b.tau_c_s))
                .then(a.omega_d_rad_s.total_cmp(&b.omega_d_rad_s))
        })
        .ok_or(Error::AllPointsFailed)
}

/// Decimal notation with 12 significant digits.
pub fn format_sig12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return format!("{:.11}", 0.0);
    }
    let decimals = (11 - v.abs().log10().floor() as i32).max(0) as usize;
    format!("{v:.decimals$}")
}

pub const TABLE_HEADER: [&str; 10] = [
    "omega1_rad_s",
    "omegaD_rad_s",
    "tauc_s",
    "omega1_over_omegaSE",
    "omegaD_over_omegaSE",
    "tauc_times_omegaSE",
    "fidelity",
    "concurrence_23",
    "efficiency",
    "status",
];

/// Comma-separated table, one row per record in the given order.
pub fn write_table<W: Write>(records: &[SweepRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{}", TABLE_HEADER.join(","))?;
    for r in records {
        let (a, b, c) = r.scaled();
        let nums = [r.omega1_rad_s, r.omega_d_rad_s, r.tau_c_s, a, b, c, r.fidelity, r.concurrence_23, r.efficiency];
        let cells: Vec<String> = nums.iter().map(|v| format_sig12(*v)).collect();
        let status = if r.is_ok() { "ok" } else { "failed" };
        writeln!(w, "{},{status}", cells.join(","))?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary<'a, C: Serialize> {
    pub config: &'a C,
    pub points: usize,
    pub failed: usize,
    pub argmax: Option<&'a SweepRecord>,
    pub records: &'a [SweepRecord],
}

impl<'a, C: Serialize> SweepSummary<'a, C> {
    pub fn new(config: &'a C, records: &'a [SweepRecord]) -> Self {
        SweepSummary {
            config,
            points: records.len(),
            failed: records.iter().filter(|r| !r.is_ok()).count(),
            argmax: argmax_report(records).ok(),
            records,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rec(w1: f64, tc: f64, fid: f64) -> SweepRecord {
        SweepRecord {
            omega1_rad_s: w1,
            omega_d_rad_s: 1.0,
            tau_c_s: tc,
            omega_se_rad_s: 1.0,
            fidelity: fid,
            concurrence_23: 0.0,
            efficiency: 0.0,
            status: PointStatus::Ok,
            wall_time: 0.0,
        }
    }

    #[test]
    fn grid_validation() {
        let good = GridSpec { omega1: vec![1.0, 2.0], omega_d: vec![3.0], tau_c: vec![1e-7] };
        assert!(good.validate().is_ok());
        assert_eq!(good.points(), vec![(1.0, 3.0, 1e-7), (2.0, 3.0, 1e-7)]);
        for bad in [
            GridSpec { omega1: vec![], ..good.clone() },
            GridSpec { omega1: vec![2.0, 1.0], ..good.clone() },
            GridSpec { omega1: vec![1.0, 1.0], ..good.clone() },
            GridSpec { tau_c: vec![0.0], ..good.clone() },
            GridSpec { omega_d: vec![f64::NAN], ..good.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn row_major_order() {
        let g = GridSpec { omega1: vec![1.0, 2.0], omega_d: vec![3.0, 4.0], tau_c: vec![5.0, 6.0] };
        let p = g.points();
        assert_eq!(p[0], (1.0, 3.0, 5.0));
        assert_eq!(p[1], (1.0, 3.0, 6.0));
        assert_eq!(p[2], (1.0, 4.0, 5.0));
        assert_eq!(p[7], (2.0, 4.0, 6.0));
    }

    #[test]
    fn logspace_endpoints() {
        let v = logspace(10.0, 1e4, 4);
        assert_eq!(v.len(), 4);
        assert!((v[0] - 10.0).abs() < 1e-12 && (v[3] - 1e4).abs() < 1e-8);
        assert!((v[1] - 100.0).abs() < 1e-10);
    }

    #[test]
    fn argmax_tie_breaks() {
        assert!(matches!(argmax_report(&[]), Err(Error::AllPointsFailed)));
        let one = [rec(2.0, 1.0, 0.3)];
        assert_eq!(argmax_report(&one).unwrap(), &one[0]);
        let tie = [rec(3.0, 1.0, 0.5), rec(2.0, 2.0, 0.5), rec(2.0, 1.0, 0.5), rec(1.0, 1.0, 0.4)];
        assert_eq!(argmax_report(&tie).unwrap(), &tie[2]);
        let mut failed = rec(1.0, 1.0, f64::NAN);
        failed.status = PointStatus::Failed("x".into());
        assert!(matches!(argmax_report(&[failed.clone()]), Err(Error::AllPointsFailed)));
        let mixed = [failed, rec(5.0, 1.0, 0.1)];
        assert_eq!(argmax_report(&mixed).unwrap().omega1_rad_s, 5.0);
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(1.0), "1.00000000000");
        assert_eq!(format_sig12(942477.796076938), "942477.796077");
        assert_eq!(format_sig12(1.5915494309189535e-7), "0.000000159154943092");
        assert_eq!(format_sig12(-0.25), "-0.250000000000");
        assert_eq!(format_sig12(f64::NAN), "nan");
        assert_eq!(format_sig12(0.0), "0.00000000000");
    }

    #[test]
    fn table_shape_and_failure_marker() {
        let mut bad = rec(1.0, 1.0, f64::NAN);
        bad.status = PointStatus::Failed("positivity".into());
        (bad.concurrence_23, bad.efficiency) = (f64::NAN, f64::NAN);
        let mut buf = Vec::new();
        write_table(&[rec(1.0, 1.0, 0.5), bad], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TABLE_HEADER.join(","));
        assert!(lines[1].ends_with(",ok"));
        assert!(lines[2].ends_with(",nan,nan,nan,failed"));
        assert!(lines.iter().all(|l| l.split(',').count() == 10));
    }

    #[test]
    fn single_point_matches_direct_evaluation() {
        let base = Scenario::nonidentical_default();
        let (w1, wd, tc) = (2.0 * PI * 150e3, 2.0 * PI * 150e3, 0.1 / base.bath.omega_se);
        let grid = GridSpec { omega1: vec![w1], omega_d: vec![wd], tau_c: vec![tc] };
        let recs = run_sweep(&grid, &base, 1).unwrap();
        let direct = point_scenario(&base, w1, wd, tc).unwrap().evaluate().unwrap();
        assert_eq!(recs[0].fidelity.to_bits(), direct.fidelity.to_bits());
        assert_eq!(recs[0].efficiency.to_bits(), direct.efficiency.to_bits());
    }

    #[test]
    fn failed_point_is_marked_not_fatal() {
        let mut base = Scenario::nonidentical_default();
        base.chain.larmor.truncate(2);
        let grid = GridSpec { omega1: vec![1e5], omega_d: vec![1e5], tau_c: vec![1e-7] };
        let recs = run_sweep(&grid, &base, 1).unwrap();
        assert!(!recs[0].is_ok());
        assert!(recs[0].fidelity.is_nan());
        assert!(run_sweep(&grid, &base, 0).is_err());
    }
}
