use std::fmt::Write as _;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{RingParameters, ScatteringCenter, WaveVector};
use crate::rhombic::RhombicConfig;
use crate::solver::{self, Probabilities};

/// Environment variable capping sweep parallelism (0 or unset = automatic).
pub const THREADS_ENV: &str = "PTSCATTER_THREADS";

const K_INSET: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Flux,
    Gamma,
    K,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Flux => "phi",
            Self::Gamma => "gamma",
            Self::K => "k",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub axis: Axis,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(axis: Axis, start: f64, end: f64, count: usize) -> Self {
        Self { axis, start, end, count }
    }

    /// `[0, 2pi]`.
    pub fn default_flux(count: usize) -> Self {
        Self::new(Axis::Flux, 0.0, std::f64::consts::TAU, count)
    }

    /// `[1e-3, pi - 1e-3]`, inset from the band edges.
    pub fn default_k(count: usize) -> Self {
        Self::new(Axis::K, K_INSET, std::f64::consts::PI - K_INSET, count)
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.end, self.count)
    }
}

/// `count` evenly spaced points including both ends exactly.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    end
                } else {
                    start + (end - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepModel {
    /// Closed forms of a rhombic ring; flux and gamma may be swept.
    Rhombic(RhombicConfig),
    /// Generic solver on a fixed centre; only k may be swept.
    Center(ScatteringCenter),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: SweepModel,
    /// One or two axes, row-major in the declared order (the first is outermost).
    pub axes: Vec<AxisRange>,
    /// Wave vector used when k is not swept.
    pub k: f64,
}

impl SweepSpec {
    /// The `Phi x k` grid over the default ranges at the config's gamma.
    pub fn flux_k(config: RhombicConfig, flux_count: usize, k_count: usize) -> Self {
        Self {
            model: SweepModel::Rhombic(config),
            axes: vec![AxisRange::default_flux(flux_count), AxisRange::default_k(k_count)],
            k: std::f64::consts::FRAC_PI_2,
        }
    }

    fn check(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Invalid("a sweep needs one or two axes".into()));
        }
        if self.axes.len() == 2 && self.axes[0].axis == self.axes[1].axis {
            return Err(Error::Invalid("sweep axes must differ".into()));
        }
        for a in &self.axes {
            if a.count < 2 {
                return Err(Error::Invalid(format!("axis {} needs at least 2 points", a.axis.as_str())));
            }
            if !(a.start.is_finite() && a.end.is_finite()) {
                return Err(Error::Invalid(format!("axis {} has a non-finite bound", a.axis.as_str())));
            }
        }
        if let SweepModel::Center(c) = &self.model {
            if self.axes.iter().any(|a| a.axis != Axis::K) {
                return Err(Error::Invalid("a centre-file sweep can only vary k".into()));
            }
            c.ensure_valid()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// `None` for centre-file sweeps.
    pub phi: Option<f64>,
    pub gamma: Option<f64>,
    pub k: f64,
    #[serde(rename = "rL2")]
    pub r_left: f64,
    #[serde(rename = "rR2")]
    pub r_right: f64,
    #[serde(rename = "tL2")]
    pub t_left: f64,
    #[serde(rename = "tR2")]
    pub t_right: f64,
    pub flags: String,
}

impl SweepRow {
    pub fn probabilities(&self) -> Probabilities {
        Probabilities {
            r_left: self.r_left,
            r_right: self.r_right,
            t_left: self.t_left,
            t_right: self.t_right,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.flags != "ok" && self.flags != "limit-evaluated"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axes: Vec<AxisRange>,
    pub rows: Vec<SweepRow>,
}

pub const CSV_HEADER: &str = "phi,gamma,k,rL2,rR2,tL2,tR2,flags";

impl SweepTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row at grid index `(i, j)` (`j` ignored for one-axis sweeps).
    pub fn at(&self, i: usize, j: usize) -> &SweepRow {
        match self.axes.get(1) {
            Some(inner) => &self.rows[i * inner.count + j],
            None => &self.rows[i],
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        let opt = |v: Option<f64>| v.map(|x| format_sig(x, 12)).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                opt(r.phi),
                opt(r.gamma),
                format_sig(r.k, 12),
                format_sig(r.r_left, 12),
                format_sig(r.r_right, 12),
                format_sig(r.t_left, 12),
                format_sig(r.t_right, 12),
                r.flags
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("write to memory");
        String::from_utf8(out).expect("ascii output")
    }

    /// JSON array of row objects with the CSV field names. Non-finite
    /// probabilities are written as `null`.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.rows).expect("rows serialize");
        s.push('\n');
        s
    }
}

/// `%.{digits}g`-style formatting: `digits` significant digits, trailing
/// zeros trimmed, exponent form outside `[1e-4, 10^digits)`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= digits as i32 {
        let mut out = trim(mantissa);
        let _ = write!(out, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
        out
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

/// Thread cap from [`THREADS_ENV`]; `0` means automatic.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

/// Evaluate every grid point; singular points are flagged, not fatal.
pub fn sweep(spec: &SweepSpec) -> Result<SweepTable> {
    sweep_with_threads(spec, threads_from_env()?)
}

pub fn sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<SweepTable> {
    spec.check()?;
    let outer = spec.axes[0].values();
    let inner = spec.axes.get(1).map(|a| a.values()).unwrap_or_else(|| vec![f64::NAN]);
    let n_inner = inner.len();
    let total = outer.len() * n_inner;

    let point = |idx: usize| -> SweepRow {
        let mut coords = Coordinates::base(spec);
        coords.set(spec.axes[0].axis, outer[idx / n_inner]);
        if let Some(a) = spec.axes.get(1) {
            coords.set(a.axis, inner[idx % n_inner]);
        }
        evaluate(&spec.model, coords)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let rows = pool.install(|| (0..total).into_par_iter().map(point).collect());
    Ok(SweepTable {
        axes: spec.axes.clone(),
        rows,
    })
}

#[derive(Clone, Copy)]
struct Coordinates {
    flux: f64,
    gamma: f64,
    k: f64,
}

impl Coordinates {
    fn base(spec: &SweepSpec) -> Self {
        let (flux, gamma) = match &spec.model {
            SweepModel::Rhombic(cfg) => (cfg.params.flux, cfg.params.gamma),
            SweepModel::Center(_) => (f64::NAN, f64::NAN),
        };
        Self { flux, gamma, k: spec.k }
    }

    fn set(&mut self, axis: Axis, v: f64) {
        match axis {
            Axis::Flux => self.flux = v,
            Axis::Gamma => self.gamma = v,
            Axis::K => self.k = v,
        }
    }
}

fn evaluate(model: &SweepModel, at: Coordinates) -> SweepRow {
    let (phi, gamma) = match model {
        SweepModel::Rhombic(_) => (Some(at.flux), Some(at.gamma)),
        SweepModel::Center(_) => (None, None),
    };
    let result = WaveVector::new(at.k).and_then(|k| match model {
        SweepModel::Rhombic(cfg) => RhombicConfig {
            kind: cfg.kind,
            params: RingParameters::new(at.flux, at.gamma),
        }
        .coefficients(k),
        SweepModel::Center(c) => solver::coefficients(c, k),
    });
    let (p, flags) = match result {
        Ok(sc) => (sc.probabilities(), sc.evaluation.as_str().to_string()),
        Err(e) => {
            let flag = match e {
                Error::SpectralSingularity { .. } => "singular",
                Error::DegeneratePoint { .. } => "degenerate",
                _ => "error",
            };
            let inf = f64::INFINITY;
            (
                Probabilities {
                    r_left: inf,
                    r_right: inf,
                    t_left: inf,
                    t_right: inf,
                },
                flag.to_string(),
            )
        }
    };
    SweepRow {
        phi,
        gamma,
        k: at.k,
        r_left: p.r_left,
        r_right: p.r_right,
        t_left: p.t_left,
        t_right: p.t_right,
        flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rhombic::{build_axial, RhombicKind};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn rows_close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(1.0)
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(1.0, 12), "1");
        assert_eq!(format_sig(PI, 12), "3.14159265359");
        assert_eq!(format_sig(-0.4375, 12), "-0.4375");
        assert_eq!(format_sig(1.875e-20, 12), "1.875e-20");
        assert_eq!(format_sig(123456789012345.0, 12), "1.23456789012e+14");
        assert_eq!(format_sig(1e-3, 12), "0.001");
        assert_eq!(format_sig(f64::INFINITY, 12), "inf");
    }

    #[test]
    fn linspace_hits_both_ends() {
        let v = linspace(1e-3, PI - 1e-3, 101);
        assert_eq!(v.len(), 101);
        assert_eq!(v[100], PI - 1e-3);
        assert!((v[50] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn axial_grid_is_reflection_reciprocal() {
        let spec = SweepSpec::flux_k(RhombicConfig::new(RhombicKind::Axial, 0.0, 0.5), 41, 37);
        let t = sweep_with_threads(&spec, 2).unwrap();
        assert_eq!(t.len(), 41 * 37);
        for r in t.rows.iter().filter(|r| !r.is_singular()) {
            assert!(rows_close(r.r_left, r.r_right));
            assert!(r.r_left >= 0.0 && r.t_left >= 0.0);
        }
        // |t_L|^2 at Phi equals |t_R|^2 at 2pi - Phi
        for i in 0..41 {
            for j in 0..37 {
                let (a, b) = (t.at(i, j), t.at(40 - i, j));
                if !a.is_singular() && !b.is_singular() {
                    assert!(rows_close(a.t_left, b.t_right), "{i} {j}");
                }
            }
        }
    }

    #[test]
    fn reflection_grid_is_transmission_reciprocal() {
        let spec = SweepSpec::flux_k(RhombicConfig::new(RhombicKind::Reflection, 0.0, 0.5), 21, 21);
        let t = sweep_with_threads(&spec, 0).unwrap();
        assert!(t.rows.iter().all(|r| r.t_left == r.t_right));
    }

    #[test]
    fn hermitian_rows_are_unitary() {
        for kind in [RhombicKind::Axial, RhombicKind::Reflection] {
            let spec = SweepSpec::flux_k(RhombicConfig::new(kind, 0.0, 0.0), 21, 21);
            for r in sweep_with_threads(&spec, 1).unwrap().rows {
                assert!((r.r_left + r.t_left - 1.0).abs() < 1e-12, "{kind:?} {r:?}");
                assert!((r.r_right + r.t_right - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_rows_are_flagged() {
        let spec = SweepSpec {
            model: SweepModel::Rhombic(RhombicConfig::new(RhombicKind::Axial, PI, 0.0)),
            axes: vec![AxisRange::new(Axis::Gamma, -2.0, 2.0, 5)],
            k: FRAC_PI_2,
        };
        let t = sweep_with_threads(&spec, 1).unwrap();
        let flags: Vec<&str> = t.rows.iter().map(|r| r.flags.as_str()).collect();
        assert_eq!(flags, ["singular", "ok", "ok", "ok", "singular"]);
        assert!(t.to_csv().lines().nth(1).unwrap().ends_with(",inf,inf,inf,inf,singular"));
        assert!(t.to_json().contains("\"rL2\": null"));
    }

    #[test]
    fn output_is_deterministic_across_thread_counts() {
        let spec = SweepSpec::flux_k(RhombicConfig::new(RhombicKind::Axial, 0.0, 0.5), 17, 13);
        let a = sweep_with_threads(&spec, 1).unwrap().to_csv();
        let b = sweep_with_threads(&spec, 4).unwrap().to_csv();
        assert_eq!(a, b);
        assert!(a.starts_with("phi,gamma,k,rL2,rR2,tL2,tR2,flags\n0,0.5,0.001,"));
    }

    #[test]
    fn centre_sweep_over_k() {
        let c = build_axial(RingParameters::new(PI, 0.5));
        let spec = SweepSpec {
            model: SweepModel::Center(c),
            axes: vec![AxisRange::default_k(11)],
            k: 0.0,
        };
        let t = sweep_with_threads(&spec, 1).unwrap();
        assert_eq!(t.len(), 11);
        assert!(t.rows[5].phi.is_none());
        assert!((t.rows[5].r_left - (17.0f64 / 15.0).powi(2)).abs() < 1e-12);
        assert!(t.to_csv().lines().nth(6).unwrap().starts_with(",,1.57079632679,"));

        let mut bad = spec.clone();
        bad.axes = vec![AxisRange::default_flux(3)];
        assert!(sweep_with_threads(&bad, 1).is_err());
    }

    #[test]
    fn rejects_short_axes() {
        let mut spec = SweepSpec::flux_k(RhombicConfig::new(RhombicKind::Axial, 0.0, 0.5), 1, 10);
        assert!(sweep_with_threads(&spec, 1).is_err());
        spec.axes = vec![AxisRange::default_k(3), AxisRange::default_k(3)];
        assert!(sweep_with_threads(&spec, 1).is_err());
    }
}
