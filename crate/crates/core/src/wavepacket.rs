//! Time-domain check of the steady-state probabilities: a Gaussian packet on
//! a finite chain that embeds the centre, integrated with classical RK4.
//!
//! Lead sites run `-N..=-2` and `2..=N`; the attachment sites play `-1` and
//! `1`. The packet starts on the left lead moving right, and the norm left
//! beyond `-3 sigma` / `+3 sigma` at the horizon estimates `|r_L|^2` / `|t_L|^2`.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LeadModel, ScatteringCenter, WaveVector};
use crate::solver::{self, Evaluation, ScatteringCoefficients};

pub const MAX_DT: f64 = 0.02;
pub const MIN_SIGMA: f64 = 5.0;
/// Norm allowed within [`EDGE_SITES`] of either chain end.
pub const EDGE_NORM_LIMIT: f64 = 1e-6;
pub const EDGE_SITES: usize = 5;
pub const DEFAULT_TOLERANCE: f64 = 0.02;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec {
    pub k0: f64,
    pub sigma: f64,
    /// Launch centre, a negative lead coordinate.
    pub x0: f64,
    /// Lead sites per side.
    pub n: usize,
    /// Evolution horizon.
    pub horizon: f64,
    pub dt: f64,
    /// Spacing of norm-trace samples.
    pub trace_interval: f64,
}

impl WavepacketSpec {
    /// Launch at `-N/2` and stop when the packet centre has travelled `N`
    /// sites at the group velocity `2 sin k0`, so the scattered parts sit
    /// near `+-N/2`.
    pub fn new(k0: f64, sigma: f64, n: usize) -> Self {
        let x0 = -0.5 * n as f64;
        let v = 2.0 * k0.sin();
        Self {
            k0,
            sigma,
            x0,
            n,
            horizon: if v > 0.0 { 2.0 * x0.abs() / v } else { 0.0 },
            dt: MAX_DT,
            trace_interval: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        WaveVector::new(self.k0)?;
        let bad = |m: String| Err(Error::Invalid(m));
        if !(self.sigma >= MIN_SIGMA) {
            return bad(format!("sigma must be at least {MIN_SIGMA}, got {}", self.sigma));
        }
        if !((self.n as f64) >= 10.0 * self.sigma) {
            return bad(format!("N = {} must be at least 10 sigma = {}", self.n, 10.0 * self.sigma));
        }
        if !(self.x0 < 0.0 && self.x0.abs() > 3.0 * self.sigma) {
            return bad(format!("x0 = {} must lie left of -3 sigma", self.x0));
        }
        if !(self.x0 - 5.0 * self.sigma > -(self.n as f64)) {
            return bad(format!("packet at x0 = {} does not fit on the chain", self.x0));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return bad(format!("dt must be in (0, {MAX_DT}], got {}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.trace_interval > 0.0) {
            return bad("trace interval must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSample {
    pub t: f64,
    pub norm: f64,
    pub r_region: f64,
    pub t_region: f64,
    /// `2 sum Im(V_s) |psi_s|^2`, the instantaneous `d(norm)/dt`.
    pub gain_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketResult {
    pub spec: WavepacketSpec,
    pub r_est: f64,
    pub t_est: f64,
    pub trace: Vec<NormSample>,
}

impl WavepacketResult {
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,norm,R_region,T_region")?;
        for s in &self.trace {
            writeln!(
                w,
                "{},{},{},{}",
                crate::features::format_sig(s.t, 12),
                crate::features::format_sig(s.norm, 12),
                crate::features::format_sig(s.r_region, 12),
                crate::features::format_sig(s.t_region, 12)
            )?;
        }
        Ok(())
    }
}

/// Sparse chain Hamiltonian: diagonal plus neighbour lists.
struct Chain {
    diag: Vec<Complex64>,
    links: Vec<Vec<(usize, Complex64)>>,
    /// Lead coordinate of each site; `None` inside the centre.
    position: Vec<Option<i64>>,
}

impl Chain {
    fn build(c: &ScatteringCenter, n: usize) -> Result<Self> {
        c.ensure_valid()?;
        let lead = n - 1;
        let nc = c.len();
        let total = 2 * lead + nc;
        let mut diag = vec![ZERO; total];
        let mut links: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); total];
        let mut position = vec![None; total];
        let hop = Complex64::new(-LeadModel::HOPPING, 0.0);
        let connect = |links: &mut Vec<Vec<(usize, Complex64)>>, from: usize, to: usize, amp: Complex64| {
            // H[to][from] = amp, H[from][to] = amp*
            links[to].push((from, amp));
            links[from].push((to, amp.conj()));
        };

        // left lead: index i <-> j = -N + i
        for i in 0..lead {
            position[i] = Some(-(n as i64) + i as i64);
            if i + 1 < lead {
                connect(&mut links, i, i + 1, hop);
            }
        }
        let h = c.hamiltonian();
        for a in 0..nc {
            diag[lead + a] = h[(a, a)];
            for b in 0..a {
                if h[(a, b)] != ZERO {
                    connect(&mut links, lead + b, lead + a, h[(a, b)]);
                }
            }
        }
        let left = lead + c.index_of(&c.attach_left).expect("validated");
        let right = lead + c.index_of(&c.attach_right).expect("validated");
        let first_right = lead + nc;
        for i in 0..lead {
            position[first_right + i] = Some(2 + i as i64);
            if i + 1 < lead {
                connect(&mut links, first_right + i, first_right + i + 1, hop);
            }
        }
        connect(&mut links, lead - 1, left, hop);
        connect(&mut links, right, first_right, hop);
        Ok(Self { diag, links, position })
    }

    fn len(&self) -> usize {
        self.diag.len()
    }

    /// `out = -i H psi`.
    fn derivative(&self, psi: &[Complex64], out: &mut [Complex64]) {
        for (s, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag[s] * psi[s];
            for &(t, amp) in &self.links[s] {
                acc += amp * psi[t];
            }
            *o = Complex64::new(acc.im, -acc.re);
        }
    }
}

/// Propagate the packet to the horizon.
///
/// Fails with [`Error::Horizon`] as soon as more than `1e-6` of the norm sits
/// within five sites of a chain end.
pub fn evolve(c: &ScatteringCenter, spec: &WavepacketSpec) -> Result<WavepacketResult> {
    spec.validate()?;
    let chain = Chain::build(c, spec.n)?;
    let len = chain.len();

    let mut psi: Vec<Complex64> = chain
        .position
        .iter()
        .map(|p| match p {
            Some(j) if *j < 0 => {
                let x = *j as f64;
                let env = (-(x - spec.x0).powi(2) / (4.0 * spec.sigma * spec.sigma)).exp();
                Complex64::from_polar(env, spec.k0 * x)
            }
            _ => ZERO,
        })
        .collect();
    let norm0: f64 = psi.iter().map(|v| v.norm_sqr()).sum();
    let scale = 1.0 / norm0.sqrt();
    psi.iter_mut().for_each(|v| *v *= scale);

    let cut = 3.0 * spec.sigma;
    let sample = |psi: &[Complex64], t: f64| -> NormSample {
        let mut s = NormSample {
            t,
            norm: 0.0,
            r_region: 0.0,
            t_region: 0.0,
            gain_rate: 0.0,
        };
        for (i, v) in psi.iter().enumerate() {
            let w = v.norm_sqr();
            s.norm += w;
            s.gain_rate += 2.0 * chain.diag[i].im * w;
            match chain.position[i] {
                Some(j) if (j as f64) < -cut => s.r_region += w,
                Some(j) if (j as f64) > cut => s.t_region += w,
                _ => {}
            }
        }
        s
    };
    let edge_norm = |psi: &[Complex64]| -> f64 {
        let head: f64 = psi[..EDGE_SITES].iter().map(|v| v.norm_sqr()).sum();
        let tail: f64 = psi[len - EDGE_SITES..].iter().map(|v| v.norm_sqr()).sum();
        head.max(tail)
    };

    let steps = (spec.horizon / spec.dt).ceil() as usize;
    let dt = spec.horizon / steps as f64;
    let trace_every = ((spec.trace_interval / dt).round() as usize).max(1);

    let mut trace = vec![sample(&psi, 0.0)];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]);
    let mut tmp = vec![ZERO; len];
    for step in 1..=steps {
        chain.derivative(&psi, &mut k1);
        for i in 0..len {
            tmp[i] = psi[i] + 0.5 * dt * k1[i];
        }
        chain.derivative(&tmp, &mut k2);
        for i in 0..len {
            tmp[i] = psi[i] + 0.5 * dt * k2[i];
        }
        chain.derivative(&tmp, &mut k3);
        for i in 0..len {
            tmp[i] = psi[i] + dt * k3[i];
        }
        chain.derivative(&tmp, &mut k4);
        for i in 0..len {
            psi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = step as f64 * dt;
        let edge = edge_norm(&psi);
        if edge > EDGE_NORM_LIMIT {
            return Err(Error::Horizon { time: t, edge_norm: edge });
        }
        if step % trace_every == 0 || step == steps {
            trace.push(sample(&psi, t));
        }
    }
    let last = *trace.last().expect("trace has the initial sample");
    Ok(WavepacketResult {
        spec: *spec,
        r_est: last.r_region,
        t_est: last.t_region,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub pass: bool,
    pub r_error: f64,
    pub t_error: f64,
    /// Tolerance actually applied.
    pub tolerance: f64,
    pub widened: bool,
    pub note: String,
}

const BANDWIDTH_NOTE: &str = "packet averages |r(k)|^2, |t(k)|^2 over its k-spread 1/(2 sigma)";

/// Compare left-incidence estimates with steady-state coefficients. A
/// near-singular record widens the tolerance fivefold.
pub fn compare(oracle: &WavepacketResult, sc: &ScatteringCoefficients, tol: f64) -> Comparison {
    let widened = sc.evaluation == Evaluation::NearSingular;
    let tolerance = if widened { 5.0 * tol } else { tol };
    comparison(oracle, sc, tolerance, widened)
}

fn comparison(oracle: &WavepacketResult, sc: &ScatteringCoefficients, tolerance: f64, widened: bool) -> Comparison {
    let p = sc.probabilities();
    let r_error = (oracle.r_est - p.r_left).abs();
    let t_error = (oracle.t_est - p.t_left).abs();
    let mut note = BANDWIDTH_NOTE.to_string();
    if widened {
        note.push_str("; tolerance widened near a steep or singular point");
    }
    Comparison {
        pass: r_error <= tolerance && t_error <= tolerance,
        r_error,
        t_error,
        tolerance,
        widened,
        note,
    }
}

/// Largest change of `|r_L|^2` or `|t_L|^2` across `k0 +- 2/(2 sigma)`.
pub fn bandwidth_spread(c: &ScatteringCenter, k0: f64, sigma: f64) -> Result<f64> {
    let centre = solver::coefficients(c, WaveVector::new(k0)?)?.probabilities();
    let dk = 1.0 / sigma;
    let mut worst = 0.0f64;
    for k in [k0 - dk, k0 - 0.5 * dk, k0 + 0.5 * dk, k0 + dk] {
        let k = k.clamp(1e-6, PI - 1e-6);
        let p = match solver::coefficients(c, WaveVector::new(k)?) {
            Ok(sc) => sc.probabilities(),
            Err(_) => return Ok(f64::INFINITY),
        };
        worst = worst.max((p.r_left - centre.r_left).abs()).max((p.t_left - centre.t_left).abs());
    }
    Ok(worst)
}

/// [`compare`] against the generic solver at `k0`, widening the tolerance by
/// the coefficient spread over the packet bandwidth when that exceeds `tol`.
pub fn compare_center(oracle: &WavepacketResult, c: &ScatteringCenter, tol: f64) -> Result<Comparison> {
    let sc = solver::coefficients(c, WaveVector::new(oracle.spec.k0)?)?;
    let spread = bandwidth_spread(c, oracle.spec.k0, oracle.spec.sigma)?;
    let near_singular = sc.evaluation == Evaluation::NearSingular;
    let widened = spread > tol || near_singular;
    let mut tolerance = tol;
    if spread > tol {
        tolerance += spread;
    }
    if near_singular {
        tolerance *= 5.0;
    }
    Ok(comparison(oracle, &sc, tolerance, widened))
}
