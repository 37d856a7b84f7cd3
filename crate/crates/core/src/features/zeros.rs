use std::f64::consts::{FRAC_PI_2, PI};

use super::{FeatureKind, FeatureLocus, FeaturePoint};
use crate::error::{Error, Result};
use crate::lattice::{RingParameters, ScatteringCenter, WaveVector};
use crate::rhombic::{axial_transmission_factors, build_axial, build_reflection, reflection_numerators};
use crate::solver::{self, ScatteringCoefficients, Side};

/// A reported zero must have probability below this through the solver.
pub const ZERO_PROBABILITY_TOL: f64 = 1e-16;
/// Generic minima are accepted below this `|t|^2`.
const GENERIC_MINIMUM_TOL: f64 = 1e-12;

const SCAN_INTERVALS: usize = 2048;
const EDGE: f64 = 1e-9;
const DUPLICATE: f64 = 1e-9;

fn scan_grid() -> Vec<f64> {
    super::linspace(EDGE, PI - EDGE, SCAN_INTERVALS + 1)
}

/// Bisect a bracketed sign change down to adjacent floats.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// Minimise a unimodal `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("three candidates")
}

fn push_unique(roots: &mut Vec<f64>, k: f64) {
    if roots.iter().all(|r| (r - k).abs() > DUPLICATE) {
        roots.push(k);
    }
}

/// Roots of a real function on `(0, pi)`: sign changes by bisection, exact
/// grid hits, and touching roots (grid minima of `|f|`) by golden section.
fn real_roots(f: impl Fn(f64) -> f64 + Copy, scale: f64) -> Vec<f64> {
    let grid = scan_grid();
    let vals: Vec<f64> = grid.iter().map(|&k| f(k)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() {
        if vals[i] == 0.0 {
            push_unique(&mut roots, grid[i]);
        }
        if i + 1 < grid.len() && vals[i] != 0.0 && vals[i + 1] != 0.0 && (vals[i] < 0.0) != (vals[i + 1] < 0.0) {
            push_unique(&mut roots, bisect(f, grid[i], grid[i + 1]));
        }
    }
    for i in 1..grid.len() - 1 {
        let (l, m, r) = (vals[i - 1].abs(), vals[i].abs(), vals[i + 1].abs());
        if m < l && m <= r && (vals[i - 1] < 0.0) == (vals[i + 1] < 0.0) && m != 0.0 {
            let (k, v) = golden_section_min(|x| f(x).abs(), grid[i - 1], grid[i + 1], 1e-15);
            if v <= 1e-14 * scale {
                push_unique(&mut roots, k);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn verified(c: &ScatteringCenter, k: f64) -> Result<ScatteringCoefficients> {
    solver::coefficients(c, WaveVector::new(k)?)
}

/// Wave vectors where the axial ring transmits in one direction only, from
/// the real factors `2 cos k cos(Phi/2) -+ gamma sin(Phi/2)`.
///
/// Returns the left and right loci. Each root is re-checked through the
/// generic solver (`|t|^2 < 1e-16`). If a factor vanishes identically
/// (`Phi` an odd multiple of `pi`, `gamma = 0`) the transmission is zero for
/// every k and a domain error is returned.
pub fn find_transmission_zeros(p: RingParameters) -> Result<[FeatureLocus; 2]> {
    let centre = build_axial(p);
    let mut out = [
        FeatureLocus::new(FeatureKind::TransmissionZeroL),
        FeatureLocus::new(FeatureKind::TransmissionZeroR),
    ];
    for (idx, locus) in out.iter_mut().enumerate() {
        let f = move |k: f64| {
            let (l, r) = axial_transmission_factors(p, k);
            if idx == 0 {
                l
            } else {
                r
            }
        };
        if scan_grid().iter().all(|&k| f(k) == 0.0) {
            return Err(Error::Domain(format!(
                "transmission vanishes identically at flux={}, gamma={}",
                p.flux, p.gamma
            )));
        }
        for k in real_roots(f, 2.0 + p.gamma.abs()) {
            let sc = verified(&centre, k)?;
            let t2 = if idx == 0 { sc.t_left } else { sc.t_right }.norm_sqr();
            if !(t2 < ZERO_PROBABILITY_TOL) {
                return Err(Error::Domain(format!("transmission zero at k={k} not confirmed: |t|^2={t2:e}")));
            }
            locus.points.push(FeaturePoint {
                flux: p.flux,
                gamma: p.gamma,
                k,
            });
        }
    }
    Ok(out)
}

/// Wave vectors where the reflection ring is reflectionless from one side,
/// from the real numerators `(gamma^2 +- 2 gamma sin k - 1) cos^2 k + sin^2(Phi/2)`.
///
/// At `Phi = 2n pi` the common factor `cos^2 k` is split off: `k = pi/2` is a
/// zero from both sides (a double root of the numerators) and is reported
/// together with the roots of the remaining factor. Each root is re-checked
/// through the solver (`|r|^2 < 1e-16`, `|t_L|^2 = |t_R|^2`).
pub fn find_reflection_zeros(p: RingParameters) -> Result<[FeatureLocus; 2]> {
    let centre = build_reflection(p);
    let (s, _) = p.half_flux_trig();
    let g = p.gamma;
    let mut out = [
        FeatureLocus::new(FeatureKind::ReflectionZeroL),
        FeatureLocus::new(FeatureKind::ReflectionZeroR),
    ];
    let scale = 1.0 + g * g + 2.0 * g.abs();
    for (idx, locus) in out.iter_mut().enumerate() {
        let sign = if idx == 0 { 1.0 } else { -1.0 };
        let mut ks = if s == 0.0 {
            let mut roots = real_roots(move |k: f64| g * g + sign * 2.0 * g * k.sin() - 1.0, scale);
            push_unique(&mut roots, FRAC_PI_2);
            roots.sort_by(f64::total_cmp);
            roots
        } else {
            real_roots(
                move |k: f64| {
                    let (l, r) = reflection_numerators(p, k);
                    if idx == 0 {
                        l
                    } else {
                        r
                    }
                },
                scale,
            )
        };
        ks.dedup();
        for k in ks {
            let sc = verified(&centre, k)?;
            let pr = sc.probabilities();
            let r2 = if idx == 0 { pr.r_left } else { pr.r_right };
            let t_gap = (pr.t_left - pr.t_right).abs();
            if !(r2 < ZERO_PROBABILITY_TOL && t_gap <= 1e-12 * pr.t_left.max(1.0)) {
                return Err(Error::Domain(format!(
                    "reflection zero at k={k} not confirmed: |r|^2={r2:e}"
                )));
            }
            locus.points.push(FeaturePoint {
                flux: p.flux,
                gamma: p.gamma,
                k,
            });
        }
    }
    Ok(out)
}

/// Generic transmission zeros of any centre: grid minima of `|t|` refined by
/// golden section, kept when `|t|^2 < 1e-12`. Points carry NaN flux/gamma.
pub fn find_transmission_minima(c: &ScatteringCenter, side: Side, samples: usize) -> Result<FeatureLocus> {
    c.ensure_valid()?;
    let t_abs = |k: f64| -> f64 {
        let Ok(k) = WaveVector::new(k) else {
            return f64::INFINITY;
        };
        match solver::coefficients(c, k) {
            Ok(sc) => match side {
                Side::Left => sc.t_left.norm(),
                Side::Right => sc.t_right.norm(),
            },
            Err(_) => f64::INFINITY,
        }
    };
    let grid = super::linspace(1e-6, PI - 1e-6, samples.max(3));
    let vals: Vec<f64> = grid.iter().map(|&k| t_abs(k)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() {
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = vals.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if vals[i] <= left && vals[i] <= right && vals[i].is_finite() {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(grid.len() - 1)];
            let (k, v) = golden_section_min(t_abs, lo, hi, 1e-14);
            if v * v < GENERIC_MINIMUM_TOL {
                push_unique(&mut roots, k);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    let kind = match side {
        Side::Left => FeatureKind::TransmissionZeroL,
        Side::Right => FeatureKind::TransmissionZeroR,
    };
    Ok(FeatureLocus {
        kind,
        points: roots
            .into_iter()
            .map(|k| FeaturePoint {
                flux: f64::NAN,
                gamma: f64::NAN,
                k,
            })
            .collect(),
    })
}
