use std::f64::consts::PI;

use num_complex::Complex64;

use super::{FeatureKind, FeatureLocus, FeaturePoint};
use crate::error::{Error, Result};
use crate::lattice::{RingParameters, WaveVector};
use crate::rhombic::{RhombicConfig, RhombicKind};
use crate::solver::{self, transfer_matrix};

/// A refined root is kept when the closed-form denominator is below this.
pub const SINGULARITY_ACCEPT: f64 = 1e-10;
/// Solver cross-check: `|m22| = 1/|t_R|` must be below this.
const M22_TOL: f64 = 1e-8;
const NEWTON_ITERS: usize = 80;
const DUPLICATE: f64 = 1e-7;

/// One scan dimension: a fixed value or a grid of seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanAxis {
    Fixed(f64),
    Range { start: f64, end: f64, count: usize },
}

impl ScanAxis {
    fn values(&self) -> Vec<f64> {
        match *self {
            Self::Fixed(v) => vec![v],
            Self::Range { start, end, count } => super::linspace(start, end, count.max(2)),
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            Self::Fixed(v) => (v, v),
            Self::Range { start, end, .. } => (start.min(end), start.max(end)),
        }
    }

    fn is_free(&self) -> bool {
        matches!(self, Self::Range { .. })
    }
}

/// Spectral singularities of the axial ring. The reflection ring has none,
/// which is reported as [`Error::EmptyByTheorem`] without scanning.
pub fn find_spectral_singularities(
    kind: RhombicKind,
    flux: ScanAxis,
    gamma: ScanAxis,
    k: ScanAxis,
) -> Result<FeatureLocus> {
    match kind {
        RhombicKind::Reflection => Err(Error::EmptyByTheorem),
        RhombicKind::Axial => scan_singularities(kind, flux, gamma, k),
    }
}

/// Numerical search for simultaneous zeros of the real and imaginary parts of
/// the closed-form denominator, for either ring.
///
/// Grid local minima of `|D|` seed a damped Newton iteration (Gauss-Newton
/// with one free axis). With three free axes each flux value is a separate
/// `(gamma, k)` slice. Survivors must reach `|D| < 1e-10` and give
/// `|m22| < 1e-8` through the generic solver; removable 0/0 points fail the
/// latter and are discarded.
pub fn scan_singularities(kind: RhombicKind, flux: ScanAxis, gamma: ScanAxis, k: ScanAxis) -> Result<FeatureLocus> {
    let axes = [flux, gamma, k];
    let free: Vec<usize> = (0..3).filter(|&i| axes[i].is_free()).collect();
    let mut locus = FeatureLocus::new(FeatureKind::SpectralSingularity);

    let slices: Vec<[ScanAxis; 3]> = if free.len() == 3 {
        flux.values()
            .into_iter()
            .map(|f| [ScanAxis::Fixed(f), gamma, k])
            .collect()
    } else {
        vec![axes]
    };

    for slice in slices {
        for point in scan_slice(kind, &slice, &axes)? {
            if locus.points.iter().all(|q| !same_point(q, &point)) {
                locus.points.push(point);
            }
        }
    }
    locus.points.sort_by(|a, b| {
        a.flux
            .total_cmp(&b.flux)
            .then(a.gamma.total_cmp(&b.gamma))
            .then(a.k.total_cmp(&b.k))
    });
    Ok(locus)
}

fn same_point(a: &FeaturePoint, b: &FeaturePoint) -> bool {
    (a.flux - b.flux).abs() < DUPLICATE && (a.gamma - b.gamma).abs() < DUPLICATE && (a.k - b.k).abs() < DUPLICATE
}

fn denominator(kind: RhombicKind, x: [f64; 3]) -> Complex64 {
    RhombicConfig::new(kind, x[0], x[1]).denominator(x[2])
}

fn scan_slice(kind: RhombicKind, slice: &[ScanAxis; 3], full: &[ScanAxis; 3]) -> Result<Vec<FeaturePoint>> {
    let free: Vec<usize> = (0..3).filter(|&i| slice[i].is_free()).collect();
    let base: [f64; 3] = [slice[0].values()[0], slice[1].values()[0], slice[2].values()[0]];
    let grids: Vec<Vec<f64>> = free.iter().map(|&i| slice[i].values()).collect();
    let embed = |vars: &[f64]| -> [f64; 3] {
        let mut x = base;
        for (j, &i) in free.iter().enumerate() {
            x[i] = vars[j];
        }
        x
    };

    let seeds: Vec<Vec<f64>> = match free.len() {
        0 => vec![vec![]],
        1 => {
            let g = &grids[0];
            let v: Vec<f64> = g.iter().map(|&a| denominator(kind, embed(&[a])).norm()).collect();
            (0..g.len())
                .filter(|&i| (i == 0 || v[i] <= v[i - 1]) && (i + 1 == g.len() || v[i] <= v[i + 1]))
                .map(|i| vec![g[i]])
                .collect()
        }
        2 => {
            let (ga, gb) = (&grids[0], &grids[1]);
            let v: Vec<Vec<f64>> = ga
                .iter()
                .map(|&a| gb.iter().map(|&b| denominator(kind, embed(&[a, b])).norm()).collect())
                .collect();
            let mut out = Vec::new();
            for i in 0..ga.len() {
                for j in 0..gb.len() {
                    let here = v[i][j];
                    let mut minimum = true;
                    for di in -1i64..=1 {
                        for dj in -1i64..=1 {
                            let (ii, jj) = (i as i64 + di, j as i64 + dj);
                            if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= ga.len() as i64 || jj >= gb.len() as i64 {
                                continue;
                            }
                            minimum &= here <= v[ii as usize][jj as usize];
                        }
                    }
                    if minimum {
                        out.push(vec![ga[i], gb[j]]);
                    }
                }
            }
            out
        }
        _ => unreachable!("three free axes are sliced by flux"),
    };

    let mut found = Vec::new();
    for seed in seeds {
        let vars = refine(|v: &[f64]| denominator(kind, embed(v)), seed);
        let x = embed(&vars);
        if denominator(kind, x).norm() >= SINGULARITY_ACCEPT || !within(full, x) {
            continue;
        }
        if !solver_confirms(kind, x) {
            continue;
        }
        let p = FeaturePoint {
            flux: x[0],
            gamma: x[1],
            k: x[2],
        };
        if found.iter().all(|q| !same_point(q, &p)) {
            found.push(p);
        }
    }
    Ok(found)
}

fn within(axes: &[ScanAxis; 3], x: [f64; 3]) -> bool {
    let slack = 1e-9;
    let in_axes = (0..3).all(|i| {
        let (lo, hi) = axes[i].bounds();
        x[i] >= lo - slack && x[i] <= hi + slack
    });
    in_axes && x[2] > 0.0 && x[2] < PI
}

fn solver_confirms(kind: RhombicKind, x: [f64; 3]) -> bool {
    let Ok(k) = WaveVector::new(x[2]) else {
        return false;
    };
    let centre = RhombicConfig {
        kind,
        params: RingParameters::new(x[0], x[1]),
    }
    .build();
    match solver::coefficients(&centre, k).and_then(|sc| transfer_matrix(&sc)) {
        Ok(m) => m.m22.norm() < M22_TOL,
        Err(_) => false,
    }
}

/// Damped Newton on `F: R^m -> C ~ R^2` (`m` = 1 or 2) with central-difference
/// Jacobians; Gauss-Newton when `m = 1`.
fn refine(f: impl Fn(&[f64]) -> Complex64, mut x: Vec<f64>) -> Vec<f64> {
    let m = x.len();
    if m == 0 {
        return x;
    }
    let mut fx = f(&x);
    for _ in 0..NEWTON_ITERS {
        if fx.norm() < 1e-15 {
            break;
        }
        let mut jac = Vec::with_capacity(m);
        for i in 0..m {
            let h = 1e-7 * x[i].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            jac.push((f(&xp) - f(&xm)) / (2.0 * h));
        }
        let step: Vec<f64> = if m == 1 {
            let j = jac[0];
            let jj = j.norm_sqr();
            if jj == 0.0 {
                break;
            }
            vec![-(j.re * fx.re + j.im * fx.im) / jj]
        } else {
            let (a, b, c, d) = (jac[0].re, jac[1].re, jac[0].im, jac[1].im);
            let det = a * d - b * c;
            if det.abs() < 1e-300 {
                break;
            }
            vec![-(d * fx.re - b * fx.im) / det, -(-c * fx.re + a * fx.im) / det]
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + t * si).collect();
            let ft = f(&trial);
            if ft.norm() < fx.norm() {
                x = trial;
                fx = ft;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn gammas(l: &FeatureLocus) -> Vec<f64> {
        l.points.iter().map(|p| p.gamma).collect()
    }

    #[test]
    fn gamma_roots_at_quarter_flux() {
        let l = find_spectral_singularities(
            RhombicKind::Axial,
            ScanAxis::Fixed(FRAC_PI_2),
            ScanAxis::Range { start: -3.0, end: 3.0, count: 61 },
            ScanAxis::Fixed(FRAC_PI_2),
        )
        .unwrap();
        let g = gammas(&l);
        assert_eq!(g.len(), 2);
        assert!((g[0] + 2f64.sqrt()).abs() < 1e-10 && (g[1] - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn gamma_roots_at_half_flux_quantum() {
        let l = find_spectral_singularities(
            RhombicKind::Axial,
            ScanAxis::Fixed(PI),
            ScanAxis::Range { start: -3.0, end: 3.0, count: 31 },
            ScanAxis::Fixed(PI / 3.0),
        )
        .unwrap();
        let g = gammas(&l);
        assert_eq!(g.len(), 2);
        assert!((g[0] + 3f64.sqrt()).abs() < 1e-10 && (g[1] - 3f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn curve_in_flux_and_k() {
        // gamma = 1: Im D = 4 cos^2(Phi/2) sin 2k, so either k = pi/2 with
        // sin(Phi/2) = 1/2, or Phi = pi with sin k = 1/2
        let l = scan_singularities(
            RhombicKind::Axial,
            ScanAxis::Range { start: 0.0, end: TAU, count: 41 },
            ScanAxis::Fixed(1.0),
            ScanAxis::Range { start: 0.01, end: PI - 0.01, count: 41 },
        )
        .unwrap();
        assert_eq!(l.points.len(), 4);
        for p in &l.points {
            let on_band_centre = ((0.5 * p.flux).sin() - 0.5).abs() < 1e-9 && (p.k - FRAC_PI_2).abs() < 1e-9;
            // a double root in Phi there, so only ~sqrt(eps) in the flux
            let on_half_quantum = (p.flux - PI).abs() < 1e-6 && (p.k.sin() - 0.5).abs() < 1e-9;
            assert!(on_band_centre || on_half_quantum, "{p:?}");
        }
    }

    #[test]
    fn reflection_ring_has_none() {
        let full = [
            ScanAxis::Range { start: 0.0, end: TAU, count: 21 },
            ScanAxis::Range { start: -3.0, end: 3.0, count: 21 },
            ScanAxis::Range { start: 1e-3, end: PI - 1e-3, count: 21 },
        ];
        assert!(matches!(
            find_spectral_singularities(RhombicKind::Reflection, full[0], full[1], full[2]),
            Err(Error::EmptyByTheorem)
        ));
        assert!(scan_singularities(RhombicKind::Reflection, full[0], full[1], full[2])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn removable_point_is_rejected() {
        // the Hermitian ring's denominator vanishes at (0, 0, pi/2) without a singularity
        let l = scan_singularities(
            RhombicKind::Axial,
            ScanAxis::Fixed(0.0),
            ScanAxis::Range { start: -0.5, end: 0.5, count: 11 },
            ScanAxis::Range { start: 1.0, end: 2.0, count: 11 },
        )
        .unwrap();
        assert!(l.is_empty(), "{:?}", l.points);
    }
}
