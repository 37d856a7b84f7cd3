//! The four-site rhombic ring `-1, A, 1, B` threaded by flux `Phi`, in its
//! axial (gain/loss on the arms) and reflection (gain/loss on the attachment
//! sites) PT-symmetric configurations, with closed-form coefficients.
//!
//! Numerators and denominators are evaluated without cancellation by
//! splitting `sin^2 k = (cos^2 + sin^2)(Phi/2) sin^2 k` and using
//! `e^{2ik} + sin^2 k = cos k (cos k + 2i sin k)`. The removable 0/0 points
//! at `k = pi/2, Phi = 2n pi` reduce exactly once `cos k` is divided out.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Hopping, ParityMap, RingParameters, ScatteringCenter, WaveVector};
use crate::solver::{Evaluation, ScatteringCoefficients};

/// Closed-form denominators below this magnitude are spectral singularities.
pub const SINGULARITY_TOL: f64 = 1e-10;
/// `|cos k|` below this marks the removable point `k = pi/2`.
pub const REMOVABLE_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RhombicKind {
    /// Loss `-i gamma` on A, gain `+i gamma` on B.
    Axial,
    /// Gain `+i gamma` on -1, loss `-i gamma` on 1.
    Reflection,
}

impl RhombicKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Axial => "axial",
            Self::Reflection => "reflection",
        }
    }

    /// Parity of the PT symmetry: A<->B for axial, -1<->1 for reflection.
    pub fn canonical_parity(self) -> ParityMap {
        match self {
            Self::Axial => ParityMap::from_swaps(&[("A", "B")]),
            Self::Reflection => ParityMap::from_swaps(&[("-1", "1")]),
        }
    }
}

impl std::str::FromStr for RhombicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "axial" => Ok(Self::Axial),
            "reflection" => Ok(Self::Reflection),
            other => Err(Error::Invalid(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhombicConfig {
    pub kind: RhombicKind,
    pub params: RingParameters,
}

impl RhombicConfig {
    pub fn new(kind: RhombicKind, flux: f64, gamma: f64) -> Self {
        Self {
            kind,
            params: RingParameters::new(flux, gamma),
        }
    }

    pub fn build(&self) -> ScatteringCenter {
        match self.kind {
            RhombicKind::Axial => build_axial(self.params),
            RhombicKind::Reflection => build_reflection(self.params),
        }
    }

    pub fn coefficients(&self, k: WaveVector) -> Result<ScatteringCoefficients> {
        match self.kind {
            RhombicKind::Axial => axial_coefficients(self.params, k),
            RhombicKind::Reflection => reflection_coefficients(self.params, k),
        }
    }

    /// Closed-form denominator at a real (unchecked) wave vector.
    pub fn denominator(&self, k: f64) -> Complex64 {
        match self.kind {
            RhombicKind::Axial => axial_denominator(self.params, k),
            RhombicKind::Reflection => reflection_denominator(self.params, k),
        }
    }
}

fn ring(p: RingParameters, onsite: [Complex64; 4]) -> ScatteringCenter {
    let amp = -Complex64::from_polar(1.0, p.link_phase());
    ScatteringCenter {
        sites: ["-1", "A", "1", "B"].map(String::from).to_vec(),
        onsite: onsite.to_vec(),
        hoppings: vec![
            Hopping::new("-1", "A", amp),
            Hopping::new("A", "1", amp),
            Hopping::new("1", "B", amp),
            Hopping::new("B", "-1", amp),
        ],
        attach_left: "-1".into(),
        attach_right: "1".into(),
    }
}

/// Ring with hoppings `-e^{i Phi/4}` along `-1 -> A -> 1 -> B -> -1`, loss on A
/// and gain on B.
pub fn build_axial(p: RingParameters) -> ScatteringCenter {
    let g = Complex64::new(0.0, p.gamma);
    let z = Complex64::new(0.0, 0.0);
    ring(p, [z, -g, z, g])
}

/// Same ring with gain on the left attachment and loss on the right one.
pub fn build_reflection(p: RingParameters) -> ScatteringCenter {
    let g = Complex64::new(0.0, p.gamma);
    let z = Complex64::new(0.0, 0.0);
    ring(p, [g, z, -g, z])
}

/// `4 e^{2ik} cos^2(Phi/2) + 4 sin^2 k - gamma^2`.
pub fn axial_denominator(p: RingParameters, k: f64) -> Complex64 {
    let (s, c) = p.half_flux_trig();
    let (sk, ck) = k.sin_cos();
    4.0 * c * c * ck * Complex64::new(ck, 2.0 * sk) + 4.0 * s * s * sk * sk - p.gamma * p.gamma
}

/// `sin^2 k - e^{2ik} [gamma^2 cos^2 k - cos^2(Phi/2)]`.
pub fn reflection_denominator(p: RingParameters, k: f64) -> Complex64 {
    let (s, c) = p.half_flux_trig();
    let (sk, ck) = k.sin_cos();
    let e2 = Complex64::from_polar(1.0, 2.0 * k);
    c * c * ck * Complex64::new(ck, 2.0 * sk) + s * s * sk * sk - e2 * (p.gamma * p.gamma * ck * ck)
}

/// Real factors `2 cos k cos(Phi/2) -+ gamma sin(Phi/2)` whose zeros are the
/// zeros of `t_L` and `t_R` (besides the `sin k` factor).
pub fn axial_transmission_factors(p: RingParameters, k: f64) -> (f64, f64) {
    let (s, c) = p.half_flux_trig();
    let a = 2.0 * k.cos() * c;
    let b = p.gamma * s;
    (a - b, a + b)
}

/// Real numerators `(gamma^2 +- 2 gamma sin k - 1) cos^2 k + sin^2(Phi/2)` of
/// `r_L` and `r_R`.
pub fn reflection_numerators(p: RingParameters, k: f64) -> (f64, f64) {
    let (s, c) = p.half_flux_trig();
    let (sk, ck) = k.sin_cos();
    let g = p.gamma;
    let common = s * s * sk * sk - c * c * ck * ck;
    (
        (g * g + 2.0 * g * sk) * ck * ck + common,
        (g * g - 2.0 * g * sk) * ck * ck + common,
    )
}

/// Closed-form coefficients of the axial ring; `r_L = r_R`.
///
/// At `gamma = 0`, `Phi = 2n pi` the expressions share a factor `cos k`,
/// which is divided out (limit `r = 0`, `t = +-1` at `k = pi/2`).
pub fn axial_coefficients(p: RingParameters, k: WaveVector) -> Result<ScatteringCoefficients> {
    let kv = k.value();
    let (s, c) = p.half_flux_trig();
    let (sk, ck) = kv.sin_cos();
    let g = p.gamma;

    if s == 0.0 && g == 0.0 {
        let d = Complex64::new(ck, 2.0 * sk);
        let r = -ck / d;
        let t = 2.0 * I * sk * c / d;
        let evaluation = if ck.abs() < REMOVABLE_TOL {
            Evaluation::LimitEvaluated
        } else {
            Evaluation::Ok
        };
        return Ok(ScatteringCoefficients {
            r_left: r,
            t_left: t,
            r_right: r,
            t_right: t,
            k,
            evaluation,
        });
    }

    let d = axial_denominator(p, kv);
    if d.norm() < SINGULARITY_TOL {
        return Err(Error::SpectralSingularity {
            flux: p.flux,
            gamma: g,
            k: kv,
        });
    }
    let r = Complex64::new(g * g + 4.0 * (s * s * sk * sk - c * c * ck * ck), 0.0) / d;
    let (fl, fr) = axial_transmission_factors(p, kv);
    Ok(ScatteringCoefficients {
        r_left: r,
        t_left: 4.0 * I * sk * fl / d,
        r_right: r,
        t_right: 4.0 * I * sk * fr / d,
        k,
        evaluation: Evaluation::Ok,
    })
}

/// Closed-form coefficients of the reflection ring; `t_L = t_R`.
///
/// At `Phi = 2n pi` the common `cos k` factor is divided out, giving the
/// transparent limit `r = 0`, `t = +-1` at `k = pi/2`. For any other flux
/// `k = pi/2` is fully reflecting, so the point is discontinuous in `Phi`.
pub fn reflection_coefficients(p: RingParameters, k: WaveVector) -> Result<ScatteringCoefficients> {
    let kv = k.value();
    let (s, c) = p.half_flux_trig();
    let (sk, ck) = kv.sin_cos();
    let g = p.gamma;

    if s == 0.0 {
        let e2 = Complex64::from_polar(1.0, 2.0 * kv);
        let d = Complex64::new(ck, 2.0 * sk) - e2 * (g * g * ck);
        let base = g * g - 1.0;
        let t = 2.0 * I * sk * c / d;
        let evaluation = if ck.abs() < REMOVABLE_TOL {
            Evaluation::LimitEvaluated
        } else {
            Evaluation::Ok
        };
        return Ok(ScatteringCoefficients {
            r_left: (base + 2.0 * g * sk) * ck / d,
            t_left: t,
            r_right: (base - 2.0 * g * sk) * ck / d,
            t_right: t,
            k,
            evaluation,
        });
    }

    let d = reflection_denominator(p, kv);
    let evaluation = if d.norm() < SINGULARITY_TOL {
        Evaluation::NearSingular
    } else {
        Evaluation::Ok
    };
    let (nl, nr) = reflection_numerators(p, kv);
    let t = 2.0 * I * sk * ck * c / d;
    Ok(ScatteringCoefficients {
        r_left: nl / d,
        t_left: t,
        r_right: nr / d,
        t_right: t,
        k,
        evaluation,
    })
}
