use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{Hopping, RingParameters, ScatteringCenter};
use crate::rhombic::{RhombicConfig, RhombicKind};

/// Normalised denominator below which a point counts as near a spectral
/// singularity or removable point.
const NEAR_SINGULAR: f64 = 1e-2;
const K_MARGIN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSample {
    pub flux: f64,
    pub gamma: f64,
    pub k: f64,
}

impl ParameterSample {
    pub fn params(&self) -> RingParameters {
        RingParameters::new(self.flux, self.gamma)
    }
}

/// True close to a pole or a 0/0 point of the closed forms, where the
/// solver's conditioning degrades.
pub fn is_flagged_neighbourhood(kind: RhombicKind, p: RingParameters, k: f64) -> bool {
    let scale = match kind {
        RhombicKind::Axial => 4.0 + p.gamma * p.gamma,
        RhombicKind::Reflection => 1.0 + p.gamma * p.gamma,
    };
    let d = RhombicConfig { kind, params: p }.denominator(k).norm() / scale;
    d < NEAR_SINGULAR || k < K_MARGIN || k > PI - K_MARGIN
}

/// `n` seeded points with `Phi in [0, 2pi)`, `gamma in [-gamma_max, gamma_max]`,
/// `k in (0, pi)`, skipping flagged neighbourhoods of `kind`.
pub fn parameter_samples(kind: RhombicKind, seed: u64, n: usize, gamma_max: f64) -> Vec<ParameterSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let s = ParameterSample {
            flux: rng.gen_range(0.0..TAU),
            gamma: if gamma_max > 0.0 {
                rng.gen_range(-gamma_max..=gamma_max)
            } else {
                0.0
            },
            k: rng.gen_range(0.0..PI),
        };
        if !is_flagged_neighbourhood(kind, s.params(), s.k) {
            out.push(s);
        }
    }
    out
}

/// Hermitian centre of `n` sites: a path from the left to the right
/// attachment plus random chords, unit-modulus hoppings with random phases
/// (so arbitrary loop fluxes) and real onsite energies in `[-1, 1]`.
pub fn random_hermitian_center(rng: &mut impl Rng, n: usize) -> ScatteringCenter {
    assert!(n >= 2, "a centre needs two attachment sites");
    let sites: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut hoppings = Vec::new();
    for i in 0..n - 1 {
        hoppings.push(Hopping::new(
            sites[i].clone(),
            sites[i + 1].clone(),
            Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)),
        ));
    }
    for i in 0..n {
        for j in i + 2..n {
            if rng.gen_bool(0.4) {
                hoppings.push(Hopping::new(
                    sites[i].clone(),
                    sites[j].clone(),
                    Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)),
                ));
            }
        }
    }
    let onsite = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
    let right = rng.gen_range(1..n);
    ScatteringCenter {
        attach_left: sites[0].clone(),
        attach_right: sites[right].clone(),
        onsite,
        hoppings,
        sites,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::validate_center;

    #[test]
    fn samples_are_seeded_and_unflagged() {
        let a = parameter_samples(RhombicKind::Axial, 7, 50, 2.0);
        let b = parameter_samples(RhombicKind::Axial, 7, 50, 2.0);
        assert_eq!(a, b);
        assert_ne!(a, parameter_samples(RhombicKind::Axial, 8, 50, 2.0));
        assert!(a.iter().all(|s| !is_flagged_neighbourhood(RhombicKind::Axial, s.params(), s.k)));
        assert!(parameter_samples(RhombicKind::Reflection, 1, 20, 0.0).iter().all(|s| s.gamma == 0.0));
    }

    #[test]
    fn flags_poles_and_removable_points() {
        assert!(is_flagged_neighbourhood(RhombicKind::Axial, RingParameters::new(PI, 2.0), PI / 2.0));
        assert!(is_flagged_neighbourhood(RhombicKind::Reflection, RingParameters::new(0.0, 0.5), PI / 2.0));
        assert!(!is_flagged_neighbourhood(RhombicKind::Reflection, RingParameters::new(1.0, 0.5), 1.0));
    }

    #[test]
    fn random_centres_are_valid_and_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 4..=8 {
            let c = random_hermitian_center(&mut rng, n);
            assert!(validate_center(&c).is_empty());
            let h = c.hamiltonian();
            assert!((h.adjoint() - &h).norm() < 1e-15);
            assert!(c.hoppings.iter().all(|h| (h.amplitude.norm() - 1.0).abs() < 1e-15));
        }
    }
}
