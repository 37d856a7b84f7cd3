//! Generic PT-symmetric centres built from `P H* P = H` directly.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptscatter::solver::{self, Evaluation};
use ptscatter::symmetry::{classify_pt, find_parity_maps, verify_axial_relations, verify_reflection_relations, PtKind};
use ptscatter::{validate_center, Hopping, ParityMap, ScatteringCenter, WaveVector};

const SITES: [&str; 6] = ["L", "R", "a", "b", "c", "d"];

fn parity(axial: bool) -> Vec<usize> {
    if axial {
        vec![0, 1, 3, 2, 5, 4]
    } else {
        vec![1, 0, 3, 2, 4, 5]
    }
}

fn random_pt_centre(rng: &mut ChaCha8Rng, axial: bool) -> (ScatteringCenter, ParityMap) {
    let p = parity(axial);
    let mut onsite = vec![Complex64::new(0.0, 0.0); SITES.len()];
    for i in 0..SITES.len() {
        if p[i] == i {
            onsite[i] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        } else if i < p[i] {
            onsite[i] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            onsite[p[i]] = onsite[i].conj();
        }
    }
    let mut edges: Vec<(usize, usize)> = vec![(0, 2), (2, 1), (0, 4), (4, 1)];
    for i in 0..SITES.len() {
        for j in i + 1..SITES.len() {
            if rng.gen_bool(0.3) {
                edges.push((i, j));
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut hoppings = Vec::new();
    for (i, j) in edges {
        let key = (i.min(j), i.max(j));
        if seen.contains(&key) {
            continue;
        }
        let (pi, pj) = (p[i], p[j]);
        let image = (pi.min(pj), pi.max(pj));
        let mut amp = Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..2.0 * PI));
        if pi == i && pj == j {
            amp = Complex64::new(amp.norm(), 0.0);
        }
        hoppings.push(Hopping::new(SITES[i], SITES[j], amp));
        seen.insert(key);
        if !seen.contains(&image) {
            hoppings.push(Hopping::new(SITES[pi], SITES[pj], amp.conj()));
            seen.insert(image);
        }
    }
    let c = ScatteringCenter {
        sites: SITES.map(String::from).to_vec(),
        onsite,
        hoppings,
        attach_left: "L".into(),
        attach_right: "R".into(),
    };
    let map = ParityMap::from_images(
        p.iter()
            .enumerate()
            .map(|(i, &j)| (SITES[i].to_string(), SITES[j].to_string()))
            .collect(),
    );
    (c, map)
}

#[test]
fn random_pt_centres_obey_their_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for axial in [true, false] {
        let mut checked = 0;
        for _ in 0..40 {
            let (c, p) = random_pt_centre(&mut rng, axial);
            assert!(validate_center(&c).is_empty());
            let class = classify_pt(&c, &p).unwrap();
            let expected = if axial { PtKind::AxialPT } else { PtKind::ReflectionPT };
            assert_eq!(class.kind, expected);
            assert!(find_parity_maps(&c).unwrap().iter().any(|(m, _)| *m == p));
            for _ in 0..10 {
                let k = WaveVector::new(rng.gen_range(0.05..PI - 0.05)).unwrap();
                let Ok(sc) = solver::coefficients(&c, k) else {
                    continue;
                };
                if sc.evaluation == Evaluation::NearSingular {
                    continue;
                }
                let rel = if axial {
                    verify_axial_relations(&sc)
                } else {
                    verify_reflection_relations(&sc)
                };
                let scale = sc.amplitudes().iter().map(|z| z.norm_sqr()).fold(1.0, f64::max);
                assert!(rel.max() < 1e-9 * scale, "{:?} at k={}", rel, k.value());
                let pr = sc.probabilities();
                if axial {
                    assert!((pr.r_left - pr.r_right).abs() < 1e-9 * scale);
                } else {
                    assert!((pr.t_left - pr.t_right).abs() < 1e-9 * scale);
                }
                checked += 1;
            }
        }
        assert!(checked > 300);
    }
}

#[test]
fn breaking_the_symmetry_breaks_the_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut c, p) = random_pt_centre(&mut rng, true);
    c.onsite[2] += Complex64::new(0.0, 0.3);
    assert_ne!(classify_pt(&c, &p).unwrap().kind, PtKind::AxialPT);
    let worst = (1..30)
        .filter_map(|i| solver::coefficients(&c, WaveVector::new(i as f64 * 0.1).unwrap()).ok())
        .map(|sc| verify_axial_relations(&sc).max())
        .fold(0.0, f64::max);
    assert!(worst > 1e-3);
}
