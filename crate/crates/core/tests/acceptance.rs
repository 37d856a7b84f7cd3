//! Acceptance suite. Prints one PASS/FAIL line per check.
//!
//! `cargo test -p ptscatter --test acceptance -- --nocapture`

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptscatter::features::{
    find_reflection_zeros, find_spectral_singularities, parameter_samples, random_hermitian_center, scan_singularities,
    sweep_with_threads, ScanAxis, SweepSpec,
};
use ptscatter::solver::{self, residual, singular_state, SingularBranch};
use ptscatter::symmetry::{verify_axial_relations, verify_reflection_relations};
use ptscatter::wavepacket::{compare, evolve, WavepacketSpec};
use ptscatter::{apply_gauge, RhombicConfig, RhombicKind, RingParameters, ScatteringCoefficients, WaveVector};

const SEED: u64 = 20240611;
const SAMPLES: usize = 1000;
const EQUIVALENCE_TOL: f64 = 1e-10;
const EQUIVALENCE_TIME: Duration = Duration::from_secs(5);
const ZERO_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-10;
const POINT_TOL: f64 = 1e-3;
const RELATION_TOL: f64 = 1e-10;
const UNITARITY_TOL: f64 = 1e-12;
const SINGULAR_GAMMA_TOL: f64 = 1e-8;
const SINGULAR_RESIDUAL_TOL: f64 = 1e-8;
const GAUGE_TOL: f64 = 1e-12;
const WAVEPACKET_TOL: f64 = 0.02;
const WAVEPACKET_TIME: Duration = Duration::from_secs(60);
const SWEEP_TOL: f64 = 1e-9;

/// Checks stated with a value the model does not produce; kept red.
const KNOWN_RED: &[&str] = &["2 axial k=arccos(-1/4): |tL|^2 = 1.369 +- 0.001"];

#[derive(Default)]
struct Report {
    failed: Vec<String>,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(name.to_string());
        }
    }
}

fn ring(kind: RhombicKind, flux: f64, gamma: f64) -> RhombicConfig {
    RhombicConfig::new(kind, flux, gamma)
}

fn wk(k: f64) -> WaveVector {
    WaveVector::new(k).unwrap()
}

fn relations(kind: RhombicKind, sc: &ScatteringCoefficients) -> f64 {
    match kind {
        RhombicKind::Axial => verify_axial_relations(sc).max(),
        RhombicKind::Reflection => verify_reflection_relations(sc).max(),
    }
}

fn criterion_1_and_4(rep: &mut Report) {
    for kind in [RhombicKind::Axial, RhombicKind::Reflection] {
        let start = Instant::now();
        let samples = parameter_samples(kind, SEED, SAMPLES, 2.0);
        let mut diff = 0.0f64;
        let mut rel = 0.0f64;
        let mut recip = 0.0f64;
        for s in &samples {
            let cfg = RhombicConfig { kind, params: s.params() };
            let closed = cfg.coefficients(wk(s.k)).unwrap();
            let numeric = solver::coefficients(&cfg.build(), wk(s.k)).unwrap();
            diff = diff.max(closed.max_difference(&numeric));
            rel = rel.max(relations(kind, &numeric));
            let p = numeric.probabilities();
            recip = recip.max(match kind {
                RhombicKind::Axial => (p.r_left - p.r_right).abs(),
                RhombicKind::Reflection => (p.t_left - p.t_right).abs(),
            });
        }
        let elapsed = start.elapsed();
        let name = kind.as_str();
        rep.check(
            &format!("1 {name} closed form = solver"),
            diff < EQUIVALENCE_TOL && elapsed < EQUIVALENCE_TIME,
            format!("max diff {diff:.2e} over {SAMPLES} points in {elapsed:.2?}"),
        );
        rep.check(
            &format!("4 {name} PT relations"),
            rel < RELATION_TOL,
            format!("max residual {rel:.2e}"),
        );
        rep.check(
            &format!("4 {name} reciprocity"),
            recip < RELATION_TOL,
            format!("max |difference| {recip:.2e}"),
        );
    }
}

fn criterion_2(rep: &mut Report) {
    let cfg = ring(RhombicKind::Axial, FRAC_PI_2, 0.5);
    let p = cfg.coefficients(wk(0.25f64.acos())).unwrap().probabilities();
    rep.check(
        "2 axial k=arccos(1/4): |tL|^2 <= 1e-12",
        p.t_left <= ZERO_TOL,
        format!("|tL|^2 = {:.3e}", p.t_left),
    );
    rep.check(
        "2 axial k=arccos(1/4): |rL|^2 = |rR|^2 = 1",
        (p.r_left - 1.0).abs() <= UNIT_TOL && (p.r_right - 1.0).abs() <= UNIT_TOL,
        format!("|rL|^2 = {:.12}, |rR|^2 = {:.12}", p.r_left, p.r_right),
    );
    let p = cfg.coefficients(wk((-0.25f64).acos())).unwrap().probabilities();
    rep.check(
        KNOWN_RED[0],
        (p.t_left - 1.369).abs() <= POINT_TOL,
        format!("|tL|^2 = {:.6} (|tL| = {:.6})", p.t_left, p.t_left.sqrt()),
    );
    rep.check(
        "2 axial k=arccos(-1/4): |tL| = 1.369 +- 0.001",
        (p.t_left.sqrt() - 1.369).abs() <= POINT_TOL,
        format!("|tL| = {:.6}", p.t_left.sqrt()),
    );
    rep.check(
        "2 axial k=arccos(-1/4): |tR|^2 <= 1e-12",
        p.t_right <= ZERO_TOL,
        format!("|tR|^2 = {:.3e}", p.t_right),
    );
}

fn criterion_3(rep: &mut Report) {
    let params = RingParameters::new(0.0, 0.5);
    let [left, _] = find_reflection_zeros(params).unwrap();
    let k = left.ks().into_iter().find(|k| (k / PI - 0.27).abs() < 0.01).unwrap();
    let p = ring(RhombicKind::Reflection, 0.0, 0.5).coefficients(wk(k)).unwrap().probabilities();
    rep.check(
        "3 reflection Phi=0: |rL|^2 <= 1e-12",
        p.r_left <= ZERO_TOL,
        format!("k = {:.6} pi, |rL|^2 = {:.3e}", k / PI, p.r_left),
    );
    rep.check(
        "3 reflection Phi=0: |rR|^2 = 0.437 +- 0.001",
        (p.r_right - 0.437).abs() <= POINT_TOL,
        format!("|rR|^2 = {:.6}", p.r_right),
    );
    rep.check(
        "3 reflection Phi=0: |tL|^2 = |tR|^2 = 1",
        (p.t_left - 1.0).abs() <= UNIT_TOL && (p.t_right - 1.0).abs() <= UNIT_TOL,
        format!("|tL|^2 = {:.12}, |tR|^2 = {:.12}", p.t_left, p.t_right),
    );

    let params = RingParameters::new(FRAC_PI_2, 0.5);
    let cfg = ring(RhombicKind::Reflection, FRAC_PI_2, 0.5);
    let [left, right] = find_reflection_zeros(params).unwrap();
    let k = right.ks().into_iter().find(|k| (k / PI - 0.310).abs() < 0.01).unwrap();
    let p = cfg.coefficients(wk(k)).unwrap().probabilities();
    rep.check(
        "3 reflection Phi=pi/2: |rL|^2 = 0.634 +- 0.001",
        (p.r_left - 0.634).abs() <= POINT_TOL,
        format!("k = {:.6} pi, |rL|^2 = {:.6}", k / PI, p.r_left),
    );
    rep.check(
        "3 reflection Phi=pi/2: |rR|^2 <= 1e-12",
        p.r_right <= ZERO_TOL,
        format!("|rR|^2 = {:.3e}", p.r_right),
    );
    let k = left.ks().into_iter().find(|k| (k / PI - 0.072).abs() < 0.01).unwrap();
    let p = cfg.coefficients(wk(k)).unwrap().probabilities();
    rep.check(
        "3 reflection Phi=pi/2: 1.899 is |rR|^2",
        p.r_left <= ZERO_TOL && (p.r_right - 1.899).abs() <= POINT_TOL,
        format!(
            "k = {:.6} pi, |rL|^2 = {:.3e}, |rR|^2 = {:.6}, |rR| = {:.6}",
            k / PI,
            p.r_left,
            p.r_right,
            p.r_right.sqrt()
        ),
    );
}

fn criterion_5(rep: &mut Report) {
    let unitarity = |sc: &ScatteringCoefficients| {
        let p = sc.probabilities();
        let cross = (sc.r_left.conj() * sc.t_right + sc.t_left.conj() * sc.r_right).norm();
        (p.r_left + p.t_left - 1.0).abs().max((p.r_right + p.t_right - 1.0).abs()).max(cross)
    };
    let mut worst = 0.0f64;
    for kind in [RhombicKind::Axial, RhombicKind::Reflection] {
        for s in parameter_samples(kind, SEED + 5, 250, 0.0) {
            let cfg = RhombicConfig { kind, params: s.params() };
            worst = worst.max(unitarity(&solver::coefficients(&cfg.build(), wk(s.k)).unwrap()));
            worst = worst.max(unitarity(&cfg.coefficients(wk(s.k)).unwrap()));
        }
    }
    rep.check(
        "5 unitarity gamma=0, 500 ring samples",
        worst <= UNITARITY_TOL,
        format!("max deviation {worst:.2e}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut worst = 0.0f64;
    let mut evaluated = 0;
    for _ in 0..100 {
        let n = rng.gen_range(4..=8);
        let c = random_hermitian_center(&mut rng, n);
        let k = rng.gen_range(0.05..PI - 0.05);
        let sc = solver::coefficients(&c, wk(k)).unwrap();
        worst = worst.max(unitarity(&sc));
        evaluated += 1;
    }
    rep.check(
        "5 unitarity, 100 random 4-8 site centres",
        worst <= UNITARITY_TOL && evaluated == 100,
        format!("max deviation {worst:.2e}"),
    );
}

fn criterion_6(rep: &mut Report) {
    let locus = find_spectral_singularities(
        RhombicKind::Axial,
        ScanAxis::Fixed(FRAC_PI_2),
        ScanAxis::Range {
            start: -3.0,
            end: 3.0,
            count: 51,
        },
        ScanAxis::Fixed(FRAC_PI_2),
    )
    .unwrap();
    let mut gammas: Vec<f64> = locus.points.iter().map(|p| p.gamma).collect();
    gammas.sort_by(f64::total_cmp);
    let s2 = 2f64.sqrt();
    let ok = gammas.len() == 2
        && (gammas[0] + s2).abs() <= SINGULAR_GAMMA_TOL
        && (gammas[1] - s2).abs() <= SINGULAR_GAMMA_TOL;
    rep.check("6 axial (pi/2, k=pi/2): gamma = +-sqrt 2", ok, format!("gamma = {gammas:?}"));

    let c = ring(RhombicKind::Axial, FRAC_PI_2, s2).build();
    let mut worst = 0.0f64;
    for branch in [SingularBranch::Emission, SingularBranch::Absorption] {
        let st = singular_state(&c, wk(FRAC_PI_2), branch).unwrap();
        worst = worst.max(residual(&c, wk(FRAC_PI_2), &st.state));
    }
    rep.check(
        "6 emission/absorption Schrodinger residual",
        worst < SINGULAR_RESIDUAL_TOL,
        format!("max residual {worst:.2e}"),
    );

    let start = Instant::now();
    let range = |start: f64, end: f64| ScanAxis::Range { start, end, count: 51 };
    let found = scan_singularities(RhombicKind::Reflection, range(0.0, TAU), range(-3.0, 3.0), range(1e-3, PI - 1e-3))
        .unwrap();
    rep.check(
        "6 reflection 51^3 scan: no singularities",
        found.is_empty(),
        format!("{} found in {:.2?}", found.points.len(), start.elapsed()),
    );
    let control = scan_singularities(RhombicKind::Axial, range(0.0, TAU), range(-3.0, 3.0), range(1e-3, PI - 1e-3))
        .unwrap();
    rep.check(
        "6 axial 51^3 scan control: singularities found",
        !control.is_empty(),
        format!("{} found", control.points.len()),
    );
}

fn criterion_7(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    for kind in [RhombicKind::Axial, RhombicKind::Reflection] {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let cfg = ring(kind, rng.gen_range(0.0..TAU), rng.gen_range(-2.0..2.0));
            let k = rng.gen_range(0.05..PI - 0.05);
            if ptscatter::features::is_flagged_neighbourhood(kind, cfg.params, k) {
                continue;
            }
            let base = cfg.build();
            let phases: BTreeMap<String, f64> = ["A", "B"]
                .iter()
                .map(|s| (s.to_string(), rng.gen_range(-PI..PI)))
                .collect();
            let gauged = apply_gauge(&base, &phases).unwrap();
            let a = solver::coefficients(&base, wk(k)).unwrap();
            let b = solver::coefficients(&gauged, wk(k)).unwrap();
            worst = worst.max(a.max_difference(&b));
        }
        rep.check(
            &format!("7 {} gauge invariance", kind.as_str()),
            worst <= GAUGE_TOL,
            format!("max change {worst:.2e}"),
        );
    }
}

fn criterion_8(rep: &mut Report) {
    let reflection_zero = find_reflection_zeros(RingParameters::new(0.0, 0.5)).unwrap()[0]
        .ks()
        .into_iter()
        .find(|k| (k / PI - 0.27).abs() < 0.01)
        .unwrap();
    let benchmarks = [
        ("transmission zero", ring(RhombicKind::Axial, FRAC_PI_2, 0.5), 0.25f64.acos()),
        ("reflection zero", ring(RhombicKind::Reflection, 0.0, 0.5), reflection_zero),
        ("axial", ring(RhombicKind::Axial, FRAC_PI_2, 0.5), 1.2),
        ("axial", ring(RhombicKind::Axial, PI, 0.3), 2.0),
        ("reflection", ring(RhombicKind::Reflection, FRAC_PI_2, 0.5), 1.0),
    ];
    let start = Instant::now();
    let mut all = true;
    for (label, cfg, k) in benchmarks {
        let spec = WavepacketSpec::new(k, 15.0, 400);
        let oracle = evolve(&cfg.build(), &spec).unwrap();
        let sc = cfg.coefficients(wk(k)).unwrap();
        let cmp = compare(&oracle, &sc, WAVEPACKET_TOL);
        let pass = cmp.r_error <= WAVEPACKET_TOL && cmp.t_error <= WAVEPACKET_TOL;
        all &= pass;
        rep.check(
            &format!(
                "8 wavepacket {label} ({}, Phi={:.4}, gamma={}, k={:.4})",
                cfg.kind.as_str(),
                cfg.params.flux,
                cfg.params.gamma,
                k
            ),
            pass,
            format!("R error {:.2e}, T error {:.2e}", cmp.r_error, cmp.t_error),
        );
    }
    let elapsed = start.elapsed();
    rep.check(
        "8 wavepacket total runtime < 60 s",
        all && elapsed < WAVEPACKET_TIME,
        format!("{elapsed:.2?}"),
    );
}

fn criterion_9(rep: &mut Report) {
    for kind in [RhombicKind::Axial, RhombicKind::Reflection] {
        let table = sweep_with_threads(&SweepSpec::flux_k(ring(kind, 0.0, 0.5), 101, 101), 0).unwrap();
        let mut worst = 0.0f64;
        let mut flags = Vec::new();
        for i in [0, 100] {
            let row = table.at(i, 50);
            assert!((row.k - FRAC_PI_2).abs() < 1e-12);
            let p = row.probabilities();
            let (one, zero) = match kind {
                RhombicKind::Axial => ([p.r_left, p.r_right], [p.t_left, p.t_right]),
                RhombicKind::Reflection => ([p.t_left, p.t_right], [p.r_left, p.r_right]),
            };
            for v in one {
                worst = worst.max((v - 1.0).abs());
            }
            for v in zero {
                worst = worst.max(v.abs());
            }
            flags.push(row.flags.clone());
        }
        let flags_ok = flags.iter().all(|f| f == "ok" || f == "limit-evaluated");
        let stmt = match kind {
            RhombicKind::Axial => "|r|^2 = 1, |t|^2 = 0",
            RhombicKind::Reflection => "|t|^2 = 1, |r|^2 = 0",
        };
        rep.check(
            &format!("9 {} sweep k=pi/2, Phi in {{0, 2pi}}: {stmt}", kind.as_str()),
            worst <= SWEEP_TOL && flags_ok,
            format!("max deviation {worst:.2e}, flags {flags:?}"),
        );
    }
}

#[test]
fn acceptance() {
    let mut rep = Report::default();
    criterion_1_and_4(&mut rep);
    criterion_2(&mut rep);
    criterion_3(&mut rep);
    criterion_5(&mut rep);
    criterion_6(&mut rep);
    criterion_7(&mut rep);
    criterion_8(&mut rep);
    criterion_9(&mut rep);
    let unexpected: Vec<&String> = rep.failed.iter().filter(|f| !KNOWN_RED.contains(&f.as_str())).collect();
    println!(
        "{} failing checks, {} of them known red: {:?}",
        rep.failed.len(),
        rep.failed.len() - unexpected.len(),
        KNOWN_RED
    );
    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:?}");
}

/// The stated `|t_L|^2 = 1.369` on its own. Run with `--ignored`; it fails.
#[test]
#[ignore = "stated value is |t_L|, the model gives |t_L|^2 = 1.875"]
fn axial_point_value_1_369() {
    let p = ring(RhombicKind::Axial, FRAC_PI_2, 0.5)
        .coefficients(wk((-0.25f64).acos()))
        .unwrap()
        .probabilities();
    assert!((p.t_left - 1.369).abs() <= POINT_TOL, "|tL|^2 = {}", p.t_left);
}
