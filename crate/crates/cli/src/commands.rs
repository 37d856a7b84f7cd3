use std::f64::consts::{PI, TAU};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use ptscatter::center_file::read_center;
use ptscatter::features::{
    find_reflection_zeros, find_spectral_singularities, find_transmission_minima, find_transmission_zeros,
    format_sig, linspace, parameter_samples, sweep as run_sweep, Axis, AxisRange, FeatureLocus, ScanAxis, SweepModel,
    SweepSpec,
};
use ptscatter::symmetry::{find_parity_maps, verify_axial_relations, verify_reflection_relations, PtKind, RelationResiduals};
use ptscatter::wavepacket::{compare, compare_center, evolve, WavepacketSpec};
use ptscatter::{
    solver, Error, Evaluation, RhombicConfig, RhombicKind, ScatteringCenter, ScatteringCoefficients, Side, WaveVector,
};

use crate::{
    Format, Model, ModelArgs, OutputArgs, SingularityArgs, SolveArgs, SweepArgs, VerifyArgs, WavepacketArgs, ZerosArgs,
    EXIT_SINGULAR, EXIT_USAGE, EXIT_VERIFY,
};

const GAMMA_RANGE: (f64, f64) = (-2.0, 2.0);
const SCAN_GAMMA_RANGE: (f64, f64) = (-3.0, 3.0);

#[derive(Debug)]
pub struct CmdError {
    pub code: u8,
    pub message: String,
}

impl CmdError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SpectralSingularity { .. } | Error::DegeneratePoint { .. } | Error::NotInvertible => EXIT_SINGULAR,
            Error::Horizon { .. } => EXIT_VERIFY,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

type CmdResult = Result<u8, CmdError>;

fn kind_of(m: Model) -> RhombicKind {
    match m {
        Model::Axial => RhombicKind::Axial,
        Model::Reflection => RhombicKind::Reflection,
    }
}

enum Target {
    Ring(RhombicConfig),
    Center(ScatteringCenter),
}

impl Target {
    fn from_args(a: &ModelArgs) -> Result<Self, CmdError> {
        let flux = flux_value(a.flux, a.flux_pi);
        match (&a.model, &a.center) {
            (Some(m), None) => Ok(Self::Ring(RhombicConfig::new(
                kind_of(*m),
                flux.unwrap_or(0.0),
                a.gamma.unwrap_or(0.0),
            ))),
            (None, Some(path)) => {
                if flux.is_some() || a.gamma.is_some() {
                    return Err(CmdError::usage("--flux and --gamma only apply to --model"));
                }
                let c = read_center(path)?;
                let d = c.validate();
                if !d.is_empty() {
                    return Err(Error::InvalidCenter(d).into());
                }
                Ok(Self::Center(c))
            }
            _ => Err(CmdError::usage("exactly one of --model and --center is required")),
        }
    }

    fn centre(&self) -> ScatteringCenter {
        match self {
            Self::Ring(cfg) => cfg.build(),
            Self::Center(c) => c.clone(),
        }
    }

    /// Relation family obeyed by the target, if it is PT-symmetric.
    fn relation_kind(&self) -> Result<Option<RhombicKind>, CmdError> {
        match self {
            Self::Ring(cfg) => Ok(Some(cfg.kind)),
            Self::Center(c) => {
                let maps = match find_parity_maps(c) {
                    Ok(m) => m,
                    Err(Error::SizeLimit { .. }) => return Ok(None),
                    Err(e) => return Err(e.into()),
                };
                Ok(maps.iter().find_map(|(_, class)| match class.kind {
                    PtKind::AxialPT => Some(RhombicKind::Axial),
                    PtKind::ReflectionPT => Some(RhombicKind::Reflection),
                    _ => None,
                }))
            }
        }
    }
}

fn flux_value(flux: Option<f64>, flux_pi: Option<f64>) -> Option<f64> {
    flux.or(flux_pi.map(|f| f * PI))
}

fn relations(kind: RhombicKind, sc: &ScatteringCoefficients) -> RelationResiduals {
    match kind {
        RhombicKind::Axial => verify_axial_relations(sc),
        RhombicKind::Reflection => verify_reflection_relations(sc),
    }
}

/// Ordered key/value record written as `quantity,value` CSV or a JSON object.
#[derive(Default)]
struct Record(Vec<(String, Value)>);

impl Record {
    fn num(&mut self, key: impl Into<String>, v: f64) {
        let value = serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null);
        self.0.push((key.into(), value));
    }

    fn int(&mut self, key: impl Into<String>, v: u64) {
        self.0.push((key.into(), Value::Number(v.into())));
    }

    fn text(&mut self, key: impl Into<String>, v: impl Into<String>) {
        self.0.push((key.into(), Value::String(v.into())));
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = String::from("quantity,value\n");
                for (k, v) in &self.0 {
                    let v = match v {
                        Value::Number(n) if n.is_f64() => n.as_f64().map(|x| format!("{x:?}")).unwrap_or_default(),
                        Value::Number(n) => n.to_string(),
                        Value::String(t) => t.clone(),
                        Value::Null => "nan".into(),
                        other => other.to_string(),
                    };
                    s.push_str(&format!("{k},{v}\n"));
                }
                s
            }
            Format::Json => {
                let map: Map<String, Value> = self.0.iter().cloned().collect();
                let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("record serializes");
                s.push('\n');
                s
            }
        }
    }
}

fn emit(out: &OutputArgs, text: &str) -> Result<(), CmdError> {
    match &out.output {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn push_coefficients(rec: &mut Record, sc: &ScatteringCoefficients) {
    for (name, z) in [
        ("rL", sc.r_left),
        ("rR", sc.r_right),
        ("tL", sc.t_left),
        ("tR", sc.t_right),
    ] {
        rec.num(format!("{name}_re"), z.re);
        rec.num(format!("{name}_im"), z.im);
        rec.num(format!("|{name}|^2"), z.norm_sqr());
    }
}

fn push_target(rec: &mut Record, target: &Target) {
    match target {
        Target::Ring(cfg) => {
            rec.text("model", cfg.kind.as_str());
            rec.num("phi", cfg.params.flux);
            rec.num("gamma", cfg.params.gamma);
        }
        Target::Center(c) => {
            rec.text("model", "center");
            rec.int("sites", c.len() as u64);
        }
    }
}

pub fn solve(a: &SolveArgs) -> CmdResult {
    let target = Target::from_args(&a.model)?;
    let k = WaveVector::new(a.k)?;
    let sc = match &target {
        Target::Ring(cfg) => cfg.coefficients(k)?,
        Target::Center(c) => solver::coefficients(c, k)?,
    };
    let mut rec = Record::default();
    push_target(&mut rec, &target);
    rec.num("k", a.k);
    rec.text("evaluation", sc.evaluation.as_str());
    push_coefficients(&mut rec, &sc);
    if let Some(kind) = target.relation_kind()? {
        rec.text("relations", kind.as_str());
        for (name, v) in relations(kind, &sc).iter() {
            rec.num(name, v);
        }
    }
    emit(&a.out, &rec.render(a.out.format))?;
    Ok(0)
}

fn parse_grid(grid: &str, axes: usize) -> Result<Vec<usize>, CmdError> {
    let counts: Vec<usize> = grid
        .split(['x', 'X'])
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CmdError::usage(format!("invalid --grid `{grid}`, expected e.g. 101x101")))?;
    match (counts.len(), axes) {
        (1, n) => Ok(vec![counts[0]; n]),
        (n, m) if n == m => Ok(counts),
        _ => Err(CmdError::usage(format!("--grid `{grid}` does not match {axes} axes"))),
    }
}

fn parse_axis(name: &str) -> Result<Axis, CmdError> {
    match name.trim() {
        "phi" | "flux" => Ok(Axis::Flux),
        "gamma" => Ok(Axis::Gamma),
        "k" => Ok(Axis::K),
        other => Err(CmdError::usage(format!("unknown axis `{other}` (phi, gamma, k)"))),
    }
}

pub fn sweep(a: &SweepArgs) -> CmdResult {
    let target = Target::from_args(&a.model)?;
    let axes: Vec<Axis> = a.axes.split(',').map(parse_axis).collect::<Result<_, _>>()?;
    let counts = parse_grid(&a.grid, axes.len())?;
    let ranges: Vec<AxisRange> = axes
        .iter()
        .zip(&counts)
        .map(|(&axis, &n)| match axis {
            Axis::Flux => AxisRange::default_flux(n),
            Axis::Gamma => AxisRange::new(Axis::Gamma, GAMMA_RANGE.0, GAMMA_RANGE.1, n),
            Axis::K => AxisRange::default_k(n),
        })
        .collect();
    if !axes.contains(&Axis::K) && a.k.is_none() {
        return Err(CmdError::usage("--k is required when k is not swept"));
    }
    let model = match target {
        Target::Ring(cfg) => SweepModel::Rhombic(cfg),
        Target::Center(c) => SweepModel::Center(c),
    };
    let spec = SweepSpec {
        model,
        axes: ranges,
        k: a.k.unwrap_or(std::f64::consts::FRAC_PI_2),
    };
    let table = run_sweep(&spec)?;
    let text = match a.out.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    emit(&a.out, &text)?;
    Ok(0)
}

fn render_loci(loci: &[FeatureLocus], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = String::from("feature,phi,gamma,k,k_over_pi\n");
            for l in loci {
                for p in &l.points {
                    s.push_str(&format!(
                        "{},{},{},{},{}\n",
                        l.kind,
                        format_sig(p.flux, 12),
                        format_sig(p.gamma, 12),
                        format_sig(p.k, 12),
                        format_sig(p.k / PI, 12)
                    ));
                }
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = loci
                .iter()
                .flat_map(|l| {
                    l.points.iter().map(move |p| {
                        let mut m = Map::new();
                        m.insert("feature".into(), Value::String(l.kind.to_string()));
                        for (key, v) in [("phi", p.flux), ("gamma", p.gamma), ("k", p.k), ("k_over_pi", p.k / PI)] {
                            let v = serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null);
                            m.insert(key.into(), v);
                        }
                        Value::Object(m)
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&rows).expect("loci serialize");
            s.push('\n');
            s
        }
    }
}

pub fn zeros(a: &ZerosArgs) -> CmdResult {
    let target = Target::from_args(&a.model)?;
    let loci: Vec<FeatureLocus> = match &target {
        Target::Ring(cfg) => match cfg.kind {
            RhombicKind::Axial => find_transmission_zeros(cfg.params)?.to_vec(),
            RhombicKind::Reflection => find_reflection_zeros(cfg.params)?.to_vec(),
        },
        Target::Center(c) => vec![
            find_transmission_minima(c, Side::Left, a.samples)?,
            find_transmission_minima(c, Side::Right, a.samples)?,
        ],
    };
    emit(&a.out, &render_loci(&loci, a.out.format))?;
    Ok(0)
}

pub fn singularities(a: &SingularityArgs) -> CmdResult {
    let count = a
        .grid
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n >= 2)
        .ok_or_else(|| CmdError::usage(format!("invalid --grid `{}`, expected a count of at least 2", a.grid)))?;
    let axis = |fixed: Option<f64>, start: f64, end: f64| match fixed {
        Some(v) => ScanAxis::Fixed(v),
        None => ScanAxis::Range { start, end, count },
    };
    let flux = axis(flux_value(a.flux, a.flux_pi), 0.0, TAU);
    let gamma = axis(a.gamma, SCAN_GAMMA_RANGE.0, SCAN_GAMMA_RANGE.1);
    let k = axis(a.k, 1e-3, PI - 1e-3);
    let locus = match find_spectral_singularities(kind_of(a.model), flux, gamma, k) {
        Ok(l) => l,
        Err(Error::EmptyByTheorem) => {
            eprintln!("{}", Error::EmptyByTheorem);
            FeatureLocus::new(ptscatter::features::FeatureKind::SpectralSingularity)
        }
        Err(e) => return Err(e.into()),
    };
    emit(&a.out, &render_loci(&[locus], a.out.format))?;
    Ok(0)
}

struct Worst {
    name: String,
    value: f64,
}

pub fn verify(a: &VerifyArgs) -> CmdResult {
    let target = Target::from_args(&a.model)?;
    let mut rec = Record::default();
    match &target {
        Target::Ring(cfg) => rec.text("model", cfg.kind.as_str()),
        Target::Center(_) => push_target(&mut rec, &target),
    }
    let mut failure: Option<(String, f64, String)> = None;
    let mut worst: Vec<Worst> = Vec::new();
    let mut note = |name: &str, value: f64, at: String, failure: &mut Option<(String, f64, String)>| {
        match worst.iter_mut().find(|w| w.name == name) {
            Some(w) => w.value = w.value.max(value),
            None => worst.push(Worst {
                name: name.to_string(),
                value,
            }),
        }
        if failure.is_none() && !(value < a.tolerance) {
            *failure = Some((name.to_string(), value, at));
        }
    };

    match &target {
        Target::Ring(cfg) => {
            if a.model.flux.is_some() || a.model.flux_pi.is_some() || a.model.gamma.is_some() {
                return Err(CmdError::usage("verify samples flux and gamma; use --gamma-max to bound gamma"));
            }
            let samples = parameter_samples(cfg.kind, a.seed, a.samples, a.gamma_max);
            for s in &samples {
                let at = format!("phi={} gamma={} k={}", s.flux, s.gamma, s.k);
                let ring = RhombicConfig {
                    kind: cfg.kind,
                    params: s.params(),
                };
                let k = WaveVector::new(s.k)?;
                let (numeric, closed) = match (solver::coefficients(&ring.build(), k), ring.coefficients(k)) {
                    (Ok(n), Ok(c)) => (n, c),
                    (Err(e), _) | (_, Err(e)) => {
                        note("solvable", f64::INFINITY, format!("{at}: {e}"), &mut failure);
                        continue;
                    }
                };
                note("closed form = solver", numeric.max_difference(&closed), at.clone(), &mut failure);
                for (name, v) in relations(cfg.kind, &numeric).iter() {
                    note(name, v, at.clone(), &mut failure);
                }
            }
        }
        Target::Center(c) => {
            let Some(kind) = target.relation_kind()? else {
                return Err(CmdError {
                    code: EXIT_VERIFY,
                    message: "verification failed: centre is neither axial nor reflection PT-symmetric".into(),
                });
            };
            rec.text("relations", kind.as_str());
            for k in linspace(1e-2, PI - 1e-2, a.samples.max(2)) {
                let sc = solver::coefficients(c, WaveVector::new(k)?);
                match sc {
                    Ok(sc) if sc.evaluation == Evaluation::NearSingular => {}
                    Ok(sc) => {
                        for (name, v) in relations(kind, &sc).iter() {
                            note(name, v, format!("k={k}"), &mut failure);
                        }
                    }
                    Err(Error::SpectralSingularity { .. }) => {}
                    Err(e) => note("solvable", f64::INFINITY, format!("k={k}: {e}"), &mut failure),
                }
            }
        }
    }

    rec.int("samples", a.samples as u64);
    rec.int("seed", a.seed);
    rec.num("tolerance", a.tolerance);
    for w in &worst {
        rec.num(format!("max {}", w.name), w.value);
    }
    rec.text("result", if failure.is_none() { "pass" } else { "fail" });
    emit(&a.out, &rec.render(a.out.format))?;
    match failure {
        None => Ok(0),
        Some((name, value, at)) => Err(CmdError {
            code: EXIT_VERIFY,
            message: format!("verification failed: `{name}` residual {value:.3e} at {at}"),
        }),
    }
}

pub fn wavepacket(a: &WavepacketArgs) -> CmdResult {
    let target = Target::from_args(&a.model)?;
    let mut spec = WavepacketSpec::new(a.k, a.sigma, a.n);
    spec.dt = a.dt;
    spec.validate()?;
    let centre = target.centre();
    let result = evolve(&centre, &spec)?;
    let cmp = match &target {
        Target::Ring(cfg) => compare(&result, &cfg.coefficients(WaveVector::new(a.k)?)?, a.tol),
        Target::Center(c) => compare_center(&result, c, a.tol)?,
    };
    if let Some(path) = &a.trace {
        write_trace(path, &result)?;
    }
    let mut rec = Record::default();
    push_target(&mut rec, &target);
    rec.num("k", a.k);
    rec.num("sigma", a.sigma);
    rec.int("n", a.n as u64);
    rec.num("R_est", result.r_est);
    rec.num("T_est", result.t_est);
    rec.num("R_error", cmp.r_error);
    rec.num("T_error", cmp.t_error);
    rec.num("tolerance", cmp.tolerance);
    rec.text("widened", if cmp.widened { "yes" } else { "no" });
    rec.text("result", if cmp.pass { "pass" } else { "fail" });
    emit(&a.out, &rec.render(a.out.format))?;
    if cmp.pass {
        Ok(0)
    } else {
        Err(CmdError {
            code: EXIT_VERIFY,
            message: format!(
                "wavepacket disagrees with steady state: R error {:.3e}, T error {:.3e}, tolerance {:.3e}",
                cmp.r_error, cmp.t_error, cmp.tolerance
            ),
        })
    }
}

fn write_trace(path: &Path, result: &ptscatter::wavepacket::WavepacketResult) -> Result<(), CmdError> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    result.write_trace_csv(&mut w)?;
    w.flush()?;
    Ok(())
}
