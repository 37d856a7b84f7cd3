//! Scattering-centre graphs, lead conventions and gauge utilities.
//!
//! A centre is a finite set of labelled sites with complex on-site potentials
//! and directed hoppings. Each unordered pair is stored once: the hopping
//! `from -> to` with amplitude `t` contributes `H[to][from] = t` and
//! `H[from][to] = conj(t)`. Two semi-infinite uniform chains (hopping -1) are
//! attached at `attach_left` (lead coordinate j = -1) and `attach_right`
//! (j = +1).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform semi-infinite tight-binding leads. Energies are measured in units
/// of the lead hopping, so the coupling is fixed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LeadModel;

impl LeadModel {
    pub const HOPPING: f64 = 1.0;
}

/// Incident wave vector, strictly inside the band `(0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WaveVector(f64);

impl WaveVector {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() && k > 0.0 && k < PI {
            Ok(Self(k))
        } else {
            Err(Error::Domain(format!("wave vector {k} outside (0, pi)")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Lead energy `-2 cos k`.
    pub fn energy(self) -> f64 {
        -2.0 * LeadModel::HOPPING * self.0.cos()
    }

    /// Group velocity `2 sin k`.
    pub fn group_velocity(self) -> f64 {
        2.0 * LeadModel::HOPPING * self.0.sin()
    }
}

/// Lead dispersion `E_k = -2 cos k`.
pub fn dispersion(k: f64) -> Result<f64> {
    WaveVector::new(k).map(WaveVector::energy)
}

/// Flux threading the rhombic ring and the balanced gain/loss rate.
///
/// The flux is kept as given. Amplitudes are 4pi-periodic in it (shifting by
/// 2pi is a gauge change that flips the phase at one attachment site), while
/// all probabilities are 2pi-periodic; [`RingParameters::canonical_flux`]
/// gives the representative in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingParameters {
    pub flux: f64,
    pub gamma: f64,
}

impl RingParameters {
    pub fn new(flux: f64, gamma: f64) -> Self {
        Self { flux, gamma }
    }

    pub fn canonical_flux(&self) -> f64 {
        canonical_angle(self.flux)
    }

    /// Per-link Peierls phase `Phi / 4`.
    pub fn link_phase(&self) -> f64 {
        self.flux / 4.0
    }

    /// `(sin(Phi/2), cos(Phi/2))`, exact at integer multiples of pi.
    pub fn half_flux_trig(&self) -> (f64, f64) {
        let turns = self.flux / PI;
        if turns == turns.round() && turns.abs() < 1e15 {
            // Phi/2 = n pi/2
            match (turns as i64).rem_euclid(4) {
                0 => (0.0, 1.0),
                1 => (1.0, 0.0),
                2 => (0.0, -1.0),
                _ => (-1.0, 0.0),
            }
        } else {
            (0.5 * self.flux).sin_cos()
        }
    }
}

/// Reduce an angle into `[0, 2pi)`.
pub fn canonical_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hopping {
    pub from: String,
    pub to: String,
    pub amplitude: Complex64,
}

impl Hopping {
    pub fn new(from: impl Into<String>, to: impl Into<String>, amplitude: Complex64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            amplitude,
        }
    }
}

/// Finite non-Hermitian tight-binding graph with two lead attachment sites.
///
/// Fields are public plain data; [`validate_center`] reports broken
/// invariants and every solver entry point rejects invalid centres.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringCenter {
    pub sites: Vec<String>,
    /// On-site potential per entry of `sites` (gain `+i gamma`, loss `-i gamma`).
    pub onsite: Vec<Complex64>,
    pub hoppings: Vec<Hopping>,
    pub attach_left: String,
    pub attach_right: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    DuplicateAttachment(String),
    UnknownSite(String),
    DuplicateSite(String),
    SelfLoop(String),
    DuplicateEdge(String, String),
    InvalidAmplitude(String, String),
    OnsiteLength { sites: usize, onsite: usize },
    NonFiniteOnsite(String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateAttachment(s) => write!(f, "both leads attached to `{s}`"),
            Self::UnknownSite(s) => write!(f, "unknown site `{s}`"),
            Self::DuplicateSite(s) => write!(f, "site `{s}` listed twice"),
            Self::SelfLoop(s) => write!(f, "self-loop on `{s}`"),
            Self::DuplicateEdge(a, b) => write!(f, "pair `{a}`-`{b}` has more than one hopping"),
            Self::InvalidAmplitude(a, b) => {
                write!(f, "hopping `{a}`->`{b}` is zero or not finite")
            }
            Self::OnsiteLength { sites, onsite } => {
                write!(f, "{onsite} on-site terms for {sites} sites")
            }
            Self::NonFiniteOnsite(s) => write!(f, "on-site term of `{s}` is not finite"),
        }
    }
}

/// Check the centre invariants; empty iff the centre is well formed.
pub fn validate_center(c: &ScatteringCenter) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut known = HashSet::new();
    for s in &c.sites {
        if !known.insert(s.as_str()) {
            out.push(Diagnostic::DuplicateSite(s.clone()));
        }
    }
    if c.onsite.len() != c.sites.len() {
        out.push(Diagnostic::OnsiteLength {
            sites: c.sites.len(),
            onsite: c.onsite.len(),
        });
    }
    for (s, v) in c.sites.iter().zip(&c.onsite) {
        if !(v.re.is_finite() && v.im.is_finite()) {
            out.push(Diagnostic::NonFiniteOnsite(s.clone()));
        }
    }
    if c.attach_left == c.attach_right {
        out.push(Diagnostic::DuplicateAttachment(c.attach_left.clone()));
    }
    for a in [&c.attach_left, &c.attach_right] {
        if !known.contains(a.as_str()) {
            out.push(Diagnostic::UnknownSite(a.clone()));
        }
    }
    let mut pairs = HashSet::new();
    for h in &c.hoppings {
        for s in [&h.from, &h.to] {
            if !known.contains(s.as_str()) {
                out.push(Diagnostic::UnknownSite(s.clone()));
            }
        }
        if h.from == h.to {
            out.push(Diagnostic::SelfLoop(h.from.clone()));
            continue;
        }
        let key = if h.from < h.to {
            (h.from.as_str(), h.to.as_str())
        } else {
            (h.to.as_str(), h.from.as_str())
        };
        if !pairs.insert(key) {
            out.push(Diagnostic::DuplicateEdge(key.0.to_string(), key.1.to_string()));
        }
        let a = h.amplitude;
        if !(a.re.is_finite() && a.im.is_finite()) || a.norm() == 0.0 {
            out.push(Diagnostic::InvalidAmplitude(h.from.clone(), h.to.clone()));
        }
    }
    out
}

impl ScatteringCenter {
    pub fn validate(&self) -> Vec<Diagnostic> {
        validate_center(self)
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let d = validate_center(self);
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidCenter(d))
        }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn index_of(&self, site: &str) -> Option<usize> {
        self.sites.iter().position(|s| s == site)
    }

    pub(crate) fn index_map(&self) -> HashMap<&str, usize> {
        self.sites
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect()
    }

    pub fn onsite_of(&self, site: &str) -> Option<Complex64> {
        self.index_of(site).map(|i| self.onsite[i])
    }

    /// Amplitude for hopping `from -> to`, i.e. the matrix element `H[to][from]`.
    pub fn hopping(&self, from: &str, to: &str) -> Option<Complex64> {
        self.hoppings.iter().find_map(|h| {
            if h.from == from && h.to == to {
                Some(h.amplitude)
            } else if h.from == to && h.to == from {
                Some(h.amplitude.conj())
            } else {
                None
            }
        })
    }

    /// Dense centre Hamiltonian in site order.
    pub fn hamiltonian(&self) -> DMatrix<Complex64> {
        let n = self.sites.len();
        let idx = self.index_map();
        let mut h = DMatrix::zeros(n, n);
        for (i, v) in self.onsite.iter().enumerate().take(n) {
            h[(i, i)] = *v;
        }
        for hop in &self.hoppings {
            if let (Some(&a), Some(&b)) = (idx.get(hop.from.as_str()), idx.get(hop.to.as_str())) {
                h[(b, a)] += hop.amplitude;
                h[(a, b)] += hop.amplitude.conj();
            }
        }
        h
    }

    /// One scattering site between the attachments, `-1 - 0 - 1`, with unit
    /// (-1) hoppings. With `onsite = 0` the whole system is a uniform chain.
    pub fn single_site(onsite: Complex64) -> Self {
        let minus_one = Complex64::new(-1.0, 0.0);
        Self {
            sites: vec!["-1".into(), "0".into(), "1".into()],
            onsite: vec![Complex64::new(0.0, 0.0), onsite, Complex64::new(0.0, 0.0)],
            hoppings: vec![
                Hopping::new("-1", "0", minus_one),
                Hopping::new("0", "1", minus_one),
            ],
            attach_left: "-1".into(),
            attach_right: "1".into(),
        }
    }
}

/// Multiply every hopping `a -> b` by `exp(i(theta_a - theta_b))`.
///
/// Sites absent from `phases` keep phase zero. Attachment sites cannot carry
/// a phase since that would change the matching to the leads.
pub fn apply_gauge(c: &ScatteringCenter, phases: &BTreeMap<String, f64>) -> Result<ScatteringCenter> {
    for (site, theta) in phases {
        if *site == c.attach_left || *site == c.attach_right {
            return Err(Error::GaugeOnAttachment(site.clone()));
        }
        if c.index_of(site).is_none() {
            return Err(Error::Domain(format!("gauge phase for unknown site `{site}`")));
        }
        if !theta.is_finite() {
            return Err(Error::Domain(format!("gauge phase for `{site}` is not finite")));
        }
    }
    let theta = |s: &str| phases.get(s).copied().unwrap_or(0.0);
    let mut out = c.clone();
    for h in &mut out.hoppings {
        h.amplitude *= Complex64::from_polar(1.0, theta(&h.from) - theta(&h.to));
    }
    Ok(out)
}

/// Total hopping phase along a closed walk, reduced into `[0, 2pi)`.
///
/// `cycle` lists the visited sites with the first repeated at the end, e.g.
/// `["-1", "A", "1", "B", "-1"]`. Each step must follow an existing edge.
pub fn cycle_flux(c: &ScatteringCenter, cycle: &[&str]) -> Result<f64> {
    if cycle.len() < 3 || cycle.first() != cycle.last() {
        return Err(Error::Domain("cycle must be a closed walk of at least two steps".into()));
    }
    let mut total = 0.0;
    for w in cycle.windows(2) {
        let amp = c
            .hopping(w[0], w[1])
            .ok_or_else(|| Error::Domain(format!("no edge between `{}` and `{}`", w[0], w[1])))?;
        total += amp.arg();
    }
    Ok(canonical_angle(total))
}

/// Site permutation used as the parity operator. Sites without an entry are
/// fixed points.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParityMap {
    images: BTreeMap<String, String>,
}

impl ParityMap {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Build from transpositions `(a, b)`; each pair is entered both ways.
    pub fn from_swaps<S: AsRef<str>>(swaps: &[(S, S)]) -> Self {
        let mut images = BTreeMap::new();
        for (a, b) in swaps {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a != b {
                images.insert(a.to_string(), b.to_string());
                images.insert(b.to_string(), a.to_string());
            }
        }
        Self { images }
    }

    /// Build from an explicit site -> image table; fixed points may be listed.
    pub fn from_images(images: BTreeMap<String, String>) -> Self {
        Self {
            images: images.into_iter().filter(|(a, b)| a != b).collect(),
        }
    }

    pub fn image<'a>(&'a self, site: &'a str) -> &'a str {
        self.images.get(site).map(String::as_str).unwrap_or(site)
    }

    pub fn is_involution(&self) -> bool {
        self.images.iter().all(|(a, b)| self.image(b) == a)
    }

    pub fn is_identity(&self) -> bool {
        self.images.is_empty()
    }

    /// Unordered swapped pairs, each listed once.
    pub fn swaps(&self) -> Vec<(&str, &str)> {
        self.images
            .iter()
            .filter(|(a, b)| a < b)
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect()
    }
}

impl fmt::Display for ParityMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let swaps = self.swaps();
        if swaps.is_empty() {
            return write!(f, "{{id}}");
        }
        let body: Vec<String> = swaps.iter().map(|(a, b)| format!("{a}<->{b}")).collect();
        write!(f, "{{{}}}", body.join(", "))
    }
}
