//! Parameter sweeps and feature loci: transmission and reflection zeros and
//! spectral singularities of the rhombic rings.

mod sampling;
mod singularities;
mod sweep;
mod zeros;

use std::fmt;

use serde::Serialize;

pub use sampling::{is_flagged_neighbourhood, parameter_samples, random_hermitian_center, ParameterSample};
pub use singularities::{find_spectral_singularities, scan_singularities, ScanAxis, SINGULARITY_ACCEPT};
pub use sweep::{
    format_sig, linspace, sweep, sweep_with_threads, threads_from_env, Axis, AxisRange, SweepModel, SweepRow, SweepSpec,
    SweepTable, THREADS_ENV,
};
pub use zeros::{
    find_reflection_zeros, find_transmission_minima, find_transmission_zeros, golden_section_min, ZERO_PROBABILITY_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FeatureKind {
    TransmissionZeroL,
    TransmissionZeroR,
    ReflectionZeroL,
    ReflectionZeroR,
    SpectralSingularity,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TransmissionZeroL => "transmission-zero-left",
            Self::TransmissionZeroR => "transmission-zero-right",
            Self::ReflectionZeroL => "reflection-zero-left",
            Self::ReflectionZeroR => "reflection-zero-right",
            Self::SpectralSingularity => "spectral-singularity",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeaturePoint {
    pub flux: f64,
    pub gamma: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureLocus {
    pub kind: FeatureKind,
    pub points: Vec<FeaturePoint>,
}

impl FeatureLocus {
    pub fn new(kind: FeatureKind) -> Self {
        Self { kind, points: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ks(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.k).collect()
    }
}
