use thiserror::Error;

use crate::lattice::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid scattering centre: {}", format_diagnostics(.0))]
    InvalidCenter(Vec<Diagnostic>),

    /// Gauge phases may only be placed on internal sites.
    #[error("gauge phase assigned to attachment site `{0}`")]
    GaugeOnAttachment(String),

    /// Closed-form denominator vanishes: the coefficients diverge.
    #[error("spectral singularity at flux={flux}, gamma={gamma}, k={k}")]
    SpectralSingularity { flux: f64, gamma: f64, k: f64 },

    /// The lead-matched system is rank deficient but consistent (a bound state
    /// decoupled from the leads). Coefficients exist only as a limit in k.
    #[error("degenerate point at k={k} (condition estimate {condition:.3e}); evaluate the k-limit instead")]
    DegeneratePoint { k: f64, condition: f64 },

    /// Transfer matrix needs t_R != 0.
    #[error("transfer matrix not defined: t_R vanishes (one-way transmission zero)")]
    NotInvertible,

    #[error("no spectral singularity at k={k}: best outgoing-only residual {residual:.3e}")]
    NotSingular { k: f64, residual: f64 },

    #[error("exhaustive parity search limited to {max} sites, centre has {sites}; pass an explicit parity map")]
    SizeLimit { sites: usize, max: usize },

    #[error("no spectral singularity exists for the reflection PT-symmetric ring")]
    EmptyByTheorem,

    /// Wavepacket reached the truncated chain ends before the horizon.
    #[error("wavepacket reached the chain boundary at t={time:.3} (edge norm {edge_norm:.3e})")]
    Horizon { time: f64, edge_norm: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
