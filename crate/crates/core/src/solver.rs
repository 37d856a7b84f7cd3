//! Lead-matched scattering solver for arbitrary two-lead centres.
//!
//! The leads carry plane waves `f_j = A z^j + B z^-j` (j <= -1) and
//! `f_j = C z^j + D z^-j` (j >= 1) with `z = e^{ik}`. Attachment-site
//! amplitudes are written through this ansatz, so the unknowns are two of
//! `(A, B, C, D)` plus the internal amplitudes, and there is one Schrodinger
//! equation per centre site. Replacing `z` by `e^{-ik}` gives the formal
//! continuation to `-k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{ScatteringCenter, WaveVector};

/// Condition estimate above which a solve is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Half-step of the symmetric difference used for k-limits at degenerate points.
pub const LIMIT_STEP: f64 = 1e-4;

const CONSISTENCY_TOL: f64 = 1e-8;
const SINGULAR_STATE_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Which exponential plays the role of `e^{ik}` in the assembled system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Continuation {
    #[default]
    Forward,
    /// `e^{ik} -> e^{-ik}`, i.e. the coefficients at `-k`.
    Reversed,
}

/// How a coefficient record was obtained. Ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub enum Evaluation {
    #[default]
    Ok,
    LimitEvaluated,
    NearSingular,
}

impl Evaluation {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::LimitEvaluated => "limit-evaluated",
            Self::NearSingular => "near-singular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probabilities {
    pub r_left: f64,
    pub r_right: f64,
    pub t_left: f64,
    pub t_right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringCoefficients {
    pub r_left: Complex64,
    pub t_left: Complex64,
    pub r_right: Complex64,
    pub t_right: Complex64,
    pub k: WaveVector,
    pub evaluation: Evaluation,
}

impl ScatteringCoefficients {
    pub fn probabilities(&self) -> Probabilities {
        Probabilities {
            r_left: self.r_left.norm_sqr(),
            r_right: self.r_right.norm_sqr(),
            t_left: self.t_left.norm_sqr(),
            t_right: self.t_right.norm_sqr(),
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.r_left, self.t_left, self.r_right, self.t_right]
    }

    /// Largest modulus difference over the four amplitudes.
    pub fn max_difference(&self, other: &Self) -> f64 {
        self.amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Result of a single-side solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideCoefficients {
    pub side: Side,
    pub r: Complex64,
    pub t: Complex64,
    pub condition: f64,
    pub evaluation: Evaluation,
}

/// Plane-wave amplitudes in the leads: left `A e^{ikj} + B e^{-ikj}`, right
/// `C e^{ikj} + D e^{-ikj}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LeadAmplitudes {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringState {
    /// Amplitude on every centre site, in `ScatteringCenter::sites` order.
    pub amplitudes: Vec<Complex64>,
    pub leads: LeadAmplitudes,
    /// Max Schrodinger residual over centre sites at solve time.
    pub residual: f64,
}

impl ScatteringState {
    pub fn zero(c: &ScatteringCenter) -> Self {
        Self {
            amplitudes: vec![ZERO; c.len()],
            leads: LeadAmplitudes::default(),
            residual: 0.0,
        }
    }

    pub fn amplitude(&self, c: &ScatteringCenter, site: &str) -> Option<Complex64> {
        c.index_of(site).map(|i| self.amplitudes[i])
    }
}

/// Column layout: `A, B, C, D`, then internal sites.
const COL_A: usize = 0;
const COL_B: usize = 1;
const COL_C: usize = 2;
const COL_D: usize = 3;

struct LeadMatched {
    z: Complex64,
    h: DMatrix<Complex64>,
    /// `n x (4 + internal)` map from `(A, B, C, D, internal)` to row residuals.
    g: DMatrix<Complex64>,
    left: usize,
    right: usize,
    /// Centre index of each internal column.
    internal: Vec<usize>,
}

impl LeadMatched {
    fn assemble(c: &ScatteringCenter, z: Complex64) -> Result<Self> {
        c.ensure_valid()?;
        let n = c.len();
        let idx = c.index_map();
        let left = idx[c.attach_left.as_str()];
        let right = idx[c.attach_right.as_str()];
        let internal: Vec<usize> = (0..n).filter(|&i| i != left && i != right).collect();
        let mut col_of = vec![0usize; n];
        for (j, &s) in internal.iter().enumerate() {
            col_of[s] = 4 + j;
        }
        let zi = z.inv();
        // amplitude of a centre site as a combination of columns
        let expr = |s: usize| -> Vec<(usize, Complex64)> {
            if s == left {
                vec![(COL_A, zi), (COL_B, z)]
            } else if s == right {
                vec![(COL_C, z), (COL_D, zi)]
            } else {
                vec![(col_of[s], ONE)]
            }
        };
        let energy = -(z + zi);
        let h = c.hamiltonian();
        let mut g = DMatrix::zeros(n, 4 + internal.len());
        for row in 0..n {
            for col in 0..n {
                let mut hv = h[(row, col)];
                if row == col {
                    hv -= energy;
                }
                if hv == ZERO {
                    continue;
                }
                for (k, coeff) in expr(col) {
                    g[(row, k)] += hv * coeff;
                }
            }
        }
        // coupling to the next lead site, f_{-2} and f_{2}
        g[(left, COL_A)] -= zi * zi;
        g[(left, COL_B)] -= z * z;
        g[(right, COL_C)] -= z * z;
        g[(right, COL_D)] -= zi * zi;
        Ok(Self {
            z,
            h,
            g,
            left,
            right,
            internal,
        })
    }

    fn n(&self) -> usize {
        self.g.nrows()
    }

    /// Split into the matrix of the unknown columns and the right-hand side
    /// produced by the fixed ones.
    fn split(&self, unknown: &[usize], fixed: &[(usize, Complex64)]) -> (DMatrix<Complex64>, DVector<Complex64>) {
        let n = self.n();
        let m = DMatrix::from_fn(n, unknown.len(), |r, j| self.g[(r, unknown[j])]);
        let mut rhs = DVector::zeros(n);
        for &(col, v) in fixed {
            for r in 0..n {
                rhs[r] -= self.g[(r, col)] * v;
            }
        }
        (m, rhs)
    }

    fn state(&self, leads: LeadAmplitudes, internal: &[Complex64]) -> ScatteringState {
        let n = self.n();
        let mut amplitudes = vec![ZERO; n];
        for (j, &s) in self.internal.iter().enumerate() {
            amplitudes[s] = internal[j];
        }
        let zi = self.z.inv();
        amplitudes[self.left] = leads.a * zi + leads.b * self.z;
        amplitudes[self.right] = leads.c * self.z + leads.d * zi;
        let mut state = ScatteringState {
            amplitudes,
            leads,
            residual: 0.0,
        };
        state.residual = self.residual(&state);
        state
    }

    fn residual(&self, state: &ScatteringState) -> f64 {
        schrodinger_residual(&self.h, self.left, self.right, self.z, state)
    }
}

fn condition(m: &DMatrix<Complex64>) -> (f64, nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>) {
    let svd = m.clone().svd(true, true);
    let sv = &svd.singular_values;
    let max = sv.max();
    let min = sv.min();
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    (cond, svd)
}

fn max_abs(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn phase_factor(k: WaveVector, cont: Continuation) -> Complex64 {
    match cont {
        Continuation::Forward => Complex64::from_polar(1.0, k.value()),
        Continuation::Reversed => Complex64::from_polar(1.0, -k.value()),
    }
}

/// Solve for one incidence side.
///
/// Returns the coefficients and the full scattering state. A rank-deficient
/// but consistent system (a bound state decoupled from the leads) yields
/// [`Error::DegeneratePoint`]; an inconsistent near-singular system (close to
/// a spectral singularity) is solved anyway and flagged
/// [`Evaluation::NearSingular`].
pub fn solve_scattering(c: &ScatteringCenter, k: WaveVector, side: Side) -> Result<(SideCoefficients, ScatteringState)> {
    solve_scattering_continued(c, k, side, Continuation::Forward)
}

pub fn solve_scattering_continued(
    c: &ScatteringCenter,
    k: WaveVector,
    side: Side,
    cont: Continuation,
) -> Result<(SideCoefficients, ScatteringState)> {
    let sys = LeadMatched::assemble(c, phase_factor(k, cont))?;
    let mut unknown = vec![COL_B, COL_C];
    unknown.extend((0..sys.internal.len()).map(|j| 4 + j));
    let fixed = match side {
        Side::Left => [(COL_A, ONE), (COL_D, ZERO)],
        Side::Right => [(COL_A, ZERO), (COL_D, ONE)],
    };
    let (m, rhs) = sys.split(&unknown, &fixed);
    let (cond, svd) = condition(&m);

    let mut evaluation = Evaluation::Ok;
    let x = if cond > CONDITION_LIMIT {
        let cut = svd.singular_values.max() / CONDITION_LIMIT;
        let pinv = svd
            .solve(&rhs, cut)
            .map_err(|e| Error::Domain(format!("pseudo-inverse failed: {e}")))?;
        let mismatch = max_abs(&(&m * &pinv - &rhs)) / max_abs(&rhs).max(f64::MIN_POSITIVE);
        if mismatch < CONSISTENCY_TOL {
            return Err(Error::DegeneratePoint {
                k: k.value(),
                condition: cond,
            });
        }
        evaluation = Evaluation::NearSingular;
        match m.clone().lu().solve(&rhs) {
            Some(x) => x,
            None => svd
                .solve(&rhs, 0.0)
                .map_err(|e| Error::Domain(format!("singular solve failed: {e}")))?,
        }
    } else {
        m.clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Domain("singular lead-matched system".into()))?
    };

    let (b, cc) = (x[0], x[1]);
    let leads = match side {
        Side::Left => LeadAmplitudes { a: ONE, b, c: cc, d: ZERO },
        Side::Right => LeadAmplitudes { a: ZERO, b, c: cc, d: ONE },
    };
    let internal: Vec<Complex64> = x.iter().skip(2).copied().collect();
    let state = sys.state(leads, &internal);
    let (r, t) = match side {
        Side::Left => (b, cc),
        Side::Right => (cc, b),
    };
    Ok((
        SideCoefficients {
            side,
            r,
            t,
            condition: cond,
            evaluation,
        },
        state,
    ))
}

/// Both incidence sides at the same k. Errors from either solve propagate.
pub fn full_coefficients(c: &ScatteringCenter, k: WaveVector) -> Result<ScatteringCoefficients> {
    full_coefficients_continued(c, k, Continuation::Forward)
}

pub fn full_coefficients_continued(c: &ScatteringCenter, k: WaveVector, cont: Continuation) -> Result<ScatteringCoefficients> {
    let (left, _) = solve_scattering_continued(c, k, Side::Left, cont)?;
    let (right, _) = solve_scattering_continued(c, k, Side::Right, cont)?;
    Ok(ScatteringCoefficients {
        r_left: left.r,
        t_left: left.t,
        r_right: right.r,
        t_right: right.t,
        k,
        evaluation: left.evaluation.max(right.evaluation),
    })
}

/// k-limit of the coefficients from a symmetric difference at `k +- h` and
/// `k +- h/2`, Richardson-extrapolated. Used at degenerate points.
pub fn limit_coefficients(c: &ScatteringCenter, k: WaveVector) -> Result<ScatteringCoefficients> {
    let avg = |h: f64| -> Result<[Complex64; 4]> {
        let lo = full_coefficients(c, WaveVector::new(k.value() - h)?)?;
        let hi = full_coefficients(c, WaveVector::new(k.value() + h)?)?;
        let mut out = [ZERO; 4];
        for (o, (a, b)) in out.iter_mut().zip(lo.amplitudes().iter().zip(hi.amplitudes())) {
            *o = 0.5 * (a + b);
        }
        Ok(out)
    };
    let coarse = avg(LIMIT_STEP)?;
    let fine = avg(0.5 * LIMIT_STEP)?;
    let v: Vec<Complex64> = fine
        .iter()
        .zip(coarse)
        .map(|(f, g)| (4.0 * f - g) / 3.0)
        .collect();
    Ok(ScatteringCoefficients {
        r_left: v[0],
        t_left: v[1],
        r_right: v[2],
        t_right: v[3],
        k,
        evaluation: Evaluation::LimitEvaluated,
    })
}

/// [`full_coefficients`], falling back to [`limit_coefficients`] at degenerate points.
pub fn coefficients(c: &ScatteringCenter, k: WaveVector) -> Result<ScatteringCoefficients> {
    match full_coefficients(c, k) {
        Err(Error::DegeneratePoint { .. }) => limit_coefficients(c, k),
        other => other,
    }
}

/// Max over centre sites of `|(H psi - E_k psi)_site|`, with the next lead
/// sites taken from the state's plane-wave amplitudes.
///
/// # Panics
/// If the state does not have one amplitude per centre site.
pub fn residual(c: &ScatteringCenter, k: WaveVector, state: &ScatteringState) -> f64 {
    residual_at(c, Complex64::from_polar(1.0, k.value()), state)
}

fn residual_at(c: &ScatteringCenter, z: Complex64, state: &ScatteringState) -> f64 {
    assert_eq!(state.amplitudes.len(), c.len(), "state does not match centre");
    let left = c.index_of(&c.attach_left).expect("left attachment site");
    let right = c.index_of(&c.attach_right).expect("right attachment site");
    schrodinger_residual(&c.hamiltonian(), left, right, z, state)
}

fn schrodinger_residual(h: &DMatrix<Complex64>, left: usize, right: usize, z: Complex64, state: &ScatteringState) -> f64 {
    let zi = z.inv();
    let energy = -(z + zi);
    let psi = DVector::from_column_slice(&state.amplitudes);
    let mut r = h * &psi - psi.map(|p| p * energy);
    let LeadAmplitudes { a, b, c, d } = state.leads;
    r[left] -= a * zi * zi + b * z * z;
    r[right] -= c * z * z + d * zi * zi;
    max_abs(&r)
}

/// 2x2 transfer matrix mapping left amplitudes `(A, B)` to right `(C, D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

/// Smallest |t_R| accepted when building a transfer matrix.
pub const TRANSFER_MIN_T: f64 = 1e-15;

impl TransferMatrix {
    pub fn identity() -> Self {
        Self {
            m11: ONE,
            m12: ZERO,
            m21: ZERO,
            m22: ONE,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn apply(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        (self.m11 * a + self.m12 * b, self.m21 * a + self.m22 * b)
    }

    /// Recover `(r_L, t_L, r_R, t_R)`.
    pub fn coefficients(&self) -> Result<[Complex64; 4]> {
        if self.m22.norm() == 0.0 {
            return Err(Error::Domain("m22 vanishes: spectral singularity".into()));
        }
        let t_r = self.m22.inv();
        let r_r = self.m12 * t_r;
        let r_l = -self.m21 * t_r;
        let t_l = self.m11 - self.m12 * self.m21 * t_r;
        Ok([r_l, t_l, r_r, t_r])
    }
}

pub fn transfer_matrix(sc: &ScatteringCoefficients) -> Result<TransferMatrix> {
    if !(sc.t_right.norm() > TRANSFER_MIN_T) {
        return Err(Error::NotInvertible);
    }
    let inv = sc.t_right.inv();
    Ok(TransferMatrix {
        m11: sc.t_left - sc.r_left * sc.r_right * inv,
        m12: sc.r_right * inv,
        m21: -sc.r_left * inv,
        m22: inv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularBranch {
    /// Outgoing waves only: left `e^{-ikj}`, right `C e^{ikj}`.
    Emission,
    /// Incoming waves only: left `e^{ikj}`, right `D e^{-ikj}`.
    Absorption,
}

/// Which lead amplitude was used on the far side of a singular state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchSign {
    /// Emission `C = -i`, absorption `D = +i`.
    Upper,
    /// Emission `C = +i`, absorption `D = -i`.
    Lower,
    /// Neither +-i fits; far-side amplitude fitted freely.
    Fitted(Complex64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularState {
    pub branch: SingularBranch,
    pub sign: BranchSign,
    pub state: ScatteringState,
    /// Residual of the upper and lower sign choices, both recorded.
    pub upper_residual: f64,
    pub lower_residual: f64,
}

/// Self-sustained emission or reflectionless absorption state at a spectral
/// singularity. The `+-i` sign is chosen by smallest residual.
pub fn singular_state(c: &ScatteringCenter, k: WaveVector, branch: SingularBranch) -> Result<SingularState> {
    let sys = LeadMatched::assemble(c, phase_factor(k, Continuation::Forward))?;
    let internal: Vec<usize> = (0..sys.internal.len()).map(|j| 4 + j).collect();

    let try_fixed = |leads: LeadAmplitudes| -> Result<ScatteringState> {
        let fixed = [
            (COL_A, leads.a),
            (COL_B, leads.b),
            (COL_C, leads.c),
            (COL_D, leads.d),
        ];
        let x = least_squares(&sys, &internal, &fixed)?;
        Ok(sys.state(leads, x.as_slice()))
    };
    let candidate = |s: Complex64| match branch {
        SingularBranch::Emission => LeadAmplitudes { a: ZERO, b: ONE, c: s, d: ZERO },
        SingularBranch::Absorption => LeadAmplitudes { a: ONE, b: ZERO, c: ZERO, d: s },
    };
    let (upper_amp, lower_amp) = match branch {
        SingularBranch::Emission => (-I, I),
        SingularBranch::Absorption => (I, -I),
    };
    let upper = try_fixed(candidate(upper_amp))?;
    let lower = try_fixed(candidate(lower_amp))?;
    let (upper_residual, lower_residual) = (upper.residual, lower.residual);
    let (sign, best) = if upper_residual <= lower_residual {
        (BranchSign::Upper, upper)
    } else {
        (BranchSign::Lower, lower)
    };
    if best.residual < SINGULAR_STATE_TOL {
        return Ok(SingularState {
            branch,
            sign,
            state: best,
            upper_residual,
            lower_residual,
        });
    }

    // free far-side amplitude
    let (far_col, fixed) = match branch {
        SingularBranch::Emission => (COL_C, [(COL_A, ZERO), (COL_B, ONE), (COL_D, ZERO)]),
        SingularBranch::Absorption => (COL_D, [(COL_A, ONE), (COL_B, ZERO), (COL_C, ZERO)]),
    };
    let mut cols = vec![far_col];
    cols.extend(&internal);
    let x = least_squares(&sys, &cols, &fixed)?;
    let leads = candidate(x[0]);
    let state = sys.state(leads, &x.as_slice()[1..]);
    if state.residual < SINGULAR_STATE_TOL {
        Ok(SingularState {
            branch,
            sign: BranchSign::Fitted(x[0]),
            state,
            upper_residual,
            lower_residual,
        })
    } else {
        Err(Error::NotSingular {
            k: k.value(),
            residual: state.residual.min(best.residual),
        })
    }
}

fn least_squares(sys: &LeadMatched, unknown: &[usize], fixed: &[(usize, Complex64)]) -> Result<DVector<Complex64>> {
    if unknown.is_empty() {
        return Ok(DVector::zeros(0));
    }
    let (m, rhs) = sys.split(unknown, fixed);
    let svd = m.svd(true, true);
    let cut = svd.singular_values.max() * 1e-14;
    svd.solve(&rhs, cut)
        .map_err(|e| Error::Domain(format!("least-squares solve failed: {e}")))
}
