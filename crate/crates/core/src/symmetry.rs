//! PT classification of scattering centres and the reciprocity relations
//! implied by axial and reflection PT symmetry.
//!
//! `T` is complex conjugation in the site basis and `P` a site permutation
//! given by a [`ParityMap`].

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{ParityMap, ScatteringCenter};
use crate::solver::ScatteringCoefficients;

/// Entrywise tolerance for `P H* P^-1 = H` and the plain P / T tests.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Exhaustive parity search bound.
pub const MAX_PARITY_SEARCH_SITES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PtKind {
    /// PT-symmetric, parity fixes both attachment sites.
    AxialPT,
    /// PT-symmetric, parity swaps the attachment sites.
    ReflectionPT,
    PSymmetric,
    TSymmetric,
    None,
}

impl PtKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::AxialPT => "axial-PT",
            Self::ReflectionPT => "reflection-PT",
            Self::PSymmetric => "P",
            Self::TSymmetric => "T",
            Self::None => "none",
        }
    }
}

impl fmt::Display for PtKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtClassification {
    pub kind: PtKind,
    pub parity: ParityMap,
    /// Residual of the relation that decided `kind` (the PT residual for `None`).
    pub residual: f64,
    /// `max |P H* P^-1 - H|`.
    pub pt_residual: f64,
    /// `max |P H P^-1 - H|`.
    pub p_residual: f64,
    /// `max |H* - H|`.
    pub t_residual: f64,
}

impl PtClassification {
    pub fn is_pt(&self) -> bool {
        matches!(self.kind, PtKind::AxialPT | PtKind::ReflectionPT)
    }
}

fn permutation(c: &ScatteringCenter, p: &ParityMap) -> Result<Vec<usize>> {
    c.sites
        .iter()
        .map(|s| {
            c.index_of(p.image(s))
                .ok_or_else(|| Error::Domain(format!("parity maps `{s}` outside the centre")))
        })
        .collect()
}

fn check_parity(c: &ScatteringCenter, p: &ParityMap) -> Result<Vec<usize>> {
    c.ensure_valid()?;
    if !p.is_involution() {
        return Err(Error::Domain(format!("parity {p} is not an involution")));
    }
    let perm = permutation(c, p)?;
    if perm.iter().enumerate().any(|(i, &j)| perm[j] != i) {
        return Err(Error::Domain(format!("parity {p} is not an involution on the centre sites")));
    }
    Ok(perm)
}

fn permuted_residual(h: &DMatrix<Complex64>, perm: &[usize], conjugate: bool) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut v = h[(perm[i], perm[j])];
            if conjugate {
                v = v.conj();
            }
            worst = worst.max((v - h[(i, j)]).norm());
        }
    }
    worst
}

/// `max |P H P^-1 - H|` for the literal site Hamiltonian.
pub fn p_residual(c: &ScatteringCenter, p: &ParityMap) -> Result<f64> {
    let perm = check_parity(c, p)?;
    Ok(permuted_residual(&c.hamiltonian(), &perm, false))
}

/// Whether `P H P^-1 = U H U^-1` for some diagonal phase matrix `U`, i.e. `P`
/// is a symmetry up to a gauge transformation (phases on any site, including
/// the attachments). Returns the residual after the best gauge fit.
///
/// The phases are fixed along a spanning forest of the hopping graph and then
/// checked on every remaining edge.
pub fn p_residual_up_to_gauge(c: &ScatteringCenter, p: &ParityMap) -> Result<f64> {
    let perm = check_parity(c, p)?;
    let h = c.hamiltonian();
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst.max((h[(perm[i], perm[i])] - h[(i, i)]).norm());
    }
    let mut theta: Vec<Option<f64>> = vec![None; n];
    for root in 0..n {
        if theta[root].is_some() {
            continue;
        }
        theta[root] = Some(0.0);
        let mut queue = VecDeque::from([root]);
        while let Some(j) = queue.pop_front() {
            for i in 0..n {
                if i == j || theta[i].is_some() || h[(i, j)].norm() == 0.0 {
                    continue;
                }
                // H[p(i)][p(j)] = e^{i(theta_i - theta_j)} H[i][j]
                let ratio = h[(perm[i], perm[j])] / h[(i, j)];
                theta[i] = Some(theta[j].unwrap() + ratio.arg());
                queue.push_back(i);
            }
        }
    }
    let theta: Vec<f64> = theta.into_iter().map(|t| t.unwrap_or(0.0)).collect();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let gauged = Complex64::from_polar(1.0, theta[i] - theta[j]) * h[(i, j)];
            worst = worst.max((h[(perm[i], perm[j])] - gauged).norm());
        }
    }
    Ok(worst)
}

/// Classify the centre under parity `p`.
///
/// A PT-symmetric centre is `AxialPT` when `p` fixes both attachment sites and
/// `ReflectionPT` when it swaps them. The identity parity never yields a PT
/// kind (PT reduces to T). Otherwise plain P, then plain T, is reported.
pub fn classify_pt(c: &ScatteringCenter, p: &ParityMap) -> Result<PtClassification> {
    let perm = check_parity(c, p)?;
    let h = c.hamiltonian();
    let pt_residual = permuted_residual(&h, &perm, true);
    let p_residual = permuted_residual(&h, &perm, false);
    let identity: Vec<usize> = (0..perm.len()).collect();
    let t_residual = permuted_residual(&h, &identity, true);

    let (l, r) = (c.attach_left.as_str(), c.attach_right.as_str());
    let fixes = p.image(l) == l && p.image(r) == r;
    let swaps = p.image(l) == r && p.image(r) == l;

    let (kind, residual) = if pt_residual < SYMMETRY_TOL && !p.is_identity() && fixes {
        (PtKind::AxialPT, pt_residual)
    } else if pt_residual < SYMMETRY_TOL && swaps {
        (PtKind::ReflectionPT, pt_residual)
    } else if p_residual < SYMMETRY_TOL && !p.is_identity() {
        (PtKind::PSymmetric, p_residual)
    } else if t_residual < SYMMETRY_TOL {
        (PtKind::TSymmetric, t_residual)
    } else {
        (PtKind::None, pt_residual)
    };
    Ok(PtClassification {
        kind,
        parity: p.clone(),
        residual,
        pt_residual,
        p_residual,
        t_residual,
    })
}

fn involutions(n: usize) -> Vec<Vec<usize>> {
    fn extend(perm: &mut Vec<Option<usize>>, out: &mut Vec<Vec<usize>>) {
        let Some(i) = perm.iter().position(Option::is_none) else {
            out.push(perm.iter().map(|x| x.unwrap()).collect());
            return;
        };
        perm[i] = Some(i);
        extend(perm, out);
        for j in i + 1..perm.len() {
            if perm[j].is_none() {
                perm[i] = Some(j);
                perm[j] = Some(i);
                extend(perm, out);
                perm[j] = None;
            }
        }
        perm[i] = None;
    }
    let mut out = Vec::new();
    extend(&mut vec![None; n], &mut out);
    out
}

/// Every non-identity involution under which the centre is PT-symmetric,
/// classified. Brute force over all involutions of the site set.
pub fn find_parity_maps(c: &ScatteringCenter) -> Result<Vec<(ParityMap, PtClassification)>> {
    c.ensure_valid()?;
    if c.len() > MAX_PARITY_SEARCH_SITES {
        return Err(Error::SizeLimit {
            sites: c.len(),
            max: MAX_PARITY_SEARCH_SITES,
        });
    }
    let h = c.hamiltonian();
    let mut out = Vec::new();
    for perm in involutions(c.len()) {
        if perm.iter().enumerate().all(|(i, &j)| i == j) {
            continue;
        }
        if permuted_residual(&h, &perm, true) >= SYMMETRY_TOL {
            continue;
        }
        let images: BTreeMap<String, String> = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| (c.sites[i].clone(), c.sites[j].clone()))
            .collect();
        let p = ParityMap::from_images(images);
        let class = classify_pt(c, &p)?;
        out.push((p, class));
    }
    Ok(out)
}

/// Residuals of the two primary relations and the two auxiliary ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationResiduals {
    pub names: [&'static str; 4],
    pub values: [f64; 4],
}

impl RelationResiduals {
    pub fn primary(&self) -> [f64; 2] {
        [self.values[0], self.values[1]]
    }

    pub fn auxiliary(&self) -> [f64; 2] {
        [self.values[2], self.values[3]]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.names.iter().copied().zip(self.values.iter().copied())
    }

    /// First relation whose residual is not below `tol`.
    pub fn first_failure(&self, tol: f64) -> Option<(&'static str, f64)> {
        self.iter().find(|(_, v)| !(*v < tol))
    }
}

/// Axial PT relations:
/// `|r_L|^2 + t_R t_L* = 1`, `|r_R|^2 + t_L t_R* = 1`,
/// `r_L* t_L + r_R t_L* = 0`, `r_R* t_R + r_L t_R* = 0`.
pub fn verify_axial_relations(sc: &ScatteringCoefficients) -> RelationResiduals {
    let (rl, tl, rr, tr) = (sc.r_left, sc.t_left, sc.r_right, sc.t_right);
    RelationResiduals {
        names: [
            "|rL|^2 + tR tL* = 1",
            "|rR|^2 + tL tR* = 1",
            "rL* tL + rR tL* = 0",
            "rR* tR + rL tR* = 0",
        ],
        values: [
            (rl.norm_sqr() + tr * tl.conj() - 1.0).norm(),
            (rr.norm_sqr() + tl * tr.conj() - 1.0).norm(),
            (rl.conj() * tl + rr * tl.conj()).norm(),
            (rr.conj() * tr + rl * tr.conj()).norm(),
        ],
    }
}

/// Reflection PT relations:
/// `|t_L|^2 + r_R r_L* = 1`, `|t_R|^2 + r_L r_R* = 1`,
/// `r_L t_L* + r_L* t_R = 0`, `r_R* t_L + r_R t_R* = 0`.
pub fn verify_reflection_relations(sc: &ScatteringCoefficients) -> RelationResiduals {
    let (rl, tl, rr, tr) = (sc.r_left, sc.t_left, sc.r_right, sc.t_right);
    RelationResiduals {
        names: [
            "|tL|^2 + rR rL* = 1",
            "|tR|^2 + rL rR* = 1",
            "rL tL* + rL* tR = 0",
            "rR* tL + rR tR* = 0",
        ],
        values: [
            (tl.norm_sqr() + rr * rl.conj() - 1.0).norm(),
            (tr.norm_sqr() + rl * rr.conj() - 1.0).norm(),
            (rl * tl.conj() + rl.conj() * tr).norm(),
            (rr.conj() * tl + rr * tr.conj()).norm(),
        ],
    }
}
