//! Meet of truncated position and momentum.
//!
//! `Q = √(ħ/2)(a + a†)` and `P = i√(ħ/2)(a† − a)` with `a` the `n×n` lowering
//! matrix. The two are unitarily equivalent (`P = D Q D†` with
//! `D = diag(i^k)`), so every eigenvalue of Q is one of P, yet no eigenline is
//! shared and the meet is zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::meet;
use crate::linalg::{self, c, CMat};
use crate::observable::{match_threshold, Observable};
use crate::spectral::{overlap, proj_meet};
use crate::tolerance::Tolerances;

/// Lowering matrix with `a[i, i+1] = √(i+1)`.
pub fn lowering(n: usize) -> CMat {
    let mut a = linalg::zeros(n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = c(((i + 1) as f64).sqrt(), 0.0);
    }
    a
}

/// `(Q, P)` as raw matrices.
pub fn truncated_oscillator(n: usize, hbar: f64) -> (CMat, CMat) {
    let a = lowering(n);
    let ad = a.adjoint();
    let s = (hbar / 2.0).sqrt();
    let q = (&a + &ad).scale(s);
    let p = (&ad - &a) * c(0.0, s);
    (q, p)
}

/// One value-matched pair of eigenspaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomPairMeet {
    pub q_value: f64,
    pub p_value: f64,
    pub q_rank: usize,
    pub p_rank: usize,
    pub meet_rank: usize,
    /// Largest principal cosine between the two eigenspaces.
    pub cosine: f64,
}

/// How far `QP − PQ` is from `iħI`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorDefect {
    /// `‖QP − PQ − iħI‖`
    pub norm: f64,
    /// Entry `(n−1, n−1)` of `QP − PQ`, as `[re, im]`; `iħ(1 − n)` exactly.
    pub corner: [f64; 2],
    /// Largest deviation from `iħI` outside the corner entry.
    pub off_corner: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeisenbergReport {
    pub n: usize,
    pub hbar: f64,
    pub meet_norm: f64,
    pub meet_is_zero: bool,
    pub q_atoms: usize,
    pub p_atoms: usize,
    pub matched: Vec<AtomPairMeet>,
    /// Atom pairs (any values) whose projection meet is nonzero.
    pub nonzero_intersections: usize,
    pub pairs_checked: usize,
    pub commutator: CommutatorDefect,
    pub note: String,
}

const NOTE: &str = "Q and P are n-level truncations. Their commutator equals iħ·I except in the last \
diagonal entry, which is iħ(1−n); no pair of finite matrices satisfies the canonical relation, because \
the trace of a commutator is zero. The demo therefore checks only that the meet construction returns 0 \
on this pair: the spectra coincide, every value is matched, and every matched pair of eigenspaces \
intersects trivially. It does not reproduce the unbounded-operator argument, and whether a finite-\
dimensional statement captures more of it is left open.";

/// Builds Q and P, computes `Q ∧ P`, and returns its operator norm together
/// with the per-atom evidence.
pub fn heisenberg_demo(n: usize, hbar: f64, tol: &Tolerances) -> Result<(f64, HeisenbergReport)> {
    if n < 2 {
        return Err(Error::PreconditionFailed(format!("n must be at least 2, got {n}")));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::PreconditionFailed(format!("hbar must be positive, got {hbar}")));
    }
    let (qm, pm) = truncated_oscillator(n, hbar);
    let q = Observable::from_matrix(qm.clone(), tol)?;
    let p = Observable::from_matrix(pm.clone(), tol)?;
    let m = meet(&q, &p)?;
    let meet_norm = m.norm();

    let threshold = match_threshold(&q, &p);
    let mut matched = Vec::new();
    let mut nonzero = 0;
    let mut pairs = 0;
    for qa in q.decomp().atoms() {
        for pa in p.decomp().atoms() {
            let r = proj_meet(&qa.proj, &pa.proj, tol)?.rank();
            pairs += 1;
            if r > 0 {
                nonzero += 1;
            }
            if (qa.value - pa.value).abs() <= threshold {
                matched.push(AtomPairMeet {
                    q_value: qa.value,
                    p_value: pa.value,
                    q_rank: qa.proj.rank(),
                    p_rank: pa.proj.rank(),
                    meet_rank: r,
                    cosine: overlap(&qa.proj, &pa.proj),
                });
            }
        }
    }

    let comm = &qm * &pm - &pm * &qm;
    let target = linalg::identity(n) * c(0.0, hbar);
    let defect = &comm - &target;
    let mut off = defect.clone();
    off[(n - 1, n - 1)] = linalg::ZERO;
    let corner = comm[(n - 1, n - 1)];

    let report = HeisenbergReport {
        n,
        hbar,
        meet_norm,
        meet_is_zero: m.is_zero(),
        q_atoms: q.decomp().atoms().len(),
        p_atoms: p.decomp().atoms().len(),
        matched,
        nonzero_intersections: nonzero,
        pairs_checked: pairs,
        commutator: CommutatorDefect {
            norm: linalg::op_norm(&defect),
            corner: [corner.re, corner.im],
            off_corner: linalg::op_norm(&off),
        },
        note: NOTE.to_string(),
    };
    Ok((meet_norm, report))
}
