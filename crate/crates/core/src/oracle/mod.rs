//! Exact model of commuting observables: integer-valued functions on a finite
//! index set.
//!
//! Everything here is integer arithmetic and set enumeration. Nothing in this
//! module calls into the floating-point lattice code, so it can serve as an
//! independent check on it. [`embed`] is the only bridge back to matrices.

pub mod differential;
pub mod partitions;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::observable::Observable;
use crate::tolerance::Tolerances;

pub use partitions::{bell, rgs_refines, set_partitions, RestrictedGrowth};

/// Default limit on distinct nonzero atoms for exhaustive partition enumeration.
pub const ENUMERATION_LIMIT: usize = 5;

/// A diagonal observable with integer eigenvalues; `values[i]` sits on `e_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagonalObservable {
    values: Vec<i64>,
}

impl DiagonalObservable {
    pub fn new(values: Vec<i64>) -> Self {
        Self { values }
    }

    pub fn zero(dim: usize) -> Self {
        Self { values: vec![0; dim] }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn nonzero_atoms(&self) -> BTreeSet<i64> {
        self.values.iter().copied().filter(|&v| v != 0).collect()
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

impl From<Vec<i64>> for DiagonalObservable {
    fn from(values: Vec<i64>) -> Self {
        Self::new(values)
    }
}

/// `a ⊥ b` iff `a[i]·b[i] = 0` everywhere.
pub fn oracle_orthogonal(a: &DiagonalObservable, b: &DiagonalObservable) -> Result<bool> {
    a.check_len(b)?;
    Ok(a.values.iter().zip(&b.values).all(|(&x, &y)| x * y == 0))
}

/// `a ⪯ b` iff `a[i]² = b[i]·a[i]` everywhere, i.e. `a[i] ∈ {0, b[i]}`.
pub fn oracle_leq(a: &DiagonalObservable, b: &DiagonalObservable) -> Result<bool> {
    a.check_len(b)?;
    Ok(a.values.iter().zip(&b.values).all(|(&x, &y)| x * x == y * x))
}

/// Closed-form meet: keep the coordinates where both agree.
pub fn oracle_meet_closed_form(a: &DiagonalObservable, b: &DiagonalObservable) -> Result<DiagonalObservable> {
    a.check_len(b)?;
    Ok(DiagonalObservable::new(
        a.values
            .iter()
            .zip(&b.values)
            .map(|(&x, &y)| if x == y { x } else { 0 })
            .collect(),
    ))
}

/// Coordinates selected by `Σ_{Δ' ∈ γ} P^a(Δ') ∧ P^b(Δ')` for one partition
/// `γ`. For diagonal observables `P^a(Δ') ∧ P^b(Δ')` is the set of coordinates
/// with `a[i] ∈ Δ'` and `b[i] ∈ Δ'`.
pub fn partition_mask(a: &DiagonalObservable, b: &DiagonalObservable, blocks: &[Vec<i64>]) -> Vec<bool> {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| blocks.iter().any(|blk| blk.contains(x) && blk.contains(y)))
        .collect()
}

/// Result of the literal partition-infimum evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BruteForceMeet {
    pub meet: DiagonalObservable,
    /// Distinct nonzero atoms in `a` and `b` combined.
    pub atoms: Vec<i64>,
    pub partitions_enumerated: u64,
}

/// Meet by literal enumeration: intersect, over every partition of the
/// combined nonzero atom set, the block-sum of coordinatewise projection meets.
pub fn oracle_meet_bruteforce(a: &DiagonalObservable, b: &DiagonalObservable) -> Result<DiagonalObservable> {
    Ok(oracle_meet_bruteforce_detailed(a, b, ENUMERATION_LIMIT)?.meet)
}

pub fn oracle_meet_bruteforce_detailed(
    a: &DiagonalObservable,
    b: &DiagonalObservable,
    limit: usize,
) -> Result<BruteForceMeet> {
    a.check_len(b)?;
    let atoms: Vec<i64> = a.nonzero_atoms().union(&b.nonzero_atoms()).copied().collect();
    if atoms.len() > limit {
        return Err(Error::TooManyAtoms {
            count: atoms.len(),
            limit,
        });
    }
    let mut survivors = vec![true; a.dim()];
    let mut count = 0u64;
    for blocks in set_partitions(&atoms) {
        count += 1;
        let mask = partition_mask(a, b, &blocks);
        for (s, m) in survivors.iter_mut().zip(mask) {
            *s &= m;
        }
    }
    let values = a
        .values
        .iter()
        .zip(&survivors)
        .map(|(&x, &keep)| if keep { x } else { 0 })
        .collect();
    Ok(BruteForceMeet {
        meet: DiagonalObservable::new(values),
        atoms,
        partitions_enumerated: count,
    })
}

/// Join, or the first coordinate where `a` and `b` carry different nonzero values.
pub fn oracle_join(a: &DiagonalObservable, b: &DiagonalObservable) -> Result<DiagonalObservable> {
    a.check_len(b)?;
    let mut values = Vec::with_capacity(a.dim());
    for (i, (&x, &y)) in a.values.iter().zip(&b.values).enumerate() {
        if x != 0 && y != 0 && x != y {
            return Err(Error::NoUpperBoundAt { coordinate: i, a: x, b: y });
        }
        values.push(if x != 0 { x } else { y });
    }
    Ok(DiagonalObservable::new(values))
}

/// Refinement monotonicity over every pair of partitions of the combined atom set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefinementCheck {
    pub partitions: u64,
    pub refinement_pairs: u64,
    pub violations: u64,
}

/// For each pair `(γ', γ)` with `γ'` refining `γ`, checks that the mask of
/// `γ'` is contained in the mask of `γ`.
pub fn check_refinement_monotonicity(a: &DiagonalObservable, b: &DiagonalObservable) -> Result<RefinementCheck> {
    a.check_len(b)?;
    let atoms: Vec<i64> = a.nonzero_atoms().union(&b.nonzero_atoms()).copied().collect();
    if atoms.len() > ENUMERATION_LIMIT {
        return Err(Error::TooManyAtoms {
            count: atoms.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let all: Vec<(Vec<usize>, Vec<bool>)> = RestrictedGrowth::new(atoms.len())
        .map(|rgs| {
            let mask = partition_mask(a, b, &partitions::blocks_of(&atoms, &rgs));
            (rgs, mask)
        })
        .collect();
    let mut pairs = 0;
    let mut violations = 0;
    for (fine, fine_mask) in &all {
        for (coarse, coarse_mask) in &all {
            if rgs_refines(fine, coarse) {
                pairs += 1;
                if fine_mask.iter().zip(coarse_mask).any(|(&f, &c)| f && !c) {
                    violations += 1;
                }
            }
        }
    }
    Ok(RefinementCheck {
        partitions: all.len() as u64,
        refinement_pairs: pairs,
        violations,
    })
}

/// `U · diag(a) · U†` as an [`Observable`]; identity conjugation when `u` is `None`.
pub fn embed(a: &DiagonalObservable, u: Option<&CMat>, tol: &Tolerances) -> Result<Observable> {
    let values: Vec<f64> = a.values.iter().map(|&v| v as f64).collect();
    let d = linalg::real_diag(&values);
    let m = match u {
        None => d,
        Some(u) => {
            if u.nrows() != a.dim() || u.ncols() != a.dim() {
                return Err(Error::DimensionMismatch {
                    left: a.dim(),
                    right: u.nrows(),
                });
            }
            let residual = linalg::unitarity_residual(u);
            if residual > tol.proj_tol {
                return Err(Error::NotUnitary { residual });
            }
            let m = u * d * u.adjoint();
            (&m + m.adjoint()).scale(0.5)
        }
    };
    Observable::from_matrix(m, tol)
}
