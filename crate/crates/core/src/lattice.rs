//! Infimum and supremum of observables under `⪯`, built atom by atom from
//! the projection lattice.
//!
//! Every spectral measure here is atomic, so the infimum over all Borel
//! partitions that defines the meet's spectral measure is attained at the
//! partition into single atoms. [`meet`] uses that closed form;
//! [`partition_infimum`] evaluates the infimum literally for cross-checking.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::observable::{family_match_threshold, is_orthogonal, match_threshold, Observable};
use crate::oracle::partitions::set_partitions;
use crate::spectral::{
    overlap, proj_join, proj_meet, reconstruct, spectral_projection, BorelSet, Partition, Projection,
};
use crate::tolerance::Tolerances;

/// Builds an observable from nonzero atoms and an explicit or implied zero atom.
fn assemble(dim: usize, mut atoms: Vec<(f64, Projection)>, zero: Option<Projection>, tol: &Tolerances) -> Result<Observable> {
    let zero = zero.unwrap_or_else(|| Projection::orthogonal_sum(dim, atoms.iter().map(|(_, p)| p)).complement());
    atoms.push((0.0, zero));
    let h = reconstruct(&atoms, tol)?;
    Observable::new(h, tol)
}

fn check_family(family: &[Observable]) -> Result<()> {
    let first = family.first().ok_or(Error::EmptyFamily)?;
    for o in &family[1..] {
        first.check_dim(o)?;
    }
    Ok(())
}

/// `A ∧ B`: for each nonzero value shared by A and B, the value times
/// `P^A({λ}) ∧ P^B({λ})`; the zero atom takes the rest.
pub fn meet(a: &Observable, b: &Observable) -> Result<Observable> {
    a.check_dim(b)?;
    let tol = a.tolerances();
    let threshold = match_threshold(a, b);
    let mut atoms = Vec::new();
    for pa in a.nonzero_atoms() {
        let Some(pb) = b.matched_atom(pa.value, threshold) else {
            continue;
        };
        if pb.value == 0.0 {
            continue;
        }
        let r = proj_meet(&pa.proj, &pb.proj, tol)?;
        if !r.is_zero() {
            atoms.push((0.5 * (pa.value + pb.value), r));
        }
    }
    assemble(a.dim(), atoms, None, tol)
}

/// Meet of a finite nonempty family.
pub fn meet_family(family: &[Observable]) -> Result<Observable> {
    check_family(family)?;
    if family.len() == 1 {
        return Ok(family[0].clone());
    }
    let first = &family[0];
    let tol = first.tolerances();
    let threshold = family_match_threshold(family);
    let mut atoms = Vec::new();
    'atoms: for pa in first.nonzero_atoms() {
        let mut proj = pa.proj.clone();
        let mut sum = pa.value;
        for other in &family[1..] {
            let Some(po) = other.matched_atom(pa.value, threshold) else {
                continue 'atoms;
            };
            if po.value == 0.0 {
                continue 'atoms;
            }
            proj = proj_meet(&proj, &po.proj, tol)?;
            sum += po.value;
            if proj.is_zero() {
                continue 'atoms;
            }
        }
        atoms.push((sum / family.len() as f64, proj));
    }
    assemble(first.dim(), atoms, None, tol)
}

/// Whether `P^A({λ}) P^B({μ}) = 0` for every pair of distinct nonzero values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JoinPrecondition {
    pub holds: bool,
    /// First offending `(λ, μ)`, with `λ` an atom of A and `μ` of B.
    pub violating_pair: Option<(f64, f64)>,
    /// `‖P^A({λ}) P^B({μ})‖` for the offending pair.
    pub overlap: f64,
}

pub fn join_precondition(a: &Observable, b: &Observable) -> Result<JoinPrecondition> {
    a.check_dim(b)?;
    let tol = a.tolerances().proj_tol;
    let threshold = match_threshold(a, b);
    for pa in a.nonzero_atoms() {
        for pb in b.nonzero_atoms() {
            if (pa.value - pb.value).abs() <= threshold {
                continue;
            }
            let ov = overlap(&pa.proj, &pb.proj);
            if ov > tol + pa.resolution + pb.resolution {
                return Ok(JoinPrecondition {
                    holds: false,
                    violating_pair: Some((pa.value, pb.value)),
                    overlap: ov,
                });
            }
        }
    }
    Ok(JoinPrecondition {
        holds: true,
        violating_pair: None,
        overlap: 0.0,
    })
}

fn no_upper_bound(pre: &JoinPrecondition) -> Error {
    let (lambda, mu) = pre.violating_pair.unwrap_or((f64::NAN, f64::NAN));
    Error::NoUpperBound {
        lambda,
        mu,
        overlap: pre.overlap,
    }
}

/// `A ∨ B`: each nonzero value λ of either carries `P^A({λ}) ∨ P^B({λ})`, and
/// the zero atom is `N_A ∧ N_B`. Fails with [`Error::NoUpperBound`] when the
/// pair has no common upper bound.
pub fn join(a: &Observable, b: &Observable) -> Result<Observable> {
    let pre = join_precondition(a, b)?;
    if !pre.holds {
        return Err(no_upper_bound(&pre));
    }
    let tol = a.tolerances();
    let threshold = match_threshold(a, b);
    let b_atoms: Vec<_> = b.nonzero_atoms().collect();
    let mut used = vec![false; b_atoms.len()];
    let mut atoms = Vec::new();
    for pa in a.nonzero_atoms() {
        let hit = b_atoms
            .iter()
            .enumerate()
            .filter(|(_, pb)| (pa.value - pb.value).abs() <= threshold)
            .min_by(|x, y| (pa.value - x.1.value).abs().total_cmp(&(pa.value - y.1.value).abs()));
        match hit {
            Some((j, pb)) => {
                used[j] = true;
                atoms.push((0.5 * (pa.value + pb.value), proj_join(&pa.proj, &pb.proj, tol)?));
            }
            None => atoms.push((pa.value, pa.proj.clone())),
        }
    }
    for (pb, _) in b_atoms.iter().zip(&used).filter(|(_, &u)| !u) {
        atoms.push((pb.value, pb.proj.clone()));
    }
    let zero = proj_meet(a.null_projection(), b.null_projection(), tol)?;
    assemble(a.dim(), atoms, Some(zero), tol)
}

/// Join of a finite nonempty family; every pair must satisfy the join
/// precondition.
pub fn join_family(family: &[Observable]) -> Result<Observable> {
    check_family(family)?;
    if family.len() == 1 {
        return Ok(family[0].clone());
    }
    for (i, x) in family.iter().enumerate() {
        for y in &family[i + 1..] {
            let pre = join_precondition(x, y)?;
            if !pre.holds {
                return Err(no_upper_bound(&pre));
            }
        }
    }
    let tol = family[0].tolerances();
    let threshold = family_match_threshold(family);
    let mut entries: Vec<(f64, &Projection)> = family
        .iter()
        .flat_map(|o| o.nonzero_atoms().map(|a| (a.value, &a.proj)))
        .collect();
    entries.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut atoms = Vec::new();
    let mut start = 0;
    while start < entries.len() {
        let mut end = start + 1;
        while end < entries.len() && entries[end].0 - entries[end - 1].0 <= threshold {
            end += 1;
        }
        let group = &entries[start..end];
        let value = group.iter().map(|e| e.0).sum::<f64>() / group.len() as f64;
        let mut proj = group[0].1.clone();
        for e in &group[1..] {
            proj = proj_join(&proj, e.1, tol)?;
        }
        atoms.push((value, proj));
        start = end;
    }
    let mut zero = family[0].null_projection().clone();
    for o in &family[1..] {
        zero = proj_meet(&zero, o.null_projection(), tol)?;
    }
    assemble(family[0].dim(), atoms, Some(zero), tol)
}

/// `Σ_{Δ_i ∈ γ} P^A(Δ_i) ∧ P^B(Δ_i)` for one partition `γ`.
pub fn partition_meet_sum(a: &Observable, b: &Observable, partition: &Partition) -> Result<Projection> {
    a.check_dim(b)?;
    let tol = a.tolerances();
    let mut parts = Vec::with_capacity(partition.blocks().len());
    for block in partition.blocks() {
        let pa = spectral_projection(a.decomp(), block);
        let pb = spectral_projection(b.decomp(), block);
        parts.push(proj_meet(&pa, &pb, tol)?);
    }
    Ok(Projection::orthogonal_sum(a.dim(), parts.iter()))
}

/// The meet's spectral projection for a zero-free set `delta`, computed as the
/// infimum over every partition of `delta`. Returns the projection and the
/// number of partitions visited.
pub fn partition_infimum(a: &Observable, b: &Observable, delta: &BorelSet) -> Result<(Projection, usize)> {
    if delta.contains_zero() {
        return Err(Error::PreconditionFailed("partition infimum needs a set without 0".into()));
    }
    let tol = a.tolerances();
    let mut acc = Projection::identity(a.dim());
    let mut count = 0;
    for blocks in set_partitions(delta.atoms()) {
        let blocks = blocks.into_iter().map(|b| BorelSet::new(b, tol)).collect();
        let gamma = Partition::new(delta.clone(), blocks)?;
        acc = proj_meet(&acc, &partition_meet_sum(a, b, &gamma)?, tol)?;
        count += 1;
    }
    if count == 0 || delta.is_empty() {
        return Ok((Projection::zero(a.dim()), count));
    }
    Ok((acc, count))
}

/// A unitary `U` with `U†AU` and `U†BU` both diagonal, for `A ⊥ B`.
///
/// Columns are the eigenvectors of A's nonzero atoms, then B's, then a basis
/// of the common null space. Each column is rotated so its largest entry is
/// real and positive, and columns are ordered by the row of that entry.
pub fn common_abelian_witness(a: &Observable, b: &Observable) -> Result<CMat> {
    let report = is_orthogonal(a, b)?;
    if !report.verdict || !report.ab_zero || !report.ba_zero {
        return Err(Error::NotOrthogonal);
    }
    let n = a.dim();
    let common_null = Projection::orthogonal_sum(n, [a.range_projection(), b.range_projection()]).complement();
    let mut blocks: Vec<&CMat> = a.nonzero_atoms().map(|x| x.proj.basis()).collect();
    blocks.extend(b.nonzero_atoms().map(|x| x.proj.basis()));
    blocks.push(common_null.basis());
    let u = linalg::hstack(n, &blocks);
    if u.ncols() != n {
        return Err(Error::InvalidResolution(format!(
            "collected {} basis vectors in dimension {n}",
            u.ncols()
        )));
    }
    Ok(canonical_columns(u))
}

fn canonical_columns(u: CMat) -> CMat {
    let n = u.nrows();
    let mut cols: Vec<(usize, Vec<Complex64>)> = (0..u.ncols())
        .map(|j| {
            let col: Vec<Complex64> = u.column(j).iter().copied().collect();
            let mut pivot = 0;
            for i in 1..n {
                if col[i].norm() > col[pivot].norm() + 1e-12 {
                    pivot = i;
                }
            }
            let phase = col[pivot].conj() / col[pivot].norm();
            (pivot, col.into_iter().map(|z| z * phase).collect())
        })
        .collect();
    cols.sort_by_key(|(pivot, _)| *pivot);
    CMat::from_fn(n, cols.len(), |i, j| cols[j].1[i])
}

/// Residuals certifying a joint diagonalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessResiduals {
    pub unitarity: f64,
    pub off_diagonal_a: f64,
    pub off_diagonal_b: f64,
    pub ab_norm: f64,
    pub ba_norm: f64,
}

pub fn witness_residuals(a: &Observable, b: &Observable, u: &CMat) -> WitnessResiduals {
    let ua = u.adjoint() * a.matrix() * u;
    let ub = u.adjoint() * b.matrix() * u;
    WitnessResiduals {
        unitarity: linalg::unitarity_residual(u),
        off_diagonal_a: linalg::off_diagonal_norm(&ua),
        off_diagonal_b: linalg::off_diagonal_norm(&ub),
        ab_norm: linalg::op_norm(&(a.matrix() * b.matrix())),
        ba_norm: linalg::op_norm(&(b.matrix() * a.matrix())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::observable::leq;

    fn t() -> Tolerances {
        Tolerances::default()
    }

    fn diag(v: &[f64]) -> Observable {
        Observable::diagonal(v, &t()).unwrap()
    }

    fn line(n: usize, v: &[f64], value: f64) -> Observable {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let col = CMat::from_fn(n, 1, |i, _| c(v[i] / norm, 0.0));
        Observable::from_matrix((&col * col.adjoint()).scale(value), &t()).unwrap()
    }

    fn close(a: &Observable, b: &Observable) -> bool {
        linalg::op_norm(&(a.matrix() - b.matrix())) <= 1e-12
    }

    #[test]
    fn meet_examples() {
        assert!(close(&meet(&diag(&[1.0, 1.0, 0.0]), &diag(&[1.0, 2.0, 0.0])).unwrap(), &diag(&[1.0, 0.0, 0.0])));
        let a = diag(&[3.0, -1.0, -1.0, 0.0]);
        assert!(close(&meet(&a, &a).unwrap(), &a));
        let m = meet(&line(2, &[1.0, 0.0], 1.0), &line(2, &[1.0, 1.0], 1.0)).unwrap();
        assert!(m.is_zero());
    }

    #[test]
    fn meet_family_examples() {
        let a = diag(&[1.0, -2.0, 0.0]);
        assert!(close(&meet_family(std::slice::from_ref(&a)).unwrap(), &a));
        let fam = [diag(&[1.0, 1.0, 0.0]), diag(&[1.0, 2.0, 0.0]), diag(&[1.0, 0.0, 7.0])];
        assert!(close(&meet_family(&fam).unwrap(), &diag(&[1.0, 0.0, 0.0])));
        assert_eq!(meet_family(&[]).unwrap_err(), Error::EmptyFamily);
        assert!(matches!(
            meet_family(&[diag(&[1.0]), diag(&[1.0, 0.0])]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn join_precondition_examples() {
        assert!(join_precondition(&diag(&[1.0, 0.0, 0.0]), &diag(&[0.0, 2.0, 0.0])).unwrap().holds);
        let p = join_precondition(&diag(&[1.0, 1.0, 0.0]), &diag(&[1.0, 2.0, 0.0])).unwrap();
        assert!(!p.holds);
        assert_eq!(p.violating_pair, Some((1.0, 2.0)));
        let a = diag(&[1.0, 2.0, -3.0]);
        assert!(join_precondition(&a, &a).unwrap().holds);
    }

    #[test]
    fn join_examples() {
        let j = join(&diag(&[1.0, 0.0, 0.0]), &diag(&[0.0, 2.0, 0.0])).unwrap();
        assert!(close(&j, &diag(&[1.0, 2.0, 0.0])));
        match join(&diag(&[1.0, 1.0, 0.0]), &diag(&[1.0, 2.0, 0.0])) {
            Err(Error::NoUpperBound { lambda, mu, .. }) => assert_eq!((lambda, mu), (1.0, 2.0)),
            other => panic!("expected NoUpperBound, got {other:?}"),
        }
        let a = diag(&[1.0, 0.0, 0.0]);
        assert!(close(&join(&a, &a).unwrap(), &a));
    }

    #[test]
    fn join_family_examples() {
        let a = diag(&[1.0, 0.0, 2.0]);
        assert!(close(&join_family(std::slice::from_ref(&a)).unwrap(), &a));
        let fam = [diag(&[1.0, 0.0, 0.0, 0.0]), diag(&[0.0, 2.0, 0.0, 0.0]), diag(&[0.0, 0.0, 3.0, 0.0])];
        assert!(close(&join_family(&fam).unwrap(), &diag(&[1.0, 2.0, 3.0, 0.0])));
        let bad = [diag(&[1.0, 0.0]), diag(&[0.0, 2.0]), diag(&[3.0, 0.0])];
        assert!(matches!(join_family(&bad), Err(Error::NoUpperBound { .. })));
        assert_eq!(join_family(&[]).unwrap_err(), Error::EmptyFamily);
    }

    #[test]
    fn meet_is_lower_bound_and_join_upper_bound() {
        let a = diag(&[1.0, 1.0, 2.0, 0.0]);
        let b = diag(&[1.0, 0.0, 2.0, 5.0]);
        let m = meet(&a, &b).unwrap();
        assert!(leq(&m, &a).unwrap().verdict && leq(&m, &b).unwrap().verdict);
        let j = join(&a, &b).unwrap();
        assert!(close(&j, &diag(&[1.0, 1.0, 2.0, 5.0])));
        assert!(leq(&a, &j).unwrap().verdict && leq(&b, &j).unwrap().verdict);
    }

    #[test]
    fn partition_infimum_matches_closed_form() {
        let a = diag(&[1.0, 1.0, 2.0, 3.0, 0.0]);
        let b = diag(&[1.0, 2.0, 2.0, 1.0, 3.0]);
        let delta = BorelSet::of(&[1.0, 2.0, 3.0]);
        let (p, count) = partition_infimum(&a, &b, &delta).unwrap();
        assert_eq!(count, 5);
        let m = meet(&a, &b).unwrap();
        let closed = spectral_projection(m.decomp(), &delta);
        assert!(linalg::op_norm(&(p.matrix() - closed.matrix())) < 1e-12);
        assert_eq!(p.rank(), 2);

        let coarse = partition_meet_sum(&a, &b, &Partition::trivial(delta.clone())).unwrap();
        assert_eq!(coarse.rank(), 4);
        assert!(partition_infimum(&a, &b, &BorelSet::of(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn witness_examples() {
        let a = diag(&[1.0, 0.0, 0.0]);
        let b = diag(&[0.0, 2.0, 0.0]);
        let u = common_abelian_witness(&a, &b).unwrap();
        assert_eq!(u, linalg::identity(3));

        let z = Observable::zero(2, &t()).unwrap();
        let b = Observable::from_matrix(CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, -2.0), c(0.0, 2.0), c(1.0, 0.0)]), &t()).unwrap();
        let u = common_abelian_witness(&z, &b).unwrap();
        let r = witness_residuals(&z, &b, &u);
        assert!(r.unitarity < 1e-12 && r.off_diagonal_b < 1e-12);

        assert_eq!(common_abelian_witness(&diag(&[1.0, 0.0]), &diag(&[1.0, 1.0])), Err(Error::NotOrthogonal));
    }
}
