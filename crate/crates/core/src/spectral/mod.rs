//! Hermitian matrices, their atomic spectral measures, and the projection lattice.

mod borel;
mod projection;

pub use borel::{BorelSet, BorelSpec, Partition};
pub use projection::{overlap, proj_join, proj_leq, proj_meet, Projection};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::tolerance::Tolerances;

/// A square complex matrix equal to its conjugate transpose.
///
/// Construction symmetrizes the input as `(M + M†)/2` after checking that the
/// discarded anti-Hermitian part is below `hermitian_tol · max(1, ‖M‖)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    pub fn new(m: CMat, tol: &Tolerances) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotHermitian {
                residual: f64::INFINITY,
                tol: tol.hermitian_tol,
            });
        }
        let anti = (&m - m.adjoint()).scale(0.5);
        let residual = linalg::op_norm(&anti);
        let bound = tol.hermitian_tol * linalg::op_norm(&m).max(1.0);
        if residual > bound {
            return Err(Error::NotHermitian { residual, tol: bound });
        }
        Ok(Self((&m + m.adjoint()).scale(0.5)))
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "dimension must be at least 1");
        Self(linalg::real_diag(values))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be at least 1");
        Self(linalg::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    /// Operator norm.
    pub fn norm(&self) -> f64 {
        linalg::hermitian_norm(&self.0)
    }

    /// `U · H · U†`.
    pub fn conjugate_by(&self, u: &CMat) -> Self {
        let m = u * &self.0 * u.adjoint();
        Self((&m + m.adjoint()).scale(0.5))
    }

    pub(crate) fn from_hermitian_unchecked(m: CMat) -> Self {
        Self(m)
    }
}

/// An eigenvalue together with its spectral projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub proj: Projection,
    /// Bound on the angle between `proj` and the exact eigenprojection:
    /// `2·n·ε·max(1,‖H‖) / gap`, with `gap` the distance to the nearest other
    /// atom value. Zero for a lone atom.
    pub resolution: f64,
}

/// A chain cluster whose total spread exceeded the merge threshold, so a
/// diameter-bounded clustering would have split it differently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterAmbiguity {
    pub lo: f64,
    pub hi: f64,
    pub threshold: f64,
}

/// Atomic spectral measure of a Hermitian matrix: strictly increasing atom
/// values with mutually orthogonal projections summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    dim: usize,
    atoms: Vec<Atom>,
    norm: f64,
    tol: Tolerances,
    ambiguities: Vec<ClusterAmbiguity>,
}

/// Spectral decomposition with eigenvalue clustering.
///
/// Eigenvalues are sorted ascending; those with `|λ| ≤ zero_abs·max(1,‖H‖)`
/// are snapped to zero, then neighbours whose gap is at most
/// `cluster_rel·max(1,‖H‖)` are chained into one atom. An atom's value is the
/// mean of its eigenvalues, or exactly `0` if the chain touched zero. Chains
/// wider than the threshold are recorded as [`ClusterAmbiguity`] and kept.
pub fn decompose(h: &HermitianMatrix, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let (values, vectors) = linalg::sorted_eigh(h.as_matrix());
    let norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let scale = norm.max(1.0);
    let zero_cut = tol.zero_abs * scale;
    let gap = tol.cluster_rel * scale;

    let snapped: Vec<f64> = values
        .iter()
        .map(|&v| if v.abs() <= zero_cut { 0.0 } else { v })
        .collect();

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match clusters.last_mut() {
            Some(last) if snapped[i] - snapped[*last.last().unwrap()] <= gap => last.push(i),
            _ => clusters.push(vec![i]),
        }
    }

    let mut atoms = Vec::with_capacity(clusters.len());
    let mut ambiguities = Vec::new();
    for idx in clusters {
        let lo = snapped[idx[0]];
        let hi = snapped[*idx.last().unwrap()];
        if hi - lo > gap {
            ambiguities.push(ClusterAmbiguity { lo, hi, threshold: gap });
        }
        let value = if idx.iter().any(|&i| snapped[i] == 0.0) {
            0.0
        } else {
            idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64
        };
        let basis = linalg::select_columns(&vectors, &idx);
        atoms.push(Atom {
            value,
            proj: Projection::from_orthonormal_basis(basis),
            resolution: 0.0,
        });
    }
    let noise = 2.0 * n as f64 * f64::EPSILON * scale;
    for i in 0..atoms.len() {
        let below = i.checked_sub(1).map(|j| atoms[i].value - atoms[j].value);
        let above = atoms.get(i + 1).map(|a| a.value - atoms[i].value);
        let gap = below.into_iter().chain(above).fold(f64::INFINITY, f64::min);
        atoms[i].resolution = if gap.is_finite() { noise / gap } else { 0.0 };
    }

    // One Gram check on the eigenbasis covers both pairwise orthogonality and
    // completeness of the atom projections.
    let gram_residual = linalg::unitarity_residual(&vectors);
    if gram_residual > tol.proj_tol {
        return Err(Error::InvalidResolution(format!(
            "eigenbasis not orthonormal: residual {gram_residual:.3e}"
        )));
    }

    Ok(SpectralDecomposition {
        dim: n,
        atoms,
        norm,
        tol: *tol,
        ambiguities,
    })
}

/// Like [`decompose`], but an ambiguous chain is an error.
pub fn decompose_strict(h: &HermitianMatrix, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let d = decompose(h, tol)?;
    if let Some(a) = d.ambiguities.first() {
        return Err(Error::ClusterAmbiguity {
            lo: a.lo,
            hi: a.hi,
            threshold: a.threshold,
        });
    }
    Ok(d)
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn values(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.value).collect()
    }

    pub fn nonzero_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| a.value != 0.0)
    }

    pub fn zero_atom(&self) -> Option<&Atom> {
        self.atoms.iter().find(|a| a.value == 0.0)
    }

    /// Operator norm of the decomposed matrix.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `max(1, ‖H‖)`.
    pub fn scale(&self) -> f64 {
        self.norm.max(1.0)
    }

    pub fn cluster_threshold(&self) -> f64 {
        self.tol.cluster_rel * self.scale()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn ambiguities(&self) -> &[ClusterAmbiguity] {
        &self.ambiguities
    }

    /// Index of the atom nearest to `x`, if it lies within `threshold`.
    pub fn nearest_atom(&self, x: f64, threshold: f64) -> Option<usize> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (i, (a.value - x).abs()))
            .filter(|&(_, d)| d <= threshold)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// Indices of the atoms selected by `delta` (nearest-atom matching within
    /// the clustering threshold), ascending and without repeats.
    pub fn select_atoms(&self, delta: &BorelSet) -> Vec<usize> {
        let threshold = self.cluster_threshold();
        let mut idx: Vec<usize> = delta
            .atoms()
            .iter()
            .filter_map(|&x| self.nearest_atom(x, threshold))
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    pub fn projection_of(&self, indices: &[usize]) -> Projection {
        Projection::orthogonal_sum(self.dim, indices.iter().map(|&i| &self.atoms[i].proj))
    }

    /// Resolution of the identity `E_λ = P((−∞, λ])`.
    pub fn resolution_at(&self, lambda: f64) -> Projection {
        Projection::orthogonal_sum(
            self.dim,
            self.atoms.iter().filter(|a| a.value <= lambda).map(|a| &a.proj),
        )
    }

    /// Pairs `(value, projection)` suitable for [`reconstruct`].
    pub fn to_pairs(&self) -> Vec<(f64, Projection)> {
        self.atoms.iter().map(|a| (a.value, a.proj.clone())).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.atoms.iter().map(|a| a.proj.rank()).collect()
    }
}

/// `P(Δ)`: sum of the projections of the atoms lying in `delta`.
pub fn spectral_projection(d: &SpectralDecomposition, delta: &BorelSet) -> Projection {
    d.projection_of(&d.select_atoms(delta))
}

/// `(P_A, N_A)`: projections onto the range and the null space.
pub fn range_null_projections(d: &SpectralDecomposition) -> (Projection, Projection) {
    let nonzero: Vec<usize> = (0..d.atoms.len()).filter(|&i| d.atoms[i].value != 0.0).collect();
    let range = d.projection_of(&nonzero);
    let null = d
        .zero_atom()
        .map_or_else(|| Projection::zero(d.dim), |a| a.proj.clone());
    (range, null)
}

/// `Σ value · proj` from a resolution of the identity.
pub fn reconstruct(atoms: &[(f64, Projection)], tol: &Tolerances) -> Result<HermitianMatrix> {
    let dim = atoms
        .first()
        .map(|(_, p)| p.dim())
        .ok_or_else(|| Error::InvalidResolution("no atoms".into()))?;
    if let Some((_, p)) = atoms.iter().find(|(_, p)| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: p.dim(),
        });
    }
    for (i, (_, p)) in atoms.iter().enumerate() {
        for (_, q) in &atoms[i + 1..] {
            let ov = projection::overlap(p, q);
            if ov > tol.proj_tol {
                return Err(Error::InvalidResolution(format!(
                    "projections not orthogonal: overlap {ov:.3e}"
                )));
            }
        }
    }
    let mut total = linalg::zeros(dim);
    let mut h = linalg::zeros(dim);
    for (v, p) in atoms {
        total += p.matrix();
        h += p.matrix().scale(*v);
    }
    let completeness = linalg::op_norm(&(total - linalg::identity(dim)));
    if completeness > tol.proj_tol {
        return Err(Error::InvalidResolution(format!(
            "projections do not sum to the identity: residual {completeness:.3e}"
        )));
    }
    let h = (&h + h.adjoint()).scale(0.5);
    Ok(HermitianMatrix::from_hermitian_unchecked(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn same(p: &Projection, q: &Projection) -> bool {
        p.rank() == q.rank() && linalg::op_norm(&(p.matrix() - q.matrix())) < 1e-12
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = linalg::real_diag(&[1.0, 2.0]);
        m[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(HermitianMatrix::new(m, &tol()), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            HermitianMatrix::new(CMat::zeros(2, 3), &tol()),
            Err(Error::NotSquare { .. })
        ));
        // a rounding-level asymmetry is absorbed
        let mut m = linalg::real_diag(&[1.0, 2.0]);
        m[(0, 1)] = c(1e-15, 0.0);
        assert!(HermitianMatrix::new(m, &tol()).is_ok());
    }

    #[test]
    fn decompose_diagonal() {
        let d = decompose(&HermitianMatrix::from_real_diagonal(&[2.0, 2.0, 0.0]), &tol()).unwrap();
        assert_eq!(d.values(), vec![0.0, 2.0]);
        assert!(same(&d.atoms()[0].proj, &Projection::coordinate(3, &[2])));
        assert!(same(&d.atoms()[1].proj, &Projection::coordinate(3, &[0, 1])));
    }

    #[test]
    fn decompose_zero_matrix() {
        let d = decompose(&HermitianMatrix::zeros(3), &tol()).unwrap();
        assert_eq!(d.values(), vec![0.0]);
        assert!(same(&d.atoms()[0].proj, &Projection::identity(3)));
    }

    #[test]
    fn zero_atom_is_exact() {
        let d = decompose(&HermitianMatrix::from_real_diagonal(&[3e-11, 1.0, -2e-11]), &tol()).unwrap();
        assert_eq!(d.values(), vec![0.0, 1.0]);
        assert_eq!(d.ranks(), vec![2, 1]);
        assert!(d.ambiguities().is_empty());
    }

    #[test]
    fn wide_chain_is_flagged() {
        let g = 2.5e-8;
        let h = HermitianMatrix::from_real_diagonal(&[1.0, 1.0 + g, 1.0 + 2.0 * g, 3.0]);
        let d = decompose(&h, &tol()).unwrap();
        assert_eq!(d.ranks(), vec![3, 1]);
        assert_eq!(d.ambiguities().len(), 1);
        assert!(matches!(decompose_strict(&h, &tol()), Err(Error::ClusterAmbiguity { .. })));
    }

    #[test]
    fn spectral_projection_examples() {
        let d = decompose(&HermitianMatrix::from_real_diagonal(&[2.0, 2.0, 0.0]), &tol()).unwrap();
        assert!(same(&spectral_projection(&d, &BorelSet::of(&[2.0])), &Projection::coordinate(3, &[0, 1])));
        assert!(spectral_projection(&d, &BorelSet::of(&[7.0])).is_zero());
        let d = decompose(&HermitianMatrix::from_real_diagonal(&[1.0, -1.0]), &tol()).unwrap();
        assert!(same(&spectral_projection(&d, &BorelSet::of(&[-1.0, 1.0])), &Projection::identity(2)));
    }

    #[test]
    fn range_null_examples() {
        let d = decompose(&HermitianMatrix::from_real_diagonal(&[2.0, 2.0, 0.0]), &tol()).unwrap();
        let (r, n) = range_null_projections(&d);
        assert!(same(&r, &Projection::coordinate(3, &[0, 1])));
        assert!(same(&n, &Projection::coordinate(3, &[2])));

        let d = decompose(&HermitianMatrix::from_real_diagonal(&[1.0, 1.0]), &tol()).unwrap();
        let (r, n) = range_null_projections(&d);
        assert!(same(&r, &Projection::identity(2)) && n.is_zero());

        let d = decompose(&HermitianMatrix::zeros(2), &tol()).unwrap();
        let (r, n) = range_null_projections(&d);
        assert!(r.is_zero() && same(&n, &Projection::identity(2)));
    }

    #[test]
    fn resolution_of_identity_steps() {
        let d = decompose(&HermitianMatrix::from_real_diagonal(&[-1.0, 0.0, 2.0, 2.0]), &tol()).unwrap();
        assert_eq!(d.resolution_at(-5.0).rank(), 0);
        assert_eq!(d.resolution_at(-1.0).rank(), 1);
        assert_eq!(d.resolution_at(1.0).rank(), 2);
        assert_eq!(d.resolution_at(2.0).rank(), 4);
    }

    #[test]
    fn reconstruct_examples() {
        let pairs = vec![
            (1.0, Projection::coordinate(2, &[0])),
            (0.0, Projection::coordinate(2, &[1])),
        ];
        let h = reconstruct(&pairs, &tol()).unwrap();
        assert_eq!(h.as_matrix(), &linalg::real_diag(&[1.0, 0.0]));

        let h = reconstruct(&[(0.0, Projection::identity(3))], &tol()).unwrap();
        assert_eq!(h.as_matrix(), &linalg::zeros(3));
    }

    #[test]
    fn reconstruct_rejects_bad_resolutions() {
        let incomplete = vec![(1.0, Projection::coordinate(3, &[0]))];
        assert!(matches!(reconstruct(&incomplete, &tol()), Err(Error::InvalidResolution(_))));
        let overlapping = vec![
            (1.0, Projection::coordinate(2, &[0])),
            (2.0, Projection::identity(2)),
        ];
        assert!(matches!(reconstruct(&overlapping, &tol()), Err(Error::InvalidResolution(_))));
        assert!(matches!(reconstruct(&[], &tol()), Err(Error::InvalidResolution(_))));
    }

    #[test]
    fn borel_spec_resolves_against_atoms() {
        let d = decompose(&HermitianMatrix::from_real_diagonal(&[-2.0, 0.0, 1.0, 3.0]), &tol()).unwrap();
        let s: BorelSpec = "[0,2]".parse().unwrap();
        assert_eq!(s.resolve(&d).atoms(), &[0.0, 1.0]);
        let s: BorelSpec = "(0,2] | {-2}".parse().unwrap();
        assert_eq!(s.resolve(&d).atoms(), &[-2.0, 1.0]);
        let s: BorelSpec = "(-inf,inf)".parse().unwrap();
        assert_eq!(s.resolve(&d).len(), 4);
    }
}
