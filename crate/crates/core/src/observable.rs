//! Observables and the relations between them: orthogonality, partial sum,
//! and the order `⪯`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::spectral::{
    self, decompose, Atom, HermitianMatrix, Projection, SpectralDecomposition,
};
use crate::tolerance::Tolerances;

/// A Hermitian matrix with its cached spectral decomposition.
///
/// Binary operations use the tolerances of their left operand.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: HermitianMatrix,
    decomp: SpectralDecomposition,
    // Σ λ P^A({λ}) over the clustered atoms, snapped zeros included
    spectral: CMat,
    range: Projection,
    null: Projection,
    tol: Tolerances,
}

impl Observable {
    pub fn new(matrix: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let decomp = decompose(&matrix, tol)?;
        let dim = matrix.dim();
        let mut rebuilt = linalg::zeros(dim);
        for a in decomp.atoms() {
            rebuilt += a.proj.matrix().scale(a.value);
        }
        let residual = linalg::op_norm(&(&rebuilt - matrix.as_matrix()));
        let bound = dim as f64 * tol.cluster_rel * decomp.scale();
        if residual > bound {
            return Err(Error::InvalidResolution(format!(
                "decomposition reconstructs with residual {residual:.3e} > {bound:.3e}"
            )));
        }
        let (range, null) = spectral::range_null_projections(&decomp);
        Ok(Self {
            matrix,
            decomp,
            spectral: rebuilt,
            range,
            null,
            tol: *tol,
        })
    }

    pub fn from_matrix(m: CMat, tol: &Tolerances) -> Result<Self> {
        Self::new(HermitianMatrix::new(m, tol)?, tol)
    }

    pub fn diagonal(values: &[f64], tol: &Tolerances) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        Self::new(HermitianMatrix::from_real_diagonal(values), tol)
    }

    pub fn zero(dim: usize, tol: &Tolerances) -> Result<Self> {
        if dim == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        Self::new(HermitianMatrix::zeros(dim), tol)
    }

    pub(crate) fn from_hermitian_sum(m: CMat, tol: &Tolerances) -> Result<Self> {
        let m = (&m + m.adjoint()).scale(0.5);
        Self::new(HermitianMatrix::from_hermitian_unchecked(m), tol)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.matrix.as_matrix()
    }

    /// The matrix rebuilt from the atoms, `Σ λ P^A({λ})`. It differs from
    /// [`Observable::matrix`] by at most the reconstruction tolerance, and is
    /// exactly zero when every eigenvalue snapped to 0.
    pub fn spectral_matrix(&self) -> &CMat {
        &self.spectral
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn decomp(&self) -> &SpectralDecomposition {
        &self.decomp
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn norm(&self) -> f64 {
        self.decomp.norm()
    }

    /// `P_A`, projection onto the range.
    pub fn range_projection(&self) -> &Projection {
        &self.range
    }

    /// `N_A`, projection onto the null space.
    pub fn null_projection(&self) -> &Projection {
        &self.null
    }

    pub fn is_zero(&self) -> bool {
        self.range.is_zero()
    }

    pub fn nonzero_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.decomp.nonzero_atoms()
    }

    /// The atom of `self` matching `value` under a cross-observable threshold.
    pub fn matched_atom(&self, value: f64, threshold: f64) -> Option<&Atom> {
        self.decomp
            .nearest_atom(value, threshold)
            .map(|i| &self.decomp.atoms()[i])
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

/// Two atoms `λ` of A and `μ` of B carry the same value when
/// `|λ − μ| ≤ cluster_rel · max(1, ‖A‖, ‖B‖)`.
pub fn match_threshold(a: &Observable, b: &Observable) -> f64 {
    a.tol.cluster_rel * a.norm().max(b.norm()).max(1.0)
}

pub(crate) fn family_match_threshold(family: &[Observable]) -> f64 {
    let norm = family.iter().fold(1.0_f64, |m, a| m.max(a.norm()));
    family[0].tol.cluster_rel * norm
}

/// Outcome of the five equivalent orthogonality criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    /// `P_A · P_B = 0`
    pub range_orthogonal: bool,
    /// `ran(A) ⊆ null(B)`, i.e. `N_B · P_A = P_A`
    pub ran_a_in_null_b: bool,
    /// `ran(B) ⊆ null(A)`
    pub ran_b_in_null_a: bool,
    /// `A · B = 0`
    pub ab_zero: bool,
    /// `B · A = 0`
    pub ba_zero: bool,
    pub verdict: bool,
    pub residuals: OrthogonalityResiduals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalityResiduals {
    pub range_overlap: f64,
    pub ran_a_in_null_b: f64,
    pub ran_b_in_null_a: f64,
    pub ab_norm: f64,
    pub ba_norm: f64,
    pub projection_bound: f64,
    pub product_bound: f64,
}

impl OrthogonalityReport {
    pub fn criteria(&self) -> [bool; 5] {
        [
            self.range_orthogonal,
            self.ran_a_in_null_b,
            self.ran_b_in_null_a,
            self.ab_zero,
            self.ba_zero,
        ]
    }

    pub fn consistent(&self) -> bool {
        self.criteria().iter().all(|&c| c == self.range_orthogonal)
    }
}

/// Evaluates all five criteria without enforcing their agreement.
pub fn orthogonality_criteria(a: &Observable, b: &Observable) -> Result<OrthogonalityReport> {
    a.check_dim(b)?;
    let tol = a.tol.proj_tol;
    let pa = a.range_projection();
    let pb = b.range_projection();
    let range_overlap = spectral::overlap(pa, pb);
    let a_in_nb = linalg::op_norm(&(b.null_projection().matrix() * pa.matrix() - pa.matrix()));
    let b_in_na = linalg::op_norm(&(a.null_projection().matrix() * pb.matrix() - pb.matrix()));
    // products use the atom reconstructions, so an operand whose eigenvalues
    // all snapped to 0 is exactly 0 here as well
    let ab = linalg::op_norm(&(a.spectral_matrix() * b.spectral_matrix()));
    let ba = linalg::op_norm(&(b.spectral_matrix() * a.spectral_matrix()));
    let product_bound = tol * a.norm() * b.norm();
    let report = OrthogonalityReport {
        range_orthogonal: range_overlap <= tol,
        ran_a_in_null_b: a_in_nb <= tol,
        ran_b_in_null_a: b_in_na <= tol,
        ab_zero: ab <= product_bound,
        ba_zero: ba <= product_bound,
        verdict: range_overlap <= tol,
        residuals: OrthogonalityResiduals {
            range_overlap,
            ran_a_in_null_b: a_in_nb,
            ran_b_in_null_a: b_in_na,
            ab_norm: ab,
            ba_norm: ba,
            projection_bound: tol,
            product_bound,
        },
    };
    Ok(report)
}

/// `A ⊥ B`: closed ranges orthogonal.
///
/// All five equivalent characterizations are evaluated independently; if they
/// disagree the result is [`Error::EquivalenceViolation`].
pub fn is_orthogonal(a: &Observable, b: &Observable) -> Result<OrthogonalityReport> {
    let report = orthogonality_criteria(a, b)?;
    if !report.consistent() {
        return Err(Error::EquivalenceViolation {
            relation: "orthogonality",
            detail: format!("{:?}", report.residuals),
        });
    }
    Ok(report)
}

/// `A ⊕ B = A + B`, defined only for `A ⊥ B`.
pub fn oplus(a: &Observable, b: &Observable) -> Result<Observable> {
    if !is_orthogonal(a, b)?.verdict {
        return Err(Error::NotOrthogonal);
    }
    Observable::from_hermitian_sum(a.matrix() + b.matrix(), &a.tol)
}

/// Result of comparing `A ⪯ B` two ways.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    /// `A² = BA`
    pub algebraic: bool,
    /// every nonzero atom projection of A sits under B's projection at the same value
    pub spectral_atoms: bool,
    pub algebraic_residual: f64,
    pub algebraic_bound: f64,
    /// Largest `‖P^B P^A − P^A‖` over A's nonzero atoms; infinite when some atom
    /// of A has no counterpart in B.
    pub spectral_residual: f64,
    /// `C = B − A`, present exactly when the verdict holds.
    pub witness: Option<Observable>,
    pub verdict: bool,
}

/// Per-atom comparison behind the spectral order test: `‖P^B P^A − P^A‖`
/// against `proj_tol` widened by both atoms' numerical resolution.
fn spectral_order(a: &Observable, b: &Observable) -> Result<(bool, f64)> {
    let threshold = match_threshold(a, b);
    let mut holds = true;
    let mut worst = 0.0_f64;
    for atom in a.nonzero_atoms() {
        match b.matched_atom(atom.value, threshold) {
            None => {
                holds = false;
                worst = f64::INFINITY;
            }
            Some(target) => {
                let r = linalg::op_norm(&(target.proj.matrix() * atom.proj.matrix() - atom.proj.matrix()));
                worst = worst.max(r);
                let fits = atom.proj.rank() <= target.proj.rank();
                holds &= fits && r <= a.tol.proj_tol + atom.resolution + target.resolution;
            }
        }
    }
    Ok((holds, worst))
}

/// `A ⪯ B`.
///
/// The algebraic test `‖A² − BA‖ ≤ proj_tol·(‖A‖² + ‖B‖‖A‖)` and the per-atom
/// projection test must agree, otherwise [`Error::EquivalenceViolation`].
pub fn leq(a: &Observable, b: &Observable) -> Result<OrderReport> {
    a.check_dim(b)?;
    let am = a.spectral_matrix();
    let residual = linalg::op_norm(&(am * am - b.spectral_matrix() * am));
    let bound = a.tol.proj_tol * (a.norm() * a.norm() + b.norm() * a.norm());
    let algebraic = residual <= bound;
    let (spectral_atoms, spectral_residual) = spectral_order(a, b)?;
    if algebraic != spectral_atoms {
        return Err(Error::EquivalenceViolation {
            relation: "order",
            detail: format!(
                "A²=BA says {algebraic} (residual {residual:.3e}, bound {bound:.3e}); \
                 atom test says {spectral_atoms} (residual {spectral_residual:.3e})"
            ),
        });
    }
    let witness = if algebraic {
        Some(Observable::from_hermitian_sum(b.matrix() - a.matrix(), &a.tol)?)
    } else {
        None
    };
    Ok(OrderReport {
        algebraic,
        spectral_atoms,
        algebraic_residual: residual,
        algebraic_bound: bound,
        spectral_residual,
        witness,
        verdict: algebraic,
    })
}

/// `B, C ⪯ A` and `B ⊥ C` imply `B ⊕ C ⪯ A`.
///
/// Returns the conclusion; a `false` return means the implementation broke the
/// implication, not that the input was unusual.
pub fn check_principal(a: &Observable, b: &Observable, c: &Observable) -> Result<bool> {
    if !leq(b, a)?.verdict {
        return Err(Error::PreconditionFailed("B ⪯ A does not hold".into()));
    }
    if !leq(c, a)?.verdict {
        return Err(Error::PreconditionFailed("C ⪯ A does not hold".into()));
    }
    if !is_orthogonal(b, c)?.verdict {
        return Err(Error::PreconditionFailed("B ⊥ C does not hold".into()));
    }
    Ok(leq(&oplus(b, c)?, a)?.verdict)
}

/// Loewner order `A ≤ B`: `min eig(B − A) ≥ −proj_tol · max(1, ‖A‖, ‖B‖)`.
pub fn loewner_leq(a: &Observable, b: &Observable) -> Result<bool> {
    a.check_dim(b)?;
    let diff = b.matrix() - a.matrix();
    let scale = a.norm().max(b.norm()).max(1.0);
    Ok(linalg::min_eigenvalue(&diff) >= -a.tol.proj_tol * scale)
}

pub fn is_positive_semidefinite(b: &Observable) -> bool {
    let min = b.decomp.values().first().copied().unwrap_or(0.0);
    min >= -b.tol.zero_abs * b.decomp.scale()
}

/// `A ⪯ B` and `B ≥ 0` imply `A ≤ B` in the Loewner order.
pub fn check_loewner_consequence(a: &Observable, b: &Observable) -> Result<bool> {
    if !is_positive_semidefinite(b) {
        return Err(Error::PreconditionFailed("B is not positive semidefinite".into()));
    }
    if !leq(a, b)?.verdict {
        return Err(Error::PreconditionFailed("A ⪯ B does not hold".into()));
    }
    loewner_leq(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn t() -> Tolerances {
        Tolerances::default()
    }

    fn diag(v: &[f64]) -> Observable {
        Observable::diagonal(v, &t()).unwrap()
    }

    fn rank_one(n: usize, v: &[f64], value: f64) -> Observable {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let col = CMat::from_fn(n, 1, |i, _| c(v[i] / norm, 0.0));
        Observable::from_matrix((&col * col.adjoint()).scale(value), &t()).unwrap()
    }

    #[test]
    fn orthogonality_examples() {
        let r = is_orthogonal(&diag(&[1.0, 0.0, 0.0]), &diag(&[0.0, 2.0, 0.0])).unwrap();
        assert!(r.verdict && r.criteria().iter().all(|&x| x));

        let r = is_orthogonal(&diag(&[1.0, 0.0]), &diag(&[3.0, 0.0])).unwrap();
        assert!(!r.verdict && r.criteria().iter().all(|&x| !x));

        let r = is_orthogonal(&rank_one(2, &[1.0, 0.0], 1.0), &rank_one(2, &[1.0, 1.0], 1.0)).unwrap();
        assert!(!r.verdict && r.criteria().iter().all(|&x| !x));

        assert!(matches!(
            is_orthogonal(&diag(&[1.0]), &diag(&[1.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn oplus_examples() {
        let s = oplus(&diag(&[1.0, 0.0, 0.0]), &diag(&[0.0, -3.0, 0.0])).unwrap();
        assert_eq!(s.matrix(), diag(&[1.0, -3.0, 0.0]).matrix());

        let a = diag(&[4.0, 0.0, -1.0]);
        let s = oplus(&a, &Observable::zero(3, &t()).unwrap()).unwrap();
        assert_eq!(s.matrix(), a.matrix());

        let s = oplus(&diag(&[2.0, 0.0, 0.0]), &diag(&[0.0, 2.0, 0.0])).unwrap();
        let nz: Vec<_> = s.nonzero_atoms().map(|a| (a.value, a.proj.rank())).collect();
        assert_eq!(nz, vec![(2.0, 2)]);

        assert_eq!(oplus(&diag(&[1.0, 0.0]), &diag(&[1.0, 1.0])), Err(Error::NotOrthogonal));
    }

    #[test]
    fn leq_examples() {
        let r = leq(&diag(&[0.0, 2.0, 0.0]), &diag(&[1.0, 2.0, 0.0])).unwrap();
        assert!(r.verdict && r.spectral_atoms);
        assert_eq!(r.witness.unwrap().matrix(), diag(&[1.0, 0.0, 0.0]).matrix());

        let r = leq(&diag(&[1.0, 0.0]), &diag(&[2.0, 0.0])).unwrap();
        assert!(!r.verdict && !r.spectral_atoms && r.witness.is_none());
        assert!(r.algebraic_residual > 0.9);

        let zero = Observable::zero(2, &t()).unwrap();
        for b in [diag(&[2.0, 0.0]), diag(&[-1.0, 3.0]), zero.clone()] {
            let r = leq(&zero, &b).unwrap();
            assert!(r.verdict);
            assert_eq!(r.witness.unwrap().matrix(), b.matrix());
        }
    }

    #[test]
    fn principal_examples() {
        let a = diag(&[1.0, 2.0, 0.0]);
        assert!(check_principal(&a, &diag(&[1.0, 0.0, 0.0]), &diag(&[0.0, 2.0, 0.0])).unwrap());

        let a = diag(&[1.0, 1.0, 3.0]);
        let b = diag(&[1.0, 0.0, 0.0]);
        let c = diag(&[0.0, 0.0, 3.0]);
        assert!(leq(&b, &a).unwrap().verdict);
        assert!(leq(&c, &a).unwrap().verdict);
        assert!(is_orthogonal(&b, &c).unwrap().verdict);
        assert!(check_principal(&a, &b, &c).unwrap());

        let err = check_principal(&a, &diag(&[2.0, 0.0, 0.0]), &c).unwrap_err();
        assert!(matches!(err, Error::PreconditionFailed(ref m) if m.contains("B ⪯ A")));
        let err = check_principal(&a, &b, &diag(&[1.0, 0.0, 3.0])).unwrap_err();
        assert!(matches!(err, Error::PreconditionFailed(ref m) if m.contains("B ⊥ C")));
    }

    #[test]
    fn loewner_examples() {
        assert!(check_loewner_consequence(&diag(&[0.0, 2.0]), &diag(&[1.0, 2.0])).unwrap());
        let err = check_loewner_consequence(&diag(&[-1.0, 0.0]), &diag(&[-1.0, 5.0])).unwrap_err();
        assert!(matches!(err, Error::PreconditionFailed(_)));
        // ⪯ without B ≥ 0 does not give Loewner order
        assert!(leq(&diag(&[1.0, 0.0]), &diag(&[1.0, -5.0])).unwrap().verdict);
        assert!(!loewner_leq(&diag(&[1.0, 0.0]), &diag(&[1.0, -5.0])).unwrap());
    }
}
