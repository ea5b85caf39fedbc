
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::tolerance::Tolerances;

/// Orthogonal projection, kept together with an orthonormal basis of its range.
///
/// The matrix is always `basis · basis†`, so Hermiticity holds by
/// construction and idempotence holds to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: CMat,
    basis: CMat,
}

impl Projection {
    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: linalg::zeros(dim),
            basis: CMat::zeros(dim, 0),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim),
            basis: linalg::identity(dim),
        }
    }

    /// Projection onto the span of the standard basis vectors `e_i`, `i ∈ coords`.
    pub fn coordinate(dim: usize, coords: &[usize]) -> Self {
        let mut idx: Vec<usize> = coords.to_vec();
        idx.sort_unstable();
        idx.dedup();
        let basis = linalg::select_columns(&linalg::identity(dim), &idx);
        Self::from_orthonormal_basis(basis)
    }

    /// Caller guarantees the columns are orthonormal.
    pub fn from_orthonormal_basis(basis: CMat) -> Self {
        let matrix = &basis * basis.adjoint();
        Self { matrix, basis }
    }

    /// Projection onto the span of the columns of `vectors`. Directions whose
    /// squared singular value falls below `proj_tol` (relative to the largest)
    /// are dropped.
    pub fn span(vectors: &CMat, tol: &Tolerances) -> Self {
        let n = vectors.nrows();
        if vectors.ncols() == 0 {
            return Self::zero(n);
        }
        let gram = vectors * vectors.adjoint();
        let top = linalg::hermitian_norm(&gram);
        if top == 0.0 {
            return Self::zero(n);
        }
        range_of_psd(&gram, tol.proj_tol * top)
    }

    /// Validates a user-supplied matrix: Hermitian, idempotent, spectrum in {0, 1}.
    pub fn from_matrix(m: CMat, tol: &Tolerances) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let herm = linalg::op_norm(&(&m - m.adjoint())) / 2.0;
        if herm > tol.proj_tol {
            return Err(Error::NotProjection {
                residual: herm,
                tol: tol.proj_tol,
            });
        }
        let sym = (&m + m.adjoint()).scale(0.5);
        let idem = linalg::op_norm(&(&sym * &sym - &sym));
        if idem > tol.proj_tol {
            return Err(Error::NotProjection {
                residual: idem,
                tol: tol.proj_tol,
            });
        }
        Ok(range_of_psd(&sym, 0.5))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Orthonormal basis of the range, one column per dimension.
    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// `I − P`.
    pub fn complement(&self) -> Self {
        let n = self.dim();
        if self.rank() == 0 {
            return Self::identity(n);
        }
        if self.rank() == n {
            return Self::zero(n);
        }
        range_of_psd(&(linalg::identity(n) - &self.matrix), 0.5)
    }

    /// Sum of projections known to be pairwise orthogonal.
    pub fn orthogonal_sum<'a>(dim: usize, parts: impl IntoIterator<Item = &'a Projection>) -> Self {
        let parts: Vec<&CMat> = parts.into_iter().map(|p| &p.basis).collect();
        if parts.is_empty() {
            return Self::zero(dim);
        }
        let basis = linalg::hstack(dim, &parts);
        Self::from_orthonormal_basis(basis)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

/// Projection onto the eigenvectors of a Hermitian PSD matrix whose
/// eigenvalues exceed `cutoff`.
pub(crate) fn range_of_psd(g: &CMat, cutoff: f64) -> Projection {
    let (values, vectors) = linalg::sorted_eigh(g);
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > cutoff).collect();
    Projection::from_orthonormal_basis(linalg::select_columns(&vectors, &keep))
}

/// Projection onto `ran(P) ∩ ran(Q)`.
///
/// Principal vectors between the two ranges whose cosine is at least
/// `1 − proj_tol` span the intersection. They are the eigenvectors of
/// `C C†` with `C = U†W`, whose eigenvalues are the squared cosines.
pub fn proj_meet(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<Projection> {
    p.check_dim(q)?;
    let n = p.dim();
    if p.rank() == 0 || q.rank() == 0 {
        return Ok(Projection::zero(n));
    }
    let cross = p.basis.adjoint() * &q.basis;
    let gram = &cross * cross.adjoint();
    let (cos2, vectors) = linalg::sorted_eigh(&((&gram + gram.adjoint()).scale(0.5)));
    let floor = (1.0 - tol.proj_tol).powi(2);
    let keep: Vec<usize> = (0..cos2.len()).filter(|&i| cos2[i] >= floor).collect();
    if keep.is_empty() {
        return Ok(Projection::zero(n));
    }
    let basis = &p.basis * linalg::select_columns(&vectors, &keep);
    Ok(Projection::from_orthonormal_basis(basis))
}

/// Projection onto `ran(P) + ran(Q)`.
///
/// Orthonormalizes the concatenated range bases `[U W]`; its Gram matrix
/// `[U W][U W]† = P + Q` has eigenvalues `1 ± cos θ` along principal pairs,
/// and directions with squared singular value at most `proj_tol` are cut.
pub fn proj_join(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<Projection> {
    p.check_dim(q)?;
    if q.rank() == 0 {
        return Ok(p.clone());
    }
    if p.rank() == 0 {
        return Ok(q.clone());
    }
    Ok(range_of_psd(&(&p.matrix + &q.matrix), tol.proj_tol))
}

/// `P ≤ Q`, tested as `‖QP − P‖ ≤ proj_tol`.
pub fn proj_leq(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<bool> {
    p.check_dim(q)?;
    if p.rank() == 0 {
        return Ok(true);
    }
    if p.rank() > q.rank() {
        return Ok(false);
    }
    Ok(linalg::op_norm(&(&q.matrix * &p.matrix - &p.matrix)) <= tol.proj_tol)
}

/// `‖P·Q‖`, the cosine of the smallest principal angle.
pub fn overlap(p: &Projection, q: &Projection) -> f64 {
    if p.rank() == 0 || q.rank() == 0 {
        return 0.0;
    }
    linalg::op_norm(&(p.basis.adjoint() * &q.basis))
}
