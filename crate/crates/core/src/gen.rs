//! Seeded random instances whose relations hold by construction.
//!
//! Nonzero eigenvalue magnitudes stay in `[1, 3]`. In clustered mode the
//! distinct values of an observable form runs spaced exactly ten cluster
//! thresholds apart (threshold taken at the largest admissible norm).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, CMat};
use crate::observable::Observable;
use crate::tolerance::Tolerances;

pub const MIN_MAGNITUDE: f64 = 1.0;
pub const MAX_MAGNITUDE: f64 = 3.0;
const SEPARATED_MIN_GAP: f64 = 0.05;

/// Independent generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    if n == 0 {
        return linalg::zeros(0);
    }
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumStyle {
    #[default]
    Separated,
    Clustered,
}

/// How a generated pair relates, for bookkeeping in mixed corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Orthogonal,
    Comparable,
    ReverseComparable,
    Commuting,
    NonCommuting,
    Equal,
}

impl PairKind {
    pub const ALL: [PairKind; 6] = [
        PairKind::Orthogonal,
        PairKind::Comparable,
        PairKind::ReverseComparable,
        PairKind::Commuting,
        PairKind::NonCommuting,
        PairKind::Equal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PairKind::Orthogonal => "orthogonal",
            PairKind::Comparable => "comparable",
            PairKind::ReverseComparable => "reverse_comparable",
            PairKind::Commuting => "commuting",
            PairKind::NonCommuting => "non_commuting",
            PairKind::Equal => "equal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub dim: usize,
    pub style: SpectrumStyle,
    pub tol: Tolerances,
}

impl Generator {
    pub fn new(dim: usize, style: SpectrumStyle, tol: Tolerances) -> Self {
        Self { dim, style, tol }
    }

    /// Spacing between neighbouring values in clustered mode.
    pub fn clustered_gap(&self) -> f64 {
        10.0 * self.tol.cluster_rel * MAX_MAGNITUDE
    }

    /// `k` distinct nonzero values.
    pub fn value_pool<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> Vec<f64> {
        match self.style {
            SpectrumStyle::Separated => {
                let mut out: Vec<f64> = Vec::with_capacity(k);
                while out.len() < k {
                    let m = rng.random_range(MIN_MAGNITUDE..=MAX_MAGNITUDE);
                    let v = signed(rng, m);
                    if out.iter().all(|w| (v - w).abs() >= SEPARATED_MIN_GAP) {
                        out.push(v);
                    }
                }
                out
            }
            SpectrumStyle::Clustered => {
                let g = self.clustered_gap();
                let first = if k > 1 { rng.random_range(1..k) } else { k };
                let mut out = Vec::with_capacity(k);
                for (run, len) in [(0, first), (1, k - first)] {
                    if len == 0 {
                        continue;
                    }
                    // runs sit on opposite sides of zero so they never collide
                    let sign = if run == 0 { 1.0 } else { -1.0 };
                    let center = sign * rng.random_range(1.5..=2.5);
                    out.extend((0..len).map(|j| center + j as f64 * g));
                }
                out
            }
        }
    }

    fn conjugated(&self, u: &CMat, values: &[f64]) -> Result<Observable> {
        let m = u * linalg::real_diag(values) * u.adjoint();
        Observable::from_matrix((&m + m.adjoint()).scale(0.5), &self.tol)
    }

    /// Values drawn from `pool`, each coordinate zero with probability `p_zero`.
    fn fill<R: Rng + ?Sized>(&self, rng: &mut R, pool: &[f64], p_zero: f64) -> Vec<f64> {
        (0..self.dim)
            .map(|_| {
                if rng.random_bool(p_zero) {
                    0.0
                } else {
                    pool[rng.random_range(0..pool.len())]
                }
            })
            .collect()
    }

    /// `U diag(v) U†` with repeated values and some zeros.
    pub fn random_observable<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Observable> {
        let pool_size = rng.random_range(1..=self.dim.max(1));
        let pool = self.value_pool(rng, pool_size);
        let values = self.fill(rng, &pool, 0.25);
        let u = random_unitary(rng, self.dim);
        self.conjugated(&u, &values)
    }

    /// Every nonzero eigenvalue simple; zero may repeat.
    pub fn simple_observable<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Observable> {
        let mut values = self.value_pool(rng, self.dim);
        for v in values.iter_mut() {
            if rng.random_bool(0.25) {
                *v = 0.0;
            }
        }
        let u = random_unitary(rng, self.dim);
        self.conjugated(&u, &values)
    }

    /// `k` mutually orthogonal observables: disjoint coordinate blocks plus a
    /// slack block, one shared random unitary. Blocks may be empty, giving
    /// zero members.
    pub fn orthogonal_family<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> Result<Vec<Observable>> {
        let u = random_unitary(rng, self.dim);
        let mut coords: Vec<usize> = (0..self.dim).collect();
        coords.shuffle(rng);
        // label k is the slack block
        let labels: Vec<usize> = coords.iter().map(|_| rng.random_range(0..=k)).collect();
        let pool = self.value_pool(rng, self.dim.clamp(1, 4));
        (0..k)
            .map(|block| {
                let mut values = vec![0.0; self.dim];
                for (&c, &l) in coords.iter().zip(&labels) {
                    if l == block {
                        values[c] = pool[rng.random_range(0..pool.len())];
                    }
                }
                self.conjugated(&u, &values)
            })
            .collect()
    }

    pub fn orthogonal_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Observable, Observable)> {
        let mut f = self.orthogonal_family(rng, 2)?;
        let b = f.pop().unwrap();
        Ok((f.pop().unwrap(), b))
    }

    /// A random `A ⪯ b`: for a random subset of b's nonzero atoms, the atom
    /// value times a random subprojection of its eigenspace.
    pub fn below<R: Rng + ?Sized>(&self, rng: &mut R, b: &Observable) -> Result<Observable> {
        let mut m = linalg::zeros(self.dim);
        for atom in b.nonzero_atoms() {
            if !rng.random_bool(0.6) {
                continue;
            }
            let r = atom.proj.rank();
            let v = rotated_basis(rng, atom.proj.basis());
            let take = rng.random_range(1..=r);
            let cols = v.columns(0, take);
            m += (cols * cols.adjoint()).scale(atom.value);
        }
        Observable::from_matrix((&m + m.adjoint()).scale(0.5), &self.tol)
    }

    /// `(b, c)` with `b, c ⪯ a` and `b ⊥ c`, from disjoint parts of each of
    /// a's eigenspaces.
    pub fn split_below<R: Rng + ?Sized>(&self, rng: &mut R, a: &Observable) -> Result<(Observable, Observable)> {
        let mut mb = linalg::zeros(self.dim);
        let mut mc = linalg::zeros(self.dim);
        for atom in a.nonzero_atoms() {
            let r = atom.proj.rank();
            let v = rotated_basis(rng, atom.proj.basis());
            let nb = rng.random_range(0..=r);
            let nc = rng.random_range(0..=r - nb);
            let cb = v.columns(0, nb);
            let cc = v.columns(nb, nc);
            mb += (cb * cb.adjoint()).scale(atom.value);
            mc += (cc * cc.adjoint()).scale(atom.value);
        }
        let sym = |m: CMat| (&m + m.adjoint()).scale(0.5);
        Ok((
            Observable::from_matrix(sym(mb), &self.tol)?,
            Observable::from_matrix(sym(mc), &self.tol)?,
        ))
    }

    /// `(A, B)` with `A ⪯ B`.
    pub fn comparable_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Observable, Observable)> {
        let b = self.random_observable(rng)?;
        Ok((self.below(rng, &b)?, b))
    }

    /// `(A, B)` with `A ⪯ B` and `B ≥ 0`.
    pub fn psd_comparable_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Observable, Observable)> {
        let k = rng.random_range(1..=self.dim.max(1));
        let pool: Vec<f64> = self.value_pool(rng, k).iter().map(|v| v.abs()).collect();
        let values = self.fill(rng, &pool, 0.25);
        let u = random_unitary(rng, self.dim);
        let b = self.conjugated(&u, &values)?;
        Ok((self.below(rng, &b)?, b))
    }

    /// Simultaneously diagonal pair over a small shared value pool, so equal
    /// values, overlaps and orthogonal coordinates all occur.
    pub fn commuting_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Observable, Observable)> {
        let k = rng.random_range(1..=3);
        let pool = self.value_pool(rng, k);
        let u = random_unitary(rng, self.dim);
        let va = self.fill(rng, &pool, 0.35);
        let vb = self.fill(rng, &pool, 0.35);
        Ok((self.conjugated(&u, &va)?, self.conjugated(&u, &vb)?))
    }

    /// Pair with independent eigenbases.
    pub fn noncommuting_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Observable, Observable)> {
        Ok((self.random_observable(rng)?, self.random_observable(rng)?))
    }

    pub fn pair_of_kind<R: Rng + ?Sized>(&self, rng: &mut R, kind: PairKind) -> Result<(Observable, Observable)> {
        match kind {
            PairKind::Orthogonal => self.orthogonal_pair(rng),
            PairKind::Comparable => self.comparable_pair(rng),
            PairKind::ReverseComparable => self.comparable_pair(rng).map(|(a, b)| (b, a)),
            PairKind::Commuting => self.commuting_pair(rng),
            PairKind::NonCommuting => self.noncommuting_pair(rng),
            PairKind::Equal => {
                let a = self.random_observable(rng)?;
                Ok((a.clone(), a))
            }
        }
    }

    /// A pair of a uniformly chosen kind.
    pub fn mixed_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(PairKind, Observable, Observable)> {
        let kind = PairKind::ALL[rng.random_range(0..PairKind::ALL.len())];
        let (a, b) = self.pair_of_kind(rng, kind)?;
        Ok((kind, a, b))
    }

    /// `[a, b, c]` with `a ⪯ b ⪯ c`.
    pub fn chain<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<[Observable; 3]> {
        let c = self.random_observable(rng)?;
        let b = self.below(rng, &c)?;
        let a = self.below(rng, &b)?;
        Ok([a, b, c])
    }
}

fn signed<R: Rng + ?Sized>(rng: &mut R, v: f64) -> f64 {
    if rng.random_bool(0.5) {
        v
    } else {
        -v
    }
}

/// The same subspace in a randomly rotated orthonormal basis.
fn rotated_basis<R: Rng + ?Sized>(rng: &mut R, basis: &CMat) -> CMat {
    basis * random_unitary(rng, basis.ncols())
}
