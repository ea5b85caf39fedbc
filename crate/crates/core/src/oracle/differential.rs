//! Cross-validation of the matrix model against the integer oracle.
//!
//! Each trial draws integer diagonals `a, b, c`, a shared random unitary `U`,
//! and compares every oracle verdict with the matrix verdict on the embedded
//! pair.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    bell, check_refinement_monotonicity, embed, oracle_join, oracle_leq, oracle_meet_bruteforce_detailed,
    oracle_meet_closed_form, oracle_orthogonal, DiagonalObservable, ENUMERATION_LIMIT,
};
use crate::error::{Error, Result};
use crate::gen::{random_unitary, trial_rng};
use crate::lattice::{join, join_family, join_precondition, meet, meet_family};
use crate::linalg::{self, CMat};
use crate::observable::{is_orthogonal, leq, oplus, Observable};
use crate::report::{merge, CheckTally, MatrixRecord, TrialLog};
use crate::tolerance::Tolerances;

/// Nonzero values available to the generator.
pub const PALETTE: [i64; 6] = [-3, -2, -1, 1, 2, 3];

/// Absolute agreement required between a matrix result and the embedded oracle result.
pub const EMBED_TOL: f64 = 1e-8;

pub const CHECKS: [&str; 14] = [
    "orthogonality",
    "order",
    "meet_bruteforce",
    "meet_matrix",
    "meet_soundness",
    "meet_maximality",
    "meet_family",
    "refinement",
    "join_parity",
    "join_matrix",
    "join_upper_bound",
    "join_precondition_necessity",
    "join_oplus",
    "join_family",
];

const ORTH: usize = 0;
const ORDER: usize = 1;
const BRUTE: usize = 2;
const MEET: usize = 3;
const MEET_SOUND: usize = 4;
const MEET_MAX: usize = 5;
const MEET_FAMILY: usize = 6;
const REFINE: usize = 7;
const JOIN_PARITY: usize = 8;
const JOIN: usize = 9;
const JOIN_UPPER: usize = 10;
const JOIN_NECESSITY: usize = 11;
const JOIN_OPLUS: usize = 12;
const JOIN_FAMILY: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferentialConfig {
    pub trials: u64,
    pub dim: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

impl DifferentialConfig {
    pub fn new(trials: u64, dim: usize, seed: u64) -> Self {
        Self {
            trials,
            dim,
            seed,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferentialReport {
    pub trials: u64,
    pub dim: usize,
    pub seed: u64,
    pub checks: Vec<CheckTally>,
    /// Partitions enumerated per instance, keyed by atom count; every value
    /// must equal the Bell number.
    pub partitions_by_atoms: BTreeMap<usize, u64>,
    pub passed: bool,
}

impl DifferentialReport {
    pub fn check(&self, name: &str) -> Option<&CheckTally> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> u64 {
        self.checks.iter().map(|c| c.failures).sum()
    }
}

pub fn differential_sweep(trials: u64, dim: usize, seed: u64) -> Result<DifferentialReport> {
    differential_sweep_with(&DifferentialConfig::new(trials, dim, seed))
}

pub fn differential_sweep_with(cfg: &DifferentialConfig) -> Result<DifferentialReport> {
    cfg.tol.validate()?;
    if cfg.dim == 0 {
        return Err(Error::PreconditionFailed("dimension must be positive".into()));
    }
    let logs: Vec<(TrialLog, Vec<(usize, u64)>)> = (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect();
    let mut partitions_by_atoms = BTreeMap::new();
    for (_, seen) in &logs {
        for &(k, n) in seen {
            partitions_by_atoms.insert(k, n);
        }
    }
    let checks = merge(&CHECKS, logs.into_iter().map(|(l, _)| l));
    let passed = checks.iter().all(CheckTally::passed);
    Ok(DifferentialReport {
        trials: cfg.trials,
        dim: cfg.dim,
        seed: cfg.seed,
        checks,
        partitions_by_atoms,
        passed,
    })
}

/// Draws integer diagonals over a random sub-palette, so between one and five
/// distinct nonzero values occur.
struct Draw<'r, R: Rng> {
    rng: &'r mut R,
    palette: Vec<i64>,
    dim: usize,
}

impl<R: Rng> Draw<'_, R> {
    fn value(&mut self) -> i64 {
        self.palette[self.rng.random_range(0..self.palette.len())]
    }

    fn free(&mut self, p_zero: f64) -> DiagonalObservable {
        (0..self.dim)
            .map(|_| if self.rng.random_bool(p_zero) { 0 } else { self.value() })
            .collect::<Vec<_>>()
            .into()
    }

    /// Keeps, zeroes or replaces each coordinate of `a`.
    fn related(&mut self, a: &DiagonalObservable) -> DiagonalObservable {
        a.values()
            .iter()
            .map(|&x| match self.rng.random_range(0..4) {
                0 | 1 => x,
                2 => 0,
                _ => self.value(),
            })
            .collect::<Vec<_>>()
            .into()
    }

    /// Nonzero only where `a` is zero.
    fn disjoint(&mut self, a: &DiagonalObservable) -> DiagonalObservable {
        a.values()
            .iter()
            .map(|&x| if x == 0 && self.rng.random_bool(0.7) { self.value() } else { 0 })
            .collect::<Vec<_>>()
            .into()
    }

    /// Zeroes a random subset of coordinates, giving an oracle lower bound.
    fn below(&mut self, a: &DiagonalObservable) -> DiagonalObservable {
        a.values()
            .iter()
            .map(|&x| if self.rng.random_bool(0.5) { x } else { 0 })
            .collect::<Vec<_>>()
            .into()
    }
}

fn diff_norm(x: &Observable, y: &Observable) -> f64 {
    linalg::op_norm(&(x.matrix() - y.matrix()))
}

fn describe(label: String, items: &[(&str, &DiagonalObservable)], u: &CMat) -> (String, Vec<MatrixRecord>) {
    let values: Vec<String> = items.iter().map(|(n, d)| format!("{n}={:?}", d.values())).collect();
    (format!("{label}; {}", values.join(", ")), vec![MatrixRecord::new("U", u)])
}

fn run_trial(cfg: &DifferentialConfig, trial: u64) -> (TrialLog, Vec<(usize, u64)>) {
    let mut log = TrialLog::new(trial);
    let mut rng = trial_rng(cfg.seed, trial);
    let mut palette = PALETTE.to_vec();
    palette.shuffle(&mut rng);
    palette.truncate(rng.random_range(1..=ENUMERATION_LIMIT));
    let u = random_unitary(&mut rng, cfg.dim);
    let mut draw = Draw {
        rng: &mut rng,
        palette,
        dim: cfg.dim,
    };
    let a = draw.free(0.3);
    let b = match draw.rng.random_range(0..4) {
        0 => draw.free(0.3),
        1 => draw.related(&a),
        2 => draw.disjoint(&a),
        _ => draw.below(&a),
    };
    let c = draw.related(&a);
    let lower = {
        let m = oracle_meet_closed_form(&a, &b).expect("equal lengths");
        draw.below(&m)
    };
    let hull = draw.free(0.2);
    let (ha, hb) = (draw.below(&hull), draw.below(&hull));
    let extension_seed = draw.free(0.0);

    let mut seen = Vec::new();
    let ctx = Trial {
        cfg,
        u: &u,
        a: &a,
        b: &b,
    };
    if let Err(e) = ctx.run(&mut log, &mut seen, &c, &lower, (&hull, &ha, &hb), &extension_seed) {
        // an error the checks did not anticipate, e.g. a failed embedding
        log.error(ORTH, &e, vec![MatrixRecord::new("U", &u)]);
    }
    (log, seen)
}

struct Trial<'a> {
    cfg: &'a DifferentialConfig,
    u: &'a CMat,
    a: &'a DiagonalObservable,
    b: &'a DiagonalObservable,
}

impl Trial<'_> {
    fn embed(&self, d: &DiagonalObservable) -> Result<Observable> {
        embed(d, Some(self.u), &self.cfg.tol)
    }

    fn ctx(&self, label: impl Into<String>, extra: &[(&str, &DiagonalObservable)]) -> (String, Vec<MatrixRecord>) {
        let mut items = vec![("a", self.a), ("b", self.b)];
        items.extend_from_slice(extra);
        describe(label.into(), &items, self.u)
    }

    fn run(
        &self,
        log: &mut TrialLog,
        seen: &mut Vec<(usize, u64)>,
        c: &DiagonalObservable,
        lower: &DiagonalObservable,
        (hull, ha, hb): (&DiagonalObservable, &DiagonalObservable, &DiagonalObservable),
        extension: &DiagonalObservable,
    ) -> Result<()> {
        let (a, b) = (self.a, self.b);
        let ma = self.embed(a)?;
        let mb = self.embed(b)?;

        // orthogonality
        let want = oracle_orthogonal(a, b)?;
        match is_orthogonal(&ma, &mb) {
            Ok(r) => log.check(ORTH, r.verdict == want, r.residuals.range_overlap, || {
                self.ctx(format!("oracle says {want}, matrix says {}", r.verdict), &[])
            }),
            Err(e) => log.error(ORTH, &e, self.ctx("", &[]).1),
        }

        // order, both directions
        for (x, y, mx, my, dir) in [(a, b, &ma, &mb, "a⪯b"), (b, a, &mb, &ma, "b⪯a")] {
            let want = oracle_leq(x, y)?;
            match leq(mx, my) {
                Ok(r) => log.check(ORDER, r.verdict == want, r.algebraic_residual, || {
                    self.ctx(format!("{dir}: oracle says {want}, matrix says {}", r.verdict), &[])
                }),
                Err(e) => log.error(ORDER, &e, self.ctx(dir, &[]).1),
            }
        }

        // meet: brute force against closed form, then matrix against oracle
        let closed = oracle_meet_closed_form(a, b)?;
        let brute = oracle_meet_bruteforce_detailed(a, b, ENUMERATION_LIMIT)?;
        let k = brute.atoms.len();
        seen.push((k, brute.partitions_enumerated));
        log.count(BRUTE, format!("atoms_{k}"), 1);
        let ok = brute.meet == closed && brute.partitions_enumerated == bell(k);
        log.check(BRUTE, ok, 0.0, || {
            self.ctx(
                format!(
                    "brute force {:?} over {} partitions vs closed form {:?}",
                    brute.meet.values(),
                    brute.partitions_enumerated,
                    closed.values()
                ),
                &[],
            )
        });

        let m_oracle = self.embed(&closed)?;
        let m = meet(&ma, &mb);
        match &m {
            Ok(m) => {
                let r = diff_norm(m, &m_oracle);
                log.check(MEET, r <= EMBED_TOL, r, || self.ctx("meet differs from embedded oracle meet", &[]));
                let sound = leq(m, &ma).and_then(|x| Ok(x.verdict && leq(m, &mb)?.verdict));
                match sound {
                    Ok(ok) => log.check(MEET_SOUND, ok, 0.0, || self.ctx("meet is not below both", &[])),
                    Err(e) => log.error(MEET_SOUND, &e, self.ctx("", &[]).1),
                }
                let ml = self.embed(lower)?;
                match leq(&ml, m) {
                    Ok(r) => log.check(MEET_MAX, r.verdict, r.algebraic_residual, || {
                        self.ctx("common lower bound not below meet", &[("d", lower)])
                    }),
                    Err(e) => log.error(MEET_MAX, &e, self.ctx("", &[("d", lower)]).1),
                }
            }
            Err(e) => log.error(MEET, e, self.ctx("", &[]).1),
        }

        // family meet against pairwise fold and oracle fold
        let mc = self.embed(c)?;
        let want = self.embed(&oracle_meet_closed_form(&closed, c)?)?;
        let fam = meet_family(&[ma.clone(), mb.clone(), mc.clone()]);
        let fold = m.as_ref().map_err(Clone::clone).and_then(|m| meet(m, &mc));
        match (fam, fold) {
            (Ok(f), Ok(g)) => {
                let r = diff_norm(&f, &want).max(diff_norm(&g, &want));
                log.check(MEET_FAMILY, r <= EMBED_TOL, r, || self.ctx("family meet mismatch", &[("c", c)]));
            }
            (Err(e), _) | (_, Err(e)) => log.error(MEET_FAMILY, &e, self.ctx("", &[("c", c)]).1),
        }

        let refine = check_refinement_monotonicity(a, b)?;
        log.count(REFINE, "refinement_pairs", refine.refinement_pairs);
        log.check(REFINE, refine.violations == 0, refine.violations as f64, || {
            self.ctx(format!("{} refinement violations", refine.violations), &[])
        });

        // join
        let oracle = oracle_join(a, b);
        let j = join(&ma, &mb);
        let parity = oracle.is_ok() == j.is_ok() && matches!(&j, Ok(_) | Err(Error::NoUpperBound { .. }));
        log.count(JOIN_PARITY, if oracle.is_ok() { "exists" } else { "no_upper_bound" }, 1);
        log.check(JOIN_PARITY, parity, 0.0, || {
            self.ctx(format!("oracle {:?} vs matrix {:?}", oracle.as_ref().map(|_| ()), j.as_ref().map(|_| ())), &[])
        });
        if let (Ok(jo), Ok(jm)) = (&oracle, &j) {
            let r = diff_norm(jm, &self.embed(jo)?);
            log.check(JOIN, r <= EMBED_TOL, r, || self.ctx("join differs from embedded oracle join", &[]));

            // upper bounds built by extending the join
            let h: DiagonalObservable = jo
                .values()
                .iter()
                .zip(extension.values())
                .map(|(&x, &e)| if x == 0 { e } else { x })
                .collect::<Vec<_>>()
                .into();
            let mh = self.embed(&h)?;
            let check = || -> Result<bool> {
                Ok(leq(&ma, jm)?.verdict && leq(&mb, jm)?.verdict && leq(jm, &mh)?.verdict)
            };
            match check() {
                Ok(ok) => log.check(JOIN_UPPER, ok, 0.0, || self.ctx("join bound failed", &[("h", &h)])),
                Err(e) => log.error(JOIN_UPPER, &e, self.ctx("", &[("h", &h)]).1),
            }

            if oracle_orthogonal(a, b)? {
                match oplus(&ma, &mb) {
                    Ok(s) => {
                        let r = diff_norm(&s, jm);
                        log.check(JOIN_OPLUS, r <= EMBED_TOL, r, || self.ctx("join differs from ⊕", &[]));
                    }
                    Err(e) => log.error(JOIN_OPLUS, &e, self.ctx("", &[]).1),
                }
            }
        }

        // any two observables under a common bound satisfy the join precondition
        let (mha, mhb) = (self.embed(ha)?, self.embed(hb)?);
        match join_precondition(&mha, &mhb) {
            Ok(p) => log.check(JOIN_NECESSITY, p.holds, p.overlap, || {
                self.ctx("precondition fails under a common upper bound", &[("h", hull), ("x", ha), ("y", hb)])
            }),
            Err(e) => log.error(JOIN_NECESSITY, &e, self.ctx("", &[]).1),
        }
        let pairwise_bounded = [(a, b), (a, c), (b, c)]
            .iter()
            .all(|(x, y)| oracle_join(x, y).is_ok());
        if pairwise_bounded {
            let want = oracle_join(&oracle_join(a, b)?, c)?;
            match join_family(&[ma, mb, mc]) {
                Ok(f) => {
                    let r = diff_norm(&f, &self.embed(&want)?);
                    log.check(JOIN_FAMILY, r <= EMBED_TOL, r, || self.ctx("family join mismatch", &[("c", c)]));
                }
                Err(e) => log.error(JOIN_FAMILY, &e, self.ctx("", &[("c", c)]).1),
            }
        }
        Ok(())
    }
}
