//! Seeded property sweeps over generated instances.
//!
//! Each sweep shares the configuration and report shape of the axiom suite.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::axioms::SuiteConfig;
use crate::error::{Error, Result};
use crate::gen::{random_unitary, trial_rng, Generator};
use crate::lattice::{common_abelian_witness, join, join_family, meet, meet_family, witness_residuals};
use crate::linalg;
use crate::observable::{check_loewner_consequence, check_principal, is_orthogonal, leq, Observable};
use crate::report::{merge, CheckTally, MatrixRecord, TrialLog};

/// Relative residual bound used by every sweep.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub sweep: String,
    pub config: SuiteConfig,
    pub checks: Vec<CheckTally>,
    pub passed: bool,
}

impl SweepReport {
    pub fn check(&self, name: &str) -> Option<&CheckTally> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> u64 {
        self.checks.iter().map(|c| c.failures).sum()
    }
}

/// Named sweeps, in the order the CLI lists them.
pub const SWEEPS: [&str; 8] = [
    "orthogonality",
    "order",
    "order_laws",
    "principal",
    "loewner",
    "witness",
    "generic_meet",
    "families",
];

pub fn run_named(name: &str, cfg: &SuiteConfig) -> Result<SweepReport> {
    match name {
        "orthogonality" => orthogonality_sweep(cfg),
        "order" => order_sweep(cfg),
        "order_laws" => order_law_sweep(cfg),
        "principal" => principal_sweep(cfg),
        "loewner" => loewner_sweep(cfg),
        "witness" => witness_sweep(cfg),
        "generic_meet" => generic_meet_sweep(cfg),
        "families" => family_sweep(cfg),
        other => Err(Error::PreconditionFailed(format!("unknown sweep {other:?}"))),
    }
}

type TrialFn = dyn Fn(&Generator, &mut ChaCha8Rng, &mut TrialLog) -> Result<()> + Sync;

fn run(sweep: &str, checks: &[&str], cfg: &SuiteConfig, f: &TrialFn) -> Result<SweepReport> {
    cfg.tol.validate()?;
    if cfg.dim == 0 {
        return Err(Error::PreconditionFailed("dimension must be positive".into()));
    }
    let g = Generator::new(cfg.dim, cfg.style, cfg.tol);
    // operations that error outside a specific check land in a trailing tally
    let errors = checks.len();
    let mut names = checks.to_vec();
    names.push("errors");
    let logs: Vec<TrialLog> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut log = TrialLog::new(t);
            let mut rng = trial_rng(cfg.seed, t);
            if let Err(e) = f(&g, &mut rng, &mut log) {
                log.error(errors, &e, Vec::new());
            }
            log
        })
        .collect();
    let mut checks = merge(&names, logs);
    if checks[errors].instances == 0 {
        checks.pop();
    }
    let passed = checks.iter().all(CheckTally::passed);
    Ok(SweepReport {
        sweep: sweep.to_string(),
        config: *cfg,
        checks,
        passed,
    })
}

fn scale(items: &[&Observable]) -> f64 {
    items.iter().fold(1.0_f64, |m, o| m.max(o.norm()))
}

fn dist(x: &Observable, y: &Observable) -> f64 {
    linalg::op_norm(&(x.matrix() - y.matrix()))
}

fn records(items: &[(&str, &Observable)]) -> Vec<MatrixRecord> {
    items.iter().map(|(n, o)| MatrixRecord::of(*n, o)).collect()
}

/// The five orthogonality criteria agree on a mix of pair kinds.
pub fn orthogonality_sweep(cfg: &SuiteConfig) -> Result<SweepReport> {
    run("orthogonality", &["criteria_agree", "constructed_orthogonal"], cfg, &|g, rng, log| {
        let (kind, a, b) = g.mixed_pair(rng)?;
        log.count(0, kind.as_str(), 1);
        let ctx = || records(&[("A", &a), ("B", &b)]);
        match is_orthogonal(&a, &b) {
            Ok(r) => {
                log.count(0, if r.verdict { "verdict_true" } else { "verdict_false" }, 1);
                log.check(0, r.consistent(), r.residuals.range_overlap, || ("criteria disagree".into(), ctx()));
                if kind == crate::gen::PairKind::Orthogonal {
                    log.check(1, r.verdict, r.residuals.range_overlap, || ("constructed pair not orthogonal".into(), ctx()));
                }
            }
            Err(e) => log.error(0, &e, ctx()),
        }
        Ok(())
    })
}

/// Algebraic and spectral order tests agree, and true verdicts carry a valid witness.
pub fn order_sweep(cfg: &SuiteConfig) -> Result<SweepReport> {
    let checks = ["tests_agree", "constructed_comparable", "witness"];
    run("order", &checks, cfg, &|g, rng, log| {
        let (kind, a, b) = g.mixed_pair(rng)?;
        log.count(0, kind.as_str(), 1);
        for (x, y) in [(&a, &b), (&b, &a)] {
            let ctx = || records(&[("A", x), ("B", y)]);
            let r = match leq(x, y) {
                Ok(r) => r,
                Err(e) => {
                    log.error(0, &e, ctx());
                    continue;
                }
            };
            log.count(0, if r.verdict { "verdict_true" } else { "verdict_false" }, 1);
            log.check(0, r.algebraic == r.spectral_atoms, r.algebraic_residual, || ("tests disagree".into(), ctx()));
            if !r.verdict {
                continue;
            }
            let Some(c) = r.witness.as_ref() else {
                log.check(2, false, f64::INFINITY, || ("true verdict without witness".into(), ctx()));
                continue;
            };
            let bound = RESIDUAL_TOL * scale(&[x, y]);
            let sum = linalg::op_norm(&(x.matrix() + c.matrix() - y.matrix()));
            let orth = is_orthogonal(x, c).map(|o| o.verdict);
            match orth {
                Ok(orth) => log.check(2, orth && sum <= bound, sum, || {
                    (format!("A ⊥ C is {orth}, ‖A + C − B‖ = {sum:.3e}"), records(&[("A", x), ("B", y), ("C", c)]))
                }),
                Err(e) => log.error(2, &e, records(&[("A", x), ("B", y), ("C", c)])),
            }
        }
        if kind == crate::gen::PairKind::Comparable {
            let v = leq(&a, &b).map(|r| r.verdict).unwrap_or(false);
            log.check(1, v, 0.0, || ("constructed A ⪯ B not recognized".into(), records(&[("A", &a), ("B", &b)])));
        }
        Ok(())
    })
}

/// Reflexivity, antisymmetry and transitivity on generated chains.
pub fn order_law_sweep(cfg: &SuiteConfig) -> Result<SweepReport> {
    run("order_laws", &["reflexivity", "antisymmetry", "transitivity"], cfg, &|g, rng, log| {
        let chain = g.chain(rng)?;
        let [a, b, c] = &chain;
        let ctx = || records(&[("A", a), ("B", b), ("C", c)]);
        for x in &chain {
            let v = leq(x, x)?.verdict;
            log.check(0, v, 0.0, || ("x ⪯ x fails".into(), records(&[("x", x)])));
        }

        // a near-copy of c that differs by one ulp of its scale
        let noise = random_unitary(rng, g.dim).scale(f64::EPSILON * c.norm().max(1.0));
        let twin = Observable::from_matrix(c.matrix() + (&noise + noise.adjoint()).scale(0.5), &g.tol)?;
        let pairs = [(a, b), (b, c), (a, c), (c, &twin)];
        for (x, y) in pairs {
            if leq(x, y)?.verdict && leq(y, x)?.verdict {
                let r = dist(x, y);
                let bound = RESIDUAL_TOL * scale(&[x, y]);
                log.check(1, r <= bound, r, || ("x ⪯ y ⪯ x with x ≠ y".into(), records(&[("x", x), ("y", y)])));
            }
        }

        let ab = leq(a, b)?.verdict;
        let bc = leq(b, c)?.verdict;
        if ab && bc {
            let r = leq(a, c)?;
            log.check(2, r.verdict, r.algebraic_residual, || ("A ⪯ B ⪯ C but not A ⪯ C".into(), ctx()));
        } else {
            log.check(2, false, f64::INFINITY, || ("generated chain is not a chain".into(), ctx()));
        }
        Ok(())
    })
}

/// `B, C ⪯ A` and `B ⊥ C` imply `B ⊕ C ⪯ A`.
pub fn principal_sweep(cfg: &SuiteConfig) -> Result<SweepReport> {
    run("principal", &["principal"], cfg, &|g, rng, log| {
        let a = g.random_observable(rng)?;
        let (b, c) = g.split_below(rng, &a)?;
        let ctx = || records(&[("A", &a), ("B", &b), ("C", &c)]);
        match check_principal(&a, &b, &c) {
            Ok(v) => log.check(0, v, 0.0, || ("B ⊕ C ⪯ A fails".into(), ctx())),
            Err(e) => log.error(0, &e, ctx()),
        }
        Ok(())
    })
}

/// `A ⪯ B` with `B ≥ 0` implies `A ≤ B` in the Loewner order.
pub fn loewner_sweep(cfg: &SuiteConfig) -> Result<SweepReport> {
    run("loewner", &["loewner"], cfg, &|g, rng, log| {
        let (a, b) = g.psd_comparable_pair(rng)?;
        let ctx = || records(&[("A", &a), ("B", &b)]);
        match check_loewner_consequence(&a, &b) {
            Ok(v) => log.check(0, v, 0.0, || ("A ≤ B fails".into(), ctx())),
            Err(e) => log.error(0, &e, ctx()),
        }
        Ok(())
    })
}

/// Orthogonal pairs are jointly diagonalized by the returned unitary.
pub fn witness_sweep(cfg: &SuiteConfig) -> Result<SweepReport> {
    run("witness", &["unitary", "joint_diagonal", "products_vanish"], cfg, &|g, rng, log| {
        let (a, b) = if rng.random_bool(0.1) {
            (Observable::zero(g.dim, &g.tol)?, g.random_observable(rng)?)
        } else {
            g.orthogonal_pair(rng)?
        };
        let ctx = || records(&[("A", &a), ("B", &b)]);
        let u = match common_abelian_witness(&a, &b) {
            Ok(u) => u,
            Err(e) => {
                log.error(0, &e, ctx());
                return Ok(());
            }
        };
        let s = scale(&[&a, &b]);
        let r = witness_residuals(&a, &b, &u);
        log.check(0, r.unitarity <= RESIDUAL_TOL, r.unitarity, || ("U†U ≠ I".into(), ctx()));
        let off = r.off_diagonal_a.max(r.off_diagonal_b);
        log.check(1, off <= RESIDUAL_TOL * s, off, || ("conjugates not diagonal".into(), ctx()));
        let prod = r.ab_norm.max(r.ba_norm);
        log.check(2, prod <= RESIDUAL_TOL * s * s, prod, || ("AB or BA nonzero".into(), ctx()));
        Ok(())
    })
}

/// Same simple spectrum, independent eigenbases: every nonzero value matches
/// but no eigenline is shared, so the meet is 0.
pub fn generic_meet_sweep(cfg: &SuiteConfig) -> Result<SweepReport> {
    run("generic_meet", &["meet_zero"], cfg, &|g, rng, log| {
        let a = g.simple_observable(rng)?;
        let v = random_unitary(rng, g.dim);
        let b = Observable::new(a.hermitian().conjugate_by(&v), &g.tol)?;
        let ctx = || records(&[("A", &a), ("B", &b)]);
        match meet(&a, &b) {
            Ok(m) => {
                log.check(0, m.is_zero(), m.norm(), || ("meet of generic pair is nonzero".into(), ctx()));
            }
            Err(e) => log.error(0, &e, ctx()),
        }
        Ok(())
    })
}

/// Family meet and join agree with their pairwise folds.
pub fn family_sweep(cfg: &SuiteConfig) -> Result<SweepReport> {
    run("families", &["meet_family_fold", "join_family_fold"], cfg, &|g, rng, log| {
        let (a, b) = g.commuting_pair(rng)?;
        let c = g.below(rng, &a)?;
        let ctx = || records(&[("A", &a), ("B", &b), ("C", &c)]);
        let fam = meet_family(&[a.clone(), b.clone(), c.clone()])?;
        let fold = meet(&meet(&a, &b)?, &c)?;
        let r = dist(&fam, &fold);
        let bound = RESIDUAL_TOL * scale(&[&a, &b, &c]);
        log.check(0, r <= bound, r, || ("meet family differs from fold".into(), ctx()));

        let f = g.orthogonal_family(rng, 3)?;
        let fam = join_family(&f)?;
        let fold = join(&join(&f[0], &f[1])?, &f[2])?;
        let sum = f[0].matrix() + f[1].matrix() + f[2].matrix();
        let r = dist(&fam, &fold).max(linalg::op_norm(&(fam.matrix() - sum)));
        let bound = RESIDUAL_TOL * scale(&[&f[0], &f[1], &f[2]]);
        log.check(1, r <= bound, r, || {
            ("join family differs from fold".into(), records(&[("A", &f[0]), ("B", &f[1]), ("C", &f[2])]))
        });
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::SpectrumStyle;

    #[test]
    fn every_sweep_passes_small() {
        for style in [SpectrumStyle::Separated, SpectrumStyle::Clustered] {
            let cfg = SuiteConfig::new(40, 5, 17).with_style(style);
            for name in SWEEPS {
                let r = run_named(name, &cfg).unwrap();
                for c in &r.checks {
                    assert!(c.passed(), "{style:?} {name}/{}: {:?}", c.name, c.counterexamples.first());
                }
            }
        }
    }

    #[test]
    fn unknown_sweep_is_rejected() {
        assert!(run_named("nope", &SuiteConfig::new(1, 2, 0)).is_err());
    }
}
