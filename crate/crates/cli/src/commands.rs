use std::fs;
use std::path::Path;

use clap::builder::PossibleValuesParser;
use orthoalg_core::axioms::{axiom_suite_with, SuiteConfig};
use orthoalg_core::gen::SpectrumStyle;
use orthoalg_core::heisenberg::heisenberg_demo;
use orthoalg_core::linalg;
use orthoalg_core::oracle::differential::{differential_sweep_with, DifferentialConfig};
use orthoalg_core::report::{CheckTally, Counterexample};
use orthoalg_core::spectral::{spectral_projection, BorelSpec};
use orthoalg_core::sweeps::{self, SWEEPS};
use orthoalg_core::{
    is_orthogonal, join, join_family, join_precondition, leq, meet, meet_family, Error, Observable, Tolerances,
};
use serde::Serialize;
use serde_json::json;

use crate::input::{self, Loaded, ObservableFile};
use crate::run::{InputRecord, Outcome, RunReport};
use crate::{Failure, Global};

/// Fold and family results may differ by this much, relative to scale.
const FAMILY_TOL: f64 = 1e-8;
/// Largest meet norm the demo accepts as zero.
const DEMO_MEET_TOL: f64 = 1e-8;

pub fn sweep_modes() -> PossibleValuesParser {
    let mut modes = vec!["axioms", "oracle"];
    modes.extend(SWEEPS);
    PossibleValuesParser::new(modes)
}

fn load_all(global: &Global, paths: &[&str]) -> Result<(Vec<Loaded>, Tolerances), Failure> {
    let loaded = paths.iter().map(|p| input::load(p)).collect::<Result<Vec<_>, _>>()?;
    let tol = input::resolve_tolerances(&global.profile, &loaded, &global.overrides)?;
    Ok((loaded, tol))
}

fn base_report(command: &str, loaded: &[Loaded], tol: Tolerances) -> RunReport {
    let mut r = RunReport::new(command, tol);
    r.inputs = loaded.iter().map(InputRecord::from).collect();
    r
}

#[derive(Serialize)]
struct AtomRow {
    value: f64,
    rank: usize,
    resolution: f64,
}

fn atom_rows(o: &Observable) -> Vec<AtomRow> {
    o.decomp()
        .atoms()
        .iter()
        .map(|a| AtomRow {
            value: a.value,
            rank: a.proj.rank(),
            resolution: a.resolution,
        })
        .collect()
}

fn atom_lines(out: &mut Outcome, label: &str, o: &Observable) {
    out.line(format!("{label}: dim {}, norm {:.6}", o.dim(), o.norm()));
    for a in atom_rows(o) {
        out.line(format!("  atom {:>+.12} rank {}", a.value, a.rank));
    }
}

pub fn check_orth(global: &Global, a: &str, b: &str) -> Result<Outcome, Failure> {
    let (loaded, tol) = load_all(global, &[a, b])?;
    let oa = input::observable(&loaded[0], &tol)?;
    let ob = input::observable(&loaded[1], &tol)?;
    let rep = is_orthogonal(&oa, &ob)?;

    let mut report = base_report("check orth", &loaded, tol);
    let names = ["P_A·P_B = 0", "ran A ⊆ null B", "ran B ⊆ null A", "AB = 0", "BA = 0"];
    let keys = ["range_orthogonal", "ran_a_in_null_b", "ran_b_in_null_a", "ab_zero", "ba_zero"];
    let s = &rep.residuals;
    let residuals = [s.range_overlap, s.ran_a_in_null_b, s.ran_b_in_null_a, s.ab_norm, s.ba_norm];
    let bounds = [s.projection_bound, s.projection_bound, s.projection_bound, s.product_bound, s.product_bound];
    for (i, ok) in rep.criteria().into_iter().enumerate() {
        report.verdict(keys[i], ok);
        report.residual(keys[i], residuals[i]);
    }
    report.verdict("orthogonal", rep.verdict);
    report.details = serde_json::to_value(rep).unwrap_or_default();
    report.exit_code = if rep.verdict { 0 } else { 1 };

    let mut out = Outcome::new(report);
    out.line(format!("A ⊥ B: {}", rep.verdict));
    for (i, ok) in rep.criteria().into_iter().enumerate() {
        out.line(format!(
            "  ({}) {:<16} {:<5}  residual {:.3e} (bound {:.3e})",
            i + 1,
            names[i],
            ok,
            residuals[i],
            bounds[i]
        ));
    }
    Ok(out)
}

pub fn check_leq(global: &Global, a: &str, b: &str) -> Result<Outcome, Failure> {
    let (loaded, tol) = load_all(global, &[a, b])?;
    let oa = input::observable(&loaded[0], &tol)?;
    let ob = input::observable(&loaded[1], &tol)?;
    let rep = leq(&oa, &ob)?;

    let mut report = base_report("check leq", &loaded, tol);
    report.verdict("algebraic", rep.algebraic);
    report.verdict("spectral_atoms", rep.spectral_atoms);
    report.verdict("leq", rep.verdict);
    report.residual("algebraic", rep.algebraic_residual);
    report.residual("spectral_atoms", rep.spectral_residual);

    let mut witness = serde_json::Value::Null;
    let mut witness_line = None;
    if let Some(c) = &rep.witness {
        let orth = is_orthogonal(&oa, c)?;
        let sum_residual = linalg::op_norm(&(oa.matrix() + c.matrix() - ob.matrix()));
        report.verdict("witness_orthogonal", orth.verdict);
        report.residual("witness_sum", sum_residual);
        witness = json!({
            "entries": linalg::to_entries(c.matrix()),
            "orthogonal_to_a": orth.verdict,
            "sum_residual": sum_residual,
        });
        witness_line = Some(format!(
            "  witness C = B − A: A ⊥ C {}, ‖A + C − B‖ = {:.3e}",
            orth.verdict, sum_residual
        ));
    }
    report.details = json!({
        "algebraic": rep.algebraic,
        "spectral_atoms": rep.spectral_atoms,
        "algebraic_residual": rep.algebraic_residual,
        "algebraic_bound": rep.algebraic_bound,
        "spectral_residual": rep.spectral_residual,
        "verdict": rep.verdict,
        "witness": witness,
    });
    report.exit_code = if rep.verdict { 0 } else { 1 };

    let mut out = Outcome::new(report);
    out.line(format!("A ⪯ B: {}", rep.verdict));
    let eq = if rep.algebraic { "=" } else { "≠" };
    out.line(format!(
        "  A² {eq} BA             residual {:.3e} (bound {:.3e})",
        rep.algebraic_residual, rep.algebraic_bound
    ));
    out.line(format!(
        "  atom containment   {:<5} residual {:.3e}",
        rep.spectral_atoms, rep.spectral_residual
    ));
    if let Some(l) = witness_line {
        out.line(l);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeOp {
    Meet,
    Join,
}

impl LatticeOp {
    fn name(self) -> &'static str {
        match self {
            LatticeOp::Meet => "meet",
            LatticeOp::Join => "join",
        }
    }

    fn pair(self, a: &Observable, b: &Observable) -> orthoalg_core::Result<Observable> {
        match self {
            LatticeOp::Meet => meet(a, b),
            LatticeOp::Join => join(a, b),
        }
    }

    fn family(self, f: &[Observable]) -> orthoalg_core::Result<Observable> {
        match self {
            LatticeOp::Meet => meet_family(f),
            LatticeOp::Join => join_family(f),
        }
    }
}

pub fn lattice(
    global: &Global,
    op: LatticeOp,
    paths: &[String],
    out_path: Option<&str>,
    name: Option<String>,
) -> Result<Outcome, Failure> {
    let refs: Vec<&str> = paths.iter().map(String::as_str).collect();
    let (loaded, tol) = load_all(global, &refs)?;
    let obs = loaded
        .iter()
        .map(|l| input::observable(l, &tol))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = base_report(op.name(), &loaded, tol);

    // left fold; on failure remember which step and which pair of atoms
    let mut acc = obs[0].clone();
    let mut failed = None;
    for (step, next) in obs.iter().enumerate().skip(1) {
        match op.pair(&acc, next) {
            Ok(r) => acc = r,
            Err(Error::NoUpperBound { lambda, mu, overlap }) => {
                failed = Some((step, lambda, mu, overlap));
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let family = op.family(&obs);
    if let Some((step, lambda, mu, overlap)) = failed {
        let agrees = matches!(family, Err(Error::NoUpperBound { .. }));
        report.verdict("exists", false);
        report.verdict("family_agrees", agrees);
        report.residual("overlap", overlap);
        let pre = if step == 1 {
            Some(join_precondition(&obs[0], &obs[1])?)
        } else {
            None
        };
        report.details = json!({
            "failed_at": paths[step],
            "violating_pair": [lambda, mu],
            "overlap": overlap,
            "precondition": pre,
        });
        report.exit_code = if agrees { 1 } else { 3 };
        let mut out = Outcome::new(report);
        out.line(format!(
            "no upper bound: atoms ({lambda}, {mu}) have overlapping spectral projections (‖P P‖ = {overlap:.3e}) at {}",
            paths[step]
        ));
        return Ok(out);
    }

    let (agrees, diff) = match &family {
        Ok(f) => {
            let d = linalg::op_norm(&(f.matrix() - acc.matrix()));
            (d <= FAMILY_TOL * acc.decomp().scale().max(f.decomp().scale()), d)
        }
        Err(_) => (false, f64::INFINITY),
    };
    report.verdict("exists", true);
    report.verdict("family_agrees", agrees);
    report.residual("family_difference", diff);
    report.residual("norm", acc.norm());
    report.details = json!({
        "dim": acc.dim(),
        "atoms": atom_rows(&acc),
        "zero": acc.is_zero(),
        "out": out_path,
    });
    report.exit_code = if agrees { 0 } else { 3 };
    if let Some(p) = out_path {
        input::write_observable(p, &ObservableFile::from_observable(&acc, name))?;
    }

    let mut out = Outcome::new(report);
    atom_lines(&mut out, op.name(), &acc);
    if let Some(p) = out_path {
        out.line(format!("written to {p}"));
    }
    for a in atom_rows(&acc) {
        out.record("atom", a);
    }
    Ok(out)
}

pub struct SweepRequest {
    pub mode: String,
    pub trials: u64,
    pub dim: usize,
    pub seed: u64,
    pub clustered: bool,
    pub counterexample_dir: String,
}

#[derive(Serialize)]
struct CounterexampleFile<'a> {
    mode: &'a str,
    seed: u64,
    dim: usize,
    style: Option<SpectrumStyle>,
    tolerances: Tolerances,
    counterexample: &'a Counterexample,
}

fn write_counterexamples(
    req: &SweepRequest,
    style: Option<SpectrumStyle>,
    tol: Tolerances,
    checks: &[CheckTally],
) -> Result<Vec<String>, Failure> {
    let mut written = Vec::new();
    for t in checks {
        for ce in &t.counterexamples {
            let dir = Path::new(&req.counterexample_dir);
            fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
            let path = dir.join(format!("{}-{}-seed{}-trial{}.json", req.mode, t.name, req.seed, ce.trial));
            let body = CounterexampleFile {
                mode: &req.mode,
                seed: req.seed,
                dim: req.dim,
                style,
                tolerances: tol,
                counterexample: ce,
            };
            let text = serde_json::to_string_pretty(&body).map_err(|e| Failure::usage(e.to_string()))?;
            fs::write(&path, text + "\n").map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            written.push(path.display().to_string());
        }
    }
    Ok(written)
}

#[derive(Serialize)]
struct TallySummary<'a> {
    name: &'a str,
    instances: u64,
    failures: u64,
    max_residual: f64,
    #[serde(skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    counters: &'a std::collections::BTreeMap<String, u64>,
}

impl<'a> From<&'a CheckTally> for TallySummary<'a> {
    fn from(t: &'a CheckTally) -> Self {
        Self {
            name: &t.name,
            instances: t.instances,
            failures: t.failures,
            max_residual: t.max_residual,
            counters: &t.counters,
        }
    }
}

pub fn sweep(global: &Global, req: &SweepRequest) -> Result<Outcome, Failure> {
    let tol = input::resolve_tolerances(&global.profile, &[], &global.overrides)?;
    let style = if req.clustered {
        SpectrumStyle::Clustered
    } else {
        SpectrumStyle::Separated
    };
    let (checks, passed, extra, used_style) = match req.mode.as_str() {
        "oracle" => {
            if req.clustered {
                return Err(Failure::usage("--clustered does not apply to the oracle sweep, whose values are integers"));
            }
            let cfg = DifferentialConfig {
                trials: req.trials,
                dim: req.dim,
                seed: req.seed,
                tol,
            };
            let r = differential_sweep_with(&cfg)?;
            let extra = json!({ "partitions_by_atoms": r.partitions_by_atoms });
            (r.checks, r.passed, extra, None)
        }
        mode => {
            let cfg = SuiteConfig::new(req.trials, req.dim, req.seed)
                .with_style(style)
                .with_tolerances(tol);
            if mode == "axioms" {
                let r = axiom_suite_with(&cfg)?;
                (r.axioms, r.passed, serde_json::Value::Null, Some(style))
            } else {
                let r = sweeps::run_named(mode, &cfg)?;
                (r.checks, r.passed, serde_json::Value::Null, Some(style))
            }
        }
    };

    let mut report = RunReport::new(&format!("sweep {}", req.mode), tol);
    report.seed = Some(req.seed);
    for t in &checks {
        report.verdict(&t.name, t.passed());
        report.residual(&t.name, t.max_residual);
    }
    report.verdict("passed", passed);
    let summaries: Vec<TallySummary> = checks.iter().map(TallySummary::from).collect();
    report.details = json!({
        "mode": req.mode,
        "trials": req.trials,
        "dim": req.dim,
        "style": used_style,
        "checks": summaries,
        "oracle": extra,
    });
    report.counterexamples = write_counterexamples(req, used_style, tol, &checks)?;
    report.exit_code = if passed { 0 } else { 1 };

    let mut out = Outcome::new(report);
    let style_label = used_style.map(|s| format!(", {s:?} spectra").to_lowercase()).unwrap_or_default();
    out.line(format!("{} trials, dim {}{}", req.trials, req.dim, style_label));
    for t in &checks {
        out.line(format!(
            "  {:<28} {:>7} instances  {:>4} failures  max residual {:.3e}  {}",
            t.name,
            t.instances,
            t.failures,
            t.max_residual,
            if t.passed() { "ok" } else { "FAIL" }
        ));
    }
    for s in summaries {
        out.record("check", s);
    }
    Ok(out)
}

pub fn demo(global: &Global, n: usize, hbar: f64) -> Result<Outcome, Failure> {
    let tol = input::resolve_tolerances(&global.profile, &[], &global.overrides)?;
    let (norm, r) = heisenberg_demo(n, hbar, &tol)?;
    let mut report = RunReport::new("demo", tol);
    let all_trivial = r.nonzero_intersections == 0 && r.matched.iter().all(|m| m.meet_rank == 0);
    report.verdict("meet_is_zero", r.meet_is_zero);
    report.verdict("meet_norm_within_tol", norm <= DEMO_MEET_TOL);
    report.verdict("intersections_trivial", all_trivial);
    report.residual("meet_norm", norm);
    report.residual("commutator_defect", r.commutator.norm);
    report.residual("commutator_off_corner", r.commutator.off_corner);
    report.details = serde_json::to_value(&r).unwrap_or_default();
    report.exit_code = if r.meet_is_zero && norm <= DEMO_MEET_TOL && all_trivial { 0 } else { 1 };

    let mut out = Outcome::new(report);
    out.line(format!("n = {n}, ħ = {hbar}"));
    out.line(format!("‖Q ∧ P‖ = {norm:.3e}"));
    out.line(format!(
        "{} Q atoms, {} P atoms, {} matched by value, {} of {} atom pairs intersect",
        r.q_atoms,
        r.p_atoms,
        r.matched.len(),
        r.nonzero_intersections,
        r.pairs_checked
    ));
    for m in &r.matched {
        out.line(format!(
            "  λ = {:>+.9}  rank {} ∧ rank {} = {}  max cosine {:.6}",
            m.q_value, m.q_rank, m.p_rank, m.meet_rank, m.cosine
        ));
    }
    out.line(format!(
        "QP − PQ − iħI: norm {:.3e}, corner entry {:+.3}i, elsewhere {:.1e}",
        r.commutator.norm, r.commutator.corner[1], r.commutator.off_corner
    ));
    out.line(r.note.clone());
    for m in &r.matched {
        out.record("atom_pair", m);
    }
    Ok(out)
}

pub fn spectrum(global: &Global, path: &str, delta: Option<&str>) -> Result<Outcome, Failure> {
    let (loaded, tol) = load_all(global, &[path])?;
    let o = input::observable(&loaded[0], &tol)?;
    let mut report = base_report("spectrum", &loaded, tol);
    let d = o.decomp();
    report.residual("norm", o.norm());
    report.residual(
        "reconstruction",
        linalg::op_norm(&(o.spectral_matrix() - o.matrix())),
    );
    let ambiguities: Vec<_> = d.ambiguities().iter().map(|a| [a.lo, a.hi, a.threshold]).collect();
    report.verdict("unambiguous_clustering", ambiguities.is_empty());

    let mut selection = serde_json::Value::Null;
    let mut lines = Vec::new();
    if let Some(spec) = delta {
        let parsed: BorelSpec = spec.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
        let set = parsed.resolve(d);
        let p = spectral_projection(d, &set);
        lines.push(format!("P({spec}) selects {set}, rank {}", p.rank()));
        selection = json!({
            "delta": spec,
            "atoms": set.atoms(),
            "rank": p.rank(),
            "projection": linalg::to_entries(p.matrix()),
        });
    }
    report.details = json!({
        "atoms": atom_rows(&o),
        "ambiguities": ambiguities,
        "selection": selection,
    });

    let mut out = Outcome::new(report);
    atom_lines(&mut out, "spectrum", &o);
    for a in d.ambiguities() {
        out.line(format!(
            "  warning: chain {:.6e}..{:.6e} is wider than the threshold {:.3e}",
            a.lo, a.hi, a.threshold
        ));
    }
    out.text.extend(lines);
    for a in atom_rows(&o) {
        out.record("atom", a);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use orthoalg_core::report::MatrixRecord;

    #[test]
    fn counterexamples_are_replayable_files() {
        let dir = tempfile::TempDir::new().unwrap();
        let req = SweepRequest {
            mode: "axioms".into(),
            trials: 10,
            dim: 2,
            seed: 5,
            clustered: false,
            counterexample_dir: dir.path().join("ce").display().to_string(),
        };
        let mut tally = CheckTally::new("GOA4");
        tally.failures = 1;
        tally.counterexamples.push(Counterexample {
            check: "GOA4".into(),
            trial: 7,
            detail: "x ⊕ y = 0 but x ≠ 0".into(),
            matrices: vec![MatrixRecord::new("x", &linalg::real_diag(&[1.0, 0.0]))],
        });
        let ok = CheckTally::new("OA1");
        let tol = Tolerances::default();
        let written = write_counterexamples(&req, Some(SpectrumStyle::Separated), tol, &[ok, tally]).unwrap();
        assert_eq!(written.len(), 1);
        assert!(written[0].ends_with("axioms-GOA4-seed5-trial7.json"));
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&written[0]).unwrap()).unwrap();
        assert_eq!(v["seed"], 5);
        assert_eq!(v["style"], "separated");
        assert_eq!(v["counterexample"]["trial"], 7);
        let m: MatrixRecord = serde_json::from_value(v["counterexample"]["matrices"][0].clone()).unwrap();
        assert_eq!(m.to_matrix().unwrap(), linalg::real_diag(&[1.0, 0.0]));
    }

    #[test]
    fn nothing_written_without_failures() {
        let dir = tempfile::TempDir::new().unwrap();
        let ce = dir.path().join("ce");
        let req = SweepRequest {
            mode: "oracle".into(),
            trials: 1,
            dim: 1,
            seed: 0,
            clustered: false,
            counterexample_dir: ce.display().to_string(),
        };
        let written = write_counterexamples(&req, None, Tolerances::default(), &[CheckTally::new("order")]).unwrap();
        assert!(written.is_empty());
        assert!(!ce.exists());
    }
}
