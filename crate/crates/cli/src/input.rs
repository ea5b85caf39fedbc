//! Observable files and tolerance resolution.

use std::fs;
use std::path::Path;

use orthoalg_core::linalg;
use orthoalg_core::{Observable, Tolerances};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

/// Per-field tolerance overrides, as carried by files and flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proj_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermitian_tol: Option<f64>,
}

impl ToleranceOverride {
    /// Drops the fields that `mask` sets.
    fn without(&self, mask: &Self) -> Self {
        let keep = |x: Option<f64>, m: Option<f64>| if m.is_some() { None } else { x };
        Self {
            cluster_rel: keep(self.cluster_rel, mask.cluster_rel),
            zero_abs: keep(self.zero_abs, mask.zero_abs),
            proj_tol: keep(self.proj_tol, mask.proj_tol),
            hermitian_tol: keep(self.hermitian_tol, mask.hermitian_tol),
        }
    }

    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            cluster_rel: self.cluster_rel.unwrap_or(base.cluster_rel),
            zero_abs: self.zero_abs.unwrap_or(base.zero_abs),
            proj_tol: self.proj_tol.unwrap_or(base.proj_tol),
            hermitian_tol: self.hermitian_tol.unwrap_or(base.hermitian_tol),
        }
    }

    /// Field-wise union; two different values for one field is an error.
    fn merge(&self, other: &Self, what: &str) -> Result<Self, Failure> {
        let pick = |name: &str, x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(a), Some(b)) if a != b => Err(Failure::usage(format!(
                "{what}: conflicting {name} overrides {a:e} and {b:e}; pass --tol-* to settle it"
            ))),
            (a, b) => Ok(a.or(b)),
        };
        Ok(Self {
            cluster_rel: pick("cluster_rel", self.cluster_rel, other.cluster_rel)?,
            zero_abs: pick("zero_abs", self.zero_abs, other.zero_abs)?,
            proj_tol: pick("proj_tol", self.proj_tol, other.proj_tol)?,
            hermitian_tol: pick("hermitian_tol", self.hermitian_tol, other.hermitian_tol)?,
        })
    }
}

/// On-disk observable: `entries[i][j] = [re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableFile {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverride>,
}

impl ObservableFile {
    pub fn from_observable(o: &Observable, name: Option<String>) -> Self {
        Self {
            dim: o.dim(),
            entries: linalg::to_entries(o.matrix()),
            name,
            tolerances: None,
        }
    }

    fn check_shape(&self) -> Result<(), String> {
        if self.dim == 0 {
            return Err("dim must be at least 1".into());
        }
        if self.entries.len() != self.dim {
            return Err(format!("expected {} rows, found {}", self.dim, self.entries.len()));
        }
        if let Some((i, row)) = self.entries.iter().enumerate().find(|(_, r)| r.len() != self.dim) {
            return Err(format!("row {i} has {} entries, expected {}", row.len(), self.dim));
        }
        if self.entries.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err("entries must be finite".into());
        }
        Ok(())
    }
}

/// A parsed input file, not yet bound to tolerances.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub path: String,
    pub sha256: String,
    pub file: ObservableFile,
}

pub fn load(path: &str) -> Result<Loaded, Failure> {
    let bytes = fs::read(Path::new(path)).map_err(|e| Failure::usage(format!("{path}: {e}")))?;
    let file: ObservableFile =
        serde_json::from_slice(&bytes).map_err(|e| Failure::usage(format!("{path}: malformed observable file: {e}")))?;
    file.check_shape().map_err(|e| Failure::usage(format!("{path}: {e}")))?;
    Ok(Loaded {
        path: path.to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        file,
    })
}

/// Profile, then file overrides, then flags.
pub fn resolve_tolerances(
    profile: &str,
    files: &[Loaded],
    flags: &ToleranceOverride,
) -> Result<Tolerances, Failure> {
    let base = Tolerances::preset(profile).ok_or_else(|| {
        Failure::usage(format!(
            "unknown tolerance profile {profile:?} (expected one of {})",
            Tolerances::PRESETS.join(", ")
        ))
    })?;
    let mut from_files = ToleranceOverride::default();
    for f in files {
        if let Some(o) = &f.file.tolerances {
            from_files = from_files.merge(&o.without(flags), &f.path)?;
        }
    }
    let tol = flags.apply(from_files.apply(base));
    tol.validate().map_err(Failure::from)?;
    Ok(tol)
}

pub fn observable(l: &Loaded, tol: &Tolerances) -> Result<Observable, Failure> {
    let m = linalg::from_entries(&l.file.entries).ok_or_else(|| Failure::usage(format!("{}: bad entries", l.path)))?;
    Observable::from_matrix(m, tol).map_err(|e| Failure::from(e).context(&l.path))
}

/// One matrix row per line, so files diff row by row.
pub fn render_observable(file: &ObservableFile) -> String {
    let mut s = format!("{{\n  \"dim\": {},\n", file.dim);
    if let Some(name) = &file.name {
        s += &format!("  \"name\": {},\n", json(name));
    }
    if let Some(t) = &file.tolerances {
        s += &format!("  \"tolerances\": {},\n", json(t));
    }
    s += "  \"entries\": [\n";
    let rows: Vec<String> = file.entries.iter().map(|r| format!("    {}", json(r))).collect();
    s += &rows.join(",\n");
    s += "\n  ]\n}\n";
    s
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

pub fn write_observable(path: &str, file: &ObservableFile) -> Result<(), Failure> {
    fs::write(path, render_observable(file)).map_err(|e| Failure::usage(format!("{path}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loaded(tol: Option<ToleranceOverride>) -> Loaded {
        Loaded {
            path: "x.json".into(),
            sha256: String::new(),
            file: ObservableFile {
                dim: 1,
                entries: vec![vec![[1.0, 0.0]]],
                name: None,
                tolerances: tol,
            },
        }
    }

    #[test]
    fn layering_order() {
        let file = ToleranceOverride {
            proj_tol: Some(1e-6),
            zero_abs: Some(1e-9),
            ..Default::default()
        };
        let flags = ToleranceOverride {
            proj_tol: Some(1e-7),
            ..Default::default()
        };
        let t = resolve_tolerances("strict", &[loaded(Some(file))], &flags).unwrap();
        assert_eq!(t.proj_tol, 1e-7);
        assert_eq!(t.zero_abs, 1e-9);
        assert_eq!(t.cluster_rel, 1e-10);
    }

    #[test]
    fn conflicting_files_are_rejected() {
        let a = ToleranceOverride {
            proj_tol: Some(1e-6),
            ..Default::default()
        };
        let b = ToleranceOverride {
            proj_tol: Some(1e-7),
            ..Default::default()
        };
        let err = resolve_tolerances("default", &[loaded(Some(a)), loaded(Some(b))], &Default::default()).unwrap_err();
        assert_eq!(err.code, 2);
        let ok = resolve_tolerances("default", &[loaded(Some(a)), loaded(Some(b))], &b).unwrap();
        assert_eq!(ok.proj_tol, 1e-7);
    }

    #[test]
    fn unknown_profile() {
        assert_eq!(resolve_tolerances("tight", &[], &Default::default()).unwrap_err().code, 2);
    }

    #[test]
    fn rendered_file_parses_back() {
        let f = ObservableFile {
            dim: 2,
            entries: vec![vec![[0.1, 0.0], [1.0 / 3.0, -2e-17]], vec![[1.0 / 3.0, 2e-17], [-5.0, 0.0]]],
            name: Some("x \"y\"".into()),
            tolerances: Some(ToleranceOverride {
                proj_tol: Some(1e-9),
                ..Default::default()
            }),
        };
        let text = render_observable(&f);
        assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("[[")).count(), 2);
        let back: ObservableFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn shape_errors() {
        let mut f = loaded(None).file;
        f.dim = 2;
        assert!(f.check_shape().is_err());
        f.entries = vec![vec![[0.0, 0.0]; 2], vec![[0.0, 0.0]]];
        assert!(f.check_shape().is_err());
        f.entries = vec![vec![[0.0, 0.0]; 2]; 2];
        assert!(f.check_shape().is_ok());
        f.entries[0][1] = [f64::NAN, 0.0];
        assert!(f.check_shape().is_err());
    }
}
