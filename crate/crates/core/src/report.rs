//! Per-check tallies shared by the randomized sweeps.
//!
//! Each trial writes into its own [`TrialLog`]; [`merge`] folds the logs in
//! trial order, so the result does not depend on how trials were scheduled.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{self, CMat};
use crate::observable::Observable;

/// Stored counterexamples per check; later failures are only counted.
pub const COUNTEREXAMPLE_CAP: usize = 8;

/// A named matrix in the same `[re, im]` layout as observable files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub name: String,
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixRecord {
    pub fn new(name: impl Into<String>, m: &CMat) -> Self {
        Self {
            name: name.into(),
            dim: m.nrows(),
            entries: linalg::to_entries(m),
        }
    }

    pub fn of(name: impl Into<String>, o: &Observable) -> Self {
        Self::new(name, o.matrix())
    }

    pub fn to_matrix(&self) -> Option<CMat> {
        linalg::from_entries(&self.entries)
    }
}

/// A failed instance, with enough data to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub check: String,
    pub trial: u64,
    pub detail: String,
    pub matrices: Vec<MatrixRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckTally {
    pub name: String,
    pub instances: u64,
    pub failures: u64,
    pub max_residual: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub counters: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub counterexamples: Vec<Counterexample>,
}

impl CheckTally {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            instances: 0,
            failures: 0,
            max_residual: 0.0,
            counters: BTreeMap::new(),
            counterexamples: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone)]
enum Entry {
    Check {
        check: usize,
        ok: bool,
        residual: f64,
        failure: Option<(String, Vec<MatrixRecord>)>,
    },
    Count {
        check: usize,
        key: String,
        n: u64,
    },
}

/// Observations from one trial.
#[derive(Debug, Clone)]
pub struct TrialLog {
    trial: u64,
    entries: Vec<Entry>,
}

impl TrialLog {
    pub fn new(trial: u64) -> Self {
        Self {
            trial,
            entries: Vec::new(),
        }
    }

    pub fn trial(&self) -> u64 {
        self.trial
    }

    /// Records one instance of `check`. `describe` runs only on failure.
    pub fn check(
        &mut self,
        check: usize,
        ok: bool,
        residual: f64,
        describe: impl FnOnce() -> (String, Vec<MatrixRecord>),
    ) {
        let failure = (!ok).then(describe);
        self.entries.push(Entry::Check {
            check,
            ok,
            residual,
            failure,
        });
    }

    /// Records an operation that errored where it should not have.
    pub fn error(&mut self, check: usize, err: &Error, matrices: Vec<MatrixRecord>) {
        self.entries.push(Entry::Check {
            check,
            ok: false,
            residual: f64::INFINITY,
            failure: Some((err.to_string(), matrices)),
        });
    }

    pub fn count(&mut self, check: usize, key: impl Into<String>, n: u64) {
        self.entries.push(Entry::Count {
            check,
            key: key.into(),
            n,
        });
    }
}

/// Folds trial logs, in the order given, into one tally per check name.
pub fn merge(names: &[&str], logs: impl IntoIterator<Item = TrialLog>) -> Vec<CheckTally> {
    let mut tallies: Vec<CheckTally> = names.iter().map(|n| CheckTally::new(n)).collect();
    for log in logs {
        for entry in log.entries {
            match entry {
                Entry::Check {
                    check,
                    ok,
                    residual,
                    failure,
                } => {
                    let t = &mut tallies[check];
                    t.instances += 1;
                    if residual.is_nan() {
                        t.max_residual = f64::NAN;
                    } else if !t.max_residual.is_nan() {
                        t.max_residual = t.max_residual.max(residual);
                    }
                    if !ok {
                        t.failures += 1;
                        if let Some((detail, matrices)) = failure {
                            if t.counterexamples.len() < COUNTEREXAMPLE_CAP {
                                t.counterexamples.push(Counterexample {
                                    check: t.name.clone(),
                                    trial: log.trial,
                                    detail,
                                    matrices,
                                });
                            }
                        }
                    }
                }
                Entry::Count { check, key, n } => {
                    *tallies[check].counters.entry(key).or_default() += n;
                }
            }
        }
    }
    tallies
}
