use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;
use crate::tolerance::Tolerances;

/// A finite set of real atoms.
///
/// Every spectral measure handled here is supported on finitely many points,
/// so a Borel set is represented by the atoms it contains. Values within
/// `zero_abs` of zero are stored as exactly `0.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BorelSet {
    atoms: Vec<f64>,
    contains_zero: bool,
}

impl BorelSet {
    pub fn new(values: impl IntoIterator<Item = f64>, tol: &Tolerances) -> Self {
        let mut atoms: Vec<f64> = values
            .into_iter()
            .map(|v| if v.abs() <= tol.zero_abs { 0.0 } else { v })
            .collect();
        atoms.sort_by(f64::total_cmp);
        atoms.dedup();
        let contains_zero = atoms.contains(&0.0);
        Self {
            atoms,
            contains_zero,
        }
    }

    /// Shorthand with default tolerances.
    pub fn of(values: &[f64]) -> Self {
        Self::new(values.iter().copied(), &Tolerances::default())
    }

    pub fn empty() -> Self {
        Self {
            atoms: Vec::new(),
            contains_zero: false,
        }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn contains_zero(&self) -> bool {
        self.contains_zero
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.atoms.binary_search_by(|a| a.total_cmp(&x)).is_ok()
    }

    pub fn without_zero(&self) -> Self {
        Self {
            atoms: self.atoms.iter().copied().filter(|&a| a != 0.0).collect(),
            contains_zero: false,
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        atoms.sort_by(f64::total_cmp);
        atoms.dedup();
        Self {
            atoms,
            contains_zero: self.contains_zero || other.contains_zero,
        }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        !self.atoms.iter().any(|&a| other.contains(a))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.atoms.iter().all(|&a| other.contains(a))
    }
}

/// A finite partition of a [`BorelSet`] into nonempty, pairwise disjoint blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    parent: BorelSet,
    blocks: Vec<BorelSet>,
}

impl Partition {
    pub fn new(parent: BorelSet, blocks: Vec<BorelSet>) -> Result<Self> {
        if blocks.iter().any(BorelSet::is_empty) {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        for (i, a) in blocks.iter().enumerate() {
            for b in &blocks[i + 1..] {
                if !a.is_disjoint(b) {
                    return Err(Error::InvalidPartition("blocks overlap".into()));
                }
            }
        }
        let union = blocks.iter().fold(BorelSet::empty(), |acc, b| acc.union(b));
        if union.atoms != parent.atoms {
            return Err(Error::InvalidPartition("blocks do not cover the parent set".into()));
        }
        Ok(Self { parent, blocks })
    }

    /// Coarsest partition: the parent as a single block.
    pub fn trivial(parent: BorelSet) -> Self {
        let blocks = if parent.is_empty() { vec![] } else { vec![parent.clone()] };
        Self { parent, blocks }
    }

    /// Finest partition: one block per atom.
    pub fn singletons(parent: BorelSet) -> Self {
        let blocks = parent
            .atoms
            .iter()
            .map(|&a| BorelSet {
                atoms: vec![a],
                contains_zero: a == 0.0,
            })
            .collect();
        Self { parent, blocks }
    }

    pub fn parent(&self) -> &BorelSet {
        &self.parent
    }

    pub fn blocks(&self) -> &[BorelSet] {
        &self.blocks
    }

    /// True when every block of `self` sits inside some block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.parent == coarser.parent
            && self
                .blocks
                .iter()
                .all(|b| coarser.blocks.iter().any(|c| b.is_subset(c)))
    }
}

/// Textual description of a Borel set, resolved against a decomposition.
///
/// Grammar: pieces joined by `|`, each piece either an interval such as
/// `[a,b]`, `(a,b)`, `[a,b)`, `(-inf,b]`, or a point list `{x,y,z}`, or a
/// single number.
#[derive(Debug, Clone, PartialEq)]
pub struct BorelSpec {
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq)]
enum Piece {
    Interval {
        lo: f64,
        hi: f64,
        lo_closed: bool,
        hi_closed: bool,
    },
    Points(Vec<f64>),
}

impl BorelSpec {
    /// The atoms of `d` that fall in this set. Point pieces match an atom
    /// within the decomposition's clustering threshold.
    pub fn resolve(&self, d: &SpectralDecomposition) -> BorelSet {
        let threshold = d.cluster_threshold();
        let selected = d.atoms().iter().map(|a| a.value).filter(|&v| {
            self.pieces.iter().any(|p| match p {
                Piece::Interval {
                    lo,
                    hi,
                    lo_closed,
                    hi_closed,
                } => {
                    let above = if *lo_closed { v >= *lo } else { v > *lo };
                    let below = if *hi_closed { v <= *hi } else { v < *hi };
                    above && below
                }
                Piece::Points(pts) => pts.iter().any(|&x| (x - v).abs() <= threshold),
            })
        });
        BorelSet::new(selected, d.tolerances())
    }
}

fn parse_number(s: &str, input: &str) -> Result<f64> {
    let t = s.trim();
    let v = match t {
        "inf" | "+inf" => f64::INFINITY,
        "-inf" => f64::NEG_INFINITY,
        _ => t.parse::<f64>().map_err(|e| Error::BorelSyntax {
            input: input.into(),
            reason: format!("{t:?}: {e}"),
        })?,
    };
    if v.is_nan() {
        return Err(Error::BorelSyntax {
            input: input.into(),
            reason: "NaN endpoint".into(),
        });
    }
    Ok(v)
}

impl FromStr for BorelSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let syntax = |reason: &str| Error::BorelSyntax {
            input: input.into(),
            reason: reason.into(),
        };
        let mut pieces = Vec::new();
        for raw in input.split('|') {
            let s = raw.trim();
            if s.is_empty() {
                return Err(syntax("empty piece"));
            }
            let first = s.chars().next().unwrap_or(' ');
            let last = s.chars().last().unwrap_or(' ');
            if first == '{' {
                if last != '}' {
                    return Err(syntax("unterminated point list"));
                }
                let inner = &s[1..s.len() - 1];
                let pts = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|x| parse_number(x, input))
                        .collect::<Result<Vec<_>>>()?
                };
                pieces.push(Piece::Points(pts));
            } else if first == '[' || first == '(' {
                if last != ']' && last != ')' {
                    return Err(syntax("unterminated interval"));
                }
                let inner = &s[1..s.len() - 1];
                let (lo, hi) = inner.split_once(',').ok_or_else(|| syntax("interval needs two endpoints"))?;
                let lo = parse_number(lo, input)?;
                let hi = parse_number(hi, input)?;
                if lo > hi {
                    return Err(syntax("lower endpoint exceeds upper endpoint"));
                }
                pieces.push(Piece::Interval {
                    lo,
                    hi,
                    lo_closed: first == '[',
                    hi_closed: last == ']',
                });
            } else {
                pieces.push(Piece::Points(vec![parse_number(s, input)?]));
            }
        }
        Ok(Self { pieces })
    }
}

impl fmt::Display for BorelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_snapped() {
        let s = BorelSet::of(&[3.0, 1e-14, -2.0, 3.0]);
        assert_eq!(s.atoms(), &[-2.0, 0.0, 3.0]);
        assert!(s.contains_zero());
        assert!(!s.without_zero().contains_zero());
        assert_eq!(s.without_zero().len(), 2);
    }

    #[test]
    fn partition_validation() {
        let parent = BorelSet::of(&[1.0, 2.0, 3.0]);
        let ok = Partition::new(parent.clone(), vec![BorelSet::of(&[1.0, 3.0]), BorelSet::of(&[2.0])]);
        assert!(ok.is_ok());
        let overlap = Partition::new(parent.clone(), vec![BorelSet::of(&[1.0, 2.0]), BorelSet::of(&[2.0, 3.0])]);
        assert!(matches!(overlap, Err(Error::InvalidPartition(_))));
        let short = Partition::new(parent.clone(), vec![BorelSet::of(&[1.0])]);
        assert!(short.is_err());
        let empty = Partition::new(parent, vec![BorelSet::of(&[1.0, 2.0, 3.0]), BorelSet::empty()]);
        assert!(empty.is_err());
    }

    #[test]
    fn refinement() {
        let parent = BorelSet::of(&[1.0, 2.0, 3.0]);
        let fine = Partition::singletons(parent.clone());
        let mid = Partition::new(parent.clone(), vec![BorelSet::of(&[1.0, 2.0]), BorelSet::of(&[3.0])]).unwrap();
        let coarse = Partition::trivial(parent);
        assert!(fine.refines(&mid));
        assert!(mid.refines(&coarse));
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&mid));
        assert!(mid.refines(&mid));
    }

    #[test]
    fn parse_specs() {
        assert!("[0,1]".parse::<BorelSpec>().is_ok());
        assert!("(0,1) | {2, 3.5} | -4".parse::<BorelSpec>().is_ok());
        assert!("(-inf,0)".parse::<BorelSpec>().is_ok());
        assert!("[1,0]".parse::<BorelSpec>().is_err());
        assert!("[0,1".parse::<BorelSpec>().is_err());
        assert!("{1,x}".parse::<BorelSpec>().is_err());
        assert!("".parse::<BorelSpec>().is_err());
    }
}
