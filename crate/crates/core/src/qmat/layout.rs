use serde::{Deserialize, Serialize};

use crate::error::{layout_err, Result};

/// One labeled tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

impl Factor {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
        }
    }
}

/// Which side of the bipartite cut a factor belongs to.
///
/// Labels beginning with `A` belong to Alice and labels beginning with `B` to
/// Bob (`A1`, `A2`, `A'`, `B1`, ...). Any other label has no party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn of_label(label: &str) -> Option<Party> {
        match label.chars().next() {
            Some('A') => Some(Party::Alice),
            Some('B') => Some(Party::Bob),
            _ => None,
        }
    }
}

/// Ordered list of labeled factors. The first factor is the most significant
/// digit of a row-major basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorLayout {
    factors: Vec<Factor>,
}

impl TensorLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(layout_err(format!("factor {:?} has dimension 0", f.label)));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(layout_err(format!("duplicate label {:?}", f.label)));
            }
        }
        if factors.is_empty() {
            return Err(layout_err("layout needs at least one factor"));
        }
        Ok(Self { factors })
    }

    pub fn from_pairs(pairs: &[(&str, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(l, d)| Factor::new(l, d)).collect())
    }

    /// Single factor layout.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::from_pairs(&[(label, dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.position(label).map(|i| self.factors[i].dim)
    }

    /// Row-major strides of each factor.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].dim;
        }
        strides
    }

    pub fn concat(&self, other: &TensorLayout) -> Result<Self> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::new(factors)
    }

    /// Boolean mask of the factors named in `labels`; every label must exist.
    pub fn mask(&self, labels: &[&str]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.factors.len()];
        for l in labels {
            let i = self
                .position(l)
                .ok_or_else(|| layout_err(format!("unknown label {l:?}")))?;
            mask[i] = true;
        }
        Ok(mask)
    }

    /// Layout restricted to factors where `keep` is true.
    pub(crate) fn restrict(&self, keep: &[bool]) -> Result<Self> {
        Self::new(
            self.factors
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(f, _)| f.clone())
                .collect(),
        )
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let i = self
            .position(from)
            .ok_or_else(|| layout_err(format!("unknown label {from:?}")))?;
        let mut factors = self.factors.clone();
        factors[i].label = to.to_string();
        Self::new(factors)
    }

    pub fn party_labels(&self, party: Party) -> Vec<&str> {
        self.factors
            .iter()
            .filter(|f| Party::of_label(&f.label) == Some(party))
            .map(|f| f.label.as_str())
            .collect()
    }

    /// Checks every factor has a party and returns (Alice labels, Bob labels).
    pub fn bipartition(&self) -> Result<(Vec<&str>, Vec<&str>)> {
        if let Some(f) = self.factors.iter().find(|f| Party::of_label(&f.label).is_none()) {
            return Err(layout_err(format!(
                "label {:?} belongs to neither party (expected an A or B prefix)",
                f.label
            )));
        }
        let alice = self.party_labels(Party::Alice);
        let bob = self.party_labels(Party::Bob);
        if alice.is_empty() || bob.is_empty() {
            return Err(layout_err("bipartite layout needs factors on both sides"));
        }
        Ok((alice, bob))
    }

    /// Alice's factors first then Bob's, each in their existing order.
    pub fn canonical_order(&self) -> Result<Vec<&str>> {
        let (mut alice, bob) = self.bipartition()?;
        alice.extend(bob);
        Ok(alice)
    }

    /// Offsets of every basis index of the selected factors (row-major among
    /// them) into the full index space.
    pub(crate) fn offsets(&self, selected: &[bool]) -> Vec<usize> {
        let strides = self.strides();
        let mut offsets = vec![0usize];
        for (i, f) in self.factors.iter().enumerate() {
            if !selected[i] {
                continue;
            }
            let mut next = Vec::with_capacity(offsets.len() * f.dim);
            for &o in &offsets {
                for d in 0..f.dim {
                    next.push(o + d * strides[i]);
                }
            }
            offsets = next;
        }
        offsets
    }
}
