//! Site-index partitions shared by every model.

use crate::error::{Error, Result};

/// Disjoint site sets `A`, `B` and the measured set `M`.
///
/// Optional subregions `A0 ⊆ A`, `B0 ⊆ B` are used by the partially traced
/// mutual information; the traced set is `(A∖A0) ∪ (B∖B0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionSpec {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub m: Vec<usize>,
    pub a0: Option<Vec<usize>>,
    pub b0: Option<Vec<usize>>,
}

impl RegionSpec {
    /// Builds a region spec, sorting each set and checking that the three
    /// sets are pairwise disjoint and cover `0..num_sites` exactly.
    pub fn partition(num_sites: usize, a: Vec<usize>, b: Vec<usize>, m: Vec<usize>) -> Result<Self> {
        let spec = RegionSpec { a: sorted(a), b: sorted(b), m: sorted(m), a0: None, b0: None };
        spec.validate(num_sites)?;
        Ok(spec)
    }

    /// Builds `A`, `B` and takes `M` as everything else.
    pub fn complement_measured(num_sites: usize, a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        let mut owner = vec![0u8; num_sites];
        for &s in a.iter().chain(&b) {
            if s >= num_sites {
                return Err(Error::InvalidRegion(format!("site {s} outside 0..{num_sites}")));
            }
            owner[s] += 1;
        }
        let m = (0..num_sites).filter(|&s| owner[s] == 0).collect();
        Self::partition(num_sites, a, b, m)
    }

    pub fn with_subregions(mut self, a0: Vec<usize>, b0: Vec<usize>) -> Result<Self> {
        let a0 = sorted(a0);
        let b0 = sorted(b0);
        if a0.is_empty() || b0.is_empty() {
            return Err(Error::InvalidRegion("subregions A0 and B0 must be nonempty".into()));
        }
        if !a0.iter().all(|s| self.a.binary_search(s).is_ok()) {
            return Err(Error::InvalidRegion("A0 is not a subset of A".into()));
        }
        if !b0.iter().all(|s| self.b.binary_search(s).is_ok()) {
            return Err(Error::InvalidRegion("B0 is not a subset of B".into()));
        }
        self.a0 = Some(a0);
        self.b0 = Some(b0);
        Ok(self)
    }

    pub fn num_sites(&self) -> usize {
        self.a.len() + self.b.len() + self.m.len()
    }

    /// `A ∪ B`, sorted.
    pub fn unmeasured(&self) -> Vec<usize> {
        sorted(self.a.iter().chain(&self.b).copied().collect())
    }

    /// Sites traced out by the partially traced mutual information.
    pub fn traced(&self) -> Vec<usize> {
        let (Some(a0), Some(b0)) = (&self.a0, &self.b0) else {
            return Vec::new();
        };
        self.a
            .iter()
            .filter(|s| a0.binary_search(s).is_err())
            .chain(self.b.iter().filter(|s| b0.binary_search(s).is_err()))
            .copied()
            .collect()
    }

    pub fn validate(&self, num_sites: usize) -> Result<()> {
        let mut owner = vec![0u8; num_sites];
        for &s in self.a.iter().chain(&self.b).chain(&self.m) {
            if s >= num_sites {
                return Err(Error::InvalidRegion(format!("site {s} outside 0..{num_sites}")));
            }
            owner[s] += 1;
            if owner[s] > 1 {
                return Err(Error::InvalidRegion(format!("site {s} appears in more than one region")));
            }
        }
        if let Some(s) = owner.iter().position(|&c| c == 0) {
            return Err(Error::InvalidRegion(format!("site {s} is not assigned to A, B or M")));
        }
        Ok(())
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_fills_m() {
        let r = RegionSpec::complement_measured(8, vec![0, 1], vec![4, 5]).unwrap();
        assert_eq!(r.m, vec![2, 3, 6, 7]);
    }

    #[test]
    fn overlap_rejected() {
        assert!(RegionSpec::partition(4, vec![0, 1], vec![1], vec![2, 3]).is_err());
        assert!(RegionSpec::partition(4, vec![0], vec![1], vec![2]).is_err());
    }

    #[test]
    fn traced_set() {
        let r = RegionSpec::complement_measured(10, vec![0, 1, 2], vec![6, 7])
            .unwrap()
            .with_subregions(vec![2], vec![6])
            .unwrap();
        assert_eq!(r.traced(), vec![0, 1, 7]);
        assert!(r.clone().with_subregions(vec![3], vec![6]).is_err());
    }
}
