//! Random-singlet states from strong-disorder RG, and their measurement
//! combinatorics under Z-basis and nearest-neighbour Bell measurements.

use crate::error::{Error, Result};
use crate::region::RegionSpec;
use rand::Rng;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::LN_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// A matching of sites into singlets. Sites without a partner (measured-out
/// sites after rewiring) carry `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingletConfig {
    partner: Vec<Option<usize>>,
}

impl SingletConfig {
    /// Perfect matching on `0..l` from a list of pairs.
    pub fn new(l: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let cfg = Self::partial(l, pairs)?;
        if cfg.partner.iter().any(Option::is_none) {
            return Err(Error::InvalidParameter("pairs do not cover every site".into()));
        }
        Ok(cfg)
    }

    /// Matching of a subset of `0..l`.
    pub fn partial(l: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut partner = vec![None; l];
        for &(i, j) in pairs {
            if i >= l || j >= l || i == j || partner[i].is_some() || partner[j].is_some() {
                return Err(Error::InvalidParameter(format!("pair ({i}, {j}) is not a valid singlet")));
            }
            partner[i] = Some(j);
            partner[j] = Some(i);
        }
        Ok(SingletConfig { partner })
    }

    pub fn num_sites(&self) -> usize {
        self.partner.len()
    }

    pub fn partner(&self, site: usize) -> Option<usize> {
        self.partner[site]
    }

    /// Pairs `(i, j)` with `i < j`, ordered by `i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner.iter().enumerate().filter_map(|(i, p)| p.filter(|&j| j > i).map(|j| (i, j))).collect()
    }

    /// Number of singlets with one end in `a` and the other in `b`.
    pub fn count_between(&self, a: &[usize], b: &[usize]) -> usize {
        let mut in_b = vec![false; self.num_sites()];
        for &s in b {
            in_b[s] = true;
        }
        a.iter().filter(|&&s| self.partner[s].is_some_and(|p| in_b[p])).count()
    }

    /// Distances of all singlets, measured around the ring for `Periodic`.
    pub fn pair_distances(&self, boundary: Boundary) -> Vec<usize> {
        let l = self.num_sites();
        self.pairs()
            .into_iter()
            .map(|(i, j)| match boundary {
                Boundary::Open => j - i,
                Boundary::Periodic => (j - i).min(l - (j - i)),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Bond {
    coupling: f64,
    left: usize,
    version: u32,
}

impl Eq for Bond {}

impl Ord for Bond {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coupling.total_cmp(&other.coupling).then_with(|| other.left.cmp(&self.left))
    }
}

impl PartialOrd for Bond {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Strong-disorder RG on explicit couplings: `couplings[i]` joins sites `i`
/// and `i + 1` (and, for a ring, the last joins `l − 1` to `0`).
///
/// The strongest bond `(i, j)` forms a singlet and its neighbours `k`, `m`
/// are joined by `J_ki J_jm / (2 J_ij)`.
pub fn sdrg_decimate(couplings: &[f64], boundary: Boundary) -> Result<SingletConfig> {
    let l = match boundary {
        Boundary::Open => couplings.len() + 1,
        Boundary::Periodic => couplings.len(),
    };
    if l % 2 != 0 || l < 2 {
        return Err(Error::InvalidParameter(format!("singlet chain needs an even number of sites, got {l}")));
    }
    if couplings.iter().any(|&j| !(j > 0.0)) {
        return Err(Error::InvalidParameter("couplings must be positive".into()));
    }
    let ring = boundary == Boundary::Periodic;
    let mut next: Vec<Option<usize>> = (0..l).map(|i| if i + 1 < l { Some(i + 1) } else if ring { Some(0) } else { None }).collect();
    let mut prev: Vec<Option<usize>> = (0..l).map(|i| if i > 0 { Some(i - 1) } else if ring { Some(l - 1) } else { None }).collect();
    // bond[i] couples i to next[i]
    let mut bond: Vec<Option<f64>> = (0..l).map(|i| couplings.get(i).copied()).collect();
    let mut version = vec![0u32; l];
    let mut heap: BinaryHeap<Bond> =
        bond.iter().enumerate().filter_map(|(i, b)| b.map(|c| Bond { coupling: c, left: i, version: 0 })).collect();
    let mut active = vec![true; l];
    let mut remaining = l;
    let mut pairs = Vec::with_capacity(l / 2);

    while remaining > 0 {
        let Some(top) = heap.pop() else { break };
        let i = top.left;
        if !active[i] || version[i] != top.version || bond[i].is_none() {
            continue;
        }
        let j = next[i].expect("bond without right neighbour");
        let jm = bond[i].unwrap();
        pairs.push((i.min(j), i.max(j)));
        active[i] = false;
        active[j] = false;
        remaining -= 2;
        version[i] += 1;
        version[j] += 1;
        if remaining == 0 {
            break;
        }
        let k = prev[i].filter(|&k| k != j);
        let m = next[j].filter(|&m| m != i);
        match (k, m) {
            (Some(k), Some(m)) => {
                let merged = bond[k].unwrap() * bond[j].unwrap() / (2.0 * jm);
                next[k] = Some(m);
                prev[m] = Some(k);
                bond[k] = Some(merged);
                version[k] += 1;
                heap.push(Bond { coupling: merged, left: k, version: version[k] });
            }
            (Some(k), None) => {
                next[k] = None;
                bond[k] = None;
                version[k] += 1;
            }
            (None, Some(m)) => prev[m] = None,
            (None, None) => {}
        }
        bond[i] = None;
        bond[j] = None;
    }
    if remaining != 0 {
        // an open chain always pairs up; a ring reaching here had isolated sites
        return Err(Error::InvalidParameter("decimation left unpaired sites".into()));
    }
    SingletConfig::new(l, &pairs)
}

/// Random-singlet configuration with i.i.d. couplings uniform on `(0, 1]`.
pub fn sdrg_sample<R: Rng + ?Sized>(l: usize, boundary: Boundary, rng: &mut R) -> Result<SingletConfig> {
    let nb = match boundary {
        Boundary::Open => l.saturating_sub(1),
        Boundary::Periodic => l,
    };
    let couplings: Vec<f64> = (0..nb).map(|_| 1.0 - rng.gen::<f64>()).collect();
    sdrg_decimate(&couplings, boundary)
}

/// Bell measurements on disjoint nearest-neighbour pairs covering `M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellPairing {
    pub pairs: Vec<(usize, usize)>,
}

impl BellPairing {
    /// Pairs the sorted sites of `m` left to right; every pair must be
    /// adjacent on the chain (or across the ring seam for `ring = Some(l)`).
    pub fn leftmost_first(m: &[usize], ring: Option<usize>) -> Result<Self> {
        let mut sites = m.to_vec();
        sites.sort_unstable();
        if sites.len() % 2 != 0 {
            return Err(Error::InvalidRegion(format!("Bell pairing needs an even measured region, got {}", sites.len())));
        }
        // on a ring, start after a gap so runs wrapping through 0 stay whole
        if let Some(l) = ring {
            if let Some(start) = (0..sites.len()).find(|&k| {
                let prev = sites[(k + sites.len() - 1) % sites.len()];
                (prev + 1) % l != sites[k]
            }) {
                sites.rotate_left(start);
            }
        }
        let adjacent = |a: usize, b: usize| match ring {
            Some(l) => (a + 1) % l == b,
            None => a + 1 == b,
        };
        let mut pairs = Vec::with_capacity(sites.len() / 2);
        for w in sites.chunks(2) {
            if !adjacent(w[0], w[1]) {
                return Err(Error::InvalidRegion(format!("sites {} and {} are not neighbours", w[0], w[1])));
            }
            pairs.push((w[0], w[1]));
        }
        Ok(BellPairing { pairs })
    }
}

/// Teleportation combinatorics: every Bell pair `(i, j)` fuses the singlets
/// through `i` and `j`. Returns the matching left on the unmeasured sites;
/// loops closing inside `M` are dropped.
pub fn bell_rewire(config: &SingletConfig, pairing: &BellPairing) -> Result<SingletConfig> {
    let l = config.num_sites();
    let mut mate = vec![None; l];
    for &(i, j) in &pairing.pairs {
        if i >= l || j >= l || i == j || mate[i].is_some() || mate[j].is_some() {
            return Err(Error::InvalidRegion(format!("Bell pair ({i}, {j}) overlaps or leaves the chain")));
        }
        mate[i] = Some(j);
        mate[j] = Some(i);
    }
    let mut out = Vec::new();
    for u in 0..l {
        if mate[u].is_some() {
            continue;
        }
        let Some(mut v) = config.partner(u) else {
            return Err(Error::InvalidParameter(format!("site {u} has no singlet partner")));
        };
        while let Some(w) = mate[v] {
            v = config.partner(w).ok_or_else(|| Error::InvalidParameter(format!("site {w} has no singlet partner")))?;
        }
        if u < v {
            out.push((u, v));
        }
    }
    SingletConfig::partial(l, &out)
}

/// Z-basis measurement of `M`: singlets touching `M` collapse, those between
/// `A` and `B` survive. Returns `(MIE, MII)`.
pub fn mie_mii_zbasis(config: &SingletConfig, regions: &RegionSpec) -> Result<(f64, f64)> {
    regions.validate(config.num_sites())?;
    let n_ab = config.count_between(&regions.a, &regions.b);
    Ok((n_ab as f64 * LN_2, 0.0))
}

/// Bell measurement of `M` in the given pairing. Returns `(MIE, MII)` with
/// `MII = 2 MIE − I_pre`, `I_pre = 2 n_AB ln 2`.
pub fn mie_mii_bell(config: &SingletConfig, regions: &RegionSpec, pairing: &BellPairing) -> Result<(f64, f64)> {
    regions.validate(config.num_sites())?;
    let mut covered: Vec<usize> = pairing.pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    covered.sort_unstable();
    if covered != regions.m {
        return Err(Error::InvalidRegion("Bell pairing must cover exactly the measured region".into()));
    }
    let pre = config.count_between(&regions.a, &regions.b);
    let post = bell_rewire(config, pairing)?.count_between(&regions.a, &regions.b);
    let mie = post as f64 * LN_2;
    Ok((mie, 2.0 * mie - 2.0 * pre as f64 * LN_2))
}

/// Ring regions `A = [0, len)` and `B = [len + r, 2 len + r)` with `M` the
/// rest, and the leftmost-first Bell pairing of `M`.
pub fn ring_intervals(l: usize, len: usize, r: usize) -> Result<(RegionSpec, BellPairing)> {
    if 2 * len + r > l {
        return Err(Error::InvalidRegion(format!("intervals of {len} at distance {r} do not fit in {l} sites")));
    }
    let regions = RegionSpec::complement_measured(l, (0..len).collect(), (len + r..2 * len + r).collect())?;
    let pairing = BellPairing::leftmost_first(&regions.m, Some(l))?;
    Ok((regions, pairing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{mie_mii_exact, Frame, ProductBasis, StateVector};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_sites() {
        let c = sdrg_decimate(&[0.5], Boundary::Open).unwrap();
        assert_eq!(c.pairs(), vec![(0, 1)]);
    }

    #[test]
    fn strongest_bond_first() {
        let c = sdrg_decimate(&[0.1, 0.9, 0.1], Boundary::Open).unwrap();
        assert_eq!(c.pairs(), vec![(0, 3), (1, 2)]);
    }

    #[test]
    fn ma_dasgupta_coupling_used() {
        // pairing (1,2) leaves J_03 = 0.6*0.5/1.8 = 1/6 < J_34 = 0.2, so (3,4)
        // goes next and (0,5) closes with J = (1/6)(0.15)/0.4
        let c = sdrg_decimate(&[0.6, 0.9, 0.5, 0.2, 0.15], Boundary::Open).unwrap();
        assert_eq!(c.pairs(), vec![(0, 5), (1, 2), (3, 4)]);
    }

    #[test]
    fn ring_samples_are_perfect_matchings() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for l in [2, 4, 6, 10, 64] {
            for b in [Boundary::Open, Boundary::Periodic] {
                let c = sdrg_sample(l, b, &mut rng).unwrap();
                assert_eq!(c.pairs().len(), l / 2);
                assert!(c.pair_distances(b).iter().all(|d| d % 2 == 1));
            }
        }
        assert!(sdrg_sample(5, Boundary::Open, &mut rng).is_err());
    }

    #[test]
    fn rewire_examples() {
        let c = SingletConfig::new(4, &[(0, 1), (2, 3)]).unwrap();
        let out = bell_rewire(&c, &BellPairing { pairs: vec![(1, 2)] }).unwrap();
        assert_eq!(out.pairs(), vec![(0, 3)]);
        let out = bell_rewire(&c, &BellPairing { pairs: vec![(0, 1)] }).unwrap();
        assert_eq!(out.pairs(), vec![(2, 3)]);
        let c = SingletConfig::new(6, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        let out = bell_rewire(&c, &BellPairing { pairs: vec![(1, 2), (3, 4)] }).unwrap();
        assert_eq!(out.pairs(), vec![(0, 5)]);
    }

    #[test]
    fn zbasis_counts_spanning_singlets() {
        let c = SingletConfig::new(4, &[(0, 3), (1, 2)]).unwrap();
        let r = RegionSpec::partition(4, vec![0], vec![3], vec![1, 2]).unwrap();
        assert_eq!(mie_mii_zbasis(&c, &r).unwrap(), (LN_2, 0.0));
        let c = SingletConfig::new(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(mie_mii_zbasis(&c, &r).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn single_site_bell_always_ln2() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let c = sdrg_sample(32, Boundary::Periodic, &mut rng).unwrap();
            let r = rng.gen_range(0..15) * 2;
            let (regions, pairing) = ring_intervals(32, 1, r).unwrap();
            let (mie, _) = mie_mii_bell(&c, &regions, &pairing).unwrap();
            assert_eq!(mie, LN_2);
        }
    }

    #[test]
    fn leftmost_pairing_on_ring() {
        let p = BellPairing::leftmost_first(&[0, 1, 6, 7, 3, 4], Some(8)).unwrap();
        assert_eq!(p.pairs, vec![(3, 4), (6, 7), (0, 1)]);
        let p = BellPairing::leftmost_first(&[0, 5, 6, 7], Some(8)).unwrap();
        assert_eq!(p.pairs, vec![(5, 6), (7, 0)]);
        assert!(BellPairing::leftmost_first(&[0, 2], None).is_err());
        assert!(BellPairing::leftmost_first(&[0, 1, 2], None).is_err());
    }

    fn singlet_product(c: &SingletConfig) -> StateVector {
        let l = c.num_sites();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let amps = (0..1usize << l)
            .map(|n| {
                let bit = |q: usize| (n >> (l - 1 - q)) & 1;
                c.pairs().iter().fold(Complex64::new(1.0, 0.0), |acc, &(i, j)| {
                    acc * match (bit(i), bit(j)) {
                        (0, 1) => r,
                        (1, 0) => -r,
                        _ => 0.0,
                    }
                })
            })
            .collect();
        StateVector::qubits(amps).unwrap()
    }

    #[test]
    fn combinatorics_match_dense_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..12 {
            let l = [8, 10, 12][trial % 3];
            let c = sdrg_sample(l, Boundary::Periodic, &mut rng).unwrap();
            let len = 1 + trial % 2;
            let r = 2 * (trial % 3);
            let Ok((regions, pairing)) = ring_intervals(l, len, r) else { continue };
            let psi = singlet_product(&c);

            let frames = pairing.pairs.iter().map(|&(i, j)| Frame::bell(i, j)).collect();
            let basis = ProductBasis::new(frames).unwrap();
            let exact = mie_mii_exact(&psi, &regions, &basis).unwrap();
            let (mie, mii) = mie_mii_bell(&c, &regions, &pairing).unwrap();
            assert!((exact.mie - mie).abs() < 1e-9, "trial {trial}: {} vs {mie}", exact.mie);
            assert!((exact.mii - mii).abs() < 1e-9);

            let z = ProductBasis::z(&regions.m, 2);
            let exact = mie_mii_exact(&psi, &regions, &z).unwrap();
            let (mie, mii) = mie_mii_zbasis(&c, &regions).unwrap();
            assert!((exact.mie - mie).abs() < 1e-9);
            assert!((exact.mii - mii).abs() < 1e-9);
            assert!((exact.pre_mutual_info - 2.0 * mie).abs() < 1e-9);
        }
    }
}
