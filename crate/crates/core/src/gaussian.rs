//! Slater-determinant states stored as correlation matrices `C_ij = ⟨c†_i c_j⟩`,
//! with projective occupation measurements and correlation-matrix entropies.

use crate::error::{Error, Result};
use crate::linalg::{fermionic_entropy, hermitian_deviation, hermitian_eigenvalues, submatrix, CMatrix, ZERO};
use crate::region::RegionSpec;
use num_complex::Complex64;
use rand::Rng;

/// Below this occupation (or above one minus it) the improbable branch is
/// never taken.
pub const OCCUPATION_GUARD: f64 = 1e-12;
const FORCED_MIN_PROB: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    corr: CMatrix,
}

/// Sites measured along one trajectory, their outcomes and the accumulated
/// log Born probability.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub sites: Vec<usize>,
    pub outcomes: Vec<u8>,
    pub log_prob: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub value: u8,
    pub probability: f64,
}

impl GaussianState {
    /// Wraps a correlation matrix after checking it is square and Hermitian
    /// to `1e-10`.
    pub fn new(corr: CMatrix) -> Result<Self> {
        if corr.nrows() != corr.ncols() {
            return Err(Error::InvalidParameter("correlation matrix must be square".into()));
        }
        let dev = hermitian_deviation(&corr);
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        let mut s = GaussianState { corr };
        s.hermitize();
        Ok(s)
    }

    /// Occupation-number product state.
    pub fn product(occupations: &[u8]) -> Self {
        let n = occupations.len();
        let corr = CMatrix::from_fn(n, n, |i, j| {
            if i == j && occupations[i] == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        });
        GaussianState { corr }
    }

    /// State filling the orthonormal orbitals in the columns of `phi`:
    /// `C_ij = Σ_k conj(φ_ik) φ_jk`.
    pub fn from_orbitals(phi: &CMatrix) -> Self {
        let corr = phi.conjugate() * phi.transpose();
        let mut s = GaussianState { corr };
        s.hermitize();
        s
    }

    pub fn num_modes(&self) -> usize {
        self.corr.nrows()
    }

    pub fn corr(&self) -> &CMatrix {
        &self.corr
    }

    pub fn particle_number(&self) -> f64 {
        self.corr.trace().re
    }

    /// `max |C² − C|`, zero for a pure Slater state.
    pub fn projector_deviation(&self) -> f64 {
        (&self.corr * &self.corr - &self.corr).camax()
    }

    fn hermitize(&mut self) {
        let n = self.num_modes();
        for j in 0..n {
            self.corr[(j, j)].im = 0.0;
            for i in 0..j {
                let v = 0.5 * (self.corr[(i, j)] + self.corr[(j, i)].conj());
                self.corr[(i, j)] = v;
                self.corr[(j, i)] = v.conj();
            }
        }
    }

    /// Projectively measures the occupation of mode `site`.
    ///
    /// Outcome 1 is drawn when `u < C_aa` unless `forced` is given.
    pub fn measure_orbital(&mut self, site: usize, forced: Option<u8>, u: f64) -> Result<Outcome> {
        let n = self.num_modes();
        if site >= n {
            return Err(Error::InvalidRegion(format!("mode {site} outside 0..{n}")));
        }
        let p1 = self.corr[(site, site)].re.clamp(0.0, 1.0);
        let value = match forced {
            Some(v) if v > 1 => return Err(Error::InvalidParameter(format!("occupation outcome {v}"))),
            Some(v) => {
                let p = if v == 1 { p1 } else { 1.0 - p1 };
                if p <= FORCED_MIN_PROB {
                    return Err(Error::ZeroProbability { outcome: v as usize, probability: p });
                }
                v
            }
            None if p1 < OCCUPATION_GUARD => 0,
            None if p1 > 1.0 - OCCUPATION_GUARD => 1,
            None => u8::from(u < p1),
        };
        let probability = if value == 1 { p1 } else { 1.0 - p1 };
        let col: Vec<Complex64> = (0..n).map(|i| self.corr[(i, site)]).collect();
        // outcome 1: C - C_ia C_aj / C_aa ; outcome 0: C + C_ia C_aj / (1 - C_aa)
        let scale = if value == 1 { -1.0 / p1 } else { 1.0 / (1.0 - p1) };
        if probability > 0.0 {
            for j in 0..n {
                if j == site {
                    continue;
                }
                let caj = col[j].conj() * scale;
                for i in 0..n {
                    if i != site {
                        self.corr[(i, j)] += col[i] * caj;
                    }
                }
            }
        }
        for i in 0..n {
            self.corr[(i, site)] = ZERO;
            self.corr[(site, i)] = ZERO;
        }
        self.corr[(site, site)] = Complex64::new(value as f64, 0.0);
        self.hermitize();
        Ok(Outcome { value, probability })
    }

    /// Measures `sites` in ascending order, drawing one uniform number per
    /// site from `rng`.
    pub fn measure_region<R: Rng + ?Sized>(&mut self, sites: &[usize], rng: &mut R) -> Result<TrajectoryRecord> {
        let mut order = sites.to_vec();
        order.sort_unstable();
        if order.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRegion("duplicate site in measured region".into()));
        }
        let mut rec = TrajectoryRecord { sites: order.clone(), outcomes: Vec::with_capacity(order.len()), log_prob: 0.0 };
        for &s in &order {
            let u: f64 = rng.gen();
            let o = self.measure_orbital(s, None, u)?;
            rec.outcomes.push(o.value);
            rec.log_prob += o.probability.ln();
        }
        Ok(rec)
    }

    /// Entanglement entropy of `region` in nats.
    pub fn entropy(&self, region: &[usize]) -> f64 {
        fermionic_entropy(&hermitian_eigenvalues(&submatrix(&self.corr, region)))
    }

    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        if a.iter().any(|s| b.contains(s)) {
            return Err(Error::InvalidRegion("A and B overlap".into()));
        }
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        Ok(self.entropy(a) + self.entropy(b) - self.entropy(&ab))
    }
}

/// Correlation matrix of the unmeasured modes after one trajectory, with rows
/// ordered as `A` then `B` (each ascending).
#[derive(Clone, Debug)]
pub struct PostMeasurement {
    pub corr: CMatrix,
    pub na: usize,
    pub record: TrajectoryRecord,
}

impl PostMeasurement {
    pub fn entropy_a(&self) -> f64 {
        self.entropy_of(&(0..self.na).collect::<Vec<_>>())
    }

    pub fn entropy_b(&self) -> f64 {
        self.entropy_of(&(self.na..self.corr.nrows()).collect::<Vec<_>>())
    }

    pub fn entropy_ab(&self) -> f64 {
        self.entropy_of(&(0..self.corr.nrows()).collect::<Vec<_>>())
    }

    /// Entropy of a set of local indices into the `A ∪ B` block.
    pub fn entropy_of(&self, local: &[usize]) -> f64 {
        fermionic_entropy(&hermitian_eigenvalues(&submatrix(&self.corr, local)))
    }
}

/// Trajectory sampler that reorders modes as `M, A, B` once and then
/// measures `M` sequentially, updating only the unmeasured trailing block.
///
/// Draw-for-draw this follows [`GaussianState::measure_region`] on `M`.
#[derive(Clone, Debug)]
pub struct TrajectorySampler {
    corr: CMatrix,
    m: Vec<usize>,
    na: usize,
}

impl TrajectorySampler {
    pub fn new(state: &GaussianState, regions: &RegionSpec) -> Result<Self> {
        regions.validate(state.num_modes())?;
        let order: Vec<usize> = regions.m.iter().chain(&regions.a).chain(&regions.b).copied().collect();
        Ok(TrajectorySampler { corr: submatrix(&state.corr, &order), m: regions.m.clone(), na: regions.a.len() })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PostMeasurement {
        let n = self.corr.nrows();
        let nm = self.m.len();
        let mut c = self.corr.clone();
        let mut rec = TrajectoryRecord { sites: self.m.clone(), outcomes: Vec::with_capacity(nm), log_prob: 0.0 };
        // only the lower triangle of the trailing block is kept up to date
        for k in 0..nm {
            let p1 = c[(k, k)].re.clamp(0.0, 1.0);
            let u: f64 = rng.gen();
            let value = if p1 < OCCUPATION_GUARD {
                0
            } else if p1 > 1.0 - OCCUPATION_GUARD {
                1
            } else {
                u8::from(u < p1)
            };
            let probability = if value == 1 { p1 } else { 1.0 - p1 };
            rec.outcomes.push(value);
            rec.log_prob += probability.ln();
            let rest = n - k - 1;
            if rest == 0 || probability <= OCCUPATION_GUARD {
                continue;
            }
            let alpha = if value == 1 { -1.0 / p1 } else { 1.0 / (1.0 - p1) };
            let v = c.view((k + 1, k), (rest, 1)).column(0).into_owned();
            c.view_mut((k + 1, k + 1), (rest, rest)).hegerc(Complex64::new(alpha, 0.0), &v, &v, Complex64::new(1.0, 0.0));
        }
        let nab = n - nm;
        let corr = CMatrix::from_fn(nab, nab, |i, j| {
            let (gi, gj) = (nm + i, nm + j);
            if i >= j {
                c[(gi, gj)]
            } else {
                c[(gj, gi)].conj()
            }
        });
        let mut corr = corr;
        for i in 0..nab {
            corr[(i, i)].im = 0.0;
        }
        PostMeasurement { corr, na: self.na, record: rec }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{fock, outcome_ensemble, ProductBasis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn bonding() -> GaussianState {
        GaussianState::new(CMatrix::from_element(2, 2, c(0.5))).unwrap()
    }

    /// Generic Slater state: `particles` orthonormal orbitals from a QR of a
    /// fixed complex matrix.
    fn generic(modes: usize, particles: usize, salt: f64) -> CMatrix {
        let raw = CMatrix::from_fn(modes, modes, |i, j| {
            let t = salt + (i * modes + j) as f64;
            Complex64::new((1.3 * t).sin(), (0.7 * t * t).cos())
        });
        raw.qr().q().columns(0, particles).into_owned()
    }

    #[test]
    fn occupied_eigenmode_is_deterministic() {
        let mut s = GaussianState::product(&[1, 0]);
        let before = s.clone();
        let o = s.measure_orbital(0, None, 0.999).unwrap();
        assert_eq!(o.value, 1);
        assert_eq!(o.probability, 1.0);
        assert_eq!(s, before);
    }

    #[test]
    fn bonding_pair_updates() {
        let mut s = bonding();
        let o = s.measure_orbital(0, Some(1), 0.0).unwrap();
        assert!((o.probability - 0.5).abs() < 1e-15);
        assert!((s.corr() - CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(vec![c(1.0), c(0.0)]))).norm() < 1e-14);

        let mut s = bonding();
        let o = s.measure_orbital(0, Some(0), 0.0).unwrap();
        assert!((o.probability - 0.5).abs() < 1e-15);
        assert!((s.corr() - CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(vec![c(0.0), c(1.0)]))).norm() < 1e-14);
    }

    #[test]
    fn forced_zero_probability_rejected() {
        let mut s = GaussianState::product(&[1, 0]);
        assert!(matches!(s.measure_orbital(1, Some(1), 0.0), Err(Error::ZeroProbability { .. })));
    }

    #[test]
    fn product_region_deterministic() {
        let mut s = GaussianState::product(&[1, 0, 1, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rec = s.measure_region(&[3, 1, 0, 2], &mut rng).unwrap();
        assert_eq!(rec.sites, vec![0, 1, 2, 3]);
        assert_eq!(rec.outcomes, vec![1, 0, 1, 0]);
        assert_eq!(rec.log_prob, 0.0);
    }

    #[test]
    fn duplicate_sites_rejected() {
        let mut s = bonding();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(s.measure_region(&[0, 0], &mut rng).is_err());
    }

    #[test]
    fn bonding_pair_anticorrelated() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ones_first = 0;
        for _ in 0..2000 {
            let mut s = bonding();
            let rec = s.measure_region(&[0, 1], &mut rng).unwrap();
            assert_eq!(rec.outcomes[0] + rec.outcomes[1], 1);
            assert!((rec.log_prob - 0.5f64.ln()).abs() < 1e-12);
            ones_first += rec.outcomes[0] as usize;
        }
        assert!((ones_first as f64 / 2000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn updates_preserve_invariants() {
        let mut s = GaussianState::from_orbitals(&generic(8, 4, 0.3));
        let n0 = s.particle_number();
        assert!((n0 - 4.0).abs() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for site in [5, 0, 3, 7, 1] {
            let o = s.measure_orbital(site, None, rng.gen()).unwrap();
            assert!(s.projector_deviation() < 1e-7);
            assert!(hermitian_deviation(s.corr()) < 1e-10);
            for i in 0..8 {
                let expect = if i == site { c(o.value as f64) } else { ZERO };
                assert_eq!(s.corr()[(i, site)], expect);
                assert_eq!(s.corr()[(site, i)], expect.conj());
            }
        }
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(GaussianState::product(&[1, 0, 1]).entropy(&[0, 1]), 0.0);
        let s = bonding();
        assert!((s.entropy(&[0]) - 2f64.ln()).abs() < 1e-14);
        assert!((s.mutual_information(&[0], &[1]).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!(s.mutual_information(&[0], &[0]).is_err());
        assert!(GaussianState::product(&[1, 0]).mutual_information(&[0], &[1]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn entropy_matches_dense_slater() {
        let phi = generic(7, 3, 1.1);
        let g = GaussianState::from_orbitals(&phi);
        let dense = fock::slater_state(&phi, &(0..7).collect::<Vec<_>>()).unwrap();
        assert!((fock::correlation_matrix(&dense) - g.corr()).norm() < 1e-10);
        // prefixes and suffixes carry no Jordan-Wigner string across the cut
        for k in 1..7 {
            let prefix: Vec<usize> = (0..k).collect();
            let suffix: Vec<usize> = (k..7).collect();
            let e = crate::oracle::entropy(&dense, &prefix).unwrap();
            assert!((g.entropy(&prefix) - e).abs() < 1e-9);
            assert!((g.entropy(&suffix) - e).abs() < 1e-9);
        }
    }

    #[test]
    fn sampler_follows_sequential_updates() {
        let g = GaussianState::from_orbitals(&generic(9, 4, 2.0));
        let regions = RegionSpec::partition(9, vec![0, 1], vec![6, 8], vec![2, 3, 4, 5, 7]).unwrap();
        let sampler = TrajectorySampler::new(&g, &regions).unwrap();
        for seed in 0..20 {
            let post = sampler.sample(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut s = g.clone();
            let rec = s.measure_region(&regions.m, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(rec.outcomes, post.record.outcomes);
            assert!((rec.log_prob - post.record.log_prob).abs() < 1e-10);
            let ab_ordered: Vec<usize> = regions.a.iter().chain(&regions.b).copied().collect();
            assert!((submatrix(s.corr(), &ab_ordered) - &post.corr).norm() < 1e-10);
            assert!((post.entropy_a() - s.entropy(&regions.a)).abs() < 1e-9);
            assert!((post.entropy_a() - post.entropy_b()).abs() < 1e-7);
            assert!(post.entropy_ab() < 1e-7);
        }
    }

    #[test]
    fn joint_distribution_matches_oracle() {
        let phi = generic(6, 3, 0.7);
        let g = GaussianState::from_orbitals(&phi);
        let dense = fock::slater_state(&phi, &(0..6).collect::<Vec<_>>()).unwrap();
        let regions = RegionSpec::partition(6, vec![0, 1], vec![4, 5], vec![2, 3]).unwrap();
        let exact: Vec<f64> =
            outcome_ensemble(&dense, &regions, &ProductBasis::z(&[2, 3], 2)).unwrap().iter().map(|(p, _)| *p).collect();
        let n = 100_000;
        let mut counts = [0usize; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..n {
            let mut s = g.clone();
            let rec = s.measure_region(&[2, 3], &mut rng).unwrap();
            counts[(rec.outcomes[0] * 2 + rec.outcomes[1]) as usize] += 1;
        }
        let tv: f64 = 0.5 * counts.iter().zip(&exact).map(|(&k, &p)| (k as f64 / n as f64 - p).abs()).sum::<f64>();
        let sigma = (exact.iter().map(|p| p * (1.0 - p)).sum::<f64>() / n as f64).sqrt();
        assert!(tv < 3.0 * sigma, "tv {tv} sigma {sigma}");
    }

    #[test]
    fn born_probabilities_match_oracle() {
        let phi = generic(6, 2, 4.2);
        let g = GaussianState::from_orbitals(&phi);
        let dense = fock::slater_state(&phi, &(0..6).collect::<Vec<_>>()).unwrap();
        let regions = RegionSpec::partition(6, vec![0], vec![5], vec![1, 2, 3, 4]).unwrap();
        let exact = outcome_ensemble(&dense, &regions, &ProductBasis::z(&regions.m, 2)).unwrap();
        for (idx, (p, _)) in exact.iter().enumerate() {
            let outcomes: Vec<u8> = (0..4).map(|k| ((idx >> (3 - k)) & 1) as u8).collect();
            let mut s = g.clone();
            let mut prob = 1.0;
            for (k, &site) in regions.m.iter().enumerate() {
                match s.measure_orbital(site, Some(outcomes[k]), 0.0) {
                    Ok(o) => prob *= o.probability,
                    Err(Error::ZeroProbability { .. }) => {
                        prob = 0.0;
                        break;
                    }
                    Err(e) => panic!("{e}"),
                }
            }
            assert!((prob - p).abs() < 1e-10, "outcome {idx}: {prob} vs {p}");
        }
    }
}
