//! Dense state-vector reference implementation.
//!
//! Everything here is brute force: states are full amplitude vectors over a
//! product of small local Hilbert spaces, measurements are explicit
//! projections, and averages over outcomes are exact enumerations. The
//! other modules are checked against it on small systems.

pub mod fock;
pub mod strange;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::region::RegionSpec;
use num_complex::Complex64;

pub use strange::{check_sc_bound, strange_correlator, BoundReport, LocalOp, StrangeCorrelator};

/// Largest Hilbert space the oracle will diagonalize or enumerate.
pub const MAX_DIM: usize = 1 << 14;

const NORM_TOL: f64 = 1e-12;

/// A normalized pure state on a register of qudits.
///
/// Amplitudes are stored in lexicographic order with site 0 as the most
/// significant digit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    local_dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps `amps`, which must already have unit norm.
    pub fn new(local_dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        let dim = checked_dim(&local_dims)?;
        if amps.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "amplitude vector has length {} but local dimensions give {dim}",
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!("state norm² is {norm}, expected 1")));
        }
        Ok(StateVector { local_dims, amps })
    }

    /// Normalizes `amps` and wraps them.
    pub fn normalized(local_dims: Vec<usize>, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidParameter("cannot normalize the zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(local_dims, amps)
    }

    pub fn qubits(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if 1usize << n != amps.len() {
            return Err(Error::InvalidParameter("qubit state length must be a power of two".into()));
        }
        Self::normalized(vec![2; n], amps)
    }

    /// Computational basis state `|d_0 d_1 ...⟩`.
    pub fn basis(local_dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        let dim = checked_dim(&local_dims)?;
        if digits.len() != local_dims.len() || digits.iter().zip(&local_dims).any(|(d, n)| d >= n) {
            return Err(Error::InvalidParameter("basis digits do not match local dimensions".into()));
        }
        let mut amps = vec![ZERO; dim];
        amps[digits_to_index(digits, &local_dims)] = ONE;
        Ok(StateVector { local_dims, amps })
    }

    /// Tensor product of single-site states.
    pub fn product(sites: &[Vec<Complex64>]) -> Result<Self> {
        let local_dims: Vec<usize> = sites.iter().map(Vec::len).collect();
        let mut amps = vec![ONE];
        for v in sites {
            amps = amps.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect();
        }
        Self::normalized(local_dims, amps)
    }

    pub fn num_sites(&self) -> usize {
        self.local_dims.len()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Reorders the tensor factors: site `k` of the result is site
    /// `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> StateVector {
        let n = self.num_sites();
        assert_eq!(order.len(), n, "permutation must list every site");
        let new_dims: Vec<usize> = order.iter().map(|&s| self.local_dims[s]).collect();
        let old_strides = strides(&self.local_dims);
        let mut amps = vec![ZERO; self.amps.len()];
        let mut digits = vec![0usize; n];
        for (new_idx, slot) in amps.iter_mut().enumerate() {
            index_to_digits(new_idx, &new_dims, &mut digits);
            let old_idx: usize = digits.iter().zip(order).map(|(&d, &s)| d * old_strides[s]).sum();
            *slot = self.amps[old_idx];
        }
        StateVector { local_dims: new_dims, amps }
    }

    /// Applies an operator acting on `sites` (in the given order). The result
    /// is not renormalized.
    pub fn apply(&self, op: &CMatrix, sites: &[usize]) -> Vec<Complex64> {
        apply_op(&self.local_dims, &self.amps, op, sites)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Applies `op` on `sites` (in the given order) to raw amplitudes.
pub(crate) fn apply_op(local_dims: &[usize], amps: &[Complex64], op: &CMatrix, sites: &[usize]) -> Vec<Complex64> {
    let sub_dims: Vec<usize> = sites.iter().map(|&s| local_dims[s]).collect();
    let sub_dim: usize = sub_dims.iter().product();
    assert_eq!(op.nrows(), sub_dim, "operator dimension does not match its support");
    let st = strides(local_dims);
    let sub_offsets: Vec<usize> = (0..sub_dim)
        .map(|k| {
            let mut d = vec![0; sites.len()];
            index_to_digits(k, &sub_dims, &mut d);
            d.iter().zip(sites).map(|(&x, &s)| x * st[s]).sum()
        })
        .collect();
    let mut out = vec![ZERO; amps.len()];
    let mut digits = vec![0usize; local_dims.len()];
    let mut buf = vec![ZERO; sub_dim];
    for base in 0..amps.len() {
        index_to_digits(base, local_dims, &mut digits);
        if sites.iter().any(|&s| digits[s] != 0) {
            continue;
        }
        for (k, off) in sub_offsets.iter().enumerate() {
            buf[k] = amps[base + off];
        }
        for (r, off) in sub_offsets.iter().enumerate() {
            out[base + off] = (0..sub_dim).map(|c| op[(r, c)] * buf[c]).sum();
        }
    }
    out
}

/// One orthonormal measurement frame on one or two sites. Column `k` of
/// `unitary` is the basis vector for outcome `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub sites: Vec<usize>,
    pub unitary: CMatrix,
}

impl Frame {
    pub fn new(sites: Vec<usize>, unitary: CMatrix) -> Result<Self> {
        if sites.is_empty() || sites.len() > 2 {
            return Err(Error::InvalidParameter("frames act on one or two sites".into()));
        }
        let n = unitary.nrows();
        if unitary.ncols() != n {
            return Err(Error::InvalidParameter("frame matrix is not square".into()));
        }
        let dev = (unitary.adjoint() * &unitary - CMatrix::identity(n, n)).camax();
        if dev > NORM_TOL {
            return Err(Error::InvalidParameter(format!("frame is not unitary (deviation {dev:e})")));
        }
        Ok(Frame { sites, unitary })
    }

    /// Computational (Z) basis.
    pub fn z(site: usize, dim: usize) -> Self {
        Frame { sites: vec![site], unitary: CMatrix::identity(dim, dim) }
    }

    /// Discrete Fourier basis; for qubits this is the X basis with outcome 0
    /// being `|+⟩`.
    pub fn fourier(site: usize, dim: usize) -> Self {
        let norm = 1.0 / (dim as f64).sqrt();
        let u = CMatrix::from_fn(dim, dim, |j, k| {
            Complex64::from_polar(norm, 2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64)
        });
        Frame { sites: vec![site], unitary: u }
    }

    pub fn x(site: usize) -> Self {
        Self::fourier(site, 2)
    }

    /// Two-qubit Bell frame ordered singlet, triplet-zero, `Φ⁻`, `Φ⁺`.
    pub fn bell(s1: usize, s2: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| Complex64::new(x, 0.0);
        // rows are |00>,|01>,|10>,|11>
        let u = CMatrix::from_row_slice(
            4,
            4,
            &[
                c(0.0), c(0.0), c(h), c(h),
                c(h), c(h), c(0.0), c(0.0),
                c(-h), c(h), c(0.0), c(0.0),
                c(0.0), c(0.0), c(-h), c(h),
            ],
        );
        Frame { sites: vec![s1, s2], unitary: u }
    }

    pub fn num_outcomes(&self) -> usize {
        self.unitary.ncols()
    }
}

/// A product measurement basis: disjoint frames.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBasis {
    pub frames: Vec<Frame>,
}

impl ProductBasis {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for f in &frames {
            for &s in &f.sites {
                if !seen.insert(s) {
                    return Err(Error::InvalidParameter(format!("site {s} covered by two frames")));
                }
            }
        }
        Ok(ProductBasis { frames })
    }

    pub fn z(sites: &[usize], dim: usize) -> Self {
        ProductBasis { frames: sites.iter().map(|&s| Frame::z(s, dim)).collect() }
    }

    pub fn x(sites: &[usize]) -> Self {
        ProductBasis { frames: sites.iter().map(|&s| Frame::x(s)).collect() }
    }

    /// Sorted list of covered sites.
    pub fn sites(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.frames.iter().flat_map(|f| f.sites.iter().copied()).collect();
        v.sort_unstable();
        v
    }
}

/// Returns the lowest-energy eigenvector of a dense Hermitian matrix together
/// with its eigenvalue.
///
/// The global phase is fixed by making the first component of largest
/// modulus real and positive.
pub fn ground_state(hamiltonian: &CMatrix, local_dims: Vec<usize>) -> Result<(f64, StateVector)> {
    let dim = hamiltonian.nrows();
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow { dim, limit: MAX_DIM });
    }
    if hamiltonian.ncols() != dim || checked_dim(&local_dims)? != dim {
        return Err(Error::InvalidParameter("hamiltonian dimension does not match local dimensions".into()));
    }
    let dev = linalg::hermitian_deviation(hamiltonian);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    let (vals, vecs) = linalg::hermitian_eigen(hamiltonian);
    let mut amps: Vec<Complex64> = vecs.column(0).iter().copied().collect();
    fix_phase(&mut amps);
    Ok((vals[0], StateVector::normalized(local_dims, amps)?))
}

fn fix_phase(amps: &mut [Complex64]) {
    let max = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if let Some(pivot) = amps.iter().position(|a| a.norm() >= max * (1.0 - 1e-9)) {
        let phase = amps[pivot].conj() / amps[pivot].norm();
        amps.iter_mut().for_each(|a| *a *= phase);
    }
}

/// Projects the sites of `frame` onto basis vector `outcome`.
///
/// Returns the renormalized post-measurement state and the Born
/// probability. A zero-probability outcome is reported as an error.
pub fn project(state: &StateVector, frame: &Frame, outcome: usize) -> Result<(StateVector, f64)> {
    if outcome >= frame.num_outcomes() {
        return Err(Error::InvalidParameter(format!("outcome {outcome} out of range")));
    }
    let col: Vec<Complex64> = frame.unitary.column(outcome).iter().copied().collect();
    let bra = CMatrix::from_fn(col.len(), col.len(), |i, j| col[i] * col[j].conj());
    let projected = state.apply(&bra, &frame.sites);
    let p: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
    if p < 1e-14 {
        return Err(Error::ZeroProbability { outcome, probability: p });
    }
    Ok((StateVector::normalized(state.local_dims.clone(), projected)?, p))
}

/// Single-site projective measurement.
pub fn project_site(state: &StateVector, site: usize, frame: &Frame, outcome: usize) -> Result<(StateVector, f64)> {
    if frame.sites != [site] {
        return Err(Error::InvalidParameter(format!("frame does not act on site {site}")));
    }
    project(state, frame, outcome)
}

/// Von Neumann entropy (nats) of the reduced state on `region`.
pub fn entropy(state: &StateVector, region: &[usize]) -> Result<f64> {
    let n = state.num_sites();
    let mut in_region = vec![false; n];
    for &s in region {
        if s >= n || in_region[s] {
            return Err(Error::InvalidRegion(format!("bad site {s} in entropy region")));
        }
        in_region[s] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&s| !in_region[s]).collect();
    // The pure-state entropy is symmetric; trace out the larger side.
    let dim_region: usize = region.iter().map(|&s| state.local_dims[s]).product();
    let dim_rest: usize = rest.iter().map(|&s| state.local_dims[s]).product();
    let (keep, other) = if dim_region <= dim_rest { (region.to_vec(), rest) } else { (rest, region.to_vec()) };
    Ok(linalg::von_neumann(&reduced_spectrum(state, &keep, &other)))
}

fn reduced_spectrum(state: &StateVector, keep: &[usize], other: &[usize]) -> Vec<f64> {
    let order: Vec<usize> = keep.iter().chain(other).copied().collect();
    let p = state.permute(&order);
    let dk: usize = keep.iter().map(|&s| state.local_dims[s]).product();
    let de = p.dim() / dk;
    let psi = CMatrix::from_fn(dk, de, |i, j| p.amps[i * de + j]);
    let rho = &psi * psi.adjoint();
    linalg::hermitian_eigenvalues(&rho)
}

/// Exact measurement-averaged quantities for one region layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactMeasurement {
    /// `Σ_m p_m S(A)[ψ_m]`
    pub mie: f64,
    /// `Σ_m p_m I(A,B)[ψ_m] - I(A,B)[ψ]`
    pub mii: f64,
    /// `Σ_m p_m I(A,B)[ψ_m]`
    pub mean_post_mutual_info: f64,
    /// `I(A,B)[ψ]`
    pub pre_mutual_info: f64,
}

/// Born-probability distribution over all outcomes of `basis`, enumerated in
/// lexicographic order of the measured sites' digits. Each entry is
/// `(probability, post-measurement state on A ∪ B)` where the returned state
/// orders its sites as `A` then `B` (each ascending).
pub fn outcome_ensemble(
    state: &StateVector,
    regions: &RegionSpec,
    basis: &ProductBasis,
) -> Result<Vec<(f64, Option<StateVector>)>> {
    regions.validate(state.num_sites())?;
    if basis.sites() != regions.m {
        return Err(Error::InvalidRegion("measurement basis must cover exactly M".into()));
    }
    let rotated = rotate_into(state, basis);
    let order: Vec<usize> = regions.a.iter().chain(&regions.b).chain(&regions.m).copied().collect();
    let p = rotated.permute(&order);
    let ab_dims: Vec<usize> = regions.a.iter().chain(&regions.b).map(|&s| state.local_dims[s]).collect();
    let dim_ab: usize = ab_dims.iter().product();
    let dim_m = p.dim() / dim_ab;
    let mut out = Vec::with_capacity(dim_m);
    for m in 0..dim_m {
        let phi: Vec<Complex64> = (0..dim_ab).map(|ab| p.amps[ab * dim_m + m]).collect();
        let prob: f64 = phi.iter().map(|a| a.norm_sqr()).sum();
        if prob < 1e-15 {
            out.push((prob, None));
        } else {
            out.push((prob, Some(StateVector::normalized(ab_dims.clone(), phi)?)));
        }
    }
    Ok(out)
}

/// Rotates every frame of `basis` to the computational basis: outcome `k`
/// of a frame becomes digit pattern `k` on its sites.
fn rotate_into(state: &StateVector, basis: &ProductBasis) -> StateVector {
    let mut s = state.clone();
    for f in &basis.frames {
        s.amps = s.apply(&f.unitary.adjoint(), &f.sites);
    }
    s
}

/// Exact MIE and MII by enumeration of every measurement outcome on `M`.
pub fn mie_mii_exact(state: &StateVector, regions: &RegionSpec, basis: &ProductBasis) -> Result<ExactMeasurement> {
    if state.dim() > MAX_DIM {
        return Err(Error::DimensionOverflow { dim: state.dim(), limit: MAX_DIM });
    }
    let ensemble = outcome_ensemble(state, regions, basis)?;
    let na = regions.a.len();
    let nb = regions.b.len();
    let a_idx: Vec<usize> = (0..na).collect();
    let b_idx: Vec<usize> = (na..na + nb).collect();
    let mut mie = 0.0;
    let mut post_i = 0.0;
    for (p, post) in &ensemble {
        let Some(post) = post else { continue };
        let sa = entropy(post, &a_idx)?;
        let sb = entropy(post, &b_idx)?;
        mie += p * sa;
        // post-measurement A ∪ B is pure, so S(AB) = 0
        post_i += p * (sa + sb);
    }
    let pre = mutual_information(state, &regions.a, &regions.b)?;
    Ok(ExactMeasurement { mie, mii: post_i - pre, mean_post_mutual_info: post_i, pre_mutual_info: pre })
}

/// `S(A) + S(B) - S(A ∪ B)` for a pure state.
pub fn mutual_information(state: &StateVector, a: &[usize], b: &[usize]) -> Result<f64> {
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(entropy(state, a)? + entropy(state, b)? - entropy(state, &ab)?)
}

fn checked_dim(local_dims: &[usize]) -> Result<usize> {
    let mut dim = 1usize;
    for &d in local_dims {
        if d == 0 {
            return Err(Error::InvalidParameter("local dimension must be positive".into()));
        }
        dim = dim.checked_mul(d).filter(|&x| x <= MAX_DIM).ok_or(Error::DimensionOverflow {
            dim: usize::MAX,
            limit: MAX_DIM,
        })?;
    }
    Ok(dim)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut st = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        st[i] = st[i + 1] * dims[i + 1];
    }
    st
}

pub(crate) fn index_to_digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for i in (0..dims.len()).rev() {
        out[i] = idx % dims[i];
        idx /= dims[i];
    }
}

pub(crate) fn digits_to_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn ghz3() -> StateVector {
        let mut a = vec![ZERO; 8];
        a[0] = c(1.0);
        a[7] = c(1.0);
        StateVector::qubits(a).unwrap()
    }

    fn bell() -> StateVector {
        StateVector::qubits(vec![c(1.0), ZERO, ZERO, c(1.0)]).unwrap()
    }

    /// (|01⟩ - |10⟩)/√2 on sites (0,1) ⊗ the same on (2,3).
    fn singlet_pairs() -> StateVector {
        let s = [ZERO, c(1.0), c(-1.0), ZERO];
        let amps = (0..16).map(|i| s[i >> 2] * s[i & 3]).collect();
        StateVector::qubits(amps).unwrap()
    }

    #[test]
    fn ground_state_diagonal() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(1.0)]));
        let (e, gs) = ground_state(&h, vec![2]).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(gs.amplitudes(), &[c(1.0), ZERO]);
    }

    #[test]
    fn ground_state_two_site_hopping() {
        // one fermion on two sites: basis |01>,|10>, H = -(|01><10| + h.c.)
        let h = CMatrix::from_row_slice(2, 2, &[ZERO, c(-1.0), c(-1.0), ZERO]);
        let (e, gs) = ground_state(&h, vec![2]).unwrap();
        assert!((e + 1.0).abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((gs.amplitudes()[0] - c(r)).norm() < 1e-12);
        assert!((gs.amplitudes()[1] - c(r)).norm() < 1e-12);
    }

    #[test]
    fn ground_state_zz_xx() {
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let h = -(x.kronecker(&x) + z.kronecker(&z));
        // Bell states diagonalize both terms: spectrum {-2, 0, 0, 2}
        let spectrum = linalg::hermitian_eigenvalues(&h);
        let (e, gs) = ground_state(&h, vec![2, 2]).unwrap();
        assert!((e - spectrum[0]).abs() < 1e-12);
        assert!((e + 2.0).abs() < 1e-12);
        let v = nalgebra::DVector::from_vec(gs.amplitudes().to_vec());
        assert!((&h * &v - v.map(|a| a * e)).norm() < 1e-10);
    }

    #[test]
    fn ground_state_rejects_bad_input() {
        let h = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(ground_state(&h, vec![2]), Err(Error::NotHermitian(_))));
        let big = CMatrix::zeros(MAX_DIM * 2, 1);
        assert!(matches!(ground_state(&big, vec![2; 15]), Err(Error::DimensionOverflow { .. })));
    }

    #[test]
    fn project_examples() {
        let zero = StateVector::basis(vec![2], &[0]).unwrap();
        let (post, p) = project_site(&zero, 0, &Frame::z(0, 2), 0).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(post, zero);
        assert!(matches!(project_site(&zero, 0, &Frame::z(0, 2), 1), Err(Error::ZeroProbability { .. })));

        let (post, p) = project_site(&bell(), 0, &Frame::z(0, 2), 1).unwrap();
        assert!((p - 0.5).abs() < 1e-14);
        assert!((post.amplitudes()[3] - ONE).norm() < 1e-14);

        let (post, p) = project_site(&ghz3(), 1, &Frame::x(1), 0).unwrap();
        assert!((p - 0.5).abs() < 1e-14);
        // remaining sites 0,2 in (|00>+|11>)/√2, site 1 in |+>
        let expected = StateVector::qubits(vec![c(1.0), ZERO, c(1.0), ZERO, ZERO, c(1.0), ZERO, c(1.0)]).unwrap();
        assert!((post.inner(&expected).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn born_completeness_bell_frame() {
        let s = singlet_pairs();
        let f = Frame::bell(1, 2);
        let total: f64 = (0..4).map(|k| project(&s, &f, k).map(|(_, p)| p).unwrap_or(0.0)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let prod = StateVector::product(&[vec![c(1.0), c(1.0)], vec![c(1.0), c(0.0)]]).unwrap();
        assert!(entropy(&prod, &[0]).unwrap().abs() < 1e-12);
        assert!((entropy(&bell(), &[0]).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((entropy(&ghz3(), &[0, 1]).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(entropy(&bell(), &[0, 0]).is_err());
    }

    #[test]
    fn singlet_teleportation_gives_log2() {
        let s = singlet_pairs();
        let regions = RegionSpec::partition(4, vec![0], vec![3], vec![1, 2]).unwrap();
        let basis = ProductBasis::new(vec![Frame::bell(1, 2)]).unwrap();
        let r = mie_mii_exact(&s, &regions, &basis).unwrap();
        assert!((r.mie - 2f64.ln()).abs() < 1e-12);
        assert!((r.mii - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ghz_z_and_x_measurements() {
        let ln2 = 2f64.ln();
        let regions = RegionSpec::partition(3, vec![0], vec![2], vec![1]).unwrap();
        let z = mie_mii_exact(&ghz3(), &regions, &ProductBasis::z(&[1], 2)).unwrap();
        assert!((z.pre_mutual_info - ln2).abs() < 1e-12);
        assert!(z.mie.abs() < 1e-12);
        assert!((z.mii + ln2).abs() < 1e-12);
        let x = mie_mii_exact(&ghz3(), &regions, &ProductBasis::x(&[1])).unwrap();
        assert!((x.mie - ln2).abs() < 1e-12);
        assert!((x.mii - ln2).abs() < 1e-12);
    }

    #[test]
    fn basis_must_cover_m() {
        let regions = RegionSpec::partition(3, vec![0], vec![2], vec![1]).unwrap();
        assert!(mie_mii_exact(&ghz3(), &regions, &ProductBasis::z(&[0], 2)).is_err());
    }

    #[test]
    fn permute_roundtrip() {
        let amps: Vec<Complex64> = (0..8).map(|i| c(i as f64 + 1.0)).collect();
        let s = StateVector::qubits(amps).unwrap();
        let p = s.permute(&[2, 0, 1]);
        let back = p.permute(&[1, 2, 0]);
        assert_eq!(back, s);
    }
}
