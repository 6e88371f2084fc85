//! Strange correlators and the strange-correlator lower bound on MIE.

use super::{apply_op, entropy, outcome_ensemble, ProductBasis, StateVector};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::region::RegionSpec;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

/// An operator supported on a list of sites.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOp {
    pub sites: Vec<usize>,
    pub matrix: CMatrix,
}

impl LocalOp {
    pub fn new(sites: Vec<usize>, matrix: CMatrix) -> Self {
        LocalOp { sites, matrix }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrangeCorrelator {
    /// `⟨ref|O_A O_B|ψ⟩ / ⟨ref|ψ⟩`
    pub value: Complex64,
    /// `value - SC(O_A) SC(O_B)`
    pub connected: Complex64,
}

pub fn strange_correlator(
    state: &StateVector,
    reference: &StateVector,
    o_a: &LocalOp,
    o_b: &LocalOp,
) -> Result<StrangeCorrelator> {
    if reference.local_dims() != state.local_dims() {
        return Err(Error::InvalidParameter("reference and state live on different registers".into()));
    }
    let overlap = reference.inner(state);
    if overlap.norm() <= 1e-12 {
        return Err(Error::VanishingOverlap(overlap.norm()));
    }
    let bra = |amps: &[Complex64]| -> Complex64 {
        reference.amplitudes().iter().zip(amps).map(|(r, a)| r.conj() * a).sum()
    };
    let ob_psi = state.apply(&o_b.matrix, &o_b.sites);
    let oaob_psi = apply_op(state.local_dims(), &ob_psi, &o_a.matrix, &o_a.sites);
    let oa_psi = state.apply(&o_a.matrix, &o_a.sites);
    let value = bra(&oaob_psi) / overlap;
    let sa = bra(&oa_psi) / overlap;
    let sb = bra(&ob_psi) / overlap;
    Ok(StrangeCorrelator { value, connected: value - sa * sb })
}

/// Both sides of the strange-correlator lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub mie: f64,
    /// `c0 Σ_{m_c} (p²_{m_a m_b m_c} / p_{m_c}) |SC|²`
    pub bound: f64,
    pub c0: f64,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.mie >= self.bound - 1e-12
    }
}

/// Evaluates MIE(A) and the weighted strange-correlator sum for fixed
/// reference states `ref_a`, `ref_b` on `A` and `B` (sites ascending) and
/// operators `o_a`, `o_b` acting on all of `A` and `B` respectively.
///
/// `c0 = 1 / (2 Ō_A² Ō_B²)` with `Ō² = ⟨m|O O†|m⟩`, the squared norm of the
/// reference bra after the operator acts on it.
pub fn check_sc_bound(
    state: &StateVector,
    regions: &RegionSpec,
    basis: &ProductBasis,
    ref_a: &StateVector,
    ref_b: &StateVector,
    o_a: &CMatrix,
    o_b: &CMatrix,
) -> Result<BoundReport> {
    let wa = o_a.adjoint() * nalgebra::DVector::from_column_slice(ref_a.amplitudes());
    let wb = o_b.adjoint() * nalgebra::DVector::from_column_slice(ref_b.amplitudes());
    let oa2 = wa.norm_squared();
    let ob2 = wb.norm_squared();
    if oa2 < 1e-14 || ob2 < 1e-14 {
        return Err(Error::DegenerateBound);
    }
    let c0 = 1.0 / (2.0 * oa2 * ob2);
    let m_ab: Vec<Complex64> =
        ref_a.amplitudes().iter().flat_map(|&x| ref_b.amplitudes().iter().map(move |&y| x * y)).collect();
    let w_ab: Vec<Complex64> = wa.iter().flat_map(|&x| wb.iter().map(move |&y| x * y)).collect();

    let na = regions.a.len();
    let a_idx: Vec<usize> = (0..na).collect();
    let mut mie = 0.0;
    let mut sum = 0.0;
    for (p, post) in outcome_ensemble(state, regions, basis)? {
        let Some(post) = post else { continue };
        mie += p * entropy(&post, &a_idx)?;
        let ov_m: Complex64 = m_ab.iter().zip(post.amplitudes()).map(|(m, a)| m.conj() * a).sum();
        let ov_w: Complex64 = w_ab.iter().zip(post.amplitudes()).map(|(w, a)| w.conj() * a).sum();
        // p_m²/p_c |SC|² = p_c |⟨m_ab|φ⟩|² |⟨w|φ⟩|² for the normalized post state φ
        sum += p * ov_m.norm_sqr() * ov_w.norm_sqr();
    }
    Ok(BoundReport { mie, bound: c0 * sum, c0 })
}

/// A randomized instance of the strange-correlator bound: a random
/// particle-number-conserving qubit state, random `A`, `B` of one or two
/// sites, `Z`-basis reference states and random charge-changing operators.
#[derive(Clone, Debug)]
pub struct BoundInstance {
    pub state: StateVector,
    pub regions: RegionSpec,
    pub ref_a: StateVector,
    pub ref_b: StateVector,
    pub o_a: CMatrix,
    pub o_b: CMatrix,
}

impl BoundInstance {
    pub fn check(&self) -> Result<BoundReport> {
        let basis = ProductBasis::z(&self.regions.m, 2);
        check_sc_bound(&self.state, &self.regions, &basis, &self.ref_a, &self.ref_b, &self.o_a, &self.o_b)
    }
}

fn random_c<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
}

/// Random operator on `k` qubits changing the particle number by `delta`.
fn charged_op<R: Rng + ?Sized>(k: usize, delta: i32, rng: &mut R) -> CMatrix {
    let d = 1usize << k;
    CMatrix::from_fn(d, d, |i, j| {
        if i.count_ones() as i32 == j.count_ones() as i32 + delta {
            random_c(rng)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Draws instances on `3..=max_sites` qubits until one has a nondegenerate
/// bound (`⟨m|O O†|m⟩ > 0` on both sides).
pub fn random_bound_instance<R: Rng + ?Sized>(max_sites: usize, rng: &mut R) -> Result<BoundInstance> {
    if !(3..=super::MAX_DIM.trailing_zeros() as usize).contains(&max_sites) {
        return Err(Error::InvalidParameter(format!("max_sites {max_sites} outside 3..=14")));
    }
    loop {
        let n = rng.gen_range(3..=max_sites);
        let charge = rng.gen_range(1..n);
        let amps = (0..1usize << n)
            .map(|i| if i.count_ones() as usize == charge { random_c(rng) } else { Complex64::new(0.0, 0.0) })
            .collect();
        let state = StateVector::normalized(vec![2; n], amps)?;
        let mut sites: Vec<usize> = (0..n).collect();
        sites.shuffle(rng);
        let na = rng.gen_range(1..=2.min(n - 2));
        let nb = rng.gen_range(1..=2.min(n - 1 - na));
        let regions = RegionSpec::complement_measured(n, sites[..na].to_vec(), sites[na..na + nb].to_vec())?;
        let digits = |k: usize, rng: &mut R| (0..k).map(|_| rng.gen_range(0..2)).collect::<Vec<_>>();
        let ref_a = StateVector::basis(vec![2; na], &digits(na, rng))?;
        let ref_b = StateVector::basis(vec![2; nb], &digits(nb, rng))?;
        let delta = if rng.gen::<bool>() { 1 } else { -1 };
        let o_a = charged_op(na, delta, rng);
        let o_b = charged_op(nb, -delta, rng);
        let instance = BoundInstance { state, regions, ref_a, ref_b, o_a, o_b };
        match instance.check() {
            Ok(_) => return Ok(instance),
            Err(Error::DegenerateBound) => continue,
            Err(e) => return Err(e),
        }
    }
}
