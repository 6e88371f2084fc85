//! Dense Fock-space representation of spinless fermions.
//!
//! Mode `q` is stored on qubit `q` with a Jordan–Wigner string running over
//! qubits `0..q`, so `c†_{s1} ... c†_{sN} |0⟩` with `s1 < ... < sN` is the
//! computational basis state with those bits set and sign `+1`.

use super::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};
use num_complex::Complex64;

#[inline]
fn bit(n: usize, modes: usize, q: usize) -> bool {
    (n >> (modes - 1 - q)) & 1 == 1
}

/// Applies `c†_i c_j` to basis state `n`, returning the image and sign.
fn hop(n: usize, modes: usize, i: usize, j: usize) -> Option<(usize, f64)> {
    if i == j {
        return bit(n, modes, i).then_some((n, 1.0));
    }
    if !bit(n, modes, j) || bit(n, modes, i) {
        return None;
    }
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let between = (lo + 1..hi).filter(|&q| bit(n, modes, q)).count();
    let image = n ^ (1 << (modes - 1 - j)) ^ (1 << (modes - 1 - i));
    Some((image, if between % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Many-body matrix of `Σ_ij h_ij c†_i c_j` on the full Fock space.
pub fn quadratic_hamiltonian(h: &CMatrix) -> Result<CMatrix> {
    let modes = h.nrows();
    let dim = 1usize << modes;
    if dim > super::MAX_DIM {
        return Err(Error::DimensionOverflow { dim, limit: super::MAX_DIM });
    }
    let mut out = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        for i in 0..modes {
            for j in 0..modes {
                let t = h[(i, j)];
                if t == ZERO {
                    continue;
                }
                if let Some((image, sign)) = hop(n, modes, i, j) {
                    out[(image, n)] += t * sign;
                }
            }
        }
    }
    Ok(out)
}

/// Correlation matrix `C_ij = ⟨c†_i c_j⟩` of a dense qubit state.
pub fn correlation_matrix(state: &StateVector) -> CMatrix {
    let modes = state.num_sites();
    let amps = state.amplitudes();
    CMatrix::from_fn(modes, modes, |i, j| {
        let mut acc = ZERO;
        for (n, &a) in amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            if let Some((image, sign)) = hop(n, modes, i, j) {
                acc += amps[image].conj() * a * sign;
            }
        }
        acc
    })
}

/// Dense Slater determinant `Π_k (Σ_i Φ_ik c†_i) |0⟩` for orthonormal
/// orbitals in the columns of `orbitals` (modes × particles).
///
/// `order[q]` is the mode stored on qubit `q`; choosing the order fixes
/// which regions are Jordan–Wigner contiguous.
pub fn slater_state(orbitals: &CMatrix, order: &[usize]) -> Result<StateVector> {
    let modes = orbitals.nrows();
    let particles = orbitals.ncols();
    if order.len() != modes {
        return Err(Error::InvalidParameter("mode order must list every mode".into()));
    }
    let dim = 1usize << modes;
    if dim > super::MAX_DIM {
        return Err(Error::DimensionOverflow { dim, limit: super::MAX_DIM });
    }
    let mut amps = vec![ZERO; dim];
    for (n, amp) in amps.iter_mut().enumerate() {
        if n.count_ones() as usize != particles {
            continue;
        }
        let occupied: Vec<usize> = (0..modes).filter(|&q| bit(n, modes, q)).collect();
        let sub = CMatrix::from_fn(particles, particles, |r, k| orbitals[(order[occupied[r]], k)]);
        *amp = if particles == 0 { Complex64::new(1.0, 0.0) } else { sub.determinant() };
    }
    StateVector::normalized(vec![2; modes], amps)
}

/// Occupied orbitals `Φ` of a projector correlation matrix, such that
/// `C_ij = Σ_k conj(Φ_ik) Φ_jk`.
pub fn orbitals_from_correlation(corr: &CMatrix) -> CMatrix {
    let (vals, vecs) = crate::linalg::hermitian_eigen(corr);
    let occupied: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.5).collect();
    CMatrix::from_fn(corr.nrows(), occupied.len(), |i, k| vecs[(i, occupied[k])].conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_mode_bonding_state() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let phi = CMatrix::from_column_slice(2, 1, &[Complex64::new(r, 0.0), Complex64::new(r, 0.0)]);
        let s = slater_state(&phi, &[0, 1]).unwrap();
        let c = correlation_matrix(&s);
        for i in 0..2 {
            for j in 0..2 {
                assert!((c[(i, j)] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hopping_sign_through_occupied_mode() {
        // c†_0 c_2 on |011> (modes 1,2 occupied) passes occupied mode 1
        let (image, sign) = hop(0b011, 3, 0, 2).unwrap();
        assert_eq!(image, 0b110);
        assert_eq!(sign, -1.0);
    }

    #[test]
    fn slater_correlation_matches_orbitals() {
        // three modes, two particles in orthonormalized generic orbitals
        let raw = CMatrix::from_fn(3, 3, |i, j| Complex64::new((1 + i + 2 * j) as f64 * 0.3, (i as f64 - j as f64) * 0.7));
        let q = raw.qr().q();
        let phi = q.columns(0, 2).into_owned();
        let c_expected = CMatrix::from_fn(3, 3, |i, j| (0..2).map(|k| phi[(i, k)].conj() * phi[(j, k)]).sum());
        for order in [[0, 1, 2], [2, 0, 1]] {
            let s = slater_state(&phi, &order).unwrap();
            let c_qubit = correlation_matrix(&s);
            let c = CMatrix::from_fn(3, 3, |i, j| c_qubit[(order.iter().position(|&m| m == i).unwrap(), order.iter().position(|&m| m == j).unwrap())]);
            assert!((c - &c_expected).norm() < 1e-12);
        }
    }
}
