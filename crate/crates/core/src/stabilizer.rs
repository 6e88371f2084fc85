//! Prime-qudit stabilizer states, toric code / `D(Z_p)` ground states on the
//! torus, and annular measurements.
//!
//! A Weyl operator is `ζ^r X^x Z^z` with `ζ = e^{iπ/p}`, so `ω = ζ²` and
//! `Z X = ω X Z`. Phases are kept modulo `2p`.

use crate::error::{Error, Result};
use crate::region::RegionSpec;
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weyl {
    pub x: Vec<u32>,
    pub z: Vec<u32>,
    pub r: u32,
}

impl Weyl {
    pub fn identity(n: usize) -> Self {
        Weyl { x: vec![0; n], z: vec![0; n], r: 0 }
    }

    /// `Π_s X_s^{power}` over `sites`, reduced modulo `p`.
    pub fn x_on(n: usize, sites: &[(usize, i64)], p: u32) -> Self {
        let mut w = Self::identity(n);
        for &(s, e) in sites {
            w.x[s] = (w.x[s] + e.rem_euclid(p as i64) as u32) % p;
        }
        w
    }

    pub fn z_on(n: usize, sites: &[(usize, i64)], p: u32) -> Self {
        let mut w = Self::identity(n);
        for &(s, e) in sites {
            w.z[s] = (w.z[s] + e.rem_euclid(p as i64) as u32) % p;
        }
        w
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Multiplies the operator by `ω^k`.
    pub fn with_omega(mut self, k: i64, p: u32) -> Self {
        self.r = ((self.r as i64 + 2 * k).rem_euclid(2 * p as i64)) as u32;
        self
    }

    /// `self · other`.
    pub fn mul(&self, other: &Weyl, p: u32) -> Weyl {
        let cross: u64 = self.z.iter().zip(&other.x).map(|(&b, &c)| (b * c) as u64).sum::<u64>() % p as u64;
        let r = ((self.r + other.r) as u64 + 2 * cross) % (2 * p as u64);
        Weyl {
            x: self.x.iter().zip(&other.x).map(|(a, c)| (a + c) % p).collect(),
            z: self.z.iter().zip(&other.z).map(|(b, d)| (b + d) % p).collect(),
            r: r as u32,
        }
    }

    pub fn pow(&self, k: u32, p: u32) -> Weyl {
        (0..k).fold(Weyl::identity(self.len()), |acc, _| acc.mul(self, p))
    }

    /// `s` with `self · other = ω^s other · self`.
    pub fn symplectic(&self, other: &Weyl, p: u32) -> u32 {
        let p64 = p as u64;
        let bc: u64 = self.z.iter().zip(&other.x).map(|(&b, &c)| (b * c) as u64).sum::<u64>() % p64;
        let ad: u64 = self.x.iter().zip(&other.z).map(|(&a, &d)| (a * d) as u64).sum::<u64>() % p64;
        ((bc + p64 - ad) % p64) as u32
    }

    fn same_support(&self, other: &Weyl) -> bool {
        self.x == other.x && self.z == other.z
    }
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut result, mut base, mut e) = (1u64, a as u64 % p as u64, p as u64 - 2);
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// Rank over GF(p) of a list of row vectors.
pub fn rank_mod_p(mut rows: Vec<Vec<u32>>, p: u32) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, piv);
        let inv = inv_mod(rows[rank][col], p);
        for v in rows[rank].iter_mut() {
            *v = (*v * inv) % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let f = rows[r][col];
                for c in col..ncols {
                    rows[r][c] = (rows[r][c] + (p - f) * rows[rank][c]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Pure stabilizer state of `n` qudits of prime dimension `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuditStabilizerState {
    p: u32,
    gens: Vec<Weyl>,
}

impl QuditStabilizerState {
    /// Checks that the generators commute and are independent and that
    /// there are as many as qudits.
    pub fn new(p: u32, gens: Vec<Weyl>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("qudit dimension {p} is not prime")));
        }
        let n = gens.len();
        if gens.iter().any(|g| g.len() != n) {
            return Err(Error::InvalidParameter(format!("need {n} generators on {n} qudits")));
        }
        let s = QuditStabilizerState { p, gens };
        if !s.generators_commute() {
            return Err(Error::InvalidParameter("stabilizer generators do not commute".into()));
        }
        if s.rank_on(&(0..n).collect::<Vec<_>>()) != n {
            return Err(Error::InvalidParameter("stabilizer generators are dependent".into()));
        }
        Ok(s)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn num_qudits(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[Weyl] {
        &self.gens
    }

    pub fn generators_commute(&self) -> bool {
        let p = self.p;
        self.gens.iter().enumerate().all(|(i, g)| self.gens[i + 1..].iter().all(|h| g.symplectic(h, p) == 0))
    }

    fn rank_on(&self, region: &[usize]) -> usize {
        let rows =
            self.gens.iter().map(|g| region.iter().map(|&s| g.x[s]).chain(region.iter().map(|&s| g.z[s])).collect()).collect();
        rank_mod_p(rows, self.p)
    }

    /// `S(A) = (rank(G|_A) − |A|) ln p`.
    pub fn entropy(&self, region: &[usize]) -> f64 {
        (self.rank_on(region) as f64 - region.len() as f64) * (self.p as f64).ln()
    }

    /// Coefficients `c` with `Π g_i^{c_i}` equal to `q` up to phase, if any.
    fn decompose(&self, q: &Weyl) -> Option<Vec<u32>> {
        let p = self.p;
        let n = self.gens.len();
        // columns are generators, rows the 2n symplectic coordinates
        let mut rows: Vec<Vec<u32>> = (0..2 * n)
            .map(|k| {
                let mut row: Vec<u32> = self.gens.iter().map(|g| if k < n { g.x[k] } else { g.z[k - n] }).collect();
                row.push(if k < n { q.x[k] } else { q.z[k - n] });
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
            rows.swap(rank, piv);
            let inv = inv_mod(rows[rank][col], p);
            for v in rows[rank].iter_mut() {
                *v = (*v * inv) % p;
            }
            for r in 0..rows.len() {
                if r != rank && rows[r][col] != 0 {
                    let f = rows[r][col];
                    for c in 0..=n {
                        rows[r][c] = (rows[r][c] + (p - f) * rows[rank][c]) % p;
                    }
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if rows[rank..].iter().any(|r| r[n] != 0) {
            return None;
        }
        let mut c = vec![0; n];
        for (k, &col) in pivots.iter().enumerate() {
            c[col] = rows[k][n];
        }
        Some(c)
    }

    /// If `q` has a definite value `ω^k` on the state, returns `k`.
    pub fn eigenvalue(&self, q: &Weyl) -> Option<u32> {
        let p = self.p;
        let c = self.decompose(q)?;
        let prod = self.gens.iter().zip(&c).fold(Weyl::identity(q.len()), |acc, (g, &k)| acc.mul(&g.pow(k, p), p));
        debug_assert!(prod.same_support(q));
        let diff = (q.r + 2 * p - prod.r) % (2 * p);
        debug_assert!(diff % 2 == 0);
        Some((diff / 2) % p)
    }

    /// Measures the Weyl operator `q`, returning the outcome `k` of the
    /// eigenvalue `ω^k`. Random outcomes are uniform.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: &Weyl, rng: &mut R) -> Result<u32> {
        let p = self.p;
        if q.len() != self.num_qudits() {
            return Err(Error::InvalidParameter("operator size does not match the state".into()));
        }
        let s: Vec<u32> = self.gens.iter().map(|g| g.symplectic(q, p)).collect();
        let Some(piv) = s.iter().position(|&v| v != 0) else {
            return Ok(self.eigenvalue(q).expect("commuting operator outside the stabilizer group"));
        };
        let inv = inv_mod(s[piv], p);
        let pivot = self.gens[piv].clone();
        for i in 0..self.gens.len() {
            if i != piv && s[i] != 0 {
                let t = (p - s[i]) * inv % p;
                self.gens[i] = self.gens[i].mul(&pivot.pow(t, p), p);
            }
        }
        let k = rng.gen_range(0..p);
        self.gens[piv] = q.clone().with_omega(-(k as i64), p);
        Ok(k)
    }
}

/// `l1 × l2` square lattice on the torus with one qudit per oriented edge:
/// `h(x, y)` runs `(x, y) → (x+1, y)` and `v(x, y)` runs `(x, y) → (x, y+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusLattice {
    pub l1: usize,
    pub l2: usize,
    pub p: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroundStateLabel {
    /// Eigenvalues `ω^α` of `W^m_2` and `ω^β` of `W^m_1`.
    StringNet(u32, u32),
    /// Eigenvalues `ω^g` of `W^e_1` and `ω^χ` of `W^m_1`.
    Mes(u32, u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    X,
    Z,
}

impl TorusLattice {
    pub fn new(l1: usize, l2: usize, p: u32) -> Result<Self> {
        if l1 < 2 || l2 < 2 {
            return Err(Error::InvalidParameter(format!("torus {l1}x{l2} too small")));
        }
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("group order {p} is not prime")));
        }
        Ok(TorusLattice { l1, l2, p })
    }

    pub fn num_qudits(&self) -> usize {
        2 * self.l1 * self.l2
    }

    fn wrap(&self, x: i64, y: i64) -> (usize, usize) {
        (x.rem_euclid(self.l1 as i64) as usize, y.rem_euclid(self.l2 as i64) as usize)
    }

    pub fn h(&self, x: i64, y: i64) -> usize {
        let (x, y) = self.wrap(x, y);
        2 * (y * self.l1 + x)
    }

    pub fn v(&self, x: i64, y: i64) -> usize {
        let (x, y) = self.wrap(x, y);
        2 * (y * self.l1 + x) + 1
    }

    /// `X` on edges leaving vertex `(x, y)`, `X⁻¹` on edges entering it.
    pub fn star(&self, x: i64, y: i64) -> Weyl {
        let e = [(self.h(x, y), 1), (self.v(x, y), 1), (self.h(x - 1, y), -1), (self.v(x, y - 1), -1)];
        Weyl::x_on(self.num_qudits(), &e, self.p)
    }

    /// Oriented `Z` product around the face with lower-left corner `(x, y)`.
    pub fn plaquette(&self, x: i64, y: i64) -> Weyl {
        let e = [(self.h(x, y), 1), (self.v(x + 1, y), 1), (self.h(x, y + 1), -1), (self.v(x, y), -1)];
        Weyl::z_on(self.num_qudits(), &e, self.p)
    }

    /// `X` on the horizontal edges of column `x0` (a dual loop winding along y).
    pub fn wm1(&self, x0: i64) -> Weyl {
        let e: Vec<(usize, i64)> = (0..self.l2 as i64).map(|y| (self.h(x0, y), 1)).collect();
        Weyl::x_on(self.num_qudits(), &e, self.p)
    }

    /// `X` on the vertical edges of row `y0` (a dual loop winding along x).
    pub fn wm2(&self, y0: i64) -> Weyl {
        let e: Vec<(usize, i64)> = (0..self.l1 as i64).map(|x| (self.v(x, y0), 1)).collect();
        Weyl::x_on(self.num_qudits(), &e, self.p)
    }

    /// `Z` on the vertical edges of column `x0` (a loop winding along y).
    pub fn we1(&self, x0: i64) -> Weyl {
        let e: Vec<(usize, i64)> = (0..self.l2 as i64).map(|y| (self.v(x0, y), 1)).collect();
        Weyl::z_on(self.num_qudits(), &e, self.p)
    }

    /// `Z` on the horizontal edges of row `y0` (a loop winding along x).
    pub fn we2(&self, y0: i64) -> Weyl {
        let e: Vec<(usize, i64)> = (0..self.l1 as i64).map(|x| (self.h(x, y0), 1)).collect();
        Weyl::z_on(self.num_qudits(), &e, self.p)
    }

    /// Edges `h(c, y)` and `v(c, y)` for all `y`.
    pub fn column(&self, c: usize) -> Vec<usize> {
        (0..self.l2 as i64).flat_map(|y| [self.h(c as i64, y), self.v(c as i64, y)]).collect()
    }

    /// Midpoint of an edge in lattice units.
    pub fn midpoint(&self, edge: usize) -> (f64, f64) {
        let cell = edge / 2;
        let (x, y) = ((cell % self.l1) as f64, (cell / self.l1) as f64);
        if edge % 2 == 0 {
            (x + 0.5, y)
        } else {
            (x, y + 0.5)
        }
    }
}

/// Ground state fixed by all but one star and plaquette plus two loop
/// operators chosen by `label`.
pub fn toric_ground(lat: &TorusLattice, label: GroundStateLabel) -> Result<QuditStabilizerState> {
    let p = lat.p;
    let mut gens = Vec::with_capacity(lat.num_qudits());
    for y in 0..lat.l2 as i64 {
        for x in 0..lat.l1 as i64 {
            if (x, y) != (0, 0) {
                gens.push(lat.star(x, y));
                gens.push(lat.plaquette(x, y));
            }
        }
    }
    let (a, b) = match label {
        GroundStateLabel::StringNet(alpha, beta) => (lat.wm2(0).with_omega(-(alpha as i64), p), lat.wm1(0).with_omega(-(beta as i64), p)),
        GroundStateLabel::Mes(g, chi) => (lat.we1(0).with_omega(-(g as i64), p), lat.wm1(0).with_omega(-(chi as i64), p)),
    };
    let (GroundStateLabel::StringNet(u, v) | GroundStateLabel::Mes(u, v)) = label;
    if u >= p || v >= p {
        return Err(Error::InvalidParameter(format!("label ({u}, {v}) outside Z_{p}")));
    }
    gens.push(a);
    gens.push(b);
    QuditStabilizerState::new(p, gens)
}

/// Regions for the `A, M, B, M` layout: `windows` are `(first column, width)`
/// of the measured annuli; the two remaining column runs are `A` (the run
/// after the first window) and `B`.
pub fn annulus_regions(lat: &TorusLattice, windows: &[(usize, usize)]) -> Result<RegionSpec> {
    let mut measured = vec![false; lat.l1];
    for &(start, width) in windows {
        if width == 0 || width > lat.l1 {
            return Err(Error::InvalidRegion(format!("annulus width {width} invalid on {} columns", lat.l1)));
        }
        for c in start..start + width {
            measured[c % lat.l1] = true;
        }
    }
    let runs = column_runs(&measured);
    if runs.len() != 2 {
        return Err(Error::InvalidRegion(format!("annuli leave {} unmeasured cylinders, need 2", runs.len())));
    }
    let cols = |run: &Vec<usize>| run.iter().flat_map(|&c| lat.column(c)).collect::<Vec<_>>();
    let first = windows.first().map_or(0, |w| w.0);
    let (a, b) = if runs[0].contains(&((first + windows[0].1) % lat.l1)) { (&runs[0], &runs[1]) } else { (&runs[1], &runs[0]) };
    RegionSpec::complement_measured(lat.num_qudits(), cols(a), cols(b))
}

/// Maximal cyclic runs of `false` entries.
fn column_runs(measured: &[bool]) -> Vec<Vec<usize>> {
    let n = measured.len();
    let Some(start) = (0..n).find(|&c| measured[c]) else {
        return vec![(0..n).collect()];
    };
    let mut runs = Vec::new();
    let mut current = Vec::new();
    for k in 1..=n {
        let c = (start + k) % n;
        if measured[c] {
            if !current.is_empty() {
                runs.push(std::mem::take(&mut current));
            }
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

/// `A` = edges with midpoints strictly inside `inner`, `M` = those inside
/// `outer` but not `inner`, `B` the rest. Boxes are `(x0, y0, x1, y1)`.
pub fn box_regions(lat: &TorusLattice, inner: (f64, f64, f64, f64), outer: (f64, f64, f64, f64)) -> Result<RegionSpec> {
    let inside = |b: (f64, f64, f64, f64), (x, y): (f64, f64)| x > b.0 && x < b.2 && y > b.1 && y < b.3;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for e in 0..lat.num_qudits() {
        let m = lat.midpoint(e);
        if inside(inner, m) {
            a.push(e);
        } else if !inside(outer, m) {
            b.push(e);
        }
    }
    RegionSpec::complement_measured(lat.num_qudits(), a, b)
}

/// Measures every qudit of `m` in the eigenbasis of `X` or `Z`, in ascending
/// order, and returns the outcomes.
pub fn measure_annulus<R: Rng + ?Sized>(
    state: &mut QuditStabilizerState,
    m: &[usize],
    basis: Basis,
    rng: &mut R,
) -> Result<Vec<u32>> {
    let n = state.num_qudits();
    let p = state.p();
    let mut sites = m.to_vec();
    sites.sort_unstable();
    sites
        .iter()
        .map(|&s| {
            if s >= n {
                return Err(Error::InvalidRegion(format!("qudit {s} outside 0..{n}")));
            }
            let q = match basis {
                Basis::X => Weyl::x_on(n, &[(s, 1)], p),
                Basis::Z => Weyl::z_on(n, &[(s, 1)], p),
            };
            state.measure(&q, rng)
        })
        .collect()
}

/// Post-measurement `S(A)` over several outcome seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct TopoMie {
    pub value: f64,
    pub per_seed: Vec<f64>,
    pub outcome_independent: bool,
    /// `S(A) = S(B)` on every trajectory.
    pub pure_split: bool,
}

pub fn mie_topological(
    lat: &TorusLattice,
    label: GroundStateLabel,
    regions: &RegionSpec,
    basis: Basis,
    seeds: &[u64],
) -> Result<TopoMie> {
    use rand::SeedableRng;
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one outcome seed".into()));
    }
    regions.validate(lat.num_qudits())?;
    let ground = toric_ground(lat, label)?;
    let mut per_seed = Vec::with_capacity(seeds.len());
    let mut pure_split = true;
    for &seed in seeds {
        let mut state = ground.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        measure_annulus(&mut state, &regions.m, basis, &mut rng)?;
        let sa = state.entropy(&regions.a);
        pure_split &= (sa - state.entropy(&regions.b)).abs() < 1e-9;
        per_seed.push(sa);
    }
    let value = per_seed[0];
    let outcome_independent = per_seed.iter().all(|&s| (s - value).abs() < 1e-9);
    Ok(TopoMie { value, per_seed, outcome_independent, pure_split })
}

/// MIE of independent stacked layers `Z_{p1} × Z_{p2} × …`, each on its own
/// lattice with the same annulus layout.
pub fn stacked_mie(
    l1: usize,
    l2: usize,
    primes: &[u32],
    label: GroundStateLabel,
    windows: &[(usize, usize)],
    basis: Basis,
    seeds: &[u64],
) -> Result<TopoMie> {
    let mut total = TopoMie { value: 0.0, per_seed: vec![0.0; seeds.len()], outcome_independent: true, pure_split: true };
    for &p in primes {
        let lat = TorusLattice::new(l1, l2, p)?;
        let regions = annulus_regions(&lat, windows)?;
        let layer = mie_topological(&lat, label, &regions, basis, seeds)?;
        total.value += layer.value;
        for (t, s) in total.per_seed.iter_mut().zip(&layer.per_seed) {
            *t += s;
        }
        total.outcome_independent &= layer.outcome_independent;
        total.pure_split &= layer.pure_split;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{entropy, mie_mii_exact, Frame, ProductBasis, StateVector};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{LN_2, PI};

    fn seeds() -> Vec<u64> {
        (0..16).collect()
    }

    #[test]
    fn weyl_algebra() {
        let p = 3;
        let x = Weyl::x_on(1, &[(0, 1)], p);
        let z = Weyl::z_on(1, &[(0, 1)], p);
        // Z X = ω X Z
        let zx = z.mul(&x, p);
        let xz = x.mul(&z, p).with_omega(1, p);
        assert_eq!(zx, xz);
        assert_eq!(z.symplectic(&x, p), 1);
        assert_eq!(x.pow(3, p), Weyl::identity(1));
        assert_eq!(z.pow(3, p), Weyl::identity(1));
    }

    #[test]
    fn rank_over_gf_p() {
        assert_eq!(rank_mod_p(vec![vec![1, 2], vec![2, 1]], 3), 1);
        assert_eq!(rank_mod_p(vec![vec![1, 2], vec![2, 1]], 5), 2);
    }

    #[test]
    fn product_and_bell_entropies() {
        let z = |s| Weyl::z_on(2, &[(s, 1)], 2);
        let prod = QuditStabilizerState::new(2, vec![z(0), z(1)]).unwrap();
        assert_eq!(prod.entropy(&[0]), 0.0);
        let bell = QuditStabilizerState::new(2, vec![Weyl::x_on(2, &[(0, 1), (1, 1)], 2), Weyl::z_on(2, &[(0, 1), (1, 1)], 2)])
            .unwrap();
        assert!((bell.entropy(&[0]) - LN_2).abs() < 1e-12);
        assert!(QuditStabilizerState::new(2, vec![z(0), Weyl::x_on(2, &[(0, 1)], 2)]).is_err());
    }

    #[test]
    fn deterministic_and_random_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let z = |s| Weyl::z_on(2, &[(s, 1)], 3);
        // |0, 1> on qutrits: Z_1 eigenvalue ω
        let mut s = QuditStabilizerState::new(3, vec![z(0), z(1).with_omega(-1, 3)]).unwrap();
        assert_eq!(s.measure(&z(1), &mut rng).unwrap(), 1);
        let x0 = Weyl::x_on(2, &[(0, 1)], 3);
        let k = s.measure(&x0, &mut rng).unwrap();
        assert_eq!(s.eigenvalue(&x0), Some(k));
        assert_eq!(s.eigenvalue(&z(0)), None);
    }

    #[test]
    fn ground_states_are_pure() {
        for (l, p) in [(4, 2), (4, 3), (3, 5)] {
            let lat = TorusLattice::new(l, l, p).unwrap();
            for label in [GroundStateLabel::StringNet(0, 0), GroundStateLabel::StringNet(1, 0), GroundStateLabel::Mes(1, 1)] {
                let s = toric_ground(&lat, label).unwrap();
                assert_eq!(s.num_qudits(), 2 * l * l);
                assert!(s.generators_commute());
                // every star and plaquette, including the dropped ones, stabilizes
                assert_eq!(s.eigenvalue(&lat.star(0, 0)), Some(0));
                assert_eq!(s.eigenvalue(&lat.plaquette(0, 0)), Some(0));
            }
        }
    }

    #[test]
    fn loop_eigenvalues() {
        let lat = TorusLattice::new(4, 4, 2).unwrap();
        let s = toric_ground(&lat, GroundStateLabel::StringNet(0, 1)).unwrap();
        assert_eq!(s.eigenvalue(&lat.wm1(2)), Some(1));
        assert_eq!(s.eigenvalue(&lat.wm2(3)), Some(0));
        assert_eq!(s.eigenvalue(&lat.we1(0)), None);
        let mes = toric_ground(&lat, GroundStateLabel::Mes(0, 0)).unwrap();
        assert_eq!(mes.eigenvalue(&lat.we1(1)), Some(0));
        assert_eq!(mes.eigenvalue(&lat.wm2(0)), None);
    }

    #[test]
    fn string_net_x_basis_gives_log_p() {
        for p in [2, 3, 5] {
            let lat = TorusLattice::new(6, 4, p).unwrap();
            let regions = annulus_regions(&lat, &[(0, 1), (3, 1)]).unwrap();
            for label in [GroundStateLabel::StringNet(0, 0), GroundStateLabel::StringNet(1, p - 1)] {
                let r = mie_topological(&lat, label, &regions, Basis::X, &seeds()).unwrap();
                assert!((r.value - (p as f64).ln()).abs() < 1e-9, "p={p}: {}", r.value);
                assert!(r.outcome_independent && r.pure_split);
            }
        }
    }

    #[test]
    fn mes_has_no_mie() {
        let lat = TorusLattice::new(6, 4, 2).unwrap();
        let regions = annulus_regions(&lat, &[(1, 2), (4, 1)]).unwrap();
        for basis in [Basis::X, Basis::Z] {
            for label in [GroundStateLabel::Mes(0, 1), GroundStateLabel::Mes(1, 0)] {
                let r = mie_topological(&lat, label, &regions, basis, &seeds()).unwrap();
                assert!(r.value.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn contractible_region_has_no_mie() {
        let lat = TorusLattice::new(8, 8, 2).unwrap();
        let regions = box_regions(&lat, (2.2, 2.2, 4.8, 4.8), (0.8, 0.8, 6.2, 6.2)).unwrap();
        assert!(!regions.a.is_empty() && !regions.b.is_empty());
        let r = mie_topological(&lat, GroundStateLabel::StringNet(0, 0), &regions, Basis::X, &seeds()).unwrap();
        assert!(r.value.abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn annulus_layout() {
        let lat = TorusLattice::new(6, 4, 2).unwrap();
        let r = annulus_regions(&lat, &[(0, 1), (3, 1)]).unwrap();
        assert_eq!(r.a.len(), 16);
        assert_eq!(r.b.len(), 16);
        assert!(r.a.contains(&lat.h(1, 0)) && r.b.contains(&lat.h(4, 0)));
        assert!(annulus_regions(&lat, &[(0, 1)]).is_err());
    }

    /// Dense vector of a stabilizer state, by projecting a generic vector.
    fn dense(state: &QuditStabilizerState) -> StateVector {
        let p = state.p() as usize;
        let n = state.num_qudits();
        let dim = p.pow(n as u32);
        let zeta = |r: u32| Complex64::from_polar(1.0, PI * r as f64 / p as f64);
        let apply = |g: &Weyl, v: &[Complex64]| -> Vec<Complex64> {
            let mut out = vec![Complex64::new(0.0, 0.0); dim];
            for (idx, &a) in v.iter().enumerate() {
                let mut digits: Vec<usize> = (0..n).map(|q| (idx / p.pow((n - 1 - q) as u32)) % p).collect();
                // Z^z acts first, then X^x
                let zphase: u32 = (0..n).map(|q| g.z[q] * digits[q] as u32).sum::<u32>() % state.p();
                for q in 0..n {
                    digits[q] = (digits[q] + g.x[q] as usize) % p;
                }
                let target = digits.iter().fold(0, |acc, &d| acc * p + d);
                out[target] += a * zeta(g.r + 2 * zphase);
            }
            out
        };
        let mut v: Vec<Complex64> = (0..dim).map(|k| Complex64::new((0.37 * k as f64).sin() + 0.1, (1.3 * k as f64).cos())).collect();
        for g in state.generators() {
            let mut acc = v.clone();
            let mut term = v.clone();
            for _ in 1..p {
                term = apply(g, &term);
                for (a, t) in acc.iter_mut().zip(&term) {
                    *a += t;
                }
            }
            v = acc;
        }
        StateVector::normalized(vec![p; n], v).unwrap()
    }

    #[test]
    fn small_torus_matches_dense_oracle() {
        for p in [2u32, 3] {
            let lat = TorusLattice::new(2, 2, p).unwrap();
            let s = toric_ground(&lat, GroundStateLabel::StringNet(0, 0)).unwrap();
            let psi = dense(&s);
            for region in [vec![0], vec![0, 1], vec![0, 3, 5], vec![1, 2, 4, 7]] {
                assert!((s.entropy(&region) - entropy(&psi, &region).unwrap()).abs() < 1e-9);
            }
            // measure one column in the X eigenbasis (Fourier frame for p > 2)
            let regions = RegionSpec::complement_measured(8, lat.column(0).into_iter().take(1).collect(), vec![lat.v(1, 1)]).unwrap();
            let frames = regions.m.iter().map(|&q| if p == 2 { Frame::x(q) } else { Frame::fourier(q, p as usize) }).collect();
            let exact = mie_mii_exact(&psi, &regions, &ProductBasis::new(frames).unwrap()).unwrap();
            let r = mie_topological(&lat, GroundStateLabel::StringNet(0, 0), &regions, Basis::X, &seeds()).unwrap();
            assert!(r.outcome_independent);
            assert!((exact.mie - r.value).abs() < 1e-9, "p={p}: {} vs {}", exact.mie, r.value);
        }
    }

    #[test]
    fn mes_is_string_net_superposition() {
        let lat = TorusLattice::new(2, 2, 2).unwrap();
        let sn = dense(&toric_ground(&lat, GroundStateLabel::StringNet(0, 0)).unwrap());
        let we1 = lat.we1(0);
        let flipped = {
            // W^e_1 is diagonal: multiply by (-1)^{Σ bits on its support}
            let amps: Vec<Complex64> = sn
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(idx, &a)| {
                    let parity: u32 = (0..8).map(|q| we1.z[q] * ((idx >> (7 - q)) & 1) as u32).sum();
                    if parity % 2 == 0 { a } else { -a }
                })
                .collect();
            amps
        };
        let sum: Vec<Complex64> = sn.amplitudes().iter().zip(&flipped).map(|(a, b)| a + b).collect();
        let sum = StateVector::normalized(vec![2; 8], sum).unwrap();
        let mes = dense(&toric_ground(&lat, GroundStateLabel::Mes(0, 0)).unwrap());
        assert!((mes.inner(&sum).norm() - 1.0).abs() < 1e-9);
    }
}
