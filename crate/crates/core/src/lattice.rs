//! Free-fermion ground states (XX chain, two-band Chern insulator, square
//! lattice metal), region layouts and the cross ratio.

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::region::RegionSpec;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Smallest single-particle gap at the Fermi level accepted by the
/// insulating constructors.
pub const GAP_TOL: f64 = 1e-8;

/// Periodic chain of `l` sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainGeometry {
    pub l: usize,
}

impl ChainGeometry {
    pub fn new(l: usize) -> Result<Self> {
        if l < 4 || l % 2 != 0 {
            return Err(Error::InvalidParameter(format!("chain length {l} must be even and at least 4")));
        }
        Ok(ChainGeometry { l })
    }
}

/// `lx × ly` cells, periodic along x and open (or periodic) along y.
///
/// Bonds crossing the x boundary pick up the phase `e^{i x_twist}`, i.e. a
/// flux `x_twist` threads the cylinder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderGeometry {
    pub lx: usize,
    pub ly: usize,
    pub periodic_y: bool,
    pub x_twist: f64,
}

impl CylinderGeometry {
    pub fn new(lx: usize, ly: usize, periodic_y: bool) -> Result<Self> {
        if lx < 4 || ly < 4 {
            return Err(Error::InvalidParameter(format!("cylinder {lx}x{ly} needs both sides at least 4")));
        }
        Ok(CylinderGeometry { lx, ly, periodic_y, x_twist: 0.0 })
    }

    pub fn with_x_twist(mut self, theta: f64) -> Self {
        self.x_twist = theta;
        self
    }

    pub fn cylinder(l: usize) -> Result<Self> {
        Self::new(l, l, false)
    }

    pub fn torus(lx: usize, ly: usize) -> Result<Self> {
        Self::new(lx, ly, true)
    }

    pub fn num_cells(&self) -> usize {
        self.lx * self.ly
    }

    /// Mode index of orbital `o` in cell `(x, y)` for `orbitals` per cell.
    pub fn mode(&self, x: usize, y: usize, o: usize, orbitals: usize) -> usize {
        (y * self.lx + x) * orbitals + o
    }

    /// Neighbouring cell and the boundary phase picked up on the way.
    fn neighbor(&self, x: usize, y: usize, dx: i64, dy: i64) -> Option<(usize, usize, Complex64)> {
        let raw = x as i64 + dx;
        let winding = raw.div_euclid(self.lx as i64);
        let nx = raw.rem_euclid(self.lx as i64) as usize;
        let ny = y as i64 + dy;
        let ny = if self.periodic_y {
            ny.rem_euclid(self.ly as i64) as usize
        } else if (0..self.ly as i64).contains(&ny) {
            ny as usize
        } else {
            return None;
        };
        Some((nx, ny, Complex64::from_polar(1.0, self.x_twist * winding as f64)))
    }
}

/// Hopping term `amp c†_{R, from} c_{R+d, to}` (plus its conjugate when it is
/// not on-site).
#[derive(Clone, Copy, Debug)]
struct Hop {
    d: (i64, i64),
    from: usize,
    to: usize,
    amp: Complex64,
}

fn real_space_hamiltonian(geom: &CylinderGeometry, orbitals: usize, hops: &[Hop]) -> CMatrix {
    let n = geom.num_cells() * orbitals;
    let mut h = CMatrix::zeros(n, n);
    for y in 0..geom.ly {
        for x in 0..geom.lx {
            for hop in hops {
                let Some((nx, ny, twist)) = geom.neighbor(x, y, hop.d.0, hop.d.1) else { continue };
                let i = geom.mode(x, y, hop.from, orbitals);
                let j = geom.mode(nx, ny, hop.to, orbitals);
                if hop.d == (0, 0) && hop.from == hop.to {
                    h[(i, i)] += hop.amp;
                } else {
                    h[(i, j)] += hop.amp * twist;
                    h[(j, i)] += (hop.amp * twist).conj();
                }
            }
        }
    }
    h
}

fn bloch_hamiltonian(orbitals: usize, hops: &[Hop], kx: f64, ky: f64) -> CMatrix {
    let mut h = CMatrix::zeros(orbitals, orbitals);
    for hop in hops {
        let phase = Complex64::from_polar(1.0, kx * hop.d.0 as f64 + ky * hop.d.1 as f64);
        if hop.d == (0, 0) && hop.from == hop.to {
            h[(hop.from, hop.from)] += hop.amp;
        } else {
            h[(hop.from, hop.to)] += hop.amp * phase;
            h[(hop.to, hop.from)] += (hop.amp * phase).conj();
        }
    }
    h
}

/// Fills the `particles` lowest eigenvectors of `h` (ascending eigenvalues,
/// ties in solver order). Returns the state and the gap `E_N − E_{N−1}`.
pub fn fill_lowest(h: &CMatrix, particles: usize) -> Result<(GaussianState, f64)> {
    let n = h.nrows();
    if particles > n {
        return Err(Error::InvalidParameter(format!("{particles} particles in {n} modes")));
    }
    let (vals, vecs) = hermitian_eigen(h);
    let gap = if particles == 0 || particles == n { f64::INFINITY } else { vals[particles] - vals[particles - 1] };
    Ok((GaussianState::from_orbitals(&vecs.columns(0, particles).into_owned()), gap))
}

/// Hopping matrix of `H = −Σ_i (c†_i c_{i+1} + h.c.)` on a ring.
pub fn hopping_ring(l: usize) -> CMatrix {
    let mut h = CMatrix::zeros(l, l);
    for i in 0..l {
        let j = (i + 1) % l;
        h[(i, j)] += Complex64::new(-1.0, 0.0);
        h[(j, i)] += Complex64::new(-1.0, 0.0);
    }
    h
}

/// Filling fraction of the XX ring in a chemical potential `μ`.
pub fn filling_from_mu(mu: f64) -> Result<f64> {
    if !(mu > -1.0 && mu < 1.0) {
        return Err(Error::InvalidParameter(format!("chemical potential {mu} outside (-1, 1)")));
    }
    Ok(mu.acos() / PI)
}

/// Momenta `m` (in units of `2π/L`) filled at `⌊L n_f⌋` particles.
///
/// The band `−2cos k` grows with `|k|`, so filling in order of `|m|` with `+m`
/// before `−m` fills the lowest modes with the required tie-break.
fn xx_filled_momenta(l: usize, n_f: f64) -> Result<Vec<i64>> {
    if !(n_f > 0.0 && n_f < 1.0) {
        return Err(Error::InvalidParameter(format!("filling {n_f} outside (0, 1)")));
    }
    let particles = (l as f64 * n_f).floor() as usize;
    let half = l as i64 / 2;
    let mut order = vec![0i64];
    for m in 1..=half {
        order.push(m);
        if m != half {
            order.push(-m);
        }
    }
    order.truncate(particles);
    Ok(order)
}

/// Ground state of the hopping ring at filling `n_f`:
/// `C_ij = (1/L) Σ_{k filled} e^{ik(i−j)}`.
pub fn xx_chain_state(geom: ChainGeometry, n_f: f64) -> Result<GaussianState> {
    let l = geom.l;
    let filled = xx_filled_momenta(l, n_f)?;
    let corr = CMatrix::from_fn(l, l, |i, j| {
        let dx = i as f64 - j as f64;
        filled.iter().map(|&m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 * dx / l as f64)).sum::<Complex64>()
            / l as f64
    });
    GaussianState::new(corr)
}

/// Closed form `(1/L)(1 + e^{inx} + 2 sin((n−1)x/2)/sin(x/2) cos(nx/2))` with
/// `x = 2π(i−j)/L` and `n = ⌊L n_f / 2⌋`.
pub fn xx_closed_form(l: usize, n_f: f64) -> CMatrix {
    let n = (l as f64 * n_f / 2.0).floor();
    CMatrix::from_fn(l, l, |i, j| {
        if i == j {
            return Complex64::new(2.0 * n / l as f64, 0.0);
        }
        let x = 2.0 * PI * (i as f64 - j as f64) / l as f64;
        let ratio = ((n - 1.0) * x / 2.0).sin() / (x / 2.0).sin();
        (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, n * x) + 2.0 * ratio * (n * x / 2.0).cos()) / l as f64
    })
}

/// Largest entrywise gap between the closed form and the momentum fill.
pub fn xx_closed_form_deviation(geom: ChainGeometry, n_f: f64) -> Result<f64> {
    let fill = xx_chain_state(geom, n_f)?;
    Ok((xx_closed_form(geom.l, n_f) - fill.corr()).camax())
}

/// Two-band checkerboard model: sublattice `a` at cell corners, `b` at cell
/// centres, with staggered potential `V` on `a` and `−V` on `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernParams {
    pub t1: f64,
    pub t2: f64,
    pub v: f64,
}

impl ChernParams {
    pub fn new(t1: f64, t2: f64, v: f64) -> Self {
        ChernParams { t1, t2, v }
    }

    fn hops(&self) -> Vec<Hop> {
        let c = |x: f64| Complex64::new(x, 0.0);
        // nearest-neighbour phase e^{-iφ s} with s the sign of the a→b bond
        // under the arrow orientation; s = -1 for δxδy > 0, +1 otherwise
        let phi = -PI / 4.0;
        let nn = |s: f64| Complex64::from_polar(self.t1, -phi * s);
        vec![
            Hop { d: (0, 0), from: 0, to: 0, amp: c(self.v) },
            Hop { d: (0, 0), from: 1, to: 1, amp: c(-self.v) },
            Hop { d: (0, 0), from: 0, to: 1, amp: nn(-1.0) },
            Hop { d: (-1, -1), from: 0, to: 1, amp: nn(-1.0) },
            Hop { d: (-1, 0), from: 0, to: 1, amp: nn(1.0) },
            Hop { d: (0, -1), from: 0, to: 1, amp: nn(1.0) },
            Hop { d: (1, 0), from: 0, to: 0, amp: c(self.t2) },
            Hop { d: (0, 1), from: 0, to: 0, amp: c(-self.t2) },
            Hop { d: (1, 0), from: 1, to: 1, amp: c(-self.t2) },
            Hop { d: (0, 1), from: 1, to: 1, amp: c(self.t2) },
        ]
    }

    /// Bloch Hamiltonian in the cell-periodic gauge.
    pub fn bloch(&self, kx: f64, ky: f64) -> CMatrix {
        bloch_hamiltonian(2, &self.hops(), kx, ky)
    }
}

/// Real-space single-particle Hamiltonian of the Chern model, two orbitals per
/// cell (`a` = 0, `b` = 1).
pub fn chern_hamiltonian(geom: &CylinderGeometry, params: ChernParams) -> CMatrix {
    real_space_hamiltonian(geom, 2, &params.hops())
}

/// Half-filled ground state of the Chern model and its Fermi-level gap.
pub fn chern_state(geom: &CylinderGeometry, params: ChernParams) -> Result<(GaussianState, f64)> {
    let h = chern_hamiltonian(geom, params);
    let (state, gap) = fill_lowest(&h, geom.num_cells())?;
    if gap < GAP_TOL {
        return Err(Error::GapClosed { gap, tol: GAP_TOL });
    }
    Ok((state, gap))
}

/// Chern number of the lower band on an `grid × grid` Brillouin-zone mesh,
/// from gauge-invariant plaquette products of link variables.
pub fn chern_number(params: ChernParams, grid: usize) -> Result<i32> {
    if grid < 2 {
        return Err(Error::InvalidParameter("k-grid needs at least 2 points per side".into()));
    }
    let mut states = Vec::with_capacity(grid * grid);
    let mut min_gap = f64::INFINITY;
    for j in 0..grid {
        for i in 0..grid {
            let (kx, ky) = (2.0 * PI * i as f64 / grid as f64, 2.0 * PI * j as f64 / grid as f64);
            let (vals, vecs) = hermitian_eigen(&params.bloch(kx, ky));
            min_gap = min_gap.min(vals[1] - vals[0]);
            states.push([vecs[(0, 0)], vecs[(1, 0)]]);
        }
    }
    if min_gap < GAP_TOL {
        return Err(Error::GapClosed { gap: min_gap, tol: GAP_TOL });
    }
    let at = |i: usize, j: usize| states[(j % grid) * grid + (i % grid)];
    let link = |u: [Complex64; 2], v: [Complex64; 2]| {
        let z = u[0].conj() * v[0] + u[1].conj() * v[1];
        z / z.norm()
    };
    let mut total = 0.0;
    for j in 0..grid {
        for i in 0..grid {
            let u1 = link(at(i, j), at(i + 1, j));
            let u2 = link(at(i + 1, j), at(i + 1, j + 1));
            let u3 = link(at(i, j + 1), at(i + 1, j + 1));
            let u4 = link(at(i, j), at(i, j + 1));
            total += (u1 * u2 * u3.conj() * u4.conj()).arg();
        }
    }
    Ok((total / (2.0 * PI)).round() as i32)
}

/// Single-particle Hamiltonian of nearest-neighbour hopping `−1` on the square
/// lattice, one orbital per cell.
pub fn metal_hamiltonian(geom: &CylinderGeometry) -> CMatrix {
    let hops = [
        Hop { d: (1, 0), from: 0, to: 0, amp: Complex64::new(-1.0, 0.0) },
        Hop { d: (0, 1), from: 0, to: 0, amp: Complex64::new(-1.0, 0.0) },
    ];
    real_space_hamiltonian(geom, 1, &hops)
}

/// Half-filled metal. The returned count is the number of single-particle
/// levels degenerate with the highest filled one that were split by the
/// solver order (0 when the filling is unique).
pub fn metal_state(geom: &CylinderGeometry) -> Result<(GaussianState, usize)> {
    let h = metal_hamiltonian(geom);
    let n = geom.num_cells();
    let (vals, _) = hermitian_eigen(&h);
    let half = n / 2;
    let shell = if half > 0 && half < n && vals[half] - vals[half - 1] < GAP_TOL {
        vals.iter().filter(|&&e| (e - vals[half - 1]).abs() < GAP_TOL).count()
    } else {
        0
    };
    let (state, _) = fill_lowest(&h, half)?;
    Ok((state, shell))
}

/// Cross ratio `η` and `η̃ = η/(1−η)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossRatio {
    pub eta: f64,
    pub eta_tilde: f64,
}

/// `η = x12 x34 / (x13 x24)`, with chord lengths `(L/π) sin(π|x|/L)` when a
/// ring length is given.
pub fn cross_ratio(x: [f64; 4], ring: Option<f64>) -> Result<CrossRatio> {
    if !(x[0] < x[1] && x[1] < x[2] && x[2] < x[3]) {
        return Err(Error::InvalidParameter(format!("cross-ratio points {x:?} not strictly ordered")));
    }
    let dist = |a: f64, b: f64| {
        let d = (b - a).abs();
        match ring {
            Some(l) => l / PI * (PI * d / l).sin(),
            None => d,
        }
    };
    if let Some(l) = ring {
        if x[3] - x[0] >= l {
            return Err(Error::InvalidParameter("points wrap past the ring length".into()));
        }
    }
    let eta = dist(x[0], x[1]) * dist(x[2], x[3]) / (dist(x[0], x[2]) * dist(x[1], x[3]));
    Ok(CrossRatio { eta, eta_tilde: eta / (1.0 - eta) })
}

/// Contiguous site interval `[start, start + len)` on a ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub start: usize,
    pub len: usize,
}

impl Interval {
    pub fn new(start: usize, len: usize) -> Self {
        Interval { start, len }
    }

    pub fn sites(&self) -> Vec<usize> {
        (self.start..self.start + self.len).collect()
    }
}

/// Regions `A`, `B` given by two intervals on a chain, `M` the rest.
pub fn interval_regions(geom: ChainGeometry, a: Interval, b: Interval) -> Result<RegionSpec> {
    if a.len == 0 || b.len == 0 {
        return Err(Error::InvalidRegion("intervals must be nonempty".into()));
    }
    if a.start + a.len > geom.l || b.start + b.len > geom.l {
        return Err(Error::InvalidRegion(format!("interval runs past the chain of {} sites", geom.l)));
    }
    RegionSpec::complement_measured(geom.l, a.sites(), b.sites())
}

/// Cross ratio of two intervals, using the boundary coordinates
/// `x1 = a.start`, `x2 = a.start + a.len` (and likewise for `b`) and chord
/// lengths on the ring.
pub fn interval_cross_ratio(geom: ChainGeometry, a: Interval, b: Interval) -> Result<CrossRatio> {
    let x = [a.start as f64, (a.start + a.len) as f64, b.start as f64, (b.start + b.len) as f64];
    cross_ratio(x, Some(geom.l as f64))
}

/// Two rings of `width` rows separated by `r` rows, centred along the open
/// direction; every orbital of a row belongs to the ring.
pub fn ring_regions(geom: &CylinderGeometry, orbitals: usize, width: usize, r: usize) -> Result<RegionSpec> {
    if width == 0 {
        return Err(Error::InvalidRegion("ring width must be at least 1".into()));
    }
    let span = 2 * width + r;
    if span > geom.ly {
        return Err(Error::InvalidRegion(format!("two rings of width {width} at separation {r} exceed {} rows", geom.ly)));
    }
    let y0 = (geom.ly - span) / 2;
    let rows = |from: usize| -> Vec<usize> {
        (from..from + width)
            .flat_map(|y| (0..geom.lx).flat_map(move |x| (0..orbitals).map(move |o| (y, x, o))))
            .map(|(y, x, o)| geom.mode(x, y, o, orbitals))
            .collect()
    };
    RegionSpec::complement_measured(geom.num_cells() * orbitals, rows(y0), rows(y0 + width + r))
}
