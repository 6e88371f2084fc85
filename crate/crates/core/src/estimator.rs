//! Monte Carlo estimates of MIE and MII with error bars, the scaled MIE and
//! partially traced MII, and the fits used to extract exponents.

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, TrajectorySampler};
use crate::region::RegionSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorResult {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub stderr: f64,
    pub jackknife_stderr: f64,
    pub n_samples: usize,
    pub samples: Option<Vec<f64>>,
}

impl EstimatorResult {
    pub fn from_samples(samples: Vec<f64>, keep: bool) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::InsufficientData("no samples".into()));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        let jackknife_stderr = jackknife_stderr(&samples);
        Ok(EstimatorResult { mean, stderr, jackknife_stderr, n_samples: n, samples: keep.then_some(samples) })
    }

    /// A value without sampling noise.
    pub fn exact(value: f64) -> Self {
        EstimatorResult { mean: value, stderr: 0.0, jackknife_stderr: 0.0, n_samples: 1, samples: None }
    }
}

/// Jackknife standard error of the mean from leave-one-out means.
pub fn jackknife_stderr(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let total: f64 = samples.iter().sum();
    let loo: Vec<f64> = samples.iter().map(|x| (total - x) / (n - 1) as f64).collect();
    let bar = loo.iter().sum::<f64>() / n as f64;
    ((n - 1) as f64 / n as f64 * loo.iter().map(|m| (m - bar).powi(2)).sum::<f64>()).sqrt()
}

/// Generator for trajectory `index`: ChaCha8 seeded with `seed` on stream `index`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates `f` on `n` trajectories in parallel. The result depends only
/// on `(seed, n)`, not on the thread count.
pub fn sample_parallel<T, F>(n: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..n as u64).into_par_iter().map(|i| f(&mut trajectory_rng(seed, i))).collect()
}

/// Born average of the post-measurement `S(A)`.
pub fn monte_carlo_mie(state: &GaussianState, regions: &RegionSpec, n_samples: usize, seed: u64) -> Result<EstimatorResult> {
    if n_samples == 0 {
        return Err(Error::InsufficientData("n_samples must be positive".into()));
    }
    let sampler = TrajectorySampler::new(state, regions)?;
    let values = sample_parallel(n_samples, seed, |rng| Ok(sampler.sample(rng).entropy_a()))?;
    EstimatorResult::from_samples(values, false)
}

/// `MII = 2 MIE − I(A,B)` of the pure pre-measurement state.
pub fn mii(state: &GaussianState, regions: &RegionSpec, mie: &EstimatorResult) -> Result<EstimatorResult> {
    if regions.m.is_empty() {
        return Err(Error::InvalidRegion("MII needs a nonempty measured region".into()));
    }
    let pre = state.mutual_information(&regions.a, &regions.b)?;
    Ok(EstimatorResult {
        mean: 2.0 * mie.mean - pre,
        stderr: 2.0 * mie.stderr,
        jackknife_stderr: 2.0 * mie.jackknife_stderr,
        n_samples: mie.n_samples,
        samples: None,
    })
}

/// Born-averaged `I(A0, B0)` after measuring `M` and tracing the rest of
/// `A ∪ B`, minus its pre-measurement value.
pub fn traced_mii(state: &GaussianState, regions: &RegionSpec, n_samples: usize, seed: u64) -> Result<EstimatorResult> {
    let (Some(a0), Some(b0)) = (&regions.a0, &regions.b0) else {
        return Err(Error::InvalidRegion("traced MII needs subregions A0 and B0".into()));
    };
    if n_samples == 0 {
        return Err(Error::InsufficientData("n_samples must be positive".into()));
    }
    let na = regions.a.len();
    let la0: Vec<usize> = a0.iter().map(|s| regions.a.binary_search(s).expect("A0 ⊆ A")).collect();
    let lb0: Vec<usize> = b0.iter().map(|s| na + regions.b.binary_search(s).expect("B0 ⊆ B")).collect();
    let lab0: Vec<usize> = la0.iter().chain(&lb0).copied().collect();
    let pre = state.mutual_information(a0, b0)?;
    let sampler = TrajectorySampler::new(state, regions)?;
    let values = sample_parallel(n_samples, seed, |rng| {
        let post = sampler.sample(rng);
        Ok(post.entropy_of(&la0) + post.entropy_of(&lb0) - post.entropy_of(&lab0) - pre)
    })?;
    EstimatorResult::from_samples(values, false)
}

/// Which member of a scaled pair a factory should build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Full,
    Half,
}

/// `size / 2`, or an error for odd sizes.
pub fn halve(size: usize) -> Result<usize> {
    if size % 2 == 1 || size == 0 {
        return Err(Error::InvalidParameter(format!("size {size} cannot be halved")));
    }
    Ok(size / 2)
}

/// `2 MIE_{1/2} − MIE` with propagated error.
pub fn scaled_combination(full: &EstimatorResult, half: &EstimatorResult) -> EstimatorResult {
    EstimatorResult {
        mean: 2.0 * half.mean - full.mean,
        stderr: (4.0 * half.stderr.powi(2) + full.stderr.powi(2)).sqrt(),
        jackknife_stderr: (4.0 * half.jackknife_stderr.powi(2) + full.jackknife_stderr.powi(2)).sqrt(),
        n_samples: full.n_samples.min(half.n_samples),
        samples: None,
    }
}

/// Scaled MIE with the model and regions built by `factory` at both scales.
pub fn scaled_mie<F>(factory: F, n_samples: usize, seed: u64) -> Result<EstimatorResult>
where
    F: Fn(Scale) -> Result<(GaussianState, RegionSpec)>,
{
    let (s_full, r_full) = factory(Scale::Full)?;
    let (s_half, r_half) = factory(Scale::Half)?;
    let full = monte_carlo_mie(&s_full, &r_full, n_samples, seed)?;
    let half = monte_carlo_mie(&s_half, &r_half, n_samples, seed.wrapping_add(1))?;
    Ok(scaled_combination(&full, &half))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesResult {
    pub points: Vec<(f64, EstimatorResult)>,
}

impl SeriesResult {
    /// Sorts by abscissa and rejects repeated abscissas.
    pub fn new(mut points: Vec<(f64, EstimatorResult)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParameter("series abscissas must be distinct".into()));
        }
        Ok(SeriesResult { points })
    }

    pub fn window(&self, lo: f64, hi: f64) -> Vec<&(f64, EstimatorResult)> {
        self.points.iter().filter(|(x, _)| *x >= lo && *x <= hi).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Weighted straight-line fit. The slope error is scaled by the reduced χ².
fn linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<Fit> {
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("fit needs ≥ 3 points, got {n}")));
    }
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, c), b)| b * (a - xm) * (c - ym)).sum();
    let syy: f64 = y.iter().zip(w).map(|(c, b)| b * (c - ym).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("fit abscissas are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: f64 = x.iter().zip(y).zip(w).map(|((a, c), b)| b * (c - intercept - slope * a).powi(2)).sum();
    let stderr = (chi2 / (n - 2) as f64 / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - chi2 / syy } else { 1.0 };
    Ok(Fit { slope, stderr, intercept, r_squared, n_points: n })
}

fn log_weights(points: &[&(f64, EstimatorResult)]) -> Vec<f64> {
    // σ(ln y) ≈ σ/y; fall back to equal weights when any point is exact
    let sig: Vec<f64> = points.iter().map(|(_, r)| r.stderr / r.mean).collect();
    if sig.iter().all(|&s| s > 0.0) {
        sig.iter().map(|s| 1.0 / (s * s)).collect()
    } else {
        vec![1.0; points.len()]
    }
}

/// Fit of `ln y` against `ln x` over `lo ≤ x ≤ hi`.
pub fn power_law_fit(series: &SeriesResult, window: (f64, f64)) -> Result<Fit> {
    let pts = series.window(window.0, window.1);
    if pts.iter().any(|(x, r)| *x <= 0.0 || r.mean <= 0.0) {
        return Err(Error::InsufficientData("power-law fit needs positive data in the window".into()));
    }
    let x: Vec<f64> = pts.iter().map(|(x, _)| x.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|(_, r)| r.mean.ln()).collect();
    linear_fit(&x, &y, &log_weights(&pts))
}

/// Fit of `ln y` against `x`; the decay length is `−1/slope`.
pub fn exp_fit(series: &SeriesResult, window: (f64, f64)) -> Result<Fit> {
    let pts = series.window(window.0, window.1);
    if pts.iter().any(|(_, r)| r.mean <= 0.0) {
        return Err(Error::InsufficientData("exponential fit needs positive data in the window".into()));
    }
    let x: Vec<f64> = pts.iter().map(|(x, _)| *x).collect();
    let y: Vec<f64> = pts.iter().map(|(_, r)| r.mean.ln()).collect();
    linear_fit(&x, &y, &log_weights(&pts))
}

/// Unweighted fit of `y` against `ln x`.
pub fn semilog_fit(series: &SeriesResult, window: (f64, f64)) -> Result<Fit> {
    let pts = series.window(window.0, window.1);
    if pts.iter().any(|(x, _)| *x <= 0.0) {
        return Err(Error::InsufficientData("semilog fit needs positive abscissas".into()));
    }
    let x: Vec<f64> = pts.iter().map(|(x, _)| x.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|(_, r)| r.mean).collect();
    linear_fit(&x, &y, &vec![1.0; x.len()])
}

fn interp_log(series: &SeriesResult, x: f64) -> f64 {
    let p = &series.points;
    let k = p.partition_point(|(a, _)| *a < x).clamp(1, p.len() - 1);
    let (x0, y0) = (p[k - 1].0.ln(), p[k - 1].1.mean.ln());
    let (x1, y1) = (p[k].0.ln(), p[k].1.mean.ln());
    y0 + (y1 - y0) * (x.ln() - x0) / (x1 - x0)
}

/// Mean over a common log-spaced grid and over pairs of series of the
/// squared difference of `ln y`, interpolated linearly in `ln x`.
pub fn data_collapse(series: &[SeriesResult]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InsufficientData("collapse needs at least two series".into()));
    }
    for s in series {
        if s.points.len() < 2 || s.points.iter().any(|(x, r)| *x <= 0.0 || r.mean <= 0.0) {
            return Err(Error::InsufficientData("collapse needs ≥ 2 positive points per series".into()));
        }
    }
    let lo = series.iter().map(|s| s.points[0].0).fold(f64::MIN, f64::max);
    let hi = series.iter().map(|s| s.points.last().unwrap().0).fold(f64::MAX, f64::min);
    if lo >= hi {
        return Err(Error::InsufficientData("series do not overlap in abscissa".into()));
    }
    const GRID: usize = 32;
    let mut total = 0.0;
    let mut count = 0;
    for g in 0..GRID {
        let x = (lo.ln() + (hi.ln() - lo.ln()) * g as f64 / (GRID - 1) as f64).exp().clamp(lo, hi);
        let ys: Vec<f64> = series.iter().map(|s| interp_log(s, x)).collect();
        for i in 0..ys.len() {
            for j in i + 1..ys.len() {
                total += (ys[i] - ys[j]).powi(2);
                count += 1;
            }
        }
    }
    Ok(total / count as f64)
}

/// MIE at each abscissa; point `k` uses seed `seed + k`.
pub fn mie_series(state: &GaussianState, points: &[(f64, RegionSpec)], n_samples: usize, seed: u64) -> Result<SeriesResult> {
    let results = points
        .iter()
        .enumerate()
        .map(|(k, (x, regions))| Ok((*x, monte_carlo_mie(state, regions, n_samples, seed.wrapping_add(k as u64))?)))
        .collect::<Result<Vec<_>>>()?;
    SeriesResult::new(results)
}

/// Random-singlet MIE/MII against the interval separation `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingletSeries {
    pub mie_bell: SeriesResult,
    pub mii_bell: SeriesResult,
    pub mii_z: SeriesResult,
    /// Largest `|MII_Z|` over all configurations and separations.
    pub max_abs_mii_z: f64,
}

/// Samples `n_configs` periodic SDRG configurations of `l` sites and, on each,
/// evaluates intervals of length `len` at every separation in `rs`.
pub fn singlet_series(l: usize, len: usize, rs: &[usize], n_configs: usize, seed: u64) -> Result<SingletSeries> {
    use crate::singlet::{mie_mii_bell, mie_mii_zbasis, ring_intervals, sdrg_sample, Boundary};
    if n_configs == 0 || rs.is_empty() {
        return Err(Error::InsufficientData("need configurations and separations".into()));
    }
    let layouts = rs.iter().map(|&r| ring_intervals(l, len, r)).collect::<Result<Vec<_>>>()?;
    let per_config = sample_parallel(n_configs, seed, |rng| {
        let config = sdrg_sample(l, Boundary::Periodic, rng)?;
        layouts
            .iter()
            .map(|(regions, pairing)| {
                let (mie, mii) = mie_mii_bell(&config, regions, pairing)?;
                let (_, mii_z) = mie_mii_zbasis(&config, regions)?;
                Ok([mie, mii, mii_z])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let column = |k: usize, q: usize| per_config.iter().map(|v| v[k][q]).collect::<Vec<f64>>();
    let series = |q: usize| -> Result<SeriesResult> {
        SeriesResult::new(
            rs.iter().enumerate().map(|(k, &r)| Ok((r as f64, EstimatorResult::from_samples(column(k, q), false)?))).collect::<Result<_>>()?,
        )
    };
    let max_abs_mii_z = per_config.iter().flatten().map(|v| v[2].abs()).fold(0.0, f64::max);
    Ok(SingletSeries { mie_bell: series(0)?, mii_bell: series(1)?, mii_z: series(2)?, max_abs_mii_z })
}

/// Density of SDRG singlet lengths per site on a ring, in logarithmic bins
/// (factor `√2`), with Poisson errors. Lengths are odd, so each bin's count
/// is divided by the number of odd lengths it contains.
pub fn pair_distance_distribution(l: usize, n_configs: usize, seed: u64) -> Result<SeriesResult> {
    use crate::singlet::{sdrg_sample, Boundary};
    let lengths = sample_parallel(n_configs, seed, |rng| Ok(sdrg_sample(l, Boundary::Periodic, rng)?.pair_distances(Boundary::Periodic)))?;
    let mut counts = vec![0u64; l / 2 + 1];
    for d in lengths.iter().flatten() {
        counts[*d] += 1;
    }
    let norm = (n_configs * l) as f64;
    let mut points = Vec::new();
    let mut lo = 1.0f64;
    while lo <= (l / 2) as f64 {
        let hi = lo * std::f64::consts::SQRT_2;
        let range = (lo.ceil() as usize)..(hi.ceil() as usize).min(l / 2 + 1);
        let odd = range.clone().filter(|d| d % 2 == 1).count();
        let c: u64 = range.map(|d| counts[d]).sum();
        if odd > 0 && c > 0 {
            let density = c as f64 / norm / odd as f64;
            let r = EstimatorResult { mean: density, stderr: density / (c as f64).sqrt(), jackknife_stderr: density / (c as f64).sqrt(), n_samples: c as usize, samples: None };
            points.push(((lo * hi).sqrt(), r));
        }
        lo = hi;
    }
    SeriesResult::new(points)
}

/// A random number-conserving free-fermion state on a few modes with a
/// random `A, B, M` partition, plus its occupied orbitals.
#[derive(Clone, Debug)]
pub struct OracleInstance {
    pub state: GaussianState,
    pub orbitals: crate::linalg::CMatrix,
    pub regions: RegionSpec,
}

/// Draws a random hopping matrix on `4..=max_modes` modes, fills its lowest
/// orbitals, and splits the modes randomly into nonempty `A`, `B`, `M`.
pub fn random_oracle_instance<R: rand::Rng + ?Sized>(max_modes: usize, rng: &mut R) -> Result<OracleInstance> {
    use crate::linalg::CMatrix;
    use num_complex::Complex64;
    if !(4..=12).contains(&max_modes) {
        return Err(Error::InvalidParameter(format!("max_modes {max_modes} outside 4..=12")));
    }
    loop {
        let n = rng.gen_range(4..=max_modes);
        let particles = rng.gen_range(1..n);
        let mut h = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        h = &h + h.adjoint();
        let Ok((state, _)) = crate::lattice::fill_lowest(&h, particles) else { continue };
        let owner: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let pick = |k: u8| (0..n).filter(|&i| owner[i] == k).collect::<Vec<_>>();
        let (a, b, m) = (pick(0), pick(1), pick(2));
        if a.is_empty() || b.is_empty() || m.is_empty() {
            continue;
        }
        let orbitals = crate::oracle::fock::orbitals_from_correlation(state.corr());
        return Ok(OracleInstance { state, orbitals, regions: RegionSpec::partition(n, a, b, m)? });
    }
}

#[derive(Clone, Debug)]
pub struct OracleCheck {
    pub exact_mie: f64,
    pub monte_carlo: EstimatorResult,
    /// Largest deviation of a sequential Gaussian outcome probability from
    /// the dense Born probability, over every outcome string of `M`.
    pub max_probability_error: f64,
}

impl OracleCheck {
    pub fn within(&self, sigmas: f64) -> bool {
        (self.monte_carlo.mean - self.exact_mie).abs() <= sigmas * self.monte_carlo.stderr + 1e-12
    }
}

/// Compares the Monte Carlo MIE and the Gaussian outcome probabilities with
/// dense enumeration. The dense state orders modes as `A, B, M` so that
/// the spin entropies of `A` and `B` equal the fermionic ones.
pub fn oracle_check(inst: &OracleInstance, n_samples: usize, seed: u64) -> Result<OracleCheck> {
    use crate::oracle::{fock, mie_mii_exact, outcome_ensemble, ProductBasis};
    let r = &inst.regions;
    let order: Vec<usize> = r.a.iter().chain(&r.b).chain(&r.m).copied().collect();
    let dense = fock::slater_state(&inst.orbitals, &order)?;
    let (na, nb, n) = (r.a.len(), r.b.len(), order.len());
    let dense_regions = RegionSpec::partition(n, (0..na).collect(), (na..na + nb).collect(), (na + nb..n).collect())?;
    let basis = ProductBasis::z(&dense_regions.m, 2);
    let exact_mie = mie_mii_exact(&dense, &dense_regions, &basis)?.mie;
    let mut max_probability_error: f64 = 0.0;
    for (k, (p, _)) in outcome_ensemble(&dense, &dense_regions, &basis)?.into_iter().enumerate() {
        let nm = r.m.len();
        let mut g = inst.state.clone();
        let mut q = 1.0;
        for (i, &site) in r.m.iter().enumerate() {
            let bit = (k >> (nm - 1 - i)) & 1;
            match g.measure_orbital(site, Some(bit as u8), 0.0) {
                Ok(o) => q *= o.probability,
                Err(Error::ZeroProbability { .. }) => {
                    q = 0.0;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        // forced outcomes below the cutoff count as impossible
        if q == 0.0 && p <= 1e-12 {
            continue;
        }
        max_probability_error = max_probability_error.max((q - p).abs());
    }
    let monte_carlo = monte_carlo_mie(&inst.state, r, n_samples, seed)?;
    Ok(OracleCheck { exact_mie, monte_carlo, max_probability_error })
}
