//! Experiment pipelines: each turns a validated config into named series,
//! optional fits and summary values.

use crate::config::{BasisName, ExperimentConfig, Kind, StateLabel};
use mieflow_core::estimator::{
    data_collapse, exp_fit, mie_series, oracle_check, pair_distance_distribution, power_law_fit, random_oracle_instance,
    semilog_fit, singlet_series, EstimatorResult, Fit, SeriesResult,
};
use mieflow_core::lattice::{
    chern_number, chern_state, cross_ratio, filling_from_mu, interval_cross_ratio, interval_regions, metal_state,
    ring_regions, xx_chain_state, ChainGeometry, ChernParams, CylinderGeometry, Interval,
};
use mieflow_core::mera::{build_mera, leg_interval, mie_large_d, mutual_info_large_d, MeraGraph};
use mieflow_core::stabilizer::{stacked_mie, Basis, GroundStateLabel};
use mieflow_core::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitKind {
    /// `ln y` against `ln x`
    Power,
    /// `ln y` against `x`
    Exp,
    /// `y` against `ln x`
    SemiLog,
}

impl FitKind {
    pub fn name(self) -> &'static str {
        match self {
            FitKind::Power => "power",
            FitKind::Exp => "exp",
            FitKind::SemiLog => "semilog",
        }
    }

    pub fn predict(self, fit: &Fit, x: f64) -> f64 {
        match self {
            FitKind::Power => (fit.intercept + fit.slope * x.ln()).exp(),
            FitKind::Exp => (fit.intercept + fit.slope * x).exp(),
            FitKind::SemiLog => fit.intercept + fit.slope * x.ln(),
        }
    }

    pub fn apply(self, series: &SeriesResult, window: (f64, f64)) -> Result<Fit> {
        match self {
            FitKind::Power => power_law_fit(series, window),
            FitKind::Exp => exp_fit(series, window),
            FitKind::SemiLog => semilog_fit(series, window),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeriesFit {
    pub kind: FitKind,
    pub window: (f64, f64),
    pub fit: Fit,
}

#[derive(Clone, Debug)]
pub struct NamedSeries {
    pub name: String,
    pub data: SeriesResult,
    pub fit: Option<SeriesFit>,
}

impl NamedSeries {
    fn new(name: impl Into<String>, data: SeriesResult) -> Self {
        NamedSeries { name: name.into(), data, fit: None }
    }

    fn fitted(mut self, kind: FitKind, window: (f64, f64)) -> Result<Self> {
        self.fit = Some(SeriesFit { kind, window, fit: kind.apply(&self.data, window)? });
        Ok(self)
    }
}

/// Output of one run: series in file order and `key = value` results.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub series: Vec<NamedSeries>,
    pub summary: Vec<(String, String)>,
}

impl Report {
    fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn series(&self, name: &str) -> Option<&NamedSeries> {
        self.series.iter().find(|s| s.name == name)
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.kind {
        Kind::Xx => xx(cfg),
        Kind::Chern => chern(cfg),
        Kind::Metal => metal(cfg),
        Kind::Rs => random_singlets(cfg),
        Kind::Toric | Kind::Double => topological(cfg),
        Kind::Mera => mera(cfg),
        Kind::OracleCheck => oracle(cfg),
    }
}

fn window(cfg: &ExperimentConfig, default: (f64, f64)) -> (f64, f64) {
    cfg.fit.window.map_or(default, |[a, b]| (a, b))
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Separation `r` whose cross ratio is closest to `eta` in log scale.
fn separation_for_eta(geom: ChainGeometry, la: usize, eta: f64) -> Result<usize> {
    (1..geom.l.saturating_sub(2 * la))
        .map(|r| Ok((r, interval_cross_ratio(geom, Interval::new(0, la), Interval::new(la + r, la))?.eta)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| (a.1.ln() - eta.ln()).abs().total_cmp(&(b.1.ln() - eta.ln()).abs()))
        .map(|(r, _)| r)
        .ok_or_else(|| Error::InvalidParameter(format!("no interval separation on {} sites", geom.l)))
}

fn xx(cfg: &ExperimentConfig) -> Result<Report> {
    let m = &cfg.model;
    let n_f = match (m.n_f, m.mu) {
        (_, Some(mu)) => filling_from_mu(mu)?,
        (Some(nf), None) => nf,
        (None, None) => 0.5,
    };
    let sizes = cfg.xx_sizes();
    let divisor = m.length_divisor.unwrap_or(32);
    let win = window(cfg, (0.01, 0.3));
    let mut report = Report::default();
    report.put("filling", fmt(n_f));
    let mut all = Vec::new();
    for (i, &l) in sizes.iter().enumerate() {
        let geom = ChainGeometry::new(l)?;
        let la = l / divisor;
        let rs: Vec<usize> = match &m.etas {
            Some(etas) => etas.iter().map(|&e| separation_for_eta(geom, la, e)).collect::<Result<_>>()?,
            None => cfg.separations().iter().map(|r| r * l / sizes[0]).collect(),
        };
        let points = rs
            .iter()
            .map(|&r| {
                let (a, b) = (Interval::new(0, la), Interval::new(la + r, la));
                Ok((interval_cross_ratio(geom, a, b)?.eta, interval_regions(geom, a, b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let state = xx_chain_state(geom, n_f)?;
        let data = mie_series(&state, &points, cfg.sampling.n_samples, cfg.sampling.seed.wrapping_add((i as u64) << 32))?;
        let s = NamedSeries::new(format!("xx_L{l}"), data).fitted(FitKind::Power, win)?;
        let f = s.fit.as_ref().unwrap().fit;
        report.put(format!("alpha.L{l}"), fmt(f.slope));
        report.put(format!("alpha_stderr.L{l}"), fmt(f.stderr));
        all.push(s.data.clone());
        report.series.push(s);
    }
    if all.len() > 1 {
        let score = data_collapse(&all)?;
        let threshold = cfg.fit.collapse_threshold.unwrap_or(0.05);
        report.put("collapse_score", fmt(score));
        report.put("collapse_threshold", fmt(threshold));
        report.put("collapse_pass", score < threshold);
    }
    Ok(report)
}

fn ring_series(cfg: &ExperimentConfig, geom: &CylinderGeometry, state: &mieflow_core::gaussian::GaussianState, orbitals: usize) -> Result<SeriesResult> {
    let width = cfg.model.width.unwrap_or(2);
    let points = cfg
        .separations()
        .iter()
        .map(|&r| Ok((r as f64, ring_regions(geom, orbitals, width, r)?)))
        .collect::<Result<Vec<_>>>()?;
    mie_series(state, &points, cfg.sampling.n_samples, cfg.sampling.seed)
}

fn chern(cfg: &ExperimentConfig) -> Result<Report> {
    let m = &cfg.model;
    let params = ChernParams::new(m.t1.unwrap_or(1.0), m.t2.unwrap_or(0.1), m.v.unwrap_or(0.0));
    let l = m.l.unwrap_or(24);
    let geom = CylinderGeometry::cylinder(l)?.with_x_twist(m.twist.unwrap_or(PI));
    let mut report = Report::default();
    report.put("chern_number", chern_number(params, 24)?);
    let (state, gap) = chern_state(&geom, params)?;
    report.put("gap", fmt(gap));
    let data = ring_series(cfg, &geom, &state, 2)?;
    // r = 1 rings nearly touch; beyond L/2 they approach the open edges
    let win = window(cfg, (2.0, (l / 2) as f64));
    let s = NamedSeries::new("chern", data).fitted(FitKind::Power, win)?;
    let p = s.fit.as_ref().unwrap().fit;
    report.put("power_slope", fmt(p.slope));
    report.put("power_stderr", fmt(p.stderr));
    report.put("power_r_squared", fmt(p.r_squared));
    let e = exp_fit(&s.data, win)?;
    report.put("exp_decay_length", fmt(-1.0 / e.slope));
    report.put("exp_r_squared", fmt(e.r_squared));
    report.series.push(s);
    Ok(report)
}

fn metal(cfg: &ExperimentConfig) -> Result<Report> {
    let m = &cfg.model;
    let l = m.l.unwrap_or(32);
    let geom = CylinderGeometry::cylinder(l)?.with_x_twist(m.twist.unwrap_or(0.0));
    let (state, shell) = metal_state(&geom)?;
    let mut report = Report::default();
    report.put("fermi_shell_degeneracy", shell);
    let data = ring_series(cfg, &geom, &state, 1)?;
    let s = NamedSeries::new("metal", data).fitted(FitKind::Power, window(cfg, (2.0, (l / 2) as f64)))?;
    let f = s.fit.as_ref().unwrap().fit;
    report.put("power_slope", fmt(f.slope));
    report.put("power_stderr", fmt(f.stderr));
    report.put("power_r_squared", fmt(f.r_squared));
    // η ∼ r^{-2} at large separation
    report.put("alpha_eta", fmt(-f.slope / 2.0));
    report.series.push(s);
    Ok(report)
}

fn random_singlets(cfg: &ExperimentConfig) -> Result<Report> {
    let m = &cfg.model;
    let l = m.l.unwrap_or(1024);
    let len = m.interval.unwrap_or(2);
    let n = cfg.sampling.n_samples;
    let seed = cfg.sampling.seed;
    let rs = cfg.separations();
    let series = singlet_series(l, len, &rs, n, seed)?;
    let mut report = Report::default();
    let mii = NamedSeries::new("rs_mii_bell", series.mii_bell).fitted(FitKind::Power, window(cfg, (16.0, 256.0)))?;
    let f = mii.fit.as_ref().unwrap().fit;
    report.put("mii_bell_slope", fmt(f.slope));
    report.put("mii_bell_stderr", fmt(f.stderr));
    report.put("max_abs_mii_z", fmt(series.max_abs_mii_z));
    report.series.push(mii);
    report.series.push(NamedSeries::new("rs_mie_bell", series.mie_bell));
    report.series.push(NamedSeries::new("rs_mii_z", series.mii_z));
    let tail = cfg.fit.tail_window.map_or((4.0, l as f64 / 8.0), |[a, b]| (a, b));
    let pairs = NamedSeries::new("rs_pair_density", pair_distance_distribution(l, n, seed.wrapping_add(1))?).fitted(FitKind::Power, tail)?;
    let f = pairs.fit.as_ref().unwrap().fit;
    report.put("pair_tail_slope", fmt(f.slope));
    report.put("pair_tail_stderr", fmt(f.stderr));
    report.series.push(pairs);
    let r1 = rs.iter().copied().find(|r| r % 2 == 0).unwrap_or(2);
    let single = singlet_series(l, 1, &[r1], n.min(10_000), seed.wrapping_add(2))?;
    let (_, e) = &single.mie_bell.points[0];
    report.put("single_site_bell_mie", fmt(e.mean));
    report.put("single_site_bell_stderr", fmt(e.stderr));
    Ok(report)
}

fn topological(cfg: &ExperimentConfig) -> Result<Report> {
    let m = &cfg.model;
    let l1 = m.l.unwrap_or(6);
    let l2 = m.l2.unwrap_or(l1);
    let primes = cfg.primes();
    let [u, v] = m.labels.unwrap_or([0, 0]);
    let label = match m.state.unwrap_or(StateLabel::StringNet) {
        StateLabel::StringNet => GroundStateLabel::StringNet(u, v),
        StateLabel::Mes => GroundStateLabel::Mes(u, v),
    };
    let basis = match m.basis.unwrap_or(BasisName::X) {
        BasisName::X => Basis::X,
        BasisName::Z => Basis::Z,
    };
    let windows: Vec<(usize, usize)> = cfg.windows().iter().map(|w| (w[0], w[1])).collect();
    let seeds: Vec<u64> = (0..cfg.sampling.outcome_seeds as u64).map(|k| cfg.sampling.seed.wrapping_add(k)).collect();
    let r = stacked_mie(l1, l2, &primes, label, &windows, basis, &seeds)?;
    let order: u32 = primes.iter().product();
    let mut report = Report::default();
    report.put("mie", fmt(r.value));
    report.put("log_group_order", fmt((order as f64).ln()));
    report.put("outcome_independent", r.outcome_independent);
    report.put("pure_split", r.pure_split);
    let est = EstimatorResult::from_samples(r.per_seed, false)?;
    report.series.push(NamedSeries::new(cfg.kind.name(), SeriesResult::new(vec![(order as f64, est)])?));
    Ok(report)
}

/// Mean and positional spread over all translations of a placement.
fn over_translations(l: usize, f: impl Fn(usize) -> Result<f64>) -> Result<EstimatorResult> {
    EstimatorResult::from_samples((0..l).map(f).collect::<Result<Vec<_>>>()?, false)
}

/// Interval layouts `(start_a, len_a, start_b, len_b)` with dyadic lengths
/// at dyadic positions; `symmetric` gives `len_a = len_b`.
pub fn aligned_placements(l: usize) -> Vec<(usize, usize, usize, usize, bool)> {
    let mut out = Vec::new();
    let mut la = 1;
    while la <= l / 4 {
        let mut lb = la;
        while lb <= l / 4 {
            for sa in (0..l / 2).step_by(la.max(lb) * 2) {
                out.push((sa, la, sa + l / 2, lb, la == lb));
            }
            lb *= 2;
        }
        la *= 2;
    }
    out
}

/// Counts placements where the free-boundary cut equals `min(S_A, S_B)`.
pub fn mie_matches_min_entropy(graph: &MeraGraph, placements: &[(usize, usize, usize, usize, bool)]) -> Result<(usize, usize)> {
    let l = graph.num_legs();
    let mut hits = 0;
    for &(sa, la, sb, lb, _) in placements {
        let r = mie_large_d(graph, &leg_interval(l, sa, la), &leg_interval(l, sb, lb), 1.0)?;
        hits += usize::from(r.cut == r.s_a.min(r.s_b));
    }
    Ok((hits, placements.len()))
}

fn mera(cfg: &ExperimentConfig) -> Result<Report> {
    let log_d = cfg.model.log_d.unwrap_or(1.0);
    let sizes = cfg.model.sizes.clone().unwrap_or_else(|| vec![64, 128]);
    let mut report = Report::default();
    for &l in &sizes {
        let g = build_mera(l)?;
        let mut pts = Vec::new();
        let mut la = 2;
        while la <= l / 2 {
            let e = over_translations(l, |s| Ok(log_d * mieflow_core::mera::entropy_cut(&g, &leg_interval(l, s, la))? as f64))?;
            pts.push((la as f64, e));
            la *= 2;
        }
        let s = NamedSeries::new(format!("mera_entropy_L{l}"), SeriesResult::new(pts)?).fitted(FitKind::SemiLog, (0.0, f64::INFINITY))?;
        report.put(format!("entropy_slope.L{l}"), fmt(s.fit.as_ref().unwrap().fit.slope));
        report.series.push(s);

        let la = l / 8;
        let mut pts = Vec::new();
        let (mut below, mut above) = (0usize, 0usize);
        let (mut n_below, mut n_above) = (0usize, 0usize);
        for gap in 1..=(l - 2 * la) / 2 {
            let x = [0.0, la as f64, (la + gap) as f64, (2 * la + gap) as f64];
            let eta_t = cross_ratio(x, Some(l as f64))?.eta_tilde;
            let per_start = (0..l).map(|s| mutual_info_large_d(&g, s, la, gap, la, log_d)).collect::<Result<Vec<_>>>()?;
            let connected = per_start.iter().filter(|(_, c)| c.f_connected < c.f_a + c.f_b).count();
            let e = EstimatorResult::from_samples(per_start.iter().map(|(mi, _)| *mi).collect(), false)?;
            if eta_t < 1.0 {
                n_below += l;
                below += l - connected;
            } else {
                n_above += l;
                above += connected;
            }
            pts.push((eta_t, e));
        }
        report.put(format!("mi_disconnected_fraction_below.L{l}"), fmt(below as f64 / n_below.max(1) as f64));
        report.put(format!("mi_connected_fraction_above.L{l}"), fmt(above as f64 / n_above.max(1) as f64));
        report.series.push(NamedSeries::new(format!("mera_mutual_info_L{l}"), SeriesResult::new(pts)?));

        let placements = aligned_placements(l);
        for (tag, sym) in [("symmetric", true), ("asymmetric", false)] {
            let chosen: Vec<_> = placements.iter().copied().filter(|p| p.4 == sym).collect();
            let (hits, total) = mie_matches_min_entropy(&g, &chosen)?;
            report.put(format!("mie_equals_min_entropy.{tag}.L{l}"), format!("{hits}/{total}"));
        }
    }
    if sizes.len() > 1 {
        let slopes: Vec<f64> = report.series.iter().filter(|s| s.name.starts_with("mera_entropy")).map(|s| s.fit.as_ref().unwrap().fit.slope).collect();
        report.put("entropy_slope_ratio", fmt(slopes[slopes.len() - 1] / slopes[0]));
    }
    Ok(report)
}

fn oracle(cfg: &ExperimentConfig) -> Result<Report> {
    let instances = cfg.model.instances.unwrap_or(20);
    let max_modes = cfg.model.max_modes.unwrap_or(10);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sampling.seed);
    let mut mc = Vec::new();
    let mut exact = Vec::new();
    let mut within = 0;
    let mut max_p: f64 = 0.0;
    for k in 0..instances {
        let inst = random_oracle_instance(max_modes, &mut rng)?;
        let c = oracle_check(&inst, cfg.sampling.n_samples, cfg.sampling.seed.wrapping_add(k as u64 + 1))?;
        within += usize::from(c.within(4.0));
        max_p = max_p.max(c.max_probability_error);
        exact.push(((k + 1) as f64, EstimatorResult::exact(c.exact_mie)));
        mc.push(((k + 1) as f64, c.monte_carlo));
    }
    let mut report = Report::default();
    report.put("within_4_sigma", format!("{within}/{instances}"));
    report.put("max_probability_error", fmt(max_p));
    report.series.push(NamedSeries::new("oracle_monte_carlo", SeriesResult::new(mc)?));
    report.series.push(NamedSeries::new("oracle_exact", SeriesResult::new(exact)?));
    Ok(report)
}
