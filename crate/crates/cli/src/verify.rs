//! Fast invariant suites for `mieflow verify`.

use mieflow_core::estimator::{oracle_check, random_oracle_instance, singlet_series};
use mieflow_core::lattice::{xx_closed_form_deviation, ChainGeometry};
use mieflow_core::mera::{
    boundary_cut_table, build_mera, entropy_cut, leg_interval, mie_large_d, min_cut, min_cut_from_table, CutQuery, LegBc,
};
use mieflow_core::stabilizer::{stacked_mie, Basis, GroundStateLabel};
use mieflow_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::LN_2;

pub const SUITES: [&str; 4] = ["oracle", "topo", "rs", "mera"];

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: String,
    pub expected: String,
    pub pass: bool,
}

fn check(name: &str, value: impl ToString, expected: impl ToString, pass: bool) -> Check {
    Check { name: name.into(), value: value.to_string(), expected: expected.to_string(), pass }
}

pub fn run_suite(suite: &str) -> Result<Vec<Check>> {
    match suite {
        "oracle" => oracle(),
        "topo" => topo(),
        "rs" => rs(),
        "mera" => mera(),
        _ => Err(Error::InvalidParameter(format!("unknown suite '{suite}', expected one of {}", SUITES.join(", ")))),
    }
}

pub fn render(checks: &[Check]) -> String {
    let w = checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
    let v = checks.iter().map(|c| c.value.len()).max().unwrap_or(0).max(5);
    let mut out = format!("{:<w$}  {:<v$}  {:<24}  result\n", "check", "value", "expected");
    for c in checks {
        out += &format!("{:<w$}  {:<v$}  {:<24}  {}\n", c.name, c.value, c.expected, if c.pass { "PASS" } else { "FAIL" });
    }
    out
}

fn oracle() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut within, mut max_p) = (0, 0.0f64);
    const N: usize = 20;
    for k in 0..N {
        let inst = random_oracle_instance(10, &mut rng)?;
        let c = oracle_check(&inst, 4000, 100 + k as u64)?;
        within += usize::from(c.within(4.0));
        max_p = max_p.max(c.max_probability_error);
    }
    let dev = xx_closed_form_deviation(ChainGeometry::new(64)?, 0.5)?;
    Ok(vec![
        check("gaussian MIE vs dense enumeration", format!("{within}/{N}"), "all within 4 stderr", within == N),
        check("outcome probabilities vs dense", format!("{max_p:.2e}"), "≤ 1e-10", max_p <= 1e-10),
        check("XX closed form vs momentum filling", format!("{dev:.2e}"), "≤ 1e-10", dev <= 1e-10),
    ])
}

fn topo() -> Result<Vec<Check>> {
    let seeds: Vec<u64> = (0..16).collect();
    let sn = GroundStateLabel::StringNet(0, 0);
    let layout = [(0, 1), (3, 1)];
    let mut out = Vec::new();
    for (name, primes, label, target) in [
        ("toric string-net", vec![2], sn, LN_2),
        ("toric MES", vec![2], GroundStateLabel::Mes(0, 0), 0.0),
        ("D(Z3) string-net", vec![3], sn, 3f64.ln()),
        ("Z2 x Z3 stack", vec![2, 3], sn, 6f64.ln()),
    ] {
        let r = stacked_mie(6, 6, &primes, label, &layout, Basis::X, &seeds)?;
        let ok = (r.value - target).abs() < 1e-9 && r.outcome_independent;
        out.push(check(name, format!("{:.12}", r.value), format!("{target:.12}"), ok));
    }
    let mut values = Vec::new();
    for (l, layout) in [(6, vec![(0, 1), (3, 1)]), (6, vec![(0, 2), (3, 1)]), (8, vec![(1, 1), (5, 3)]), (8, vec![(2, 2), (7, 1)])] {
        let r = stacked_mie(l, l, &[2], sn, &layout, Basis::X, &seeds)?;
        values.push(r.value);
    }
    let spread = values.iter().map(|v| (v - LN_2).abs()).fold(0.0, f64::max);
    out.push(check("annulus deformations", format!("{spread:.2e}"), "max |MIE - ln 2| ≤ 1e-9", spread <= 1e-9));
    Ok(out)
}

fn rs() -> Result<Vec<Check>> {
    let z = singlet_series(256, 2, &[4, 8, 16, 32], 2000, 5)?;
    let single = singlet_series(256, 1, &[2, 8, 32], 2000, 6)?;
    let worst = single.mie_bell.points.iter().map(|(_, r)| (r.mean - LN_2).abs() + r.stderr).fold(0.0, f64::max);
    Ok(vec![
        check("MII_Z on every configuration", format!("{:.2e}", z.max_abs_mii_z), "0", z.max_abs_mii_z == 0.0),
        check("single-site Bell MIE", format!("{worst:.2e}"), "ln 2 exactly", worst < 1e-12),
    ])
}

fn mera() -> Result<Vec<Check>> {
    let g8 = build_mera(8)?;
    let table = boundary_cut_table(&g8)?;
    let mut mismatches = 0;
    for code in 0..3usize.pow(8) {
        let legs: Vec<LegBc> = (0..8).map(|k| [LegBc::Up, LegBc::Down, LegBc::Free][code / 3usize.pow(k) % 3]).collect();
        let q = CutQuery { legs };
        mismatches += usize::from(min_cut(&g8, &q)? != min_cut_from_table(&table, &q));
    }
    let g = build_mera(32)?;
    let mut asym = 0;
    for s in 0..32 {
        for len in 1..16 {
            asym += usize::from(entropy_cut(&g, &leg_interval(32, s, len))? != entropy_cut(&g, &leg_interval(32, s + 16, len))?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0;
    for _ in 0..200 {
        let (la, lb) = (rng.gen_range(1..8), rng.gen_range(1..8));
        let sa = rng.gen_range(0..32);
        let sb = sa + la + rng.gen_range(1..32 - la - lb);
        let r = mie_large_d(&g, &leg_interval(32, sa, la), &leg_interval(32, sb, lb), 1.0)?;
        violations += usize::from(r.cut > r.s_a.min(r.s_b));
    }
    let g64 = build_mera(64)?;
    let s = |len| -> Result<f64> { Ok((0..64).map(|st| entropy_cut(&g64, &leg_interval(64, st, len))).sum::<Result<u32>>()? as f64 / 64.0) };
    let (s4, s16) = (s(4)?, s(16)?);
    Ok(vec![
        check("max-flow vs exhaustive, all L=8 queries", format!("{mismatches} mismatches"), "0", mismatches == 0),
        check("half-ring translation symmetry", format!("{asym} asymmetric"), "0", asym == 0),
        check("MIE ≤ min(S_A, S_B)", format!("{violations} violations"), "0", violations == 0),
        check("S(A) grows with |A|", format!("{s4:.3} → {s16:.3}"), "increasing", s16 > s4),
    ])
}
