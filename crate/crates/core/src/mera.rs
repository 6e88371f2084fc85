//! Large-bond-dimension limit of random binary MERA: entropies and
//! measurement-induced entanglement as minimal cuts.
//!
//! Cut weights are bond counts; multiply by `log D` for free energies.

use crate::error::{Error, Result};

/// Boundary condition on a boundary leg.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegBc {
    Up,
    Down,
    Free,
}

/// Binary MERA on a ring of `l` legs. Nodes `0..l` are the boundary legs,
/// then disentanglers and isometries layer by layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeraGraph {
    l: usize,
    depth: usize,
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl MeraGraph {
    pub fn num_legs(&self) -> usize {
        self.l
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.num_nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

pub fn build_mera(l: usize) -> Result<MeraGraph> {
    if l < 4 || !l.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("MERA needs L = 2^k ≥ 4, got {l}")));
    }
    let mut num_nodes = l;
    let mut edges = Vec::new();
    let mut open: Vec<usize> = (0..l).collect();
    let mut depth = 0;
    while open.len() > 1 {
        let n = open.len();
        if n >= 4 {
            for j in 0..n / 2 {
                let (s, t) = (2 * j + 1, (2 * j + 2) % n);
                let u = num_nodes;
                num_nodes += 1;
                edges.push((open[s], u));
                edges.push((open[t], u));
                open[s] = u;
                open[t] = u;
            }
        }
        let mut next = Vec::with_capacity(n / 2);
        for j in 0..n / 2 {
            let w = num_nodes;
            num_nodes += 1;
            edges.push((open[2 * j], w));
            edges.push((open[2 * j + 1], w));
            next.push(w);
        }
        open = next;
        depth += 1;
    }
    let g = MeraGraph { l, depth, num_nodes, edges };
    debug_assert!(g.is_connected());
    Ok(g)
}

/// Boundary conditions for every leg.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutQuery {
    pub legs: Vec<LegBc>,
}

impl CutQuery {
    /// Legs in `down` fixed down, legs in `free` free, all others up.
    pub fn new(l: usize, down: &[usize], free: &[usize]) -> Result<Self> {
        let mut legs = vec![LegBc::Up; l];
        for (set, bc) in [(down, LegBc::Down), (free, LegBc::Free)] {
            for &s in set {
                if s >= l {
                    return Err(Error::InvalidRegion(format!("leg {s} outside 0..{l}")));
                }
                if legs[s] != LegBc::Up {
                    return Err(Error::InvalidRegion(format!("leg {s} assigned twice")));
                }
                legs[s] = bc;
            }
        }
        Ok(CutQuery { legs })
    }
}

/// Legs `start, …, start+len-1` modulo `l`.
pub fn leg_interval(l: usize, start: usize, len: usize) -> Vec<usize> {
    (start..start + len).map(|s| s % l).collect()
}

struct FlowEdge {
    to: usize,
    cap: u32,
}

/// Dinic maximum flow.
struct Dinic {
    adj: Vec<Vec<usize>>,
    edges: Vec<FlowEdge>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic { adj: vec![Vec::new(); n], edges: Vec::new() }
    }

    fn add(&mut self, u: usize, v: usize, cap_uv: u32, cap_vu: u32) {
        self.adj[u].push(self.edges.len());
        self.edges.push(FlowEdge { to: v, cap: cap_uv });
        self.adj[v].push(self.edges.len());
        self.edges.push(FlowEdge { to: u, cap: cap_vu });
    }

    fn levels(&self, s: usize) -> Vec<i64> {
        let mut level = vec![-1; self.adj.len()];
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if self.edges[e].cap > 0 && level[v] < 0 {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn augment(&mut self, u: usize, t: usize, pushed: u32, level: &[i64], next: &mut [usize]) -> u32 {
        if u == t {
            return pushed;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let v = self.edges[e].to;
            if self.edges[e].cap > 0 && level[v] == level[u] + 1 {
                let got = self.augment(v, t, pushed.min(self.edges[e].cap), level, next);
                if got > 0 {
                    self.edges[e].cap -= got;
                    self.edges[e ^ 1].cap += got;
                    return got;
                }
            }
            next[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u32 {
        let mut flow = 0;
        loop {
            let level = self.levels(s);
            if level[t] < 0 {
                return flow;
            }
            let mut next = vec![0; self.adj.len()];
            loop {
                let f = self.augment(s, t, u32::MAX, &level, &mut next);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
    }
}

/// Minimal number of bonds separating up legs from down legs; free legs
/// join either side at no cost.
pub fn min_cut(graph: &MeraGraph, query: &CutQuery) -> Result<u32> {
    if query.legs.len() != graph.l {
        return Err(Error::InvalidRegion(format!("query has {} legs, graph {}", query.legs.len(), graph.l)));
    }
    let has = |bc| query.legs.contains(&bc);
    if !has(LegBc::Up) || !has(LegBc::Down) {
        return Ok(0);
    }
    let (s, t) = (graph.num_nodes, graph.num_nodes + 1);
    let mut flow = Dinic::new(graph.num_nodes + 2);
    for &(u, v) in &graph.edges {
        flow.add(u, v, 1, 1);
    }
    let inf = graph.edges.len() as u32 + 1;
    for (leg, bc) in query.legs.iter().enumerate() {
        match bc {
            LegBc::Down => flow.add(s, leg, inf, 0),
            LegBc::Up => flow.add(leg, t, inf, 0),
            LegBc::Free => {}
        }
    }
    Ok(flow.max_flow(s, t))
}

/// Exhaustive minimum over spin assignments of all unfixed nodes.
pub fn min_cut_brute_force(graph: &MeraGraph, query: &CutQuery) -> Result<u32> {
    let unfixed: Vec<usize> = (0..graph.num_nodes).filter(|&v| v >= graph.l || query.legs[v] == LegBc::Free).collect();
    if unfixed.len() > 24 {
        return Err(Error::DimensionOverflow { dim: unfixed.len(), limit: 24 });
    }
    let mut spin: Vec<bool> = (0..graph.num_nodes).map(|v| v < graph.l && query.legs[v] == LegBc::Down).collect();
    let mut best = u32::MAX;
    for mask in 0u64..1 << unfixed.len() {
        for (k, &v) in unfixed.iter().enumerate() {
            spin[v] = mask >> k & 1 == 1;
        }
        let cut = graph.edges.iter().filter(|&&(u, v)| spin[u] != spin[v]).count() as u32;
        best = best.min(cut);
    }
    Ok(best)
}

/// For every boundary spin pattern (bit `s` set = leg `s` down), the fewest
/// cut bonds over all interior assignments.
pub fn boundary_cut_table(graph: &MeraGraph) -> Result<Vec<u32>> {
    if graph.num_nodes > 24 {
        return Err(Error::DimensionOverflow { dim: graph.num_nodes, limit: 24 });
    }
    let mut table = vec![u32::MAX; 1 << graph.l];
    for mask in 0u64..1 << graph.num_nodes {
        let cut = graph.edges.iter().filter(|&&(u, v)| (mask >> u ^ mask >> v) & 1 == 1).count() as u32;
        let legs = (mask & ((1 << graph.l) - 1)) as usize;
        table[legs] = table[legs].min(cut);
    }
    Ok(table)
}

/// Cut weight from a [`boundary_cut_table`]: free legs take either spin.
pub fn min_cut_from_table(table: &[u32], query: &CutQuery) -> u32 {
    let mut down = 0usize;
    let mut free = Vec::new();
    for (s, bc) in query.legs.iter().enumerate() {
        match bc {
            LegBc::Down => down |= 1 << s,
            LegBc::Free => free.push(s),
            LegBc::Up => {}
        }
    }
    let mut best = u32::MAX;
    for sub in 0usize..1 << free.len() {
        let mut legs = down;
        for (k, &s) in free.iter().enumerate() {
            legs |= (sub >> k & 1) << s;
        }
        best = best.min(table[legs]);
    }
    best
}

/// Bond count of the minimal cut around `region` with everything else up.
pub fn entropy_cut(graph: &MeraGraph, region: &[usize]) -> Result<u32> {
    min_cut(graph, &CutQuery::new(graph.l, region, &[])?)
}

/// Free energies entering the mutual information, in units of `log D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MutualInfoCuts {
    pub f_a: u32,
    pub f_b: u32,
    /// Configuration whose domain walls join `A` and `B`: cuts around
    /// `[x1, x4)` and around the gap `[x2, x3)`.
    pub f_connected: u32,
}

/// `I(A,B) = F_A + F_B + log(e^{-F_A-F_B} + e^{-F_AB})` with `F_AB` the
/// connected configuration, for `A = [a, a+la)` and `B = [a+la+gap, …+lb)`.
pub fn mutual_info_large_d(graph: &MeraGraph, a_start: usize, la: usize, gap: usize, lb: usize, log_d: f64) -> Result<(f64, MutualInfoCuts)> {
    let l = graph.l;
    if la == 0 || lb == 0 || gap == 0 || la + gap + lb >= l {
        return Err(Error::InvalidRegion(format!("intervals {la}+{gap}+{lb} do not fit disjointly on {l} legs")));
    }
    let a = leg_interval(l, a_start, la);
    let b = leg_interval(l, a_start + la + gap, lb);
    let span = leg_interval(l, a_start, la + gap + lb);
    let between = leg_interval(l, a_start + la, gap);
    let cuts = MutualInfoCuts {
        f_a: entropy_cut(graph, &a)?,
        f_b: entropy_cut(graph, &b)?,
        f_connected: entropy_cut(graph, &span)? + entropy_cut(graph, &between)?,
    };
    let x = log_d * (cuts.f_a as f64 + cuts.f_b as f64 - cuts.f_connected as f64);
    // ln(1 + e^x)
    let mi = if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    Ok((mi, cuts))
}

/// Post-measurement entanglement at large `D`: `A` down, `B` up, `M` free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MieCut {
    pub mie: f64,
    pub cut: u32,
    pub s_a: u32,
    pub s_b: u32,
}

pub fn mie_large_d(graph: &MeraGraph, a: &[usize], b: &[usize], log_d: f64) -> Result<MieCut> {
    let l = graph.l;
    let mut owner = vec![0u8; l];
    for &s in a.iter().chain(b) {
        if s >= l || owner[s] != 0 {
            return Err(Error::InvalidRegion(format!("A and B must be disjoint legs of 0..{l}")));
        }
        owner[s] = 1;
    }
    let m: Vec<usize> = (0..l).filter(|&s| owner[s] == 0).collect();
    let cut = min_cut(graph, &CutQuery::new(l, a, &m)?)?;
    Ok(MieCut { mie: log_d * cut as f64, cut, s_a: entropy_cut(graph, a)?, s_b: entropy_cut(graph, b)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn construction() {
        let g = build_mera(4).unwrap();
        assert_eq!(g.depth(), 2);
        assert_eq!(g.edges().len(), 10);
        let g = build_mera(8).unwrap();
        assert_eq!(g.depth(), 3);
        assert!(g.is_connected());
        assert!(build_mera(12).is_err());
        assert!(build_mera(2).is_err());
    }

    #[test]
    fn trivial_cuts() {
        let g = build_mera(8).unwrap();
        let all: Vec<usize> = (0..8).collect();
        assert_eq!(min_cut(&g, &CutQuery::new(8, &all, &[]).unwrap()).unwrap(), 0);
        assert_eq!(min_cut(&g, &CutQuery::new(8, &[], &[]).unwrap()).unwrap(), 0);
        assert_eq!(entropy_cut(&g, &[3]).unwrap(), 1);
    }

    #[test]
    fn max_flow_matches_brute_force() {
        let g = build_mera(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let legs: Vec<LegBc> = (0..8).map(|_| [LegBc::Up, LegBc::Down, LegBc::Free][rng.gen_range(0..3)]).collect();
            let q = CutQuery { legs };
            assert_eq!(min_cut(&g, &q).unwrap(), min_cut_brute_force(&g, &q).unwrap(), "{:?}", q.legs);
        }
    }

    #[test]
    fn every_query_at_l4_matches_table() {
        assert!(boundary_cut_table(&build_mera(8).unwrap()).is_ok());
        let g = build_mera(4).unwrap();
        let table = boundary_cut_table(&g).unwrap();
        for code in 0..81usize {
            let legs: Vec<LegBc> = (0..4).map(|k| [LegBc::Up, LegBc::Down, LegBc::Free][code / 3usize.pow(k) % 3]).collect();
            let q = CutQuery { legs };
            assert_eq!(min_cut(&g, &q).unwrap(), min_cut_from_table(&table, &q));
            assert_eq!(min_cut_brute_force(&g, &q).unwrap(), min_cut_from_table(&table, &q));
        }
    }

    #[test]
    fn freeing_legs_never_increases_cut() {
        let g = build_mera(16).unwrap();
        let a = leg_interval(16, 2, 5);
        let base = entropy_cut(&g, &a).unwrap();
        let mut free = Vec::new();
        let mut last = base;
        for s in [7, 8, 1, 0, 9] {
            free.push(s);
            let c = min_cut(&g, &CutQuery::new(16, &a, &free).unwrap()).unwrap();
            assert!(c <= last);
            last = c;
        }
    }

    #[test]
    fn half_translation_symmetry() {
        let g = build_mera(16).unwrap();
        for start in 0..16 {
            for len in 1..8 {
                let a = entropy_cut(&g, &leg_interval(16, start, len)).unwrap();
                let b = entropy_cut(&g, &leg_interval(16, start + 8, len)).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn equal_free_energies_give_log_two() {
        let g = build_mera(32).unwrap();
        let (mi, cuts) = mutual_info_large_d(&g, 0, 2, 12, 2, 3.0).unwrap();
        assert!(cuts.f_connected >= cuts.f_a + cuts.f_b);
        if cuts.f_connected == cuts.f_a + cuts.f_b {
            assert!((mi - std::f64::consts::LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn mie_bounded_by_entropies() {
        let g = build_mera(32).unwrap();
        for (sa, la, sb, lb) in [(0, 8, 16, 8), (3, 4, 14, 12), (5, 2, 20, 6)] {
            let r = mie_large_d(&g, &leg_interval(32, sa, la), &leg_interval(32, sb, lb), 1.0).unwrap();
            assert!(r.cut <= r.s_a.min(r.s_b));
        }
    }
}
