use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scaling::{linear_fit, RegressionResult};

use super::{build_graph, DegreePolicy, LatticeGraph, Topology};

/// Outcome of one greedy route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteResult {
    pub hops: usize,
    pub delivered: bool,
    /// True when routing stopped at the hop cap instead of the target.
    pub path_length_bound_hit: bool,
}

/// Greedy routing: at each step move to the neighbor (local or long-range)
/// closest to the target in lattice distance, ties to the smallest node id.
///
/// Local links always offer strict progress, so delivery is guaranteed
/// whenever the hop cap is at least the lattice diameter.
pub fn greedy_route(
    graph: &LatticeGraph,
    source: usize,
    target: usize,
    hop_cap: usize,
) -> Result<RouteResult> {
    route_inner(graph, source, target, hop_cap, None)
}

/// [`greedy_route`] that also records the visited nodes (source included).
pub fn greedy_route_traced(
    graph: &LatticeGraph,
    source: usize,
    target: usize,
    hop_cap: usize,
) -> Result<(RouteResult, Vec<usize>)> {
    let mut path = Vec::new();
    let result = route_inner(graph, source, target, hop_cap, Some(&mut path))?;
    Ok((result, path))
}

fn route_inner(
    graph: &LatticeGraph,
    source: usize,
    target: usize,
    hop_cap: usize,
    mut path: Option<&mut Vec<usize>>,
) -> Result<RouteResult> {
    let n = graph.n();
    if source >= n || target >= n {
        return Err(Error::Domain(format!(
            "route endpoints ({source}, {target}) outside graph of {n} nodes"
        )));
    }
    let mut current = source;
    let mut hops = 0usize;
    if let Some(p) = path.as_deref_mut() {
        p.push(current);
    }
    while current != target && hops < hop_cap {
        let current_distance = graph.lattice_distance(current, target);
        let mut best = current;
        let mut best_distance = usize::MAX;
        graph.for_each_neighbor(current, |v| {
            let d = graph.lattice_distance(v, target);
            if d < best_distance || (d == best_distance && v < best) {
                best = v;
                best_distance = d;
            }
        });
        debug_assert!(best_distance < current_distance, "greedy step must make progress");
        current = best;
        hops += 1;
        if let Some(p) = path.as_deref_mut() {
            p.push(current);
        }
    }
    let delivered = current == target;
    Ok(RouteResult { hops, delivered, path_length_bound_hit: !delivered })
}

/// Mean greedy hop count at one network size.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeStats {
    pub n: usize,
    pub k: usize,
    pub mean_hops: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SizeStats {
    pub fn csv_header() -> &'static str {
        "n,policy,k,mean_hops,stderr,trials,seed"
    }

    pub fn to_csv(&self, policy: &DegreePolicy) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n, policy, self.k, self.mean_hops, self.stderr, self.trials, self.seed
        )
    }
}

/// Mean hops per size plus fits of mean hops against `ln n` and `(ln n)²`.
#[derive(Debug, Clone)]
pub struct DeliveryScaling {
    pub policy: DegreePolicy,
    pub per_size: Vec<SizeStats>,
    pub fit_ln: RegressionResult<f64>,
    pub fit_ln_squared: RegressionResult<f64>,
}

/// Build a fresh graph per size, average greedy hops over random
/// source-target pairs, and fit the two candidate hop-growth models.
pub fn delivery_scaling(
    topology: Topology,
    sizes: &[usize],
    policy: &DegreePolicy,
    r_exponent: f64,
    trials: usize,
    rng_seed: u64,
) -> Result<DeliveryScaling> {
    let mut distinct = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 distinct sizes for a slope, got {}",
            distinct.len()
        )));
    }
    if trials < 200 {
        return Err(Error::Config(format!("need at least 200 trials per size, got {trials}")));
    }

    let mut per_size = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        let build_seed = rng_seed.wrapping_add(2 * i as u64);
        let pair_seed = rng_seed.wrapping_add(2 * i as u64 + 1);
        let graph = build_graph(topology, n, policy, r_exponent, build_seed)?;
        let stats = mean_hops(&graph, trials, pair_seed)?;
        per_size.push(SizeStats { n, k: graph.k(), seed: build_seed, ..stats });
    }

    let pts_ln: Vec<(f64, f64)> =
        per_size.iter().map(|s| ((s.n as f64).ln(), s.mean_hops)).collect();
    let pts_ln2: Vec<(f64, f64)> =
        per_size.iter().map(|s| ((s.n as f64).ln().powi(2), s.mean_hops)).collect();
    Ok(DeliveryScaling {
        policy: *policy,
        per_size,
        fit_ln: linear_fit(&pts_ln)?,
        fit_ln_squared: linear_fit(&pts_ln2)?,
    })
}

/// Average greedy hops over `trials` random distinct source-target pairs.
pub fn mean_hops(graph: &LatticeGraph, trials: usize, pair_seed: u64) -> Result<SizeStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(pair_seed);
    let n = graph.n();
    let cap = graph.diameter();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let source = rng.random_range(0..n);
        let mut target = rng.random_range(0..n);
        while target == source {
            target = rng.random_range(0..n);
        }
        let result = greedy_route(graph, source, target, cap)?;
        debug_assert!(result.delivered);
        let h = result.hops as f64;
        sum += h;
        sum_sq += h * h;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = (sum_sq / t - mean * mean).max(0.0);
    Ok(SizeStats {
        n,
        k: graph.k(),
        mean_hops: mean,
        stderr: (var / t).sqrt(),
        trials,
        seed: pair_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_route_is_zero_hops() {
        let g = LatticeGraph::bare(Topology::Ring, 16).unwrap();
        let r = greedy_route(&g, 5, 5, 100).unwrap();
        assert_eq!(r.hops, 0);
        assert!(r.delivered);
        assert!(!r.path_length_bound_hit);
    }

    #[test]
    fn adjacent_nodes_one_hop() {
        let g = LatticeGraph::bare(Topology::Ring, 16).unwrap();
        let r = greedy_route(&g, 3, 4, 100).unwrap();
        assert_eq!(r.hops, 1);
        assert!(r.delivered);
    }

    #[test]
    fn bare_ring_hops_equal_lattice_distance() {
        let g = LatticeGraph::bare(Topology::Ring, 31).unwrap();
        for (s, t) in [(0, 15), (3, 30), (7, 8), (20, 5)] {
            let r = greedy_route(&g, s, t, g.diameter()).unwrap();
            assert!(r.delivered);
            assert_eq!(r.hops, g.lattice_distance(s, t));
        }
    }

    #[test]
    fn hop_cap_cuts_route_short() {
        let g = LatticeGraph::bare(Topology::Ring, 64).unwrap();
        let r = greedy_route(&g, 0, 30, 5).unwrap();
        assert_eq!(r.hops, 5);
        assert!(!r.delivered);
        assert!(r.path_length_bound_hit);
    }

    #[test]
    fn invalid_endpoints_rejected() {
        let g = LatticeGraph::bare(Topology::Ring, 16).unwrap();
        assert!(matches!(greedy_route(&g, 0, 99, 10), Err(Error::Domain(_))));
        assert!(matches!(greedy_route(&g, 99, 0, 10), Err(Error::Domain(_))));
    }

    #[test]
    fn distance_strictly_decreases_along_the_path() {
        let g = build_graph(Topology::Torus, 256, &DegreePolicy::LogSquared(1.0), 2.0, 13).unwrap();
        let (r, path) = greedy_route_traced(&g, 3, 200, g.diameter()).unwrap();
        assert!(r.delivered);
        for w in path.windows(2) {
            assert!(g.lattice_distance(w[1], 200) < g.lattice_distance(w[0], 200));
        }
    }

    #[test]
    fn long_links_speed_up_delivery() {
        let g_dense =
            build_graph(Topology::Torus, 1024, &DegreePolicy::LogSquared(1.0), 2.0, 21).unwrap();
        let g_bare = LatticeGraph::bare(Topology::Torus, 1024).unwrap();
        let dense = mean_hops(&g_dense, 400, 77).unwrap();
        let bare = mean_hops(&g_bare, 400, 77).unwrap();
        assert!(dense.mean_hops < bare.mean_hops);
    }

    #[test]
    fn scaling_rejects_degenerate_inputs() {
        let p = DegreePolicy::Constant(1);
        assert!(matches!(
            delivery_scaling(Topology::Ring, &[1024], &p, 1.0, 400, 0),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(
            delivery_scaling(Topology::Ring, &[64, 128, 256], &p, 1.0, 10, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn scaling_reports_per_size_stats() {
        let p = DegreePolicy::LogN(1.0);
        let out = delivery_scaling(Topology::Ring, &[64, 128, 256, 512], &p, 1.0, 200, 3).unwrap();
        assert_eq!(out.per_size.len(), 4);
        for s in &out.per_size {
            assert!(s.mean_hops > 0.0);
            assert!(s.stderr > 0.0);
        }
        assert!(out.fit_ln.slope > 0.0);
    }
}
