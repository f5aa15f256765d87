//! Kleinberg-style lattice with long-range contacts and greedy routing.
//!
//! Nodes sit on a ring or 2-D torus with local lattice links plus `k(n)`
//! long-range contacts drawn with probability proportional to
//! `d(u,v)^(−r)`. Densifying the out-degree as `c(ln n)²` is what turns
//! greedy delivery from polylogarithmic to logarithmic.

mod route;

pub use route::{
    delivery_scaling, greedy_route, greedy_route_traced, mean_hops, DeliveryScaling, RouteResult,
    SizeStats,
};

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Ring,
    /// Square torus; node count must be a perfect square.
    Torus,
}

/// Out-degree policy for long-range contacts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegreePolicy {
    Constant(usize),
    /// `⌈c·ln n⌉`
    LogN(f64),
    /// `⌈c·(ln n)²⌉`
    LogSquared(f64),
}

impl DegreePolicy {
    /// Long links per node at size `n`.
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let k = match *self {
            DegreePolicy::Constant(k) => k,
            DegreePolicy::LogN(c) => {
                if !(c > 0.0) {
                    return Err(Error::Config(format!("degree coefficient must be positive, got {c}")));
                }
                (c * (n as f64).ln()).ceil() as usize
            }
            DegreePolicy::LogSquared(c) => {
                if !(c > 0.0) {
                    return Err(Error::Config(format!("degree coefficient must be positive, got {c}")));
                }
                (c * (n as f64).ln().powi(2)).ceil() as usize
            }
        };
        if k == 0 {
            return Err(Error::Config("degree policy resolved to zero long links".into()));
        }
        Ok(k)
    }
}

impl fmt::Display for DegreePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreePolicy::Constant(k) => write!(f, "constant({k})"),
            DegreePolicy::LogN(c) => write!(f, "ln({c})"),
            DegreePolicy::LogSquared(c) => write!(f, "ln2({c})"),
        }
    }
}

/// Lattice plus per-node long-range contacts.
#[derive(Debug, Clone)]
pub struct LatticeGraph {
    topology: Topology,
    n: usize,
    side: usize,
    k: usize,
    r_exponent: f64,
    long_links: Vec<Vec<u32>>,
}

impl LatticeGraph {
    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Long links per node (0 for a bare lattice).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r_exponent(&self) -> f64 {
        self.r_exponent
    }

    pub fn long_links(&self, u: usize) -> &[u32] {
        &self.long_links[u]
    }

    /// Lattice (shortest-path) distance ignoring long links.
    pub fn lattice_distance(&self, u: usize, v: usize) -> usize {
        match self.topology {
            Topology::Ring => ring_distance(u, v, self.n),
            Topology::Torus => {
                let l = self.side;
                axis_distance(u % l, v % l, l) + axis_distance(u / l, v / l, l)
            }
        }
    }

    /// Largest lattice distance between any two nodes.
    pub fn diameter(&self) -> usize {
        match self.topology {
            Topology::Ring => self.n / 2,
            Topology::Torus => 2 * (self.side / 2),
        }
    }

    /// Visit local lattice neighbors then long-range contacts.
    pub fn for_each_neighbor(&self, u: usize, mut f: impl FnMut(usize)) {
        match self.topology {
            Topology::Ring => {
                f((u + 1) % self.n);
                f((u + self.n - 1) % self.n);
            }
            Topology::Torus => {
                let l = self.side;
                let (x, y) = (u % l, u / l);
                f(y * l + (x + 1) % l);
                f(y * l + (x + l - 1) % l);
                f(((y + 1) % l) * l + x);
                f(((y + l - 1) % l) * l + x);
            }
        }
        for &v in &self.long_links[u] {
            f(v as usize);
        }
    }

    /// Lattice without long-range contacts.
    pub fn bare(topology: Topology, n: usize) -> Result<Self> {
        let side = validate_size(topology, n)?;
        Ok(Self { topology, n, side, k: 0, r_exponent: 0.0, long_links: vec![Vec::new(); n] })
    }
}

fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

fn axis_distance(a: usize, b: usize, l: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(l - d)
}

fn validate_size(topology: Topology, n: usize) -> Result<usize> {
    if n < 9 {
        return Err(Error::Config(format!("need at least 9 nodes, got {n}")));
    }
    match topology {
        Topology::Ring => Ok(n),
        Topology::Torus => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(Error::Config(format!("torus size must be a perfect square, got {n}")));
            }
            Ok(side)
        }
    }
}

/// Distance-biased sampler of long-range targets.
///
/// Both lattices are vertex-transitive, so one table of per-distance
/// weights `count(d)·d^(−r)` serves every source node; a draw picks a
/// distance from that table, then a node uniformly at that distance.
pub struct LongRangeSampler {
    topology: Topology,
    n: usize,
    side: usize,
    /// Cumulative weight over distances `1..=d_max`.
    dist_cdf: Vec<f64>,
    /// Torus only: per-distance cumulative weight over the x-axis share.
    axis_cdf: Vec<Vec<f64>>,
}

impl LongRangeSampler {
    pub fn new(topology: Topology, n: usize, r_exponent: f64) -> Result<Self> {
        if !(r_exponent >= 0.0 && r_exponent.is_finite()) {
            return Err(Error::Config(format!(
                "distance-decay exponent must be non-negative, got {r_exponent}"
            )));
        }
        let side = validate_size(topology, n)?;
        let (counts, axis_cdf) = match topology {
            Topology::Ring => {
                let d_max = n / 2;
                let mut counts = vec![0.0; d_max + 1];
                for (d, c) in counts.iter_mut().enumerate().skip(1) {
                    *c = if n % 2 == 0 && d == d_max { 1.0 } else { 2.0 };
                }
                (counts, Vec::new())
            }
            Topology::Torus => {
                let k_axis = side / 2;
                let axis_count = |t: usize| -> f64 {
                    if t == 0 {
                        1.0
                    } else if 2 * t == side {
                        1.0
                    } else {
                        2.0
                    }
                };
                let d_max = 2 * k_axis;
                let mut counts = vec![0.0; d_max + 1];
                let mut axis_cdf = vec![Vec::new(); d_max + 1];
                for d in 1..=d_max {
                    let t_lo = d.saturating_sub(k_axis);
                    let t_hi = d.min(k_axis);
                    let mut acc = 0.0;
                    let mut cdf = Vec::with_capacity(t_hi - t_lo + 1);
                    for t in t_lo..=t_hi {
                        acc += axis_count(t) * axis_count(d - t);
                        cdf.push(acc);
                    }
                    counts[d] = acc;
                    axis_cdf[d] = cdf;
                }
                (counts, axis_cdf)
            }
        };

        let mut dist_cdf = vec![0.0; counts.len()];
        let mut acc = 0.0;
        for (d, &m) in counts.iter().enumerate().skip(1) {
            acc += m * (d as f64).powf(-r_exponent);
            dist_cdf[d] = acc;
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::Numerical("degenerate long-link weight table".into()));
        }
        Ok(Self { topology, n, side, dist_cdf, axis_cdf })
    }

    /// Draw one long-range target for `from` (never `from` itself).
    pub fn sample(&self, from: usize, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.dist_cdf.last().unwrap();
        let u = rng.random::<f64>() * total;
        let d = match self.dist_cdf.partition_point(|&c| c <= u) {
            p if p >= self.dist_cdf.len() => self.dist_cdf.len() - 1,
            p => p.max(1),
        };
        match self.topology {
            Topology::Ring => {
                let two_sided = !(self.n % 2 == 0 && d == self.n / 2);
                if two_sided && rng.random::<bool>() {
                    (from + self.n - d) % self.n
                } else {
                    (from + d) % self.n
                }
            }
            Topology::Torus => {
                let l = self.side;
                let k_axis = l / 2;
                let cdf = &self.axis_cdf[d];
                let t_lo = d.saturating_sub(k_axis);
                let v = rng.random::<f64>() * *cdf.last().unwrap();
                let ti = cdf.partition_point(|&c| c <= v).min(cdf.len() - 1);
                let t = t_lo + ti;
                let s = d - t;
                let dx = self.signed_offset(t, rng);
                let dy = self.signed_offset(s, rng);
                let x = ((from % l) as isize + dx).rem_euclid(l as isize) as usize;
                let y = ((from / l) as isize + dy).rem_euclid(l as isize) as usize;
                y * l + x
            }
        }
    }

    fn signed_offset(&self, t: usize, rng: &mut ChaCha8Rng) -> isize {
        if t == 0 || 2 * t == self.side {
            t as isize
        } else if rng.random::<bool>() {
            -(t as isize)
        } else {
            t as isize
        }
    }
}

/// Build a lattice with `k(n)` distinct long-range contacts per node,
/// sampled with probability proportional to `d(u,v)^(−r)`; duplicate draws
/// are resampled so the out-degree is exact. Deterministic per seed.
pub fn build_graph(
    topology: Topology,
    n: usize,
    policy: &DegreePolicy,
    r_exponent: f64,
    rng_seed: u64,
) -> Result<LatticeGraph> {
    let side = validate_size(topology, n)?;
    let k = policy.resolve(n)?;
    if k > n - 2 {
        return Err(Error::Config(format!("cannot place {k} distinct long links among {n} nodes")));
    }
    let sampler = LongRangeSampler::new(topology, n, r_exponent)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut long_links = Vec::with_capacity(n);
    for u in 0..n {
        let mut links: Vec<u32> = Vec::with_capacity(k);
        let mut attempts = 0usize;
        while links.len() < k {
            let v = sampler.sample(u, &mut rng) as u32;
            if !links.contains(&v) {
                links.push(v);
            }
            attempts += 1;
            if attempts > 1000 * k.max(8) {
                return Err(Error::Numerical(format!(
                    "resampling stalled placing {k} distinct links at node {u}"
                )));
            }
        }
        long_links.push(links);
    }
    Ok(LatticeGraph { topology, n, side, k, r_exponent, long_links })
}
