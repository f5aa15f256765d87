//! Central-place foraging with pheromone recruitment.
//!
//! Ants leave a nest, wander a grid world, pick up seeds, and carry them
//! home while laying pheromone; the trail biases later ants toward the
//! discovered pile. Exploitation strength is the per-ant exponent `alpha`
//! applied to neighboring pheromone levels.

mod colony;

pub use colony::{
    per_capita_scaling, run_colony, run_colony_traced, step_ant, Colony, ForagingStats,
    StepContext, StepEvent, StepParams, TraceRow,
};

use crate::error::{Error, Result};

/// Grid coordinate (column, row).
pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Opposite edges are identified.
    Torus,
    /// Edges clip the neighborhood.
    Bounded,
}

/// A pile of seeds at a fixed cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPile {
    pub cell: Cell,
    pub count: u64,
}

/// The foraging arena: dimensions, nest location, and seed piles.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub width: usize,
    pub height: usize,
    pub boundary: Boundary,
    pub nest: Cell,
    pub piles: Vec<SeedPile>,
}

impl World {
    pub fn new(
        width: usize,
        height: usize,
        boundary: Boundary,
        nest: Cell,
        piles: Vec<SeedPile>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!("world must be non-empty, got {width}x{height}")));
        }
        let in_bounds = |c: Cell| c.0 < width && c.1 < height;
        if !in_bounds(nest) {
            return Err(Error::Config(format!("nest {nest:?} outside {width}x{height} world")));
        }
        for pile in &piles {
            if !in_bounds(pile.cell) {
                return Err(Error::Config(format!("pile at {:?} outside world", pile.cell)));
            }
        }
        let mut cells: Vec<Cell> = piles.iter().map(|p| p.cell).collect();
        cells.sort_unstable();
        cells.dedup();
        if cells.len() != piles.len() {
            return Err(Error::Config("duplicate pile cells".into()));
        }
        Ok(Self { width, height, boundary, nest, piles })
    }

    pub fn total_seeds(&self) -> u64 {
        self.piles.iter().map(|p| p.count).sum()
    }

    /// 4-neighborhood of a cell, in fixed order (east, west, south, north).
    /// Bounded worlds drop off-grid entries.
    pub fn neighbors(&self, cell: Cell, out: &mut Vec<Cell>) {
        out.clear();
        let (x, y) = (cell.0 as isize, cell.1 as isize);
        let (w, h) = (self.width as isize, self.height as isize);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            match self.boundary {
                Boundary::Torus => {
                    out.push((
                        ((nx % w + w) % w) as usize,
                        ((ny % h + h) % h) as usize,
                    ));
                }
                Boundary::Bounded => {
                    if nx >= 0 && nx < w && ny >= 0 && ny < h {
                        out.push((nx as usize, ny as usize));
                    }
                }
            }
        }
    }

    /// One deterministic step along the shortest Manhattan path toward the
    /// nest: x displacement is reduced first, then y; on a torus the shorter
    /// wrap direction wins, with exact ties resolved positively.
    pub fn step_toward_nest(&self, from: Cell) -> Cell {
        let dx = self.axis_displacement(from.0, self.nest.0, self.width);
        if dx != 0 {
            let w = self.width as isize;
            let nx = ((from.0 as isize + dx.signum()) % w + w) % w;
            return (nx as usize, from.1);
        }
        let dy = self.axis_displacement(from.1, self.nest.1, self.height);
        if dy != 0 {
            let h = self.height as isize;
            let ny = ((from.1 as isize + dy.signum()) % h + h) % h;
            return (from.0, ny as usize);
        }
        from
    }

    fn axis_displacement(&self, from: usize, to: usize, extent: usize) -> isize {
        let raw = to as isize - from as isize;
        match self.boundary {
            Boundary::Bounded => raw,
            Boundary::Torus => {
                let e = extent as isize;
                let mut d = ((raw % e) + e) % e;
                if 2 * d > e {
                    d -= e;
                }
                d
            }
        }
    }
}

/// Pheromone dynamics parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    /// Fraction of pheromone lost per tick, in `[0, 1]`.
    pub decay_lambda: f64,
    /// Amount deposited per traversed cell.
    pub deposit_q: f64,
}

impl FieldParams {
    pub fn new(decay_lambda: f64, deposit_q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&decay_lambda) {
            return Err(Error::Config(format!("decay fraction must lie in [0, 1], got {decay_lambda}")));
        }
        if !(deposit_q > 0.0 && deposit_q.is_finite()) {
            return Err(Error::Config(format!("deposit amount must be positive, got {deposit_q}")));
        }
        Ok(Self { decay_lambda, deposit_q })
    }
}

/// Non-negative pheromone intensity over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneField {
    width: usize,
    height: usize,
    tau: Vec<f64>,
    params: FieldParams,
}

impl PheromoneField {
    pub fn new(width: usize, height: usize, params: FieldParams) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!("field must be non-empty, got {width}x{height}")));
        }
        Ok(Self { width, height, tau: vec![0.0; width * height], params })
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    fn index(&self, cell: Cell) -> Option<usize> {
        (cell.0 < self.width && cell.1 < self.height).then(|| cell.1 * self.width + cell.0)
    }

    pub fn tau(&self, cell: Cell) -> f64 {
        self.index(cell).map(|i| self.tau[i]).unwrap_or(0.0)
    }

    /// Multiply every cell by `1 − λ`.
    pub fn decay(&mut self) {
        let keep = 1.0 - self.params.decay_lambda;
        for t in &mut self.tau {
            *t *= keep;
        }
    }

    /// Add the deposit amount to one in-bounds cell.
    pub fn deposit_cell(&mut self, cell: Cell) -> Result<()> {
        let q = self.params.deposit_q;
        match self.index(cell) {
            Some(i) => {
                self.tau[i] += q;
                Ok(())
            }
            None => Err(Error::Domain(format!(
                "deposit outside {}x{} field at {cell:?}",
                self.width, self.height
            ))),
        }
    }

    /// Deposit once per path entry; a cell listed twice receives `2q`.
    pub fn deposit_path(&mut self, path: &[Cell]) -> Result<()> {
        for &cell in path {
            self.deposit_cell(cell)?;
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.tau.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.tau.iter().cloned().fold(0.0, f64::max)
    }
}

/// Transition distribution over neighboring cells: `p_j = τ_j^α / Σ_k τ_k^α`
/// with the `0^0 = 1` convention; a pheromone-free neighborhood is uniform.
pub fn transition_probs(tau_neighbors: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if tau_neighbors.is_empty() {
        return Err(Error::Domain("empty neighborhood".into()));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("pheromone exponent must be non-negative, got {alpha}")));
    }
    for &t in tau_neighbors {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("pheromone level must be non-negative, got {t}")));
        }
    }
    let n = tau_neighbors.len();
    if alpha == 0.0 {
        return Ok(vec![1.0 / n as f64; n]);
    }
    // Normalize by the maximum so large exponents cannot overflow.
    let max = tau_neighbors.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(vec![1.0 / n as f64; n]);
    }
    let weights: Vec<f64> = tau_neighbors.iter().map(|&t| (t / max).powf(alpha)).collect();
    let sum: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / sum).collect())
}

/// Threshold gate on the recent forager return rate.
pub fn activation_gate(recent_return_rate: f64, theta: f64) -> bool {
    recent_return_rate >= theta
}

/// Behavioral state of one ant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntState {
    AtNest,
    Exploring,
    FollowingTrail,
    ReturningWithFood,
}

/// One forager.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ant {
    pub state: AntState,
    pub position: Cell,
    /// Pheromone-sensitivity exponent; 0 ignores trails entirely.
    pub alpha: f64,
    pub carrying: bool,
    /// Pile the carried seed came from (drives per-pile tallies).
    pub carried_from: Option<usize>,
}

impl Ant {
    pub fn at_nest(nest: Cell, alpha: f64) -> Self {
        Self { state: AntState::AtNest, position: nest, alpha, carrying: false, carried_from: None }
    }
}

/// How ants draw their pheromone-sensitivity exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaDistribution {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    /// The first `fraction` of the colony gets `alpha1`, the rest `alpha2`.
    TwoPoint { alpha1: f64, alpha2: f64, fraction: f64 },
}

impl AlphaDistribution {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        match *self {
            AlphaDistribution::Constant(a) if ok(a) => Ok(()),
            AlphaDistribution::Uniform { lo, hi } if ok(lo) && ok(hi) && lo <= hi => Ok(()),
            AlphaDistribution::TwoPoint { alpha1, alpha2, fraction }
                if ok(alpha1) && ok(alpha2) && (0.0..=1.0).contains(&fraction) =>
            {
                Ok(())
            }
            _ => Err(Error::Config(format!("invalid alpha distribution {self:?}"))),
        }
    }
}

/// Colony-level run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ColonyConfig {
    pub n_ants: usize,
    pub alpha: AlphaDistribution,
    /// Return-rate threshold gating departures from the nest.
    pub activation_threshold: f64,
    pub rng_seed: u64,
    pub max_ticks: u64,
    /// Departure probability per tick regardless of the gate; bootstraps
    /// foraging before any returns exist.
    pub base_leave_prob: f64,
    /// Uniform component mixed into pheromone-guided movement.
    pub epsilon: f64,
    /// Trailing window (ticks) for the return rate.
    pub return_window: u64,
}

impl ColonyConfig {
    pub fn new(
        n_ants: usize,
        alpha: AlphaDistribution,
        activation_threshold: f64,
        rng_seed: u64,
        max_ticks: u64,
    ) -> Result<Self> {
        let cfg = Self {
            n_ants,
            alpha,
            activation_threshold,
            rng_seed,
            max_ticks,
            base_leave_prob: 0.01,
            epsilon: 0.1,
            return_window: 50,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ants == 0 {
            return Err(Error::Config("colony needs at least one ant".into()));
        }
        self.alpha.validate()?;
        if !(self.activation_threshold >= 0.0 && self.activation_threshold.is_finite()) {
            return Err(Error::Config(format!(
                "activation threshold must be non-negative, got {}",
                self.activation_threshold
            )));
        }
        if self.max_ticks == 0 {
            return Err(Error::Config("max_ticks must be positive".into()));
        }
        for (name, v) in [("base_leave_prob", self.base_leave_prob), ("epsilon", self.epsilon)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.return_window == 0 {
            return Err(Error::Config("return window must be positive".into()));
        }
        Ok(())
    }
}
