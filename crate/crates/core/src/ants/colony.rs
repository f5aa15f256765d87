use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scaling::{loglog_fit, RegressionResult};

use super::{
    activation_gate, transition_probs, AlphaDistribution, Ant, AntState, ColonyConfig,
    FieldParams, PheromoneField, World,
};

/// Run summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ForagingStats {
    pub seeds_collected: u64,
    /// Seeds per ant per tick over the whole run.
    pub per_capita_rate: f64,
    pub ticks_transporting: u64,
    pub ticks_searching: u64,
    /// Deliveries attributed to each pile, in world pile order.
    pub seeds_per_pile: Vec<u64>,
}

impl ForagingStats {
    pub fn csv_header() -> &'static str {
        "n_ants,replicate,seeds_collected,per_capita_rate,ticks_transporting,ticks_searching,seed"
    }

    pub fn to_csv(&self, n_ants: usize, replicate: usize, seed: u64) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            n_ants,
            replicate,
            self.seeds_collected,
            self.per_capita_rate,
            self.ticks_transporting,
            self.ticks_searching,
            seed
        )
    }
}

/// Per-tick observables, recorded after the field decays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub tick: u64,
    pub ants_out: usize,
    pub returns: u64,
    pub total_pheromone: f64,
}

impl TraceRow {
    pub fn csv_header() -> &'static str {
        "tick,ants_out,returns,total_pheromone"
    }

    pub fn to_csv(&self) -> String {
        format!("{},{},{},{}", self.tick, self.ants_out, self.returns, self.total_pheromone)
    }
}

/// Movement and gating parameters consumed by [`step_ant`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub epsilon: f64,
    pub base_leave_prob: f64,
    pub activation_threshold: f64,
}

/// What happened during one ant step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    None,
    LeftNest,
    PickedUp { pile: usize },
    Delivered { pile: usize },
}

/// Mutable world state one step operates on.
pub struct StepContext<'a> {
    pub world: &'a World,
    pub field: &'a mut PheromoneField,
    /// Remaining seeds per pile, in world pile order.
    pub pile_counts: &'a mut [u64],
    /// Pile index per cell, `pile_index[y*width + x]`.
    pub pile_index: &'a [Option<u32>],
    /// Forager return rate over the trailing window.
    pub return_rate: f64,
    pub params: StepParams,
}

/// Advance one ant by one tick.
///
/// At the nest an ant departs when the return-rate gate opens or with the
/// base probability. Searching ants move over the 4-neighborhood, mixing an
/// epsilon-uniform component with the pheromone transition rule, and pick up
/// a seed on entering a non-empty pile cell. Loaded ants walk the shortest
/// Manhattan path home, laying pheromone on each cell they enter, and
/// deliver at the nest.
pub fn step_ant(
    ant: &mut Ant,
    ctx: &mut StepContext<'_>,
    rng: &mut ChaCha8Rng,
) -> Result<StepEvent> {
    debug_assert_eq!(ant.carrying, ant.state == AntState::ReturningWithFood);
    match ant.state {
        AntState::AtNest => {
            let gated = activation_gate(ctx.return_rate, ctx.params.activation_threshold);
            let leaves = gated || rng.random::<f64>() < ctx.params.base_leave_prob;
            if leaves {
                ant.state = AntState::Exploring;
                ant.position = ctx.world.nest;
                Ok(StepEvent::LeftNest)
            } else {
                Ok(StepEvent::None)
            }
        }
        AntState::Exploring | AntState::FollowingTrail => {
            let mut neighbors = Vec::with_capacity(4);
            ctx.world.neighbors(ant.position, &mut neighbors);
            if neighbors.is_empty() {
                return Err(Error::Config("cell with no neighbors".into()));
            }
            let uniform_move = rng.random::<f64>() < ctx.params.epsilon;
            let next = if uniform_move {
                neighbors[rng.random_range(0..neighbors.len())]
            } else {
                let taus: Vec<f64> = neighbors.iter().map(|&c| ctx.field.tau(c)).collect();
                let probs = transition_probs(&taus, ant.alpha)?;
                neighbors[sample_index(&probs, rng.random::<f64>())]
            };
            ant.position = next;
            if let Some(pile) = ctx.pile_index[next.1 * ctx.world.width + next.0] {
                let pile = pile as usize;
                if ctx.pile_counts[pile] > 0 {
                    ctx.pile_counts[pile] -= 1;
                    ant.state = AntState::ReturningWithFood;
                    ant.carrying = true;
                    ant.carried_from = Some(pile);
                    return Ok(StepEvent::PickedUp { pile });
                }
            }
            ant.state = if ctx.field.tau(next) > 0.0 {
                AntState::FollowingTrail
            } else {
                AntState::Exploring
            };
            Ok(StepEvent::None)
        }
        AntState::ReturningWithFood => {
            if ant.position != ctx.world.nest {
                let next = ctx.world.step_toward_nest(ant.position);
                ant.position = next;
                ctx.field.deposit_cell(next)?;
            }
            if ant.position == ctx.world.nest {
                let pile = ant.carried_from.take().expect("loaded ant knows its pile");
                ant.state = AntState::AtNest;
                ant.carrying = false;
                Ok(StepEvent::Delivered { pile })
            } else {
                Ok(StepEvent::None)
            }
        }
    }
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Synchronous-tick foraging simulation: every tick all ants step in fixed
/// order, then the field decays once.
pub struct Colony {
    world: World,
    field: PheromoneField,
    config: ColonyConfig,
    ants: Vec<Ant>,
    pile_counts: Vec<u64>,
    pile_index: Vec<Option<u32>>,
    rng: ChaCha8Rng,
    tick: u64,
    recent_returns: VecDeque<u64>,
    seeds_collected: u64,
    seeds_per_pile: Vec<u64>,
    ticks_transporting: u64,
    ticks_searching: u64,
}

impl Colony {
    pub fn new(world: World, field_params: FieldParams, config: ColonyConfig) -> Result<Self> {
        config.validate()?;
        let field = PheromoneField::new(world.width, world.height, field_params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

        let n = config.n_ants;
        let mut ants = Vec::with_capacity(n);
        for i in 0..n {
            let alpha = match config.alpha {
                AlphaDistribution::Constant(a) => a,
                AlphaDistribution::Uniform { lo, hi } => {
                    if lo == hi {
                        lo
                    } else {
                        rng.random_range(lo..hi)
                    }
                }
                AlphaDistribution::TwoPoint { alpha1, alpha2, fraction } => {
                    if (i as f64) < fraction * n as f64 {
                        alpha1
                    } else {
                        alpha2
                    }
                }
            };
            ants.push(Ant::at_nest(world.nest, alpha));
        }

        let mut pile_index = vec![None; world.width * world.height];
        for (i, pile) in world.piles.iter().enumerate() {
            pile_index[pile.cell.1 * world.width + pile.cell.0] = Some(i as u32);
        }
        let pile_counts: Vec<u64> = world.piles.iter().map(|p| p.count).collect();
        let n_piles = world.piles.len();

        Ok(Self {
            world,
            field,
            config,
            ants,
            pile_counts,
            pile_index,
            rng,
            tick: 0,
            recent_returns: VecDeque::new(),
            seeds_collected: 0,
            seeds_per_pile: vec![0; n_piles],
            ticks_transporting: 0,
            ticks_searching: 0,
        })
    }

    /// Returns per tick, averaged over the trailing window.
    pub fn return_rate(&self) -> f64 {
        let sum: u64 = self.recent_returns.iter().sum();
        sum as f64 / self.config.return_window as f64
    }

    /// Advance the whole colony by one tick; returns the trace row.
    pub fn tick(&mut self) -> Result<TraceRow> {
        let rate = self.return_rate();
        let params = StepParams {
            epsilon: self.config.epsilon,
            base_leave_prob: self.config.base_leave_prob,
            activation_threshold: self.config.activation_threshold,
        };
        let mut returns_this_tick = 0u64;
        for i in 0..self.ants.len() {
            let pre_state = self.ants[i].state;
            let mut ctx = StepContext {
                world: &self.world,
                field: &mut self.field,
                pile_counts: &mut self.pile_counts,
                pile_index: &self.pile_index,
                return_rate: rate,
                params,
            };
            let event = step_ant(&mut self.ants[i], &mut ctx, &mut self.rng)?;
            match pre_state {
                AntState::ReturningWithFood => self.ticks_transporting += 1,
                AntState::Exploring | AntState::FollowingTrail => self.ticks_searching += 1,
                AntState::AtNest => {}
            }
            if let StepEvent::Delivered { pile } = event {
                self.seeds_collected += 1;
                self.seeds_per_pile[pile] += 1;
                returns_this_tick += 1;
            }
        }
        self.field.decay();
        self.recent_returns.push_back(returns_this_tick);
        if self.recent_returns.len() as u64 > self.config.return_window {
            self.recent_returns.pop_front();
        }
        self.tick += 1;
        debug_assert!(self.seed_conservation_holds());
        Ok(TraceRow {
            tick: self.tick,
            ants_out: self.ants.iter().filter(|a| a.state != AntState::AtNest).count(),
            returns: returns_this_tick,
            total_pheromone: self.field.total(),
        })
    }

    /// Seeds placed equal seeds remaining plus in transit plus collected.
    pub fn seed_conservation_holds(&self) -> bool {
        let remaining: u64 = self.pile_counts.iter().sum();
        let in_transit = self.ants.iter().filter(|a| a.carrying).count() as u64;
        self.world.total_seeds() == remaining + in_transit + self.seeds_collected
    }

    pub fn run_to_completion(&mut self) -> Result<ForagingStats> {
        while self.tick < self.config.max_ticks {
            self.tick()?;
        }
        Ok(self.stats())
    }

    pub fn stats(&self) -> ForagingStats {
        let denom = (self.config.n_ants as u64 * self.config.max_ticks) as f64;
        ForagingStats {
            seeds_collected: self.seeds_collected,
            per_capita_rate: self.seeds_collected as f64 / denom,
            ticks_transporting: self.ticks_transporting,
            ticks_searching: self.ticks_searching,
            seeds_per_pile: self.seeds_per_pile.clone(),
        }
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn field(&self) -> &PheromoneField {
        &self.field
    }

    pub fn field_mut(&mut self) -> &mut PheromoneField {
        &mut self.field
    }

    pub fn ants(&self) -> &[Ant] {
        &self.ants
    }

    pub fn ants_mut(&mut self) -> &mut [Ant] {
        &mut self.ants
    }

    pub fn pile_counts(&self) -> &[u64] {
        &self.pile_counts
    }

    pub fn seeds_collected(&self) -> u64 {
        self.seeds_collected
    }

    pub fn ticks_elapsed(&self) -> u64 {
        self.tick
    }
}

/// Run a colony for its configured tick budget.
pub fn run_colony(world: World, field: FieldParams, config: ColonyConfig) -> Result<ForagingStats> {
    Colony::new(world, field, config)?.run_to_completion()
}

/// Like [`run_colony`], also returning the per-tick trace.
pub fn run_colony_traced(
    world: World,
    field: FieldParams,
    config: ColonyConfig,
) -> Result<(ForagingStats, Vec<TraceRow>)> {
    let mut colony = Colony::new(world, field, config)?;
    let ticks = colony.config.max_ticks;
    let mut trace = Vec::with_capacity(ticks as usize);
    while colony.tick < ticks {
        trace.push(colony.tick()?);
    }
    Ok((colony.stats(), trace))
}

/// Fit the log-log slope of mean per-capita foraging rate against colony
/// size. The world family is expected to scale seed abundance with size so
/// per-capita resources stay comparable.
pub fn per_capita_scaling<W, C>(
    world_family: W,
    field: FieldParams,
    config_family: C,
    sizes: &[usize],
    replicates: usize,
) -> Result<RegressionResult<f64>>
where
    W: Fn(usize) -> World,
    C: Fn(usize) -> ColonyConfig,
{
    if sizes.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 sizes, got {}", sizes.len())));
    }
    if replicates < 20 {
        return Err(Error::Config(format!("need at least 20 replicates, got {replicates}")));
    }
    let mut points = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut sum = 0.0;
        for rep in 0..replicates {
            let mut config = config_family(n);
            config.rng_seed += rep as u64;
            let stats = run_colony(world_family(n), field, config)?;
            sum += stats.per_capita_rate;
        }
        points.push((n as f64, sum / replicates as f64));
    }
    loglog_fit(&points)
}
