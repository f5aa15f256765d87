//! Colony-level behavior: a frozen single-ant trace, the recruitment-off
//! per-capita baseline, and determinism of the scaling fit.

use radar_core::ants::{
    per_capita_scaling, AlphaDistribution, Boundary, Colony, ColonyConfig, FieldParams, SeedPile,
    World,
};

/// Seed abundance linear in colony size, spread over a lattice of small
/// piles around a central nest.
fn dispersed_world(n: usize) -> World {
    let mut cells = Vec::new();
    for x in (1..33).step_by(3) {
        for y in (1..33).step_by(3) {
            if (x, y) != (16, 16) {
                cells.push((x, y));
            }
        }
    }
    let total = 20 * n as u64;
    let base = total / cells.len() as u64;
    let rem = (total % cells.len() as u64) as usize;
    let piles = cells
        .iter()
        .enumerate()
        .map(|(i, &cell)| SeedPile { cell, count: base + u64::from(i < rem) })
        .collect();
    World::new(33, 33, Boundary::Bounded, (16, 16), piles).unwrap()
}

#[test]
fn single_ant_on_tiny_world_collects_at_frozen_tick() {
    // 3x3 bounded world, nest in the corner, one seed next door; the ant
    // walks uniformly (no pheromone anywhere). With this seed it leaves on
    // tick 1, steps onto the pile on tick 2, and delivers on tick 3.
    let world =
        World::new(3, 3, Boundary::Bounded, (0, 0), vec![SeedPile { cell: (1, 0), count: 1 }])
            .unwrap();
    let field = FieldParams::new(0.1, 1.0).unwrap();
    let mut config = ColonyConfig::new(1, AlphaDistribution::Constant(0.0), 0.0, 12345, 500).unwrap();
    config.epsilon = 1.0;
    let mut colony = Colony::new(world, field, config).unwrap();
    while colony.seeds_collected() == 0 && colony.ticks_elapsed() < 500 {
        colony.tick().unwrap();
    }
    assert_eq!(colony.seeds_collected(), 1);
    assert_eq!(colony.ticks_elapsed(), 3);
}

#[test]
fn recruitment_off_baseline_slope_is_flat() {
    // alpha = 0 everywhere: no pheromone response, dispersed seeds; the
    // per-capita rate should carry no size trend
    let field = FieldParams::new(0.02, 1.0).unwrap();
    let fit = per_capita_scaling(
        dispersed_world,
        field,
        |n| ColonyConfig::new(n, AlphaDistribution::Constant(0.0), 0.0, 4000, 2500).unwrap(),
        &[8, 32, 128, 512],
        20,
    )
    .unwrap();
    assert!(fit.slope.abs() <= 0.2, "baseline slope {} drifted", fit.slope);
}

#[test]
fn per_capita_fit_is_deterministic() {
    let field = FieldParams::new(0.02, 1.0).unwrap();
    let run = || {
        per_capita_scaling(
            dispersed_world,
            field,
            |n| ColonyConfig::new(n, AlphaDistribution::Constant(1.0), 0.0, 77, 300).unwrap(),
            &[8, 16, 32],
            20,
        )
        .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
}

#[test]
fn two_point_alpha_mixes_explorers_and_exploiters() {
    let world = dispersed_world(10);
    let field = FieldParams::new(0.05, 1.0).unwrap();
    let config = ColonyConfig::new(
        10,
        AlphaDistribution::TwoPoint { alpha1: 0.0, alpha2: 4.0, fraction: 0.3 },
        0.0,
        5,
        10,
    )
    .unwrap();
    let colony = Colony::new(world, field, config).unwrap();
    let low = colony.ants().iter().filter(|a| a.alpha == 0.0).count();
    let high = colony.ants().iter().filter(|a| a.alpha == 4.0).count();
    assert_eq!((low, high), (3, 7));
}
