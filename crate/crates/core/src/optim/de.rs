//! Differential evolution, DE/rand/1/bin with synchronous generations.

use alloc::vec::Vec;

use rand::Rng;

use super::{uniform_box, IndexVector, SearchConfig, SearchResult, Tracker};
use crate::error::Result;
use crate::rng::{self, Stream};

/// Minimizes `objective` with differential evolution.
///
/// Population size defaults to `max(15, 4p)`. Members are stored as their
/// projections, so the population lives on the constraint set; mutants are
/// clipped to the box and projected again before evaluation. If the budget
/// runs out inside the initial population the best evaluated member is
/// returned.
pub fn de_minimize<F>(objective: F, config: &SearchConfig) -> Result<SearchResult>
where
    F: FnMut(&IndexVector) -> f64,
{
    config.validate()?;
    let p = config.dimension;
    let np = config.de.population.unwrap_or((4 * p).max(15));
    let f = config.de.differential_weight;
    let cr = config.de.crossover;
    let mut rng = rng::stream(config.seed, Stream::Search);
    let mut tracker = Tracker::new(objective, config.budget);

    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(np);
    let mut scores: Vec<f64> = Vec::with_capacity(np);
    while pop.len() < np && !tracker.exhausted() {
        let raw = uniform_box(&mut rng, p);
        let (proj, value) = tracker.evaluate(&raw);
        pop.push(proj.map_or(raw, IndexVector::into_vec));
        scores.push(value);
    }

    let mut trial = alloc::vec![0.0; p];
    'search: while !tracker.exhausted() {
        let mut next_pop = pop.clone();
        let mut next_scores = scores.clone();
        for i in 0..np {
            if tracker.exhausted() {
                break 'search;
            }
            let (r1, r2, r3) = pick_three(&mut rng, np, i);
            let forced = rng.random_range(0..p);
            for j in 0..p {
                let cross = rng.random::<f64>() < cr || j == forced;
                trial[j] = if cross {
                    (pop[r1][j] + f * (pop[r2][j] - pop[r3][j])).clamp(-1.0, 1.0)
                } else {
                    pop[i][j]
                };
            }
            let (proj, value) = tracker.evaluate(&trial);
            if value <= scores[i] {
                next_pop[i] = proj.map_or_else(|| trial.clone(), IndexVector::into_vec);
                next_scores[i] = value;
            }
        }
        pop = next_pop;
        scores = next_scores;
    }
    tracker.finish()
}

fn pick_three<R: Rng>(rng: &mut R, np: usize, exclude: usize) -> (usize, usize, usize) {
    let mut draw = |taken: &[usize]| loop {
        let c = rng.random_range(0..np);
        if c != exclude && !taken.contains(&c) {
            return c;
        }
    };
    let a = draw(&[]);
    let b = draw(&[a]);
    let c = draw(&[a, b]);
    (a, b, c)
}
