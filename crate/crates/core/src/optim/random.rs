//! Uniform random search baseline.

use super::{uniform_box, IndexVector, SearchConfig, SearchResult, Tracker};
use crate::error::Result;
use crate::rng::{self, Stream};

/// Evaluates `budget` uniform draws from `[−1, 1]^p` and keeps the best.
///
/// Draws come from the same stream TPE uses for its startup trials.
pub fn random_minimize<F>(objective: F, config: &SearchConfig) -> Result<SearchResult>
where
    F: FnMut(&IndexVector) -> f64,
{
    config.validate()?;
    let mut rng = rng::stream(config.seed, Stream::Search);
    let mut tracker = Tracker::new(objective, config.budget);
    while !tracker.exhausted() {
        let raw = uniform_box(&mut rng, config.dimension);
        tracker.evaluate(&raw);
    }
    tracker.finish()
}
