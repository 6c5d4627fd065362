use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A worker's victim stream: uniform over the other workers. The draw
/// sequence depends only on (seed, worker, number of draws).
#[derive(Debug, Clone)]
pub struct VictimPicker {
    worker: usize,
    workers: usize,
    rng: ChaCha8Rng,
}

impl VictimPicker {
    pub fn new(seed: u64, worker: usize, workers: usize) -> Self {
        assert!(worker < workers, "worker {worker} out of range");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(worker as u64);
        VictimPicker { worker, workers, rng }
    }

    /// Next victim; never the worker itself. Needs at least two workers.
    pub fn next_victim(&mut self) -> usize {
        assert!(self.workers >= 2, "victim selection needs two workers");
        let v = self.rng.random_range(0..self.workers - 1);
        if v >= self.worker {
            v + 1
        } else {
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_workers_always_pick_the_other() {
        let mut p = VictimPicker::new(7, 1, 2);
        assert!((0..100).all(|_| p.next_victim() == 0));
    }

    #[test]
    fn sequences_are_reproducible_and_per_worker() {
        let draw = |w| {
            let mut p = VictimPicker::new(42, w, 3);
            (0..32).map(|_| p.next_victim()).collect::<Vec<_>>()
        };
        assert_eq!(draw(0), draw(0));
        assert!(draw(0).iter().all(|&v| v != 0));
        assert!(draw(2).iter().all(|&v| v != 2));
    }
}
