use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One stored interaction, possibly aggregated over an n-step window:
/// `reward` carries the discounted in-window sum and `discount` the
/// factor for bootstrapping from `next_state` (zero after genuine goal
/// termination; step-cap truncation still bootstraps).
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Box<[f64]>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Box<[f64]>,
    pub discount: f64,
}

/// Fixed-capacity ring buffer of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    buf: Vec<Transition>,
    capacity: usize,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            buf: Vec::with_capacity(capacity.min(1 << 16)),
            capacity,
            next: 0,
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.buf.len() < self.capacity {
            self.buf.push(t);
        } else {
            self.buf[self.next] = t;
            self.next = (self.next + 1) % self.capacity;
        }
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.buf[i]
    }

    /// Uniform minibatch indices (with replacement).
    pub fn sample_indices(&self, batch: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        (0..batch).map(|_| rng.random_range(0..self.buf.len())).collect()
    }
}
