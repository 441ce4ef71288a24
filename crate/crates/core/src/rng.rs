//! Counter-based pseudo-random numbers.
//!
//! Every random draw in the toolkit derives from an explicit seed through
//! splitmix64, so campaigns are reproducible bit-for-bit regardless of
//! evaluation order: a stream is addressed by (seed, label, counter) and
//! never shares mutable state.

/// splitmix64 step.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stable 64-bit label hash (FNV-1a).
pub fn label_hash(label: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in label.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Deterministic stream of uniforms addressed by seed and label.
#[derive(Clone, Debug)]
pub struct Stream {
    state: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64, label: &str) -> Self {
        Stream {
            state: mix(seed ^ label_hash(label)),
            counter: 0,
        }
    }

    /// Substream for an indexed item (instance, sample, ...).
    pub fn substream(&self, index: u64) -> Stream {
        Stream {
            state: mix(self.state ^ mix(index.wrapping_add(0xa076_1d64_78bd_642f))),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.state.wrapping_add(self.counter.wrapping_mul(0x9e3779b97f4a7c15)))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Log-uniform in `[lo, hi)`, both positive.
    pub fn log_range(&mut self, lo: f64, hi: f64) -> f64 {
        (self.range(lo.ln(), hi.ln())).exp()
    }

    /// Uniform over `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n.max(1)
    }
}
