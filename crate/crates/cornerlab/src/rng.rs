//! Counter-based, splittable random numbers.
//!
//! Every draw is a pure function of `(seed, stream, counter)`, so any value
//! in any run can be regenerated in isolation: sample `k` of job `j` always
//! uses the key `(master_seed, j, k)` no matter how many workers are
//! running, and growing an index range never changes values already
//! generated for smaller indices.

/// Odd constants from the splitmix64/murmur3 family.
const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const MIX_A: u64 = 0xbf58_476d_1ce4_e5b9;
const MIX_B: u64 = 0x94d0_49bb_1331_11eb;
const STREAM_SALT: u64 = 0xd6e8_feb8_6659_fd93;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_A);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_B);
    z ^ (z >> 31)
}

/// A `(seed, stream)` pair naming one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngKey {
    seed: u64,
    stream: u64,
}

impl RngKey {
    pub fn new(seed: u64) -> Self {
        RngKey { seed, stream: 0 }
    }

    /// Derive the key of sub-stream `j`. Splitting is free and stateless.
    pub fn substream(self, j: u64) -> Self {
        RngKey {
            seed: self.seed,
            stream: mix64(self.stream ^ j.wrapping_mul(STREAM_SALT).wrapping_add(GAMMA)),
        }
    }

    /// The `k`-th 64-bit word of this stream.
    #[inline]
    pub fn word(self, k: u64) -> u64 {
        mix64(
            self.seed
                .wrapping_add(self.stream)
                .wrapping_add(k.wrapping_mul(GAMMA)),
        )
        .wrapping_add(mix64(self.stream ^ k))
    }

    /// Uniform in `[0, 1)` from counter `k`.
    #[inline]
    pub fn unit(self, k: u64) -> f64 {
        // 53 high bits -> [0,1)
        (self.word(k) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn rng(self) -> CounterRng {
        CounterRng {
            key: self,
            counter: 0,
        }
    }
}

/// Sequential view over a key: draws `word(0), word(1), ...`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: RngKey,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, job: u64) -> Self {
        RngKey::new(seed).substream(job).rng()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let w = self.key.word(self.counter);
        self.counter += 1;
        w
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Uniform in `[0, n)` by rejection-free multiply-shift; the bias is
    /// below 2^-64 for the `n` used here.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}
