//! The pseudo-random stream behind every randomized choice in the toolkit.
//!
//! The generator is fully specified here so other implementations can
//! reproduce the exact same experiments:
//!
//! * **Seeding.** The 64-bit seed is passed once through SplitMix64
//!   (`z = seed + 0x9E3779B97F4A7C15; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//!   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^= z >> 31`, all wrapping).
//!   A zero result is replaced by `0x9E3779B97F4A7C15`.
//! * **Step.** xorshift64*: `x ^= x >> 12; x ^= x << 25; x ^= x >> 27;`
//!   output `x * 0x2545F4914F6CDD1D` (wrapping).
//! * **Uniform double.** `(next_u64 >> 11) * 2^-53`, in `[0, 1)`.
//! * **Uniform index in `0..n`.** Draw `r`, reject while
//!   `r < (2^64 - n) mod n`, return `r mod n`. No modulo bias.
//! * **Standard normal.** Box–Muller on pairs: `u1 = ((next_u64 >> 11) + 1) * 2^-53`
//!   (in `(0, 1]`), `u2 = (next_u64 >> 11) * 2^-53`, `r = sqrt(-2 ln u1)`;
//!   emit `r cos(2 pi u2)` and cache `r sin(2 pi u2)` for the next call.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRng {
    state: u64,
    spare_normal: Option<f64>,
}

impl ShiftRng {
    pub fn new(seed: u64) -> Self {
        let state = match splitmix64(seed) {
            0 => GOLDEN,
            s => s,
        };
        Self {
            state,
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    /// Uniform draw from `0..n`. Panics if `n == 0`.
    #[inline]
    pub fn uniform_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "uniform_index over an empty range");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return (r % n) as usize;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG_53;
        let u2 = (self.next_u64() >> 11) as f64 * TWO_POW_NEG_53;
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * angle.sin());
        r * angle.cos()
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }
}
