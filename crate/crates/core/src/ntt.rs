//! Exact self-convolution of 0/1 sequences by a number-theoretic transform
//! over the prime 998244353 = 119·2²³ + 1.
//!
//! A coefficient of `p²` is at most `deg p + 1`, far below the modulus, so
//! the residues returned by the transform are the integer coefficients.

const MOD: u64 = 998_244_353;
const GENERATOR: u64 = 3;
/// Largest power-of-two transform length supported by the modulus.
pub const MAX_LOG_LEN: u32 = 23;
/// How far `2N+1` may overshoot a power of two before we stop folding the
/// overflow back by direct summation and double the transform instead.
const WRAP_SLACK: usize = 512;

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    base %= MOD;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % MOD;
        }
        base = base * base % MOD;
        exp >>= 1;
    }
    acc
}

fn transform(values: &mut [u64], inverse: bool) {
    let n = values.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            values.swap(i, j);
        }
    }

    let mut roots = Vec::with_capacity(n / 2);
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let mut step = pow_mod(GENERATOR, (MOD - 1) / len as u64);
        if inverse {
            step = pow_mod(step, MOD - 2);
        }
        roots.clear();
        let mut w = 1;
        for _ in 0..half {
            roots.push(w);
            w = w * step % MOD;
        }
        for block in values.chunks_exact_mut(len) {
            let (lo, hi) = block.split_at_mut(half);
            for ((u, v), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(&roots) {
                let a = *u;
                let b = *v * w % MOD;
                let sum = a + b;
                *u = if sum >= MOD { sum - MOD } else { sum };
                *v = if a >= b { a - b } else { a + MOD - b };
            }
        }
        len <<= 1;
    }

    if inverse {
        let n_inv = pow_mod(n as u64, MOD - 2);
        for v in values.iter_mut() {
            *v = *v * n_inv % MOD;
        }
    }
}

/// Transform length used for a sequence of `n` terms, or `None` when the
/// modulus cannot host it.
fn plan(n: usize) -> Option<usize> {
    let full = 2 * n - 1;
    let len = full.next_power_of_two();
    let folded = len / 2;
    let chosen = if folded >= n && full - folded <= WRAP_SLACK {
        folded
    } else {
        len
    };
    (chosen <= 1 << MAX_LOG_LEN).then_some(chosen)
}

/// Whether a 0/1 sequence of `n` terms can be squared by [`square_bits`].
pub fn supports(n: usize) -> bool {
    n > 0 && plan(n).is_some()
}

/// Square of the 0/1 sequence `bits` (index j holds the coefficient of xʲ),
/// returned as its `2·len − 1` integer coefficients.
///
/// Panics when `!supports(bits.len())`.
pub fn square_bits(bits: &[u8]) -> Vec<u64> {
    let n = bits.len();
    let size = plan(n).expect("sequence too long for the NTT modulus");
    let full = 2 * n - 1;

    let mut buf = vec![0u64; size];
    for (slot, &b) in buf.iter_mut().zip(bits) {
        *slot = u64::from(b);
    }
    transform(&mut buf, false);
    for v in buf.iter_mut() {
        *v = *v * *v % MOD;
    }
    transform(&mut buf, true);

    let mut out = buf;
    if size < full {
        // Cyclic wrap: coefficient k ≥ size landed on k − size. Compute the
        // few tail coefficients directly and subtract them back out.
        out.resize(full, 0);
        let last = n - 1;
        for k in size..full {
            let tail: u64 = ((k - last)..=last)
                .map(|j| u64::from(bits[j] & bits[k - j]))
                .sum();
            out[k - size] -= tail;
            out[k] = tail;
        }
    } else {
        out.truncate(full);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(bits: &[u8]) -> Vec<u64> {
        let mut out = vec![0u64; 2 * bits.len() - 1];
        for (i, &a) in bits.iter().enumerate() {
            for (j, &b) in bits.iter().enumerate() {
                out[i + j] += u64::from(a * b);
            }
        }
        out
    }

    #[test]
    fn small_squares() {
        assert_eq!(square_bits(&[1]), vec![1]);
        assert_eq!(square_bits(&[1, 1]), vec![1, 2, 1]);
        assert_eq!(square_bits(&[1, 0, 0, 1]), vec![1, 0, 0, 2, 0, 0, 1]);
    }

    #[test]
    fn folded_plan_matches_naive() {
        // n = 2^k + 1 gives 2n − 1 = 2^{k+1} + 1, one past a power of two.
        for &n in &[513usize, 600, 1025, 1100] {
            let size = plan(n).unwrap();
            let bits: Vec<u8> = (0..n).map(|i| ((i * 7 + i / 3) % 3 == 0) as u8).collect();
            let mut bits = bits;
            bits[n - 1] = 1;
            bits[0] = 1;
            assert_eq!(square_bits(&bits), naive(&bits), "n = {n}, size = {size}");
        }
        assert_eq!(plan(1025), Some(2048));
        assert_eq!(plan(1400), Some(4096));
    }

    #[test]
    fn all_ones_is_tent() {
        let n = 4097;
        let sq = square_bits(&vec![1u8; n]);
        for (k, &c) in sq.iter().enumerate() {
            assert_eq!(c as usize, (k + 1).min(2 * n - 1 - k));
        }
    }
}
