//! Deliberately weak generators used by the PRNG challenges.

/// MT19937 seeded the way CPython's `random.seed(int)` does it, so a
/// solver written against Python's `random` module reproduces the stream.
#[derive(Clone)]
pub struct Mt19937 {
    state: [u32; 624],
    index: usize,
}

impl Mt19937 {
    fn init_genrand(seed: u32) -> Self {
        let mut state = [0u32; 624];
        state[0] = seed;
        for i in 1..624 {
            let prev = state[i - 1];
            state[i] = 1_812_433_253u32
                .wrapping_mul(prev ^ (prev >> 30))
                .wrapping_add(i as u32);
        }
        Mt19937 { state, index: 624 }
    }

    fn init_by_array(key: &[u32]) -> Self {
        let mut mt = Mt19937::init_genrand(19_650_218);
        let s = &mut mt.state;
        let (mut i, mut j) = (1usize, 0usize);
        for _ in 0..624.max(key.len()) {
            let prev = s[i - 1];
            s[i] = (s[i] ^ (prev ^ (prev >> 30)).wrapping_mul(1_664_525))
                .wrapping_add(key[j])
                .wrapping_add(j as u32);
            i += 1;
            j += 1;
            if i >= 624 {
                s[0] = s[623];
                i = 1;
            }
            if j >= key.len() {
                j = 0;
            }
        }
        for _ in 0..623 {
            let prev = s[i - 1];
            s[i] = (s[i] ^ (prev ^ (prev >> 30)).wrapping_mul(1_566_083_941))
                .wrapping_sub(i as u32);
            i += 1;
            if i >= 624 {
                s[0] = s[623];
                i = 1;
            }
        }
        s[0] = 0x8000_0000;
        mt
    }

    /// Equivalent of `random.seed(seed)` for a non-negative integer.
    pub fn python_seeded(seed: u64) -> Self {
        let key: Vec<u32> = if seed >> 32 == 0 {
            vec![seed as u32]
        } else {
            vec![seed as u32, (seed >> 32) as u32]
        };
        Mt19937::init_by_array(&key)
    }

    fn twist(&mut self) {
        let s = &mut self.state;
        for i in 0..624 {
            let y = (s[i] & 0x8000_0000) | (s[(i + 1) % 624] & 0x7fff_ffff);
            let mut next = s[(i + 397) % 624] ^ (y >> 1);
            if y & 1 == 1 {
                next ^= 0x9908_b0df;
            }
            s[i] = next;
        }
        self.index = 0;
    }

    pub fn next_u32(&mut self) -> u32 {
        if self.index >= 624 {
            self.twist();
        }
        let mut y = self.state[self.index];
        self.index += 1;
        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c_5680;
        y ^= (y << 15) & 0xefc6_0000;
        y ^= y >> 18;
        y
    }

    /// `random.getrandbits(8)`.
    pub fn getrandbits8(&mut self) -> u8 {
        (self.next_u32() >> 24) as u8
    }

    pub fn keystream(&mut self, len: usize) -> Vec<u8> {
        (0..len).map(|_| self.getrandbits8()).collect()
    }
}

/// 16-bit xorshift (7, 9, 8); emits the high byte after each step.
#[derive(Debug, Clone, Copy)]
pub struct Xorshift16 {
    pub state: u16,
}

impl Xorshift16 {
    pub fn next_byte(&mut self) -> u8 {
        let mut s = self.state;
        s ^= s << 7;
        s ^= s >> 9;
        s ^= s << 8;
        self.state = s;
        (s >> 8) as u8
    }

    pub fn keystream(seed: u16, len: usize) -> Vec<u8> {
        let mut g = Xorshift16 { state: seed };
        (0..len).map(|_| g.next_byte()).collect()
    }
}

/// Right-shifting Fibonacci LFSR over 16 bits. Each step outputs the low
/// bit and shifts in the parity of `state & taps` at the top.
#[derive(Debug, Clone, Copy)]
pub struct Lfsr16 {
    pub state: u16,
    pub taps: u16,
}

impl Lfsr16 {
    pub fn next_bit(&mut self) -> u8 {
        let out = (self.state & 1) as u8;
        let feedback = (self.state & self.taps).count_ones() as u16 & 1;
        self.state = (self.state >> 1) | (feedback << 15);
        out
    }

    /// Bytes assembled least-significant bit first.
    pub fn next_byte(&mut self) -> u8 {
        (0..8).fold(0u8, |acc, i| acc | (self.next_bit() << i))
    }

    pub fn keystream(seed: u16, taps: u16, len: usize) -> Vec<u8> {
        let mut g = Lfsr16 { state: seed, taps };
        (0..len).map(|_| g.next_byte()).collect()
    }
}

/// `(a * state + c) mod m`.
pub fn lcg_next(state: u64, a: u64, c: u64, m: u64) -> u64 {
    assert!(m > 0, "LCG modulus must be positive");
    ((a as u128 * state as u128 + c as u128) % m as u128) as u64
}

/// Keystream byte derived from an LCG state (top byte of a 32-bit state).
pub fn lcg_byte(state: u64) -> u8 {
    (state >> 24) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen from CPython 3: random.seed(s); [random.getrandbits(8) ...]
    #[test]
    fn mt_matches_cpython() {
        assert_eq!(
            Mt19937::python_seeded(1234).keystream(8),
            vec![247, 199, 112, 29, 1, 23, 233, 241]
        );
        assert_eq!(Mt19937::python_seeded(0).keystream(4), vec![216, 98, 194, 227]);
        assert_eq!(
            Mt19937::python_seeded(1_700_000_000).keystream(4),
            vec![82, 87, 49, 107]
        );
        let mut mt = Mt19937::python_seeded((1u64 << 40) + 5);
        assert_eq!(mt.next_u32(), 2_166_296_868);
        assert_eq!(mt.next_u32(), 2_220_160_828);
    }

    #[test]
    fn lcg_examples() {
        assert_eq!(lcg_next(7, 5, 3, 16), 6);
        assert_eq!(lcg_next(6, 5, 3, 16), 1);
        for x in [0u64, 5, 99, 1 << 40] {
            assert_eq!(lcg_next(x, 1, 0, 97), x % 97);
        }
        let run = |seed| {
            std::iter::successors(Some(seed), |&s| Some(lcg_next(s, 1_103_515_245, 12_345, 1 << 31)))
                .take(5)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));
    }

    #[test]
    fn lfsr_outputs_seed_bits_first() {
        let seed = 0b1010_0011_0101_1100u16;
        let ks = Lfsr16::keystream(seed, 0x002d, 2);
        assert_eq!(u16::from_le_bytes([ks[0], ks[1]]), seed);
    }

    #[test]
    fn lfsr_maximal_taps_have_full_period() {
        let mut g = Lfsr16 { state: 1, taps: 0x002d };
        let mut period = 0u32;
        loop {
            g.next_bit();
            period += 1;
            if g.state == 1 {
                break;
            }
        }
        assert_eq!(period, 65_535);
    }

    #[test]
    fn xorshift16_never_hits_zero() {
        let mut g = Xorshift16 { state: 1 };
        for _ in 0..70_000 {
            g.next_byte();
            assert_ne!(g.state, 0);
        }
    }
}
