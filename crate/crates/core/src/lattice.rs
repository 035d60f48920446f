//! Deterministic detector-response patterns.
//!
//! A pattern fixes, for each of Alice's and Bob's three settings, whether the
//! detector clicks. Patterns are encoded as integers `0..64`: bit `i-1` is
//! Alice's response for setting `i`, bit `2+j` is Bob's for setting `j`.

use std::fmt;
use std::sync::OnceLock;

pub const SETTINGS: usize = 3;
pub const PATTERN_COUNT: usize = 1 << (2 * SETTINGS);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClickPattern(u8);

impl ClickPattern {
    pub fn from_code(code: usize) -> Option<Self> {
        (code < PATTERN_COUNT).then_some(Self(code as u8))
    }

    /// Builds a pattern from `(A1, A2, A3, B1, B2, B3)` bits, written in the
    /// same order as tuples like `(1,0,0,0,1,0)`.
    pub fn from_bits(bits: [u8; 6]) -> Self {
        let code = bits.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | (u8::from(b != 0) << k));
        Self(code)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn bits(self) -> [u8; 6] {
        std::array::from_fn(|k| (self.0 >> k) & 1)
    }

    /// Alice's detector clicks for setting `i` (0-based).
    pub fn clicks_a(self, i: usize) -> bool {
        debug_assert!(i < SETTINGS);
        self.0 >> i & 1 == 1
    }

    /// Bob's detector clicks for setting `j` (0-based).
    pub fn clicks_b(self, j: usize) -> bool {
        debug_assert!(j < SETTINGS);
        self.0 >> (SETTINGS + j) & 1 == 1
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.bits();
        write!(f, "({},{},{},{},{},{})", b[0], b[1], b[2], b[3], b[4], b[5])
    }
}

/// All 64 patterns in ascending code order.
pub fn enumerate_patterns() -> Vec<ClickPattern> {
    (0..PATTERN_COUNT).map(|c| ClickPattern(c as u8)).collect()
}

/// Index sets of patterns in which a given detector clicks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaSets {
    pub set_a: [Vec<ClickPattern>; SETTINGS],
    pub set_b: [Vec<ClickPattern>; SETTINGS],
}

impl LambdaSets {
    pub fn complement_a(&self, i: usize) -> Vec<ClickPattern> {
        enumerate_patterns().into_iter().filter(|p| !p.clicks_a(i)).collect()
    }

    pub fn complement_b(&self, j: usize) -> Vec<ClickPattern> {
        enumerate_patterns().into_iter().filter(|p| !p.clicks_b(j)).collect()
    }

    /// Patterns in one of the four cells for setting pair `(i, j)`:
    /// `click_a`/`click_b` select the set or its complement.
    pub fn cell(&self, i: usize, j: usize, click_a: bool, click_b: bool) -> Vec<ClickPattern> {
        enumerate_patterns().into_iter().filter(|p| p.clicks_a(i) == click_a && p.clicks_b(j) == click_b).collect()
    }
}

/// Shared, lazily built table.
pub fn lambda_sets() -> &'static LambdaSets {
    static SETS: OnceLock<LambdaSets> = OnceLock::new();
    SETS.get_or_init(|| {
        let all = enumerate_patterns();
        let set_a = std::array::from_fn(|i| all.iter().copied().filter(|p| p.clicks_a(i)).collect());
        let set_b = std::array::from_fn(|j| all.iter().copied().filter(|p| p.clicks_b(j)).collect());
        LambdaSets { set_a, set_b }
    })
}
