use std::fmt;
use std::str::FromStr;

use super::BoolFnError;

/// Largest supported variable count (2^20 table entries).
pub const MAX_VARS: usize = 20;

/// A Boolean function on `{0,1}^n` stored as a packed truth table.
///
/// Index `x` is the assignment whose bit `i - 1` (least significant first) is the
/// value of variable `z_i`. Every module that builds or reads tables uses this
/// convention: node `i` of a graph, attribute `i` of a circuit, and input node `i`
/// of a GNN extraction all map to bit `i - 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    words: Vec<u64>,
}

fn check_vars(n: usize) -> Result<(), BoolFnError> {
    if (1..=MAX_VARS).contains(&n) {
        Ok(())
    } else {
        Err(BoolFnError::VarCount(n))
    }
}

impl TruthTable {
    /// All-zeros table on `n` variables.
    pub fn zeros(n: usize) -> Result<Self, BoolFnError> {
        check_vars(n)?;
        let len = 1usize << n;
        Ok(Self { n, words: vec![0; len.div_ceil(64)] })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Result<Self, BoolFnError> {
        let mut t = Self::zeros(n)?;
        for x in 0..t.len() {
            if f(x) {
                t.set(x, true);
            }
        }
        Ok(t)
    }

    /// Builds a table from `2^n` output bits in index order.
    pub fn from_bits(n: usize, bits: &[bool]) -> Result<Self, BoolFnError> {
        check_vars(n)?;
        if bits.len() != 1 << n {
            return Err(BoolFnError::Length { expected: 1 << n, found: bits.len() });
        }
        Self::from_fn(n, |x| bits[x])
    }

    /// The parity function over the variables in `mask` (bit `i - 1` selects `z_i`).
    pub fn parity(n: usize, mask: usize) -> Result<Self, BoolFnError> {
        Self::from_fn(n, |x| (x & mask).count_ones() % 2 == 1)
    }

    /// The dictator `z_var` (1-based variable index).
    pub fn dictator(n: usize, var: usize) -> Result<Self, BoolFnError> {
        if var == 0 || var > n {
            return Err(BoolFnError::VarIndex { var, n });
        }
        Self::from_fn(n, |x| x >> (var - 1) & 1 == 1)
    }

    pub fn majority(n: usize) -> Result<Self, BoolFnError> {
        Self::from_fn(n, |x| 2 * x.count_ones() as usize > n)
    }

    pub fn vars(&self) -> usize {
        self.n
    }

    /// Number of table entries, `2^n`.
    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        debug_assert!(x < self.len());
        self.words[x >> 6] >> (x & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, value: bool) {
        debug_assert!(x < self.len());
        let bit = 1u64 << (x & 63);
        if value {
            self.words[x >> 6] |= bit;
        } else {
            self.words[x >> 6] &= !bit;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |x| self.get(x))
    }

    /// Number of ones among inputs of each Hamming weight `0..=n`.
    pub fn ones_by_weight(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n + 1];
        for x in 0..self.len() {
            if self.get(x) {
                counts[x.count_ones() as usize] += 1;
            }
        }
        counts
    }

    /// Signed view under `x_i = 1 - 2 z_i`: output `0` becomes `+1`, `1` becomes `-1`.
    pub fn to_pm_one(&self) -> Vec<i8> {
        self.iter().map(|b| if b { -1 } else { 1 }).collect()
    }

    pub fn complement(&self) -> Self {
        Self::from_fn(self.n, |x| !self.get(x)).expect("same n")
    }

    /// Text form: `n=<k>` then `2^k` characters of `0`/`1` in index order.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.len() + 8);
        s.push_str(&format!("n={}\n", self.n));
        s.extend(self.iter().map(|b| if b { '1' } else { '0' }));
        s.push('\n');
        s
    }
}

impl FromStr for TruthTable {
    type Err = BoolFnError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| BoolFnError::parse(1, "missing `n=<k>` header"))?;
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| BoolFnError::parse(1, format!("expected `n=<k>`, found `{header}`")))?;
        check_vars(n)?;
        let body = lines.next().ok_or_else(|| BoolFnError::parse(2, "missing table bits"))?;
        if let Some(extra) = lines.next() {
            return Err(BoolFnError::parse(3, format!("unexpected trailing line `{extra}`")));
        }
        let mut bits = Vec::with_capacity(body.len());
        for (col, c) in body.chars().enumerate() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(BoolFnError::parse(2, format!("invalid character `{other}` at column {}", col + 1)))
                }
            }
        }
        Self::from_bits(n, &bits)
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "TruthTable(n={}, {bits})", self.n)
    }
}
