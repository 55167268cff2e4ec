use std::fmt;

use serde::{Serialize, Serializer};

use super::{BoolFnError, TruthTable, MAX_VARS};

/// An exact non-negative dyadic rational `num / 2^shift`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: u64,
    shift: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, shift: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, shift: 0 };

    pub fn new(num: u64, shift: u32) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        let strip = num.trailing_zeros().min(shift);
        Self { num: num >> strip, shift: shift - strip }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator_log2(&self) -> u32 {
        self.shift
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / (self.shift as f64).exp2()
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.shift == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u128 << self.shift)
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Fourier coefficients of the ±1 form of a Boolean function.
///
/// `coeff(S)` holds the scaled integer `c_S = 2^n * f̂(S)`, so every identity in
/// the spectral core is an integer identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourierSpectrum {
    n: usize,
    coeffs: Vec<i64>,
}

impl FourierSpectrum {
    /// Wraps raw scaled coefficients, indexed by subset mask.
    pub fn from_scaled(n: usize, coeffs: Vec<i64>) -> Result<Self, BoolFnError> {
        if !(1..=MAX_VARS).contains(&n) {
            return Err(BoolFnError::VarCount(n));
        }
        if coeffs.len() != 1 << n {
            return Err(BoolFnError::Length { expected: 1 << n, found: coeffs.len() });
        }
        Ok(Self { n, coeffs })
    }

    pub fn vars(&self) -> usize {
        self.n
    }

    /// Scaled coefficient `c_S` for subset mask `s`.
    pub fn scaled(&self, s: usize) -> i64 {
        self.coeffs[s]
    }

    pub fn scaled_coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// `f̂(S)` as a float; exact whenever `n <= 52`.
    pub fn coeff(&self, s: usize) -> f64 {
        self.coeffs[s] as f64 / (1u64 << self.n) as f64
    }

    /// Masks with a nonzero coefficient, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(s, _)| s)
    }

    /// `Σ c_S²`; equals `4^n` for every Boolean source.
    pub fn sum_of_squares(&self) -> u64 {
        self.coeffs.iter().map(|&c| (c * c) as u64).sum()
    }

    /// CSV rows `mask,scaled_coeff` for every mask, preceded by a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mask,scaled_coeff\n");
        for (s, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{s},{c}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, BoolFnError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line == "mask,scaled_coeff") {
                continue;
            }
            let (mask, coeff) =
                line.split_once(',').ok_or_else(|| BoolFnError::parse(i + 1, "expected `mask,scaled_coeff`"))?;
            let mask: usize = mask.trim().parse().map_err(|_| BoolFnError::parse(i + 1, "bad mask"))?;
            let coeff: i64 = coeff.trim().parse().map_err(|_| BoolFnError::parse(i + 1, "bad coefficient"))?;
            rows.push((mask, coeff));
        }
        let len = rows.len();
        if !len.is_power_of_two() {
            return Err(BoolFnError::parse(len + 1, format!("{len} rows is not a power of two")));
        }
        let n = len.trailing_zeros() as usize;
        let mut coeffs = vec![0; len];
        let mut seen = vec![false; len];
        for (mask, c) in rows {
            if mask >= len || seen[mask] {
                return Err(BoolFnError::parse(0, format!("mask {mask} out of range or repeated")));
            }
            seen[mask] = true;
            coeffs[mask] = c;
        }
        Self::from_scaled(n, coeffs)
    }
}

/// Summary quantities derived from a spectrum, all exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectralProfile {
    pub degree: usize,
    /// `Inf_i` for variables `1..=n`, stored at index `i - 1`.
    pub influences: Vec<Dyadic>,
    pub total_influence: Dyadic,
    /// `W^k` for `k = 0..=n`.
    pub weight_by_level: Vec<Dyadic>,
    pub support_size: usize,
}

/// In-place Walsh–Hadamard butterfly: `data[s] <- Σ_x data[x] (-1)^{|s & x|}`.
fn butterfly(data: &mut [i64]) {
    let mut half = 1;
    while half < data.len() {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        half *= 2;
    }
}

/// Forward transform of the ±1 form of `table`, in `O(n 2^n)`.
pub fn fwht(table: &TruthTable) -> FourierSpectrum {
    let mut data: Vec<i64> = table.to_pm_one().into_iter().map(i64::from).collect();
    butterfly(&mut data);
    FourierSpectrum { n: table.vars(), coeffs: data }
}

/// Rebuilds the truth table from its spectrum; fails if any reconstructed value is not ±1.
pub fn inverse_fwht(spectrum: &FourierSpectrum) -> Result<TruthTable, BoolFnError> {
    let mut data = spectrum.coeffs.clone();
    butterfly(&mut data);
    let scale = 1i64 << spectrum.n;
    let mut table = TruthTable::zeros(spectrum.n)?;
    for (x, &v) in data.iter().enumerate() {
        match v {
            v if v == scale => {}
            v if v == -scale => table.set(x, true),
            _ => return Err(BoolFnError::NotBoolean { index: x }),
        }
    }
    Ok(table)
}

pub fn fourier_degree(spectrum: &FourierSpectrum) -> usize {
    spectrum.support().map(|s| s.count_ones() as usize).max().unwrap_or(0)
}

pub fn profile(spectrum: &FourierSpectrum) -> SpectralProfile {
    let n = spectrum.n;
    let shift = 2 * n as u32;
    let mut infl = vec![0u64; n];
    let mut levels = vec![0u64; n + 1];
    let mut support_size = 0;
    for (s, &c) in spectrum.coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        support_size += 1;
        let sq = (c * c) as u64;
        levels[s.count_ones() as usize] += sq;
        for (i, acc) in infl.iter_mut().enumerate() {
            if s >> i & 1 == 1 {
                *acc += sq;
            }
        }
    }
    let total: u64 = infl.iter().sum();
    SpectralProfile {
        degree: fourier_degree(spectrum),
        influences: infl.into_iter().map(|v| Dyadic::new(v, shift)).collect(),
        total_influence: Dyadic::new(total, shift),
        weight_by_level: levels.into_iter().map(|v| Dyadic::new(v, shift)).collect(),
        support_size,
    }
}

/// `Stab_ρ(f) = Σ_S ρ^{|S|} f̂(S)²`.
pub fn noise_stability(spectrum: &FourierSpectrum, rho: f64) -> Result<f64, BoolFnError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(BoolFnError::Rho(rho));
    }
    let n = spectrum.n;
    let mut levels = vec![0u64; n + 1];
    for (s, &c) in spectrum.coeffs.iter().enumerate() {
        levels[s.count_ones() as usize] += (c * c) as u64;
    }
    let scale = (2.0 * n as f64).exp2();
    Ok(levels.iter().enumerate().map(|(k, &w)| rho.powi(k as i32) * (w as f64 / scale)).sum())
}
