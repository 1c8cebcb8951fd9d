//! Direct construction of ESP/AGP, Dicke, binary-tree, and product states.
//!
//! These builders enumerate amplitudes straight from the coefficient
//! definitions and serve as the reference every preparation circuit is
//! verified against.
//!
//! Conventions: site (paired orbital) `p` occupies bit `p - 1` of a basis
//! index, and ket strings print site M leftmost, so the string is the binary
//! expansion of the index. Fixed-weight amplitude vectors are ordered by the
//! colexicographic rank of the occupied set, which equals the numeric order
//! of the masks.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combin::{binomial, bitstring, masks_of_weight, occupied_sites, rank_colex};
use crate::error::{Error, Result};
use crate::esp::{BtpTable, EspTable};

/// Geminal coefficients of an (M, N) problem: eta_p = |eta_p| e^{i alpha_p}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeminal", into = "RawGeminal")]
pub struct GeminalVector {
    m: usize,
    n: usize,
    magnitudes: Vec<f64>,
    phases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGeminal {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    magnitudes: Vec<f64>,
    #[serde(default)]
    phases: Option<Vec<f64>>,
}

impl TryFrom<RawGeminal> for GeminalVector {
    type Error = Error;

    fn try_from(raw: RawGeminal) -> Result<Self> {
        let phases = raw.phases.unwrap_or_else(|| vec![0.0; raw.m]);
        GeminalVector::new(raw.m, raw.n, raw.magnitudes, phases)
    }
}

impl From<GeminalVector> for RawGeminal {
    fn from(g: GeminalVector) -> Self {
        RawGeminal {
            m: g.m,
            n: g.n,
            magnitudes: g.magnitudes,
            phases: Some(g.phases),
        }
    }
}

impl GeminalVector {
    pub fn new(m: usize, n: usize, magnitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if m < n || n == 0 {
            return Err(Error::InvalidShape { m, n });
        }
        if magnitudes.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: magnitudes.len(),
            });
        }
        if phases.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: phases.len(),
            });
        }
        if magnitudes.iter().chain(&phases).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if magnitudes.iter().any(|&v| v < 0.0) {
            return Err(Error::NegativeInput);
        }
        Ok(Self {
            m,
            n,
            magnitudes,
            phases,
        })
    }

    /// Unit coefficients: the Dicke special case.
    pub fn unit(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, vec![1.0; m], vec![0.0; m])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// eta_p as a complex number, 1-based.
    pub fn eta(&self, p: usize) -> Complex64 {
        Complex64::from_polar(self.magnitudes[p - 1], self.phases[p - 1])
    }

    pub fn has_phases(&self) -> bool {
        self.phases.iter().any(|&a| a != 0.0)
    }
}

/// Binary-tree coefficients: banded M x N magnitudes with per-site phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBts", into = "RawBts")]
pub struct BtsCoefficients {
    m: usize,
    n: usize,
    /// Row-major M x N; zero outside the band.
    magnitudes: Vec<f64>,
    phases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBts {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    magnitudes: Vec<Vec<f64>>,
    #[serde(default)]
    phases: Option<Vec<f64>>,
}

impl TryFrom<RawBts> for BtsCoefficients {
    type Error = Error;

    fn try_from(raw: RawBts) -> Result<Self> {
        if raw.magnitudes.len() != raw.m {
            return Err(Error::DimensionMismatch {
                expected: raw.m,
                got: raw.magnitudes.len(),
            });
        }
        let mut flat = Vec::with_capacity(raw.m * raw.n);
        for row in &raw.magnitudes {
            if row.len() != raw.n {
                return Err(Error::DimensionMismatch {
                    expected: raw.n,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let phases = raw.phases.unwrap_or_else(|| vec![0.0; raw.m]);
        BtsCoefficients::new(raw.m, raw.n, flat, phases)
    }
}

impl From<BtsCoefficients> for RawBts {
    fn from(b: BtsCoefficients) -> Self {
        let rows = (0..b.m)
            .map(|p| b.magnitudes[p * b.n..(p + 1) * b.n].to_vec())
            .collect();
        RawBts {
            m: b.m,
            n: b.n,
            magnitudes: rows,
            phases: Some(b.phases),
        }
    }
}

/// The column range a site can occupy: `max(1, p + N - M) ..= min(p, N)`.
pub fn bts_band(m: usize, n: usize, p: usize) -> std::ops::RangeInclusive<usize> {
    (p + n).saturating_sub(m).max(1)..=n.min(p)
}

impl BtsCoefficients {
    /// `magnitudes` is row-major M x N; entries outside the band must be zero.
    pub fn new(m: usize, n: usize, magnitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if m < n || n == 0 {
            return Err(Error::InvalidShape { m, n });
        }
        if magnitudes.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: magnitudes.len(),
            });
        }
        if phases.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: phases.len(),
            });
        }
        if magnitudes.iter().chain(&phases).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if magnitudes.iter().any(|&v| v < 0.0) {
            return Err(Error::NegativeInput);
        }
        for p in 1..=m {
            let band = bts_band(m, n, p);
            for j in 1..=n {
                if !band.contains(&j) && magnitudes[(p - 1) * n + (j - 1)] != 0.0 {
                    return Err(Error::OutsideBand { p, j });
                }
            }
        }
        Ok(Self {
            m,
            n,
            magnitudes,
            phases,
        })
    }

    /// Embeds a geminal vector as column-independent coefficients; the
    /// resulting binary-tree state coincides with the ESP state of `g`.
    pub fn constant_columns(g: &GeminalVector) -> Self {
        let (m, n) = (g.m(), g.n());
        let mut magnitudes = vec![0.0; m * n];
        for p in 1..=m {
            for j in bts_band(m, n, p) {
                magnitudes[(p - 1) * n + (j - 1)] = g.magnitudes()[p - 1];
            }
        }
        Self {
            m,
            n,
            magnitudes,
            phases: g.phases().to_vec(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// |eta_p^j|, 1-based indices.
    pub fn magnitude(&self, p: usize, j: usize) -> f64 {
        self.magnitudes[(p - 1) * self.n + (j - 1)]
    }

    /// eta_p^j = |eta_p^j| e^{i alpha_p}, 1-based.
    pub fn eta(&self, p: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.magnitude(p, j), self.phases[p - 1])
    }

    pub fn has_phases(&self) -> bool {
        self.phases.iter().any(|&a| a != 0.0)
    }
}

/// Amplitudes over the fixed-weight sector, ordered by colex rank of the
/// occupied set. This vector is the seniority-zero CI coefficient tensor.
#[derive(Debug, Clone)]
pub struct SubspaceState {
    m: usize,
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl SubspaceState {
    pub fn new(m: usize, n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n > m {
            return Err(Error::InvalidShape { m, n });
        }
        let dim = binomial(m, n) as usize;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        Ok(Self { m, n, amplitudes })
    }

    /// The basis state of the given occupation mask.
    pub fn basis(m: usize, n: usize, mask: u64) -> Result<Self> {
        let mut s = Self::new(m, n, vec![Complex64::ZERO; binomial(m, n) as usize])?;
        s.amplitudes[rank_colex(mask)] = Complex64::ONE;
        Ok(s)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn weight(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// Amplitude of the basis state with the given occupation mask.
    pub fn amplitude(&self, mask: u64) -> Complex64 {
        self.amplitudes[rank_colex(mask)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        if self.m != other.m || self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let ov: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(ov.norm_sqr())
    }

    /// CSV rows `index,bitstring,re,im`.
    pub fn to_csv(&self) -> String {
        let masks = masks_of_weight(self.m, self.n);
        let mut out = String::from("index,bitstring,re,im\n");
        for (r, &mask) in masks.iter().enumerate() {
            let a = self.amplitudes[r];
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r,
                bitstring(mask, self.m),
                a.re,
                a.im
            );
        }
        out
    }
}

/// Full 2^n amplitude vector.
#[derive(Debug, Clone)]
pub struct DenseState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Dense registers beyond this size exceed a GiB of amplitudes.
pub const DENSE_QUBIT_LIMIT: usize = 26;

impl DenseState {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits > DENSE_QUBIT_LIMIT {
            return Err(Error::MemoryGuard {
                qubits: n_qubits,
                max: DENSE_QUBIT_LIMIT,
            });
        }
        let mut amplitudes = vec![Complex64::ZERO; 1usize << n_qubits];
        amplitudes[0] = Complex64::ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits > DENSE_QUBIT_LIMIT {
            return Err(Error::MemoryGuard {
                qubits: n_qubits,
                max: DENSE_QUBIT_LIMIT,
            });
        }
        if amplitudes.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1usize << n_qubits,
                got: amplitudes.len(),
            });
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amplitudes[index as usize]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                got: other.amplitudes.len(),
            });
        }
        let ov: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(ov.norm_sqr())
    }

    /// CSV rows `index,bitstring,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,bitstring,re,im\n");
        for (i, a) in self.amplitudes.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                i,
                bitstring(i as u64, self.n_qubits),
                a.re,
                a.im
            );
        }
        out
    }
}

/// Builds the normalized ESP state: the amplitude of the occupied set
/// `{p_1..p_N}` is `eta_{p_1} ... eta_{p_N} / sqrt(S_{M,N})`.
pub fn build_esp_state(g: &GeminalVector) -> Result<SubspaceState> {
    let (m, n) = (g.m(), g.n());
    let scale = g
        .magnitudes()
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateState);
    }
    let scaled: Vec<f64> = g.magnitudes().iter().map(|v| v / scale).collect();
    let table = EspTable::build(&scaled, n)?;
    let norm = table.entry(m, n);
    if norm <= 0.0 {
        return Err(Error::DegenerateState);
    }
    let inv = 1.0 / norm.sqrt();
    let masks = masks_of_weight(m, n);
    let mut amplitudes = Vec::with_capacity(masks.len());
    for &mask in &masks {
        let mut amp = Complex64::new(inv, 0.0);
        for p in occupied_sites(mask) {
            amp *= Complex64::from_polar(scaled[p - 1], g.phases()[p - 1]);
        }
        amplitudes.push(amp);
    }
    SubspaceState::new(m, n, amplitudes)
}

/// The uniform superposition of all weight-N strings.
pub fn build_dicke(m: usize, n: usize) -> Result<SubspaceState> {
    if m < n || n == 0 {
        return Err(Error::InvalidShape { m, n });
    }
    let dim = binomial(m, n) as usize;
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    SubspaceState::new(m, n, vec![amp; dim])
}

/// Builds the normalized binary-tree state: column `j` attaches to the j-th
/// smallest occupied site.
pub fn build_bts_state(b: &BtsCoefficients) -> Result<SubspaceState> {
    let (m, n) = (b.m(), b.n());
    let scale = b.magnitudes().iter().cloned().fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateState);
    }
    let scaled: Vec<f64> = b.magnitudes().iter().map(|v| v / scale).collect();
    let table = BtpTable::build(&scaled, m, n)?;
    let norm = table.entry(m, n);
    if norm <= 0.0 {
        return Err(Error::DegenerateState);
    }
    let inv = 1.0 / norm.sqrt();
    let masks = masks_of_weight(m, n);
    let mut amplitudes = Vec::with_capacity(masks.len());
    for &mask in &masks {
        let mut amp = Complex64::new(inv, 0.0);
        for (j, p) in occupied_sites(mask).into_iter().enumerate() {
            amp *= Complex64::from_polar(
                scaled[(p - 1) * n + j],
                b.phases()[p - 1],
            );
        }
        amplitudes.push(amp);
    }
    SubspaceState::new(m, n, amplitudes)
}

/// Qubit layouts for doubling a paired register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairOrdering {
    /// Site p pairs with site M + p.
    Block,
    /// Site p pairs with its neighbor: sites 2p - 1 and 2p.
    Interlaced,
}

impl std::fmt::Display for PairOrdering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PairOrdering::Block => write!(f, "block"),
            PairOrdering::Interlaced => write!(f, "interlaced"),
        }
    }
}

/// Expands a weight-N state on M sites to a weight-2N state on 2M qubits with
/// both members of every pair occupied; amplitudes carry over unchanged.
pub fn pair_expand(s: &SubspaceState, ordering: PairOrdering) -> Result<DenseState> {
    let m = s.m();
    let mut out = DenseState::zero_state(2 * m)?;
    out.amplitudes_mut()[0] = Complex64::ZERO;
    let masks = masks_of_weight(m, s.weight());
    for (r, &mask) in masks.iter().enumerate() {
        let mut big = 0u64;
        for p in occupied_sites(mask) {
            match ordering {
                PairOrdering::Block => {
                    big |= 1u64 << (p - 1);
                    big |= 1u64 << (m + p - 1);
                }
                PairOrdering::Interlaced => {
                    big |= 1u64 << (2 * p - 2);
                    big |= 1u64 << (2 * p - 1);
                }
            }
        }
        out.amplitudes_mut()[big as usize] = s.amplitudes()[r];
    }
    Ok(out)
}

/// The product state `prod_p (cos(beta_p)|0> + e^{i alpha_p} sin(beta_p)|1>)`
/// with `beta_p = atan(|eta_p|)`.
pub fn build_qbcs(eta: &[Complex64]) -> Result<DenseState> {
    let n = eta.len();
    let mut out = DenseState::zero_state(n)?;
    for (p, e) in eta.iter().enumerate() {
        let beta = e.norm().atan();
        let (sin, cos) = beta.sin_cos();
        let excited = Complex64::from_polar(sin, e.arg());
        let amps = out.amplitudes_mut();
        let bit = 1usize << p;
        for i in 0..amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let low = amps[i];
                amps[j] = low * excited;
                amps[i] = low * cos;
            }
        }
    }
    Ok(out)
}

/// Scatters fixed-weight amplitudes into the full register.
pub fn embed(s: &SubspaceState) -> Result<DenseState> {
    let mut out = DenseState::zero_state(s.m())?;
    out.amplitudes_mut()[0] = Complex64::ZERO;
    let masks = masks_of_weight(s.m(), s.weight());
    for (r, &mask) in masks.iter().enumerate() {
        out.amplitudes_mut()[mask as usize] = s.amplitudes()[r];
    }
    Ok(out)
}

/// Extracts the weight-`n` sector and the norm leaked outside it.
pub fn project(d: &DenseState, n: usize) -> Result<(SubspaceState, f64)> {
    let m = d.n_qubits();
    if n > m {
        return Err(Error::InvalidShape { m, n });
    }
    let masks = masks_of_weight(m, n);
    let mut amplitudes = Vec::with_capacity(masks.len());
    let mut sector = 0.0f64;
    for &mask in &masks {
        let a = d.amplitudes()[mask as usize];
        sector += a.norm_sqr();
        amplitudes.push(a);
    }
    let leaked = (d.norm_sq() - sector).max(0.0);
    Ok((SubspaceState::new(m, n, amplitudes)?, leaked))
}
