//! Elementary symmetric polynomials, binary-tree polynomials, and the
//! rotation-angle tables derived from them.
//!
//! Indexing contract: table row `p` covers the `p` coefficients with the
//! *largest* site indices, `{x_{M-p+1}, ..., x_M}`. Row `p` is obtained from
//! row `p - 1` by adjoining `x_{M-p+1}`, which is exactly the suffix split
//! consumed by the rotation-angle formulas. The binary-tree table follows the
//! same orientation, with the recursion reading the coefficient matrix at
//! `(M - p + 1, N - q + 1)` for cell `(p, q)`.

use serde::Serialize;

use crate::error::{Error, Result};

fn check_domain(x: &[f64]) -> Result<()> {
    for &v in x {
        if !v.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if v < 0.0 {
            return Err(Error::NegativeInput);
        }
    }
    Ok(())
}

/// Elementary symmetric polynomial of degree `n` over `x`, by the one-pass
/// divide-and-conquer recursion. Returns 1 for `n = 0` and 0 for `n > len`.
pub fn sum_esp(x: &[f64], n: usize) -> Result<f64> {
    check_domain(x)?;
    if n == 0 {
        return Ok(1.0);
    }
    if n > x.len() {
        return Ok(0.0);
    }
    let mut e = vec![0.0f64; n + 1];
    e[0] = 1.0;
    for (i, &v) in x.iter().enumerate() {
        let top = n.min(i + 1);
        for q in (1..=top).rev() {
            e[q] += v * e[q - 1];
        }
    }
    Ok(e[n])
}

/// Table of suffix-window ESPs over squared magnitudes.
///
/// `entry(p, q)` is the degree-`q` ESP of `{|eta_{M-p+1}|^2, ..., |eta_M|^2}`.
#[derive(Debug, Clone, Serialize)]
pub struct EspTable {
    m: usize,
    n: usize,
    /// Row-major, (m + 1) x (n + 1).
    entries: Vec<f64>,
}

impl EspTable {
    /// Builds the table from coefficient magnitudes (squared internally).
    pub fn build(eta_magnitudes: &[f64], n: usize) -> Result<Self> {
        let m = eta_magnitudes.len();
        if m < n || n == 0 {
            return Err(Error::InvalidShape { m, n });
        }
        check_domain(eta_magnitudes)?;
        let cols = n + 1;
        let mut entries = vec![0.0f64; (m + 1) * cols];
        for p in 0..=m {
            entries[p * cols] = 1.0;
        }
        for p in 1..=m {
            let x = eta_magnitudes[m - p] * eta_magnitudes[m - p]; // |eta_{M-p+1}|^2
            for q in 1..=n.min(p) {
                entries[p * cols + q] =
                    x * entries[(p - 1) * cols + q - 1] + entries[(p - 1) * cols + q];
            }
        }
        Ok(Self { m, n, entries })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, p: usize, q: usize) -> f64 {
        self.entries[p * (self.n + 1) + q]
    }
}

/// Table of suffix-window binary-tree polynomials over a banded matrix of
/// squared magnitudes.
///
/// `entry(p, q)` sums, over every `q`-subset of the `p` highest sites, the
/// product of squared magnitudes with column `N - q + j` attached to the
/// `j`-th smallest chosen site; `entry(M, N)` is the full binary-tree norm.
#[derive(Debug, Clone, Serialize)]
pub struct BtpTable {
    m: usize,
    n: usize,
    /// Row-major, (m + 1) x (n + 1).
    entries: Vec<f64>,
}

impl BtpTable {
    /// Builds the table from a row-major `m x n` magnitude matrix
    /// (`magnitudes[(p - 1) * n + (j - 1)] = |eta_p^j|`, squared internally).
    ///
    /// Entries outside the band `max(1, p + N - M) <= j <= min(p, N)` never
    /// enter any monomial of the norm; they only parametrize rotations that
    /// the preparation circuit cannot exercise.
    pub fn build(magnitudes: &[f64], m: usize, n: usize) -> Result<Self> {
        if m < n || n == 0 {
            return Err(Error::InvalidShape { m, n });
        }
        if magnitudes.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: magnitudes.len(),
            });
        }
        check_domain(magnitudes)?;
        let cols = n + 1;
        let mut entries = vec![0.0f64; (m + 1) * cols];
        for p in 0..=m {
            entries[p * cols] = 1.0;
        }
        for p in 1..=m {
            for q in 1..=n.min(p) {
                // suffix orientation: cell (p, q) consumes |eta_{M-p+1}^{N-q+1}|^2
                let v = magnitudes[(m - p) * n + (n - q)];
                let x = v * v;
                entries[p * cols + q] =
                    x * entries[(p - 1) * cols + q - 1] + entries[(p - 1) * cols + q];
            }
        }
        Ok(Self { m, n, entries })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, p: usize, q: usize) -> f64 {
        self.entries[p * (self.n + 1) + q]
    }
}

/// Rotation angles driving every split-and-cyclic-shift block.
///
/// Defined on the grid `2 <= p <= M`, `1 <= q <= min(N, p - 1)`. The subset
/// with `q >= p + N - M` is the part a preparation circuit can actually
/// exercise from the reference determinant; outside it a vanishing table
/// ratio degrades gracefully to the identity rotation.
#[derive(Debug, Clone, Serialize)]
pub struct AngleTable {
    m: usize,
    n: usize,
    /// theta(p,q) in [0,1]; NaN outside the defined grid. Row-major (m+1)x(n+1).
    theta: Vec<f64>,
    /// theta_bar(p,q) = sqrt(entry(p-1,q)/entry(p,q)); complements theta.
    theta_bar: Vec<f64>,
    /// tau(p,q) = 2 acos(theta(p,q)), radians.
    tau: Vec<f64>,
}

impl AngleTable {
    /// Angles preparing the ESP state of the given coefficient magnitudes.
    ///
    /// Requires at least `n` strictly positive magnitudes. Magnitudes are
    /// rescaled so the largest is 1 before table construction; every angle is
    /// a scale-invariant ratio, so this only improves conditioning.
    pub fn agp(eta_magnitudes: &[f64], n: usize) -> Result<Self> {
        let m = eta_magnitudes.len();
        if m < n || n == 0 {
            return Err(Error::InvalidShape { m, n });
        }
        check_domain(eta_magnitudes)?;
        if eta_magnitudes.iter().filter(|&&v| v > 0.0).count() < n {
            return Err(Error::DegenerateState);
        }
        let scaled = rescale(eta_magnitudes);
        let table = EspTable::build(&scaled, n)?;
        Self::fill(m, n, |p, q| table.entry(p, q), |p, _q| scaled[m - p])
    }

    /// Angles preparing the binary-tree state of a banded magnitude matrix.
    pub fn bts(magnitudes: &[f64], m: usize, n: usize) -> Result<Self> {
        let max = magnitudes.iter().cloned().fold(0.0f64, f64::max);
        if max == 0.0 {
            return Err(Error::DegenerateState);
        }
        let scaled: Vec<f64> = magnitudes.iter().map(|v| v / max).collect();
        let table = BtpTable::build(&scaled, m, n)?;
        if table.entry(m, n) <= 0.0 {
            return Err(Error::DegenerateState);
        }
        Self::fill(
            m,
            n,
            |p, q| table.entry(p, q),
            |p, q| scaled[(m - p) * n + (n - q)],
        )
    }

    fn fill(
        m: usize,
        n: usize,
        entry: impl Fn(usize, usize) -> f64,
        mag: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let size = (m + 1) * (n + 1);
        let mut out = Self {
            m,
            n,
            theta: vec![f64::NAN; size],
            theta_bar: vec![f64::NAN; size],
            tau: vec![f64::NAN; size],
        };
        for p in 2..=m {
            for q in 1..=n.min(p - 1) {
                let denom = entry(p, q);
                let idx = p * (n + 1) + q;
                if denom <= 0.0 {
                    if Self::required_cell(m, n, p, q) {
                        return Err(Error::DegenerateCoefficient { p, q });
                    }
                    // unexercisable split; the block degrades to the identity
                    out.theta[idx] = 1.0;
                    out.theta_bar[idx] = 0.0;
                    out.tau[idx] = 0.0;
                    continue;
                }
                let theta = (mag(p, q) * (entry(p - 1, q - 1) / denom).sqrt()).clamp(0.0, 1.0);
                let bar = (entry(p - 1, q) / denom).sqrt().clamp(0.0, 1.0);
                out.theta[idx] = theta;
                out.theta_bar[idx] = bar;
                out.tau[idx] = 2.0 * theta.acos();
            }
        }
        Ok(out)
    }

    fn required_cell(m: usize, n: usize, p: usize, q: usize) -> bool {
        q + m >= p + n && q <= n.min(p - 1)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True when `(p, q)` lies in the defined grid.
    pub fn defined(&self, p: usize, q: usize) -> bool {
        (2..=self.m).contains(&p) && q >= 1 && q <= self.n.min(p - 1)
    }

    /// True when a circuit started from the reference determinant can reach
    /// the split governed by `(p, q)`.
    pub fn required(&self, p: usize, q: usize) -> bool {
        self.defined(p, q) && Self::required_cell(self.m, self.n, p, q)
    }

    pub fn theta(&self, p: usize, q: usize) -> Option<f64> {
        self.defined(p, q).then(|| self.theta[p * (self.n + 1) + q])
    }

    pub fn theta_bar(&self, p: usize, q: usize) -> Option<f64> {
        self.defined(p, q)
            .then(|| self.theta_bar[p * (self.n + 1) + q])
    }

    pub fn tau(&self, p: usize, q: usize) -> Option<f64> {
        self.defined(p, q).then(|| self.tau[p * (self.n + 1) + q])
    }
}

fn rescale(magnitudes: &[f64]) -> Vec<f64> {
    let max = magnitudes.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return magnitudes.to_vec();
    }
    magnitudes.iter().map(|v| v / max).collect()
}

/// Convenience wrappers matching the operation names used by callers.
pub fn build_esp_table(eta_magnitudes: &[f64], n: usize) -> Result<EspTable> {
    EspTable::build(eta_magnitudes, n)
}

pub fn build_btp_table(magnitudes: &[f64], m: usize, n: usize) -> Result<BtpTable> {
    BtpTable::build(magnitudes, m, n)
}

pub fn agp_angles(eta_magnitudes: &[f64], n: usize) -> Result<AngleTable> {
    AngleTable::agp(eta_magnitudes, n)
}

pub fn bts_angles(magnitudes: &[f64], m: usize, n: usize) -> Result<AngleTable> {
    AngleTable::bts(magnitudes, m, n)
}
