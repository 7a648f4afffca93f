//! Zernike mode indices.
//!
//! A mode is the pair `(n, m)` with radial order `n ≥ 0` and azimuthal
//! frequency `m`, subject to `|m| ≤ n` and `n − |m|` even. Modes are linearly
//! ordered by the OSA/ANSI single index `j = (n(n+2) + m) / 2`, which is what
//! all matrix-shaped objects in this crate use for rows and columns. Noll
//! numbering is deliberately not offered: exposing a second ordering invites
//! silent off-by-one matrix mixups, and the OSA form has a closed inverse.
//!
//! Radial orders up to 50 are supported by every evaluation path in the
//! crate; the index arithmetic itself is exact far beyond that.

use crate::{Error, Result};

/// Validated Zernike mode index `(n, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    n: u32,
    m: i32,
}

impl ModeIndex {
    /// Validates `(n, m)` and returns the mode.
    ///
    /// Fails with [`Error::InvalidMode`] when `n < 0`, `|m| > n`, or
    /// `n − |m|` is odd.
    pub fn new(n: i64, m: i64) -> Result<Self> {
        if n < 0 {
            return Err(Error::InvalidMode {
                n,
                m,
                reason: "radial order must be non-negative",
            });
        }
        if m.unsigned_abs() > n as u64 {
            return Err(Error::InvalidMode {
                n,
                m,
                reason: "|m| exceeds n",
            });
        }
        if (n - m.abs()) % 2 != 0 {
            return Err(Error::InvalidMode {
                n,
                m,
                reason: "n - |m| must be even",
            });
        }
        Ok(Self {
            n: n as u32,
            m: m as i32,
        })
    }

    /// Radial order.
    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Azimuthal frequency.
    #[inline]
    pub fn m(&self) -> i32 {
        self.m
    }

    /// `|m|` as an unsigned value.
    #[inline]
    pub fn m_abs(&self) -> u32 {
        self.m.unsigned_abs()
    }

    /// OSA/ANSI single index `j = (n(n+2) + m) / 2`.
    #[inline]
    pub fn single_index(&self) -> usize {
        let n = self.n as i64;
        ((n * (n + 2) + self.m as i64) / 2) as usize
    }

    /// Inverse of [`ModeIndex::single_index`].
    pub fn from_single_index(j: usize) -> Self {
        // n is the largest integer with n(n+2)/2 - n/2... solve j within the
        // n-th block: blocks start at n(n+1)/2... derive from the triangular
        // layout: modes with radial order < n occupy n(n+1)/2 slots.
        let j = j as i64;
        let mut n = (((8 * j + 9) as f64).sqrt() as i64 - 3) / 2;
        while (n + 1) * (n + 2) / 2 <= j {
            n += 1;
        }
        while n * (n + 1) / 2 > j {
            n -= 1;
        }
        let m = 2 * j - n * (n + 2);
        Self {
            n: n as u32,
            m: m as i32,
        }
    }

    /// All valid modes with radial order `≤ n_max`, in single-index order.
    ///
    /// The list has length `(n_max + 1)(n_max + 2) / 2`.
    pub fn enumerate_up_to(n_max: u32) -> Vec<Self> {
        let mut out = Vec::with_capacity(count_up_to(n_max));
        for n in 0..=n_max {
            let mut m = -(n as i32);
            while m <= n as i32 {
                out.push(Self { n, m });
                m += 2;
            }
        }
        out
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// Number of modes with radial order `≤ n_max`: `(n_max+1)(n_max+2)/2`.
pub fn count_up_to(n_max: u32) -> usize {
    let n = n_max as usize;
    (n + 1) * (n + 2) / 2
}
