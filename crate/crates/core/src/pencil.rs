//! The pentadiagonal pencil `(A, D)` whose smallest eigenvalue is `M_n^{-2}`.
//!
//! With `Q' = Σ v_k P_k` and `Q = Σ u_k P_{k+1}`, the coefficient vectors are
//! related by `N u = C₂ C₁ v`, where `C₁` lowers `α` and `C₂` lowers `β` by
//! one step and `N = diag(1, …, n)`. Writing `G = N⁻¹ C₂ C₁`,
//!
//! ```text
//! ‖Q'‖² = ⟨v, D v⟩,   D  = diag(d_0 … d_{n-1})
//! ‖Q‖²  = ⟨v, A v⟩,   A  = Gᵀ diag(d_1 … d_n) G
//! ```
//!
//! Raw `d_k` decay like `4^{-k}`, so the solver works with the symmetrized
//! factor `H = diag(√d_{k+1}) G diag(1/√d_k)` and `B = HᵀH = D^{-1/2} A D^{-1/2}`,
//! whose entries only involve the ratios `d_{k+1}/d_k`.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::jacobi::{norm_sequence, JacobiWeightParams, NormSequence};

/// Unit upper-bidiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBidiagonal {
    size: usize,
    superdiagonal: Vec<f64>,
}

impl UpperBidiagonal {
    pub fn size(&self) -> usize {
        self.size
    }

    /// Entries `(k-1, k)` for `k = 1..size`.
    pub fn superdiagonal(&self) -> &[f64] {
        &self.superdiagonal
    }

    pub fn apply(&self, h: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size, h.len())?;
        let mut out = h.to_vec();
        for (i, s) in self.superdiagonal.iter().enumerate() {
            out[i] += s * h[i + 1];
        }
        Ok(out)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("matrix size n must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// `C₁`: entry `(k-1, k) = -2k(k+β) / ((2k+α+β)(2k+α+β+1))`.
pub fn build_c1(params: &JacobiWeightParams, n: usize) -> Result<UpperBidiagonal> {
    check_size(n)?;
    let superdiagonal = (1..n).map(|k| -c1_coefficient(params, k)).collect();
    Ok(UpperBidiagonal { size: n, superdiagonal })
}

/// `C₂`: entry `(k-1, k) = 2k(k+α+1) / ((2k+α+β+1)(2k+α+β+2))`.
pub fn build_c2(params: &JacobiWeightParams, n: usize) -> Result<UpperBidiagonal> {
    check_size(n)?;
    let superdiagonal = (1..n).map(|k| c2_coefficient(params, k)).collect();
    Ok(UpperBidiagonal { size: n, superdiagonal })
}

fn c1_coefficient(params: &JacobiWeightParams, k: usize) -> f64 {
    let kf = k as f64;
    let m = 2.0 * kf + params.sum();
    2.0 * kf * (kf + params.beta()) / (m * (m + 1.0))
}

fn c2_coefficient(params: &JacobiWeightParams, k: usize) -> f64 {
    let kf = k as f64;
    let m = 2.0 * kf + params.sum();
    2.0 * kf * (kf + params.alpha() + 1.0) / ((m + 1.0) * (m + 2.0))
}

/// Upper-triangular matrix with bandwidth 2, stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBanded {
    pub diag: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl UpperBanded {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Entry `(row, col)`; zero outside the band.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        match col.checked_sub(row) {
            Some(0) => self.diag[row],
            Some(1) => self.first[row],
            Some(2) => self.second[row],
            _ => 0.0,
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.size();
        check_len(n, v.len())?;
        Ok((0..n)
            .map(|k| {
                let mut acc = self.diag[k] * v[k];
                if k + 1 < n {
                    acc += self.first[k] * v[k + 1];
                }
                if k + 2 < n {
                    acc += self.second[k] * v[k + 2];
                }
                acc
            })
            .collect())
    }

    /// `UᵀU` as a symmetric pentadiagonal matrix.
    pub fn gram(&self) -> SymmetricBands {
        let n = self.size();
        let mut out = SymmetricBands {
            diag: vec![0.0; n],
            first: vec![0.0; n.saturating_sub(1)],
            second: vec![0.0; n.saturating_sub(2)],
        };
        for i in 0..n {
            for offset in 0..=2 {
                let j = i + offset;
                if j >= n {
                    break;
                }
                let lo = j.saturating_sub(2);
                let value: f64 = (lo..=i).map(|k| self.get(k, i) * self.get(k, j)).sum();
                match offset {
                    0 => out.diag[i] = value,
                    1 => out.first[i] = value,
                    _ => out.second[i] = value,
                }
            }
        }
        out
    }
}

/// Symmetric pentadiagonal matrix stored as its diagonal and two superdiagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBands {
    pub diag: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl SymmetricBands {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        match j - i {
            0 => self.diag[i],
            1 => self.first[i],
            2 => self.second[i],
            _ => 0.0,
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.size();
        check_len(n, v.len())?;
        let mut out: Vec<f64> = self.diag.iter().zip(v).map(|(d, x)| d * x).collect();
        for (i, a) in self.first.iter().enumerate() {
            out[i] += a * v[i + 1];
            out[i + 1] += a * v[i];
        }
        for (i, a) in self.second.iter().enumerate() {
            out[i] += a * v[i + 2];
            out[i + 2] += a * v[i];
        }
        Ok(out)
    }

    /// Product with only the selected band (and its transpose) kept.
    pub fn apply_band(&self, band: Band, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.size();
        check_len(n, v.len())?;
        let mut out = vec![0.0; n];
        match band {
            Band::Diagonal => {
                for i in 0..n {
                    out[i] = self.diag[i] * v[i];
                }
            }
            Band::First | Band::Second => {
                let (values, offset) = match band {
                    Band::First => (&self.first, 1),
                    _ => (&self.second, 2),
                };
                for (i, a) in values.iter().enumerate() {
                    out[i] += a * v[i + offset];
                    out[i + offset] += a * v[i];
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.first)
            .chain(&self.second)
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    fn band_mut(&mut self, band: Band) -> &mut Vec<f64> {
        match band {
            Band::Diagonal => &mut self.diag,
            Band::First => &mut self.first,
            Band::Second => &mut self.second,
        }
    }
}

/// One of the three stored bands of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Diagonal,
    First,
    Second,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::Diagonal, Band::First, Band::Second];
}

/// The pencil `(A, D)` for a given weight and size `n`.
///
/// `A` is symmetric positive definite and pentadiagonal; `D` is diagonal and
/// positive. Built pencils are immutable.
#[derive(Debug, Clone)]
pub struct BandedPencil {
    params: JacobiWeightParams,
    norms: NormSequence,
    g: UpperBanded,
    factor: UpperBanded,
    symmetrized: SymmetricBands,
    band_scale: [f64; 3],
}

/// Bands of `G = N⁻¹ C₂ C₁`.
fn g_bands(params: &JacobiWeightParams, n: usize) -> UpperBanded {
    let (a, b, s) = (params.alpha(), params.beta(), params.sum());
    let diag = (0..n).map(|k| 1.0 / (k as f64 + 1.0)).collect();
    // (C₂C₁)_{k,k+1} = c2_{k+1} - c1_{k+1} = 2(k+1)(α-β) / ((2k+s+2)(2k+s+4))
    let first = (0..n.saturating_sub(1))
        .map(|k| {
            let m = 2.0 * k as f64 + s;
            2.0 * (a - b) / ((m + 2.0) * (m + 4.0))
        })
        .collect();
    let second = (0..n.saturating_sub(2))
        .map(|k| -c2_coefficient(params, k + 1) * c1_coefficient(params, k + 2) / (k as f64 + 1.0))
        .collect();
    UpperBanded { diag, first, second }
}

/// Assemble the pencil of size `n`.
pub fn build_pencil(params: &JacobiWeightParams, n: usize) -> Result<BandedPencil> {
    check_size(n)?;
    let norms = norm_sequence(params, n)?;
    let g = g_bands(params, n);
    let ratio = |k: usize| norms.ratio(k);
    let factor = UpperBanded {
        diag: (0..n).map(|k| ratio(k).sqrt() * g.diag[k]).collect(),
        first: g.first.clone(),
        second: (0..n.saturating_sub(2)).map(|k| g.second[k] / ratio(k + 1).sqrt()).collect(),
    };
    let symmetrized = factor.gram();
    Ok(BandedPencil {
        params: *params,
        norms,
        g,
        factor,
        symmetrized,
        band_scale: [1.0; 3],
    })
}

impl BandedPencil {
    pub fn params(&self) -> &JacobiWeightParams {
        &self.params
    }

    pub fn size(&self) -> usize {
        self.g.size()
    }

    /// `d_0..=d_n`.
    pub fn norms(&self) -> &NormSequence {
        &self.norms
    }

    /// `G = N⁻¹ C₂ C₁`, mapping `v` to `u`.
    pub fn g(&self) -> &UpperBanded {
        &self.g
    }

    /// `H` with `B = HᵀH`; `M_n = 1 / σ_min(H)`.
    pub fn factor(&self) -> &UpperBanded {
        &self.factor
    }

    /// `B = D^{-1/2} A D^{-1/2}`.
    pub fn symmetrized(&self) -> &SymmetricBands {
        &self.symmetrized
    }

    /// `true` if a band has been rescaled with [`Self::with_scaled_band`].
    pub fn is_perturbed(&self) -> bool {
        self.band_scale != [1.0; 3]
    }

    /// Multipliers applied to the diagonal, first and second bands of `A`.
    pub fn band_scales(&self) -> [f64; 3] {
        self.band_scale
    }

    /// Copy of this pencil with one band of `A` multiplied by `factor`.
    ///
    /// Test hook for negative controls; the factor `H` is left untouched.
    pub fn with_scaled_band(&self, band: Band, factor: f64) -> Self {
        let mut out = self.clone();
        for x in out.symmetrized.band_mut(band).iter_mut() {
            *x *= factor;
        }
        out.band_scale[band as usize] *= factor;
        out
    }

    /// Raw `D = diag(d_0 … d_{n-1})`.
    pub fn raw_d(&self) -> Result<Vec<f64>> {
        (0..self.size()).map(|k| self.norms.value(k)).collect()
    }

    /// Raw `A = Gᵀ diag(d_1 … d_n) G`; fails once the `d_k` underflow.
    pub fn raw_a(&self) -> Result<SymmetricBands> {
        let n = self.size();
        let root: Vec<f64> = (1..=n)
            .map(|k| self.norms.value(k).map(f64::sqrt))
            .collect::<Result<_>>()?;
        let weighted = UpperBanded {
            diag: (0..n).map(|k| root[k] * self.g.diag[k]).collect(),
            first: (0..n.saturating_sub(1)).map(|k| root[k] * self.g.first[k]).collect(),
            second: (0..n.saturating_sub(2)).map(|k| root[k] * self.g.second[k]).collect(),
        };
        let mut a = weighted.gram();
        for (band, scale) in Band::ALL.into_iter().zip(self.band_scale) {
            if scale != 1.0 {
                for x in a.band_mut(band).iter_mut() {
                    *x *= scale;
                }
            }
        }
        Ok(a)
    }

    /// `(A - λD) v` in raw units.
    pub fn apply_operator(&self, lambda: f64, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), v.len())?;
        let a = self.raw_a()?;
        let d = self.raw_d()?;
        let mut out = a.apply(v)?;
        for ((o, dk), vk) in out.iter_mut().zip(&d).zip(v) {
            *o -= lambda * dk * vk;
        }
        Ok(out)
    }

    /// `(B - μI) w` in symmetrized units.
    pub fn apply_symmetrized(&self, mu: f64, w: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.symmetrized.apply(w)?;
        for (o, x) in out.iter_mut().zip(w) {
            *o -= mu * x;
        }
        Ok(out)
    }

    /// Plain-text dump: the three bands of `A` and the diagonal of `D`, one per line.
    pub fn write_banded<W: Write>(&self, mut out: W) -> io::Result<()> {
        let a = self.raw_a().map_err(io::Error::other)?;
        let d = self.raw_d().map_err(io::Error::other)?;
        for line in [&a.diag, &a.first, &a.second, &d] {
            let text: Vec<String> = line.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(out, "{}", text.join(" "))?;
        }
        Ok(())
    }
}
