//! Truncated two-mode Fock-space states.
//!
//! Amplitudes are stored densely, row-major in `(m, n)` with
//! `0 <= m, n <= cutoff`, where `m` counts photons in mode A and `n` in mode B.
//! Nothing here assumes normalization; callers that renormalize get the
//! discarded tail weight back alongside the new state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for the "normalized" flag on pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Eigenvalues in `[-PSD_TOL, 0)` are clipped to zero; anything below is rejected.
pub const PSD_TOL: f64 = 1e-10;
/// Elementwise Hermiticity tolerance, scaled by the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

/// Two-mode pure state `Σ α_{m,n} |m, n⟩`, possibly un-normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState2 {
    cutoff: usize,
    amps: Vec<C64>,
}

impl PureState2 {
    pub fn zeros(cutoff: usize) -> Self {
        let dim = cutoff + 1;
        Self {
            cutoff,
            amps: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn vacuum(cutoff: usize) -> Self {
        let mut s = Self::zeros(cutoff);
        s.amps[0] = C64::new(1.0, 0.0);
        s
    }

    pub fn from_fn(cutoff: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let dim = cutoff + 1;
        let mut amps = Vec::with_capacity(dim * dim);
        for m in 0..dim {
            for n in 0..dim {
                amps.push(f(m, n));
            }
        }
        Self { cutoff, amps }
    }

    /// Row-major amplitude table of length `(cutoff + 1)^2`.
    pub fn from_amplitudes(cutoff: usize, amps: Vec<C64>) -> Result<Self> {
        let dim = cutoff + 1;
        if amps.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes for cutoff {cutoff}, got {}",
                dim * dim,
                amps.len()
            )));
        }
        Ok(Self { cutoff, amps })
    }

    /// Schmidt-form state `Σ c_n |n, n⟩`; the cutoff is `coeffs.len() - 1`.
    pub fn from_diagonal(coeffs: &[f64]) -> Self {
        let cutoff = coeffs.len().saturating_sub(1);
        let mut s = Self::zeros(cutoff);
        for (n, &c) in coeffs.iter().enumerate() {
            s.set(n, n, C64::new(c, 0.0));
        }
        s
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    #[inline]
    fn index(&self, m: usize, n: usize) -> usize {
        m * (self.cutoff + 1) + n
    }

    /// Amplitude at `(m, n)`; zero outside the table.
    pub fn get(&self, m: usize, n: usize) -> C64 {
        if m > self.cutoff || n > self.cutoff {
            C64::new(0.0, 0.0)
        } else {
            self.amps[self.index(m, n)]
        }
    }

    /// Panics when `(m, n)` lies beyond the cutoff.
    pub fn set(&mut self, m: usize, n: usize, value: C64) {
        assert!(
            m <= self.cutoff && n <= self.cutoff,
            "index ({m}, {n}) beyond cutoff {}",
            self.cutoff
        );
        let i = self.index(m, n);
        self.amps[i] = value;
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// `(m, n, α_{m,n})` for every nonzero amplitude in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        let dim = self.dim();
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
            .map(move |(i, &a)| (i / dim, i % dim, a))
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= NORM_TOL
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            cutoff: self.cutoff,
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::DegenerateState);
        }
        Ok(self.scaled(C64::new(1.0 / n.sqrt(), 0.0)))
    }

    /// Zero-pads (or keeps) the table up to `cutoff`. Never discards amplitudes.
    pub fn padded(&self, cutoff: usize) -> Self {
        if cutoff <= self.cutoff {
            return self.clone();
        }
        Self::from_fn(cutoff, |m, n| self.get(m, n))
    }

    /// Restricts to `cutoff` and returns the discarded squared weight.
    pub fn truncated(&self, cutoff: usize) -> (Self, f64) {
        if cutoff >= self.cutoff {
            return (self.clone(), 0.0);
        }
        let kept = Self::from_fn(cutoff, |m, n| self.get(m, n));
        let tail = (self.norm_sq() - kept.norm_sq()).max(0.0);
        (kept, tail)
    }

    /// Smallest cutoff that still holds every nonzero amplitude.
    pub fn support_cutoff(&self) -> usize {
        self.nonzero().map(|(m, n, _)| m.max(n)).max().unwrap_or(0)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|n| self.get(n, n)).collect()
    }

    /// Reduced single-mode density operator, normalized to unit trace.
    pub fn reduce(&self, keep: Mode) -> Result<ReducedState1> {
        let norm = self.norm_sq();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateState);
        }
        let dim = self.dim();
        let mut rho = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += match keep {
                        Mode::A => self.get(i, k) * self.get(j, k).conj(),
                        Mode::B => self.get(k, i) * self.get(k, j).conj(),
                    };
                }
                rho[(i, j)] = acc / norm;
            }
        }
        Ok(ReducedState1 {
            cutoff: self.cutoff,
            matrix: rho,
        })
    }
}

/// `Σ conj(a_{m,n}) b_{m,n}`; the smaller table is treated as zero-padded.
pub fn overlap(a: &PureState2, b: &PureState2) -> C64 {
    let cutoff = a.cutoff.min(b.cutoff);
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..=cutoff {
        for n in 0..=cutoff {
            acc += a.get(m, n).conj() * b.get(m, n);
        }
    }
    acc
}

/// Real non-negative Schmidt coefficients `α_{n,n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtDiagonal {
    coeffs: Vec<f64>,
    unit_leading: bool,
}

impl SchmidtDiagonal {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("empty Schmidt sequence".into()));
        }
        if let Some(bad) = coeffs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "Schmidt coefficients must be finite and non-negative, got {bad}"
            )));
        }
        let unit_leading = coeffs[0] == 1.0;
        Ok(Self {
            coeffs,
            unit_leading,
        })
    }

    /// `(1, λ)`, the two-term seed family.
    pub fn seed(lambda: f64) -> Result<Self> {
        Self::new(vec![1.0, lambda])
    }

    /// `α_n = λ^n` for `n <= cutoff`.
    pub fn geometric(lambda: f64, cutoff: usize) -> Result<Self> {
        Self::new((0..=cutoff).map(|n| lambda.powi(n as i32)).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Whether `α_{0,0} = 1` holds exactly.
    pub fn has_unit_leading(&self) -> bool {
        self.unit_leading
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Rescales so that `α_{0,0} = 1`.
    pub fn with_unit_leading(&self) -> Result<Self> {
        let lead = self.coeffs[0];
        if lead == 0.0 {
            return Err(Error::ProtocolDegenerate);
        }
        let mut coeffs: Vec<f64> = self.coeffs.iter().map(|c| c / lead).collect();
        coeffs[0] = 1.0;
        Ok(Self {
            coeffs,
            unit_leading: true,
        })
    }

    pub fn truncated(&self, cutoff: usize) -> (Self, f64) {
        if cutoff >= self.cutoff() {
            return (self.clone(), 0.0);
        }
        let tail = self.coeffs[cutoff + 1..].iter().map(|c| c * c).sum();
        (
            Self {
                coeffs: self.coeffs[..=cutoff].to_vec(),
                unit_leading: self.unit_leading,
            },
            tail,
        )
    }

    pub fn to_pure(&self) -> PureState2 {
        PureState2::from_diagonal(&self.coeffs)
    }

    /// Shannon entropy (bits) of the normalized squared coefficients.
    pub fn entanglement_entropy(&self) -> Result<f64> {
        let total = self.norm_sq();
        if total <= 0.0 {
            return Err(Error::DegenerateState);
        }
        Ok(self
            .coeffs
            .iter()
            .map(|c| c * c / total)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum())
    }
}

/// Two-mode density operator on the truncated space, index `m * (cutoff + 1) + n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState2 {
    cutoff: usize,
    matrix: DMatrix<C64>,
}

impl MixedState2 {
    /// Validates shape and Hermiticity.
    pub fn new(cutoff: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let d = (cutoff + 1) * (cutoff + 1);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidDensityOperator(format!(
                "expected {d}x{d} matrix for cutoff {cutoff}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_hermitian(&matrix)?;
        Ok(Self { cutoff, matrix })
    }

    /// Builds without validation; used where Hermiticity holds by construction.
    pub(crate) fn from_matrix_unchecked(cutoff: usize, matrix: DMatrix<C64>) -> Self {
        Self { cutoff, matrix }
    }

    /// `|ψ⟩⟨ψ|` without normalization.
    pub fn from_pure(state: &PureState2) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self {
            cutoff: state.cutoff(),
            matrix: &v * v.adjoint(),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    #[inline]
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * (self.cutoff + 1) + n
    }

    /// `⟨m, n| ρ |m', n'⟩`, zero outside the table.
    pub fn get(&self, m: usize, n: usize, mp: usize, np: usize) -> C64 {
        let c = self.cutoff;
        if m > c || n > c || mp > c || np > c {
            return C64::new(0.0, 0.0);
        }
        self.matrix[(self.index(m, n), self.index(mp, np))]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::DegenerateState);
        }
        Ok(Self {
            cutoff: self.cutoff,
            matrix: &self.matrix / C64::new(t, 0.0),
        })
    }

    /// `tr(ρ²) / tr(ρ)²`.
    pub fn purity(&self) -> f64 {
        let t = self.trace();
        let sq: f64 = self.matrix.iter().map(|z| z.norm_sqr()).sum();
        sq / (t * t)
    }

    pub fn padded(&self, cutoff: usize) -> Self {
        if cutoff <= self.cutoff {
            return self.clone();
        }
        let d = (cutoff + 1) * (cutoff + 1);
        let mut m = DMatrix::zeros(d, d);
        let old = self.cutoff + 1;
        let new = cutoff + 1;
        for i in 0..old * old {
            for j in 0..old * old {
                let (a, b) = (i / old, i % old);
                let (c, e) = (j / old, j % old);
                m[(a * new + b, c * new + e)] = self.matrix[(i, j)];
            }
        }
        Self { cutoff, matrix: m }
    }

    /// Restricts to `cutoff`, returning the discarded trace.
    pub fn truncated(&self, cutoff: usize) -> (Self, f64) {
        if cutoff >= self.cutoff {
            return (self.clone(), 0.0);
        }
        let new = cutoff + 1;
        let d = new * new;
        let m = DMatrix::from_fn(d, d, |i, j| {
            self.get(i / new, i % new, j / new, j % new)
        });
        let kept = Self {
            cutoff,
            matrix: m,
        };
        let tail = (self.trace() - kept.trace()).max(0.0);
        (kept, tail)
    }

    /// Partial trace over the other mode, normalized to unit trace.
    pub fn reduce(&self, keep: Mode) -> Result<ReducedState1> {
        let t = self.trace();
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::DegenerateState);
        }
        let dim = self.cutoff + 1;
        let rho = DMatrix::from_fn(dim, dim, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dim {
                acc += match keep {
                    Mode::A => self.get(i, k, j, k),
                    Mode::B => self.get(k, i, k, j),
                };
            }
            acc / t
        });
        Ok(ReducedState1 {
            cutoff: self.cutoff,
            matrix: rho,
        })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

/// Single-mode reduced density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState1 {
    cutoff: usize,
    matrix: DMatrix<C64>,
}

impl ReducedState1 {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidDensityOperator("matrix must be square".into()));
        }
        check_hermitian(&matrix)?;
        Ok(Self {
            cutoff: matrix.nrows() - 1,
            matrix,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(self)
    }
}

/// `-Σ λ log₂ λ` over the eigenvalues, in bits.
pub fn von_neumann_entropy(rho: &ReducedState1) -> Result<f64> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDensityOperator(format!(
            "trace {tr} is not 1"
        )));
    }
    let mut s = 0.0;
    for lam in rho.eigenvalues() {
        if lam < -PSD_TOL {
            return Err(Error::InvalidDensityOperator(format!(
                "negative eigenvalue {lam:e}"
            )));
        }
        if lam > 0.0 {
            s -= lam * lam.log2();
        }
    }
    Ok(s.max(0.0))
}

/// `‖a − b‖₁`, the sum of absolute eigenvalues of the difference (no ½).
pub fn trace_norm_distance(a: &MixedState2, b: &MixedState2) -> Result<f64> {
    if a.cutoff != b.cutoff {
        return Err(Error::CutoffMismatch(a.cutoff, b.cutoff));
    }
    let diff = &a.matrix - &b.matrix;
    Ok(hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum())
}

fn check_hermitian(m: &DMatrix<C64>) -> Result<()> {
    let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                return Err(Error::InvalidDensityOperator(format!(
                    "not Hermitian at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
///
/// `A + iB` is embedded as the real symmetric `[[A, −B], [B, A]]`, whose
/// spectrum is that of `A + iB` with every eigenvalue doubled. The real solver
/// is used because the complex one can return NaN on some inputs.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    let mut real = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            real[(i, j)] = z.re;
            real[(i + n, j + n)] = z.re;
            real[(i, j + n)] = -z.im;
            real[(i + n, j)] = z.im;
        }
    }
    let mut eig: Vec<f64> = real.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}
