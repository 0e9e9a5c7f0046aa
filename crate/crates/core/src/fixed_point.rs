//! Fixed points of the Gaussification map.
//!
//! A fixed point is `Q̂(Γ)|0,0⟩` with `Q̂(Γ) = exp[½ (â†)ᵀ Γ â†]` for a complex
//! symmetric 2×2 matrix `Γ`. It is normalizable iff the spectral norm of `Γ`
//! is below one. The Takagi factorization `UᵀΓU = Δ` splits the limit into
//! two single-mode squeezed vacua in the rotated modes `Uâ`.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{PureState2, C64};
use crate::math::ln_factorials;

/// Above this many total quanta the double sums switch to log-space.
const LOG_SPACE_ABOVE: usize = 30;

/// Complex symmetric 2×2 matrix `[[γ₁, γ₁₂], [γ₁₂, γ₂]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaMatrix {
    pub g1: C64,
    pub g2: C64,
    pub g12: C64,
}

impl GammaMatrix {
    pub fn new(g1: C64, g2: C64, g12: C64) -> Self {
        Self { g1, g2, g12 }
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Self::new(z, z, z)
    }

    /// `[[0, λ], [λ, 0]]`, the two-mode squeezed family.
    pub fn antidiagonal(lambda: f64) -> Self {
        let z = C64::new(0.0, 0.0);
        Self::new(z, z, C64::new(lambda, 0.0))
    }

    pub fn to_matrix(&self) -> Matrix2<C64> {
        Matrix2::new(self.g1, self.g12, self.g12, self.g2)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.g1 * s, self.g2 * s, self.g12 * s)
    }
}

/// Reads `Γ` off the low-order coefficients of a state with `α_{0,0} ≠ 0`,
/// using `β = α / α_{0,0}`.
pub fn gamma_from_state(alpha: &PureState2) -> Result<GammaMatrix> {
    let a00 = alpha.get(0, 0);
    if a00.norm() == 0.0 {
        return Err(Error::NoGaussianLimit);
    }
    let beta = |m, n| alpha.get(m, n) / a00;
    let sqrt2 = std::f64::consts::SQRT_2;
    Ok(GammaMatrix {
        g1: beta(2, 0) * sqrt2 - beta(1, 0) * beta(1, 0),
        g2: beta(0, 2) * sqrt2 - beta(0, 1) * beta(0, 1),
        g12: beta(1, 1) - beta(1, 0) * beta(0, 1),
    })
}

/// Largest singular value, from the SVD.
pub fn spectral_norm(gamma: &GammaMatrix) -> f64 {
    gamma
        .to_matrix()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn is_normalizable(gamma: &GammaMatrix) -> bool {
    spectral_norm(gamma) < 1.0
}

/// Coefficients `⟨m,n|Q̂(Γ)|0,0⟩` up to `cutoff`, with `α_{0,0} = 1`.
///
/// Errors with [`Error::NotNormalizable`] when `‖Γ‖_∞ >= 1`; use
/// [`limit_coefficients_unchecked`] to evaluate the formal series anyway.
pub fn limit_coefficients(gamma: &GammaMatrix, cutoff: usize) -> Result<PureState2> {
    let norm = spectral_norm(gamma);
    if norm >= 1.0 {
        return Err(Error::NotNormalizable(norm));
    }
    Ok(limit_coefficients_unchecked(gamma, cutoff))
}

pub fn limit_coefficients_unchecked(gamma: &GammaMatrix, cutoff: usize) -> PureState2 {
    let lf = ln_factorials(cutoff.max(1));
    let half1 = gamma.g1 * 0.5;
    let half2 = gamma.g2 * 0.5;
    PureState2::from_fn(cutoff, |i, j| {
        if (i + j) % 2 == 1 {
            return C64::new(0.0, 0.0);
        }
        // Even-even entries pair γ₁₂^{2s}; odd-odd entries γ₁₂^{2s+1}.
        let odd = i % 2;
        let (m, n) = (i / 2, j / 2);
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..=m.min(n) {
            let k12 = 2 * s + odd;
            let (k1, k2) = (m - s, n - s);
            let ln_w = 0.5 * (lf[i] + lf[j]) - lf[k12] - lf[k1] - lf[k2];
            let term = if i + j <= LOG_SPACE_ABOVE {
                ipow(gamma.g12, k12) * ipow(half1, k1) * ipow(half2, k2) * ln_w.exp()
            } else {
                log_space_product(&[(gamma.g12, k12), (half1, k1), (half2, k2)], ln_w)
            };
            acc += term;
        }
        acc
    })
}

fn ipow(z: C64, k: usize) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for _ in 0..k {
        acc *= z;
    }
    acc
}

/// `exp(ln_w) · Π zᵢ^{kᵢ}` accumulated as magnitude logs plus phases.
fn log_space_product(factors: &[(C64, usize)], ln_w: f64) -> C64 {
    let mut ln_mag = ln_w;
    let mut phase = 0.0;
    for &(z, k) in factors {
        if k == 0 {
            continue;
        }
        let r = z.norm();
        if r == 0.0 {
            return C64::new(0.0, 0.0);
        }
        ln_mag += k as f64 * r.ln();
        phase += k as f64 * z.arg();
    }
    C64::from_polar(ln_mag.exp(), phase)
}

/// `⟨0,0|Q̂(Γ)†Q̂(Γ)|0,0⟩ = det(I − Γ†Γ)^{−1/2}` for a normalizable `Γ`.
pub fn limit_norm_sq(gamma: &GammaMatrix) -> Result<f64> {
    let t = takagi(gamma);
    let (d1, d2) = (t.delta[0], t.delta[1]);
    if d1 >= 1.0 {
        return Err(Error::NotNormalizable(d1));
    }
    Ok(1.0 / ((1.0 - d1 * d1) * (1.0 - d2 * d2)).sqrt())
}

/// `UᵀΓU = diag(Δ)` with unitary `U` and `Δ` sorted descending.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TakagiFactorization {
    pub u: Matrix2<C64>,
    pub delta: [f64; 2],
}

impl TakagiFactorization {
    /// `UᵀΓU`, which should equal `diag(Δ)`.
    pub fn recompose(&self, gamma: &GammaMatrix) -> Matrix2<C64> {
        self.u.transpose() * gamma.to_matrix() * self.u
    }
}

/// Takagi factorization of a complex symmetric 2×2 matrix.
///
/// With `Γ = P + iQ` and `u = x + iy`, the condition `Γu = σ ū` is the real
/// symmetric eigenproblem `[[P, −Q], [−Q, −P]] (x, y) = σ (x, y)`, whose
/// spectrum is `±σ₁, ±σ₂`. Eigenvectors for the non-negative half give the
/// columns of `U`; a zero singular value takes the complex complement of the
/// first column.
pub fn takagi(gamma: &GammaMatrix) -> TakagiFactorization {
    let g = gamma.to_matrix();
    let p = g.map(|z| z.re);
    let q = g.map(|z| z.im);
    let mut m = Matrix4::<f64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = p[(i, j)];
            m[(i, j + 2)] = -q[(i, j)];
            m[(i + 2, j)] = -q[(i, j)];
            m[(i + 2, j + 2)] = -p[(i, j)];
        }
    }
    let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return TakagiFactorization {
            u: Matrix2::identity(),
            delta: [0.0, 0.0],
        };
    }

    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let column = |k: usize| {
        let v = eig.eigenvectors.column(k);
        nalgebra::Vector2::new(C64::new(v[0], v[2]), C64::new(v[1], v[3]))
    };
    let u1 = column(order[0]).normalize();
    let sigma1 = eig.eigenvalues[order[0]].max(0.0);
    let sigma2_raw = eig.eigenvalues[order[1]];
    let tiny = 1e-14 * scale;

    let (u2, sigma2) = if sigma2_raw > tiny {
        // Orthogonal in R⁴ and to the −σ partner of u1, hence unitary-orthogonal.
        let mut v = column(order[1]);
        v -= u1 * u1.dotc(&v);
        (v.normalize(), sigma2_raw)
    } else {
        // Kernel of Γ is the complex complement of u1.
        (
            nalgebra::Vector2::new(-u1[1].conj(), u1[0].conj()),
            0.0,
        )
    };

    let mut u = Matrix2::from_columns(&[u1, u2]);
    // Fix residual phases so the diagonal of UᵀΓU is real non-negative.
    let d = u.transpose() * g * u;
    for k in 0..2 {
        let z = d[(k, k)];
        if z.norm() > tiny {
            let phase = C64::from_polar(1.0, -0.5 * z.arg());
            for r in 0..2 {
                u[(r, k)] *= phase;
            }
        }
    }
    TakagiFactorization {
        u,
        delta: [sigma1, sigma2.max(0.0)],
    }
}

/// Two-mode squeezing parameters `Z` of the limit state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezingParams {
    pub z: Matrix2<C64>,
}

impl SqueezingParams {
    pub fn zeta1(&self) -> C64 {
        self.z[(0, 0)]
    }

    pub fn zeta2(&self) -> C64 {
        self.z[(1, 1)]
    }

    pub fn zeta12(&self) -> C64 {
        self.z[(0, 1)]
    }

    /// Singular values of `Z`, descending.
    pub fn singular_values(&self) -> [f64; 2] {
        let sv = self.z.singular_values();
        let (a, b) = (sv[0], sv[1]);
        if a >= b {
            [a, b]
        } else {
            [b, a]
        }
    }
}

/// `Z = conj(U) · artanh(Δ) · U†` from the Takagi factors of `Γ`.
///
/// The overall sign of `Z` is convention dependent; only its singular values
/// `artanh(Δ)` are physical.
pub fn squeezing_params(gamma: &GammaMatrix) -> Result<SqueezingParams> {
    let t = takagi(gamma);
    if t.delta[0] >= 1.0 {
        return Err(Error::NotNormalizable(t.delta[0]));
    }
    let d = Matrix2::new(
        C64::new(t.delta[0].atanh(), 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(t.delta[1].atanh(), 0.0),
    );
    let z = t.u.conjugate() * d * t.u.adjoint();
    Ok(SqueezingParams { z })
}
