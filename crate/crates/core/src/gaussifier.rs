//! The Gaussification map and its iteration driver.
//!
//! One step takes two identical copies, mixes them locally at 50:50 beam
//! splitters and keeps the residue when both detectors report the vacuum.
//! On coefficients this is the quadratic map
//!
//! ```text
//! α'_{m,n} = 2^{−(m+n)/2} Σ_{r,s} (−1)^{(m+n)−(r+s)} α_{r,s} α_{m−r,n−s} [C(m,r) C(n,s)]^{1/2}
//! ```
//!
//! which on Schmidt-diagonal inputs reduces to
//! `α'_n = 2^{−n} Σ_r C(n,r) α_r α_{n−r}`.
//!
//! Every output coefficient depends only on inputs with smaller or equal
//! indices, so truncating a step at any cutoff leaves the retained
//! coefficients exact; only the norm (and hence the success probability)
//! needs the full output.

use crate::error::{Error, Result};
use crate::fixed_point::{self, GammaMatrix};
use crate::fock::{overlap, MixedState2, PureState2, SchmidtDiagonal, C64};
use crate::math::{binomials, parity_sign, sqrt_binomials};

/// Schmidt-diagonal form of the map. The output has `2L − 1` coefficients.
pub fn schmidt_step(alpha: &SchmidtDiagonal) -> Result<SchmidtDiagonal> {
    let a = alpha.coeffs();
    if a[0] == 0.0 {
        return Err(Error::ProtocolDegenerate);
    }
    let len = a.len();
    let out_len = 2 * len - 1;
    let binom = binomials(out_len - 1);
    let mut out = Vec::with_capacity(out_len);
    let mut pow2 = 1.0f64;
    for n in 0..out_len {
        let lo = n.saturating_sub(len - 1);
        let hi = n.min(len - 1);
        let mut acc = 0.0;
        for r in lo..=hi {
            acc += binom[n][r] * a[r] * a[n - r];
        }
        out.push(acc / pow2);
        pow2 *= 2.0;
    }
    SchmidtDiagonal::new(out)
}

/// General two-mode form of the map. The output cutoff is twice the input's.
pub fn general_step(alpha: &PureState2) -> PureState2 {
    let c = alpha.cutoff();
    let oc = 2 * c;
    let sb = sqrt_binomials(oc);
    let scale: Vec<f64> = (0..=2 * oc).map(|k| 0.5f64.powf(k as f64 / 2.0)).collect();
    PureState2::from_fn(oc, |m, n| {
        let mut acc = C64::new(0.0, 0.0);
        for r in m.saturating_sub(c)..=m.min(c) {
            for s in n.saturating_sub(c)..=n.min(c) {
                let w = parity_sign(m + n - r - s) * sb[m][r] * sb[n][s];
                acc += alpha.get(r, s) * alpha.get(m - r, n - s) * w;
            }
        }
        acc * scale[m + n]
    })
}

/// `⟨ψ'|ψ'⟩ / ⟨ψ|ψ⟩²`, the probability that both detectors see the vacuum.
pub fn step_probability(before: &PureState2, after: &PureState2) -> Result<f64> {
    let nb = before.norm_sq();
    if nb <= 0.0 {
        return Err(Error::DegenerateState);
    }
    Ok(after.norm_sq() / (nb * nb))
}

/// `|⟨ψ|φ⟩|² / (⟨ψ|ψ⟩⟨φ|φ⟩)`.
pub fn fidelity_to(state: &PureState2, target: &PureState2) -> Result<f64> {
    let (ns, nt) = (state.norm_sq(), target.norm_sq());
    if ns <= 0.0 || nt <= 0.0 {
        return Err(Error::DegenerateState);
    }
    Ok((overlap(state, target).norm_sqr() / (ns * nt)).min(1.0))
}

/// `(i₁, i₂, w)` such that `α'_o = Σ w α_{i₁} α_{i₂}` for output index `o`.
type Contribution = (usize, usize, f64);

fn contributions(in_cutoff: usize, m: usize, n: usize, sb: &[Vec<f64>]) -> Vec<Contribution> {
    let dim = in_cutoff + 1;
    let scale = 0.5f64.powf((m + n) as f64 / 2.0);
    let mut out = Vec::new();
    for r in m.saturating_sub(in_cutoff)..=m.min(in_cutoff) {
        for s in n.saturating_sub(in_cutoff)..=n.min(in_cutoff) {
            let w = parity_sign(m + n - r - s) * sb[m][r] * sb[n][s] * scale;
            out.push((r * dim + s, (m - r) * dim + (n - s), w));
        }
    }
    out
}

/// Density-operator form of the step: evolves `ρ ⊗ ρ` through the same
/// beam-splitter pair, projects the measured ports onto the vacuum and keeps
/// `cutoff` photons per mode. Returns the un-normalized output and the trace
/// of the untruncated output (the vacuum-branch weight).
pub fn mixed_step_truncated(rho: &MixedState2, cutoff: usize) -> Result<(MixedState2, f64)> {
    let tr = rho.trace();
    if tr <= 0.0 || !tr.is_finite() {
        return Err(Error::DegenerateState);
    }
    let c = rho.cutoff();
    let full = 2 * c;
    let oc = cutoff.min(full);
    let sb = sqrt_binomials(full);
    let m_in = rho.matrix();

    let lists: Vec<Vec<Contribution>> = (0..=full)
        .flat_map(|m| (0..=full).map(move |n| (m, n)))
        .map(|(m, n)| contributions(c, m, n, &sb))
        .collect();
    let list = |m: usize, n: usize| &lists[m * (full + 1) + n];

    let element = |a: &[Contribution], b: &[Contribution]| {
        let mut acc = C64::new(0.0, 0.0);
        for &(i1, i2, w) in a {
            for &(j1, j2, wp) in b {
                acc += m_in[(i1, j1)] * m_in[(i2, j2)] * (w * wp);
            }
        }
        acc
    };

    let mut full_trace = 0.0;
    for m in 0..=full {
        for n in 0..=full {
            let l = list(m, n);
            full_trace += element(l, l).re;
        }
    }

    let d = (oc + 1) * (oc + 1);
    let mut out = nalgebra::DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        let li = list(i / (oc + 1), i % (oc + 1));
        for j in i..d {
            let lj = list(j / (oc + 1), j % (oc + 1));
            let v = element(li, lj);
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
        out[(i, i)].im = 0.0;
    }
    Ok((MixedState2::from_matrix_unchecked(oc, out), full_trace))
}

/// [`mixed_step_truncated`] without truncation (output cutoff `2c`).
pub fn mixed_step(rho: &MixedState2) -> Result<MixedState2> {
    mixed_step_truncated(rho, 2 * rho.cutoff()).map(|(s, _)| s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolOptions {
    /// Per-mode photon cutoff the iterates may grow to before truncation.
    pub cutoff_ceiling: usize,
    /// Largest tolerated fraction of an output's weight discarded by truncation.
    pub tail_tol: f64,
    /// Divergence threshold on the squared norm with `α_{0,0} = 1`.
    pub divergence_norm: f64,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            cutoff_ceiling: 64,
            tail_tol: 1e-10,
            divergence_norm: 1e6,
        }
    }
}

/// A protocol iterate on either the Schmidt fast path or the general path.
#[derive(Clone, Debug, PartialEq)]
pub enum Iterate {
    Schmidt(SchmidtDiagonal),
    Pure(PureState2),
}

impl Iterate {
    pub fn to_pure(&self) -> PureState2 {
        match self {
            Iterate::Schmidt(s) => s.to_pure(),
            Iterate::Pure(p) => p.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationReport {
    pub step: usize,
    pub step_probability: f64,
    /// Product of the step probabilities so far: one measurement chain succeeds.
    pub cumulative_probability: f64,
    /// `P_i = P_{i−1}² p_i`: every pair in the binary tree of copies succeeds.
    pub cumulative_tree_probability: f64,
    /// Squared norm of the raw step output, for an input with `α_{0,0} = 1`
    /// (Schmidt path) or unit norm (general and mixed paths).
    pub norm_sq: f64,
    pub fidelity: Option<f64>,
    /// Fraction of the raw output weight removed by truncation.
    pub tail_mass: f64,
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub final_state: Iterate,
    pub reports: Vec<IterationReport>,
}

struct Bookkeeping {
    product: f64,
    tree: f64,
    reports: Vec<IterationReport>,
}

impl Bookkeeping {
    fn new() -> Self {
        Self {
            product: 1.0,
            tree: 1.0,
            reports: Vec::new(),
        }
    }

    fn push(&mut self, p: f64, norm_sq: f64, fidelity: Option<f64>, tail_mass: f64) {
        self.product *= p;
        self.tree = self.tree * self.tree * p;
        self.reports.push(IterationReport {
            step: self.reports.len() + 1,
            step_probability: p,
            cumulative_probability: self.product,
            cumulative_tree_probability: self.tree,
            norm_sq,
            fidelity,
            tail_mass,
        });
    }
}

/// Applies the map `iterations` times, renormalizing after each step.
pub fn run_protocol(initial: Iterate, iterations: usize, opts: &ProtocolOptions) -> Result<ProtocolRun> {
    match initial {
        Iterate::Schmidt(s) => run_schmidt(s, iterations, opts),
        Iterate::Pure(p) => run_general(p, iterations, opts),
    }
}

fn run_schmidt(initial: SchmidtDiagonal, iterations: usize, opts: &ProtocolOptions) -> Result<ProtocolRun> {
    if initial.coeffs()[0] == 0.0 {
        return Err(Error::ProtocolDegenerate);
    }
    let mut cur = initial.with_unit_leading()?;
    let lambda = cur.coeffs().get(1).copied().unwrap_or(0.0);
    let limit_norm = (lambda < 1.0).then(|| 1.0 / (1.0 - lambda * lambda));
    let mut book = Bookkeeping::new();

    for step in 1..=iterations {
        let raw = schmidt_step(&cur)?;
        let n_raw = raw.norm_sq();
        let p = n_raw / (cur.norm_sq() * cur.norm_sq());
        let (kept, tail) = raw.truncated(opts.cutoff_ceiling);
        let tail_frac = tail / n_raw;
        if tail_frac > opts.tail_tol {
            return Err(Error::TruncationExceeded {
                step,
                tail: tail_frac,
                tolerance: opts.tail_tol,
            });
        }
        // α'_{0,0} = α_{0,0}² = 1, so the unit-leading convention is preserved.
        cur = kept.with_unit_leading()?;
        let n = cur.norm_sq();
        if !n.is_finite() || n > opts.divergence_norm {
            return Err(Error::Diverged { step, norm_sq: n });
        }
        let fidelity = limit_norm.map(|ln| {
            let ov: f64 = cur
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, a)| a * lambda.powi(k as i32))
                .sum();
            (ov * ov / (n * ln)).min(1.0)
        });
        book.push(p, n_raw, fidelity, tail_frac);
    }
    Ok(ProtocolRun {
        final_state: Iterate::Schmidt(cur),
        reports: book.reports,
    })
}

fn run_general(initial: PureState2, iterations: usize, opts: &ProtocolOptions) -> Result<ProtocolRun> {
    let gamma = fixed_point::gamma_from_state(&initial)?;
    let limit_norm = fixed_point::limit_norm_sq(&gamma).ok();
    let mut cur = initial.normalized()?;
    let mut book = Bookkeeping::new();

    for step in 1..=iterations {
        let raw = general_step(&cur);
        let n_raw = raw.norm_sq();
        let p = step_probability(&cur, &raw)?;
        let target = raw.support_cutoff().min(opts.cutoff_ceiling);
        let (kept, tail) = raw.truncated(target);
        let tail_frac = if n_raw > 0.0 { tail / n_raw } else { 0.0 };
        if tail_frac > opts.tail_tol {
            return Err(Error::TruncationExceeded {
                step,
                tail: tail_frac,
                tolerance: opts.tail_tol,
            });
        }
        cur = kept.normalized()?;
        let a00 = cur.get(0, 0).norm_sqr();
        let unit_vacuum_norm = if a00 > 0.0 { 1.0 / a00 } else { f64::INFINITY };
        if unit_vacuum_norm > opts.divergence_norm {
            return Err(Error::Diverged {
                step,
                norm_sq: unit_vacuum_norm,
            });
        }
        let fidelity = limit_norm.map(|ln| limit_fidelity(&cur, &gamma, ln));
        book.push(p, n_raw, fidelity, tail_frac);
    }
    Ok(ProtocolRun {
        final_state: Iterate::Pure(cur),
        reports: book.reports,
    })
}

/// Fidelity against `Q̂(Γ)|0,0⟩`, normalized with its exact (untruncated) norm.
pub fn limit_fidelity(state: &PureState2, gamma: &GammaMatrix, limit_norm_sq: f64) -> f64 {
    let limit = fixed_point::limit_coefficients_unchecked(gamma, state.cutoff());
    (overlap(state, &limit).norm_sqr() / (state.norm_sq() * limit_norm_sq)).min(1.0)
}

#[derive(Clone, Debug)]
pub struct MixedRun {
    /// Unit-trace final state.
    pub final_state: MixedState2,
    pub reports: Vec<IterationReport>,
}

/// Iterates [`mixed_step_truncated`] on a density operator, keeping at most
/// `cutoff_ceiling` photons per mode. Truncation is reported, not rejected.
pub fn run_mixed_protocol(rho: &MixedState2, iterations: usize, cutoff_ceiling: usize) -> Result<MixedRun> {
    let mut cur = rho.normalized()?;
    let mut book = Bookkeeping::new();
    for _ in 0..iterations {
        let (kept, full_trace) = mixed_step_truncated(&cur, cutoff_ceiling)?;
        let tail = ((full_trace - kept.trace()) / full_trace).max(0.0);
        book.push(full_trace, full_trace, None, tail);
        cur = kept.normalized()?;
    }
    Ok(MixedRun {
        final_state: cur,
        reports: book.reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn schmidt_step_examples() {
        let v = SchmidtDiagonal::new(vec![1.0, 0.0, 0.0]).unwrap();
        let out = schmidt_step(&v).unwrap();
        assert_eq!(out.coeffs()[0], 1.0);
        assert!(out.coeffs()[1..].iter().all(|&x| x == 0.0));

        let out = schmidt_step(&SchmidtDiagonal::seed(0.5).unwrap()).unwrap();
        assert_eq!(out.coeffs(), &[1.0, 0.5, 0.125]);

        let g = SchmidtDiagonal::geometric(0.5, 20).unwrap();
        let out = schmidt_step(&g).unwrap();
        for n in 0..=20 {
            assert!((out.coeffs()[n] - 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn schmidt_step_degenerate() {
        let s = SchmidtDiagonal::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(schmidt_step(&s), Err(Error::ProtocolDegenerate));
    }

    #[test]
    fn general_step_examples() {
        let v = general_step(&PureState2::vacuum(2));
        assert_eq!(v.get(0, 0), c(1.0));
        assert!((v.norm_sq() - 1.0).abs() < 1e-15);

        let lam = 0.37;
        let out = general_step(&PureState2::from_diagonal(&[1.0, lam]));
        assert!((out.get(1, 1) - c(lam)).norm() < 1e-15);
        assert!((out.get(2, 2) - c(lam * lam / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn general_step_kills_odd_parity() {
        let s = PureState2::from_fn(3, |m, n| C64::new(0.1 * (m + 1) as f64, 0.05 * (n as f64 - 1.0)));
        let out = general_step(&s);
        for (m, n, a) in out.nonzero() {
            if (m + n) % 2 == 1 {
                assert!(a.norm() < 1e-14, "({m},{n}) = {a}");
            }
        }
    }

    #[test]
    fn step_probability_examples() {
        let v = PureState2::vacuum(1);
        assert_eq!(step_probability(&v, &general_step(&v)).unwrap(), 1.0);
        let before = PureState2::from_diagonal(&[1.0, 0.5]);
        let after = PureState2::from_diagonal(&[1.0, 0.5, 0.125]);
        assert!((step_probability(&before, &after).unwrap() - 0.81).abs() < 1e-15);
        assert_eq!(
            step_probability(&PureState2::zeros(1), &v),
            Err(Error::DegenerateState)
        );
    }

    #[test]
    fn step_probability_falls_with_lambda() {
        let mut last = 1.0;
        for k in 1..20 {
            let s = PureState2::from_diagonal(&[1.0, k as f64 * 0.05]);
            let p = step_probability(&s, &general_step(&s)).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn fidelity_examples() {
        let s = PureState2::from_diagonal(&[1.0, 0.5]);
        assert!((fidelity_to(&s, &s).unwrap() - 1.0).abs() < 1e-15);
        let mut one = PureState2::zeros(1);
        one.set(1, 0, c(1.0));
        assert_eq!(fidelity_to(&PureState2::vacuum(1), &one).unwrap(), 0.0);
        // Exact value 0.9375 = (5/4)² · (3/4) / (5/4); truncation at 40 is far below 1e-12.
        let limit = PureState2::from_diagonal(&(0..=40).map(|n| 0.5f64.powi(n)).collect::<Vec<_>>());
        let f = fidelity_to(&s, &limit).unwrap();
        assert!((f - 0.9375).abs() < 1e-12, "{f}");
        assert!(fidelity_to(&PureState2::zeros(1), &s).is_err());
    }

    #[test]
    fn zero_iterations_is_identity() {
        let s = Iterate::Schmidt(SchmidtDiagonal::seed(0.5).unwrap());
        let run = run_protocol(s.clone(), 0, &ProtocolOptions::default()).unwrap();
        assert!(run.reports.is_empty());
        assert_eq!(run.final_state, s);
    }

    #[test]
    fn driver_rejects_zero_vacuum_coefficient() {
        let s = Iterate::Schmidt(SchmidtDiagonal::new(vec![0.0, 1.0]).unwrap());
        assert_eq!(
            run_protocol(s, 3, &ProtocolOptions::default()).unwrap_err(),
            Error::ProtocolDegenerate
        );
        let mut p = PureState2::zeros(1);
        p.set(1, 1, c(1.0));
        assert_eq!(
            run_protocol(Iterate::Pure(p), 3, &ProtocolOptions::default()).unwrap_err(),
            Error::NoGaussianLimit
        );
    }

    #[test]
    fn driver_flags_divergence() {
        let s = Iterate::Schmidt(SchmidtDiagonal::seed(1.2).unwrap());
        let err = run_protocol(s, 40, &ProtocolOptions::default()).unwrap_err();
        assert!(err.is_domain(), "{err}");

        let p = Iterate::Pure(PureState2::from_diagonal(&[1.0, 1.5]));
        let opts = ProtocolOptions {
            cutoff_ceiling: 16,
            ..Default::default()
        };
        let err = run_protocol(p, 40, &opts).unwrap_err();
        assert!(err.is_domain(), "{err}");
    }

    #[test]
    fn vacuum_run_has_unit_probabilities() {
        let run = run_protocol(
            Iterate::Schmidt(SchmidtDiagonal::seed(0.0).unwrap()),
            5,
            &ProtocolOptions::default(),
        )
        .unwrap();
        for r in &run.reports {
            assert_eq!(r.step_probability, 1.0);
            assert_eq!(r.cumulative_probability, 1.0);
            assert_eq!(r.fidelity, Some(1.0));
        }
    }

    #[test]
    fn schmidt_and_general_paths_agree() {
        let opts = ProtocolOptions::default();
        let a = run_protocol(Iterate::Schmidt(SchmidtDiagonal::seed(0.5).unwrap()), 3, &opts).unwrap();
        let b = run_protocol(Iterate::Pure(PureState2::from_diagonal(&[1.0, 0.5])), 3, &opts).unwrap();
        for (x, y) in a.reports.iter().zip(&b.reports) {
            assert!((x.step_probability - y.step_probability).abs() < 1e-13);
            assert!((x.fidelity.unwrap() - y.fidelity.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_vacuum_is_fixed() {
        let rho = MixedState2::from_pure(&PureState2::vacuum(2));
        let (out, tr) = mixed_step_truncated(&rho, 4).unwrap();
        assert!((tr - 1.0).abs() < 1e-15);
        assert!((out.get(0, 0, 0, 0) - c(1.0)).norm() < 1e-15);
        assert!(mixed_step(&MixedState2::from_pure(&PureState2::zeros(1))).is_err());
    }

    #[test]
    fn tree_probability_definition() {
        let run = run_protocol(
            Iterate::Schmidt(SchmidtDiagonal::seed(0.5).unwrap()),
            3,
            &ProtocolOptions::default(),
        )
        .unwrap();
        let p: Vec<f64> = run.reports.iter().map(|r| r.step_probability).collect();
        let tree = (p[0] * p[0] * p[1]).powi(2) * p[2];
        assert!((run.reports[2].cumulative_tree_probability - tree).abs() < 1e-15);
        assert!((run.reports[2].cumulative_tree_probability - 0.2189897066734542).abs() < 1e-12);
    }
}
