//! Seed-state preparation from two-mode squeezed vacua and the end-to-end
//! distillation pipeline.
//!
//! Two copies of `√(1−q²) Σ qⁿ |n,n⟩` are mixed locally, one detector per side
//! must click, and the residue is kept. For small `q` and the matched
//! transmittance the residue approaches `(|0,0⟩ + e^{−iφ}|1,1⟩)/√2`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{trace_norm_distance, MixedState2, Mode, PureState2, C64};
use crate::gaussifier::{run_mixed_protocol, IterationReport};
use crate::optics::{pair_and_click, BeamSplitter, MeasuredPorts};

fn check_q(q: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("squeezing q = {q} outside [0, 1)")));
    }
    Ok(())
}

/// Two-mode squeezed vacuum truncated at `cutoff`. Not renormalized: the
/// missing weight is [`tmsv_tail`].
pub fn tmsv(q: f64, cutoff: usize) -> Result<PureState2> {
    check_q(q)?;
    let norm = (1.0 - q * q).sqrt();
    let coeffs: Vec<f64> = (0..=cutoff).map(|n| norm * q.powi(n as i32)).collect();
    Ok(PureState2::from_diagonal(&coeffs))
}

/// Weight of the squeezed vacuum above `cutoff` photons per mode.
pub fn tmsv_tail(q: f64, cutoff: usize) -> f64 {
    q.powi(2 * (cutoff as i32 + 1))
}

/// Entropy of one mode of the untruncated squeezed vacuum, in bits.
pub fn tmsv_entropy(q: f64) -> Result<f64> {
    check_q(q)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    let q2 = q * q;
    Ok(-(1.0 - q2).log2() - q2 / (1.0 - q2) * q2.log2())
}

/// `(|t|, |r|)` of the A-side splitter that makes the click residue
/// proportional to `|0,0⟩ + α₁₁|1,1⟩` to leading order in `q`.
pub fn optimal_t(q: f64, target_alpha11: f64) -> Result<(f64, f64)> {
    if q == 0.0 {
        return Err(Error::InvalidParameter("degenerate: no photons at q = 0".into()));
    }
    check_q(q)?;
    if !(target_alpha11 >= 0.0 && target_alpha11.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target α₁₁ = {target_alpha11} must be finite and non-negative"
        )));
    }
    let a = target_alpha11;
    let t = ((a - (a * a + 8.0 * q * q).sqrt()) / (4.0 * q)).abs();
    Ok((t, (1.0 - t * t).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrepConfig {
    pub q: f64,
    pub bs_a: BeamSplitter,
    pub bs_b: BeamSplitter,
    /// Per-mode cutoff of the prepared state; each input copy keeps half of it.
    pub cutoff: usize,
}

impl PrepConfig {
    /// Real A-side transmittance `t` and the fully reflecting B side.
    pub fn with_transmittance(q: f64, t: f64, cutoff: usize) -> Result<Self> {
        check_q(q)?;
        if cutoff < 2 {
            return Err(Error::InvalidParameter(format!(
                "preparation cutoff {cutoff} is below 2"
            )));
        }
        Ok(Self {
            q,
            bs_a: BeamSplitter::from_transmittance(t)?,
            bs_b: BeamSplitter::from_transmittance(0.0)?,
            cutoff,
        })
    }

    /// [`with_transmittance`](Self::with_transmittance) at `t(q)` for `α₁₁ = 1`.
    pub fn matched(q: f64, cutoff: usize) -> Result<Self> {
        let (t, _) = optimal_t(q, 1.0)?;
        Self::with_transmittance(q, t, cutoff)
    }
}

#[derive(Clone, Debug)]
pub struct Prepared {
    /// Unit-trace conditional state.
    pub state: MixedState2,
    pub click_probability: f64,
    /// Input weight lost to truncating the two squeezed vacua.
    pub tail_probability: f64,
    /// Number of resolved detector outcomes mixed into `state`.
    pub outcomes: usize,
}

/// Click-conditioned preparation. Detectors do not resolve photon number, so
/// the output mixes every outcome with at least one photon on each side.
pub fn prepare(config: &PrepConfig) -> Result<Prepared> {
    if config.q <= 0.0 {
        return Err(Error::InvalidParameter("preparation needs q > 0".into()));
    }
    let input = tmsv(config.q, config.cutoff / 2)?;
    let clicks = pair_and_click(&input, &input, &config.bs_a, &config.bs_b, MeasuredPorts::PREPARE);
    let total = clicks.total_probability;
    if total.is_nan() || total < 1e-300 {
        return Err(Error::NoClickSupport(total));
    }
    let c = config.cutoff;
    let dim = (c + 1) * (c + 1);
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    for outcome in &clicks.outcomes {
        let v = DVector::from_column_slice(outcome.state.padded(c).amplitudes());
        rho.ger(C64::new(1.0 / total, 0.0), &v, &v.conjugate(), C64::new(1.0, 0.0));
    }
    let tail = 1.0 - (1.0 - tmsv_tail(config.q, config.cutoff / 2)).powi(2);
    Ok(Prepared {
        state: MixedState2::new(c, rho)?,
        click_probability: total,
        tail_probability: tail.max(clicks.tail_probability),
        outcomes: clicks.outcomes.len(),
    })
}

/// `(|0,0⟩ + e^{−iφ}|1,1⟩)/√2` as a density operator.
pub fn target_bell(phi: f64, cutoff: usize) -> Result<MixedState2> {
    if cutoff < 1 {
        return Err(Error::InvalidParameter("the target needs cutoff ≥ 1".into()));
    }
    let mut psi = PureState2::zeros(cutoff);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    psi.set(0, 0, C64::new(h, 0.0));
    psi.set(1, 1, C64::from_polar(h, -phi));
    Ok(MixedState2::from_pure(&psi))
}

/// `min_φ ‖ρ − ρ⁺(φ)‖₁` by a coarse scan refined with a golden-section search.
/// Returns `(φ, distance)`.
pub fn best_phase_distance(rho: &MixedState2) -> Result<(f64, f64)> {
    let tau = std::f64::consts::TAU;
    let dist = |phi: f64| -> Result<f64> { trace_norm_distance(rho, &target_bell(phi, rho.cutoff())?) };

    const COARSE: usize = 64;
    let step = tau / COARSE as f64;
    let mut best = (0.0, f64::INFINITY);
    for k in 0..COARSE {
        let phi = k as f64 * step;
        let d = dist(phi)?;
        if d < best.1 {
            best = (phi, d);
        }
    }

    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (dist(x1)?, dist(x2)?);
    while b - a > 1e-9 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = dist(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = dist(x2)?;
        }
    }
    let phi = 0.5 * (a + b);
    let d = dist(phi)?;
    let best = if d < best.1 { (phi, d) } else { best };
    Ok((best.0.rem_euclid(tau), best.1))
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    /// `E_final / E_init`, single-mode reduction entropies.
    pub entanglement_ratio: f64,
    /// Click probability times the vacuum probabilities of every iteration.
    pub overall_probability: f64,
    pub e_init: f64,
    pub e_final: f64,
    /// Purity of the final state.
    pub purity: f64,
    pub click_probability: f64,
    pub reports: Vec<IterationReport>,
}

/// Preparation at A-side transmittance `t` followed by `iterations` mixed
/// Gaussification steps, all at per-mode cutoff `cutoff`.
pub fn distill_pipeline(q: f64, t: f64, iterations: usize, cutoff: usize) -> Result<PipelineResult> {
    if q <= 0.0 {
        return Err(Error::InvalidParameter("the pipeline needs q > 0".into()));
    }
    let prepared = prepare(&PrepConfig::with_transmittance(q, t, cutoff)?)?;
    let run = run_mixed_protocol(&prepared.state, iterations, cutoff)?;
    let e_init = tmsv_entropy(q)?;
    let e_final = run.final_state.reduce(Mode::A)?.entropy()?;
    let overall = run
        .reports
        .last()
        .map_or(1.0, |r| r.cumulative_probability)
        * prepared.click_probability;
    Ok(PipelineResult {
        entanglement_ratio: e_final / e_init,
        overall_probability: overall,
        e_init,
        e_final,
        purity: run.final_state.purity(),
        click_probability: prepared.click_probability,
        reports: run.reports,
    })
}
