//! Beam splitters in the Fock basis and the four-mode pair/measure step.
//!
//! The beam splitter `Û(T, R) = T^{n̂₁} exp(−R* â₂†â₁) exp(R â₂â₁†) T^{−n̂₂}`
//! maps input creation operators to
//!
//! ```text
//! â₁† ↦ T â₁† − R* â₂†
//! â₂† ↦ R â₁† + T* â₂†
//! ```
//!
//! i.e. input `k` feeds output `j` with the `(j, k)` entry of
//! `[[T, R], [−R*, T*]]`. Matrix elements are expanded from this linear map,
//! which stays finite at `T = 0` where the operator-ordered product does not.
//!
//! Port convention: copy 1 enters port 1 and copy 2 enters port 2 on each
//! side. The Gaussification step measures output port 1 on both sides and
//! keeps output port 2; this is the unique choice that reproduces the signed
//! recurrence `(−1)^{(m+n)−(r+s)}` of [`crate::gaussifier::general_step`].

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{PureState2, C64};
use crate::math::{binomials, ln_factorials};

/// Tolerance on `|T|² + |R|² = 1`.
pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitter {
    t: C64,
    r: C64,
}

impl BeamSplitter {
    pub fn new(t: C64, r: C64) -> Result<Self> {
        let s = t.norm_sqr() + r.norm_sqr();
        if !s.is_finite() || (s - 1.0).abs() > UNITARITY_TOL {
            return Err(Error::NonUnitary(s));
        }
        Ok(Self { t, r })
    }

    /// Real non-negative `T = |t|`, `R = sqrt(1 − t²)`.
    pub fn from_transmittance(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "transmittance {t} outside [0, 1]"
            )));
        }
        Self::new(C64::new(t, 0.0), C64::new((1.0 - t * t).max(0.0).sqrt(), 0.0))
    }

    /// `T = R = 1/√2`.
    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            t: C64::new(h, 0.0),
            r: C64::new(h, 0.0),
        }
    }

    pub fn t(&self) -> C64 {
        self.t
    }

    pub fn r(&self) -> C64 {
        self.r
    }

    /// Parameters of `Û†`: `(T*, −R)`.
    pub fn inverse(&self) -> Self {
        Self {
            t: self.t.conj(),
            r: -self.r,
        }
    }

    /// `[[T, R], [−R*, T*]]`; column `k` is where input `k` goes.
    pub fn mode_matrix(&self) -> [[C64; 2]; 2] {
        [[self.t, self.r], [-self.r.conj(), self.t.conj()]]
    }
}

fn cpow(z: C64, k: usize) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for _ in 0..k {
        acc *= z;
    }
    acc
}

/// Photon-number blocks of `Û`. Block `N` is `(N+1)×(N+1)` with entry
/// `[m][p] = ⟨m, N−m| Û |p, N−p⟩`.
#[derive(Clone, Debug)]
pub struct BsMatrix {
    cutoff: usize,
    blocks: Vec<DMatrix<C64>>,
}

impl BsMatrix {
    /// Blocks for every total photon number `N <= 2·cutoff`.
    pub fn new(bs: &BeamSplitter, cutoff: usize) -> Self {
        let nmax = 2 * cutoff;
        let lf = ln_factorials(nmax);
        let binom = binomials(nmax);
        let [[m11, m12], [m21, m22]] = bs.mode_matrix();
        // Powers are tabulated once per block size.
        let pow = |z: C64| (0..=nmax).map(|k| cpow(z, k)).collect::<Vec<_>>();
        let (p11, p12, p21, p22) = (pow(m11), pow(m12), pow(m21), pow(m22));

        let blocks = (0..=nmax)
            .map(|total| {
                DMatrix::from_fn(total + 1, total + 1, |m1, p1| {
                    let p2 = total - p1;
                    let m2 = total - m1;
                    let norm = 0.5 * (lf[m1] + lf[m2] - lf[p1] - lf[p2]);
                    let mut acc = C64::new(0.0, 0.0);
                    // j photons of input 1 and k of input 2 land in output 1.
                    let jmin = m1.saturating_sub(p2);
                    let jmax = p1.min(m1);
                    for j in jmin..=jmax {
                        let k = m1 - j;
                        let w = binom[p1][j] * binom[p2][k] * norm.exp();
                        acc += p11[j] * p21[p1 - j] * p12[k] * p22[p2 - k] * w;
                    }
                    acc
                })
            })
            .collect();
        Self { cutoff, blocks }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn block(&self, total: usize) -> &DMatrix<C64> {
        &self.blocks[total]
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    /// `⟨m1, m2| Û |p1, p2⟩`; zero across different photon numbers.
    pub fn element(&self, m1: usize, m2: usize, p1: usize, p2: usize) -> C64 {
        let total = p1 + p2;
        if m1 + m2 != total || total >= self.blocks.len() {
            return C64::new(0.0, 0.0);
        }
        self.blocks[total][(m1, p1)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Port {
    One,
    Two,
}

impl Port {
    fn other(self) -> Self {
        match self {
            Port::One => Port::Two,
            Port::Two => Port::One,
        }
    }
}

/// Which output port carries the detector on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasuredPorts {
    pub a: Port,
    pub b: Port,
}

impl MeasuredPorts {
    /// Detector placement of the Gaussification step.
    pub const GAUSSIFY: Self = Self {
        a: Port::One,
        b: Port::One,
    };
    /// Detector placement of the preparation step: with `(T_B, R_B) = (0, 1)`
    /// the B splitter routes copy 1 onto output 2, so both detectors see copy 1
    /// and the A-side transmittance sets how much of it reaches the detector.
    pub const PREPARE: Self = Self {
        a: Port::One,
        b: Port::Two,
    };
}

/// Pair of two-mode states after the local beam splitters, indexed
/// `[A out 1][B out 1][A out 2][B out 2]`.
#[derive(Clone, Debug)]
pub(crate) struct FourModeState {
    dim: usize,
    amps: Vec<C64>,
}

impl FourModeState {
    #[inline]
    fn idx(&self, a1: usize, b1: usize, a2: usize, b2: usize) -> usize {
        ((a1 * self.dim + b1) * self.dim + a2) * self.dim + b2
    }

    pub(crate) fn get(&self, a1: usize, b1: usize, a2: usize, b2: usize) -> C64 {
        self.amps[self.idx(a1, b1, a2, b2)]
    }

    pub(crate) fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Amplitude with the measured ports fixed to `(ka, kb)`; returns
    /// `(kept A, kept B)` coordinates.
    fn measured(&self, ports: MeasuredPorts, ka: usize, kb: usize, xa: usize, xb: usize) -> C64 {
        let (a1, a2) = match ports.a {
            Port::One => (ka, xa),
            Port::Two => (xa, ka),
        };
        let (b1, b2) = match ports.b {
            Port::One => (kb, xb),
            Port::Two => (xb, kb),
        };
        self.get(a1, b1, a2, b2)
    }

    /// Un-normalized two-mode residue conditioned on counts `(ka, kb)`.
    fn conditional(&self, ports: MeasuredPorts, ka: usize, kb: usize) -> PureState2 {
        PureState2::from_fn(self.dim - 1, |xa, xb| self.measured(ports, ka, kb, xa, xb))
    }
}

/// Mixes `first` (copy 1) and `second` (copy 2) locally: `bs_a` on the two A
/// modes, `bs_b` on the two B modes.
pub(crate) fn pair_through_splitters(
    first: &PureState2,
    second: &PureState2,
    bs_a: &BeamSplitter,
    bs_b: &BeamSplitter,
) -> FourModeState {
    let c = first.cutoff().max(second.cutoff());
    let (first, second) = (first.padded(c), second.padded(c));
    let dim = 2 * c + 1;
    let ua = BsMatrix::new(bs_a, c);
    let ub = BsMatrix::new(bs_b, c);
    let zero = C64::new(0.0, 0.0);

    // A side: mid[a1][b1][a2][b2] with b1, b2 still input indices (<= c).
    let cin = c + 1;
    let mut mid = vec![zero; dim * cin * dim * cin];
    let mid_idx = |a1: usize, b1: usize, a2: usize, b2: usize| ((a1 * cin + b1) * dim + a2) * cin + b2;
    for b1 in 0..=c {
        for b2 in 0..=c {
            for total in 0..=2 * c {
                let block = ua.block(total);
                let plo = total.saturating_sub(c);
                let phi = total.min(c);
                for x1 in 0..=total {
                    let mut acc = zero;
                    for p in plo..=phi {
                        acc += block[(x1, p)] * first.get(p, b1) * second.get(total - p, b2);
                    }
                    mid[mid_idx(x1, b1, total - x1, b2)] = acc;
                }
            }
        }
    }

    let mut out = FourModeState {
        dim,
        amps: vec![zero; dim * dim * dim * dim],
    };
    for a1 in 0..dim {
        for a2 in 0..dim {
            if a1 + a2 > 2 * c {
                continue;
            }
            for total in 0..=2 * c {
                let block = ub.block(total);
                let plo = total.saturating_sub(c);
                let phi = total.min(c);
                for y1 in 0..=total {
                    let mut acc = zero;
                    for p in plo..=phi {
                        acc += block[(y1, p)] * mid[mid_idx(a1, p, a2, total - p)];
                    }
                    let i = out.idx(a1, y1, a2, total - y1);
                    out.amps[i] = acc;
                }
            }
        }
    }
    out
}

/// Mixes two copies locally at `bs` on both sides, projects output port 1 of
/// each side onto the vacuum and returns the un-normalized residue in the
/// kept ports. The output cutoff is the sum of the input cutoffs.
pub fn mix_pair_and_project_vacuum(
    first: &PureState2,
    second: &PureState2,
    bs: &BeamSplitter,
) -> Result<PureState2> {
    if first.cutoff() != second.cutoff() {
        return Err(Error::CutoffMismatch(first.cutoff(), second.cutoff()));
    }
    let c = first.cutoff();
    let u = BsMatrix::new(bs, c);
    // With port 1 in vacuum every photon of the pair leaves through port 2,
    // so only the m1 = 0 row of each block contributes.
    Ok(PureState2::from_fn(2 * c, |ka, kb| {
        let ba = u.block(ka);
        let bb = u.block(kb);
        let mut acc = C64::new(0.0, 0.0);
        for p1 in ka.saturating_sub(c)..=ka.min(c) {
            let wa = ba[(0, p1)];
            for s1 in kb.saturating_sub(c)..=kb.min(c) {
                acc += wa * bb[(0, s1)] * first.get(p1, s1) * second.get(ka - p1, kb - s1);
            }
        }
        acc
    }))
}

#[derive(Clone, Debug)]
pub struct ClickOutcome {
    /// Photon counts at the A and B detectors (both ≥ 1).
    pub counts: (usize, usize),
    /// Un-normalized residue in the kept ports.
    pub state: PureState2,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct ClickOutcomes {
    pub outcomes: Vec<ClickOutcome>,
    pub total_probability: f64,
    /// Weight missing from the truncated input pair, `1 − ⟨ψ|ψ⟩` clamped at zero.
    pub tail_probability: f64,
}

/// Enumerates every detector outcome with at least one photon on each side,
/// i.e. the projector `(1 − |0⟩⟨0|) ⊗ (1 − |0⟩⟨0|)` resolved by photon number.
pub(crate) fn click_project(state: &FourModeState, ports: MeasuredPorts) -> ClickOutcomes {
    let mut outcomes = Vec::new();
    let mut total = 0.0;
    for ka in 1..state.dim {
        for kb in 1..state.dim {
            let residue = state.conditional(ports, ka, kb);
            let weight = residue.norm_sq();
            if weight > 0.0 {
                total += weight;
                outcomes.push(ClickOutcome {
                    counts: (ka, kb),
                    state: residue,
                    weight,
                });
            }
        }
    }
    ClickOutcomes {
        outcomes,
        total_probability: total,
        tail_probability: (1.0 - state.norm_sq()).max(0.0),
    }
}

/// Mixes two copies through `bs_a`/`bs_b` and applies the click projector.
pub fn pair_and_click(
    first: &PureState2,
    second: &PureState2,
    bs_a: &BeamSplitter,
    bs_b: &BeamSplitter,
    ports: MeasuredPorts,
) -> ClickOutcomes {
    click_project(&pair_through_splitters(first, second, bs_a, bs_b), ports)
}

/// Probabilities of the four detector branches `[A][B]`, index 0 = vacuum,
/// index 1 = click.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchProbabilities {
    pub weights: [[f64; 2]; 2],
}

impl BranchProbabilities {
    pub fn total(&self) -> f64 {
        self.weights.iter().flatten().sum()
    }

    pub fn click_click(&self) -> f64 {
        self.weights[1][1]
    }

    pub fn vacuum_vacuum(&self) -> f64 {
        self.weights[0][0]
    }
}

pub fn pair_branch_probabilities(
    first: &PureState2,
    second: &PureState2,
    bs_a: &BeamSplitter,
    bs_b: &BeamSplitter,
    ports: MeasuredPorts,
) -> BranchProbabilities {
    let state = pair_through_splitters(first, second, bs_a, bs_b);
    let mut weights = [[0.0; 2]; 2];
    let d = state.dim;
    for ka in 0..d {
        for kb in 0..d {
            let mut w = 0.0;
            for xa in 0..d {
                for xb in 0..d {
                    w += state.measured(ports, ka, kb, xa, xb).norm_sqr();
                }
            }
            weights[(ka > 0) as usize][(kb > 0) as usize] += w;
        }
    }
    BranchProbabilities { weights }
}

/// Kept-port counterpart of a measured port.
pub fn kept_port(measured: Port) -> Port {
    measured.other()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn rejects_non_unitary_parameters() {
        assert!(matches!(
            BeamSplitter::new(c(0.9), c(0.9)),
            Err(Error::NonUnitary(_))
        ));
        assert!(BeamSplitter::from_transmittance(1.2).is_err());
    }

    #[test]
    fn vacuum_is_preserved() {
        let bs = BeamSplitter::new(C64::from_polar(0.6, 0.3), C64::from_polar(0.8, 1.1)).unwrap();
        let u = BsMatrix::new(&bs, 3);
        assert_eq!(u.element(0, 0, 0, 0), c(1.0));
    }

    #[test]
    fn balanced_single_photon_splits_evenly() {
        let u = BsMatrix::new(&BeamSplitter::balanced(), 1);
        assert!((u.element(1, 0, 1, 0).norm_sqr() - 0.5).abs() < 1e-15);
        assert!((u.element(0, 1, 1, 0).norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel() {
        let u = BsMatrix::new(&BeamSplitter::balanced(), 1);
        assert!(u.element(1, 1, 1, 1).norm() < 1e-15);
        assert!((u.element(2, 0, 1, 1).norm_sqr() - 0.5).abs() < 1e-15);
        assert!((u.element(0, 2, 1, 1).norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn full_reflection_is_finite() {
        let bs = BeamSplitter::new(c(0.0), c(1.0)).unwrap();
        let u = BsMatrix::new(&bs, 2);
        // â₁† ↦ −â₂†, â₂† ↦ â₁†
        assert_eq!(u.element(0, 1, 1, 0), c(-1.0));
        assert_eq!(u.element(1, 0, 0, 1), c(1.0));
        for block in u.blocks() {
            assert!(block.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        }
    }

    #[test]
    fn vacuum_pair_stays_vacuum() {
        let v = PureState2::vacuum(2);
        let out = mix_pair_and_project_vacuum(&v, &v, &BeamSplitter::balanced()).unwrap();
        assert_eq!(out.cutoff(), 4);
        assert!((out.get(0, 0) - c(1.0)).norm() < 1e-15);
        assert!((out.norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn schmidt_seed_pair() {
        let s = PureState2::from_diagonal(&[1.0, 0.5]);
        let out = mix_pair_and_project_vacuum(&s, &s, &BeamSplitter::balanced()).unwrap();
        assert!((out.get(0, 0) - c(1.0)).norm() < 1e-14);
        assert!((out.get(1, 1) - c(0.5)).norm() < 1e-14);
        assert!((out.get(2, 2) - c(0.125)).norm() < 1e-14);
        let off: f64 = out
            .nonzero()
            .filter(|(m, n, _)| m != n)
            .map(|(_, _, a)| a.norm())
            .sum();
        assert!(off < 1e-14);
    }

    #[test]
    fn lone_odd_coefficient_cancels() {
        let mut s = PureState2::zeros(1);
        s.set(1, 0, c(0.7));
        let out = mix_pair_and_project_vacuum(&s, &s, &BeamSplitter::balanced()).unwrap();
        assert!(out.get(1, 0).norm() < 1e-15);
        assert!(out.get(2, 0).norm() > 0.0);
    }

    #[test]
    fn click_on_vacuum_is_empty() {
        let v = PureState2::vacuum(2);
        let bs = BeamSplitter::balanced();
        let r = pair_and_click(&v, &v, &bs, &bs, MeasuredPorts::GAUSSIFY);
        assert!(r.outcomes.is_empty());
        assert_eq!(r.total_probability, 0.0);
    }

    #[test]
    fn single_click_branch() {
        // Identity splitters: copy 1 sits on port 1 and carries |1,1⟩; copy 2 is vacuum.
        let id = BeamSplitter::new(c(1.0), c(0.0)).unwrap();
        let mut one = PureState2::zeros(1);
        one.set(1, 1, c(1.0));
        let state = pair_through_splitters(&one, &PureState2::vacuum(1), &id, &id);
        let r = click_project(&state, MeasuredPorts::GAUSSIFY);
        assert_eq!(r.outcomes.len(), 1);
        assert_eq!(r.outcomes[0].counts, (1, 1));
        assert!((r.total_probability - 1.0).abs() < 1e-15);
        assert!((r.outcomes[0].state.get(0, 0) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn measured_ports_are_distinct_from_kept_ports() {
        assert_eq!(kept_port(Port::One), Port::Two);
        assert_eq!(kept_port(MeasuredPorts::PREPARE.b), Port::One);
    }
}
