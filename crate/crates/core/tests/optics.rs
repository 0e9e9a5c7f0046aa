mod common;

use gaussify::gaussifier::general_step;
use gaussify::optics::{mix_pair_and_project_vacuum, pair_and_click, pair_branch_probabilities, MeasuredPorts};
use gaussify::procrustean::{optimal_t, tmsv, tmsv_tail};
use gaussify::{BeamSplitter, BsMatrix, C64};
use nalgebra::DMatrix;
use rand::Rng;

use common::{max_abs_diff, random_state, rng};

fn random_splitter(rng: &mut impl Rng) -> BeamSplitter {
    let t = rng.random_range(0.0..=1.0f64);
    let r = (1.0 - t * t).sqrt();
    let pt = rng.random_range(0.0..std::f64::consts::TAU);
    let pr = rng.random_range(0.0..std::f64::consts::TAU);
    BeamSplitter::new(C64::from_polar(t, pt), C64::from_polar(r, pr)).unwrap()
}

fn max_dev(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Block `N` of `T^{n̂₁} exp(−R* â₂†â₁) exp(R â₂â₁†) T^{−n̂₂}`, built from the
/// ladder operators on the basis `|m, N−m⟩`.
fn operator_form_block(bs: &BeamSplitter, total: usize) -> DMatrix<C64> {
    let d = total + 1;
    let zero = C64::new(0.0, 0.0);
    // â₂†â₁ |m, N−m⟩ = √m √(N−m+1) |m−1, N−m+1⟩
    let lower = DMatrix::from_fn(d, d, |i, j| {
        if j >= 1 && i == j - 1 {
            C64::new(((j * (total - j + 1)) as f64).sqrt(), 0.0)
        } else {
            zero
        }
    });
    // â₂â₁† |m, N−m⟩ = √(m+1) √(N−m) |m+1, N−m−1⟩
    let raise = DMatrix::from_fn(d, d, |i, j| {
        if i == j + 1 {
            C64::new((((j + 1) * (total - j)) as f64).sqrt(), 0.0)
        } else {
            zero
        }
    });
    let exp_nilpotent = |x: DMatrix<C64>| {
        let mut acc = DMatrix::<C64>::identity(d, d);
        let mut term = DMatrix::<C64>::identity(d, d);
        for k in 1..=d {
            term = &term * &x / C64::new(k as f64, 0.0);
            acc += &term;
        }
        acc
    };
    let t = bs.t();
    let left = DMatrix::from_fn(d, d, |i, j| if i == j { t.powu(i as u32) } else { zero });
    let right = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            t.powu((total - i) as u32).inv()
        } else {
            zero
        }
    });
    left * exp_nilpotent(lower * -bs.r().conj()) * exp_nilpotent(raise * bs.r()) * right
}

#[test]
fn matrix_elements_match_operator_ordered_form() {
    let mut rng = rng(11);
    for _ in 0..20 {
        let mut bs = random_splitter(&mut rng);
        while bs.t().norm() < 0.2 {
            bs = random_splitter(&mut rng);
        }
        let u = BsMatrix::new(&bs, 4);
        for total in 0..=8 {
            // The T^{−n̂₂} factor amplifies rounding by |T|^{−N}.
            let tol = 1e-13 * bs.t().norm().powi(-(total as i32));
            let dev = max_dev(u.block(total), &operator_form_block(&bs, total));
            assert!(dev < tol, "N = {total}: {dev:e}");
        }
    }
}

#[test]
fn blocks_are_unitary() {
    let mut rng = rng(12);
    for k in 0..50 {
        let bs = random_splitter(&mut rng);
        let cutoff = 1 + k % 12;
        for block in BsMatrix::new(&bs, cutoff).blocks() {
            let d = block.nrows();
            let dev = max_dev(&(block.adjoint() * block), &DMatrix::identity(d, d));
            assert!(dev < 1e-12, "cutoff {cutoff}: {dev:e}");
        }
    }
}

#[test]
fn inverse_parameters_compose_to_identity() {
    let mut rng = rng(13);
    for _ in 0..20 {
        let bs = random_splitter(&mut rng);
        let u = BsMatrix::new(&bs, 6);
        let v = BsMatrix::new(&bs.inverse(), 6);
        for (a, b) in u.blocks().iter().zip(v.blocks()) {
            let d = a.nrows();
            assert!(max_dev(&(b * a), &DMatrix::identity(d, d)) < 1e-10);
        }
    }
}

#[test]
fn photon_number_is_conserved() {
    let u = BsMatrix::new(&BeamSplitter::balanced(), 3);
    for m1 in 0..=3 {
        for m2 in 0..=3 {
            for p1 in 0..=3 {
                for p2 in 0..=3 {
                    if m1 + m2 != p1 + p2 {
                        assert_eq!(u.element(m1, m2, p1, p2), C64::new(0.0, 0.0));
                    }
                }
            }
        }
    }
}

#[test]
fn convention_anchor_holds_at_every_small_cutoff() {
    let mut rng = rng(14);
    let bs = BeamSplitter::balanced();
    for k in 0..100 {
        let s = random_state(&mut rng, k % 6);
        let oracle = mix_pair_and_project_vacuum(&s, &s, &bs).unwrap();
        assert!(max_abs_diff(&general_step(&s), &oracle) < 1e-10);
    }
}

#[test]
fn swapping_copies_flips_odd_parity() {
    // Swapping the copies multiplies the (m, n) residue by (−1)^{m+n}.
    let mut rng = rng(15);
    let bs = BeamSplitter::balanced();
    for _ in 0..20 {
        let a = random_state(&mut rng, 3);
        let b = random_state(&mut rng, 3);
        let ab = mix_pair_and_project_vacuum(&a, &b, &bs).unwrap();
        let ba = mix_pair_and_project_vacuum(&b, &a, &bs).unwrap();
        for (m, n, x) in ab.nonzero() {
            let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((x - ba.get(m, n) * sign).norm() < 1e-12);
        }
    }
}

#[test]
fn click_branches_complete_the_norm() {
    let q = 0.01;
    let cutoff = 4;
    let input = tmsv(q, cutoff).unwrap();
    let (t, _) = optimal_t(q, 1.0).unwrap();
    let bs_a = BeamSplitter::from_transmittance(t).unwrap();
    let bs_b = BeamSplitter::from_transmittance(0.0).unwrap();
    let branches = pair_branch_probabilities(&input, &input, &bs_a, &bs_b, MeasuredPorts::PREPARE);
    let clicks = pair_and_click(&input, &input, &bs_a, &bs_b, MeasuredPorts::PREPARE);
    let tail = 1.0 - (1.0 - tmsv_tail(q, cutoff)).powi(2);
    assert!(tail < 1e-12);
    assert!((branches.total() - 1.0).abs() < 1e-10);
    let complement = branches.weights[0][0] + branches.weights[0][1] + branches.weights[1][0];
    assert!((clicks.total_probability - (1.0 - complement)).abs() < 1e-10);
    assert!((clicks.total_probability - branches.click_click()).abs() < 1e-15);
    let summed: f64 = clicks.outcomes.iter().map(|o| o.weight).sum();
    assert!((summed - clicks.total_probability).abs() < 1e-18);
    assert!(clicks.outcomes.iter().all(|o| o.counts.0 >= 1 && o.counts.1 >= 1));
}

#[test]
fn click_probability_is_bounded_for_random_inputs() {
    let mut rng = rng(16);
    for _ in 0..20 {
        let s = random_state(&mut rng, 2);
        let bs_a = random_splitter(&mut rng);
        let bs_b = random_splitter(&mut rng);
        for ports in [MeasuredPorts::GAUSSIFY, MeasuredPorts::PREPARE] {
            let b = pair_branch_probabilities(&s, &s, &bs_a, &bs_b, ports);
            assert!((b.total() - 1.0).abs() < 1e-12);
            let c = pair_and_click(&s, &s, &bs_a, &bs_b, ports);
            assert!(c.total_probability >= 0.0 && c.total_probability <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn mismatched_cutoffs_are_rejected() {
    let mut rng = rng(17);
    let a = random_state(&mut rng, 2);
    let b = random_state(&mut rng, 3);
    assert!(mix_pair_and_project_vacuum(&a, &b, &BeamSplitter::balanced()).is_err());
}
