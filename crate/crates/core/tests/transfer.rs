use deltaprime::bc::{lambda_of, InteractionKind, Mat2, C64};
use deltaprime::transfer::*;
use deltaprime::Error;
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn max_diff(a: &Mat2, b: &Mat2) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// Integrates ψ″ = (v − λ²)ψ with classical RK4 across a piecewise potential,
// for both unit initial vectors.
fn rk4_transfer(pot: &PiecewisePotential, lam: C64, steps_per_piece: usize) -> Mat2 {
    let mut out = Mat2::zeros();
    for col in 0..2 {
        let mut y = if col == 0 {
            [c(1.0), c(0.0)]
        } else {
            [c(0.0), c(1.0)]
        };
        for (w, &v) in pot.breakpoints().windows(2).zip(pot.values()) {
            let h = (w[1] - w[0]) / steps_per_piece as f64;
            let q = c(v) - lam * lam;
            let f = |y: [C64; 2]| [y[1], q * y[0]];
            for _ in 0..steps_per_piece {
                let k1 = f(y);
                let k2 = f([y[0] + k1[0] * (h / 2.0), y[1] + k1[1] * (h / 2.0)]);
                let k3 = f([y[0] + k2[0] * (h / 2.0), y[1] + k2[1] * (h / 2.0)]);
                let k4 = f([y[0] + k3[0] * h, y[1] + k3[1] * h]);
                for i in 0..2 {
                    y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
                }
            }
        }
        out[(0, col)] = y[0];
        out[(1, col)] = y[1];
    }
    out
}

#[test]
fn free_propagator_examples() {
    assert_eq!(free_propagator(0.0, c(1.3)).unwrap(), Mat2::identity());
    let quarter = free_propagator(std::f64::consts::FRAC_PI_2, c(1.0)).unwrap();
    let expected = Mat2::new(c(0.0), c(1.0), c(-1.0), c(0.0));
    assert!(max_diff(&quarter, &expected) < 1e-15);
    assert!(free_propagator(-1.0, c(1.0)).is_err());
}

#[test]
fn imaginary_wavenumber_gives_hyperbolic_entries() {
    let (kappa, eps) = (1.7, 0.8);
    let m = free_propagator(eps, C64::new(0.0, kappa)).unwrap();
    let z = kappa * eps;
    let expected = Mat2::new(
        c(z.cosh()),
        c(z.sinh() / kappa),
        c(kappa * z.sinh()),
        c(z.cosh()),
    );
    assert!(max_diff(&m, &expected) < 1e-14);
    assert!((m.determinant() - 1.0).norm() < 1e-14);
}

#[test]
fn series_branch_is_continuous() {
    for lam in [c(1.0), C64::new(0.0, 2.0), C64::new(0.3, -0.4)] {
        let below = free_propagator(0.99e-4 / lam.norm(), lam).unwrap();
        let above = free_propagator(1.01e-4 / lam.norm(), lam).unwrap();
        // entries move by O(δε); compare against the exact formula at both points
        for (m, eps) in [(below, 0.99e-4 / lam.norm()), (above, 1.01e-4 / lam.norm())] {
            let z = lam * eps;
            assert!((m[(0, 0)] - z.cos()).norm() < 1e-15);
            assert!((m[(0, 1)] - z.sin() / lam).norm() < 1e-18);
        }
    }
    // λ = 0 is a removable singularity
    let zero = free_propagator(2.5, c(0.0)).unwrap();
    assert!(max_diff(&zero, &Mat2::new(c(1.0), c(2.5), c(0.0), c(1.0))) < 1e-15);
}

#[test]
fn comb_examples() {
    let single = DeltaComb::new(vec![(3.3, 5.0)]).unwrap();
    let expected = lambda_of(&InteractionKind::Delta { alpha: 5.0 }).unwrap();
    assert_eq!(&comb_transfer(&single, c(1.0)), expected.matrix());
    assert_eq!(comb_transfer(&DeltaComb::empty(), c(2.0)), Mat2::identity());
    assert!(DeltaComb::new(vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
}

#[test]
fn family_3d_coefficients() {
    let comb = family_3d(2.0 / 3.0, 0.01).unwrap();
    let atoms = comb.atoms();
    assert_eq!(atoms[0].0, 0.0);
    assert!((atoms[0].1 - 100.0).abs() < 1e-12);
    assert_eq!(atoms[1].0, 0.01);
    assert!((atoms[1].1 + 50.0).abs() < 1e-12);
    let zero = family_3d(0.0, 0.1).unwrap();
    assert!(zero.atoms().iter().all(|a| a.1 == 0.0));
    assert!(matches!(family_3d(2.0, 0.1), Err(Error::GammaPole(_))));
}

#[test]
fn family_3d_converges_to_delta_prime_potential() {
    for gamma in [-1.5, -1.0, -2.0 / 3.0, -0.5, 0.5, 2.0 / 3.0, 1.0, 1.5] {
        let target = lambda_of(&InteractionKind::DeltaPrimePotential { gamma }).unwrap();
        let theta = target
            .entry(0, 0)
            .re
            .abs()
            .max(1.0 / target.entry(0, 0).re.abs());
        for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
            let m = comb_transfer(&family_3d(gamma, eps).unwrap(), c(1.0));
            let err = max_diff(&m, target.matrix());
            assert!(
                err <= 10.0 * theta * theta * eps,
                "γ={gamma} ε={eps} err={err:e}"
            );
        }
    }
}

#[test]
fn family_3d_limit_is_lambda_independent() {
    let eps = 1e-6;
    let a = comb_transfer(&family_3d(0.5, eps).unwrap(), c(0.1));
    let b = comb_transfer(&family_3d(0.5, eps).unwrap(), c(3.0));
    assert!(max_diff(&a, &b) < 1e-4);
}

#[test]
fn family_4d_values_and_kappa() {
    let [a1, a2, a3] = family_4d_coefficients(6.0, 1).unwrap();
    assert!((a2 - 3.0 * 2f64.sqrt() / 2.0).abs() < 1e-14);
    assert!((a1 + a2 + a3).abs() < 1e-14);
    let kp = family_4d_kappa(6.0, 1).unwrap();
    let km = family_4d_kappa(6.0, -1).unwrap();
    assert!((kp - (a1 - a3)).abs() < 1e-14);
    assert!((kp - 6.0 * (1.0 - a2 / 2.0)).abs() < 1e-13);
    assert!((kp - km).abs() > 1.0);
    // κ also equals the δ′ moment of the comb
    let (m0, m1) = family_4d(6.0, 1, 1e-3).unwrap().moments();
    assert!(m0.abs() < 1e-9);
    assert!((m1 - kp).abs() < 1e-9);
    assert!(matches!(
        family_4d(1.5, 1, 0.1),
        Err(Error::ComplexCoefficient(_))
    ));
    assert!(matches!(
        family_4d(2.0, 1, 0.1),
        Err(Error::ComplexCoefficient(_))
    ));
    assert!(family_4d(3.0, 0, 0.1).is_err());
}

#[test]
fn family_4d_both_signs_share_the_limit() {
    for gamma in [6.0, -3.0, 2.5] {
        let target = expected_theta_limit(gamma).unwrap();
        for sign in [1, -1] {
            let m = comb_transfer(&family_4d(gamma, sign, 1e-6).unwrap(), c(1.0));
            assert!(max_diff(&m, &target) < 1e-3, "γ={gamma} sign={sign}");
        }
    }
}

#[test]
fn family_4d_printed_coefficients_do_not_converge_to_theta() {
    let gamma = 6.0;
    let [a1, a2, a3] = family_4d_printed_coefficients(gamma, 1).unwrap();
    assert!((a1 + a2 + a3).abs() > 1.0);
    let eps = geometric_eps(1e-2, 0.1, 4);
    let report = limit_diagnose(|e| family_4d_printed(gamma, 1, e), c(1.0), &eps).unwrap();
    assert_eq!(report.classification, Classification::DirichletDecoupling);
}

#[test]
fn family_5d_presets() {
    let comb = family_5d(Family5dPreset::FreeLimit, 0.01).unwrap();
    assert_eq!(comb.atoms().len(), 4);
    let (m0, m1) = comb.moments();
    assert!(m0.abs() < 1e-12);
    assert!((m1 - 6.0).abs() < 1e-12);
    let eps = geometric_eps(1e-2, 0.1, 4);
    let free = limit_diagnose(|e| family_5d(Family5dPreset::FreeLimit, e), c(1.0), &eps).unwrap();
    match free.classification {
        Classification::Limit(t) => assert!(max_diff(t.matrix(), &Mat2::identity()) < 1e-6),
        other => panic!("expected a limit, got {other:?}"),
    }
    let dir = limit_diagnose(
        |e| family_5d(Family5dPreset::DirichletLimit, e),
        c(1.0),
        &eps,
    )
    .unwrap();
    assert_eq!(dir.classification, Classification::DirichletDecoupling);
}

// Smooth test function for the distributional check.
fn phi(x: f64) -> f64 {
    (-(x - 0.3).powi(2)).exp() * (1.0 + x)
}

#[test]
fn family_5d_tends_to_six_delta_prime() {
    // ⟨6δ′, φ⟩ = −6φ′(0)
    let h = 1e-6;
    let dphi0 = (phi(h) - phi(-h)) / (2.0 * h);
    let target = -6.0 * dphi0;
    let mut errs = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let comb = family_5d(Family5dPreset::FreeLimit, eps).unwrap();
        let pairing: f64 = comb.atoms().iter().map(|(x, a)| a * phi(*x)).sum();
        errs.push((pairing - target).abs());
    }
    assert!(errs[2] < 1e-3);
    assert!(errs[2] < errs[1] && errs[1] < errs[0]);
}

#[test]
fn limit_diagnose_reports_order_one_for_3d() {
    let eps = geometric_eps(1e-2, 0.5, 8);
    let r = limit_diagnose(|e| family_3d(2.0 / 3.0, e), c(1.0), &eps).unwrap();
    let Classification::Limit(t) = &r.classification else {
        panic!("{:?}", r.classification)
    };
    assert!(max_diff(t.matrix(), &expected_theta_limit(2.0 / 3.0).unwrap()) < 1e-6);
    let p = r.observed_order.unwrap();
    assert!((p - 1.0).abs() < 0.1, "order {p}");
    assert!(r.rates.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn limit_diagnose_rejects_bad_sequences() {
    assert!(limit_diagnose(|e| family_3d(0.5, e), c(1.0), &[0.1, 0.01]).is_err());
    assert!(limit_diagnose(|e| family_3d(0.5, e), c(1.0), &[0.1, 0.2, 0.01]).is_err());
}

#[test]
fn limit_diagnose_flags_growth() {
    // a 1/ε atom followed by unit propagation: Λ₁₁ and Λ₂₁ grow together,
    // so the ratio test fails and the sequence is divergent.
    let family = |e: f64| DeltaComb::new(vec![(0.0, 1.0 / e), (1.0, 0.0)]);
    let eps = geometric_eps(1e-1, 0.1, 4);
    let r = limit_diagnose(family, c(1.0), &eps).unwrap();
    assert_eq!(r.classification, Classification::Divergent);
}

#[test]
fn pc_transfer_examples() {
    let zero = PiecewisePotential::new(vec![-1.0, 0.5, 2.0], vec![0.0, 0.0]).unwrap();
    let m = pc_transfer(&zero, c(0.7));
    assert!(max_diff(&m, &free_propagator(3.0, c(0.7)).unwrap()) < 1e-14);

    let boxed = PiecewisePotential::new(vec![0.0, 1e-4], vec![5.0 / 1e-4]).unwrap();
    let m = pc_transfer(&boxed, c(1.0));
    let d = lambda_of(&InteractionKind::Delta { alpha: 5.0 }).unwrap();
    assert!(max_diff(&m, d.matrix()) < 1e-3);

    let barrier = PiecewisePotential::new(vec![0.0, 1.0], vec![4.0]).unwrap();
    let m = pc_transfer(&barrier, c(1.0));
    let k = 3f64.sqrt();
    let expected = Mat2::new(c(k.cosh()), c(k.sinh() / k), c(k * k.sinh()), c(k.cosh()));
    assert!(max_diff(&m, &expected) < 1e-13);
}

#[test]
fn pc_transfer_matches_rk4() {
    let pot = PiecewisePotential::new(vec![-1.0, -0.2, 0.4, 1.5], vec![3.0, -5.0, 0.7]).unwrap();
    for lam in [c(0.5), c(2.0), C64::new(0.0, 1.2), C64::new(0.4, 0.3)] {
        let exact = pc_transfer(&pot, lam);
        let ode = rk4_transfer(&pot, lam, 2000);
        assert!(max_diff(&exact, &ode) < 1e-9, "λ={lam}");
    }
}

#[test]
fn mollified_comb_tends_to_comb() {
    let comb = DeltaComb::new(vec![(0.0, 2.0), (0.5, -1.0), (1.2, 0.7)]).unwrap();
    let target = comb_transfer(&comb, c(1.3));
    let mut prev = f64::INFINITY;
    for w in [1e-2, 1e-3, 1e-4] {
        let pot = PiecewisePotential::mollify(&comb, w).unwrap();
        let err = max_diff(&pc_transfer(&pot, c(1.3)), &target);
        assert!(err < prev);
        prev = err;
    }
    assert!(prev < 1e-3);
}

fn comb_strategy() -> impl Strategy<Value = DeltaComb> {
    prop::collection::vec((0.01f64..2.0, -10.0f64..10.0), 1..7).prop_map(|gaps| {
        let mut x = 0.0;
        let atoms = gaps
            .into_iter()
            .map(|(g, a)| {
                x += g;
                (x, a)
            })
            .collect();
        DeltaComb::new(atoms).unwrap()
    })
}

proptest! {
    #[test]
    fn comb_determinant_is_one(comb in comb_strategy(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let m = comb_transfer(&comb, C64::new(re, im));
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!((m.determinant() - 1.0).norm() < 1e-12 * scale * scale);
    }

    #[test]
    fn comb_even_in_lambda(comb in comb_strategy(), lam in 0.01f64..3.0) {
        let a = comb_transfer(&comb, c(lam));
        let b = comb_transfer(&comb, c(-lam));
        prop_assert!(max_diff(&a, &b) < 1e-12 * (1.0 + a.iter().map(|z| z.norm()).fold(0.0, f64::max)));
        prop_assert!(a.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn comb_splits_at_atom_free_points(comb in comb_strategy(), frac in 0.05f64..0.95, lam in 0.1f64..2.0) {
        let atoms = comb.atoms();
        prop_assume!(atoms.len() >= 2);
        let k = atoms.len() / 2;
        let cut = atoms[k - 1].0 + frac * (atoms[k].0 - atoms[k - 1].0);
        let left = DeltaComb::new(atoms[..k].to_vec()).unwrap();
        let right = DeltaComb::new(atoms[k..].to_vec()).unwrap();
        let lam = c(lam);
        let whole = comb_transfer(&comb, lam);
        let split = comb_transfer(&right, lam)
            * free_propagator(atoms[k].0 - cut, lam).unwrap()
            * free_propagator(cut - atoms[k - 1].0, lam).unwrap()
            * comb_transfer(&left, lam);
        let scale = whole.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(max_diff(&whole, &split) < 1e-11 * scale);
    }

    #[test]
    fn pc_determinant_is_one(
        widths in prop::collection::vec(0.01f64..1.0, 1..6),
        vals in prop::collection::vec(-20.0f64..20.0, 6),
        lam in 0.0f64..3.0,
    ) {
        let mut bp = vec![0.0];
        for w in &widths {
            bp.push(bp.last().unwrap() + w);
        }
        let pot = PiecewisePotential::new(bp, vals[..widths.len()].to_vec()).unwrap();
        let m = pc_transfer(&pot, c(lam));
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!((m.determinant() - 1.0).norm() < 1e-12 * scale * scale);
    }
}
