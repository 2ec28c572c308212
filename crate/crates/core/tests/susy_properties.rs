use gsip::eigensolver;
use gsip::families::{Family, FamilyKind, FamilySpec};
use gsip::susy::{self, CustomSuperpotential, Superpotential};
use gsip::verify;
use gsip::{Grid, GridFunction, GsipError, MassProfile};
use proptest::prelude::*;

fn harmonic() -> FamilySpec {
    FamilySpec::new(Family::OscShift { r0: 2.0 }, 0.0, MassProfile::unit_mass()).unwrap()
}

fn bump(grid: Grid, centers: &[(f64, f64, f64)]) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        centers
            .iter()
            .map(|&(c, w, amp)| amp * (-((x - c) / w).powi(2)).exp())
            .sum()
    })
}

#[test]
fn constant_superpotential_gives_flat_potentials() {
    let sp = CustomSuperpotential::new(
        MassProfile::constant(0.8).unwrap(),
        |_, a| a,
        |a| a,
        |_| 0.0,
    );
    for &x in &[-3.0, 0.0, 2.5] {
        assert!((susy::v1_from_w(&sp, 1.7, x).unwrap() - 1.7f64.powi(2)).abs() < 1e-12);
        assert!((susy::v2_from_w(&sp, 1.7, x).unwrap() - 1.7f64.powi(2)).abs() < 1e-12);
    }
}

#[test]
fn oscshift_harmonic_potential() {
    let s = harmonic();
    for &x in &[-2.0f64, -0.5, 0.0, 1.3] {
        let expected = 2.0 * x * x - 1.0;
        assert!((susy::v1_from_w(&s, 0.0, x).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn morse_form_for_constant_mass() {
    // u₀ = 1, U = U₀: V₁ = ¼(e^{-αy} - 2a)² - (α/2)e^{-αy} with y = x/U₀.
    let (alpha, a, u0) = (0.9, 1.4, 1.2);
    let s = FamilySpec::new(
        Family::Exponential { alpha, u0: 1.0 },
        a,
        MassProfile::constant(u0).unwrap(),
    )
    .unwrap();
    for &x in &[-1.0f64, 0.2, 2.0] {
        let e = (-alpha * x / u0).exp();
        let expected = 0.25 * (e - 2.0 * a).powi(2) - 0.5 * alpha * e;
        assert!((susy::v1_from_w(&s, a, x).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn oscshift_partner_gap_is_constant_for_any_profile() {
    for profile in [
        MassProfile::sech(),
        MassProfile::inverse_linear(0.5).unwrap(),
        MassProfile::linear(0.7).unwrap(),
    ] {
        let s = FamilySpec::new(Family::OscShift { r0: 1.5 }, 0.4, profile).unwrap();
        let grid = verify::auto_box(&s, 2, 1000).unwrap().grid;
        for x in grid.nodes() {
            let gap = susy::v2_from_w(&s, 0.4, x).unwrap() - susy::v1_from_w(&s, 0.4, x).unwrap();
            let scale = susy::v1_from_w(&s, 0.4, x).unwrap().abs().max(1.0);
            assert!(
                (gap - 1.5).abs() < 1e-10 * scale,
                "{} at {x}: {gap}",
                s.profile().name()
            );
        }
    }
}

#[test]
fn scarf_ii_without_b_is_shape_invariant() {
    let s = FamilySpec::new(
        Family::Hyperbolic { alpha: 0.8, b: 0.0 },
        2.0,
        MassProfile::constant(1.0).unwrap(),
    )
    .unwrap();
    let grid = Grid::new(-10.0, 10.0, 1000).unwrap();
    assert!(susy::shape_invariance_residual(&s, 2.0, &grid).unwrap() < 1e-10);
}

#[test]
fn perturbed_superpotential_residual_is_linear_in_epsilon() {
    let base = harmonic();
    let perturbed = |eps: f64| {
        let b = base.clone();
        CustomSuperpotential::new(
            MassProfile::unit_mass(),
            move |x, a| b.w(x, a).unwrap() + eps * x,
            |a| a,
            |_| 2.0,
        )
    };
    let grid = Grid::new(-4.0, 4.0, 1000).unwrap();
    let r1 = susy::shape_invariance_residual(&perturbed(1e-3), 0.0, &grid).unwrap();
    let r2 = susy::shape_invariance_residual(&perturbed(2e-3), 0.0, &grid).unwrap();
    assert!(r1 > 1e-5);
    assert!((r2 / r1 - 2.0).abs() < 1e-3, "{r1} {r2}");
}

#[test]
fn spectrum_accumulates_closed_forms() {
    let oscshift =
        FamilySpec::new(Family::OscShift { r0: 3.0 }, 0.0, MassProfile::unit_mass()).unwrap();
    let got: Vec<f64> = (0..3)
        .map(|n| susy::spectrum_accumulate(&oscshift, 0.0, n).unwrap())
        .collect();
    assert_eq!(got, vec![0.0, 3.0, 6.0]);
    let exp = FamilySpec::new(
        Family::Exponential {
            alpha: 1.0,
            u0: 1.0,
        },
        3.0,
        MassProfile::unit_mass(),
    )
    .unwrap();
    let got: Vec<f64> = (0..4)
        .map(|n| susy::spectrum_accumulate(&exp, 3.0, n).unwrap())
        .collect();
    assert_eq!(got, vec![0.0, 5.0, 8.0, 9.0]);
    assert!(matches!(
        susy::spectrum_accumulate(&exp, 3.0, 5),
        Err(GsipError::UnboundLevel { .. })
    ));
}

#[test]
fn derivative_needs_five_nodes() {
    assert!(matches!(
        susy::derivative(&[0.0; 4], 0.1),
        Err(GsipError::Grid(_))
    ));
}

#[test]
fn operators_are_linear_at_zero() {
    let s = harmonic();
    let grid = Grid::new(-5.0, 5.0, 200).unwrap();
    let zero = GridFunction::zeros(grid);
    assert!(susy::apply_a(&s, 0.0, &zero)
        .unwrap()
        .values()
        .iter()
        .all(|&v| v == 0.0));
    assert!(susy::apply_a_dagger(&s, 0.0, &zero)
        .unwrap()
        .values()
        .iter()
        .all(|&v| v == 0.0));
}

#[test]
fn analytic_ground_state_is_annihilated() {
    for (s, lo, hi) in [
        (harmonic(), -6.0, 6.0),
        (
            FamilySpec::new(
                Family::Hyperbolic { alpha: 1.0, b: 0.0 },
                2.0,
                MassProfile::unit_mass(),
            )
            .unwrap(),
            -25.0,
            25.0,
        ),
    ] {
        let grid = Grid::new(lo, hi, 4000).unwrap();
        let psi = s.ground_state_on(&grid).unwrap();
        let a_psi = susy::apply_a(&s, s.a(), &psi).unwrap();
        assert!(a_psi.norm() / psi.norm() < 1e-6, "{}", a_psi.norm());
        // H₁ψ₀ = A†Aψ₀ = 0
        let h = susy::apply_a_dagger(&s, s.a(), &a_psi).unwrap();
        assert!(h.norm() / psi.norm() < 1e-5, "{}", h.norm());
    }
}

#[test]
fn ladder_first_excited_has_one_node() {
    let s = harmonic();
    let grid = Grid::new(-7.0, 7.0, 1500).unwrap();
    let psi0 = susy::ladder_excited_state(&s, 0.0, 0, &grid).unwrap();
    assert!((psi0.overlap(&s.ground_state_on(&grid).unwrap()) - 1.0).abs() < 1e-14);
    let psi1 = susy::ladder_excited_state(&s, 0.0, 1, &grid).unwrap();
    let op = verify::hamiltonian(&s, &grid).unwrap();
    let numeric = eigensolver::lowest_eigenpairs(&op, 2).unwrap();
    let numeric_nodes = numeric[1].grid_function(grid).unwrap().sign_changes();
    assert_eq!(numeric_nodes, 1);
    assert_eq!(psi1.sign_changes(), numeric_nodes);
}

#[test]
fn a_maps_excited_state_to_partner_eigenvector() {
    let s = harmonic();
    let grid = Grid::new(-8.0, 8.0, 3000).unwrap();
    let h1 = verify::hamiltonian(&s, &grid).unwrap();
    let h2 = verify::partner_hamiltonian(&s, &grid).unwrap();
    let pairs = eigensolver::lowest_eigenpairs(&h1, 2).unwrap();
    let psi1 = pairs[1].grid_function(grid).unwrap();
    let phi = susy::apply_a(&s, 0.0, &psi1).unwrap();
    let rq = h2.rayleigh_quotient(phi.values());
    assert!(
        (rq - pairs[1].energy).abs() / pairs[1].energy < 1e-4,
        "{rq}"
    );
    let e2 = eigensolver::lowest_eigenpairs(&h2, 1).unwrap();
    assert!(phi.overlap(&e2[0].grid_function(grid).unwrap()) > 0.9999);
}

#[test]
fn a_dagger_a_matches_tridiagonal_operator_at_second_order() {
    let s = FamilySpec::new(Family::OscShift { r0: 2.0 }, 0.3, MassProfile::sech()).unwrap();
    let mut rng_state = 0x2545f4914f6cdd1du64;
    let mut next = move || {
        rng_state ^= rng_state << 13;
        rng_state ^= rng_state >> 7;
        rng_state ^= rng_state << 17;
        (rng_state >> 11) as f64 / (1u64 << 53) as f64
    };
    let coarse = Grid::new(-3.0, 3.0, 400).unwrap();
    let fine = coarse.refined();
    let error = |grid: Grid, centers: &[(f64, f64, f64)]| {
        let psi = bump(grid, centers);
        let op = verify::hamiltonian(&s, &grid).unwrap();
        let direct = op.apply(psi.values());
        let a_psi = susy::apply_a(&s, s.a(), &psi).unwrap();
        let factored = susy::apply_a_dagger(&s, s.a(), &a_psi).unwrap();
        let diff: Vec<f64> = direct
            .iter()
            .zip(factored.values())
            .map(|(d, f)| d - f)
            .collect();
        GridFunction::new(grid, diff).unwrap().norm() / psi.norm()
    };
    for _ in 0..20 {
        let centers: Vec<(f64, f64, f64)> = (0..3)
            .map(|_| (2.0 * next() - 1.0, 0.25 + 0.2 * next(), 2.0 * next() - 1.0))
            .collect();
        let (ec, ef) = (error(coarse, &centers), error(fine, &centers));
        let h = coarse.spacing();
        assert!(ec < 200.0 * h * h, "coarse error {ec}");
        assert!(ec / ef > 3.0, "order: {ec} -> {ef}");
    }
}

#[test]
fn isospectral_shift_for_builtin_examples() {
    let cases = [
        harmonic(),
        FamilySpec::new(
            Family::Exponential {
                alpha: 1.0,
                u0: 1.0,
            },
            3.5,
            MassProfile::unit_mass(),
        )
        .unwrap(),
        FamilySpec::new(Family::OscShift { r0: 2.0 }, 0.0, MassProfile::sech()).unwrap(),
        FamilySpec::new(
            Family::Trigonometric { alpha: 1.0, b: 0.5 },
            -3.0,
            MassProfile::unit_mass(),
        )
        .unwrap(),
    ];
    for s in cases {
        let k = s.bound_level_count(4).min(4);
        let grid = verify::auto_box(&s, k - 1, 3000).unwrap().grid;
        let e1 = eigensolver::richardson_refine(|g| verify::hamiltonian(&s, g), &grid, k).unwrap();
        let e2 =
            eigensolver::richardson_refine(|g| verify::partner_hamiltonian(&s, g), &grid, k - 1)
                .unwrap();
        for j in 0..k - 1 {
            let rel = (e2[j] - e1[j + 1]).abs() / e1[j + 1];
            assert!(
                rel < 1e-3,
                "{} level {j}: {} vs {}",
                s.kind(),
                e2[j],
                e1[j + 1]
            );
        }
    }
}

#[test]
fn normalizability_examples() {
    let s = harmonic();
    let c = susy::check_normalizability(&s, 0.0).unwrap();
    assert!(c.normalizable && c.lower < 0.0 && c.upper > 0.0);
    let hyp = FamilySpec::new(
        Family::Hyperbolic { alpha: 1.0, b: 0.3 },
        0.5,
        MassProfile::unit_mass(),
    )
    .unwrap();
    assert!(hyp.check_normalizability().unwrap().normalizable);
    // Direct integration of ψ₀² for the exponential family with a < 0
    // grows without bound as the upper limit moves out.
    let bad = FamilySpec::new(
        Family::Exponential {
            alpha: 1.0,
            u0: 1.0,
        },
        -0.5,
        MassProfile::unit_mass(),
    )
    .unwrap();
    assert!(!bad.check_normalizability().unwrap().normalizable);
    let mass = |hi: f64| {
        let grid = Grid::new(-3.0, hi, 20_000).unwrap();
        grid.nodes()
            .map(|x| (2.0 * bad.log_ground_state(x, -0.5).unwrap()).exp())
            .sum::<f64>()
            * grid.spacing()
    };
    assert!(mass(40.0) > 10.0 * mass(10.0));
}

fn discrete_adjoint_gap(
    s: &FamilySpec,
    grid: Grid,
    f: &[(f64, f64, f64)],
    g: &[(f64, f64, f64)],
) -> f64 {
    let phi = bump(grid, f);
    let psi = bump(grid, g);
    let lhs = susy::apply_a_dagger(s, s.a(), &phi).unwrap().dot(&psi);
    let rhs = phi.dot(&susy::apply_a(s, s.a(), &psi).unwrap());
    (lhs - rhs).abs() / (phi.norm() * psi.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_adjointness(
        c1 in -1.5f64..1.5, w1 in 0.2f64..0.5, c2 in -1.5f64..1.5, w2 in 0.2f64..0.5,
        amp in -2.0f64..2.0,
    ) {
        let s = FamilySpec::new(Family::OscShift { r0: 2.0 }, 0.5, MassProfile::sech()).unwrap();
        let grid = Grid::new(-6.0, 6.0, 1200).unwrap();
        let gap = discrete_adjoint_gap(&s, grid, &[(c1, w1, 1.0)], &[(c2, w2, amp), (0.0, 0.3, 1.0)]);
        prop_assert!(gap < 1e-8, "gap {}", gap);
    }

    #[test]
    fn accumulated_spectrum_matches_closed_form(
        kind in 0usize..6, a in 0.5f64..6.0, alpha in 0.2f64..1.5, r0 in 0.1f64..4.0, n in 0usize..=10,
    ) {
        let kind = FamilyKind::ALL[kind];
        let (family, a) = match kind {
            FamilyKind::OscShift => (Family::OscShift { r0 }, a),
            FamilyKind::Exponential => (Family::Exponential { alpha, u0: 1.0 }, a),
            FamilyKind::OscLinearG => (Family::OscLinearG, a),
            FamilyKind::OscInverseG => (Family::OscInverseG { alpha, c1: r0 }, -a),
            FamilyKind::Trigonometric => (Family::Trigonometric { alpha, b: 0.0 }, -a),
            FamilyKind::Hyperbolic => (Family::Hyperbolic { alpha, b: 0.0 }, a),
        };
        let s = FamilySpec::new(family, a, MassProfile::unit_mass()).unwrap();
        match (s.spectrum_of(n), susy::spectrum_accumulate(&s, a, n)) {
            (Ok(closed), Ok(sum)) => prop_assert!((closed - sum).abs() <= 1e-12 * closed.abs().max(1.0)),
            (Err(_), _) => {}
            (Ok(closed), Err(e)) => prop_assert!(false, "closed {} but accumulate failed: {}", closed, e),
        }
    }
}
