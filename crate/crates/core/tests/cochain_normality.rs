use proptest::prelude::*;
use qc_cartan::cochain::*;
use qc_cartan::exterior::{Family, Generator};
use qc_cartan::lie::LieModel;
use qc_cartan::random::rng;
use qc_cartan::structure::{build_rules_with, Mode, Perturbation};
use qc_cartan::tensor::{make_constants, StandardConstants};
use qc_cartan::{rat, GaussRational};

fn setup(n: usize, sig: (usize, usize)) -> (StandardConstants, LieModel) {
    let c = make_constants(n, sig).unwrap();
    let m = LieModel::new(c.clone());
    (c, m)
}

#[test]
fn zero_components_give_zero_cochain() {
    let (_, m) = setup(1, (1, 0));
    let k = assemble_kappa(&CurvatureComponents::zero(1), &m).unwrap();
    assert!(k.is_zero());
    assert!(homogeneity_classify(&m, &k).is_empty());
    let tr = DualBasis::trace(&m).unwrap();
    assert!(kostant_codiff_direct(&m, &k, &tr).is_zero());
    let rep = check_normality(&CurvatureComponents::zero(1), &m, &tr).unwrap();
    assert!(rep.passed());
    assert_eq!(rep.kappa_nonzero, 0);
}

// ψ₁(K(E₂, E₃)) = iR ((η₂+iη₃)∧(η₂−iη₃))(E₂, E₃) = iR(−2i) = 2R
#[test]
fn r_only_lands_on_e2_e3() {
    let (_, m) = setup(1, (1, 0));
    let mut comps = CurvatureComponents::zero(1);
    comps.r = rat(1, 1);
    let k = assemble_kappa(&comps, &m).unwrap();
    let psi1 = m.pos(Generator::Psi(0));
    assert_eq!(k.get(1, 2).0[psi1], GaussRational::from_int(2));
    assert_eq!(k.get(2, 1).0[psi1], GaussRational::from_int(-2));
    // ψ₂(K(E₁, E₂)) from −iR η₁∧(η₂+iη₃), real part: 0; ψ₃: −R
    let psi3 = m.pos(Generator::Psi(2));
    assert_eq!(k.get(0, 1).0[psi3], GaussRational::from_int(-1));
    assert_eq!(k.nonzero_count(), 3);
}

// Γ₁₁(K(Z₁, Z_1̄)) = π^σ_1̄ S_{111σ}; with n = 1 only σ = 2 contributes.
#[test]
fn s_only_contracts_with_pi() {
    let (c, m) = setup(1, (1, 0));
    let mut r = rng(2);
    let comps = CurvatureComponents::random_with(&mut r, &c, &[Family::S]);
    let k = assemble_kappa(&comps, &m).unwrap();
    let mut want = GaussRational::zero();
    for s in 0..2u8 {
        want += &(c.pi_ub(s as usize, 0) * &comps.s.get(&[0, 0, 0, s]));
    }
    assert!(!want.is_zero());
    assert_eq!(k.get(3, 5).0[m.pos(Generator::Gamma(0, 0))], want);
}

#[test]
fn assembly_matches_structure_equations() {
    for (n, sig) in [(1, (1, 0)), (2, (2, 0)), (2, (1, 1))] {
        let (c, m) = setup(n, sig);
        let curved = build_rules_with(c.clone(), Mode::Curved, Perturbation::None).unwrap();
        let flat = build_rules_with(c.clone(), Mode::Flat, Perturbation::None).unwrap();
        let mut r = rng(40 + n as u64);
        for _ in 0..3 {
            let comps = CurvatureComponents::random(&mut r, &c);
            assert_eq!(assemble_kappa(&comps, &m).unwrap(), kappa_from_rules(&comps, &curved, &flat, &m).unwrap());
        }
    }
}

#[test]
fn invalid_components_are_rejected() {
    let (c, m) = setup(1, (1, 0));
    let mut comps = CurvatureComponents::zero(1);
    comps.v.set(&[0, 0, 1], GaussRational::one());
    assert!(matches!(comps.validate(&c), Err(CochainError::NotSymmetric("V"))));
    assert!(assemble_kappa(&comps, &m).is_err());
    let mut comps = CurvatureComponents::zero(1);
    comps.l.set(&[0, 0], GaussRational::one());
    assert!(matches!(comps.validate(&c), Err(CochainError::NotJReal("L"))));
}

#[test]
fn normality_holds_for_random_components() {
    for (n, sig) in [(1, (1, 0)), (2, (2, 0)), (2, (1, 1))] {
        let (c, m) = setup(n, sig);
        let tr = DualBasis::trace(&m).unwrap();
        let mut r = rng(7);
        for _ in 0..10 {
            let rep = check_normality(&CurvatureComponents::random(&mut r, &c), &m, &tr).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert!(rep.kappa_nonzero > 0);
        }
    }
}

#[test]
fn broken_s_symmetry_is_detected() {
    let (c, m) = setup(1, (1, 0));
    let tr = DualBasis::trace(&m).unwrap();
    let mut comps = CurvatureComponents::random_with(&mut rng(5), &c, &[Family::S]);
    let v = comps.s.get(&[0, 0, 0, 1]);
    comps.s.set(&[0, 0, 0, 1], &v + &GaussRational::one());
    let rep = check_normality(&comps, &m, &tr).unwrap();
    assert!(rep.invalid.is_some());
    assert!(!rep.passed());
    assert!(rep.codiff_nonzero > 0);
    assert!(rep.trace_conditions.iter().any(|t| t.nonzero > 0));
}

#[test]
fn closed_form_matches_direct_form() {
    for (n, sig) in [(1, (1, 0)), (2, (1, 1))] {
        let (_, m) = setup(n, sig);
        let tr = DualBasis::trace(&m).unwrap();
        let pr = DualBasis::printed(&m).unwrap();
        let mut r = rng(100 + n as u64);
        for _ in 0..10 {
            let k = Cochain2::random_target(&mut r, &m);
            let direct = kostant_codiff_direct(&m, &k, &tr);
            assert_eq!(kostant_codiff_closed(&m, &k, &tr, &ClosedCoefficients::from_duals(&tr)).unwrap(), direct);
            // the literal coefficients are the same formula at the printed pairing values
            let direct_pr = kostant_codiff_direct(&m, &k, &pr);
            assert_eq!(kostant_codiff_closed(&m, &k, &pr, &ClosedCoefficients::printed(n)).unwrap(), direct_pr);
            assert_ne!(kostant_codiff_closed(&m, &k, &tr, &ClosedCoefficients::printed(n)).unwrap(), direct);
        }
    }
}

#[test]
fn closed_coefficients() {
    for n in 1..=3 {
        let (_, m) = setup(n, (n, 0));
        let tr = DualBasis::trace(&m).unwrap();
        let cal = ClosedCoefficients::from_duals(&tr);
        assert_eq!(cal.c1, rat(1, 8 * (n as i64 + 3)));
        assert_eq!(cal.c2, rat(2, 1));
        assert_eq!(ClosedCoefficients::from_duals(&DualBasis::printed(&m).unwrap()), ClosedCoefficients::printed(n));
    }
}

#[test]
fn psi_valued_constant_cochain() {
    // only ψ values: [Ê, ·] and [Ẑ, ·] kill 𝔤₂, so ∂*K is the η-group alone
    let (_, m) = setup(1, (1, 0));
    let tr = DualBasis::trace(&m).unwrap();
    let mut k = Cochain2::zero(&m);
    let mut v = qc_cartan::lie::LieCoord::zero(m.dim());
    v.0[m.pos(Generator::Psi(1))] = GaussRational::one();
    k.set(3, 4, v);
    let direct = kostant_codiff_direct(&m, &k, &tr);
    assert_eq!(direct, kostant_codiff_closed(&m, &k, &tr, &ClosedCoefficients::from_duals(&tr)).unwrap());
    assert!(!direct.is_zero());
    assert!(direct.0[3..].iter().all(|x| x.is_zero()));
}

#[test]
fn closed_form_rejects_values_outside_target() {
    let (_, m) = setup(1, (1, 0));
    let tr = DualBasis::trace(&m).unwrap();
    let mut k = Cochain2::zero(&m);
    k.set(0, 1, m.unit(Generator::Phi0));
    assert!(matches!(
        kostant_codiff_closed(&m, &k, &tr, &ClosedCoefficients::from_duals(&tr)),
        Err(CochainError::OutsideTarget(0, 1))
    ));
}

#[test]
fn homogeneity_table() {
    for (n, sig) in [(1, (1, 0)), (2, (1, 1))] {
        let (_, m) = setup(n, sig);
        for (f, ls) in family_homogeneities(&mut rng(9), &m).unwrap() {
            assert_eq!(ls.into_iter().collect::<Vec<_>>(), vec![expected_homogeneity(f).unwrap()], "{f:?}");
        }
    }
}

#[test]
fn assembled_kappa_is_regular_and_slices_sum() {
    let (c, m) = setup(2, (2, 0));
    let mut r = rng(12);
    for _ in 0..5 {
        let k = assemble_kappa(&CurvatureComponents::random(&mut r, &c), &m).unwrap();
        let slices = homogeneity_classify(&m, &k);
        assert!(is_regular(&slices));
        assert!(slices.keys().all(|l| (2..=6).contains(l)));
        let mut sum = Cochain2::zero(&m);
        for s in slices.values() {
            sum = sum.add(s).unwrap();
        }
        assert_eq!(sum, k);
    }
}

#[test]
fn component_file_round_trip() {
    let (c, _) = setup(2, (1, 1));
    let comps = CurvatureComponents::random(&mut rng(3), &c);
    let text = write_components(&comps, (1, 1));
    let (back, k) = read_components(&text).unwrap();
    assert_eq!(back, comps);
    assert_eq!((k.n, k.g(3, 3).clone()), (c.n, c.g(3, 3).clone()));
    assert_eq!(write_components(&back, (1, 1)), text);
}

#[test]
fn component_file_symmetrizes_and_validates() {
    let text = r#"{"n": 1, "signature": [1, 0], "V": [[[2, 1, 1], "1/2", 0]], "R": [[[], 3, 0]]}"#;
    let (comps, _) = read_components(text).unwrap();
    assert_eq!(comps.v.get(&[0, 0, 1]), GaussRational::from_parts(1, 2, 0, 1));
    assert_eq!(comps.v.get(&[0, 1, 0]), GaussRational::from_parts(1, 2, 0, 1));
    assert_eq!(comps.r, rat(3, 1));
    for bad in [
        r#"{"n": 1, "signature": [1, 0], "R": [[[], 0, 1]]}"#,
        r#"{"n": 1, "signature": [1, 0], "V": [[[1, 1, 3], 1, 0]]}"#,
        r#"{"n": 1, "signature": [1, 0], "V": [[[1, 1], 1, 0]]}"#,
        r#"{"n": 1, "signature": [1, 0], "V": [[[1, 1, 2], 1, 0], [[2, 1, 1], 2, 0]]}"#,
        r#"{"n": 1, "signature": [1, 0], "L": [[[1, 1], 1, 0]]}"#,
        r#"{"n": 1, "signature": [1, 0], "X": []}"#,
        r#"{"n": 0, "signature": [0, 0]}"#,
        r#"{"n": 2, "signature": [1, 0]}"#,
        r#"{"n": 1, "signature": [1, 0], "P": [[[], "1/0", 0]]}"#,
        "not json",
    ] {
        assert!(read_components(bad).is_err(), "{bad}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn prop_codiff_linear(seed in any::<u64>(), a in -3i64..=3, b in -3i64..=3) {
        let (_, m) = setup(1, (1, 0));
        let tr = DualBasis::trace(&m).unwrap();
        let mut r = rng(seed);
        let k1 = Cochain2::random_target(&mut r, &m);
        let k2 = Cochain2::random_target(&mut r, &m);
        let s = GaussRational::from_parts(a, 1, b, 1);
        let lhs = kostant_codiff_direct(&m, &k1.add(&k2.scale(&s)).unwrap(), &tr);
        let d1 = kostant_codiff_direct(&m, &k1, &tr);
        let d2 = kostant_codiff_direct(&m, &k2, &tr);
        let rhs: Vec<_> = d1.0.iter().zip(&d2.0).map(|(x, y)| x.add(&y.scale(&s))).collect();
        prop_assert_eq!(lhs.0, rhs);
    }

    #[test]
    fn prop_random_components_valid(seed in any::<u64>()) {
        let (c, m) = setup(1, (1, 0));
        let comps = CurvatureComponents::random(&mut rng(seed), &c);
        prop_assert!(comps.validate(&c).is_ok());
        let k = assemble_kappa(&comps, &m).unwrap();
        prop_assert!(k.validate(&m).is_ok());
        prop_assert!(is_regular(&homogeneity_classify(&m, &k)));
    }

    #[test]
    fn prop_reader_never_panics(s in "\\PC{0,120}") {
        let _ = read_components(&s);
    }
}
