use qc_cartan::bianchi::*;
use qc_cartan::exterior::{FormExpr, Generator};
use qc_cartan::structure::*;
use qc_cartan::tensor::make_constants;

fn all_zero(rs: &DRuleSet) -> bool {
    d_square_report(rs).unwrap().iter().all(|r| r.zero)
}

#[test]
fn flat_d_squared_vanishes_n1_to_n3() {
    for n in 1..=3 {
        let rs = build_rules(n, Mode::Flat).unwrap();
        assert_eq!(rs.coframe.len(), [21, 36, 55][n - 1]);
        assert!(all_zero(&rs), "n = {n}");
    }
}

#[test]
fn curved_d_squared_vanishes_n1() {
    assert!(all_zero(&build_rules(1, Mode::Curved).unwrap()));
}

#[test]
fn curved_d_squared_vanishes_n2_indefinite() {
    let rs = build_rules_with(make_constants(2, (1, 1)).unwrap(), Mode::Curved, Perturbation::None).unwrap();
    assert!(all_zero(&rs));
}

#[test]
fn broken_v_symmetry_is_detected() {
    let rs = build_rules_with(make_constants(1, (1, 0)).unwrap(), Mode::Curved, Perturbation::BreakVSymmetry).unwrap();
    let rep = d_square_report(&rs).unwrap();
    let g11 = rep.iter().find(|r| r.generator == "Gamma11").unwrap();
    assert!(!g11.zero);
    assert!(d_square_sampled(&rs, 3).unwrap().iter().any(|(_, z)| !z));
}

#[test]
fn flat_rules_have_no_curvature() {
    let rs = build_rules(1, Mode::Flat).unwrap();
    assert!(rs.rules.symbols.is_empty());
    for g in rs.coframe.generators() {
        assert!(rs.d_generator(*g).symbols().is_empty(), "{g}");
    }
}

#[test]
fn dtheta_flat_term_groups() {
    // dθ¹ for n = 1: −iφ¹∧η₁ − π φ^ᾱ∧(η₂+iη₃) − ½(φ₀+iφ₁)∧θ − ½(φ₂+iφ₃)∧πθ̄ − πΓ∧θ
    let rs = build_rules(1, Mode::Flat).unwrap();
    let cf = &rs.coframe;
    let dt = rs.d_generator(Generator::Theta(0));
    let mono = |a: &FormExpr, b: &FormExpr| dt.coeff(*(a ^ b).terms().next().unwrap().0);
    assert!(!mono(&cf.phiu(0), &cf.eta(0)).is_zero());
    assert!(!mono(&cf.phi0(), &cf.theta(0)).is_zero());
    assert!(mono(&cf.phi0(), &cf.theta(1)).is_zero());
}

#[test]
fn curved_dgamma_contains_s_terms() {
    let rs = build_rules(1, Mode::Curved).unwrap();
    let f = rs.d_generator(Generator::Gamma(0, 0));
    let names: Vec<String> = f.symbols().iter().map(|s| s.to_string()).collect();
    assert!(names.iter().any(|s| s.starts_with("S_11")), "{names:?}");
}

#[test]
fn real_generators_stay_real() {
    for mode in [Mode::Flat, Mode::Curved] {
        let rs = build_rules(1, mode).unwrap();
        for (g, ok) in reality_report(&rs).unwrap() {
            assert!(ok, "{g} in {mode:?}");
        }
    }
}

#[test]
fn sampled_smoke_mode_n1() {
    let rs = build_rules(1, Mode::Curved).unwrap();
    assert!(d_square_sampled(&rs, 11).unwrap().iter().all(|(_, z)| *z));
}

#[test]
fn star_forms_two_paths_n1() {
    let rs = build_rules(1, Mode::Curved).unwrap();
    for s in star_forms(&rs).unwrap() {
        assert!(s.paths_agree && s.symmetric && s.real != Some(false), "{s:?}");
    }
}

#[test]
fn zero_curvature_gives_zero_star_forms() {
    let rs = build_rules(1, Mode::Curved).unwrap();
    let table = StarTable::expansion(&rs.coframe);
    for fam in qc_cartan::exterior::Family::CURVATURE {
        for idx in family_indices(fam, 2) {
            let z = table.get(fam, &idx).substitute(&mut |_| qc_cartan::exterior::CoeffPoly::zero());
            assert!(z.is_zero());
        }
    }
}

#[test]
fn bianchi_combinations_n1() {
    let rs = build_rules(1, Mode::Curved).unwrap();
    for r in bianchi_residual(&rs, 5).unwrap() {
        assert!(r.combination_zero && r.matches_raw, "{}: {:?}", r.target, r.residual);
    }
}

#[test]
fn random_stars_make_nontrivial_combinations() {
    let rs = build_rules(1, Mode::Curved).unwrap();
    let st = StarTable::random(&rs.coframe, 9);
    let rs2 = rs.with_stars(&st);
    for t in bianchi_targets(2) {
        let comb = bianchi_combination(&rs.coframe, &st, t);
        assert!(!comb.is_zero(), "{t}");
        assert_eq!(target_d_square(&rs2, t).unwrap(), comb, "{t}");
    }
}

#[test]
fn unsupported_n_is_rejected() {
    assert!(build_rules(0, Mode::Flat).is_err());
    assert!(build_rules(4, Mode::Flat).is_err());
}
