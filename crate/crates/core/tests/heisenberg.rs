use proptest::prelude::*;
use qc_cartan::chart::*;
use qc_cartan::matrix::CMatrix;
use qc_cartan::tensor::make_constants;
use qc_cartan::{rat, GaussRational};

fn gi(v: i64) -> GaussRational {
    GaussRational::from_int(v)
}

#[test]
fn quaternion_units_multiply_like_i_j_k() {
    let [i, j, k] = quaternion_units();
    let id = CMatrix::identity(4);
    for m in [&i, &j, &k] {
        assert_eq!(m * m, -&id);
        assert_eq!(m.transpose(), -m);
    }
    assert_eq!(&i * &j, k);
    assert_eq!(&j * &k, i);
    assert_eq!(&k * &i, j);
}

#[test]
fn heisenberg_d_eta_by_hand() {
    // dη̂1 = dx1∧dx2 + dx3∧dx4, dη̂2 = dx1∧dx3 − dx2∧dx4, dη̂3 = dx1∧dx4 + dx2∧dx3
    let h = heisenberg();
    let w = |a: usize, b: usize| ChartForm::dx(a).wedge(&ChartForm::dx(b));
    let de = h.d_eta();
    assert_eq!(de[0], w(0, 1).add(&w(2, 3)));
    assert_eq!(de[1], w(0, 2).sub(&w(1, 3)));
    assert_eq!(de[2], w(0, 3).add(&w(1, 2)));
}

#[test]
fn heisenberg_axioms() {
    let h = heisenberg();
    assert!(h.kernel_ok());
    assert!(h.quaternion_ok());
    assert!(h.metric_ok());
    assert!(h.contact_residuals().is_empty());
}

#[test]
fn heisenberg_reeb_fields_are_vertical_coordinate_fields() {
    let h = heisenberg();
    let xi = h.solve_reeb().unwrap();
    for t in 0..3 {
        assert_eq!(xi[t], coord_field(4 + t));
    }
    assert!(h.reeb_residual_zero(&xi));
    // a wrong candidate fails
    let mut bad = xi.clone();
    bad[0] = coord_field(5);
    assert!(!h.reeb_residual_zero(&bad));
}

#[test]
fn heisenberg_alpha_vanishes_and_integ_closes() {
    let h = heisenberg();
    let xi = h.solve_reeb().unwrap();
    assert!(h.alpha(&xi).iter().all(ChartForm::is_zero));
    assert!(h.integ_residuals(&xi, &h.omega(&xi, 1)).iter().all(ChartForm::is_zero));
    // with the doubled normalisation the residual is −dη̂_s
    let r = h.integ_residuals(&xi, &h.omega(&xi, 2));
    let de = h.d_eta();
    for s in 0..3 {
        assert_eq!(r[s], de[s].scale(&gi(-1)));
    }
}

#[test]
fn lex_equations_close_with_zero_phi() {
    let h = heisenberg();
    let c = make_constants(1, (1, 0)).unwrap();
    for m in [rat(1, 1), rat(2, 1), rat(3, 5)] {
        let l = heisenberg_lex(&h, &c, m);
        assert!(lex_residuals(&l, &c).iter().all(ChartForm::is_zero));
    }
    // the g term alone reproduces dη̂1
    let l = heisenberg_lex(&h, &c, rat(1, 1));
    let tt = l.theta[0].wedge(&l.theta[0].conj()).add(&l.theta[1].wedge(&l.theta[1].conj()));
    assert_eq!(tt.scale(&GaussRational::from_parts(0, 1, 2, 1)), h.d_eta()[0]);
}

#[test]
fn lex_fails_for_wrong_theta() {
    let h = heisenberg();
    let c = make_constants(1, (1, 0)).unwrap();
    let mut l = heisenberg_lex(&h, &c, rat(1, 1));
    l.theta[1] = l.theta[1].scale(&gi(2));
    assert!(!lex_residuals(&l, &c).iter().all(ChartForm::is_zero));
    // a nonconstant gauge without the matching φ₀ also fails
    let mut l = heisenberg_lex(&h, &c, rat(1, 1));
    let f = Poly::constant(gi(1)).add(&Poly::coord(4));
    l.eta = std::array::from_fn(|s| l.eta[s].mul_poly(&f));
    assert!(!lex_residuals(&l, &c).iter().all(ChartForm::is_zero));
}

#[test]
fn omega_identities_hold() {
    let h = heisenberg();
    let c = make_constants(1, (1, 0)).unwrap();
    let xi = h.solve_reeb().unwrap();
    for m in [rat(1, 1), rat(2, 1)] {
        let l = heisenberg_lex(&h, &c, m);
        assert!(omega_identity_residuals(&h, &xi, &l, &c).iter().all(ChartForm::is_zero));
    }
}

#[test]
fn certificate_passes() {
    let cert = certify_heisenberg(rat(1, 1));
    assert!(cert.passed(), "{cert:#?}");
    assert!(!cert.integ_residual_zero_factor_two_omega);
    assert!(cert.lex.as_ref().unwrap().coframe_independent);
    let again = certify_heisenberg(rat(1, 1));
    assert_eq!(serde_json::to_string(&cert).unwrap(), serde_json::to_string(&again).unwrap());
}

#[test]
fn chart_file_round_trip() {
    let h = heisenberg();
    let file = chart_to_file(&h);
    let text = serde_json::to_string_pretty(&file).unwrap();
    let back = parse_chart(&text).unwrap();
    assert_eq!(back.eta, h.eta);
    assert_eq!(back.g, h.g);
    assert_eq!(back.i_mats, h.i_mats);
    assert!(back.certify().passed());
}

#[test]
fn chart_file_with_renamed_coordinates() {
    let mut file = chart_to_file(&heisenberg());
    let names = ["a", "b", "c", "d", "u", "v", "w"];
    let old = file.coordinates.clone();
    file.coordinates = names.iter().map(|s| s.to_string()).collect();
    for terms in &mut file.eta {
        for t in terms.iter_mut() {
            let k = old.iter().position(|n| *n == t.2).unwrap();
            t.2 = names[k].into();
        }
    }
    let chart = chart_from_file(&file).unwrap();
    let cert = chart.certify();
    assert!(cert.passed());
    assert!(cert.eta[0].contains("du"));
}

#[test]
fn broken_charts_are_detected() {
    let base = chart_to_file(&heisenberg());

    // doubling ĝ breaks the contact axiom
    let mut f = base.clone();
    f.g = (0..4).map(|i| (0..4).map(|j| if i == j { "1".into() } else { "0".into() }).collect()).collect();
    let cert = chart_from_file(&f).unwrap().certify();
    assert!(!cert.contact_axiom && !cert.passed());

    // swapping Î₂ and Î₃ breaks the quaternion relations
    let mut f = base.clone();
    f.i.swap(1, 2);
    assert!(!chart_from_file(&f).unwrap().quaternion_ok());

    // η̂ without dt term
    let mut f = base.clone();
    f.eta[0].retain(|t| t.2 != "t1");
    assert!(matches!(chart_from_file(&f), Err(ChartError::NotGraph { .. })));

    // x1² dx2 adds 2x1 dx1∧dx2 to dη̂1
    let mut f = base.clone();
    f.eta[0].push((vec![2, 0, 0, 0, 0, 0, 0], "1".into(), "x2".into()));
    let cert = chart_from_file(&f).unwrap().certify();
    assert!(!cert.contact_axiom);
}

#[test]
fn bad_chart_files() {
    let ok = serde_json::to_string(&chart_to_file(&heisenberg())).unwrap();
    assert!(parse_chart(&ok).is_ok());
    let cases = [
        "",
        "{}",
        "[]",
        &ok.replace("\"x1\"", "\"x2\""),
        &ok.replacen("\"t3\"]", "\"q\"]", 1),
        &ok.replace("\"coordinates\"", "\"coords\""),
        &ok.replacen("\"1/2\"", "\"1/0\"", 1),
        &ok.replacen("\"1/2\"", "\"1/2i\"", 1),
    ];
    for c in cases {
        assert!(parse_chart(c).is_err(), "accepted {c:?}");
    }
    let mut f = chart_to_file(&heisenberg());
    f.eta[1].push((vec![9, 0, 0, 0, 0, 0, 0], "1".into(), "x1".into()));
    assert_eq!(chart_from_file(&f).unwrap_err(), ChartError::TooLarge);
    let mut f = chart_to_file(&heisenberg());
    f.g.pop();
    assert!(matches!(chart_from_file(&f), Err(ChartError::MatrixShape(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_d_squared_zero(coefs in proptest::collection::vec((0u8..3, 0u8..3, 0u8..3, 0usize..7, -5i64..5), 1..6)) {
        let mut w = ChartForm::zero();
        for (a, b, c, k, v) in coefs {
            let mut p = Poly::zero();
            p.add_term([a, 0, b, 0, c, 0, 0], gi(v));
            w = w.add(&ChartForm::dx(k).mul_poly(&p));
        }
        prop_assert!(w.d().d().is_zero());
        // Leibniz for d(w ∧ η̂1)
        let e = heisenberg().eta[0].clone();
        let lhs = w.wedge(&e).d();
        let rhs = w.d().wedge(&e).sub(&w.wedge(&e.d()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn prop_gauge_scaling(m in 1i64..20, d in 1i64..20) {
        let h = heisenberg();
        let c = make_constants(1, (1, 0)).unwrap();
        let l = heisenberg_lex(&h, &c, rat(m, d));
        prop_assert!(lex_residuals(&l, &c).iter().all(ChartForm::is_zero));
    }

    #[test]
    fn prop_parser_never_panics(s in ".{0,200}") {
        let _ = parse_chart(&s);
    }
}
