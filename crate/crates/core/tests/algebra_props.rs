use proptest::prelude::*;
use qc_cartan::exterior::FormExpr;
use qc_cartan::random::{random_tensor, rng};
use qc_cartan::tensor::{jmap, make_constants, IndexSlot};
use qc_cartan::GaussRational;

fn gauss() -> impl Strategy<Value = GaussRational> {
    (-9i64..10, 1i64..7, -9i64..10, 1i64..7).prop_map(|(a, b, c, d)| GaussRational::from_parts(a, b, c, d))
}

// sums of monomials on the first 10 generators
fn form() -> impl Strategy<Value = FormExpr> {
    proptest::collection::vec((0u64..1024, gauss()), 0..5).prop_map(|terms| {
        let mut f = FormExpr::zero();
        for (m, c) in terms {
            f.add_assign(&FormExpr::monomial(m).scale(&c));
        }
        f
    })
}

fn monomial() -> impl Strategy<Value = (u64, FormExpr)> {
    (0u64..1024).prop_map(|m| (m, FormExpr::monomial(m)))
}

proptest! {
    #[test]
    fn gauss_field_laws(a in gauss(), b in gauss(), c in gauss()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        if let Some(inv) = a.inv() {
            prop_assert_eq!(&a * &inv, GaussRational::from_int(1));
        } else {
            prop_assert!(a.is_zero());
        }
        let back: GaussRational = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn wedge_associative_and_bilinear(x in form(), y in form(), z in form()) {
        prop_assert_eq!(x.wedge(&y).wedge(&z), x.wedge(&y.wedge(&z)));
        let mut yz = y.clone();
        yz.add_assign(&z);
        let mut rhs = x.wedge(&y);
        rhs.add_assign(&x.wedge(&z));
        prop_assert_eq!(x.wedge(&yz), rhs);
    }

    #[test]
    fn wedge_graded_commutative((a, x) in monomial(), (b, y) in monomial()) {
        let sign = if a.count_ones() * b.count_ones() % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(x.wedge(&y), y.wedge(&x).scale(&GaussRational::from_int(sign)));
        if a & b != 0 {
            prop_assert!(x.wedge(&y).is_zero());
        }
    }

    #[test]
    fn j_squared_is_sign_of_rank(seed in any::<u64>(), rank in 1usize..4, case in 0usize..4) {
        let (n, sig) = [(1, (1, 0)), (2, (2, 0)), (2, (1, 1)), (3, (1, 2))][case];
        let c = make_constants(n, sig).unwrap();
        let t = random_tensor(&mut rng(seed), n, vec![IndexSlot::LOWER; rank]);
        let sign = GaussRational::from_int(if rank % 2 == 0 { 1 } else { -1 });
        prop_assert_eq!(jmap(&jmap(&t, &c), &c), t.scale(&sign));
    }
}
