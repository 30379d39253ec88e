use gowers::fpspace::{format_vectors, parse_vectors};
use gowers::integrate::{integrate_csm, integrate_ncsm};
use gowers::mforms::{total_derivative, MultiaffineForm, MultilinearForm};
use gowers::ncpoly::{random_poly, NcPoly};
use gowers::par::Exec;
use gowers::Prime;
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = Prime> {
    prop_oneof![Just(2u8), Just(3), Just(5)].prop_map(|p| Prime::new(p as u64).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn vectors_round_trip(p in prime(), n in 1usize..5, raw in prop::collection::vec(prop::collection::vec(0u8..5, 4), 0..6)) {
        let vs: Vec<Vec<u8>> = raw.iter().map(|v| v[..n].iter().map(|c| c % p.get()).collect()).collect();
        let (q, m, back) = parse_vectors(&format_vectors(p, n, &vs)).unwrap();
        prop_assert_eq!((q, m, back), (p, n, vs));
    }

    #[test]
    fn forms_round_trip(p in prime(), n in 1usize..4, k in 1usize..4, seed in any::<u64>()) {
        let mut s = seed;
        let t = MultilinearForm::from_fn(p, n, k, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) % p.get() as u64) as u8
        }).unwrap();
        prop_assert_eq!(&MultilinearForm::parse(&t.to_text()).unwrap(), &t);
        let a = MultiaffineForm::from_multilinear(&t);
        prop_assert_eq!(MultiaffineForm::parse(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn polynomials_round_trip(p in prime(), n in 1usize..4, k in 1usize..4, deep in any::<bool>(), seed in any::<u64>()) {
        let poly = random_poly(p, n, k, deep, seed);
        prop_assert_eq!(NcPoly::parse(&poly.to_text()).unwrap(), poly);
    }

    #[test]
    fn integration_inverts_derivative(p in prop_oneof![Just(2u64), Just(3)], n in 1usize..4, seed in any::<u64>()) {
        let p = Prime::new(p).unwrap();
        let poly = random_poly(p, n, 3, p == Prime::TWO, seed);
        let t = total_derivative(&poly, 3).unwrap();
        let q = if p == Prime::TWO { integrate_ncsm(&t, Exec::default()) } else { integrate_csm(&t, Exec::default()) }.unwrap();
        prop_assert_eq!(total_derivative(&q, 3).unwrap(), t);
    }
}
