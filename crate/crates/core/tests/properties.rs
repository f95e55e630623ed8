use proptest::prelude::*;
use quadrifold::chow::{ChowClass, Pullback};
use quadrifold::gfpoly::{BinaryForm, Extension, Field, ProjPoint1};

fn field_strategy() -> impl Strategy<Value = Field> {
    prop_oneof![Just((3, 1)), Just((5, 1)), Just((7, 1)), Just((3, 2)), Just((5, 2)), Just((3, 3))].prop_map(|(p, k)| Field::new(p, k).unwrap())
}

fn chow_class(n: u32) -> impl Strategy<Value = ChowClass> {
    prop::collection::vec((-5i128..=5, 0..=n + 1, 0usize..3), 0..6).prop_map(move |terms| {
        terms.into_iter().fold(ChowClass::zero(n), |acc, (c, a, b)| {
            let beta = [Pullback::One, Pullback::E, Pullback::I][b];
            (&acc + &ChowClass::monomial(n, c, a, beta)).unwrap()
        })
    })
}

fn chow_triple() -> impl Strategy<Value = (ChowClass, ChowClass, ChowClass)> {
    (1u32..=4).prop_flat_map(|n| (chow_class(n), chow_class(n), chow_class(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn chow_ring_axioms((a, b, c) in chow_triple()) {
        let ab = a.multiply(&b).unwrap();
        prop_assert_eq!(&ab, &b.multiply(&a).unwrap());
        prop_assert_eq!(ab.multiply(&c).unwrap(), a.multiply(&b.multiply(&c).unwrap()).unwrap());
        let sum = (&b + &c).unwrap();
        prop_assert_eq!(a.multiply(&sum).unwrap(), (&ab + &a.multiply(&c).unwrap()).unwrap());
    }

    #[test]
    fn degree_is_linear(n in 1u32..=4, c in prop::collection::vec(-9i128..=9, 5)) {
        let top = |e: i128, i: i128| {
            (&ChowClass::monomial(n, e, n + 1, Pullback::E) + &ChowClass::monomial(n, i, n + 1, Pullback::I)).unwrap()
        };
        let (a, b) = (top(c[0], c[1]), top(c[2], c[3]));
        let da = a.degree().unwrap();
        let db = b.degree().unwrap();
        let ds = (&a.scale(c[4]) + &b).unwrap().degree().unwrap();
        prop_assert_eq!((ds.deg_e, ds.deg_i), (c[4] * da.deg_e + db.deg_e, c[4] * da.deg_i + db.deg_i));
        // xi^(n+2) reduces to -eE xi^(n+1)
        prop_assert_eq!(ChowClass::xi(n).pow(n + 2).scale(c[0]).degree().unwrap().deg_e, -c[0]);
        if c[0] != 0 {
            prop_assert!(ChowClass::xi(n).pow(n + 1).scale(c[0]).degree().is_err());
        }
    }

    #[test]
    fn field_axioms(f in field_strategy(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (f.sample(&mut rng), f.sample(&mut rng), f.sample(&mut rng));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(f.sub(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
        }
        let sq = f.mul(a, a);
        let r = f.sqrt(sq).unwrap();
        prop_assert_eq!(f.mul(r, r), sq);
        prop_assert_eq!(f.pow(a, f.order()), a);
    }

    #[test]
    fn forms_multiply_like_functions(
        f in field_strategy(),
        xs in prop::collection::vec(any::<u64>(), 3..6),
        ys in prop::collection::vec(any::<u64>(), 1..5),
        seed in any::<u64>(),
    ) {
        let q = f.order();
        let a = BinaryForm::new(&f, xs.iter().map(|&x| f.element(x % q).unwrap()).collect());
        let b = BinaryForm::new(&f, ys.iter().map(|&x| f.element(x % q).unwrap()).collect());
        let ab = a.mul(&b).unwrap();
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..4 {
            let (u, v) = (f.sample(&mut rng), f.sample(&mut rng));
            prop_assert_eq!(ab.evaluate(u, v), f.mul(a.evaluate(u, v), b.evaluate(u, v)));
        }
        if !b.is_zero() {
            prop_assert_eq!(ab.divide_exact(&b).unwrap(), a.clone());
        }
        if !a.is_zero() && !b.is_zero() {
            let g = ab.gcd(&b).unwrap();
            prop_assert!(b.divide_exact(&g).is_ok());
            prop_assert!(ab.divide_exact(&g).is_ok());
        }
    }

    #[test]
    fn extension_round_trips(seed in any::<u64>(), m in 1u32..=3) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let base = Field::prime(5).unwrap();
        let ext = Extension::new(&base, m).unwrap();
        let big = ext.field();
        let x = base.sample(&mut rng);
        let y = big.sample(&mut rng);
        prop_assert_eq!(ext.restrict(ext.embed(x)), Some(x));
        prop_assert_eq!(ext.frobenius(ext.embed(x)), ext.embed(x));
        let t = ext.trace(y);
        prop_assert_eq!(ext.embed(t), ext.frobenius(ext.embed(t)));
        let p = ProjPoint1::affine(&base, x);
        prop_assert_eq!(p.lift(&ext).restrict(&ext), Some(p));
    }
}
