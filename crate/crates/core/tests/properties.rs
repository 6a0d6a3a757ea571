use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sl2adic::archimedean::rotated_real_subgroup_element;
use sl2adic::bttree::{act_end, act_vertex, distance, end_orbit_label_slf, End, TreeVertex};
use sl2adic::chabauty::{polar_decompose, PolarContext, PolarPair};
use sl2adic::padic::{square_class, Ext, ExtKind, Level, Padic, PrimeContext, Tower};
use sl2adic::sl2::{apply_involution, random_sl2, random_sl2_exact, Involution, Mat2, SLACK};

fn ctx(p: u32) -> &'static PrimeContext {
    PrimeContext::get(p, 30).unwrap()
}

fn prime() -> impl Strategy<Value = u32> {
    prop_oneof![Just(3u32), Just(5), Just(7), Just(11)]
}

fn kind() -> impl Strategy<Value = ExtKind> {
    prop_oneof![
        Just(ExtKind::Unramified),
        Just(ExtKind::RamifiedP),
        Just(ExtKind::RamifiedPS)
    ]
}

fn padic(c: &'static PrimeContext, r: &mut ChaCha8Rng) -> Padic {
    Padic::random_exact(c, r, -3, 3, 5)
}

fn eel(tw: &'static Tower, r: &mut ChaCha8Rng) -> Ext {
    Ext::random_exact(tw, Level::E, r, -2, 2, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn padic_field_laws(p in prime(), seed in any::<u64>()) {
        let c = ctx(p);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (padic(c, &mut r), padic(c, &mut r));
        prop_assert!((&(&a + &b) - &b - a.clone()).is_zero());
        prop_assert!((&(&a * &b) - &(&b * &a)).is_zero());
        let prod = &(&a * &a.inv().unwrap()) - &Padic::one(c);
        prop_assert!(prod.is_zero());
        prop_assert_eq!((&a * &b).valuation(), a.valuation() + b.valuation());
    }

    #[test]
    fn square_class_is_a_character(p in prime(), seed in any::<u64>()) {
        let c = ctx(p);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (padic(c, &mut r), padic(c, &mut r));
        let lx = square_class(&x).unwrap().label;
        let ly = square_class(&y).unwrap().label;
        prop_assert_eq!(square_class(&(&x * &y)).unwrap().label, lx.times(ly));
        prop_assert_eq!(square_class(&(&x * &(&y * &y))).unwrap().label, lx);
    }

    #[test]
    fn sigma_is_an_involutive_automorphism(p in prime(), k in kind(), seed in any::<u64>()) {
        let tw = Tower::e(ctx(p), k);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (eel(tw, &mut r), eel(tw, &mut r));
        prop_assert!((&(&x * &y).sigma() - &(&x.sigma() * &y.sigma())).is_zero());
        prop_assert!((&x.sigma().sigma() - &x).is_zero());
        let nxy = (&x * &y).norm_to_qp();
        prop_assert!((&nxy - &(&x.norm_to_qp() * &y.norm_to_qp())).is_zero());
    }

    #[test]
    fn det_is_multiplicative(p in prime(), k in kind(), seed in any::<u64>()) {
        let tw = Tower::e(ctx(p), k);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_sl2(tw, Level::E, &mut r, 4);
        let h = random_sl2(tw, Level::E, &mut r, 4);
        prop_assert!(g.mul(&h).is_sl(SLACK));
        // g g^-1 cancels down from the size of g, so the digits above 1 are lost
        let lost = 2.0 * g.norm_exponent().max(0.0);
        let back = g.mul(&g.inv_sl()).rel_defect(&Mat2::identity(tw));
        prop_assert!(back >= (g.precision() - SLACK) as f64 - lost);
    }

    #[test]
    fn tree_action_is_an_isometry(p in prime(), k in kind(), seed in any::<u64>()) {
        let tw = Tower::e(ctx(p), k);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let base = TreeVertex::base(tw, Level::E);
        let v = act_vertex(&random_sl2_exact(tw, Level::E, &mut r, 3), &base).unwrap();
        let w = act_vertex(&random_sl2_exact(tw, Level::E, &mut r, 3), &base).unwrap();
        let g = random_sl2_exact(tw, Level::E, &mut r, 3);
        let (gv, gw) = (act_vertex(&g, &v).unwrap(), act_vertex(&g, &w).unwrap());
        prop_assert_eq!(distance(&v, &w), distance(&w, &v));
        prop_assert_eq!(distance(&gv, &gw), distance(&v, &w));
    }

    #[test]
    fn end_action_composes(p in prime(), k in kind(), seed in any::<u64>()) {
        let tw = Tower::e(ctx(p), k);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_sl2_exact(tw, Level::E, &mut r, 3);
        let h = random_sl2_exact(tw, Level::E, &mut r, 3);
        let e = End::Finite(eel(tw, &mut r));
        let two = act_end(&g, &act_end(&h, &e).unwrap()).unwrap();
        prop_assert!(act_end(&g.mul(&h), &e).unwrap().same_as(&two));
    }

    #[test]
    fn slf_label_is_invariant(p in prime(), k in kind(), seed in any::<u64>()) {
        let tw = Tower::e(ctx(p), k);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let e = End::Finite(eel(tw, &mut r));
        let g = random_sl2_exact(tw, Level::Qp, &mut r, 3);
        let moved = act_end(&g, &e).unwrap();
        prop_assert_eq!(end_orbit_label_slf(&moved).unwrap(), end_orbit_label_slf(&e).unwrap());
    }

    #[test]
    fn involutions_are_homomorphisms(p in prime(), k in kind(), seed in any::<u64>()) {
        let tw = Tower::e(ctx(p), k);
        let c = tw.ctx;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let z = Ext::random_exact(tw, Level::E, &mut r, 0, 1, 3);
        let y = Padic::random_exact(c, &mut r, 0, 1, 3);
        let Ok(theta) = Involution::f1a(z, y) else { return Ok(()) };
        let g = random_sl2(tw, Level::E, &mut r, 3);
        let h = random_sl2(tw, Level::E, &mut r, 3);
        let lhs = apply_involution(&theta, &g.mul(&h)).unwrap();
        let rhs = apply_involution(&theta, &g)
            .unwrap()
            .mul(&apply_involution(&theta, &h).unwrap());
        let tol = (g.precision() - SLACK) as f64 - 2.0 * theta.precision_loss() as f64;
        prop_assert!(lhs.rel_defect(&rhs) >= tol);
    }

    #[test]
    fn polar_factors_rebuild_g(k in kind(), seed in any::<u64>()) {
        let tw = Tower::e(ctx(5), k);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        for (pair, level) in [(PolarPair::SlESlF, Level::E), (PolarPair::SlFHTheta1, Level::Qp)] {
            let pc = PolarContext::new(pair, tw).unwrap();
            let g = random_sl2(pc.tower(), level, &mut r, 4);
            let d = polar_decompose(&pc, &g).unwrap();
            prop_assert!(d.reconstruction_defect >= (g.precision() - SLACK) as f64);
            prop_assert!(d.displacement <= pc.diam);
        }
    }

    #[test]
    fn rotated_real_elements_stay_in_sl2(a in 0.1f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let d = (1.0 + b * c) / a;
        let g = rotated_real_subgroup_element(a, b, c, d).unwrap();
        prop_assert!(g.is_sl(1e-9));
    }
}
