use std::sync::Arc;

use num_traits::{One, Zero};
use pachner_core::chain3d::{check_complex, Vars3};
use pachner_core::chain4d::{build_f3_4d, build_f4_4d, gauge_transform};
use pachner_core::grassmann::{berezin_integrate, integrate_measure, Monomial};
use pachner_core::samples;
use pachner_core::scalars::{frac, sample_distinct_zetas};
use pachner_core::weights3d::{
    deformed_integrated_weight, integrated_weight, is_consistent, move_14_sides, move_23_sides,
    random_consistent_alpha, solve_alpha_move,
};
use pachner_core::{
    pachner_move, AlphaSystem, GeneratorRegistry, GrassmannElement, Matrix, PachnerMove, Scalar, SkewMatrix,
    Triangulation,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar() -> impl Strategy<Value = Scalar> {
    (-50i64..=50, 1i64..=12).prop_map(|(n, d)| frac(n, d))
}

fn registry(n: usize) -> Arc<GeneratorRegistry> {
    GeneratorRegistry::new((0..n).map(|k| format!("g{k}"))).unwrap()
}

/// Element of a 6-generator algebra from (monomial, coefficient) pairs.
fn element(reg: Arc<GeneratorRegistry>) -> impl Strategy<Value = GrassmannElement> {
    prop::collection::vec((0u64..64, scalar()), 0..6).prop_map(move |terms| {
        let mut x = GrassmannElement::zero(&reg);
        for (m, c) in terms {
            x.add_term(m, c);
        }
        x
    })
}

fn even_nilpotent(reg: Arc<GeneratorRegistry>) -> impl Strategy<Value = GrassmannElement> {
    element(reg).prop_map(|x| x.filter(|m: Monomial| m != 0 && m.count_ones() % 2 == 0))
}

fn skew(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-6i64..=6, n * (n.saturating_sub(1)) / 2).prop_map(move |vals| {
        let mut m = Matrix::zeros(n, n);
        let mut it = vals.into_iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = Scalar::from_integer(it.next().unwrap().into());
                m.set(i, j, v.clone());
                m.set(j, i, -v);
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &a * &b + &a * &c);
        if !a.is_zero() {
            prop_assert!((&a * a.recip()).is_one());
        }
    }

    #[test]
    fn generators_anticommute(i in 0usize..6, j in 0usize..6) {
        let reg = registry(6);
        let (x, y) = (GrassmannElement::generator(&reg, i), GrassmannElement::generator(&reg, j));
        prop_assert_eq!(&x * &y, -&(&y * &x));
        if i == j {
            prop_assert!((&x * &y).is_zero());
        }
    }

    #[test]
    fn product_is_associative(x in element(registry(6)), y in element(registry(6)), z in element(registry(6))) {
        let reg = x.registry().clone();
        let (y, z) = (y.embed(&reg).unwrap(), z.embed(&reg).unwrap());
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
    }

    #[test]
    fn exp_is_additive_on_even(x in even_nilpotent(registry(6)), y in even_nilpotent(registry(6))) {
        let y = y.embed(x.registry()).unwrap();
        let lhs = &x.exp().unwrap() * &y.exp().unwrap();
        prop_assert_eq!(lhs, (&x + &y).exp().unwrap());
    }

    #[test]
    fn integral_is_right_derivative(x in element(registry(6)), g in 0usize..6) {
        prop_assert_eq!(berezin_integrate(&x, &[g]).unwrap(), x.right_derivative(g));
    }

    #[test]
    fn pfaffian_squares_to_determinant(m in (0usize..=4).prop_flat_map(|h| skew(2 * h))) {
        let pf = SkewMatrix::new(m.clone()).unwrap().pfaffian();
        prop_assert_eq!(&pf * &pf, m.det().unwrap());
    }

    #[test]
    fn pfaffian_is_gaussian_integral(m in (1usize..=3).prop_flat_map(|h| skew(2 * h))) {
        let n = m.rows();
        let reg = registry(n);
        let mut q = GrassmannElement::zero(&reg);
        for i in 0..n {
            for j in i + 1..n {
                q.add_term((1 << i) | (1 << j), m.get(i, j).clone());
            }
        }
        let e = q.exp().unwrap();
        let pf = SkewMatrix::new(m).unwrap().pfaffian();
        let gens: Vec<usize> = (0..n).collect();
        prop_assert_eq!(berezin_integrate(&e, &gens).unwrap().scalar_part(), pf.clone());
        let sign = if (n * (n - 1) / 2) % 2 == 0 { Scalar::one() } else { -Scalar::one() };
        prop_assert_eq!(integrate_measure(&e, &gens).unwrap().scalar_part(), pf * sign);
    }

    #[test]
    fn gluing_is_an_involution(k in 0usize..10) {
        let (_, t) = &samples::complexes_3d().unwrap()[k];
        for c in 0..t.cells().len() {
            for s in 0..4 {
                if let Some((c2, s2)) = t.partner(c, s) {
                    prop_assert_eq!(t.partner(c2, s2), Some((c, s)));
                }
            }
        }
    }

    #[test]
    fn chain_complex_property(k in 0usize..10, seed in 0u64..1000) {
        let (_, t) = &samples::complexes_3d().unwrap()[k];
        let z = sample_distinct_zetas(t.vertex_labels().len(), seed);
        prop_assert!(check_complex(t, &z).unwrap());
    }

    #[test]
    fn chain_complex_property_4d(k in 0usize..4, seed in 0u64..1000) {
        let (_, t) = &samples::clusters_4d().unwrap()[k];
        let z = sample_distinct_zetas(6, seed);
        let (f3, f4) = (build_f3_4d(t, &z).unwrap(), build_f4_4d(t, &z).unwrap());
        prop_assert!(f4.mul(&f3).unwrap().is_zero());
        let (g3, g4) = gauge_transform(t, &z, &f3, &f4).unwrap();
        prop_assert!(g4.mul(&g3).unwrap().is_zero());
    }

    #[test]
    fn alpha_transport_is_consistent(seed in 0u64..1000, a1 in scalar(), a2 in scalar()) {
        let z = sample_distinct_zetas(5, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (lhs, rhs) in [move_23_sides().unwrap(), move_14_sides().unwrap()] {
            let a = random_consistent_alpha(&lhs, &rhs, &z, &mut rng).unwrap();
            prop_assert!(is_consistent(&lhs, &rhs, &z, &a).unwrap());
        }
        let (lhs, rhs) = move_23_sides().unwrap();
        let given = AlphaSystem::new().with(&[1, 2, 3, 4], a1).with(&[1, 2, 3, 5], a2);
        let solved = solve_alpha_move(&lhs, &rhs, &z, &given).unwrap();
        prop_assert!(is_consistent(&lhs, &rhs, &z, &solved).unwrap());
    }

    #[test]
    fn deformation_shifts_by_a_constant(seed in 0u64..1000, alpha in scalar(), flip in any::<bool>()) {
        let eps = if flip { -1 } else { 1 };
        let t = Triangulation::simplex(&[1, 2, 3, 4]).unwrap().with_epsilons(&[eps]).unwrap();
        let v = Vars3::new(&t).unwrap();
        let z = sample_distinct_zetas(4, seed);
        let shift = Scalar::from_integer(eps.into()) * z.diff(3, 4).unwrap() * &alpha;
        let expected = &integrated_weight(&t, &z, &v, 0).unwrap() + &GrassmannElement::scalar(&v.registry, shift);
        prop_assert_eq!(deformed_integrated_weight(&t, &z, &v, 0, &alpha).unwrap(), expected);
    }

    #[test]
    fn moves_round_trip(seed in 0u64..1000) {
        let t = samples::glued_pair().unwrap();
        let (r, new) = pachner_move(&t, PachnerMove::TwoThree, &[0, 1], None).unwrap();
        let (back, _) = pachner_move(&r, PachnerMove::ThreeTwo, &new, None).unwrap();
        prop_assert_eq!(back.boundary_facets(), t.boundary_facets());
        let z = sample_distinct_zetas(5, seed);
        prop_assert!(check_complex(&back, &z).unwrap());
    }
}
