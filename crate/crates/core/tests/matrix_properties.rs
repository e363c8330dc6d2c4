mod common;

use lbsfd_core::equiv::{conjugate, similarity_witness};
use lbsfd_core::opmatrix::{complex_charpoly, CharPoly};
use lbsfd_core::rational::QMatrix;
use lbsfd_core::scheme::transport_matrix;
use lbsfd_core::shiftring::ShiftPoly;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cayley_hamilton_3x3(seed in any::<u64>()) {
        let a = common::op_matrix(&mut common::rng(seed), 3, 1);
        prop_assert!(a.charpoly().eval(&a).unwrap().is_zero());
    }

    #[test]
    fn berkowitz_matches_cofactor(seed in any::<u64>(), size in 1usize..=4) {
        let a = common::op_matrix(&mut common::rng(seed), size, 1);
        let chi = a.charpoly();
        prop_assert_eq!(chi.degree(), size);
        prop_assert!(chi.coeff(size).is_one());
        let sign = if size % 2 == 0 { ShiftPoly::one(1) } else { -ShiftPoly::one(1) };
        prop_assert_eq!(chi.coeff(0), &(sign * a.det_cofactor()));
        prop_assert_eq!(chi.coeff(size - 1), &(-a.trace()));
    }

    #[test]
    fn charpoly_is_similarity_invariant(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let a = common::op_matrix(&mut r, 3, 1);
        let p = common::invertible(&mut r, 3);
        prop_assert_eq!(conjugate(&a, &p).unwrap().charpoly(), a.charpoly());
    }

    #[test]
    fn transport_charpoly_is_product_of_shifts(seed in any::<u64>(), q in 2usize..=4) {
        let mut r = common::rng(seed);
        let m = common::invertible(&mut r, q);
        let velocities: Vec<Vec<i64>> = (0..q).map(|_| vec![r.gen_range(-2..=2)]).collect();
        let t = transport_matrix(&m, &velocities).unwrap();
        let roots: Vec<ShiftPoly> = velocities.iter().map(|c| ShiftPoly::shift(c)).collect();
        prop_assert_eq!(t.charpoly(), CharPoly::from_roots(&roots, 1));
    }

    #[test]
    fn similarity_witness_holds(seed in any::<u64>(), q in 2usize..=3, d in 1usize..=2) {
        let mut r = common::rng(seed);
        let m = common::invertible(&mut r, q);
        let mt = common::invertible(&mut r, q);
        let velocities: Vec<Vec<i64>> =
            (0..q).map(|_| (0..d).map(|_| r.gen_range(-1..=1)).collect()).collect();
        let w = similarity_witness(&m, &mt, &velocities).unwrap();
        prop_assert!(w.holds);
        prop_assert_eq!(w.p, mt.mul(&m.inverse().unwrap()).unwrap());
    }

    #[test]
    fn symbol_charpoly_matches_exact(seed in any::<u64>(), theta in -3.2f64..3.2) {
        let a = common::op_matrix(&mut common::rng(seed), 3, 1);
        let exact: Vec<_> = a.charpoly().coeffs().iter().map(|c| c.symbol(&[theta])).collect();
        let float = complex_charpoly(&a.symbol(&[theta]));
        for (x, y) in exact.iter().zip(&float) {
            prop_assert!((x - y).norm() < 1e-8, "{} vs {}", x, y);
        }
    }

    #[test]
    fn matrix_product_is_associative(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let a = common::op_matrix(&mut r, 3, 1);
        let b = common::op_matrix(&mut r, 3, 1);
        let c = common::op_matrix(&mut r, 3, 1);
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
    }
}

#[test]
fn identity_witness_is_identity() {
    let m = QMatrix::from_ints(&[&[1, 1], &[1, -1]]).unwrap();
    let w = similarity_witness(&m, &m, &[vec![1], vec![-1]]).unwrap();
    assert!(w.holds);
    assert_eq!(w.p, QMatrix::identity(2));
}

#[test]
fn generic_charpoly_matches_cofactor_and_minors() {
    let t = common::generic_t();
    let chi = t.charpoly();
    assert_eq!(chi.coeff(0), &(-t.det_cofactor()));
    // sum of principal 2x2 minors
    let minors = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| &(t.get(i, i) * t.get(j, j)) - &(t.get(i, j) * t.get(j, i)))
        .fold(ShiftPoly::zero(9), |acc, m| &acc + &m);
    assert_eq!(chi.coeff(1), &minors);
    assert!(chi.eval(&t).unwrap().is_zero());
}
