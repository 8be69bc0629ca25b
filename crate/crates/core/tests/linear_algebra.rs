use procoh::exterior_algebra::{subsets, ExtElement, InducedEndomorphism};
use procoh::fp_linalg::{equalizer, rref, FpMatrix, FpVector};
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![3u32, 5, 7, 11])
}

fn matrix(p: u32, rows: usize, cols: usize) -> impl Strategy<Value = FpMatrix> {
    prop::collection::vec(prop::collection::vec(0..p as i64, cols), rows)
        .prop_map(move |rows| FpMatrix::from_i64(p, &rows).unwrap())
}

fn sized_matrix() -> impl Strategy<Value = FpMatrix> {
    (prime(), 1usize..7, 1usize..7).prop_flat_map(|(p, r, c)| matrix(p, r, c))
}

fn random_element(p: u32, d: usize) -> impl Strategy<Value = ExtElement> {
    prop::collection::vec(0..p as i64, 1 << d).prop_map(move |coeffs| {
        let mut x = ExtElement::zero(p, d);
        let mut i = 0;
        for m in 0..=d {
            for s in subsets(d, m) {
                x = x.add(&ExtElement::monomial(p, d, &s, coeffs[i])).unwrap();
                i += 1;
            }
        }
        x
    })
}

proptest! {
    #[test]
    fn rref_is_idempotent(m in sized_matrix()) {
        let once = rref(&m);
        let twice = rref(&once.matrix);
        prop_assert_eq!(&once.matrix, &twice.matrix);
        prop_assert_eq!(once.rank, twice.rank);
    }

    #[test]
    fn rank_plus_nullity(m in sized_matrix()) {
        let kernel = m.kernel();
        prop_assert_eq!(m.rank() + kernel.dim(), m.cols());
        for v in kernel.basis() {
            prop_assert!(m.mul_vec(v).unwrap().is_zero());
        }
        prop_assert_eq!(m.image().dim(), m.rank());
        prop_assert_eq!(m.transpose().rank(), m.rank());
    }

    #[test]
    fn equalizer_is_where_maps_agree(
        (p, dim, pairs) in (prime(), 1usize..6).prop_flat_map(|(p, dim)| {
            let pair = (1usize..5).prop_flat_map(move |rows| (matrix(p, rows, dim), matrix(p, rows, dim)));
            (Just(p), Just(dim), prop::collection::vec(pair, 1..4))
        })
    ) {
        let eq = equalizer(p, dim, &pairs).unwrap();
        for v in eq.basis() {
            for (a, b) in &pairs {
                prop_assert_eq!(a.mul_vec(v).unwrap(), b.mul_vec(v).unwrap());
            }
        }
        let mut rows = Vec::new();
        for (a, b) in &pairs {
            let d = a.sub(b).unwrap();
            rows.extend((0..d.rows()).map(|r| d.row(r)));
        }
        let stacked = FpMatrix::from_rows(p, dim, &rows).unwrap();
        prop_assert_eq!(eq.dim(), dim - stacked.rank());
    }

    #[test]
    fn inverse_round_trips(m in (prime(), 1usize..6).prop_flat_map(|(p, n)| matrix(p, n, n))) {
        match m.inverse() {
            Ok(inv) => prop_assert!(m.mul(&inv).unwrap().is_identity()),
            Err(_) => prop_assert!(m.rank() < m.rows()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn induced_maps_are_multiplicative(
        (a, x, y) in (prime(), 1usize..5).prop_flat_map(|(p, d)| (matrix(p, d, d), random_element(p, d), random_element(p, d)))
    ) {
        let f = InducedEndomorphism::new(&a).unwrap();
        let lhs = f.apply(&x.wedge(&y).unwrap()).unwrap();
        let rhs = f.apply(&x).unwrap().wedge(&f.apply(&y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #[test]
    fn induced_maps_compose(
        (a, b, x) in (prime(), 1usize..5).prop_flat_map(|(p, d)| (matrix(p, d, d), matrix(p, d, d), random_element(p, d)))
    ) {
        let fa = InducedEndomorphism::new(&a).unwrap();
        let fb = InducedEndomorphism::new(&b).unwrap();
        let composed = fa.compose(&fb).unwrap();
        prop_assert_eq!(composed.apply(&x).unwrap(), fa.apply(&fb.apply(&x).unwrap()).unwrap());
        prop_assert_eq!(composed.linear(), &a.mul(&b).unwrap());
    }

    #[test]
    fn wedge_is_graded_commutative(
        (x, y) in (prime(), 1usize..5).prop_flat_map(|(p, d)| (random_element(p, d), random_element(p, d)))
    ) {
        for i in 0..=x.rank() {
            for j in 0..=y.rank() {
                let (xi, yj) = (x.homogeneous_part(i), y.homogeneous_part(j));
                let lhs = xi.wedge(&yj).unwrap();
                let rhs = yj.wedge(&xi).unwrap();
                let rhs = if i * j % 2 == 1 { rhs.scale(x.modulus() - 1) } else { rhs };
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}

#[test]
fn vectors_and_matrices_agree_on_small_example() {
    let m = FpMatrix::from_i64(5, &[vec![1, 2, 3], vec![2, 4, 6]]).unwrap();
    assert_eq!(m.rank(), 1);
    assert_eq!(m.kernel().dim(), 2);
    let v = FpVector::from_i64(5, &[1, 2, 0]);
    assert_eq!(m.mul_vec(&v).unwrap().to_i64(), vec![0, 0]);
}
