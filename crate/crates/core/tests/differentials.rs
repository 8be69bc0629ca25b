use std::collections::BTreeMap;

use procoh::fp_linalg::FpVector;
use procoh::scenario;
use procoh::spectral_engine::{indecomposables, symbolic_differential, BigradedAlgebra, Bidegree, StablePage};
use proptest::prelude::*;
use std::sync::OnceLock;

fn page() -> &'static StablePage {
    static PAGE: OnceLock<StablePage> = OnceLock::new();
    PAGE.get_or_init(|| scenario::gl2(5).unwrap().build(Some(12)).unwrap().stable().unwrap())
}

fn apply(d: &procoh::spectral_engine::Differential, c: Bidegree, x: &FpVector, dim_target: usize) -> FpVector {
    match d.maps.get(&c) {
        Some(m) => m.mul_vec(x).unwrap(),
        None => FpVector::zero(x.modulus(), dim_target),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_d2_obeys_leibniz(seed in prop::collection::vec(0u32..5, 64)) {
        let page = page();
        let p = page.prime();
        let gens = indecomposables(page);
        let sym = symbolic_differential(page, 2, &gens).unwrap();
        let sols = sym.solutions();
        let mut theta = FpVector::zero(p, sym.slots.len());
        for (s, c) in sols.iter().zip(seed.iter().cycle()) {
            theta.add_scaled(s, *c);
        }
        prop_assert!(sym.satisfies(&theta));
        let d = sym.instantiate(&theta);
        prop_assert!(!sols.is_empty());
        let cells = page.cells();
        let mut checked = 0;
        for &a in &cells {
            for &b in &cells {
                let c = a.plus(b);
                let (Some(ta), Some(tb), Some(tc)) = (a.d_target(2), b.d_target(2), c.d_target(2)) else { continue };
                if [a, b, c].iter().any(|x| d.undetermined.contains(x)) || !page.window().contains(c) {
                    continue;
                }
                for i in 0..page.dim(a) {
                    for j in 0..page.dim(b) {
                        let x = FpVector::unit(p, page.dim(a), i);
                        let y = FpVector::unit(p, page.dim(b), j);
                        let Some(xy) = page.product(a, &x, b, &y) else { continue };
                        if xy.is_empty() {
                            continue;
                        }
                        let lhs = apply(&d, c, &xy, page.dim(tc));
                        let dx = apply(&d, a, &x, page.dim(ta));
                        let dy = apply(&d, b, &y, page.dim(tb));
                        let first = page.product(ta, &dx, b, &y);
                        let second = page.product(a, &x, tb, &dy);
                        let (Some(first), Some(second)) = (first, second) else { continue };
                        let mut rhs = if first.is_empty() { FpVector::zero(p, page.dim(tc)) } else { first };
                        if !second.is_empty() {
                            let sign = if a.total() % 2 == 1 { p - 1 } else { 1 };
                            rhs.add_scaled(&second, sign);
                        }
                        prop_assert_eq!(lhs, rhs, "d({}·{})", a, b);
                        checked += 1;
                    }
                }
            }
        }
        prop_assert!(checked >= 40, "only {} products checked", checked);
        // d∘d is again a derivation, so it vanishes iff it vanishes on generators
        let on_generators = gens.iter().all(|(c, vs)| {
            let Some(t) = c.d_target(2) else { return true };
            let (Some(m), Some(mt)) = (d.maps.get(c), d.maps.get(&t)) else { return true };
            vs.iter().all(|v| mt.mul_vec(&m.mul_vec(v).unwrap()).unwrap().is_zero())
        });
        prop_assert_eq!(d.check_d_squared().is_ok(), on_generators);
    }
}

#[test]
fn zero_assignment_is_a_differential() {
    let page = page();
    let gens = indecomposables(page);
    let sym = symbolic_differential(page, 2, &gens).unwrap();
    let d = sym.instantiate(&FpVector::zero(page.prime(), sym.slots.len()));
    assert!(d.is_zero());
    assert!(d.check_d_squared().is_ok());
    let values: BTreeMap<(Bidegree, usize), FpVector> = BTreeMap::new();
    assert!(procoh::spectral_engine::extend_by_leibniz(&sym, page, &values).unwrap().is_zero());
}
