use procoh::ring_presentations::{free_series, poincare_series, truncated_equal, Parity, Polynomial, RingGenerator, RingPresentation, Verdict};
use proptest::prelude::*;

const NAMES: [&str; 3] = ["a", "b", "c"];

#[derive(Debug, Clone)]
struct RandomRing {
    p: u32,
    gens: Vec<(usize, bool)>,
    // each relation: (degree, coefficients picked over that degree's monomials)
    rels: Vec<(usize, Vec<u32>)>,
}

fn random_ring() -> impl Strategy<Value = RandomRing> {
    (prop::sample::select(vec![3u32, 5]), prop::collection::vec((1usize..4, any::<bool>()), 1..4)).prop_flat_map(|(p, gens)| {
        let rel = (2usize..5, prop::collection::vec(0..p, 6));
        (Just(p), Just(gens), prop::collection::vec(rel, 0..3)).prop_map(|(p, gens, rels)| RandomRing { p, gens, rels })
    })
}

fn generators(ring: &RandomRing) -> Vec<RingGenerator> {
    ring.gens
        .iter()
        .zip(NAMES)
        .map(|(&(d, ext), name)| {
            let parity = if d % 2 == 1 || ext { Parity::Exterior } else { Parity::Polynomial };
            RingGenerator::new(name, d, parity)
        })
        .collect()
}

/// Builds the presentation with generators listed in `order`.
fn build(ring: &RandomRing, order: &[usize]) -> RingPresentation {
    let gens = generators(ring);
    let free = RingPresentation::new(ring.p, gens.clone(), Vec::new()).unwrap();
    let alg = free.algebra();
    let mut rels = Vec::new();
    for (deg, coeffs) in &ring.rels {
        let mut r = Polynomial::zero();
        for (m, &c) in alg.monomials_of_degree(*deg).iter().zip(coeffs) {
            r = r.add(&Polynomial::monomial(m.clone(), c), ring.p);
        }
        rels.push(alg.render(&r));
    }
    let reordered: Vec<RingGenerator> = order.iter().map(|&i| gens[i].clone()).collect();
    let shell = RingPresentation::new(ring.p, reordered.clone(), Vec::new()).unwrap();
    let parsed = rels.iter().filter(|r| r.as_str() != "0").map(|r| shell.algebra().parse(r).unwrap()).collect();
    RingPresentation::new(ring.p, reordered, parsed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn comparison_is_symmetric((a, b) in (random_ring(), random_ring())) {
        let (x, y) = (build(&a, &identity(&a)), build(&b, &identity(&b)));
        prop_assert_eq!(truncated_equal(&x, &y, 4).unwrap(), truncated_equal(&y, &x, 4).unwrap());
    }

    #[test]
    fn reordering_generators_gives_an_isomorphic_ring(s in random_ring()) {
        let mut order = identity(&s);
        order.reverse();
        let (x, y) = (build(&s, &identity(&s)), build(&s, &order));
        prop_assert_eq!(truncated_equal(&x, &y, 4).unwrap(), Verdict::IsomorphicTo(4));
    }

    #[test]
    fn free_series_matches_counting(s in random_ring()) {
        let free = RandomRing { rels: Vec::new(), ..s };
        let x = build(&free, &identity(&free));
        prop_assert_eq!(poincare_series(&x, 8).unwrap(), free_series(x.generators(), 8));
    }

    #[test]
    fn text_form_round_trips(s in random_ring()) {
        let x = build(&s, &identity(&s));
        let y = RingPresentation::parse_text(s.p as u64, &x.to_text()).unwrap();
        prop_assert_eq!(x.to_text(), y.to_text());
    }
}

fn identity(s: &RandomRing) -> Vec<usize> {
    (0..s.gens.len()).collect()
}

#[test]
fn exterior_on_two_is_not_a_polynomial_ring() {
    let ext = RingPresentation::parse_text(5, "x 1 exterior\ny 1 exterior\n").unwrap();
    let poly = RingPresentation::parse_text(5, "x 1 exterior\nz 2 polynomial\nx*z\nz^2\n").unwrap();
    assert_eq!(poincare_series(&ext, 3).unwrap(), vec![1, 2, 1, 0]);
    assert_eq!(poincare_series(&poly, 3).unwrap(), vec![1, 1, 1, 0]);
    assert_eq!(truncated_equal(&ext, &poly, 3).unwrap(), Verdict::Distinct);
}

#[test]
fn same_series_different_rings() {
    // one has a square-zero polynomial class, the other does not
    let a = RingPresentation::parse_text(3, "x 2 polynomial\ny 2 polynomial\nx^2\n").unwrap();
    let b = RingPresentation::parse_text(3, "x 2 polynomial\ny 2 polynomial\nx*y\n").unwrap();
    assert_eq!(poincare_series(&a, 6).unwrap(), poincare_series(&b, 6).unwrap());
    assert_eq!(truncated_equal(&a, &b, 6).unwrap(), Verdict::SeriesEqualOnly);
}
