use std::collections::BTreeSet;

use procoh::cyclic_cohomology::{cohomology_dim, jordan_type, CyclicModule};
use procoh::fp_linalg::{FpMatrix, FpVector};
use proptest::prelude::*;

/// A module conjugate to a known direct sum of Jordan blocks.
#[derive(Debug, Clone)]
struct Disguised {
    p: u32,
    blocks: Vec<usize>,
    module: CyclicModule,
}

fn block_sum(p: u32, blocks: &[usize]) -> FpMatrix {
    let dim: usize = blocks.iter().sum();
    let mut j = FpMatrix::identity(p, dim);
    let mut start = 0;
    for &k in blocks {
        for i in start..start + k - 1 {
            j.set(i, i + 1, 1);
        }
        start += k;
    }
    j
}

fn disguised() -> impl Strategy<Value = Disguised> {
    prop::sample::select(vec![3u32, 5, 7])
        .prop_flat_map(|p| (Just(p), prop::collection::vec(1..=p as usize, 1..5)))
        .prop_filter("dimension at most 8", |(_, b)| b.iter().sum::<usize>() <= 8)
        .prop_flat_map(|(p, blocks)| {
            let dim: usize = blocks.iter().sum();
            let entries = prop::collection::vec(0..p as i64, dim * dim);
            let upper = prop::collection::vec(0..p as i64, dim * dim);
            let diag = prop::collection::vec(1..p as i64, dim);
            (Just(p), Just(blocks), entries, upper, diag)
        })
        .prop_map(|(p, blocks, lower, upper, diag)| {
            let dim: usize = blocks.iter().sum();
            let mut l = FpMatrix::identity(p, dim);
            let mut u = FpMatrix::zeros(p, dim, dim);
            for r in 0..dim {
                for c in 0..dim {
                    if c < r {
                        l.set(r, c, lower[r * dim + c] as u32);
                    } else if c > r {
                        u.set(r, c, upper[r * dim + c] as u32);
                    } else {
                        u.set(r, c, diag[r] as u32);
                    }
                }
            }
            let conj = l.mul(&u).unwrap();
            let sigma = conj.mul(&block_sum(p, &blocks)).unwrap().mul(&conj.inverse().unwrap()).unwrap();
            let module = CyclicModule::new(sigma).unwrap();
            Disguised { p, blocks, module }
        })
}

fn oracle(p: u32, blocks: &[usize], n: i64) -> usize {
    blocks.iter().filter(|&&k| k < p as usize || n == 0).count()
}

fn all_vectors(p: u32, dim: usize) -> Vec<FpVector> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out.into_iter().flat_map(|v: Vec<i64>| (0..p as i64).map(move |c| [v.clone(), vec![c]].concat())).collect();
    }
    out.into_iter().map(|v| FpVector::from_i64(p, &v)).collect()
}

fn log_p(p: u32, mut count: usize) -> usize {
    let mut k = 0;
    while count > 1 {
        assert_eq!(count % p as usize, 0, "subgroup orders are powers of p");
        count /= p as usize;
        k += 1;
    }
    k
}

/// dim ker(a) / im(b), found by listing every vector.
fn brute_quotient(p: u32, dim: usize, a: &FpMatrix, b: &FpMatrix) -> usize {
    let vectors = all_vectors(p, dim);
    let kernel = vectors.iter().filter(|v| a.mul_vec(v).unwrap().is_zero()).count();
    let image: BTreeSet<Vec<i64>> = vectors.iter().map(|v| b.mul_vec(v).unwrap().to_i64()).collect();
    log_p(p, kernel) - log_p(p, image.len())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cohomology_matches_block_oracle(m in disguised()) {
        for n in 0..6 {
            prop_assert_eq!(cohomology_dim(&m.module, n).unwrap(), oracle(m.p, &m.blocks, n), "n = {}", n);
        }
        let mut sorted = m.blocks.clone();
        sorted.sort_unstable();
        let jt = jordan_type(&m.module).unwrap();
        prop_assert_eq!(jt.blocks(), &sorted[..]);
    }

    #[test]
    fn cohomology_matches_brute_force(m in disguised().prop_filter("small enough to enumerate", |m| (m.p as usize).pow(m.module.dim() as u32) <= 3000)) {
        let (p, dim) = (m.p, m.module.dim());
        let one = FpMatrix::identity(p, dim);
        let t = m.module.sigma().sub(&one).unwrap();
        let mut norm = FpMatrix::zeros(p, dim, dim);
        let mut power = one.clone();
        for _ in 0..p {
            norm = norm.add(&power).unwrap();
            power = power.mul(m.module.sigma()).unwrap();
        }
        let zero = FpMatrix::zeros(p, dim, dim);
        prop_assert_eq!(cohomology_dim(&m.module, 0).unwrap(), brute_quotient(p, dim, &t, &zero));
        prop_assert_eq!(cohomology_dim(&m.module, 1).unwrap(), brute_quotient(p, dim, &norm, &t));
        prop_assert_eq!(cohomology_dim(&m.module, 2).unwrap(), brute_quotient(p, dim, &t, &norm));
    }
}

#[test]
fn single_blocks() {
    for p in [3u32, 5, 7, 11] {
        for k in 1..=p as usize {
            let m = CyclicModule::jordan_block(p, k).unwrap();
            let expected: Vec<usize> = (0..7).map(|n| oracle(p, &[k], n)).collect();
            let got: Vec<usize> = (0..7).map(|n| cohomology_dim(&m, n).unwrap()).collect();
            assert_eq!(got, expected, "p = {p}, k = {k}");
        }
        assert!(CyclicModule::jordan_block(p, p as usize + 1).is_err());
        assert!(CyclicModule::jordan_block(p, 0).is_err());
    }
}

#[test]
fn non_unipotent_matrices_are_rejected() {
    let twice = FpMatrix::from_i64(5, &[vec![2]]).unwrap();
    assert!(CyclicModule::new(twice).is_err());
    let m = CyclicModule::trivial(5, 2);
    assert!(cohomology_dim(&m, -1).is_err());
}
