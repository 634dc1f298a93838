use proptest::prelude::*;
use ptfprg::designs::{
    build_sampler, gauss_hermite, next_prime, verify_moments, KWiseFamily, MomentMode, SeedBits,
};

#[test]
fn pairwise_family_is_uniform_on_every_pair() {
    let fam = KWiseFamily::new(5, 2, 4).unwrap();
    for i in 0..4 {
        for j in i + 1..4 {
            let mut counts = [[0u32; 5]; 5];
            for a in 0..5 {
                for b in 0..5 {
                    let seed = [a, b];
                    counts[fam.eval(&seed, i).unwrap() as usize]
                        [fam.eval(&seed, j).unwrap() as usize] += 1;
                }
            }
            assert!(
                counts.iter().flatten().all(|&c| c == 1),
                "coords ({i}, {j})"
            );
        }
    }
}

#[test]
fn three_point_rule() {
    let q = gauss_hermite::<f64>(3).unwrap();
    let s = 3f64.sqrt();
    let expect = [(-s, 1.0 / 6.0), (0.0, 2.0 / 3.0), (s, 1.0 / 6.0)];
    for ((x, w), (ex, ew)) in q.nodes().iter().zip(q.weights()).zip(expect) {
        assert!((x - ex).abs() < 1e-12 && (w - ew).abs() < 1e-12);
    }
}

#[test]
fn small_design_moments_by_enumeration() {
    // budget 0.06 gives q = 53 and 53^4 seeds, small enough to enumerate
    let s = build_sampler::<f64>(3, 4, 2, 0.06).unwrap();
    assert_eq!(s.modulus(), 53);
    let r = verify_moments(&s, 4, MomentMode::Exhaustive, 1).unwrap();
    assert!(r.all_pass(), "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thresholds_are_monotone_and_end_at_q(m in 1usize..=12, k in 1usize..=4, n in 1usize..=6, b in 1u32..=8) {
        let budget = 2f64.powi(-(b as i32));
        let s = build_sampler::<f64>(m, k, n, budget).unwrap();
        let t = s.thresholds();
        prop_assert!(t.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*t.last().unwrap(), s.modulus());
        prop_assert!(s.exact_tv() <= s.tv_bound() + 1e-15);
        prop_assert!(s.tv_bound() <= budget);
    }

    #[test]
    fn samples_are_atoms(bytes in prop::collection::vec(any::<u8>(), 64)) {
        let s = build_sampler::<f64>(4, 3, 5, 0.01).unwrap();
        let bits = SeedBits::from_bytes(bytes);
        let mut seed = Vec::new();
        s.seed_from_bits(&bits, 0, &mut seed).unwrap();
        prop_assert!(seed.iter().all(|&c| c < s.modulus()));
        let y = s.sample(&seed).unwrap();
        prop_assert!(y.iter().all(|v| s.quadrature().nodes().contains(v)));
    }

    #[test]
    fn next_prime_is_prime_and_minimal(x in 2u64..100_000) {
        let p = next_prime(x).unwrap();
        prop_assert!(p >= x);
        let trial = |v: u64| v >= 2 && (2..).take_while(|d| d * d <= v).all(|d| !v.is_multiple_of(d));
        prop_assert!(trial(p));
        prop_assert!((x..p).all(|v| !trial(v)));
    }
}
