use proptest::prelude::*;
use sbf::boolfn::{fourier_degree, fwht, inverse_fwht, noise_stability, profile, Dyadic, FourierSpectrum, TruthTable};

fn table() -> impl Strategy<Value = TruthTable> {
    (1usize..=8).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), 1 << n).prop_map(move |b| TruthTable::from_bits(n, &b).unwrap())
    })
}

fn naive(f: &TruthTable) -> Vec<i64> {
    let len = f.len();
    (0..len)
        .map(|s| {
            (0..len)
                .map(|x| {
                    let sign = if f.get(x) { -1 } else { 1 };
                    if (x & s).count_ones() % 2 == 1 {
                        -sign
                    } else {
                        sign
                    }
                })
                .sum()
        })
        .collect()
}

fn flip_influence(f: &TruthTable, i: usize) -> Dyadic {
    let flips = (0..f.len()).filter(|&x| f.get(x) != f.get(x ^ 1 << i)).count();
    Dyadic::new(flips as u64, f.vars() as u32)
}

/// `E[f(x) f(y)]` over ρ-correlated pairs, summed directly.
fn brute_stability(f: &TruthTable, rho: f64) -> f64 {
    let n = f.vars();
    let pm = |x: usize| if f.get(x) { -1.0 } else { 1.0 };
    let mut total = 0.0;
    for x in 0..f.len() {
        for y in 0..f.len() {
            let joint: f64 =
                (0..n).map(|i| if (x ^ y) >> i & 1 == 0 { (1.0 + rho) / 4.0 } else { (1.0 - rho) / 4.0 }).product();
            total += joint * pm(x) * pm(y);
        }
    }
    total
}

proptest! {
    #[test]
    fn fwht_matches_naive(f in table()) {
        prop_assert_eq!(fwht(&f).scaled_coeffs().to_vec(), naive(&f));
    }

    #[test]
    fn parseval(f in table()) {
        let n = f.vars() as u32;
        prop_assert_eq!(fwht(&f).sum_of_squares(), 4u64.pow(n));
    }

    #[test]
    fn inverse_round_trip(f in table()) {
        prop_assert_eq!(inverse_fwht(&fwht(&f)).unwrap(), f);
    }

    #[test]
    fn influences_match_flip_counts(f in table()) {
        let p = profile(&fwht(&f));
        for i in 0..f.vars() {
            prop_assert_eq!(p.influences[i], flip_influence(&f, i));
        }
    }

    #[test]
    fn stability_against_brute_force(f in table(), rho in 0.0f64..=1.0) {
        prop_assume!(f.vars() <= 6);
        let s = noise_stability(&fwht(&f), rho).unwrap();
        prop_assert!((s - brute_stability(&f, rho)).abs() < 1e-9);
    }

    #[test]
    fn stability_monotone(f in table(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let spec = fwht(&f);
        prop_assert!(noise_stability(&spec, lo).unwrap() <= noise_stability(&spec, hi).unwrap() + 1e-12);
        prop_assert!((noise_stability(&spec, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complement_negates_spectrum(f in table()) {
        let a = fwht(&f);
        let b = fwht(&f.complement());
        prop_assert!(a.scaled_coeffs().iter().zip(b.scaled_coeffs()).all(|(x, y)| *x == -y));
        prop_assert_eq!(fourier_degree(&a), fourier_degree(&b));
    }

    #[test]
    fn text_and_csv_round_trip(f in table()) {
        let back: TruthTable = f.to_text().parse().unwrap();
        prop_assert_eq!(&back, &f);
        let spec = fwht(&f);
        prop_assert_eq!(FourierSpectrum::from_csv(&spec.to_csv()).unwrap(), spec);
    }
}

#[test]
fn named_functions() {
    for n in 1..=10 {
        let p = profile(&fwht(&TruthTable::parity(n, (1 << n) - 1).unwrap()));
        assert_eq!(p.degree, n);
        assert!(p.influences.iter().all(|&i| i == Dyadic::ONE));
        assert_eq!(p.total_influence, Dyadic::new(n as u64, 0));
    }
    let maj = TruthTable::majority(3).unwrap();
    let p = profile(&fwht(&maj));
    assert_eq!(p.total_influence, Dyadic::new(3, 1));
    for i in 0..3 {
        assert_eq!(p.influences[i], flip_influence(&maj, i));
        assert_eq!(p.influences[i], Dyadic::new(1, 1));
    }
}
