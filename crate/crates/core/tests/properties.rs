use hankel_hs::certificate::{index_window, Window};
use hankel_hs::hankel::{boundary_band_sum, hs_term, s_alpha_partials, shell_bound};
use hankel_hs::{DomainSpec, MomentTable, MultiIndex, QuadratureSettings, RadialProfile};
use proptest::prelude::*;

fn table(spec: DomainSpec) -> MomentTable {
    MomentTable::new(spec, QuadratureSettings::default()).unwrap()
}

fn domain() -> impl Strategy<Value = DomainSpec> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|c| DomainSpec::polydisc(c).unwrap()),
        Just(DomainSpec::Ball),
        Just(DomainSpec::Profile(RadialProfile::neg_log_one_minus_r2())),
        (0.5f64..3.0).prop_map(|p| DomainSpec::Profile(RadialProfile::inv_one_minus_pow(p).unwrap())),
    ]
}

fn nonzero_alpha() -> impl Strategy<Value = MultiIndex> {
    (0u32..4, 0u32..4)
        .prop_filter("nonzero", |&(a, b)| a + b > 0)
        .prop_map(|(a, b)| MultiIndex::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn terms_are_nonnegative(spec in domain(), alpha in nonzero_alpha(), g1 in 0u32..30, g2 in 0u32..30) {
        let t = table(spec);
        let v = hs_term(&t, MultiIndex::new(g1, g2), alpha).unwrap();
        prop_assert!(v >= -1e-9, "{v}");
    }

    #[test]
    fn partial_sums_are_monotone_and_telescope(spec in domain(), alpha in nonzero_alpha(), m in 3u32..25) {
        let t = table(spec);
        let levels: Vec<u32> = (1..=m).collect();
        let partials = s_alpha_partials(&t, alpha, &levels).unwrap();
        for w in partials.windows(2) {
            prop_assert!(w[1].1 >= w[0].1 - 1e-9);
        }
        let s = partials.last().unwrap().1;
        let band = boundary_band_sum(&t, alpha, m).unwrap();
        prop_assert!((s - band).abs() <= 1e-8 * s);
        for n in (alpha.order()..=m).step_by(3) {
            prop_assert!(s >= shell_bound(&t, alpha, n).unwrap() - 1e-9);
        }
    }

    #[test]
    fn index_window_counts_exactly(lower in 0.05f64..3.0, width in 0.01f64..5.0, n in 1u32..2000) {
        let w = Window::new(0.1, 0.5, lower, lower + width).unwrap();
        let iw = index_window(&w, n).unwrap();
        let brute = (1..n)
            .filter(|&k| {
                let q = (2 * k + 1) as f64 / (2 * (n - k) + 2) as f64;
                w.lower < q && q < w.upper
            })
            .count() as u32;
        // floating-point ties at the endpoints may shift the count by one
        prop_assert!(iw.count.abs_diff(brute) <= 1, "{} vs {}", iw.count, brute);
        let slope = 2.0 * w.upper / (2.0 * w.upper + 2.0) - 2.0 * w.lower / (2.0 * w.lower + 2.0);
        prop_assert!((iw.count as f64 - slope * n as f64).abs() <= 2.0);
    }
}
