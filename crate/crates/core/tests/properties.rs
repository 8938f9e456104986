use proptest::prelude::*;

use tsdiscord::distance::{sq_ed, sq_ednorm_from_dot, znormalize};
use tsdiscord::drag::drag;
use tsdiscord::oracle::{brute_force_nn, ranked_from_nn};
use tsdiscord::{compute_layout, init_stats, pardrag, TimeSeries};

fn walk(steps: &[f64]) -> Vec<f64> {
    let mut x = 0.0;
    steps
        .iter()
        .map(|s| {
            x += s;
            x
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn layout_pad(n in 5usize..5000, m_frac in 0.0f64..1.0, s_frac in 0.0f64..1.0) {
        let m = 3 + ((n - 5) as f64 * m_frac) as usize;
        let seglen = m + ((n - m) as f64 * s_frac) as usize;
        let l = compute_layout(n, m, seglen).unwrap();
        prop_assert_eq!(l.num_seg * l.seg_n + 2 * (m - 1), n + l.pad);
        prop_assert!(l.num_seg * l.seg_n > n - m);
        prop_assert!((l.num_seg - 1) * l.seg_n < n - m + 1);
    }

    #[test]
    fn advanced_stats_match_fresh(steps in prop::collection::vec(-3.0f64..3.0, 40..200), m0 in 3usize..8, extra in 1usize..12) {
        let s = TimeSeries::new(walk(&steps)).unwrap();
        let top = (m0 + extra).min(s.len());
        let mut st = init_stats(&s, m0).unwrap();
        for m in m0 + 1..=top {
            st.advance(&s).unwrap();
            let fresh = init_stats(&s, m).unwrap();
            for i in 0..fresh.valid_count() {
                prop_assert!((st.mu()[i] - fresh.mu()[i]).abs() < 1e-9);
                prop_assert!((st.sigma()[i] - fresh.sigma()[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dot_route_matches_znorm_route(x in prop::collection::vec(-50.0f64..50.0, 3..40), shift in -5.0f64..5.0, scale in 0.1f64..10.0, noise in prop::collection::vec(-1.0f64..1.0, 40)) {
        let m = x.len();
        let y: Vec<f64> = x.iter().zip(&noise).map(|(v, e)| v * scale + shift + e).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / m as f64;
        let sd = |v: &[f64], mu: f64| (v.iter().map(|a| (a - mu) * (a - mu)).sum::<f64>() / m as f64).sqrt();
        let (mx, my) = (mean(&x), mean(&y));
        let (sx, sy) = (sd(&x, mx), sd(&y, my));
        prop_assume!(sx > 1e-6 && sy > 1e-6);
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let via_dot = sq_ednorm_from_dot(dot, m, mx, my, sx, sy);
        let direct = sq_ed(&znormalize(&x).unwrap(), &znormalize(&y).unwrap()).unwrap();
        prop_assert!((via_dot - direct).abs() <= 1e-7 * (m as f64));
        prop_assert!((0.0..=4.0 * m as f64).contains(&via_dot));
    }

    #[test]
    fn range_output_shrinks(steps in prop::collection::vec(-1.0f64..1.0, 60..160), m in 3usize..10, q1 in 0.0f64..1.0, q2 in 0.0f64..1.0) {
        let s = TimeSeries::new(walk(&steps)).unwrap();
        prop_assume!(2 * m <= s.len());
        let nn = brute_force_nn(&s, m).unwrap();
        let ranked = ranked_from_nn(&nn, m);
        prop_assume!(!ranked.is_empty());
        let pick = |q: f64| ranked[((ranked.len() - 1) as f64 * q) as usize].nn_dist_sq;
        let (lo, hi) = if q1 <= q2 { (pick(q2), pick(q1)) } else { (pick(q1), pick(q2)) };
        let small = drag(&s, m, hi).unwrap();
        let large = drag(&s, m, lo).unwrap();
        prop_assert!(small.len() <= large.len());
        for r in &small {
            prop_assert!(large.iter().any(|x| x.index == r.index));
        }
        let par = pardrag(&s, m, lo, 2 * m, 2).unwrap();
        prop_assert_eq!(par.len(), large.len());
    }
}
