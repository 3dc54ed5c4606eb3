use fastconv::contour::level_bounds;
use fastconv::prelude::*;
use proptest::prelude::*;

const H_MIN: f64 = 0.01;

/// Steps between `h_min` and `spread·h_min`, log-uniform, some snapped onto
/// multiples of `h_min` so patch boundaries are hit exactly.
fn grid_strategy() -> impl Strategy<Value = (u32, Vec<f64>)> {
    let base = prop_oneof![Just(2u32), Just(3u32), Just(5u32)];
    let spread = prop_oneof![Just(1.5f64), Just(10.0), Just(300.0)];
    (
        base,
        spread,
        prop::collection::vec((0.0f64..1.0, any::<bool>(), 0u8..10), 5..120),
    )
        .prop_map(|(base, spread, raw)| {
            let mut times = vec![0.0];
            for (u, snap, coin) in raw {
                let last = *times.last().unwrap();
                let h = H_MIN * (u * spread.ln()).exp();
                let t = if snap && coin < 3 {
                    ((last + h) / H_MIN).ceil() * H_MIN
                } else {
                    last + h
                };
                times.push(t);
            }
            (base, times)
        })
}

fn engine_for(base: u32, times: &[f64], g0: &[f64]) -> ConvolutionEngine {
    let cfg = EngineConfig::new(
        H_MIN,
        base,
        *times.last().unwrap(),
        ContourConstants::preset_k50(),
    );
    ConvolutionEngine::new(power_kernel(0.5).unwrap(), cfg, g0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn segments_tile_and_stay_in_their_level((base, times) in grid_strategy()) {
        let g: Vec<Vec<f64>> = times.iter().map(|t| vec![(1.3 * t).cos()]).collect();
        let mut e = engine_for(base, &times, &g[0]);
        let exact = oracle_convolve(e.kernel(), &times, &g).unwrap();
        let scale = exact.iter().map(|u| u[0].abs()).fold(1e-300, f64::max);
        for i in 1..times.len() {
            let u = e.evaluate(times[i], &g[i]).unwrap();
            let mut cursor = 0.0;
            for s in e.last_plan() {
                let (t0, t1) = s.span();
                prop_assert_eq!(t0, cursor);
                prop_assert!(t1 > t0);
                if let Segment::Ode { level, .. } = *s {
                    let (lb, ub) = level_bounds(level, H_MIN, base);
                    prop_assert!(times[i] - t1 >= lb * (1.0 - 1e-9));
                    prop_assert!(times[i] - t0 <= ub * (1.0 + 1e-9));
                }
                cursor = t1;
            }
            prop_assert_eq!(cursor, times[i]);
            prop_assert!((u[0] - exact[i][0]).abs() <= 1e-9 * scale);
        }
        prop_assert_eq!(e.counters().out_of_interval, 0);
    }

    #[test]
    fn counters_respect_bounds((base, times) in grid_strategy()) {
        let mut e = engine_for(base, &times, &[1.0]);
        let k = e.config().contour.k as u64;
        for &t in &times[1..] {
            e.evaluate(t, &[t.sin()]).unwrap();
        }
        let c = e.counters();
        let l_max = e.config().max_levels() as u64;
        let l = decompose(*times.last().unwrap(), H_MIN, base).levels() as u64;
        prop_assert!(c.g_reads_step_peak <= 2 * l + 3);
        prop_assert!(c.f_evaluations <= 3 * (2 * k + 1) * l_max);
        // running bank plus three snapshots of K+1 stored nodes per level
        prop_assert!(c.stored_vectors_peak <= 4 * (k + 1) * e.levels_allocated() as u64);
    }

    #[test]
    fn convolution_is_linear((base, times) in grid_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g1: Vec<f64> = times.iter().map(|t| t.cos()).collect();
        let g2: Vec<f64> = times.iter().map(|t| t * t - 1.0).collect();
        let mut e = engine_for(base, &times, &[g1[0], g2[0], a * g1[0] + b * g2[0]]);
        for i in 1..times.len() {
            let u = e.evaluate(times[i], &[g1[i], g2[i], a * g1[i] + b * g2[i]]).unwrap();
            let combined = a * u[0] + b * u[1];
            prop_assert!((u[2] - combined).abs() <= 1e-12 * (1.0 + u[0].abs() + u[1].abs()) * (1.0 + a.abs() + b.abs()));
        }
    }

    #[test]
    fn oracle_on_two_points_is_one_direct_step(t1 in 0.011f64..5.0, g0 in -2.0f64..2.0, g1 in -2.0f64..2.0) {
        let times = [0.0, t1];
        let oracle = oracle_convolve(&power_kernel(0.5).unwrap(), &times, &[vec![g0], vec![g1]]).unwrap();
        let e = engine_for(5, &times, &[g0]);
        let (wp, wn) = e.step_weights(t1).unwrap();
        let direct = wp * g0 + wn * g1;
        // the engine's weights come from the level-1 contour, the oracle's from closed forms
        prop_assert!((oracle[1][0] - direct).abs() <= 1e-9 * (1.0 + direct.abs()), "{} vs {}", oracle[1][0], direct);
    }
}
