mod support;

use ddfen::graph::IndexName;
use ddfen::pipeline::{
    attach_events, compare_methods, detrended_volatility, rank_series, roll_windows, EventMarker,
    Method, WindowSpec,
};
use ddfen::synth::{plant_hub, synthetic_dates};
use proptest::prelude::*;
use support::TestRng;

fn spec(sample_window: usize, step: usize) -> WindowSpec {
    WindowSpec {
        sample_window,
        step,
        box_size: 10,
    }
}

#[test]
fn hub_ranks_first_by_weighted_degree() {
    let panel = plant_hub(8, 1400, 2024).unwrap();
    for method in Method::ALL {
        let s = rank_series(
            &panel,
            &spec(200, 60),
            "X01",
            method,
            IndexName::WeightedDegree,
        )
        .unwrap();
        assert_eq!(s.points.len(), 21);
        assert!(
            s.points.iter().all(|p| p.rank == 1),
            "{method}: {:?}",
            s.ranks()
        );
    }
}

#[test]
fn comparison_is_deterministic_and_complete() {
    let panel = plant_hub(6, 500, 9).unwrap();
    let events = [
        "early=2000-03-01".parse().unwrap(),
        "late=2030-01-01".parse().unwrap(),
    ];
    let a = compare_methods(&panel, &spec(120, 40), "X03", &events).unwrap();
    let b = compare_methods(&panel, &spec(120, 40), "X03", &events).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.series.len(), 8);
    assert_eq!(a.stability.entries.len(), 8);
    assert_eq!(a.windows.len(), (500 - 120) / 40 + 1);
    for w in &a.windows {
        let t = w.threshold.as_ref().unwrap();
        assert_eq!(w.ddfen_edges, Some(t.kept_edges));
        assert_eq!(w.mst_edges, Some(5));
    }
    assert!(a.events[0].window.is_some());
    assert_eq!(a.events[1].window, None);
}

#[test]
fn window_count_formula() {
    let mut rng = TestRng::new(51);
    for _ in 0..200 {
        let sw = 4 + rng.below(50);
        let step = 1 + rng.below(30);
        let len = sw + rng.below(300);
        let spec = WindowSpec {
            box_size: 3,
            ..spec(sw, step)
        };
        let w = roll_windows(len, &spec).unwrap();
        assert_eq!(w.len(), (len - sw) / step + 1);
        assert!(w.iter().all(|r| r.len() == sw && r.end <= len));
        assert!(w.windows(2).all(|p| p[1].start - p[0].start == step));
    }
    assert!(roll_windows(10, &spec(11, 1)).is_err());
}

#[test]
fn events_attach_to_first_window_ending_on_or_after() {
    // window ends 2000-01-02, 2000-01-12, 2000-01-22
    let ends = synthetic_dates(30)
        .into_iter()
        .step_by(10)
        .collect::<Vec<_>>();
    let marker = |d: &str| -> EventMarker { format!("e={d}").parse().unwrap() };
    let got = attach_events(
        &[
            marker("1999-01-01"),
            marker("2000-01-12"),
            marker("2000-01-13"),
            marker("2001-01-01"),
        ],
        &ends,
    );
    let windows: Vec<Option<usize>> = got.iter().map(|e| e.window).collect();
    assert_eq!(windows, vec![Some(0), Some(1), Some(2), None]);
}

#[test]
fn volatility_hand_case() {
    let v = detrended_volatility(&[1.0, 3.0, 2.0]).unwrap();
    assert!((v - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(detrended_volatility(&[4.0]).is_err());
}

proptest! {
    #[test]
    fn affine_series_have_zero_volatility(a in -50.0f64..50.0, b in -5.0f64..5.0, n in 2usize..60) {
        let values: Vec<f64> = (0..n).map(|t| a + b * t as f64).collect();
        prop_assert!(detrended_volatility(&values).unwrap() < 1e-9);
    }

    #[test]
    fn adding_a_trend_changes_nothing(
        values in prop::collection::vec(1.0f64..70.0, 3..80),
        a in -20.0f64..20.0,
        b in -3.0f64..3.0,
    ) {
        let base = detrended_volatility(&values).unwrap();
        let shifted: Vec<f64> = values.iter().enumerate().map(|(t, v)| v + a + b * t as f64).collect();
        prop_assert!((detrended_volatility(&shifted).unwrap() - base).abs() < 1e-9);
    }

    #[test]
    fn scales_with_the_series(values in prop::collection::vec(-5.0f64..5.0, 3..40), c in 0.1f64..10.0) {
        let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
        let lhs = detrended_volatility(&scaled).unwrap();
        let rhs = c * detrended_volatility(&values).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs));
    }
}
