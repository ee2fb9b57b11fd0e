use dvine_qr::simbench::{
    gen_scenario, oos_backtest, CorrChoice, MarginChoice, Method, ScenarioKind, ScenarioParam, ScenarioSpec,
};

fn panel(seed: u64) -> dvine_qr::data::DataTable {
    let spec = ScenarioSpec::new(
        ScenarioKind::T5,
        ScenarioParam::Corr(CorrChoice::R1),
        MarginChoice::M1,
        1000,
        vec![0.5],
        1,
    )
    .unwrap();
    gen_scenario(&spec, 0, seed).unwrap().train
}

#[test]
fn dvqr_wins_in_the_tail_and_ties_at_the_median() {
    let mut tail_wins = 0;
    let mut worst_median_gap = 0.0f64;
    for seed in 0..10 {
        let r = oos_backtest(&panel(seed), "y", 500, &[0.01, 0.5], &[Method::Dvqr, Method::Lqr]).unwrap();
        assert_eq!((r.n_train, r.n_eval), (500, 500));
        let loss = |a, m| r.row(a, m).unwrap().tick_loss;
        if loss(0.01, Method::Dvqr) < loss(0.01, Method::Lqr) {
            tail_wins += 1;
        }
        let (d, l) = (loss(0.5, Method::Dvqr), loss(0.5, Method::Lqr));
        worst_median_gap = worst_median_gap.max((d - l).abs() / l);
    }
    assert!(tail_wins > 5, "DVQR better at alpha 0.01 in {tail_wins}/10 seeds");
    assert!(worst_median_gap < 0.10, "median tick losses differ by up to {worst_median_gap:.3}");
}

#[test]
fn backtest_is_deterministic_apart_from_timing() {
    let data = panel(3);
    let run = || {
        let mut r = oos_backtest(&data, "y", 600, &[0.1, 0.9], &[Method::Dvqr, Method::Lqr]).unwrap();
        r.rows.iter_mut().for_each(|row| row.seconds = 0.0);
        r
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a.rows.len(), 4);
    assert!(a.to_json().unwrap().contains("\"tick_loss\""));
}

#[test]
fn unknown_response_is_rejected() {
    assert!(oos_backtest(&panel(1), "z", 500, &[0.5], &[Method::Lqr]).is_err());
}
