use cplifs::lab::{
    continuity_sweep, lebesgue_positivity_experiment, semicontinuity_check, sweep_csv, LabSettings, MeasureVerdict,
    PerturbMode, PerturbationSpec, SweepRow,
};
use cplifs::systems;

#[test]
fn semicontinuity_holds_for_identical_and_close_cantor() {
    let f = systems::cantor().unwrap();
    let settings = LabSettings::default();
    let grid = [0.3, 0.5, 0.63, 0.8];
    assert_eq!(semicontinuity_check(&f, &f, &grid, &settings).unwrap().violations(), 0);
    let spec = PerturbationSpec::new(1e-4, PerturbMode::translations(), 5, 1);
    let g = cplifs::lab::perturb(&f, &spec, 0).unwrap();
    let report = semicontinuity_check(&f, &g, &grid, &settings).unwrap();
    assert_eq!(report.violations(), 0, "{report:?}");
}

#[test]
fn upper_inequality_holds_for_worked_example() {
    let f = systems::example_5_1().unwrap();
    let g = systems::example_5_1_perturbed(1e-3).unwrap();
    let grid = [0.5, 0.6, 0.69, 0.8];
    let report = semicontinuity_check(&f, &g, &grid, &LabSettings::default()).unwrap();
    assert_eq!(report.upper_violations(), 0, "{report:?}");
}

#[test]
fn sweep_rows_and_csv() {
    let f = systems::cantor().unwrap();
    let spec = PerturbationSpec::new(0.0, PerturbMode::translations(), 3, 4);
    let (rows, skipped) = continuity_sweep(&f, &[0.0, 1e-3, 1e-5], &spec, &LabSettings::default()).unwrap();
    assert_eq!((rows.len(), skipped), (12, 0));
    assert!(rows[..4].iter().all(|r| r.gap == 0.0));
    assert!(rows.iter().all(|r| r.gap < 0.05 && !r.overlap_flag));
    let csv = sweep_csv(&rows);
    assert!(csv.starts_with(SweepRow::CSV_HEADER));
    assert_eq!(csv.lines().count(), 13);
    let again = continuity_sweep(&f, &[0.0, 1e-3, 1e-5], &spec, &LabSettings::default()).unwrap().0;
    assert_eq!(sweep_csv(&again), csv);
}

#[test]
fn worked_example_sweep_keeps_gap() {
    let f = systems::example_5_1().unwrap();
    let spec = PerturbationSpec::new(0.0, PerturbMode::Offset { maps: vec![1] }, 0, 1);
    let (rows, _) = continuity_sweep(&f, &[1e-2, 1e-3, 1e-4], &spec, &LabSettings::default()).unwrap();
    assert!(rows.iter().all(|r| r.gap >= 0.05 && r.overlap_flag), "{rows:?}");
}

#[test]
fn lebesgue_verdicts() {
    let settings = LabSettings::default();
    let spec = PerturbationSpec::new(1e-3, PerturbMode::translations(), 9, 2);
    let rows = lebesgue_positivity_experiment(&systems::lebesgue_positive().unwrap(), &spec, 8, &settings).unwrap();
    assert!(rows.iter().all(|r| r.verdict == MeasureVerdict::Plateau && r.s_hat > 1.9));
    let rows = lebesgue_positivity_experiment(&systems::cantor().unwrap(), &spec, 8, &settings).unwrap();
    assert!(rows.iter().all(|r| r.verdict == MeasureVerdict::Decay));
    let zero = PerturbationSpec::new(0.0, PerturbMode::translations(), 9, 1);
    let rows = lebesgue_positivity_experiment(&systems::example_5_1().unwrap(), &zero, 8, &settings).unwrap();
    assert!(rows[0].estimates[2].1 < rows[0].estimates[0].1);
}
