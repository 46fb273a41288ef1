use std::path::Path;

use trisort::eval::{accuracy, f1, run_experiment, ExperimentPlan};

const PLAN: &str = "\
dataset = tiny
pattern = (ab|b)*a
total = 24
min_len = 1
max_len = 6
corpus_seed = 5
splits = 0.5
models = P, S+2
weights = 0, 17, 255
timeout = 60
k_max = 4
";

#[test]
fn grid_cells_and_summary() {
    let plan = ExperimentPlan::parse(PLAN, Path::new(".")).unwrap();
    let report = run_experiment::<f64>(&plan).unwrap();
    assert!(report.is_complete(), "{:?}", report.missing);
    assert_eq!(report.rows.len(), 2 * 3 * 4);
    for row in &report.rows {
        assert_eq!(row.confusion.total(), 12);
        assert_eq!(row.accuracy, accuracy(&row.confusion).unwrap());
        assert_eq!(row.f1, f1(&row.confusion));
        if row.weights == 0 {
            // Every score is zero, so the tie rule rejects everything.
            assert_eq!(row.confusion.true_pos + row.confusion.false_pos, 0);
            assert_eq!(row.accuracy, 0.5);
        }
    }
    for s in report.summary() {
        let best = report
            .rows
            .iter()
            .filter(|r| r.model == s.model && s.split.map_or(true, |f| f == r.split) && s.classifier.map_or(true, |c| c == r.classifier))
            .map(|r| r.accuracy)
            .fold(0.0, f64::max);
        assert_eq!(s.accuracy, best);
    }
    let csv = report.to_csv();
    assert!(csv.starts_with("dataset,split,model,classifier,weights-bitmask,accuracy,f1,TP,TN,FP,FN\n"));
    assert_eq!(csv.lines().count(), 1 + report.rows.len());
    let again = run_experiment::<f64>(&plan).unwrap();
    assert_eq!(again.to_csv(), csv);
    assert_eq!(again.summary_csv(), report.summary_csv());
}

#[test]
fn unsolvable_cells_are_reported_missing() {
    let plan = ExperimentPlan::parse(&PLAN.replace("k_max = 4", "k_max = 1"), Path::new(".")).unwrap();
    let report = run_experiment::<f32>(&plan).unwrap();
    assert!(!report.is_complete());
    assert!(report.summary_csv().contains("missing"));
}
