use proptest::prelude::*;
use sea_grasp::contact::Wrench;
use sea_grasp::harness::*;
use sea_grasp::io::*;

fn rounded(r: &TrialResult) -> TrialResult {
    let o = |v: Option<f64>| v.map(round_sig9);
    let mut x = r.clone();
    x.spec.location_mm = round_sig9(x.spec.location_mm);
    x.spec.initial_distal_deg = o(x.spec.initial_distal_deg);
    x.pose_change_deg = o(x.pose_change_deg);
    x.touch_time = o(x.touch_time);
    x.settle_time = o(x.settle_time);
    x.torque_magnitude_touch = o(x.torque_magnitude_touch);
    x.torque_magnitude_final = o(x.torque_magnitude_final);
    x.max_penetration = round_sig9(x.max_penetration);
    x.max_cone_excess = o(x.max_cone_excess);
    x.min_normal_force = o(x.min_normal_force);
    x.final_wrench = Wrench {
        fx: round_sig9(x.final_wrench.fx),
        fy: round_sig9(x.final_wrench.fy),
        torque: round_sig9(x.final_wrench.torque),
    };
    x
}

fn num() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        -1e-6f64..1e-6,
        Just(0.0),
        Just(-0.0),
        (1u32..1000).prop_map(|n| n as f64 * 0.1),
    ]
}

fn maybe() -> impl Strategy<Value = Option<f64>> {
    proptest::option::of(num())
}

prop_compose! {
    fn result()(
        spec_index in 0usize..360,
        outcome in 0usize..5,
        diverged: bool,
        loc in 1.0f64..300.0,
        seed: u64,
        a in maybe(), b in maybe(), c in maybe(), d in maybe(), e in maybe(),
        f in maybe(), g in maybe(),
        pen in 0.0f64..0.01,
        w in proptest::array::uniform3(num()),
        contacts in proptest::array::uniform2(0usize..5),
        prox: bool,
        trace in proptest::option::of("[a-z_/]{1,12}\\.json"),
    ) -> TrialResult {
        let mut spec = default_matrix(1, 0)[spec_index];
        spec.location_mm = loc;
        spec.seed = seed;
        TrialResult {
            spec,
            outcome: Outcome::ALL[outcome],
            diverged,
            pose_change_deg: a,
            touch_time: b,
            settle_time: c,
            torque_magnitude_touch: d,
            torque_magnitude_final: e,
            max_penetration: pen,
            max_cone_excess: f,
            min_normal_force: g,
            final_wrench: Wrench { fx: w[0], fy: w[1], torque: w[2] },
            final_contacts: contacts,
            proximal_contact: prox,
            trace_path: trace,
        }
    }
}

proptest! {
    #[test]
    fn trial_csv_round_trips_at_nine_digits(results in proptest::collection::vec(result(), 0..20)) {
        let mut buf = Vec::new();
        write_trials_csv(&results, &mut buf).unwrap();
        let back = read_trials_csv(buf.as_slice()).unwrap();
        let expected: Vec<TrialResult> = results.iter().map(rounded).collect();
        prop_assert_eq!(&back, &expected);
        // Writing the parsed rows reproduces the file byte for byte.
        let mut again = Vec::new();
        write_trials_csv(&back, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn nine_significant_digits(v in -1e12f64..1e12) {
        let r = round_sig9(v);
        prop_assert!((r - v).abs() <= v.abs() * 5e-9);
        prop_assert!(!fmt_num(v).contains(','));
    }
}

#[test]
fn number_format() {
    assert_eq!(fmt_num(100.0), "100");
    assert_eq!(fmt_num(0.1 + 0.2), "0.3");
    assert_eq!(fmt_num(-0.0), "0");
    assert_eq!(fmt_num(1.0 / 3.0), "0.333333333");
    assert_eq!(fmt_num(123456789012.0), "123456789000");
}

#[test]
fn empty_report_is_header_only() {
    let report = SweepReport::from_results(vec![]);
    let dir = tempfile::tempdir().unwrap();
    write_report(dir.path(), &report, None).unwrap();
    let trials = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(trials, TRIAL_HEADER.join(",") + "\n");
    let agg = std::fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert_eq!(agg, AGGREGATE_HEADER.join(",") + "\n");
    assert!(read_trials_csv(trials.as_bytes()).unwrap().is_empty());
    assert!(!dir.path().join("config.toml").exists());
}

#[test]
fn report_files_and_config_echo() {
    let spec = default_matrix(1, 0)[0];
    let result = run_trial(&spec, &HarnessParams::default(), false).result;
    let report = SweepReport::from_results(vec![result.clone()]);
    let dir = tempfile::tempdir().unwrap();
    write_report(dir.path(), &report, Some("[run]\nseed = 0\n")).unwrap();
    let text = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(
        read_trials_csv(text.as_bytes()).unwrap(),
        vec![rounded(&result)]
    );
    let agg = std::fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert!(agg
        .lines()
        .any(|l| l.starts_with("mimo,overall,all,success,")));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("config.toml")).unwrap(),
        "[run]\nseed = 0\n"
    );
}

#[test]
fn unwritable_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let err = write_report(&file.join("sub"), &SweepReport::default(), None).unwrap_err();
    assert!(matches!(err, IoError::File { .. }));
}

#[test]
fn bad_rows_are_reported() {
    let mut text = TRIAL_HEADER.join(",");
    text.push_str(
        "\nmimo,sphere_3,100,0,rubber,0,timeout,false,,,,,,0,,,0,0,0,0,0,false,,false,false\n",
    );
    assert!(matches!(
        read_trials_csv(text.as_bytes()),
        Err(IoError::Parse { row: 1, .. })
    ));
    assert!(read_trials_csv("a,b\n".as_bytes()).is_err());
}

#[test]
fn trace_timestamps_advance_by_the_control_period() {
    let params = HarnessParams::default();
    let spec = default_matrix(1, 0)[0];
    let trace = run_trial(&spec, &params, true).trace.unwrap();
    let mut buf = Vec::new();
    write_trace_json(&trace, &mut buf).unwrap();
    let back = read_trace_json(buf.as_slice()).unwrap();
    assert_eq!(back, trace);
    assert_eq!(back.spec, Some(spec));
    let dt = params.plant.control_period;
    assert!(back.points.len() > 100);
    assert!((back.points[0].time - dt).abs() < 1e-12);
    for w in back.points.windows(2) {
        assert!(w[1].time > w[0].time);
        assert!((w[1].time - w[0].time - dt).abs() < 1e-9);
    }
}

#[test]
fn trace_names_are_unique_per_trial() {
    let specs = default_matrix(1, 0);
    let mut names: Vec<String> = specs
        .iter()
        .enumerate()
        .map(|(i, s)| trace_file_name(i, s))
        .collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), specs.len());
}
