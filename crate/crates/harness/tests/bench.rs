use pbt_core::{evaluate, parse, Canvas, Library, PatternCorpus, SearchConfig, Shape, Variant};
use pbt_harness::{
    audit_report, logical_csv, parse_report_csv, read_report_csv, read_sidecar, run_bench,
    AuditError, BENCH_COLUMNS,
};

fn all_variants() -> Vec<SearchConfig> {
    Variant::ALL.iter().map(|&v| SearchConfig::new(v)).collect()
}

fn x_shape() -> Canvas {
    evaluate(
        &parse("add(diag,refl_v(diag))").unwrap(),
        &Library::default(),
    )
    .unwrap()
}

#[test]
fn single_primitive_corpus() {
    let corpus = PatternCorpus::from_patterns([("P1", Shape::Triangle.canvas())]);
    let report = run_bench(&corpus, &all_variants());
    assert_eq!(report.rows.len(), 4);
    for (row, v) in report.rows.iter().zip(Variant::ALL) {
        assert_eq!(row.variant, v);
        assert!(row.solved);
        assert_eq!(row.program.as_deref(), Some("triangle"));
        assert_eq!(row.program_length, Some(1));
    }
}

#[test]
fn repeated_target_is_cheaper_with_a_library() {
    let corpus = PatternCorpus::from_patterns([("A", x_shape()), ("B", x_shape())]);
    let report = run_bench(
        &corpus,
        &[
            SearchConfig::new(Variant::Short),
            SearchConfig::new(Variant::ShortLibrary),
        ],
    );
    let short = &report.rows[1];
    let lib = &report.rows[3];
    assert_eq!(
        (short.variant, lib.variant),
        (Variant::Short, Variant::ShortLibrary)
    );
    assert!(lib.nodes_expanded < short.nodes_expanded);
    assert_eq!(lib.program.as_deref(), Some("helper_1"));
    assert_eq!(lib.library_size_before, 6);
    audit_report(&report.rows, &corpus).unwrap();
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let corpus = PatternCorpus::from_patterns([
        ("A", x_shape()),
        ("B", x_shape().add(Shape::Square.canvas())),
        ("C", Canvas::from_fn(|r, c| (r + c) % 2 == 0)),
    ]);
    let configs: Vec<SearchConfig> = all_variants()
        .into_iter()
        .map(|c| c.with_max_nodes(5_000))
        .collect();
    let a = run_bench(&corpus, &configs);
    let b = run_bench(&corpus, &configs);
    assert_eq!(logical_csv(&a.to_csv()), logical_csv(&b.to_csv()));
    assert!(
        !a.rows[2].solved,
        "checkerboard is out of reach at this budget"
    );
    assert_eq!(a.rows[2].program, None);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out/report.csv");
    let sidecar = a.write(&path).unwrap();
    assert_eq!(sidecar, dir.path().join("out/report.json"));
    let rows = read_report_csv(&path).unwrap();
    assert_eq!(rows.len(), 12);
    for (x, y) in rows.iter().zip(&a.rows) {
        assert_eq!(x.pattern_id, y.pattern_id);
        assert_eq!(x.variant, y.variant);
        assert_eq!(x.program, y.program);
        assert_eq!(x.program_length, y.program_length);
        assert_eq!(x.nodes_expanded, y.nodes_expanded);
        assert!((x.wall_time_ms - y.wall_time_ms).abs() < 1e-3);
    }
    let side = read_sidecar(&path).unwrap();
    assert_eq!(side.corpus_digest, corpus.digest());
    assert_eq!(side.patterns, 3);
    assert_eq!(side.configs[0].max_nodes, 5_000);
    assert_eq!(side.columns, BENCH_COLUMNS);
    audit_report(&rows, &corpus).unwrap();
}

#[test]
fn header_is_checked() {
    let err = parse_report_csv(
        "pattern_id,variant\nP1,short\n",
        std::path::Path::new("x.csv"),
    );
    assert!(err.is_err());
}

#[test]
fn audit_catches_a_wrong_program() {
    let corpus = PatternCorpus::from_patterns([("A", x_shape())]);
    let mut report = run_bench(&corpus, &[SearchConfig::new(Variant::Library)]);
    report.rows[0].program = Some("add(diag,square)".into());
    assert!(matches!(
        audit_report(&report.rows, &corpus),
        Err(AuditError::Mismatch { .. })
    ));
}
