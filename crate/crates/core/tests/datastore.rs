use std::path::{Path, PathBuf};

use pesto_core::datastore::{Dataset, DatastoreError, COLUMNS};
use pesto_core::testkit;
use proptest::prelude::*;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

#[test]
fn fixture_writes_golden_bytes() {
    let ds = Dataset::read_csv(&data("three_candidates.csv")).unwrap();
    let golden = std::fs::read_to_string(data("three_candidates.golden.csv")).unwrap();
    assert_eq!(ds.to_csv_string(), golden);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    ds.write_csv(&out).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), golden);
}

#[test]
fn golden_reads_to_known_dataset() {
    let ds = Dataset::read_csv(&data("three_candidates.golden.csv")).unwrap();
    assert_eq!(ds.len(), 3);
    let vue = ds.get("vuejs/\"vue\", core").unwrap();
    assert_eq!(vue.star_count, 207_000);
    assert_eq!(vue.avg_issue_comments, None);
    assert_eq!(vue.crawled_at.to_rfc3339(), "2024-05-01T08:00:01.500+00:00");
    let redux = ds.get("reduxjs/redux").unwrap();
    assert_eq!(redux.avg_issue_active_time_days, Some(9.333333));
    assert_eq!(redux.dependency_count, None);
}

#[test]
fn reordered_columns_are_accepted() {
    let ds = Dataset::read_csv(&data("three_candidates.csv")).unwrap();
    let mut rdr = csv::Reader::from_path(data("three_candidates.csv")).unwrap();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut cols: Vec<usize> = (0..COLUMNS.len()).collect();
    cols.reverse();
    let headers = rdr.headers().unwrap().clone();
    w.write_record(cols.iter().map(|&i| &headers[i])).unwrap();
    for row in rdr.records() {
        let row = row.unwrap();
        w.write_record(cols.iter().map(|&i| &row[i])).unwrap();
    }
    let bytes = w.into_inner().unwrap();
    assert_eq!(Dataset::read_from(bytes.as_slice()).unwrap().records(), ds.records());
}

#[test]
fn missing_file_is_io_error() {
    assert!(matches!(
        Dataset::read_csv(Path::new("/nonexistent/data.csv")),
        Err(DatastoreError::Io { .. })
    ));
}

proptest! {
    #[test]
    fn write_then_read_is_identity(ds in testkit::dataset(6)) {
        let text = ds.to_csv_string();
        let back = Dataset::read_from(text.as_bytes()).unwrap();
        prop_assert_eq!(back.records(), ds.records());
    }

    #[test]
    fn merges_keep_names_unique(
        base in testkit::dataset(5),
        batches in proptest::collection::vec(proptest::collection::vec(testkit::candidate_record(), 0..4), 0..4),
    ) {
        let mut ds = base;
        for batch in batches {
            let once = ds.merge(batch.clone());
            prop_assert_eq!(&once.merge(batch), &once);
            ds = once;
        }
        let mut names: Vec<_> = ds.full_names().collect();
        let n = names.len();
        names.sort();
        names.dedup();
        prop_assert_eq!(names.len(), n);
    }
}
