use proptest::prelude::*;
use swimflow::{Grid, RealVectorField};
use swimflow_cli::snapshot::Snapshot;
use swimflow_cli::timeseries::{read_table, write_table};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn snapshot_roundtrip_is_bitwise(
        d in 2usize..=3,
        h in 2usize..=3,
        t in -1e6f64..1e6,
        len in 0.1f64..10.0,
        seed in any::<u64>(),
    ) {
        let n = vec![2 * h; d];
        let g = Grid::new(d, &n, &vec![len; d]).unwrap();
        let mut state = seed | 1;
        let vals = (0..d * g.real_len())
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                f64::from_bits((state >> 12) | 0x3ff0_0000_0000_0000) - 1.5
            })
            .collect();
        let s = Snapshot { t, field: RealVectorField::from_values(g, vals).unwrap() };
        let bytes = s.encode();
        prop_assert_eq!(Snapshot::decode(&bytes).unwrap().encode(), bytes);
    }

    #[test]
    fn csv_roundtrip_is_exact(rows in prop::collection::vec(
        prop::collection::vec(prop::option::of(any::<f64>().prop_filter("finite", |v| v.is_finite())), 3),
        0..8,
    )) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_table(&path, &["a", "b", "c"], &rows).unwrap();
        let (header, back) = read_table(&path).unwrap();
        prop_assert_eq!(header, vec!["a", "b", "c"]);
        prop_assert_eq!(back, rows);
    }
}
