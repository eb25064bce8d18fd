use proptest::prelude::*;

use starflow::io::{read_field, write_field};
use starflow_core::{EdgeGrid, GraphFunction, StarGraph};

proptest! {
    #[test]
    fn field_csv_round_trip_is_bitwise(
        n in 1usize..4,
        m in 1usize..4,
        cells in 2usize..30,
        length in 0.5f64..50.0,
        seed in prop::collection::vec(-1e6f64..1e6, 1..200),
    ) {
        let graph = StarGraph::new(n, m).unwrap();
        let grid = EdgeGrid::new(length, cells).unwrap();
        let values: Vec<f64> = (0..graph.edge_count() * cells).map(|i| seed[i % seed.len()] / (i as f64 + 1.0)).collect();
        let u = GraphFunction::from_parts(graph, grid, seed[0], values).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let back = read_field(buf.as_slice(), n).unwrap();
        prop_assert_eq!(back, u);
    }
}
