use ndiv_core::graph::{load_edge_list, load_features, load_labels, write_column, write_edge_list, write_matrix};
use ndiv_core::{Error, Graph, Synthetic, SyntheticSpec};

#[test]
fn generated_graph_round_trips_through_files() {
    let spec = SyntheticSpec {
        n: 500,
        anomalies_per_type: 10,
        seed: 3,
        ..Default::default()
    };
    let sg: Synthetic = ndiv_core::synthgen::generate(&spec).unwrap();
    let g = &sg.graph;
    let dir = tempfile::tempdir().unwrap();
    let (e, f, l) = (dir.path().join("e.txt"), dir.path().join("f.csv"), dir.path().join("l.txt"));
    write_edge_list(g, &e).unwrap();
    write_matrix(g.features(), &f).unwrap();
    write_column(g.labels().unwrap(), &l).unwrap();

    let el = load_edge_list(&e).unwrap();
    let feats = load_features::<f64>(&f, 500).unwrap();
    let labels = load_labels(&l, 500).unwrap();
    assert_eq!(&feats, g.features());
    assert_eq!(labels, g.labels().unwrap());
    let back = Graph::build(&el.original_edges(), feats, Some(labels)).unwrap();
    assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
}

#[test]
fn missing_file_is_io_error() {
    let err = load_edge_list(std::path::Path::new("/nonexistent/edges.txt")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}
