//! Build a small graph, inspect degrees and components, and round-trip the
//! edge-list text format.
//!
//!     cargo run --example graph_basics

use ile::graph::Graph;

fn main() -> ile::Result<()> {
    // two triangles joined by a bridge, plus a dangling isolated vertex
    let edges = [
        (0, 1, 1.0),
        (1, 2, 1.0),
        (0, 2, 1.0),
        (2, 3, 0.5),
        (3, 4, 1.0),
        (4, 5, 1.0),
        (3, 5, 1.0),
    ];
    let g = Graph::from_edge_list(&edges, 7)?;
    println!("n = {}, edges = {}", g.n(), g.num_edges());
    println!("degrees = {:?}", g.degree_vector().values());
    println!("connected = {}", g.is_connected());

    let (lcc, keep) = g.largest_connected_component()?;
    println!("largest component keeps {:?} ({} nodes)", keep, lcc.n());

    let y = g.adjacency_apply(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])?;
    println!("A e_0 = {y:?}");

    let text = lcc.to_edge_list_string();
    print!("{text}");
    let back = Graph::parse_edge_list(text.as_bytes(), None)?;
    assert_eq!(back, lcc);
    Ok(())
}
