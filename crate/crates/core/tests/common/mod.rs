#![allow(dead_code)]

use mapscope_core::maps::CombinatorialMap;

/// An edge of a straight-line-or-bent drawing: endpoints and the bend
/// angle in degrees (positive bends to the left of the `from -> to`
/// direction, negative to the right).
pub struct DrawnEdge {
    pub from: usize,
    pub to: usize,
    pub bend: f64,
}

pub fn edge(from: usize, to: usize, bend: f64) -> DrawnEdge {
    DrawnEdge { from, to, bend }
}

/// Builds the rotation system of a planar drawing by sorting the darts
/// leaving each vertex by departure angle (counterclockwise). Dart `2i`
/// runs `from -> to` of edge `i`, dart `2i + 1` the other way; the root is
/// dart `2 * root_edge`.
pub fn map_from_drawing(points: &[(f64, f64)], edges: &[DrawnEdge], root_edge: usize) -> CombinatorialMap {
    let n = 2 * edges.len();
    let mut alpha = vec![0; n];
    let mut source = vec![0; n];
    let mut angle = vec![0.0; n];
    for (i, e) in edges.iter().enumerate() {
        let (a, b) = (2 * i, 2 * i + 1);
        alpha[a] = b;
        alpha[b] = a;
        source[a] = e.from;
        source[b] = e.to;
        let (px, py) = points[e.from];
        let (qx, qy) = points[e.to];
        let forward = (qy - py).atan2(qx - px).to_degrees();
        let backward = (py - qy).atan2(px - qx).to_degrees();
        angle[a] = (forward + e.bend).rem_euclid(360.0);
        angle[b] = (backward - e.bend).rem_euclid(360.0);
    }
    let mut sigma = vec![0; n];
    for v in 0..points.len() {
        let mut ds: Vec<usize> = (0..n).filter(|&d| source[d] == v).collect();
        ds.sort_by(|&x, &y| angle[x].partial_cmp(&angle[y]).unwrap());
        for (i, &d) in ds.iter().enumerate() {
            sigma[d] = ds[(i + 1) % ds.len()];
        }
    }
    CombinatorialMap::new(alpha, sigma, 2 * root_edge)
}

/// The six maps on four edges, in drawing order.
pub fn figure_one_maps() -> Vec<CombinatorialMap> {
    let (l, m, r) = ((-1.0, 0.0), (0.0, 0.0), (1.0, 0.0));
    vec![
        // two vertices, four parallel edges; root is the outer arc on top
        map_from_drawing(
            &[l, r],
            &[edge(0, 1, 40.0), edge(1, 0, -80.0), edge(0, 1, -40.0), edge(0, 1, -80.0)],
            1,
        ),
        map_from_drawing(
            &[l, m, r],
            &[edge(0, 2, 40.0), edge(0, 1, 0.0), edge(1, 2, 0.0), edge(0, 2, -40.0)],
            3,
        ),
        map_from_drawing(
            &[l, m, r],
            &[edge(0, 1, 0.0), edge(1, 2, 0.0), edge(2, 0, -40.0), edge(1, 2, -40.0)],
            3,
        ),
        map_from_drawing(
            &[l, m, r],
            &[edge(0, 1, 0.0), edge(1, 2, 0.0), edge(1, 2, -40.0), edge(2, 0, -40.0)],
            3,
        ),
        map_from_drawing(
            &[l, m, r],
            &[edge(0, 1, -40.0), edge(0, 1, 0.0), edge(1, 2, 0.0), edge(2, 0, -40.0)],
            3,
        ),
        map_from_drawing(
            &[(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            &[edge(0, 1, 0.0), edge(1, 2, 0.0), edge(2, 3, 0.0), edge(3, 0, -40.0)],
            3,
        ),
    ]
}

/// The 2-face-free map with a multiple edge.
pub fn figure_seven_map() -> CombinatorialMap {
    let pts = [(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
    map_from_drawing(
        &pts,
        &[
            edge(0, 2, 40.0),
            edge(0, 1, 0.0),
            edge(1, 2, 0.0),
            edge(2, 3, -35.0),
            edge(3, 0, -35.0),
            edge(0, 2, -40.0),
        ],
        3,
    )
}

pub const FIGURE_TWO_TREES: [&str; 6] = [
    "(1 (1 (1 (1))))",
    "(1 (1 (1) (1)))",
    "(2 (2 (1) (1)))",
    "(2 (1) (1 (1)))",
    "(2 (1 (1)) (1))",
    "(3 (1) (1) (1))",
];

pub const FIGURE_THREE_TREE: &str = "(4 (2 (1 (1)) (1) (1)) (1) (1 (2 (1) (1))))";
