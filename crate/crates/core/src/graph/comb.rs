use super::{Graph, Vertex};
use crate::error::Result;

/// Explicit comb product `Comb_v(G, H)`.
///
/// Vertex `(x, w)` is numbered `x * |V(H)| + w`. Edges are
/// `{(x,w),(x,z)}` for every edge `{w,z}` of `H` and `{(x,v),(y,v)}` for
/// every edge `{x,y}` of `G`.
pub fn comb_product(base: &Graph, tooth: &Graph, anchor: Vertex) -> Result<Graph> {
    tooth.check_vertex(anchor)?;
    let m = tooth.n_vertices();
    let id = |x: Vertex, w: Vertex| x * m + w;
    let mut lists: Vec<Vec<Vertex>> = Vec::with_capacity(base.n_vertices() * m);
    for x in 0..base.n_vertices() {
        for w in 0..m {
            let mut nbrs: Vec<Vertex> = tooth.neighbors(w).iter().map(|&z| id(x, z)).collect();
            if w == anchor {
                nbrs.extend(base.neighbors(x).iter().map(|&y| id(y, anchor)));
            }
            lists.push(nbrs);
        }
    }
    Graph::from_adjacency(lists, format!("comb:{}:{}@{anchor}", base.name(), tooth.name()))
}
