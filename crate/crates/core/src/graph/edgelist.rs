//! Plain-text edge-list format.
//!
//! ```text
//! n m
//! u v        (m lines, 0-based; a loop is written `u u`)
//! H v h      (optional, one per vertex)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

pub fn to_edge_list(g: &Graph) -> String {
    let edges = g.edges();
    let mut out = String::with_capacity(16 * (edges.len() + 1));
    let _ = writeln!(out, "{} {}", g.n_vertices(), edges.len());
    for (u, w) in edges {
        let _ = writeln!(out, "{u} {w}");
    }
    if let Some(h) = g.heights() {
        for (v, h) in h.iter().enumerate() {
            let _ = writeln!(out, "H {v} {h}");
        }
    }
    out
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse { line, message: format!("missing {what}") })?;
    tok.parse()
        .map_err(|_| Error::Parse { line, message: format!("invalid {what} `{tok}`") })
}

pub fn parse_edge_list(text: &str, name: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty input".into() })?;
    let mut toks = header.split_whitespace();
    let n: usize = parse_num(toks.next(), hline, "vertex count")?;
    let m: usize = parse_num(toks.next(), hline, "edge count")?;
    if toks.next().is_some() {
        return Err(Error::Parse { line: hline, message: "header must be `n m`".into() });
    }

    let mut edges = Vec::with_capacity(m);
    let mut heights: Option<Vec<u64>> = None;
    for (line, text) in lines {
        let mut toks = text.split_whitespace();
        if text.starts_with('H') {
            toks.next();
            let v: usize = parse_num(toks.next(), line, "vertex")?;
            let h: u64 = parse_num(toks.next(), line, "height")?;
            if v >= n {
                return Err(Error::Parse { line, message: format!("height for vertex {v} out of range") });
            }
            heights.get_or_insert_with(|| vec![0; n])[v] = h;
        } else {
            if heights.is_some() {
                return Err(Error::Parse { line, message: "edge after height lines".into() });
            }
            let u: usize = parse_num(toks.next(), line, "endpoint")?;
            let w: usize = parse_num(toks.next(), line, "endpoint")?;
            if u >= n || w >= n {
                return Err(Error::Parse { line, message: format!("endpoint out of range in `{text}`") });
            }
            edges.push((u, w));
        }
        if toks.next().is_some() {
            return Err(Error::Parse { line, message: format!("trailing tokens in `{text}`") });
        }
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: hline,
            message: format!("header declares {m} edges but {} were read", edges.len()),
        });
    }
    let mut g = Graph::from_edges(n, &edges, name)?;
    if let Some(h) = heights {
        g.set_heights(h)?;
    }
    Ok(g)
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, &path.display().to_string())
}

pub fn write_edge_list(g: &Graph, path: &Path) -> Result<()> {
    std::fs::write(path, to_edge_list(g))?;
    Ok(())
}
