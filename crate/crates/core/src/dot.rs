//! Hasse diagrams in DOT syntax.

use std::fmt::Write;

use crate::order::{HeightedOrder, Point};

/// Cover pairs `(x, y)`: `x ⊲ y` with nothing strictly between.
pub fn hasse_edges(ord: &HeightedOrder) -> Vec<(Point, Point)> {
    let p = ord.points();
    let n = p.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !ord.le_idx(i, j) {
                continue;
            }
            let between = (0..n).any(|k| k != i && k != j && ord.le_idx(i, k) && ord.le_idx(k, j));
            if !between {
                out.push((p[i], p[j]));
            }
        }
    }
    out
}

/// The Hasse diagram, one rank per height, lowest height at the bottom.
pub fn export_dot(ord: &HeightedOrder) -> String {
    let id = |p: Point| format!("p{}_{}", p.alpha, p.beta);
    let mut s = String::from("digraph order {\n  rankdir=BT;\n");
    for h in ord.heights() {
        let _ = write!(s, "  {{ rank=same;");
        for &p in ord.points().iter().filter(|p| p.beta == h) {
            let _ = write!(s, " {} [label=\"{}\"];", id(p), p);
        }
        s.push_str(" }\n");
    }
    for (x, y) in hasse_edges(ord) {
        let _ = writeln!(s, "  {} -> {};", id(x), id(y));
    }
    s.push_str("}\n");
    s
}
