use std::collections::HashMap;
use std::fmt::Write;

use super::{ball, TreeVertex};

/// DOT text for the ball of `radius` around `center`. Edges of the subdivided tree of Q_p are
/// red, the rest blue; vertices of the tree of Q_p itself are filled.
pub fn tree_dot(center: &TreeVertex, radius: i64) -> String {
    let verts = ball(center, radius);
    let ids: HashMap<&TreeVertex, usize> = verts.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut out = String::from("graph bt {\n  node [shape=point];\n");
    for (i, v) in verts.iter().enumerate() {
        let style = if v.in_subtree_f() {
            ", style=filled, color=red"
        } else {
            ""
        };
        writeln!(out, "  v{i} [label=\"{v}\"{style}];").unwrap();
    }
    for (i, v) in verts.iter().enumerate() {
        for w in v.neighbors() {
            let Some(&j) = ids.get(&w) else { continue };
            if j <= i {
                continue;
            }
            let red = v.on_subdivided_f() && w.on_subdivided_f();
            writeln!(
                out,
                "  v{i} -- v{j} [color={}];",
                if red { "red" } else { "blue" }
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{ExtKind, Level, PrimeContext, Tower};

    #[test]
    fn test_dot_edge_counts() {
        let c = PrimeContext::get(3, 20).unwrap();
        let ram = Tower::e(c, ExtKind::RamifiedP);
        let dot = tree_dot(&TreeVertex::base(ram, Level::E), 2);
        // ball of radius 2 in the 4-regular tree: 1 + 4 + 12 vertices, 16 edges
        assert_eq!(dot.matches(" -- ").count(), 16);
        // the subdivided tree of Q_3 through the base: 4 edges to midpoints, then 4 more
        assert_eq!(dot.matches("[color=red]").count(), 8);
    }
}
