use std::fmt::Write as _;

use petgraph::algo::is_isomorphic_matching;
use petgraph::graph::{NodeIndex, UnGraph};
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafVertex {
    /// `u` (on a cover or plain complex) or `|u|` (on a base) of the leaf.
    pub level: f64,
    /// Branch components contained in the leaf.
    pub components: Vec<usize>,
    /// Base vertices of zeros contained in the leaf.
    pub zeros: Vec<usize>,
}

impl LeafVertex {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty() && self.zeros.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafEdge {
    pub ends: [usize; 2],
    pub length: f64,
}

/// A finite metric graph; multi-edges and loops are kept.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LeafGraph {
    pub vertices: Vec<LeafVertex>,
    pub edges: Vec<LeafEdge>,
}

impl LeafGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|e| e.ends.iter().filter(|&&x| x == v).count()).sum()
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.degree(v) == 1).collect()
    }

    pub fn n_components(&self) -> usize {
        let mut uf = UnionFind::new(self.vertices.len());
        for e in &self.edges {
            uf.union(e.ends[0], e.ends[1]);
        }
        (0..self.vertices.len()).filter(|&v| uf.find(v) == v).count()
    }

    pub fn first_betti(&self) -> usize {
        self.edges.len() + self.n_components() - self.vertices.len()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Merges every vertex of degree 2 with empty payload into a single edge.
    pub fn contract(&mut self) {
        loop {
            let pick = (0..self.vertices.len()).find(|&v| {
                let inc: Vec<usize> = (0..self.edges.len()).filter(|&e| self.edges[e].ends.contains(&v)).collect();
                self.vertices[v].is_empty() && inc.len() == 2 && self.degree(v) == 2
            });
            let Some(v) = pick else { break };
            let inc: Vec<usize> = (0..self.edges.len()).filter(|&e| self.edges[e].ends.contains(&v)).collect();
            let other = |e: &LeafEdge| if e.ends[0] == v { e.ends[1] } else { e.ends[0] };
            let (a, b) = (other(&self.edges[inc[0]]), other(&self.edges[inc[1]]));
            let length = self.edges[inc[0]].length + self.edges[inc[1]].length;
            self.edges.remove(inc[1]);
            self.edges[inc[0]] = LeafEdge { ends: [a.min(b), a.max(b)], length };
            self.remove_vertex(v);
        }
    }

    fn remove_vertex(&mut self, v: usize) {
        self.vertices.remove(v);
        for e in &mut self.edges {
            for x in &mut e.ends {
                if *x > v {
                    *x -= 1;
                }
            }
        }
    }

    pub fn to_petgraph(&self) -> UnGraph<LeafVertex, f64> {
        let mut g = UnGraph::new_undirected();
        for v in &self.vertices {
            g.add_node(v.clone());
        }
        for e in &self.edges {
            g.add_edge(NodeIndex::new(e.ends[0]), NodeIndex::new(e.ends[1]), e.length);
        }
        g
    }

    /// Isomorphism preserving payloads and lengths within `tol`.
    pub fn isomorphic(&self, other: &LeafGraph, tol: f64) -> bool {
        let (g, h) = (self.to_petgraph(), other.to_petgraph());
        is_isomorphic_matching(
            &g,
            &h,
            |a, b| a.components == b.components && a.zeros == b.zeros,
            |x, y| (x - y).abs() <= tol,
        )
    }

    /// Graphviz rendering with lengths to six decimals.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph leaves {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let mut label = format!("u={:.6}", v.level);
            if !v.components.is_empty() {
                let names: Vec<String> = v.components.iter().map(|c| format!("Σ{}", c + 1)).collect();
                write!(label, "\\n{}", names.join(",")).unwrap();
            }
            if !v.zeros.is_empty() {
                write!(label, "\\nzeros {:?}", v.zeros).unwrap();
            }
            writeln!(s, "  v{i} [label=\"{label}\"];").unwrap();
        }
        for e in &self.edges {
            writeln!(s, "  v{} -- v{} [label=\"{:.6}\"];", e.ends[0], e.ends[1], e.length).unwrap();
        }
        s.push_str("}\n");
        s
    }
}

/// Connected with first Betti number 0.
pub fn check_tree(g: &LeafGraph) -> bool {
    g.n_components() == 1 && g.first_betti() == 0
}

/// Every edge length is an integer multiple of `1/mu` within `1e-6`.
pub fn check_commensurable(g: &LeafGraph, mu: f64) -> bool {
    g.edges.iter().all(|e| {
        let x = e.length * mu;
        (x - x.round()).abs() <= 1e-6 && x.round() >= 1.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertex(components: Vec<usize>) -> LeafVertex {
        LeafVertex { level: 0.0, components, zeros: vec![] }
    }

    #[test]
    fn contraction_and_checks() {
        let mut g = LeafGraph {
            vertices: vec![vertex(vec![0]), vertex(vec![]), vertex(vec![1])],
            edges: vec![LeafEdge { ends: [0, 1], length: 0.25 }, LeafEdge { ends: [1, 2], length: 0.25 }],
        };
        g.contract();
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.edges, vec![LeafEdge { ends: [0, 1], length: 0.5 }]);
        assert!(check_tree(&g));
        assert!(check_commensurable(&g, 2.0));
        assert!(!check_commensurable(&g, 1.0));
        let dot = g.to_dot();
        assert!(dot.contains("0.500000") && dot.contains("Σ2"));
    }

    #[test]
    fn a_loop_survives_contraction() {
        let mut g = LeafGraph {
            vertices: vec![vertex(vec![]), vertex(vec![])],
            edges: vec![LeafEdge { ends: [0, 1], length: 0.5 }, LeafEdge { ends: [0, 1], length: 0.5 }],
        };
        g.contract();
        assert_eq!(g.vertices.len(), 1);
        assert_eq!(g.first_betti(), 1);
        assert_eq!(g.total_length(), 1.0);
        assert!(!check_tree(&g));
    }
}
