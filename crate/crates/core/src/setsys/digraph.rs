use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::SetSystem;

/// Dependency digraph: `i → j` when some term of equation `i` admits a
/// positive exponent for `Y_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    names: Vec<String>,
    edges: Vec<BTreeSet<usize>>,
    // reach[i][j] is i →⁺ j.
    reach: Vec<Vec<bool>>,
}

impl DependencyGraph {
    pub fn new(sys: &SetSystem) -> Self {
        let k = sys.len();
        let edges: Vec<BTreeSet<usize>> = sys
            .equations()
            .iter()
            .map(|eq| eq.iter().flat_map(|t| t.used_variables()).collect())
            .collect();
        let mut reach = vec![vec![false; k]; k];
        for i in 0..k {
            let mut stack: Vec<usize> = edges[i].iter().copied().collect();
            while let Some(j) = stack.pop() {
                if !reach[i][j] {
                    reach[i][j] = true;
                    stack.extend(edges[j].iter().copied());
                }
            }
        }
        DependencyGraph { names: sys.variables().to_vec(), edges, reach }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn successors(&self, i: usize) -> &BTreeSet<usize> {
        &self.edges[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges[i].contains(&j)
    }

    /// `i →⁺ j`.
    pub fn reaches_plus(&self, i: usize, j: usize) -> bool {
        self.reach[i][j]
    }

    /// `i →⋆ j`.
    pub fn reaches_star(&self, i: usize, j: usize) -> bool {
        i == j || self.reach[i][j]
    }

    /// `[i] = {j : i →⁺ j →⁺ i}`, empty when `i` lies on no cycle.
    pub fn strong_component(&self, i: usize) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.reach[i][j] && self.reach[j][i]).collect()
    }

    /// Partition of the vertices into strong components (acyclic vertices as
    /// singletons), ordered so that every component comes after the ones it
    /// depends on.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let k = self.len();
        let mut comp_of = vec![usize::MAX; k];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for i in 0..k {
            if comp_of[i] != usize::MAX {
                continue;
            }
            let mut c = self.strong_component(i);
            if c.is_empty() {
                c = vec![i];
            }
            for &j in &c {
                comp_of[j] = comps.len();
            }
            comps.push(c);
        }
        let n = comps.len();
        let mut order = Vec::with_capacity(n);
        let mut state = vec![0u8; n];
        fn visit(
            c: usize,
            g: &DependencyGraph,
            comps: &[Vec<usize>],
            comp_of: &[usize],
            state: &mut [u8],
            order: &mut Vec<usize>,
        ) {
            if state[c] != 0 {
                return;
            }
            state[c] = 1;
            for &i in &comps[c] {
                for &j in &g.edges[i] {
                    if comp_of[j] != c {
                        visit(comp_of[j], g, comps, comp_of, state, order);
                    }
                }
            }
            state[c] = 2;
            order.push(c);
        }
        for c in 0..n {
            visit(c, self, &comps, &comp_of, &mut state, &mut order);
        }
        order.into_iter().map(|c| comps[c].clone()).collect()
    }

    /// Graphviz rendering; non-trivial strong components become clusters.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dependencies {\n");
        let mut cluster = 0;
        for comp in self.components() {
            let cyclic = comp.len() > 1 || self.reach[comp[0]][comp[0]];
            if cyclic {
                let _ = writeln!(out, "  subgraph cluster_{} {{", cluster);
                cluster += 1;
                for &i in &comp {
                    let _ = writeln!(out, "    \"{}\";", self.names[i]);
                }
                out.push_str("  }\n");
            } else {
                let _ = writeln!(out, "  \"{}\";", self.names[comp[0]]);
            }
        }
        for (i, succ) in self.edges.iter().enumerate() {
            for &j in succ {
                let _ = writeln!(out, "  \"{}\" -> \"{}\";", self.names[i], self.names[j]);
            }
        }
        out.push_str("}\n");
        out
    }
}
