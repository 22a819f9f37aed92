use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::graph::PrimalGraph;
use super::DecompositionError;
use crate::cnf::Var;

/// A tree decomposition rooted at bag 0.
///
/// Bags are kept sorted. `edges` lists tree edges in a fixed order; rooting
/// at bag 0 orients each edge and fixes the child order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<Vec<Var>>,
    edges: Vec<(usize, usize)>,
    num_vertices: u32,
}

impl TreeDecomposition {
    /// `num_vertices` is the vertex count written to `.td` headers.
    pub fn new(bags: Vec<Vec<Var>>, edges: Vec<(usize, usize)>, num_vertices: u32) -> Self {
        let bags = bags
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        TreeDecomposition {
            bags,
            edges,
            num_vertices,
        }
    }

    /// A single empty bag; the decomposition of the empty graph.
    pub fn trivial(num_vertices: u32) -> Self {
        TreeDecomposition::new(vec![Vec::new()], Vec::new(), num_vertices)
    }

    pub fn bags(&self) -> &[Vec<Var>] {
        &self.bags
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_vertices(&self) -> u32 {
        self.num_vertices
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest bag size minus one, or 0 when every bag is empty.
    pub fn width(&self) -> usize {
        self.max_bag_size().saturating_sub(1)
    }

    /// Children lists after rooting at bag 0, in edge order. Fails unless the
    /// edges form a tree spanning every bag.
    pub fn rooted_children(&self) -> Result<Vec<Vec<usize>>, DecompositionError> {
        let n = self.bags.len();
        if n == 0 {
            return Err(DecompositionError::NotATree("no bags".into()));
        }
        if self.edges.len() != n - 1 {
            return Err(DecompositionError::NotATree(format!(
                "{} bags but {} edges",
                n,
                self.edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            if a >= n || b >= n {
                return Err(DecompositionError::NotATree(format!(
                    "edge ({}, {}) references a missing bag",
                    a + 1,
                    b + 1
                )));
            }
            if a == b {
                return Err(DecompositionError::NotATree(format!(
                    "self-loop at bag {}",
                    a + 1
                )));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut children = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    children[x].push(y);
                    queue.push_back(y);
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(DecompositionError::NotATree(format!(
                "bag {} is not connected to bag 1",
                missing + 1
            )));
        }
        Ok(children)
    }

    /// Builds the decomposition induced by eliminating vertices in `order`,
    /// then contracts every bag contained in a neighbouring bag.
    ///
    /// The root is the bag holding the last eliminated vertex. Components of a
    /// disconnected graph hang below that root.
    pub fn from_ordering(g: &PrimalGraph, order: &[Var], num_vertices: u32) -> Self {
        if order.is_empty() {
            return TreeDecomposition::trivial(num_vertices);
        }
        let position: BTreeMap<Var, usize> =
            order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj: BTreeMap<Var, BTreeSet<Var>> = g.adjacency().clone();

        let n = order.len();
        let mut bags: Vec<BTreeSet<Var>> = Vec::with_capacity(n);
        let mut parent: Vec<Option<usize>> = Vec::with_capacity(n);
        for &v in order {
            let neighbors: Vec<Var> = adj[&v].iter().copied().collect();
            for (i, &a) in neighbors.iter().enumerate() {
                for &b in &neighbors[i + 1..] {
                    adj.get_mut(&a).unwrap().insert(b);
                    adj.get_mut(&b).unwrap().insert(a);
                }
            }
            for a in &neighbors {
                adj.get_mut(a).unwrap().remove(&v);
            }
            adj.remove(&v);
            parent.push(neighbors.iter().map(|u| position[u]).min());
            let mut bag: BTreeSet<Var> = neighbors.into_iter().collect();
            bag.insert(v);
            bags.push(bag);
        }

        let root = n - 1;
        let mut neighbors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (child, p) in parent.iter().enumerate() {
            let p = match p {
                Some(p) => *p,
                None if child == root => continue,
                None => root,
            };
            neighbors[child].insert(p);
            neighbors[p].insert(child);
        }

        let mut alive = vec![true; n];
        let mut root = root;
        loop {
            let mut merged = false;
            for x in 0..n {
                if !alive[x] {
                    continue;
                }
                let target = neighbors[x]
                    .iter()
                    .copied()
                    .find(|&y| bags[x].is_subset(&bags[y]));
                if let Some(y) = target {
                    let moved: Vec<usize> =
                        neighbors[x].iter().copied().filter(|&z| z != y).collect();
                    for z in moved {
                        neighbors[z].remove(&x);
                        neighbors[z].insert(y);
                        neighbors[y].insert(z);
                    }
                    neighbors[y].remove(&x);
                    neighbors[x].clear();
                    alive[x] = false;
                    if root == x {
                        root = y;
                    }
                    merged = true;
                }
            }
            if !merged {
                break;
            }
        }

        // Relabel breadth-first from the root so the root becomes bag 0.
        let mut label = vec![usize::MAX; n];
        let mut out_bags = Vec::new();
        let mut out_edges = Vec::new();
        let mut queue = VecDeque::from([root]);
        label[root] = 0;
        out_bags.push(bags[root].iter().copied().collect());
        while let Some(x) = queue.pop_front() {
            for &y in &neighbors[x] {
                if label[y] == usize::MAX {
                    label[y] = out_bags.len();
                    out_bags.push(bags[y].iter().copied().collect());
                    out_edges.push((label[x], label[y]));
                    queue.push_back(y);
                }
            }
        }
        TreeDecomposition::new(out_bags, out_edges, num_vertices)
    }

    /// Checks the decomposition conditions against `g`.
    pub fn validate(&self, g: &PrimalGraph) -> ValidationReport {
        let mut violations = Vec::new();
        let children = match self.rooted_children() {
            Ok(c) => Some(c),
            Err(e) => {
                violations.push(Violation::NotATree(e.to_string()));
                None
            }
        };

        let sets: Vec<BTreeSet<Var>> = self
            .bags
            .iter()
            .map(|b| b.iter().copied().collect())
            .collect();
        let covered: BTreeSet<Var> = sets.iter().flatten().copied().collect();
        for v in g.vertices() {
            if !covered.contains(&v) {
                violations.push(Violation::UncoveredVertex(v));
            }
        }
        for (u, v) in g.edges() {
            if !sets.iter().any(|s| s.contains(&u) && s.contains(&v)) {
                violations.push(Violation::UncoveredEdge(u, v));
            }
        }

        if let Some(children) = children {
            // Occurrences of v are connected iff exactly one bag holding v has
            // a parent that does not hold v.
            let mut parent = vec![usize::MAX; self.bags.len()];
            for (x, cs) in children.iter().enumerate() {
                for &c in cs {
                    parent[c] = x;
                }
            }
            let mut tops: BTreeMap<Var, usize> = BTreeMap::new();
            for (x, s) in sets.iter().enumerate() {
                for v in s {
                    if x == 0 || !sets[parent[x]].contains(v) {
                        *tops.entry(*v).or_default() += 1;
                    }
                }
            }
            for (v, count) in tops {
                if count > 1 {
                    violations.push(Violation::Disconnected(v));
                }
            }
        }
        ValidationReport { violations }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotATree(String),
    UncoveredVertex(Var),
    UncoveredEdge(Var, Var),
    /// The bags containing this variable do not form a connected subtree.
    Disconnected(Var),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotATree(why) => write!(f, "not a tree: {why}"),
            Violation::UncoveredVertex(v) => write!(f, "vertex {v} is in no bag"),
            Violation::UncoveredEdge(u, v) => write!(f, "edge {{{u},{v}}} is in no bag"),
            Violation::Disconnected(v) => write!(f, "bags containing {v} are not connected"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::ordering::induced_width;

    fn v(id: u32) -> Var {
        Var::new(id)
    }

    fn bag(ids: &[u32]) -> Vec<Var> {
        ids.iter().map(|&i| v(i)).collect()
    }

    fn running_example() -> PrimalGraph {
        let mut g = PrimalGraph::new();
        g.add_edge(v(1), v(2));
        g.add_edge(v(1), v(3));
        g.add_edge(v(2), v(3));
        g.add_edge(v(1), v(4));
        g
    }

    #[test]
    fn triangle_gives_one_bag() {
        let mut g = PrimalGraph::new();
        g.add_edge(v(1), v(2));
        g.add_edge(v(2), v(3));
        g.add_edge(v(1), v(3));
        let td = TreeDecomposition::from_ordering(&g, &[v(2), v(3), v(1)], 3);
        assert_eq!(td.bags(), &[bag(&[1, 2, 3])]);
        assert_eq!(td.width(), 2);
        assert!(td.validate(&g).is_valid());
    }

    #[test]
    fn running_example_ordering() {
        let g = running_example();
        let order = [v(4), v(3), v(2), v(1)];
        let td = TreeDecomposition::from_ordering(&g, &order, 4);
        let mut bags: Vec<_> = td.bags().to_vec();
        bags.sort();
        assert_eq!(bags, vec![bag(&[1, 2, 3]), bag(&[1, 4])]);
        assert_eq!(td.width(), 2);
        assert_eq!(td.width(), induced_width(&g, &order));
        assert!(td.validate(&g).is_valid());
    }

    #[test]
    fn path_without_fill() {
        let mut g = PrimalGraph::new();
        g.add_edge(v(1), v(2));
        g.add_edge(v(2), v(3));
        let td = TreeDecomposition::from_ordering(&g, &[v(1), v(3), v(2)], 3);
        assert_eq!(td.width(), 1);
        assert!(td.validate(&g).is_valid());
    }

    #[test]
    fn disconnected_graph_is_still_one_tree() {
        let mut g = PrimalGraph::new();
        g.add_edge(v(1), v(2));
        g.add_edge(v(3), v(4));
        g.add_vertex(v(5));
        let td = TreeDecomposition::from_ordering(&g, &[v(1), v(3), v(5), v(2), v(4)], 5);
        assert!(td.validate(&g).is_valid(), "{}", td.validate(&g));
    }

    #[test]
    fn three_bag_decomposition_is_valid() {
        let td = TreeDecomposition::new(
            vec![bag(&[1]), bag(&[1, 2, 3]), bag(&[1, 4])],
            vec![(0, 1), (0, 2)],
            4,
        );
        assert!(td.validate(&running_example()).is_valid());
    }

    #[test]
    fn missing_edge_is_reported() {
        let td = TreeDecomposition::new(
            vec![bag(&[1]), bag(&[1, 2, 3]), bag(&[4])],
            vec![(0, 1), (0, 2)],
            4,
        );
        let report = td.validate(&running_example());
        assert_eq!(
            report.violations,
            vec![Violation::UncoveredEdge(v(1), v(4))]
        );
    }

    #[test]
    fn connectedness_violation_is_reported() {
        let mut g = PrimalGraph::new();
        g.add_vertex(v(1));
        let td = TreeDecomposition::new(
            vec![bag(&[1]), bag(&[]), bag(&[1])],
            vec![(0, 1), (1, 2)],
            1,
        );
        assert_eq!(
            td.validate(&g).violations,
            vec![Violation::Disconnected(v(1))]
        );
    }

    #[test]
    fn non_tree_is_reported() {
        let td = TreeDecomposition::new(vec![bag(&[1]), bag(&[1])], vec![], 1);
        assert!(matches!(
            td.validate(&PrimalGraph::new()).violations[0],
            Violation::NotATree(_)
        ));
    }
}
