use std::fmt;

use super::td::TreeDecomposition;
use super::DecompositionError;
use crate::cnf::Var;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Leaf,
    Introduce(Var),
    Remove(Var),
    Join,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Leaf => f.write_str("leaf"),
            NodeKind::Introduce(v) => write!(f, "int {v}"),
            NodeKind::Remove(v) => write!(f, "rem {v}"),
            NodeKind::Join => f.write_str("join"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceNode {
    pub kind: NodeKind,
    /// Sorted by variable id.
    pub bag: Vec<Var>,
    pub children: Vec<NodeId>,
}

/// A nice tree decomposition. Node ids are post-order positions, so children
/// always precede their parent and the root is the last node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    nodes: Vec<NiceNode>,
}

impl NiceTreeDecomposition {
    /// Wraps nodes given in post-order, checking every nice-node rule.
    pub fn from_nodes(nodes: Vec<NiceNode>) -> Result<Self, DecompositionError> {
        let ntd = NiceTreeDecomposition { nodes };
        ntd.check_structure()?;
        Ok(ntd)
    }

    pub fn nodes(&self) -> &[NiceNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &NiceNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.nodes.len() - 1
    }

    /// Node ids in post-order (children before parents).
    pub fn post_order(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        0..self.nodes.len()
    }

    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Parent of every node; `None` for the root.
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parent = vec![None; self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                parent[c] = Some(id);
            }
        }
        parent
    }

    /// Node ids of the subtree rooted at `id`, in post-order.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.nodes[x].children.iter().copied());
        }
        out.sort_unstable();
        out
    }

    /// The plain decomposition underneath, rooted at the nice root.
    pub fn to_td(&self, num_vertices: u32) -> TreeDecomposition {
        let n = self.nodes.len();
        let relabel = |id: NodeId| n - 1 - id;
        let bags = (0..n).rev().map(|id| self.nodes[id].bag.clone()).collect();
        let mut edges = Vec::new();
        for id in (0..n).rev() {
            for &c in &self.nodes[id].children {
                edges.push((relabel(id), relabel(c)));
            }
        }
        TreeDecomposition::new(bags, edges, num_vertices)
    }

    /// Checks the post-order numbering and the bag relation of every node.
    pub fn check_structure(&self) -> Result<(), DecompositionError> {
        let bad = |id: NodeId, why: String| {
            Err(DecompositionError::NotNice {
                node: id,
                reason: why,
            })
        };
        if self.nodes.is_empty() {
            return Err(DecompositionError::NotATree("no nodes".into()));
        }
        let mut has_parent = vec![false; self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate() {
            if n.bag.windows(2).any(|w| w[0] >= w[1]) {
                return bad(id, "bag is not sorted".into());
            }
            for &c in &n.children {
                if c >= id {
                    return bad(id, format!("child {c} does not precede its parent"));
                }
                if std::mem::replace(&mut has_parent[c], true) {
                    return bad(c, "node has two parents".into());
                }
            }
            let child_bag = |i: usize| &self.nodes[n.children[i]].bag;
            match n.kind {
                NodeKind::Leaf => {
                    if !n.children.is_empty() || !n.bag.is_empty() {
                        return bad(id, "leaf must have no children and an empty bag".into());
                    }
                }
                NodeKind::Introduce(v) => {
                    if n.children.len() != 1 {
                        return bad(id, "introduce node needs one child".into());
                    }
                    let mut expected = child_bag(0).clone();
                    if expected.contains(&v) {
                        return bad(id, format!("introduced {v} already in child bag"));
                    }
                    expected.push(v);
                    expected.sort_unstable();
                    if expected != n.bag {
                        return bad(id, "bag is not child bag plus introduced variable".into());
                    }
                }
                NodeKind::Remove(v) => {
                    if n.children.len() != 1 {
                        return bad(id, "remove node needs one child".into());
                    }
                    if !child_bag(0).contains(&v) {
                        return bad(id, format!("removed {v} not in child bag"));
                    }
                    let expected: Vec<Var> =
                        child_bag(0).iter().copied().filter(|&u| u != v).collect();
                    if expected != n.bag {
                        return bad(id, "bag is not child bag minus removed variable".into());
                    }
                }
                NodeKind::Join => {
                    if n.children.len() != 2 {
                        return bad(id, "join node needs two children".into());
                    }
                    if child_bag(0) != &n.bag || child_bag(1) != &n.bag {
                        return bad(id, "join children must share the join bag".into());
                    }
                }
            }
        }
        let root = self.nodes.len() - 1;
        if let Some(orphan) = has_parent[..root].iter().position(|p| !p) {
            return bad(orphan, "node is not connected to the root".into());
        }
        if !self.nodes[root].bag.is_empty() {
            return bad(root, "root bag must be empty".into());
        }
        Ok(())
    }
}

/// Converts a decomposition into a nice one of the same width.
///
/// Between a child bag and its parent bag, variables are first removed in
/// descending id order, then introduced in ascending id order. Nodes with
/// several children become left-leaning chains of binary joins. A bag equal
/// to its only child's bag is merged into the child, so an input that is
/// already nice maps onto itself.
pub fn make_nice(td: &TreeDecomposition) -> Result<NiceTreeDecomposition, DecompositionError> {
    let children = td.rooted_children()?;
    let bags = td.bags();

    let mut order = Vec::with_capacity(bags.len());
    let mut stack = vec![(0usize, false)];
    while let Some((x, expanded)) = stack.pop() {
        if expanded {
            order.push(x);
        } else {
            stack.push((x, true));
            for &c in children[x].iter().rev() {
                stack.push((c, false));
            }
        }
    }

    let mut builder = Builder::default();
    let mut top: Vec<NodeId> = vec![usize::MAX; bags.len()];
    for &x in &order {
        let bag = &bags[x];
        let mut tops: Vec<NodeId> = children[x]
            .iter()
            .map(|&c| builder.chain(top[c], bag))
            .collect();
        if tops.is_empty() {
            let leaf = builder.push(NodeKind::Leaf, Vec::new(), Vec::new());
            tops.push(builder.chain(leaf, bag));
        }
        let mut acc = tops[0];
        for &other in &tops[1..] {
            acc = builder.push(NodeKind::Join, bag.clone(), vec![acc, other]);
        }
        top[x] = acc;
    }
    let root = builder.chain(top[0], &[]);
    Ok(builder.finish(root))
}

#[derive(Default)]
struct Builder {
    nodes: Vec<NiceNode>,
}

impl Builder {
    fn push(&mut self, kind: NodeKind, bag: Vec<Var>, children: Vec<NodeId>) -> NodeId {
        self.nodes.push(NiceNode {
            kind,
            bag,
            children,
        });
        self.nodes.len() - 1
    }

    fn chain(&mut self, from: NodeId, target: &[Var]) -> NodeId {
        let mut at = from;
        let mut bag = self.nodes[from].bag.clone();
        let removed: Vec<Var> = bag
            .iter()
            .rev()
            .copied()
            .filter(|v| !target.contains(v))
            .collect();
        for v in removed {
            bag.retain(|&u| u != v);
            at = self.push(NodeKind::Remove(v), bag.clone(), vec![at]);
        }
        let introduced: Vec<Var> = target
            .iter()
            .copied()
            .filter(|v| !bag.contains(v))
            .collect();
        for v in introduced {
            bag.push(v);
            bag.sort_unstable();
            at = self.push(NodeKind::Introduce(v), bag.clone(), vec![at]);
        }
        at
    }

    /// Renumbers nodes in post-order from `root`.
    fn finish(self, root: NodeId) -> NiceTreeDecomposition {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(root, false)];
        while let Some((x, expanded)) = stack.pop() {
            if expanded {
                order.push(x);
            } else {
                stack.push((x, true));
                for &c in self.nodes[x].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        let mut new_id = vec![usize::MAX; self.nodes.len()];
        for (i, &old) in order.iter().enumerate() {
            new_id[old] = i;
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let n = &self.nodes[old];
                NiceNode {
                    kind: n.kind,
                    bag: n.bag.clone(),
                    children: n.children.iter().map(|&c| new_id[c]).collect(),
                }
            })
            .collect();
        NiceTreeDecomposition { nodes }
    }
}
