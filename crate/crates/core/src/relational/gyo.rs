//! GYO ear removal and join trees.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::QuerySpec;
use crate::Error;

/// A rooted tree over the atoms (or bags) of an acyclic query.  Children
/// are kept in ascending index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
}

impl JoinTree {
    /// Runs GYO over the hyperedges `sets` and roots the result at node 0.
    /// Returns `None` when the hypergraph is cyclic.
    pub fn from_var_sets(sets: &[Vec<usize>]) -> Option<Self> {
        let links = gyo(sets)?;
        Some(Self::from_links(sets.len(), &links, 0))
    }

    fn from_links(n: usize, links: &[(usize, usize)], root: usize) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in links {
            adj[a].push(b);
            adj[b].push(a);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        if n > 0 {
            seen[root] = true;
            queue.push_back(root);
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    children[u].push(v);
                    queue.push_back(v);
                }
            }
        }
        Self { root, parent, children }
    }

    /// The same tree rooted at `root`.
    pub fn rerooted(&self, root: usize) -> Self {
        let links: Vec<(usize, usize)> =
            self.parent.iter().enumerate().filter_map(|(c, p)| p.map(|p| (p, c))).collect();
        Self::from_links(self.len(), &links, root)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Nodes with every parent before its children.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &c in self.children[u].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// True when, for every variable, the nodes containing it form a
    /// connected subtree.
    pub fn is_coherent(&self, sets: &[Vec<usize>]) -> bool {
        let vars: Vec<usize> = {
            let mut v: Vec<usize> = sets.iter().flatten().copied().collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        for x in vars {
            let holders = sets.iter().filter(|s| s.contains(&x)).count();
            // Nodes holding x whose parent does not hold x: exactly one
            // per connected piece.
            let tops = (0..self.len())
                .filter(|&u| sets[u].contains(&x))
                .filter(|&u| self.parent[u].is_none_or(|p| !sets[p].contains(&x)))
                .count();
            if holders > 0 && tops != 1 {
                return false;
            }
        }
        true
    }
}

/// GYO reduction.  Returns the (ear, witness) links, or `None` if the
/// hypergraph is cyclic.  The ear removed at each step is the highest
/// index eligible edge; its witness is the lowest index edge containing
/// all of the ear's shared vertices, or the nearest lower index edge when
/// it shares none, so cross products become paths.
fn gyo(sets: &[Vec<usize>]) -> Option<Vec<(usize, usize)>> {
    let n = sets.len();
    let mut alive = vec![true; n];
    let mut links = Vec::with_capacity(n.saturating_sub(1));
    let mut remaining = n;
    while remaining > 1 {
        let mut removed = false;
        for i in (0..n).rev().filter(|&i| alive[i]) {
            let shared: Vec<usize> = sets[i]
                .iter()
                .copied()
                .filter(|v| (0..n).any(|k| k != i && alive[k] && sets[k].contains(v)))
                .collect();
            let witness = if shared.is_empty() {
                (0..i).rev().chain(i + 1..n).find(|&j| alive[j])
            } else {
                (0..n).find(|&j| j != i && alive[j] && shared.iter().all(|v| sets[j].contains(v)))
            };
            if let Some(j) = witness {
                links.push((i, j));
                alive[i] = false;
                remaining -= 1;
                removed = true;
                break;
            }
        }
        if !removed {
            return None;
        }
    }
    Some(links)
}

pub fn is_acyclic(sets: &[Vec<usize>]) -> bool {
    gyo(sets).is_some()
}

/// Join tree of an acyclic query, rooted at atom 0.
pub fn build_join_tree(q: &QuerySpec) -> Result<JoinTree, Error> {
    JoinTree::from_var_sets(&q.var_sets()).ok_or(Error::Cyclic)
}

/// An acyclic query is free-connex when adding its free variables as one
/// more hyperedge keeps it acyclic.  Full queries are trivially so.
pub fn is_free_connex(q: &QuerySpec) -> bool {
    let mut sets = q.var_sets();
    if !is_acyclic(&sets) {
        return false;
    }
    match q.free() {
        None => true,
        Some(free) => {
            sets.push(free.to_vec());
            is_acyclic(&sets)
        }
    }
}
