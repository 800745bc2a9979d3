//! Fill-reducing symmetric orderings.
//!
//! Nested dissection by level structures: BFS from a pseudo-peripheral node,
//! the level holding the median vertex becomes the separator, both sides are
//! ordered recursively and the separator is numbered last. Very dense rows
//! (such as a global constraint) are taken out of the graph and numbered at
//! the very end.

use std::collections::VecDeque;

/// `perm[new] = old`.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n == 0 {
        return Vec::new();
    }
    let dense_limit = 16usize.max((10.0 * (n as f64).sqrt()) as usize);
    let dense: Vec<bool> = adj.iter().map(|a| a.len() > dense_limit).collect();

    let mut ws = Workspace {
        member: vec![0; n],
        seen: vec![0; n],
        level: vec![0; n],
        stamp: 0,
    };
    let mut perm = Vec::with_capacity(n);
    let nodes: Vec<usize> = (0..n).filter(|&v| !dense[v]).collect();
    dissect(adj, nodes, &mut ws, &mut perm);
    perm.extend((0..n).filter(|&v| dense[v]));
    debug_assert_eq!(perm.len(), n);
    perm
}

const LEAF_SIZE: usize = 64;

struct Workspace {
    /// `member[v] == s` while `v` belongs to the subgraph with stamp `s`.
    member: Vec<usize>,
    seen: Vec<usize>,
    level: Vec<usize>,
    stamp: usize,
}

impl Workspace {
    fn next_stamp(&mut self) -> usize {
        self.stamp += 1;
        self.stamp
    }

    /// BFS inside subgraph `s`; fills `level`, returns (depth, visit order).
    fn bfs(&mut self, adj: &[Vec<usize>], root: usize, s: usize) -> (usize, Vec<usize>) {
        let t = self.next_stamp();
        let mut q = VecDeque::from([root]);
        let mut order = vec![root];
        self.seen[root] = t;
        self.level[root] = 0;
        let mut depth = 0;
        while let Some(v) = q.pop_front() {
            for &w in &adj[v] {
                if self.member[w] == s && self.seen[w] != t {
                    self.seen[w] = t;
                    self.level[w] = self.level[v] + 1;
                    depth = depth.max(self.level[w]);
                    order.push(w);
                    q.push_back(w);
                }
            }
        }
        (depth, order)
    }
}

/// Orders the induced subgraph on `nodes` and appends it to `perm`.
fn dissect(adj: &[Vec<usize>], nodes: Vec<usize>, ws: &mut Workspace, perm: &mut Vec<usize>) {
    if nodes.len() <= LEAF_SIZE {
        perm.extend_from_slice(&nodes);
        return;
    }
    let s = ws.next_stamp();
    for &v in &nodes {
        ws.member[v] = s;
    }

    let (mut depth, comp) = ws.bfs(adj, nodes[0], s);
    if comp.len() < nodes.len() {
        // Split off the component of nodes[0]; the rest is handled separately.
        let t = ws.stamp;
        let rest: Vec<usize> = nodes.iter().copied().filter(|&v| ws.seen[v] != t).collect();
        dissect(adj, comp, ws, perm);
        dissect(adj, rest, ws, perm);
        return;
    }

    // Pseudo-peripheral root: restart from the farthest node while the
    // eccentricity grows.
    let mut root = nodes[0];
    for _ in 0..8 {
        let far = *comp
            .iter()
            .max_by_key(|&&v| (ws.level[v], std::cmp::Reverse(adj[v].len())))
            .expect("nonempty");
        let (d, _) = ws.bfs(adj, far, s);
        if d <= depth {
            break;
        }
        depth = d;
        root = far;
    }
    ws.bfs(adj, root, s);
    if depth < 2 {
        perm.extend_from_slice(&nodes);
        return;
    }
    let mut counts = vec![0usize; depth + 1];
    for &v in &nodes {
        counts[ws.level[v]] += 1;
    }
    let half = nodes.len() / 2;
    let mut acc = 0;
    let mut sep_level = 1;
    for (l, &c) in counts.iter().enumerate() {
        acc += c;
        if acc > half {
            sep_level = l.clamp(1, depth - 1);
            break;
        }
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut sep = Vec::new();
    for &v in &nodes {
        match ws.level[v].cmp(&sep_level) {
            std::cmp::Ordering::Less => left.push(v),
            std::cmp::Ordering::Greater => right.push(v),
            std::cmp::Ordering::Equal => sep.push(v),
        }
    }
    dissect(adj, left, ws, perm);
    dissect(adj, right, ws, perm);
    perm.extend_from_slice(&sep);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<Vec<usize>> {
        let id = |i: usize, j: usize| j * n + i;
        let mut adj = vec![Vec::new(); n * n];
        for j in 0..n {
            for i in 0..n {
                if i + 1 < n {
                    adj[id(i, j)].push(id(i + 1, j));
                    adj[id(i + 1, j)].push(id(i, j));
                }
                if j + 1 < n {
                    adj[id(i, j)].push(id(i, j + 1));
                    adj[id(i, j + 1)].push(id(i, j));
                }
            }
        }
        adj
    }

    #[test]
    fn permutation_is_complete() {
        let mut adj = grid(30);
        // One node connected to everything goes last.
        let hub = adj.len();
        adj.push((0..hub).collect());
        for v in 0..hub {
            adj[v].push(hub);
        }
        let p = nested_dissection(&adj);
        let mut s = p.clone();
        s.sort_unstable();
        assert_eq!(s, (0..=hub).collect::<Vec<_>>());
        assert_eq!(*p.last().unwrap(), hub);
    }

    #[test]
    fn disconnected_graph() {
        let mut adj = grid(10);
        let off = adj.len();
        for a in grid(10) {
            adj.push(a.into_iter().map(|v| v + off).collect());
        }
        let p = nested_dissection(&adj);
        assert_eq!(p.len(), 200);
    }
}
