//! Exhaustive enumeration of non-isomorphic (free) trees.
//!
//! Rooted trees are generated once each as canonical parenthesis codes:
//! a tree's code wraps the concatenation of its children's codes, with
//! children ordered by subtree size descending, then code bytes
//! descending.  Free trees are deduplicated by re-rooting at the centroid
//! (or at the centroid edge) and comparing the resulting codes, and each
//! surviving code is materialized into a concrete edge list, so output
//! labeling is a function of the canonical code alone.

use crate::graph::DiscreteGraph;
use std::collections::BTreeSet;

type Code = Vec<u8>;

/// Canonical child order: larger subtrees first, byte-wise descending
/// among equals.
fn canonical_order(a: &Code, b: &Code) -> std::cmp::Ordering {
    b.len().cmp(&a.len()).then_with(|| b.cmp(a))
}

/// All canonical codes of rooted trees with `n` vertices.
fn rooted_codes(n: usize, memo: &mut Vec<Vec<Code>>) -> Vec<Code> {
    while memo.len() <= n {
        let m = memo.len();
        if m == 0 {
            memo.push(vec![]);
            continue;
        }
        if m == 1 {
            memo.push(vec![b"()".to_vec()]);
            continue;
        }
        let mut out: Vec<Code> = Vec::new();
        let mut parts = Vec::new();
        collect_partitions(m - 1, m - 1, &mut parts, &mut |sizes| {
            let mut stacks: Vec<Vec<Code>> = vec![vec![]];
            // group equal sizes; within a group choose codes non-increasing
            let mut i = 0;
            while i < sizes.len() {
                let s = sizes[i];
                let mut count = 0;
                while i < sizes.len() && sizes[i] == s {
                    count += 1;
                    i += 1;
                }
                let mut pool = memo[s].clone();
                pool.sort_by(canonical_order);
                let mut next_stacks = Vec::new();
                for prefix in &stacks {
                    let mut pick = Vec::new();
                    multiset_choices(&pool, count, 0, &mut pick, &mut |chosen| {
                        let mut ext = prefix.clone();
                        ext.extend(chosen.iter().cloned());
                        next_stacks.push(ext);
                    });
                }
                stacks = next_stacks;
            }
            for children in stacks {
                let mut code = Vec::with_capacity(2 * m);
                code.push(b'(');
                for c in &children {
                    code.extend_from_slice(c);
                }
                code.push(b')');
                out.push(code);
            }
        });
        out.sort();
        out.dedup();
        memo.push(out);
    }
    memo[n].clone()
}

/// Partitions of `m` with parts at most `max`, parts non-increasing.
fn collect_partitions(m: usize, max: usize, acc: &mut Vec<usize>, emit: &mut impl FnMut(&[usize])) {
    if m == 0 {
        emit(acc);
        return;
    }
    for part in (1..=max.min(m)).rev() {
        acc.push(part);
        collect_partitions(m - part, part, acc, emit);
        acc.pop();
    }
}

/// Multisets of `count` codes from `pool` (sorted canonically), chosen with
/// non-decreasing pool index so the concatenation stays canonical.
fn multiset_choices(
    pool: &[Code],
    count: usize,
    from: usize,
    acc: &mut Vec<Code>,
    emit: &mut impl FnMut(&[Code]),
) {
    if count == 0 {
        emit(acc);
        return;
    }
    for i in from..pool.len() {
        acc.push(pool[i].clone());
        multiset_choices(pool, count - 1, i, acc, emit);
        acc.pop();
    }
}

/// Edge list of a parenthesis code; vertices numbered in preorder, root 0.
fn code_to_edges(code: &[u8]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut next = 0;
    for &ch in code {
        if ch == b'(' {
            if let Some(&p) = stack.last() {
                edges.push((p, next));
            }
            stack.push(next);
            next += 1;
        } else {
            stack.pop();
        }
    }
    edges
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// Canonical code of the subtree rooted at `v` looking away from `parent`.
fn code_at(adj: &[Vec<usize>], v: usize, parent: usize) -> Code {
    let mut children: Vec<Code> = adj[v]
        .iter()
        .filter(|&&u| u != parent)
        .map(|&u| code_at(adj, u, v))
        .collect();
    children.sort_by(canonical_order);
    let mut code = vec![b'('];
    for c in &children {
        code.extend_from_slice(c);
    }
    code.push(b')');
    code
}

/// Centroid vertices: minimizers of the largest remaining component after
/// vertex removal.  Trees have one centroid or two adjacent ones.
fn centroids(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    fn subtree_size(adj: &[Vec<usize>], v: usize, parent: usize) -> usize {
        1 + adj[v].iter().filter(|&&u| u != parent).map(|&u| subtree_size(adj, u, v)).sum::<usize>()
    }
    let mut best = usize::MAX;
    let mut who = Vec::new();
    for v in 0..n {
        let worst = adj[v].iter().map(|&u| subtree_size(adj, u, v)).max().unwrap_or(0);
        if worst < best {
            best = worst;
            who = vec![v];
        } else if worst == best {
            who.push(v);
        }
    }
    who
}

/// Free-tree canonical code: rooted code at the centroid, or for a centroid
/// pair the tagged concatenation of the two half codes in canonical order.
fn free_code(n: usize, edges: &[(usize, usize)]) -> Code {
    let adj = adjacency(n, edges);
    let c = centroids(n, &adj);
    match c[..] {
        [v] => {
            let mut code = vec![b'1'];
            code.extend(code_at(&adj, v, usize::MAX));
            code
        }
        [a, b] => {
            let mut ca = code_at(&adj, a, b);
            let mut cb = code_at(&adj, b, a);
            if canonical_order(&ca, &cb) == std::cmp::Ordering::Greater {
                std::mem::swap(&mut ca, &mut cb);
            }
            let mut code = vec![b'2'];
            code.extend(ca);
            code.extend(cb);
            code
        }
        _ => unreachable!("a tree has one or two centroids"),
    }
}

/// Graph for a free canonical code.
fn free_code_to_graph(code: &[u8]) -> DiscreteGraph {
    match code[0] {
        b'1' => {
            let edges = code_to_edges(&code[1..]);
            DiscreteGraph::new(edges.len() + 1, &edges).expect("valid tree code")
        }
        b'2' => {
            // two halves of equal vertex count; shift the second and join
            let body = &code[1..];
            let half = body.len() / 2;
            let mut edges = code_to_edges(&body[..half]);
            let shift = half / 2;
            for &(a, b) in &code_to_edges(&body[half..]) {
                edges.push((a + shift, b + shift));
            }
            edges.push((0, shift));
            DiscreteGraph::new(2 * shift, &edges).expect("valid tree code")
        }
        _ => unreachable!("tagged code"),
    }
}

/// All non-isomorphic trees on `n` vertices, in canonical code order.
pub fn nonisomorphic_trees(n: usize) -> Vec<DiscreteGraph> {
    if n == 0 {
        return vec![];
    }
    let mut memo = Vec::new();
    let rooted = rooted_codes(n, &mut memo);
    let mut seen: BTreeSet<Code> = BTreeSet::new();
    for code in &rooted {
        let edges = code_to_edges(code);
        seen.insert(free_code(n, &edges));
    }
    seen.iter().map(|c| free_code_to_graph(c)).collect()
}

#[cfg(test)]
pub fn rooted_tree_count(n: usize) -> usize {
    let mut memo = Vec::new();
    rooted_codes(n, &mut memo).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_isomorphic;

    #[test]
    fn rooted_counts() {
        // 1, 1, 2, 4, 9, 20, 48, 115, 286, 719, 1842
        let want = [0, 1, 1, 2, 4, 9, 20, 48, 115, 286, 719, 1842];
        for n in 1..=11 {
            assert_eq!(rooted_tree_count(n), want[n], "rooted trees on {n} vertices");
        }
    }

    #[test]
    fn free_counts() {
        let want = [0, 1, 1, 1, 2, 3, 6, 11, 23, 47, 106, 235];
        for n in 1..=11 {
            assert_eq!(nonisomorphic_trees(n).len(), want[n], "free trees on {n} vertices");
        }
    }

    #[test]
    fn outputs_are_trees_and_pairwise_nonisomorphic() {
        for n in 2..=8 {
            let ts = nonisomorphic_trees(n);
            for t in &ts {
                assert_eq!(t.vertex_count(), n);
                assert!(t.is_tree());
            }
            for i in 0..ts.len() {
                for j in (i + 1)..ts.len() {
                    assert!(!is_isomorphic(&ts[i], &ts[j]).unwrap());
                }
            }
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let a = nonisomorphic_trees(9);
        let b = nonisomorphic_trees(9);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.edges(), y.edges());
        }
    }
}
