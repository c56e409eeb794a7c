//! Plain directed-graph helpers over adjacency lists indexed by state.

/// Strongly connected components of the subgraph induced by `active`,
/// in reverse topological order (every component is listed before any
/// component that can reach it). Members of each component are sorted.
pub fn scc(adj: &[Vec<usize>], active: &[bool]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    // (node, position in its adjacency list)
    let mut work: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if !active[root] || index[root] != UNSEEN {
            continue;
        }
        work.push((root, 0));
        while let Some(&(v, pos)) = work.last() {
            if pos == 0 && index[v] == UNSEEN {
                index[v] = next;
                low[v] = next;
                next += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(pos) {
                work.last_mut().expect("nonempty").1 += 1;
                if !active[w] {
                    continue;
                }
                if index[w] == UNSEEN {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

/// Nodes from which some node in `targets` is reachable (targets included).
pub fn can_reach(adj: &[Vec<usize>], targets: &[bool]) -> Vec<bool> {
    let n = adj.len();
    let mut rev = vec![Vec::new(); n];
    for (u, succ) in adj.iter().enumerate() {
        for &v in succ {
            rev[v].push(u);
        }
    }
    let mut seen = targets.to_vec();
    let mut queue: Vec<usize> = (0..n).filter(|&v| seen[v]).collect();
    while let Some(v) = queue.pop() {
        for &u in &rev[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push(u);
            }
        }
    }
    seen
}

/// Nodes reachable from `sources` (sources included).
pub fn reachable_from(adj: &[Vec<usize>], sources: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = Vec::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push(s);
        }
    }
    while let Some(v) = queue.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push(w);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_with_tail() {
        // t -> a -> b -> a
        let adj = vec![vec![1], vec![2], vec![1]];
        let comps = scc(&adj, &[true; 3]);
        assert_eq!(comps, vec![vec![1, 2], vec![0]]);
    }

    #[test]
    fn inactive_nodes_break_cycles() {
        let adj = vec![vec![1], vec![2], vec![0]];
        let comps = scc(&adj, &[true, false, true]);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn deep_path_does_not_overflow() {
        let n = 200_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1) % n]).collect();
        let comps = scc(&adj, &vec![true; n]);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].len(), n);
    }

    #[test]
    fn backward_and_forward_reach() {
        let adj = vec![vec![1], vec![1], vec![0]];
        assert_eq!(can_reach(&adj, &[false, true, false]), vec![true, true, true]);
        assert_eq!(reachable_from(&adj, &[0]), vec![true, true, false]);
    }
}
