//! Hopcroft-Karp maximum bipartite matching.

const NIL: usize = usize::MAX;

/// Maximum matching of a bipartite graph given as left-to-right adjacency.
///
/// `seed` is an initial (valid) matching as `(left, right)` pairs that the
/// algorithm extends. Returns the partner of every left vertex.
pub fn hopcroft_karp(
    n_right: usize,
    adj: &[Vec<usize>],
    seed: &[(usize, usize)],
) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut match_l = vec![NIL; n_left];
    let mut match_r = vec![NIL; n_right];
    for &(l, r) in seed {
        debug_assert!(match_l[l] == NIL && match_r[r] == NIL);
        match_l[l] = r;
        match_r[r] = l;
    }
    let mut dist = vec![0usize; n_left];
    let mut queue = Vec::with_capacity(n_left);
    loop {
        // BFS layering from free left vertices.
        queue.clear();
        for l in 0..n_left {
            if match_l[l] == NIL {
                dist[l] = 0;
                queue.push(l);
            } else {
                dist[l] = NIL;
            }
        }
        let mut found = false;
        let mut head = 0;
        while head < queue.len() {
            let l = queue[head];
            head += 1;
            for &r in &adj[l] {
                let m = match_r[r];
                if m == NIL {
                    found = true;
                } else if dist[m] == NIL {
                    dist[m] = dist[l] + 1;
                    queue.push(m);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; n_left];
        for l in 0..n_left {
            if match_l[l] == NIL {
                augment(l, adj, &mut match_l, &mut match_r, &mut dist, &mut it);
            }
        }
    }
    match_l
        .into_iter()
        .map(|r| (r != NIL).then_some(r))
        .collect()
}

/// Iterative layered DFS; flips the augmenting path if one is found.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    let mut stack = vec![root];
    while let Some(&l) = stack.last() {
        if it[l] >= adj[l].len() {
            dist[l] = NIL;
            stack.pop();
            continue;
        }
        let r = adj[l][it[l]];
        let m = match_r[r];
        if m == NIL {
            // Flip along the stack: each stacked vertex takes its current edge.
            for &u in stack.iter().rev() {
                let r = adj[u][it[u]];
                match_l[u] = r;
                match_r[r] = u;
            }
            return true;
        }
        if dist[m] != NIL && dist[m] == dist[l] + 1 {
            stack.push(m);
        } else {
            it[l] += 1;
        }
    }
    false
}
