//! Planarity testing by incremental face embedding, with a minimal
//! non-planar witness on refusal.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Outcome of a planarity test.
#[derive(Clone, Debug)]
pub enum PlanarityVerdict {
    /// Face boundary cycles of one embedding, per biconnected block.
    Planar { faces: Vec<Vec<Vec<usize>>> },
    /// Edges of a minimal non-planar subgraph (a subdivision of one of the
    /// two forbidden graphs).
    NonPlanar { witness: Vec<(usize, usize)> },
}

impl PlanarityVerdict {
    pub fn is_planar(&self) -> bool {
        matches!(self, PlanarityVerdict::Planar { .. })
    }
}

pub fn is_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    planar_only(n, edges)
}

/// Full verdict with an embedding or a minimal non-planar witness.
pub fn check_planarity(n: usize, edges: &[(usize, usize)]) -> PlanarityVerdict {
    if planar_only(n, edges) {
        let faces = blocks(n, edges)
            .into_iter()
            .filter(|b| b.len() > 1)
            .map(|b| embed_block(&b).expect("block of a planar graph embeds"))
            .collect();
        return PlanarityVerdict::Planar { faces };
    }
    // Minimise: drop every edge whose removal keeps the graph non-planar.
    let mut kept: Vec<(usize, usize)> = edges.to_vec();
    let mut i = 0;
    while i < kept.len() {
        let mut trial = kept.clone();
        trial.remove(i);
        if !planar_only(n, &trial) {
            kept = trial;
        } else {
            i += 1;
        }
    }
    PlanarityVerdict::NonPlanar { witness: kept }
}

fn planar_only(n: usize, edges: &[(usize, usize)]) -> bool {
    // Simple graph assumed; self-loops and duplicates are rejected upstream.
    for block in blocks(n, edges) {
        if block.len() > 1 && embed_block(&block).is_none() {
            return false;
        }
    }
    true
}

/// Biconnected components as edge lists (bridges come out as single edges).
fn blocks(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (to, edge idx)
    for (i, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, i));
        adj[v].push((u, i));
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0usize;
    let mut stack: Vec<usize> = Vec::new(); // edge indices
    let mut out = Vec::new();

    // Iterative DFS.
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (u, parent_edge, ref mut next)) = call.last_mut() {
            if *next < adj[u].len() {
                let (v, ei) = adj[u][*next];
                *next += 1;
                if Some(ei) == parent_edge {
                    continue;
                }
                if disc[v] == usize::MAX {
                    stack.push(ei);
                    disc[v] = time;
                    low[v] = time;
                    time += 1;
                    call.push((v, Some(ei), 0));
                } else if disc[v] < disc[u] {
                    stack.push(ei);
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                call.pop();
                if let Some(&mut (p, _, _)) = call.last_mut() {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        // u's subtree plus the edge to p forms a block.
                        let mut block = Vec::new();
                        while let Some(&ei) = stack.last() {
                            let (a, b) = edges[ei];
                            let top_in_subtree = disc[a].max(disc[b]) >= disc[u];
                            if top_in_subtree {
                                stack.pop();
                                block.push(edges[ei]);
                            } else {
                                break;
                            }
                        }
                        if !block.is_empty() {
                            out.push(block);
                        }
                    }
                }
            }
        }
    }
    if !stack.is_empty() {
        out.push(stack.drain(..).map(|ei| edges[ei]).collect());
    }
    out
}

/// Incremental face embedding of one biconnected block. Returns the face
/// cycles or `None` when some bridge has no admissible face.
fn embed_block(edges: &[(usize, usize)]) -> Option<Vec<Vec<usize>>> {
    let verts: BTreeSet<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let v = verts.len();
    let e = edges.len();
    if e <= 3 {
        // A triangle or smaller is trivially planar.
        let cycle: Vec<usize> = verts.iter().copied().collect();
        return Some(vec![cycle.clone(), cycle]);
    }
    if e > 3 * v - 6 {
        return None;
    }
    let adj: BTreeMap<usize, Vec<usize>> = {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(u, w) in edges {
            m.entry(u).or_default().push(w);
            m.entry(w).or_default().push(u);
        }
        m
    };

    // Start from any cycle (exists: the block is 2-connected with e >= 4).
    let start_cycle = find_cycle(&adj)?;
    let mut embedded_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let norm = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    for i in 0..start_cycle.len() {
        embedded_edges.insert(norm(start_cycle[i], start_cycle[(i + 1) % start_cycle.len()]));
    }
    let mut embedded_verts: BTreeSet<usize> = start_cycle.iter().copied().collect();
    let mut faces: Vec<Vec<usize>> = vec![start_cycle.clone(), start_cycle];

    loop {
        if embedded_edges.len() == e {
            return Some(faces);
        }
        // Bridges of the remaining graph relative to the embedded part.
        let bridges = find_bridges(edges, &embedded_edges, &embedded_verts);
        debug_assert!(!bridges.is_empty());
        // Admissible faces per bridge.
        let mut chosen: Option<(usize, Vec<usize>)> = None; // (bridge idx, faces)
        for (bi, bridge) in bridges.iter().enumerate() {
            let admissible: Vec<usize> = faces
                .iter()
                .enumerate()
                .filter(|(_, f)| {
                    let fv: BTreeSet<usize> = f.iter().copied().collect();
                    bridge.attachments.iter().all(|a| fv.contains(a))
                })
                .map(|(i, _)| i)
                .collect();
            if admissible.is_empty() {
                return None;
            }
            if admissible.len() == 1 {
                chosen = Some((bi, admissible));
                break;
            }
            if chosen.is_none() {
                chosen = Some((bi, admissible));
            }
        }
        let (bi, admissible) = chosen.expect("at least one bridge");
        let bridge = &bridges[bi];
        let face_idx = admissible[0];
        // A path through the bridge between two attachment points.
        let path = bridge_path(bridge, &embedded_verts);
        // Embed the path: split the face.
        let face = faces.swap_remove(face_idx);
        let (f1, f2) = split_face(&face, &path);
        faces.push(f1);
        faces.push(f2);
        for w in path.windows(2) {
            embedded_edges.insert(norm(w[0], w[1]));
        }
        for &p in &path {
            embedded_verts.insert(p);
        }
    }
}

fn find_cycle(adj: &BTreeMap<usize, Vec<usize>>) -> Option<Vec<usize>> {
    // Depth-first walk with an explicit path; the first back edge to a vertex
    // on the path closes a cycle.
    let start = *adj.keys().next()?;
    let mut path = vec![start];
    let mut iters = vec![0usize];
    let mut on_path: BTreeSet<usize> = [start].into_iter().collect();
    let mut visited = on_path.clone();
    while let Some(&u) = path.last() {
        let i = iters.last_mut().unwrap();
        let neighbors = &adj[&u];
        if *i < neighbors.len() {
            let w = neighbors[*i];
            *i += 1;
            if path.len() >= 2 && path[path.len() - 2] == w {
                continue;
            }
            if on_path.contains(&w) {
                let pos = path.iter().position(|&x| x == w).unwrap();
                return Some(path[pos..].to_vec());
            }
            if visited.insert(w) {
                on_path.insert(w);
                path.push(w);
                iters.push(0);
            }
        } else {
            on_path.remove(&u);
            path.pop();
            iters.pop();
        }
    }
    None
}

struct Bridge {
    /// Edges of the bridge.
    edges: Vec<(usize, usize)>,
    attachments: Vec<usize>,
}

fn find_bridges(
    all_edges: &[(usize, usize)],
    embedded_edges: &BTreeSet<(usize, usize)>,
    embedded_verts: &BTreeSet<usize>,
) -> Vec<Bridge> {
    let norm = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let remaining: Vec<(usize, usize)> = all_edges
        .iter()
        .copied()
        .filter(|&(u, v)| !embedded_edges.contains(&norm(u, v)))
        .collect();
    // Union-find over remaining edges; two edges join when they share a
    // non-embedded vertex.
    let mut comp_of_vertex: BTreeMap<usize, usize> = BTreeMap::new();
    let mut parent: Vec<usize> = (0..remaining.len()).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        if p[i] != i {
            let r = find(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    for (i, &(u, v)) in remaining.iter().enumerate() {
        for x in [u, v] {
            if embedded_verts.contains(&x) {
                continue;
            }
            match comp_of_vertex.get(&x) {
                None => {
                    comp_of_vertex.insert(x, i);
                }
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Bridge> = BTreeMap::new();
    for (i, &(u, v)) in remaining.iter().enumerate() {
        let root = find(&mut parent, i);
        let b = groups.entry(root).or_insert_with(|| Bridge { edges: Vec::new(), attachments: Vec::new() });
        b.edges.push((u, v));
        for x in [u, v] {
            if embedded_verts.contains(&x) && !b.attachments.contains(&x) {
                b.attachments.push(x);
            }
        }
    }
    groups.into_values().collect()
}

/// Path through the bridge between two attachment vertices (or a single
/// attachment reached twice is impossible inside a block).
fn bridge_path(bridge: &Bridge, embedded_verts: &BTreeSet<usize>) -> Vec<usize> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, v) in &bridge.edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let from = bridge.attachments[0];
    let to = bridge.attachments[1];
    let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
    let mut q = VecDeque::new();
    q.push_back(from);
    let mut seen = BTreeSet::new();
    seen.insert(from);
    while let Some(u) = q.pop_front() {
        if u == to {
            break;
        }
        for &w in adj.get(&u).into_iter().flatten() {
            // Never walk through a third embedded vertex.
            if seen.contains(&w) || (embedded_verts.contains(&w) && w != to) {
                continue;
            }
            seen.insert(w);
            prev.insert(w, u);
            q.push_back(w);
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[&cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// Split a face cycle by a path whose endpoints lie on the cycle.
fn split_face(face: &[usize], path: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let a = path[0];
    let b = *path.last().unwrap();
    let ia = face.iter().position(|&x| x == a).unwrap();
    let ib = face.iter().position(|&x| x == b).unwrap();
    let n = face.len();
    // Arc from a to b walking forward.
    let mut arc1 = Vec::new();
    let mut i = ia;
    while i != ib {
        arc1.push(face[i]);
        i = (i + 1) % n;
    }
    arc1.push(face[ib]);
    // Arc from b to a walking forward.
    let mut arc2 = Vec::new();
    let mut i = ib;
    while i != ia {
        arc2.push(face[i]);
        i = (i + 1) % n;
    }
    arc2.push(face[ia]);
    // Face 1: arc1 + reversed interior of the path (b -> a).
    let mut f1 = arc1;
    for &p in path.iter().rev().skip(1).take(path.len().saturating_sub(2)) {
        f1.push(p);
    }
    let mut f2 = arc2;
    for &p in path.iter().skip(1).take(path.len().saturating_sub(2)) {
        f2.push(p);
    }
    (f1, f2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                e.push((i, j));
            }
        }
        e
    }

    fn complete_bipartite(a: usize, b: usize) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for i in 0..a {
            for j in 0..b {
                e.push((i, a + j));
            }
        }
        e
    }

    #[test]
    fn small_graphs() {
        assert!(is_planar(4, &complete(4)));
        assert!(!is_planar(5, &complete(5)));
        assert!(!is_planar(6, &complete_bipartite(3, 3)));
        assert!(is_planar(6, &complete_bipartite(2, 4)));
    }

    #[test]
    fn grids_and_wheels() {
        // 4x4 grid.
        let mut edges = Vec::new();
        for r in 0..4 {
            for c in 0..4 {
                let i = r * 4 + c;
                if c + 1 < 4 {
                    edges.push((i, i + 1));
                }
                if r + 1 < 4 {
                    edges.push((i, i + 4));
                }
            }
        }
        assert!(is_planar(16, &edges));
        // Wheel on 8 spokes.
        let mut wheel = Vec::new();
        for i in 0..8 {
            wheel.push((i, (i + 1) % 8));
            wheel.push((i, 8));
        }
        assert!(is_planar(9, &wheel));
    }

    #[test]
    fn petersen_graph_is_not_planar() {
        let outer: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let spokes: Vec<(usize, usize)> = (0..5).map(|i| (i, i + 5)).collect();
        let inner: Vec<(usize, usize)> = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5)).collect();
        let edges: Vec<(usize, usize)> = outer.into_iter().chain(spokes).chain(inner).collect();
        let verdict = check_planarity(10, &edges);
        let PlanarityVerdict::NonPlanar { witness } = verdict else {
            panic!("the Petersen graph embedded");
        };
        // The witness is itself non-planar and minimal.
        assert!(!is_planar(10, &witness));
        for i in 0..witness.len() {
            let mut t = witness.clone();
            t.remove(i);
            assert!(is_planar(10, &t));
        }
        // A minimal non-planar graph is a subdivision: degrees are 3 or 4 at
        // branch vertices and 2 along paths.
        let mut deg = vec![0usize; 10];
        for &(u, v) in &witness {
            deg[u] += 1;
            deg[v] += 1;
        }
        assert!(deg.iter().all(|&d| d == 0 || d == 2 || d == 3 || d == 4));
    }

    #[test]
    fn disconnected_and_trees() {
        assert!(is_planar(7, &[(0, 1), (1, 2), (3, 4)]));
        assert!(is_planar(3, &[]));
        // Two K4 blocks sharing a cut vertex.
        let mut e = complete(4);
        e.extend_from_slice(&[(3, 4), (3, 5), (4, 5), (4, 6), (5, 6), (3, 6)]);
        assert!(is_planar(7, &e));
        // K5 hidden behind a cut vertex.
        let mut e2: Vec<(usize, usize)> = complete(5).iter().map(|&(u, v)| (u + 3, v + 3)).collect();
        e2.push((0, 1));
        e2.push((1, 3));
        assert!(!is_planar(8, &e2));
    }

    #[test]
    fn embedding_face_count_obeys_euler() {
        let edges = complete(4);
        let PlanarityVerdict::Planar { faces } = check_planarity(4, &edges) else {
            panic!()
        };
        // One block: F = E - V + 2 = 6 - 4 + 2 = 4.
        assert_eq!(faces[0].len(), 4);
    }
}
