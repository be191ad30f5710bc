//! Independent reference implementations used by the integration suites.
//! Nothing here calls into the crate's modularity or gain code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

pub type Edge = (usize, usize, f64);

/// Modularity evaluated directly from an edge list. Self-loops count `2w`
/// towards both the internal weight and the degree.
pub fn oracle_modularity(n: usize, edges: &[Edge], labels: &[usize]) -> f64 {
    let m: f64 = edges.iter().map(|e| e.2).sum();
    let mut deg = vec![0.0; n];
    let mut internal = 0.0;
    for &(u, v, w) in edges {
        deg[u] += w;
        deg[v] += w;
        if labels[u] == labels[v] {
            internal += 2.0 * w;
        }
    }
    let mut a: BTreeMap<usize, f64> = BTreeMap::new();
    for (v, &d) in deg.iter().enumerate() {
        *a.entry(labels[v]).or_default() += d;
    }
    let squares: f64 = a.values().map(|x| x * x).sum();
    (internal - squares / (2.0 * m)) / (2.0 * m)
}

/// `4 m^2 Q` for integer weights, computed exactly.
pub fn oracle_scaled(n: usize, edges: &[(usize, usize, i64)], labels: &[usize]) -> i128 {
    let m: i128 = edges.iter().map(|e| e.2 as i128).sum();
    let mut deg = vec![0i128; n];
    let mut internal = 0i128;
    for &(u, v, w) in edges {
        deg[u] += w as i128;
        deg[v] += w as i128;
        if labels[u] == labels[v] {
            internal += 2 * w as i128;
        }
    }
    let mut a: BTreeMap<usize, i128> = BTreeMap::new();
    for (v, &d) in deg.iter().enumerate() {
        *a.entry(labels[v]).or_default() += d;
    }
    let squares: i128 = a.values().map(|x| x * x).sum();
    2 * m * internal - squares
}

/// Erdos-Renyi style edge list without self-loops.
pub fn random_edges<R: Rng>(
    rng: &mut R,
    n: usize,
    p: f64,
    mut weight: impl FnMut(&mut R) -> f64,
) -> Vec<Edge> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                let w = weight(rng);
                edges.push((u, v, w));
            }
        }
    }
    edges
}

/// Weight uniformly in `(0, 2]`.
pub fn weight_0_2<R: Rng>(rng: &mut R) -> f64 {
    2.0 - rng.gen::<f64>() * 2.0
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            rec(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut prefix = vec![0];
    rec(&mut prefix, 0, n, &mut out);
    out
}

/// Direct transcription of the screening procedure, with every gain obtained
/// by recomputing modularity from scratch in exact integer arithmetic.
/// `batch` lists each new undirected edge once; `edges` is the graph after
/// the batch.
pub fn brute_force_screen(
    n: usize,
    edges: &[(usize, usize, i64)],
    labels: &[usize],
    batch: &[(usize, usize)],
) -> BTreeSet<usize> {
    let base = oracle_scaled(n, edges, labels);
    let dq = |v: usize, c: usize| -> i128 {
        if labels[v] == c {
            return 0;
        }
        let mut moved = labels.to_vec();
        moved[v] = c;
        oracle_scaled(n, edges, &moved) - base
    };
    let mut sinks: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(u, v) in batch {
        sinks.entry(u).or_default().insert(v);
        sinks.entry(v).or_default().insert(u);
    }
    let mut r = BTreeSet::new();
    for (&i, ts) in &sinks {
        // (gain, community, sink): max gain, then smaller community, then smaller sink
        let mut best: Option<(i128, usize, usize)> = None;
        for &j in ts {
            let c = labels[j];
            let g = dq(i, c);
            let better = match best {
                None => true,
                Some((bg, bc, bj)) => g > bg || (g == bg && (c < bc || (c == bc && j < bj))),
            };
            if better {
                best = Some((g, c, j));
            }
        }
        let (gain1, _, j_star) = best.unwrap();
        let gain2 = dq(j_star, labels[i]);
        if gain1 >= gain2 && gain1 > 0 {
            r.insert(i);
            r.insert(j_star);
            for &(u, v, _) in edges {
                if u == i {
                    r.insert(v);
                } else if v == i {
                    r.insert(u);
                }
            }
            for (v, &c) in labels.iter().enumerate() {
                if c == labels[j_star] {
                    r.insert(v);
                }
            }
        }
    }
    r
}

/// Two 4-cliques {0..3} and {4..7} joined by the edge {3, 4}.
pub fn two_cliques() -> Vec<Edge> {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for a in 0..4 {
            for b in a + 1..4 {
                edges.push((base + a, base + b, 1.0));
            }
        }
    }
    edges.push((3, 4, 1.0));
    edges
}

/// Four triangles in a ring, consecutive triangles joined by one edge.
pub fn ring_of_triangles() -> Vec<Edge> {
    let mut edges = Vec::new();
    for t in 0..4 {
        let b = 3 * t;
        edges.extend([(b, b + 1, 1.0), (b, b + 2, 1.0), (b + 1, b + 2, 1.0)]);
        let next = 3 * ((t + 1) % 4);
        let (u, v) = (b + 2, next);
        edges.push((u.min(v), u.max(v), 1.0));
    }
    edges
}
