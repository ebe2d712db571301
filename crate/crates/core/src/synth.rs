//! Synthetic benchmark graphs with planted communities.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::rng::{stream, Domain, StreamRng};

/// LFR-style generator parameters: power-law degrees and community sizes,
/// with a `mixing` fraction of every node's edges leaving its community.
#[derive(Clone, Debug)]
pub struct LfrConfig {
    pub nodes: usize,
    pub avg_degree: f64,
    pub max_degree: usize,
    pub degree_exponent: f64,
    pub min_community: usize,
    pub max_community: usize,
    pub community_exponent: f64,
    pub mixing: f64,
    pub seed: u64,
}

impl Default for LfrConfig {
    fn default() -> Self {
        LfrConfig {
            nodes: 1000,
            avg_degree: 15.0,
            max_degree: 50,
            degree_exponent: 2.5,
            min_community: 20,
            max_community: 100,
            community_exponent: 1.5,
            mixing: 0.3,
            seed: 0,
        }
    }
}

/// Continuous power law `x^-exponent` on `[lo, hi]` by inverse transform.
fn power_law(rng: &mut StreamRng, exponent: f64, lo: f64, hi: f64) -> f64 {
    let e = 1.0 - exponent;
    let u: f64 = rng.random();
    (lo.powf(e) + u * (hi.powf(e) - lo.powf(e))).powf(1.0 / e)
}

fn power_law_mean(exponent: f64, lo: f64, hi: f64) -> f64 {
    let (a, b) = (1.0 - exponent, 2.0 - exponent);
    (a / b) * (hi.powf(b) - lo.powf(b)) / (hi.powf(a) - lo.powf(a))
}

/// Pairs shuffled stubs into edges, dropping self-loops, duplicates and
/// pairs rejected by `keep`.
fn pair_stubs(
    rng: &mut StreamRng,
    mut stubs: Vec<u32>,
    seen: &mut HashSet<(u32, u32)>,
    edges: &mut Vec<Edge>,
    keep: impl Fn(u32, u32) -> bool,
) {
    stubs.shuffle(rng);
    for pair in stubs.chunks_exact(2) {
        let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        if u != v && keep(u, v) && seen.insert((u, v)) {
            edges.push(Edge::unit(u as usize, v as usize));
        }
    }
}

/// Returns the graph and each node's planted community.
pub fn lfr_like(config: &LfrConfig) -> Result<(Graph, Vec<u32>)> {
    let n = config.nodes;
    if n < config.min_community || config.min_community < 2 {
        return Err(Error::config("community sizes do not fit the node count"));
    }
    if !(0.0..=1.0).contains(&config.mixing) {
        return Err(Error::config("mixing must lie in [0, 1]"));
    }
    let mut rng = stream(config.seed, Domain::Synth, 0, 0);

    // Lower degree cut-off matching the requested mean.
    let hi = config.max_degree as f64;
    let (mut lo_a, mut lo_b) = (1.0, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo_a + lo_b);
        if power_law_mean(config.degree_exponent, mid, hi) < config.avg_degree {
            lo_a = mid;
        } else {
            lo_b = mid;
        }
    }
    let degrees: Vec<usize> = (0..n)
        .map(|_| power_law(&mut rng, config.degree_exponent, lo_a, hi).round().max(1.0) as usize)
        .collect();

    let mut sizes = Vec::new();
    let mut covered = 0;
    while covered < n {
        let s = power_law(
            &mut rng,
            config.community_exponent,
            config.min_community as f64,
            config.max_community as f64,
        )
        .round() as usize;
        sizes.push(s);
        covered += s;
    }
    let excess = covered - n;
    let last = sizes.len() - 1;
    if sizes[last] - excess >= config.min_community || sizes.len() == 1 {
        sizes[last] -= excess;
    } else {
        let leftover = sizes.pop().expect("at least one community") - excess;
        let target = sizes.len() - 1;
        sizes[target] += leftover;
    }

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut rng);
    let mut community = vec![0u32; n];
    let mut members: Vec<Vec<u32>> = Vec::with_capacity(sizes.len());
    let mut next = 0;
    for (c, &s) in sizes.iter().enumerate() {
        let group: Vec<u32> = order[next..next + s].to_vec();
        for &u in &group {
            community[u as usize] = c as u32;
        }
        members.push(group);
        next += s;
    }

    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut external = Vec::new();
    for group in &members {
        let mut internal = Vec::new();
        for &u in group {
            let k = degrees[u as usize];
            let k_in = (((1.0 - config.mixing) * k as f64).round() as usize).min(group.len() - 1);
            internal.extend(std::iter::repeat_n(u, k_in));
            external.extend(std::iter::repeat_n(u, k - k_in));
        }
        pair_stubs(&mut rng, internal, &mut seen, &mut edges, |_, _| true);
    }
    pair_stubs(&mut rng, external, &mut seen, &mut edges, |u, v| {
        community[u as usize] != community[v as usize]
    });

    Ok((Graph::from_edges(n, false, edges)?, community))
}
