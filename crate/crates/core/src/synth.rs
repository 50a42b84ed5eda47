//! Seeded synthetic inputs: random taxonomies, block-model graphs and
//! clustered embeddings for end-to-end checks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::embedding::EmbeddingTable;
use crate::seed;
use crate::taxonomy::{Predicate, TaxonomyBuilder};

pub type Triple = (String, Predicate, String);

/// Random rooted DAG: concept `c{i}` (zero-padded) picks a parent among the
/// earlier concepts and, with probability `extra_parent`, a second one. Each
/// entity is typed under one or two random concepts.
pub fn random_taxonomy(concepts: usize, entities: usize, extra_parent: f64, seed: u64) -> Vec<Triple> {
    let mut rng = seed::stream(seed, 0);
    let cname = |i: usize| format!("c{i:04}");
    let mut out = Vec::new();
    for i in 1..concepts {
        let p = rng.random_range(0..i);
        out.push((cname(i), Predicate::SubclassOf, cname(p)));
        if i > 1 && rng.random_bool(extra_parent) {
            let q = rng.random_range(0..i);
            if q != p {
                out.push((cname(i), Predicate::SubclassOf, cname(q)));
            }
        }
    }
    for e in 0..entities {
        let types = if rng.random_bool(0.3) { 2 } else { 1 };
        for _ in 0..types {
            out.push((format!("e{e:04}"), Predicate::TypeOf, cname(rng.random_range(0..concepts))));
        }
    }
    out
}

pub fn builder_from(triples: &[Triple]) -> TaxonomyBuilder {
    let mut b = TaxonomyBuilder::new();
    for (s, p, o) in triples {
        b.add(s, *p, o);
    }
    b
}

/// Undirected edges plus each node's block.
pub type BlockGraph = (Vec<(String, String)>, Vec<(String, usize)>);

/// Undirected stochastic block model. Returns the edge list and, for each
/// node name, its block. Node `n{i}` belongs to block `blocks[i]`.
pub fn stochastic_block_model(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> BlockGraph {
    let mut rng = seed::stream(seed, 0);
    let nodes: Vec<(String, usize)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &n)| (0..n).map(move |_| b))
        .enumerate()
        .map(|(i, b)| (format!("n{i:04}"), b))
        .collect();
    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let p = if nodes[i].1 == nodes[j].1 { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((nodes[i].0.clone(), nodes[j].0.clone()));
            }
        }
    }
    (edges, nodes)
}

/// Every pair within each group is connected.
pub fn disjoint_cliques(groups: usize, size: usize) -> Vec<(String, String)> {
    let mut edges = Vec::new();
    for g in 0..groups {
        for i in 0..size {
            for j in i + 1..size {
                edges.push((format!("g{g}v{i}"), format!("g{g}v{j}")));
            }
        }
    }
    edges
}

/// `center + N(0, sigma²)` per component.
pub fn gaussian_point<R: Rng + ?Sized>(center: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    let noise = Normal::new(0.0, sigma).expect("non-negative sigma");
    center.iter().map(|c| c + noise.sample(rng)).collect()
}

/// `concepts` sibling concepts `s{i}` under `root`, each holding `per_concept`
/// entities `s{i}e{j:03}` drawn from `N(center_i, sigma²)` in `dim`
/// dimensions. Centers sit on scaled coordinate axes, pairwise `separation`
/// apart.
pub fn sibling_clusters(
    concepts: usize,
    per_concept: usize,
    dim: usize,
    separation: f64,
    sigma: f64,
    seed: u64,
) -> crate::Result<(Vec<Triple>, EmbeddingTable)> {
    if concepts > dim {
        return Err(crate::Error::InvalidParameter("more clusters than dimensions"));
    }
    let mut rng = seed::stream(seed, 1);
    let mut triples = Vec::new();
    let mut table = EmbeddingTable::new(dim);
    let scale = separation / libm::sqrt(2.0);
    for c in 0..concepts {
        let concept = format!("s{c}");
        triples.push((concept.clone(), Predicate::SubclassOf, String::from("root")));
        let mut center = alloc::vec![0.0; dim];
        center[c] = scale;
        for e in 0..per_concept {
            let name = format!("{concept}e{e:03}");
            table.insert(&name, &gaussian_point(&center, sigma, &mut rng))?;
            triples.push((name, Predicate::TypeOf, concept.clone()));
        }
    }
    Ok((triples, table))
}

/// Balanced tree of concepts below `root`, one level per entry of `spreads`,
/// with `branching` children each; concept names spell the path (`k0`,
/// `k0.1`, ...). A level-`l` concept's center is its parent's plus
/// `N(0, spreads[l-1]²)` noise; leaves hold `per_leaf` entities drawn around
/// their center with deviation `sigma`.
/// Returns the triples, the embeddings and the concepts of each level.
pub fn nested_clusters(
    branching: usize,
    spreads: &[f64],
    per_leaf: usize,
    dim: usize,
    sigma: f64,
    seed: u64,
) -> crate::Result<(Vec<Triple>, EmbeddingTable, Vec<Vec<String>>)> {
    let mut rng = seed::stream(seed, 2);
    let mut triples = Vec::new();
    let mut table = EmbeddingTable::new(dim);
    let mut levels: Vec<Vec<String>> = Vec::new();
    let mut frontier = alloc::vec![(String::from("root"), alloc::vec![0.0; dim])];
    for (level, &spread) in spreads.iter().enumerate() {
        let mut next = Vec::new();
        for (parent, center) in &frontier {
            for b in 0..branching {
                let name = if level == 0 { format!("k{b}") } else { format!("{parent}.{b}") };
                triples.push((name.clone(), Predicate::SubclassOf, parent.clone()));
                next.push((name, gaussian_point(center, spread, &mut rng)));
            }
        }
        levels.push(next.iter().map(|(n, _)| n.clone()).collect());
        frontier = next;
    }
    for (leaf, center) in &frontier {
        for e in 0..per_leaf {
            let name = format!("{leaf}/e{e:03}");
            table.insert(&name, &gaussian_point(center, sigma, &mut rng))?;
            triples.push((name, Predicate::TypeOf, leaf.clone()));
        }
    }
    Ok((triples, table, levels))
}
