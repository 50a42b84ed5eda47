//! Brute-force taxonomy oracles computed straight from a triple list.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use conceptspace_core::synth::{builder_from, Triple};
use conceptspace_core::taxonomy::{Predicate, Taxonomy};

pub const INF: u32 = u32::MAX / 4;

pub struct Raw {
    pub concepts: Vec<String>,
    pub parents: HashMap<String, Vec<String>>,
    pub types: HashMap<String, Vec<String>>,
}

pub fn raw(triples: &[Triple]) -> Raw {
    let mut concepts = BTreeSet::new();
    let mut parents: HashMap<String, Vec<String>> = HashMap::new();
    let mut types: HashMap<String, Vec<String>> = HashMap::new();
    for (s, p, o) in triples {
        match p {
            Predicate::SubclassOf => {
                concepts.insert(s.clone());
                concepts.insert(o.clone());
                parents.entry(s.clone()).or_default().push(o.clone());
            }
            Predicate::TypeOf => {
                concepts.insert(o.clone());
                types.entry(s.clone()).or_default().push(o.clone());
            }
        }
    }
    Raw { concepts: concepts.into_iter().collect(), parents, types }
}

/// Floyd–Warshall hop distances over the upward subclass edges.
pub fn floyd_warshall(r: &Raw) -> Vec<Vec<u32>> {
    let n = r.concepts.len();
    let idx: HashMap<&str, usize> = r.concepts.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let inf = INF;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (c, ps) in &r.parents {
        for p in ps {
            d[idx[c.as_str()]][idx[p.as_str()]] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Per-entity BFS upward through type then subclass edges.
pub fn entity_closure(r: &Raw, entity: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<String> = r.types[entity].iter().cloned().collect();
    while let Some(c) = queue.pop_front() {
        if seen.insert(c.clone()) {
            for p in r.parents.get(&c).into_iter().flatten() {
                queue.push_back(p.clone());
            }
        }
    }
    seen
}

/// Minimum Floyd–Warshall distance from `concept` to any ancestor containing
/// `entity`; `None` when the entity is a member of `concept`.
pub fn margin_oracle(r: &Raw, fw: &[Vec<u32>], concept: &str, entity: &str) -> Option<u32> {
    let ci = r.concepts.iter().position(|c| c == concept).unwrap();
    let closure = entity_closure(r, entity);
    if closure.contains(concept) {
        return None;
    }
    r.concepts
        .iter()
        .enumerate()
        .filter(|&(j, a)| fw[ci][j] < INF && closure.contains(a))
        .map(|(j, _)| fw[ci][j])
        .min()
}

pub fn taxonomy(triples: &[Triple]) -> Taxonomy {
    builder_from(triples).build().expect("generated taxonomy is valid")
}
