//! Concept taxonomy over named entities.
//!
//! Entities attach to concepts through `typeOf` edges and concepts attach to
//! their parents through `subclassOf` edges. The concept graph is a DAG with a
//! single root; entities are always leaves. Identifiers are opaque strings and
//! are numbered in lexicographic order, so every query result that is sorted by
//! id is also sorted by name.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(u32);

impl ConceptId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Taxonomy hop count between a concept and the lowest ancestor that contains
/// a negative entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Margin(u32);

impl Margin {
    pub fn new(value: u32) -> Self {
        Margin(value)
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    /// entity → concept (`rdf:type`)
    TypeOf,
    /// concept → parent concept (`rdfs:subClassOf`)
    SubclassOf,
}

impl Predicate {
    pub fn as_str(self) -> &'static str {
        match self {
            Predicate::TypeOf => "typeOf",
            Predicate::SubclassOf => "subclassOf",
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Predicate {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "typeOf" => Ok(Predicate::TypeOf),
            "subclassOf" => Ok(Predicate::SubclassOf),
            _ => Err(()),
        }
    }
}

/// Collects triples; [`TaxonomyBuilder::build`] validates them.
#[derive(Debug, Default, Clone)]
pub struct TaxonomyBuilder {
    type_edges: BTreeSet<(String, String)>,
    subclass_edges: BTreeSet<(String, String)>,
}

impl TaxonomyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, subject: &str, predicate: Predicate, object: &str) -> &mut Self {
        let edge = (subject.to_string(), object.to_string());
        match predicate {
            Predicate::TypeOf => self.type_edges.insert(edge),
            Predicate::SubclassOf => self.subclass_edges.insert(edge),
        };
        self
    }

    pub fn type_of(&mut self, entity: &str, concept: &str) -> &mut Self {
        self.add(entity, Predicate::TypeOf, concept)
    }

    pub fn subclass_of(&mut self, concept: &str, parent: &str) -> &mut Self {
        self.add(concept, Predicate::SubclassOf, parent)
    }

    pub fn build(&self) -> Result<Taxonomy> {
        let entity_names: BTreeSet<&str> =
            self.type_edges.iter().map(|(s, _)| s.as_str()).collect();
        let mut concept_names: BTreeSet<&str> =
            self.type_edges.iter().map(|(_, o)| o.as_str()).collect();
        for (child, parent) in &self.subclass_edges {
            concept_names.insert(child);
            concept_names.insert(parent);
        }

        let has_children: BTreeSet<&str> = self
            .type_edges
            .iter()
            .chain(&self.subclass_edges)
            .map(|(_, o)| o.as_str())
            .collect();
        for &e in &entity_names {
            if has_children.contains(e) {
                return Err(Error::EntityHasChildren(e.to_string()));
            }
            if concept_names.contains(e) {
                return Err(Error::EntityIsConcept(e.to_string()));
            }
        }
        if concept_names.is_empty() {
            return Err(Error::EmptyTaxonomy);
        }

        let concept_index: BTreeMap<String, ConceptId> = concept_names
            .iter()
            .enumerate()
            .map(|(i, c)| (c.to_string(), ConceptId(i as u32)))
            .collect();
        let entity_index: BTreeMap<String, EntityId> = entity_names
            .iter()
            .enumerate()
            .map(|(i, e)| (e.to_string(), EntityId(i as u32)))
            .collect();

        let nc = concept_names.len();
        let mut parents = vec![Vec::new(); nc];
        let mut children = vec![Vec::new(); nc];
        for (child, parent) in &self.subclass_edges {
            let c = concept_index[child.as_str()];
            let p = concept_index[parent.as_str()];
            parents[c.index()].push(p);
            children[p.index()].push(c);
        }
        let mut entity_types = vec![Vec::new(); entity_names.len()];
        let mut direct_entities = vec![Vec::new(); nc];
        for (entity, concept) in &self.type_edges {
            let e = entity_index[entity.as_str()];
            let c = concept_index[concept.as_str()];
            entity_types[e.index()].push(c);
            direct_entities[c.index()].push(e);
        }
        for list in parents.iter_mut().chain(children.iter_mut()).chain(entity_types.iter_mut()) {
            list.sort_unstable();
        }
        for list in &mut direct_entities {
            list.sort_unstable();
        }

        let concept_names: Vec<String> = concept_names.iter().map(|s| s.to_string()).collect();
        if let Some(c) = find_cycle(&parents) {
            return Err(Error::Cycle(concept_names[c].clone()));
        }
        let roots: Vec<usize> = (0..nc).filter(|&c| parents[c].is_empty()).collect();
        if roots.len() != 1 {
            return Err(Error::MultipleRoots(
                roots.iter().map(|&c| concept_names[c].clone()).collect(),
            ));
        }

        Ok(Taxonomy {
            root: ConceptId(roots[0] as u32),
            concept_names,
            entity_names: entity_names.iter().map(|s| s.to_string()).collect(),
            concept_index,
            entity_index,
            parents,
            children,
            entity_types,
            direct_entities,
        })
    }
}

/// Returns a concept lying on a parent cycle, if any.
fn find_cycle(parents: &[Vec<ConceptId>]) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; parents.len()];
    for start in 0..parents.len() {
        if mark[start] != Mark::New {
            continue;
        }
        // (node, next parent position)
        let mut stack = vec![(start, 0usize)];
        mark[start] = Mark::Open;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(p) = parents[node].get(*next) {
                *next += 1;
                let p = p.index();
                match mark[p] {
                    Mark::Open => return Some(p),
                    Mark::New => {
                        mark[p] = Mark::Open;
                        stack.push((p, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// Immutable, validated taxonomy.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    concept_names: Vec<String>,
    entity_names: Vec<String>,
    concept_index: BTreeMap<String, ConceptId>,
    entity_index: BTreeMap<String, EntityId>,
    parents: Vec<Vec<ConceptId>>,
    children: Vec<Vec<ConceptId>>,
    entity_types: Vec<Vec<ConceptId>>,
    direct_entities: Vec<Vec<EntityId>>,
    root: ConceptId,
}

impl Taxonomy {
    pub fn root(&self) -> ConceptId {
        self.root
    }

    pub fn num_concepts(&self) -> usize {
        self.concept_names.len()
    }

    pub fn num_entities(&self) -> usize {
        self.entity_names.len()
    }

    pub fn concept(&self, name: &str) -> Result<ConceptId> {
        self.concept_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownConcept(name.to_string()))
    }

    pub fn entity(&self, name: &str) -> Result<EntityId> {
        self.entity_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEntity(name.to_string()))
    }

    pub fn has_entity(&self, name: &str) -> bool {
        self.entity_index.contains_key(name)
    }

    pub fn concept_name(&self, c: ConceptId) -> &str {
        &self.concept_names[c.index()]
    }

    pub fn entity_name(&self, e: EntityId) -> &str {
        &self.entity_names[e.index()]
    }

    pub fn concepts(&self) -> impl Iterator<Item = ConceptId> + '_ {
        (0..self.concept_names.len() as u32).map(ConceptId)
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        (0..self.entity_names.len() as u32).map(EntityId)
    }

    pub fn parents(&self, c: ConceptId) -> &[ConceptId] {
        &self.parents[c.index()]
    }

    pub fn children(&self, c: ConceptId) -> &[ConceptId] {
        &self.children[c.index()]
    }

    /// Concepts an entity is directly typed under.
    pub fn types_of(&self, e: EntityId) -> &[ConceptId] {
        &self.entity_types[e.index()]
    }

    /// Entities typed directly under `c`.
    pub fn direct_entities(&self, c: ConceptId) -> &[EntityId] {
        &self.direct_entities[c.index()]
    }

    /// `c` and all its ancestors with their shortest upward distance, in
    /// breadth-first order (non-decreasing distance, ties by id).
    pub fn ancestors(&self, c: ConceptId) -> Vec<(ConceptId, u32)> {
        let mut dist = vec![u32::MAX; self.num_concepts()];
        let mut out = Vec::new();
        let mut queue = VecDeque::from([c]);
        dist[c.index()] = 0;
        while let Some(x) = queue.pop_front() {
            let d = dist[x.index()];
            out.push((x, d));
            for &p in self.parents(x) {
                if dist[p.index()] == u32::MAX {
                    dist[p.index()] = d + 1;
                    queue.push_back(p);
                }
            }
        }
        out
    }

    /// `c` and all concepts below it, sorted by id.
    pub fn descendants(&self, c: ConceptId) -> Vec<ConceptId> {
        let mut seen = vec![false; self.num_concepts()];
        let mut stack = vec![c];
        seen[c.index()] = true;
        while let Some(x) = stack.pop() {
            for &ch in self.children(x) {
                if !seen[ch.index()] {
                    seen[ch.index()] = true;
                    stack.push(ch);
                }
            }
        }
        collect_marked(&seen).map(|i| ConceptId(i as u32)).collect()
    }

    /// Every entity reaching `c` through one type edge followed by zero or more
    /// subclass edges, sorted by id.
    pub fn entities_under(&self, c: ConceptId) -> Vec<EntityId> {
        let mut seen = vec![false; self.num_entities()];
        for d in self.descendants(c) {
            for &e in self.direct_entities(d) {
                seen[e.index()] = true;
            }
        }
        collect_marked(&seen).map(|i| EntityId(i as u32)).collect()
    }

    /// Membership flags over concepts: `true` for every concept that contains `e`.
    pub fn concepts_containing(&self, e: EntityId) -> Vec<bool> {
        let mut seen = vec![false; self.num_concepts()];
        let mut stack: Vec<ConceptId> = self.types_of(e).to_vec();
        for c in &stack {
            seen[c.index()] = true;
        }
        while let Some(x) = stack.pop() {
            for &p in self.parents(x) {
                if !seen[p.index()] {
                    seen[p.index()] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    pub fn contains(&self, c: ConceptId, e: EntityId) -> bool {
        self.concepts_containing(e)[c.index()]
    }

    /// Length of the shortest upward path from `c` to `ancestor`.
    pub fn concept_distance(&self, c: ConceptId, ancestor: ConceptId) -> Result<u32> {
        self.ancestors(c)
            .into_iter()
            .find(|&(a, _)| a == ancestor)
            .map(|(_, d)| d)
            .ok_or_else(|| Error::NotAncestor {
                concept: self.concept_name(c).to_string(),
                ancestor: self.concept_name(ancestor).to_string(),
            })
    }

    /// Hop distance from the root.
    pub fn depth(&self, c: ConceptId) -> u32 {
        self.concept_distance(c, self.root)
            .expect("every concept reaches the root")
    }

    /// Distance from `c` to the nearest ancestor that contains `e`.
    pub fn margin_of(&self, c: ConceptId, e: EntityId) -> Result<Margin> {
        let containing = self.concepts_containing(e);
        if containing[c.index()] {
            return Err(Error::PositiveEntity {
                concept: self.concept_name(c).to_string(),
                entity: self.entity_name(e).to_string(),
            });
        }
        self.ancestors(c)
            .into_iter()
            .find(|&(a, _)| containing[a.index()])
            .map(|(_, d)| Margin(d))
            .ok_or_else(|| Error::NoCommonAncestor {
                concept: self.concept_name(c).to_string(),
                entity: self.entity_name(e).to_string(),
            })
    }

    /// Concepts sharing at least one parent with `c`, in lexicographic order,
    /// truncated to `cap` when given.
    pub fn siblings(&self, c: ConceptId, cap: Option<usize>) -> Result<Vec<ConceptId>> {
        if c == self.root {
            return Err(Error::RootHasNoSiblings);
        }
        let set: BTreeSet<ConceptId> = self
            .parents(c)
            .iter()
            .flat_map(|&p| self.children(p).iter().copied())
            .filter(|&s| s != c)
            .collect();
        Ok(set.into_iter().take(cap.unwrap_or(usize::MAX)).collect())
    }

    /// Canonical triples: all `typeOf` edges then all `subclassOf` edges,
    /// each block sorted by (subject, object).
    pub fn triples(&self) -> Vec<(&str, Predicate, &str)> {
        let mut out = Vec::new();
        for e in self.entities() {
            for &c in self.types_of(e) {
                out.push((self.entity_name(e), Predicate::TypeOf, self.concept_name(c)));
            }
        }
        for c in self.concepts() {
            for &p in self.parents(c) {
                out.push((self.concept_name(c), Predicate::SubclassOf, self.concept_name(p)));
            }
        }
        out
    }
}

fn collect_marked(flags: &[bool]) -> impl Iterator<Item = usize> + '_ {
    flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i)
}
