//! Perfect matchings over a section: validation, exhaustive enumeration,
//! seeded sampling, and the transition graph of two matchings with its cycle
//! decomposition and nesting forest.

use crate::bitset::EdgeSet;
use crate::error::{Error, Result};
use crate::lattice::{PlanarSection, OUTER};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

pub const DEFAULT_CAP: usize = 200_000;

/// A perfect matching, stored as an edge bitset plus the hash of the section
/// it lives on.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    pub edges: EdgeSet,
    pub section_hash: u64,
}

impl std::fmt::Debug for Matching {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Matching{:?}", self.edges.to_indices())
    }
}

impl Matching {
    pub fn edge_ids(&self) -> Vec<usize> {
        self.edges.to_indices()
    }
}

/// Check that the edge subset covers every vertex exactly once.
pub fn validate(section: &PlanarSection, edge_ids: &[usize]) -> Result<Matching> {
    let mut cover = vec![usize::MAX; section.num_vertices()];
    for &e in edge_ids {
        let ed = &section.edges[e];
        for v in [ed.u, ed.v] {
            if cover[v] != usize::MAX {
                return Err(Error::DoublyCoveredVertex(v));
            }
            cover[v] = e;
        }
    }
    if let Some(v) = cover.iter().position(|&c| c == usize::MAX) {
        return Err(Error::UncoveredVertex(v));
    }
    Ok(Matching {
        edges: EdgeSet::from_indices(section.num_edges(), edge_ids),
        section_hash: section.content_hash(),
    })
}

pub fn matching_from_set(section: &PlanarSection, edges: EdgeSet) -> Matching {
    debug_assert!(validate(section, &edges.to_indices()).is_ok());
    Matching { edges, section_hash: section.content_hash() }
}

/// Generic adjacency view used by the enumerator, so the same backtracking
/// runs on sections and on torus quotients.
pub trait MatchGraph {
    fn num_vertices(&self) -> usize;
    fn num_edges(&self) -> usize;
    /// (edge id, other endpoint) for all edges at `v`, in ascending edge id.
    fn incident(&self, v: usize) -> Vec<(usize, usize)>;
}

impl MatchGraph for PlanarSection {
    fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    fn num_edges(&self) -> usize {
        self.edges.len()
    }
    fn incident(&self, v: usize) -> Vec<(usize, usize)> {
        let mut inc: Vec<(usize, usize)> = self.rotation[v]
            .iter()
            .map(|&e| (e, self.edge_other(e, v)))
            .collect();
        inc.sort_unstable();
        inc
    }
}

/// Plain adjacency-list graph (used for torus quotients of a lattice).
pub struct AdjGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl MatchGraph for AdjGraph {
    fn num_vertices(&self) -> usize {
        self.n
    }
    fn num_edges(&self) -> usize {
        self.edges.len()
    }
    fn incident(&self, v: usize) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, &(a, b))| {
                if a == v {
                    Some((i, b))
                } else if b == v {
                    Some((i, a))
                } else {
                    None
                }
            })
            .collect()
    }
}

struct Enumerator {
    num_edges: usize,
    incident: Vec<Vec<(usize, usize)>>,
    endpoints: Vec<(usize, usize)>,
    covered: Vec<bool>,
    chosen: Vec<usize>,
    out: Vec<EdgeSet>,
    count: usize,
    cap: usize,
    count_only: bool,
    overflow: bool,
}

impl Enumerator {
    fn new<G: MatchGraph>(graph: &G, cap: usize, count_only: bool) -> Self {
        let incident: Vec<Vec<(usize, usize)>> =
            (0..graph.num_vertices()).map(|v| graph.incident(v)).collect();
        let mut endpoints = vec![(usize::MAX, usize::MAX); graph.num_edges()];
        for (v, inc) in incident.iter().enumerate() {
            for &(e, w) in inc {
                endpoints[e] = (v.min(w), v.max(w));
            }
        }
        Enumerator {
            num_edges: graph.num_edges(),
            incident,
            endpoints,
            covered: vec![false; graph.num_vertices()],
            chosen: Vec::new(),
            out: Vec::new(),
            count: 0,
            cap,
            count_only,
            overflow: false,
        }
    }

    fn emit(&mut self) -> bool {
        if self.count == self.cap {
            self.overflow = true;
            return false;
        }
        self.count += 1;
        if !self.count_only {
            self.out.push(EdgeSet::from_indices(self.num_edges, &self.chosen));
        }
        true
    }

    /// Branch on the lowest uncovered vertex; propagate forced dimers first.
    /// Forced choices are 1-ary branch nodes, so the leaf order equals the
    /// plain lowest-vertex branching order.
    fn run(&mut self) -> bool {
        let mut forced: Vec<usize> = Vec::new();
        let mut dead = false;
        'propagate: loop {
            let mut progressed = false;
            for v in 0..self.covered.len() {
                if self.covered[v] {
                    continue;
                }
                let mut free = None;
                let mut nfree = 0;
                for &(e, w) in &self.incident[v] {
                    if !self.covered[w] {
                        nfree += 1;
                        free = Some((e, w));
                        if nfree > 1 {
                            break;
                        }
                    }
                }
                if nfree == 0 {
                    dead = true;
                    break 'propagate;
                }
                if nfree == 1 {
                    let (e, w) = free.unwrap();
                    self.place(e, v, w);
                    forced.push(e);
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }

        let keep_going = if dead {
            true
        } else {
            match (0..self.covered.len()).find(|&v| !self.covered[v]) {
                None => self.emit(),
                Some(v) => {
                    let options: Vec<(usize, usize)> = self.incident[v]
                        .iter()
                        .copied()
                        .filter(|&(_, w)| !self.covered[w])
                        .collect();
                    let mut ok = true;
                    for (e, w) in options {
                        self.place(e, v, w);
                        ok = self.run();
                        self.unplace(e);
                        if !ok {
                            break;
                        }
                    }
                    ok
                }
            }
        };
        for &e in forced.iter().rev() {
            self.unplace(e);
        }
        keep_going
    }

    fn place(&mut self, e: usize, u: usize, w: usize) {
        self.covered[u] = true;
        self.covered[w] = true;
        self.chosen.push(e);
    }

    fn unplace(&mut self, e: usize) {
        let popped = self.chosen.pop();
        debug_assert_eq!(popped, Some(e));
        let (u, v) = self.endpoints[e];
        self.covered[u] = false;
        self.covered[v] = false;
    }
}

/// Exhaustively enumerate perfect matchings in the canonical order
/// (depth-first, branching on the lowest uncovered vertex, edge ids
/// ascending). Errors with `CapExceeded` once `cap` matchings were produced
/// and more exist.
pub fn enumerate_matchings<G: MatchGraph>(graph: &G, cap: usize) -> Result<Vec<EdgeSet>> {
    if graph.num_vertices() % 2 == 1 {
        return Ok(Vec::new());
    }
    let mut en = Enumerator::new(graph, cap, false);
    en.run();
    if en.overflow {
        return Err(Error::CapExceeded { cap, seen: en.count });
    }
    Ok(en.out)
}

/// Count matchings without storing them.
pub fn count_matchings<G: MatchGraph>(graph: &G, cap: usize) -> Result<usize> {
    if graph.num_vertices() % 2 == 1 {
        return Ok(0);
    }
    let mut en = Enumerator::new(graph, cap, true);
    en.run();
    if en.overflow {
        return Err(Error::CapExceeded { cap, seen: en.count });
    }
    Ok(en.count)
}

pub fn enumerate_section(section: &PlanarSection, cap: usize) -> Result<Vec<Matching>> {
    Ok(enumerate_matchings(section, cap)?
        .into_iter()
        .map(|edges| Matching { edges, section_hash: section.content_hash() })
        .collect())
}

/// Sampling result. Uniform when the full enumeration fits below the cap;
/// otherwise a seeded backtracking walk that is deterministic but not
/// uniform, and flagged as such.
pub struct SampledMatching {
    pub matching: Matching,
    pub uniform: bool,
}

pub fn random_matching(section: &PlanarSection, seed: u64, cap: usize) -> Result<SampledMatching> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ section.content_hash());
    match enumerate_section(section, cap) {
        Ok(all) => {
            if all.is_empty() {
                return Err(Error::NoPerfectMatching);
            }
            let idx = rng.gen_range(0..all.len());
            Ok(SampledMatching { matching: all[idx].clone(), uniform: true })
        }
        Err(Error::CapExceeded { .. }) => {
            let m = random_backtrack(section, &mut rng)?;
            Ok(SampledMatching { matching: m, uniform: false })
        }
        Err(e) => Err(e),
    }
}

fn random_backtrack(section: &PlanarSection, rng: &mut ChaCha8Rng) -> Result<Matching> {
    let n = section.num_vertices();
    let incident: Vec<Vec<(usize, usize)>> = (0..n).map(|v| section.incident(v)).collect();
    let mut covered = vec![false; n];
    let mut chosen: Vec<(usize, usize, usize)> = Vec::new();
    fn rec(
        incident: &[Vec<(usize, usize)>],
        covered: &mut Vec<bool>,
        chosen: &mut Vec<(usize, usize, usize)>,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        let v = match covered.iter().position(|&c| !c) {
            None => return true,
            Some(v) => v,
        };
        let mut options: Vec<(usize, usize)> = incident[v]
            .iter()
            .copied()
            .filter(|&(_, w)| !covered[w])
            .collect();
        options.shuffle(rng);
        for (e, w) in options {
            covered[v] = true;
            covered[w] = true;
            chosen.push((e, v, w));
            if rec(incident, covered, chosen, rng) {
                return true;
            }
            chosen.pop();
            covered[v] = false;
            covered[w] = false;
        }
        false
    }
    if !rec(&incident, &mut covered, &mut chosen, rng) {
        return Err(Error::NoPerfectMatching);
    }
    let ids: Vec<usize> = chosen.iter().map(|&(e, _, _)| e).collect();
    validate(section, &ids)
}

/// One cycle of the transition graph M1 u M2.
#[derive(Clone, Debug)]
pub struct Cycle {
    /// Edge ids in cyclic walk order. A trivial cycle is the one shared edge.
    pub edges: Vec<usize>,
    pub vertices: Vec<usize>,
    /// Bounded faces strictly enclosed by the cycle (empty for trivial ones).
    pub interior_faces: Vec<usize>,
    pub trivial: bool,
}

#[derive(Clone, Debug)]
pub struct TransitionGraph {
    pub cycles: Vec<Cycle>,
    /// Parent cycle index in the nesting forest, if any.
    pub parent: Vec<Option<usize>>,
    /// Nesting depth counted over non-trivial enclosing cycles.
    pub depth: Vec<usize>,
}

impl TransitionGraph {
    pub fn non_trivial(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cycles.len()).filter(move |&i| !self.cycles[i].trivial)
    }

    pub fn max_nontrivial_depth(&self) -> usize {
        self.non_trivial().map(|i| self.depth[i]).max().unwrap_or(0)
    }

    /// Vertices strictly inside any non-trivial cycle: the total that the
    /// merging step of the transformer still has to absorb.
    pub fn interior_vertex_count(&self, section: &PlanarSection) -> usize {
        let mut inside = vec![false; section.num_vertices()];
        for c in self.cycles.iter().filter(|c| !c.trivial) {
            for &f in &c.interior_faces {
                for &v in &section.faces[f].vertices {
                    inside[v] = true;
                }
            }
            for &v in &c.vertices {
                inside[v] = false;
            }
        }
        // A vertex interior to cycle A and on cycle B (B nested in A) counts
        // as "on a cycle", so clear all cycle vertices last.
        let mut on_cycle = vec![false; section.num_vertices()];
        for c in &self.cycles {
            for &v in &c.vertices {
                on_cycle[v] = true;
            }
        }
        inside
            .iter()
            .zip(on_cycle.iter())
            .filter(|&(i, o)| *i && !*o)
            .count()
    }
}

/// Faces strictly inside a cycle: bounded faces not reachable from the outer
/// face in the dual graph once crossings of the cycle's edges are blocked.
pub fn faces_inside_cycle(section: &PlanarSection, cycle_edges: &EdgeSet) -> Vec<usize> {
    let nf = section.faces.len();
    let mut outside = vec![false; nf];
    let mut queue: VecDeque<usize> = VecDeque::new();
    // Seed: bounded faces adjacent to the outer face across a non-cycle edge.
    for (fi, adj) in section.dual_adjacency.iter().enumerate() {
        for &(other, e) in adj {
            if other == OUTER && !cycle_edges.contains(e) && !outside[fi] {
                outside[fi] = true;
                queue.push_back(fi);
            }
        }
    }
    while let Some(f) = queue.pop_front() {
        for &(other, e) in &section.dual_adjacency[f] {
            if other != OUTER && !cycle_edges.contains(e) && !outside[other] {
                outside[other] = true;
                queue.push_back(other);
            }
        }
    }
    (0..nf).filter(|&f| !outside[f]).collect()
}

/// Decompose M1 u M2 into trivial and even alternating cycles, and compute
/// the nesting forest by face containment.
pub fn transition_graph(
    section: &PlanarSection,
    m1: &Matching,
    m2: &Matching,
) -> Result<TransitionGraph> {
    if m1.section_hash != section.content_hash() || m2.section_hash != section.content_hash() {
        return Err(Error::SectionMismatch);
    }
    let n = section.num_vertices();
    let mut m1_at = vec![usize::MAX; n];
    let mut m2_at = vec![usize::MAX; n];
    for e in m1.edges.iter() {
        let ed = &section.edges[e];
        m1_at[ed.u] = e;
        m1_at[ed.v] = e;
    }
    for e in m2.edges.iter() {
        let ed = &section.edges[e];
        m2_at[ed.u] = e;
        m2_at[ed.v] = e;
    }

    let mut cycles = Vec::new();
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        if m1_at[start] == m2_at[start] {
            // shared dimer: trivial cycle
            let e = m1_at[start];
            let ed = &section.edges[e];
            seen[ed.u] = true;
            seen[ed.v] = true;
            cycles.push(Cycle {
                edges: vec![e],
                vertices: vec![ed.u, ed.v],
                interior_faces: Vec::new(),
                trivial: true,
            });
            continue;
        }
        // Walk the alternating cycle starting along the M1 dimer.
        let mut verts = Vec::new();
        let mut edges = Vec::new();
        let mut v = start;
        let mut use_m1 = true;
        loop {
            seen[v] = true;
            verts.push(v);
            let e = if use_m1 { m1_at[v] } else { m2_at[v] };
            edges.push(e);
            v = section.edge_other(e, v);
            use_m1 = !use_m1;
            if v == start {
                break;
            }
        }
        let set = EdgeSet::from_indices(section.num_edges(), &edges);
        let interior = faces_inside_cycle(section, &set);
        cycles.push(Cycle { edges, vertices: verts, interior_faces: interior, trivial: false });
    }

    // Nesting: the parent of a cycle is the smallest-interior non-trivial
    // cycle whose interior strictly contains it.
    let nf = section.faces.len();
    let mut interior_flags: Vec<Option<Vec<bool>>> = vec![None; cycles.len()];
    for (i, c) in cycles.iter().enumerate() {
        if !c.trivial {
            let mut flags = vec![false; nf];
            for &f in &c.interior_faces {
                flags[f] = true;
            }
            interior_flags[i] = Some(flags);
        }
    }
    let probe_face = |c: &Cycle| -> Option<usize> {
        // Any bounded face incident to the cycle's first vertex identifies
        // which side of other cycles it lies on.
        c.vertices
            .iter()
            .flat_map(|&v| section.vertex_faces[v].iter().copied())
            .next()
    };
    let mut parent: Vec<Option<usize>> = vec![None; cycles.len()];
    for i in 0..cycles.len() {
        let pf = match probe_face(&cycles[i]) {
            Some(f) => f,
            None => continue,
        };
        let mut best: Option<usize> = None;
        for j in 0..cycles.len() {
            if i == j || cycles[j].trivial {
                continue;
            }
            let flags = interior_flags[j].as_ref().unwrap();
            // A cycle is inside j when its probe face is interior to j and it
            // is not j itself (disjoint vertex sets guarantee strictness).
            if flags[pf] && !cycles[j].vertices.contains(&cycles[i].vertices[0]) {
                match best {
                    None => best = Some(j),
                    Some(b) => {
                        if cycles[j].interior_faces.len() < cycles[b].interior_faces.len() {
                            best = Some(j)
                        }
                    }
                }
            }
        }
        parent[i] = best;
    }
    let mut depth = vec![0usize; cycles.len()];
    for i in 0..cycles.len() {
        let mut d = 0;
        let mut p = parent[i];
        while let Some(j) = p {
            if !cycles[j].trivial {
                d += 1;
            }
            p = parent[j];
        }
        depth[i] = d;
    }
    Ok(TransitionGraph { cycles, parent, depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_section, LatticeCode, LatticeSpec};

    fn sec(code: LatticeCode, n1: usize, n2: usize) -> PlanarSection {
        build_section(&LatticeSpec::rect(code, n1, n2)).unwrap()
    }

    #[test]
    fn c4_has_two_matchings() {
        let s = sec(LatticeCode::Square, 1, 1);
        assert_eq!(s.num_vertices(), 4);
        let all = enumerate_section(&s, 100).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn c4_validation_rejects_adjacent_pair() {
        let s = sec(LatticeCode::Square, 1, 1);
        // Two edges sharing a vertex must double-cover it.
        let e0 = 0usize;
        let bad = (0..s.num_edges())
            .find(|&e| {
                e != e0
                    && (s.edges[e].u == s.edges[e0].u
                        || s.edges[e].u == s.edges[e0].v
                        || s.edges[e].v == s.edges[e0].u
                        || s.edges[e].v == s.edges[e0].v)
            })
            .unwrap();
        assert!(matches!(
            validate(&s, &[e0, bad]),
            Err(Error::DoublyCoveredVertex(_))
        ));
    }

    #[test]
    fn grid_4x4_has_36_matchings() {
        let s = sec(LatticeCode::Square, 3, 3);
        let all = enumerate_section(&s, 1000).unwrap();
        assert_eq!(all.len(), 36);
        // no duplicates
        let mut sets: Vec<Vec<usize>> = all.iter().map(|m| m.edge_ids()).collect();
        sets.sort();
        sets.dedup();
        assert_eq!(sets.len(), 36);
    }

    #[test]
    fn ladder_counts_follow_fibonacci() {
        // n squares in a row: count = F(n+1) with F(1)=1, F(2)=2.
        let mut f = vec![0u64, 1, 2];
        for k in 3..=11 {
            let v = f[k - 1] + f[k - 2];
            f.push(v);
        }
        for n in 1..=10usize {
            let s = sec(LatticeCode::Square, n, 1);
            let count = count_matchings(&s, 100_000).unwrap() as u64;
            assert_eq!(count, f[n + 1], "ladder with {n} squares");
        }
    }

    #[test]
    fn cap_exceeded_reports_partial() {
        let s = sec(LatticeCode::Square, 3, 3);
        match enumerate_section(&s, 10) {
            Err(Error::CapExceeded { cap, seen }) => {
                assert_eq!(cap, 10);
                assert_eq!(seen, 10);
            }
            other => panic!("expected CapExceeded, got {:?}", other.map(|v| v.len())),
        }
    }

    #[test]
    fn random_matching_is_replay_stable_and_covers() {
        let s = sec(LatticeCode::Square, 3, 3);
        let a = random_matching(&s, 7, DEFAULT_CAP).unwrap();
        let b = random_matching(&s, 7, DEFAULT_CAP).unwrap();
        assert_eq!(a.matching, b.matching);
        assert!(a.uniform);
        let all = enumerate_section(&s, 1000).unwrap();
        let mut hit = vec![false; all.len()];
        for seed in 0..1000u64 {
            let m = random_matching(&s, seed, DEFAULT_CAP).unwrap().matching;
            let idx = all.iter().position(|x| *x == m).unwrap();
            hit[idx] = true;
        }
        assert!(hit.iter().all(|&h| h), "all 36 matchings observed");
    }

    #[test]
    fn transition_graph_of_equal_matchings_is_all_trivial() {
        let s = sec(LatticeCode::Square, 3, 3);
        let m = enumerate_section(&s, 100).unwrap().pop().unwrap();
        let tg = transition_graph(&s, &m, &m).unwrap();
        assert!(tg.cycles.iter().all(|c| c.trivial));
        assert_eq!(tg.cycles.len(), s.num_vertices() / 2);
    }

    #[test]
    fn c4_transition_is_one_4_cycle() {
        let s = sec(LatticeCode::Square, 1, 1);
        let all = enumerate_section(&s, 10).unwrap();
        let tg = transition_graph(&s, &all[0], &all[1]).unwrap();
        assert_eq!(tg.cycles.len(), 1);
        assert!(!tg.cycles[0].trivial);
        assert_eq!(tg.cycles[0].edges.len(), 4);
        assert_eq!(tg.cycles[0].interior_faces.len(), 1);
    }

    #[test]
    fn triangular_cycles_are_even() {
        let s = sec(LatticeCode::Triangular, 3, 4);
        for seed in 0..100u64 {
            let a = random_matching(&s, 2 * seed, DEFAULT_CAP).unwrap().matching;
            let b = random_matching(&s, 2 * seed + 1, DEFAULT_CAP).unwrap().matching;
            let tg = transition_graph(&s, &a, &b).unwrap();
            for c in tg.cycles.iter().filter(|c| !c.trivial) {
                assert!(c.edges.len() >= 4 && c.edges.len() % 2 == 0);
            }
            // every vertex on exactly one cycle
            let mut seen = vec![0usize; s.num_vertices()];
            for c in &tg.cycles {
                for &v in &c.vertices {
                    seen[v] += 1;
                }
            }
            assert!(seen.iter().all(|&k| k == 1));
        }
    }

    #[test]
    fn matching_sizes_are_half_vertex_count() {
        let s = sec(LatticeCode::Kagome, 2, 2);
        for m in enumerate_section(&s, 100_000).unwrap() {
            assert_eq!(m.edges.count(), s.num_vertices() / 2);
        }
    }
}

/// All perfect matchings that contain the given forced dimers: the forced
/// vertices are stripped and the leftover subgraph enumerated.
pub fn matchings_containing(
    section: &PlanarSection,
    forced_edges: &[usize],
    cap: usize,
) -> Result<Vec<Matching>> {
    let mut covered = vec![false; section.num_vertices()];
    for &e in forced_edges {
        let ed = &section.edges[e];
        for v in [ed.u, ed.v] {
            if covered[v] {
                return Err(Error::DoublyCoveredVertex(v));
            }
            covered[v] = true;
        }
    }
    let rest: Vec<usize> = (0..section.num_vertices()).filter(|&v| !covered[v]).collect();
    let vmap: std::collections::HashMap<usize, usize> =
        rest.iter().enumerate().map(|(n, &v)| (v, n)).collect();
    let mut sub_edges = Vec::new();
    let mut ids = Vec::new();
    for (e, ed) in section.edges.iter().enumerate() {
        if let (Some(&a), Some(&b)) = (vmap.get(&ed.u), vmap.get(&ed.v)) {
            sub_edges.push((a.min(b), a.max(b)));
            ids.push(e);
        }
    }
    let sub = AdjGraph { n: rest.len(), edges: sub_edges };
    let subs = enumerate_matchings(&sub, cap)?;
    Ok(subs
        .into_iter()
        .map(|s| {
            let mut edges: Vec<usize> = forced_edges.to_vec();
            edges.extend(s.iter().map(|i| ids[i]));
            edges.sort_unstable();
            Matching {
                edges: EdgeSet::from_indices(section.num_edges(), &edges),
                section_hash: section.content_hash(),
            }
        })
        .collect())
}
