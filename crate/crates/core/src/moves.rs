//! Ring-exchange moves along irreducible even cycles.
//!
//! A move tile is a connected set of bounded faces whose boundary is a single
//! even simple cycle with no vertex strictly inside, and whose chords all
//! split the cycle into two odd cycles (equivalently: every chord separates
//! two triangular faces). Tiles are enumerated concretely per section and
//! deduplicated into templates by a canonical form of the boundary cycle and
//! its chords under rotation and reflection.

use crate::bitset::EdgeSet;
use crate::error::{Error, Result};
use crate::lattice::{LatticeCode, PlanarSection, OUTER};
use crate::matching::Matching;
use std::collections::{HashMap, HashSet};

/// One concrete irreducible even cycle in a section.
#[derive(Clone, Debug)]
pub struct TileInstance {
    /// Sorted bounded face ids covered by the tile.
    pub faces: Vec<usize>,
    /// Boundary edges in cyclic walk order, starting at the lowest edge id.
    pub cycle_edges: Vec<usize>,
    /// `cycle_vertices[i]` is the tail of `cycle_edges[i]`.
    pub cycle_vertices: Vec<usize>,
    /// Interior edges (each a chord of the boundary cycle).
    pub chords: Vec<usize>,
    pub mask: EdgeSet,
    /// Alternating halves: edges at even/odd walk positions.
    pub half: [EdgeSet; 2],
    /// Sparse (word index, mask, half0, half1) view for fast flip tests.
    sparse: Vec<(usize, u64, u64, u64)>,
    pub class_key: String,
    /// Catalog template index; usize::MAX until resolved.
    pub template: usize,
}

impl TileInstance {
    /// Which half of the cycle is matched in `m`: 0, 1, or None.
    #[inline]
    pub fn matched_half(&self, m: &EdgeSet) -> Option<u8> {
        let words = m.words();
        let mut ok0 = true;
        let mut ok1 = true;
        for &(w, mask, h0, h1) in &self.sparse {
            let x = words[w] & mask;
            ok0 &= x == h0;
            ok1 &= x == h1;
            if !ok0 && !ok1 {
                return None;
            }
        }
        if ok0 {
            Some(0)
        } else if ok1 {
            Some(1)
        } else {
            None
        }
    }

    pub fn cycle_length(&self) -> usize {
        self.cycle_edges.len()
    }
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct MoveTemplate {
    pub label: String,
    pub cycle_length: usize,
    /// Sorted polygon sizes covered by the tile.
    #[serde(rename = "face_walk")]
    pub cycle_faces: Vec<usize>,
    /// Canonical form of the boundary cycle with chords, up to rotation and
    /// reflection.
    pub class_key: String,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct MoveCatalog {
    pub lattice: String,
    pub templates: Vec<MoveTemplate>,
}

impl MoveCatalog {
    /// The catalog shipped with the crate for one lattice, as frozen from
    /// discovery on a reference section.
    pub fn shipped(code: LatticeCode) -> MoveCatalog {
        let json = match code {
            LatticeCode::Square => include_str!("../fixtures/catalogs/square.json"),
            LatticeCode::Honeycomb => include_str!("../fixtures/catalogs/honeycomb.json"),
            LatticeCode::Triangular => include_str!("../fixtures/catalogs/triangular.json"),
            LatticeCode::TruncSquare => include_str!("../fixtures/catalogs/trunc_square.json"),
            LatticeCode::Star => include_str!("../fixtures/catalogs/star.json"),
            LatticeCode::TruncTrihex => include_str!("../fixtures/catalogs/trunc_trihex.json"),
            LatticeCode::Kagome => include_str!("../fixtures/catalogs/kagome.json"),
            LatticeCode::Ruby => include_str!("../fixtures/catalogs/ruby.json"),
            LatticeCode::ElongTri => include_str!("../fixtures/catalogs/elong_tri.json"),
            LatticeCode::SnubSquare => include_str!("../fixtures/catalogs/snub_square.json"),
            LatticeCode::MapleLeaf => include_str!("../fixtures/catalogs/maple_leaf.json"),
        };
        serde_json::from_str(json).expect("shipped catalog parses")
    }

    pub fn code(&self) -> LatticeCode {
        LatticeCode::parse(&self.lattice).expect("catalog lattice code")
    }

    pub fn template_index(&self, label: &str) -> Option<usize> {
        self.templates.iter().position(|t| t.label == label)
    }

    /// Catalog with one template family removed.
    pub fn without(&self, label: &str) -> MoveCatalog {
        MoveCatalog {
            lattice: self.lattice.clone(),
            templates: self
                .templates
                .iter()
                .filter(|t| t.label != label)
                .cloned()
                .collect(),
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.templates.iter().map(|t| t.label.as_str()).collect()
    }
}

/// A concrete flippable (or to-be-flipped) occurrence of a template.
#[derive(Clone, Debug)]
pub struct MovePlacement {
    pub template: usize,
    pub instance: usize,
    /// Which alternating half is currently matched.
    pub parity: u8,
}

/// All tile instances of a section, indexed by catalog template.
pub struct TileSet {
    pub instances: Vec<TileInstance>,
    pub by_template: Vec<Vec<usize>>,
}

/// Per-lattice enumeration bounds: max boundary length, max face count, and
/// the admissible face-size multisets (sorted ascending).
fn tile_bounds(code: LatticeCode) -> (usize, usize, Vec<Vec<usize>>) {
    use LatticeCode::*;
    let ms = |v: &[&[usize]]| -> Vec<Vec<usize>> {
        v.iter()
            .map(|s| {
                let mut m = s.to_vec();
                m.sort_unstable();
                m
            })
            .collect()
    };
    match code {
        Square => (4, 1, ms(&[&[4]])),
        Honeycomb => (6, 1, ms(&[&[6]])),
        Triangular => (8, 6, ms(&[&[3, 3], &[3, 3, 3, 3], &[3, 3, 3, 3, 3, 3]])),
        TruncSquare => (8, 1, ms(&[&[4], &[8]])),
        Star => (
            18,
            7,
            ms(&[
                &[12],
                &[12, 3, 3],
                &[12, 3, 3, 3, 3],
                &[12, 3, 3, 3, 3, 3, 3],
            ]),
        ),
        TruncTrihex => (12, 1, ms(&[&[4], &[6], &[12]])),
        Kagome => (
            12,
            7,
            ms(&[&[6], &[6, 3, 3], &[6, 3, 3, 3, 3], &[6, 3, 3, 3, 3, 3, 3]]),
        ),
        Ruby => (6, 3, ms(&[&[4], &[6], &[4, 3, 3]])),
        ElongTri => (6, 3, ms(&[&[4], &[3, 3], &[4, 3, 3]])),
        SnubSquare => (8, 5, ms(&[&[4], &[3, 3], &[4, 3, 3], &[4, 3, 3, 3, 3]])),
        MapleLeaf => (
            12,
            7,
            ms(&[
                &[6],
                &[6, 3, 3],
                &[6, 3, 3, 3, 3],
                &[6, 3, 3, 3, 3, 3, 3],
                &[3, 3],
                &[3, 3, 3, 3],
                &[3, 3, 3, 3, 3, 3],
            ]),
        ),
    }
}

fn is_sub_multiset(sub: &[usize], sup: &[usize]) -> bool {
    let mut counts: HashMap<usize, isize> = HashMap::new();
    for &s in sup {
        *counts.entry(s).or_insert(0) += 1;
    }
    for &s in sub {
        let c = counts.entry(s).or_insert(0);
        *c -= 1;
        if *c < 0 {
            return false;
        }
    }
    true
}

/// Validate a face region as an irreducible even cycle and assemble the
/// instance data.
fn region_to_instance(section: &PlanarSection, faces: &[usize]) -> Option<TileInstance> {
    let face_set: HashSet<usize> = faces.iter().copied().collect();
    // Boundary = edges with exactly one incident face inside the region.
    let mut boundary: Vec<usize> = Vec::new();
    let mut interior: Vec<usize> = Vec::new();
    let mut edge_seen: HashSet<usize> = HashSet::new();
    for &f in faces {
        for &e in &section.faces[f].edges {
            if !edge_seen.insert(e) {
                continue;
            }
            let [a, b] = section.edge_faces[e];
            let ina = a != OUTER && face_set.contains(&a);
            let inb = b != OUTER && face_set.contains(&b);
            match (ina, inb) {
                (true, true) => interior.push(e),
                (true, false) | (false, true) => boundary.push(e),
                (false, false) => unreachable!(),
            }
        }
    }
    let blen = boundary.len();
    if blen < 4 || blen % 2 != 0 {
        return None;
    }

    // Vertices on the boundary must have exactly two boundary edges; no
    // vertex of the region may be strictly interior.
    let mut bdeg: HashMap<usize, Vec<usize>> = HashMap::new();
    for &e in &boundary {
        let ed = &section.edges[e];
        bdeg.entry(ed.u).or_default().push(e);
        bdeg.entry(ed.v).or_default().push(e);
    }
    let mut region_verts: HashSet<usize> = HashSet::new();
    for &f in faces {
        region_verts.extend(section.faces[f].vertices.iter().copied());
    }
    if region_verts.len() != bdeg.len() {
        return None; // some vertex is strictly inside
    }
    if bdeg.values().any(|es| es.len() != 2) {
        return None;
    }

    // Walk the boundary cycle starting at the lowest edge id.
    let start = *boundary.iter().min().unwrap();
    let mut cycle_edges = Vec::with_capacity(blen);
    let mut cycle_vertices = Vec::with_capacity(blen);
    let first_tail = section.edges[start].u.min(section.edges[start].v);
    let mut e = start;
    let mut tail = first_tail;
    loop {
        cycle_edges.push(e);
        cycle_vertices.push(tail);
        let head = section.edge_other(e, tail);
        let next = bdeg[&head]
            .iter()
            .copied()
            .find(|&f| f != e)
            .expect("boundary degree 2");
        e = next;
        tail = head;
        if e == start && tail == first_tail {
            break;
        }
        if cycle_edges.len() > blen {
            return None; // multiple boundary components
        }
    }
    if cycle_edges.len() != blen {
        return None;
    }

    // All interior edges must be chords: both endpoints on the cycle, and
    // every chord must split the cycle into two odd pieces.
    let pos: HashMap<usize, usize> = cycle_vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    for &ch in &interior {
        let ed = &section.edges[ch];
        let (pi, pj) = match (pos.get(&ed.u), pos.get(&ed.v)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return None,
        };
        let arc = (pi as isize - pj as isize).unsigned_abs() % blen;
        let arc = arc.min(blen - arc);
        // A chord at odd arc distance would cut the cycle into two even
        // cycles, i.e. the tile would be reducible.
        if arc % 2 != 0 {
            return None;
        }
        // Every admissible chord is an edge of a triangular face.
        debug_assert!({
            let [a, b] = section.edge_faces[ch];
            section.faces[a].size == 3 || section.faces[b].size == 3
        });
    }

    let mask = EdgeSet::from_indices(section.num_edges(), &cycle_edges);
    let mut h0 = EdgeSet::empty(section.num_edges());
    let mut h1 = EdgeSet::empty(section.num_edges());
    for (i, &ce) in cycle_edges.iter().enumerate() {
        if i % 2 == 0 {
            h0.insert(ce);
        } else {
            h1.insert(ce);
        }
    }
    let sparse: Vec<(usize, u64, u64, u64)> = mask
        .words()
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0)
        .map(|(i, &w)| (i, w, h0.words()[i], h1.words()[i]))
        .collect();

    let chord_pairs: Vec<(usize, usize)> = interior
        .iter()
        .map(|&ch| {
            let ed = &section.edges[ch];
            let (a, b) = (pos[&ed.u], pos[&ed.v]);
            (a.min(b), a.max(b))
        })
        .collect();
    let face_sizes: Vec<usize> = {
        let mut s: Vec<usize> = faces.iter().map(|&f| section.faces[f].size).collect();
        s.sort_unstable();
        s
    };
    let class_key = canonical_class_key(blen, &chord_pairs, &face_sizes);

    let mut sorted_faces = faces.to_vec();
    sorted_faces.sort_unstable();
    Some(TileInstance {
        faces: sorted_faces,
        cycle_edges,
        cycle_vertices,
        chords: interior,
        mask,
        half: [h0, h1],
        sparse,
        class_key,
        template: usize::MAX,
    })
}

/// Canonical form of (cycle length, chord endpoints, face sizes) under the
/// dihedral symmetries of the cycle.
pub fn canonical_class_key(blen: usize, chords: &[(usize, usize)], face_sizes: &[usize]) -> String {
    let mut best: Option<Vec<(usize, usize)>> = None;
    for r in 0..blen {
        for refl in [false, true] {
            let mut transformed: Vec<(usize, usize)> = chords
                .iter()
                .map(|&(a, b)| {
                    let ta = if refl { (blen + r - a) % blen } else { (a + blen - r) % blen };
                    let tb = if refl { (blen + r - b) % blen } else { (b + blen - r) % blen };
                    (ta.min(tb), ta.max(tb))
                })
                .collect();
            transformed.sort_unstable();
            if best.as_ref().map_or(true, |b| transformed < *b) {
                best = Some(transformed);
            }
        }
    }
    let chords_str: Vec<String> = best
        .unwrap_or_default()
        .iter()
        .map(|(a, b)| format!("{a}-{b}"))
        .collect();
    let faces_str: Vec<String> = face_sizes.iter().map(|s| s.to_string()).collect();
    format!("n{}|c{}|f{}", blen, chords_str.join(","), faces_str.join(","))
}

/// Enumerate all tile instances of the section within the lattice's bounds.
pub fn enumerate_tiles(section: &PlanarSection) -> Vec<TileInstance> {
    let (max_len, max_faces, multisets) = tile_bounds(section.code());
    let nf = section.faces.len();
    let neighbors: Vec<Vec<usize>> = (0..nf)
        .map(|f| {
            let mut ns: Vec<usize> = section.dual_adjacency[f]
                .iter()
                .filter(|&&(o, _)| o != OUTER)
                .map(|&(o, _)| o)
                .collect();
            ns.sort_unstable();
            ns.dedup();
            ns
        })
        .collect();

    let mut out: Vec<TileInstance> = Vec::new();
    let mut seen_regions: HashSet<Vec<usize>> = HashSet::new();

    // Connected-subset enumeration rooted at the minimum face id.
    fn grow(
        section: &PlanarSection,
        neighbors: &[Vec<usize>],
        root: usize,
        current: &mut Vec<usize>,
        sizes: &mut Vec<usize>,
        candidates: &[usize],
        excluded: &mut HashSet<usize>,
        max_faces: usize,
        multisets: &[Vec<usize>],
        seen: &mut HashSet<Vec<usize>>,
        out: &mut Vec<TileInstance>,
    ) {
        {
            let mut key = current.clone();
            key.sort_unstable();
            if seen.insert(key.clone()) {
                let mut sz = sizes.clone();
                sz.sort_unstable();
                if multisets.iter().any(|m| *m == sz) {
                    if let Some(inst) = region_to_instance(section, &key) {
                        out.push(inst);
                    }
                }
            }
        }
        if current.len() == max_faces {
            return;
        }
        for (k, &c) in candidates.iter().enumerate() {
            if excluded.contains(&c) {
                continue;
            }
            // size-multiset prefix prune
            sizes.push(section.faces[c].size);
            let mut sz = sizes.clone();
            sz.sort_unstable();
            let viable = multisets.iter().any(|m| is_sub_multiset(&sz, m));
            if !viable {
                sizes.pop();
                continue;
            }
            let mut next_candidates: Vec<usize> = candidates[k + 1..].to_vec();
            for &nb in &neighbors[c] {
                if nb > root
                    && !current.contains(&nb)
                    && !excluded.contains(&nb)
                    && !next_candidates.contains(&nb)
                    && !candidates[..=k].contains(&nb)
                {
                    next_candidates.push(nb);
                }
            }
            current.push(c);
            let newly_excluded: Vec<usize> = candidates[..k].to_vec();
            let added: Vec<usize> = newly_excluded
                .iter()
                .copied()
                .filter(|x| excluded.insert(*x))
                .collect();
            grow(
                section, neighbors, root, current, sizes, &next_candidates, excluded, max_faces,
                multisets, seen, out,
            );
            current.pop();
            sizes.pop();
            for x in added {
                excluded.remove(&x);
            }
        }
    }

    for root in 0..nf {
        let mut current = vec![root];
        let mut sizes = vec![section.faces[root].size];
        let candidates: Vec<usize> = neighbors[root].iter().copied().filter(|&n| n > root).collect();
        let mut excluded = HashSet::new();
        grow(
            section,
            &neighbors,
            root,
            &mut current,
            &mut sizes,
            &candidates,
            &mut excluded,
            max_faces,
            &multisets,
            &mut seen_regions,
            &mut out,
        );
    }
    // Deterministic order: by lowest cycle edge ids.
    out.sort_by(|a, b| a.cycle_edges.cmp(&b.cycle_edges));
    out.retain({
        let mut seen = HashSet::new();
        move |inst| seen.insert(inst.faces.clone())
    });
    let _ = max_len;
    out
}

/// Discover all irreducible-even-cycle templates present in a section,
/// deduplicated by symmetry class. Labels are assigned by shape.
pub fn discover_irreducible_cycles(section: &PlanarSection) -> Vec<MoveTemplate> {
    let instances = enumerate_tiles(section);
    let mut by_class: HashMap<String, (usize, Vec<usize>)> = HashMap::new();
    for inst in &instances {
        by_class
            .entry(inst.class_key.clone())
            .or_insert_with(|| {
                let sizes: Vec<usize> = {
                    let mut s: Vec<usize> =
                        inst.faces.iter().map(|&f| section.faces[f].size).collect();
                    s.sort_unstable();
                    s
                };
                (inst.cycle_length(), sizes)
            });
    }
    let mut classes: Vec<(String, usize, Vec<usize>)> = by_class
        .into_iter()
        .map(|(k, (len, sizes))| (k, len, sizes))
        .collect();
    classes.sort_by(|a, b| {
        (a.2.iter().sum::<usize>(), a.1, &a.0).cmp(&(b.2.iter().sum::<usize>(), b.1, &b.0))
    });
    label_classes(section.code(), classes)
}

/// True when any two chords of the canonical key share a cycle vertex.
fn chords_share_vertex(key: &str) -> bool {
    let chords: Vec<(usize, usize)> = key
        .split('|')
        .nth(1)
        .unwrap_or("")
        .trim_start_matches('c')
        .split(',')
        .filter(|s| !s.is_empty())
        .filter_map(|s| {
            let (a, b) = s.split_once('-')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        })
        .collect();
    for (i, &(a, b)) in chords.iter().enumerate() {
        for &(c, d) in &chords[i + 1..] {
            if a == c || a == d || b == c || b == d {
                return true;
            }
        }
    }
    false
}

/// Shape-based labels: plain even faces get their polygon name, decorated
/// tiles get the per-lattice names from the catalog figures.
fn label_classes(code: LatticeCode, classes: Vec<(String, usize, Vec<usize>)>) -> Vec<MoveTemplate> {
    use LatticeCode::*;
    let mut templates = Vec::new();
    // Group keys for families labelled by decoration count.
    let mut hex_family: Vec<(String, usize, Vec<usize>)> = Vec::new();
    let mut tri4: Vec<(String, usize, Vec<usize>)> = Vec::new();
    let mut tri6: Vec<(String, usize, Vec<usize>)> = Vec::new();
    for (key, len, sizes) in classes {
        let tri_count = sizes.iter().filter(|&&s| s == 3).count();
        let label: Option<String> = match (code, &sizes[..]) {
            (_, [4]) => Some("square".into()),
            (_, [6]) if !matches!(code, Kagome | MapleLeaf) => Some("hexagon".into()),
            (_, [8]) => Some("octagon".into()),
            (_, [12]) if code != Star => Some("dodecagon".into()),
            (Triangular, [3, 3]) => Some("L".into()),
            (Triangular, _) if tri_count == 4 => Some("T".into()),
            (Triangular, _) if tri_count == 6 => Some("B".into()),
            (ElongTri | SnubSquare, [3, 3]) => Some("lozenge".into()),
            (ElongTri, [3, 3, 4]) => Some("diamond".into()),
            (SnubSquare, [3, 3, 4]) => {
                // chords sharing a cycle vertex form the chair, opposite
                // chords the diamond
                Some(if chords_share_vertex(&key) { "chair".into() } else { "diamond".into() })
            }
            (SnubSquare, _) if tri_count == 4 => Some("star".into()),
            (Ruby, [3, 3, 4]) => Some("diamond".into()),
            (Kagome | MapleLeaf, _) if sizes.contains(&6) => {
                hex_family.push((key.clone(), len, sizes.clone()));
                None
            }
            (Star, _) if sizes.contains(&12) => {
                hex_family.push((key.clone(), len, sizes.clone()));
                None
            }
            (MapleLeaf, [3, 3]) => Some("L".into()),
            (MapleLeaf, _) if tri_count == 4 => {
                tri4.push((key.clone(), len, sizes.clone()));
                None
            }
            (MapleLeaf, _) if tri_count == 6 => {
                tri6.push((key.clone(), len, sizes.clone()));
                None
            }
            _ => Some(format!("tile{}", len)),
        };
        if let Some(label) = label {
            templates.push(MoveTemplate { label, cycle_length: len, cycle_faces: sizes, class_key: key });
        }
    }
    let prefix = match code {
        Kagome => "H",
        Star => "D",
        MapleLeaf => "M",
        _ => "X",
    };
    hex_family.sort_by(|a, b| {
        let ta = a.2.iter().filter(|&&s| s == 3).count();
        let tb = b.2.iter().filter(|&&s| s == 3).count();
        (ta, &a.0).cmp(&(tb, &b.0))
    });
    for (i, (key, len, sizes)) in hex_family.into_iter().enumerate() {
        templates.push(MoveTemplate {
            label: format!("{}{}", prefix, i + 1),
            cycle_length: len,
            cycle_faces: sizes,
            class_key: key,
        });
    }
    for (group, base) in [(tri4, "T"), (tri6, "B")] {
        let many = group.len() > 1;
        for (i, (key, len, sizes)) in group.into_iter().enumerate() {
            let label = if many { format!("{}{}", base, i + 1) } else { base.to_string() };
            templates.push(MoveTemplate { label, cycle_length: len, cycle_faces: sizes, class_key: key });
        }
    }
    templates.sort_by(|a, b| {
        (a.cycle_faces.iter().sum::<usize>(), a.cycle_length, &a.label)
            .cmp(&(b.cycle_faces.iter().sum::<usize>(), b.cycle_length, &b.label))
    });
    templates
}

/// Match the section's tile instances against a catalog.
pub fn tile_set(section: &PlanarSection, catalog: &MoveCatalog) -> TileSet {
    let mut instances = enumerate_tiles(section);
    let class_to_template: HashMap<&str, usize> = catalog
        .templates
        .iter()
        .enumerate()
        .map(|(i, t)| (t.class_key.as_str(), i))
        .collect();
    instances.retain_mut(|inst| {
        if let Some(&t) = class_to_template.get(inst.class_key.as_str()) {
            inst.template = t;
            true
        } else {
            false
        }
    });
    let mut by_template = vec![Vec::new(); catalog.templates.len()];
    for (i, inst) in instances.iter().enumerate() {
        by_template[inst.template].push(i);
    }
    TileSet { instances, by_template }
}

/// All placements whose matched half lies fully inside `m`.
pub fn find_flippable(m: &Matching, tiles: &TileSet) -> Vec<MovePlacement> {
    let mut out = Vec::new();
    for (i, inst) in tiles.instances.iter().enumerate() {
        if let Some(parity) = inst.matched_half(&m.edges) {
            out.push(MovePlacement { template: inst.template, instance: i, parity });
        }
    }
    out
}

/// Flip the placement: XOR the cycle. Errors if the placement is not
/// currently flippable.
pub fn apply_move(m: &Matching, tiles: &TileSet, p: &MovePlacement) -> Result<Matching> {
    let inst = &tiles.instances[p.instance];
    if inst.matched_half(&m.edges).is_none() {
        return Err(Error::NotFlippable);
    }
    let mut edges = m.edges.clone();
    edges.xor_with(&inst.mask);
    Ok(Matching { edges, section_hash: m.section_hash })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_section, LatticeSpec};
    use crate::matching::enumerate_section;

    fn discover(code: LatticeCode, n1: usize, n2: usize) -> Vec<MoveTemplate> {
        let s = build_section(&LatticeSpec::rect(code, n1, n2)).unwrap();
        discover_irreducible_cycles(&s)
    }

    #[test]
    fn square_catalog_is_one_square() {
        let t = discover(LatticeCode::Square, 4, 4);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].label, "square");
        assert_eq!(t[0].cycle_length, 4);
    }

    #[test]
    fn honeycomb_catalog_is_one_hexagon() {
        let t = discover(LatticeCode::Honeycomb, 4, 4);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].label, "hexagon");
        assert_eq!(t[0].cycle_length, 6);
    }

    #[test]
    fn triangular_catalog_is_l_t_b() {
        let t = discover(LatticeCode::Triangular, 5, 5);
        let labels: Vec<&str> = t.iter().map(|x| x.label.as_str()).collect();
        assert_eq!(labels, vec!["L", "T", "B"]);
        assert_eq!(t[0].cycle_length, 4);
        assert_eq!(t[1].cycle_length, 6);
        assert_eq!(t[2].cycle_length, 8);
    }

    #[test]
    fn kagome_catalog_has_eight_templates() {
        let t = discover(LatticeCode::Kagome, 4, 4);
        assert_eq!(t.len(), 8, "{:?}", t.iter().map(|x| &x.label).collect::<Vec<_>>());
        let labels: Vec<&str> = t.iter().map(|x| x.label.as_str()).collect();
        assert_eq!(labels, vec!["H1", "H2", "H3", "H4", "H5", "H6", "H7", "H8"]);
    }

    #[test]
    fn remaining_catalog_counts_match_the_figures() {
        for (code, n) in [
            (LatticeCode::TruncSquare, 2),
            (LatticeCode::Star, 3),
            (LatticeCode::TruncTrihex, 2),
            (LatticeCode::Ruby, 3),
            (LatticeCode::ElongTri, 4),
            (LatticeCode::SnubSquare, 4),
        ] {
            let t = discover(code, n, n);
            let expected = match code {
                LatticeCode::TruncSquare => 2,
                LatticeCode::Star => 8,
                LatticeCode::TruncTrihex => 3,
                LatticeCode::Ruby => 3,
                LatticeCode::ElongTri => 3,
                LatticeCode::SnubSquare => 5,
                _ => unreachable!(),
            };
            let labels: Vec<&str> = t.iter().map(|x| x.label.as_str()).collect();
            assert_eq!(t.len(), expected, "{}: {:?}", code.as_str(), labels);
        }
    }

    #[test]
    fn snub_square_has_chair_star_lozenge_diamond() {
        let t = discover(LatticeCode::SnubSquare, 4, 4);
        let labels: Vec<&str> = t.iter().map(|x| x.label.as_str()).collect();
        for want in ["square", "lozenge", "diamond", "chair", "star"] {
            assert!(labels.contains(&want), "missing {want} in {labels:?}");
        }
    }

    #[test]
    fn discovery_reproduces_the_shipped_catalogs() {
        // Larger sections than the ones the fixtures were frozen from.
        for (code, n1, n2) in [
            (LatticeCode::Square, 5, 4),
            (LatticeCode::Honeycomb, 5, 4),
            (LatticeCode::Triangular, 6, 5),
            (LatticeCode::TruncSquare, 4, 3),
            (LatticeCode::Star, 4, 3),
            (LatticeCode::TruncTrihex, 4, 3),
            (LatticeCode::Kagome, 5, 4),
            (LatticeCode::Ruby, 4, 3),
            (LatticeCode::ElongTri, 5, 4),
            (LatticeCode::SnubSquare, 5, 4),
            (LatticeCode::MapleLeaf, 5, 4),
        ] {
            let s = build_section(&LatticeSpec::rect(code, n1, n2)).unwrap();
            let got = discover_irreducible_cycles(&s);
            let shipped = MoveCatalog::shipped(code);
            let got_keys: Vec<(&str, &str)> = got
                .iter()
                .map(|t| (t.label.as_str(), t.class_key.as_str()))
                .collect();
            let want_keys: Vec<(&str, &str)> = shipped
                .templates
                .iter()
                .map(|t| (t.label.as_str(), t.class_key.as_str()))
                .collect();
            assert_eq!(got_keys, want_keys, "{}", code.as_str());
        }
    }

    #[test]
    fn apply_move_is_a_local_involution() {
        let s = build_section(&LatticeSpec::rect(LatticeCode::Square, 3, 3)).unwrap();
        let catalog = MoveCatalog {
            lattice: "4^4".into(),
            templates: discover_irreducible_cycles(&s),
        };
        let tiles = tile_set(&s, &catalog);
        let all = enumerate_section(&s, 100).unwrap();
        for m in &all {
            for p in find_flippable(m, &tiles) {
                let m2 = apply_move(m, &tiles, &p).unwrap();
                assert!(all.contains(&m2), "flip stays in the enumeration");
                // locality
                let diff = m.edges.xor(&m2.edges);
                assert_eq!(diff, tiles.instances[p.instance].mask);
                // involution
                let m3 = apply_move(&m2, &tiles, &p).unwrap();
                assert_eq!(*m, m3);
            }
        }
    }
}

#[cfg(test)]
mod probe {
    use super::*;
    use crate::lattice::{build_section, LatticeSpec, LatticeCode};

    #[test]
    #[ignore]
    fn dump_snub_keys() {
        let s = build_section(&LatticeSpec::rect(LatticeCode::SnubSquare, 4, 4)).unwrap();
        for inst in enumerate_tiles(&s) {
            println!("{} len={} faces={:?}", inst.class_key, inst.cycle_length(), inst.faces.len());
        }
    }

    /// Regenerate the shipped catalog fixtures. Run manually:
    /// `cargo test -p dimer-ergo --lib probe::gen_catalog_fixtures -- --ignored`
    #[test]
    #[ignore]
    fn gen_catalog_fixtures() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/catalogs");
        std::fs::create_dir_all(dir).unwrap();
        for (code, n, file) in [
            (LatticeCode::Square, 4, "square"),
            (LatticeCode::Honeycomb, 4, "honeycomb"),
            (LatticeCode::Triangular, 5, "triangular"),
            (LatticeCode::TruncSquare, 3, "trunc_square"),
            (LatticeCode::Star, 3, "star"),
            (LatticeCode::TruncTrihex, 3, "trunc_trihex"),
            (LatticeCode::Kagome, 4, "kagome"),
            (LatticeCode::Ruby, 3, "ruby"),
            (LatticeCode::ElongTri, 4, "elong_tri"),
            (LatticeCode::SnubSquare, 4, "snub_square"),
            (LatticeCode::MapleLeaf, 4, "maple_leaf"),
        ] {
            let s = build_section(&LatticeSpec::rect(code, n, n)).unwrap();
            let catalog = MoveCatalog {
                lattice: code.as_str().to_string(),
                templates: discover_irreducible_cycles(&s),
            };
            let json = serde_json::to_string_pretty(&catalog).unwrap();
            std::fs::write(format!("{dir}/{file}.json"), json + "\n").unwrap();
        }
    }

    #[test]
    #[ignore]
    fn dump_catalogs() {
        for (code, n) in [
            (LatticeCode::Kagome, 4),
            (LatticeCode::Star, 3),
            (LatticeCode::MapleLeaf, 4),
        ] {
            let s = build_section(&LatticeSpec::rect(code, n, n)).unwrap();
            println!("== {}", code.as_str());
            for t in discover_irreducible_cycles(&s) {
                println!("  {:10} len={:2} faces={:?} key={}", t.label, t.cycle_length, t.cycle_faces, t.class_key);
            }
        }
    }
}
