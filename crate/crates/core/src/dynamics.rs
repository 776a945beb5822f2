//! Configuration graphs over all matchings of a section under a move catalog,
//! their Krylov sectors, and the frozen-configuration necessity machinery.

use crate::bitset::EdgeSet;
use crate::error::{Error, Result};
use crate::lattice::PlanarSection;
use crate::matching::{enumerate_section, Matching};
use crate::moves::{find_flippable, tile_set, MoveCatalog, TileSet};
use std::collections::{HashMap, VecDeque};

/// Graph over matchings; vertices are state ids in canonical enumeration
/// order, edges are single move placements labelled by template.
pub struct ConfigGraph {
    pub states: Vec<Matching>,
    /// (neighbor state, template index) per state, deduplicated, sorted.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    pub catalog: MoveCatalog,
}

#[derive(Clone, Debug)]
pub struct SectorDecomposition {
    /// sector id per state
    pub sector_of: Vec<usize>,
    /// state ids per sector, sector 0 is the largest
    pub sectors: Vec<Vec<usize>>,
    /// singleton sectors with zero flippable placements
    pub frozen: Vec<usize>,
}

impl SectorDecomposition {
    pub fn count(&self) -> usize {
        self.sectors.len()
    }
}

/// Exhaustive configuration graph. Errors with `CapExceeded` when the section
/// has more than `cap` matchings.
pub fn build_config_graph(
    section: &PlanarSection,
    catalog: &MoveCatalog,
    cap: usize,
) -> Result<ConfigGraph> {
    let states = enumerate_section(section, cap)?;
    let tiles = tile_set(section, catalog);
    build_config_graph_with(section, catalog, states, &tiles)
}

pub fn build_config_graph_with(
    _section: &PlanarSection,
    catalog: &MoveCatalog,
    states: Vec<Matching>,
    tiles: &TileSet,
) -> Result<ConfigGraph> {
    let index: HashMap<&EdgeSet, usize> =
        states.iter().enumerate().map(|(i, m)| (&m.edges, i)).collect();
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); states.len()];
    for (i, m) in states.iter().enumerate() {
        for p in find_flippable(m, tiles) {
            let inst = &tiles.instances[p.instance];
            let neighbor = m.edges.xor(&inst.mask);
            let j = *index
                .get(&neighbor)
                .expect("flip image must be an enumerated matching");
            debug_assert_ne!(i, j);
            adjacency[i].push((j, inst.template));
        }
        adjacency[i].sort_unstable();
        adjacency[i].dedup();
    }
    Ok(ConfigGraph { states, adjacency, catalog: catalog.clone() })
}

/// Connected components of the configuration graph.
pub fn krylov_sectors(g: &ConfigGraph) -> SectorDecomposition {
    let n = g.states.len();
    let mut sector_of = vec![usize::MAX; n];
    let mut sectors: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if sector_of[start] != usize::MAX {
            continue;
        }
        let id = sectors.len();
        let mut members = vec![start];
        sector_of[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            for &(t, _) in &g.adjacency[s] {
                if sector_of[t] == usize::MAX {
                    sector_of[t] = id;
                    members.push(t);
                    queue.push_back(t);
                }
            }
        }
        members.sort_unstable();
        sectors.push(members);
    }
    // Largest sector first, ties by smallest representative.
    let mut order: Vec<usize> = (0..sectors.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(sectors[i].len()), sectors[i][0]));
    let sectors: Vec<Vec<usize>> = order.iter().map(|&i| sectors[i].clone()).collect();
    let mut new_sector_of = vec![usize::MAX; n];
    for (id, members) in sectors.iter().enumerate() {
        for &s in members {
            new_sector_of[s] = id;
        }
    }
    let frozen = sectors
        .iter()
        .filter(|m| m.len() == 1 && g.adjacency[m[0]].is_empty())
        .map(|m| m[0])
        .collect();
    SectorDecomposition { sector_of: new_sector_of, sectors, frozen }
}

/// A translationally invariant reference matching: a perfect matching of the
/// torus quotient on a small supercell, lifted to the section and completed
/// near the boundary by the recorded deterministic rule.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct FixturePattern {
    /// Supercell extents (in unit cells).
    pub supercell: (usize, usize),
    /// Pattern dimers: (edge template index, cell i mod p1, cell j mod p2).
    pub dimers: Vec<(usize, usize, usize)>,
    /// Index of the boundary completion in canonical enumeration order.
    pub completion_index: usize,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct NecessityFixture {
    pub lattice: String,
    pub name: String,
    /// Template whose necessity this fixture witnesses.
    pub target: String,
    /// Labels that are allowed to be flippable in the fixture state.
    pub claimed: Vec<String>,
    /// Section extents the claim is certified on.
    pub cells: (usize, usize),
    pub pattern: FixturePattern,
}

/// Lift a periodic pattern onto a section: pattern dimers whose edges exist
/// in the section are placed first, then uncovered (boundary) vertices are
/// completed with the `completion_index`-th perfect matching of the leftover
/// subgraph, counted in canonical enumeration order.
pub fn instantiate_fixture(
    section: &PlanarSection,
    pattern: &FixturePattern,
) -> Result<Matching> {
    let def = crate::lattice::lattice_def(section.code());
    let (p1, p2) = pattern.supercell;
    // Index section vertices by (cell, site).
    let mut vid: HashMap<(i32, i32, usize), usize> = HashMap::new();
    for (i, v) in section.vertices.iter().enumerate() {
        vid.insert((v.cell.0, v.cell.1, v.site), i);
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut covered = vec![false; section.num_vertices()];
    for (i, v) in section.vertices.iter().enumerate() {
        let _ = i;
        let (ci, cj) = v.cell;
        for (ti, t) in def.edges.iter().enumerate() {
            let key = (
                ti,
                ci.rem_euclid(p1 as i32) as usize,
                cj.rem_euclid(p2 as i32) as usize,
            );
            if t.si != v.site || !pattern.dimers.contains(&key) {
                continue;
            }
            let target = (ci + t.di, cj + t.dj, t.sj);
            if let Some(&w) = vid.get(&target) {
                let u = vid[&(ci, cj, v.site)];
                if let Some(e) = section.edge_between(u, w) {
                    if !covered[u] && !covered[w] {
                        covered[u] = true;
                        covered[w] = true;
                        chosen.push(e);
                    }
                }
            }
        }
    }
    // Complete the uncovered boundary vertices on the leftover subgraph.
    let leftover: Vec<usize> = (0..section.num_vertices()).filter(|&v| !covered[v]).collect();
    if leftover.is_empty() {
        let mut ids = chosen;
        ids.sort_unstable();
        return crate::matching::validate(section, &ids);
    }
    let vmap: HashMap<usize, usize> = leftover.iter().enumerate().map(|(n, &v)| (v, n)).collect();
    let mut sub_edges: Vec<(usize, usize)> = Vec::new();
    let mut sub_edge_ids: Vec<usize> = Vec::new();
    for (e, ed) in section.edges.iter().enumerate() {
        if let (Some(&a), Some(&b)) = (vmap.get(&ed.u), vmap.get(&ed.v)) {
            sub_edges.push((a.min(b), a.max(b)));
            sub_edge_ids.push(e);
        }
    }
    let sub = crate::matching::AdjGraph { n: leftover.len(), edges: sub_edges };
    let completions = crate::matching::enumerate_matchings(&sub, pattern.completion_index + 1000)
        .map_err(|_| Error::FixtureUninstantiable("completion enumeration overflow".into()))?;
    let completion = completions
        .get(pattern.completion_index)
        .ok_or_else(|| Error::FixtureUninstantiable("no boundary completion".into()))?;
    for se in completion.iter() {
        chosen.push(sub_edge_ids[se]);
    }
    chosen.sort_unstable();
    crate::matching::validate(section, &chosen)
}

#[derive(Clone, Debug)]
pub struct FixtureReport {
    pub name: String,
    pub lattice: String,
    pub target: String,
    pub claimed: Vec<String>,
    pub observed: Vec<String>,
    pub labels_exact: bool,
    /// Sector count under the full catalog.
    pub full_sectors: usize,
    /// Sector count with the target template dropped.
    pub reduced_sectors: usize,
    /// Fixture state is disconnected from the reference state without the
    /// target template.
    pub isolated: bool,
    pub pass: bool,
}

/// Verify a necessity fixture: (a) exactly the claimed labels are flippable,
/// (b) dropping the target strictly increases the sector count and separates
/// the fixture from the reference (columnar) component.
pub fn verify_fixture(
    section: &PlanarSection,
    fixture: &NecessityFixture,
    cap: usize,
) -> Result<FixtureReport> {
    let catalog = MoveCatalog::shipped(section.code());
    let tiles = tile_set(section, &catalog);
    let state = instantiate_fixture(section, &fixture.pattern)?;
    let mut observed: Vec<String> = find_flippable(&state, &tiles)
        .into_iter()
        .map(|p| catalog.templates[p.template].label.clone())
        .collect();
    observed.sort();
    observed.dedup();
    let mut claimed = fixture.claimed.clone();
    claimed.sort();
    let labels_exact = observed == claimed;

    let states = enumerate_section(section, cap)?;
    let g_full = build_config_graph_with(section, &catalog, states.clone(), &tiles)?;
    let full = krylov_sectors(&g_full);

    let reduced_catalog = catalog.without(&fixture.target);
    let reduced_tiles = tile_set(section, &reduced_catalog);
    let g_red = build_config_graph_with(section, &reduced_catalog, states, &reduced_tiles)?;
    let red = krylov_sectors(&g_red);

    let fixture_id = g_full
        .states
        .iter()
        .position(|m| *m == state)
        .expect("fixture state is enumerated");
    // Reference state: the canonical first matching, which lives in the bulk
    // component on every section used here.
    let reference_id = 0usize;
    let isolated = red.sector_of[fixture_id] != red.sector_of[reference_id];
    let pass = labels_exact && red.count() > full.count() && isolated;
    Ok(FixtureReport {
        name: fixture.name.clone(),
        lattice: fixture.lattice.clone(),
        target: fixture.target.clone(),
        claimed,
        observed,
        labels_exact,
        full_sectors: full.count(),
        reduced_sectors: red.count(),
        isolated,
        pass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    Necessary,
    Redundant,
    Undetermined,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct TemplateVerdict {
    pub label: String,
    pub verdict: Verdict,
    pub note: String,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct NecessityReport {
    pub lattice: String,
    pub cells: (usize, usize),
    pub n_states: usize,
    pub verdicts: Vec<TemplateVerdict>,
}

/// The shipped necessity fixtures (Figs. 5, 6, 8-13 equivalents), frozen as
/// periodic motifs plus completion rules.
pub fn shipped_fixtures() -> Vec<NecessityFixture> {
    serde_json::from_str(include_str!("../fixtures/necessity.json"))
        .expect("necessity fixtures parse")
}

pub fn fixtures_for(code: crate::lattice::LatticeCode) -> Vec<NecessityFixture> {
    shipped_fixtures()
        .into_iter()
        .filter(|f| f.lattice == code.as_str())
        .collect()
}

/// Section extents used for per-lattice necessity runs (kept small enough for
/// exhaustive enumeration).
pub fn necessity_cells(code: crate::lattice::LatticeCode) -> (usize, usize) {
    use crate::lattice::LatticeCode::*;
    match code {
        Square => (4, 4),
        Honeycomb => (4, 4),
        Triangular => (4, 4),
        TruncSquare => (3, 3),
        Star => (2, 2),
        TruncTrihex => (2, 2),
        Kagome => (3, 3),
        Ruby => (2, 2),
        ElongTri => (4, 3),
        SnubSquare => (3, 3),
        MapleLeaf => (2, 2),
    }
}

/// Per-template verdicts for one lattice at desk scale.
///
/// On the five lattices with complete fixture sets every template is
/// certified necessary. On the triangular lattice T is redundant (its sector
/// partition is unchanged when dropped). On the star, kagome, and maple-leaf
/// lattices the verdicts are observations at the tested size only.
pub fn necessity_report(code: crate::lattice::LatticeCode, cap: usize) -> Result<NecessityReport> {
    use crate::lattice::LatticeCode::*;
    let cells = necessity_cells(code);
    let spec = crate::lattice::LatticeSpec::rect(code, cells.0, cells.1);
    let section = crate::lattice::build_section(&spec)?;
    let catalog = MoveCatalog::shipped(code);
    let states = enumerate_section(&section, cap)?;
    let n_states = states.len();
    let tiles = tile_set(&section, &catalog);
    let g_full = build_config_graph_with(&section, &catalog, states.clone(), &tiles)?;
    let full = krylov_sectors(&g_full);

    let fixtures = fixtures_for(code);
    let mut verdicts = Vec::new();
    for t in &catalog.templates {
        // A fixture witnessing this template?
        let witnessed = fixtures.iter().any(|f| f.target == t.label);
        let reduced_catalog = catalog.without(&t.label);
        let (reduced_count, partition_equal) = if reduced_catalog.templates.is_empty() {
            (n_states, n_states == full.count())
        } else {
            let rt = tile_set(&section, &reduced_catalog);
            let g = build_config_graph_with(&section, &reduced_catalog, states.clone(), &rt)?;
            let red = krylov_sectors(&g);
            (red.count(), red.sector_of == full.sector_of)
        };
        let (verdict, note) = match code {
            TruncSquare | ElongTri | Ruby | TruncTrihex | SnubSquare if witnessed => (
                Verdict::Necessary,
                "frozen reference configuration witnesses necessity".to_string(),
            ),
            Square | Honeycomb => (
                Verdict::Necessary,
                format!("sole move; without it the {n_states} states all freeze"),
            ),
            Triangular if t.label == "T" => {
                debug_assert!(partition_equal);
                (
                    Verdict::Redundant,
                    "sector partition identical without T; decomposes into L and B".to_string(),
                )
            }
            Triangular if witnessed => (
                Verdict::Necessary,
                "frozen reference configuration witnesses necessity".to_string(),
            ),
            _ => {
                if reduced_count > full.count() {
                    (
                        Verdict::Necessary,
                        format!(
                            "dropping it splits {} sector(s) into {} on {}x{} cells",
                            full.count(),
                            reduced_count,
                            cells.0,
                            cells.1
                        ),
                    )
                } else {
                    (
                        Verdict::Undetermined,
                        format!(
                            "no sector change observed on {}x{} cells; necessity unresolved",
                            cells.0, cells.1
                        ),
                    )
                }
            }
        };
        verdicts.push(TemplateVerdict { label: t.label.clone(), verdict, note });
    }
    Ok(NecessityReport {
        lattice: code.as_str().to_string(),
        cells,
        n_states,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_section, LatticeCode, LatticeSpec};

    #[test]
    fn c4_config_graph() {
        let s = build_section(&LatticeSpec::rect(LatticeCode::Square, 1, 1)).unwrap();
        let catalog = MoveCatalog::shipped(LatticeCode::Square);
        let g = build_config_graph(&s, &catalog, 100).unwrap();
        assert_eq!(g.states.len(), 2);
        assert_eq!(g.adjacency[0].len(), 1);
        let sectors = krylov_sectors(&g);
        assert_eq!(sectors.count(), 1);
        assert!(sectors.frozen.is_empty());
    }

    #[test]
    fn square_4x4_grid_is_connected() {
        let s = build_section(&LatticeSpec::rect(LatticeCode::Square, 3, 3)).unwrap();
        let catalog = MoveCatalog::shipped(LatticeCode::Square);
        let g = build_config_graph(&s, &catalog, 1000).unwrap();
        assert_eq!(g.states.len(), 36);
        assert_eq!(krylov_sectors(&g).count(), 1);
    }

    #[test]
    fn adjacency_is_symmetric() {
        let s = build_section(&LatticeSpec::rect(LatticeCode::Triangular, 3, 3)).unwrap();
        let catalog = MoveCatalog::shipped(LatticeCode::Triangular);
        let g = build_config_graph(&s, &catalog, 100_000).unwrap();
        for (i, adj) in g.adjacency.iter().enumerate() {
            for &(j, label) in adj {
                assert!(g.adjacency[j].contains(&(i, label)));
            }
        }
    }

    #[test]
    fn t_removal_keeps_triangular_partition() {
        let s = build_section(&LatticeSpec::rect(LatticeCode::Triangular, 3, 4)).unwrap();
        let full = MoveCatalog::shipped(LatticeCode::Triangular);
        let lb = full.without("T");
        let g_full = build_config_graph(&s, &full, 100_000).unwrap();
        let g_lb = build_config_graph(&s, &lb, 100_000).unwrap();
        let s_full = krylov_sectors(&g_full);
        let s_lb = krylov_sectors(&g_lb);
        assert_eq!(s_full.sector_of, s_lb.sector_of);
        assert_eq!(s_full.count(), 1);
    }
}
