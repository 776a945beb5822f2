//! Unit-cell data for the eleven Archimedean lattices.
//!
//! Each lattice is described by two lattice vectors, a list of sublattice
//! sites, and a list of edge templates connecting site `si` of cell (0,0) to
//! site `sj` of cell (di,dj). All edges have unit length; coordinates are only
//! used to derive the rotation system and for SVG output.

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeCode {
    Square,        // 4^4
    Honeycomb,     // 6^3
    Triangular,    // 3^6
    TruncSquare,   // 4,8^2
    Star,          // 3,12^2
    TruncTrihex,   // 4,6,12
    Kagome,        // 3,6,3,6
    Ruby,          // 3,4,6,4
    ElongTri,      // 3^3,4^2
    SnubSquare,    // 3^2,4,3,4
    MapleLeaf,     // 3^4,6
}

pub const ALL_CODES: [LatticeCode; 11] = [
    LatticeCode::Square,
    LatticeCode::Honeycomb,
    LatticeCode::Triangular,
    LatticeCode::TruncSquare,
    LatticeCode::Star,
    LatticeCode::TruncTrihex,
    LatticeCode::Kagome,
    LatticeCode::Ruby,
    LatticeCode::ElongTri,
    LatticeCode::SnubSquare,
    LatticeCode::MapleLeaf,
];

impl LatticeCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LatticeCode::Square => "4^4",
            LatticeCode::Honeycomb => "6^3",
            LatticeCode::Triangular => "3^6",
            LatticeCode::TruncSquare => "4,8^2",
            LatticeCode::Star => "3,12^2",
            LatticeCode::TruncTrihex => "4,6,12",
            LatticeCode::Kagome => "3,6,3,6",
            LatticeCode::Ruby => "3,4,6,4",
            LatticeCode::ElongTri => "3^3,4^2",
            LatticeCode::SnubSquare => "3^2,4,3,4",
            LatticeCode::MapleLeaf => "3^4,6",
        }
    }

    pub fn parse(s: &str) -> Option<LatticeCode> {
        ALL_CODES.iter().copied().find(|c| c.as_str() == s)
    }

    /// Polygon sizes appearing in the vertex-configuration code.
    pub fn face_sizes(&self) -> &'static [usize] {
        match self {
            LatticeCode::Square => &[4],
            LatticeCode::Honeycomb => &[6],
            LatticeCode::Triangular => &[3],
            LatticeCode::TruncSquare => &[4, 8],
            LatticeCode::Star => &[3, 12],
            LatticeCode::TruncTrihex => &[4, 6, 12],
            LatticeCode::Kagome => &[3, 6],
            LatticeCode::Ruby => &[3, 4, 6],
            LatticeCode::ElongTri => &[3, 4],
            LatticeCode::SnubSquare => &[3, 4],
            LatticeCode::MapleLeaf => &[3, 6],
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EdgeTemplate {
    pub si: usize,
    pub sj: usize,
    pub di: i32,
    pub dj: i32,
}

#[derive(Clone, Debug)]
pub struct LatticeDef {
    pub code: LatticeCode,
    pub a1: [f64; 2],
    pub a2: [f64; 2],
    pub sites: Vec<[f64; 2]>,
    pub edges: Vec<EdgeTemplate>,
    /// Quantized edge angles (degrees mod 180) per template, and the distinct
    /// sorted angle list defining the direction classes.
    pub edge_angles: Vec<i32>,
    pub angle_classes: Vec<i32>,
}

fn e(si: usize, sj: usize, di: i32, dj: i32) -> EdgeTemplate {
    EdgeTemplate { si, sj, di, dj }
}

fn polar(r: f64, deg: f64) -> [f64; 2] {
    let a = deg * PI / 180.0;
    [r * a.cos(), r * a.sin()]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn build(code: LatticeCode, a1: [f64; 2], a2: [f64; 2], sites: Vec<[f64; 2]>, edges: Vec<EdgeTemplate>) -> LatticeDef {
    let mut edge_angles = Vec::with_capacity(edges.len());
    for t in &edges {
        let p = sites[t.si];
        let q = add(
            sites[t.sj],
            [
                t.di as f64 * a1[0] + t.dj as f64 * a2[0],
                t.di as f64 * a1[1] + t.dj as f64 * a2[1],
            ],
        );
        let mut deg = ((q[1] - p[1]).atan2(q[0] - p[0]) * 180.0 / PI).round() as i32;
        deg = deg.rem_euclid(180);
        edge_angles.push(deg);
    }
    let mut angle_classes: Vec<i32> = edge_angles.clone();
    angle_classes.sort_unstable();
    angle_classes.dedup();
    LatticeDef { code, a1, a2, sites, edges, edge_angles, angle_classes }
}

pub fn lattice_def(code: LatticeCode) -> LatticeDef {
    let s3 = 3f64.sqrt();
    match code {
        LatticeCode::Square => build(
            code,
            [1.0, 0.0],
            [0.0, 1.0],
            vec![[0.0, 0.0]],
            vec![e(0, 0, 1, 0), e(0, 0, 0, 1)],
        ),
        LatticeCode::Triangular => build(
            code,
            [1.0, 0.0],
            [0.5, s3 / 2.0],
            vec![[0.0, 0.0]],
            vec![e(0, 0, 1, 0), e(0, 0, 0, 1), e(0, 0, -1, 1)],
        ),
        LatticeCode::Honeycomb => build(
            code,
            [s3, 0.0],
            [s3 / 2.0, 1.5],
            vec![[0.0, 0.0], [0.0, 1.0]],
            vec![e(0, 1, 0, 0), e(1, 0, 0, 1), e(1, 0, -1, 1)],
        ),
        LatticeCode::TruncSquare => {
            let a = 1.0 / 2f64.sqrt();
            build(
                code,
                [1.0 + 2f64.sqrt(), 0.0],
                [0.0, 1.0 + 2f64.sqrt()],
                vec![[a, 0.0], [0.0, a], [-a, 0.0], [0.0, -a]],
                vec![
                    e(0, 1, 0, 0),
                    e(1, 2, 0, 0),
                    e(2, 3, 0, 0),
                    e(3, 0, 0, 0),
                    e(0, 2, 1, 0),
                    e(1, 3, 0, 1),
                ],
            )
        }
        LatticeCode::Star => {
            let t = 1.0 / s3;
            let s = 2.0 / s3 + 1.0;
            let d = 2.0 + s3;
            let b = [0.0, s];
            build(
                code,
                [d, 0.0],
                [d / 2.0, 1.5 * s],
                vec![
                    polar(t, 90.0),
                    polar(t, 210.0),
                    polar(t, 330.0),
                    add(b, polar(t, 30.0)),
                    add(b, polar(t, 150.0)),
                    add(b, polar(t, 270.0)),
                ],
                vec![
                    e(0, 1, 0, 0),
                    e(1, 2, 0, 0),
                    e(2, 0, 0, 0),
                    e(3, 4, 0, 0),
                    e(4, 5, 0, 0),
                    e(5, 3, 0, 0),
                    e(0, 5, 0, 0),
                    e(3, 1, 0, 1),
                    e(4, 2, -1, 1),
                ],
            )
        }
        LatticeCode::TruncTrihex => {
            let r = 1.0 / (2.0 * (PI / 12.0).sin());
            let d = 3.0 + s3;
            let sites: Vec<[f64; 2]> = (0..12).map(|k| polar(r, 15.0 + 30.0 * k as f64)).collect();
            let mut edges: Vec<EdgeTemplate> = (0..12).map(|k| e(k, (k + 1) % 12, 0, 0)).collect();
            edges.extend_from_slice(&[
                e(0, 5, 1, 0),
                e(11, 6, 1, 0),
                e(2, 7, 0, 1),
                e(1, 8, 0, 1),
                e(4, 9, -1, 1),
                e(3, 10, -1, 1),
            ]);
            build(code, [d, 0.0], [d / 2.0, d * s3 / 2.0], sites, edges)
        }
        LatticeCode::Kagome => build(
            code,
            [2.0, 0.0],
            [1.0, s3],
            vec![[0.0, 0.0], [1.0, 0.0], [0.5, s3 / 2.0]],
            vec![
                e(0, 1, 0, 0),
                e(0, 2, 0, 0),
                e(1, 2, 0, 0),
                e(1, 0, 1, 0),
                e(2, 0, 0, 1),
                e(1, 2, 1, -1),
            ],
        ),
        LatticeCode::Ruby => {
            let d = 1.0 + s3;
            let sites: Vec<[f64; 2]> = (0..6).map(|k| polar(1.0, 30.0 + 60.0 * k as f64)).collect();
            let mut edges: Vec<EdgeTemplate> = (0..6).map(|k| e(k, (k + 1) % 6, 0, 0)).collect();
            edges.extend_from_slice(&[
                e(0, 2, 1, 0),
                e(5, 3, 1, 0),
                e(1, 3, 0, 1),
                e(0, 4, 0, 1),
                e(2, 4, -1, 1),
                e(1, 5, -1, 1),
            ]);
            build(code, [d, 0.0], [d / 2.0, d * s3 / 2.0], sites, edges)
        }
        LatticeCode::ElongTri => build(
            code,
            [1.0, 0.0],
            [0.5, 1.0 + s3 / 2.0],
            vec![[0.0, 0.0], [0.0, 1.0]],
            vec![
                e(0, 1, 0, 0),
                e(0, 0, 1, 0),
                e(1, 1, 1, 0),
                e(1, 0, 0, 1),
                e(1, 0, -1, 1),
            ],
        ),
        LatticeCode::SnubSquare => {
            let g = 2.0 * (PI / 12.0).cos();
            let r = 2f64.sqrt() / 2.0;
            let sites: Vec<[f64; 2]> = (0..4).map(|k| polar(r, 30.0 + 90.0 * k as f64)).collect();
            build(
                code,
                [g, 0.0],
                [0.0, g],
                sites,
                vec![
                    e(0, 1, 0, 0),
                    e(1, 2, 0, 0),
                    e(2, 3, 0, 0),
                    e(3, 0, 0, 0),
                    e(0, 1, 1, 0),
                    e(3, 2, 1, 0),
                    e(0, 2, 1, 0),
                    e(1, 2, 0, 1),
                    e(0, 3, 0, 1),
                    e(1, 3, 0, 1),
                ],
            )
        }
        LatticeCode::MapleLeaf => {
            let d = 7f64.sqrt();
            let phi = 60.0 - (s3 / 5.0).atan() * 180.0 / PI;
            let sites: Vec<[f64; 2]> = (0..6).map(|k| polar(1.0, phi + 60.0 * k as f64)).collect();
            let mut edges: Vec<EdgeTemplate> = (0..6).map(|k| e(k, (k + 1) % 6, 0, 0)).collect();
            edges.extend_from_slice(&[
                // +a1 rhombus: two sides and the short diagonal
                e(0, 2, 1, 0),
                e(5, 3, 1, 0),
                e(5, 2, 1, 0),
                // +a2
                e(1, 3, 0, 1),
                e(0, 4, 0, 1),
                e(0, 3, 0, 1),
                // +a2-a1
                e(2, 4, -1, 1),
                e(1, 5, -1, 1),
                e(1, 4, -1, 1),
            ]);
            build(code, [d, 0.0], [d / 2.0, d * s3 / 2.0], sites, edges)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every edge template must join points at unit distance.
    #[test]
    fn all_edges_unit_length() {
        for code in ALL_CODES {
            let def = lattice_def(code);
            for t in &def.edges {
                let p = def.sites[t.si];
                let shift = [
                    t.di as f64 * def.a1[0] + t.dj as f64 * def.a2[0],
                    t.di as f64 * def.a1[1] + t.dj as f64 * def.a2[1],
                ];
                let q = add(def.sites[t.sj], shift);
                let d = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                assert!(
                    (d - 1.0).abs() < 1e-9,
                    "{}: edge {:?} has length {}",
                    code.as_str(),
                    t,
                    d
                );
            }
        }
    }

    /// Degree-regularity of the infinite lattice: the sum over templates of
    /// endpoint incidences must give the expected coordination per site.
    #[test]
    fn coordination_numbers() {
        let expected = [
            (LatticeCode::Square, 4),
            (LatticeCode::Honeycomb, 3),
            (LatticeCode::Triangular, 6),
            (LatticeCode::TruncSquare, 3),
            (LatticeCode::Star, 3),
            (LatticeCode::TruncTrihex, 3),
            (LatticeCode::Kagome, 4),
            (LatticeCode::Ruby, 4),
            (LatticeCode::ElongTri, 5),
            (LatticeCode::SnubSquare, 5),
            (LatticeCode::MapleLeaf, 5),
        ];
        for (code, deg) in expected {
            let def = lattice_def(code);
            let mut inc = vec![0usize; def.sites.len()];
            for t in &def.edges {
                inc[t.si] += 1;
                inc[t.sj] += 1;
            }
            for (s, n) in inc.iter().enumerate() {
                assert_eq!(*n, deg, "{} site {}", code.as_str(), s);
            }
        }
    }
}
