//! Quantum dimer models over the matching basis: the V/J plaquette model,
//! the ruby-lattice model built from hexagon, square, and diamond flips, the
//! q-deformed triangular model with its consistency constraints, and the
//! phase-weighted ground state it singles out.

use crate::error::{Error, Result};
use crate::lattice::{LatticeCode, PlanarSection};
use crate::matching::{enumerate_section, Matching};
use crate::moves::{tile_set, MoveCatalog, TileSet};
use nalgebra::{Complex, DMatrix, DVector};
use std::collections::HashMap;

pub type C64 = Complex<f64>;

#[derive(Clone, Copy, Debug)]
pub struct RKParams {
    pub v: f64,
    pub j: f64,
}

impl RKParams {
    pub fn rk(j: f64) -> Self {
        RKParams { v: j, j }
    }

    pub fn at_rk_point(&self) -> bool {
        (self.v - self.j).abs() < 1e-15
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DeformationParams {
    pub q_l: [C64; 3],
    pub q_b: [C64; 3],
}

impl DeformationParams {
    pub fn undeformed() -> Self {
        let one = C64::new(1.0, 0.0);
        DeformationParams { q_l: [one; 3], q_b: [one; 3] }
    }

    /// The rotationally invariant deformation with q_L = exp(2 pi i / 3).
    pub fn phase_deformed() -> Self {
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        DeformationParams { q_l: [w; 3], q_b: [w; 3] }
    }

    /// Product of the three lozenge weights.
    pub fn product(&self) -> C64 {
        self.q_l[0] * self.q_l[1] * self.q_l[2]
    }

    /// Admissible solutions: q_L0 q_L1 q_L2 is a fourth root of unity and
    /// q_Bj = P^2 q_Lj with the sign fixed by P^2.
    pub fn admissible(&self) -> bool {
        let p = self.product();
        let p4 = p * p * p * p;
        if (p4 - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return false;
        }
        let p2 = p * p;
        self.q_l
            .iter()
            .zip(self.q_b.iter())
            .all(|(ql, qb)| (qb - p2 * ql).norm() < 1e-12)
    }
}

/// The three cyclic rotations of the pentagon-relation chain must agree:
/// q_{L,l+1} q_{L,l} q_{B,l+1}^{-1} q_{L,l+2} q_{L,l+1}
///   = q_{L,l+1}^{-1} q_{L,l+2}^{-1} q_{L,l}^{-1}
///   = q_{L,l} q_{L,l+2} q_{B,l+1}.
pub fn check_consistency(d: &DeformationParams) -> Result<bool> {
    if d.q_l.iter().chain(d.q_b.iter()).any(|q| q.norm() < 1e-15) {
        return Err(Error::ZeroWeight);
    }
    let tol = 1e-10;
    for l in 0..3 {
        let ql = |k: usize| d.q_l[(l + k) % 3];
        let qb1 = d.q_b[(l + 1) % 3];
        let a = ql(1) * ql(0) * qb1.inv() * ql(2) * ql(1);
        let b = (ql(1) * ql(2) * ql(0)).inv();
        let c = ql(0) * ql(2) * qb1;
        if (a - b).norm() > tol || (b - c).norm() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One flip-pair projector family: all realizations of a tile instance with
/// deformation weight q. `m1_half` records which alternating half plays the
/// role of the first ket.
#[derive(Clone, Debug)]
pub struct ProjectorTerm {
    pub instance: usize,
    pub q: C64,
    pub m1_half: u8,
    pub label: String,
    pub rotation: usize,
}

impl ProjectorTerm {
    pub fn normalization(&self) -> f64 {
        1.0 / (1.0 + self.q.norm_sqr())
    }
}

pub struct HamiltonianModel {
    pub basis: Vec<Matching>,
    pub index: HashMap<Matching, usize>,
    pub terms: Vec<ProjectorTerm>,
    /// Sparse Hermitian matrix in triplet form (row, col, value), built
    /// deterministically; diagonal entries are merged.
    pub triplets: Vec<(usize, usize, C64)>,
    pub dim: usize,
}

impl HamiltonianModel {
    pub fn matvec(&self, x: &DVector<C64>, out: &mut DVector<C64>) {
        out.fill(C64::new(0.0, 0.0));
        for &(r, c, v) in &self.triplets {
            out[r] += v * x[c];
        }
    }

    pub fn dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, C64::new(0.0, 0.0));
        for &(r, c, v) in &self.triplets {
            m[(r, c)] += v;
        }
        m
    }

    /// Residual norm of each projector term applied to a state vector.
    pub fn per_term_residuals(&self, tiles: &TileSet, psi: &DVector<C64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let inst = &tiles.instances[term.instance];
            let mut worst: f64 = 0.0;
            for (i, m) in self.basis.iter().enumerate() {
                if inst.matched_half(&m.edges) != Some(term.m1_half) {
                    continue;
                }
                let partner = m.edges.xor(&inst.mask);
                let j = self.index[&Matching {
                    edges: partner,
                    section_hash: m.section_hash,
                }];
                let r = (psi[i] - term.q.conj() * psi[j]).norm()
                    / (1.0 + term.q.norm_sqr()).sqrt();
                worst = worst.max(r);
            }
            out.push(worst);
        }
        out
    }
}

fn basis_and_index(section: &PlanarSection, cap: usize) -> Result<(Vec<Matching>, HashMap<Matching, usize>)> {
    let basis = enumerate_section(section, cap)?;
    let index: HashMap<Matching, usize> = basis
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    Ok((basis, index))
}

/// Rotation index of a lozenge or butterfly placement: the direction class of
/// its diagonal chord (lozenge), or the chord class that appears exactly once
/// (butterfly).
fn triangular_rotation(section: &PlanarSection, tiles: &TileSet, instance: usize) -> usize {
    let inst = &tiles.instances[instance];
    let classes: Vec<usize> = inst
        .chords
        .iter()
        .map(|&e| section.edges[e].dir_class)
        .collect();
    if classes.len() == 1 {
        return classes[0];
    }
    let mut counts = [0usize; 8];
    for &c in &classes {
        counts[c] += 1;
    }
    (0..counts.len())
        .find(|&c| counts[c] == 1)
        .expect("butterfly chords have a unique diagonal class")
}

/// Which half of a triangular L/B tile carries the class-(l+2) dimers. The
/// phase-weighted state is annihilated exactly when the first ket is the
/// class-(l+2) half and the second the class-(l+1) half.
fn m1_half_for_rotation(section: &PlanarSection, tiles: &TileSet, instance: usize, l: usize) -> u8 {
    let inst = &tiles.instances[instance];
    let want = (l + 2) % 3;
    for half in 0..2u8 {
        let has = inst.half[half as usize]
            .iter()
            .any(|e| section.edges[e].dir_class == want);
        if has {
            return half;
        }
    }
    unreachable!("one half must carry class l+2")
}

/// Generalized Rokhsar-Kivelson assembly over a move catalog: diagonal
/// V x (number of flippable placements), off-diagonal -J between flip pairs.
pub fn build_rk(
    section: &PlanarSection,
    catalog: &MoveCatalog,
    params: RKParams,
    cap: usize,
) -> Result<HamiltonianModel> {
    let (basis, index) = basis_and_index(section, cap)?;
    let tiles = tile_set(section, catalog);
    let dim = basis.len();
    let mut diag = vec![0.0f64; dim];
    let mut offdiag: Vec<(usize, usize, C64)> = Vec::new();
    let mut terms = Vec::new();
    for (ti, inst) in tiles.instances.iter().enumerate() {
        terms.push(ProjectorTerm {
            instance: ti,
            q: C64::new(1.0, 0.0),
            m1_half: 0,
            label: catalog.templates[inst.template].label.clone(),
            rotation: inst
                .cycle_edges
                .iter()
                .map(|&e| section.edges[e].dir_class)
                .min()
                .unwrap_or(0),
        });
        for (i, m) in basis.iter().enumerate() {
            if let Some(h) = inst.matched_half(&m.edges) {
                diag[i] += params.v;
                if h == 0 {
                    let partner = Matching {
                        edges: m.edges.xor(&inst.mask),
                        section_hash: m.section_hash,
                    };
                    let j = index[&partner];
                    offdiag.push((i, j, C64::new(-params.j, 0.0)));
                    offdiag.push((j, i, C64::new(-params.j, 0.0)));
                }
            }
        }
    }
    let mut triplets: Vec<(usize, usize, C64)> = (0..dim)
        .map(|i| (i, i, C64::new(diag[i], 0.0)))
        .collect();
    triplets.extend(offdiag);
    Ok(HamiltonianModel { basis, index, terms, triplets, dim })
}

/// The ruby-lattice model: hexagon, square, and diamond flip families, each
/// entering as an unnormalized projector pair (V = J).
pub fn build_ruby(section: &PlanarSection, j: f64, cap: usize) -> Result<HamiltonianModel> {
    build_ruby_filtered(section, j, cap, None)
}

/// Same as `build_ruby`, with one template family optionally removed (used
/// for the hexagon-term ablation).
pub fn build_ruby_filtered(
    section: &PlanarSection,
    j: f64,
    cap: usize,
    drop: Option<&str>,
) -> Result<HamiltonianModel> {
    if section.code() != LatticeCode::Ruby {
        return Err(Error::WrongLattice {
            expected: "3,4,6,4".into(),
            found: section.code().as_str().into(),
        });
    }
    let catalog = MoveCatalog::shipped(LatticeCode::Ruby);
    let catalog = match drop {
        Some(label) => catalog.without(label),
        None => catalog,
    };
    build_rk(section, &catalog, RKParams::rk(j), cap)
}

/// q-deformed triangular-lattice model, Lemma-checked against the
/// admissibility constraints. Terms carry the explicit projector
/// normalization 1/(1+|q|^2).
pub fn build_q_triangular(
    section: &PlanarSection,
    d: &DeformationParams,
    j: f64,
    cap: usize,
) -> Result<HamiltonianModel> {
    if section.code() != LatticeCode::Triangular {
        return Err(Error::WrongLattice {
            expected: "3^6".into(),
            found: section.code().as_str().into(),
        });
    }
    if !d.admissible() {
        return Err(Error::InadmissibleDeformation);
    }
    let catalog = MoveCatalog::shipped(LatticeCode::Triangular).without("T");
    let (basis, index) = basis_and_index(section, cap)?;
    let tiles = tile_set(section, &catalog);
    let dim = basis.len();
    let mut terms = Vec::new();
    for (ti, inst) in tiles.instances.iter().enumerate() {
        let label = catalog.templates[inst.template].label.clone();
        let l = triangular_rotation(section, &tiles, ti);
        let q = match label.as_str() {
            "L" => d.q_l[l],
            "B" => d.q_b[l],
            other => unreachable!("unexpected template {other}"),
        };
        let m1_half = m1_half_for_rotation(section, &tiles, ti, l);
        terms.push(ProjectorTerm { instance: ti, q, m1_half, label, rotation: l });
    }
    let mut triplets: Vec<(usize, usize, C64)> = Vec::new();
    let mut diag = vec![C64::new(0.0, 0.0); dim];
    for term in &terms {
        let inst = &tiles.instances[term.instance];
        let norm = term.normalization() * j;
        for (i, m) in basis.iter().enumerate() {
            let h = match inst.matched_half(&m.edges) {
                Some(h) => h,
                None => continue,
            };
            if h != term.m1_half {
                continue;
            }
            let partner = Matching {
                edges: m.edges.xor(&inst.mask),
                section_hash: m.section_hash,
            };
            let jdx = index[&partner];
            // (|m1> - q |m2>)(<m1| - qbar <m2|) / (1 + |q|^2)
            diag[i] += C64::new(norm, 0.0);
            diag[jdx] += C64::new(norm * term.q.norm_sqr(), 0.0);
            triplets.push((i, jdx, -term.q.conj() * norm));
            triplets.push((jdx, i, -term.q * norm));
        }
    }
    let mut all: Vec<(usize, usize, C64)> = (0..dim).map(|i| (i, i, diag[i])).collect();
    all.extend(triplets);
    Ok(HamiltonianModel { basis, index, terms, triplets: all, dim })
}

/// The phase-weighted superposition singled out by the rotationally
/// invariant deformation: amplitude exp(i pi/3 n1 + i 2 pi/3 n2) / sqrt(N),
/// with n1 the number of dimers at 120 degrees from horizontal and n2 the
/// number at 60 degrees.
pub struct WeightedState {
    pub amplitudes: DVector<C64>,
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
}

pub fn weighted_ground_state(section: &PlanarSection, basis: &[Matching]) -> WeightedState {
    let classes = section.angle_classes();
    let class_of = |angle: i32| classes.iter().position(|&a| a == angle).unwrap_or(usize::MAX);
    let c60 = class_of(60);
    let c120 = class_of(120);
    let n = basis.len();
    let mut n1 = Vec::with_capacity(n);
    let mut n2 = Vec::with_capacity(n);
    let mut amps = DVector::from_element(n, C64::new(0.0, 0.0));
    let norm = 1.0 / (n as f64).sqrt();
    for (i, m) in basis.iter().enumerate() {
        let mut k1 = 0;
        let mut k2 = 0;
        for e in m.edges.iter() {
            let c = section.edges[e].dir_class;
            if c == c120 {
                k1 += 1;
            } else if c == c60 {
                k2 += 1;
            }
        }
        n1.push(k1);
        n2.push(k2);
        let phase = std::f64::consts::PI / 3.0 * k1 as f64
            + 2.0 * std::f64::consts::PI / 3.0 * k2 as f64;
        amps[i] = C64::from_polar(norm, phase);
    }
    WeightedState { amplitudes: amps, n1, n2 }
}

/// Lowest eigenvalues of the model. Dense decomposition up to dimension
/// 4096; Lanczos with full reorthogonalization above.
pub fn lowest_eigenvalues(model: &HamiltonianModel, k: usize) -> Vec<f64> {
    if model.dim <= 4096 {
        let m = model.dense();
        let eig = m.symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.truncate(k.max(1));
        vals
    } else {
        lanczos_lowest(model, k.max(1), 1e-8, 400)
    }
}

/// Ground-state degeneracy: eigenvalues below `tol` above the minimum.
pub fn zero_energy_degeneracy(model: &HamiltonianModel, tol: f64) -> usize {
    let k = model.dim.min(64);
    let vals = lowest_eigenvalues(model, k);
    vals.iter().filter(|&&v| v < tol).count()
}

/// Lanczos iteration with full reorthogonalization for the lowest k
/// eigenvalues of a Hermitian operator.
pub fn lanczos_lowest(model: &HamiltonianModel, k: usize, tol: f64, max_iter: usize) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let n = model.dim;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut v = DVector::from_fn(n, |_, _| C64::new(rng.gen::<f64>() - 0.5, 0.0));
    v /= C64::new(v.norm(), 0.0);
    let mut basis: Vec<DVector<C64>> = vec![v.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = DVector::from_element(n, C64::new(0.0, 0.0));
    let mut prev: Vec<f64> = Vec::new();
    for it in 0..max_iter.min(n) {
        model.matvec(&basis[it], &mut w);
        let alpha = basis[it].dotc(&w).re;
        alphas.push(alpha);
        let mut r = w.clone();
        // full reorthogonalization
        for b in &basis {
            let c = b.dotc(&r);
            r -= b * c;
        }
        for b in &basis {
            let c = b.dotc(&r);
            r -= b * c;
        }
        let beta = r.norm();
        // converged tridiagonal eigenvalues?
        let vals = tridiag_eigenvalues(&alphas, &betas);
        let lowest: Vec<f64> = vals.iter().copied().take(k).collect();
        if beta < 1e-12 {
            return lowest;
        }
        if prev.len() >= k
            && lowest.len() >= k
            && lowest
                .iter()
                .zip(prev.iter())
                .all(|(a, b)| (a - b).abs() < tol)
        {
            return lowest;
        }
        prev = lowest;
        betas.push(beta);
        basis.push(r / C64::new(beta, 0.0));
    }
    tridiag_eigenvalues(&alphas, &betas).into_iter().take(k).collect()
}

fn tridiag_eigenvalues(alphas: &[f64], betas: &[f64]) -> Vec<f64> {
    let m = alphas.len();
    let mut t = DMatrix::from_element(m, m, 0.0f64);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let mut vals: Vec<f64> = t.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}
