//! Oriented torus, Kitaev and Potts Hamiltonians, and the vertex-label
//! mapping onto two decoupled transverse-field Potts models.
//!
//! Orientation: horizontal edge h(x, y) points from (x, y) to (x+1, y) and
//! vertical edge v(x, y) from (x, y) to (x, y+1). Plaquette (x, y) has its
//! lower-left corner at vertex (x, y).

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::qudit::{weyl_product, SparseOperator};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusLattice {
    l: usize,
}

pub fn build_torus(l: usize) -> Result<TorusLattice> {
    if l < 2 || l % 2 != 0 {
        return Err(Error::InvalidLatticeSize(l));
    }
    Ok(TorusLattice { l })
}

impl TorusLattice {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn num_vertices(&self) -> usize {
        self.l * self.l
    }

    pub fn num_plaquettes(&self) -> usize {
        self.l * self.l
    }

    pub fn num_edges(&self) -> usize {
        2 * self.l * self.l
    }

    fn wrap(&self, c: i64) -> usize {
        c.rem_euclid(self.l as i64) as usize
    }

    pub fn vertex(&self, x: i64, y: i64) -> usize {
        self.wrap(y) * self.l + self.wrap(x)
    }

    pub fn coords(&self, v: usize) -> (usize, usize) {
        (v % self.l, v / self.l)
    }

    pub fn h_edge(&self, x: i64, y: i64) -> usize {
        2 * self.vertex(x, y)
    }

    pub fn v_edge(&self, x: i64, y: i64) -> usize {
        2 * self.vertex(x, y) + 1
    }

    /// (tail, head) of an edge.
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        let tail = e / 2;
        let (x, y) = self.coords(tail);
        let (x, y) = (x as i64, y as i64);
        let head = if e % 2 == 0 {
            self.vertex(x + 1, y)
        } else {
            self.vertex(x, y + 1)
        };
        (tail, head)
    }

    /// Edges at a vertex in the order east, north, west, south.
    pub fn vertex_edges(&self, v: usize) -> [usize; 4] {
        let (x, y) = self.coords(v);
        let (x, y) = (x as i64, y as i64);
        [
            self.h_edge(x, y),
            self.v_edge(x, y),
            self.h_edge(x - 1, y),
            self.v_edge(x, y - 1),
        ]
    }

    /// Edges of a plaquette: bottom, right, top, left.
    pub fn plaquette_edges(&self, p: usize) -> [usize; 4] {
        let (x, y) = self.coords(p);
        let (x, y) = (x as i64, y as i64);
        [
            self.h_edge(x, y),
            self.v_edge(x + 1, y),
            self.h_edge(x, y + 1),
            self.v_edge(x, y),
        ]
    }

    /// Vertices with x + y even and odd.
    pub fn sublattices(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.num_vertices()).partition(|&v| {
            let (x, y) = self.coords(v);
            (x + y) % 2 == 0
        })
    }

    /// Perpendicular edge pairs meeting at a vertex, the Potts bonds of the
    /// full model. Each maps to a diagonal bond of one sublattice.
    pub fn corner_pairs(&self) -> Vec<CornerPair> {
        let mut out = Vec::with_capacity(4 * self.num_vertices());
        for v in 0..self.num_vertices() {
            let e = self.vertex_edges(v);
            for k in 0..4 {
                let a = e[k];
                let b = e[(k + 1) % 4];
                out.push(CornerPair {
                    vertex: v,
                    a,
                    b,
                    eps_a: self.orientation_sign(a, v),
                    eps_b: self.orientation_sign(b, v),
                });
            }
        }
        out
    }

    /// +1 if `v` is the head of `e`, −1 if it is the tail.
    fn orientation_sign(&self, e: usize, v: usize) -> i64 {
        let (tail, head) = self.edge_endpoints(e);
        debug_assert!(tail == v || head == v);
        if head == v {
            1
        } else {
            -1
        }
    }

    fn other_end(&self, e: usize, v: usize) -> usize {
        let (tail, head) = self.edge_endpoints(e);
        if tail == v {
            head
        } else {
            tail
        }
    }

    /// Value of edge `e` in the state Π_i A_i^{r_i} |0…0⟩.
    pub fn label_edge_value(&self, r: &[u32], e: usize, d: u32) -> u32 {
        let (tail, head) = self.edge_endpoints(e);
        (r[head] + d - r[tail] % d) % d
    }

    /// Basis index (edge digits, edge 0 least significant) of Π_i A_i^{r_i}|0…0⟩.
    pub fn label_state_index(&self, r: &[u32], d: u32) -> usize {
        let d = d as usize;
        (0..self.num_edges())
            .rev()
            .fold(0usize, |acc, e| acc * d + self.label_edge_value(r, e, d as u32) as usize)
    }

    /// The two decoupled Potts graphs with diagonal bonds u → u+(1,1) and
    /// u → u+(1,−1). For L = 2 each graph is two sites joined by four bonds.
    pub fn sublattice_graphs(&self) -> [SublatticeGraph; 2] {
        let (a, b) = self.sublattices();
        [a, b].map(|verts| {
            let index = |v: usize| verts.iter().position(|&u| u == v).unwrap();
            let mut bonds = Vec::with_capacity(2 * verts.len());
            for (i, &u) in verts.iter().enumerate() {
                let (x, y) = self.coords(u);
                let (x, y) = (x as i64, y as i64);
                bonds.push((i, index(self.vertex(x + 1, y + 1))));
                bonds.push((i, index(self.vertex(x + 1, y - 1))));
            }
            SublatticeGraph {
                vertices: verts.clone(),
                graph: SiteGraph {
                    num_sites: verts.len(),
                    bonds,
                },
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CornerPair {
    pub vertex: usize,
    pub a: usize,
    pub b: usize,
    pub eps_a: i64,
    pub eps_b: i64,
}

impl CornerPair {
    /// The sublattice vertices (u_a, u_b) such that σ_a^{ε_a} (σ_b^{ε_b})†
    /// acts on vertex labels as Ẑ_{u_b} Ẑ†_{u_a}.
    pub fn mapped_bond(&self, lat: &TorusLattice) -> (usize, usize) {
        (lat.other_end(self.a, self.vertex), lat.other_end(self.b, self.vertex))
    }
}

#[derive(Debug, Clone)]
pub struct SublatticeGraph {
    /// Torus vertex of each graph site.
    pub vertices: Vec<usize>,
    pub graph: SiteGraph,
}

/// Sites joined by bonds; parallel bonds are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteGraph {
    pub num_sites: usize,
    pub bonds: Vec<(usize, usize)>,
}

impl SiteGraph {
    pub fn new(num_sites: usize, bonds: Vec<(usize, usize)>) -> Self {
        SiteGraph { num_sites, bonds }
    }

    pub fn is_connected(&self) -> bool {
        if self.num_sites == 0 {
            return false;
        }
        let mut seen = vec![false; self.num_sites];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for &(i, j) in &self.bonds {
                let next = if i == s {
                    j
                } else if j == s {
                    i
                } else {
                    continue;
                };
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Open L1 × L2 grid, sites numbered row by row.
    pub fn open_grid(l1: usize, l2: usize) -> Self {
        let mut bonds = Vec::new();
        for y in 0..l2 {
            for x in 0..l1 {
                let s = y * l1 + x;
                if x + 1 < l1 {
                    bonds.push((s, s + 1));
                }
                if y + 1 < l2 {
                    bonds.push((s, s + l1));
                }
            }
        }
        SiteGraph::new(l1 * l2, bonds)
    }

    /// Periodic L1 × L2 grid with a +x and a +y bond at every site; for a
    /// side of length 2 the wrapped bonds double the open ones.
    pub fn periodic_grid(l1: usize, l2: usize) -> Self {
        let mut bonds = Vec::with_capacity(2 * l1 * l2);
        for y in 0..l2 {
            for x in 0..l1 {
                let s = y * l1 + x;
                bonds.push((s, y * l1 + (x + 1) % l1));
                bonds.push((s, ((y + 1) % l2) * l1 + x));
            }
        }
        bonds.retain(|&(a, b)| a != b);
        SiteGraph::new(l1 * l2, bonds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub j: f64,
    pub k: f64,
    pub lambda: f64,
}

impl Couplings {
    pub fn new(j: f64, k: f64, lambda: f64) -> Self {
        Couplings { j, k, lambda }
    }

    /// Small-coupling parameter 2λ/(9J).
    pub fn x(&self) -> Option<f64> {
        (self.j != 0.0).then(|| 2.0 * self.lambda / (9.0 * self.j))
    }

    /// Large-coupling parameter J/(2λ).
    pub fn h(&self) -> Option<f64> {
        (self.lambda != 0.0).then(|| self.j / (2.0 * self.lambda))
    }
}

/// Vertex operators A_s and plaquette operators B_p.
pub fn stabilizers(
    lat: &TorusLattice,
    d: u32,
) -> Result<(Vec<SparseOperator>, Vec<SparseOperator>)> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let n = lat.num_edges();
    let mut stars = Vec::with_capacity(lat.num_vertices());
    for v in 0..lat.num_vertices() {
        // σ_x on inward edges, σ_x† on outward edges
        let [e, nn, w, s] = lat.vertex_edges(v);
        stars.push(weyl_product(
            n,
            d,
            &[(e, -1, 0), (nn, -1, 0), (w, 1, 0), (s, 1, 0)],
        )?);
    }
    let mut plaquettes = Vec::with_capacity(lat.num_plaquettes());
    for p in 0..lat.num_plaquettes() {
        // σ_z along the counterclockwise direction, σ_z† against it
        let [bottom, right, top, left] = lat.plaquette_edges(p);
        plaquettes.push(weyl_product(
            n,
            d,
            &[(bottom, 0, 1), (right, 0, 1), (top, 0, -1), (left, 0, -1)],
        )?);
    }
    Ok((stars, plaquettes))
}

#[derive(Debug, Clone)]
pub struct StringOperators {
    pub tz1: SparseOperator,
    pub tz2: SparseOperator,
    pub tx1: SparseOperator,
    pub tx2: SparseOperator,
}

/// Non-contractible loops: T_z1 along the row y = 0, T_z2 along the column
/// x = 0, and the dual loops T_x1 (crossing the column) and T_x2 (crossing
/// the row). T_z1 and T_x1 share exactly one edge, as do T_z2 and T_x2.
pub fn string_operators(lat: &TorusLattice, d: u32) -> Result<StringOperators> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let n = lat.num_edges();
    let l = lat.l() as i64;
    let tz1: Vec<_> = (0..l).map(|x| (lat.h_edge(x, 0), 0, 1)).collect();
    let tz2: Vec<_> = (0..l).map(|y| (lat.v_edge(0, y), 0, 1)).collect();
    let tx1: Vec<_> = (0..l).map(|y| (lat.h_edge(0, y), 1, 0)).collect();
    let tx2: Vec<_> = (0..l).map(|x| (lat.v_edge(x, 0), 1, 0)).collect();
    Ok(StringOperators {
        tz1: weyl_product(n, d, &tz1)?,
        tz2: weyl_product(n, d, &tz2)?,
        tx1: weyl_product(n, d, &tx1)?,
        tx2: weyl_product(n, d, &tx2)?,
    })
}

fn plus_dagger(op: &SparseOperator) -> SparseOperator {
    op.add(&op.dagger())
}

/// −J Σ_s (A_s + A_s†) − K Σ_p (B_p + B_p†).
pub fn kitaev_hamiltonian(lat: &TorusLattice, d: u32, j: f64, k: f64) -> Result<SparseOperator> {
    let (stars, plaquettes) = stabilizers(lat, d)?;
    let mut h = SparseOperator::zero(lat.num_edges(), d);
    let mj = Cyclo::from_f64(d, -j);
    let mk = Cyclo::from_f64(d, -k);
    for a in &stars {
        h = h.add(&plus_dagger(a).scale(&mj));
    }
    for b in &plaquettes {
        h = h.add(&plus_dagger(b).scale(&mk));
    }
    Ok(h)
}

/// Potts interaction −(1/2d) Σ_pairs Σ_r [P^r + (P†)^r] over corner pairs,
/// P = σ_z,a^{ε_a} (σ_z,b^{ε_b})†. At J = K = 0 the ground energy is −λ per
/// corner pair, i.e. −4λN.
pub fn potts_hamiltonian(lat: &TorusLattice, d: u32) -> Result<SparseOperator> {
    let n = lat.num_edges();
    let mut h = SparseOperator::zero(n, d);
    for cp in lat.corner_pairs() {
        let p = weyl_product(n, d, &[(cp.a, 0, cp.eps_a), (cp.b, 0, -cp.eps_b)])?;
        let pd = p.dagger();
        for r in 0..d {
            h = h.add(&p.pow(r)).add(&pd.pow(r));
        }
    }
    Ok(h.scale(&Cyclo::from_ratio(d, -1, 2 * d as i64)))
}

pub fn build_full_hamiltonian(lat: &TorusLattice, d: u32, c: &Couplings) -> Result<SparseOperator> {
    let kit = kitaev_hamiltonian(lat, d, c.j, c.k)?;
    let potts = potts_hamiltonian(lat, d)?;
    Ok(kit.add(&potts.scale(&Cyclo::from_f64(d, c.lambda))))
}

/// Transverse-field Potts model −J Σ (X̂ + X̂†) − (λ/3) Σ_bonds Σ_r [(Ẑ_i Ẑ_j†)^r + h.c.].
pub fn build_mapped_hamiltonian(graph: &SiteGraph, j: f64, lambda: f64) -> Result<SparseOperator> {
    let j = BigRational::from_float(j).ok_or_else(|| Error::InvalidArgument("J".into()))?;
    let l = BigRational::from_float(lambda).ok_or_else(|| Error::InvalidArgument("lambda".into()))?;
    mapped_hamiltonian_exact(graph, &j, &l)
}

pub fn mapped_hamiltonian_exact(
    graph: &SiteGraph,
    j: &BigRational,
    lambda: &BigRational,
) -> Result<SparseOperator> {
    if !graph.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let d = 3;
    let n = graph.num_sites;
    let mut field = SparseOperator::zero(n, d);
    for i in 0..n {
        field = field.add(&plus_dagger(&weyl_product(n, d, &[(i, 1, 0)])?));
    }
    let mut bonds = SparseOperator::zero(n, d);
    for &(i, k) in &graph.bonds {
        if i >= n || k >= n {
            return Err(Error::SiteOutOfRange {
                site: i.max(k),
                num_sites: n,
            });
        }
        let p = weyl_product(n, d, &[(i, 0, 1), (k, 0, -1)])?;
        let pd = p.dagger();
        for r in 0..d {
            bonds = bonds.add(&p.pow(r)).add(&pd.pow(r));
        }
    }
    let mj = Cyclo::from_rational(d, -j.clone());
    let ml = Cyclo::from_rational(d, -lambda / BigRational::from_integer(3.into()));
    Ok(field.scale(&mj).add(&bonds.scale(&ml)))
}

/// Exact per-graph constants: the Potts term on a bond is −2λ/3 plus
/// −(2λ/3)(Ẑ_i Ẑ_j† + h.c.).
pub fn mapped_bond_constant(lambda: &BigRational) -> BigRational {
    -lambda * BigRational::new(2.into(), 3.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_counts() {
        let lat = build_torus(4).unwrap();
        assert_eq!(lat.num_vertices(), 16);
        assert_eq!(lat.num_edges(), 32);
        let mut degree = vec![0; 16];
        for e in 0..32 {
            let (t, h) = lat.edge_endpoints(e);
            degree[t] += 1;
            degree[h] += 1;
        }
        assert!(degree.iter().all(|&g| g == 4));
        assert!(build_torus(3).is_err());
        assert!(build_torus(0).is_err());
    }

    #[test]
    fn sublattice_graphs_l2() {
        let lat = build_torus(2).unwrap();
        let [a, b] = lat.sublattice_graphs();
        assert_eq!(a.vertices.len(), 2);
        assert_eq!(b.vertices.len(), 2);
        assert_eq!(a.graph.bonds.len(), 4);
        assert!(a.graph.bonds.iter().all(|&(i, j)| i != j));
    }

    #[test]
    fn corner_pairs_land_on_sublattice_bonds() {
        let lat = build_torus(4).unwrap();
        let (a, _) = lat.sublattices();
        for cp in lat.corner_pairs() {
            let (ua, ub) = cp.mapped_bond(&lat);
            assert_eq!(a.contains(&ua), a.contains(&ub));
            let (xa, ya) = lat.coords(ua);
            let (xb, yb) = lat.coords(ub);
            let dx = (xa as i64 - xb as i64).rem_euclid(4);
            let dy = (ya as i64 - yb as i64).rem_euclid(4);
            assert!(matches!(dx, 1 | 3) && matches!(dy, 1 | 3));
        }
    }

    #[test]
    fn mapped_rejects_disconnected() {
        let g = SiteGraph::new(3, vec![(0, 1)]);
        assert!(matches!(
            build_mapped_hamiltonian(&g, 1.0, 1.0),
            Err(Error::DisconnectedGraph)
        ));
    }
}
