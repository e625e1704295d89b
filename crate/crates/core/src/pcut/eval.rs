//! Evaluation of H_eff on clusters.
//!
//! Index sequences from the coefficient table are stored reversed in a trie
//! and applied right to left to sparse integer states. Configurations pack
//! one label in {0, 1, 2} per site into two bits of a `u64`.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::flow::{order_sign, CoeffTable};
use crate::lattice::SiteGraph;

pub type Config = u64;
pub type State = HashMap<Config, i128>;

pub const MAX_SITES: usize = 32;

#[inline]
pub fn label(cfg: Config, site: usize) -> u32 {
    ((cfg >> (2 * site)) & 3) as u32
}

#[inline]
pub fn with_label(cfg: Config, site: usize, value: u32) -> Config {
    (cfg & !(3 << (2 * site))) | ((value as u64) << (2 * site))
}

/// A cluster Hilbert space on which every T_n maps basis configurations to
/// sums of basis configurations with unit coefficients.
pub trait QpSystem: Sync {
    fn num_sites(&self) -> usize;
    fn apply_t(&self, n: i8, cfg: Config, emit: &mut dyn FnMut(Config));
    fn quasiparticles(&self, cfg: Config) -> i32;
}

/// Transverse-field Potts bonds in the X eigenbasis.
#[derive(Debug, Clone)]
pub struct SmallSystem {
    num_sites: usize,
    bonds: Vec<(usize, usize)>,
}

impl SmallSystem {
    pub fn new(graph: &SiteGraph) -> Self {
        assert!(graph.num_sites <= MAX_SITES);
        SmallSystem {
            num_sites: graph.num_sites,
            bonds: graph.bonds.clone(),
        }
    }
}

impl QpSystem for SmallSystem {
    fn num_sites(&self) -> usize {
        self.num_sites
    }

    fn apply_t(&self, n: i8, cfg: Config, emit: &mut dyn FnMut(Config)) {
        let nz = |a: u32| (a != 0) as i8;
        for &(i, j) in &self.bonds {
            let (a, b) = (label(cfg, i), label(cfg, j));
            for s in [1, 2] {
                let (na, nb) = ((a + 3 - s) % 3, (b + s) % 3);
                if nz(na) + nz(nb) - nz(a) - nz(b) == n {
                    emit(with_label(with_label(cfg, i, na), j, nb));
                }
            }
        }
    }

    fn quasiparticles(&self, cfg: Config) -> i32 {
        (0..self.num_sites).filter(|&i| label(cfg, i) != 0).count() as i32
    }
}

/// Potts ordered phase: flips of site labels, quasiparticles are misaligned
/// bonds. Halo bonds lead to frozen sites with label 0.
#[derive(Debug, Clone)]
pub struct LargeSystem {
    neighbours: Vec<Vec<usize>>,
    halo: Vec<u32>,
}

impl LargeSystem {
    pub fn new(graph: &SiteGraph, halo: Vec<u32>) -> Self {
        assert!(graph.num_sites <= MAX_SITES);
        assert_eq!(halo.len(), graph.num_sites);
        let mut neighbours = vec![Vec::new(); graph.num_sites];
        for &(i, j) in &graph.bonds {
            neighbours[i].push(j);
            neighbours[j].push(i);
        }
        LargeSystem { neighbours, halo }
    }

    /// Square-lattice site cluster: every missing neighbour is a halo bond.
    pub fn embedded(graph: &SiteGraph) -> Self {
        let mut degree = vec![0u32; graph.num_sites];
        for &(i, j) in &graph.bonds {
            degree[i] += 1;
            degree[j] += 1;
        }
        let halo = degree.iter().map(|&d| 4 - d.min(4)).collect();
        Self::new(graph, halo)
    }

    fn misaligned_at(&self, cfg: Config, site: usize, value: u32) -> i32 {
        let inner = self.neighbours[site]
            .iter()
            .filter(|&&k| label(cfg, k) != value)
            .count() as i32;
        inner + if value != 0 { self.halo[site] as i32 } else { 0 }
    }
}

impl QpSystem for LargeSystem {
    fn num_sites(&self) -> usize {
        self.neighbours.len()
    }

    fn apply_t(&self, n: i8, cfg: Config, emit: &mut dyn FnMut(Config)) {
        for i in 0..self.neighbours.len() {
            let r = label(cfg, i);
            let before = self.misaligned_at(cfg, i, r);
            for s in [1, 2] {
                let nr = (r + s) % 3;
                if self.misaligned_at(cfg, i, nr) - before == n as i32 {
                    emit(with_label(cfg, i, nr));
                }
            }
        }
    }

    fn quasiparticles(&self, cfg: Config) -> i32 {
        let mut q = 0;
        for (i, nbs) in self.neighbours.iter().enumerate() {
            let r = label(cfg, i);
            q += nbs.iter().filter(|&&k| k > i && label(cfg, k) != r).count() as i32;
            if r != 0 {
                q += self.halo[i] as i32;
            }
        }
        q
    }
}

struct Node {
    children: Vec<(i8, usize)>,
    leaf: Option<BigRational>,
}

/// Reversed coefficient-table sequences sharing common suffixes.
pub struct SequenceTrie {
    nodes: Vec<Node>,
    max_order: usize,
}

impl SequenceTrie {
    pub fn new(table: &CoeffTable, max_order: usize) -> Self {
        let mut nodes = vec![Node {
            children: Vec::new(),
            leaf: None,
        }];
        for (m, c) in table.iter().filter(|(m, _)| m.len() <= max_order) {
            let mut at = 0;
            for &n in m.iter().rev() {
                at = match nodes[at].children.iter().find(|(k, _)| *k == n) {
                    Some(&(_, child)) => child,
                    None => {
                        nodes.push(Node {
                            children: Vec::new(),
                            leaf: None,
                        });
                        let child = nodes.len() - 1;
                        nodes[at].children.push((n, child));
                        child
                    }
                };
            }
            // T'_n = −x T_n: order k picks up (−1)^k
            nodes[at].leaf = Some(c * order_sign(m.len()));
        }
        SequenceTrie { nodes, max_order }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Calls `visit(order, weight, state)` with T_m |init⟩ for every sequence.
    pub fn walk(
        &self,
        sys: &dyn QpSystem,
        init: Config,
        visit: &mut dyn FnMut(usize, &BigRational, &State),
    ) {
        let mut state = State::new();
        state.insert(init, 1);
        self.walk_from(0, 0, sys, &state, visit);
    }

    fn walk_from(
        &self,
        node: usize,
        depth: usize,
        sys: &dyn QpSystem,
        state: &State,
        visit: &mut dyn FnMut(usize, &BigRational, &State),
    ) {
        for &(n, child) in &self.nodes[node].children {
            let next = apply(sys, n, state);
            if next.is_empty() {
                continue;
            }
            if let Some(w) = &self.nodes[child].leaf {
                visit(depth + 1, w, &next);
            }
            self.walk_from(child, depth + 1, sys, &next, visit);
        }
    }
}

pub fn apply(sys: &dyn QpSystem, n: i8, state: &State) -> State {
    let mut out = State::with_capacity(state.len() * 2);
    for (&cfg, &amp) in state {
        sys.apply_t(n, cfg, &mut |c| *out.entry(c).or_insert(0) += amp);
    }
    out.retain(|_, a| *a != 0);
    out
}

fn big(a: i128) -> BigRational {
    BigRational::from_integer(a.into())
}

/// ⟨0|H_eff − Q|0⟩ by order (index 0 unused, always zero).
pub fn vacuum_energy(trie: &SequenceTrie, sys: &dyn QpSystem) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); trie.max_order + 1];
    trie.walk(sys, 0, &mut |k, w, st| {
        if let Some(&a) = st.get(&0) {
            out[k] += w * big(a);
        }
    });
    out
}

/// ⟨final|H_eff − Q|init⟩ by order for every reachable final configuration.
pub fn transition_amplitudes(
    trie: &SequenceTrie,
    sys: &dyn QpSystem,
    init: Config,
) -> HashMap<Config, Vec<BigRational>> {
    let mut out: HashMap<Config, Vec<BigRational>> = HashMap::new();
    let len = trie.max_order + 1;
    trie.walk(sys, init, &mut |k, w, st| {
        for (&cfg, &a) in st {
            out.entry(cfg)
                .or_insert_with(|| vec![BigRational::zero(); len])[k] += w * big(a);
        }
    });
    out
}
