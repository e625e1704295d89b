//! Connected bond clusters and polyominoes of the square lattice.
//!
//! Clusters are grown one element at a time and deduplicated by a
//! translation-normal form ("fixed" animals). Grouping fixed animals by their
//! normal form under the eight point-group operations gives the topological
//! classes; the class size is the number of embeddings per lattice site.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::SiteGraph;
use crate::series::{parse_rational, format_rational};

pub type Site = (i32, i32);
/// Nearest-neighbour bond with endpoints in increasing order.
pub type Bond = (Site, Site);

const NEIGHBOURS: [Site; 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

fn bond(a: Site, b: Site) -> Bond {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn point_op(k: usize, (x, y): Site) -> Site {
    let (x, y) = if k & 4 != 0 { (y, x) } else { (x, y) };
    let x = if k & 1 != 0 { -x } else { x };
    let y = if k & 2 != 0 { -y } else { y };
    (x, y)
}

/// Translates so that the smallest site is the origin and sorts.
pub fn normalize_bonds(bonds: &[Bond]) -> Vec<Bond> {
    let origin = bonds.iter().map(|b| b.0).min().unwrap_or((0, 0));
    let mut out: Vec<Bond> = bonds
        .iter()
        .map(|&(a, b)| {
            let s = |p: Site| (p.0 - origin.0, p.1 - origin.1);
            bond(s(a), s(b))
        })
        .collect();
    out.sort_unstable();
    out
}

pub fn canonical_bonds(bonds: &[Bond]) -> Vec<Bond> {
    (0..8)
        .map(|k| {
            let t: Vec<Bond> = bonds
                .iter()
                .map(|&(a, b)| bond(point_op(k, a), point_op(k, b)))
                .collect();
            normalize_bonds(&t)
        })
        .min()
        .unwrap_or_default()
}

pub fn normalize_sites(sites: &[Site]) -> Vec<Site> {
    let origin = sites.iter().copied().min().unwrap_or((0, 0));
    let mut out: Vec<Site> = sites
        .iter()
        .map(|p| (p.0 - origin.0, p.1 - origin.1))
        .collect();
    out.sort_unstable();
    out
}

pub fn canonical_sites(sites: &[Site]) -> Vec<Site> {
    (0..8)
        .map(|k| {
            let t: Vec<Site> = sites.iter().map(|&p| point_op(k, p)).collect();
            normalize_sites(&t)
        })
        .min()
        .unwrap_or_default()
}

/// Fixed connected bond clusters, indexed by size − 1, up to `max_bonds`.
pub fn fixed_bond_clusters(max_bonds: usize) -> Vec<Vec<Vec<Bond>>> {
    let mut levels: Vec<Vec<Vec<Bond>>> = Vec::new();
    if max_bonds == 0 {
        return levels;
    }
    levels.push(vec![
        vec![bond((0, 0), (1, 0))],
        vec![bond((0, 0), (0, 1))],
    ]);
    for _ in 1..max_bonds {
        let prev = levels.last().unwrap();
        let mut seen: HashSet<Vec<Bond>> = HashSet::new();
        for c in prev {
            let present: HashSet<Bond> = c.iter().copied().collect();
            let sites: BTreeSet<Site> = c.iter().flat_map(|&(a, b)| [a, b]).collect();
            for &s in &sites {
                for (dx, dy) in NEIGHBOURS {
                    let nb = bond(s, (s.0 + dx, s.1 + dy));
                    if present.contains(&nb) {
                        continue;
                    }
                    let mut grown = c.clone();
                    grown.push(nb);
                    seen.insert(normalize_bonds(&grown));
                }
            }
        }
        let mut next: Vec<Vec<Bond>> = seen.into_iter().collect();
        next.sort_unstable();
        levels.push(next);
    }
    levels
}

/// Fixed polyominoes (connected site sets), indexed by size − 1.
pub fn fixed_polyominoes(max_sites: usize) -> Vec<Vec<Vec<Site>>> {
    let mut levels: Vec<Vec<Vec<Site>>> = Vec::new();
    if max_sites == 0 {
        return levels;
    }
    levels.push(vec![vec![(0, 0)]]);
    for _ in 1..max_sites {
        let prev = levels.last().unwrap();
        let mut seen: HashSet<Vec<Site>> = HashSet::new();
        for c in prev {
            let present: HashSet<Site> = c.iter().copied().collect();
            for &s in c {
                for (dx, dy) in NEIGHBOURS {
                    let n = (s.0 + dx, s.1 + dy);
                    if present.contains(&n) {
                        continue;
                    }
                    let mut grown = c.clone();
                    grown.push(n);
                    seen.insert(normalize_sites(&grown));
                }
            }
        }
        let mut next: Vec<Vec<Site>> = seen.into_iter().collect();
        next.sort_unstable();
        levels.push(next);
    }
    levels
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub sites: Vec<Site>,
    pub bonds: Vec<(usize, usize)>,
    pub embeddings_per_site: BigRational,
}

impl Cluster {
    pub fn from_bonds(bonds: &[Bond], embeddings_per_site: BigRational) -> Self {
        let sites: Vec<Site> = bonds
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = |p: Site| sites.binary_search(&p).unwrap();
        let bonds = bonds.iter().map(|&(a, b)| (index(a), index(b))).collect();
        Cluster {
            sites,
            bonds,
            embeddings_per_site,
        }
    }

    /// Sites with all nearest-neighbour bonds between them.
    pub fn from_sites(sites: &[Site], embeddings_per_site: BigRational) -> Self {
        let mut sites = sites.to_vec();
        sites.sort_unstable();
        let mut bonds = Vec::new();
        for (i, &a) in sites.iter().enumerate() {
            for (dx, dy) in [(1, 0), (0, 1)] {
                if let Ok(j) = sites.binary_search(&(a.0 + dx, a.1 + dy)) {
                    bonds.push((i, j));
                }
            }
        }
        Cluster {
            sites,
            bonds,
            embeddings_per_site,
        }
    }

    pub fn bond_coords(&self) -> Vec<Bond> {
        self.bonds
            .iter()
            .map(|&(i, j)| bond(self.sites[i], self.sites[j]))
            .collect()
    }

    pub fn graph(&self) -> SiteGraph {
        SiteGraph::new(self.sites.len(), self.bonds.clone())
    }
}

fn classes<T: Ord + Clone>(
    fixed: &[Vec<T>],
    canon: impl Fn(&[T]) -> Vec<T>,
) -> BTreeMap<Vec<T>, usize> {
    let mut out = BTreeMap::new();
    for c in fixed {
        *out.entry(canon(c)).or_insert(0) += 1;
    }
    out
}

/// Topologically distinct connected bond clusters with ≤ `max_bonds` bonds;
/// embeddings per site = number of fixed clusters in the point-group class.
pub fn enumerate_clusters(max_bonds: usize) -> Vec<Cluster> {
    let mut out = Vec::new();
    for level in fixed_bond_clusters(max_bonds) {
        for (canon, count) in classes(&level, canonical_bonds) {
            out.push(Cluster::from_bonds(
                &canon,
                BigRational::from_integer(count.into()),
            ));
        }
    }
    out
}

/// Point-group classes of polyominoes with ≤ `max_sites` sites.
pub fn enumerate_site_clusters(max_sites: usize) -> Vec<Cluster> {
    let mut out = Vec::new();
    for level in fixed_polyominoes(max_sites) {
        for (canon, count) in classes(&level, canonical_sites) {
            out.push(Cluster::from_sites(
                &canon,
                BigRational::from_integer(count.into()),
            ));
        }
    }
    out
}

fn connected_bonds(bonds: &[Bond]) -> bool {
    if bonds.is_empty() {
        return false;
    }
    let mut seen = vec![false; bonds.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        let (a, b) = bonds[i];
        for (j, &(c, d)) in bonds.iter().enumerate() {
            if !seen[j] && (a == c || a == d || b == c || b == d) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Connected proper non-empty subsets of a bond set.
pub fn connected_sub_bond_sets(bonds: &[Bond]) -> Vec<Vec<Bond>> {
    let n = bonds.len();
    assert!(n < 24, "subset enumeration is exponential");
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) - 1 {
        let sub: Vec<Bond> = (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| bonds[i])
            .collect();
        if connected_bonds(&sub) {
            out.push(sub);
        }
    }
    out
}

fn connected_sites(sites: &[Site]) -> bool {
    if sites.is_empty() {
        return false;
    }
    let set: HashSet<Site> = sites.iter().copied().collect();
    let mut seen: HashSet<Site> = HashSet::new();
    let mut stack = vec![sites[0]];
    seen.insert(sites[0]);
    while let Some(s) = stack.pop() {
        for (dx, dy) in NEIGHBOURS {
            let n = (s.0 + dx, s.1 + dy);
            if set.contains(&n) && seen.insert(n) {
                stack.push(n);
            }
        }
    }
    seen.len() == sites.len()
}

/// Connected proper non-empty subsets of a site set.
pub fn connected_sub_site_sets(sites: &[Site]) -> Vec<Vec<Site>> {
    let n = sites.len();
    assert!(n < 24, "subset enumeration is exponential");
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) - 1 {
        let sub: Vec<Site> = (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| sites[i])
            .collect();
        if connected_sites(&sub) {
            out.push(sub);
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct ClusterRecord {
    sites: Vec<Site>,
    bonds: Vec<(usize, usize)>,
    embeddings_per_site: String,
}

pub fn clusters_to_json(clusters: &[Cluster]) -> Result<String> {
    let records: Vec<ClusterRecord> = clusters
        .iter()
        .map(|c| ClusterRecord {
            sites: c.sites.clone(),
            bonds: c.bonds.clone(),
            embeddings_per_site: format_rational(&c.embeddings_per_site),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&records)?)
}

pub fn clusters_from_json(text: &str) -> Result<Vec<Cluster>> {
    let records: Vec<ClusterRecord> = serde_json::from_str(text)?;
    records
        .into_iter()
        .map(|r| {
            Ok(Cluster {
                sites: r.sites,
                bonds: r.bonds,
                embeddings_per_site: parse_rational(&r.embeddings_per_site)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_counts() {
        let sizes: Vec<usize> = fixed_bond_clusters(5).iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 6, 22, 88, 372]);
        let poly: Vec<usize> = fixed_polyominoes(5).iter().map(Vec::len).collect();
        assert_eq!(poly, vec![1, 2, 6, 19, 63]);
    }

    #[test]
    fn single_and_double_bond_classes() {
        let cs = enumerate_clusters(2);
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[0].embeddings_per_site, BigRational::from_integer(2.into()));
        let two: BigRational = cs[1..].iter().map(|c| c.embeddings_per_site.clone()).sum();
        assert_eq!(two, BigRational::from_integer(6.into()));
    }

    #[test]
    fn json_roundtrip() {
        let cs = enumerate_clusters(3);
        let back = clusters_from_json(&clusters_to_json(&cs).unwrap()).unwrap();
        assert_eq!(cs, back);
    }

    #[test]
    fn sub_sets_of_path() {
        let path = vec![bond((0, 0), (1, 0)), bond((1, 0), (2, 0)), bond((2, 0), (3, 0))];
        // 3 singles, 2 adjacent pairs
        assert_eq!(connected_sub_bond_sets(&path).len(), 5);
    }
}
