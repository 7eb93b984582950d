use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which graph to put the agents on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    /// Wrap-around `width × height` grid with von Neumann neighborhoods.
    Torus { width: usize, height: usize },
    /// Ring of `n` nodes joined to their `k` nearest neighbors, each edge
    /// rewired with probability `p_rewire`.
    SmallWorld { n: usize, k: usize, p_rewire: f64 },
    /// Growth from a clique of `m + 1` nodes, each newcomer attaching `m`
    /// edges with probability proportional to degree.
    PreferentialAttachment { n: usize, m: usize },
}

impl Topology {
    pub const DEFAULT_SMALL_WORLD_K: usize = 4;
    pub const DEFAULT_SMALL_WORLD_P: f64 = 0.1;
    pub const DEFAULT_ATTACHMENT_M: usize = 2;

    pub fn torus(width: usize, height: usize) -> Self {
        Topology::Torus { width, height }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            Topology::Torus { width, height } => width * height,
            Topology::SmallWorld { n, .. } | Topology::PreferentialAttachment { n, .. } => n,
        }
    }

    /// Every node has the same degree.
    pub fn is_regular(&self) -> bool {
        matches!(self, Topology::Torus { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Topology::Torus { width, height } => {
                if width < 3 || height < 3 {
                    return Err(Error::InvalidTopology(format!(
                        "torus needs width and height >= 3, got {width}x{height}"
                    )));
                }
            }
            Topology::SmallWorld { n, k, p_rewire } => {
                if k < 2 || k % 2 != 0 || k >= n {
                    return Err(Error::InvalidTopology(format!(
                        "small world needs an even k with 2 <= k < n, got n = {n}, k = {k}"
                    )));
                }
                if !(0.0..=1.0).contains(&p_rewire) {
                    return Err(Error::InvalidTopology(format!(
                        "rewiring probability {p_rewire} is outside [0, 1]"
                    )));
                }
            }
            Topology::PreferentialAttachment { n, m } => {
                if m < 1 || m >= n {
                    return Err(Error::InvalidTopology(format!(
                        "preferential attachment needs 1 <= m < n, got n = {n}, m = {m}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Topology::Torus { width, height } => write!(f, "torus({width}x{height})"),
            Topology::SmallWorld { n, k, p_rewire } => {
                write!(f, "small_world(n={n}, k={k}, p={p_rewire})")
            }
            Topology::PreferentialAttachment { n, m } => {
                write!(f, "preferential_attachment(n={n}, m={m})")
            }
        }
    }
}

/// Undirected simple graph in compressed adjacency form. Neighbor lists are
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Network {
    /// Builds from per-node neighbor lists, rejecting self-loops, duplicate
    /// edges, out-of-range indices and one-sided edges.
    pub fn from_adjacency(adjacency: &[Vec<usize>]) -> Result<Self> {
        let n = adjacency.len();
        if n == 0 {
            return Err(Error::InvalidTopology("network has no nodes".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidTopology("too many nodes".into()));
        }
        let mut sets: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
        for (i, list) in adjacency.iter().enumerate() {
            let mut set = BTreeSet::new();
            for &j in list {
                if j >= n {
                    return Err(Error::InvalidTopology(format!("node {i} links to missing node {j}")));
                }
                if j == i {
                    return Err(Error::InvalidTopology(format!("self-loop at node {i}")));
                }
                if !set.insert(j) {
                    return Err(Error::InvalidTopology(format!("duplicate edge {i}-{j}")));
                }
            }
            sets.push(set);
        }
        for (i, set) in sets.iter().enumerate() {
            for &j in set {
                if !sets[j].contains(&i) {
                    return Err(Error::InvalidTopology(format!("edge {i}-{j} is one-sided")));
                }
            }
        }
        Ok(Self::from_sets(&sets))
    }

    fn from_sets(sets: &[BTreeSet<usize>]) -> Self {
        let mut offsets = Vec::with_capacity(sets.len() + 1);
        let mut neighbors = Vec::with_capacity(sets.iter().map(BTreeSet::len).sum());
        offsets.push(0);
        for set in sets {
            neighbors.extend(set.iter().map(|&j| j as u32));
            offsets.push(neighbors.len());
        }
        Network { offsets, neighbors }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.node_count())
            .map(|i| self.neighbors(i).iter().map(|&j| j as usize).collect())
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in self.neighbors(i) {
                let j = j as usize;
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == n
    }
}

/// Generates the graph for `topology`, drawing from `rng` for the random
/// models. The torus consumes no randomness.
pub fn build_network<R: Rng + ?Sized>(topology: &Topology, rng: &mut R) -> Result<Network> {
    topology.validate()?;
    let sets = match *topology {
        Topology::Torus { width, height } => torus(width, height),
        Topology::SmallWorld { n, k, p_rewire } => small_world(n, k, p_rewire, rng),
        Topology::PreferentialAttachment { n, m } => preferential_attachment(n, m, rng),
    };
    Ok(Network::from_sets(&sets))
}

fn torus(width: usize, height: usize) -> Vec<BTreeSet<usize>> {
    let id = |x: usize, y: usize| y * width + x;
    let mut sets = vec![BTreeSet::new(); width * height];
    for y in 0..height {
        for x in 0..width {
            let set = &mut sets[id(x, y)];
            set.insert(id((x + 1) % width, y));
            set.insert(id((x + width - 1) % width, y));
            set.insert(id(x, (y + 1) % height));
            set.insert(id(x, (y + height - 1) % height));
        }
    }
    sets
}

fn link(sets: &mut [BTreeSet<usize>], i: usize, j: usize) {
    sets[i].insert(j);
    sets[j].insert(i);
}

fn small_world<R: Rng + ?Sized>(n: usize, k: usize, p: f64, rng: &mut R) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); n];
    for i in 0..n {
        for step in 1..=k / 2 {
            link(&mut sets, i, (i + step) % n);
        }
    }
    // Rewire each lattice edge (i, i + step) at its lower-index end.
    for step in 1..=k / 2 {
        for i in 0..n {
            let j = (i + step) % n;
            if !sets[i].contains(&j) || rng.random::<f64>() >= p {
                continue;
            }
            // Leave the edge alone if i is already linked to everyone.
            if sets[i].len() >= n - 1 {
                continue;
            }
            let target = loop {
                let t = rng.random_range(0..n);
                if t != i && !sets[i].contains(&t) {
                    break t;
                }
            };
            sets[i].remove(&j);
            sets[j].remove(&i);
            link(&mut sets, i, target);
        }
    }
    sets
}

fn preferential_attachment<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); n];
    // Every edge endpoint appears once, so uniform draws are degree-weighted.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * (m * (m + 1) / 2 + m * n));
    for i in 0..=m {
        for j in (i + 1)..=m {
            link(&mut sets, i, j);
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            link(&mut sets, v, t);
            endpoints.push(v);
            endpoints.push(t);
        }
    }
    sets
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn assert_simple_undirected(net: &Network) {
        for i in 0..net.node_count() {
            let nb = net.neighbors(i);
            assert!(nb.windows(2).all(|w| w[0] < w[1]), "sorted and unique at {i}");
            for &j in nb {
                assert_ne!(j as usize, i);
                assert!(net.neighbors(j as usize).contains(&(i as u32)));
            }
        }
    }

    #[test]
    fn torus_50() {
        let net = build_network(&Topology::torus(50, 50), &mut rng()).unwrap();
        assert_eq!(net.node_count(), 2500);
        assert!((0..2500).all(|i| net.degree(i) == 4));
        assert_eq!(net.edge_count(), 5000);
        assert_simple_undirected(&net);
        // (0,0) touches (1,0), (49,0), (0,1), (0,49).
        assert_eq!(net.neighbors(0), &[1, 49, 50, 2450]);
    }

    #[test]
    fn torus_3x3() {
        let net = build_network(&Topology::torus(3, 3), &mut rng()).unwrap();
        assert_eq!(net.node_count(), 9);
        assert!((0..9).all(|i| net.degree(i) == 4));
        assert_eq!(net.edge_count(), 18);
        assert_simple_undirected(&net);
    }

    #[test]
    fn torus_too_small() {
        for (w, h) in [(2, 5), (5, 2), (0, 0)] {
            assert!(matches!(
                build_network(&Topology::torus(w, h), &mut rng()),
                Err(Error::InvalidTopology(_))
            ));
        }
    }

    #[test]
    fn preferential_attachment_counts() {
        let net = build_network(
            &Topology::PreferentialAttachment { n: 100, m: 2 },
            &mut rng(),
        )
        .unwrap();
        assert_eq!(net.node_count(), 100);
        // Seed triangle plus two edges for each of the 97 newcomers.
        assert_eq!(net.edge_count(), 3 + 2 * 97);
        assert!(net.is_connected());
        assert!((0..100).all(|i| net.degree(i) >= 2));
        assert_simple_undirected(&net);
    }

    #[test]
    fn preferential_attachment_invalid() {
        for (n, m) in [(10, 0), (5, 5), (3, 7)] {
            assert!(build_network(&Topology::PreferentialAttachment { n, m }, &mut rng()).is_err());
        }
    }

    #[test]
    fn small_world_preserves_edge_count() {
        for p in [0.0, 0.1, 1.0] {
            let net = build_network(
                &Topology::SmallWorld { n: 200, k: 4, p_rewire: p },
                &mut rng(),
            )
            .unwrap();
            assert_eq!(net.edge_count(), 400);
            assert_simple_undirected(&net);
            if p == 0.0 {
                assert!((0..200).all(|i| net.degree(i) == 4));
            }
        }
    }

    #[test]
    fn small_world_invalid() {
        for (n, k) in [(10, 3), (10, 10), (10, 0)] {
            assert!(build_network(&Topology::SmallWorld { n, k, p_rewire: 0.1 }, &mut rng()).is_err());
        }
        assert!(build_network(&Topology::SmallWorld { n: 10, k: 2, p_rewire: 1.5 }, &mut rng()).is_err());
    }

    #[test]
    fn random_generators_are_seed_deterministic() {
        let t = Topology::SmallWorld { n: 300, k: 6, p_rewire: 0.2 };
        assert_eq!(
            build_network(&t, &mut rng()).unwrap(),
            build_network(&t, &mut rng()).unwrap()
        );
        let t = Topology::PreferentialAttachment { n: 300, m: 3 };
        assert_eq!(
            build_network(&t, &mut rng()).unwrap(),
            build_network(&t, &mut rng()).unwrap()
        );
    }

    #[test]
    fn from_adjacency_validates() {
        assert!(Network::from_adjacency(&[vec![1], vec![0]]).is_ok());
        assert!(Network::from_adjacency(&[vec![0]]).is_err());
        assert!(Network::from_adjacency(&[vec![1], vec![]]).is_err());
        assert!(Network::from_adjacency(&[vec![1, 1], vec![0]]).is_err());
        assert!(Network::from_adjacency(&[vec![2], vec![0]]).is_err());
        assert!(Network::from_adjacency(&[]).is_err());
    }
}
