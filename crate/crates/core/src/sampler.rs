//! Weighted spanning trees by loop-erased walks, the Temperley bijection
//! between trees and matchings, and matching samplers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::EdgeId;
use crate::potential::{wired_networks, Network, WiredNetworks};
use crate::temperley::Region;

/// Generator for the stream `(seed, name, index)`; distinct names or
/// indices give non-overlapping streams.
pub fn stream_rng(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    // FNV-1a keeps the mapping stable across toolchains.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in name.bytes().chain(seed.to_le_bytes()) {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    rng.set_stream(index);
    rng
}

/// Spanning tree oriented towards `root`: `parent[v] = (next vertex, edge)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedTree {
    pub root: usize,
    pub parent: Vec<Option<(usize, usize)>>,
}

impl DirectedTree {
    /// Edge ids of the tree, sorted.
    pub fn edges(&self) -> Vec<usize> {
        let mut e: Vec<usize> = self.parent.iter().flatten().map(|p| p.1).collect();
        e.sort_unstable();
        e
    }

    /// Checks that every vertex reaches the root without repeating.
    pub fn validate(&self, net: &Network) -> Result<()> {
        if self.parent.len() != net.n || self.parent[self.root].is_some() {
            return Err(Error::InvalidGraph("tree does not match the network".into()));
        }
        let mut state = vec![0u8; net.n];
        state[self.root] = 2;
        for s in 0..net.n {
            let mut path = Vec::new();
            let mut x = s;
            while state[x] == 0 {
                state[x] = 1;
                path.push(x);
                let (p, e) = self.parent[x].ok_or_else(|| Error::InvalidGraph(format!("vertex {x} has no parent")))?;
                let (a, b, _) = net.edges[e];
                if !((a == x && b == p) || (b == x && a == p)) || a == b {
                    return Err(Error::InvalidGraph(format!("parent edge {e} of {x} is not incident")));
                }
                x = p;
            }
            if state[x] == 1 {
                return Err(Error::InvalidGraph(format!("cycle through vertex {x}")));
            }
            for v in path {
                state[v] = 2;
            }
        }
        Ok(())
    }
}

/// Loop-erased-walk sampler: the tree has probability proportional to the
/// product of its conductances.
pub fn wilson_with_rng<R: Rng + ?Sized>(net: &Network, root: usize, rng: &mut R) -> Result<DirectedTree> {
    if root >= net.n {
        return Err(Error::InvalidParameter(format!("root {root} out of range")));
    }
    if !net.is_connected() {
        return Err(Error::InvalidGraph("network is not connected".into()));
    }
    let adj = net.adjacency();
    let cum: Vec<Vec<f64>> = adj
        .iter()
        .map(|a| {
            let mut s = 0.0;
            a.iter()
                .map(|&(e, _)| {
                    s += net.edges[e].2;
                    s
                })
                .collect()
        })
        .collect();
    let mut in_tree = vec![false; net.n];
    in_tree[root] = true;
    let mut next: Vec<Option<(usize, usize)>> = vec![None; net.n];
    for s in 0..net.n {
        let mut u = s;
        while !in_tree[u] {
            let c = &cum[u];
            let t = rng.random::<f64>() * c[c.len() - 1];
            let k = c.partition_point(|&x| x <= t).min(c.len() - 1);
            let (e, v) = adj[u][k];
            next[u] = Some((v, e));
            u = v;
        }
        u = s;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u].unwrap().0;
        }
    }
    Ok(DirectedTree { root, parent: next })
}

pub fn wilson_ust(net: &Network, root: usize, seed: u64) -> Result<DirectedTree> {
    wilson_with_rng(net, root, &mut stream_rng(seed, "wilson", 0))
}

/// Perfect matching of a region: the black matched to each white.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Indexed by white id of the superposition graph; `usize::MAX` off the region.
    pub black_of: Vec<usize>,
}

impl Matching {
    pub fn from_pairs(n_white: usize, pairs: &[(EdgeId, usize)]) -> Self {
        let mut black_of = vec![usize::MAX; n_white];
        for &(w, b) in pairs {
            black_of[w] = b;
        }
        Matching { black_of }
    }

    /// Sorted `(white, black)` pairs.
    pub fn pairs(&self) -> Vec<(EdgeId, usize)> {
        self.black_of.iter().enumerate().filter(|(_, &b)| b != usize::MAX).map(|(w, &b)| (w, b)).collect()
    }

    pub fn contains(&self, w: EdgeId, b: usize) -> bool {
        self.black_of.get(w) == Some(&b)
    }

    /// Every region vertex covered exactly once by region edges.
    pub fn validate(&self, region: &Region) -> Result<()> {
        let mut hit = vec![false; region.sg.n_black()];
        for &w in &region.whites {
            let b = self.black_of[w];
            if b == usize::MAX || !region.neighbors(w).contains(&b) {
                return Err(Error::BadMatching(format!("white {w} is unmatched or matched off the region")));
            }
            if std::mem::replace(&mut hit[b], true) {
                return Err(Error::BadMatching(format!("black {b} is matched twice")));
            }
        }
        if self.black_of.iter().enumerate().any(|(w, &b)| b != usize::MAX && !region.white_in[w]) {
            return Err(Error::BadMatching("matched white outside the region".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.pairs())?)
    }

    pub fn from_json(s: &str, n_white: usize) -> Result<Self> {
        let pairs: Vec<(EdgeId, usize)> = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        if pairs.iter().any(|p| p.0 >= n_white) {
            return Err(Error::Schema("white id out of range".into()));
        }
        Ok(Matching::from_pairs(n_white, &pairs))
    }
}

/// Temperley bijection between spanning trees of the primal wired network
/// (rooted at its sink) and perfect matchings of the region.
#[derive(Debug, Clone)]
pub struct TemperleySampler {
    pub region: Region,
    pub networks: WiredNetworks,
}

impl TemperleySampler {
    pub fn new(region: &Region) -> Result<Self> {
        if !region.is_balanced() {
            return Err(Error::BadRegion("region is not balanced".into()));
        }
        let networks = wired_networks(region);
        if !networks.primal.is_connected() || !networks.dual.is_connected() {
            return Err(Error::BadRegion("wired networks are not connected".into()));
        }
        Ok(TemperleySampler { region: region.clone(), networks })
    }

    /// Each primal black takes the white of its tree edge; the remaining
    /// edges must form a spanning tree of the dual network, and each dual
    /// black takes the white of its edge towards the dual sink.
    pub fn forward(&self, tree: &DirectedTree) -> Result<Matching> {
        let nets = &self.networks;
        if tree.root != nets.primal_sink {
            return Err(Error::InvalidParameter("tree must be rooted at the primal sink".into()));
        }
        tree.validate(&nets.primal)?;
        let whites = &self.region.whites;
        let mut black_of = vec![usize::MAX; self.region.sg.n_white()];
        let mut used = vec![false; whites.len()];
        for (i, &b) in nets.primal_blacks.iter().enumerate() {
            let (_, e) = tree.parent[i].unwrap();
            used[e] = true;
            black_of[whites[e]] = b;
        }
        let dual = &nets.dual;
        let mut adj = vec![Vec::new(); dual.n];
        for (e, &(a, b, _)) in dual.edges.iter().enumerate() {
            if !used[e] && a != b {
                adj[a].push((e, b));
                adj[b].push((e, a));
            }
        }
        let mut seen = vec![false; dual.n];
        seen[nets.dual_sink] = true;
        let mut stack = vec![nets.dual_sink];
        let mut reached = 1;
        while let Some(x) = stack.pop() {
            for &(e, y) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    reached += 1;
                    black_of[whites[e]] = nets.dual_blacks[y];
                    stack.push(y);
                }
            }
        }
        let free = used.iter().filter(|&&u| !u).count();
        if reached != dual.n || free != dual.n - 1 {
            return Err(Error::BadRegion("complement of the tree is not a dual spanning tree".into()));
        }
        Ok(Matching { black_of })
    }

    /// Primal tree rooted at the primal sink and dual tree rooted at the dual sink.
    pub fn inverse(&self, m: &Matching) -> Result<(DirectedTree, DirectedTree)> {
        m.validate(&self.region)?;
        let nets = &self.networks;
        let mut pos = vec![usize::MAX; self.region.sg.n_white()];
        for (i, &w) in self.region.whites.iter().enumerate() {
            pos[w] = i;
        }
        let sg = &self.region.sg;
        let build = |net: &Network, primal: bool, sink: usize| -> Result<DirectedTree> {
            let mut parent = vec![None; net.n];
            for (w, &b) in m.black_of.iter().enumerate() {
                if b == usize::MAX {
                    continue;
                }
                if sg.is_primal(b) == primal {
                    let x = nets.vertex_of(b).unwrap();
                    let e = pos[w];
                    let (a, c, _) = net.edges[e];
                    parent[x] = Some((if a == x { c } else { a }, e));
                }
            }
            let t = DirectedTree { root: sink, parent };
            t.validate(net)?;
            Ok(t)
        };
        let primal = build(&nets.primal, true, nets.primal_sink)?;
        let dual = build(&nets.dual, false, nets.dual_sink)?;
        Ok((primal, dual))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Matching> {
        let t = wilson_with_rng(&self.networks.primal, self.networks.primal_sink, rng)?;
        self.forward(&t)
    }
}

pub fn temperley_forward(region: &Region, tree: &DirectedTree) -> Result<Matching> {
    TemperleySampler::new(region)?.forward(tree)
}

pub fn temperley_inverse(region: &Region, m: &Matching) -> Result<(DirectedTree, DirectedTree)> {
    TemperleySampler::new(region)?.inverse(m)
}

pub fn sample_matching(region: &Region, seed: u64) -> Result<Matching> {
    TemperleySampler::new(region)?.sample(&mut stream_rng(seed, "matching", 0))
}

/// Two independent matchings from the streams of `seed1` and `seed2`.
pub fn pair_sampler(region: &Region, seed1: u64, seed2: u64) -> Result<(Matching, Matching)> {
    if seed1 == seed2 {
        return Err(Error::InvalidParameter("pair seeds must differ".into()));
    }
    let s = TemperleySampler::new(region)?;
    Ok((s.sample(&mut stream_rng(seed1, "matching", 0))?, s.sample(&mut stream_rng(seed2, "matching", 0))?))
}
