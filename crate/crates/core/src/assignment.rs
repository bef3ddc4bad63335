//! Assigning tree vertices to the clusters of a tight Hamilton cycle.
//!
//! Clusters are `0..t` in cycle order, so the cycle edges are
//! `{i, i+1, i+2} mod t`. The matching used for balancing takes every third
//! cycle edge: `E_z = {3z, 3z+1, 3z+2}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::Vertex;
use crate::loose_tree::{decompose, layering, LooseTree, Piece};
use crate::scalar::{at_least, Scalar};
use crate::Rational;

/// `E_z = [3z, 3z+1, 3z+2]` for `z < ⌊t/3⌋`.
pub fn every_third_matching(t: usize) -> Vec<[usize; 3]> {
    (0..t / 3).map(|z| [3 * z, 3 * z + 1, 3 * z + 2]).collect()
}

/// Whether the cluster triple is an edge `{i, i+1, i+2}` of the cycle on `0..t`.
pub fn on_cycle(t: usize, clusters: [usize; 3]) -> bool {
    let mut s = clusters;
    s.sort_unstable();
    (0..t).any(|i| {
        let mut c = [i, (i + 1) % t, (i + 2) % t];
        c.sort_unstable();
        c == s
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Any failed precondition or lost guarantee is an error.
    #[default]
    Strict,
    /// Proceed past failed checks; they are listed in `ClusterAssignment::lost`.
    BestEffort,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    pub tree: LooseTree,
    /// Cluster of `tree.root()`, in `0..=t-3`.
    pub root_cluster: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentProblem<S = Rational> {
    pub t: usize,
    pub capacities: Vec<usize>,
    pub zeta: S,
    pub nu: S,
    pub trees: Vec<RootedTree>,
    pub max_degree: usize,
    pub piece_target: usize,
    #[serde(default)]
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceTrace {
    pub tree: usize,
    pub root: Vertex,
    pub vertices: Vec<Vertex>,
    /// Index `z` of the matching edge most of the piece went to.
    pub matching_edge: usize,
    /// Colours (0-based) sorted by class size, ascending.
    pub pi: [usize; 3],
    /// Positions in `E_z` sorted by leftover, ascending.
    pub rho: [usize; 3],
    /// `eta[h]` is the colour intended for position `h` of `E_z`.
    pub eta: [usize; 3],
    pub forward: bool,
    /// Layer at which the walk reached its intended cluster (1 when the root
    /// already sat there); `None` if the piece ended first.
    pub aligned_at: Option<usize>,
    pub off_edge_vertices: usize,
    /// Largest leftover difference inside any matching edge after this piece.
    pub spread_after: i64,
    pub spread_bound: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeftoverLedger {
    pub leftovers: Vec<i64>,
    /// Max pairwise leftover difference inside each matching edge.
    pub spreads: Vec<i64>,
}

impl LeftoverLedger {
    fn new(capacities: &[usize], t: usize) -> Self {
        let mut l = Self { leftovers: capacities.iter().map(|&c| c as i64).collect(), spreads: Vec::new() };
        l.refresh(t);
        l
    }

    fn refresh(&mut self, t: usize) {
        self.spreads = every_third_matching(t)
            .iter()
            .map(|e| {
                let vals = e.map(|c| self.leftovers[c]);
                vals.iter().max().unwrap() - vals.iter().min().unwrap()
            })
            .collect();
    }

    pub fn max_spread(&self) -> i64 {
        self.spreads.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// `a[j][v]`: cluster of vertex `v` of tree `j`.
    pub a: Vec<Vec<usize>>,
    pub loads: Vec<usize>,
    pub trace: Vec<PieceTrace>,
    pub ledger: LeftoverLedger,
    /// Guarantees given up in best-effort mode.
    pub lost: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssignError {
    #[error("t = {0} must be at least 4 and not divisible by 3")]
    BadClusterCount(usize),
    #[error("expected {t} capacities, got {got}")]
    CapacityCount { t: usize, got: usize },
    #[error("tree {tree}: root cluster {cluster} outside 0..={max}")]
    RootClusterOutOfRange { tree: usize, cluster: usize, max: usize },
    #[error("root clusters are not distinct")]
    RootClustersNotDistinct,
    #[error("{0}")]
    Precondition(String),
    #[error("piece {piece}: no matching edge has every leftover >= 2ζm (leftovers {leftovers:?})")]
    NoMatchingEdge { piece: usize, leftovers: Vec<i64> },
    #[error("piece {piece}: cluster {cluster} over capacity")]
    Overfull { piece: usize, cluster: usize },
    #[error("piece {piece}: walk did not align within 6t layers")]
    WalkDidNotAlign { piece: usize },
    #[error("piece {piece}: leftover spread {spread} exceeds {bound}")]
    Balance { piece: usize, spread: i64, bound: u128 },
}

/// `6t·(2Δ)^{6t}`, saturating.
pub fn travel_vertex_bound(t: usize, delta: usize) -> u128 {
    let base = (2 * delta.max(1)) as u128;
    let pow = u32::try_from(6 * t).ok().and_then(|e| base.checked_pow(e)).unwrap_or(u128::MAX);
    pow.saturating_mul(6 * t as u128)
}

/// `6Δ·target + i·6t(2Δ)^{6t}` plus whatever spread the capacities start with.
pub fn balance_bound(t: usize, delta: usize, target: usize, pieces_done: usize, initial: i64) -> u128 {
    let base = (6 * delta * target) as u128 + initial.max(0) as u128;
    base.saturating_add(travel_vertex_bound(t, delta).saturating_mul(pieces_done as u128))
}

struct Run<'a, S> {
    p: &'a AssignmentProblem<S>,
    a: Vec<Vec<usize>>,
    ledger: LeftoverLedger,
    trace: Vec<PieceTrace>,
    lost: Vec<String>,
    initial_spread: i64,
    travel_bound: u128,
}

const UNSET: usize = usize::MAX;

impl<S: Scalar> Run<'_, S> {
    fn strict(&self) -> bool {
        self.p.mode == Mode::Strict
    }

    fn give_up(&mut self, err: AssignError) -> Result<(), AssignError> {
        if self.strict() {
            Err(err)
        } else {
            self.lost.push(err.to_string());
            Ok(())
        }
    }

    fn put(&mut self, piece: usize, tree: usize, v: Vertex, cluster: usize) -> Result<(), AssignError> {
        self.a[tree][v] = cluster;
        self.ledger.leftovers[cluster] -= 1;
        if self.ledger.leftovers[cluster] < 0 {
            self.give_up(AssignError::Overfull { piece, cluster })?;
        }
        Ok(())
    }

    fn piece_colours(&self, piece: &Piece, layers: &[usize]) -> ([usize; 3], usize) {
        let base = layers[piece.root];
        let mut sizes = [0usize; 3];
        let mut depth = 1;
        for &v in &piece.vertices {
            let local = layers[v] - base + 1;
            sizes[(local - 1) % 3] += 1;
            depth = depth.max(local);
        }
        (sizes, depth)
    }

    fn finish_piece(&mut self, piece_index: usize, mut tr: PieceTrace) -> Result<(), AssignError> {
        self.ledger.refresh(self.p.t);
        tr.spread_after = self.ledger.max_spread();
        tr.spread_bound = balance_bound(self.p.t, self.p.max_degree, self.p.piece_target, piece_index + 1, self.initial_spread);
        let (spread, bound) = (tr.spread_after, tr.spread_bound);
        self.trace.push(tr);
        if spread as u128 > bound {
            self.give_up(AssignError::Balance { piece: piece_index, spread, bound })?;
        }
        Ok(())
    }

    /// Root piece of tree `j`: colour 0 to the root's cluster, the other two
    /// colour classes to the rest of its matching edge, larger class to larger leftover.
    fn root_piece(&mut self, index: usize, j: usize, piece: &Piece, layers: &[usize]) -> Result<(), AssignError> {
        let c = self.p.trees[j].root_cluster;
        let z = c / 3;
        let w = [3 * z, 3 * z + 1, 3 * z + 2];
        let (sizes, _) = self.piece_colours(piece, layers);
        let mut others: Vec<usize> = w.iter().copied().filter(|&x| x != c).collect();
        others.sort_by_key(|&x| (self.ledger.leftovers[x], std::cmp::Reverse(x)));
        let (small, large) = if sizes[1] <= sizes[2] { (1, 2) } else { (2, 1) };
        let mut cluster_of_colour = [c, 0, 0];
        cluster_of_colour[small] = others[0];
        cluster_of_colour[large] = others[1];
        let base = layers[piece.root];
        for &v in &piece.vertices {
            self.put(index, j, v, cluster_of_colour[(layers[v] - base) % 3])?;
        }
        let mut eta = [0; 3];
        for (colour, &cl) in cluster_of_colour.iter().enumerate() {
            eta[cl - 3 * z] = colour;
        }
        let tr = PieceTrace {
            tree: j,
            root: piece.root,
            vertices: piece.vertices.clone(),
            matching_edge: z,
            pi: sort_perm(sizes.map(|s| s as i64)),
            rho: sort_perm(w.map(|x| self.ledger.leftovers[x])),
            eta,
            forward: eta[1] == (eta[0] + 1) % 3,
            aligned_at: Some(1),
            off_edge_vertices: 0,
            spread_after: 0,
            spread_bound: 0,
        };
        self.finish_piece(index, tr)
    }

    fn pick_matching_edge(&mut self, index: usize) -> Result<usize, AssignError> {
        let t = self.p.t;
        let two_zeta = self.p.zeta.clone() + self.p.zeta.clone();
        let score = |z: usize| (0..3).map(|k| self.ledger.leftovers[3 * z + k]).min().unwrap();
        let ok = |z: usize| {
            (0..3).all(|k| {
                let c = 3 * z + k;
                let l = self.ledger.leftovers[c];
                l >= 0 && at_least(l as usize, &two_zeta, self.p.capacities[c])
            })
        };
        let best = (0..t / 3).max_by_key(|&z| (score(z), std::cmp::Reverse(z))).unwrap();
        let best_ok = (0..t / 3).filter(|&z| ok(z)).max_by_key(|&z| (score(z), std::cmp::Reverse(z)));
        match best_ok {
            Some(z) => Ok(z),
            None => {
                self.give_up(AssignError::NoMatchingEdge { piece: index, leftovers: self.ledger.leftovers.clone() })?;
                Ok(best)
            }
        }
    }

    fn inner_piece(&mut self, index: usize, j: usize, piece: &Piece, layers: &[usize]) -> Result<(), AssignError> {
        let t = self.p.t;
        let z = self.pick_matching_edge(index)?;
        let w = [3 * z, 3 * z + 1, 3 * z + 2];
        let (sizes, depth) = self.piece_colours(piece, layers);
        let pi = sort_perm(sizes.map(|s| s as i64));
        let rho = sort_perm(w.map(|x| self.ledger.leftovers[x]));
        // eta = pi ∘ rho^{-1}: the k-th smallest leftover gets the k-th smallest class.
        let mut eta = [0; 3];
        for k in 0..3 {
            eta[rho[k]] = pi[k];
        }
        let forward = eta[1] == (eta[0] + 1) % 3;
        let pos_in_edge = |h: usize| (h / 3 == z && h < 3 * (t / 3)).then(|| h - 3 * z);

        let root_cluster = self.a[j][piece.root];
        let mut cluster_of_layer = vec![UNSET; depth + 1];
        cluster_of_layer[1] = root_cluster;
        let mut aligned_at = None;
        if let Some(h) = pos_in_edge(root_cluster) {
            if eta[h] == 0 {
                aligned_at = Some(1);
            }
        }
        for b in 2..=depth {
            let prev = cluster_of_layer[b - 1];
            let h = match aligned_at {
                Some(_) => {
                    let p = pos_in_edge(prev).expect("aligned layers stay in E_z");
                    w[if forward { (p + 1) % 3 } else { (p + 2) % 3 }]
                }
                None if forward => (prev + 1) % t,
                None => (prev + t - 1) % t,
            };
            cluster_of_layer[b] = h;
            if aligned_at.is_none() {
                if let Some(p) = pos_in_edge(h) {
                    if eta[p] == (b - 1) % 3 {
                        aligned_at = Some(b);
                    }
                }
                if aligned_at.is_none() && b >= 6 * t {
                    return Err(AssignError::WalkDidNotAlign { piece: index });
                }
            }
        }
        let base = layers[piece.root];
        let mut off_edge = 0;
        for &v in &piece.vertices {
            if v == piece.root {
                continue;
            }
            let h = cluster_of_layer[layers[v] - base + 1];
            if pos_in_edge(h).is_none() {
                off_edge += 1;
            }
            self.put(index, j, v, h)?;
        }
        if off_edge as u128 > self.travel_bound {
            self.give_up(AssignError::Precondition(format!("piece {index}: {off_edge} vertices off its matching edge")))?;
        }
        let tr = PieceTrace {
            tree: j,
            root: piece.root,
            vertices: piece.vertices.clone(),
            matching_edge: z,
            pi,
            rho,
            eta,
            forward,
            aligned_at,
            off_edge_vertices: off_edge,
            spread_after: 0,
            spread_bound: 0,
        };
        self.finish_piece(index, tr)
    }
}

/// Indices `0..3` sorted by value ascending, ties by lower index.
fn sort_perm(vals: [i64; 3]) -> [usize; 3] {
    let mut idx = [0, 1, 2];
    idx.sort_by_key(|&i| (vals[i], i));
    idx
}

fn check_problem<S: Scalar>(p: &AssignmentProblem<S>, lost: &mut Vec<String>) -> Result<(), AssignError> {
    let t = p.t;
    if t < 4 || t % 3 == 0 {
        return Err(AssignError::BadClusterCount(t));
    }
    if p.capacities.len() != t {
        return Err(AssignError::CapacityCount { t, got: p.capacities.len() });
    }
    let mut seen = vec![false; t];
    for (j, rt) in p.trees.iter().enumerate() {
        if rt.root_cluster > t - 3 {
            return Err(AssignError::RootClusterOutOfRange { tree: j, cluster: rt.root_cluster, max: t - 3 });
        }
        if std::mem::replace(&mut seen[rt.root_cluster], true) {
            return Err(AssignError::RootClustersNotDistinct);
        }
    }
    let mut soft = Vec::new();
    if p.trees.is_empty() || p.trees.len() > 2 * p.max_degree {
        soft.push(format!("{} trees, expected 1..={}", p.trees.len(), 2 * p.max_degree));
    }
    if let Some((j, rt)) = p.trees.iter().enumerate().find(|(_, rt)| rt.tree.max_degree() > p.max_degree) {
        soft.push(format!("tree {j} has degree {} > Δ = {}", rt.tree.max_degree(), p.max_degree));
    }
    let total: usize = p.trees.iter().map(|rt| rt.tree.n()).sum();
    let cap: usize = p.capacities.iter().sum();
    let allowed = (S::one() - p.nu.clone()) * S::from_count(cap);
    if S::from_count(total) > allowed {
        soft.push(format!("trees have {total} vertices, more than (1-ν)·{cap}"));
    }
    if let Some(first) = soft.first() {
        if p.mode == Mode::Strict {
            return Err(AssignError::Precondition(first.clone()));
        }
        lost.extend(soft);
    }
    Ok(())
}

/// Extends the root placement to every tree vertex so tree edges land on
/// cycle edges, walking each piece around the cycle to a matching edge with
/// room and filling that edge colour class by colour class.
pub fn assign_clusters<S: Scalar>(p: &AssignmentProblem<S>) -> Result<ClusterAssignment, AssignError> {
    let mut lost = Vec::new();
    check_problem(p, &mut lost)?;
    let ledger = LeftoverLedger::new(&p.capacities, p.t);
    let initial_spread = ledger.max_spread();
    let mut run = Run {
        p,
        a: p.trees.iter().map(|rt| vec![UNSET; rt.tree.n()]).collect(),
        ledger,
        trace: Vec::new(),
        lost,
        initial_spread,
        travel_bound: travel_vertex_bound(p.t, p.max_degree),
    };
    let decomps: Vec<_> = p.trees.iter().map(|rt| decompose(&rt.tree, p.piece_target)).collect();
    let layers: Vec<Vec<usize>> = p.trees.iter().map(|rt| layering(&rt.tree).layer).collect();
    let mut index = 0;
    for (j, d) in decomps.iter().enumerate() {
        run.root_piece(index, j, &d.pieces[0], &layers[j])?;
        index += 1;
    }
    for (j, d) in decomps.iter().enumerate() {
        for piece in &d.pieces[1..] {
            run.inner_piece(index, j, piece, &layers[j])?;
            index += 1;
        }
    }
    let loads = (0..p.t).map(|c| (p.capacities[c] as i64 - run.ledger.leftovers[c]) as usize).collect();
    let mut out = ClusterAssignment { a: run.a, loads, trace: run.trace, ledger: run.ledger, lost: run.lost };
    let zeta = p.zeta.clone();
    for c in 0..p.t {
        let l = out.ledger.leftovers[c];
        if l < 0 || !at_least(l as usize, &zeta, p.capacities[c]) {
            let msg = format!("cluster {c} ends with leftover {l} < ζ·{}", p.capacities[c]);
            if p.mode == Mode::Strict {
                return Err(AssignError::Precondition(msg));
            }
            out.lost.push(msg);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    Unassigned { tree: usize, vertex: Vertex },
    EdgeOffCycle { tree: usize, edge: [Vertex; 3], clusters: [usize; 3] },
    OverCapacity { cluster: usize, load: usize, capacity: usize },
    LoadMismatch { cluster: usize, recorded: usize, actual: usize },
    RootMisplaced { tree: usize, expected: usize, got: usize },
    LowLeftover { cluster: usize, leftover: i64, capacity: usize },
    TravelTooLong { piece: usize, layer: usize, bound: usize },
    TooManyOffEdge { piece: usize, count: usize, bound: u128 },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentReport {
    pub violations: Vec<Violation>,
    /// Largest layer (piece-local) assigned outside the piece's matching edge.
    pub max_travel_layer: usize,
    /// Largest number of off-edge vertices in one piece.
    pub max_off_edge: usize,
}

impl AssignmentReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks an assignment from the tree edges and raw cluster indices:
/// cycle edges, capacities, roots, final leftovers `>= ζ·capacity` and that
/// each piece leaves its matching edge only in its first `6t` layers.
pub fn verify_assignment<S: Scalar>(p: &AssignmentProblem<S>, asg: &ClusterAssignment) -> AssignmentReport {
    let t = p.t;
    let mut r = AssignmentReport::default();
    let mut load = vec![0usize; t];
    for (j, rt) in p.trees.iter().enumerate() {
        let Some(a) = asg.a.get(j) else {
            r.violations.push(Violation::Unassigned { tree: j, vertex: 0 });
            continue;
        };
        for v in 0..rt.tree.n() {
            match a.get(v) {
                Some(&c) if c < t => load[c] += 1,
                _ => r.violations.push(Violation::Unassigned { tree: j, vertex: v }),
            }
        }
        for e in rt.tree.graph().edges() {
            let cl = e.map(|v| a.get(v).copied().unwrap_or(UNSET));
            if cl.iter().all(|&c| c < t) && !on_cycle(t, cl) {
                r.violations.push(Violation::EdgeOffCycle { tree: j, edge: *e, clusters: cl });
            }
        }
        let got = a.get(rt.tree.root()).copied().unwrap_or(UNSET);
        if got != rt.root_cluster {
            r.violations.push(Violation::RootMisplaced { tree: j, expected: rt.root_cluster, got });
        }
    }
    for c in 0..t {
        let cap = p.capacities.get(c).copied().unwrap_or(0);
        if load[c] > cap {
            r.violations.push(Violation::OverCapacity { cluster: c, load: load[c], capacity: cap });
        }
        if asg.loads.get(c) != Some(&load[c]) {
            let recorded = asg.loads.get(c).copied().unwrap_or(0);
            r.violations.push(Violation::LoadMismatch { cluster: c, recorded, actual: load[c] });
        }
        let leftover = cap as i64 - load[c] as i64;
        if leftover < 0 || !at_least(leftover as usize, &p.zeta, cap) {
            r.violations.push(Violation::LowLeftover { cluster: c, leftover, capacity: cap });
        }
    }
    let layers: Vec<Vec<usize>> = p.trees.iter().map(|rt| layering(&rt.tree).layer).collect();
    let off_bound = travel_vertex_bound(t, p.max_degree);
    for (i, tr) in asg.trace.iter().enumerate() {
        let (Some(a), Some(ly)) = (asg.a.get(tr.tree), layers.get(tr.tree)) else { continue };
        let z = tr.matching_edge;
        let base = ly[tr.root];
        let mut count = 0;
        for &v in &tr.vertices {
            let c = a[v];
            if v == tr.root || (c >= 3 * z && c < 3 * z + 3) {
                continue;
            }
            count += 1;
            let local = ly[v] - base + 1;
            r.max_travel_layer = r.max_travel_layer.max(local);
            if local > 6 * t {
                r.violations.push(Violation::TravelTooLong { piece: i, layer: local, bound: 6 * t });
            }
        }
        r.max_off_edge = r.max_off_edge.max(count);
        if count as u128 > off_bound {
            r.violations.push(Violation::TooManyOffEdge { piece: i, count, bound: off_bound });
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loose_tree::{loose_path, random_loose_tree};
    use crate::Hypergraph3;
    use proptest::prelude::*;

    type Q = Rational;

    fn problem(t: usize, cap: usize, trees: Vec<(LooseTree, usize)>, target: usize) -> AssignmentProblem<Q> {
        AssignmentProblem {
            t,
            capacities: vec![cap; t],
            zeta: Q::new(1, 20),
            nu: Q::new(1, 10),
            trees: trees.into_iter().map(|(tree, root_cluster)| RootedTree { tree, root_cluster }).collect(),
            max_degree: 3,
            piece_target: target,
            mode: Mode::Strict,
        }
    }

    #[test]
    fn matchings() {
        assert_eq!(every_third_matching(7), vec![[0, 1, 2], [3, 4, 5]]);
        assert_eq!(every_third_matching(3), vec![[0, 1, 2]]);
        assert_eq!(every_third_matching(8).len(), 2);
        assert!(on_cycle(7, [6, 0, 1]) && on_cycle(7, [5, 6, 0]) && !on_cycle(7, [0, 1, 3]));
    }

    #[test]
    fn single_edge() {
        let tree = LooseTree::new(Hypergraph3::new(3, [[0, 1, 2]]).unwrap(), 0).unwrap();
        let p = problem(7, 40, vec![(tree, 0)], 7);
        let asg = assign_clusters(&p).unwrap();
        let mut got = asg.a[0].clone();
        got.sort_unstable();
        assert_eq!(got, vec![0, 1, 2]);
        assert_eq!(asg.a[0][0], 0);
        assert!(verify_assignment(&p, &asg).is_ok());
    }

    #[test]
    fn long_path() {
        let p = problem(7, 40, vec![(loose_path(41).unwrap(), 0)], 7);
        let asg = assign_clusters(&p).unwrap();
        let report = verify_assignment(&p, &asg);
        assert!(report.is_ok(), "{report:?}");
        assert!(asg.trace.len() > 1);
        assert!(asg.trace.iter().all(|tr| tr.aligned_at.is_none_or(|b| b <= 42)));
    }

    #[test]
    fn precondition_errors() {
        let big = |s| random_loose_tree(101, 3, s).unwrap();
        let p = problem(7, 40, vec![(big(1), 0), (big(2), 1), (big(3), 2)], 7);
        assert!(matches!(assign_clusters(&p), Err(AssignError::Precondition(_))));
        let p = problem(6, 40, vec![(big(1), 0)], 7);
        assert_eq!(assign_clusters(&p).unwrap_err(), AssignError::BadClusterCount(6));
        let p = problem(7, 40, vec![(big(1), 1), (big(2), 1)], 7);
        assert_eq!(assign_clusters(&p).unwrap_err(), AssignError::RootClustersNotDistinct);
        let p = problem(7, 40, vec![(big(1), 5)], 7);
        assert!(matches!(assign_clusters(&p), Err(AssignError::RootClusterOutOfRange { .. })));
    }

    #[test]
    fn best_effort_reports_lost_guarantees() {
        let mut p = problem(7, 20, vec![(random_loose_tree(101, 3, 4).unwrap(), 0)], 5);
        assert!(assign_clusters(&p).is_err());
        p.mode = Mode::BestEffort;
        let asg = assign_clusters(&p).unwrap();
        assert!(!asg.lost.is_empty());
        assert!(!verify_assignment(&p, &asg).is_ok());
    }

    #[test]
    fn corruptions_are_flagged() {
        let p = problem(7, 40, vec![(loose_path(41).unwrap(), 0)], 7);
        let asg = assign_clusters(&p).unwrap();
        let mut moved = asg.clone();
        let v = 10;
        let old = moved.a[0][v];
        moved.a[0][v] = (old + 3) % 7;
        moved.loads[old] -= 1;
        moved.loads[(old + 3) % 7] += 1;
        let r = verify_assignment(&p, &moved);
        assert!(r.violations.iter().any(|x| matches!(x, Violation::EdgeOffCycle { .. })));
        let mut tight = p.clone();
        tight.capacities = asg.loads.clone();
        let r = verify_assignment(&tight, &asg);
        assert!(r.violations.iter().any(|x| matches!(x, Violation::LowLeftover { .. })));
        let mut over = p.clone();
        over.capacities[asg.a[0][0]] = 0;
        let r = verify_assignment(&over, &asg);
        assert!(r.violations.iter().any(|x| matches!(x, Violation::OverCapacity { .. })));
    }

    #[test]
    fn problems_round_trip_through_json() {
        let p = problem(7, 40, vec![(loose_path(9).unwrap(), 2)], 3);
        let text = serde_json::to_string(&p).unwrap();
        let back: AssignmentProblem<Q> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(assign_clusters(&back).unwrap(), assign_clusters(&p).unwrap());
    }

    #[test]
    fn alignment_happens_within_six_t_layers() {
        // Direct check of the walk: a long path rooted far from any roomy edge.
        for t in [4, 5, 7, 8, 10, 11] {
            let mut p = problem(t, 200, vec![(loose_path(31).unwrap(), 0), (loose_path(151).unwrap(), 1)], 5);
            p.nu = Q::new(0, 1);
            // Make the first matching edge look full so every inner piece travels.
            p.capacities[0] = 40;
            p.capacities[1] = 40;
            p.capacities[2] = 40;
            p.zeta = Q::new(1, 100);
            if let Ok(asg) = assign_clusters(&p) {
                assert!(verify_assignment(&p, &asg).is_ok());
                for tr in &asg.trace {
                    assert!(tr.aligned_at.is_none_or(|b| b <= 6 * t));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn successful_runs_verify(seed in 0u64..10_000, t_idx in 0usize..6, s in 1usize..=4) {
            let t = [4, 5, 7, 8, 10, 11][t_idx];
            let s = s.min(t - 2);
            let trees: Vec<(LooseTree, usize)> =
                (0..s).map(|j| (random_loose_tree(2 * (10 + (seed as usize + j) % 20) + 1, 3, seed + j as u64).unwrap(), j)).collect();
            let p = problem(t, 60, trees, 6);
            if let Ok(asg) = assign_clusters(&p) {
                let r = verify_assignment(&p, &asg);
                prop_assert!(r.is_ok(), "{:?}", r);
                prop_assert_eq!(assign_clusters(&p).unwrap(), asg);
            }
        }
    }
}
