//! Charged-graph instances: hard cnf-xor formulas read off a graph.
//!
//! Every edge of an undirected multigraph becomes a variable and every
//! node an xor-clause requiring its incident edges to sum to the node's
//! boolean charge. Summing all node equations cancels every edge variable
//! (each edge has two endpoints), so a connected instance is satisfiable
//! exactly when the total charge is even. Oddly charged graphs defeat
//! resolution-style reasoning but fall to parity reasoning analytically:
//! fix the edges outside a spanning tree, let unit propagation determine
//! the tree edges leaf-to-root, and the final conflict's furthest-cut
//! parity explanation collapses to `⊤` — the learned clause is the empty
//! xor-clause, a proof that no choice of cycle edges could have helped.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Lit, Var, XorClause};
use crate::derivation::CutPolicy;
use crate::formula::CnfXorFormula;
use crate::learn::learnable_from_conflict;
use crate::xr::up::{UpMode, UpModule};
use crate::xr::{ExplainTarget, XorModule};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ParityGraphError {
    /// The node set is empty.
    NoNodes,
    /// An edge endpoint names a node outside the graph.
    EdgeOutOfRange { edge: usize, node: u32 },
    /// An edge joins a node to itself, which no variable can encode.
    SelfLoop { edge: usize },
    /// The formula mixes in or-clauses, which have no graph reading.
    HasOrClauses,
    /// A variable must occur in exactly two xor-clauses to act as an edge.
    BadOccurrence { var: Var, count: usize },
    /// No spanning tree reaches every node.
    Disconnected,
    /// The total charge is even, so the instance is satisfiable.
    EvenCharge,
}

impl fmt::Display for ParityGraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParityGraphError::NoNodes => write!(f, "the node set is empty"),
            ParityGraphError::EdgeOutOfRange { edge, node } => {
                write!(f, "edge {edge} ends at node {node}, which is outside the graph")
            }
            ParityGraphError::SelfLoop { edge } => write!(f, "edge {edge} is a self-loop"),
            ParityGraphError::HasOrClauses => {
                write!(f, "or-clauses have no graph reading")
            }
            ParityGraphError::BadOccurrence { var, count } => {
                write!(f, "variable {} occurs in {count} xor-clauses instead of two", var.id())
            }
            ParityGraphError::Disconnected => write!(f, "the graph is not connected"),
            ParityGraphError::EvenCharge => {
                write!(f, "the total charge is even, so the instance is satisfiable")
            }
        }
    }
}

impl std::error::Error for ParityGraphError {}

/// An undirected multigraph with a boolean charge per node.
///
/// Edge `i` stands for variable `i + 1`. Parallel edges are allowed (they
/// are distinct variables), self-loops are not (their variable would
/// cancel inside its own clause). Endpoints are stored low-to-high.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParityGraph {
    charges: Vec<bool>,
    edges: Vec<(u32, u32)>,
}

/// A completed spanning-tree refutation of an oddly charged graph.
#[derive(Clone, Debug)]
pub struct Refutation {
    /// Cycle-edge literals fixed to true, in assumption order.
    pub assumptions: Vec<Lit>,
    /// Tree-edge literals unit propagation determined, in derivation order.
    pub derived: Vec<Lit>,
    /// The clause learned from the final conflict: always the empty
    /// xor-clause, showing the node equations alone are infeasible.
    pub learned: XorClause,
    /// Dump of the derivation graph behind the conflict.
    pub dump: String,
}

impl ParityGraph {
    /// Validates endpoints and normalizes their order.
    pub fn new(
        charges: Vec<bool>,
        edges: Vec<(u32, u32)>,
    ) -> Result<ParityGraph, ParityGraphError> {
        if charges.is_empty() {
            return Err(ParityGraphError::NoNodes);
        }
        let n = charges.len() as u32;
        let mut norm = Vec::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u == v {
                return Err(ParityGraphError::SelfLoop { edge: i });
            }
            let far = u.max(v);
            if far >= n {
                return Err(ParityGraphError::EdgeOutOfRange { edge: i, node: far });
            }
            norm.push((u.min(v), far));
        }
        Ok(ParityGraph { charges, edges: norm })
    }

    /// A random connected graph: a spanning tree over `num_nodes` nodes
    /// plus distinct extra edges up to an average degree of `degree`, with
    /// random charges adjusted so their xor equals `charge`.
    pub fn random(num_nodes: usize, degree: usize, charge: bool, seed: u64) -> ParityGraph {
        assert!(num_nodes >= 2, "a random graph needs at least two nodes");
        let n = num_nodes as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut present = HashSet::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            edges.push((u, v));
            present.insert((u, v));
        }
        let max_edges = num_nodes * (num_nodes - 1) / 2;
        let want = (num_nodes * degree / 2).clamp(edges.len(), max_edges);
        let mut attempts = 0;
        while edges.len() < want && attempts < 64 * max_edges {
            attempts += 1;
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let e = (a.min(b), a.max(b));
            if a != b && present.insert(e) {
                edges.push(e);
            }
        }
        let mut charges: Vec<bool> = (0..num_nodes).map(|_| rng.gen()).collect();
        let total = charges.iter().fold(false, |acc, &c| acc ^ c);
        if total != charge {
            let flip = rng.gen_range(0..num_nodes);
            charges[flip] = !charges[flip];
        }
        ParityGraph { charges, edges }
    }

    /// A toroidal `m × m` grid: `m²` nodes of degree four joined to their
    /// wrap-around row and column neighbours by `2m²` edges, with a single
    /// charged node making the total charge odd.
    pub fn grid(m: usize) -> ParityGraph {
        assert!(m >= 2, "a toroidal grid needs at least two rows");
        let node = |r: usize, c: usize| (r % m * m + c % m) as u32;
        let mut edges = Vec::with_capacity(2 * m * m);
        for r in 0..m {
            for c in 0..m {
                let here = node(r, c);
                for other in [node(r, c + 1), node(r + 1, c)] {
                    edges.push((here.min(other), here.max(other)));
                }
            }
        }
        let mut charges = vec![false; m * m];
        charges[0] = true;
        ParityGraph { charges, edges }
    }

    /// Reads a graph back from a formula in which every variable occurs in
    /// exactly two xor-clauses and no or-clauses appear: clauses become
    /// nodes and shared variables the edges between them.
    pub fn from_xor_formula(f: &CnfXorFormula) -> Result<ParityGraph, ParityGraphError> {
        if !f.or_clauses().is_empty() {
            return Err(ParityGraphError::HasOrClauses);
        }
        if f.xor_clauses().is_empty() {
            return Err(ParityGraphError::NoNodes);
        }
        let mut owners: Vec<Vec<u32>> = vec![Vec::new(); f.num_vars() as usize + 1];
        for (node, c) in f.xor_clauses().iter().enumerate() {
            for v in c.vars() {
                owners[v.index()].push(node as u32);
            }
        }
        let mut edges = Vec::with_capacity(f.num_vars() as usize);
        for id in 1..=f.num_vars() {
            match owners[id as usize][..] {
                [a, b] => edges.push((a, b)),
                ref o => {
                    return Err(ParityGraphError::BadOccurrence {
                        var: Var::new(id),
                        count: o.len(),
                    })
                }
            }
        }
        let charges = f.xor_clauses().iter().map(XorClause::rhs).collect();
        ParityGraph::new(charges, edges)
    }

    pub fn num_nodes(&self) -> usize {
        self.charges.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn charges(&self) -> &[bool] {
        &self.charges
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Xor of all node charges; `true` makes the instance unsatisfiable.
    pub fn total_charge(&self) -> bool {
        self.charges.iter().fold(false, |acc, &c| acc ^ c)
    }

    /// One xor-clause per node over its incident edge variables.
    pub fn to_formula(&self) -> CnfXorFormula {
        let mut f = CnfXorFormula::new(self.edges.len() as u32);
        let mut incident: Vec<Vec<Var>> = vec![Vec::new(); self.charges.len()];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            let var = Var::new(i as u32 + 1);
            incident[u as usize].push(var);
            incident[v as usize].push(var);
        }
        for (vars, &charge) in incident.into_iter().zip(&self.charges) {
            f.add_xor_clause(XorClause::from_parts(vars, charge));
        }
        f
    }

    /// Analytic refutation of an oddly charged connected graph.
    ///
    /// Assumes every edge outside a breadth-first spanning tree positively
    /// (in ascending edge order) and lets unit propagation determine the
    /// tree edges until the last node equation closes into a conflict. The
    /// conflict's furthest-cut parity explanation must collapse to `⊤`:
    /// every node equation enters the sum exactly once and every assumed
    /// cycle edge twice, so the assumptions cancel and the learned clause
    /// is the empty one.
    pub fn spanning_tree_refutation(&self) -> Result<Refutation, ParityGraphError> {
        let n = self.num_nodes();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            incident[u as usize].push(i);
            incident[v as usize].push(i);
        }
        let mut visited = vec![false; n];
        let mut in_tree = vec![false; self.edges.len()];
        visited[0] = true;
        let mut queue = VecDeque::from([0u32]);
        while let Some(u) = queue.pop_front() {
            for &e in &incident[u as usize] {
                let (a, b) = self.edges[e];
                let w = if a == u { b } else { a };
                if !visited[w as usize] {
                    visited[w as usize] = true;
                    in_tree[e] = true;
                    queue.push_back(w);
                }
            }
        }
        if visited.iter().any(|&v| !v) {
            return Err(ParityGraphError::Disconnected);
        }
        if !self.total_charge() {
            return Err(ParityGraphError::EvenCharge);
        }
        let f = self.to_formula();
        let mut up = UpModule::new(f.num_vars(), f.xor_clauses(), UpMode::Full);
        let mut assumptions = Vec::new();
        let mut derived = Vec::new();
        let d = up.deduce();
        derived.extend(d.implied);
        let mut conflicted = d.conflict;
        for e in 0..self.edges.len() {
            if conflicted {
                break;
            }
            if in_tree[e] {
                continue;
            }
            let l = Lit::positive(Var::new(e as u32 + 1));
            assumptions.push(l);
            up.assign(l, assumptions.len() as u32);
            let d = up.deduce();
            derived.extend(d.implied);
            conflicted = d.conflict;
        }
        assert!(conflicted, "an odd total charge must close into a conflict");
        let parity = up
            .parity(ExplainTarget::Conflict, CutPolicy::Furthest)
            .expect("unit propagation always carries parity explanations");
        assert!(
            parity.is_tautology(),
            "the refutation must not depend on the assumed cycle edges"
        );
        Ok(Refutation {
            assumptions,
            derived,
            learned: learnable_from_conflict(&parity),
            dump: up.graph().dump(),
        })
    }
}
