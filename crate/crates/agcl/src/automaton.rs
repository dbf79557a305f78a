//! Deterministic finite automata over proposition-set symbols, plus the
//! path machinery curriculum generation needs: simple accepting paths,
//! distance to acceptance, and DOT export.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltlf::{Alphabet, Symbol};

/// Index of a DFA node.
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    /// An accepting node is reachable, but only through transitions that
    /// require two or more propositions in one symbol. The environment
    /// emits at most one event per step, so such specifications cannot be
    /// staged into a curriculum.
    #[error(
        "accepting nodes are reachable only via simultaneous-event transitions \
         (e.g. node {from} -> {to} needs {symbol}); unsupported by the event model"
    )]
    MultiPropositionOnly {
        from: NodeId,
        to: NodeId,
        symbol: String,
    },
}

/// A complete DFA: total transition table over `2^AP`, one initial node,
/// a set of accepting nodes. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfa {
    alphabet: Alphabet,
    initial: NodeId,
    accepting: Vec<bool>,
    /// `transitions[node][symbol.0] = successor`; row length is
    /// `alphabet.symbol_count()`.
    transitions: Vec<Vec<NodeId>>,
}

impl Dfa {
    /// Builds a DFA, checking totality and index bounds.
    pub fn new(
        alphabet: Alphabet,
        initial: NodeId,
        accepting: Vec<bool>,
        transitions: Vec<Vec<NodeId>>,
    ) -> Self {
        let n = transitions.len();
        assert!(n > 0, "a DFA needs at least one node");
        assert!(initial < n, "initial node out of range");
        assert_eq!(accepting.len(), n, "accepting flags must cover all nodes");
        let width = alphabet.symbol_count();
        for (i, row) in transitions.iter().enumerate() {
            assert_eq!(row.len(), width, "node {i} transition row incomplete");
            for &succ in row {
                assert!(succ < n, "node {i} has out-of-range successor {succ}");
            }
        }
        Self {
            alphabet,
            initial,
            accepting,
            transitions,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn node_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> NodeId {
        self.initial
    }

    pub fn is_accepting(&self, node: NodeId) -> bool {
        self.accepting[node]
    }

    pub fn accepting_count(&self) -> usize {
        self.accepting.iter().filter(|&&a| a).count()
    }

    /// The transition `δ(node, symbol)`.
    pub fn step(&self, node: NodeId, symbol: Symbol) -> NodeId {
        self.transitions[node][symbol.0 as usize]
    }

    /// Advances the synchronous monitor by one labeled environment step.
    /// Returns the successor node and whether it is accepting.
    pub fn advance_monitor(&self, node: NodeId, labels: Symbol) -> (NodeId, bool) {
        let next = self.step(node, labels);
        (next, self.accepting[next])
    }

    /// Runs a whole trace from the initial node.
    pub fn accepts(&self, trace: &[Symbol]) -> bool {
        let mut node = self.initial;
        for &sym in trace {
            node = self.step(node, sym);
        }
        self.accepting[node]
    }

    /// Minimum number of non-self-loop transitions from `node` to any
    /// accepting node, or `None` if acceptance is unreachable. Only edges
    /// the event model can realize count: symbols carrying at most one
    /// proposition.
    pub fn accept_distance(&self, node: NodeId) -> Option<usize> {
        let mut symbols = vec![Symbol::EMPTY];
        symbols.extend((0..self.alphabet.len()).map(Symbol::singleton));
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::new();
        dist[node] = 0;
        queue.push_back(node);
        while let Some(u) = queue.pop_front() {
            if self.accepting[u] {
                return Some(dist[u]);
            }
            for &sym in &symbols {
                let v = self.step(u, sym);
                if v != u && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Progress edges out of `node` under the single-event model: for each
    /// distinct successor, the sorted proposition indices whose singleton
    /// symbol reaches it. Self-loops are excluded.
    fn single_event_edges(&self, node: NodeId) -> Vec<(NodeId, Vec<usize>)> {
        let mut out: Vec<(NodeId, Vec<usize>)> = Vec::new();
        for prop in 0..self.alphabet.len() {
            let succ = self.step(node, Symbol::singleton(prop));
            if succ == node {
                continue;
            }
            match out.iter_mut().find(|(n, _)| *n == succ) {
                Some((_, props)) => props.push(prop),
                None => out.push((succ, vec![prop])),
            }
        }
        out.sort_by_key(|(n, _)| *n);
        out
    }

    /// All simple paths from the initial node to an accepting node,
    /// following only single-event progress edges, in lexicographic order
    /// of node indices.
    ///
    /// An empty result means no accepting node is reachable at all (an
    /// unsatisfiable specification). If acceptance is reachable but only
    /// through simultaneous-event transitions, that is an error: the
    /// environment cannot realize such paths.
    pub fn get_trace_paths(&self) -> Result<Vec<TracePath>, AutomatonError> {
        let mut paths = Vec::new();
        let mut nodes = vec![self.initial];
        let mut labels: Vec<Vec<usize>> = Vec::new();
        self.dfs_paths(&mut nodes, &mut labels, &mut paths);

        if paths.is_empty() {
            if let Some(edge) = self.reachable_only_with_multi_prop() {
                return Err(edge);
            }
        }
        Ok(paths)
    }

    fn dfs_paths(
        &self,
        nodes: &mut Vec<NodeId>,
        labels: &mut Vec<Vec<usize>>,
        out: &mut Vec<TracePath>,
    ) {
        let here = *nodes.last().expect("path never empty");
        if self.accepting[here] {
            out.push(TracePath {
                nodes: nodes.clone(),
                step_labels: labels.clone(),
            });
            // Accepting nodes can still progress to other accepting nodes,
            // so the search continues below them.
        }
        for (succ, props) in self.single_event_edges(here) {
            if nodes.contains(&succ) {
                continue;
            }
            nodes.push(succ);
            labels.push(props);
            self.dfs_paths(nodes, labels, out);
            nodes.pop();
            labels.pop();
        }
    }

    /// Looks for an accepting node reachable through arbitrary symbols, to
    /// distinguish "unsatisfiable" from "needs simultaneous events".
    fn reachable_only_with_multi_prop(&self) -> Option<AutomatonError> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::new();
        seen[self.initial] = true;
        queue.push_back(self.initial);
        let mut witness = None;
        while let Some(u) = queue.pop_front() {
            for sym in 0..self.alphabet.symbol_count() {
                let v = self.transitions[u][sym];
                if v == u || seen[v] {
                    continue;
                }
                seen[v] = true;
                queue.push_back(v);
                if self.accepting[v] && witness.is_none() {
                    witness = Some(AutomatonError::MultiPropositionOnly {
                        from: u,
                        to: v,
                        symbol: self.alphabet.render_symbol(Symbol(sym as u16)),
                    });
                }
            }
        }
        witness
    }

    /// Language-preserving minimization: drops unreachable nodes, merges
    /// indistinguishable ones with Hopcroft's partition refinement, and
    /// renumbers breadth-first from the initial node (symbols in ascending
    /// bitmask order) so equal languages yield identical tables.
    pub fn minimized(&self) -> Dfa {
        let symbol_count = self.alphabet.symbol_count();

        // Restrict to reachable nodes.
        let mut reach_id = vec![usize::MAX; self.node_count()];
        let mut reachable = Vec::new();
        let mut queue = VecDeque::new();
        reach_id[self.initial] = 0;
        reachable.push(self.initial);
        queue.push_back(self.initial);
        while let Some(u) = queue.pop_front() {
            for &v in &self.transitions[u] {
                if reach_id[v] == usize::MAX {
                    reach_id[v] = reachable.len();
                    reachable.push(v);
                    queue.push_back(v);
                }
            }
        }
        let n = reachable.len();
        let delta: Vec<Vec<usize>> = reachable
            .iter()
            .map(|&old| {
                self.transitions[old]
                    .iter()
                    .map(|&succ| reach_id[succ])
                    .collect()
            })
            .collect();
        let accepting: Vec<bool> = reachable.iter().map(|&old| self.accepting[old]).collect();

        // Hopcroft refinement: split blocks against the predecessors of
        // each worklist block per symbol, re-queueing the smaller half.
        let accepting_block: BTreeSet<usize> = (0..n).filter(|&i| accepting[i]).collect();
        let rejecting_block: BTreeSet<usize> = (0..n).filter(|&i| !accepting[i]).collect();
        let mut blocks: Vec<BTreeSet<usize>> = Vec::new();
        let mut worklist: VecDeque<BTreeSet<usize>> = VecDeque::new();
        for b in [accepting_block, rejecting_block] {
            if !b.is_empty() {
                blocks.push(b.clone());
                worklist.push_back(b);
            }
        }
        while let Some(splitter) = worklist.pop_front() {
            for sym in 0..symbol_count {
                let preds: BTreeSet<usize> = (0..n)
                    .filter(|&s| splitter.contains(&delta[s][sym]))
                    .collect();
                if preds.is_empty() {
                    continue;
                }
                let mut next_blocks = Vec::with_capacity(blocks.len());
                for block in blocks.drain(..) {
                    let inside: BTreeSet<usize> =
                        block.intersection(&preds).copied().collect();
                    if inside.is_empty() || inside.len() == block.len() {
                        next_blocks.push(block);
                        continue;
                    }
                    let outside: BTreeSet<usize> =
                        block.difference(&preds).copied().collect();
                    worklist.push_back(if inside.len() <= outside.len() {
                        inside.clone()
                    } else {
                        outside.clone()
                    });
                    next_blocks.push(inside);
                    next_blocks.push(outside);
                }
                blocks = next_blocks;
            }
        }

        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &s in block {
                block_of[s] = b;
            }
        }

        // Canonical renumbering by BFS over blocks.
        let mut new_id = vec![usize::MAX; blocks.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        let start = block_of[0];
        new_id[start] = 0;
        order.push(start);
        queue.push_back(start);
        while let Some(b) = queue.pop_front() {
            let rep = *blocks[b].iter().next().expect("blocks are nonempty");
            for sym in 0..symbol_count {
                let succ_block = block_of[delta[rep][sym]];
                if new_id[succ_block] == usize::MAX {
                    new_id[succ_block] = order.len();
                    order.push(succ_block);
                    queue.push_back(succ_block);
                }
            }
        }

        let transitions: Vec<Vec<usize>> = order
            .iter()
            .map(|&b| {
                let rep = *blocks[b].iter().next().expect("blocks are nonempty");
                (0..symbol_count)
                    .map(|sym| new_id[block_of[delta[rep][sym]]])
                    .collect()
            })
            .collect();
        let accepting: Vec<bool> = order
            .iter()
            .map(|&b| accepting[*blocks[b].iter().next().expect("nonempty")])
            .collect();

        Dfa::new(self.alphabet.clone(), 0, accepting, transitions)
    }

    /// Graphviz DOT rendering; accepting nodes are double circles, edges
    /// are grouped per successor and labeled with their symbol sets.
    pub fn export_dot(&self) -> String {
        let mut s = String::from("digraph dfa {\n  rankdir=LR;\n  node [shape=circle];\n");
        s.push_str(&format!(
            "  init [shape=point]; init -> n{};\n",
            self.initial
        ));
        for node in 0..self.node_count() {
            let shape = if self.accepting[node] {
                " [shape=doublecircle]"
            } else {
                ""
            };
            s.push_str(&format!("  n{node} [label=\"ω{node}\"]{shape};\n"));
        }
        for node in 0..self.node_count() {
            let mut by_succ: Vec<(NodeId, Vec<String>)> = Vec::new();
            for sym in 0..self.alphabet.symbol_count() {
                let succ = self.transitions[node][sym];
                let label = self.alphabet.render_symbol(Symbol(sym as u16));
                match by_succ.iter_mut().find(|(n, _)| *n == succ) {
                    Some((_, ls)) => ls.push(label),
                    None => by_succ.push((succ, vec![label])),
                }
            }
            for (succ, ls) in by_succ {
                s.push_str(&format!(
                    "  n{node} -> n{succ} [label=\"{}\"];\n",
                    ls.join("|")
                ));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// A simple accepting path `ω0 … ωn` with, per step, the proposition
/// indices whose single-event symbols realize that transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracePath {
    nodes: Vec<NodeId>,
    step_labels: Vec<Vec<usize>>,
}

impl TracePath {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Number of transitions in the path.
    pub fn len(&self) -> usize {
        self.step_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.step_labels.is_empty()
    }

    /// Proposition indices labeling step `i` (from node `i` to `i + 1`).
    pub fn step_label(&self, i: usize) -> &[usize] {
        &self.step_labels[i]
    }

    /// The set of nodes occurring in the path.
    pub fn occ(&self) -> BTreeSet<NodeId> {
        self.nodes.iter().copied().collect()
    }

    /// Human-readable rendering like `ω0 -tree-> ω1 -rock-> ω3`.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let mut s = format!("ω{}", self.nodes[0]);
        for (i, props) in self.step_labels.iter().enumerate() {
            let names: Vec<&str> = props.iter().map(|&p| alphabet.name(p)).collect();
            s.push_str(&format!(" -{}-> ω{}", names.join("|"), self.nodes[i + 1]));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltlf::{compile_dfa, parse_ltlf};

    fn fig1() -> (Alphabet, Dfa) {
        let a = Alphabet::new(["tree", "rock"]).unwrap();
        let f = parse_ltlf("F(tree) & F(rock)", &a).unwrap();
        let d = compile_dfa(&f, &a).unwrap();
        (a, d)
    }

    #[test]
    fn step_follows_events_through_the_two_event_dfa() {
        let (a, d) = fig1();
        let w0 = d.initial();
        let w1 = d.step(w0, a.symbol(&["tree"]));
        assert_ne!(w0, w1);
        assert_eq!(d.step(w0, Symbol::EMPTY), w0);
        let w3 = d.step(w1, a.symbol(&["rock"]));
        assert!(d.is_accepting(w3));
    }

    #[test]
    fn monitor_reports_acceptance_on_arrival() {
        let (a, d) = fig1();
        let w0 = d.initial();
        let (w2, acc) = d.advance_monitor(w0, a.symbol(&["rock"]));
        assert!(!acc);
        let (w3, acc) = d.advance_monitor(w2, a.symbol(&["tree"]));
        assert!(acc);
        // Empty labels on a self-looping node keep node and verdict.
        let (same, acc2) = d.advance_monitor(w3, Symbol::EMPTY);
        assert_eq!(same, w3);
        assert!(acc2);
    }

    #[test]
    fn two_simple_paths_through_the_two_event_dfa() {
        let (a, d) = fig1();
        let paths = d.get_trace_paths().unwrap();
        assert_eq!(paths.len(), 2);
        for p in &paths {
            assert_eq!(p.len(), 2);
            assert_eq!(p.nodes()[0], d.initial());
            assert!(d.is_accepting(*p.nodes().last().unwrap()));
            assert_eq!(p.occ().len(), p.nodes().len());
        }
        // Lexicographic order: the tree-first path (through node 1) comes
        // before the rock-first path (through node 2).
        let renders: Vec<String> = paths.iter().map(|p| p.render(&a)).collect();
        assert!(renders[0].contains("tree"), "{renders:?}");
    }

    #[test]
    fn initial_accepting_yields_the_empty_path() {
        // Single accepting node with self-loops on every symbol.
        let a = Alphabet::new(["p"]).unwrap();
        let d = Dfa::new(a, 0, vec![true], vec![vec![0, 0]]);
        let paths = d.get_trace_paths().unwrap();
        assert_eq!(paths.len(), 1);
        assert!(paths[0].is_empty());
        assert_eq!(paths[0].occ().len(), 1);
    }

    #[test]
    fn unsatisfiable_spec_yields_no_paths() {
        let a = Alphabet::new(["p"]).unwrap();
        let f = parse_ltlf("p & !p", &a).unwrap();
        let d = compile_dfa(&f, &a).unwrap();
        assert!(d.get_trace_paths().unwrap().is_empty());
    }

    #[test]
    fn simultaneous_event_requirement_is_an_error() {
        let a = Alphabet::new(["a", "b"]).unwrap();
        let f = parse_ltlf("F(a & b)", &a).unwrap();
        let d = compile_dfa(&f, &a).unwrap();
        let err = d.get_trace_paths().unwrap_err();
        assert!(matches!(err, AutomatonError::MultiPropositionOnly { .. }));
    }

    #[test]
    fn accept_distances_on_the_two_event_dfa() {
        let (a, d) = fig1();
        let w0 = d.initial();
        let w1 = d.step(w0, a.symbol(&["tree"]));
        let w3 = d.step(w1, a.symbol(&["rock"]));
        // BFS by hand on the 4-node DFA: accepting node 0, its
        // predecessors 1, the initial node 2.
        assert_eq!(d.accept_distance(w3), Some(0));
        assert_eq!(d.accept_distance(w1), Some(1));
        assert_eq!(d.accept_distance(w0), Some(2));
    }

    #[test]
    fn trap_states_have_no_accept_distance() {
        let a = Alphabet::new(["p"]).unwrap();
        let f = parse_ltlf("G p", &a).unwrap();
        let d = compile_dfa(&f, &a).unwrap();
        // Violating `G p` lands in a trap.
        let trap = d.step(d.initial(), Symbol::EMPTY);
        assert_eq!(d.accept_distance(trap), None);
        assert_eq!(d.step(trap, a.symbol(&["p"])), trap);
    }

    #[test]
    fn distance_zero_iff_accepting() {
        let (_, d) = fig1();
        for n in 0..d.node_count() {
            assert_eq!(d.accept_distance(n) == Some(0), d.is_accepting(n));
        }
    }

    #[test]
    fn dot_export_is_wellformed() {
        let (_, d) = fig1();
        let dot = d.export_dot();
        assert!(dot.starts_with("digraph dfa {"));
        assert!(dot.trim_end().ends_with('}'));
        assert_eq!(dot.matches("doublecircle").count(), 1);
        // One node line per node plus the init marker.
        assert_eq!(dot.matches("label=\"ω").count(), d.node_count());

        let single = Dfa::new(Alphabet::new(["p"]).unwrap(), 0, vec![true], vec![vec![0, 0]]);
        assert_eq!(single.export_dot().matches("doublecircle").count(), 1);
    }
}
