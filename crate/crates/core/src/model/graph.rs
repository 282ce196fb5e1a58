//! Dependency graph over definitions. Edge `a -> b` means the expression of
//! definition `a` references `b`; inputs appear as sinks.

use std::collections::BTreeMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::DfsPostOrder;

use super::ast::ContractAst;

#[derive(Clone, Debug)]
pub struct DependencyGraph {
    graph: DiGraph<String, ()>,
    index: BTreeMap<String, NodeIndex>,
    definitions: Vec<NodeIndex>,
}

pub fn dependency_graph(ast: &ContractAst) -> DependencyGraph {
    let mut graph = DiGraph::new();
    let mut index = BTreeMap::new();
    let mut definitions = Vec::new();
    for d in &ast.definitions {
        // duplicates are a validation error; keep the first
        if !index.contains_key(&d.name) {
            let n = graph.add_node(d.name.clone());
            index.insert(d.name.clone(), n);
            definitions.push(n);
        }
    }
    for i in &ast.inputs {
        if !index.contains_key(&i.name) {
            index.insert(i.name.clone(), graph.add_node(i.name.clone()));
        }
    }
    for d in &ast.definitions {
        let from = index[&d.name];
        for (name, _) in d.expr.references() {
            if let Some(&to) = index.get(name) {
                if !graph.contains_edge(from, to) {
                    graph.add_edge(from, to, ());
                }
            }
        }
    }
    DependencyGraph {
        graph,
        index,
        definitions,
    }
}

impl DependencyGraph {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// All edges as `(from, to)` name pairs, sorted.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out: Vec<_> = self
            .graph
            .edge_indices()
            .filter_map(|e| self.graph.edge_endpoints(e))
            .map(|(a, b)| (self.graph[a].clone(), self.graph[b].clone()))
            .collect();
        out.sort();
        out
    }

    pub fn depends_on(&self, from: &str, to: &str) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.graph.contains_edge(a, b),
            _ => false,
        }
    }

    /// Strongly connected components that form cycles (size >= 2, or a
    /// self-loop). Members are in definition order; components are ordered by
    /// their first member.
    pub fn cycles(&self) -> Vec<Vec<String>> {
        let position = |n: &NodeIndex| self.definitions.iter().position(|d| d == n);
        let mut out: Vec<(usize, Vec<String>)> = tarjan_scc(&self.graph)
            .into_iter()
            .filter(|scc| scc.len() >= 2 || self.graph.contains_edge(scc[0], scc[0]))
            .map(|mut scc| {
                scc.sort_by_key(|n| position(n));
                let first = position(&scc[0]).unwrap_or(usize::MAX);
                (first, scc.iter().map(|n| self.graph[*n].clone()).collect())
            })
            .collect();
        out.sort();
        out.into_iter().map(|(_, names)| names).collect()
    }

    /// Definitions with every dependency before its dependents, ties broken
    /// by source order. `Err` carries the first cycle found.
    pub fn evaluation_order(&self) -> Result<Vec<String>, Vec<String>> {
        if let Some(cycle) = self.cycles().into_iter().next() {
            return Err(cycle);
        }
        let mut order = Vec::with_capacity(self.definitions.len());
        let mut dfs = DfsPostOrder::empty(&self.graph);
        for &start in &self.definitions {
            if dfs.discovered.contains(start.index()) {
                continue;
            }
            dfs.move_to(start);
            while let Some(n) = dfs.next(&self.graph) {
                if self.definitions.contains(&n) {
                    order.push(self.graph[n].clone());
                }
            }
        }
        Ok(order)
    }
}
