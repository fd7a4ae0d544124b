//! Shortest paths over nonnegative edge costs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::Add;

use num_traits::Zero;

/// Directed graph as adjacency lists of `(target, cost)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphView<C> {
    pub adj: Vec<Vec<(usize, C)>>,
}

impl<C> GraphView<C> {
    pub fn new(n: usize) -> Self {
        GraphView {
            adj: (0..n).map(|_| vec![]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cost: C) {
        self.adj[from].push((to, cost));
    }
}

/// Dijkstra from `from`, stopping as soon as a settled node satisfies `stop`.
fn search<C, F>(g: &GraphView<C>, from: usize, mut stop: F) -> (Vec<Option<C>>, Option<usize>)
where
    C: Copy + Ord + Zero + Add<Output = C>,
    F: FnMut(usize) -> bool,
{
    let mut dist: Vec<Option<C>> = vec![None; g.len()];
    let mut done = vec![false; g.len()];
    let mut heap = BinaryHeap::new();
    dist[from] = Some(C::zero());
    heap.push(Reverse((C::zero(), from)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if stop(u) {
            return (dist, Some(u));
        }
        for &(v, w) in &g.adj[u] {
            let nd = d + w;
            if dist[v].is_none_or(|old| nd < old) {
                dist[v] = Some(nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    (dist, None)
}

/// Cost of the cheapest directed path, `None` if unreachable.
pub fn shortest_cost<C>(g: &GraphView<C>, from: usize, to: usize) -> Option<C>
where
    C: Copy + Ord + Zero + Add<Output = C>,
{
    let (dist, hit) = search(g, from, |u| u == to);
    hit.and(dist[to])
}

/// Cost to the nearest node satisfying `pred`, `None` if there is none.
pub fn min_cost_to_satisfying<C, P>(g: &GraphView<C>, from: usize, mut pred: P) -> Option<C>
where
    C: Copy + Ord + Zero + Add<Output = C>,
    P: FnMut(usize) -> bool,
{
    let (dist, hit) = search(g, from, &mut pred);
    hit.and_then(|u| dist[u])
}

/// Costs from `from` to every node.
pub fn all_costs_from<C>(g: &GraphView<C>, from: usize) -> Vec<Option<C>>
where
    C: Copy + Ord + Zero + Add<Output = C>,
{
    search(g, from, |_| false).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Decimal;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn same_node_costs_nothing() {
        let g: GraphView<i64> = GraphView::new(3);
        assert_eq!(shortest_cost(&g, 1, 1), Some(0));
        assert_eq!(shortest_cost(&g, 0, 1), None);
    }

    #[test]
    fn detour_beats_direct_edge() {
        let mut g = GraphView::new(4);
        g.add_edge(0, 3, d("82.860"));
        g.add_edge(0, 1, d("0.400"));
        g.add_edge(1, 2, d("0.400"));
        g.add_edge(2, 3, d("0.383"));
        assert_eq!(shortest_cost(&g, 0, 3), Some(d("1.183")));
    }

    #[test]
    fn nearest_satisfying() {
        let mut g = GraphView::new(4);
        g.add_edge(0, 1, 5);
        g.add_edge(0, 2, 2);
        g.add_edge(2, 3, 1);
        assert_eq!(min_cost_to_satisfying(&g, 0, |u| u == 1 || u == 3), Some(3));
        assert_eq!(min_cost_to_satisfying(&g, 0, |u| u == 0), Some(0));
        assert_eq!(min_cost_to_satisfying(&g, 1, |u| u == 0), None);
    }
}
