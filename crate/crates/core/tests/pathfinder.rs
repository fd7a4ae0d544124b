mod common;

use chronoplan::pathfinder::{shortest_cost, GraphView};
use chronoplan::Decimal;
use proptest::prelude::*;

fn d(s: &str) -> Decimal {
    s.parse().unwrap()
}

#[test]
fn detour_fixture() {
    // Three short hops against one long edge, in both directions of insertion.
    for direct_first in [true, false] {
        let mut g = GraphView::new(4);
        if direct_first {
            g.add_edge(0, 3, d("82.860"));
        }
        g.add_edge(0, 1, d("0.400"));
        g.add_edge(1, 2, d("0.400"));
        g.add_edge(2, 3, d("0.383"));
        if !direct_first {
            g.add_edge(0, 3, d("82.860"));
        }
        assert_eq!(shortest_cost(&g, 0, 3), Some(d("1.183")));
        assert_eq!(shortest_cost(&g, 3, 0), None);
    }
}

#[test]
fn agrees_with_floyd_warshall() {
    let mut r = common::rng(5);
    for _ in 0..500 {
        common::check_graph(&mut r).unwrap();
    }
}

#[test]
fn integer_and_fixed_point_costs_agree() {
    let mut r = common::rng(6);
    for _ in 0..100 {
        let g = common::random_graph(&mut r);
        let mut gi = GraphView::new(g.len());
        for (a, es) in g.adj.iter().enumerate() {
            for &(b, c) in es {
                gi.add_edge(a, b, c.scaled_to_int(1000).unwrap());
            }
        }
        for a in 0..g.len() {
            for b in 0..g.len() {
                let x = shortest_cost(&g, a, b).map(|c| c.scaled_to_int(1000).unwrap());
                assert_eq!(x, shortest_cost(&gi, a, b));
            }
        }
    }
}

proptest! {
    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let g = common::random_graph(&mut common::rng(seed));
        let n = g.len();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if let (Some(ab), Some(bc)) = (shortest_cost(&g, a, b), shortest_cost(&g, b, c)) {
                        let ac = shortest_cost(&g, a, c);
                        prop_assert!(ac.is_some_and(|ac| ac <= ab + bc));
                    }
                }
            }
        }
    }
}
