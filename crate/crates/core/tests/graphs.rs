//! Shortest paths against exhaustive enumeration, and map invariants along
//! random walks.

use proptest::prelude::*;
use sosnav_core::env_model::{generate_env, GeneratorParams, GeoTable};
use sosnav_core::graph::{shortest_path, LENGTH_TOLERANCE};
use sosnav_core::topo_map::TopoMap;
use sosnav_core::controller::Scene;
use sosnav_core::NodeId;

type Adj = Vec<Vec<(NodeId, f64)>>;

fn build(n: usize, edges: &[(usize, usize, u8)]) -> Adj {
    let mut adj: Adj = vec![Vec::new(); n];
    for &(a, b, w) in edges {
        if a == b || adj[a].iter().any(|&(x, _)| x.index() == b) {
            continue;
        }
        adj[a].push((NodeId::from(b), w as f64));
        adj[b].push((NodeId::from(a), w as f64));
    }
    adj
}

/// Every simple path from `from` to `to`, with its length.
fn all_simple_paths(adj: &Adj, from: usize, to: usize) -> Vec<(Vec<NodeId>, f64)> {
    fn go(adj: &Adj, to: usize, path: &mut Vec<NodeId>, len: f64, out: &mut Vec<(Vec<NodeId>, f64)>) {
        let here = path.last().unwrap().index();
        if here == to {
            out.push((path.clone(), len));
            return;
        }
        for &(n, w) in &adj[here] {
            if !path.contains(&n) {
                path.push(n);
                go(adj, to, path, len + w, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(adj, to, &mut vec![NodeId::from(from)], 0.0, &mut out);
    out
}

fn small_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, u8)>)> {
    (2usize..=8).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n, 1u8..=3), 0..=16)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn planner_matches_enumeration((n, edges) in small_graph()) {
        let adj = build(n, &edges);
        for from in 0..n {
            for to in 0..n {
                let got = shortest_path(NodeId::from(from), NodeId::from(to), |v| adj[v.index()].clone());
                let mut paths = all_simple_paths(&adj, from, to);
                if paths.is_empty() {
                    prop_assert!(got.is_err());
                    continue;
                }
                let best = paths.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                paths.retain(|p| p.1 <= best + LENGTH_TOLERANCE * best.max(1.0));
                paths.sort_by(|a, b| a.0.cmp(&b.0));
                let (path, len) = got.unwrap();
                prop_assert_eq!(&path, &paths[0].0);
                prop_assert!((len - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn geodesics_form_a_metric(seed in 0u64..20) {
        let env = generate_env(seed, &GeneratorParams { node_count: 16, room_count: 4, ..Default::default() }).unwrap();
        let geo = GeoTable::new(&env);
        let nodes: Vec<NodeId> = env.nodes().collect();
        for &a in &nodes {
            prop_assert_eq!(geo.distance(a, a).unwrap(), 0.0);
            for &b in &nodes {
                let ab = geo.distance(a, b).unwrap();
                prop_assert!((ab - geo.distance(b, a).unwrap()).abs() < 1e-9);
                for &c in &nodes {
                    prop_assert!(geo.distance(a, c).unwrap() <= ab + geo.distance(b, c).unwrap() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn map_invariants_hold_along_random_walks(seed in 0u64..6, choices in prop::collection::vec(any::<prop::sample::Index>(), 1..40)) {
        let env = generate_env(seed, &GeneratorParams { node_count: 20, room_count: 4, ..Default::default() }).unwrap();
        let scene = Scene::new(env.clone(), 16).unwrap();
        let mut map = TopoMap::new();
        let mut v = NodeId(0);
        let update = |map: &mut TopoMap, v: NodeId, t: usize| {
            let nb = env.neighbors(v).iter().map(|&(n, _)| (n, scene.observation(n).clone()));
            map.update(v, scene.observation(v).clone(), nb, t);
        };
        update(&mut map, v, 0);
        for (t, idx) in choices.iter().enumerate() {
            let nb = env.neighbors(v);
            let next = nb[idx.index(nb.len())].0;
            let frontier_before: Vec<NodeId> = map.frontier().collect();
            let visited_before = map.visited().count();
            update(&mut map, next, t + 1);
            map.check_invariants().map_err(TestCaseError::fail)?;
            prop_assert!(map.is_visited(next));
            if frontier_before.contains(&next) {
                prop_assert_eq!(map.visited().count(), visited_before + 1);
            }
            // map distances never beat the true graph distances
            let (_, d_map) = map.shortest_path(NodeId(0), next).unwrap();
            prop_assert!(d_map + 1e-9 >= scene.geo().distance(NodeId(0), next).unwrap());
            v = next;
        }
    }
}
