use std::collections::{BTreeSet, VecDeque};

use super::MetricError;
use crate::lon::{FunnelDecomposition, Lon};

/// Pearson correlation with population normalization.
pub fn pcc(x1: &[f64], x2: &[f64]) -> Result<f64, MetricError> {
    if x1.len() != x2.len() {
        return Err(MetricError::LengthMismatch(x1.len(), x2.len()));
    }
    if x1.len() < 2 {
        return Err(MetricError::TooFewSamples {
            needed: 2,
            got: x1.len(),
        });
    }
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    if constant(x1) || constant(x2) {
        return Err(MetricError::UndefinedCorrelation);
    }
    let n = x1.len() as f64;
    let m1 = x1.iter().sum::<f64>() / n;
    let m2 = x2.iter().sum::<f64>() / n;
    let (mut cov, mut v1, mut v2) = (0.0, 0.0, 0.0);
    for (&a, &b) in x1.iter().zip(x2) {
        let (da, db) = (a - m1, b - m2);
        cov += da * db;
        v1 += da * da;
        v2 += db * db;
    }
    if v1 == 0.0 || v2 == 0.0 {
        return Err(MetricError::UndefinedCorrelation);
    }
    // sqrt(v * v) == v exactly, so identical inputs give exactly 1
    let product = v1 * v2;
    let denom = if product.is_normal() { product.sqrt() } else { v1.sqrt() * v2.sqrt() };
    Ok((cov / denom).clamp(-1.0, 1.0))
}

/// Edge records over possible ordered pairs, `|E| / (|V|(|V|-1))`.
pub fn network_density(lon: &Lon) -> Result<f64, MetricError> {
    let vn = lon.vertex_count();
    if vn < 2 {
        return Err(MetricError::Undefined("density needs at least two vertices".into()));
    }
    Ok(lon.edge_count() as f64 / (vn as f64 * (vn as f64 - 1.0)))
}

/// Mean number of steps from each vertex to the global optimum, following edge
/// direction, over the vertices that can reach it. Also returns the fraction of
/// vertices (optimum included) that can reach it.
pub fn shortest_path_length(lon: &Lon) -> (f64, f64) {
    let vn = lon.vertex_count();
    let Some(go) = lon.global_optimum() else {
        return (0.0, 0.0);
    };
    // unit weights: breadth-first order is Dijkstra order
    let mut dist = vec![usize::MAX; vn];
    dist[go] = 0;
    let mut queue = VecDeque::from([go]);
    while let Some(v) = queue.pop_front() {
        for &u in lon.in_neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let reachable: Vec<usize> = dist.iter().copied().filter(|&d| d != usize::MAX).collect();
    let fraction = reachable.len() as f64 / vn as f64;
    if reachable.len() <= 1 {
        return (0.0, fraction);
    }
    let total: usize = reachable.iter().sum();
    (total as f64 / (reachable.len() - 1) as f64, fraction)
}

/// Degree correlation across edges: for every edge record, the source's
/// remaining out-degree against the target's remaining in-degree.
pub fn assortativity(lon: &Lon) -> Result<f64, MetricError> {
    if lon.edge_count() < 2 {
        return Err(MetricError::Undefined("assortativity needs at least two edges".into()));
    }
    let (src, dst): (Vec<f64>, Vec<f64>) = lon
        .edges()
        .iter()
        .map(|e| {
            (
                lon.out_degree(e.source) as f64 - 1.0,
                lon.in_degree(e.target) as f64 - 1.0,
            )
        })
        .unzip();
    pcc(&src, &dst).map_err(|e| match e {
        MetricError::UndefinedCorrelation => {
            MetricError::Undefined("degree sequence at one edge end has zero variance".into())
        }
        other => other,
    })
}

/// Undirected simple projection as sorted neighbor sets.
fn undirected_neighbors(lon: &Lon) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); lon.vertex_count()];
    for e in lon.edges() {
        if e.source != e.target {
            adj[e.source].insert(e.target);
            adj[e.target].insert(e.source);
        }
    }
    adj
}

/// Local clustering coefficient of every vertex on the undirected projection.
pub fn local_clustering(lon: &Lon) -> Vec<f64> {
    let adj = undirected_neighbors(lon);
    adj.iter()
        .map(|nbrs| {
            let k = nbrs.len();
            if k < 2 {
                return 0.0;
            }
            let list: Vec<usize> = nbrs.iter().copied().collect();
            let mut links = 0usize;
            for (i, &a) in list.iter().enumerate() {
                for &b in &list[i + 1..] {
                    if adj[a].contains(&b) {
                        links += 1;
                    }
                }
            }
            links as f64 / (k * (k - 1) / 2) as f64
        })
        .collect()
}

pub fn average_clustering(lon: &Lon) -> f64 {
    if lon.is_empty() {
        return 0.0;
    }
    let c = local_clustering(lon);
    c.iter().sum::<f64>() / c.len() as f64
}

/// Rich-club coefficient by out-degree, `2 E(>=k) / (N(>=k) (N(>=k) - 1))`.
///
/// The factor 2 is kept on directed edge records, so values above 1 are
/// possible on dense networks. Entries with fewer than two rich vertices are
/// omitted.
pub fn rich_club_curve(lon: &Lon, k_values: &[usize]) -> Vec<(usize, f64)> {
    k_values
        .iter()
        .filter_map(|&k| {
            let rich: Vec<bool> = (0..lon.vertex_count()).map(|v| lon.out_degree(v) >= k).collect();
            let n = rich.iter().filter(|&&r| r).count();
            if n < 2 {
                return None;
            }
            let e = lon
                .edges()
                .iter()
                .filter(|e| rich[e.source] && rich[e.target])
                .count();
            Some((k, 2.0 * e as f64 / (n as f64 * (n as f64 - 1.0))))
        })
        .collect()
}

/// `0..=max out-degree`, the default rich-club abscissa.
pub fn default_rich_club_ks(lon: &Lon) -> Vec<usize> {
    let max = (0..lon.vertex_count()).map(|v| lon.out_degree(v)).max().unwrap_or(0);
    (0..=max).collect()
}

/// Funnel-bases ranked by fitness (rank 1 is best, ties by key) with their
/// out-degree in the full network.
pub fn funnel_base_rank_table(lon: &Lon, decomposition: &FunnelDecomposition) -> Vec<(usize, usize)> {
    let mut bases = decomposition.bases.clone();
    // ids follow key order
    bases.sort_by(|&a, &b| lon.fitness(a).total_cmp(&lon.fitness(b)).then(a.cmp(&b)));
    bases
        .into_iter()
        .enumerate()
        .map(|(i, b)| (i + 1, lon.out_degree(b)))
        .collect()
}

/// Number of funnel-bases one step away from the global optimum, i.e. joined
/// to it by an edge in either direction.
///
/// A base never has an edge into the optimum (that edge would be improving), so
/// in practice this counts the bases the optimum's escape attempts landed on.
pub fn go_neighborhood_radius(lon: &Lon, decomposition: &FunnelDecomposition) -> usize {
    let Some(go) = lon.global_optimum() else {
        return 0;
    };
    decomposition
        .bases
        .iter()
        .filter(|&&b| b != go && (lon.has_edge(b, go) || lon.has_edge(go, b)))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lon::funnels;
    use crate::lon::test_support::lon;

    #[test]
    fn pcc_cases() {
        let v = [1.0, 4.0, 2.0, 8.0];
        assert!((pcc(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((pcc(&v, &neg).unwrap() + 1.0).abs() < 1e-15);
        // hand computation: cov = 1, var1 = 2/3, var2 = 14/9
        let expected = 1.0 / ((2.0f64 / 3.0).sqrt() * (14.0f64 / 9.0).sqrt());
        let r = pcc(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 0.98198).abs() < 1e-5);
        assert_eq!(pcc(&[1.0, 1.0], &[1.0, 2.0]), Err(MetricError::UndefinedCorrelation));
        assert!(pcc(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn density_cases() {
        let names = ["a", "b", "c"];
        let vs: Vec<(&str, f64)> = names.iter().map(|n| (*n, 1.0)).collect();
        let mut all = Vec::new();
        for s in names {
            for d in names {
                if s != d {
                    all.push((s, d));
                }
            }
        }
        assert_eq!(network_density(&lon(&vs, &all)).unwrap(), 1.0);
        assert_eq!(network_density(&lon(&vs, &[])).unwrap(), 0.0);
        let four = lon(
            &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c"), ("b", "d")],
        );
        assert_eq!(network_density(&four).unwrap(), 0.5);
        assert!(network_density(&lon(&[("a", 1.0)], &[])).is_err());
    }

    #[test]
    fn spl_chain_and_isolated() {
        let chain = lon(&[("a", 3.0), ("b", 2.0), ("c", 1.0)], &[("a", "b"), ("b", "c")]);
        assert_eq!(shortest_path_length(&chain), (1.5, 1.0));
        let with_d = lon(
            &[("a", 3.0), ("b", 2.0), ("c", 1.0), ("d", 4.0)],
            &[("a", "b"), ("b", "c")],
        );
        assert_eq!(shortest_path_length(&with_d), (1.5, 0.75));
        assert_eq!(shortest_path_length(&lon(&[("a", 1.0)], &[])), (0.0, 1.0));
    }

    #[test]
    fn assortativity_two_complete_digraphs() {
        // K3 edges join (1,1) remaining degrees, the 2-cycle joins (0,0)
        let g = lon(
            &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("x", 1.0), ("y", 1.0)],
            &[
                ("a", "b"),
                ("b", "a"),
                ("a", "c"),
                ("c", "a"),
                ("b", "c"),
                ("c", "b"),
                ("x", "y"),
                ("y", "x"),
            ],
        );
        assert!((assortativity(&g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn assortativity_star_is_undefined() {
        let star = lon(
            &[("h", 1.0), ("l1", 2.0), ("l2", 2.0), ("l3", 2.0)],
            &[("h", "l1"), ("h", "l2"), ("h", "l3")],
        );
        assert!(matches!(assortativity(&star), Err(MetricError::Undefined(_))));
    }

    #[test]
    fn clustering_triangle_and_star() {
        let tri = lon(&[("a", 1.0), ("b", 1.0), ("c", 1.0)], &[("a", "b"), ("c", "b"), ("a", "c")]);
        assert_eq!(average_clustering(&tri), 1.0);
        let star = lon(
            &[("h", 1.0), ("l1", 2.0), ("l2", 2.0), ("l3", 2.0)],
            &[("h", "l1"), ("h", "l2"), ("l3", "h")],
        );
        assert_eq!(average_clustering(&star), 0.0);
    }

    #[test]
    fn rich_club_small_cases() {
        let g = lon(&[("a", 1.0), ("b", 1.0), ("c", 1.0)], &[("a", "b"), ("b", "c")]);
        assert_eq!(rich_club_curve(&g, &[1]), vec![(1, 1.0)]);
        assert_eq!(rich_club_curve(&g, &[2]), vec![]);
        let empty = lon(&[("a", 1.0), ("b", 1.0)], &[]);
        assert_eq!(rich_club_curve(&empty, &[0, 1]), vec![(0, 0.0)]);
        assert_eq!(default_rich_club_ks(&g), vec![0, 1]);
    }

    #[test]
    fn base_rank_table_and_radius() {
        // b1 (f=1) escapes to five worse vertices; b2 (f=2) has none
        let mut vs = vec![("b1", 1.0), ("b2", 2.0)];
        let leaves = ["w1", "w2", "w3", "w4", "w5"];
        for l in leaves {
            vs.push((l, 9.0));
        }
        let edges: Vec<(&str, &str)> = leaves.iter().map(|l| ("b1", *l)).collect();
        let g = lon(&vs, &edges);
        let d = funnels(&g.improving_subgraph());
        let table = funnel_base_rank_table(&g, &d);
        assert_eq!(table[0], (1, 5));
        assert_eq!(table[1], (2, 0));

        let single = lon(&[("a", 2.0), ("b", 1.0)], &[("a", "b")]);
        let d = funnels(&single);
        assert_eq!(funnel_base_rank_table(&single, &d), vec![(1, 0)]);
        assert_eq!(go_neighborhood_radius(&single, &d), 0);
    }

    #[test]
    fn radius_counts_bases_adjacent_to_optimum() {
        // x* escapes to b1 and b2, which are bases of their own funnels; q
        // drains into b1
        let g = lon(
            &[("x", 0.0), ("b1", 1.0), ("b2", 1.5), ("b3", 2.0), ("q", 3.0)],
            &[("x", "b1"), ("x", "b2"), ("q", "b1")],
        );
        let d = funnels(&g);
        assert_eq!(d.funnel_count(), 4);
        assert_eq!(go_neighborhood_radius(&g, &d), 2);

        // explicit decomposition with edges into x*
        let h = lon(&[("x", 0.0), ("b1", 1.0), ("b2", 1.5)], &[("b1", "x"), ("b2", "x")]);
        let custom = FunnelDecomposition {
            bases: vec![h.id_of("b1").unwrap(), h.id_of("b2").unwrap(), h.id_of("x").unwrap()],
            funnels: Default::default(),
            overlapping: vec![false; 3],
        };
        assert_eq!(go_neighborhood_radius(&h, &custom), 2);

        let isolated = lon(&[("x", 0.0), ("b1", 1.0), ("q", 2.0)], &[("q", "b1")]);
        assert_eq!(go_neighborhood_radius(&isolated, &funnels(&isolated)), 0);
    }
}
