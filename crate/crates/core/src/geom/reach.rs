use serde::{Deserialize, Serialize};

use crate::graph::LinkageGraph;

/// Attainable endpoint distances of an open chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReachInterval {
    pub dmin: f64,
    pub dmax: f64,
}

impl ReachInterval {
    pub fn contains(&self, d: f64) -> bool {
        d >= self.dmin && d <= self.dmax
    }

    /// Distance from `d` to the nearer endpoint, negative when outside.
    pub fn margin(&self, d: f64) -> f64 {
        (d - self.dmin).min(self.dmax - d)
    }

    /// Strict interior test with an absolute slack.
    pub fn strictly_contains(&self, d: f64, tol: f64) -> bool {
        self.margin(d) > tol
    }
}

pub fn chain_reach(lengths: &[f64]) -> ReachInterval {
    let total: f64 = lengths.iter().sum();
    let longest = lengths.iter().cloned().fold(0.0, f64::max);
    ReachInterval {
        dmin: (2.0 * longest - total).max(0.0),
        dmax: total,
    }
}

/// A signed length sum that comes close to zero on some cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallHit {
    pub cycle_edges: Vec<usize>,
    pub signs: Vec<i8>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallReport {
    pub hits: Vec<WallHit>,
    /// Smallest `|sum +-l|` over all cycles and sign vectors.
    pub min_margin: f64,
    pub cycles_checked: usize,
}

impl WallReport {
    pub fn is_clean(&self) -> bool {
        self.hits.is_empty()
    }
}

/// Smallest signed sum over sign vectors of `lengths`, with the sign vector
/// achieving it. The first sign is fixed to `+1`.
pub(crate) fn min_signed_sum(lengths: &[f64]) -> (f64, Vec<i8>) {
    let n = lengths.len();
    let mut best = (f64::INFINITY, Vec::new());
    if n == 0 {
        return best;
    }
    for mask in 0..1u64 << (n - 1) {
        let signs: Vec<i8> = std::iter::once(1)
            .chain((0..n - 1).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }))
            .collect();
        let v: f64 = lengths
            .iter()
            .zip(&signs)
            .map(|(&l, &s)| s as f64 * l)
            .sum::<f64>()
            .abs();
        if v < best.0 {
            best = (v, signs);
        }
    }
    best
}

/// Checks every simple cycle of `g` against the walls `sum +-l_i = 0`.
pub fn wall_check(g: &LinkageGraph, tol: f64) -> WallReport {
    let cycles = g.simple_cycles();
    let mut hits = Vec::new();
    let mut min_margin = f64::INFINITY;
    for cycle in &cycles {
        let lengths: Vec<f64> = cycle.iter().map(|&e| g.edges()[e].length).collect();
        if lengths.len() > 30 {
            log::warn!("skipping wall check of a {}-edge cycle", lengths.len());
            continue;
        }
        let (v, signs) = min_signed_sum(&lengths);
        min_margin = min_margin.min(v);
        if v < tol {
            hits.push(WallHit {
                cycle_edges: cycle.clone(),
                signs,
                value: v,
            });
        }
    }
    WallReport {
        hits,
        min_margin,
        cycles_checked: cycles.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Linkage;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn reach_examples() {
        assert_eq!(chain_reach(&[1.0, 1.0]), ReachInterval { dmin: 0.0, dmax: 2.0 });
        assert_eq!(chain_reach(&[3.0, 1.0]), ReachInterval { dmin: 2.0, dmax: 4.0 });
        assert_eq!(chain_reach(&[1.0, 1.0, 1.0]), ReachInterval { dmin: 0.0, dmax: 3.0 });
    }

    #[test]
    fn wall_examples() {
        let tri = Linkage::polygon(&[1.0; 3]).unwrap();
        let r = wall_check(&tri.graph, 1e-9);
        assert!(r.is_clean());
        assert!((r.min_margin - 1.0).abs() < 1e-15);

        let quad = Linkage::polygon(&[1.0, 1.0, 1.0, 3.0]).unwrap();
        assert!(!wall_check(&quad.graph, 1e-9).is_clean());

        let tc = Linkage::three_chain(&[1.0, 2.0], &[1.5, 1.5], &[0.7, 0.9]).unwrap();
        let r = wall_check(&tc.graph, 1e-9);
        assert_eq!(r.cycles_checked, 3);
        assert_eq!(r.hits.len(), 1);
        assert_eq!(r.hits[0].cycle_edges.len(), 4);
    }

    proptest! {
        #[test]
        fn sampled_distances_stay_inside(
            lengths in prop::collection::vec(0.1f64..3.0, 1..6),
            seed in any::<u64>(),
        ) {
            let reach = chain_reach(&lengths);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for _ in 0..4000 {
                let (mut x, mut y) = (0.0, 0.0);
                for &l in &lengths {
                    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    x += l * t.cos();
                    y += l * t.sin();
                }
                let d = f64::hypot(x, y);
                prop_assert!(d >= reach.dmin - 1e-12 && d <= reach.dmax + 1e-12);
                lo = lo.min(d);
                hi = hi.max(d);
            }
            // polish a few samples by cyclic coordinate descent towards each
            // extreme; each edge turns to the best direction given the rest
            for target_far in [false, true] {
                for _ in 0..8 {
                    let mut th: Vec<f64> = lengths
                        .iter()
                        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                        .collect();
                    for _ in 0..200 {
                        for i in 0..lengths.len() {
                            let (mut x, mut y) = (0.0, 0.0);
                            for (j, &l) in lengths.iter().enumerate() {
                                if j != i {
                                    x += l * th[j].cos();
                                    y += l * th[j].sin();
                                }
                            }
                            if x != 0.0 || y != 0.0 {
                                let a = y.atan2(x);
                                th[i] = if target_far { a } else { a + std::f64::consts::PI };
                            }
                        }
                    }
                    let (x, y) = lengths
                        .iter()
                        .zip(&th)
                        .fold((0.0, 0.0), |(x, y), (&l, &t)| (x + l * t.cos(), y + l * t.sin()));
                    let d = f64::hypot(x, y);
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
            }
            prop_assert!((hi - reach.dmax).abs() <= 1e-3);
            prop_assert!((lo - reach.dmin).abs() <= 1e-3);
        }
    }
}
