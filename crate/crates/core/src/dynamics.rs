//! Discrete Laplacian diffusion `x(t+1) = (I - kappa L_w) x(t)` from a unit
//! point mass, and the time the mass at a target vertex first reaches a
//! threshold.
//!
//! `L_w` is built from the weight vector alone; the graph contributes only
//! its topology. Step sizes above `1 / max_i sum_{k at i} w_k` are refused:
//! up to that bound `I - kappa L_w` is entrywise non-negative and doubly
//! stochastic, so values stay in `[0, 1]` and the distance to uniform never
//! grows.

use serde::Serialize;

use crate::edge_vector::EdgeVector;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Full trajectories are kept while `n * (steps + 1)` stays below this.
pub const FULL_TRAJECTORY_LIMIT: usize = 10_000_000;

/// Largest weighted degree under `w`.
pub fn weighted_max_degree(g: &Graph, w: &EdgeVector) -> f64 {
    let mut deg = vec![0.0; g.n()];
    for (e, &wk) in g.edges().iter().zip(w.values()) {
        deg[e.tail] += wk;
        deg[e.head] += wk;
    }
    deg.into_iter().fold(0.0, f64::max)
}

/// Stability bound `1 / d_max(w)`.
pub fn kappa_max(g: &Graph, w: &EdgeVector) -> f64 {
    1.0 / weighted_max_degree(g, w)
}

/// `0.1 / d_max(w)`.
pub fn default_kappa(g: &Graph, w: &EdgeVector) -> f64 {
    0.1 * kappa_max(g, w)
}

/// Half the uniform equilibrium value.
pub fn default_gamma(n: usize) -> f64 {
    0.5 / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "storage", rename_all = "lowercase")]
pub enum Trajectory {
    /// `states[t]` is the whole vector after `t` steps.
    Full { states: Vec<Vec<f64>> },
    /// Series for selected vertices plus total mass per step.
    Tracked {
        vertices: Vec<usize>,
        series: Vec<Vec<f64>>,
        mass: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct DiffusionRun {
    pub weights: Vec<f64>,
    pub start: usize,
    pub kappa: f64,
    pub steps: usize,
    pub trajectory: Trajectory,
}

impl DiffusionRun {
    /// Values at `vertex` for `t = 0..=steps`, if recorded.
    pub fn series(&self, vertex: usize) -> Option<Vec<f64>> {
        match &self.trajectory {
            Trajectory::Full { states } => {
                if vertex >= states[0].len() {
                    return None;
                }
                Some(states.iter().map(|x| x[vertex]).collect())
            }
            Trajectory::Tracked {
                vertices, series, ..
            } => vertices
                .iter()
                .position(|&v| v == vertex)
                .map(|i| series[i].clone()),
        }
    }

    /// Total mass for `t = 0..=steps`.
    pub fn mass(&self) -> Vec<f64> {
        match &self.trajectory {
            Trajectory::Full { states } => states.iter().map(|x| x.iter().sum()).collect(),
            Trajectory::Tracked { mass, .. } => mass.clone(),
        }
    }
}

/// One diffusion operator, reusable across steps.
pub struct Diffusion<'a> {
    g: &'a Graph,
    w: &'a [f64],
    kappa: f64,
}

impl<'a> Diffusion<'a> {
    pub fn new(g: &'a Graph, w: &'a EdgeVector, kappa: f64) -> Result<Self> {
        if w.len() != g.m() {
            return Err(Error::invalid(
                "dynamics",
                format!("expected {} edge weights, got {}", g.m(), w.len()),
            ));
        }
        let bound = kappa_max(g, w);
        if !(kappa > 0.0) || kappa > bound {
            return Err(Error::invalid(
                "dynamics",
                format!("kappa must lie in (0, {bound}] for these weights, got {kappa}"),
            ));
        }
        Ok(Self {
            g,
            w: w.values(),
            kappa,
        })
    }

    /// `next = x - kappa L_w x`.
    pub fn step(&self, x: &[f64], next: &mut [f64]) {
        next.copy_from_slice(x);
        for (e, &wk) in self.g.edges().iter().zip(self.w) {
            let flow = self.kappa * wk * (x[e.tail] - x[e.head]);
            next[e.tail] -= flow;
            next[e.head] += flow;
        }
    }
}

fn check_vertex(g: &Graph, v: usize, what: &str) -> Result<()> {
    if v < g.n() {
        Ok(())
    } else {
        Err(Error::invalid(
            "dynamics",
            format!("{what} vertex {v} outside [0, {})", g.n()),
        ))
    }
}

/// Runs `steps` steps from a unit mass at `start`, keeping the whole
/// trajectory when it fits under [`FULL_TRAJECTORY_LIMIT`] and otherwise
/// only the series of `tracked` vertices.
pub fn simulate_diffusion(
    g: &Graph,
    w: &EdgeVector,
    start: usize,
    kappa: f64,
    steps: usize,
    tracked: &[usize],
) -> Result<DiffusionRun> {
    check_vertex(g, start, "start")?;
    for &v in tracked {
        check_vertex(g, v, "tracked")?;
    }
    let op = Diffusion::new(g, w, kappa)?;
    let n = g.n();
    let mut x = vec![0.0; n];
    x[start] = 1.0;
    let mut next = vec![0.0; n];

    let full = n.saturating_mul(steps + 1) <= FULL_TRAJECTORY_LIMIT;
    let mut states = Vec::new();
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); tracked.len()];
    let mut mass = Vec::new();
    let mut record = |x: &[f64]| {
        if full {
            states.push(x.to_vec());
        } else {
            for (s, &v) in series.iter_mut().zip(tracked) {
                s.push(x[v]);
            }
            mass.push(x.iter().sum());
        }
    };
    record(&x);
    for _ in 0..steps {
        op.step(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        record(&x);
    }

    let trajectory = if full {
        Trajectory::Full { states }
    } else {
        Trajectory::Tracked {
            vertices: tracked.to_vec(),
            series,
            mass,
        }
    };
    Ok(DiffusionRun {
        weights: w.values().to_vec(),
        start,
        kappa,
        steps,
        trajectory,
    })
}

/// First step at which `target` holds at least `gamma`, within the run.
pub fn threshold_crossing_time(run: &DiffusionRun, target: usize, gamma: f64) -> Result<Option<usize>> {
    let series = run.series(target).ok_or_else(|| {
        Error::invalid(
            "dynamics",
            format!("vertex {target} was not recorded in this run"),
        )
    })?;
    Ok(series.iter().position(|&x| x >= gamma))
}

/// Steps the dynamics until `target` reaches `gamma` or `max_steps` pass,
/// without storing the trajectory.
pub fn crossing_time(
    g: &Graph,
    w: &EdgeVector,
    start: usize,
    target: usize,
    kappa: f64,
    gamma: f64,
    max_steps: usize,
) -> Result<Option<usize>> {
    check_vertex(g, start, "start")?;
    check_vertex(g, target, "target")?;
    let op = Diffusion::new(g, w, kappa)?;
    let mut x = vec![0.0; g.n()];
    x[start] = 1.0;
    let mut next = x.clone();
    for t in 0..=max_steps {
        if x[target] >= gamma {
            return Ok(Some(t));
        }
        if t < max_steps {
            op.step(&x, &mut next);
            std::mem::swap(&mut x, &mut next);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resistance::unit_weights;

    fn k2() -> Graph {
        Graph::new(2, [(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn k2_one_step() {
        let g = k2();
        let run = simulate_diffusion(&g, &unit_weights(1), 0, 0.25, 1, &[]).unwrap();
        let Trajectory::Full { states } = &run.trajectory else {
            panic!("small run should be stored in full");
        };
        assert_eq!(states[1], vec![0.75, 0.25]);
        assert_eq!(threshold_crossing_time(&run, 1, 0.25).unwrap(), Some(1));
        assert_eq!(threshold_crossing_time(&run, 1, 0.0).unwrap(), Some(0));
        assert_eq!(threshold_crossing_time(&run, 1, 0.3).unwrap(), None);
    }

    #[test]
    fn refuses_unstable_kappa() {
        let g = k2();
        let w = unit_weights(1);
        assert_eq!(kappa_max(&g, &w), 1.0);
        assert!(simulate_diffusion(&g, &w, 0, 1.5, 1, &[]).is_err());
        assert!(simulate_diffusion(&g, &w, 0, 0.0, 1, &[]).is_err());
        assert!(simulate_diffusion(&g, &w, 2, 0.5, 1, &[]).is_err());
    }

    #[test]
    fn converges_to_uniform() {
        let g = Graph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let w = unit_weights(3);
        let run = simulate_diffusion(&g, &w, 0, default_kappa(&g, &w), 3000, &[]).unwrap();
        let Trajectory::Full { states } = &run.trajectory else { unreachable!() };
        for v in states.last().unwrap() {
            assert!((v - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn tracked_storage_for_long_runs() {
        let g = k2();
        let w = unit_weights(1);
        let steps = FULL_TRAJECTORY_LIMIT;
        let run = simulate_diffusion(&g, &w, 0, 0.1, steps, &[1]).unwrap();
        assert!(matches!(run.trajectory, Trajectory::Tracked { .. }));
        assert_eq!(run.series(1).unwrap().len(), steps + 1);
        assert!(run.series(0).is_none());
        assert!(threshold_crossing_time(&run, 0, 0.1).is_err());
    }

    #[test]
    fn crossing_time_matches_run() {
        let g = Graph::new(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        let w = unit_weights(4);
        let kappa = default_kappa(&g, &w);
        let run = simulate_diffusion(&g, &w, 0, kappa, 500, &[]).unwrap();
        let gamma = default_gamma(5);
        assert_eq!(
            crossing_time(&g, &w, 0, 4, kappa, gamma, 500).unwrap(),
            threshold_crossing_time(&run, 4, gamma).unwrap()
        );
        assert_eq!(crossing_time(&g, &w, 0, 4, kappa, gamma, 1).unwrap(), None);
    }
}
