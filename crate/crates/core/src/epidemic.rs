//! Stochastic S -> E -> C -> R contagion with per-edge daily transmission
//! probability `w_k * pa`.
//!
//! All randomness is drawn by key rather than by stream position:
//!
//! * incubation and infectious period of vertex `v`: `(run seed, tag, v)`;
//! * the trial of directed edge `u -> v` on the `o`-th contagious day of `u`:
//!   `(run seed, 2k + dir, o)`.
//!
//! A vertex's course therefore depends only on its own infection day, and
//! every transmission delay `u -> v` is fixed per run regardless of what the
//! rest of the graph does. Infection days are shortest paths over these
//! delays, so lowering any weight can only delay infections.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{stream_key, unit_f64, SplitMix64};

const INCUBATION_TAG: u64 = u64::MAX;
const INFECTIOUS_TAG: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    /// Exposed plus contagious.
    Infected,
    ContagiousOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpidemicParams {
    /// Daily transmission probability across a unit-weight edge.
    pub pa: f64,
    /// Days from infection to contagiousness, inclusive range.
    pub incubation: (u32, u32),
    /// Days of contagiousness, inclusive range.
    pub infectious: (u32, u32),
    /// Last simulated day; curves cover days `0..=horizon`.
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
    pub count: CountMode,
}

impl Default for EpidemicParams {
    fn default() -> Self {
        Self {
            pa: 0.03,
            incubation: (3, 5),
            infectious: (15, 70),
            horizon: 120,
            runs: 1000,
            seed: 0,
            count: CountMode::Infected,
        }
    }
}

impl EpidemicParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::invalid("epidemic", msg));
        if !(0.0..=1.0).contains(&self.pa) {
            return fail(format!("pa must lie in [0, 1], got {}", self.pa));
        }
        for (name, (lo, hi)) in [("incubation", self.incubation), ("infectious", self.infectious)] {
            if lo == 0 || lo > hi {
                return fail(format!("{name} range must satisfy 1 <= low <= high, got [{lo}, {hi}]"));
            }
        }
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        Ok(())
    }
}

/// Compartment of one vertex with the days left in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "state", content = "days_left", rename_all = "lowercase")]
pub enum VertexHealth {
    Susceptible,
    /// Becomes contagious when the counter runs out.
    Exposed(u32),
    /// Recovers when the counter runs out.
    Contagious(u32),
    Recovered,
}

impl VertexHealth {
    fn advance(self, infectious_days: u32) -> Self {
        match self {
            Self::Exposed(1) => Self::Contagious(infectious_days),
            Self::Exposed(k) => Self::Exposed(k - 1),
            Self::Contagious(1) => Self::Recovered,
            Self::Contagious(k) => Self::Contagious(k - 1),
            s => s,
        }
    }

    fn is_valid_successor(self, next: Self) -> bool {
        use VertexHealth::*;
        match (self, next) {
            (Susceptible, Susceptible | Exposed(_)) => true,
            (Exposed(a), Exposed(b)) => b + 1 == a,
            (Exposed(1), Contagious(_)) => true,
            (Contagious(a), Contagious(b)) => b + 1 == a,
            (Contagious(1), Recovered) => true,
            (Recovered, Recovered) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatientZero {
    Vertex(usize),
    /// Uniform over vertices, drawn from the run seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpidemicRun {
    pub patient_zero: Option<usize>,
    /// Count per day `0..=horizon` under the configured [`CountMode`].
    pub counts: Vec<usize>,
    /// Vertices ever infected, per day.
    pub cumulative: Vec<usize>,
    /// Day each vertex became exposed; initial carriers report day 0.
    pub infection_day: Vec<Option<usize>>,
}

fn check_weights(g: &Graph, w: &[f64], pa: f64) -> Result<()> {
    if w.len() != g.m() {
        return Err(Error::invalid(
            "epidemic",
            format!("expected {} edge weights, got {}", g.m(), w.len()),
        ));
    }
    if let Some((k, wk)) = w
        .iter()
        .enumerate()
        .find(|(_, &wk)| !(wk >= 0.0 && wk * pa <= 1.0))
    {
        return Err(Error::invalid(
            "epidemic",
            format!("weight {wk} on edge {k} gives no valid probability with pa = {pa}"),
        ));
    }
    Ok(())
}

/// Seed of run `r` in a Monte Carlo batch.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    stream_key(seed, &[run as u64])
}

fn course(seed: u64, params: &EpidemicParams, v: usize) -> (u32, u32) {
    let draw = |tag, (lo, hi): (u32, u32)| {
        let mut rng = SplitMix64::new(stream_key(seed, &[tag, v as u64]));
        rng.range_inclusive(lo as u64, hi as u64) as u32
    };
    (
        draw(INCUBATION_TAG, params.incubation),
        draw(INFECTIOUS_TAG, params.infectious),
    )
}

/// One run seeded with `params.seed`, starting from a single exposed vertex.
pub fn simulate_epidemic(
    g: &Graph,
    w: &[f64],
    params: &EpidemicParams,
    patient_zero: PatientZero,
) -> Result<EpidemicRun> {
    params.validate()?;
    if g.n() == 0 {
        return Err(Error::invalid("epidemic", "graph has no vertices"));
    }
    let v0 = match patient_zero {
        PatientZero::Vertex(v) if v < g.n() => v,
        PatientZero::Vertex(v) => {
            return Err(Error::invalid(
                "epidemic",
                format!("patient zero {v} outside [0, {})", g.n()),
            ))
        }
        PatientZero::Random => SplitMix64::new(params.seed).below(g.n() as u64) as usize,
    };
    let mut initial = vec![VertexHealth::Susceptible; g.n()];
    initial[v0] = VertexHealth::Exposed(course(params.seed, params, v0).0);
    let mut run = simulate_from_states(g, w, params, &initial)?;
    run.patient_zero = Some(v0);
    Ok(run)
}

/// One run from arbitrary initial compartments on day 0.
pub fn simulate_from_states(
    g: &Graph,
    w: &[f64],
    params: &EpidemicParams,
    initial: &[VertexHealth],
) -> Result<EpidemicRun> {
    params.validate()?;
    check_weights(g, w, params.pa)?;
    if initial.len() != g.n() {
        return Err(Error::invalid(
            "epidemic",
            format!("expected {} initial states, got {}", g.n(), initial.len()),
        ));
    }
    if initial
        .iter()
        .any(|s| matches!(s, VertexHealth::Exposed(0) | VertexHealth::Contagious(0)))
    {
        return Err(Error::invalid("epidemic", "initial counters must be positive"));
    }

    let n = g.n();
    let seed = params.seed;
    let mut state = initial.to_vec();
    let mut next = state.clone();
    let mut infection_day: Vec<Option<usize>> = state
        .iter()
        .map(|s| (*s != VertexHealth::Susceptible).then_some(0))
        .collect();
    // Day contagiousness began, for offsetting edge trials.
    let mut onset: Vec<usize> = vec![0; n];
    let mut durations: Vec<Option<(u32, u32)>> = vec![None; n];
    let mut exposed_today = Vec::new();

    let count = |state: &[VertexHealth]| {
        state
            .iter()
            .filter(|s| match s {
                VertexHealth::Exposed(_) => params.count == CountMode::Infected,
                VertexHealth::Contagious(_) => true,
                _ => false,
            })
            .count()
    };
    let mut counts = vec![count(&state)];
    let mut ever = infection_day.iter().filter(|d| d.is_some()).count();
    let mut cumulative = vec![ever];

    for day in 1..=params.horizon {
        for v in 0..n {
            let infectious = || durations[v].unwrap_or_else(|| course(seed, params, v)).1;
            next[v] = match state[v] {
                VertexHealth::Exposed(1) => {
                    onset[v] = day;
                    state[v].advance(infectious())
                }
                s => s.advance(0),
            };
        }
        debug_assert!(state.iter().zip(&next).all(|(a, b)| a.is_valid_successor(*b)));
        std::mem::swap(&mut state, &mut next);

        for (k, e) in g.edges().iter().enumerate() {
            let p = w[k] * params.pa;
            if p == 0.0 {
                continue;
            }
            for (dir, (u, v)) in [(e.tail, e.head), (e.head, e.tail)].into_iter().enumerate() {
                if matches!(state[u], VertexHealth::Contagious(_))
                    && state[v] == VertexHealth::Susceptible
                {
                    let key = stream_key(seed, &[2 * k as u64 + dir as u64, (day - onset[u]) as u64]);
                    if unit_f64(key) < p {
                        exposed_today.push(v);
                    }
                }
            }
        }
        for v in exposed_today.drain(..) {
            if state[v] == VertexHealth::Susceptible {
                let d = course(seed, params, v);
                durations[v] = Some(d);
                state[v] = VertexHealth::Exposed(d.0);
                infection_day[v] = Some(day);
                ever += 1;
            }
        }
        counts.push(count(&state));
        cumulative.push(ever);
    }

    Ok(EpidemicRun {
        patient_zero: None,
        counts,
        cumulative,
        infection_day,
    })
}

/// Per-day mean count over `params.runs` runs with seeds
/// [`run_seed`]`(params.seed, r)` and uniformly random patient zero.
pub fn monte_carlo_epidemic(g: &Graph, w: &[f64], params: &EpidemicParams) -> Result<Vec<f64>> {
    monte_carlo_epidemic_from(g, w, params, PatientZero::Random)
}

/// [`monte_carlo_epidemic`] with a chosen patient-zero policy.
pub fn monte_carlo_epidemic_from(
    g: &Graph,
    w: &[f64],
    params: &EpidemicParams,
    patient_zero: PatientZero,
) -> Result<Vec<f64>> {
    params.validate()?;
    check_weights(g, w, params.pa)?;
    let runs: Vec<Vec<usize>> = (0..params.runs)
        .into_par_iter()
        .map(|r| {
            let mut p = params.clone();
            p.seed = run_seed(params.seed, r);
            simulate_epidemic(g, w, &p, patient_zero).map(|run| run.counts)
        })
        .collect::<Result<_>>()?;
    let mut mean = vec![0.0; params.horizon + 1];
    for counts in &runs {
        for (m, &c) in mean.iter_mut().zip(counts) {
            *m += c as f64;
        }
    }
    for m in &mut mean {
        *m /= params.runs as f64;
    }
    Ok(mean)
}

/// Day of the largest value; ties resolve to the earliest day.
pub fn peak(curve: &[f64]) -> (usize, f64) {
    curve
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (d, v)| if v > best.1 { (d, v) } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    #[test]
    fn no_transmission_without_weight() {
        let g = path(5);
        let params = EpidemicParams {
            horizon: 100,
            seed: 3,
            ..Default::default()
        };
        let run = simulate_epidemic(&g, &[0.0; 4], &params, PatientZero::Vertex(2)).unwrap();
        assert_eq!(run.counts[0], 1);
        let (inc, dur) = course(3, &params, 2);
        let recovered = (inc + dur) as usize;
        for (d, &c) in run.counts.iter().enumerate() {
            assert_eq!(c, usize::from(d < recovered), "day {d}");
        }
        assert_eq!(*run.cumulative.last().unwrap(), 1);
    }

    #[test]
    fn contagious_only_count_waits_for_incubation() {
        let g = path(2);
        let params = EpidemicParams {
            horizon: 10,
            count: CountMode::ContagiousOnly,
            ..Default::default()
        };
        let run = simulate_epidemic(&g, &[0.0], &params, PatientZero::Vertex(0)).unwrap();
        let inc = course(params.seed, &params, 0).0 as usize;
        assert_eq!(run.counts[inc - 1], 0);
        assert_eq!(run.counts[inc], 1);
    }

    #[test]
    fn certain_transmission_follows_incubation() {
        let g = path(3);
        let params = EpidemicParams {
            pa: 1.0,
            horizon: 30,
            ..Default::default()
        };
        let run = simulate_epidemic(&g, &[1.0, 1.0], &params, PatientZero::Vertex(0)).unwrap();
        let i0 = course(params.seed, &params, 0).0 as usize;
        let i1 = course(params.seed, &params, 1).0 as usize;
        assert_eq!(run.infection_day, vec![Some(0), Some(i0), Some(i0 + i1)]);
    }

    #[test]
    fn deterministic_and_bounded() {
        let g = path(8);
        let params = EpidemicParams {
            pa: 0.3,
            horizon: 60,
            runs: 20,
            seed: 11,
            ..Default::default()
        };
        let w = vec![1.0; 7];
        let a = monte_carlo_epidemic(&g, &w, &params).unwrap();
        let b = monte_carlo_epidemic(&g, &w, &params).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| (0.0..=8.0).contains(&x)));
    }

    #[test]
    fn single_run_batch_equals_direct_run() {
        let g = path(6);
        let params = EpidemicParams {
            pa: 0.5,
            horizon: 40,
            runs: 1,
            seed: 5,
            ..Default::default()
        };
        let w = vec![1.0; 5];
        let mean = monte_carlo_epidemic(&g, &w, &params).unwrap();
        let direct = simulate_epidemic(
            &g,
            &w,
            &EpidemicParams {
                seed: run_seed(5, 0),
                ..params.clone()
            },
            PatientZero::Random,
        )
        .unwrap();
        let direct: Vec<f64> = direct.counts.iter().map(|&c| c as f64).collect();
        assert_eq!(mean, direct);
    }

    #[test]
    fn validation() {
        let g = path(3);
        let mut params = EpidemicParams::default();
        assert!(simulate_epidemic(&g, &[1.0; 2], &params, PatientZero::Vertex(3)).is_err());
        assert!(simulate_epidemic(&g, &[1.0; 1], &params, PatientZero::Vertex(0)).is_err());
        params.incubation = (5, 3);
        assert!(params.validate().is_err());
        params = EpidemicParams { pa: 1.5, ..Default::default() };
        assert!(params.validate().is_err());
        params = EpidemicParams { runs: 0, ..Default::default() };
        assert!(params.validate().is_err());
    }

    #[test]
    fn state_machine_successors() {
        use VertexHealth::*;
        assert!(Susceptible.is_valid_successor(Exposed(3)));
        assert!(!Susceptible.is_valid_successor(Contagious(3)));
        assert!(!Recovered.is_valid_successor(Susceptible));
        assert!(!Exposed(2).is_valid_successor(Contagious(4)));
        assert_eq!(Exposed(1).advance(9), Contagious(9));
        assert_eq!(Contagious(1).advance(9), Recovered);
    }

    #[test]
    fn peak_prefers_first_maximum() {
        assert_eq!(peak(&[0.0, 2.0, 1.0, 2.0]), (1, 2.0));
    }
}
