//! One function per subcommand. Each validates its numeric parameters,
//! loads inputs, resolves vertex labels, then computes and emits.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use modal_barrier::distributed::{self, DistributedConfig};
use modal_barrier::dynamics::{self, simulate_diffusion};
use modal_barrier::epidemic::{self, CountMode, EpidemicParams, PatientZero};
use modal_barrier::generate::{self, PlantedClusters};
use modal_barrier::io::{self, format_f64, EdgeListFormat};
use modal_barrier::metrics::{self, BoundReport};
use modal_barrier::resistance::{self, barrier_weights, shuffle_weights, unit_weights};
use modal_barrier::spectral::{self, MAX_DENSE_N};
use modal_barrier::{EdgeVector, Graph, Partition};

use crate::report::{read_file, CliError, CliResult, OutputArgs};
use crate::{
    BarrierArgs, Count, DiffusionArgs, EpidemicArgs, Family, Format, GenerateArgs, GraphArgs,
    Method, ResistanceArgs, WeightMode,
};

fn load_graph(args: &GraphArgs) -> CliResult<Graph> {
    let format = match args.format {
        Format::Auto => EdgeListFormat::Auto,
        Format::Weighted => EdgeListFormat::Weighted,
        Format::Unweighted => EdgeListFormat::Unweighted,
    };
    Ok(io::load_edge_list(&read_file(&args.graph)?, format)?)
}

fn vertex(g: &Graph, label: &str, role: &str) -> CliResult<usize> {
    g.index_of(label)
        .ok_or_else(|| CliError::invalid("cli", format!("{role} vertex {label:?} is not in the graph")))
}

fn load_weights(g: &Graph, path: Option<&Path>) -> CliResult<EdgeVector> {
    match path {
        Some(path) => {
            let values = io::load_edge_values_csv(&read_file(path)?, g)?;
            Ok(EdgeVector::weight(values)?)
        }
        None => Ok(unit_weights(g.m())),
    }
}

fn positive(module: &'static str, name: &str, x: f64) -> CliResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(module, format!("{name} must be positive and finite, got {x}")))
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("arguments serialize")
}

pub fn spectrum(graph: &GraphArgs, out: &OutputArgs) -> CliResult<()> {
    let g = load_graph(graph)?;
    let s = spectral::eigendecompose(&g.laplacian())?;
    let mut csv = String::from("index,eigenvalue\n");
    for (i, l) in s.eigenvalues().iter().enumerate() {
        let _ = writeln!(csv, "{i},{}", format_f64(*l));
    }
    let stats = json!({
        "n": g.n(),
        "m": g.m(),
        "zero_multiplicity": s.zero_multiplicity(),
    });
    out.emit("spectrum", &csv, json!({ "graph": graph }), Some(stats))
}

pub fn detect_q(graph: &GraphArgs, max_q: Option<usize>, out: &OutputArgs) -> CliResult<()> {
    if max_q.is_some_and(|m| m < 2) {
        return Err(CliError::invalid("spectral", "max-q must be at least 2"));
    }
    let g = load_graph(graph)?;
    let max_q = max_q.unwrap_or_else(|| spectral::default_max_q(g.n()));
    let s = spectral::eigendecompose(&g.laplacian())?;
    let choice = spectral::detect_q(&s, max_q)?;
    let mut csv = String::from("index,eigenvalue,gap_score,selected\n");
    for i in 0..=max_q {
        let score = if i >= 2 { format_f64(choice.scores[i]) } else { String::new() };
        let _ = writeln!(
            csv,
            "{i},{},{score},{}",
            format_f64(s.eigenvalue(i)),
            i == choice.q
        );
    }
    let config = json!({ "graph": graph, "max_q": max_q });
    let stats = json!({ "q": choice.q, "score": choice.score });
    out.emit("detect-q", &csv, config, Some(stats))
}

fn check_resistance_args(args: &ResistanceArgs) -> CliResult<()> {
    positive("resistance", "epsilon", args.epsilon)?;
    if args.q == Some(0) {
        return Err(CliError::invalid("resistance", "q must be at least 1"));
    }
    if args.method != Method::Distributed && (args.prune != 0.0 || args.paper_literal) {
        return Err(CliError::invalid(
            "resistance",
            "--prune and --paper-literal apply only to --method distributed",
        ));
    }
    if !(args.prune >= 0.0 && args.prune.is_finite()) {
        return Err(CliError::invalid(
            "distributed",
            format!("prune threshold must be finite and >= 0, got {}", args.prune),
        ));
    }
    Ok(())
}

/// Resistance under `args`, with the resolved configuration and, for the
/// distributed method, its message statistics.
fn compute_resistance(g: &Graph, args: &ResistanceArgs) -> CliResult<(EdgeVector, Value, Option<Value>)> {
    let method = match args.method {
        Method::Auto if g.n() <= MAX_DENSE_N => Method::Exact,
        Method::Auto => Method::ApproxIi,
        m => m,
    };
    let p = args.p.unwrap_or_else(|| g.n().div_ceil(2));
    let mut config = json!({ "method": method, "epsilon": args.epsilon });
    let (r, stats) = match method {
        Method::Exact => {
            let s = spectral::eigendecompose(&g.laplacian())?;
            let (q, detected) = match args.q {
                Some(q) => (q, false),
                None => (spectral::detect_q(&s, spectral::default_max_q(g.n()))?.q, true),
            };
            config = json!({ "method": method, "q": q, "q_detected": detected });
            (resistance::aggregated_resistance_from_spectrum(g, &s, q)?, None)
        }
        Method::ApproxI => (resistance::aggregated_resistance_approx1(g, args.epsilon)?, None),
        Method::ApproxIi => {
            config["p"] = json!(p);
            (resistance::aggregated_resistance_approx2(g, args.epsilon, p)?, None)
        }
        Method::Distributed => {
            let cfg = DistributedConfig {
                prune: args.prune,
                paper_literal: args.paper_literal,
                ..DistributedConfig::new(args.epsilon, p)
            };
            config = json!({ "method": method, "distributed": cfg });
            let (r, stats) = distributed::run_distributed(g, &cfg)?;
            (r, Some(to_value(&stats)))
        }
        Method::Auto => unreachable!("auto resolves above"),
    };
    Ok((r, config, stats))
}

pub fn resistance(graph: &GraphArgs, args: &ResistanceArgs, out: &OutputArgs) -> CliResult<()> {
    check_resistance_args(args)?;
    let g = load_graph(graph)?;
    let (r, resolved, stats) = compute_resistance(&g, args)?;
    let csv = io::edge_values_csv(&g, "resistance", r.values());
    let config = json!({ "graph": graph, "resistance": resolved });
    out.emit("resistance", &csv, config, stats)
}

fn check_barrier_args(args: &BarrierArgs) -> CliResult<()> {
    positive("weights", "epsilon-b", args.epsilon_b)?;
    if args.resistance_file.is_none() {
        check_resistance_args(&args.resistance)?;
    }
    Ok(())
}

/// Barrier weights from a resistance file or a fresh computation.
fn barrier(g: &Graph, args: &BarrierArgs) -> CliResult<(EdgeVector, Value)> {
    let (r, source) = match &args.resistance_file {
        Some(path) => {
            let values = io::load_edge_values_csv(&read_file(path)?, g)?;
            (EdgeVector::resistance(values)?, json!({ "file": path }))
        }
        None => {
            let (r, resolved, _) = compute_resistance(g, &args.resistance)?;
            (r, resolved)
        }
    };
    let w = barrier_weights(&r, args.epsilon_b)?;
    Ok((w, json!({ "resistance": source, "epsilon_b": args.epsilon_b })))
}

pub fn weights(
    graph: &GraphArgs,
    mode: WeightMode,
    args: &BarrierArgs,
    seed: u64,
    out: &OutputArgs,
) -> CliResult<()> {
    if mode != WeightMode::Unit {
        check_barrier_args(args)?;
    }
    let g = load_graph(graph)?;
    let (w, config) = match mode {
        WeightMode::Unit => (unit_weights(g.m()), json!({ "mode": mode })),
        WeightMode::Barrier => {
            let (w, b) = barrier(&g, args)?;
            (w, json!({ "mode": mode, "barrier": b }))
        }
        WeightMode::Shuffled => {
            let (w, b) = barrier(&g, args)?;
            (shuffle_weights(&w, seed), json!({ "mode": mode, "barrier": b, "seed": seed }))
        }
    };
    let csv = io::edge_values_csv(&g, "weight", w.values());
    let mut config = config;
    config["graph"] = to_value(graph);
    out.emit("weights", &csv, config, None)
}

fn check_diffusion_args(args: &DiffusionArgs) -> CliResult<()> {
    if let Some(k) = args.kappa {
        positive("dynamics", "kappa", k)?;
    }
    if let Some(gamma) = args.gamma {
        positive("dynamics", "gamma", gamma)?;
    }
    Ok(())
}

pub fn diffuse(
    graph: &GraphArgs,
    weights_file: Option<&Path>,
    args: &DiffusionArgs,
    track: &[String],
    out: &OutputArgs,
) -> CliResult<()> {
    check_diffusion_args(args)?;
    let g = load_graph(graph)?;
    let w = load_weights(&g, weights_file)?;
    let start = vertex(&g, &args.start, "start")?;
    let target = args.target.as_deref().map(|t| vertex(&g, t, "target")).transpose()?;
    // The target's series comes first; the start's stands in without one.
    let mut tracked = vec![target.unwrap_or(start)];
    for label in track {
        let v = vertex(&g, label, "tracked")?;
        if !tracked.contains(&v) {
            tracked.push(v);
        }
    }
    let kappa = args.kappa.unwrap_or_else(|| dynamics::default_kappa(&g, &w));
    let gamma = args.gamma.unwrap_or_else(|| dynamics::default_gamma(g.n()));
    let run = simulate_diffusion(&g, &w, start, kappa, args.steps, &tracked)?;

    let series: Vec<Vec<f64>> = tracked
        .iter()
        .map(|&v| run.series(v).expect("tracked vertices are recorded"))
        .collect();
    let mut csv = String::from("step");
    for &v in &tracked {
        let _ = write!(csv, ",x_{}", g.label(v));
    }
    csv.push('\n');
    for t in 0..=args.steps {
        let _ = write!(csv, "{t}");
        for s in &series {
            let _ = write!(csv, ",{}", format_f64(s[t]));
        }
        csv.push('\n');
    }
    let mass_drift = run.mass().iter().fold(0.0_f64, |acc, m| acc.max((m - 1.0).abs()));

    let crossing = target
        .map(|t| dynamics::threshold_crossing_time(&run, t, gamma))
        .transpose()?
        .flatten();
    let config = json!({
        "graph": graph,
        "weights_file": weights_file,
        "diffusion": args,
        "kappa": kappa,
        "gamma": gamma,
    });
    let stats = json!({
        "crossing_step": crossing,
        "kappa_max": dynamics::kappa_max(&g, &w),
        "max_mass_drift": mass_drift,
    });
    out.emit("diffuse", &csv, config, Some(stats))
}

/// Parameters and patient-zero policy, validated without the graph.
fn epidemic_params(args: &EpidemicArgs) -> CliResult<EpidemicParams> {
    let params = EpidemicParams {
        pa: args.pa,
        horizon: args.days,
        runs: args.runs,
        seed: args.seed,
        count: match args.count {
            Count::Infected => CountMode::Infected,
            Count::ContagiousOnly => CountMode::ContagiousOnly,
        },
        ..Default::default()
    };
    params.validate()?;
    Ok(params)
}

fn patient_zero(g: &Graph, args: &EpidemicArgs) -> CliResult<PatientZero> {
    if args.patient_zero == "random" {
        Ok(PatientZero::Random)
    } else {
        Ok(PatientZero::Vertex(vertex(g, &args.patient_zero, "patient-zero")?))
    }
}

pub fn epidemic(
    graph: &GraphArgs,
    weights_file: Option<&Path>,
    args: &EpidemicArgs,
    out: &OutputArgs,
) -> CliResult<()> {
    let params = epidemic_params(args)?;
    let g = load_graph(graph)?;
    let w = load_weights(&g, weights_file)?;
    let p0 = patient_zero(&g, args)?;
    let curve = epidemic::monte_carlo_epidemic_from(&g, w.values(), &params, p0)?;
    let mut csv = String::from("day,mean\n");
    for (d, m) in curve.iter().enumerate() {
        let _ = writeln!(csv, "{d},{}", format_f64(*m));
    }
    let (day, value) = epidemic::peak(&curve);
    let config = json!({ "graph": graph, "weights_file": weights_file, "epidemic": params });
    out.emit("epidemic", &csv, config, Some(json!({ "peak_day": day, "peak": value })))
}

pub fn verify(
    graph: &GraphArgs,
    partition_file: &Path,
    compare_graph: Option<&Path>,
    estimates: Option<(f64, f64)>,
    out: &OutputArgs,
) -> CliResult<()> {
    if let Some((a_hat, alpha_hat)) = estimates {
        positive("metrics", "a-hat", a_hat)?;
        if !(alpha_hat > 0.0 && alpha_hat < 1.0) {
            return Err(CliError::invalid(
                "metrics",
                format!("alpha-hat must lie in (0, 1), got {alpha_hat}"),
            ));
        }
    }
    let g = load_graph(graph)?;
    let p: Partition = io::load_partition(&read_file(partition_file)?, &g)?;
    let g2 = compare_graph
        .map(|path| {
            let g2 = io::load_edge_list(&read_file(path)?, EdgeListFormat::Auto)?;
            Ok::<_, CliError>(g2)
        })
        .transpose()?;

    let s = spectral::eigendecompose(&g.laplacian())?;
    let mut reports: Vec<BoundReport> = vec![
        metrics::check_prop1_with(&g, &s, &p)?,
        metrics::check_prop2_with(&g, &s, &p)?,
    ];
    if let Some(g2) = &g2 {
        reports.push(metrics::check_prop3(&g, g2, &p)?);
    }
    if let Some((a_hat, alpha_hat)) = estimates {
        reports.push(metrics::check_prop4_with(&g, &s, &p, a_hat, alpha_hat)?);
    }

    let mut csv = String::from("bound,lhs,rhs,slack,status\n");
    for r in &reports {
        let status = match &r.status {
            metrics::BoundStatus::Satisfied => "satisfied",
            metrics::BoundStatus::Violated => "violated",
            metrics::BoundStatus::Vacuous(_) => "vacuous",
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{status}",
            r.name,
            format_f64(r.lhs),
            format_f64(r.rhs),
            format_f64(r.slack)
        );
    }
    let config = json!({
        "graph": graph,
        "partition_file": partition_file,
        "compare_graph": compare_graph,
        "a_hat": estimates.map(|e| e.0),
        "alpha_hat": estimates.map(|e| e.1),
    });
    out.emit("verify", &csv, config, Some(to_value(&reports)))
}

/// The three weight vectors in column order: unit, barrier, shuffled.
fn weight_triple(g: &Graph, args: &BarrierArgs, seed: u64) -> CliResult<([EdgeVector; 3], Value)> {
    let (b, config) = barrier(g, args)?;
    let s = shuffle_weights(&b, seed);
    Ok(([unit_weights(g.m()), b, s], config))
}

const COLUMNS: [&str; 3] = ["unit", "barrier", "shuffled"];

pub fn compare_diffusion(
    graph: &GraphArgs,
    barrier_args: &BarrierArgs,
    args: &DiffusionArgs,
    seed: u64,
    out: &OutputArgs,
) -> CliResult<()> {
    check_barrier_args(barrier_args)?;
    check_diffusion_args(args)?;
    let target_label = args
        .target
        .as_deref()
        .ok_or_else(|| CliError::invalid("cli", "compare diffusion needs --target"))?;
    let g = load_graph(graph)?;
    let start = vertex(&g, &args.start, "start")?;
    let target = vertex(&g, target_label, "target")?;
    let (ws, barrier_config) = weight_triple(&g, barrier_args, seed)?;

    // One step size for all three so crossing steps are comparable.
    let kappa = args.kappa.unwrap_or_else(|| {
        ws.iter()
            .map(|w| dynamics::default_kappa(&g, w))
            .fold(f64::INFINITY, f64::min)
    });
    let gamma = args.gamma.unwrap_or_else(|| dynamics::default_gamma(g.n()));
    let mut series = Vec::new();
    let mut crossings = serde_json::Map::new();
    for (w, name) in ws.iter().zip(COLUMNS) {
        let run = simulate_diffusion(&g, w, start, kappa, args.steps, &[target])?;
        let crossing = dynamics::threshold_crossing_time(&run, target, gamma)?;
        crossings.insert(name.into(), json!(crossing));
        series.push(run.series(target).expect("target is recorded"));
    }

    let mut csv = format!("step,{}\n", COLUMNS.join(","));
    for t in 0..=args.steps {
        let _ = writeln!(
            csv,
            "{t},{},{},{}",
            format_f64(series[0][t]),
            format_f64(series[1][t]),
            format_f64(series[2][t])
        );
    }
    let config = json!({
        "graph": graph,
        "barrier": barrier_config,
        "seed": seed,
        "diffusion": args,
        "kappa": kappa,
        "gamma": gamma,
    });
    out.emit("compare diffusion", &csv, config, Some(json!({ "crossing_step": crossings })))
}

pub fn compare_epidemic(
    graph: &GraphArgs,
    barrier_args: &BarrierArgs,
    args: &EpidemicArgs,
    out: &OutputArgs,
) -> CliResult<()> {
    check_barrier_args(barrier_args)?;
    let params = epidemic_params(args)?;
    let g = load_graph(graph)?;
    let p0 = patient_zero(&g, args)?;
    let (ws, barrier_config) = weight_triple(&g, barrier_args, args.seed)?;
    let curves = ws
        .iter()
        .map(|w| epidemic::monte_carlo_epidemic_from(&g, w.values(), &params, p0))
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv = format!("day,{}\n", COLUMNS.join(","));
    for d in 0..=params.horizon {
        let _ = writeln!(
            csv,
            "{d},{},{},{}",
            format_f64(curves[0][d]),
            format_f64(curves[1][d]),
            format_f64(curves[2][d])
        );
    }
    let peaks: serde_json::Map<String, Value> = COLUMNS
        .iter()
        .zip(&curves)
        .map(|(name, c)| {
            let (day, value) = epidemic::peak(c);
            (name.to_string(), json!({ "day": day, "value": value }))
        })
        .collect();
    let config = json!({ "graph": graph, "barrier": barrier_config, "epidemic": params });
    out.emit("compare epidemic", &csv, config, Some(json!({ "peaks": peaks })))
}

pub fn generate(args: &GenerateArgs, out: &OutputArgs) -> CliResult<()> {
    let (g, partition) = match args.family {
        Family::Planted | Family::Contact => {
            let base = if args.family == Family::Planted {
                PlantedClusters::five_clusters()
            } else {
                PlantedClusters::contact_network()
            };
            let clusters = args.clusters.unwrap_or(base.sizes.len());
            let size = args.cluster_size.unwrap_or(base.sizes[0]);
            let spec = PlantedClusters {
                sizes: vec![size; clusters],
                p_in: args.p_in.unwrap_or(base.p_in),
                p_out: args.p_out.unwrap_or(base.p_out),
                w_in: args.w_in.unwrap_or(base.w_in),
                w_out: args.w_out.unwrap_or(base.w_out),
            };
            positive("generate", "w-in", spec.w_in)?;
            positive("generate", "w-out", spec.w_out)?;
            let (g, p) = spec.generate(args.seed)?;
            (g, Some(p))
        }
        Family::Random => (
            generate::random_connected(args.n, args.p_extra, args.w_lo, args.w_hi, args.seed)?,
            None,
        ),
        Family::Path => (generate::path(args.n), None),
        Family::Star => (generate::star(args.n), None),
        Family::Complete => (generate::complete(args.n), None),
        Family::Barbell => {
            if args.n < 1 {
                return Err(CliError::invalid("generate", "barbell clique size must be at least 1"));
            }
            positive("generate", "bridge", args.bridge)?;
            let (g, p) = generate::barbell(args.n, args.bridge)?;
            (g, Some(p))
        }
    };
    if let Some(path) = &args.partition_output {
        let p = partition.ok_or_else(|| {
            CliError::invalid("generate", "this family has no planted partition to write")
        })?;
        std::fs::write(path, io::write_partition(&g, &p)).map_err(|e| CliError::io(path, e))?;
    }
    let text = io::write_edge_list(&g);
    let stats = json!({ "n": g.n(), "m": g.m() });
    out.emit("generate", &text, to_value(args), Some(stats))
}
