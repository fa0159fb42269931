//! One function per subcommand. Each resolves its defaults into the config,
//! runs, and returns the results section, a CSV table and summary lines.

use ns_lab_core::gaussian::{norm_ppf, bvn_lower, CorrelatedGaussianModel, RngStream};
use ns_lab_core::ou::{expected_plateaus, line_difference};
use ns_lab_core::partition::{estimate_volumes, partition_volumes, Classify, Partition, PartitionDoc};
use ns_lab_core::perturbation::{improve, ImproveOptions, Status};
use ns_lab_core::stability::{
    challenger_pairs, optimal_pair, stability_bilinear, stability_mc, stability_quadrature, BilinearMethod,
    DEFAULT_ORDER,
};
use ns_lab_core::voting::{
    compare_discrete_localized, competitor_from_perturbation, discrete_stability, discrete_stability_exact,
    label_frequencies, label_frequencies_exact, plurality_competitor, BiasedMeasure, CompetitorOptions,
    CorrelatedPairLaw, DiscreteEstimate, LabelFrequencies, VotingFunction, DEFAULT_GRID_STEP, MAX_EXACT_VOTERS,
};
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig};
use crate::CliError;

const DEFAULT_SEED: u64 = 1;
const DEFAULT_SAMPLES: u64 = 1_000_000;

pub struct Output {
    pub results: Value,
    pub csv: String,
    pub summary: Vec<String>,
}

pub fn run(command: Command, cfg: &mut ExperimentConfig) -> Result<Output, CliError> {
    match command {
        Command::Stability => stability(cfg),
        Command::Limits => limits(cfg),
        Command::Improve => improve_cmd(cfg),
        Command::Plurality => plurality(cfg),
        Command::Bilinear => bilinear(cfg),
        Command::Volumes => volumes(cfg),
    }
}

fn get<T: Clone>(field: &mut Option<T>, default: T) -> T {
    ExperimentConfig::get_or(field, default)
}

fn seed(cfg: &mut ExperimentConfig) -> u64 {
    get(&mut cfg.seed, DEFAULT_SEED)
}

fn stability(cfg: &mut ExperimentConfig) -> Result<Output, CliError> {
    let rho = get(&mut cfg.rho, 0.5);
    let samples = get(&mut cfg.samples, DEFAULT_SAMPLES);
    let seed = seed(cfg);
    let p = cfg.gaussian_partition()?;
    let model = CorrelatedGaussianModel::new(p.dim(), rho)?;
    let mc = stability_mc(&p, &model, samples, RngStream::new(seed, 0))?;
    let mut csv = format!("method,value,std_error\nmc,{},{}\n", mc.value, mc.std_error);
    let mut summary = vec![format!("S_rho = {:.6} ± {:.6} (monte carlo, {samples} samples)", mc.value, mc.std_error)];
    let quad = match &p {
        Partition::Flat(f) if f.n() == 2 && rho != 0.0 => {
            let order = get(&mut cfg.order, DEFAULT_ORDER);
            let q = stability_quadrature(f, &model, order)?;
            csv.push_str(&format!("quadrature,{:?},{:?}\n", q.value, q.std_error));
            summary.push(format!("S_rho = {:.10} (quadrature, order {order})", q.value));
            Some(q)
        }
        _ => None,
    };
    Ok(Output { results: json!({ "rho": rho, "partition": p, "mc": mc, "quadrature": quad }), csv, summary })
}

fn limits(cfg: &mut ExperimentConfig) -> Result<Output, CliError> {
    let rho = get(&mut cfg.rho, 0.5);
    let (i, j) = get(&mut cfg.pair, (0, 1));
    if i == j {
        return Err(ns_lab_core::Error::NotAdjacent(i, j).into());
    }
    let t_min = get(&mut cfg.t_min, -50.0);
    let t_max = get(&mut cfg.t_max, 50.0);
    let points = get(&mut cfg.points, 201);
    if points < 2 || !(t_min < t_max) {
        return Err(CliError::Config("need t_min < t_max and at least two points".into()));
    }
    let p = match cfg.take_partition()? {
        Some(Partition::Flat(f)) => f,
        Some(_) => return Err(CliError::Config("limits needs a flat partition".into())),
        None => {
            // Planar simplex moved along the normal of facet (i, j) so that
            // the facet sits at offset c.
            let c = get(&mut cfg.c, 1.0);
            let base = cfg.flat_partition()?;
            let d = base.directions();
            if i >= d.len() || j >= d.len() {
                return Err(CliError::Config(format!("pair ({i}, {j}) out of range")));
            }
            let raw: Vec<f64> = d[j].iter().zip(&d[i]).map(|(a, b)| a - b).collect();
            let len = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            let shift = raw.iter().map(|v| c * v / len).collect::<Vec<_>>();
            cfg.shift = Some(shift.clone());
            base.with_shift(shift)?
        }
    };
    let lr = p.line_restriction(i, j)?;
    let mut rows = Vec::with_capacity(points);
    let mut csv = String::from("t,value\n");
    for s in 0..points {
        let t = t_min + (t_max - t_min) * s as f64 / (points - 1) as f64;
        let v = line_difference(&p, &lr, rho, t)?;
        csv.push_str(&format!("{t:?},{v:?}\n"));
        rows.push([t, v]);
    }
    let (lo, hi) = (rows[0][1], rows[points - 1][1]);
    let (elo, ehi) = expected_plateaus(lr.c, rho)?;
    let summary = vec![
        format!("facet ({i}, {j}) at offset c = {:.6}, rho = {rho}", lr.c),
        format!("t = {t_min}: {lo:.6} (limit {elo:.6})"),
        format!("t = {t_max}: {hi:.6} (limit {ehi:.6})"),
    ];
    let results = json!({
        "rho": rho,
        "pair": [i, j],
        "c": lr.c,
        "partition": Partition::Flat(p),
        "plateaus": { "t_min": lo, "t_max": hi },
        "expected": { "t_min": elo, "t_max": ehi },
        "rows": rows,
    });
    Ok(Output { results, csv, summary })
}

fn improve_cmd(cfg: &mut ExperimentConfig) -> Result<Output, CliError> {
    let rho = get(&mut cfg.rho, 0.5);
    if cfg.partition.is_none() && cfg.shift.is_none() {
        get(&mut cfg.volumes, [0.4, 0.3, 0.3]);
    }
    let opts = ImproveOptions {
        budget: get(&mut cfg.budget, 10),
        samples: get(&mut cfg.samples, DEFAULT_SAMPLES),
        seed: RngStream::new(seed(cfg), 0),
    };
    let p = cfg.flat_partition()?;
    let (q, report) = improve(&p, rho, opts)?;
    let b = &report.baseline;
    let mut summary = vec![format!("baseline S_rho = {:.6} ± {:.6}", b.value, b.std_error)];
    let mut csv = String::from("facet_i,facet_j,t1,t2,delta,improvement,improvement_se\n");
    for t in &report.trials {
        csv.push_str(&format!(
            "{},{},{:?},{:?},{:?},{:?},{:?}\n",
            t.facet.0, t.facet.1, t.t1, t.t2, t.delta, t.improvement, t.improvement_se
        ));
    }
    let margin = report.best().map(|t| rho.signum() * t.improvement / t.improvement_se);
    match (report.status, report.best()) {
        (Status::NoImprovingDirection, _) => summary.push("no improving direction detected".into()),
        (_, Some(t)) => {
            summary.push(format!("best S_rho = {:.6} ± {:.6} (facet {:?}, delta {})", t.value, t.std_error, t.facet, t.delta));
            summary.push(format!(
                "change = {:.3e} ± {:.3e}, margin {:.1} SE ({:?})",
                t.improvement,
                t.improvement_se,
                margin.unwrap_or(0.0),
                report.status
            ));
        }
        (_, None) => summary.push("no trial moved S_rho in the sign of rho".into()),
    }
    let volumes = partition_volumes(&q)?;
    let results = json!({
        "input": Partition::Flat(p),
        "partition": PartitionDoc::from(&q),
        "volumes": volumes,
        "margin_se": margin,
        "report": report,
    });
    Ok(Output { results, csv, summary })
}

fn freq_csv(csv: &mut String, name: &str, f: &LabelFrequencies) {
    for a in 0..3 {
        csv.push_str(&format!("{name},frequency_{},{:?},{:?}\n", a + 1, f.values[a], f.std_errors[a]));
    }
}

fn plurality(cfg: &mut ExperimentConfig) -> Result<Output, CliError> {
    let alpha = get(&mut cfg.alpha, 1.0);
    let beta = get(&mut cfg.beta, 0.0);
    let n = get(&mut cfg.n, 10_000);
    let rho = get(&mut cfg.rho, 0.5);
    let samples = get(&mut cfg.samples, DEFAULT_SAMPLES);
    let seed = seed(cfg);
    let grid_step = get(&mut cfg.grid_step, DEFAULT_GRID_STEP);
    let mut summary = Vec::new();
    if alpha == 0.0 && beta == 0.0 {
        let w = "warning: the competitor construction requires (alpha, beta) != (0, 0)";
        eprintln!("{w}");
        summary.push(w.to_string());
    }
    let measure = BiasedMeasure::new(n, alpha, beta)?;
    let law = CorrelatedPairLaw::new(measure, rho)?;
    let supplied = cfg.take_partition()?;
    let (competitor, report) = match supplied {
        Some(Partition::Perturbed(pp)) => (competitor_from_perturbation(&pp, &measure, grid_step)?, None),
        Some(_) => return Err(CliError::Config("plurality needs a perturbed partition".into())),
        None => {
            let opts = CompetitorOptions {
                improve: ImproveOptions {
                    budget: get(&mut cfg.budget, 5),
                    samples: get(&mut cfg.improve_samples, DEFAULT_SAMPLES),
                    seed: RngStream::new(seed, 1),
                },
                grid_step,
            };
            let (c, r) = plurality_competitor(&measure, rho, opts)?;
            (c, Some(r))
        }
    };
    let f = VotingFunction::Plurality;
    let g = &competitor.function;
    let exact = n <= MAX_EXACT_VOTERS;
    let (sf, ff, fg) = if exact {
        (
            discrete_stability_exact(&f, &law)?,
            label_frequencies_exact(&f, &measure)?,
            label_frequencies_exact(g, &measure)?,
        )
    } else {
        let s = RngStream::new(seed, 2);
        (discrete_stability(&f, &law, samples, s)?, label_frequencies(&f, &measure, samples, s)?, label_frequencies(g, &measure, samples, s)?)
    };
    let region = competitor.region().filter(|r| !r.is_empty());
    let (gap, gap_se, sg) = match (region, exact) {
        (_, true) => {
            let sg = discrete_stability_exact(g, &law)?;
            (sg.value - sf.value, 0.0, sg)
        }
        (Some(r), false) => {
            let d = compare_discrete_localized(&f, g, &law, r, samples, RngStream::new(seed, 3))?;
            let sg = DiscreteEstimate { value: sf.value + d.difference, std_error: sf.std_error.hypot(d.std_error), ..sf };
            (d.difference, d.std_error, sg)
        }
        (None, false) => (0.0, 0.0, sf),
    };
    let margin = if gap_se > 0.0 { Some(gap / gap_se) } else { None };
    summary.push(format!("plurality  S = {:.6} ± {:.6}", sf.value, sf.std_error));
    summary.push(format!("competitor S = {:.6} ± {:.6}", sg.value, sg.std_error));
    summary.push(match margin {
        Some(m) => format!("gap = {gap:.3e} ± {gap_se:.3e} ({m:.1} SE)"),
        None => format!("gap = {gap:.3e} (exact)"),
    });
    for (name, fr) in [("plurality", &ff), ("competitor", &fg)] {
        summary.push(format!(
            "{name:<10} P[f=1,2,3] = {:.5}, {:.5}, {:.5}",
            fr.values[0], fr.values[1], fr.values[2]
        ));
    }
    let mut csv = String::from("function,quantity,value,std_error\n");
    csv.push_str(&format!("plurality,stability,{:?},{:?}\n", sf.value, sf.std_error));
    csv.push_str(&format!("competitor,stability,{:?},{:?}\n", sg.value, sg.std_error));
    csv.push_str(&format!("difference,stability,{gap:?},{gap_se:?}\n"));
    freq_csv(&mut csv, "plurality", &ff);
    freq_csv(&mut csv, "competitor", &fg);
    let results = json!({
        "measure": measure,
        "rho": rho,
        "plurality": { "stability": sf, "frequencies": ff },
        "competitor": {
            "stability": sg,
            "frequencies": fg,
            "offset": competitor.offset,
            "patches": competitor.patches,
            "function": competitor.function,
        },
        "gap": { "difference": gap, "std_error": gap_se, "margin_se": margin },
        "improvement": report,
    });
    Ok(Output { results, csv, summary })
}

fn bilinear(cfg: &mut ExperimentConfig) -> Result<Output, CliError> {
    let rho = get(&mut cfg.rho, 0.5);
    let samples = get(&mut cfg.samples, DEFAULT_SAMPLES);
    let count = get(&mut cfg.challengers, 20);
    let seed = seed(cfg);
    let third = 1.0 / 3.0;
    let close = |a: [f64; 3], b: [f64; 3]| a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9);
    if cfg.a_volumes.is_some_and(|v| !close(v, [third; 3])) || cfg.b_volumes.is_some_and(|v| !close(v, [0.5, 0.0, 0.5])) {
        return Err(CliError::Config("the optimum is stated for volumes a = (1/3, 1/3, 1/3) and b = (1/2, 0, 1/2)".into()));
    }
    cfg.a_volumes = Some([third; 3]);
    cfg.b_volumes = Some([0.5, 0.0, 0.5]);
    let model = CorrelatedGaussianModel::new(2, rho)?;
    let (a, b) = optimal_pair()?;
    let closed = stability_bilinear(&a, &b, &model, BilinearMethod::ClosedForm)?;
    let mc = stability_bilinear(&a, &b, &model, BilinearMethod::Mc { samples, seed: RngStream::new(seed, 0) })?;
    let reference = 2.0 * bvn_lower(norm_ppf(third)?, 0.0, rho);
    let mut csv = format!("pair,value,std_error\noptimum-closed-form,{},0\noptimum-mc,{},{}\n", closed.value, mc.value, mc.std_error);
    let mut rows = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for (k, (ca, cb)) in challenger_pairs(count, RngStream::new(seed, 1))?.iter().enumerate() {
        let s = stability_bilinear(ca, cb, &model, BilinearMethod::Mc { samples, seed: RngStream::new(seed, 2 + k as u64) })?;
        let excess = (s.value - closed.value) / s.std_error.max(f64::MIN_POSITIVE);
        worst = worst.max(excess);
        csv.push_str(&format!("challenger-{k},{:?},{:?}\n", s.value, s.std_error));
        rows.push(json!({ "a": ca, "b": cb, "estimate": s, "excess_se": excess }));
    }
    let beaten = worst > 3.0;
    let summary = vec![
        format!("optimum = {:.10} (closed form), {:.6} ± {:.6} (monte carlo)", closed.value, mc.value, mc.std_error),
        format!(
            "{count} challengers: largest excess {:.2} SE, {}",
            if count == 0 { 0.0 } else { worst },
            if beaten { "OPTIMUM EXCEEDED" } else { "none exceeds the optimum by more than 3 SE" }
        ),
    ];
    let results = json!({
        "rho": rho,
        "optimum": { "closed_form": closed, "mc": mc, "reference": reference },
        "challengers": rows,
        "exceeded": beaten,
    });
    Ok(Output { results, csv, summary })
}

fn volumes(cfg: &mut ExperimentConfig) -> Result<Output, CliError> {
    let samples = get(&mut cfg.samples, DEFAULT_SAMPLES);
    let seed = seed(cfg);
    let p = cfg.gaussian_partition()?;
    let model = CorrelatedGaussianModel::new(p.dim(), 0.0)?;
    let mc = estimate_volumes(&p, &model, samples, RngStream::new(seed, 0))?;
    let exact = if p.dim() == 2 { Some(partition_volumes(&p)?) } else { None };
    let mut csv = String::from("cell,exact,mc,std_error\n");
    let mut summary = Vec::new();
    for i in 0..p.cells() {
        let e = exact.as_ref().map(|v| v[i]);
        csv.push_str(&format!("{i},{},{:?},{:?}\n", e.map_or(String::new(), |v| format!("{v:?}")), mc.volumes[i], mc.std_errors[i]));
        summary.push(format!(
            "cell {i}: {:.6} ± {:.6}{}",
            mc.volumes[i],
            mc.std_errors[i],
            e.map_or(String::new(), |v| format!(" (exact {v:.10})"))
        ));
    }
    Ok(Output { results: json!({ "partition": p, "exact": exact, "mc": mc }), csv, summary })
}
