use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dispatchsim::citywide::{
    profile_bits, read_mortality_curve, read_observed_mortality, run_pipeline, synthetic_city,
    write_observed_mortality, write_sweep_csv, MortalityModel, PairOptions, PipelineOptions, SweepConfig,
    SyntheticCityOptions,
};
use dispatchsim::des::{derive_seed, replicate, StrategyProfile};
use dispatchsim::game::{
    build_payoff_tensor, equilibrium_map, find_pure_nash, optimal_profile, write_map_csv, write_occurrence_csv,
    MapOptions, NashOutcome,
};
use dispatchsim::queueing::QueueParams;
use dispatchsim::scenario::{
    load_scenario, read_patient_records, write_patient_records, Action, GlobalTimeMode, Scenario,
};
use dispatchsim::sensitivity::{
    convergence_study, sobol_indices, write_indices_csv, DesModel, DesOutput, FactorSpace, InvalidPolicy, SobolOptions,
};
use dispatchsim::stochastic::{fit_exponential, ks_test, read_duration_samples, stream_rng, KdeFit, Stream};

use crate::args::*;

pub fn execute(cmd: &Command, out: &Path) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a, out),
        Command::Equilibrium(a) => equilibrium(a, out),
        Command::SweepMap(a) => sweep_map(a, out),
        Command::Sobol(a) => sobol(a, out),
        Command::Fit(a) => fit(a, out),
        Command::Citywide(a) => citywide(a, out),
        Command::Analyze(a) => analyze(a, out),
    }
}

fn load(a: &ScenarioArgs) -> Result<Scenario> {
    let mut s = load_scenario(&a.scenario)?.scenario;
    if let Some(t) = a.traffic {
        s.travel.set_traffic(t == Toggle::On);
    }
    if let Some(m) = a.tglobal {
        s.options.global_time = match m {
            TGlobal::Printed => GlobalTimeMode::Printed,
            TGlobal::Weighted => GlobalTimeMode::Weighted,
        };
    }
    Ok(s)
}

fn seeds(base: u64, n: usize) -> Result<Vec<u64>> {
    if n == 0 {
        bail!(dispatchsim::Error::Validation {
            field: "replications".into(),
            message: "must be positive".into()
        });
    }
    Ok((0..n as u64).map(|r| derive_seed(base, r, 0)).collect())
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn simulate(a: &SimulateArgs, out: &Path) -> Result<()> {
    let mut s = load(&a.scenario)?;
    s.options.trace = a.trace;
    let k = s.hospital_count();
    let profile = match &a.profile {
        Some(p) => p.parse::<StrategyProfile>()?,
        None => StrategyProfile::new(s.hospitals.iter().map(|h| h.strategy).collect()),
    };
    if profile.len() != k {
        bail!(dispatchsim::Error::Validation {
            field: "profile".into(),
            message: format!("profile has {} actions for {k} hospitals", profile.len()),
        });
    }
    let mut summary = replicate(&s, &profile, &seeds(a.seed, a.replications)?);
    if let Some(trace) = summary.runs[0].trace.take() {
        let mut w = writer(&out.join("trace.csv"))?;
        w.write_record([
            "patient_id",
            "request_time",
            "hospital_id",
            "n_rejections",
            "travel",
            "queue",
            "service",
        ])?;
        for t in trace {
            w.serialize((
                t.patient_id,
                t.request_time,
                s.hospitals[t.hospital_id].id,
                t.n_rejections,
                t.travel,
                t.queue,
                t.service,
            ))?;
        }
        w.flush()?;
    }
    for r in &mut summary.runs {
        r.trace = None;
    }
    let mut w = writer(&out.join("hospitals.csv"))?;
    w.write_record([
        "hospital_id",
        "action",
        "served",
        "score",
        "score_ci",
        "total_time",
        "mean_travel",
        "mean_queue",
        "mean_service",
        "mean_queue_length",
        "utilization",
    ])?;
    let n = summary.runs.len() as f64;
    let avg = |f: &dyn Fn(usize, usize) -> f64, j: usize| (0..summary.runs.len()).map(|r| f(r, j)).sum::<f64>() / n;
    println!("profile {profile}");
    for j in 0..k {
        let h = |r: usize, j: usize| &summary.runs[r].hospitals[j];
        let score = summary.scores[j];
        w.write_record([
            s.hospitals[j].id.to_string(),
            profile.action(j).letter().to_string(),
            avg(&|r, j| h(r, j).served as f64, j).to_string(),
            opt(score.map(|m| m.mean)),
            opt(score.and_then(|m| m.half_width)),
            opt(summary.total_times[j].map(|m| m.mean)),
            avg(&|r, j| h(r, j).mean_travel, j).to_string(),
            avg(&|r, j| h(r, j).mean_queue, j).to_string(),
            avg(&|r, j| h(r, j).mean_service, j).to_string(),
            avg(&|r, j| h(r, j).mean_queue_length, j).to_string(),
            avg(&|r, j| h(r, j).utilization, j).to_string(),
        ])?;
        println!(
            "hospital {:>4}  action {}  score {}",
            s.hospitals[j].id,
            profile.action(j).letter(),
            score.map_or("undefined".to_string(), |m| format!("{:.4}", m.mean))
        );
    }
    w.flush()?;
    if let Some(g) = summary.global_time {
        println!("T_global {:.4}", g.mean);
    }
    if summary.overcrowded() {
        log::warn!("queues kept growing in most replications: the system looks inconsistent");
    }
    write_json(&out.join("summary.json"), &summary)
}

fn equilibrium(a: &EquilibriumArgs, out: &Path) -> Result<()> {
    let s = load(&a.scenario)?;
    let k = s.hospital_count();
    seeds(a.seed, a.replications)?;
    let tensor = build_payoff_tensor(&s, a.replications, a.seed);
    let mut w = writer(&out.join("tensor.csv"))?;
    let mut header = vec!["profile".to_string(), "valid".to_string()];
    header.extend(s.hospitals.iter().map(|h| format!("u_{}", h.id)));
    w.write_record(&header)?;
    for p in StrategyProfile::all(k) {
        let u = tensor.utilities(&p);
        let mut row = vec![p.to_string(), u.is_some().to_string()];
        row.extend((0..k).map(|j| opt(u.map(|u| u[j]))));
        w.write_record(&row)?;
    }
    w.flush()?;
    let outcome = find_pure_nash(&tensor);
    let mut w = writer(&out.join("equilibria.csv"))?;
    w.write_record(["profile", "inconsistent"])?;
    match &outcome {
        NashOutcome::Inconsistent => {
            w.write_record(["", "true"])?;
            println!("inconsistent system: no equilibrium reported");
        }
        NashOutcome::Equilibria(eq) => {
            for p in eq {
                w.write_record([p.to_string().as_str(), "false"])?;
            }
            let names: Vec<String> = eq.iter().map(|p| p.to_string()).collect();
            println!(
                "weak pure equilibria: {}",
                if names.is_empty() {
                    "none".into()
                } else {
                    names.join(" ")
                }
            );
        }
    }
    w.flush()?;
    let best = optimal_profile(&s, a.replications, a.seed);
    let mut w = writer(&out.join("optimal.csv"))?;
    w.write_record(["profile", "t_global", "t_global_ci", "tied", "optimal"])?;
    for (p, g) in &best.global_times {
        w.write_record([
            p.to_string(),
            opt(g.map(|m| m.mean)),
            opt(g.and_then(|m| m.half_width)),
            best.tied.contains(p).to_string(),
            (p == &best.profile).to_string(),
        ])?;
    }
    w.flush()?;
    println!("T_global optimum: {}", best.profile);
    Ok(())
}

fn sweep_map(a: &SweepMapArgs, out: &Path) -> Result<()> {
    let s = load(&a.scenario)?;
    let opts = MapOptions {
        replications: a.replications,
        batches: a.batches,
        seed: a.seed,
    };
    let map = equilibrium_map(&s, &a.lambdas, &a.mus, &opts)?;
    write_map_csv(&out.join("map.csv"), &map)?;
    write_occurrence_csv(&out.join("map_profiles.csv"), &map)?;
    let inconsistent = map.cells.iter().filter(|c| c.inconsistent).count();
    println!("{} cells, {inconsistent} inconsistent", map.cells.len());
    Ok(())
}

fn parse_output(text: &str) -> Result<DesOutput> {
    Ok(match text {
        "system" => DesOutput::SystemScore,
        "tglobal" => DesOutput::GlobalTime,
        _ => match text.strip_prefix("hospital=").and_then(|j| j.parse().ok()) {
            Some(j) => DesOutput::HospitalScore(j),
            None => bail!(dispatchsim::Error::Validation {
                field: "output".into(),
                message: format!("expected system, tglobal or hospital=<index>, got `{text}`"),
            }),
        },
    })
}

fn sobol(a: &SobolArgs, out: &Path) -> Result<()> {
    let s = load(&a.scenario)?;
    let space = match &a.factors {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str::<FactorSpace>(&text).map_err(|e| dispatchsim::Error::Parse {
                context: p.display().to_string(),
                message: e.to_string(),
            })?
        }
        None => DesModel::default_space(s.hospital_count()),
    };
    let mut model = DesModel::new(s, space.clone(), parse_output(&a.output)?, a.seed)?;
    if a.drop_invalid {
        model.policy = InvalidPolicy::Drop;
    }
    let opts = SobolOptions {
        seed: a.seed,
        bootstrap: a.bootstrap,
        bootstrap_seed: derive_seed(a.seed, 1, 1),
    };
    let f = |x: &[f64]| model.evaluate(x);
    let idx = sobol_indices(&f, &space, a.n, &opts)?;
    write_indices_csv(&out.join("indices.csv"), &idx)?;
    println!("total-order ranking: {}", idx.total_order_ranking().join(" > "));
    if !a.sizes.is_empty() {
        let study = convergence_study(&f, &space, &a.sizes, &opts)?;
        let mut w = writer(&out.join("convergence.csv"))?;
        w.write_record(["n", "factor", "S1", "S1_ci", "ST", "ST_ci"])?;
        for row in &study.rows {
            let i = &row.indices;
            for j in 0..i.names.len() {
                w.serialize((row.n, &i.names[j], i.first[j], i.first_ci[j], i.total[j], i.total_ci[j]))?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

fn fit(a: &FitArgs, out: &Path) -> Result<()> {
    let samples = read_duration_samples(&a.samples)?;
    let rate = fit_exponential(&samples)?;
    let kde = KdeFit::fit(&samples, a.bandwidth)?;
    let ks_exp = ks_test(&samples, |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() })?;
    let ks_kde = ks_test(&samples, |x| kde.sampling_cdf(x))?;
    let mut w = writer(&out.join("fit.csv"))?;
    w.write_record(["model", "parameter", "ks_statistic", "p_value", "n"])?;
    w.serialize(("exponential", rate, ks_exp.statistic, ks_exp.p_value, ks_exp.n))?;
    w.serialize(("kde", kde.bandwidth(), ks_kde.statistic, ks_kde.p_value, ks_kde.n))?;
    w.flush()?;
    let max = samples.iter().copied().fold(0.0, f64::max) * 1.2;
    let mut w = writer(&out.join("density.csv"))?;
    w.write_record(["minutes", "kde", "exponential"])?;
    for i in 0..=200 {
        let x = max * i as f64 / 200.0;
        w.serialize((x, kde.pdf(x), rate * (-rate * x).exp()))?;
    }
    w.flush()?;
    println!(
        "exponential rate {rate:.6} per minute (KS D = {:.4}, p = {:.4})",
        ks_exp.statistic, ks_exp.p_value
    );
    println!(
        "kde bandwidth {:.4} minutes (KS D = {:.4}, p = {:.4})",
        kde.bandwidth(),
        ks_kde.statistic,
        ks_kde.p_value
    );
    Ok(())
}

fn parse_fixed(items: &[String]) -> Result<Vec<(usize, Action)>> {
    items
        .iter()
        .map(|item| {
            let bad = || dispatchsim::Error::Validation {
                field: "fixed".into(),
                message: format!("expected `id:A` or `id:R`, got `{item}`"),
            };
            let (id, act) = item.split_once(':').ok_or_else(bad)?;
            let id = id.trim().parse().map_err(|_| bad())?;
            let act = match act.trim() {
                "A" | "a" => Action::Accept,
                "R" | "r" => Action::Redirect,
                _ => return Err(bad().into()),
            };
            Ok((id, act))
        })
        .collect()
}

fn citywide(a: &CitywideArgs, out: &Path) -> Result<()> {
    let model = match &a.curve {
        Some(p) => read_mortality_curve(p, a.alpha, a.beta)?,
        None => MortalityModel {
            alpha: a.alpha,
            beta: a.beta,
            ..MortalityModel::default()
        },
    };
    let mut fixed = parse_fixed(&a.fixed)?;
    let (scenario, records, assignments, observed) = match a.synthetic {
        Some(seed) => {
            let city = synthetic_city(seed, &SyntheticCityOptions::default(), &model);
            fs::write(out.join("city.toml"), city.scenario.to_toml_string())?;
            write_patient_records(&out.join("records.csv"), &city.records)?;
            write_observed_mortality(&out.join("observed.csv"), &city.observed)?;
            fs::write(out.join("truth.txt"), format!("{}\n", city.true_profile))?;
            if fixed.is_empty() {
                fixed.push(city.fixed);
            }
            (city.scenario, city.records, city.assignments, city.observed)
        }
        None => {
            let scenario_path = a.scenario.as_ref().expect("required by the parser");
            let scenario = load_scenario(scenario_path)?.scenario;
            let records = read_patient_records(a.records.as_ref().expect("required by the parser"))?;
            let assignments = records
                .iter()
                .map(|r| match r.nearest_hospital {
                    Some(id) => Ok(id),
                    None => {
                        let pos = scenario.record_position(r)?;
                        Ok(scenario.hospitals[scenario.hospitals_by_travel(&pos, r.timestamp_hours)[0].0].id)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let observed = read_observed_mortality(a.observed.as_ref().expect("required by the parser"))?;
            (scenario, records, assignments, observed)
        }
    };
    let opts = PipelineOptions {
        feasibility_ratio: a.ratio,
        threshold: a.threshold,
        pair: PairOptions {
            map: MapOptions {
                replications: 2,
                batches: a.batches,
                seed: a.seed,
            },
            ..Default::default()
        },
        traffic: a.traffic.map(|t| t == Toggle::On),
        sweep: SweepConfig {
            fixed,
            excluded: a.exclude.clone(),
            replications: a.replications,
            seed: a.seed,
        },
    };
    let report = run_pipeline(&scenario, &records, &assignments, &observed, &model, &opts)?;
    let ids = &report.matrix.ids;
    let mut w = writer(&out.join("shared.csv"))?;
    w.write_record(["hospital_i", "hospital_j", "omega"])?;
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            w.serialize((ids[i], ids[j], report.matrix.omega[i][j]))?;
        }
    }
    w.flush()?;
    let mut w = writer(&out.join("pairs.csv"))?;
    w.write_record(["hospital_i", "hospital_j", "omega", "accept_i", "accept_j"])?;
    for o in &report.outcomes {
        let (i, j) = o.pair;
        let acc = |h: usize| opt(o.strategies.map(|s| s[h].accept));
        w.write_record([
            ids[i].to_string(),
            ids[j].to_string(),
            report.matrix.omega[i][j].to_string(),
            acc(0),
            acc(1),
        ])?;
    }
    w.flush()?;
    let mut w = writer(&out.join("strategies.csv"))?;
    w.write_record(["hospital_id", "accept_mass", "redirect_mass", "action", "ambiguous"])?;
    for (j, ws) in report.weighted.iter().enumerate() {
        match ws {
            Some(ws) => w.write_record([
                ids[j].to_string(),
                ws.accept_mass.to_string(),
                ws.redirect_mass.to_string(),
                ws.action.letter().to_string(),
                ws.ambiguous.to_string(),
            ])?,
            None => w.write_record([
                ids[j].to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])?,
        }
    }
    w.flush()?;
    write_sweep_csv(&out.join("sweep.csv"), &report.sweep)?;
    println!("{} pairs at or above {}", report.pairs.len(), a.threshold);
    match report.rank_of(&report.predicted) {
        Some(rank) => println!("predicted profile {} (rank {rank})", profile_bits(&report.predicted)),
        None => println!("predicted profile {} (not ranked)", profile_bits(&report.predicted)),
    }
    if let Some(top) = report.sweep.first() {
        match top.pearson_r {
            Some(r) => println!("best profile {} with r = {r:.4}", profile_bits(&top.profile)),
            None => println!("no profile produced a defined correlation"),
        }
    }
    Ok(())
}

fn analyze(a: &AnalyzeArgs, out: &Path) -> Result<()> {
    const DRAWS: usize = 20_000;
    let s = load(&a.scenario)?;
    let k = s.hospital_count();
    // Catchment shares and travel times by sampling pickup locations.
    let mut rng = stream_rng(0, 0, None, Stream::Locations);
    let mut count = vec![0usize; k];
    let mut travel = vec![0.0; k];
    for i in 0..DRAWS {
        let t = 24.0 * i as f64 / DRAWS as f64;
        let pos = s.sample_position(&mut rng);
        let (j, h) = s.hospitals_by_travel(&pos, t)[0];
        count[j] += 1;
        travel[j] += h;
    }
    let mut w = writer(&out.join("analysis.csv"))?;
    w.write_record(["hospital_id", "arrival_rate", "rho", "lq", "wq", "total_time"])?;
    let (mut num, mut den) = (0.0, 0.0);
    println!("system rho {:.4}", s.stability_ratio());
    for j in 0..k {
        let h = &s.hospitals[j];
        let lambda = s.arrivals.rate * count[j] as f64 / DRAWS as f64;
        let mean_travel = if count[j] > 0 { travel[j] / count[j] as f64 } else { 0.0 };
        let q = QueueParams::new(lambda, h.service.rate(), h.servers, h.capacity())?;
        let (lq, wq) = (q.lq().ok(), q.wq().ok());
        let total = wq.map(|wq| mean_travel + wq + h.service.mean_hours());
        if let Some(t) = total {
            num += t * lambda;
            den += match s.options.global_time {
                GlobalTimeMode::Printed => t,
                GlobalTimeMode::Weighted => lambda,
            };
        }
        w.write_record([
            h.id.to_string(),
            lambda.to_string(),
            q.utilization().to_string(),
            opt(lq),
            opt(wq),
            opt(total),
        ])?;
        println!(
            "hospital {:>4}  lambda {:.4}  rho {:.4}  L_Q {}  W_Q {}",
            h.id,
            lambda,
            q.utilization(),
            lq.map_or("unbounded".into(), |v| format!("{v:.4}")),
            wq.map_or("unbounded".into(), |v| format!("{v:.4}")),
        );
    }
    w.flush()?;
    if den > 0.0 {
        println!("T_global {:.4} (nearest-hospital catchments)", num / den);
    }
    Ok(())
}
