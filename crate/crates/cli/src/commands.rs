use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use lpr_core::analytic::{
    self, BetaGeometricModel, Figure, FirstOrderModel, RegularityModel, TrafficDensity,
};
use lpr_core::mobility::{empirical_regularity, CellGrid, MobilityModel, MobilityParams};
use lpr_core::profile::{build_profile, read_traces, write_traces, Order, SlotConfig};
use lpr_core::simnet::{compare_ghls, run_scenario, ScenarioConfig, SweepConfig};

use crate::manifest::RunManifest;
use crate::params::{
    BuildProfileArgs, CompareGhlsArgs, CurvesArgs, GenTraceArgs, Resolved, SimulateArgs,
};
use crate::UsageError;

/// Tracks the files a command writes so the manifest can list them.
pub struct Outputs<'a> {
    dir: &'a Path,
    manifest: &'a mut RunManifest,
}

impl<'a> Outputs<'a> {
    pub fn new(dir: &'a Path, manifest: &'a mut RunManifest) -> Self {
        Self { dir, manifest }
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.manifest.outputs.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    fn write_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn read_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read scenario {}: {e}", path.display())))?;
    ScenarioConfig::from_toml(&text).with_context(|| format!("in scenario {}", path.display()))
}

pub fn resolve_simulate(args: &SimulateArgs) -> Result<Resolved> {
    let mut scenario = read_scenario(&args.scenario)?;
    if let Some(t) = args.trials {
        scenario.traffic.trials = t;
    }
    if let Some(s) = args.seed {
        scenario.seeds.traffic = s;
    }
    scenario.validate()?;
    Ok(Resolved::Simulate { scenario })
}

pub fn resolve_compare(args: &CompareGhlsArgs) -> Result<Resolved> {
    let mut scenario = match &args.scenario {
        Some(p) => read_scenario(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(k) = args.k {
        scenario.strategy.k = k;
    }
    if let Some(g) = &args.grouping {
        scenario.strategy.grouping = g
            .parse()
            .map_err(|e| UsageError(format!("--grouping: {e}")))?;
    }
    if let Some(n) = args.nodes {
        scenario.topology.nodes = n;
    }
    if let Some(d) = args.avg_degree {
        scenario.topology.avg_degree = d;
        scenario.topology.radio_range = None;
    }
    if let Some(f) = args.floor {
        scenario.traffic.floor = f;
    }
    if let Some(s) = args.seed {
        scenario.seeds.traffic = s;
    }
    scenario.validate()?;
    let sweep = SweepConfig::linspace(scenario, args.min, args.max, args.steps, args.packets)
        .map_err(|e| UsageError(format!("sweep range: {e}")))?;
    Ok(Resolved::CompareGhls {
        scenario: sweep.scenario,
        ratios: sweep.ratios,
        packets: sweep.first_packets,
    })
}

pub fn execute(resolved: &Resolved, out: &mut Outputs) -> Result<()> {
    match resolved {
        Resolved::Curves(a) => curves(a, out),
        Resolved::GenTrace(a) => gen_trace(a, out),
        Resolved::BuildProfile(a) => build_profiles(a, out),
        Resolved::Simulate { scenario } => simulate(scenario, out),
        Resolved::CompareGhls {
            scenario,
            ratios,
            packets,
        } => compare(scenario, ratios, *packets, out),
    }
}

fn regularity(c1: f64, c2: f64, c3: f64) -> Result<RegularityModel> {
    RegularityModel::new(c1, c2, c3).map_err(|e| UsageError(format!("--c1/--c2/--c3: {e}")).into())
}

fn curves(a: &CurvesArgs, out: &mut Outputs) -> Result<()> {
    let zeroth = BetaGeometricModel::new(a.c).map_err(|e| UsageError(format!("--c: {e}")))?;
    let first = FirstOrderModel::new(regularity(a.c1, a.c2, a.c3)?, TrafficDensity::uniform());
    if a.max_k == 0 {
        bail!(UsageError("--max-k must be positive".into()));
    }
    for fig in a.fig.figures() {
        let mut w = out.create(fig.file_name())?;
        match fig {
            Figure::Fig2 => analytic::write_fig2(&mut w, &zeroth, a.max_k)?,
            Figure::Fig3 => analytic::write_fig3(&mut w, &first, a.max_k)?,
            Figure::Fig4 => analytic::write_fig4(&mut w, &first, a.max_k)?,
            Figure::Fig5 => analytic::write_fig5(&mut w, &first, a.max_k)?,
            Figure::Fig7 => {
                if let Some(bad) =
                    a.k.iter()
                        .find(|&&k| k == 0 || k > analytic::MAX_ENUMERATION_K)
                {
                    bail!(UsageError(format!(
                        "--k {bad}: must lie in 1..={}",
                        analytic::MAX_ENUMERATION_K
                    )));
                }
                analytic::write_fig7(&mut w, &first, &a.k)?
            }
        }
        w.flush()?;
        println!("wrote {}", fig.file_name());
    }
    Ok(())
}

fn flag_for(name: &str) -> &'static str {
    match name {
        "n_users" => "--users",
        "locations" => "--locations",
        "unpredictable_floor" => "--floor",
        "grid" => "--grid/--cell-size",
        "slot_minutes" => "--slot-minutes",
        "regularity" => "--c1/--c2/--c3",
        _ => "?",
    }
}

fn mobility_params(a: &GenTraceArgs) -> Result<MobilityParams> {
    let usage = |e: lpr_core::Error| -> anyhow::Error {
        match &e {
            lpr_core::Error::InvalidArgument { name, reason } => {
                UsageError(format!("{}: {reason}", flag_for(name))).into()
            }
            _ => e.into(),
        }
    };
    if a.weeks == 0 {
        bail!(UsageError("--weeks: must be positive".into()));
    }
    let params = MobilityParams {
        n_users: a.users,
        n_weeks: a.weeks,
        locations: a.locations,
        regularity: RegularityModel::new(a.c1, a.c2, a.c3).map_err(usage)?,
        unpredictable_floor: a.floor,
        grid: CellGrid::new(a.grid, a.grid, a.cell_size).map_err(usage)?,
        slots: SlotConfig::new(a.slot_minutes).map_err(usage)?,
        seed: a.seed,
    };
    params.validate().map_err(usage)?;
    Ok(params)
}

fn gen_trace(a: &GenTraceArgs, out: &mut Outputs) -> Result<()> {
    let params = mobility_params(a)?;
    let users = MobilityModel::new(params.clone())?.generate_users();
    let traces: Vec<_> = users.into_iter().map(|u| u.trace).collect();
    let mut w = out.create("traces.csv")?;
    write_traces(&mut w, &traces)?;
    w.flush()?;
    println!(
        "wrote traces.csv: {} users x {} weeks",
        params.n_users, params.n_weeks
    );
    if a.verify {
        verify_regularity(&params, &traces, out)?;
    }
    Ok(())
}

/// Per-slot family-wise 99% band: z for 0.01 / 168 two-sided.
const VERIFY_Z: f64 = 3.8;

fn verify_regularity(
    params: &MobilityParams,
    traces: &[lpr_core::profile::ObservationTrace],
    out: &mut Outputs,
) -> Result<()> {
    let emp = empirical_regularity(traces, &params.slots);
    let spw = params.slots.slots_per_week();
    let n = (params.n_users * params.n_weeks) as f64;
    let mut w = csv_writer(out.create("verify.csv")?);
    w.write_record(["slot", "empirical", "model", "band", "ok"])?;
    let mut failed = 0;
    for (sow, &e) in emp.iter().enumerate() {
        let r = params
            .regularity
            .at_wrapped(params.slots.hour_of_week(sow as u32));
        let band = VERIFY_Z * (r * (1.0 - r) / n).sqrt();
        let ok = (e - r).abs() <= band;
        failed += !ok as usize;
        w.write_record([
            sow.to_string(),
            format!("{e:.6}"),
            format!("{r:.6}"),
            format!("{band:.6}"),
            ok.to_string(),
        ])?;
    }
    w.flush()?;
    let mean = emp.iter().sum::<f64>() / emp.len() as f64;
    println!(
        "verify: {}/{spw} slots inside the 99% band, mean regularity {mean:.4}",
        spw as usize - failed
    );
    if failed > 0 {
        bail!("verification failed: {failed} of {spw} slots outside the band (see verify.csv)");
    }
    Ok(())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

fn build_profiles(a: &BuildProfileArgs, out: &mut Outputs) -> Result<()> {
    let order = Order::from_depth(a.order).map_err(|e| UsageError(format!("--order: {e}")))?;
    let slots =
        SlotConfig::new(a.slot_minutes).map_err(|e| UsageError(format!("--slot-minutes: {e}")))?;
    let file = File::open(&a.trace)
        .map_err(|e| UsageError(format!("cannot read trace {}: {e}", a.trace.display())))?;
    let traces = read_traces(std::io::BufReader::new(file))?;
    let mut summary = csv_writer(out.create("profiles.csv")?);
    summary.write_record(["node_id", "observations", "contexts", "bytes", "file"])?;
    for t in &traces {
        let profile = build_profile(t, order, slots);
        let bytes = profile.to_bytes();
        let name = format!("profiles/node-{}.lprp", t.node_id());
        let mut w = out.create(&name)?;
        w.write_all(&bytes)?;
        w.flush()?;
        summary.write_record([
            t.node_id().to_string(),
            t.records().len().to_string(),
            profile.contexts().len().to_string(),
            bytes.len().to_string(),
            name,
        ])?;
    }
    summary.flush()?;
    println!("built {} order-{} profiles", traces.len(), a.order);
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.4}"))
}

fn simulate(scenario: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let report = run_scenario(scenario)?;
    let mut w = out.create("trials.csv")?;
    report.write_trials_csv(&mut w)?;
    w.flush()?;
    out.write_json("summary.json", &report.metrics)?;
    let m = &report.metrics;
    println!("strategy             {:?} ({})", m.strategy, m.grouping);
    println!("trials               {}", m.trials);
    println!("delivery ratio       {}", opt(m.delivery_ratio));
    println!("reachability         {}", opt(m.reachability));
    println!("delivery / reach     {}", opt(m.delivery_vs_reachability));
    println!(
        "latency factor       {} (p50 {}, p90 {}, p99 {}; analytic {})",
        opt(m.mean_latency_factor),
        opt(m.latency_p50),
        opt(m.latency_p90),
        opt(m.latency_p99),
        opt(m.analytic_latency)
    );
    println!(
        "traffic factor       {} (analytic {})",
        opt(m.traffic_factor),
        opt(m.analytic_traffic)
    );
    println!(
        "cost per packet      lpr {} ghls {} at f/r = {}",
        opt(m.lpr_cost_per_packet),
        opt(m.ghls_cost_per_packet),
        m.ghls_update_ratio
    );
    Ok(())
}

fn compare(
    scenario: &ScenarioConfig,
    ratios: &[f64],
    packets: u32,
    out: &mut Outputs,
) -> Result<()> {
    let sweep = SweepConfig {
        scenario: scenario.clone(),
        ratios: ratios.to_vec(),
        first_packets: packets,
    };
    let report = compare_ghls(&sweep)?;
    let mut w = csv_writer(out.create("crossover.csv")?);
    for p in &report.points {
        w.serialize(p)?;
    }
    w.flush()?;
    out.write_json("crossover.json", &report)?;
    println!(
        "grouping {}: s = {:.2}, p = {:.2}, T measured {:.3}, analytic {:.3}",
        report.grouping,
        report.measured_s,
        report.measured_p,
        report.measured_traffic_factor,
        report.analytic_traffic
    );
    println!("{:>8} {:>10} {:>10}", "f/r", "ghls", "lpr");
    for p in &report.points {
        println!(
            "{:>8.3} {:>10.3} {:>10.3}",
            p.update_ratio, p.ghls_cost, p.lpr_cost
        );
    }
    match report.empirical_crossover {
        Some(x) if x <= ratios[0] => println!(
            "LPR cheaper across the sweep from f/r = {} (analytic crossover {:.3})",
            ratios[0], report.analytic_crossover
        ),
        Some(x) => println!(
            "crossover at f/r = {x:.3} (analytic {:.3})",
            report.analytic_crossover
        ),
        None => println!(
            "no crossover in [{}, {}] (analytic {:.3})",
            ratios[0],
            ratios[ratios.len() - 1],
            report.analytic_crossover
        ),
    }
    Ok(())
}
