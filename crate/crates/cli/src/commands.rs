use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use disperse::clustering::{fuzzify, kmeans_with};
use disperse::complexity::{write_reports_csv, ComplexityReport};
use disperse::config::{ConfigDoc, EngineSettings};
use disperse::equalizers::Engine;
use disperse::hyperopt::{
    captures_for_seeds, default_grid, optimize_on_captures, sweep_on_captures, SweepSpec,
};
use disperse::link_sim::{LinkConfig, ResultRow, SimResult};
use disperse::{fmt_num, generate_taps, max_taps};

use crate::manifest::RunManifest;
use crate::{svg, Cli, Command, Common};

pub fn run(cli: Cli) -> Result<()> {
    let common = cli.common;
    if common.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs)
        .build_global()
        .context("starting worker pool")?;
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    match cli.command {
        Command::Design { n_taps } => design(&common, n_taps),
        Command::Cluster {
            n_taps,
            n_clusters,
            eta,
        } => cluster(&common, n_taps, n_clusters, eta),
        Command::Complexity { td, clustered, fd } => complexity(&common, td, clustered, fd),
        Command::Simulate {
            engine,
            snr_db,
            n_taps,
            n_clusters,
        } => {
            let mut doc = load(&common)?;
            set_opt(&mut doc, "engine", engine)?;
            set_opt(&mut doc, "snr_db", snr_db)?;
            set_opt(&mut doc, "n_taps", n_taps)?;
            set_opt(&mut doc, "n_clusters", n_clusters)?;
            simulate(&common, doc)
        }
        Command::Sweep {
            engine,
            grid,
            snr_db,
        } => {
            let mut doc = load(&common)?;
            set_opt(&mut doc, "engine", engine)?;
            set_opt(&mut doc, "snr_db", snr_db)?;
            if !grid.is_empty() {
                doc.set("grid", join(&grid))?;
            }
            sweep(&common, doc)
        }
        Command::Optimize {
            n_clusters,
            alpha_grid,
            eta_grid,
            snr_db,
        } => {
            let mut doc = load(&common)?;
            set_opt(&mut doc, "n_clusters", n_clusters)?;
            set_opt(&mut doc, "snr_db", snr_db)?;
            if !alpha_grid.is_empty() {
                doc.set("alpha_grid", join(&alpha_grid))?;
            }
            if !eta_grid.is_empty() {
                doc.set("eta_grid", join(&eta_grid))?;
            }
            optimize(&common, doc)
        }
    }
}

fn join<V: ToString>(values: &[V]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn set_opt<V: ToString>(doc: &mut ConfigDoc, key: &str, value: Option<V>) -> Result<()> {
    if let Some(v) = value {
        doc.set(key, v.to_string())?;
    }
    Ok(())
}

/// Config file plus `--seed` and `--set` overrides.
fn load(common: &Common) -> Result<ConfigDoc> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| anyhow!("no config given: pass --config or set DISPERSE_DEFAULT_CONFIG"))?;
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut doc =
        ConfigDoc::parse(&text).with_context(|| format!("parsing config {}", path.display()))?;
    if let Some(seed) = common.seed {
        doc.set("seed", seed.to_string())?;
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{kv}`"))?;
        doc.set(k.trim(), v.trim())?;
    }
    Ok(doc)
}

/// Seeds for multi-seed commands: the `seeds` key, or three consecutive seeds from `seed`.
fn sweep_seeds(doc: &ConfigDoc) -> Result<Vec<u64>> {
    if doc.contains("seeds") {
        return Ok(doc.seeds()?);
    }
    let s = doc.get_u64("seed")?.unwrap_or(1);
    Ok(vec![s, s + 1, s + 2])
}

fn write(path: &Path, text: &str, manifest: &mut RunManifest) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    manifest.outputs.push(path.to_path_buf());
    Ok(())
}

fn out_path(common: &Common, name: &str) -> PathBuf {
    common.out.join(name)
}

fn design(common: &Common, n_taps: Option<usize>) -> Result<()> {
    let mut doc = load(common)?;
    set_opt(&mut doc, "n_taps", n_taps)?;
    let system = doc
        .system::<f64>()
        .context("design: reading link parameters")?;
    let n_max = max_taps(&system);
    let n = doc.engine()?.n_taps.unwrap_or(n_max);
    let taps = generate_taps(&system, n).context("design: generating taps")?;
    let mut manifest = RunManifest::new("design", doc.snapshot(), vec![]);
    let mut csv = Vec::new();
    taps.write_csv(&mut csv)?;
    write(
        &out_path(common, "taps.csv"),
        &String::from_utf8(csv)?,
        &mut manifest,
    )?;
    let energy: f64 = taps.taps().iter().map(|g| g.norm_sqr()).sum();
    println!("N_max = {n_max}");
    println!("n_taps = {n}");
    println!("|g| = {}", fmt_num(taps.taps()[0].norm()));
    println!("energy = {}", fmt_num(energy));
    manifest.finish()
}

fn cluster(
    common: &Common,
    n_taps: Option<usize>,
    n_clusters: Option<usize>,
    eta: Option<f64>,
) -> Result<()> {
    let mut doc = load(common)?;
    set_opt(&mut doc, "n_taps", n_taps)?;
    set_opt(&mut doc, "n_clusters", n_clusters)?;
    set_opt(&mut doc, "eta", eta)?;
    let system = doc
        .system::<f64>()
        .context("cluster: reading link parameters")?;
    let settings = doc.engine()?;
    let taps = generate_taps(&system, settings.resolved_taps(&system))
        .context("cluster: generating taps")?;
    let plan = kmeans_with(taps.taps(), settings.n_clusters, &settings.kmeans)
        .context("cluster: k-means")?;
    let fuzzy = fuzzify(&plan, taps.taps(), settings.eta).context("cluster: soft decision")?;
    let mut manifest = RunManifest::new("cluster", doc.snapshot(), vec![settings.kmeans.seed]);
    write(
        &out_path(common, "plan.json"),
        &fuzzy.to_json()?,
        &mut manifest,
    )?;
    println!(
        "n_taps = {}, n_clusters = {}, sse = {}, soft = {} ({:.1}%)",
        taps.n_taps(),
        plan.n_clusters(),
        fmt_num(plan.sse()),
        fuzzy.n_soft(),
        100.0 * fuzzy.soft_fraction()
    );
    if common.svg {
        let pts: Vec<(f64, f64)> = taps.taps().iter().map(|g| (g.re, g.im)).collect();
        let cents: Vec<(f64, f64)> = plan.centroids().iter().map(|c| (c.re, c.im)).collect();
        let soft: Vec<bool> = fuzzy.entries().iter().map(|e| e.is_soft()).collect();
        let title = format!(
            "{} taps, {} clusters, eta {}",
            taps.n_taps(),
            plan.n_clusters(),
            settings.eta
        );
        write(
            &out_path(common, "cluster.svg"),
            &svg::scatter(&pts, &cents, &soft, &title),
            &mut manifest,
        )?;
    }
    manifest.finish()
}

fn complexity(
    common: &Common,
    td: Vec<usize>,
    clustered: Vec<usize>,
    fd: Vec<usize>,
) -> Result<()> {
    let (td, clustered, fd) = if td.is_empty() && clustered.is_empty() && fd.is_empty() {
        (vec![], vec![12, 26], vec![512])
    } else {
        (td, clustered, fd)
    };
    let mut reports = Vec::new();
    for n in td {
        reports.push(ComplexityReport::new(Engine::Direct, n)?);
    }
    for n in clustered {
        reports.push(ComplexityReport::new(Engine::Clustered, n)?);
    }
    for n in fd {
        reports.push(ComplexityReport::new(Engine::FreqDomain, n)?);
    }
    let mut csv = Vec::new();
    write_reports_csv(&reports, &mut csv)?;
    let mut manifest = RunManifest::new("complexity", vec![], vec![]);
    write(
        &out_path(common, "complexity.csv"),
        &String::from_utf8(csv)?,
        &mut manifest,
    )?;
    for r in &reports {
        println!("{} {}: {:.2} RMPS", r.engine.name(), r.parameter, r.rmps);
    }
    manifest.finish()
}

fn result_row(
    settings: &EngineSettings,
    link: &LinkConfig<f64>,
    r: &SimResult,
    seed: u64,
    soft: Option<(f64, f64)>,
) -> ResultRow {
    let clustered = matches!(settings.engine, Engine::Clustered | Engine::Fuzzy);
    let (alpha, eta) = match (settings.engine, soft) {
        (Engine::Fuzzy, Some((a, e))) => (Some(a), Some(e)),
        (Engine::Fuzzy, None) => (Some(settings.alpha), Some(settings.eta)),
        _ => (None, None),
    };
    ResultRow {
        engine: settings.engine.name().to_string(),
        param: settings.parameter(&link.system),
        n_clusters: clustered.then_some(settings.n_clusters),
        eta,
        alpha,
        snr_db: link.snr_db,
        ber: r.ber,
        q_db: r.q_db,
        evm_percent: r.evm_percent,
        rmps: r.rmps,
        seed,
    }
}

fn simulate(common: &Common, doc: ConfigDoc) -> Result<()> {
    let link = doc
        .link::<f64>()
        .context("simulate: reading link parameters")?;
    let settings = doc.engine()?;
    let seeds = doc.seeds()?;
    let eq = settings
        .build(&link.system)
        .context("simulate: building equalizer")?;
    let captures = captures_for_seeds(&link, &seeds).context("simulate: link")?;
    let mut csv = format!("{}\n", ResultRow::CSV_HEADER);
    for (seed, cap) in seeds.iter().zip(&captures) {
        let r = cap.evaluate(&eq).context("simulate: equalizer")?;
        println!(
            "seed {seed}: ber {:.4e}, q {:.3} dB, evm {:.2}%, {:.1} RMPS",
            r.ber, r.q_db, r.evm_percent, r.rmps
        );
        csv.push_str(&result_row(&settings, &link, &r, *seed, None).csv_row());
        csv.push('\n');
    }
    let mut manifest = RunManifest::new("simulate", doc.snapshot(), seeds);
    write(&out_path(common, "simulate.csv"), &csv, &mut manifest)?;
    manifest.finish()
}

fn sweep(common: &Common, doc: ConfigDoc) -> Result<()> {
    let link = doc
        .link::<f64>()
        .context("sweep: reading link parameters")?;
    let base = doc.engine()?;
    let grid = doc
        .get_list::<usize>("grid")?
        .ok_or_else(|| anyhow!("sweep: no grid given (--grid or the `grid` key)"))?;
    let mut spec = SweepSpec::new(base.engine, grid, link.clone());
    spec.seeds = sweep_seeds(&doc)?;
    spec.base = base.clone();
    if let Some(g) = doc.get_list::<f64>("alpha_grid")? {
        spec.alpha_grid = g;
    }
    if let Some(g) = doc.get_list::<f64>("eta_grid")? {
        spec.eta_grid = g;
    }
    spec.validate().context("sweep: invalid sweep")?;
    let captures = captures_for_seeds(&link, &spec.seeds).context("sweep: link")?;
    let points = sweep_on_captures(&spec, &captures).context("sweep: evaluation")?;
    let best = (1..points.len()).fold(0, |b, i| {
        if points[i].stats.q_mean > points[b].stats.q_mean {
            i
        } else {
            b
        }
    });

    let mut csv = format!("{},is_optimum\n", ResultRow::CSV_HEADER);
    let mut summary = String::from("param,q_mean,q_std,ber_mean,rmps,alpha,eta\n");
    for (i, p) in points.iter().enumerate() {
        let settings = spec.settings_at(p.param);
        let soft = p.alpha.zip(p.eta);
        for (seed, r) in spec.seeds.iter().zip(&p.stats.runs) {
            csv.push_str(&result_row(&settings, &link, r, *seed, soft).csv_row());
            csv.push_str(if i == best { ",true\n" } else { ",false\n" });
        }
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        summary.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.param,
            fmt_num(p.stats.q_mean),
            fmt_num(p.stats.q_std),
            fmt_num(p.stats.ber_mean),
            fmt_num(p.rmps),
            opt(p.alpha),
            opt(p.eta)
        ));
        println!(
            "{} {}: q {:.3} +- {:.3} dB, {:.1} RMPS",
            base.engine.name(),
            p.param,
            p.stats.q_mean,
            p.stats.q_std,
            p.rmps
        );
    }
    let mut manifest = RunManifest::new("sweep", doc.snapshot(), spec.seeds.clone());
    write(&out_path(common, "sweep.csv"), &csv, &mut manifest)?;
    write(
        &out_path(common, "sweep_summary.csv"),
        &summary,
        &mut manifest,
    )?;
    if common.svg {
        let pts: Vec<(f64, f64, f64)> = points
            .iter()
            .map(|p| (p.param as f64, p.stats.q_mean, p.rmps))
            .collect();
        let label = match base.engine {
            Engine::Direct => "taps",
            Engine::Clustered | Engine::Fuzzy => "clusters",
            Engine::FreqDomain => "FFT size",
        };
        let title = format!("{} sweep at {} dB SNR", base.engine.name(), link.snr_db);
        write(
            &out_path(common, "sweep.svg"),
            &svg::q_and_rmps(&pts, label, &title),
            &mut manifest,
        )?;
    }
    manifest.finish()
}

fn optimize(common: &Common, doc: ConfigDoc) -> Result<()> {
    let link = doc
        .link::<f64>()
        .context("optimize: reading link parameters")?;
    let mut settings = doc.engine()?;
    settings.engine = Engine::Fuzzy;
    let seeds = sweep_seeds(&doc)?;
    let alpha_grid = doc
        .get_list::<f64>("alpha_grid")?
        .unwrap_or_else(default_grid);
    let eta_grid = doc
        .get_list::<f64>("eta_grid")?
        .unwrap_or_else(default_grid);
    let taps = generate_taps(&link.system, settings.resolved_taps(&link.system))
        .context("optimize: taps")?;
    let plan = kmeans_with(taps.taps(), settings.n_clusters, &settings.kmeans)
        .context("optimize: k-means")?;
    let captures = captures_for_seeds(&link, &seeds).context("optimize: link")?;
    let opt = optimize_on_captures(&captures, &taps, &plan, &alpha_grid, &eta_grid)
        .context("optimize: search")?;

    let mut csv = format!("{},is_optimum\n", ResultRow::CSV_HEADER);
    for (i, p) in opt.grid.iter().enumerate() {
        for (seed, r) in seeds.iter().zip(&p.stats.runs) {
            csv.push_str(&result_row(&settings, &link, r, *seed, Some((p.alpha, p.eta))).csv_row());
            csv.push_str(if i == opt.best { ",true\n" } else { ",false\n" });
        }
    }
    println!(
        "n_clusters {}: alpha* = {}, eta* = {}, q* = {:.3} dB",
        settings.n_clusters, opt.alpha, opt.eta, opt.q_db
    );
    let mut manifest = RunManifest::new("optimize", doc.snapshot(), seeds);
    write(&out_path(common, "optimize.csv"), &csv, &mut manifest)?;
    manifest.finish()
}
