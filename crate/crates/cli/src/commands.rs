use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use reid_temporal::dataset::{load_dataset, CameraId, CameraTopology, Dataset};
use reid_temporal::metrics::{compute_distances, evaluate as evaluate_ds, EvalReport, Metric, ValidityMask};
use reid_temporal::prior::{fit_prior, Family, FitOptions, LocPolicy, PriorError, PriorSpec};
use reid_temporal::rerank::{rerank_frames_tr, FrameMode, RerankConfig, SpatialMode};
use reid_temporal::synth::{aggregate, generate, run_benchmark, BenchSpec, SynthConfig};
use reid_temporal::temporal::{empirical_delta_t, reduce_gallery, TimeWindow};
use serde_json::{json, Value};

use crate::error::{io_error, CliError};
use crate::run::Run;
use crate::{Common, DataArgs};

fn parse<T: std::str::FromStr>(what: &str, s: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    s.parse()
        .map_err(|e| CliError::new("InvalidConfig", format!("bad {what} {s:?}: {e}")))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::new("InvalidConfig", format!("{}: {e}", path.display())))
}

fn load(run: &mut Run, data: &DataArgs) -> Result<Dataset, CliError> {
    let ds = load_dataset(&data.manifest, &data.features)?;
    run.input("manifest", &data.manifest, "Io")?;
    run.input("features", &data.features, "MissingFeature")?;
    Ok(ds)
}

fn load_topology(run: &mut Run, path: Option<&Path>) -> Result<Option<CameraTopology>, CliError> {
    match path {
        Some(p) => {
            let topo = CameraTopology::read_csv(p)?;
            run.input("topology", p, "Io")?;
            Ok(Some(topo))
        }
        None => Ok(None),
    }
}

fn write_eval(run: &mut Run, report: &EvalReport) -> Result<(), CliError> {
    run.write_json_report("report.json", serde_json::to_value(report).expect("report serializes"))?;
    run.write_csv_report("report.csv", &report.to_csv())
}

pub fn evaluate(data: &DataArgs, topology: Option<&Path>, metric: &str, common: &Common) -> Result<(), CliError> {
    let metric: Metric = parse("metric", metric)?;
    let mut run = Run::new("evaluate", &common.output_dir, common.threads)?;
    let ds = load(&mut run, data)?;
    let topo = load_topology(&mut run, topology)?;
    if let Some(t) = &topo {
        for r in ds.queries().iter().chain(ds.gallery()) {
            t.index_of(&r.camera)
                .ok_or_else(|| CliError::new("UnknownCamera", format!("{} not in topology", r.camera)))?;
        }
    }
    run.set_config(json!({ "metric": metric.name() }));
    let dist = compute_distances(&ds, metric)?;
    let report = evaluate_ds(&ds, &dist, &ValidityMask::exclusion(&ds))?;
    write_eval(&mut run, &report)?;
    run.finish()
}

pub fn filter(data: &DataArgs, window: &str, metric: &str, common: &Common) -> Result<(), CliError> {
    let metric: Metric = parse("metric", metric)?;
    let window: TimeWindow = parse("window", window)?;
    let mut run = Run::new("filter", &common.output_dir, common.threads)?;
    let ds = load(&mut run, data)?;
    run.set_config(json!({
        "metric": metric.name(),
        "window_minutes": [window.t_min_minutes(), window.t_max_minutes()],
    }));
    let mask = reduce_gallery(&ds, &window);
    let dist = compute_distances(&ds, metric)?;
    let report = evaluate_ds(&ds, &dist, &mask)?;
    run.write("mask.csv", &mask.to_csv())?;
    write_eval(&mut run, &report)?;
    run.finish()
}

pub struct RerankArgs {
    pub sigma: f64,
    pub prior_json: PathBuf,
    pub spatial: String,
    pub sigma_s: f64,
    pub topology: Option<PathBuf>,
    pub window: Option<String>,
    pub frame_mode: bool,
    pub fps: Option<PathBuf>,
}

pub fn rerank(data: &DataArgs, args: &RerankArgs, common: &Common) -> Result<(), CliError> {
    let spatial: SpatialMode = parse("spatial mode", &args.spatial)?;
    let window: Option<TimeWindow> = args.window.as_deref().map(|w| parse("window", w)).transpose()?;
    let mut run = Run::new("rerank", &common.output_dir, common.threads)?;
    let prior: PriorSpec = read_json(&args.prior_json)?;
    run.input("prior", &args.prior_json, "Io")?;
    let ds = load(&mut run, data)?;
    let topo = load_topology(&mut run, args.topology.as_deref())?;

    let output = if args.frame_mode {
        if window.is_some() || spatial != SpatialMode::Off {
            return Err(CliError::new(
                "InvalidConfig",
                "--frame-mode uses within-camera gaps only; drop --window and --spatial",
            ));
        }
        let fps_path = args
            .fps
            .as_deref()
            .ok_or_else(|| CliError::new("InvalidConfig", "--frame-mode needs --fps"))?;
        let raw: BTreeMap<String, f64> = read_json(fps_path)?;
        run.input("fps", fps_path, "Io")?;
        let fps_per_camera = raw
            .into_iter()
            .map(|(k, v)| Ok((CameraId::parse(&k)?, v)))
            .collect::<Result<BTreeMap<_, _>, reid_temporal::dataset::DatasetError>>()?;
        let frame_mode = FrameMode { fps_per_camera };
        let config = RerankConfig {
            frame_mode: Some(frame_mode.clone()),
            ..RerankConfig::new(args.sigma, prior.clone())
        };
        run.set_config(json!({ "rerank": config }));
        rerank_frames_tr(&ds, &frame_mode, args.sigma, &prior)?
    } else {
        let mut config = RerankConfig::new(args.sigma, prior);
        if spatial != SpatialMode::Off {
            config = config.with_spatial(spatial, args.sigma_s);
        }
        run.set_config(json!({
            "rerank": config,
            "window_minutes": window.map(|w| [w.t_min_minutes(), w.t_max_minutes()]),
        }));
        reid_temporal::rerank::rerank(&ds, &config, window.as_ref(), topo.as_ref())?
    };
    let report = output.evaluate(&ds)?;
    run.write("rankings.csv", &output.rankings_csv())?;
    write_eval(&mut run, &report)?;
    run.finish()
}

fn read_samples(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            out.push(tok.parse::<f64>().map_err(|_| {
                CliError::new("MalformedSamples", format!("{}:{}: not a number: {tok:?}", path.display(), i + 1))
            })?);
        }
    }
    Ok(out)
}

pub fn fit_priors(
    samples: Option<&Path>,
    data: Option<&DataArgs>,
    families: &[String],
    loc: Option<f64>,
    grid_points: usize,
    closed_form: bool,
    common: &Common,
) -> Result<(), CliError> {
    let families: Vec<Family> = if families.is_empty() {
        Family::ALL.to_vec()
    } else {
        families.iter().map(|f| parse("family", f)).collect::<Result<_, _>>()?
    };
    if grid_points == 0 {
        return Err(CliError::new("InvalidConfig", "--grid-points must be positive"));
    }
    let mut run = Run::new("fit-priors", &common.output_dir, common.threads)?;
    let values = match (samples, data) {
        (Some(p), _) => {
            let v = read_samples(p)?;
            run.input("samples", p, "Io")?;
            v
        }
        (None, Some(data)) => {
            let ds = load(&mut run, data)?;
            empirical_delta_t(&ds)?.into_iter().map(|d| d.delta_t_minutes).collect()
        }
        (None, None) => {
            return Err(CliError::new("InvalidConfig", "give --samples or --manifest with --features"));
        }
    };
    let opts = FitOptions {
        loc: match loc {
            Some(l) => LocPolicy::Fixed(l),
            None => LocPolicy::Profile { grid_points },
        },
        closed_form,
        ..FitOptions::default()
    };
    run.set_config(json!({
        "families": families,
        "loc": loc,
        "grid_points": grid_points,
        "closed_form": closed_form,
        "samples": values.len(),
    }));

    let mut csv = String::from("family,log_likelihood,n,status\n");
    let mut first_error: Option<PriorError> = None;
    for family in &families {
        match fit_prior(&values, *family, &opts) {
            Ok(fit) => {
                let name = format!("prior_{}.json", family.name());
                run.write_json_report(&name, serde_json::to_value(&fit).expect("fit serializes"))?;
                csv.push_str(&format!(
                    "{},{},{},ok\n",
                    family.name(),
                    reid_temporal::report::fmt_float(fit.log_likelihood),
                    fit.n
                ));
            }
            Err(e) => {
                csv.push_str(&format!("{},,{},{}\n", family.name(), values.len(), e.code()));
                first_error.get_or_insert(e);
            }
        }
    }
    run.write_csv_report("fits.csv", &csv)?;
    let outcome = first_error.map_or(Ok(()), |e| Err(CliError::from(e)));
    run.finish()?;
    outcome
}

fn synth_config(path: Option<&Path>, seed: Option<u64>) -> Result<SynthConfig, CliError> {
    let mut config: SynthConfig = match path {
        Some(p) => read_json(p)?,
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(config)
}

pub fn synth(config: Option<&Path>, seed: Option<u64>, common: &Common) -> Result<(), CliError> {
    let config = synth_config(config, seed)?;
    let mut run = Run::new("synth", &common.output_dir, common.threads)?;
    run.set_seed(config.seed);
    run.set_config(serde_json::to_value(&config).expect("config serializes"));
    let out = generate(&config)?;
    out.write(run.output_dir())?;
    for name in ["manifest.txt", "features.ridf", "topology.csv", "truth.jsonl", "synth_config.json"] {
        run.note_output(name);
    }
    run.finish()
}

pub fn bench(config: Option<&Path>, seed: Option<u64>, repeat: usize, common: &Common) -> Result<(), CliError> {
    if repeat == 0 {
        return Err(CliError::new("InvalidConfig", "--repeat must be positive"));
    }
    let mut spec: BenchSpec = match config {
        Some(p) => read_json(p)?,
        None => BenchSpec::default(),
    };
    if let Some(s) = seed {
        spec.synth.seed = s;
    }
    let mut run = Run::new("bench", &common.output_dir, common.threads)?;
    if let Some(p) = config {
        run.input("config", p, "Io")?;
    }
    run.set_seed(spec.synth.seed);
    run.set_config(json!({ "spec": spec, "repeat": repeat }));

    let mut tables = Vec::with_capacity(repeat);
    for i in 0..repeat {
        let cfg = SynthConfig {
            seed: spec.synth.seed.wrapping_add(i as u64),
            ..spec.synth.clone()
        };
        tables.push(run_benchmark(&cfg, &spec.bench)?);
    }
    if repeat == 1 {
        run.write_csv_report("bench.csv", &tables[0].to_csv())?;
    } else {
        for (i, t) in tables.iter().enumerate() {
            run.write_csv_report(&format!("runs/bench_run_{i:03}.csv"), &t.to_csv())?;
        }
        run.write_csv_report("bench.csv", &aggregate(&tables)?.to_csv())?;
    }
    let summary: Vec<Value> = tables.iter().map(|t| serde_json::to_value(t).expect("table serializes")).collect();
    run.write_json_report("bench.json", json!({ "runs": summary }))?;
    run.finish()
}
