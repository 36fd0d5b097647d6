//! Experiment harness behind the `cnm` binary: config files, family
//! dispatch, one-vs-rest wrapping, and CSV/JSON artifacts.
//!
//! Config files are flat `key = value` lines (`#` comments). Every field
//! is validated before any compute starts; `gamma = auto` resolves via
//! the nearest-neighbor bandwidth heuristic and the resolved value is
//! recorded in the output manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{estimate_gamma, load_csv, load_libsvm, make_two_rings, Dataset};
use crate::error::{Error, Result};
use crate::eval::{bench_projection, bench_records_to_csv, evaluate, BenchRecord, KMode};
use crate::kernels::{approx_mse, sample_pairs, KernelSpec, GRAM_CAP};
use crate::maps::{load_map, save_map, AnyMap, FeatureMap};
use crate::train::{
    pegasos_optimize_w, train_circulant_cnm, train_circulant_random, train_cnm,
    train_kernel_approx, train_rffm, LinearModel, TrainConfig, TrainTrace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    DenseRffm,
    Cnm,
    CnmKerapp,
    CirculantRandom,
    CirculantOptimized,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dense-rffm" => Ok(Family::DenseRffm),
            "cnm" => Ok(Family::Cnm),
            "cnm-kerapp" => Ok(Family::CnmKerapp),
            "circulant-random" => Ok(Family::CirculantRandom),
            "circulant-optimized" => Ok(Family::CirculantOptimized),
            other => Err(Error::Config(format!(
                "family: unknown value `{other}` (expected dense-rffm, cnm, cnm-kerapp, \
                 circulant-random or circulant-optimized)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::DenseRffm => "dense-rffm",
            Family::Cnm => "cnm",
            Family::CnmKerapp => "cnm-kerapp",
            Family::CirculantRandom => "circulant-random",
            Family::CirculantOptimized => "circulant-optimized",
        }
    }
}

#[derive(Debug, Clone)]
pub enum DataSource {
    File {
        path: PathBuf,
        format: FileFormat,
        label_col: usize,
        header: bool,
    },
    TwoRings {
        n_per_class: usize,
        inner: f64,
        outer: f64,
        noise_sd: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Libsvm,
    Csv,
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::File {
                path,
                format,
                label_col,
                header,
            } => match format {
                FileFormat::Libsvm => load_libsvm(path),
                FileFormat::Csv => load_csv(path, *label_col, *header),
            },
            DataSource::TwoRings {
                n_per_class,
                inner,
                outer,
                noise_sd,
                seed,
            } => make_two_rings(*n_per_class, *inner, *outer, *noise_sd, *seed),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum GammaSetting {
    Auto,
    Fixed(f64),
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset: DataSource,
    pub test_dataset: Option<DataSource>,
    pub gamma: GammaSetting,
    pub family: Family,
    pub ks: Vec<usize>,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub standardize: bool,
    /// Flat key/value echo for the manifest.
    pub resolved: BTreeMap<String, String>,
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config(format!(
            "line {}: expected `key = value`, got `{line}`",
            lineno + 1
        )))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn get_parsed<T: std::str::FromStr>(
    kv: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T> {
    match kv.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|_| Error::Config(format!("{key}: cannot parse `{raw}`"))),
    }
}

fn get_list<T: std::str::FromStr>(
    kv: &BTreeMap<String, String>,
    key: &str,
    default: Vec<T>,
) -> Result<Vec<T>> {
    match kv.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: cannot parse `{s}`")))
            })
            .collect(),
    }
}

fn data_source_from(kv: &BTreeMap<String, String>, key: &str) -> Result<Option<DataSource>> {
    let Some(raw) = kv.get(key) else {
        return Ok(None);
    };
    if raw == "two-rings" {
        let seed_key = if key == "dataset" { "rings.seed" } else { "rings.test_seed" };
        let default_seed = if key == "dataset" { 42 } else { 43 };
        return Ok(Some(DataSource::TwoRings {
            n_per_class: get_parsed(kv, "rings.n", 1000usize)?,
            inner: get_parsed(kv, "rings.inner", 1.0)?,
            outer: get_parsed(kv, "rings.outer", 2.0)?,
            noise_sd: get_parsed(kv, "rings.noise", 0.2)?,
            seed: get_parsed(kv, seed_key, default_seed)?,
        }));
    }
    let path = PathBuf::from(raw);
    if !path.exists() {
        return Err(Error::Config(format!("{key}: no such file `{}`", path.display())));
    }
    let format = match kv.get("format").map(String::as_str) {
        Some("libsvm") => FileFormat::Libsvm,
        Some("csv") => FileFormat::Csv,
        Some(other) => {
            return Err(Error::Config(format!("format: unknown value `{other}`")));
        }
        None => {
            if path.extension().is_some_and(|e| e == "csv") {
                FileFormat::Csv
            } else {
                FileFormat::Libsvm
            }
        }
    };
    Ok(Some(DataSource::File {
        path,
        format,
        label_col: get_parsed(kv, "label_col", 0usize)?,
        header: get_parsed(kv, "header", false)?,
    }))
}

impl ExperimentConfig {
    /// Parse and validate a flat key=value config, with `overrides`
    /// applied on top (CLI flags).
    pub fn from_text(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut kv = parse_kv(text)?;
        for (k, v) in overrides {
            kv.insert(k.clone(), v.clone());
        }

        let dataset = data_source_from(&kv, "dataset")?
            .ok_or_else(|| Error::Config("dataset: missing".into()))?;
        let test_dataset = match data_source_from(&kv, "test_dataset")? {
            Some(src) => Some(src),
            // synthetic runs get an independent synthetic test split
            None => match &dataset {
                DataSource::TwoRings {
                    n_per_class,
                    inner,
                    outer,
                    noise_sd,
                    seed,
                } => Some(DataSource::TwoRings {
                    n_per_class: *n_per_class,
                    inner: *inner,
                    outer: *outer,
                    noise_sd: *noise_sd,
                    seed: seed.wrapping_add(1),
                }),
                DataSource::File { .. } => None,
            },
        };

        let gamma = match kv.get("gamma").map(String::as_str) {
            None | Some("auto") => GammaSetting::Auto,
            Some(raw) => {
                let g: f64 = raw
                    .parse()
                    .map_err(|_| Error::Config(format!("gamma: cannot parse `{raw}`")))?;
                if !(g > 0.0) {
                    return Err(Error::Config(format!("gamma: must be positive, got {g}")));
                }
                GammaSetting::Fixed(g)
            }
        };

        let family = Family::parse(kv.get("family").map(String::as_str).unwrap_or("cnm"))?;
        let ks: Vec<usize> = get_list(&kv, "k", vec![8])?;
        if ks.is_empty() || ks.contains(&0) {
            return Err(Error::Config("k: must be a nonempty list of positive sizes".into()));
        }
        let seeds: Vec<u64> = get_list(&kv, "seeds", vec![0])?;
        if seeds.is_empty() {
            return Err(Error::Config("seeds: must be nonempty".into()));
        }

        let train = TrainConfig {
            outer_iters: get_parsed(&kv, "t", 10usize)?,
            w_steps: get_parsed(&kv, "t1", 100usize)?,
            theta_steps: get_parsed(&kv, "t2", 100usize)?,
            batch_size: get_parsed(&kv, "batch_size", 500usize)?,
            lambda: get_parsed(&kv, "lambda", 1e-2)?,
            seed: 0, // per-run seed assigned from `seeds`
            theta_decay: get_parsed(&kv, "theta_decay", 0.0)?,
            eta0: get_parsed(&kv, "eta0", 1.0)?,
            reset_step_counter: get_parsed(&kv, "reset_t", false)?,
        };
        train.validate()?;

        let out_dir = PathBuf::from(kv.get("out").cloned().unwrap_or_else(|| "out".into()));
        let standardize = get_parsed(&kv, "standardize", false)?;

        Ok(ExperimentConfig {
            dataset,
            test_dataset,
            gamma,
            family,
            ks,
            train,
            seeds,
            out_dir,
            standardize,
            resolved: kv,
        })
    }

    pub fn from_file(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("config `{}`: {e}", path.as_ref().display())))?;
        Self::from_text(&text, overrides)
    }

    /// Resolve `gamma = auto` against the training data; deterministic in
    /// the first training seed.
    pub fn resolve_gamma(&self, train_data: &Dataset) -> Result<f64> {
        match self.gamma {
            GammaSetting::Fixed(g) => Ok(g),
            GammaSetting::Auto => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seeds[0]);
                estimate_gamma(train_data, 1000, 50.min(train_data.len() - 1), &mut rng)
            }
        }
    }
}

/// Train one family on a binary dataset.
pub fn train_family(
    family: Family,
    ds: &Dataset,
    holdout: Option<&Dataset>,
    k: usize,
    cfg: &TrainConfig,
    spec: &KernelSpec,
) -> Result<(AnyMap, LinearModel, TrainTrace)> {
    match family {
        Family::DenseRffm => {
            let (map, model, trace) = train_rffm(ds, holdout, k, true, cfg, spec)?;
            Ok((AnyMap::Dense(map), model, trace))
        }
        Family::Cnm => {
            let (map, model, trace) = train_cnm(ds, holdout, k, cfg, spec)?;
            Ok((AnyMap::Dense(map), model, trace))
        }
        Family::CnmKerapp => {
            // optimize the map against the kernel first, then fit w on the
            // frozen map with the same Pegasos budget as the baselines
            let (map, _) = train_kernel_approx(ds, k, cfg, spec)?;
            let mut model = LinearModel::zeros(k, cfg.lambda)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
            let mut t = 0u64;
            pegasos_optimize_w(
                &mut model,
                &map,
                ds,
                cfg,
                cfg.outer_iters * cfg.w_steps,
                &mut t,
                &mut rng,
            )?;
            let mut trace = TrainTrace::default();
            let train = evaluate(&model, &map, ds)?;
            let test_acc = match holdout {
                Some(h) => Some(evaluate(&model, &map, h)?.accuracy),
                None => None,
            };
            trace.records.push(crate::train::TraceRecord {
                iter: 1,
                objective: train.mean_hinge,
                train_acc: train.accuracy,
                test_acc,
                mse: None,
            });
            Ok((AnyMap::Dense(map), model, trace))
        }
        Family::CirculantRandom => {
            let (map, model, trace) = train_circulant_random(ds, holdout, k, cfg, spec)?;
            Ok((AnyMap::Circulant(map), model, trace))
        }
        Family::CirculantOptimized => {
            let (map, model, trace) = train_circulant_cnm(ds, holdout, k, cfg, spec)?;
            Ok((AnyMap::Circulant(map), model, trace))
        }
    }
}

/// One-vs-rest ensemble for multi-class data: one binary run per class,
/// prediction by argmax over class scores.
pub struct OvrModel {
    pub classes: Vec<i32>,
    pub members: Vec<(AnyMap, LinearModel)>,
}

pub fn train_ovr(
    family: Family,
    ds: &Dataset,
    k: usize,
    cfg: &TrainConfig,
    spec: &KernelSpec,
) -> Result<OvrModel> {
    let classes = ds.classes();
    let mut members = Vec::with_capacity(classes.len());
    for &c in &classes {
        let binary = ds.binarize(c);
        let (map, model, _) = train_family(family, &binary, None, k, cfg, spec)?;
        members.push((map, model));
    }
    Ok(OvrModel { classes, members })
}

pub fn evaluate_ovr(ovr: &OvrModel, ds: &Dataset) -> Result<f64> {
    let mut correct = 0usize;
    for i in 0..ds.len() {
        let mut best = (f64::NEG_INFINITY, 0);
        for (ci, (map, model)) in ovr.members.iter().enumerate() {
            let z = map.project(ds.row(i))?;
            let score = model.score(&z);
            if score > best.0 {
                best = (score, ci);
            }
        }
        if ovr.classes[best.1] == ds.label(i) {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds.len() as f64)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub command: String,
    pub family: String,
    pub ks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub resolved_gamma: f64,
    pub config: BTreeMap<String, String>,
    pub wall_secs: f64,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn load_split(config: &ExperimentConfig) -> Result<(Dataset, Option<Dataset>)> {
    let mut train = config.dataset.load()?;
    let mut test = config.test_dataset.as_ref().map(|s| s.load()).transpose()?;
    if config.standardize {
        train.standardize();
        if let Some(t) = test.as_mut() {
            t.standardize();
        }
    }
    Ok((train, test))
}

/// Map-quality metric for sweep rows: exact over all pairs at small N,
/// 10^5 sampled pairs beyond the dense cap.
fn map_mse(map: &AnyMap, spec: &KernelSpec, ds: &Dataset, seed: u64) -> Result<f64> {
    if ds.len() <= GRAM_CAP {
        approx_mse(map, spec, ds, None)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = sample_pairs(ds.len(), 100_000, &mut rng);
        approx_mse(map, spec, ds, Some(&pairs))
    }
}

/// `train` subcommand: train `family` at each configured k and seed,
/// writing maps, models, traces, an aggregate CSV, and a manifest.
pub fn cmd_train(config: &ExperimentConfig) -> Result<()> {
    let started = Instant::now();
    let (train_data, test_data) = load_split(config)?;
    let gamma = config.resolve_gamma(&train_data)?;
    let spec = KernelSpec::rbf(gamma)?;

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;

    let multiclass = !train_data.is_binary();
    let mut aggregate = String::from("family,k,seed,train_acc,test_acc\n");
    let mut final_test: Vec<f64> = Vec::new();
    let mut final_train: Vec<f64> = Vec::new();

    for &k in &config.ks {
        for &seed in &config.seeds {
            let mut cfg = config.train.clone();
            cfg.seed = seed;
            let tag = if config.ks.len() > 1 {
                format!("k{k}_seed{seed}")
            } else {
                format!("seed{seed}")
            };

            let (train_acc, test_acc) = if multiclass {
                let ovr = train_ovr(config.family, &train_data, k, &cfg, &spec)?;
                for (ci, (map, model)) in ovr.members.iter().enumerate() {
                    let class = ovr.classes[ci];
                    save_map(
                        map,
                        Some(gamma),
                        Some(seed),
                        config.out_dir.join(format!("map_{tag}_class{class}.json")),
                    )?;
                    write_file(
                        &config.out_dir.join(format!("model_{tag}_class{class}.json")),
                        &serde_json::to_string_pretty(model)?,
                    )?;
                }
                let train_acc = evaluate_ovr(&ovr, &train_data)?;
                let test_acc = match &test_data {
                    Some(t) => Some(evaluate_ovr(&ovr, t)?),
                    None => None,
                };
                (train_acc, test_acc)
            } else {
                let (map, model, trace) =
                    train_family(config.family, &train_data, test_data.as_ref(), k, &cfg, &spec)?;
                save_map(
                    &map,
                    Some(gamma),
                    Some(seed),
                    config.out_dir.join(format!("map_{tag}.json")),
                )?;
                write_file(
                    &config.out_dir.join(format!("model_{tag}.json")),
                    &serde_json::to_string_pretty(&model)?,
                )?;
                trace.write_csv(config.out_dir.join(format!("trace_{tag}.csv")))?;
                let last = trace.records.last();
                let train_acc = match last {
                    Some(r) => r.train_acc,
                    None => evaluate(&model, &map, &train_data)?.accuracy,
                };
                let test_acc = match (last.and_then(|r| r.test_acc), &test_data) {
                    (Some(acc), _) => Some(acc),
                    (None, Some(t)) => Some(evaluate(&model, &map, t)?.accuracy),
                    (None, None) => None,
                };
                (train_acc, test_acc)
            };

            final_train.push(train_acc);
            if let Some(acc) = test_acc {
                final_test.push(acc);
            }
            aggregate.push_str(&format!(
                "{},{},{},{},{}\n",
                config.family.name(),
                k,
                seed,
                train_acc,
                test_acc.map_or(String::new(), |v| v.to_string())
            ));
        }
    }

    let (mtr, str_) = mean_sd(&final_train);
    aggregate.push_str(&format!("# train_acc mean={mtr} sd={str_}\n"));
    if !final_test.is_empty() {
        let (mte, ste) = mean_sd(&final_test);
        aggregate.push_str(&format!("# test_acc mean={mte} sd={ste}\n"));
    }
    write_file(&config.out_dir.join("aggregate.csv"), &aggregate)?;

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: "train".into(),
        family: config.family.name().into(),
        ks: config.ks.clone(),
        seeds: config.seeds.clone(),
        resolved_gamma: gamma,
        config: config.resolved.clone(),
        wall_secs: started.elapsed().as_secs_f64(),
    };
    write_file(
        &config.out_dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// `sweep` subcommand: one CSV row per (family, k, seed) with held-out
/// accuracy and kernel-approximation MSE.
pub fn cmd_sweep(config: &ExperimentConfig, families: &[Family]) -> Result<()> {
    let started = Instant::now();
    let (train_data, test_data) = load_split(config)?;
    let gamma = config.resolve_gamma(&train_data)?;
    let spec = KernelSpec::rbf(gamma)?;

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let mut rows = String::from("family,k,seed,accuracy,mse\n");
    for &family in families {
        for &k in &config.ks {
            for &seed in &config.seeds {
                let mut cfg = config.train.clone();
                cfg.seed = seed;
                let (map, model, _) =
                    train_family(family, &train_data, test_data.as_ref(), k, &cfg, &spec)?;
                let acc_data = test_data.as_ref().unwrap_or(&train_data);
                let acc = evaluate(&model, &map, acc_data)?.accuracy;
                let mse = map_mse(&map, &spec, &train_data, seed)?;
                rows.push_str(&format!("{},{k},{seed},{acc},{mse}\n", family.name()));
            }
        }
    }
    write_file(&config.out_dir.join("sweep.csv"), &rows)?;

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: "sweep".into(),
        family: families
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>()
            .join("+"),
        ks: config.ks.clone(),
        seeds: config.seeds.clone(),
        resolved_gamma: gamma,
        config: config.resolved.clone(),
        wall_secs: started.elapsed().as_secs_f64(),
    };
    write_file(
        &config.out_dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// `bench` subcommand: dense vs circulant projection timing.
pub fn cmd_bench(
    d_list: &[usize],
    k_mode: KMode,
    reps: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<Vec<BenchRecord>> {
    let records = bench_projection(d_list, k_mode, reps, seed)?;
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            bench_records_to_csv(&records, file).map_err(|e| Error::io(path, e))?;
        }
        None => {
            let mut buf = Vec::new();
            bench_records_to_csv(&records, &mut buf)
                .map_err(|e| Error::io("<stdout>", e))?;
            std::io::stdout()
                .write_all(&buf)
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(records)
}

/// `estimate-gamma` subcommand.
pub fn cmd_estimate_gamma(
    source: &DataSource,
    sample_n: usize,
    nn_rank: usize,
    seed: u64,
) -> Result<f64> {
    let ds = source.load()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    estimate_gamma(&ds, sample_n, nn_rank, &mut rng)
}

/// `eval` subcommand: score a saved map + model on a dataset.
pub fn cmd_eval(
    map_path: &Path,
    model_path: &Path,
    source: &DataSource,
) -> Result<crate::eval::EvalReport> {
    let (map, _) = load_map(map_path)?;
    let text =
        std::fs::read_to_string(model_path).map_err(|e| Error::io(model_path, e))?;
    let model: LinearModel = serde_json::from_str(&text)?;
    let ds = source.load()?;
    evaluate(&model, &map, &ds)
}
