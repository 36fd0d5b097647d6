//! Optimization: Pegasos for the linear weights, SGD for the map
//! parameters, the alternating classification trainer, the kernel-MSE
//! trainer, and the circulant-generator trainer.
//!
//! All gradients here are true derivatives of the stated objectives and
//! are validated against central finite differences in the tests; updates
//! always step downhill.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{sample_batch, Dataset, PairSample};
use crate::error::{Error, Result};
use crate::fft::{circ_correlate, circ_multiply, FftPlan};
use crate::kernels::{approx_mse, kernel_eval, sample_pairs, KernelSpec};
use crate::maps::{
    init_random_circulant, init_random_dense, CirculantFourierMap, DenseFourierMap, FeatureMap,
};

/// Linear classifier over mapped features.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LinearModel {
    pub w: Vec<f64>,
    pub lambda: f64,
}

impl LinearModel {
    pub fn new(w: Vec<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        Ok(LinearModel { w, lambda })
    }

    pub fn zeros(k: usize, lambda: f64) -> Result<Self> {
        Self::new(vec![0.0; k], lambda)
    }

    pub fn score(&self, z: &[f64]) -> f64 {
        self.w.iter().zip(z).map(|(a, b)| a * b).sum()
    }

    fn norm(&self) -> f64 {
        self.w.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Knobs shared by all trainers. Defaults follow the usual protocol:
/// batches of 500, 100 SGD steps per parameter group per alternation.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    /// Outer alternations (T).
    pub outer_iters: usize,
    /// Pegasos steps per alternation (T1).
    pub w_steps: usize,
    /// Map-parameter SGD steps per alternation (T2).
    pub theta_steps: usize,
    /// Mini-batch size (M), clamped to N.
    pub batch_size: usize,
    pub lambda: f64,
    pub seed: u64,
    /// Optional Frobenius weight decay on the dense map parameters.
    pub theta_decay: f64,
    /// Base step scale for the map-parameter steps (eta_t = eta0 / (lambda t)).
    pub eta0: f64,
    /// Restart the 1/(lambda t) schedules at each outer alternation.
    pub reset_step_counter: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            outer_iters: 10,
            w_steps: 100,
            theta_steps: 100,
            batch_size: 500,
            lambda: 1e-2,
            seed: 0,
            theta_decay: 0.0,
            eta0: 1.0,
            reset_step_counter: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.w_steps == 0 || self.theta_steps == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "w_steps, theta_steps and batch_size must be >= 1".into(),
            ));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::Config(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.eta0 > 0.0) {
            return Err(Error::Config(format!("eta0 must be positive, got {}", self.eta0)));
        }
        if self.theta_decay < 0.0 {
            return Err(Error::Config("theta_decay must be nonnegative".into()));
        }
        Ok(())
    }

    fn effective_batch(&self, n: usize) -> usize {
        self.batch_size.min(n)
    }
}

/// One trace checkpoint per outer alternation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    pub train_acc: f64,
    pub test_acc: Option<f64>,
    pub mse: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainTrace {
    fn push(&mut self, rec: TraceRecord) {
        if let Some(last) = self.records.last() {
            assert!(rec.iter > last.iter, "trace iterations must increase");
        }
        self.records.push(rec);
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("iter,objective,train_acc,test_acc,mse\n");
        for r in &self.records {
            let test = r.test_acc.map_or(String::new(), |v| v.to_string());
            let mse = r.mse.map_or(String::new(), |v| v.to_string());
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.iter, r.objective, r.train_acc, test, mse
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_csv_string())
            .map_err(|e| Error::io(path.as_ref(), e))
    }
}

pub fn hinge_loss(y: f64, score: f64) -> f64 {
    (1.0 - y * score).max(0.0)
}

/// Regularized sampled objective: lambda/2 ||w||^2 + mean hinge over rows.
pub fn sampled_objective(
    model: &LinearModel,
    mapper: &dyn FeatureMap,
    ds: &Dataset,
    rows: &[usize],
) -> Result<f64> {
    let mut loss = 0.0;
    for &i in rows {
        let z = mapper.project(ds.row(i))?;
        loss += hinge_loss(ds.y(i), model.score(&z));
    }
    let reg = 0.5 * model.lambda * model.w.iter().map(|v| v * v).sum::<f64>();
    Ok(reg + loss / rows.len() as f64)
}

/// Gradient of the sampled objective in w:
/// lambda w - (1/|A|) sum over nonzero-loss samples of y Z(x).
pub fn grad_w(
    model: &LinearModel,
    mapper: &dyn FeatureMap,
    ds: &Dataset,
    batch: &[usize],
) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let mut g: Vec<f64> = model.w.iter().map(|v| model.lambda * v).collect();
    let inv = 1.0 / batch.len() as f64;
    for &i in batch {
        let z = mapper.project(ds.row(i))?;
        let y = ds.y(i);
        if hinge_loss(y, model.score(&z)) > 0.0 {
            for (gj, zj) in g.iter_mut().zip(&z) {
                *gj -= inv * y * zj;
            }
        }
    }
    Ok(g)
}

/// Pegasos: `steps` iterations of sampled gradient descent with step size
/// 1/(lambda t) followed by projection onto the radius-1/sqrt(lambda)
/// ball. The counter `t` is shared with the caller so it continues across
/// outer alternations.
pub fn pegasos_optimize_w<R: Rng>(
    model: &mut LinearModel,
    mapper: &dyn FeatureMap,
    ds: &Dataset,
    cfg: &TrainConfig,
    steps: usize,
    t: &mut u64,
    rng: &mut R,
) -> Result<()> {
    let radius = 1.0 / model.lambda.sqrt();
    if model.norm() > radius * (1.0 + 1e-12) {
        return Err(Error::invalid("||w|| must be <= 1/sqrt(lambda) at entry"));
    }
    let m = cfg.effective_batch(ds.len());
    for _ in 0..steps {
        *t += 1;
        let batch = sample_batch(ds, m, rng)?;
        let g = grad_w(model, mapper, ds, &batch)?;
        let eta = 1.0 / (model.lambda * *t as f64);
        for (wj, gj) in model.w.iter_mut().zip(&g) {
            *wj -= eta * gj;
        }
        let norm = model.norm();
        if norm > radius {
            let shrink = radius / norm;
            for wj in model.w.iter_mut() {
                *wj *= shrink;
            }
        }
    }
    Ok(())
}

/// Gradient of the sampled hinge objective in the dense map parameters.
/// Column i is (w_i * sqrt(2/k) / |A|) * sum over nonzero-loss samples of
/// y sin(theta_i . x + b_i) x, plus optional Frobenius decay.
/// Returned in the map's own layout (k rows of length d).
pub fn grad_theta(
    model: &LinearModel,
    map: &DenseFourierMap,
    ds: &Dataset,
    batch: &[usize],
    theta_decay: f64,
) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let d = map.input_dim();
    let k = map.output_dim();
    let s = map.scale();
    let inv = 1.0 / batch.len() as f64;
    let mut g = vec![0.0; k * d];
    for &row in batch {
        let x = ds.row(row);
        let y = ds.y(row);
        let z = map.project(x)?;
        if hinge_loss(y, model.score(&z)) <= 0.0 {
            continue;
        }
        for i in 0..k {
            let arg: f64 =
                map.frequency(i).iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + map.phase(i);
            let coeff = inv * s * model.w[i] * y * arg.sin();
            if coeff != 0.0 {
                for (gj, xj) in g[i * d..(i + 1) * d].iter_mut().zip(x) {
                    *gj += coeff * xj;
                }
            }
        }
    }
    if theta_decay > 0.0 {
        for (gj, tj) in g.iter_mut().zip(map.frequencies()) {
            *gj += theta_decay * tj;
        }
    }
    Ok(g)
}

/// SGD on the dense map parameters with step size eta0/(lambda t).
pub fn sgd_optimize_theta<R: Rng>(
    model: &LinearModel,
    map: &mut DenseFourierMap,
    ds: &Dataset,
    cfg: &TrainConfig,
    steps: usize,
    t: &mut u64,
    rng: &mut R,
) -> Result<()> {
    let m = cfg.effective_batch(ds.len());
    for _ in 0..steps {
        *t += 1;
        let batch = sample_batch(ds, m, rng)?;
        let g = grad_theta(model, map, ds, &batch, cfg.theta_decay)?;
        let eta = cfg.eta0 / (cfg.lambda * *t as f64);
        for (tj, gj) in map.frequencies_mut().iter_mut().zip(&g) {
            *tj -= eta * gj;
        }
    }
    Ok(())
}

fn checkpoint(
    model: &LinearModel,
    mapper: &dyn FeatureMap,
    ds: &Dataset,
    holdout: Option<&Dataset>,
    iter: usize,
    mse: Option<f64>,
) -> Result<TraceRecord> {
    let train = crate::eval::evaluate(model, mapper, ds)?;
    let reg = 0.5 * model.lambda * model.w.iter().map(|v| v * v).sum::<f64>();
    let test_acc = match holdout {
        Some(h) => Some(crate::eval::evaluate(model, mapper, h)?.accuracy),
        None => None,
    };
    Ok(TraceRecord {
        iter,
        objective: reg + train.mean_hinge,
        train_acc: train.accuracy,
        test_acc,
        mse,
    })
}

/// Alternating trainer: random-feature initialization, then T rounds of
/// (T1 Pegasos steps, T2 map-parameter steps). The map is bias-free.
pub fn train_cnm(
    ds: &Dataset,
    holdout: Option<&Dataset>,
    k: usize,
    cfg: &TrainConfig,
    spec: &KernelSpec,
) -> Result<(DenseFourierMap, LinearModel, TrainTrace)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut map = init_random_dense(spec, ds.dim(), k, false, &mut rng)?;
    let mut model = LinearModel::zeros(k, cfg.lambda)?;
    let mut trace = TrainTrace::default();
    let (mut tw, mut tt) = (0u64, 0u64);
    for iter in 1..=cfg.outer_iters {
        if cfg.reset_step_counter {
            tw = 0;
            tt = 0;
        }
        pegasos_optimize_w(&mut model, &map, ds, cfg, cfg.w_steps, &mut tw, &mut rng)?;
        sgd_optimize_theta(&model, &mut map, ds, cfg, cfg.theta_steps, &mut tt, &mut rng)?;
        trace.push(checkpoint(&model, &map, ds, holdout, iter, None)?);
    }
    Ok((map, model, trace))
}

/// Baseline: frozen random Fourier map (phases on by default), Pegasos on
/// w only, T*T1 steps total.
pub fn train_rffm(
    ds: &Dataset,
    holdout: Option<&Dataset>,
    k: usize,
    with_phases: bool,
    cfg: &TrainConfig,
    spec: &KernelSpec,
) -> Result<(DenseFourierMap, LinearModel, TrainTrace)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let map = init_random_dense(spec, ds.dim(), k, with_phases, &mut rng)?;
    let mut model = LinearModel::zeros(k, cfg.lambda)?;
    let mut trace = TrainTrace::default();
    let mut tw = 0u64;
    for iter in 1..=cfg.outer_iters {
        if cfg.reset_step_counter {
            tw = 0;
        }
        pegasos_optimize_w(&mut model, &map, ds, cfg, cfg.w_steps, &mut tw, &mut rng)?;
        trace.push(checkpoint(&model, &map, ds, holdout, iter, None)?);
    }
    Ok((map, model, trace))
}

/// Gradient of the batch kernel-approximation error
/// sum over pairs of (K(x, x') - Z(x).Z(x'))^2 in the dense map
/// parameters. Both symmetric terms of the derivative are kept.
pub fn grad_theta_mse(
    map: &DenseFourierMap,
    spec: &KernelSpec,
    ds: &Dataset,
    pairs: &[PairSample],
) -> Result<Vec<f64>> {
    if pairs.is_empty() {
        return Err(Error::invalid("empty pair batch"));
    }
    let d = map.input_dim();
    let k = map.output_dim();
    let s2 = map.scale() * map.scale();
    let mut g = vec![0.0; k * d];
    let mut args_x = vec![0.0; k];
    let mut args_y = vec![0.0; k];
    for p in pairs {
        let x = ds.row(p.i);
        let xp = ds.row(p.j);
        for i in 0..k {
            let f = map.frequency(i);
            args_x[i] = f.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + map.phase(i);
            args_y[i] = f.iter().zip(xp).map(|(a, b)| a * b).sum::<f64>() + map.phase(i);
        }
        let approx: f64 = (0..k).map(|i| s2 * args_x[i].cos() * args_y[i].cos()).sum();
        let residual = kernel_eval(spec, x, xp)? - approx;
        if residual == 0.0 {
            continue;
        }
        for i in 0..k {
            let (su, cu) = args_x[i].sin_cos();
            let (sv, cv) = args_y[i].sin_cos();
            let a = 2.0 * residual * s2 * su * cv;
            let b = 2.0 * residual * s2 * cu * sv;
            for j in 0..d {
                g[i * d + j] += a * x[j] + b * xp[j];
            }
        }
    }
    Ok(g)
}

/// Kernel-approximation trainer: SGD over sampled pair batches on the
/// mean squared error, from a random-feature initialization. The trace
/// records validation MSE on a frozen pair set.
pub fn train_kernel_approx(
    ds: &Dataset,
    k: usize,
    cfg: &TrainConfig,
    spec: &KernelSpec,
) -> Result<(DenseFourierMap, TrainTrace)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut map = init_random_dense(spec, ds.dim(), k, false, &mut rng)?;
    let val_pairs = sample_pairs(ds.len(), 2000, &mut rng);
    let mut trace = TrainTrace::default();
    trace.push(TraceRecord {
        iter: 0,
        objective: 0.0,
        train_acc: 0.0,
        test_acc: None,
        mse: Some(approx_mse(&map, spec, ds, Some(&val_pairs))?),
    });
    let mut t = 0u64;
    for iter in 1..=cfg.outer_iters {
        if cfg.reset_step_counter {
            t = 0;
        }
        for _ in 0..cfg.theta_steps {
            t += 1;
            let batch = sample_pairs(ds.len(), cfg.batch_size, &mut rng);
            let g = grad_theta_mse(&map, spec, ds, &batch)?;
            // mean gradient; harmonic decay keeps early steps from
            // overshooting the cosine saturation scale
            let eta = cfg.eta0 * (k as f64) / (8.0 * (10.0 + t as f64));
            let inv = 1.0 / batch.len() as f64;
            for (tj, gj) in map.frequencies_mut().iter_mut().zip(&g) {
                *tj -= eta * inv * gj;
            }
        }
        let mse = approx_mse(&map, spec, ds, Some(&val_pairs))?;
        trace.push(TraceRecord {
            iter,
            objective: mse,
            train_acc: 0.0,
            test_acc: None,
            mse: Some(mse),
        });
    }
    Ok((map, trace))
}

/// Gradient of the sampled hinge objective in one circulant generator
/// block, computed with FFT correlations in O(d log d).
///
/// `w_block` is the slice of w owned by this block, zero-padded to length
/// d for a truncated final block. `active` marks batch members with
/// nonzero loss under the full model; `xs`/`ys` hold the whole batch.
pub fn grad_r(
    r: &[f64],
    sign_flip: &[f64],
    w_block: &[f64],
    scale: f64,
    xs: &[&[f64]],
    ys: &[f64],
    active: &[bool],
    plan: &FftPlan,
) -> Result<Vec<f64>> {
    let d = plan.len();
    if r.len() != d || sign_flip.len() != d || w_block.len() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: r.len().min(sign_flip.len()).min(w_block.len()),
        });
    }
    if xs.is_empty() || xs.len() != ys.len() || xs.len() != active.len() {
        return Err(Error::invalid("batch arrays must be nonempty and of equal length"));
    }
    let inv = 1.0 / xs.len() as f64;
    let mut g = vec![0.0; d];
    for ((x, &y), &is_active) in xs.iter().zip(ys).zip(active) {
        if !is_active {
            continue;
        }
        let flipped: Vec<f64> = x.iter().zip(sign_flip).map(|(v, s)| v * s).collect();
        let conv = circ_multiply(r, &flipped, plan)?;
        let q: Vec<f64> = w_block.iter().zip(&conv).map(|(w, c)| w * c.sin()).collect();
        let corr = circ_correlate(&flipped, &q, plan)?;
        for (gj, cj) in g.iter_mut().zip(&corr) {
            *gj += inv * y * scale * cj;
        }
    }
    Ok(g)
}

/// Circulant alternating trainer: same skeleton as [`train_cnm`] with the
/// dense map step replaced by per-block generator updates.
pub fn train_circulant_cnm(
    ds: &Dataset,
    holdout: Option<&Dataset>,
    k: usize,
    cfg: &TrainConfig,
    spec: &KernelSpec,
) -> Result<(CirculantFourierMap, LinearModel, TrainTrace)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut map = init_random_circulant(spec, ds.dim(), k, &mut rng)?;
    let mut model = LinearModel::zeros(k, cfg.lambda)?;
    let mut trace = TrainTrace::default();
    let (mut tw, mut tt) = (0u64, 0u64);
    let d = ds.dim();
    let m = cfg.effective_batch(ds.len());
    for iter in 1..=cfg.outer_iters {
        if cfg.reset_step_counter {
            tw = 0;
            tt = 0;
        }
        pegasos_optimize_w(&mut model, &map, ds, cfg, cfg.w_steps, &mut tw, &mut rng)?;
        for _ in 0..cfg.theta_steps {
            tt += 1;
            let batch = sample_batch(ds, m, &mut rng)?;
            let xs: Vec<&[f64]> = batch.iter().map(|&i| ds.row(i)).collect();
            let ys: Vec<f64> = batch.iter().map(|&i| ds.y(i)).collect();
            let mut active = Vec::with_capacity(batch.len());
            for &i in &batch {
                let z = map.project(ds.row(i))?;
                active.push(hinge_loss(ds.y(i), model.score(&z)) > 0.0);
            }
            let eta = cfg.eta0 / (cfg.lambda * tt as f64);
            for b in 0..map.num_blocks() {
                let start = b * d;
                let end = ((b + 1) * d).min(k);
                let mut w_block = vec![0.0; d];
                w_block[..end - start].copy_from_slice(&model.w[start..end]);
                let g = grad_r(
                    map.block(b),
                    map.sign_flip(),
                    &w_block,
                    map.scale(),
                    &xs,
                    &ys,
                    &active,
                    map.plan(),
                )?;
                let r_new: Vec<f64> = map
                    .block(b)
                    .iter()
                    .zip(&g)
                    .map(|(rj, gj)| rj - eta * gj)
                    .collect();
                map.set_block(b, r_new)?;
            }
        }
        trace.push(checkpoint(&model, &map, ds, holdout, iter, None)?);
    }
    Ok((map, model, trace))
}

/// Baseline: frozen random circulant map, Pegasos on w only.
pub fn train_circulant_random(
    ds: &Dataset,
    holdout: Option<&Dataset>,
    k: usize,
    cfg: &TrainConfig,
    spec: &KernelSpec,
) -> Result<(CirculantFourierMap, LinearModel, TrainTrace)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let map = init_random_circulant(spec, ds.dim(), k, &mut rng)?;
    let mut model = LinearModel::zeros(k, cfg.lambda)?;
    let mut trace = TrainTrace::default();
    let mut tw = 0u64;
    for iter in 1..=cfg.outer_iters {
        if cfg.reset_step_counter {
            tw = 0;
        }
        pegasos_optimize_w(&mut model, &map, ds, cfg, cfg.w_steps, &mut tw, &mut rng)?;
        trace.push(checkpoint(&model, &map, ds, holdout, iter, None)?);
    }
    Ok((map, model, trace))
}
