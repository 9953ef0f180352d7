//! Elastic-net regularized maximum-likelihood training.
//!
//! The regularized log-likelihood
//!
//! ```text
//! Σ log p(tags | symbols) − c1·‖w‖₁ − c2·‖w‖₂²
//! ```
//!
//! is maximized with OWL-QN (orthant-wise limited-memory quasi-Newton), which
//! handles the non-differentiable L1 term by restricting each step to the
//! orthant chosen from the pseudo-gradient. All weights, transitions included,
//! are regularized.
//!
//! Positions with `mask = false` have no emission and are skipped by the
//! chain: the transition runs directly between the surrounding unmasked
//! positions.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;

use crate::labeling::Labeled;

use super::features::{FeatureTemplate, FeatureVocab};
use super::lattice::{self, Emissions, L};
use super::model::CrfModel;
use super::CrfError;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// L1 coefficient.
    pub c1: f64,
    /// L2 coefficient.
    pub c2: f64,
    pub max_iterations: usize,
    /// Stop when the relative objective improvement of an iteration falls below this.
    pub convergence_tol: f64,
    /// Number of correction pairs kept by the quasi-Newton update.
    pub memory: usize,
    /// Features seen fewer times than this in training are dropped.
    pub min_feature_count: usize,
    pub max_linesearch: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c1: 0.1,
            c2: 0.1,
            max_iterations: 100,
            convergence_tol: 1e-5,
            memory: 6,
            min_feature_count: 1,
            max_linesearch: 40,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CrfError> {
        let bad = |m: &str| Err(CrfError::Config(m.to_string()));
        if !(self.c1 >= 0.0 && self.c1.is_finite()) {
            return bad("c1 must be a finite value >= 0");
        }
        if !(self.c2 >= 0.0 && self.c2.is_finite()) {
            return bad("c2 must be a finite value >= 0");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be >= 1");
        }
        if self.memory == 0 {
            return bad("memory must be >= 1");
        }
        Ok(())
    }
}

/// Per-iteration training progress.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iteration: usize,
    /// Regularized log-likelihood (the maximized quantity).
    pub objective: f64,
    pub log_likelihood: f64,
    pub step: f64,
    pub nonzero: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    Converged,
    /// The pseudo-gradient vanished: the current point is optimal.
    Stationary,
    /// No step along the search direction improved the objective.
    LineSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    /// Objective before the first iteration.
    pub initial_objective: f64,
    pub iterations: Vec<IterationReport>,
    pub stop: StopReason,
}

/// A training sequence compiled to feature ids.
struct Instance {
    /// Feature ids of each unmasked position, in chain order.
    features: Vec<Vec<u32>>,
    gold: Vec<usize>,
}

/// The regularized objective over a fixed dataset.
pub struct Objective {
    instances: Vec<Instance>,
    num_state: usize,
    c1: f64,
    c2: f64,
}

// Fixed partition count so that the floating-point summation order does not
// depend on the number of threads.
const PARTITIONS: usize = 16;

impl Objective {
    /// Compiles `data` against the feature ids of `model`; unknown features are dropped.
    pub fn new<S: Labeled + Sync>(model: &CrfModel, data: &[S], c1: f64, c2: f64) -> Objective {
        let instances = data
            .par_iter()
            .map(|s| {
                let symbols = s.symbols();
                let mask = s.mask();
                let mut buf = String::new();
                let mut ids = Vec::new();
                let mut features = Vec::new();
                let mut gold = Vec::new();
                for i in (0..symbols.len()).filter(|&i| mask[i]) {
                    model.vocab.lookup(&model.template, symbols, i, &mut buf, &mut ids);
                    features.push(ids.clone());
                    gold.push(s.tags()[i].index());
                }
                Instance { features, gold }
            })
            .collect();
        Objective {
            instances,
            num_state: model.state.len(),
            c1,
            c2,
        }
    }

    pub fn dimension(&self) -> usize {
        self.num_state + L * L
    }

    /// Log-likelihood and its gradient, without regularization.
    pub fn log_likelihood(&self, w: &[f64]) -> Result<(f64, Vec<f64>), CrfError> {
        let dim = self.dimension();
        let n = self.instances.len();
        let chunk = n.div_ceil(PARTITIONS).max(1);
        let parts: Vec<Result<(f64, Vec<f64>), CrfError>> = (0..n.div_ceil(chunk))
            .into_par_iter()
            .map(|p| {
                let mut grad = vec![0.0; dim];
                let mut ll = 0.0;
                for k in p * chunk..((p + 1) * chunk).min(n) {
                    let v = self.accumulate(&self.instances[k], w, &mut grad);
                    if !v.is_finite() {
                        return Err(CrfError::Numeric { sentence: k });
                    }
                    ll += v;
                }
                Ok((ll, grad))
            })
            .collect();
        let mut ll = 0.0;
        let mut grad = vec![0.0; dim];
        for part in parts {
            let (l, g) = part?;
            ll += l;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
        Ok((ll, grad))
    }

    /// Adds the gradient of one instance into `grad`, returns its log-likelihood.
    fn accumulate(&self, inst: &Instance, w: &[f64], grad: &mut [f64]) -> f64 {
        let m = inst.gold.len();
        if m == 0 {
            return 0.0;
        }
        let t0 = self.num_state;
        let mut trans = [[0.0; L]; L];
        for a in 0..L {
            for b in 0..L {
                trans[a][b] = w[t0 + a * L + b];
            }
        }
        let em: Vec<Emissions> = inst
            .features
            .iter()
            .map(|ids| {
                let mut e = [0.0; L];
                for &f in ids {
                    let base = f as usize * L;
                    for y in 0..L {
                        e[y] += w[base + y];
                    }
                }
                e
            })
            .collect();
        let (alpha, log_z) = lattice::forward(&em, &trans);
        let beta = lattice::backward(&em, &trans);
        let gold_score = lattice::path_score(&em, &trans, &inst.gold);

        for t in 0..m {
            let y_gold = inst.gold[t];
            let mut marg = [0.0; L];
            for y in 0..L {
                marg[y] = (alpha[t][y] + beta[t][y] - log_z).exp();
            }
            for &f in &inst.features[t] {
                let base = f as usize * L;
                grad[base + y_gold] += 1.0;
                for y in 0..L {
                    grad[base + y] -= marg[y];
                }
            }
            if t > 0 {
                grad[t0 + inst.gold[t - 1] * L + y_gold] += 1.0;
                for a in 0..L {
                    for b in 0..L {
                        let p = (alpha[t - 1][a] + trans[a][b] + em[t][b] + beta[t][b] - log_z).exp();
                        grad[t0 + a * L + b] -= p;
                    }
                }
            }
        }
        gold_score - log_z
    }

    /// Log-likelihood minus the L2 penalty, with gradient: the smooth part.
    fn smooth(&self, w: &[f64]) -> Result<(f64, Vec<f64>), CrfError> {
        let (ll, mut g) = self.log_likelihood(w)?;
        let mut value = ll;
        if self.c2 > 0.0 {
            for (gi, wi) in g.iter_mut().zip(w) {
                value -= self.c2 * wi * wi;
                *gi -= 2.0 * self.c2 * wi;
            }
        }
        Ok((value, g))
    }

    /// Full regularized objective and its gradient, to be maximized.
    ///
    /// The L1 term contributes `−c1·sign(w)`, taken as 0 at `w = 0`.
    pub fn evaluate(&self, w: &[f64]) -> Result<(f64, Vec<f64>), CrfError> {
        let (mut value, mut g) = self.smooth(w)?;
        if self.c1 > 0.0 {
            for (gi, wi) in g.iter_mut().zip(w) {
                value -= self.c1 * wi.abs();
                if *wi != 0.0 {
                    *gi -= self.c1 * wi.signum();
                }
            }
        }
        Ok((value, g))
    }
}

/// Regularized objective and gradient of `model` on `batch`.
///
/// The gradient uses the parameter layout of [`CrfModel::parameters`].
pub fn log_likelihood_and_gradient<S: Labeled + Sync>(
    model: &CrfModel,
    batch: &[S],
    cfg: &TrainConfig,
) -> Result<(f64, Vec<f64>), CrfError> {
    Objective::new(model, batch, cfg.c1, cfg.c2).evaluate(&model.parameters())
}

/// Collects the features that fire in `data`, in first-seen order.
pub fn build_vocab<S: Labeled>(data: &[S], template: &FeatureTemplate, min_count: usize) -> FeatureVocab {
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut buf = String::new();
    for s in data {
        let symbols = s.symbols();
        for i in 0..symbols.len() {
            if !s.mask()[i] {
                continue;
            }
            template.visit(symbols, i, &mut buf, |f| match counts.get_mut(f) {
                Some(c) => *c += 1,
                None => {
                    counts.insert(f.to_string(), 1);
                    order.push(f.to_string());
                }
            });
        }
    }
    let mut vocab = FeatureVocab::default();
    for f in order {
        if counts[&f] >= min_count.max(1) {
            vocab.intern(&f);
        }
    }
    vocab
}

/// Trains with the default feature template.
pub fn train<S: Labeled + Sync>(dataset: &[S], cfg: &TrainConfig) -> Result<CrfModel, CrfError> {
    Trainer::new(cfg.clone()).train(dataset).map(|(m, _)| m)
}

type Observer<'a> = Box<dyn FnMut(&IterationReport, &CrfModel) + 'a>;

/// Training driver with an optional per-iteration observer.
pub struct Trainer<'a> {
    cfg: TrainConfig,
    template: FeatureTemplate,
    observer: Option<Observer<'a>>,
}

impl<'a> Trainer<'a> {
    pub fn new(cfg: TrainConfig) -> Self {
        Trainer {
            cfg,
            template: FeatureTemplate::default(),
            observer: None,
        }
    }

    pub fn template(mut self, template: FeatureTemplate) -> Self {
        self.template = template;
        self
    }

    /// Called after every accepted iteration with the current model.
    pub fn observer(mut self, f: impl FnMut(&IterationReport, &CrfModel) + 'a) -> Self {
        self.observer = Some(Box::new(f));
        self
    }

    pub fn train<S: Labeled + Sync>(mut self, dataset: &[S]) -> Result<(CrfModel, TrainingLog), CrfError> {
        self.cfg.validate()?;
        self.template.validate()?;
        if dataset.is_empty() {
            return Err(CrfError::EmptyDataset);
        }
        for (i, s) in dataset.iter().enumerate() {
            let n = s.symbols().len();
            if s.tags().len() != n || s.mask().len() != n {
                return Err(CrfError::BadSample { sentence: i });
            }
        }
        let vocab = build_vocab(dataset, &self.template, self.cfg.min_feature_count);
        let base = CrfModel::zeros(self.template.clone(), vocab);
        let objective = Objective::new(&base, dataset, self.cfg.c1, self.cfg.c2);
        let vocab = Arc::clone(&base.vocab);
        let template = self.template.clone();
        let make_model = |w: &[f64]| -> CrfModel {
            let mut m = CrfModel {
                template: template.clone(),
                vocab: Arc::clone(&vocab),
                state: w[..w.len() - L * L].to_vec(),
                transition: [[0.0; L]; L],
            };
            for k in 0..L * L {
                m.transition[k / L][k % L] = w[w.len() - L * L + k];
            }
            m
        };
        let mut observer = self.observer.take();
        let (w, log) = owlqn(&objective, vec![0.0; objective.dimension()], &self.cfg, |report, w| {
            if let Some(obs) = observer.as_mut() {
                obs(report, &make_model(w));
            }
        })?;
        Ok((make_model(&w), log))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l1(w: &[f64]) -> f64 {
    w.iter().map(|x| x.abs()).sum()
}

/// Pseudo-gradient of the minimized loss `f(w) + c1·‖w‖₁`, where `g` is the gradient of `f`.
fn pseudo_gradient(w: &[f64], g: &[f64], c1: f64) -> Vec<f64> {
    w.iter()
        .zip(g)
        .map(|(&wi, &gi)| {
            if c1 == 0.0 {
                gi
            } else if wi > 0.0 {
                gi + c1
            } else if wi < 0.0 {
                gi - c1
            } else if gi + c1 < 0.0 {
                gi + c1
            } else if gi - c1 > 0.0 {
                gi - c1
            } else {
                0.0
            }
        })
        .collect()
}

/// Minimizes `−objective` from `x0`. The observer sees each accepted iterate.
fn owlqn(
    objective: &Objective,
    x0: Vec<f64>,
    cfg: &TrainConfig,
    mut observe: impl FnMut(&IterationReport, &[f64]),
) -> Result<(Vec<f64>, TrainingLog), CrfError> {
    let c1 = cfg.c1;
    // the minimized smooth loss and its gradient
    let eval = |w: &[f64]| -> Result<(f64, Vec<f64>), CrfError> {
        let (value, mut g) = objective.smooth(w)?;
        for gi in g.iter_mut() {
            *gi = -*gi;
        }
        Ok((-value, g))
    };

    let mut x = x0;
    let (mut loss, mut grad) = eval(&x)?;
    let mut f = loss + c1 * l1(&x);
    let mut log = TrainingLog {
        initial_objective: -f,
        iterations: Vec::new(),
        stop: StopReason::MaxIterations,
    };
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();

    for iteration in 1..=cfg.max_iterations {
        let pg = pseudo_gradient(&x, &grad, c1);
        if pg.iter().all(|v| *v == 0.0) {
            log.stop = StopReason::Stationary;
            break;
        }

        // two-loop recursion on the pseudo-gradient
        let mut d: Vec<f64> = pg.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            for di in d.iter_mut() {
                *di *= gamma;
            }
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        // keep only components that descend along the pseudo-gradient
        for (di, pgi) in d.iter_mut().zip(&pg) {
            if *di * pgi >= 0.0 {
                *di = 0.0;
            }
        }
        if d.iter().all(|v| *v == 0.0) {
            log.stop = StopReason::Stationary;
            break;
        }

        let orthant: Vec<f64> = x
            .iter()
            .zip(&pg)
            .map(|(&xi, &pgi)| if xi != 0.0 { xi.signum() } else { -pgi.signum() })
            .collect();
        let mut step = if history.is_empty() {
            1.0 / dot(&d, &d).sqrt()
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..cfg.max_linesearch {
            let xn: Vec<f64> = x
                .iter()
                .zip(&d)
                .zip(&orthant)
                .map(|((&xi, &di), &oi)| {
                    let v = xi + step * di;
                    if v * oi <= 0.0 {
                        0.0
                    } else {
                        v
                    }
                })
                .collect();
            let (ln, gn) = eval(&xn)?;
            let fnew = ln + c1 * l1(&xn);
            if !fnew.is_finite() {
                return Err(CrfError::Diverged { iteration });
            }
            let decrease: f64 = pg.iter().zip(xn.iter().zip(&x)).map(|(p, (a, b))| p * (a - b)).sum();
            if fnew <= f + 1e-4 * decrease {
                accepted = Some((xn, ln, gn, fnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, ln, gn, fnew)) = accepted else {
            log.stop = StopReason::LineSearch;
            break;
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        debug_assert!(fnew <= f, "accepted step increased the loss");
        let improvement = (f - fnew) / f.abs().max(1e-12);
        x = xn;
        loss = ln;
        grad = gn;
        f = fnew;

        let report = IterationReport {
            iteration,
            objective: -f,
            log_likelihood: -(loss - objective.c2 * dot(&x, &x)),
            step,
            nonzero: x.iter().filter(|v| **v != 0.0).count(),
        };
        observe(&report, &x);
        log.iterations.push(report);

        if improvement < cfg.convergence_tol {
            log.stop = StopReason::Converged;
            break;
        }
    }
    Ok((x, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pseudo_gradient_cases() {
        let w = [1.0, -1.0, 0.0, 0.0, 0.0];
        let g = [0.5, 0.5, -2.0, 2.0, 0.5];
        assert_eq!(pseudo_gradient(&w, &g, 1.0), vec![1.5, -0.5, -1.0, 1.0, 0.0]);
        assert_eq!(pseudo_gradient(&w, &g, 0.0), g.to_vec());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig {
            c1: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            c2: f64::NAN,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            max_iterations: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
