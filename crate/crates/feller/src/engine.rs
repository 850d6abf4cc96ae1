//! Path generation by the symbol-frozen Euler scheme.
//!
//! Each step freezes the symbol at the current state, builds (or fetches from
//! a synchronized cache) the increment sampler for that frozen triplet, and
//! adds one Lévy increment. Ensembles give every path its own random stream,
//! so the terminal matrix is bit-identical under any thread count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::rng::RngStream;
use crate::sampler::{build_sampler_with, IncrementSampler, SamplerConfig, SamplerError};
use crate::symbol::{
    check_condition_a3, default_x_grid, JumpMeasureSpec, StateDependentSymbol, SymbolError,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("symbol fails the no-killing condition: |q(x,0)| = {value:.3e} at x = {x:?}")]
    A3Violated { x: Vec<f64>, value: f64 },
    #[error("invalid simulation parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },
    #[error("path {path} failed at step {step}: {message}")]
    PathFailed { path: u64, step: usize, message: String },
    #[error("{failed} of {total} paths failed; first: {first}")]
    EnsembleFailed { failed: usize, total: usize, first: String },
}

/// One sample path on the uniform grid `0, h, 2h, ..., Mh`.
#[derive(Debug, Clone)]
pub struct Path {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    h: f64,
    seed: u64,
    stream_id: u64,
}

impl Path {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn terminal(&self) -> &DVector<f64> {
        self.states.last().expect("paths are nonempty")
    }

    /// Successive state differences.
    pub fn increments(&self) -> Vec<DVector<f64>> {
        self.states.windows(2).map(|w| &w[1] - &w[0]).collect()
    }
}

/// Monte Carlo ensemble: terminal states, retained paths, and the inputs
/// needed to reproduce it exactly.
#[derive(Debug, Clone)]
pub struct Ensemble {
    terminal: DMatrix<f64>,
    paths: Vec<Path>,
    stream_ids: Vec<u64>,
    spec: SimulationSpec,
}

impl Ensemble {
    /// `n_paths x d` matrix of terminal states.
    pub fn terminal(&self) -> &DMatrix<f64> {
        &self.terminal
    }

    pub fn terminal_coord(&self, j: usize) -> Vec<f64> {
        self.terminal.column(j).iter().cloned().collect()
    }

    /// Fully recorded paths (all of them below the memory bound, else the
    /// first 100 stream ids).
    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn stream_ids(&self) -> &[u64] {
        &self.stream_ids
    }

    pub fn spec(&self) -> &SimulationSpec {
        &self.spec
    }
}

/// Reproducibility record attached to every ensemble.
#[derive(Debug, Clone)]
pub struct SimulationSpec {
    pub symbol_name: String,
    pub x0: Vec<f64>,
    pub h: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
}

/// Total recorded floats before ensembles switch to terminal-only retention.
const FULL_PATH_BUDGET: usize = 1_000_000;
/// Paths retained in full once over budget.
const RETAINED_PATHS: usize = 100;
/// Sampler cache entries kept before the cache is cleared.
const CACHE_CAP: usize = 8192;

type CacheKey = (Vec<u64>, u64);

/// Euler-scheme engine for one symbol. Stateless apart from the read-only
/// symbol and an internally synchronized sampler cache, so path simulations
/// are embarrassingly parallel.
pub struct EulerEngine {
    sym: StateDependentSymbol,
    sampler_cfg: SamplerConfig,
    /// state-quantization step for cache keys; `None` keys on the exact state
    quantum: Option<f64>,
    cache: Mutex<HashMap<CacheKey, Arc<IncrementSampler>>>,
}

impl EulerEngine {
    /// Builds an engine, enforcing the no-killing condition on a default
    /// state grid before any simulation is allowed.
    pub fn new(sym: StateDependentSymbol) -> Result<Self, EngineError> {
        let quantum = match sym.triplet(&DVector::zeros(sym.dim())) {
            Ok(t) if matches!(t.jumps(), JumpMeasureSpec::Generic(_)) => Some(1e-3),
            _ => None,
        };
        Self::with_config(sym, SamplerConfig::default(), quantum)
    }

    pub fn with_config(
        sym: StateDependentSymbol,
        sampler_cfg: SamplerConfig,
        quantum: Option<f64>,
    ) -> Result<Self, EngineError> {
        if !sym.has_triplet() {
            return Err(EngineError::Symbol(SymbolError::Unsupported(format!(
                "symbol '{}' has no triplet representation; it cannot be simulated",
                sym.name()
            ))));
        }
        let grid = default_x_grid(sym.dim(), -2.0, 2.0);
        let report = check_condition_a3(&sym, &grid)?;
        if !report.passed {
            let w = report.witness.expect("failing report carries a witness");
            return Err(EngineError::A3Violated { x: w.x.as_slice().to_vec(), value: w.value });
        }
        Ok(EulerEngine { sym, sampler_cfg, quantum, cache: Mutex::new(HashMap::new()) })
    }

    pub fn symbol(&self) -> &StateDependentSymbol {
        &self.sym
    }

    fn sampler_for(&self, x: &DVector<f64>, h: f64) -> Result<Arc<IncrementSampler>, EngineError> {
        let frozen_x = match self.quantum {
            Some(q) => x.map(|v| (v / q).round() * q),
            None => x.clone(),
        };
        let key: CacheKey = (
            frozen_x.iter().map(|v| v.to_bits()).collect(),
            h.to_bits(),
        );
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let triplet = self.sym.triplet(&frozen_x)?;
        let sampler = Arc::new(build_sampler_with(&triplet, h, &self.sampler_cfg)?);
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_CAP {
            cache.clear();
        }
        cache.insert(key, sampler.clone());
        Ok(sampler)
    }

    /// One Euler step from state `x` over `h`: freeze the symbol at `x` and
    /// add a Lévy increment with exponent `q(x, ·)`.
    pub fn step(
        &self,
        x: &DVector<f64>,
        h: f64,
        rng: &mut RngStream,
    ) -> Result<DVector<f64>, EngineError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(EngineError::InvalidParameter(format!(
                "step size must be positive, got {h}"
            )));
        }
        let sampler = self.sampler_for(x, h)?;
        let next = x + sampler.sample_increment(h, rng);
        if !next.iter().all(|v| v.is_finite()) {
            return Err(EngineError::NonFinite { step: 0 });
        }
        Ok(next)
    }

    /// Simulates a full path from `x0` with `n_steps` uniform steps of size
    /// `h`, aborting with the step index on the first failure.
    pub fn simulate_path(
        &self,
        x0: &DVector<f64>,
        h: f64,
        n_steps: usize,
        seed: u64,
        stream_id: u64,
    ) -> Result<Path, EngineError> {
        if n_steps < 1 {
            return Err(EngineError::InvalidParameter("n_steps must be at least 1".into()));
        }
        if x0.len() != self.sym.dim() {
            return Err(EngineError::Symbol(SymbolError::DimensionMismatch {
                expected: self.sym.dim(),
                got: x0.len(),
            }));
        }
        let mut rng = RngStream::new(seed, stream_id);
        let mut states = Vec::with_capacity(n_steps + 1);
        let mut times = Vec::with_capacity(n_steps + 1);
        states.push(x0.clone());
        times.push(0.0);
        let mut x = x0.clone();
        for m in 1..=n_steps {
            x = self.step(&x, h, &mut rng).map_err(|e| match e {
                EngineError::NonFinite { .. } => EngineError::NonFinite { step: m },
                other => other,
            })?;
            states.push(x.clone());
            times.push(m as f64 * h);
        }
        Ok(Path { times, states, h, seed, stream_id })
    }

    /// Simulates `n_paths` independent paths on distinct streams, in parallel.
    /// The terminal matrix depends only on `(seed, inputs)`, never on the
    /// parallel schedule.
    pub fn simulate_ensemble(
        &self,
        x0: &DVector<f64>,
        h: f64,
        n_steps: usize,
        n_paths: usize,
        seed: u64,
    ) -> Result<Ensemble, EngineError> {
        if n_paths < 1 {
            return Err(EngineError::InvalidParameter("n_paths must be at least 1".into()));
        }
        let dim = self.sym.dim();
        let keep_all = (n_steps + 1) * dim * n_paths <= FULL_PATH_BUDGET;
        let retained = if keep_all { n_paths } else { RETAINED_PATHS.min(n_paths) };

        let results: Vec<Result<(DVector<f64>, Option<Path>), EngineError>> = (0..n_paths)
            .into_par_iter()
            .map(|i| {
                let path = self
                    .simulate_path(x0, h, n_steps, seed, i as u64)
                    .map_err(|e| EngineError::PathFailed {
                        path: i as u64,
                        step: match &e {
                            EngineError::NonFinite { step } => *step,
                            _ => 0,
                        },
                        message: e.to_string(),
                    })?;
                let terminal = path.terminal().clone();
                Ok((terminal, (i < retained).then_some(path)))
            })
            .collect();

        let total = results.len();
        let failures: Vec<String> =
            results.iter().filter_map(|r| r.as_ref().err().map(|e| e.to_string())).collect();
        if !failures.is_empty() {
            return Err(EngineError::EnsembleFailed {
                failed: failures.len(),
                total,
                first: failures[0].clone(),
            });
        }

        let mut terminal = DMatrix::zeros(n_paths, dim);
        let mut paths = Vec::with_capacity(retained);
        for (i, r) in results.into_iter().enumerate() {
            let (t, p) = r.expect("failures handled above");
            terminal.row_mut(i).copy_from(&t.transpose());
            if let Some(p) = p {
                paths.push(p);
            }
        }
        Ok(Ensemble {
            terminal,
            paths,
            stream_ids: (0..n_paths as u64).collect(),
            spec: SimulationSpec {
                symbol_name: self.sym.name().to_string(),
                x0: x0.as_slice().to_vec(),
                h,
                n_steps,
                n_paths,
                seed,
            },
        })
    }
}
