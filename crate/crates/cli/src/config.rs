//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are an
//! error so typos never pass silently. List values are comma-separated.
//!
//! | key | default |
//! |-----|---------|
//! | `seed` | 42 |
//! | `data.path` | unset (synthetic data) |
//! | `data.synthetic.n` | 5000 |
//! | `data.synthetic.seed` | `seed` |
//! | `preprocess.clip_outliers` | false |
//! | `test_fraction` | 0.2 |
//! | `output.dir` | `out` |
//! | `learners` | `lr,dt,rf,gbdt` |
//! | `learner.lr.ridge_lambda` | 1e-6 |
//! | `learner.dt.max_depth`, `learner.dt.min_data_in_leaf` | 8, 20 |
//! | `learner.rf.n_trees`, `.max_depth`, `.min_data_in_leaf`, `.feature_fraction`, `.bootstrap` | 100, none, 5, 0.3333, true |
//! | `learner.gbdt.num_iterations`, `.learning_rate`, `.num_leaves`, `.min_data_in_leaf` | 100, 0.05, 8, 40 |
//! | `learner.gbdt.max_depth`, `.max_bin`, `.feature_fraction`, `.bagging_fraction`, `.bagging_freq`, `.lambda_l2`, `.min_gain_to_split` | booster defaults |
//! | `fusion.strategy` | `voting,blending,stacking` |
//! | `fusion.n_folds`, `fusion.holdout_fraction` | 5, 0.2 |
//! | `fusion.meta_learner` | `lr` (or `gbdt`, using the `learner.gbdt.*` settings) |
//!
//! `max_depth` keys accept `none` for unlimited depth.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use credit_core::baselearners::{CartParams, ForestParams, DEFAULT_RIDGE};
use credit_core::data::PreprocessConfig;
use credit_core::{BoosterParams, CreditError, FusionConfig, LearnerKind, LearnerParams, LearnerSpec, Result, Strategy};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic { n_rows: usize, seed: u64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub data: DataSource,
    pub preprocess: PreprocessConfig,
    /// Learners compared per subset.
    pub learners: Vec<LearnerSpec>,
    /// Learner behind every base model of the fusion comparison and the full-data row.
    pub fusion_learner: LearnerSpec,
    pub fusion: Vec<FusionConfig>,
    pub test_fraction: f64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::from_text("").expect("defaults are valid")
    }
}

fn default_cart() -> CartParams {
    CartParams {
        max_depth: Some(8),
        min_data_in_leaf: 20,
    }
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CreditError::Config(format!("line {}: expected `key = value`", i + 1)));
            };
            let key = k.trim().to_string();
            if map.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(CreditError::Config(format!("line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(Entries { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse()
                .map_err(|_| CreditError::Config(format!("line {line}: invalid value `{v}` for `{key}`"))),
        }
    }

    fn depth(&mut self, key: &str, default: Option<usize>) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(default),
            Some((_, v)) if v.eq_ignore_ascii_case("none") => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| CreditError::Config(format!("line {line}: invalid depth `{v}` for `{key}`"))),
        }
    }

    fn list<T: FromStr<Err = CreditError>>(&mut self, key: &str, default: &str) -> Result<Vec<T>> {
        let (line, v) = self.take(key).unwrap_or((0, default.to_string()));
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| CreditError::Config(format!("line {line}: {e}"))))
            .collect()
    }

    fn finish(self) -> Result<()> {
        match self.map.into_iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => Err(CreditError::Config(format!("line {line}: unknown key `{k}`"))),
        }
    }
}

/// Experiment defaults: slower and smaller trees than the booster defaults,
/// which suit the noisy seven-column subsets.
pub fn experiment_booster() -> BoosterParams {
    BoosterParams {
        learning_rate: 0.05,
        num_leaves: 8,
        min_data_in_leaf: 40,
        ..BoosterParams::default()
    }
}

fn booster(e: &mut Entries, seed: u64) -> Result<BoosterParams> {
    let d = experiment_booster();
    Ok(BoosterParams {
        num_iterations: e.get("learner.gbdt.num_iterations", d.num_iterations)?,
        learning_rate: e.get("learner.gbdt.learning_rate", d.learning_rate)?,
        num_leaves: e.get("learner.gbdt.num_leaves", d.num_leaves)?,
        max_depth: e.depth("learner.gbdt.max_depth", d.max_depth)?,
        min_data_in_leaf: e.get("learner.gbdt.min_data_in_leaf", d.min_data_in_leaf)?,
        max_bin: e.get("learner.gbdt.max_bin", d.max_bin)?,
        feature_fraction: e.get("learner.gbdt.feature_fraction", d.feature_fraction)?,
        bagging_fraction: e.get("learner.gbdt.bagging_fraction", d.bagging_fraction)?,
        bagging_freq: e.get("learner.gbdt.bagging_freq", d.bagging_freq)?,
        lambda_l2: e.get("learner.gbdt.lambda_l2", d.lambda_l2)?,
        min_gain_to_split: e.get("learner.gbdt.min_gain_to_split", d.min_gain_to_split)?,
        seed,
        ..d
    })
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut e = Entries::parse(text)?;
        let seed: u64 = e.get("seed", 42)?;

        let data = match e.take("data.path") {
            Some((_, p)) => DataSource::File(PathBuf::from(p)),
            None => DataSource::Synthetic {
                n_rows: e.get("data.synthetic.n", 5000)?,
                seed: e.get("data.synthetic.seed", seed)?,
            },
        };
        let preprocess = PreprocessConfig {
            clip_outliers: e.get("preprocess.clip_outliers", false)?,
        };
        let test_fraction: f64 = e.get("test_fraction", 0.2)?;
        let output_dir = PathBuf::from(e.get("output.dir", "out".to_string())?);

        let kinds: Vec<LearnerKind> = e.list("learners", "lr,dt,rf,gbdt")?;
        let ridge_lambda = e.get("learner.lr.ridge_lambda", DEFAULT_RIDGE)?;
        let dc = default_cart();
        let cart = CartParams {
            max_depth: e.depth("learner.dt.max_depth", dc.max_depth)?,
            min_data_in_leaf: e.get("learner.dt.min_data_in_leaf", dc.min_data_in_leaf)?,
        };
        let df = ForestParams::default();
        let forest = ForestParams {
            n_trees: e.get("learner.rf.n_trees", df.n_trees)?,
            max_depth: e.depth("learner.rf.max_depth", df.max_depth)?,
            min_data_in_leaf: e.get("learner.rf.min_data_in_leaf", df.min_data_in_leaf)?,
            feature_fraction: e.get("learner.rf.feature_fraction", df.feature_fraction)?,
            bootstrap: e.get("learner.rf.bootstrap", df.bootstrap)?,
        };
        let gbdt = booster(&mut e, seed)?;
        let params_for = |k: LearnerKind| match k {
            LearnerKind::LinearRegression => LearnerParams::LinearRegression { ridge_lambda },
            LearnerKind::DecisionTree => LearnerParams::DecisionTree(cart.clone()),
            LearnerKind::RandomForest => LearnerParams::RandomForest(forest.clone()),
            LearnerKind::Gbdt => LearnerParams::Gbdt(gbdt.clone()),
        };
        let learners = kinds
            .iter()
            .map(|&k| LearnerSpec::new(params_for(k), seed))
            .collect::<Result<Vec<_>>>()?;
        let fusion_learner = LearnerSpec::new(params_for(LearnerKind::Gbdt), seed)?;

        let strategies: Vec<Strategy> = e.list("fusion.strategy", "voting,blending,stacking")?;
        let n_folds = e.get("fusion.n_folds", 5)?;
        let holdout_fraction = e.get("fusion.holdout_fraction", 0.2)?;
        let meta_kind: LearnerKind = e.get("fusion.meta_learner", LearnerKind::LinearRegression)?;
        let meta_learner = match meta_kind {
            LearnerKind::LinearRegression | LearnerKind::Gbdt => LearnerSpec::new(params_for(meta_kind), seed)?,
            other => {
                return Err(CreditError::Config(format!("meta learner must be lr or gbdt, got {other}")));
            }
        };
        let fusion = strategies
            .into_iter()
            .map(|strategy| {
                let c = FusionConfig {
                    strategy,
                    n_folds,
                    holdout_fraction,
                    meta_learner: meta_learner.clone(),
                    seed,
                };
                c.validate().map(|()| c)
            })
            .collect::<Result<Vec<_>>>()?;
        e.finish()?;

        let config = ExperimentConfig {
            seed,
            data,
            preprocess,
            learners,
            fusion_learner,
            fusion,
            test_fraction,
            output_dir,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CreditError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.learners.is_empty() {
            return Err(CreditError::Config("at least one learner is required".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(CreditError::Config(format!("test_fraction must lie in (0, 1), got {}", self.test_fraction)));
        }
        if let DataSource::Synthetic { n_rows: 0, .. } = self.data {
            return Err(CreditError::Config("data.synthetic.n must be at least 1".into()));
        }
        Ok(())
    }

    /// The same experiment under another global seed. Synthetic data follows
    /// the new seed too.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.seed = seed;
        if let DataSource::Synthetic { seed: s, .. } = &mut c.data {
            *s = seed;
        }
        c.learners = c.learners.iter().map(|l| l.with_seed(seed)).collect();
        c.fusion_learner = c.fusion_learner.with_seed(seed);
        for f in &mut c.fusion {
            f.seed = seed;
            f.meta_learner = f.meta_learner.with_seed(seed);
        }
        c
    }
}
