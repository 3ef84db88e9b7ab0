//! Config-driven pipeline stages.
//!
//! Every stage reads its inputs from the output directory (or the
//! configured resources) and writes its artifacts there, so stages can be
//! re-run one at a time:
//!
//! | stage           | writes                                                   |
//! |-----------------|----------------------------------------------------------|
//! | `ingest`        | `corpus.jsonl`, `corpus_stats.csv`                       |
//! | `train`         | `model_{wd,cd}.json`, `loss_{wd,cd}.csv`                 |
//! | `eval-pairwise` | `pairwise_{wd,cd}.csv`, `histogram_{wd,cd}.csv`          |
//! | `cluster`       | `clusters_{wd,cd}.json`, `clusters_lemma_{wd,cd}.json`   |
//! | `score`         | `scores_{wd,cd}.csv`, `scores_lemma_{wd,cd}.csv`         |
//! | `run-all`       | all of the above plus `manifest.json`                    |

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::{
    cd_resolve, lemma_baseline, score_pairs, wd_resolve, Clustering, Histogram, ModelScorer, Thresholds,
};
use crate::corpus::{
    filter_to_gold, gold_chains, load_canonical_path, load_detected_spans, load_ecb_dir, split_corpus,
    write_canonical_path, Corpus, CorpusSplits, CorpusStats, Scope, SplitConfig,
};
use crate::error::{Error, Result};
use crate::featurize::{FeatureConfig, Featurizer};
use crate::lexicon::{load_embeddings, load_wordnet, EmbeddingStore, WordNetStore};
use crate::metrics::{intrinsic_eval, score_all, PairwiseRow, SingletonPolicy};
use crate::pairnet::{
    accuracy, generate_pairs, sample_balanced, train, Architecture, FeaturizedPairs, NegativeSampling, PairMode,
    PairModel, TrainConfig,
};
use crate::seed;

pub const SCOPES: [Scope; 2] = [Scope::Wd, Scope::Cd];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    /// A directory of ECB+ XML files or a canonical JSON-lines file.
    pub input: PathBuf,
    /// Optional TSV of detected mention spans; gold mentions outside it
    /// are dropped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detected_spans: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSection {
    pub embeddings: PathBuf,
    pub wordnet: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub wd_hidden: Vec<usize>,
    pub cd_hidden: Vec<usize>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            wd_hidden: Architecture::default_hidden(Scope::Wd),
            cd_hidden: Architecture::default_hidden(Scope::Cd),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub wd: TrainConfig,
    pub cd: TrainConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            wd: TrainConfig::for_scope(Scope::Wd),
            cd: TrainConfig::for_scope(Scope::Cd),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub histogram_bins: usize,
    pub wd_thresholds: Vec<f64>,
    pub cd_thresholds: Vec<f64>,
    pub singletons: SingletonPolicy,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            histogram_bins: 10,
            wd_thresholds: vec![0.5, 0.95],
            cd_thresholds: vec![0.5, 1.0],
            singletons: SingletonPolicy::Include,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads for featurization and scoring; 0 lets rayon decide.
    #[serde(default)]
    pub jobs: usize,
    pub corpus: CorpusSection,
    pub resources: ResourceSection,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub eval: EvalSection,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a config file; relative paths are taken relative to its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out);
        fix(&mut self.corpus.input);
        if let Some(p) = self.corpus.detected_spans.as_mut() {
            fix(p);
        }
        fix(&mut self.resources.embeddings);
        fix(&mut self.resources.wordnet);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        self.split.validate()?;
        self.thresholds.validate()?;
        self.train.wd.validate()?;
        self.train.cd.validate()?;
        Architecture::new(1, self.model.wd_hidden.clone())?;
        Architecture::new(1, self.model.cd_hidden.clone())?;
        if self.eval.histogram_bins == 0 {
            return Err(Error::Config("eval.histogram_bins must be at least 1".into()));
        }
        Ok(())
    }

    /// Hash of everything that influences results. The output directory and
    /// worker count are left out.
    pub fn hash(&self) -> String {
        let mut neutral = self.clone();
        neutral.out = PathBuf::new();
        neutral.jobs = 0;
        sha256_hex(neutral.to_toml().as_bytes())
    }

    fn hidden(&self, scope: Scope) -> Vec<usize> {
        match scope {
            Scope::Wd => self.model.wd_hidden.clone(),
            Scope::Cd => self.model.cd_hidden.clone(),
        }
    }

    fn train_config(&self, scope: Scope) -> TrainConfig {
        let base = match scope {
            Scope::Wd => &self.train.wd,
            Scope::Cd => &self.train.cd,
        };
        TrainConfig {
            seed: seed::sub_seed(self.seed, &format!("train-{scope}")),
            ..base.clone()
        }
    }

    fn eval_thresholds(&self, scope: Scope) -> &[f64] {
        match scope {
            Scope::Wd => &self.eval.wd_thresholds,
            Scope::Cd => &self.eval.cd_thresholds,
        }
    }

    /// Every named seed derived from the root seed.
    pub fn sub_seeds(&self) -> BTreeMap<String, u64> {
        SCOPES
            .iter()
            .flat_map(|s| [format!("train-{s}"), format!("sample-{s}"), format!("eval-sample-{s}")])
            .map(|name| {
                let v = seed::sub_seed(self.seed, &name);
                (name, v)
            })
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage {
            stage: name,
            source: Box::new(e),
        },
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub sub_seeds: BTreeMap<String, u64>,
    pub stages: Vec<String>,
    /// File name to SHA-256 of its contents.
    pub artifacts: BTreeMap<String, String>,
}

/// Summary of the ingest stage.
#[derive(Clone, Debug)]
pub struct IngestReport {
    pub stats: CorpusStats,
    pub dropped_markables: usize,
    pub unmatched_spans: usize,
}

pub struct Pipeline {
    config: PipelineConfig,
    resources: OnceLock<(EmbeddingStore, WordNetStore)>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Pipeline {
            config,
            resources: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.config.out.join(name)
    }

    /// Runs `f` on a rayon pool sized by `jobs`.
    pub fn in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }

    fn ensure_out(&self) -> Result<()> {
        fs::create_dir_all(&self.config.out).map_err(|e| Error::io(&self.config.out, e))
    }

    fn resources(&self) -> Result<&(EmbeddingStore, WordNetStore)> {
        if let Some(r) = self.resources.get() {
            return Ok(r);
        }
        let emb = load_embeddings(&self.config.resources.embeddings)?;
        if emb.dim() != self.config.features.embedding_dim {
            return Err(Error::Config(format!(
                "{} holds {}-dimensional vectors, features.embedding_dim is {}",
                self.config.resources.embeddings.display(),
                emb.dim(),
                self.config.features.embedding_dim
            )));
        }
        let wn = load_wordnet(&self.config.resources.wordnet)?;
        log::info!("loaded {} embeddings and {} synsets", emb.len(), wn.len());
        Ok(self.resources.get_or_init(|| (emb, wn)))
    }

    fn splits(&self) -> Result<CorpusSplits> {
        let corpus = load_canonical_path(&self.out_path("corpus.jsonl"))?;
        split_corpus(&corpus, &self.config.split)
    }

    fn featurizer<'a>(&'a self, corpus: &'a Corpus) -> Result<Featurizer<'a>> {
        let (emb, wn) = self.resources()?;
        Featurizer::new(corpus, emb, wn, self.config.features.clone())
    }

    fn model_path(&self, scope: Scope) -> PathBuf {
        self.out_path(&format!("model_{scope}.json"))
    }

    fn load_model(&self, scope: Scope, featurizer: &Featurizer) -> Result<PairModel> {
        let model = PairModel::load(&self.model_path(scope), Some(featurizer.input_dim(scope)))?;
        if model.scope != scope {
            return Err(Error::Scope(format!(
                "{} holds a {} model",
                self.model_path(scope).display(),
                model.scope
            )));
        }
        Ok(model)
    }

    pub fn ingest(&self) -> Result<IngestReport> {
        stage("ingest", self.ingest_inner())
    }

    fn ingest_inner(&self) -> Result<IngestReport> {
        self.ensure_out()?;
        let input = &self.config.corpus.input;
        let (mut corpus, dropped_markables) = if input.is_dir() {
            load_ecb_dir(input)?
        } else {
            (load_canonical_path(input)?, 0)
        };
        let mut unmatched_spans = 0;
        if let Some(path) = &self.config.corpus.detected_spans {
            let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
            let spans = load_detected_spans(std::io::BufReader::new(file))?;
            let (filtered, unknown) = filter_to_gold(&corpus, &spans)?;
            corpus = filtered;
            unmatched_spans = unknown;
        }
        write_canonical_path(&corpus, &self.out_path("corpus.jsonl"))?;
        let splits = split_corpus(&corpus, &self.config.split)?;
        write_file(&self.out_path("corpus_stats.csv"), &stats_csv(&splits, &corpus))?;
        Ok(IngestReport {
            stats: corpus.stats(),
            dropped_markables,
            unmatched_spans,
        })
    }

    pub fn train(&self, scopes: &[Scope]) -> Result<()> {
        stage("train", scopes.iter().try_for_each(|&s| self.train_scope(s)))
    }

    fn train_scope(&self, scope: Scope) -> Result<()> {
        let splits = self.splits()?;
        let featurizer = self.featurizer(&splits.train)?;
        let cfg = self.config.train_config(scope);
        let mut pairs = generate_pairs(&splits.train, scope, PairMode::Train);
        if cfg.negative_sampling == NegativeSampling::Balanced {
            pairs = sample_balanced(&pairs, seed::sub_seed(self.config.seed, &format!("sample-{scope}"))).0;
        }
        let positives = pairs.iter().filter(|p| p.coref).count();
        log::info!("{scope}: training on {} pairs ({positives} coreferent)", pairs.len());
        let data = FeaturizedPairs {
            featurizer: &featurizer,
            pairs: &pairs,
            scope,
        };
        let arch = Architecture::new(featurizer.input_dim(scope), self.config.hidden(scope))?;
        let outcome = train(scope, arch, &data, &cfg)?;
        log::info!("{scope}: training accuracy {:.4}", accuracy(&outcome.model, &data)?);
        outcome.model.save(&self.model_path(scope))?;
        let mut csv = String::from("epoch,loss\n");
        for (e, l) in outcome.loss_trace.iter().enumerate() {
            writeln!(csv, "{},{l}", e + 1).unwrap();
        }
        write_file(&self.out_path(&format!("loss_{scope}.csv")), &csv)
    }

    /// Pairwise evaluation on the test split. `threshold` replaces the
    /// configured threshold list when given.
    pub fn eval_pairwise(&self, scopes: &[Scope], threshold: Option<f64>) -> Result<()> {
        stage(
            "eval-pairwise",
            scopes.iter().try_for_each(|&s| self.eval_scope(s, threshold)),
        )
    }

    fn eval_scope(&self, scope: Scope, threshold: Option<f64>) -> Result<()> {
        let splits = self.splits()?;
        let featurizer = self.featurizer(&splits.test)?;
        let model = self.load_model(scope, &featurizer)?;
        let scorer = ModelScorer::new(&model, &featurizer, scope)?;
        let pairs = generate_pairs(&splits.test, scope, PairMode::Eval);
        let scores = score_pairs(&scorer, &pairs)?;
        let by_pair: HashMap<(&str, &str), f64> = pairs
            .iter()
            .zip(&scores)
            .map(|(p, &s)| ((p.m1.as_str(), p.m2.as_str()), s))
            .collect();
        let (balanced, _) = sample_balanced(
            &pairs,
            seed::sub_seed(self.config.seed, &format!("eval-sample-{scope}")),
        );
        let thresholds = match threshold {
            Some(t) => vec![t],
            None => self.config.eval_thresholds(scope).to_vec(),
        };

        let mut csv = format!("{}\n", PairwiseRow::CSV_HEADER);
        for (setting, set) in [("balanced", &balanced), ("actual", &pairs)] {
            for &t in &thresholds {
                let counts = intrinsic_eval(
                    set.iter().map(|p| (by_pair[&(p.m1.as_str(), p.m2.as_str())], p.coref)),
                    t,
                    self.config.thresholds.epsilon,
                );
                let row = PairwiseRow::from_counts(counts);
                writeln!(csv, "{}", row.csv_line(&format!("{scope}-{setting}"), t)).unwrap();
            }
        }
        write_file(&self.out_path(&format!("pairwise_{scope}.csv")), &csv)?;
        let hist = Histogram::from_scores(
            scores.iter().copied().zip(pairs.iter().map(|p| p.coref)),
            self.config.eval.histogram_bins,
        )?;
        write_file(&self.out_path(&format!("histogram_{scope}.csv")), &hist.to_csv())
    }

    /// Clusters the test split. `threshold` overrides the threshold of
    /// every requested scope.
    pub fn cluster(&self, scopes: &[Scope], threshold: Option<f64>) -> Result<()> {
        stage("cluster", self.cluster_inner(scopes, threshold))
    }

    fn cluster_inner(&self, scopes: &[Scope], threshold: Option<f64>) -> Result<()> {
        let splits = self.splits()?;
        let test = &splits.test;
        let mut thresholds = self.config.thresholds;
        if let Some(t) = threshold {
            if scopes.contains(&Scope::Wd) {
                thresholds.tau_wd = t;
            }
            if scopes.contains(&Scope::Cd) {
                thresholds.tau_cd = t;
            }
            thresholds.validate()?;
        }
        let featurizer = self.featurizer(test)?;
        let wd_model = self.load_model(Scope::Wd, &featurizer)?;
        let wd_scorer = ModelScorer::new(&wd_model, &featurizer, Scope::Wd)?;
        for &scope in scopes {
            let clusters = match scope {
                Scope::Wd => wd_resolve(test, &wd_scorer, &thresholds)?,
                Scope::Cd => {
                    let cd_model = self.load_model(Scope::Cd, &featurizer)?;
                    let cd_scorer = ModelScorer::new(&cd_model, &featurizer, Scope::Cd)?;
                    cd_resolve(test, &wd_scorer, &cd_scorer, &thresholds)?.1
                }
            };
            clusters.save(&self.out_path(&format!("clusters_{scope}.json")))?;
            lemma_baseline(test, scope).save(&self.out_path(&format!("clusters_lemma_{scope}.json")))?;
        }
        Ok(())
    }

    /// Scores every clustering file of the requested scopes against the
    /// gold chains of the test split.
    pub fn score(&self, scopes: &[Scope]) -> Result<Vec<(String, crate::metrics::CorefScores)>> {
        stage("score", self.score_inner(scopes))
    }

    fn score_inner(&self, scopes: &[Scope]) -> Result<Vec<(String, crate::metrics::CorefScores)>> {
        let splits = self.splits()?;
        let mut out = Vec::new();
        for &scope in scopes {
            let key = gold_chains(&splits.test, scope);
            for name in [scope.to_string(), format!("lemma_{scope}")] {
                let path = self.out_path(&format!("clusters_{name}.json"));
                if !path.exists() {
                    continue;
                }
                let response = Clustering::load(&path)?;
                let scores = score_all(&key, &response, self.config.eval.singletons)?;
                write_file(&self.out_path(&format!("scores_{name}.csv")), &scores.to_csv())?;
                out.push((name, scores));
            }
        }
        Ok(out)
    }

    pub fn run_all(&self) -> Result<Manifest> {
        self.ingest()?;
        self.train(&SCOPES)?;
        self.eval_pairwise(&SCOPES, None)?;
        self.cluster(&SCOPES, None)?;
        self.score(&SCOPES)?;
        let manifest = stage("manifest", self.manifest())?;
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        write_file(&self.out_path("manifest.json"), &text)?;
        Ok(manifest)
    }

    fn manifest(&self) -> Result<Manifest> {
        let mut artifacts = BTreeMap::new();
        let mut names: Vec<String> = fs::read_dir(&self.config.out)
            .map_err(|e| Error::io(&self.config.out, e))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n != "manifest.json")
            .collect();
        names.sort();
        for name in names {
            let path = self.out_path(&name);
            if path.is_file() {
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                artifacts.insert(name, sha256_hex(&bytes));
            }
        }
        Ok(Manifest {
            tool: "evcoref".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: self.config.hash(),
            seed: self.config.seed,
            sub_seeds: self.config.sub_seeds(),
            stages: ["ingest", "train", "eval-pairwise", "cluster", "score"]
                .into_iter()
                .map(String::from)
                .collect(),
            artifacts,
        })
    }
}

/// One row per split plus a total, mirroring the usual corpus table.
pub fn stats_csv(splits: &CorpusSplits, total: &Corpus) -> String {
    let mut csv = String::from(
        "split,documents,sentences,mentions,wd_chains,cd_chains,avg_wd_chain_length,avg_cd_chain_length\n",
    );
    for (name, c) in [
        ("train", &splits.train),
        ("dev", &splits.dev),
        ("test", &splits.test),
        ("total", total),
    ] {
        let s = c.stats();
        writeln!(
            csv,
            "{name},{},{},{},{},{},{:.2},{:.2}",
            s.documents, s.sentences, s.mentions, s.wd_chains, s.cd_chains, s.avg_wd_chain_length, s.avg_cd_chain_length
        )
        .unwrap();
    }
    csv
}

/// A config for the generated fixture written under `dir`, with training
/// settings that fit its size.
pub fn synthetic_config(dir: &Path, seed: u64) -> Result<PipelineConfig> {
    use crate::corpus::TopicSet;
    use crate::synthetic::{generate, write_fixture, SyntheticSpec};

    let fixture = generate(&SyntheticSpec {
        seed,
        ..Default::default()
    })?;
    let files = write_fixture(&fixture, &dir.join("data"))?;
    let train = |scope| TrainConfig {
        learning_rate: 0.1,
        epochs: 200,
        batch_size: 16,
        ..TrainConfig::for_scope(scope)
    };
    Ok(PipelineConfig {
        seed,
        out: dir.join("out"),
        jobs: 0,
        corpus: CorpusSection {
            input: files.corpus,
            detected_spans: None,
        },
        resources: ResourceSection {
            embeddings: files.embeddings,
            wordnet: files.wordnet,
        },
        features: fixture.feature_config,
        split: SplitConfig {
            train: TopicSet::range(1, 1),
            dev: TopicSet::default(),
            test: TopicSet::range(2, 2),
        },
        model: ModelSection {
            wd_hidden: vec![64],
            cd_hidden: vec![64, 32],
        },
        train: TrainSection {
            wd: train(Scope::Wd),
            cd: train(Scope::Cd),
        },
        thresholds: Thresholds::default(),
        eval: EvalSection::default(),
    })
}
