//! Mention-pair feature vectors.
//!
//! Layout for a pair `(m1, m2)`:
//!
//! ```text
//! [ctx(m1) | ctx(m2) | dist (WD only) | cos | wn_sense | wn_hyper | wn_deriv]
//! ctx = [head | left_w .. left_1 | right_1 .. right_w | pos one-hot]
//! ```
//!
//! Every embedding slot is `D` wide; `dist` is a one-hot over
//! `max_sentence_distance + 1` slots; each similarity is a one-hot over
//! `buckets` slots whose last slot means "unknown".

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Mention, Scope, Sentence, Token};
use crate::error::{Error, Result};
use crate::lexicon::{cosine_similarity, EmbeddingStore, Similarity, WordNetStore};

pub const UNK_TAG: &str = "UNK";

/// The 45 Penn Treebank tags.
pub const PENN_TAGS: [&str; 45] = [
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP", "NNPS",
    "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG",
    "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB", "#", "$", "''", "``", "(", ")", ",", ".", ":",
];

fn default_tagset() -> Vec<String> {
    PENN_TAGS
        .iter()
        .copied()
        .chain(std::iter::once(UNK_TAG))
        .map(String::from)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub embedding_dim: usize,
    /// Context words taken on each side of the head.
    pub window: usize,
    pub pos_tagset: Vec<String>,
    /// Similarity buckets, including the unknown bucket.
    pub buckets: usize,
    pub max_sentence_distance: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            embedding_dim: 400,
            window: 2,
            pos_tagset: default_tagset(),
            buckets: 11,
            max_sentence_distance: 10,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 {
            return Err(Error::Config("embedding_dim must be positive".into()));
        }
        if self.buckets < 2 {
            return Err(Error::Config("buckets must be at least 2".into()));
        }
        let unk = self.pos_tagset.iter().filter(|t| *t == UNK_TAG).count();
        if unk != 1 {
            return Err(Error::Config(format!(
                "pos_tagset must contain {UNK_TAG} exactly once, found {unk}"
            )));
        }
        Ok(())
    }

    pub fn context_len(&self) -> usize {
        (1 + 2 * self.window) * self.embedding_dim + self.pos_tagset.len()
    }

    pub fn relational_len(&self, scope: Scope) -> usize {
        let dist = match scope {
            Scope::Wd => self.max_sentence_distance + 1,
            Scope::Cd => 0,
        };
        dist + 4 * self.buckets
    }

    pub fn input_dim(&self, scope: Scope) -> usize {
        2 * self.context_len() + self.relational_len(scope)
    }

    fn tag_index(&self, tag: &str) -> usize {
        self.pos_tagset
            .iter()
            .position(|t| t == tag)
            .or_else(|| self.pos_tagset.iter().position(|t| t == UNK_TAG))
            .expect("validated tagset contains UNK")
    }

    /// Named segments of the pair vector in order; `one_hot` marks the
    /// segments that must contain exactly one 1.
    pub fn layout(&self, scope: Scope) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut at = 0;
        let mut push = |name: &'static str, len: usize, one_hot: bool| {
            out.push(Segment {
                name,
                start: at,
                len,
                one_hot,
            });
            at += len;
        };
        for _ in 0..2 {
            push("embeddings", (1 + 2 * self.window) * self.embedding_dim, false);
            push("pos", self.pos_tagset.len(), true);
        }
        if scope == Scope::Wd {
            push("distance", self.max_sentence_distance + 1, true);
        }
        for name in ["cosine", "wn_sense", "wn_hypernym", "wn_derivation"] {
            push(name, self.buckets, true);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub name: &'static str,
    pub start: usize,
    pub len: usize,
    pub one_hot: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairFeatureVector {
    pub scope: Scope,
    pub values: Vec<f64>,
}

fn is_verbal(pos: &str) -> bool {
    pos.starts_with("VB")
}

/// Head token of an inclusive span: the only token of a one-token span,
/// otherwise the first verbal token, otherwise the last token.
pub fn head_word_index(tokens: &[Token], span: (usize, usize)) -> usize {
    let (start, end) = span;
    if start == end {
        return start;
    }
    (start..=end)
        .find(|&i| is_verbal(&tokens[i].pos))
        .unwrap_or(end)
}

pub fn head_word<'a>(mention: &Mention, sentence: &'a Sentence) -> &'a Token {
    &sentence.tokens[head_word_index(&sentence.tokens, mention.span)]
}

/// Bucket of a similarity: `min(floor(v * (b - 1)), b - 2)` for known
/// values, `b - 1` for unknown.
pub fn bucket_index(sim: Similarity, buckets: usize) -> Result<usize> {
    if buckets < 2 {
        return Err(Error::Config("buckets must be at least 2".into()));
    }
    match sim {
        Similarity::Unknown => Ok(buckets - 1),
        Similarity::Known(v) if (0.0..=1.0).contains(&v) => {
            Ok(((v * (buckets - 1) as f64).floor() as usize).min(buckets - 2))
        }
        Similarity::Known(v) => Err(Error::SimilarityRange(v)),
    }
}

pub fn quantize(sim: Similarity, buckets: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; buckets];
    out[bucket_index(sim, buckets)?] = 1.0;
    Ok(out)
}

fn push_embedding(out: &mut Vec<f64>, v: Option<&[f32]>, dim: usize) {
    match v {
        Some(v) => out.extend(v.iter().map(|&x| x as f64)),
        None => out.extend(std::iter::repeat_n(0.0, dim)),
    }
}

/// Head embedding, `window` in-vocabulary neighbours per side scanning
/// outward from the head, then the head's POS one-hot.
pub fn contextual_features(
    doc: &Document,
    mention: &Mention,
    embeddings: &EmbeddingStore,
    config: &FeatureConfig,
) -> Vec<f64> {
    let tokens = &doc.sentences[mention.sentence_index].tokens;
    let head = mention.head_index;
    let dim = config.embedding_dim;
    let mut out = Vec::with_capacity(config.context_len());

    push_embedding(&mut out, embeddings.lookup(&tokens[head].text), dim);

    let left: Vec<&[f32]> = tokens[..head]
        .iter()
        .rev()
        .filter_map(|t| embeddings.lookup(&t.text))
        .take(config.window)
        .collect();
    for slot in (0..config.window).rev() {
        push_embedding(&mut out, left.get(slot).copied(), dim);
    }
    let right: Vec<&[f32]> = tokens[head + 1..]
        .iter()
        .filter_map(|t| embeddings.lookup(&t.text))
        .take(config.window)
        .collect();
    for slot in 0..config.window {
        push_embedding(&mut out, right.get(slot).copied(), dim);
    }

    let mut pos = vec![0.0; config.pos_tagset.len()];
    pos[config.tag_index(&tokens[head].pos)] = 1.0;
    out.extend(pos);
    out
}

/// The three WordNet similarities of two head lemmas.
pub fn wordnet_similarities(wordnet: &WordNetStore, lemma1: &str, lemma2: &str) -> [Similarity; 3] {
    [
        wordnet.max_sense_path_similarity(lemma1, lemma2),
        wordnet.hypernym_path_similarity(lemma1, lemma2),
        wordnet.derivational_verb_path_similarity(lemma1, lemma2),
    ]
}

fn push_relational(
    out: &mut Vec<f64>,
    (d1, m1): (&Document, &Mention),
    (d2, m2): (&Document, &Mention),
    embeddings: &EmbeddingStore,
    wn_sims: [Similarity; 3],
    scope: Scope,
    config: &FeatureConfig,
) -> Result<()> {
    if scope == Scope::Wd {
        if d1.doc_id != d2.doc_id {
            return Err(Error::Scope(format!(
                "WD pair {} / {} spans documents",
                m1.id, m2.id
            )));
        }
        let dist = m1
            .sentence_index
            .abs_diff(m2.sentence_index)
            .min(config.max_sentence_distance);
        let mut onehot = vec![0.0; config.max_sentence_distance + 1];
        onehot[dist] = 1.0;
        out.extend(onehot);
    }
    let h1 = m1.head(d1);
    let h2 = m2.head(d2);
    let cos = cosine_similarity(embeddings.lookup(&h1.text), embeddings.lookup(&h2.text))?;
    out.extend(quantize(cos, config.buckets)?);
    for sim in wn_sims {
        out.extend(quantize(sim, config.buckets)?);
    }
    Ok(())
}

/// Sentence distance (WD only), cosine of head embeddings and the three
/// WordNet similarities of head lemmas, each one-hot encoded.
pub fn relational_features(
    first: (&Document, &Mention),
    second: (&Document, &Mention),
    embeddings: &EmbeddingStore,
    wordnet: &WordNetStore,
    scope: Scope,
    config: &FeatureConfig,
) -> Result<Vec<f64>> {
    let sims = wordnet_similarities(
        wordnet,
        &first.1.head(first.0).lemma,
        &second.1.head(second.0).lemma,
    );
    let mut out = Vec::with_capacity(config.relational_len(scope));
    push_relational(&mut out, first, second, embeddings, sims, scope, config)?;
    Ok(out)
}

/// Featurizes mention pairs of one corpus. Contextual blocks are computed
/// once per mention; WordNet similarities are memoised per lemma pair.
pub struct Featurizer<'a> {
    corpus: &'a Corpus,
    embeddings: &'a EmbeddingStore,
    wordnet: &'a WordNetStore,
    config: FeatureConfig,
    contexts: HashMap<&'a str, Vec<f64>>,
    wn_cache: Mutex<HashMap<(String, String), [Similarity; 3]>>,
}

impl<'a> Featurizer<'a> {
    pub fn new(
        corpus: &'a Corpus,
        embeddings: &'a EmbeddingStore,
        wordnet: &'a WordNetStore,
        config: FeatureConfig,
    ) -> Result<Self> {
        config.validate()?;
        if embeddings.dim() != config.embedding_dim {
            return Err(Error::Dimension {
                expected: config.embedding_dim,
                found: embeddings.dim(),
            });
        }
        let contexts = corpus
            .mentions()
            .map(|(d, m)| (m.id.as_str(), contextual_features(d, m, embeddings, &config)))
            .collect();
        Ok(Featurizer {
            corpus,
            embeddings,
            wordnet,
            config,
            contexts,
            wn_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn input_dim(&self, scope: Scope) -> usize {
        self.config.input_dim(scope)
    }

    fn wn_sims(&self, l1: &str, l2: &str) -> [Similarity; 3] {
        let key = if l1 <= l2 {
            (l1.to_string(), l2.to_string())
        } else {
            (l2.to_string(), l1.to_string())
        };
        if let Some(hit) = self.wn_cache.lock().unwrap().get(&key) {
            return *hit;
        }
        let sims = wordnet_similarities(self.wordnet, &key.0, &key.1);
        self.wn_cache.lock().unwrap().insert(key, sims);
        sims
    }

    fn resolve(&self, id: &str) -> Result<(&'a Document, &'a Mention)> {
        self.corpus
            .mention(id)
            .ok_or_else(|| Error::UnknownMention(id.to_string()))
    }

    /// Appends the pair vector for `(m1, m2)` to `out`.
    pub fn extend_pair(&self, m1: &str, m2: &str, scope: Scope, out: &mut Vec<f64>) -> Result<()> {
        let first = self.resolve(m1)?;
        let second = self.resolve(m2)?;
        out.extend_from_slice(&self.contexts[m1]);
        out.extend_from_slice(&self.contexts[m2]);
        let sims = self.wn_sims(&first.1.head(first.0).lemma, &second.1.head(second.0).lemma);
        push_relational(out, first, second, self.embeddings, sims, scope, &self.config)
    }

    pub fn pair_features(&self, m1: &str, m2: &str, scope: Scope) -> Result<PairFeatureVector> {
        let mut values = Vec::with_capacity(self.input_dim(scope));
        self.extend_pair(m1, m2, scope, &mut values)?;
        Ok(PairFeatureVector { scope, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{SubTopic, Token};
    use proptest::prelude::*;

    fn token(index: usize, text: &str, pos: &str) -> Token {
        Token {
            index,
            text: text.into(),
            lemma: text.to_lowercase(),
            pos: pos.into(),
        }
    }

    fn small_config() -> FeatureConfig {
        FeatureConfig {
            embedding_dim: 4,
            window: 2,
            pos_tagset: vec!["NN".into(), "VBD".into(), UNK_TAG.into()],
            buckets: 11,
            max_sentence_distance: 10,
        }
    }

    fn embeddings() -> EmbeddingStore {
        let text = "6 4\nattack 1 0 0 0\nraid 0.9 0.1 0 0\ntroops 0 1 0 0\nlaunched 0 0 1 0\nat 0 0 0 1\ndawn 1 1 0 0\n";
        EmbeddingStore::from_reader(text.as_bytes()).unwrap()
    }

    fn wordnet() -> WordNetStore {
        let tsv = "#SYNSETS\nn.attack\tn\tattack,raid\nn.act\tn\tact\n#HYPERNYMS\nn.attack\tn.act\n";
        WordNetStore::from_reader(tsv.as_bytes()).unwrap()
    }

    fn corpus() -> Corpus {
        let sent = |index: usize, words: &[(&str, &str)]| Sentence {
            index,
            tokens: words.iter().enumerate().map(|(i, (w, p))| token(i, w, p)).collect(),
        };
        let m = |id: &str, s: usize, at: usize| Mention {
            id: id.into(),
            doc_id: "d".into(),
            sentence_index: s,
            span: (at, at),
            head_index: at,
            wd_chain: None,
            cd_chain: None,
        };
        Corpus::new(vec![Document {
            doc_id: "d".into(),
            topic: 1,
            sub_topic: SubTopic::Ecb,
            sentences: vec![
                sent(0, &[("attack", "NN"), ("troops", "NN"), ("xyzzy", "NN"), ("launched", "VBD"), ("at", "IN"), ("dawn", "NN")]),
                sent(1, &[("the", "DT"), ("raid", "NN"), ("failed", "VBD")]),
                sent(2, &[("a", "DT"), ("qqq", "NN")]),
            ],
            mentions: vec![m("first", 0, 0), m("launch", 0, 3), m("raid", 1, 1), m("oov", 2, 1)],
        }])
        .unwrap()
    }

    #[test]
    fn head_word_heuristic() {
        let checked = [token(0, "checked", "VBD"), token(1, "into", "IN")];
        assert_eq!(head_word_index(&checked, (0, 1)), 0);
        let reserve = [token(0, "injured", "JJ"), token(1, "reserve", "NN")];
        assert_eq!(head_word_index(&reserve, (0, 1)), 1);
        assert_eq!(head_word_index(&reserve, (0, 0)), 0);
        let s = Sentence { index: 0, tokens: checked.to_vec() };
        let m = Mention {
            id: "x".into(),
            doc_id: "d".into(),
            sentence_index: 0,
            span: (0, 1),
            head_index: 0,
            wd_chain: None,
            cd_chain: None,
        };
        assert_eq!(head_word(&m, &s).text, "checked");
    }

    #[test]
    fn quantize_bins() {
        let idx = |v| bucket_index(Similarity::Known(v), 11).unwrap();
        assert_eq!(idx(0.0), 0);
        assert_eq!(idx(1.0), 9);
        assert_eq!(idx(0.95), 9);
        assert_eq!(idx(0.5), 5);
        assert_eq!(bucket_index(Similarity::Unknown, 11).unwrap(), 10);
        assert!(bucket_index(Similarity::Known(1.5), 11).is_err());
        assert!(bucket_index(Similarity::Known(-0.1), 11).is_err());
        assert_eq!(quantize(Similarity::Known(0.0), 2).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn context_outward_scan() {
        let corpus = corpus();
        let emb = embeddings();
        let cfg = small_config();
        let (doc, launch) = corpus.mention("launch").unwrap();
        let ctx = contextual_features(doc, launch, &emb, &cfg);
        assert_eq!(ctx.len(), 5 * 4 + 3);
        let block = |i: usize| &ctx[i * 4..(i + 1) * 4];
        assert_eq!(block(0), &[0.0, 0.0, 1.0, 0.0]); // launched
        // Left neighbour "xyzzy" is OOV, so left1 is "troops", left2 "attack".
        assert_eq!(block(1), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(block(2), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(block(3), &[0.0, 0.0, 0.0, 1.0]); // at
        assert_eq!(block(4), &[1.0, 1.0, 0.0, 0.0]); // dawn
        assert_eq!(&ctx[20..], &[0.0, 1.0, 0.0]);

        let (doc, first) = corpus.mention("first").unwrap();
        let ctx = contextual_features(doc, first, &emb, &cfg);
        assert!(ctx[4..12].iter().all(|&x| x == 0.0), "left slots zero at sentence start");
        assert!(ctx[12..20].iter().any(|&x| x != 0.0));

        let (doc, oov) = corpus.mention("oov").unwrap();
        let ctx = contextual_features(doc, oov, &emb, &cfg);
        assert!(ctx[..20].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn relational_blocks() {
        let corpus = corpus();
        let (emb, wn, cfg) = (embeddings(), wordnet(), small_config());
        let f = Featurizer::new(&corpus, &emb, &wn, cfg.clone()).unwrap();
        let layout = cfg.layout(Scope::Wd);
        let seg = |v: &[f64], name: &str| {
            let s = layout.iter().find(|s| s.name == name).unwrap();
            v[s.start..s.start + s.len].iter().position(|&x| x == 1.0).unwrap()
        };

        let same = f.pair_features("first", "launch", Scope::Wd).unwrap().values;
        assert_eq!(seg(&same, "distance"), 0);

        let self_pair = f.pair_features("first", "first", Scope::Wd).unwrap().values;
        assert_eq!(seg(&self_pair, "cosine"), 9);
        assert_eq!(seg(&self_pair, "wn_sense"), 9);

        let oov = f.pair_features("first", "oov", Scope::Wd).unwrap().values;
        assert_eq!(seg(&oov, "cosine"), 10);
        assert_eq!(seg(&oov, "distance"), 2);

        let attack_raid = f.pair_features("first", "raid", Scope::Wd).unwrap().values;
        assert_eq!(seg(&attack_raid, "cosine"), 9);
        assert_eq!(seg(&attack_raid, "wn_sense"), 9);
        assert_eq!(seg(&attack_raid, "wn_hypernym"), 9);
        assert_eq!(seg(&attack_raid, "wn_derivation"), 10);
    }

    #[test]
    fn pair_lengths() {
        let corpus = corpus();
        let (emb, wn, cfg) = (embeddings(), wordnet(), small_config());
        let f = Featurizer::new(&corpus, &emb, &wn, cfg).unwrap();
        assert_eq!(f.pair_features("first", "raid", Scope::Wd).unwrap().values.len(), 101);
        assert_eq!(f.pair_features("first", "raid", Scope::Cd).unwrap().values.len(), 90);
    }

    #[test]
    fn swapping_keeps_relational_and_swaps_context() {
        let corpus = corpus();
        let (emb, wn, cfg) = (embeddings(), wordnet(), small_config());
        let f = Featurizer::new(&corpus, &emb, &wn, cfg.clone()).unwrap();
        let ctx = cfg.context_len();
        for scope in [Scope::Wd, Scope::Cd] {
            let ab = f.pair_features("launch", "raid", scope).unwrap().values;
            let ba = f.pair_features("raid", "launch", scope).unwrap().values;
            assert_eq!(ab[2 * ctx..], ba[2 * ctx..]);
            assert_eq!(ab[..ctx], ba[ctx..2 * ctx]);
            assert_eq!(ab, f.pair_features("launch", "raid", scope).unwrap().values);
        }
    }

    #[test]
    fn wd_pair_across_documents_fails() {
        let d = |id: &str| Document {
            doc_id: id.into(),
            topic: 1,
            sub_topic: SubTopic::Ecb,
            sentences: vec![Sentence { index: 0, tokens: vec![token(0, "attack", "NN")] }],
            mentions: vec![Mention {
                id: format!("{id}:1"),
                doc_id: id.into(),
                sentence_index: 0,
                span: (0, 0),
                head_index: 0,
                wd_chain: None,
                cd_chain: None,
            }],
        };
        let corpus = Corpus::new(vec![d("a"), d("b")]).unwrap();
        let (emb, wn) = (embeddings(), wordnet());
        let f = Featurizer::new(&corpus, &emb, &wn, small_config()).unwrap();
        assert!(matches!(f.pair_features("a:1", "b:1", Scope::Wd), Err(Error::Scope(_))));
        assert!(f.pair_features("a:1", "b:1", Scope::Cd).is_ok());
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_config();
        cfg.pos_tagset.push(UNK_TAG.into());
        assert!(cfg.validate().is_err());
        let cfg = FeatureConfig { buckets: 1, ..small_config() };
        assert!(cfg.validate().is_err());
        assert_eq!(FeatureConfig::default().pos_tagset.len(), 46);
        FeatureConfig::default().validate().unwrap();
    }

    proptest! {
        #[test]
        fn layout_length_and_one_hots(
            dim in 1usize..6,
            window in 0usize..4,
            extra_tags in 0usize..5,
            buckets in 2usize..15,
            max_dist in 0usize..12,
            wd in any::<bool>(),
        ) {
            let mut tagset: Vec<String> = (0..extra_tags).map(|i| format!("T{i}")).collect();
            tagset.push(UNK_TAG.into());
            let cfg = FeatureConfig { embedding_dim: dim, window, pos_tagset: tagset, buckets, max_sentence_distance: max_dist };
            let scope = if wd { Scope::Wd } else { Scope::Cd };
            let t = extra_tags + 1;
            let rel = if wd { max_dist + 1 } else { 0 } + 4 * buckets;
            prop_assert_eq!(cfg.input_dim(scope), 2 * ((1 + 2 * window) * dim + t) + rel);
            let layout = cfg.layout(scope);
            let end = layout.last().map(|s| s.start + s.len).unwrap();
            prop_assert_eq!(end, cfg.input_dim(scope));

            let words: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
            let mut emb = EmbeddingStore::new(dim);
            for (i, w) in words.iter().enumerate().take(4) {
                let v: Vec<f32> = (0..dim).map(|k| ((i + k) % 3) as f32 - 1.0).collect();
                emb.insert(w, &v).unwrap();
            }
            let tokens: Vec<Token> = words.iter().enumerate().map(|(i, w)| token(i, w, "T0")).collect();
            let mention = |id: &str, at: usize| Mention {
                id: id.into(), doc_id: "d".into(), sentence_index: 0, span: (at, at), head_index: at,
                wd_chain: None, cd_chain: None,
            };
            let corpus = Corpus::new(vec![Document {
                doc_id: "d".into(), topic: 1, sub_topic: SubTopic::Ecb,
                sentences: vec![Sentence { index: 0, tokens }],
                mentions: vec![mention("a", 1), mention("b", 5)],
            }]).unwrap();
            let wn = WordNetStore::default();
            let f = Featurizer::new(&corpus, &emb, &wn, cfg.clone()).unwrap();
            let v = f.pair_features("a", "b", scope).unwrap().values;
            prop_assert_eq!(v.len(), cfg.input_dim(scope));
            for s in layout.iter().filter(|s| s.one_hot) {
                let seg = &v[s.start..s.start + s.len];
                prop_assert_eq!(seg.iter().filter(|&&x| x == 1.0).count(), 1);
                prop_assert_eq!(seg.iter().filter(|&&x| x == 0.0).count(), s.len - 1);
            }
        }
    }
}
