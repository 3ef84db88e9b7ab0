//! Mention graphs and clustering.
//!
//! Pair scores become edge weights; edges below a threshold are dropped and
//! the connected components of what remains are the clusters. CD resolution
//! runs in two phases: WD components first, then components joined by any
//! CD edge that clears the CD threshold.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Scope};
use crate::error::{Error, Result};
use crate::featurize::Featurizer;
use crate::pairnet::PairModel;

/// A partition of mention ids. Members are sorted within each cluster and
/// clusters are sorted by their members, so equal partitions compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawClustering")]
pub struct Clustering {
    clusters: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClustering {
    clusters: Vec<Vec<String>>,
}

impl TryFrom<RawClustering> for Clustering {
    type Error = String;

    fn try_from(raw: RawClustering) -> std::result::Result<Self, String> {
        let mut seen = HashSet::new();
        for id in raw.clusters.iter().flatten() {
            if !seen.insert(id.as_str()) {
                return Err(format!("mention {id} appears in more than one cluster"));
            }
        }
        Ok(Clustering::new(raw.clusters))
    }
}

impl Clustering {
    pub fn new<I: IntoIterator<Item = Vec<String>>>(clusters: I) -> Self {
        let mut clusters: Vec<Vec<String>> = clusters
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|mut c| {
                c.sort();
                c.dedup();
                c
            })
            .collect();
        clusters.sort();
        Clustering { clusters }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn clusters(&self) -> &[Vec<String>] {
        &self.clusters
    }

    pub fn mention_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    pub fn mentions(&self) -> impl Iterator<Item = &str> {
        self.clusters.iter().flatten().map(String::as_str)
    }

    /// Cluster index of every mention.
    pub fn assignment(&self) -> HashMap<&str, usize> {
        self.clusters
            .iter()
            .enumerate()
            .flat_map(|(k, c)| c.iter().map(move |m| (m.as_str(), k)))
            .collect()
    }

    /// True when every cluster of `self` lies inside a single cluster of
    /// `coarser`.
    pub fn refines(&self, coarser: &Clustering) -> bool {
        let owner = coarser.assignment();
        self.clusters.iter().all(|c| {
            let first = owner.get(c[0].as_str());
            first.is_some() && c.iter().all(|m| owner.get(m.as_str()) == first)
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("clustering serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Disjoint-set forest with path compression and union by rank.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    /// Element groups, ordered by smallest member.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut first: HashMap<usize, usize> = HashMap::new();
        for x in 0..self.parent.len() {
            let r = self.find(x);
            let key = *first.entry(r).or_insert(x);
            by_root.entry(key).or_default().push(x);
        }
        by_root.into_values().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub tau_wd: f64,
    pub tau_cd: f64,
    pub epsilon: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tau_wd: 0.95,
            tau_cd: 1.0,
            epsilon: 1e-9,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, tau) in [("tau_wd", self.tau_wd), ("tau_cd", self.tau_cd)] {
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {tau}")));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        Ok(())
    }

    pub fn tau(&self, scope: Scope) -> f64 {
        match scope {
            Scope::Wd => self.tau_wd,
            Scope::Cd => self.tau_cd,
        }
    }
}

/// Scored mention pairs over a fixed node list.
#[derive(Clone, Debug, PartialEq)]
pub struct MentionGraph {
    pub scope: Scope,
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize, f64)>,
    seen: HashSet<(usize, usize)>,
}

impl MentionGraph {
    pub fn new<I: IntoIterator<Item = String>>(scope: Scope, nodes: I) -> Self {
        let nodes: Vec<String> = nodes.into_iter().collect();
        let index = nodes.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        MentionGraph {
            scope,
            nodes,
            index,
            edges: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.edges
            .iter()
            .map(|&(a, b, w)| (self.nodes[a].as_str(), self.nodes[b].as_str(), w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn node(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownMention(id.to_string()))
    }

    pub fn add_edge(&mut self, a: &str, b: &str, weight: f64) -> Result<()> {
        let (ia, ib) = (self.node(a)?, self.node(b)?);
        if ia == ib {
            return Err(Error::Scope(format!("self-loop on {a}")));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::SimilarityRange(weight));
        }
        let key = (ia.min(ib), ia.max(ib));
        if !self.seen.insert(key) {
            return Err(Error::Scope(format!("duplicate edge {a} -- {b}")));
        }
        self.edges.push((key.0, key.1, weight));
        Ok(())
    }
}

/// Components of the graph after dropping edges lighter than `tau - epsilon`.
pub fn connected_components(graph: &MentionGraph, tau: f64, epsilon: f64) -> Clustering {
    let mut uf = UnionFind::new(graph.nodes.len());
    for &(a, b, w) in &graph.edges {
        if w >= tau - epsilon {
            uf.union(a, b);
        }
    }
    Clustering::new(
        uf.groups()
            .into_iter()
            .map(|g| g.into_iter().map(|i| graph.nodes[i].clone()).collect()),
    )
}

/// Something that assigns a coreference probability to a mention pair.
pub trait PairScorer: Sync {
    fn score(&self, m1: &str, m2: &str) -> Result<f64>;
}

impl<F> PairScorer for F
where
    F: Fn(&str, &str) -> Result<f64> + Sync,
{
    fn score(&self, m1: &str, m2: &str) -> Result<f64> {
        self(m1, m2)
    }
}

/// A trained classifier applied to featurized pairs.
pub struct ModelScorer<'f, 'a> {
    model: &'f PairModel,
    featurizer: &'f Featurizer<'a>,
}

impl<'f, 'a> ModelScorer<'f, 'a> {
    pub fn new(model: &'f PairModel, featurizer: &'f Featurizer<'a>, scope: Scope) -> Result<Self> {
        if model.scope != scope {
            return Err(Error::Scope(format!("{} model used for {scope} pairs", model.scope)));
        }
        let expected = featurizer.input_dim(scope);
        if model.input_dim() != expected {
            return Err(Error::Dimension {
                expected,
                found: model.input_dim(),
            });
        }
        Ok(ModelScorer { model, featurizer })
    }
}

impl PairScorer for ModelScorer<'_, '_> {
    fn score(&self, m1: &str, m2: &str) -> Result<f64> {
        let v = self.featurizer.pair_features(m1, m2, self.model.scope)?;
        self.model.predict(&v.values)
    }
}

/// Scores 1.0 for gold-coreferent pairs and 0.0 otherwise.
pub struct GoldScorer<'a> {
    corpus: &'a Corpus,
    scope: Scope,
}

impl<'a> GoldScorer<'a> {
    pub fn new(corpus: &'a Corpus, scope: Scope) -> Self {
        GoldScorer { corpus, scope }
    }
}

impl PairScorer for GoldScorer<'_> {
    fn score(&self, m1: &str, m2: &str) -> Result<f64> {
        let a = self.corpus.mention(m1).ok_or_else(|| Error::UnknownMention(m1.into()))?.1;
        let b = self.corpus.mention(m2).ok_or_else(|| Error::UnknownMention(m2.into()))?.1;
        let same = match self.scope {
            Scope::Wd => a.doc_id == b.doc_id && a.wd_chain.is_some() && a.wd_chain == b.wd_chain,
            Scope::Cd => a.cd_chain.is_some() && a.cd_chain == b.cd_chain,
        };
        Ok(if same { 1.0 } else { 0.0 })
    }
}

/// Eligible pairs in corpus order: same document for WD, same topic for CD.
fn eligible_pairs(corpus: &Corpus, scope: Scope) -> Vec<(&str, &str)> {
    let mut groups: BTreeMap<(u32, &str), Vec<&str>> = BTreeMap::new();
    for (d, m) in corpus.mentions() {
        let key = match scope {
            Scope::Wd => (0, d.doc_id.as_str()),
            Scope::Cd => (d.topic, ""),
        };
        groups.entry(key).or_default().push(m.id.as_str());
    }
    let mut pairs = Vec::new();
    for members in groups.values() {
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                pairs.push((*a, *b));
            }
        }
    }
    pairs
}

fn scored_graph<'c>(
    corpus: &'c Corpus,
    scorer: &dyn PairScorer,
    scope: Scope,
    pairs: Vec<(&'c str, &'c str)>,
) -> Result<MentionGraph> {
    let weights: Vec<f64> = pairs
        .par_iter()
        .map(|(a, b)| scorer.score(a, b))
        .collect::<Result<_>>()?;
    let mut graph = MentionGraph::new(scope, corpus.mentions().map(|(_, m)| m.id.clone()));
    for ((a, b), w) in pairs.into_iter().zip(weights) {
        graph.add_edge(a, b, w)?;
    }
    Ok(graph)
}

/// One edge per eligible pair, weighted by the scorer. Scoring fans out over
/// the rayon pool; edges keep corpus order.
pub fn build_graph(corpus: &Corpus, scorer: &dyn PairScorer, scope: Scope) -> Result<MentionGraph> {
    scored_graph(corpus, scorer, scope, eligible_pairs(corpus, scope))
}

pub fn wd_resolve(corpus: &Corpus, wd: &dyn PairScorer, thresholds: &Thresholds) -> Result<Clustering> {
    let graph = build_graph(corpus, wd, Scope::Wd)?;
    Ok(connected_components(&graph, thresholds.tau_wd, thresholds.epsilon))
}

/// Joins WD components that share at least one CD edge of weight at least
/// `tau - epsilon`.
pub fn merge_components(wd: &Clustering, cd_graph: &MentionGraph, tau: f64, epsilon: f64) -> Clustering {
    let owner = wd.assignment();
    let mut uf = UnionFind::new(wd.len());
    for (a, b, w) in cd_graph.edges() {
        if w >= tau - epsilon {
            if let (Some(&ca), Some(&cb)) = (owner.get(a), owner.get(b)) {
                uf.union(ca, cb);
            }
        }
    }
    Clustering::new(
        uf.groups()
            .into_iter()
            .map(|g| g.into_iter().flat_map(|k| wd.clusters()[k].iter().cloned()).collect()),
    )
}

/// Two-phase CD resolution. Only pairs that fall in different WD components
/// are scored by the CD model.
pub fn cd_resolve(
    corpus: &Corpus,
    wd: &dyn PairScorer,
    cd: &dyn PairScorer,
    thresholds: &Thresholds,
) -> Result<(Clustering, Clustering)> {
    let wd_clusters = wd_resolve(corpus, wd, thresholds)?;
    let owner = wd_clusters.assignment();
    let pairs = eligible_pairs(corpus, Scope::Cd)
        .into_iter()
        .filter(|(a, b)| owner[a] != owner[b])
        .collect();
    let graph = scored_graph(corpus, cd, Scope::Cd, pairs)?;
    let cd_clusters = merge_components(&wd_clusters, &graph, thresholds.tau_cd, thresholds.epsilon);
    Ok((wd_clusters, cd_clusters))
}

/// Groups mentions by head lemma within a document (WD) or topic (CD).
pub fn lemma_baseline(corpus: &Corpus, scope: Scope) -> Clustering {
    let mut groups: BTreeMap<(u32, &str, &str), Vec<String>> = BTreeMap::new();
    for (d, m) in corpus.mentions() {
        let lemma = m.head(d).lemma.as_str();
        let key = match scope {
            Scope::Wd => (0, d.doc_id.as_str(), lemma),
            Scope::Cd => (d.topic, "", lemma),
        };
        groups.entry(key).or_default().push(m.id.clone());
    }
    Clustering::new(groups.into_values())
}

/// Per-label counts of scores in equal-width bins over `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    pub coref: Vec<usize>,
    pub noncoref: Vec<usize>,
}

impl Histogram {
    pub fn bin(score: f64, bins: usize) -> usize {
        ((score * bins as f64).floor().max(0.0) as usize).min(bins - 1)
    }

    pub fn from_scores<I: IntoIterator<Item = (f64, bool)>>(scores: I, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("histogram needs at least one bin".into()));
        }
        let mut h = Histogram {
            coref: vec![0; bins],
            noncoref: vec![0; bins],
        };
        for (s, label) in scores {
            let k = Histogram::bin(s, bins);
            if label {
                h.coref[k] += 1;
            } else {
                h.noncoref[k] += 1;
            }
        }
        Ok(h)
    }

    /// `label,bin_lo,bin_hi,count`, coreferent rows first.
    pub fn to_csv(&self) -> String {
        let bins = self.coref.len();
        let mut out = String::from("label,bin_lo,bin_hi,count\n");
        for (label, counts) in [("coref", &self.coref), ("noncoref", &self.noncoref)] {
            for (k, c) in counts.iter().enumerate() {
                let lo = k as f64 / bins as f64;
                let hi = (k + 1) as f64 / bins as f64;
                writeln!(out, "{label},{lo:.4},{hi:.4},{c}").unwrap();
            }
        }
        out
    }
}

/// Scores labeled pairs in parallel, preserving input order.
pub fn score_pairs(scorer: &dyn PairScorer, pairs: &[crate::pairnet::LabeledPair]) -> Result<Vec<f64>> {
    pairs.par_iter().map(|p| scorer.score(&p.m1, &p.m2)).collect()
}

pub fn score_histogram(
    scorer: &dyn PairScorer,
    pairs: &[crate::pairnet::LabeledPair],
    bins: usize,
) -> Result<Histogram> {
    let scores = score_pairs(scorer, pairs)?;
    Histogram::from_scores(scores.into_iter().zip(pairs.iter().map(|p| p.coref)), bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::{doc, mention};
    use proptest::prelude::*;

    fn ids(v: &[&[&str]]) -> Clustering {
        Clustering::new(v.iter().map(|c| c.iter().map(|s| s.to_string()).collect()))
    }

    fn graph(nodes: &[&str], edges: &[(&str, &str, f64)]) -> MentionGraph {
        let mut g = MentionGraph::new(Scope::Wd, nodes.iter().map(|s| s.to_string()));
        for &(a, b, w) in edges {
            g.add_edge(a, b, w).unwrap();
        }
        g
    }

    #[test]
    fn clustering_is_normalized_and_serializes() {
        let c = ids(&[&["c"], &["b", "a"], &[]]);
        assert_eq!(c.clusters(), &[vec!["a".to_string(), "b".into()], vec!["c".into()]]);
        assert_eq!(c.to_json(), r#"{"clusters":[["a","b"],["c"]]}"#);
        let back: Clustering = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<Clustering>(r#"{"clusters":[["a"],["a"]]}"#).is_err());
    }

    #[test]
    fn threshold_filter() {
        let g = graph(&["a", "b", "c"], &[("a", "b", 0.96), ("b", "c", 0.40)]);
        assert_eq!(connected_components(&g, 0.95, 1e-9), ids(&[&["a", "b"], &["c"]]));
        assert_eq!(connected_components(&g, 0.0, 0.0), ids(&[&["a", "b", "c"]]));
        assert_eq!(connected_components(&g, 1.0, 1e-9), ids(&[&["a"], &["b"], &["c"]]));
    }

    #[test]
    fn epsilon_admits_saturated_scores() {
        let g = graph(&["a", "b"], &[("a", "b", 1.0 - 1e-12)]);
        assert_eq!(connected_components(&g, 1.0, 1e-9).len(), 1);
        assert_eq!(connected_components(&g, 1.0, 0.0).len(), 2);
    }

    #[test]
    fn graph_rejects_bad_edges() {
        let mut g = graph(&["a", "b"], &[]);
        assert!(g.add_edge("a", "a", 0.5).is_err());
        assert!(g.add_edge("a", "b", 1.5).is_err());
        assert!(g.add_edge("a", "z", 0.5).is_err());
        g.add_edge("b", "a", 0.5).unwrap();
        assert!(g.add_edge("a", "b", 0.5).is_err());
    }

    fn two_topics() -> Corpus {
        Corpus::new(vec![
            doc(
                "1_1ecb",
                1,
                vec![
                    mention("1_1ecb", "a", 0, 0, Some("w1"), Some("c1")),
                    mention("1_1ecb", "b", 0, 2, Some("w1"), Some("c1")),
                    mention("1_1ecb", "c", 1, 0, None, None),
                ],
            ),
            doc("1_2ecb", 1, vec![mention("1_2ecb", "d", 0, 1, Some("w2"), Some("c1"))]),
            doc("2_1ecb", 2, vec![mention("2_1ecb", "e", 0, 1, None, None)]),
        ])
        .unwrap()
    }

    #[test]
    fn graph_scoping() {
        let corpus = two_topics();
        let half = |_: &str, _: &str| -> Result<f64> { Ok(0.5) };
        let wd = build_graph(&corpus, &half, Scope::Wd).unwrap();
        assert_eq!(wd.edge_count(), 3);
        let cd = build_graph(&corpus, &half, Scope::Cd).unwrap();
        assert_eq!(cd.edge_count(), 6);
        assert!(cd.edges().all(|(a, b, w)| a != "e" && b != "e" && (0.0..=1.0).contains(&w)));
    }

    #[test]
    fn oracle_recovers_gold() {
        let corpus = two_topics();
        let t = Thresholds::default();
        let wd = GoldScorer::new(&corpus, Scope::Wd);
        let cd = GoldScorer::new(&corpus, Scope::Cd);
        assert_eq!(wd_resolve(&corpus, &wd, &t).unwrap(), crate::corpus::gold_chains(&corpus, Scope::Wd));
        let (w, c) = cd_resolve(&corpus, &wd, &cd, &t).unwrap();
        assert_eq!(c, crate::corpus::gold_chains(&corpus, Scope::Cd));
        assert!(w.refines(&c));
    }

    #[test]
    fn no_cd_edges_keeps_wd() {
        let corpus = two_topics();
        let t = Thresholds::default();
        let wd = GoldScorer::new(&corpus, Scope::Wd);
        let none = |_: &str, _: &str| -> Result<f64> { Ok(0.99) };
        let (w, c) = cd_resolve(&corpus, &wd, &none, &t).unwrap();
        assert_eq!(w, c);
        let zero = |_: &str, _: &str| -> Result<f64> { Ok(0.0) };
        assert_eq!(wd_resolve(&corpus, &zero, &t).unwrap().len(), corpus.mention_count());
    }

    #[test]
    fn two_phase_hand_trace() {
        let wd = ids(&[&["a", "b"], &["c"], &["d"]]);
        let cd = graph(&["a", "b", "c", "d"], &[("b", "d", 1.0), ("a", "c", 0.7)]);
        assert_eq!(merge_components(&wd, &cd, 1.0, 1e-9), ids(&[&["a", "b", "d"], &["c"]]));
    }

    #[test]
    fn lemma_grouping() {
        let mut d = doc(
            "1_1ecb",
            1,
            vec![
                mention("1_1ecb", "m1", 0, 0, None, None),
                mention("1_1ecb", "m2", 0, 1, None, None),
                mention("1_1ecb", "m3", 1, 0, None, None),
            ],
        );
        d.sentences[0].tokens[0].lemma = "attack".into();
        d.sentences[0].tokens[1].lemma = "attack".into();
        d.sentences[1].tokens[0].lemma = "raid".into();
        let mut other = doc("2_1ecb", 2, vec![mention("2_1ecb", "m4", 0, 0, None, None)]);
        other.sentences[0].tokens[0].lemma = "attack".into();
        let corpus = Corpus::new(vec![d, other]).unwrap();
        assert_eq!(lemma_baseline(&corpus, Scope::Wd), ids(&[&["m1", "m2"], &["m3"], &["m4"]]));
        assert_eq!(lemma_baseline(&corpus, Scope::Cd), ids(&[&["m1", "m2"], &["m3"], &["m4"]]));
        assert!(lemma_baseline(&Corpus::empty(), Scope::Cd).is_empty());
    }

    #[test]
    fn histogram_bins() {
        let h = Histogram::from_scores(std::iter::repeat((0.5, true)).take(7), 10).unwrap();
        assert_eq!(h.coref[5], 7);
        let h = Histogram::from_scores([(1.0, true), (0.0, false), (0.0, false)], 4).unwrap();
        assert_eq!((h.coref[3], h.noncoref[0]), (1, 2));
        let csv = h.to_csv();
        assert!(csv.starts_with("label,bin_lo,bin_hi,count\ncoref,0.0000,0.2500,0\n"));
        assert_eq!(csv.lines().count(), 9);
        assert!(Histogram::from_scores([], 0).is_err());
    }

    /// Reachability by repeated relaxation over the kept edges.
    fn closure(n: usize, edges: &[(usize, usize, f64)], tau: f64) -> Vec<Vec<bool>> {
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b, w) in edges {
            if w >= tau - 1e-9 {
                reach[a][b] = true;
                reach[b][a] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        reach
    }

    fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
        (1usize..=30).prop_flat_map(|n| {
            let edges = prop::collection::vec((0..n, 0..n, 0.0f64..=1.0), 0..n * 2);
            (Just(n), edges)
        })
    }

    fn build(n: usize, edges: &[(usize, usize, f64)]) -> MentionGraph {
        let mut g = MentionGraph::new(Scope::Wd, (0..n).map(|i| format!("m{i:02}")));
        for &(a, b, w) in edges {
            let _ = g.add_edge(&format!("m{a:02}"), &format!("m{b:02}"), w);
        }
        g
    }

    proptest! {
        #[test]
        fn components_match_closure((n, edges) in random_graph(), tau in 0.0f64..=1.0) {
            let g = build(n, &edges);
            let kept: Vec<_> = g.edges.clone();
            let reach = closure(n, &kept, tau);
            let owner = connected_components(&g, tau, 1e-9);
            let owner = owner.assignment();
            for i in 0..n {
                for j in 0..n {
                    let same = owner[format!("m{i:02}").as_str()] == owner[format!("m{j:02}").as_str()];
                    prop_assert_eq!(same, reach[i][j]);
                }
            }
        }

        #[test]
        fn raising_tau_only_splits((n, edges) in random_graph()) {
            let g = build(n, &edges);
            let taus = [0.0, 0.25, 0.5, 0.75, 0.95, 1.0];
            for w in taus.windows(2) {
                let loose = connected_components(&g, w[0], 1e-9);
                let tight = connected_components(&g, w[1], 1e-9);
                prop_assert!(tight.refines(&loose));
                prop_assert_eq!(tight.mention_count(), n);
            }
        }
    }
}
