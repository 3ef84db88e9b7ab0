//! Coreference metrics (MUC, B³, CEAF_e, CoNLL) and pairwise scores.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cluster::Clustering;
use crate::error::{Error, Result};

/// Precision, recall and their harmonic mean, as fractions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        Prf {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
        }
    }

    fn from_ratios(p_num: f64, p_den: f64, r_num: f64, r_den: f64) -> Self {
        let ratio = |n: f64, d: f64| if d > 0.0 { n / d } else { 0.0 };
        Prf::new(ratio(p_num, p_den), ratio(r_num, r_den))
    }
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// How gold singleton chains enter scoring.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingletonPolicy {
    /// Score every mention.
    #[default]
    Include,
    /// Drop mentions whose key chain is a singleton, from both sides.
    Exclude,
}

/// Brings key and response onto one mention universe: mentions missing from
/// one side become singletons there. Under `Exclude`, mentions in singleton
/// key chains are removed from both sides.
pub fn align_universe(key: &Clustering, response: &Clustering, policy: SingletonPolicy) -> (Clustering, Clustering) {
    let key_ids: BTreeSet<&str> = key.mentions().collect();
    let resp_ids: BTreeSet<&str> = response.mentions().collect();
    let missing_in_resp: Vec<&str> = key_ids.difference(&resp_ids).copied().collect();
    let missing_in_key: Vec<&str> = resp_ids.difference(&key_ids).copied().collect();
    if !missing_in_resp.is_empty() || !missing_in_key.is_empty() {
        log::warn!(
            "mention universes differ: {} key mentions absent from response, {} response mentions absent from key; padding with singletons",
            missing_in_resp.len(),
            missing_in_key.len()
        );
    }
    let pad = |c: &Clustering, extra: &[&str]| {
        Clustering::new(
            c.clusters()
                .iter()
                .cloned()
                .chain(extra.iter().map(|m| vec![m.to_string()])),
        )
    };
    let key = pad(key, &missing_in_key);
    let response = pad(response, &missing_in_resp);
    match policy {
        SingletonPolicy::Include => (key, response),
        SingletonPolicy::Exclude => {
            let dropped: BTreeSet<&str> = key
                .clusters()
                .iter()
                .filter(|c| c.len() == 1)
                .map(|c| c[0].as_str())
                .collect();
            let strip = |c: &Clustering| {
                Clustering::new(
                    c.clusters()
                        .iter()
                        .map(|cl| cl.iter().filter(|m| !dropped.contains(m.as_str())).cloned().collect()),
                )
            };
            (strip(&key), strip(&response))
        }
    }
}

fn muc_side(a: &Clustering, b: &Clustering) -> (f64, f64) {
    let owner = b.assignment();
    let mut num = 0.0;
    let mut den = 0.0;
    for cluster in a.clusters() {
        let parts: BTreeSet<Option<usize>> = cluster.iter().map(|m| owner.get(m.as_str()).copied()).collect();
        // Mentions absent from `b` count as their own partitions.
        let missing = cluster.iter().filter(|m| !owner.contains_key(m.as_str())).count();
        let partitions = parts.iter().filter(|p| p.is_some()).count() + missing;
        num += (cluster.len() - partitions) as f64;
        den += (cluster.len() - 1) as f64;
    }
    (num, den)
}

/// Vilain et al. link-based MUC.
pub fn muc(key: &Clustering, response: &Clustering) -> Prf {
    let (r_num, r_den) = muc_side(key, response);
    let (p_num, p_den) = muc_side(response, key);
    Prf::from_ratios(p_num, p_den, r_num, r_den)
}

fn b_cubed_side(a: &Clustering, b: &Clustering) -> (f64, f64) {
    let owner = b.assignment();
    let mut total = 0.0;
    let mut count = 0.0;
    for cluster in a.clusters() {
        let mut overlap: HashMap<usize, usize> = HashMap::new();
        for m in cluster {
            if let Some(&k) = owner.get(m.as_str()) {
                *overlap.entry(k).or_default() += 1;
            }
        }
        for m in cluster {
            let shared = owner.get(m.as_str()).map_or(1, |k| overlap[k]);
            total += shared as f64 / cluster.len() as f64;
            count += 1.0;
        }
    }
    (total, count)
}

/// Mention-averaged B³.
pub fn b_cubed(key: &Clustering, response: &Clustering) -> Prf {
    let (r_num, r_den) = b_cubed_side(key, response);
    let (p_num, p_den) = b_cubed_side(response, key);
    Prf::from_ratios(p_num, p_den, r_num, r_den)
}

/// `φ4(K, R) = 2|K ∩ R| / (|K| + |R|)` for every key/response cluster pair.
pub fn phi4_matrix(key: &Clustering, response: &Clustering) -> Vec<Vec<f64>> {
    let owner = response.assignment();
    key.clusters()
        .iter()
        .map(|k| {
            let mut row = vec![0.0; response.len()];
            let mut overlap = vec![0usize; response.len()];
            for m in k {
                if let Some(&r) = owner.get(m.as_str()) {
                    overlap[r] += 1;
                }
            }
            for (r, &o) in overlap.iter().enumerate() {
                if o > 0 {
                    row[r] = 2.0 * o as f64 / (k.len() + response.clusters()[r].len()) as f64;
                }
            }
            row
        })
        .collect()
}

/// Entity-based CEAF with the φ4 similarity.
pub fn ceaf_e(key: &Clustering, response: &Clustering) -> Result<Prf> {
    if key.is_empty() || response.is_empty() {
        return Ok(Prf::default());
    }
    let phi = kuhn_munkres(&phi4_matrix(key, response))?.total;
    Ok(Prf::from_ratios(phi, response.len() as f64, phi, key.len() as f64))
}

/// A maximum-weight one-to-one assignment of rows to columns.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentResult {
    /// `(row, column)` pairs, sorted by row. Rows or columns left over in a
    /// rectangular matrix stay unmatched.
    pub matching: Vec<(usize, usize)>,
    pub total: f64,
}

/// Maximum-weight bipartite matching by the Hungarian algorithm
/// (shortest augmenting paths with potentials) on the zero-padded square
/// matrix, O(n³).
pub fn kuhn_munkres(weights: &[Vec<f64>]) -> Result<AlignmentResult> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    for (r, row) in weights.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Dimension {
                expected: cols,
                found: row.len(),
            });
        }
        if let Some(c) = row.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFiniteWeight { row: r, col: c });
        }
    }
    let n = rows.max(cols);
    if n == 0 {
        return Ok(AlignmentResult {
            matching: Vec::new(),
            total: 0.0,
        });
    }
    let max = weights.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    // Minimize cost = max - weight; padding has weight 0.
    let cost = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols {
            max - weights[i][j]
        } else {
            max
        }
    };

    // 1-based arrays with a virtual column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut matching: Vec<(usize, usize)> = (1..=n)
        .filter(|&j| p[j] != 0)
        .map(|j| (p[j] - 1, j - 1))
        .filter(|&(i, j)| i < rows && j < cols)
        .collect();
    matching.sort_unstable();
    let total = matching.iter().map(|&(i, j)| weights[i][j]).sum();
    Ok(AlignmentResult { matching, total })
}

/// Mean of the three F1 values.
pub fn conll_f1(muc_f1: f64, b3_f1: f64, ceafe_f1: f64) -> f64 {
    (muc_f1 + b3_f1 + ceafe_f1) / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorefScores {
    pub muc: Prf,
    pub b_cubed: Prf,
    pub ceaf_e: Prf,
}

impl CorefScores {
    pub fn conll(&self) -> f64 {
        conll_f1(self.muc.f1, self.b_cubed.f1, self.ceaf_e.f1)
    }

    /// `metric,recall,precision,f1` in percent with two decimals, then a
    /// `conll` row carrying only the F1 column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,recall,precision,f1\n");
        for (name, m) in [("muc", self.muc), ("b_cubed", self.b_cubed), ("ceaf_e", self.ceaf_e)] {
            writeln!(
                out,
                "{name},{:.2},{:.2},{:.2}",
                percent(m.recall),
                percent(m.precision),
                percent(m.f1)
            )
            .unwrap();
        }
        writeln!(out, "conll,,,{:.2}", percent(self.conll())).unwrap();
        out
    }
}

/// All three metrics after aligning the mention universes.
pub fn score_all(key: &Clustering, response: &Clustering, policy: SingletonPolicy) -> Result<CorefScores> {
    let (key, response) = align_universe(key, response, policy);
    Ok(CorefScores {
        muc: muc(&key, &response),
        b_cubed: b_cubed(&key, &response),
        ceaf_e: ceaf_e(&key, &response)?,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, predicted: bool, gold: bool) {
        match (predicted, gold) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

/// Pairwise scores as fractions. A flag is set when its denominator was
/// zero and the value was reported as 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairwiseMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy_all: f64,
    pub accuracy_noncoref: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub accuracy_noncoref_undefined: bool,
}

pub fn pairwise_metrics(c: ConfusionCounts) -> PairwiseMetrics {
    let ratio = |n: u64, d: u64| if d == 0 { (0.0, true) } else { (n as f64 / d as f64, false) };
    let (precision, precision_undefined) = ratio(c.tp, c.tp + c.fp);
    let (recall, recall_undefined) = ratio(c.tp, c.tp + c.fn_);
    let (accuracy_all, _) = ratio(c.tp + c.tn, c.total());
    let (accuracy_noncoref, accuracy_noncoref_undefined) = ratio(c.tn, c.tn + c.fp);
    PairwiseMetrics {
        precision,
        recall,
        f1: harmonic_mean(precision, recall),
        accuracy_all,
        accuracy_noncoref,
        precision_undefined,
        recall_undefined,
        accuracy_noncoref_undefined,
    }
}

pub fn percent(x: f64) -> f64 {
    x * 100.0
}

/// Rounds half away from zero at `decimals` places. A relative nudge keeps
/// values such as 0.125 printed from binary fractions on the upper side.
pub fn round_half_up(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let scaled = x * scale;
    let nudged = scaled + scaled.signum() * scaled.abs().max(1.0) * 1e-12;
    nudged.round() / scale
}

/// One report row in percent, two decimals. F1 is taken
/// from the rounded precision and recall.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairwiseRow {
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy_noncoref: f64,
    pub accuracy_all: f64,
}

impl PairwiseRow {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let m = pairwise_metrics(counts);
        let precision = round_half_up(percent(m.precision), 2);
        let recall = round_half_up(percent(m.recall), 2);
        PairwiseRow {
            counts,
            precision,
            recall,
            f1: round_half_up(harmonic_mean(precision, recall), 2),
            accuracy_noncoref: round_half_up(percent(m.accuracy_noncoref), 2),
            accuracy_all: round_half_up(percent(m.accuracy_all), 2),
        }
    }

    pub const CSV_HEADER: &'static str =
        "setting,threshold,tp,fn,tn,fp,coref_links,noncoref_links,precision,recall,f1,accuracy_noncoref,accuracy_all";

    pub fn csv_line(&self, setting: &str, threshold: f64) -> String {
        let c = self.counts;
        format!(
            "{setting},{threshold},{},{},{},{},{},{},{:.2},{:.2},{:.2},{:.2},{:.2}",
            c.tp,
            c.fn_,
            c.tn,
            c.fp,
            c.tp + c.fn_,
            c.tn + c.fp,
            self.precision,
            self.recall,
            self.f1,
            self.accuracy_noncoref,
            self.accuracy_all
        )
    }
}

/// Classifies each scored pair as coreferent when `score >= threshold -
/// epsilon`.
pub fn intrinsic_eval<I>(scored: I, threshold: f64, epsilon: f64) -> ConfusionCounts
where
    I: IntoIterator<Item = (f64, bool)>,
{
    let mut c = ConfusionCounts::default();
    for (score, gold) in scored {
        c.record(score >= threshold - epsilon, gold);
    }
    c
}
