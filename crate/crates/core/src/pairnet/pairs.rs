use std::collections::{BTreeMap, HashSet};

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Mention, Scope};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMode {
    /// Negatives restricted to same-sentence pairs and pairs whose
    /// sentences also hold a coreferent pair.
    Train,
    /// Every in-scope pair.
    Eval,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledPair {
    pub m1: String,
    pub m2: String,
    pub coref: bool,
    pub scope: Scope,
}

type SentenceKey<'a> = (&'a str, usize);

fn coreferent(scope: Scope, a: &Mention, b: &Mention) -> bool {
    match scope {
        Scope::Wd => a.doc_id == b.doc_id && a.wd_chain.is_some() && a.wd_chain == b.wd_chain,
        Scope::Cd => a.cd_chain.is_some() && a.cd_chain == b.cd_chain,
    }
}

/// Labeled mention pairs for one scope.
///
/// Positives are all coreferent pairs (WD: same document and WD chain; CD:
/// same CD chain, hence same topic). Negatives are non-coreferent pairs
/// within a document (WD) or within a sub-topic (CD); in train mode only
/// those in the same sentence or in a sentence pair that also holds a
/// coreferent pair are kept. Pairs are oriented and sorted by corpus order.
pub fn generate_pairs(corpus: &Corpus, scope: Scope, mode: PairMode) -> Vec<LabeledPair> {
    let mut groups: BTreeMap<(u32, String), Vec<(&Document, &Mention)>> = BTreeMap::new();
    for (d, m) in corpus.mentions() {
        let key = match scope {
            Scope::Wd => (0, d.doc_id.clone()),
            Scope::Cd => (d.topic, String::new()),
        };
        groups.entry(key).or_default().push((d, m));
    }

    let mut out = Vec::new();
    for members in groups.values() {
        let mut coref_sentences: HashSet<(SentenceKey, SentenceKey)> = HashSet::new();
        let mut candidates = Vec::new();
        for (i, &(da, a)) in members.iter().enumerate() {
            for &(db, b) in &members[i + 1..] {
                if coreferent(scope, a, b) {
                    let sa = (da.doc_id.as_str(), a.sentence_index);
                    let sb = (db.doc_id.as_str(), b.sentence_index);
                    coref_sentences.insert((sa, sb));
                    coref_sentences.insert((sb, sa));
                    out.push((a, b, true));
                } else if scope == Scope::Wd || da.sub_topic == db.sub_topic {
                    candidates.push(((da, a), (db, b)));
                }
            }
        }
        for ((da, a), (db, b)) in candidates {
            let keep = match mode {
                PairMode::Eval => true,
                PairMode::Train => {
                    let sa = (da.doc_id.as_str(), a.sentence_index);
                    let sb = (db.doc_id.as_str(), b.sentence_index);
                    sa == sb || coref_sentences.contains(&(sa, sb))
                }
            };
            if keep {
                out.push((a, b, false));
            }
        }
    }

    let mut pairs: Vec<_> = out
        .into_iter()
        .map(|(a, b, coref)| {
            let (oa, ob) = (corpus.ordinal(&a.id).unwrap(), corpus.ordinal(&b.id).unwrap());
            let (first, second, key) = if oa <= ob { (a, b, (oa, ob)) } else { (b, a, (ob, oa)) };
            (
                key,
                LabeledPair {
                    m1: first.id.clone(),
                    m2: second.id.clone(),
                    coref,
                    scope,
                },
            )
        })
        .collect();
    pairs.sort_by_key(|(key, _)| *key);
    pairs.into_iter().map(|(_, p)| p).collect()
}

/// All positives plus an equal-sized seeded uniform sample of negatives,
/// in input order. The flag is true when there were fewer negatives than
/// positives and all of them were kept.
pub fn sample_balanced(pairs: &[LabeledPair], seed: u64) -> (Vec<LabeledPair>, bool) {
    let positives = pairs.iter().filter(|p| p.coref).count();
    let negatives: Vec<usize> = (0..pairs.len()).filter(|&i| !pairs[i].coref).collect();
    let short = negatives.len() < positives;
    if short {
        log::warn!(
            "balanced sampling: only {} negatives for {positives} positives; keeping all",
            negatives.len()
        );
    }
    let mut keep: HashSet<usize> = HashSet::new();
    if short {
        keep.extend(&negatives);
    } else {
        let mut rng = seed::rng(seed, "balanced-sample");
        keep.extend(sample(&mut rng, negatives.len(), positives).into_iter().map(|k| negatives[k]));
    }
    let out = pairs
        .iter()
        .enumerate()
        .filter(|(i, p)| p.coref || keep.contains(i))
        .map(|(_, p)| p.clone())
        .collect();
    (out, short)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::{doc, mention};
    use crate::corpus::SubTopic;

    fn pairs_set(v: &[LabeledPair]) -> HashSet<(String, String, bool)> {
        v.iter().map(|p| (p.m1.clone(), p.m2.clone(), p.coref)).collect()
    }

    #[test]
    fn complete_chain_has_no_negatives() {
        let corpus = Corpus::new(vec![doc(
            "d",
            1,
            vec![
                mention("d", "a", 0, 0, Some("w"), None),
                mention("d", "b", 0, 1, Some("w"), None),
                mention("d", "c", 1, 2, Some("w"), None),
            ],
        )])
        .unwrap();
        let pairs = generate_pairs(&corpus, Scope::Wd, PairMode::Eval);
        assert_eq!(
            pairs_set(&pairs),
            HashSet::from([
                ("a".into(), "b".into(), true),
                ("a".into(), "c".into(), true),
                ("b".into(), "c".into(), true)
            ])
        );
    }

    fn mixed() -> Corpus {
        let mut d3 = doc(
            "d3",
            1,
            vec![mention("d3", "e", 0, 1, Some("w3"), Some("c1")), mention("d3", "f", 1, 1, None, None)],
        );
        d3.sub_topic = SubTopic::EcbPlus;
        Corpus::new(vec![
            doc(
                "d1",
                1,
                vec![
                    mention("d1", "a", 0, 1, Some("w1"), Some("c1")),
                    mention("d1", "b", 0, 3, None, None),
                    mention("d1", "c", 1, 1, Some("w1"), Some("c1")),
                    mention("d1", "x", 1, 3, None, None),
                ],
            ),
            doc("d2", 1, vec![mention("d2", "d", 1, 0, Some("w2"), Some("c1"))]),
            d3,
            doc("d4", 2, vec![mention("d4", "g", 0, 0, None, None)]),
        ])
        .unwrap()
    }

    #[test]
    fn wd_train_filter() {
        let corpus = mixed();
        let eval = generate_pairs(&corpus, Scope::Wd, PairMode::Eval);
        let train = generate_pairs(&corpus, Scope::Wd, PairMode::Train);
        // d1: 6 pairs, one positive (a, c); d3: one negative.
        assert_eq!(eval.len(), 7);
        assert_eq!(eval.iter().filter(|p| p.coref).count(), 1);
        // In d1 sentences 0 and 1 share a coreferent pair, so all d1
        // negatives survive; d3's e/f are in sentences without one.
        assert_eq!(train.len(), 6);
        assert!(pairs_set(&train).is_subset(&pairs_set(&eval)));
    }

    #[test]
    fn cd_pairs_stay_in_topic_and_sub_topic() {
        let corpus = mixed();
        let eval = generate_pairs(&corpus, Scope::Cd, PairMode::Eval);
        let positives: Vec<_> = eval.iter().filter(|p| p.coref).collect();
        // c1 = {a, c, d, e}: 6 positive pairs, including the ecbplus e.
        assert_eq!(positives.len(), 6);
        assert!(eval.iter().all(|p| p.m1 != "g" && p.m2 != "g"));
        // Negatives never cross the ecb/ecbplus boundary.
        let ecbplus = ["e", "f"];
        for p in eval.iter().filter(|p| !p.coref) {
            assert_eq!(ecbplus.contains(&p.m1.as_str()), ecbplus.contains(&p.m2.as_str()));
        }
        let train = generate_pairs(&corpus, Scope::Cd, PairMode::Train);
        assert!(pairs_set(&train).is_subset(&pairs_set(&eval)));
    }

    #[test]
    fn pairs_are_sorted_by_corpus_order() {
        let corpus = mixed();
        let pairs = generate_pairs(&corpus, Scope::Cd, PairMode::Eval);
        let keys: Vec<_> = pairs
            .iter()
            .map(|p| (corpus.ordinal(&p.m1).unwrap(), corpus.ordinal(&p.m2).unwrap()))
            .collect();
        assert!(keys.iter().all(|(a, b)| a < b));
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    fn synthetic(pos: usize, neg: usize) -> Vec<LabeledPair> {
        (0..pos + neg)
            .map(|i| LabeledPair {
                m1: format!("m{i}"),
                m2: format!("n{i}"),
                coref: i < pos,
                scope: Scope::Wd,
            })
            .collect()
    }

    #[test]
    fn balanced_sampling() {
        let pairs = synthetic(10, 100);
        let (a, short) = sample_balanced(&pairs, 5);
        assert!(!short);
        assert_eq!(a.iter().filter(|p| p.coref).count(), 10);
        assert_eq!(a.iter().filter(|p| !p.coref).count(), 10);
        assert_eq!(sample_balanced(&pairs, 5).0, a);
        assert_ne!(sample_balanced(&pairs, 6).0, a);

        let (b, short) = sample_balanced(&synthetic(10, 4), 5);
        assert!(short);
        assert_eq!(b.len(), 14);
    }
}
