use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Corpus, Document};
use crate::error::{Error, Result};

/// A set of topic numbers written as comma-separated inclusive ranges,
/// e.g. `"1-22"` or `"1,3,5-7"`. The empty string is the empty set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TopicSet(BTreeSet<u32>);

impl TopicSet {
    pub fn range(start: u32, end: u32) -> Self {
        TopicSet((start..=end).collect())
    }

    pub fn contains(&self, topic: u32) -> bool {
        self.0.contains(&topic)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<u32> for TopicSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        TopicSet(iter.into_iter().collect())
    }
}

impl FromStr for TopicSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut set = BTreeSet::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || Error::Config(format!("invalid topic range `{part}`"));
            match part.split_once('-') {
                Some((a, b)) => {
                    let a: u32 = a.trim().parse().map_err(|_| bad())?;
                    let b: u32 = b.trim().parse().map_err(|_| bad())?;
                    if a > b {
                        return Err(bad());
                    }
                    set.extend(a..=b);
                }
                None => {
                    set.insert(part.parse().map_err(|_| bad())?);
                }
            }
        }
        Ok(TopicSet(set))
    }
}

impl fmt::Display for TopicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut iter = self.0.iter().copied().peekable();
        while let Some(start) = iter.next() {
            let mut end = start;
            while iter.peek() == Some(&(end + 1)) {
                end = iter.next().unwrap();
            }
            parts.push(if start == end {
                start.to_string()
            } else {
                format!("{start}-{end}")
            });
        }
        f.write_str(&parts.join(","))
    }
}

impl Serialize for TopicSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TopicSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Topic assignment for train/dev/test. The sets must be disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub train: TopicSet,
    pub dev: TopicSet,
    pub test: TopicSet,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train: TopicSet::range(1, 22),
            dev: TopicSet::range(23, 25),
            test: TopicSet::range(26, 45),
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        let named = [("train", &self.train), ("dev", &self.dev), ("test", &self.test)];
        for (i, (a_name, a)) in named.iter().enumerate() {
            for (b_name, b) in &named[i + 1..] {
                if let Some(t) = a.iter().find(|t| b.contains(*t)) {
                    return Err(Error::Config(format!(
                        "topic {t} assigned to both {a_name} and {b_name}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSplits {
    pub train: Corpus,
    pub dev: Corpus,
    pub test: Corpus,
}

/// Partitions documents by topic. A document whose topic is in none of the
/// three sets is a configuration error.
pub fn split_corpus(corpus: &Corpus, config: &SplitConfig) -> Result<CorpusSplits> {
    config.validate()?;
    let (mut train, mut dev, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for doc in corpus.documents() {
        let target = if config.train.contains(doc.topic) {
            &mut train
        } else if config.dev.contains(doc.topic) {
            &mut dev
        } else if config.test.contains(doc.topic) {
            &mut test
        } else {
            return Err(Error::Config(format!(
                "document {} has topic {} which is in no split",
                doc.doc_id, doc.topic
            )));
        };
        target.push(doc.clone());
    }
    Ok(CorpusSplits {
        train: Corpus::new(train)?,
        dev: Corpus::new(dev)?,
        test: Corpus::new(test)?,
    })
}

/// A detected event span: document, sentence and inclusive token range.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DetectedSpan {
    pub doc_id: String,
    pub sentence: usize,
    pub span: (usize, usize),
}

/// Reads detected spans, one per line: `doc_id<TAB>sentence<TAB>start<TAB>end`.
/// Blank lines and lines starting with `#` are skipped.
pub fn load_detected_spans<R: BufRead>(reader: R) -> Result<Vec<DetectedSpan>> {
    let mut spans = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let bad = |message: String| Error::Parse { line: i + 1, message };
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let num = |s: &str| s.trim().parse::<usize>().map_err(|e| bad(format!("`{s}`: {e}")));
        spans.push(DetectedSpan {
            doc_id: fields[0].to_string(),
            sentence: num(fields[1])?,
            span: (num(fields[2])?, num(fields[3])?),
        });
    }
    Ok(spans)
}

/// Keeps exactly the gold mentions whose (document, sentence, span) was
/// detected. Returns the filtered corpus and the number of spans naming an
/// unknown document.
pub fn filter_to_gold(corpus: &Corpus, detected: &[DetectedSpan]) -> Result<(Corpus, usize)> {
    let known: HashSet<&str> = corpus.documents().iter().map(|d| d.doc_id.as_str()).collect();
    let mut by_doc: HashMap<&str, HashSet<(usize, (usize, usize))>> = HashMap::new();
    let mut unknown = 0;
    for s in detected {
        if known.contains(s.doc_id.as_str()) {
            by_doc.entry(&s.doc_id).or_default().insert((s.sentence, s.span));
        } else {
            log::warn!("detected span refers to unknown document {}; ignored", s.doc_id);
            unknown += 1;
        }
    }
    let docs = corpus
        .documents()
        .iter()
        .map(|d| {
            let keep = by_doc.get(d.doc_id.as_str());
            Document {
                mentions: d
                    .mentions
                    .iter()
                    .filter(|m| keep.is_some_and(|k| k.contains(&(m.sentence_index, m.span))))
                    .cloned()
                    .collect(),
                ..d.clone()
            }
        })
        .collect();
    Ok((Corpus::new(docs)?, unknown))
}
