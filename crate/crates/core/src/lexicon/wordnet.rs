//! WordNet-style synset graph loaded from a three-section TSV file:
//!
//! ```text
//! #SYNSETS
//! id<TAB>pos<TAB>lemma1,lemma2,...
//! #HYPERNYMS
//! child_id<TAB>parent_id
//! #DERIV
//! lemma<TAB>synset_id<TAB>related_lemma<TAB>related_synset_id
//! ```
//!
//! Synset order in `#SYNSETS` is the sense rank used by the lemma index.
//! Path lengths are measured in the undirected hypernym graph where every
//! parentless synset of a POS hangs below one virtual root for that POS.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::Similarity;
use crate::error::{Error, Result};

/// POS tag used for verb synsets.
pub const VERB: &str = "v";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Synset {
    pub id: String,
    pub pos: String,
    pub lemmas: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct WordNetStore {
    synsets: Vec<Synset>,
    by_id: HashMap<String, usize>,
    lemma_index: HashMap<String, Vec<usize>>,
    hypernyms: Vec<Vec<usize>>,
    hyponyms: Vec<Vec<usize>>,
    derivations: HashMap<(String, usize), Vec<(String, usize)>>,
    pos_ids: Vec<String>,
    pos_of: Vec<usize>,
    roots: Vec<Vec<usize>>,
}

#[derive(PartialEq)]
enum Section {
    None,
    Synsets,
    Hypernyms,
    Deriv,
}

impl WordNetStore {
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut store = WordNetStore::default();
        let mut section = Section::None;
        let mut hyper_edges = Vec::new();
        let mut deriv_rows = Vec::new();

        for (i, line) in reader.lines().enumerate() {
            let n = i + 1;
            let err = |message: String| Error::Parse { line: n, message };
            let line = line.map_err(|e| err(e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            match line.trim() {
                "#SYNSETS" => {
                    section = Section::Synsets;
                    continue;
                }
                "#HYPERNYMS" => {
                    section = Section::Hypernyms;
                    continue;
                }
                "#DERIV" => {
                    section = Section::Deriv;
                    continue;
                }
                other if other.starts_with('#') => {
                    return Err(err(format!("unknown section header `{other}`")));
                }
                _ => {}
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match section {
                Section::None => return Err(err("data before the first section header".into())),
                Section::Synsets => {
                    let [id, pos, lemmas] = fields[..] else {
                        return Err(err(format!("expected 3 fields, found {}", fields.len())));
                    };
                    if store.by_id.contains_key(id) {
                        return Err(err(format!("duplicate synset {id}")));
                    }
                    let pos_idx = match store.pos_ids.iter().position(|p| p == pos) {
                        Some(p) => p,
                        None => {
                            store.pos_ids.push(pos.to_string());
                            store.pos_ids.len() - 1
                        }
                    };
                    let idx = store.synsets.len();
                    let lemmas: Vec<String> = lemmas
                        .split(',')
                        .map(|l| l.trim().to_lowercase())
                        .filter(|l| !l.is_empty())
                        .collect();
                    for lemma in &lemmas {
                        let senses = store.lemma_index.entry(lemma.clone()).or_default();
                        if !senses.contains(&idx) {
                            senses.push(idx);
                        }
                    }
                    store.by_id.insert(id.to_string(), idx);
                    store.pos_of.push(pos_idx);
                    store.synsets.push(Synset {
                        id: id.to_string(),
                        pos: pos.to_string(),
                        lemmas,
                    });
                }
                Section::Hypernyms => {
                    let [child, parent] = fields[..] else {
                        return Err(err(format!("expected 2 fields, found {}", fields.len())));
                    };
                    hyper_edges.push((n, child.to_string(), parent.to_string()));
                }
                Section::Deriv => {
                    let [lemma, synset, rel_lemma, rel_synset] = fields[..] else {
                        return Err(err(format!("expected 4 fields, found {}", fields.len())));
                    };
                    deriv_rows.push((
                        n,
                        lemma.to_lowercase(),
                        synset.to_string(),
                        rel_lemma.to_lowercase(),
                        rel_synset.to_string(),
                    ));
                }
            }
        }

        let n = store.synsets.len();
        store.hypernyms = vec![Vec::new(); n];
        store.hyponyms = vec![Vec::new(); n];
        for (line, child, parent) in hyper_edges {
            let c = store.resolve(&child, line)?;
            let p = store.resolve(&parent, line)?;
            if store.pos_of[c] != store.pos_of[p] {
                return Err(Error::Parse {
                    line,
                    message: format!("hypernym edge {child} -> {parent} crosses POS"),
                });
            }
            if !store.hypernyms[c].contains(&p) {
                store.hypernyms[c].push(p);
                store.hyponyms[p].push(c);
            }
        }
        for (line, lemma, synset, rel_lemma, rel_synset) in deriv_rows {
            let s = store.resolve(&synset, line)?;
            let r = store.resolve(&rel_synset, line)?;
            store.derivations.entry((lemma, s)).or_default().push((rel_lemma, r));
        }
        store.check_acyclic()?;
        store.roots = vec![Vec::new(); store.pos_ids.len()];
        for s in 0..n {
            if store.hypernyms[s].is_empty() {
                store.roots[store.pos_of[s]].push(s);
            }
        }
        Ok(store)
    }

    fn resolve(&self, id: &str, line: usize) -> Result<usize> {
        self.by_id.get(id).copied().ok_or_else(|| Error::Parse {
            line,
            message: format!("unknown synset {id}"),
        })
    }

    fn check_acyclic(&self) -> Result<()> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.synsets.len()];
        for start in 0..self.synsets.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if let Some(&parent) = self.hypernyms[node].get(*next) {
                    *next += 1;
                    match state[parent] {
                        0 => {
                            state[parent] = 1;
                            stack.push((parent, 0));
                        }
                        1 => {
                            return Err(Error::Config(format!(
                                "hypernym cycle through synset {}",
                                self.synsets[parent].id
                            )))
                        }
                        _ => {}
                    }
                } else {
                    state[node] = 2;
                    stack.pop();
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn synset(&self, id: &str) -> Option<&Synset> {
        self.by_id.get(id).map(|&i| &self.synsets[i])
    }

    /// Senses of a lemma in rank order.
    pub fn senses(&self, lemma: &str) -> &[usize] {
        self.lemma_index
            .get(&lemma.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn synset_at(&self, idx: usize) -> &Synset {
        &self.synsets[idx]
    }

    pub fn direct_hypernyms(&self, idx: usize) -> &[usize] {
        &self.hypernyms[idx]
    }

    fn index(&self, id: &str) -> Result<usize> {
        self.by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownSynset(id.to_string()))
    }

    fn neighbours(&self, node: usize, out: &mut Vec<usize>) {
        out.clear();
        let n = self.synsets.len();
        if node >= n {
            out.extend_from_slice(&self.roots[node - n]);
        } else {
            out.extend_from_slice(&self.hypernyms[node]);
            out.extend_from_slice(&self.hyponyms[node]);
            if self.hypernyms[node].is_empty() {
                out.push(n + self.pos_of[node]);
            }
        }
    }

    /// Shortest undirected path length between two synsets, by
    /// level-synchronised bidirectional BFS.
    fn path_length(&self, a: usize, b: usize) -> Option<usize> {
        if a == b {
            return Some(0);
        }
        if self.pos_of[a] != self.pos_of[b] {
            return None;
        }
        let mut dist = [HashMap::from([(a, 0usize)]), HashMap::from([(b, 0usize)])];
        let mut frontier = [vec![a], vec![b]];
        let mut nbrs = Vec::new();
        loop {
            if frontier[0].is_empty() || frontier[1].is_empty() {
                return None;
            }
            let side = usize::from(frontier[1].len() < frontier[0].len());
            let other = 1 - side;
            let mut next = Vec::new();
            let mut best: Option<usize> = None;
            for &u in &frontier[side] {
                let du = dist[side][&u];
                self.neighbours(u, &mut nbrs);
                for &v in &nbrs {
                    if dist[side].contains_key(&v) {
                        continue;
                    }
                    dist[side].insert(v, du + 1);
                    next.push(v);
                    if let Some(&dv) = dist[other].get(&v) {
                        let total = du + 1 + dv;
                        best = Some(best.map_or(total, |b| b.min(total)));
                    }
                }
            }
            if best.is_some() {
                return best;
            }
            frontier[side] = next;
        }
    }

    fn sim_idx(&self, a: usize, b: usize) -> Similarity {
        match self.path_length(a, b) {
            Some(d) => Similarity::Known(1.0 / (1.0 + d as f64)),
            None => Similarity::Unknown,
        }
    }

    fn max_over(&self, left: &[usize], right: &[usize]) -> Similarity {
        let mut best = Similarity::Unknown;
        for &a in left {
            for &b in right {
                if self.pos_of[a] == self.pos_of[b] {
                    best = best.max(self.sim_idx(a, b));
                }
            }
        }
        best
    }

    /// `1 / (1 + d)` for the shortest path `d`; unknown across POS.
    pub fn path_similarity(&self, a: &str, b: &str) -> Result<Similarity> {
        Ok(self.sim_idx(self.index(a)?, self.index(b)?))
    }

    /// Best path similarity over all same-POS sense pairs of two words.
    pub fn max_sense_path_similarity(&self, w1: &str, w2: &str) -> Similarity {
        self.max_over(self.senses(w1), self.senses(w2))
    }

    /// Best path similarity between the direct hypernyms of any senses.
    pub fn hypernym_path_similarity(&self, w1: &str, w2: &str) -> Similarity {
        let hypernyms = |w: &str| {
            let mut out: Vec<usize> = Vec::new();
            for &s in self.senses(w) {
                for &h in &self.hypernyms[s] {
                    if !out.contains(&h) {
                        out.push(h);
                    }
                }
            }
            out
        };
        self.max_over(&hypernyms(w1), &hypernyms(w2))
    }

    /// Verb synsets reachable from a word: its own verb senses plus the verb
    /// targets of derivational links from any of its senses.
    pub fn derivational_verbs(&self, word: &str) -> Vec<usize> {
        let lemma = word.to_lowercase();
        let mut out: Vec<usize> = Vec::new();
        let push = |s: usize, out: &mut Vec<usize>| {
            if self.synsets[s].pos == VERB && !out.contains(&s) {
                out.push(s);
            }
        };
        for &s in self.senses(&lemma) {
            push(s, &mut out);
            if let Some(links) = self.derivations.get(&(lemma.clone(), s)) {
                for &(_, r) in links {
                    push(r, &mut out);
                }
            }
        }
        out
    }

    pub fn derivational_verb_path_similarity(&self, w1: &str, w2: &str) -> Similarity {
        self.max_over(&self.derivational_verbs(w1), &self.derivational_verbs(w2))
    }

    /// Every synset id paired with its POS, in file order.
    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        self.synsets.iter()
    }

    pub fn hypernym_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.hypernyms.iter().enumerate().flat_map(move |(c, ps)| {
            ps.iter()
                .map(move |&p| (self.synsets[c].id.as_str(), self.synsets[p].id.as_str()))
        })
    }
}

pub fn load_wordnet(path: &Path) -> Result<WordNetStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    WordNetStore::from_reader(BufReader::new(file))
}
