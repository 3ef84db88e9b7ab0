//! ECB+ XML adapter.
//!
//! Tokens carry `t_id`, `sentence` and `number` attributes. Event markables
//! are the `ACTION_*` and `NEG_ACTION_*` elements under `<Markables>` that
//! hold `<token_anchor>` children; anchorless markables with an
//! `instance_id` or `TAG_DESCRIPTOR` are chain placeholders used as
//! relation targets. `<CROSS_DOC_COREF>` relations give CD chains (keyed by
//! the target's `instance_id`), `<INTRA_DOC_COREF>` relations give WD
//! chains.
//!
//! Lemma is the lowercased surface form and POS is `UNK`; the head is chosen
//! with [`crate::featurize::head_word_index`].

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use quick_xml::escape::resolve_xml_entity;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{Corpus, Document, Mention, Sentence, SubTopic, Token};
use crate::error::{Error, Result};
use crate::featurize::head_word_index;

/// A parsed document plus the counts of repairs made while reading it.
#[derive(Clone, Debug)]
pub struct EcbParse {
    pub document: Document,
    /// Event markables dropped because their anchors were missing, unknown
    /// or spread over several sentences.
    pub dropped_markables: usize,
    /// Tokens with empty text, replaced by `_`.
    pub empty_tokens: usize,
}

struct RawToken {
    t_id: String,
    sentence: usize,
    text: String,
}

#[derive(Default)]
struct RawMarkable {
    tag: String,
    m_id: String,
    anchors: Vec<String>,
    instance_id: Option<String>,
    descriptor: bool,
}

#[derive(Default)]
struct RawRelation {
    tag: String,
    r_id: String,
    note: Option<String>,
    sources: Vec<String>,
    target: Option<String>,
}

fn is_event_tag(tag: &str) -> bool {
    tag.starts_with("ACTION_") || tag.starts_with("NEG_ACTION_")
}

fn attr(e: &BytesStart<'_>, name: &str, offset: u64) -> Result<Option<String>> {
    let xml_err = |message: String| Error::Xml { offset, message };
    match e.try_get_attribute(name).map_err(|err| xml_err(err.to_string()))? {
        Some(a) => Ok(Some(
            a.unescape_value()
                .map_err(|err| xml_err(err.to_string()))?
                .into_owned(),
        )),
        None => Ok(None),
    }
}

/// Splits an ECB+ file name such as `12_3ecbplus.xml` into its document id,
/// topic and sub-topic.
fn doc_identity(doc_name: &str) -> Result<(String, u32, SubTopic)> {
    let doc_id = doc_name.strip_suffix(".xml").unwrap_or(doc_name).to_string();
    let topic = doc_id
        .split('_')
        .next()
        .and_then(|t| t.parse::<u32>().ok())
        .ok_or_else(|| Error::Structure {
            doc: doc_name.to_string(),
            message: "file name does not start with a topic number".into(),
        })?;
    let sub_topic = if doc_id.ends_with("ecbplus") {
        SubTopic::EcbPlus
    } else {
        SubTopic::Ecb
    };
    Ok((doc_id, topic, sub_topic))
}

/// Parses one ECB+ XML document.
pub fn parse_ecb_document(xml: &[u8], doc_name: &str) -> Result<EcbParse> {
    let (doc_id, topic, sub_topic) = doc_identity(doc_name)?;

    let mut reader = Reader::from_reader(xml);
    let mut stack: Vec<String> = Vec::new();
    let mut tokens: Vec<RawToken> = Vec::new();
    let mut markables: Vec<RawMarkable> = Vec::new();
    let mut relations: Vec<RawRelation> = Vec::new();
    let mut token: Option<RawToken> = None;
    let mut markable: Option<RawMarkable> = None;
    let mut relation: Option<RawRelation> = None;
    let mut buf = Vec::new();

    loop {
        let offset = reader.buffer_position();
        let event = reader.read_event_into(&mut buf).map_err(|e| Error::Xml {
            offset: reader.error_position(),
            message: e.to_string(),
        })?;
        let xml_err = |message: String| Error::Xml { offset, message };
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                let parent = stack.last().map(String::as_str);
                match (parent, name.as_str()) {
                    (_, "token") if markable.is_none() && relation.is_none() => {
                        let t_id = attr(e, "t_id", offset)?
                            .ok_or_else(|| xml_err("token without t_id".into()))?;
                        let sentence = attr(e, "sentence", offset)?
                            .and_then(|s| s.trim().parse().ok())
                            .ok_or_else(|| xml_err(format!("token {t_id} has no numeric sentence")))?;
                        token = Some(RawToken {
                            t_id,
                            sentence,
                            text: String::new(),
                        });
                    }
                    (Some("Markables"), tag) => {
                        markable = Some(RawMarkable {
                            tag: tag.to_string(),
                            m_id: attr(e, "m_id", offset)?
                                .ok_or_else(|| xml_err(format!("<{tag}> without m_id")))?,
                            instance_id: attr(e, "instance_id", offset)?,
                            descriptor: attr(e, "TAG_DESCRIPTOR", offset)?.is_some(),
                            ..Default::default()
                        });
                    }
                    (Some(_), "token_anchor") => {
                        if let (Some(m), Some(t)) = (markable.as_mut(), attr(e, "t_id", offset)?) {
                            m.anchors.push(t);
                        }
                    }
                    (Some("Relations"), tag) => {
                        relation = Some(RawRelation {
                            tag: tag.to_string(),
                            r_id: attr(e, "r_id", offset)?.unwrap_or_default(),
                            note: attr(e, "note", offset)?,
                            ..Default::default()
                        });
                    }
                    (Some(_), "source" | "target") => {
                        if let Some(r) = relation.as_mut() {
                            let m_id = attr(e, "m_id", offset)?
                                .ok_or_else(|| xml_err(format!("<{name}> without m_id")))?;
                            if name == "source" {
                                r.sources.push(m_id);
                            } else {
                                r.target = Some(m_id);
                            }
                        }
                    }
                    _ => {}
                }
                if is_empty {
                    close(&name, &mut token, &mut markable, &mut relation, &mut tokens, &mut markables, &mut relations);
                } else {
                    stack.push(name);
                }
            }
            Event::End(ref e) => {
                let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                stack.pop();
                close(&name, &mut token, &mut markable, &mut relation, &mut tokens, &mut markables, &mut relations);
            }
            Event::Text(ref t) => {
                if let Some(tok) = token.as_mut() {
                    tok.text.push_str(&t.decode().map_err(|e| xml_err(e.to_string()))?);
                }
            }
            Event::CData(ref t) => {
                if let Some(tok) = token.as_mut() {
                    tok.text.push_str(&String::from_utf8_lossy(t));
                }
            }
            Event::GeneralRef(ref r) => {
                if let Some(tok) = token.as_mut() {
                    if let Some(c) = r.resolve_char_ref().map_err(|e| xml_err(e.to_string()))? {
                        tok.text.push(c);
                    } else {
                        let name = r.decode().map_err(|e| xml_err(e.to_string()))?;
                        let resolved = resolve_xml_entity(&name)
                            .ok_or_else(|| xml_err(format!("unknown entity &{name};")))?;
                        tok.text.push_str(resolved);
                    }
                }
            }
            Event::Eof => {
                if let Some(open) = stack.last() {
                    return Err(Error::Xml {
                        offset: reader.buffer_position(),
                        message: format!("unexpected end of input inside <{open}>"),
                    });
                }
                break;
            }
            _ => {}
        }
        buf.clear();
    }

    if tokens.is_empty() && markables.is_empty() {
        return Err(Error::Xml {
            offset: 0,
            message: "no ECB+ content found".into(),
        });
    }

    assemble(doc_id, topic, sub_topic, tokens, markables, relations)
}

#[allow(clippy::too_many_arguments)]
fn close(
    name: &str,
    token: &mut Option<RawToken>,
    markable: &mut Option<RawMarkable>,
    relation: &mut Option<RawRelation>,
    tokens: &mut Vec<RawToken>,
    markables: &mut Vec<RawMarkable>,
    relations: &mut Vec<RawRelation>,
) {
    if name == "token" && token.is_some() {
        tokens.extend(token.take());
    } else if markable.as_ref().is_some_and(|m| m.tag == name) {
        markables.extend(markable.take());
    } else if relation.as_ref().is_some_and(|r| r.tag == name) {
        relations.extend(relation.take());
    }
}

/// Minimal union-find over mention positions, local to one document.
fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn assemble(
    doc_id: String,
    topic: u32,
    sub_topic: SubTopic,
    raw_tokens: Vec<RawToken>,
    markables: Vec<RawMarkable>,
    relations: Vec<RawRelation>,
) -> Result<EcbParse> {
    // Sentences keep their ECB+ numbers; gaps become empty sentences.
    let mut by_sentence: BTreeMap<usize, Vec<RawToken>> = BTreeMap::new();
    for t in raw_tokens {
        by_sentence.entry(t.sentence).or_default().push(t);
    }
    let n_sentences = by_sentence.keys().next_back().map_or(0, |&s| s + 1);
    let mut sentences: Vec<Sentence> = (0..n_sentences)
        .map(|index| Sentence {
            index,
            tokens: Vec::new(),
        })
        .collect();
    let mut position: HashMap<String, (usize, usize)> = HashMap::new();
    let mut empty_tokens = 0;
    for (s, toks) in by_sentence {
        for (i, t) in toks.into_iter().enumerate() {
            let mut text = t.text.trim().to_string();
            if text.is_empty() {
                empty_tokens += 1;
                text = "_".into();
            }
            position.insert(t.t_id, (s, i));
            sentences[s].tokens.push(Token {
                index: i,
                lemma: text.to_lowercase(),
                text,
                pos: "UNK".into(),
            });
        }
    }

    let mut known_markables: HashMap<&str, &RawMarkable> = HashMap::new();
    for m in &markables {
        known_markables.insert(&m.m_id, m);
    }

    let mut mentions: Vec<Mention> = Vec::new();
    let mut by_mid: HashMap<&str, usize> = HashMap::new();
    let mut dropped = 0;
    for m in markables.iter().filter(|m| is_event_tag(&m.tag)) {
        if m.anchors.is_empty() {
            if m.instance_id.is_none() && !m.descriptor {
                log::warn!("{doc_id}: event markable {} has no token anchors; dropped", m.m_id);
                dropped += 1;
            }
            continue;
        }
        let resolved: Option<Vec<(usize, usize)>> =
            m.anchors.iter().map(|t| position.get(t).copied()).collect();
        let Some(resolved) = resolved else {
            log::warn!("{doc_id}: markable {} anchors an unknown token; dropped", m.m_id);
            dropped += 1;
            continue;
        };
        let sentence = resolved[0].0;
        if resolved.iter().any(|&(s, _)| s != sentence) {
            log::warn!("{doc_id}: markable {} spans several sentences; dropped", m.m_id);
            dropped += 1;
            continue;
        }
        let start = resolved.iter().map(|p| p.1).min().unwrap();
        let end = resolved.iter().map(|p| p.1).max().unwrap();
        let head = head_word_index(&sentences[sentence].tokens, (start, end));
        by_mid.insert(&m.m_id, mentions.len());
        mentions.push(Mention {
            id: format!("{doc_id}:{}", m.m_id),
            doc_id: doc_id.clone(),
            sentence_index: sentence,
            span: (start, end),
            head_index: head,
            wd_chain: None,
            cd_chain: None,
        });
    }

    // Chain labels straight from the relations.
    let mut wd_label: Vec<Option<String>> = vec![None; mentions.len()];
    let mut cd_label: Vec<Option<String>> = vec![None; mentions.len()];
    for r in &relations {
        let cross = match r.tag.as_str() {
            "CROSS_DOC_COREF" => true,
            "INTRA_DOC_COREF" => false,
            _ => continue,
        };
        let target = r.target.as_deref().and_then(|t| known_markables.get(t).copied());
        if let Some(t) = target {
            if !is_event_tag(&t.tag) {
                continue;
            }
        }
        for source in &r.sources {
            let Some(src) = known_markables.get(source.as_str()) else {
                return Err(Error::Structure {
                    doc: doc_id.clone(),
                    message: format!("relation {} references unknown markable {source}", r.r_id),
                });
            };
            if !is_event_tag(&src.tag) {
                continue;
            }
            let Some(&k) = by_mid.get(source.as_str()) else {
                continue;
            };
            if cross {
                let chain = target
                    .and_then(|t| t.instance_id.clone())
                    .or_else(|| r.note.clone())
                    .unwrap_or_else(|| format!("{doc_id}/r{}", r.r_id));
                cd_label[k] = Some(chain);
            } else {
                let t = r.target.clone().unwrap_or_else(|| format!("r{}", r.r_id));
                wd_label[k] = Some(t);
            }
        }
    }

    // WD chains: mentions linked by an intra-document relation or sharing a
    // CD chain are the same within-document event.
    let n = mentions.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut first_by_label: HashMap<(bool, &str), usize> = HashMap::new();
    for k in 0..n {
        let labels = [(false, wd_label[k].as_deref()), (true, cd_label[k].as_deref())];
        for (is_cd, label) in labels {
            if let Some(label) = label {
                match first_by_label.get(&(is_cd, label)) {
                    Some(&j) => {
                        let (a, b) = (find(&mut parent, j), find(&mut parent, k));
                        parent[a.max(b)] = a.min(b);
                    }
                    None => {
                        first_by_label.insert((is_cd, label), k);
                    }
                }
            }
        }
    }
    let mut component_labels: BTreeMap<usize, (Vec<String>, Vec<String>)> = BTreeMap::new();
    for k in 0..n {
        let root = find(&mut parent, k);
        let entry = component_labels.entry(root).or_default();
        entry.0.extend(wd_label[k].iter().map(|l| format!("w{l}")));
        entry.0.extend(cd_label[k].iter().map(|l| format!("c{l}")));
        entry.1.extend(cd_label[k].iter().cloned());
    }
    for k in 0..n {
        let root = find(&mut parent, k);
        let (labels, cds) = &component_labels[&root];
        if let Some(first) = labels.iter().min() {
            mentions[k].wd_chain = Some(format!("{doc_id}/{first}"));
        }
        let mut distinct = cds.clone();
        distinct.sort();
        distinct.dedup();
        mentions[k].cd_chain = match distinct.len() {
            0 => None,
            1 => Some(distinct.remove(0)),
            _ => cd_label[k].clone(),
        };
    }

    Ok(EcbParse {
        document: Document {
            doc_id,
            topic,
            sub_topic,
            sentences,
            mentions,
        },
        dropped_markables: dropped,
        empty_tokens,
    })
}

/// Loads every `*.xml` file below `dir` in (topic, sub-topic, document
/// number) order and validates the result as one corpus.
pub fn load_ecb_dir(dir: &Path) -> Result<(Corpus, usize)> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir) {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            Error::io(path, e.into())
        })?;
        let path = entry.path();
        if entry.file_type().is_file() && path.extension().is_some_and(|x| x == "xml") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            files.push((sort_key(&name), name, path.to_path_buf()));
        }
    }
    files.sort();

    let mut documents = Vec::with_capacity(files.len());
    let mut dropped = 0;
    for (_, name, path) in files {
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let parsed = parse_ecb_document(&bytes, &name).map_err(|e| Error::Structure {
            doc: path.display().to_string(),
            message: e.to_string(),
        })?;
        dropped += parsed.dropped_markables;
        documents.push(parsed.document);
    }
    Ok((Corpus::new(documents)?, dropped))
}

fn sort_key(name: &str) -> (u32, bool, u32, String) {
    let stem = name.strip_suffix(".xml").unwrap_or(name);
    let (topic, rest) = stem.split_once('_').unwrap_or((stem, ""));
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    (
        topic.parse().unwrap_or(u32::MAX),
        rest.ends_with("ecbplus"),
        digits.parse().unwrap_or(u32::MAX),
        name.to_string(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"<?xml version='1.0' encoding='UTF-8'?>
<Document doc_name="1_1ecb.xml" doc_id="DOC1">
<token t_id="1" sentence="0" number="0">Lindsay</token>
<token t_id="2" sentence="0" number="1">Lohan</token>
<token t_id="3" sentence="0" number="2">has</token>
<token t_id="4" sentence="0" number="3">checked</token>
<token t_id="5" sentence="0" number="4">into</token>
<token t_id="6" sentence="1" number="0">She</token>
<token t_id="7" sentence="1" number="1">entered</token>
<token t_id="8" sentence="1" number="2">rehab</token>
<token t_id="9" sentence="1" number="3">&amp;</token>
<Markables>
<ACTION_OCCURRENCE m_id="10" note="x">
<token_anchor t_id="4"/>
<token_anchor t_id="5"/>
</ACTION_OCCURRENCE>
<ACTION_OCCURRENCE m_id="11">
<token_anchor t_id="7"/>
</ACTION_OCCURRENCE>
<HUMAN_PART_PER m_id="12">
<token_anchor t_id="1"/>
<token_anchor t_id="2"/>
</HUMAN_PART_PER>
<ACTION_OCCURRENCE m_id="13">
<token_anchor t_id="99"/>
</ACTION_OCCURRENCE>
<ACTION_OCCURRENCE m_id="20" RELATED_TO="" TAG_DESCRIPTOR="t1_checkin" instance_id="ACT123"/>
<HUMAN_PART_PER m_id="21" RELATED_TO="" TAG_DESCRIPTOR="lohan" instance_id="HUM1"/>
</Markables>
<Relations>
<CROSS_DOC_COREF r_id="30" note="ACT123">
<source m_id="10"/>
<source m_id="11"/>
<target m_id="20"/>
</CROSS_DOC_COREF>
<CROSS_DOC_COREF r_id="31" note="HUM1">
<source m_id="12"/>
<target m_id="21"/>
</CROSS_DOC_COREF>
</Relations>
</Document>
"#;

    #[test]
    fn parses_tokens_markables_and_chains() {
        let parsed = parse_ecb_document(DOC.as_bytes(), "1_1ecb.xml").unwrap();
        let doc = &parsed.document;
        assert_eq!(doc.doc_id, "1_1ecb");
        assert_eq!(doc.topic, 1);
        assert_eq!(doc.sub_topic, SubTopic::Ecb);
        assert_eq!(doc.sentences.len(), 2);
        assert_eq!(doc.sentences[1].tokens[3].text, "&");
        assert_eq!(doc.mentions.len(), 2);
        assert_eq!(parsed.dropped_markables, 1);

        let checked = &doc.mentions[0];
        assert_eq!(checked.id, "1_1ecb:10");
        assert_eq!(checked.span, (3, 4));
        assert_eq!((checked.sentence_index, checked.head_index), (0, 4));
        for m in &doc.mentions {
            assert_eq!(m.cd_chain.as_deref(), Some("ACT123"));
        }
        assert_eq!(doc.mentions[0].wd_chain, doc.mentions[1].wd_chain);
        assert!(doc.mentions[0].wd_chain.is_some());
        Corpus::new(vec![doc.clone()]).unwrap();
    }

    #[test]
    fn single_markable_span() {
        let xml = r#"<Document doc_name="3_2ecbplus.xml">
<token t_id="1" sentence="0" number="0">a</token>
<token t_id="2" sentence="1" number="0">b</token>
<token t_id="3" sentence="1" number="1">c</token>
<token t_id="4" sentence="1" number="2">d</token>
<token t_id="5" sentence="1" number="3">e</token>
<token t_id="6" sentence="1" number="4">f</token>
<Markables><ACTION_OCCURRENCE m_id="1"><token_anchor t_id="5"/><token_anchor t_id="6"/></ACTION_OCCURRENCE></Markables>
<Relations/>
</Document>"#;
        let doc = parse_ecb_document(xml.as_bytes(), "3_2ecbplus.xml").unwrap().document;
        assert_eq!(doc.sub_topic, SubTopic::EcbPlus);
        assert_eq!(doc.topic, 3);
        assert_eq!(doc.mentions.len(), 1);
        assert_eq!(doc.mentions[0].span, (3, 4));
        assert_eq!(doc.mentions[0].wd_chain, None);
    }

    #[test]
    fn intra_doc_relation_builds_wd_chain() {
        let xml = r#"<Document doc_name="2_1ecb.xml">
<token t_id="1" sentence="0" number="0">fired</token>
<token t_id="2" sentence="0" number="1">dismissal</token>
<token t_id="3" sentence="0" number="2">ok</token>
<Markables>
<ACTION_OCCURRENCE m_id="1"><token_anchor t_id="1"/></ACTION_OCCURRENCE>
<ACTION_OCCURRENCE m_id="2"><token_anchor t_id="2"/></ACTION_OCCURRENCE>
<ACTION_OCCURRENCE m_id="3"><token_anchor t_id="3"/></ACTION_OCCURRENCE>
<ACTION_OCCURRENCE m_id="9" TAG_DESCRIPTOR="t2_fire"/>
</Markables>
<Relations>
<INTRA_DOC_COREF r_id="5"><source m_id="1"/><source m_id="2"/><target m_id="9"/></INTRA_DOC_COREF>
</Relations>
</Document>"#;
        let doc = parse_ecb_document(xml.as_bytes(), "2_1ecb.xml").unwrap().document;
        assert_eq!(doc.mentions[0].wd_chain, doc.mentions[1].wd_chain);
        assert!(doc.mentions[0].wd_chain.is_some());
        assert_eq!(doc.mentions[2].wd_chain, None);
        assert!(doc.mentions.iter().all(|m| m.cd_chain.is_none()));
    }

    #[test]
    fn truncated_xml_is_a_parse_error() {
        let cut = &DOC[..DOC.len() / 2];
        assert!(matches!(
            parse_ecb_document(cut.as_bytes(), "1_1ecb.xml"),
            Err(Error::Xml { .. })
        ));
    }

    #[test]
    fn mismatched_tag_reports_offset() {
        let xml = "<Document><token t_id=\"1\" sentence=\"0\">a</tok></Document>";
        match parse_ecb_document(xml.as_bytes(), "1_1ecb.xml") {
            Err(Error::Xml { offset, .. }) => assert!(offset > 0),
            other => panic!("expected XML error, got {other:?}"),
        }
    }

    #[test]
    fn dangling_relation_source_names_markable() {
        let xml = DOC.replace(r#"<source m_id="11"/>"#, r#"<source m_id="77"/>"#);
        let err = parse_ecb_document(xml.as_bytes(), "1_1ecb.xml").unwrap_err();
        assert!(matches!(err, Error::Structure { .. }));
        assert!(err.to_string().contains("77"), "{err}");
    }

    #[test]
    fn file_order_is_numeric() {
        let mut names = ["1_10ecb.xml", "1_2ecbplus.xml", "1_2ecb.xml", "10_1ecb.xml", "2_1ecb.xml"];
        names.sort_by_key(|n| sort_key(n));
        assert_eq!(names, ["1_2ecb.xml", "1_10ecb.xml", "1_2ecbplus.xml", "2_1ecb.xml", "10_1ecb.xml"]);
    }
}
