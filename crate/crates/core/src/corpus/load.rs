use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DocumentGraph, NodeRecord, Vocabulary};
use crate::{Error, NodeId, Result};

const CORPUS_FORMAT: &str = "hdtm-corpus";
const CORPUS_VERSION: u32 = 1;

/// A document graph with its vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub graph: DocumentGraph,
    pub vocabulary: Vocabulary,
}

#[derive(Serialize, Deserialize)]
struct CorpusFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    corpus: Corpus,
}

impl Corpus {
    pub fn to_json(&self) -> Result<String> {
        let file = CorpusFile {
            format: CORPUS_FORMAT.to_string(),
            version: CORPUS_VERSION,
            corpus: self.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: CorpusFile = serde_json::from_str(s)?;
        if file.format != CORPUS_FORMAT || file.version != CORPUS_VERSION {
            return Err(Error::Format(format!(
                "expected {CORPUS_FORMAT} v{CORPUS_VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        let corpus = file.corpus;
        if let Some(max) = corpus.graph.max_word_id() {
            if max as usize >= corpus.vocabulary.len() {
                return Err(Error::Format(format!(
                    "word id {max} outside vocabulary of size {}",
                    corpus.vocabulary.len()
                )));
            }
        }
        Ok(corpus)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// Counters from [`load_graph`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub documents: usize,
    pub edges: usize,
    pub total_tokens: usize,
    pub vocabulary_size: usize,
    /// Edges with an endpoint missing from the document file.
    pub dropped_edges: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

#[derive(Deserialize)]
struct DocLine {
    id: String,
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    text: String,
    #[serde(default)]
    categories: Vec<String>,
}

/// Lowercases and splits on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
}

fn read_lines(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

fn parse_pair(path: &Path, line: usize, l: &str) -> Result<(String, String)> {
    let mut parts = l.split('\t');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) if !a.trim().is_empty() && !b.trim().is_empty() => {
            Ok((a.trim().to_string(), b.trim().to_string()))
        }
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: "expected `source<TAB>target`".to_string(),
        }),
    }
}

/// Reads a `from<TAB>to` redirect file.
pub fn read_redirects(path: &Path) -> Result<Vec<(String, String)>> {
    read_edge_list(path)
}

/// Reads `source<TAB>target` pairs of external ids, skipping blank and `#` lines.
pub fn read_edge_list(path: &Path) -> Result<Vec<(String, String)>> {
    let text = read_lines(path)?;
    content_lines(&text)
        .map(|(i, l)| parse_pair(path, i, l))
        .collect()
}

/// Loads a document graph from an edge file and a JSON-lines document file.
///
/// Node ids are assigned by sorted external id and word ids by sorted word, so
/// the same inputs always produce the same graph.
pub fn load_graph(edge_file: &Path, doc_file: &Path, root: &str) -> Result<(Corpus, LoadReport)> {
    let docs_text = read_lines(doc_file)?;
    let mut docs: BTreeMap<String, DocLine> = BTreeMap::new();
    for (i, l) in docs_text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
    {
        let doc: DocLine = serde_json::from_str(l).map_err(|e| Error::Parse {
            path: doc_file.to_path_buf(),
            line: i,
            message: e.to_string(),
        })?;
        if docs.contains_key(&doc.id) {
            return Err(Error::DuplicateNode(doc.id));
        }
        docs.insert(doc.id.clone(), doc);
    }
    if !docs.contains_key(root) {
        return Err(Error::MissingRoot(root.to_string()));
    }

    let tokenized: Vec<Vec<String>> = docs.values().map(|d| tokenize(&d.text).collect()).collect();
    let words: BTreeSet<&str> = tokenized.iter().flatten().map(String::as_str).collect();
    let vocabulary = Vocabulary::from_words(words);

    let index: BTreeMap<&str, NodeId> = docs.keys().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    let mut report = LoadReport::default();

    let edges_text = read_lines(edge_file)?;
    let mut edges = BTreeSet::new();
    for (i, l) in content_lines(&edges_text) {
        let (src, dst) = parse_pair(edge_file, i, l)?;
        match (index.get(src.as_str()), index.get(dst.as_str())) {
            (Some(&u), Some(&v)) if u == v => report.self_loops += 1,
            (Some(&u), Some(&v)) => {
                if !edges.insert((u, v)) {
                    report.duplicate_edges += 1;
                }
            }
            _ => report.dropped_edges += 1,
        }
    }

    let root_id = index[root];
    drop(index);
    let nodes: Vec<NodeRecord> = docs
        .into_values()
        .zip(tokenized)
        .map(|(doc, toks)| NodeRecord {
            title: doc.title.unwrap_or_else(|| doc.id.clone()),
            tokens: toks
                .iter()
                .map(|w| vocabulary.id(w).expect("word collected above"))
                .collect(),
            categories: doc.categories.into_iter().collect(),
            external_id: doc.id,
        })
        .collect();
    let graph = DocumentGraph::new(nodes, edges, root_id)?;

    report.documents = graph.len();
    report.edges = graph.num_edges();
    report.total_tokens = graph.total_tokens();
    report.vocabulary_size = vocabulary.len();
    Ok((Corpus { graph, vocabulary }, report))
}
