use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use hdtm::corpus::{
    extract_root_component, load_graph, read_edge_list, read_redirects, resolve_redirects, Corpus,
    DocumentGraph,
};
use hdtm::eval::{self, BaselineKind, CategoryReference, CertaintyReport, JudgmentSet, SimpleGraph};
use hdtm::model::{
    hierarchy_dot, map_hierarchy, run_chain, write_diagnostics_csv, ChainSample, GibbsConfig,
    GibbsSampler, Hierarchy, Hyperparameters, MapExport, SampleFile, SamplerState,
};
use hdtm::parallel::{ParallelConfig, ParallelSampler};

use crate::manifest::{sidecar, ManifestBuilder};
use crate::{
    write_json, write_text, BaselineArgs, BaselineKindArg, CertaintyArgs, CliError, CliResult,
    IngestArgs, IntrusionArgs, JaccardArgs, PrecisionArgs, SimilarityArgs, TrainArgs,
};

fn usage(e: hdtm::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn load_corpus(path: &Path) -> CliResult<Corpus> {
    Ok(Corpus::load(path)?)
}

/// Any JSON file carrying `root` and `parent`, such as a MAP export or a baseline.
#[derive(Debug, Serialize, Deserialize)]
struct HierarchyFile {
    root: usize,
    parent: Vec<Option<usize>>,
}

fn load_hierarchy(path: &Path, graph: &DocumentGraph) -> CliResult<Hierarchy> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: HierarchyFile = serde_json::from_str(&text).map_err(hdtm::Error::from)?;
    let h = Hierarchy::from_parents(file.root, file.parent)?;
    h.validate(graph)?;
    Ok(h)
}

#[derive(Serialize)]
struct IngestStats<'a> {
    load: &'a hdtm::corpus::LoadReport,
    redirects: Option<hdtm::corpus::RedirectReport>,
    component: hdtm::corpus::ComponentReport,
    documents: usize,
    edges: usize,
    total_tokens: usize,
    vocabulary_size: usize,
}

pub fn ingest(a: &IngestArgs) -> CliResult<()> {
    let mut m = ManifestBuilder::new("ingest", a, None)?;
    m.input(&a.edges);
    m.input(&a.docs);
    let (corpus, load) = load_graph(&a.edges, &a.docs, &a.root)?;
    let mut graph = corpus.graph;
    let redirects = match &a.redirects {
        Some(p) => {
            m.input(p);
            let (g, r) = resolve_redirects(&graph, &read_redirects(p)?)?;
            graph = g;
            Some(r)
        }
        None => None,
    };
    let (graph, component) = extract_root_component(&graph);
    let stats = IngestStats {
        load: &load,
        redirects,
        component,
        documents: graph.len(),
        edges: graph.num_edges(),
        total_tokens: graph.total_tokens(),
        vocabulary_size: corpus.vocabulary.len(),
    };
    let corpus = Corpus {
        graph,
        vocabulary: corpus.vocabulary,
    };
    corpus.save(&a.out)?;
    m.output(&a.out);
    m.write(&sidecar(&a.out))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&stats).map_err(hdtm::Error::from)?
    );
    Ok(())
}

fn sample_path(dir: &Path, iteration: usize) -> PathBuf {
    dir.join(format!("sample-{iteration:06}.json"))
}

/// Removes sample files left by an earlier run into the same directory.
fn clear_samples(dir: &Path) -> CliResult<()> {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return Ok(());
    };
    for e in entries {
        let p = e.map_err(|e| CliError::io(dir, e))?.path();
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("sample-") && name.ends_with(".json") {
            std::fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary {
    iterations: usize,
    samples: usize,
    final_log_likelihood: Option<f64>,
    map_average_depth: f64,
    map_max_depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    parallel: Option<hdtm::parallel::ParallelStats>,
}

pub fn train(a: &TrainArgs) -> CliResult<()> {
    let hp = Hyperparameters::new(a.gamma, a.eta, a.alpha).map_err(usage)?;
    let mut config = GibbsConfig::new(a.iters, a.burnin, a.lag, a.seed).map_err(usage)?;
    config.top_words = a.top_words;
    let parallel = a
        .workers
        .map(|w| {
            let c = ParallelConfig {
                checkpoint_every: a.checkpoint_every,
                checkpoint_dir: a.checkpoint_dir.clone(),
                ..ParallelConfig::with_workers(w)
            };
            c.validate().map(|_| c)
        })
        .transpose()
        .map_err(usage)?;

    let mut m = ManifestBuilder::new("train", a, Some(a.seed))?;
    m.input(&a.corpus);
    let corpus = load_corpus(&a.corpus)?;
    let graph = Arc::new(corpus.graph.clone());
    let vocab_size = corpus.vocabulary.len();

    let samples_dir = a.out.join("samples");
    std::fs::create_dir_all(&samples_dir).map_err(|e| CliError::io(&samples_dir, e))?;
    clear_samples(&samples_dir)?;

    let mut write_err: Option<CliError> = None;
    let mut written = Vec::new();
    let mut on_sweep = |_: &_, sample: Option<&ChainSample>| {
        if let (Some(s), None) = (sample, &write_err) {
            let path = sample_path(&samples_dir, s.iteration);
            match write_json(&path, &SampleFile::new(s, &corpus.graph, &corpus.vocabulary)) {
                Ok(()) => written.push(path),
                Err(e) => write_err = Some(e),
            }
        }
    };
    let (samples, diagnostics, state, stats): (_, _, SamplerState, _) = match parallel {
        None => {
            let mut s = GibbsSampler::new(graph.clone(), vocab_size, hp, a.seed)?;
            let (samples, diag) = run_chain(&mut s, &config, &mut on_sweep)?;
            (samples, diag, s.into_parts().0, None)
        }
        Some(pc) => {
            let mut s = ParallelSampler::new(graph.clone(), vocab_size, hp, a.seed, pc)?;
            let (samples, diag) = run_chain(&mut s, &config, &mut on_sweep)?;
            let stats = s.stats().clone();
            (samples, diag, s.into_state(), Some(stats))
        }
    };
    if let Some(e) = write_err {
        return Err(e);
    }
    for p in &written {
        m.output(p);
    }

    let diag_path = a.out.join("diagnostics.csv");
    write_diagnostics_csv(&diag_path, &diagnostics)?;
    m.output(&diag_path);

    let map = map_hierarchy(&samples, &graph)?;
    let mut state = state;
    state.reparent_to(&map)?;
    let export = MapExport::new(&state, &corpus.vocabulary, a.top_words);
    let map_json = a.out.join("map.json");
    let map_dot = a.out.join("map.dot");
    write_json(&map_json, &export)?;
    write_text(&map_dot, &export.to_dot())?;
    m.output(&map_json);
    m.output(&map_dot);
    m.write(&a.out.join("manifest.json"))?;

    let summary = TrainSummary {
        iterations: diagnostics.len(),
        samples: samples.len(),
        final_log_likelihood: diagnostics.last().map(|d| d.log_likelihood),
        map_average_depth: map.average_depth(),
        map_max_depth: map.max_depth(),
        parallel: stats,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).map_err(hdtm::Error::from)?
    );
    Ok(())
}

fn read_samples(dir: &Path, corpus: &Corpus, m: &mut ManifestBuilder) -> CliResult<Vec<ChainSample>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Usage(format!("no sample files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            m.input(p);
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let file: SampleFile = serde_json::from_str(&text).map_err(hdtm::Error::from)?;
            Ok(file.to_sample(&corpus.graph, &corpus.vocabulary))
        })
        .collect()
}

fn with_csv(path: &Path) -> PathBuf {
    path.with_extension("csv")
}

pub fn certainty(a: &CertaintyArgs) -> CliResult<()> {
    let mut m = ManifestBuilder::new("eval certainty", a, None)?;
    m.input(&a.corpus);
    let corpus = load_corpus(&a.corpus)?;
    let samples = read_samples(&a.samples, &corpus, &mut m)?;
    let report = eval::certainty(&samples, &corpus.graph)?;
    write_json(&a.out, &report)?;
    let csv = with_csv(&a.out);
    write_text(&csv, &report.to_csv())?;
    m.output(&a.out);
    m.output(&csv);
    m.write(&sidecar(&a.out))?;
    let mean = report.nodes.iter().map(|n| n.certainty).sum::<f64>() / report.nodes.len().max(1) as f64;
    println!("nodes: {}, samples: {}, mean certainty: {mean}", report.nodes.len(), samples.len());
    Ok(())
}

pub fn jaccard(a: &JaccardArgs) -> CliResult<()> {
    let mut m = ManifestBuilder::new("eval jaccard", a, None)?;
    m.input(&a.corpus);
    m.input(&a.hierarchy);
    let corpus = load_corpus(&a.corpus)?;
    let h = load_hierarchy(&a.hierarchy, &corpus.graph)?;
    let reference = match &a.reference {
        Some(p) => {
            m.input(p);
            CategoryReference::read(p)?
        }
        None => CategoryReference::from_graph(&corpus.graph),
    };
    let certainty: Option<CertaintyReport> = match &a.certainty {
        Some(p) => {
            m.input(p);
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Some(serde_json::from_str(&text).map_err(hdtm::Error::from)?)
        }
        None => None,
    };
    let report = eval::jaccard_vs_reference(&h, &corpus.graph, &reference, certainty.as_ref(), a.bins)
        .map_err(usage)?;
    if report.nodes.is_empty() {
        eprintln!(
            "warning: no document has reference categories ({} absent, {} empty); all skipped",
            report.missing, report.empty
        );
    } else if report.missing > 0 {
        eprintln!("warning: {} documents absent from the reference were skipped", report.missing);
    }
    write_json(&a.out, &report)?;
    let csv = with_csv(&a.out);
    write_text(&csv, &report.to_csv())?;
    m.output(&a.out);
    m.output(&csv);
    m.write(&sidecar(&a.out))?;
    match report.mean {
        Some(mean) => println!("documents: {}, mean jaccard: {mean}", report.nodes.len()),
        None => println!("documents: 0"),
    }
    Ok(())
}

pub fn precision(a: &PrecisionArgs) -> CliResult<()> {
    let mut m = ManifestBuilder::new("eval precision", a, None)?;
    m.input(&a.judgments);
    let judgments = JudgmentSet::read(&a.judgments)?;
    let report = eval::model_precision(&judgments);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    write_json(&a.out, &report)?;
    let csv = with_csv(&a.out);
    write_text(&csv, &report.to_csv())?;
    m.output(&a.out);
    m.output(&csv);
    m.write(&sidecar(&a.out))?;
    for (model, b) in &report.summary {
        println!("{model}: tasks {}, median {}, mean {}", b.count, b.median, b.mean);
    }
    Ok(())
}

#[derive(Serialize)]
struct SimilarityReport {
    similarity: f64,
    nodes: usize,
    hierarchy_edges: usize,
    reference_edges: usize,
    groups: Option<usize>,
}

pub fn similarity(a: &SimilarityArgs) -> CliResult<()> {
    let mut m = ManifestBuilder::new("eval similarity", a, None)?;
    m.input(&a.corpus);
    m.input(&a.hierarchy);
    let corpus = load_corpus(&a.corpus)?;
    let h = load_hierarchy(&a.hierarchy, &corpus.graph)?;
    let ha = SimpleGraph::from_hierarchy(&h, &corpus.graph);
    let hb = match &a.reference {
        Some(p) => {
            m.input(p);
            SimpleGraph::new(Vec::<String>::new(), read_edge_list(p)?)
        }
        None => SimpleGraph::from_document_graph(&corpus.graph),
    };
    let s = eval::graph_similarity(&ha, &hb, a.groups).map_err(usage)?;
    let nodes = ha.nodes.union(&hb.nodes).count();
    let report = SimilarityReport {
        similarity: s,
        nodes,
        hierarchy_edges: ha.edges.len(),
        reference_edges: hb.edges.len(),
        groups: a.groups,
    };
    write_json(&a.out, &report)?;
    m.output(&a.out);
    m.write(&sidecar(&a.out))?;
    println!("similarity: {s}");
    Ok(())
}

pub fn intrusion(a: &IntrusionArgs) -> CliResult<()> {
    let mut m = ManifestBuilder::new("eval intrusion-gen", a, Some(a.seed))?;
    m.input(&a.corpus);
    m.input(&a.hierarchy);
    let corpus = load_corpus(&a.corpus)?;
    let h = load_hierarchy(&a.hierarchy, &corpus.graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let tasks = eval::generate_intrusion_tasks(&h, &corpus.graph, a.count, &mut rng)?;
    let mut text = String::new();
    for t in &tasks {
        text.push_str(&serde_json::to_string(t).map_err(hdtm::Error::from)?);
        text.push('\n');
    }
    write_text(&a.out, &text)?;
    m.output(&a.out);
    m.write(&sidecar(&a.out))?;
    println!("tasks: {}", tasks.len());
    Ok(())
}

#[derive(Serialize)]
struct BaselineFile<'a> {
    kind: BaselineKindArg,
    seed: u64,
    root: usize,
    parent: &'a [Option<usize>],
    ids: Vec<&'a str>,
}

pub fn baseline(a: &BaselineArgs) -> CliResult<()> {
    let mut m = ManifestBuilder::new("eval baseline", a, Some(a.seed))?;
    m.input(&a.corpus);
    let corpus = load_corpus(&a.corpus)?;
    let kind = match a.kind {
        BaselineKindArg::Bfs => BaselineKind::Bfs,
        BaselineKindArg::RandomParent => BaselineKind::RandomParent,
    };
    let h = eval::baseline_hierarchy(&corpus.graph, kind, a.seed)?;
    let file = BaselineFile {
        kind: a.kind,
        seed: a.seed,
        root: h.root(),
        parent: h.parents(),
        ids: corpus.graph.nodes().iter().map(|n| n.external_id.as_str()).collect(),
    };
    write_json(&a.out, &file)?;
    let dot = a.out.with_extension("dot");
    write_text(&dot, &hierarchy_dot(&h, &corpus.graph))?;
    m.output(&a.out);
    m.output(&dot);
    m.write(&sidecar(&a.out))?;
    println!("nodes: {}, max depth: {}, average depth: {}", h.len(), h.max_depth(), h.average_depth());
    Ok(())
}
