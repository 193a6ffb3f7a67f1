//! Batch commands: ingest, analyze, replay, synthetic logs, and pack loading.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use parlor_core::content::bundled;
use parlor_core::content::{PackDocument, TopicRegistry};
use parlor_core::dialogue::{Engine, EngineConfig};
use parlor_core::gateway::replay::{replay, Transcript};
use parlor_core::gateway::SessionManager;
use parlor_core::ingest::{build_pack, filter_posts, FileDump, IngestConfig, KeywordMap, PostSource};
use parlor_core::telemetry::{summarize, synthesize, ConversationLog, Report, SynthConfig};

/// Sorted `*.jsonl` files directly inside `dir`.
fn jsonl_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

/// Merges every pack in `dir`, in file-name order.
pub fn load_packs(dir: &Path) -> Result<PackDocument> {
    let files = jsonl_files(dir)?;
    if files.is_empty() {
        bail!("no *.jsonl packs in {}", dir.display());
    }
    let mut doc = PackDocument::default();
    for f in files {
        let src = fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
        doc.merge(PackDocument::parse(&src).with_context(|| format!("pack {}", f.display()))?);
    }
    Ok(doc)
}

/// Engine over `packs`, or over the bundled packs when none is given.
pub fn build_engine(packs: Option<&Path>, seed: u64) -> Result<Engine> {
    let doc = match packs {
        Some(dir) => load_packs(dir)?,
        None => bundled::document(),
    };
    let config = EngineConfig {
        seed,
        ..Default::default()
    };
    Ok(Engine::from_document(&doc, config)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub accepted: usize,
    pub rejected: usize,
    pub items: usize,
}

/// Filters a post dump into a pack; rejects go to `report`, one JSON object
/// per line with the post and its reason.
pub fn ingest(input: &Path, config: Option<&Path>, out: &Path, report: &Path) -> Result<IngestSummary> {
    let cfg = match config {
        Some(p) => IngestConfig::from_toml(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => IngestConfig::default(),
    };
    let posts = FileDump(input.to_path_buf()).posts()?;
    let outcome = filter_posts(posts, &cfg.filter);
    let registry = TopicRegistry::builtin();
    let mut keywords = KeywordMap::from_registry(&registry);
    keywords.extend(&registry, &cfg.pack.keywords)?;
    let doc = build_pack(&outcome.accepted, Vec::new(), &registry, &keywords, &cfg.pack)?;
    fs::write(out, doc.to_jsonl()).with_context(|| format!("writing {}", out.display()))?;
    let mut rejects = String::new();
    for (post, reason) in &outcome.rejected {
        let line = serde_json::json!({ "reason": reason, "post": post });
        let _ = writeln!(rejects, "{line}");
    }
    fs::write(report, rejects).with_context(|| format!("writing {}", report.display()))?;
    Ok(IngestSummary {
        accepted: outcome.accepted.len(),
        rejected: outcome.rejected.len(),
        items: doc.items.len(),
    })
}

/// JSON companion of a report file: `report.txt` → `report.json`.
pub fn json_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Summarizes every log in `logs`; writes the table to `out` and the JSON
/// document beside it.
pub fn analyze(logs: &Path, out: &Path) -> Result<Report> {
    let log = ConversationLog::read_dir(logs)?;
    let report = summarize(&log);
    fs::write(out, report.render_table()).with_context(|| format!("writing {}", out.display()))?;
    let json = json_path(out);
    fs::write(&json, report.to_json()).with_context(|| format!("writing {}", json.display()))?;
    Ok(report)
}

/// Replays a transcript; one line per system turn: activity, source, text.
pub fn replay_file(engine: &Engine, transcript: &Path) -> Result<String> {
    let src = fs::read_to_string(transcript).with_context(|| format!("reading {}", transcript.display()))?;
    let t: Transcript = src.parse()?;
    let run = replay(engine, &t);
    let mut out = format!("A0\t{}\t{}\t{}\n", run.greeting.signature.activity.as_str(), run.greeting.signature.source_id, run.greeting.text);
    for (i, turn) in run.turns.iter().enumerate() {
        let _ = writeln!(out, "A{}\t{}\t{}\t{}", i + 1, turn.signature.activity.as_str(), turn.signature.source_id, turn.text);
    }
    if let Some(expect) = &t.expect {
        let got = run.activities();
        if &got != expect {
            bail!("activity mismatch: expected {expect:?}, got {got:?}");
        }
    }
    Ok(out)
}

/// Writes a synthetic log with the given config to `out`.
pub fn synth_logs(cfg: &SynthConfig, out: &Path) -> Result<usize> {
    let log = synthesize(cfg)?;
    let mut f = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    log.write(&mut f)?;
    Ok(log.turns.len() + log.ratings.len())
}

/// Terminal chat over a local session. `/rate N` rates, `/quit` ends.
pub fn chat(manager: &SessionManager, input: impl BufRead, mut output: impl Write) -> Result<()> {
    let (id, greeting) = manager.open()?;
    writeln!(output, "{}", greeting.text)?;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "/quit" {
            break;
        }
        if let Some(n) = line.strip_prefix("/rate") {
            match n.trim().parse::<i64>() {
                Ok(n) => match manager.rate(&id, n) {
                    Ok(()) => writeln!(output, "Thanks for rating!")?,
                    Err(e) => writeln!(output, "error: {e}")?,
                },
                Err(_) => writeln!(output, "usage: /rate 1-5")?,
            }
            continue;
        }
        match manager.user_turn(&id, line, None) {
            Ok(turn) => writeln!(output, "{}", turn.text)?,
            Err(e) => writeln!(output, "error: {e}")?,
        }
    }
    let _ = manager.close(&id);
    Ok(())
}
