//! End-to-end checks shared by the integration suites and the acceptance
//! runner. Each returns a one-line summary on success.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use parlor_core::activity::{Activity, Signature};
use parlor_core::content::{bundled, ContentItem, ContentStore, Genre, Payload, Topic};
use parlor_core::dialogue::rank::order;
use parlor_core::dialogue::{rank, Candidate, DialogueContext, Engine, EngineConfig, RankWeights, ScoreParts, SystemTurn, Tier};
use parlor_core::gateway::replay::{replay, Transcript};
use parlor_core::nlu::{Intent, NluResult, UserUtterance};
use parlor_core::storytelling::{self, Installment, Story, StoryKind, StoryStep};
use parlor_core::telemetry::report::module_label;
use parlor_core::telemetry::{self, ConversationLog, SynthConfig};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

pub type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// --------------------------------------------------------------- transcripts

pub fn transcript_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("transcripts")
}

pub fn load_transcript(name: &str) -> Transcript {
    let src = std::fs::read_to_string(transcript_dir().join(name)).expect("transcript exists");
    src.parse().expect("transcript parses")
}

/// Replays `name` and checks its expected activities and runtime.
pub fn replay_transcript(engine: &Engine, name: &str) -> Result<(Vec<SystemTurn>, Duration), String> {
    let t = load_transcript(name);
    let start = Instant::now();
    let run = replay(engine, &t);
    let took = start.elapsed();
    if let Some(expect) = &t.expect {
        ensure(&run.activities() == expect, || format!("{name}: activities {:?}, expected {expect:?}", run.activities()))?;
    }
    ensure(took < Duration::from_secs(1), || format!("{name}: replay took {took:?}"))?;
    Ok((run.turns, took))
}

fn story_of<'a>(engine: &'a Engine, id: &str) -> Option<&'a Story> {
    match &engine.store().get(id)?.payload {
        Payload::Story(s) => Some(s),
        _ => None,
    }
}

pub fn check_transcripts() -> Check {
    let engine = Engine::bundled(EngineConfig::default());
    let mut slowest = Duration::ZERO;
    let mut names: Vec<String> = std::fs::read_dir(transcript_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".txt"))
        .collect();
    names.sort();
    for name in &names {
        let (_, took) = replay_transcript(&engine, name)?;
        slowest = slowest.max(took);
    }

    let (dino, _) = replay_transcript(&engine, "dinosaur_would_you_rather.txt")?;
    let acts: Vec<Activity> = dino.iter().map(|t| t.signature.activity).collect();
    ensure(acts[4] == Activity::Chitchat && acts[5] == Activity::Games, || {
        format!("dinosaur transcript: switch not at the sixth response: {acts:?}")
    })?;

    let (dream, _) = replay_transcript(&engine, "scifi_dream.txt")?;
    let mut installments = 0;
    for t in dream.iter().filter(|t| t.signature.activity == Activity::Storytelling) {
        let story = story_of(&engine, &t.signature.source_id).ok_or("story turn without story record")?;
        let last = story.installments.len() - 1;
        if let Some(i) = story.installments.iter().position(|p| t.text.starts_with(p.text.trim())) {
            let tail = if i == last { &story.closing } else { &story.installments[i].tag_question };
            ensure(t.text.ends_with(tail.trim()), || format!("installment {i} does not end with {tail:?}: {:?}", t.text))?;
            ensure(i == installments, || format!("installment {i} delivered out of order"))?;
            installments += 1;
        }
    }
    ensure(installments >= 2, || format!("dream transcript delivered {installments} installments"))?;
    Ok(format!("{} transcripts replayed, slowest {slowest:.2?}; {installments} tagged installments", names.len()))
}

// ------------------------------------------------------------------ liveness

fn random_utterance(rng: &mut impl Rng, topics: &[Topic]) -> UserUtterance {
    let topic = topics.choose(rng).unwrap().as_str().to_lowercase();
    let person = PEOPLE.choose(rng).unwrap().to_lowercase();
    let text = match rng.random_range(0..20) {
        0..=2 => "yes".to_string(),
        3 => "yeah sure".to_string(),
        4..=5 => "no".to_string(),
        6 => "stop".to_string(),
        7 => "tell me a story".to_string(),
        8 => format!("tell me a story about {topic}"),
        9 => "let's play a game".to_string(),
        10 => ["tell me a riddle", "tell me a joke", "would you rather", "ask me a hypothetical"].choose(rng).unwrap().to_string(),
        11 => format!("let's talk about {topic}"),
        12 => topic,
        13 => format!("when was {person} born"),
        14 => format!("who is {person}"),
        15 => "I like playing the cello".to_string(),
        16 => "blorp zing wobble".to_string(),
        17 => String::new(),
        18 => "a brontosaurus".to_string(),
        _ => "what do you think about that".to_string(),
    };
    let conf = if rng.random_bool(0.1) { rng.random_range(0.0..0.4) } else { rng.random_range(0.6..=1.0) };
    UserUtterance::new(text, conf).unwrap()
}

/// Drives `sessions` sessions of `turns` random turns each.
pub fn check_liveness(sessions: usize, turns: usize, seed: u64) -> Check {
    let engine = Engine::bundled(EngineConfig::default());
    let topics: Vec<Topic> = engine.store().registry().topics().cloned().collect();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..sessions {
        let utterances: Vec<UserUtterance> = (0..turns).map(|_| random_utterance(&mut rng, &topics)).collect();
        let session = format!("fuzz-{s}");
        let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<(), String> {
            let mut ctx = DialogueContext::new(&session);
            let greeting = engine.greet(&mut ctx);
            ensure(!greeting.text.trim().is_empty(), || "empty greeting".into())?;
            let mut scored = HashSet::new();
            for (i, u) in utterances.iter().enumerate() {
                let (_, t) = engine.respond(&mut ctx, u);
                ensure(!t.text.trim().is_empty(), || format!("turn {i} ({:?}): empty response", u.text))?;
                ensure(!t.signature.source_id.is_empty(), || format!("turn {i}: empty source id"))?;
                ensure(t.elapsed_ms >= 0.0, || format!("turn {i}: negative elapsed_ms"))?;
                if t.tier == Tier::ScoredContent {
                    ensure(scored.insert(t.signature.source_id.clone()), || {
                        format!("turn {i}: scored content {} repeated", t.signature.source_id)
                    })?;
                }
            }
            Ok(())
        }));
        match outcome {
            Ok(Ok(())) => {}
            Ok(Err(e)) => return Err(format!("{session}: {e}")),
            Err(_) => return Err(format!("{session}: internal error (panic)")),
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(120), || format!("took {took:?}"))?;
    Ok(format!("{sessions} sessions x {turns} turns in {took:.2?}"))
}

// -------------------------------------------------------------------- ranker

const TIERS: [Tier; 4] = [Tier::HandcraftedActive, Tier::FlowPrompt, Tier::ScoredContent, Tier::Fallback];

fn random_candidates(rng: &mut impl Rng) -> Vec<Candidate> {
    let n = rng.random_range(1..=12);
    (0..n)
        .map(|i| {
            let mut c = Candidate::new("some words here", Signature::new(format!("c{i:02}"), Activity::Chitchat), *TIERS.choose(rng).unwrap());
            c.parts = ScoreParts {
                salience: rng.random_range(0..4) as f64,
                novelty: rng.random_range(0..2) as f64,
                redundancy: rng.random_range(0.0..=1.0),
                verbosity: rng.random_range(0.0..2.0),
            };
            c
        })
        .collect()
}

fn random_weights(rng: &mut impl Rng) -> RankWeights {
    RankWeights {
        salience: rng.random_range(0.0..3.0),
        novelty: rng.random_range(0.1..3.0),
        redundancy: rng.random_range(0.0..3.0),
        verbosity: rng.random_range(0.0..3.0),
        verbosity_cap: 80,
    }
}

fn ids(v: &[Candidate]) -> Vec<String> {
    v.iter().map(|c| c.signature.source_id.clone()).collect()
}

pub fn check_ranker(sets: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..sets {
        let w = random_weights(&mut rng);
        let cands = random_candidates(&mut rng);
        let out = order(cands.clone(), &w);

        // tier dominance
        let handcrafted = cands.iter().filter(|c| c.tier == Tier::HandcraftedActive).count();
        ensure(out[..handcrafted].iter().all(|c| c.tier == Tier::HandcraftedActive), || format!("set {s}: tier dominance"))?;

        // positive scaling
        let k = 10f64.powf(rng.random_range(-3.0..3.0));
        ensure(ids(&order(cands.clone(), &w.scaled(k))) == ids(&out), || format!("set {s}: order changed under scaling by {k}"))?;

        // deterministic tie-break under input permutation
        let mut shuffled = cands.clone();
        shuffled.shuffle(&mut rng);
        ensure(ids(&order(shuffled, &w)) == ids(&out), || format!("set {s}: order depends on input order"))?;

        // novelty dominance between twins
        let twin = &cands[rng.random_range(0..cands.len())];
        let mut ctx = DialogueContext::new("r");
        ctx.used_content_ids.insert("used".into());
        let mk = |id: &str| Candidate::new(twin.text.clone(), Signature::new(id, Activity::Chitchat), twin.tier);
        let pair = if rng.random_bool(0.5) { vec![mk("used"), mk("zz-fresh")] } else { vec![mk("zz-fresh"), mk("used")] };
        let ranked = rank(pair, &ctx, &w).map_err(|e| e.to_string())?;
        ensure(ranked[0].signature.source_id == "zz-fresh", || format!("set {s}: used twin outranked unused twin"))?;
    }
    Ok(format!("{sets} random candidate sets"))
}

// --------------------------------------------------------------------- stats

pub fn check_stats(seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = rng.random_range(3..60);
        let slope = rng.random_range(-2.0..2.0);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| slope * v + rng.random_range(-60.0..60.0)).collect();
        let got = telemetry::pearson(&x, &y).map_err(|e| e.to_string())?;
        let (r, p) = pearson_ref(&x, &y);
        let err = (got.r - r).abs().max((got.p - p).abs());
        worst = worst.max(err);
        ensure(err <= 1e-9, || format!("pearson trial {trial}: r {} vs {r}, p {} vs {p}", got.r, got.p))?;
    }
    for trial in 0..100 {
        let n = rng.random_range(3..40);
        let (a, b) = (rng.random_range(-5.0..5.0), rng.random_range(-100.0..100.0));
        let a = if a == 0.0 { 1.0 } else { a };
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let r = telemetry::pearson(&x, &y).map_err(|e| e.to_string())?.r;
        ensure(r == a.signum(), || format!("collinear trial {trial}: r = {r}"))?;
    }
    for trial in 0..1000 {
        let (n1, n2) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let hi = rng.random_range(1..12);
        let a: Vec<f64> = (0..n1).map(|_| rng.random_range(0..hi) as f64).collect();
        let b: Vec<f64> = (0..n2).map(|_| rng.random_range(0..hi) as f64).collect();
        let ab = telemetry::mann_whitney(&a, &b).map_err(|e| e.to_string())?;
        let ba = telemetry::mann_whitney(&b, &a).map_err(|e| e.to_string())?;
        ensure(ab.u == u_pairwise(&a, &b), || format!("U trial {trial}: {} vs pairwise {}", ab.u, u_pairwise(&a, &b)))?;
        ensure(ab.u + ba.u == (n1 * n2) as f64, || format!("U trial {trial}: U(a,b)+U(b,a) != n1·n2"))?;
        ensure((0.0..=1.0).contains(&ab.p), || format!("U trial {trial}: p = {}", ab.p))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!("pearson worst error {worst:.1e}; 1000 U trials exact; {took:.2?}"))
}

// ----------------------------------------------------------------- analytics

pub fn check_analytics(seed: u64) -> Check {
    let cfg = SynthConfig {
        seed,
        ..SynthConfig::default()
    };
    let log = telemetry::synthesize(&cfg).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    log.write(&mut buf).map_err(|e| e.to_string())?;
    let log = ConversationLog::read(buf.as_slice()).map_err(|e| e.to_string())?;
    let report = telemetry::summarize(&log);
    let mut worst = 0.0f64;
    for t in &cfg.targets {
        let m = report.module(t.module);
        for (name, got, want) in [
            ("mean rating", m.mean_rating, t.mean_rating),
            ("median rating", m.median_rating, t.median_rating),
            ("mean turns", m.mean_total_turns, t.mean_turns),
            ("median turns", m.median_total_turns, t.median_turns),
            ("mean time", m.mean_time_s, t.mean_time_s),
            ("median time", m.median_time_s, t.median_time_s),
        ] {
            let err = (got - want).abs();
            worst = worst.max(err);
            ensure(err <= 0.01, || format!("{}: {name} {got} vs target {want}", t.module))?;
        }
    }
    let table = report.render_table();
    for a in Activity::ALL {
        ensure(table.contains(module_label(a)), || format!("table lacks row {}", module_label(a)))?;
    }
    Ok(format!("{} conversations, worst deviation {worst:.4}", report.overall.conversations))
}

// ----------------------------------------------------------------- retrieval

pub fn store_sizes(stores: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..stores)
        .map(|i| match i % 100 {
            0 => 10_000,
            1..=9 => rng.random_range(1000..=5000),
            _ => rng.random_range(0..500),
        })
        .collect()
}

pub fn check_retrieval_equivalence(stores: usize, queries_per_store: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = store_sizes(stores, &mut rng);
    let mut compared = 0;
    for (s, &n) in sizes.iter().enumerate() {
        let store = random_store(&mut rng, n);
        for q in 0..queries_per_store {
            let query = random_query(&mut rng);
            let got = run_query(&store, &query);
            let want = scan_query(&store, &query);
            ensure(got == want, || format!("store {s} ({n} items) query {q}: index and scan disagree for {query:?}"))?;
            compared += 1;
        }
    }
    Ok(format!("{stores} stores (max {} items), {compared} queries", sizes.iter().max().copied().unwrap_or(0)))
}

/// The bundled packs plus `extra` generated trivia items.
pub fn large_engine(extra: usize, seed: u64) -> Engine {
    let doc = bundled::document();
    let base = ContentStore::from_document(&doc).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics: Vec<Topic> = base.registry().topics().cloned().collect();
    let mut items: Vec<ContentItem> = base.items().to_vec();
    for i in 0..extra {
        let t = topics.choose(&mut rng).unwrap().clone();
        let genre = *[Genre::Trivia, Genre::Fact].choose(&mut rng).unwrap();
        let text = format!("Here is generated fact number {i} about {}, which is {} words long.", t.as_str().to_lowercase(), rng.random_range(5..40));
        items.push(ContentItem::new(format!("gen-{i:05}"), text, vec![t], genre));
    }
    let store = ContentStore::from_items(base.registry().clone(), items).unwrap();
    let flows: Vec<_> = doc.flows.iter().map(|(_, f)| f.clone()).collect();
    let kb = doc.kb.iter().map(|(_, r)| r.clone()).collect();
    Engine::new(store, &flows, kb, EngineConfig::default()).unwrap()
}

/// Median wall time of `next_turn` over scripted sessions at 10,000 items.
pub fn check_latency(seed: u64) -> Check {
    let engine = large_engine(10_000, seed);
    let topics: Vec<Topic> = engine.store().registry().topics().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for s in 0..20 {
        let mut ctx = DialogueContext::new(format!("lat-{s}"));
        engine.greet(&mut ctx);
        for _ in 0..25 {
            let u = random_utterance(&mut rng, &topics);
            let nlu = engine.analyze(&u);
            let start = Instant::now();
            let t = engine.next_turn(&mut ctx, &nlu);
            samples.push(start.elapsed().as_secs_f64() * 1000.0);
            ensure(!t.text.is_empty(), || "empty response".into())?;
        }
    }
    samples.sort_by(f64::total_cmp);
    let median = samples[(samples.len() - 1) / 2];
    ensure(median < 50.0, || format!("median next_turn {median:.2} ms at {} items", engine.store().len()))?;
    Ok(format!("median next_turn {median:.3} ms over {} turns at {} items", samples.len(), engine.store().len()))
}

// -------------------------------------------------------------- storytelling

fn random_story(rng: &mut impl Rng) -> Story {
    let n = rng.random_range(2..=6);
    let installments = (0..n)
        .map(|i| Installment {
            text: format!("Part {i} of the tale, where things happen {}.", rng.random_range(0..100)),
            tag_question: ["Beautiful, right?", "Can you imagine?", "Isn't that wild?", "Crazy, huh?"].choose(rng).unwrap().to_string(),
        })
        .collect();
    Story::new("A tale".into(), StoryKind::Dream, installments, "And then I woke up!".into()).unwrap()
}

fn random_intent(rng: &mut impl Rng) -> Intent {
    match rng.random_range(0..12) {
        0..=5 => Intent::Affirm,
        6 => Intent::Deny,
        7 => Intent::StopRequest,
        8 => Intent::Unknown,
        9 => Intent::EntityQuery("who is rihanna".into()),
        10 => Intent::TopicRequest("Music".into()),
        _ => Intent::SelfDisclosure,
    }
}

/// Contract over random stories and intents, then over every bundled story
/// through the engine.
pub fn check_storytelling(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let story = random_story(&mut rng);
        let mut state = storytelling::begin_story("s", &story).state;
        let mut delivered: Vec<usize> = Vec::new();
        for _ in 0..30 {
            let intent = random_intent(&mut rng);
            let declines = matches!(intent, Intent::Deny | Intent::StopRequest);
            let step = storytelling::continue_story(&story, &state, &NluResult::with_intent(intent));
            if declines {
                ensure(matches!(step, StoryStep::Aborted { .. }), || format!("trial {trial}: decline did not abort"))?;
            }
            let turn = match step {
                StoryStep::Turn(t) | StoryStep::Finished(t) => t,
                StoryStep::Aborted { .. } => break,
            };
            if let Some(i) = turn.installment {
                ensure(i == delivered.len(), || format!("trial {trial}: installment {i} after {delivered:?}"))?;
                let last = i + 1 == story.installments.len();
                let tail = if last { &story.closing } else { &story.installments[i].tag_question };
                ensure(turn.text.ends_with(tail.as_str()), || format!("trial {trial}: {:?} lacks {tail:?}", turn.text))?;
                delivered.push(i);
            }
            state = turn.state;
            if !state.active {
                break;
            }
        }
    }

    let engine = Engine::bundled(EngineConfig::default());
    let mut told = HashSet::new();
    for item in engine.store().items().iter().filter(|it| it.genre.is_story()) {
        let Payload::Story(_) = &item.payload else { continue };
        let topic = item.topics[0].as_str().to_lowercase();
        let ask = format!("tell me a story about {topic}");

        // full telling
        let mut ctx = DialogueContext::new("story");
        engine.greet(&mut ctx);
        let (_, opening) = engine.respond(&mut ctx, &UserUtterance::text(&ask));
        ensure(opening.signature.activity == Activity::Storytelling, || format!("{ask:?} did not start a story"))?;
        let id = opening.signature.source_id.clone();
        let story = story_of(&engine, &id).ok_or("story turn without story")?.clone();
        for i in 0..story.installments.len() {
            let (_, t) = engine.respond(&mut ctx, &UserUtterance::text("yes"));
            ensure(t.signature.source_id == id, || format!("{id}: installment {i} came from {}", t.signature.source_id))?;
            ensure(t.text.starts_with(story.installments[i].text.trim()), || format!("{id}: installment {i} out of order"))?;
            let tail = if i + 1 == story.installments.len() { &story.closing } else { &story.installments[i].tag_question };
            ensure(t.text.ends_with(tail.trim()), || format!("{id}: installment {i} does not end with {tail:?}"))?;
        }
        ensure(ctx.active.is_none(), || format!("{id}: still active after closing"))?;

        // decline mid-story
        let mut ctx = DialogueContext::new("story-deny");
        engine.greet(&mut ctx);
        engine.respond(&mut ctx, &UserUtterance::text(&ask));
        engine.respond(&mut ctx, &UserUtterance::text("yes"));
        let (_, t) = engine.respond(&mut ctx, &UserUtterance::text("no"));
        let is_installment = story.installments.iter().any(|p| t.text.contains(p.text.trim()));
        ensure(!is_installment, || format!("{id}: story continued after no"))?;
        ensure(!matches!(ctx.active, Some(parlor_core::dialogue::ActiveState::Story(_))), || format!("{id}: story still active after no"))?;
        told.insert(id);
    }
    ensure(told.len() >= 3, || format!("only {} bundled stories reachable", told.len()))?;
    Ok(format!("{trials} random tellings; {} bundled stories told and declined", told.len()))
}
