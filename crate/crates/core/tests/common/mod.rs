//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod checks;

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

use parlor_core::activity::Activity;
use parlor_core::content::{ContentItem, ContentQuery, ContentStore, Entity, Genre, Topic, TopicRegistry};
use parlor_core::text;
use rand::seq::IndexedRandom;
use rand::Rng;

// ---------------------------------------------------------------- statistics

/// Textbook Pearson r from raw sums, and its two-sided p.
pub fn pearson_ref(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let r = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
    let df = n - 2.0;
    let t = r * (df / (1.0 - r * r)).sqrt();
    (r, t_two_sided_ref(t, df))
}

/// Two-sided Student-t tail probability by quadrature. With t = √ν·tan θ
/// the density becomes proportional to cos^(ν−1) θ on [0, π/2), so
/// P(|T| > t) = ∫_{θ₀}^{π/2} cos^(ν−1) / ∫_0^{π/2} cos^(ν−1).
pub fn t_two_sided_ref(t: f64, df: f64) -> f64 {
    let theta0 = (t.abs() / df.sqrt()).atan();
    let f = |th: f64| th.cos().powf(df - 1.0);
    simpson(f, theta0, FRAC_PI_2, 20_000) / simpson(f, 0.0, FRAC_PI_2, 20_000)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// U for `a` by exhaustive pairwise comparison: pairs with aᵢ > bⱼ plus
/// half the tied pairs.
pub fn u_pairwise(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Exact two-sided permutation p of U over every split of the pooled data.
pub fn u_exact_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n1 = a.len();
    let mu = (a.len() * b.len()) as f64 / 2.0;
    let observed = (u_pairwise(a, b) - mu).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    let mut pick = Vec::with_capacity(n1);
    fn walk(pooled: &[f64], n1: usize, start: usize, pick: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if pick.len() == n1 {
            visit(pick);
            return;
        }
        for i in start..pooled.len() {
            pick.push(i);
            walk(pooled, n1, i + 1, pick, visit);
            pick.pop();
        }
    }
    walk(&pooled, n1, 0, &mut pick, &mut |idx| {
        let chosen: Vec<f64> = idx.iter().map(|&i| pooled[i]).collect();
        let rest: Vec<f64> = (0..pooled.len()).filter(|i| !idx.contains(i)).map(|i| pooled[i]).collect();
        total += 1;
        if (u_pairwise(&chosen, &rest) - mu).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    });
    extreme as f64 / total as f64
}

// ----------------------------------------------------------------- retrieval

pub const GENRES: [Genre; 5] = [Genre::Trivia, Genre::Fact, Genre::Joke, Genre::Riddle, Genre::Prompt];
pub const PEOPLE: [&str; 12] = [
    "Pau Casals",
    "Rihanna",
    "Neil Armstrong",
    "Ada Lovelace",
    "Mary Anning",
    "Louis Armstrong",
    "Jane Austen",
    "Marie Curie",
    "Clara Schumann",
    "Yuri Gagarin",
    "Frida Kahlo",
    "Alan Turing",
];

pub fn topics() -> Vec<Topic> {
    TopicRegistry::builtin().topics().cloned().collect()
}

fn random_entity(rng: &mut impl Rng) -> Entity {
    let name = *PEOPLE.choose(rng).unwrap();
    let mut e = Entity::new(name);
    if rng.random_bool(0.5) {
        e.aliases.push(name.split(' ').next_back().unwrap().to_lowercase());
    }
    e
}

/// A store of `n` items with random topics, entities, genres and owners.
pub fn random_store(rng: &mut impl Rng, n: usize) -> ContentStore {
    let all = topics();
    let items = (0..n)
        .map(|i| {
            let k = rng.random_range(1..=3);
            let ts: Vec<Topic> = all.choose_multiple(rng, k).cloned().collect();
            let mut item = ContentItem::new(format!("item-{i:05}"), "Some generated fact about things.", ts, *GENRES.choose(rng).unwrap());
            let ents = rng.random_range(0..=2);
            item = item.with_entities((0..ents).map(|_| random_entity(rng)).collect());
            if rng.random_bool(0.2) {
                item = item.handcrafted_for(Activity::Chitchat);
            }
            item
        })
        .collect();
    ContentStore::from_items(TopicRegistry::builtin(), items).unwrap()
}

pub fn random_query(rng: &mut impl Rng) -> ContentQuery {
    let all = topics();
    let k = rng.random_range(0..=3);
    let mut q = ContentQuery {
        topics: all.choose_multiple(rng, k).cloned().collect(),
        ..Default::default()
    };
    if rng.random_bool(0.1) {
        q.topics.push(Topic::from("Nonexistent Topic"));
    }
    for _ in 0..rng.random_range(0..=2) {
        let name = *PEOPLE.choose(rng).unwrap();
        q.entities.push(if rng.random_bool(0.3) { name.to_uppercase() } else { name.to_string() });
    }
    if rng.random_bool(0.4) {
        q.genre = Some(*GENRES.choose(rng).unwrap());
    }
    if rng.random_bool(0.2) {
        q.activity = Some(Activity::Chitchat);
    }
    q
}

/// Linear scan: shared topics plus item entities named by the query.
pub fn scan_query(store: &ContentStore, q: &ContentQuery) -> Vec<(String, f64)> {
    let topics: BTreeSet<&Topic> = q.topics.iter().filter_map(|t| store.registry().lookup(t.as_str())).collect();
    let keys: BTreeSet<String> = q.entities.iter().map(|e| text::entity_key(e)).filter(|k| !k.is_empty()).collect();
    let mut out: Vec<(String, f64)> = store
        .items()
        .iter()
        .filter(|it| q.genre.is_none_or(|g| it.genre == g))
        .filter(|it| q.activity.is_none_or(|a| it.handcrafted_for == Some(a)))
        .filter_map(|it| {
            let t = it.topics.iter().filter(|t| topics.contains(t)).count();
            let e = it.entities.iter().filter(|e| e.keys().iter().any(|k| keys.contains(k))).count();
            let s = (t + e) as f64;
            (s > 0.0).then(|| (it.id.clone(), s))
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn run_query(store: &ContentStore, q: &ContentQuery) -> Vec<(String, f64)> {
    store.query(q).into_iter().map(|(it, s)| (it.id.clone(), s)).collect()
}
