//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use conceptspace::format::word2vec::save_embeddings;
use conceptspace::output::manifest_path;
use conceptspace_core::graph::generate_walks;
use conceptspace_core::linalg::Matrix;
use conceptspace_core::ranker::{explain, level_summary, separation_gap, ConceptOptions};
use conceptspace_core::sampler::ConceptDataset;
use conceptspace_core::sgns::{sgns_gradient, sgns_loss, train_line_first_order, train_skipgram};
use conceptspace_core::space::{sas_center, sas_score, train_concept_space, triplet_loss, triplet_loss_gradient};
use conceptspace_core::synth::{builder_from, nested_clusters, random_taxonomy, sibling_clusters, stochastic_block_model, Triple};
use conceptspace_core::{
    ConceptLevel, EmbeddingTable, ExplainOptions, Graph, Margin, Method, Predicate, SgnsConfig, Taxonomy,
    TaxonomyBuilder, TrainingConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("margin oracle on random DAGs", margin_oracle),
        ("hand-built physicists taxonomy", physicists_fixture),
        ("triplet loss gradient", triplet_gradient),
        ("skip-gram gradient", sgns_gradient_check),
        ("SAS center and score", sas_oracle),
        ("block-model separation", structural_separation),
        ("end-to-end separation", end_to_end_separation),
        ("hierarchy trend", hierarchy_trend),
        ("training protocol", training_protocol),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({t:.1?}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({t:.1?}): {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- margins

/// Upward BFS from `concept`, then the closest ancestor whose subtree holds
/// `entity`. `None` for members.
fn bfs_margin(parents: &HashMap<&str, Vec<&str>>, types: &HashMap<&str, Vec<&str>>, concept: &str, entity: &str) -> Option<u32> {
    let mut members = BTreeSet::new();
    let mut queue: VecDeque<&str> = types[entity].iter().copied().collect();
    while let Some(c) = queue.pop_front() {
        if members.insert(c) {
            queue.extend(parents.get(c).into_iter().flatten().copied());
        }
    }
    if members.contains(concept) {
        return None;
    }
    let mut dist = BTreeMap::from([(concept, 0u32)]);
    let mut queue = VecDeque::from([concept]);
    let mut best = None::<u32>;
    while let Some(c) = queue.pop_front() {
        let d = dist[c];
        if members.contains(c) {
            best = Some(best.map_or(d, |b| b.min(d)));
        }
        for &p in parents.get(c).into_iter().flatten() {
            if !dist.contains_key(p) {
                dist.insert(p, d + 1);
                queue.push_back(p);
            }
        }
    }
    best
}

fn margin_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for dag in 0..50u64 {
        let concepts = rng.random_range(20..120);
        let entities = rng.random_range(20..=200 - concepts);
        let triples = random_taxonomy(concepts, entities, 0.3, dag);
        let t = builder_from(&triples).build().map_err(|e| e.to_string())?;
        let mut parents: HashMap<&str, Vec<&str>> = HashMap::new();
        let mut types: HashMap<&str, Vec<&str>> = HashMap::new();
        for (s, p, o) in &triples {
            let map = if *p == Predicate::SubclassOf { &mut parents } else { &mut types };
            map.entry(s.as_str()).or_default().push(o.as_str());
        }
        let names: Vec<&str> = types.keys().copied().collect();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        for _ in 0..1000 {
            let cid = t.concepts().nth(rng.random_range(0..t.num_concepts())).unwrap();
            let concept = t.concept_name(cid);
            let entity = sorted[rng.random_range(0..sorted.len())];
            let want = bfs_margin(&parents, &types, concept, entity);
            let eid = t.entity(entity).map_err(|e| e.to_string())?;
            let got = if t.contains(cid, eid) { None } else { Some(t.margin_of(cid, eid).map_err(|e| e.to_string())?.get()) };
            check(got == want, format!("dag {dag}: margin({concept}, {entity}) = {got:?}, oracle {want:?}"))?;
            checked += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{checked} pairs agree"))
}

// ---------------------------------------------------------------- fixture

fn physicists() -> Taxonomy {
    let mut b = TaxonomyBuilder::new();
    b.subclass_of("Person", "Thing")
        .subclass_of("Scientists", "Person")
        .subclass_of("Politicians", "Person")
        .subclass_of("Physicists", "Scientists")
        .subclass_of("Computer Scientists", "Scientists")
        .subclass_of("Theoretical Physicists", "Physicists")
        .subclass_of("Experimental Physicists", "Physicists");
    for (e, c) in [
        ("Albert Einstein", "Theoretical Physicists"),
        ("Max Planck", "Theoretical Physicists"),
        ("Alfred Nobel", "Experimental Physicists"),
        ("Donald Knuth", "Computer Scientists"),
        ("Barack Obama", "Politicians"),
    ] {
        b.type_of(e, c);
    }
    b.build().expect("fixture is valid")
}

fn physicists_fixture() -> Outcome {
    let t = physicists();
    let c = t.concept("Theoretical Physicists").map_err(|e| e.to_string())?;
    let m = |e: &str| t.margin_of(c, t.entity(e).unwrap()).map(Margin::get).map_err(|e| e.to_string());
    let (nobel, knuth) = (m("Alfred Nobel")?, m("Donald Knuth")?);
    check(nobel == 1 && knuth == 2, format!("Nobel {nobel}, Knuth {knuth}"))?;
    Ok("margin(Nobel) = 1, margin(Knuth) = 2".into())
}

// ---------------------------------------------------------------- gradients

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = norm(a).max(norm(b));
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

fn central_difference(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let (mut up, mut down) = (x.to_vec(), x.to_vec());
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Hinge with explicit loops over a row-major `k x d` matrix.
fn hinge(w: &[f64], k: usize, a: &[f64], p: &[f64], n: &[f64], margin: f64) -> f64 {
    let d = a.len();
    let dist = |x: &[f64], y: &[f64]| {
        (0..k)
            .map(|i| {
                let v: f64 = (0..d).map(|j| w[i * d + j] * (x[j] - y[j])).sum();
                v * v
            })
            .sum::<f64>()
            .sqrt()
    };
    (dist(a, p) - dist(a, n) + margin).max(0.0)
}

fn triplet_gradient() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 100 {
        let d = rng.random_range(1..=16);
        let k = rng.random_range(1..=d.min(8));
        let w = uniform(&mut rng, k * d, 1.0);
        let [a, p, n] = [(); 3].map(|_| uniform(&mut rng, d, 1.0));
        let m = rng.random_range(1..4u32);
        let lambda = rng.random_range(0.5..1.5);
        if hinge(&w, k, &a, &p, &n, lambda * f64::from(m)) < 1e-3 {
            continue;
        }
        let wm = Matrix::from_vec(k, d, w.clone()).map_err(|e| e.to_string())?;
        let lib = triplet_loss(&wm, &a, &p, &n, Margin::new(m), lambda).map_err(|e| e.to_string())?;
        let oracle = hinge(&w, k, &a, &p, &n, lambda * f64::from(m));
        check((lib - oracle).abs() <= 1e-12 * oracle.max(1.0), format!("loss {lib} vs oracle {oracle}"))?;
        let g = triplet_loss_gradient(&wm, &a, &p, &n, Margin::new(m), lambda).map_err(|e| e.to_string())?;
        let fd = central_difference(&w, 1e-5, |x| hinge(x, k, &a, &p, &n, lambda * f64::from(m)));
        let err = rel_err(g.as_slice(), &fd);
        worst = worst.max(err);
        check(err < 1e-5, format!("relative error {err:.2e} (d {d}, k {k})"))?;
        checked += 1;
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("{checked} active configurations, worst relative error {worst:.2e}"))
}

fn log_sigmoid(x: f64) -> f64 {
    -(-x).exp().ln_1p()
}

fn skipgram_oracle(c: &[f64], p: &[f64], negs: &[Vec<f64>]) -> f64 {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    -log_sigmoid(dot(c, p)) - negs.iter().map(|n| log_sigmoid(-dot(c, n))).sum::<f64>()
}

fn sgns_gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.random_range(2..=32);
        let k = rng.random_range(1..=5);
        let c = uniform(&mut rng, d, 1.0);
        let p = uniform(&mut rng, d, 1.0);
        let negs: Vec<Vec<f64>> = (0..k).map(|_| uniform(&mut rng, d, 1.0)).collect();
        let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
        let oracle = skipgram_oracle(&c, &p, &negs);
        let lib = sgns_loss(&c, &p, &refs);
        check((lib - oracle).abs() <= 1e-12 * oracle.max(1.0), format!("loss {lib} vs oracle {oracle}"))?;

        let g = sgns_gradient(&c, &p, &refs);
        let mut errs = vec![
            rel_err(&g.center, &central_difference(&c, 1e-5, |x| skipgram_oracle(x, &p, &negs))),
            rel_err(&g.positive, &central_difference(&p, 1e-5, |x| skipgram_oracle(&c, x, &negs))),
        ];
        for j in 0..k {
            let fd = central_difference(&negs[j], 1e-5, |x| {
                let mut moved = negs.clone();
                moved[j] = x.to_vec();
                skipgram_oracle(&c, &p, &moved)
            });
            errs.push(rel_err(&g.negatives[j], &fd));
        }
        let err = errs.into_iter().fold(0.0, f64::max);
        worst = worst.max(err);
        check(err < 1e-5, format!("relative error {err:.2e}"))?;
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("100 points, worst relative error {worst:.2e}"))
}

fn sas_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_center, mut worst_score) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let d = rng.random_range(1..=32);
        let n = rng.random_range(1..=50);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| uniform(&mut rng, d, 5.0)).collect();
        let names: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
        let table = EmbeddingTable::from_rows(d, names.clone(), rows.concat()).map_err(|e| e.to_string())?;
        let center = sas_center(&table, "c", &names).map_err(|e| e.to_string())?;
        for j in 0..d {
            let mut sum = 0.0;
            for r in &rows {
                sum += r[j];
            }
            worst_center = worst_center.max((center.center[j] - sum / n as f64).abs());
        }
        let q = uniform(&mut rng, d, 5.0);
        let mut sq = 0.0;
        for (x, c) in q.iter().zip(&center.center) {
            sq += (x - c).powi(2);
        }
        let score = sas_score(&center, &q).map_err(|e| e.to_string())?;
        worst_score = worst_score.max((score - sq.sqrt()).abs());
    }
    check(worst_center <= 1e-12 && worst_score <= 1e-12, format!("center {worst_center:.1e}, score {worst_score:.1e}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("1000 sets, max deviation center {worst_center:.1e}, score {worst_score:.1e}"))
}

// ---------------------------------------------------------------- embeddings

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn block_separation(table: &EmbeddingTable, blocks: &[(String, usize)]) -> f64 {
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0usize, 0.0, 0usize);
    for (i, (a, ba)) in blocks.iter().enumerate() {
        for (b, bb) in &blocks[i + 1..] {
            let c = cosine(table.get(a).unwrap(), table.get(b).unwrap());
            if ba == bb {
                intra += c;
                ni += 1;
            } else {
                inter += c;
                nx += 1;
            }
        }
    }
    intra / ni as f64 - inter / nx as f64
}

fn structural_separation() -> Outcome {
    let start = Instant::now();
    let seed = 2024;
    let (edges, blocks) = stochastic_block_model(&[30, 30], 0.3, 0.01, seed);
    let g = Graph::from_edges(edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))).0;
    check(g.num_nodes() == 60, format!("{} nodes", g.num_nodes()))?;
    let corpus = generate_walks(&g, 10, 40, seed).map_err(|e| e.to_string())?;
    let pairs: Vec<_> = corpus.context_pairs(5).map_err(|e| e.to_string())?.collect();
    let dw_cfg = SgnsConfig { dim: 32, epochs: 1, seed, ..Default::default() };
    let dw = block_separation(&train_skipgram(g.names(), &pairs, &dw_cfg).map_err(|e| e.to_string())?, &blocks);
    let line_cfg = SgnsConfig { dim: 32, epochs: 50, seed, ..Default::default() };
    let line = block_separation(&train_line_first_order(&g, &line_cfg).map_err(|e| e.to_string())?, &blocks);
    check(dw > 0.2 && line > 0.2, format!("DeepWalk {dw:.3}, LINE {line:.3}"))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("DeepWalk {dw:.3}, LINE {line:.3}"))
}

// ---------------------------------------------------------------- ranking

fn taxonomy_of(triples: &[Triple]) -> Result<Taxonomy, String> {
    builder_from(triples).build().map_err(|e| e.to_string())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn end_to_end_separation() -> Outcome {
    let start = Instant::now();
    let (mut both_first, mut sas_gaps, mut csd_gaps) = (0, Vec::new(), Vec::new());
    for seed in 0..10u64 {
        let (triples, table) = sibling_clusters(3, 40, 32, 0.75, 0.125, seed).map_err(|e| e.to_string())?;
        let t = taxonomy_of(&triples)?;
        let opts = ExplainOptions { concept: ConceptOptions { seed, ..Default::default() }, ..Default::default() };
        let report = explain(&t, &table, "s0e000", "s0", &opts).map_err(|e| e.to_string())?;
        check(report.failures.is_empty(), format!("seed {seed}: {:?}", report.failures))?;
        let first = |m: Method| report.rows_for(m).next().is_some_and(|r| r.applicable && r.concept == "s0");
        if first(Method::Sas) && first(Method::Csd) {
            both_first += 1;
        }
        sas_gaps.push(separation_gap(&report, Method::Sas).map_err(|e| e.to_string())?);
        csd_gaps.push(separation_gap(&report, Method::Csd).map_err(|e| e.to_string())?);
    }
    let (sas, csd) = (median(sas_gaps), median(csd_gaps));
    let detail = format!("ranked first under both in {both_first}/10 seeds; median gap SAS {sas:.3}, CSD {csd:.3}");
    check(both_first >= 9 && csd > sas, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(detail)
}

fn hierarchy_trend() -> Outcome {
    let start = Instant::now();
    let mut decreasing = 0;
    let mut seen = Vec::new();
    for seed in 0..10u64 {
        let (triples, table, levels) = nested_clusters(4, &[0.3, 0.6, 1.2], 10, 8, 0.2, seed).map_err(|e| e.to_string())?;
        let t = taxonomy_of(&triples)?;
        let levels: Vec<ConceptLevel> =
            levels.into_iter().zip(1..).map(|(concepts, level)| ConceptLevel { level, concepts }).collect();
        let opts = ConceptOptions { seed, ..Default::default() };
        let summary = level_summary(&t, &table, "synthetic", &levels, &opts).map_err(|e| e.to_string())?;
        let means: Vec<f64> = summary.iter().map(|s| s.mean_val_loss).collect();
        if means.len() == 3 && means.windows(2).all(|w| w[0] > w[1]) {
            decreasing += 1;
        }
        seen.push(means.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join(">"));
    }
    let detail = format!("strictly decreasing in {decreasing}/10 seeds (e.g. {})", seen[0]);
    check(decreasing >= 8, format!("{detail}; all: {seen:?}"))?;
    within(start.elapsed(), Duration::from_secs(600))?;
    Ok(detail)
}

// ---------------------------------------------------------------- protocol

fn training_protocol() -> Outcome {
    let (triples, table) = sibling_clusters(3, 40, 16, 1.0, 0.3, 9).map_err(|e| e.to_string())?;
    let t = taxonomy_of(&triples)?;
    let (spec, _) = ConceptOptions::default().for_concept("s1", &[]);
    let ds = ConceptDataset::build(&t, "s1", &spec).map_err(|e| e.to_string())?;
    let full_batches = 10_000usize.div_ceil(16);

    let frozen = TrainingConfig { learning_rate: 0.0, ..Default::default() };
    let space = train_concept_space(&table, &ds, &frozen).map_err(|e| e.to_string())?;
    check(
        space.stopped_epoch == 6 && space.best_epoch == 1 && space.training_log.len() == 6,
        format!("lr 0 stopped at {} (best {})", space.stopped_epoch, space.best_epoch),
    )?;

    let mut longest = 0;
    for (i, cfg) in [
        TrainingConfig::default(),
        TrainingConfig { learning_rate: 0.01, ..Default::default() },
        TrainingConfig { learning_rate: 1e-5, ..Default::default() },
        frozen.clone(),
    ]
    .iter()
    .enumerate()
    {
        let s = train_concept_space(&table, &ds, cfg).map_err(|e| e.to_string())?;
        let log = &s.training_log;
        longest = longest.max(log.len());
        check(log.len() <= 100, format!("run {i}: {} epochs", log.len()))?;
        for e in log {
            check(
                e.triplets == 10_000 && e.batches == full_batches,
                format!("run {i} epoch {}: {} triplets in {} batches", e.epoch, e.triplets, e.batches),
            )?;
        }
        // replay the stopping rule from the logged validation losses
        let (mut best, mut stale, mut stop) = (f64::INFINITY, 0, log.len());
        for (j, e) in log.iter().enumerate() {
            if e.val_loss < best {
                best = e.val_loss;
                stale = 0;
            } else {
                stale += 1;
                if stale == 5 {
                    stop = j + 1;
                    break;
                }
            }
        }
        check(stop == log.len() && (stale == 5 || log.len() == 100), format!("run {i}: log ends at {} but rule says {stop}", log.len()))?;
    }
    Ok(format!("lr 0 stops at epoch 6; {full_batches} batches x 10000 triplets per epoch; longest log {longest}"))
}

// ---------------------------------------------------------------- determinism

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_conceptspace")).args(args).output().map_err(|e| e.to_string())?;
    check(out.status.success(), format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

fn cli_determinism() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (edges, taxonomy, concepts) = (data.join("edges.tsv"), data.join("taxonomy.tsv"), data.join("concepts.txt"));

    let (triples, table) = sibling_clusters(3, 20, 8, 1.0, 0.3, 5).map_err(|e| e.to_string())?;
    let synth_tax = dir.join("synth.tsv");
    let text: String = triples.iter().map(|(s, pr, o)| format!("{s}\t{}\t{o}\n", pr.as_str())).collect();
    fs::write(&synth_tax, text).map_err(|e| e.to_string())?;
    let synth_emb = dir.join("synth.txt");
    let mut bytes = Vec::new();
    save_embeddings(&table, &mut bytes).map_err(|e| e.to_string())?;
    fs::write(&synth_emb, bytes).map_err(|e| e.to_string())?;

    let out = |name: &str| -> PathBuf { dir.join(name) };
    let (dw, line) = (out("deepwalk.txt"), out("line.txt"));
    let runs: Vec<(PathBuf, Vec<String>)> = vec![
        (dw.clone(), vec!["embed", "--edges", p(&edges), "--method", "deepwalk", "--dim", "16", "--seed", "7"].into_iter().map(String::from).collect()),
        (line.clone(), vec!["embed", "--edges", p(&edges), "--method", "line1", "--dim", "16", "--seed", "7"].into_iter().map(String::from).collect()),
        (out("canonical.tsv"), vec!["validate-taxonomy", "--taxonomy", p(&taxonomy)].into_iter().map(String::from).collect()),
        (
            out("physicists.space"),
            ["train-concept", "--embeddings", p(&dw), "--taxonomy", p(&taxonomy), "--concept", "Physicists", "--seed", "3"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
        (
            out("einstein.csv"),
            ["explain", "--embeddings", p(&dw), "--taxonomy", p(&taxonomy), "--query", "Albert Einstein", "--start", "Theoretical Physicists"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
        (
            out("synth.csv"),
            ["explain", "--embeddings", p(&synth_emb), "--taxonomy", p(&synth_tax), "--query", "s2e000", "--start", "s2", "--jobs", "2"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
        (
            out("levels.csv"),
            vec![
                "level-summary".to_string(),
                "--taxonomy".into(),
                p(&taxonomy).into(),
                "--concepts-file".into(),
                p(&concepts).into(),
                "--embeddings".into(),
                format!("deepwalk={}", p(&dw)),
                "--embeddings".into(),
                format!("line={}", p(&line)),
                "--epochs".into(),
                "20".into(),
            ],
        ),
    ];
    for (target, args) in &runs {
        let mut args: Vec<&str> = args.iter().map(String::as_str).collect();
        args.extend(["--out", p(target)]);
        cli(&args)?;
    }
    for (target, _) in &runs {
        let replay = target.with_extension("replay");
        cli(&["rerun", p(&manifest_path(target)), "--out", p(&replay)])?;
        let same = fs::read(target).map_err(|e| e.to_string())? == fs::read(&replay).map_err(|e| e.to_string())?;
        check(same, format!("{} differs after rerun", target.display()))?;
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("{} commands re-ran byte-identically", runs.len()))
}
