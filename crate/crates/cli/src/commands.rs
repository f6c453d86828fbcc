use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

use fkcap_core::aux_tasks::{augment_corpus, AuxTask};
use fkcap_core::codec::{recover_tuples, CaptionRegistry, CaptionRule};
use fkcap_core::generator::{run_extraction, BackendRegistry, BackendSpec, Prediction};
use fkcap_core::ingest::synth::{random_knowledge, APPEARANCE_WORDS};
use fkcap_core::ingest::{
    clean_text, load_dataset, split_dataset, synth_corpus, CleaningReport, SplitSpec,
};
use fkcap_core::jsonl::{self, write_jsonl};
use fkcap_core::metrics::{evaluate, EvalItem, EvalReport};
use fkcap_core::model::{Post, Schema, Tuple};
use fkcap_core::seed;

use crate::config::{ConfigFile, Settings};
use crate::manifest::{manifest_path, RunManifest};
use crate::{Breakdown, Cli, Command, TaskArg, Usage};

#[derive(Debug, Serialize, Deserialize)]
struct CaptionRecord {
    post_id: String,
    caption: String,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// Writes `render` to `output` (with a run manifest) or to stdout.
fn emit(
    output: Option<&Path>,
    manifest: RunManifest,
    render: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<()> {
    match output {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            render(&mut w).with_context(|| format!("writing {}", path.display()))?;
            w.flush()?;
            drop(w);
            manifest.output(path)?.write(&manifest_path(path))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            render(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn load_posts(path: &Path, schema: &Schema) -> Result<Vec<Post>> {
    load_dataset(path, schema, None).with_context(|| format!("loading {}", path.display()))
}

fn require_gold(posts: &[Post]) -> Result<()> {
    if let Some(p) = posts.iter().find(|p| p.gold.is_none()) {
        bail!("post {} has no gold knowledge", p.id);
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut settings = Settings::resolve(file, cli.vocab.as_deref(), cli.max_persons)?;
    let schema = settings.schema();

    match cli.command {
        Command::Construct {
            rule,
            input,
            output,
        } => {
            let registry = CaptionRegistry::default();
            if registry.get(&rule).is_err() {
                return Err(usage(format!(
                    "unknown rule '{rule}' (choose from {})",
                    registry.names().collect::<Vec<_>>().join(", ")
                )));
            }
            let posts = load_posts(&input, &schema)?;
            require_gold(&posts)?;
            let mut records = Vec::with_capacity(posts.len());
            for p in &posts {
                let caption = registry
                    .construct(&rule, p.gold.as_ref().expect("checked"))
                    .with_context(|| format!("post {}", p.id))?;
                records.push(CaptionRecord {
                    post_id: p.id.clone(),
                    caption,
                });
            }
            let manifest = RunManifest::new("construct", settings.hash()).input(&input);
            emit(output.as_deref(), manifest, |w| write_jsonl(w, &records))
        }

        Command::Recover {
            input,
            caption,
            output,
        } => {
            if let Some(caption) = caption {
                let result = recover_tuples(&caption, &schema);
                println!("{}", serde_json::to_string_pretty(&result)?);
                return if result.is_null() {
                    Err(anyhow::anyhow!("caption did not parse"))
                } else {
                    Ok(())
                };
            }
            let input = input.expect("clap enforces input or caption");
            let records: Vec<CaptionRecord> = jsonl::read_jsonl(&input)?;
            let preds: Vec<Prediction> = records
                .into_iter()
                .map(|r| {
                    let result = recover_tuples(&r.caption, &schema);
                    Prediction {
                        tuples: result.outcome.map(|ks| ks.flatten(&r.post_id)),
                        diagnostics: result.diagnostics.iter().map(ToString::to_string).collect(),
                        post_id: r.post_id,
                        caption: Some(r.caption),
                        latency_ms: 0,
                    }
                })
                .collect();
            let nulls = preds.iter().filter(|p| p.is_null()).count();
            eprintln!("{}/{} captions recovered", preds.len() - nulls, preds.len());
            let manifest = RunManifest::new("recover", settings.hash()).input(&input);
            emit(output.as_deref(), manifest, |w| write_jsonl(w, &preds))
        }

        Command::Roundtrip {
            fuzz,
            seed: seed_value,
            persons,
            items,
        } => {
            if persons == 0 || items == 0 || persons > schema.max_persons {
                return Err(usage(format!(
                    "--persons must be in 1..={} and --items at least 1",
                    schema.max_persons
                )));
            }
            roundtrip(fuzz, seed_value, persons, items, &schema)
        }

        Command::Augment {
            task,
            seed: seed_value,
            input,
            output,
        } => {
            let tasks: &[AuxTask] = match task {
                TaskArg::Src => &[AuxTask::Src],
                TaskArg::Itm => &[AuxTask::Itm],
                TaskArg::Vqa => &[AuxTask::Vqa],
                TaskArg::All => &AuxTask::AUXILIARY,
            };
            let posts = load_posts(&input, &schema)?;
            require_gold(&posts)?;
            let instances = augment_corpus(&posts, tasks, seed_value)?;
            eprintln!("{} instances from {} posts", instances.len(), posts.len());
            let manifest = RunManifest::new("augment", settings.hash())
                .seed("seed", seed_value)
                .input(&input);
            emit(output.as_deref(), manifest, |w| write_jsonl(w, &instances))
        }

        Command::Clean { input, output } => {
            let mut posts = load_posts(&input, &schema)?;
            let mut total = CleaningReport::default();
            for p in &mut posts {
                let (clean, report) = clean_text(&p.raw_text);
                p.clean_text = clean;
                total.add(&report);
            }
            eprintln!("{}", serde_json::to_string(&total)?);
            let manifest = RunManifest::new("clean", settings.hash()).input(&input);
            emit(output.as_deref(), manifest, |w| write_jsonl(w, &posts))
        }

        Command::Split {
            input,
            seed: seed_value,
            out_dir,
        } => {
            let posts = load_posts(&input, &schema)?;
            let splits = split_dataset(posts, &SplitSpec::new(seed_value))?;
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            let mut manifest = RunManifest::new("split", settings.hash())
                .seed("seed", seed_value)
                .input(&input);
            for (name, part) in [
                ("train", &splits.train),
                ("val", &splits.val),
                ("test", &splits.test),
            ] {
                let path = out_dir.join(format!("{name}.jsonl"));
                std::fs::write(&path, jsonl::to_jsonl_string(part))
                    .with_context(|| format!("writing {}", path.display()))?;
                manifest = manifest.output(&path)?;
            }
            manifest.write(&out_dir.join("split.manifest.json"))?;
            println!(
                "train {} val {} test {}",
                splits.train.len(),
                splits.val.len(),
                splits.test.len()
            );
            Ok(())
        }

        Command::Synth {
            posts,
            seed: seed_value,
            output,
        } => {
            let corpus = synth_corpus(posts, seed_value, &schema.vocab);
            let manifest = RunManifest::new("synth", settings.hash()).seed("seed", seed_value);
            emit(output.as_deref(), manifest, |w| write_jsonl(w, &corpus))
        }

        Command::Extract {
            input,
            backend,
            endpoint,
            parallel,
            timeout_ms,
            seed: seed_value,
            drop_rate,
            swap_rate,
            scramble_rate,
            output,
        } => {
            settings.endpoint = endpoint.or(settings.endpoint);
            settings.parallel = parallel.unwrap_or(settings.parallel);
            settings.timeout_ms = timeout_ms.unwrap_or(settings.timeout_ms);
            let rates = &mut settings.corruption;
            rates.sentence_drop = drop_rate.unwrap_or(rates.sentence_drop);
            rates.token_swap = swap_rate.unwrap_or(rates.token_swap);
            rates.attribute_scramble = scramble_rate.unwrap_or(rates.attribute_scramble);

            let posts = load_posts(&input, &schema)?;
            let mut spec = BackendSpec::from_posts(&posts);
            spec.rates = settings.corruption;
            spec.seed = seed_value;
            spec.endpoint = settings.endpoint.clone();
            spec.timeout_ms = settings.timeout_ms;
            spec.vocab = schema.vocab.clone();
            let registry = BackendRegistry::default();
            let backend = registry
                .build(&backend, &spec)
                .map_err(|e| usage(e.to_string()))?;
            let preds = run_extraction(&posts, backend.as_ref(), &schema, settings.parallel)
                .map_err(|e| usage(e.to_string()))?;
            let nulls = preds.iter().filter(|p| p.is_null()).count();
            eprintln!("{} posts, {} null predictions", preds.len(), nulls);
            let manifest = RunManifest::new("extract", settings.hash())
                .seed("seed", seed_value)
                .input(&input);
            emit(output.as_deref(), manifest, |w| write_jsonl(w, &preds))
        }

        Command::Eval {
            pred,
            gold,
            train,
            report,
        } => {
            let preds: Vec<Prediction> = jsonl::read_jsonl(&pred)?;
            let gold_posts = load_posts(&gold, &schema)?;
            require_gold(&gold_posts)?;
            let items = pair_predictions(preds, gold_posts)?;
            let train_tuples: Option<Vec<Tuple>> = match &train {
                Some(path) => {
                    let posts = load_posts(path, &schema)?;
                    Some(
                        posts
                            .iter()
                            .filter_map(|p| p.gold.as_ref())
                            .flat_map(|ks| ks.tuples())
                            .collect(),
                    )
                }
                None => None,
            };
            let result = evaluate(&items, train_tuples.as_deref())?;
            let o = &result.overall;
            eprintln!(
                "P {:.4} R {:.4} F1 {:.4} post accuracy {:.4} ({} null of {})",
                o.prf.precision,
                o.prf.recall,
                o.prf.f1,
                o.post_accuracy,
                result.n_null,
                result.n_posts
            );
            let mut manifest = RunManifest::new("eval", settings.hash())
                .input(&pred)
                .input(&gold);
            if let Some(t) = &train {
                manifest = manifest.input(t);
            }
            emit(report.as_deref(), manifest, |w| {
                serde_json::to_writer_pretty(&mut *w, &result)?;
                writeln!(w)
            })
        }

        Command::Report {
            input,
            breakdown,
            output,
        } => {
            let text = jsonl::read_to_string(&input)?;
            let report: EvalReport = serde_json::from_str(&text)
                .with_context(|| format!("parsing report {}", input.display()))?;
            let csv = breakdown_csv(&report, breakdown)?;
            let manifest = RunManifest::new("report", settings.hash()).input(&input);
            emit(output.as_deref(), manifest, |w| w.write_all(&csv))
        }
    }
}

fn roundtrip(
    fuzz: usize,
    seed_value: u64,
    persons: usize,
    items: usize,
    schema: &Schema,
) -> Result<()> {
    let mut rng = seed::rng(seed::derive(seed_value, "roundtrip"));
    let mut ok = 0usize;
    let mut first_failure = None;
    for _ in 0..fuzz {
        let n_persons = rng.gen_range(1..=persons);
        let ks = random_knowledge(&mut rng, &schema.vocab, &APPEARANCE_WORDS, n_persons, |r| {
            r.gen_range(1..=items)
        });
        let caption = fkcap_core::codec::construct_caption(&ks, CaptionRule::Ours)?;
        let back = recover_tuples(&caption, schema);
        if back.outcome.as_ref() == Some(&ks) {
            ok += 1;
        } else if first_failure.is_none() {
            first_failure = Some((caption, back.diagnostics));
        }
    }
    println!("{ok}/{fuzz} round trips ok");
    if let Some((caption, diags)) = first_failure {
        let reasons: Vec<String> = diags.iter().map(ToString::to_string).collect();
        bail!("round trip failed for '{caption}': {}", reasons.join("; "));
    }
    Ok(())
}

/// Pairs predictions with gold posts by id; every id must appear on both
/// sides exactly once.
fn pair_predictions(preds: Vec<Prediction>, gold: Vec<Post>) -> Result<Vec<EvalItem>> {
    let gold_ids: HashSet<&str> = gold.iter().map(|p| p.id.as_str()).collect();
    let mut by_id: HashMap<String, Prediction> = HashMap::with_capacity(preds.len());
    for p in preds {
        if !gold_ids.contains(p.post_id.as_str()) {
            bail!("prediction for post id {} has no gold post", p.post_id);
        }
        if by_id.contains_key(&p.post_id) {
            bail!("duplicate prediction for post id {}", p.post_id);
        }
        by_id.insert(p.post_id.clone(), p);
    }
    gold.into_iter()
        .map(|post| {
            let pred = by_id
                .remove(&post.id)
                .with_context(|| format!("no prediction for post id {}", post.id))?;
            Ok(EvalItem {
                pred: pred.pred_tuples(),
                caption: pred.caption,
                gold: post.gold.expect("checked"),
                post_id: post.id,
            })
        })
        .collect()
}

fn breakdown_csv(report: &EvalReport, breakdown: Breakdown) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match breakdown {
        Breakdown::Counts => {
            w.write_record([
                "n_persons",
                "n_items",
                "n_posts",
                "precision",
                "recall",
                "f1",
                "tp",
                "fp",
                "fn",
            ])?;
            for b in &report.by_counts {
                w.write_record([
                    b.n_persons.to_string(),
                    b.n_items.to_string(),
                    b.n_posts.to_string(),
                    b.prf.precision.to_string(),
                    b.prf.recall.to_string(),
                    b.prf.f1.to_string(),
                    b.prf.tp.to_string(),
                    b.prf.fp.to_string(),
                    b.prf.fn_.to_string(),
                ])?;
            }
        }
        Breakdown::Frequency => {
            let Some(f) = &report.by_frequency else {
                bail!("report has no frequency breakdown; rerun eval with --train");
            };
            w.write_record(["bucket", "gold", "matched", "recall"])?;
            for (name, b) in [("common", f.common), ("rare", f.rare), ("unseen", f.unseen)] {
                w.write_record([
                    name.to_string(),
                    b.gold.to_string(),
                    b.matched.to_string(),
                    b.recall.to_string(),
                ])?;
            }
        }
    }
    Ok(w.into_inner()?)
}
