//! Auxiliary training instances (sentence reconstruction, image-text
//! matching, visual question answering), the multitask batch sampler and
//! weighted loss aggregation.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{construct_caption, item_phrase, ordinal_word, CaptionRule, CodecError};
use crate::model::{KnowledgeSet, Post};
use crate::seed;

pub const MASK_TOKEN: &str = "<mask>";
pub const SRC_MASK_PROB: f64 = 0.30;
pub const ITM_NEGATIVE_PROB: f64 = 0.5;
/// Attempts at drawing a negative caption that differs from the positive.
pub const ITM_MAX_RESAMPLES: usize = 64;

#[derive(Debug, Error)]
pub enum AuxError {
    #[error("post {0} has no gold knowledge")]
    MissingGold(String),
    #[error("no negative caption for post {0} after {1} draws")]
    NoNegative(String, usize),
    #[error("task weights must be finite, non-negative and not all zero")]
    InvalidWeights,
    #[error("partial loss {index} is invalid: {value}")]
    InvalidLoss { index: usize, value: f64 },
    #[error("task pool for {0} is empty")]
    EmptyPool(AuxTask),
    #[error("no tasks to sample from")]
    NoTasks,
    #[error("batch size must be at least 1")]
    ZeroBatch,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuxTask {
    Src,
    Itm,
    Vqa,
    Caption,
}

impl AuxTask {
    /// The three auxiliary tasks, in loss-weight order.
    pub const AUXILIARY: [AuxTask; 3] = [AuxTask::Src, AuxTask::Itm, AuxTask::Vqa];

    pub fn prefix(self) -> &'static str {
        match self {
            AuxTask::Src => "src",
            AuxTask::Itm => "itm",
            AuxTask::Vqa => "vqa",
            AuxTask::Caption => "caption",
        }
    }

    pub fn from_prefix(prefix: &str) -> Option<Self> {
        [AuxTask::Src, AuxTask::Itm, AuxTask::Vqa, AuxTask::Caption]
            .into_iter()
            .find(|t| t.prefix() == prefix)
    }
}

impl fmt::Display for AuxTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.prefix())
    }
}

impl FromStr for AuxTask {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_prefix(s).ok_or_else(|| format!("unknown task: {s}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxInstance {
    pub task: AuxTask,
    pub prefix: String,
    pub task_text: String,
    pub post_id: String,
    pub target: String,
}

impl AuxInstance {
    fn new(task: AuxTask, post_id: &str, task_text: String, target: String) -> Self {
        Self {
            task,
            prefix: task.prefix().to_string(),
            task_text,
            post_id: post_id.to_string(),
            target,
        }
    }
}

fn gold_caption(post: &Post) -> Result<String, AuxError> {
    let gold = post
        .gold
        .as_ref()
        .ok_or_else(|| AuxError::MissingGold(post.id.clone()))?;
    Ok(construct_caption(gold, CaptionRule::Ours)?)
}

/// Masks each whitespace token of the caption independently.
pub fn make_src_instance(
    post_id: &str,
    ks: &KnowledgeSet,
    rng_seed: u64,
) -> Result<AuxInstance, AuxError> {
    let caption = construct_caption(ks, CaptionRule::Ours)?;
    let mut rng = seed::rng(rng_seed);
    let masked = caption
        .split_whitespace()
        .map(|tok| {
            if rng.gen_bool(SRC_MASK_PROB) {
                MASK_TOKEN
            } else {
                tok
            }
        })
        .collect::<Vec<_>>()
        .join(" ");
    Ok(AuxInstance::new(AuxTask::Src, post_id, masked, caption))
}

/// Pairs the post with its own caption (target `true`) or, half the time,
/// with the caption of another post in `corpus` (target `false`).
pub fn make_itm_instance(
    post: &Post,
    corpus: &[Post],
    rng_seed: u64,
) -> Result<AuxInstance, AuxError> {
    let positive = gold_caption(post)?;
    let mut rng = seed::rng(rng_seed);
    if !rng.gen_bool(ITM_NEGATIVE_PROB) {
        return Ok(AuxInstance::new(
            AuxTask::Itm,
            &post.id,
            positive,
            "true".into(),
        ));
    }
    let others: Vec<&Post> = corpus
        .iter()
        .filter(|p| p.id != post.id && p.gold.is_some())
        .collect();
    if !others.is_empty() {
        for _ in 0..ITM_MAX_RESAMPLES {
            let other = others[rng.gen_range(0..others.len())];
            let negative = gold_caption(other)?;
            if negative != positive {
                return Ok(AuxInstance::new(
                    AuxTask::Itm,
                    &post.id,
                    negative,
                    "false".into(),
                ));
            }
        }
    }
    Err(AuxError::NoNegative(post.id.clone(), ITM_MAX_RESAMPLES))
}

/// The four question templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VqaKind {
    Occasion,
    PersonAttributes,
    PersonItems,
    ItemAppearance,
}

impl VqaKind {
    pub const ALL: [VqaKind; 4] = [
        VqaKind::Occasion,
        VqaKind::PersonAttributes,
        VqaKind::PersonItems,
        VqaKind::ItemAppearance,
    ];
}

/// Picks a question kind uniformly, then instantiates it.
pub fn make_vqa_instance(
    post_id: &str,
    ks: &KnowledgeSet,
    rng_seed: u64,
) -> Result<AuxInstance, AuxError> {
    Ok(make_vqa_with_kind(post_id, ks, rng_seed)?.1)
}

/// Like [`make_vqa_instance`] but also reports which template was drawn.
pub fn make_vqa_with_kind(
    post_id: &str,
    ks: &KnowledgeSet,
    rng_seed: u64,
) -> Result<(VqaKind, AuxInstance), AuxError> {
    let mut rng = seed::rng(rng_seed);
    let kind = VqaKind::ALL[rng.gen_range(0..VqaKind::ALL.len())];
    let instance = vqa_instance(post_id, ks, kind, &mut rng)?;
    Ok((kind, instance))
}

/// Instantiates a specific template. Person and item choices are drawn
/// uniformly from `rng`.
pub fn vqa_instance(
    post_id: &str,
    ks: &KnowledgeSet,
    kind: VqaKind,
    rng: &mut ChaCha8Rng,
) -> Result<AuxInstance, AuxError> {
    if ks.persons.is_empty() {
        return Err(CodecError::NoPersons.into());
    }
    let (question, answer) = match kind {
        VqaKind::Occasion => (
            "what's the occasion of the post".to_string(),
            ks.occasion.to_string(),
        ),
        VqaKind::PersonAttributes => {
            let idx = rng.gen_range(0..ks.persons.len());
            let person = &ks.persons[idx];
            (
                format!(
                    "what's the gender and age of the {} person",
                    ordinal_word(idx + 1)?
                ),
                format!("{} {}", person.gender, person.age),
            )
        }
        VqaKind::PersonItems => {
            let idx = rng.gen_range(0..ks.persons.len());
            (
                format!("what is the {} person wearing", ordinal_word(idx + 1)?),
                item_phrase(&ks.persons[idx]),
            )
        }
        VqaKind::ItemAppearance => {
            let items: Vec<(usize, usize)> = ks
                .persons
                .iter()
                .enumerate()
                .flat_map(|(pi, p)| (0..p.items.len()).map(move |ii| (pi, ii)))
                .collect();
            if items.is_empty() {
                return Err(CodecError::NoItems(0).into());
            }
            let (pi, ii) = items[rng.gen_range(0..items.len())];
            let item = &ks.persons[pi].items[ii];
            (
                format!(
                    "how does the {} of the {} person look",
                    item.item_type,
                    ordinal_word(pi + 1)?
                ),
                item.appearance.clone(),
            )
        }
    };
    Ok(AuxInstance::new(AuxTask::Vqa, post_id, question, answer))
}

/// Generates auxiliary instances for every post with gold knowledge.
/// Each (task, post) pair draws from its own derived seed, so output is a
/// pure function of the corpus and `seed`.
pub fn augment_corpus(
    posts: &[Post],
    tasks: &[AuxTask],
    seed_value: u64,
) -> Result<Vec<AuxInstance>, AuxError> {
    let mut out = Vec::new();
    for (idx, post) in posts.iter().enumerate() {
        let Some(gold) = post.gold.as_ref() else {
            continue;
        };
        for task in tasks {
            let s = seed::derive_indexed(seed_value, task.prefix(), idx as u64);
            let inst = match task {
                AuxTask::Src => make_src_instance(&post.id, gold, s)?,
                AuxTask::Itm => make_itm_instance(post, posts, s)?,
                AuxTask::Vqa => make_vqa_instance(&post.id, gold, s)?,
                AuxTask::Caption => AuxInstance::new(
                    AuxTask::Caption,
                    &post.id,
                    String::new(),
                    gold_caption(post)?,
                ),
            };
            out.push(inst);
        }
    }
    Ok(out)
}

/// Per-task loss weights for the three auxiliary tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct TaskWeights([f64; 3]);

impl Default for TaskWeights {
    fn default() -> Self {
        Self([1.0; 3])
    }
}

impl TaskWeights {
    pub fn new(w: [f64; 3]) -> Result<Self, AuxError> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().all(|x| *x == 0.0) {
            return Err(AuxError::InvalidWeights);
        }
        Ok(Self(w))
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }
}

impl TryFrom<[f64; 3]> for TaskWeights {
    type Error = AuxError;

    fn try_from(w: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(w)
    }
}

impl From<TaskWeights> for [f64; 3] {
    fn from(w: TaskWeights) -> Self {
        w.0
    }
}

/// Weighted sum of the per-task partial losses.
pub fn aggregate_loss(partials: [f64; 3], weights: &TaskWeights) -> Result<f64, AuxError> {
    for (index, value) in partials.iter().copied().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(AuxError::InvalidLoss { index, value });
        }
    }
    Ok(partials
        .iter()
        .zip(weights.0.iter())
        .map(|(l, w)| w * l)
        .sum())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatchDescriptor {
    pub task: AuxTask,
    pub instance_ids: Vec<usize>,
}

/// Draws task-homogeneous mini-batches. Each call picks one task uniformly
/// and walks a shuffled permutation of that task's pool, reshuffling when
/// the pool is exhausted.
pub struct TaskSampler {
    rng: ChaCha8Rng,
    pools: Vec<Pool>,
}

struct Pool {
    task: AuxTask,
    order: Vec<usize>,
    cursor: usize,
}

impl TaskSampler {
    /// `pools` gives each task and the number of instances available for it.
    pub fn new(pools: &[(AuxTask, usize)], rng_seed: u64) -> Result<Self, AuxError> {
        if pools.is_empty() {
            return Err(AuxError::NoTasks);
        }
        let mut rng = seed::rng(rng_seed);
        let mut out = Vec::with_capacity(pools.len());
        for &(task, size) in pools {
            if size == 0 {
                return Err(AuxError::EmptyPool(task));
            }
            let mut order: Vec<usize> = (0..size).collect();
            order.shuffle(&mut rng);
            out.push(Pool {
                task,
                order,
                cursor: 0,
            });
        }
        Ok(Self { rng, pools: out })
    }

    pub fn sample_task_batch(&mut self, batch_size: usize) -> Result<BatchDescriptor, AuxError> {
        if batch_size == 0 {
            return Err(AuxError::ZeroBatch);
        }
        let pick = self.rng.gen_range(0..self.pools.len());
        let pool = &mut self.pools[pick];
        let mut ids = Vec::with_capacity(batch_size);
        while ids.len() < batch_size {
            if pool.cursor == pool.order.len() {
                pool.order.shuffle(&mut self.rng);
                pool.cursor = 0;
            }
            ids.push(pool.order[pool.cursor]);
            pool.cursor += 1;
        }
        Ok(BatchDescriptor {
            task: pool.task,
            instance_ids: ids,
        })
    }
}
