use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BackendError, Capabilities, GenerationBackend, GenerationRequest};
use crate::codec::{construct_caption, CaptionRule};
use crate::ingest::synth::APPEARANCE_WORDS;
use crate::model::{Age, Gender, KnowledgeSet, PersonAttr, TypeVocab};
use crate::seed;

fn gold_for<'a>(
    gold: &'a HashMap<String, KnowledgeSet>,
    req: &GenerationRequest,
) -> Result<&'a KnowledgeSet, BackendError> {
    let id = req
        .post_id
        .as_deref()
        .ok_or_else(|| BackendError::Rejected("request carries no post id".into()))?;
    gold.get(id)
        .ok_or_else(|| BackendError::Rejected(format!("no gold knowledge for post {id}")))
}

fn render(ks: &KnowledgeSet) -> Result<String, BackendError> {
    construct_caption(ks, CaptionRule::Ours).map_err(|e| BackendError::Rejected(e.to_string()))
}

/// Returns the gold caption of the requested post: a perfect model.
pub struct EchoBackend {
    gold: HashMap<String, KnowledgeSet>,
}

impl EchoBackend {
    pub fn new(gold: HashMap<String, KnowledgeSet>) -> Self {
        Self { gold }
    }
}

impl GenerationBackend for EchoBackend {
    fn name(&self) -> &str {
        "echo"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            max_input_len: usize::MAX,
            supports_images: true,
            serial: false,
        }
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String, BackendError> {
        render(gold_for(&self.gold, req)?)
    }
}

/// Independent per-unit corruption probabilities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorruptionRates {
    /// Each caption sentence is dropped with this probability.
    pub sentence_drop: f64,
    /// Each item has one appearance word replaced with this probability.
    pub token_swap: f64,
    /// Each person gets a different gender/age pair with this probability.
    pub attribute_scramble: f64,
}

impl CorruptionRates {
    pub fn check(&self) -> Result<(), String> {
        for (name, r) in [
            ("sentence_drop", self.sentence_drop),
            ("token_swap", self.token_swap),
            ("attribute_scramble", self.attribute_scramble),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(format!("{name} rate {r} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Gold caption with seeded, controllable damage. Randomness is keyed on
/// the post id, so output does not depend on call order.
pub struct CorruptBackend {
    gold: HashMap<String, KnowledgeSet>,
    rates: CorruptionRates,
    seed: u64,
    lexicon: Vec<&'static str>,
}

impl CorruptBackend {
    pub fn new(
        gold: HashMap<String, KnowledgeSet>,
        rates: CorruptionRates,
        seed: u64,
        vocab: &TypeVocab,
    ) -> Result<Self, String> {
        rates.check()?;
        let type_words = vocab.words();
        let lexicon = APPEARANCE_WORDS
            .into_iter()
            .filter(|w| !type_words.contains(w))
            .collect();
        Ok(Self {
            gold,
            rates,
            seed,
            lexicon,
        })
    }

    fn corrupt(&self, ks: &KnowledgeSet, rng: &mut impl Rng) -> KnowledgeSet {
        let mut ks = ks.clone();
        for person in &mut ks.persons {
            if rng.gen_bool(self.rates.attribute_scramble) {
                let others: Vec<PersonAttr> = Gender::ALL
                    .iter()
                    .flat_map(|&g| Age::ALL.iter().map(move |&a| PersonAttr::new(g, a)))
                    .filter(|a| *a != person.attr())
                    .collect();
                let new = *others.choose(rng).expect("eight combinations");
                person.gender = new.gender;
                person.age = new.age;
            }
            for i in 0..person.items.len() {
                if !rng.gen_bool(self.rates.token_swap) {
                    continue;
                }
                let item = &person.items[i];
                let mut words: Vec<&str> = item.appearance.split(' ').collect();
                let pos = rng.gen_range(0..words.len());
                let fresh: Vec<&str> = self
                    .lexicon
                    .iter()
                    .copied()
                    .filter(|w| !words.contains(w))
                    .collect();
                words[pos] = fresh
                    .choose(rng)
                    .expect("lexicon outnumbers appearance words");
                let swapped = words.join(" ");
                let clash = person
                    .items
                    .iter()
                    .any(|o| o.item_type == item.item_type && o.appearance == swapped);
                if !clash {
                    person.items[i].appearance = swapped;
                }
            }
        }
        ks
    }
}

impl GenerationBackend for CorruptBackend {
    fn name(&self) -> &str {
        "corrupt"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            max_input_len: usize::MAX,
            supports_images: true,
            serial: false,
        }
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String, BackendError> {
        let gold = gold_for(&self.gold, req)?;
        let id = req.post_id.as_deref().unwrap_or_default();
        let mut rng = seed::rng(seed::derive(self.seed, id));
        let caption = render(&self.corrupt(gold, &mut rng))?;
        let body = caption.strip_suffix('.').unwrap_or(&caption);
        let kept: Vec<String> = body
            .split(". ")
            .filter(|_| !rng.gen_bool(self.rates.sentence_drop))
            .map(|s| format!("{s}."))
            .collect();
        Ok(kept.join(" "))
    }
}
