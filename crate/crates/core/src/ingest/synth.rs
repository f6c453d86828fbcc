//! Synthetic gold corpus for desk-scale runs. Shape targets: about 1.3
//! persons per post and 2.7 items per person, i.e. about 3.5 tuples per
//! post.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::clean_text;
use crate::model::{
    Age, FashionItem, Gender, KnowledgeSet, Occasion, Person, PersonAttr, Post, TypeVocab,
};
use crate::seed;

/// Descriptive words usable inside appearances. None of them is a reserved
/// grammar word or a default item type.
pub const APPEARANCE_WORDS: [&str; 200] = [
    "black",
    "white",
    "red",
    "blue",
    "green",
    "yellow",
    "orange",
    "purple",
    "pink",
    "brown",
    "grey",
    "gray",
    "beige",
    "navy",
    "maroon",
    "burgundy",
    "teal",
    "turquoise",
    "cyan",
    "magenta",
    "lavender",
    "lilac",
    "olive",
    "khaki",
    "tan",
    "cream",
    "ivory",
    "gold",
    "silver",
    "bronze",
    "coral",
    "salmon",
    "peach",
    "mint",
    "charcoal",
    "mustard",
    "rust",
    "wine",
    "plum",
    "indigo",
    "violet",
    "emerald",
    "jade",
    "ruby",
    "sapphire",
    "amber",
    "camel",
    "taupe",
    "sand",
    "mauve",
    "dark",
    "light",
    "pale",
    "bright",
    "deep",
    "neon",
    "striped",
    "plaid",
    "checked",
    "floral",
    "dotted",
    "polka",
    "paisley",
    "camo",
    "leopard",
    "zebra",
    "houndstooth",
    "tartan",
    "argyle",
    "geometric",
    "abstract",
    "tie-dye",
    "ombre",
    "gradient",
    "printed",
    "graphic",
    "embroidered",
    "sequined",
    "beaded",
    "quilted",
    "ribbed",
    "pleated",
    "ruffled",
    "tiered",
    "patchwork",
    "chevron",
    "denim",
    "leather",
    "suede",
    "silk",
    "satin",
    "velvet",
    "cotton",
    "linen",
    "wool",
    "cashmere",
    "chiffon",
    "lace",
    "lacy",
    "tulle",
    "mesh",
    "knit",
    "knitted",
    "corduroy",
    "tweed",
    "fleece",
    "nylon",
    "jersey",
    "canvas",
    "muslin",
    "organza",
    "crochet",
    "sheer",
    "fur",
    "slim",
    "loose",
    "oversized",
    "cropped",
    "fitted",
    "flared",
    "skinny",
    "wide",
    "baggy",
    "high-waisted",
    "midi",
    "mini",
    "maxi",
    "long",
    "short",
    "sleeveless",
    "strapless",
    "puffy",
    "boxy",
    "wrap",
    "asymmetric",
    "vintage",
    "retro",
    "classic",
    "casual",
    "formal",
    "sporty",
    "chunky",
    "glossy",
    "matte",
    "shiny",
    "metallic",
    "distressed",
    "ripped",
    "washed",
    "faded",
    "textured",
    "smooth",
    "soft",
    "fluffy",
    "padded",
    "heart",
    "star",
    "flower",
    "buttoned",
    "zipped",
    "hooded",
    "belted",
    "layered",
    "fringed",
    "studded",
    "logo",
    "cartoon",
    "tropical",
    "bow",
    "ribbon",
    "v-neck",
    "turtleneck",
    "crew",
    "round",
    "square",
    "pointed",
    "strappy",
    "platform",
    "block",
    "ankle",
    "knee",
    "elastic",
    "drawstring",
    "cargo",
    "bomber",
    "trench",
    "puffer",
    "tailored",
    "pinstripe",
    "tweedy",
    "woven",
    "straw",
    "rattan",
    "pearl",
    "crystal",
    "rhinestone",
    "glitter",
    "sparkly",
    "fuzzy",
    "chic",
];

const PERSON_WEIGHTS: [(usize, f64); 3] = [(1, 0.75), (2, 0.20), (3, 0.05)];
const ITEM_WEIGHTS: [(usize, f64); 4] = [(1, 0.10), (2, 0.30), (3, 0.40), (4, 0.20)];
const APPEARANCE_LEN_WEIGHTS: [(usize, f64); 3] = [(1, 0.3), (2, 0.5), (3, 0.2)];

const EMOJI: [&str; 6] = ["😍", "✨", "🔥", "💕", "🌊", "👗"];
const OPENERS: [&str; 6] = [
    "Loving this look",
    "OOTD",
    "Feeling good today",
    "New fit",
    "Can't stop smiling",
    "Weekend mood",
];

fn weighted(rng: &mut ChaCha8Rng, table: &[(usize, f64)]) -> usize {
    table
        .choose_weighted(rng, |(_, w)| *w)
        .expect("weights are positive")
        .0
}

/// Draws an appearance of 1–3 distinct words from `lexicon`.
pub fn random_appearance(rng: &mut ChaCha8Rng, lexicon: &[&str]) -> String {
    let n = weighted(rng, &APPEARANCE_LEN_WEIGHTS).min(lexicon.len());
    lexicon
        .choose_multiple(rng, n)
        .copied()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Draws a valid knowledge set with the given bounds.
pub fn random_knowledge(
    rng: &mut ChaCha8Rng,
    vocab: &TypeVocab,
    lexicon: &[&str],
    n_persons: usize,
    items_per_person: impl Fn(&mut ChaCha8Rng) -> usize,
) -> KnowledgeSet {
    let occasion = *Occasion::ALL.choose(rng).expect("non-empty");
    let persons = (0..n_persons)
        .map(|_| {
            let attr = PersonAttr::new(
                *Gender::ALL.choose(rng).unwrap(),
                *Age::ALL.choose(rng).unwrap(),
            );
            let n_items = items_per_person(rng);
            let mut items: Vec<FashionItem> = Vec::with_capacity(n_items);
            while items.len() < n_items {
                let ty = vocab.types().choose(rng).expect("vocabulary is non-empty");
                let item = FashionItem::new(ty.clone(), random_appearance(rng, lexicon));
                if !items.contains(&item) {
                    items.push(item);
                }
            }
            Person::new(attr, items)
        })
        .collect();
    KnowledgeSet::new(occasion, persons)
}

fn raw_text(rng: &mut ChaCha8Rng, ks: &KnowledgeSet) -> String {
    let mut parts = vec![OPENERS.choose(rng).unwrap().to_string()];
    if rng.gen_bool(0.5) {
        parts.push(EMOJI.choose(rng).unwrap().to_string());
    }
    let first = &ks.persons[0].items[0];
    parts.push(format!(
        "my {} {} is everything!!",
        first.appearance, first.item_type
    ));
    if rng.gen_bool(0.3) {
        parts.push(format!("w/ @friend{}", rng.gen_range(0..100)));
    }
    if rng.gen_bool(0.2) {
        parts.push("https://example.com/p/123".into());
    }
    parts.push(format!("#{} #style", ks.occasion));
    parts.join(" ")
}

/// `n` posts with gold knowledge, deterministic in `seed_value`.
pub fn synth_corpus(n: usize, seed_value: u64, vocab: &TypeVocab) -> Vec<Post> {
    let mut rng = seed::rng(seed::derive(seed_value, "synth"));
    (0..n)
        .map(|i| {
            let n_persons = weighted(&mut rng, &PERSON_WEIGHTS);
            let ks = random_knowledge(&mut rng, vocab, &APPEARANCE_WORDS, n_persons, |r| {
                weighted(r, &ITEM_WEIGHTS)
            });
            let raw = raw_text(&mut rng, &ks);
            Post {
                id: format!("syn-{i:06}"),
                clean_text: clean_text(&raw).0,
                raw_text: raw,
                image_ref: None,
                gold: Some(ks),
            }
        })
        .collect()
}
