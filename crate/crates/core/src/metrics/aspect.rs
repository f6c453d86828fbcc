use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{harmonic, match_multiset, ratio, EvalItem, TuplePRF};
use crate::model::{Occasion, Tuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aspect {
    Occasion,
    Category,
    Appearance,
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aspect::Occasion => "occasion",
            Aspect::Category => "category",
            Aspect::Appearance => "appearance",
        })
    }
}

impl FromStr for Aspect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "occasion" => Ok(Aspect::Occasion),
            "category" => Ok(Aspect::Category),
            "appearance" => Ok(Aspect::Appearance),
            other => Err(format!("unknown aspect: {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct AspectScore {
    pub accuracy: f64,
    #[serde(flatten)]
    pub prf: TuplePRF,
}

/// Scores one aspect of the corpus.
///
/// * occasion: one label per post; accuracy plus macro precision/recall
///   over the classes present in gold or prediction, F1 from those.
/// * category: multiset matching on `(gender, age, type)`.
/// * appearance: multiset matching on `(gender, age, type, appearance)`,
///   so an appearance only counts when its person and type match too.
///
/// For category and appearance, accuracy is the fraction of posts whose
/// projected multisets agree exactly.
pub fn aspect_metrics(items: &[EvalItem], aspect: Aspect) -> AspectScore {
    match aspect {
        Aspect::Occasion => occasion_metrics(items),
        Aspect::Category => projected(items, |t| (t.gender, t.age, t.item_type.clone())),
        Aspect::Appearance => projected(items, |t| {
            (t.gender, t.age, t.item_type.clone(), t.app.clone())
        }),
    }
}

fn projected<K: PartialEq>(items: &[EvalItem], key: impl Fn(&Tuple) -> K) -> AspectScore {
    let (mut tp, mut fp, mut fn_, mut exact) = (0, 0, 0, 0);
    for item in items {
        let pred: Vec<K> = item.pred_tuples().iter().map(&key).collect();
        let gold: Vec<K> = item.gold.tuples().iter().map(&key).collect();
        let m = match_multiset(&pred, &gold);
        tp += m.tp;
        fp += m.fp;
        fn_ += m.fn_;
        exact += usize::from(m.is_exact());
    }
    AspectScore {
        accuracy: ratio(exact, items.len()),
        prf: TuplePRF::from_counts(tp, fp, fn_),
    }
}

fn predicted_occasion(item: &EvalItem) -> Option<Occasion> {
    item.pred_tuples().first().map(|t| t.occ)
}

fn occasion_metrics(items: &[EvalItem]) -> AspectScore {
    let pairs: Vec<(Occasion, Option<Occasion>)> = items
        .iter()
        .map(|i| (i.gold.occasion, predicted_occasion(i)))
        .collect();
    let correct = pairs.iter().filter(|(g, p)| Some(*g) == *p).count();
    let predicted = pairs.iter().filter(|(_, p)| p.is_some()).count();

    let classes: BTreeSet<Occasion> = pairs
        .iter()
        .flat_map(|(g, p)| std::iter::once(*g).chain(*p))
        .collect();
    let (mut p_sum, mut r_sum) = (0.0, 0.0);
    for class in &classes {
        let tp = pairs
            .iter()
            .filter(|(g, p)| *g == *class && *p == Some(*class))
            .count();
        let n_pred = pairs.iter().filter(|(_, p)| *p == Some(*class)).count();
        let n_gold = pairs.iter().filter(|(g, _)| g == class).count();
        p_sum += ratio(tp, n_pred);
        r_sum += ratio(tp, n_gold);
    }
    let n = classes.len().max(1) as f64;
    let (precision, recall) = (p_sum / n, r_sum / n);
    AspectScore {
        accuracy: ratio(correct, items.len()),
        prf: TuplePRF {
            precision,
            recall,
            f1: harmonic(precision, recall),
            tp: correct,
            fp: predicted - correct,
            fn_: items.len() - correct,
        },
    }
}
