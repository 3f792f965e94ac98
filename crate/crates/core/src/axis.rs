//! Basic↔clinical scoring of documents and score homophily along citations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{CitationNetwork, Lexicon};
use crate::error::{Error, Result};

/// Fraction of clinical terms among basic + clinical terms; `None` when both counts are zero.
pub fn translational_score(basic: u64, clinical: u64) -> Option<f64> {
    let total = basic + clinical;
    (total > 0).then(|| clinical as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TranslationalClass {
    Basic,
    Translational,
    Clinical,
    Unscored,
}

impl TranslationalClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TranslationalClass::Basic => "basic",
            TranslationalClass::Translational => "translational",
            TranslationalClass::Clinical => "clinical",
            TranslationalClass::Unscored => "unscored",
        }
    }
}

impl std::str::FromStr for TranslationalClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(TranslationalClass::Basic),
            "translational" => Ok(TranslationalClass::Translational),
            "clinical" => Ok(TranslationalClass::Clinical),
            "unscored" => Ok(TranslationalClass::Unscored),
            other => Err(Error::InvalidParameter(format!("unknown class `{other}`"))),
        }
    }
}

/// Class cut points on the score axis. Both boundaries belong to the translational stratum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { low: 1.0 / 3.0, high: 2.0 / 3.0 }
    }
}

impl Thresholds {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        let t = Thresholds { low, high };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.low && self.low < self.high && self.high <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "thresholds must satisfy 0 <= low < high <= 1, got low={} high={}",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

pub fn classify(score: f64, thresholds: Thresholds) -> Result<TranslationalClass> {
    thresholds.validate()?;
    Ok(if score < thresholds.low {
        TranslationalClass::Basic
    } else if score > thresholds.high {
        TranslationalClass::Clinical
    } else {
        TranslationalClass::Translational
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationalProfile {
    pub score: Option<f64>,
    pub class: TranslationalClass,
}

impl TranslationalProfile {
    pub fn from_counts(basic: u64, clinical: u64, thresholds: Thresholds) -> Result<Self> {
        Self::from_score(translational_score(basic, clinical), thresholds)
    }

    pub fn from_score(score: Option<f64>, thresholds: Thresholds) -> Result<Self> {
        let class = match score {
            Some(t) => classify(t, thresholds)?,
            None => {
                thresholds.validate()?;
                TranslationalClass::Unscored
            }
        };
        Ok(TranslationalProfile { score, class })
    }
}

/// Scores every document of the network; documents without any term information are unscored.
pub fn score_network(
    net: &CitationNetwork,
    lexicon: Option<&Lexicon>,
    thresholds: Thresholds,
) -> Result<Vec<TranslationalProfile>> {
    net.documents()
        .iter()
        .map(|d| {
            let score = d.term_counts(lexicon).and_then(|(b, c)| translational_score(b, c));
            TranslationalProfile::from_score(score, thresholds)
        })
        .collect()
}

/// Pearson correlation between citing and cited scores over every directed edge with both ends
/// scored. `Ok(None)` when either marginal has zero variance.
pub fn homophily_assortativity(net: &CitationNetwork, scores: &[Option<f64>]) -> Result<Option<f64>> {
    if scores.len() != net.len() {
        return Err(Error::Mismatch { partition: net.len(), scores: scores.len() });
    }
    let pairs: Vec<(f64, f64)> = net
        .edges()
        .iter()
        .filter_map(|&(u, v)| Some((scores[u]?, scores[v]?)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoScorableEdges);
    }
    Ok(pearson(&pairs))
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    // variances below this are rounding noise around a constant
    const EPS: f64 = 1e-24;
    if sxx <= EPS * n || syy <= EPS * n {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassHistogram {
    pub basic: usize,
    pub translational: usize,
    pub clinical: usize,
    pub unscored: usize,
}

impl ClassHistogram {
    fn add(&mut self, class: TranslationalClass) {
        match class {
            TranslationalClass::Basic => self.basic += 1,
            TranslationalClass::Translational => self.translational += 1,
            TranslationalClass::Clinical => self.clinical += 1,
            TranslationalClass::Unscored => self.unscored += 1,
        }
    }
}

/// Score aggregate of one front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontScoreSummary {
    pub front: usize,
    pub size: usize,
    pub mean_t: Option<f64>,
    pub share_unscored: f64,
    pub histogram: ClassHistogram,
    /// Every member is unscored.
    pub all_unscored: bool,
}

/// Per-front score aggregates; `labels[v]` is the front of node `v`. Output is ordered by front.
pub fn front_score_summary(labels: &[usize], profiles: &[TranslationalProfile]) -> Result<Vec<FrontScoreSummary>> {
    if labels.len() != profiles.len() {
        return Err(Error::Mismatch { partition: labels.len(), scores: profiles.len() });
    }
    let mut acc: BTreeMap<usize, (usize, usize, f64, ClassHistogram)> = BTreeMap::new();
    for (&front, p) in labels.iter().zip(profiles) {
        let e = acc.entry(front).or_default();
        e.0 += 1;
        if let Some(t) = p.score {
            e.1 += 1;
            e.2 += t;
        }
        e.3.add(p.class);
    }
    Ok(acc
        .into_iter()
        .map(|(front, (size, scored, sum, histogram))| FrontScoreSummary {
            front,
            size,
            mean_t: (scored > 0).then(|| sum / scored as f64),
            share_unscored: (size - scored) as f64 / size as f64,
            histogram,
            all_unscored: scored == 0,
        })
        .collect())
}
