//! Episode reports, result tables and graymap dumps.

use std::fmt::Write as _;

use serde::Serialize;
use touchbench_core::recognition::EpisodeReport;
use touchbench_core::render::PATCH_SIZE;
use touchbench_core::shapeclass::{ClassifierReport, StampShape};

/// Name of the touch-location rule, recorded in every summary.
pub const LOCATION_HEURISTIC: &str = "max mean predicted separation over sampled frames (substitute heuristic)";

/// One line per touch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TouchLine<'a> {
    pub kind: &'static str,
    pub set: &'a str,
    pub mode: &'static str,
    pub episode: usize,
    pub true_object: &'a str,
    pub touch: usize,
    pub hypothesis: &'a str,
    /// Sensor pose, row-major 3×4.
    pub frame: [f64; 12],
    pub likelihoods: &'a [f64],
    pub winner: &'a str,
    pub posterior: &'a [f64],
    pub correct: bool,
}

/// Closing line of a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryLine<'a> {
    pub kind: &'static str,
    pub set: &'a str,
    pub mode: &'static str,
    pub candidates: &'a [String],
    pub episodes: usize,
    pub touches: usize,
    pub seed: u64,
    pub location_heuristic: &'static str,
    /// Fraction of episodes whose posterior leader is correct after each touch.
    pub accuracy_per_touch: Vec<f64>,
    pub final_accuracy: f64,
    pub final_accuracy_per_object: Vec<f64>,
}

/// Fraction correct after each touch, over episodes of equal length.
pub fn accuracy_per_touch(episodes: &[EpisodeReport]) -> Vec<f64> {
    let n = episodes.iter().map(|e| e.touches.len()).max().unwrap_or(0);
    (0..n)
        .map(|t| {
            let hits = episodes.iter().filter(|e| e.touches.get(t).is_some_and(|x| x.correct)).count();
            hits as f64 / episodes.len() as f64
        })
        .collect()
}

pub fn final_accuracy(episodes: &[EpisodeReport]) -> f64 {
    if episodes.is_empty() {
        return 0.0;
    }
    episodes.iter().filter(|e| e.final_correct()).count() as f64 / episodes.len() as f64
}

/// JSON lines for a batch of episodes followed by their summary.
pub fn episode_jsonl(set: &str, seed: u64, episodes: &[EpisodeReport]) -> String {
    let mut out = String::new();
    let Some(first) = episodes.first() else {
        return out;
    };
    let names = &first.candidates;
    for (e, rep) in episodes.iter().enumerate() {
        for (t, touch) in rep.touches.iter().enumerate() {
            let line = TouchLine {
                kind: "touch",
                set,
                mode: rep.mode.as_str(),
                episode: e,
                true_object: &names[rep.true_object],
                touch: t + 1,
                hypothesis: &names[touch.hypothesis],
                frame: touch.frame.pose.to_row_major_3x4(),
                likelihoods: &touch.likelihoods,
                winner: &names[touch.winner],
                posterior: &touch.posterior,
                correct: touch.correct,
            };
            out.push_str(&serde_json::to_string(&line).expect("serializable"));
            out.push('\n');
        }
    }
    let per_object = (0..names.len())
        .map(|o| {
            let mine: Vec<EpisodeReport> = episodes.iter().filter(|e| e.true_object == o).cloned().collect();
            final_accuracy(&mine)
        })
        .collect();
    let summary = SummaryLine {
        kind: "summary",
        set,
        mode: first.mode.as_str(),
        candidates: names,
        episodes: episodes.len(),
        touches: first.touches.len(),
        seed,
        location_heuristic: LOCATION_HEURISTIC,
        accuracy_per_touch: accuracy_per_touch(episodes),
        final_accuracy: final_accuracy(episodes),
        final_accuracy_per_object: per_object,
    };
    out.push_str(&serde_json::to_string(&summary).expect("serializable"));
    out.push('\n');
    out
}

/// Final-touch success rates of both touch models on each object set.
#[derive(Clone, Debug, PartialEq)]
pub struct RecognitionRow {
    pub set: String,
    pub proprioception: f64,
    pub i2t: f64,
}

fn pct(v: f64) -> String {
    format!("{:.0}%", 100.0 * v)
}

/// Object sets side by side, proprioception then I2T, with the mean last.
pub fn recognition_table(rows: &[RecognitionRow]) -> String {
    let mut groups: Vec<(String, f64, f64)> = rows.iter().map(|r| (r.set.clone(), r.proprioception, r.i2t)).collect();
    if !rows.is_empty() {
        let n = rows.len() as f64;
        groups.push((
            "Mean".into(),
            rows.iter().map(|r| r.proprioception).sum::<f64>() / n,
            rows.iter().map(|r| r.i2t).sum::<f64>() / n,
        ));
    }
    let mut head = format!("{:<12}", "Object set");
    let mut sub = format!("{:<12}", "Touch Model");
    let mut vals = format!("{:<12}", "");
    for (name, p, i) in &groups {
        let mut title = name.clone();
        if let Some(c) = title.get_mut(0..1) {
            c.make_ascii_uppercase();
        }
        let _ = write!(head, " | {title:^15}");
        let _ = write!(sub, " | {:>7} {:>7}", "prop.", "I2T");
        let _ = write!(vals, " | {:>7} {:>7}", pct(*p), pct(*i));
    }
    format!("{head}\n{sub}\n{vals}\n")
}

/// Per-shape held-out accuracy followed by the total.
pub fn shape_table(r: &ClassifierReport) -> String {
    let mut head = format!("{:<6}", "Shape");
    let mut vals = format!("{:<6}", "Acc.");
    for s in StampShape::ALL {
        let mut name = if s == StampShape::T { "Letter\"T\"".to_string() } else { s.name().to_string() };
        if let Some(c) = name.get_mut(0..1) {
            c.make_ascii_uppercase();
        }
        let w = name.len().max(6);
        let _ = write!(head, " | {name:>w$}");
        let _ = write!(vals, " | {:>w$.2}", r.per_class[s.index()]);
    }
    let _ = write!(head, " | {:>6}", "Total");
    let _ = write!(vals, " | {:>6.2}", r.total);
    format!("{head}\n{vals}\n")
}

/// 8-bit binary graymap of a 48×48 patch in `[0, 1]`.
pub fn patch_pgm(values: &[f64]) -> Vec<u8> {
    let mut out = format!("P5\n{PATCH_SIZE} {PATCH_SIZE}\n255\n").into_bytes();
    out.extend(values.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}
