//! Foreground/background-balanced cross-entropy, IoU, and dataset reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, ProbMask};

pub const LOG_EPS: f64 = 1e-7;
pub const DEFAULT_THRESHOLD: f64 = 0.9;
/// Row and column keys of the standard report grid.
pub const GRID_PATCH_SIZES: [usize; 5] = [16, 32, 64, 96, 128];
pub const GRID_REGION_COUNTS: [usize; 4] = [2, 5, 10, 20];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_fg: f64,
    pub l_bg: f64,
    pub l_total: f64,
    pub n_fg: usize,
    pub n_bg: usize,
}

fn same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// Cross-entropy averaged separately over foreground and background pixels.
///
/// Predictions are clamped to `[ε, 1 − ε]`; a class with no pixels adds 0.
pub fn weighted_bce(truth: &BinaryMask, pred: &ProbMask) -> Result<LossBreakdown> {
    same_dims(truth.dims(), pred.dims())?;
    let (mut sum_fg, mut sum_bg) = (0.0, 0.0);
    let (mut n_fg, mut n_bg) = (0usize, 0usize);
    for (&s, &p) in truth.data().iter().zip(pred.data()) {
        let p = p.clamp(LOG_EPS, 1.0 - LOG_EPS);
        if s == 1 {
            sum_fg += p.ln();
            n_fg += 1;
        } else {
            sum_bg += (1.0 - p).ln();
            n_bg += 1;
        }
    }
    let l_fg = if n_fg > 0 { -sum_fg / n_fg as f64 } else { 0.0 };
    let l_bg = if n_bg > 0 { -sum_bg / n_bg as f64 } else { 0.0 };
    Ok(LossBreakdown {
        l_fg,
        l_bg,
        l_total: l_fg + l_bg,
        n_fg,
        n_bg,
    })
}

/// `1` where `pred ≥ threshold`.
pub fn binarize(pred: &ProbMask, threshold: f64) -> BinaryMask {
    let (w, h) = pred.dims();
    BinaryMask::new(
        w,
        h,
        pred.data()
            .iter()
            .map(|&p| (p >= threshold) as u8)
            .collect(),
    )
    .expect("dimensions come from a valid mask")
}

/// `|A ∩ B| / |A ∪ B|`; two empty masks score 1.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    same_dims(a.dims(), b.dims())?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        inter += (x & y) as usize;
        union += (x | y) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub id: String,
    pub iou: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub patch_size: usize,
    pub region_count: usize,
    pub mean_iou: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub num_samples: usize,
    pub mean_iou: f64,
    pub per_sample: Vec<SampleScore>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<GridCell>,
}

impl EvalReport {
    /// Aggregates scores in the given order; the mean is unweighted per image.
    pub fn from_scores(threshold: f64, per_sample: Vec<SampleScore>) -> Self {
        let n = per_sample.len();
        let mean_iou = if n == 0 {
            0.0
        } else {
            per_sample.iter().map(|s| s.iou).sum::<f64>() / n as f64
        };
        let mut cells: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
        for s in &per_sample {
            if let (Some(p), Some(r)) = (s.patch_size, s.region_count) {
                let e = cells.entry((p, r)).or_default();
                e.0 += s.iou;
                e.1 += 1;
            }
        }
        let grid = cells
            .into_iter()
            .map(|((patch_size, region_count), (sum, count))| GridCell {
                patch_size,
                region_count,
                mean_iou: sum / count as f64,
                count,
            })
            .collect();
        Self {
            threshold,
            num_samples: n,
            mean_iou,
            per_sample: per_sample.to_vec(),
            grid,
        }
    }

    pub fn per_sample_iou(&self) -> Vec<f64> {
        self.per_sample.iter().map(|s| s.iou).collect()
    }

    /// Rows are reference patch sizes, columns region counts; the standard
    /// keys always appear and any other observed key is appended.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<usize> = GRID_PATCH_SIZES.to_vec();
        let mut cols: Vec<usize> = GRID_REGION_COUNTS.to_vec();
        for c in &self.grid {
            if !rows.contains(&c.patch_size) {
                rows.push(c.patch_size);
            }
            if !cols.contains(&c.region_count) {
                cols.push(c.region_count);
            }
        }
        rows.sort_unstable();
        cols.sort_unstable();
        let lookup: BTreeMap<(usize, usize), f64> = self
            .grid
            .iter()
            .map(|c| ((c.patch_size, c.region_count), c.mean_iou))
            .collect();

        let mut out = String::new();
        let _ = writeln!(
            out,
            "mean IoU {:.3} over {} samples (threshold {})",
            self.mean_iou, self.num_samples, self.threshold
        );
        let _ = write!(out, "{:>12} |", "patch \\ N");
        for c in &cols {
            let _ = write!(out, " {c:>7}");
        }
        out.push('\n');
        let _ = writeln!(out, "{}", "-".repeat(14 + 8 * cols.len()));
        for r in &rows {
            let _ = write!(out, "{:>12} |", format!("{r}x{r}"));
            for c in &cols {
                match lookup.get(&(*r, *c)) {
                    Some(v) => {
                        let _ = write!(out, " {v:>7.3}");
                    }
                    None => {
                        let _ = write!(out, " {:>7}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Scores every sample of the dataset at `truth_dir` against predictions.
///
/// For sample `<id>` the prediction is `pred_dir/samples/<id>/pred.png` or,
/// failing that, `pred_dir/samples/<id>/mask.png`, read as `value / 255`.
pub fn evaluate_dataset(pred_dir: &Path, truth_dir: &Path, threshold: f64) -> Result<EvalReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!(
            "threshold {threshold} outside (0, 1)"
        )));
    }
    let manifest = crate::dataset::read_manifest(truth_dir)?;
    let mut scores = Vec::with_capacity(manifest.samples.len());
    for entry in &manifest.samples {
        let id = entry.id();
        let truth = BinaryMask::load_png(&truth_dir.join(&entry.mask))?;
        let sample_dir = pred_dir.join("samples").join(&id);
        let pred_path = ["pred.png", "mask.png"]
            .iter()
            .map(|f| sample_dir.join(f))
            .find(|p| p.is_file())
            .ok_or_else(|| Error::MissingSample {
                id: id.clone(),
                path: sample_dir.join("pred.png"),
            })?;
        let pred = ProbMask::load_png(&pred_path)?;
        let score = iou(&binarize(&pred, threshold), &truth)?;
        scores.push(SampleScore {
            id,
            iou: score,
            patch_size: Some(entry.meta.patch_size()),
            region_count: Some(entry.meta.region_count()),
        });
    }
    Ok(EvalReport::from_scores(threshold, scores))
}
