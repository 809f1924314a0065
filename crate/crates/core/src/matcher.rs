//! Non-learned baseline segmenter: local-statistics embeddings, per-position
//! unit normalisation, cosine matching against the reference, thresholding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, ProbMask, Rgb8Image};
use crate::morphology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Cosine similarity against the mean reference embedding.
    MeanReference,
    /// Sliding cross-correlation of the full reference embedding.
    FullXcorr,
}

/// Origin subtracted from raw feature vectors before unit normalisation.
///
/// Raw features are all non-negative, so uncentred cosines crowd near 1 and
/// a fixed threshold separates little. Centering on the input's own mean
/// makes the threshold relative to the image at hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Raw features as computed (all components non-negative).
    None,
    /// Colour and local-mean components shifted by −0.5.
    MidGray,
    /// Mean raw vector of the input image, applied to input and reference.
    InputMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBankConfig {
    pub window_scales: Vec<usize>,
    pub aggregation: Aggregation,
    pub threshold: f64,
    pub cleanup_radius: usize,
    pub centering: Centering,
}

impl Default for FilterBankConfig {
    fn default() -> Self {
        Self {
            window_scales: vec![5, 11, 21],
            aggregation: Aggregation::MeanReference,
            threshold: 0.55,
            cleanup_radius: 2,
            centering: Centering::InputMean,
        }
    }
}

impl FilterBankConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.window_scales.iter().find(|&&w| w < 3 || w % 2 == 0) {
            return Err(Error::Config(format!(
                "window size {w} must be odd and at least 3"
            )));
        }
        if !(self.threshold > -1.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!(
                "threshold {} outside (-1, 1)",
                self.threshold
            )));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        3 + 9 * self.window_scales.len()
    }

    pub fn largest_window(&self) -> usize {
        self.window_scales.iter().copied().max().unwrap_or(1)
    }

    /// Border excluded when averaging the reference embedding.
    pub fn border(&self) -> usize {
        self.largest_window() / 2
    }
}

/// Per-position feature vectors, unit norm or exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingField {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl EmbeddingField {
    /// Normalises each raw vector to unit length; zero vectors stay zero.
    pub fn from_raw(
        width: usize,
        height: usize,
        channels: usize,
        mut data: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 || data.len() != width * height * channels {
            return Err(Error::Dimensions(format!(
                "field of {} values for {width}x{height}x{channels}",
                data.len()
            )));
        }
        for v in data.chunks_exact_mut(channels) {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn vector(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }
}

/// Real-valued score map with the canvas's dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl ScoreMap {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Maps cosine similarity `s ∈ [−1, 1]` to `(s + 1) / 2`.
    pub fn to_prob(&self) -> ProbMask {
        let data = self
            .data
            .iter()
            .map(|s| ((s + 1.0) / 2.0).clamp(0.0, 1.0))
            .collect();
        ProbMask::new(self.width, self.height, data).expect("values clamped into [0, 1]")
    }
}

#[inline]
fn reflect(i: i64, n: usize) -> usize {
    // Mirror without repeating the edge sample; valid while |overhang| < n.
    let n = n as i64;
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r as usize
}

/// Sum over a centered `(2r+1)²` window with reflect padding, separably.
fn box_sum(src: &[f64], width: usize, height: usize, r: usize) -> Vec<f64> {
    let mut rows = vec![0.0; width * height];
    let mut prefix = vec![0.0; width + 2 * r + 1];
    for y in 0..height {
        let line = &src[y * width..(y + 1) * width];
        for i in 0..width + 2 * r {
            prefix[i + 1] = prefix[i] + line[reflect(i as i64 - r as i64, width)];
        }
        for x in 0..width {
            rows[y * width + x] = prefix[x + 2 * r + 1] - prefix[x];
        }
    }
    let mut out = vec![0.0; width * height];
    let mut prefix = vec![0.0; height + 2 * r + 1];
    for x in 0..width {
        for i in 0..height + 2 * r {
            prefix[i + 1] = prefix[i] + rows[reflect(i as i64 - r as i64, height) * width + x];
        }
        for y in 0..height {
            out[y * width + x] = prefix[y + 2 * r + 1] - prefix[y];
        }
    }
    out
}

/// Embeds an image as `[rgb/255]` followed, for each window size, by the
/// per-channel local mean, local standard deviation, and mean gradient
/// magnitude over the centered window; then subtracts the origin chosen by
/// `cfg.centering` and unit-normalises each position.
pub fn embed(image: &Rgb8Image, cfg: &FilterBankConfig) -> Result<EmbeddingField> {
    let raw = raw_features(image, cfg)?;
    let center = feature_center(&raw, cfg);
    raw.centered(&center)
}

/// Un-normalised per-position feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RawField {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RawField {
    /// Mean raw vector over all positions.
    pub fn mean_vector(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.channels];
        for v in self.data.chunks_exact(self.channels) {
            sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        }
        let n = (self.width * self.height) as f64;
        sum.iter().map(|s| s / n).collect()
    }

    /// Subtracts `center` from every vector, then unit-normalises. Vectors
    /// left shorter than `1e-9` become zero rather than rounding noise.
    pub fn centered(&self, center: &[f64]) -> Result<EmbeddingField> {
        if center.len() != self.channels {
            return Err(Error::ChannelMismatch {
                field: self.channels,
                reference: center.len(),
            });
        }
        let mut data = self.data.clone();
        for v in data.chunks_exact_mut(self.channels) {
            v.iter_mut().zip(center).for_each(|(x, c)| *x -= c);
            if v.iter().map(|x| x * x).sum::<f64>() < 1e-18 {
                v.fill(0.0);
            }
        }
        EmbeddingField::from_raw(self.width, self.height, self.channels, data)
    }
}

/// The origin `cfg.centering` prescribes for a field's own features.
pub fn feature_center(raw: &RawField, cfg: &FilterBankConfig) -> Vec<f64> {
    match cfg.centering {
        Centering::None => vec![0.0; raw.channels],
        Centering::MidGray => {
            let mut c = vec![0.0; raw.channels];
            c[..3].fill(0.5);
            for s in 0..cfg.window_scales.len() {
                c[3 + 9 * s..6 + 9 * s].fill(0.5);
            }
            c
        }
        Centering::InputMean => raw.mean_vector(),
    }
}

/// Raw (un-normalised, uncentred) features; see [`embed`].
pub fn raw_features(image: &Rgb8Image, cfg: &FilterBankConfig) -> Result<RawField> {
    cfg.validate()?;
    let (w, h) = image.dims();
    let largest = cfg.largest_window();
    if w < largest || h < largest {
        return Err(Error::Dimensions(format!(
            "{w}x{h} image is smaller than the {largest}px window"
        )));
    }
    let n = w * h;
    let planes: Vec<Vec<f64>> = (0..3)
        .map(|c| {
            image
                .data()
                .chunks_exact(3)
                .map(|p| p[c] as f64 / 255.0)
                .collect()
        })
        .collect();
    let grads: Vec<Vec<f64>> = planes
        .iter()
        .map(|p| {
            let mut g = vec![0.0; n];
            for y in 0..h {
                for x in 0..w {
                    let at = |xx: i64, yy: i64| p[reflect(yy, h) * w + reflect(xx, w)];
                    let (xi, yi) = (x as i64, y as i64);
                    let gx = (at(xi + 1, yi) - at(xi - 1, yi)) / 2.0;
                    let gy = (at(xi, yi + 1) - at(xi, yi - 1)) / 2.0;
                    g[y * w + x] = (gx * gx + gy * gy).sqrt();
                }
            }
            g
        })
        .collect();
    let squares: Vec<Vec<f64>> = planes
        .iter()
        .map(|p| p.iter().map(|v| v * v).collect())
        .collect();

    // Feature planes in output channel order.
    let mut features: Vec<Vec<f64>> = planes.clone();
    for &win in &cfg.window_scales {
        let r = win / 2;
        let area = (win * win) as f64;
        let stats: Vec<[Vec<f64>; 3]> = (0..3)
            .into_par_iter()
            .map(|c| {
                let mean: Vec<f64> = box_sum(&planes[c], w, h, r)
                    .iter()
                    .map(|s| s / area)
                    .collect();
                let sq = box_sum(&squares[c], w, h, r);
                let std = mean
                    .iter()
                    .zip(&sq)
                    .map(|(m, s)| {
                        let var = s / area - m * m;
                        // Far below the smallest variance 8-bit input can produce.
                        if var < 1e-12 {
                            0.0
                        } else {
                            var.sqrt()
                        }
                    })
                    .collect();
                let grad = box_sum(&grads[c], w, h, r)
                    .iter()
                    .map(|s| s / area)
                    .collect();
                [mean, std, grad]
            })
            .collect();
        for kind in 0..3 {
            for s in &stats {
                features.push(s[kind].clone());
            }
        }
    }

    let channels = features.len();
    debug_assert_eq!(channels, cfg.channels());
    let mut data = vec![0.0; n * channels];
    for (c, plane) in features.iter().enumerate() {
        for (i, &v) in plane.iter().enumerate() {
            data[i * channels + c] = v;
        }
    }
    Ok(RawField {
        width: w,
        height: h,
        channels,
        data,
    })
}

/// Mean of the interior unit vectors (a `border`-pixel frame is skipped),
/// renormalised to unit length.
pub fn reference_vector(field: &EmbeddingField, border: usize) -> Result<Vec<f64>> {
    let c = field.channels;
    let (xs, ys) = if field.width > 2 * border && field.height > 2 * border {
        (border..field.width - border, border..field.height - border)
    } else {
        (0..field.width, 0..field.height)
    };
    let mut sum = vec![0.0; c];
    let mut nonzero = 0usize;
    let mut count = 0usize;
    for y in ys {
        for x in xs.clone() {
            let v = field.vector(x, y);
            if v.iter().any(|&e| e != 0.0) {
                nonzero += 1;
            }
            count += 1;
            sum.iter_mut().zip(v).for_each(|(s, e)| *s += e);
        }
    }
    if nonzero == 0 {
        return Err(Error::DegenerateReference("all-zero embedding"));
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
    let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-9 {
        return Err(Error::DegenerateReference("reference vectors cancel out"));
    }
    Ok(mean.iter().map(|x| x / norm).collect())
}

/// Per-position dot product with a unit reference; zero vectors score 0.
pub fn similarity_map(field: &EmbeddingField, reference: &[f64]) -> Result<ScoreMap> {
    if reference.len() != field.channels {
        return Err(Error::ChannelMismatch {
            field: field.channels,
            reference: reference.len(),
        });
    }
    let data = field
        .data
        .par_chunks_exact(field.channels)
        .map(|v| {
            v.iter()
                .zip(reference)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .clamp(-1.0, 1.0)
        })
        .collect();
    Ok(ScoreMap {
        width: field.width,
        height: field.height,
        data,
    })
}

/// Valid-mode cross-correlation of two unit-norm fields, divided by the
/// number of reference positions and written at window centers. Positions
/// the window cannot be centred on copy the nearest valid value.
pub fn xcorr_map(image_field: &EmbeddingField, ref_field: &EmbeddingField) -> Result<ScoreMap> {
    let c = image_field.channels;
    if ref_field.channels != c {
        return Err(Error::ChannelMismatch {
            field: c,
            reference: ref_field.channels,
        });
    }
    let (w, h) = (image_field.width, image_field.height);
    let (rw, rh) = (ref_field.width, ref_field.height);
    if rw >= w || rh >= h {
        return Err(Error::Dimensions(format!(
            "reference {rw}x{rh} must be smaller than the image {w}x{h}"
        )));
    }
    if ref_field.data.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateReference("all-zero reference field"));
    }
    let (vw, vh) = (w - rw + 1, h - rh + 1);
    let norm = (rw * rh) as f64;
    let row_len = rw * c;
    let valid: Vec<f64> = (0..vh)
        .into_par_iter()
        .flat_map_iter(|r| {
            (0..vw).map(move |col| {
                let mut acc = 0.0;
                for u in 0..rh {
                    let start = ((r + u) * w + col) * c;
                    let img_row = &image_field.data[start..start + row_len];
                    let ref_row = &ref_field.data[u * row_len..(u + 1) * row_len];
                    acc += img_row.iter().zip(ref_row).map(|(a, b)| a * b).sum::<f64>();
                }
                acc / norm
            })
        })
        .collect();
    let mut data = vec![0.0; w * h];
    for y in 0..h {
        let r = y.saturating_sub(rh / 2).min(vh - 1);
        for x in 0..w {
            let col = x.saturating_sub(rw / 2).min(vw - 1);
            data[y * w + x] = valid[r * vw + col];
        }
    }
    Ok(ScoreMap {
        width: w,
        height: h,
        data,
    })
}

/// Threshold at `cfg.threshold`, then open and close with a disk.
pub fn segment(map: &ScoreMap, cfg: &FilterBankConfig) -> BinaryMask {
    let raw = BinaryMask::new(
        map.width,
        map.height,
        map.data
            .iter()
            .map(|&s| (s >= cfg.threshold) as u8)
            .collect(),
    )
    .expect("dimensions come from a valid map");
    if cfg.cleanup_radius == 0 {
        return raw;
    }
    morphology::close(
        &morphology::open(&raw, cfg.cleanup_radius),
        cfg.cleanup_radius,
    )
}

/// Anything with an input image and a reference patch.
pub trait SegmentationTask {
    fn input(&self) -> &Rgb8Image;
    fn reference_patch(&self) -> &Rgb8Image;
}

impl SegmentationTask for crate::colltex::CollTexSample {
    fn input(&self) -> &Rgb8Image {
        &self.image
    }
    fn reference_patch(&self) -> &Rgb8Image {
        &self.reference
    }
}

impl SegmentationTask for crate::omniglot::OmniglotSample {
    fn input(&self) -> &Rgb8Image {
        &self.image
    }
    fn reference_patch(&self) -> &Rgb8Image {
        &self.reference
    }
}

impl SegmentationTask for (Rgb8Image, Rgb8Image) {
    fn input(&self) -> &Rgb8Image {
        &self.0
    }
    fn reference_patch(&self) -> &Rgb8Image {
        &self.1
    }
}

#[derive(Debug, Clone)]
pub struct BaselineOutput {
    pub scores: ScoreMap,
    pub prob: ProbMask,
    pub mask: BinaryMask,
}

pub fn run_baseline<T: SegmentationTask + ?Sized>(
    sample: &T,
    cfg: &FilterBankConfig,
) -> Result<BaselineOutput> {
    let raw_image = raw_features(sample.input(), cfg)?;
    let raw_ref = raw_features(sample.reference_patch(), cfg)?;
    // The reference is expressed relative to the input's origin.
    let center = feature_center(&raw_image, cfg);
    let image_field = raw_image.centered(&center)?;
    let ref_field = raw_ref.centered(&center)?;
    let scores = match cfg.aggregation {
        Aggregation::MeanReference => {
            similarity_map(&image_field, &reference_vector(&ref_field, cfg.border())?)?
        }
        Aggregation::FullXcorr => xcorr_map(&image_field, &ref_field)?,
    };
    let prob = scores.to_prob();
    let mask = segment(&scores, cfg);
    Ok(BaselineOutput { scores, prob, mask })
}
