//! On-disk dataset layout:
//!
//! ```text
//! out_dir/manifest.json
//! out_dir/samples/<6-digit index>/{image.png, mask.png, reference.png}
//! ```
//!
//! Masks are 8-bit grayscale with values {0, 255}. The manifest echoes the
//! generator configuration and every sampled parameter, enough to rebuild
//! each ground-truth mask without the pixels.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colltex::{self, generate_colltex, CollTexConfig, CollTexMeta, CollTexSample};
use crate::error::{Error, Result};
use crate::image::{BinaryMask, ProbMask, Rgb8Image};
use crate::matcher::{run_baseline, FilterBankConfig, SegmentationTask};
use crate::omniglot::{
    self, generate_omniglot, GlyphSet, OmniglotConfig, OmniglotMeta, OmniglotSample,
};
use crate::texture_store::TextureStore;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", content = "config", rename_all = "lowercase")]
pub enum TaskConfig {
    Colltex(CollTexConfig),
    Omniglot(OmniglotConfig),
}

impl TaskConfig {
    pub fn image_size(&self) -> usize {
        match self {
            TaskConfig::Colltex(c) => c.image_size,
            TaskConfig::Omniglot(c) => c.image_size,
        }
    }
}

/// Where the textures and glyphs came from and how they were split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub textures: String,
    pub num_textures: usize,
    pub texture_holdout: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glyphs: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_glyphs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glyph_holdout: Option<usize>,
    pub split_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMeta {
    Colltex(CollTexMeta),
    Omniglot(OmniglotMeta),
}

impl SampleMeta {
    pub fn patch_size(&self) -> usize {
        match self {
            SampleMeta::Colltex(m) => m.patch_size,
            SampleMeta::Omniglot(m) => m.patch_size,
        }
    }

    /// Number of regions for collages, number of characters for scenes.
    pub fn region_count(&self) -> usize {
        match self {
            SampleMeta::Colltex(m) => m.num_regions,
            SampleMeta::Omniglot(m) => m.placements.len(),
        }
    }

    /// Texture ids appearing anywhere in the sample.
    pub fn texture_ids(&self) -> Vec<usize> {
        match self {
            SampleMeta::Colltex(m) => m.region_texture_ids.clone(),
            SampleMeta::Omniglot(m) => m
                .placements
                .iter()
                .map(|p| p.texture_id)
                .chain(m.background_texture_id)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: u64,
    pub image: String,
    pub mask: String,
    pub reference: String,
    pub width: usize,
    pub height: usize,
    pub reference_width: usize,
    pub reference_height: usize,
    pub meta: SampleMeta,
}

impl ManifestEntry {
    pub fn id(&self) -> String {
        sample_id(self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    #[serde(flatten)]
    pub task: TaskConfig,
    pub corpus: CorpusInfo,
    pub samples: Vec<ManifestEntry>,
}

pub fn sample_id(index: u64) -> String {
    format!("{index:06}")
}

#[derive(Debug, Clone)]
pub enum GeneratedSample {
    CollTex(CollTexSample),
    Omniglot(OmniglotSample),
}

impl GeneratedSample {
    pub fn image(&self) -> &Rgb8Image {
        match self {
            GeneratedSample::CollTex(s) => &s.image,
            GeneratedSample::Omniglot(s) => &s.image,
        }
    }

    pub fn reference(&self) -> &Rgb8Image {
        match self {
            GeneratedSample::CollTex(s) => &s.reference,
            GeneratedSample::Omniglot(s) => &s.reference,
        }
    }

    pub fn truth(&self) -> &BinaryMask {
        match self {
            GeneratedSample::CollTex(s) => &s.truth,
            GeneratedSample::Omniglot(s) => &s.truth,
        }
    }

    pub fn index(&self) -> u64 {
        match self {
            GeneratedSample::CollTex(s) => s.meta.sample_index,
            GeneratedSample::Omniglot(s) => s.meta.sample_index,
        }
    }

    pub fn meta(&self) -> SampleMeta {
        match self {
            GeneratedSample::CollTex(s) => SampleMeta::Colltex(s.meta.clone()),
            GeneratedSample::Omniglot(s) => SampleMeta::Omniglot(s.meta.clone()),
        }
    }
}

impl SegmentationTask for GeneratedSample {
    fn input(&self) -> &Rgb8Image {
        self.image()
    }
    fn reference_patch(&self) -> &Rgb8Image {
        self.reference()
    }
}

/// A generator bound to its inputs.
#[derive(Debug, Clone, Copy)]
pub enum Generator<'a> {
    CollTex {
        config: &'a CollTexConfig,
        store: &'a TextureStore,
    },
    Omniglot {
        config: &'a OmniglotConfig,
        glyphs: &'a GlyphSet,
        store: &'a TextureStore,
    },
}

impl Generator<'_> {
    pub fn generate(&self, index: u64) -> Result<GeneratedSample> {
        match *self {
            Generator::CollTex { config, store } => {
                generate_colltex(config, store, index).map(GeneratedSample::CollTex)
            }
            Generator::Omniglot {
                config,
                glyphs,
                store,
            } => generate_omniglot(config, glyphs, store, index).map(GeneratedSample::Omniglot),
        }
    }

    pub fn task_config(&self) -> TaskConfig {
        match *self {
            Generator::CollTex { config, .. } => TaskConfig::Colltex(config.clone()),
            Generator::Omniglot { config, .. } => TaskConfig::Omniglot(config.clone()),
        }
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes one sample directory and returns its manifest entry.
pub fn write_sample(out_dir: &Path, sample: &GeneratedSample) -> Result<ManifestEntry> {
    let id = sample_id(sample.index());
    let rel = format!("samples/{id}");
    let dir = out_dir.join(&rel);
    create_dir(&dir)?;
    sample.image().save_png(&dir.join("image.png"))?;
    sample.truth().save_png(&dir.join("mask.png"))?;
    sample.reference().save_png(&dir.join("reference.png"))?;
    let (width, height) = sample.image().dims();
    let (reference_width, reference_height) = sample.reference().dims();
    Ok(ManifestEntry {
        index: sample.index(),
        image: format!("{rel}/image.png"),
        mask: format!("{rel}/mask.png"),
        reference: format!("{rel}/reference.png"),
        width,
        height,
        reference_width,
        reference_height,
        meta: sample.meta(),
    })
}

pub fn write_manifest(out_dir: &Path, manifest: &Manifest) -> Result<()> {
    let path = out_dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Manifest {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Writes already generated samples, in the order given, plus the manifest.
pub fn write_dataset(
    samples: &[GeneratedSample],
    out_dir: &Path,
    task: TaskConfig,
    corpus: CorpusInfo,
) -> Result<Manifest> {
    create_dir(out_dir)?;
    let entries = samples
        .iter()
        .map(|s| write_sample(out_dir, s))
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        task,
        corpus,
        samples: entries,
    };
    write_manifest(out_dir, &manifest)?;
    Ok(manifest)
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Generates samples `0..num_samples` on `workers` threads and writes them.
///
/// Each worker owns whole sample directories; the manifest is assembled in
/// index order once all workers finish, so `workers` never affects output.
pub fn generate_dataset(
    generator: Generator<'_>,
    corpus: CorpusInfo,
    out_dir: &Path,
    num_samples: u64,
    workers: usize,
) -> Result<Manifest> {
    create_dir(out_dir)?;
    let pool = worker_pool(workers)?;
    let entries = pool.install(|| {
        (0..num_samples)
            .into_par_iter()
            .map(|i| write_sample(out_dir, &generator.generate(i)?))
            .collect::<Result<Vec<_>>>()
    })?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        task: generator.task_config(),
        corpus,
        samples: entries,
    };
    write_manifest(out_dir, &manifest)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Manifest {
            path,
            reason: format!("unsupported format_version {}", manifest.format_version),
        });
    }
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSample {
    pub index: u64,
    pub image: Rgb8Image,
    pub reference: Rgb8Image,
    pub truth: BinaryMask,
}

impl SegmentationTask for LoadedSample {
    fn input(&self) -> &Rgb8Image {
        &self.image
    }
    fn reference_patch(&self) -> &Rgb8Image {
        &self.reference
    }
}

/// Decodes one sample and checks it against the dimensions the manifest states.
pub fn load_sample(dir: &Path, entry: &ManifestEntry) -> Result<LoadedSample> {
    let image_path = dir.join(&entry.image);
    let image = Rgb8Image::load(&image_path)?;
    let reference_path = dir.join(&entry.reference);
    let reference = Rgb8Image::load(&reference_path)?;
    let mask_path = dir.join(&entry.mask);
    let truth = BinaryMask::load_png(&mask_path)?;
    let expect = |path: &PathBuf, got: (usize, usize), want: (usize, usize)| {
        if got == want {
            Ok(())
        } else {
            Err(Error::Manifest {
                path: path.clone(),
                reason: format!("decoded {got:?}, manifest states {want:?}"),
            })
        }
    };
    expect(&image_path, image.dims(), (entry.width, entry.height))?;
    expect(&mask_path, truth.dims(), (entry.width, entry.height))?;
    expect(
        &reference_path,
        reference.dims(),
        (entry.reference_width, entry.reference_height),
    )?;
    Ok(LoadedSample {
        index: entry.index,
        image,
        reference,
        truth,
    })
}

/// Rebuilds an entry's truth mask from metadata; scenes need the glyph set.
pub fn regenerate_truth(
    manifest: &Manifest,
    entry: &ManifestEntry,
    glyphs: Option<&GlyphSet>,
) -> Result<BinaryMask> {
    let size = manifest.task.image_size();
    match &entry.meta {
        SampleMeta::Colltex(m) => colltex::regenerate_truth(m, size),
        SampleMeta::Omniglot(m) => {
            let glyphs = glyphs
                .ok_or_else(|| Error::Config("glyph set required to rebuild scene truth".into()))?;
            omniglot::regenerate_truth(m, glyphs, size)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub dataset: String,
    pub config: FilterBankConfig,
    pub samples: Vec<String>,
}

/// Runs the baseline on every sample of a dataset.
///
/// Writes `out_dir/samples/<id>/pred.png` (probability map, `round(255 p)`)
/// and `seg.png` (the baseline's own cleaned segmentation), plus
/// `out_dir/baseline.json`.
pub fn run_baseline_dataset(
    dataset_dir: &Path,
    out_dir: &Path,
    cfg: &FilterBankConfig,
    workers: usize,
) -> Result<BaselineRun> {
    cfg.validate()?;
    let manifest = read_manifest(dataset_dir)?;
    create_dir(out_dir)?;
    let pool = worker_pool(workers)?;
    let ids = pool.install(|| {
        manifest
            .samples
            .par_iter()
            .map(|entry| {
                let sample = load_sample(dataset_dir, entry)?;
                let out = run_baseline(&sample, cfg)?;
                let dir = out_dir.join("samples").join(entry.id());
                create_dir(&dir)?;
                out.prob.save_png(&dir.join("pred.png"))?;
                out.mask.save_png(&dir.join("seg.png"))?;
                Ok(entry.id())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let run = BaselineRun {
        dataset: dataset_dir.display().to_string(),
        config: cfg.clone(),
        samples: ids,
    };
    let path = out_dir.join("baseline.json");
    let text = serde_json::to_string_pretty(&run).map_err(|e| Error::Manifest {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(run)
}

/// Reads a stored probability map written by [`run_baseline_dataset`].
pub fn load_prediction(pred_dir: &Path, id: &str) -> Result<ProbMask> {
    ProbMask::load_png(&pred_dir.join("samples").join(id).join("pred.png"))
}
