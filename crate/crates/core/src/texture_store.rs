//! Texture corpus with a deterministic held-out split, random crops, and
//! short-length-scale synthesis for filling thin glyph strokes.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Rgb8Image;
use crate::rng::RngStream;
use crate::split::{assign_split, file_name, list_images, Split, SplitManifest};

/// Support of the synthesis kernel; output autocorrelation vanishes beyond it.
pub const SYNTH_KERNEL_SIZE: usize = 5;

// Kernels are a function of the texture id so two synthesized instances of
// one id (a character fill and its reference patch) share a texture.
const SYNTH_KERNEL_SEED: u64 = 0x5EED_7E87_0000_0005;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextureRecord {
    pub id: usize,
    pub split: Split,
    pub width: usize,
    pub height: usize,
    pub source: PathBuf,
}

/// Top-left corner `(x, y)` of a crop in the (tiled) source frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropOffset {
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, Copy)]
struct ColorStats {
    mean: Vector3<f64>,
    cov: Matrix3<f64>,
}

#[derive(Debug)]
pub struct TextureStore {
    records: Vec<TextureRecord>,
    holdout_count: usize,
    split_seed: u64,
    images: Vec<OnceLock<Rgb8Image>>,
    stats: Vec<OnceLock<ColorStats>>,
}

/// Loads every PNG/JPEG in `directory`, ids assigned in file-name order.
///
/// Only headers are read here; pixels are decoded on first use and cached.
pub fn load_textures(
    directory: &Path,
    holdout_count: usize,
    split_seed: u64,
) -> Result<TextureStore> {
    TextureStore::load(directory, holdout_count, split_seed)
}

impl TextureStore {
    pub fn load(directory: &Path, holdout_count: usize, split_seed: u64) -> Result<Self> {
        let files = list_images(directory)?;
        if files.len() < holdout_count + 1 {
            return Err(Error::TooFewImages {
                path: directory.to_path_buf(),
                found: files.len(),
                needed: holdout_count + 1,
            });
        }
        let splits = assign_split(files.len(), holdout_count, split_seed);
        let mut records = Vec::with_capacity(files.len());
        for (id, (path, split)) in files.into_iter().zip(splits).enumerate() {
            let (w, h) = image::image_dimensions(&path).map_err(|e| Error::Decode {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            records.push(TextureRecord {
                id,
                split,
                width: w as usize,
                height: h as usize,
                source: path,
            });
        }
        let n = records.len();
        Ok(Self {
            records,
            holdout_count,
            split_seed,
            images: (0..n).map(|_| OnceLock::new()).collect(),
            stats: (0..n).map(|_| OnceLock::new()).collect(),
        })
    }

    /// In-memory store; `names` play the role of file names for ordering.
    pub fn from_images(
        mut named: Vec<(String, Rgb8Image)>,
        holdout_count: usize,
        split_seed: u64,
    ) -> Result<Self> {
        if named.len() < holdout_count + 1 {
            return Err(Error::TooFewImages {
                path: PathBuf::from("<memory>"),
                found: named.len(),
                needed: holdout_count + 1,
            });
        }
        named.sort_by(|a, b| a.0.cmp(&b.0));
        let splits = assign_split(named.len(), holdout_count, split_seed);
        let mut records = Vec::with_capacity(named.len());
        let mut images = Vec::with_capacity(named.len());
        for (id, ((name, img), split)) in named.into_iter().zip(splits).enumerate() {
            records.push(TextureRecord {
                id,
                split,
                width: img.width(),
                height: img.height(),
                source: PathBuf::from(name),
            });
            images.push(OnceLock::from(img));
        }
        let n = records.len();
        Ok(Self {
            records,
            holdout_count,
            split_seed,
            images,
            stats: (0..n).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn records(&self) -> &[TextureRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn holdout_count(&self) -> usize {
        self.holdout_count
    }

    pub fn split_seed(&self) -> u64 {
        self.split_seed
    }

    pub fn record(&self, id: usize) -> Result<&TextureRecord> {
        self.records.get(id).ok_or(Error::UnknownTexture(id))
    }

    /// Texture ids in `split`, ascending.
    pub fn ids(&self, split: Split) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.split == split)
            .map(|r| r.id)
            .collect()
    }

    pub fn split_manifest(&self) -> SplitManifest {
        let splits: Vec<Split> = self.records.iter().map(|r| r.split).collect();
        let files = self.records.iter().map(|r| file_name(&r.source)).collect();
        SplitManifest::new(self.split_seed, &splits, files)
    }

    /// Decoded source pixels for `id`.
    pub fn image(&self, id: usize) -> Result<&Rgb8Image> {
        let record = self.record(id)?;
        let cell = &self.images[id];
        if let Some(img) = cell.get() {
            return Ok(img);
        }
        let img = Rgb8Image::load(&record.source)?;
        if img.dims() != (record.width, record.height) {
            return Err(Error::Decode {
                path: record.source.clone(),
                reason: "decoded size differs from header".into(),
            });
        }
        let _ = cell.set(img);
        Ok(cell.get().expect("just initialised"))
    }

    /// Random `out_width × out_height` crop; the offset is drawn x then y.
    pub fn crop_texture(
        &self,
        id: usize,
        out_width: usize,
        out_height: usize,
        rng: &mut RngStream,
    ) -> Result<(Rgb8Image, CropOffset)> {
        let record = self.record(id)?;
        let ox = rng.uniform_int(
            0,
            (tiled_extent(record.width, out_width) - out_width) as u64,
        ) as usize;
        let oy = rng.uniform_int(
            0,
            (tiled_extent(record.height, out_height) - out_height) as u64,
        ) as usize;
        let offset = CropOffset { x: ox, y: oy };
        Ok((
            self.crop_texture_at(id, out_width, out_height, offset)?,
            offset,
        ))
    }

    /// Crop at a known offset, tiling the source periodically where it is
    /// smaller than the request. Pixels are copied, never resampled.
    pub fn crop_texture_at(
        &self,
        id: usize,
        out_width: usize,
        out_height: usize,
        offset: CropOffset,
    ) -> Result<Rgb8Image> {
        let src = self.image(id)?;
        let (sw, sh) = src.dims();
        Rgb8Image::from_fn(out_width, out_height, |x, y| {
            src.pixel((offset.x + x) % sw, (offset.y + y) % sh)
        })
    }

    /// Filtered-noise texture with the source's colour mean and covariance.
    ///
    /// White noise per channel is convolved with a 5×5 kernel fixed by `id`,
    /// then mapped affinely so the sample mean and 3×3 channel covariance
    /// equal those of the source image. Only the noise comes from `rng`.
    pub fn synth_shortscale(
        &self,
        id: usize,
        out_size: usize,
        rng: &mut RngStream,
    ) -> Result<Rgb8Image> {
        let stats = self.color_stats(id)?;
        let kernels = synth_kernels(id);
        let k = SYNTH_KERNEL_SIZE;
        let padded = out_size + k - 1;
        let n = out_size * out_size;

        let mut filtered = vec![[0.0f64; 3]; n];
        for (c, kernel) in kernels.iter().enumerate() {
            let noise: Vec<f64> = (0..padded * padded).map(|_| rng.next_f64() - 0.5).collect();
            for y in 0..out_size {
                for x in 0..out_size {
                    let mut acc = 0.0;
                    for v in 0..k {
                        let row = &noise[(y + v) * padded + x..(y + v) * padded + x + k];
                        for (u, &nz) in row.iter().enumerate() {
                            acc += kernel[v * k + u] * nz;
                        }
                    }
                    filtered[y * out_size + x][c] = acc;
                }
            }
        }

        let out_stats = stats_of(filtered.iter().map(|p| Vector3::new(p[0], p[1], p[2])), n);
        let map = sym_sqrt(&stats.cov, false) * sym_sqrt(&out_stats.cov, true);
        let mut data = Vec::with_capacity(n * 3);
        for p in &filtered {
            let v = stats.mean + map * (Vector3::new(p[0], p[1], p[2]) - out_stats.mean);
            data.extend(v.iter().map(|&c| c.round().clamp(0.0, 255.0) as u8));
        }
        Rgb8Image::new(out_size, out_size, data)
    }

    fn color_stats(&self, id: usize) -> Result<ColorStats> {
        if let Some(s) = self.stats.get(id).and_then(|c| c.get()) {
            return Ok(*s);
        }
        let img = self.image(id)?;
        let px = img
            .data()
            .chunks_exact(3)
            .map(|p| Vector3::new(p[0] as f64, p[1] as f64, p[2] as f64));
        let s = stats_of(px, img.width() * img.height());
        let _ = self.stats[id].set(s);
        Ok(s)
    }
}

fn tiled_extent(src: usize, out: usize) -> usize {
    if src >= out {
        src
    } else {
        out.div_ceil(src) * src
    }
}

fn synth_kernels(id: usize) -> [Vec<f64>; 3] {
    let mut rng = RngStream::derive(SYNTH_KERNEL_SEED, id as u64);
    let taps = SYNTH_KERNEL_SIZE * SYNTH_KERNEL_SIZE;
    std::array::from_fn(|_| (0..taps).map(|_| rng.uniform_f64(-1.0, 1.0)).collect())
}

fn stats_of(pixels: impl Iterator<Item = Vector3<f64>> + Clone, n: usize) -> ColorStats {
    let mean = pixels.clone().fold(Vector3::zeros(), |a, p| a + p) / n as f64;
    let cov = pixels.fold(Matrix3::zeros(), |a, p| {
        let d = p - mean;
        a + d * d.transpose()
    }) / n as f64;
    ColorStats { mean, cov }
}

/// Symmetric square root (or inverse square root) of a PSD matrix.
/// Eigenvalues below a small floor are treated as zero.
fn sym_sqrt(m: &Matrix3<f64>, inverse: bool) -> Matrix3<f64> {
    let eig = SymmetricEigen::new(*m);
    let floor = 1e-10 * eig.eigenvalues.amax().max(1e-300);
    let d = eig.eigenvalues.map(|l| {
        if l <= floor {
            0.0
        } else if inverse {
            1.0 / l.sqrt()
        } else {
            l.sqrt()
        }
    });
    eig.eigenvectors * Matrix3::from_diagonal(&d) * eig.eigenvectors.transpose()
}
