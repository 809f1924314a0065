//! Collage samples: a Voronoi partition of the canvas, one texture per
//! region, and a reference patch of one of the used textures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, Rgb8Image};
use crate::partitioner::{rasterize, sample_anchors, PartitionSpec, RegionMap};
use crate::rng::RngStream;
use crate::split::Split;
use crate::texture_store::{CropOffset, TextureStore};

/// Anchor sets are resampled until every region owns a pixel.
pub const ANCHOR_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollTexConfig {
    pub image_size: usize,
    pub patch_size_range: [usize; 2],
    pub regions_range: [usize; 2],
    pub textures_with_replacement: bool,
    pub split: Split,
    pub global_seed: u64,
}

impl Default for CollTexConfig {
    fn default() -> Self {
        Self {
            image_size: 256,
            patch_size_range: [64, 64],
            regions_range: [2, 10],
            textures_with_replacement: false,
            split: Split::Train,
            global_seed: 0,
        }
    }
}

impl CollTexConfig {
    pub fn validate(&self) -> Result<()> {
        let [pmin, pmax] = self.patch_size_range;
        let [rmin, rmax] = self.regions_range;
        if self.image_size == 0 {
            return Err(Error::Config("image_size must be positive".into()));
        }
        if pmin == 0 || pmin > pmax {
            return Err(Error::Config(format!(
                "bad patch size range [{pmin}, {pmax}]"
            )));
        }
        if rmin == 0 {
            return Err(Error::NoRegions);
        }
        if rmin > rmax {
            return Err(Error::Config(format!("bad region range [{rmin}, {rmax}]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollTexMeta {
    pub sample_index: u64,
    pub num_regions: usize,
    pub anchors: Vec<[f64; 2]>,
    pub anchor_attempts: usize,
    pub region_texture_ids: Vec<usize>,
    pub region_crop_offsets: Vec<CropOffset>,
    pub reference_texture_id: usize,
    pub reference_crop_offset: CropOffset,
    pub patch_size: usize,
}

#[derive(Debug, Clone)]
pub struct CollTexSample {
    pub image: Rgb8Image,
    pub reference: Rgb8Image,
    pub truth: BinaryMask,
    pub meta: CollTexMeta,
}

/// Mask of every pixel whose region carries `reference_id`.
pub fn region_truth(
    regions: &RegionMap,
    assignment: &[usize],
    reference_id: usize,
) -> Result<BinaryMask> {
    if assignment.len() != regions.num_regions() {
        return Err(Error::Config(format!(
            "{} texture assignments for {} regions",
            assignment.len(),
            regions.num_regions()
        )));
    }
    if !assignment.contains(&reference_id) {
        return Err(Error::ReferenceAbsent(reference_id));
    }
    BinaryMask::new(
        regions.width(),
        regions.height(),
        regions
            .data()
            .iter()
            .map(|&r| (assignment[r as usize] == reference_id) as u8)
            .collect(),
    )
}

pub fn generate_colltex(
    config: &CollTexConfig,
    store: &TextureStore,
    sample_index: u64,
) -> Result<CollTexSample> {
    config.validate()?;
    let pool = store.ids(config.split);
    let [rmin, rmax] = config.regions_range;
    if pool.is_empty() || (!config.textures_with_replacement && pool.len() < rmax) {
        return Err(Error::Insufficient {
            what: "textures",
            available: pool.len(),
            needed: if config.textures_with_replacement {
                1
            } else {
                rmax
            },
        });
    }

    let size = config.image_size;
    let mut rng = RngStream::derive(config.global_seed, sample_index);
    let n = rng.uniform_int(rmin as u64, rmax as u64) as usize;

    let (spec, regions, attempts) = sample_partition(n, size, &mut rng)?;

    let assignment: Vec<usize> = if config.textures_with_replacement {
        (0..n)
            .map(|_| pool[rng.uniform_index(pool.len())])
            .collect()
    } else {
        rng.choose_distinct(&pool, n)
    };

    let mut image = Rgb8Image::filled(size, size, [0, 0, 0])?;
    let mut offsets = Vec::with_capacity(n);
    for (k, &tex) in assignment.iter().enumerate() {
        let (fill, offset) = store.crop_texture(tex, size, size, &mut rng)?;
        offsets.push(offset);
        for y in 0..size {
            for x in 0..size {
                if regions.region(x, y) == k {
                    image.set_pixel(x, y, fill.pixel(x, y));
                }
            }
        }
    }

    let mut used: Vec<usize> = Vec::with_capacity(n);
    for &t in &assignment {
        if !used.contains(&t) {
            used.push(t);
        }
    }
    let reference_id = used[rng.uniform_index(used.len())];
    let [pmin, pmax] = config.patch_size_range;
    let patch = rng.uniform_int(pmin as u64, pmax as u64) as usize;
    let (reference, reference_offset) = store.crop_texture(reference_id, patch, patch, &mut rng)?;
    let truth = region_truth(&regions, &assignment, reference_id)?;

    Ok(CollTexSample {
        image,
        reference,
        truth,
        meta: CollTexMeta {
            sample_index,
            num_regions: n,
            anchors: spec.anchors,
            anchor_attempts: attempts,
            region_texture_ids: assignment,
            region_crop_offsets: offsets,
            reference_texture_id: reference_id,
            reference_crop_offset: reference_offset,
            patch_size: patch,
        },
    })
}

fn sample_partition(
    n: usize,
    size: usize,
    rng: &mut RngStream,
) -> Result<(PartitionSpec, RegionMap, usize)> {
    for attempt in 1..=ANCHOR_ATTEMPTS {
        let spec = sample_anchors(n, size, rng)?;
        let regions = rasterize(&spec);
        if regions.region_sizes().iter().all(|&s| s > 0) {
            return Ok((spec, regions, attempt));
        }
    }
    Err(Error::RetriesExhausted {
        attempts: ANCHOR_ATTEMPTS,
        what: "every Voronoi region non-empty",
    })
}

/// Rebuilds the ground truth from recorded metadata alone.
pub fn regenerate_truth(meta: &CollTexMeta, image_size: usize) -> Result<BinaryMask> {
    let spec = PartitionSpec::new(image_size, meta.anchors.clone())?;
    region_truth(
        &rasterize(&spec),
        &meta.region_texture_ids,
        meta.reference_texture_id,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_store(n: usize) -> TextureStore {
        let named = (0..n)
            .map(|i| {
                let v = (i * 37 % 256) as u8;
                (
                    format!("{i:03}.png"),
                    Rgb8Image::filled(32, 32, [v, 255 - v, (i * 11) as u8]).unwrap(),
                )
            })
            .collect();
        TextureStore::from_images(named, 0, 0).unwrap()
    }

    #[test]
    fn all_regions_reference_gives_full_mask() {
        let spec = PartitionSpec::new(16, vec![[2.0, 2.0], [12.0, 12.0]]).unwrap();
        let m = region_truth(&rasterize(&spec), &[4, 4], 4).unwrap();
        assert_eq!(m.count_ones(), 256);
    }

    #[test]
    fn absent_reference_is_an_error() {
        let spec = PartitionSpec::new(16, vec![[2.0, 2.0], [12.0, 12.0]]).unwrap();
        assert!(matches!(
            region_truth(&rasterize(&spec), &[1, 2], 3),
            Err(Error::ReferenceAbsent(3))
        ));
    }

    #[test]
    fn vertical_split_reference_left() {
        let spec = PartitionSpec::new(256, vec![[64.0, 128.0], [192.0, 128.0]]).unwrap();
        let m = region_truth(&rasterize(&spec), &[7, 9], 7).unwrap();
        let oracle = BinaryMask::from_fn(256, 256, |x, _| x < 128).unwrap();
        assert_eq!(m, oracle);
    }

    #[test]
    fn two_regions_distinct_textures_cover_one_cell() {
        let store = flat_store(12);
        let cfg = CollTexConfig {
            regions_range: [2, 2],
            ..Default::default()
        };
        for i in 0..10 {
            let s = generate_colltex(&cfg, &store, i).unwrap();
            let spec = PartitionSpec::new(256, s.meta.anchors.clone()).unwrap();
            let regions = rasterize(&spec);
            let k = s
                .meta
                .region_texture_ids
                .iter()
                .position(|&t| t == s.meta.reference_texture_id)
                .unwrap();
            assert_eq!(s.truth, regions.region_mask(k));
            assert_eq!(s.reference.dims(), (64, 64));
        }
    }

    #[test]
    fn with_replacement_single_texture_fills_canvas() {
        let store = flat_store(1);
        let cfg = CollTexConfig {
            regions_range: [2, 2],
            textures_with_replacement: true,
            ..Default::default()
        };
        let s = generate_colltex(&cfg, &store, 0).unwrap();
        assert_eq!(s.meta.region_texture_ids, vec![0, 0]);
        assert_eq!(s.truth.count_ones(), 256 * 256);
    }

    #[test]
    fn insufficient_textures_rejected() {
        let store = flat_store(5);
        let cfg = CollTexConfig::default();
        assert!(matches!(
            generate_colltex(&cfg, &store, 0),
            Err(Error::Insufficient {
                available: 5,
                needed: 10,
                ..
            })
        ));
    }

    #[test]
    fn mean_foreground_fraction_for_ten_regions() {
        let store = flat_store(12);
        let cfg = CollTexConfig {
            regions_range: [10, 10],
            image_size: 128,
            ..Default::default()
        };
        let mean: f64 = (0..100)
            .map(|i| generate_colltex(&cfg, &store, i).unwrap().truth.fraction())
            .sum::<f64>()
            / 100.0;
        assert!((mean - 0.1).abs() <= 0.05, "mean foreground {mean}");
    }

    #[test]
    fn metadata_regenerates_truth() {
        let store = flat_store(12);
        let cfg = CollTexConfig::default();
        let s = generate_colltex(&cfg, &store, 3).unwrap();
        assert_eq!(regenerate_truth(&s.meta, 256).unwrap(), s.truth);
    }
}
