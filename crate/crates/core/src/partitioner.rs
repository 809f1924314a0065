//! Nearest-anchor (Voronoi) partition of a square canvas.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::BinaryMask;
use crate::rng::RngStream;

/// Anchor points on a `size × size` canvas, coordinates in `[0, size)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub size: usize,
    pub anchors: Vec<[f64; 2]>,
}

impl PartitionSpec {
    pub fn new(size: usize, anchors: Vec<[f64; 2]>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::NoRegions);
        }
        if size == 0 {
            return Err(Error::Dimensions("canvas size 0".into()));
        }
        let s = size as f64;
        if let Some(a) = anchors
            .iter()
            .find(|a| !(0.0..s).contains(&a[0]) || !(0.0..s).contains(&a[1]))
        {
            return Err(Error::Config(format!("anchor {a:?} outside [0, {size})²")));
        }
        Ok(Self { size, anchors })
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

/// Per-pixel region index, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMap {
    width: usize,
    height: usize,
    regions: usize,
    data: Vec<u32>,
}

impl RegionMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_regions(&self) -> usize {
        self.regions
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn region(&self, x: usize, y: usize) -> usize {
        self.data[y * self.width + x] as usize
    }

    pub fn region_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.regions];
        for &r in &self.data {
            sizes[r as usize] += 1;
        }
        sizes
    }

    pub fn region_mask(&self, region: usize) -> BinaryMask {
        BinaryMask::new(
            self.width,
            self.height,
            self.data
                .iter()
                .map(|&r| (r as usize == region) as u8)
                .collect(),
        )
        .expect("dimensions come from a valid map")
    }

    /// Debug export: region index as the gray value. At most 256 regions.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        if self.regions > 256 {
            return Err(Error::Config(format!(
                "{} regions do not fit an 8-bit PNG",
                self.regions
            )));
        }
        let img = image::GrayImage::from_raw(
            self.width as u32,
            self.height as u32,
            self.data.iter().map(|&r| r as u8).collect(),
        )
        .expect("buffer length matches");
        img.save(path).map_err(|e| Error::Encode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}

/// `n` i.i.d. uniform anchors on `[0, size)²`, each drawn x then y.
pub fn sample_anchors(n: usize, size: usize, rng: &mut RngStream) -> Result<PartitionSpec> {
    if n == 0 {
        return Err(Error::NoRegions);
    }
    let s = size as f64;
    let anchors = (0..n)
        .map(|_| {
            let x = rng.uniform_f64(0.0, s);
            let y = rng.uniform_f64(0.0, s);
            [x, y]
        })
        .collect();
    PartitionSpec::new(size, anchors)
}

/// Nearest anchor to a pixel center under squared Euclidean distance.
/// Ties go to the lowest anchor index.
#[inline]
pub fn nearest_anchor(anchors: &[[f64; 2]], x: usize, y: usize) -> usize {
    let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, a) in anchors.iter().enumerate() {
        let d = (a[0] - px).powi(2) + (a[1] - py).powi(2);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

pub fn rasterize(spec: &PartitionSpec) -> RegionMap {
    let size = spec.size;
    let mut data = vec![0u32; size * size];
    data.par_chunks_mut(size).enumerate().for_each(|(y, row)| {
        for (x, cell) in row.iter_mut().enumerate() {
            *cell = nearest_anchor(&spec.anchors, x, y) as u32;
        }
    });
    RegionMap {
        width: size,
        height: size,
        regions: spec.anchors.len(),
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_regions_rejected() {
        let mut rng = RngStream::derive(0, 0);
        assert!(matches!(
            sample_anchors(0, 256, &mut rng),
            Err(Error::NoRegions)
        ));
    }

    #[test]
    fn anchors_inside_canvas_and_deterministic() {
        let a = sample_anchors(10, 256, &mut RngStream::derive(1, 2)).unwrap();
        let b = sample_anchors(10, 256, &mut RngStream::derive(1, 2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        assert!(a
            .anchors
            .iter()
            .all(|p| p.iter().all(|&c| (0.0..256.0).contains(&c))));
    }

    #[test]
    fn single_anchor_owns_everything() {
        let spec = sample_anchors(1, 64, &mut RngStream::derive(5, 5)).unwrap();
        let map = rasterize(&spec);
        assert!(map.data().iter().all(|&r| r == 0));
    }

    #[test]
    fn perpendicular_bisector_split() {
        let spec = PartitionSpec::new(256, vec![[64.0, 128.0], [192.0, 128.0]]).unwrap();
        let map = rasterize(&spec);
        for y in 0..256 {
            for x in 0..256 {
                assert_eq!(map.region(x, y), (x >= 128) as usize);
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // Both anchors coincide: every pixel is a tie.
        let spec = PartitionSpec::new(8, vec![[3.0, 3.0], [3.0, 3.0]]).unwrap();
        assert!(rasterize(&spec).data().iter().all(|&r| r == 0));
        // Equidistant from the pixel center (0.5, 0.5).
        assert_eq!(nearest_anchor(&[[1.5, 0.5], [0.5, 1.5]], 0, 0), 0);
        assert_eq!(nearest_anchor(&[[0.5, 1.5], [1.5, 0.5]], 0, 0), 0);
    }

    #[test]
    fn regions_partition_the_canvas() {
        let spec = sample_anchors(7, 64, &mut RngStream::derive(3, 1)).unwrap();
        let map = rasterize(&spec);
        let masks: Vec<BinaryMask> = (0..7).map(|k| map.region_mask(k)).collect();
        for i in 0..64 * 64 {
            let owners = masks.iter().filter(|m| m.data()[i] == 1).count();
            assert_eq!(owners, 1);
        }
        assert_eq!(map.region_sizes().iter().sum::<usize>(), 64 * 64);
    }

    #[test]
    fn out_of_canvas_anchor_rejected() {
        assert!(PartitionSpec::new(10, vec![[10.0, 1.0]]).is_err());
    }
}
