//! Procedural stand-ins for a texture corpus and a character corpus.
//!
//! Useful for smoke tests and demos when no real texture or glyph
//! collection is at hand. Textures are stationary two-colour patterns with
//! per-pixel grain; glyphs are thick random polylines on a white page.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, Rgb8Image};
use crate::omniglot::GLYPH_SIZE;
use crate::rng::RngStream;

const TEXTURE_SIDES: [usize; 4] = [96, 160, 256, 320];

fn random_color(rng: &mut RngStream) -> [f64; 3] {
    [0; 3].map(|_: u8| rng.uniform_f64(0.0, 255.0))
}

/// Texture `id` of the procedural corpus keyed by `seed`.
pub fn procedural_texture(id: usize, seed: u64) -> Rgb8Image {
    let mut rng = RngStream::derive(seed, id as u64);
    let side = TEXTURE_SIDES[rng.uniform_index(TEXTURE_SIDES.len())];
    let a = random_color(&mut rng);
    let b = random_color(&mut rng);
    let kind = id % 6;
    let period = rng.uniform_f64(5.0, 22.0);
    let angle = rng.uniform_f64(0.0, TAU);
    let (s, c) = angle.sin_cos();
    let grain = rng.uniform_f64(4.0, 24.0);
    let cell = rng.uniform_int(3, 12) as usize;
    let lattice_n = side / cell + 2;
    let lattice: Vec<f64> = (0..lattice_n * lattice_n).map(|_| rng.next_f64()).collect();
    let dot_radius = rng.uniform_f64(0.2, 0.45);

    let mix = |x: usize, y: usize| -> f64 {
        let (xf, yf) = (x as f64, y as f64);
        match kind {
            0 => 0.5 + 0.5 * (TAU * (xf * c + yf * s) / period).sin(),
            1 => (((xf / period).floor() + (yf / period).floor()) as i64).rem_euclid(2) as f64,
            2 => {
                let (u, v) = ((xf / period).fract() - 0.5, (yf / period).fract() - 0.5);
                ((u * u + v * v).sqrt() < dot_radius) as u8 as f64
            }
            3 => {
                let (gx, gy) = (xf / cell as f64, yf / cell as f64);
                let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
                let (fx, fy) = (gx.fract(), gy.fract());
                let l = |i: usize, j: usize| lattice[j * lattice_n + i];
                let top = l(ix, iy) * (1.0 - fx) + l(ix + 1, iy) * fx;
                let bottom = l(ix, iy + 1) * (1.0 - fx) + l(ix + 1, iy + 1) * fx;
                top * (1.0 - fy) + bottom * fy
            }
            4 => {
                let p = 0.5 + 0.5 * (TAU * (xf * c + yf * s) / period).sin();
                let q = 0.5 + 0.5 * (TAU * (-xf * s + yf * c) / (period * 1.7)).sin();
                p * q
            }
            _ => 0.5,
        }
    };

    Rgb8Image::from_fn(side, side, |x, y| {
        let t = if kind == 5 { rng.next_f64() } else { mix(x, y) };
        let n = rng.uniform_f64(-grain, grain);
        [0, 1, 2].map(|k| (a[k] * (1.0 - t) + b[k] * t + n).round().clamp(0.0, 255.0) as u8)
    })
    .expect("sides are positive")
}

/// Glyph `id`: two to four thick strokes, `true` on stroke pixels.
pub fn procedural_glyph(id: usize, seed: u64) -> BinaryMask {
    let mut rng = RngStream::derive(seed ^ 0x6C79_7068, id as u64);
    let strokes = rng.uniform_int(2, 4) as usize;
    let mut segments: Vec<([f64; 2], [f64; 2], f64)> = Vec::new();
    for _ in 0..strokes {
        let points = rng.uniform_int(2, 4) as usize;
        let radius = rng.uniform_f64(2.0, 4.0);
        let mut prev = [rng.uniform_f64(18.0, 87.0), rng.uniform_f64(18.0, 87.0)];
        for _ in 1..points {
            let next = [rng.uniform_f64(18.0, 87.0), rng.uniform_f64(18.0, 87.0)];
            segments.push((prev, next, radius));
            prev = next;
        }
    }
    BinaryMask::from_fn(GLYPH_SIZE, GLYPH_SIZE, |x, y| {
        let p = [x as f64 + 0.5, y as f64 + 0.5];
        segments.iter().any(|&(a, b, r)| {
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
            };
            let q = [a[0] + t * d[0] - p[0], a[1] + t * d[1] - p[1]];
            q[0] * q[0] + q[1] * q[1] <= r * r
        })
    })
    .expect("glyph size is positive")
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `count` textures as `texture_0000.png`…
pub fn write_texture_corpus(dir: &Path, count: usize, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    (0..count)
        .map(|i| {
            let path = dir.join(format!("texture_{i:04}.png"));
            procedural_texture(i, seed).save_png(&path)?;
            Ok(path)
        })
        .collect()
}

/// Writes `count` glyphs as black-on-white 105×105 grayscale PNGs.
pub fn write_glyph_corpus(dir: &Path, count: usize, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    (0..count)
        .map(|i| {
            let path = dir.join(format!("glyph_{i:04}.png"));
            let mask = procedural_glyph(i, seed);
            let ink = BinaryMask::new(
                GLYPH_SIZE,
                GLYPH_SIZE,
                mask.data().iter().map(|&v| 1 - v).collect(),
            )?;
            ink.save_png(&path)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn procedural_corpus_is_deterministic() {
        assert_eq!(procedural_texture(3, 1), procedural_texture(3, 1));
        assert_ne!(procedural_texture(3, 1), procedural_texture(4, 1));
        assert_eq!(procedural_glyph(3, 1), procedural_glyph(3, 1));
    }

    #[test]
    fn glyphs_have_strokes_and_background() {
        for i in 0..20 {
            let g = procedural_glyph(i, 0);
            let n = g.count_ones();
            assert!(
                n > 50 && n < GLYPH_SIZE * GLYPH_SIZE / 2,
                "glyph {i} has {n} stroke pixels"
            );
        }
    }
}
