//! Texturized cluttered Omniglot scenes: scaled and rotated character masks
//! filled with distinct textures, composited with occlusion.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{load_gray, BinaryMask, Rgb8Image};
use crate::rng::RngStream;
use crate::split::{assign_split, file_name, list_images, Split, SplitManifest};
use crate::texture_store::{CropOffset, TextureStore};

pub const GLYPH_SIZE: usize = 105;
pub const SCALE_RANGE: [f64; 2] = [0.5, 2.0];
pub const CENTER_RANGE: [i64; 2] = [28, 228];
/// Scenes are resampled until the target character has a visible pixel.
pub const SCENE_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glyph {
    pub id: usize,
    pub name: String,
    pub mask: BinaryMask,
}

#[derive(Debug, Clone)]
pub struct GlyphSet {
    glyphs: Vec<Glyph>,
    splits: Vec<Split>,
    split_seed: u64,
}

/// Loads 105×105 character images; dark pixels (< 128) are strokes.
pub fn load_glyphs(directory: &Path, holdout_count: usize, split_seed: u64) -> Result<GlyphSet> {
    let files = list_images(directory)?;
    let mut named = Vec::with_capacity(files.len());
    for path in &files {
        named.push((file_name(path), read_glyph(path)?));
    }
    GlyphSet::from_masks(named, holdout_count, split_seed).map_err(|e| match e {
        Error::TooFewImages { found, needed, .. } => Error::TooFewImages {
            path: directory.to_path_buf(),
            found,
            needed,
        },
        other => other,
    })
}

fn read_glyph(path: &Path) -> Result<BinaryMask> {
    let gray = load_gray(path)?;
    if gray.dimensions() != (GLYPH_SIZE as u32, GLYPH_SIZE as u32) {
        return Err(Error::BadGlyph {
            path: path.to_path_buf(),
            reason: format!(
                "expected {GLYPH_SIZE}x{GLYPH_SIZE}, found {}x{}",
                gray.width(),
                gray.height()
            ),
        });
    }
    let mask = BinaryMask::new(
        GLYPH_SIZE,
        GLYPH_SIZE,
        gray.as_raw().iter().map(|&v| (v < 128) as u8).collect(),
    )?;
    if mask.is_empty() {
        return Err(Error::BadGlyph {
            path: path.to_path_buf(),
            reason: "no stroke pixels".into(),
        });
    }
    Ok(mask)
}

impl GlyphSet {
    pub fn from_masks(
        mut named: Vec<(String, BinaryMask)>,
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
        for (name, mask) in &named {
            if mask.dims() != (GLYPH_SIZE, GLYPH_SIZE) {
                return Err(Error::BadGlyph {
                    path: PathBuf::from(name),
                    reason: format!(
                        "expected {GLYPH_SIZE}x{GLYPH_SIZE}, found {:?}",
                        mask.dims()
                    ),
                });
            }
            if mask.is_empty() {
                return Err(Error::BadGlyph {
                    path: PathBuf::from(name),
                    reason: "no stroke pixels".into(),
                });
            }
        }
        let splits = assign_split(named.len(), holdout_count, split_seed);
        let glyphs = named
            .into_iter()
            .enumerate()
            .map(|(id, (name, mask))| Glyph { id, name, mask })
            .collect();
        Ok(Self {
            glyphs,
            splits,
            split_seed,
        })
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn glyph(&self, id: usize) -> Result<&Glyph> {
        self.glyphs
            .get(id)
            .ok_or_else(|| Error::Config(format!("unknown glyph id {id}")))
    }

    pub fn split_of(&self, id: usize) -> Option<Split> {
        self.splits.get(id).copied()
    }

    pub fn ids(&self, split: Split) -> Vec<usize> {
        (0..self.glyphs.len())
            .filter(|&i| self.splits[i] == split)
            .collect()
    }

    pub fn split_manifest(&self) -> SplitManifest {
        let files = self.glyphs.iter().map(|g| g.name.clone()).collect();
        SplitManifest::new(self.split_seed, &self.splits, files)
    }
}

/// Side of the square canvas holding a glyph after scale and rotation.
pub fn transformed_side(scale: f64, rotation: f64) -> usize {
    let extent = GLYPH_SIZE as f64 * scale * (rotation.cos().abs() + rotation.sin().abs());
    // Trig round-off must not grow the canvas at multiples of π/2.
    (extent - 1e-9).ceil().max(1.0) as usize
}

/// Rotates then scales a glyph about its center.
///
/// Each output pixel center is inverse-mapped into the source, sampled with
/// bilinear interpolation (zero outside), and kept where the value is ≥ 0.5.
pub fn transform_glyph(glyph: &BinaryMask, scale: f64, rotation: f64) -> BinaryMask {
    let (sw, sh) = glyph.dims();
    let side = transformed_side(scale, rotation);
    let half_out = side as f64 / 2.0;
    let (cx, cy) = (sw as f64 / 2.0, sh as f64 / 2.0);
    let (sin, cos) = rotation.sin_cos();
    let sample = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= sw as i64 || y >= sh as i64 {
            0.0
        } else {
            glyph.get(x as usize, y as usize) as u8 as f64
        }
    };
    BinaryMask::from_fn(side, side, |j, i| {
        let px = j as f64 + 0.5 - half_out;
        let py = i as f64 + 0.5 - half_out;
        // Inverse rotation, then inverse scale.
        let sx = (cos * px + sin * py) / scale + cx - 0.5;
        let sy = (-sin * px + cos * py) / scale + cy - 0.5;
        let (x0, y0) = (sx.floor(), sy.floor());
        let (fx, fy) = (sx - x0, sy - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        let v = (1.0 - fx) * (1.0 - fy) * sample(x0, y0)
            + fx * (1.0 - fy) * sample(x0 + 1, y0)
            + (1.0 - fx) * fy * sample(x0, y0 + 1)
            + fx * fy * sample(x0 + 1, y0 + 1);
        v >= 0.5
    })
    .expect("side is at least 1")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphPlacement {
    pub glyph_id: usize,
    pub scale: f64,
    pub rotation: f64,
    /// Bounding-box center of the transformed glyph, canvas pixels.
    pub center: [i64; 2],
    pub z_order: usize,
    pub texture_id: usize,
}

/// Geometry of a composed scene, before any texture is drawn.
#[derive(Debug, Clone)]
pub struct SceneLayout {
    pub size: usize,
    /// Topmost placement index per pixel, `None` for background.
    pub owner: Vec<Option<usize>>,
    pub visible: Vec<BinaryMask>,
}

/// Paints transformed masks in ascending z-order (later overwrite earlier)
/// and records which placement owns each canvas pixel.
pub fn layout_scene(
    placements: &[GlyphPlacement],
    glyphs: &GlyphSet,
    size: usize,
) -> Result<SceneLayout> {
    if placements.is_empty() {
        return Err(Error::Config("scene needs at least one placement".into()));
    }
    let mut order: Vec<usize> = (0..placements.len()).collect();
    order.sort_by_key(|&i| placements[i].z_order);
    if order
        .windows(2)
        .any(|w| placements[w[0]].z_order == placements[w[1]].z_order)
    {
        return Err(Error::Config("z_order values must be unique".into()));
    }

    let mut owner = vec![None; size * size];
    for &i in &order {
        let p = &placements[i];
        let mask = transform_glyph(&glyphs.glyph(p.glyph_id)?.mask, p.scale, p.rotation);
        let side = mask.width() as i64;
        let (left, top) = (p.center[0] - side / 2, p.center[1] - side / 2);
        for v in 0..side {
            let y = top + v;
            if y < 0 || y >= size as i64 {
                continue;
            }
            for u in 0..side {
                let x = left + u;
                if x >= 0 && x < size as i64 && mask.get(u as usize, v as usize) {
                    owner[y as usize * size + x as usize] = Some(i);
                }
            }
        }
    }

    let visible = (0..placements.len())
        .map(|i| {
            BinaryMask::new(
                size,
                size,
                owner.iter().map(|&o| (o == Some(i)) as u8).collect(),
            )
            .expect("canvas dimensions are valid")
        })
        .collect();
    Ok(SceneLayout {
        size,
        owner,
        visible,
    })
}

/// How the texture filling a layer was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FillSource {
    /// Short-length-scale synthesis from the source texture.
    Synth,
    /// Direct crop of a (pre-synthesized) texture image.
    Crop { offset: CropOffset },
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub image: Rgb8Image,
    pub layout: SceneLayout,
    pub fills: Vec<FillSource>,
    pub background_fill: Option<FillSource>,
}

fn texture_fill(
    store: &TextureStore,
    id: usize,
    size: usize,
    synth: bool,
    rng: &mut RngStream,
) -> Result<(Rgb8Image, FillSource)> {
    if synth {
        Ok((store.synth_shortscale(id, size, rng)?, FillSource::Synth))
    } else {
        let (img, offset) = store.crop_texture(id, size, size, rng)?;
        Ok((img, FillSource::Crop { offset }))
    }
}

/// Composites placements over a black (or textured) canvas.
///
/// Fills are drawn in ascending z-order, background first; every fill is
/// canvas-sized so draw counts do not depend on geometry.
pub fn compose_scene(
    placements: &[GlyphPlacement],
    glyphs: &GlyphSet,
    store: &TextureStore,
    background: Option<usize>,
    size: usize,
    synth: bool,
    rng: &mut RngStream,
) -> Result<Scene> {
    let layout = layout_scene(placements, glyphs, size)?;
    let mut image = Rgb8Image::filled(size, size, [0, 0, 0])?;
    let background_fill = match background {
        Some(id) => {
            let (fill, src) = texture_fill(store, id, size, synth, rng)?;
            image = fill;
            Some(src)
        }
        None => None,
    };

    let mut order: Vec<usize> = (0..placements.len()).collect();
    order.sort_by_key(|&i| placements[i].z_order);
    let mut fills = vec![FillSource::Synth; placements.len()];
    for &i in &order {
        let (fill, src) = texture_fill(store, placements[i].texture_id, size, synth, rng)?;
        fills[i] = src;
        for (idx, owner) in layout.owner.iter().enumerate() {
            if *owner == Some(i) {
                let (x, y) = (idx % size, idx / size);
                image.set_pixel(x, y, fill.pixel(x, y));
            }
        }
    }
    Ok(Scene {
        image,
        layout,
        fills,
        background_fill,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmniglotConfig {
    pub num_characters: usize,
    pub background_textured: bool,
    pub image_size: usize,
    pub patch_size_range: [usize; 2],
    pub split: Split,
    pub global_seed: u64,
    pub use_synth_textures: bool,
}

impl Default for OmniglotConfig {
    fn default() -> Self {
        Self {
            num_characters: 8,
            background_textured: false,
            image_size: 256,
            patch_size_range: [64, 64],
            split: Split::Train,
            global_seed: 0,
            use_synth_textures: true,
        }
    }
}

impl OmniglotConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_characters == 0 {
            return Err(Error::Config("num_characters must be at least 1".into()));
        }
        let [pmin, pmax] = self.patch_size_range;
        if pmin == 0 || pmin > pmax {
            return Err(Error::Config(format!(
                "bad patch size range [{pmin}, {pmax}]"
            )));
        }
        if self.image_size == 0 {
            return Err(Error::Config("image_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmniglotMeta {
    pub sample_index: u64,
    pub placements: Vec<GlyphPlacement>,
    pub target_glyph_index: usize,
    pub background_texture_id: Option<usize>,
    pub scene_attempts: usize,
    pub fills: Vec<FillSource>,
    pub background_fill: Option<FillSource>,
    pub patch_size: usize,
    pub reference_fill: FillSource,
}

impl OmniglotMeta {
    pub fn target(&self) -> &GlyphPlacement {
        &self.placements[self.target_glyph_index]
    }
}

#[derive(Debug, Clone)]
pub struct OmniglotSample {
    pub image: Rgb8Image,
    pub reference: Rgb8Image,
    pub truth: BinaryMask,
    pub visible: Vec<BinaryMask>,
    pub meta: OmniglotMeta,
}

/// Draws one scene layout: distinct glyphs and textures, independent
/// transforms and centers, a random z permutation, and a uniform target.
fn sample_placements(
    config: &OmniglotConfig,
    glyph_pool: &[usize],
    texture_pool: &[usize],
    rng: &mut RngStream,
) -> (Vec<GlyphPlacement>, Option<usize>, usize) {
    let k = config.num_characters;
    let glyph_ids = rng.choose_distinct(glyph_pool, k);
    let extra = config.background_textured as usize;
    let textures = rng.choose_distinct(texture_pool, k + extra);
    let mut placements: Vec<GlyphPlacement> = glyph_ids
        .iter()
        .zip(&textures)
        .map(|(&glyph_id, &texture_id)| {
            let scale = rng.uniform_f64(SCALE_RANGE[0], SCALE_RANGE[1]);
            let rotation = rng.uniform_f64(0.0, TAU);
            let cx = rng.uniform_int(CENTER_RANGE[0] as u64, CENTER_RANGE[1] as u64) as i64;
            let cy = rng.uniform_int(CENTER_RANGE[0] as u64, CENTER_RANGE[1] as u64) as i64;
            GlyphPlacement {
                glyph_id,
                scale,
                rotation,
                center: [cx, cy],
                z_order: 0,
                texture_id,
            }
        })
        .collect();
    for (p, z) in placements.iter_mut().zip(rng.permutation(k)) {
        p.z_order = z;
    }
    let background = config.background_textured.then(|| textures[k]);
    let target = rng.uniform_index(k);
    (placements, background, target)
}

pub fn generate_omniglot(
    config: &OmniglotConfig,
    glyphs: &GlyphSet,
    store: &TextureStore,
    sample_index: u64,
) -> Result<OmniglotSample> {
    config.validate()?;
    let k = config.num_characters;
    let glyph_pool = glyphs.ids(config.split);
    if glyph_pool.len() < k {
        return Err(Error::Insufficient {
            what: "glyphs",
            available: glyph_pool.len(),
            needed: k,
        });
    }
    let texture_pool = store.ids(config.split);
    let needed = k + config.background_textured as usize;
    if texture_pool.len() < needed {
        return Err(Error::Insufficient {
            what: "textures",
            available: texture_pool.len(),
            needed,
        });
    }

    let size = config.image_size;
    let mut rng = RngStream::derive(config.global_seed, sample_index);
    let mut chosen = None;
    for attempt in 1..=SCENE_ATTEMPTS {
        let (placements, background, target) =
            sample_placements(config, &glyph_pool, &texture_pool, &mut rng);
        let layout = layout_scene(&placements, glyphs, size)?;
        if !layout.visible[target].is_empty() {
            chosen = Some((placements, background, target, attempt));
            break;
        }
    }
    let (placements, background, target, attempts) = chosen.ok_or(Error::RetriesExhausted {
        attempts: SCENE_ATTEMPTS,
        what: "target character visible",
    })?;

    let synth = config.use_synth_textures;
    let scene = compose_scene(
        &placements,
        glyphs,
        store,
        background,
        size,
        synth,
        &mut rng,
    )?;
    let [pmin, pmax] = config.patch_size_range;
    let patch = rng.uniform_int(pmin as u64, pmax as u64) as usize;
    let target_texture = placements[target].texture_id;
    let (reference, reference_fill) = if synth {
        (
            store.synth_shortscale(target_texture, patch, &mut rng)?,
            FillSource::Synth,
        )
    } else {
        let (img, offset) = store.crop_texture(target_texture, patch, patch, &mut rng)?;
        (img, FillSource::Crop { offset })
    };

    let truth = scene.layout.visible[target].clone();
    Ok(OmniglotSample {
        image: scene.image,
        reference,
        truth,
        visible: scene.layout.visible,
        meta: OmniglotMeta {
            sample_index,
            placements,
            target_glyph_index: target,
            background_texture_id: background,
            scene_attempts: attempts,
            fills: scene.fills,
            background_fill: scene.background_fill,
            patch_size: patch,
            reference_fill,
        },
    })
}

/// Rebuilds the ground truth from recorded placements alone.
pub fn regenerate_truth(
    meta: &OmniglotMeta,
    glyphs: &GlyphSet,
    image_size: usize,
) -> Result<BinaryMask> {
    let layout = layout_scene(&meta.placements, glyphs, image_size)?;
    Ok(layout.visible[meta.target_glyph_index].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn blob_glyph(seed: u64) -> BinaryMask {
        let mut rng = RngStream::derive(seed, 0);
        let (ax, ay) = (rng.uniform_f64(20.0, 85.0), rng.uniform_f64(20.0, 85.0));
        let (bx, by) = (rng.uniform_f64(20.0, 85.0), rng.uniform_f64(20.0, 85.0));
        BinaryMask::from_fn(GLYPH_SIZE, GLYPH_SIZE, |x, y| {
            let (x, y) = (x as f64, y as f64);
            let t = (((x - ax) * (bx - ax) + (y - ay) * (by - ay))
                / ((bx - ax).powi(2) + (by - ay).powi(2) + 1e-9))
                .clamp(0.0, 1.0);
            let (qx, qy) = (ax + t * (bx - ax), ay + t * (by - ay));
            (x - qx).powi(2) + (y - qy).powi(2) <= 16.0
        })
        .unwrap()
    }

    fn glyph_set(n: usize) -> GlyphSet {
        let named = (0..n)
            .map(|i| (format!("g{i:03}.png"), blob_glyph(i as u64)))
            .collect();
        GlyphSet::from_masks(named, 0, 0).unwrap()
    }

    fn flat_store(n: usize) -> TextureStore {
        let named = (0..n)
            .map(|i| {
                let v = (40 + i * 23 % 200) as u8;
                (
                    format!("{i:03}.png"),
                    Rgb8Image::filled(32, 32, [v, 255 - v, 90]).unwrap(),
                )
            })
            .collect();
        TextureStore::from_images(named, 0, 0).unwrap()
    }

    #[test]
    fn identity_transform() {
        let g = blob_glyph(1);
        assert_eq!(transform_glyph(&g, 1.0, 0.0), g);
    }

    #[test]
    fn half_turn_is_exact_grid_rotation() {
        let g = blob_glyph(2);
        let r = transform_glyph(&g, 1.0, PI);
        assert_eq!(r.dims(), (105, 105));
        for i in 0..105 {
            for j in 0..105 {
                assert_eq!(r.get(j, i), g.get(104 - j, 104 - i));
            }
        }
    }

    #[test]
    fn doubling_scale_quadruples_area() {
        for s in 0..5 {
            let g = blob_glyph(10 + s);
            let t = transform_glyph(&g, 2.0, 0.0);
            assert_eq!(t.dims(), (210, 210));
            let ratio = t.count_ones() as f64 / (4.0 * g.count_ones() as f64);
            assert!((ratio - 1.0).abs() <= 0.1, "ratio {ratio}");
        }
    }

    #[test]
    fn rotated_canvas_side() {
        assert_eq!(
            transformed_side(1.0, PI / 4.0),
            (105.0 * 2f64.sqrt()).ceil() as usize
        );
        assert_eq!(transformed_side(0.5, PI / 2.0), 53);
    }

    #[test]
    fn blank_glyph_rejected() {
        let named = vec![(
            "blank.png".to_string(),
            BinaryMask::zeros(105, 105).unwrap(),
        )];
        assert!(matches!(
            GlyphSet::from_masks(named, 0, 0),
            Err(Error::BadGlyph { .. })
        ));
    }

    #[test]
    fn glyph_split_counts() {
        let named: Vec<_> = (0..964)
            .map(|i| (format!("{i:04}.png"), BinaryMask::ones(105, 105).unwrap()))
            .collect();
        let set = GlyphSet::from_masks(named, 100, 3).unwrap();
        assert_eq!(set.ids(Split::Train).len(), 864);
        assert_eq!(set.ids(Split::Test).len(), 100);
    }

    fn placement(
        glyph_id: usize,
        center: [i64; 2],
        scale: f64,
        z: usize,
        tex: usize,
    ) -> GlyphPlacement {
        GlyphPlacement {
            glyph_id,
            scale,
            rotation: 0.0,
            center,
            z_order: z,
            texture_id: tex,
        }
    }

    #[test]
    fn single_centered_placement() {
        let glyphs = glyph_set(3);
        let store = flat_store(3);
        let p = [placement(0, [128, 128], 1.0, 0, 1)];
        let scene = compose_scene(
            &p,
            &glyphs,
            &store,
            None,
            256,
            false,
            &mut RngStream::derive(0, 0),
        )
        .unwrap();
        let g = &glyphs.glyph(0).unwrap().mask;
        let vis = &scene.layout.visible[0];
        for y in 0..256 {
            for x in 0..256 {
                let (u, v) = (x as i64 - 76, y as i64 - 76);
                let inside =
                    (0..105).contains(&u) && (0..105).contains(&v) && g.get(u as usize, v as usize);
                assert_eq!(vis.get(x, y), inside);
                if !inside {
                    assert_eq!(scene.image.pixel(x, y), [0, 0, 0]);
                } else {
                    assert_eq!(scene.image.pixel(x, y), store.image(1).unwrap().pixel(0, 0));
                }
            }
        }
    }

    #[test]
    fn upper_layer_occludes_lower() {
        let glyphs = glyph_set(3);
        let p = [
            placement(0, [100, 100], 1.0, 0, 0),
            placement(0, [100, 100], 1.0, 1, 1),
        ];
        let layout = layout_scene(&p, &glyphs, 256).unwrap();
        assert!(layout.visible[0].is_empty());
        assert_eq!(
            layout.visible[1].count_ones(),
            glyphs.glyph(0).unwrap().mask.count_ones()
        );
    }

    #[test]
    fn placements_clip_at_canvas_edge() {
        let full = BinaryMask::ones(105, 105).unwrap();
        let glyphs = GlyphSet::from_masks(vec![("a".into(), full)], 0, 0).unwrap();
        let layout = layout_scene(&[placement(0, [28, 28], 2.0, 0, 0)], &glyphs, 256).unwrap();
        // 210-wide box centered at 28 covers columns -77..133.
        assert_eq!(layout.visible[0].count_ones(), 133 * 133);
    }

    #[test]
    fn thirty_two_characters_are_distinct() {
        let glyphs = glyph_set(40);
        let store = flat_store(40);
        let cfg = OmniglotConfig {
            num_characters: 32,
            image_size: 128,
            use_synth_textures: false,
            ..Default::default()
        };
        let s = generate_omniglot(&cfg, &glyphs, &store, 5).unwrap();
        let mut g: Vec<_> = s.meta.placements.iter().map(|p| p.glyph_id).collect();
        let mut t: Vec<_> = s.meta.placements.iter().map(|p| p.texture_id).collect();
        g.sort_unstable();
        g.dedup();
        t.sort_unstable();
        t.dedup();
        assert_eq!((g.len(), t.len()), (32, 32));
        let mut z: Vec<_> = s.meta.placements.iter().map(|p| p.z_order).collect();
        z.sort_unstable();
        assert_eq!(z, (0..32).collect::<Vec<_>>());
    }

    #[test]
    fn single_character_truth_is_its_visible_mask() {
        let glyphs = glyph_set(4);
        let store = flat_store(4);
        let cfg = OmniglotConfig {
            num_characters: 1,
            use_synth_textures: false,
            ..Default::default()
        };
        let s = generate_omniglot(&cfg, &glyphs, &store, 0).unwrap();
        assert_eq!(s.truth, s.visible[0]);
        assert!(!s.truth.is_empty());
        assert_eq!(regenerate_truth(&s.meta, &glyphs, 256).unwrap(), s.truth);
    }

    #[test]
    fn background_texture_differs_from_characters() {
        let glyphs = glyph_set(10);
        let store = flat_store(10);
        let cfg = OmniglotConfig {
            num_characters: 8,
            background_textured: true,
            image_size: 96,
            patch_size_range: [16, 16],
            ..Default::default()
        };
        for i in 0..5 {
            let s = generate_omniglot(&cfg, &glyphs, &store, i).unwrap();
            let bg = s.meta.background_texture_id.unwrap();
            assert!(s.meta.placements.iter().all(|p| p.texture_id != bg));
        }
    }

    #[test]
    fn too_few_glyphs_rejected() {
        let cfg = OmniglotConfig {
            num_characters: 8,
            ..Default::default()
        };
        assert!(matches!(
            generate_omniglot(&cfg, &glyph_set(4), &flat_store(10), 0),
            Err(Error::Insufficient { what: "glyphs", .. })
        ));
    }
}
