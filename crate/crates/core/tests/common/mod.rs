#![allow(dead_code)]

use std::path::Path;

use texseg::corpus::{
    procedural_glyph, procedural_texture, write_glyph_corpus, write_texture_corpus,
};
use texseg::omniglot::GlyphSet;
use texseg::TextureStore;

/// In-memory store of `count` procedural textures with `holdout` held out.
pub fn texture_store(count: usize, holdout: usize, seed: u64) -> TextureStore {
    let named = (0..count)
        .map(|i| (format!("tex_{i:04}.png"), procedural_texture(i, seed)))
        .collect();
    TextureStore::from_images(named, holdout, 0).unwrap()
}

pub fn glyph_set(count: usize, holdout: usize, seed: u64) -> GlyphSet {
    let named = (0..count)
        .map(|i| (format!("glyph_{i:04}.png"), procedural_glyph(i, seed)))
        .collect();
    GlyphSet::from_masks(named, holdout, 0).unwrap()
}

/// Writes texture and glyph corpora under `root`; returns their directories.
pub fn write_corpora(
    root: &Path,
    textures: usize,
    glyphs: usize,
) -> (std::path::PathBuf, std::path::PathBuf) {
    let t = root.join("textures");
    let g = root.join("glyphs");
    write_texture_corpus(&t, textures, 1).unwrap();
    write_glyph_corpus(&g, glyphs, 1).unwrap();
    (t, g)
}
