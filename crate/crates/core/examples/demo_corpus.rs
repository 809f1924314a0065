//! Writes a procedural texture and glyph corpus for trying the CLI.
//!
//! `cargo run --example demo_corpus -- DIR [COUNT]`

use std::path::PathBuf;

use texseg::corpus::{write_glyph_corpus, write_texture_corpus};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "demo".into()));
    let count: usize = args.next().map(|c| c.parse()).transpose()?.unwrap_or(140);
    write_texture_corpus(&dir.join("textures"), count, 1)?;
    write_glyph_corpus(&dir.join("glyphs"), count, 1)?;
    println!("{count} textures and {count} glyphs under {}", dir.display());
    Ok(())
}
