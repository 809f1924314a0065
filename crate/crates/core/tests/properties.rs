mod common;

use proptest::prelude::*;

use texseg::colltex::{generate_colltex, CollTexConfig};
use texseg::matcher::{embed, reference_vector, similarity_map, Centering, FilterBankConfig};
use texseg::metrics::{binarize, iou, weighted_bce};
use texseg::omniglot::{generate_omniglot, OmniglotConfig};
use texseg::partitioner::{rasterize, PartitionSpec};
use texseg::{BinaryMask, ProbMask, Rgb8Image, RngStream, Split, TextureStore};

fn mask_pair() -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
    (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
        let bits = || proptest::collection::vec(0u8..=1, w * h);
        (bits(), bits()).prop_map(move |(a, b)| {
            (
                BinaryMask::new(w, h, a).unwrap(),
                BinaryMask::new(w, h, b).unwrap(),
            )
        })
    })
}

fn prob_value() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0]
}

fn truth_and_pred() -> impl Strategy<Value = (BinaryMask, ProbMask)> {
    (1usize..10, 1usize..10).prop_flat_map(|(w, h)| {
        (
            proptest::collection::vec(0u8..=1, w * h),
            proptest::collection::vec(prob_value(), w * h),
        )
            .prop_map(move |(t, p)| {
                (
                    BinaryMask::new(w, h, t).unwrap(),
                    ProbMask::new(w, h, p).unwrap(),
                )
            })
    })
}

fn tile2x2<T: Copy>(w: usize, h: usize, data: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(4 * w * h);
    for y in 0..2 * h {
        for x in 0..2 * w {
            out.push(data[(y % h) * w + x % w]);
        }
    }
    out
}

proptest! {
    #[test]
    fn iou_is_symmetric_bounded_and_reflexive((a, b) in mask_pair()) {
        let ab = iou(&a, &b).unwrap();
        prop_assert_eq!(ab, iou(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(iou(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn bce_is_finite_and_non_negative((t, p) in truth_and_pred()) {
        let l = weighted_bce(&t, &p).unwrap();
        for v in [l.l_fg, l.l_bg, l.l_total] {
            prop_assert!(v.is_finite() && v >= 0.0);
        }
        prop_assert_eq!(l.n_fg + l.n_bg, t.data().len());
    }

    #[test]
    fn bce_is_invariant_to_tiling((t, p) in truth_and_pred()) {
        let (w, h) = t.dims();
        let t2 = BinaryMask::new(2 * w, 2 * h, tile2x2(w, h, t.data())).unwrap();
        let p2 = ProbMask::new(2 * w, 2 * h, tile2x2(w, h, p.data())).unwrap();
        let a = weighted_bce(&t, &p).unwrap();
        let b = weighted_bce(&t2, &p2).unwrap();
        prop_assert!((a.l_fg - b.l_fg).abs() <= 1e-12);
        prop_assert!((a.l_bg - b.l_bg).abs() <= 1e-12);
        prop_assert!((a.l_total - b.l_total).abs() <= 1e-12);
    }

    #[test]
    fn perfect_prediction_is_a_strict_minimum(
        (t, _) in truth_and_pred(),
        pick in any::<prop::sample::Index>(),
        wrongness in 0.01f64..=1.0,
    ) {
        let perfect = ProbMask::from_binary(&t);
        let base = weighted_bce(&t, &perfect).unwrap().l_total;
        let i = pick.index(t.data().len());
        let mut data = perfect.data().to_vec();
        data[i] = if t.data()[i] == 1 { 1.0 - wrongness } else { wrongness };
        let (w, h) = t.dims();
        let worse = weighted_bce(&t, &ProbMask::new(w, h, data).unwrap()).unwrap().l_total;
        prop_assert!(worse > base);
    }

    #[test]
    fn binarize_is_monotone_in_threshold((_, p) in truth_and_pred(), lo in 0.01f64..0.5, hi in 0.5f64..0.99) {
        let a = binarize(&p, lo);
        let b = binarize(&p, hi);
        for (&x, &y) in a.data().iter().zip(b.data()) {
            prop_assert!(y <= x);
        }
    }

    // Integer anchors make ties frequent, which is the interesting case.
    #[test]
    fn partition_follows_lowest_index_rule_under_permutation(
        anchors in proptest::collection::vec((0u8..24, 0u8..24), 2..8),
        seed in any::<u64>(),
    ) {
        let size = 24;
        let anchors: Vec<[f64; 2]> = anchors.iter().map(|&(x, y)| [x as f64, y as f64]).collect();
        let perm = RngStream::derive(seed, 0).permutation(anchors.len());
        // Anchor perm[k] of the original becomes anchor k.
        let permuted: Vec<[f64; 2]> = perm.iter().map(|&j| anchors[j]).collect();
        let map = rasterize(&PartitionSpec::new(size, anchors.clone()).unwrap());
        let pmap = rasterize(&PartitionSpec::new(size, permuted).unwrap());

        let mut covered = vec![0u32; size * size];
        for r in 0..anchors.len() {
            for (c, &v) in covered.iter_mut().zip(map.region_mask(r).data()) {
                *c += v as u32;
            }
        }
        prop_assert!(covered.iter().all(|&c| c == 1));

        for y in 0..size {
            for x in 0..size {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let d: Vec<f64> = anchors.iter().map(|a| (a[0] - px).powi(2) + (a[1] - py).powi(2)).collect();
                let best = d.iter().cloned().fold(f64::INFINITY, f64::min);
                let tied: Vec<usize> = (0..anchors.len()).filter(|&k| d[k] == best).collect();
                prop_assert_eq!(map.region(x, y), tied[0]);
                let expect = (0..perm.len()).find(|&k| tied.contains(&perm[k])).unwrap();
                prop_assert_eq!(pmap.region(x, y), expect);
            }
        }
    }
}

fn random_image(w: usize, h: usize, seed: u64) -> Rgb8Image {
    let mut rng = RngStream::derive(seed, 1);
    Rgb8Image::from_fn(w, h, |_, _| {
        let mut px = [0u8; 3];
        px.iter_mut()
            .for_each(|c| *c = rng.uniform_int(0, 255) as u8);
        px
    })
    .unwrap()
}

fn small_bank() -> FilterBankConfig {
    FilterBankConfig {
        window_scales: vec![3, 5],
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn similarity_is_bounded(seed in any::<u64>(), rseed in any::<u64>()) {
        let cfg = small_bank();
        let field = embed(&random_image(20, 18, seed), &cfg).unwrap();
        let reference = embed(&random_image(9, 9, rseed), &cfg).unwrap();
        if let Ok(r) = reference_vector(&reference, cfg.border()) {
            let map = similarity_map(&field, &r).unwrap();
            for y in 0..18 {
                for x in 0..20 {
                    let s = map.get(x, y);
                    prop_assert!((-1.0 - 1e-6..=1.0 + 1e-6).contains(&s));
                }
            }
        }
    }

    // Translation of a periodic texture. Centering modes that depend on the
    // whole image are excluded: border padding changes its mean.
    #[test]
    fn interior_embedding_is_shift_invariant(
        seed in any::<u64>(),
        period in 3usize..9,
        dx in 0usize..8,
        dy in 0usize..8,
        mid in any::<bool>(),
    ) {
        let tile = random_image(period, period, seed);
        let size = 40;
        let base = Rgb8Image::from_fn(size, size, |x, y| tile.pixel(x % period, y % period)).unwrap();
        let shifted = Rgb8Image::from_fn(size, size, |x, y| tile.pixel((x + dx) % period, (y + dy) % period)).unwrap();
        let cfg = FilterBankConfig {
            window_scales: vec![3, 7],
            centering: if mid { Centering::MidGray } else { Centering::None },
            ..Default::default()
        };
        let a = embed(&base, &cfg).unwrap();
        let b = embed(&shifted, &cfg).unwrap();
        // Gradients reach one pixel past the window.
        let r = cfg.border() + 1;
        for y in r..size - r - dy {
            for x in r..size - r - dx {
                let (va, vb) = (a.vector(x + dx, y + dy), b.vector(x, y));
                for (p, q) in va.iter().zip(vb) {
                    prop_assert!((p - q).abs() <= 1e-5, "({x},{y}) {p} vs {q}");
                }
            }
        }
    }
}

fn leakage_store() -> TextureStore {
    common::texture_store(30, 12, 5)
}

fn assert_split(store: &TextureStore, ids: &[usize], split: Split) {
    for &id in ids {
        assert_eq!(store.record(id).unwrap().split, split, "texture {id}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn colltex_never_leaks_across_splits(index in 0u64..10_000, test in any::<bool>(), seed in any::<u64>()) {
        let store = leakage_store();
        let split = if test { Split::Test } else { Split::Train };
        let config = CollTexConfig { split, global_seed: seed, ..Default::default() };
        let s = generate_colltex(&config, &store, index).unwrap();
        assert_split(&store, &s.meta.region_texture_ids, split);
        assert_split(&store, &[s.meta.reference_texture_id], split);
    }

    #[test]
    fn omniglot_never_leaks_across_splits(index in 0u64..10_000, test in any::<bool>(), background in any::<bool>()) {
        let store = leakage_store();
        let glyphs = common::glyph_set(30, 12, 5);
        let split = if test { Split::Test } else { Split::Train };
        let config = OmniglotConfig { split, background_textured: background, ..Default::default() };
        let s = generate_omniglot(&config, &glyphs, &store, index).unwrap();
        let textures: Vec<usize> = s.meta.placements.iter().map(|p| p.texture_id).chain(s.meta.background_texture_id).collect();
        assert_split(&store, &textures, split);
        for p in &s.meta.placements {
            prop_assert_eq!(glyphs.split_of(p.glyph_id), Some(split));
        }
    }

    #[test]
    fn crops_copy_tiled_source_pixels(id in 0usize..30, w in 1usize..300, h in 1usize..300, seed in any::<u64>()) {
        let store = leakage_store();
        let (crop, off) = store.crop_texture(id, w, h, &mut RngStream::derive(seed, 0)).unwrap();
        let src = store.image(id).unwrap();
        let (sw, sh) = src.dims();
        for y in (0..h).step_by(7) {
            for x in (0..w).step_by(5) {
                prop_assert_eq!(crop.pixel(x, y), src.pixel((off.x + x) % sw, (off.y + y) % sh));
            }
        }
    }
}
