//! Serialization and augmentation properties through the public API.

use fiberlab::annotation::GrayImage;
use fiberlab::dataset::{
    apply_augmentation, load_annotations, read_gray_png, read_mask_png, save_annotations,
    write_gray_png, write_mask_png, AugmentDecision, DatasetManifest, FiberRecord, ImageRecord,
    Provenance, SubsetFlags, Tristate,
};
use fiberlab::geometry::{satisfies_ordering, KeypointChain, Point2D};
use fiberlab::{Fiber, RasterMask};
use proptest::prelude::*;

fn tristate() -> impl Strategy<Value = Tristate> {
    prop_oneof![
        Just(Tristate::Yes),
        Just(Tristate::No),
        Just(Tristate::Random)
    ]
}

fn record() -> impl Strategy<Value = FiberRecord> {
    (
        prop::collection::vec((-1e4f64..1e4, -1e4f64..1e4), 2..12),
        1e-3f64..100.0,
        0.0f64..1e4,
        prop::option::of(0.0f64..=1.0),
    )
        .prop_map(|(kp, width, slack, score)| {
            let (first, last) = (kp[0], kp[kp.len() - 1]);
            let chord = (last.0 - first.0).hypot(last.1 - first.1);
            FiberRecord {
                keypoints: kp.into_iter().map(|(x, y)| [x, y]).collect(),
                width_px: width,
                length_px: chord + slack + 1e-3,
                score,
                mask_path: None,
                pruned_keypoints: None,
            }
        })
}

fn manifest() -> impl Strategy<Value = DatasetManifest> {
    prop::collection::vec(
        (
            prop::collection::vec(record(), 0..4),
            tristate(),
            tristate(),
            tristate(),
        ),
        0..5,
    )
    .prop_map(|entries| {
        let mut m = DatasetManifest::new(Provenance::Semiautomatic);
        for (i, (fibers, l, c, o)) in entries.into_iter().enumerate() {
            let mut e = ImageRecord::new(format!("img_{i}.png"), 64, 48, SubsetFlags::new(l, c, o));
            e.fibers = fibers;
            m.entries.push(e);
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn manifest_file_round_trip_is_exact(m in manifest()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        save_annotations(&m, &path).unwrap();
        prop_assert_eq!(load_annotations(&path).unwrap(), m);
    }

    #[test]
    fn png_round_trip(w in 1u32..40, h in 1u32..40, seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let pixels: Vec<u8> = (0..w * h).map(|i| (seed.wrapping_mul(u64::from(i) + 1) >> 13) as u8).collect();
        let img = GrayImage::new(w, h, pixels).unwrap();
        write_gray_png(&img, &dir.path().join("g.png")).unwrap();
        prop_assert_eq!(read_gray_png(&dir.path().join("g.png")).unwrap(), img.clone());

        let mut mask = RasterMask::new(w, h).unwrap();
        for (i, &v) in img.pixels().iter().enumerate() {
            mask.set(i as u32 % w, i as u32 / w, v > 127);
        }
        write_mask_png(&mask, &dir.path().join("m.png")).unwrap();
        prop_assert_eq!(read_mask_png(&dir.path().join("m.png")).unwrap(), mask);
    }

    #[test]
    fn double_flip_restores_geometry(
        pts in prop::collection::vec((0.0f64..63.0, 0.0f64..47.0), 2..10),
        lr in any::<bool>(),
        ud in any::<bool>(),
    ) {
        let chain = KeypointChain::new(pts.iter().map(|&(x, y)| Point2D::new(x, y)).collect());
        prop_assume!(chain.is_ok());
        let fiber = Fiber::new(chain.unwrap(), 4.0, 200.0).unwrap();
        let img = GrayImage::filled(64, 48, 90).unwrap();
        let d = AugmentDecision { flip_lr: lr, flip_ud: ud, ..AugmentDecision::IDENTITY };
        let (once_img, once) = apply_augmentation(&img, std::slice::from_ref(&fiber), &d).unwrap();
        prop_assert!(satisfies_ordering(&once[0].keypoints));
        let (twice_img, twice) = apply_augmentation(&once_img, &once, &d).unwrap();
        prop_assert_eq!(twice_img, img);
        let mut want: Vec<(f64, f64)> = fiber.keypoints.points().iter().map(|p| (p.x, p.y)).collect();
        let mut got: Vec<(f64, f64)> = twice[0].keypoints.points().iter().map(|p| (p.x, p.y)).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in want.iter().zip(&got) {
            prop_assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
        }
        prop_assert_eq!(twice[0].width, 4.0);
        prop_assert_eq!(twice[0].length, 200.0);
    }
}
