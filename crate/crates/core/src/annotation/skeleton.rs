use crate::geometry::RasterMask;

/// One-pixel-thick, topology-preserving reduction of a binary mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub mask: RasterMask,
}

// Neighbour offsets x1..x8 counter-clockwise from east (y grows downwards).
const RING: [(i64, i64); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

// Border directions peeled in turn: north, south, west, east.
const PASSES: [(i64, i64); 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];

fn ring(mask: &RasterMask, x: i64, y: i64) -> [bool; 8] {
    let mut n = [false; 8];
    for (slot, (dx, dy)) in n.iter_mut().zip(RING) {
        *slot = mask.get_signed(x + dx, y + dy);
    }
    n
}

/// Yokoi's 8-connectivity number. A border pixel is simple (removable without
/// changing the topology) iff this equals 1.
fn connectivity_number(n: &[bool; 8]) -> u32 {
    let bg = |k: usize| u32::from(!n[k % 8]);
    [0, 2, 4, 6]
        .iter()
        .map(|&k| bg(k) - bg(k) * bg(k + 1) * bg(k + 2))
        .sum()
}

fn removable(mask: &RasterMask, x: i64, y: i64) -> bool {
    let n = ring(mask, x, y);
    let neighbours = n.iter().filter(|b| **b).count();
    neighbours >= 2 && connectivity_number(&n) == 1
}

/// Iterative directional thinning. Each pass collects the pixels on one
/// border side and deletes them one by one while they stay simple and are
/// not end points, so connectivity of every component is kept.
pub fn skeletonize(mask: &RasterMask) -> Skeleton {
    let mut out = mask.clone();
    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for (dx, dy) in PASSES {
            candidates.clear();
            candidates.extend(out.iter_set().filter(|&(x, y)| {
                let (x, y) = (i64::from(x), i64::from(y));
                !out.get_signed(x + dx, y + dy) && removable(&out, x, y)
            }));
            for &(x, y) in &candidates {
                if removable(&out, i64::from(x), i64::from(y)) {
                    out.set(x, y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Skeleton { mask: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::connected_components;
    use crate::geometry::{rasterize_chain, KeypointChain};
    use proptest::prelude::*;

    fn has_full_2x2(m: &RasterMask) -> bool {
        (0..m.height() - 1).any(|y| {
            (0..m.width() - 1)
                .any(|x| m.get(x, y) && m.get(x + 1, y) && m.get(x, y + 1) && m.get(x + 1, y + 1))
        })
    }

    #[test]
    fn thin_line_unchanged() {
        let mut m = RasterMask::new(30, 5).unwrap();
        for x in 3..27 {
            m.set(x, 2, true);
        }
        assert_eq!(skeletonize(&m).mask, m);
    }

    #[test]
    fn empty_stays_empty() {
        let m = RasterMask::new(8, 8).unwrap();
        assert!(skeletonize(&m).mask.is_empty());
    }

    #[test]
    fn filled_rectangle_becomes_centerline() {
        let mut m = RasterMask::new(60, 21).unwrap();
        for y in 5..16 {
            for x in 5..55 {
                m.set(x, y, true);
            }
        }
        let s = skeletonize(&m).mask;
        assert!(s.is_subset_of(&m));
        assert!(!has_full_2x2(&s));
        assert_eq!(connected_components(&s).len(), 1);
        let b = s.bounding_box().unwrap();
        assert!(b.x1 - b.x0 + 1 >= 40, "span {}", b.x1 - b.x0 + 1);
    }

    #[test]
    fn square_block_collapses_to_a_connected_line() {
        let mut m = RasterMask::new(4, 4).unwrap();
        for (x, y) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            m.set(x, y, true);
        }
        let s = skeletonize(&m).mask;
        assert!(!s.is_empty() && !has_full_2x2(&s));
        assert_eq!(connected_components(&s).len(), 1);
    }

    #[test]
    fn fiber_stroke_is_thin() {
        let kp = KeypointChain::from_xy(&[(10.0, 10.0), (40.0, 30.0), (70.0, 20.0), (90.0, 60.0)])
            .unwrap();
        let m = rasterize_chain(&kp, 9.0, 100, 80).unwrap();
        let s = skeletonize(&m).mask;
        assert!(!has_full_2x2(&s));
        assert_eq!(connected_components(&s).len(), 1);
    }

    proptest! {
        #[test]
        fn subset_and_component_count_preserved(
            discs in prop::collection::vec((0.0f64..40.0, 0.0f64..40.0, 0.5f64..6.0), 1..6)
        ) {
            let mut m = RasterMask::new(40, 40).unwrap();
            for (x, y, r) in discs {
                m.paint_capsule(crate::Point2D::new(x, y), crate::Point2D::new(x, y), r);
            }
            let s = skeletonize(&m).mask;
            prop_assert!(s.is_subset_of(&m));
            prop_assert_eq!(connected_components(&s).len(), connected_components(&m).len());
        }
    }
}
