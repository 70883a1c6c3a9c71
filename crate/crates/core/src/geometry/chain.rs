use crate::error::{FiberError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(&self, other: &Point2D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for Point2D {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

impl From<[f64; 2]> for Point2D {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point2D> for [f64; 2] {
    fn from(p: Point2D) -> Self {
        [p.x, p.y]
    }
}

/// An ordered chain of at least two keypoints with no two consecutive
/// points identical.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointChain {
    points: Vec<Point2D>,
}

impl KeypointChain {
    pub fn new(points: Vec<Point2D>) -> Result<Self> {
        if points.len() < 2 {
            return Err(FiberError::invalid(format!(
                "keypoint chain needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(FiberError::invalid(format!("keypoint {i} is not finite")));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(FiberError::invalid(format!(
                "keypoints {i} and {} coincide",
                i + 1
            )));
        }
        Ok(Self { points })
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self> {
        Self::new(coords.iter().copied().map(Point2D::from).collect())
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; a valid chain has at least two points.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Point2D {
        self.points[0]
    }

    pub fn last(&self) -> Point2D {
        self.points[self.points.len() - 1]
    }

    /// Straight-line distance between the two end keypoints.
    pub fn chord(&self) -> f64 {
        self.first().distance(&self.last())
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points }
    }

    /// Chain with keypoint `index` removed, or `None` if the result would be
    /// invalid (fewer than two points, or two coinciding neighbours).
    pub fn without(&self, index: usize) -> Option<Self> {
        if index >= self.points.len() || self.points.len() <= 2 {
            return None;
        }
        let mut points = self.points.clone();
        points.remove(index);
        Self::new(points).ok()
    }

    /// Applies `f` to every point, re-validating the result.
    pub fn map_points(&self, f: impl Fn(Point2D) -> Point2D) -> Result<Self> {
        Self::new(self.points.iter().copied().map(f).collect())
    }

    pub fn into_points(self) -> Vec<Point2D> {
        self.points
    }
}

/// A fiber instance: spine keypoints with a constant width and an arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    pub keypoints: KeypointChain,
    pub width: f64,
    pub length: f64,
}

impl Fiber {
    pub fn new(keypoints: KeypointChain, width: f64, length: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(FiberError::invalid(format!(
                "fiber width must be > 0, got {width}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(FiberError::invalid(format!(
                "fiber length must be > 0, got {length}"
            )));
        }
        let chord = keypoints.chord();
        if length < chord - 1e-6 {
            return Err(FiberError::invalid(format!(
                "fiber length {length} is shorter than its end-to-end distance {chord}"
            )));
        }
        Ok(Self {
            keypoints,
            width,
            length,
        })
    }

    /// Builds a fiber whose length is the spline length of its keypoints.
    pub fn from_keypoints(keypoints: KeypointChain, width: f64) -> Result<Self> {
        let length = super::spline_length(&keypoints);
        Self::new(keypoints, width, length)
    }
}

/// True if the chain starts at its topmost end (smallest `y`), with ties
/// going to the leftmost end.
pub fn satisfies_ordering(chain: &KeypointChain) -> bool {
    let (a, b) = (chain.first(), chain.last());
    a.y < b.y || (a.y == b.y && a.x <= b.x)
}

/// Orients the chain so that it starts at the topmost end point, or the
/// leftmost one if both ends share the same row. Only the direction changes;
/// the relative keypoint order is kept.
pub fn order_keypoints(chain: &KeypointChain) -> KeypointChain {
    if satisfies_ordering(chain) {
        chain.clone()
    } else {
        chain.reversed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chain(c: &[(f64, f64)]) -> KeypointChain {
        KeypointChain::from_xy(c).unwrap()
    }

    #[test]
    fn rejects_degenerate_chains() {
        assert!(KeypointChain::from_xy(&[(1.0, 1.0)]).is_err());
        assert!(KeypointChain::from_xy(&[]).is_err());
        assert!(KeypointChain::from_xy(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(KeypointChain::from_xy(&[(0.0, f64::NAN), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn fiber_validation() {
        let kp = chain(&[(0.0, 0.0), (3.0, 4.0)]);
        assert!(Fiber::new(kp.clone(), 0.0, 5.0).is_err());
        assert!(Fiber::new(kp.clone(), 2.0, 4.0).is_err());
        assert!(Fiber::new(kp, 2.0, 5.0).is_ok());
    }

    #[test]
    fn topmost_end_goes_first() {
        let out = order_keypoints(&chain(&[(5.0, 9.0), (3.0, 5.0), (1.0, 1.0)]));
        assert_eq!(out, chain(&[(1.0, 1.0), (3.0, 5.0), (5.0, 9.0)]));
    }

    #[test]
    fn row_tie_goes_to_leftmost() {
        let out = order_keypoints(&chain(&[(7.0, 0.0), (4.0, 3.0), (2.0, 0.0)]));
        assert_eq!(out, chain(&[(2.0, 0.0), (4.0, 3.0), (7.0, 0.0)]));
    }

    #[test]
    fn conforming_chain_is_untouched() {
        let c = chain(&[(1.0, 1.0), (3.0, 5.0), (5.0, 9.0)]);
        assert_eq!(order_keypoints(&c), c);
    }

    #[test]
    fn without_refuses_to_break_the_chain() {
        let c = chain(&[(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)]);
        assert!(c.without(1).is_none());
        assert!(chain(&[(0.0, 0.0), (1.0, 0.0)]).without(0).is_none());
        assert_eq!(c.without(0).unwrap().len(), 2);
    }

    fn arb_chain() -> impl Strategy<Value = KeypointChain> {
        prop::collection::vec((0.0f64..200.0, 0.0f64..200.0), 2..20)
            .prop_filter_map("valid chain", |pts| KeypointChain::from_xy(&pts).ok())
    }

    proptest! {
        #[test]
        fn ordering_is_idempotent_and_direction_only(c in arb_chain()) {
            let once = order_keypoints(&c);
            prop_assert!(satisfies_ordering(&once));
            prop_assert_eq!(order_keypoints(&once), once.clone());
            prop_assert!(once == c || once == c.reversed());
        }

        #[test]
        fn ordering_after_horizontal_flip(c in arb_chain(), w in 200u32..400) {
            let flipped = c.map_points(|p| Point2D::new(f64::from(w) - 1.0 - p.x, p.y)).unwrap();
            prop_assert!(satisfies_ordering(&order_keypoints(&flipped)));
        }
    }
}
