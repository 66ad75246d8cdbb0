//! Boxes, run-length masks, and the overlap/distance primitives built on them.
//!
//! Pixel `k` is centred on coordinate `k` and covers `[k - 0.5, k + 0.5)`. A
//! box covering pixel columns `x0..=x1` therefore has `cx = (x0 + x1) / 2` and
//! `w = x1 - x0 + 1`; the integer top-left form used by dataset files maps to
//! it through `cx = x + (w - 1) / 2`.

use std::fmt;
use std::str::FromStr;

use crate::error::GeometryError;

/// Axis-aligned box in centre format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub empty: bool,
}

impl BBox {
    pub const EMPTY: BBox = BBox {
        cx: 0.0,
        cy: 0.0,
        w: 0.0,
        h: 0.0,
        empty: true,
    };

    /// Builds a box; non-positive (or NaN) width or height yields [`BBox::EMPTY`].
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        if w > 0.0 && h > 0.0 {
            BBox {
                cx,
                cy,
                w,
                h,
                empty: false,
            }
        } else {
            BBox::EMPTY
        }
    }

    /// Integer top-left `x,y,w,h` as written in ground-truth files.
    pub fn from_top_left(x: f64, y: f64, w: f64, h: f64) -> Self {
        BBox::new(x + (w - 1.0) / 2.0, y + (h - 1.0) / 2.0, w, h)
    }

    /// Inverse of [`BBox::from_top_left`]. Empty boxes map to all zeros.
    pub fn to_top_left(&self) -> [f64; 4] {
        if self.empty {
            return [0.0; 4];
        }
        [
            self.cx - (self.w - 1.0) / 2.0,
            self.cy - (self.h - 1.0) / 2.0,
            self.w,
            self.h,
        ]
    }

    /// Box covering the inclusive pixel ranges `x0..=x1`, `y0..=y1`.
    pub fn from_pixel_bounds(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        if x1 < x0 || y1 < y0 {
            return BBox::EMPTY;
        }
        BBox::new(
            (x0 + x1) as f64 / 2.0,
            (y0 + y1) as f64 / 2.0,
            (x1 - x0 + 1) as f64,
            (y1 - y0 + 1) as f64,
        )
    }

    /// Inclusive pixel ranges `(x0, y0, x1, y1)` covered by the box, rounding
    /// the first and last pixel centres to the nearest integer.
    pub fn pixel_bounds(&self) -> Option<(i64, i64, i64, i64)> {
        if self.empty {
            return None;
        }
        let x0 = (self.cx - (self.w - 1.0) / 2.0).round() as i64;
        let x1 = (self.cx + (self.w - 1.0) / 2.0).round() as i64;
        let y0 = (self.cy - (self.h - 1.0) / 2.0).round() as i64;
        let y1 = (self.cy + (self.h - 1.0) / 2.0).round() as i64;
        Some((x0, y0, x1.max(x0), y1.max(y0)))
    }

    pub fn area(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.w * self.h
        }
    }

    /// Continuous extent `[left, top, right, bottom]`.
    pub fn edges(&self) -> [f64; 4] {
        [
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.cx.is_finite() && self.cy.is_finite() && self.w.is_finite() && self.h.is_finite()
    }
}

/// Intersection over union; 0 when either box is empty.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    if a.empty || b.empty {
        return 0.0;
    }
    let [al, at, ar, ab] = a.edges();
    let [bl, bt, br, bb] = b.edges();
    let iw = (ar.min(br) - al.max(bl)).max(0.0);
    let ih = (ab.min(bb) - at.max(bt)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

pub fn center_distance(a: &BBox, b: &BBox) -> Result<f64, GeometryError> {
    if a.empty || b.empty {
        return Err(GeometryError::EmptyBox);
    }
    Ok((a.cx - b.cx).hypot(a.cy - b.cy))
}

/// Centre distance with each axis scaled by the reference box size.
pub fn normalized_center_distance(pred: &BBox, gt: &BBox) -> Result<f64, GeometryError> {
    if gt.empty || !(gt.w > 0.0 && gt.h > 0.0) {
        return Err(GeometryError::DegenerateReference);
    }
    if pred.empty {
        return Err(GeometryError::EmptyBox);
    }
    Ok(((pred.cx - gt.cx) / gt.w).hypot((pred.cy - gt.cy) / gt.h))
}

/// Binary mask stored as alternating 0/1 run lengths in row-major order.
///
/// The first run always counts zeros and may be empty; every later run is
/// non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RleMask {
    grid_w: u32,
    grid_h: u32,
    runs: Vec<u32>,
}

impl RleMask {
    /// All-zero mask.
    pub fn zeros(grid_w: u32, grid_h: u32) -> Self {
        RleMask {
            grid_w,
            grid_h,
            runs: vec![grid_w * grid_h],
        }
    }

    /// Validates the run sum and folds any interior zero-length runs.
    pub fn from_runs(grid_w: u32, grid_h: u32, runs: Vec<u32>) -> Result<Self, GeometryError> {
        let expected = grid_w as u64 * grid_h as u64;
        let actual: u64 = runs.iter().map(|&r| r as u64).sum();
        if actual != expected {
            return Err(GeometryError::RunSumMismatch { expected, actual });
        }
        // canon[j] always holds a run of value j % 2.
        let mut canon: Vec<u32> = vec![0];
        for (i, r) in runs.into_iter().enumerate() {
            if r == 0 {
                continue;
            }
            if (canon.len() - 1) % 2 == i % 2 {
                *canon.last_mut().unwrap() += r;
            } else {
                canon.push(r);
            }
        }
        Ok(RleMask {
            grid_w,
            grid_h,
            runs: canon,
        })
    }

    /// Encodes a row-major bitmap of `grid_w * grid_h` pixels.
    pub fn from_bitmap(grid_w: u32, grid_h: u32, bits: &[bool]) -> Result<Self, GeometryError> {
        let expected = grid_w as usize * grid_h as usize;
        if bits.len() != expected {
            return Err(GeometryError::BitmapSize {
                expected,
                actual: bits.len(),
            });
        }
        let mut runs = Vec::new();
        let mut current = false;
        let mut count = 0u32;
        for &b in bits {
            if b != current {
                runs.push(count);
                count = 0;
                current = b;
            }
            count += 1;
        }
        runs.push(count);
        Ok(RleMask {
            grid_w,
            grid_h,
            runs,
        })
    }

    /// Filled rectangle over the inclusive pixel ranges, clipped to the grid.
    pub fn from_rect(grid_w: u32, grid_h: u32, x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        let (gw, gh) = (grid_w as i64, grid_h as i64);
        let x0 = x0.clamp(0, gw);
        let x1 = x1.clamp(-1, gw - 1);
        let y0 = y0.clamp(0, gh);
        let y1 = y1.clamp(-1, gh - 1);
        if x1 < x0 || y1 < y0 {
            return RleMask::zeros(grid_w, grid_h);
        }
        let width = (x1 - x0 + 1) as u32;
        let rows = (y1 - y0 + 1) as usize;
        let gap = grid_w - width;
        let mut runs = Vec::with_capacity(2 * rows + 1);
        runs.push((y0 * gw + x0) as u32);
        if gap == 0 {
            runs.push(width * rows as u32);
        } else {
            for row in 0..rows {
                if row > 0 {
                    runs.push(gap);
                }
                runs.push(width);
            }
        }
        let tail = (gh * gw - ((y1 * gw) + x1 + 1)) as u32;
        if tail > 0 {
            runs.push(tail);
        }
        RleMask {
            grid_w,
            grid_h,
            runs,
        }
    }

    pub fn grid_w(&self) -> u32 {
        self.grid_w
    }

    pub fn grid_h(&self) -> u32 {
        self.grid_h
    }

    pub fn runs(&self) -> &[u32] {
        &self.runs
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> u64 {
        self.runs.iter().skip(1).step_by(2).map(|&r| r as u64).sum()
    }

    pub fn decode(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.grid_w as usize * self.grid_h as usize);
        for (i, &r) in self.runs.iter().enumerate() {
            bits.extend(std::iter::repeat_n(i % 2 == 1, r as usize));
        }
        bits
    }
}

impl fmt::Display for RleMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}:", self.grid_w, self.grid_h)?;
        for r in &self.runs {
            write!(f, " {r}")?;
        }
        Ok(())
    }
}

impl FromStr for RleMask {
    type Err = GeometryError;

    /// Parses `"grid_w grid_h: r0 r1 r2 ..."`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, body) = s
            .split_once(':')
            .ok_or_else(|| GeometryError::RleSyntax("missing ':' after grid size".into()))?;
        let dims: Vec<&str> = head.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(GeometryError::RleSyntax(format!(
                "expected 'grid_w grid_h', got {head:?}"
            )));
        }
        let parse = |t: &str| {
            t.parse::<u32>()
                .map_err(|_| GeometryError::RleSyntax(format!("bad integer {t:?}")))
        };
        let (w, h) = (parse(dims[0])?, parse(dims[1])?);
        let runs = body
            .split_whitespace()
            .map(parse)
            .collect::<Result<Vec<_>, _>>()?;
        RleMask::from_runs(w, h, runs)
    }
}

/// Tight box around the 1-pixels; empty for an all-zero mask.
pub fn mask_to_bbox(m: &RleMask) -> BBox {
    let w = m.grid_w as u64;
    if w == 0 {
        return BBox::EMPTY;
    }
    let (mut x0, mut y0, mut x1, mut y1) = (u64::MAX, u64::MAX, 0u64, 0u64);
    let mut any = false;
    let mut pos = 0u64;
    for (i, &r) in m.runs.iter().enumerate() {
        let r = r as u64;
        if i % 2 == 1 && r > 0 {
            let last = pos + r - 1;
            let (ra, ca) = (pos / w, pos % w);
            let (rb, cb) = (last / w, last % w);
            if ra == rb {
                x0 = x0.min(ca);
                x1 = x1.max(cb);
            } else {
                // The run wraps a row boundary, so it touches both grid edges.
                x0 = 0;
                x1 = w - 1;
            }
            y0 = y0.min(ra);
            y1 = y1.max(rb);
            any = true;
        }
        pos += r;
    }
    if !any {
        return BBox::EMPTY;
    }
    BBox::from_pixel_bounds(x0 as i64, y0 as i64, x1 as i64, y1 as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scan_bbox(bits: &[bool], w: usize) -> BBox {
        let mut b: Option<(i64, i64, i64, i64)> = None;
        for (i, &v) in bits.iter().enumerate() {
            if v {
                let (x, y) = ((i % w) as i64, (i / w) as i64);
                b = Some(match b {
                    None => (x, y, x, y),
                    Some((a, c, d, e)) => (a.min(x), c.min(y), d.max(x), e.max(y)),
                });
            }
        }
        match b {
            None => BBox::EMPTY,
            Some((a, c, d, e)) => BBox::from_pixel_bounds(a, c, d, e),
        }
    }

    #[test]
    fn mask_bbox_small_square() {
        let mut bits = vec![false; 64];
        for y in 2..=3 {
            for x in 2..=3 {
                bits[y * 8 + x] = true;
            }
        }
        let m = RleMask::from_bitmap(8, 8, &bits).unwrap();
        assert_eq!(mask_to_bbox(&m), BBox::new(2.5, 2.5, 2.0, 2.0));
        assert!(mask_to_bbox(&RleMask::zeros(8, 8)).empty);
    }

    #[test]
    fn mask_bbox_matches_scan_on_random_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (w, h) = (rng.random_range(1..20usize), rng.random_range(1..20usize));
            let density = rng.random_range(0.0..0.3);
            let bits: Vec<bool> = (0..w * h).map(|_| rng.random_bool(density)).collect();
            let m = RleMask::from_bitmap(w as u32, h as u32, &bits).unwrap();
            assert_eq!(mask_to_bbox(&m), scan_bbox(&bits, w));
        }
    }

    #[test]
    fn iou_examples() {
        let a = BBox::new(5.0, 5.0, 4.0, 3.0);
        assert_eq!(iou(&a, &a), 1.0);
        let (p, q) = (BBox::new(1.0, 1.0, 2.0, 2.0), BBox::new(2.0, 1.0, 2.0, 2.0));
        assert!((iou(&p, &q) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(iou(&p, &BBox::new(50.0, 50.0, 2.0, 2.0)), 0.0);
        assert_eq!(iou(&p, &BBox::EMPTY), 0.0);
        assert_eq!(iou(&BBox::EMPTY, &BBox::EMPTY), 0.0);
    }

    #[test]
    fn distances() {
        let a = BBox::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(center_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(center_distance(&a, &BBox::new(3.0, 4.0, 2.0, 2.0)).unwrap(), 5.0);
        assert_eq!(
            center_distance(&a, &BBox::EMPTY),
            Err(GeometryError::EmptyBox)
        );
        let gt = BBox::new(10.0, 10.0, 4.0, 8.0);
        assert_eq!(normalized_center_distance(&gt, &gt).unwrap(), 0.0);
        let moved = BBox::new(14.0, 10.0, 4.0, 8.0);
        assert_eq!(normalized_center_distance(&moved, &gt).unwrap(), 1.0);
        assert_eq!(
            normalized_center_distance(&moved, &BBox::EMPTY),
            Err(GeometryError::DegenerateReference)
        );
    }

    #[test]
    fn random_distance_rechecks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = BBox::new(
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
                rng.random_range(1.0..20.0),
                rng.random_range(1.0..20.0),
            );
            let b = BBox::new(
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
                rng.random_range(1.0..20.0),
                rng.random_range(1.0..20.0),
            );
            let d = ((a.cx - b.cx).powi(2) + (a.cy - b.cy).powi(2)).sqrt();
            assert!((center_distance(&a, &b).unwrap() - d).abs() < 1e-9);
            let n = (((a.cx - b.cx) / b.w).powi(2) + ((a.cy - b.cy) / b.h).powi(2)).sqrt();
            assert!((normalized_center_distance(&a, &b).unwrap() - n).abs() < 1e-9);
        }
    }

    #[test]
    fn top_left_conversion() {
        let b = BBox::from_top_left(10.0, 20.0, 30.0, 40.0);
        assert_eq!(b, BBox::new(24.5, 39.5, 30.0, 40.0));
        assert_eq!(b.to_top_left(), [10.0, 20.0, 30.0, 40.0]);
        assert_eq!(b.pixel_bounds(), Some((10, 20, 39, 59)));
    }

    #[test]
    fn rect_mask_matches_bitmap() {
        for &(x0, y0, x1, y1) in &[(0, 0, 9, 9), (2, 3, 5, 3), (0, 4, 9, 6), (9, 9, 9, 9), (-3, -3, 2, 2), (4, 4, 20, 20), (5, 5, 4, 4)] {
            let m = RleMask::from_rect(10, 10, x0, y0, x1, y1);
            let bits: Vec<bool> = (0..100)
                .map(|i| {
                    let (x, y) = (i % 10, i / 10);
                    x >= x0 && x <= x1 && y >= y0 && y <= y1
                })
                .collect();
            assert_eq!(m, RleMask::from_bitmap(10, 10, &bits).unwrap(), "{x0},{y0},{x1},{y1}");
        }
    }

    #[test]
    fn rle_text_and_errors() {
        let m: RleMask = "4 2: 1 2 5".parse().unwrap();
        assert_eq!(m.area(), 2);
        assert_eq!(m.to_string(), "4 2: 1 2 5");
        assert!(matches!(
            "4 2: 1 2 4".parse::<RleMask>(),
            Err(GeometryError::RunSumMismatch { expected: 8, actual: 7 })
        ));
        assert!("4 2 1 2 5".parse::<RleMask>().is_err());
        assert!("4 x: 8".parse::<RleMask>().is_err());
        // interior zero-length runs fold away
        let folded = RleMask::from_runs(4, 2, vec![1, 2, 0, 3, 2]).unwrap();
        assert_eq!(folded.runs(), &[1, 5, 2]);
        let ones = RleMask::from_runs(2, 2, vec![0, 4]).unwrap();
        assert_eq!(ones.runs(), &[0, 4]);
    }

    fn small_bitmap() -> impl Strategy<Value = (u32, u32, Vec<bool>)> {
        (1u32..12, 1u32..12).prop_flat_map(|(w, h)| {
            (Just(w), Just(h), proptest::collection::vec(any::<bool>(), (w * h) as usize))
        })
    }

    proptest! {
        #[test]
        fn rle_round_trip((w, h, bits) in small_bitmap()) {
            let m = RleMask::from_bitmap(w, h, &bits).unwrap();
            prop_assert_eq!(m.decode(), bits.clone());
            prop_assert_eq!(m.runs().iter().map(|&r| r as u64).sum::<u64>(), (w * h) as u64);
            prop_assert!(m.runs().iter().skip(1).all(|&r| r > 0));
            let again = RleMask::from_bitmap(w, h, &m.decode()).unwrap();
            prop_assert_eq!(&again, &m);
            let reparsed: RleMask = m.to_string().parse().unwrap();
            prop_assert_eq!(reparsed, m);
        }

        #[test]
        fn bbox_contains_every_pixel((w, h, bits) in small_bitmap()) {
            let m = RleMask::from_bitmap(w, h, &bits).unwrap();
            let b = mask_to_bbox(&m);
            for (i, &v) in bits.iter().enumerate() {
                if v {
                    let (x, y) = ((i as u32 % w) as f64, (i as u32 / w) as f64);
                    let [l, t, r, btm] = b.edges();
                    prop_assert!(x > l && x < r && y > t && y < btm);
                }
            }
        }

        #[test]
        fn iou_symmetric(a in (-20.0..20.0f64, -20.0..20.0f64, 0.0..10.0f64, 0.0..10.0f64),
                         b in (-20.0..20.0f64, -20.0..20.0f64, 0.0..10.0f64, 0.0..10.0f64)) {
            let a = BBox::new(a.0, a.1, a.2, a.3);
            let b = BBox::new(b.0, b.1, b.2, b.3);
            prop_assert_eq!(iou(&a, &b), iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&iou(&a, &b)));
        }
    }
}
