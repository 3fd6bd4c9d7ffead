//! Scene object spectra.
//!
//! A node's feature is a `K × η` matrix. Row `k` is the 2D DFT magnitude of
//! the category-`k` mask, averaged over all vertical frequencies, truncated
//! to the first `η` horizontal frequencies and passed through `log1p`. The
//! whole matrix is then divided by its largest entry. Because only
//! magnitudes are kept, a circular shift of the panorama (a change of
//! heading) leaves the feature unchanged.
//!
//! Instruction tokens get a synthetic reference spectrum: a single nonzero
//! row shaped like `|sinc(j/2 - η/4)|`, scaled by the category's median
//! panoramic box width and normalized the same way.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::env_model::{render_boxes, EnvGraph, PanoDims, PanoObservation};
use crate::fft::FftPlan;
use crate::{Error, Result};

/// Feature matrix, row-major with `rows` categories and `cols` frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SosFeature {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SosFeature {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SosFeature {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Shape {
                expected: (rows, cols),
                found: (values.len(), 1),
            });
        }
        Ok(SosFeature { rows, cols, values })
    }

    /// `(K, η)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.cols..(k + 1) * self.cols]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.cols..(k + 1) * self.cols]
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.cols + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(dot(&self.values, &self.values))
    }

    /// Divide by the largest entry when it is positive.
    pub fn max_normalized(mut self) -> Self {
        let m = self.max();
        if m > 0.0 {
            for v in &mut self.values {
                *v /= m;
            }
        }
        self
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for v in &mut self.values {
            *v *= factor;
        }
        self
    }

    pub fn check_shape(&self, other: &SosFeature) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.shape(),
                found: other.shape(),
            })
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine of two vectors; zero when either has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = libm::sqrt(dot(a, a));
    let nb = libm::sqrt(dot(b, b));
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

/// Cosine similarity of the flattened features.
pub fn cosine_similarity(a: &SosFeature, b: &SosFeature) -> Result<f64> {
    a.check_shape(b)?;
    Ok(cosine(&a.values, &b.values))
}

/// Largest admissible `η` for a panorama of width `width`.
pub fn max_eta(width: usize) -> usize {
    width / 2 + 1
}

fn check_eta(eta: usize, width: usize) -> Result<()> {
    if eta == 0 || eta > max_eta(width) {
        return Err(Error::Config(alloc::format!(
            "eta must lie in [1, {}] for panorama width {width}, got {eta}",
            max_eta(width)
        )));
    }
    Ok(())
}

/// Reusable transform plans for one panorama size.
#[derive(Debug, Clone)]
pub struct SosPlanner {
    dims: PanoDims,
    eta: usize,
    rows: FftPlan,
    cols: FftPlan,
}

impl SosPlanner {
    pub fn new(dims: PanoDims, eta: usize) -> Result<Self> {
        if dims.width == 0 || dims.height == 0 {
            return Err(Error::Config("panorama dimensions must be positive".into()));
        }
        check_eta(eta, dims.width)?;
        Ok(SosPlanner {
            dims,
            eta,
            rows: FftPlan::new(dims.width),
            cols: FftPlan::new(dims.height),
        })
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    /// Mean over vertical frequencies of `|DFT2(mask)|`, first `η` horizontal
    /// frequencies.
    pub fn pooled_magnitude(&self, mask: &[u8]) -> Vec<f64> {
        let (w, h) = (self.dims.width, self.dims.height);
        debug_assert_eq!(mask.len(), w * h);
        let mut pooled = vec![0.0; self.eta];
        if mask.iter().all(|&v| v == 0) {
            return pooled;
        }
        let mut buf: Vec<Complex64> = mask.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
        for row in buf.chunks_exact_mut(w) {
            self.rows.process(row);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); h];
        for (j, out) in pooled.iter_mut().enumerate() {
            for r in 0..h {
                column[r] = buf[r * w + j];
            }
            self.cols.process(&mut column);
            *out = column.iter().map(|c| c.norm()).sum::<f64>() / h as f64;
        }
        pooled
    }

    /// `log1p` of the pooled magnitudes for every category, before the
    /// final max-normalization.
    pub fn unnormalized(&self, obs: &PanoObservation) -> Result<SosFeature> {
        let dims = obs.dims();
        if dims != self.dims && !obs.masks.is_empty() {
            return Err(Error::Shape {
                expected: (self.dims.height, self.dims.width),
                found: (dims.height, dims.width),
            });
        }
        let k = obs.category_count();
        let mut feature = SosFeature::zeros(k, self.eta);
        for (c, mask) in obs.masks.iter().enumerate() {
            let pooled = self.pooled_magnitude(&mask.data);
            for (dst, p) in feature.row_mut(c).iter_mut().zip(pooled) {
                *dst = libm::log1p(p);
            }
        }
        Ok(feature)
    }

    pub fn compute(&self, obs: &PanoObservation) -> Result<SosFeature> {
        Ok(self.unnormalized(obs)?.max_normalized())
    }
}

/// Scene object spectrum of one panoramic observation.
pub fn compute_sos(obs: &PanoObservation, eta: usize) -> Result<SosFeature> {
    SosPlanner::new(obs.dims(), eta)?.compute(obs)
}

/// Normalized sinc, `sin(πx)/(πx)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        libm::sin(px) / px
    }
}

/// The unscaled reference row `|sinc(j/2 - η/4)|`, `j = 0..η`.
pub fn reference_profile(eta: usize) -> Vec<f64> {
    (0..eta)
        .map(|j| libm::fabs(sinc(j as f64 / 2.0 - eta as f64 / 4.0)))
        .collect()
}

/// Median box statistics for one category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryStat {
    /// Median panoramic box width, columns.
    pub width: f64,
    /// Median panoramic box height, rows.
    pub height: f64,
    pub samples: usize,
}

/// Per-category box statistics; `None` marks a category never observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub entries: Vec<Option<CategoryStat>>,
}

/// Lower median: element `(n - 1) / 2` of the sorted values.
pub fn lower_median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values[(values.len() - 1) / 2])
}

impl CategoryStats {
    /// Build from `(category, width, height)` samples.
    pub fn from_samples<I>(category_count: usize, samples: I) -> Self
    where
        I: IntoIterator<Item = (usize, f64, f64)>,
    {
        let mut widths: Vec<Vec<f64>> = vec![Vec::new(); category_count];
        let mut heights: Vec<Vec<f64>> = vec![Vec::new(); category_count];
        for (c, w, h) in samples {
            widths[c].push(w);
            heights[c].push(h);
        }
        let entries = widths
            .iter_mut()
            .zip(heights.iter_mut())
            .map(|(ws, hs)| {
                let samples = ws.len();
                Some(CategoryStat {
                    width: lower_median(ws)?,
                    height: lower_median(hs)?,
                    samples,
                })
            })
            .collect();
        CategoryStats { entries }
    }

    pub fn category_count(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, category: usize) -> Option<&CategoryStat> {
        self.entries.get(category).and_then(Option::as_ref)
    }

    pub fn is_absent(&self, category: usize) -> bool {
        self.get(category).is_none()
    }
}

/// Median rendered box sizes per category over every node of `env`.
pub fn collect_category_stats(env: &EnvGraph) -> CategoryStats {
    let samples = env.nodes().flat_map(|v| {
        render_boxes(env, v)
            .into_iter()
            .map(|b| (b.category, b.col_len as f64, b.height() as f64))
    });
    CategoryStats::from_samples(env.category_count(), samples)
}

/// Reference spectrum for one instruction token.
pub fn reference_sos(token: usize, stats: &CategoryStats, eta: usize, category_count: usize) -> Result<SosFeature> {
    if eta == 0 {
        return Err(Error::Config("eta must be positive".into()));
    }
    if token >= category_count {
        return Err(Error::MissingStats(token));
    }
    let lambda = stats.get(token).ok_or(Error::MissingStats(token))?.width;
    let mut feature = SosFeature::zeros(category_count, eta);
    for (dst, p) in feature.row_mut(token).iter_mut().zip(reference_profile(eta)) {
        *dst = lambda * p;
    }
    Ok(feature.max_normalized())
}

/// Axis-aligned box in front-view image pixels, `x` right and `y` down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Continuous panorama rectangle with `col0 < col1` inside `[0, W]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanoRect {
    pub col0: f64,
    pub col1: f64,
    pub row0: f64,
    pub row1: f64,
}

impl PanoRect {
    pub fn width(&self) -> f64 {
        self.col1 - self.col0
    }
}

/// A transformed box: one rectangle, or two when it crosses the seam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PanoRegion {
    Single(PanoRect),
    Split(PanoRect, PanoRect),
}

impl PanoRegion {
    pub fn total_width(&self) -> f64 {
        match self {
            PanoRegion::Single(r) => r.width(),
            PanoRegion::Split(a, b) => a.width() + b.width(),
        }
    }
}

/// Pinhole front-view camera looking along heading `heading`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontCamera {
    pub heading: f64,
    /// Horizontal field of view, radians, in `(0, π)`.
    pub fov: f64,
    pub width: usize,
    pub height: usize,
}

/// Map a front-view bounding box to panorama coordinates.
///
/// Column `x` is seen at heading `θ_c + atan((2x/W_f - 1) tan(fov/2))` and
/// lands on panorama column `θ/2π · W_p`. Rows use the elevation
/// `atan((1 - 2y/H_f) tan(vfov/2))` with `tan(vfov/2) = tan(fov/2) H_f/W_f`,
/// mapped linearly from `π/2` at row 0 to `-π/2` at row `H_p`. The result is
/// the rectangle spanned by the transformed corners.
pub fn frontview_to_pano_box(bbox: FrontBox, cam: FrontCamera, pano: PanoDims) -> Result<PanoRegion> {
    if !(cam.fov > 0.0 && cam.fov < PI) {
        return Err(Error::Config("field of view must lie in (0, π)".into()));
    }
    if cam.width == 0 || cam.height == 0 || pano.width == 0 || pano.height == 0 {
        return Err(Error::Config("image dimensions must be positive".into()));
    }
    let (wf, hf) = (cam.width as f64, cam.height as f64);
    let (x0, x1) = (bbox.x0.min(bbox.x1), bbox.x0.max(bbox.x1));
    let (y0, y1) = (bbox.y0.min(bbox.y1), bbox.y0.max(bbox.y1));
    if x0 < 0.0 || y0 < 0.0 || x1 > wf || y1 > hf {
        return Err(Error::BoxOutOfBounds);
    }
    if x1 - x0 <= 0.0 || y1 - y0 <= 0.0 {
        return Err(Error::DegenerateBox);
    }
    let wp = pano.width as f64;
    let hp = pano.height as f64;
    let t = libm::tan(cam.fov / 2.0);
    let tv = t * hf / wf;

    let angle = |x: f64| cam.heading + libm::atan((2.0 * x / wf - 1.0) * t);
    let elevation = |y: f64| libm::atan((1.0 - 2.0 * y / hf) * tv);
    let row = |phi: f64| (FRAC_PI_2 - phi) / PI * hp;

    let left = angle(x0);
    let span = (angle(x1) - left) / TAU * wp;
    let start = crate::wrap_angle(left) / TAU * wp;
    let row0 = row(elevation(y0));
    let row1 = row(elevation(y1));
    let end = start + span;
    if end <= wp {
        Ok(PanoRegion::Single(PanoRect {
            col0: start,
            col1: end,
            row0,
            row1,
        }))
    } else {
        Ok(PanoRegion::Split(
            PanoRect {
                col0: start,
                col1: wp,
                row0,
                row1,
            },
            PanoRect {
                col0: 0.0,
                col1: end - wp,
                row0,
                row1,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_model::{BinaryMask, PanoDims};

    fn obs_from(width: usize, height: usize, masks: Vec<Vec<u8>>) -> PanoObservation {
        PanoObservation {
            masks: masks
                .into_iter()
                .map(|data| BinaryMask { width, height, data })
                .collect(),
        }
    }

    #[test]
    fn empty_masks_give_zero_feature() {
        let obs = PanoObservation::empty(3, PanoDims { width: 8, height: 4 });
        let f = compute_sos(&obs, 5).unwrap();
        assert_eq!(f.shape(), (3, 5));
        assert!(f.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_row_is_dc_only() {
        let obs = obs_from(4, 1, vec![vec![1, 1, 1, 1], vec![0; 4]]);
        let planner = SosPlanner::new(PanoDims { width: 4, height: 1 }, 3).unwrap();
        let raw = planner.unnormalized(&obs).unwrap();
        assert!((raw.get(0, 0) - libm::log(5.0)).abs() < 1e-15);
        assert!(raw.get(0, 1).abs() < 1e-15 && raw.get(0, 2).abs() < 1e-15);
        let f = compute_sos(&obs, 3).unwrap();
        assert_eq!(f.row(0)[0], 1.0);
        assert!(f.row(0)[1].abs() < 1e-15);
    }

    #[test]
    fn eta_range_is_checked() {
        let obs = PanoObservation::empty(1, PanoDims { width: 8, height: 2 });
        assert!(matches!(compute_sos(&obs, 0), Err(Error::Config(_))));
        assert!(matches!(compute_sos(&obs, 6), Err(Error::Config(_))));
        assert!(compute_sos(&obs, 5).is_ok());
    }

    #[test]
    fn reference_peak_and_zero_crossing() {
        let stats = CategoryStats::from_samples(4, [(2, 10.0, 3.0)]);
        let profile = reference_profile(8);
        assert_eq!(profile[4], 1.0);
        assert!(profile[6].abs() < 1e-15);
        let f = reference_sos(2, &stats, 8, 4).unwrap();
        assert_eq!(f.get(2, 4), 1.0);
        assert!(f.get(2, 6).abs() < 1e-15);
        for k in [0, 1, 3] {
            assert!(f.row(k).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn reference_needs_stats() {
        let stats = CategoryStats::from_samples(4, [(2, 10.0, 3.0)]);
        assert_eq!(reference_sos(1, &stats, 8, 4), Err(Error::MissingStats(1)));
        assert!(stats.is_absent(3));
    }

    #[test]
    fn lambda_scale_cancels() {
        let a = CategoryStats::from_samples(3, [(1, 6.0, 2.0)]);
        let b = CategoryStats::from_samples(3, [(1, 12.0, 2.0)]);
        let fa = reference_sos(1, &a, 16, 3).unwrap();
        let fb = reference_sos(1, &b, 16, 3).unwrap();
        for (x, y) in fa.as_slice().iter().zip(fb.as_slice()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn medians() {
        assert_eq!(lower_median(&mut [3.0, 5.0, 7.0]), Some(5.0));
        assert_eq!(lower_median(&mut [100.0, 3.0, 7.0, 5.0]), Some(5.0));
        assert_eq!(lower_median(&mut []), None);
    }

    #[test]
    fn cosine_cases() {
        let a = SosFeature::from_values(2, 2, vec![1.0, 2.0, 0.0, 0.0]).unwrap();
        let b = SosFeature::from_values(2, 2, vec![0.0, 0.0, 3.0, 1.0]).unwrap();
        assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&a, &b).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&a, &SosFeature::zeros(2, 2)).unwrap(), 0.0);
        assert!(matches!(
            cosine_similarity(&a, &SosFeature::zeros(2, 3)),
            Err(Error::Shape { .. })
        ));
    }

    fn camera(heading: f64, fov: f64) -> FrontCamera {
        FrontCamera {
            heading,
            fov,
            width: 640,
            height: 480,
        }
    }

    #[test]
    fn centered_box_straddles_column_zero() {
        let pano = PanoDims {
            width: 2048,
            height: 512,
        };
        let bbox = FrontBox {
            x0: 300.0,
            y0: 200.0,
            x1: 340.0,
            y1: 280.0,
        };
        let PanoRegion::Split(right, left) = frontview_to_pano_box(bbox, camera(0.0, PI / 2.0), pano).unwrap()
        else {
            panic!("expected a split box");
        };
        assert_eq!(right.col1, 2048.0);
        assert_eq!(left.col0, 0.0);
        assert!((left.col1 - (2048.0 - right.col0)).abs() < 1e-9);
        // vertical symmetry about the horizon row
        assert!(((right.row0 + right.row1) / 2.0 - 256.0).abs() < 1e-9);
    }

    #[test]
    fn full_width_box_spans_a_quarter_turn() {
        let pano = PanoDims {
            width: 2048,
            height: 512,
        };
        let bbox = FrontBox {
            x0: 0.0,
            y0: 0.0,
            x1: 640.0,
            y1: 480.0,
        };
        let region = frontview_to_pano_box(bbox, camera(PI, PI / 2.0), pano).unwrap();
        let PanoRegion::Single(r) = region else {
            panic!("expected one rectangle")
        };
        assert!((r.width() - 512.0).abs() < 1e-9);
        assert!((r.col0 - 768.0).abs() < 1e-9);
    }

    #[test]
    fn box_near_seam_splits() {
        // heading 2π - 0.1: left edge x=200 at 2π - 0.1 + atan(-0.375) = 2π - 0.4588,
        // right edge x=600 at 2π - 0.1 + atan(0.875) = 2π + 0.6188
        let pano = PanoDims {
            width: 2048,
            height: 512,
        };
        let bbox = FrontBox {
            x0: 200.0,
            y0: 100.0,
            x1: 600.0,
            y1: 200.0,
        };
        let region = frontview_to_pano_box(bbox, camera(TAU - 0.1, PI / 2.0), pano).unwrap();
        let PanoRegion::Split(a, b) = region else {
            panic!("expected split")
        };
        let left_angle = TAU - 0.1 + libm::atan(-0.375);
        let right_angle = TAU - 0.1 + libm::atan(0.875);
        assert!((a.col0 - left_angle / TAU * 2048.0).abs() < 1e-9);
        assert!((b.col1 - (right_angle - TAU) / TAU * 2048.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_and_out_of_bounds_boxes() {
        let pano = PanoDims::default();
        let flat = FrontBox {
            x0: 10.0,
            y0: 10.0,
            x1: 10.0,
            y1: 50.0,
        };
        assert_eq!(frontview_to_pano_box(flat, camera(0.0, 1.0), pano), Err(Error::DegenerateBox));
        let outside = FrontBox {
            x0: 10.0,
            y0: 10.0,
            x1: 700.0,
            y1: 50.0,
        };
        assert_eq!(frontview_to_pano_box(outside, camera(0.0, 1.0), pano), Err(Error::BoxOutOfBounds));
        let ok = FrontBox {
            x0: 10.0,
            y0: 10.0,
            x1: 20.0,
            y1: 50.0,
        };
        assert!(matches!(frontview_to_pano_box(ok, camera(0.0, PI), pano), Err(Error::Config(_))));
    }
}
