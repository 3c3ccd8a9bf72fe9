//! Real-camera calibration, lookup-table remapping into the canonical
//! pinhole frame, and grid-search refinement of the real camera position.

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::{matrix, FisheyeCamera, PinholeCamera};
use crate::error::{Error, Result};
use crate::raster::{box_iou, otsu_threshold, GrayImage, Mask};

pub const CALIBRATION_VERSION: u32 = 1;
/// Largest allowed self-test reprojection error (px).
pub const SELF_TEST_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfTestPoint {
    /// Gel-frame point (mm).
    pub point: [f64; 3],
    /// Expected fisheye pixel.
    pub pixel: [f64; 2],
}

/// On-disk calibration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    pub version: u32,
    pub camera: FisheyeCamera,
    #[serde(default)]
    pub self_test: Vec<SelfTestPoint>,
}

impl CalibrationFile {
    /// Wraps `camera` with self-test records computed from `points`.
    pub fn with_self_test(camera: FisheyeCamera, points: &[[f64; 3]]) -> Result<Self> {
        let self_test = points
            .iter()
            .map(|&p| {
                Ok(SelfTestPoint {
                    point: p,
                    pixel: camera.project(camera.gel_to_camera(p))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            version: CALIBRATION_VERSION,
            camera,
            self_test,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CALIBRATION_VERSION {
            return Err(Error::VersionMismatch {
                found: self.version,
                expected: CALIBRATION_VERSION,
            });
        }
        self.camera.validate()?;
        for (k, rec) in self.self_test.iter().enumerate() {
            let got = self
                .camera
                .project(self.camera.gel_to_camera(rec.point))
                .map_err(|e| Error::CalibrationInvalid(format!("self-test point {k}: {e}")))?;
            let err = (got[0] - rec.pixel[0]).hypot(got[1] - rec.pixel[1]);
            if !(err <= SELF_TEST_TOLERANCE) {
                return Err(Error::CalibrationInvalid(format!(
                    "self-test point {k} reprojects {err:.4} px from its record (limit {SELF_TEST_TOLERANCE} px)"
                )));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| Error::parse("calibration", e))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::parse("calibration", e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// Reads and validates a calibration file.
pub fn load_calibration(path: &Path) -> Result<FisheyeCamera> {
    Ok(CalibrationFile::load(path)?.camera)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRig {
    pub pinhole: PinholeCamera,
    pub fisheye: FisheyeCamera,
    /// Gel-frame z of the plane every pixel is assumed to lie on (mm).
    pub remap_plane_z: f64,
}

impl CameraRig {
    pub fn new(pinhole: PinholeCamera, fisheye: FisheyeCamera) -> Self {
        Self {
            pinhole,
            fisheye,
            remap_plane_z: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pinhole.validate()?;
        self.fisheye.validate()
    }

    /// Source pixel in the real image for pinhole pixel coordinates `p`.
    pub fn source_pixel(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        PlaneMap::new(self).source_pixel(p)
    }

    /// Same rig with the pinhole image grown by `margin` px on every side.
    pub fn with_canvas_margin(&self, margin: usize) -> Self {
        let mut rig = *self;
        rig.pinhole.center = [self.pinhole.center[0] + margin as f64, self.pinhole.center[1] + margin as f64];
        rig.pinhole.resolution = [
            self.pinhole.resolution[0] + 2 * margin,
            self.pinhole.resolution[1] + 2 * margin,
        ];
        rig
    }
}

/// Pinhole pixel to real-camera point through the remap plane, folded into
/// one 3x3 map so the per-pixel cost is a few multiply-adds.
struct PlaneMap<'a> {
    fisheye: &'a FisheyeCamera,
    /// Camera-frame direction per unit ray parameter, applied to `(u, v, 1)`.
    m: Matrix3<f64>,
    offset: Vector3<f64>,
    /// Gel-frame z growth of the ray per unit parameter.
    dz: Vector3<f64>,
    k: f64,
}

impl<'a> PlaneMap<'a> {
    fn new(rig: &'a CameraRig) -> Self {
        let ph = &rig.pinhole;
        let r = matrix(&ph.rotation_gp);
        let t = Vector3::from(ph.translation_gp);
        let kinv = Matrix3::new(
            1.0 / ph.focal, 0.0, -ph.center[0] / ph.focal,
            0.0, 1.0 / ph.focal, -ph.center[1] / ph.focal,
            0.0, 0.0, 1.0,
        );
        let rc = matrix(&rig.fisheye.rotation_gc);
        let rt = r.transpose();
        Self {
            fisheye: &rig.fisheye,
            m: rc * rt * kinv,
            offset: Vector3::from(rig.fisheye.translation_gc) - rc * rt * t,
            dz: (rt * kinv).row(2).transpose(),
            k: rig.remap_plane_z + (rt * t).z,
        }
    }

    #[inline]
    fn source_pixel(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let h = Vector3::new(p[0], p[1], 1.0);
        let dz = self.dz.dot(&h);
        if dz.abs() < 1e-15 {
            return None;
        }
        let lambda = self.k / dz;
        if !(lambda > 0.0) {
            return None;
        }
        let c = lambda * (self.m * h) + self.offset;
        let q = self.fisheye.project([c.x, c.y, c.z]).ok()?;
        self.fisheye.in_frame(q).then_some(q)
    }
}

/// Per-pinhole-pixel source coordinates with precomputed bilinear taps.
#[derive(Debug, Clone, PartialEq)]
pub struct RemapTable {
    pub width: usize,
    pub height: usize,
    /// Source width and height the table was built for.
    pub source: [usize; 2],
    /// Continuous source coordinates (pixel centres at `i + 0.5`).
    pub coords: Vec<[f64; 2]>,
    pub valid: Vec<bool>,
    taps: Vec<[u32; 4]>,
    weights: Vec<[f32; 4]>,
}

impl RemapTable {
    pub fn from_coords(
        width: usize,
        height: usize,
        source: [usize; 2],
        coords: Vec<[f64; 2]>,
        valid: Vec<bool>,
    ) -> Result<Self> {
        if coords.len() != width * height || valid.len() != width * height {
            return Err(Error::ShapeMismatch("remap table size does not match its resolution".into()));
        }
        let [sw, sh] = source;
        let mut taps = Vec::with_capacity(coords.len());
        let mut weights = Vec::with_capacity(coords.len());
        for (c, &ok) in coords.iter().zip(&valid) {
            if !ok {
                taps.push([0; 4]);
                weights.push([0.0; 4]);
                continue;
            }
            let x = c[0] - 0.5;
            let y = c[1] - 0.5;
            let (x0, y0) = (x.floor(), y.floor());
            let (fx, fy) = (x - x0, y - y0);
            let cx = |i: f64| (i.max(0.0) as usize).min(sw - 1);
            let cy = |i: f64| (i.max(0.0) as usize).min(sh - 1);
            let (xa, xb, ya, yb) = (cx(x0), cx(x0 + 1.0), cy(y0), cy(y0 + 1.0));
            taps.push([
                (ya * sw + xa) as u32,
                (ya * sw + xb) as u32,
                (yb * sw + xa) as u32,
                (yb * sw + xb) as u32,
            ]);
            weights.push([
                ((1.0 - fx) * (1.0 - fy)) as f32,
                (fx * (1.0 - fy)) as f32,
                ((1.0 - fx) * fy) as f32,
                (fx * fy) as f32,
            ]);
        }
        Ok(Self {
            width,
            height,
            source,
            coords,
            valid,
            taps,
            weights,
        })
    }

    pub fn valid_fraction(&self) -> f64 {
        self.valid.iter().filter(|&&b| b).count() as f64 / self.valid.len().max(1) as f64
    }
}

pub fn build_remap_table(rig: &CameraRig) -> Result<RemapTable> {
    rig.validate()?;
    let [w, h] = rig.pinhole.resolution;
    let mut coords = Vec::with_capacity(w * h);
    let mut valid = Vec::with_capacity(w * h);
    let map = PlaneMap::new(rig);
    for v in 0..h {
        for u in 0..w {
            match map.source_pixel([u as f64 + 0.5, v as f64 + 0.5]) {
                Some(q) => {
                    coords.push(q);
                    valid.push(true);
                }
                None => {
                    coords.push([f64::NAN; 2]);
                    valid.push(false);
                }
            }
        }
    }
    RemapTable::from_coords(w, h, rig.fisheye.resolution, coords, valid)
}

/// Bilinear resampling through `table`; masked pixels are black.
pub fn remap_image(real: &GrayImage, table: &RemapTable) -> Result<GrayImage> {
    if real.dimensions() != table.source {
        return Err(Error::ShapeMismatch(format!(
            "image is {:?} but the remap table expects {:?}",
            real.dimensions(),
            table.source
        )));
    }
    let src = &real.data;
    let data = table
        .taps
        .par_iter()
        .zip(&table.weights)
        .map(|(t, w)| {
            let v = w[0] * src[t[0] as usize] as f32
                + w[1] * src[t[1] as usize] as f32
                + w[2] * src[t[2] as usize] as f32
                + w[3] * src[t[3] as usize] as f32;
            v.round() as u8
        })
        .collect();
    GrayImage::from_raw(table.width, table.height, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpec {
    /// Half-width of the per-axis search interval (mm).
    pub range: f64,
    pub step: f64,
    pub close_iterations: usize,
    /// Extra canvas around the pinhole frame so the particle box can grow
    /// past the frame (px).
    pub margin: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            range: 0.5,
            step: 0.05,
            close_iterations: 2,
            margin: 40,
        }
    }
}

impl SearchSpec {
    pub fn offsets(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.range >= 0.0) {
            return Err(Error::InvalidParameter(format!("bad search grid {self:?}")));
        }
        let n = (self.range / self.step + 1e-9).floor() as i64;
        Ok((-n..=n).map(|k| k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    /// Offset added to the calibrated translation (mm).
    pub offset: [f64; 3],
    pub translation_gc: [f64; 3],
    pub iou: f64,
    pub candidates: usize,
}

/// Box-vs-frame score of one candidate rig; `coverage` is the binarized
/// rest image. The resampled coverage is cut at one half, which puts the
/// mask edge on the silhouette edge however blurred the lens is.
fn candidate_iou(coverage: &GrayImage, rig: &CameraRig, spec: &SearchSpec) -> Result<Option<f64>> {
    let canvas = rig.with_canvas_margin(spec.margin);
    let table = build_remap_table(&canvas)?;
    let img = remap_image(coverage, &table)?;
    let mask = Mask::threshold(&img, 127).close(spec.close_iterations);
    let Some(bb) = mask.bounding_box() else {
        return Ok(None);
    };
    let m = spec.margin;
    let [w, h] = rig.pinhole.resolution;
    Ok(Some(box_iou(bb, [m, m, m + w, m + h])))
}

/// Exhaustive search over offsets of the real-camera translation that best
/// fits the particle bounding box to the pinhole frame.
///
/// The rest image is reduced to a particle/background mask once, with Otsu's
/// threshold, so the score does not depend on particle colours.
pub fn refine_translation(rest: &GrayImage, rig: &CameraRig, spec: &SearchSpec) -> Result<Refinement> {
    rig.validate()?;
    if rest.data.iter().all(|&v| v == rest.data[0]) {
        return Err(Error::RefinementFailed("rest image has no visible particles".into()));
    }
    let axis = spec.offsets()?;
    let t = otsu_threshold(rest);
    let coverage = GrayImage::from_raw(
        rest.width,
        rest.height,
        rest.data.iter().map(|&v| if v > t { 255 } else { 0 }).collect(),
    )?;
    let mut candidates = Vec::with_capacity(axis.len().pow(3));
    for &dz in &axis {
        for &dy in &axis {
            for &dx in &axis {
                candidates.push([dx, dy, dz]);
            }
        }
    }
    let scores: Vec<Option<f64>> = candidates
        .par_iter()
        .map(|d| {
            let mut r = *rig;
            for c in 0..3 {
                r.fisheye.translation_gc[c] += d[c];
            }
            candidate_iou(&coverage, &r, spec)
        })
        .collect::<Result<_>>()?;

    let norm = |d: &[f64; 3]| d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.iter().enumerate() {
        let Some(s) = *s else { continue };
        best = match best {
            None => Some((k, s)),
            Some((bk, bs)) => {
                if s > bs || (s == bs && norm(&candidates[k]) < norm(&candidates[bk])) {
                    Some((k, s))
                } else {
                    Some((bk, bs))
                }
            }
        };
    }
    let (k, iou) = best.ok_or_else(|| Error::RefinementFailed("no particles detected for any candidate".into()))?;
    let offset = candidates[k];
    let t = rig.fisheye.translation_gc;
    Ok(Refinement {
        offset,
        translation_gc: [t[0] + offset[0], t[1] + offset[1], t[2] + offset[2]],
        iou,
        candidates: candidates.len(),
    })
}
