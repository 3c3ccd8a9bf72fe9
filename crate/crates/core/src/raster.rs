//! 8-bit grayscale images and the few image operations the pipeline needs.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major pixels.
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} bytes for a {width}×{height} image",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn dimensions(&self) -> [usize; 2] {
        [self.width, self.height]
    }

    /// Bilinear sample at continuous coordinates (pixel centres at `i + 0.5`).
    /// Neighbours beyond the border are clamped.
    pub fn sample_bilinear(&self, u: f64, v: f64) -> f64 {
        let x = u - 0.5;
        let y = v - 0.5;
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let clamp_x = |i: f64| (i.max(0.0) as usize).min(self.width - 1);
        let clamp_y = |i: f64| (i.max(0.0) as usize).min(self.height - 1);
        let (xa, xb) = (clamp_x(x0), clamp_x(x0 + 1.0));
        let (ya, yb) = (clamp_y(y0), clamp_y(y0 + 1.0));
        let p = |x, y| self.get(x, y) as f64;
        (1.0 - fy) * ((1.0 - fx) * p(xa, ya) + fx * p(xb, ya)) + fy * ((1.0 - fx) * p(xa, yb) + fx * p(xb, yb))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len().max(1) as f64
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path)
            .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?
            .into_luma8();
        let (w, h) = img.dimensions();
        Self::from_raw(w as usize, h as usize, img.into_raw())
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        image::save_buffer(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))
    }
}

/// Mean absolute difference over the centred window covering `fraction` of
/// each side.
pub fn mean_abs_diff_central(a: &GrayImage, b: &GrayImage, fraction: f64) -> Result<f64> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.dimensions(),
            b.dimensions()
        )));
    }
    let window = |n: usize| {
        let m = ((n as f64) * (1.0 - fraction) / 2.0).round() as usize;
        m..n - m
    };
    let (xs, ys) = (window(a.width), window(a.height));
    let mut sum = 0u64;
    let mut count = 0u64;
    for y in ys {
        for x in xs.clone() {
            sum += (a.get(x, y) as i32 - b.get(x, y) as i32).unsigned_abs() as u64;
            count += 1;
        }
    }
    Ok(sum as f64 / count.max(1) as f64)
}

/// Otsu's threshold: pixels `> t` form the foreground.
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &v in &img.data {
        hist[v as usize] += 1;
    }
    let total = img.data.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &h)| i as f64 * h as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let (mut best, mut best_t) = (-1.0, 0u8);
    for t in 0..256 {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best {
            best = between;
            best_t = t as u8;
        }
    }
    best_t
}

/// Binary mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn threshold(img: &GrayImage, t: u8) -> Self {
        Self {
            width: img.width,
            height: img.height,
            data: img.data.iter().map(|&v| v > t).collect(),
        }
    }

    /// 3×3 square dilation (`value = true`) or erosion (`value = false`).
    /// Pixels outside the image count as background for dilation and as
    /// foreground for erosion, so erosion does not eat in from the border.
    fn morph3(&self, grow: bool) -> Self {
        let (w, h) = (self.width, self.height);
        // Separable 3x3; out-of-image neighbours take the identity value.
        let pad = !grow;
        let op = |a: bool, b: bool| if grow { a | b } else { a & b };
        let mut tmp = vec![pad; w * h];
        for (src, dst) in self.data.chunks_exact(w).zip(tmp.chunks_exact_mut(w)) {
            for x in 0..w {
                let l = if x > 0 { src[x - 1] } else { pad };
                let r = if x + 1 < w { src[x + 1] } else { pad };
                dst[x] = op(op(l, src[x]), r);
            }
        }
        let mut out = vec![pad; w * h];
        let blank = vec![pad; w];
        for y in 0..h {
            let up = if y > 0 { &tmp[(y - 1) * w..y * w] } else { &blank[..] };
            let down = if y + 1 < h { &tmp[(y + 1) * w..(y + 2) * w] } else { &blank[..] };
            let mid = &tmp[y * w..(y + 1) * w];
            for (x, o) in out[y * w..(y + 1) * w].iter_mut().enumerate() {
                *o = op(op(up[x], mid[x]), down[x]);
            }
        }
        Self {
            width: w,
            height: h,
            data: out,
        }
    }

    pub fn dilate(&self) -> Self {
        self.morph3(true)
    }

    pub fn erode(&self) -> Self {
        self.morph3(false)
    }

    /// `iterations` dilations followed by as many erosions.
    pub fn close(&self, iterations: usize) -> Self {
        let mut m = self.clone();
        for _ in 0..iterations {
            m = m.dilate();
        }
        for _ in 0..iterations {
            m = m.erode();
        }
        m
    }

    /// Half-open bounding box `[x0, y0, x1, y1)` of the foreground.
    pub fn bounding_box(&self) -> Option<[usize; 4]> {
        let mut bb: Option<[usize; 4]> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.data[y * self.width + x] {
                    let b = bb.get_or_insert([x, y, x + 1, y + 1]);
                    b[0] = b[0].min(x);
                    b[1] = b[1].min(y);
                    b[2] = b[2].max(x + 1);
                    b[3] = b[3].max(y + 1);
                }
            }
        }
        bb
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Intersection over union of two half-open boxes.
pub fn box_iou(a: [usize; 4], b: [usize; 4]) -> f64 {
    let area = |r: [usize; 4]| (r[2].saturating_sub(r[0]) * r[3].saturating_sub(r[1])) as f64;
    let inter = [a[0].max(b[0]), a[1].max(b[1]), a[2].min(b[2]), a[3].min(b[3])];
    let i = if inter[2] > inter[0] && inter[3] > inter[1] { area(inter) } else { 0.0 };
    let u = area(a) + area(b) - i;
    if u > 0.0 {
        i / u
    } else {
        0.0
    }
}
