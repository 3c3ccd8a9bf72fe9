//! Coarse-to-fine inverse-search patch flow.
//!
//! Each pyramid level tracks square patches of the rest image with
//! inverse-compositional Lucas–Kanade on a translation warp, then
//! densifies the patch flows bilinearly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    pub patch: usize,
    pub stride: usize,
    pub levels: usize,
    pub iterations: usize,
    /// Smallest Hessian eigenvalue (intensity² units, intensities in [0, 1])
    /// for a patch to be tracked.
    pub min_eigenvalue: f32,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            patch: 8,
            stride: 4,
            levels: 4,
            iterations: 16,
            min_eigenvalue: 1e-3,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if self.patch < 2 || self.stride == 0 || self.levels == 0 || self.iterations == 0 {
            return Err(Error::InvalidParameter(format!("bad flow parameters {self:?}")));
        }
        Ok(())
    }
}

/// Dense two-channel flow, rest → deformed, in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub u: Vec<f32>,
    pub v: Vec<f32>,
    /// Set when the input carried no trackable texture.
    pub low_confidence: bool,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            u: vec![0.0; width * height],
            v: vec![0.0; width * height],
            low_confidence: false,
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> [f32; 2] {
        let k = y * self.width + x;
        [self.u[k], self.v[k]]
    }
}

#[derive(Clone)]
struct Plane {
    w: usize,
    h: usize,
    data: Vec<f32>,
}

impl Plane {
    fn from_image(img: &GrayImage) -> Self {
        Self {
            w: img.width,
            h: img.height,
            data: img.data.iter().map(|&v| v as f32 / 255.0).collect(),
        }
    }

    #[inline]
    fn px(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.w + x]
    }

    /// Bilinear lookup with pixel `i` at coordinate `i`; clamped border.
    #[inline]
    fn sample(&self, x: f32, y: f32) -> f32 {
        let xc = x.clamp(0.0, (self.w - 1) as f32);
        let yc = y.clamp(0.0, (self.h - 1) as f32);
        let x0 = (xc.floor() as usize).min(self.w.saturating_sub(2));
        let y0 = (yc.floor() as usize).min(self.h.saturating_sub(2));
        let x1 = (x0 + 1).min(self.w - 1);
        let y1 = (y0 + 1).min(self.h - 1);
        let fx = xc - x0 as f32;
        let fy = yc - y0 as f32;
        let a = self.px(x0, y0) + fx * (self.px(x1, y0) - self.px(x0, y0));
        let b = self.px(x0, y1) + fx * (self.px(x1, y1) - self.px(x0, y1));
        a + fy * (b - a)
    }

    fn downsample(&self) -> Self {
        let (w, h) = (self.w / 2, self.h / 2);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let s = self.px(2 * x, 2 * y)
                    + self.px(2 * x + 1, 2 * y)
                    + self.px(2 * x, 2 * y + 1)
                    + self.px(2 * x + 1, 2 * y + 1);
                data.push(0.25 * s);
            }
        }
        Self { w, h, data }
    }

    /// Central-difference gradients (one-sided at the border).
    fn gradients(&self) -> (Vec<f32>, Vec<f32>) {
        let mut gx = vec![0.0; self.w * self.h];
        let mut gy = vec![0.0; self.w * self.h];
        for y in 0..self.h {
            for x in 0..self.w {
                let (xa, xb) = (x.saturating_sub(1), (x + 1).min(self.w - 1));
                let (ya, yb) = (y.saturating_sub(1), (y + 1).min(self.h - 1));
                let k = y * self.w + x;
                if xb > xa {
                    gx[k] = (self.px(xb, y) - self.px(xa, y)) / (xb - xa) as f32;
                }
                if yb > ya {
                    gy[k] = (self.px(x, yb) - self.px(x, ya)) / (yb - ya) as f32;
                }
            }
        }
        (gx, gy)
    }
}

fn patch_origins(len: usize, patch: usize, stride: usize) -> Vec<usize> {
    if len < patch {
        return Vec::new();
    }
    let mut v: Vec<usize> = (0..=len - patch).step_by(stride).collect();
    if *v.last().unwrap() != len - patch {
        v.push(len - patch);
    }
    v
}

/// Flow that maps `rest` onto `deformed`.
pub fn dense_flow(rest: &GrayImage, deformed: &GrayImage, params: &FlowParams) -> Result<FlowField> {
    params.validate()?;
    if rest.dimensions() != deformed.dimensions() {
        return Err(Error::ShapeMismatch(format!(
            "flow inputs {:?} and {:?} differ",
            rest.dimensions(),
            deformed.dimensions()
        )));
    }
    let (w, h) = (rest.width, rest.height);
    let flat = |img: &GrayImage| img.data.iter().all(|&v| v == img.data[0]);
    if flat(rest) || flat(deformed) {
        let mut f = FlowField::zeros(w, h);
        f.low_confidence = true;
        return Ok(f);
    }

    let mut pyr0 = vec![Plane::from_image(rest)];
    let mut pyr1 = vec![Plane::from_image(deformed)];
    while pyr0.len() < params.levels {
        let last = pyr0.last().unwrap();
        if last.w / 2 < params.patch || last.h / 2 < params.patch {
            break;
        }
        let (a, b) = (last.downsample(), pyr1.last().unwrap().downsample());
        pyr0.push(a);
        pyr1.push(b);
    }

    let mut flow: Option<(Vec<f32>, Vec<f32>, usize, usize)> = None;
    let mut tracked_any = false;
    for level in (0..pyr0.len()).rev() {
        let (i0, i1) = (&pyr0[level], &pyr1[level]);
        let (init_u, init_v) = match &flow {
            None => (vec![0.0; i0.w * i0.h], vec![0.0; i0.w * i0.h]),
            Some((u, v, pw, ph)) => upsample(u, v, *pw, *ph, i0.w, i0.h),
        };
        let (u, v, any) = track_level(i0, i1, &init_u, &init_v, params);
        tracked_any |= any;
        flow = Some((u, v, i0.w, i0.h));
    }
    let (u, v, _, _) = flow.expect("at least one level");
    Ok(FlowField {
        width: w,
        height: h,
        u,
        v,
        low_confidence: !tracked_any,
    })
}

fn upsample(u: &[f32], v: &[f32], pw: usize, ph: usize, w: usize, h: usize) -> (Vec<f32>, Vec<f32>) {
    let pu = Plane { w: pw, h: ph, data: u.to_vec() };
    let pv = Plane { w: pw, h: ph, data: v.to_vec() };
    let (sx, sy) = (pw as f32 / w as f32, ph as f32 / h as f32);
    let mut ou = Vec::with_capacity(w * h);
    let mut ov = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let qx = (x as f32 + 0.5) * sx - 0.5;
            let qy = (y as f32 + 0.5) * sy - 0.5;
            ou.push(pu.sample(qx, qy) / sx);
            ov.push(pv.sample(qx, qy) / sy);
        }
    }
    (ou, ov)
}

fn track_level(
    i0: &Plane,
    i1: &Plane,
    init_u: &[f32],
    init_v: &[f32],
    params: &FlowParams,
) -> (Vec<f32>, Vec<f32>, bool) {
    let ps = params.patch;
    let xs = patch_origins(i0.w, ps, params.stride);
    let ys = patch_origins(i0.h, ps, params.stride);
    if xs.is_empty() || ys.is_empty() {
        return (init_u.to_vec(), init_v.to_vec(), false);
    }
    let (gx, gy) = i0.gradients();
    let half = (ps as f32 - 1.0) / 2.0;
    let mut pflow = vec![[0.0f32; 2]; xs.len() * ys.len()];
    let mut valid = vec![false; xs.len() * ys.len()];

    for (pj, &y0) in ys.iter().enumerate() {
        for (pi, &x0) in xs.iter().enumerate() {
            let (mut hxx, mut hxy, mut hyy) = (0.0f32, 0.0f32, 0.0f32);
            for y in y0..y0 + ps {
                for x in x0..x0 + ps {
                    let k = y * i0.w + x;
                    hxx += gx[k] * gx[k];
                    hxy += gx[k] * gy[k];
                    hyy += gy[k] * gy[k];
                }
            }
            let tr = 0.5 * (hxx + hyy);
            let lmin = tr - (0.25 * (hxx - hyy) * (hxx - hyy) + hxy * hxy).sqrt();
            let c = ((y0 as f32 + half) as usize) * i0.w + (x0 as f32 + half) as usize;
            let start = [init_u[c], init_v[c]];
            if !(lmin > params.min_eigenvalue) {
                continue;
            }
            let det = hxx * hyy - hxy * hxy;
            let mut f = start;
            let mut ok = true;
            for _ in 0..params.iterations {
                let (mut bx, mut by) = (0.0f32, 0.0f32);
                for y in y0..y0 + ps {
                    for x in x0..x0 + ps {
                        let k = y * i0.w + x;
                        let e = i1.sample(x as f32 + f[0], y as f32 + f[1]) - i0.data[k];
                        bx += gx[k] * e;
                        by += gy[k] * e;
                    }
                }
                let dx = (hyy * bx - hxy * by) / det;
                let dy = (hxx * by - hxy * bx) / det;
                f[0] -= dx;
                f[1] -= dy;
                if !(f[0].is_finite() && f[1].is_finite())
                    || (f[0] - start[0]).abs() > ps as f32
                    || (f[1] - start[1]).abs() > ps as f32
                {
                    ok = false;
                    break;
                }
                if dx * dx + dy * dy < 1e-6 {
                    break;
                }
            }
            if ok {
                pflow[pj * xs.len() + pi] = f;
                valid[pj * xs.len() + pi] = true;
            }
        }
    }

    // Bilinear densification over the patch-centre grid; untracked patches
    // carry no weight and pixels without support keep the coarser estimate.
    let cx: Vec<f32> = xs.iter().map(|&x| x as f32 + half).collect();
    let cy: Vec<f32> = ys.iter().map(|&y| y as f32 + half).collect();
    let bracket = |c: &[f32], p: f32| -> (usize, usize, f32) {
        if p <= c[0] {
            return (0, 0, 0.0);
        }
        if p >= c[c.len() - 1] {
            return (c.len() - 1, c.len() - 1, 0.0);
        }
        let i = c.partition_point(|&v| v <= p) - 1;
        (i, i + 1, (p - c[i]) / (c[i + 1] - c[i]))
    };
    let mut u = init_u.to_vec();
    let mut v = init_v.to_vec();
    let any = valid.iter().any(|&b| b);
    for y in 0..i0.h {
        let (ja, jb, ty) = bracket(&cy, y as f32);
        for x in 0..i0.w {
            let (ia, ib, tx) = bracket(&cx, x as f32);
            let corners = [
                (ia, ja, (1.0 - tx) * (1.0 - ty)),
                (ib, ja, tx * (1.0 - ty)),
                (ia, jb, (1.0 - tx) * ty),
                (ib, jb, tx * ty),
            ];
            let (mut su, mut sv, mut sw) = (0.0f32, 0.0f32, 0.0f32);
            for (i, j, wgt) in corners {
                let k = j * xs.len() + i;
                if valid[k] && wgt > 0.0 {
                    su += wgt * pflow[k][0];
                    sv += wgt * pflow[k][1];
                    sw += wgt;
                }
            }
            if sw > 1e-6 {
                u[y * i0.w + x] = su / sw;
                v[y * i0.w + x] = sv / sw;
            }
        }
    }
    (u, v, any)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origins_cover_the_image() {
        assert_eq!(patch_origins(20, 8, 4), vec![0, 4, 8, 12]);
        assert_eq!(patch_origins(21, 8, 4), vec![0, 4, 8, 12, 13]);
        assert!(patch_origins(5, 8, 4).is_empty());
    }

    #[test]
    fn black_input_is_low_confidence() {
        let img = GrayImage::new(64, 64);
        let f = dense_flow(&img, &img, &FlowParams::default()).unwrap();
        assert!(f.low_confidence);
        assert!(f.u.iter().chain(&f.v).all(|&x| x == 0.0));
    }
}
