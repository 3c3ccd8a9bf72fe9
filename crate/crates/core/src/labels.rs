//! 3×20×20 force-distribution labels and the evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::contact::NodalForce;
use crate::error::{Error, Result};

pub const LABEL_SIDE: usize = 20;
pub const LABEL_CHANNELS: usize = 3;
pub const LABEL_LEN: usize = LABEL_CHANNELS * LABEL_SIDE * LABEL_SIDE;
/// Side of the sensing surface (mm).
pub const SURFACE_MM: f64 = 30.0;
pub const BIN_MM: f64 = SURFACE_MM / LABEL_SIDE as f64;

/// Binned surface forces (N), indexed `[channel][iy][ix]`, channels x, y, z.
/// Compression is negative z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceGrid {
    pub data: Vec<f64>,
}

impl Default for ForceGrid {
    fn default() -> Self {
        Self::zeros()
    }
}

impl ForceGrid {
    pub fn zeros() -> Self {
        Self { data: vec![0.0; LABEL_LEN] }
    }

    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        if data.len() != LABEL_LEN {
            return Err(Error::ShapeMismatch(format!(
                "force grid needs {LABEL_LEN} values, got {}",
                data.len()
            )));
        }
        Ok(Self { data })
    }

    #[inline]
    pub fn index(channel: usize, ix: usize, iy: usize) -> usize {
        (channel * LABEL_SIDE + iy) * LABEL_SIDE + ix
    }

    #[inline]
    pub fn get(&self, channel: usize, ix: usize, iy: usize) -> f64 {
        self.data[Self::index(channel, ix, iy)]
    }

    #[inline]
    pub fn add(&mut self, channel: usize, ix: usize, iy: usize, v: f64) {
        self.data[Self::index(channel, ix, iy)] += v;
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * LABEL_SIDE * LABEL_SIDE..(c + 1) * LABEL_SIDE * LABEL_SIDE]
    }

    /// Mirrors bins in x and negates the x channel.
    pub fn flip_horizontal(&self) -> Self {
        let mut out = Self::zeros();
        for c in 0..LABEL_CHANNELS {
            for iy in 0..LABEL_SIDE {
                for ix in 0..LABEL_SIDE {
                    let v = self.get(c, LABEL_SIDE - 1 - ix, iy);
                    out.data[Self::index(c, ix, iy)] = if c == 0 { -v } else { v };
                }
            }
        }
        out
    }

    /// Mirrors bins in y and negates the y channel.
    pub fn flip_vertical(&self) -> Self {
        let mut out = Self::zeros();
        for c in 0..LABEL_CHANNELS {
            for iy in 0..LABEL_SIDE {
                for ix in 0..LABEL_SIDE {
                    let v = self.get(c, ix, LABEL_SIDE - 1 - iy);
                    out.data[Self::index(c, ix, iy)] = if c == 1 { -v } else { v };
                }
            }
        }
        out
    }
}

/// Bin of a coordinate on `[0, 30]`; interior edges go to the higher bin and
/// the far boundary to the last bin.
fn bin_of(x: f64) -> usize {
    ((x / BIN_MM).floor() as usize).min(LABEL_SIDE - 1)
}

pub fn bin_forces(nodal_forces: &[NodalForce]) -> Result<ForceGrid> {
    let mut grid = ForceGrid::zeros();
    for (index, nf) in nodal_forces.iter().enumerate() {
        let [x, y] = nf.position;
        if !(0.0..=SURFACE_MM).contains(&x) || !(0.0..=SURFACE_MM).contains(&y) {
            return Err(Error::NodeOutsideSurface { index, x, y });
        }
        let (ix, iy) = (bin_of(x), bin_of(y));
        for c in 0..3 {
            grid.add(c, ix, iy, nf.force[c]);
        }
    }
    Ok(grid)
}

/// Component-wise sum over all bins.
///
/// Bins are added in mirror-image groups of four, so a flipped grid sums to
/// exactly the mirrored totals.
pub fn total_force(grid: &ForceGrid) -> [f64; 3] {
    const H: usize = LABEL_SIDE / 2;
    let m = LABEL_SIDE - 1;
    let mut t = [0.0; 3];
    for (c, tc) in t.iter_mut().enumerate() {
        for iy in 0..H {
            for ix in 0..H {
                let low = grid.get(c, ix, iy) + grid.get(c, m - ix, iy);
                let high = grid.get(c, ix, m - iy) + grid.get(c, m - ix, m - iy);
                *tc += low + high;
            }
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Pooled over every bin of every sample, per channel (N).
    pub rmse: [f64; 3],
    /// Over per-sample total forces (N).
    pub rmset: [f64; 3],
    pub mae_bin: [f64; 3],
    pub sdae_bin: [f64; 3],
    pub mae_total: [f64; 3],
    pub sdae_total: [f64; 3],
    /// Range of the ground-truth total force per channel (N).
    pub force_ranges: [[f64; 2]; 3],
    pub samples: usize,
    /// How RMSE is aggregated.
    pub rmse_mode: String,
    /// Standard deviations divide by the count, not count − 1.
    pub std_mode: String,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn evaluate(predictions: &[ForceGrid], truths: &[ForceGrid]) -> Result<MetricsReport> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch(format!(
            "{} predictions for {} ground-truth grids",
            predictions.len(),
            truths.len()
        )));
    }
    if truths.is_empty() {
        return Err(Error::LengthMismatch("no samples to evaluate".into()));
    }
    let mut report = MetricsReport {
        rmse: [0.0; 3],
        rmset: [0.0; 3],
        mae_bin: [0.0; 3],
        sdae_bin: [0.0; 3],
        mae_total: [0.0; 3],
        sdae_total: [0.0; 3],
        force_ranges: [[f64::INFINITY, f64::NEG_INFINITY]; 3],
        samples: truths.len(),
        rmse_mode: "pooled".into(),
        std_mode: "population".into(),
    };
    for c in 0..3 {
        let mut bin_abs = Vec::with_capacity(truths.len() * LABEL_SIDE * LABEL_SIDE);
        let mut total_abs = Vec::with_capacity(truths.len());
        let mut sq = 0.0;
        for (p, t) in predictions.iter().zip(truths) {
            for (a, b) in p.channel(c).iter().zip(t.channel(c)) {
                let e = a - b;
                sq += e * e;
                bin_abs.push(e.abs());
            }
            let tt = total_force(t)[c];
            let pt = total_force(p)[c];
            total_abs.push((pt - tt).abs());
            let r = &mut report.force_ranges[c];
            r[0] = r[0].min(tt);
            r[1] = r[1].max(tt);
        }
        report.rmse[c] = (sq / bin_abs.len() as f64).sqrt();
        report.rmset[c] = (total_abs.iter().map(|e| e * e).sum::<f64>() / total_abs.len() as f64).sqrt();
        (report.mae_bin[c], report.sdae_bin[c]) = mean_std(&bin_abs);
        (report.mae_total[c], report.sdae_total[c]) = mean_std(&total_abs);
    }
    Ok(report)
}

impl MetricsReport {
    /// Plain-text table: one row per metric, one column per component.
    pub fn to_table(&self) -> String {
        let mut s = format!("{:<12}{:>14}{:>14}{:>14}\n", "metric [N]", "x", "y", "z");
        let rows: [(&str, [f64; 3]); 6] = [
            ("RMSE", self.rmse),
            ("RMSET", self.rmset),
            ("MAE bin", self.mae_bin),
            ("SDAE bin", self.sdae_bin),
            ("MAE total", self.mae_total),
            ("SDAE total", self.sdae_total),
        ];
        for (name, v) in rows {
            s += &format!("{name:<12}{:>14.6}{:>14.6}{:>14.6}\n", v[0], v[1], v[2]);
        }
        let r = self.force_ranges;
        s += &format!(
            "{:<12}{:>14}{:>14}{:>14}\n",
            "range",
            format!("{:.3}–{:.3}", r[0][0], r[0][1]),
            format!("{:.3}–{:.3}", r[1][0], r[1][1]),
            format!("{:.3}–{:.3}", r[2][0], r[2][1])
        );
        s += &format!("samples: {} (RMSE {}, SD {})\n", self.samples, self.rmse_mode, self.std_mode);
        s
    }
}
