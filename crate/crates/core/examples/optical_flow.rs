// Dense flow between two frames of a drifting texture, pooled to the
// 2×88×88 feature tensor.

use tactile_sim::features::{dense_flow, pool_flow, FlowParams, FEATURE_SIDE};
use tactile_sim::raster::GrayImage;

fn texture(dx: f64, dy: f64) -> GrayImage {
    let mut img = GrayImage::new(440, 440);
    for y in 0..440 {
        for x in 0..440 {
            let (u, v) = (x as f64 + 0.5 - dx, y as f64 + 0.5 - dy);
            let s = (u / 9.0).sin() * (v / 13.0).cos() + 0.5 * ((u + 2.0 * v) / 21.0).sin();
            img.set(x, y, (128.0 + 70.0 * s).round() as u8);
        }
    }
    img
}

pub fn run_example() -> tactile_sim::Result<[f64; 2]> {
    let flow = dense_flow(&texture(0.0, 0.0), &texture(2.5, -1.0), &FlowParams::default())?;
    let t = pool_flow(&flow)?;
    let n = (FEATURE_SIDE * FEATURE_SIDE) as f64;
    let mean = [0, 1].map(|c| t.data[c * FEATURE_SIDE * FEATURE_SIDE..(c + 1) * FEATURE_SIDE * FEATURE_SIDE].iter().map(|&v| v as f64).sum::<f64>() / n);
    println!("true shift (2.50, -1.00) px, mean pooled flow ({:.2}, {:.2}) px", mean[0], mean[1]);
    Ok(mean)
}

#[allow(dead_code)]
fn main() -> tactile_sim::Result<()> {
    run_example().map(|_| ())
}
