//! Separable bilinear (triangle-filter) downsampling.
//!
//! The kernel support widens with the scale factor so every source pixel
//! contributes when shrinking. Weights are normalized in `f64`, then
//! converted to 22-bit fixed point (round half away from zero). Each pass
//! accumulates in `i64` starting from half an LSB and stores
//! `clamp(acc >> 22, 0, 255)`, i.e. round half up. The horizontal pass runs
//! first and is skipped when the width is unchanged; likewise the vertical
//! pass. Integer accumulation makes results independent of platform and
//! thread count.

use rayon::prelude::*;

use crate::render::PageImage;

const PRECISION_BITS: u32 = 22;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ResampleError {
    #[error("target {target_width}x{target_height} must be at least 1x1")]
    EmptyTarget { target_width: u32, target_height: u32 },
    #[error("target {target_width}x{target_height} exceeds source {width}x{height}; only downsampling is supported")]
    Upscale {
        width: u32,
        height: u32,
        target_width: u32,
        target_height: u32,
    },
}

struct Kernel {
    start: usize,
    weights: Vec<i64>,
}

fn triangle(x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        1.0 - x
    } else {
        0.0
    }
}

fn kernels(in_size: usize, out_size: usize) -> Vec<Kernel> {
    let scale = in_size as f64 / out_size as f64;
    let filter_scale = scale.max(1.0);
    let support = filter_scale;
    (0..out_size)
        .map(|i| {
            let center = (i as f64 + 0.5) * scale;
            let start = ((center - support + 0.5).trunc().max(0.0)) as usize;
            let end = ((center + support + 0.5).trunc() as usize).min(in_size);
            let raw: Vec<f64> = (start..end)
                .map(|x| triangle((x as f64 - center + 0.5) / filter_scale))
                .collect();
            let total: f64 = raw.iter().sum();
            let one = (1u64 << PRECISION_BITS) as f64;
            let weights = raw
                .iter()
                .map(|w| {
                    let w = if total != 0.0 { w / total } else { 0.0 };
                    if w < 0.0 {
                        (w * one - 0.5).trunc() as i64
                    } else {
                        (w * one + 0.5).trunc() as i64
                    }
                })
                .collect();
            Kernel { start, weights }
        })
        .collect()
}

fn clip(acc: i64) -> u8 {
    (acc >> PRECISION_BITS).clamp(0, 255) as u8
}

fn horizontal(src: &[u8], width: usize, out_width: usize) -> Vec<u8> {
    let ks = kernels(width, out_width);
    let height = src.len() / (width * 3);
    let mut out = vec![0u8; out_width * height * 3];
    out.par_chunks_mut(out_width * 3)
        .zip(src.par_chunks(width * 3))
        .for_each(|(dst, row)| {
            for (x, k) in ks.iter().enumerate() {
                let mut acc = [1i64 << (PRECISION_BITS - 1); 3];
                for (j, &w) in k.weights.iter().enumerate() {
                    let px = &row[(k.start + j) * 3..(k.start + j) * 3 + 3];
                    for c in 0..3 {
                        acc[c] += px[c] as i64 * w;
                    }
                }
                for c in 0..3 {
                    dst[x * 3 + c] = clip(acc[c]);
                }
            }
        });
    debug_assert_eq!(height * out_width * 3, out.len());
    out
}

fn vertical(src: &[u8], width: usize, height: usize, out_height: usize) -> Vec<u8> {
    let ks = kernels(height, out_height);
    let stride = width * 3;
    let mut out = vec![0u8; stride * out_height];
    out.par_chunks_mut(stride)
        .zip(ks.par_iter())
        .for_each(|(dst, k)| {
            for i in 0..stride {
                let mut acc = 1i64 << (PRECISION_BITS - 1);
                for (j, &w) in k.weights.iter().enumerate() {
                    acc += src[(k.start + j) * stride + i] as i64 * w;
                }
                dst[i] = clip(acc);
            }
        });
    out
}

/// Resamples `image` to exactly `target_width` x `target_height`.
pub fn downsample_bilinear(
    image: &PageImage,
    target_width: u32,
    target_height: u32,
) -> Result<PageImage, ResampleError> {
    if target_width == 0 || target_height == 0 {
        return Err(ResampleError::EmptyTarget {
            target_width,
            target_height,
        });
    }
    if target_width > image.width || target_height > image.height {
        return Err(ResampleError::Upscale {
            width: image.width,
            height: image.height,
            target_width,
            target_height,
        });
    }
    let (w, h) = (image.width as usize, image.height as usize);
    let mut pixels = if target_width != image.width {
        horizontal(&image.pixels, w, target_width as usize)
    } else {
        image.pixels.clone()
    };
    if target_height != image.height {
        pixels = vertical(&pixels, target_width as usize, h, target_height as usize);
    }
    Ok(PageImage {
        width: target_width,
        height: target_height,
        pixels,
        layout: image.layout.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::PageLayout;

    fn image(width: u32, height: u32, pixels: Vec<u8>) -> PageImage {
        PageImage {
            width,
            height,
            pixels,
            layout: PageLayout {
                page_index: 0,
                line_range: 0..0,
                rows: 0,
                cols: 1,
                wrap_events: 0,
                clipped_lines: 0,
            },
        }
    }

    fn gray(width: u32, height: u32, v: u8) -> PageImage {
        image(width, height, vec![v; (width * height * 3) as usize])
    }

    #[test]
    fn checkerboard_to_one_pixel_rounds_half_up() {
        let px = [0u8, 255, 255, 0]
            .iter()
            .flat_map(|&v| [v, v, v])
            .collect();
        let out = downsample_bilinear(&image(2, 2, px), 1, 1).unwrap();
        assert_eq!(out.pixels, vec![128, 128, 128]);
    }

    #[test]
    fn identity_resize() {
        let mut img = gray(9, 7, 0);
        for (i, b) in img.pixels.iter_mut().enumerate() {
            *b = (i * 17 % 251) as u8;
        }
        assert_eq!(downsample_bilinear(&img, 9, 7).unwrap(), img);
    }

    #[test]
    fn uniform_field_stays_uniform() {
        for v in [0u8, 1, 77, 128, 254, 255] {
            let img = gray(113, 97, v);
            for (tw, th) in [(1, 1), (13, 7), (56, 97), (113, 40), (100, 96)] {
                let out = downsample_bilinear(&img, tw, th).unwrap();
                assert!(out.pixels.iter().all(|&p| p == v), "v={v} {tw}x{th}");
            }
        }
    }

    #[test]
    fn upscale_and_empty_rejected() {
        let img = gray(4, 4, 10);
        assert!(matches!(
            downsample_bilinear(&img, 5, 4),
            Err(ResampleError::Upscale { .. })
        ));
        assert!(matches!(
            downsample_bilinear(&img, 0, 4),
            Err(ResampleError::EmptyTarget { .. })
        ));
    }

    #[test]
    fn halving_averages_pairs() {
        // Centers 1.0 and 3.0, support 2, raw triangle weights .75/.75/.25.
        let px = [0u8, 100, 200, 255].iter().flat_map(|&v| [v, v, v]).collect();
        let out = downsample_bilinear(&image(4, 1, px), 2, 1).unwrap();
        // out0 = (0*.75 + 100*.75 + 200*.25) / 1.75 = 71.43 -> 71
        // out1 = (100*.25 + 200*.75 + 255*.75) / 1.75 = 209.29 -> 209
        assert_eq!(out.pixels, vec![71, 71, 71, 209, 209, 209]);
    }
}
