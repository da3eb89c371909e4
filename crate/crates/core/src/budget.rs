//! Visual-token budgeting: patch-grid arithmetic and target resolution search.

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BudgetError {
    #[error("{width}x{height} is not divisible by patch size {patch}")]
    NotDivisible { width: u32, height: u32, patch: u32 },
    #[error("invalid budget input: {0}")]
    InvalidInput(String),
    #[error("{text_tokens} tokens at ratio {ratio} cannot give each of {pages} pages one patch")]
    Infeasible {
        text_tokens: u64,
        ratio: f64,
        pages: u32,
    },
}

/// Square patch side length, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PatchSpec {
    pub patch_size: u32,
}

impl PatchSpec {
    pub const P14: PatchSpec = PatchSpec { patch_size: 14 };
    pub const P16: PatchSpec = PatchSpec { patch_size: 16 };

    pub fn new(patch_size: u32) -> Result<Self, BudgetError> {
        if patch_size == 0 {
            return Err(BudgetError::InvalidInput("patch size must be positive".into()));
        }
        Ok(Self { patch_size })
    }
}

impl Default for PatchSpec {
    fn default() -> Self {
        Self::P14
    }
}

/// Number of patches covering a `width` x `height` image.
pub fn visual_token_count(width: u32, height: u32, patch: PatchSpec) -> Result<u64, BudgetError> {
    let p = patch.patch_size;
    if p == 0 || !width.is_multiple_of(p) || !height.is_multiple_of(p) {
        return Err(BudgetError::NotDivisible {
            width,
            height,
            patch: p,
        });
    }
    Ok((width / p) as u64 * (height / p) as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionPlan {
    pub text_tokens: u64,
    pub ratio: f64,
    pub patch: PatchSpec,
    pub pages: u32,
    /// Per-page `[width, height]` in pixels.
    pub targets: Vec<[u32; 2]>,
    pub requested_visual_tokens: f64,
    pub achieved_visual_tokens: u64,
}

impl CompressionPlan {
    /// Patch grid `(columns, rows)` shared by every page.
    pub fn grid(&self) -> (u32, u32) {
        let [w, h] = self.targets[0];
        (w / self.patch.patch_size, h / self.patch.patch_size)
    }
}

/// Lowest aspect (w/h) accepted for a page grid.
pub const MIN_ASPECT: f64 = 0.5;
/// Highest aspect (w/h) accepted for a page grid.
pub const MAX_ASPECT: f64 = 2.0;

/// A candidate grid, ranked by [`Candidate::key`].
#[derive(Debug, Clone, Copy)]
struct Candidate {
    w: u64,
    h: u64,
    distance: f64,
    count: u64,
    aspect_error: f64,
}

impl Candidate {
    fn new(w: u64, h: u64, pages: u64, target: f64, source_aspect: f64) -> Self {
        let count = pages * w * h;
        Self {
            w,
            h,
            distance: (count as f64 - target).abs(),
            count,
            aspect_error: ((w as f64 / h as f64).ln() - source_aspect.ln()).abs(),
        }
    }

    /// Distance to the budget, then fewer tokens, then closeness to the
    /// source aspect, then taller over wider, then narrower.
    fn better_than(&self, other: &Candidate) -> bool {
        use std::cmp::Ordering::*;
        let by = |a: f64, b: f64| a.partial_cmp(&b).unwrap_or(Equal);
        // ln(w/h) and ln(h/w) may differ in the last ulp; treat as equal.
        let by_aspect = |a: f64, b: f64| {
            if (a - b).abs() <= 1e-9 {
                Equal
            } else {
                by(a, b)
            }
        };
        let ord = by(self.distance, other.distance)
            .then(self.count.cmp(&other.count))
            .then(by_aspect(self.aspect_error, other.aspect_error))
            .then((other.h >= other.w).cmp(&(self.h >= self.w)))
            .then(self.w.cmp(&other.w));
        ord == Less
    }
}

/// Chooses one patch grid per page so `pages * w * h` is as close as
/// possible to `text_tokens / ratio`, with `w/h` kept in `[0.5, 2]`.
///
/// The search visits every column count `w` that can matter and, because
/// the distance is convex in `h`, only the two row counts bracketing the
/// ideal `h` (clamped to the aspect band). This is exact and linear in `w`.
pub fn plan_compression(
    text_tokens: u64,
    ratio: f64,
    patch: PatchSpec,
    pages: u32,
    source_aspect: f64,
) -> Result<CompressionPlan, BudgetError> {
    if text_tokens == 0 {
        return Err(BudgetError::InvalidInput("text_tokens must be positive".into()));
    }
    if !(ratio.is_finite() && ratio >= 1.0) {
        return Err(BudgetError::InvalidInput(format!("ratio {ratio} must be >= 1")));
    }
    if pages == 0 {
        return Err(BudgetError::InvalidInput("pages must be >= 1".into()));
    }
    if !(source_aspect.is_finite() && source_aspect > 0.0) {
        return Err(BudgetError::InvalidInput("source aspect must be positive".into()));
    }
    if patch.patch_size == 0 {
        return Err(BudgetError::InvalidInput("patch size must be positive".into()));
    }
    let target = text_tokens as f64 / ratio;
    if target < pages as f64 {
        return Err(BudgetError::Infeasible {
            text_tokens,
            ratio,
            pages,
        });
    }
    let pages64 = pages as u64;
    let per_page = target / pages as f64;
    // w <= 2h and w*h <= 2*per_page + 2 for any grid worth considering.
    let w_max = ((2.0 * (2.0 * per_page + 2.0)).sqrt().ceil() as u64).max(1);

    let mut best: Option<Candidate> = None;
    for w in 1..=w_max {
        let h_lo = w.div_ceil(2);
        let h_hi = 2 * w;
        let ideal = per_page / w as f64;
        let floor = (ideal.floor() as u64).clamp(h_lo, h_hi);
        let ceil = (ideal.ceil() as u64).clamp(h_lo, h_hi);
        for h in [floor, ceil] {
            let cand = Candidate::new(w, h, pages64, target, source_aspect);
            if best.as_ref().is_none_or(|b| cand.better_than(b)) {
                best = Some(cand);
            }
        }
    }
    let best = best.expect("w_max >= 1 always yields a candidate");
    let p = patch.patch_size;
    let size = [best.w as u32 * p, best.h as u32 * p];
    Ok(CompressionPlan {
        text_tokens,
        ratio,
        patch,
        pages,
        targets: vec![size; pages as usize],
        requested_visual_tokens: target,
        achieved_visual_tokens: best.count,
    })
}
