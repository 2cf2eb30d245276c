use crate::error::{Error, Result};

/// Latent frames produced for `t_raw` input frames: `ceil(t_raw / factor)`.
pub fn latent_frame_count(t_raw: usize, factor: usize) -> Result<usize> {
    if t_raw == 0 {
        return Err(Error::invalid("t_raw must be >= 1"));
    }
    if factor == 0 {
        return Err(Error::invalid("temporal factor must be >= 1"));
    }
    Ok(t_raw.div_ceil(factor))
}

/// Frames the decoder emits beyond `t_raw`, which are discarded.
pub fn spurious_frames(t_raw: usize, factor: usize) -> Result<usize> {
    Ok(latent_frame_count(t_raw, factor)? * factor - t_raw)
}

/// One row of the pre-training duration bucket table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationBucket {
    pub label: &'static str,
    pub video_frames: usize,
    pub latent_frames: usize,
}

struct BucketRow {
    label: &'static str,
    duration: (f64, f64),
    fps: (f64, f64),
    video_frames: usize,
}

const FPS_TOL: f64 = 1e-6;

// Checked in order; the first matching row wins. Duration ranges are
// half-open [lo, hi), FPS ranges closed.
const BUCKETS: [BucketRow; 5] = [
    // Middle clips cut from 10.67 s - 12 s videos at 24 FPS.
    BucketRow {
        label: "10.67s @ 24",
        duration: (256.0 / 24.0, 12.0),
        fps: (24.0, 24.0),
        video_frames: 256,
    },
    // Middle clips cut from videos of 16 s or longer at 16 FPS.
    BucketRow {
        label: "16s @ 16",
        duration: (16.0, f64::INFINITY),
        fps: (16.0, 16.0),
        video_frames: 256,
    },
    BucketRow {
        label: "12s-16s @ 21-16",
        duration: (12.0, 16.0),
        fps: (16.0, 21.0),
        video_frames: 256,
    },
    BucketRow {
        label: "8s-12s @ 24-16",
        duration: (8.0, 12.0),
        fps: (16.0, 24.0),
        video_frames: 192,
    },
    BucketRow {
        label: "4s-8s @ 32-16",
        duration: (4.0, 8.0),
        fps: (16.0, 32.0),
        video_frames: 128,
    },
];

pub fn assign_duration_bucket(duration_s: f64, fps: f64) -> Result<DurationBucket> {
    if !(duration_s > 0.0) || !(fps > 0.0) || !duration_s.is_finite() || !fps.is_finite() {
        return Err(Error::invalid(format!(
            "duration ({duration_s}) and fps ({fps}) must be positive"
        )));
    }
    BUCKETS
        .iter()
        .find(|row| {
            duration_s >= row.duration.0
                && duration_s < row.duration.1
                && fps >= row.fps.0 - FPS_TOL
                && fps <= row.fps.1 + FPS_TOL
        })
        .map(|row| DurationBucket {
            label: row.label,
            video_frames: row.video_frames,
            latent_frames: row.video_frames.div_ceil(8),
        })
        .ok_or(Error::NoBucket { duration_s, fps })
}
