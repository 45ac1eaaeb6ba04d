//! Value types for per-frame feature sequences, video records and datasets.

pub mod manifest;
pub mod stpf;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use manifest::{Manifest, ManifestEntry, ManifestFile};

/// Label value marking a background (non key-step) frame.
pub const BACKGROUND: i64 = -1;

/// Raw per-frame features of one modality for one video.
///
/// Rows are frames. Timestamps are in seconds and strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    modality: String,
    fps: f64,
    data: Array2<f32>,
    timestamps: Vec<f64>,
}

impl FeatureSequence {
    /// Builds a sequence with timestamps `t / fps`.
    pub fn new(modality: impl Into<String>, data: Array2<f32>, fps: f64) -> Result<Self> {
        let timestamps = default_timestamps(data.nrows(), fps);
        Self::with_timestamps(modality, data, fps, timestamps)
    }

    pub fn with_timestamps(
        modality: impl Into<String>,
        data: Array2<f32>,
        fps: f64,
        timestamps: Vec<f64>,
    ) -> Result<Self> {
        let modality = modality.into();
        let (rows, cols) = data.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::Data(format!(
                "{modality}: feature matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::Data(format!("{modality}: fps must be positive, got {fps}")));
        }
        if timestamps.len() != rows {
            return Err(Error::Data(format!(
                "{modality}: {} timestamps for {rows} frames",
                timestamps.len()
            )));
        }
        check_timestamps(&timestamps).map_err(|m| Error::Data(format!("{modality}: {m}")))?;
        if let Some((t, _)) = data
            .rows()
            .into_iter()
            .enumerate()
            .find(|(_, r)| r.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Data(format!("{modality}: non-finite feature at frame {t}")));
        }
        Ok(Self {
            modality,
            fps,
            data,
            timestamps,
        })
    }

    pub fn modality(&self) -> &str {
        &self.modality
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frame_count(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> ArrayView2<'_, f32> {
        self.data.view()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }
}

pub fn default_timestamps(frames: usize, fps: f64) -> Vec<f64> {
    (0..frames).map(|t| t as f64 / fps).collect()
}

fn check_timestamps(ts: &[f64]) -> std::result::Result<(), String> {
    if let Some(&first) = ts.first() {
        if !(first.is_finite() && first >= 0.0) {
            return Err(format!("first timestamp must be >= 0, got {first}"));
        }
    }
    for (i, w) in ts.windows(2).enumerate() {
        if !(w[1].is_finite() && w[1] > w[0]) {
            return Err(format!(
                "timestamps not strictly increasing at frame {}: {} then {}",
                i + 1,
                w[0],
                w[1]
            ));
        }
    }
    Ok(())
}

/// Writes the feature payload of `seq` as an STPF file.
pub fn write_feature_store(seq: &FeatureSequence, path: &Path) -> Result<()> {
    stpf::write(path, seq.data())
}

/// Reads an STPF file and attaches modality name and frame rate; timestamps
/// default to `t / fps`.
pub fn read_feature_store(path: &Path, modality: &str, fps: f64) -> Result<FeatureSequence> {
    let data = stpf::read(path)?;
    FeatureSequence::new(modality, data, fps)
}

/// One video: a feature sequence per modality plus optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoRecord {
    pub video_id: String,
    pub modalities: BTreeMap<String, FeatureSequence>,
    /// Key-step id per frame, [`BACKGROUND`] for background.
    pub step_labels: Option<Vec<i64>>,
    pub phase_labels: Option<Vec<i64>>,
}

impl VideoRecord {
    pub fn new(video_id: impl Into<String>) -> Self {
        Self {
            video_id: video_id.into(),
            modalities: BTreeMap::new(),
            step_labels: None,
            phase_labels: None,
        }
    }

    pub fn with_modality(mut self, seq: FeatureSequence) -> Self {
        self.modalities.insert(seq.modality().to_string(), seq);
        self
    }

    pub fn modality(&self, name: &str) -> Result<&FeatureSequence> {
        self.modalities
            .get(name)
            .ok_or_else(|| Error::Data(format!("video {} has no modality {name}", self.video_id)))
    }

    /// Frame count shared by all modalities (taken from the first one).
    pub fn frame_count(&self) -> usize {
        self.modalities
            .values()
            .next()
            .map_or(0, FeatureSequence::frame_count)
    }

    pub fn timestamps(&self) -> &[f64] {
        self.modalities
            .values()
            .next()
            .map_or(&[], FeatureSequence::timestamps)
    }

    pub fn fps(&self) -> f64 {
        self.modalities.values().next().map_or(1.0, FeatureSequence::fps)
    }
}

/// A broken [`VideoRecord`] invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NoModalities,
    FrameCountMismatch {
        modality: String,
        expected: usize,
        found: usize,
    },
    TimestampMismatch {
        modality: String,
    },
    LabelLength {
        labels: String,
        expected: usize,
        found: usize,
    },
    InvalidLabel {
        labels: String,
        frame: usize,
        value: i64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoModalities => write!(f, "record has no modalities"),
            Violation::FrameCountMismatch {
                modality,
                expected,
                found,
            } => write!(
                f,
                "frame-count mismatch: {modality} has {found} frames, expected {expected}"
            ),
            Violation::TimestampMismatch { modality } => {
                write!(f, "timestamp mismatch: {modality} differs from the first modality")
            }
            Violation::LabelLength {
                labels,
                expected,
                found,
            } => write!(f, "label length: {labels} has {found} entries, expected {expected}"),
            Violation::InvalidLabel {
                labels,
                frame,
                value,
            } => write!(f, "invalid label: {labels}[{frame}] = {value}"),
        }
    }
}

/// Lists every broken invariant of `rec`; empty means the record is usable.
pub fn validate_record(rec: &VideoRecord) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seqs = rec.modalities.values();
    let Some(first) = seqs.next() else {
        out.push(Violation::NoModalities);
        return out;
    };
    let frames = first.frame_count();
    for seq in seqs {
        if seq.frame_count() != frames {
            out.push(Violation::FrameCountMismatch {
                modality: seq.modality().to_string(),
                expected: frames,
                found: seq.frame_count(),
            });
        } else if seq.timestamps() != first.timestamps() {
            out.push(Violation::TimestampMismatch {
                modality: seq.modality().to_string(),
            });
        }
    }
    for (name, labels, min) in [
        ("step_labels", &rec.step_labels, BACKGROUND),
        ("phase_labels", &rec.phase_labels, 0),
    ] {
        let Some(labels) = labels else { continue };
        if labels.len() != frames {
            out.push(Violation::LabelLength {
                labels: name.to_string(),
                expected: frames,
                found: labels.len(),
            });
        }
        if let Some((frame, &value)) = labels.iter().enumerate().find(|(_, &v)| v < min) {
            out.push(Violation::InvalidLabel {
                labels: name.to_string(),
                frame,
                value,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn seq(name: &str, frames: usize) -> FeatureSequence {
        FeatureSequence::new(name, Array2::zeros((frames, 3)), 2.0).unwrap()
    }

    #[test]
    fn consistent_record_has_no_violations() {
        let rec = VideoRecord::new("v")
            .with_modality(seq("a", 10))
            .with_modality(seq("b", 10));
        assert!(validate_record(&rec).is_empty());
    }

    #[test]
    fn frame_count_mismatch() {
        let rec = VideoRecord::new("v")
            .with_modality(seq("a", 10))
            .with_modality(seq("b", 11));
        let v = validate_record(&rec);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::FrameCountMismatch { found: 11, .. }));
        assert!(v[0].to_string().starts_with("frame-count mismatch"));
    }

    #[test]
    fn short_step_labels() {
        let mut rec = VideoRecord::new("v").with_modality(seq("a", 10));
        rec.step_labels = Some(vec![0; 9]);
        let v = validate_record(&rec);
        assert_eq!(
            v,
            vec![Violation::LabelLength {
                labels: "step_labels".into(),
                expected: 10,
                found: 9
            }]
        );
    }

    #[test]
    fn empty_record() {
        assert_eq!(validate_record(&VideoRecord::new("v")), vec![Violation::NoModalities]);
    }

    #[test]
    fn timestamps_must_increase() {
        let err = FeatureSequence::with_timestamps("a", Array2::zeros((3, 2)), 1.0, vec![0.0, 1.0, 1.0]);
        assert!(err.is_err());
        let err = FeatureSequence::with_timestamps("a", Array2::zeros((2, 2)), 1.0, vec![-1.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn default_timestamps_use_fps() {
        let s = seq("a", 4);
        assert_eq!(s.timestamps(), &[0.0, 0.5, 1.0, 1.5]);
    }
}
