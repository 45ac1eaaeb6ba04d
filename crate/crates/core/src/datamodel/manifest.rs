//! Dataset manifest: a JSON document pointing at per-modality STPF files and
//! JSON label arrays, resolved relative to the manifest's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{stpf, validate_record, FeatureSequence, VideoRecord};
use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

/// On-disk manifest document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub version: u32,
    /// Training modality order.
    pub modalities: Vec<String>,
    pub videos: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub video_id: String,
    pub fps: f64,
    /// modality name -> STPF path
    pub features: BTreeMap<String, String>,
    /// JSON array of seconds; defaults to `t / fps` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_labels: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_labels: Option<String>,
}

/// In-memory dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub modality_names: Vec<String>,
    pub records: Vec<VideoRecord>,
}

impl Manifest {
    /// Checks that every record carries every modality and passes
    /// [`validate_record`].
    pub fn new(modality_names: Vec<String>, records: Vec<VideoRecord>) -> Result<Self> {
        if modality_names.is_empty() {
            return Err(Error::Data("manifest lists no modalities".into()));
        }
        for rec in &records {
            for m in &modality_names {
                if !rec.modalities.contains_key(m) {
                    return Err(Error::Data(format!(
                        "video {} is missing modality {m}",
                        rec.video_id
                    )));
                }
            }
            let violations = validate_record(rec);
            if !violations.is_empty() {
                let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
                return Err(Error::Data(format!(
                    "video {}: {}",
                    rec.video_id,
                    msgs.join("; ")
                )));
            }
        }
        Ok(Self {
            modality_names,
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn has_step_labels(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.step_labels.is_some())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ManifestFile = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        if file.version != MANIFEST_VERSION {
            return Err(Error::Format {
                path: path.to_path_buf(),
                msg: format!("unsupported manifest version {}", file.version),
            });
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let mut records = Vec::with_capacity(file.videos.len());
        for entry in &file.videos {
            records.push(load_entry(base, entry, &file.modalities)?);
        }
        Self::new(file.modalities, records)
    }

    /// Writes STPF files, label/timestamp JSON files and `manifest.json` into
    /// `dir`; returns the manifest path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut videos = Vec::with_capacity(self.records.len());
        for rec in &self.records {
            let mut features = BTreeMap::new();
            for name in &self.modality_names {
                let seq = rec.modality(name)?;
                let file = format!("{}.{name}.stpf", rec.video_id);
                stpf::write(&dir.join(&file), seq.data())?;
                features.insert(name.clone(), file);
            }
            let timestamps = format!("{}.times.json", rec.video_id);
            write_json(&dir.join(&timestamps), &rec.timestamps())?;
            let step_labels = match &rec.step_labels {
                Some(l) => {
                    let file = format!("{}.steps.json", rec.video_id);
                    write_json(&dir.join(&file), l)?;
                    Some(file)
                }
                None => None,
            };
            let phase_labels = match &rec.phase_labels {
                Some(l) => {
                    let file = format!("{}.phases.json", rec.video_id);
                    write_json(&dir.join(&file), l)?;
                    Some(file)
                }
                None => None,
            };
            videos.push(ManifestEntry {
                video_id: rec.video_id.clone(),
                fps: rec.fps(),
                features,
                timestamps: Some(timestamps),
                step_labels,
                phase_labels,
            });
        }
        let doc = ManifestFile {
            version: MANIFEST_VERSION,
            modalities: self.modality_names.clone(),
            videos,
        };
        let path = dir.join("manifest.json");
        write_json(&path, &doc)?;
        Ok(path)
    }
}

fn load_entry(base: &Path, entry: &ManifestEntry, modalities: &[String]) -> Result<VideoRecord> {
    let timestamps: Option<Vec<f64>> = match &entry.timestamps {
        Some(p) => Some(read_json(&base.join(p))?),
        None => None,
    };
    let mut rec = VideoRecord::new(entry.video_id.clone());
    for name in modalities {
        let file = entry.features.get(name).ok_or_else(|| {
            Error::Data(format!("video {} lists no file for modality {name}", entry.video_id))
        })?;
        let data = stpf::read(&base.join(file))?;
        let seq = match &timestamps {
            Some(ts) => FeatureSequence::with_timestamps(name.clone(), data, entry.fps, ts.clone())?,
            None => FeatureSequence::new(name.clone(), data, entry.fps)?,
        };
        rec = rec.with_modality(seq);
    }
    if let Some(p) = &entry.step_labels {
        rec.step_labels = Some(read_json(&base.join(p))?);
    }
    if let Some(p) = &entry.phase_labels {
        rec.phase_labels = Some(read_json(&base.join(p))?);
    }
    Ok(rec)
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::json(path, e))?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}
