//! JSON Lines detection and track streams, pose/calibration documents and
//! LSTM weight files.
//!
//! Every stream starts with a header line `{"format_version":1,"kind":...}`.
//! Lengths are meters, angles radians, velocities meters per frame.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use mono3dt_core::geometry::{Mat3, Vec2, Vec3};
use mono3dt_core::motion::LstmWeights;
use mono3dt_core::types::SequenceInput;
use mono3dt_core::{
    Box2D, Box3D, CameraIntrinsics, CameraPose, DetectionRecord, Dimensions, TrackRecord,
    TrackStatus,
};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;
pub const DETECTIONS_KIND: &str = "detections";
pub const TRACKS_KIND: &str = "tracks";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: unsupported format_version {found} (expected {FORMAT_VERSION})")]
    FormatVersion { path: PathBuf, found: u32 },
    #[error("{path}: expected a {expected} stream, found {found:?}")]
    WrongKind {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },
    #[error("{path}: frame {missing} is missing from the contiguous range")]
    FrameGap { path: PathBuf, missing: u64 },
    #[error("{path}:{line}: appearance length {found} differs from {expected}")]
    DimensionMismatch {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
}

impl IoError {
    /// True when the failure is the input's fault rather than the system's.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, IoError::Io { .. })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl ToString) -> IoError {
    IoError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.to_string(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format_version: u32,
    kind: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntrinsicsJson {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width_px: f64,
    pub height_px: f64,
}

impl From<CameraIntrinsics> for IntrinsicsJson {
    fn from(k: CameraIntrinsics) -> Self {
        Self {
            fx: k.focal_x,
            fy: k.focal_y,
            cx: k.principal_x,
            cy: k.principal_y,
            width_px: k.image_width,
            height_px: k.image_height,
        }
    }
}

impl IntrinsicsJson {
    fn to_core(self) -> Result<CameraIntrinsics, String> {
        CameraIntrinsics::new(
            self.fx,
            self.fy,
            self.cx,
            self.cy,
            self.width_px,
            self.height_px,
        )
        .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseFrame {
    frame: u64,
    rotation: [f64; 9],
    translation_m: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PosesDoc {
    format_version: u32,
    intrinsics: IntrinsicsJson,
    frames: Vec<PoseFrame>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibDoc {
    format_version: u32,
    intrinsics: IntrinsicsJson,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionLine {
    frame: u64,
    box2d: [f64; 4],
    c: [f64; 2],
    depth_m: f64,
    yaw_local_rad: f64,
    dim_m: [f64; 3],
    app: Vec<f64>,
    score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct TrackLine {
    frame: u64,
    id: u64,
    P_m: [f64; 3],
    yaw_rad: f64,
    dim_m: [f64; 3],
    vel_mpf: [f64; 3],
    box2d: [f64; 4],
    status: TrackStatus,
}

/// Camera intrinsics and per-frame poses for a contiguous frame range.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseStream {
    pub intrinsics: CameraIntrinsics,
    pub first_frame: u64,
    pub poses: Vec<CameraPose>,
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn write_line<T: Serialize>(w: &mut impl Write, path: &Path, value: &T) -> Result<(), IoError> {
    serde_json::to_writer(&mut *w, value).map_err(|e| io_err(path)(e.into()))?;
    w.write_all(b"\n").map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path)(e.into()))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e))
}

fn check_version(path: &Path, found: u32) -> Result<(), IoError> {
    if found == FORMAT_VERSION {
        Ok(())
    } else {
        Err(IoError::FormatVersion {
            path: path.to_path_buf(),
            found,
        })
    }
}

/// Reads a JSON Lines stream of `kind`, returning `(line number, record)`
/// pairs. Blank lines are skipped.
fn read_stream<T: for<'de> Deserialize<'de>>(
    path: &Path,
    kind: &'static str,
) -> Result<Vec<(usize, T)>, IoError> {
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let Some((n, first)) = lines.next() else {
        return Err(parse_err(path, 1, "missing header line"));
    };
    let header: Header =
        serde_json::from_str(&first.map_err(io_err(path))?).map_err(|e| parse_err(path, n, e))?;
    check_version(path, header.format_version)?;
    if header.kind != kind {
        return Err(IoError::WrongKind {
            path: path.to_path_buf(),
            expected: kind,
            found: header.kind,
        });
    }
    lines
        .map(|(n, l)| {
            let l = l.map_err(io_err(path))?;
            serde_json::from_str(&l)
                .map(|r| (n, r))
                .map_err(|e| parse_err(path, n, e))
        })
        .collect()
}

fn write_stream<T: Serialize>(
    path: &Path,
    kind: &str,
    records: impl IntoIterator<Item = T>,
) -> Result<(), IoError> {
    let mut w = create(path)?;
    write_line(
        &mut w,
        path,
        &Header {
            format_version: FORMAT_VERSION,
            kind: kind.into(),
        },
    )?;
    for r in records {
        write_line(&mut w, path, &r)?;
    }
    w.flush().map_err(io_err(path))
}

fn box2d(a: [f64; 4]) -> Result<Box2D, String> {
    if !a.iter().all(|v| v.is_finite()) {
        return Err("box2d must be finite".into());
    }
    Box2D::from_array(a).map_err(|e| e.to_string())
}

fn dims(a: [f64; 3]) -> Result<Dimensions, String> {
    let d = Dimensions {
        length: a[0],
        width: a[1],
        height: a[2],
    };
    if d.is_valid() {
        Ok(d)
    } else {
        Err("dim_m must be positive and finite".into())
    }
}

fn box_array(b: &Box2D) -> [f64; 4] {
    [b.x_min, b.y_min, b.x_max, b.y_max]
}

impl DetectionLine {
    fn from_record(d: &DetectionRecord) -> Self {
        Self {
            frame: d.frame,
            box2d: box_array(&d.box2d),
            c: [d.center_proj.x, d.center_proj.y],
            depth_m: d.depth,
            yaw_local_rad: d.yaw_local,
            dim_m: d.dims.to_array(),
            app: d.appearance.clone(),
            score: d.score,
        }
    }

    fn into_record(self) -> Result<DetectionRecord, String> {
        if !(self.depth_m > 0.0 && self.depth_m.is_finite()) {
            return Err(format!("depth_m must be positive, got {}", self.depth_m));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(format!("score must lie in [0, 1], got {}", self.score));
        }
        if !(self
            .c
            .iter()
            .chain([&self.yaw_local_rad])
            .chain(&self.app)
            .all(|v| v.is_finite()))
        {
            return Err("c, yaw_local_rad and app must be finite".into());
        }
        Ok(DetectionRecord {
            frame: self.frame,
            box2d: box2d(self.box2d)?,
            center_proj: Vec2::new(self.c[0], self.c[1]),
            depth: self.depth_m,
            yaw_local: self.yaw_local_rad,
            dims: dims(self.dim_m)?,
            appearance: self.app,
            score: self.score,
        })
    }
}

impl TrackLine {
    fn from_record(r: &TrackRecord) -> Self {
        let c = r.box3d.center;
        Self {
            frame: r.frame,
            id: r.track_id,
            P_m: [c.x, c.y, c.z],
            yaw_rad: r.box3d.yaw,
            dim_m: r.box3d.dims.to_array(),
            vel_mpf: [r.velocity.x, r.velocity.y, r.velocity.z],
            box2d: box_array(&r.box2d),
            status: r.status,
        }
    }

    fn into_record(self) -> Result<TrackRecord, String> {
        if !self
            .P_m
            .iter()
            .chain(&self.vel_mpf)
            .chain([&self.yaw_rad])
            .all(|v| v.is_finite())
        {
            return Err("P_m, vel_mpf and yaw_rad must be finite".into());
        }
        Ok(TrackRecord {
            frame: self.frame,
            track_id: self.id,
            box3d: Box3D {
                center: Vec3::from(self.P_m),
                dims: dims(self.dim_m)?,
                yaw: self.yaw_rad,
            },
            velocity: Vec3::from(self.vel_mpf),
            box2d: box2d(self.box2d)?,
            status: self.status,
        })
    }
}

/// Writes detections in frame order.
pub fn write_detections(path: &Path, detections: &[Vec<DetectionRecord>]) -> Result<(), IoError> {
    let mut all: Vec<&DetectionRecord> = detections.iter().flatten().collect();
    all.sort_by_key(|d| d.frame);
    write_stream(
        path,
        DETECTIONS_KIND,
        all.into_iter().map(DetectionLine::from_record),
    )
}

/// Reads every detection, checking that appearance lengths agree.
pub fn load_detections(path: &Path) -> Result<Vec<DetectionRecord>, IoError> {
    let lines: Vec<(usize, DetectionLine)> = read_stream(path, DETECTIONS_KIND)?;
    let mut expected = None;
    lines
        .into_iter()
        .map(|(n, l)| {
            let len = l.app.len();
            let want = *expected.get_or_insert(len);
            if len != want {
                return Err(IoError::DimensionMismatch {
                    path: path.to_path_buf(),
                    line: n,
                    expected: want,
                    found: len,
                });
            }
            l.into_record().map_err(|m| parse_err(path, n, m))
        })
        .collect()
}

/// Writes tracks sorted by `(frame, track_id)`.
pub fn write_tracks(path: &Path, records: &[TrackRecord]) -> Result<(), IoError> {
    let mut sorted: Vec<&TrackRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.frame, r.track_id));
    write_stream(
        path,
        TRACKS_KIND,
        sorted.into_iter().map(TrackLine::from_record),
    )
}

pub fn load_tracks(path: &Path) -> Result<Vec<TrackRecord>, IoError> {
    let lines: Vec<(usize, TrackLine)> = read_stream(path, TRACKS_KIND)?;
    let mut seen = std::collections::BTreeSet::new();
    lines
        .into_iter()
        .map(|(n, l)| {
            if !seen.insert((l.frame, l.id)) {
                return Err(parse_err(
                    path,
                    n,
                    format!("track {} appears twice in frame {}", l.id, l.frame),
                ));
            }
            l.into_record().map_err(|m| parse_err(path, n, m))
        })
        .collect()
}

pub fn write_poses(
    path: &Path,
    intrinsics: CameraIntrinsics,
    first_frame: u64,
    poses: &[CameraPose],
) -> Result<(), IoError> {
    let frames = poses
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let r = p.rotation;
            PoseFrame {
                frame: first_frame + i as u64,
                rotation: [
                    r[(0, 0)],
                    r[(0, 1)],
                    r[(0, 2)],
                    r[(1, 0)],
                    r[(1, 1)],
                    r[(1, 2)],
                    r[(2, 0)],
                    r[(2, 1)],
                    r[(2, 2)],
                ],
                translation_m: [p.translation.x, p.translation.y, p.translation.z],
            }
        })
        .collect();
    write_json(
        path,
        &PosesDoc {
            format_version: FORMAT_VERSION,
            intrinsics: intrinsics.into(),
            frames,
        },
    )
}

/// Reads poses; frames may appear in any order but must form a contiguous
/// range.
pub fn load_poses(path: &Path) -> Result<PoseStream, IoError> {
    let doc: PosesDoc = read_json(path)?;
    check_version(path, doc.format_version)?;
    let intrinsics = doc
        .intrinsics
        .to_core()
        .map_err(|m| parse_err(path, 0, m))?;
    let mut by_frame = BTreeMap::new();
    for f in doc.frames {
        let pose = CameraPose::new(
            Mat3::from_row_slice(&f.rotation),
            Vec3::from(f.translation_m),
        )
        .map_err(|e| parse_err(path, 0, format!("frame {}: {e}", f.frame)))?;
        if by_frame.insert(f.frame, pose).is_some() {
            return Err(parse_err(
                path,
                0,
                format!("frame {} appears twice", f.frame),
            ));
        }
    }
    let first_frame = by_frame.keys().next().copied().unwrap_or(0);
    for (i, frame) in by_frame.keys().enumerate() {
        let expected = first_frame + i as u64;
        if *frame != expected {
            return Err(IoError::FrameGap {
                path: path.to_path_buf(),
                missing: expected,
            });
        }
    }
    Ok(PoseStream {
        intrinsics,
        first_frame,
        poses: by_frame.into_values().collect(),
    })
}

pub fn write_calib(path: &Path, intrinsics: CameraIntrinsics) -> Result<(), IoError> {
    write_json(
        path,
        &CalibDoc {
            format_version: FORMAT_VERSION,
            intrinsics: intrinsics.into(),
        },
    )
}

pub fn load_calib(path: &Path) -> Result<CameraIntrinsics, IoError> {
    let doc: CalibDoc = read_json(path)?;
    check_version(path, doc.format_version)?;
    doc.intrinsics.to_core().map_err(|m| parse_err(path, 0, m))
}

/// Joins detections and poses into one frame-aligned sequence. Intrinsics
/// come from `calib_path` when given, otherwise from the pose document.
pub fn load_sequence(
    detections_path: &Path,
    poses_path: &Path,
    calib_path: Option<&Path>,
) -> Result<SequenceInput, IoError> {
    let poses = load_poses(poses_path)?;
    let intrinsics = match calib_path {
        Some(p) => load_calib(p)?,
        None => poses.intrinsics,
    };
    let n = poses.poses.len() as u64;
    let mut detections = vec![Vec::new(); poses.poses.len()];
    for d in load_detections(detections_path)? {
        if d.frame < poses.first_frame || d.frame >= poses.first_frame + n {
            return Err(IoError::FrameGap {
                path: poses_path.to_path_buf(),
                missing: d.frame,
            });
        }
        detections[(d.frame - poses.first_frame) as usize].push(d);
    }
    Ok(SequenceInput {
        intrinsics,
        first_frame: poses.first_frame,
        poses: poses.poses,
        detections,
    })
}

/// Writes the three files describing a sequence: detections, poses and
/// calibration.
pub fn write_sequence(
    seq: &SequenceInput,
    detections_path: &Path,
    poses_path: &Path,
    calib_path: &Path,
) -> Result<(), IoError> {
    write_detections(detections_path, &seq.detections)?;
    write_poses(poses_path, seq.intrinsics, seq.first_frame, &seq.poses)?;
    write_calib(calib_path, seq.intrinsics)
}

pub fn write_weights(path: &Path, weights: &LstmWeights) -> Result<(), IoError> {
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, weights).map_err(|e| io_err(path)(e.into()))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn load_weights(path: &Path) -> Result<LstmWeights, IoError> {
    let weights: LstmWeights = read_json(path)?;
    check_version(path, weights.format_version)?;
    weights.validate().map_err(|e| parse_err(path, 0, e))?;
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mono3dt_core::simulator::{simulate, Preset, ScenarioConfig};

    fn track(frame: u64, id: u64) -> TrackRecord {
        TrackRecord {
            frame,
            track_id: id,
            box3d: Box3D {
                center: Vec3::new(1.5, -2.25, 0.75),
                dims: Dimensions {
                    length: 4.2,
                    width: 1.8,
                    height: 1.5,
                },
                yaw: 0.3,
            },
            velocity: Vec3::new(0.1, 0.2, 0.0),
            box2d: Box2D {
                x_min: 1.0,
                y_min: 2.0,
                x_max: 30.0,
                y_max: 40.0,
            },
            status: TrackStatus::Occluded,
        }
    }

    #[test]
    fn empty_track_set_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        write_tracks(&p, &[]).unwrap();
        assert_eq!(
            std::fs::read_to_string(&p).unwrap(),
            "{\"format_version\":1,\"kind\":\"tracks\"}\n"
        );
        assert!(load_tracks(&p).unwrap().is_empty());
    }

    #[test]
    fn single_track_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        let r = track(3, 7);
        write_tracks(&p, std::slice::from_ref(&r)).unwrap();
        assert_eq!(load_tracks(&p).unwrap(), [r]);
    }

    #[test]
    fn tracks_are_sorted_on_write() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        write_tracks(&p, &[track(2, 1), track(1, 5), track(1, 2)]).unwrap();
        let keys: Vec<_> = load_tracks(&p)
            .unwrap()
            .iter()
            .map(|r| (r.frame, r.track_id))
            .collect();
        assert_eq!(keys, [(1, 2), (1, 5), (2, 1)]);
    }

    #[test]
    fn duplicate_track_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        write_tracks(&p, &[track(1, 1), track(1, 1)]).unwrap();
        assert!(matches!(
            load_tracks(&p),
            Err(IoError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn simulated_sequence_round_trips() {
        let s = simulate(&ScenarioConfig::preset(Preset::Dense, 3)).unwrap();
        let seq = s.sequence();
        let dir = tempfile::tempdir().unwrap();
        let (d, p, c) = (
            dir.path().join("d.jsonl"),
            dir.path().join("p.json"),
            dir.path().join("c.json"),
        );
        write_sequence(&seq, &d, &p, &c).unwrap();
        assert_eq!(load_sequence(&d, &p, Some(&c)).unwrap(), seq);
        assert_eq!(load_sequence(&d, &p, None).unwrap(), seq);
    }

    #[test]
    fn empty_detections_give_empty_frames() {
        let dir = tempfile::tempdir().unwrap();
        let (d, p) = (dir.path().join("d.jsonl"), dir.path().join("p.json"));
        let k = CameraIntrinsics::centered(1000.0, 1920.0, 1080.0).unwrap();
        write_detections(&d, &[]).unwrap();
        write_poses(&p, k, 0, &[CameraPose::identity(); 4]).unwrap();
        let seq = load_sequence(&d, &p, None).unwrap();
        assert_eq!(seq.detections, vec![Vec::<DetectionRecord>::new(); 4]);
    }

    #[test]
    fn missing_pose_frame_is_a_gap() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.json");
        let k = CameraIntrinsics::centered(1000.0, 1920.0, 1080.0).unwrap();
        write_poses(&p, k, 0, &[CameraPose::identity(); 5]).unwrap();
        let mut doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        doc["frames"].as_array_mut().unwrap().remove(3);
        std::fs::write(&p, doc.to_string()).unwrap();
        assert!(matches!(
            load_poses(&p),
            Err(IoError::FrameGap { missing: 3, .. })
        ));
    }

    #[test]
    fn appearance_length_must_not_vary() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        let line = |n: usize| {
            format!(
                "{{\"frame\":0,\"box2d\":[0,0,10,10],\"c\":[5,5],\"depth_m\":10,\"yaw_local_rad\":0,\"dim_m\":[4,2,1.5],\"app\":{:?},\"score\":0.9}}\n",
                vec![0.5; n]
            )
        };
        std::fs::write(
            &p,
            format!(
                "{{\"format_version\":1,\"kind\":\"detections\"}}\n{}{}",
                line(4),
                line(3)
            ),
        )
        .unwrap();
        assert!(matches!(
            load_detections(&p),
            Err(IoError::DimensionMismatch {
                line: 3,
                expected: 4,
                found: 3,
                ..
            })
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        std::fs::write(
            &p,
            "{\"format_version\":1,\"kind\":\"detections\"}\n\n{\"frame\":0}\n",
        )
        .unwrap();
        assert!(matches!(
            load_detections(&p),
            Err(IoError::Parse { line: 3, .. })
        ));
        std::fs::write(&p, "{\"format_version\":2,\"kind\":\"detections\"}\n").unwrap();
        assert!(matches!(
            load_detections(&p),
            Err(IoError::FormatVersion { found: 2, .. })
        ));
        std::fs::write(&p, "{\"format_version\":1,\"kind\":\"tracks\"}\n").unwrap();
        assert!(matches!(
            load_detections(&p),
            Err(IoError::WrongKind { .. })
        ));
        std::fs::write(&p, "").unwrap();
        assert!(matches!(
            load_detections(&p),
            Err(IoError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        let bad = [
            "\"depth_m\":-1,\"score\":0.5",
            "\"depth_m\":5,\"score\":1.5",
        ];
        for b in bad {
            let text = format!(
                "{{\"format_version\":1,\"kind\":\"detections\"}}\n{{\"frame\":0,\"box2d\":[0,0,10,10],\"c\":[5,5],{b},\"yaw_local_rad\":0,\"dim_m\":[4,2,1.5],\"app\":[]}}\n"
            );
            std::fs::write(&p, text).unwrap();
            assert!(
                matches!(load_detections(&p), Err(IoError::Parse { line: 2, .. })),
                "{b}"
            );
        }
    }

    #[test]
    fn weights_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.json");
        let w = LstmWeights::init(3);
        write_weights(&p, &w).unwrap();
        assert_eq!(load_weights(&p).unwrap(), w);
    }
}
