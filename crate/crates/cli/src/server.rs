//! Local HTTP service for the labeling front end.
//!
//! Reads are concurrent; label uploads are validated and then persisted under
//! a single write lock.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use micromotion::frame_io::FrameSequence;
use micromotion::heatmap::{load_keypoint_track, KeypointFrame};
use micromotion::labeling::{validate_label_json, LabelFile};
use serde::Serialize;
use serde_json::json;
use tokio::sync::RwLock;

use crate::commands::load_video;
use crate::config::{pick, FileConfig, DEFAULT_HOST, DEFAULT_PORT};
use crate::ServeArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    Raw,
    Magnified,
    Heatmap,
    Overlap,
}

impl FrameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameKind::Raw => "raw",
            FrameKind::Magnified => "magnified",
            FrameKind::Heatmap => "heatmap",
            FrameKind::Overlap => "overlap",
        }
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrameKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(FrameKind::Raw),
            "magnified" => Ok(FrameKind::Magnified),
            "heatmap" => Ok(FrameKind::Heatmap),
            "overlap" => Ok(FrameKind::Overlap),
            _ => Err(format!("unknown frame kind `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VideoMeta {
    pub subject_id: String,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub frame_count: usize,
    pub kinds: Vec<FrameKind>,
}

pub struct AppState {
    meta: VideoMeta,
    videos: BTreeMap<FrameKind, FrameSequence>,
    /// Per frame, in overlap-video coordinates.
    keypoints: Vec<Option<KeypointFrame>>,
    labels_path: PathBuf,
    labels: RwLock<Option<LabelFile>>,
}

impl AppState {
    /// `videos` must contain the overlap video; all videos must have the
    /// same frame count. `track` is in coordinates of the raw video.
    pub fn new(
        subject_id: &str,
        videos: BTreeMap<FrameKind, FrameSequence>,
        track: Vec<KeypointFrame>,
        labels_path: PathBuf,
    ) -> Result<Self> {
        let Some(overlap) = videos.get(&FrameKind::Overlap) else {
            bail!("the overlap video is required");
        };
        for (kind, seq) in &videos {
            ensure!(
                seq.count() == overlap.count(),
                "{kind} video has {} frames, overlap has {}",
                seq.count(),
                overlap.count()
            );
        }
        let (w, h) = overlap.dims();
        let mut keypoints = vec![None; overlap.count()];
        if !track.is_empty() {
            let Some(raw) = videos.get(&FrameKind::Raw) else {
                bail!("keypoints need the raw video for their coordinate frame");
            };
            let (sx, sy) = (
                w as f64 / raw.width() as f64,
                h as f64 / raw.height() as f64,
            );
            for kf in track {
                if let Some(slot) = keypoints.get_mut(kf.frame_index) {
                    *slot = Some(kf.rescaled(sx, sy));
                }
            }
        }
        let labels = load_existing_labels(&labels_path, (w, h), overlap.count())?;
        Ok(Self {
            meta: VideoMeta {
                subject_id: subject_id.to_string(),
                width: w,
                height: h,
                fps: overlap.fps(),
                frame_count: overlap.count(),
                kinds: videos.keys().copied().collect(),
            },
            videos,
            keypoints,
            labels_path,
            labels: RwLock::new(labels),
        })
    }

    pub fn meta(&self) -> &VideoMeta {
        &self.meta
    }
}

fn load_existing_labels(path: &Path, dims: (u32, u32), count: usize) -> Result<Option<LabelFile>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read label file {}", path.display()))?;
    match validate_label_json(&text, dims, count) {
        Ok(file) => Ok(Some(file)),
        Err(violations) => {
            let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
            bail!(
                "existing label file {} is invalid:\n{}",
                path.display(),
                lines.join("\n")
            )
        }
    }
}

/// Writes through a temporary file so readers never see a partial file.
fn persist(path: &Path, file: &LabelFile) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let text = serde_json::to_string_pretty(file).expect("label file serializes");
    fs::write(&tmp, text + "\n")?;
    fs::rename(&tmp, path)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/video/meta", get(video_meta))
        .route("/frames/{kind}/{index}", get(frame))
        .route("/labels", get(get_labels).post(post_labels))
        .route("/keypoints/{index}", get(keypoints))
        .with_state(state)
}

async fn video_meta(State(state): State<Arc<AppState>>) -> Json<VideoMeta> {
    Json(state.meta.clone())
}

async fn frame(
    State(state): State<Arc<AppState>>,
    UrlPath((kind, index)): UrlPath<(String, usize)>,
) -> Response {
    let kind = match kind.parse::<FrameKind>() {
        Ok(k) => k,
        Err(e) => return error(StatusCode::NOT_FOUND, e),
    };
    if !state.videos.contains_key(&kind) {
        return error(StatusCode::NOT_FOUND, format!("no {kind} video loaded"));
    }
    if index >= state.meta.frame_count {
        return error(
            StatusCode::NOT_FOUND,
            format!("frame {index} out of range (0..{})", state.meta.frame_count),
        );
    }
    let encoded = tokio::task::spawn_blocking(move || {
        let img = &state.videos[&kind].frames()[index];
        let mut bytes = Vec::new();
        img.write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
            .map(|_| bytes)
    })
    .await;
    match encoded {
        Ok(Ok(bytes)) => ([(header::CONTENT_TYPE, "image/png")], bytes).into_response(),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn get_labels(State(state): State<Arc<AppState>>) -> Response {
    match &*state.labels.read().await {
        Some(file) => Json(file.clone()).into_response(),
        None => error(StatusCode::NOT_FOUND, "no labels saved yet"),
    }
}

async fn post_labels(State(state): State<Arc<AppState>>, body: String) -> Response {
    let file = match validate_label_json(
        &body,
        (state.meta.width, state.meta.height),
        state.meta.frame_count,
    ) {
        Ok(file) => file,
        Err(violations) => {
            return (
                StatusCode::UNPROCESSABLE_ENTITY,
                Json(json!({ "violations": violations })),
            )
                .into_response();
        }
    };
    let mut guard = state.labels.write().await;
    if let Err(e) = persist(&state.labels_path, &file) {
        return error(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("cannot write {}: {e}", state.labels_path.display()),
        );
    }
    let regions = file.regions.len();
    *guard = Some(file);
    Json(json!({ "saved": state.labels_path.display().to_string(), "regions": regions }))
        .into_response()
}

async fn keypoints(State(state): State<Arc<AppState>>, UrlPath(index): UrlPath<usize>) -> Response {
    match state.keypoints.get(index) {
        Some(Some(kf)) => Json(kf.clone()).into_response(),
        Some(None) => Json(KeypointFrame {
            frame_index: index,
            points: Vec::new(),
        })
        .into_response(),
        None => error(
            StatusCode::NOT_FOUND,
            format!("frame {index} out of range (0..{})", state.meta.frame_count),
        ),
    }
}

pub fn load_state(args: &ServeArgs) -> Result<AppState> {
    let (manifest, overlap) = load_video(&args.overlap)?;
    let mut videos = BTreeMap::from([(FrameKind::Overlap, overlap)]);
    for (kind, path) in [
        (FrameKind::Raw, &args.raw),
        (FrameKind::Magnified, &args.magnified),
        (FrameKind::Heatmap, &args.heatmap),
    ] {
        if let Some(path) = path {
            videos.insert(kind, load_video(path)?.1);
        }
    }
    let track = match &args.keypoints {
        Some(path) => load_keypoint_track(path)
            .with_context(|| format!("cannot load keypoints {}", path.display()))?,
        None => Vec::new(),
    };
    AppState::new(&manifest.subject_id, videos, track, args.labels.clone())
}

pub fn serve(args: &ServeArgs, file: &FileConfig) -> Result<()> {
    let host = pick(
        args.host.clone(),
        file.host.clone(),
        DEFAULT_HOST.to_string(),
    );
    let port = pick(args.port, file.port, DEFAULT_PORT);
    let state = Arc::new(load_state(args)?);
    let runtime = tokio::runtime::Runtime::new().context("cannot start async runtime")?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host.as_str(), port))
            .await
            .with_context(|| format!("cannot bind {host}:{port}"))?;
        let meta = state.meta();
        println!(
            "serving {} frames ({}x{}) on http://{}",
            meta.frame_count,
            meta.width,
            meta.height,
            listener.local_addr()?
        );
        axum::serve(listener, router(state))
            .await
            .context("server error")
    })
}
