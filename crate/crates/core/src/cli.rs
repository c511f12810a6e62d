//! The `posekit` command line.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data or schema errors. Failures are
//! reported on stderr as `ERROR:<kind>: <message>`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::annotation::{load_pose_sequence, AnnotationDocument, LoadedSequence, SchemaError};
use crate::config::PipelineConfig;
use crate::manifest::{read_frame_mapping, write_frame_mapping, write_pair_manifest};
use crate::pose::impute_missing_joints;
use crate::raster::{
    align_sequence, blend_frames, list_frames, render_skeleton, write_frames, FaceAnnotation, RasterImage,
};
use crate::transfer::{
    build_pairs_manifest, interpolate_plan, interpolate_pose, match_sequence, CandidatePolicy, MatchParams,
    RenderInstruction,
};
use crate::Error;

pub const THREADS_ENV: &str = "POSEKIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "posekit",
    version,
    about = "Nearest-neighbor pose transfer between annotated videos"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Map every frame of A to a frame of B (frame-mapping JSONL).
    Match {
        /// Driving sequence annotation.
        a: PathBuf,
        /// Target sequence annotation.
        b: PathBuf,
        #[command(flatten)]
        matching: MatchArgs,
        /// Output file; stdout when omitted.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Pair every frame of A with its nearest frame of B (pair-manifest JSONL).
    Pairs {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        matching: MatchArgs,
        /// Drop pairs farther apart than this.
        #[arg(long)]
        max_distance: Option<f64>,
        /// Output file; stdout when omitted.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Render pose skeletons for every annotated frame into a PNG frame directory.
    RenderSkeleton {
        annotation: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Render B's skeletons in the order of this frame mapping instead of frame order.
        #[arg(long)]
        mapping: Option<PathBuf>,
        /// Pose-space interpolation factor used with --mapping.
        #[arg(long)]
        interp: Option<usize>,
        /// Skip face contours.
        #[arg(long)]
        no_face: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Shift frames so the face center stays where it is in the first frame.
    Align {
        /// Directory of frame_NNNNNN.png files.
        frames: PathBuf,
        /// Annotation with a face for at least the first frame.
        annotation: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Build the transfer video frames from a mapping and B's frame directory.
    Assemble {
        mapping: PathBuf,
        /// B's frame directory.
        frames: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Crossfade steps per switch; 1 disables blending.
        #[arg(long)]
        interp: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check an annotation document against the schema.
    Validate { annotation: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    MinDistance,
    NearestPrev,
}

impl From<PolicyArg> for CandidatePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::MinDistance => CandidatePolicy::MinDistance,
            PolicyArg::NearestPrev => CandidatePolicy::NearestPrevIndex,
        }
    }
}

#[derive(Debug, Args)]
struct MatchArgs {
    /// Nearest neighbors considered per frame [default: 1].
    #[arg(long)]
    k: Option<usize>,
    /// Switching threshold; `inf` never switches [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Compare raw pixel coordinates instead of frame-normalized ones.
    #[arg(long)]
    no_normalize: bool,
    /// How one frame is picked among the k neighbors [default: nearest-prev].
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Pipeline config JSON; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl MatchArgs {
    fn resolve(&self) -> Result<(PipelineConfig, MatchParams), Error> {
        let config = load_config(self.config.as_deref())?;
        let mut params = config.match_params();
        if let Some(k) = self.k {
            params.k = k;
        }
        if let Some(lambda) = self.lambda {
            params.lambda = lambda;
        }
        if self.no_normalize {
            params.normalize = false;
        }
        if let Some(policy) = self.policy {
            params.candidate_policy = policy.into();
        }
        params.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok((config, params))
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Error> {
    path.map_or_else(|| Ok(PipelineConfig::default()), PipelineConfig::from_path)
}

fn load_annotation(path: &Path) -> Result<LoadedSequence, Error> {
    let doc = AnnotationDocument::from_path(path)?;
    let loaded = load_pose_sequence(&doc)?;
    if loaded.clamped > 0 {
        eprintln!(
            "warning: {}: {} coordinates clamped to the {}x{} frame",
            path.display(),
            loaded.clamped,
            doc.width,
            doc.height
        );
    }
    Ok(loaded)
}

fn create_file(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn with_output(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Error> {
    let io_err = |source| Error::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    };
    match path {
        Some(p) => {
            let mut sink = create_file(p)?;
            write(&mut sink).map_err(io_err)?;
            sink.into_inner()
                .map_err(|e| io_err(e.into_error()))?
                .sync_all()
                .map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut sink = stdout.lock();
            write(&mut sink).map_err(io_err)
        }
    }
}

fn interp_factor(flag: Option<usize>, config: &PipelineConfig) -> Result<usize, Error> {
    let n = flag.unwrap_or_else(|| config.interpolation_factor());
    if n == 0 {
        return Err(Error::Usage("--interp must be at least 1".into()));
    }
    Ok(n)
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Match { a, b, matching, output } => {
            let (_, params) = matching.resolve()?;
            let a = impute_missing_joints(&load_annotation(&a)?.sequence)?;
            let b = impute_missing_joints(&load_annotation(&b)?.sequence)?;
            let mapping = match_sequence(&a, &b, &params)?;
            with_output(output.as_deref(), |w| write_frame_mapping(&mapping, w))
        }
        Command::Pairs {
            a,
            b,
            matching,
            max_distance,
            output,
        } => {
            let (config, params) = matching.resolve()?;
            let max_distance = max_distance.or(config.max_distance);
            if max_distance.is_some_and(|d| d.is_nan() || d < 0.0) {
                return Err(Error::Usage("--max-distance must be non-negative".into()));
            }
            let a = impute_missing_joints(&load_annotation(&a)?.sequence)?;
            let b = impute_missing_joints(&load_annotation(&b)?.sequence)?;
            let manifest = build_pairs_manifest(&a, &b, &params, max_distance)?;
            with_output(output.as_deref(), |w| write_pair_manifest(&manifest, w))
        }
        Command::RenderSkeleton {
            annotation,
            output,
            mapping,
            interp,
            no_face,
            config,
        } => {
            let config = load_config(config.as_deref())?;
            let loaded = load_annotation(&annotation)?;
            let seq = &loaded.sequence;
            let style = config.style(seq.height);
            let face = |i: usize| if no_face { None } else { loaded.faces[i].as_ref() };
            let frames = match mapping {
                None => seq
                    .frames
                    .iter()
                    .enumerate()
                    .map(|(i, pose)| render_skeleton(pose, face(i), seq.width, seq.height, &style))
                    .collect::<Result<Vec<_>, _>>()?,
                Some(mapping_path) => {
                    let mapping = read_mapping_file(&mapping_path)?;
                    check_b_indices(&mapping_path, mapping.b_indices(), seq.len())?;
                    let plan = interpolate_plan(&mapping, interp_factor(interp, &config)?)?;
                    plan.iter()
                        .map(|step| match *step {
                            RenderInstruction::Real { b_index } => {
                                render_skeleton(&seq.frames[b_index], face(b_index), seq.width, seq.height, &style)
                            }
                            RenderInstruction::Blend { b_left, b_right, alpha } => {
                                let pose = interpolate_pose(&seq.frames[b_left], &seq.frames[b_right], alpha);
                                let nearer = if alpha < 0.5 { b_left } else { b_right };
                                render_skeleton(&pose, face(nearer), seq.width, seq.height, &style)
                            }
                        })
                        .collect::<Result<Vec<_>, _>>()?
                }
            };
            write_frames(&output, &frames)?;
            Ok(())
        }
        Command::Align {
            frames,
            annotation,
            output,
        } => {
            let loaded = load_annotation(&annotation)?;
            let paths = list_frames(&frames)?;
            if paths.len() != loaded.faces.len() {
                return Err(Error::Usage(format!(
                    "{} has {} frames but {} annotates {}",
                    frames.display(),
                    paths.len(),
                    annotation.display(),
                    loaded.faces.len()
                )));
            }
            let faces = carry_forward_faces(&loaded.faces)?;
            let images = paths
                .iter()
                .map(|p| RasterImage::read_png(p))
                .collect::<Result<Vec<_>, _>>()?;
            let aligned = align_sequence(&images, &faces)?;
            write_frames(&output, &aligned)?;
            Ok(())
        }
        Command::Assemble {
            mapping,
            frames,
            output,
            interp,
            config,
        } => {
            let config = load_config(config.as_deref())?;
            let factor = interp_factor(interp, &config)?;
            let map = read_mapping_file(&mapping)?;
            let paths = list_frames(&frames)?;
            check_b_indices(&mapping, map.b_indices(), paths.len())?;
            let plan = interpolate_plan(&map, factor)?;

            let mut cache: Vec<Option<RasterImage>> = vec![None; paths.len()];
            let mut load = |i: usize| -> Result<RasterImage, Error> {
                if cache[i].is_none() {
                    cache[i] = Some(RasterImage::read_png(&paths[i])?);
                }
                Ok(cache[i].clone().expect("cached above"))
            };
            let mut out = Vec::with_capacity(plan.len());
            for step in &plan {
                out.push(match *step {
                    RenderInstruction::Real { b_index } => load(b_index)?,
                    RenderInstruction::Blend { b_left, b_right, alpha } => {
                        blend_frames(&load(b_left)?, &load(b_right)?, alpha)?
                    }
                });
            }
            write_frames(&output, &out)?;
            Ok(())
        }
        Command::Validate { annotation } => {
            let doc = AnnotationDocument::from_path(&annotation)?;
            println!(
                "ok: {} ({} frames, {}x{})",
                doc.source_id,
                doc.frames.len(),
                doc.width,
                doc.height
            );
            Ok(())
        }
    }
}

fn read_mapping_file(path: &Path) -> Result<crate::FrameMapping, Error> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(read_frame_mapping(BufReader::new(file))?)
}

fn check_b_indices(path: &Path, b_indices: Vec<usize>, available: usize) -> Result<(), Error> {
    match b_indices.into_iter().find(|&b| b >= available) {
        Some(b) => Err(Error::Manifest(crate::manifest::ManifestError::Parse {
            line: 0,
            message: format!("{}: B frame {b} does not exist ({available} available)", path.display()),
        })),
        None => Ok(()),
    }
}

/// Frames without a face annotation reuse the most recent one; the first frame must have one.
fn carry_forward_faces(faces: &[Option<FaceAnnotation>]) -> Result<Vec<FaceAnnotation>, Error> {
    let mut last: Option<&FaceAnnotation> = None;
    faces
        .iter()
        .enumerate()
        .map(|(i, face)| {
            last = face.as_ref().or(last);
            last.cloned().ok_or_else(|| {
                Error::Schema(SchemaError {
                    path: format!("frames[{i}].face"),
                    message: "alignment needs a face annotation in the first frame".into(),
                })
            })
        })
        .collect()
}

fn thread_count() -> Result<Option<usize>, Error> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got \"{v}\""
            ))),
        },
    }
}

fn report(err: &Error) -> i32 {
    eprintln!("ERROR:{}: {err}", err.kind());
    match err {
        Error::Usage(_) => 1,
        _ => 2,
    }
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("ERROR:usage: {e}");
            return 1;
        }
    };

    let threads = match thread_count() {
        Ok(t) => t,
        Err(e) => return report(&e),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => return report(&Error::Usage(e.to_string())),
    };

    match pool.install(|| execute(cli.command)) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}
