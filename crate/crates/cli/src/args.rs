use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use surfel_core::RadiusRule;

#[derive(Debug, Parser)]
#[command(
    name = "surfel",
    version,
    about = "Build, render and benchmark progressive surfel LODs"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug). `RUST_LOG` overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate surfel LODs for a scene and write the output directory.
    Build(BuildArgs),
    /// Render one frame of a built scene.
    Render(RenderArgs),
    /// Dump capture G-buffer channels of one node as images.
    Gbuffer(GbufferArgs),
    /// Nearest-neighbour distance statistics of LOD prefixes as CSV.
    Stats(StatsArgs),
    /// Mean SSIM of two images, optionally writing the index map.
    Ssim(SsimArgs),
    /// Benchmarks writing CSV reports.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Serve a directory (typically a build output) over HTTP.
    Serve(ServeArgs),
    /// Export formula test vectors as JSON.
    Vectors(VectorsArgs),
    /// Write a seeded stand-in scene.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Scene manifest (file or directory) or a single OBJ/PLY mesh.
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Capture resolution in pixels per side.
    #[arg(long, default_value_t = 1024)]
    pub resolution: u32,
    /// Candidates drawn per sampling round.
    #[arg(long, default_value_t = 200)]
    pub sample_size: usize,
    /// Sampling rounds after which the draw grows by one.
    #[arg(long, default_value_t = 500)]
    pub k: usize,
    #[arg(long, default_value_t = 200_000)]
    pub max_surfels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Leaves below this triangle count get no LOD of their own.
    #[arg(long, default_value_t = 1000)]
    pub min_triangles: u64,
    /// Inner nodes above this triangle count get a LOD.
    #[arg(long, default_value_t = 10_000)]
    pub lod_threshold: u64,
    /// Capture parents from geometry instead of their children's LODs.
    #[arg(long)]
    pub top_down: bool,
    /// Keep back faces during capture.
    #[arg(long)]
    pub no_cull: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Build output directory or its manifest.
    #[arg(long)]
    pub scene: PathBuf,
    /// JSON camera pose: position, target, optional up, fov_y_degrees, ortho_height.
    #[arg(long)]
    pub camera: PathBuf,
    #[arg(long, default_value = "1280x720")]
    pub size: Size,
    /// Surfel size in pixels.
    #[arg(long, default_value_t = 2.0)]
    pub surfel_size: f64,
    /// Draw every leaf as triangles through the LOD traversal.
    #[arg(long)]
    pub no_lod: bool,
    /// Plain triangle render of all leaves, ignoring LODs and culling by node.
    #[arg(long, conflicts_with = "no_lod")]
    pub geometry: bool,
    #[arg(long, value_enum, default_value_t = Rule::Consistent)]
    pub rule: Rule,
    /// Output image; `.png` or `.ppm`.
    #[arg(long, default_value = "frame.png")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GbufferArgs {
    /// Scene manifest (file or directory) or a single OBJ/PLY mesh.
    #[arg(long)]
    pub scene: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Node id (default: root).
    #[arg(long)]
    pub node: Option<u32>,
    #[arg(long, default_value_t = 512)]
    pub resolution: u32,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Channel::Color, Channel::Normal, Channel::Position, Channel::Depth, Channel::Coverage])]
    pub channel: Vec<Channel>,
    #[arg(long, value_enum, default_value_t = ImageFormat::Png)]
    pub format: ImageFormat,
    #[arg(long)]
    pub no_cull: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Build output directory or its manifest.
    #[arg(long)]
    pub scene: PathBuf,
    /// Node whose LOD is measured (default: root).
    #[arg(long)]
    pub node: Option<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 1000, 10_000])]
    pub prefixes: Vec<usize>,
    /// Divide distances by the LOD bounds diagonal.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SsimArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Write the per-window index map as a grayscale image.
    #[arg(long)]
    pub map: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Per-view counts, frame times and SSIM with and without LODs.
    Views(BenchViewsArgs),
    /// Frame-time distribution over a grid of positions with the size controller active.
    Grid(BenchGridArgs),
    /// Capture, candidate and sampling stage timings per target count.
    Preprocess(BenchPreprocessArgs),
}

#[derive(Debug, Args)]
pub struct BenchViewsArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Number of orbit views around the scene.
    #[arg(long, default_value_t = 8)]
    pub views: usize,
    /// JSON list of camera poses instead of orbit views.
    #[arg(long)]
    pub cameras: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [Size::new(320, 240), Size::new(640, 480)])]
    pub sizes: Vec<Size>,
    #[arg(long, default_value_t = 2.0)]
    pub surfel_size: f64,
    /// Orbit radius as a multiple of the scene's half diagonal.
    #[arg(long, default_value_t = 2.0)]
    pub distance: f32,
    #[arg(long, default_value_t = 60.0)]
    pub fov: f32,
    #[arg(long, value_enum, default_value_t = Rule::Consistent)]
    pub rule: Rule,
    #[arg(long, value_enum, default_value_t = Clock::Wall)]
    pub clock: Clock,
}

#[derive(Debug, Args)]
pub struct BenchGridArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Number of positions.
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    /// Eye height above the bottom of the region.
    #[arg(long, default_value_t = 1.7)]
    pub height: f32,
    /// Region as `minx,miny,minz,maxx,maxy,maxz` (default: scene bounds).
    #[arg(long, value_delimiter = ',', num_args = 6)]
    pub region: Option<Vec<f32>>,
    /// Target frame time in milliseconds.
    #[arg(long, default_value_t = 16.0)]
    pub t_target: f64,
    #[arg(long, default_value_t = 2.0)]
    pub initial_size: f64,
    #[arg(long, default_value = "320x240")]
    pub size: Size,
    #[arg(long, default_value_t = 60.0)]
    pub fov: f32,
    /// Renders per view; the median time is recorded.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Untimed warm-up in milliseconds.
    #[arg(long, default_value_t = 100.0)]
    pub warmup: f64,
    #[arg(long, value_enum, default_value_t = Rule::Consistent)]
    pub rule: Rule,
    #[arg(long, value_enum, default_value_t = Clock::Wall)]
    pub clock: Clock,
}

#[derive(Debug, Args)]
pub struct BenchPreprocessArgs {
    /// Scene manifest (file or directory) or a single OBJ/PLY mesh.
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Node whose subtree geometry is captured (default: root).
    #[arg(long)]
    pub node: Option<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [10_000usize, 50_000, 100_000])]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 1024)]
    pub resolution: u32,
    #[arg(long, default_value_t = 200)]
    pub sample_size: usize,
    #[arg(long, default_value_t = 500)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Capture rounds whose median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub dir: PathBuf,
    /// Listen address; port 0 picks a free port.
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
}

#[derive(Debug, Args)]
pub struct VectorsArgs {
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: SceneKind,
    /// Output directory (scene manifest and meshes).
    #[arg(long)]
    pub out: PathBuf,
    /// Triangles of the reference object, or of each grid instance.
    #[arg(long)]
    pub triangles: Option<u32>,
    #[arg(long, default_value_t = 8)]
    pub rows: u32,
    #[arg(long, default_value_t = 8)]
    pub cols: u32,
    #[arg(long, default_value_t = 3.0)]
    pub spacing: f32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SceneKind {
    /// Single high-poly test object.
    Reference,
    /// Grid of instanced objects under an octree hierarchy.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Consistent,
    AsPrinted,
}

impl From<Rule> for RadiusRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Consistent => RadiusRule::Consistent,
            Rule::AsPrinted => RadiusRule::AsPrinted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Clock {
    Wall,
    /// Thread CPU time.
    Cpu,
}

impl From<Clock> for surfel_bench::FrameClock {
    fn from(c: Clock) -> Self {
        match c {
            Clock::Wall => surfel_bench::FrameClock::Wall,
            Clock::Cpu => surfel_bench::FrameClock::ThreadCpu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Channel {
    Color,
    Normal,
    Position,
    Depth,
    Coverage,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Color => "color",
            Channel::Normal => "normal",
            Channel::Position => "position",
            Channel::Depth => "depth",
            Channel::Coverage => "coverage",
        }
    }
}

impl From<Channel> for surfel_core::raster::GBufferChannel {
    fn from(c: Channel) -> Self {
        use surfel_core::raster::GBufferChannel as G;
        match c {
            Channel::Color => G::Color,
            Channel::Normal => G::Normal,
            Channel::Position => G::Position,
            Channel::Depth => G::Depth,
            Channel::Coverage => G::Coverage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ImageFormat {
    Png,
    Ppm,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Ppm => "ppm",
        }
    }
}

/// Image size written as `WxH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Size {
    pub width: u32,
    pub height: u32,
}

impl Size {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WxH, got '{s}'"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("invalid dimension '{v}' in '{s}'"))
        };
        Ok(Self::new(parse(w)?, parse(h)?))
    }
}

impl std::fmt::Display for Size {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}
