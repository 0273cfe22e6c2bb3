//! Ordered surfel approximations of triangle-mesh scenes.
//!
//! The pipeline captures each scene node from several orthographic directions
//! ([`raster`]), orders the captured samples so that every prefix is evenly
//! spread ([`sampling`]), and at runtime draws the prefix whose spacing
//! matches the desired on-screen surfel size ([`prefixmath`], [`renderer`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod color;
pub mod error;
pub mod geom;
pub mod lodpipe;
pub mod metrics;
pub mod prefixmath;
pub mod raster;
pub mod renderer;
pub mod sampling;
pub mod scene;
pub mod spatial;

pub use camera::{Camera, CameraPose, Projection, Viewport};
pub use color::Rgba8;
pub use error::{Error, Result};
pub use geom::Aabb;
pub use lodpipe::{
    generate_lods, read_manifest, read_surfel_file, write_manifest, write_surfel_file, LodPolicy,
};
pub use metrics::{min_neighbor_distances, ssim, DistanceStats, SsimResult};
pub use prefixmath::{
    BudgetController, FoveaRing, FoveaZones, PrefixModel, RadiusRule, RenderAction, RenderItem,
    SelectOptions,
};
pub use raster::{capture_gbuffers, CaptureConfig, CaptureDirections, GBuffer, GBufferSet};
pub use renderer::{render_frame, FrameBuffer, FrameStats};
pub use sampling::{
    collect_candidates, exact_greedy_permutation, sample_progressive, sample_random, CandidateSet,
    SamplingConfig, Surfel, SurfelCloud,
};
pub use scene::{MeshId, NodeId, Scene, SceneBuilder, SceneNode, TriangleMesh};

pub use glam;
