//! Deterministic stand-ins for the recorder's sensors.

mod audio;
mod camera;
mod driver;
mod eeg;
pub mod generate;
mod gsr;
mod headset;
pub mod raster;
mod runner;
mod scenario;

pub use audio::{AudioDriver, AUDIO_EXT};
pub use camera::{
    frame_dims_for, to_pixels, CameraDriver, FrameSizeError, FACE_CELL_PX, FRAME_EXT,
};
pub use driver::{
    sub_seed, Capture, FaceTruth, FrameTruth, RawAudio, RawFrame, Schedule, SensorDriver, Sidecar,
    UtteranceTruth,
};
pub use eeg::{EegDriver, EEG_STEPS_PER_UV};
pub use gsr::{scr_bump, GsrDriver, GSR_MAX_US, GSR_MIN_US};
pub use headset::HeadsetStateDriver;
pub use raster::Raster;
pub use runner::{
    run_drivers, CaptureSink, ClockMap, ClockMode, RunError, RunReport, SinkError, StreamRunStats,
    DEFAULT_STEP_MS,
};
pub use scenario::{
    estimated_utterance_ms, EventKind, NormBox, ScenarioEvent, ScenarioScript, TONE_AMPLITUDE_UV,
};

use crate::model::validate::ValidationReport;
use crate::model::{SessionConfig, StreamId};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Scenario(ValidationReport),
    #[error(transparent)]
    FrameSize(#[from] FrameSizeError),
}

fn checked(config: &SessionConfig, scenario: &ScenarioScript) -> Result<(), SimError> {
    let report = scenario.validate(config);
    if report.is_empty() {
        Ok(())
    } else {
        Err(SimError::Scenario(report))
    }
}

pub fn make_eeg_driver(
    config: &SessionConfig,
    scenario: &ScenarioScript,
) -> Result<Box<dyn SensorDriver>, SimError> {
    checked(config, scenario)?;
    Ok(Box::new(EegDriver::new(config, scenario)))
}

pub fn make_gsr_driver(
    config: &SessionConfig,
    scenario: &ScenarioScript,
) -> Result<Box<dyn SensorDriver>, SimError> {
    checked(config, scenario)?;
    Ok(Box::new(GsrDriver::new(config, scenario)))
}

pub fn make_camera_driver(
    config: &SessionConfig,
    scenario: &ScenarioScript,
) -> Result<Box<dyn SensorDriver>, SimError> {
    checked(config, scenario)?;
    Ok(Box::new(CameraDriver::new(config, scenario)?))
}

pub fn make_audio_driver(
    config: &SessionConfig,
    scenario: &ScenarioScript,
) -> Result<Box<dyn SensorDriver>, SimError> {
    checked(config, scenario)?;
    Ok(Box::new(AudioDriver::new(config, scenario)))
}

pub fn make_headset_state_driver(
    config: &SessionConfig,
    scenario: &ScenarioScript,
) -> Result<Box<dyn SensorDriver>, SimError> {
    checked(config, scenario)?;
    Ok(Box::new(HeadsetStateDriver::new(config, scenario)))
}

/// Every driver whose streams are enabled in `config`.
pub fn make_drivers(
    config: &SessionConfig,
    scenario: &ScenarioScript,
) -> Result<Vec<Box<dyn SensorDriver>>, SimError> {
    checked(config, scenario)?;
    let mut out: Vec<Box<dyn SensorDriver>> = Vec::new();
    if config.enabled(StreamId::EegRaw) {
        out.push(Box::new(EegDriver::new(config, scenario)));
    }
    if config.enabled(StreamId::AudioChunk) {
        out.push(Box::new(AudioDriver::new(config, scenario)));
    }
    if config.enabled(StreamId::ImageFrame) {
        out.push(Box::new(CameraDriver::new(config, scenario)?));
    }
    if config.enabled(StreamId::Gsr) {
        out.push(Box::new(GsrDriver::new(config, scenario)));
    }
    if config.enabled(StreamId::FacialExpression) || config.enabled(StreamId::Cognition) {
        out.push(Box::new(HeadsetStateDriver::new(config, scenario)));
    }
    Ok(out)
}
