//! Derived streams: band power, experience-report spotting, face
//! redaction and analyzer-service clients.

mod bandpower;
mod blur;
pub mod clients;
mod des;
pub mod sentiment;

pub use bandpower::{band_power, hann, BandDefinition, BandPowerAnalyzer, Periodogram};
pub use blur::{blur_frame, is_consented, is_pixelated, mosaic, BlurOutcome, MOSAIC_CELL_PX};
pub use clients::{
    ClientError, Clients, DetectError, FaceDetection, FailurePlan, FrameAnalysis, MockFailures,
    ServiceKind,
};
pub use des::{spot_des, DesSpotter, SpottedReport};

use crate::model::Sentiment;

/// Builds a sentiment payload from client scores.
pub fn sentiment_payload(scores: [f64; 4], ref_transcript_seq: u64) -> Sentiment {
    Sentiment {
        positive: scores[0],
        negative: scores[1],
        mixed: scores[2],
        neutral: scores[3],
        ref_transcript_seq,
    }
}
