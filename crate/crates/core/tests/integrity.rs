mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use recorder_core::integrity::{
    attestation_of, verify_chain, AttestationService, FlakyService, LocalAttestationService,
    OfflineService, Verdict,
};
use recorder_core::model::{segment_file_name, Digest32};
use recorder_core::sim::generate::demo_scenario;
use recorder_core::store::read_manifest;

use common::{record_demo, record_with, rotating_config};

fn segment_path(dir: &Path, seq: u64) -> PathBuf {
    dir.join("segments").join(segment_file_name(seq))
}

/// Captures every log line so the nonce scan can inspect them.
struct Capture(Mutex<Vec<String>>);

impl log::Log for Capture {
    fn enabled(&self, _: &log::Metadata) -> bool {
        true
    }
    fn log(&self, record: &log::Record) {
        self.0
            .lock()
            .unwrap()
            .push(format!("{} {}", record.target(), record.args()));
    }
    fn flush(&self) {}
}

fn captured_logs() -> &'static Capture {
    static LOGGER: OnceLock<&'static Capture> = OnceLock::new();
    LOGGER.get_or_init(|| {
        let l: &'static Capture = Box::leak(Box::new(Capture(Mutex::new(Vec::new()))));
        log::set_logger(l).expect("logger installed once");
        log::set_max_level(log::LevelFilter::Trace);
        l
    })
}

#[test]
fn five_segment_session_detects_every_single_byte_mutation() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, service) = record_demo(tmp.path(), rotating_config(2_000), 10);
    let dir = out.dir.clone();
    assert_eq!(out.manifest.segments.len(), 5);
    assert_eq!(
        verify_chain(&dir, service.as_ref()).unwrap(),
        Verdict::Valid
    );

    let sizes: Vec<u64> = (0..5)
        .map(|s| fs::metadata(segment_path(&dir, s)).unwrap().len())
        .collect();
    let mut runner = TestRunner::new(Config {
        cases: 300,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (0u64..5, any::<prop::sample::Index>(), 1u8..=255);
    runner
        .run(&strategy, |(seq, at, flip)| {
            let path = segment_path(&dir, seq);
            let original = fs::read(&path).unwrap();
            let offset = at.index(sizes[seq as usize] as usize);
            let mut mutated = original.clone();
            mutated[offset] ^= flip;
            fs::write(&path, &mutated).unwrap();
            let verdict = verify_chain(&dir, service.as_ref()).unwrap();
            fs::write(&path, &original).unwrap();
            prop_assert_ne!(verdict, Verdict::Valid, "seq {} offset {}", seq, offset);
            Ok(())
        })
        .unwrap();
    assert_eq!(
        verify_chain(&dir, service.as_ref()).unwrap(),
        Verdict::Valid
    );
}

#[test]
fn flipped_byte_in_segment_one_is_tampered_at_one() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, service) = record_demo(tmp.path(), rotating_config(2_000), 6);
    assert_eq!(out.manifest.segments.len(), 3);
    let path = segment_path(&out.dir, 1);
    let mut bytes = fs::read(&path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x01;
    fs::write(&path, bytes).unwrap();
    assert_eq!(
        verify_chain(&out.dir, service.as_ref()).unwrap(),
        Verdict::TamperedAt(1)
    );
}

#[test]
fn truncation_deletion_and_reorder_are_detected() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, service) = record_demo(tmp.path(), rotating_config(2_000), 8);
    let dir = &out.dir;
    assert_eq!(out.manifest.segments.len(), 4);
    let copy = |tag: &str| {
        let target = tmp.path().join(tag);
        copy_dir(dir, &target);
        target
    };

    let truncated = copy("truncated");
    let p = segment_path(&truncated, 2);
    let len = fs::metadata(&p).unwrap().len();
    fs::OpenOptions::new()
        .write(true)
        .open(&p)
        .unwrap()
        .set_len(len - 1)
        .unwrap();
    assert_eq!(
        verify_chain(&truncated, service.as_ref()).unwrap(),
        Verdict::TamperedAt(2)
    );

    let deleted = copy("deleted");
    fs::remove_file(segment_path(&deleted, 2)).unwrap();
    assert_eq!(
        verify_chain(&deleted, service.as_ref()).unwrap(),
        Verdict::GapAt(2)
    );

    let swapped = copy("swapped");
    let (a, b) = (segment_path(&swapped, 1), segment_path(&swapped, 2));
    let (ba, bb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    fs::write(&a, bb).unwrap();
    fs::write(&b, ba).unwrap();
    assert_eq!(
        verify_chain(&swapped, service.as_ref()).unwrap(),
        Verdict::TamperedAt(1)
    );

    // A forged chain under a fresh service has no records for this session.
    let fresh = LocalAttestationService::in_memory();
    assert_eq!(verify_chain(dir, &fresh).unwrap(), Verdict::GapAt(0));
}

#[test]
fn tampered_media_is_detected() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, service) = record_demo(tmp.path(), rotating_config(60_000), 3);
    let media_file = walk(&out.dir.join("media"))
        .into_iter()
        .next()
        .expect("media written");
    let mut bytes = fs::read(&media_file).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0xff;
    fs::write(&media_file, bytes).unwrap();
    assert!(matches!(
        verify_chain(&out.dir, service.as_ref()).unwrap(),
        Verdict::TamperedAt(_)
    ));
}

#[test]
fn honest_sessions_verify_with_and_without_outages() {
    let tmp = tempfile::tempdir().unwrap();
    for k in 0..4u64 {
        // Attestation calls are numbered from zero; segment k onwards for
        // `k` outages starting at segment 1.
        let down: Vec<u64> = (1..=k).collect();
        let inner = Arc::new(LocalAttestationService::in_memory());
        let flaky = Arc::new(FlakyService::new(inner.clone(), down));
        let out = record_with(
            &tmp.path().join(k.to_string()),
            rotating_config(2_000),
            demo_scenario(k, 10_000),
            flaky,
        );
        let verdict = verify_chain(&out.dir, inner.as_ref()).unwrap();
        let unattested: Vec<u64> = out
            .manifest
            .segments
            .iter()
            .filter(|s| !s.attested)
            .map(|s| s.seq)
            .collect();
        assert_eq!(unattested.len() as u64, k);
        if k == 0 {
            assert_eq!(verdict, Verdict::Valid);
        } else {
            assert_eq!(verdict, Verdict::GapAt(1), "k = {k}");
        }
    }
}

#[test]
fn offline_recording_still_keeps_data() {
    let tmp = tempfile::tempdir().unwrap();
    let out = record_with(
        tmp.path(),
        rotating_config(2_000),
        demo_scenario(3, 4_000),
        Arc::new(OfflineService),
    );
    assert!(out.manifest.segments.iter().all(|s| !s.attested));
    assert!(!recorder_core::store::query(
        &out.dir,
        &recorder_core::model::StreamId::ALL,
        0,
        u64::MAX
    )
    .unwrap()
    .is_empty());
    let inner = LocalAttestationService::in_memory();
    assert_eq!(verify_chain(&out.dir, &inner).unwrap(), Verdict::GapAt(0));
}

#[test]
fn nonces_never_leave_the_service() {
    let logs = captured_logs();
    let tmp = tempfile::tempdir().unwrap();
    let store_dir = tmp.path().join("service");
    let service = Arc::new(LocalAttestationService::open(&store_dir).unwrap());
    let root = tmp.path().join("sessions");
    let out = record_with(
        &root,
        rotating_config(2_000),
        demo_scenario(5, 6_000),
        service.clone(),
    );
    let session = out.manifest.session_id;

    // The service's own ledger is the only place nonces are written.
    let ledger: serde_json::Value =
        serde_json::from_slice(&fs::read(store_dir.join(format!("{session}.json"))).unwrap())
            .unwrap();
    let records = ledger["records"].as_object().unwrap();
    let mut nonces = Vec::new();
    for r in records.values() {
        let nonce: Digest32 = r["nonce"].as_str().unwrap().parse().unwrap();
        let h: Digest32 = r["h"].as_str().unwrap().parse().unwrap();
        let a: Digest32 = r["a"].as_str().unwrap().parse().unwrap();
        assert_eq!(attestation_of(&h, &nonce), a);
        nonces.push(nonce);
    }
    assert_eq!(nonces.len(), out.manifest.segments.len());

    let verdict = verify_chain(&out.dir, service.as_ref()).unwrap();
    let mut surfaces: Vec<(String, Vec<u8>)> = walk(&root)
        .into_iter()
        .map(|p| (p.display().to_string(), fs::read(&p).unwrap()))
        .collect();
    surfaces.push((
        "attestations".into(),
        serde_json::to_vec(&service.attestations(session).unwrap()).unwrap(),
    ));
    surfaces.push(("verdict".into(), serde_json::to_vec(&verdict).unwrap()));
    surfaces.push((
        "logs".into(),
        logs.0.lock().unwrap().join("\n").into_bytes(),
    ));
    for nonce in &nonces {
        let hex = nonce.to_hex();
        for (name, bytes) in &surfaces {
            assert!(!contains(bytes, hex.as_bytes()), "nonce hex in {name}");
            assert!(
                !contains(bytes, hex.to_uppercase().as_bytes()),
                "nonce HEX in {name}"
            );
            assert!(!contains(bytes, nonce.as_bytes()), "raw nonce in {name}");
        }
    }
}

#[test]
fn reopened_service_still_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let store_dir = tmp.path().join("service");
    let out = {
        let service = Arc::new(LocalAttestationService::open(&store_dir).unwrap());
        record_with(
            &tmp.path().join("s"),
            rotating_config(2_000),
            demo_scenario(2, 5_000),
            service,
        )
    };
    let reopened = LocalAttestationService::open(&store_dir).unwrap();
    assert_eq!(verify_chain(&out.dir, &reopened).unwrap(), Verdict::Valid);
    assert_eq!(read_manifest(&out.dir).unwrap().segments.len(), 3);
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

fn copy_dir(from: &Path, to: &Path) {
    for p in walk(from) {
        let target = to.join(p.strip_prefix(from).unwrap());
        fs::create_dir_all(target.parent().unwrap()).unwrap();
        fs::copy(&p, &target).unwrap();
    }
}
