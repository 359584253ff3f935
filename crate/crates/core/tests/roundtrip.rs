mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rdh_core::band::BandThresholds;
use rdh_core::hia::PohMode;
use rdh_core::spep::SubbandThresholds;
use rdh_core::{capacity_scan, embed, extract, load_pgm, save_pgm, ColorParity, EmbedConfig};

use common::{random_bits, saturating, texture};

fn configs() -> Vec<(&'static str, EmbedConfig)> {
    let black = EmbedConfig {
        start_color: ColorParity::Black,
        ..EmbedConfig::default()
    };
    let one_sub = EmbedConfig::default().with_f_thresholds(&[]).unwrap();
    let three_sub = EmbedConfig::default()
        .with_f_thresholds(&[0.05, 0.02, 0.01])
        .unwrap();
    let mut eq14 = EmbedConfig::default();
    eq14.echo.poh_mode = PohMode::Eq14;
    let mut custom = EmbedConfig::default();
    custom.echo.thresholds = BandThresholds::from_tenths([20, 40, 55, 80, 120, 170], 5).unwrap();
    let mut small_k = EmbedConfig::default();
    small_k.echo.k_max = 2;
    small_k.echo.l_ulcf_size = 500;
    let levels = EmbedConfig {
        max_levels: 20,
        ..EmbedConfig::default()
    };
    vec![
        ("default", EmbedConfig::default()),
        ("black start", black),
        ("single sub-band", one_sub),
        ("three sub-bands", three_sub),
        ("eq14", eq14),
        ("custom thresholds", custom),
        ("small k and ulcf", small_k),
        ("tau", EmbedConfig::default().with_tau(7, 4)),
        ("twenty levels", levels),
    ]
}

#[test]
fn every_config_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, cfg) in configs() {
        for _ in 0..4 {
            let cover = texture(&mut rng, 72, 60);
            let capacity = capacity_scan(&cover, &cfg).unwrap().payload_capacity() as usize;
            let payload = random_bits(&mut rng, capacity * 3 / 4);
            let out = embed(&cover, &payload, &cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
            let back = extract(&out.marked).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(back.cover, cover, "{name}");
            assert_eq!(back.payload, payload, "{name}");
            assert_eq!(back.header.config, cfg.echo, "{name}");
            assert_eq!(back.header.start_color, cfg.start_color, "{name}");
        }
    }
}

#[test]
fn multi_level_payloads_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cover = texture(&mut rng, 96, 96);
    let cfg = EmbedConfig::default();
    let capacity = capacity_scan(&cover, &cfg).unwrap().payload_capacity() as usize;
    let payload = random_bits(&mut rng, capacity * 2);
    let out = embed(&cover, &payload, &cfg).unwrap();
    assert!(out.report.levels >= 2);
    let back = extract(&out.marked).unwrap();
    assert_eq!(back.payload, payload);
    assert_eq!(back.cover, cover);
}

#[test]
fn saturated_covers_round_trip_through_pgm() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut done = 0;
    while done < 8 {
        let cover = saturating(&mut rng, 64, 48);
        let cfg = EmbedConfig::default().with_tau(3, 3);
        let capacity = capacity_scan(&cover, &cfg).unwrap().payload_capacity() as usize;
        if capacity == 0 {
            continue;
        }
        let payload = random_bits(&mut rng, capacity / 2);
        let out = embed(&cover, &payload, &cfg).unwrap();
        let marked = load_pgm(&save_pgm(&out.marked)).unwrap();
        let back = extract(&marked).unwrap();
        assert_eq!(back.payload, payload);
        assert_eq!(back.cover, cover);
        done += 1;
    }
}

#[test]
fn report_matches_extraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cover = texture(&mut rng, 64, 64);
    let payload = random_bits(&mut rng, 300);
    let out = embed(&cover, &payload, &EmbedConfig::default()).unwrap();
    let back = extract(&out.marked).unwrap();
    assert_eq!(out.report.payload_bits, 300);
    assert_eq!(back.segments, out.report.segments);
    assert_eq!(back.traces, out.report.traces);
    assert_eq!(
        out.report.bitstream_bits(),
        back.header.total_bitstream_len as usize
    );
    assert!(out.report.psnr > 40.0);
}

#[test]
fn unused_subband_list_is_accepted() {
    assert_eq!(SubbandThresholds::none().count(), 1);
}
