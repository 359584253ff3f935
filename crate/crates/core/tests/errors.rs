mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rdh_core::codec::reserved_positions;
use rdh_core::{capacity_scan, embed, extract, load_pgm, EmbedConfig, Error, GrayImage};

use common::{random_bits, texture};

fn marked() -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cover = texture(&mut rng, 48, 48);
    let payload = random_bits(&mut rng, 200);
    embed(&cover, &payload, &EmbedConfig::default())
        .unwrap()
        .marked
}

fn flip_reserved(img: &GrayImage, k: usize) -> GrayImage {
    let mut out = img.clone();
    let p = reserved_positions(img.width(), img.height())[k];
    out.pixels_mut()[p] ^= 1;
    out
}

#[test]
fn magic_bit_flip_is_detected() {
    let err = extract(&flip_reserved(&marked(), 0)).unwrap_err();
    assert!(matches!(err, Error::BadMagic(_)), "{err}");
}

#[test]
fn header_body_flip_is_detected() {
    let err = extract(&flip_reserved(&marked(), 30)).unwrap_err();
    assert!(
        matches!(
            err,
            Error::CrcMismatch { .. } | Error::InconsistentHeader(_)
        ),
        "{err}"
    );
}

#[test]
fn unmarked_image_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    assert!(extract(&texture(&mut rng, 40, 40)).is_err());
    assert!(extract(&GrayImage::filled(16, 16, 0).unwrap()).is_err());
}

#[test]
fn tiny_images_are_refused() {
    let img = GrayImage::filled(7, 30, 128).unwrap();
    assert!(matches!(
        embed(&img, &[], &EmbedConfig::default()),
        Err(Error::ImageTooSmall { .. })
    ));
    assert!(matches!(extract(&img), Err(Error::ImageTooSmall { .. })));
    assert!(matches!(
        capacity_scan(&img, &EmbedConfig::default()),
        Err(Error::ImageTooSmall { .. })
    ));
}

#[test]
fn oversized_payload_fails_cleanly() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let cover = texture(&mut rng, 32, 32);
    let before = cover.clone();
    let payload = random_bits(&mut rng, 32 * 32 * 8);
    let err = embed(&cover, &payload, &EmbedConfig::default()).unwrap_err();
    assert!(
        matches!(
            err,
            Error::CapacityExceeded { .. } | Error::HeaderOverflow { .. }
        ),
        "{err}"
    );
    assert_eq!(cover, before);
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = EmbedConfig::default();
    cfg.echo.k_max = 0;
    let img = GrayImage::filled(16, 16, 100).unwrap();
    assert!(matches!(
        embed(&img, &[], &cfg),
        Err(Error::InvalidConfig(_))
    ));
    assert!(EmbedConfig::default().with_f_thresholds(&[1.5]).is_err());
    assert!(EmbedConfig::default()
        .with_f_thresholds(&[0.1, 0.5])
        .is_err());
}

#[test]
fn malformed_pgm_is_rejected() {
    assert!(load_pgm(b"P2\n2 2\n255\n1 2 3 4").is_err());
    assert!(load_pgm(b"P5\n2 2\n255\n\x01").is_err());
    assert!(load_pgm(b"P5\n2 2\n65535\n\x01\x02\x03\x04").is_err());
}
