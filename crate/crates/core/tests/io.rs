use proptest::prelude::*;
use topoguard::io::{
    decode, encode, load_labels, load_probs, read_volume, write_volume, MaskVolume, Volume,
};
use topoguard::synth::{generate, soften, PhantomKind, PhantomSpec};
use topoguard::{BinaryMask, Dims, Error, LabelVolume, Spacing};

fn dims() -> impl Strategy<Value = Dims> {
    (1usize..5, 1usize..5, 1usize..5).prop_map(|(d, h, w)| Dims::new(d, h, w).unwrap())
}

fn spacing() -> impl Strategy<Value = Spacing> {
    (0.1f64..5.0, 0.1f64..5.0, 0.1f64..5.0).prop_map(|(a, b, c)| Spacing::new(a, b, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn labels_round_trip(d in dims(), s in spacing(), seed in any::<u64>()) {
        let mut rng = topoguard::rng::SplitMix64::new(seed);
        let data = (0..d.len()).map(|_| rng.below(8) as u8).collect();
        let v: Volume = LabelVolume::new(d, s, 8, data).unwrap().into();
        let bytes = encode(&v);
        prop_assert_eq!(&decode(&bytes).unwrap(), &v);
        prop_assert_eq!(encode(&decode(&bytes).unwrap()), bytes);
    }

    #[test]
    fn masks_round_trip(d in dims(), s in spacing(), bits in proptest::collection::vec(any::<bool>(), 64)) {
        let mask = BinaryMask::from_fn(d, |z, y, x| bits[d.index(z, y, x) % bits.len()]);
        let v: Volume = MaskVolume { mask, spacing: s }.into();
        prop_assert_eq!(decode(&encode(&v)).unwrap(), v);
    }

    #[test]
    fn probs_round_trip_bytes(d in dims(), t in 0.1f64..3.0, seed in any::<u64>()) {
        let labels = LabelVolume::filled(d, Spacing::default(), 4, 1).unwrap();
        let p: Volume = soften(&labels, t, seed).unwrap().into();
        // f32 storage: the second pass is exact
        let once = encode(&p);
        prop_assert_eq!(encode(&decode(&once).unwrap()), once);
    }
}

#[test]
fn files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate(&PhantomSpec::new(PhantomKind::PunchedShell, Dims::cube(24).unwrap())).unwrap();
    let path = dir.path().join("seg.tgv");
    write_volume(&path, &g.clone().into()).unwrap();
    assert_eq!(load_labels(&path).unwrap(), g);
    assert!(matches!(load_probs(&path), Err(Error::DtypeMismatch { .. })));

    let p = soften(&g, 0.5, 3).unwrap();
    let ppath = dir.path().join("prob.tgv");
    write_volume(&ppath, &p.clone().into()).unwrap();
    let back = load_probs(&ppath).unwrap();
    for (a, b) in back.data().iter().zip(p.data()) {
        assert!((a - b).abs() < 1e-7);
    }
    assert!(matches!(
        read_volume(dir.path().join("missing.tgv")),
        Err(Error::Io { .. })
    ));
}

fn nifti_header(dim: &[i16], datatype: i16, bitpix: i16, pixdim: [f32; 3]) -> Vec<u8> {
    let mut b = vec![0u8; 352];
    b[0..4].copy_from_slice(&348i32.to_le_bytes());
    b[40..42].copy_from_slice(&(dim.len() as i16).to_le_bytes());
    for (i, d) in dim.iter().enumerate() {
        b[42 + 2 * i..44 + 2 * i].copy_from_slice(&d.to_le_bytes());
    }
    b[70..72].copy_from_slice(&datatype.to_le_bytes());
    b[72..74].copy_from_slice(&bitpix.to_le_bytes());
    b[76..80].copy_from_slice(&1.0f32.to_le_bytes());
    for (i, p) in pixdim.iter().enumerate() {
        b[80 + 4 * i..84 + 4 * i].copy_from_slice(&p.to_le_bytes());
    }
    b[108..112].copy_from_slice(&352.0f32.to_le_bytes());
    b[344..348].copy_from_slice(b"n+1\0");
    b
}

#[test]
fn nifti_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    // x = 3, y = 2, z = 1; stored x fastest
    let mut bytes = nifti_header(&[3, 2, 1], 512, 16, [0.5, 0.75, 2.0]);
    for v in [0u16, 1, 2, 3, 0, 1] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let path = dir.path().join("seg.nii");
    std::fs::write(&path, &bytes).unwrap();
    let g = load_labels(&path).unwrap();
    assert_eq!(g.dims(), Dims::new(1, 2, 3).unwrap());
    assert_eq!(g.spacing(), Spacing::new(2.0, 0.75, 0.5).unwrap());
    assert_eq!(g.get(0, 1, 0), 3);
    assert_eq!(g.data(), &[0, 1, 2, 3, 0, 1]);

    // 4D float likelihoods, two channels over a 1x1x2 grid
    let mut bytes = nifti_header(&[2, 1, 1, 2], 16, 32, [1.0, 1.0, 1.0]);
    for v in [0.25f32, 0.5, 0.75, 0.5] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let ppath = dir.path().join("prob.nii");
    std::fs::write(&ppath, &bytes).unwrap();
    let p = load_probs(&ppath).unwrap();
    assert_eq!(p.channels(), 2);
    assert_eq!(p.get(1, 0), 0.75);

    let gz = dir.path().join("seg.nii.gz");
    std::fs::write(&gz, [0x1f, 0x8b, 8, 0]).unwrap();
    assert!(matches!(load_labels(&gz), Err(Error::NiftiCompressed)));
}
