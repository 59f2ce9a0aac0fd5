use super::*;
use crate::coder::SparseVector;
use crate::synth::gaussian_dictionary;
use proptest::prelude::*;

fn gaussian_patches(n: usize, count: usize, seed: u64) -> PatchMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PatchMatrix::new(DMatrix::from_fn(n, count, |_, _| {
        StandardNormal.sample(&mut rng)
    }))
}

fn assert_unit_atoms(d: &Dictionary) {
    for (k, c) in d.atoms().column_iter().enumerate() {
        assert!((c.norm() - 1.0).abs() <= 1e-9, "atom {k} norm {}", c.norm());
    }
}

#[test]
fn init_is_deterministic() {
    let y = gaussian_patches(64, 1000, 1);
    for init in [InitStrategy::SamplePatches, InitStrategy::RandomGaussian] {
        let a = init_dictionary(&y, 256, 42, init).unwrap();
        let b = init_dictionary(&y, 256, 42, init).unwrap();
        assert_eq!(a, b);
        assert_unit_atoms(&a);
        assert_ne!(a, init_dictionary(&y, 256, 43, init).unwrap());
    }
}

#[test]
fn init_never_yields_zero_atom() {
    let mut m = DMatrix::from_element(4, 3, 0.0);
    m[(0, 1)] = 1.0;
    let y = PatchMatrix::new(m);
    for seed in 0..20 {
        let d = init_dictionary(&y, 3, seed, InitStrategy::SamplePatches).unwrap();
        assert_unit_atoms(&d);
    }
    // More atoms than patches, all patches zero.
    let d = init_dictionary(
        &PatchMatrix::new(DMatrix::zeros(4, 2)),
        5,
        0,
        InitStrategy::SamplePatches,
    )
    .unwrap();
    assert_unit_atoms(&d);
}

#[test]
fn init_with_k_equal_n_uses_every_column() {
    let y = gaussian_patches(8, 10, 2);
    let d = init_dictionary(&y, 10, 5, InitStrategy::SamplePatches).unwrap();
    let mut matched = [false; 10];
    for atom in d.atoms().column_iter() {
        let j = (0..10)
            .find(|&j| {
                let c = y.as_matrix().column(j);
                (c / c.norm() - atom).norm() < 1e-15
            })
            .expect("atom is a normalized column");
        assert!(!matched[j]);
        matched[j] = true;
    }
}

#[test]
fn init_rejects_empty() {
    let y = PatchMatrix::new(DMatrix::zeros(4, 0));
    assert!(init_dictionary(&y, 3, 0, InitStrategy::SamplePatches).is_err());
}

#[test]
fn rank_one_matrix_recovers_direction() {
    let u = DVector::from_column_slice(&[1.0, -2.0, 0.5, 3.0]);
    let v = DVector::from_column_slice(&[0.3, 1.0, -0.7, 2.0, 0.1]);
    let y = PatchMatrix::new(&u * v.transpose());
    let start =
        Dictionary::normalized(DMatrix::from_column_slice(4, 1, &[1.0, 1.0, 1.0, 1.0])).unwrap();
    let codes = SparseCodes::new(
        1,
        (0..5)
            .map(|_| SparseVector::from_entries(vec![(0, 1.0)]).unwrap())
            .collect(),
    )
    .unwrap();
    let (d, x) = ksvd_update(&start, &codes, &y).unwrap();
    let expected = &u / u.norm();
    // First nonzero entry positive: u[0] > 0, so +u/|u|.
    assert!((d.atom(0) - &expected).norm() < 1e-9);
    assert!(reconstruction_error(&d, &x, &y).unwrap() < 1e-18);
}

#[test]
fn exact_codes_stay_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = gaussian_dictionary(8, 12, &mut rng);
    let cols: Vec<SparseVector> = (0..30)
        .map(|j| SparseVector::from_entries(vec![(j % 12, 1.5), ((j * 5 + 1) % 12, -0.5)]).unwrap())
        .collect();
    let codes = SparseCodes::new(12, cols).unwrap();
    let y = d.reconstruct(&codes).unwrap();
    let (d2, x2) = ksvd_update(&d, &codes, &y).unwrap();
    assert!(reconstruction_error(&d2, &x2, &y).unwrap() < 1e-20);
    assert_unit_atoms(&d2);
}

#[test]
fn empty_support_atoms_are_skipped() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = gaussian_dictionary(6, 4, &mut rng);
    let y = gaussian_patches(6, 5, 5);
    let codes = SparseCodes::new(
        4,
        (0..5)
            .map(|_| SparseVector::from_entries(vec![(1, 0.3)]).unwrap())
            .collect(),
    )
    .unwrap();
    let (d2, x2) = ksvd_update(&d, &codes, &y).unwrap();
    for k in [0, 2, 3] {
        assert_eq!(d2.atom(k), d.atom(k));
    }
    // Supports never grow.
    for col in x2.columns() {
        assert!(col.entries().iter().all(|&(i, _)| i == 1));
    }
}

#[test]
fn shape_mismatch() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = gaussian_dictionary(6, 4, &mut rng);
    let codes = SparseCodes::new(4, vec![SparseVector::default(); 3]).unwrap();
    let y = gaussian_patches(6, 5, 5);
    assert!(matches!(
        ksvd_update(&d, &codes, &y),
        Err(Error::Contract(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sweep_never_increases_error(seed in any::<u64>()) {
        // Random 8x6 dictionary, 20 signals coded by OMP with T = 2.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = gaussian_dictionary(8, 6, &mut rng);
        let y = gaussian_patches(8, 20, seed ^ 0xabc);
        let cfg = CoderConfig { max_atoms: 2, ..CoderConfig::default() };
        let x = encode_all(&d, &y, &cfg).unwrap();
        let before = reconstruction_error(&d, &x, &y).unwrap();
        let (d2, x2) = ksvd_update(&d, &x, &y).unwrap();
        let after = reconstruction_error(&d2, &x2, &y).unwrap();
        prop_assert!(after <= before * (1.0 + 1e-9), "{after} > {before}");
        for (c_old, c_new) in x.columns().iter().zip(x2.columns()) {
            let old: Vec<usize> = c_old.entries().iter().map(|e| e.0).collect();
            prop_assert!(c_new.entries().iter().all(|e| old.contains(&e.0)));
        }
        for c in d2.atoms().column_iter() {
            prop_assert!((c.norm() - 1.0).abs() <= 1e-9);
            let first = c.iter().find(|&&v| v != 0.0).copied().unwrap();
            prop_assert!(first > 0.0);
        }
    }
}

#[test]
fn orthonormal_patches_are_fit_exactly() {
    // Columns of a random orthogonal matrix via QR.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = DMatrix::from_fn(64, 64, |_, _| StandardNormal.sample(&mut rng));
    let q = g.qr().q();
    let y = PatchMatrix::new(q);
    let cfg = LearnConfig {
        atoms: 64,
        iters: 3,
        coder: CoderConfig {
            max_atoms: 1,
            ..CoderConfig::default()
        },
        seed: 9,
        ..LearnConfig::default()
    };
    let (d, x, report) = learn(&y, &cfg).unwrap();
    assert!(*report.objective_per_iter.last().unwrap() <= 1e-20);
    assert!(reconstruction_error(&d, &x, &y).unwrap() <= 1e-20);
}

#[test]
fn single_iteration_is_code_then_update() {
    let y = gaussian_patches(16, 120, 7);
    let cfg = LearnConfig {
        atoms: 24,
        iters: 1,
        coder: CoderConfig {
            max_atoms: 3,
            ..CoderConfig::default()
        },
        seed: 11,
        ..LearnConfig::default()
    };
    let (d, x, report) = learn(&y, &cfg).unwrap();

    let d0 = init_dictionary(&y, 24, 11, InitStrategy::SamplePatches).unwrap();
    let x0 = encode_all(&d0, &y, &cfg.coder).unwrap();
    let (mut d1, x1) = ksvd_update(&d0, &x0, &y).unwrap();
    let seed = 11u64.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let replaced = replace_unused_atoms(&mut d1, &x1, &y, seed).unwrap();
    assert_eq!(d, d1);
    assert_eq!(x, x1);
    assert_eq!(report.atoms_replaced_per_iter, vec![replaced]);
}

#[test]
fn learn_is_deterministic_and_reports_every_iteration() {
    let y = gaussian_patches(16, 200, 8);
    let cfg = LearnConfig {
        atoms: 32,
        iters: 4,
        coder: CoderConfig {
            max_atoms: 4,
            ..CoderConfig::default()
        },
        seed: 1,
        ..LearnConfig::default()
    };
    let (d1, x1, r1) = learn(&y, &cfg).unwrap();
    let (d2, x2, r2) = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| learn(&y, &cfg).unwrap());
    assert_eq!(d1, d2);
    assert_eq!(x1, x2);
    assert_eq!(r1, r2);
    assert_eq!(r1.objective_per_iter.len(), 4);
    assert_eq!(r1.coded_error_per_iter.len(), 4);
    assert_eq!(r1.atoms_replaced_per_iter.len(), 4);
    assert_unit_atoms(&d1);
    for (pre, post) in r1
        .coded_error_per_iter
        .iter()
        .zip(&r1.updated_error_per_iter)
    {
        assert!(*post <= pre * (1.0 + 1e-9));
    }
}

#[test]
fn every_atom_used_or_replaced() {
    // Few distinct signals, many atoms: most atoms go unused.
    let base = gaussian_patches(8, 3, 9);
    let y = PatchMatrix::new(DMatrix::from_fn(8, 30, |i, j| base.as_matrix()[(i, j % 3)]));
    let cfg = LearnConfig {
        atoms: 10,
        iters: 3,
        coder: CoderConfig {
            max_atoms: 2,
            ..CoderConfig::default()
        },
        seed: 2,
        ..LearnConfig::default()
    };
    let (d, x, report) = learn(&y, &cfg).unwrap();
    let mut used = [false; 10];
    for col in x.columns() {
        for &(i, _) in col.entries() {
            used[i] = true;
        }
    }
    let unused = used.iter().filter(|u| !**u).count();
    assert_eq!(unused, *report.atoms_replaced_per_iter.last().unwrap());
    assert!(unused > 0);
    assert_unit_atoms(&d);
}

#[test]
fn ista_mode_objective_includes_penalty() {
    let y = gaussian_patches(8, 40, 10);
    let cfg = LearnConfig {
        atoms: 12,
        iters: 2,
        coder: CoderConfig {
            mode: CoderMode::Ista,
            alpha: 0.2,
            ..CoderConfig::default()
        },
        seed: 3,
        ..LearnConfig::default()
    };
    let (d, x, report) = learn(&y, &cfg).unwrap();
    let err = reconstruction_error(&d, &x, &y).unwrap();
    let expected = err + 0.2 * x.l1_norm();
    // d may have replaced atoms with no uses, which do not change DX.
    assert!((report.objective_per_iter[1] - expected).abs() <= 1e-9 * expected);
}

#[test]
fn invalid_config() {
    let y = gaussian_patches(4, 4, 1);
    assert!(learn(
        &y,
        &LearnConfig {
            atoms: 0,
            ..LearnConfig::default()
        }
    )
    .is_err());
    assert!(learn(
        &y,
        &LearnConfig {
            iters: 0,
            ..LearnConfig::default()
        }
    )
    .is_err());
}
