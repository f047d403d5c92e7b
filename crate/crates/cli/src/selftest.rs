//! Fast sanity checks runnable from an installed binary.

use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zrecover::field::{Field, FieldModulus};
use zrecover::matrix::{build_matrix, encode, MatrixParams, Measurement, SparseIntVector};
use zrecover::recovery::{decode, DecodeConfig, DecodeStatus};
use zrecover::rootfind::{roots_exhaustive, roots_split, Poly};
use zrecover::sweep::{self, SparsityTerm, SweepGrid};
use zrecover::RootStrategy;

type Check = fn() -> (bool, String);

fn check(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "ok  " } else { "FAIL" });
    ok
}

fn small_examples() -> (bool, String) {
    let p = FieldModulus::new(7).unwrap();
    // slack large enough that k_j = 1 for every column
    let mx = build_matrix(MatrixParams::new(p, 4, 6, 100.0).unwrap());
    let x = SparseIntVector::from_pairs(6, vec![(2, BigInt::from(3))]).unwrap();
    let y = encode(&mx, &x).unwrap();
    let want: Vec<BigInt> = [3, 6, -9, 3].map(BigInt::from).to_vec();
    let mut ok = y.values() == want.as_slice();
    let r = decode(&mx, &y, &DecodeConfig::default()).unwrap();
    ok &= r.is_success() && r.x == x;
    let x = SparseIntVector::from_pairs(6, vec![(2, BigInt::from(10))]).unwrap();
    let r = decode(&mx, &encode(&mx, &x).unwrap(), &DecodeConfig::default()).unwrap();
    ok &= r.is_success() && r.x == x && r.stats.inner_steps == 2;
    let r = decode(&mx, &Measurement::new(vec![BigInt::from(0); 4]), &DecodeConfig::default()).unwrap();
    ok &= r.is_success() && r.x.is_zero();
    (ok, "p=7 encode/decode examples".into())
}

fn roots_agree() -> (bool, String) {
    let mut bad = 0;
    for prime in [101u64, 1009] {
        let p = FieldModulus::new(prime).unwrap();
        let f = Field::new(p);
        let mut rng = ChaCha8Rng::seed_from_u64(prime);
        for n in 0..200 {
            let deg = rng.gen_range(1..=8);
            let poly = (0..deg)
                .fold(Poly::constant(p.one()), |acc, _| acc.mul(&Poly::linear(p, p.elem(rng.gen_range(0..prime))), &f));
            bad += usize::from(roots_exhaustive(&poly, &f) != roots_split(&poly, n, &f));
        }
    }
    (bad == 0, format!("400 polynomials, {bad} mismatches"))
}

fn small_sweep() -> (bool, String) {
    let grid = SweepGrid {
        primes: vec![101, 1009],
        rows: vec![8, 16],
        magnitudes: ["10", "1e6", "1e18"].iter().map(|m| sweep::parse_magnitude(m).unwrap()).collect(),
        sparsity: vec![SparsityTerm::Fixed(1), SparsityTerm::Fraction(4), SparsityTerm::Fraction(2)],
        trials: 5,
        seed: 1,
        slack: 1.0,
        roots: RootStrategy::default(),
    };
    let records = sweep::run_sweep(&grid).expect("valid grid");
    let s = sweep::summarize(&records);
    (
        s.failures == 0 && s.successes == s.trials,
        format!("{} round trips, {} failures, max field ratio {:.2}", s.trials, s.failures, s.max_field_ratio),
    )
}

fn oversparse() -> (bool, String) {
    let grid = SweepGrid {
        primes: vec![101],
        rows: vec![8],
        magnitudes: vec![BigInt::from(1000)],
        sparsity: vec![SparsityTerm::Fixed(6)],
        trials: 20,
        seed: 2,
        slack: 1.0,
        roots: RootStrategy::default(),
    };
    let records = sweep::run_sweep(&grid).expect("valid grid");
    let exceeded = records.iter().filter(|r| r.status == DecodeStatus::SparsityExceeded).count();
    let wrong = records.iter().filter(|r| !r.correct).count();
    (wrong == 0, format!("s=6 > m/2: {exceeded}/20 sparsity-exceeded, {wrong} wrong vectors"))
}

pub fn run() -> u8 {
    let t = Instant::now();
    let checks: [(&str, Check); 4] = [
        ("examples", small_examples),
        ("root routes", roots_agree),
        ("round trips", small_sweep),
        ("over-sparse", oversparse),
    ];
    let mut all = true;
    for (name, f) in checks {
        let (ok, detail) = f();
        all &= check(name, ok, detail);
    }
    println!("selftest {} in {:.2}s", if all { "passed" } else { "FAILED" }, t.elapsed().as_secs_f64());
    if all {
        0
    } else {
        1
    }
}
