//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use zrecover::field::{Field, FieldModulus};
use zrecover::matrix::{build_matrix, encode, MatrixParams, Measurement};
use zrecover::recovery::{decode, DecodeConfig, DecodeStatus};
use zrecover::recurrence::{berlekamp_massey, recurrence_check};
use zrecover::rootfind::{roots_exhaustive, roots_split, Poly};
use zrecover::sweep::{self, Cell, SparsityTerm, SweepGrid, TrialRecord};
use zrecover::RootStrategy;

const SEED: u64 = 20240611;

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: u32, name: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict { id, name, pass, detail }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut out = Vec::new();

    let t = Instant::now();
    let records = roundtrip_sweep();
    let sweep_secs = t.elapsed().as_secs_f64();
    out.push(c1(&records, sweep_secs));
    out.push(c2(&records));
    out.push(c3(&records));
    out.push(c4(&records));
    out.push(c5(&records));
    out.push(c6(&records));
    out.push(c7());
    out.push(c8());
    out.push(c9());
    out.push(c10());

    let mut failed = 0;
    for v in &out {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {}: {}", v.id, v.name, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria passed in {:.1}s", out.len() - failed, out.len(), started.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn roundtrip_sweep() -> Vec<TrialRecord> {
    let grid = SweepGrid {
        primes: vec![101, 1009, 65537],
        rows: vec![8, 16, 32],
        magnitudes: ["10", "1e6", "1e18"].iter().map(|m| sweep::parse_magnitude(m).unwrap()).collect(),
        sparsity: vec![SparsityTerm::Fixed(1), SparsityTerm::Fraction(4), SparsityTerm::Fraction(2)],
        trials: 50,
        seed: SEED,
        slack: 1.0,
        roots: RootStrategy::default(),
    };
    sweep::run_sweep(&grid).expect("grid parameters are valid")
}

fn first_bad(records: &[TrialRecord], bad: impl Fn(&TrialRecord) -> bool) -> Option<&TrialRecord> {
    records.iter().find(|r| bad(r))
}

fn describe(r: &TrialRecord) -> String {
    format!(
        "p={} m={} M={} s={} trial={} status={} L={} kappa={} lifts={} gamma={}",
        r.p,
        r.m,
        r.magnitude,
        r.s,
        r.trial,
        r.status.as_str(),
        r.steps,
        r.inner_steps,
        r.lifts,
        r.valuation_total
    )
}

fn c1(records: &[TrialRecord], secs: f64) -> Verdict {
    let ok = records.iter().filter(|r| r.status == DecodeStatus::Success && r.correct).count();
    let mut detail = format!("{ok}/{} trials recovered exactly over 81 cells ({secs:.1}s)", records.len());
    if let Some(r) = first_bad(records, |r| !(r.status == DecodeStatus::Success && r.correct)) {
        detail += &format!("; first miss: {}", describe(r));
    }
    verdict(1, "exact round trip", ok == records.len() && records.len() == 4050, detail)
}

fn c2(records: &[TrialRecord]) -> Verdict {
    let bad = records.iter().filter(|r| !r.digit_bound_ok).count();
    let max_lifts = records.iter().map(|r| r.lifts).max().unwrap_or(0);
    let max_digits = records.iter().map(|r| r.inner_steps).max().unwrap_or(0);
    let mut detail = format!(
        "{bad} violations of lifts <= sum(gamma) <= log_p(2M) (max lifts {max_lifts}; max digits extracted {max_digits})"
    );
    if let Some(r) = first_bad(records, |r| !r.digit_bound_ok) {
        detail += &format!("; first: {}", describe(r));
    }
    verdict(2, "lifting-step bound", bad == 0, detail)
}

fn c3(records: &[TrialRecord]) -> Verdict {
    let bad = records.iter().filter(|r| !r.step_bound_ok).count();
    let max_l = records.iter().map(|r| r.steps).max().unwrap_or(0);
    verdict(3, "main steps L <= s", bad == 0, format!("{bad} violations (max L {max_l})"))
}

fn c4(records: &[TrialRecord]) -> Verdict {
    let ok: Vec<_> = records.iter().filter(|r| r.status == DecodeStatus::Success).collect();
    let bad = ok.iter().filter(|r| !r.magnitude_bound_ok).count();
    let mut detail = format!("{}/{} successful trials within the magnitude bound", ok.len() - bad, ok.len());
    if let Some(r) = ok.iter().find(|r| !r.magnitude_bound_ok) {
        detail += &format!("; first: {} peak={}", describe(r), r.peak_magnitude);
    }
    verdict(4, "peak magnitude bound", bad == 0 && !ok.is_empty(), detail)
}

fn c5(records: &[TrialRecord]) -> Verdict {
    let spread = sweep::ring_ratio_spread(records);
    let worst = spread.iter().max_by(|a, b| a.factor.total_cmp(&b.factor)).expect("non-empty sweep");
    let means: Vec<String> = worst.means.iter().map(|(m, r)| format!("m={m}:{r:.2}")).collect();
    verdict(
        5,
        "ring-op shape",
        spread.iter().all(|s| s.factor <= 8.0),
        format!(
            "max spread {:.2}x across m (limit 8x), at p={} M={} [{}]",
            worst.factor,
            worst.p,
            worst.magnitude,
            means.join(" ")
        ),
    )
}

fn c6(records: &[TrialRecord]) -> Verdict {
    let worst = records.iter().max_by(|a, b| a.field_ratio.total_cmp(&b.field_ratio)).expect("non-empty sweep");
    verdict(
        6,
        "field-op shape",
        worst.field_ratio <= 64.0,
        format!(
            "max ratio {:.3} (limit 64) at p={} m={} M={} s={} via {} roots",
            worst.field_ratio, worst.p, worst.m, worst.magnitude, worst.s, worst.root_path
        ),
    )
}

// --- criterion 7 ---------------------------------------------------------

const Q: u8 = 5;
const MAX_LEN: usize = 8;

/// Does `t^L + c_{L-1} t^{L-1} + ... + c_0` generate `a`?
fn generates(a: &[u8], c: &[u8]) -> bool {
    let l = c.len();
    (0..a.len().saturating_sub(l)).all(|i| {
        let s: u32 = a[i + l] as u32 + c.iter().enumerate().map(|(k, &ck)| ck as u32 * a[i + k] as u32).sum::<u32>();
        s.is_multiple_of(Q as u32)
    })
}

/// Shortest generator of `a` by exhaustive search over orders `lower..`,
/// candidates in lexicographic order.
fn brute_minimal(a: &[u8], lower: usize) -> (usize, Vec<u8>) {
    for l in lower..=a.len() {
        let mut c = vec![0u8; l];
        loop {
            if generates(a, &c) {
                return (l, c);
            }
            // odometer increment
            let mut k = 0;
            while k < l && c[k] == Q - 1 {
                c[k] = 0;
                k += 1;
            }
            if k == l {
                break;
            }
            c[k] += 1;
        }
    }
    unreachable!("order len(a) always generates")
}

#[derive(Default)]
struct BmTally {
    checked: u64,
    order_mismatch: u64,
    poly_mismatch: u64,
    first: Option<Vec<u8>>,
}

fn bm_dfs(a: &mut Vec<u8>, prefix_order: usize, field: &Field, tally: &mut BmTally) {
    // a generator of `a` also generates every prefix, so the prefix order is
    // a sound starting point for the search
    let (order, oracle) = brute_minimal(a, prefix_order);
    let p = field.modulus();
    let seq: Vec<_> = a.iter().map(|&v| p.elem(v as u64)).collect();
    let rec = berlekamp_massey(&seq, a.len(), field).expect("non-empty");
    tally.checked += 1;
    let mut bad = false;
    if rec.order() != order {
        tally.order_mismatch += 1;
        bad = true;
    } else if 2 * order <= a.len() {
        let got: Vec<u8> = rec.coefficients()[..order].iter().map(|e| e.value() as u8).collect();
        if got != oracle {
            tally.poly_mismatch += 1;
            bad = true;
        }
    } else if !recurrence_check(&rec, &seq) {
        tally.poly_mismatch += 1;
        bad = true;
    }
    if bad && tally.first.is_none() {
        tally.first = Some(a.clone());
    }
    if a.len() < MAX_LEN {
        for v in 0..Q {
            a.push(v);
            bm_dfs(a, order, field, tally);
            a.pop();
        }
    }
}

fn c7() -> Verdict {
    let p = FieldModulus::new(Q as u64).unwrap();
    let t = Instant::now();
    let tallies: Vec<BmTally> = (0..Q)
        .into_par_iter()
        .map(|first| {
            let field = Field::new(p);
            let mut tally = BmTally::default();
            bm_dfs(&mut vec![first], 0, &field, &mut tally);
            tally
        })
        .collect();
    let checked: u64 = tallies.iter().map(|t| t.checked).sum();
    let order: u64 = tallies.iter().map(|t| t.order_mismatch).sum();
    let poly: u64 = tallies.iter().map(|t| t.poly_mismatch).sum();
    let expected: u64 = (1..=MAX_LEN as u32).map(|n| (Q as u64).pow(n)).sum();
    let mut detail = format!(
        "{checked} sequences (all of length 1..={MAX_LEN} over F_{Q}), {order} order / {poly} polynomial mismatches ({:.1}s)",
        t.elapsed().as_secs_f64()
    );
    if let Some(a) = tallies.iter().find_map(|t| t.first.clone()) {
        detail += &format!("; first: {a:?}");
    }
    verdict(7, "recurrence oracle", checked == expected && order == 0 && poly == 0, detail)
}

// --- criterion 8 ---------------------------------------------------------

fn c8() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for (i, &prime) in [101u64, 1009].iter().enumerate() {
        let p = FieldModulus::new(prime).unwrap();
        let field = Field::new(p);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(8 + i as u64);
        let mut mismatches = 0;
        let mut with_roots = 0;
        for n in 0..1000u64 {
            let deg = rng.gen_range(1..=8usize);
            let poly = match n % 3 {
                // product of random linear factors (possibly repeated or zero)
                0 => (0..deg).fold(Poly::constant(p.one()), |acc, _| {
                    acc.mul(&Poly::linear(p, p.elem(rng.gen_range(0..prime))), &field)
                }),
                // a few linear factors times a random cofactor
                1 => {
                    let k = rng.gen_range(0..=deg);
                    let mut f = Poly::from_u64(p, &random_coeffs(&mut rng, prime, deg - k));
                    for _ in 0..k {
                        f = f.mul(&Poly::linear(p, p.elem(rng.gen_range(0..prime))), &field);
                    }
                    f
                }
                _ => Poly::from_u64(p, &random_coeffs(&mut rng, prime, deg)),
            };
            let a = roots_exhaustive(&poly, &field);
            let b = roots_split(&poly, n, &field);
            with_roots += usize::from(!a.is_empty());
            mismatches += usize::from(a != b);
        }
        pass &= mismatches == 0;
        lines.push(format!("p={prime}: 1000 polys ({with_roots} with roots), {mismatches} mismatches"));
    }
    verdict(8, "root-finding routes agree", pass, lines.join("; "))
}

/// `deg + 1` coefficients with a nonzero leading term.
fn random_coeffs(rng: &mut impl Rng, prime: u64, deg: usize) -> Vec<u64> {
    let mut c: Vec<u64> = (0..deg).map(|_| rng.gen_range(0..prime)).collect();
    c.push(rng.gen_range(1..prime));
    c
}

// --- criterion 9 ---------------------------------------------------------

fn c9() -> Verdict {
    let p = FieldModulus::new(1009).unwrap();
    let mut parts = Vec::new();
    let mut congruent = true;
    for m in [4usize, 8] {
        let mx = build_matrix(MatrixParams::full(p, m).unwrap());
        for j in 1..=mx.columns() {
            let k = mx.multiplier(j);
            let mut expect = k % 1009;
            for row in 0..m {
                let e = mx.entry(row, j);
                congruent &= e.rem_euclid(1009) as u64 == expect && e.unsigned_abs() <= 504;
                expect = expect * j as u64 % 1009;
            }
        }
        parts.push(format!(
            "m={m}: {}/{} columns meet |phi| <= p^(1-1/m) = {:.1} ({:.1}%), max |phi| = {}",
            mx.bound_met_count(),
            mx.columns(),
            mx.params().element_bound(),
            100.0 * mx.bound_met_count() as f64 / mx.columns() as f64,
            mx.max_abs_entry()
        ));
    }
    parts.push(format!("congruence {}", if congruent { "holds for every entry" } else { "VIOLATED" }));
    verdict(9, "element bound realization", congruent, parts.join("; "))
}

// --- criterion 10 --------------------------------------------------------

fn c10() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();

    // zero measurement
    let mut zero_ok = true;
    for (prime, m) in [(101u64, 8usize), (1009, 16), (65537, 4)] {
        let mx = build_matrix(MatrixParams::full(FieldModulus::new(prime).unwrap(), m).unwrap());
        let r = decode(&mx, &Measurement::new(vec![BigInt::from(0); m]), &DecodeConfig::default()).unwrap();
        zero_ok &= r.is_success() && r.x.is_zero() && r.stats.steps == 0;
    }
    pass &= zero_ok;
    parts.push(format!("zero measurement -> zero vector: {}", if zero_ok { "yes" } else { "NO" }));

    // common factor p^alpha
    let mut scaled_ok = 0;
    let scaled_total = 60;
    for t in 0..scaled_total {
        let prime = [101u64, 1009][t % 2];
        let m = [8usize, 16][(t / 2) % 2];
        let mx = build_matrix(MatrixParams::full(FieldModulus::new(prime).unwrap(), m).unwrap());
        let mut rng = sweep::trial_rng(SEED, 10_000, t);
        let s = rng.gen_range(1..=m / 2);
        let x = sweep::random_sparse_vector(&mut rng, mx.columns(), s, &BigInt::from(1_000_000));
        let alpha = rng.gen_range(1..=4u32);
        let factor = BigInt::from(prime).pow(alpha);
        let y = encode(&mx, &x).unwrap();
        let base = decode(&mx, &y, &DecodeConfig::default()).unwrap();
        let lifted = decode(&mx, &y.scaled(&factor), &DecodeConfig::default()).unwrap();
        let same = base.is_success()
            && lifted.is_success()
            && base.x == x
            && lifted.x == x.scaled(&factor)
            && lifted.stats.alpha == alpha
            && (lifted.stats.steps, lifted.stats.inner_steps) == (base.stats.steps, base.stats.inner_steps);
        scaled_ok += usize::from(same);
    }
    pass &= scaled_ok == scaled_total;
    parts.push(format!("p^alpha-scaled inputs decoded identically: {scaled_ok}/{scaled_total}"));

    // adversarial: s > m/2
    let mut exceeded = 0;
    let mut wrong = 0;
    let mut other = Vec::new();
    let configs = [(101u64, 8usize), (101, 16), (1009, 8), (1009, 16)];
    for (ci, &(prime, m)) in configs.iter().enumerate() {
        let mx = build_matrix(MatrixParams::full(FieldModulus::new(prime).unwrap(), m).unwrap());
        for t in 0..25 {
            let mut rng = sweep::trial_rng(SEED, 20_000 + ci as u64, t);
            let s = rng.gen_range(m / 2 + 1..=m);
            let cell = Cell {
                index: 30_000 + ci as u64,
                p: prime,
                rows: m,
                magnitude: BigInt::from(1_000_000),
                sparsity: SparsityTerm::Fixed(s),
            };
            let r = sweep::run_trial(&mx, &cell, t, SEED, RootStrategy::default());
            wrong += usize::from(!r.correct);
            if r.status == DecodeStatus::SparsityExceeded {
                exceeded += 1;
            } else if other.len() < 3 {
                other.push(describe(&r));
            }
        }
    }
    pass &= exceeded == 100 && wrong == 0;
    let mut adv = format!("s > m/2: {exceeded}/100 sparsity-exceeded, {wrong} wrong vectors");
    if !other.is_empty() {
        adv += &format!(" (other outcomes: {})", other.join(" | "));
    }
    parts.push(adv);
    verdict(10, "degenerate inputs", pass, parts.join("; "))
}
