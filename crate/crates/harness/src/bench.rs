//! Wall-clock timing of competing samplers for one law.

use std::hint::black_box;
use std::time::Instant;

use tsou_core::ibgm::{IBGMMethod, IBGMParams, IBGM};
use tsou_core::iga::{IGa, IGaMethod, IGaParams};
use tsou_core::RandomStream;

use crate::error::{Error, Result};
use crate::report::{BenchReport, BenchRow};
use crate::BUILD_ID;

pub const DEFAULT_SIZES: [usize; 4] = [1_000, 10_000, 20_000, 50_000];
pub const DEFAULT_REPETITIONS: usize = 5;

/// One timed method: `run(s, n)` builds whatever it needs and makes `n` draws.
pub struct BenchCase<'a> {
    pub method: String,
    pub run: Box<dyn Fn(&mut RandomStream, usize) -> Result<f64> + 'a>,
}

impl<'a> BenchCase<'a> {
    pub fn new(method: impl Into<String>, run: impl Fn(&mut RandomStream, usize) -> Result<f64> + 'a) -> Self {
        Self { method: method.into(), run: Box::new(run) }
    }
}

/// IGa cases; the law is rebuilt inside every timed run.
pub fn iga_cases(params: IGaParams, methods: &[IGaMethod]) -> Vec<BenchCase<'static>> {
    methods
        .iter()
        .map(|&m| {
            BenchCase::new(m.name(), move |s, n| {
                let law = IGa::new(params)?;
                let mut acc = 0.0;
                for _ in 0..n {
                    acc += law.sample(s, m)?;
                }
                Ok(acc)
            })
        })
        .collect()
}

/// IBGM cases; setup (tables, envelopes) is part of the timed run.
pub fn ibgm_cases(params: IBGMParams, methods: &[IBGMMethod]) -> Vec<BenchCase<'static>> {
    methods
        .iter()
        .map(|&m| {
            BenchCase::new(m.name(), move |s, n| {
                let law = IBGM::new(params)?;
                let mut acc = 0.0;
                for _ in 0..n {
                    acc += law.sample(s, m)?;
                }
                Ok(acc)
            })
        })
        .collect()
}

/// Median seconds per `(method, n)` after one discarded warm-up per method.
///
/// Every repetition reuses the same seed so the methods see identical work.
pub fn bench(
    target: &str,
    cases: &[BenchCase<'_>],
    sizes: &[usize],
    repetitions: usize,
    seed: u64,
    baseline: &str,
) -> Result<BenchReport> {
    if repetitions < 3 {
        return Err(Error::Config(format!("need at least 3 repetitions, got {repetitions}")));
    }
    if sizes.is_empty() || cases.is_empty() {
        return Err(Error::Config("nothing to time".into()));
    }
    if !cases.iter().any(|c| c.method == baseline) {
        return Err(Error::Config(format!("baseline '{baseline}' is not among the timed methods")));
    }
    let mut medians = Vec::with_capacity(cases.len() * sizes.len());
    for case in cases {
        black_box((case.run)(&mut RandomStream::new(seed), sizes[0])?);
        for &n in sizes {
            let mut times = Vec::with_capacity(repetitions);
            for _ in 0..repetitions {
                let mut s = RandomStream::new(seed);
                let start = Instant::now();
                black_box((case.run)(&mut s, n)?);
                times.push(start.elapsed().as_secs_f64());
            }
            times.sort_by(f64::total_cmp);
            medians.push((case.method.clone(), n, median(&times)));
        }
    }
    let rows = medians
        .iter()
        .map(|(method, n, secs)| {
            let base = medians.iter().find(|(m, k, _)| m == baseline && k == n).map(|x| x.2).unwrap_or(f64::NAN);
            let factor = if method == baseline { 1.0 } else { secs / base };
            BenchRow { method: method.clone(), n: *n, seconds: *secs, factor }
        })
        .collect();
    Ok(BenchReport {
        target: target.to_string(),
        baseline: baseline.to_string(),
        sizes: sizes.to_vec(),
        repetitions,
        seed,
        machine: machine_descriptor(),
        build_id: BUILD_ID.to_string(),
        rows,
    })
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        0.5 * (sorted[m - 1] + sorted[m])
    }
}

/// OS, architecture, thread count and CPU model where available.
pub fn machine_descriptor() -> String {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|info| {
            info.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    format!("{}-{} {threads} threads, {cpu}", std::env::consts::OS, std::env::consts::ARCH)
}
