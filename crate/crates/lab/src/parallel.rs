//! Segment-parallel drivers over the core routines.

use log::debug;
use rayon::prelude::*;

use powerfree_core::arith::{sieve_segment, sieving_primes, ArithTables, SieveConfig};
use powerfree_core::dynamics::{default_j_max, orbit_table};
use powerfree_core::ergodic::{
    convergence_rows, histogram_primes, histogram_segment, split_range, ArgumentMap, Condition, ConvergenceRow,
    ErgodicSetup, OmegaHistogram,
};
use powerfree_core::kfree::{KfreeConfig, KfreeMask, KfreePlan, ProductPlan};
use powerfree_core::{BitSet, Error, IntPolynomial};

use crate::{LabError, Result};

/// A fixed-size thread pool and segment length.
#[derive(Debug)]
pub struct Runner {
    pool: rayon::ThreadPool,
    threads: usize,
    segment: usize,
}

pub const DEFAULT_SEGMENT: usize = 1 << 20;

impl Runner {
    pub fn new(threads: usize, segment: usize) -> Result<Self> {
        if segment == 0 {
            return Err(LabError::Usage("segment length must be positive".into()));
        }
        let threads = if threads == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { threads };
        let pool =
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| LabError::Pool(e.to_string()))?;
        Ok(Runner { pool, threads, segment })
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn segment(&self) -> usize {
        self.segment
    }

    pub fn kfree_config(&self) -> KfreeConfig {
        KfreeConfig { segment: self.segment, ..KfreeConfig::default() }
    }

    /// Runs `f` inside the pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Runs `f` on each range in parallel; results come back in range order.
    pub fn map_ranges<T, F>(&self, ranges: Vec<(u64, u64)>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64, u64) -> T + Sync,
    {
        self.pool.install(|| {
            ranges
                .into_par_iter()
                .map(|(a, b)| {
                    debug!("segment [{a}, {b})");
                    f(a, b)
                })
                .collect()
        })
    }

    fn ranges(&self, lo: u64, hi: u64) -> Vec<(u64, u64)> {
        split_range(lo, hi, self.segment).collect()
    }

    pub fn tables(&self, lo: u64, hi: u64) -> Result<ArithTables> {
        let cfg = SieveConfig { segment: self.segment, ..SieveConfig::default() };
        cfg.validate(lo, hi)?;
        let primes = sieving_primes(hi)?;
        let parts = self.map_ranges(self.ranges(lo, hi), |a, b| sieve_segment(&primes, a, b));
        Ok(ArithTables::concat(parts)?)
    }

    pub fn kfree_mask(&self, f: &IntPolynomial, k: u32, n: u64) -> Result<KfreeMask> {
        let plan = KfreePlan::new(f, k, n, &self.kfree_config())?;
        debug!("k-free sieve for {f}: P0 = {}", plan.p0());
        let segs = self.map_ranges(self.ranges(1, n + 1), |a, b| plan.segment(a, b));
        Ok(KfreeMask::from_segments(f, k, n, segs)?)
    }

    pub fn product_mask(&self, factors: &[IntPolynomial], k: u32, n: u64) -> Result<KfreeMask> {
        let plan = ProductPlan::new(factors, k, n, &self.kfree_config())?;
        let segs = self.map_ranges(self.ranges(1, n + 1), |a, b| plan.segment(a, b));
        Ok(KfreeMask::from_segments(plan.product(), k, n, segs)?)
    }

    /// n and n + 1 both squarefree, for n ≤ N.
    pub fn twin_mask(&self, n: u64) -> Result<BitSet> {
        let t = self.tables(1, n + 2)?;
        Ok(powerfree_core::kfree::twin_squarefree_mask(&t, n)?)
    }

    pub fn condition_mask(&self, cond: &Condition, n: u64) -> Result<Option<BitSet>> {
        Ok(match cond {
            Condition::All => None,
            Condition::KFreePoly { f, k } => Some(self.kfree_mask(f, *k, n)?.into_bits()),
            Condition::TwinSquarefree => Some(self.twin_mask(n)?),
            Condition::ProductPoly { factors, k } => Some(self.product_mask(factors, *k, n)?.into_bits()),
            other => other.mask(n, &self.kfree_config())?,
        })
    }

    /// Cumulative Ω histograms at ascending checkpoints.
    pub fn histograms(
        &self,
        checkpoints: &[u64],
        mask: Option<&BitSet>,
        argmap: &ArgumentMap,
    ) -> Result<Vec<OmegaHistogram>> {
        if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("checkpoints must be strictly ascending".into()).into());
        }
        let n = checkpoints.last().copied().unwrap_or(0);
        if let Some(m) = mask {
            if (m.len() as u64) < n {
                return Err(Error::OutOfRange { what: "N", value: n, lo: 0, hi: m.len() as u64 + 1 }.into());
            }
        }
        let primes = histogram_primes(n, argmap)?;
        let mut ranges = Vec::new();
        let mut ends = Vec::new();
        let mut lo = 1;
        for &c in checkpoints {
            ranges.extend(split_range(lo, c + 1, self.segment));
            ends.push(ranges.len());
            lo = c + 1;
        }
        let parts = self.map_ranges(ranges, |a, b| histogram_segment(&primes, a, b, mask, argmap));
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut acc = OmegaHistogram::empty(0);
        let mut it = parts.into_iter();
        let mut done = 0;
        for (&c, &end) in checkpoints.iter().zip(&ends) {
            for part in it.by_ref().take(end - done) {
                acc.merge(&part?);
            }
            done = end;
            acc.n = c;
            out.push(acc.clone());
        }
        Ok(out)
    }

    /// Convergence rows for `setup` at ascending checkpoints.
    pub fn convergence(&self, setup: &ErgodicSetup, checkpoints: &[u64]) -> Result<Vec<ConvergenceRow>> {
        let n = checkpoints.last().copied().unwrap_or(0);
        let j_max = default_j_max(setup.argmap.max_arg(n)?);
        let table = orbit_table(&setup.system, &setup.observable, setup.x, j_max)?;
        let mask = self.condition_mask(&setup.condition, n)?;
        let hists = self.histograms(checkpoints, mask.as_ref(), &setup.argmap)?;
        Ok(convergence_rows(&hists, &table, setup.condition.density(setup.p_bound)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use powerfree_core::ergodic::omega_histograms;
    use powerfree_core::kfree::{kfree_mask, product_kfree_mask};

    #[test]
    fn parallel_matches_serial() {
        let f = IntPolynomial::from_i64(&[2, 0, 0, 1]).unwrap();
        let serial = kfree_mask(&f, 2, 20_000, &KfreeConfig::default()).unwrap();
        let factors = [IntPolynomial::from_i64(&[1, 0, 1]).unwrap(), IntPolynomial::from_i64(&[2, 0, 1]).unwrap()];
        let prod = product_kfree_mask(&factors, 2, 20_000, &KfreeConfig::default()).unwrap();
        let argmap = ArgumentMap::Progression { m: 3, r: 1 };
        let hist = omega_histograms(&[100, 5000, 20_000], Some(serial.bits()), &argmap, 1 << 20).unwrap();
        for threads in [1, 3] {
            let r = Runner::new(threads, 777).unwrap();
            assert_eq!(r.kfree_mask(&f, 2, 20_000).unwrap(), serial);
            assert_eq!(r.product_mask(&factors, 2, 20_000).unwrap().bits(), prod.bits());
            assert_eq!(r.histograms(&[100, 5000, 20_000], Some(serial.bits()), &argmap).unwrap(), hist);
            assert_eq!(
                r.tables(5, 9000).unwrap(),
                powerfree_core::arith::build_tables(5, 9000, &SieveConfig::default()).unwrap()
            );
        }
    }
}
