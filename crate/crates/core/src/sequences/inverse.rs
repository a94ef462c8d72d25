use serde::Serialize;

use super::SeqError;

/// One term of a non-decreasing sequence, or a signal that the term cannot
/// be produced (horizon reached, generator exhausted).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probe {
    Value(f64),
    Beyond,
}

/// Non-decreasing map N → R₊ ∪ {+∞} that can be probed term by term.
pub trait MonotoneSequence {
    fn probe(&mut self, n: u64) -> Probe;

    /// A certified upper bound on every term, when one is known.
    fn supremum_bound(&mut self) -> Option<f64> {
        None
    }
}

/// Why an inverse came out infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Saturation {
    /// Every term is provably ≤ x.
    Certified,
    /// Every available term is ≤ x, but terms past `at_least` could not be produced.
    HorizonLimited { at_least: u64 },
}

/// Value of sup{n : f(n) ≤ x} with sup ∅ = 0 and sup N = +∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenInverse {
    Finite(u64),
    Infinite(Saturation),
}

impl GenInverse {
    pub fn finite(self) -> Option<u64> {
        match self {
            GenInverse::Finite(n) => Some(n),
            GenInverse::Infinite(_) => None,
        }
    }

    /// Finite value, or +∞ when certified; horizon-limited results are errors.
    pub fn certified(self) -> Result<Option<u64>, SeqError> {
        match self {
            GenInverse::Finite(n) => Ok(Some(n)),
            GenInverse::Infinite(Saturation::Certified) => Ok(None),
            GenInverse::Infinite(Saturation::HorizonLimited { at_least }) => {
                Err(SeqError::Horizon { index: at_least + 1 })
            }
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            GenInverse::Finite(n) => n as f64,
            GenInverse::Infinite(_) => f64::INFINITY,
        }
    }

    pub fn is_horizon_limited(self) -> bool {
        matches!(self, GenInverse::Infinite(Saturation::HorizonLimited { .. }))
    }
}

/// sup{n ∈ N : f(n) ≤ x}, found by doubling then bisection.
///
/// Terms that cannot be produced are treated as unknown, never as "> x", so
/// running out of terms gives `HorizonLimited` rather than a finite answer.
pub fn generalized_inverse<F: MonotoneSequence + ?Sized>(f: &mut F, x: f64) -> GenInverse {
    let ok = |f: &mut F, n: u64| match f.probe(n) {
        Probe::Value(v) => Some(v <= x),
        Probe::Beyond => None,
    };
    match ok(f, 0) {
        Some(true) => {}
        Some(false) => return GenInverse::Finite(0),
        None => return GenInverse::Infinite(Saturation::HorizonLimited { at_least: 0 }),
    }
    if let Some(bound) = f.supremum_bound() {
        if bound <= x {
            return GenInverse::Infinite(Saturation::Certified);
        }
    }
    // Invariant: terms up to `lo` exist and are ≤ x; term `hi` is missing or > x.
    let mut lo = 0u64;
    let mut hi = 1u64;
    loop {
        match ok(f, hi) {
            Some(true) => {
                lo = hi;
                if hi >= u64::MAX / 2 {
                    return GenInverse::Infinite(Saturation::HorizonLimited { at_least: lo });
                }
                hi *= 2;
            }
            _ => break,
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(f, mid) == Some(true) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    match ok(f, hi) {
        Some(false) => GenInverse::Finite(lo),
        _ => GenInverse::Infinite(Saturation::HorizonLimited { at_least: lo }),
    }
}

/// Rule producing term `n` of a [`MonotoneCache`] from the terms before it.
pub trait Generator {
    /// `None` when the term cannot be produced.
    fn term(&mut self, n: u64, earlier: &[f64]) -> Option<f64>;

    fn supremum_bound(&self) -> Option<f64> {
        None
    }
}

impl<F: FnMut(u64) -> Option<f64>> Generator for F {
    fn term(&mut self, n: u64, _earlier: &[f64]) -> Option<f64> {
        self(n)
    }
}

/// A lazily extended non-decreasing sequence.
#[derive(Debug, Clone)]
pub struct MonotoneCache<G> {
    values: Vec<f64>,
    generator: G,
    bound: Option<f64>,
    cap: usize,
    exhausted: bool,
}

/// Default number of terms a cache may hold.
pub const DEFAULT_CACHE_CAP: usize = 1 << 22;

impl<G: Generator> MonotoneCache<G> {
    pub fn new(generator: G) -> Self {
        Self {
            values: Vec::new(),
            bound: generator.supremum_bound(),
            generator,
            cap: DEFAULT_CACHE_CAP,
            exhausted: false,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Declares a certified upper bound on every term.
    pub fn with_supremum_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Extends the cache so that term `n` exists.
    pub fn ensure(&mut self, n: u64) -> Result<(), SeqError> {
        while (self.values.len() as u64) <= n {
            let k = self.values.len();
            if self.exhausted || k >= self.cap {
                return Err(SeqError::Horizon { index: n });
            }
            let prev = self.values.last().copied();
            let next = if prev == Some(f64::INFINITY) {
                Some(f64::INFINITY)
            } else {
                self.generator.term(k as u64, &self.values)
            };
            let Some(v) = next else {
                self.exhausted = true;
                return Err(SeqError::Horizon { index: n });
            };
            if v.is_nan() || v < 0.0 || prev.is_some_and(|p| v < p) {
                self.exhausted = true;
                return Err(SeqError::NotMonotone { index: k as u64, value: v });
            }
            self.values.push(v);
        }
        Ok(())
    }

    pub fn get(&mut self, n: u64) -> Result<f64, SeqError> {
        self.ensure(n)?;
        Ok(self.values[n as usize])
    }

    pub fn inverse(&mut self, x: f64) -> GenInverse {
        generalized_inverse(self, x)
    }
}

impl<G: Generator> MonotoneSequence for MonotoneCache<G> {
    fn probe(&mut self, n: u64) -> Probe {
        match self.get(n) {
            Ok(v) => Probe::Value(v),
            Err(_) => Probe::Beyond,
        }
    }

    fn supremum_bound(&mut self) -> Option<f64> {
        self.bound
    }
}

/// A fixed slice viewed as a sequence; terms past the end are unavailable.
pub struct Prefix<'a>(pub &'a [f64]);

impl MonotoneSequence for Prefix<'_> {
    fn probe(&mut self, n: u64) -> Probe {
        match self.0.get(n as usize) {
            Some(&v) => Probe::Value(v),
            None => Probe::Beyond,
        }
    }
}
