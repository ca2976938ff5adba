//! Binary memory patterns, Hebb couplings and overlaps.
//!
//! Spins are stored as `i8` values in `{-1, +1}` so overlap sums are exact
//! integer arithmetic until the final division.
//!
//! Random pattern sets are drawn from ChaCha20 ([`rand_chacha::ChaCha20Rng`])
//! seeded through `SeedableRng::seed_from_u64`. Entries are produced
//! row-major (pattern by pattern), one `next_u32` per entry: `+1` when the
//! lowest bit is 0, `-1` otherwise. The stream is specified by the ChaCha20
//! algorithm and is identical on every platform. Random corruption indices
//! use stream 1 of the same seed, so they never reuse pattern entropy.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{invalid, Error, Result};

/// A binary pattern `ξ` with entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    spins: Vec<i8>,
}

impl Pattern {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.len() < 2 {
            return Err(invalid(format!(
                "pattern length must be at least 2, got {}",
                spins.len()
            )));
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(invalid(format!("pattern entry {bad} is not +1 or -1")));
        }
        Ok(Self { spins })
    }

    /// All spins `+1`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self {
            spins: self.spins.iter().map(|s| -s).collect(),
        }
    }

    /// Copy with the spins at `indices` flipped.
    pub fn with_flips(&self, indices: &[usize]) -> Result<Self> {
        let mut spins = self.spins.clone();
        for &i in indices {
            let s = spins.get_mut(i).ok_or_else(|| {
                invalid(format!("flip index {i} out of range for length {}", self.len()))
            })?;
            *s = -*s;
        }
        Ok(Self { spins })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.spins.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            f.write_str(if *s > 0 { "+1" } else { "-1" })?;
        }
        Ok(())
    }
}

/// `p` patterns of common length `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
    n: usize,
}

impl PatternSet {
    pub fn new(patterns: Vec<Pattern>) -> Result<Self> {
        let n = common_length(&patterns)?;
        Ok(Self { patterns, n })
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn get(&self, mu: usize) -> Option<&Pattern> {
        self.patterns.get(mu)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.patterns.len()
    }

    /// Memory density `p / n`.
    pub fn alpha(&self) -> f64 {
        self.p() as f64 / self.n as f64
    }

    /// Writes the plain-text pattern format: a `n=<n> p=<p>` header line
    /// followed by one pattern per line, entries `+1`/`-1` separated by
    /// single spaces.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n={} p={}", self.n, self.p())?;
        for pat in &self.patterns {
            writeln!(w, "{pat}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (n, p) = loop {
            match lines.next() {
                None => return Err(Error::Parse { line: 1, msg: "missing header".into() }),
                Some((i, line)) => {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    break parse_header(&line).map_err(|msg| Error::Parse { line: i + 1, msg })?;
                }
            }
        };
        let mut patterns = Vec::with_capacity(p);
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let spins = line
                .split(' ')
                .map(|tok| match tok {
                    "+1" => Ok(1i8),
                    "-1" => Ok(-1i8),
                    other => Err(Error::Parse {
                        line: i + 1,
                        msg: format!("expected +1 or -1, found {other:?}"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            if spins.len() != n {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("pattern has {} entries, header says n={n}", spins.len()),
                });
            }
            patterns.push(Pattern::new(spins).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?);
        }
        if patterns.len() != p {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header says p={p}, file holds {} patterns", patterns.len()),
            });
        }
        Self::new(patterns)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

fn parse_header(line: &str) -> std::result::Result<(usize, usize), String> {
    let mut parts = line.split_whitespace();
    let mut field = |key: &str| -> std::result::Result<usize, String> {
        let tok = parts.next().ok_or_else(|| format!("header missing {key}="))?;
        tok.strip_prefix(key)
            .and_then(|v| v.strip_prefix('='))
            .ok_or_else(|| format!("expected {key}=<count>, found {tok:?}"))?
            .parse()
            .map_err(|e| format!("bad {key} value: {e}"))
    };
    let n = field("n")?;
    let p = field("p")?;
    Ok((n, p))
}

fn common_length(patterns: &[Pattern]) -> Result<usize> {
    let first = patterns.first().ok_or(Error::EmptyPatternSet)?;
    let n = first.len();
    for pat in patterns {
        if pat.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: pat.len() });
        }
    }
    Ok(n)
}

/// Draws `p` patterns of `n` independent fair `±1` entries.
pub fn generate_random_patterns(n: usize, p: usize, seed: u64) -> Result<PatternSet> {
    if n < 2 {
        return Err(invalid(format!("n must be at least 2, got {n}")));
    }
    if p < 1 {
        return Err(invalid("p must be at least 1"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let patterns = (0..p)
        .map(|_| {
            let spins = (0..n)
                .map(|_| if rng.next_u32() & 1 == 0 { 1 } else { -1 })
                .collect();
            Pattern { spins }
        })
        .collect();
    PatternSet::new(patterns)
}

/// `count` distinct indices in `0..n`, in draw order.
pub fn random_flip_indices(n: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count > n {
        return Err(invalid(format!("cannot flip {count} of {n} spins")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    Ok(rand::seq::index::sample(&mut rng, n, count).into_vec())
}

/// Normalization of the Hebb sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// `1 / (n - 1)`, the classical Hebb prescription.
    OverNMinus1,
    /// `1 / n`, the mean-field convention.
    OverN,
}

impl Normalization {
    pub fn denominator(self, n: usize) -> f64 {
        match self {
            Normalization::OverNMinus1 => (n - 1) as f64,
            Normalization::OverN => n as f64,
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n-1" | "over-n-minus-1" => Ok(Normalization::OverNMinus1),
            "n" | "over-n" => Ok(Normalization::OverN),
            other => Err(invalid(format!("unknown normalization {other:?} (use n-1 or n)"))),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::OverNMinus1 => "n-1",
            Normalization::OverN => "n",
        })
    }
}

/// Symmetric, zero-diagonal Hebb couplings `w_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    entries: Vec<f64>,
    normalization: Normalization,
}

impl WeightMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Local fields `Σ_j w_ij s_j` for every `i`.
    pub fn field(&self, spins: &[i8]) -> Result<Vec<f64>> {
        if spins.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: spins.len() });
        }
        Ok((0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(spins)
                    .map(|(w, &s)| w * f64::from(s))
                    .sum()
            })
            .collect())
    }
}

/// Hebb rule: `w_ij = (1/d) Σ_μ ξ_i^μ ξ_j^μ` for `i ≠ j`, `w_ii = 0`, with
/// `d = n - 1` or `n` per `normalization`.
pub fn hebb_weights(patterns: &[Pattern], normalization: Normalization) -> Result<WeightMatrix> {
    let n = common_length(patterns)?;
    let d = normalization.denominator(n);
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let sum: i64 = patterns
                .iter()
                .map(|pat| i64::from(pat.spins[i]) * i64::from(pat.spins[j]))
                .sum();
            let w = sum as f64 / d;
            entries[i * n + j] = w;
            entries[j * n + i] = w;
        }
    }
    Ok(WeightMatrix { n, entries, normalization })
}

/// Overlap `(1/n) Σ_i s_i ξ_i`.
pub fn overlap(state_spins: &[i8], pattern: &Pattern) -> Result<f64> {
    if state_spins.len() != pattern.len() {
        return Err(Error::DimensionMismatch {
            expected: pattern.len(),
            found: state_spins.len(),
        });
    }
    let dot: i64 = state_spins
        .iter()
        .zip(&pattern.spins)
        .map(|(&a, &b)| i64::from(a) * i64::from(b))
        .sum();
    Ok(dot as f64 / pattern.len() as f64)
}
