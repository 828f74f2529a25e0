//! Discrete configuration spaces, configurations, one-option neighborhoods and
//! canonical keys.
//!
//! A space is an ordered list of options, each with an explicit finite domain of
//! text tokens. A [`Configuration`] stores one domain index per option. The
//! option order fixes the layout of canonical keys, which are the identity used
//! for merging local optima across runs.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use siphasher::sip::SipHasher13;
use std::hash::Hasher;
use thiserror::Error;

/// Separator between option values in a canonical key.
pub const KEY_SEPARATOR: char = '|';

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("configuration space must contain at least one option")]
    Empty,
    #[error("option `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("option `{option}` lists value `{value}` more than once")]
    DuplicateValue { option: String, value: String },
    #[error("option name `{0}` is used more than once")]
    DuplicateOption(String),
    #[error("invalid token `{0}`: tokens must be non-empty and must not contain `|`, `,`, `=` or whitespace")]
    InvalidToken(String),
    #[error("configuration has {got} values but the space has {expected} options")]
    LengthMismatch { expected: usize, got: usize },
    #[error("value index {index} is out of range for option `{option}` (domain size {size})")]
    IndexOutOfRange {
        option: String,
        index: usize,
        size: usize,
    },
    #[error("unknown value `{value}` for option `{option}`")]
    UnknownValue { option: String, value: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

/// One configurable option and its ordered, finite domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptionSpec {
    name: String,
    domain: Vec<String>,
}

fn check_token(token: &str) -> Result<(), SpaceError> {
    let bad = token.is_empty()
        || token
            .chars()
            .any(|c| c == KEY_SEPARATOR || c == ',' || c == '=' || c.is_whitespace());
    if bad {
        Err(SpaceError::InvalidToken(token.to_string()))
    } else {
        Ok(())
    }
}

impl OptionSpec {
    pub fn new<S: Into<String>>(name: S, domain: Vec<String>) -> Result<Self, SpaceError> {
        let name = name.into();
        check_token(&name)?;
        if domain.is_empty() {
            return Err(SpaceError::EmptyDomain(name));
        }
        for (i, value) in domain.iter().enumerate() {
            check_token(value)?;
            if domain[..i].contains(value) {
                return Err(SpaceError::DuplicateValue {
                    option: name,
                    value: value.clone(),
                });
            }
        }
        Ok(Self { name, domain })
    }

    /// A binary option with domain `["0", "1"]`.
    pub fn binary<S: Into<String>>(name: S) -> Self {
        Self {
            name: name.into(),
            domain: vec!["0".to_string(), "1".to_string()],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    fn index_of(&self, value: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == value)
    }
}

/// A point in a configuration space: one domain index per option.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(Vec<usize>);

impl Configuration {
    pub fn new(values: Vec<usize>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of options on which two configurations differ.
    ///
    /// Diagnostic only; nothing in the sampling or analysis pipeline relies on it.
    pub fn hamming(&self, other: &Configuration) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .filter(|(a, b)| a != b)
            .count()
    }
}

impl From<Vec<usize>> for Configuration {
    fn from(values: Vec<usize>) -> Self {
        Self(values)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// The Cartesian product of a fixed, ordered list of option domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigurationSpace {
    options: Vec<OptionSpec>,
}

impl ConfigurationSpace {
    pub fn new(options: Vec<OptionSpec>) -> Result<Self, SpaceError> {
        if options.is_empty() {
            return Err(SpaceError::Empty);
        }
        for (i, opt) in options.iter().enumerate() {
            if options[..i].iter().any(|o| o.name == opt.name) {
                return Err(SpaceError::DuplicateOption(opt.name.clone()));
            }
        }
        Ok(Self { options })
    }

    /// `n` binary options named `x0 .. x{n-1}`.
    pub fn binary(n: usize) -> Result<Self, SpaceError> {
        Self::new((0..n).map(|i| OptionSpec::binary(format!("x{i}"))).collect())
    }

    pub fn options(&self) -> &[OptionSpec] {
        &self.options
    }

    pub fn dimension(&self) -> usize {
        self.options.len()
    }

    /// Total number of configurations, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        self.options
            .iter()
            .fold(1u128, |acc, o| acc.saturating_mul(o.size() as u128))
    }

    /// Number of one-option neighbors every configuration has.
    pub fn neighborhood_size(&self) -> usize {
        self.options.iter().map(|o| o.size() - 1).sum()
    }

    pub fn validate(&self, x: &Configuration) -> Result<(), SpaceError> {
        if x.len() != self.options.len() {
            return Err(SpaceError::LengthMismatch {
                expected: self.options.len(),
                got: x.len(),
            });
        }
        for (opt, &index) in self.options.iter().zip(x.values()) {
            if index >= opt.size() {
                return Err(SpaceError::IndexOutOfRange {
                    option: opt.name.clone(),
                    index,
                    size: opt.size(),
                });
            }
        }
        Ok(())
    }

    /// Every configuration differing from `x` in exactly one option, ordered by
    /// option index and then by domain index.
    pub fn neighborhood(&self, x: &Configuration) -> Result<Vec<Configuration>, SpaceError> {
        self.validate(x)?;
        let mut out = Vec::with_capacity(self.neighborhood_size());
        for (i, opt) in self.options.iter().enumerate() {
            for v in 0..opt.size() {
                if v != x.0[i] {
                    let mut y = x.0.clone();
                    y[i] = v;
                    out.push(Configuration(y));
                }
            }
        }
        Ok(out)
    }

    /// One uniformly random neighbor of `x`, or `None` if the neighborhood is empty.
    pub fn random_neighbor<R: Rng + ?Sized>(
        &self,
        x: &Configuration,
        rng: &mut R,
    ) -> Option<Configuration> {
        let total = self.neighborhood_size();
        if total == 0 {
            return None;
        }
        let mut pick = rng.gen_range(0..total);
        for (i, opt) in self.options.iter().enumerate() {
            let alternatives = opt.size() - 1;
            if pick < alternatives {
                let mut y = x.0.clone();
                // skip over the current value
                y[i] = if pick < x.0[i] { pick } else { pick + 1 };
                return Some(Configuration(y));
            }
            pick -= alternatives;
        }
        unreachable!("neighbor index within total")
    }

    /// Draws each option index independently and uniformly.
    pub fn random_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        Configuration(
            self.options
                .iter()
                .map(|o| rng.gen_range(0..o.size()))
                .collect(),
        )
    }

    /// Option value tokens joined with `|` in option order.
    pub fn canonical_key(&self, x: &Configuration) -> Result<String, SpaceError> {
        self.validate(x)?;
        Ok(self.key_unchecked(x))
    }

    pub(crate) fn key_unchecked(&self, x: &Configuration) -> String {
        let mut key = String::new();
        for (i, (opt, &v)) in self.options.iter().zip(x.values()).enumerate() {
            if i > 0 {
                key.push(KEY_SEPARATOR);
            }
            key.push_str(&opt.domain[v]);
        }
        key
    }

    /// Inverse of [`canonical_key`](Self::canonical_key).
    pub fn parse_key(&self, key: &str) -> Result<Configuration, SpaceError> {
        let parts: Vec<&str> = key.split(KEY_SEPARATOR).collect();
        if parts.len() != self.options.len() {
            return Err(SpaceError::LengthMismatch {
                expected: self.options.len(),
                got: parts.len(),
            });
        }
        let values = self
            .options
            .iter()
            .zip(parts)
            .map(|(opt, token)| {
                opt.index_of(token).ok_or_else(|| SpaceError::UnknownValue {
                    option: opt.name.clone(),
                    value: token.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Configuration(values))
    }

    /// Looks up the domain index of a value token for the option at `option`.
    pub fn value_index(&self, option: usize, token: &str) -> Result<usize, SpaceError> {
        let opt = &self.options[option];
        opt.index_of(token).ok_or_else(|| SpaceError::UnknownValue {
            option: opt.name.clone(),
            value: token.to_string(),
        })
    }

    /// All configurations in odometer order (last option varies fastest).
    pub fn enumerate(&self) -> impl Iterator<Item = Configuration> + '_ {
        let sizes: Vec<usize> = self.options.iter().map(OptionSpec::size).collect();
        let mut next = Some(vec![0usize; sizes.len()]);
        std::iter::from_fn(move || {
            let current = next.take()?;
            let mut succ = current.clone();
            for i in (0..sizes.len()).rev() {
                succ[i] += 1;
                if succ[i] < sizes[i] {
                    next = Some(succ);
                    break;
                }
                succ[i] = 0;
            }
            Some(Configuration(current))
        })
    }

    /// Space definition text: one `name=v1,v2,...` line per option.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for opt in &self.options {
            out.push_str(&opt.name);
            out.push('=');
            out.push_str(&opt.domain.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SpaceError> {
        let mut options = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| SpaceError::Parse {
                line: lineno + 1,
                message,
            };
            let (name, values) = line
                .split_once('=')
                .ok_or_else(|| parse_err("expected `name=v1,v2,...`".to_string()))?;
            let domain = values.split(',').map(|v| v.trim().to_string()).collect();
            let opt = OptionSpec::new(name.trim(), domain).map_err(|e| parse_err(e.to_string()))?;
            options.push(opt);
        }
        Self::new(options)
    }

    pub fn load(path: &Path) -> Result<Self, SpaceError> {
        let text = fs::read_to_string(path).map_err(|e| SpaceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Stable 64-bit fingerprint of the space definition, as 16 hex digits.
    pub fn fingerprint(&self) -> String {
        let mut h = SipHasher13::new_with_keys(0x6c6f_6e6b_6974, 0x0073_7061_6365);
        h.write(self.to_text().as_bytes());
        format!("{:016x}", h.finish())
    }
}
