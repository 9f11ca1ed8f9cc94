//! Finite domains and finitary operations.
//!
//! Elements of a domain of size `n` are `0..n`. An [`Operation`] is either a
//! dense value table or a named rule evaluated on demand. Tables use the
//! row-major encoding `index(x1,…,xd) = Σ x_i · n^(d−i)`, so the first
//! argument is the most significant digit.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest table `materialize` will build.
pub const MATERIALIZE_LIMIT: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Domain {
    size: u32,
}

impl Domain {
    pub fn new(size: u32) -> Result<Self> {
        if size < 2 {
            return Err(Error::DomainTooSmall(size));
        }
        Ok(Self { size })
    }

    pub fn size(self) -> u32 {
        self.size
    }

    pub fn contains(self, x: u32) -> bool {
        x < self.size
    }

    /// `n^arity`, or `None` on overflow.
    pub fn tuple_count(self, arity: usize) -> Option<u64> {
        u64::from(self.size).checked_pow(u32::try_from(arity).ok()?)
    }

    pub(crate) fn check(self, x: u32) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                value: x,
                size: self.size,
            })
        }
    }

    pub(crate) fn same_as(self, other: Domain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                left: self.size,
                right: other.size,
            })
        }
    }
}

/// Row-major table index of `args`.
pub fn encode(args: &[u32], n: u32) -> u64 {
    args.iter()
        .fold(0u64, |acc, &x| acc * u64::from(n) + u64::from(x))
}

/// Inverse of [`encode`] for a fixed arity.
pub fn decode(mut index: u64, n: u32, arity: usize) -> Vec<u32> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = (index % u64::from(n)) as u32;
        index /= u64::from(n);
    }
    out
}

/// Walks `{0..n}^arity` in row-major order without allocating per step.
pub struct Odometer {
    n: u32,
    current: Vec<u32>,
    started: bool,
    done: bool,
}

impl Odometer {
    pub fn new(n: u32, arity: usize) -> Self {
        Self {
            n,
            current: vec![0; arity],
            started: false,
            done: n == 0,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<&[u32]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        for slot in self.current.iter_mut().rev() {
            *slot += 1;
            if *slot < self.n {
                return Some(&self.current);
            }
            *slot = 0;
        }
        self.done = true;
        None
    }
}

/// The prevailing value of a near-unanimous tuple: all arguments but at most
/// one coincide. Unanimous tuples count. Tuples shorter than 3 have no
/// well-defined prevailing value and yield `None`.
pub fn maj_of_near_unanimous(args: &[u32]) -> Option<u32> {
    if args.len() < 3 {
        return None;
    }
    // With at least 3 entries the prevailing value sits in slot 0 or slot 1.
    let candidate = if args[0] == args[1] || args[0] == args[2] {
        args[0]
    } else {
        args[1]
    };
    let off = args.iter().filter(|&&x| x != candidate).count();
    (off <= 1).then_some(candidate)
}

/// Identifiers of the rule-defined operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleId {
    #[serde(rename = "thm2_f")]
    Thm2F,
    #[serde(rename = "thm2_g")]
    Thm2G,
    #[serde(rename = "thm3_f")]
    Thm3F,
    #[serde(rename = "thm3_g")]
    Thm3G,
}

impl RuleId {
    pub fn name(self) -> &'static str {
        match self {
            RuleId::Thm2F => "thm2_f",
            RuleId::Thm2G => "thm2_g",
            RuleId::Thm3F => "thm3_f",
            RuleId::Thm3G => "thm3_g",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "thm2_f" => Ok(RuleId::Thm2F),
            "thm2_g" => Ok(RuleId::Thm2G),
            "thm3_f" => Ok(RuleId::Thm3F),
            "thm3_g" => Ok(RuleId::Thm3G),
            other => Err(Error::UnknownRule(other.to_owned())),
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rule identifier plus its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleSpec {
    pub name: RuleId,
    pub params: RuleParams,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleParams {
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
}

/// How a rule computes its value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Kernel {
    /// `high` when the argument vector equals one of `rows`, else 0.
    RowIndicator { rows: Vec<Vec<u32>>, high: u32 },
    /// Prevailing value on near-unanimous tuples; otherwise 0 if some
    /// argument is 0, else the maximum argument.
    NuElseZeroOrMax,
}

impl Kernel {
    fn eval(&self, args: &[u32]) -> u32 {
        match self {
            Kernel::RowIndicator { rows, high } => {
                if rows.iter().any(|row| row.as_slice() == args) {
                    *high
                } else {
                    0
                }
            }
            Kernel::NuElseZeroOrMax => maj_of_near_unanimous(args).unwrap_or_else(|| {
                if args.contains(&0) {
                    0
                } else {
                    args.iter().copied().max().unwrap_or(0)
                }
            }),
        }
    }
}

#[derive(Debug)]
pub(crate) struct Rule {
    pub(crate) spec: RuleSpec,
    pub(crate) kernel: Kernel,
}

#[derive(Clone, Debug)]
enum Body {
    Table(Arc<[u32]>),
    Rule(Arc<Rule>),
}

/// A finitary operation `A^arity → A`. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Operation {
    domain: Domain,
    arity: usize,
    body: Body,
}

impl Operation {
    pub fn from_table(domain: Domain, arity: usize, table: Vec<u32>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ZeroArity);
        }
        let expected = domain.tuple_count(arity).ok_or_else(|| Error::TooLarge {
            entries: format!("{}^{}", domain.size(), arity),
            limit: MATERIALIZE_LIMIT,
        })?;
        if table.len() as u64 != expected {
            return Err(Error::TableLength {
                expected,
                got: table.len(),
            });
        }
        for &v in &table {
            domain.check(v)?;
        }
        Ok(Self {
            domain,
            arity,
            body: Body::Table(table.into()),
        })
    }

    /// Tabulates `f` over every input.
    pub fn from_fn(domain: Domain, arity: usize, mut f: impl FnMut(&[u32]) -> u32) -> Result<Self> {
        let len = checked_table_len(domain, arity)?;
        let mut table = Vec::with_capacity(len as usize);
        let mut odo = Odometer::new(domain.size(), arity);
        while let Some(args) = odo.next() {
            table.push(f(args));
        }
        Self::from_table(domain, arity, table)
    }

    pub(crate) fn from_rule(domain: Domain, arity: usize, spec: RuleSpec, kernel: Kernel) -> Self {
        Self {
            domain,
            arity,
            body: Body::Rule(Arc::new(Rule { spec, kernel })),
        }
    }

    /// The `index`-th `arity`-ary projection, 1-based.
    pub fn projection(domain: Domain, arity: usize, index: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ZeroArity);
        }
        if index == 0 || index > arity {
            return Err(Error::IndexOutOfRange { index, max: arity });
        }
        Self::from_fn(domain, arity, |x| x[index - 1])
    }

    pub fn constant(domain: Domain, arity: usize, value: u32) -> Result<Self> {
        domain.check(value)?;
        Self::from_fn(domain, arity, |_| value)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn as_table(&self) -> Option<&[u32]> {
        match &self.body {
            Body::Table(t) => Some(t),
            Body::Rule(_) => None,
        }
    }

    pub fn rule_spec(&self) -> Option<&RuleSpec> {
        match &self.body {
            Body::Rule(r) => Some(&r.spec),
            Body::Table(_) => None,
        }
    }

    pub(crate) fn kernel(&self) -> Option<&Kernel> {
        match &self.body {
            Body::Rule(r) => Some(&r.kernel),
            Body::Table(_) => None,
        }
    }

    /// `n^arity` if it fits in `u64`.
    pub fn table_len(&self) -> Option<u64> {
        self.domain.tuple_count(self.arity)
    }

    pub fn evaluate(&self, args: &[u32]) -> Result<u32> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: args.len(),
            });
        }
        for &x in args {
            self.domain.check(x)?;
        }
        Ok(self.eval(args))
    }

    /// Unchecked evaluation for hot loops; arguments must already be valid.
    #[inline]
    pub(crate) fn eval(&self, args: &[u32]) -> u32 {
        match &self.body {
            Body::Table(t) => t[encode(args, self.domain.size) as usize],
            Body::Rule(r) => r.kernel.eval(args),
        }
    }

    /// The full value table (row-major), computing it for rules.
    pub fn to_table(&self) -> Result<Vec<u32>> {
        match &self.body {
            Body::Table(t) => Ok(t.to_vec()),
            Body::Rule(r) => {
                let len = checked_table_len(self.domain, self.arity)?;
                let mut table = Vec::with_capacity(len as usize);
                let mut odo = Odometer::new(self.domain.size(), self.arity);
                while let Some(args) = odo.next() {
                    table.push(r.kernel.eval(args));
                }
                Ok(table)
            }
        }
    }

    /// A tabulated copy. Fails above [`MATERIALIZE_LIMIT`] entries.
    pub fn materialize(&self) -> Result<Operation> {
        match &self.body {
            Body::Table(_) => Ok(self.clone()),
            Body::Rule(_) => Self::from_table(self.domain, self.arity, self.to_table()?),
        }
    }

    /// `self(g_1, …, g_k)`, where every `g_i` has the same arity `k'`.
    pub fn compose(&self, gs: &[Operation]) -> Result<Operation> {
        if gs.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: gs.len(),
            });
        }
        let inner_arity = gs[0].arity;
        for g in gs {
            self.domain.same_as(g.domain)?;
            if g.arity != inner_arity {
                return Err(Error::ArityMismatch {
                    expected: inner_arity,
                    got: g.arity,
                });
            }
        }
        let mut inner = vec![0; gs.len()];
        Self::from_fn(self.domain, inner_arity, |x| {
            for (slot, g) in inner.iter_mut().zip(gs) {
                *slot = g.eval(x);
            }
            self.eval(&inner)
        })
    }

    /// First input `(x,…,x,y,x,…,x)` with `self(…) ≠ x`, if any.
    pub fn near_unanimity_violation(&self) -> Result<Option<(Vec<u32>, u32)>> {
        if self.arity < 3 {
            return Err(Error::NotNuCandidate(self.arity));
        }
        let n = self.domain.size();
        let mut args = vec![0; self.arity];
        for x in 0..n {
            for y in 0..n {
                for p in 0..self.arity {
                    args.fill(x);
                    args[p] = y;
                    let out = self.eval(&args);
                    if out != x {
                        return Ok(Some((args, out)));
                    }
                    if x == y {
                        break;
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn is_near_unanimity(&self) -> Result<bool> {
        Ok(self.near_unanimity_violation()?.is_none())
    }

    /// First input whose value is none of its arguments, if any.
    ///
    /// Exhaustive over `n^arity` inputs; stops at the first violation.
    pub fn conservativity_violation(&self) -> Option<(Vec<u32>, u32)> {
        let mut odo = Odometer::new(self.domain.size(), self.arity);
        while let Some(args) = odo.next() {
            let out = self.eval(args);
            if !args.contains(&out) {
                return Some((args.to_vec(), out));
            }
        }
        None
    }

    pub fn is_conservative(&self) -> bool {
        self.conservativity_violation().is_none()
    }

    /// Essential positions, in order.
    pub fn essential_variables(&self) -> Vec<bool> {
        let n = self.domain.size();
        let mut essential = vec![false; self.arity];
        let mut probe = vec![0; self.arity];
        let mut odo = Odometer::new(n, self.arity);
        while let Some(args) = odo.next() {
            if essential.iter().all(|&e| e) {
                break;
            }
            let base = self.eval(args);
            for i in 0..self.arity {
                if essential[i] {
                    continue;
                }
                probe.copy_from_slice(args);
                // Only look upwards; the pair is seen once from its lower end.
                for v in args[i] + 1..n {
                    probe[i] = v;
                    if self.eval(&probe) != base {
                        essential[i] = true;
                        break;
                    }
                }
            }
        }
        essential
    }

    pub fn essential_variable_count(&self) -> usize {
        self.essential_variables().iter().filter(|&&e| e).count()
    }

    /// Extensional equality where it can be decided, rule identity otherwise.
    fn extensionally_equal(&self, other: &Operation) -> bool {
        if self.domain != other.domain || self.arity != other.arity {
            return false;
        }
        if let (Body::Rule(a), Body::Rule(b)) = (&self.body, &other.body) {
            if a.spec == b.spec {
                return true;
            }
        }
        match (self.to_table(), other.to_table()) {
            (Ok(a), Ok(b)) => a == b,
            // Too large to compare value-by-value; distinct rules are
            // treated as distinct operations.
            _ => false,
        }
    }
}

impl PartialEq for Operation {
    fn eq(&self, other: &Self) -> bool {
        self.extensionally_equal(other)
    }
}

fn checked_table_len(domain: Domain, arity: usize) -> Result<u64> {
    if arity == 0 {
        return Err(Error::ZeroArity);
    }
    match domain.tuple_count(arity) {
        Some(len) if len <= MATERIALIZE_LIMIT => Ok(len),
        _ => Err(Error::TooLarge {
            entries: format!("{}^{}", domain.size(), arity),
            limit: MATERIALIZE_LIMIT,
        }),
    }
}
