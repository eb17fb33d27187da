//! Symbols, symbol families, discrete differences, condition checkers and the
//! dyadic cutoff / Littlewood–Paley partition.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{total_degree_indices, MultiIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    /// `m(ν)`
    Multiplier,
    /// `m(x, ν)`
    Pseudo,
    /// `μ(ℓ)` with `ℓ = |ν|`
    Radial,
    /// `m(x, ℓ)` with `ℓ = λ_ν = 2|ν| + n`
    Spectral,
    /// `m(x, ν₁, …, ν_κ)`
    Multilinear,
}

impl SymbolKind {
    /// Kinds indexed by a scalar level rather than a multi-index.
    pub fn is_level(self) -> bool {
        matches!(self, SymbolKind::Radial | SymbolKind::Spectral)
    }
}

/// The `x`-dependent factor `a(x)` of a separable symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XFactor {
    One,
    /// `e^{−|x|²}`
    Gauss,
    /// `cos(x₁)`
    Cos,
    /// `(1 + e^{−|x|²})^{−1}`
    Bounded,
}

impl XFactor {
    pub fn eval(self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            XFactor::One => 1.0,
            XFactor::Gauss => (-r2).exp(),
            XFactor::Cos => x.first().map_or(1.0, |v| v.cos()),
            XFactor::Bounded => 1.0 / (1.0 + (-r2).exp()),
        }
    }

    fn parse(name: &str) -> Option<Self> {
        match name {
            "one" => Some(XFactor::One),
            "gauss" => Some(XFactor::Gauss),
            "cos" => Some(XFactor::Cos),
            "bounded" => Some(XFactor::Bounded),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            XFactor::One => "one",
            XFactor::Gauss => "gauss",
            XFactor::Cos => "cos",
            XFactor::Bounded => "bounded",
        }
    }
}

/// Scalar profiles `g(t)` of the frequency magnitude `t`; `λ` is the matching
/// eigenvalue, used by the Riesz family.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    One,
    /// `(1+t)^{−κ}`
    Power { kappa: f64 },
    /// `(1+t)^{iτ}`
    Oscillating { tau: f64 },
    /// `(1+t²)^{ia/2}`
    Mihlin { a: f64 },
    /// `(1 − λ/R)₊^δ`
    Riesz { delta: f64, radius: f64 },
}

impl Profile {
    fn eval(&self, t: f64, lambda: f64) -> Complex64 {
        match *self {
            Profile::One => Complex64::new(1.0, 0.0),
            Profile::Power { kappa } => Complex64::new((1.0 + t).powf(-kappa), 0.0),
            Profile::Oscillating { tau } => Complex64::from_polar(1.0, tau * (1.0 + t).ln()),
            Profile::Mihlin { a } => Complex64::from_polar(1.0, 0.5 * a * (1.0 + t * t).ln()),
            Profile::Riesz { delta, radius } => {
                let r = 1.0 - lambda / radius;
                Complex64::new(if r > 0.0 { r.powf(delta) } else { 0.0 }, 0.0)
            }
        }
    }

    fn smooth(&self) -> bool {
        !matches!(self, Profile::Riesz { .. })
    }

    fn describe(&self) -> String {
        match self {
            Profile::One => "one".into(),
            Profile::Power { kappa } => format!("power:{kappa}"),
            Profile::Oscillating { tau } => format!("oscillating:{tau}"),
            Profile::Mihlin { a } => format!("mihlin:{a}"),
            Profile::Riesz { delta, radius } => format!("riesz:{delta}:{radius}"),
        }
    }
}

/// Tabulated symbol values keyed by multi-index (and optionally by `x`).
#[derive(Debug, Clone)]
pub struct SymbolTable {
    n: usize,
    with_x: bool,
    /// ν → list of (x, value); `x` is empty for x-independent tables.
    entries: HashMap<Vec<usize>, Vec<(Vec<f64>, Complex64)>>,
    max_degree: usize,
}

impl SymbolTable {
    /// Builds an x-independent table from `(ν, value)` pairs.
    pub fn from_values(n: usize, values: Vec<(Vec<usize>, Complex64)>) -> Result<Self> {
        let mut entries: HashMap<Vec<usize>, Vec<(Vec<f64>, Complex64)>> = HashMap::new();
        for (nu, v) in values {
            if nu.len() != n {
                return Err(Error::InvalidArgument("table index of the wrong dimension".into()));
            }
            entries.entry(nu).or_default().push((Vec::new(), v));
        }
        Self::finish(n, false, entries)
    }

    fn finish(n: usize, with_x: bool, entries: HashMap<Vec<usize>, Vec<(Vec<f64>, Complex64)>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("empty symbol table".into()));
        }
        let max_degree = entries.keys().map(|k| k.iter().sum()).max().unwrap_or(0);
        if !with_x && entries.values().any(|v| v.len() > 1) {
            return Err(Error::InvalidArgument("duplicate table index".into()));
        }
        Ok(SymbolTable { n, with_x, entries, max_degree })
    }

    /// Reads `nu_1,…,nu_n[,x_1,…,x_n],re,im`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        let n = cols.iter().filter(|c| c.starts_with("nu_")).count();
        let nx = cols.iter().filter(|c| c.starts_with("x_")).count();
        let expected: Vec<String> = (1..=n)
            .map(|i| format!("nu_{i}"))
            .chain((1..=nx).map(|i| format!("x_{i}")))
            .chain(["re".to_string(), "im".to_string()])
            .collect();
        if n == 0 || (nx != 0 && nx != n) || cols != expected {
            return Err(Error::Parse(format!("unexpected table header {cols:?}, want {expected:?}")));
        }
        let mut entries: HashMap<Vec<usize>, Vec<(Vec<f64>, Complex64)>> = HashMap::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let field = |i: usize| rec.get(i).map(str::trim).unwrap_or("");
            let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", line + 2));
            let nu = (0..n)
                .map(|i| field(i).parse::<usize>().map_err(|_| bad("index")))
                .collect::<Result<Vec<_>>>()?;
            let x = (0..nx)
                .map(|i| field(n + i).parse::<f64>().map_err(|_| bad("x value")))
                .collect::<Result<Vec<_>>>()?;
            let re: f64 = field(n + nx).parse().map_err(|_| bad("re"))?;
            let im: f64 = field(n + nx + 1).parse().map_err(|_| bad("im"))?;
            entries.entry(nu).or_default().push((x, Complex64::new(re, im)));
        }
        Self::finish(n, nx > 0, entries)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn depends_on_x(&self) -> bool {
        self.with_x
    }

    /// Largest `|ν|` declared.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn contains(&self, nu: &[usize]) -> bool {
        self.entries.contains_key(nu)
    }

    fn lookup(&self, x: &[f64], nu: &[usize]) -> Result<Complex64> {
        let rows = self.entries.get(nu).ok_or_else(|| Error::OutOfRange {
            index: nu.to_vec(),
            range: "declared table indices".into(),
        })?;
        if !self.with_x {
            return Ok(rows[0].1);
        }
        // Nearest declared x point.
        let dist = |p: &[f64]| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        Ok(rows
            .iter()
            .min_by(|a, b| dist(&a.0).partial_cmp(&dist(&b.0)).unwrap())
            .map(|r| r.1)
            .unwrap())
    }
}

type CustomFn = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    Family { profile: Profile, x: XFactor, dilation: f64 },
    Table(Arc<SymbolTable>),
    Difference { base: Box<Symbol>, alpha: Vec<usize> },
    Product(Box<Symbol>, Box<Symbol>),
    Separable { x: XFactor, slots: Vec<Symbol> },
    Custom { name: String, f: CustomFn, x_dependent: bool },
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluator::Family { profile, x, dilation } => {
                write!(f, "Family({profile:?}, {x:?}, dilation={dilation})")
            }
            Evaluator::Table(t) => write!(f, "Table(n={}, max_degree={})", t.n, t.max_degree),
            Evaluator::Difference { base, alpha } => write!(f, "Difference({base:?}, {alpha:?})"),
            Evaluator::Product(a, b) => write!(f, "Product({a:?}, {b:?})"),
            Evaluator::Separable { x, slots } => write!(f, "Separable({x:?}, {slots:?})"),
            Evaluator::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A symbol: kind, dimension, arity and evaluator.
#[derive(Debug, Clone)]
pub struct Symbol {
    kind: SymbolKind,
    n: usize,
    arity: usize,
    eval: Evaluator,
}

enum Freq<'a> {
    Index(&'a [usize]),
    Real(&'a [f64]),
}

/// Builds a symbol from a family name and numeric parameters.
///
/// Families: `one`, `power κ`, `oscillating τ`, `mihlin a`, `riesz δ R`. The
/// `mihlin` family carries the bounded factor `(1 + e^{−|x|²})^{−1}` and is a
/// pseudo-multiplier; the others are multipliers.
pub fn make_symbol(family: &str, params: &[f64], n: usize) -> Result<Symbol> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let (profile, x) = family_parts(family, params)?;
    Ok(Symbol::family(profile, x, n))
}

/// Profile and x-factor of a named family, as used by [`make_symbol`].
pub fn family_parts(family: &str, params: &[f64]) -> Result<(Profile, XFactor)> {
    let need = |k: usize| -> Result<()> {
        if params.len() == k {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("family '{family}' takes {k} parameter(s), got {}", params.len())))
        }
    };
    let parts = match family {
        "one" => {
            need(0)?;
            (Profile::One, XFactor::One)
        }
        "power" => {
            need(1)?;
            (Profile::Power { kappa: params[0] }, XFactor::One)
        }
        "oscillating" => {
            need(1)?;
            (Profile::Oscillating { tau: params[0] }, XFactor::One)
        }
        "mihlin" => {
            need(1)?;
            (Profile::Mihlin { a: params[0] }, XFactor::Bounded)
        }
        "riesz" => {
            need(2)?;
            if !(params[1] > 0.0) || !(params[0] >= 0.0) {
                return Err(Error::InvalidArgument("riesz needs δ ≥ 0 and R > 0".into()));
            }
            (Profile::Riesz { delta: params[0], radius: params[1] }, XFactor::One)
        }
        other => return Err(Error::InvalidArgument(format!("unknown symbol family '{other}'"))),
    };
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("non-finite family parameter".into()));
    }
    Ok(parts)
}

impl Symbol {
    /// `a(x)·g(|ξ|)`; pseudo if `a` is not constant.
    pub fn family(profile: Profile, x: XFactor, n: usize) -> Symbol {
        let kind = if x == XFactor::One { SymbolKind::Multiplier } else { SymbolKind::Pseudo };
        Symbol { kind, n, arity: 1, eval: Evaluator::Family { profile, x, dilation: 1.0 } }
    }

    /// `a(x)·b(ν)` for a family symbol `b`.
    pub fn separable(x: XFactor, inner: &Symbol) -> Result<Symbol> {
        match &inner.eval {
            Evaluator::Family { profile, x: XFactor::One, dilation } => {
                let mut s = Symbol::family(profile.clone(), x, inner.n);
                if let Evaluator::Family { dilation: d, .. } = &mut s.eval {
                    *d = *dilation;
                }
                Ok(s)
            }
            _ => Err(Error::InvalidArgument("separable symbols take an x-independent family".into())),
        }
    }

    pub fn table(table: SymbolTable) -> Symbol {
        let kind = if table.with_x { SymbolKind::Pseudo } else { SymbolKind::Multiplier };
        Symbol { kind, n: table.n, arity: 1, eval: Evaluator::Table(Arc::new(table)) }
    }

    /// A symbol given by a closure `f(x, ξ)`; for discrete arguments `ξ` holds
    /// the indices as reals. Level kinds receive a single-entry `ξ`.
    pub fn custom<F>(name: &str, kind: SymbolKind, n: usize, arity: usize, x_dependent: bool, f: F) -> Result<Symbol>
    where
        F: Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    {
        validate_arity(kind, arity)?;
        Ok(Symbol { kind, n, arity, eval: Evaluator::Custom { name: name.into(), f: Arc::new(f), x_dependent } })
    }

    /// Multilinear symbol from a family profile evaluated at the joint `ℓ¹` magnitude.
    pub fn multilinear_family(profile: Profile, x: XFactor, n: usize, arity: usize) -> Result<Symbol> {
        validate_arity(SymbolKind::Multilinear, arity)?;
        Ok(Symbol { kind: SymbolKind::Multilinear, n, arity, eval: Evaluator::Family { profile, x, dilation: 1.0 } })
    }

    /// Declared-separable multilinear symbol `a(x)·Π_j m_j(ν_j)`.
    pub fn multilinear_separable(x: XFactor, slots: Vec<Symbol>) -> Result<Symbol> {
        validate_arity(SymbolKind::Multilinear, slots.len())?;
        let n = slots[0].n;
        for s in &slots {
            if s.kind != SymbolKind::Multiplier || s.n != n {
                return Err(Error::InvalidArgument("separable slots must be multipliers of equal dimension".into()));
            }
        }
        Ok(Symbol { kind: SymbolKind::Multilinear, n, arity: slots.len(), eval: Evaluator::Separable { x, slots } })
    }

    /// Reinterpret a linear symbol under a different kind.
    pub fn with_kind(&self, kind: SymbolKind) -> Result<Symbol> {
        if kind == SymbolKind::Multilinear || self.kind == SymbolKind::Multilinear {
            return Err(Error::Unsupported("kind changes to or from multilinear".into()));
        }
        if kind == SymbolKind::Multiplier && self.depends_on_x() {
            return Err(Error::InvalidArgument("x-dependent symbol cannot be a multiplier".into()));
        }
        let mut s = self.clone();
        s.kind = kind;
        Ok(s)
    }

    /// `m(x, c·ξ)` for family symbols.
    pub fn dilated(&self, c: f64) -> Result<Symbol> {
        match &self.eval {
            Evaluator::Family { profile, x, dilation } => Ok(Symbol {
                eval: Evaluator::Family { profile: profile.clone(), x: *x, dilation: dilation * c },
                ..self.clone()
            }),
            _ => Err(Error::Unsupported("dilation of non-family symbols".into())),
        }
    }

    /// Pointwise product of two linear symbols of the same kind.
    pub fn product(&self, other: &Symbol) -> Result<Symbol> {
        if self.n != other.n || self.arity != other.arity {
            return Err(Error::InvalidArgument("product of incompatible symbols".into()));
        }
        let kind = if self.kind == other.kind {
            self.kind
        } else if matches!(
            (self.kind, other.kind),
            (SymbolKind::Multiplier, SymbolKind::Pseudo) | (SymbolKind::Pseudo, SymbolKind::Multiplier)
        ) {
            SymbolKind::Pseudo
        } else {
            return Err(Error::InvalidArgument("product of symbols of different kinds".into()));
        };
        Ok(Symbol { kind, n: self.n, arity: self.arity, eval: Evaluator::Product(Box::new(self.clone()), Box::new(other.clone())) })
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Per-slot factors of a declared-separable multilinear symbol.
    pub fn separable_slots(&self) -> Option<(XFactor, &[Symbol])> {
        match &self.eval {
            Evaluator::Separable { x, slots } => Some((*x, slots)),
            _ => None,
        }
    }

    /// `(a, b)` with `m(x, ν) = a(x)·b(ν)` for family symbols, where the split
    /// is known by construction; `b` is x-independent.
    pub fn x_factorization(&self) -> Option<(XFactor, Symbol)> {
        match &self.eval {
            Evaluator::Family { profile, x, dilation } => {
                let kind = if self.kind == SymbolKind::Pseudo { SymbolKind::Multiplier } else { self.kind };
                let eval = Evaluator::Family { profile: profile.clone(), x: XFactor::One, dilation: *dilation };
                Some((*x, Symbol { kind, n: self.n, arity: self.arity, eval }))
            }
            _ => None,
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match &self.eval {
            Evaluator::Family { x, .. } | Evaluator::Separable { x, .. } => *x != XFactor::One,
            Evaluator::Table(t) => t.with_x,
            Evaluator::Difference { base, .. } => base.depends_on_x(),
            Evaluator::Product(a, b) => a.depends_on_x() || b.depends_on_x(),
            Evaluator::Custom { x_dependent, .. } => *x_dependent,
        }
    }

    /// Whether the symbol can be sampled at real frequencies.
    pub fn real_evaluable(&self) -> bool {
        match &self.eval {
            Evaluator::Family { .. } | Evaluator::Custom { .. } => true,
            Evaluator::Table(_) | Evaluator::Difference { .. } => false,
            Evaluator::Product(a, b) => a.real_evaluable() && b.real_evaluable(),
            Evaluator::Separable { slots, .. } => slots.iter().all(Symbol::real_evaluable),
        }
    }

    /// Whether finite-difference derivatives of the real extension make sense.
    pub fn is_smooth(&self) -> bool {
        match &self.eval {
            Evaluator::Family { profile, .. } => profile.smooth(),
            Evaluator::Table(_) | Evaluator::Difference { .. } => false,
            Evaluator::Product(a, b) => a.is_smooth() && b.is_smooth(),
            Evaluator::Separable { slots, .. } => slots.iter().all(Symbol::is_smooth),
            Evaluator::Custom { .. } => true,
        }
    }

    /// Largest total degree on which a tabulated symbol is declared.
    pub fn declared_degree(&self) -> Option<usize> {
        match &self.eval {
            Evaluator::Table(t) => Some(t.max_degree),
            Evaluator::Difference { base, .. } => base.declared_degree(),
            Evaluator::Product(a, b) => match (a.declared_degree(), b.declared_degree()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.eval {
            Evaluator::Family { profile, x, dilation } => {
                let mut s = if *x == XFactor::One {
                    profile.describe()
                } else if matches!(profile, Profile::Mihlin { .. }) && *x == XFactor::Bounded {
                    profile.describe()
                } else {
                    format!("separable:{}:{}", x.name(), profile.describe())
                };
                if *dilation != 1.0 {
                    s = format!("{s}@{dilation}");
                }
                s
            }
            Evaluator::Table(t) => format!("table(n={}, |ν|≤{})", t.n, t.max_degree),
            Evaluator::Difference { base, alpha } => format!("Δ^{alpha:?}[{}]", base.describe()),
            Evaluator::Product(a, b) => format!("({})*({})", a.describe(), b.describe()),
            Evaluator::Separable { x, slots } => {
                let parts: Vec<String> = slots.iter().map(Symbol::describe).collect();
                format!("separable:{}:[{}]", x.name(), parts.join(","))
            }
            Evaluator::Custom { name, .. } => name.clone(),
        }
    }

    /// Expected length of the frequency argument.
    pub fn freq_len(&self) -> usize {
        match self.kind {
            SymbolKind::Radial | SymbolKind::Spectral => 1,
            SymbolKind::Multilinear => self.n * self.arity,
            _ => self.n,
        }
    }

    /// Step between consecutive admissible levels (2 for eigenvalues).
    pub fn level_step(&self) -> usize {
        if self.kind == SymbolKind::Spectral {
            2
        } else {
            1
        }
    }

    /// `m(x, ν)` at a discrete argument: a multi-index, a level `[ℓ]`, or the
    /// concatenation `(ν₁, …, ν_κ)` for multilinear symbols.
    pub fn eval_index(&self, x: &[f64], nu: &[usize]) -> Result<Complex64> {
        self.check_freq(nu.len())?;
        let v = self.eval_freq(x, Freq::Index(nu))?;
        finite(v, || format!("x={x:?}, ν={nu:?}"))
    }

    /// `m(x, ξ)` at a real frequency (Euclidean magnitude for vector arguments).
    pub fn eval_real(&self, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        self.check_freq(xi.len())?;
        if !self.real_evaluable() {
            return Err(Error::Unsupported(format!("{} cannot be evaluated at real frequencies", self.describe())));
        }
        let v = self.eval_freq(x, Freq::Real(xi))?;
        finite(v, || format!("x={x:?}, ξ={xi:?}"))
    }

    fn check_freq(&self, len: usize) -> Result<()> {
        if len != self.freq_len() {
            return Err(Error::InvalidArgument(format!(
                "frequency argument of length {len}, symbol expects {}",
                self.freq_len()
            )));
        }
        Ok(())
    }

    fn magnitude(&self, freq: &Freq) -> f64 {
        match (self.kind, freq) {
            (SymbolKind::Radial | SymbolKind::Spectral, Freq::Index(v)) => v[0] as f64,
            (SymbolKind::Radial | SymbolKind::Spectral, Freq::Real(v)) => v[0],
            (_, Freq::Index(v)) => v.iter().sum::<usize>() as f64,
            (_, Freq::Real(v)) => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
        }
    }

    fn eval_freq(&self, x: &[f64], freq: Freq) -> Result<Complex64> {
        match &self.eval {
            Evaluator::Family { profile, x: xf, dilation } => {
                let t = self.magnitude(&freq) * dilation;
                let lambda = if self.kind == SymbolKind::Spectral { t } else { 2.0 * t + (self.n * self.arity) as f64 };
                Ok(profile.eval(t, lambda) * xf.eval(x))
            }
            Evaluator::Table(table) => match freq {
                Freq::Index(nu) => table.lookup(x, nu),
                Freq::Real(_) => Err(Error::Unsupported("tabulated symbols at real frequencies".into())),
            },
            Evaluator::Difference { base, alpha } => match freq {
                Freq::Index(nu) => difference_at(base, alpha, x, nu),
                Freq::Real(_) => Err(Error::Unsupported("differences at real frequencies".into())),
            },
            Evaluator::Product(a, b) => {
                let fa = match &freq {
                    Freq::Index(v) => a.eval_freq(x, Freq::Index(v))?,
                    Freq::Real(v) => a.eval_freq(x, Freq::Real(v))?,
                };
                let fb = b.eval_freq(x, freq)?;
                Ok(fa * fb)
            }
            Evaluator::Separable { x: xf, slots } => {
                let mut acc = Complex64::new(xf.eval(x), 0.0);
                for (j, s) in slots.iter().enumerate() {
                    let range = j * self.n..(j + 1) * self.n;
                    acc *= match &freq {
                        Freq::Index(v) => s.eval_freq(x, Freq::Index(&v[range]))?,
                        Freq::Real(v) => s.eval_freq(x, Freq::Real(&v[range]))?,
                    };
                }
                Ok(acc)
            }
            Evaluator::Custom { f, .. } => Ok(match freq {
                Freq::Index(v) => {
                    let r: Vec<f64> = v.iter().map(|&k| k as f64).collect();
                    f(x, &r)
                }
                Freq::Real(v) => f(x, v),
            }),
        }
    }
}

fn validate_arity(kind: SymbolKind, arity: usize) -> Result<()> {
    match (kind, arity) {
        (SymbolKind::Multilinear, a) if a >= 2 => Ok(()),
        (SymbolKind::Multilinear, _) => Err(Error::InvalidArgument("multilinear symbols need κ ≥ 2".into())),
        (_, 1) => Ok(()),
        _ => Err(Error::InvalidArgument("linear symbols have arity 1".into())),
    }
}

fn finite(v: Complex64, at: impl FnOnce() -> String) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(at()))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Δ^α m(ν) = Σ_{β≤α} (−1)^{|α−β|} C(α,β) m(ν+s·β)` with step `s` (2 on eigenvalue levels).
fn difference_at(base: &Symbol, alpha: &[usize], x: &[f64], nu: &[usize]) -> Result<Complex64> {
    let step = base.level_step();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut beta = vec![0usize; alpha.len()];
    let mut shifted = nu.to_vec();
    loop {
        let mut coeff = 1.0;
        for (j, (&a, &b)) in alpha.iter().zip(&beta).enumerate() {
            coeff *= binomial(a, b);
            if (a - b) % 2 == 1 {
                coeff = -coeff;
            }
            shifted[j] = nu[j] + step * b;
        }
        acc += base.eval_freq(x, Freq::Index(&shifted))? * coeff;
        // Next β in the box 0 ≤ β ≤ α.
        let mut j = 0;
        loop {
            if j == alpha.len() {
                return Ok(acc);
            }
            if beta[j] < alpha[j] {
                beta[j] += 1;
                break;
            }
            beta[j] = 0;
            j += 1;
        }
    }
}

/// `Δ^α m` with forward differences `Δ_j m(ν) = m(ν + e_j) − m(ν)`.
pub fn forward_difference(s: &Symbol, alpha: &MultiIndex) -> Result<Symbol> {
    if s.kind == SymbolKind::Multilinear {
        return Err(Error::Unsupported("differences of multilinear symbols".into()));
    }
    if alpha.dim() != s.freq_len() {
        return Err(Error::InvalidArgument(format!(
            "difference order of dimension {}, symbol argument has {}",
            alpha.dim(),
            s.freq_len()
        )));
    }
    // Nested differences are merged, so Δ₁Δ₂ and Δ₂Δ₁ evaluate identically.
    let (base, order) = match &s.eval {
        Evaluator::Difference { base, alpha: inner } => {
            (base.clone(), inner.iter().zip(alpha.components()).map(|(a, b)| a + b).collect())
        }
        _ => (Box::new(s.clone()), alpha.components().to_vec()),
    };
    Ok(Symbol { kind: s.kind, n: s.n, arity: 1, eval: Evaluator::Difference { base, alpha: order } })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionMode {
    Marcinkiewicz,
    KohnNirenberg,
}

/// Sampling ranges for [`condition_report`].
#[derive(Debug, Clone)]
pub struct ConditionRange {
    /// Discrete mode: all `ν` with `|ν| ≤ max_degree` (levels `ℓ ≤ max_degree` for level kinds).
    pub max_degree: usize,
    /// Continuous mode: `ξ` on a uniform grid over `[−radius, radius]^n`.
    pub radius: f64,
    pub samples_per_axis: usize,
    /// Points over which the grid-sup in `x` is taken (ignored for x-independent symbols).
    pub x_points: Vec<Vec<f64>>,
}

impl ConditionRange {
    pub fn discrete(max_degree: usize) -> Self {
        ConditionRange { max_degree, radius: 0.0, samples_per_axis: 0, x_points: Vec::new() }
    }

    pub fn real(radius: f64, samples_per_axis: usize) -> Self {
        ConditionRange { max_degree: 0, radius, samples_per_axis, x_points: Vec::new() }
    }

    pub fn with_x_points(mut self, x_points: Vec<Vec<f64>>) -> Self {
        self.x_points = x_points;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionEntry {
    pub alpha: Vec<usize>,
    pub constant: f64,
    /// Frequency at which the supremum is attained.
    pub argsup_freq: Vec<f64>,
    /// `x` at which the supremum is attained (empty for x-independent symbols).
    pub argsup_x: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub mode: ConditionMode,
    pub rho: usize,
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn constant(&self, alpha: &[usize]) -> Option<f64> {
        self.entries.iter().find(|e| e.alpha == alpha).map(|e| e.constant)
    }
}

/// Constants `C_α = sup (1+|ν|)^{|α|}|Δ^α m|` (discrete) or
/// `sup (1+|ξ|)^{|α|}|∂^α m|` (continuous), for all `|α| ≤ ρ`, as grid-sups.
///
/// Discrete points whose shifted arguments leave a table's declared range are skipped.
pub fn condition_report(s: &Symbol, rho: usize, mode: ConditionMode, range: &ConditionRange) -> Result<ConditionReport> {
    if s.kind == SymbolKind::Multilinear {
        return Err(Error::Unsupported("condition reports for multilinear symbols".into()));
    }
    let d = s.freq_len();
    let xs: Vec<Vec<f64>> = if s.depends_on_x() && !range.x_points.is_empty() {
        range.x_points.clone()
    } else {
        vec![vec![0.0; s.n]]
    };
    let alphas = total_degree_indices(d, rho);
    let mut entries = Vec::with_capacity(alphas.len());
    match mode {
        ConditionMode::Marcinkiewicz => {
            let points: Vec<Vec<usize>> = if s.kind.is_level() {
                let step = s.level_step();
                let first = if s.kind == SymbolKind::Spectral { s.n } else { 0 };
                (first..=range.max_degree).step_by(step).map(|l| vec![l]).collect()
            } else {
                total_degree_indices(d, range.max_degree)
                    .into_iter()
                    .map(|m| m.components().to_vec())
                    .collect()
            };
            for alpha in alphas {
                let diff = forward_difference(s, &alpha)?;
                let order = alpha.abs() as i32;
                let best = points
                    .par_iter()
                    .map(|nu| -> Result<(f64, Vec<f64>, Vec<f64>)> {
                        let mag = if s.kind.is_level() { nu[0] as f64 } else { nu.iter().sum::<usize>() as f64 };
                        let weight = (1.0 + mag).powi(order);
                        let mut best = (0.0, nu.iter().map(|&v| v as f64).collect(), Vec::new());
                        for x in &xs {
                            match diff.eval_index(x, nu) {
                                Ok(v) => {
                                    let c = weight * v.norm();
                                    if c > best.0 {
                                        best = (c, best.1, if s.depends_on_x() { x.clone() } else { Vec::new() });
                                    }
                                }
                                Err(Error::OutOfRange { .. }) => {}
                                Err(e) => return Err(e),
                            }
                        }
                        Ok(best)
                    })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold((0.0, Vec::new(), Vec::new()), |acc, b| if b.0 > acc.0 { b } else { acc });
                entries.push(ConditionEntry {
                    alpha: alpha.components().to_vec(),
                    constant: best.0,
                    argsup_freq: best.1,
                    argsup_x: best.2,
                });
            }
        }
        ConditionMode::KohnNirenberg => {
            if !s.real_evaluable() {
                return Err(Error::Unsupported(format!("{} is not defined at real ξ", s.describe())));
            }
            let m = range.samples_per_axis.max(2);
            let axis: Vec<f64> = if s.kind.is_level() {
                (0..m).map(|i| range.radius * i as f64 / (m - 1) as f64).collect()
            } else {
                (0..m).map(|i| -range.radius + 2.0 * range.radius * i as f64 / (m - 1) as f64).collect()
            };
            let total = m.pow(d as u32);
            let points: Vec<Vec<f64>> = (0..total)
                .map(|mut flat| {
                    let mut p = vec![0.0; d];
                    for j in (0..d).rev() {
                        p[j] = axis[flat % m];
                        flat /= m;
                    }
                    p
                })
                .collect();
            for alpha in alphas {
                let order = alpha.abs() as i32;
                let best = points
                    .par_iter()
                    .map(|xi| -> Result<(f64, Vec<f64>, Vec<f64>)> {
                        let mag = if s.kind.is_level() { xi[0].abs() } else { xi.iter().map(|v| v * v).sum::<f64>().sqrt() };
                        let weight = (1.0 + mag).powi(order);
                        let mut best = (0.0, xi.clone(), Vec::new());
                        for x in &xs {
                            let v = central_derivative(s, x, xi, alpha.components())?;
                            let c = weight * v.norm();
                            if c > best.0 {
                                best = (c, best.1, if s.depends_on_x() { x.clone() } else { Vec::new() });
                            }
                        }
                        Ok(best)
                    })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold((0.0, Vec::new(), Vec::new()), |acc, b| if b.0 > acc.0 { b } else { acc });
                entries.push(ConditionEntry {
                    alpha: alpha.components().to_vec(),
                    constant: best.0,
                    argsup_freq: best.1,
                    argsup_x: best.2,
                });
            }
        }
    }
    Ok(ConditionReport { mode, rho, entries })
}

/// Nested central differences with per-axis step `1e-4·max(1, |ξ_j|)`.
fn central_derivative(s: &Symbol, x: &[f64], xi: &[f64], alpha: &[usize]) -> Result<Complex64> {
    fn rec(s: &Symbol, x: &[f64], xi: &mut Vec<f64>, alpha: &[usize], axis: usize, left: usize) -> Result<Complex64> {
        if axis == alpha.len() {
            return s.eval_real(x, xi);
        }
        if left == 0 {
            return rec(s, x, xi, alpha, axis + 1, alpha.get(axis + 1).copied().unwrap_or(0));
        }
        let h = 1e-4 * xi[axis].abs().max(1.0);
        let orig = xi[axis];
        xi[axis] = orig + h;
        let plus = rec(s, x, xi, alpha, axis, left - 1)?;
        xi[axis] = orig - h;
        let minus = rec(s, x, xi, alpha, axis, left - 1)?;
        xi[axis] = orig;
        Ok((plus - minus) / (2.0 * h))
    }
    let mut p = xi.to_vec();
    rec(s, x, &mut p, alpha, 0, alpha.first().copied().unwrap_or(0))
}

/// Smooth step `S(t) = e^{−1/t} / (e^{−1/t} + e^{−1/(1−t)})`, with `S = 0` for
/// `t ≤ 0` and `S = 1` for `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// The dyadic bump `ψ`: support `[1/2, 4]`, equal to one on `[1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicCutoff {
    pub support: (f64, f64),
    pub plateau: (f64, f64),
}

pub fn make_cutoff() -> DyadicCutoff {
    DyadicCutoff { support: (0.5, 4.0), plateau: (1.0, 2.0) }
}

impl DyadicCutoff {
    pub fn eval(&self, t: f64) -> f64 {
        let (a, b) = self.support;
        let (c, d) = self.plateau;
        if t <= a || t >= b {
            0.0
        } else if t < c {
            smooth_step((t - a) / (c - a))
        } else if t <= d {
            1.0
        } else {
            1.0 - smooth_step((t - d) / (b - d))
        }
    }
}

/// Littlewood–Paley family `ψ₀(λ) = Φ(λ)`, `ψ_l(λ) = Φ(2^{−l}λ) − Φ(2^{−l+1}λ)`
/// with `Φ = 1` on `(0, 1]` and `Φ = 0` on `[2, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LPPartition {
    pub count: usize,
}

pub fn make_lp_partition(count: usize) -> Result<LPPartition> {
    if count == 0 {
        return Err(Error::InvalidArgument("partition needs L ≥ 1".into()));
    }
    Ok(LPPartition { count })
}

impl LPPartition {
    /// `Φ`, the smooth step from 1 to 0 over `[1, 2]`.
    pub fn base(t: f64) -> f64 {
        1.0 - smooth_step(t - 1.0)
    }

    /// `ψ_l(λ)` for `l = 0..=L`.
    pub fn weight(&self, l: usize, lambda: f64) -> f64 {
        if l == 0 {
            Self::base(lambda)
        } else if l > self.count {
            0.0
        } else {
            let s = 2f64.powi(-(l as i32));
            Self::base(s * lambda) - Self::base(2.0 * s * lambda)
        }
    }

    pub fn weights(&self, lambda: f64) -> Vec<f64> {
        (0..=self.count).map(|l| self.weight(l, lambda)).collect()
    }

    /// Largest `λ` on which the family sums to one: `2^L`.
    pub fn lambda_max(&self) -> f64 {
        2f64.powi(self.count as i32)
    }

    /// Support `[2^{l−1}, 2^{l+1}]` of `ψ_l` (`(0, 2]` for `ψ₀`).
    pub fn support(&self, l: usize) -> (f64, f64) {
        if l == 0 {
            (0.0, 2.0)
        } else {
            (2f64.powi(l as i32 - 1), 2f64.powi(l as i32 + 1))
        }
    }
}

/// Parses the command-line grammar `family[:param…]`, `separable:xfactor:family[:param…]`
/// and `table:path.csv`.
pub fn parse_symbol_spec(spec: &str, n: usize) -> Result<Symbol> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums = |items: &[&str]| -> Result<Vec<f64>> {
        items
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{p}' in symbol '{spec}'"))))
            .collect()
    };
    match parts[0] {
        "table" => {
            let path = spec.strip_prefix("table:").filter(|p| !p.is_empty());
            let path = path.ok_or_else(|| Error::Parse("table needs a path".into()))?;
            let table = SymbolTable::from_csv(Path::new(path))?;
            if table.dim() != n {
                return Err(Error::InvalidArgument(format!("table has dimension {}, expected {n}", table.dim())));
            }
            Ok(Symbol::table(table))
        }
        "separable" => {
            if parts.len() < 3 {
                return Err(Error::Parse("separable:xfactor:family[:params]".into()));
            }
            let x = XFactor::parse(parts[1]).ok_or_else(|| Error::Parse(format!("unknown x-factor '{}'", parts[1])))?;
            let inner = make_symbol(parts[2], &nums(&parts[3..])?, n)?;
            Symbol::separable(x, &inner)
        }
        family => make_symbol(family, &nums(&parts[1..])?, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn one_d(nu: usize) -> Vec<usize> {
        vec![nu]
    }

    #[test]
    fn family_examples() {
        let p = make_symbol("power", &[1.0], 2).unwrap();
        assert_eq!(p.eval_index(&[], &[1, 2]).unwrap(), Complex64::new(0.25, 0.0));
        let osc = make_symbol("oscillating", &[5.0], 1).unwrap();
        for nu in 0..200 {
            assert!((osc.eval_index(&[], &one_d(nu)).unwrap().norm() - 1.0).abs() < 1e-15);
        }
        let one = make_symbol("one", &[], 3).unwrap();
        assert_eq!(one.eval_index(&[], &[4, 0, 7]).unwrap(), Complex64::new(1.0, 0.0));
        assert!(make_symbol("nope", &[], 1).is_err());
        assert!(make_symbol("power", &[], 1).is_err());
    }

    #[test]
    fn riesz_uses_eigenvalues() {
        let r = make_symbol("riesz", &[2.0, 11.0], 1).unwrap();
        // λ = 2·3 + 1 = 7 → (1 − 7/11)² ; λ = 11 → 0
        let v = r.eval_index(&[], &[3]).unwrap().re;
        assert!((v - (4.0f64 / 11.0).powi(2)).abs() < 1e-15);
        assert_eq!(r.eval_index(&[], &[5]).unwrap().re, 0.0);
        let spectral = r.with_kind(SymbolKind::Spectral).unwrap();
        assert!((spectral.eval_index(&[], &[7]).unwrap().re - v).abs() < 1e-15);
    }

    #[test]
    fn difference_examples() {
        let p = make_symbol("power", &[1.0], 1).unwrap();
        let d = forward_difference(&p, &MultiIndex::new(vec![1])).unwrap();
        assert!((d.eval_index(&[], &[0]).unwrap().re + 0.5).abs() < 1e-15);
        let one = make_symbol("one", &[], 2).unwrap();
        for alpha in [vec![1, 0], vec![0, 2], vec![1, 1]] {
            let d = forward_difference(&one, &MultiIndex::new(alpha)).unwrap();
            for nu in total_degree_indices(2, 6) {
                assert_eq!(d.eval_index(&[], nu.components()).unwrap().norm(), 0.0);
            }
        }
        let lin = Symbol::custom("linear", SymbolKind::Multiplier, 1, 1, false, |_, v| Complex64::new(v[0], 0.0)).unwrap();
        let d2 = forward_difference(&lin, &MultiIndex::new(vec![2])).unwrap();
        for nu in 0..50 {
            assert_eq!(d2.eval_index(&[], &[nu]).unwrap().norm(), 0.0);
        }
        let ml = Symbol::multilinear_family(Profile::One, XFactor::One, 1, 2).unwrap();
        assert!(forward_difference(&ml, &MultiIndex::new(vec![1, 0])).is_err());
    }

    #[test]
    fn differences_commute() {
        let s = Symbol::custom("mixed", SymbolKind::Multiplier, 2, 1, false, |_, v| {
            Complex64::new((1.0 + v[0] * v[1]).ln(), (v[0] - 2.0 * v[1]).sin())
        })
        .unwrap();
        let d12 = forward_difference(&forward_difference(&s, &MultiIndex::new(vec![1, 0])).unwrap(), &MultiIndex::new(vec![0, 1])).unwrap();
        let d21 = forward_difference(&forward_difference(&s, &MultiIndex::new(vec![0, 1])).unwrap(), &MultiIndex::new(vec![1, 0])).unwrap();
        for nu in total_degree_indices(2, 8) {
            assert_eq!(
                d12.eval_index(&[], nu.components()).unwrap(),
                d21.eval_index(&[], nu.components()).unwrap()
            );
        }
    }

    #[test]
    fn marcinkiewicz_examples() {
        let one = make_symbol("one", &[], 1).unwrap();
        let r = condition_report(&one, 2, ConditionMode::Marcinkiewicz, &ConditionRange::discrete(100)).unwrap();
        assert_eq!(r.constant(&[0]), Some(1.0));
        assert_eq!(r.constant(&[1]), Some(0.0));
        assert_eq!(r.constant(&[2]), Some(0.0));

        let p = make_symbol("power", &[1.0], 1).unwrap();
        let r = condition_report(&p, 1, ConditionMode::Marcinkiewicz, &ConditionRange::discrete(10_000)).unwrap();
        // Brute force: (1+ν)|1/(2+ν) − 1/(1+ν)| = 1/(2+ν), largest at ν = 0.
        let brute = (0..=10_000).map(|nu| 1.0 / (2.0 + nu as f64)).fold(0.0, f64::max);
        let e = &r.entries[1];
        assert!((e.constant - brute).abs() < 1e-15 && (e.constant - 0.5).abs() < 1e-15);
        assert_eq!(e.argsup_freq, vec![0.0]);

        let tau = 5.0;
        let osc = make_symbol("oscillating", &[tau], 1).unwrap();
        let r = condition_report(&osc, 1, ConditionMode::Marcinkiewicz, &ConditionRange::discrete(10_000)).unwrap();
        let c1 = r.constant(&[1]).unwrap();
        assert!(c1.is_finite() && c1 <= tau + 1.0);
    }

    #[test]
    fn kohn_nirenberg_mode() {
        let m = make_symbol("mihlin", &[1.0], 1).unwrap();
        let x_points: Vec<Vec<f64>> = (-20..=20).map(|i| vec![i as f64 * 0.25]).collect();
        let range = ConditionRange::real(200.0, 801).with_x_points(x_points);
        let r = condition_report(&m, 2, ConditionMode::KohnNirenberg, &range).unwrap();
        // |∂(1+ξ²)^{i/2}| = |ξ|/(1+ξ²); times (1+|ξ|) this stays below 1.3.
        assert!(r.constant(&[0]).unwrap() <= 1.0 + 1e-12);
        assert!(r.constant(&[1]).unwrap() < 1.3);
        assert!(r.constant(&[2]).unwrap() < 10.0);
        let table = Symbol::table(SymbolTable::from_values(1, vec![(vec![0], Complex64::new(1.0, 0.0))]).unwrap());
        assert!(condition_report(&table, 1, ConditionMode::KohnNirenberg, &range).is_err());
    }

    #[test]
    fn leibniz_product_stays_finite() {
        let a = make_symbol("mihlin", &[1.0], 1).unwrap();
        let b = make_symbol("mihlin", &[-2.5], 1).unwrap();
        let ab = a.product(&b).unwrap();
        let range = ConditionRange::discrete(2000).with_x_points(vec![vec![0.0], vec![1.0]]);
        for s in [&a, &b, &ab] {
            let r = condition_report(s, 3, ConditionMode::Marcinkiewicz, &range).unwrap();
            assert!(r.entries.iter().all(|e| e.constant.is_finite()));
        }
    }

    #[test]
    fn x_dependent_families_are_bounded_on_the_grid() {
        for spec in ["mihlin:2", "separable:cos:power:1", "separable:gauss:oscillating:3", "separable:bounded:one"] {
            let s = parse_symbol_spec(spec, 1).unwrap();
            assert_eq!(s.kind(), SymbolKind::Pseudo);
            for nu in [0, 1, 10, 1000] {
                let sup = (-400..=400)
                    .map(|i| s.eval_index(&[i as f64 * 0.05], &[nu]).unwrap().norm())
                    .fold(0.0, f64::max);
                assert!(sup.is_finite() && sup <= 1.0 + 1e-12, "{spec}");
            }
        }
    }

    #[test]
    fn cutoff_examples() {
        let psi = make_cutoff();
        assert_eq!(psi.eval(1.5), 1.0);
        assert_eq!(psi.eval(0.4), 0.0);
        let v = psi.eval(3.0);
        assert!(v > 0.0 && v < 1.0);
        for i in 0..1000 {
            let t = i as f64 * 0.005;
            let v = psi.eval(t);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn partition_examples() {
        let lp = make_lp_partition(10).unwrap();
        let sum: f64 = lp.weights(100.0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let w = lp.weights(0.8);
        assert_eq!(w[0], 1.0);
        assert!(w[1..].iter().all(|&v| v == 0.0));
        for i in 1..20_000 {
            let lambda = i as f64 * 0.0512;
            let w = lp.weights(lambda);
            assert!(w.iter().filter(|&&v| v != 0.0).count() <= 2, "λ={lambda}");
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(make_lp_partition(0).is_err());
    }

    #[test]
    fn partition_sum_has_zero_derivative() {
        let lp = make_lp_partition(8).unwrap();
        let h = 1e-3;
        for i in 1..2500 {
            let lambda = 0.1 * i as f64;
            let s = |l: f64| lp.weights(l).iter().sum::<f64>();
            let d = (s(lambda + h) - s(lambda - h)) / (2.0 * h);
            assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn tables_from_csv() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "nu_1,re,im\n0,0.3,0\n1,0.9,0\n2,0.1,0").unwrap();
        let s = parse_symbol_spec(&format!("table:{}", file.path().display()), 1).unwrap();
        assert_eq!(s.kind(), SymbolKind::Multiplier);
        assert_eq!(s.eval_index(&[], &[1]).unwrap().re, 0.9);
        assert!(matches!(s.eval_index(&[], &[3]), Err(Error::OutOfRange { .. })));
        assert!(s.eval_real(&[], &[1.0]).is_err());

        let mut px = tempfile::NamedTempFile::new().unwrap();
        writeln!(px, "nu_1,x_1,re,im\n0,-1.0,1,0\n0,1.0,2,0").unwrap();
        let t = SymbolTable::from_csv(px.path()).unwrap();
        let s = Symbol::table(t);
        assert_eq!(s.kind(), SymbolKind::Pseudo);
        assert_eq!(s.eval_index(&[0.7], &[0]).unwrap().re, 2.0);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "nu_1,value\n0,1").unwrap();
        assert!(SymbolTable::from_csv(bad.path()).is_err());
    }

    #[test]
    fn spec_grammar() {
        assert_eq!(parse_symbol_spec("power:1", 1).unwrap().describe(), "power:1");
        assert_eq!(parse_symbol_spec("riesz:2:256", 2).unwrap().kind(), SymbolKind::Multiplier);
        assert!(parse_symbol_spec("power:x", 1).is_err());
        assert!(parse_symbol_spec("separable:sin:power:1", 1).is_err());
        assert!(parse_symbol_spec("table:", 1).is_err());
    }

    #[test]
    fn separable_multilinear_evaluates_per_slot() {
        let a = make_symbol("power", &[1.0], 1).unwrap();
        let b = make_symbol("oscillating", &[2.0], 1).unwrap();
        let m = Symbol::multilinear_separable(XFactor::Cos, vec![a.clone(), b.clone()]).unwrap();
        let v = m.eval_index(&[0.5], &[3, 4]).unwrap();
        let w = a.eval_index(&[], &[3]).unwrap() * b.eval_index(&[], &[4]).unwrap() * 0.5f64.cos();
        assert!((v - w).norm() < 1e-15);
        assert!(Symbol::multilinear_separable(XFactor::One, vec![a]).is_err());
    }
}
