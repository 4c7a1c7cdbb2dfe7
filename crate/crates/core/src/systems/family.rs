use std::collections::BTreeMap;

use super::{
    direct_sum, make_coxeter, make_orthonormal, make_random, CoxeterFamily, CoxeterSpec,
    SystemError, VectorSystem,
};

/// Knobs shared by every family. Families read what they need and ignore
/// the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyParams {
    /// Integer suffix of a family spec (`i2:6` → 6).
    pub param: Option<usize>,
    pub dim: Option<usize>,
    pub n: Option<usize>,
    pub seed: u64,
    pub min_angle: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            param: None,
            dim: None,
            n: None,
            seed: 0,
            min_angle: 0.05,
        }
    }
}

/// A named generator of vector systems.
pub trait SystemFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    fn build(&self, params: &FamilyParams) -> Result<VectorSystem, SystemError>;

    /// Parameters producing a system of exactly `n` vectors, or `None` when
    /// the family cannot. Used by size sweeps.
    fn params_for_size(&self, n: usize, base: &FamilyParams) -> Option<FamilyParams> {
        Some(FamilyParams {
            param: Some(n),
            n: Some(n),
            ..base.clone()
        })
    }
}

struct Orthonormal;

impl SystemFamily for Orthonormal {
    fn name(&self) -> &'static str {
        "orthonormal"
    }
    fn summary(&self) -> &'static str {
        "standard basis e_1..e_d (orthonormal:d or --dim)"
    }
    fn build(&self, p: &FamilyParams) -> Result<VectorSystem, SystemError> {
        let d = p
            .param
            .or(p.dim)
            .ok_or_else(|| SystemError::Spec("orthonormal needs a dimension".into()))?;
        make_orthonormal(d)
    }
}

struct Random;

impl SystemFamily for Random {
    fn name(&self) -> &'static str {
        "random"
    }
    fn summary(&self) -> &'static str {
        "n uniform unit vectors in R^d with a minimum pairwise angle (--dim, --n, --seed)"
    }
    fn build(&self, p: &FamilyParams) -> Result<VectorSystem, SystemError> {
        let d = p
            .dim
            .ok_or_else(|| SystemError::Spec("random needs --dim".into()))?;
        let n =
            p.n.or(p.param)
                .ok_or_else(|| SystemError::Spec("random needs --n".into()))?;
        make_random(d, n, p.seed, p.min_angle)
    }
    fn params_for_size(&self, n: usize, base: &FamilyParams) -> Option<FamilyParams> {
        Some(FamilyParams {
            n: Some(n),
            ..base.clone()
        })
    }
}

struct RandomBasis;

impl SystemFamily for RandomBasis {
    fn name(&self) -> &'static str {
        "random-basis"
    }
    fn summary(&self) -> &'static str {
        "n random unit vectors in R^n (random-basis:n or --n)"
    }
    fn build(&self, p: &FamilyParams) -> Result<VectorSystem, SystemError> {
        let n = p
            .param
            .or(p.n)
            .or(p.dim)
            .ok_or_else(|| SystemError::Spec("random-basis needs a size".into()))?;
        Ok(make_random(n, n, p.seed, p.min_angle)?
            .with_label(format!("random-basis:{n}:s{}", p.seed)))
    }
}

struct Coxeter(CoxeterFamily);

impl SystemFamily for Coxeter {
    fn name(&self) -> &'static str {
        match self.0 {
            CoxeterFamily::I2 => "i2",
            CoxeterFamily::A3 => "a3",
            CoxeterFamily::B3 => "b3",
            CoxeterFamily::H3 => "h3",
            CoxeterFamily::Prism => "prism",
            CoxeterFamily::Orthonormal => "coxeter-orthonormal",
        }
    }
    fn summary(&self) -> &'static str {
        match self.0 {
            CoxeterFamily::I2 => "m lines through the origin at angles kπ/m (i2:m)",
            CoxeterFamily::A3 => "tetrahedral reflection arrangement, 6 vectors in R^3",
            CoxeterFamily::B3 => "octahedral reflection arrangement, 9 vectors in R^3",
            CoxeterFamily::H3 => "icosahedral reflection arrangement, 15 vectors in R^3",
            CoxeterFamily::Prism => "I2(m) in the xy-plane plus e_3 (prism:m)",
            CoxeterFamily::Orthonormal => "orthonormal basis as a Coxeter system",
        }
    }
    fn build(&self, p: &FamilyParams) -> Result<VectorSystem, SystemError> {
        let param = match self.0 {
            CoxeterFamily::A3 | CoxeterFamily::B3 | CoxeterFamily::H3 => 0,
            _ => p.param.ok_or_else(|| {
                SystemError::Spec(format!(
                    "{} needs a parameter, e.g. {}:6",
                    self.name(),
                    self.name()
                ))
            })?,
        };
        make_coxeter(&CoxeterSpec::new(self.0, param))
    }
    fn params_for_size(&self, n: usize, base: &FamilyParams) -> Option<FamilyParams> {
        let param = match self.0 {
            CoxeterFamily::A3 => (n == 6).then_some(0),
            CoxeterFamily::B3 => (n == 9).then_some(0),
            CoxeterFamily::H3 => (n == 15).then_some(0),
            CoxeterFamily::Prism => (n >= 3).then(|| n - 1),
            CoxeterFamily::I2 => (n >= 2).then_some(n),
            CoxeterFamily::Orthonormal => Some(n),
        }?;
        Some(FamilyParams {
            param: Some(param),
            ..base.clone()
        })
    }
}

/// Name → family lookup. Family specs are `name`, `name:param`, or
/// `sum:<spec>+<spec>+…` for orthogonal sums.
pub struct FamilyRegistry {
    families: BTreeMap<&'static str, Box<dyn SystemFamily>>,
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        Self {
            families: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Orthonormal));
        r.register(Box::new(Random));
        r.register(Box::new(RandomBasis));
        for f in [
            CoxeterFamily::I2,
            CoxeterFamily::A3,
            CoxeterFamily::B3,
            CoxeterFamily::H3,
            CoxeterFamily::Prism,
        ] {
            r.register(Box::new(Coxeter(f)));
        }
        r
    }

    /// Registers a family, replacing any previous one with the same name.
    pub fn register(&mut self, family: Box<dyn SystemFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn get(&self, name: &str) -> Option<&dyn SystemFamily> {
        self.families.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.families.keys().copied()
    }

    pub fn families(&self) -> impl Iterator<Item = &dyn SystemFamily> + '_ {
        self.families.values().map(|b| b.as_ref())
    }

    fn lookup(&self, name: &str) -> Result<&dyn SystemFamily, SystemError> {
        self.get(name).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            SystemError::Spec(format!(
                "unknown family `{name}` (known: {}, sum)",
                known.join(", ")
            ))
        })
    }

    /// Splits `name:param` and resolves the family.
    pub fn resolve(&self, spec: &str) -> Result<(&dyn SystemFamily, Option<usize>), SystemError> {
        let (name, param) = match spec.split_once(':') {
            Some((name, p)) => {
                let p = p
                    .parse::<usize>()
                    .map_err(|_| SystemError::Spec(format!("bad parameter `{p}` in `{spec}`")))?;
                (name, Some(p))
            }
            None => (spec, None),
        };
        Ok((self.lookup(name)?, param))
    }

    /// Builds the system named by `spec`; an explicit `:param` overrides
    /// `params.param`.
    pub fn build(&self, spec: &str, params: &FamilyParams) -> Result<VectorSystem, SystemError> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("sum:") {
            let parts: Vec<&str> = rest.split('+').collect();
            if parts.iter().any(|p| p.trim().is_empty()) {
                return Err(SystemError::Spec(format!("empty summand in `{spec}`")));
            }
            let mut acc: Option<VectorSystem> = None;
            for part in parts {
                let s = self.build(part, params)?;
                acc = Some(match acc {
                    None => s,
                    Some(a) => direct_sum(&a, &s),
                });
            }
            return Ok(acc
                .expect("at least one summand")
                .with_label(spec.to_string()));
        }
        let (family, param) = self.resolve(spec)?;
        let mut p = params.clone();
        if param.is_some() {
            p.param = param;
        }
        family.build(&p)
    }
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
