//! Interned variable symbols.
//!
//! A `Var` is a small copyable handle into a process-wide registry. Parameter
//! symbols carry a flag bit in the handle itself so the exponent invariant of
//! `LaurentPoly` can be checked without touching the registry.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{OnceLock, RwLock};

const PARAM_BIT: u32 = 1 << 31;

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

struct Registry {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

/// Names registered in a fixed order so that term ordering is reproducible
/// across processes for everything the builtin pipeline touches.
const PREDECLARED: &[(&str, bool)] = &[
    ("x", false),
    ("y", false),
    ("z", false),
    ("eps", false),
    ("Y1", false),
    ("Z1", false),
    ("eps1", false),
    ("X2", false),
    ("Z2", false),
    ("eps2", false),
    ("X3", false),
    ("Y3", false),
    ("eps3", false),
    ("u", false),
    ("v", false),
    ("w", false),
    ("U", false),
    ("V", false),
    ("W", false),
    ("T", false),
    ("z0", false),
    ("alpha", true),
    ("theta", true),
    ("kappa", true),
    ("alpha1", true),
    ("alpha2", true),
    ("a", true),
    ("b", true),
    ("c", true),
];

fn registry() -> &'static RwLock<Registry> {
    static REG: OnceLock<RwLock<Registry>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut reg = Registry { names: Vec::new(), index: HashMap::new() };
        for (name, param) in PREDECLARED {
            insert(&mut reg, name, *param);
        }
        RwLock::new(reg)
    })
}

fn insert(reg: &mut Registry, name: &str, param: bool) -> u32 {
    let id = reg.names.len() as u32;
    let handle = if param { id | PARAM_BIT } else { id };
    reg.names.push(name.to_string());
    reg.index.insert(name.to_string(), handle);
    handle
}

fn intern(name: &str, param: bool) -> Var {
    if let Some(&h) = registry().read().unwrap().index.get(name) {
        assert_eq!(
            h & PARAM_BIT != 0,
            param,
            "variable `{name}` re-registered with a different parameter flag"
        );
        return Var(h);
    }
    let mut reg = registry().write().unwrap();
    if let Some(&h) = reg.index.get(name) {
        return Var(h);
    }
    Var(insert(&mut reg, name, param))
}

impl Var {
    /// Interns an ordinary (dynamical) variable.
    pub fn new(name: &str) -> Var {
        intern(name, false)
    }

    /// Interns a parameter symbol (weight 0, never a negative exponent).
    pub fn param(name: &str) -> Var {
        intern(name, true)
    }

    /// Looks up a registered name without creating it.
    pub fn lookup(name: &str) -> Option<Var> {
        registry().read().unwrap().index.get(name).map(|&h| Var(h))
    }

    /// A variable guaranteed never to have been handed out before.
    pub fn fresh(prefix: &str) -> Var {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let n = COUNTER.fetch_add(1, Ordering::Relaxed);
        intern(&format!("{prefix}#{n}"), false)
    }

    pub fn is_parameter(self) -> bool {
        self.0 & PARAM_BIT != 0
    }

    pub fn name(self) -> String {
        let id = (self.0 & !PARAM_BIT) as usize;
        registry().read().unwrap().names[id].clone()
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Shorthand for the common symbols.
pub mod sym {
    use super::Var;
    pub fn x() -> Var { Var::new("x") }
    pub fn y() -> Var { Var::new("y") }
    pub fn z() -> Var { Var::new("z") }
    pub fn alpha() -> Var { Var::param("alpha") }
    pub fn theta() -> Var { Var::param("theta") }
    pub fn kappa() -> Var { Var::param("kappa") }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent() {
        assert_eq!(Var::new("x"), Var::new("x"));
        assert_ne!(Var::new("x"), Var::new("y"));
        assert_eq!(Var::new("q_test_var").name(), "q_test_var");
    }

    #[test]
    fn parameter_flag_is_carried_by_the_handle() {
        assert!(Var::param("alpha").is_parameter());
        assert!(!Var::new("x").is_parameter());
    }

    #[test]
    fn fresh_variables_are_distinct() {
        let a = Var::fresh("tau");
        let b = Var::fresh("tau");
        assert_ne!(a, b);
    }
}
