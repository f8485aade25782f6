//! Name-keyed registries of interchangeable strategies.
//!
//! Every pluggable family in the crate (convex test functions, Fokker-Planck
//! models, interval maps, initial quantum modes) is exposed as a trait object
//! and resolved at runtime from a short spec string of the form `name` or
//! `name:arg`, e.g. `hinge:0.5`, `rotation:0.618`, `sine:3`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Builds one strategy from the optional `:arg` suffix and shared parameters.
pub type Builder<T, P> = fn(Option<&str>, &P) -> Result<Arc<T>>;

pub struct Entry<T: ?Sized, P> {
    pub name: &'static str,
    pub help: &'static str,
    build: Builder<T, P>,
}

pub struct Registry<T: ?Sized, P = ()> {
    kind: &'static str,
    entries: Vec<Entry<T, P>>,
}

impl<T: ?Sized, P> Registry<T, P> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds a builder. Panics on a duplicate name; registries are assembled
    /// once from static tables so a duplicate is a programming error.
    pub fn register(mut self, name: &'static str, help: &'static str, build: Builder<T, P>) -> Self {
        assert!(
            self.entries.iter().all(|e| e.name != name),
            "duplicate {} `{}`",
            self.kind,
            name
        );
        self.entries.push(Entry { name, help, build });
        self
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.name)
    }

    pub fn entries(&self) -> &[Entry<T, P>] {
        &self.entries
    }

    pub fn resolve(&self, spec: &str, params: &P) -> Result<Arc<T>> {
        let spec = spec.trim();
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let entry = self
            .entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownName {
                kind: self.kind,
                name: spec.to_string(),
                known: self.names().collect::<Vec<_>>().join(", "),
            })?;
        (entry.build)(arg, params)
    }
}

impl<T: ?Sized, P> fmt::Debug for Registry<T, P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("names", &self.names().collect::<Vec<_>>())
            .finish()
    }
}

/// Parses a required numeric `:arg`.
pub fn parse_arg(name: &str, arg: Option<&str>) -> Result<f64> {
    let raw = arg.ok_or_else(|| Error::InvalidParameter(format!("`{name}` needs an argument, e.g. `{name}:1`")))?;
    let value: f64 = raw
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("`{name}:{raw}`: not a number")))?;
    if !value.is_finite() {
        return Err(Error::InvalidParameter(format!("`{name}:{raw}`: not finite")));
    }
    Ok(value)
}

pub fn reject_arg(name: &str, arg: Option<&str>) -> Result<()> {
    match arg {
        None => Ok(()),
        Some(a) => Err(Error::InvalidParameter(format!("`{name}` takes no argument, got `{a}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Shape: Send + Sync {
        fn area(&self) -> f64;
    }
    struct Square(f64);
    impl Shape for Square {
        fn area(&self) -> f64 {
            self.0 * self.0
        }
    }

    fn registry() -> Registry<dyn Shape> {
        Registry::<dyn Shape>::new("shape")
            .register("unit", "unit square", |arg, _| {
                reject_arg("unit", arg)?;
                Ok(Arc::new(Square(1.0)))
            })
            .register("square", "square:<side>", |arg, _| {
                Ok(Arc::new(Square(parse_arg("square", arg)?)))
            })
    }

    #[test]
    fn resolves_with_and_without_args() {
        let r = registry();
        assert_eq!(r.resolve("unit", &()).unwrap().area(), 1.0);
        assert_eq!(r.resolve("square:3", &()).unwrap().area(), 9.0);
    }

    #[test]
    fn reports_unknown_and_bad_args() {
        let r = registry();
        let err = r.resolve("circle", &()).err().unwrap();
        assert!(err.to_string().contains("unit, square"));
        assert!(r.resolve("square", &()).is_err());
        assert!(r.resolve("square:x", &()).is_err());
        assert!(r.resolve("unit:2", &()).is_err());
    }

    #[test]
    #[should_panic(expected = "duplicate")]
    fn duplicate_names_panic() {
        let _ = registry().register("unit", "", |_, _| Ok(Arc::new(Square(2.0))));
    }
}
