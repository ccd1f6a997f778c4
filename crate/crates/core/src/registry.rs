//! Name-keyed registries for the interchangeable strategies of the pipeline
//! (stratification models, wave shapes, σ coefficients). Configs select an
//! entry by name and hand it a free-form parameter object.

use crate::error::{Error, Result};
use serde_json::Value;
use std::collections::BTreeMap;
use std::sync::Arc;

pub type Params = serde_json::Map<String, Value>;
pub type Factory<T> = fn(&Params) -> Result<Arc<T>>;

struct Entry<T: ?Sized> {
    description: &'static str,
    build: Factory<T>,
}

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Entry<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, description: &'static str, build: Factory<T>) {
        self.entries.insert(name, Entry { description, build });
    }

    pub fn build(&self, name: &str, params: &Params) -> Result<Arc<T>> {
        match self.entries.get(name) {
            Some(entry) => (entry.build)(params),
            None => Err(Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            }),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    /// `(name, description)` pairs in name order.
    pub fn describe(&self) -> Vec<(&'static str, &'static str)> {
        self.entries.iter().map(|(name, e)| (*name, e.description)).collect()
    }
}

pub fn param_f64(params: &Params, key: &str) -> Result<f64> {
    match params.get(key) {
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::config(format!("parameter '{key}' must be a number"))),
        None => Err(Error::config(format!("missing parameter '{key}'"))),
    }
}

pub fn param_f64_or(params: &Params, key: &str, default: f64) -> Result<f64> {
    if params.contains_key(key) {
        param_f64(params, key)
    } else {
        Ok(default)
    }
}

pub fn param_str<'a>(params: &'a Params, key: &str) -> Result<&'a str> {
    params
        .get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::config(format!("parameter '{key}' must be a string")))
}
