//! Named strategy registries selected at run time.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} `{name}`; available: {}", available.join(", "))]
pub struct UnknownName {
    pub kind: &'static str,
    pub name: String,
    pub available: Vec<&'static str>,
}

/// Trait objects registered by name; iteration order is alphabetical.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Box<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Adds or replaces the entry under `name`.
    pub fn register(&mut self, name: &'static str, item: Box<T>) -> &mut Self {
        self.entries.insert(name, item);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T, UnknownName> {
        self.entries.get(name).map(|b| b.as_ref()).ok_or_else(|| UnknownName {
            kind: self.kind,
            name: name.to_string(),
            available: self.names(),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &T)> {
        self.entries.iter().map(|(k, v)| (*k, v.as_ref()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greet {
        fn hi(&self) -> String;
    }

    struct En;
    impl Greet for En {
        fn hi(&self) -> String {
            "hello".into()
        }
    }

    #[test]
    fn lookup_and_listing() {
        let mut r: Registry<dyn Greet> = Registry::new("greeter");
        r.register("en", Box::new(En));
        assert_eq!(r.get("en").unwrap().hi(), "hello");
        let err = r.get("fr").err().unwrap();
        assert_eq!(err.to_string(), "unknown greeter `fr`; available: en");
    }
}
