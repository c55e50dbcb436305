//! Benchmark scenes compiled into the library.
//!
//! The same files live in `crates/core/scenarios/` and can be loaded from
//! disk with [`Scenario::load`](super::Scenario::load).

use super::Scenario;
use crate::Error;

const SCENES: [(&str, &str); 5] = [
    ("empty-plane", include_str!("../../scenarios/empty-plane.toml")),
    ("single-wall", include_str!("../../scenarios/single-wall.toml")),
    ("wall-with-window", include_str!("../../scenarios/wall-with-window.toml")),
    ("concave-pocket", include_str!("../../scenarios/concave-pocket.toml")),
    ("aircraft-trap", include_str!("../../scenarios/aircraft-trap.toml")),
];

const SCRIPTS: [(&str, &str); 3] = [
    ("wall-with-window.ops", include_str!("../../scenarios/wall-with-window.ops")),
    ("concave-pocket.ops", include_str!("../../scenarios/concave-pocket.ops")),
    ("aircraft-trap.ops", include_str!("../../scenarios/aircraft-trap.ops")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SCENES.iter().map(|(n, _)| *n)
}

/// Scenario file text of a bundled scene.
pub fn source(name: &str) -> Option<&'static str> {
    SCENES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Text of a bundled operator script, by file name.
pub fn script(file_name: &str) -> Option<&'static str> {
    SCRIPTS.iter().find(|(n, _)| *n == file_name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Result<Scenario, Error> {
    let text = source(name).ok_or_else(|| {
        let known: Vec<_> = names().collect();
        Error::Config(format!("no bundled scenario `{name}` (known: {})", known.join(", ")))
    })?;
    Scenario::from_str_with(text, |file| {
        script(file).map(str::to_string).ok_or_else(|| format!("no bundled script `{file}`"))
    })
}
