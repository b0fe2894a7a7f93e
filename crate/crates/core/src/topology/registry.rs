//! Bundled Topology Zoo networks used by the experiment harness.
//!
//! Some Zoo files contain nodes without coordinates; the bundled networks
//! are loaded with [`MissingCoords::Repair`] so they always resolve.

use crate::error::Result;

use super::{load_graphml_with, GraphmlOptions, MissingCoords, Topology};

macro_rules! zoo {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../fixtures/topology_zoo/", $name, ".graphml")))),*]
    };
}

/// Name and GraphML source of every bundled network, smallest first.
pub const BUNDLED: &[(&str, &str)] = zoo![
    "Nsfnet", "Sinet", "Ans", "Aarnet", "Agis", "Digex", "Chinanet", "Bellcanada", "Tinet",
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

fn canonical(name: &str) -> String {
    name.chars().filter(|c| !c.is_whitespace() && *c != '_' && *c != '-').flat_map(char::to_lowercase).collect()
}

/// Look up a bundled network by case-insensitive name ("Bell Canada" and
/// "bellcanada" both resolve). Returns `None` for unknown names.
pub fn get(name: &str) -> Option<Result<Topology>> {
    let key = canonical(name);
    BUNDLED.iter().find(|(n, _)| canonical(n) == key).map(|(_, src)| {
        let opts = GraphmlOptions { missing_coords: MissingCoords::Repair, ..Default::default() };
        load_graphml_with(src.as_bytes(), &opts)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_network_loads() {
        for name in names() {
            let t = get(name).unwrap().unwrap();
            assert!(t.node_count() >= 13, "{name}");
        }
        assert!(get("Bell Canada").is_some());
        assert!(get("nowhere").is_none());
    }
}
