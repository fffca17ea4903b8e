//! The fixture catalog under `data/`: checksummed JSON files for the example
//! graphs, their decompositions, strategies, minor witnesses and brambles.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decomp::{self, Decomposition, DecompositionJson, Flavor};
use crate::digraph::{Digraph, GraphError, GraphJson};
use crate::game::{validate_strategy_tree, StrategyJson, StrategyTree};
use crate::minors::{MinorError, MinorWitness, WitnessJson};
use crate::obstructions::{bramble_number, bramble_order, validate_bramble, Bramble, BrambleJson, BrambleKind};

/// Environment variable overriding the data directory.
pub const DATA_ENV: &str = "DTWLAB_DATA";

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("no fixture named `{0}`")]
    Unknown(String),
    #[error("{name}: checksum {found} does not match the catalog ({expected})")]
    Checksum {
        name: String,
        expected: String,
        found: String,
    },
    #[error("{name}: expected a {expected} fixture, found {found}")]
    Kind {
        name: String,
        expected: FixtureKind,
        found: FixtureKind,
    },
    #[error("{name}: {detail}")]
    Invalid { name: String, detail: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Minor(#[from] MinorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Graph,
    Decomposition,
    Strategy,
    Witness,
    Bramble,
}

impl std::fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FixtureKind::Graph => "graph",
            FixtureKind::Decomposition => "decomposition",
            FixtureKind::Strategy => "strategy",
            FixtureKind::Witness => "witness",
            FixtureKind::Bramble => "bramble",
        })
    }
}

/// Facts a fixture is expected to satisfy.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claims {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_bramble_number: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strong_bramble_number: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flavors: Option<Vec<Flavor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robber_monotone: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub kind: FixtureKind,
    pub file: String,
    pub sha256: String,
    /// The graph a non-graph fixture lives on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,
    /// For witnesses, the graph shown to be a minor of `host`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minor: Option<String>,
    pub note: String,
    #[serde(default)]
    pub claims: Claims,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub fixtures: Vec<CatalogEntry>,
}

#[derive(Debug, Clone)]
pub enum Fixture {
    Graph(Digraph),
    Decomposition {
        host: Digraph,
        dtd: Decomposition,
    },
    Strategy {
        host: Digraph,
        tree: StrategyTree,
    },
    Witness {
        minor: Digraph,
        host: Digraph,
        witness: MinorWitness,
    },
    Bramble {
        host: Digraph,
        bramble: Bramble,
    },
}

impl Fixture {
    pub fn kind(&self) -> FixtureKind {
        match self {
            Fixture::Graph(_) => FixtureKind::Graph,
            Fixture::Decomposition { .. } => FixtureKind::Decomposition,
            Fixture::Strategy { .. } => FixtureKind::Strategy,
            Fixture::Witness { .. } => FixtureKind::Witness,
            Fixture::Bramble { .. } => FixtureKind::Bramble,
        }
    }
}

/// `$DTWLAB_DATA`, or the `data/` directory of the source tree.
pub fn default_data_dir() -> PathBuf {
    match std::env::var_os(DATA_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(T, Vec<u8>), FixtureError> {
    let bytes = fs::read(path).map_err(|source| FixtureError::Io {
        path: path.to_owned(),
        source,
    })?;
    let v = serde_json::from_slice(&bytes).map_err(|source| FixtureError::Json {
        path: path.to_owned(),
        source,
    })?;
    Ok((v, bytes))
}

/// Reads a graph JSON file.
pub fn read_graph(path: &Path) -> Result<Digraph, FixtureError> {
    let (j, _): (GraphJson, _) = read_json(path)?;
    Ok(Digraph::from_json(&j)?)
}

#[derive(Debug, Clone)]
pub struct FixtureStore {
    pub dir: PathBuf,
    pub catalog: Catalog,
}

impl FixtureStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<FixtureStore, FixtureError> {
        let dir = dir.into();
        let (catalog, _) = read_json(&dir.join("catalog.json"))?;
        Ok(FixtureStore { dir, catalog })
    }

    pub fn open_default() -> Result<FixtureStore, FixtureError> {
        FixtureStore::open(default_data_dir())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.catalog.fixtures.iter().map(|e| e.name.as_str())
    }

    pub fn entry(&self, name: &str) -> Result<&CatalogEntry, FixtureError> {
        self.catalog
            .fixtures
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| FixtureError::Unknown(name.into()))
    }

    pub fn path(&self, name: &str) -> Result<PathBuf, FixtureError> {
        Ok(self.dir.join(&self.entry(name)?.file))
    }

    fn checked<T: for<'de> Deserialize<'de>>(&self, e: &CatalogEntry) -> Result<T, FixtureError> {
        let (v, bytes) = read_json(&self.dir.join(&e.file))?;
        let found = sha256_hex(&bytes);
        if found != e.sha256 {
            return Err(FixtureError::Checksum {
                name: e.name.clone(),
                expected: e.sha256.clone(),
                found,
            });
        }
        Ok(v)
    }

    fn related(&self, e: &CatalogEntry, field: Option<&String>, what: &str) -> Result<Digraph, FixtureError> {
        let name = field.ok_or_else(|| FixtureError::Invalid {
            name: e.name.clone(),
            detail: format!("catalog entry names no {what}"),
        })?;
        self.graph(name)
    }

    fn invalid(e: &CatalogEntry, detail: impl std::fmt::Display) -> FixtureError {
        FixtureError::Invalid {
            name: e.name.clone(),
            detail: detail.to_string(),
        }
    }

    /// Loads a fixture after checking its checksum and parsing it against
    /// its host graph.
    pub fn load(&self, name: &str) -> Result<Fixture, FixtureError> {
        let e = self.entry(name)?;
        Ok(match e.kind {
            FixtureKind::Graph => {
                let j: GraphJson = self.checked(e)?;
                Fixture::Graph(Digraph::from_json(&j)?)
            }
            FixtureKind::Decomposition => {
                let host = self.related(e, e.host.as_ref(), "host")?;
                let j: DecompositionJson = self.checked(e)?;
                let dtd = Decomposition::from_json(&host, &j).map_err(|x| Self::invalid(e, x))?;
                Fixture::Decomposition { host, dtd }
            }
            FixtureKind::Strategy => {
                let host = self.related(e, e.host.as_ref(), "host")?;
                let j: StrategyJson = self.checked(e)?;
                let tree = StrategyTree::from_json(&host, &j).map_err(|x| Self::invalid(e, x))?;
                Fixture::Strategy { host, tree }
            }
            FixtureKind::Witness => {
                let host = self.related(e, e.host.as_ref(), "host")?;
                let minor = self.related(e, e.minor.as_ref(), "minor")?;
                let j: WitnessJson = self.checked(e)?;
                let witness = MinorWitness::from_json(&host, &j)?;
                Fixture::Witness { minor, host, witness }
            }
            FixtureKind::Bramble => {
                let host = self.related(e, e.host.as_ref(), "host")?;
                let j: BrambleJson = self.checked(e)?;
                let bramble = Bramble::from_json(&host, &j)?;
                Fixture::Bramble { host, bramble }
            }
        })
    }

    fn kind_error(name: &str, expected: FixtureKind, f: &Fixture) -> FixtureError {
        FixtureError::Kind {
            name: name.into(),
            expected,
            found: f.kind(),
        }
    }

    pub fn graph(&self, name: &str) -> Result<Digraph, FixtureError> {
        match self.load(name)? {
            Fixture::Graph(d) => Ok(d),
            f => Err(Self::kind_error(name, FixtureKind::Graph, &f)),
        }
    }

    pub fn decomposition(&self, name: &str) -> Result<(Digraph, Decomposition), FixtureError> {
        match self.load(name)? {
            Fixture::Decomposition { host, dtd } => Ok((host, dtd)),
            f => Err(Self::kind_error(name, FixtureKind::Decomposition, &f)),
        }
    }

    pub fn strategy(&self, name: &str) -> Result<(Digraph, StrategyTree), FixtureError> {
        match self.load(name)? {
            Fixture::Strategy { host, tree } => Ok((host, tree)),
            f => Err(Self::kind_error(name, FixtureKind::Strategy, &f)),
        }
    }

    pub fn witness(&self, name: &str) -> Result<(Digraph, Digraph, MinorWitness), FixtureError> {
        match self.load(name)? {
            Fixture::Witness { minor, host, witness } => Ok((minor, host, witness)),
            f => Err(Self::kind_error(name, FixtureKind::Witness, &f)),
        }
    }

    pub fn bramble(&self, name: &str) -> Result<(Digraph, Bramble), FixtureError> {
        match self.load(name)? {
            Fixture::Bramble { host, bramble } => Ok((host, bramble)),
            f => Err(Self::kind_error(name, FixtureKind::Bramble, &f)),
        }
    }

    /// Loads a fixture and checks every claim recorded for it. Returns one
    /// line per checked claim.
    pub fn audit(&self, name: &str) -> Result<Vec<String>, FixtureError> {
        let e = self.entry(name)?;
        let c = &e.claims;
        let mut lines = Vec::new();
        let mut expect = |what: &str, ok: bool, detail: String| {
            if ok {
                lines.push(format!("{what}: {detail}"));
                Ok(())
            } else {
                Err(Self::invalid(e, format!("{what}: {detail}")))
            }
        };
        match self.load(name)? {
            Fixture::Graph(d) => {
                if let Some(n) = c.vertices {
                    expect("vertices", d.n() == n, format!("{} (claimed {n})", d.n()))?;
                }
                for (kind, claim) in [
                    (BrambleKind::Weak, c.weak_bramble_number),
                    (BrambleKind::Strong, c.strong_bramble_number),
                ] {
                    if let Some(b) = claim {
                        let (got, _) = bramble_number(&d, kind, 12).map_err(|x| Self::invalid(e, x))?;
                        expect(
                            &format!("{kind} bramble number"),
                            got == b,
                            format!("{got} (claimed {b})"),
                        )?;
                    }
                }
            }
            Fixture::Decomposition { host, dtd } => {
                for &f in c.flavors.as_deref().unwrap_or(&[dtd.flavor]) {
                    let r = decomp::validate(&host, &dtd.with_flavor(f));
                    let ok = r.valid && c.width.map_or(true, |w| r.width == w as i64);
                    expect(&format!("{f}"), ok, format!("valid {}, width {}", r.valid, r.width))?;
                }
            }
            Fixture::Strategy { host, tree } => {
                let r = validate_strategy_tree(&host, &tree);
                expect("strategy", r.valid, format!("valid {}, {} nodes", r.valid, r.nodes))?;
                if let Some(w) = c.width {
                    expect("width", r.width == w, format!("{} (claimed {w})", r.width))?;
                }
                if let Some(m) = c.robber_monotone {
                    expect(
                        "robber-monotone",
                        r.robber_monotone == m,
                        format!("{} (claimed {m})", r.robber_monotone),
                    )?;
                }
            }
            Fixture::Witness { minor, host, witness } => {
                witness.verify(&minor, &host)?;
                expect("witness", true, format!("replays to {} vertices", minor.n()))?;
            }
            Fixture::Bramble { host, bramble } => {
                let r = validate_bramble(&host, &bramble);
                expect("bramble", r.valid, format!("valid {}", r.valid))?;
                if let Some(k) = c.order {
                    let got = bramble_order(&host, &bramble).map_err(|x| Self::invalid(e, x))?.order();
                    expect("order", got == k, format!("{got} (claimed {k})"))?;
                }
            }
        }
        Ok(lines)
    }
}

/// The name of `v`'s mirror image: `x` and `mx` swap, `0` and `0p` stay.
pub fn mirror_name(name: &str) -> String {
    match name {
        "0" | "0p" => name.to_string(),
        _ => match name.strip_prefix('m') {
            Some(rest) => rest.to_string(),
            None => format!("m{name}"),
        },
    }
}

/// The sign-flip permutation `v ↦ -v`, if every vertex has a mirror.
pub fn sign_flip(d: &Digraph) -> Option<Vec<usize>> {
    (0..d.n()).map(|v| d.vertex(&mirror_name(d.name(v)))).collect()
}

/// Counts of digons and one-way arcs.
pub fn edge_profile(d: &Digraph) -> (usize, usize) {
    let mut digons = 0;
    let mut arcs = 0;
    for (u, v) in d.edges() {
        if d.has_edge(v, u) {
            if u < v {
                digons += 1;
            }
        } else {
            arcs += 1;
        }
    }
    (digons, arcs)
}

/// Per-fixture checksums of the current files, for refreshing the catalog.
pub fn current_checksums(store: &FixtureStore) -> Result<BTreeMap<String, String>, FixtureError> {
    let mut out = BTreeMap::new();
    for e in &store.catalog.fixtures {
        let path = store.dir.join(&e.file);
        let bytes = fs::read(&path).map_err(|source| FixtureError::Io { path, source })?;
        out.insert(e.name.clone(), sha256_hex(&bytes));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_names() {
        assert_eq!(mirror_name("0p"), "0p");
        assert_eq!(mirror_name("m3p"), "3p");
        assert_eq!(mirror_name("a"), "ma");
        assert_eq!(mirror_name("map"), "ap");
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn every_fixture_loads_and_meets_its_claims() {
        let store = FixtureStore::open_default().unwrap();
        for name in store.names() {
            store.audit(name).unwrap_or_else(|e| panic!("{e}"));
        }
        assert_eq!(store.graph("D1").unwrap().n(), 34);
        assert!(matches!(store.graph("nope"), Err(FixtureError::Unknown(_))));
        assert!(matches!(store.graph("dtd_SC0_D1"), Err(FixtureError::Kind { .. })));
    }
}
