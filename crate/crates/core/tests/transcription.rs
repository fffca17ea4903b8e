//! A second transcription of the example graphs, written down from the
//! figure sources independently of the stored JSON, diffed edge by edge.

use std::collections::BTreeSet;

use dtwlab::fixtures::{edge_profile, mirror_name, sign_flip, FixtureStore};

/// `a-b` is a digon, `a>b` an arc. With `mirrored`, every entry is also
/// added with both ends replaced by their mirror image.
fn expand(spec: &str, mirrored: bool) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for tok in spec.split_whitespace() {
        let (u, v, both) = if let Some((u, v)) = tok.split_once('-') {
            (u, v, true)
        } else {
            let (u, v) = tok.split_once('>').expect("edge token");
            (u, v, false)
        };
        let mut add = |u: &str, v: &str| {
            out.insert((u.to_string(), v.to_string()));
            if both {
                out.insert((v.to_string(), u.to_string()));
            }
        };
        add(u, v);
        if mirrored {
            add(&mirror_name(u), &mirror_name(v));
        }
    }
    out
}

fn stored(store: &FixtureStore, name: &str) -> BTreeSet<(String, String)> {
    let d = store.graph(name).unwrap();
    d.edges()
        .map(|(u, v)| (d.name(u).to_string(), d.name(v).to_string()))
        .collect()
}

fn diff(name: &str, ours: &BTreeSet<(String, String)>, theirs: &BTreeSet<(String, String)>) {
    let missing: Vec<_> = ours.difference(theirs).collect();
    let extra: Vec<_> = theirs.difference(ours).collect();
    assert!(
        missing.is_empty() && extra.is_empty(),
        "{name}: missing {missing:?}, extra {extra:?}"
    );
}

// The right half of D1 including the spine {0, 0'}; the left half is its
// mirror image.
const D1_HALF: &str = "
    0-0p 0-a 0p-ap 0p-a 0-ap
    a-ap a-b a-bp ap-bp ap-b
    b-bp b-c b-cp bp-cp
    c-cp c-d c-dp cp-dp cp-d
    d-dp d-1 d-1p dp-1p
    1-1p 1-2 1-2p 1p-2p 1p-2
    2-2p 2-3 2p-3p 3-3p 2-3p
    3-4 3-4p 3p-4p 4p-4
    4>2p 4p>2 4>2 4p>2p 4>1 4p>1
    1>c c>a b>0 2>d 2>dp d>b d>bp";

const D1_SHORTCUTS: &str = "0>4 0>4p";

const D1P_DETOURS: &str = "0>pi1 pi1>pi2 pi2>pi3 pi3>4 pi3>4p";

const D2_HALF: &str = "
    0-0p 0-1 0p-1p 0p-1
    1-1p 1-2 1p-2p 1p-2
    2-2p 2-3 2p-3p 2p-3 3-3p 2-3p
    3-4 3p-4
    0>2p 0p>2 0>2 0p>2p";

#[test]
fn d1_matches_second_transcription() {
    let store = FixtureStore::open_default().unwrap();
    let mut ours = expand(D1_HALF, true);
    ours.extend(expand(D1_SHORTCUTS, true));
    diff("D1", &ours, &stored(&store, "D1"));

    let mut ours = expand(D1_HALF, true);
    ours.extend(expand(D1P_DETOURS, true));
    diff("D1p", &ours, &stored(&store, "D1p"));
}

#[test]
fn d2_matches_second_transcription() {
    let store = FixtureStore::open_default().unwrap();
    let mut ours = expand(D2_HALF, true);
    ours.extend(expand("4>0 4>0p", true));
    diff("D2", &ours, &stored(&store, "D2"));

    let mut ours = expand(D2_HALF, true);
    ours.extend(expand("4>5 5>0 5>0p", true));
    diff("D2p", &ours, &stored(&store, "D2p"));
}

#[test]
fn bramble_pair_matches_second_transcription() {
    let store = FixtureStore::open_default().unwrap();
    let ours = expand("1>2 2>3 3>1 4>5 5>6 6>4 1>4 6>3", false);
    diff("bramble_D", &ours, &stored(&store, "bramble_D"));
    let ours = expand("1>a a>2 2>b b>3 3>1 4>d d>5 5>e e>6 6>4 1>c c>4 6>f f>3", false);
    diff("bramble_Dp", &ours, &stored(&store, "bramble_Dp"));
}

#[test]
fn edge_profiles_and_sign_flip() {
    let store = FixtureStore::open_default().unwrap();
    // (vertices, digons, one-way arcs)
    let expected = [
        ("D1", 34, 73, 30),
        ("D1p", 40, 73, 36),
        ("D2", 16, 31, 12),
        ("D2p", 18, 31, 14),
    ];
    for (name, n, digons, arcs) in expected {
        let d = store.graph(name).unwrap();
        assert_eq!(d.n(), n, "{name}");
        assert_eq!(edge_profile(&d), (digons, arcs), "{name}");
        let flip = sign_flip(&d).unwrap_or_else(|| panic!("{name}: some vertex has no mirror"));
        assert!(d.is_automorphism(&flip), "{name}: sign flip is not an automorphism");
        assert!(flip.iter().enumerate().any(|(v, &w)| v != w));
    }
}
