//! Brambles, linked sets and havens on small hand-checked digraphs.

use dtwlab::digraph::{Digraph, VertexSet};
use dtwlab::fixtures::FixtureStore;
use dtwlab::obstructions::{
    bramble_haven_check, bramble_number, bramble_order, is_balanced_separator, is_k_linked, klinked_to_bramble,
    lift_bramble, validate_bramble, Bramble, BrambleKind, HavenFailure,
};

fn complete(n: usize) -> Digraph {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    Digraph::from_indices(n, &edges).unwrap()
}

fn cycle(n: usize) -> Digraph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Digraph::from_indices(n, &edges).unwrap()
}

#[test]
fn complete_digraph_on_three_vertices() {
    let d = complete(3);
    let w = d.vertices();
    assert!(is_k_linked(&d, w, 1, u64::MAX).unwrap().linked());
    let r = is_k_linked(&d, w, 2, u64::MAX).unwrap();
    let s = r.balanced_separator.expect("two vertices split K3");
    assert_eq!(s.len(), 2);
    assert!(is_balanced_separator(&d, w, s));

    let b = klinked_to_bramble(&d, w, 1, u64::MAX).unwrap();
    // The three digons and the whole vertex set.
    assert_eq!(b.elements.len(), 4);
    assert!(validate_bramble(&d, &b).valid);
    assert_eq!(bramble_order(&d, &b).unwrap().order(), 2);
    assert_eq!(bramble_haven_check(&d, &b, 2).unwrap(), Ok(()));
    // Order 3 would need every vertex as a singleton element.
    assert_eq!(bramble_number(&d, BrambleKind::Strong, 8).unwrap().0, 2);
    assert_eq!(bramble_number(&d, BrambleKind::Weak, 8).unwrap().0, 3);
}

#[test]
fn cycles_have_bramble_number_one() {
    // In a digon the two singletons touch both ways.
    assert_eq!(bramble_number(&cycle(2), BrambleKind::Weak, 8).unwrap().0, 2);
    for n in 3..7 {
        let d = cycle(n);
        for kind in [BrambleKind::Strong, BrambleKind::Weak] {
            let (k, wit) = bramble_number(&d, kind, 8).unwrap();
            assert_eq!(k, 1, "C{n} {kind}");
            assert!(validate_bramble(&d, &wit).valid);
        }
        assert!(!is_k_linked(&d, d.vertices(), 1, u64::MAX).unwrap().linked());
    }
}

#[test]
fn disjoint_elements_break_the_strong_condition() {
    let d = Digraph::from_indices(4, &[(0, 1), (1, 0), (2, 3), (3, 2), (0, 2), (2, 0)]).unwrap();
    let a = VertexSet::from_indices([0, 1]);
    let b = VertexSet::from_indices([2, 3]);
    let strong = Bramble {
        kind: BrambleKind::Strong,
        elements: vec![a, b],
    };
    assert!(!validate_bramble(&d, &strong).valid);
    // Edges run both ways between the two digons, so they touch.
    let weak = Bramble {
        kind: BrambleKind::Weak,
        elements: vec![a, b],
    };
    assert!(validate_bramble(&d, &weak).valid);
    assert_eq!(bramble_order(&d, &weak).unwrap().order(), 2);
}

#[test]
fn haven_needs_an_element_avoiding_every_small_set() {
    let d = complete(3);
    let b = Bramble {
        kind: BrambleKind::Strong,
        elements: vec![VertexSet::from_indices([0, 1])],
    };
    match bramble_haven_check(&d, &b, 2).unwrap() {
        Err(HavenFailure::Undefined { x }) => assert!(x.intersects(b.elements[0])),
        other => panic!("expected an undefined position, got {other:?}"),
    }
}

#[test]
fn stored_weak_bramble_and_its_lift() {
    let s = FixtureStore::open_default().unwrap();
    let (d, weak) = s.bramble("weak_bramble_D").unwrap();
    assert!(validate_bramble(&d, &weak).valid);
    assert_eq!(bramble_order(&d, &weak).unwrap().order(), 2);
    assert_eq!(bramble_number(&d, BrambleKind::Weak, 8).unwrap().0, 2);

    // Strong brambles survive the lift to the subdivided host.
    let (minor, host, w) = s.witness("minor_bramble_D_in_Dp").unwrap();
    let (k, strong) = bramble_number(&minor, BrambleKind::Strong, 8).unwrap();
    let lifted = lift_bramble(&minor, &host, &w, &strong).unwrap();
    assert!(validate_bramble(&host, &lifted).valid);
    assert!(bramble_order(&host, &lifted).unwrap().order() >= k);
    assert!(lift_bramble(&minor, &host, &w, &weak).is_err());
}
