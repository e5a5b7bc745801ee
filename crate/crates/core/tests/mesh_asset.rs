use std::collections::HashSet;
use std::path::Path;

use surface_euler::mesh::{generate_genus2, load_off};

fn asset() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/genus2.off")
}

/// Counts cells straight from the file text.
#[test]
fn asset_cells_give_euler_characteristic_minus_two() {
    let text = std::fs::read_to_string(asset()).unwrap();
    let mut lines = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    assert_eq!(lines.next().unwrap().trim(), "OFF");
    let header: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|x| x.parse().unwrap())
        .collect();
    let (v, f) = (header[0], header[1]);
    let faces: Vec<Vec<usize>> = lines
        .skip(v)
        .take(f)
        .map(|l| {
            l.split_whitespace()
                .skip(1)
                .map(|x| x.parse().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(faces.len(), f);
    let mut edges = HashSet::new();
    for t in &faces {
        assert_eq!(t.len(), 3);
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let chi = v as i64 - edges.len() as i64 + f as i64;
    assert_eq!(chi, -2);
    assert_eq!(2 * edges.len(), 3 * f);

    let mesh = load_off(asset()).unwrap();
    let t = mesh.topology();
    assert_eq!((t.vertices, t.edges, t.faces), (v, edges.len(), f));
    assert_eq!(t.genus, 2);
    assert_eq!(t, generate_genus2(0).unwrap().topology());
}
