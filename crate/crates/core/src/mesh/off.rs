//! ASCII OFF reader and writer (triangle meshes only).

use std::fmt::Write as _;
use std::path::Path;

use super::SurfaceMesh;
use crate::error::{Error, Result};

pub fn load_off(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_off(&text)
}

/// Parses ASCII OFF text into an embedded-mode mesh.
pub fn parse_off(text: &str) -> Result<SurfaceMesh> {
    // (line number, tokens) with comments and blank lines removed
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then(|| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
    });
    let parse_err = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };

    let (hline, mut header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if header[0] != "OFF" {
        return Err(parse_err(hline, "missing OFF header"));
    }
    // counts may follow the keyword on the same line
    header.remove(0);
    let (cline, counts) = if header.is_empty() {
        lines
            .next()
            .ok_or_else(|| parse_err(hline, "missing counts line"))?
    } else {
        (hline, header)
    };
    if counts.len() < 2 {
        return Err(parse_err(cline, "counts line needs vertex and face counts"));
    }
    let parse_count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(cline, &format!("invalid count '{s}'")))
    };
    let nv = parse_count(counts[0])?;
    let nf = parse_count(counts[1])?;

    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, tok) = lines
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of file in vertex list"))?;
        if tok.len() < 3 {
            return Err(parse_err(ln, "vertex line needs three coordinates"));
        }
        let mut p = [0.0; 3];
        for (k, s) in tok[..3].iter().enumerate() {
            p[k] = s
                .parse()
                .map_err(|_| parse_err(ln, &format!("invalid coordinate '{s}'")))?;
        }
        positions.push(p);
    }

    let mut triangles = Vec::with_capacity(nf);
    for face in 0..nf {
        let (ln, tok) = lines
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of file in face list"))?;
        let count: usize = tok[0]
            .parse()
            .map_err(|_| parse_err(ln, &format!("invalid face size '{}'", tok[0])))?;
        if count != 3 {
            return Err(Error::NonTriangleFace { face, count });
        }
        if tok.len() < 4 {
            return Err(parse_err(ln, "face line needs three vertex indices"));
        }
        let mut t = [0usize; 3];
        for (k, s) in tok[1..4].iter().enumerate() {
            t[k] = s
                .parse()
                .map_err(|_| parse_err(ln, &format!("invalid vertex index '{s}'")))?;
            if t[k] >= nv {
                return Err(parse_err(
                    ln,
                    &format!("vertex index {} out of range", t[k]),
                ));
            }
        }
        triangles.push(t);
    }

    SurfaceMesh::from_embedded(positions, triangles)
}

/// Serializes an embedded mesh as ASCII OFF with round-trip float formatting.
pub fn write_off(mesh: &SurfaceMesh) -> Result<String> {
    let pos = mesh.positions().ok_or_else(|| {
        Error::InvalidArgument("intrinsic-mode meshes have no vertex positions to write".into())
    })?;
    let mut out = String::new();
    let _ = writeln!(out, "OFF");
    let _ = writeln!(
        out,
        "{} {} {}",
        mesh.n_vertices(),
        mesh.n_triangles(),
        mesh.n_edges()
    );
    for p in pos {
        let _ = writeln!(out, "{:?} {:?} {:?}", p[0], p[1], p[2]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::tetrahedron;

    const TET: &str = "OFF\n# a comment\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";

    #[test]
    fn parses_tetrahedron() {
        let m = parse_off(TET).unwrap();
        let t = m.topology();
        assert_eq!((t.vertices, t.edges, t.faces), (4, 6, 4));
    }

    #[test]
    fn quad_face_is_rejected() {
        let text = "OFF\n4 1 4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        let err = parse_off(text).unwrap_err();
        assert!(matches!(err, Error::NonTriangleFace { face: 0, count: 4 }));
        assert!(err.to_string().contains("non-triangle face"));
    }

    #[test]
    fn malformed_input_is_a_parse_error() {
        assert!(matches!(parse_off("PLY\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_off("OFF\n4 4 6\n0 0\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn open_surface_is_rejected() {
        let text = "OFF\n3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        assert!(matches!(parse_off(text), Err(Error::OpenSurface(..))));
    }

    #[test]
    fn write_then_parse_roundtrips() {
        let m = tetrahedron();
        let text = write_off(&m).unwrap();
        let back = parse_off(&text).unwrap();
        assert_eq!(back.positions(), m.positions());
        assert_eq!(back.triangles(), m.triangles());
    }
}
