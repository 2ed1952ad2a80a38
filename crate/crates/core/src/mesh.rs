//! Triangulated export of the three sheets.
//!
//! Coordinates are given in the unrolled chart `(p1, p2, y)` of `R^2 x S^1`
//! with `y` in `[0, 1]`; the seam `y = 0 ~ y = 1` carries duplicated vertices.

use std::io::Write;

use crate::error::{Error, Result};
use crate::field::TripleField;
use crate::geometry::{CutoffProfile, JunctionFrame, SheetEmbedding, TripleIndex, Vec3};

#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    /// Zero-based triangles per sheet.
    pub faces: [Vec<[usize; 3]>; 3],
    /// Free-form lines written as `#` comments at the top of the OBJ file.
    pub header: Vec<String>,
    resolution: (usize, usize),
}

impl SurfaceMesh {
    pub fn resolution(&self) -> (usize, usize) {
        self.resolution
    }

    /// Vertex indices of the spine row (shared by all sheets), seam duplicate last.
    pub fn spine_vertices(&self) -> std::ops::Range<usize> {
        0..self.resolution.1 + 1
    }

    pub fn triangle_area(&self, tri: [usize; 3]) -> f64 {
        let [a, b, c] = tri.map(|k| self.vertices[k]);
        let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let cross = [
            e1[1] * e2[2] - e1[2] * e2[1],
            e1[2] * e2[0] - e1[0] * e2[2],
            e1[0] * e2[1] - e1[1] * e2[0],
        ];
        0.5 * (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt()
    }

    pub fn write_obj<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# triple-junction surface, unrolled chart (p1, p2, y); y-seam vertices duplicated")?;
        for line in &self.header {
            writeln!(out, "# {line}")?;
        }
        for v in &self.vertices {
            writeln!(out, "v {:e} {:e} {:e}", v[0], v[1], v[2])?;
        }
        for (s, faces) in self.faces.iter().enumerate() {
            writeln!(out, "g sheet{}", s + 1)?;
            for f in faces {
                writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
            }
        }
        Ok(())
    }
}

/// Samples each sheet on `m_x` uniform x-stations and `m_y` y-stations.
pub fn mesh_surface(
    u: &TripleField,
    frame: &JunctionFrame,
    cutoff: &CutoffProfile,
    resolution: (usize, usize),
) -> Result<SurfaceMesh> {
    let (mx, my) = resolution;
    if mx < 2 || my < 3 {
        return Err(Error::Config(format!("mesh resolution {mx}x{my} below the 2x3 minimum")));
    }
    let embedding = SheetEmbedding::new(u, frame, cutoff);
    let cols = my + 1;
    let y_at = |b: usize| b as f64 / my as f64;
    let x_at = |a: usize| a as f64 / (mx - 1) as f64;

    let mut vertices = Vec::with_capacity(cols * (1 + 3 * (mx - 1)));
    for b in 0..cols {
        vertices.push(embedding.point(TripleIndex::ALL[0], 0.0, y_at(b))?);
    }
    let mut faces: [Vec<[usize; 3]>; 3] = Default::default();
    for i in TripleIndex::ALL {
        let base = vertices.len();
        for a in 1..mx {
            for b in 0..cols {
                vertices.push(embedding.point(i, x_at(a), y_at(b))?);
            }
        }
        // row a of sheet i; row 0 is the shared spine
        let index = |a: usize, b: usize| if a == 0 { b } else { base + (a - 1) * cols + b };
        for a in 0..mx - 1 {
            for b in 0..my {
                let (p, q, r, s) = (index(a, b), index(a + 1, b), index(a + 1, b + 1), index(a, b + 1));
                faces[i.idx()].push([p, q, r]);
                faces[i.idx()].push([p, r, s]);
            }
        }
    }
    Ok(SurfaceMesh {
        vertices,
        faces,
        header: vec![format!("delta = {}", cutoff.delta()), format!("mesh = {mx}x{my}")],
        resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::geometry::{dot2, frame_vectors};

    #[test]
    fn flat_strips_for_zero_field() {
        let g = Grid::new(8, 8).unwrap();
        let f = frame_vectors();
        let c = CutoffProfile::new(0.25).unwrap();
        let mesh = mesh_surface(&TripleField::zeros(&g), &f, &c, (2, 3)).unwrap();
        assert_eq!(mesh.vertices.len(), 4 + 3 * 4);
        for k in mesh.spine_vertices() {
            let v = mesh.vertices[k];
            assert_eq!((v[0], v[1]), (0.0, 0.0));
        }
        for (s, faces) in mesh.faces.iter().enumerate() {
            assert_eq!(faces.len(), 6);
            for &tri in faces {
                assert!(mesh.triangle_area(tri) > 0.0);
                // every vertex lies on the ray -x n_s
                for k in tri {
                    let v = mesh.vertices[k];
                    let nu = f.nu[s];
                    assert!(dot2([v[0], v[1]], nu).abs() < 1e-15);
                }
            }
        }
        assert!(mesh_surface(&TripleField::zeros(&g), &f, &c, (1, 3)).is_err());
    }

    #[test]
    fn translated_spine_and_obj_layout() {
        let g = Grid::new(8, 8).unwrap();
        let f = frame_vectors();
        let c = CutoffProfile::new(0.25).unwrap();
        let u = TripleField::from_fns(&g, |i, _, _| dot2([0.01, 0.0], f.nu[i]));
        let mesh = mesh_surface(&u, &f, &c, (5, 6)).unwrap();
        for k in mesh.spine_vertices() {
            let v = mesh.vertices[k];
            assert!((v[0] - 0.01).abs() < 1e-15 && v[1].abs() < 1e-15);
        }
        assert!(mesh.faces.iter().flatten().all(|&t| mesh.triangle_area(t) > 0.0));
        let mut buf = Vec::new();
        mesh.write_obj(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("g sheet1") && text.contains("g sheet3"));
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), mesh.vertices.len());
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 3 * 4 * 6 * 2);
    }
}
