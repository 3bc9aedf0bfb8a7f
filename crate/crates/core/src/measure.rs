//! Discrete measures as cell densities, block averaging onto coarser grids,
//! the entropy functionals, and the distortion coefficient σ.
//!
//! An atom of a [`DiscreteMeasure`] stands for constant density on the square
//! of side `cell_size` centered at the atom position, so the density of atom
//! `i` is `mass_i / cell_size²`. All operations treat the measure through
//! that cell model: block averaging integrates the piecewise-constant density
//! over the target grid, and the entropies are evaluated exactly on it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{point, Box2, PlanarRegion, Point};
use crate::{Error, Result};

/// Tolerance on total mass.
pub const MASS_TOL: f64 = 1e-12;

/// One weighted cell of a discrete measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: Point,
    pub mass: f64,
}

/// An atomic probability measure whose atoms represent constant density on
/// square cells of side `cell_size`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
    cell_size: f64,
    domain_tag: String,
}

impl DiscreteMeasure {
    /// Build a measure, checking positivity, unit total mass and pairwise
    /// distinct atom positions.
    pub fn new(atoms: Vec<Atom>, cell_size: f64, domain_tag: &str) -> Result<DiscreteMeasure> {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::InvalidDomain(format!("cell size must be positive, got {cell_size}")));
        }
        if atoms.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut total = KahanSum::new();
        for a in &atoms {
            if !(a.mass > 0.0) {
                return Err(Error::NonpositiveMass(a.mass));
            }
            if !a.position.is_finite() {
                return Err(Error::InvalidDomain("non-finite atom position".into()));
            }
            total.add(a.mass);
        }
        if (total.value() - 1.0).abs() > MASS_TOL {
            return Err(Error::MassMismatch { source_total: total.value(), target_total: 1.0 });
        }
        let mut sorted = atoms;
        sorted.sort_by(|a, b| {
            (a.position.x, a.position.y)
                .partial_cmp(&(b.position.x, b.position.y))
                .expect("finite positions")
        });
        for w in sorted.windows(2) {
            if w[0].position == w[1].position {
                return Err(Error::InvalidDomain(format!(
                    "duplicate atom position ({}, {})",
                    w[0].position.x, w[0].position.y
                )));
            }
        }
        Ok(DiscreteMeasure { atoms: sorted, cell_size, domain_tag: domain_tag.to_string() })
    }

    /// Build from weighted points, merging mass at exactly coincident
    /// positions first.
    pub fn from_weighted_points(
        points: Vec<(Point, f64)>,
        cell_size: f64,
        domain_tag: &str,
    ) -> Result<DiscreteMeasure> {
        let mut pts = points;
        pts.sort_by(|a, b| (a.0.x, a.0.y).partial_cmp(&(b.0.x, b.0.y)).expect("finite positions"));
        let mut atoms: Vec<Atom> = Vec::with_capacity(pts.len());
        for (p, m) in pts {
            match atoms.last_mut() {
                Some(last) if last.position == p => last.mass += m,
                _ => atoms.push(Atom { position: p, mass: m }),
            }
        }
        DiscreteMeasure::new(atoms, cell_size, domain_tag)
    }

    /// Integrate an analytic density over every grid cell clipped to the
    /// region, place one atom per cell at the clipped centroid, and normalize
    /// the result to total mass one.
    pub fn from_sampler<R, F>(density: F, eps: f64, region: &R, domain_tag: &str) -> Result<DiscreteMeasure>
    where
        R: PlanarRegion,
        F: Fn(f64, f64) -> f64,
    {
        if !(eps > 0.0) {
            return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
        }
        let bb = region.bbox();
        if !bb.x0.is_finite() || !bb.x1.is_finite() || !bb.y0.is_finite() || !bb.y1.is_finite() {
            return Err(Error::Precondition("sampler region must have a finite bounding box".into()));
        }
        let (i0, i1) = (cell_index(bb.x0, eps), cell_index(bb.x1, eps));
        let (j0, j1) = (cell_index(bb.y0, eps), cell_index(bb.y1, eps));
        let mut atoms = Vec::new();
        let mut total = KahanSum::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                let cell = cell_box(i, j, eps);
                if !region.intersects_box(&cell) {
                    continue;
                }
                let mass = integrate_density_over(region, &cell, &density);
                if mass > 0.0 {
                    if let Some(centroid) = region.clip_centroid(&cell) {
                        atoms.push(Atom { position: centroid, mass });
                        total.add(mass);
                    }
                }
            }
        }
        if atoms.is_empty() || !(total.value() > 0.0) {
            return Err(Error::EmptySupport);
        }
        let t = total.value();
        for a in &mut atoms {
            a.mass /= t;
        }
        DiscreteMeasure::new(atoms, eps, domain_tag)
    }

    /// Uniform probability on a rectangle, discretized on the `eps`-grid.
    pub fn uniform_on_rect(rect: Box2, eps: f64, domain_tag: &str) -> Result<DiscreteMeasure> {
        DiscreteMeasure::from_sampler(|_, _| 1.0, eps, &crate::geometry::RectRegion(rect), domain_tag)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn domain_tag(&self) -> &str {
        &self.domain_tag
    }

    pub fn total_mass(&self) -> f64 {
        let mut s = KahanSum::new();
        for a in &self.atoms {
            s.add(a.mass);
        }
        s.value()
    }

    /// Density of atom `i` under the cell model.
    pub fn density(&self, i: usize) -> f64 {
        self.atoms[i].mass / (self.cell_size * self.cell_size)
    }

    /// Re-bin the measure onto the `eps_out` grid clipped to `region`.
    ///
    /// Each atom's kernel square is spread over the target cells in
    /// proportion to clipped overlap area; per-atom weights are normalized by
    /// the sum of their parts, so total mass is conserved exactly up to
    /// rounding. Output atoms sit at the geometric centroid of
    /// `cell ∩ region`.
    pub fn block_average<R: PlanarRegion>(&self, eps_out: f64, region: &R) -> Result<DiscreteMeasure> {
        if !(eps_out > 0.0) {
            return Err(Error::Precondition(format!("eps must be positive, got {eps_out}")));
        }
        let half = 0.5 * self.cell_size;
        let mut cells: BTreeMap<(i64, i64), f64> = BTreeMap::new();
        for a in &self.atoms {
            let kernel = Box2::new(
                a.position.x - half,
                a.position.x + half,
                a.position.y - half,
                a.position.y + half,
            );
            let (i0, i1) = (cell_index(kernel.x0, eps_out), cell_index(kernel.x1, eps_out));
            let (j0, j1) = (cell_index(kernel.y0, eps_out), cell_index(kernel.y1, eps_out));
            let mut parts: Vec<((i64, i64), f64)> = Vec::new();
            let mut denom = 0.0;
            for i in i0..=i1 {
                for j in j0..=j1 {
                    let cell = cell_box(i, j, eps_out);
                    let overlap = Box2::new(
                        kernel.x0.max(cell.x0),
                        kernel.x1.min(cell.x1),
                        kernel.y0.max(cell.y0),
                        kernel.y1.min(cell.y1),
                    );
                    if overlap.x1 <= overlap.x0 || overlap.y1 <= overlap.y0 {
                        continue;
                    }
                    let w = region.overlap_area(&overlap);
                    if w > 0.0 {
                        parts.push(((i, j), w));
                        denom += w;
                    }
                }
            }
            if denom > 0.0 {
                for ((i, j), w) in parts {
                    *cells.entry((i, j)).or_insert(0.0) += a.mass * w / denom;
                }
            } else {
                // Kernel entirely misses the region: fall back to assigning
                // the mass to the cell holding the atom itself.
                let idx = (cell_index(a.position.x, eps_out), cell_index(a.position.y, eps_out));
                let cell = cell_box(idx.0, idx.1, eps_out);
                if region.overlap_area(&cell) > 0.0 {
                    *cells.entry(idx).or_insert(0.0) += a.mass;
                } else {
                    return Err(Error::EmptySupport);
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut weighted = Vec::with_capacity(cells.len());
        for ((i, j), mass) in cells {
            if mass <= 0.0 {
                continue;
            }
            let cell = cell_box(i, j, eps_out);
            let centroid = region.clip_centroid(&cell).unwrap_or_else(|| cell.center());
            weighted.push((centroid, mass));
        }
        DiscreteMeasure::from_weighted_points(weighted, eps_out, &self.domain_tag)
    }

    /// Rényi-type entropy `−Σ mᵢ (mᵢ/ε²)^(−1/N')` for `N' > 1`.
    pub fn ent_n(&self, nprime: f64) -> Result<f64> {
        if !(nprime > 1.0) {
            return Err(Error::Precondition(format!("N' must exceed 1, got {nprime}")));
        }
        let inv = 1.0 / nprime;
        let area = self.cell_size * self.cell_size;
        let mut s = KahanSum::new();
        for a in &self.atoms {
            if !(a.mass > 0.0) {
                return Err(Error::NonpositiveMass(a.mass));
            }
            s.add(a.mass * (a.mass / area).powf(-inv));
        }
        Ok(-s.value())
    }

    /// Boltzmann entropy `Σ mᵢ log(mᵢ/ε²)`.
    pub fn ent_inf(&self) -> f64 {
        let area = self.cell_size * self.cell_size;
        let mut s = KahanSum::new();
        for a in &self.atoms {
            s.add(a.mass * (a.mass / area).ln());
        }
        s.value()
    }

    /// Serialize as CSV `x,y,mass,eps` with rows ordered lexicographically by
    /// `(x, y)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,mass,eps\n");
        for a in &self.atoms {
            out.push_str(&format!("{},{},{},{}\n", a.position.x, a.position.y, a.mass, self.cell_size));
        }
        out
    }

    /// Parse the CSV emitted by [`DiscreteMeasure::to_csv`].
    pub fn from_csv(text: &str, domain_tag: &str) -> Result<DiscreteMeasure> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "x,y,mass,eps" => {}
            other => {
                return Err(Error::Config(format!("expected measure CSV header, got {other:?}")));
            }
        }
        let mut atoms = Vec::new();
        let mut eps: Option<f64> = None;
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Config(format!("line {}: expected 4 fields", lineno + 2)));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 2)))
            };
            let (x, y, mass, e) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
            match eps {
                None => eps = Some(e),
                Some(prev) if (prev - e).abs() <= f64::EPSILON * prev.abs() => {}
                Some(prev) => {
                    return Err(Error::Config(format!(
                        "line {}: inconsistent eps {e} (expected {prev})",
                        lineno + 2
                    )));
                }
            }
            atoms.push(Atom { position: point(x, y), mass });
        }
        let eps = eps.ok_or(Error::EmptySupport)?;
        DiscreteMeasure::new(atoms, eps, domain_tag)
    }
}

/// Grid index of the cell containing `v` (cells are `[kε, (k+1)ε)`).
pub(crate) fn cell_index(v: f64, eps: f64) -> i64 {
    (v / eps).floor() as i64
}

/// The closed box of grid cell `(i, j)`.
pub(crate) fn cell_box(i: i64, j: i64, eps: f64) -> Box2 {
    Box2::new(i as f64 * eps, (i + 1) as f64 * eps, j as f64 * eps, (j + 1) as f64 * eps)
}

/// ∫∫ density over `cell ∩ region` with nested Simpson panels.
fn integrate_density_over<R, F>(region: &R, cell: &Box2, density: &F) -> f64
where
    R: PlanarRegion,
    F: Fn(f64, f64) -> f64,
{
    let panels = 16usize;
    let dx = (cell.x1 - cell.x0) / panels as f64;
    let line = |x: f64| -> f64 {
        match region.y_span(x) {
            Some((lo, hi)) => {
                let lo = lo.max(cell.y0);
                let hi = hi.min(cell.y1);
                if hi <= lo {
                    return 0.0;
                }
                let dy = (hi - lo) / panels as f64;
                let mut s = 0.0;
                for k in 0..panels {
                    let y0 = lo + k as f64 * dy;
                    let ym = y0 + 0.5 * dy;
                    let y1 = y0 + dy;
                    s += dy / 6.0 * (density(x, y0) + 4.0 * density(x, ym) + density(x, y1));
                }
                s
            }
            None => 0.0,
        }
    };
    let mut s = 0.0;
    for k in 0..panels {
        let x0 = cell.x0 + k as f64 * dx;
        let xm = x0 + 0.5 * dx;
        let x1 = x0 + dx;
        s += dx / 6.0 * (line(x0) + 4.0 * line(xm) + line(x1));
    }
    s
}

/// Compensated accumulator used for cost and mass bookkeeping.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> KahanSum {
        KahanSum::default()
    }

    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Inputs of the distortion coefficient.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DistortionInput {
    pub t: f64,
    pub k: f64,
    pub n: f64,
    pub theta: f64,
}

impl DistortionInput {
    pub fn new(t: f64, k: f64, n: f64, theta: f64) -> Result<DistortionInput> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Precondition(format!("t must lie in [0,1], got {t}")));
        }
        if !(n >= 1.0) {
            return Err(Error::Precondition(format!("N must be at least 1, got {n}")));
        }
        if !(theta >= 0.0) {
            return Err(Error::Precondition(format!("theta must be nonnegative, got {theta}")));
        }
        if !k.is_finite() {
            return Err(Error::Precondition(format!("K must be finite, got {k}")));
        }
        Ok(DistortionInput { t, k, n, theta })
    }
}

/// Value of σ: either finite or the +∞ branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Sigma {
    Finite(f64),
    Infinite,
}

impl Sigma {
    pub fn finite(self) -> Option<f64> {
        match self {
            Sigma::Finite(v) => Some(v),
            Sigma::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Sigma::Infinite)
    }
}

/// Distortion coefficient `σ_{K,N}^{(t)}(θ)` with its four branches:
/// `+∞` when `Kθ² ≥ Nπ²`, a sine ratio for `0 < Kθ² < Nπ²`, exactly `t` when
/// `Kθ² = 0`, and a hyperbolic-sine ratio when `Kθ² < 0`.
pub fn sigma(input: &DistortionInput) -> Sigma {
    let DistortionInput { t, k, n, theta } = *input;
    let kt2 = k * theta * theta;
    if kt2 >= n * std::f64::consts::PI * std::f64::consts::PI {
        Sigma::Infinite
    } else if kt2 > 0.0 {
        let w = theta * (k / n).sqrt();
        Sigma::Finite((t * w).sin() / w.sin())
    } else if kt2 == 0.0 {
        Sigma::Finite(t)
    } else {
        let w = theta * (-k / n).sqrt();
        Sigma::Finite((t * w).sinh() / w.sinh())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Box2, RectRegion, WholePlane};

    fn uniform_unit_square(eps: f64) -> DiscreteMeasure {
        DiscreteMeasure::uniform_on_rect(Box2::new(0.0, 1.0, 0.0, 1.0), eps, "test").unwrap()
    }

    #[test]
    fn block_average_uniform_four_cells() {
        let mu = uniform_unit_square(0.5);
        assert_eq!(mu.len(), 4);
        for a in mu.atoms() {
            assert!((a.mass - 0.25).abs() < 1e-12);
        }
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_average_single_atom_lands_at_cell_centroid() {
        let mu = DiscreteMeasure::new(
            vec![Atom { position: point(0.3, 0.7), mass: 1.0 }],
            0.01,
            "t",
        )
        .unwrap();
        let out = mu.block_average(1.0, &WholePlane).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.atoms()[0].position, point(0.5, 0.5));
        assert!((out.atoms()[0].mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_average_half_strip() {
        let mu = DiscreteMeasure::uniform_on_rect(Box2::new(0.0, 1.0, 0.0, 0.5), 0.5, "t").unwrap();
        assert_eq!(mu.len(), 2);
        for a in mu.atoms() {
            assert!((a.mass - 0.5).abs() < 1e-12);
            assert!((a.position.y - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn block_average_empty_support_errors() {
        let mu = uniform_unit_square(0.5);
        let far = RectRegion(Box2::new(10.0, 11.0, 10.0, 11.0));
        assert!(matches!(mu.block_average(0.5, &far), Err(Error::EmptySupport)));
    }

    #[test]
    fn ent_n_uniform_values() {
        // uniform on area 1/4 with N' = 4: -A^(1/N') = -sqrt(1/2)
        let mu = DiscreteMeasure::uniform_on_rect(Box2::new(0.0, 0.5, 0.0, 0.5), 0.25, "t").unwrap();
        let e = mu.ent_n(4.0).unwrap();
        assert!((e - (-(0.25f64.powf(0.25)))).abs() < 1e-12);
        assert!((e - (-0.7071067811865476)).abs() < 1e-10);
        // uniform on area 1: -1 for any N'
        let unit = uniform_unit_square(0.25);
        assert!((unit.ent_n(4.0).unwrap() + 1.0).abs() < 1e-12);
        assert!((unit.ent_n(7.3).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ent_n_two_cell_mix() {
        let mu = DiscreteMeasure::new(
            vec![
                Atom { position: point(0.5, 0.5), mass: 0.75 },
                Atom { position: point(1.5, 0.5), mass: 0.25 },
            ],
            1.0,
            "t",
        )
        .unwrap();
        // direct summation oracle: -(0.75^(3/4) + 0.25^(3/4))
        let expect = -(0.75f64.powf(0.75) + 0.25f64.powf(0.75));
        let e = mu.ent_n(4.0).unwrap();
        assert!((e - expect).abs() < 1e-14);
        assert!((e - (-1.1594808394609302)).abs() < 1e-12);
    }

    #[test]
    fn ent_inf_values() {
        let half = DiscreteMeasure::uniform_on_rect(Box2::new(0.0, 1.0, 0.0, 0.5), 0.25, "t").unwrap();
        assert!((half.ent_inf() - std::f64::consts::LN_2).abs() < 1e-12);
        let unit = uniform_unit_square(0.5);
        assert!(unit.ent_inf().abs() < 1e-12);
        let mix = DiscreteMeasure::new(
            vec![
                Atom { position: point(0.5, 0.5), mass: 0.9 },
                Atom { position: point(1.5, 0.5), mass: 0.1 },
            ],
            1.0,
            "t",
        )
        .unwrap();
        let expect = 0.9 * 0.9f64.ln() + 0.1 * 0.1f64.ln();
        assert!((mix.ent_inf() - expect).abs() < 1e-14);
        assert!((mix.ent_inf() - (-0.3250829733914482)).abs() < 1e-12);
    }

    #[test]
    fn sigma_branches() {
        let s = sigma(&DistortionInput::new(0.5, 0.0, 2.0, 1.0).unwrap());
        assert_eq!(s, Sigma::Finite(0.5));
        let s = sigma(&DistortionInput::new(0.3, 4.0, 1.0, std::f64::consts::PI).unwrap());
        assert!(s.is_infinite());
        let s = sigma(&DistortionInput::new(0.5, 1.0, 1.0, std::f64::consts::FRAC_PI_2).unwrap());
        let v = s.finite().unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn sigma_infinite_iff_threshold() {
        // just below and at the threshold K θ² = N π²
        let n = 2.0f64;
        let k = 1.0f64;
        let theta_crit = (n / k).sqrt() * std::f64::consts::PI;
        assert!(sigma(&DistortionInput::new(0.5, k, n, theta_crit).unwrap()).is_infinite());
        assert!(!sigma(&DistortionInput::new(0.5, k, n, theta_crit * (1.0 - 1e-9)).unwrap()).is_infinite());
    }

    #[test]
    fn sigma_continuous_at_zero_curvature() {
        for &t in &[0.1, 0.5, 0.9] {
            for &k in &[1e-9, -1e-9] {
                let v = sigma(&DistortionInput::new(t, k, 2.0, 1.0).unwrap()).finite().unwrap();
                assert!((v - t).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn sigma_endpoints() {
        for &k in &[-2.0, 0.0, 2.0] {
            for &theta in &[0.0, 0.5, 1.0] {
                let s0 = sigma(&DistortionInput::new(0.0, k, 2.0, theta).unwrap());
                let s1 = sigma(&DistortionInput::new(1.0, k, 2.0, theta).unwrap());
                if let Sigma::Finite(v) = s0 {
                    assert!(v.abs() < 1e-15);
                }
                if let Sigma::Finite(v) = s1 {
                    assert!((v - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn jensen_block_average_never_increases_entropy() {
        // fine non-uniform measure on the unit square, coarsened 2x
        let fine = DiscreteMeasure::from_sampler(
            |x, y| 1.0 + 0.8 * (x - 0.5) + 0.5 * (y * 6.0).sin(),
            0.125,
            &RectRegion(Box2::new(0.0, 1.0, 0.0, 1.0)),
            "t",
        )
        .unwrap();
        let coarse = fine.block_average(0.25, &WholePlane).unwrap();
        assert!(coarse.ent_n(4.0).unwrap() <= fine.ent_n(4.0).unwrap() + 1e-12);
        assert!(coarse.ent_inf() <= fine.ent_inf() + 1e-12);
    }

    #[test]
    fn ent_n_monotone_in_inverse_order_for_dense_measures() {
        // densities >= 1: Ent_N' nonincreasing in 1/N'
        let mu = DiscreteMeasure::new(
            vec![
                Atom { position: point(0.05, 0.05), mass: 0.6 },
                Atom { position: point(0.15, 0.05), mass: 0.4 },
            ],
            0.1,
            "t",
        )
        .unwrap();
        let mut prev = mu.ent_n(1.5).unwrap();
        for np in [2.0, 3.0, 4.0, 8.0, 16.0, 64.0] {
            let e = mu.ent_n(np).unwrap();
            assert!(e <= prev + 1e-12, "N'={np}: {e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn csv_round_trip() {
        let mu = DiscreteMeasure::uniform_on_rect(Box2::new(0.0, 1.0, 0.0, 0.5), 0.25, "t").unwrap();
        let csv = mu.to_csv();
        let back = DiscreteMeasure::from_csv(&csv, "t").unwrap();
        assert_eq!(mu.len(), back.len());
        for (a, b) in mu.atoms().iter().zip(back.atoms()) {
            assert_eq!(a.position, b.position);
            assert_eq!(a.mass, b.mass);
        }
        assert_eq!(mu.cell_size(), back.cell_size());
    }
}
