//! Uniform grids over C^n (n = 1, 2) viewed as R^{2n}, domain masks for
//! sublevel sets of a defining function, and boundary data.
//!
//! Nodes are addressed by a flat row-major index over the real axes in the
//! order x1, y1, x2, y2 (first axis slowest).

use num_complex::Complex64;

use crate::error::GridError;
use crate::linalg;

/// A point of C^n; only the first `n` entries are meaningful.
pub type ZPoint = [Complex64; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub nodes_per_axis: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn new(n: usize, nodes_per_axis: usize, half_width: f64) -> Result<Self, GridError> {
        if n != 1 && n != 2 {
            return Err(GridError::InvalidGrid(format!("complex dimension must be 1 or 2, got {n}")));
        }
        if nodes_per_axis < 5 || nodes_per_axis % 2 == 0 {
            return Err(GridError::InvalidGrid(format!(
                "nodes per axis must be odd and >= 5, got {nodes_per_axis}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(GridError::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        let total = (nodes_per_axis as u128).pow(2 * n as u32);
        if total > u32::MAX as u128 {
            return Err(GridError::InvalidGrid(format!("{total} nodes is not addressable")));
        }
        Ok(GridSpec { n, nodes_per_axis, half_width })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.nodes_per_axis - 1) as f64
    }

    /// Number of real axes, 2n.
    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis.pow(self.real_dim() as u32)
    }

    /// Volume element h^{2n} of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.real_dim() as i32)
    }

    /// Flat-index stride of each real axis.
    pub fn strides(&self) -> [usize; 4] {
        let d = self.real_dim();
        let mut s = [0usize; 4];
        let mut acc = 1;
        for a in (0..d).rev() {
            s[a] = acc;
            acc *= self.nodes_per_axis;
        }
        s
    }

    pub fn axis_indices(&self, node: usize) -> [usize; 4] {
        let d = self.real_dim();
        let nn = self.nodes_per_axis;
        let mut idx = [0usize; 4];
        let mut rem = node;
        for a in (0..d).rev() {
            idx[a] = rem % nn;
            rem /= nn;
        }
        idx
    }

    pub fn node_at(&self, idx: &[usize]) -> usize {
        let s = self.strides();
        idx.iter().zip(s.iter()).map(|(i, s)| i * s).sum()
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn real_coords(&self, node: usize) -> [f64; 4] {
        let idx = self.axis_indices(node);
        let mut x = [0.0; 4];
        for a in 0..self.real_dim() {
            x[a] = self.coordinate(idx[a]);
        }
        x
    }

    pub fn point(&self, node: usize) -> ZPoint {
        let x = self.real_coords(node);
        [Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])]
    }

    /// True when the node lies on the outer layer of the box.
    pub fn on_box_edge(&self, node: usize) -> bool {
        let idx = self.axis_indices(node);
        idx[..self.real_dim()].iter().any(|&i| i == 0 || i == self.nodes_per_axis - 1)
    }

    /// Flat offsets of the second-difference stencil: +-e_a for every axis
    /// and +-e_a +- e_b for every axis pair.
    pub fn stencil_offsets(&self) -> Vec<isize> {
        let d = self.real_dim();
        let s = self.strides();
        let mut out = Vec::new();
        for a in 0..d {
            out.push(s[a] as isize);
            out.push(-(s[a] as isize));
        }
        for a in 0..d {
            for b in (a + 1)..d {
                for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    out.push(sa * s[a] as isize + sb * s[b] as isize);
                }
            }
        }
        out
    }
}

/// log(1 + sum |z_j|^2).
pub fn fubini_study_rho(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().ln_1p()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    Exterior,
    Boundary,
    Interior,
}

impl Label {
    pub fn code(self) -> u8 {
        match self {
            Label::Exterior => 0,
            Label::Boundary => 1,
            Label::Interior => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Label> {
        match c {
            0 => Some(Label::Exterior),
            1 => Some(Label::Boundary),
            2 => Some(Label::Interior),
            _ => None,
        }
    }
}

const NONE: u32 = u32::MAX;

/// Interior/boundary/exterior classification for {rho < a}.
#[derive(Clone, Debug)]
pub struct DomainMask {
    spec: GridSpec,
    threshold: f64,
    band: f64,
    labels: Vec<Label>,
    rho: Vec<f64>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    interior_pos: Vec<u32>,
    boundary_pos: Vec<u32>,
    offsets: Vec<isize>,
}

/// Builds the mask for {rho < a} with a zero-width band.
pub fn build_domain<F>(spec: GridSpec, rho: F, a: f64) -> Result<DomainMask, GridError>
where
    F: Fn(&[Complex64]) -> f64,
{
    build_domain_with_band(spec, rho, a, 0.0)
}

/// Builds the mask with interior {rho < a - band}; the boundary label covers
/// every other node reachable by an interior stencil.
pub fn build_domain_with_band<F>(spec: GridSpec, rho: F, a: f64, band: f64) -> Result<DomainMask, GridError>
where
    F: Fn(&[Complex64]) -> f64,
{
    if !(a > 0.0) || !a.is_finite() {
        return Err(GridError::EmptyInterior { threshold: a });
    }
    if !(band >= 0.0) || band >= a {
        return Err(GridError::InvalidGrid(format!("band {band} must lie in [0, a)")));
    }
    let total = spec.node_count();
    let n = spec.n;
    let mut rho_vals = Vec::with_capacity(total);
    for node in 0..total {
        let p = spec.point(node);
        let r = rho(&p[..n]);
        if !r.is_finite() {
            return Err(GridError::NonFinite { node, value: r });
        }
        rho_vals.push(r);
    }
    for (node, &r) in rho_vals.iter().enumerate() {
        if r < a && spec.on_box_edge(node) {
            return Err(GridError::TouchesBoxEdge { node });
        }
    }
    let mut labels = vec![Label::Exterior; total];
    let mut interior = Vec::new();
    for (node, &r) in rho_vals.iter().enumerate() {
        if r < a - band {
            labels[node] = Label::Interior;
            interior.push(node);
        }
    }
    if interior.is_empty() {
        return Err(GridError::EmptyInterior { threshold: a });
    }
    let offsets = spec.stencil_offsets();
    for &node in &interior {
        for &o in &offsets {
            let nb = (node as isize + o) as usize;
            if labels[nb] == Label::Exterior {
                labels[nb] = Label::Boundary;
            }
        }
    }
    let boundary: Vec<usize> = (0..total).filter(|&i| labels[i] == Label::Boundary).collect();
    let mut interior_pos = vec![NONE; total];
    for (k, &node) in interior.iter().enumerate() {
        interior_pos[node] = k as u32;
    }
    let mut boundary_pos = vec![NONE; total];
    for (k, &node) in boundary.iter().enumerate() {
        boundary_pos[node] = k as u32;
    }
    Ok(DomainMask {
        spec,
        threshold: a,
        band,
        labels,
        rho: rho_vals,
        interior,
        boundary,
        interior_pos,
        boundary_pos,
        offsets,
    })
}

impl DomainMask {
    /// Rebuilds a mask from stored labels (used when reading field files).
    /// `rho` defaults to the Fubini-Study potential.
    pub fn from_labels(spec: GridSpec, labels: Vec<Label>, threshold: f64) -> Result<Self, GridError> {
        if labels.len() != spec.node_count() {
            return Err(GridError::Mismatch(format!(
                "{} labels for {} nodes",
                labels.len(),
                spec.node_count()
            )));
        }
        let total = spec.node_count();
        let offsets = spec.stencil_offsets();
        let interior: Vec<usize> = (0..total).filter(|&i| labels[i] == Label::Interior).collect();
        if interior.is_empty() {
            return Err(GridError::EmptyInterior { threshold });
        }
        for &node in &interior {
            if spec.on_box_edge(node) {
                return Err(GridError::TouchesBoxEdge { node });
            }
            for &o in &offsets {
                let nb = (node as isize + o) as usize;
                if labels[nb] == Label::Exterior {
                    return Err(GridError::Mismatch(format!("interior node {node} reads exterior node {nb}")));
                }
            }
        }
        let boundary: Vec<usize> = (0..total).filter(|&i| labels[i] == Label::Boundary).collect();
        let mut interior_pos = vec![NONE; total];
        for (k, &node) in interior.iter().enumerate() {
            interior_pos[node] = k as u32;
        }
        let mut boundary_pos = vec![NONE; total];
        for (k, &node) in boundary.iter().enumerate() {
            boundary_pos[node] = k as u32;
        }
        let rho = (0..total).map(|i| fubini_study_rho(&spec.point(i)[..spec.n])).collect();
        Ok(DomainMask {
            spec,
            threshold,
            band: 0.0,
            labels,
            rho,
            interior,
            boundary,
            interior_pos,
            boundary_pos,
            offsets,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> Label {
        self.labels[node]
    }

    /// Defining function values at every node.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.labels[node] == Label::Interior
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.labels[node] == Label::Boundary
    }

    /// Position of `node` in the interior list.
    pub fn interior_index(&self, node: usize) -> Option<usize> {
        let p = self.interior_pos[node];
        (p != NONE).then_some(p as usize)
    }

    /// Position of `node` in the boundary list.
    pub fn boundary_index(&self, node: usize) -> Option<usize> {
        let p = self.boundary_pos[node];
        (p != NONE).then_some(p as usize)
    }

    pub fn stencil_offsets(&self) -> &[isize] {
        &self.offsets
    }

    /// Interior nodes none of whose stencil neighbours lie in the boundary band.
    pub fn is_deep_interior(&self, node: usize) -> bool {
        self.is_interior(node)
            && self
                .offsets
                .iter()
                .all(|&o| self.is_interior((node as isize + o) as usize))
    }

    /// Exhaustive check that interior stencils only read stored nodes.
    pub fn validate_stencils(&self) -> Result<(), GridError> {
        for &node in &self.interior {
            for &o in &self.offsets {
                let nb = node as isize + o;
                if nb < 0 || nb as usize >= self.labels.len() || self.labels[nb as usize] == Label::Exterior {
                    return Err(GridError::NotInterior { node });
                }
            }
        }
        Ok(())
    }

    pub fn same_layout(&self, other: &DomainMask) -> bool {
        self.spec == other.spec && self.labels == other.labels
    }
}

/// A real field stored densely over all nodes; exterior entries are zero
/// and never read by the calculus.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(spec: GridSpec) -> Self {
        GridFunction { spec, values: vec![0.0; spec.node_count()] }
    }

    pub fn constant(mask: &DomainMask, c: f64) -> Self {
        let mut f = Self::zeros(*mask.spec());
        for &i in mask.interior().iter().chain(mask.boundary()) {
            f.values[i] = c;
        }
        f
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != spec.node_count() {
            return Err(GridError::Mismatch(format!(
                "{} values for {} nodes",
                values.len(),
                spec.node_count()
            )));
        }
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GridError::NonFinite { node, value });
        }
        Ok(GridFunction { spec, values })
    }

    /// Samples `f` on interior and boundary nodes.
    pub fn from_fn<F>(mask: &DomainMask, f: F) -> Result<Self, GridError>
    where
        F: Fn(&[Complex64]) -> f64,
    {
        let spec = *mask.spec();
        let mut g = Self::zeros(spec);
        for &i in mask.interior().iter().chain(mask.boundary()) {
            let p = spec.point(i);
            let v = f(&p[..spec.n]);
            if !v.is_finite() {
                return Err(GridError::NonFinite { node: i, value: v });
            }
            g.values[i] = v;
        }
        Ok(g)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn set(&mut self, node: usize, v: f64) {
        self.values[node] = v;
    }

    pub fn check_finite(&self) -> Result<(), GridError> {
        match self.values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            Some((node, &value)) => Err(GridError::NonFinite { node, value }),
            None => Ok(()),
        }
    }

    pub fn check_layout(&self, mask: &DomainMask) -> Result<(), GridError> {
        if self.spec != *mask.spec() {
            return Err(GridError::Mismatch("field and mask use different grids".into()));
        }
        Ok(())
    }

    /// Largest |value| over interior and boundary nodes.
    pub fn sup_abs(&self, mask: &DomainMask) -> f64 {
        mask.interior()
            .iter()
            .chain(mask.boundary())
            .map(|&i| self.values[i].abs())
            .fold(0.0, f64::max)
    }

    pub fn max_interior(&self, mask: &DomainMask) -> f64 {
        mask.interior().iter().map(|&i| self.values[i]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_interior(&self, mask: &DomainMask) -> f64 {
        mask.interior().iter().map(|&i| self.values[i]).fold(f64::INFINITY, f64::min)
    }

    /// `self + c * other` nodewise.
    pub fn add_scaled(&self, c: f64, other: &GridFunction) -> GridFunction {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        GridFunction { spec: self.spec, values }
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction { spec: self.spec, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Sup of |self - other| over the given nodes.
    pub fn max_diff_on(&self, other: &GridFunction, nodes: &[usize]) -> f64 {
        nodes.iter().map(|&i| (self.values[i] - other.values[i]).abs()).fold(0.0, f64::max)
    }
}

/// Dirichlet values on the boundary band, aligned with `DomainMask::boundary`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    values: Vec<f64>,
}

impl BoundaryData {
    pub fn new(mask: &DomainMask, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != mask.boundary().len() {
            return Err(GridError::Mismatch(format!(
                "{} boundary values for {} boundary nodes",
                values.len(),
                mask.boundary().len()
            )));
        }
        if let Some((k, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GridError::NonFinite { node: mask.boundary()[k], value });
        }
        Ok(BoundaryData { values })
    }

    pub fn zeros(mask: &DomainMask) -> Self {
        BoundaryData { values: vec![0.0; mask.boundary().len()] }
    }

    pub fn constant(mask: &DomainMask, c: f64) -> Self {
        BoundaryData { values: vec![c; mask.boundary().len()] }
    }

    pub fn from_fn<F>(mask: &DomainMask, f: F) -> Result<Self, GridError>
    where
        F: Fn(&[Complex64]) -> f64,
    {
        let spec = mask.spec();
        let values = mask.boundary().iter().map(|&i| f(&spec.point(i)[..spec.n])).collect();
        Self::new(mask, values)
    }

    /// Restriction of a field to the boundary band.
    pub fn from_field(mask: &DomainMask, f: &GridFunction) -> Self {
        BoundaryData { values: mask.boundary().iter().map(|&i| f.get(i)).collect() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Overwrites the band values of `f` with these values.
    pub fn impose(&self, mask: &DomainMask, f: &mut GridFunction) {
        for (k, &node) in mask.boundary().iter().enumerate() {
            f.values[node] = self.values[k];
        }
    }

    /// Largest deviation of `f` from these values on the band.
    pub fn max_deviation(&self, mask: &DomainMask, f: &GridFunction) -> f64 {
        mask.boundary()
            .iter()
            .enumerate()
            .map(|(k, &node)| (f.values[node] - self.values[k]).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Quintic cutoff with C^2 contact at both ends: 0 for t <= 0, 1 for t >= 1.
pub fn quintic_cutoff(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Applies the negative axis Laplacian (times h^2) on interior unknowns with
/// zero band values.
pub(crate) fn neg_laplacian_scaled(mask: &DomainMask, x: &[f64], out: &mut [f64], scratch: &mut [f64]) {
    let spec = mask.spec();
    let strides = spec.strides();
    let d = spec.real_dim();
    for (k, &node) in mask.interior().iter().enumerate() {
        scratch[node] = x[k];
    }
    for (k, &node) in mask.interior().iter().enumerate() {
        let c = scratch[node];
        let mut acc = 0.0;
        for &s in &strides[..d] {
            acc += 2.0 * c - scratch[node + s] - scratch[node - s];
        }
        out[k] = acc;
    }
}

/// Spectral bounds of the scaled negative Laplacian on any subdomain of the box.
pub(crate) fn neg_laplacian_bounds(spec: &GridSpec) -> (f64, f64) {
    let d = spec.real_dim() as f64;
    let s = (std::f64::consts::PI / (2.0 * (spec.nodes_per_axis - 1) as f64)).sin();
    (0.999 * d * 4.0 * s * s, d * 4.0)
}

/// Discrete harmonic extension of boundary data into the interior.
///
/// Solved by fixed-step Chebyshev iteration, so the result depends linearly
/// on `psi` up to rounding.
pub fn harmonic_extension(psi: &BoundaryData, mask: &DomainMask) -> GridFunction {
    let spec = *mask.spec();
    let strides = spec.strides();
    let d = spec.real_dim();
    let mut dense = GridFunction::zeros(spec);
    psi.impose(mask, &mut dense);
    let m = mask.interior_count();
    let mut rhs = vec![0.0; m];
    for (k, &node) in mask.interior().iter().enumerate() {
        let mut acc = 0.0;
        for &s in &strides[..d] {
            for nb in [node + s, node - s] {
                if mask.is_boundary(nb) {
                    acc += dense.values[nb];
                }
            }
        }
        rhs[k] = acc;
    }
    let mut scratch = vec![0.0; spec.node_count()];
    let (lo, hi) = neg_laplacian_bounds(&spec);
    let x = linalg::chebyshev(
        |x, out| neg_laplacian_scaled(mask, x, out, &mut scratch),
        &rhs,
        lo,
        hi,
        1e-14,
    );
    for (k, &node) in mask.interior().iter().enumerate() {
        dense.values[node] = x[k];
    }
    dense
}

/// Extends boundary data to a field equal to `psi` on the band and
/// identically zero where rho < a - collar_width, blending the discrete
/// harmonic extension with a quintic cutoff in rho.
pub fn extend_boundary_data(
    psi: &BoundaryData,
    mask: &DomainMask,
    collar_width: f64,
) -> Result<GridFunction, GridError> {
    if psi.len() != mask.boundary().len() {
        return Err(GridError::Mismatch("boundary data does not match mask".into()));
    }
    let min_rho = mask.interior().iter().map(|&i| mask.rho()[i]).fold(f64::INFINITY, f64::min);
    let max_collar = mask.threshold() - min_rho;
    if !(collar_width > 0.0) || collar_width >= max_collar {
        return Err(GridError::CollarTooWide { collar: collar_width, max: max_collar });
    }
    let mut ext = harmonic_extension(psi, mask);
    let start = mask.threshold() - collar_width;
    for &node in mask.interior() {
        let chi = quintic_cutoff((mask.rho()[node] - start) / collar_width);
        ext.values[node] *= chi;
    }
    Ok(ext)
}
