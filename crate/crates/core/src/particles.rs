//! Random particle clouds and their displacement under a contact solution.

use rstar::primitives::GeomWithData;
use rstar::RTree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contact::{ContactSolution, ElasticHalfSpace, SurfaceLoads};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayerSpec {
    /// Lateral extent (mm) starting at the gel origin.
    pub size: [f64; 2],
    /// Particle layer thickness above the gel bottom (mm).
    pub thickness: f64,
    pub nominal_count: usize,
    /// Relative half-width of the uniform count jitter.
    pub count_jitter: f64,
    pub radius_range: [f64; 2],
}

impl Default for LayerSpec {
    fn default() -> Self {
        Self {
            size: [30.0, 30.0],
            thickness: 4.5,
            nominal_count: 80,
            count_jitter: 0.05,
            radius_range: [0.075, 0.090],
        }
    }
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nominal_count == 0 {
            return Err(Error::InvalidParameter("nominal particle count must be positive".into()));
        }
        if !(self.size[0] > 0.0 && self.size[1] > 0.0 && self.thickness > 0.0) {
            return Err(Error::InvalidParameter("particle layer dimensions must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.count_jitter) {
            return Err(Error::InvalidParameter("count jitter must lie in [0, 1)".into()));
        }
        let [lo, hi] = self.radius_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::InvalidParameter(format!("bad radius range [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn count_range(&self) -> (usize, usize) {
        let n = self.nominal_count as f64;
        let lo = (n * (1.0 - self.count_jitter)).round() as usize;
        let hi = (n * (1.0 + self.count_jitter)).round() as usize;
        (lo.max(1), hi.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    /// Stable identifier; colours are keyed on it.
    pub id: u32,
    /// Centre in the gel frame (mm).
    pub position: [f64; 3],
    pub radius: f64,
    /// Displacement in the gel frame (mm).
    pub displacement: [f64; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
}

impl ParticleSet {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

pub fn sample_particles(seed: u64, layer: &LayerSpec) -> Result<ParticleSet> {
    layer.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = layer.count_range();
    let count = rng.gen_range(lo..=hi);
    let [r0, r1] = layer.radius_range;
    let particles = (0..count)
        .map(|id| Particle {
            id: id as u32,
            position: [
                rng.gen_range(0.0..layer.size[0]),
                rng.gen_range(0.0..layer.size[1]),
                rng.gen_range(0.0..layer.thickness),
            ],
            radius: if r0 == r1 { r0 } else { rng.gen_range(r0..=r1) },
            displacement: [0.0; 3],
        })
        .collect();
    Ok(ParticleSet { particles })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdwParams {
    pub power: f64,
    pub neighbours: usize,
}

impl Default for IdwParams {
    fn default() -> Self {
        Self {
            power: 2.0,
            neighbours: 8,
        }
    }
}

/// Nodal vector samples with an R-tree for neighbour queries.
pub struct DisplacementField {
    nodes: Vec<[f64; 3]>,
    values: Vec<[f64; 3]>,
    tree: RTree<GeomWithData<[f64; 3], usize>>,
}

/// Below this distance a query is treated as sitting on the node.
const COINCIDENT: f64 = 1e-12;

impl DisplacementField {
    pub fn new(nodes: Vec<[f64; 3]>, values: Vec<[f64; 3]>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("displacement field has no nodes".into()));
        }
        if nodes.len() != values.len() {
            return Err(Error::LengthMismatch(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        let tree = RTree::bulk_load(
            nodes
                .iter()
                .enumerate()
                .map(|(i, &p)| GeomWithData::new(p, i))
                .collect(),
        );
        Ok(Self { nodes, values, tree })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    /// Shepard interpolation over the `k` nearest nodes.
    pub fn interpolate(&self, query: [f64; 3], params: &IdwParams) -> Result<[f64; 3]> {
        if !(params.power > 0.0) || params.neighbours == 0 {
            return Err(Error::InvalidParameter(format!(
                "IDW needs power > 0 and k ≥ 1, got {} and {}",
                params.power, params.neighbours
            )));
        }
        let k = params.neighbours.min(self.nodes.len());
        let mut num = [0.0; 3];
        let mut den = 0.0;
        for (nb, d2) in self.tree.nearest_neighbor_iter_with_distance_2(&query).take(k) {
            let d = d2.sqrt();
            let v = self.values[nb.data];
            if d < COINCIDENT {
                return Ok(v);
            }
            let w = d.powf(-params.power);
            den += w;
            for c in 0..3 {
                num[c] += w * v[c];
            }
        }
        Ok([num[0] / den, num[1] / den, num[2] / den])
    }
}

/// Where particle displacements come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplacementMode {
    /// Green's-function samples on a node mesh, interpolated by IDW.
    #[default]
    Idw,
    /// Green's functions evaluated at each particle.
    Direct,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisplacementConfig {
    pub mode: DisplacementMode,
    pub idw: IdwParams,
    pub mesh: NodeMesh,
}

/// Sample mesh: a coarse lattice over the layer plus a finer lattice around
/// the loaded patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodeMesh {
    pub coarse_spacing: f64,
    pub fine_spacing: f64,
    /// Fine lattice extends this far beyond the loaded cells (mm).
    pub fine_margin: f64,
}

impl Default for NodeMesh {
    fn default() -> Self {
        Self {
            coarse_spacing: 1.5,
            fine_spacing: 0.5,
            fine_margin: 1.5,
        }
    }
}

fn lattice(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    let n = ((hi - lo) / spacing).ceil().max(1.0) as usize;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

impl NodeMesh {
    pub fn validate(&self) -> Result<()> {
        if !(self.coarse_spacing > 0.0 && self.fine_spacing > 0.0 && self.fine_margin >= 0.0) {
            return Err(Error::InvalidParameter("node mesh spacings must be positive".into()));
        }
        Ok(())
    }

    /// Nodes covering the particle layer; refined over `patch`
    /// (`[x0, y0, x1, y1]`) when given.
    pub fn nodes(&self, layer: &LayerSpec, patch: Option<[f64; 4]>) -> Vec<[f64; 3]> {
        let zs = lattice(0.0, layer.thickness, self.coarse_spacing);
        let mut nodes = Vec::new();
        for &z in &zs {
            for &y in &lattice(0.0, layer.size[1], self.coarse_spacing) {
                for &x in &lattice(0.0, layer.size[0], self.coarse_spacing) {
                    nodes.push([x, y, z]);
                }
            }
        }
        if let Some([x0, y0, x1, y1]) = patch {
            let m = self.fine_margin;
            let (x0, x1) = ((x0 - m).max(0.0), (x1 + m).min(layer.size[0]));
            let (y0, y1) = ((y0 - m).max(0.0), (y1 + m).min(layer.size[1]));
            let zs = lattice(0.0, layer.thickness, self.fine_spacing);
            for &z in &zs {
                for &y in &lattice(y0, y1, self.fine_spacing) {
                    for &x in &lattice(x0, x1, self.fine_spacing) {
                        nodes.push([x, y, z]);
                    }
                }
            }
        }
        // The refined lattice may repeat coarse nodes; keep the first copy.
        nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite node coordinates"));
        nodes.dedup_by(|a, b| (0..3).all(|c| (a[c] - b[c]).abs() < 1e-9));
        nodes
    }
}

/// Bounds of the cells carrying traction.
fn loaded_patch(solution: &ContactSolution) -> Option<[f64; 4]> {
    let g = solution.grid;
    let mut bb: Option<[f64; 4]> = None;
    for j in 0..g.n {
        for i in 0..g.n {
            let k = j * g.n + i;
            if solution.pressure[k] != 0.0 || solution.shear[k] != [0.0, 0.0] {
                let [x, y] = g.cell_center(i, j);
                let h = 0.5 * g.cell;
                let b = bb.get_or_insert([x - h, y - h, x + h, y + h]);
                b[0] = b[0].min(x - h);
                b[1] = b[1].min(y - h);
                b[2] = b[2].max(x + h);
                b[3] = b[3].max(y + h);
            }
        }
    }
    bb
}

/// Assigns each particle the displacement of the gel at its centre.
pub fn displace_particles(
    set: &ParticleSet,
    solution: &ContactSolution,
    halfspace: &ElasticHalfSpace,
    layer: &LayerSpec,
    config: &DisplacementConfig,
) -> Result<ParticleSet> {
    let loads = SurfaceLoads::new(solution, halfspace);
    let mut out = set.clone();
    if loads.is_empty() {
        for p in &mut out.particles {
            p.displacement = [0.0; 3];
        }
        return Ok(out);
    }
    match config.mode {
        DisplacementMode::Direct => {
            for p in &mut out.particles {
                p.displacement = loads.displacement(p.position)?;
            }
        }
        DisplacementMode::Idw => {
            config.mesh.validate()?;
            let nodes = config.mesh.nodes(layer, loaded_patch(solution));
            let values = nodes
                .iter()
                .map(|&n| loads.displacement(n))
                .collect::<Result<Vec<_>>>()?;
            let field = DisplacementField::new(nodes, values)?;
            for p in &mut out.particles {
                p.displacement = field.interpolate(p.position, &config.idw)?;
            }
        }
    }
    Ok(out)
}
