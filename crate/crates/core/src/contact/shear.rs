use super::halfspace::ElasticHalfSpace;
use super::solver::ContactSolution;

impl ContactSolution {
    /// Assigns tangential tractions for a lateral offset of the indenter
    /// from its first-contact pose.
    ///
    /// Each loaded cell sticks with traction `k_t·|offset|` along the offset
    /// unless that exceeds the Coulomb bound `μ·p`, in which case it slips at
    /// the bound. Normal tractions are left untouched and no slip history is
    /// carried between steps.
    pub fn apply_shear(&self, lateral_offset: [f64; 2], halfspace: &ElasticHalfSpace) -> Self {
        let magnitude = lateral_offset[0].hypot(lateral_offset[1]);
        if magnitude == 0.0 {
            return self.clone();
        }
        let dir = [lateral_offset[0] / magnitude, lateral_offset[1] / magnitude];
        let stick = halfspace.tangential_stiffness() * magnitude;
        let mu = halfspace.friction_mu;

        let mut out = self.clone();
        for (s, &p) in out.shear.iter_mut().zip(&self.pressure) {
            let t = if p > 0.0 { stick.min(mu * p) } else { 0.0 };
            *s = [t * dir[0], t * dir[1]];
        }
        out.rebuild_nodal_forces();
        out
    }

    /// Fraction of loaded cells sitting on the Coulomb bound.
    pub fn slip_fraction(&self, halfspace: &ElasticHalfSpace) -> f64 {
        let mu = halfspace.friction_mu;
        let (mut loaded, mut slipping) = (0usize, 0usize);
        for (s, &p) in self.shear.iter().zip(&self.pressure) {
            if p > 0.0 {
                loaded += 1;
                if s[0].hypot(s[1]) >= mu * p * (1.0 - 1e-12) {
                    slipping += 1;
                }
            }
        }
        if loaded == 0 {
            0.0
        } else {
            slipping as f64 / loaded as f64
        }
    }
}
