use super::{byproduct_angle, strategy1_basis};
use crate::error::Result;
use crate::qmath::{hadamard, kron2, pauli_x, pauli_z, rx_re, rz_re, DMat, Mat2};
use crate::scalar::{c, cr, Real};
use crate::slocc::{classify, n_canon};
use crate::statevec::{extract_map, ForcedMeasurement, LatticeSpec, MeasureMode, MeasurementBasis, PureState, TeleportRun, Topology};

/// Result of severing a vertical link.
#[derive(Clone, Debug)]
pub struct Decoupled<T> {
    pub state: PureState<T>,
    pub outcome: u8,
    pub prob: T,
    /// Sites whose logical frame picked up a Z.
    pub z_on: Vec<usize>,
}

impl<T: Real> Decoupled<T> {
    /// Undoes the Z byproducts, which act before each neighbour's operator.
    pub fn correct(&mut self, spec: &LatticeSpec<T>) -> Result<()> {
        for &s in &self.z_on {
            let op = spec.op(s);
            self.state.apply1(s, &(op * pauli_z() * op.inverse()?));
        }
        self.z_on.clear();
        Ok(())
    }
}

/// Measures the unitary-transformed link site in `{U|0⟩, U|1⟩}`, which
/// removes it from the graph and teleports `Z^m` onto each neighbour.
pub fn nun_decouple<T: Real>(state: &PureState<T>, spec: &LatticeSpec<T>, link: usize, mode: MeasureMode) -> Result<Decoupled<T>> {
    let basis = MeasurementBasis::from_unitary(&spec.op(link));
    let r = state.measure(link, &basis, mode)?;
    let z_on = if r.outcome == 1 { spec.topology.neighbors(link) } else { Vec::new() };
    Ok(Decoupled { state: r.state, outcome: r.outcome, prob: r.prob, z_on })
}

/// Vertical N–U–N link between two wires. On the 5-site chain
/// `outA – N1 – U2 – N3 – outB` the logical inputs enter at N1 and N3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntangleFragment<T> {
    pub n1: Mat2<T>,
    pub u2: Mat2<T>,
    pub n3: Mat2<T>,
    pub outcomes: [u8; 3],
}

impl<T: Real> EntangleFragment<T> {
    pub fn lattice(&self) -> LatticeSpec<T> {
        LatticeSpec::new(Topology::Chain(5)).with_op(1, self.n1).with_op(2, self.u2).with_op(3, self.n3)
    }
}

#[derive(Clone, Debug)]
pub struct EntangleRun<T> {
    /// Extracted map from (N1, N3) inputs to (outA, outB), up to scale.
    pub map: DMat<T>,
    pub predicted: DMat<T>,
    pub distance: T,
}

/// `M = diag(1, i, i, 1)`.
pub fn m13<T: Real>() -> DMat<T> {
    DMat::diag(&[cr(T::one()), c(T::zero(), T::one()), c(T::zero(), T::one()), cr(T::one())])
}

/// `(Rx(μ₁)^{m₁}·X^{m₂}·H) ⊗ (Rx(μ₃)^{m₃}·X^{m₂}·H) · M`.
pub fn entangle_prediction<T: Real>(f: &EntangleFragment<T>) -> Result<DMat<T>> {
    let [m1, m2, m3] = f.outcomes;
    let side = |n: &Mat2<T>, m: u8| -> Result<Mat2<T>> {
        let canon = n_canon(&classify(n)?)?;
        let mut a = hadamard();
        if m2 == 1 {
            a = pauli_x() * a;
        }
        if m == 1 {
            a = rx_re(byproduct_angle(&canon, T::zero())) * a;
        }
        Ok(a)
    };
    Ok(kron2(&side(&f.n1, m1)?, &side(&f.n3, m3)?).matmul(&m13()))
}

/// Two-qubit tomography of the entangling fragment: N1 and N3 in Strategy I
/// bases with ξ = 0, U2 in the rotated Y basis.
pub fn nun_entangle<T: Real>(f: &EntangleFragment<T>) -> Result<EntangleRun<T>> {
    let b1 = strategy1_basis(&n_canon(&classify(&f.n1)?)?, T::zero())?;
    let b3 = strategy1_basis(&n_canon(&classify(&f.n3)?)?, T::zero())?;
    let b2 = MeasurementBasis::y().rotated(&f.u2);
    let run = TeleportRun {
        lattice: f.lattice(),
        input_sites: vec![1, 3],
        output_sites: vec![0, 4],
        measurements: vec![
            ForcedMeasurement { site: 1, basis: b1, outcome: f.outcomes[0] },
            ForcedMeasurement { site: 2, basis: b2, outcome: f.outcomes[1] },
            ForcedMeasurement { site: 3, basis: b3, outcome: f.outcomes[2] },
        ],
    };
    let map = extract_map(&run)?;
    let predicted = entangle_prediction(f)?;
    let distance = map.dist_up_to_scale(&predicted);
    Ok(EntangleRun { map, predicted, distance })
}

/// Distance up to phase between `X⊗X · Rz(π/2)⊗Rz(π/2) · M · X⊗X` and CZ.
pub fn cz_equivalence_residual<T: Real>() -> T {
    let xx = kron2(&pauli_x::<T>(), &pauli_x());
    let rr = kron2(&rz_re(T::FRAC_PI_2()), &rz_re(T::FRAC_PI_2()));
    let lhs = xx.matmul(&rr).matmul(&m13()).matmul(&xx);
    let cz = DMat::diag(&[cr(T::one()), cr(T::one()), cr(T::one()), cr(-T::one())]);
    lhs.dist_up_to_scale(&cz)
}
