//! Dense statevector simulator used as the brute-force oracle.
//!
//! Sites are numbered from 0; site 0 is the most significant bit of the
//! amplitude index. All index arithmetic goes through [`PureState::mask`].

use crate::error::{Error, Result};
use crate::qmath::{hadamard, ket0, ket1, ket_plus, DMat, Mat2, Pauli};
use crate::scalar::{c, cis, cr, Real, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

/// Default amplitude budget (2²² amplitudes).
pub const DEFAULT_BUDGET: usize = 1 << 22;

/// Probability below which a forced branch is rejected.
pub const ZERO_BRANCH: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    n: usize,
    amps: Vec<C<T>>,
    measured: Vec<bool>,
}

impl<T: Real> PureState<T> {
    pub fn basis(n: usize, index: usize, budget: usize) -> Result<Self> {
        check_budget(n, budget)?;
        let mut amps = vec![cr(T::zero()); 1 << n];
        amps[index] = cr(T::one());
        Ok(Self { n, amps, measured: vec![false; n] })
    }

    /// Tensor product of single-qubit vectors, site 0 first.
    pub fn product(vectors: &[[C<T>; 2]], budget: usize) -> Result<Self> {
        let n = vectors.len();
        check_budget(n, budget)?;
        let mut amps = vec![cr(T::one())];
        for v in vectors {
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(*a * v[0]);
                next.push(*a * v[1]);
            }
            amps = next;
        }
        Ok(Self { n, amps, measured: vec![false; n] })
    }

    pub fn from_amps(n: usize, amps: Vec<C<T>>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::InvalidArgument(format!("expected {} amplitudes, got {}", 1usize << n, amps.len())));
        }
        Ok(Self { n, amps, measured: vec![false; n] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn is_measured(&self, site: usize) -> bool {
        self.measured[site]
    }

    /// Bit mask of `site` in the amplitude index.
    #[inline]
    pub fn mask(&self, site: usize) -> usize {
        1 << (self.n - 1 - site)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n {
            Err(Error::SiteOutOfRange { site, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > T::zero() {
            let inv = cr(T::one() / n);
            self.amps.iter_mut().for_each(|z| *z = *z * inv);
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn apply1(&mut self, site: usize, op: &Mat2<T>) {
        let mask = self.mask(site);
        let m = &op.m;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a, b) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | mask] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    /// Multiplies amplitudes with both sites set by `phase`.
    pub fn apply_controlled_phase(&mut self, a: usize, b: usize, phase: C<T>) {
        let mask = self.mask(a) | self.mask(b);
        for (i, z) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *z = *z * phase;
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        self.apply_controlled_phase(a, b, cr(-T::one()));
    }

    pub fn apply_cp(&mut self, a: usize, b: usize, phi: T) {
        self.apply_controlled_phase(a, b, cis(phi));
    }

    /// Applies a 4×4 operator to `(a, b)` with `a` the more significant factor.
    pub fn apply2(&mut self, a: usize, b: usize, op: &DMat<T>) {
        let (ma, mb) = (self.mask(a), self.mask(b));
        for i in 0..self.amps.len() {
            if i & ma == 0 && i & mb == 0 {
                let idx = [i, i | mb, i | ma, i | ma | mb];
                let v: Vec<C<T>> = idx.iter().map(|&k| self.amps[k]).collect();
                for (r, &k) in idx.iter().enumerate() {
                    self.amps[k] = (0..4).fold(cr(T::zero()), |s, col| s + op.get(r, col) * v[col]);
                }
            }
        }
    }

    /// Contracts `⟨v|` on `site`, removing that qubit. Not renormalised.
    pub fn project_out(&self, site: usize, v: &[C<T>; 2]) -> Result<Self> {
        self.check_site(site)?;
        let mask = self.mask(site);
        let low = mask - 1;
        let (v0, v1) = (v[0].conj(), v[1].conj());
        let half = self.amps.len() / 2;
        let mut amps = Vec::with_capacity(half);
        for j in 0..half {
            let i0 = ((j & !low) << 1) | (j & low);
            amps.push(v0 * self.amps[i0] + v1 * self.amps[i0 | mask]);
        }
        let mut measured = self.measured.clone();
        measured.remove(site);
        Ok(Self { n: self.n - 1, amps, measured })
    }

    /// Born probability of outcome 0 and 1 in `basis`.
    pub fn outcome_probs(&self, site: usize, basis: &MeasurementBasis<T>) -> Result<(T, T)> {
        self.check_site(site)?;
        let mask = self.mask(site);
        let (mut p0, mut p1) = (T::zero(), T::zero());
        let (b0, b1) = (basis.m, basis.m_perp);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a, b) = (self.amps[i], self.amps[i | mask]);
                p0 = p0 + (b0[0].conj() * a + b0[1].conj() * b).norm_sqr();
                p1 = p1 + (b1[0].conj() * a + b1[1].conj() * b).norm_sqr();
            }
        }
        let tot = p0 + p1;
        Ok((p0 / tot, p1 / tot))
    }

    /// Projective measurement; the qubit stays in the register collapsed
    /// onto the observed basis vector.
    pub fn measure(&self, site: usize, basis: &MeasurementBasis<T>, mode: MeasureMode) -> Result<Measured<T>> {
        match mode {
            MeasureMode::Force(o) => self.measure_forced(site, basis, o),
            MeasureMode::Sample(seed) => self.measure_with_rng(site, basis, &mut ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    pub fn measure_with_rng<R: Rng + ?Sized>(&self, site: usize, basis: &MeasurementBasis<T>, rng: &mut R) -> Result<Measured<T>> {
        let (p0, _) = self.outcome_probs(site, basis)?;
        let u: f64 = rng.random();
        let o = if u < p0.f64() { 0 } else { 1 };
        self.measure_forced(site, basis, o)
    }

    pub fn measure_forced(&self, site: usize, basis: &MeasurementBasis<T>, outcome: u8) -> Result<Measured<T>> {
        self.check_site(site)?;
        if self.measured[site] {
            return Err(Error::AlreadyMeasured(site));
        }
        let (p0, p1) = self.outcome_probs(site, basis)?;
        let prob = if outcome == 0 { p0 } else { p1 };
        if prob.f64() < ZERO_BRANCH {
            return Err(Error::ZeroProbabilityBranch { site, outcome, prob: prob.f64() });
        }
        let v = if outcome == 0 { basis.m } else { basis.m_perp };
        let mask = self.mask(site);
        let mut amps = self.amps.clone();
        for i in 0..amps.len() {
            if i & mask == 0 {
                let w = v[0].conj() * self.amps[i] + v[1].conj() * self.amps[i | mask];
                amps[i] = v[0] * w;
                amps[i | mask] = v[1] * w;
            }
        }
        let mut measured = self.measured.clone();
        measured[site] = true;
        let state = Self { n: self.n, amps, measured }.normalized();
        Ok(Measured { outcome, prob, state })
    }

    /// `⟨ψ|P_1 ⊗ … |ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn expect(&self, ops: &[(usize, Pauli)]) -> C<T> {
        let mut phi = self.clone();
        for &(s, p) in ops {
            phi.apply1(s, &p.matrix());
        }
        let ip = self.amps.iter().zip(&phi.amps).fold(cr(T::zero()), |acc, (a, b)| acc + a.conj() * *b);
        ip / cr(self.norm_sqr())
    }

    /// Qubit vector of a one-qubit register.
    pub fn qubit(&self) -> Option<[C<T>; 2]> {
        (self.n == 1).then(|| [self.amps[0], self.amps[1]])
    }

    /// Normalised vector of `site` when the state factorises across it,
    /// read off the largest-weight slice.
    pub fn factor_qubit(&self, site: usize) -> [C<T>; 2] {
        let mask = self.mask(site);
        let best = (0..self.amps.len())
            .filter(|i| i & mask == 0)
            .max_by(|&a, &b| {
                let wa = self.amps[a].norm_sqr() + self.amps[a | mask].norm_sqr();
                let wb = self.amps[b].norm_sqr() + self.amps[b | mask].norm_sqr();
                wa.partial_cmp(&wb).expect("finite amplitudes")
            })
            .expect("nonempty register");
        let v = [self.amps[best], self.amps[best | mask]];
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0] / cr(n), v[1] / cr(n)]
    }

    /// Little-endian dump: magic `SMQS`, u32 qubit count, then (re, im) f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"SMQS")?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        for z in &self.amps {
            w.write_all(&z.re.f64().to_le_bytes())?;
            w.write_all(&z.im.f64().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,re,im")?;
        for (i, z) in self.amps.iter().enumerate() {
            writeln!(w, "{},{:e},{:e}", i, z.re.f64(), z.im.f64())?;
        }
        Ok(())
    }
}

fn check_budget(n: usize, budget: usize) -> Result<()> {
    if n >= usize::BITS as usize - 1 || (1usize << n) > budget {
        Err(Error::TooManyQubits { qubits: n, budget })
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureMode {
    Sample(u64),
    Force(u8),
}

#[derive(Clone, Debug)]
pub struct Measured<T> {
    pub outcome: u8,
    pub prob: T,
    pub state: PureState<T>,
}

/// An orthonormal measurement basis `{|m⟩, |m⊥⟩}`; outcome 0 is `|m⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct MeasurementBasis<T> {
    pub m: [C<T>; 2],
    pub m_perp: [C<T>; 2],
    pub params: Option<(T, T)>,
}

impl<T: Real> MeasurementBasis<T> {
    /// `|m⟩ = cos(ξ/2)|+⟩ + e^{iφ} sin(ξ/2)|−⟩`,
    /// `|m⊥⟩ = sin(ξ/2)|+⟩ − e^{iφ} cos(ξ/2)|−⟩`.
    pub fn bloch(xi: T, phi: T) -> Self {
        let h = T::FRAC_1_SQRT_2();
        let (cx, sx) = ((xi / T::lit(2.0)).cos(), (xi / T::lit(2.0)).sin());
        let e = cis(phi);
        let m = [(cr(cx) + e * cr(sx)) * cr(h), (cr(cx) - e * cr(sx)) * cr(h)];
        let m_perp = [(cr(sx) - e * cr(cx)) * cr(h), (cr(sx) + e * cr(cx)) * cr(h)];
        Self { m, m_perp, params: Some((xi, phi)) }
    }

    /// Equatorial basis whose outcome 0 teleports `H·Rz(ξ)` on a cluster.
    pub fn xy(xi: T) -> Self {
        Self::bloch(xi, T::FRAC_PI_2())
    }

    pub fn z() -> Self {
        Self { m: ket0(), m_perp: ket1(), params: None }
    }

    pub fn x() -> Self {
        Self::from_unitary(&hadamard())
    }

    /// `{(|0⟩ + i|1⟩)/√2, (|0⟩ − i|1⟩)/√2}`.
    pub fn y() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self { m: [cr(h), c(T::zero(), h)], m_perp: [cr(h), c(T::zero(), -h)], params: None }
    }

    /// `{U|0⟩, U|1⟩}`.
    pub fn from_unitary(u: &Mat2<T>) -> Self {
        Self { m: u.col(0), m_perp: u.col(1), params: None }
    }

    /// The basis rotated by `u`: `{u|m⟩, u|m⊥⟩}`.
    pub fn rotated(&self, u: &Mat2<T>) -> Self {
        Self { m: u.apply(self.m), m_perp: u.apply(self.m_perp), params: self.params }
    }

    /// Normalises both vectors and checks orthogonality against `tol`.
    pub fn from_vectors(a: [C<T>; 2], b: [C<T>; 2], tol: T) -> Result<Self> {
        let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
        let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
        if na == T::zero() || nb == T::zero() {
            return Err(Error::InvalidArgument("zero basis vector".into()));
        }
        let m = [a[0] / cr(na), a[1] / cr(na)];
        let m_perp = [b[0] / cr(nb), b[1] / cr(nb)];
        let ov = (m[0].conj() * m_perp[0] + m[1].conj() * m_perp[1]).norm();
        if ov > tol {
            return Err(Error::InvalidArgument(format!("basis overlap {:e}", ov.f64())));
        }
        Ok(Self { m, m_perp, params: None })
    }

    pub fn vector(&self, outcome: u8) -> [C<T>; 2] {
        if outcome == 0 {
            self.m
        } else {
            self.m_perp
        }
    }

    pub fn overlap(&self) -> T {
        (self.m[0].conj() * self.m_perp[0] + self.m[1].conj() * self.m_perp[1]).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Chain(usize),
    Ring(usize),
    Grid { rows: usize, cols: usize },
    Cubic { lx: usize, ly: usize, lz: usize },
}

impl Topology {
    pub fn n_sites(&self) -> usize {
        match *self {
            Topology::Chain(n) | Topology::Ring(n) => n,
            Topology::Grid { rows, cols } => rows * cols,
            Topology::Cubic { lx, ly, lz } => lx * ly * lz,
        }
    }

    /// Nearest-neighbour pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        match *self {
            Topology::Chain(n) => e.extend((1..n).map(|i| (i - 1, i))),
            Topology::Ring(n) => {
                e.extend((1..n).map(|i| (i - 1, i)));
                if n >= 3 {
                    e.push((0, n - 1));
                }
            }
            Topology::Grid { rows, cols } => {
                for r in 0..rows {
                    for cc in 0..cols {
                        let i = r * cols + cc;
                        if cc + 1 < cols {
                            e.push((i, i + 1));
                        }
                        if r + 1 < rows {
                            e.push((i, i + cols));
                        }
                    }
                }
            }
            Topology::Cubic { lx, ly, lz } => {
                let idx = |x: usize, y: usize, z: usize| (x * ly + y) * lz + z;
                for x in 0..lx {
                    for y in 0..ly {
                        for z in 0..lz {
                            if x + 1 < lx {
                                e.push((idx(x, y, z), idx(x + 1, y, z)));
                            }
                            if y + 1 < ly {
                                e.push((idx(x, y, z), idx(x, y + 1, z)));
                            }
                            if z + 1 < lz {
                                e.push((idx(x, y, z), idx(x, y, z + 1)));
                            }
                        }
                    }
                }
            }
        }
        e
    }

    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .edges()
            .into_iter()
            .filter_map(|(a, b)| {
                if a == site {
                    Some(b)
                } else if b == site {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        v.sort_unstable();
        v
    }
}

/// A graph plus per-site local operators (identity where absent).
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec<T> {
    pub topology: Topology,
    pub site_ops: BTreeMap<usize, Mat2<T>>,
}

impl<T: Real> LatticeSpec<T> {
    pub fn new(topology: Topology) -> Self {
        Self { topology, site_ops: BTreeMap::new() }
    }

    pub fn with_op(mut self, site: usize, op: Mat2<T>) -> Self {
        self.site_ops.insert(site, op);
        self
    }

    pub fn n_sites(&self) -> usize {
        self.topology.n_sites()
    }

    pub fn op(&self, site: usize) -> Mat2<T> {
        self.site_ops.get(&site).copied().unwrap_or_else(Mat2::identity)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        for (&s, op) in &self.site_ops {
            if s >= n {
                return Err(Error::SiteOutOfRange { site: s, n });
            }
            if !op.is_invertible(T::lit(1e-12).max(T::epsilon())) {
                return Err(Error::SingularInput);
            }
        }
        for (a, b) in self.topology.edges() {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at {a}")));
            }
        }
        Ok(())
    }
}

/// `∏ CZ · (|ψ⟩ on input sites, |+⟩ elsewhere)` followed by the site
/// operators, without renormalisation, so the result is linear in the inputs.
pub fn build_cluster_raw<T: Real>(spec: &LatticeSpec<T>, inputs: &[(usize, [C<T>; 2])], budget: usize) -> Result<PureState<T>> {
    spec.validate()?;
    let n = spec.n_sites();
    let mut vecs = vec![ket_plus::<T>(); n];
    for &(s, v) in inputs {
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, n });
        }
        vecs[s] = v;
    }
    let mut st = PureState::product(&vecs, budget)?;
    for (a, b) in spec.topology.edges() {
        st.apply_cz(a, b);
    }
    for (&s, op) in &spec.site_ops {
        st.apply1(s, op);
    }
    Ok(st)
}

/// Normalised cluster state with optional input on one site.
pub fn build_cluster<T: Real>(spec: &LatticeSpec<T>, input: Option<(usize, [C<T>; 2])>, budget: usize) -> Result<PureState<T>> {
    let inputs: Vec<_> = input.into_iter().collect();
    Ok(build_cluster_raw(spec, &inputs, budget)?.normalized())
}

/// A single measurement in a teleportation run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForcedMeasurement<T> {
    pub site: usize,
    pub basis: MeasurementBasis<T>,
    pub outcome: u8,
}

/// Descriptor for tomographic extraction of a teleported map.
#[derive(Clone, Debug)]
pub struct TeleportRun<T> {
    pub lattice: LatticeSpec<T>,
    pub input_sites: Vec<usize>,
    pub output_sites: Vec<usize>,
    pub measurements: Vec<ForcedMeasurement<T>>,
}

impl<T: Real> TeleportRun<T> {
    pub fn single(lattice: LatticeSpec<T>, input: usize, output: usize, measurements: Vec<ForcedMeasurement<T>>) -> Self {
        Self { lattice, input_sites: vec![input], output_sites: vec![output], measurements }
    }
}

/// Effective linear map from the logical inputs to the output sites,
/// assembled column by column from the computational-basis inputs. The
/// overall scale carries no meaning.
pub fn extract_map<T: Real>(run: &TeleportRun<T>) -> Result<DMat<T>> {
    let n = run.lattice.n_sites();
    let mut covered = vec![false; n];
    for m in &run.measurements {
        if m.site >= n {
            return Err(Error::SiteOutOfRange { site: m.site, n });
        }
        covered[m.site] = true;
    }
    for &o in &run.output_sites {
        if covered[o] {
            return Err(Error::InvalidArgument(format!("output site {o} is measured")));
        }
        covered[o] = true;
    }
    if covered.iter().any(|c| !c) {
        return Err(Error::InvalidArgument("every non-output site must be measured".into()));
    }
    let k_in = run.input_sites.len();
    let k_out = run.output_sites.len();
    let mut sorted = run.measurements.clone();
    sorted.sort_by_key(|m| std::cmp::Reverse(m.site));
    let mut map = DMat::zeros(1 << k_out, 1 << k_in);
    for col in 0..1usize << k_in {
        let inputs: Vec<(usize, [C<T>; 2])> =
            run.input_sites.iter().enumerate().map(|(j, &s)| (s, if (col >> (k_in - 1 - j)) & 1 == 0 { ket0() } else { ket1() })).collect();
        let mut st = build_cluster_raw(&run.lattice, &inputs, DEFAULT_BUDGET)?;
        for m in &sorted {
            st = st.project_out(m.site, &m.basis.vector(m.outcome))?;
        }
        // remaining qubits are the outputs in ascending site order
        let mut order: Vec<usize> = run.output_sites.clone();
        order.sort_unstable();
        for row in 0..1usize << k_out {
            let mut idx = 0usize;
            for (j, &s) in run.output_sites.iter().enumerate() {
                let bit = (row >> (k_out - 1 - j)) & 1;
                let pos = order.iter().position(|&x| x == s).expect("output present");
                idx |= bit << (k_out - 1 - pos);
            }
            map.set(row, col, st.amps()[idx]);
        }
    }
    let total: T = map.data.iter().map(|z| z.norm_sqr()).sum();
    if total.f64() < ZERO_BRANCH {
        let last = run.measurements.last().map(|m| (m.site, m.outcome)).unwrap_or((0, 0));
        return Err(Error::ZeroProbabilityBranch { site: last.0, outcome: last.1, prob: total.f64() });
    }
    Ok(map)
}

/// Single-qubit teleported operator, up to complex scale.
pub fn extract_teleported<T: Real>(run: &TeleportRun<T>) -> Result<Mat2<T>> {
    if run.input_sites.len() != 1 || run.output_sites.len() != 1 {
        return Err(Error::InvalidArgument("single input and output site required".into()));
    }
    Ok(extract_map(run)?.to_mat2().expect("2x2 map"))
}

/// Reduced density matrix of `subset`, first listed site most significant.
pub fn reduced_density<T: Real>(state: &PureState<T>, subset: &[usize]) -> DMat<T> {
    let n = state.n();
    let k = subset.len();
    let rest: Vec<usize> = (0..n).filter(|s| !subset.contains(s)).collect();
    let dim = 1usize << k;
    let mut rho = DMat::zeros(dim, dim);
    let sub_index = |i: usize, sites: &[usize]| -> usize { sites.iter().fold(0usize, |acc, &s| (acc << 1) | ((i >> (n - 1 - s)) & 1)) };
    let mut blocks: Vec<Vec<(usize, C<T>)>> = vec![Vec::new(); 1 << rest.len()];
    for (i, z) in state.amps().iter().enumerate() {
        blocks[sub_index(i, &rest)].push((sub_index(i, subset), *z));
    }
    for b in &blocks {
        for &(r, x) in b {
            for &(cc, y) in b {
                rho.set(r, cc, rho.get(r, cc) + x * y.conj());
            }
        }
    }
    let tr = rho.trace().re;
    rho.scale(cr(T::one() / tr))
}

/// Schmidt coefficients of the bipartition `left | rest`, descending.
pub fn schmidt_spectrum<T: Real>(state: &PureState<T>, left: &[usize]) -> Vec<T> {
    let n = state.n();
    let rest: Vec<usize> = (0..n).filter(|s| !left.contains(s)).collect();
    let sub_index = |i: usize, sites: &[usize]| -> usize { sites.iter().fold(0usize, |acc, &s| (acc << 1) | ((i >> (n - 1 - s)) & 1)) };
    let mut m = DMat::zeros(1 << left.len(), 1 << rest.len());
    let norm = state.norm_sqr().sqrt();
    for (i, z) in state.amps().iter().enumerate() {
        m.set(sub_index(i, left), sub_index(i, &rest), *z / cr(norm));
    }
    m.singular_values()
}

/// Connected correlator `⟨A_a B_b⟩ − ⟨A_a⟩⟨B_b⟩`.
pub fn two_point<T: Real>(state: &PureState<T>, a: usize, op_a: Pauli, b: usize, op_b: Pauli) -> T {
    let ab = state.expect(&[(a, op_a), (b, op_b)]);
    let ea = state.expect(&[(a, op_a)]);
    let eb = state.expect(&[(b, op_b)]);
    (ab - ea * eb).re
}

/// `∏ CP(φ_ij) |+⟩^{⊗n}`.
pub fn weighted_graph_state<T: Real>(n: usize, weights: &[(usize, usize, T)]) -> Result<PureState<T>> {
    let mut st = PureState::product(&vec![ket_plus::<T>(); n], DEFAULT_BUDGET)?;
    for &(a, b, phi) in weights {
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidArgument(format!("bad edge ({a}, {b})")));
        }
        st.apply_cp(a, b, phi);
    }
    Ok(st)
}

/// Weighted chain with edge weights `φ_{i,i+1}`.
pub fn weighted_chain<T: Real>(phis: &[T]) -> Result<PureState<T>> {
    let w: Vec<_> = phis.iter().enumerate().map(|(i, &p)| (i, i + 1, p)).collect();
    weighted_graph_state(phis.len() + 1, &w)
}

/// `|⟨a|b⟩|²` after normalisation.
pub fn fidelity<T: Real>(a: &PureState<T>, b: &PureState<T>) -> T {
    assert_eq!(a.n(), b.n(), "qubit counts differ");
    let ip = a.amps().iter().zip(b.amps()).fold(cr(T::zero()), |s, (x, y)| s + x.conj() * *y);
    ip.norm_sqr() / (a.norm_sqr() * b.norm_sqr())
}

/// Fidelity between two single-qubit vectors.
pub fn vec_fidelity<T: Real>(a: &[C<T>; 2], b: &[C<T>; 2]) -> T {
    let ip = a[0].conj() * b[0] + a[1].conj() * b[1];
    ip.norm_sqr() / ((a[0].norm_sqr() + a[1].norm_sqr()) * (b[0].norm_sqr() + b[1].norm_sqr()))
}

/// Largest deviation of `⟨X_i ∏_{j∈N(i)} Z_j⟩` from 1 over all sites.
pub fn stabilizer_residual<T: Real>(state: &PureState<T>, topology: &Topology) -> T {
    (0..topology.n_sites())
        .map(|i| {
            let mut ops = vec![(i, Pauli::X)];
            ops.extend(topology.neighbors(i).into_iter().map(|j| (j, Pauli::Z)));
            (state.expect(&ops) - cr(T::one())).norm()
        })
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{ket_minus, pauli_x};

    fn chain(n: usize) -> LatticeSpec<f64> {
        LatticeSpec::new(Topology::Chain(n))
    }

    #[test]
    fn two_site_chain() {
        let st = build_cluster(&chain(2), None, DEFAULT_BUDGET).unwrap();
        let p = ket_plus::<f64>();
        let m = ket_minus::<f64>();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want: Vec<C<f64>> = (0..4)
            .map(|i| {
                let (a, b) = (i >> 1, i & 1);
                let second = if a == 0 { p[b] } else { m[b] };
                cr(h) * second
            })
            .collect();
        for (x, y) in st.amps().iter().zip(&want) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn measure_plus_in_x() {
        let st = PureState::product(&[ket_plus::<f64>()], DEFAULT_BUDGET).unwrap();
        let r = st.measure(0, &MeasurementBasis::x(), MeasureMode::Sample(3)).unwrap();
        assert_eq!(r.outcome, 0);
        assert!((r.prob - 1.0).abs() < 1e-15);
        let e = st.measure(0, &MeasurementBasis::x(), MeasureMode::Force(1)).unwrap_err();
        assert!(matches!(e, Error::ZeroProbabilityBranch { .. }));
    }

    #[test]
    fn measured_site_is_rejected() {
        let st = PureState::product(&[ket_plus::<f64>(); 2], DEFAULT_BUDGET).unwrap();
        let r = st.measure(0, &MeasurementBasis::z(), MeasureMode::Force(0)).unwrap();
        let e = r.state.measure(0, &MeasurementBasis::z(), MeasureMode::Force(0)).unwrap_err();
        assert_eq!(e, Error::AlreadyMeasured(0));
    }

    #[test]
    fn budget_enforced() {
        let e = PureState::<f64>::basis(23, 0, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(e, Error::TooManyQubits { .. }));
    }

    #[test]
    fn basis_constructors_orthonormal() {
        for b in [MeasurementBasis::<f64>::bloch(0.3, 1.2), MeasurementBasis::xy(2.0), MeasurementBasis::y(), MeasurementBasis::x()] {
            assert!(b.overlap() < 1e-15);
        }
    }

    #[test]
    fn product_state_has_trivial_schmidt() {
        let st = PureState::product(&[ket_plus::<f64>(), ket0()], DEFAULT_BUDGET).unwrap();
        let s = schmidt_spectrum(&st, &[0]);
        assert!((s[0] - 1.0).abs() < 1e-14 && s[1].abs() < 1e-14);
    }

    #[test]
    fn fidelity_trivia() {
        let a = PureState::<f64>::basis(2, 1, DEFAULT_BUDGET).unwrap();
        let b = PureState::<f64>::basis(2, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(fidelity(&a, &a), 1.0);
        assert_eq!(fidelity(&a, &b), 0.0);
        let mut p = a.clone();
        p.apply1(0, &Mat2::identity().scale(cis(0.7)));
        assert!((fidelity(&a, &p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply2_matches_kron() {
        let mut a = build_cluster(&chain(3), None, DEFAULT_BUDGET).unwrap();
        let mut b = a.clone();
        let x = pauli_x::<f64>();
        let h = hadamard::<f64>();
        a.apply2(0, 2, &crate::qmath::kron2(&x, &h));
        b.apply1(0, &x);
        b.apply1(2, &h);
        assert!((fidelity(&a, &b) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn binary_dump_layout() {
        let st = PureState::<f64>::basis(1, 1, DEFAULT_BUDGET).unwrap();
        let mut buf = Vec::new();
        st.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"SMQS");
        assert_eq!(buf.len(), 8 + 2 * 16);
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), 1.0);
    }
}
