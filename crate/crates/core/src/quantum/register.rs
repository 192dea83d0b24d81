use rand::Rng;

use super::state::{
    bb84_qubit, check_qubit_count, hadamard, prepare_bb84, rotated_basis_vector, rotation_to_computational, Gate1,
    Statevector,
};
use super::C64;
use crate::bits::{BB84Key, BitString};
use crate::error::{Error, Result};

/// Keys up to this many qubits are handed out as dense statevectors.
pub const DENSE_KEY_LIMIT: usize = 10;

/// An unentangled register stored qubit by qubit.
///
/// Conjugate coding keys are product states and every shipped attack measures
/// qubit-locally, so this form gives exactly the same outcome distribution as the
/// dense vector at `O(n)` cost per measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    qubits: Vec<[C64; 2]>,
}

impl ProductState {
    pub fn new(qubits: Vec<[C64; 2]>) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::InvalidSize("a register needs at least one qubit".into()));
        }
        for (i, q) in qubits.iter().enumerate() {
            let norm = q[0].norm_sqr() + q[1].norm_sqr();
            if (norm - 1.0).abs() > super::NORM_TOL {
                return Err(Error::InvalidArgument(format!("qubit {i} has squared norm {norm}")));
            }
        }
        Ok(Self { qubits })
    }

    pub fn from_bb84(key: &BB84Key) -> Result<Self> {
        Self::new(key.x().iter().zip(key.theta().iter()).map(|(x, t)| bb84_qubit(x, t)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[[C64; 2]] {
        &self.qubits
    }

    pub fn apply_hadamard_all(&self) -> ProductState {
        let h = hadamard();
        Self { qubits: self.qubits.iter().map(|q| apply(&h, q)).collect() }
    }

    pub fn measure_computational<R: Rng + ?Sized>(&self, rng: &mut R) -> (BitString, ProductState) {
        let angles = vec![0.0; self.qubits.len()];
        self.measure_in_rotated_basis(&angles, rng).expect("angle count matches")
    }

    pub fn measure_in_rotated_basis<R: Rng + ?Sized>(
        &self,
        angles: &[f64],
        rng: &mut R,
    ) -> Result<(BitString, ProductState)> {
        if angles.len() != self.qubits.len() {
            return Err(Error::InvalidArgument(format!("{} angles for {} qubits", angles.len(), self.qubits.len())));
        }
        let mut bits = Vec::with_capacity(angles.len());
        let mut post = Vec::with_capacity(angles.len());
        for (q, &a) in self.qubits.iter().zip(angles) {
            let rotated = apply(&rotation_to_computational(a), q);
            let p0 = rotated[0].norm_sqr();
            let p1 = rotated[1].norm_sqr();
            let bit = rng.random::<f64>() * (p0 + p1) >= p0;
            bits.push(bit);
            post.push(rotated_basis_vector(a, bit));
        }
        Ok((BitString::new(bits), Self { qubits: post }))
    }

    pub fn to_statevector(&self) -> Result<Statevector> {
        check_qubit_count(self.qubits.len())?;
        Statevector::product(&self.qubits)
    }
}

fn apply(gate: &Gate1, q: &[C64; 2]) -> [C64; 2] {
    [gate[0][0] * q[0] + gate[0][1] * q[1], gate[1][0] * q[0] + gate[1][1] * q[1]]
}

/// The quantum key register handed to a receiver.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumKey {
    Dense(Statevector),
    Product(ProductState),
}

impl QuantumKey {
    /// Prepare `|x⟩_θ`, dense for keys of at most [`DENSE_KEY_LIMIT`] qubits.
    pub fn prepare(key: &BB84Key) -> Result<Self> {
        if key.len() <= DENSE_KEY_LIMIT {
            Self::prepare_dense(key)
        } else {
            Self::prepare_product(key)
        }
    }

    pub fn prepare_dense(key: &BB84Key) -> Result<Self> {
        prepare_bb84(key).map(QuantumKey::Dense)
    }

    pub fn prepare_product(key: &BB84Key) -> Result<Self> {
        ProductState::from_bb84(key).map(QuantumKey::Product)
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            QuantumKey::Dense(s) => s.num_qubits(),
            QuantumKey::Product(p) => p.num_qubits(),
        }
    }

    pub fn apply_hadamard_all(&self) -> QuantumKey {
        match self {
            QuantumKey::Dense(s) => QuantumKey::Dense(s.apply_hadamard_all()),
            QuantumKey::Product(p) => QuantumKey::Product(p.apply_hadamard_all()),
        }
    }

    pub fn measure_computational<R: Rng + ?Sized>(&self, rng: &mut R) -> (BitString, QuantumKey) {
        match self {
            QuantumKey::Dense(s) => {
                let (y, post) = s.measure_computational(rng);
                (y, QuantumKey::Dense(post))
            }
            QuantumKey::Product(p) => {
                let (y, post) = p.measure_computational(rng);
                (y, QuantumKey::Product(post))
            }
        }
    }

    pub fn measure_in_rotated_basis<R: Rng + ?Sized>(
        &self,
        angles: &[f64],
        rng: &mut R,
    ) -> Result<(BitString, QuantumKey)> {
        Ok(match self {
            QuantumKey::Dense(s) => {
                let (y, post) = s.measure_in_rotated_basis(angles, rng)?;
                (y, QuantumKey::Dense(post))
            }
            QuantumKey::Product(p) => {
                let (y, post) = p.measure_in_rotated_basis(angles, rng)?;
                (y, QuantumKey::Product(post))
            }
        })
    }

    pub fn to_statevector(&self) -> Result<Statevector> {
        match self {
            QuantumKey::Dense(s) => Ok(s.clone()),
            QuantumKey::Product(p) => p.to_statevector(),
        }
    }
}
