//! Random linear network coding over GF(2^8).
//!
//! A generation of `i` source packets is combined with uniformly random
//! coefficients; any `i` linearly independent coded packets recover the
//! sources by Gaussian elimination. One decoded degree of freedom is one
//! independent combination.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// GF(2^8) element over the AES polynomial x^8 + x^4 + x^3 + x + 1 (0x11b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Gf256(pub u8);

// exp/log tables for generator 3 of the 0x11b field, built at compile time.
const GF_TABLES: ([u8; 512], [u8; 256]) = {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        // multiply by the generator 3 = x + 1
        x = (x << 1) ^ x;
        if x & 0x100 != 0 {
            x ^= 0x11b;
        }
        i += 1;
    }
    // duplicate so exp[log a + log b] never needs a mod 255
    let mut j = 0;
    while j < 255 {
        exp[255 + j] = exp[j];
        j += 1;
    }
    (exp, log)
};

impl Gf256 {
    pub const ZERO: Gf256 = Gf256(0);
    pub const ONE: Gf256 = Gf256(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Multiplicative inverse; `inv(0)` is undefined and caught in debug.
    pub fn inv(self) -> Gf256 {
        debug_assert!(self.0 != 0, "inverse of zero");
        let (exp, log) = (&GF_TABLES.0, &GF_TABLES.1);
        Gf256(exp[255 - log[self.0 as usize] as usize])
    }
}

impl std::ops::Add for Gf256 {
    type Output = Gf256;

    // addition in GF(2^8) is xor
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf256) -> Gf256 {
        Gf256(self.0 ^ rhs.0)
    }
}

impl std::ops::Sub for Gf256 {
    type Output = Gf256;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Gf256) -> Gf256 {
        self + rhs
    }
}

impl std::ops::Mul for Gf256 {
    type Output = Gf256;

    fn mul(self, rhs: Gf256) -> Gf256 {
        if self.0 == 0 || rhs.0 == 0 {
            return Gf256(0);
        }
        let (exp, log) = (&GF_TABLES.0, &GF_TABLES.1);
        Gf256(exp[log[self.0 as usize] as usize + log[rhs.0 as usize] as usize])
    }
}

/// The set of source packets coded together. All payloads share one length.
#[derive(Debug, Clone)]
pub struct Generation {
    packets: Vec<Vec<u8>>,
}

impl Generation {
    pub fn new(packets: Vec<Vec<u8>>) -> Result<Self> {
        if packets.is_empty() {
            return Err(Error::InvalidParameter("empty generation".into()));
        }
        let len = packets[0].len();
        if len == 0 {
            return Err(Error::InvalidParameter("zero-length payload".into()));
        }
        if packets.iter().any(|p| p.len() != len) {
            return Err(Error::InvalidParameter(
                "generation payloads differ in length".into(),
            ));
        }
        Ok(Generation { packets })
    }

    /// Deterministic random generation, for simulation and tests.
    pub fn random(gen_size: usize, payload_bytes: usize, seed: u64) -> Result<Self> {
        if gen_size == 0 || payload_bytes == 0 {
            return Err(Error::InvalidParameter(
                "gen_size and payload_bytes must be >= 1".into(),
            ));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let packets = (0..gen_size)
            .map(|_| (0..payload_bytes).map(|_| rng.random()).collect())
            .collect();
        Ok(Generation { packets })
    }

    pub fn size(&self) -> usize {
        self.packets.len()
    }

    pub fn payload_bytes(&self) -> usize {
        self.packets[0].len()
    }

    pub fn packets(&self) -> &[Vec<u8>] {
        &self.packets
    }
}

/// One coded packet: a coefficient vector plus the combined payload.
#[derive(Debug, Clone)]
pub struct CodedPacket {
    pub coefficients: Vec<Gf256>,
    pub payload: Vec<u8>,
}

/// Encode `n` coded packets with uniform random coefficients.
/// All-zero coefficient vectors are redrawn. Deterministic given the seed.
pub fn encode(gen: &Generation, n: usize, seed: u64) -> Result<Vec<CodedPacket>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| encode_one(gen, &mut rng)).collect())
}

/// Encode a single packet pulling coefficients from the caller's stream.
pub fn encode_one(gen: &Generation, rng: &mut impl Rng) -> CodedPacket {
    let k = gen.size();
    let mut coefficients = vec![Gf256::ZERO; k];
    loop {
        for c in coefficients.iter_mut() {
            *c = Gf256(rng.random());
        }
        if coefficients.iter().any(|c| !c.is_zero()) {
            break;
        }
    }
    let mut payload = vec![0u8; gen.payload_bytes()];
    for (c, src) in coefficients.iter().zip(gen.packets()) {
        if c.is_zero() {
            continue;
        }
        for (out, &b) in payload.iter_mut().zip(src) {
            *out = (Gf256(*out) + *c * Gf256(b)).0;
        }
    }
    CodedPacket {
        coefficients,
        payload,
    }
}

/// Receiver-side elimination state, kept in reduced row echelon form.
#[derive(Debug, Clone)]
pub struct DecoderState {
    gen_size: usize,
    payload_bytes: usize,
    /// rows sorted by pivot column; each pivot coefficient is 1 and its
    /// column is zero in every other row
    rows: Vec<(Vec<Gf256>, Vec<u8>)>,
    pivots: Vec<usize>,
}

impl DecoderState {
    pub fn new(gen_size: usize, payload_bytes: usize) -> Self {
        DecoderState {
            gen_size,
            payload_bytes,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Received degrees of freedom.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn missing_dof(&self) -> usize {
        self.gen_size - self.rank()
    }

    /// Absorb one coded packet. Returns true iff it was innovative
    /// (linearly independent of everything absorbed so far).
    pub fn absorb(&mut self, pkt: &CodedPacket) -> Result<bool> {
        if pkt.coefficients.len() != self.gen_size {
            return Err(Error::InvalidParameter(format!(
                "coefficient length {} does not match generation size {}",
                pkt.coefficients.len(),
                self.gen_size
            )));
        }
        if pkt.payload.len() != self.payload_bytes {
            return Err(Error::InvalidParameter(format!(
                "payload length {} does not match {}",
                pkt.payload.len(),
                self.payload_bytes
            )));
        }
        let mut coef = pkt.coefficients.clone();
        let mut data = pkt.payload.clone();
        // forward-eliminate against existing pivots
        for (row_idx, &pivot) in self.pivots.iter().enumerate() {
            let factor = coef[pivot];
            if factor.is_zero() {
                continue;
            }
            let (rc, rd) = &self.rows[row_idx];
            for (c, rc) in coef.iter_mut().zip(rc) {
                *c = *c + factor * *rc;
            }
            for (d, rd) in data.iter_mut().zip(rd) {
                *d = (Gf256(*d) + factor * Gf256(*rd)).0;
            }
        }
        let Some(pivot) = coef.iter().position(|c| !c.is_zero()) else {
            return Ok(false); // dependent
        };
        // normalize the new row
        let inv = coef[pivot].inv();
        for c in coef.iter_mut() {
            *c = inv * *c;
        }
        for d in data.iter_mut() {
            *d = (inv * Gf256(*d)).0;
        }
        // back-substitute into existing rows
        for (rc, rd) in self.rows.iter_mut() {
            let factor = rc[pivot];
            if factor.is_zero() {
                continue;
            }
            for (c, nc) in rc.iter_mut().zip(&coef) {
                *c = *c + factor * *nc;
            }
            for (d, nd) in rd.iter_mut().zip(&data) {
                *d = (Gf256(*d) + factor * Gf256(*nd)).0;
            }
        }
        // insert keeping pivot order
        let pos = self.pivots.partition_point(|&p| p < pivot);
        self.pivots.insert(pos, pivot);
        self.rows.insert(pos, (coef, data));
        Ok(true)
    }

    /// Recover the source packets. Requires full rank.
    pub fn decode(&self) -> Result<Vec<Vec<u8>>> {
        if self.rank() < self.gen_size {
            return Err(Error::NotReady {
                missing_dof: self.missing_dof(),
            });
        }
        // full-rank RREF is the identity; rows are the sources in order
        Ok(self.rows.iter().map(|(_, d)| d.clone()).collect())
    }
}
