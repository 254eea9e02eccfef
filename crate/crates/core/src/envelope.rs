//! Passphrase-sealed payloads.
//!
//! A key is stretched from the passphrase and a random salt with
//! PBKDF2-HMAC-SHA256, then the plaintext is sealed with ChaCha20-Poly1305.
//! The header (version, salt, nonce, length) is bound as associated data.
//!
//! Wire format, all fixed-width except the ciphertext:
//!
//! ```text
//! [version:1 = 0x01][salt:16][nonce:12][len:4 big-endian][ciphertext:len][tag:16]
//! ```

use chacha20poly1305::aead::{AeadInOut, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Nonce, Tag};
use rand::RngCore;
use sha2::Sha256;
use thiserror::Error;

pub const FORMAT_VERSION: u8 = 0x01;
pub const SALT_LEN: usize = 16;
pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;
pub const HEADER_LEN: usize = 1 + SALT_LEN + NONCE_LEN + 4;
/// Bytes an envelope adds on top of the plaintext.
pub const OVERHEAD: usize = HEADER_LEN + TAG_LEN;

/// PBKDF2 rounds. Public and fixed so independent implementations interoperate.
pub const KDF_ITERATIONS: u32 = 2048;
pub const KEY_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
    /// Wrong passphrase or modified envelope; the two are deliberately not
    /// distinguished.
    #[error("authentication failed")]
    AuthFailure,
    #[error("malformed envelope: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedEnvelope {
    pub salt: [u8; SALT_LEN],
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
    pub tag: [u8; TAG_LEN],
}

impl SealedEnvelope {
    pub fn version(&self) -> u8 {
        FORMAT_VERSION
    }

    fn header(&self) -> [u8; HEADER_LEN] {
        header_bytes(&self.salt, &self.nonce, self.ciphertext.len())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(OVERHEAD + self.ciphertext.len());
        out.extend_from_slice(&self.header());
        out.extend_from_slice(&self.ciphertext);
        out.extend_from_slice(&self.tag);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EnvelopeError> {
        if bytes.len() < OVERHEAD {
            return Err(EnvelopeError::Format(format!(
                "{} bytes is shorter than the {OVERHEAD}-byte minimum",
                bytes.len()
            )));
        }
        if bytes[0] != FORMAT_VERSION {
            return Err(EnvelopeError::Format(format!(
                "unsupported version byte 0x{:02x}",
                bytes[0]
            )));
        }
        let salt: [u8; SALT_LEN] = bytes[1..1 + SALT_LEN].try_into().unwrap();
        let nonce: [u8; NONCE_LEN] = bytes[1 + SALT_LEN..1 + SALT_LEN + NONCE_LEN]
            .try_into()
            .unwrap();
        let len_bytes: [u8; 4] = bytes[HEADER_LEN - 4..HEADER_LEN].try_into().unwrap();
        let len = u32::from_be_bytes(len_bytes) as usize;
        if bytes.len() != OVERHEAD + len {
            return Err(EnvelopeError::Format(format!(
                "declared ciphertext length {len} does not match {} available bytes",
                bytes.len() - OVERHEAD
            )));
        }
        let ciphertext = bytes[HEADER_LEN..HEADER_LEN + len].to_vec();
        let tag: [u8; TAG_LEN] = bytes[HEADER_LEN + len..].try_into().unwrap();
        Ok(Self {
            salt,
            nonce,
            ciphertext,
            tag,
        })
    }
}

fn header_bytes(salt: &[u8; SALT_LEN], nonce: &[u8; NONCE_LEN], len: usize) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[0] = FORMAT_VERSION;
    h[1..1 + SALT_LEN].copy_from_slice(salt);
    h[1 + SALT_LEN..1 + SALT_LEN + NONCE_LEN].copy_from_slice(nonce);
    h[HEADER_LEN - 4..].copy_from_slice(&(len as u32).to_be_bytes());
    h
}

pub fn derive_key(passphrase: &str, salt: &[u8]) -> [u8; KEY_LEN] {
    let mut key = [0u8; KEY_LEN];
    pbkdf2::pbkdf2_hmac::<Sha256>(passphrase.as_bytes(), salt, KDF_ITERATIONS, &mut key);
    key
}

pub fn seal_payload(plaintext: &[u8], passphrase: &str) -> Result<SealedEnvelope, EnvelopeError> {
    if passphrase.is_empty() {
        return Err(EnvelopeError::InvalidParam("empty passphrase"));
    }
    if plaintext.len() > u32::MAX as usize {
        return Err(EnvelopeError::InvalidParam("plaintext too large"));
    }
    let mut salt = [0u8; SALT_LEN];
    let mut nonce = [0u8; NONCE_LEN];
    let mut rng = rand::rng();
    rng.fill_bytes(&mut salt);
    rng.fill_bytes(&mut nonce);

    let key = derive_key(passphrase, &salt);
    let cipher = ChaCha20Poly1305::new(&key.into());
    let aad = header_bytes(&salt, &nonce, plaintext.len());
    let mut ciphertext = plaintext.to_vec();
    let tag = cipher
        .encrypt_inout_detached(&Nonce::from(nonce), &aad, ciphertext.as_mut_slice().into())
        .map_err(|_| EnvelopeError::InvalidParam("plaintext too large for the cipher"))?;
    Ok(SealedEnvelope {
        salt,
        nonce,
        ciphertext,
        tag: tag.into(),
    })
}

pub fn open_payload(envelope: &SealedEnvelope, passphrase: &str) -> Result<Vec<u8>, EnvelopeError> {
    let key = derive_key(passphrase, &envelope.salt);
    let cipher = ChaCha20Poly1305::new(&key.into());
    let mut plaintext = envelope.ciphertext.clone();
    cipher
        .decrypt_inout_detached(
            &Nonce::from(envelope.nonce),
            &envelope.header(),
            plaintext.as_mut_slice().into(),
            &Tag::from(envelope.tag),
        )
        .map_err(|_| EnvelopeError::AuthFailure)?;
    Ok(plaintext)
}

/// Parse the wire format and open it.
pub fn open_bytes(bytes: &[u8], passphrase: &str) -> Result<Vec<u8>, EnvelopeError> {
    open_payload(&SealedEnvelope::from_bytes(bytes)?, passphrase)
}
