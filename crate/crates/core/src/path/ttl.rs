use crate::{Error, Result};

/// Initial TTLs assumed for senders. Other defaults (30, 60) are not modelled.
pub const INITIAL_TTLS: [u8; 4] = [32, 64, 128, 255];

/// Smallest assumed initial TTL that is at least `observed`.
pub fn infer_initial_ttl(observed: u8) -> Result<u8> {
    if observed == 0 {
        return Err(Error::InvalidPacket("observed TTL 0".into()));
    }
    Ok(INITIAL_TTLS
        .into_iter()
        .find(|&c| c >= observed)
        .expect("255 bounds every u8"))
}

/// Routers crossed between the sender and the observation point.
pub fn ttl_decrement(observed: u8) -> Result<u8> {
    Ok(infer_initial_ttl(observed)? - observed)
}
