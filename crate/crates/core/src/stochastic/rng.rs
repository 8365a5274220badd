use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every stochastic process in the crate.
pub type StreamRng = ChaCha8Rng;

/// Logical random processes. Each gets its own ChaCha stream so that
/// changing how many draws one process consumes never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Arrivals,
    Locations,
    Service,
    Synthetic,
    Bootstrap,
    Scramble,
    Custom(u32),
}

impl Stream {
    fn id(self) -> u32 {
        match self {
            Stream::Arrivals => 1,
            Stream::Locations => 2,
            Stream::Service => 3,
            Stream::Synthetic => 4,
            Stream::Bootstrap => 5,
            Stream::Scramble => 6,
            Stream::Custom(n) => 0x1000_0000 | n,
        }
    }
}

/// Builds the generator for `(seed, replication, hospital, process)`.
///
/// The key is `seed || replication` in the 256-bit ChaCha key, and
/// `hospital << 32 | process` selects the stream. System-wide processes
/// use `hospital = u32::MAX`.
pub fn stream_rng(seed: u64, replication: u64, hospital: Option<u32>, stream: Stream) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&replication.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    let hospital = u64::from(hospital.unwrap_or(u32::MAX));
    rng.set_stream((hospital << 32) | u64::from(stream.id()));
    rng
}
