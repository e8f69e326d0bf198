use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams derived from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Placement,
    Mobility(u32),
    HelloChannel,
    DataChannel,
    FadingPool,
    Exploration,
    Scenario,
    Relocation,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Placement => 1,
            Stream::HelloChannel => 2,
            Stream::DataChannel => 3,
            Stream::FadingPool => 4,
            Stream::Exploration => 5,
            Stream::Scenario => 6,
            Stream::Relocation => 7,
            Stream::Mobility(n) => 1_000 + n as u64,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
