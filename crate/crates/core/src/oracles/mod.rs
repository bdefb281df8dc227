//! Independent engines used to certify the collective-spin results.
//!
//! * [`trajectories`]: unitary evolution under sampled white laser noise,
//!   averaged over many realizations.
//! * [`sde`]: a scalar multiplicative Stratonovich SDE with a known mean.
//! * [`full_space`]: master-equation evolution in the full `2^N` product
//!   space, projected back onto the symmetric subspace.

pub mod full_space;
pub mod sde;
pub mod trajectories;

pub use full_space::{full_space_propagate, product_space_operator, symmetric_isometry, FullSpaceResult};
pub use sde::{scalar_sde_check, SdeCheck};
pub use trajectories::{stochastic_ensemble_average, EnsembleAverage, NoiseKind, TrajectoryConfig};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream `index` of the generator seeded with `seed`; results
/// depend only on `(seed, index)`, never on scheduling.
pub(crate) fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
