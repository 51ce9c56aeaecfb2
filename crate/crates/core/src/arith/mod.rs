pub mod characters;
pub mod primes;
pub mod source;

pub use characters::{character_group, CharacterGroup, DirichletCharacter};
pub use source::{
    average_bound_report, coefficients, dirichlet_convolution, incomplete, twist, AverageBound,
    CoefficientSource, EulerFactors, LocalFactor,
};
