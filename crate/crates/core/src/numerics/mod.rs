pub mod quad;
pub mod sum;
pub mod special;
