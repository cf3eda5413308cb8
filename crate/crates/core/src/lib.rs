pub mod darboux;
pub mod field;
pub mod linalg;
pub mod modp;
pub mod numerics;
pub mod poly;
pub mod rational;
pub mod series;
pub mod verify;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/darboux.md")]
    mod darboux {}
    #[doc = include_str!("../../../book/src/integrals.md")]
    mod integrals {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
