//! Scalar special functions and Gaussian quadrature rules.

mod bessel;
mod gamma;
mod hyper;
mod marcum;
mod normal;
mod quadrature;

pub use bessel::{bessel_i0_scaled, bessel_j0, bessel_j0_integral, bessel_j1, bessel_j1_over_x};
pub use gamma::{digamma, ln_gamma, reg_lower_gamma, reg_upper_gamma};
pub use hyper::{hyp1f2, hyp1f2_series, SeriesSum, HYP1F2_Z_CAP};
pub use marcum::{marcum_q1, marcum_q1_tails, MarcumTails};
pub use normal::{normal_cdf, normal_quantile};
pub use quadrature::{
    gauss_hermite_rule, gauss_laguerre_rule, gauss_legendre_rule, QuadratureRule, RuleKind,
    MAX_ORDER,
};

pub(crate) use gamma::gamma_pq;
pub(crate) use marcum::tails as marcum_tails;
pub(crate) use normal::quantile as normal_quantile_unchecked;
pub(crate) use quadrature::{GK15_WG, GK15_WK, GK15_X};
