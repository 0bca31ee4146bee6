//! Symbolic-numeric analysis of Painlevé-type planar systems on weighted
//! projective spaces.
//!
//! The pipeline runs bottom-up: [`newton_weights`] finds the weights of
//! ℂP³(p,q,r,s), [`charts`] rewrites the system in the orbifold charts,
//! [`series`] and [`local`] analyse the movable singularities at infinity,
//! [`soic`] builds the weighted blow-up atlases, [`weyl`] checks Bäcklund
//! symmetries and [`dynamics`] integrates solutions through their poles.

pub mod algebra;
pub mod catalog;
pub mod charts;
pub mod cli;
pub mod dynamics;
pub mod local;
pub mod newton_weights;
pub mod series;
pub mod soic;
pub mod weyl;
