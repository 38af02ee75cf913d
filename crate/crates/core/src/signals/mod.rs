//! Signal ingestion and the on-disk container format.

pub mod container;
pub mod image;
pub mod molecule;

pub use container::{read_container, read_header, write_container, Header, Object, ObjectType};
pub use image::{project_image, project_planar, PlanarImage};
pub use molecule::{molecule_channels, Atom, MoleculeSpec};
