pub mod automata;
pub mod baseline;
pub mod bench;
pub mod logic;
pub mod machines;
pub mod membership;
pub mod prophecy;
pub mod synthesis;
pub mod verify;
