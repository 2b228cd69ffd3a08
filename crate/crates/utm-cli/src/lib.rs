//! Batch front end for the utm library.

pub mod checks;
pub mod commands;
pub mod output;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

/// Maps a library error to an exit code.
pub fn exit_code(e: &utm::UtmError) -> i32 {
    use utm::UtmError::*;
    match e {
        Roots(_) | Numerical(_) => exit::NUMERICAL,
        _ => exit::USAGE,
    }
}
