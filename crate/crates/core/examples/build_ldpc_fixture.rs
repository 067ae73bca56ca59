//! Regenerates the shipped 1512-bit rate-5/6 LDPC code.
//!
//! ```text
//! cargo run --example build_ldpc_fixture -- crates/core/data/ira_1512_r56.alist
//! ```

use pdmkit::pas::{peg_ira, SystematicCode};

fn main() -> pdmkit::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "ira_1512_r56.alist".into());
    let h = peg_ira(1512, 1260, 3, 2024)?;
    let code = SystematicCode::new(h)?;
    std::fs::write(&path, code.check_matrix().to_alist())?;
    println!("wrote {path}: n = {}, k = {}, rate = {:.4}", code.len(), code.dimension(), code.rate());
    Ok(())
}
