//! Encode bytes as a QR symbol, damage it, and read it back.

use fleetline_core::qr::{codeword_layout, qr_decode, qr_encode, smallest_version, tables, EcLevel};

fn main() {
    let payload = b"T000042 paid 5000.000";
    let version = smallest_version(payload.len(), EcLevel::M, 40).unwrap();
    let mut symbol = qr_encode(payload, version, EcLevel::M).unwrap();
    println!(
        "version {version}, {0}x{0} modules, capacity {1} bytes",
        symbol.side(),
        tables::byte_capacity(version, EcLevel::M)
    );

    // scramble as many codewords per block as the parity can repair
    let nsym = tables::ecc_per_block(version, EcLevel::M);
    let layout = codeword_layout(version, EcLevel::M);
    for block in 0..tables::num_blocks(version, EcLevel::M) {
        for slot in layout.iter().filter(|s| s.block == block).take(nsym / 2) {
            for &(x, y) in &slot.modules {
                symbol.flip(x, y);
            }
        }
    }
    let back = qr_decode(&symbol).unwrap();
    println!("recovered after damage: {}", String::from_utf8_lossy(&back));

    let too_big = vec![0u8; tables::byte_capacity(1, EcLevel::H) + 1];
    println!("over capacity: {}", qr_encode(&too_big, 1, EcLevel::H).unwrap_err());
}
