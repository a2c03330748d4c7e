//! Prints the 2-port codebook, its orthogonal pairs and the gain each
//! codeword gives the two reference channels.

use nr_mumimo::channel::ideal_channels;
use nr_mumimo::codebook::{all_precoders, effective_gain, is_orthogonal_pair, NUM_PMI};
use nr_mumimo::csi::select_pmi;

fn main() -> Result<(), nr_mumimo::Error> {
    let (h1, h2) = ideal_channels();
    println!(
        "{:>3}  {:<13}  {:<13}  {:>10}  {:>10}",
        "PMI", "w[0]", "w[1]", "|h1.w|", "|h2.w|"
    );
    for w in all_precoders() {
        let [a, b] = w.entries();
        println!(
            "{:>3}  {:+.3}{:+.3}j  {:+.3}{:+.3}j  {:>10.3}  {:>10.3}",
            w.pmi(),
            a.re,
            a.im,
            b.re,
            b.im,
            effective_gain(&h1, w.pmi())?,
            effective_gain(&h2, w.pmi())?,
        );
    }

    print!("\northogonal pairs:");
    for a in 0..NUM_PMI {
        for b in a + 1..NUM_PMI {
            if is_orthogonal_pair(a, b)? {
                print!(" ({a}, {b})");
            }
        }
    }
    println!();
    println!(
        "UE 1 selects PMI {}, UE 2 selects PMI {}",
        select_pmi(&h1),
        select_pmi(&h2)
    );
    Ok(())
}
