//! Generate a self-contained desk-scale dataset for the CLI quickstart:
//! a review corpus in the `{train,test}/{pos,neg}` layout, phrase rows in
//! the tab-separated format, an embedding table, a polarity lexicon, a
//! transform input file and a ready-to-run configuration.
//!
//! Usage: cargo run --release -p polarity-pipe --example make_fixtures -- <dir> [seed]

use std::path::PathBuf;

use polarity_pipe::synth;

fn main() {
    let mut args = std::env::args().skip(1);
    let target: PathBuf = args
        .next()
        .unwrap_or_else(|| {
            eprintln!("usage: make_fixtures <dir> [seed]");
            std::process::exit(2);
        })
        .into();
    let seed: u64 = args.next().map_or(42, |s| s.parse().expect("seed must be an integer"));

    std::fs::create_dir_all(&target).expect("create target dir");
    synth::write_imdb_fixture(&target.join("imdb"), 200, 50, seed).expect("imdb fixture");
    synth::write_rotten_tomatoes_fixture(&target.join("rt.tsv"), 100, seed + 1).expect("rt fixture");
    synth::write_embeddings_fixture(&target.join("emb.txt"), 100, seed + 2).expect("embeddings");
    synth::write_lexicon_fixture(&target.join("lex.txt")).expect("lexicon");
    synth::write_transform_input(&target.join("input.txt"), 50, seed + 3).expect("input");

    let config = format!(
        "dataset = imdb\n\
         imdb_root = {imdb}\n\
         rotten_tomatoes = {rt}\n\
         embeddings = {emb}\n\
         lexicon = {lex}\n\
         out_dir = {out}\n\
         seed = {seed}\n\
         cls_epochs = 6\n\
         cls_batch_size = 32\n\
         cls_holdout_fraction = 0.05\n\
         ae_hidden = 160\n\
         ae_epochs = 40\n\
         tau = 0.8\n",
        imdb = target.join("imdb").display(),
        rt = target.join("rt.tsv").display(),
        emb = target.join("emb.txt").display(),
        lex = target.join("lex.txt").display(),
        out = target.join("out").display(),
    );
    std::fs::write(target.join("run.conf"), config).expect("config");

    println!("fixtures written under {}", target.display());
    println!("  imdb/       400 train + 100 test reviews");
    println!("  rt.tsv      200 usable sentences");
    println!("  emb.txt     100-dim embedding table");
    println!("  lex.txt     polarity lexicon");
    println!("  input.txt   50 raw sentences for `transform`");
    println!("  run.conf    configuration pointing at the above");
}
