//! Seeded synthetic datasets in the pipeline's on-disk formats.
//!
//! Desk-scale runs need review corpora, an embedding table and a polarity
//! lexicon without multi-gigabyte downloads. The generators here write the
//! exact formats the loaders expect: the `{train,test}/{pos,neg}/*.txt`
//! review layout, tab-separated phrase rows with a header, one-entry-per-line
//! embedding text, and `word<TAB>affect<TAB>flag` lexicon triples. All
//! output is deterministic in the seed.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::corpus::Sentiment;
use crate::error::Result;
use crate::rng::Rng;

pub const POSITIVE_WORDS: &[&str] = &[
    "wonderful", "brilliant", "superb", "delightful", "charming", "gripping",
    "magnificent", "touching", "hilarious", "masterful", "stunning", "lovely",
    "excellent", "marvelous", "engaging", "inspired", "beautiful", "splendid",
    "glorious", "captivating", "enjoyable", "heartwarming", "thrilling",
    "remarkable", "graceful", "radiant", "winning", "exquisite", "admirable",
    "dazzling",
];

pub const NEGATIVE_WORDS: &[&str] = &[
    "awful", "dreadful", "terrible", "boring", "clumsy", "tedious",
    "horrendous", "painful", "laughable", "amateurish", "dismal", "ugly",
    "atrocious", "miserable", "grating", "uninspired", "hideous", "shoddy",
    "dire", "excruciating", "unbearable", "depressing", "plodding",
    "forgettable", "graceless", "bleak", "losing", "clunky", "appalling",
    "wretched",
];

const NOUNS: &[&str] = &[
    "film", "movie", "plot", "story", "script", "acting", "cast", "ending",
    "pacing", "dialogue", "soundtrack", "direction", "premise", "sequel",
    "performance", "cinematography",
];

const FILLERS: &[&str] = &[
    "the", "this", "that", "a", "its", "his", "her", "their", "every",
];

const NEUTRAL_SENTENCES: &[&str] = &[
    "I watched it on a rainy sunday afternoon",
    "The runtime is just over two hours",
    "It was filmed on location in toronto",
    "My brother recommended it last week",
    "The director also wrote the screenplay",
    "We saw it at the old downtown cinema",
    "The novel it adapts came out decades ago",
    "There is a short scene after the credits",
];

fn pick<'a>(rng: &mut Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.below(pool.len())]
}

fn sentiment_pool(label: Sentiment) -> &'static [&'static str] {
    match label {
        Sentiment::Positive => POSITIVE_WORDS,
        Sentiment::Negative => NEGATIVE_WORDS,
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// One sentiment-bearing sentence for `label`.
pub fn generate_sentence(rng: &mut Rng, label: Sentiment) -> String {
    let pool = sentiment_pool(label);
    let adj = pick(rng, pool);
    let noun = pick(rng, NOUNS);
    let filler = pick(rng, FILLERS);
    match rng.below(6) {
        0 => format!("{filler} {noun} was truly {adj}"),
        1 => format!("{adj} {adj2} and {adj3} {noun} from start to finish",
            adj2 = pick(rng, pool), adj3 = pick(rng, pool)),
        2 => format!("i found {filler} {noun} {adj} overall"),
        3 => format!("it's {adj} in every single scene"),
        4 => format!("{filler} {adj} {noun} kept me watching"),
        _ => format!("what a {adj} {noun} this turned out to be"),
    }
}

/// A short review: one or two sentiment sentences for `label` plus neutral
/// filler, with capitalization and punctuation for the preprocessor to
/// strip.
pub fn generate_review(rng: &mut Rng, label: Sentiment) -> String {
    let mut sentences = Vec::new();
    sentences.push(generate_sentence(rng, label));
    if rng.below(2) == 0 {
        sentences.push(pick(rng, NEUTRAL_SENTENCES).to_string());
    }
    sentences.push(generate_sentence(rng, label));
    let mut out = String::new();
    for s in sentences {
        out.push_str(&capitalize(&s));
        out.push(if rng.below(4) == 0 { '!' } else { '.' });
        out.push(' ');
    }
    out.trim_end().to_string()
}

/// Write a review corpus in the `{train,test}/{pos,neg}/*.txt` layout.
/// Existing `.txt` files in the class directories are removed first so
/// regeneration never mixes two datasets.
pub fn write_imdb_fixture(
    root: &Path,
    train_per_class: usize,
    test_per_class: usize,
    seed: u64,
) -> Result<()> {
    let mut rng = Rng::new(seed);
    for (split, per_class) in [("train", train_per_class), ("test", test_per_class)] {
        for (class, label) in [("neg", Sentiment::Negative), ("pos", Sentiment::Positive)] {
            let dir = root.join(split).join(class);
            fs::create_dir_all(&dir)?;
            for entry in fs::read_dir(&dir)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "txt") {
                    fs::remove_file(path)?;
                }
            }
            for i in 0..per_class {
                let rating = match label {
                    Sentiment::Positive => 7 + rng.below(4), // 7-10
                    Sentiment::Negative => 1 + rng.below(4), // 1-4
                };
                let text = generate_review(&mut rng, label);
                fs::write(dir.join(format!("{i}_{rating}.txt")), text)?;
            }
        }
    }
    Ok(())
}

/// Write tab-separated phrase rows with a header. Each source sentence
/// contributes its full-sentence row first and a couple of sub-phrase rows
/// after it (which the loader's full-sentence rule drops); a share of
/// sentence groups carries the middle labels 1-3 and is ignored by the
/// binary relabeling. Returns the number of data rows written.
pub fn write_rotten_tomatoes_fixture(
    path: &Path,
    sentences_per_class: usize,
    seed: u64,
) -> Result<usize> {
    let mut rng = Rng::new(seed);
    let mut out = String::from("PhraseId\tSentenceId\tPhrase\tSentiment\n");
    let mut phrase_id = 1usize;
    let mut sentence_id = 1usize;
    let mut rows = 0usize;
    let emit = |out: &mut String, sentence: &str, level: u8, sid: usize, pid: &mut usize| {
        out.push_str(&format!("{pid}\t{sid}\t{sentence}\t{level}\n", pid = *pid));
        *pid += 1;
    };
    for i in 0..sentences_per_class * 2 {
        let label = if i % 2 == 0 {
            Sentiment::Negative
        } else {
            Sentiment::Positive
        };
        let sentence = generate_sentence(&mut rng, label);
        let level = match label {
            Sentiment::Negative => 0,
            Sentiment::Positive => 4,
        };
        emit(&mut out, &sentence, level, sentence_id, &mut phrase_id);
        rows += 1;
        // sub-phrases of the same sentence group
        let words: Vec<&str> = sentence.split(' ').collect();
        if words.len() > 2 {
            let tail = words[1..].join(" ");
            emit(&mut out, &tail, 2, sentence_id, &mut phrase_id);
            rows += 1;
        }
        sentence_id += 1;
        // occasionally a whole group with a middle label (dropped later)
        if rng.below(5) == 0 {
            let neutral = generate_sentence(&mut rng, label);
            emit(&mut out, &neutral, 2, sentence_id, &mut phrase_id);
            rows += 1;
            sentence_id += 1;
        }
    }
    fs::write(path, out)?;
    Ok(rows)
}

/// Plain input file for the transform command: one raw sentence per line.
pub fn write_transform_input(path: &Path, lines: usize, seed: u64) -> Result<usize> {
    let mut rng = Rng::new(seed);
    let mut out = String::new();
    for i in 0..lines {
        let label = if i % 2 == 0 {
            Sentiment::Negative
        } else {
            Sentiment::Positive
        };
        out.push_str(&capitalize(&generate_sentence(&mut rng, label)));
        out.push_str(".\n");
    }
    fs::write(path, out)?;
    Ok(lines)
}

/// Write an embedding table covering the synthetic vocabulary. Sentiment
/// words cluster around per-polarity base directions so that
/// nearest-opposite queries behave like real distributional vectors.
pub fn write_embeddings_fixture(path: &Path, dimension: usize, seed: u64) -> Result<usize> {
    assert!(dimension >= 2);
    let mut rng = Rng::new(seed);
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    let mut count = 0usize;

    let write_entry = |file: &mut dyn Write,
                           word: &str,
                           base: Option<Sentiment>,
                           rng: &mut Rng|
     -> Result<()> {
        let mut vector = Vec::with_capacity(dimension);
        for d in 0..dimension {
            let centre = match base {
                Some(Sentiment::Positive) if d == 0 => 1.0,
                Some(Sentiment::Negative) if d == 0 => -1.0,
                Some(_) if d == 1 => 0.5,
                _ => 0.0,
            };
            vector.push(centre + rng.range_f64(-0.25, 0.25));
        }
        let rendered: Vec<String> = vector.iter().map(|v| format!("{v:.5}")).collect();
        writeln!(file, "{word} {}", rendered.join(" "))?;
        Ok(())
    };

    for &word in POSITIVE_WORDS {
        write_entry(&mut file, word, Some(Sentiment::Positive), &mut rng)?;
        count += 1;
    }
    for &word in NEGATIVE_WORDS {
        write_entry(&mut file, word, Some(Sentiment::Negative), &mut rng)?;
        count += 1;
    }
    for &word in NOUNS.iter().chain(FILLERS) {
        write_entry(&mut file, word, None, &mut rng)?;
        count += 1;
    }
    for sentence in NEUTRAL_SENTENCES {
        for word in sentence.to_lowercase().split(' ') {
            write_entry(&mut file, word, None, &mut rng)?;
            count += 1;
        }
    }
    // common glue words from the sentence templates
    for word in [
        "i", "found", "overall", "it", "s", "in", "every", "single", "scene",
        "kept", "me", "watching", "what", "turned", "out", "to", "be", "was",
        "truly", "and", "from", "start", "finish",
    ] {
        write_entry(&mut file, word, None, &mut rng)?;
        count += 1;
    }
    file.flush()?;
    Ok(count)
}

/// Write a lexicon in `word<TAB>affect<TAB>flag` triples covering the
/// synthetic sentiment pools plus a few words that lack embeddings (the
/// replacement step must skip those gracefully).
pub fn write_lexicon_fixture(path: &Path) -> Result<usize> {
    let mut out = String::new();
    let mut rows = 0usize;
    let push = |out: &mut String, word: &str, affect: &str, flag: u8| {
        out.push_str(&format!("{word}\t{affect}\t{flag}\n"));
    };
    for &word in POSITIVE_WORDS {
        push(&mut out, word, "positive", 1);
        push(&mut out, word, "negative", 0);
        push(&mut out, word, "joy", 1);
        rows += 3;
    }
    for &word in NEGATIVE_WORDS {
        push(&mut out, word, "positive", 0);
        push(&mut out, word, "negative", 1);
        push(&mut out, word, "sadness", 1);
        rows += 3;
    }
    // polarity words with no embedding vector
    for (word, affect) in [("felicitous", "positive"), ("execrable", "negative")] {
        push(&mut out, word, affect, 1);
        rows += 1;
    }
    // neutral lexicon entries, flagged 0 for both polarities
    for word in ["film", "story", "scene"] {
        push(&mut out, word, "positive", 0);
        push(&mut out, word, "negative", 0);
        rows += 2;
    }
    fs::write(path, out)?;
    Ok(rows)
}
