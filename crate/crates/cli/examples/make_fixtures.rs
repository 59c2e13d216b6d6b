//! Regenerate the bundled fixtures.
//!
//! ```text
//! cargo run -p distsem-cli --example make_fixtures -- fixtures
//! ```
//!
//! Everything is synthetic and seeded, so reruns reproduce the files byte for
//! byte. Word lists are small hand-picked Dutch and Flemish words, not taken
//! from any external resource.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PROVINCES: [(&str, &str, &[&str]); 16] = [
    (
        "groningen",
        "nederland",
        &["moi", "wicht", "lutje", "gounend"],
    ),
    (
        "friesland",
        "nederland",
        &["heit", "mem", "tsjerke", "bern"],
    ),
    (
        "drenthe",
        "nederland",
        &["eerpel", "heur", "zeuk", "knoepen"],
    ),
    (
        "overijssel",
        "nederland",
        &["kearl", "plaggen", "dreuge", "mekoar"],
    ),
    (
        "flevoland",
        "nederland",
        &["polderwind", "dijkje", "nieuwlander"],
    ),
    (
        "gelderland",
        "nederland",
        &["gatsie", "kaske", "mallemolen", "sloeber"],
    ),
    (
        "utrecht",
        "nederland",
        &["maorsch", "schoeien", "gezellig", "domtoren"],
    ),
    (
        "noord-holland",
        "nederland",
        &["gozer", "lekkerding", "ouwe", "pleuris"],
    ),
    (
        "zuid-holland",
        "nederland",
        &["hullie", "effe", "sjonnie", "haagse"],
    ),
    (
        "zeeland",
        "nederland",
        &["kreke", "schorre", "moaten", "bolus"],
    ),
    (
        "noord-brabant",
        "nederland",
        &["houdoe", "ajuu", "zeiver", "houdoe_en_bedankt"],
    ),
    ("limburg", "nederland", &["hoes", "sjoen", "vlaai", "sjiek"]),
    (
        "west-vlaanderen",
        "belgië",
        &["vintje", "joengen", "sebiet", "gie"],
    ),
    (
        "oost-vlaanderen",
        "belgië",
        &["stroppen", "seffens", "gazette", "ambras"],
    ),
    (
        "antwerpen",
        "belgië",
        &["pintje", "sinjoor", "schoon", "sjiek"],
    ),
    (
        "vlaams-brabant",
        "belgië",
        &["manneke", "ambetant", "zwanze", "zievereir"],
    ),
];

const GENERAL: &[&str] = &[
    "de", "het", "een", "en", "is", "in", "van", "op", "met", "voor", "zijn", "was", "dat", "die",
    "niet", "ook", "maar", "naar", "er", "wij", "ze", "hij", "zij", "heel", "goed", "vandaag",
    "gisteren", "morgen", "weer", "nog", "al", "altijd", "soms", "hier", "daar",
];

const STANDARD_EXTRA: &[&str] = &[
    "mooi",
    "oud",
    "groot",
    "klein",
    "schoon",
    "gezellig",
    "gazette",
    "mensen",
    "woord",
    "provincie",
    "zeggen",
    "oma",
    "stad",
    "dorp",
    "land",
];

const TOPIC_FOOD: &[&str] = &[
    "brood",
    "kaas",
    "melk",
    "boter",
    "soep",
    "taart",
    "appel",
    "peer",
    "koffie",
    "thee",
    "keuken",
    "pan",
    "oven",
    "recept",
    "lepel",
    "bord",
    "suiker",
    "zout",
    "ontbijt",
    "avondeten",
];

const TOPIC_SPORT: &[&str] = &[
    "voetbal",
    "tennis",
    "wielrennen",
    "bal",
    "doel",
    "scheids",
    "veld",
    "team",
    "wedstrijd",
    "coach",
    "training",
    "stadion",
    "speler",
    "seizoen",
    "beker",
    "keeper",
    "sprint",
    "ronde",
    "punten",
    "finale",
];

const TWO_TOPIC_A: [&str; 10] = [
    "brood", "kaas", "melk", "boter", "soep", "taart", "appel", "peer", "koffie", "thee",
];
const TWO_TOPIC_B: [&str; 10] = [
    "voetbal",
    "tennis",
    "fiets",
    "bal",
    "doel",
    "scheids",
    "veld",
    "team",
    "wedstrijd",
    "coach",
];

type Category = (
    &'static str,
    &'static str,
    &'static [(&'static str, &'static str)],
);

const RELATIONS: &[Category] = &[
    (
        "meervoud",
        "syntactic",
        &[
            ("boek", "boeken"),
            ("huis", "huizen"),
            ("stoel", "stoelen"),
            ("fiets", "fietsen"),
            ("kat", "katten"),
            ("hond", "honden"),
            ("tafel", "tafels"),
        ],
    ),
    (
        "verkleinwoord",
        "syntactic",
        &[
            ("boek", "boekje"),
            ("huis", "huisje"),
            ("stoel", "stoeltje"),
            ("kat", "katje"),
            ("hond", "hondje"),
            ("tafel", "tafeltje"),
        ],
    ),
    (
        "verleden_tijd",
        "syntactic",
        &[
            ("lopen", "liep"),
            ("zien", "zag"),
            ("eten", "at"),
            ("drinken", "dronk"),
            ("slapen", "sliep"),
            ("schrijven", "schreef"),
        ],
    ),
    (
        "vergrotende_trap",
        "syntactic",
        &[
            ("groot", "groter"),
            ("klein", "kleiner"),
            ("snel", "sneller"),
            ("oud", "ouder"),
            ("jong", "jonger"),
            ("warm", "warmer"),
        ],
    ),
    (
        "overtreffende_trap",
        "syntactic",
        &[
            ("groot", "grootst"),
            ("klein", "kleinst"),
            ("snel", "snelst"),
            ("oud", "oudst"),
            ("jong", "jongst"),
            ("warm", "warmst"),
        ],
    ),
    (
        "voltooid_deelwoord",
        "syntactic",
        &[
            ("lopen", "gelopen"),
            ("zien", "gezien"),
            ("eten", "gegeten"),
            ("drinken", "gedronken"),
            ("slapen", "geslapen"),
            ("schrijven", "geschreven"),
        ],
    ),
    (
        "geslacht",
        "semantic",
        &[
            ("koning", "koningin"),
            ("man", "vrouw"),
            ("broer", "zus"),
            ("vader", "moeder"),
            ("zoon", "dochter"),
            ("oom", "tante"),
        ],
    ),
    (
        "hoofdstad",
        "semantic",
        &[
            ("parijs", "frankrijk"),
            ("berlijn", "duitsland"),
            ("madrid", "spanje"),
            ("rome", "italië"),
            ("wenen", "oostenrijk"),
            ("lissabon", "portugal"),
        ],
    ),
    (
        "valuta",
        "semantic",
        &[
            ("japan", "yen"),
            ("amerika", "dollar"),
            ("engeland", "pond"),
            ("zwitserland", "frank"),
            ("rusland", "roebel"),
            ("china", "yuan"),
        ],
    ),
    (
        "tegenstelling",
        "semantic",
        &[
            ("warm", "koud"),
            ("licht", "donker"),
            ("hoog", "laag"),
            ("nat", "droog"),
            ("vol", "leeg"),
            ("snel", "traag"),
        ],
    ),
    (
        "provinciehoofdstad",
        "semantic",
        &[
            ("friesland", "leeuwarden"),
            ("drenthe", "assen"),
            ("overijssel", "zwolle"),
            ("gelderland", "arnhem"),
            ("zeeland", "middelburg"),
            ("limburg", "maastricht"),
            ("west-vlaanderen", "brugge"),
            ("oost-vlaanderen", "gent"),
        ],
    ),
];

/// Category-specific frames: the left word fills `{l}`, the right `{r}`,
/// and `{x}` is replaced by a word shared by both sides of the tuple.
const FRAMES: &[(&str, &[&str], &[&str])] = &[
    (
        "meervoud",
        &["ik zie een {l} staan", "er is maar een {l} over"],
        &["ik zie twee {r} staan", "er zijn veel {r} over"],
    ),
    (
        "verkleinwoord",
        &["wat een grote {l} is dat", "de {l} is zwaar"],
        &["wat een schattig {r} is dat", "het {r} is licht"],
    ),
    (
        "verleden_tijd",
        &[
            "wij gaan morgen {l} in het park",
            "zij wil graag {l} vandaag",
        ],
        &["hij {r} gisteren in het park", "zij {r} vorige week veel"],
    ),
    (
        "vergrotende_trap",
        &["dit huis is heel {l} vind ik", "de auto is {l} genoeg"],
        &[
            "dit huis is veel {r} dan dat",
            "de auto is {r} dan de fiets",
        ],
    ),
    (
        "overtreffende_trap",
        &["het dier is erg {l} zeggen ze", "die man is {l} genoeg"],
        &[
            "het dier is het {r} van allemaal",
            "die man is de {r} van de groep",
        ],
    ),
    (
        "voltooid_deelwoord",
        &["wij willen samen {l} morgen", "zij gaan vaak {l} samen"],
        &["wij hebben samen {r} gisteren", "zij hebben vaak {r} samen"],
    ),
    (
        "geslacht",
        &["de {l} is een echte man", "hij is de {l} van de familie"],
        &["de {r} is een echte vrouw", "zij is de {r} van de familie"],
    ),
    (
        "hoofdstad",
        &[
            "wij reizen naar de stad {l} deze zomer",
            "{l} is een mooie stad",
        ],
        &[
            "wij reizen naar het land {r} deze zomer",
            "{r} is een mooi land",
        ],
    ),
    (
        "valuta",
        &["in {l} betaal je met geld", "het land {l} ligt ver weg"],
        &["je betaalt daar met de {r} als munt", "de {r} is een munt"],
    ),
    (
        "tegenstelling",
        &["het water is erg {l} vandaag", "de kamer is {l} genoeg"],
        &[
            "het water is juist {r} vandaag",
            "de kamer is te {r} vind ik",
        ],
    ),
    (
        "provinciehoofdstad",
        &[
            "de provincie {l} is groot en mooi",
            "wij wonen in de provincie {l}",
        ],
        &["de stad {r} is oud en mooi", "wij wonen in de stad {r}"],
    ),
];

fn sentence(rng: &mut ChaCha8Rng, core: &[&str], len: usize) -> Vec<String> {
    let mut words: Vec<String> = core.iter().map(|w| w.to_string()).collect();
    while words.len() < len {
        let filler = GENERAL.choose(rng).unwrap();
        let at = rng.random_range(0..=words.len());
        words.insert(at, filler.to_string());
    }
    words
}

/// Raw-text noise: a capitalized first word and trailing punctuation tokens.
fn roughen(rng: &mut ChaCha8Rng, mut words: Vec<String>) -> String {
    if rng.random_bool(0.3) {
        let first = &words[0];
        let mut c = first.chars();
        if let Some(h) = c.next() {
            words[0] = h.to_uppercase().chain(c).collect();
        }
    }
    if rng.random_bool(0.5) {
        words.push([".", "!", "?", "..."].choose(rng).unwrap().to_string());
    }
    if rng.random_bool(0.1) {
        let at = rng.random_range(1..words.len());
        words.insert(at, ",".into());
    }
    words.join(" ")
}

fn mini_corpus(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut lines = Vec::new();

    for i in 0..3800 {
        let topic = if i % 2 == 0 { TOPIC_FOOD } else { TOPIC_SPORT };
        let k = rng.random_range(3..=5);
        let core: Vec<&str> = topic.choose_multiple(rng, k).copied().collect();
        let len = k + rng.random_range(2..=5);
        let s = sentence(rng, &core, len);
        lines.push(roughen(rng, s));
    }

    let templates: &[&str] = &[
        "in {p} zeggen de mensen vaak {a} en {b}",
        "mijn oma uit {p} zei altijd {a}",
        "wie in {p} woont kent het woord {a} wel",
        "{a} en {b} hoor je veel in {p}",
        "in {p} is {a} een gewoon woord",
        "de provincie {p} ligt in {c}",
        "{p} hoort bij {c} zeggen ze",
        "daar in {p} roepen ze {a} {b}",
    ];
    for (p, country, words) in PROVINCES {
        for _ in 0..80 {
            let t = templates.choose(rng).unwrap();
            let pair: Vec<&str> = words.choose_multiple(rng, 2).copied().collect();
            let text = t
                .replace("{p}", p)
                .replace("{c}", country)
                .replace("{a}", pair[0])
                .replace("{b}", pair[1]);
            let words: Vec<String> = text.split(' ').map(str::to_owned).collect();
            lines.push(roughen(rng, words));
        }
    }

    for (name, _, tuples) in RELATIONS {
        let (_, left_frames, right_frames) = FRAMES.iter().find(|(n, _, _)| n == name).unwrap();
        for (l, r) in *tuples {
            for _ in 0..5 {
                let f = left_frames.choose(rng).unwrap().replace("{l}", l);
                lines.push(roughen(rng, f.split(' ').map(str::to_owned).collect()));
                let f = right_frames.choose(rng).unwrap().replace("{r}", r);
                lines.push(roughen(rng, f.split(' ').map(str::to_owned).collect()));
            }
            for _ in 0..3 {
                let pair = format!("de {l} en de {r} horen bij elkaar");
                lines.push(roughen(rng, pair.split(' ').map(str::to_owned).collect()));
            }
        }
    }

    // short lines that preprocessing drops
    let short: &[&str] = &[
        "Ja hoor !",
        "Nee",
        "Dat klopt",
        "Tot morgen !",
        "Goed zo , jij",
        ". . .",
    ];
    for _ in 0..400 {
        lines.push(short.choose(rng).unwrap().to_string());
    }

    lines.shuffle(rng);
    lines
}

fn two_topic(rng: &mut ChaCha8Rng) -> Vec<String> {
    (0..1500)
        .map(|i| {
            let topic = if rng.random_bool(0.5) || i == 0 {
                &TWO_TOPIC_A
            } else {
                &TWO_TOPIC_B
            };
            let len = rng.random_range(6..=10);
            (0..len)
                .map(|_| *topic.choose(rng).unwrap())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

fn posts(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut out = Vec::new();
    for (p, _, words) in PROVINCES {
        for i in 0..6 {
            let mut tokens: Vec<String> = Vec::new();
            let dialect = match i {
                0 => 0,
                1 | 2 => 1,
                _ => rng.random_range(2..=3),
            };
            for w in words.choose_multiple(rng, dialect) {
                tokens.push(w.to_string());
            }
            if i == 5 {
                // a word from another province
                let (_, _, other) = PROVINCES.choose(rng).unwrap();
                tokens.push(other.choose(rng).unwrap().to_string());
            }
            for _ in 0..rng.random_range(3..=7) {
                tokens.push(GENERAL.choose(rng).unwrap().to_string());
            }
            tokens.shuffle(rng);
            let label = if i == 2 {
                p.to_uppercase()
            } else {
                p.to_string()
            };
            out.push(format!("{label}\t{}", roughen(rng, tokens)));
        }
    }
    out.shuffle(rng);
    out
}

fn dictionary() -> String {
    let mut out = String::new();
    for (p, _, words) in PROVINCES {
        for w in words.iter().filter(|w| !w.contains('_')) {
            writeln!(out, "{p}\t{w}").unwrap();
        }
    }
    // entries that deduplication must remove
    writeln!(out, "noord-brabant\tschoon").unwrap();
    writeln!(out, "Limburg\tmaastricht").unwrap();
    out
}

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let dir = Path::new(&dir);
    fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(20151019);

    let corpus = mini_corpus(&mut rng);
    fs::write(dir.join("mini_corpus.txt"), corpus.join("\n") + "\n")?;
    fs::write(
        dir.join("two_topic.txt"),
        two_topic(&mut rng).join("\n") + "\n",
    )?;

    let mut relations = String::new();
    for (name, kind, tuples) in RELATIONS {
        writeln!(relations, ": {name} {kind}").unwrap();
        for (l, r) in *tuples {
            writeln!(relations, "{l}\t{r}").unwrap();
        }
    }
    fs::write(dir.join("relations.txt"), relations)?;

    let mut targets = String::from(
        "# provinces, then countries; tab-separated aliases follow a name\n[provinces]\n",
    );
    for (p, _, _) in PROVINCES {
        targets.push_str(p);
        targets.push('\n');
    }
    targets.push_str("[countries]\nnederland\nbelgië\tbelgie\n");
    fs::write(dir.join("targets.txt"), targets)?;

    fs::write(dir.join("dialect_dictionary.tsv"), dictionary())?;
    let mut standard: Vec<&str> = GENERAL.iter().chain(STANDARD_EXTRA).copied().collect();
    standard.sort_unstable();
    standard.dedup();
    fs::write(dir.join("standard_words.txt"), standard.join("\n") + "\n")?;
    fs::write(dir.join("posts.tsv"), posts(&mut rng).join("\n") + "\n")?;
    Ok(())
}
