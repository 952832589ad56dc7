//! Snowball English stemmer (Porter2).
//!
//! Expects lowercase input, which is what the preprocessing chain feeds it
//! after case folding. Conformance is pinned by the vendored vector file
//! `data/snowball_en_vectors.tsv`, generated from the Snowball project's
//! reference implementation; the `snowball_vectors` tests fail on any
//! disagreement.

/// Stem one lowercase word.
pub fn stem(input: &str) -> String {
    let mut word: Vec<char> = input.chars().collect();
    if word.len() <= 2 {
        return input.to_string();
    }

    if let Some(exception) = exceptional_form(input) {
        return exception;
    }

    if word[0] == '\'' {
        word.remove(0);
    }

    mark_consonant_ys(&mut word);
    let (r1, r2) = regions(&word);
    let mut s = Stemmer { word, r1, r2 };

    s.step_0();
    s.step_1a();
    if let Some(stopped) = post_1a_invariant(&s.word) {
        return stopped.to_string();
    }
    s.step_1b();
    s.step_1c();
    s.step_2();
    s.step_3();
    s.step_4();
    s.step_5();

    s.word
        .into_iter()
        .map(|c| if c == 'Y' { 'y' } else { c })
        .collect()
}

fn exceptional_form(word: &str) -> Option<String> {
    let mapped = match word {
        "skis" => "ski",
        "skies" => "sky",
        "dying" => "die",
        "lying" => "lie",
        "tying" => "tie",
        "idly" => "idl",
        "gently" => "gentl",
        "ugly" => "ugli",
        "early" => "earli",
        "only" => "onli",
        "singly" => "singl",
        "sky" | "news" | "howe" | "atlas" | "cosmos" | "bias" | "andes" => word,
        _ => return None,
    };
    Some(mapped.to_string())
}

fn post_1a_invariant(word: &[char]) -> Option<&'static str> {
    let w: String = word.iter().collect();
    match w.as_str() {
        "inning" => Some("inning"),
        "outing" => Some("outing"),
        "canning" => Some("canning"),
        "herring" => Some("herring"),
        "earring" => Some("earring"),
        "proceed" => Some("proceed"),
        "exceed" => Some("exceed"),
        "succeed" => Some("succeed"),
        _ => None,
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// `y` counting as a consonant is spelled `Y` until the postlude.
fn mark_consonant_ys(word: &mut [char]) {
    if word[0] == 'y' {
        word[0] = 'Y';
    }
    for i in 1..word.len() {
        if word[i] == 'y' && is_vowel(word[i - 1]) {
            word[i] = 'Y';
        }
    }
}

/// R1 is the region after the first non-vowel following a vowel; R2 the
/// same, computed within R1. Words beginning `gener`, `commun` or `arsen`
/// fix R1 right after that prefix.
fn regions(word: &[char]) -> (usize, usize) {
    let r1 = special_r1_prefix(word).unwrap_or_else(|| region_after(word, 0));
    let r2 = region_after(word, r1);
    (r1, r2)
}

fn special_r1_prefix(word: &[char]) -> Option<usize> {
    for prefix in ["gener", "commun", "arsen"] {
        if word.len() >= prefix.len() && word[..prefix.len()].iter().collect::<String>() == prefix {
            return Some(prefix.len());
        }
    }
    None
}

fn region_after(word: &[char], from: usize) -> usize {
    let mut seen_vowel = false;
    for (i, &c) in word.iter().enumerate().skip(from) {
        if is_vowel(c) {
            seen_vowel = true;
        } else if seen_vowel {
            return i + 1;
        }
    }
    word.len()
}

fn is_double(a: char, b: char) -> bool {
    a == b && matches!(a, 'b' | 'd' | 'f' | 'g' | 'm' | 'n' | 'p' | 'r' | 't')
}

fn ends_in_short_syllable(word: &[char]) -> bool {
    let n = word.len();
    if n >= 3
        && !is_vowel(word[n - 3])
        && is_vowel(word[n - 2])
        && !is_vowel(word[n - 1])
        && !matches!(word[n - 1], 'w' | 'x' | 'Y')
    {
        return true;
    }
    n == 2 && is_vowel(word[0]) && !is_vowel(word[1])
}

struct Stemmer {
    word: Vec<char>,
    r1: usize,
    r2: usize,
}

impl Stemmer {
    fn len(&self) -> usize {
        self.word.len()
    }

    fn ends_with(&self, suffix: &str) -> bool {
        let n = suffix.chars().count();
        if n > self.len() {
            return false;
        }
        self.word[self.len() - n..].iter().copied().eq(suffix.chars())
    }

    /// Longest suffix from `suffixes` (which must be sorted longest first)
    /// present at the end of the word, with its start position.
    fn longest_suffix(&self, suffixes: &[&'static str]) -> Option<(&'static str, usize)> {
        for &suffix in suffixes {
            if self.ends_with(suffix) {
                return Some((suffix, self.len() - suffix.chars().count()));
            }
        }
        None
    }

    fn in_r1(&self, pos: usize) -> bool {
        pos >= self.r1
    }

    fn in_r2(&self, pos: usize) -> bool {
        pos >= self.r2
    }

    fn truncate(&mut self, pos: usize) {
        self.word.truncate(pos);
    }

    fn replace(&mut self, pos: usize, with: &str) {
        self.word.truncate(pos);
        self.word.extend(with.chars());
    }

    fn has_vowel_before(&self, pos: usize) -> bool {
        self.word[..pos].iter().any(|&c| is_vowel(c))
    }

    /// Apostrophe suffixes.
    fn step_0(&mut self) {
        if let Some((_, pos)) = self.longest_suffix(&["'s'", "'s", "'"]) {
            self.truncate(pos);
        }
    }

    fn step_1a(&mut self) {
        if let Some((suffix, pos)) = self.longest_suffix(&["sses", "ied", "ies", "us", "ss", "s"]) {
            match suffix {
                "sses" => self.replace(pos, "ss"),
                "ied" | "ies" => {
                    // ties -> tie, cries -> cri.
                    if pos > 1 {
                        self.replace(pos, "i");
                    } else {
                        self.replace(pos, "ie");
                    }
                }
                // Delete only if some vowel precedes the penultimate
                // letter: gaps -> gap but gas -> gas.
                "s" if self.len() >= 2
                    && self.word[..self.len() - 2].iter().any(|&c| is_vowel(c)) =>
                {
                    self.truncate(pos);
                }
                _ => {} // us, ss
            }
        }
    }

    fn step_1b(&mut self) {
        if let Some((suffix, pos)) =
            self.longest_suffix(&["ingly", "eedly", "edly", "ing", "eed", "ed"])
        {
            match suffix {
                "eed" | "eedly" => {
                    if self.in_r1(pos) {
                        self.replace(pos, "ee");
                    }
                }
                _ => {
                    if self.has_vowel_before(pos) {
                        self.truncate(pos);
                        if self.ends_with("at") || self.ends_with("bl") || self.ends_with("iz") {
                            self.word.push('e');
                        } else if self.len() >= 2
                            && is_double(self.word[self.len() - 2], self.word[self.len() - 1])
                        {
                            self.word.pop();
                        } else if self.r1 >= self.len() && ends_in_short_syllable(&self.word) {
                            self.word.push('e');
                        }
                    }
                }
            }
        }
    }

    /// y after a non-vowel (other than at the word start) becomes i.
    fn step_1c(&mut self) {
        let n = self.len();
        if n > 2 && matches!(self.word[n - 1], 'y' | 'Y') && !is_vowel(self.word[n - 2]) {
            self.word[n - 1] = 'i';
        }
    }

    fn step_2(&mut self) {
        const SUFFIXES: &[&str] = &[
            "ization", "ational", "fulness", "ousness", "iveness", "tional", "biliti", "lessli",
            "entli", "ation", "alism", "aliti", "ousli", "iviti", "fulli", "enci", "anci", "abli",
            "izer", "ator", "alli", "bli", "ogi", "li",
        ];
        if let Some((suffix, pos)) = self.longest_suffix(SUFFIXES) {
            if !self.in_r1(pos) {
                return;
            }
            match suffix {
                "tional" => self.replace(pos, "tion"),
                "enci" => self.replace(pos, "ence"),
                "anci" => self.replace(pos, "ance"),
                "abli" => self.replace(pos, "able"),
                "entli" => self.replace(pos, "ent"),
                "izer" | "ization" => self.replace(pos, "ize"),
                "ational" | "ation" | "ator" => self.replace(pos, "ate"),
                "alism" | "aliti" | "alli" => self.replace(pos, "al"),
                "fulness" => self.replace(pos, "ful"),
                "ousli" | "ousness" => self.replace(pos, "ous"),
                "iveness" | "iviti" => self.replace(pos, "ive"),
                "biliti" | "bli" => self.replace(pos, "ble"),
                "ogi" => {
                    if pos > 0 && self.word[pos - 1] == 'l' {
                        self.replace(pos, "og");
                    }
                }
                "fulli" => self.replace(pos, "ful"),
                "lessli" => self.replace(pos, "less"),
                "li" => {
                    if pos > 0
                        && matches!(
                            self.word[pos - 1],
                            'c' | 'd' | 'e' | 'g' | 'h' | 'k' | 'm' | 'n' | 'r' | 't'
                        )
                    {
                        self.truncate(pos);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    fn step_3(&mut self) {
        const SUFFIXES: &[&str] = &[
            "ational", "tional", "alize", "icate", "iciti", "ative", "ical", "ness", "ful",
        ];
        if let Some((suffix, pos)) = self.longest_suffix(SUFFIXES) {
            if !self.in_r1(pos) {
                return;
            }
            match suffix {
                "ational" => self.replace(pos, "ate"),
                "tional" => self.replace(pos, "tion"),
                "alize" => self.replace(pos, "al"),
                "icate" | "iciti" | "ical" => self.replace(pos, "ic"),
                "ful" | "ness" => self.truncate(pos),
                "ative" => {
                    if self.in_r2(pos) {
                        self.truncate(pos);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    fn step_4(&mut self) {
        const SUFFIXES: &[&str] = &[
            "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism", "ate", "iti",
            "ous", "ive", "ize", "ion", "al", "er", "ic",
        ];
        if let Some((suffix, pos)) = self.longest_suffix(SUFFIXES) {
            if !self.in_r2(pos) {
                return;
            }
            if suffix == "ion" {
                if pos > 0 && matches!(self.word[pos - 1], 's' | 't') {
                    self.truncate(pos);
                }
            } else {
                self.truncate(pos);
            }
        }
    }

    fn step_5(&mut self) {
        let n = self.len();
        if n == 0 {
            return;
        }
        if self.word[n - 1] == 'e' {
            let pos = n - 1;
            if self.in_r2(pos)
                || (self.in_r1(pos) && !ends_in_short_syllable(&self.word[..pos]))
            {
                self.word.pop();
            }
        } else if self.word[n - 1] == 'l' {
            let pos = n - 1;
            if self.in_r2(pos) && n >= 2 && self.word[n - 2] == 'l' {
                self.word.pop();
            }
        }
    }
}
