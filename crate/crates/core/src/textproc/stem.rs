//! Porter stemmer.
//!
//! Follows the published reference implementation, including its two
//! departures from the original description (`-bli` → `-ble` and
//! `-logi` → `-log` in step 2). Input outside `[a-z]` is returned unchanged.

struct Stemmer {
    b: Vec<u8>,
    /// end of the current word (inclusive)
    k: usize,
    /// end of the stem after a successful `ends`
    j: usize,
}

impl Stemmer {
    fn cons(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.cons(i - 1),
            _ => true,
        }
    }

    /// Number of VC sequences in b[0..=j].
    fn m(&self) -> usize {
        let j = self.j;
        let mut n = 0;
        let mut i = 0;
        loop {
            if i > j {
                return n;
            }
            if !self.cons(i) {
                break;
            }
            i += 1;
        }
        i += 1;
        loop {
            loop {
                if i > j {
                    return n;
                }
                if self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
            n += 1;
            loop {
                if i > j {
                    return n;
                }
                if !self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
        }
    }

    fn vowel_in_stem(&self) -> bool {
        (0..=self.j).any(|i| !self.cons(i))
    }

    fn double_c(&self, j: usize) -> bool {
        j >= 1 && self.b[j] == self.b[j - 1] && self.cons(j)
    }

    /// cvc at i-2..=i where the final consonant is not w, x or y.
    fn cvc(&self, i: usize) -> bool {
        if i < 2 || !self.cons(i) || self.cons(i - 1) || !self.cons(i - 2) {
            return false;
        }
        !matches!(self.b[i], b'w' | b'x' | b'y')
    }

    fn ends(&mut self, s: &str) -> bool {
        let s = s.as_bytes();
        let len = s.len();
        if len > self.k + 1 {
            return false;
        }
        if &self.b[self.k + 1 - len..=self.k] != s {
            return false;
        }
        // j may wrap below zero conceptually; only used when m() > 0 etc.
        self.j = (self.k + 1 - len).wrapping_sub(1);
        true
    }

    fn set_to(&mut self, s: &str) {
        let start = self.j.wrapping_add(1);
        self.b.truncate(start);
        self.b.extend_from_slice(s.as_bytes());
        self.k = self.b.len() - 1;
    }

    fn r(&mut self, s: &str) {
        if self.j != usize::MAX && self.m() > 0 {
            self.set_to(s);
        }
    }

    fn step1ab(&mut self) {
        if self.b[self.k] == b's' {
            if self.ends("sses") {
                self.k -= 2;
            } else if self.ends("ies") {
                self.set_to("i");
            } else if self.b[self.k - 1] != b's' {
                self.k -= 1;
            }
            self.b.truncate(self.k + 1);
        }
        if self.ends("eed") {
            if self.j != usize::MAX && self.m() > 0 {
                self.k -= 1;
                self.b.truncate(self.k + 1);
            }
        } else if (self.ends("ed") || self.ends("ing"))
            && self.j != usize::MAX
            && self.vowel_in_stem()
        {
            self.k = self.j;
            self.b.truncate(self.k + 1);
            if self.ends("at") {
                self.set_to("ate");
            } else if self.ends("bl") {
                self.set_to("ble");
            } else if self.ends("iz") {
                self.set_to("ize");
            } else if self.double_c(self.k) {
                if !matches!(self.b[self.k], b'l' | b's' | b'z') {
                    self.k -= 1;
                    self.b.truncate(self.k + 1);
                }
            } else {
                self.j = self.k;
                if self.m() == 1 && self.cvc(self.k) {
                    self.b.push(b'e');
                    self.k += 1;
                }
            }
        }
    }

    fn step1c(&mut self) {
        if self.ends("y") && self.j != usize::MAX && self.vowel_in_stem() {
            self.b[self.k] = b'i';
        }
    }

    fn step2(&mut self) {
        if self.k == 0 {
            return;
        }
        const RULES: &[(u8, &[(&str, &str)])] = &[
            (b'a', &[("ational", "ate"), ("tional", "tion")]),
            (b'c', &[("enci", "ence"), ("anci", "ance")]),
            (b'e', &[("izer", "ize")]),
            (
                b'l',
                &[
                    ("bli", "ble"),
                    ("alli", "al"),
                    ("entli", "ent"),
                    ("eli", "e"),
                    ("ousli", "ous"),
                ],
            ),
            (b'o', &[("ization", "ize"), ("ation", "ate"), ("ator", "ate")]),
            (b's', &[("alism", "al"), ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous")]),
            (b't', &[("aliti", "al"), ("iviti", "ive"), ("biliti", "ble")]),
            (b'g', &[("logi", "log")]),
        ];
        self.apply_rules(self.b[self.k - 1], RULES);
    }

    fn step3(&mut self) {
        const RULES: &[(u8, &[(&str, &str)])] = &[
            (b'e', &[("icate", "ic"), ("ative", ""), ("alize", "al")]),
            (b'i', &[("iciti", "ic")]),
            (b'l', &[("ical", "ic"), ("ful", "")]),
            (b's', &[("ness", "")]),
        ];
        self.apply_rules(self.b[self.k], RULES);
    }

    fn apply_rules(&mut self, key: u8, rules: &[(u8, &[(&str, &str)])]) {
        if let Some((_, table)) = rules.iter().find(|(c, _)| *c == key) {
            for (suffix, repl) in table.iter() {
                if self.ends(suffix) {
                    self.r(repl);
                    return;
                }
            }
        }
    }

    fn step4(&mut self) {
        if self.k == 0 {
            return;
        }
        const SUFFIXES: &[(u8, &[&str])] = &[
            (b'a', &["al"]),
            (b'c', &["ance", "ence"]),
            (b'e', &["er"]),
            (b'i', &["ic"]),
            (b'l', &["able", "ible"]),
            (b'n', &["ant", "ement", "ment", "ent"]),
            (b'o', &["ion", "ou"]),
            (b's', &["ism"]),
            (b't', &["ate", "iti"]),
            (b'u', &["ous"]),
            (b'v', &["ive"]),
            (b'z', &["ize"]),
        ];
        let key = self.b[self.k - 1];
        let Some((_, table)) = SUFFIXES.iter().find(|(c, _)| *c == key) else {
            return;
        };
        let mut matched = false;
        for suffix in table.iter() {
            if *suffix == "ion" {
                if self.ends("ion")
                    && self.j != usize::MAX
                    && matches!(self.b[self.j], b's' | b't')
                {
                    matched = true;
                    break;
                }
            } else if self.ends(suffix) {
                matched = true;
                break;
            }
        }
        if matched && self.j != usize::MAX && self.m() > 1 {
            self.k = self.j;
            self.b.truncate(self.k + 1);
        }
    }

    fn step5(&mut self) {
        self.j = self.k;
        if self.b[self.k] == b'e' {
            self.j = self.k - 1;
            let a = self.m();
            if a > 1 || (a == 1 && !self.cvc(self.k - 1)) {
                self.k -= 1;
                self.b.truncate(self.k + 1);
            }
        }
        self.j = self.k;
        if self.b[self.k] == b'l' && self.double_c(self.k) && self.m() > 1 {
            self.k -= 1;
            self.b.truncate(self.k + 1);
        }
    }
}

/// Porter stem of a lowercase ASCII word.
pub fn stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|c| c.is_ascii_lowercase()) {
        return word.to_string();
    }
    let b = word.as_bytes().to_vec();
    let k = b.len() - 1;
    let mut s = Stemmer { b, k, j: 0 };
    s.step1ab();
    if s.k > 0 {
        s.step1c();
        s.step2();
        s.step3();
        s.step4();
        s.step5();
    }
    s.b.truncate(s.k + 1);
    String::from_utf8(s.b).expect("ascii in, ascii out")
}

/// Lowercases then stems; non-alphabetic words are only lowercased.
pub fn stem_lower(word: &str) -> String {
    stem(&word.to_lowercase())
}
