//! Date templates: a date mention with its numbers and month names abstracted
//! into fields, e.g. `June 6 , 2007` becomes `MONTH DAY , YEAR` and `010911`
//! becomes `YYMMDD`.

use regex::Regex;

use crate::linearize::LinToken;

const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

/// The fields of a `date-entity` that templates can express.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DateFields {
    pub year: Option<i64>,
    pub month: Option<i64>,
    pub day: Option<i64>,
}

impl DateFields {
    pub fn is_empty(&self) -> bool {
        self.year.is_none() && self.month.is_none() && self.day.is_none()
    }

    /// `date-entity :year( 2007 )year :month( 6 )month :day( 6 )day`, fields in that order.
    pub fn fragment(&self) -> Vec<LinToken> {
        let mut out = vec![LinToken::Concept("date-entity".into())];
        for (role, v) in [("year", self.year), ("month", self.month), ("day", self.day)] {
            if let Some(v) = v {
                out.push(LinToken::RelOpen(role.into()));
                out.push(LinToken::Constant(v.to_string()));
                out.push(LinToken::RelClose(role.into()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Year,
    ShortYear,
    MonthName,
    MonthNum,
    MonthPadded,
    Day,
    DayPadded,
}

impl Field {
    // Matched greedily in this order when reading a template back.
    const ALL: [(Field, &'static str); 7] = [
        (Field::Year, "YEAR"),
        (Field::ShortYear, "YY"),
        (Field::MonthName, "MONTH"),
        (Field::MonthPadded, "MM"),
        (Field::MonthNum, "MN"),
        (Field::DayPadded, "DD"),
        (Field::Day, "DAY"),
    ];

    fn name(self) -> &'static str {
        Field::ALL
            .iter()
            .find(|(f, _)| *f == self)
            .map(|(_, n)| *n)
            .unwrap_or("")
    }

    fn pattern(self) -> &'static str {
        match self {
            Field::Year => r"(\d{4})",
            Field::ShortYear | Field::MonthPadded | Field::DayPadded => r"(\d{2})",
            Field::MonthName => r"([A-Za-z]+)\.?",
            Field::MonthNum | Field::Day => r"(\d{1,2})",
        }
    }
}

#[derive(Debug, Clone)]
enum Piece {
    Lit(String),
    Field(Field),
}

/// A compiled date template.
#[derive(Debug, Clone)]
pub struct DateTemplate {
    text: String,
    fields: Vec<Field>,
    regex: Regex,
    tokens: usize,
}

impl PartialEq for DateTemplate {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl DateTemplate {
    pub fn parse(text: &str) -> Option<DateTemplate> {
        let pieces = read_pieces(text);
        let fields: Vec<Field> = pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Field(f) => Some(*f),
                Piece::Lit(_) => None,
            })
            .collect();
        if fields.is_empty() {
            return None;
        }
        let mut re = String::from("^");
        for p in &pieces {
            match p {
                Piece::Lit(s) => re.push_str(&regex::escape(s)),
                Piece::Field(f) => re.push_str(f.pattern()),
            }
        }
        re.push('$');
        Some(DateTemplate {
            text: text.to_string(),
            fields,
            regex: Regex::new(&re).ok()?,
            tokens: text.split(' ').count(),
        })
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Number of whitespace-separated tokens the template spans.
    pub fn token_len(&self) -> usize {
        self.tokens
    }

    /// Reads the date fields out of a space-joined mention.
    pub fn read(&self, mention: &str) -> Option<DateFields> {
        let caps = self.regex.captures(mention)?;
        let mut d = DateFields::default();
        for (i, f) in self.fields.iter().enumerate() {
            let s = caps.get(i + 1)?.as_str();
            match f {
                Field::MonthName => d.month = Some(month_number(s)?),
                _ => {
                    let v: i64 = s.parse().ok()?;
                    match f {
                        Field::Year => d.year = Some(v),
                        Field::ShortYear => d.year = Some(expand_short_year(v)),
                        Field::MonthNum | Field::MonthPadded => d.month = Some(v),
                        _ => d.day = Some(v),
                    }
                }
            }
        }
        let month_ok = d.month.is_none_or(|m| (1..=12).contains(&m));
        let day_ok = d.day.is_none_or(|x| (1..=31).contains(&x));
        (month_ok && day_ok).then_some(d)
    }

    /// Abstracts a mention into a template given the gold fields. Returns
    /// `None` unless every gold field is found in the mention.
    pub fn learn(mention: &[String], gold: &DateFields) -> Option<String> {
        if gold.is_empty() {
            return None;
        }
        let mut used = [false; 3];
        let mut out = Vec::with_capacity(mention.len());
        for tok in mention {
            let mut t = String::new();
            for run in runs(tok) {
                t.push_str(&abstract_run(run, gold, &mut used));
            }
            out.push(t);
        }
        let need = [gold.year.is_some(), gold.month.is_some(), gold.day.is_some()];
        if need != used {
            return None;
        }
        let text = out.join(" ");
        DateTemplate::parse(&text)
            .filter(|t| t.read(&mention.join(" ")) == Some(*gold))
            .map(|_| text)
    }
}

fn read_pieces(text: &str) -> Vec<Piece> {
    let mut pieces = Vec::new();
    let mut lit = String::new();
    let mut rest = text;
    'outer: while !rest.is_empty() {
        for (f, name) in Field::ALL {
            if let Some(r) = rest.strip_prefix(name) {
                if !lit.is_empty() {
                    pieces.push(Piece::Lit(std::mem::take(&mut lit)));
                }
                pieces.push(Piece::Field(f));
                rest = r;
                continue 'outer;
            }
        }
        let c = rest.chars().next().expect("non-empty");
        lit.push(c);
        rest = &rest[c.len_utf8()..];
    }
    if !lit.is_empty() {
        pieces.push(Piece::Lit(lit));
    }
    pieces
}

// Maximal digit runs, letter runs, and single other characters.
fn runs(tok: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = tok.char_indices().collect();
    for i in 0..chars.len() {
        let (b, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, n)| n);
        let same = |n: char| (c.is_ascii_digit() && n.is_ascii_digit()) || (c.is_alphabetic() && n.is_alphabetic());
        if next.is_none_or(|n| !same(n)) {
            out.push(&tok[start..b + c.len_utf8()]);
            start = b + c.len_utf8();
        }
    }
    out
}

fn abstract_run(run: &str, gold: &DateFields, used: &mut [bool; 3]) -> String {
    let free = |i: usize, v: Option<i64>, used: &[bool; 3]| v.filter(|_| !used[i]);
    if run.chars().all(|c| c.is_ascii_digit()) {
        let v: i64 = match run.parse() {
            Ok(v) => v,
            Err(_) => return run.to_string(),
        };
        let len = run.len();
        let padded = len == 2 && run.starts_with('0');
        if len == 8 {
            let (y, m, d) = (v / 10000, v / 100 % 100, v % 100);
            if used == &[false; 3] && gold.year == Some(y) && gold.month == Some(m) && gold.day == Some(d) {
                *used = [true; 3];
                return "YEARMMDD".into();
            }
        }
        if len == 6 {
            let (y, m, d) = (v / 10000, v / 100 % 100, v % 100);
            if used == &[false; 3]
                && gold.year == Some(expand_short_year(y))
                && gold.month == Some(m)
                && gold.day == Some(d)
            {
                *used = [true; 3];
                return "YYMMDD".into();
            }
        }
        if len == 4 && free(0, gold.year, used) == Some(v) {
            used[0] = true;
            return Field::Year.name().into();
        }
        if len <= 2 {
            if free(1, gold.month, used) == Some(v) {
                used[1] = true;
                return if padded { Field::MonthPadded } else { Field::MonthNum }.name().into();
            }
            if free(2, gold.day, used) == Some(v) {
                used[2] = true;
                return if padded { Field::DayPadded } else { Field::Day }.name().into();
            }
            if len == 2 && free(0, gold.year, used) == Some(expand_short_year(v)) {
                used[0] = true;
                return Field::ShortYear.name().into();
            }
        }
        return run.to_string();
    }
    if run.chars().all(char::is_alphabetic) {
        if let (Some(m), Some(g)) = (month_number(run), free(1, gold.month, used)) {
            if m == g {
                used[1] = true;
                return Field::MonthName.name().into();
            }
        }
    }
    run.to_string()
}

fn month_number(s: &str) -> Option<i64> {
    let l = s.trim_end_matches('.').to_lowercase();
    if l.len() < 3 {
        return None;
    }
    MONTHS
        .iter()
        .position(|m| *m == l || (l.len() >= 3 && m.starts_with(&l) && l.len() <= 4))
        .map(|i| i as i64 + 1)
}

/// Two-digit years up to 30 are 20xx, the rest 19xx.
fn expand_short_year(yy: i64) -> i64 {
    if yy <= 30 {
        2000 + yy
    } else {
        1900 + yy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    fn ymd(y: i64, m: i64, d: i64) -> DateFields {
        DateFields {
            year: Some(y),
            month: Some(m),
            day: Some(d),
        }
    }

    #[test]
    fn learns_month_name_template() {
        let t = DateTemplate::learn(&toks("June 6 , 2007"), &ymd(2007, 6, 6)).unwrap();
        assert_eq!(t, "MONTH DAY , YEAR");
        let tpl = DateTemplate::parse(&t).unwrap();
        assert_eq!(tpl.read("March 12 , 1999"), Some(ymd(1999, 3, 12)));
        assert_eq!(tpl.read("Foo 12 , 1999"), None);
        assert_eq!(tpl.token_len(), 4);
    }

    #[test]
    fn learns_compact_template() {
        assert_eq!(
            DateTemplate::learn(&toks("010911"), &ymd(2001, 9, 11)).unwrap(),
            "YYMMDD"
        );
        let tpl = DateTemplate::parse("YYMMDD").unwrap();
        assert_eq!(tpl.read("070606"), Some(ymd(2007, 6, 6)));
        assert_eq!(tpl.read("071306"), None);
        assert_eq!(
            DateTemplate::learn(&toks("20070606"), &ymd(2007, 6, 6)).unwrap(),
            "YEARMMDD"
        );
    }

    #[test]
    fn year_only_and_ordinals() {
        let y = DateFields {
            year: Some(1990),
            ..Default::default()
        };
        assert_eq!(DateTemplate::learn(&toks("1990"), &y).unwrap(), "YEAR");
        let md = DateFields {
            month: Some(7),
            day: Some(4),
            year: None,
        };
        assert_eq!(
            DateTemplate::learn(&toks("4th of July"), &md).unwrap(),
            "DAYth of MONTH"
        );
        assert_eq!(
            DateTemplate::learn(&toks("2007-06-06"), &ymd(2007, 6, 6)).unwrap(),
            "YEAR-MM-DD"
        );
    }

    #[test]
    fn missing_field_fails() {
        assert_eq!(DateTemplate::learn(&toks("June 2007"), &ymd(2007, 6, 6)), None);
        assert_eq!(DateTemplate::learn(&toks("yesterday"), &DateFields::default()), None);
        assert!(DateTemplate::parse("no fields here").is_none());
    }

    #[test]
    fn fragment_tokens() {
        let f: Vec<String> = ymd(2007, 6, 6).fragment().iter().map(|t| t.to_string()).collect();
        assert_eq!(
            f.join(" "),
            "date-entity :year( 2007 )year :month( 6 )month :day( 6 )day"
        );
    }
}
