//! The bundled fixture corpus carries known statistics; the analysis must
//! recover them exactly.

use biaslens::analysis::{analyze_corpus, Analyzer, MentionStats};
use biaslens::corpus::GenderLabel;
use biaslens::textproc::Pipeline;
use biaslens::{resources, Execution};

fn analyzer() -> Analyzer {
    Analyzer::new(Pipeline::bundled(), resources::census_sample(), resources::occupations())
}

#[test]
fn fixture_shape() {
    let books = resources::fixture_corpus();
    assert_eq!(books.len(), 50);
    assert_eq!(books.iter().map(|b| b.year).min(), Some(1969));
    assert_eq!(books.iter().map(|b| b.year).max(), Some(2017));
}

#[test]
fn every_book_has_the_planted_counts() {
    let a = analyzer();
    let planted = MentionStats {
        male_name: 2,
        male_pronoun: 2,
        female_name: 1,
        female_pronoun: 1,
        unknown: 0,
    };
    for book in resources::fixture_corpus() {
        let r = a.analyze_book(&book);
        assert_eq!(r.mentions, planted, "{}", book.id);
        assert_eq!(r.occupations.mean_level(GenderLabel::Male), Some(5.0), "{}", book.id);
        assert_eq!(r.occupations.mean_level(GenderLabel::Female), Some(2.0), "{}", book.id);
        assert_eq!(r.adjectives.male.counts.len(), 2, "{}", book.id);
        assert_eq!(r.adjectives.female.counts.len(), 1, "{}", book.id);
        assert_eq!(r.central.as_ref().map(|c| c.gender), Some(GenderLabel::Male));
    }
}

#[test]
fn corpus_totals() {
    let a = analyzer();
    let r = analyze_corpus(&resources::fixture_corpus(), &a, Execution::default());
    assert_eq!((r.mentions.male(), r.mentions.female()), (200, 100));
    assert_eq!(r.mentions.ratio(), Some(2.0));
    assert_eq!(r.occupations.count(GenderLabel::Male), 50);
    assert_eq!(r.occupations.count(GenderLabel::Female), 50);
    assert_eq!(r.occupations.mean_level(GenderLabel::Male), Some(5.0));
    assert_eq!(r.occupations.mean_level(GenderLabel::Female), Some(2.0));
    for (term, _) in r.occupations.counts.male.counts.iter().chain(&r.occupations.counts.female.counts) {
        assert!(a.occupations.contains(term), "{term}");
    }
}
